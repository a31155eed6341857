//! Projective energy measurement: spectral projectors, Born probabilities,
//! the collapse map, seeded sampling, and entropy-reduction accounting.
//!
//! Measurement resolves the level, not the microstate. Collapse onto a
//! g-fold degenerate level leaves a pure input as the renormalized projected
//! vector inside that subspace (entropy 0), and a thermal-diagonal input as
//! the uniform mixture over the level's microstates (entropy ln g). Thermal
//! states are sampled through their diagonal representation: the Gibbs
//! density operator is energy-diagonal, so Born statistics are exactly the
//! level populations.
//!
//! Randomness comes from ChaCha8 streams. Ensembles derive one stream per
//! trial from (master seed, trial index), so results are independent of
//! execution order and worker count.

use std::io::{self, Write};

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::output::sig17;
use crate::scalar::Scalar;
use crate::spectra::{validate_levels, Level, SpectrumModel, TruncationPolicy};
use crate::thermo::{entropy, gibbs_populations, gibbs_state, ThermalState};

/// Norm defect tolerated in state vectors.
pub const STATE_NORM_TOL: f64 = 1e-12;

/// A pure state: one complex amplitude per microstate of a truncated
/// spectrum, microstates grouped by level (degenerate levels carry one
/// amplitude per microstate).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<S> {
    levels: Vec<Level<S>>,
    amplitudes: Vec<Complex<S>>,
    offsets: Vec<usize>, // offsets[i] = first microstate of level i; sentinel at the end
}

fn level_offsets<S: Scalar>(levels: &[Level<S>]) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(levels.len() + 1);
    let mut acc = 0usize;
    offsets.push(0);
    for level in levels {
        acc += level.degeneracy as usize;
        offsets.push(acc);
    }
    offsets
}

impl<S: Scalar> StateVector<S> {
    /// Validates normalization: sum of |c|^2 must be 1 within 1e-12.
    pub fn new(levels: Vec<Level<S>>, amplitudes: Vec<Complex<S>>) -> Result<Self> {
        validate_levels(&levels)?;
        let offsets = level_offsets(&levels);
        let microstates = *offsets.last().unwrap();
        if amplitudes.len() != microstates {
            return Err(Error::InvalidState(format!(
                "expected {microstates} amplitudes (one per microstate), got {}",
                amplitudes.len()
            )));
        }
        let norm: S = amplitudes
            .iter()
            .fold(S::zero(), |acc, c| acc + c.norm_sqr());
        if (norm - S::one()).abs() > S::tol(STATE_NORM_TOL) {
            return Err(Error::InvalidState(format!(
                "state vector norm^2 is {} instead of 1",
                norm.as_f64()
            )));
        }
        Ok(Self {
            levels,
            amplitudes,
            offsets,
        })
    }

    /// Rescales arbitrary amplitudes to unit norm first.
    pub fn normalized(levels: Vec<Level<S>>, amplitudes: Vec<Complex<S>>) -> Result<Self> {
        let norm_sqr: S = amplitudes
            .iter()
            .fold(S::zero(), |acc, c| acc + c.norm_sqr());
        if !(norm_sqr > S::zero()) {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        let inv = norm_sqr.sqrt().recip();
        let rescaled = amplitudes.into_iter().map(|c| c * inv).collect();
        Self::new(levels, rescaled)
    }

    /// The canonical ground vector: uniform amplitudes over the ground
    /// level's microstates.
    pub fn ground(levels: Vec<Level<S>>) -> Result<Self> {
        validate_levels(&levels)?;
        let offsets = level_offsets(&levels);
        let g0 = levels[0].degeneracy as usize;
        let amp = S::from_count(levels[0].degeneracy).sqrt().recip();
        let mut amplitudes = vec![Complex::new(S::zero(), S::zero()); *offsets.last().unwrap()];
        for slot in amplitudes.iter_mut().take(g0) {
            *slot = Complex::new(amp, S::zero());
        }
        Self::new(levels, amplitudes)
    }

    pub fn levels(&self) -> &[Level<S>] {
        &self.levels
    }

    pub fn amplitudes(&self) -> &[Complex<S>] {
        &self.amplitudes
    }

    pub fn microstate_count(&self) -> usize {
        self.amplitudes.len()
    }

    /// The projector onto level `i`'s eigensubspace.
    pub fn projector(&self, level: usize) -> Result<EnergyProjector> {
        if level >= self.levels.len() {
            return Err(Error::InvalidArgument(format!(
                "level index {level} out of range"
            )));
        }
        Ok(EnergyProjector {
            level,
            start: self.offsets[level],
            end: self.offsets[level + 1],
        })
    }

    pub fn projectors(&self) -> Vec<EnergyProjector> {
        (0..self.levels.len())
            .map(|i| self.projector(i).expect("index in range"))
            .collect()
    }
}

/// P_i: zeroes every amplitude outside level `i`'s microstates. Idempotent,
/// and the full set sums to the identity on the truncated space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnergyProjector {
    level: usize,
    start: usize,
    end: usize,
}

impl EnergyProjector {
    pub fn level(&self) -> usize {
        self.level
    }

    /// Applies the projector without renormalizing; the squared norm of the
    /// result is the Born probability of this outcome.
    pub fn apply<S: Scalar>(&self, state: &StateVector<S>) -> Vec<Complex<S>> {
        let zero = Complex::new(S::zero(), S::zero());
        state
            .amplitudes
            .iter()
            .enumerate()
            .map(|(m, &c)| {
                if m >= self.start && m < self.end {
                    c
                } else {
                    zero
                }
            })
            .collect()
    }
}

/// Born probabilities per level: q_i = sum of |c|^2 over level i's
/// microstates.
pub fn born_probabilities<S: Scalar>(state: &StateVector<S>) -> Vec<S> {
    state
        .levels
        .iter()
        .enumerate()
        .map(|(i, _)| {
            state.amplitudes[state.offsets[i]..state.offsets[i + 1]]
                .iter()
                .fold(S::zero(), |acc, c| acc + c.norm_sqr())
        })
        .collect()
}

/// The collapse map: P_i |psi> / sqrt(<psi|P_i|psi>). Outcomes of zero
/// probability cannot be collapsed onto.
pub fn project<S: Scalar>(state: &StateVector<S>, level: usize) -> Result<StateVector<S>> {
    let projector = state.projector(level)?;
    let projected = projector.apply(state);
    let prob: S = projected
        .iter()
        .fold(S::zero(), |acc, c| acc + c.norm_sqr());
    if !(prob > S::zero()) {
        return Err(Error::ZeroProbabilityOutcome { level });
    }
    let inv = prob.sqrt().recip();
    StateVector::new(
        state.levels.clone(),
        projected.into_iter().map(|c| c * inv).collect(),
    )
}

/// Post-measurement state: the projected vector for pure inputs, the
/// level-collapsed mixture for thermal inputs.
#[derive(Debug, Clone, PartialEq)]
pub enum PostMeasurementState<S> {
    Pure(StateVector<S>),
    Thermal(ThermalState<S>),
}

/// Everything recorded about one sampled measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementRecord<S> {
    pub outcome_level: usize,
    pub outcome_energy: S,
    /// Born probability of the observed outcome.
    pub probability: S,
    pub post: PostMeasurementState<S>,
    pub entropy_before: S,
    pub entropy_after: S,
    /// 0 exactly when the outcome is the ground level (a system in its
    /// ground state is the one case with a consistent temperature), `None`
    /// otherwise.
    pub temperature: Option<S>,
}

fn draw_index<S: Scalar>(probs: &[S], rng: &mut ChaCha8Rng) -> usize {
    let u = S::lit(rng.random::<f64>());
    let mut acc = S::zero();
    for (i, &p) in probs.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    probs.len() - 1 // float tail: the cumulative sum fell short of 1
}

/// Samples one projective energy measurement of a thermal-diagonal state.
/// Identical (state, seed) pairs produce identical records.
pub fn sample_measurement<S: Scalar>(state: &ThermalState<S>, seed: u64) -> MeasurementRecord<S> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_thermal_with(state, &mut rng)
}

fn sample_thermal_with<S: Scalar>(
    state: &ThermalState<S>,
    rng: &mut ChaCha8Rng,
) -> MeasurementRecord<S> {
    let outcome = draw_index(state.populations(), rng);
    thermal_record(state, outcome)
}

fn thermal_record<S: Scalar>(state: &ThermalState<S>, outcome: usize) -> MeasurementRecord<S> {
    let levels = state.levels();
    let entropy_before = entropy(state);
    let post = if outcome == 0 {
        // Ground outcome: exactly the zero-temperature Gibbs state.
        gibbs_populations(levels, S::zero()).expect("levels already validated")
    } else {
        let mut populations = vec![S::zero(); levels.len()];
        populations[outcome] = S::one();
        ThermalState::from_populations(levels.to_vec(), populations, None)
            .expect("one-hot populations are valid")
    };
    let entropy_after = entropy(&post);
    MeasurementRecord {
        outcome_level: outcome,
        outcome_energy: levels[outcome].energy,
        probability: state.populations()[outcome],
        temperature: if outcome == 0 { Some(S::zero()) } else { None },
        post: PostMeasurementState::Thermal(post),
        entropy_before,
        entropy_after,
    }
}

/// Samples one projective energy measurement of a pure state.
pub fn sample_measurement_pure<S: Scalar>(
    state: &StateVector<S>,
    seed: u64,
) -> Result<MeasurementRecord<S>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let probs = born_probabilities(state);
    let outcome = draw_index(&probs, &mut rng);
    let post = project(state, outcome)?;
    Ok(MeasurementRecord {
        outcome_level: outcome,
        outcome_energy: state.levels()[outcome].energy,
        probability: probs[outcome],
        temperature: if outcome == 0 { Some(S::zero()) } else { None },
        post: PostMeasurementState::Pure(post),
        // Pure in, pure out.
        entropy_before: S::zero(),
        entropy_after: S::zero(),
    })
}

/// One row of an ensemble run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnsembleOutcome<S> {
    pub trial: u64,
    pub outcome_level: usize,
    pub outcome_energy: S,
    pub post_entropy: S,
}

/// Samples `n_trials` independent measurements of `state`, one ChaCha8
/// stream per trial index, in parallel. The row order (by trial) and every
/// value are independent of the worker count.
pub fn measure_ensemble<S: Scalar>(
    state: &ThermalState<S>,
    n_trials: u64,
    master_seed: u64,
) -> Vec<EnsembleOutcome<S>> {
    (0..n_trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
            rng.set_stream(trial);
            let outcome = draw_index(state.populations(), &mut rng);
            let level = state.levels()[outcome];
            EnsembleOutcome {
                trial,
                outcome_level: outcome,
                outcome_energy: level.energy,
                // Level collapse of a diagonal state: uniform over the
                // level's microstates, entropy ln g.
                post_entropy: S::from_count(level.degeneracy).ln(),
            }
        })
        .collect()
}

/// CSV with columns trial, outcome_level, outcome_energy, post_entropy.
pub fn write_ensemble_csv<S: Scalar, W: Write>(
    rows: &[EnsembleOutcome<S>],
    w: &mut W,
) -> io::Result<()> {
    writeln!(w, "trial,outcome_level,outcome_energy,post_entropy")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{}",
            r.trial,
            r.outcome_level,
            sig17(r.outcome_energy),
            sig17(r.post_entropy)
        )?;
    }
    Ok(())
}

/// Ground-state attainment statistics for Gibbs(T) under repeated sampling.
#[derive(Debug, Clone)]
pub struct AttainmentReport<S> {
    pub temperature: S,
    pub trials: u64,
    pub ground_hits: u64,
    pub empirical_ground_frequency: S,
    /// Exact Born value q_0 = g_0 / Z.
    pub exact_q0: S,
    /// Binomial standard deviation sqrt(q0 (1 - q0) / n).
    pub sigma: S,
    /// Three-sigma band around the exact value.
    pub ci_lo: S,
    pub ci_hi: S,
    pub within_ci: bool,
    /// q_0 over a geometric temperature grid around `temperature`.
    pub q0_grid: Vec<(S, S)>,
    /// Colder is better: q_0 strictly decreases along the grid.
    pub q0_strictly_decreasing: bool,
}

/// Runs `n_trials` seeded measurements on Gibbs(T) and reports the ground-hit
/// frequency against the exact Born value, plus the monotonicity of q_0 in T.
pub fn ground_state_attainment<S: Scalar>(
    model: &SpectrumModel<S>,
    x: S,
    temperature: S,
    n_trials: u64,
    seed: u64,
    policy: &TruncationPolicy<S>,
) -> Result<AttainmentReport<S>> {
    if n_trials == 0 {
        return Err(Error::InvalidArgument(
            "at least one trial is required".into(),
        ));
    }
    if !(temperature > S::zero()) {
        return Err(Error::InvalidArgument(
            "attainment statistics require T > 0".into(),
        ));
    }
    let state = gibbs_state(model, x, temperature, policy)?;
    let rows = measure_ensemble(&state, n_trials, seed);
    let hits = rows.iter().filter(|r| r.outcome_level == 0).count() as u64;
    let n = S::from_u64(n_trials).expect("trial count");
    let empirical = S::from_u64(hits).expect("hit count") / n;
    let q0 = state.populations()[0];
    let sigma = (q0 * (S::one() - q0) / n).sqrt();
    let three = S::lit(3.0);
    let (ci_lo, ci_hi) = (q0 - three * sigma, q0 + three * sigma);

    let quarter = S::lit(0.25);
    let grid = [
        temperature * quarter,
        temperature * S::lit(0.5),
        temperature,
        temperature * S::lit(2.0),
        temperature * S::lit(4.0),
    ];
    let mut q0_grid = Vec::with_capacity(grid.len());
    for &t in &grid {
        let gibbs = gibbs_state(model, x, t, policy)?;
        q0_grid.push((t, gibbs.populations()[0]));
    }
    let q0_strictly_decreasing = q0_grid.windows(2).all(|w| w[1].1 < w[0].1);

    Ok(AttainmentReport {
        temperature,
        trials: n_trials,
        ground_hits: hits,
        empirical_ground_frequency: empirical,
        exact_q0: q0,
        sigma,
        ci_lo,
        ci_hi,
        within_ci: empirical >= ci_lo && empirical <= ci_hi,
        q0_grid,
        q0_strictly_decreasing,
    })
}

/// Entropy bookkeeping over a batch of measurement records.
#[derive(Debug, Clone, Copy)]
pub struct EntropyReductionReport<S> {
    pub entropy_before: S,
    pub mean_entropy_after: S,
    pub drop: S,
    /// Average post-measurement entropy never exceeds the pre-measurement
    /// entropy.
    pub non_increasing: bool,
}

/// Averages the post-measurement entropies of `records` (all drawn from
/// `pre`) against the entropy of `pre` itself.
pub fn entropy_reduction<S: Scalar>(
    pre: &ThermalState<S>,
    records: &[MeasurementRecord<S>],
) -> EntropyReductionReport<S> {
    let s_pre = entropy(pre);
    let mean_after = if records.is_empty() {
        S::zero()
    } else {
        let sum = records
            .iter()
            .fold(S::zero(), |acc, r| acc + r.entropy_after);
        sum / S::from_usize(records.len()).expect("record count")
    };
    EntropyReductionReport {
        entropy_before: s_pre,
        mean_entropy_after: mean_after,
        drop: s_pre - mean_after,
        non_increasing: mean_after <= s_pre + S::tol(1e-12),
    }
}
