//! Numerical verifier for the two adiabatic-reachability arguments and their
//! equivalence with the uniqueness of zero-temperature entropy.
//!
//! Forward direction: if S(0) is parameter-independent, an adiabat ending at
//! T = 0 would force the integral of C(t)/t to be nonpositive, contradicting
//! its strict positivity ([`forward_contradiction`]). Reverse direction: the
//! equation `integral_0^T1 C_alpha(t)/t dt = S(0,beta) - S(0,alpha)` either
//! has no nonnegative solution (unattainability from every start) or pins
//! the largest start temperature from which an adiabat lands exactly on
//! T = 0 ([`b2_solve`]). The [`equivalence_harness`] stress-tests both
//! directions over randomized spectrum pairs.
//!
//! Harness checks are pure and distributed over parallel workers; one RNG
//! stream per pair index makes the report identical for any worker count.

use std::io::{self, Write};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::numeric::solve_increasing;
use crate::output::sig17;
use crate::processes::{staircase, StaircaseResult};
use crate::scalar::Scalar;
use crate::spectra::{Level, SpectrumModel, TruncationPolicy};
use crate::thermo::EntropySurface;

/// One adiabatic transition checked against the entropy inequality: cooling
/// from `(t_hot, beta)` to `(t_cold, alpha)` must not lower the entropy.
#[derive(Debug, Clone, Copy)]
pub struct AdiabatCheck<S> {
    pub from_parameter: S,
    pub from_temperature: S,
    pub from_entropy: S,
    pub to_parameter: S,
    pub to_temperature: S,
    pub to_entropy: S,
    pub satisfied: bool,
}

/// Entropy slack tolerated in [`second_law_check`].
pub const SECOND_LAW_TOL: f64 = 1e-12;

/// Evaluates both entropies and reports whether the transition
/// `before -> after` is consistent with a non-decreasing system entropy.
pub fn second_law_check<S: Scalar>(
    before: (&EntropySurface<S>, S),
    after: (&EntropySurface<S>, S),
) -> Result<AdiabatCheck<S>> {
    let (surf_from, t_from) = before;
    let (surf_to, t_to) = after;
    let s_from = surf_from.entropy(t_from)?;
    let s_to = surf_to.entropy(t_to)?;
    Ok(AdiabatCheck {
        from_parameter: surf_from.parameter(),
        from_temperature: t_from,
        from_entropy: s_from,
        to_parameter: surf_to.parameter(),
        to_temperature: t_to,
        to_entropy: s_to,
        satisfied: s_to >= s_from - S::tol(SECOND_LAW_TOL),
    })
}

/// The integral of C(t)/t over (0, T2], which a Third-Law-respecting adiabat
/// ending at zero would force to be nonpositive. Returns the (strictly
/// positive) value; a spectrum without two distinct energies has no
/// positive specific heat and is rejected.
pub fn forward_contradiction<S: Scalar>(
    surface: &EntropySurface<S>,
    t2: S,
    quad_tol: S,
) -> Result<S> {
    if !(t2 > S::zero()) {
        return Err(Error::InvalidArgument(
            "forward contradiction requires T2 > 0".into(),
        ));
    }
    let distinct = surface
        .levels()
        .windows(2)
        .any(|w| w[1].energy > w[0].energy);
    if !distinct {
        return Err(Error::DegenerateModel(
            "the specific heat of a single-energy spectrum is identically zero".into(),
        ));
    }
    let integral = surface.specific_heat_integral(t2, quad_tol)?;
    if !(integral > S::zero()) {
        return Err(Error::NumericsFailed {
            context: "forward_contradiction",
            estimate: integral.as_f64(),
            tolerance: 0.0,
        });
    }
    Ok(integral)
}

/// Why `b2_solve` did or did not produce a start temperature.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum B2Outcome {
    /// The equality case has a root: T1 is the largest temperature from
    /// which an adiabat reaches exactly T = 0.
    Solved,
    /// Delta S(0) <= 0: no real nonnegative solution exists, so zero is
    /// adiabatically unreachable from every start on this surface pair.
    NoSolution,
    /// Delta S(0) exceeds the entropy excess at `bracket_max`; either the
    /// root lies beyond the bracket or the truncated spectrum saturates
    /// below the target and only approaches it asymptotically.
    BracketExhausted,
}

/// Solution record for the reverse-direction equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct B2Solution<S> {
    /// S(0, beta) - S(0, alpha).
    pub delta_s0: S,
    pub t1: Option<S>,
    /// |excess_alpha(T1) - delta_s0| when solved, 0 otherwise.
    pub residual: S,
    pub outcome: B2Outcome,
}

/// Residual bound every solved T1 must satisfy.
pub const B2_RESIDUAL_TOL: f64 = 1e-8;

/// Solves `excess_alpha(T1) = S(0,beta) - S(0,alpha)` for the adiabat from
/// `(T1, alpha)` to `(0, beta)`. The sign of the right-hand side is decided
/// exactly from the integer ground degeneracies.
pub fn b2_solve<S: Scalar>(
    alpha: &EntropySurface<S>,
    beta: &EntropySurface<S>,
    bracket_max: S,
) -> Result<B2Solution<S>> {
    if !(bracket_max > S::zero()) {
        return Err(Error::InvalidArgument(
            "bracket_max must be positive".into(),
        ));
    }
    let delta_s0 = beta.zero_temperature_entropy() - alpha.zero_temperature_entropy();
    if beta.ground_degeneracy() <= alpha.ground_degeneracy() {
        return Ok(B2Solution {
            delta_s0,
            t1: None,
            residual: S::zero(),
            outcome: B2Outcome::NoSolution,
        });
    }
    let sup = alpha.entropy_excess(bracket_max);
    if sup < delta_s0 {
        return Ok(B2Solution {
            delta_s0,
            t1: None,
            residual: S::zero(),
            outcome: B2Outcome::BracketExhausted,
        });
    }
    let t1 = solve_increasing(
        |u| alpha.entropy_excess(u) - delta_s0,
        S::zero(),
        bracket_max,
        S::tol(1e-13),
    )?;
    let residual = (alpha.entropy_excess(t1) - delta_s0).abs();
    // 1e-8 is the f64 contract; coarser scalars get a 64-epsilon floor.
    let bound = S::lit(B2_RESIDUAL_TOL).max(S::epsilon() * S::lit(64.0));
    if residual > bound {
        return Err(Error::NumericsFailed {
            context: "b2_solve",
            estimate: residual.as_f64(),
            tolerance: bound.as_f64(),
        });
    }
    Ok(B2Solution {
        delta_s0,
        t1: Some(t1),
        residual,
        outcome: B2Outcome::Solved,
    })
}

/// What an attainability oracle can answer about the adiabat
/// `(T1, alpha) -> (0, beta)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Attainability<S> {
    /// No nonnegative start temperature works.
    Unattainable,
    /// Zero is reachable starting from (at most) this temperature.
    AttainableAt(S),
    /// The solver could not certify unattainability (bracket exhausted):
    /// the entropy gap points downhill even though no root was pinned.
    NotRuledOut,
}

/// The default oracle, backed by [`b2_solve`].
pub fn b2_attainability<S: Scalar>(
    alpha: &EntropySurface<S>,
    beta: &EntropySurface<S>,
    bracket_max: S,
) -> Result<Attainability<S>> {
    let solution = b2_solve(alpha, beta, bracket_max)?;
    Ok(match solution.outcome {
        B2Outcome::NoSolution => Attainability::Unattainable,
        B2Outcome::Solved => Attainability::AttainableAt(solution.t1.expect("solved")),
        B2Outcome::BracketExhausted => Attainability::NotRuledOut,
    })
}

/// A grid pair where the oracle did not certify unattainability.
#[derive(Debug, Clone, Copy)]
pub struct AttainabilityFinding<S> {
    pub from_parameter: S,
    pub to_parameter: S,
    pub attainability: Attainability<S>,
}

/// Outcome of the grid deduction.
#[derive(Debug, Clone)]
pub struct DeductionReport<S> {
    /// True when every ordered pair is unattainable in both directions and
    /// the implied zero-temperature entropy equalities hold across the grid.
    pub nernst_deduced: bool,
    /// Pairs where attainability was detected (or not ruled out) instead.
    pub violations: Vec<AttainabilityFinding<S>>,
    /// Pairs certified unattainable both ways whose ground degeneracies
    /// nevertheless differ; must stay empty.
    pub contradictions: Vec<(S, S)>,
}

/// Deduces the parameter-independence of S(0, x) over a grid from an
/// adiabatic-attainability oracle: unattainability in both directions forces
/// equal zero-temperature entropies for every pair.
pub fn deduce_nernst<S, F>(
    model: &SpectrumModel<S>,
    grid: &[S],
    t_max: S,
    policy: &TruncationPolicy<S>,
    oracle: F,
) -> Result<DeductionReport<S>>
where
    S: Scalar,
    F: Fn(&EntropySurface<S>, &EntropySurface<S>) -> Result<Attainability<S>>,
{
    if grid.len() < 2 {
        return Err(Error::InvalidArgument(
            "the deduction grid needs at least two parameter values".into(),
        ));
    }
    let surfaces: Vec<EntropySurface<S>> = grid
        .iter()
        .map(|&x| EntropySurface::for_model(model, x, t_max, policy))
        .collect::<Result<_>>()?;
    let mut violations = Vec::new();
    let mut contradictions = Vec::new();
    for (i, alpha) in surfaces.iter().enumerate() {
        for (j, beta) in surfaces.iter().enumerate() {
            if i == j {
                continue;
            }
            let verdict = oracle(alpha, beta)?;
            if verdict != Attainability::Unattainable {
                violations.push(AttainabilityFinding {
                    from_parameter: alpha.parameter(),
                    to_parameter: beta.parameter(),
                    attainability: verdict,
                });
            }
        }
    }
    // Both directions unattainable => S(0) must agree.
    for (i, alpha) in surfaces.iter().enumerate() {
        for beta in surfaces.iter().skip(i + 1) {
            let pair_clear = |a: &EntropySurface<S>, b: &EntropySurface<S>| {
                !violations
                    .iter()
                    .any(|v| v.from_parameter == a.parameter() && v.to_parameter == b.parameter())
            };
            if pair_clear(alpha, beta)
                && pair_clear(beta, alpha)
                && alpha.ground_degeneracy() != beta.ground_degeneracy()
            {
                contradictions.push((alpha.parameter(), beta.parameter()));
            }
        }
    }
    Ok(DeductionReport {
        nernst_deduced: violations.is_empty() && contradictions.is_empty(),
        violations,
        contradictions,
    })
}

/// Tunables for the randomized equivalence harness.
#[derive(Debug, Clone)]
pub struct HarnessOptions<S> {
    pub max_steps: usize,
    pub bracket_max: S,
    /// Initial staircase start temperature; halved until the curve-ordering
    /// guard accepts, at most `t0_halvings` times.
    pub t0: S,
    pub t0_halvings: u32,
    pub min_levels: usize,
    pub max_levels: usize,
    pub gap_range: (f64, f64),
    pub ground_degeneracies: Vec<u64>,
}

impl<S: Scalar> Default for HarnessOptions<S> {
    fn default() -> Self {
        Self {
            max_steps: 10_000,
            bracket_max: S::lit(1e3),
            t0: S::one(),
            t0_halvings: 40,
            min_levels: 2,
            max_levels: 20,
            gap_range: (0.1, 10.0),
            ground_degeneracies: vec![1, 2, 4],
        }
    }
}

/// Per-pair record of the harness.
#[derive(Debug, Clone)]
pub struct PairRecord<S> {
    pub id: usize,
    pub nernst_holds: bool,
    /// `b2_solve` for the adiabat A -> (0, B).
    pub b2_forward: B2Solution<S>,
    /// `b2_solve` for the adiabat B -> (0, A).
    pub b2_reverse: B2Solution<S>,
    /// Whether an ordered staircase pair could be constructed.
    pub staircase_constructed: bool,
    pub staircase_reached_zero: bool,
    pub staircase_steps: usize,
    pub counterexample: Option<String>,
}

/// Aggregate harness report.
#[derive(Debug, Clone)]
pub struct HarnessReport<S> {
    pub pairs: Vec<PairRecord<S>>,
    pub counterexamples: usize,
    pub nernst_pairs: usize,
    pub violating_pairs: usize,
    pub staircase_constructed: usize,
}

impl<S: Scalar> HarnessReport<S> {
    /// CSV with columns model_id, nernst_holds, b2_forward, b2_reverse,
    /// staircase_reached_zero, steps.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(
            w,
            "model_id,nernst_holds,b2_forward,b2_reverse,staircase_reached_zero,steps"
        )?;
        for p in &self.pairs {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                p.id,
                p.nernst_holds,
                b2_csv_field(&p.b2_forward),
                b2_csv_field(&p.b2_reverse),
                p.staircase_reached_zero,
                p.staircase_steps
            )?;
        }
        Ok(())
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("pairs checked:          {}\n", self.pairs.len()));
        out.push_str(&format!("zero-entropy matches:   {}\n", self.nernst_pairs));
        out.push_str(&format!(
            "zero-entropy mismatches:{}\n",
            self.violating_pairs
        ));
        out.push_str(&format!(
            "staircases constructed: {}\n",
            self.staircase_constructed
        ));
        out.push_str(&format!(
            "counterexamples:        {}\n",
            self.counterexamples
        ));
        for p in self.pairs.iter().filter(|p| p.counterexample.is_some()) {
            out.push_str(&format!(
                "  pair {}: {}\n",
                p.id,
                p.counterexample.as_deref().unwrap_or("")
            ));
        }
        out
    }
}

fn b2_csv_field<S: Scalar>(solution: &B2Solution<S>) -> String {
    match solution.outcome {
        B2Outcome::Solved => sig17(solution.t1.expect("solved")),
        B2Outcome::NoSolution => "none".to_string(),
        B2Outcome::BracketExhausted => "bracket_exhausted".to_string(),
    }
}

fn random_spectrum<S: Scalar>(rng: &mut ChaCha8Rng, opts: &HarnessOptions<S>) -> Vec<Level<S>> {
    let n_levels = rng.random_range(opts.min_levels..=opts.max_levels);
    let w = opts.ground_degeneracies[rng.random_range(0..opts.ground_degeneracies.len())];
    let mut levels = Vec::with_capacity(n_levels);
    levels.push(Level {
        energy: S::zero(),
        degeneracy: w,
    });
    let mut energy = 0.0f64;
    for _ in 1..n_levels {
        energy += rng.random_range(opts.gap_range.0..=opts.gap_range.1);
        levels.push(Level {
            energy: S::lit(energy),
            degeneracy: 1,
        });
    }
    levels
}

fn try_staircase<S: Scalar>(
    upper: &EntropySurface<S>,
    lower: &EntropySurface<S>,
    opts: &HarnessOptions<S>,
) -> Option<StaircaseResult<S>> {
    let mut t0 = opts.t0;
    for _ in 0..=opts.t0_halvings {
        match staircase(upper, lower, t0, S::zero(), opts.max_steps) {
            Ok(result) => return Some(result),
            Err(Error::InvalidProtocol(_)) => {
                t0 /= S::lit(2.0);
            }
            Err(_) => return None,
        }
    }
    None
}

/// Checks one surface pair against the equivalence claim and classifies it.
///
/// Nernst-holding pairs (equal ground degeneracies) must be unsolvable by
/// `b2_solve` in both directions and must not reach zero by staircase within
/// the step budget. Pairs with unequal ground degeneracies must solve (or at
/// least not be ruled out) in the entropy-increasing direction, be unsolvable
/// the other way, and reach exactly zero by the constructed staircase.
pub fn classify_pair<S: Scalar>(
    id: usize,
    surf_a: &EntropySurface<S>,
    surf_b: &EntropySurface<S>,
    opts: &HarnessOptions<S>,
) -> Result<PairRecord<S>> {
    let nernst_holds = surf_a.ground_degeneracy() == surf_b.ground_degeneracy();
    let b2_forward = b2_solve(surf_a, surf_b, opts.bracket_max)?;
    let b2_reverse = b2_solve(surf_b, surf_a, opts.bracket_max)?;

    let (upper, lower) = if surf_b.ground_degeneracy() > surf_a.ground_degeneracy() {
        (surf_b, surf_a)
    } else {
        (surf_a, surf_b)
    };
    let mut run = try_staircase(upper, lower, opts);
    if run.is_none() && nernst_holds {
        run = try_staircase(lower, upper, opts);
    }
    let constructed = run.is_some();
    let (reached_zero, steps) = run.map(|r| (r.reached_zero, r.steps)).unwrap_or((false, 0));

    let mut counterexample = None;
    if nernst_holds {
        if b2_forward.outcome == B2Outcome::Solved || b2_reverse.outcome == B2Outcome::Solved {
            counterexample =
                Some("b2 solution found although zero-temperature entropies match".into());
        } else if constructed && reached_zero {
            counterexample =
                Some("staircase reached zero although zero-temperature entropies match".into());
        }
    } else {
        let increasing = if surf_b.ground_degeneracy() > surf_a.ground_degeneracy() {
            &b2_forward
        } else {
            &b2_reverse
        };
        let decreasing = if surf_b.ground_degeneracy() > surf_a.ground_degeneracy() {
            &b2_reverse
        } else {
            &b2_forward
        };
        if increasing.outcome == B2Outcome::NoSolution {
            counterexample = Some(
                "b2 found no route in the entropy-increasing direction despite mismatched S(0)"
                    .into(),
            );
        } else if decreasing.outcome != B2Outcome::NoSolution {
            counterexample = Some("b2 reported a route in the entropy-decreasing direction".into());
        } else if !constructed {
            counterexample = Some("no ordered staircase pair could be constructed".into());
        } else if !reached_zero {
            counterexample = Some(format!(
                "staircase failed to reach zero within {} steps despite mismatched S(0)",
                opts.max_steps
            ));
        }
    }

    Ok(PairRecord {
        id,
        nernst_holds,
        b2_forward,
        b2_reverse,
        staircase_constructed: constructed,
        staircase_reached_zero: reached_zero,
        staircase_steps: steps,
        counterexample,
    })
}

/// Generates `n_models` random spectrum pairs and checks the equivalence in
/// both directions on each; any counterexample is carried in full.
pub fn equivalence_harness<S: Scalar>(
    n_models: usize,
    seed: u64,
    opts: &HarnessOptions<S>,
) -> Result<HarnessReport<S>> {
    let pairs: Vec<PairRecord<S>> = (0..n_models)
        .into_par_iter()
        .map(|id| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(id as u64);
            let levels_a = random_spectrum(&mut rng, opts);
            let levels_b = random_spectrum(&mut rng, opts);
            let surf_a = EntropySurface::from_levels(levels_a, S::zero())?;
            let surf_b = EntropySurface::from_levels(levels_b, S::one())?;
            classify_pair(id, &surf_a, &surf_b, opts)
        })
        .collect::<Result<_>>()?;

    let counterexamples = pairs.iter().filter(|p| p.counterexample.is_some()).count();
    let nernst_pairs = pairs.iter().filter(|p| p.nernst_holds).count();
    let staircase_constructed = pairs.iter().filter(|p| p.staircase_constructed).count();
    Ok(HarnessReport {
        violating_pairs: pairs.len() - nernst_pairs,
        nernst_pairs,
        counterexamples,
        staircase_constructed,
        pairs,
    })
}
