//! Cooling-protocol engine.
//!
//! Two layers on purpose: microscopic population dynamics
//! ([`apply_adiabatic`], [`apply_isothermal`]) for spectrum-backed states
//! where the adiabat is realizable, and the entropy-surface [`staircase`] in
//! the (T, S) plane for the general thermodynamic argument, which is
//! entropy bookkeeping rather than a microscopic protocol.
//!
//! The engine is single-threaded per protocol run; independent runs are
//! freely parallel (all inputs are immutable values). Measure steps consume
//! an explicit seed, so runs reproduce regardless of scheduling.

use std::fmt;
use std::io::{self, Write};

use crate::error::{Error, Result};
use crate::measurement::{self, PostMeasurementState};
use crate::numeric::solve_increasing;
use crate::output::{sig17, sig17_opt};
use crate::scalar::Scalar;
use crate::spectra::Level;
use crate::thermo::{entropy, gibbs_populations, EntropySurface, ThermalState};

/// One instruction in a cooling protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ProtocolStep<S> {
    /// Population-preserving move to a new parameter value.
    Adiabatic { target: S },
    /// Parameter move at the state's current (labeled) temperature.
    Isothermal { target: S },
    /// Re-equilibration with a bath at fixed parameter.
    Thermalize { bath: S },
    /// Projective energy measurement with an explicit seed.
    Measure { seed: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepKind {
    Initial,
    Adiabatic,
    Isothermal,
    Thermalize,
    Measure,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            StepKind::Initial => "initial",
            StepKind::Adiabatic => "adiabatic",
            StepKind::Isothermal => "isothermal",
            StepKind::Thermalize => "thermalize",
            StepKind::Measure => "measure",
        };
        f.write_str(name)
    }
}

/// One row of a protocol trace. Work uses the convention
/// `work = delta U - heat` (energy change not accounted for as heat);
/// measurement records carry zero heat and work.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord<S> {
    pub step_index: usize,
    pub kind: StepKind,
    pub parameter: S,
    /// `None` whenever the state's populations are not Gibbs.
    pub temperature: Option<S>,
    pub entropy: S,
    pub heat: S,
    pub work: S,
}

/// Ordered record of a protocol run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTrace<S> {
    pub records: Vec<TraceRecord<S>>,
}

impl<S> Default for ProtocolTrace<S> {
    fn default() -> Self {
        Self {
            records: Vec::new(),
        }
    }
}

impl<S: Scalar> ProtocolTrace<S> {
    /// CSV with columns step_index, kind, parameter, temperature, entropy,
    /// heat, work; the temperature field is empty when undefined.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "step_index,kind,parameter,temperature,entropy,heat,work")?;
        for r in &self.records {
            writeln!(
                w,
                "{},{},{},{},{},{},{}",
                r.step_index,
                r.kind,
                sig17(r.parameter),
                sig17_opt(r.temperature),
                sig17(r.entropy),
                sig17(r.heat),
                sig17(r.work),
            )?;
        }
        Ok(())
    }
}

/// A protocol run that failed partway: the offending step, its error, and
/// the trace accumulated up to that point.
#[derive(Debug)]
pub struct ProtocolAbort<S> {
    pub failed_step: usize,
    pub error: Error,
    pub partial: ProtocolTrace<S>,
}

impl<S: Scalar> fmt::Display for ProtocolAbort<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "protocol aborted at step {}: {}",
            self.failed_step, self.error
        )
    }
}

impl<S: Scalar> std::error::Error for ProtocolAbort<S> {}

fn detect_scale<S: Scalar>(src: &[Level<S>], tgt: &[Level<S>]) -> Option<S> {
    let mut scale: Option<S> = None;
    for (a, b) in src.iter().zip(tgt) {
        if a.energy == S::zero() && b.energy == S::zero() {
            continue;
        }
        if a.energy == S::zero() || b.energy == S::zero() {
            return None;
        }
        let s = b.energy / a.energy;
        match scale {
            None => scale = Some(s),
            Some(s0) => {
                if (s - s0).abs() > s0.abs() * S::tol(1e-12) {
                    return None;
                }
            }
        }
    }
    scale.filter(|&s| s > S::zero() && s.is_finite())
}

/// Quasi-static adiabatic move: populations are copied unchanged onto the
/// spectrum at `target`. Excited-state populations are never removed.
///
/// The temperature label survives only when it can be justified: a T = 0
/// state stays at 0, and a Gibbs state moved onto an exact scale `s` of its
/// spectrum becomes Gibbs at `s * T`. Any other move yields an unlabeled
/// state (its populations are not Gibbs in general, and inventing a
/// temperature would corrupt downstream checks; see
/// [`diagnostic_ratio_temperature`] for a reporting-only convention).
pub fn apply_adiabatic<S: Scalar>(state: &ThermalState<S>, target: S) -> Result<ThermalState<S>> {
    let origin = state.origin().ok_or_else(|| {
        Error::InvalidState("adiabatic step requires a model-backed state".into())
    })?;
    let model = origin.model.clone();
    let target_levels = model.levels_at(target, state.levels().len())?;
    if target_levels.len() != state.levels().len() {
        return Err(Error::LevelStructureMismatch(format!(
            "source has {} levels, target has {}",
            state.levels().len(),
            target_levels.len()
        )));
    }
    for (i, (a, b)) in state.levels().iter().zip(&target_levels).enumerate() {
        if a.degeneracy != b.degeneracy {
            return Err(Error::LevelStructureMismatch(format!(
                "degeneracy of level {i} changes from {} to {}",
                a.degeneracy, b.degeneracy
            )));
        }
    }
    let label = match state.temperature() {
        Some(t) if t == S::zero() => Some(S::zero()),
        Some(t) => detect_scale(state.levels(), &target_levels).map(|s| s * t),
        None => None,
    };
    Ok(
        ThermalState::from_populations(target_levels, state.populations().to_vec(), label)?
            .with_origin(model, target),
    )
}

/// Isothermal move: re-thermalizes on the spectrum at `target` with a bath at
/// `bath` (a zero-temperature bath yields the ground state).
pub fn apply_isothermal<S: Scalar>(
    state: &ThermalState<S>,
    target: S,
    bath: S,
) -> Result<ThermalState<S>> {
    let origin = state.origin().ok_or_else(|| {
        Error::InvalidState("isothermal step requires a model-backed state".into())
    })?;
    let model = origin.model.clone();
    let target_levels = model.levels_at(target, state.levels().len())?;
    Ok(gibbs_populations(&target_levels, bath)?.with_origin(model, target))
}

/// Reporting-only effective temperature from the first population ratio,
/// T_eff = -E_1 / ln((p_1/g_1)/(p_0/g_0)). `None` whenever undefined.
pub fn diagnostic_ratio_temperature<S: Scalar>(state: &ThermalState<S>) -> Option<S> {
    let levels = state.levels();
    let p = state.populations();
    if levels.len() < 2 {
        return None;
    }
    let (p0, p1) = (p[0], p[1]);
    if !(p0 > S::zero()) || !(p1 > S::zero()) {
        return None;
    }
    let e1 = levels[1].energy;
    if !(e1 > S::zero()) {
        return None;
    }
    let ratio =
        (p1 / S::from_count(levels[1].degeneracy)) / (p0 / S::from_count(levels[0].degeneracy));
    let log_ratio = ratio.ln();
    if log_ratio < S::zero() {
        Some(-e1 / log_ratio)
    } else {
        None
    }
}

fn record_state<S: Scalar>(
    step_index: usize,
    kind: StepKind,
    state: &ThermalState<S>,
    heat: S,
    work: S,
) -> TraceRecord<S> {
    TraceRecord {
        step_index,
        kind,
        parameter: state.origin().map(|o| o.parameter).unwrap_or_else(S::nan),
        temperature: state.temperature(),
        entropy: entropy(state),
        heat,
        work,
    }
}

/// Applies `steps` in order, accumulating a trace; the first failing step
/// aborts with its error and the partial trace.
pub fn run_protocol<S: Scalar>(
    initial: ThermalState<S>,
    steps: &[ProtocolStep<S>],
) -> std::result::Result<ProtocolTrace<S>, ProtocolAbort<S>> {
    let mut trace = ProtocolTrace::default();
    if initial.origin().is_none() {
        return Err(ProtocolAbort {
            failed_step: 0,
            error: Error::InvalidState("protocol runs require a model-backed state".into()),
            partial: trace,
        });
    }
    trace.records.push(record_state(
        0,
        StepKind::Initial,
        &initial,
        S::zero(),
        S::zero(),
    ));

    let mut state = initial;
    for (i, step) in steps.iter().enumerate() {
        let index = i + 1;
        let before_entropy = entropy(&state);
        let before_energy = state.mean_energy();
        let applied: Result<(ThermalState<S>, StepKind, S, S)> = (|| {
            match *step {
                ProtocolStep::Adiabatic { target } => {
                    let next = apply_adiabatic(&state, target)?;
                    let work = next.mean_energy() - before_energy;
                    Ok((next, StepKind::Adiabatic, S::zero(), work))
                }
                ProtocolStep::Isothermal { target } => {
                    let bath = state.temperature().ok_or_else(|| {
                        Error::InvalidProtocol(
                            "isothermal step requires a Gibbs-labeled state (use thermalize first)"
                                .into(),
                        )
                    })?;
                    let next = apply_isothermal(&state, target, bath)?;
                    let heat = bath * (entropy(&next) - before_entropy);
                    let work = next.mean_energy() - before_energy - heat;
                    Ok((next, StepKind::Isothermal, heat, work))
                }
                ProtocolStep::Thermalize { bath } => {
                    let param = state.origin().expect("checked above").parameter;
                    let next = apply_isothermal(&state, param, bath)?;
                    // Fixed spectrum: every energy change is heat.
                    let heat = next.mean_energy() - before_energy;
                    Ok((next, StepKind::Thermalize, heat, S::zero()))
                }
                ProtocolStep::Measure { seed } => {
                    let origin = state.origin().expect("checked above").clone();
                    let record = measurement::sample_measurement(&state, seed);
                    let next = match record.post {
                        PostMeasurementState::Thermal(st) => {
                            st.with_origin(origin.model, origin.parameter)
                        }
                        PostMeasurementState::Pure(_) => {
                            return Err(Error::InvalidState(
                                "thermal sampling produced a pure post state".into(),
                            ))
                        }
                    };
                    Ok((next, StepKind::Measure, S::zero(), S::zero()))
                }
            }
        })();
        match applied {
            Ok((next, kind, heat, work)) => {
                trace
                    .records
                    .push(record_state(index, kind, &next, heat, work));
                state = next;
            }
            Err(error) => {
                return Err(ProtocolAbort {
                    failed_step: index,
                    error,
                    partial: trace,
                })
            }
        }
    }
    Ok(trace)
}

/// Outcome of a staircase run. `reached_zero` implies the final temperature
/// is exactly 0.
#[derive(Debug, Clone)]
pub struct StaircaseResult<S> {
    /// Rounds executed (one isothermal plus one adiabatic segment each).
    pub steps: usize,
    pub reached_zero: bool,
    pub final_temperature: S,
    pub trace: ProtocolTrace<S>,
}

#[derive(Debug, Clone, Copy)]
pub struct StaircaseOptions<S> {
    /// Relative tolerance of the adiabatic temperature solve.
    pub bisect_rel_tol: S,
    /// Cushion on the finite-attainment trigger S_B(T) <= S_A(0). Only
    /// consulted when the two ground degeneracies differ: when they are
    /// equal the trigger is unreachable for any T > 0 and applying a float
    /// tolerance would fabricate attainability out of underflow.
    pub zero_entropy_tol: S,
    /// Points in the log-spaced curve-ordering guard.
    pub ordering_grid: usize,
}

impl<S: Scalar> Default for StaircaseOptions<S> {
    fn default() -> Self {
        Self {
            bisect_rel_tol: S::lit(1e-13),
            zero_entropy_tol: S::lit(1e-15),
            ordering_grid: 64,
        }
    }
}

fn check_ordering<S: Scalar>(
    surf_a: &EntropySurface<S>,
    surf_b: &EntropySurface<S>,
    t0: S,
    t_target: S,
    grid: usize,
) -> Result<()> {
    // S_B(T) < S_A(T) required on (lower, t0]; compared through the excess
    // functions so the test stays meaningful when both entropies round to
    // their zero-temperature values. Below float resolution the comparison
    // is necessarily non-strict; strictness is enforced at t0 itself.
    let d = surf_a.zero_temperature_entropy() - surf_b.zero_temperature_entropy();
    let lower_raw = if t_target > S::zero() {
        t_target
    } else {
        S::lit(1e-6)
    };
    let lower = lower_raw.min(t0);
    let n = grid.max(2);
    let ratio = (t0 / lower).ln() / S::from_usize(n - 1).expect("grid size");
    for k in 0..n {
        let u = if k == n - 1 {
            t0
        } else {
            lower * (ratio * S::from_usize(k).expect("grid index")).exp()
        };
        let lhs = surf_b.entropy_excess(u) - surf_a.entropy_excess(u);
        let violated = if k == n - 1 { lhs >= d } else { lhs > d };
        if violated {
            return Err(Error::InvalidProtocol(format!(
                "curve ordering violated at T = {}: S_B - S_A = {}",
                u.as_f64(),
                (lhs - d).as_f64()
            )));
        }
    }
    Ok(())
}

/// Alternating isothermal/adiabatic staircase between two entropy surfaces,
/// starting on curve A at `t0`.
///
/// Each round drops vertically from A to B at fixed temperature, then moves
/// horizontally back to A at fixed entropy. When `S_B(T) <= S_A(0)` the
/// horizontal segment hits the temperature axis: the run ends at exactly 0
/// (possible precisely when B's ground degeneracy is smaller than A's).
/// Otherwise the new temperature solves `S_A(T') = S_B(T)`; with equal
/// ground degeneracies the solve runs on log-excess values so it keeps full
/// relative accuracy long after `S(T) - S(0)` underflows, and stalls in
/// place once even that is out of range (the curves are then numerically
/// indistinguishable, and the temperature stays strictly positive).
///
/// Stops when `T <= t_target` or after `max_steps` rounds.
pub fn staircase<S: Scalar>(
    surf_a: &EntropySurface<S>,
    surf_b: &EntropySurface<S>,
    t0: S,
    t_target: S,
    max_steps: usize,
) -> Result<StaircaseResult<S>> {
    staircase_with(
        surf_a,
        surf_b,
        t0,
        t_target,
        max_steps,
        &StaircaseOptions::default(),
    )
}

pub fn staircase_with<S: Scalar>(
    surf_a: &EntropySurface<S>,
    surf_b: &EntropySurface<S>,
    t0: S,
    t_target: S,
    max_steps: usize,
    opts: &StaircaseOptions<S>,
) -> Result<StaircaseResult<S>> {
    if !(t0 > S::zero() && t0.is_finite()) {
        return Err(Error::InvalidArgument("staircase requires t0 > 0".into()));
    }
    if !(t_target >= S::zero()) || !(t_target < t0) {
        return Err(Error::InvalidArgument(
            "staircase requires 0 <= t_target < t0".into(),
        ));
    }
    if max_steps == 0 {
        return Err(Error::InvalidArgument(
            "max_steps must be at least 1".into(),
        ));
    }
    check_ordering(surf_a, surf_b, t0, t_target, opts.ordering_grid)?;

    let d = surf_a.zero_temperature_entropy() - surf_b.zero_temperature_entropy();
    let degeneracies_differ = surf_a.ground_degeneracy() != surf_b.ground_degeneracy();

    let mut trace = ProtocolTrace::default();
    let mut s_on_a = surf_a.entropy(t0)?;
    trace.records.push(TraceRecord {
        step_index: 0,
        kind: StepKind::Initial,
        parameter: surf_a.parameter(),
        temperature: Some(t0),
        entropy: s_on_a,
        heat: S::zero(),
        work: S::zero(),
    });

    let mut t = t0;
    let mut steps = 0usize;
    let mut reached_zero = false;

    while steps < max_steps {
        let s_b = surf_b.entropy(t)?;
        let u_a = surf_a.mean_energy(t)?;
        let u_b = surf_b.mean_energy(t)?;
        let heat = t * (s_b - s_on_a);
        trace.records.push(TraceRecord {
            step_index: trace.records.len(),
            kind: StepKind::Isothermal,
            parameter: surf_b.parameter(),
            temperature: Some(t),
            entropy: s_b,
            heat,
            work: (u_b - u_a) - heat,
        });

        let t_new = if degeneracies_differ {
            let target = surf_b.entropy_excess(t) - d;
            if target <= opts.zero_entropy_tol {
                reached_zero = true;
                S::zero()
            } else if !(surf_a.entropy_excess(t) > target) {
                t // numerically indistinguishable; hold position
            } else {
                solve_increasing(
                    |u| surf_a.entropy_excess(u) - target,
                    S::zero(),
                    t,
                    opts.bisect_rel_tol,
                )?
            }
        } else {
            // Equal ground degeneracies: the target entropy on A equals
            // S_B(T) exactly, so solve in log-excess space.
            let lam_target = surf_b.log_excess(t);
            let lam_at_t = surf_a.log_excess(t);
            if !lam_target.is_finite() || !(lam_at_t > lam_target) {
                t
            } else {
                solve_increasing(
                    |u| surf_a.log_excess(u) - lam_target,
                    S::zero(),
                    t,
                    opts.bisect_rel_tol,
                )?
            }
        };

        let u_a_new = surf_a.mean_energy(t_new)?;
        trace.records.push(TraceRecord {
            step_index: trace.records.len(),
            kind: StepKind::Adiabatic,
            parameter: surf_a.parameter(),
            temperature: Some(t_new),
            entropy: s_b, // isentropic segment
            heat: S::zero(),
            work: u_a_new - u_b,
        });

        steps += 1;
        t = t_new;
        s_on_a = if reached_zero {
            surf_a.zero_temperature_entropy()
        } else {
            surf_a.entropy(t)?
        };
        if reached_zero || t <= t_target {
            break;
        }
    }

    Ok(StaircaseResult {
        steps,
        reached_zero,
        final_temperature: t,
        trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectra::{ParameterDomain, SpectrumModel, TruncationPolicy};
    use crate::thermo::gibbs_state;

    fn domain() -> ParameterDomain<f64> {
        ParameterDomain::new(0.05, 10.0).unwrap()
    }

    fn two_level_surface(gap: f64) -> EntropySurface<f64> {
        let model = SpectrumModel::two_level(domain()).unwrap();
        EntropySurface::for_model(&model, gap, 10.0, &TruncationPolicy::default()).unwrap()
    }

    #[test]
    fn adiabatic_scale_two_level() {
        let model = SpectrumModel::two_level(domain()).unwrap();
        let state = gibbs_state(&model, 1.0, 1.0, &TruncationPolicy::default()).unwrap();
        let moved = apply_adiabatic(&state, 2.0).unwrap();
        assert_eq!(moved.temperature(), Some(2.0));
        assert_eq!(moved.populations(), state.populations());
    }

    #[test]
    fn adiabatic_scale_harmonic_matches_gibbs() {
        let model = SpectrumModel::harmonic(domain()).unwrap();
        let policy = TruncationPolicy {
            reference_temperature: Some(1.0),
            ..TruncationPolicy::default()
        };
        let state = gibbs_state(&model, 1.0, 1.0, &policy).unwrap();
        let moved = apply_adiabatic(&state, 0.5).unwrap();
        assert_eq!(moved.temperature(), Some(0.5));
        // Populations depend only on E_i/T; scaling both keeps them fixed.
        let fresh = gibbs_populations(moved.levels(), 0.5).unwrap();
        for (a, b) in moved.populations().iter().zip(fresh.populations()) {
            assert!((a - b).abs() <= 1e-12);
        }
        // And the population vector is the source's, bit for bit.
        assert_eq!(moved.populations(), state.populations());
    }

    #[test]
    fn adiabatic_from_ground_state_stays_ground() {
        let model = SpectrumModel::two_level(domain()).unwrap();
        let state = gibbs_state(&model, 1.0, 0.0, &TruncationPolicy::default()).unwrap();
        let moved = apply_adiabatic(&state, 3.0).unwrap();
        assert_eq!(moved.temperature(), Some(0.0));
        assert_eq!(moved.populations()[0], 1.0);
    }

    #[test]
    fn adiabatic_non_scale_target_loses_label() {
        use crate::spectra::TablePoint;
        let table = vec![
            TablePoint {
                parameter: 1.0,
                levels: vec![
                    Level {
                        energy: 0.0,
                        degeneracy: 1,
                    },
                    Level {
                        energy: 1.0,
                        degeneracy: 1,
                    },
                    Level {
                        energy: 3.0,
                        degeneracy: 1,
                    },
                ],
            },
            TablePoint {
                parameter: 2.0,
                levels: vec![
                    Level {
                        energy: 0.0,
                        degeneracy: 1,
                    },
                    Level {
                        energy: 2.0,
                        degeneracy: 1,
                    },
                    Level {
                        energy: 4.0,
                        degeneracy: 1,
                    },
                ],
            },
        ];
        let model = SpectrumModel::custom(table).unwrap();
        let state = gibbs_state(&model, 1.0, 1.0, &TruncationPolicy::default()).unwrap();
        let moved = apply_adiabatic(&state, 2.0).unwrap();
        assert_eq!(moved.temperature(), None);
        assert_eq!(moved.populations(), state.populations());
        assert!(diagnostic_ratio_temperature(&moved).is_some());
    }

    #[test]
    fn adiabatic_rejects_degeneracy_change() {
        let model = SpectrumModel::degenerate_ground_steps(
            ParameterDomain::new(0.5, 2.0).unwrap(),
            vec![(0.5, 1), (2.0, 2)],
        )
        .unwrap();
        let state = gibbs_state(&model, 1.0, 1.0, &TruncationPolicy::default()).unwrap();
        assert!(matches!(
            apply_adiabatic(&state, 2.0),
            Err(Error::LevelStructureMismatch(_))
        ));
    }

    #[test]
    fn isothermal_closed_form() {
        let model = SpectrumModel::two_level(domain()).unwrap();
        let state = gibbs_state(&model, 1.0, 1.0, &TruncationPolicy::default()).unwrap();
        let moved = apply_isothermal(&state, 2.0, 1.0).unwrap();
        let e2 = (-2.0f64).exp();
        assert!((moved.populations()[0] - 1.0 / (1.0 + e2)).abs() < 1e-15);
        assert!((moved.populations()[1] - e2 / (1.0 + e2)).abs() < 1e-15);
    }

    #[test]
    fn isothermal_noop_is_identity() {
        let model = SpectrumModel::two_level(domain()).unwrap();
        let state = gibbs_state(&model, 1.0, 1.0, &TruncationPolicy::default()).unwrap();
        let moved = apply_isothermal(&state, 1.0, 1.0).unwrap();
        assert_eq!(moved.populations(), state.populations());
        assert_eq!(entropy(&moved), entropy(&state));
    }

    #[test]
    fn isothermal_zero_bath_reaches_ground() {
        let model = SpectrumModel::harmonic(domain()).unwrap();
        let policy = TruncationPolicy {
            reference_temperature: Some(1.0),
            ..TruncationPolicy::default()
        };
        let state = gibbs_state(&model, 1.0, 1.0, &policy).unwrap();
        let moved = apply_isothermal(&state, 1.0, 0.0).unwrap();
        assert_eq!(moved.temperature(), Some(0.0));
        assert_eq!(entropy(&moved), 0.0);
    }

    #[test]
    fn empty_protocol_traces_initial_only() {
        let model = SpectrumModel::two_level(domain()).unwrap();
        let state = gibbs_state(&model, 1.0, 1.0, &TruncationPolicy::default()).unwrap();
        let trace = run_protocol(state, &[]).unwrap();
        assert_eq!(trace.records.len(), 1);
        assert_eq!(trace.records[0].kind, StepKind::Initial);
    }

    #[test]
    fn one_staircase_round_halves_temperature() {
        let model = SpectrumModel::two_level(domain()).unwrap();
        let state = gibbs_state(&model, 1.0, 1.0, &TruncationPolicy::default()).unwrap();
        let steps = [
            ProtocolStep::Isothermal { target: 2.0 },
            ProtocolStep::Adiabatic { target: 1.0 },
        ];
        let trace = run_protocol(state, &steps).unwrap();
        let last = trace.records.last().unwrap();
        assert_eq!(last.temperature, Some(0.5));
        // Isothermal record satisfies heat = T * delta S.
        let iso = &trace.records[1];
        let ds = iso.entropy - trace.records[0].entropy;
        assert_eq!(iso.heat, 1.0 * ds);
        // Adiabatic record is isentropic.
        assert_eq!(trace.records[2].entropy, trace.records[1].entropy);
    }

    #[test]
    fn thermalize_step_books_all_energy_as_heat() {
        let model = SpectrumModel::two_level(domain()).unwrap();
        let state = gibbs_state(&model, 1.0, 2.0, &TruncationPolicy::default()).unwrap();
        let trace = run_protocol(state, &[ProtocolStep::Thermalize { bath: 0.5 }]).unwrap();
        let rec = &trace.records[1];
        assert_eq!(rec.kind, StepKind::Thermalize);
        assert_eq!(rec.temperature, Some(0.5));
        assert_eq!(rec.work, 0.0);
        assert!(rec.heat < 0.0); // cooling extracts heat
    }

    #[test]
    fn protocol_abort_keeps_partial_trace() {
        let model = SpectrumModel::two_level(domain()).unwrap();
        let state = gibbs_state(&model, 1.0, 1.0, &TruncationPolicy::default()).unwrap();
        let steps = [
            ProtocolStep::Isothermal { target: 2.0 },
            ProtocolStep::Isothermal { target: 99.0 }, // out of domain
        ];
        let abort = run_protocol(state, &steps).unwrap_err();
        assert_eq!(abort.failed_step, 2);
        assert_eq!(abort.partial.records.len(), 2);
        assert!(matches!(abort.error, Error::ParameterOutOfDomain { .. }));
    }

    #[test]
    fn measure_step_collapses_state() {
        let model = SpectrumModel::two_level(domain()).unwrap();
        let state = gibbs_state(&model, 1.0, 1.0, &TruncationPolicy::default()).unwrap();
        let trace = run_protocol(state, &[ProtocolStep::Measure { seed: 7 }]).unwrap();
        let last = trace.records.last().unwrap();
        assert_eq!(last.kind, StepKind::Measure);
        // Collapsed onto a single nondegenerate level either way.
        assert_eq!(last.entropy, 0.0);
    }

    #[test]
    fn staircase_scale_pair_halves_each_round() {
        let a = two_level_surface(1.0);
        let b = two_level_surface(2.0);
        let result = staircase(&a, &b, 1.0, 1e-3, 100).unwrap();
        assert_eq!(result.steps, 10); // ceil(log2(1000))
        assert!(!result.reached_zero);
        assert!(result.final_temperature <= 1e-3);
        for n in 1..=result.steps {
            let expected = 0.5f64.powi(n as i32);
            let t_n = result.trace.records[2 * n].temperature.unwrap();
            assert!(
                ((t_n - expected) / expected).abs() < 1e-10,
                "round {n}: {t_n} vs {expected}"
            );
        }
    }

    #[test]
    fn staircase_temperatures_strictly_decrease() {
        let a = two_level_surface(1.0);
        let b = two_level_surface(2.0);
        let result = staircase(&a, &b, 1.0, 1e-9, 100).unwrap();
        let temps: Vec<f64> = result
            .trace
            .records
            .iter()
            .filter(|r| r.kind == StepKind::Adiabatic)
            .map(|r| r.temperature.unwrap())
            .collect();
        for pair in temps.windows(2) {
            assert!(pair[1] < pair[0]);
        }
    }

    #[test]
    fn staircase_nernst_pair_never_reaches_zero() {
        let a = two_level_surface(1.0);
        let b = two_level_surface(2.0);
        let result = staircase(&a, &b, 1.0, 0.0, 50).unwrap();
        assert!(!result.reached_zero);
        assert_eq!(result.steps, 50);
        assert!(result.final_temperature > 0.0);
    }

    #[test]
    fn staircase_violating_pair_reaches_exact_zero() {
        // A has ground degeneracy 2 (S_A(0) = ln 2), B is a harmonic ladder
        // with S_B(0) = 0; zero is reached at the first round where
        // S_B(T) <= ln 2.
        let model_a = SpectrumModel::degenerate_ground(domain(), 2).unwrap();
        let a =
            EntropySurface::for_model(&model_a, 1.0, 10.0, &TruncationPolicy::default()).unwrap();
        let model_b = SpectrumModel::harmonic(domain()).unwrap();
        let b =
            EntropySurface::for_model(&model_b, 1.0, 10.0, &TruncationPolicy::default()).unwrap();
        // S_B(0.5) = 0.4584 < ln 2, so the very first round lands on zero.
        let result = staircase(&a, &b, 0.5, 0.0, 100).unwrap();
        assert!(result.reached_zero);
        assert_eq!(result.final_temperature, 0.0);
        assert_eq!(result.steps, 1);
        let last = result.trace.records.last().unwrap();
        assert_eq!(last.temperature, Some(0.0));
    }

    #[test]
    fn staircase_rejects_misordered_curves() {
        let a = two_level_surface(2.0); // lower curve passed as A
        let b = two_level_surface(1.0);
        assert!(matches!(
            staircase(&a, &b, 1.0, 0.0, 10),
            Err(Error::InvalidProtocol(_))
        ));
    }

    #[test]
    fn staircase_rejects_identical_surfaces() {
        let a = two_level_surface(1.0);
        let b = two_level_surface(1.0);
        assert!(staircase(&a, &b, 1.0, 0.0, 10).is_err());
    }

    #[test]
    fn trace_csv_has_empty_temperature_when_undefined() {
        let mut trace = ProtocolTrace::default();
        trace.records.push(TraceRecord {
            step_index: 0,
            kind: StepKind::Adiabatic,
            parameter: 1.0,
            temperature: None,
            entropy: 0.5,
            heat: 0.0,
            work: 0.0,
        });
        let mut buf = Vec::new();
        trace.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let line = text.lines().nth(1).unwrap();
        assert!(line.starts_with("0,adiabatic,"));
        assert!(
            line.contains(",,"),
            "temperature field should be empty: {line}"
        );
    }
}
