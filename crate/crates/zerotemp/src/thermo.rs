//! Equilibrium statistical mechanics of a truncated spectrum: partition
//! function, Gibbs populations, entropy, specific heat, the entropy-integral
//! identity, and the zero-temperature entropy predicates.
//!
//! Conventions: k = 1; the ground level sits at energy 0; entropy is the
//! degeneracy-resolved microstate entropy S = -sum_i p_i ln(p_i / g_i), so a
//! zero-temperature state carries exactly ln(g_0).
//!
//! Population ratios follow the per-microstate form
//! (p_i/g_i)/(p_0/g_0) = exp(-E_i/T). With per-level ratios instead, only
//! degenerate-ground spectra would change, by the factor g_i/g_0.
//!
//! Everything here is a pure function over immutable values; unrestricted
//! parallel use is fine.

use crate::error::{Error, Result};
use crate::numeric::adaptive_simpson;
use crate::scalar::Scalar;
use crate::spectra::{validate_levels, Level, SpectrumModel, TruncationPolicy};

/// Populations must sum to 1 within this.
pub const POPULATION_NORM_TOL: f64 = 1e-12;
/// Per-microstate Boltzmann ratios must match exp(-E_i/T) within this.
pub const BOLTZMANN_RATIO_TOL: f64 = 1e-10;

/// Beyond this value of E/T a Boltzmann weight is an exact float zero, so
/// sorted level scans stop here.
const UNDERFLOW_EXPONENT: f64 = 750.0;

/// Where `SpectrumModel`-backed states remember where they came from.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRef<S> {
    pub model: SpectrumModel<S>,
    pub parameter: S,
}

/// Per-level populations over a truncated spectrum, with an optional
/// temperature label that is only present when the populations actually are
/// Gibbs at that temperature (label 0 means all mass on the ground level).
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalState<S> {
    levels: Vec<Level<S>>,
    populations: Vec<S>,
    temperature: Option<S>,
    origin: Option<SpectrumRef<S>>,
}

impl<S: Scalar> ThermalState<S> {
    /// Builds a state from explicit per-level populations, validating the
    /// normalization, nonnegativity, and (when a temperature label is given)
    /// the Boltzmann-ratio identity.
    pub fn from_populations(
        levels: Vec<Level<S>>,
        populations: Vec<S>,
        temperature: Option<S>,
    ) -> Result<Self> {
        validate_levels(&levels)?;
        if populations.len() != levels.len() {
            return Err(Error::InvalidState(
                "population vector length must match level count".into(),
            ));
        }
        let mut total = S::zero();
        for &p in &populations {
            if !(p >= S::zero()) {
                return Err(Error::InvalidState(
                    "populations must be nonnegative".into(),
                ));
            }
            total += p;
        }
        if (total - S::one()).abs() > S::tol(POPULATION_NORM_TOL) {
            return Err(Error::InvalidState(format!(
                "populations sum to {} instead of 1",
                total.as_f64()
            )));
        }
        match temperature {
            Some(t) if t < S::zero() => {
                return Err(Error::InvalidState(
                    "temperature label must be nonnegative".into(),
                ));
            }
            Some(t) if t == S::zero() => {
                if populations[0] != S::one() || populations[1..].iter().any(|&p| p != S::zero()) {
                    return Err(Error::InvalidState(
                        "a zero-temperature label requires all population mass on the ground level"
                            .into(),
                    ));
                }
            }
            Some(t) => {
                let g0 = S::from_count(levels[0].degeneracy);
                let base = populations[0] / g0;
                if !(base > S::zero()) {
                    return Err(Error::InvalidState(
                        "a positive-temperature label requires a populated ground level".into(),
                    ));
                }
                for (level, &p) in levels.iter().zip(&populations).skip(1) {
                    let ratio = (p / S::from_count(level.degeneracy)) / base;
                    let expected = (-level.energy / t).exp();
                    if (ratio - expected).abs() > S::tol(BOLTZMANN_RATIO_TOL) {
                        return Err(Error::InvalidState(format!(
                            "populations are not Gibbs at T = {}: ratio {} vs exp(-E/T) {}",
                            t.as_f64(),
                            ratio.as_f64(),
                            expected.as_f64()
                        )));
                    }
                }
            }
            None => {}
        }
        Ok(Self {
            levels,
            populations,
            temperature,
            origin: None,
        })
    }

    /// Attaches the generating model and parameter, enabling protocol steps
    /// that need to regenerate levels at a different parameter.
    pub fn with_origin(mut self, model: SpectrumModel<S>, parameter: S) -> Self {
        self.origin = Some(SpectrumRef { model, parameter });
        self
    }

    pub fn levels(&self) -> &[Level<S>] {
        &self.levels
    }

    pub fn populations(&self) -> &[S] {
        &self.populations
    }

    pub fn temperature(&self) -> Option<S> {
        self.temperature
    }

    pub fn origin(&self) -> Option<&SpectrumRef<S>> {
        self.origin.as_ref()
    }

    /// Mean energy of the actual populations (Gibbs or not).
    pub fn mean_energy(&self) -> S {
        self.levels
            .iter()
            .zip(&self.populations)
            .fold(S::zero(), |acc, (l, &p)| acc + p * l.energy)
    }
}

/// Z = sum_i g_i exp(-E_i/T), with the ground term (exactly g_0) split off.
pub fn partition_function<S: Scalar>(levels: &[Level<S>], temperature: S) -> Result<S> {
    validate_levels(levels)?;
    if !(temperature > S::zero()) {
        return Err(Error::InvalidArgument(
            "partition function requires T > 0; zero-temperature quantities have dedicated operations"
                .into(),
        ));
    }
    let mut z = S::from_count(levels[0].degeneracy);
    for level in &levels[1..] {
        let x = level.energy / temperature;
        if x > S::lit(UNDERFLOW_EXPONENT) {
            break;
        }
        z += S::from_count(level.degeneracy) * (-x).exp();
    }
    Ok(z)
}

/// Gibbs populations at `temperature >= 0`; at 0 all mass sits on the ground
/// level and the state is labeled T = 0.
pub fn gibbs_populations<S: Scalar>(
    levels: &[Level<S>],
    temperature: S,
) -> Result<ThermalState<S>> {
    validate_levels(levels)?;
    if !(temperature >= S::zero()) {
        return Err(Error::InvalidArgument(
            "temperature must be nonnegative".into(),
        ));
    }
    let populations = if temperature == S::zero() {
        let mut p = vec![S::zero(); levels.len()];
        p[0] = S::one();
        p
    } else {
        let z = partition_function(levels, temperature)?;
        levels
            .iter()
            .map(|l| {
                let x = l.energy / temperature;
                S::from_count(l.degeneracy) * (-x).exp() / z
            })
            .collect()
    };
    ThermalState::from_populations(levels.to_vec(), populations, Some(temperature))
}

/// Gibbs state generated from a model, truncated per `policy` at the state's
/// temperature (or at `policy.reference_temperature` when set).
pub fn gibbs_state<S: Scalar>(
    model: &SpectrumModel<S>,
    x: S,
    temperature: S,
    policy: &TruncationPolicy<S>,
) -> Result<ThermalState<S>> {
    let trunc_t = policy.reference_temperature.unwrap_or(temperature);
    let count = if trunc_t > S::zero() {
        model.truncation_count(x, trunc_t, policy)?
    } else {
        2
    };
    let levels = model.levels_at(x, count)?;
    Ok(gibbs_populations(&levels, temperature)?.with_origin(model.clone(), x))
}

/// Degeneracy-resolved entropy S = -sum p ln(p/g), written as
/// sum p (ln g - ln p) so one-hot states land exactly on ln g.
pub fn entropy<S: Scalar>(state: &ThermalState<S>) -> S {
    let mut s = S::zero();
    for (level, &p) in state.levels.iter().zip(&state.populations) {
        if p > S::zero() {
            s += p * (S::from_count(level.degeneracy).ln() - p.ln());
        }
    }
    s
}

fn weights_pass<S: Scalar>(levels: &[Level<S>], t: S) -> (S, S) {
    // Returns (Z, U) for T > 0.
    let mut z = S::zero();
    let mut zu = S::zero();
    for level in levels {
        let x = level.energy / t;
        if x > S::lit(UNDERFLOW_EXPONENT) {
            break;
        }
        let w = S::from_count(level.degeneracy) * (-x).exp();
        z += w;
        zu += w * level.energy;
    }
    (z, zu / z)
}

/// Specific heat C(T) = Var(E)/T^2 from the Gibbs energy variance (exact at
/// truncation level, no finite differences).
pub fn specific_heat<S: Scalar>(levels: &[Level<S>], temperature: S) -> Result<S> {
    validate_levels(levels)?;
    if !(temperature > S::zero()) {
        return Err(Error::InvalidArgument(
            "specific heat requires T > 0".into(),
        ));
    }
    Ok(specific_heat_unchecked(levels, temperature))
}

pub(crate) fn specific_heat_unchecked<S: Scalar>(levels: &[Level<S>], t: S) -> S {
    let (z, mean) = weights_pass(levels, t);
    let mut var = S::zero();
    for level in levels {
        let x = level.energy / t;
        if x > S::lit(UNDERFLOW_EXPONENT) {
            break;
        }
        let w = S::from_count(level.degeneracy) * (-x).exp();
        let d = level.energy - mean;
        var += w * d * d;
    }
    var / z / (t * t)
}

/// Entropy above the zero-temperature value, S(T) - ln(g_0), computed without
/// cancellation: ln(Z/g_0) via ln(1+eps) plus U/T, both sums of positive
/// terms. Accurate to relative precision even when the value is near the
/// underflow threshold. Returns 0 for T <= 0.
pub fn entropy_excess<S: Scalar>(levels: &[Level<S>], temperature: S) -> S {
    if !(temperature > S::zero()) {
        return S::zero();
    }
    let g0 = S::from_count(levels[0].degeneracy);
    let mut eps = S::zero();
    let mut a = S::zero(); // sum of (g_i/g_0) (E_i/T) exp(-E_i/T)
    for level in &levels[1..] {
        let x = level.energy / temperature;
        if x > S::lit(UNDERFLOW_EXPONENT) {
            break;
        }
        let w = (S::from_count(level.degeneracy) / g0) * (-x).exp();
        eps += w;
        a += w * x;
    }
    eps.ln_1p() + a / (S::one() + eps)
}

/// ln of [`entropy_excess`], usable far below the float underflow threshold.
///
/// Once the direct excess drops under ~1e-280 this switches to a log-sum-exp
/// over ln(g_i/g_0) + ln(1 + E_i/T) - E_i/T, whose relative error is of the
/// order of the excess itself. Returns -inf when the excess is zero beyond
/// representable range (or T <= 0).
pub fn log_entropy_excess<S: Scalar>(levels: &[Level<S>], temperature: S) -> S {
    if !(temperature > S::zero()) {
        return S::neg_infinity();
    }
    let direct = entropy_excess(levels, temperature);
    if direct > S::lit(1e-280) {
        return direct.ln();
    }
    let ln_g0 = S::from_count(levels[0].degeneracy).ln();
    let term = |level: &Level<S>| {
        let x = level.energy / temperature;
        if x.is_finite() {
            S::from_count(level.degeneracy).ln() - ln_g0 + x.ln_1p() - x
        } else {
            S::neg_infinity()
        }
    };
    let mut max_term = S::neg_infinity();
    for level in &levels[1..] {
        let t = term(level);
        if t > max_term {
            max_term = t;
        }
    }
    if !max_term.is_finite() {
        return S::neg_infinity();
    }
    let mut sum = S::zero();
    for level in &levels[1..] {
        sum += (term(level) - max_term).exp();
    }
    max_term + sum.ln()
}

/// The entropy function S(T) of one truncated spectrum at a fixed parameter.
///
/// A surface is the exact thermodynamics of its finite level list, so the
/// identity S(T) = S(0) + integral of C(t)/t holds exactly and quadrature is
/// the only error source when comparing the two routes.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropySurface<S> {
    levels: Vec<Level<S>>,
    parameter: S,
    zero_entropy: S,
}

impl<S: Scalar> EntropySurface<S> {
    /// Truncates `model` at `x` for temperatures up to `t_max` and wraps the
    /// resulting finite spectrum.
    pub fn for_model(
        model: &SpectrumModel<S>,
        x: S,
        t_max: S,
        policy: &TruncationPolicy<S>,
    ) -> Result<Self> {
        if !(t_max > S::zero()) {
            return Err(Error::InvalidArgument(
                "surface truncation temperature must be positive".into(),
            ));
        }
        let count = model.truncation_count(x, t_max, policy)?;
        let levels = model.levels_at(x, count)?;
        Self::from_levels(levels, x)
    }

    /// Wraps an explicit level list (already sorted, ground at 0). The
    /// `parameter` is a caller-chosen label carried into reports.
    pub fn from_levels(levels: Vec<Level<S>>, parameter: S) -> Result<Self> {
        validate_levels(&levels)?;
        let zero_entropy = S::from_count(levels[0].degeneracy).ln();
        Ok(Self {
            levels,
            parameter,
            zero_entropy,
        })
    }

    pub fn levels(&self) -> &[Level<S>] {
        &self.levels
    }

    pub fn parameter(&self) -> S {
        self.parameter
    }

    /// S(0) = ln(g_0), the Boltzmann value for the ground degeneracy.
    pub fn zero_temperature_entropy(&self) -> S {
        self.zero_entropy
    }

    pub fn ground_degeneracy(&self) -> u64 {
        self.levels[0].degeneracy
    }

    /// S(T) = ln Z + U/T for T > 0, S(0) exactly at T = 0. Algebraically
    /// identical to the population-formula entropy of the Gibbs state.
    pub fn entropy(&self, temperature: S) -> Result<S> {
        if !(temperature >= S::zero()) {
            return Err(Error::InvalidArgument(
                "temperature must be nonnegative".into(),
            ));
        }
        if temperature == S::zero() {
            return Ok(self.zero_entropy);
        }
        Ok(self.zero_entropy + entropy_excess(&self.levels, temperature))
    }

    pub fn entropy_excess(&self, temperature: S) -> S {
        entropy_excess(&self.levels, temperature)
    }

    pub fn log_excess(&self, temperature: S) -> S {
        log_entropy_excess(&self.levels, temperature)
    }

    pub fn specific_heat(&self, temperature: S) -> Result<S> {
        specific_heat(&self.levels, temperature)
    }

    /// Mean energy at `temperature >= 0` (ground energy 0 at T = 0).
    pub fn mean_energy(&self, temperature: S) -> Result<S> {
        if !(temperature >= S::zero()) {
            return Err(Error::InvalidArgument(
                "temperature must be nonnegative".into(),
            ));
        }
        if temperature == S::zero() {
            return Ok(S::zero());
        }
        Ok(weights_pass(&self.levels, temperature).1)
    }

    /// The integral of C(t)/t over (0, T] by adaptive quadrature.
    ///
    /// The 1/t singularity is tamed by the exponential vanishing of C for
    /// gapped spectra: integration starts at a cutoff below which the
    /// integrand is smaller than 1e-18 times its largest sampled value, so
    /// the dropped piece is negligible relative to the integral at any scale
    /// (a cold large-gap start still yields a strictly positive value).
    pub fn specific_heat_integral(&self, temperature: S, quad_tol: S) -> Result<S> {
        if !(temperature >= S::zero()) {
            return Err(Error::InvalidArgument(
                "temperature must be nonnegative".into(),
            ));
        }
        if !(quad_tol > S::zero()) {
            return Err(Error::InvalidArgument(
                "quadrature tolerance must be positive".into(),
            ));
        }
        if temperature == S::zero() {
            return Ok(S::zero());
        }
        let integrand = |t: S| specific_heat_unchecked(&self.levels, t) / t;
        let top = integrand(temperature);
        if top == S::zero() {
            // Below the first gap's resolvable scale the whole integral
            // underflows; the direct route agrees (S(T) == S(0) in floats).
            return Ok(S::zero());
        }
        let rel_floor = S::lit(1e-18);
        let mut peak = top;
        let mut t_lo = temperature;
        loop {
            let next = t_lo / S::lit(2.0);
            let v = integrand(next);
            t_lo = next;
            if v > peak {
                peak = v;
            }
            if v < peak * rel_floor || v == S::zero() || t_lo < S::lit(1e-300) {
                break;
            }
        }
        Ok(adaptive_simpson(integrand, t_lo, temperature, quad_tol)?.value)
    }

    /// S(0) plus [`Self::specific_heat_integral`]: the quadrature route to
    /// the entropy.
    pub fn entropy_via_integral(&self, temperature: S, quad_tol: S) -> Result<S> {
        Ok(self.zero_entropy + self.specific_heat_integral(temperature, quad_tol)?)
    }
}

/// Result of comparing zero-temperature entropies at two parameter values.
#[derive(Debug, Clone, Copy)]
pub struct NernstReport<S> {
    pub holds: bool,
    pub ground_degeneracy_first: u64,
    pub ground_degeneracy_second: u64,
    pub zero_entropy_first: S,
    pub zero_entropy_second: S,
}

/// Does S(0, x1) = S(0, x2)? Ground degeneracies are integers, so the
/// comparison is exact for every family (for `custom` tables this coincides
/// with comparing ln W within 1e-12).
pub fn nernst_check<S: Scalar>(model: &SpectrumModel<S>, x1: S, x2: S) -> Result<NernstReport<S>> {
    let g1 = model.ground_degeneracy(x1)?;
    let g2 = model.ground_degeneracy(x2)?;
    Ok(NernstReport {
        holds: g1 == g2,
        ground_degeneracy_first: g1,
        ground_degeneracy_second: g2,
        zero_entropy_first: S::from_count(g1).ln(),
        zero_entropy_second: S::from_count(g2).ln(),
    })
}

/// The stronger statement: S(0, x) = 0, i.e. a nondegenerate ground level.
pub fn planck_check<S: Scalar>(model: &SpectrumModel<S>, x: S) -> Result<bool> {
    Ok(model.ground_degeneracy(x)? == 1)
}
