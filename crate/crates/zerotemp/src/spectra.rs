//! Parameterized discrete-spectrum models.
//!
//! A [`SpectrumModel`] maps an external parameter `x` from a closed domain to
//! a sorted level list with the ground energy pinned to exactly zero. Only
//! gaps matter for populations, so every built-in family is shifted so its
//! lowest level sits at 0. Energies and temperatures are dimensionless
//! (k = 1) and all types are immutable values, safe to share across threads.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// One energy level: an energy (ground at 0) and an integer degeneracy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Level<S> {
    pub energy: S,
    pub degeneracy: u64,
}

impl<S: Scalar> Level<S> {
    pub fn new(energy: S, degeneracy: u64) -> Result<Self> {
        if !energy.is_finite() {
            return Err(Error::InvalidArgument("level energy must be finite".into()));
        }
        if degeneracy == 0 {
            return Err(Error::InvalidArgument(
                "degeneracy must be at least 1".into(),
            ));
        }
        Ok(Self { energy, degeneracy })
    }
}

/// Closed interval of admissible external-parameter values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParameterDomain<S> {
    lo: S,
    hi: S,
}

impl<S: Scalar> ParameterDomain<S> {
    pub fn new(lo: S, hi: S) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return Err(Error::InvalidArgument(format!(
                "parameter domain [{}, {}] is not a finite closed interval",
                lo.as_f64(),
                hi.as_f64()
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> S {
        self.lo
    }

    pub fn hi(&self) -> S {
        self.hi
    }

    pub fn contains(&self, x: S) -> bool {
        x.is_finite() && x >= self.lo && x <= self.hi
    }
}

/// One row of a custom spectrum table: the level list at a listed parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct TablePoint<S> {
    pub parameter: S,
    pub levels: Vec<Level<S>>,
}

#[derive(Debug, Clone, PartialEq)]
enum Family<S> {
    /// Two levels: ground and one excited at gap `x`.
    TwoLevel,
    /// Equally spaced ladder with spacing `x`: E_i = i * x.
    Harmonic,
    /// Particle in a box of width `x`: E_n = (n^2 - 1) / x^2, n = 1, 2, ...
    ParticleBox,
    /// Ground level with declared degeneracy and a single excited level at
    /// gap `x`. The degeneracy is piecewise constant in the parameter,
    /// changing only at the listed breakpoints; this is the synthetic family
    /// whose zero-temperature entropy can depend on the parameter.
    DegenerateGround { ground_w: Vec<(S, u64)> },
    /// Explicit level table with linear interpolation of energies between
    /// listed parameters. Degeneracies are never interpolated: between two
    /// listed parameters the left point's degeneracies apply.
    Custom { table: Vec<TablePoint<S>> },
}

/// A family of discrete spectra indexed by one external parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumModel<S> {
    family: Family<S>,
    domain: ParameterDomain<S>,
}

/// Default cap on the number of levels kept after truncation.
pub const DEFAULT_LEVEL_CAP: usize = 10_000;

/// How infinite spectra are truncated to finite level lists.
#[derive(Debug, Clone, Copy)]
pub struct TruncationPolicy<S> {
    /// Levels are dropped once their Boltzmann weight relative to the ground
    /// level falls below this.
    pub tail_tolerance: S,
    /// Hard cap on the level count; exceeding it is an error that reports the
    /// achieved tail weight.
    pub cap: usize,
    /// When set, truncation is computed at this temperature instead of the
    /// state's own temperature. Useful when a protocol will later visit
    /// temperatures above the initial one.
    pub reference_temperature: Option<S>,
}

impl<S: Scalar> Default for TruncationPolicy<S> {
    fn default() -> Self {
        Self {
            tail_tolerance: S::lit(1e-15),
            cap: DEFAULT_LEVEL_CAP,
            reference_temperature: None,
        }
    }
}

fn positive_domain<S: Scalar>(domain: &ParameterDomain<S>, family: &str) -> Result<()> {
    if domain.lo() <= S::zero() {
        return Err(Error::InvalidArgument(format!(
            "{family} family requires a strictly positive parameter domain"
        )));
    }
    Ok(())
}

impl<S: Scalar> SpectrumModel<S> {
    /// Gap model: levels `[(0, 1), (x, 1)]`.
    pub fn two_level(domain: ParameterDomain<S>) -> Result<Self> {
        positive_domain(&domain, "two_level")?;
        Ok(Self {
            family: Family::TwoLevel,
            domain,
        })
    }

    /// Even ladder: E_i = i * x, all nondegenerate.
    pub fn harmonic(domain: ParameterDomain<S>) -> Result<Self> {
        positive_domain(&domain, "harmonic")?;
        Ok(Self {
            family: Family::Harmonic,
            domain,
        })
    }

    /// Box spectrum: E_n = (n^2 - 1) / x^2 for n = 1, 2, ..., nondegenerate.
    pub fn particle_box(domain: ParameterDomain<S>) -> Result<Self> {
        positive_domain(&domain, "box")?;
        Ok(Self {
            family: Family::ParticleBox,
            domain,
        })
    }

    /// Degenerate-ground gap model with a constant ground degeneracy `w`.
    pub fn degenerate_ground(domain: ParameterDomain<S>, w: u64) -> Result<Self> {
        Self::degenerate_ground_steps(domain, vec![(domain.lo(), w)])
    }

    /// Degenerate-ground gap model whose ground degeneracy is a step function
    /// of the parameter: at `x` the degeneracy of the greatest breakpoint
    /// `<= x` applies (the first entry applies below every breakpoint).
    pub fn degenerate_ground_steps(
        domain: ParameterDomain<S>,
        ground_w: Vec<(S, u64)>,
    ) -> Result<Self> {
        positive_domain(&domain, "degenerate_ground")?;
        if ground_w.is_empty() {
            return Err(Error::InvalidArgument(
                "degenerate_ground requires at least one ground-degeneracy entry".into(),
            ));
        }
        for pair in ground_w.windows(2) {
            if !(pair[1].0 > pair[0].0) {
                return Err(Error::InvalidArgument(
                    "ground-degeneracy breakpoints must be strictly increasing".into(),
                ));
            }
        }
        for &(p, w) in &ground_w {
            if !domain.contains(p) {
                return Err(Error::ParameterOutOfDomain {
                    value: p.as_f64(),
                    lo: domain.lo().as_f64(),
                    hi: domain.hi().as_f64(),
                });
            }
            if w == 0 {
                return Err(Error::InvalidArgument(
                    "degeneracy must be at least 1".into(),
                ));
            }
        }
        Ok(Self {
            family: Family::DegenerateGround { ground_w },
            domain,
        })
    }

    /// Explicit table model. The domain is the closed hull of the listed
    /// parameters. Every row must carry the same number of levels, sorted
    /// ascending in energy; absolute energies are irrelevant because each
    /// generated list is shifted so its ground level sits at exactly 0.
    pub fn custom(table: Vec<TablePoint<S>>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::InvalidArgument(
                "custom table must be nonempty".into(),
            ));
        }
        let n_levels = table[0].levels.len();
        if n_levels < 2 {
            return Err(Error::InvalidArgument(
                "custom table rows need at least two levels".into(),
            ));
        }
        for point in &table {
            if !point.parameter.is_finite() {
                return Err(Error::InvalidArgument(
                    "custom table parameters must be finite".into(),
                ));
            }
            if point.levels.len() != n_levels {
                return Err(Error::InvalidArgument(
                    "custom table rows must all have the same level count".into(),
                ));
            }
            for level in &point.levels {
                Level::new(level.energy, level.degeneracy)?;
            }
            for pair in point.levels.windows(2) {
                if !(pair[1].energy >= pair[0].energy) {
                    return Err(Error::InvalidArgument(
                        "custom table rows must be sorted ascending in energy".into(),
                    ));
                }
            }
        }
        for pair in table.windows(2) {
            if !(pair[1].parameter > pair[0].parameter) {
                return Err(Error::InvalidArgument(
                    "custom table parameters must be strictly increasing".into(),
                ));
            }
        }
        let domain = ParameterDomain::new(
            table.first().unwrap().parameter,
            table.last().unwrap().parameter,
        )?;
        Ok(Self {
            family: Family::Custom { table },
            domain,
        })
    }

    pub fn family_name(&self) -> &'static str {
        match self.family {
            Family::TwoLevel => "two_level",
            Family::Harmonic => "harmonic",
            Family::ParticleBox => "box",
            Family::DegenerateGround { .. } => "degenerate_ground",
            Family::Custom { .. } => "custom",
        }
    }

    pub fn domain(&self) -> &ParameterDomain<S> {
        &self.domain
    }

    pub fn check_parameter(&self, x: S) -> Result<()> {
        if self.domain.contains(x) {
            Ok(())
        } else {
            Err(Error::ParameterOutOfDomain {
                value: x.as_f64(),
                lo: self.domain.lo().as_f64(),
                hi: self.domain.hi().as_f64(),
            })
        }
    }

    /// Number of levels the family actually has, when finite.
    pub fn natural_level_count(&self) -> Option<usize> {
        match &self.family {
            Family::TwoLevel | Family::DegenerateGround { .. } => Some(2),
            Family::Custom { table } => Some(table[0].levels.len()),
            Family::Harmonic | Family::ParticleBox => None,
        }
    }

    pub fn ground_degeneracy(&self, x: S) -> Result<u64> {
        self.check_parameter(x)?;
        Ok(match &self.family {
            Family::TwoLevel | Family::Harmonic | Family::ParticleBox => 1,
            Family::DegenerateGround { ground_w } => ground_w
                .iter()
                .rev()
                .find(|&&(p, _)| x >= p)
                .map(|&(_, w)| w)
                .unwrap_or(ground_w[0].1),
            Family::Custom { table } => self.custom_row_degeneracies(table, x)[0],
        })
    }

    /// Generates the first `count` levels at parameter `x`, sorted ascending,
    /// ground at exactly 0. Finite families return their full level set when
    /// `count` exceeds it.
    pub fn levels_at(&self, x: S, count: usize) -> Result<Vec<Level<S>>> {
        self.check_parameter(x)?;
        if count < 2 {
            return Err(Error::InvalidArgument(
                "at least two levels are required".into(),
            ));
        }
        Ok(match &self.family {
            Family::TwoLevel => vec![
                Level {
                    energy: S::zero(),
                    degeneracy: 1,
                },
                Level {
                    energy: x,
                    degeneracy: 1,
                },
            ],
            Family::Harmonic => (0..count)
                .map(|i| Level {
                    energy: S::from_usize(i).expect("level index") * x,
                    degeneracy: 1,
                })
                .collect(),
            Family::ParticleBox => (1..=count)
                .map(|n| {
                    let n = S::from_usize(n).expect("level index");
                    Level {
                        energy: (n * n - S::one()) / (x * x),
                        degeneracy: 1,
                    }
                })
                .collect(),
            Family::DegenerateGround { .. } => vec![
                Level {
                    energy: S::zero(),
                    degeneracy: self.ground_degeneracy(x)?,
                },
                Level {
                    energy: x,
                    degeneracy: 1,
                },
            ],
            Family::Custom { table } => {
                let energies = self.custom_row_energies(table, x);
                let degeneracies = self.custom_row_degeneracies(table, x);
                let ground = energies[0];
                energies
                    .into_iter()
                    .zip(degeneracies)
                    .take(count)
                    .map(|(e, g)| Level {
                        energy: e - ground,
                        degeneracy: g,
                    })
                    .collect()
            }
        })
    }

    /// Smallest level count `N` such that the Boltzmann weight of level `N`
    /// relative to the ground level, `(g_N/g_0) exp(-E_N/T)`, drops below
    /// `tail_tolerance` (so levels `0..N-1` are kept and everything dropped
    /// weighs less than the tolerance). Finite families return their natural
    /// size regardless.
    pub fn truncation_count(
        &self,
        x: S,
        temperature: S,
        policy: &TruncationPolicy<S>,
    ) -> Result<usize> {
        self.check_parameter(x)?;
        if !(temperature > S::zero()) {
            return Err(Error::InvalidArgument(
                "truncation temperature must be positive".into(),
            ));
        }
        if !(policy.tail_tolerance > S::zero() && policy.tail_tolerance < S::one()) {
            return Err(Error::InvalidArgument(
                "tail tolerance must lie in (0, 1)".into(),
            ));
        }
        if let Some(natural) = self.natural_level_count() {
            return Ok(natural);
        }
        let g0 = S::one(); // ladders are nondegenerate
        let mut n = 1usize;
        loop {
            let energy = match &self.family {
                Family::Harmonic => S::from_usize(n).expect("level index") * x,
                Family::ParticleBox => {
                    let m = S::from_usize(n + 1).expect("level index");
                    (m * m - S::one()) / (x * x)
                }
                _ => unreachable!("finite families handled above"),
            };
            let weight = (-energy / temperature).exp() / g0;
            if weight < policy.tail_tolerance {
                return Ok(n.max(2));
            }
            n += 1;
            if n > policy.cap {
                return Err(Error::TruncationCapExceeded {
                    cap: policy.cap,
                    tail_weight: weight.as_f64(),
                    tolerance: policy.tail_tolerance.as_f64(),
                });
            }
        }
    }

    fn custom_segment(&self, table: &[TablePoint<S>], x: S) -> (usize, Option<S>) {
        // Exact hits use that row; interior points interpolate from the left.
        for (i, point) in table.iter().enumerate() {
            if point.parameter == x {
                return (i, None);
            }
        }
        let j = table
            .iter()
            .rposition(|p| p.parameter < x)
            .expect("x inside domain and not an exact hit");
        let p0 = table[j].parameter;
        let p1 = table[j + 1].parameter;
        (j, Some((x - p0) / (p1 - p0)))
    }

    fn custom_row_energies(&self, table: &[TablePoint<S>], x: S) -> Vec<S> {
        match self.custom_segment(table, x) {
            (i, None) => table[i].levels.iter().map(|l| l.energy).collect(),
            (j, Some(frac)) => table[j]
                .levels
                .iter()
                .zip(&table[j + 1].levels)
                .map(|(a, b)| a.energy + (b.energy - a.energy) * frac)
                .collect(),
        }
    }

    fn custom_row_degeneracies(&self, table: &[TablePoint<S>], x: S) -> Vec<u64> {
        let (i, _) = self.custom_segment(table, x);
        table[i].levels.iter().map(|l| l.degeneracy).collect()
    }
}

/// Validates the level-list contract shared by all thermodynamic operations:
/// nonempty, finite, sorted ascending, degeneracies >= 1, ground at exactly 0.
pub fn validate_levels<S: Scalar>(levels: &[Level<S>]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::InvalidArgument("level list must be nonempty".into()));
    }
    if levels[0].energy != S::zero() {
        return Err(Error::InvalidArgument(
            "ground level must sit at energy 0".into(),
        ));
    }
    for level in levels {
        if !level.energy.is_finite() {
            return Err(Error::InvalidArgument("level energy must be finite".into()));
        }
        if level.degeneracy == 0 {
            return Err(Error::InvalidArgument(
                "degeneracy must be at least 1".into(),
            ));
        }
    }
    for pair in levels.windows(2) {
        if !(pair[1].energy >= pair[0].energy) {
            return Err(Error::InvalidArgument(
                "levels must be sorted ascending in energy".into(),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn domain(lo: f64, hi: f64) -> ParameterDomain<f64> {
        ParameterDomain::new(lo, hi).unwrap()
    }

    #[test]
    fn two_level_levels() {
        let model = SpectrumModel::two_level(domain(0.1, 10.0)).unwrap();
        let levels = model.levels_at(1.0, 2).unwrap();
        assert_eq!(
            levels,
            vec![
                Level {
                    energy: 0.0,
                    degeneracy: 1
                },
                Level {
                    energy: 1.0,
                    degeneracy: 1
                },
            ]
        );
    }

    #[test]
    fn harmonic_levels() {
        let model = SpectrumModel::harmonic(domain(0.1, 10.0)).unwrap();
        let levels = model.levels_at(2.0, 3).unwrap();
        let energies: Vec<f64> = levels.iter().map(|l| l.energy).collect();
        assert_eq!(energies, vec![0.0, 2.0, 4.0]);
        assert!(levels.iter().all(|l| l.degeneracy == 1));
    }

    #[test]
    fn box_levels_match_closed_form() {
        // E_n = n^2 / L^2 shifted so E_1 = 0: (n^2 - 1) / L^2 for n = 1, 2, 3.
        let model = SpectrumModel::particle_box(domain(0.5, 2.0)).unwrap();
        let levels = model.levels_at(1.0, 3).unwrap();
        let energies: Vec<f64> = levels.iter().map(|l| l.energy).collect();
        assert_eq!(energies, vec![0.0, 3.0, 8.0]);
    }

    #[test]
    fn degenerate_ground_step_map() {
        let model =
            SpectrumModel::degenerate_ground_steps(domain(0.5, 2.0), vec![(0.5, 1), (2.0, 2)])
                .unwrap();
        assert_eq!(model.ground_degeneracy(0.5).unwrap(), 1);
        assert_eq!(model.ground_degeneracy(1.0).unwrap(), 1);
        assert_eq!(model.ground_degeneracy(2.0).unwrap(), 2);
    }

    #[test]
    fn parameter_outside_domain_is_rejected() {
        let model = SpectrumModel::harmonic(domain(0.5, 2.0)).unwrap();
        assert!(matches!(
            model.levels_at(3.0, 4),
            Err(Error::ParameterOutOfDomain { .. })
        ));
    }

    #[test]
    fn count_below_two_is_rejected() {
        let model = SpectrumModel::harmonic(domain(0.5, 2.0)).unwrap();
        assert!(matches!(
            model.levels_at(1.0, 1),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn truncation_counts_by_direct_evaluation() {
        // Smallest N with exp(-N) < 1e-15 is 35; with exp(-10 N) < 1e-15 it is 4.
        let model = SpectrumModel::harmonic(domain(0.05, 10.0)).unwrap();
        let policy = TruncationPolicy::default();
        assert_eq!(model.truncation_count(1.0, 1.0, &policy).unwrap(), 35);
        assert_eq!(model.truncation_count(1.0, 0.1, &policy).unwrap(), 4);
    }

    #[test]
    fn truncation_finite_family_returns_natural_size() {
        let model = SpectrumModel::two_level(domain(0.1, 10.0)).unwrap();
        let policy = TruncationPolicy::default();
        assert_eq!(model.truncation_count(1.0, 100.0, &policy).unwrap(), 2);
        assert_eq!(model.truncation_count(1.0, 1e-3, &policy).unwrap(), 2);
    }

    #[test]
    fn truncation_cap_is_reported() {
        let model = SpectrumModel::harmonic(domain(0.05, 10.0)).unwrap();
        let policy = TruncationPolicy {
            cap: 10,
            ..TruncationPolicy::default()
        };
        match model.truncation_count(0.05, 10.0, &policy) {
            Err(Error::TruncationCapExceeded {
                cap, tail_weight, ..
            }) => {
                assert_eq!(cap, 10);
                assert!(tail_weight >= 1e-15);
            }
            other => panic!("expected truncation error, got {other:?}"),
        }
    }

    #[test]
    fn custom_interpolates_energies_not_degeneracies() {
        let table: Vec<TablePoint<f64>> = vec![
            TablePoint {
                parameter: 1.0,
                levels: vec![
                    Level {
                        energy: 0.0,
                        degeneracy: 2,
                    },
                    Level {
                        energy: 1.0,
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
                        energy: 3.0,
                        degeneracy: 1,
                    },
                ],
            },
        ];
        let model = SpectrumModel::custom(table).unwrap();
        // Midpoint: energies lerp (gap 2.0), degeneracies stay the left row's.
        let mid = model.levels_at(1.5, 2).unwrap();
        assert_eq!(mid[0].degeneracy, 2);
        assert!((mid[1].energy - 2.0).abs() < 1e-15);
        // Exact right endpoint: that row's degeneracies apply.
        let right = model.levels_at(2.0, 2).unwrap();
        assert_eq!(right[0].degeneracy, 1);
        assert_eq!(right[1].energy, 3.0);
    }

    #[test]
    fn custom_ground_is_shifted_to_zero() {
        let table = vec![TablePoint {
            parameter: 1.0,
            levels: vec![
                Level {
                    energy: 5.0,
                    degeneracy: 1,
                },
                Level {
                    energy: 7.5,
                    degeneracy: 3,
                },
            ],
        }];
        let model = SpectrumModel::custom(table).unwrap();
        let levels = model.levels_at(1.0, 2).unwrap();
        assert_eq!(levels[0].energy, 0.0);
        assert_eq!(levels[1].energy, 2.5);
        assert_eq!(levels[1].degeneracy, 3);
    }

    #[test]
    fn determinism_identical_calls_identical_lists() {
        let model = SpectrumModel::particle_box(domain(0.5, 2.0)).unwrap();
        let a = model.levels_at(1.3, 7).unwrap();
        let b = model.levels_at(1.3, 7).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ground_shift_convention_per_family() {
        let policy = TruncationPolicy::default();
        let models = [
            SpectrumModel::two_level(domain(0.1, 10.0)).unwrap(),
            SpectrumModel::harmonic(domain(0.1, 10.0)).unwrap(),
            SpectrumModel::particle_box(domain(0.1, 10.0)).unwrap(),
            SpectrumModel::degenerate_ground(domain(0.1, 10.0), 2).unwrap(),
        ];
        for model in &models {
            let n = model.truncation_count(1.0, 1.0, &policy).unwrap();
            let levels = model.levels_at(1.0, n).unwrap();
            assert_eq!(levels[0].energy, 0.0, "{}", model.family_name());
            validate_levels(&levels).unwrap();
        }
    }
}
