//! Adaptive quadrature and bracketed root finding.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Outcome of an adaptive quadrature run.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature<S> {
    pub value: S,
    /// Accumulated Richardson error estimate.
    pub error_estimate: S,
    pub evaluations: usize,
}

const MAX_DEPTH: u32 = 48;

/// Integrates `f` over `[a, b]` by adaptive Simpson refinement to absolute
/// tolerance `tol`.
///
/// When `a > 0` and the interval spans more than two octaves, it is first cut
/// at powers of two so a sharp onset near the lower end cannot fool a single
/// whole-interval error estimate; each segment then refines recursively and
/// gets an equal share of the tolerance budget.
pub fn adaptive_simpson<S, F>(f: F, a: S, b: S, tol: S) -> Result<Quadrature<S>>
where
    S: Scalar,
    F: Fn(S) -> S,
{
    if !(tol > S::zero()) {
        return Err(Error::InvalidArgument(
            "quadrature tolerance must be positive".into(),
        ));
    }
    if !(b > a) {
        return Ok(Quadrature {
            value: S::zero(),
            error_estimate: S::zero(),
            evaluations: 0,
        });
    }

    let two = S::lit(2.0);
    let mut cuts = vec![b];
    if a > S::zero() {
        let mut t = b / two;
        while t > a * two {
            cuts.push(t);
            t /= two;
        }
    }
    cuts.push(a);
    cuts.reverse(); // ascending: a, ..., b

    let seg_tol = tol / S::from_usize(cuts.len() - 1).expect("segment count");
    let mut value = S::zero();
    let mut err = S::zero();
    let mut evals = 0usize;
    for pair in cuts.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        let flo = f(lo);
        let fhi = f(hi);
        evals += 2;
        let m = (lo + hi) / two;
        let fm = f(m);
        evals += 1;
        let whole = simpson(lo, hi, flo, fm, fhi);
        value += refine(
            &f, lo, m, hi, flo, fm, fhi, whole, seg_tol, 0, &mut err, &mut evals,
        );
    }

    if err > tol {
        return Err(Error::NumericsFailed {
            context: "adaptive quadrature",
            estimate: err.as_f64(),
            tolerance: tol.as_f64(),
        });
    }
    Ok(Quadrature {
        value,
        error_estimate: err,
        evaluations: evals,
    })
}

fn simpson<S: Scalar>(a: S, b: S, fa: S, fm: S, fb: S) -> S {
    let four = S::lit(4.0);
    let six = S::lit(6.0);
    (b - a) / six * (fa + four * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn refine<S, F>(
    f: &F,
    a: S,
    m: S,
    b: S,
    fa: S,
    fm: S,
    fb: S,
    whole: S,
    tol: S,
    depth: u32,
    err: &mut S,
    evals: &mut usize,
) -> S
where
    S: Scalar,
    F: Fn(S) -> S,
{
    let two = S::lit(2.0);
    let fifteen = S::lit(15.0);
    let lm = (a + m) / two;
    let rm = (m + b) / two;
    let flm = f(lm);
    let frm = f(rm);
    *evals += 2;
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if depth >= MAX_DEPTH || delta.abs() <= fifteen * tol || lm <= a || rm >= b {
        *err += delta.abs() / fifteen;
        return left + right + delta / fifteen;
    }
    let half = tol / two;
    refine(f, a, lm, m, fa, flm, fm, left, half, depth + 1, err, evals)
        + refine(f, m, rm, b, fm, frm, fb, right, half, depth + 1, err, evals)
}

/// Bisection for a nondecreasing sign pattern: requires `f(lo) <= 0 <= f(hi)`.
///
/// Converges until the bracket width drops below `rel_tol * hi` or the
/// midpoint is no longer representable strictly inside the bracket, then
/// returns the midpoint.
pub fn bisect<S, F>(f: F, lo: S, hi: S, rel_tol: S) -> Result<S>
where
    S: Scalar,
    F: Fn(S) -> S,
{
    if !(hi > lo) {
        return Err(Error::InvalidArgument(
            "bisection bracket must satisfy lo < hi".into(),
        ));
    }
    let (mut lo, mut hi) = (lo, hi);
    let flo = f(lo);
    let fhi = f(hi);
    if flo > S::zero() || fhi < S::zero() {
        return Err(Error::InvalidArgument(format!(
            "bisection bracket does not straddle a root: f(lo) = {}, f(hi) = {}",
            flo.as_f64(),
            fhi.as_f64()
        )));
    }
    let two = S::lit(2.0);
    loop {
        let mid = (lo + hi) / two;
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        if f(mid) <= S::zero() {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= rel_tol * hi {
            return Ok((lo + hi) / two);
        }
    }
}

/// Bracketed root solve for a monotone nondecreasing `f` with
/// `f(lo) <= 0 <= f(hi)`: false position with the Illinois modification,
/// falling back to a bisection step whenever the secant candidate is
/// unusable (non-finite endpoint values included). Same contract and
/// termination rule as [`bisect`], usually several times fewer evaluations.
pub fn solve_increasing<S, F>(f: F, lo: S, hi: S, rel_tol: S) -> Result<S>
where
    S: Scalar,
    F: Fn(S) -> S,
{
    if !(hi > lo) {
        return Err(Error::InvalidArgument(
            "root bracket must satisfy lo < hi".into(),
        ));
    }
    let (mut lo, mut hi) = (lo, hi);
    let mut flo = f(lo);
    let mut fhi = f(hi);
    if flo > S::zero() || fhi < S::zero() {
        return Err(Error::InvalidArgument(format!(
            "root bracket does not straddle a root: f(lo) = {}, f(hi) = {}",
            flo.as_f64(),
            fhi.as_f64()
        )));
    }
    let two = S::lit(2.0);
    let mut side = 0i8; // which endpoint moved last: -1 lo, +1 hi
    for _ in 0..4096 {
        let mid = (lo + hi) / two;
        let x = if flo.is_finite() && fhi.is_finite() && fhi > flo {
            let fp = hi - fhi * (hi - lo) / (fhi - flo);
            if fp > lo && fp < hi {
                fp
            } else {
                mid
            }
        } else {
            mid
        };
        if x <= lo || x >= hi {
            return Ok(mid);
        }
        let fx = f(x);
        if fx <= S::zero() {
            lo = x;
            flo = fx;
            if side == -1 {
                fhi /= two;
            }
            side = -1;
        } else {
            hi = x;
            fhi = fx;
            if side == 1 {
                flo /= two;
            }
            side = 1;
        }
        if hi - lo <= rel_tol * hi {
            return Ok((lo + hi) / two);
        }
    }
    Err(Error::NumericsFailed {
        context: "monotone root solve",
        estimate: (hi - lo).as_f64(),
        tolerance: (rel_tol * hi).as_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_polynomial_is_nearly_exact() {
        // x^3 over [0, 2] = 4
        let q = adaptive_simpson(|x: f64| x * x * x, 0.0, 2.0, 1e-12).unwrap();
        assert!((q.value - 4.0).abs() < 1e-12, "got {}", q.value);
    }

    #[test]
    fn simpson_exponential_ramp() {
        // exp(-1/x)/x^2 over (0, 1] has antiderivative exp(-1/x): integral = e^{-1}
        let q = adaptive_simpson(|x: f64| (-1.0 / x).exp() / (x * x), 1e-4, 1.0, 1e-10).unwrap();
        assert!((q.value - (-1.0f64).exp()).abs() < 1e-9, "got {}", q.value);
    }

    #[test]
    fn simpson_rejects_bad_tolerance() {
        assert!(adaptive_simpson(|x: f64| x, 0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn bisect_finds_sqrt2() {
        let root = bisect(|x: f64| x * x - 2.0, 0.0, 2.0, 1e-14).unwrap();
        assert!((root - 2.0f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn bisect_rejects_unbracketed_root() {
        assert!(bisect(|x: f64| x + 10.0, 0.0, 1.0, 1e-12).is_err());
    }

    #[test]
    fn bisect_handles_root_at_upper_end() {
        let root = bisect(|x: f64| x - 1.0, 0.0, 1.0, 1e-14).unwrap();
        assert!((root - 1.0).abs() < 1e-13);
    }

    #[test]
    fn solve_increasing_matches_bisect() {
        let f = |x: f64| x.exp() - 3.0;
        let fast = solve_increasing(f, 0.0, 2.0, 1e-14).unwrap();
        let slow = bisect(f, 0.0, 2.0, 1e-14).unwrap();
        assert!((fast - 3.0f64.ln()).abs() < 1e-13);
        assert!((fast - slow).abs() < 1e-12);
    }

    #[test]
    fn solve_increasing_tolerates_infinite_lower_value() {
        // ln is -inf at 0; the solver must fall back to bisection steps.
        let root = solve_increasing(|x: f64| x.ln() + 1.0, 0.0, 5.0, 1e-14).unwrap();
        assert!((root - (-1.0f64).exp()).abs() < 1e-14);
    }

    #[test]
    fn solve_increasing_rejects_unbracketed_root() {
        assert!(solve_increasing(|x: f64| x + 10.0, 0.0, 1.0, 1e-12).is_err());
    }
}
