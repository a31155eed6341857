//! Fixed-width number formatting shared by every CSV writer.

use crate::scalar::Scalar;

/// Formats a scalar with 17 significant digits in scientific notation, enough
/// to round-trip an `f64` exactly. All file output goes through this so that
/// identical inputs produce byte-identical files.
pub fn sig17<S: Scalar>(x: S) -> String {
    format!("{:.16e}", x.as_f64())
}

/// Formats an optional scalar, rendering `None` as the empty field.
pub fn sig17_opt<S: Scalar>(x: Option<S>) -> String {
    x.map(sig17).unwrap_or_default()
}
