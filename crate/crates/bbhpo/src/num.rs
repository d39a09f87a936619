//! Decimal rendering shared by all file formats.

/// Shortest decimal that parses back to exactly `x`.
///
/// Plain notation in `[1e-5, 1e16)`, exponent notation outside it, `inf`,
/// `-inf` and `nan` for non-finite values.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        return "nan".to_string();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.to_string();
    }
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// Parses a decimal written by [`fmt_f64`] (or any Rust float literal form).
pub fn parse_f64(s: &str) -> Option<f64> {
    s.trim().parse().ok()
}
