//! Output formatting helpers.

/// Units banner printed at the top of every rate-bearing report.
pub const UNITS_HEADER: &str = "bits/channel use, log base 2";

/// A float with 17 significant digits, enough to reparse exactly.
pub fn f17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Residual in compact scientific notation.
pub fn res(x: f64) -> String {
    format!("{x:.3e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn f17_round_trips() {
        for &x in &[0.1, 1.0 / 3.0, 2.0_f64.sqrt(), 1.4534452978042593e0, 0.0] {
            let back: f64 = f17(x).parse().unwrap();
            assert_eq!(back.to_bits(), x.to_bits());
        }
    }
}
