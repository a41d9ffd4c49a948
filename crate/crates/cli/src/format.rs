//! Number formatting shared by every emitted record.

/// Formats `x` like C's `%.9g`: nine significant digits, trailing zeros
/// removed, scientific notation outside `[1e-4, 1e9)`.
pub fn g9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0".into() } else { "0".into() };
    }
    let sci = format!("{x:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let m = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{m}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// `x` rounded to nine significant digits, so that JSON output carries
/// exactly the digits [`g9`] would print.
pub fn round9(x: f64) -> f64 {
    if x.is_finite() {
        format!("{x:.8e}").parse().expect("round trip")
    } else {
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_printf_g() {
        assert_eq!(g9(3.245731874), "3.24573187");
        assert_eq!(g9(-100.0), "-100");
        assert_eq!(g9(0.5), "0.5");
        assert_eq!(g9(1.0 / 3.0), "0.333333333");
        assert_eq!(g9(1.234e-5), "1.234e-05");
        assert_eq!(g9(0.0001234), "0.0001234");
        assert_eq!(g9(123456789.0), "123456789");
        assert_eq!(g9(1234567890.0), "1.23456789e+09");
        assert_eq!(g9(0.0), "0");
        assert_eq!(g9(9.9999999999), "10");
    }

    #[test]
    fn round9_agrees_with_g9() {
        for x in [3.245731874123, 0.443147180559945, -9.98765432109e-7, 1e300] {
            assert_eq!(g9(round9(x)), g9(x));
            assert_eq!(format!("{}", round9(x)).parse::<f64>().unwrap(), round9(x));
        }
    }
}
