//! Number formatting for CSV output.

/// Formats `x` with 15 significant digits, `%.15g` style: fixed notation for
/// moderate exponents, scientific otherwise, trailing zeros trimmed.
pub fn sig15(x: f64) -> String {
    const DIGITS: i32 = 15;
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let sci = format!("{:.*e}", (DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..DIGITS).contains(&exp) {
        let decimals = (DIGITS - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, x))
    } else {
        format!(
            "{}e{}{:02}",
            trim_zeros(mantissa.to_string()),
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        )
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::sig15;

    #[test]
    fn matches_printf_g() {
        assert_eq!(sig15(0.0), "0");
        assert_eq!(sig15(1.0), "1");
        assert_eq!(sig15(20.0), "20");
        assert_eq!(sig15(-0.5), "-0.5");
        assert_eq!(sig15(std::f64::consts::PI), "3.14159265358979");
        assert_eq!(sig15(1.0 / 3.0), "0.333333333333333");
        assert_eq!(sig15(1.5e-7), "1.5e-07");
        assert_eq!(sig15(2.0e20), "2e+20");
        assert_eq!(sig15(0.000123), "0.000123");
    }
}
