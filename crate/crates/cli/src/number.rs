//! Full-precision and rounded renderings of reported numbers.

/// 17 significant digits.
pub fn full(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..16).contains(&e) {
        format!("{:.*}", (16 - e) as usize, x)
    } else {
        format!("{x:.16e}")
    }
}

/// Six significant digits.
pub fn rounded(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let e = x.abs().log10().floor() as i32;
    if (-5..6).contains(&e) {
        format!("{:.*}", (5 - e) as usize, x)
    } else {
        format!("{x:.5e}")
    }
}

/// `name<TAB>full<TAB>rounded`.
pub fn line(name: &str, x: f64) -> String {
    format!("{name}\t{}\t{}\n", full(x), rounded(x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn digits() {
        assert_eq!(full(0.5), "0.50000000000000000");
        assert_eq!(rounded(0.998723968), "0.998724");
        assert_eq!(full(1.0 / 3.0).parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(full(123.0), "123.00000000000000");
        assert_eq!(rounded(1e-9), "1.00000e-9");
        for x in [std::f64::consts::PI, 1e-3 / 7.0, 12345.678, 2e20] {
            assert_eq!(full(x).parse::<f64>().unwrap(), x);
        }
    }
}
