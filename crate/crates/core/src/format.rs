/// Format with 12 significant digits, shortest form (trailing zeros trimmed).
pub fn sig12(x: f64) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&exp) {
        let s = format!("{x:.11e}");
        let (mant, e) = s.split_once('e').unwrap();
        return format!("{}e{e}", trim(mant));
    }
    let decimals = (11 - exp).max(0) as usize;
    trim(&format!("{x:.decimals$}")).to_string()
}

fn trim(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

#[cfg(test)]
mod tests {
    use super::sig12;

    #[test]
    fn twelve_digits() {
        assert_eq!(sig12(0.291089), "0.291089");
        assert_eq!(sig12(std::f64::consts::PI), "3.14159265359");
        assert_eq!(sig12(-1.0), "-1");
        assert_eq!(sig12(1.5e-9), "1.5e-9");
        assert_eq!(sig12(123456.0), "123456");
        assert_eq!(sig12(0.0), "0");
    }
}
