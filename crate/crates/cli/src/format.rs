//! Fixed-width numeric formatting for CSV output.

/// Decimal notation with nine significant digits, e.g. `0.0216190000`.
pub fn sig9(x: f64) -> String {
    if !x.is_finite() {
        return "undefined".to_string();
    }
    if x == 0.0 {
        return format!("{:.8}", 0.0);
    }
    let mut decimals = (8 - x.abs().log10().floor() as i64).max(0) as usize;
    let s = format!("{x:.decimals$}");
    // rounding may carry into a new leading digit (9.999999999 -> 10.0000000)
    let digits = s.chars().filter(|c| c.is_ascii_digit()).skip_while(|&c| c == '0').count();
    if digits > 9 && decimals > 0 {
        decimals -= 1;
        return format!("{x:.decimals$}");
    }
    s
}

pub fn opt(x: Option<f64>) -> String {
    x.map(sig9).unwrap_or_else(|| "undefined".to_string())
}
