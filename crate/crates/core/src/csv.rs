//! Number formatting shared by every CSV writer.

/// Formats `x` in plain decimal with nine significant digits.
pub fn sig9(x: f64) -> String {
    sig(x, 9)
}

pub fn sig(x: f64, digits: i32) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return format!("{:.*}", (digits - 1).max(0) as usize, 0.0);
    }
    let magnitude = x.abs().log10().floor() as i32;
    let precision = (digits - 1 - magnitude).max(0) as usize;
    let text = format!("{:.*}", precision, x);
    // rounding can carry into a new leading digit (9.9999999996 -> 10.0000000)
    let rounded: f64 = text.parse().unwrap_or(x);
    if precision > 0 && (rounded.abs().log10().floor() as i32) > magnitude {
        format!("{:.*}", precision - 1, x)
    } else {
        text
    }
}
