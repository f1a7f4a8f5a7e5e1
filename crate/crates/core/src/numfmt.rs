//! Answer formatting for numeric values.

/// Shortest decimal with at most two fractional digits, ties rounded to even.
///
/// Rounding works on the exact binary value, so `2.675` (stored just below
/// the tie) becomes `2.67` while the true tie `0.125` becomes `0.12`.
pub fn format_number(value: f64) -> String {
    let mut text = format!("{value:.2}");
    if text.contains('.') {
        let trimmed = text.trim_end_matches('0').trim_end_matches('.').len();
        text.truncate(trimmed);
    }
    if text == "-0" {
        text = "0".into();
    }
    text
}

/// Whether `text` looks like output of [`format_number`].
pub fn is_numeral(text: &str) -> bool {
    let body = text.strip_prefix('-').unwrap_or(text);
    let mut parts = body.splitn(2, '.');
    let int = parts.next().unwrap_or_default();
    let frac = parts.next();
    !int.is_empty()
        && int.bytes().all(|b| b.is_ascii_digit())
        && frac.is_none_or(|f| (1..=2).contains(&f.len()) && f.bytes().all(|b| b.is_ascii_digit()))
}
