//! Small CSV helpers shared by the parsing and report modules.
//!
//! Every format in this crate is plain comma-separated text without quoting,
//! so fields must not contain commas or line breaks.

/// Iterates the data lines of a CSV document, skipping the header.
/// Yields (1-based line number, line). Blank lines are ignored.
pub(crate) fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line))
        .skip(1)
        .filter(|(_, line)| !line.trim().is_empty())
}

/// Checks that the first line equals the expected header.
pub(crate) fn expect_header(text: &str, want: &str) -> Result<(), String> {
    match text.lines().next() {
        Some(found) if found == want => Ok(()),
        Some(found) => Err(format!("expected header `{want}`, found `{found}`")),
        None => Err(format!("empty file, expected header `{want}`")),
    }
}

/// Formats a value with ten significant decimal digits in plain notation.
/// Zero prints as `0`.
pub(crate) fn format_sig10(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_string();
    }
    let decimals = (9 - x.abs().log10().floor() as i32).max(0) as usize;
    format!("{x:.decimals$}")
}
