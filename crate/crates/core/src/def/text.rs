//! Scalar payload parsing: numbers, ranges, pairs and percentages.

use super::{CompileError, Mitigation};

fn bad(text: &str) -> CompileError {
    CompileError::BadNumber {
        path: String::new(),
        text: text.to_string(),
    }
}

pub fn parse_number(text: &str) -> Result<f64, CompileError> {
    text.trim()
        .parse::<f64>()
        .ok()
        .filter(|v| v.is_finite())
        .ok_or_else(|| bad(text))
}

fn split_pair(text: &str) -> Result<(f64, f64), CompileError> {
    let t = text.trim();
    // the separator is the first '-' that has something before it
    let idx = t
        .char_indices()
        .skip(1)
        .find(|&(_, c)| c == '-')
        .map(|(i, _)| i)
        .ok_or_else(|| bad(text))?;
    let (a, b) = (&t[..idx], &t[idx + 1..]);
    let a = parse_number(a).map_err(|_| bad(text))?;
    let b = parse_number(b).map_err(|_| bad(text))?;
    if a < 0.0 || b < 0.0 {
        return Err(bad(text));
    }
    Ok((a, b))
}

/// `"3-9"`, `"2 - 5"`, `"4 -9"` or a single `"4"`; the result is ordered so
/// that `min <= max`.
pub fn parse_range_text(text: &str) -> Result<(f64, f64), CompileError> {
    if let Ok(v) = parse_number(text) {
        if v < 0.0 {
            return Err(bad(text));
        }
        return Ok((v, v));
    }
    let (a, b) = split_pair(text)?;
    Ok((a.min(b), a.max(b)))
}

/// Two numbers in written order (`"10-5"` stays `(10, 5)`).
pub fn parse_pair_text(text: &str) -> Result<(f64, f64), CompileError> {
    split_pair(text)
}

/// `"-25%"` -> `Some(-25.0)`; `None` when the text has no percent sign.
pub fn parse_percent(text: &str) -> Result<Option<f64>, CompileError> {
    let t = text.trim();
    match t.strip_suffix('%') {
        Some(num) => {
            let compact: String = num.chars().filter(|c| !c.is_whitespace()).collect();
            parse_number(&compact).map(Some).map_err(|_| bad(text))
        }
        None => Ok(None),
    }
}

/// `"3%"` -> `Percent(3)`, `"4"` -> `Flat(4)`.
pub fn parse_mitigation(text: &str) -> Result<Mitigation, CompileError> {
    let m = match parse_percent(text)? {
        Some(p) => Mitigation::Percent(p),
        None => Mitigation::Flat(parse_number(text)?),
    };
    match m {
        Mitigation::Flat(f) if f < 0.0 => Err(bad(text)),
        Mitigation::Percent(p) if !(0.0..=100.0).contains(&p) => Err(bad(text)),
        m => Ok(m),
    }
}
