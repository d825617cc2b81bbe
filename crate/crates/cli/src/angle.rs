//! Angle tokens: literal radians, `pi`, `pi/<k>`, `<j>pi/<k>`, optionally signed.

use std::f64::consts::PI;

pub fn parse_angle(text: &str) -> Result<f64, String> {
    let token: String = text.trim().chars().filter(|c| !c.is_whitespace()).collect();
    if let Ok(value) = token.parse::<f64>() {
        return if value.is_finite() {
            Ok(value)
        } else {
            Err(format!("angle must be finite, got {text:?}"))
        };
    }
    let lowered = token.to_lowercase().replace('π', "pi");
    let (sign, body) = match lowered.strip_prefix('-') {
        Some(rest) => (-1.0, rest),
        None => (1.0, lowered.strip_prefix('+').unwrap_or(&lowered)),
    };
    let (numerator, denominator) = match body.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (body, None),
    };
    let coefficient = numerator
        .strip_suffix("pi")
        .ok_or_else(|| format!("cannot read angle {text:?}; use radians, pi/k or jpi/k"))?
        .trim_end_matches('*');
    let j: u64 = if coefficient.is_empty() {
        1
    } else {
        coefficient
            .parse()
            .map_err(|_| format!("bad multiplier in angle {text:?}"))?
    };
    let k: u64 = match denominator {
        None => 1,
        Some(d) => d
            .parse()
            .map_err(|_| format!("bad divisor in angle {text:?}"))?,
    };
    if k == 0 {
        return Err(format!("zero divisor in angle {text:?}"));
    }
    Ok(sign * j as f64 * PI / k as f64)
}
