//! Scale arguments: decimals, fractions and multiples of π such as `2pi/21`.

use std::f64::consts::PI;

/// Parses a product/quotient of factors, each a number, `pi`, or a number
/// immediately followed by `pi` (`2pi`, `0.5pi`). A leading `-` negates.
pub fn parse_scalar(text: &str) -> Result<f64, String> {
    let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let s = s.replace('π', "pi");
    let (negate, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.as_str()),
    };
    if body.is_empty() {
        return Err(format!("empty number {text:?}"));
    }
    let mut value = 1.0;
    let mut divide = false;
    let mut start = 0;
    let bytes = body.as_bytes();
    for i in 0..=bytes.len() {
        // An exponent sign belongs to the number, not to an operator.
        if i < bytes.len() && !matches!(bytes[i], b'*' | b'/') {
            continue;
        }
        let f = factor(&body[start..i]).map_err(|e| format!("{e} in {text:?}"))?;
        value = if divide { value / f } else { value * f };
        if i < bytes.len() {
            divide = bytes[i] == b'/';
        }
        start = i + 1;
    }
    if !value.is_finite() {
        return Err(format!("{text:?} is not a finite number"));
    }
    Ok(if negate { -value } else { value })
}

fn factor(token: &str) -> Result<f64, String> {
    if token.is_empty() {
        return Err("missing operand".into());
    }
    match token.strip_suffix("pi") {
        Some("") => Ok(PI),
        Some(coef) => number(coef).map(|c| c * PI),
        None => number(token),
    }
}

fn number(token: &str) -> Result<f64, String> {
    token.parse::<f64>().map_err(|_| format!("bad number {token:?}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbolic_forms() {
        assert_eq!(parse_scalar("2pi/21").unwrap(), 2.0 * PI / 21.0);
        assert_eq!(parse_scalar("1/6").unwrap(), 1.0 / 6.0);
        assert_eq!(parse_scalar("pi").unwrap(), PI);
        assert_eq!(parse_scalar("3*pi/4").unwrap(), 3.0 * PI / 4.0);
        assert_eq!(parse_scalar("0.24").unwrap(), 0.24);
        assert_eq!(parse_scalar("1e-3").unwrap(), 1e-3);
        assert_eq!(parse_scalar("-2π").unwrap(), -2.0 * PI);
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "/3", "2//3", "abc", "1/0", "pi pi"] {
            assert!(parse_scalar(bad).is_err(), "{bad}");
        }
    }
}
