//! Number formatting for reports.

use serde_json::Value;

/// Rounds to `digits` significant digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() || digits == 0 {
        return x;
    }
    format!("{:.*e}", digits - 1, x).parse().unwrap_or(x)
}

/// Parenthesis notation with the uncertainty rounded to one significant
/// digit: `format_uncertain(0.9096, 0.021) == "0.91(2)"`.
pub fn format_uncertain(value: f64, sigma: f64) -> String {
    if !(sigma.is_finite() && sigma > 0.0 && value.is_finite()) {
        return format!("{}", round_sig(value, 6));
    }
    let mut exp = sigma.log10().floor() as i32;
    let mut lead = (sigma / 10f64.powi(exp)).round() as i64;
    if lead >= 10 {
        exp += 1;
        lead = 1;
    }
    if exp >= 0 {
        let unit = 10f64.powi(exp);
        let v = (value / unit).round() * unit;
        format!("{v:.0}({})", lead * 10i64.pow(exp as u32))
    } else {
        let decimals = (-exp) as usize;
        format!("{value:.decimals$}({lead})")
    }
}

/// Rounds every float in a JSON tree to `digits` significant digits.
/// Integers are left alone.
pub fn round_json(value: &mut Value, digits: usize) {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = n.as_f64().expect("f64 number");
            if let Some(r) = serde_json::Number::from_f64(round_sig(x, digits)) {
                *n = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(|v| round_json(v, digits)),
        Value::Object(map) => map.values_mut().for_each(|v| round_json(v, digits)),
        _ => {}
    }
}
