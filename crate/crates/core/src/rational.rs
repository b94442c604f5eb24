//! Exact rational arithmetic used for distances, costs and objectives.

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rational = Ratio<i128>;

pub fn int(v: i64) -> Rational {
    Rational::from_integer(v as i128)
}

pub fn frac(n: i64, d: i64) -> Rational {
    Rational::new(n as i128, d as i128)
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"12"`, `"-0.375"`, `"1.5e-3"` or `"7/3"` exactly.
pub fn parse(s: &str) -> Result<Rational> {
    let bad = || Error::SchemaViolation {
        location: format!("\"{s}\""),
        message: "not a decimal or p/q rational".into(),
    };
    let s = s.trim();
    if let Some((p, q)) = s.split_once('/') {
        let p: i128 = p.trim().parse().map_err(|_| bad())?;
        let q: i128 = q.trim().parse().map_err(|_| bad())?;
        if q == 0 {
            return Err(bad());
        }
        return Ok(Rational::new(p, q));
    }
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (whole, fraction) = digits.split_once('.').unwrap_or((digits, ""));
    if whole.is_empty() && fraction.is_empty() {
        return Err(bad());
    }
    if !whole.chars().chain(fraction.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let scale = fraction.len() as i32 - exp;
    let num: i128 = format!("{whole}{fraction}").parse().map_err(|_| bad())?;
    let num = if neg { -num } else { num };
    let pow = |e: i32| -> Result<i128> { 10i128.checked_pow(e as u32).ok_or_else(bad) };
    Ok(if scale >= 0 {
        Rational::new(num, pow(scale)?)
    } else {
        Rational::from_integer(num.checked_mul(pow(-scale)?).ok_or_else(bad)?)
    })
}

/// Formats as a terminating decimal when possible, else as `p/q`.
pub fn format(r: &Rational) -> String {
    let mut den = *r.denom();
    let mut twos = 0u32;
    let mut fives = 0u32;
    while den.is_even() {
        den /= 2;
        twos += 1;
    }
    while den % 5 == 0 {
        den /= 5;
        fives += 1;
    }
    if den != 1 {
        return format!("{}/{}", r.numer(), r.denom());
    }
    let digits = twos.max(fives);
    if digits == 0 {
        return r.numer().to_string();
    }
    let Some(scale) = 10i128.checked_pow(digits) else {
        return format!("{}/{}", r.numer(), r.denom());
    };
    let Some(scaled) = r.numer().checked_mul(scale / r.denom()) else {
        return format!("{}/{}", r.numer(), r.denom());
    };
    let sign = if scaled.is_negative() { "-" } else { "" };
    let abs = scaled.abs();
    let whole = abs / scale;
    let part = abs % scale;
    let part = format!("{:0width$}", part, width = digits as usize);
    let part = part.trim_end_matches('0');
    if part.is_empty() {
        format!("{sign}{whole}")
    } else {
        format!("{sign}{whole}.{part}")
    }
}

/// Nearest rational on the grid `1/den`.
pub fn from_f64_grid(x: f64, den: i64) -> Rational {
    Rational::new((x * den as f64).round() as i128, den as i128)
}

pub fn sum<'a>(it: impl IntoIterator<Item = &'a Rational>) -> Rational {
    it.into_iter().fold(Rational::zero(), |acc, x| acc + x)
}
