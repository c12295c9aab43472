//! Exact rational scalars for distances and radius bounds.
//!
//! Distances and radii are never floating point: they are parsed from
//! integer, fraction (`3/2`) or decimal (`1.5`) literals and kept exact.

use num_rational::Ratio;
use num_traits::{Signed, Zero};
use std::fmt;

/// Exact rational scalar. `i128` components leave ample headroom for the
/// constant factors that appear in radius arithmetic.
pub type Rat = Ratio<i128>;

pub fn rat(n: i128) -> Rat {
    Rat::from_integer(n)
}

pub fn ratio(n: i128, d: i128) -> Rat {
    Rat::new(n, d)
}

/// Error produced when a scalar literal cannot be parsed exactly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatParseError(pub String);

impl fmt::Display for RatParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational literal `{}`", self.0)
    }
}

impl std::error::Error for RatParseError {}

/// Parses an integer, fraction or decimal literal into an exact rational.
pub fn parse_rat(text: &str) -> Result<Rat, RatParseError> {
    let s = text.trim();
    let bad = || RatParseError(text.to_string());
    if s.is_empty() {
        return Err(bad());
    }
    let (sign, body) = match s.strip_prefix('-') {
        Some(rest) => (-1i128, rest),
        None => (1i128, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() || body.contains('-') || body.contains('+') {
        return Err(bad());
    }
    if let Some((num, den)) = body.split_once('/') {
        let n: i128 = num.parse().map_err(|_| bad())?;
        let d: i128 = den.parse().map_err(|_| bad())?;
        if d == 0 {
            return Err(bad());
        }
        return Ok(Rat::new(sign * n, d));
    }
    if let Some((int, frac)) = body.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let int_part: i128 = if int.is_empty() { 0 } else { int.parse().map_err(|_| bad())? };
        let scale = 10i128.checked_pow(frac.len() as u32).ok_or_else(bad)?;
        let frac_part: i128 = frac.parse().map_err(|_| bad())?;
        return Ok(Rat::new(sign * (int_part * scale + frac_part), scale));
    }
    let n: i128 = body.parse().map_err(|_| bad())?;
    Ok(Rat::from_integer(sign * n))
}

/// Canonical text form: integers print bare, everything else as `n/d`.
pub fn format_rat(r: &Rat) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Max of two rationals.
pub fn rat_max(a: Rat, b: Rat) -> Rat {
    if a >= b {
        a
    } else {
        b
    }
}

pub fn rat_is_nonneg(r: &Rat) -> bool {
    !r.is_negative() || r.is_zero()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_integer_fraction_decimal() {
        assert_eq!(parse_rat("3").unwrap(), rat(3));
        assert_eq!(parse_rat("-4").unwrap(), rat(-4));
        assert_eq!(parse_rat("3/2").unwrap(), ratio(3, 2));
        assert_eq!(parse_rat("1.5").unwrap(), ratio(3, 2));
        assert_eq!(parse_rat("0.25").unwrap(), ratio(1, 4));
        assert_eq!(parse_rat("-2.50").unwrap(), ratio(-5, 2));
    }

    #[test]
    fn rejects_garbage() {
        for bad in ["", "x", "1.2.3", "1/0", "1.", "--2"] {
            assert!(parse_rat(bad).is_err(), "{bad} should not parse");
        }
    }

    #[test]
    fn canonical_form_roundtrips() {
        for lit in ["7", "-3", "3/2", "22/7"] {
            let r = parse_rat(lit).unwrap();
            assert_eq!(parse_rat(&format_rat(&r)).unwrap(), r);
        }
        assert_eq!(format_rat(&parse_rat("1.5").unwrap()), "3/2");
    }
}
