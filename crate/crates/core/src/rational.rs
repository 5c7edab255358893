//! Exact rational scalars and their text form.
//!
//! All artifact formats write a rational as `num/den` in lowest terms with
//! den > 0, or as a bare integer when den == 1. Parsing additionally accepts
//! plain decimal literals (`0.25`) so hand-written configs stay readable.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::str::FromStr;

use crate::error::{Error, Result};

/// Exact rational used everywhere a computation may leave the integers.
pub type Rat = BigRational;

/// Build a rational from an integer pair.
pub fn rat(num: i64, den: i64) -> Rat {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Build a rational from an integer.
pub fn rat_int(n: i64) -> Rat {
    BigRational::from_integer(BigInt::from(n))
}

/// Render in the canonical artifact form: `num/den`, or `num` when den == 1.
pub fn format_rat(x: &Rat) -> String {
    if x.denom().is_one() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

/// Parse `num/den`, a bare integer, or a decimal literal.
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    if s.is_empty() {
        return Err(Error::domain("empty rational token"));
    }
    if let Some((num, den)) = s.split_once('/') {
        let n = BigInt::from_str(num.trim())
            .map_err(|e| Error::domain(format!("bad numerator {num:?}: {e}")))?;
        let d = BigInt::from_str(den.trim())
            .map_err(|e| Error::domain(format!("bad denominator {den:?}: {e}")))?;
        if d.is_zero() {
            return Err(Error::domain("zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if int_part.is_empty() || int_part == "-" {
            return Err(Error::domain(format!("bad decimal {s:?}")));
        }
        let negative = int_part.trim_start().starts_with('-');
        let i = BigInt::from_str(int_part)
            .map_err(|e| Error::domain(format!("bad decimal {s:?}: {e}")))?;
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::domain(format!("bad decimal {s:?}")));
        }
        let f = BigInt::from_str(frac_part)
            .map_err(|e| Error::domain(format!("bad decimal {s:?}: {e}")))?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        let frac = BigRational::new(f, scale);
        let whole = BigRational::from_integer(i.abs());
        let mag = whole + frac;
        return Ok(if negative { -mag } else { mag });
    }
    let n =
        BigInt::from_str(s).map_err(|e| Error::domain(format!("bad rational {s:?}: {e}")))?;
    Ok(BigRational::from_integer(n))
}

/// Approximate as f64; good enough for report-level display and slope fits.
pub fn rat_to_f64(x: &Rat) -> f64 {
    let num = x.numer();
    let den = x.denom();
    // Scale down in tandem so huge exact values still land on a finite float.
    let nb = num.bits().max(den.bits());
    if nb <= 52 {
        let n: f64 = num.to_string().parse().unwrap_or(f64::NAN);
        let d: f64 = den.to_string().parse().unwrap_or(f64::NAN);
        n / d
    } else {
        let shift = (nb - 52) as u32;
        let n = num >> shift;
        let d = den >> shift;
        let n: f64 = n.to_string().parse().unwrap_or(f64::NAN);
        let d: f64 = d.to_string().parse().unwrap_or(f64::NAN);
        n / d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_integer() {
        let x = rat_int(-42);
        assert_eq!(format_rat(&x), "-42");
        assert_eq!(parse_rat("-42").unwrap(), x);
    }

    #[test]
    fn round_trip_fraction() {
        let x = rat(-3, 12);
        assert_eq!(format_rat(&x), "-1/4");
        assert_eq!(parse_rat("-1/4").unwrap(), x);
        assert_eq!(parse_rat(" 6 / -24 ").unwrap(), x);
    }

    #[test]
    fn decimal_literals() {
        assert_eq!(parse_rat("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rat("-1.5").unwrap(), rat(-3, 2));
        assert_eq!(parse_rat("2.").is_err(), true);
        assert_eq!(parse_rat(".5").is_err(), true);
        assert_eq!(parse_rat("-0.125").unwrap(), rat(-1, 8));
    }

    #[test]
    fn reject_zero_denominator() {
        assert!(parse_rat("1/0").is_err());
    }

    #[test]
    fn f64_of_large_ratio() {
        let big = BigInt::from(3u8) << 200u32;
        let x = BigRational::new(big.clone(), &big >> 1u32);
        assert!((rat_to_f64(&x) - 2.0).abs() < 1e-12);
    }
}
