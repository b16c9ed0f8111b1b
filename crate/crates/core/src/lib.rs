//! A finite-space laboratory for high-arity PAC learning.
//!
//! Every ground space is finite and every probability is an exact rational, so small
//! instances admit exact distributional oracles while larger ones fall back to seeded
//! Monte Carlo estimates.

pub mod adversaries;
pub mod cli;
pub mod dims;
pub mod families;
pub mod hypotheses;
pub mod index;
pub mod learners;
pub mod losses;
pub mod reductions;
pub mod sampler;
pub mod templates;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;

/// Exact rational used for probabilities and loss values.
pub type Q = BigRational;

pub fn q(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn qi(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"3"`, `"-1/4"` or a finite decimal such as `"0.25"`.
pub fn parse_q(s: &str) -> Result<Q, String> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a.trim().parse().map_err(|_| format!("bad rational {s:?}"))?;
        let d: BigInt = b.trim().parse().map_err(|_| format!("bad rational {s:?}"))?;
        if d == BigInt::from(0) {
            return Err(format!("zero denominator in {s:?}"));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let digits = format!("{int}{frac}");
        let n: BigInt = digits.parse().map_err(|_| format!("bad decimal {s:?}"))?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Q::new(n, d));
    }
    let n: BigInt = s.parse().map_err(|_| format!("bad rational {s:?}"))?;
    Ok(Q::from_integer(n))
}

/// Which family of index sets a sample or hypothesis lives on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Setting {
    NonPartite,
    Partite,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_rationals() {
        assert_eq!(parse_q("1/5").unwrap(), q(1, 5));
        assert_eq!(parse_q("0.25").unwrap(), q(1, 4));
        assert_eq!(parse_q("-2").unwrap(), qi(-2));
        assert!(parse_q("1/0").is_err());
    }
}
