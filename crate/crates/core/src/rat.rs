//! Exact rational scalars and their `"p/q"` text form.

use num::bigint::BigInt;
use num::rational::Ratio;
use num::Zero;

use crate::error::{Error, Result};

/// Exact rational scalar used throughout the crate. `Ratio` keeps values
/// reduced with a positive denominator, so `to_string` always yields the
/// lowest-terms form (`"3"`, `"-3/4"`).
pub type Rat = Ratio<BigInt>;

/// Shorthand for small rationals in tests and fixtures.
pub fn rat(numer: i64, denom: i64) -> Rat {
    Rat::new(BigInt::from(numer), BigInt::from(denom))
}

/// Shorthand for small integers as rationals.
pub fn int(n: i64) -> Rat {
    Rat::from_integer(BigInt::from(n))
}

/// Parse `"p"` or `"p/q"`. The sign belongs to the numerator; the
/// denominator must be a positive integer. `context` names the field being
/// parsed so error messages carry a path.
pub fn parse_rat(text: &str, context: &str) -> Result<Rat> {
    let fail = |reason: &str| Error::InvalidRational {
        text: text.to_owned(),
        context: context.to_owned(),
        reason: reason.to_owned(),
    };
    let trimmed = text.trim();
    let (numer_str, denom_str) = match trimmed.split_once('/') {
        Some((n, d)) => (n, Some(d)),
        None => (trimmed, None),
    };
    let numer: BigInt = numer_str
        .parse()
        .map_err(|_| fail("numerator is not an integer"))?;
    let denom: BigInt = match denom_str {
        Some(d) => {
            if !d.chars().all(|c| c.is_ascii_digit()) || d.is_empty() {
                return Err(fail("denominator must be an unsigned integer"));
            }
            d.parse().map_err(|_| fail("denominator is not an integer"))?
        }
        None => BigInt::from(1),
    };
    if denom.is_zero() {
        return Err(fail("denominator is zero"));
    }
    Ok(Rat::new(numer, denom))
}
