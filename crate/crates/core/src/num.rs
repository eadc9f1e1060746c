//! Exact rational values extended with a top element.

use alloc::format;
use alloc::string::{String, ToString};
use core::cmp::Ordering;
use core::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

/// Exact rational used for costs, probabilities and values.
pub type Q = num_rational::BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// A value of a program, a strategy or a game: finite and exact, or infinite
/// when a bad state can be reached.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ExtValue {
    Finite(Q),
    Infinite,
}

impl ExtValue {
    pub fn zero() -> Self {
        ExtValue::Finite(Q::zero())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtValue::Finite(_))
    }

    pub fn finite(&self) -> Option<&Q> {
        match self {
            ExtValue::Finite(v) => Some(v),
            ExtValue::Infinite => None,
        }
    }

    /// `p/q` for finite values (denominator always written), `inf` otherwise.
    pub fn to_exact_string(&self) -> String {
        match self {
            ExtValue::Finite(v) => format!("{}/{}", v.numer(), v.denom()),
            ExtValue::Infinite => "inf".to_string(),
        }
    }

    /// Decimal rendering rounded half-to-even at `places` digits.
    pub fn to_decimal_string(&self, places: u32) -> String {
        match self {
            ExtValue::Finite(v) => decimal_half_even(v, places),
            ExtValue::Infinite => "inf".to_string(),
        }
    }

    /// `self <= bound`; infinity is never below a rational bound.
    pub fn le_rational(&self, bound: &Q) -> bool {
        match self {
            ExtValue::Finite(v) => v <= bound,
            ExtValue::Infinite => false,
        }
    }
}

impl From<Q> for ExtValue {
    fn from(v: Q) -> Self {
        ExtValue::Finite(v)
    }
}

impl PartialOrd for ExtValue {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ExtValue {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (ExtValue::Finite(a), ExtValue::Finite(b)) => a.cmp(b),
            (ExtValue::Finite(_), ExtValue::Infinite) => Ordering::Less,
            (ExtValue::Infinite, ExtValue::Finite(_)) => Ordering::Greater,
            (ExtValue::Infinite, ExtValue::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for ExtValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtValue::Finite(v) if v.is_integer() => write!(f, "{}", v.numer()),
            ExtValue::Finite(v) => write!(f, "{}/{}", v.numer(), v.denom()),
            ExtValue::Infinite => f.write_str("inf"),
        }
    }
}

/// Rounds `v` to `places` decimal digits, ties to even.
pub fn decimal_half_even(v: &Q, places: u32) -> String {
    let scale = BigInt::from(10u32).pow(places);
    let scaled = v * Q::from_integer(scale.clone());
    let floor = scaled.floor().to_integer();
    let frac = &scaled - Q::from_integer(floor.clone());
    let half = Q::new(BigInt::one(), BigInt::from(2));
    let rounded = match frac.cmp(&half) {
        Ordering::Less => floor,
        Ordering::Greater => floor + 1,
        Ordering::Equal => {
            if floor.is_even() {
                floor
            } else {
                floor + 1
            }
        }
    };
    let negative = rounded.is_negative();
    let digits = rounded.abs().to_string();
    let places = places as usize;
    let padded = if digits.len() <= places {
        let mut s = String::new();
        for _ in 0..(places + 1 - digits.len()) {
            s.push('0');
        }
        s.push_str(&digits);
        s
    } else {
        digits
    };
    let split = padded.len() - places;
    let sign = if negative { "-" } else { "" };
    if places == 0 {
        format!("{sign}{padded}")
    } else {
        format!("{sign}{}.{}", &padded[..split], &padded[split..])
    }
}

/// Parses `n`, `-n` or `n/d` into an exact rational.
pub fn parse_rational(text: &str) -> Option<Q> {
    let text = text.trim();
    let (n, d) = match text.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (text, "1"),
    };
    let n: BigInt = n.parse().ok()?;
    let d: BigInt = d.parse().ok()?;
    if d.is_zero() {
        return None;
    }
    Some(Q::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn infinity_is_top() {
        assert!(ExtValue::Infinite > ExtValue::Finite(q(1_000_000)));
        assert!(ExtValue::Finite(ratio(1, 3)) < ExtValue::Finite(ratio(1, 2)));
        assert!(!ExtValue::Infinite.le_rational(&q(5)));
    }

    #[test]
    fn half_even_rounding() {
        assert_eq!(decimal_half_even(&ratio(1, 3), 6), "0.333333");
        assert_eq!(decimal_half_even(&ratio(2, 3), 6), "0.666667");
        // 0.0000005 ties to 0.000000, 0.0000015 ties to 0.000002
        assert_eq!(decimal_half_even(&ratio(1, 2_000_000), 6), "0.000000");
        assert_eq!(decimal_half_even(&ratio(3, 2_000_000), 6), "0.000002");
        assert_eq!(decimal_half_even(&q(7), 6), "7.000000");
        assert_eq!(decimal_half_even(&ratio(-5, 4), 1), "-1.2");
    }

    #[test]
    fn exact_strings() {
        assert_eq!(ExtValue::Finite(q(3)).to_exact_string(), "3/1");
        assert_eq!(ExtValue::Finite(ratio(6, 4)).to_exact_string(), "3/2");
        assert_eq!(ExtValue::Infinite.to_exact_string(), "inf");
        assert_eq!(parse_rational("2/4"), Some(ratio(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
    }
}
