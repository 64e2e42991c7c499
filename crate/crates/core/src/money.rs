//! Fixed-point currency.
//!
//! Every balance in the simulator is an integer number of cents. Real-valued
//! rates and prices are applied through [`Cents::scale`], which rounds half to
//! even so that conservation checks can be exact.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

#[derive(
    Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct Cents(pub i64);

impl Cents {
    pub const ZERO: Cents = Cents(0);

    /// Converts a currency amount (e.g. pounds) to cents, rounding half to even.
    pub fn from_currency(amount: f64) -> Cents {
        Cents(round_half_even(amount * 100.0))
    }

    pub fn as_currency(self) -> f64 {
        self.0 as f64 / 100.0
    }

    pub fn as_f64(self) -> f64 {
        self.0 as f64
    }

    /// `self × factor`, rounded half to even.
    pub fn scale(self, factor: f64) -> Cents {
        if factor == 0.0 || self.0 == 0 {
            return Cents::ZERO;
        }
        Cents(round_half_even(self.0 as f64 * factor))
    }

    pub fn max(self, other: Cents) -> Cents {
        Cents(self.0.max(other.0))
    }

    pub fn min(self, other: Cents) -> Cents {
        Cents(self.0.min(other.0))
    }

    pub fn is_negative(self) -> bool {
        self.0 < 0
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }
}

/// Rounds a real number of cents to the nearest integer, ties to even.
pub fn round_half_even(x: f64) -> i64 {
    debug_assert!(x.is_finite(), "non-finite monetary amount {x}");
    x.round_ties_even() as i64
}

/// Splits `total` into integer parts proportional to non-negative `weights`.
///
/// Uses cumulative flooring so the parts sum to `total` exactly and the
/// result depends only on the order of `weights`. Returns `None` when every
/// weight is zero.
pub fn split_proportional(total: Cents, weights: &[u128]) -> Option<Vec<Cents>> {
    let sum: u128 = weights.iter().sum();
    if sum == 0 {
        return None;
    }
    let total_abs = total.0.unsigned_abs() as u128;
    let sign = if total.0 < 0 { -1 } else { 1 };
    let mut out = Vec::with_capacity(weights.len());
    let mut cum: u128 = 0;
    let mut prev: u128 = 0;
    for &w in weights {
        cum += w;
        let upto = mul_div_floor(total_abs, cum, sum);
        out.push(Cents(sign * (upto - prev) as i64));
        prev = upto;
    }
    Some(out)
}

/// floor(a × b / c) without overflow for the magnitudes used here.
fn mul_div_floor(a: u128, b: u128, c: u128) -> u128 {
    match a.checked_mul(b) {
        Some(p) => p / c,
        None => {
            let q = a / c;
            let r = a % c;
            q * b + r * b / c
        }
    }
}

/// Converts a non-negative real weight into an integer weight for
/// [`split_proportional`], keeping nine significant decimal places.
pub fn weight_key(x: f64) -> u128 {
    if x.is_finite() && x > 0.0 {
        (x * 1e9).round() as u128
    } else {
        0
    }
}

impl Add for Cents {
    type Output = Cents;
    fn add(self, rhs: Cents) -> Cents {
        Cents(self.0 + rhs.0)
    }
}

impl Sub for Cents {
    type Output = Cents;
    fn sub(self, rhs: Cents) -> Cents {
        Cents(self.0 - rhs.0)
    }
}

impl Neg for Cents {
    type Output = Cents;
    fn neg(self) -> Cents {
        Cents(-self.0)
    }
}

impl AddAssign for Cents {
    fn add_assign(&mut self, rhs: Cents) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Cents {
    fn sub_assign(&mut self, rhs: Cents) {
        self.0 -= rhs.0;
    }
}

impl Sum for Cents {
    fn sum<I: Iterator<Item = Cents>>(iter: I) -> Cents {
        Cents(iter.map(|c| c.0).sum())
    }
}

impl fmt::Display for Cents {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.0 < 0 { "-" } else { "" };
        let abs = self.0.unsigned_abs();
        write!(f, "{sign}{}.{:02}", abs / 100, abs % 100)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn half_even_rounding() {
        assert_eq!(round_half_even(2.5), 2);
        assert_eq!(round_half_even(3.5), 4);
        assert_eq!(round_half_even(-2.5), -2);
        assert_eq!(Cents(250).scale(0.01), Cents(2));
        assert_eq!(Cents(350).scale(0.01), Cents(4));
    }

    #[test]
    fn currency_conversion() {
        assert_eq!(Cents::from_currency(100.0), Cents(10_000));
        assert_eq!(Cents(-12_345).to_string(), "-123.45");
    }

    #[test]
    fn split_all_zero_weights() {
        assert!(split_proportional(Cents(10), &[0, 0]).is_none());
    }

    #[test]
    fn split_small_case() {
        let parts = split_proportional(Cents(10), &[1, 1, 1]).unwrap();
        assert_eq!(parts, vec![Cents(3), Cents(3), Cents(4)]);
        let neg = split_proportional(Cents(-10), &[1, 1, 1]).unwrap();
        assert_eq!(neg.iter().copied().sum::<Cents>(), Cents(-10));
    }

    proptest! {
        #[test]
        fn split_is_exact(total in -1_000_000_000i64..1_000_000_000, weights in proptest::collection::vec(0u128..1_000_000, 1..50)) {
            prop_assume!(weights.iter().any(|&w| w > 0));
            let parts = split_proportional(Cents(total), &weights).unwrap();
            prop_assert_eq!(parts.iter().copied().sum::<Cents>(), Cents(total));
            for (p, w) in parts.iter().zip(&weights) {
                if *w == 0 { prop_assert_eq!(*p, Cents::ZERO); }
            }
        }
    }
}
