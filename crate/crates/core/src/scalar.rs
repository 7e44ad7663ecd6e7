//! Scalar abstraction shared by every real-valued quantity in the crate.
//!
//! Counts are always kept as integers; a [`Scalar`] is what those counts are
//! divided into when a probability, an error or a bound is needed. The same
//! code path runs on `f32`/`f64` for speed and on exact rationals when a
//! comparison has to be decided without rounding.

use std::fmt::{Debug, Display};

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Float, Num, Signed, ToPrimitive};

/// A field-like number type usable for measures, couplings and error bounds.
pub trait Scalar:
    Num + Signed + Clone + PartialOrd + Debug + Display + Send + Sync + 'static
{
    /// `num / den`; `den` must be positive.
    fn from_ratio(num: i128, den: i128) -> Self;

    /// Best representation of `x`; `None` when `x` is not finite.
    fn from_f64(x: f64) -> Option<Self>;

    fn to_f64(&self) -> f64;

    /// Nearest integer to `self * n`, ties broken downward.
    fn nearest_count(&self, n: u64) -> i128;

    /// Slack allowed when comparing a sum of `terms` values against a target.
    /// Zero for exact types.
    fn sum_tolerance(terms: usize) -> Self;

    /// `true` for exact arithmetic.
    const EXACT: bool;

    fn from_count(count: u64, denom: u64) -> Self {
        Self::from_ratio(count as i128, denom as i128)
    }

    fn from_usize(x: usize) -> Self {
        Self::from_ratio(x as i128, 1)
    }

    /// `|self - other| <= sum_tolerance(terms)`.
    fn close_to(&self, other: &Self, terms: usize) -> bool {
        (self.clone() - other.clone()).abs() <= Self::sum_tolerance(terms)
    }
}

fn float_nearest<F: Float>(x: F, n: u64) -> i128 {
    let y = x * F::from(n).unwrap();
    let f = y.floor();
    let half = F::from(0.5).unwrap();
    let r = if y - f > half { f + F::one() } else { f };
    r.to_i128().unwrap_or(0)
}

macro_rules! impl_float_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            const EXACT: bool = false;

            fn from_ratio(num: i128, den: i128) -> Self {
                ((num as f64) / (den as f64)) as $t
            }

            fn from_f64(x: f64) -> Option<Self> {
                x.is_finite().then_some(x as $t)
            }

            fn to_f64(&self) -> f64 {
                *self as f64
            }

            fn nearest_count(&self, n: u64) -> i128 {
                float_nearest(*self, n)
            }

            fn sum_tolerance(terms: usize) -> Self {
                4.0 * <$t>::EPSILON * (terms.max(1) as $t)
            }
        }
    };
}

impl_float_scalar!(f32);
impl_float_scalar!(f64);

macro_rules! impl_ratio_scalar {
    ($int:ty) => {
        impl Scalar for Ratio<$int> {
            const EXACT: bool = true;

            fn from_ratio(num: i128, den: i128) -> Self {
                Ratio::new(num as $int, den as $int)
            }

            fn from_f64(x: f64) -> Option<Self> {
                Ratio::<$int>::approximate_float(x)
            }

            fn to_f64(&self) -> f64 {
                self.numer().to_f64().unwrap_or(f64::NAN) / self.denom().to_f64().unwrap_or(f64::NAN)
            }

            fn nearest_count(&self, n: u64) -> i128 {
                let y = self.clone() * Ratio::from_integer(n as $int);
                let (q, r) = y.numer().div_mod_floor(y.denom());
                // r / denom > 1/2  <=>  2r > denom
                if 2 * r > *y.denom() {
                    q as i128 + 1
                } else {
                    q as i128
                }
            }

            fn sum_tolerance(_terms: usize) -> Self {
                Ratio::from_integer(0)
            }
        }
    };
}

impl_ratio_scalar!(i64);
impl_ratio_scalar!(i128);

/// `max |p_i - q_i|` over equal-length slices; `None` on a length mismatch.
pub fn max_abs_diff<S: Scalar>(p: &[S], q: &[S]) -> Option<S> {
    if p.len() != q.len() {
        return None;
    }
    let mut best = S::zero();
    for (a, b) in p.iter().zip(q) {
        let d = (a.clone() - b.clone()).abs();
        if d > best {
            best = d;
        }
    }
    Some(best)
}
