//! Scalar abstraction for the numeric code outside the codec.

use std::fmt::{Debug, Display};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, used for literals.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in scalar type")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Exact rational value of a finite `f64`, if it fits in `i128` terms.
pub fn exact_ratio(v: f64) -> Option<num_rational::Ratio<i128>> {
    if !v.is_finite() {
        return None;
    }
    let (mantissa, exponent, sign) = num_traits::Float::integer_decode(v);
    if mantissa == 0 {
        return Some(num_rational::Ratio::from_integer(0));
    }
    let m = sign as i128 * mantissa as i128;
    if exponent >= 0 {
        let shift = u32::try_from(exponent).ok()?;
        m.checked_mul(2i128.checked_pow(shift)?)
            .map(num_rational::Ratio::from_integer)
    } else {
        let shift = u32::try_from(-exponent).ok()?;
        Some(num_rational::Ratio::new(m, 2i128.checked_pow(shift)?))
    }
}
