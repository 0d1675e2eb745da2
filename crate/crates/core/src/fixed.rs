// SPDX-License-Identifier: MIT OR Apache-2.0

//! Fixed-point helpers.
//!
//! Activations are Q8.24 values carried in `i64`; model parameters are Q8.8
//! values stored as `i16`. A product of an activation and a parameter is
//! Q16.32 and is brought back to Q8.24 with a right shift of
//! [`PARAM_FRAC_BITS`].

use serde::{Deserialize, Serialize};

/// Fractional bits of an activation.
pub const ACT_FRAC_BITS: u32 = 24;
/// Fractional bits of a stored parameter.
pub const PARAM_FRAC_BITS: u32 = 8;
/// 1.0 in activation units.
pub const ACT_ONE: i64 = 1 << ACT_FRAC_BITS;
/// 1.0 in parameter units.
pub const PARAM_ONE: i64 = 1 << PARAM_FRAC_BITS;
/// Exclusive magnitude bound for a Q8.24 value held in 32 bits.
pub const ACT_LIMIT: i64 = 128 << ACT_FRAC_BITS;

/// Floor division by `2^shift`.
#[inline]
pub fn shr_floor(x: i64, shift: u32) -> i64 {
    x >> shift
}

/// Ceiling division by `2^shift`.
#[inline]
pub fn shr_ceil(x: i64, shift: u32) -> i64 {
    -((-x) >> shift)
}

/// Converts a Q8.8 parameter to activation units.
#[inline]
pub fn param_to_act(p: i16) -> i64 {
    (p as i64) << (ACT_FRAC_BITS - PARAM_FRAC_BITS)
}

/// Rounds a Q8.24 activation down onto the Q8.8 grid.
#[inline]
pub fn act_to_q88(a: i64) -> i32 {
    shr_floor(a, ACT_FRAC_BITS - PARAM_FRAC_BITS) as i32
}

/// Rounds an `f64` to the nearest Q8.8 value, saturating at the `i16` range.
pub fn f64_to_q88(x: f64) -> i16 {
    let scaled = (x * PARAM_ONE as f64).round();
    scaled.clamp(i16::MIN as f64, i16::MAX as f64) as i16
}

pub fn q88_to_f64(p: i32) -> f64 {
    p as f64 / PARAM_ONE as f64
}

pub fn act_to_f64(a: i64) -> f64 {
    a as f64 / ACT_ONE as f64
}

/// Closed interval of Q8.24 values.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: i64,
    pub hi: i64,
}

impl Interval {
    pub fn new(lo: i64, hi: i64) -> Self {
        debug_assert!(lo <= hi);
        Interval { lo, hi }
    }

    pub fn point(x: i64) -> Self {
        Interval { lo: x, hi: x }
    }

    pub fn is_point(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, x: i64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn relu(self) -> Self {
        Interval {
            lo: self.lo.max(0),
            hi: self.hi.max(0),
        }
    }

    /// Bounds of `self * w` before the parameter shift (Q16.32 units).
    #[inline]
    pub fn scale_raw(self, w: i16) -> (i64, i64) {
        let w = w as i64;
        if w >= 0 {
            (self.lo * w, self.hi * w)
        } else {
            (self.hi * w, self.lo * w)
        }
    }

    pub fn magnitude(&self) -> i64 {
        self.lo.abs().max(self.hi.abs())
    }
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax_lowest<T: PartialOrd + Copy>(values: &[T]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shifts_round_in_the_right_direction() {
        assert_eq!(shr_floor(-3, 1), -2);
        assert_eq!(shr_ceil(-3, 1), -1);
        assert_eq!(shr_floor(3, 1), 1);
        assert_eq!(shr_ceil(3, 1), 2);
        assert_eq!(shr_ceil(4, 1), 2);
    }

    #[test]
    fn scale_raw_orders_endpoints() {
        let iv = Interval::new(-ACT_ONE, 2 * ACT_ONE);
        let (lo, hi) = iv.scale_raw(-256);
        assert!(lo <= hi);
        assert_eq!(lo, -2 * ACT_ONE * 256);
        assert_eq!(hi, ACT_ONE * 256);
    }

    #[test]
    fn argmax_prefers_lowest_index() {
        assert_eq!(argmax_lowest(&[0i64, 0, 0]), 0);
        assert_eq!(argmax_lowest(&[1i64, 3, 3]), 1);
    }
}
