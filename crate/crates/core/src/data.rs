// SPDX-License-Identifier: MIT OR Apache-2.0

//! Observations and datasets.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported input width; keeps the input space enumerable.
pub const MAX_INPUT_WIDTH: usize = 12;

/// A fixed-width bit vector. Bit `i` of the vector is the `i`-th character of
/// its string form, so numeric order of `bits` is lexicographic string order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Input {
    bits: u16,
    width: u8,
}

impl Input {
    pub fn new(bits: u16, width: usize) -> Result<Self> {
        if width > MAX_INPUT_WIDTH {
            return Err(Error::InvalidArgument(format!(
                "input width {width} exceeds {MAX_INPUT_WIDTH}"
            )));
        }
        if width < 16 && (bits as u32) >> width != 0 {
            return Err(Error::InvalidArgument(format!(
                "value {bits} does not fit in {width} bits"
            )));
        }
        Ok(Input {
            bits,
            width: width as u8,
        })
    }

    /// Caller guarantees `bits < 2^width` and `width <= MAX_INPUT_WIDTH`.
    pub(crate) fn from_raw(bits: u32, width: usize) -> Self {
        debug_assert!(width <= MAX_INPUT_WIDTH && bits >> width == 0);
        Input {
            bits: bits as u16,
            width: width as u8,
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits as u32
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    /// Value of bit `i`, counting from the left.
    pub fn bit(&self, i: usize) -> bool {
        debug_assert!(i < self.width());
        (self.bits >> (self.width as usize - 1 - i)) & 1 == 1
    }

    pub fn popcount(&self) -> u32 {
        self.bits.count_ones()
    }

    /// All `2^width` inputs in lexicographic order.
    pub fn enumerate(width: usize) -> impl Iterator<Item = Input> {
        (0..1u32 << width).map(move |b| Input::from_raw(b, width))
    }
}

impl fmt::Display for Input {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.width() {
            f.write_str(if self.bit(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for Input {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() > MAX_INPUT_WIDTH {
            return Err(Error::InvalidArgument(format!(
                "bit string longer than {MAX_INPUT_WIDTH}: {s:?}"
            )));
        }
        let mut bits = 0u16;
        for c in s.chars() {
            let b = match c {
                '0' => 0,
                '1' => 1,
                _ => return Err(Error::InvalidArgument(format!("not a bit string: {s:?}"))),
            };
            bits = (bits << 1) | b;
        }
        Input::new(bits, s.len())
    }
}

impl Serialize for Input {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Input {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One (input, label) pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub input: Input,
    pub output: u16,
}

impl Observation {
    pub fn new(input: Input, output: u16) -> Self {
        Observation { input, output }
    }
}

/// Training and held-out observations plus the generator that produced them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub train: Vec<Observation>,
    pub heldout: Vec<Observation>,
    pub generator_seed: u64,
    pub generator_spec: String,
}
