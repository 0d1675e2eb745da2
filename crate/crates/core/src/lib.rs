// SPDX-License-Identifier: MIT OR Apache-2.0

pub mod codec;
pub mod data;
pub mod edit;
pub mod error;
pub mod explainers;
pub mod explanation;
pub mod fixed;
pub mod proofs;
pub mod report;
pub mod toy;
pub mod virtues;

pub use error::{Error, Result};
