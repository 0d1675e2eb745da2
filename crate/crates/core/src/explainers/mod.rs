// SPDX-License-Identifier: MIT OR Apache-2.0

//! The five explanation families and their fitting procedures.

pub mod circuit;
pub mod clustering;
pub mod dictionary;
pub mod mixture;
pub mod straightforward;

pub use circuit::{discover_circuit, fcm_scores, Ablation, Ablator, Circuit, FcmOptions, FcmScores};
pub use clustering::{fit_clustering, Clustering, ClusteringOptions, Space, TieRule};
pub use dictionary::{fit_dictionary, CodeEntry, Dictionary, DictionaryOptions};
pub use mixture::{candidate_programs, fit_mixture, Hypothesis, Mixture, Program};
pub use straightforward::Straightforward;
