// SPDX-License-Identifier: MIT OR Apache-2.0

//! The explanation abstraction shared by all families.
//!
//! An explanation is a probabilistic surrogate: for every input it gives a
//! categorical distribution over labels. It also has a code under a
//! [`BackgroundTheory`], which is where conciseness, the prior, and the edit
//! neighborhood come from.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::codec::{
    fields_to_symbols, BackgroundTheory, BitReader, BitString, Field, FieldSource, Symbol, SymbolReader, Tag,
};
use crate::data::{Input, Observation};
use crate::edit::{apply_ops, EditOp};
use crate::error::{Error, Result};
use crate::explainers::{Circuit, Clustering, Dictionary, Mixture, Straightforward};
use crate::toy::ToyNet;

/// Probability mass moved off a deterministic prediction so that every label
/// has a finite log-likelihood.
pub const SMOOTHING_EPS: f64 = 1.0 / (1u64 << 40) as f64;

pub const BLOB_MAGIC: &[u8; 4] = b"XVB1";

/// Spreads [`SMOOTHING_EPS`] of mass over the labels a distribution puts
/// weight on, proportionally to the missing mass of each label.
pub fn smooth(p: &mut [f64]) {
    let l = p.len();
    if l < 2 {
        return;
    }
    let spread = SMOOTHING_EPS / (l - 1) as f64;
    for v in p.iter_mut() {
        *v = (1.0 - SMOOTHING_EPS) * *v + spread * (1.0 - *v);
    }
}

/// Point mass on `label`, smoothed.
pub fn smoothed_point_mass(label: usize, labels: usize) -> Vec<f64> {
    let mut p = vec![0.0; labels];
    p[label] = 1.0;
    smooth(&mut p);
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Clustering,
    Dictionary,
    Circuit,
    Mixture,
    Straightforward,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Clustering,
        Family::Dictionary,
        Family::Circuit,
        Family::Mixture,
        Family::Straightforward,
    ];

    pub fn tag(self) -> Tag {
        match self {
            Family::Clustering => Tag::FamilyClustering,
            Family::Dictionary => Tag::FamilyDictionary,
            Family::Circuit => Tag::FamilyCircuit,
            Family::Mixture => Tag::FamilyMixture,
            Family::Straightforward => Tag::FamilyStraightforward,
        }
    }

    pub fn from_tag(tag: Tag) -> Option<Family> {
        Family::ALL.into_iter().find(|f| f.tag() == tag)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Family::Clustering => "clustering",
            Family::Dictionary => "dictionary",
            Family::Circuit => "circuit",
            Family::Mixture => "mixture",
            Family::Straightforward => "straightforward",
        }
    }

    /// Whether the joint likelihood is the product of per-point likelihoods.
    pub fn is_factorized(self) -> bool {
        self != Family::Mixture
    }

    /// Symbols an edit may insert or substitute: the family's own tags plus
    /// the sixteen digits.
    pub fn alphabet(self) -> Vec<Symbol> {
        let tags: &[Tag] = match self {
            Family::Clustering => &[
                Tag::FamilyClustering,
                Tag::SpaceInput,
                Tag::SpaceLayer,
                Tag::TieLowest,
                Tag::TieNone,
            ],
            Family::Dictionary => &[Tag::FamilyDictionary],
            Family::Circuit => &[Tag::FamilyCircuit, Tag::AblateZero, Tag::AblateMean],
            Family::Mixture => &[
                Tag::FamilyMixture,
                Tag::ProgConst,
                Tag::ProgParity,
                Tag::ProgMajority,
                Tag::ProgModadd7,
                Tag::ProgBit,
            ],
            Family::Straightforward => &[Tag::FamilyStraightforward, Tag::ActRelu, Tag::ActIdentity],
        };
        tags.iter().map(|&t| Symbol::Tag(t)).chain(Symbol::digits()).collect()
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Family::ALL
            .into_iter()
            .find(|f| f.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown family `{s}`")))
    }
}

/// Joint log-likelihood with a flag for data the explanation rules out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLik {
    pub bits: f64,
    /// True when the exact value was `-inf` and was replaced by the
    /// smoothing floor.
    pub clamped: bool,
}

#[derive(Debug, Clone)]
pub enum Explanation {
    Clustering(Clustering),
    Dictionary(Dictionary),
    Circuit(Circuit),
    Mixture(Mixture),
    Straightforward(Straightforward),
}

impl Explanation {
    pub fn family(&self) -> Family {
        match self {
            Explanation::Clustering(_) => Family::Clustering,
            Explanation::Dictionary(_) => Family::Dictionary,
            Explanation::Circuit(_) => Family::Circuit,
            Explanation::Mixture(_) => Family::Mixture,
            Explanation::Straightforward(_) => Family::Straightforward,
        }
    }

    /// The network this explanation was fitted to, when the code refers to it.
    pub fn subject(&self) -> Option<&Arc<ToyNet>> {
        match self {
            Explanation::Clustering(c) => c.subject(),
            Explanation::Dictionary(d) => Some(d.subject()),
            Explanation::Circuit(c) => Some(c.subject()),
            Explanation::Mixture(_) | Explanation::Straightforward(_) => None,
        }
    }

    pub fn input_width(&self) -> usize {
        match self {
            Explanation::Clustering(c) => c.input_width(),
            Explanation::Dictionary(d) => d.subject().input_width(),
            Explanation::Circuit(c) => c.subject().input_width(),
            Explanation::Mixture(m) => m.input_width(),
            Explanation::Straightforward(s) => s.net().input_width(),
        }
    }

    pub fn label_count(&self) -> usize {
        match self {
            Explanation::Clustering(c) => c.label_count(),
            Explanation::Dictionary(d) => d.subject().label_count(),
            Explanation::Circuit(c) => c.subject().label_count(),
            Explanation::Mixture(m) => m.label_count(),
            Explanation::Straightforward(s) => s.net().label_count(),
        }
    }

    pub fn entity_count(&self) -> u64 {
        match self {
            Explanation::Clustering(c) => c.k() as u64,
            Explanation::Dictionary(d) => d.active_atoms() as u64,
            Explanation::Circuit(c) => c.node_count() as u64,
            Explanation::Mixture(m) => m.hypotheses().len() as u64,
            Explanation::Straightforward(s) => s.net().parameter_count() as u64,
        }
    }

    /// Declared appeal to a general law; only the mixture family's global
    /// programs make that claim.
    pub fn nomological(&self) -> bool {
        matches!(self, Explanation::Mixture(_))
    }

    fn check_width(&self, x: Input) -> Result<()> {
        if x.width() != self.input_width() {
            return Err(Error::WidthMismatch {
                expected: self.input_width(),
                got: x.width(),
            });
        }
        Ok(())
    }

    /// Predictive distribution over labels for one input.
    pub fn distribution(&self, x: Input) -> Result<Vec<f64>> {
        self.check_width(x)?;
        Ok(match self {
            Explanation::Clustering(c) => c.distribution(x),
            Explanation::Dictionary(d) => d.distribution(x),
            Explanation::Circuit(c) => c.distribution(x),
            Explanation::Mixture(m) => m.distribution(x),
            Explanation::Straightforward(s) => s.distribution(x),
        })
    }

    /// `log2 P(y | x)` for one observation, floored at the smoothing level
    /// when the explanation gives the label zero probability.
    pub fn point_log_likelihood(&self, o: &Observation) -> Result<f64> {
        let p = self.distribution(o.input)?;
        let py = p.get(o.output as usize).copied().unwrap_or(0.0);
        Ok(if py > 0.0 { py.log2() } else { SMOOTHING_EPS.log2() })
    }

    /// Joint `log2 P(obs | E)`.
    pub fn joint_log_likelihood(&self, obs: &[Observation]) -> Result<LogLik> {
        match self {
            Explanation::Mixture(m) => {
                for o in obs {
                    self.check_width(o.input)?;
                }
                Ok(m.joint_log_likelihood(obs))
            }
            _ => {
                let bits = self.pointwise_log_likelihood(obs)?;
                Ok(LogLik { bits, clamped: false })
            }
        }
    }

    pub fn log_likelihood(&self, obs: &[Observation]) -> Result<f64> {
        Ok(self.joint_log_likelihood(obs)?.bits)
    }

    /// `Σ_i log2 P(y_i | x_i)`, each point scored on its own.
    pub fn pointwise_log_likelihood(&self, obs: &[Observation]) -> Result<f64> {
        let mut total = 0.0;
        for o in obs {
            total += self.point_log_likelihood(o)?;
        }
        Ok(total)
    }

    /// The family's internal constraints plus normalization on every input.
    pub fn is_consistent(&self) -> bool {
        let family_ok = match self {
            Explanation::Clustering(c) => c.is_consistent(),
            Explanation::Dictionary(d) => d.is_consistent(),
            Explanation::Circuit(c) => c.is_consistent(),
            Explanation::Mixture(m) => m.is_consistent(),
            Explanation::Straightforward(_) => true,
        };
        family_ok
            && Input::enumerate(self.input_width()).all(|x| match self.distribution(x) {
                Ok(p) => p.iter().all(|v| v.is_finite() && *v >= 0.0) && (p.iter().sum::<f64>() - 1.0).abs() <= 1e-9,
                Err(_) => false,
            })
    }

    pub fn fields(&self, theory: &BackgroundTheory) -> Vec<Field> {
        let mut out = vec![Field::Tag(self.family().tag())];
        match self {
            Explanation::Clustering(c) => c.encode(theory, &mut out),
            Explanation::Dictionary(d) => d.encode(theory, &mut out),
            Explanation::Circuit(c) => c.encode(&mut out),
            Explanation::Mixture(m) => m.encode(&mut out),
            Explanation::Straightforward(s) => s.encode(theory, &mut out),
        }
        out
    }

    pub fn symbols(&self, theory: &BackgroundTheory) -> Vec<Symbol> {
        fields_to_symbols(&self.fields(theory))
    }

    /// The prefix-free bit code under `theory`.
    pub fn serialize(&self, theory: &BackgroundTheory) -> Result<BitString> {
        theory.fields_to_bits(&self.fields(theory))
    }

    /// Code length in bits; equal to the length of [`Self::serialize`].
    pub fn conciseness(&self, theory: &BackgroundTheory) -> Result<u64> {
        theory.fields_bits(&self.fields(theory))
    }

    fn decode(src: &mut dyn FieldSource, theory: &BackgroundTheory, subject: Option<&Arc<ToyNet>>) -> Result<Self> {
        let pos = src.position();
        let tag = src.tag()?;
        let family =
            Family::from_tag(tag).ok_or_else(|| Error::decode(pos, format!("{tag} does not start an explanation")))?;
        let need_subject = || {
            subject.ok_or_else(|| {
                Error::InvalidArgument(format!("decoding a {family} explanation needs the explained network"))
            })
        };
        let e = match family {
            Family::Clustering => Explanation::Clustering(Clustering::decode(src, theory, subject)?),
            Family::Dictionary => Explanation::Dictionary(Dictionary::decode(src, theory, need_subject()?)?),
            Family::Circuit => Explanation::Circuit(Circuit::decode(src, need_subject()?)?),
            Family::Mixture => Explanation::Mixture(Mixture::decode(src, theory)?),
            Family::Straightforward => Explanation::Straightforward(Straightforward::decode(src, theory)?),
        };
        src.finish()?;
        Ok(e)
    }

    pub fn deserialize(bits: &BitString, theory: &BackgroundTheory, subject: Option<&Arc<ToyNet>>) -> Result<Self> {
        Self::decode(&mut BitReader::new(bits, theory), theory, subject)
    }

    pub fn from_symbols(symbols: &[Symbol], theory: &BackgroundTheory, subject: Option<&Arc<ToyNet>>) -> Result<Self> {
        Self::decode(&mut SymbolReader::new(symbols), theory, subject)
    }

    /// Applies `delta` to the symbol stream and decodes the result. A decode
    /// error means the edited stream is not an explanation.
    pub fn apply_edit(&self, delta: &[EditOp], theory: &BackgroundTheory) -> Result<Explanation> {
        if delta.is_empty() {
            return Err(Error::InvalidArgument("edit list must not be empty".into()));
        }
        let edited = apply_ops(&self.symbols(theory), delta)?;
        Self::from_symbols(&edited, theory, self.subject())
    }

    /// Whether two explanations give identical distributions on every input.
    pub fn same_predictions(&self, other: &Explanation) -> bool {
        self.input_width() == other.input_width()
            && self.label_count() == other.label_count()
            && Input::enumerate(self.input_width()).all(|x| self.distribution(x).ok() == other.distribution(x).ok())
    }

    /// `XVB1`, the bit length as a little-endian `u32`, then the packed bits.
    pub fn to_blob(&self, theory: &BackgroundTheory) -> Result<Vec<u8>> {
        let bits = self.serialize(theory)?;
        Ok(bits_to_blob(&bits))
    }

    pub fn write_blob(&self, theory: &BackgroundTheory, mut w: impl Write) -> Result<()> {
        w.write_all(&self.to_blob(theory)?)?;
        Ok(())
    }

    pub fn from_blob(blob: &[u8], theory: &BackgroundTheory, subject: Option<&Arc<ToyNet>>) -> Result<Self> {
        Self::deserialize(&blob_to_bits(blob)?, theory, subject)
    }
}

pub fn bits_to_blob(bits: &BitString) -> Vec<u8> {
    let mut out = Vec::with_capacity(8 + bits.as_bytes().len());
    out.extend_from_slice(BLOB_MAGIC);
    out.extend_from_slice(&(bits.len() as u32).to_le_bytes());
    out.extend_from_slice(bits.as_bytes());
    out
}

pub fn blob_to_bits(blob: &[u8]) -> Result<BitString> {
    if blob.len() < 8 || &blob[..4] != BLOB_MAGIC {
        return Err(Error::decode(0, "missing XVB1 header"));
    }
    let len = u32::from_le_bytes(blob[4..8].try_into().expect("four bytes")) as u64;
    BitString::from_parts(blob[8..].to_vec(), len)
}
