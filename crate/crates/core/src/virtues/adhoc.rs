// SPDX-License-Identifier: MIT OR Apache-2.0

//! Adhocness of an added hypothesis.
//!
//! `P(H)` is the coding prior of the hypothesis alone. `P(H | E, B)` codes
//! the same fields after the codebook has seen `E`: each tag's probability
//! becomes an even mix of its codebook probability and its frequency among
//! the tags of `E`. Integer fields cost their width either way.

use crate::codec::{fields_to_symbols, BackgroundTheory, Field, Symbol};
use crate::error::{Error, Result};
use crate::explanation::Explanation;

/// `2^-alone - 2^-given`. Positive when knowing `E` makes `H` less likely.
pub fn adhocness(h_bits_alone: f64, h_bits_given_e: f64) -> Result<f64> {
    if !(h_bits_alone >= 0.0 && h_bits_given_e >= 0.0) {
        return Err(Error::InvalidArgument("code lengths must be non-negative".into()));
    }
    Ok((-h_bits_alone).exp2() - (-h_bits_given_e).exp2())
}

/// Code length of `h` under the background codebook.
pub fn hypothesis_bits(h: &[Field], b: &BackgroundTheory) -> Result<f64> {
    Ok(b.fields_bits(h)? as f64)
}

/// Code length of `h` under the codebook extended with the symbols of `e`.
pub fn hypothesis_bits_given(h: &[Field], b: &BackgroundTheory, e: &[Symbol]) -> Result<f64> {
    let mut bits = 0.0;
    for f in h {
        bits += match f {
            Field::Tag(t) => b.tag_length_given(*t, e)?,
            Field::Uint { width, .. } => *width as f64,
        };
    }
    Ok(bits)
}

/// Adhocness of the last hypothesis of a mixture, read as an addition to the
/// mixture of the others. `None` for other families or a single hypothesis.
pub fn mixture_adhocness(e: &Explanation, b: &BackgroundTheory) -> Result<Option<f64>> {
    let Explanation::Mixture(m) = e else { return Ok(None) };
    let hs = m.hypotheses();
    if hs.len() < 2 {
        return Ok(None);
    }
    let rest = Explanation::Mixture(m.without_last());
    let context = rest.symbols(b);
    let fields = m.hypothesis_fields(&hs[hs.len() - 1]);
    let alone = hypothesis_bits(&fields, b)?;
    let given = hypothesis_bits_given(&fields, b, &context)?;
    adhocness(alone, given).map(Some)
}

/// Symbols of a hypothesis on its own, for display.
pub fn hypothesis_symbols(h: &[Field]) -> Vec<Symbol> {
    fields_to_symbols(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::explainers::{Clustering, Mixture, Program};

    #[test]
    fn equal_lengths_are_not_adhoc() {
        assert_eq!(adhocness(12.5, 12.5).unwrap(), 0.0);
        assert!(adhocness(-1.0, 2.0).is_err());
        assert!(adhocness(f64::NAN, 2.0).is_err());
    }

    #[test]
    fn only_mixtures_with_two_hypotheses_have_a_value() {
        let b = BackgroundTheory::default();
        let c = Explanation::Clustering(Clustering::uniform(4, 2).unwrap());
        assert_eq!(mixture_adhocness(&c, &b).unwrap(), None);
        let one = Explanation::Mixture(Mixture::new(4, 2, &[(Program::Parity, 1, 0.1)], &b).unwrap());
        assert_eq!(mixture_adhocness(&one, &b).unwrap(), None);
    }

    #[test]
    fn repeating_a_program_tag_makes_it_cheaper() {
        let b = BackgroundTheory::default();
        let m = Mixture::new(4, 2, &[(Program::Parity, 1, 0.1), (Program::Parity, 1, 0.2)], &b).unwrap();
        let h = m.hypothesis_fields(&m.hypotheses()[1]);
        let ctx = Explanation::Mixture(m.without_last()).symbols(&b);
        assert!(hypothesis_bits_given(&h, &b, &ctx).unwrap() < hypothesis_bits(&h, &b).unwrap());
        assert!(mixture_adhocness(&Explanation::Mixture(m), &b).unwrap().unwrap() < 0.0);
    }
}
