// SPDX-License-Identifier: MIT OR Apache-2.0

//! Symbol streams, prefix codes, and the background coding theory.
//!
//! Every explanation family writes itself as a list of [`Field`]s. A field is
//! either a structural tag, coded with the codebook's prefix code, or an
//! unsigned integer of a width fixed by the family grammar, coded as raw bits.
//! The same fields have a second view as a stream of [`Symbol`]s, which is
//! what edit operations act on: tags stay tags and an integer of width `w`
//! becomes `ceil(w / 4)` hexadecimal digits, most significant first.
//!
//! Family decoders are written once against [`FieldSource`] and read both
//! views.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Structural tags shared by all families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Tag {
    FamilyClustering,
    FamilyDictionary,
    FamilyCircuit,
    FamilyMixture,
    FamilyStraightforward,
    SpaceInput,
    SpaceLayer,
    TieLowest,
    TieNone,
    ActRelu,
    ActIdentity,
    AblateZero,
    AblateMean,
    ProgConst,
    ProgParity,
    ProgMajority,
    ProgModadd7,
    ProgBit,
}

impl Tag {
    pub const ALL: [Tag; 18] = [
        Tag::FamilyClustering,
        Tag::FamilyDictionary,
        Tag::FamilyCircuit,
        Tag::FamilyMixture,
        Tag::FamilyStraightforward,
        Tag::SpaceInput,
        Tag::SpaceLayer,
        Tag::TieLowest,
        Tag::TieNone,
        Tag::ActRelu,
        Tag::ActIdentity,
        Tag::AblateZero,
        Tag::AblateMean,
        Tag::ProgConst,
        Tag::ProgParity,
        Tag::ProgMajority,
        Tag::ProgModadd7,
        Tag::ProgBit,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Tag::FamilyClustering => "family.clustering",
            Tag::FamilyDictionary => "family.dictionary",
            Tag::FamilyCircuit => "family.circuit",
            Tag::FamilyMixture => "family.mixture",
            Tag::FamilyStraightforward => "family.straightforward",
            Tag::SpaceInput => "space.input",
            Tag::SpaceLayer => "space.layer",
            Tag::TieLowest => "tie.lowest",
            Tag::TieNone => "tie.none",
            Tag::ActRelu => "act.relu",
            Tag::ActIdentity => "act.identity",
            Tag::AblateZero => "ablate.zero",
            Tag::AblateMean => "ablate.mean",
            Tag::ProgConst => "prog.const",
            Tag::ProgParity => "prog.parity",
            Tag::ProgMajority => "prog.majority",
            Tag::ProgModadd7 => "prog.modadd7",
            Tag::ProgBit => "prog.bit",
        }
    }

    pub fn from_name(name: &str) -> Option<Tag> {
        Tag::ALL.into_iter().find(|t| t.name() == name)
    }
}

impl fmt::Display for Tag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One element of an editable symbol stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    Tag(Tag),
    /// A hexadecimal digit, `0..16`.
    Digit(u8),
}

impl Symbol {
    /// The sixteen digit symbols.
    pub fn digits() -> impl Iterator<Item = Symbol> {
        (0..16u8).map(Symbol::Digit)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Tag(t) => f.write_str(t.name()),
            Symbol::Digit(d) => write!(f, "{d:x}"),
        }
    }
}

impl FromStr for Symbol {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.len() == 1 {
            if let Some(d) = s.chars().next().and_then(|c| c.to_digit(16)) {
                return Ok(Symbol::Digit(d as u8));
            }
        }
        Tag::from_name(s)
            .map(Symbol::Tag)
            .ok_or_else(|| Error::UnknownSymbol(s.to_string()))
    }
}

impl Serialize for Symbol {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Symbol {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A grammar element written by a family encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Field {
    Tag(Tag),
    Uint { value: u64, width: u8 },
}

impl Field {
    pub fn uint(value: u64, width: u8) -> Self {
        debug_assert!(
            width <= 63 && value >> width == 0,
            "{value} does not fit in {width} bits"
        );
        Field::Uint { value, width }
    }

    /// Two's-complement signed value in `width` bits.
    pub fn int(value: i64, width: u8) -> Self {
        let mask = (1u64 << width) - 1;
        Field::uint(value as u64 & mask, width)
    }
}

/// Number of digit symbols used for an integer of `width` bits.
pub fn digits_for_width(width: u8) -> usize {
    (width as usize).div_ceil(4)
}

/// Smallest width that can hold every value in `0..count`.
pub fn index_width(count: u64) -> u8 {
    if count <= 1 {
        0
    } else {
        (64 - (count - 1).leading_zeros()) as u8
    }
}

/// Sign-extends a `width`-bit value.
pub fn sign_extend(value: u64, width: u8) -> i64 {
    if width == 0 {
        return 0;
    }
    let shift = 64 - width as u32;
    ((value << shift) as i64) >> shift
}

pub fn fields_to_symbols(fields: &[Field]) -> Vec<Symbol> {
    let mut out = Vec::new();
    for f in fields {
        match *f {
            Field::Tag(t) => out.push(Symbol::Tag(t)),
            Field::Uint { value, width } => {
                let d = digits_for_width(width);
                for k in (0..d).rev() {
                    out.push(Symbol::Digit(((value >> (4 * k)) & 0xf) as u8));
                }
            }
        }
    }
    out
}

/// A packed bit string, most significant bit first within each byte.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitString {
    bytes: Vec<u8>,
    bit_len: u64,
}

impl BitString {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_parts(bytes: Vec<u8>, bit_len: u64) -> Result<Self> {
        if bytes.len() as u64 != bit_len.div_ceil(8) {
            return Err(Error::decode(0, "bit length does not match byte count"));
        }
        Ok(BitString { bytes, bit_len })
    }

    pub fn len(&self) -> u64 {
        self.bit_len
    }

    pub fn is_empty(&self) -> bool {
        self.bit_len == 0
    }

    pub fn as_bytes(&self) -> &[u8] {
        &self.bytes
    }

    pub fn push_bit(&mut self, bit: bool) {
        let byte = (self.bit_len / 8) as usize;
        if byte == self.bytes.len() {
            self.bytes.push(0);
        }
        if bit {
            self.bytes[byte] |= 0x80 >> (self.bit_len % 8);
        }
        self.bit_len += 1;
    }

    pub fn push_bits(&mut self, value: u64, width: u32) {
        for k in (0..width).rev() {
            self.push_bit((value >> k) & 1 == 1);
        }
    }

    pub fn bit(&self, i: u64) -> bool {
        (self.bytes[(i / 8) as usize] >> (7 - i % 8)) & 1 == 1
    }

    /// The bits as a `0`/`1` string.
    pub fn to_bit_string(&self) -> String {
        (0..self.bit_len).map(|i| if self.bit(i) { '1' } else { '0' }).collect()
    }
}

/// Codebook, parameter precision, and version: everything the coding scheme
/// assumes as background knowledge.
#[derive(Debug, Clone)]
pub struct BackgroundTheory {
    codebook: BTreeMap<String, u32>,
    quantization_bits: u8,
    version: String,
    codes: HashMap<Tag, (u64, u32)>,
    decode: HashMap<(u32, u64), Tag>,
    max_len: u32,
}

/// The codebook shipped with the crate.
pub const DEFAULT_CODEBOOK_JSON: &str = include_str!("../data/codebook.json");
pub const DEFAULT_QUANTIZATION_BITS: u8 = 16;

impl BackgroundTheory {
    /// Builds a theory, checking the Kraft inequality and assigning canonical
    /// prefix codes in `(length, name)` order.
    pub fn new(codebook: BTreeMap<String, u32>, quantization_bits: u8, version: impl Into<String>) -> Result<Self> {
        if !(2..=16).contains(&quantization_bits) || !quantization_bits.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!(
                "quantization_bits must be even and in 2..=16, got {quantization_bits}"
            )));
        }
        if codebook.values().any(|&l| l == 0 || l > 48) {
            return Err(Error::InvalidArgument("code lengths must be in 1..=48".into()));
        }
        let kraft: f64 = codebook.values().map(|&l| (-(l as f64)).exp2()).sum();
        if kraft > 1.0 {
            return Err(Error::Kraft(kraft));
        }
        let mut order: Vec<(&String, u32)> = codebook.iter().map(|(k, &v)| (k, v)).collect();
        order.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(b.0)));
        let mut codes = HashMap::new();
        let mut decode = HashMap::new();
        let mut code = 0u64;
        let mut prev_len = order.first().map(|e| e.1).unwrap_or(0);
        for (name, len) in &order {
            code <<= len - prev_len;
            prev_len = *len;
            if let Some(tag) = Tag::from_name(name) {
                codes.insert(tag, (code, *len));
                decode.insert((*len, code), tag);
            }
            code += 1;
        }
        let max_len = order.last().map(|e| e.1).unwrap_or(0);
        Ok(BackgroundTheory {
            codebook,
            quantization_bits,
            version: version.into(),
            codes,
            decode,
            max_len,
        })
    }

    /// Loads a `{symbol: bit_length}` JSON codebook.
    pub fn from_codebook_json(json: &str, quantization_bits: u8, version: impl Into<String>) -> Result<Self> {
        let codebook: BTreeMap<String, u32> = serde_json::from_str(json)?;
        Self::new(codebook, quantization_bits, version)
    }

    pub fn with_quantization_bits(&self, bits: u8) -> Result<Self> {
        Self::new(self.codebook.clone(), bits, self.version.clone())
    }

    pub fn codebook(&self) -> &BTreeMap<String, u32> {
        &self.codebook
    }

    pub fn quantization_bits(&self) -> u8 {
        self.quantization_bits
    }

    pub fn version(&self) -> &str {
        &self.version
    }

    pub fn kraft_sum(&self) -> f64 {
        self.codebook.values().map(|&l| (-(l as f64)).exp2()).sum()
    }

    /// Checks that every tag any family can emit has a code.
    pub fn validate_complete(&self) -> Result<()> {
        for t in Tag::ALL {
            if !self.codes.contains_key(&t) {
                return Err(Error::UnknownSymbol(t.name().into()));
            }
        }
        Ok(())
    }

    pub fn tag_length(&self, tag: Tag) -> Result<u32> {
        self.codes
            .get(&tag)
            .map(|c| c.1)
            .ok_or_else(|| Error::UnknownSymbol(tag.name().into()))
    }

    pub fn field_bits(&self, field: &Field) -> Result<u64> {
        match field {
            Field::Tag(t) => self.tag_length(*t).map(u64::from),
            Field::Uint { width, .. } => Ok(*width as u64),
        }
    }

    pub fn fields_bits(&self, fields: &[Field]) -> Result<u64> {
        fields.iter().map(|f| self.field_bits(f)).sum()
    }

    pub fn fields_to_bits(&self, fields: &[Field]) -> Result<BitString> {
        let mut out = BitString::new();
        for f in fields {
            match *f {
                Field::Tag(t) => {
                    let (code, len) = *self
                        .codes
                        .get(&t)
                        .ok_or_else(|| Error::UnknownSymbol(t.name().into()))?;
                    out.push_bits(code, len);
                }
                Field::Uint { value, width } => out.push_bits(value, width as u32),
            }
        }
        Ok(out)
    }

    /// Width of a signed parameter field.
    pub fn param_width(&self) -> u8 {
        self.quantization_bits
    }

    /// Converts a Q8.8 parameter onto this theory's grid: `q` bits with
    /// `q / 2` fractional bits, rounding half up and saturating.
    pub fn quantize_q88(&self, p: i32) -> i64 {
        let frac = (self.quantization_bits / 2) as u32;
        let shift = 8 - frac;
        let g = if shift == 0 {
            p as i64
        } else {
            ((p as i64) + (1 << (shift - 1))) >> shift
        };
        let half = 1i64 << (self.quantization_bits - 1);
        g.clamp(-half, half - 1)
    }

    /// Inverse of [`Self::quantize_q88`] for grid values.
    pub fn dequantize_q88(&self, g: i64) -> i32 {
        let frac = (self.quantization_bits / 2) as u32;
        (g << (8 - frac)) as i32
    }

    /// Rounds a Q8.8 value onto the grid and back.
    pub fn round_q88(&self, p: i32) -> i32 {
        self.dequantize_q88(self.quantize_q88(p))
    }

    pub fn param_field(&self, p: i32) -> Field {
        Field::int(self.quantize_q88(p), self.quantization_bits)
    }

    /// Ideal code length of a tag under the codebook mixed half and half with
    /// the empirical tag distribution of `context`.
    pub fn tag_length_given(&self, tag: Tag, context: &[Symbol]) -> Result<f64> {
        let base = (-(self.tag_length(tag)? as f64)).exp2();
        let tags: Vec<Tag> = context
            .iter()
            .filter_map(|s| match s {
                Symbol::Tag(t) => Some(*t),
                Symbol::Digit(_) => None,
            })
            .collect();
        let p = if tags.is_empty() {
            base
        } else {
            let hits = tags.iter().filter(|&&t| t == tag).count() as f64;
            0.5 * base + 0.5 * hits / tags.len() as f64
        };
        Ok(-p.log2())
    }
}

impl Default for BackgroundTheory {
    fn default() -> Self {
        BackgroundTheory::from_codebook_json(DEFAULT_CODEBOOK_JSON, DEFAULT_QUANTIZATION_BITS, "xvb-codebook-1")
            .expect("shipped codebook is valid")
    }
}

/// Where family decoders read fields from.
pub trait FieldSource {
    fn tag(&mut self) -> Result<Tag>;
    fn uint(&mut self, width: u8) -> Result<u64>;
    fn position(&self) -> usize;
    /// Fails unless every symbol or bit has been consumed.
    fn finish(&self) -> Result<()>;

    fn int(&mut self, width: u8) -> Result<i64> {
        Ok(sign_extend(self.uint(width)?, width))
    }

    fn expect_tag(&mut self, expected: Tag) -> Result<()> {
        let pos = self.position();
        let t = self.tag()?;
        if t != expected {
            return Err(Error::decode(pos, format!("expected {expected}, found {t}")));
        }
        Ok(())
    }

    fn decode_error(&self, reason: String) -> Error {
        Error::decode(self.position(), reason)
    }
}

/// Reads fields from a symbol stream.
pub struct SymbolReader<'a> {
    symbols: &'a [Symbol],
    pos: usize,
}

impl<'a> SymbolReader<'a> {
    pub fn new(symbols: &'a [Symbol]) -> Self {
        SymbolReader { symbols, pos: 0 }
    }
}

impl FieldSource for SymbolReader<'_> {
    fn tag(&mut self) -> Result<Tag> {
        match self.symbols.get(self.pos) {
            Some(Symbol::Tag(t)) => {
                self.pos += 1;
                Ok(*t)
            }
            Some(Symbol::Digit(_)) => Err(Error::decode(self.pos, "expected a tag, found a digit")),
            None => Err(Error::decode(self.pos, "unexpected end of stream")),
        }
    }

    fn uint(&mut self, width: u8) -> Result<u64> {
        let d = digits_for_width(width);
        let mut value = 0u64;
        for k in 0..d {
            match self.symbols.get(self.pos) {
                Some(Symbol::Digit(v)) => {
                    if k == 0 {
                        let top_bits = width as usize - 4 * (d - 1);
                        if (*v as u64) >> top_bits != 0 {
                            return Err(Error::decode(
                                self.pos,
                                format!("digit {v:x} overflows a {width}-bit field"),
                            ));
                        }
                    }
                    value = (value << 4) | *v as u64;
                    self.pos += 1;
                }
                Some(Symbol::Tag(t)) => return Err(Error::decode(self.pos, format!("expected a digit, found {t}"))),
                None => return Err(Error::decode(self.pos, "unexpected end of stream")),
            }
        }
        Ok(value)
    }

    fn position(&self) -> usize {
        self.pos
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.symbols.len() {
            return Err(Error::decode(self.pos, "trailing symbols"));
        }
        Ok(())
    }
}

/// Reads fields from a bit string using a theory's prefix code.
pub struct BitReader<'a> {
    bits: &'a BitString,
    theory: &'a BackgroundTheory,
    pos: u64,
}

impl<'a> BitReader<'a> {
    pub fn new(bits: &'a BitString, theory: &'a BackgroundTheory) -> Self {
        BitReader { bits, theory, pos: 0 }
    }

    fn next_bit(&mut self) -> Result<bool> {
        if self.pos >= self.bits.len() {
            return Err(Error::decode(self.pos as usize, "unexpected end of bits"));
        }
        let b = self.bits.bit(self.pos);
        self.pos += 1;
        Ok(b)
    }
}

impl FieldSource for BitReader<'_> {
    fn tag(&mut self) -> Result<Tag> {
        let start = self.pos as usize;
        let mut code = 0u64;
        for len in 1..=self.theory.max_len {
            code = (code << 1) | self.next_bit()? as u64;
            if let Some(t) = self.theory.decode.get(&(len, code)) {
                return Ok(*t);
            }
        }
        Err(Error::decode(start, "no codeword matches"))
    }

    fn uint(&mut self, width: u8) -> Result<u64> {
        let mut v = 0u64;
        for _ in 0..width {
            v = (v << 1) | self.next_bit()? as u64;
        }
        Ok(v)
    }

    fn position(&self) -> usize {
        self.pos as usize
    }

    fn finish(&self) -> Result<()> {
        if self.pos != self.bits.len() {
            return Err(Error::decode(self.pos as usize, "trailing bits"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shipped_codebook_satisfies_kraft_and_is_complete() {
        let b = BackgroundTheory::default();
        assert!(b.kraft_sum() <= 1.0);
        b.validate_complete().unwrap();
    }

    #[test]
    fn kraft_violation_is_rejected() {
        let mut cb = BTreeMap::new();
        cb.insert("family.clustering".to_string(), 1);
        cb.insert("family.circuit".to_string(), 1);
        cb.insert("family.mixture".to_string(), 1);
        assert!(matches!(BackgroundTheory::new(cb, 16, "x"), Err(Error::Kraft(_))));
    }

    #[test]
    fn canonical_codes_are_prefix_free() {
        let b = BackgroundTheory::default();
        let codes: Vec<(u64, u32)> = Tag::ALL.iter().map(|t| b.codes[t]).collect();
        for (i, &(ci, li)) in codes.iter().enumerate() {
            for (j, &(cj, lj)) in codes.iter().enumerate() {
                if i != j && li <= lj {
                    assert_ne!(cj >> (lj - li), ci, "code {i} is a prefix of code {j}");
                }
            }
        }
    }

    #[test]
    fn bit_and_symbol_views_decode_the_same_fields() {
        let b = BackgroundTheory::default();
        let fields = vec![
            Field::Tag(Tag::FamilyMixture),
            Field::uint(5, 3),
            Field::int(-7, 16),
            Field::Tag(Tag::ProgBit),
            Field::uint(0, 0),
            Field::uint(200, 8),
        ];
        let bits = b.fields_to_bits(&fields).unwrap();
        assert_eq!(bits.len(), b.fields_bits(&fields).unwrap());
        let syms = fields_to_symbols(&fields);
        let mut br = BitReader::new(&bits, &b);
        let mut sr = SymbolReader::new(&syms);
        for src in [&mut br as &mut dyn FieldSource, &mut sr] {
            assert_eq!(src.tag().unwrap(), Tag::FamilyMixture);
            assert_eq!(src.uint(3).unwrap(), 5);
            assert_eq!(src.int(16).unwrap(), -7);
            assert_eq!(src.tag().unwrap(), Tag::ProgBit);
            assert_eq!(src.uint(0).unwrap(), 0);
            assert_eq!(src.uint(8).unwrap(), 200);
            src.finish().unwrap();
        }
    }

    #[test]
    fn oversized_top_digit_is_a_decode_error() {
        let syms = [Symbol::Digit(9)];
        let mut r = SymbolReader::new(&syms);
        assert!(matches!(r.uint(3), Err(Error::Decode { .. })));
    }

    #[test]
    fn quantization_grid() {
        let b = BackgroundTheory::default();
        assert_eq!(b.quantize_q88(-300), -300);
        let b4 = b.with_quantization_bits(4).unwrap();
        // Q2.2: step 0.25 = 64 in Q8.8, range [-2, 1.75].
        assert_eq!(b4.round_q88(100), 128);
        assert_eq!(b4.round_q88(96), 128);
        assert_eq!(b4.round_q88(95), 64);
        assert_eq!(b4.round_q88(10_000), 448);
        assert_eq!(b4.round_q88(-10_000), -512);
    }

    #[test]
    fn index_widths() {
        assert_eq!(index_width(1), 0);
        assert_eq!(index_width(2), 1);
        assert_eq!(index_width(8), 3);
        assert_eq!(index_width(9), 4);
    }

    #[test]
    fn symbol_text_round_trip() {
        for s in Tag::ALL.map(Symbol::Tag).into_iter().chain(Symbol::digits()) {
            assert_eq!(s.to_string().parse::<Symbol>().unwrap(), s);
        }
    }
}
