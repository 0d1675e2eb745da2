// SPDX-License-Identifier: MIT OR Apache-2.0

//! A prior-weighted mixture of global programs, each with label noise.
//!
//! Unlike the other families the joint likelihood does not factorize: one
//! hypothesis has to account for every observation at once, which is what
//! gives co-explanation and unification something to measure.

use crate::codec::{BackgroundTheory, Field, FieldSource, Tag};
use crate::data::{Input, Observation};
use crate::error::{Error, Result};
use crate::explanation::{LogLik, SMOOTHING_EPS};

/// A global rule mapping every input to one label.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Program {
    Const(u8),
    Parity,
    Majority,
    /// Sum of the two halves of the input, modulo 7.
    ModAdd7,
    /// The value of one input bit, counted from the left.
    Bit(u8),
}

impl Program {
    pub fn tag(self) -> Tag {
        match self {
            Program::Const(_) => Tag::ProgConst,
            Program::Parity => Tag::ProgParity,
            Program::Majority => Tag::ProgMajority,
            Program::ModAdd7 => Tag::ProgModadd7,
            Program::Bit(_) => Tag::ProgBit,
        }
    }

    pub fn eval(self, x: Input) -> u16 {
        match self {
            Program::Const(c) => c as u16,
            Program::Parity => (x.popcount() % 2) as u16,
            Program::Majority => (2 * x.popcount() > x.width() as u32) as u16,
            Program::ModAdd7 => {
                let half = x.width() / 2;
                let a = x.bits() >> half;
                let b = x.bits() & ((1 << half) - 1);
                ((a + b) % 7) as u16
            }
            Program::Bit(i) => x.bit(i as usize) as u16,
        }
    }

    /// Whether the program is defined with labels in `0..labels` on inputs
    /// of width `n`.
    pub fn valid_for(self, n: usize, labels: usize) -> bool {
        match self {
            Program::Const(c) => (c as usize) < labels,
            Program::Parity | Program::Majority => labels >= 2,
            Program::ModAdd7 => labels >= 7 && n.is_multiple_of(2),
            Program::Bit(i) => (i as usize) < n && labels >= 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hypothesis {
    pub program: Program,
    /// Unnormalized prior weight.
    pub weight: u16,
    /// Noise rate as a fraction of `2^quantization_bits`.
    pub eta_grid: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    n: usize,
    labels: usize,
    hypotheses: Vec<Hypothesis>,
    /// Bits of the noise-rate grid.
    eta_bits: u8,
}

impl Mixture {
    /// Builds a mixture. Noise rates are given as reals and rounded down onto
    /// the theory's grid.
    pub fn new(n: usize, labels: usize, hypotheses: &[(Program, u16, f64)], theory: &BackgroundTheory) -> Result<Self> {
        let eta_bits = theory.quantization_bits();
        if n == 0 || n > crate::data::MAX_INPUT_WIDTH || !(2..=255).contains(&labels) {
            return Err(Error::InvalidArgument(format!(
                "unsupported task shape n={n}, labels={labels}"
            )));
        }
        if hypotheses.is_empty() || hypotheses.len() > 255 {
            return Err(Error::InvalidArgument("a mixture needs 1..=255 hypotheses".into()));
        }
        let mut hs = Vec::with_capacity(hypotheses.len());
        for &(program, weight, eta) in hypotheses {
            if !(0.0..0.5).contains(&eta) {
                return Err(Error::InvalidArgument(format!("noise rate {eta} outside [0, 0.5)")));
            }
            if !program.valid_for(n, labels) {
                return Err(Error::InvalidArgument(format!(
                    "{program:?} is not defined for n={n}, labels={labels}"
                )));
            }
            let eta_grid = (eta * (1u64 << eta_bits) as f64).floor() as u64;
            hs.push(Hypothesis {
                program,
                weight,
                eta_grid,
            });
        }
        Ok(Mixture {
            n,
            labels,
            hypotheses: hs,
            eta_bits,
        })
    }

    pub fn input_width(&self) -> usize {
        self.n
    }

    pub fn label_count(&self) -> usize {
        self.labels
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn eta(&self, h: &Hypothesis) -> f64 {
        h.eta_grid as f64 / (1u64 << self.eta_bits) as f64
    }

    /// Normalized prior; uniform when every weight is zero.
    pub fn priors(&self) -> Vec<f64> {
        let total: f64 = self.hypotheses.iter().map(|h| h.weight as f64).sum();
        if total == 0.0 {
            let u = 1.0 / self.hypotheses.len() as f64;
            return vec![u; self.hypotheses.len()];
        }
        self.hypotheses.iter().map(|h| h.weight as f64 / total).collect()
    }

    /// `P(y | x, h)`.
    pub fn hypothesis_probability(&self, h: &Hypothesis, x: Input, y: u16) -> f64 {
        let eta = self.eta(h);
        if h.program.eval(x) == y {
            1.0 - eta
        } else {
            eta / (self.labels - 1) as f64
        }
    }

    pub fn distribution(&self, x: Input) -> Vec<f64> {
        let priors = self.priors();
        (0..self.labels as u16)
            .map(|y| {
                self.hypotheses
                    .iter()
                    .zip(&priors)
                    .map(|(h, p)| p * self.hypothesis_probability(h, x, y))
                    .sum()
            })
            .collect()
    }

    /// `log2 Σ_h prior(h) Π_i P(y_i | x_i, h)`.
    pub fn joint_log_likelihood(&self, obs: &[Observation]) -> LogLik {
        let priors = self.priors();
        let terms: Vec<f64> = self
            .hypotheses
            .iter()
            .zip(&priors)
            .map(|(h, &p)| {
                let mut ll = p.log2();
                for o in obs {
                    ll += self.hypothesis_probability(h, o.input, o.output).log2();
                }
                ll
            })
            .collect();
        let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return LogLik {
                bits: obs.len() as f64 * SMOOTHING_EPS.log2(),
                clamped: true,
            };
        }
        let sum: f64 = terms.iter().map(|t| (t - max).exp2()).sum();
        LogLik {
            bits: max + sum.log2(),
            clamped: false,
        }
    }

    pub fn is_consistent(&self) -> bool {
        self.hypotheses.iter().any(|h| h.weight > 0)
            && self
                .hypotheses
                .iter()
                .all(|h| h.program.valid_for(self.n, self.labels) && self.eta(h) < 0.5)
    }

    /// Fields of one hypothesis as they appear in the code.
    pub fn hypothesis_fields(&self, h: &Hypothesis) -> Vec<Field> {
        let mut out = vec![Field::Tag(h.program.tag())];
        match h.program {
            Program::Const(v) | Program::Bit(v) => out.push(Field::uint(v as u64, 8)),
            _ => {}
        }
        out.push(Field::uint(h.weight as u64, 16));
        out.push(Field::uint(h.eta_grid, self.eta_bits));
        out
    }

    /// The same mixture without its last hypothesis.
    pub fn without_last(&self) -> Mixture {
        let mut m = self.clone();
        m.hypotheses.pop();
        m
    }

    pub(crate) fn encode(&self, out: &mut Vec<Field>) {
        out.push(Field::uint(self.n as u64, 8));
        out.push(Field::uint(self.labels as u64, 8));
        out.push(Field::uint(self.hypotheses.len() as u64, 8));
        for h in &self.hypotheses {
            out.extend(self.hypothesis_fields(h));
        }
    }

    pub(crate) fn decode(src: &mut dyn FieldSource, theory: &BackgroundTheory) -> Result<Self> {
        let n = src.uint(8)? as usize;
        let labels = src.uint(8)? as usize;
        let count = src.uint(8)? as usize;
        if n == 0 || n > crate::data::MAX_INPUT_WIDTH || labels < 2 || count == 0 {
            return Err(src.decode_error(format!("unsupported mixture shape n={n}, labels={labels}, h={count}")));
        }
        let eta_bits = theory.quantization_bits();
        let mut hypotheses = Vec::with_capacity(count);
        for _ in 0..count {
            let pos = src.position();
            let program = match src.tag()? {
                Tag::ProgConst => Program::Const(src.uint(8)? as u8),
                Tag::ProgParity => Program::Parity,
                Tag::ProgMajority => Program::Majority,
                Tag::ProgModadd7 => Program::ModAdd7,
                Tag::ProgBit => Program::Bit(src.uint(8)? as u8),
                t => return Err(Error::decode(pos, format!("expected a program tag, found {t}"))),
            };
            if !program.valid_for(n, labels) {
                return Err(Error::decode(
                    pos,
                    format!("{program:?} is not defined for n={n}, labels={labels}"),
                ));
            }
            let weight = src.uint(16)? as u16;
            let eta_grid = src.uint(eta_bits)?;
            if eta_grid >= 1 << (eta_bits - 1) {
                return Err(src.decode_error("noise rate must be below one half".into()));
            }
            hypotheses.push(Hypothesis {
                program,
                weight,
                eta_grid,
            });
        }
        Ok(Mixture {
            n,
            labels,
            hypotheses,
            eta_bits,
        })
    }
}

/// Candidate programs for a task shape, in a fixed order.
pub fn candidate_programs(n: usize, labels: usize) -> Vec<Program> {
    let mut out = vec![Program::Parity, Program::Majority, Program::ModAdd7];
    out.extend((0..labels.min(256)).map(|c| Program::Const(c as u8)));
    out.extend((0..n).map(|i| Program::Bit(i as u8)));
    out.retain(|p| p.valid_for(n, labels));
    out
}

/// Fits each candidate program's noise rate to `train`, smoothed as
/// `(errors + 1/2) / (N + 1)` and kept below one half, then keeps the
/// `hypotheses` best programs by joint log-likelihood with equal weights.
/// The best program comes first.
pub fn fit_mixture(
    n: usize,
    labels: usize,
    train: &[Observation],
    hypotheses: usize,
    theory: &BackgroundTheory,
) -> Result<Mixture> {
    if hypotheses == 0 {
        return Err(Error::InvalidArgument("a mixture needs at least one hypothesis".into()));
    }
    let cap = 0.5 - 1.0 / (1u64 << theory.quantization_bits()) as f64;
    let mut scored = Vec::new();
    for p in candidate_programs(n, labels) {
        let errors = train.iter().filter(|o| p.eval(o.input) != o.output).count();
        let eta = ((errors as f64 + 0.5) / (train.len() as f64 + 1.0)).min(cap);
        let single = Mixture::new(n, labels, &[(p, 1, eta)], theory)?;
        scored.push((single.joint_log_likelihood(train).bits, p, eta));
    }
    // Stable sort keeps candidate order among equal scores.
    scored.sort_by(|a, b| b.0.total_cmp(&a.0));
    let chosen: Vec<(Program, u16, f64)> = scored.iter().take(hypotheses).map(|&(_, p, eta)| (p, 1, eta)).collect();
    Mixture::new(n, labels, &chosen, theory)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obs(bits: u16, n: usize, y: u16) -> Observation {
        Observation::new(Input::new(bits, n).unwrap(), y)
    }

    #[test]
    fn zero_weights_give_uniform_prior() {
        let b = BackgroundTheory::default();
        let m = Mixture::new(2, 2, &[(Program::Parity, 0, 0.1), (Program::Bit(0), 0, 0.1)], &b).unwrap();
        assert_eq!(m.priors(), vec![0.5, 0.5]);
        assert!(!m.is_consistent());
    }

    #[test]
    fn impossible_data_is_clamped() {
        let b = BackgroundTheory::default();
        let m = Mixture::new(2, 2, &[(Program::Const(0), 1, 0.0)], &b).unwrap();
        let ll = m.joint_log_likelihood(&[obs(0, 2, 1), obs(1, 2, 1)]);
        assert!(ll.clamped);
        assert_eq!(ll.bits, 2.0 * SMOOTHING_EPS.log2());
    }

    #[test]
    fn invalid_programs_and_rates_are_rejected() {
        let b = BackgroundTheory::default();
        assert!(Mixture::new(8, 2, &[(Program::ModAdd7, 1, 0.1)], &b).is_err());
        assert!(Mixture::new(8, 2, &[(Program::Parity, 1, 0.5)], &b).is_err());
        assert!(Mixture::new(8, 2, &[], &b).is_err());
    }

    #[test]
    fn fit_prefers_the_generating_program() {
        let b = BackgroundTheory::default();
        let train: Vec<Observation> = Input::enumerate(8)
            .map(|x| Observation::new(x, Program::Majority.eval(x)))
            .collect();
        let m = fit_mixture(8, 2, &train, 2, &b).unwrap();
        assert_eq!(m.hypotheses()[0].program, Program::Majority);
        assert_eq!(m.hypotheses().len(), 2);
    }
}
