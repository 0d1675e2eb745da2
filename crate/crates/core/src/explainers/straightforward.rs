// SPDX-License-Identifier: MIT OR Apache-2.0

//! The full computational trace: the network's own parameters, verbatim.

use crate::codec::{BackgroundTheory, Field, FieldSource, Tag};
use crate::data::Input;
use crate::error::{Error, Result};
use crate::explanation::smoothed_point_mass;
use crate::toy::{Activation, Layer, ToyNet};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Straightforward {
    net: ToyNet,
}

impl Straightforward {
    /// Copies the parameters of `net`, rounded to the theory's grid.
    pub fn new(net: &ToyNet, theory: &BackgroundTheory) -> Result<Self> {
        let round = |p: &i16| theory.round_q88(*p as i32) as i16;
        let layers = net
            .layers()
            .iter()
            .map(|l| Layer {
                inputs: l.inputs,
                outputs: l.outputs,
                weights: l.weights.iter().map(round).collect(),
                biases: l.biases.iter().map(round).collect(),
            })
            .collect();
        Ok(Straightforward {
            net: ToyNet::new(layers, net.activation(), net.seed())?,
        })
    }

    pub fn net(&self) -> &ToyNet {
        &self.net
    }

    pub fn distribution(&self, x: Input) -> Vec<f64> {
        smoothed_point_mass(self.net.label(x) as usize, self.net.label_count())
    }

    /// Bits spent before the first parameter.
    pub fn header_bits(&self, theory: &BackgroundTheory) -> Result<u64> {
        let act = match self.net.activation() {
            Activation::Relu => Tag::ActRelu,
            Activation::Identity => Tag::ActIdentity,
        };
        Ok(theory.tag_length(Tag::FamilyStraightforward)? as u64
            + theory.tag_length(act)? as u64
            + 8 * (self.net.depth() as u64 + 2))
    }

    pub(crate) fn encode(&self, theory: &BackgroundTheory, out: &mut Vec<Field>) {
        out.push(Field::Tag(match self.net.activation() {
            Activation::Relu => Tag::ActRelu,
            Activation::Identity => Tag::ActIdentity,
        }));
        out.push(Field::uint(self.net.depth() as u64, 8));
        for s in self.net.layer_sizes() {
            out.push(Field::uint(s as u64, 8));
        }
        for l in self.net.layers() {
            for &w in l.weights.iter().chain(&l.biases) {
                out.push(theory.param_field(w as i32));
            }
        }
    }

    pub(crate) fn decode(src: &mut dyn FieldSource, theory: &BackgroundTheory) -> Result<Self> {
        let pos = src.position();
        let activation = match src.tag()? {
            Tag::ActRelu => Activation::Relu,
            Tag::ActIdentity => Activation::Identity,
            t => return Err(Error::decode(pos, format!("expected an activation tag, found {t}"))),
        };
        let depth = src.uint(8)? as usize;
        if depth == 0 {
            return Err(src.decode_error("a network needs at least one layer".into()));
        }
        let sizes: Vec<usize> = (0..=depth)
            .map(|_| src.uint(8).map(|v| v as usize))
            .collect::<Result<_>>()?;
        let q = theory.param_width();
        let mut layers = Vec::with_capacity(depth);
        for w in sizes.windows(2) {
            let mut layer = Layer::zeros(w[0], w[1]);
            for p in layer.weights.iter_mut().chain(layer.biases.iter_mut()) {
                let g = src.int(q)?;
                *p = theory.dequantize_q88(g) as i16;
            }
            layers.push(layer);
        }
        let net = ToyNet::new(layers, activation, 0)
            .map_err(|e| Error::decode(src.position(), format!("not a valid network: {e}")))?;
        Ok(Straightforward { net })
    }
}
