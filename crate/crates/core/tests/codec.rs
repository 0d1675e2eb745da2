// SPDX-License-Identifier: MIT OR Apache-2.0

mod support;

use proptest::prelude::*;
use virtue_core::codec::{BackgroundTheory, Symbol};
use virtue_core::edit::{apply_ops, edit_script, invert_ops, EditOp};
use virtue_core::explainers::Straightforward;
use virtue_core::explanation::{bits_to_blob, blob_to_bits, Explanation, Family};
use virtue_core::toy::{Activation, Layer, ToyNet};

fn family() -> impl Strategy<Value = Family> {
    prop::sample::select(Family::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialize_round_trips(f in family(), seed in any::<u64>()) {
        let b = BackgroundTheory::default();
        let (e, net) = support::random_explanation(&mut support::rng(seed), f, &b);
        let bits = e.serialize(&b).unwrap();
        let back = Explanation::deserialize(&bits, &b, Some(&net)).unwrap();
        prop_assert_eq!(back.serialize(&b).unwrap(), bits.clone());
        prop_assert_eq!(back.symbols(&b), e.symbols(&b));
        prop_assert_eq!(e.conciseness(&b).unwrap(), bits.len());
        for x in support::all_inputs(e.input_width()) {
            prop_assert_eq!(back.distribution(x).unwrap(), e.distribution(x).unwrap());
        }
    }

    #[test]
    fn blob_round_trips(f in family(), seed in any::<u64>()) {
        let b = BackgroundTheory::default();
        let (e, net) = support::random_explanation(&mut support::rng(seed), f, &b);
        let blob = e.to_blob(&b).unwrap();
        let back = Explanation::from_blob(&blob, &b, Some(&net)).unwrap();
        prop_assert_eq!(back.to_blob(&b).unwrap(), blob);
        let bits = e.serialize(&b).unwrap();
        prop_assert_eq!(blob_to_bits(&bits_to_blob(&bits)).unwrap(), bits);
    }

    #[test]
    fn symbols_decode_to_the_same_code(f in family(), seed in any::<u64>()) {
        let b = BackgroundTheory::default();
        let (e, net) = support::random_explanation(&mut support::rng(seed), f, &b);
        let back = Explanation::from_symbols(&e.symbols(&b), &b, Some(&net)).unwrap();
        prop_assert_eq!(back.serialize(&b).unwrap(), e.serialize(&b).unwrap());
    }

    #[test]
    fn inverted_edits_restore_the_stream(
        stream in prop::collection::vec(0u8..16, 0..12),
        raw in prop::collection::vec((0u8..4, any::<usize>(), 0u8..16), 0..6),
    ) {
        let s: Vec<Symbol> = stream.into_iter().map(Symbol::Digit).collect();
        let mut len = s.len();
        let mut ops = Vec::new();
        for (kind, loc, d) in raw {
            let payload = Symbol::Digit(d);
            let op = match kind {
                0 => { let o = EditOp::Insert { location: loc % (len + 1), payload }; len += 1; o }
                1 if len > 0 => { let o = EditOp::Delete { location: loc % len }; len -= 1; o }
                2 if len > 0 => EditOp::Substitute { location: loc % len, payload },
                3 if len > 1 => EditOp::Transpose { location: loc % (len - 1) },
                _ => continue,
            };
            ops.push(op);
        }
        let edited = apply_ops(&s, &ops).unwrap();
        prop_assert_eq!(Some(edited.clone()), support::oracle_apply(&s, &ops));
        let inv = invert_ops(&s, &ops).unwrap();
        prop_assert_eq!(apply_ops(&edited, &inv).unwrap(), s);
    }

    #[test]
    fn edit_script_reaches_its_target(
        a in prop::collection::vec(0u8..16, 0..10),
        c in prop::collection::vec(0u8..16, 0..10),
    ) {
        let a: Vec<Symbol> = a.into_iter().map(Symbol::Digit).collect();
        let c: Vec<Symbol> = c.into_iter().map(Symbol::Digit).collect();
        prop_assert_eq!(apply_ops(&a, &edit_script(&a, &c)).unwrap(), c);
    }
}

#[test]
fn straightforward_code_length_for_an_8_4_1_net() {
    // 36 weights and 5 biases at 16 bits, plus family tag, activation tag,
    // depth and three layer sizes.
    let b = BackgroundTheory::default();
    let mut l1 = Layer::zeros(8, 4);
    l1.weights.iter_mut().enumerate().for_each(|(i, w)| *w = i as i16 - 16);
    let net = ToyNet::new(vec![l1, Layer::zeros(4, 1)], Activation::Relu, 0).unwrap();
    let e = Explanation::Straightforward(Straightforward::new(&net, &b).unwrap());
    let family_tag = b.tag_length(virtue_core::codec::Tag::FamilyStraightforward).unwrap() as u64;
    let act_tag = b.tag_length(virtue_core::codec::Tag::ActRelu).unwrap() as u64;
    assert_eq!(net.parameter_count(), 41);
    assert_eq!(e.conciseness(&b).unwrap(), 41 * 16 + family_tag + act_tag + 8 * 4);
    assert_eq!(e.conciseness(&b).unwrap(), 696);
}
