use majorn_core::generate::{gen_pair, gen_seq_pair_with, random_step, rng_from_seed};
use majorn_core::operators::*;
use majorn_core::rat::{frac, int};
use majorn_core::*;
use num_traits::Zero;
use proptest::prelude::*;

fn sf(pieces: &[(Rat, Rat)]) -> StepFunction {
    StepFunction::from_parts(pieces.to_vec(), int(0))
}

fn check(kind: SynthKind, f: Operand, g: Operand, r: Rat) -> SynthCheck {
    let op = synthesize(kind, &f, &g, &r).unwrap();
    verify_synthesis(kind, &f, &g, &r, &op).unwrap()
}

#[test]
fn head_equal_traced_example() {
    let f = sf(&[(int(1), int(2))]);
    let g = sf(&[(int(2), int(1))]);
    let op = synth_head_equal(&f, &g, &int(1)).unwrap();
    let half = frac(1, 2);
    let expected = OperatorExpr::Transfer(vec![
        TransferPiece::new(Interval::new(int(0), int(1)), int(0), int(1), half.clone()),
        TransferPiece::new(Interval::new(int(1), int(2)), int(0), int(1), half),
    ]);
    assert_eq!(compile(&op).unwrap(), compile(&expected).unwrap());
    assert_eq!(apply(&op, &Operand::Step(f.clone())).unwrap(), Operand::Step(g.clone()));
    assert_eq!(op_norm(&op, &NormIndex::Finite(int(1))).unwrap().value, Enclosure::exact(int(1)));
    assert_eq!(op_norm(&op, &NormIndex::Infinity).unwrap().value, Enclosure::exact(frac(1, 2)));
}

#[test]
fn identity_cases() {
    let f = sf(&[(int(1), int(3)), (int(2), int(1))]);
    for kind in [SynthKind::HeadEqual, SynthKind::TailEqual, SynthKind::HeadWeak] {
        let c = check(kind, Operand::Step(f.clone()), Operand::Step(f.clone()), int(1));
        assert!(c.passed(), "{kind}");
    }
    let a = FinSeq::from_ints(&[3, 2, 2]);
    for kind in [SynthKind::SeqTail, SynthKind::SeqHead] {
        let c = check(kind, Operand::Seq(a.clone()), Operand::Seq(a.clone()), int(1));
        assert!(c.passed(), "{kind}");
    }
}

#[test]
fn mult_and_subst_norms() {
    let h = sf(&[(int(1), int(3)), (int(1), frac(-1, 2))]);
    let m = OperatorExpr::mult(h);
    assert_eq!(op_norm(&m, &NormIndex::Infinity).unwrap().value, Enclosure::exact(int(3)));
    assert_eq!(op_norm(&m, &NormIndex::Finite(int(2))).unwrap().value, Enclosure::exact(int(3)));
    let w = MPMap::new(vec![
        MapPiece { source: Interval::new(int(0), int(1)), target: Interval::new(int(2), int(3)), reversed: true },
        MapPiece { source: Interval::new(int(1), int(2)), target: Interval::new(int(0), int(1)), reversed: false },
    ])
    .unwrap();
    let s = OperatorExpr::Subst(w);
    for p in [NormIndex::Zero, NormIndex::Finite(frac(1, 2)), NormIndex::Finite(int(3)), NormIndex::Infinity] {
        let e = op_norm(&s, &p).unwrap();
        assert!(e.exact);
        assert_eq!(e.value, Enclosure::exact(int(1)), "p = {p}");
    }
    let x = StepFunction::indicator(int(2), int(3), int(5));
    assert_eq!(apply(&s, &Operand::Step(x)).unwrap(), Operand::Step(StepFunction::indicator(int(0), int(1), int(5))));
}

#[test]
fn dilation_norms() {
    let d = OperatorExpr::Dilate { n: 4, direction: DilateDirection::Expand };
    assert_eq!(op_norm(&d, &NormIndex::Finite(int(2))).unwrap().value, Enclosure::exact(int(2)));
    assert_eq!(op_norm(&d, &NormIndex::Zero).unwrap().value, Enclosure::exact(int(4)));
    let f = StepFunction::indicator(int(0), int(1), int(1));
    assert_eq!(apply(&d, &Operand::Step(f.clone())).unwrap(), Operand::Step(f.dilate(4, DilateDirection::Expand)));
}

#[test]
fn seq_tail_example_rows() {
    let a = FinSeq::from_ints(&[2, 1, 1]);
    let b = FinSeq::from_ints(&[2, 2, 0]);
    let op = synth_seq_tail(&a, &b, &int(1)).unwrap();
    let OperatorExpr::RowFunctional(rows) = &op else { panic!("expected rows") };
    assert_eq!(rows[1].support, vec![1, 2]);
    assert_eq!(rows[1].coeffs, vec![int(1), int(1)]);
    let c = verify_synthesis(SynthKind::SeqTail, &Operand::Seq(a), &Operand::Seq(b), &int(1), &op).unwrap();
    assert!(c.passed());
}

#[test]
fn seq_head_example() {
    let a = FinSeq::from_ints(&[2, 0]);
    let b = FinSeq::from_ints(&[1, 1]);
    let op = synth_seq_head(&a, &b, &int(1)).unwrap();
    assert_eq!(apply(&op, &Operand::Seq(a.clone())).unwrap(), Operand::Seq(b.clone()));
    assert_eq!(op_norm(&op, &NormIndex::Finite(int(1))).unwrap().value, Enclosure::exact(int(1)));
    assert_eq!(op_norm(&op, &NormIndex::Infinity).unwrap().value, Enclosure::exact(frac(1, 2)));
}

#[test]
fn signed_unsorted_sequences() {
    let a = FinSeq::new(vec![int(-1), int(3), int(0), int(2)]);
    let b = FinSeq::new(vec![int(1), int(-1), int(2)]);
    for (kind, r) in [(SynthKind::SeqTail, int(1)), (SynthKind::SeqTail, int(2))] {
        let c = check(kind, Operand::Seq(a.clone()), Operand::Seq(b.clone()), r);
        assert!(c.passed(), "{kind}");
    }
    let b = FinSeq::new(vec![int(-1), int(2), int(0), int(1)]);
    let c = check(SynthKind::SeqHead, Operand::Seq(a), Operand::Seq(b), int(1));
    assert!(c.passed());
}

#[test]
fn seq_tail_rejects_small_p() {
    let a = FinSeq::from_ints(&[1]);
    assert!(synth_seq_tail(&a, &a, &frac(1, 2)).unwrap_err().is_precondition());
}

#[test]
fn direct_sum_law_and_json() {
    let f = sf(&[(int(1), int(3)), (int(2), int(1))]);
    let g = sf(&[(int(1), int(2)), (int(1), int(2)), (int(1), int(1))]);
    let op = synth_head_weak(&f, &g, &int(1)).unwrap();
    for p in [NormIndex::Zero, NormIndex::Finite(int(1)), NormIndex::Finite(int(2)), NormIndex::Infinity] {
        let e = op_norm(&op, &p).unwrap();
        let sup = e.blocks.iter().fold(Enclosure::zero(), |acc, b| acc.max(b));
        assert_eq!(sup, e.value);
    }
    let json = serde_json::to_string(&op).unwrap();
    let back: OperatorExpr = serde_json::from_str(&json).unwrap();
    assert_eq!(back, op);
}

#[test]
fn mixed_domains_rejected() {
    let op = OperatorExpr::compose(OperatorExpr::identity(), OperatorExpr::seq_identity(2));
    assert!(matches!(compile(&op), Err(Error::Carrier(_))));
    let f = Operand::Seq(FinSeq::from_ints(&[1]));
    assert!(matches!(apply(&OperatorExpr::identity(), &f), Err(Error::Carrier(_))));
}

#[test]
fn overlapping_direct_sum_rejected() {
    let blk = |a: i64, b: i64| Block {
        input: Carrier::Set(IntervalSet::single(Interval::new(int(a), int(b)))),
        output: Carrier::Set(IntervalSet::single(Interval::new(int(a), int(b)))),
        op: OperatorExpr::mult(StepFunction::indicator(int(a), int(b), int(1))),
    };
    let op = OperatorExpr::DirectSum(vec![blk(0, 2), blk(1, 3)]);
    assert!(matches!(compile(&op), Err(Error::Carrier(_))));
}

#[test]
fn contraction_identity_and_subst() {
    let mut rng = rng_from_seed(3);
    let samples: Vec<StepFunction> = (0..20).map(|_| random_step(&mut rng, 6, false)).collect();
    let rep = lp_contraction_check(&OperatorExpr::identity(), &int(1), &int(2), &samples).unwrap();
    assert_eq!(rep.max_ratio_upper, int(1));
}

fn exponents() -> impl Strategy<Value = Rat> {
    prop_oneof![Just(frac(1, 2)), Just(int(1)), Just(int(2))]
}

fn continuous_kind() -> impl Strategy<Value = SynthKind> {
    prop_oneof![
        Just(SynthKind::HeadEqual),
        Just(SynthKind::TailEqual),
        Just(SynthKind::HeadWeak),
        Just(SynthKind::TailWeak)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn continuous_synthesis_postconditions(seed in any::<u64>(), kind in continuous_kind(), r in exponents(), size in 1usize..6) {
        let (f, g) = gen_pair(seed, &OrderKind::new(kind.order_tag(), r.clone()), size).unwrap();
        prop_assume!(kind != SynthKind::TailWeak || (f.tail().is_zero() && g.tail().is_zero()));
        let c = check(kind, Operand::Step(f), Operand::Step(g), r);
        prop_assert!(c.passed(), "{:?}", c);
    }

    #[test]
    fn sequence_synthesis_postconditions(seed in any::<u64>(), head in any::<bool>(), p in prop_oneof![Just(int(1)), Just(int(2))], size in 1usize..7, scrambled in any::<bool>()) {
        let tag = if head { OrderTag::HeadWeak } else { OrderTag::TailWeak };
        let kind = if head { SynthKind::SeqHead } else { SynthKind::SeqTail };
        let mut rng = rng_from_seed(seed);
        let (a, b) = gen_seq_pair_with(&mut rng, tag, size, &p, scrambled).unwrap();
        let c = check(kind, Operand::Seq(a), Operand::Seq(b), p);
        prop_assert!(c.passed(), "{:?}", c);
    }

    #[test]
    fn bicontraction_contracts_lp(seed in any::<u64>(), pq in prop_oneof![Just((int(1), int(2))), Just((frac(1, 2), int(1)))]) {
        let (p, q) = pq;
        let (f, g) = gen_pair(seed, &OrderKind::new(OrderTag::TailWeak, q.clone()), 4).unwrap();
        prop_assume!(f.tail().is_zero() && g.tail().is_zero());
        let t = synth_tail_weak(&f, &g, &q).unwrap();
        let s = scale_to_bicontraction(&t, &q).unwrap();
        let mut rng = rng_from_seed(seed ^ 0x5eed);
        let samples: Vec<StepFunction> = (0..8).map(|_| random_step(&mut rng, 6, false)).collect();
        let rep = lp_contraction_check(&s, &p, &q, &samples).unwrap();
        prop_assert!(rep.max_ratio_upper <= int(1) + frac(1, 1 << 30));
    }
}
