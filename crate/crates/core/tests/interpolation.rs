use majorn_core::generate::{gen_decompose_pair, random_powered_step, random_step, rng_from_seed};
use majorn_core::interpolation::*;
use majorn_core::oracle::{parse_oracle, Linf, Lp};
use majorn_core::rat::{frac, int};
use majorn_core::stepfn::step;
use majorn_core::*;
use num_traits::{Signed, Zero};
use proptest::prelude::*;

fn chi(a: i64, b: i64, c: Rat) -> StepFunction {
    StepFunction::indicator(int(a), int(b), c)
}

/// `inf_c ∫(|f| - c)_+ + t c` over `c ∈ {0} ∪ values(|f|)`; the objective is
/// convex and piecewise affine in `c` with kinks only at those values.
fn k_l1_linf_oracle(f: &StepFunction, t: &Rat) -> Rat {
    let mut cands: Vec<Rat> = f.pieces().iter().map(|p| p.val.abs()).collect();
    cands.push(Rat::zero());
    cands
        .iter()
        .map(|c| {
            let excess: Rat = f.pieces().iter().map(|p| (p.val.abs() - c).max(Rat::zero()) * &p.len).sum();
            excess + t * c
        })
        .min()
        .unwrap()
}

/// `min Σ_{cells ∉ S} |v|^q len` over subsets `S` of cells with total length `<= t`.
fn k_l0_lq_oracle(f: &StepFunction, t: &Rat, q: &Rat) -> Rat {
    let cells: Vec<(Rat, Rat)> =
        f.pieces().iter().map(|p| (p.len.clone(), exact::pow_required(&p.val.abs(), q).unwrap() * &p.len)).collect();
    let total: Rat = cells.iter().map(|c| &c.1).sum();
    let mut best = total.clone();
    for mask in 0u32..(1 << cells.len()) {
        let (mut len, mut mass) = (Rat::zero(), Rat::zero());
        for (i, c) in cells.iter().enumerate() {
            if mask >> i & 1 == 1 {
                len += &c.0;
                mass += &c.1;
            }
        }
        if len <= *t {
            best = best.min(&total - mass);
        }
    }
    best
}

/// `∫_0^c μ(f)^p` by sorting the pieces directly.
fn head_oracle(f: &StepFunction, c: &Rat, p: &Rat) -> Rat {
    let mut v: Vec<(Rat, Rat)> = f.pieces().iter().map(|x| (x.val.abs(), x.len.clone())).collect();
    v.sort_by(|a, b| b.0.cmp(&a.0));
    let mut acc = Rat::zero();
    let mut left = c.clone();
    for (val, len) in v {
        let take = if len < left { len } else { left.clone() };
        acc += exact::pow_required(&val, p).unwrap() * &take;
        left -= take;
    }
    acc
}

#[test]
fn k_functional_examples() {
    assert_eq!(k_l1_linf(&chi(0, 2, int(1)), &int(1)), int(1));
    assert_eq!(k_l1_linf(&chi(0, 1, int(2)), &int(3)), int(2));
    assert_eq!(k_l0_lq(&chi(0, 2, int(1)), &int(1), &int(1)).unwrap(), Extended::exact(int(1)));
    let f = step(&[(int(1), int(3)), (frac(1, 2), int(0)), (int(2), int(1))]);
    for t in [int(3), int(7)] {
        assert_eq!(k_l0_lq(&f, &t, &int(2)).unwrap(), Extended::exact(int(0)));
    }
}

#[test]
fn holmstedt_examples() {
    let f = chi(0, 1, int(1));
    let h = holmstedt_pair(&f, &int(1), &int(1), &int(2)).unwrap();
    assert_eq!(h.head, Enclosure::exact(int(1)));
    assert_eq!(h.tail, Extended::exact(int(0)));
    for t in [int(2), int(10), int(1000)] {
        let h = holmstedt_pair(&f, &t, &int(1), &int(2)).unwrap();
        assert_eq!(h.head, Enclosure::exact(int(1)));
    }
    // small t: cut t^2, head t^2, tail t (1 - t^2)^{1/2}
    let h = holmstedt_pair(&f, &frac(3, 5), &int(1), &int(2)).unwrap();
    assert_eq!(h.head, Enclosure::exact(frac(9, 25)));
    assert_eq!(h.tail, Extended::exact(frac(12, 25)));
    let kf = KFunctional::new(Couple::LpLq, Some(int(1)), Some(int(2))).unwrap();
    let v = kf.eval(&f, &frac(3, 5)).unwrap();
    assert!(v.equivalent_only);
    assert_eq!(v.value, Extended::exact(frac(21, 25)));
}

#[test]
fn holmstedt_irrational_cut_is_enclosed() {
    // p = 1, q = 3: α = 3/2, cut 2^{3/2}
    let f = step(&[(int(2), int(2)), (int(2), int(1))]);
    let h = holmstedt_pair(&f, &int(2), &int(1), &int(3)).unwrap();
    let c = 8f64.sqrt();
    let head = 2.0 * 2.0 + (c - 2.0);
    let tail = 2.0 * (4.0 - c).cbrt();
    assert!(h.cut.lo < h.cut.hi);
    assert!((h.head.midpoint_f64() - head).abs() < 1e-12);
    assert!((h.tail.to_f64() - tail).abs() < 1e-12);
}

#[test]
fn couple_parsing() {
    assert_eq!("l0lq".parse::<Couple>().unwrap(), Couple::L0Lq);
    assert!("l2l3".parse::<Couple>().is_err());
    assert!(KFunctional::new(Couple::L0Lq, None, None).is_err());
    assert!(KFunctional::new(Couple::LpLq, Some(int(2)), Some(int(1))).is_err());
}

#[test]
fn decompose_dominated_and_identical() {
    let f = step(&[(int(1), int(3)), (int(2), int(2)), (int(1), int(1))]);
    let g = step(&[(int(2), int(2)), (int(1), int(1))]);
    for (f, g) in [(f.clone(), g), (f.clone(), f.clone())] {
        let d = decompose_pq(&f, &g, &int(1), &int(2)).unwrap();
        assert_eq!(d.a, vec![Interval::unbounded(int(0))]);
        assert_eq!(d.h1, g);
        assert!(verify_decomposition(&f, &g, &int(1), &int(2), &d).unwrap().passed());
    }
}

#[test]
fn decompose_mixed_instance() {
    // g = 2 near 0: the head inequality fails on (0, 1), the tail one holds
    let f = chi(0, 4, int(1));
    let g = step(&[(frac(1, 2), int(2))]);
    let d = decompose_pq(&f, &g, &int(1), &int(2)).unwrap();
    assert_eq!(d.a, vec![Interval::new(int(0), int(0)), Interval::unbounded(int(1))]);
    // on (0, 1) h1 takes g(1 - 0) = 0
    assert_eq!(d.h1, StepFunction::zero());
    assert_eq!(d.g2, g);
    let c = verify_decomposition(&f, &g, &int(1), &int(2), &d).unwrap();
    assert!(c.passed(), "{c:?}");
}

#[test]
fn decompose_rejects_with_witness() {
    let f = chi(0, 1, int(1));
    let g = chi(0, 1, int(2));
    let c = check_alternative(&f, &g, &int(1), &int(2)).unwrap();
    assert!(!c.holds);
    let t = c.witness.unwrap();
    assert!(t.is_positive() && t < int(1));
    assert!(matches!(decompose_pq(&f, &g, &int(1), &int(2)), Err(Error::Precondition(_))));
    assert!(matches!(
        decompose_pq(&step(&[(int(1), int(1)), (int(1), int(2))]), &f, &int(1), &int(2)),
        Err(Error::Precondition(_))
    ));
}

#[test]
fn probe_lp_head_weak_is_monotone() {
    let o = Lp::new(int(2)).unwrap();
    let v = membership_probe(&o, &OrderKind::new(OrderTag::HeadWeak, int(2)), ProbeDomain::Function, 60, 7).unwrap();
    assert_eq!(v.errors, 0);
    assert!(v.max_ratio <= 1.0 + 1e-15, "{}", v.max_ratio);
    assert!(!v.divergent);
}

#[test]
fn probe_linf_diverges_under_tail_weak_only() {
    let kind = OrderKind::new(OrderTag::TailWeak, int(1));
    let v = membership_probe(&Linf, &kind, ProbeDomain::Function, 20, 1).unwrap();
    assert!(v.divergent);
    assert!(v.family.windows(2).all(|w| w[1].ratio_lo > w[0].ratio_hi));
    let kind = OrderKind::new(OrderTag::HeadWeak, int(1));
    let v = membership_probe(&Linf, &kind, ProbeDomain::Function, 20, 1).unwrap();
    assert!(!v.divergent);
    assert!(v.max_ratio <= 1.0);
}

#[test]
fn probe_lq_sequences_tail_weak() {
    let o = parse_oracle("lp:2").unwrap();
    let v = membership_probe(o.as_ref(), &OrderKind::new(OrderTag::TailWeak, int(2)), ProbeDomain::Sequence, 60, 3)
        .unwrap();
    assert_eq!(v.errors, 0);
    assert!(v.max_ratio <= 1.0 + 1e-15, "{}", v.max_ratio);
    assert!(!v.divergent);
}

fn exponent_pairs() -> impl Strategy<Value = (Rat, Rat)> {
    prop_oneof![Just((int(1), int(2))), Just((frac(1, 2), int(1))), Just((int(1), int(3))), Just((int(2), int(4)))]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn k_l1_linf_matches_split_oracle(seed in any::<u64>(), tn in 0i64..40) {
        let mut rng = rng_from_seed(seed);
        let f = random_step(&mut rng, 8, false);
        let t = frac(tn, 4);
        prop_assert_eq!(k_l1_linf(&f, &t), k_l1_linf_oracle(&f, &t));
    }

    #[test]
    fn k_l0_lq_matches_subset_oracle(seed in any::<u64>(), qi in 0usize..3) {
        let q = [int(1), int(2), frac(1, 2)][qi].clone();
        let mut rng = rng_from_seed(seed);
        let f = random_powered_step(&mut rng, 8, &q);
        let mu = f.rearrange();
        for t in mu.breakpoints() {
            let k = k_l0_lq(&f, &t, &q).unwrap();
            prop_assert_eq!(k, Extended::exact(k_l0_lq_oracle(&f, &t, &q)));
        }
    }

    #[test]
    fn k_functionals_are_monotone(seed in any::<u64>()) {
        let mut rng = rng_from_seed(seed);
        let f = random_powered_step(&mut rng, 8, &int(1));
        let ts: Vec<Rat> = (0..20).map(|k| frac(k, 3)).collect();
        for w in ts.windows(2) {
            prop_assert!(k_l1_linf(&f, &w[0]) <= k_l1_linf(&f, &w[1]));
            let (a, b) = (k_l0_lq(&f, &w[0], &int(2)).unwrap(), k_l0_lq(&f, &w[1], &int(2)).unwrap());
            prop_assert_eq!(b.le(&a), Some(true));
        }
    }

    #[test]
    fn holmstedt_terms_match_integrals(seed in any::<u64>(), tn in 1i64..20) {
        let mut rng = rng_from_seed(seed);
        for (p, q) in [(int(1), int(2)), (frac(1, 2), int(1))] {
            let f = random_powered_step(&mut rng, 8, &p);
            let t = frac(tn, 4);
            let cut = exact::pow_required(&t, &holmstedt_alpha(&p, &q).unwrap()).unwrap();
            let h = holmstedt_pair(&f, &t, &p, &q).unwrap();
            let head = exact::pow_enclosure(&head_oracle(&f, &cut, &p), &p.recip()).unwrap();
            prop_assert_eq!(&h.head, &head);
            let total = head_oracle(&f, &f.span(), &q);
            let tail_pow = total - head_oracle(&f, &cut, &q);
            let tail = exact::pow_enclosure(&tail_pow, &q.recip()).unwrap().scale(&t);
            prop_assert_eq!(h.tail, Extended::Finite(tail));
        }
    }

    #[test]
    fn decomposition_postconditions(seed in any::<u64>(), (p, q) in exponent_pairs(), size in 1usize..8) {
        let mut rng = rng_from_seed(seed);
        let (f, g) = gen_decompose_pair(&mut rng, &p, &q, size).unwrap();
        prop_assert!(check_alternative(&f, &g, &p, &q).unwrap().holds);
        let d = decompose_pq(&f, &g, &p, &q).unwrap();
        let c = verify_decomposition(&f, &g, &p, &q, &d).unwrap();
        prop_assert!(c.passed(), "{:?}\nf = {}\ng = {}", c, f, g);
        prop_assert!(d.h1.add(&d.h2).sub(&g).is_nonnegative());
    }
}
