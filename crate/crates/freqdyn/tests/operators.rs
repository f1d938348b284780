use freqdyn::operators::{apply_backward, apply_forward, shift_word, shift_word2, SparseVec};
use freqdyn::operators::{
    block_transition, cplus_common_verdict, ctype_apply, ctype_period, CPlusVerdict, CTypeFlavor,
    CTypeParams,
};
use freqdyn::shift_analysis::WeightSeq;
use freqdyn::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const P: f64 = 2.0;

fn e(k: u64) -> SparseVec {
    SparseVec::basis(k, P)
}

fn close(a: &SparseVec, b: &SparseVec, tol: f64) -> bool {
    a.max_abs_diff(b) <= tol
}

#[test]
fn sparse_vec_basics() {
    assert_eq!(e(7).norm(), 1.0);
    let x = SparseVec::from_pairs([(0, 3.0), (4, 4.0), (9, 0.0), (2, 1e-301)], P);
    assert_eq!(x.support(), vec![0, 4]);
    assert!((x.norm() - 5.0).abs() < 1e-15);
    let y = SparseVec::from_pairs([(0, 1.0), (1, 1.0)], 1.0);
    assert_eq!(y.norm(), 2.0);
    let mut z = e(3);
    z.add_at(3, -1.0);
    assert!(z.is_empty());
}

#[test]
fn sparse_vec_csv_round_trip() {
    let x = SparseVec::from_pairs([(0, 0.25), (5, -3.5), (1_000_000_000, 1e-20)], P);
    let text = x.to_csv(|c| format!("{c:e}"));
    assert!(text.starts_with("index,coefficient\n"));
    assert_eq!(SparseVec::from_csv(&text, P).unwrap(), x);
    assert!(SparseVec::from_csv("index,coefficient\n1,x\n", P).is_err());
    assert!(SparseVec::from_csv("index,coefficient\n-1,2\n", P).is_err());
}

#[test]
fn backward_examples() {
    let one = WeightSeq::constant(1.0).unwrap();
    assert_eq!(apply_backward(&one, &e(5)), e(4));
    let two = WeightSeq::constant(2.0).unwrap();
    assert!(apply_backward(&two, &e(0)).is_empty());
    let r = WeightSeq::rational2();
    let x = SparseVec::from_pairs([(1, 1.0), (2, 1.0)], P);
    // entry k is w_{k+1} x_{k+1}: w_1 = 4, w_2 = 9/4
    let want = SparseVec::from_pairs([(0, 4.0), (1, 9.0 / 4.0)], P);
    assert!(close(&apply_backward(&r, &x), &want, 1e-14));
    let shifted = SparseVec::from_pairs([(2, 1.0), (3, 1.0)], P);
    let want = SparseVec::from_pairs([(1, 9.0 / 4.0), (2, 16.0 / 9.0)], P);
    assert!(close(&apply_backward(&r, &shifted), &want, 1e-14));
}

#[test]
fn forward_examples() {
    let one = WeightSeq::constant(1.0).unwrap();
    assert_eq!(apply_forward(&one, &e(0)), e(1));
    let two = WeightSeq::constant(2.0).unwrap();
    assert_eq!(
        apply_forward(&two, &e(0)),
        SparseVec::from_pairs([(1, 0.5)], P)
    );
}

fn iterate(w: &WeightSeq, m: u64, l: u64, k: u64) -> SparseVec {
    let mut x = e(k);
    for _ in 0..l {
        x = apply_forward(w, &x);
    }
    for _ in 0..m {
        x = apply_backward(w, &x);
    }
    x
}

#[test]
fn shift_word_examples() {
    let w = WeightSeq::rational2();
    assert_eq!(shift_word(&w, 0, 0, 7), Some((1.0, 7)));
    assert_eq!(
        shift_word(&WeightSeq::constant(1.0).unwrap(), 3, 1, 1),
        None
    );
    let two = WeightSeq::constant(2.0).unwrap();
    let (c, i) = shift_word(&two, 2, 5, 0).unwrap();
    assert_eq!(i, 3);
    assert!((c - 0.125).abs() < 1e-12);
    assert!((iterate(&two, 2, 5, 0).get(3) - c).abs() < 1e-12);
}

#[test]
fn shift_word_handles_huge_exponents() {
    let w = WeightSeq::rational2();
    let (c, i) = shift_word(&w, 1_000_000_000, 1_000_000_000, 3).unwrap();
    assert_eq!(i, 3);
    // (k+l+1)²/(k+1)² · (k+1)²/(k+l+1)² telescopes to 1
    assert!((c - 1.0).abs() < 1e-9);
    let two = WeightSeq::constant(2.0).unwrap();
    let three = WeightSeq::constant(3.0).unwrap();
    let (c, i) = shift_word2(&three, &two, 2, 3, 1).unwrap();
    assert_eq!(i, 2);
    assert!((c - 9.0 / 8.0).abs() < 1e-12);
}

#[test]
fn shift_word_matches_brute_force() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let values: Vec<f64> = (0..80).map(|_| rng.gen_range(0.5..2.0)).collect();
        let w = WeightSeq::tabulated(values).unwrap();
        for k in 0..=20 {
            for l in 0..=30 {
                let mut x = e(k);
                for _ in 0..l {
                    x = apply_forward(&w, &x);
                }
                for m in 0..=30 {
                    match shift_word(&w, m, l, k) {
                        None => assert!(x.is_empty() && m > k + l),
                        Some((c, i)) => {
                            assert_eq!(x.support(), vec![i]);
                            let got = x.get(i);
                            assert!(
                                (c - got).abs() <= 1e-12 * got.abs().max(1.0),
                                "m={m} l={l} k={k}"
                            );
                        }
                    }
                    x = apply_backward(&w, &x);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn backward_inverts_forward(
        entries in proptest::collection::vec((0u64..500, -1e3f64..1e3), 0..20),
        which in 0usize..4,
    ) {
        let w = match which {
            0 => WeightSeq::rational2(),
            1 => WeightSeq::costakis_sambarino(0.7).unwrap(),
            2 => WeightSeq::four_block(1.0, 2.0, 3.0, 4.0).unwrap(),
            _ => WeightSeq::constant(0.3).unwrap(),
        };
        let x = SparseVec::from_pairs(entries, P);
        let y = apply_backward(&w, &apply_forward(&w, &x));
        prop_assert_eq!(y.support(), x.support());
        for (k, c) in x.iter() {
            prop_assert!((y.get(k) - c).abs() <= 1e-12 * c.abs());
        }
    }

    #[test]
    fn ctype_apply_is_linear(
        xs in proptest::collection::vec((0u64..294, -10f64..10.0), 1..6),
        ys in proptest::collection::vec((0u64..294, -10f64..10.0), 1..6),
        a in -3f64..3.0,
        b in -3f64..3.0,
        t in 0u64..40,
    ) {
        let params = CTypeParams::reference(3);
        let x = SparseVec::from_pairs(xs, P);
        let y = SparseVec::from_pairs(ys, P);
        let lhs = ctype_apply(&params, &x.scaled(a).axpy(b, &y), t).unwrap();
        let rhs = ctype_apply(&params, &x, t).unwrap().scaled(a).axpy(b, &ctype_apply(&params, &y, t).unwrap());
        prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-10 * (1.0 + lhs.norm()));
    }
}

/// Two blocks `[0, 3)` and `[3, 7)` with `w_j = j + 1`, `v ≡ 1/2`, `φ ≡ 0`.
fn small_instance() -> CTypeParams {
    CTypeParams::general(vec![0, 3, 7], |_| 0, |_| 0.5, |j| j as f64 + 1.0).unwrap()
}

#[test]
fn ctype_hand_evaluation() {
    let t = small_instance();
    assert_eq!(t.flavor(), CTypeFlavor::General);
    assert_eq!(
        ctype_apply(&t, &e(0), 1).unwrap(),
        SparseVec::from_pairs([(1, 2.0)], P)
    );
    assert_eq!(
        ctype_apply(&t, &e(1), 1).unwrap(),
        SparseVec::from_pairs([(2, 3.0)], P)
    );
    let wrap0 = ctype_apply(&t, &e(2), 1).unwrap();
    assert!(close(
        &wrap0,
        &SparseVec::from_pairs([(0, -1.0 / 6.0)], P),
        1e-15
    ));
    assert_eq!(
        ctype_apply(&t, &e(4), 1).unwrap(),
        SparseVec::from_pairs([(5, 6.0)], P)
    );
    let wrap1 = ctype_apply(&t, &e(6), 1).unwrap();
    assert!(close(
        &wrap1,
        &SparseVec::from_pairs([(0, 0.5), (3, -1.0 / 210.0)], P),
        1e-15
    ));
    let x = SparseVec::from_pairs([(1, 2.0), (5, -1.0)], P);
    assert_eq!(ctype_apply(&t, &x, 0).unwrap(), x);
    assert!(matches!(ctype_apply(&t, &e(7), 1), Err(Error::Horizon(_))));
}

#[test]
fn ctype_periods() {
    let t = CTypeParams::reference(3);
    assert_eq!(ctype_period(&t, &e(0)).unwrap(), 2 * t.b(1));
    let b1 = t.b(1);
    assert!(close(&ctype_apply(&t, &e(b1), 8).unwrap(), &e(b1), 1e-9));
    let same = e(t.b(2)).axpy(1.0, &e(t.b(3)));
    assert_eq!(ctype_period(&t, &same).unwrap(), 32);
    let mixed = e(t.b(1)).axpy(1.0, &e(t.b(2)));
    assert_eq!(ctype_period(&t, &mixed).unwrap(), 32);
    assert!(close(&ctype_apply(&t, &mixed, 32).unwrap(), &mixed, 1e-9));
    assert!(matches!(
        ctype_period(&t, &e(t.end())),
        Err(Error::Horizon(_))
    ));
}

#[test]
fn ctype_periodicity_first_eight_blocks() {
    let t = CTypeParams::reference(3);
    assert_eq!(t.num_blocks(), 8);
    for k in 0..t.b(8) {
        let x = e(k);
        let period = ctype_period(&t, &x).unwrap();
        let y = ctype_apply(&t, &x, period).unwrap();
        assert!(close(&y, &x, 1e-9), "e_{k} with period {period}");
    }
}

#[test]
fn block_transition_examples() {
    let t = CTypeParams::reference(3);
    let start = t.b(2) - 1;
    let oracle = ctype_apply(&t, &e(start), 1).unwrap();
    assert!(close(
        &block_transition(&t, 1, 0, 1, P).unwrap(),
        &oracle,
        1e-12
    ));

    let big = t.big_delta(2).unwrap();
    let start = t.b(2 + 1 + 1) - big;
    let oracle = ctype_apply(&t, &e(start), big).unwrap();
    assert!(close(
        &block_transition(&t, 2, 1, big, P).unwrap(),
        &oracle,
        1e-9
    ));
}

#[test]
fn block_transition_matches_iteration_on_every_admissible_index() {
    let t = CTypeParams::reference(3);
    for k in 1..=3u32 {
        let half = 1u64 << (k - 1);
        let big = t.big_delta(k).unwrap();
        for l in 0..half {
            for m in 1..=big {
                let n = half + l;
                let closed = block_transition(&t, k, l, m, P).unwrap();
                let iterated = ctype_apply(&t, &e(t.b(n + 1) - m), m).unwrap();
                assert!(close(&closed, &iterated, 1e-9), "k={k} l={l} m={m}");
                assert_eq!(closed.support(), {
                    let mut s = vec![t.b(l), t.b(n)];
                    s.sort();
                    s
                });
                assert!(closed.get(t.b(l)) > 0.0 && closed.get(t.b(n)) < 0.0);
            }
        }
    }
}

#[test]
fn block_transition_cplus_tables() {
    let big = vec![4u64, 16];
    let w: Vec<Vec<f64>> = big
        .iter()
        .map(|&d| (1..d).map(|i| 1.0 + 0.25 * (i % 3) as f64).collect())
        .collect();
    let t = CTypeParams::cplus(vec![0.5, 0.125], w, big.clone(), 2).unwrap();
    assert_eq!(t.flavor(), CTypeFlavor::CPlus);
    for k in 1..=2u32 {
        let half = 1u64 << (k - 1);
        for l in 0..half {
            for m in 1..=big[k as usize - 1] {
                let n = half + l;
                let closed = block_transition(&t, k, l, m, P).unwrap();
                let iterated = ctype_apply(&t, &e(t.b(n + 1) - m), m).unwrap();
                assert!(close(&closed, &iterated, 1e-12), "k={k} l={l} m={m}");
            }
        }
    }
}

#[test]
fn block_transition_rejects_out_of_range() {
    let t = CTypeParams::reference(3);
    assert!(matches!(
        block_transition(&t, 0, 0, 1, P),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        block_transition(&t, 4, 0, 1, P),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        block_transition(&t, 2, 2, 1, P),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        block_transition(&t, 2, 0, 0, P),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        block_transition(&t, 2, 0, 17, P),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        block_transition(&small_instance(), 1, 0, 1, P),
        Err(Error::Domain(_))
    ));
}

#[test]
fn validate_rejects_single_mutations() {
    let t = CTypeParams::reference(3);
    t.validate().unwrap();
    let mut b = t.b_table().to_vec();
    b[2] += 1; // block 1 of length 5 is not a multiple of 2·2
    for x in b.iter_mut().skip(3) {
        *x += 1;
    }
    assert!(matches!(t.with_b(b).validate(), Err(Error::Validation(_))));
    assert!(matches!(
        t.with_phi(|n| n).validate(),
        Err(Error::Validation(_))
    ));
    assert!(matches!(
        t.with_v(|n| if n == 3 { 0.0 } else { 0.5 }).validate(),
        Err(Error::Validation(_))
    ));
    let b1_one = CTypeParams::general(vec![0, 1, 3], |_| 0, |_| 0.5, |_| 1.0).unwrap();
    assert!(matches!(b1_one.validate(), Err(Error::Validation(_))));
}

#[test]
fn config_round_trip() {
    let t = CTypeParams::reference(5);
    let text = t.to_config_string().unwrap();
    let back = CTypeParams::from_config_str(&text).unwrap();
    assert_eq!(back.b_table(), t.b_table());
    for k in 1..=5 {
        assert_eq!(back.tau_delta(k), t.tau_delta(k));
    }
    let cplus = "flavor = cplus\nb_horizon = 1\nsigma_delta[1] = 4\nv[1] = 0.5\nw[1] = 2, 1, 1\n";
    let c = CTypeParams::from_config_str(cplus).unwrap();
    assert_eq!(c.flavor(), CTypeFlavor::CPlus);
    assert_eq!(c.level_weight(1, 1), Some(2.0));
    assert!(CTypeParams::from_config_str("flavor = other\nb_horizon = 0\n").is_err());
    assert!(CTypeParams::from_config_str("b_horizon\n").is_err());
}

fn cplus_one_from(
    tau: impl Fn(u64) -> u64,
    delta: impl Fn(u64) -> u64,
    levels: u32,
) -> CTypeParams {
    let big: Vec<u64> = (1..=levels).map(|k| 4u64.pow(k)).collect();
    let t = big.iter().map(|&d| tau(d)).collect();
    let dl = big.iter().map(|&d| delta(d)).collect();
    CTypeParams::cplus_one(t, dl, big, 2).unwrap()
}

fn round_div(a: u64, b: u64) -> u64 {
    (a + b / 2) / b
}

#[test]
fn cplus_verdict_single_member() {
    let v = cplus_common_verdict(&[CTypeParams::reference(5)], 0.1, 5).unwrap();
    match v {
        CPlusVerdict::HypothesesHold {
            ratio, witnesses, ..
        } => {
            assert_eq!(ratio, 0.25);
            assert_eq!(witnesses.len(), 9);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn cplus_verdict_thin_gap_fails() {
    let t = cplus_one_from(|d| d / 4, |d| d / 4 + 1, 5);
    assert!(matches!(
        cplus_common_verdict(&[t], 0.05, 5).unwrap(),
        CPlusVerdict::Fail(_)
    ));
}

#[test]
fn cplus_verdict_two_members() {
    let a = CTypeParams::reference(5);
    let b = cplus_one_from(|d| round_div(d, 6), |d| round_div(d, 3), 5);
    match cplus_common_verdict(&[a, b], 0.05, 5).unwrap() {
        CPlusVerdict::HypothesesHold {
            ratio,
            block_log2_bounds,
            ..
        } => {
            assert!((ratio - 1.0 / 6.0).abs() < 0.01, "{ratio}");
            assert_eq!(block_log2_bounds.len(), 4);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn cplus_verdict_validation() {
    let a = CTypeParams::reference(5);
    let other_b = CTypeParams::reference(4);
    assert!(matches!(
        cplus_common_verdict(&[a.clone(), other_b], 0.1, 4),
        Err(Error::Validation(_))
    ));
    assert!(matches!(
        cplus_common_verdict(&[], 0.1, 4),
        Err(Error::Validation(_))
    ));
    assert!(matches!(
        cplus_common_verdict(std::slice::from_ref(&a), 1.5, 4),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        cplus_common_verdict(&[a], 0.1, 9),
        Err(Error::Domain(_))
    ));
}
