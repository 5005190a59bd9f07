use dpl_core::dyadic::haar_indices;
use dpl_core::lab::{
    bellman_b, bellman_lmwce_check, bilinear_embedding_check, carleson_sum, fit_slope,
    induction_in_scales_check, mmte_suite, proposition_suite, scaling_experiment,
    weighted_carleson_embedding_check, BellmanPoint, BilinearVariant, CarlesonSequence,
    InductionInstance, Proposition, ScalingOperator, ScalingRow, Variant,
};
use dpl_core::sample::{random_grid, random_weight, rng};
use dpl_core::weights::{
    apd_characteristic, cascade_weight, log_symbol, power_weight, DEFAULT_CASCADE_DECAY,
};
use dpl_core::{DyadicCube, Error, GridFunction, HaarIndex, NormMethod, SignPattern, Weight};
use proptest::prelude::*;
use rand::Rng;

const PROPOSITIONS: [Proposition; 4] = [
    Proposition::Wp1,
    Proposition::Wp2,
    Proposition::Wp3,
    Proposition::Wp4,
];

fn random_sequence(dim: usize, depth: usize, seed: u64) -> CarlesonSequence {
    let mut r = rng(seed);
    let count = (1usize << (dim * depth)) - 1;
    CarlesonSequence::new(dim, depth, (0..count).map(|_| r.random::<f64>()).collect()).unwrap()
}

#[test]
fn carleson_sums_match_rectangle_inclusion() {
    for (n, depth, seed) in [(1, 5, 1), (2, 3, 2), (3, 2, 3)] {
        let alpha = random_sequence(n, depth, seed);
        let kernel = |idx: &HaarIndex| 1.0 + idx.j() as f64 * 0.1 + idx.cube().level() as f64;
        let all: Vec<HaarIndex> = haar_indices(n, depth).collect();
        let mut best: f64 = 0.0;
        for base in &all {
            let e = base.e_set();
            let brute: f64 = all
                .iter()
                .filter(|idx| e.contains(&idx.e_set()))
                .map(|idx| alpha.get(idx).unwrap() * kernel(idx))
                .sum::<f64>()
                / base.e_volume();
            let got = carleson_sum(&alpha, base, kernel).unwrap();
            assert!((got - brute).abs() <= 1e-12 * brute.max(1.0), "{base}");
            best = best.max(carleson_sum(&alpha, base, |_| 1.0).unwrap());
        }
        assert!((alpha.carleson_constant() - best).abs() < 1e-12 * best);
    }
    assert!(matches!(
        CarlesonSequence::new(1, 1, vec![-1.0]),
        Err(Error::NegativeCarleson { index: 0, .. })
    ));
    assert!(CarlesonSequence::new(1, 2, vec![1.0]).is_err());
}

#[test]
fn symbol_sequence_constant_is_comparable_to_bmo() {
    let b = random_grid(2, 3, 5);
    let alpha = CarlesonSequence::from_symbol(&b);
    let l2 = dpl_core::weights::bmod_norm(&b, dpl_core::weights::BmoVariant::L2);
    // The sets E_{j,Q} include the cubes, and |Q| <= 2^{n-1} |E_{j,Q}|.
    assert!(alpha.carleson_constant() >= l2 * (1.0 - 1e-12));
    assert!(alpha.carleson_constant() <= 2.0 * l2 * (1.0 + 1e-12));
}

#[test]
fn constant_weight_makes_difference_sums_vanish() {
    for (n, depth) in [(1, 4), (2, 3)] {
        let w = Weight::constant(n, depth, 3.5);
        for which in [Proposition::Wp2, Proposition::Wp3, Proposition::Wp4] {
            for variant in [Variant::Dyadic, Variant::Anisotropic] {
                let r = proposition_suite(&w, which, variant, None).unwrap();
                assert!(r.rows.iter().all(|row| row.lhs == 0.0), "{:?}", which);
                assert_eq!(r.empirical_constant, 0.0);
                assert!(r.passed());
            }
        }
        let m = mmte_suite(&w).unwrap();
        assert!(m.rows.iter().all(|row| row.lhs == 0.0));
    }
}

#[test]
fn two_cell_weight_by_hand() {
    // w = (1, 3): <w> = 2, <w^{-1}> = 2/3, [w]_{A_2} = 4/3, Delta w = -2.
    let w = Weight::new(GridFunction::new(1, 1, vec![1.0, 3.0]).unwrap()).unwrap();
    assert!((apd_characteristic(&w, 2.0).unwrap().value - 4.0 / 3.0).abs() < 1e-15);
    let expect = |which, lhs: f64, rhs: f64| {
        let r = proposition_suite(&w, which, Variant::Dyadic, None).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert!(
            (r.rows[0].lhs - lhs).abs() < 1e-14,
            "{which:?} lhs {}",
            r.rows[0].lhs
        );
        assert!(
            (r.rows[0].rhs - rhs).abs() < 1e-14,
            "{which:?} rhs {}",
            r.rows[0].rhs
        );
    };
    // (Delta w / <w>)^2 |E| = 1 on the single pair.
    expect(Proposition::Wp2, 2.0 / 3.0, 4.0 / 3.0 * 2.0 / 3.0);
    expect(Proposition::Wp3, 4.0 / 3.0, 4.0 / 3.0);
    expect(Proposition::Wp4, 2.0, 8.0 / 3.0);
    let alpha = CarlesonSequence::new(1, 1, vec![0.5]).unwrap();
    let r = proposition_suite(&w, Proposition::Wp1, Variant::Dyadic, Some(&alpha)).unwrap();
    // A = 0.5, so the left side is 0.5 * 2 and the right side 0.5 * 4/3 * 2.
    assert!((r.rows[0].lhs - 1.0).abs() < 1e-14);
    assert!((r.rows[0].rhs - 4.0 / 3.0).abs() < 1e-14);
    assert_eq!(
        proposition_suite(&w, Proposition::Wp1, Variant::Dyadic, None),
        Err(Error::MissingCarlesonSequence)
    );
    // mmte2: |Delta w| |Delta v| |E| = 2 * 2/3.
    let m = mmte_suite(&w).unwrap();
    let row = m.rows.iter().find(|r| r.region.ends_with("mmte2")).unwrap();
    assert!((row.lhs - 4.0 / 3.0).abs() < 1e-14);
}

fn weight_suite() -> Vec<Weight> {
    let mut out = Vec::new();
    for (n, depth) in [(1, 5), (2, 3)] {
        out.push(cascade_weight(n, depth, 0.5, 11, DEFAULT_CASCADE_DECAY).unwrap());
        out.push(power_weight(n, depth, 0.5).unwrap());
        out.push(power_weight(n, depth, -0.5).unwrap());
        out.push(random_weight(n, depth, 3));
    }
    out
}

#[test]
fn propositions_are_scale_invariant() {
    for w in weight_suite() {
        let scaled = w.scale(7.0).unwrap();
        let alpha = random_sequence(w.dim(), w.depth(), 9);
        for which in PROPOSITIONS {
            for variant in [Variant::Dyadic, Variant::Anisotropic] {
                let a = proposition_suite(&w, which, variant, Some(&alpha)).unwrap();
                let b = proposition_suite(&scaled, which, variant, Some(&alpha)).unwrap();
                let (x, y) = (a.empirical_constant, b.empirical_constant);
                assert!(x.is_finite() && x > 0.0);
                assert!(
                    (x - y).abs() <= 1e-10 * x,
                    "{which:?} {variant:?}: {x} vs {y}"
                );
            }
        }
    }
}

#[test]
fn first_proposition_within_its_constant() {
    for w in weight_suite() {
        let alpha = random_sequence(w.dim(), w.depth(), 4);
        for variant in [Variant::Dyadic, Variant::Anisotropic] {
            let r = proposition_suite(&w, Proposition::Wp1, variant, Some(&alpha)).unwrap();
            assert!(r.passed(), "{:?} {:?}", r.violations, r.empirical_constant);
            assert!(r.params["e1_constant"] <= 4.0);
        }
    }
}

#[test]
fn mmte_chain_and_constants() {
    for w in weight_suite() {
        let r = mmte_suite(&w).unwrap();
        assert!(r.passed(), "{:?}", r.violations);
        assert!(r.params["chain_ratio"] <= 1.0 + 1e-12);
        for k in 1..=3 {
            assert!(r.params[&format!("mmte{k}_constant")].is_finite());
        }
    }
}

#[test]
fn embeddings() {
    for (i, w) in weight_suite().into_iter().enumerate() {
        let (n, depth) = (w.dim(), w.depth());
        let alpha = random_sequence(n, depth, i as u64);
        let f = random_grid(n, depth, 100 + i as u64);
        let g = random_grid(n, depth, 200 + i as u64);
        let r = weighted_carleson_embedding_check(&alpha, &w, &f).unwrap();
        assert!(r.passed(), "{}", r.empirical_constant);
        let v = w.reciprocal();
        for variant in [BilinearVariant::Pmbe, BilinearVariant::Mbe] {
            let r = bilinear_embedding_check(&alpha, &w, &v, &f, &g, variant).unwrap();
            assert!(r.empirical_constant.is_finite());
            assert!(r.params["a"] >= r.params["a_hypothesis"]);
            assert_eq!(r.notes.len(), 1);
        }
    }
}

#[test]
fn bellman_function() {
    let p = BellmanPoint {
        big_f: 1.0,
        f: 0.5,
        u: 0.5,
        y: 0.25,
    };
    assert!(p.in_domain());
    assert!((bellman_b(&p, 1.0) - 4.0 * (1.0 - 0.25 / 0.75)).abs() < 1e-15);
    assert!(!BellmanPoint {
        big_f: 0.1,
        f: 0.5,
        u: 0.5,
        y: 0.25
    }
    .in_domain());
    let r = bellman_lmwce_check(20_000, 42).unwrap();
    assert!(r.passed());
    assert!(r.params["min_slack"] >= -1e-12);
    assert_eq!(r, bellman_lmwce_check(20_000, 42).unwrap());
}

#[test]
fn induction_in_scales() {
    let w = cascade_weight(2, 3, 0.6, 5, DEFAULT_CASCADE_DECAY).unwrap();
    let alpha = random_sequence(2, 3, 6);
    let root = HaarIndex::new(DyadicCube::unit(2), 1).unwrap();
    let inst = InductionInstance::wp1(&w, &alpha).unwrap();
    let r = induction_in_scales_check(&inst, &root).unwrap();
    assert!(r.passed(), "{:?}", r.violations);
    // A zero sequence contributes nothing.
    let zero = InductionInstance::wp1(&w, &CarlesonSequence::zeros(2, 3)).unwrap();
    assert_eq!(
        induction_in_scales_check(&zero, &root).unwrap().rows[0].lhs,
        0.0
    );
    // Every sub-root also satisfies the conclusion.
    for idx in haar_indices(2, 3) {
        assert!(induction_in_scales_check(&inst, &idx).unwrap().passed());
    }
    // Injected fault: inflating the contributions breaks the bound.
    let broken = inst.clone().scale_contributions(1e6);
    assert!(!induction_in_scales_check(&broken, &root).unwrap().passed());
    // Breaking a midpoint relation is rejected at the parent, before summing.
    let mut bad = inst;
    bad.y[3] += 0.1;
    assert!(matches!(
        induction_in_scales_check(&bad, &root),
        Err(Error::InconsistentInstance { node: 1, .. })
    ));
}

#[test]
fn scaling_tables() {
    let b = log_symbol(1, 6);
    let family: Vec<(f64, Weight)> = [-0.6, 0.0, 0.6]
        .iter()
        .map(|&a| (a, power_weight(1, 6, a).unwrap()))
        .collect();
    let t = scaling_experiment(
        &family,
        &ScalingOperator::Paraproduct(b.clone()),
        NormMethod::Dense,
    )
    .unwrap();
    assert_eq!(t.rows.len(), 3);
    assert!(t.rows.iter().all(|r| r.ratio.is_finite() && r.ratio > 0.0));
    assert!(t.slope.is_finite());
    let s = scaling_experiment(
        &family,
        &ScalingOperator::Martingale(SignPattern::random(1, 6, 1)),
        NormMethod::Dense,
    )
    .unwrap();
    assert!((s.rows[1].norm - 1.0).abs() < 1e-10);
    assert_eq!(
        scaling_experiment(
            &[],
            &ScalingOperator::Paraproduct(b.clone()),
            NormMethod::Dense
        ),
        Err(Error::DegenerateFamily)
    );
    let flat = vec![
        (0.0, Weight::constant(1, 6, 1.0)),
        (0.0, Weight::constant(1, 6, 2.0)),
    ];
    assert_eq!(
        scaling_experiment(&flat, &ScalingOperator::Paraproduct(b), NormMethod::Dense),
        Err(Error::DegenerateFamily)
    );
    let zero = GridFunction::constant(1, 6, 1.0);
    assert_eq!(
        scaling_experiment(
            &family,
            &ScalingOperator::Paraproduct(zero),
            NormMethod::Dense
        ),
        Err(Error::ZeroOscillation)
    );
    let rows: Vec<ScalingRow> = (1..4)
        .map(|i| {
            let a = i as f64;
            ScalingRow {
                alpha: a,
                a2d: a,
                a2r: a,
                norm: a * a * 3.0,
                ratio: 0.0,
            }
        })
        .collect();
    assert!((fit_slope(&rows).unwrap() - 2.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]
    #[test]
    fn proposition_constants_are_finite(seed in any::<u64>(), delta in 0.05f64..0.9, n in 1usize..3) {
        let depth = if n == 1 { 5 } else { 3 };
        let w = cascade_weight(n, depth, delta, seed, DEFAULT_CASCADE_DECAY).unwrap();
        for which in [Proposition::Wp2, Proposition::Wp3, Proposition::Wp4] {
            let r = proposition_suite(&w, which, Variant::Dyadic, None).unwrap();
            prop_assert!(r.empirical_constant.is_finite());
            prop_assert!(r.rows.iter().all(|row| row.lhs >= 0.0 && row.rhs > 0.0));
        }
        let m = mmte_suite(&w).unwrap();
        prop_assert!(m.passed());
    }
}
