use dpl_core::dyadic::{cubes_up_to, haar_indices};
use dpl_core::grid::for_each_cell_in;
use dpl_core::haar::{
    analyze, analyze_weighted, average_from_coefficients, orthogonal_haar, project_wq, synthesize,
    synthesize_weighted, tensor_haar, weighted_wilson_haar, wilson_haar, ProjectionBasis,
};
use dpl_core::sample::{random_grid, random_weight, rng};
use dpl_core::{GridFunction, HaarIndex, TensorHaarIndex, Weight};
use proptest::prelude::*;
use rand::Rng;

const SHAPES: [(usize, usize); 9] = [
    (1, 1),
    (1, 3),
    (1, 4),
    (2, 1),
    (2, 2),
    (2, 4),
    (3, 1),
    (3, 2),
    (3, 4),
];

fn gram_defect(
    basis: &[GridFunction],
    pairing: impl Fn(&GridFunction, &GridFunction) -> f64,
) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, fa) in basis.iter().enumerate() {
        for (b, fb) in basis.iter().enumerate().skip(a) {
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((pairing(fa, fb) - target).abs());
        }
    }
    worst
}

/// Gram defect of the Wilson system plus the constant; pairs with disjoint
/// supports are skipped, their product vanishing identically.
fn wilson_gram_defect(n: usize, depth: usize) -> f64 {
    let cells = 1usize << (n * depth);
    let indices: Vec<HaarIndex> = haar_indices(n, depth).collect();
    let support = |idx: &HaarIndex| {
        let mut out = Vec::new();
        for_each_cell_in(&idx.e_set(), n, depth, |c| out.push(c));
        out
    };
    let mut worst: f64 = 0.0;
    let one = GridFunction::constant(n, depth, 1.0);
    worst = worst.max((one.norm_sq() - 1.0).abs());
    for a in &indices {
        let ha = wilson_haar(a, depth).unwrap();
        worst = worst.max(ha.inner(&one).abs());
        for b in &indices {
            if a.e_set().is_disjoint(&b.e_set()) || a > b {
                continue;
            }
            let hb = wilson_haar(b, depth).unwrap();
            let dot: f64 = support(b)
                .iter()
                .map(|&c| ha.values()[c] * hb.values()[c])
                .sum::<f64>()
                / cells as f64;
            let target = if a == b { 1.0 } else { 0.0 };
            worst = worst.max((dot - target).abs());
        }
    }
    worst
}

#[test]
fn wilson_system_is_orthonormal() {
    for (n, depth) in SHAPES {
        assert_eq!(haar_indices(n, depth).count() + 1, 1 << (n * depth));
        let defect = wilson_gram_defect(n, depth);
        assert!(defect < 1e-12, "n={n} L={depth}: {defect}");
    }
}

#[test]
fn weighted_system_is_orthonormal_in_l2_w() {
    for (seed, (n, depth)) in SHAPES.into_iter().enumerate() {
        if n * depth > 8 {
            continue;
        }
        let w = random_weight(n, depth, seed as u64);
        let one = GridFunction::constant(n, depth, 1.0 / w.grid().mean().sqrt());
        let mut basis = vec![one];
        basis.extend(haar_indices(n, depth).map(|idx| weighted_wilson_haar(&idx, &w).unwrap()));
        let defect = gram_defect(&basis, |a, b| a.mul(w.grid()).inner(b));
        assert!(defect < 1e-12, "n={n} L={depth}: {defect}");
    }
}

#[test]
fn tensor_system_is_orthonormal_and_spans_the_same_space() {
    for (n, depth) in [(1, 3), (2, 2), (3, 2)] {
        let mut basis = vec![GridFunction::constant(n, depth, 1.0)];
        for q in cubes_up_to(n, depth as u32 - 1) {
            for sigma in TensorHaarIndex::signatures(n) {
                basis.push(
                    tensor_haar(&TensorHaarIndex::new(q.clone(), sigma).unwrap(), depth).unwrap(),
                );
            }
        }
        assert_eq!(basis.len(), 1 << (n * depth));
        assert!(gram_defect(&basis, |a, b| a.inner(b)) < 1e-12);
    }
}

#[test]
fn analysis_coefficients_are_inner_products() {
    for (seed, (n, depth)) in SHAPES.into_iter().enumerate() {
        let f = random_grid(n, depth, 100 + seed as u64);
        let w = random_weight(n, depth, 200 + seed as u64);
        let t = analyze(&f);
        let tw = analyze_weighted(&f, &w).unwrap();
        assert!((t.mean() - f.mean()).abs() < 1e-14);
        for idx in haar_indices(n, depth) {
            let direct = f.inner(&wilson_haar(&idx, depth).unwrap());
            assert!((t.get(&idx).unwrap() - direct).abs() < 1e-13, "{idx}");
            let direct_w = f
                .mul(w.grid())
                .inner(&weighted_wilson_haar(&idx, &w).unwrap());
            assert!((tw.get(&idx).unwrap() - direct_w).abs() < 1e-12, "{idx}");
        }
    }
}

#[test]
fn weighted_parseval_on_fifty_pairs() {
    let mut r = rng(7);
    for trial in 0..50u64 {
        let n = r.random_range(1..=3usize);
        let depth = r.random_range(1..=(9 / n).min(5));
        let f = random_grid(n, depth, 1000 + trial);
        let w = random_weight(n, depth, 2000 + trial);
        let t = analyze_weighted(&f, &w).unwrap();
        let total = w.grid().mean();
        let parseval = t.mean() * t.mean() * total + t.sum_of_squares();
        let norm = f.weighted_norm_sq(w.grid());
        assert!(
            (parseval - norm).abs() <= 1e-10 * norm.max(1.0),
            "trial {trial}: {parseval} vs {norm}"
        );
        let back = synthesize_weighted(&t, &w).unwrap();
        assert!(back.max_abs_diff(&f) < 1e-11);
    }
}

#[test]
fn averages_are_recovered_from_coefficients() {
    let mut r = rng(11);
    for trial in 0..100u64 {
        let n = r.random_range(1..=3usize);
        let depth = r.random_range(1..=(9 / n).min(5));
        let f = random_grid(n, depth, 3000 + trial);
        let w = random_weight(n, depth, 4000 + trial);
        let t = analyze(&f);
        let tw = analyze_weighted(&f, &w).unwrap();
        let indices: Vec<HaarIndex> = haar_indices(n, depth).collect();
        let idx = &indices[r.random_range(0..indices.len())];
        let e = idx.e_set();
        let direct = f.average_over(&e);
        let (fw, _) = f.mul(w.grid()).sum_over(&e, |v| v);
        let (ww, _) = w.grid().sum_over(&e, |v| v);
        let direct_w = fw / ww;
        let got = average_from_coefficients(&t, idx, None).unwrap();
        let got_w = average_from_coefficients(&tw, idx, Some(&w)).unwrap();
        assert!(
            (got - direct).abs() < 1e-12,
            "trial {trial} {idx}: {got} vs {direct}"
        );
        assert!(
            (got_w - direct_w).abs() < 1e-12,
            "trial {trial} {idx}: {got_w} vs {direct_w}"
        );
        // Cube averages (j = 1) use only coefficients of strictly larger cubes.
        let cube = HaarIndex::new(idx.cube().clone(), 1).unwrap();
        let cube_avg = f.average_over(&idx.cube().to_rectangle());
        assert!((average_from_coefficients(&t, &cube, None).unwrap() - cube_avg).abs() < 1e-12);
    }
}

#[test]
fn orthogonal_system_bessel_and_norm_bound() {
    let mut r = rng(13);
    let mut violations = 0;
    for trial in 0..100u64 {
        let n = r.random_range(1..=3usize);
        let depth = r.random_range(1..=(6 / n).min(4));
        let w = random_weight(n, depth, 5000 + trial);
        let g = random_grid(n, depth, 6000 + trial);
        let sw = w.sqrt();
        let gw = g.mul(&sw);
        let mut system = Vec::new();
        let mut bessel = 0.0;
        for idx in haar_indices(n, depth) {
            let (h, a) = orthogonal_haar(&idx, &w).unwrap();
            assert!(a.abs() < 1.0);
            let e_w = w.grid().average_over(&idx.e_set());
            let bound = idx.e_volume() * e_w;
            let norm_sq = h.weighted_norm_sq(w.grid());
            if norm_sq > bound * (1.0 + 1e-12) {
                violations += 1;
            }
            let c = gw.inner(&h);
            bessel += c * c / bound;
            system.push(h.mul(&sw));
        }
        if bessel > g.norm_sq() * (1.0 + 1e-12) {
            violations += 1;
        }
        for (i, a) in system.iter().enumerate() {
            for b in &system[i + 1..] {
                assert!(a.inner(b).abs() < 1e-12, "trial {trial}: not orthogonal");
            }
        }
    }
    assert_eq!(violations, 0);
}

#[test]
fn orthogonal_function_matches_definition() {
    let w = random_weight(2, 2, 3);
    let idx = HaarIndex::new(dpl_core::DyadicCube::new(1, vec![1, 0]).unwrap(), 2).unwrap();
    let (h, a) = orthogonal_haar(&idx, &w).unwrap();
    let (e1, e2) = idx.pair_sets();
    let (w1, w2) = (w.grid().average_over(&e1), w.grid().average_over(&e2));
    assert!((a - (w2 - w1) / (2.0 * 0.5 * (w1 + w2))).abs() < 1e-15);
    let expected = wilson_haar(&idx, 2).unwrap().scale(idx.e_volume().sqrt());
    let chi = {
        let mut c = GridFunction::zeros(2, 2);
        for_each_cell_in(&idx.e_set(), 2, 2, |k| c.values_mut()[k] = 1.0);
        c
    };
    assert!(h.max_abs_diff(&expected.sub(&chi.scale(a))) < 1e-15);
    // H^w is orthogonal to w on E.
    assert!(h.mul(w.grid()).mean().abs() < 1e-15);
}

#[test]
fn projections_agree_in_both_bases() {
    for (n, depth) in [(1, 4), (2, 3), (3, 2), (4, 1)] {
        let f = random_grid(n, depth, 42 + n as u64);
        for q in cubes_up_to(n, depth as u32 - 1) {
            let a = project_wq(&f, &q, ProjectionBasis::Tensor).unwrap();
            let b = project_wq(&f, &q, ProjectionBasis::Wilson).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-12, "n={n} {q:?}");
            // Idempotent, and the residual is orthogonal to W(Q).
            let aa = project_wq(&a, &q, ProjectionBasis::Wilson).unwrap();
            assert!(aa.max_abs_diff(&a) < 1e-12);
        }
    }
}

#[test]
fn shape_errors() {
    let f = random_grid(2, 2, 1);
    let w = Weight::constant(2, 3, 1.0);
    assert!(analyze_weighted(&f, &w).is_err());
    let deep = HaarIndex::new(dpl_core::DyadicCube::new(2, vec![0, 0]).unwrap(), 1).unwrap();
    assert!(wilson_haar(&deep, 2).is_err());
    assert!(average_from_coefficients(&analyze(&f), &deep, None).is_err());
}

proptest! {
    #[test]
    fn round_trip(n in 1usize..4, depth in 1usize..4, seed in any::<u64>()) {
        let f = random_grid(n, depth, seed);
        let back = synthesize(&analyze(&f));
        prop_assert!(back.max_abs_diff(&f) < 1e-13);
        let t = analyze(&f);
        prop_assert!((t.mean() * t.mean() + t.sum_of_squares() - f.norm_sq()).abs() < 1e-12);
    }

    #[test]
    fn linear_in_f(seed in any::<u64>(), c in -3.0f64..3.0) {
        let f = random_grid(2, 2, seed);
        let g = random_grid(2, 2, seed ^ 0x55);
        let lhs = analyze(&f.add(&g.scale(c)));
        let (a, b) = (analyze(&f), analyze(&g));
        for k in 0..lhs.raw().len() {
            prop_assert!((lhs.raw()[k] - a.raw()[k] - c * b.raw()[k]).abs() < 1e-13);
        }
    }

    #[test]
    fn weighted_round_trip(n in 1usize..3, depth in 1usize..4, seed in any::<u64>()) {
        let f = random_grid(n, depth, seed);
        let w = random_weight(n, depth, seed.wrapping_add(1));
        let back = synthesize_weighted(&analyze_weighted(&f, &w).unwrap(), &w).unwrap();
        prop_assert!(back.max_abs_diff(&f) < 1e-11);
    }
}
