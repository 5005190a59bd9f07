use alloc::string::ToString;
use alloc::vec::Vec;

use super::{carleson_profile, CarlesonSequence, WeightStats};
use crate::dyadic::Node;
use crate::error::Result;
use crate::grid::GridFunction;
use crate::report::{ratio, CheckReport};
use crate::weights::Weight;

/// Weighted Carleson embedding with the Bellman constant 4 as cap.
///
/// `A` is the smallest constant with
/// `(1/|E_i|) sum alpha_j <w>_{E_j}^2 <= A <w>_{E_i}` over all base pairs;
/// the single row compares `sum alpha_j <f w^{1/2}>_{E_j}^2` with `A ||f||^2`.
pub fn weighted_carleson_embedding_check(
    alpha: &CarlesonSequence,
    w: &Weight,
    f: &GridFunction,
) -> Result<CheckReport> {
    f.same_shape(w.grid())?;
    alpha.check_shape(w.dim(), w.depth())?;
    let stats = WeightStats::new(w);
    let n = stats.cells();
    let a = &stats.w;
    let profile = stats.profile(|k| alpha.values[k] * a[k] * a[k]);
    let big_a = (1..n).map(|k| ratio(profile[k], a[k])).fold(0.0, f64::max);
    let fw = f.mul(&w.sqrt());
    let avg = stats.layout.node_averages(fw.values());
    let lhs: f64 = (1..n).map(|k| alpha.values[k] * avg[k] * avg[k]).sum();
    let mut report =
        CheckReport::new("weighted-carleson-embedding", "wilson", w.dim(), w.depth()).with_cap(4.0);
    report.param("carleson_constant", big_a);
    report.record("unit cube".to_string(), lhs, big_a * f.norm_sq());
    Ok(report)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BilinearVariant {
    /// Weighted averages `<f>_{E,w} <g>_{E,v}` against `||f||_{L^2(w)} ||g||_{L^2(v)}`.
    Pmbe,
    /// `<f w^{1/2}>_E <g v^{1/2}>_E |E|` against unweighted norms.
    Mbe,
}

/// Bilinear embedding; `A` is the largest of the three embedding constants
/// and `sup_Q <w>_Q <v>_Q` (the hypothesis is read with `v` in the second factor).
pub fn bilinear_embedding_check(
    alpha: &CarlesonSequence,
    w: &Weight,
    v: &Weight,
    f: &GridFunction,
    g: &GridFunction,
    variant: BilinearVariant,
) -> Result<CheckReport> {
    f.same_shape(w.grid())?;
    g.same_shape(v.grid())?;
    w.grid().same_shape(v.grid())?;
    alpha.check_shape(w.dim(), w.depth())?;
    let layout = w.grid().layout();
    let n = layout.cells();
    let aw = layout.node_averages(w.values());
    let av = layout.node_averages(v.values());
    let al = &alpha.values;
    let vol = |k: usize| Node(k).volume();
    let sweep = |term: &dyn Fn(usize) -> f64, bound: &dyn Fn(usize) -> f64| -> f64 {
        let terms: Vec<f64> = (0..n).map(|k| if k == 0 { 0.0 } else { term(k) }).collect();
        let p = carleson_profile(&layout, &terms);
        (1..n).map(|k| ratio(p[k], bound(k))).fold(0.0, f64::max)
    };
    let (a1, a2, a3) = match variant {
        BilinearVariant::Pmbe => (
            sweep(&|k| al[k] / aw[k], &|k| av[k]),
            sweep(&|k| al[k] / av[k], &|k| aw[k]),
            sweep(&|k| al[k], &|_| 1.0),
        ),
        BilinearVariant::Mbe => (
            sweep(&|k| al[k] * av[k] * vol(k), &|k| av[k]),
            sweep(&|k| al[k] * aw[k] * vol(k), &|k| aw[k]),
            sweep(&|k| al[k] * aw[k] * av[k] * vol(k), &|_| 1.0),
        ),
    };
    let hypothesis = (1..2 * n)
        .filter(|&k| layout.is_cube_node(Node(k)))
        .map(|k| aw[k] * av[k])
        .fold(0.0, f64::max);
    let big_a = a1.max(a2).max(a3).max(hypothesis);

    let (lhs, rhs) = match variant {
        BilinearVariant::Pmbe => {
            let fw = layout.node_sums(f.mul(w.grid()).values());
            let gv = layout.node_sums(g.mul(v.grid()).values());
            let sw = layout.node_sums(w.values());
            let sv = layout.node_sums(v.values());
            let lhs: f64 = (1..n)
                .map(|k| al[k] * libm::fabs(fw[k] / sw[k]) * libm::fabs(gv[k] / sv[k]))
                .sum();
            let rhs = big_a
                * libm::sqrt(f.weighted_norm_sq(w.grid()))
                * libm::sqrt(g.weighted_norm_sq(v.grid()));
            (lhs, rhs)
        }
        BilinearVariant::Mbe => {
            let fw = layout.node_averages(f.mul(&w.sqrt()).values());
            let gv = layout.node_averages(g.mul(&v.sqrt()).values());
            let lhs: f64 = (1..n)
                .map(|k| al[k] * libm::fabs(fw[k]) * libm::fabs(gv[k]) * vol(k))
                .sum();
            (lhs, big_a * f.norm() * g.norm())
        }
    };
    let name = match variant {
        BilinearVariant::Pmbe => "pmbe",
        BilinearVariant::Mbe => "mbe",
    };
    let mut report = CheckReport::new("bilinear-embedding", name, w.dim(), w.depth());
    report.param("a_first", a1);
    report.param("a_second", a2);
    report.param("a_third", a3);
    report.param("a_hypothesis", hypothesis);
    report.param("a", big_a);
    report
        .notes
        .push("hypothesis read as <w>_Q <v>_Q < A; the source prints <w>_Q <w>_Q".to_string());
    report.record("unit cube".to_string(), lhs, rhs);
    Ok(report)
}
