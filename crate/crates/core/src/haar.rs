//! Wilson's Haar system (plain, weighted and orthogonalized), the tensor
//! product Haar basis, and analysis/synthesis between cell values and
//! Haar coefficients.
//!
//! Sign convention: `h_{j,Q} = |E_{j,Q}|^{-1/2} (chi_{E^2} - chi_{E^1})`, so
//! the upper half `E^2` carries the positive value.

use alloc::vec;
use alloc::vec::Vec;

use crate::dyadic::{DyadicCube, HaarIndex, Layout, Node};
use crate::error::{Error, Result};
use crate::grid::{for_each_cell_in, GridFunction};
use crate::weights::Weight;

/// Haar coefficients of a grid function, stored densely in heap order.
///
/// Slot 0 holds the (possibly weighted) global mean; slot `k >= 1` holds the
/// coefficient of `Node(k)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientTree {
    dim: usize,
    depth: usize,
    values: Vec<f64>,
}

impl CoefficientTree {
    pub fn new(dim: usize, depth: usize, mean: f64, coefficients: Vec<f64>) -> Result<Self> {
        let expected = (1usize << (dim * depth)) - 1;
        if coefficients.len() != expected {
            return Err(Error::ValueCount {
                expected,
                found: coefficients.len(),
            });
        }
        let mut values = Vec::with_capacity(expected + 1);
        values.push(mean);
        values.extend(coefficients);
        Ok(CoefficientTree { dim, depth, values })
    }

    pub fn zeros(dim: usize, depth: usize) -> Self {
        CoefficientTree {
            dim,
            depth,
            values: vec![0.0; 1usize << (dim * depth)],
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn mean(&self) -> f64 {
        self.values[0]
    }

    pub fn set_mean(&mut self, mean: f64) {
        self.values[0] = mean;
    }

    pub fn node(&self, node: Node) -> f64 {
        self.values[node.0]
    }

    pub fn set_node(&mut self, node: Node, value: f64) {
        self.values[node.0] = value;
    }

    pub fn get(&self, idx: &HaarIndex) -> Result<f64> {
        let node = Layout::new(self.dim, self.depth).node_of(idx)?;
        Ok(self.values[node.0])
    }

    /// Coefficients only (slot 0 excluded), in heap order.
    pub fn coefficients(&self) -> &[f64] {
        &self.values[1..]
    }

    pub fn raw(&self) -> &[f64] {
        &self.values
    }

    pub fn iter(&self) -> impl Iterator<Item = (Node, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| (Node(k), c))
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.coefficients().iter().map(|c| c * c).sum()
    }
}

/// Unweighted coefficients of per-cell `values` laid out by `layout`.
pub(crate) fn coefficients_in(layout: &Layout, values: &[f64]) -> Vec<f64> {
    let n = layout.cells();
    let avg = layout.node_averages(values);
    let mut out = vec![0.0; n];
    out[0] = avg[1];
    for (k, slot) in out.iter_mut().enumerate().skip(1) {
        let vol = Node(k).volume();
        *slot = 0.5 * libm::sqrt(vol) * (avg[2 * k + 1] - avg[2 * k]);
    }
    out
}

/// Inverse of [`coefficients_in`].
pub(crate) fn synthesize_in(layout: &Layout, coeffs: &[f64]) -> Vec<f64> {
    layout.push_down(coeffs[0], |node, upper| {
        let amp = coeffs[node.0] / libm::sqrt(node.volume());
        if upper {
            amp
        } else {
            -amp
        }
    })
}

pub fn analyze(f: &GridFunction) -> CoefficientTree {
    let layout = f.layout();
    CoefficientTree {
        dim: f.dim(),
        depth: f.depth(),
        values: coefficients_in(&layout, f.values()),
    }
}

pub fn synthesize(t: &CoefficientTree) -> GridFunction {
    let layout = Layout::new(t.dim, t.depth);
    GridFunction::new(t.dim, t.depth, synthesize_in(&layout, &t.values)).expect("shape from tree")
}

/// Values of the weighted Haar function of `node` on its lower and upper half.
fn weighted_sides(mass: &[f64], cells: usize, node: Node) -> (f64, f64) {
    let k = node.0;
    let (w1, w2) = (mass[2 * k] / cells as f64, mass[2 * k + 1] / cells as f64);
    let we = w1 + w2;
    let lower = -libm::sqrt(w2 / w1) / libm::sqrt(we);
    let upper = libm::sqrt(w1 / w2) / libm::sqrt(we);
    (lower, upper)
}

/// Coefficients `<f, h^w_{j,Q}>_w`, with the weighted mean `<f>_{[0,1)^n, w}` in slot 0.
pub fn analyze_weighted(f: &GridFunction, w: &Weight) -> Result<CoefficientTree> {
    f.same_shape(w.grid())?;
    let layout = f.layout();
    let n = layout.cells();
    let mass = layout.node_sums(w.values());
    let fw: Vec<f64> = f
        .values()
        .iter()
        .zip(w.values())
        .map(|(a, b)| a * b)
        .collect();
    let fmass = layout.node_sums(&fw);
    let mut values = vec![0.0; n];
    values[0] = fmass[1] / mass[1];
    for (k, slot) in values.iter_mut().enumerate().skip(1) {
        let (lo, hi) = weighted_sides(&mass, n, Node(k));
        *slot = (lo * fmass[2 * k] + hi * fmass[2 * k + 1]) / n as f64;
    }
    Ok(CoefficientTree {
        dim: f.dim(),
        depth: f.depth(),
        values,
    })
}

pub fn synthesize_weighted(t: &CoefficientTree, w: &Weight) -> Result<GridFunction> {
    if t.dim != w.grid().dim() || t.depth != w.grid().depth() {
        return Err(Error::ShapeMismatch {
            expected_dim: t.dim,
            expected_depth: t.depth,
            found_dim: w.grid().dim(),
            found_depth: w.grid().depth(),
        });
    }
    let layout = Layout::new(t.dim, t.depth);
    let n = layout.cells();
    let mass = layout.node_sums(w.values());
    let values = layout.push_down(t.values[0], |node, upper| {
        let (lo, hi) = weighted_sides(&mass, n, node);
        t.values[node.0] * if upper { hi } else { lo }
    });
    GridFunction::new(t.dim, t.depth, values)
}

fn check_depth(idx: &HaarIndex, depth: usize) -> Result<()> {
    if idx.cube().level() as usize >= depth {
        return Err(Error::DepthTooShallow {
            level: idx.cube().level(),
            depth,
        });
    }
    Ok(())
}

/// `h_{j,Q}` sampled on the depth-`depth` grid.
pub fn wilson_haar(idx: &HaarIndex, depth: usize) -> Result<GridFunction> {
    check_depth(idx, depth)?;
    let n = idx.dim();
    let amp = 1.0 / libm::sqrt(idx.e_volume());
    let (e1, e2) = idx.pair_sets();
    let mut f = GridFunction::zeros(n, depth);
    let values = f.values_mut();
    for_each_cell_in(&e1, n, depth, |c| values[c] = -amp);
    for_each_cell_in(&e2, n, depth, |c| values[c] = amp);
    Ok(f)
}

/// `h^w_{j,Q}`, normalized in `L^2(w)`.
pub fn weighted_wilson_haar(idx: &HaarIndex, w: &Weight) -> Result<GridFunction> {
    let g = w.grid();
    check_depth(idx, g.depth())?;
    let n = idx.dim();
    let (e1, e2) = idx.pair_sets();
    let (s1, _) = g.sum_over(&e1, |v| v);
    let (s2, _) = g.sum_over(&e2, |v| v);
    let (w1, w2) = (s1 * g.cell_volume(), s2 * g.cell_volume());
    let we = w1 + w2;
    let lower = -libm::sqrt(w2 / w1) / libm::sqrt(we);
    let upper = libm::sqrt(w1 / w2) / libm::sqrt(we);
    let mut f = GridFunction::zeros(n, g.depth());
    let values = f.values_mut();
    for_each_cell_in(&e1, n, g.depth(), |c| values[c] = lower);
    for_each_cell_in(&e2, n, g.depth(), |c| values[c] = upper);
    Ok(f)
}

/// `(H^w_{j,Q}, A^w_{j,Q})` with `H = h sqrt|E| - A chi_E` and
/// `A = (<w>_{E^2} - <w>_{E^1}) / (2 <w>_E)`.
pub fn orthogonal_haar(idx: &HaarIndex, w: &Weight) -> Result<(GridFunction, f64)> {
    let g = w.grid();
    check_depth(idx, g.depth())?;
    let (e1, e2) = idx.pair_sets();
    let avg1 = g.average_over(&e1);
    let avg2 = g.average_over(&e2);
    let a = (avg2 - avg1) / (avg1 + avg2);
    let mut h = wilson_haar(idx, g.depth())?;
    let scale = libm::sqrt(idx.e_volume());
    let e = idx.e_set();
    let values = h.values_mut();
    for_each_cell_in(&e, idx.dim(), g.depth(), |c| {
        values[c] = values[c] * scale - a
    });
    Ok((h, a))
}

/// Recovers `<f>_{E_{j,Q}}` (or `<f>_{E_{j,Q},w}`) from the coefficients of
/// every strictly larger pair plus the global mean.
///
/// `t` must come from [`analyze`] when `w` is `None` and from
/// [`analyze_weighted`] with the same weight otherwise.
pub fn average_from_coefficients(
    t: &CoefficientTree,
    idx: &HaarIndex,
    w: Option<&Weight>,
) -> Result<f64> {
    let layout = Layout::new(t.dim, t.depth);
    let node = layout.node_of(idx)?;
    let mass = match w {
        Some(w) => {
            if w.grid().dim() != t.dim || w.grid().depth() != t.depth {
                return Err(Error::ShapeMismatch {
                    expected_dim: t.dim,
                    expected_depth: t.depth,
                    found_dim: w.grid().dim(),
                    found_depth: w.grid().depth(),
                });
            }
            Some(layout.node_sums(w.values()))
        }
        None => None,
    };
    let mut avg = t.mean();
    for (anc, upper) in node.ancestors() {
        let h = match &mass {
            Some(mass) => {
                let (lo, hi) = weighted_sides(mass, layout.cells(), anc);
                if upper {
                    hi
                } else {
                    lo
                }
            }
            None => {
                let amp = 1.0 / libm::sqrt(anc.volume());
                if upper {
                    amp
                } else {
                    -amp
                }
            }
        };
        avg += t.node(anc) * h;
    }
    Ok(avg)
}

/// Standard tensor-product Haar index: a cube and a signature in
/// `{0,1}^n \ {(1,...,1)}` (0 = mean-zero factor, 1 = normalized indicator).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TensorHaarIndex {
    cube: DyadicCube,
    sigma: Vec<u8>,
}

impl TensorHaarIndex {
    pub fn new(cube: DyadicCube, sigma: Vec<u8>) -> Result<Self> {
        let dim = cube.dim();
        if sigma.len() != dim || sigma.iter().any(|&s| s > 1) || sigma.iter().all(|&s| s == 1) {
            return Err(Error::InvalidSignature { dim });
        }
        Ok(TensorHaarIndex { cube, sigma })
    }

    pub fn cube(&self) -> &DyadicCube {
        &self.cube
    }

    pub fn sigma(&self) -> &[u8] {
        &self.sigma
    }

    /// The `2^n - 1` admissible signatures in binary counting order.
    pub fn signatures(dim: usize) -> impl Iterator<Item = Vec<u8>> {
        (0..(1u64 << dim) - 1).map(move |bits| {
            (0..dim)
                .map(|a| ((bits >> (dim - 1 - a)) & 1) as u8)
                .collect()
        })
    }

    /// Value on the child of the cube whose axis-`a` bit is `(child_bits >> (n-1-a)) & 1`.
    fn value_on_child(&self, child_bits: u64) -> f64 {
        let n = self.cube.dim();
        let sign: f64 = (0..n)
            .filter(|&a| self.sigma[a] == 0)
            .map(|a| {
                if (child_bits >> (n - 1 - a)) & 1 == 1 {
                    1.0
                } else {
                    -1.0
                }
            })
            .product();
        sign / libm::sqrt(self.cube.volume())
    }
}

/// `h^s_{sigma,Q}` sampled on the depth-`depth` grid.
pub fn tensor_haar(idx: &TensorHaarIndex, depth: usize) -> Result<GridFunction> {
    let level = idx.cube.level();
    if level as usize >= depth {
        return Err(Error::DepthTooShallow { level, depth });
    }
    let n = idx.cube.dim();
    let mut f = GridFunction::zeros(n, depth);
    for (bits, child) in idx.cube.children().iter().enumerate() {
        let v = idx.value_on_child(bits as u64);
        let values = f.values_mut();
        for_each_cell_in(&child.to_rectangle(), n, depth, |c| values[c] = v);
    }
    Ok(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProjectionBasis {
    Tensor,
    Wilson,
}

/// Orthogonal projection of `f` onto `W(Q)`, expanded in the chosen basis.
pub fn project_wq(
    f: &GridFunction,
    q: &DyadicCube,
    basis: ProjectionBasis,
) -> Result<GridFunction> {
    if q.dim() != f.dim() {
        return Err(Error::CoordinateCount {
            expected: f.dim(),
            found: q.dim(),
        });
    }
    if q.level() as usize >= f.depth() {
        return Err(Error::DepthTooShallow {
            level: q.level(),
            depth: f.depth(),
        });
    }
    let mut out = GridFunction::zeros(f.dim(), f.depth());
    let mut accumulate = |h: GridFunction| {
        let c = f.inner(&h);
        for (o, v) in out.values_mut().iter_mut().zip(h.values()) {
            *o += c * v;
        }
    };
    match basis {
        ProjectionBasis::Tensor => {
            for sigma in TensorHaarIndex::signatures(f.dim()) {
                accumulate(tensor_haar(
                    &TensorHaarIndex::new(q.clone(), sigma)?,
                    f.depth(),
                )?);
            }
        }
        ProjectionBasis::Wilson => {
            for j in 1..=crate::dyadic::max_j(f.dim()) {
                accumulate(wilson_haar(&HaarIndex::new(q.clone(), j)?, f.depth())?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::haar_indices;
    use crate::sample::{random_grid, random_weight};

    #[test]
    fn classical_haar_in_one_dimension() {
        let h = wilson_haar(&HaarIndex::new(DyadicCube::unit(1), 1).unwrap(), 1).unwrap();
        assert_eq!(h.values(), &[-1.0, 1.0]);
    }

    #[test]
    fn two_dimensional_j3_amplitude() {
        let h = wilson_haar(&HaarIndex::new(DyadicCube::unit(2), 3).unwrap(), 1).unwrap();
        let s = core::f64::consts::SQRT_2;
        // E_3 = [0,1) x [1/2,1), split along axis 0.
        for (v, e) in h.values().iter().zip([0.0, -s, 0.0, s]) {
            assert!((v - e).abs() < 1e-15);
        }
    }

    #[test]
    fn haar_is_normalized_and_mean_zero() {
        for idx in haar_indices(2, 3) {
            let h = wilson_haar(&idx, 3).unwrap();
            assert!(h.mean().abs() < 1e-15);
            assert!((h.norm_sq() - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn too_shallow_is_rejected() {
        let idx = HaarIndex::new(DyadicCube::new(2, vec![0]).unwrap(), 1).unwrap();
        assert_eq!(
            wilson_haar(&idx, 2),
            Err(Error::DepthTooShallow { level: 2, depth: 2 })
        );
    }

    #[test]
    fn unit_weight_reduces_to_plain_haar() {
        let w = Weight::constant(2, 2, 1.0);
        for idx in haar_indices(2, 2) {
            let a = weighted_wilson_haar(&idx, &w).unwrap();
            let b = wilson_haar(&idx, 2).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-15);
            let (h, coef) = orthogonal_haar(&idx, &w).unwrap();
            assert_eq!(coef, 0.0);
            assert!(h.max_abs_diff(&b.scale(libm::sqrt(idx.e_volume()))) < 1e-15);
        }
    }

    #[test]
    fn weighted_haar_on_step_weight() {
        // w = (1, 3): w(E1) = 1/2, w(E2) = 3/2, w(E) = 2.
        let w = Weight::new(GridFunction::new(1, 1, vec![1.0, 3.0]).unwrap()).unwrap();
        let idx = HaarIndex::new(DyadicCube::unit(1), 1).unwrap();
        let h = weighted_wilson_haar(&idx, &w).unwrap();
        let expected_lower = -libm::sqrt(3.0) / libm::sqrt(2.0);
        let expected_upper = libm::sqrt(1.0 / 3.0) / libm::sqrt(2.0);
        assert!((h.values()[0] - expected_lower).abs() < 1e-15);
        assert!((h.values()[1] - expected_upper).abs() < 1e-15);
        assert!((h.weighted_norm_sq(w.grid()) - 1.0).abs() < 1e-14);
        let wint: f64 = h.values().iter().zip(w.values()).map(|(a, b)| a * b).sum();
        assert!(wint.abs() < 1e-14);
        let (_, a) = orthogonal_haar(&idx, &w).unwrap();
        assert!((a - 0.5).abs() < 1e-15);
    }

    #[test]
    fn analysis_of_constant_and_single_haar() {
        let c = GridFunction::constant(2, 2, 3.5);
        let t = analyze(&c);
        assert_eq!(t.mean(), 3.5);
        assert!(t.coefficients().iter().all(|&x| x == 0.0));

        let layout = Layout::new(2, 2);
        for k in 1..layout.cells() {
            let idx = layout.haar_index(Node(k));
            let t = analyze(&wilson_haar(&idx, 2).unwrap());
            for (node, c) in t.iter() {
                let expected = if node.0 == k { 1.0 } else { 0.0 };
                assert!((c - expected).abs() < 1e-14, "k={k} node={node:?} c={c}");
            }
        }
    }

    #[test]
    fn round_trip_and_parseval() {
        let f = random_grid(2, 4, 11);
        let t = analyze(&f);
        let g = synthesize(&t);
        assert!(f.max_abs_diff(&g) <= 1e-12);
        let parseval = t.mean() * t.mean() + t.sum_of_squares();
        assert!((parseval - f.norm_sq()).abs() < 1e-12);
    }

    #[test]
    fn weighted_round_trip() {
        let f = random_grid(2, 3, 3);
        let w = random_weight(2, 3, 4);
        let t = analyze_weighted(&f, &w).unwrap();
        let g = synthesize_weighted(&t, &w).unwrap();
        assert!(f.max_abs_diff(&g) < 1e-12);
        let total_w = w.grid().mean();
        let parseval = total_w * t.mean() * t.mean() + t.sum_of_squares();
        assert!((parseval - f.weighted_norm_sq(w.grid())).abs() < 1e-10);
    }

    #[test]
    fn averages_from_coefficients_constant() {
        let f = GridFunction::constant(2, 2, -2.0);
        let t = analyze(&f);
        for idx in haar_indices(2, 2) {
            assert_eq!(average_from_coefficients(&t, &idx, None).unwrap(), -2.0);
        }
    }

    #[test]
    fn tensor_examples() {
        let h = tensor_haar(
            &TensorHaarIndex::new(DyadicCube::unit(1), vec![0]).unwrap(),
            1,
        )
        .unwrap();
        assert_eq!(h.values(), &[-1.0, 1.0]);
        // sigma = (0,1): mean zero in x_0, indicator in x_1.
        let h = tensor_haar(
            &TensorHaarIndex::new(DyadicCube::unit(2), vec![0, 1]).unwrap(),
            1,
        )
        .unwrap();
        assert_eq!(h.values(), &[-1.0, -1.0, 1.0, 1.0]);
        assert!(TensorHaarIndex::new(DyadicCube::unit(2), vec![1, 1]).is_err());
    }

    #[test]
    fn tensor_gram_is_identity() {
        let q = DyadicCube::new(1, vec![1, 0, 1]).unwrap();
        let basis: Vec<GridFunction> = TensorHaarIndex::signatures(3)
            .map(|s| tensor_haar(&TensorHaarIndex::new(q.clone(), s).unwrap(), 2).unwrap())
            .collect();
        assert_eq!(basis.len(), 7);
        for (a, fa) in basis.iter().enumerate() {
            for (b, fb) in basis.iter().enumerate() {
                let expected = if a == b { 1.0 } else { 0.0 };
                assert!((fa.inner(fb) - expected).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn projection_edge_cases() {
        let q = DyadicCube::new(1, vec![0, 1]).unwrap();
        let c = GridFunction::constant(2, 3, 4.0);
        for basis in [ProjectionBasis::Tensor, ProjectionBasis::Wilson] {
            assert!(project_wq(&c, &q, basis)
                .unwrap()
                .values()
                .iter()
                .all(|v| v.abs() < 1e-14));
        }
        let h = wilson_haar(&HaarIndex::new(q.clone(), 2).unwrap(), 3).unwrap();
        let p = project_wq(&h, &q, ProjectionBasis::Tensor).unwrap();
        assert!(p.max_abs_diff(&h) < 1e-13);
    }
}
