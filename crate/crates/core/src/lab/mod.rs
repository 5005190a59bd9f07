//! Numerical checks of the weighted inequalities: Carleson sums, embedding
//! theorems, the weight propositions, the Bellman function lemma,
//! induction in scales, martingale-transform estimates and scaling studies.
//!
//! Every sum of the form `sum over (Q, j) with E_{j,Q} inside E_{i,Q'}` is a
//! subtree sum of the Wilson tree (see [`crate::dyadic::Node`]).

use alloc::vec;
use alloc::vec::Vec;

use crate::dyadic::{HaarIndex, Layout, Node};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::haar::coefficients_in;
use crate::weights::Weight;

mod bellman;
mod embeddings;
mod induction;
mod mmte;
mod propositions;
mod scaling;

pub use bellman::{bellman_b, bellman_lmwce_check, BellmanPoint};
pub use embeddings::{
    bilinear_embedding_check, weighted_carleson_embedding_check, BilinearVariant,
};
pub use induction::{induction_in_scales_check, InductionInstance};
pub use mmte::mmte_suite;
pub use propositions::{proposition_suite, Proposition, Variant};
pub use scaling::{fit_slope, scaling_experiment, ScalingOperator, ScalingRow, ScalingTable};

/// Nonnegative numbers `alpha_{j,Q}` for every pair below the depth, in tree order.
#[derive(Debug, Clone, PartialEq)]
pub struct CarlesonSequence {
    dim: usize,
    depth: usize,
    /// Slot `k` belongs to `Node(k)`; slot 0 is unused.
    values: Vec<f64>,
}

impl CarlesonSequence {
    /// `values[k - 1]` belongs to `Node(k)`.
    pub fn new(dim: usize, depth: usize, values: Vec<f64>) -> Result<Self> {
        let expected = (1usize << (dim * depth)) - 1;
        if values.len() != expected {
            return Err(Error::ValueCount {
                expected,
                found: values.len(),
            });
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::NegativeCarleson { index, value });
        }
        let mut all = Vec::with_capacity(expected + 1);
        all.push(0.0);
        all.extend(values);
        Ok(CarlesonSequence {
            dim,
            depth,
            values: all,
        })
    }

    pub fn zeros(dim: usize, depth: usize) -> Self {
        CarlesonSequence {
            dim,
            depth,
            values: vec![0.0; 1usize << (dim * depth)],
        }
    }

    /// `alpha_{j,Q} = <b, h_{j,Q}>^2`.
    pub fn from_symbol(b: &GridFunction) -> Self {
        let mut values = coefficients_in(&b.layout(), b.values());
        values[0] = 0.0;
        values.iter_mut().for_each(|c| *c *= *c);
        CarlesonSequence {
            dim: b.dim(),
            depth: b.depth(),
            values,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn node(&self, node: Node) -> f64 {
        self.values[node.0]
    }

    pub fn set(&mut self, idx: &HaarIndex, value: f64) -> Result<()> {
        if !(value.is_finite() && value >= 0.0) {
            return Err(Error::NegativeCarleson { index: 0, value });
        }
        let node = Layout::new(self.dim, self.depth).node_of(idx)?;
        self.values[node.0] = value;
        Ok(())
    }

    pub fn get(&self, idx: &HaarIndex) -> Result<f64> {
        Ok(self.values[Layout::new(self.dim, self.depth).node_of(idx)?.0])
    }

    /// Values in tree order, slot 0 unused.
    pub fn raw(&self) -> &[f64] {
        &self.values
    }

    fn check_shape(&self, dim: usize, depth: usize) -> Result<()> {
        if self.dim != dim || self.depth != depth {
            return Err(Error::ShapeMismatch {
                expected_dim: dim,
                expected_depth: depth,
                found_dim: self.dim,
                found_depth: self.depth,
            });
        }
        Ok(())
    }

    /// The smallest `A` with `(1/|E_{i,Q'}|) sum alpha_{j,Q} <= A` for every base pair.
    pub fn carleson_constant(&self) -> f64 {
        let layout = Layout::new(self.dim, self.depth);
        carleson_profile(&layout, &self.values)
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// `(1/|E_k|) sum over the subtree of k of terms`, for every pair node `k` (slot 0 unused).
pub(crate) fn carleson_profile(layout: &Layout, terms: &[f64]) -> Vec<f64> {
    let n = layout.cells();
    let mut padded = vec![0.0; 2 * n];
    padded[..n].copy_from_slice(&terms[..n]);
    let sums = layout.subtree_sums(&padded);
    let mut out = vec![0.0; n];
    for k in 1..n {
        out[k] = sums[k] / Node(k).volume();
    }
    out
}

/// `(1/|E_{i,Q'}|) sum_{E_{j,Q} inside E_{i,Q'}} alpha_{j,Q} kernel(j,Q)`.
pub fn carleson_sum(
    alpha: &CarlesonSequence,
    base: &HaarIndex,
    kernel: impl Fn(&HaarIndex) -> f64,
) -> Result<f64> {
    let layout = Layout::new(alpha.dim, alpha.depth);
    let root = layout.node_of(base)?;
    let mut total = 0.0;
    let mut stack = vec![root];
    while let Some(node) = stack.pop() {
        if node.0 >= layout.cells() {
            continue;
        }
        let a = alpha.values[node.0];
        if a != 0.0 {
            total += a * kernel(&layout.haar_index(node));
        }
        stack.push(node.lower());
        stack.push(node.upper());
    }
    Ok(total / base.e_volume())
}

/// Averages of `w` and `w^{-1}` over every node of the Wilson tree, leaves included.
#[derive(Debug, Clone)]
pub(crate) struct WeightStats {
    pub layout: Layout,
    /// `<w>_{E}` per node, slot 0 unused.
    pub w: Vec<f64>,
    /// `<w^{-1}>_{E}` per node, slot 0 unused.
    pub v: Vec<f64>,
}

impl WeightStats {
    pub fn new(w: &Weight) -> Self {
        let layout = w.grid().layout();
        let avg_w = layout.node_averages(w.values());
        let avg_v = layout.node_averages(w.reciprocal().values());
        WeightStats {
            layout,
            w: avg_w,
            v: avg_v,
        }
    }

    pub fn cells(&self) -> usize {
        self.layout.cells()
    }

    /// `<w>_{E^1} - <w>_{E^2}` at pair node `k`.
    pub fn dw(&self, k: usize) -> f64 {
        self.w[2 * k] - self.w[2 * k + 1]
    }

    pub fn dv(&self, k: usize) -> f64 {
        self.v[2 * k] - self.v[2 * k + 1]
    }

    /// Runs `carleson_profile` on per-node terms built by `term(k)`.
    pub fn profile(&self, term: impl Fn(usize) -> f64) -> Vec<f64> {
        let n = self.cells();
        let terms: Vec<f64> = (0..n).map(|k| if k == 0 { 0.0 } else { term(k) }).collect();
        carleson_profile(&self.layout, &terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicCube;

    #[test]
    fn unit_mass_sum() {
        let mut alpha = CarlesonSequence::zeros(2, 2);
        let base = HaarIndex::new(DyadicCube::unit(2), 2).unwrap();
        alpha.set(&base, 1.0).unwrap();
        assert_eq!(carleson_sum(&alpha, &base, |_| 1.0).unwrap(), 2.0);
        let root = HaarIndex::new(DyadicCube::unit(2), 1).unwrap();
        assert_eq!(carleson_sum(&alpha, &root, |_| 1.0).unwrap(), 1.0);
        assert_eq!(
            carleson_sum(&CarlesonSequence::zeros(2, 2), &root, |_| 1.0).unwrap(),
            0.0
        );
        assert_eq!(alpha.carleson_constant(), 2.0);
    }

    #[test]
    fn rejects_negative() {
        assert_eq!(
            CarlesonSequence::new(1, 1, vec![-1.0]),
            Err(Error::NegativeCarleson {
                index: 0,
                value: -1.0
            })
        );
    }
}
