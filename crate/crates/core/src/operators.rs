//! Paraproducts, their adjoint and tensor variant, the martingale transform,
//! dyadic square functions and the product decomposition, all evaluated
//! exactly through Haar coefficients at the grid depth.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::dyadic::{HaarIndex, Layout, Node};
use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::haar::{coefficients_in, synthesize_in};
use crate::linalg::{top_eigenvalue_psd, values_hash, NormMethod, OperatorMatrix};
use crate::report::CheckReport;
use crate::weights::Weight;

fn from_values(like: &GridFunction, values: Vec<f64>) -> GridFunction {
    GridFunction::new(like.dim(), like.depth(), values).expect("same shape")
}

/// Synthesizes `sum_k c_k h_k` with no mean term.
fn synthesize_mean_zero(layout: &Layout, mut coeffs: Vec<f64>) -> Vec<f64> {
    coeffs[0] = 0.0;
    synthesize_in(layout, &coeffs)
}

/// Cell values of the sum of `add[node]` over every non-root node containing the cell.
fn accumulate_paths(layout: &Layout, add: &[f64]) -> Vec<f64> {
    layout.push_down(0.0, |node, upper| add[2 * node.0 + upper as usize])
}

/// `pi_b f = sum <f>_{E_{j,Q}} <b, h_{j,Q}> h_{j,Q}`.
pub fn paraproduct(b: &GridFunction, f: &GridFunction) -> Result<GridFunction> {
    b.same_shape(f)?;
    let layout = f.layout();
    let cb = coefficients_in(&layout, b.values());
    let avg = layout.node_averages(f.values());
    let coeffs = cb.iter().enumerate().map(|(k, c)| c * avg[k]).collect();
    Ok(from_values(f, synthesize_mean_zero(&layout, coeffs)))
}

/// `pi_b^* f = sum <f, h_{j,Q}> <b, h_{j,Q}> chi_{E_{j,Q}} / |E_{j,Q}|`.
pub fn paraproduct_adjoint(b: &GridFunction, f: &GridFunction) -> Result<GridFunction> {
    b.same_shape(f)?;
    let layout = f.layout();
    let n = layout.cells();
    let cb = coefficients_in(&layout, b.values());
    let cf = coefficients_in(&layout, f.values());
    let mut add = vec![0.0; 2 * n];
    for k in 1..n {
        let v = cf[k] * cb[k] / Node(k).volume();
        add[2 * k] = v;
        add[2 * k + 1] = v;
    }
    Ok(from_values(f, accumulate_paths(&layout, &add)))
}

/// `pi^s_b f = sum_Q <f>_Q sum_j <b, h_{j,Q}> h_{j,Q}` (Wilson-basis form).
pub fn tensor_paraproduct(b: &GridFunction, f: &GridFunction) -> Result<GridFunction> {
    b.same_shape(f)?;
    let layout = f.layout();
    let cb = coefficients_in(&layout, b.values());
    let avg = layout.node_averages(f.values());
    let coeffs = cb
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if k == 0 {
                0.0
            } else {
                c * avg[layout.cube_node(Node(k)).0]
            }
        })
        .collect();
    Ok(from_values(f, synthesize_mean_zero(&layout, coeffs)))
}

/// `pi^s_b f` through the tensor-product basis `h^s_{sigma,Q}` on each cube.
pub fn tensor_paraproduct_tensor_basis(b: &GridFunction, f: &GridFunction) -> Result<GridFunction> {
    b.same_shape(f)?;
    let layout = f.layout();
    let dim = f.dim();
    let n = layout.cells();
    let children = 1usize << dim;
    let bavg = layout.node_averages(b.values());
    let favg = layout.node_averages(f.values());
    // Child `t` of cube node `q` is node `q * 2^dim + t`; bit `a` of `t` is the axis-`a` half.
    let sign = |sigma: usize, t: usize| -> f64 {
        (0..dim)
            .filter(|a| (sigma >> a) & 1 == 0)
            .map(|a| if (t >> a) & 1 == 1 { 1.0 } else { -1.0 })
            .product()
    };
    let mut add = vec![0.0; 2 * n];
    for q in (1..n).filter(|&q| layout.is_cube_node(Node(q))) {
        let vol = Node(q).volume();
        let child_vol = vol / children as f64;
        let mut out = vec![0.0; children];
        for sigma in 0..children - 1 {
            let coef: f64 = (0..children)
                .map(|t| child_vol * bavg[q * children + t] * sign(sigma, t))
                .sum::<f64>()
                / libm::sqrt(vol);
            for (t, o) in out.iter_mut().enumerate() {
                *o += coef * sign(sigma, t) / libm::sqrt(vol);
            }
        }
        for (t, o) in out.iter().enumerate() {
            add[q * children + t] += favg[q] * o;
        }
    }
    Ok(from_values(f, accumulate_paths(&layout, &add)))
}

/// `(pi^s_b - pi_b) f = sum (<f>_Q - <f>_{E_{j,Q}}) <b, h_{j,Q}> h_{j,Q}`.
pub fn paraproduct_difference(b: &GridFunction, f: &GridFunction) -> Result<GridFunction> {
    b.same_shape(f)?;
    let layout = f.layout();
    let cb = coefficients_in(&layout, b.values());
    let avg = layout.node_averages(f.values());
    let coeffs = cb
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if k == 0 {
                0.0
            } else {
                (avg[layout.cube_node(Node(k)).0] - avg[k]) * c
            }
        })
        .collect();
    Ok(from_values(f, synthesize_mean_zero(&layout, coeffs)))
}

/// Pointwise domination of the difference operator by
/// `sum_Q sum_j sum_{i: E_i strictly contains E_j} |<f,h_i>| |<b,h_j>| chi_{E_j}/|E_j|`.
///
/// Rows are per cell; the empirical constant is the largest `|lhs| / rhs`.
pub fn difference_domination(b: &GridFunction, f: &GridFunction) -> Result<CheckReport> {
    let lhs = paraproduct_difference(b, f)?;
    let layout = f.layout();
    let n = layout.cells();
    let cb = coefficients_in(&layout, b.values());
    let cf = coefficients_in(&layout, f.values());
    // Sum of |<f,h_i>| over strict ancestors of node k inside the same cube.
    let mut above = vec![0.0; n];
    for k in 2..n {
        if !layout.is_cube_node(Node(k)) {
            above[k] = above[k / 2] + libm::fabs(cf[k / 2]);
        }
    }
    let mut add = vec![0.0; 2 * n];
    for k in 1..n {
        let v = above[k] * libm::fabs(cb[k]) / Node(k).volume();
        add[2 * k] = v;
        add[2 * k + 1] = v;
    }
    let rhs = accumulate_paths(&layout, &add);
    let mut report =
        CheckReport::new("difference-domination", "wilson", f.dim(), f.depth()).with_cap(1.0);
    for (c, (l, r)) in lhs.values().iter().zip(&rhs).enumerate() {
        report.record(format!("cell {c}"), libm::fabs(*l), *r);
    }
    Ok(report)
}

/// Signs `sigma_{E_{j,Q}}` for every pair at levels below the depth, in tree order.
#[derive(Debug, Clone, PartialEq)]
pub struct SignPattern {
    dim: usize,
    depth: usize,
    signs: Vec<i8>,
}

impl SignPattern {
    /// `signs[k - 1]` is the sign of `Node(k)`.
    pub fn new(dim: usize, depth: usize, signs: Vec<i8>) -> Result<Self> {
        let expected = (1usize << (dim * depth)) - 1;
        if signs.len() != expected {
            return Err(Error::MissingSign {
                expected,
                found: signs.len(),
            });
        }
        if let Some((index, &value)) = signs.iter().enumerate().find(|(_, &s)| s != 1 && s != -1) {
            return Err(Error::InvalidSign { index, value });
        }
        Ok(SignPattern { dim, depth, signs })
    }

    pub fn constant(dim: usize, depth: usize, sign: i8) -> Result<Self> {
        Self::new(dim, depth, vec![sign; (1usize << (dim * depth)) - 1])
    }

    pub fn random(dim: usize, depth: usize, seed: u64) -> Self {
        let signs = crate::sample::random_signs((1usize << (dim * depth)) - 1, seed);
        SignPattern { dim, depth, signs }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn get(&self, idx: &HaarIndex) -> Result<i8> {
        let node = Layout::new(self.dim, self.depth).node_of(idx)?;
        Ok(self.signs[node.0 - 1])
    }
}

/// `T_sigma f = sum sigma_{E_{j,Q}} <f, h_{j,Q}> h_{j,Q}`.
pub fn martingale_transform(sigma: &SignPattern, f: &GridFunction) -> Result<GridFunction> {
    if sigma.dim != f.dim() || sigma.depth != f.depth() {
        return Err(Error::ShapeMismatch {
            expected_dim: sigma.dim,
            expected_depth: sigma.depth,
            found_dim: f.dim(),
            found_depth: f.depth(),
        });
    }
    let layout = f.layout();
    let cf = coefficients_in(&layout, f.values());
    let coeffs = cf
        .iter()
        .enumerate()
        .map(|(k, c)| {
            if k == 0 {
                0.0
            } else {
                sigma.signs[k - 1] as f64 * c
            }
        })
        .collect();
    Ok(from_values(f, synthesize_mean_zero(&layout, coeffs)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SquareForm {
    /// `(sum_Q (<f>_Q - <f>_{parent Q})^2 chi_Q)^{1/2}` over cubes of level `1..=depth`.
    Increment,
    /// `(sum_Q |Q|^{-1} sum_j <f, h_{j,Q}>^2 chi_Q)^{1/2}` over cubes of level `0..depth`.
    Wilson,
}

pub fn square_function(f: &GridFunction, form: SquareForm) -> GridFunction {
    let layout = f.layout();
    let n = layout.cells();
    let dim = f.dim();
    let mut add = vec![0.0; 2 * n];
    match form {
        SquareForm::Increment => {
            let avg = layout.node_averages(f.values());
            for k in 2..2 * n {
                if layout.is_cube_node(Node(k)) {
                    let d = avg[k] - avg[k >> dim];
                    add[k] = d * d;
                }
            }
        }
        SquareForm::Wilson => {
            let cf = coefficients_in(&layout, f.values());
            let mut per_cube = vec![0.0; n];
            for (k, c) in cf.iter().enumerate().skip(1) {
                per_cube[layout.cube_node(Node(k)).0] += c * c;
            }
            // Spread each cube's term onto its two halves, one tree level down.
            for q in (1..n).filter(|&q| layout.is_cube_node(Node(q))) {
                let v = per_cube[q] / Node(q).volume();
                add[2 * q] += v;
                add[2 * q + 1] += v;
            }
        }
    }
    let sq = accumulate_paths(&layout, &add);
    from_values(f, sq.into_iter().map(libm::sqrt).collect())
}

/// Row-major `N x N` matrix `K` with `||S f||^2_{L^2(w)} = f^T K f` on cell values.
pub fn square_function_form(w: &Weight, form: SquareForm) -> Vec<f64> {
    let layout = w.grid().layout();
    let n = layout.cells();
    let dim = w.dim();
    let leaves = layout.leaf_cells();
    let wsum = layout.node_sums(w.values());
    let mut k_mat = vec![0.0; n * n];
    let mut add_rank_one = |d: &[(usize, f64)], scale: f64| {
        for &(r, dr) in d {
            for &(c, dc) in d {
                k_mat[r * n + c] += scale * dr * dc;
            }
        }
    };
    match form {
        SquareForm::Increment => {
            for q in 2..2 * n {
                if !layout.is_cube_node(Node(q)) {
                    continue;
                }
                let parent = q >> dim;
                let inner = layout.leaf_range(Node(q));
                let outer = layout.leaf_range(Node(parent));
                let (ni, no) = (inner.len() as f64, outer.len() as f64);
                let d: Vec<(usize, f64)> = outer
                    .map(|p| {
                        let v = if inner.contains(&p) {
                            1.0 / ni - 1.0 / no
                        } else {
                            -1.0 / no
                        };
                        (leaves[p], v)
                    })
                    .collect();
                add_rank_one(&d, wsum[q] / n as f64);
            }
        }
        SquareForm::Wilson => {
            for k in 1..n {
                let q = layout.cube_node(Node(k)).0;
                let (lo, hi) = (
                    layout.leaf_range(Node(2 * k)),
                    layout.leaf_range(Node(2 * k + 1)),
                );
                let amp = 1.0 / (libm::sqrt(Node(k).volume()) * n as f64);
                let d: Vec<(usize, f64)> = lo
                    .map(|p| (leaves[p], -amp))
                    .chain(hi.map(|p| (leaves[p], amp)))
                    .collect();
                add_rank_one(&d, wsum[q] / n as f64 / Node(q).volume());
            }
        }
    }
    k_mat
}

/// `sup_f ||S f||_{L^2(w)} / ||f||_{L^2(w)}` as the top generalized Rayleigh quotient.
pub fn square_function_norm(w: &Weight, form: SquareForm, method: NormMethod) -> Result<f64> {
    let n = w.values().len();
    let mut k = square_function_form(w, form);
    let d: Vec<f64> = w
        .values()
        .iter()
        .map(|&v| 1.0 / libm::sqrt(v / n as f64))
        .collect();
    for r in 0..n {
        for c in 0..n {
            k[r * n + c] *= d[r] * d[c];
        }
    }
    Ok(libm::sqrt(top_eigenvalue_psd(&k, n, method)?.max(0.0)))
}

/// The three non-constant terms of `fg`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductDecomposition {
    /// `<f> <g>` over the unit cube.
    pub mean_term: f64,
    /// `sum <f,h><g,h> chi_E / |E|`.
    pub diagonal: GridFunction,
    /// `sum <f,h> <g>_E h`.
    pub upper: GridFunction,
    /// `sum <g,h> <f>_E h`.
    pub lower: GridFunction,
}

impl ProductDecomposition {
    pub fn reconstruct(&self) -> GridFunction {
        let sum = self.diagonal.add(&self.upper).add(&self.lower);
        sum.map(|v| v + self.mean_term)
    }
}

pub fn product_decomposition(f: &GridFunction, g: &GridFunction) -> Result<ProductDecomposition> {
    f.same_shape(g)?;
    Ok(ProductDecomposition {
        mean_term: f.mean() * g.mean(),
        diagonal: paraproduct_adjoint(f, g)?,
        upper: paraproduct(f, g)?,
        lower: paraproduct(g, f)?,
    })
}

/// `<pi_b(f w^{-1/2}), g w^{1/2}>` in the unweighted pairing.
pub fn bilinear_form(
    b: &GridFunction,
    f: &GridFunction,
    g: &GridFunction,
    w: &Weight,
) -> Result<f64> {
    b.same_shape(f)?;
    b.same_shape(g)?;
    b.same_shape(w.grid())?;
    let pf = paraproduct(b, &f.mul(&w.inv_sqrt()))?;
    Ok(pf.inner(&g.mul(&w.sqrt())))
}

/// Operators that act linearly on grid functions.
#[derive(Debug, Clone, Copy)]
pub enum LinearOperator<'a> {
    Paraproduct(&'a GridFunction),
    ParaproductAdjoint(&'a GridFunction),
    TensorParaproduct(&'a GridFunction),
    ParaproductDifference(&'a GridFunction),
    Martingale(&'a SignPattern),
}

impl LinearOperator<'_> {
    pub fn kind(&self) -> &'static str {
        match self {
            LinearOperator::Paraproduct(_) => "paraproduct",
            LinearOperator::ParaproductAdjoint(_) => "paraproduct-adjoint",
            LinearOperator::TensorParaproduct(_) => "tensor-paraproduct",
            LinearOperator::ParaproductDifference(_) => "paraproduct-difference",
            LinearOperator::Martingale(_) => "martingale",
        }
    }

    pub fn apply(&self, f: &GridFunction) -> Result<GridFunction> {
        match *self {
            LinearOperator::Paraproduct(b) => paraproduct(b, f),
            LinearOperator::ParaproductAdjoint(b) => paraproduct_adjoint(b, f),
            LinearOperator::TensorParaproduct(b) => tensor_paraproduct(b, f),
            LinearOperator::ParaproductDifference(b) => paraproduct_difference(b, f),
            LinearOperator::Martingale(s) => martingale_transform(s, f),
        }
    }

    pub fn matrix(&self, dim: usize, depth: usize) -> Result<OperatorMatrix> {
        let hash = match *self {
            LinearOperator::Martingale(s) => {
                let v: Vec<f64> = s.signs.iter().map(|&x| x as f64).collect();
                values_hash(&v)
            }
            LinearOperator::Paraproduct(b)
            | LinearOperator::ParaproductAdjoint(b)
            | LinearOperator::TensorParaproduct(b)
            | LinearOperator::ParaproductDifference(b) => values_hash(b.values()),
        };
        Ok(
            OperatorMatrix::from_operator(dim, depth, self.kind(), |f| self.apply(f))?
                .with_symbol_hash(hash),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::DyadicCube;
    use crate::haar::wilson_haar;
    use crate::sample::random_grid;

    #[test]
    fn paraproduct_trivial_cases() {
        let b = random_grid(2, 2, 1);
        let c = GridFunction::constant(2, 2, 3.0);
        let p = paraproduct(&b, &c).unwrap();
        let expected = b.map(|v| 3.0 * (v - b.mean()));
        assert!(p.max_abs_diff(&expected) < 1e-13);
        assert!(paraproduct(&c, &b)
            .unwrap()
            .values()
            .iter()
            .all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn tensor_forms_agree() {
        for (dim, depth) in [(1, 3), (2, 2), (3, 1)] {
            let b = random_grid(dim, depth, 5);
            let f = random_grid(dim, depth, 6);
            let a = tensor_paraproduct(&b, &f).unwrap();
            let t = tensor_paraproduct_tensor_basis(&b, &f).unwrap();
            assert!(a.max_abs_diff(&t) < 1e-12, "dim {dim}");
        }
    }

    #[test]
    fn difference_vanishes_in_one_dimension() {
        let b = random_grid(1, 4, 2);
        let f = random_grid(1, 4, 3);
        assert!(paraproduct_difference(&b, &f)
            .unwrap()
            .values()
            .iter()
            .all(|v| v.abs() < 1e-14));
    }

    #[test]
    fn martingale_constant_signs() {
        let f = random_grid(2, 2, 9);
        let plus = martingale_transform(&SignPattern::constant(2, 2, 1).unwrap(), &f).unwrap();
        assert!(plus.max_abs_diff(&f.map(|v| v - f.mean())) < 1e-13);
        assert_eq!(
            SignPattern::new(1, 1, vec![0]),
            Err(Error::InvalidSign { index: 0, value: 0 })
        );
        assert_eq!(
            SignPattern::new(1, 2, vec![1]),
            Err(Error::MissingSign {
                expected: 3,
                found: 1
            })
        );
    }

    #[test]
    fn square_function_single_haar() {
        let h = wilson_haar(&HaarIndex::new(DyadicCube::unit(1), 1).unwrap(), 1).unwrap();
        for form in [SquareForm::Increment, SquareForm::Wilson] {
            let s = square_function(&h, form);
            assert!(
                s.values().iter().all(|v| (v - 1.0).abs() < 1e-15),
                "{form:?}"
            );
        }
    }

    #[test]
    fn square_form_matches_direct_norm() {
        let w = crate::sample::random_weight(2, 2, 4);
        let f = random_grid(2, 2, 8);
        for form in [SquareForm::Increment, SquareForm::Wilson] {
            let k = square_function_form(&w, form);
            let n = f.len();
            let q: f64 = (0..n)
                .map(|r| {
                    (0..n)
                        .map(|c| f.values()[r] * k[r * n + c] * f.values()[c])
                        .sum::<f64>()
                })
                .sum();
            let direct = square_function(&f, form).weighted_norm_sq(w.grid());
            assert!((q - direct).abs() < 1e-12, "{form:?}: {q} vs {direct}");
        }
    }

    #[test]
    fn decomposition_of_constants() {
        let one = GridFunction::constant(2, 2, 1.0);
        let d = product_decomposition(&one, &one).unwrap();
        assert_eq!(d.mean_term, 1.0);
        assert!(d.reconstruct().max_abs_diff(&one) < 1e-15);
    }
}
