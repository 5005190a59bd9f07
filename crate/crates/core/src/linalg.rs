//! Dense operator matrices in the cell basis and their weighted `L^2` norms.
//!
//! Two independent routes compute the top singular value: a dense SVD
//! (backed by nalgebra) and a power iteration on `M^T M` with a residual
//! stopping rule.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{cell_count, GridFunction};
use crate::sample::rng;
use crate::weights::Weight;

/// Square matrix acting on cell-value vectors (lexicographic order), row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorMatrix {
    pub dim: usize,
    pub depth: usize,
    pub kind: String,
    pub symbol_hash: u64,
    data: Vec<f64>,
}

impl OperatorMatrix {
    pub fn new(dim: usize, depth: usize, kind: &str, data: Vec<f64>) -> Result<Self> {
        let n = cell_count(dim, depth);
        if data.len() != n * n {
            return Err(Error::ValueCount {
                expected: n * n,
                found: data.len(),
            });
        }
        Ok(OperatorMatrix {
            dim,
            depth,
            kind: kind.into(),
            symbol_hash: 0,
            data,
        })
    }

    /// Assembles the matrix column by column from the action on cell indicators.
    pub fn from_operator(
        dim: usize,
        depth: usize,
        kind: &str,
        mut op: impl FnMut(&GridFunction) -> Result<GridFunction>,
    ) -> Result<Self> {
        let n = cell_count(dim, depth);
        let mut data = vec![0.0; n * n];
        let mut e = GridFunction::zeros(dim, depth);
        for c in 0..n {
            e.values_mut()[c] = 1.0;
            let col = op(&e)?;
            e.values_mut()[c] = 0.0;
            for (r, v) in col.values().iter().enumerate() {
                data[r * n + c] = *v;
            }
        }
        Ok(OperatorMatrix {
            dim,
            depth,
            kind: kind.into(),
            symbol_hash: 0,
            data,
        })
    }

    pub fn with_symbol_hash(mut self, hash: u64) -> Self {
        self.symbol_hash = hash;
        self
    }

    pub fn size(&self) -> usize {
        cell_count(self.dim, self.depth)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.size() + c]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.size();
        let mut y = vec![0.0; n];
        mat_vec(&self.data, n, x, &mut y);
        y
    }

    pub fn apply_grid(&self, f: &GridFunction) -> GridFunction {
        GridFunction::new(self.dim, self.depth, self.apply(f.values())).expect("square matrix")
    }

    pub fn transpose(&self) -> OperatorMatrix {
        let n = self.size();
        let mut data = vec![0.0; n * n];
        for r in 0..n {
            for c in 0..n {
                data[c * n + r] = self.data[r * n + c];
            }
        }
        OperatorMatrix {
            data,
            kind: self.kind.clone(),
            ..*self
        }
    }

    pub fn max_abs_diff(&self, other: &OperatorMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max)
    }

    /// `D M D^{-1}` with `D = diag(w^{1/2})`; its spectral norm is the `L^2(w)` norm of `M`.
    pub fn weighted(&self, w: &Weight) -> Result<OperatorMatrix> {
        let n = self.size();
        if w.values().len() != n {
            return Err(Error::MatrixShape {
                rows: n,
                cols: n,
                cells: w.values().len(),
            });
        }
        let s: Vec<f64> = w.values().iter().map(|&v| libm::sqrt(v)).collect();
        let mut data = self.data.clone();
        for r in 0..n {
            for c in 0..n {
                data[r * n + c] *= s[r] / s[c];
            }
        }
        Ok(OperatorMatrix {
            data,
            kind: self.kind.clone(),
            ..*self
        })
    }

    pub fn to_dmatrix(&self) -> DMatrix<f64> {
        let n = self.size();
        DMatrix::from_row_slice(n, n, &self.data)
    }

    /// Rank, counting singular values above `tol * max(1, sigma_max)`.
    pub fn rank(&self, tol: f64) -> usize {
        let sv = self.to_dmatrix().singular_values();
        let top = sv.iter().cloned().fold(0.0, f64::max);
        sv.iter().filter(|&&s| s > tol * top.max(1.0)).count()
    }
}

fn mat_vec(data: &[f64], n: usize, x: &[f64], y: &mut [f64]) {
    for (r, out) in y.iter_mut().enumerate() {
        *out = data[r * n..(r + 1) * n]
            .iter()
            .zip(x)
            .map(|(a, b)| a * b)
            .sum();
    }
}

fn mat_t_vec(data: &[f64], n: usize, x: &[f64], y: &mut [f64]) {
    y.iter_mut().for_each(|v| *v = 0.0);
    for (r, &xr) in x.iter().enumerate() {
        if xr != 0.0 {
            for (out, a) in y.iter_mut().zip(&data[r * n..(r + 1) * n]) {
                *out += a * xr;
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NormMethod {
    Dense,
    /// Stops once `||G x - lambda x|| <= tol * lambda`.
    Power {
        tol: f64,
        max_iter: usize,
        seed: u64,
    },
}

impl NormMethod {
    pub const DEFAULT_POWER: NormMethod = NormMethod::Power {
        tol: 1e-10,
        max_iter: 200_000,
        seed: 0x5eed,
    };
}

/// `||M||_{L^2(w) -> L^2(w)}`.
pub fn operator_norm(m: &OperatorMatrix, w: &Weight, method: NormMethod) -> Result<f64> {
    top_singular_value(&m.weighted(w)?, method)
}

pub fn top_singular_value(m: &OperatorMatrix, method: NormMethod) -> Result<f64> {
    let n = m.size();
    match method {
        NormMethod::Dense => Ok(m
            .to_dmatrix()
            .singular_values()
            .iter()
            .cloned()
            .fold(0.0, f64::max)),
        NormMethod::Power {
            tol,
            max_iter,
            seed,
        } => {
            let mut tmp = vec![0.0; n];
            let lambda = power_iteration(n, tol, max_iter, seed, |x, y| {
                mat_vec(m.data(), n, x, &mut tmp);
                mat_t_vec(m.data(), n, &tmp, y);
            })?;
            Ok(libm::sqrt(lambda.max(0.0)))
        }
    }
}

/// `(sigma, u, v)` with `M v = sigma u`, both unit vectors, from the dense SVD.
pub fn top_singular_pair(m: &OperatorMatrix) -> (f64, Vec<f64>, Vec<f64>) {
    let svd = m.to_dmatrix().svd(true, true);
    let (k, sigma) = svd.singular_values.iter().cloned().enumerate().fold(
        (0, f64::NEG_INFINITY),
        |best, (i, s)| if s > best.1 { (i, s) } else { best },
    );
    let u = svd
        .u
        .expect("requested")
        .column(k)
        .iter()
        .cloned()
        .collect();
    let v = svd.v_t.expect("requested").row(k).iter().cloned().collect();
    (sigma, u, v)
}

/// Largest eigenvalue of a symmetric positive semidefinite `n x n` matrix (row-major).
pub fn top_eigenvalue_psd(sym: &[f64], n: usize, method: NormMethod) -> Result<f64> {
    if sym.len() != n * n {
        return Err(Error::ValueCount {
            expected: n * n,
            found: sym.len(),
        });
    }
    match method {
        NormMethod::Dense => {
            let m = DMatrix::from_row_slice(n, n, sym);
            Ok(m.symmetric_eigenvalues()
                .iter()
                .cloned()
                .fold(0.0, f64::max))
        }
        NormMethod::Power {
            tol,
            max_iter,
            seed,
        } => power_iteration(n, tol, max_iter, seed, |x, y| mat_vec(sym, n, x, y)),
    }
}

/// Top eigenvalue of the PSD operator `apply` by power iteration from a seeded start.
fn power_iteration(
    n: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
    mut apply: impl FnMut(&[f64], &mut [f64]),
) -> Result<f64> {
    let mut r = rng(seed);
    let mut x: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
    normalize(&mut x);
    let mut y = vec![0.0; n];
    let mut lambda = 0.0;
    for _ in 0..max_iter {
        apply(&x, &mut y);
        lambda = dot(&x, &y);
        let resid = libm::sqrt(
            y.iter()
                .zip(&x)
                .map(|(a, b)| (a - lambda * b) * (a - lambda * b))
                .sum(),
        );
        if resid <= tol * libm::fabs(lambda) || dot(&y, &y) == 0.0 {
            return Ok(lambda);
        }
        core::mem::swap(&mut x, &mut y);
        normalize(&mut x);
    }
    Err(Error::NonConvergence {
        iterations: max_iter,
        estimate: lambda,
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(x: &mut [f64]) {
    let norm = libm::sqrt(dot(x, x));
    if norm > 0.0 {
        x.iter_mut().for_each(|v| *v /= norm);
    }
}

/// FNV-1a over the bit patterns of `values`.
pub fn values_hash(values: &[f64]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for v in values {
        for byte in v.to_bits().to_le_bytes() {
            h ^= byte as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}
