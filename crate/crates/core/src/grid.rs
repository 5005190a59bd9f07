use alloc::vec;
use alloc::vec::Vec;

use crate::dyadic::{DyadicRectangle, Layout};
use crate::error::{Error, Result};

/// Piecewise-constant function on the depth-`depth` dyadic grid of `[0,1)^dim`.
///
/// `values` holds the `2^(dim*depth)` cell values in lexicographic order,
/// axis 0 most significant.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    dim: usize,
    depth: usize,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(dim: usize, depth: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        let expected = cell_count(dim, depth);
        if values.len() != expected {
            return Err(Error::ValueCount {
                expected,
                found: values.len(),
            });
        }
        Ok(GridFunction { dim, depth, values })
    }

    pub fn constant(dim: usize, depth: usize, c: f64) -> Self {
        GridFunction {
            dim,
            depth,
            values: vec![c; cell_count(dim, depth)],
        }
    }

    pub fn zeros(dim: usize, depth: usize) -> Self {
        Self::constant(dim, depth, 0.0)
    }

    /// Builds a function from its value on each cell, given the cell's integer coordinates.
    pub fn from_cells(dim: usize, depth: usize, mut f: impl FnMut(&[u64]) -> f64) -> Self {
        let layout_mask = (1usize << depth) - 1;
        let n = cell_count(dim, depth);
        let mut coords = vec![0u64; dim];
        let values = (0..n)
            .map(|cell| {
                for (a, c) in coords.iter_mut().enumerate() {
                    *c = ((cell >> (depth * (dim - 1 - a))) & layout_mask) as u64;
                }
                f(&coords)
            })
            .collect();
        GridFunction { dim, depth, values }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn cell_volume(&self) -> f64 {
        1.0 / self.values.len() as f64
    }

    pub fn same_shape(&self, other: &GridFunction) -> Result<()> {
        if self.dim != other.dim || self.depth != other.depth {
            return Err(Error::ShapeMismatch {
                expected_dim: self.dim,
                expected_depth: self.depth,
                found_dim: other.dim,
                found_depth: other.depth,
            });
        }
        Ok(())
    }

    pub fn layout(&self) -> Layout {
        Layout::new(self.dim, self.depth)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Unweighted `L^2([0,1)^n)` pairing.
    pub fn inner(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            / self.values.len() as f64
    }

    pub fn norm_sq(&self) -> f64 {
        self.inner(self)
    }

    pub fn norm(&self) -> f64 {
        libm::sqrt(self.norm_sq())
    }

    /// `||f||^2_{L^2(w)}` with `w` given cellwise.
    pub fn weighted_norm_sq(&self, w: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&w.values)
            .map(|(f, w)| f * f * w)
            .sum::<f64>()
            / self.values.len() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction {
            dim: self.dim,
            depth: self.depth,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_with(&self, other: &GridFunction, f: impl Fn(f64, f64) -> f64) -> GridFunction {
        debug_assert_eq!(self.values.len(), other.values.len());
        GridFunction {
            dim: self.dim,
            depth: self.depth,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn add(&self, other: &GridFunction) -> GridFunction {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &GridFunction) -> GridFunction {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &GridFunction) -> GridFunction {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, c: f64) -> GridFunction {
        self.map(|v| c * v)
    }

    pub fn max_abs_diff(&self, other: &GridFunction) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max)
    }

    /// Arithmetic mean of the cells inside `rect`, by direct enumeration.
    pub fn average_over(&self, rect: &DyadicRectangle) -> f64 {
        let (sum, count) = self.sum_over(rect, |v| v);
        sum / count as f64
    }

    /// `(sum of g(value), number of cells)` over the cells inside `rect`.
    pub fn sum_over(&self, rect: &DyadicRectangle, g: impl Fn(f64) -> f64) -> (f64, usize) {
        let depth = self.depth as u32;
        let mut sum = 0.0;
        let mut count = 0;
        for_each_cell_in(rect, self.dim, self.depth, |cell| {
            sum += g(self.values[cell]);
            count += 1;
        });
        debug_assert!(rect.max_level() <= depth);
        (sum, count)
    }
}

pub fn cell_count(dim: usize, depth: usize) -> usize {
    1usize << (dim * depth)
}

/// Calls `f` with the lexicographic index of every depth-`depth` cell in `rect`.
pub fn for_each_cell_in(
    rect: &DyadicRectangle,
    dim: usize,
    depth: usize,
    mut f: impl FnMut(usize),
) {
    let ranges: Vec<core::ops::Range<u64>> = rect
        .sides()
        .iter()
        .map(|s| s.cell_range(depth as u32))
        .collect();
    let mut coords: Vec<u64> = ranges.iter().map(|r| r.start).collect();
    loop {
        let cell: usize = coords
            .iter()
            .enumerate()
            .map(|(a, &c)| (c as usize) << (depth * (dim - 1 - a)))
            .sum();
        f(cell);
        let mut axis = dim;
        loop {
            if axis == 0 {
                return;
            }
            axis -= 1;
            coords[axis] += 1;
            if coords[axis] < ranges[axis].end {
                break;
            }
            coords[axis] = ranges[axis].start;
        }
    }
}
