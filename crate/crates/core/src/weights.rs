//! Weights and symbols: generators, `A_p` characteristics over dyadic cubes
//! and rectangles, dyadic and rectangular BMO norms, and the John–Nirenberg
//! and self-improving diagnostics.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dyadic::{DyadicInterval, DyadicRectangle, Layout, Node};
use crate::error::{Error, Result};
use crate::grid::{for_each_cell_in, GridFunction};
use crate::haar::coefficients_in;
use crate::report::CheckReport;

/// A grid function whose cells are finite and strictly positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Weight {
    grid: GridFunction,
}

impl Weight {
    pub fn new(grid: GridFunction) -> Result<Self> {
        if let Some((index, &value)) = grid
            .values()
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::NonPositiveWeight { index, value });
        }
        Ok(Weight { grid })
    }

    pub fn constant(dim: usize, depth: usize, c: f64) -> Self {
        assert!(c.is_finite() && c > 0.0, "constant weight must be positive");
        Weight {
            grid: GridFunction::constant(dim, depth, c),
        }
    }

    pub fn grid(&self) -> &GridFunction {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        self.grid.values()
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn depth(&self) -> usize {
        self.grid.depth()
    }

    /// `w^{-1}`, the cellwise reciprocal.
    pub fn reciprocal(&self) -> Weight {
        Weight {
            grid: self.grid.map(|v| 1.0 / v),
        }
    }

    pub fn scale(&self, c: f64) -> Result<Weight> {
        Weight::new(self.grid.scale(c))
    }

    /// `w^{1/2}` and `w^{-1/2}` as grid functions.
    pub fn sqrt(&self) -> GridFunction {
        self.grid.map(libm::sqrt)
    }

    pub fn inv_sqrt(&self) -> GridFunction {
        self.grid.map(|v| 1.0 / libm::sqrt(v))
    }
}

/// Recipe for a generated weight.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSpec {
    /// `|x|^alpha`.
    Power { alpha: f64 },
    /// Multiplicative dyadic cascade; `decay` shrinks the amplitude per cube level.
    Cascade { delta: f64, seed: u64, decay: f64 },
}

pub const DEFAULT_CASCADE_DECAY: f64 = core::f64::consts::FRAC_1_SQRT_2;

pub fn make_weight(spec: &WeightSpec, dim: usize, depth: usize) -> Result<Weight> {
    match *spec {
        WeightSpec::Power { alpha } => power_weight(dim, depth, alpha),
        WeightSpec::Cascade { delta, seed, decay } => {
            cascade_weight(dim, depth, delta, seed, decay)
        }
    }
}

/// `|x|^alpha`: exact cell averages in one dimension, cell-midpoint values otherwise.
pub fn power_weight(dim: usize, depth: usize, alpha: f64) -> Result<Weight> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    if !(alpha.is_finite() && alpha > -(dim as f64)) {
        return Err(Error::InvalidPowerExponent { alpha, dim });
    }
    let h = libm::ldexp(1.0, -(depth as i32));
    let grid = if dim == 1 {
        GridFunction::from_cells(1, depth, |c| {
            let a = c[0] as f64 * h;
            let b = a + h;
            (libm::pow(b, alpha + 1.0) - libm::pow(a, alpha + 1.0)) / ((alpha + 1.0) * h)
        })
    } else {
        GridFunction::from_cells(dim, depth, |c| {
            let r2: f64 = c.iter().map(|&k| (k as f64 + 0.5) * h).map(|x| x * x).sum();
            libm::pow(r2, alpha / 2.0)
        })
    };
    Weight::new(grid)
}

/// Mean-preserving multiplicative cascade along the Wilson tree.
///
/// Every pair node `k` draws `u` uniform in `[-1, 1)` from a ChaCha8 stream
/// keyed by `(seed, k)`; its lower half is multiplied by `1 - d u` and its
/// upper half by `1 + d u`, with `d = delta * decay^level(Q)`.
pub fn cascade_weight(
    dim: usize,
    depth: usize,
    delta: f64,
    seed: u64,
    decay: f64,
) -> Result<Weight> {
    if dim == 0 {
        return Err(Error::ZeroDimension);
    }
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::InvalidCascadeAmplitude(delta));
    }
    if !(decay > 0.0 && decay <= 1.0) {
        return Err(Error::InvalidCascadeDecay(decay));
    }
    let layout = Layout::new(dim, depth);
    let n = layout.cells();
    let mut acc = vec![0.0; 2 * n];
    acc[1] = 1.0;
    for k in 1..n {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let u: f64 = rng.random_range(-1.0..1.0);
        let level = Node(k).tree_depth() as usize / dim;
        let d = delta * libm::pow(decay, level as f64);
        acc[2 * k] = acc[k] * (1.0 - d * u);
        acc[2 * k + 1] = acc[k] * (1.0 + d * u);
    }
    let mut values = vec![0.0; n];
    for p in 0..n {
        values[layout.leaf_to_cell(p)] = acc[n + p];
    }
    Weight::new(GridFunction::new(dim, depth, values)?)
}

/// `log|x|`: exact cell averages in one dimension, cell-midpoint values otherwise.
pub fn log_symbol(dim: usize, depth: usize) -> GridFunction {
    let h = libm::ldexp(1.0, -(depth as i32));
    if dim == 1 {
        let antiderivative = |t: f64| if t == 0.0 { 0.0 } else { t * libm::log(t) - t };
        GridFunction::from_cells(1, depth, |c| {
            let a = c[0] as f64 * h;
            (antiderivative(a + h) - antiderivative(a)) / h
        })
    } else {
        GridFunction::from_cells(dim, depth, |c| {
            let r2: f64 = c.iter().map(|&k| (k as f64 + 0.5) * h).map(|x| x * x).sum();
            0.5 * libm::log(r2)
        })
    }
}

/// Symbol with Haar coefficients `u_k |E_k|^{1/2}`, `u_k` uniform in `[-1, 1)`.
pub fn martingale_symbol(dim: usize, depth: usize, seed: u64) -> GridFunction {
    let layout = Layout::new(dim, depth);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![0.0; layout.cells()];
    for (k, c) in coeffs.iter_mut().enumerate().skip(1) {
        *c = rng.random_range(-1.0..1.0) * libm::sqrt(Node(k).volume());
    }
    let values = crate::haar::synthesize_in(&layout, &coeffs);
    GridFunction::new(dim, depth, values).expect("shape from layout")
}

#[derive(Debug, Clone, PartialEq)]
pub struct CharacteristicReport {
    pub value: f64,
    pub argmax: DyadicRectangle,
    pub p: f64,
}

/// `[w]_{A_p^d}`: supremum over every dyadic cube of level `0..=depth`.
pub fn apd_characteristic(w: &Weight, p: f64) -> Result<CharacteristicReport> {
    if !p.is_finite() || p <= 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    let layout = w.grid().layout();
    let dual: Vec<f64> = if p == 2.0 {
        w.values().iter().map(|v| 1.0 / v).collect()
    } else {
        w.values()
            .iter()
            .map(|&v| libm::pow(v, -1.0 / (p - 1.0)))
            .collect()
    };
    let sw = layout.node_averages(w.values());
    let sd = layout.node_averages(&dual);
    let mut best = (f64::NEG_INFINITY, Node::ROOT);
    for k in 1..2 * layout.cells() {
        let node = Node(k);
        if !layout.is_cube_node(node) {
            continue;
        }
        let v = if p == 2.0 {
            sw[k] * sd[k]
        } else {
            sw[k] * libm::pow(sd[k], p - 1.0)
        };
        if v > best.0 {
            best = (v, node);
        }
    }
    Ok(CharacteristicReport {
        value: best.0,
        argmax: layout.rectangle(best.1),
        p,
    })
}

/// Sums of cell values over every dyadic rectangle with per-axis level `<= depth`.
///
/// Each axis carries the `2^(depth+1) - 1` dyadic intervals in heap order
/// (`id = 2^level - 1 + index`); the table is indexed by the mixed-radix
/// number of the per-axis ids, axis 0 most significant.
#[derive(Debug, Clone)]
pub struct RectangleTable {
    dim: usize,
    depth: usize,
    radix: usize,
    sums: Vec<f64>,
}

impl RectangleTable {
    pub fn new(f: &GridFunction) -> Self {
        let (dim, depth) = (f.dim(), f.depth());
        let radix = (1usize << (depth + 1)) - 1;
        let total = radix.pow(dim as u32);
        let mut sums = vec![0.0; total];
        let leaf0 = (1usize << depth) - 1;
        let layout_mask = (1usize << depth) - 1;
        for (cell, &v) in f.values().iter().enumerate() {
            let mut flat = 0;
            for a in 0..dim {
                let c = (cell >> (depth * (dim - 1 - a))) & layout_mask;
                flat = flat * radix + leaf0 + c;
            }
            sums[flat] = v;
        }
        for a in 0..dim {
            let stride = radix.pow((dim - 1 - a) as u32);
            for flat in (0..total).rev() {
                let id = (flat / stride) % radix;
                if id < leaf0 {
                    sums[flat] = sums[flat + (id + 1) * stride] + sums[flat + (id + 2) * stride];
                }
            }
        }
        RectangleTable {
            dim,
            depth,
            radix,
            sums,
        }
    }

    pub fn len(&self) -> usize {
        self.sums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sums.is_empty()
    }

    pub fn sum(&self, flat: usize) -> f64 {
        self.sums[flat]
    }

    /// Number of depth-`depth` cells inside rectangle `flat`.
    pub fn cell_count(&self, flat: usize) -> usize {
        self.ids(flat)
            .map(|id| 1usize << (self.depth - level_of(id)))
            .product()
    }

    fn ids(&self, flat: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim).map(move |a| (flat / self.radix.pow((self.dim - 1 - a) as u32)) % self.radix)
    }

    pub fn rectangle(&self, flat: usize) -> DyadicRectangle {
        let sides = self
            .ids(flat)
            .map(|id| {
                let level = level_of(id);
                DyadicInterval::new(level as u32, (id + 1 - (1usize << level)) as u64)
                    .expect("valid heap id")
            })
            .collect();
        DyadicRectangle::new(sides).expect("nonempty")
    }
}

fn level_of(heap_id: usize) -> usize {
    (usize::BITS - 1 - (heap_id + 1).leading_zeros()) as usize
}

/// `[w]_{A_2^R}` over every dyadic rectangle with per-axis levels `0..=depth`.
pub fn a2r_characteristic(w: &Weight) -> CharacteristicReport {
    let tw = RectangleTable::new(w.grid());
    let tv = RectangleTable::new(w.reciprocal().grid());
    let mut best = (f64::NEG_INFINITY, 0);
    for flat in 0..tw.len() {
        let count = tw.cell_count(flat) as f64;
        let v = (tw.sum(flat) / count) * (tv.sum(flat) / count);
        if v > best.0 {
            best = (v, flat);
        }
    }
    CharacteristicReport {
        value: best.0,
        argmax: tw.rectangle(best.1),
        p: 2.0,
    }
}

/// `<w>_R <w^{-1}>_R` for a single rectangle, by direct enumeration.
pub fn a2_on_rectangle(w: &Weight, r: &DyadicRectangle) -> f64 {
    w.grid().average_over(r) * w.reciprocal().grid().average_over(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BmoVariant {
    /// `sup_Q (1/|Q|) int_Q |b - <b>_Q|`.
    L1,
    /// `sup_Q (1/|Q|) sum_{Q' in D(Q)} sum_j <b, h_{j,Q'}>^2`.
    L2,
}

/// Dyadic BMO norm over every cube of level `0..=depth`.
///
/// The L2 variant is the squared quantity, as in its definition.
pub fn bmod_norm(b: &GridFunction, variant: BmoVariant) -> f64 {
    let layout = b.layout();
    let n = layout.cells();
    match variant {
        BmoVariant::L1 => {
            let avg = layout.node_averages(b.values());
            let leaves = layout.leaf_cells();
            let mut best: f64 = 0.0;
            for k in 1..2 * n {
                let node = Node(k);
                if !layout.is_cube_node(node) {
                    continue;
                }
                let range = layout.leaf_range(node);
                let count = range.len() as f64;
                let osc: f64 = range
                    .map(|p| libm::fabs(b.values()[leaves[p]] - avg[k]))
                    .sum::<f64>()
                    / count;
                best = best.max(osc);
            }
            best
        }
        BmoVariant::L2 => {
            let coeffs = coefficients_in(&layout, b.values());
            let mut terms = vec![0.0; 2 * n];
            for k in 1..n {
                terms[k] = coeffs[k] * coeffs[k];
            }
            let sums = layout.subtree_sums(&terms);
            (1..n)
                .filter(|&k| layout.is_cube_node(Node(k)))
                .map(|k| sums[k] / Node(k).volume())
                .fold(0.0, f64::max)
        }
    }
}

fn power_abs(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        libm::fabs(x)
    } else {
        libm::pow(libm::fabs(x), p)
    }
}

fn root(x: f64, p: f64) -> f64 {
    if p == 1.0 {
        x
    } else {
        libm::pow(x, 1.0 / p)
    }
}

/// `sup_R ((1/|R|) int_R |b - <b>_R|^p)^{1/p}` over dyadic rectangles, with its maximizer.
fn rectangular_oscillation(b: &GridFunction, p: f64) -> (f64, DyadicRectangle) {
    let table = RectangleTable::new(b);
    let (dim, depth) = (b.dim(), b.depth());
    let mut best = (0.0, DyadicRectangle::unit(dim));
    for flat in 0..table.len() {
        let count = table.cell_count(flat);
        if count == 1 {
            continue;
        }
        let mean = table.sum(flat) / count as f64;
        let rect = table.rectangle(flat);
        let mut acc = 0.0;
        for_each_cell_in(&rect, dim, depth, |c| {
            acc += power_abs(b.values()[c] - mean, p)
        });
        let v = root(acc / count as f64, p);
        if v > best.0 {
            best = (v, rect);
        }
    }
    best
}

/// `||b||_{BMO^R}` over dyadic rectangles with per-axis levels `0..=depth`.
pub fn bmor_norm(b: &GridFunction) -> f64 {
    rectangular_oscillation(b, 1.0).0
}

/// Level-set measures of `|b - <b>_R|` on `R` against the John–Nirenberg bound
/// `e^{1+2/e} |R| exp(-(2/e) lambda / ||b||_{BMO^R})`.
pub fn john_nirenberg_profile(
    b: &GridFunction,
    r: &DyadicRectangle,
    lambdas: &[f64],
) -> Result<CheckReport> {
    let norm = bmor_norm(b);
    if norm == 0.0 {
        return Err(Error::ZeroOscillation);
    }
    let e = core::f64::consts::E;
    let (sum, count) = b.sum_over(r, |v| v);
    let mean = sum / count as f64;
    let mut deviations = Vec::with_capacity(count);
    for_each_cell_in(r, b.dim(), b.depth(), |c| {
        deviations.push(libm::fabs(b.values()[c] - mean))
    });
    let mut report =
        CheckReport::new("john-nirenberg", "rectangular", b.dim(), b.depth()).with_cap(1.0);
    report.param("bmo_r", norm);
    for &lambda in lambdas {
        let measure = deviations.iter().filter(|&&d| d > lambda).count() as f64 * b.cell_volume();
        let bound = libm::exp(1.0 + 2.0 / e) * r.volume() * libm::exp(-(2.0 / e) * lambda / norm);
        let region = format!("{r} lambda={lambda}");
        if measure > bound {
            report.violate(format!("{region}: {measure} > {bound}"));
        }
        report.record(region, measure, bound);
    }
    Ok(report)
}

/// Empirical self-improving constant `C(p)`; exactly 1 at `p = 1`.
pub fn self_improving_ratio(b: &GridFunction, p: f64) -> Result<f64> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    let norm = bmor_norm(b);
    if norm == 0.0 {
        return Err(Error::ZeroOscillation);
    }
    Ok(rectangular_oscillation(b, p).0 / norm)
}
