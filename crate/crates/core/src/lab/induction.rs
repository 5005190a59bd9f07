use alloc::format;
use alloc::string::ToString;
use alloc::vec;
use alloc::vec::Vec;

use super::{CarlesonSequence, WeightStats};
use crate::dyadic::{HaarIndex, Layout, Node};
use crate::error::{Error, Result};
use crate::report::CheckReport;
use crate::weights::Weight;

/// Data for one induction-in-scales argument on the Wilson tree.
///
/// `x` and `y` live on every node (leaves included), `m` and `contribution`
/// on pair nodes; slot 0 is unused everywhere. The conclusion checked is
/// `sum_{E_{j,Q} inside E_root} C_{j,Q} <= |E_root| * bound_constant * A * b(X_root)`.
#[derive(Debug, Clone)]
pub struct InductionInstance {
    pub dim: usize,
    pub depth: usize,
    pub x: Vec<[f64; 2]>,
    pub y: Vec<f64>,
    pub m: Vec<f64>,
    pub contribution: Vec<f64>,
    pub a: f64,
    pub bound_constant: f64,
    pub bound: fn(&[f64; 2]) -> f64,
}

fn first_coordinate(x: &[f64; 2]) -> f64 {
    x[0]
}

impl InductionInstance {
    /// Instance behind the first inequality of wp1: `X = (<w>, <w^{-1}>)`,
    /// `Y_E = (1/(A|E|)) sum alpha`, `M_E = alpha_E / (A|E|)`,
    /// `C = alpha / <w^{-1}>`, `b(X) = X_0` and constant 4.
    pub fn wp1(w: &Weight, alpha: &CarlesonSequence) -> Result<Self> {
        alpha.check_shape(w.dim(), w.depth())?;
        let stats = WeightStats::new(w);
        let n = stats.cells();
        let a = alpha.carleson_constant();
        let scale = if a > 0.0 { a } else { 1.0 };
        let x = (0..2 * n)
            .map(|k| {
                if k == 0 {
                    [0.0; 2]
                } else {
                    [stats.w[k], stats.v[k]]
                }
            })
            .collect();
        let profile = super::carleson_profile(&stats.layout, &alpha.values);
        let mut y = vec![0.0; 2 * n];
        let mut m = vec![0.0; n];
        let mut contribution = vec![0.0; n];
        for k in 1..n {
            y[k] = profile[k] / scale;
            m[k] = alpha.values[k] / (scale * Node(k).volume());
            contribution[k] = alpha.values[k] / stats.v[k];
        }
        Ok(InductionInstance {
            dim: w.dim(),
            depth: w.depth(),
            x,
            y,
            m,
            contribution,
            a: scale,
            bound_constant: 4.0,
            bound: first_coordinate,
        })
    }

    pub fn scale_contributions(mut self, factor: f64) -> Self {
        self.contribution.iter_mut().for_each(|c| *c *= factor);
        self
    }

    /// Checks sizes, nonnegativity and both midpoint relations to a relative `1e-9`.
    pub fn validate(&self) -> Result<()> {
        let n = 1usize << (self.dim * self.depth);
        if self.x.len() != 2 * n
            || self.y.len() != 2 * n
            || self.m.len() != n
            || self.contribution.len() != n
        {
            return Err(Error::InconsistentInstance {
                node: 0,
                reason: "array lengths do not match the grid",
            });
        }
        let close = |a: f64, b: f64| {
            libm::fabs(a - b) <= 1e-9 * libm::fabs(a).max(libm::fabs(b)).max(1e-300)
        };
        for k in 1..n {
            if self.contribution[k].is_nan()
                || self.contribution[k] < 0.0
                || self.m[k].is_nan()
                || self.m[k] < 0.0
            {
                return Err(Error::InconsistentInstance {
                    node: k,
                    reason: "negative contribution or M",
                });
            }
            for t in 0..2 {
                if !close(
                    self.x[k][t],
                    0.5 * (self.x[2 * k][t] + self.x[2 * k + 1][t]),
                ) {
                    return Err(Error::InconsistentInstance {
                        node: k,
                        reason: "X is not the midpoint of its halves",
                    });
                }
            }
            if !close(
                self.y[k],
                self.m[k] + 0.5 * (self.y[2 * k] + self.y[2 * k + 1]),
            ) {
                return Err(Error::InconsistentInstance {
                    node: k,
                    reason: "Y is not M plus the midpoint of its halves",
                });
            }
        }
        Ok(())
    }
}

/// Sums the contributions over the subtree of `root` and compares with the bound.
pub fn induction_in_scales_check(
    inst: &InductionInstance,
    root: &HaarIndex,
) -> Result<CheckReport> {
    inst.validate()?;
    let layout = Layout::new(inst.dim, inst.depth);
    let node = layout.node_of(root)?;
    let n = layout.cells();
    let mut total = 0.0;
    let mut stack = vec![node];
    while let Some(k) = stack.pop() {
        if k.0 < n {
            total += inst.contribution[k.0];
            stack.push(k.lower());
            stack.push(k.upper());
        }
    }
    let rhs = node.volume() * inst.bound_constant * inst.a * (inst.bound)(&inst.x[node.0]);
    let mut report =
        CheckReport::new("induction-in-scales", "wilson", inst.dim, inst.depth).with_cap(1.0);
    report.param("a", inst.a);
    report.param("bound_constant", inst.bound_constant);
    if total > rhs * (1.0 + 1e-12) {
        report.violate(format!("{root}: {total} > {rhs}"));
    }
    report.record(root.to_string(), total, rhs);
    Ok(report)
}
