use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::linalg::{operator_norm, NormMethod};
use crate::operators::{square_function_norm, LinearOperator, SignPattern, SquareForm};
use crate::weights::{a2r_characteristic, apd_characteristic, bmod_norm, BmoVariant, Weight};

#[derive(Debug, Clone)]
pub enum ScalingOperator {
    Paraproduct(GridFunction),
    Martingale(SignPattern),
    Square(SquareForm),
}

impl ScalingOperator {
    pub fn name(&self) -> &'static str {
        match self {
            ScalingOperator::Paraproduct(_) => "paraproduct",
            ScalingOperator::Martingale(_) => "martingale",
            ScalingOperator::Square(_) => "square",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    /// Label of the weight in its family (the power exponent for power families).
    pub alpha: f64,
    pub a2d: f64,
    pub a2r: f64,
    pub norm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingTable {
    pub operator: &'static str,
    pub rows: Vec<ScalingRow>,
    /// Least-squares slope of `ln norm` against `ln [w]_{A_2^d}`.
    pub slope: f64,
    /// `||b||_{BMO^d}` (square root of the L2 variant) for paraproducts, 1 otherwise.
    pub bmo: f64,
}

/// Weighted norms of one operator across a weight family.
///
/// The ratio is `norm / ([w]_{A_2^d} ||b||_{BMO^d})` for paraproducts,
/// `norm / [w]_{A_2^d}` for martingale transforms and `norm / [w]_{A_2^d}^{1/2}`
/// for the square function.
pub fn scaling_experiment(
    family: &[(f64, Weight)],
    op: &ScalingOperator,
    method: NormMethod,
) -> Result<ScalingTable> {
    let Some((_, first)) = family.first() else {
        return Err(Error::DegenerateFamily);
    };
    let (dim, depth) = (first.dim(), first.depth());
    let (matrix, bmo, exponent) = match op {
        ScalingOperator::Paraproduct(b) => {
            b.same_shape(first.grid())?;
            let bmo = libm::sqrt(bmod_norm(b, BmoVariant::L2));
            if bmo == 0.0 {
                return Err(Error::ZeroOscillation);
            }
            (
                Some(LinearOperator::Paraproduct(b).matrix(dim, depth)?),
                bmo,
                1.0,
            )
        }
        ScalingOperator::Martingale(s) => (
            Some(LinearOperator::Martingale(s).matrix(dim, depth)?),
            1.0,
            1.0,
        ),
        ScalingOperator::Square(_) => (None, 1.0, 0.5),
    };
    let mut rows = Vec::with_capacity(family.len());
    for (alpha, w) in family {
        first.grid().same_shape(w.grid())?;
        let a2d = apd_characteristic(w, 2.0)?.value;
        let a2r = a2r_characteristic(w).value;
        let norm = match (&matrix, op) {
            (Some(m), _) => operator_norm(m, w, method)?,
            (None, ScalingOperator::Square(form)) => square_function_norm(w, *form, method)?,
            (None, _) => unreachable!("matrix built for linear operators"),
        };
        let ratio = norm / (libm::pow(a2d, exponent) * bmo);
        rows.push(ScalingRow {
            alpha: *alpha,
            a2d,
            a2r,
            norm,
            ratio,
        });
    }
    let slope = fit_slope(&rows)?;
    Ok(ScalingTable {
        operator: op.name(),
        rows,
        slope,
        bmo,
    })
}

/// Least-squares slope of `ln norm` against `ln a2d`.
pub fn fit_slope(rows: &[ScalingRow]) -> Result<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| (libm::log(r.a2d), libm::log(r.norm)))
        .collect();
    let k = pts.len() as f64;
    if pts.len() < 2 {
        return Err(Error::DegenerateFamily);
    }
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx.is_nan() || sxx <= 1e-24 {
        return Err(Error::DegenerateFamily);
    }
    Ok(sxy / sxx)
}
