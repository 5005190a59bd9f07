use alloc::format;
use alloc::string::ToString;

use super::{CarlesonSequence, WeightStats};
use crate::dyadic::Node;
use crate::error::{Error, Result};
use crate::report::{ratio, CheckReport};
use crate::weights::{a2r_characteristic, apd_characteristic, Weight};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Proposition {
    Wp1,
    Wp2,
    Wp3,
    Wp4,
}

impl Proposition {
    pub fn name(self) -> &'static str {
        match self {
            Proposition::Wp1 => "wp1",
            Proposition::Wp2 => "wp2",
            Proposition::Wp3 => "wp3",
            Proposition::Wp4 => "wp4",
        }
    }
}

/// Dyadic variants use `[w]_{A_2^d}` and carry the factor `2^{2(n-1)}`;
/// anisotropic variants use `[w]_{A_2^R}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    Dyadic,
    Anisotropic,
}

impl Variant {
    pub fn name(self) -> &'static str {
        match self {
            Variant::Dyadic => "dyadic",
            Variant::Anisotropic => "anisotropic",
        }
    }
}

/// Runs one proposition over every base pair `(Q', i)`.
///
/// Rows hold the left side and the right side stripped of the unknown
/// constant `C`, so the empirical constant estimates `C`. For wp1 the
/// constant is explicit (4 anisotropic, `4 * 2^{2(n-1)}` dyadic) and becomes
/// the cap; its first inequality (with constant 4) is checked alongside.
/// The main-line inequalities of wp2 and wp3, which do not involve `[w]`,
/// are reported as the `main_constant` parameter.
pub fn proposition_suite(
    w: &Weight,
    which: Proposition,
    variant: Variant,
    alpha: Option<&CarlesonSequence>,
) -> Result<CheckReport> {
    let stats = WeightStats::new(w);
    let n = stats.cells();
    let dim = w.dim();
    let dim_factor = libm::ldexp(1.0, 2 * (dim as i32 - 1));
    let characteristic = match variant {
        Variant::Dyadic => apd_characteristic(w, 2.0)?.value,
        Variant::Anisotropic => a2r_characteristic(w).value,
    };
    let factor = match variant {
        Variant::Dyadic => dim_factor,
        Variant::Anisotropic => 1.0,
    };
    let mut report = CheckReport::new(which.name(), variant.name(), dim, w.depth());
    report.param("characteristic", characteristic);
    report.param("dim_factor", factor);

    let (a, v) = (&stats.w, &stats.v);
    let rel = |k: usize| {
        let d = stats.dw(k) / a[k];
        d * d * Node(k).volume()
    };
    let (lhs, rhs): (
        alloc::vec::Vec<f64>,
        alloc::boxed::Box<dyn Fn(usize) -> f64>,
    ) = match which {
        Proposition::Wp1 => {
            let alpha = alpha.ok_or(Error::MissingCarlesonSequence)?;
            alpha.check_shape(dim, w.depth())?;
            let big_a = alpha.carleson_constant();
            report.param("carleson_constant", big_a);
            let e1 = stats.profile(|k| alpha.values[k] / v[k]);
            let e1_constant = (1..n)
                .map(|k| ratio(e1[k], big_a * a[k]))
                .fold(0.0, f64::max);
            report.param("e1_constant", e1_constant);
            if e1_constant.is_nan() || e1_constant > 4.0 {
                report.violate(format!("first inequality constant {e1_constant} exceeds 4"));
            }
            report.cap = Some(4.0 * factor);
            let lhs = stats.profile(|k| alpha.values[k] * a[k]);
            (
                lhs,
                alloc::boxed::Box::new(move |k| big_a * characteristic * a[k]),
            )
        }
        Proposition::Wp2 => {
            let main = stats.profile(|k| {
                let d = stats.dw(k);
                d * d / (a[k] * a[k] * a[k]) * Node(k).volume()
            });
            let main_constant = (1..n).map(|k| ratio(main[k], v[k])).fold(0.0, f64::max);
            report.param("main_constant", main_constant);
            let lhs = stats.profile(|k| rel(k) * v[k]);
            (
                lhs,
                alloc::boxed::Box::new(move |k| factor * characteristic * v[k]),
            )
        }
        Proposition::Wp3 => {
            let main = stats.profile(|k| rel(k) * libm::pow(a[k] * v[k], 0.25));
            let main_constant = (1..n)
                .map(|k| ratio(main[k], libm::pow(a[k] * v[k], 0.25)))
                .fold(0.0, f64::max);
            report.param("main_constant", main_constant);
            let lhs = stats.profile(|k| rel(k) * a[k] * v[k]);
            (
                lhs,
                alloc::boxed::Box::new(move |_| factor * characteristic),
            )
        }
        Proposition::Wp4 => {
            let lhs = stats.profile(|k| rel(k) * a[k]);
            (
                lhs,
                alloc::boxed::Box::new(move |k| factor * characteristic * a[k]),
            )
        }
    };
    for k in 1..n {
        let region = stats.layout.haar_index(Node(k)).to_string();
        report.record(region, lhs[k], rhs(k));
    }
    Ok(report)
}
