//! The catalog of named checks a configuration can request.

use dpl_core::dyadic::{
    cubes_up_to, verify_partition_properties, DyadicCube, DyadicRectangle, HaarIndex, Layout, Node,
};
use dpl_core::haar::{
    analyze, analyze_weighted, average_from_coefficients, project_wq, wilson_haar, ProjectionBasis,
};
use dpl_core::lab::{
    bellman_lmwce_check, bilinear_embedding_check, induction_in_scales_check, mmte_suite,
    proposition_suite, scaling_experiment, weighted_carleson_embedding_check, BilinearVariant,
    CarlesonSequence, InductionInstance, Proposition, ScalingOperator, Variant,
};
use dpl_core::operators::{
    difference_domination, product_decomposition, square_function, square_function_norm,
    tensor_paraproduct, tensor_paraproduct_tensor_basis, LinearOperator, SquareForm,
};
use dpl_core::sample::random_grid;
use dpl_core::weights::{
    a2r_characteristic, apd_characteristic, bmod_norm, bmor_norm, john_nirenberg_profile,
    power_weight, self_improving_ratio, BmoVariant, CharacteristicReport,
};
use dpl_core::{linalg, CheckReport, GridFunction, NormMethod, SignPattern, Weight};

use crate::config::{ExperimentConfig, OperatorKind};
use crate::error::{Error, Result};
use crate::formats::{scaling_csv, write_gfn, write_opm};

pub struct CheckEntry {
    pub name: &'static str,
    pub default_cap: Option<f64>,
    /// Builds an `N x N` matrix, so it is limited to [`MATRIX_LIMIT`] cells.
    pub dense: bool,
    pub summary: &'static str,
}

pub const MATRIX_LIMIT: u64 = 4096;

const fn entry(
    name: &'static str,
    default_cap: Option<f64>,
    dense: bool,
    summary: &'static str,
) -> CheckEntry {
    CheckEntry {
        name,
        default_cap,
        dense,
        summary,
    }
}

pub const CHECKS: &[CheckEntry] = &[
    entry(
        "partition",
        None,
        false,
        "pair-set properties of every cube up to level 3",
    ),
    entry(
        "orthonormality",
        Some(1e-12),
        true,
        "Gram defect of the Wilson system",
    ),
    entry(
        "parseval",
        Some(1e-10),
        false,
        "weighted Parseval identity on random f",
    ),
    entry(
        "averages",
        Some(1e-12),
        false,
        "averages recovered from coefficients",
    ),
    entry(
        "projection",
        Some(1e-12),
        false,
        "projections onto W(Q) in tensor and Wilson bases",
    ),
    entry(
        "bessel",
        Some(1.0),
        false,
        "Bessel bound and H^w norm bound on random g",
    ),
    entry(
        "decomposition",
        Some(1e-11),
        false,
        "fg = <f><g> + three paraproduct terms",
    ),
    entry(
        "tensor-paraproduct",
        Some(1e-12),
        false,
        "tensor paraproduct in both bases, distance to pi_b f",
    ),
    entry("a2d", None, false, "[w]_{A_2^d}"),
    entry("a2r", None, false, "[w]_{A_2^R}"),
    entry("apd", None, false, "[w]_{A_p^d} at the configured p"),
    entry("bmo-d", None, false, "dyadic BMO norm of the symbol"),
    entry("bmo-r", None, false, "rectangular BMO norm of the symbol"),
    entry(
        "john-nirenberg",
        None,
        false,
        "distribution profile of the symbol on the unit cube",
    ),
    entry(
        "self-improving",
        None,
        false,
        "L^p oscillation against the rectangular BMO norm",
    ),
    entry(
        "wp1-dyadic",
        None,
        false,
        "first weight proposition, dyadic characteristic",
    ),
    entry(
        "wp2-dyadic",
        None,
        false,
        "second weight proposition, dyadic characteristic",
    ),
    entry(
        "wp3-dyadic",
        None,
        false,
        "third weight proposition, dyadic characteristic",
    ),
    entry(
        "wp4-dyadic",
        None,
        false,
        "Buckley-type sum, dyadic characteristic",
    ),
    entry(
        "wp1-anisotropic",
        None,
        false,
        "first weight proposition, rectangular characteristic",
    ),
    entry(
        "wp2-anisotropic",
        None,
        false,
        "second weight proposition, rectangular characteristic",
    ),
    entry(
        "wp3-anisotropic",
        None,
        false,
        "third weight proposition, rectangular characteristic",
    ),
    entry(
        "wp4-anisotropic",
        None,
        false,
        "Buckley-type sum, rectangular characteristic",
    ),
    entry(
        "mmte",
        None,
        false,
        "martingale-transform sums and their Cauchy-Schwarz chain",
    ),
    entry(
        "bellman",
        None,
        false,
        "size and convexity of the Bellman function on samples",
    ),
    entry(
        "carleson-embedding",
        None,
        false,
        "weighted Carleson embedding with alpha from the symbol",
    ),
    entry(
        "pmbe",
        None,
        false,
        "bilinear embedding with weighted averages, v = 1/w",
    ),
    entry(
        "mbe",
        None,
        false,
        "bilinear embedding with unweighted averages, v = 1/w",
    ),
    entry(
        "induction",
        None,
        false,
        "induction in scales on the wp1 instance",
    ),
    entry(
        "difference-domination",
        None,
        false,
        "pointwise bound of pi^s_b f - pi_b f",
    ),
    entry(
        "norm",
        None,
        true,
        "weighted operator norm of the configured operator",
    ),
    entry(
        "norm-consistency",
        Some(1e-8),
        true,
        "dense and power norm estimates agree",
    ),
    entry(
        "square-forms",
        Some(1e-11),
        false,
        "the two square-function forms have equal norms",
    ),
    entry(
        "scaling",
        None,
        true,
        "operator norms across the power-weight family",
    ),
];

pub fn find(name: &str) -> Option<&'static CheckEntry> {
    CHECKS.iter().find(|c| c.name == name)
}

/// Weight and grid functions shared by every check of one run.
pub struct Inputs {
    pub weight: Weight,
    pub symbol: GridFunction,
    pub f: GridFunction,
    pub g: GridFunction,
}

impl Inputs {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        let (n, l) = (cfg.dim, cfg.depth);
        Ok(Inputs {
            weight: cfg.weight.build(n, l)?,
            symbol: cfg.symbol.build(n, l)?,
            f: cfg.f.build(n, l)?,
            g: cfg.g.build(n, l)?,
        })
    }
}

/// A report plus named text files to write next to it.
pub struct CheckOutput {
    pub report: CheckReport,
    pub artifacts: Vec<(String, String)>,
}

impl From<CheckReport> for CheckOutput {
    fn from(report: CheckReport) -> Self {
        CheckOutput {
            report,
            artifacts: Vec::new(),
        }
    }
}

pub fn run_check(name: &str, cfg: &ExperimentConfig, inputs: &Inputs) -> Result<CheckOutput> {
    let entry = find(name).ok_or_else(|| Error::config(format!("unknown check `{name}`")))?;
    if entry.dense && !cfg.unsafe_size && cfg.cells() > MATRIX_LIMIT {
        return Err(Error::config(format!(
            "check `{name}` builds a dense matrix and is limited to {MATRIX_LIMIT} cells (grid has {})",
            cfg.cells()
        )));
    }
    let mut out = dispatch(name, cfg, inputs)?;
    out.report.check = name.to_string();
    match cfg.cap(name) {
        Some(c) => out.report.cap = Some(c),
        None if out.report.cap.is_none() => out.report.cap = entry.default_cap,
        None => {}
    }
    Ok(out)
}

fn dispatch(name: &str, cfg: &ExperimentConfig, x: &Inputs) -> Result<CheckOutput> {
    let w = &x.weight;
    let alpha = || CarlesonSequence::from_symbol(&x.symbol);
    let out = match name {
        "partition" => partition(cfg).into(),
        "orthonormality" => orthonormality(cfg)?.into(),
        "parseval" => parseval(cfg, w)?.into(),
        "averages" => averages(cfg, w)?.into(),
        "projection" => projection(cfg, &x.f)?.into(),
        "bessel" => bessel(cfg, w)?.into(),
        "decomposition" => decomposition(cfg, &x.f, &x.g)?,
        "tensor-paraproduct" => tensor_routes(cfg, &x.symbol, &x.f)?.into(),
        "a2d" => characteristic(cfg, "dyadic", apd_characteristic(w, 2.0)?).into(),
        "a2r" => characteristic(cfg, "rectangular", a2r_characteristic(w)).into(),
        "apd" => characteristic(cfg, "dyadic", apd_characteristic(w, cfg.p)?).into(),
        "bmo-d" => bmo_dyadic(cfg, &x.symbol).into(),
        "bmo-r" => bmo_rectangular(cfg, &x.symbol).into(),
        "john-nirenberg" => {
            john_nirenberg_profile(&x.symbol, &DyadicRectangle::unit(cfg.dim), &cfg.lambdas)?.into()
        }
        "self-improving" => self_improving(cfg, &x.symbol)?.into(),
        "mmte" => mmte_suite(w)?.into(),
        "bellman" => bellman_lmwce_check(cfg.samples, cfg.seed)?.into(),
        "carleson-embedding" => weighted_carleson_embedding_check(&alpha(), w, &x.f)?.into(),
        "pmbe" => bilinear_embedding_check(
            &alpha(),
            w,
            &w.reciprocal(),
            &x.f,
            &x.g,
            BilinearVariant::Pmbe,
        )?
        .into(),
        "mbe" => bilinear_embedding_check(
            &alpha(),
            w,
            &w.reciprocal(),
            &x.f,
            &x.g,
            BilinearVariant::Mbe,
        )?
        .into(),
        "induction" => {
            let inst = InductionInstance::wp1(w, &alpha())?;
            let root = HaarIndex::new(DyadicCube::unit(cfg.dim), 1)?;
            induction_in_scales_check(&inst, &root)?.into()
        }
        "difference-domination" => difference_domination(&x.symbol, &x.f)?.into(),
        "norm" => norm(cfg, x)?,
        "norm-consistency" => norm_consistency(cfg, x)?.into(),
        "square-forms" => square_forms(cfg)?.into(),
        "scaling" => scaling(cfg, &x.symbol)?,
        other => match proposition(other) {
            Some((which, variant)) => {
                let a = alpha();
                let a = (which == Proposition::Wp1).then_some(&a);
                proposition_suite(w, which, variant, a)?.into()
            }
            None => return Err(Error::config(format!("unknown check `{other}`"))),
        },
    };
    Ok(out)
}

fn proposition(name: &str) -> Option<(Proposition, Variant)> {
    let (which, variant) = name.split_once('-')?;
    let which = match which {
        "wp1" => Proposition::Wp1,
        "wp2" => Proposition::Wp2,
        "wp3" => Proposition::Wp3,
        "wp4" => Proposition::Wp4,
        _ => return None,
    };
    let variant = match variant {
        "dyadic" => Variant::Dyadic,
        "anisotropic" => Variant::Anisotropic,
        _ => return None,
    };
    Some((which, variant))
}

fn trial_seed(cfg: &ExperimentConfig, t: usize) -> u64 {
    cfg.seed
        .wrapping_mul(0x9e37_79b9_7f4a_7c15)
        .wrapping_add(t as u64)
}

fn partition(cfg: &ExperimentConfig) -> CheckReport {
    let max_level = cfg.depth.min(3) as u32;
    let mut report = CheckReport::new("partition", "closed-form", cfg.dim, cfg.depth);
    let cubes = cubes_up_to(cfg.dim, max_level);
    for q in &cubes {
        let r = verify_partition_properties(q);
        for v in r.violations {
            report.violate(format!("{q}: {v}"));
        }
    }
    report.param("cubes", cubes.len() as f64);
    report.param("max_level", max_level as f64);
    report
}

/// Gram matrix of the Wilson system and the constant function. Functions
/// on non-nested pairs have disjoint supports, so only nested pairs and the
/// diagonal are summed.
fn orthonormality(cfg: &ExperimentConfig) -> Result<CheckReport> {
    let layout = Layout::new(cfg.dim, cfg.depth);
    let n = layout.cells();
    let sparse: Vec<Vec<(usize, f64)>> = (1..n)
        .map(|k| {
            let h = wilson_haar(&layout.haar_index(Node(k)), cfg.depth)?;
            Ok(h.values()
                .iter()
                .enumerate()
                .filter(|(_, v)| **v != 0.0)
                .map(|(c, v)| (c, *v))
                .collect())
        })
        .collect::<Result<_>>()?;
    let dot = |dense: &[f64], s: &[(usize, f64)]| {
        s.iter().map(|(c, v)| dense[*c] * v).sum::<f64>() / n as f64
    };
    let mut report = CheckReport::new("orthonormality", "wilson", cfg.dim, cfg.depth);
    let one = vec![1.0; n];
    let mut worst = (0.0f64, String::from("none"));
    let mut note = |defect: f64, region: String| {
        if defect > worst.0 {
            worst = (defect, region);
        }
    };
    let mut dense = vec![0.0; n];
    for a in 1..n {
        let idx = layout.haar_index(Node(a));
        note(dot(&one, &sparse[a - 1]).abs(), format!("1,{idx}"));
        dense.iter_mut().for_each(|v| *v = 0.0);
        for (c, v) in &sparse[a - 1] {
            dense[*c] = *v;
        }
        let mut stack = vec![a];
        while let Some(b) = stack.pop() {
            let target = if b == a { 1.0 } else { 0.0 };
            note(
                (dot(&dense, &sparse[b - 1]) - target).abs(),
                format!("{idx},{}", layout.haar_index(Node(b))),
            );
            stack.extend([2 * b, 2 * b + 1].into_iter().filter(|&c| c < n));
        }
    }
    report.record(worst.1, worst.0, 1.0);
    report.param("functions", (n - 1) as f64);
    Ok(report)
}

fn parseval(cfg: &ExperimentConfig, w: &Weight) -> Result<CheckReport> {
    let mut report = CheckReport::new("parseval", "weighted", cfg.dim, cfg.depth);
    let total_w = w.grid().mean();
    for t in 0..cfg.trials {
        let f = random_grid(cfg.dim, cfg.depth, trial_seed(cfg, t));
        let tree = analyze_weighted(&f, w)?;
        let lhs = f.weighted_norm_sq(w.grid());
        let rhs = tree.mean() * tree.mean() * total_w + tree.sum_of_squares();
        report.record(format!("trial {t}"), (lhs - rhs).abs() / lhs, 1.0);
    }
    report.param("trials", cfg.trials as f64);
    Ok(report)
}

fn averages(cfg: &ExperimentConfig, w: &Weight) -> Result<CheckReport> {
    let layout = Layout::new(cfg.dim, cfg.depth);
    let n = layout.cells();
    let stride = (n / 256).max(1);
    let nodes: Vec<usize> = (1..n).step_by(stride).collect();
    let mut report = CheckReport::new("averages", "weighted", cfg.dim, cfg.depth);
    for t in 0..cfg.trials {
        let f = random_grid(cfg.dim, cfg.depth, trial_seed(cfg, t));
        let plain = analyze(&f);
        let weighted = analyze_weighted(&f, w)?;
        let fw = f.mul(w.grid());
        let mut worst: f64 = 0.0;
        for &k in &nodes {
            let idx = layout.haar_index(Node(k));
            let e = idx.e_set();
            let direct = f.average_over(&e);
            let direct_w = fw.sum_over(&e, |v| v).0 / w.grid().sum_over(&e, |v| v).0;
            let a = average_from_coefficients(&plain, &idx, None)?;
            let b = average_from_coefficients(&weighted, &idx, Some(w))?;
            worst = worst.max((a - direct).abs()).max((b - direct_w).abs());
        }
        report.record(format!("trial {t}"), worst, 1.0);
    }
    report.param("pairs_per_trial", nodes.len() as f64);
    Ok(report)
}

fn projection(cfg: &ExperimentConfig, f: &GridFunction) -> Result<CheckReport> {
    let max_level = (cfg.depth - 1).min(2) as u32;
    let mut report = CheckReport::new("projection", "tensor-wilson", cfg.dim, cfg.depth);
    let cubes = cubes_up_to(cfg.dim, max_level);
    for q in &cubes {
        let t = project_wq(f, q, ProjectionBasis::Tensor)?;
        let s = project_wq(f, q, ProjectionBasis::Wilson)?;
        report.record(q.to_string(), t.max_abs_diff(&s), 1.0);
    }
    report.param("cubes", cubes.len() as f64);
    Ok(report)
}

/// Bessel sums through coefficients of `g w^{1/2}`: with `H = h sqrt|E| - A chi_E`
/// one has `<g w^{1/2}, H> = sqrt|E| <g w^{1/2}, h> - A int_E g w^{1/2}`.
fn bessel(cfg: &ExperimentConfig, w: &Weight) -> Result<CheckReport> {
    let layout = Layout::new(cfg.dim, cfg.depth);
    let n = layout.cells();
    let cell = 1.0 / n as f64;
    let mass = layout.node_sums(w.values());
    let mut report = CheckReport::new("bessel", "orthogonal", cfg.dim, cfg.depth);
    let mut worst_norm: f64 = 0.0;
    for k in 1..n {
        let (w1, w2) = (mass[2 * k] * cell, mass[2 * k + 1] * cell);
        let a = (w2 - w1) / (w1 + w2);
        let norm_sq = (1.0 + a) * (1.0 + a) * w1 + (1.0 - a) * (1.0 - a) * w2;
        let bound = w1 + w2;
        worst_norm = worst_norm.max(norm_sq / bound);
        if norm_sq > bound * (1.0 + 1e-12) {
            report.violate(format!(
                "{}: |w^(1/2) H|^2 = {norm_sq} > {bound}",
                layout.haar_index(Node(k))
            ));
        }
    }
    let root_w = w.sqrt();
    for t in 0..cfg.trials {
        let g = random_grid(cfg.dim, cfg.depth, trial_seed(cfg, t));
        let gw = g.mul(&root_w);
        let coeffs = analyze(&gw);
        let sums = layout.node_sums(gw.values());
        let mut total = 0.0;
        for k in 1..n {
            let node = Node(k);
            let (w1, w2) = (mass[2 * k], mass[2 * k + 1]);
            let a = (w2 - w1) / (w1 + w2);
            let c = node.volume().sqrt() * coeffs.node(node) - a * sums[k] * cell;
            total += c * c / ((w1 + w2) * cell);
        }
        report.record(format!("trial {t}"), total, g.norm_sq());
    }
    report.param("max_norm_ratio", worst_norm);
    Ok(report)
}

fn decomposition(
    cfg: &ExperimentConfig,
    f: &GridFunction,
    g: &GridFunction,
) -> Result<CheckOutput> {
    let d = product_decomposition(f, g)?;
    let mut report = CheckReport::new("decomposition", "cellwise", cfg.dim, cfg.depth);
    report.record("fg".into(), d.reconstruct().max_abs_diff(&f.mul(g)), 1.0);
    report.param("mean_term", d.mean_term);
    let artifacts = vec![
        ("decomposition-diagonal.gfn".into(), write_gfn(&d.diagonal)),
        ("decomposition-upper.gfn".into(), write_gfn(&d.upper)),
        ("decomposition-lower.gfn".into(), write_gfn(&d.lower)),
    ];
    Ok(CheckOutput { report, artifacts })
}

fn tensor_routes(
    cfg: &ExperimentConfig,
    b: &GridFunction,
    f: &GridFunction,
) -> Result<CheckReport> {
    let direct = tensor_paraproduct(b, f)?;
    let via_basis = tensor_paraproduct_tensor_basis(b, f)?;
    let wilson = LinearOperator::Paraproduct(b).apply(f)?;
    let mut report = CheckReport::new("tensor-paraproduct", "routes", cfg.dim, cfg.depth);
    report.record("routes".into(), direct.max_abs_diff(&via_basis), 1.0);
    report.param("difference_norm", direct.sub(&wilson).norm());
    report.param("difference_max", direct.max_abs_diff(&wilson));
    Ok(report)
}

fn characteristic(cfg: &ExperimentConfig, variant: &str, c: CharacteristicReport) -> CheckReport {
    let mut report = CheckReport::new("characteristic", variant, cfg.dim, cfg.depth);
    report.empirical_constant = c.value;
    report.worst_region = Some(c.argmax.to_string());
    report.param("p", c.p);
    report
}

fn bmo_dyadic(cfg: &ExperimentConfig, b: &GridFunction) -> CheckReport {
    let l1 = bmod_norm(b, BmoVariant::L1);
    let l2 = bmod_norm(b, BmoVariant::L2);
    let mut report = CheckReport::new("bmo", "dyadic", cfg.dim, cfg.depth);
    report.empirical_constant = l1;
    report.param("l1", l1);
    report.param("l2", l2);
    report.param("l2_sqrt", l2.sqrt());
    report
}

fn bmo_rectangular(cfg: &ExperimentConfig, b: &GridFunction) -> CheckReport {
    let r = bmor_norm(b);
    let mut report = CheckReport::new("bmo", "rectangular", cfg.dim, cfg.depth);
    report.empirical_constant = r;
    report.param("bmo_r", r);
    report.param("bmo_d", bmod_norm(b, BmoVariant::L1));
    report
}

fn self_improving(cfg: &ExperimentConfig, b: &GridFunction) -> Result<CheckReport> {
    let mut report = CheckReport::new("self-improving", "rectangular", cfg.dim, cfg.depth);
    for p in [1.0, 1.5, 2.0, 3.0, 4.0] {
        report.record(format!("p={p}"), self_improving_ratio(b, p)?, 1.0);
    }
    Ok(report)
}

/// The operator matrix for linear kinds, `None` for the square function.
fn operator_matrix(
    cfg: &ExperimentConfig,
    b: &GridFunction,
) -> Result<Option<linalg::OperatorMatrix>> {
    let signs;
    let op = match cfg.operator {
        OperatorKind::Paraproduct => LinearOperator::Paraproduct(b),
        OperatorKind::Adjoint => LinearOperator::ParaproductAdjoint(b),
        OperatorKind::Tensor => LinearOperator::TensorParaproduct(b),
        OperatorKind::Difference => LinearOperator::ParaproductDifference(b),
        OperatorKind::Martingale => {
            signs = SignPattern::random(cfg.dim, cfg.depth, cfg.seed);
            LinearOperator::Martingale(&signs)
        }
        OperatorKind::Square(_) => return Ok(None),
    };
    Ok(Some(op.matrix(cfg.dim, cfg.depth)?))
}

fn weighted_norm(cfg: &ExperimentConfig, x: &Inputs, method: NormMethod) -> Result<f64> {
    Ok(match (operator_matrix(cfg, &x.symbol)?, cfg.operator) {
        (Some(m), _) => linalg::operator_norm(&m, &x.weight, method)?,
        (None, OperatorKind::Square(form)) => square_function_norm(&x.weight, form, method)?,
        (None, _) => unreachable!("matrices exist for every linear kind"),
    })
}

fn norm(cfg: &ExperimentConfig, x: &Inputs) -> Result<CheckOutput> {
    let value = weighted_norm(cfg, x, cfg.method)?;
    let mut report = CheckReport::new("norm", &cfg.operator.to_string(), cfg.dim, cfg.depth);
    report.empirical_constant = value;
    report.param("a2d", apd_characteristic(&x.weight, 2.0)?.value);
    report.param("bmo_d", bmod_norm(&x.symbol, BmoVariant::L2).sqrt());
    let mut artifacts = Vec::new();
    if cfg.export_matrix {
        if let Some(m) = operator_matrix(cfg, &x.symbol)? {
            artifacts.push(("matrix.opm".to_string(), write_opm(&m)));
        }
    }
    Ok(CheckOutput { report, artifacts })
}

fn norm_consistency(cfg: &ExperimentConfig, x: &Inputs) -> Result<CheckReport> {
    let dense = weighted_norm(cfg, x, NormMethod::Dense)?;
    let power = weighted_norm(cfg, x, NormMethod::DEFAULT_POWER)?;
    let mut report = CheckReport::new(
        "norm-consistency",
        &cfg.operator.to_string(),
        cfg.dim,
        cfg.depth,
    );
    report.record(
        "dense-power".into(),
        (dense - power).abs(),
        dense.abs().max(f64::MIN_POSITIVE),
    );
    report.param("dense", dense);
    report.param("power", power);
    Ok(report)
}

fn square_forms(cfg: &ExperimentConfig) -> Result<CheckReport> {
    let mut report = CheckReport::new("square-forms", "increment-wilson", cfg.dim, cfg.depth);
    for t in 0..cfg.trials {
        let f = random_grid(cfg.dim, cfg.depth, trial_seed(cfg, t));
        let a = square_function(&f, SquareForm::Increment).norm();
        let b = square_function(&f, SquareForm::Wilson).norm();
        report.record(format!("trial {t}"), (a - b).abs(), 1.0);
    }
    Ok(report)
}

fn scaling(cfg: &ExperimentConfig, b: &GridFunction) -> Result<CheckOutput> {
    let op = match cfg.operator {
        OperatorKind::Paraproduct => ScalingOperator::Paraproduct(b.clone()),
        OperatorKind::Martingale => {
            ScalingOperator::Martingale(SignPattern::random(cfg.dim, cfg.depth, cfg.seed))
        }
        OperatorKind::Square(form) => ScalingOperator::Square(form),
        other => {
            return Err(Error::config(format!(
                "scaling supports paraproduct, martingale and square, not `{other}`"
            )))
        }
    };
    let family = cfg
        .alphas
        .iter()
        .map(|&a| Ok((a, power_weight(cfg.dim, cfg.depth, a)?)))
        .collect::<Result<Vec<_>>>()?;
    let table = scaling_experiment(&family, &op, cfg.method)?;
    let mut report = CheckReport::new("scaling", table.operator, cfg.dim, cfg.depth);
    for r in &table.rows {
        report.record(format!("alpha={}", r.alpha), r.ratio, 1.0);
    }
    let (lo, hi) = table
        .rows
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), r| {
            (lo.min(r.ratio), hi.max(r.ratio))
        });
    let spread = hi / lo;
    report.param("slope", table.slope);
    report.param("ratio_spread", spread);
    report.param("bmo", table.bmo);
    if table.slope > cfg.max_slope {
        report.violate(format!("slope {} exceeds {}", table.slope, cfg.max_slope));
    }
    if spread.is_nan() || spread > cfg.max_spread {
        report.violate(format!("ratio spread {spread} exceeds {}", cfg.max_spread));
    }
    Ok(CheckOutput {
        report,
        artifacts: vec![("scaling.csv".into(), scaling_csv(&table))],
    })
}
