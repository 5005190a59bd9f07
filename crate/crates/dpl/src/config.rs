//! Flat `key = value` experiment configuration.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use dpl_core::operators::SquareForm;
use dpl_core::sample::{random_grid, random_weight_with};
use dpl_core::weights::{
    cascade_weight, log_symbol, martingale_symbol, power_weight, DEFAULT_CASCADE_DECAY,
};
use dpl_core::{GridFunction, NormMethod, Weight};
use sha2::{Digest, Sha256};

use crate::checks::CHECKS;
use crate::error::{Error, Result};
use crate::formats::read_gfn;

pub const DEFAULT_SIZE_LIMIT: u64 = 1 << 16;

/// Where a weight comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSource {
    Power(f64),
    Cascade { delta: f64, seed: u64, decay: f64 },
    Constant(f64),
    Random { seed: u64, spread: f64 },
    File(PathBuf),
}

/// Where a symbol or test function comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum GridSource {
    Log,
    Martingale(u64),
    Random(u64),
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorKind {
    Paraproduct,
    Adjoint,
    Tensor,
    Difference,
    Martingale,
    Square(SquareForm),
}

fn parse_num<T: FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim()
        .parse()
        .map_err(|_| Error::config(format!("`{s}` is not a valid {what}")))
}

fn split_spec(s: &str) -> (&str, Vec<&str>) {
    let mut parts = s.split(':');
    let head = parts.next().unwrap_or("");
    (head, parts.collect())
}

fn arity(name: &str, args: &[&str], min: usize, max: usize) -> Result<()> {
    if args.len() < min || args.len() > max {
        return Err(Error::config(format!(
            "`{name}` takes {min} to {max} `:`-separated arguments"
        )));
    }
    Ok(())
}

impl FromStr for WeightSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(WeightSource::File(PathBuf::from(path)));
        }
        let (head, args) = split_spec(s);
        match head {
            "power" => {
                arity(head, &args, 1, 1)?;
                Ok(WeightSource::Power(parse_num(args[0], "exponent")?))
            }
            "cascade" => {
                arity(head, &args, 2, 3)?;
                let decay = match args.get(2) {
                    Some(d) => parse_num(d, "decay")?,
                    None => DEFAULT_CASCADE_DECAY,
                };
                Ok(WeightSource::Cascade { delta: parse_num(args[0], "amplitude")?, seed: parse_num(args[1], "seed")?, decay })
            }
            "constant" => {
                arity(head, &args, 1, 1)?;
                Ok(WeightSource::Constant(parse_num(args[0], "constant")?))
            }
            "random" => {
                arity(head, &args, 1, 2)?;
                let spread = match args.get(1) {
                    Some(v) => parse_num(v, "spread")?,
                    None => 1.5,
                };
                Ok(WeightSource::Random { seed: parse_num(args[0], "seed")?, spread })
            }
            _ => Err(Error::config(format!(
                "unknown weight `{s}` (expected power:A, cascade:D:SEED[:DECAY], constant:C, random:SEED[:SPREAD], file:PATH)"
            ))),
        }
    }
}

impl fmt::Display for WeightSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightSource::Power(a) => write!(f, "power:{a}"),
            WeightSource::Cascade { delta, seed, decay } => {
                write!(f, "cascade:{delta}:{seed}:{decay}")
            }
            WeightSource::Constant(c) => write!(f, "constant:{c}"),
            WeightSource::Random { seed, spread } => write!(f, "random:{seed}:{spread}"),
            WeightSource::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl WeightSource {
    pub fn build(&self, dim: usize, depth: usize) -> Result<Weight> {
        Ok(match self {
            WeightSource::Power(a) => power_weight(dim, depth, *a)?,
            WeightSource::Cascade { delta, seed, decay } => {
                cascade_weight(dim, depth, *delta, *seed, *decay)?
            }
            WeightSource::Constant(c) => Weight::new(GridFunction::constant(dim, depth, *c))?,
            WeightSource::Random { seed, spread } => {
                if !(spread.is_finite() && *spread > 0.0) {
                    return Err(Error::config(format!(
                        "random weight spread {spread} must be positive"
                    )));
                }
                random_weight_with(dim, depth, *seed, *spread)
            }
            WeightSource::File(p) => Weight::new(load_grid(p, dim, depth)?)?,
        })
    }
}

impl FromStr for GridSource {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Some(path) = s.strip_prefix("file:") {
            return Ok(GridSource::File(PathBuf::from(path)));
        }
        let (head, args) = split_spec(s);
        match head {
            "log" => {
                arity(head, &args, 0, 0)?;
                Ok(GridSource::Log)
            }
            "martingale" => {
                arity(head, &args, 1, 1)?;
                Ok(GridSource::Martingale(parse_num(args[0], "seed")?))
            }
            "random" => {
                arity(head, &args, 1, 1)?;
                Ok(GridSource::Random(parse_num(args[0], "seed")?))
            }
            _ => Err(Error::config(format!(
                "unknown grid function `{s}` (expected log, martingale:SEED, random:SEED, file:PATH)"
            ))),
        }
    }
}

impl fmt::Display for GridSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSource::Log => write!(f, "log"),
            GridSource::Martingale(s) => write!(f, "martingale:{s}"),
            GridSource::Random(s) => write!(f, "random:{s}"),
            GridSource::File(p) => write!(f, "file:{}", p.display()),
        }
    }
}

impl GridSource {
    pub fn build(&self, dim: usize, depth: usize) -> Result<GridFunction> {
        Ok(match self {
            GridSource::Log => log_symbol(dim, depth),
            GridSource::Martingale(seed) => martingale_symbol(dim, depth, *seed),
            GridSource::Random(seed) => random_grid(dim, depth, *seed),
            GridSource::File(p) => load_grid(p, dim, depth)?,
        })
    }
}

fn load_grid(path: &Path, dim: usize, depth: usize) -> Result<GridFunction> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let g = read_gfn(&text).map_err(|e| Error::config(format!("{}: {e}", path.display())))?;
    if g.dim() != dim || g.depth() != depth {
        return Err(Error::config(format!(
            "{} has dim={} depth={}, config has dim={dim} depth={depth}",
            path.display(),
            g.dim(),
            g.depth()
        )));
    }
    Ok(g)
}

impl FromStr for OperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "paraproduct" => OperatorKind::Paraproduct,
            "adjoint" => OperatorKind::Adjoint,
            "tensor" => OperatorKind::Tensor,
            "difference" => OperatorKind::Difference,
            "martingale" => OperatorKind::Martingale,
            "square" | "square-increment" => OperatorKind::Square(SquareForm::Increment),
            "square-wilson" => OperatorKind::Square(SquareForm::Wilson),
            _ => {
                return Err(Error::config(format!(
                    "unknown operator `{s}` (expected paraproduct, adjoint, tensor, difference, martingale, square, square-wilson)"
                )))
            }
        })
    }
}

impl fmt::Display for OperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OperatorKind::Paraproduct => "paraproduct",
            OperatorKind::Adjoint => "adjoint",
            OperatorKind::Tensor => "tensor",
            OperatorKind::Difference => "difference",
            OperatorKind::Martingale => "martingale",
            OperatorKind::Square(SquareForm::Increment) => "square",
            OperatorKind::Square(SquareForm::Wilson) => "square-wilson",
        })
    }
}

fn parse_method(s: &str) -> Result<NormMethod> {
    match s {
        "dense" => Ok(NormMethod::Dense),
        "power" => Ok(NormMethod::DEFAULT_POWER),
        _ => Err(Error::config(format!(
            "unknown method `{s}` (expected dense or power)"
        ))),
    }
}

fn method_name(m: NormMethod) -> &'static str {
    match m {
        NormMethod::Dense => "dense",
        NormMethod::Power { .. } => "power",
    }
}

fn parse_list<T: FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| parse_num(t, what))
        .collect()
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub dim: usize,
    pub depth: usize,
    pub weight: WeightSource,
    pub symbol: GridSource,
    pub f: GridSource,
    pub g: GridSource,
    pub checks: Vec<String>,
    pub seed: u64,
    pub samples: usize,
    pub trials: usize,
    pub p: f64,
    pub alphas: Vec<f64>,
    pub operator: OperatorKind,
    pub method: NormMethod,
    pub lambdas: Vec<f64>,
    pub max_slope: f64,
    pub max_spread: f64,
    pub caps: BTreeMap<String, f64>,
    pub output: Option<PathBuf>,
    pub unsafe_size: bool,
    pub export_matrix: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            dim: 1,
            depth: 4,
            weight: WeightSource::Power(0.5),
            symbol: GridSource::Log,
            f: GridSource::Random(1),
            g: GridSource::Random(2),
            checks: Vec::new(),
            seed: 1,
            samples: 100_000,
            trials: 20,
            p: 2.0,
            alphas: vec![-0.9, -0.6, -0.3, 0.0, 0.3, 0.6, 0.9],
            operator: OperatorKind::Paraproduct,
            method: NormMethod::Dense,
            lambdas: (0..=16).map(|i| 0.25 * i as f64).collect(),
            max_slope: 1.1,
            max_spread: 10.0,
            caps: BTreeMap::new(),
            output: None,
            unsafe_size: false,
            export_matrix: false,
        }
    }
}

pub const KEYS: &[&str] = &[
    "alphas",
    "checks",
    "depth",
    "dim",
    "export_matrix",
    "f",
    "g",
    "lambdas",
    "max_slope",
    "max_spread",
    "method",
    "operator",
    "output",
    "p",
    "samples",
    "seed",
    "symbol",
    "trials",
    "unsafe_size",
    "weight",
];

impl ExperimentConfig {
    /// Parses `key = value` lines; `#` starts a comment, `cap.<check>` sets a cap.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = ExperimentConfig::default();
        let mut seen = std::collections::BTreeSet::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| Error::config(format!("line {}: expected `key = value`", i + 1)))?;
            if !seen.insert(key.to_string()) {
                return Err(Error::config(format!(
                    "line {}: duplicate key `{key}`",
                    i + 1
                )));
            }
            cfg.set(key, value).map_err(|e| match e {
                Error::Config(m) => Error::config(format!("line {}: {m}", i + 1)),
                other => other,
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        if let Some(check) = key.strip_prefix("cap.") {
            if !CHECKS.iter().any(|c| c.name == check) {
                return Err(Error::config(format!("cap for unknown check `{check}`")));
            }
            let cap: f64 = parse_num(value, "cap")?;
            if cap.is_nan() {
                return Err(Error::config("cap must be a number"));
            }
            self.caps.insert(check.to_string(), cap);
            return Ok(());
        }
        match key {
            "dim" => self.dim = parse_num(value, "dimension")?,
            "depth" => self.depth = parse_num(value, "depth")?,
            "weight" => self.weight = value.parse()?,
            "symbol" => self.symbol = value.parse()?,
            "f" => self.f = value.parse()?,
            "g" => self.g = value.parse()?,
            "checks" => {
                self.checks = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(String::from)
                    .collect()
            }
            "seed" => self.seed = parse_num(value, "seed")?,
            "samples" => self.samples = parse_num(value, "sample count")?,
            "trials" => self.trials = parse_num(value, "trial count")?,
            "p" => self.p = parse_num(value, "exponent")?,
            "alphas" => self.alphas = parse_list(value, "exponent")?,
            "operator" => self.operator = value.parse()?,
            "method" => self.method = parse_method(value)?,
            "lambdas" => self.lambdas = parse_list(value, "level")?,
            "max_slope" => self.max_slope = parse_num(value, "slope")?,
            "max_spread" => self.max_spread = parse_num(value, "spread")?,
            "output" => self.output = Some(PathBuf::from(value)),
            "unsafe_size" => self.unsafe_size = parse_num(value, "boolean")?,
            "export_matrix" => self.export_matrix = parse_num(value, "boolean")?,
            _ => {
                return Err(Error::config(format!(
                    "unknown key `{key}` (valid: {}, cap.<check>)",
                    KEYS.join(", ")
                )))
            }
        }
        Ok(())
    }

    pub fn cells(&self) -> u64 {
        1u64.checked_shl((self.dim * self.depth) as u32)
            .unwrap_or(u64::MAX)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 {
            return Err(Error::config("dim must be at least 1"));
        }
        if self.depth == 0 {
            return Err(Error::config("depth must be at least 1"));
        }
        if self.dim * self.depth > 30 {
            return Err(Error::config("dim * depth must not exceed 30"));
        }
        if !self.unsafe_size && self.cells() > DEFAULT_SIZE_LIMIT {
            return Err(Error::ResourceGuard {
                cells: self.cells(),
                limit: DEFAULT_SIZE_LIMIT,
            });
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &self.checks {
            if !CHECKS.iter().any(|k| k.name == c) {
                let names: Vec<&str> = CHECKS.iter().map(|k| k.name).collect();
                return Err(Error::config(format!(
                    "unknown check `{c}` (valid: {})",
                    names.join(", ")
                )));
            }
            if !seen.insert(c) {
                return Err(Error::config(format!("check `{c}` listed twice")));
            }
        }
        for source in [&self.symbol, &self.f, &self.g] {
            if let GridSource::File(p) = source {
                if !p.is_file() {
                    return Err(Error::config(format!(
                        "file `{}` does not exist",
                        p.display()
                    )));
                }
            }
        }
        if let WeightSource::File(p) = &self.weight {
            if !p.is_file() {
                return Err(Error::config(format!(
                    "file `{}` does not exist",
                    p.display()
                )));
            }
        }
        Ok(())
    }

    /// Canonical `key = value` text: every key, sorted, caps last.
    pub fn to_text(&self) -> String {
        let mut entries: BTreeMap<&str, String> = BTreeMap::new();
        entries.insert("alphas", join(&self.alphas));
        entries.insert("checks", self.checks.join(","));
        entries.insert("depth", self.depth.to_string());
        entries.insert("dim", self.dim.to_string());
        entries.insert("export_matrix", self.export_matrix.to_string());
        entries.insert("f", self.f.to_string());
        entries.insert("g", self.g.to_string());
        entries.insert("lambdas", join(&self.lambdas));
        entries.insert("max_slope", self.max_slope.to_string());
        entries.insert("max_spread", self.max_spread.to_string());
        entries.insert("method", method_name(self.method).into());
        entries.insert("operator", self.operator.to_string());
        entries.insert("p", self.p.to_string());
        entries.insert("samples", self.samples.to_string());
        entries.insert("seed", self.seed.to_string());
        entries.insert("symbol", self.symbol.to_string());
        entries.insert("trials", self.trials.to_string());
        entries.insert("unsafe_size", self.unsafe_size.to_string());
        entries.insert("weight", self.weight.to_string());
        let mut out = String::new();
        for (k, v) in entries {
            out.push_str(&format!("{k} = {v}\n"));
        }
        for (k, v) in &self.caps {
            out.push_str(&format!("cap.{k} = {v}\n"));
        }
        out
    }

    /// SHA-256 of the canonical text and of every referenced file. The
    /// output directory is excluded so that reruns elsewhere hash the same.
    pub fn hash(&self) -> Result<String> {
        let mut h = Sha256::new();
        h.update(self.to_text().as_bytes());
        let files = [&self.symbol, &self.f, &self.g]
            .into_iter()
            .filter_map(|s| match s {
                GridSource::File(p) => Some(p.clone()),
                _ => None,
            })
            .chain(match &self.weight {
                WeightSource::File(p) => Some(p.clone()),
                _ => None,
            });
        for p in files {
            let bytes = std::fs::read(&p).map_err(|e| Error::io(&p, e))?;
            h.update(Sha256::digest(&bytes));
        }
        Ok(hex::encode(h.finalize()))
    }

    pub fn cap(&self, check: &str) -> Option<f64> {
        self.caps.get(check).copied()
    }
}
