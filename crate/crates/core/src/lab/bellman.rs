use alloc::format;

use rand::Rng;

use crate::error::{Error, Result};
use crate::report::CheckReport;
use crate::sample::rng;

/// A point `(F, f, u, Y)` of the Bellman domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellmanPoint {
    pub big_f: f64,
    pub f: f64,
    pub u: f64,
    pub y: f64,
}

impl BellmanPoint {
    /// `F, f, u, Y > 0`, `f^2 <= F u` and `Y <= u`.
    pub fn in_domain(&self) -> bool {
        self.big_f > 0.0
            && self.f > 0.0
            && self.u > 0.0
            && self.y > 0.0
            && self.f * self.f <= self.big_f * self.u
            && self.y <= self.u
    }

    /// `(p1 + p2) / 2` in the first three coordinates and `M + (Y1 + Y2) / 2` in the last.
    pub fn midpoint(p1: &BellmanPoint, p2: &BellmanPoint, m: f64) -> BellmanPoint {
        BellmanPoint {
            big_f: 0.5 * (p1.big_f + p2.big_f),
            f: 0.5 * (p1.f + p2.f),
            u: 0.5 * (p1.u + p2.u),
            y: m + 0.5 * (p1.y + p2.y),
        }
    }
}

/// `B(F, f, u, Y) = 4A (F - f^2 / (u + Y))`.
pub fn bellman_b(p: &BellmanPoint, a: f64) -> f64 {
    4.0 * a * (p.big_f - p.f * p.f / (p.u + p.y))
}

fn draw(r: &mut impl Rng) -> BellmanPoint {
    BellmanPoint {
        big_f: 1.0 - r.random::<f64>(),
        f: 1.0 - r.random::<f64>(),
        u: 1.0 - r.random::<f64>(),
        y: 1.0 - r.random::<f64>(),
    }
}

/// Size `0 <= B <= 4F` and convexity `B - (B1 + B2)/2 >= (f^2/u^2) M` with `A = 1`
/// on `samples` seeded draws whose endpoints and midpoint lie in the domain.
///
/// Draws are uniform on `(0, 1]` per coordinate, rejected until the
/// constraints hold. The empirical constant is the largest observed
/// `(f^2/u^2) M / (B - (B1+B2)/2)`; comparisons allow a relative slack of `1e-12`.
pub fn bellman_lmwce_check(samples: usize, seed: u64) -> Result<CheckReport> {
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    const TOL: f64 = 1e-12;
    let mut r = rng(seed);
    let mut report = CheckReport::new("bellman-lmwce", "wilson", 0, 0);
    let mut rejected = 0u64;
    let mut min_slack = f64::INFINITY;
    let mut worst = (0.0f64, 0usize);
    for i in 0..samples {
        let (p1, p2, m, p) = loop {
            let p1 = draw(&mut r);
            let p2 = draw(&mut r);
            let m = r.random::<f64>();
            let p = BellmanPoint::midpoint(&p1, &p2, m);
            if p1.in_domain() && p2.in_domain() && p.in_domain() {
                break (p1, p2, m, p);
            }
            rejected += 1;
        };
        for (label, q) in [("midpoint", &p), ("first", &p1), ("second", &p2)] {
            let b = bellman_b(q, 1.0);
            if b < -TOL * 4.0 * q.big_f || b > 4.0 * q.big_f * (1.0 + TOL) {
                report.violate(format!("sample {i}: size fails at {label} point, B = {b}"));
            }
        }
        let defect = bellman_b(&p, 1.0) - 0.5 * (bellman_b(&p1, 1.0) + bellman_b(&p2, 1.0));
        let needed = p.f * p.f / (p.u * p.u) * m;
        let scale = 4.0 * (p.big_f + p1.big_f + p2.big_f);
        if defect < needed - TOL * scale {
            report.violate(format!(
                "sample {i}: convexity defect {defect} below {needed}"
            ));
        }
        min_slack = min_slack.min(defect - needed);
        let q = if defect > 0.0 {
            needed / defect
        } else if needed > 0.0 {
            f64::INFINITY
        } else {
            0.0
        };
        if q > worst.0 {
            worst = (q, i);
        }
    }
    report.empirical_constant = worst.0;
    report.worst_region = Some(format!("sample {}", worst.1));
    report.param("samples", samples as f64);
    report.param("rejected", rejected as f64);
    report.param("min_slack", min_slack);
    report.param("seed", seed as f64);
    Ok(report)
}
