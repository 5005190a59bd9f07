use alloc::format;
use alloc::string::ToString;

use super::WeightStats;
use crate::dyadic::Node;
use crate::error::Result;
use crate::report::{ratio, CheckReport};
use crate::weights::{apd_characteristic, Weight};

/// The martingale-transform weight estimates over every base pair.
///
/// With `dw = <w>_{E^1} - <w>_{E^2}` and `dv` the same for `w^{-1}`:
/// - mmte1: `(1/|E_i|) sum dv^2 |E| <w>_E` against `[w]^2 <w^{-1}>_{E_i}`;
/// - mmte2: `sum |dw| |dv| |E|` against `[w] |E_i|`;
/// - mmte3: `sum |dw| |dv| |E| / <w^{-1}>_E` against `[w] w(E_i)`;
/// - the Cauchy–Schwarz split of mmte3 into
///   `S4 = sum dw^2 |E| / <w>_E` and `S5 = sum (dv / <w^{-1}>_E)^2 |E| <w>_E`,
///   checked as `mmte3 <= sqrt(S4 S5)` to a relative `1e-12`.
///
/// `[w]` is `[w]_{A_2^d}`. Rows are named `<pair> mmteK`.
pub fn mmte_suite(w: &Weight) -> Result<CheckReport> {
    let stats = WeightStats::new(w);
    let n = stats.cells();
    let c = apd_characteristic(w, 2.0)?.value;
    let (a, v) = (&stats.w, &stats.v);
    let vol = |k: usize| Node(k).volume();
    let s1 = stats.profile(|k| stats.dv(k) * stats.dv(k) * vol(k) * a[k]);
    let s2 = stats.profile(|k| libm::fabs(stats.dw(k) * stats.dv(k)) * vol(k));
    let s3 = stats.profile(|k| libm::fabs(stats.dw(k) * stats.dv(k)) * vol(k) / v[k]);
    let s4 = stats.profile(|k| stats.dw(k) * stats.dw(k) * vol(k) / a[k]);
    let s5 = stats.profile(|k| {
        let r = stats.dv(k) / v[k];
        r * r * vol(k) * a[k]
    });
    let mut report = CheckReport::new("mmte", "dyadic", w.dim(), w.depth());
    report.param("characteristic", c);
    let mut constants = [0.0f64; 3];
    let mut chain: f64 = 0.0;
    for k in 1..n {
        let e = vol(k);
        let region = stats.layout.haar_index(Node(k)).to_string();
        // The profiles are normalized by |E_i|; mmte2 and mmte3 are not.
        let rows = [
            (s1[k], c * c * v[k]),
            (s2[k] * e, c * e),
            (s3[k] * e, c * a[k] * e),
        ];
        for (t, (lhs, rhs)) in rows.into_iter().enumerate() {
            constants[t] = constants[t].max(ratio(lhs, rhs));
            report.record(format!("{region} mmte{}", t + 1), lhs, rhs);
        }
        let bound = libm::sqrt(s4[k] * s5[k]);
        chain = chain.max(ratio(s3[k], bound));
        if s3[k] > bound * (1.0 + 1e-12) + 1e-300 {
            report.violate(format!(
                "{region}: mmte3 sum {} exceeds Cauchy-Schwarz bound {bound}",
                s3[k]
            ));
        }
    }
    for (t, value) in constants.iter().enumerate() {
        report.param(&format!("mmte{}_constant", t + 1), *value);
    }
    report.param("chain_ratio", chain);
    Ok(report)
}
