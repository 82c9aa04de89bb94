//! Per-column KL between the null column law and `Ber(1/2)^s`, and the two
//! closed-form local bounds on it.

use super::column_law::ColumnLaw;
use crate::error::{ensure, Result};
use crate::perturbed_bernoulli::{bernoulli_lift, kl_bound, kl_exact, PBSpec};

/// `Ber(1/2)^s` written as `PB(q, τ)` on the column law's base rate.
pub fn reference_law(law: &ColumnLaw) -> Result<PBSpec> {
    bernoulli_lift(law.spec.q(), 0.5, law.s())
}

/// Exact `KL(null column || Ber(1/2)^s)`.
pub fn column_kl(law: &ColumnLaw) -> Result<f64> {
    kl_exact(&law.spec, &reference_law(law)?)
}

/// The superset-statistic bound applied to the column.
pub fn column_pb_bound(law: &ColumnLaw) -> Result<f64> {
    kl_bound(&law.spec, &reference_law(law)?)
}

pub fn grid_hypotheses(m: u32, s: usize) -> bool {
    s + 6 <= m as usize
}

/// `k <= m/4`, `s <= m/(2k) - 4` and `n <= m(m-1)/2`.
pub fn lines_hypotheses(n: usize, m: u32, k: u32, s: usize) -> bool {
    let (m, k) = (m as usize, k as usize);
    4 * k <= m && 2 * k * (s + 4) <= m && 2 * n <= m * (m - 1)
}

/// `3s²/(m-2)⁴ + 3 Σ_j (π_j - 1/m)²`, valid for `s <= m - 6`.
pub fn kl_local_bound_grid(law: &ColumnLaw, m: u32, s: usize) -> Result<f64> {
    ensure!(
        law.s() == s,
        "column law has dimension {}, expected {s}",
        law.s()
    );
    ensure!(
        grid_hypotheses(m, s),
        "grid local bound needs s <= m - 6 (s = {s}, m = {m})"
    );
    let mf = m as f64;
    let sf = s as f64;
    let spread: f64 = law
        .singles_f64()
        .iter()
        .map(|&p| (p - 1.0 / mf).powi(2))
        .sum();
    Ok(3.0 * sf * sf / (mf - 2.0).powi(4) + 3.0 * spread)
}

/// `3 Σ_j (S({j}) - (k-1)/m)² + 12k⁴s²/m⁴ + (12k²/m²) Σ_{|J|>=2} S(J)`,
/// valid for `k <= m/4`, `s <= m/(2k) - 4`, `n <= m(m-1)/2`.
pub fn kl_local_bound_lines(law: &ColumnLaw, n: usize, m: u32, k: u32, s: usize) -> Result<f64> {
    ensure!(
        law.s() == s,
        "column law has dimension {}, expected {s}",
        law.s()
    );
    ensure!(
        lines_hypotheses(n, m, k, s),
        "line local bound needs k <= m/4, s <= m/(2k) - 4 and n <= m(m-1)/2 (n = {n}, m = {m}, k = {k}, s = {s})"
    );
    let (mf, kf, sf) = (m as f64, k as f64, s as f64);
    let spread: f64 = law
        .singles_f64()
        .iter()
        .map(|&p| (p - (kf - 1.0) / mf).powi(2))
        .sum();
    let higher = law.spec.superset_sums().higher_order_total();
    Ok(3.0 * spread
        + 12.0 * kf.powi(4) * sf * sf / mf.powi(4)
        + 12.0 * kf * kf / (mf * mf) * higher)
}

/// `Σ_{J'} (2^{|J'|} - |J'| - 1) σ(J')`.
pub fn higher_order_via_sigma(spec: &PBSpec) -> f64 {
    spec.sigma()
        .iter()
        .map(|(&set, &mass)| {
            let size = set.count_ones() as i32;
            (2f64.powi(size) - size as f64 - 1.0) * mass
        })
        .sum()
}
