use num_rational::Ratio;

use crate::error::{ensure, Result};
use crate::graph_model::hypergeometric::pmf_exact;

/// `E[2^I - I - 1]` for `I ~ HG(draws, marked, total)`, as an exact rational.
pub fn hg_expectation_exact(draws: u64, marked: u64, total: u64) -> Result<Ratio<i128>> {
    let pmf = pmf_exact(draws, marked, total)?;
    Ok(pmf
        .iter()
        .enumerate()
        .map(|(i, &p)| p * Ratio::from_integer((1i128 << i) - i as i128 - 1))
        .sum())
}

pub fn hg_expectation(draws: u64, marked: u64, total: u64) -> Result<f64> {
    let r = hg_expectation_exact(draws, marked, total)?;
    Ok(*r.numer() as f64 / *r.denom() as f64)
}

/// `4k²s²/m²`, stated for `2(k-1)s/m <= 1`.
pub fn hg_bound(k: u64, s: u64, m: u64) -> Result<f64> {
    ensure!(k >= 1 && m >= 1, "hg_bound needs k >= 1 and m >= 1");
    ensure!(
        2 * (k - 1) * s <= m,
        "hg_bound needs 2(k-1)s/m <= 1 (k = {k}, s = {s}, m = {m})"
    );
    let (k, s, m) = (k as f64, s as f64, m as f64);
    Ok(4.0 * k * k * s * s / (m * m))
}
