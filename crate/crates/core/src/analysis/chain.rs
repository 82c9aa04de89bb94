//! Chaining the per-column divergences over the non-clique vertices.
//!
//! For a fixed clique size `s`, the joint divergence between the null and the
//! coupled planted distribution is at most the sum over `i = s+1..n` of the
//! expected column divergence, the expectation taken over null prefixes.

use rayon::prelude::*;
use serde::Serialize;

use super::column_law::{column_law, random_prefix, ColumnLaw, Rational};
use super::local_bounds::{
    column_kl, column_pb_bound, grid_hypotheses, kl_local_bound_grid, kl_local_bound_lines,
    lines_hypotheses,
};
use super::{tv_from_kl, Estimate};
use crate::error::{ensure, Result};
use crate::graph_model::hypergeometric::binomial;
use crate::graph_model::{Design, DesignKind};
use crate::perturbed_bernoulli::{PBSpec, INEQUALITY_TOL};
use crate::rng::{stream, trial_seed};
use crate::subset;
use num_rational::Ratio;
use rand::Rng;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Term {
    pub name: String,
    pub value: f64,
}

/// Averages for one column position over the trials.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ColumnStat {
    pub i: usize,
    pub mean_kl: f64,
    pub mean_pb_bound: f64,
    /// Absent when the local bound's hypotheses fail.
    pub mean_local_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundLedger {
    pub design: DesignKind,
    pub n: usize,
    pub m: u32,
    pub k: u32,
    pub s: usize,
    pub trials: usize,
    pub local_hypotheses: bool,
    pub columns: Vec<ColumnStat>,
    pub chained_kl: Estimate,
    pub chained_pb_bound: Estimate,
    pub chained_local_bound: Option<Estimate>,
    pub closed_form: Vec<Term>,
    pub closed_form_total: f64,
    /// Columns where the exact divergence exceeded a bound that applied.
    pub violations: usize,
    pub tv_from_chained_kl: f64,
    pub tv_from_closed_form: f64,
}

/// `3s²n/(m-2)⁴` and `6sn²/m⁵`.
pub fn closed_form_grid(n: usize, m: u32, s: usize) -> Vec<Term> {
    let (n, m, s) = (n as f64, m as f64, s as f64);
    vec![
        Term {
            name: "3s^2n/(m-2)^4".into(),
            value: 3.0 * s * s * n / (m - 2.0).powi(4),
        },
        Term {
            name: "6sn^2/m^5".into(),
            value: 6.0 * s * n * n / m.powi(5),
        },
    ]
}

/// `12k⁴s²n/m⁴` (fixed term), `48k⁴s²n/m⁴` (higher-order statistics through
/// the hypergeometric bound) and `12k³sn²/m⁵` (singleton variance).
pub fn closed_form_lines(n: usize, m: u32, k: u32, s: usize) -> Vec<Term> {
    let (n, m, k, s) = (n as f64, m as f64, k as f64, s as f64);
    vec![
        Term {
            name: "12k^4s^2n/m^4".into(),
            value: 12.0 * k.powi(4) * s * s * n / m.powi(4),
        },
        Term {
            name: "48k^4s^2n/m^4".into(),
            value: 48.0 * k.powi(4) * s * s * n / m.powi(4),
        },
        Term {
            name: "12k^3sn^2/m^5".into(),
            value: 12.0 * k.powi(3) * s * n * n / m.powi(5),
        },
    ]
}

pub(crate) fn design_for(kind: DesignKind, m: u32, k: u32) -> Result<Design> {
    match kind {
        DesignKind::Grid => Design::grid(m),
        DesignKind::Lines => Design::lines(m, k),
    }
}

fn local_bound(
    law: &ColumnLaw,
    kind: DesignKind,
    n: usize,
    m: u32,
    k: u32,
    s: usize,
) -> Result<Option<f64>> {
    match kind {
        DesignKind::Grid if grid_hypotheses(m, s) => kl_local_bound_grid(law, m, s).map(Some),
        DesignKind::Lines if lines_hypotheses(n, m, k, s) => {
            kl_local_bound_lines(law, n, m, k, s).map(Some)
        }
        _ => Ok(None),
    }
}

struct TrialColumns {
    kl: Vec<f64>,
    pb: Vec<f64>,
    local: Vec<Option<f64>>,
    violations: usize,
}

/// Monte Carlo estimate of the chained column divergences and bounds for
/// clique size `s`, over `trials` null prefixes.
pub fn chained_kl_bound(
    kind: DesignKind,
    n: usize,
    m: u32,
    k: u32,
    s: usize,
    trials: usize,
    seed: u64,
) -> Result<BoundLedger> {
    let design = design_for(kind, m, k)?;
    let cap = match kind {
        DesignKind::Grid => (m * m - m) as usize,
        DesignKind::Lines => (m as usize) * (m as usize - 1) / 2,
    };
    ensure!(n <= cap, "n = {n} exceeds the generator limit {cap}");
    ensure!(
        s >= 1 && s < n && s <= m as usize,
        "need 1 <= s < n and s <= m (s = {s})"
    );
    ensure!(trials >= 1, "need at least one trial");
    let local_hypotheses = match kind {
        DesignKind::Grid => grid_hypotheses(m, s),
        DesignKind::Lines => lines_hypotheses(n, m, k, s),
    };

    let per_trial: Vec<TrialColumns> = (0..trials as u64)
        .into_par_iter()
        .map(|t| -> Result<TrialColumns> {
            let mut rng = stream(trial_seed(seed, t), 0);
            let mut state = random_prefix(design, s, 0, &mut rng)?;
            let mut out = TrialColumns {
                kl: vec![],
                pb: vec![],
                local: vec![],
                violations: 0,
            };
            for _ in s + 1..=n {
                let law = column_law(&state)?;
                let kl = column_kl(&law)?;
                let pb = column_pb_bound(&law)?;
                let local = local_bound(&law, kind, n, m, k, s)?;
                if kl > pb + INEQUALITY_TOL || local.is_some_and(|b| kl > b + INEQUALITY_TOL) {
                    out.violations += 1;
                }
                out.kl.push(kl);
                out.pb.push(pb);
                out.local.push(local);
                let free = state.free_points();
                let next = free[rng.random_range(0..free.len())];
                state.assign(next)?;
            }
            Ok(out)
        })
        .collect::<Result<_>>()?;

    let columns = (0..n - s)
        .map(|c| {
            let mean = |f: &dyn Fn(&TrialColumns) -> f64| {
                per_trial.iter().map(f).sum::<f64>() / trials as f64
            };
            ColumnStat {
                i: s + 1 + c,
                mean_kl: mean(&|t| t.kl[c]),
                mean_pb_bound: mean(&|t| t.pb[c]),
                mean_local_bound: local_hypotheses
                    .then(|| mean(&|t| t.local[c].unwrap_or(f64::NAN))),
            }
        })
        .collect();
    let totals = |f: &dyn Fn(&TrialColumns) -> f64| {
        Estimate::from_samples(&per_trial.iter().map(f).collect::<Vec<_>>())
    };
    let chained_kl = totals(&|t| t.kl.iter().sum());
    let chained_pb_bound = totals(&|t| t.pb.iter().sum());
    let chained_local_bound =
        local_hypotheses.then(|| totals(&|t| t.local.iter().map(|b| b.unwrap_or(f64::NAN)).sum()));
    let closed_form = match kind {
        DesignKind::Grid => closed_form_grid(n, m, s),
        DesignKind::Lines => closed_form_lines(n, m, k, s),
    };
    let closed_form_total = closed_form.iter().map(|t| t.value).sum();
    Ok(BoundLedger {
        design: kind,
        n,
        m,
        k: design.k(),
        s,
        trials,
        local_hypotheses,
        columns,
        tv_from_chained_kl: tv_from_kl(chained_kl.mean.max(0.0))?,
        tv_from_closed_form: tv_from_kl(closed_form_total)?,
        chained_kl,
        chained_pb_bound,
        chained_local_bound,
        closed_form,
        closed_form_total,
        violations: per_trial.iter().map(|t| t.violations).sum(),
    })
}

/// Exact expected chained sums on the grid design.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ChainExpectation {
    pub kl: f64,
    pub pb_bound: f64,
    /// Absent when `s > m - 6`.
    pub local_bound: Option<f64>,
}

/// Grid column law when the clique columns hold `counts[j]` earlier points
/// and `t` earlier points were placed in total.
pub fn grid_law_from_counts(m: u32, t: usize, counts: &[usize]) -> Result<ColumnLaw> {
    let s = counts.len();
    let mi = m as i64;
    let free = mi * mi - mi - t as i64;
    ensure!(free > 0, "no free points after {t} draws");
    let singles: Vec<Rational> = counts
        .iter()
        .map(|&c| Ratio::new(mi - 1 - c as i64, free))
        .collect();
    let mut sigma = std::collections::BTreeMap::new();
    let rest = Ratio::from_integer(1) - singles.iter().copied().sum::<Rational>();
    if rest != Ratio::from_integer(0) {
        sigma.insert(0, rest);
    }
    for (j, &p) in singles.iter().enumerate() {
        if p != Ratio::from_integer(0) {
            sigma.insert(subset::from_coords([j + 1]), p);
        }
    }
    let q = Design::grid(m)?.edge_rate();
    let spec = PBSpec::new(
        s,
        q,
        sigma
            .iter()
            .map(|(&set, r)| (set, super::column_law::to_f64(r))),
    )?;
    Ok(ColumnLaw {
        spec,
        sigma,
        singles,
        counts: counts.to_vec(),
        i: s + 1 + t,
    })
}

/// Expected chained sums on the grid for fixed `s`, by summing over the
/// multivariate hypergeometric law of the clique-column occupancies at every
/// step. Feasible for small `s`.
pub fn grid_chain_expectation(n: usize, m: u32, s: usize) -> Result<ChainExpectation> {
    let cap = (m * m - m) as usize;
    ensure!(
        n <= cap && s >= 1 && s < n && s <= m as usize,
        "grid chain needs 1 <= s < n <= m² - m"
    );
    ensure!(
        s <= 4,
        "exhaustive occupancy enumeration supports s <= 4 (got {s})"
    );
    let per_col = (m - 1) as u64;
    let others = cap as u64 - s as u64 * per_col;
    let mut total = ChainExpectation {
        kl: 0.0,
        pb_bound: 0.0,
        local_bound: grid_hypotheses(m, s).then_some(0.0),
    };
    for t in 0..n - s {
        let denom = binomial(cap as u64, t as u64).ok_or_else(|| overflow(t))? as f64;
        let mut counts = vec![0usize; s];
        loop {
            let used: usize = counts.iter().sum();
            if used <= t && (t - used) as u64 <= others {
                let mut ways =
                    binomial(others, (t - used) as u64).ok_or_else(|| overflow(t))? as f64;
                for &c in &counts {
                    ways *= binomial(per_col, c as u64).ok_or_else(|| overflow(t))? as f64;
                }
                let p = ways / denom;
                if p > 0.0 {
                    let law = grid_law_from_counts(m, t, &counts)?;
                    total.kl += p * column_kl(&law)?;
                    total.pb_bound += p * column_pb_bound(&law)?;
                    if let Some(b) = total.local_bound.as_mut() {
                        *b += p * kl_local_bound_grid(&law, m, s)?;
                    }
                }
            }
            if !advance(&mut counts, t.min(per_col as usize)) {
                break;
            }
        }
    }
    Ok(total)
}

fn overflow(t: usize) -> crate::error::Error {
    crate::error::Error::StateSpace(format!("binomial overflow at step {t}"))
}

/// Odometer over `0..=max` in every coordinate.
fn advance(counts: &mut [usize], max: usize) -> bool {
    for c in counts.iter_mut() {
        if *c < max {
            *c += 1;
            return true;
        }
        *c = 0;
    }
    false
}
