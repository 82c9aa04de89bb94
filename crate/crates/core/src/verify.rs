//! Property sweeps behind `pcsemi verify`. Each suite returns one row per
//! checked case; a suite passes when every row passes.

use std::fmt;
use std::str::FromStr;

use rand::seq::IteratorRandom;
use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::Serialize;

use crate::analysis::chain::{chained_kl_bound, grid_chain_expectation};
use crate::analysis::column_law::{column_law, pi_formula, random_prefix, singleton_formula};
use crate::analysis::hg::{hg_bound, hg_expectation, hg_expectation_exact};
use crate::analysis::joint::joint_kl_report;
use crate::analysis::local_bounds::{
    column_kl, column_pb_bound, grid_hypotheses, kl_local_bound_grid, kl_local_bound_lines,
    lines_hypotheses,
};
use crate::error::{Error, Result};
use crate::graph_model::{Design, DesignKind};
use crate::perturbed_bernoulli::{
    chi2_exact, kl_bound, kl_bound_linear, kl_exact, PBSpec, INEQUALITY_TOL,
};
use crate::recovery::union_bound_probability;
use crate::rng::{stream, StreamRng};
use crate::subset::Subset;
use num_rational::Ratio;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    PbBound,
    ColumnLaws,
    LocalBounds,
    Chain,
    Hg,
    UnionBound,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::PbBound,
        Suite::ColumnLaws,
        Suite::LocalBounds,
        Suite::Chain,
        Suite::Hg,
        Suite::UnionBound,
    ];

    pub fn tag(&self) -> &'static str {
        match self {
            Suite::PbBound => "pb-bound",
            Suite::ColumnLaws => "column-laws",
            Suite::LocalBounds => "local-bounds",
            Suite::Chain => "chain",
            Suite::Hg => "hg",
            Suite::UnionBound => "union-bound",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(text: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|s| s.tag() == text)
            .ok_or_else(|| Error::Precondition(format!("unknown suite {text:?}")))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VerifyRow {
    pub suite: String,
    pub case: String,
    pub params: String,
    pub exact: f64,
    pub bound: f64,
    pub slack: f64,
    /// Whether the hypotheses of the bound hold; rows without them pass trivially.
    pub hypotheses: bool,
    pub pass: bool,
}

impl VerifyRow {
    fn inequality(suite: Suite, case: &str, params: String, exact: f64, bound: f64) -> Self {
        Self {
            suite: suite.tag().into(),
            case: case.into(),
            params,
            exact,
            bound,
            slack: bound - exact,
            hypotheses: true,
            pass: exact <= bound + INEQUALITY_TOL,
        }
    }

    fn not_applicable(suite: Suite, case: &str, params: String, exact: f64) -> Self {
        Self {
            suite: suite.tag().into(),
            case: case.into(),
            params,
            exact,
            bound: f64::NAN,
            slack: f64::NAN,
            hypotheses: false,
            pass: true,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VerifyOptions {
    /// Random cases per configuration.
    pub trials: usize,
    pub seed: u64,
    /// Union-bound suite parameters.
    pub n: usize,
    pub s: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            trials: 50,
            seed: 7,
            n: 1000,
            s: 60,
        }
    }
}

pub fn run_suite(suite: Suite, opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    match suite {
        Suite::PbBound => pb_bound(opts),
        Suite::ColumnLaws => column_laws(opts),
        Suite::LocalBounds => local_bounds(opts),
        Suite::Chain => chain(opts),
        Suite::Hg => hg(),
        Suite::UnionBound => union_bound(opts),
    }
}

/// A random spec on `s` coordinates: a random support with exponential
/// weights, always containing `∅` when `with_empty` is set.
pub fn random_spec<R: Rng + ?Sized>(
    s: usize,
    q: f64,
    with_empty: bool,
    rng: &mut R,
) -> Result<PBSpec> {
    let full = 1u32 << s;
    let support_size = rng.random_range(1..=full.min(12) as usize);
    let mut support: Vec<Subset> = (0..full).choose_multiple(rng, support_size);
    if with_empty && !support.contains(&0) {
        support.push(0);
    }
    let weights: Vec<f64> = support
        .iter()
        .map(|_| Exp1.sample(rng))
        .collect::<Vec<f64>>();
    let total: f64 = weights.iter().sum();
    PBSpec::new(
        s,
        q,
        support
            .into_iter()
            .zip(weights.into_iter().map(|w| w / total)),
    )
}

fn pb_bound(opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();
    for s in 2..=8usize {
        let mut rng = stream(opts.seed, s as u64);
        for t in 0..opts.trials {
            let q = rng.random_range(0.1..=0.9);
            let a = random_spec(s, q, false, &mut rng)?;
            let b = random_spec(s, q, true, &mut rng)?;
            let kl = kl_exact(&a, &b)?;
            let params = format!("s={s};q={q:.6}");
            rows.push(VerifyRow::inequality(
                Suite::PbBound,
                &format!("kl<=bound#{t}"),
                params.clone(),
                kl,
                kl_bound(&a, &b)?,
            ));
            rows.push(VerifyRow::inequality(
                Suite::PbBound,
                &format!("kl<=chi2#{t}"),
                params.clone(),
                kl,
                chi2_exact(&a, &b)?,
            ));
            rows.push(VerifyRow::inequality(
                Suite::PbBound,
                &format!("kl<=linear#{t}"),
                params,
                kl,
                kl_bound_linear(&a, &b)?,
            ));
        }
    }
    Ok(rows)
}

/// Prefix length: uniform over what the generator limit allows.
fn prefix_len(design: &Design, s: usize, rng: &mut StreamRng) -> usize {
    let m = design.m() as usize;
    let cap = match design.kind() {
        DesignKind::Grid => m * m - m,
        DesignKind::Lines => m * (m - 1) / 2,
    };
    rng.random_range(0..cap - s)
}

/// The base sweep: grid for every `(m, s)`, lines for every `(m, k, s)`.
fn sweep_designs(ms: &[u32], ks: &[u32]) -> Result<Vec<Design>> {
    let mut out = Vec::new();
    for &m in ms {
        out.push(Design::grid(m)?);
        for &k in ks {
            out.push(Design::lines(m, k)?);
        }
    }
    Ok(out)
}

fn label(design: &Design) -> String {
    match design.kind() {
        DesignKind::Grid => format!("grid;m={}", design.m()),
        DesignKind::Lines => format!("lines;m={};k={}", design.m(), design.k()),
    }
}

fn column_laws(opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();
    for (d_idx, design) in sweep_designs(&[7, 11, 13], &[2, 3])?
        .into_iter()
        .enumerate()
    {
        for s in 2..=4usize {
            let mut rng = stream(opts.seed, (d_idx * 16 + s) as u64);
            let mut mismatches = 0usize;
            let mut max_pair = 0.0f64;
            for _ in 0..opts.trials {
                let t = prefix_len(&design, s, &mut rng);
                let state = random_prefix(design, s, t, &mut rng)?;
                let law = column_law(&state)?;
                let formula = match design.kind() {
                    DesignKind::Grid => {
                        if law.sigma.keys().any(|set| set.count_ones() >= 2) {
                            mismatches += 1;
                        }
                        pi_formula(&state)?
                    }
                    DesignKind::Lines => singleton_formula(&state)?,
                };
                if formula != law.singles {
                    mismatches += 1;
                }
                let stats = law.spec.superset_sums();
                for set in 0..1u32 << s {
                    if set.count_ones() >= 2 {
                        max_pair = max_pair.max(stats.get(set));
                    }
                }
            }
            let params = format!("{};s={s};prefixes={}", label(&design), opts.trials);
            rows.push(VerifyRow {
                suite: Suite::ColumnLaws.tag().into(),
                case: "singleton-identity".into(),
                params: params.clone(),
                exact: mismatches as f64,
                bound: 0.0,
                slack: -(mismatches as f64),
                hypotheses: true,
                pass: mismatches == 0,
            });
            if design.kind() == DesignKind::Lines {
                let k = design.k() as f64;
                let m = design.m() as f64;
                rows.push(VerifyRow::inequality(
                    Suite::ColumnLaws,
                    "S(J)<=2k^2/m^2",
                    params,
                    max_pair,
                    2.0 * k * k / (m * m),
                ));
            }
        }
    }
    Ok(rows)
}

/// Configurations of the local-bound suite: the base sweep plus larger
/// primes where the line bound's hypotheses can hold.
pub fn local_bound_designs() -> Result<Vec<Design>> {
    let mut designs = sweep_designs(&[7, 11, 13], &[2, 3])?;
    for m in [29, 31, 37, 53] {
        for k in [2, 3] {
            designs.push(Design::lines(m, k)?);
        }
    }
    Ok(designs)
}

fn local_bounds(opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();
    for (d_idx, design) in local_bound_designs()?.into_iter().enumerate() {
        let m = design.m();
        let k = design.k();
        for s in 2..=4usize {
            let mut rng = stream(opts.seed, (1000 + d_idx * 16 + s) as u64);
            for p in 0..opts.trials {
                let t = prefix_len(&design, s, &mut rng);
                let n = s + 1 + t;
                let state = random_prefix(design, s, t, &mut rng)?;
                let law = column_law(&state)?;
                let kl = column_kl(&law)?;
                let params = format!("{};s={s};i={}", label(&design), law.i);
                let case = format!("local#{p}");
                let row = match design.kind() {
                    DesignKind::Grid if grid_hypotheses(m, s) => VerifyRow::inequality(
                        Suite::LocalBounds,
                        &case,
                        params.clone(),
                        kl,
                        kl_local_bound_grid(&law, m, s)?,
                    ),
                    DesignKind::Lines if lines_hypotheses(n, m, k, s) => VerifyRow::inequality(
                        Suite::LocalBounds,
                        &case,
                        params.clone(),
                        kl,
                        kl_local_bound_lines(&law, n, m, k, s)?,
                    ),
                    _ => VerifyRow::not_applicable(Suite::LocalBounds, &case, params.clone(), kl),
                };
                rows.push(row);
                rows.push(VerifyRow::inequality(
                    Suite::LocalBounds,
                    &format!("pb#{p}"),
                    params,
                    kl,
                    column_pb_bound(&law)?,
                ));
            }
        }
    }
    Ok(rows)
}

fn chain(opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();
    let trials = opts.trials.max(2);

    let (n, m, s) = (20, 13, 2);
    let ledger = chained_kl_bound(DesignKind::Grid, n, m, 2, s, trials, opts.seed)?;
    let exact = grid_chain_expectation(n, m, s)?;
    let params = format!("grid;n={n};m={m};s={s};trials={trials}");
    let local = ledger.chained_local_bound.expect("grid hypotheses hold");
    rows.push(VerifyRow::inequality(
        Suite::Chain,
        "chained-kl<=chained-local",
        params.clone(),
        ledger.chained_kl.mean,
        local.mean,
    ));
    rows.push(VerifyRow::inequality(
        Suite::Chain,
        "chained-kl<=chained-pb",
        params.clone(),
        ledger.chained_kl.mean,
        ledger.chained_pb_bound.mean,
    ));
    let target = exact.local_bound.expect("grid hypotheses hold");
    let dev = (local.mean - target).abs();
    rows.push(VerifyRow::inequality(
        Suite::Chain,
        "mc-local-vs-exhaustive(3se)",
        params.clone(),
        dev,
        3.0 * local.std_err,
    ));
    rows.push(VerifyRow::inequality(
        Suite::Chain,
        "column-violations",
        params,
        ledger.violations as f64,
        0.0,
    ));

    let (n, m, k, s) = (40, 29, 2, 3);
    let ledger = chained_kl_bound(DesignKind::Lines, n, m, k, s, trials, opts.seed)?;
    let params = format!("lines;n={n};m={m};k={k};s={s};trials={trials}");
    if let Some(local) = ledger.chained_local_bound {
        rows.push(VerifyRow::inequality(
            Suite::Chain,
            "chained-kl<=chained-local",
            params.clone(),
            ledger.chained_kl.mean,
            local.mean,
        ));
    }
    rows.push(VerifyRow::inequality(
        Suite::Chain,
        "chained-kl<=chained-pb",
        params.clone(),
        ledger.chained_kl.mean,
        ledger.chained_pb_bound.mean,
    ));
    rows.push(VerifyRow::inequality(
        Suite::Chain,
        "column-violations",
        params,
        ledger.violations as f64,
        0.0,
    ));

    let report = joint_kl_report(5, DesignKind::Grid, 3, 2)?;
    rows.push(VerifyRow::inequality(
        Suite::Chain,
        "joint-kl<=chain-rhs",
        "grid;n=5;m=3".into(),
        report.kl,
        report.chain_rhs,
    ));
    Ok(rows)
}

fn hg() -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();
    let exact = hg_expectation_exact(2, 3, 10)?;
    rows.push(VerifyRow {
        suite: Suite::Hg.tag().into(),
        case: "HG(2,3,10)=1/15".into(),
        params: "draws=2;marked=3;total=10".into(),
        exact: *exact.numer() as f64 / *exact.denom() as f64,
        bound: 1.0 / 15.0,
        slack: 0.0,
        hypotheses: true,
        pass: exact == Ratio::new(1, 15),
    });
    for k in 1..=6u64 {
        for s in 0..=12u64 {
            for m in 1..=64u64 {
                if 2 * (k - 1) * s > m || s > m || k - 1 > m {
                    continue;
                }
                let e = hg_expectation(k - 1, s, m)?;
                rows.push(VerifyRow::inequality(
                    Suite::Hg,
                    "E[2^I-I-1]<=4k^2s^2/m^2",
                    format!("k={k};s={s};m={m}"),
                    e,
                    hg_bound(k, s, m)?,
                ));
            }
        }
    }
    Ok(rows)
}

fn union_bound(opts: &VerifyOptions) -> Result<Vec<VerifyRow>> {
    let (n, s) = (opts.n, opts.s);
    let l0 = (s / 2).max(1);
    let value = union_bound_probability(n, s, l0)?;
    let bound = 2.0 * s as f64 / (n as f64 * n as f64);
    Ok(vec![VerifyRow::inequality(
        Suite::UnionBound,
        "P<=2s/n^2",
        format!("n={n};s={s};l0={l0}"),
        value,
        bound,
    )])
}
