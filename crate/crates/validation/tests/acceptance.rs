//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use num_rational::Ratio;
use pcsemi_core::analysis::local_bounds::{grid_hypotheses, lines_hypotheses};
use pcsemi_core::analysis::{
    column_kl, column_law, column_law_grid, column_law_lines, hg_bound, hg_expectation,
    hg_expectation_exact, jaccard_experiment, joint_kl_report, kl_local_bound_grid,
    kl_local_bound_lines, pi_formula, random_prefix, singleton_formula, Estimator, ExperimentModel,
};
use pcsemi_core::graph_model::{gen_null_lines, AdversarySpec, Design, DesignKind};
use pcsemi_core::perturbed_bernoulli::{chi2_exact, kl_bound, kl_bound_linear, kl_exact};
use pcsemi_core::recovery::union_bound_probability;
use pcsemi_core::rng::stream;
use pcsemi_core::subset;
use pcsemi_core::verify::random_spec;
use pcsemi_core::Result;
use rand::Rng;
use rayon::prelude::*;

const SEED: u64 = 2024;
const SLACK: f64 = 1e-9;
const IDENTITY: f64 = 1e-12;

struct Outcome {
    pass: bool,
    detail: String,
}

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Duration,
    run: fn() -> Result<Outcome>,
}

fn pb_sweep() -> Result<Outcome> {
    let per_s: Vec<(usize, usize, usize, f64, f64)> = (2..=8usize)
        .into_par_iter()
        .map(|s| -> Result<_> {
            let mut rng = stream(SEED, s as u64);
            let (mut chi_bad, mut bound_bad, mut linear_bad) = (0, 0, 0);
            let mut worst_gap = 0.0f64;
            let mut min_bad_q = f64::INFINITY;
            for _ in 0..500 {
                let q = rng.random_range(0.1..=0.9);
                let a = random_spec(s, q, false, &mut rng)?;
                let b = random_spec(s, q, true, &mut rng)?;
                let kl = kl_exact(&a, &b)?;
                chi_bad += (kl > chi2_exact(&a, &b)? + SLACK) as usize;
                let bound = kl_bound(&a, &b)?;
                if kl > bound + SLACK {
                    bound_bad += 1;
                    worst_gap = worst_gap.max(kl - bound);
                    min_bad_q = min_bad_q.min(q);
                }
                linear_bad += (kl > kl_bound_linear(&a, &b)? + SLACK) as usize;
            }
            Ok((chi_bad, bound_bad, linear_bad, worst_gap, min_bad_q))
        })
        .collect::<Result<_>>()?;
    let chi_bad: usize = per_s.iter().map(|r| r.0).sum();
    let bound_bad: usize = per_s.iter().map(|r| r.1).sum();
    let linear_bad: usize = per_s.iter().map(|r| r.2).sum();
    let worst = per_s.iter().map(|r| r.3).fold(0.0, f64::max);
    let min_q = per_s.iter().map(|r| r.4).fold(f64::INFINITY, f64::min);
    let mut detail = format!(
        "3500 pairs: kl>chi2 in {chi_bad}, kl>bound in {bound_bad}, kl>bound with |J| exponent in {linear_bad}"
    );
    if bound_bad > 0 {
        detail +=
            &format!("; bound violations only at q >= {min_q:.4}, largest excess {worst:.4e}");
    }
    Ok(Outcome {
        pass: chi_bad == 0 && bound_bad == 0,
        detail,
    })
}

fn fourier_consistency() -> Result<Outcome> {
    let mut rng = stream(SEED, 100);
    let (mut worst_point, mut worst_norm) = (0.0f64, 0.0f64);
    for _ in 0..200 {
        let s = rng.random_range(1..=10usize);
        let q = rng.random_range(0.1..=0.9);
        let spec = random_spec(s, q, false, &mut rng)?;
        let mut total = 0.0;
        for x in 0..1u32 << s {
            let x: Vec<bool> = (0..s).map(|j| x >> j & 1 == 1).collect();
            let p = spec.pmf(&x)?;
            worst_point = worst_point.max((p - spec.pmf_fourier(&x)?).abs());
            total += p;
        }
        worst_norm = worst_norm.max((total - 1.0).abs());
    }
    Ok(Outcome {
        pass: worst_point <= IDENTITY && worst_norm <= IDENTITY,
        detail: format!("200 specs, s<=10: max |pmf - fourier| = {worst_point:.2e}, max |sum - 1| = {worst_norm:.2e}"),
    })
}

fn sweep_designs() -> Result<Vec<Design>> {
    let mut out = Vec::new();
    for m in [7u32, 11, 13] {
        out.push(Design::grid(m)?);
        for k in [2u32, 3] {
            out.push(Design::lines(m, k)?);
        }
    }
    Ok(out)
}

fn prefix_cap(design: &Design) -> usize {
    let m = design.m() as usize;
    match design.kind() {
        DesignKind::Grid => m * m - m,
        DesignKind::Lines => m * (m - 1) / 2,
    }
}

fn column_laws() -> Result<Outcome> {
    let mut checked = 0;
    let mut mismatches = 0;
    for design in sweep_designs()? {
        for s in [2usize, 3, 4] {
            let mut rng = stream(
                SEED,
                200 + design.m() as u64 * 10 + design.k() as u64 + 1000 * s as u64,
            );
            for _ in 0..50 {
                let t = rng.random_range(0..=prefix_cap(&design) - s);
                let state = random_prefix(design, s, t, &mut rng)?;
                checked += 1;
                let ok = match design.kind() {
                    DesignKind::Grid => {
                        let law = column_law_grid(&state)?;
                        let pi = pi_formula(&state)?;
                        law.sigma.keys().all(|&set| subset::size(set) <= 1)
                            && (0..s).all(|j| {
                                law.sigma
                                    .get(&subset::from_coords([j + 1]))
                                    .copied()
                                    .unwrap_or_default()
                                    == pi[j]
                            })
                    }
                    DesignKind::Lines => {
                        column_law_lines(&state)?.singles == singleton_formula(&state)?
                    }
                };
                mismatches += !ok as usize;
            }
        }
    }
    Ok(Outcome {
        pass: mismatches == 0,
        detail: format!("{checked} prefixes, {mismatches} mismatches (exact rationals)"),
    })
}

/// Returns (configurations meeting the hypotheses, violations).
fn local_sweep(design: Design, sizes: &[usize], key: u64) -> Result<(usize, usize)> {
    let m = design.m();
    let k = design.k();
    let n = prefix_cap(&design);
    let mut rng = stream(SEED, key);
    let (mut applicable, mut violations) = (0, 0);
    for &s in sizes {
        let holds = match design.kind() {
            DesignKind::Grid => grid_hypotheses(m, s),
            DesignKind::Lines => lines_hypotheses(n, m, k, s),
        };
        for _ in 0..50 {
            let t = rng.random_range(0..=n - s);
            let state = random_prefix(design, s, t, &mut rng)?;
            if !holds {
                continue;
            }
            let law = column_law(&state)?;
            let bound = match design.kind() {
                DesignKind::Grid => kl_local_bound_grid(&law, m, s)?,
                DesignKind::Lines => kl_local_bound_lines(&law, n, m, k, s)?,
            };
            applicable += 1;
            violations += (column_kl(&law)? > bound + SLACK) as usize;
        }
    }
    Ok((applicable, violations))
}

fn local_bounds() -> Result<Outcome> {
    let (mut grid_n, mut lines_n, mut bad) = (0, 0, 0);
    for (x, design) in sweep_designs()?.into_iter().enumerate() {
        let (a, v) = local_sweep(design, &[2, 3, 4], 300 + x as u64)?;
        match design.kind() {
            DesignKind::Grid => grid_n += a,
            DesignKind::Lines => lines_n += a,
        }
        bad += v;
    }
    // The base sweep never meets s <= m/(2k) - 4, so the line bound is also
    // exercised on larger primes.
    let mut extended = 0;
    for (x, (m, k)) in [(29u32, 2u32), (31, 2), (37, 2), (53, 2), (53, 3)]
        .into_iter()
        .enumerate()
    {
        let (a, v) = local_sweep(Design::lines(m, k)?, &[1, 2, 3, 4], 400 + x as u64)?;
        extended += a;
        bad += v;
    }
    Ok(Outcome {
        pass: bad == 0,
        detail: format!(
            "grid {grid_n} and lines {lines_n} applicable configs in the base sweep, lines {extended} on m in {{29..53}}: {bad} violations"
        ),
    })
}

fn chain_check() -> Result<Outcome> {
    let r = joint_kl_report(5, DesignKind::Grid, 3, 2)?;
    let finite = r.kl.is_finite() && r.chain_rhs.is_finite();
    Ok(Outcome {
        pass: finite && r.kl <= r.chain_rhs + SLACK,
        detail: format!(
            "KL(P0||P1) = {:.6e}, chain sum = {:.6e}, slack = {:.6e}, masses {:.12} / {:.12}",
            r.kl, r.chain_rhs, r.slack, r.p0_mass, r.p1_mass
        ),
    })
}

fn hg_domination() -> Result<Outcome> {
    let mut points = 0;
    let mut bad = 0;
    for k in 1..=6u64 {
        for s in 1..=12u64 {
            for m in 1..=64u64 {
                if 2 * (k - 1) * s > m || s > m {
                    continue;
                }
                points += 1;
                bad += (hg_expectation(k - 1, s, m)? > hg_bound(k, s, m)? + SLACK) as usize;
            }
        }
    }
    let exact = hg_expectation_exact(2, 3, 10)?;
    let exact_ok = exact == Ratio::new(1, 15);
    Ok(Outcome {
        pass: bad == 0 && exact_ok,
        detail: format!("{points} grid points, {bad} violations; hg_expectation(2,3,10) = {exact}"),
    })
}

fn union_bound() -> Result<Outcome> {
    let value = union_bound_probability(1000, 60, 30)?;
    let limit = 2.0 * 60.0 / 1e6;
    Ok(Outcome {
        pass: value <= limit,
        detail: format!("value = {value:.6e} vs 2s/n^2 = {limit:.1e}"),
    })
}

fn upper_recovery() -> Result<Outcome> {
    let model = ExperimentModel::SemiRandom {
        n: 60,
        s: 15,
        adversary: AdversarySpec::ExtraCliques(2),
    };
    let summary = jaccard_experiment(&model, &Estimator::Recover, 100, SEED)?;
    let exact = summary.rows.iter().filter(|r| r.jaccard == 1.0).count();
    let truncated = summary.rows.iter().filter(|r| r.truncated).count();
    Ok(Outcome {
        pass: exact >= 98,
        detail: format!(
            "exact recovery in {exact}/100 (need >= 98), abstained {}, truncated {truncated}",
            summary
                .rows
                .iter()
                .filter(|r| r.recovered_size == 0)
                .count()
        ),
    })
}

fn lower_mechanism() -> Result<Outcome> {
    let model = ExperimentModel::Coupled { n: 50, m: 11, k: 3 };
    let rec = jaccard_experiment(&model, &Estimator::Recover, 200, SEED)?;
    let oracle = jaccard_experiment(&model, &Estimator::OracleLinePick, 200, SEED)?;
    let abstain = rec.abstain_rate();
    let gap = (oracle.jaccard.mean - 1.0 / 3.0).abs();
    Ok(Outcome {
        pass: abstain >= 0.95 && gap <= 0.1,
        detail: format!(
            "recover abstains in {:.1}% (need >= 95%), oracle mean Jaccard {:.4} +/- {:.4} vs 1/3",
            100.0 * abstain,
            oracle.jaccard.mean,
            oracle.jaccard.std_err
        ),
    })
}

fn generator_calibration() -> Result<Outcome> {
    let (n, m, k) = (50usize, 11u32, 3u32);
    let q = Design::lines(m, k)?.edge_rate();
    let stats: Vec<(usize, usize, bool)> = (0..10_000u64)
        .into_par_iter()
        .map(|seed| -> Result<_> {
            let (g, cfg) = gen_null_lines(n, m, k, seed)?;
            let (mut hits, mut pairs) = (0, 0);
            for i in 0..n {
                for j in i + 1..n {
                    if !cfg.design.related(cfg.points[i], cfg.points[j]) {
                        pairs += 1;
                        hits += g.has_edge(i, j) as usize;
                    }
                }
            }
            // Slope-r class of vertex i from coordinates; each must be a clique
            // meeting the others only at i.
            let multiplicity_ok = (0..n).all(|i| {
                let classes: Vec<Vec<usize>> = (0..k as i64)
                    .map(|r| {
                        (0..n)
                            .filter(|&j| {
                                let (p, o) = (cfg.points[i], cfg.points[j]);
                                (p.a as i64 - o.a as i64 - r * (p.b as i64 - o.b as i64))
                                    .rem_euclid(m as i64)
                                    == 0
                            })
                            .collect()
                    })
                    .collect();
                let blocks = cfg.design.blocks_through(cfg.points[i]).len();
                blocks == k as usize
                    && classes.iter().all(|c| g.is_clique(c))
                    && classes.iter().enumerate().all(|(x, c)| {
                        classes[x + 1..]
                            .iter()
                            .all(|d| c.iter().filter(|v| d.contains(v)).eq(std::iter::once(&i)))
                    })
            });
            Ok((hits, pairs, multiplicity_ok))
        })
        .collect::<Result<_>>()?;
    let hits: usize = stats.iter().map(|s| s.0).sum();
    let pairs: usize = stats.iter().map(|s| s.1).sum();
    let bad = stats.iter().filter(|s| !s.2).count();
    let rate = hits as f64 / pairs as f64;
    let sigma = (q * (1.0 - q) / pairs as f64).sqrt();
    let z = (rate - q) / sigma;
    Ok(Outcome {
        pass: z.abs() <= 3.0 && bad == 0,
        detail: format!(
            "off-design rate {rate:.6} vs q = {q:.6} (z = {z:+.2}); {bad} of 10000 instances with line multiplicity != {k}"
        ),
    })
}

fn main() -> ExitCode {
    let criteria = [
        Criterion {
            id: 1,
            name: "superset-statistic KL sweep",
            limit: Duration::from_secs(30),
            run: pb_sweep,
        },
        Criterion {
            id: 2,
            name: "Fourier form and normalization",
            limit: Duration::from_secs(10),
            run: fourier_consistency,
        },
        Criterion {
            id: 3,
            name: "column-law identities",
            limit: Duration::from_secs(60),
            run: column_laws,
        },
        Criterion {
            id: 4,
            name: "local KL bounds",
            limit: Duration::from_secs(120),
            run: local_bounds,
        },
        Criterion {
            id: 5,
            name: "chain rule at n=5, m=3",
            limit: Duration::from_secs(300),
            run: chain_check,
        },
        Criterion {
            id: 6,
            name: "hypergeometric domination",
            limit: Duration::from_secs(5),
            run: hg_domination,
        },
        Criterion {
            id: 7,
            name: "union bound",
            limit: Duration::from_secs(1),
            run: union_bound,
        },
        Criterion {
            id: 8,
            name: "upper-bound recovery",
            limit: Duration::from_secs(120),
            run: upper_recovery,
        },
        Criterion {
            id: 9,
            name: "lower-bound mechanism",
            limit: Duration::from_secs(300),
            run: lower_mechanism,
        },
        Criterion {
            id: 10,
            name: "null-lines calibration",
            limit: Duration::from_secs(60),
            run: generator_calibration,
        },
    ];
    let mut failed = Vec::new();
    for c in &criteria {
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let (pass, detail) = match outcome {
            Ok(o) => (o.pass && elapsed <= c.limit, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let timing = if elapsed <= c.limit {
            String::new()
        } else {
            format!(" over the {:?} limit", c.limit)
        };
        println!(
            "criterion {:>2} [{}] {}: {} ({:.2} s{timing})",
            c.id,
            if pass { "PASS" } else { "FAIL" },
            c.name,
            detail,
            elapsed.as_secs_f64()
        );
        if !pass {
            failed.push(c.id);
        }
    }
    println!(
        "{}/{} criteria passed",
        criteria.len() - failed.len(),
        criteria.len()
    );
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {failed:?}");
        ExitCode::FAILURE
    }
}
