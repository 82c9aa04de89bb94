use std::path::PathBuf;

use serde::Serialize;

use pcsemi_core::analysis::{
    chained_kl_bound, jaccard_experiment, BoundLedger, Estimator, ExperimentModel,
};
use pcsemi_core::graph_model::{
    gen_classical, gen_coupled, gen_coupled_grid, gen_null_grid, gen_null_lines, gen_semirandom,
    AdversarySpec, DesignKind, InstanceFile, Model,
};
use pcsemi_core::perturbed_bernoulli::INEQUALITY_TOL;
use pcsemi_core::recovery::{jaccard, recover as recover_rule};
use pcsemi_core::verify::{run_suite, Suite, VerifyOptions, VerifyRow};

use crate::manifest::Params;
use crate::output::{digest, emit, float, Table};
use crate::{CliError, Outcome};

const VERIFY_HEADER: [&str; 8] = [
    "suite",
    "case",
    "params",
    "exact",
    "bound",
    "slack",
    "hypotheses",
    "pass",
];

const EXPERIMENT_HEADER: [&str; 11] = [
    "kind",
    "trial",
    "seed",
    "s",
    "recovered_size",
    "jaccard",
    "truncated",
    "runtime_ms",
    "ci_low",
    "ci_high",
    "trials",
];
const RUNTIME_COLUMN: usize = 7;

fn clean(outcome_digest: String) -> Outcome {
    Outcome {
        digest: outcome_digest,
        violations: Vec::new(),
    }
}

pub fn gen(params: &mut Params, seed: u64) -> Result<Outcome, CliError> {
    let model: String = params.required("model")?;
    let n: usize = params.required("n")?;
    let file = match model.as_str() {
        "classical" => InstanceFile::from_planted(&gen_classical(n, params.required("s")?, seed)?),
        "semirandom" => {
            let s = params.required("s")?;
            let adversary: AdversarySpec = params.or("adversary", "random".to_string())?.parse()?;
            InstanceFile::from_planted(&gen_semirandom(n, s, &adversary, seed)?)
        }
        "null-grid" | "null_grid" => {
            let m = params.required("m")?;
            let (graph, cfg) = gen_null_grid(n, m, seed)?;
            InstanceFile::from_null(&graph, &cfg, &Model::NullGrid { m }, seed)
        }
        "null-lines" | "null_lines" => {
            let (m, k) = (params.required("m")?, params.required("k")?);
            let (graph, cfg) = gen_null_lines(n, m, k, seed)?;
            InstanceFile::from_null(&graph, &cfg, &Model::NullLines { m, k }, seed)
        }
        "coupled" => InstanceFile::from_planted(&gen_coupled(n, params.required("m")?, params.required("k")?, seed)?),
        "coupled-grid" | "coupled_grid" => InstanceFile::from_planted(&gen_coupled_grid(n, params.required("m")?, seed)?),
        other => {
            return Err(CliError::Usage(format!(
                "unknown model {other:?}; expected classical, semirandom, null-grid, null-lines, coupled or coupled-grid"
            )))
        }
    };
    let out: PathBuf = params.or("out", PathBuf::from("instance.json"))?;
    let bytes = file.to_json().into_bytes();
    emit(Some(&out), &bytes)?;
    let digest = digest(&bytes);
    println!("{} sha256:{digest}", out.display());
    Ok(clean(digest))
}

#[derive(Serialize)]
struct RecoverReport {
    recovered: Vec<usize>,
    /// Absent when the instance has no planted clique.
    jaccard: Option<f64>,
    good_clique_count: usize,
    truncated: bool,
}

pub fn recover(params: &mut Params) -> Result<Outcome, CliError> {
    let path: PathBuf = params
        .path("instance")?
        .ok_or_else(|| CliError::Usage("recover needs an instance file".into()))?;
    let file = InstanceFile::read(&path)?;
    let graph = file.graph()?;
    let v = match params.get::<usize>("v")? {
        Some(v) => v,
        None => file
            .v
            .ok_or_else(|| CliError::Usage("instance has no revealed vertex; pass --v".into()))?,
    };
    let s = match params.get::<usize>("s")? {
        Some(s) => s,
        None if file.s > 0 => file.s,
        None => {
            return Err(CliError::Usage(
                "instance has no clique size; pass --s".into(),
            ))
        }
    };
    let result = recover_rule(&graph, v, s)?;
    let report = RecoverReport {
        jaccard: (!file.clique.is_empty()).then(|| jaccard(&result.recovered, &file.clique)),
        recovered: result.recovered,
        good_clique_count: result.good_clique_count,
        truncated: result.truncated,
    };
    let bytes = (serde_json::to_string(&report).expect("report serializes") + "\n").into_bytes();
    if let Some(out) = params.path("out")? {
        emit(Some(&out), &bytes)?;
    }
    emit(None, &bytes)?;
    Ok(clean(digest(&bytes)))
}

fn verify_record(row: &VerifyRow) -> [String; 8] {
    [
        row.suite.clone(),
        row.case.clone(),
        row.params.clone(),
        float(row.exact),
        float(row.bound),
        float(row.slack),
        row.hypotheses.to_string(),
        row.pass.to_string(),
    ]
}

fn violation_line(row: &VerifyRow) -> String {
    format!(
        "{} {} {} exact={} bound={}",
        row.suite,
        row.case,
        row.params,
        float(row.exact),
        float(row.bound)
    )
}

pub fn verify(params: &mut Params, seed: u64) -> Result<Outcome, CliError> {
    let suite: Suite = params
        .get::<String>("suite")?
        .ok_or_else(|| CliError::Usage("verify needs a suite: pb-bound, column-laws, local-bounds, chain, hg or union-bound".into()))?
        .parse()?;
    let defaults = VerifyOptions::default();
    let opts = VerifyOptions {
        trials: params.or("trials", defaults.trials)?,
        seed,
        n: params.or("n", defaults.n)?,
        s: params.or("s", defaults.s)?,
    };
    let rows = run_suite(suite, &opts)?;
    let mut table = Table::new(&VERIFY_HEADER);
    for row in &rows {
        table.row(verify_record(row));
    }
    let bytes = table.into_bytes();
    emit(params.path("csv")?.as_deref(), &bytes)?;
    Ok(Outcome {
        digest: digest(&bytes),
        violations: rows
            .iter()
            .filter(|r| !r.pass)
            .map(violation_line)
            .collect(),
    })
}

fn inequality(case: String, params: &str, exact: f64, bound: f64) -> VerifyRow {
    VerifyRow {
        suite: "bounds".into(),
        case,
        params: params.into(),
        exact,
        bound,
        slack: bound - exact,
        hypotheses: true,
        pass: exact <= bound + INEQUALITY_TOL,
    }
}

fn report(case: &str, params: &str, value: f64) -> VerifyRow {
    VerifyRow {
        suite: "bounds".into(),
        case: case.into(),
        params: params.into(),
        exact: value,
        bound: f64::NAN,
        slack: f64::NAN,
        hypotheses: false,
        pass: true,
    }
}

fn ledger_rows(ledger: &BoundLedger) -> Vec<VerifyRow> {
    let p = format!(
        "design={};n={};m={};k={};s={};trials={}",
        match ledger.design {
            DesignKind::Grid => "grid",
            DesignKind::Lines => "lines",
        },
        ledger.n,
        ledger.m,
        ledger.k,
        ledger.s,
        ledger.trials
    );
    let mut rows = Vec::new();
    for col in &ledger.columns {
        rows.push(inequality(
            format!("column#{}:pb", col.i),
            &p,
            col.mean_kl,
            col.mean_pb_bound,
        ));
        if let Some(local) = col.mean_local_bound {
            rows.push(inequality(
                format!("column#{}:local", col.i),
                &p,
                col.mean_kl,
                local,
            ));
        }
    }
    let kl = ledger.chained_kl.mean;
    rows.push(inequality(
        "chain:pb".into(),
        &p,
        kl,
        ledger.chained_pb_bound.mean,
    ));
    if let Some(local) = &ledger.chained_local_bound {
        rows.push(inequality("chain:local".into(), &p, kl, local.mean));
    }
    let mut closed = inequality("chain:closed-form".into(), &p, kl, ledger.closed_form_total);
    closed.hypotheses = ledger.local_hypotheses;
    closed.pass |= !closed.hypotheses;
    rows.push(closed);
    for term in &ledger.closed_form {
        rows.push(report(&format!("term:{}", term.name), &p, term.value));
    }
    rows.push(report("chain:kl-std-err", &p, ledger.chained_kl.std_err));
    rows.push(report("tv:chained-kl", &p, ledger.tv_from_chained_kl));
    rows.push(report("tv:closed-form", &p, ledger.tv_from_closed_form));
    rows
}

pub fn bounds(params: &mut Params, seed: u64) -> Result<Outcome, CliError> {
    let kind = match params.or("model", "grid".to_string())?.as_str() {
        "grid" => DesignKind::Grid,
        "lines" => DesignKind::Lines,
        other => {
            return Err(CliError::Usage(format!(
                "bounds --model must be grid or lines, not {other:?}"
            )))
        }
    };
    let n = params.or("n", 40)?;
    let m = params.or("m", 13)?;
    let k = match kind {
        DesignKind::Grid => 2,
        DesignKind::Lines => params.or("k", 2)?,
    };
    let s = params.or("s", 4)?;
    let trials = params.or("trials", 20)?;
    let ledger = chained_kl_bound(kind, n, m, k, s, trials, seed)?;
    let rows = ledger_rows(&ledger);
    let mut table = Table::new(&VERIFY_HEADER);
    for row in &rows {
        table.row(verify_record(row));
    }
    let bytes = table.into_bytes();
    emit(params.path("csv")?.as_deref(), &bytes)?;
    if let Some(out) = params.path("out")? {
        let json = serde_json::to_string_pretty(&ledger).expect("ledger serializes") + "\n";
        emit(Some(&out), json.as_bytes())?;
    }
    let mut violations: Vec<String> = rows
        .iter()
        .filter(|r| !r.pass)
        .map(violation_line)
        .collect();
    if ledger.violations > 0 {
        violations.push(format!(
            "{} per-trial column(s) exceeded an applicable bound",
            ledger.violations
        ));
    }
    Ok(Outcome {
        digest: digest(&bytes),
        violations,
    })
}

pub fn experiment(params: &mut Params, seed: u64) -> Result<Outcome, CliError> {
    let tag: String = params.get("tag")?.ok_or_else(|| {
        CliError::Usage(
            "experiment needs a tag: recovery-upper, coupled-lower or oracle-line".into(),
        )
    })?;
    let (model, estimator, default_trials) = match tag.as_str() {
        "recovery-upper" => {
            let adversary: AdversarySpec = params
                .or("adversary", "extra_cliques:2".to_string())?
                .parse()?;
            let model = ExperimentModel::SemiRandom {
                n: params.or("n", 60)?,
                s: params.or("s", 15)?,
                adversary,
            };
            (model, Estimator::Recover, 100)
        }
        "coupled-lower" | "oracle-line" => {
            let model = ExperimentModel::Coupled {
                n: params.or("n", 50)?,
                m: params.or("m", 11)?,
                k: params.or("k", 3)?,
            };
            let estimator = if tag == "coupled-lower" {
                Estimator::Recover
            } else {
                Estimator::OracleLinePick
            };
            (model, estimator, 200)
        }
        other => return Err(CliError::Usage(format!(
            "unknown experiment {other:?}; expected recovery-upper, coupled-lower or oracle-line"
        ))),
    };
    let trials = params.or("trials", default_trials)?;
    let summary = jaccard_experiment(&model, &estimator, trials, seed)?;

    let mut records: Vec<Vec<String>> = summary
        .rows
        .iter()
        .map(|r| {
            vec![
                "trial".into(),
                r.trial.to_string(),
                r.seed.to_string(),
                r.s.to_string(),
                r.recovered_size.to_string(),
                float(r.jaccard),
                r.truncated.to_string(),
                float(r.runtime_ms),
                String::new(),
                String::new(),
                String::new(),
            ]
        })
        .collect();
    let (lo, hi) = summary.jaccard.ci95();
    let mut last = vec![String::new(); EXPERIMENT_HEADER.len()];
    last[0] = "summary".into();
    last[5] = float(summary.jaccard.mean);
    last[8] = float(lo);
    last[9] = float(hi);
    last[10] = summary.jaccard.trials.to_string();
    records.push(last);

    let render = |keep_runtime: bool| {
        let mut table = Table::new(&EXPERIMENT_HEADER);
        for rec in &records {
            table.row(rec.iter().enumerate().map(|(i, f)| {
                if i == RUNTIME_COLUMN && !keep_runtime {
                    ""
                } else {
                    f
                }
            }));
        }
        table.into_bytes()
    };
    emit(params.path("csv")?.as_deref(), &render(true))?;
    Ok(clean(digest(&render(false))))
}
