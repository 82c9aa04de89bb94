//! Information-theoretic recovery: enumerate large maximal cliques, keep the
//! good ones, and return the unique good clique containing the revealed
//! vertex. Also the `7s/8` degree refinement for externally supplied
//! candidate sets, Jaccard scoring and the union-bound evaluator.
//!
//! Goodness is tested against maximal cliques only. For a maximal clique `C`,
//! any clique of size at least `s` not contained in `C` extends to a maximal
//! clique `M ≠ C` with `|C ∩ M|` at least as large, so checking maximal
//! witnesses suffices.

pub mod cliques;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

pub use cliques::{
    good_cliques, good_cliques_with_threshold, maximal_cliques, overlap_threshold, CliqueSet,
    MAX_VERTICES,
};

use crate::error::{ensure, Result};
use crate::graph_model::graph::bitset_of;
use crate::graph_model::Graph;

/// Search-node budget used by [`recover`].
pub const DEFAULT_BUDGET: u64 = 50_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recovery {
    /// Sorted; empty when the rule abstains.
    pub recovered: Vec<usize>,
    pub good_clique_count: usize,
    /// The enumeration hit its budget, so the answer is low confidence.
    pub truncated: bool,
}

/// If `v` lies in exactly one good clique of size at least `s`, returns it;
/// otherwise returns the empty set.
pub fn recover(graph: &Graph, v: usize, s: usize) -> Result<Recovery> {
    recover_with_budget(graph, v, s, DEFAULT_BUDGET)
}

pub fn recover_with_budget(graph: &Graph, v: usize, s: usize, budget: u64) -> Result<Recovery> {
    ensure!(
        v < graph.n(),
        "revealed vertex {v} out of range for n = {}",
        graph.n()
    );
    let all = maximal_cliques(graph, s, budget)?;
    let good = good_cliques(&all, s, graph.n());
    Ok(select_unique(&good, v))
}

fn select_unique(good: &CliqueSet, v: usize) -> Recovery {
    let mut containing = good.cliques.iter().filter(|c| c.binary_search(&v).is_ok());
    let recovered = match (containing.next(), containing.next()) {
        (Some(c), None) => c.clone(),
        _ => Vec::new(),
    };
    Recovery {
        recovered,
        good_clique_count: good.len(),
        truncated: good.truncated,
    }
}

/// `⌈7s/8⌉`.
pub fn refine_threshold(s: usize) -> usize {
    (7 * s).div_ceil(8)
}

/// Vertices with at least `⌈7s/8⌉` neighbours in `candidate`, sorted.
pub fn degree_refine(graph: &Graph, candidate: &[usize], s: usize) -> Vec<usize> {
    let set = bitset_of(graph.n(), candidate);
    let need = refine_threshold(s);
    (0..graph.n())
        .filter(|&u| graph.neighbors_within(u, &set) >= need)
        .collect()
}

/// Refines each candidate, keeps the refined sets that are cliques of size at
/// least `s`, drops every pair overlapping in more than `⌊3·log₂ n⌋`
/// vertices, and returns the unique survivor containing `v` (else empty).
pub fn refine_and_select(
    graph: &Graph,
    candidates: &[Vec<usize>],
    v: usize,
    s: usize,
) -> Vec<usize> {
    let mut refined: Vec<Vec<usize>> = candidates
        .iter()
        .map(|c| degree_refine(graph, c, s))
        .filter(|c| c.len() >= s && graph.is_clique(c))
        .collect();
    refined.sort_unstable();
    refined.dedup();
    let pool = CliqueSet {
        cliques: refined,
        expansions: 0,
        truncated: false,
    };
    let survivors = good_cliques(&pool, s, graph.n());
    select_unique(&survivors, v).recovered
}

/// `|a ∩ b| / |a ∪ b|`, with `jaccard(∅, ∅) = 1`.
pub fn jaccard(a: &[usize], b: &[usize]) -> f64 {
    let a: BTreeSet<usize> = a.iter().copied().collect();
    let b: BTreeSet<usize> = b.iter().copied().collect();
    let union = a.union(&b).count();
    if union == 0 {
        return 1.0;
    }
    a.intersection(&b).count() as f64 / union as f64
}

/// `Σ_{l0 <= l < s} C(s,l) C(n-s,s-l) 2^{-l(s-l)}`, summed in log space.
pub fn union_bound_probability(n: usize, s: usize, l0: usize) -> Result<f64> {
    ensure!(s <= n, "s = {s} exceeds n = {n}");
    ensure!(l0 >= 1, "l0 must be at least 1");
    let logs: Vec<f64> = (l0..s)
        .filter(|&l| s - l <= n - s)
        .map(|l| {
            ln_binomial(s as u64, l as u64) + ln_binomial((n - s) as u64, (s - l) as u64)
                - (l * (s - l)) as f64 * std::f64::consts::LN_2
        })
        .collect();
    let Some(max) = logs.iter().copied().reduce(f64::max) else {
        return Ok(0.0);
    };
    Ok(max.exp() * logs.iter().map(|&x| (x - max).exp()).sum::<f64>())
}
