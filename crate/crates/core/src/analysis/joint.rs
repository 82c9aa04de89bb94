//! Exact laws of the whole graph under the null and the coupled planted
//! distribution at toy sizes, by enumerating every latent configuration.
//!
//! Graphs on `n` vertices are bit patterns over the `n(n-1)/2` pairs in
//! lexicographic order. The planted side draws `s ~ HG(n, m, m²)` without
//! discarding `s = 0`; with no clique the construction places every vertex off
//! the planted line exactly as the null does, which keeps the chain rule an
//! identity over the latent variables.

use std::collections::HashMap;

use serde::Serialize;

use super::chain::design_for;
use super::column_law::column_law;
use super::local_bounds::column_kl;
use crate::error::{ensure, Error, Result};
use crate::graph_model::hypergeometric::{binomial, pmf_exact};
use crate::graph_model::{assignment_weights, CouplingState, Design, DesignKind, Point};
use crate::perturbed_bernoulli::kl_tables;

pub const MAX_N: usize = 6;
pub const MAX_M: u32 = 5;
/// Cap on enumerated leaves per law.
pub const MAX_LEAVES: f64 = 2e8;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct JointKlReport {
    /// `KL(P0(A) || P1(A))`.
    pub kl: f64,
    /// Exactly enumerated chained column divergences.
    pub chain_rhs: f64,
    pub slack: f64,
    pub p0_mass: f64,
    pub p1_mass: f64,
}

struct Pairs {
    n: usize,
    index: Vec<Vec<usize>>,
    count: usize,
}

impl Pairs {
    fn new(n: usize) -> Self {
        let mut index = vec![vec![usize::MAX; n]; n];
        let mut count = 0;
        for i in 0..n {
            for j in i + 1..n {
                index[i][j] = count;
                index[j][i] = count;
                count += 1;
            }
        }
        Self { n, index, count }
    }

    fn bit(&self, i: usize, j: usize) -> u32 {
        1 << self.index[i][j]
    }
}

/// Distribution over `(forced ones, Ber(q) pairs)` patterns.
type Patterns = HashMap<(u32, u32), f64>;

fn expand(patterns: &Patterns, pairs: usize, q: f64) -> Vec<f64> {
    let mut table = vec![0.0; 1 << pairs];
    for (&(fixed, free), &w) in patterns {
        let size = free.count_ones() as i32;
        let mut sub = free;
        loop {
            let ones = sub.count_ones() as i32;
            table[(fixed | sub) as usize] += w * q.powi(ones) * (1.0 - q).powi(size - ones);
            if sub == 0 {
                break;
            }
            sub = (sub - 1) & free;
        }
    }
    table
}

fn falling(x: u64, k: u64) -> f64 {
    (0..k).map(|i| (x - i) as f64).product()
}

fn check(n: usize, design: &Design) -> Result<()> {
    let m = design.m();
    ensure!(
        (2..=MAX_N).contains(&n),
        "exact joint law needs 2 <= n <= {MAX_N} (got {n})"
    );
    ensure!(m <= MAX_M, "exact joint law needs m <= {MAX_M} (got {m})");
    ensure!(
        n as u32 <= m * m - m,
        "n = {n} exceeds the m² - m = {} off-line points",
        m * m - m
    );
    Ok(())
}

fn lines_of(design: &Design) -> Vec<(u32, u32)> {
    let slopes = match design.kind() {
        DesignKind::Grid => 1,
        DesignKind::Lines => design.k(),
    };
    (0..slopes)
        .flat_map(|r| (0..design.m()).map(move |h| (r, h)))
        .collect()
}

/// Null law of the graph, indexed by edge pattern.
pub fn null_graph_law(n: usize, design: &Design) -> Result<Vec<f64>> {
    check(n, design)?;
    let universe = design.universe();
    let leaves = falling(universe.len() as u64, n as u64);
    if leaves > MAX_LEAVES {
        return Err(Error::StateSpace(format!("{leaves:.3e} null assignments")));
    }
    let pairs = Pairs::new(n);
    let all = ((1u64 << pairs.count) - 1) as u32;
    let mut counts: HashMap<u32, f64> = HashMap::new();
    let mut used = vec![false; universe.len()];
    let mut points = Vec::with_capacity(n);
    null_dfs(
        design,
        &universe,
        &pairs,
        &mut used,
        &mut points,
        0,
        &mut counts,
    );
    let patterns: Patterns = counts
        .into_iter()
        .map(|(r, c)| ((r, all & !r), c / leaves))
        .collect();
    Ok(expand(&patterns, pairs.count, design.edge_rate()))
}

fn null_dfs(
    design: &Design,
    universe: &[Point],
    pairs: &Pairs,
    used: &mut [bool],
    points: &mut Vec<Point>,
    related: u32,
    counts: &mut HashMap<u32, f64>,
) {
    let i = points.len();
    if i == pairs.n {
        *counts.entry(related).or_default() += 1.0;
        return;
    }
    for (x, &p) in universe.iter().enumerate() {
        if used[x] {
            continue;
        }
        let mut mask = related;
        for (j, &pj) in points.iter().enumerate() {
            if design.related(p, pj) {
                mask |= pairs.bit(i, j);
            }
        }
        used[x] = true;
        points.push(p);
        null_dfs(design, universe, pairs, used, points, mask, counts);
        points.pop();
        used[x] = false;
    }
}

fn combinations(n: usize, s: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, s: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for v in start..n {
            cur.push(v);
            rec(v + 1, n, s, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, n, s, &mut Vec::new(), &mut out);
    out
}

fn arrangements(items: &[Point], s: usize) -> Vec<Vec<Point>> {
    fn rec(
        items: &[Point],
        s: usize,
        used: &mut Vec<bool>,
        cur: &mut Vec<Point>,
        out: &mut Vec<Vec<Point>>,
    ) {
        if cur.len() == s {
            out.push(cur.clone());
            return;
        }
        for x in 0..items.len() {
            if !used[x] {
                used[x] = true;
                cur.push(items[x]);
                rec(items, s, used, cur, out);
                cur.pop();
                used[x] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(
        items,
        s,
        &mut vec![false; items.len()],
        &mut Vec::new(),
        &mut out,
    );
    out
}

fn planted_leaves(n: usize, design: &Design) -> f64 {
    let m = design.m() as u64;
    let free = m * m - m;
    let lines = lines_of(design).len() as f64;
    (0..=n.min(m as usize))
        .map(|s| {
            let o = (n - s) as u64;
            lines
                * binomial(n as u64, s as u64).unwrap_or(u128::MAX) as f64
                * falling(m, s as u64)
                * 2f64.powi((s * (n - s)) as i32)
                * falling(free, o)
        })
        .sum()
}

/// `P(s)` for `s = 0..=min(n, m)` under `HG(n, m, m²)`.
fn clique_size_law(n: usize, m: u32) -> Result<Vec<f64>> {
    let m = m as u64;
    Ok(pmf_exact(n as u64, m, m * m)?
        .iter()
        .map(|r| *r.numer() as f64 / *r.denom() as f64)
        .collect())
}

struct PlantedWalk<'a> {
    pairs: &'a Pairs,
    clique: &'a [usize],
    others: &'a [usize],
    patterns: Patterns,
}

impl PlantedWalk<'_> {
    fn dfs(
        &mut self,
        state: &CouplingState,
        idx: usize,
        fixed: u32,
        prob: f64,
        points: &mut Vec<Point>,
    ) {
        if idx == self.others.len() {
            let design = state.design();
            let (mut forced, mut free) = (fixed, 0u32);
            for a in 0..self.others.len() {
                for b in a + 1..self.others.len() {
                    let bit = self.pairs.bit(self.others[a], self.others[b]);
                    if design.related(points[a], points[b]) {
                        forced |= bit;
                    } else {
                        free |= bit;
                    }
                }
            }
            *self.patterns.entry((forced, free)).or_default() += prob;
            return;
        }
        let o = self.others[idx];
        let s = self.clique.len();
        let col_prob = 0.5f64.powi(s as i32);
        for col in 0u32..1 << s {
            let column: Vec<bool> = (0..s).map(|j| col >> j & 1 == 1).collect();
            let mut col_mask = 0u32;
            for (j, &v) in self.clique.iter().enumerate() {
                if column[j] {
                    col_mask |= self.pairs.bit(o, v);
                }
            }
            let mut weights = assignment_weights(state, &column);
            let mut total: f64 = weights.iter().sum();
            if total <= 0.0 {
                weights.iter_mut().for_each(|w| *w = 1.0);
                total = weights.len() as f64;
            }
            for (&p, &w) in state.free_points().iter().zip(&weights) {
                if w <= 0.0 {
                    continue;
                }
                let mut next = state.clone();
                next.assign(p).expect("free point");
                points.push(p);
                self.dfs(
                    &next,
                    idx + 1,
                    fixed | col_mask,
                    prob * col_prob * w / total,
                    points,
                );
                points.pop();
            }
        }
    }
}

/// Law of the graph under the coupled planted distribution.
pub fn planted_graph_law(n: usize, design: &Design) -> Result<Vec<f64>> {
    check(n, design)?;
    let leaves = planted_leaves(n, design);
    if leaves > MAX_LEAVES {
        return Err(Error::StateSpace(format!(
            "{leaves:.3e} planted latent configurations"
        )));
    }
    let m = design.m();
    let pairs = Pairs::new(n);
    let lines = lines_of(design);
    let size_law = clique_size_law(n, m)?;
    let mut patterns: Patterns = HashMap::new();
    for &(r, h) in &lines {
        let line = design.line_points(r, h);
        for (s, &ps) in size_law.iter().enumerate() {
            if ps == 0.0 {
                continue;
            }
            let subsets = combinations(n, s);
            let placements = arrangements(&line, s);
            let base = ps / (lines.len() * subsets.len() * placements.len()) as f64;
            for clique in &subsets {
                let others: Vec<usize> = (0..n).filter(|v| !clique.contains(v)).collect();
                let mut inside = 0u32;
                for (x, &a) in clique.iter().enumerate() {
                    for &b in &clique[x + 1..] {
                        inside |= pairs.bit(a, b);
                    }
                }
                for cpts in &placements {
                    let state = CouplingState::new(*design, (r, h), cpts.clone())?;
                    let mut walk = PlantedWalk {
                        pairs: &pairs,
                        clique,
                        others: &others,
                        patterns: HashMap::new(),
                    };
                    walk.dfs(&state, 0, inside, base, &mut Vec::new());
                    for (key, w) in walk.patterns {
                        *patterns.entry(key).or_default() += w;
                    }
                }
            }
        }
    }
    Ok(expand(&patterns, pairs.count, design.edge_rate()))
}

/// `E[Σ_{i>s} KL(null column_i || Ber(1/2)^s)]` over the null latent
/// variables, by exhaustive enumeration of the prefixes.
pub fn chain_rhs_exact(n: usize, design: &Design) -> Result<f64> {
    check(n, design)?;
    let lines = lines_of(design);
    let size_law = clique_size_law(n, design.m())?;
    let mut total = 0.0;
    for &(r, h) in &lines {
        let line = design.line_points(r, h);
        for (s, &ps) in size_law.iter().enumerate() {
            if ps == 0.0 || s == 0 || s == n {
                continue;
            }
            let placements = arrangements(&line, s);
            let base = ps / (lines.len() * placements.len()) as f64;
            for cpts in placements {
                let state = CouplingState::new(*design, (r, h), cpts)?;
                total += base * prefix_sum(&state, n - s)?;
            }
        }
    }
    Ok(total)
}

fn prefix_sum(state: &CouplingState, remaining: usize) -> Result<f64> {
    let mut acc = column_kl(&column_law(state)?)?;
    if remaining > 1 {
        let free = state.free_points();
        let share = 1.0 / free.len() as f64;
        for &p in free {
            let mut next = state.clone();
            next.assign(p)?;
            acc += share * prefix_sum(&next, remaining - 1)?;
        }
    }
    Ok(acc)
}

/// KL between two graph laws given as tables.
pub fn graph_kl(p: &[f64], q: &[f64]) -> f64 {
    kl_tables(p, q)
}

pub fn joint_kl_report(n: usize, kind: DesignKind, m: u32, k: u32) -> Result<JointKlReport> {
    let design = design_for(kind, m, k)?;
    let p0 = null_graph_law(n, &design)?;
    let p1 = planted_graph_law(n, &design)?;
    let kl = graph_kl(&p0, &p1);
    let chain_rhs = chain_rhs_exact(n, &design)?;
    Ok(JointKlReport {
        kl,
        chain_rhs,
        slack: chain_rhs - kl,
        p0_mass: p0.iter().sum(),
        p1_mass: p1.iter().sum(),
    })
}

/// `KL(P0(A) || P1(A))` for the whole graph at toy sizes.
pub fn exact_joint_kl(n: usize, kind: DesignKind, m: u32, k: u32) -> Result<f64> {
    let design = design_for(kind, m, k)?;
    Ok(graph_kl(
        &null_graph_law(n, &design)?,
        &planted_graph_law(n, &design)?,
    ))
}
