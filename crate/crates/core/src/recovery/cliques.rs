use fixedbitset::FixedBitSet;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Result};
use crate::graph_model::Graph;

/// Largest graph accepted by [`maximal_cliques`].
pub const MAX_VERTICES: usize = 512;

/// Cliques found by an enumeration, each sorted, listed in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueSet {
    pub cliques: Vec<Vec<usize>>,
    /// Search nodes expanded.
    pub expansions: u64,
    /// The budget ran out before the search finished.
    pub truncated: bool,
}

impl CliqueSet {
    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }
}

struct Search<'a> {
    graph: &'a Graph,
    min_size: usize,
    budget: u64,
    expansions: u64,
    truncated: bool,
    found: Vec<Vec<usize>>,
}

impl Search<'_> {
    fn expand(&mut self, r: &mut Vec<usize>, mut p: FixedBitSet, mut x: FixedBitSet) {
        if self.expansions >= self.budget {
            self.truncated = true;
            return;
        }
        self.expansions += 1;
        let p_len = p.count_ones(..);
        if p_len == 0 && x.is_clear() {
            if r.len() >= self.min_size {
                let mut c = r.clone();
                c.sort_unstable();
                self.found.push(c);
            }
            return;
        }
        if r.len() + p_len < self.min_size {
            return;
        }
        let pivot = p
            .ones()
            .chain(x.ones())
            .max_by_key(|&u| {
                (
                    self.graph.neighbors(u).intersection_count(&p),
                    std::cmp::Reverse(u),
                )
            })
            .expect("P ∪ X is non-empty");
        let branch: Vec<usize> = p.difference(self.graph.neighbors(pivot)).collect();
        for v in branch {
            let nv = self.graph.neighbors(v);
            let mut p_next = p.clone();
            p_next.intersect_with(nv);
            let mut x_next = x.clone();
            x_next.intersect_with(nv);
            r.push(v);
            self.expand(r, p_next, x_next);
            r.pop();
            if self.truncated {
                return;
            }
            p.set(v, false);
            x.insert(v);
        }
    }
}

/// All maximal cliques with at least `min_size` vertices, by Bron–Kerbosch
/// with pivoting. Branches that cannot reach `min_size` are cut. At most
/// `budget` search nodes are expanded; if that is not enough the cliques found
/// so far are returned with `truncated` set.
pub fn maximal_cliques(graph: &Graph, min_size: usize, budget: u64) -> Result<CliqueSet> {
    let n = graph.n();
    ensure!(
        n <= MAX_VERTICES,
        "graph has {n} vertices, enumeration supports at most {MAX_VERTICES}"
    );
    ensure!(budget > 0, "enumeration budget must be positive");
    let mut search = Search {
        graph,
        min_size,
        budget,
        expansions: 0,
        truncated: false,
        found: Vec::new(),
    };
    let mut all = FixedBitSet::with_capacity(n);
    all.insert_range(..);
    search.expand(&mut Vec::new(), all, FixedBitSet::with_capacity(n));
    let mut cliques = search.found;
    cliques.sort_unstable();
    Ok(CliqueSet {
        cliques,
        expansions: search.expansions,
        truncated: search.truncated,
    })
}

/// `⌊3·log₂ n⌋`: the largest overlap a good clique may have with another.
pub fn overlap_threshold(n: usize) -> usize {
    if n <= 1 {
        0
    } else if n.is_power_of_two() {
        3 * n.trailing_zeros() as usize
    } else {
        (3.0 * (n as f64).log2()).floor() as usize
    }
}

pub(crate) fn intersection_size(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Cliques of size at least `s` that meet every other clique of size at least
/// `s` in the input in at most `⌊3·log₂ n⌋` vertices.
pub fn good_cliques(cliques: &CliqueSet, s: usize, n: usize) -> CliqueSet {
    good_cliques_with_threshold(cliques, s, overlap_threshold(n))
}

/// [`good_cliques`] with an explicit overlap threshold.
pub fn good_cliques_with_threshold(cliques: &CliqueSet, s: usize, threshold: usize) -> CliqueSet {
    let mut large: Vec<&Vec<usize>> = cliques.cliques.iter().filter(|c| c.len() >= s).collect();
    large.sort_unstable();
    large.dedup();
    let good = large
        .iter()
        .enumerate()
        .filter(|&(x, c)| {
            large
                .iter()
                .enumerate()
                .all(|(y, other)| x == y || intersection_size(c, other) <= threshold)
        })
        .map(|(_, c)| (*c).clone())
        .collect();
    CliqueSet {
        cliques: good,
        expansions: cliques.expansions,
        truncated: cliques.truncated,
    }
}
