use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};

/// Simple undirected graph stored as one adjacency bitset per vertex.
///
/// Symmetric with an empty diagonal by construction: the only mutator writes
/// both `(i, j)` and `(j, i)` and rejects loops.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    rows: Vec<FixedBitSet>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self {
            rows: vec![FixedBitSet::with_capacity(n); n],
        }
    }

    pub fn complete(n: usize) -> Self {
        let mut g = Self::new(n);
        for i in 0..n {
            for j in i + 1..n {
                g.set_edge(i, j, true);
            }
        }
        g
    }

    /// Builds a graph from an edge list, rejecting loops and out-of-range ends.
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut g = Self::new(n);
        for (i, j) in edges {
            if i >= n || j >= n || i == j {
                return Err(Error::Format(format!(
                    "invalid edge [{i}, {j}] for n = {n}"
                )));
            }
            g.set_edge(i, j, true);
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    /// # Panics
    /// On `i == j` or an out-of-range vertex.
    pub fn set_edge(&mut self, i: usize, j: usize, present: bool) {
        assert!(i != j, "self-loop at {i}");
        self.rows[i].set(j, present);
        self.rows[j].set(i, present);
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.rows[i].contains(j)
    }

    pub fn neighbors(&self, i: usize) -> &FixedBitSet {
        &self.rows[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.rows[i].count_ones(..)
    }

    pub fn edge_count(&self) -> usize {
        self.rows.iter().map(|r| r.count_ones(..)).sum::<usize>() / 2
    }

    /// Edges `(i, j)` with `i < j`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, row)| row.ones().filter(move |&j| j > i).map(move |j| (i, j)))
    }

    pub fn is_clique(&self, vertices: &[usize]) -> bool {
        vertices.iter().enumerate().all(|(x, &i)| {
            vertices[x + 1..]
                .iter()
                .all(|&j| i != j && self.has_edge(i, j))
        })
    }

    /// Neighbours of `u` inside `set`.
    pub fn neighbors_within(&self, u: usize, set: &FixedBitSet) -> usize {
        self.rows[u].intersection_count(set)
    }

    /// Re-checks the symmetry and zero-diagonal invariants.
    pub fn is_well_formed(&self) -> bool {
        let n = self.n();
        self.rows.iter().enumerate().all(|(i, row)| {
            row.len() == n && !row.contains(i) && row.ones().all(|j| self.rows[j].contains(i))
        })
    }
}

pub(crate) fn bitset_of(n: usize, vertices: &[usize]) -> FixedBitSet {
    let mut set = FixedBitSet::with_capacity(n);
    for &v in vertices {
        set.insert(v);
    }
    set
}
