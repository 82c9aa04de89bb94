use std::collections::BTreeSet;

use num_rational::Ratio;
use pcsemi_core::analysis::column_law::to_f64;
use pcsemi_core::analysis::{column_law, random_prefix};
use pcsemi_core::graph_model::hypergeometric::{mean, pmf_exact};
use pcsemi_core::graph_model::{
    assignment_weights, conditional_assignment, gen_classical, gen_coupled, gen_coupled_grid,
    gen_null_grid, gen_null_lines, gen_semirandom, hypergeometric_sample, AdversarySpec, Design,
    Graph, GridConfig, InstanceFile, Point,
};
use pcsemi_core::recovery::maximal_cliques;
use pcsemi_core::rng::stream;
use proptest::prelude::*;
use rand::Rng;
use rayon::prelude::*;

fn same_graph(a: &Graph, b: &Graph) -> bool {
    a.n() == b.n() && a.edges().eq(b.edges())
}

/// Brute-force relation: the pair is aligned by some slope `r < k`.
fn lines_related(m: u32, k: u32, p: Point, q: Point) -> bool {
    let m = m as i64;
    let (da, db) = (p.a as i64 - q.a as i64, p.b as i64 - q.b as i64);
    (0..k as i64).any(|r| (da - r * db).rem_euclid(m) == 0)
}

/// Vertex classes of the design cliques actually occupied by `cfg`.
fn occupied_classes(cfg: &GridConfig) -> Vec<BTreeSet<usize>> {
    cfg.design
        .blocks()
        .into_iter()
        .map(|block| {
            (0..cfg.points.len())
                .filter(|&v| cfg.design.contains(block, cfg.points[v]))
                .collect()
        })
        .filter(|c: &BTreeSet<usize>| !c.is_empty())
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn generators_are_well_formed_and_deterministic(seed: u64, n in 12usize..40) {
        let s = n / 3;
        let a = gen_classical(n, s, seed).unwrap();
        prop_assert!(a.is_valid());
        prop_assert!(same_graph(&a.graph, &gen_classical(n, s, seed).unwrap().graph));

        for adv in [AdversarySpec::Empty, AdversarySpec::Random(0.3), AdversarySpec::ExtraCliques(1)] {
            let a = gen_semirandom(n, s, &adv, seed).unwrap();
            let b = gen_semirandom(n, s, &adv, seed).unwrap();
            prop_assert!(a.is_valid());
            prop_assert!(same_graph(&a.graph, &b.graph) && a.clique == b.clique && a.revealed == b.revealed);
        }

        let (g, cfg) = gen_null_grid(n, 7, seed).unwrap();
        let (g2, cfg2) = gen_null_grid(n, 7, seed).unwrap();
        prop_assert!(g.is_well_formed() && cfg.is_consistent_with(&g));
        prop_assert!(same_graph(&g, &g2) && cfg == cfg2);

        let (g, cfg) = gen_null_lines(n, 11, 3, seed).unwrap();
        let (g2, cfg2) = gen_null_lines(n, 11, 3, seed).unwrap();
        prop_assert!(g.is_well_formed() && cfg.is_consistent_with(&g));
        prop_assert!(same_graph(&g, &g2) && cfg == cfg2);

        for inst in [gen_coupled(n, 11, 3, seed).unwrap(), gen_coupled_grid(n, 7, seed).unwrap()] {
            prop_assert!(inst.is_valid());
            let again = inst.model.clone();
            let twin = match again {
                pcsemi_core::graph_model::Model::Coupled { design: pcsemi_core::graph_model::DesignKind::Grid, .. } =>
                    gen_coupled_grid(n, 7, seed).unwrap(),
                _ => gen_coupled(n, 11, 3, seed).unwrap(),
            };
            prop_assert!(same_graph(&inst.graph, &twin.graph));
            prop_assert_eq!(&inst.grid, &twin.grid);
            prop_assert!(inst.grid.as_ref().unwrap().is_consistent_with(&inst.graph));
        }
    }

    #[test]
    fn null_grid_clique_structure(seed: u64, n in 5usize..=42) {
        let m = 7;
        let (g, cfg) = gen_null_grid(n, m, seed).unwrap();
        let classes = occupied_classes(&cfg);
        prop_assert!(classes.len() <= 2 * m as usize);
        for v in 0..n {
            prop_assert_eq!(classes.iter().filter(|c| c.contains(&v)).count(), 2);
        }
        for (x, c) in classes.iter().enumerate() {
            prop_assert!(g.is_clique(&c.iter().copied().collect::<Vec<_>>()));
            for d in &classes[x + 1..] {
                prop_assert!(c.intersection(d).count() <= 1);
            }
        }
        // Rows and columns by coordinates, independently of the block API.
        for i in 0..n {
            for j in i + 1..n {
                let (p, q) = (cfg.points[i], cfg.points[j]);
                prop_assert_eq!(cfg.design.related(p, q), p.a == q.a || p.b == q.b);
            }
        }
    }

    #[test]
    fn null_lines_clique_structure(seed: u64, n in 5usize..=55, k in 2u32..=4) {
        let m = 11;
        let (g, cfg) = gen_null_lines(n, m, k, seed).unwrap();
        for i in 0..n {
            for j in i + 1..n {
                prop_assert_eq!(cfg.design.related(cfg.points[i], cfg.points[j]), lines_related(m, k, cfg.points[i], cfg.points[j]));
            }
        }
        let classes = occupied_classes(&cfg);
        for v in 0..n {
            let mine: Vec<&BTreeSet<usize>> = classes.iter().filter(|c| c.contains(&v)).collect();
            prop_assert_eq!(mine.len(), k as usize);
            for (x, c) in mine.iter().enumerate() {
                prop_assert!(g.is_clique(&c.iter().copied().collect::<Vec<_>>()));
                for d in &mine[x + 1..] {
                    prop_assert_eq!(c.intersection(d).copied().collect::<Vec<_>>(), vec![v]);
                }
            }
            // Vertex v's class of slope r is {j : a_v - a_j = r (b_v - b_j)}.
            for r in 0..k as i64 {
                let want: BTreeSet<usize> = (0..n)
                    .filter(|&j| {
                        let (p, q) = (cfg.points[v], cfg.points[j]);
                        (p.a as i64 - q.a as i64 - r * (p.b as i64 - q.b as i64)).rem_euclid(m as i64) == 0
                    })
                    .collect();
                prop_assert!(mine.contains(&&want));
            }
        }
        for (x, c) in classes.iter().enumerate() {
            for d in &classes[x + 1..] {
                prop_assert!(c.intersection(d).count() <= 1);
            }
        }
    }

    #[test]
    fn coupled_structure(seed: u64, n in 10usize..=55) {
        let inst = gen_coupled(n, 11, 3, seed).unwrap();
        let cfg = inst.grid.as_ref().unwrap();
        let (r, h) = cfg.planted_line.unwrap();
        prop_assert!(r < 3 && h < 11);
        prop_assert!(inst.graph.is_clique(&inst.clique));
        for v in 0..n {
            let p = cfg.points[v];
            let on_line = (p.a as i64 - p.b as i64 * r as i64).rem_euclid(11) == h as i64;
            prop_assert_eq!(on_line, inst.clique.contains(&v));
        }
        let distinct: BTreeSet<Point> = cfg.points.iter().copied().collect();
        prop_assert_eq!(distinct.len(), n);
    }

    #[test]
    fn assignment_weights_positive(seed: u64, k in 2u32..=3, s in 1usize..=3, frac in 0.0f64..1.0) {
        // Local-bound regime 2k(s+4) <= m, so some free point relates to no clique point.
        let m = 29;
        let design = Design::lines(m, k).unwrap();
        let mut rng = stream(seed, 0);
        let cap = (m * (m - 1) / 2) as usize - s;
        let state = random_prefix(design, s, (frac * cap as f64) as usize, &mut rng).unwrap();
        let column: Vec<bool> = (0..s).map(|_| rng.random_bool(0.5)).collect();
        let total: f64 = assignment_weights(&state, &column).iter().sum();
        prop_assert!(total > 0.0);
        let p = conditional_assignment(&state, &column, &mut rng).unwrap();
        prop_assert!(state.free_points().contains(&p));
    }
}

/// Averaging the conditional draw over the null column law returns the
/// uniform law on free points: Bayes consistency of the weights.
#[test]
fn conditional_assignment_averages_to_uniform() {
    let mut rng = stream(4, 0);
    for design in [
        Design::grid(7).unwrap(),
        Design::lines(7, 2).unwrap(),
        Design::lines(11, 3).unwrap(),
    ] {
        for (s, t) in [(2, 0), (3, 0), (3, 9), (4, 15)] {
            let state = random_prefix(design, s, t, &mut rng).unwrap();
            let law = column_law(&state).unwrap();
            let free = state.free_points().len();
            let mut marginal = vec![0.0; free];
            for x in 0..1u32 << s {
                let column: Vec<bool> = (0..s).map(|j| x >> j & 1 == 1).collect();
                let px = law.spec.pmf(&column).unwrap();
                if px == 0.0 {
                    continue;
                }
                let w = assignment_weights(&state, &column);
                let total: f64 = w.iter().sum();
                for (acc, wi) in marginal.iter_mut().zip(&w) {
                    *acc += px * wi / total;
                }
            }
            for p in marginal {
                assert!((p - 1.0 / free as f64).abs() < 1e-12);
            }
            // Perturbation rate of coordinate j equals S({j}); 1/m for a fresh grid prefix.
            for j in 0..s {
                let hit: f64 = state
                    .free_points()
                    .iter()
                    .filter(|&&p| state.membership(p).contains(&j))
                    .count() as f64
                    / free as f64;
                assert!((hit - to_f64(&law.singles[j])).abs() < 1e-12);
                if t == 0 && design.kind() == pcsemi_core::graph_model::DesignKind::Grid {
                    assert!((hit - 1.0 / design.m() as f64).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn all_zero_column_weights() {
    let design = Design::lines(11, 2).unwrap();
    let state = random_prefix(design, 3, 0, &mut stream(8, 0)).unwrap();
    let w = assignment_weights(&state, &[false; 3]);
    for (&p, &wi) in state.free_points().iter().zip(&w) {
        assert_eq!(
            wi,
            if state.membership(p).is_empty() {
                1.0
            } else {
                0.0
            }
        );
    }
}

fn three_sigma(successes: f64, trials: f64, p: f64) -> bool {
    (successes / trials - p).abs() <= 3.0 * (p * (1.0 - p) / trials).sqrt()
}

#[test]
fn coupled_cross_edges_are_fair_coins() {
    let (hits, total) = (0..10_000u64)
        .into_par_iter()
        .map(|seed| {
            let inst = gen_coupled(30, 11, 3, seed).unwrap();
            let mut hits = 0usize;
            let mut total = 0usize;
            for &u in &inst.clique {
                for v in (0..inst.n()).filter(|v| inst.clique.binary_search(v).is_err()) {
                    hits += inst.graph.has_edge(u, v) as usize;
                    total += 1;
                }
            }
            (hits, total)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    assert!(
        three_sigma(hits as f64, total as f64, 0.5),
        "{hits}/{total}"
    );
}

#[test]
fn coupled_clique_size_is_zero_truncated_hypergeometric() {
    let (n, m) = (40u64, 11u64);
    let pmf = pmf_exact(n, m, m * m).unwrap();
    let p0 = pmf[0];
    let cond: Vec<f64> = pmf
        .iter()
        .map(|p| (*p / (Ratio::from_integer(1) - p0)).to_f64())
        .collect();
    let want_mean: f64 = cond
        .iter()
        .enumerate()
        .skip(1)
        .map(|(s, p)| s as f64 * p)
        .sum();
    let want_var: f64 = cond
        .iter()
        .enumerate()
        .skip(1)
        .map(|(s, p)| (s as f64 - want_mean).powi(2) * p)
        .sum();
    let trials = 4000;
    let total: usize = (0..trials)
        .into_par_iter()
        .map(|seed| gen_coupled(n as usize, m as u32, 2, seed).unwrap().s())
        .sum();
    let got = total as f64 / trials as f64;
    assert!(
        (got - want_mean).abs() <= 3.0 * (want_var / trials as f64).sqrt(),
        "{got} vs {want_mean}"
    );
    // Untruncated mean is n/m.
    assert!((mean(n, m, m * m) - n as f64 / m as f64).abs() < 1e-12);
}

trait ToF64 {
    fn to_f64(&self) -> f64;
}

impl ToF64 for Ratio<i128> {
    fn to_f64(&self) -> f64 {
        *self.numer() as f64 / *self.denom() as f64
    }
}

#[test]
fn hypergeometric_sampler() {
    let mut rng = stream(1, 0);
    assert_eq!(hypergeometric_sample(7, 9, 9, &mut rng).unwrap(), 7);
    assert_eq!(hypergeometric_sample(0, 3, 9, &mut rng).unwrap(), 0);
    assert!(hypergeometric_sample(10, 3, 9, &mut rng).is_err());
    let draws = 100_000;
    let sum: u64 = (0..draws)
        .map(|_| hypergeometric_sample(5, 3, 9, &mut rng).unwrap())
        .sum();
    let var = 5.0 * (3.0 / 9.0) * (6.0 / 9.0) * (4.0 / 8.0);
    assert!((sum as f64 / draws as f64 - 5.0 / 3.0).abs() <= 3.0 * (var / draws as f64).sqrt());
}

/// Exact expected degree in either null design: a pair of distinct uniform
/// points is related with probability `k/(m+1)` (grid: `2/(m+1)`), otherwise
/// adjacent with probability `q`.
#[test]
fn null_expected_degree() {
    for (grid, m, k, n) in [
        (true, 9u32, 2u32, 40usize),
        (false, 11, 3, 40),
        (false, 13, 2, 60),
    ] {
        let m_f = m as f64;
        let (p_rel, q) = if grid {
            (2.0 / (m_f + 1.0), 0.5 - 1.0 / (2.0 * m_f - 2.0))
        } else {
            let k_f = k as f64;
            (
                k_f / (m_f + 1.0),
                0.5 - (k_f - 1.0) / (2.0 * (m_f - k_f + 1.0)),
            )
        };
        let want = (n - 1) as f64 * (p_rel + (1.0 - p_rel) * q);
        let degrees: Vec<f64> = (0..2000u64)
            .into_par_iter()
            .map(|seed| {
                let (g, _) = if grid {
                    gen_null_grid(n, m, seed).unwrap()
                } else {
                    gen_null_lines(n, m, k, seed).unwrap()
                };
                g.degree(0) as f64
            })
            .collect();
        let est = pcsemi_core::analysis::Estimate::from_samples(&degrees);
        assert!(
            (est.mean - want).abs() <= 3.0 * est.std_err,
            "{} vs {want}",
            est.mean
        );
        // Both designs calibrate to the same value.
        assert!((want - (n - 1) as f64 * (m_f + 2.0) / (2.0 * (m_f + 1.0))).abs() < 1e-9);
    }
}

#[test]
fn semirandom_cross_rate_and_extra_cliques() {
    let (hits, total) = (0..2000u64)
        .into_par_iter()
        .map(|seed| {
            let inst = gen_semirandom(40, 8, &AdversarySpec::Empty, seed).unwrap();
            let outside = 40 - 8;
            let hits: usize = inst.clique.iter().map(|&u| inst.graph.degree(u) - 7).sum();
            (hits, 8 * outside)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    assert!(three_sigma(hits as f64, total as f64, 0.5));

    let inst = gen_semirandom(60, 15, &"extra_cliques:2".parse().unwrap(), 42).unwrap();
    let found = maximal_cliques(&inst.graph, 15, 10_000_000).unwrap();
    assert!(!found.truncated);
    let big: Vec<&Vec<usize>> = found.cliques.iter().filter(|c| c.len() >= 15).collect();
    assert!(big.iter().any(|c| c.as_slice() == inst.clique.as_slice()));
    let disjoint_from_s: Vec<&&Vec<usize>> = big
        .iter()
        .filter(|c| c.iter().all(|v| inst.clique.binary_search(v).is_err()))
        .collect();
    assert!(disjoint_from_s.len() >= 2);
    assert!(disjoint_from_s.iter().any(|a| disjoint_from_s
        .iter()
        .any(|b| a.iter().all(|v| !b.contains(v)))));
}

#[test]
fn instance_file_roundtrip() {
    let inst = gen_coupled(30, 11, 2, 3).unwrap();
    let file = InstanceFile::from_planted(&inst);
    let text = file.to_json();
    let back = InstanceFile::from_json(&text).unwrap();
    assert_eq!(back.to_json(), text);
    let planted = back.to_planted().unwrap();
    assert!(same_graph(&planted.graph, &inst.graph));
    assert_eq!(planted.clique, inst.clique);
    assert_eq!(planted.grid, inst.grid);
    assert!(file.edges.windows(2).all(|w| w[0] < w[1]));
    assert!(file.edges.iter().all(|e| e[0] < e[1]));
}

#[test]
fn rejects_bad_parameters() {
    assert!(gen_null_lines(10, 12, 2, 0).is_err());
    assert!(gen_null_lines(60, 11, 2, 0).is_err());
    assert!(gen_null_grid(43, 7, 0).is_err());
    assert!(gen_coupled(10, 9, 2, 0).is_err());
    assert!(gen_semirandom(10, 11, &AdversarySpec::Empty, 0).is_err());
}
