//! Pairwise-outcome matrices, bipartite maximum matching, and the team
//! defense guarantee.
//!
//! With a maximum matching of size m*, the defending team blocks at least
//! m* attackers, so at most `N_A - m*` attackers can reach the target when
//! every matched defender plays its pairwise winning strategy.

use std::collections::VecDeque;

use crate::error::{Error, Result};

/// How a pairwise outcome was established; the simulation replays the
/// matching with the strategy kind the outcome came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    PathDefense,
    Oracle,
}

/// N_D x N_A table: entry (i, j) is true when defender i beats attacker j.
#[derive(Debug, Clone)]
pub struct OutcomeMatrix {
    pub n_defenders: usize,
    pub n_attackers: usize,
    wins: Vec<bool>,
    provenance: Vec<Provenance>,
    pub scenario_hash: u64,
}

impl OutcomeMatrix {
    pub fn new(n_defenders: usize, n_attackers: usize, scenario_hash: u64) -> Self {
        OutcomeMatrix {
            n_defenders,
            n_attackers,
            wins: vec![false; n_defenders * n_attackers],
            provenance: vec![Provenance::Oracle; n_defenders * n_attackers],
            scenario_hash,
        }
    }

    pub fn set(&mut self, defender: usize, attacker: usize, wins: bool, provenance: Provenance) {
        let i = defender * self.n_attackers + attacker;
        self.wins[i] = wins;
        self.provenance[i] = provenance;
    }

    pub fn wins(&self, defender: usize, attacker: usize) -> bool {
        self.wins[defender * self.n_attackers + attacker]
    }

    pub fn provenance(&self, defender: usize, attacker: usize) -> Provenance {
        self.provenance[defender * self.n_attackers + attacker]
    }
}

/// Adjacency lists, defender -> beatable attackers.
#[derive(Debug, Clone)]
pub struct BipartiteGraph {
    pub adj: Vec<Vec<usize>>,
    pub n_attackers: usize,
}

pub fn build_graph(matrix: &OutcomeMatrix) -> BipartiteGraph {
    let adj = (0..matrix.n_defenders)
        .map(|i| {
            (0..matrix.n_attackers)
                .filter(|&j| matrix.wins(i, j))
                .collect()
        })
        .collect();
    BipartiteGraph {
        adj,
        n_attackers: matrix.n_attackers,
    }
}

/// Vertex-disjoint defender-attacker pairs of maximum cardinality.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Matching {
    /// (defender, attacker) pairs sorted by defender index.
    pub pairs: Vec<(usize, usize)>,
    pub size: usize,
}

/// Hopcroft-Karp with deterministic tie-breaking: BFS layers and DFS
/// augmentation both scan vertices in index order, so equal inputs always
/// produce the same matching. Terminates when no augmenting path exists,
/// which certifies maximality.
pub fn max_matching(graph: &BipartiteGraph) -> Matching {
    let n_d = graph.adj.len();
    let n_a = graph.n_attackers;
    const FREE: usize = usize::MAX;
    let mut match_d = vec![FREE; n_d];
    let mut match_a = vec![FREE; n_a];

    loop {
        // BFS from unmatched defenders to build the layer structure.
        let mut dist = vec![usize::MAX; n_d];
        let mut queue = VecDeque::new();
        for d in 0..n_d {
            if match_d[d] == FREE {
                dist[d] = 0;
                queue.push_back(d);
            }
        }
        let mut found = false;
        while let Some(d) = queue.pop_front() {
            for &a in &graph.adj[d] {
                match match_a[a] {
                    FREE => found = true,
                    d2 => {
                        if dist[d2] == usize::MAX {
                            dist[d2] = dist[d] + 1;
                            queue.push_back(d2);
                        }
                    }
                }
            }
        }
        if !found {
            break;
        }
        // Layered DFS augmentation.
        fn augment(
            d: usize,
            graph: &BipartiteGraph,
            dist: &mut [usize],
            match_d: &mut [usize],
            match_a: &mut [usize],
        ) -> bool {
            for &a in &graph.adj[d] {
                let d2 = match_a[a];
                let ok = if d2 == usize::MAX {
                    true
                } else if dist[d2] == dist[d] + 1 {
                    augment(d2, graph, dist, match_d, match_a)
                } else {
                    false
                };
                if ok {
                    match_d[d] = a;
                    match_a[a] = d;
                    return true;
                }
            }
            dist[d] = usize::MAX;
            false
        }
        for d in 0..n_d {
            if match_d[d] == FREE && dist[d] == 0 {
                augment(d, graph, &mut dist, &mut match_d, &mut match_a);
            }
        }
    }

    let pairs: Vec<(usize, usize)> = match_d
        .iter()
        .enumerate()
        .filter(|(_, &a)| a != FREE)
        .map(|(d, &a)| (d, a))
        .collect();
    Matching {
        size: pairs.len(),
        pairs,
    }
}

/// What the matching size promises for the team game.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DefenseGuarantee {
    /// Attackers provably blocked: the matching size m*.
    pub blocked: usize,
    /// Upper bound on attackers that can reach the target: N_A - m*.
    pub bound_reaching: usize,
    /// True when the bound fails to rule out m attackers reaching, i.e. the
    /// defense cannot certify a win for the required count.
    pub attackers_may_win: bool,
}

pub fn defense_guarantee(
    matching: &Matching,
    n_attackers: usize,
    required_reachers: usize,
) -> Result<DefenseGuarantee> {
    if matching.size > n_attackers {
        return Err(Error::BadConfig(format!(
            "matching size {} exceeds attacker count {n_attackers}",
            matching.size
        )));
    }
    let bound = n_attackers - matching.size;
    Ok(DefenseGuarantee {
        blocked: matching.size,
        bound_reaching: bound,
        attackers_may_win: bound >= required_reachers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn matrix_from_bits(n_d: usize, n_a: usize, bits: u32) -> OutcomeMatrix {
        let mut m = OutcomeMatrix::new(n_d, n_a, 0);
        for i in 0..n_d {
            for j in 0..n_a {
                if bits >> (i * n_a + j) & 1 == 1 {
                    m.set(i, j, true, Provenance::Oracle);
                }
            }
        }
        m
    }

    /// Exhaustive maximum matching by trying every attacker subset order.
    fn brute_force_size(graph: &BipartiteGraph) -> usize {
        fn go(graph: &BipartiteGraph, d: usize, used: &mut Vec<bool>) -> usize {
            if d == graph.adj.len() {
                return 0;
            }
            // Either leave defender d unmatched...
            let mut best = go(graph, d + 1, used);
            // ...or match it to any free neighbor.
            for &a in &graph.adj[d] {
                if !used[a] {
                    used[a] = true;
                    best = best.max(1 + go(graph, d + 1, used));
                    used[a] = false;
                }
            }
            best
        }
        let mut used = vec![false; graph.n_attackers];
        go(graph, 0, &mut used)
    }

    #[test]
    fn graph_shapes() {
        let empty = build_graph(&matrix_from_bits(3, 3, 0));
        assert!(empty.adj.iter().all(|a| a.is_empty()));
        assert_eq!(max_matching(&empty).size, 0);

        let full = build_graph(&matrix_from_bits(4, 4, 0xffff));
        assert!(full.adj.iter().all(|a| a.len() == 4));
        assert_eq!(max_matching(&full).size, 4);
    }

    #[test]
    fn matching_is_valid_and_disjoint() {
        let m = matrix_from_bits(3, 3, 0b101_010_011);
        let g = build_graph(&m);
        let matching = max_matching(&g);
        let mut seen_d = vec![false; 3];
        let mut seen_a = vec![false; 3];
        for &(d, a) in &matching.pairs {
            assert!(m.wins(d, a), "pair ({d},{a}) is not an edge");
            assert!(!seen_d[d] && !seen_a[a], "vertex reused");
            seen_d[d] = true;
            seen_a[a] = true;
        }
    }

    #[test]
    fn exhaustive_3x3_matches_brute_force() {
        for bits in 0..512_u32 {
            let g = build_graph(&matrix_from_bits(3, 3, bits));
            assert_eq!(
                max_matching(&g).size,
                brute_force_size(&g),
                "matrix bits {bits:#011b}"
            );
        }
    }

    #[test]
    fn random_8x8_matches_brute_force() {
        // Small deterministic generator; avoids pulling rand into the lib.
        let mut state = 0x12345678_u64;
        let mut next = || {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            state >> 40
        };
        for trial in 0..200 {
            let mut m = OutcomeMatrix::new(8, 8, 0);
            for i in 0..8 {
                for j in 0..8 {
                    if next() % 3 == 0 {
                        m.set(i, j, true, Provenance::PathDefense);
                    }
                }
            }
            let g = build_graph(&m);
            assert_eq!(max_matching(&g).size, brute_force_size(&g), "trial {trial}");
        }
    }

    #[test]
    fn adding_edges_never_shrinks_matching() {
        let base = matrix_from_bits(3, 3, 0b001_010_100);
        let before = max_matching(&build_graph(&base)).size;
        let mut more = base.clone();
        more.set(0, 2, true, Provenance::Oracle);
        let after = max_matching(&build_graph(&more)).size;
        assert!(after >= before);
        assert!(before <= 3);
    }

    #[test]
    fn deterministic_result() {
        let m = matrix_from_bits(4, 4, 0b1010_0110_0011_1001);
        let g = build_graph(&m);
        let a = max_matching(&g);
        let b = max_matching(&g);
        assert_eq!(a, b);
    }

    #[test]
    fn guarantee_bounds() {
        let full = max_matching(&build_graph(&matrix_from_bits(4, 4, 0xffff)));
        let g = defense_guarantee(&full, 4, 1).unwrap();
        assert_eq!(g.blocked, 4);
        assert_eq!(g.bound_reaching, 0);
        assert!(!g.attackers_may_win);

        // Remove one defender's edges: one attacker may leak through.
        let three = max_matching(&build_graph(&matrix_from_bits(4, 4, 0x0fff)));
        assert_eq!(three.size, 3);
        let g = defense_guarantee(&three, 4, 1).unwrap();
        assert_eq!(g.bound_reaching, 1);
        assert!(g.attackers_may_win);

        let none = max_matching(&build_graph(&matrix_from_bits(4, 4, 0)));
        let g = defense_guarantee(&none, 4, 2).unwrap();
        assert_eq!(g.bound_reaching, 4);
        assert!(g.attackers_may_win);
    }
}
