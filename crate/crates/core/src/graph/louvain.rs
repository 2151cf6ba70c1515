//! Louvain modularity optimization on small weighted undirected graphs.
//!
//! Local moving visits nodes in index order (or a seeded permutation of
//! it); a node moves only for a strictly positive modularity gain over
//! staying, and ties between target communities go to the lowest community
//! id. Communities are then collapsed into nodes and the process repeats
//! until a level makes no move. Resolution is fixed at 1.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const GAIN_EPS: f64 = 1e-12;

/// Undirected weighted graph in adjacency-list form. Self-loops are stored
/// once with their full weight in `self_loops`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    adjacency: Vec<Vec<(usize, f64)>>,
    self_loops: Vec<f64>,
}

impl WeightedGraph {
    /// Builds from undirected edges; parallel edges are summed.
    pub fn from_edges(nodes: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        let mut adj: Vec<std::collections::BTreeMap<usize, f64>> = vec![Default::default(); nodes];
        let mut self_loops = vec![0.0; nodes];
        for (a, b, w) in edges {
            if a == b {
                self_loops[a] += w;
            } else {
                *adj[a].entry(b).or_default() += w;
                *adj[b].entry(a).or_default() += w;
            }
        }
        WeightedGraph {
            adjacency: adj.into_iter().map(|m| m.into_iter().collect()).collect(),
            self_loops,
        }
    }

    pub fn nodes(&self) -> usize {
        self.adjacency.len()
    }

    /// Weight between `a` and `b`; zero when not adjacent.
    pub fn edge_weight(&self, a: usize, b: usize) -> f64 {
        if a == b {
            return self.self_loops[a];
        }
        self.adjacency[a]
            .binary_search_by_key(&b, |&(u, _)| u)
            .map_or(0.0, |k| self.adjacency[a][k].1)
    }

    /// Weighted degree, counting a self-loop twice.
    pub fn degree(&self, v: usize) -> f64 {
        self.adjacency[v].iter().map(|&(_, w)| w).sum::<f64>() + 2.0 * self.self_loops[v]
    }

    /// `2m`, the sum of all degrees.
    pub fn total_degree(&self) -> f64 {
        (0..self.nodes()).map(|v| self.degree(v)).sum()
    }

    /// Newman modularity of `assignment` at resolution 1.
    pub fn modularity(&self, assignment: &[usize]) -> f64 {
        let two_m = self.total_degree();
        if two_m == 0.0 {
            return 0.0;
        }
        let k = assignment.iter().copied().max().map_or(0, |m| m + 1);
        let mut internal = vec![0.0; k];
        let mut tot = vec![0.0; k];
        for v in 0..self.nodes() {
            let c = assignment[v];
            tot[c] += self.degree(v);
            internal[c] += 2.0 * self.self_loops[v];
            for &(u, w) in &self.adjacency[v] {
                if assignment[u] == c {
                    internal[c] += w;
                }
            }
        }
        internal
            .iter()
            .zip(&tot)
            .map(|(&i, &t)| i / two_m - (t / two_m) * (t / two_m))
            .sum()
    }

    fn aggregate(&self, assignment: &[usize], communities: usize) -> WeightedGraph {
        let mut edges = Vec::new();
        for v in 0..self.nodes() {
            if self.self_loops[v] != 0.0 {
                edges.push((assignment[v], assignment[v], self.self_loops[v]));
            }
            for &(u, w) in &self.adjacency[v] {
                if v < u {
                    edges.push((assignment[v], assignment[u], w));
                }
            }
        }
        WeightedGraph::from_edges(communities, edges)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LouvainOutcome {
    /// Community per original node, renumbered densely by first occurrence.
    pub assignment: Vec<usize>,
    pub modularity: f64,
    /// Modularity after each aggregation level, starting with singletons.
    pub level_modularity: Vec<f64>,
}

/// One local-moving phase; returns whether any node moved.
fn local_moving(g: &WeightedGraph, community: &mut [usize], order: &[usize]) -> bool {
    let n = g.nodes();
    let two_m = g.total_degree();
    let degree: Vec<f64> = (0..n).map(|v| g.degree(v)).collect();
    let mut tot = vec![0.0; n];
    for v in 0..n {
        tot[community[v]] += degree[v];
    }
    let mut links = vec![0.0; n];
    let mut seen = vec![false; n];
    let mut touched: Vec<usize> = Vec::new();
    let mut any_move = false;
    loop {
        let mut moved = false;
        for &v in order {
            let own = community[v];
            for &(u, w) in &g.adjacency[v] {
                let c = community[u];
                if !seen[c] {
                    seen[c] = true;
                    touched.push(c);
                }
                links[c] += w;
            }
            tot[own] -= degree[v];
            let gain = |c: usize| links[c] - tot[c] * degree[v] / two_m;
            let mut best = own;
            let mut best_gain = gain(own);
            touched.sort_unstable();
            for &c in &touched {
                // Ascending ids plus a strict test: the lowest id wins ties.
                if c != own && gain(c) > best_gain + GAIN_EPS {
                    best = c;
                    best_gain = gain(c);
                }
            }
            tot[best] += degree[v];
            if best != own {
                community[v] = best;
                moved = true;
                any_move = true;
            }
            for c in touched.drain(..) {
                links[c] = 0.0;
                seen[c] = false;
            }
        }
        if !moved {
            return any_move;
        }
    }
}

/// Relabels communities densely in order of first appearance.
fn renumber(assignment: &mut [usize]) -> usize {
    let mut map = std::collections::HashMap::new();
    for c in assignment.iter_mut() {
        let next = map.len();
        *c = *map.entry(*c).or_insert(next);
    }
    map.len()
}

/// Runs Louvain. With `seed = None` nodes are visited in index order;
/// otherwise each level visits them in a seeded random order.
pub fn louvain(graph: &WeightedGraph, seed: Option<u64>) -> LouvainOutcome {
    let n = graph.nodes();
    let mut assignment: Vec<usize> = (0..n).collect();
    let mut level_modularity = vec![graph.modularity(&assignment)];
    if n == 0 || graph.total_degree() == 0.0 {
        return LouvainOutcome {
            modularity: level_modularity[0],
            assignment,
            level_modularity,
        };
    }
    let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
    let mut g = graph.clone();
    loop {
        let mut community: Vec<usize> = (0..g.nodes()).collect();
        let mut order: Vec<usize> = (0..g.nodes()).collect();
        if let Some(rng) = rng.as_mut() {
            order.shuffle(rng);
        }
        if !local_moving(&g, &mut community, &order) {
            break;
        }
        let k = renumber(&mut community);
        for c in assignment.iter_mut() {
            *c = community[*c];
        }
        level_modularity.push(graph.modularity(&assignment));
        g = g.aggregate(&community, k);
        if k == 1 {
            break;
        }
    }
    renumber(&mut assignment);
    LouvainOutcome {
        modularity: graph.modularity(&assignment),
        assignment,
        level_modularity,
    }
}
