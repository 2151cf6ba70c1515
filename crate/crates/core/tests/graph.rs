mod common;

use std::collections::BTreeMap;

use coburst::coword::PairKey;
use coburst::decomp::{self, SolverConfig};
use coburst::graph::{self, ExportFormat, WeightedGraph};
use coburst::{PairSeries, VocabularyIndex};
use common::oracles;
use proptest::prelude::*;
use rand::Rng;

fn random_graph(rng: &mut impl Rng, n: usize, density: f64) -> (WeightedGraph, Vec<Vec<f64>>) {
    let mut adj = vec![vec![0.0; n]; n];
    let mut edges = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            if rng.random_bool(density) {
                let w = rng.random_range(0.05..1.0);
                adj[a][b] = w;
                adj[b][a] = w;
                edges.push((a, b, w));
            }
        }
    }
    (WeightedGraph::from_edges(n, edges), adj)
}

/// Louvain is greedy: it never beats the exhaustive optimum and reaches it
/// on most small graphs, but not all (a local-moving pass can settle on
/// one merged community that no single move improves).
#[test]
fn louvain_against_exhaustive_search() {
    let mut rng = common::rng(99);
    let mut hits = 0;
    let mut tested = 0;
    for _ in 0..400 {
        let n = rng.random_range(2..=8);
        let density = rng.random_range(0.2..0.8);
        let (g, adj) = random_graph(&mut rng, n, density);
        if g.total_degree() == 0.0 {
            continue;
        }
        tested += 1;
        let out = graph::louvain_partition(&g, None);
        let best = oracles::best_modularity(&adj);
        let own = oracles::modularity(&adj, &out.assignment);
        assert!((own - out.modularity).abs() < 1e-12);
        assert!(own <= best + 1e-12);
        hits += usize::from(best - own <= 1e-12);
    }
    assert!(tested > 300);
    assert!(hits * 10 >= tested * 9, "{hits} of {tested}");
}

#[test]
fn two_triangles_match_brute_force() {
    let edges = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0), (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0), (2, 3, 0.1)];
    let mut adj = vec![vec![0.0; 6]; 6];
    for &(a, b, w) in &edges {
        adj[a][b] = w;
        adj[b][a] = w;
    }
    let out = graph::louvain_partition(&WeightedGraph::from_edges(6, edges), None);
    assert_eq!(out.assignment, [0, 0, 0, 1, 1, 1]);
    assert!((out.modularity - oracles::best_modularity(&adj)).abs() < 1e-12);
}

#[test]
fn disconnected_components_stay_apart() {
    let mut rng = common::rng(5);
    for _ in 0..50 {
        let (g1, _) = random_graph(&mut rng, 4, 0.9);
        let (g2, _) = random_graph(&mut rng, 4, 0.9);
        let mut edges = Vec::new();
        for (off, g) in [(0, &g1), (4, &g2)] {
            for a in 0..4 {
                for b in a + 1..4 {
                    let w = g.edge_weight(a, b);
                    if w > 0.0 {
                        edges.push((a + off, b + off, w));
                    }
                }
            }
        }
        let g = WeightedGraph::from_edges(8, edges);
        let out = graph::louvain_partition(&g, Some(3));
        for a in 0..4 {
            for b in 4..8 {
                if g.degree(a) > 0.0 && g.degree(b) > 0.0 {
                    assert_ne!(out.assignment[a], out.assignment[b]);
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn louvain_never_below_singletons(seed in 0u64..10_000, n in 2usize..20, louvain_seed in proptest::option::of(0u64..100)) {
        let mut rng = common::rng(seed);
        let (g, _) = random_graph(&mut rng, n, 0.3);
        let out = graph::louvain_partition(&g, louvain_seed);
        prop_assert!(out.level_modularity.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        prop_assert!(out.modularity >= out.level_modularity[0] - 1e-12);
        let again = graph::louvain_partition(&g, louvain_seed);
        prop_assert_eq!(out, again);
    }
}

fn decomposed(seed: u64) -> (PairSeries, coburst::DecompositionResult, VocabularyIndex) {
    let mut rng = common::rng(seed);
    let m = 12u32;
    let mut pairs = Vec::new();
    let mut weights = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            if rng.random_bool(0.4) {
                pairs.push(PairKey { i, j });
                let base = rng.random_range(0.01..0.1);
                for t in 0..5 {
                    let spike = if rng.random_bool(0.15) { 0.5 } else { 0.0 };
                    weights.push(base + spike + 0.01 * t as f64);
                }
            }
        }
    }
    let w = PairSeries::from_rows(pairs, weights, 5, m as usize, vec![100; 5]).unwrap();
    let r = decomp::decompose(&w, &SolverConfig::new(0.05)).unwrap();
    let vocab = VocabularyIndex::from_counts((0..m).map(|k| (format!("w{k:02}"), 1)));
    (w, r, vocab)
}

#[test]
fn exported_graphs_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (w, r, vocab) = decomposed(1);
    let mut non_empty = 0;
    for t in 1..=5 {
        let mut g = graph::extract_graph(&w, &r, t, &vocab).unwrap();
        g.cluster(None);
        assert!(g.edges.iter().all(|e| e.weight > 0.0));
        assert!(g.declines.iter().all(|e| e.weight < 0.0));
        let ids = g.node_ids();
        for n in &g.nodes {
            assert!(g.edges.iter().any(|e| e.source == n.id || e.target == n.id));
        }
        assert!(g.edges.iter().all(|e| ids.contains(&e.source) && ids.contains(&e.target)));
        non_empty += usize::from(!g.is_empty());

        let json = graph::export(&g, ExportFormat::Json, dir.path()).unwrap();
        assert_eq!(json.file_name().unwrap().to_str().unwrap(), format!("trendnets_{t}.json"));
        let back = graph::from_json(&std::fs::read_to_string(json).unwrap()).unwrap();
        assert_eq!(back, g);

        let xml = graph::export(&g, ExportFormat::GraphMl, dir.path()).unwrap();
        let back = graph::from_graphml(&std::fs::read_to_string(xml).unwrap()).unwrap();
        assert_eq!(back.nodes, g.nodes);
        assert_eq!(back.edges, g.edges);
        assert_eq!(back.modularity, g.modularity);

        let dot = graph::export(&g, ExportFormat::Dot, dir.path()).unwrap();
        let text = std::fs::read_to_string(dot).unwrap();
        assert_eq!(text.matches(" -- ").count(), g.edges.len());
    }
    assert!(non_empty > 0);
}

#[test]
fn labels_flow_into_exports() {
    let (w, r, mut vocab) = decomposed(2);
    vocab.set_labels(&BTreeMap::from([(0, "Zeroth & <first>".to_string())]));
    let t = (1..=5)
        .find(|&t| {
            let g = graph::extract_graph(&w, &r, t, &vocab).unwrap();
            g.node_ids().contains(&0)
        })
        .expect("word 0 bursts somewhere");
    let g = graph::extract_graph(&w, &r, t, &vocab).unwrap();
    let xml = graph::render(&g, ExportFormat::GraphMl).unwrap();
    assert!(xml.contains("Zeroth &amp; &lt;first&gt;"));
    assert_eq!(graph::from_graphml(&xml).unwrap().nodes[0].label, "Zeroth & <first>");
}

