mod common;

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use tetris_count::benchgen::{decode_model, generate_cnf, GenOptions, GraphQuerySpec, InputGraph, QueryKind};
use tetris_count::oracle::count_subgraphs;
use tetris_count::solver::{run, spawn_enumeration, SolverConfig};

fn enumerate(g: &InputGraph, spec: &GraphQuerySpec) -> Vec<Vec<usize>> {
    let cnf = generate_cnf(g, spec, &GenOptions::default()).unwrap();
    let (rx, handle) = spawn_enumeration(cnf, SolverConfig::default(), 16);
    let models: Vec<Vec<usize>> = rx.iter().map(|m| decode_model(&m, spec)).collect();
    handle.join().unwrap().unwrap();
    models
}

#[test]
fn decoded_cliques_are_distinct_sorted_triangles() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..30 {
        let g = common::random_graph(&mut rng, 9, 0.45);
        let spec = GraphQuerySpec::new(QueryKind::Clique, 3, &g).unwrap();
        let models = enumerate(&g, &spec);
        let distinct: HashSet<_> = models.iter().cloned().collect();
        assert_eq!(distinct.len(), models.len());
        for m in &models {
            assert!(m[0] < m[1] && m[1] < m[2], "{m:?}");
            assert!(g.has_edge(m[0], m[1]) && g.has_edge(m[1], m[2]) && g.has_edge(m[0], m[2]));
        }
        assert_eq!(models.len() as u128, count_subgraphs(&g, &spec).unwrap());
    }
}

#[test]
fn decoded_paths_are_simple_and_canonical() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..30 {
        let g = common::random_graph(&mut rng, 8, 0.4);
        for k in 2..=3 {
            let spec = GraphQuerySpec::new(QueryKind::Path, k, &g).unwrap();
            let models = enumerate(&g, &spec);
            let distinct: HashSet<_> = models.iter().cloned().collect();
            assert_eq!(distinct.len(), models.len());
            for m in &models {
                assert!(m.windows(2).all(|w| g.has_edge(w[0], w[1])), "{m:?}");
                assert_eq!(m.iter().collect::<HashSet<_>>().len(), k);
                assert!(m[0] < m[k - 1]);
            }
            assert_eq!(models.len() as u128, count_subgraphs(&g, &spec).unwrap());
        }
    }
}

#[test]
fn merged_encoding_counts_the_same() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..30 {
        let g = common::random_graph(&mut rng, 10, 0.35);
        for (kind, k) in [(QueryKind::Clique, 3), (QueryKind::Path, 3)] {
            let spec = GraphQuerySpec::new(kind, k, &g).unwrap();
            let plain = generate_cnf(&g, &spec, &GenOptions::default()).unwrap();
            let merged = generate_cnf(&g, &spec, &GenOptions { merge: true, ..GenOptions::default() }).unwrap();
            assert!(merged.clauses.len() <= plain.clauses.len());
            let a = run(&plain, &SolverConfig::default()).unwrap().model_count;
            let b = run(&merged, &SolverConfig::default()).unwrap().model_count;
            assert_eq!(a, b);
        }
    }
}
