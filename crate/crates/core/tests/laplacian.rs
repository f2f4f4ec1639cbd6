mod common;

use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use specopt::ParameterGraph;

fn edge_list() -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
    (1usize..=12).prop_flat_map(|n| {
        let pairs: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        let m = pairs.len();
        (
            Just(n),
            proptest::collection::vec((any::<bool>(), 0.05f64..5.0), m).prop_map(move |picks| {
                pairs
                    .iter()
                    .zip(picks)
                    .filter(|(_, (keep, _))| *keep)
                    .map(|(&(i, j), (_, w))| (i, j, w))
                    .collect::<Vec<_>>()
            }),
        )
    })
}

proptest! {
    #[test]
    fn laplacian_matches_edge_assembly((n, edges) in edge_list()) {
        let g = ParameterGraph::from_edge_list(n, &edges).unwrap();
        let oracle = laplacian_from_edges(n, &edges);
        prop_assert!((g.laplacian() - oracle).amax() <= 1e-12);
    }

    #[test]
    fn constant_vector_in_kernel((n, edges) in edge_list()) {
        let g = ParameterGraph::from_edge_list(n, &edges).unwrap();
        let ones = DVector::from_element(n, 1.0);
        prop_assert!((g.laplacian() * ones).amax() <= 1e-12);
    }

    #[test]
    fn quadratic_form_is_pairwise_sum((n, edges) in edge_list(), seed in any::<u64>()) {
        let g = ParameterGraph::from_edge_list(n, &edges).unwrap();
        let x = random_matrix(&mut rng(seed), n, 1);
        let quad = (x.transpose() * g.laplacian() * &x)[(0, 0)];
        let pair = pairwise_dirichlet(&edges, &x);
        prop_assert!(quad >= -1e-10);
        prop_assert!((quad - pair).abs() <= 1e-10 * pair.abs().max(1.0));
    }

    #[test]
    fn components_match_union_find((n, edges) in edge_list()) {
        let g = ParameterGraph::from_edge_list(n, &edges).unwrap();
        prop_assert_eq!(g.connected_components().count, component_count(n, &edges));
    }

    #[test]
    fn similarity_is_permutation_equivariant(
        seed in any::<u64>(),
        n in 2usize..10,
        k in 1usize..4,
        perm_seed in any::<u64>(),
    ) {
        let mut r = rng(seed);
        // Small integer coordinates force distance ties.
        let x = DMatrix::from_fn(n, 2, |_, _| (gaussian(&mut r) * 1.5).round());
        let mut perm: Vec<usize> = (0..n).collect();
        use rand::seq::SliceRandom;
        perm.shuffle(&mut rng(perm_seed));
        let mut px = DMatrix::zeros(n, 2);
        for (i, &p) in perm.iter().enumerate() {
            px.set_row(p, &x.row(i));
        }
        let k = k.min(n - 1);
        let g = ParameterGraph::similarity(&x, k, 1.0).unwrap();
        let pg = ParameterGraph::similarity(&px, k, 1.0).unwrap();
        prop_assert_eq!(permute_symmetric(g.weights(), &perm), pg.weights().clone());
    }
}

#[test]
fn random_connected_graphs_are_connected() {
    for seed in 0..30 {
        let g = ParameterGraph::random_connected(20, 0.05, (0.5, 1.5), seed).unwrap();
        assert_eq!(g.connected_components().count, 1);
    }
}
