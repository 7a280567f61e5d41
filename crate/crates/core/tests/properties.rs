use proptest::prelude::*;

use bbpl::model::canonical_gauge;
use bbpl::model::exact::exact_marginals;
use bbpl::model::io::{read_samples, write_samples, ModelFile};
use bbpl::partition::{gather, scatter_update};
use bbpl::{run_bp, BlockPartition, BpConfig, CountingNumbers, GraphTopology, PotentialVector};

/// Connected-ish random graph: a random spanning tree plus extra edges.
fn graph_strategy(max_n: usize, max_k: usize) -> impl Strategy<Value = GraphTopology> {
    (2..=max_n)
        .prop_flat_map(move |n| {
            let parents: Vec<_> = (1..n).map(|v| 0..v).collect();
            let extra = proptest::collection::vec((0..n, 0..n), 0..n);
            let states = proptest::collection::vec(2..=max_k, n);
            (Just(n), parents, extra, states)
        })
        .prop_map(|(_, parents, extra, states)| {
            let mut edges: Vec<(usize, usize)> = parents.iter().enumerate().map(|(i, &p)| (p, i + 1)).collect();
            for (a, b) in extra {
                let e = (a.min(b), a.max(b));
                if a != b && !edges.contains(&e) {
                    edges.push(e);
                }
            }
            GraphTopology::new(states, edges).unwrap()
        })
}

fn theta_for(graph: &GraphTopology, values: &[f64]) -> PotentialVector {
    let flat = (0..graph.dim()).map(|i| values[i % values.len()]).collect();
    PotentialVector::from_flat(graph, flat).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn layout_ranges_tile_the_vector(g in graph_strategy(8, 4)) {
        let mut seen = vec![0u8; g.dim()];
        for s in 0..g.num_vertices() {
            let r = g.unary_range(s);
            prop_assert_eq!(r.len(), g.num_states(s));
            r.for_each(|i| seen[i] += 1);
        }
        for (e, &(u, v)) in g.edges().iter().enumerate() {
            let r = g.pair_range(e);
            prop_assert_eq!(r.len(), g.num_states(u) * g.num_states(v));
            r.for_each(|i| seen[i] += 1);
        }
        prop_assert!(seen.iter().all(|&c| c == 1));
    }

    #[test]
    fn bp_beliefs_are_normalized_and_consistent(
        g in graph_strategy(7, 3),
        values in proptest::collection::vec(-2.0f64..2.0, 1..64),
    ) {
        let theta = theta_for(&g, &values);
        let rho = CountingNumbers::uniform(&g, 1.0).unwrap();
        let st = run_bp(&g, &theta, &rho, &BpConfig::with_tol(1e-10), None).unwrap();
        prop_assert!(st.beliefs.simplex_violation(&g) < 1e-9);
        if st.converged {
            prop_assert!(st.beliefs.consistency_violation(&g) < 1e-7);
        }
    }

    #[test]
    fn gauge_shifts_preserve_marginals_and_canonical_form(
        g in graph_strategy(5, 3),
        values in proptest::collection::vec(-1.0f64..1.0, 1..32),
        shift in -3.0f64..3.0,
        edge_pick in 0usize..100,
    ) {
        let theta = theta_for(&g, &values);
        let mut moved = theta.clone();
        let e = edge_pick % g.num_edges();
        let (u, v) = g.edge(e);
        let kv = g.num_states(v);
        // move `shift` from row 0 of edge e into unary state 0 of u
        moved.unary_mut(&g, u)[0] += shift;
        for x in &mut moved.pairwise_mut(&g, e)[..kv] {
            *x -= shift;
        }
        for x in moved.unary_mut(&g, v) {
            *x += 0.5 * shift;
        }
        let a = exact_marginals(&g, &theta).unwrap();
        let b = exact_marginals(&g, &moved).unwrap();
        for (p, q) in a.as_slice().iter().zip(b.as_slice()) {
            prop_assert!((p - q).abs() < 1e-10);
        }
        let ca = canonical_gauge(&g, &theta);
        let cb = canonical_gauge(&g, &moved);
        for (p, q) in ca.as_slice().iter().zip(cb.as_slice()) {
            prop_assert!((p - q).abs() < 1e-8);
        }
    }

    #[test]
    fn index_partitions_are_valid_and_scatter_is_local(
        g in graph_strategy(10, 3),
        d_pick in 1usize..10,
        fill in -5.0f64..5.0,
    ) {
        let d = 1 + d_pick % g.num_vertices();
        let p = BlockPartition::index(&g, d).unwrap();
        prop_assert!(p.validate(&g).is_empty());
        prop_assert_eq!(p.num_blocks(), d);
        let covered: usize = p.blocks().iter().map(|b| b.vertices().len()).sum();
        prop_assert_eq!(covered, g.num_vertices());

        let base: Vec<f64> = (0..g.dim()).map(|i| i as f64).collect();
        for block in p.blocks() {
            let mut full = base.clone();
            let sub = vec![fill; block.flat_indices().len()];
            scatter_update(&mut full, block, &sub).unwrap();
            prop_assert_eq!(gather(&full, block), sub);
            for (i, (&a, &b)) in full.iter().zip(&base).enumerate() {
                if !block.flat_indices().contains(&i) {
                    prop_assert_eq!(a, b);
                }
            }
        }
    }

    #[test]
    fn model_and_sample_files_round_trip(
        g in graph_strategy(6, 4),
        values in proptest::collection::vec(-10.0f64..10.0, 1..16),
        raw in proptest::collection::vec(proptest::collection::vec(0usize..4, 6), 1..20),
    ) {
        let model = ModelFile::new(g.clone(), theta_for(&g, &values));
        let back = ModelFile::from_toml_str(&model.to_toml_string().unwrap()).unwrap();
        prop_assert_eq!(&back.graph, &g);
        prop_assert_eq!(&back.potentials, &model.potentials);

        let samples: Vec<Vec<usize>> = raw
            .iter()
            .map(|x| (0..g.num_vertices()).map(|s| x[s] % g.num_states(s)).collect())
            .collect();
        let mut buf = Vec::new();
        write_samples(&mut buf, &samples, Some("round trip")).unwrap();
        prop_assert_eq!(read_samples(buf.as_slice()).unwrap(), samples);
    }
}
