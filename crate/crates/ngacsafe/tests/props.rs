//! Property-based invariants, oracle-checked at small sizes.

use std::collections::BTreeSet;

use proptest::prelude::*;

use ngacsafe::dacc::{
    enumerate_mis, is_valid_subgraph, solve_dacc, ConstraintGraph, Dag, DaccInstance,
};
use ngacsafe::doc::{parse_dacc, parse_policy, serialize_dacc, serialize_policy};
use ngacsafe::model::{execute_command, Edge, OpTarget};
use ngacsafe::oracles::{brute_force_3col, brute_force_dacc, brute_force_mis};
use ngacsafe::reductions::{gen_mutex_groups_model, reduce_3col_to_dacc, SimpleGraph};

fn constraint_graph_strategy(max_n: usize) -> impl Strategy<Value = ConstraintGraph<String>> {
    (0..=max_n).prop_flat_map(|n| {
        let pairs = n * n.saturating_sub(1) / 2;
        prop::collection::vec(any::<bool>(), pairs).prop_map(move |mask| {
            let vertices: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
            let mut graph = ConstraintGraph::new(vertices.clone());
            let mut it = mask.into_iter();
            for i in 0..n {
                for j in i + 1..n {
                    if it.next().unwrap() {
                        graph
                            .add_conflict(vertices[i].clone(), vertices[j].clone())
                            .unwrap();
                    }
                }
            }
            graph
        })
    })
}

fn dacc_strategy(max_edges: usize) -> impl Strategy<Value = DaccInstance<String, (String, String)>> {
    (2..=5usize).prop_flat_map(move |k| {
        let slots = k * (k - 1) / 2;
        (
            prop::collection::vec(any::<bool>(), slots),
            prop::collection::vec(any::<bool>(), slots * slots),
        )
            .prop_map(move |(edge_mask, conflict_mask)| {
                let vertices: Vec<String> = (1..=k).map(|i| format!("n{i}")).collect();
                let mut ids = Vec::new();
                let mut it = edge_mask.into_iter();
                for i in 0..k {
                    for j in i + 1..k {
                        if it.next().unwrap() && ids.len() < max_edges {
                            ids.push((vertices[i].clone(), vertices[j].clone()));
                        }
                    }
                }
                let dag = Dag::new(
                    vertices.clone(),
                    ids.iter().map(|id| (id.clone(), id.clone())),
                )
                .unwrap();
                let mut constraints = ConstraintGraph::new(dag.edge_ids());
                for i in 0..ids.len() {
                    for j in i + 1..ids.len() {
                        if conflict_mask[i * ids.len() + j] {
                            constraints
                                .add_conflict(ids[i].clone(), ids[j].clone())
                                .unwrap();
                        }
                    }
                }
                DaccInstance::new(
                    dag,
                    constraints,
                    vertices[0].clone(),
                    vertices[k - 1].clone(),
                )
                .unwrap()
            })
    })
}

fn simple_graph_strategy(max_n: usize) -> impl Strategy<Value = SimpleGraph> {
    (0..=max_n).prop_flat_map(|n| {
        let pairs = n * n.saturating_sub(1) / 2;
        prop::collection::vec(any::<bool>(), pairs).prop_map(move |mask| {
            let vertices: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
            let mut edges = Vec::new();
            let mut it = mask.into_iter();
            for i in 0..n {
                for j in i + 1..n {
                    if it.next().unwrap() {
                        edges.push((vertices[i].clone(), vertices[j].clone()));
                    }
                }
            }
            SimpleGraph::new(vertices, edges).unwrap()
        })
    })
}

proptest! {
    #[test]
    fn mis_matches_oracle(graph in constraint_graph_strategy(10)) {
        let ours: BTreeSet<_> = enumerate_mis(&graph).collect();
        prop_assert_eq!(ours, brute_force_mis(&graph).unwrap());
    }

    #[test]
    fn mis_sets_are_maximal_independent(graph in constraint_graph_strategy(12)) {
        for set in enumerate_mis(&graph) {
            prop_assert!(graph.is_maximal_independent(&set));
        }
    }

    #[test]
    fn dacc_matches_oracle(inst in dacc_strategy(8)) {
        let verdict = solve_dacc(&inst);
        prop_assert_eq!(verdict.reachable, brute_force_dacc(&inst).unwrap());
        if let Some(set) = &verdict.witness_edge_set {
            prop_assert!(is_valid_subgraph(&inst, set).unwrap());
        }
    }

    #[test]
    fn threecol_reduction_matches_oracle(g in simple_graph_strategy(5)) {
        let inst = reduce_3col_to_dacc(&g);
        prop_assert_eq!(
            solve_dacc(&inst).reachable,
            brute_force_3col(&g).unwrap()
        );
    }

    #[test]
    fn dacc_document_round_trips(inst in dacc_strategy(8)) {
        let text = serialize_dacc(&inst);
        let back = parse_dacc(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(serialize_dacc(&back), text);
    }

    #[test]
    fn mutex_policy_round_trips(users in 1..=3usize, g1 in 2..=4usize, g2 in 2..=4usize) {
        let model = gen_mutex_groups_model(users, &[g1, g2]);
        let text = serialize_policy(&model);
        let back = parse_policy(&text).unwrap();
        prop_assert_eq!(&back, &model);
        prop_assert_eq!(serialize_policy(&back), text);
    }

    // A command whose guard does not match the argument leaves the state
    // exactly unchanged, no matter the argument.
    #[test]
    fn failed_guard_is_exact_noop(users in 1..=2usize, pick in any::<prop::sample::Index>()) {
        let model = gen_mutex_groups_model(users, &[2]);
        let guarded: Vec<_> = model.commands.iter().filter(|c| c.guard.is_some()).collect();
        let cmd = guarded[pick.index(guarded.len())];
        let wrong = OpTarget::Edge(Edge::res_assign("rsa", "rs"));
        prop_assert_eq!(execute_command(&model.initial, cmd, &wrong), model.initial.clone());
    }
}
