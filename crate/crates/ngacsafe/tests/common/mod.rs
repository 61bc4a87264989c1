//! Seeded random generators shared by the integration suites.

use std::collections::BTreeMap;

use rand::Rng;

use ngacsafe::dacc::{ConstraintGraph, Dag, DaccInstance};
use ngacsafe::model::{
    Command, Edge, EntityKind, NgacModel, OpTarget, PrimitiveOp, RightId, StateDigraph,
};
use ngacsafe::reductions::SimpleGraph;

pub fn random_simple_graph(rng: &mut impl Rng, max_vertices: usize) -> SimpleGraph {
    let n = rng.gen_range(0..=max_vertices);
    let vertices: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.4) {
                edges.push((vertices[i].clone(), vertices[j].clone()));
            }
        }
    }
    SimpleGraph::new(vertices, edges).unwrap()
}

pub fn random_constraint_graph(rng: &mut impl Rng, max_vertices: usize) -> ConstraintGraph<String> {
    let n = rng.gen_range(0..=max_vertices);
    let vertices: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
    let mut graph = ConstraintGraph::new(vertices.clone());
    for i in 0..n {
        for j in i + 1..n {
            if rng.gen_bool(0.4) {
                graph
                    .add_conflict(vertices[i].clone(), vertices[j].clone())
                    .unwrap();
            }
        }
    }
    graph
}

/// A layered random instance: vertices n1..nk, edges only forward, so the
/// graph is acyclic by construction. Source n1, target nk.
pub fn random_dacc_instance(
    rng: &mut impl Rng,
    max_edges: usize,
) -> DaccInstance<String, (String, String)> {
    let k = rng.gen_range(2..=5usize);
    let vertices: Vec<String> = (1..=k).map(|i| format!("n{i}")).collect();
    let mut ids = Vec::new();
    'outer: for i in 0..k {
        for j in i + 1..k {
            if rng.gen_bool(0.5) {
                ids.push((vertices[i].clone(), vertices[j].clone()));
                if ids.len() == max_edges {
                    break 'outer;
                }
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
            if rng.gen_bool(0.3) {
                constraints.add_conflict(ids[i].clone(), ids[j].clone()).unwrap();
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
}

/// A random model tailored for the valid-subgraph correspondence: fixed
/// vertex population (no vertex commands), symmetric creation conditions,
/// an unconditional destroy and exactly one create per potential edge. Its
/// reachable states then differ only in their edge sets.
pub fn random_lemma_model(rng: &mut impl Rng) -> NgacModel {
    let attrs = rng.gen_range(1..=3usize);
    let attr_names: Vec<String> = (1..=attrs).map(|i| format!("a{i}")).collect();

    let mut initial = StateDigraph::new();
    initial.insert_vertex(EntityKind::User, "u");
    initial.insert_vertex(EntityKind::Resource, "rs");
    initial.insert_vertex(EntityKind::ResourceAttr, "rsa");
    for a in &attr_names {
        initial.insert_vertex(EntityKind::UserAttr, a.as_str());
    }
    initial.insert_edge(Edge::res_assign("rsa", "rs"));
    let universe: BTreeMap<_, _> = initial.vertices().map(|(id, k)| (id.clone(), k)).collect();

    let mut potential: Vec<Edge> = vec![Edge::res_assign("rsa", "rs")];
    for a in &attr_names {
        if rng.gen_bool(0.6) {
            potential.push(Edge::user_assign("u", a.as_str()));
        }
        if rng.gen_bool(0.6) {
            potential.push(Edge::assoc(a.as_str(), "rsa", "r"));
        }
    }
    for i in 0..attrs {
        for j in i + 1..attrs {
            if rng.gen_bool(0.5) {
                potential.push(Edge::user_assign(
                    attr_names[i].as_str(),
                    attr_names[j].as_str(),
                ));
            }
        }
    }

    // Symmetric conflicts: both creators condition on each other, so the
    // independence invariant is preserved step by step.
    let mut partners: BTreeMap<Edge, Vec<Edge>> = BTreeMap::new();
    for i in 0..potential.len() {
        for j in i + 1..potential.len() {
            if rng.gen_bool(0.3) {
                partners
                    .entry(potential[i].clone())
                    .or_default()
                    .push(potential[j].clone());
                partners
                    .entry(potential[j].clone())
                    .or_default()
                    .push(potential[i].clone());
            }
        }
    }

    let mut commands = Vec::new();
    for (i, e) in potential.iter().enumerate() {
        let conds = partners.get(e).cloned().unwrap_or_default();
        commands.push(if conds.is_empty() {
            Command::unconditional(
                format!("c{i}"),
                PrimitiveOp::create(OpTarget::Edge(e.clone())),
            )
        } else {
            Command::guarded_edge_create(format!("c{i}"), e.clone(), conds)
        });
        commands.push(Command::unconditional(
            format!("d{i}"),
            PrimitiveOp::destroy(OpTarget::Edge(e.clone())),
        ));
    }

    NgacModel {
        initial,
        rights: [RightId::new("r")].into(),
        universe,
        commands,
    }
}
