//! Executable hardness-reduction constructions and worst-case generators.
//!
//! Both reductions double as cross-validation oracles: three-coloring maps
//! onto constrained connectivity, and constrained connectivity maps onto the
//! co-safety question for a purpose-built model. The generators produce the
//! mutually-exclusive-attribute structures that drive worst-case maximal
//! independent set counts.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::dacc::{ConstraintGraph, Dag, DaccInstance};
use crate::model::{
    Command, Edge, EntityKind, NgacModel, OpTarget, PrimitiveOp, RightId, StateDigraph,
};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ReductionError {
    #[error("duplicate vertex {0}")]
    DuplicateVertex(String),
    #[error("unknown vertex {0}")]
    UnknownVertex(String),
    #[error("self-loop on {0}")]
    SelfLoop(String),
}

/// An undirected simple graph with an externally fixed vertex order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleGraph {
    vertices: Vec<String>,
    edges: BTreeSet<(usize, usize)>,
}

impl SimpleGraph {
    pub fn new(
        vertices: Vec<String>,
        edges: impl IntoIterator<Item = (String, String)>,
    ) -> Result<Self, ReductionError> {
        let mut index = BTreeMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if index.insert(v.clone(), i).is_some() {
                return Err(ReductionError::DuplicateVertex(v.clone()));
            }
        }
        let mut edge_set = BTreeSet::new();
        for (a, b) in edges {
            let i = *index
                .get(&a)
                .ok_or_else(|| ReductionError::UnknownVertex(a.clone()))?;
            let j = *index
                .get(&b)
                .ok_or_else(|| ReductionError::UnknownVertex(b.clone()))?;
            if i == j {
                return Err(ReductionError::SelfLoop(a));
            }
            edge_set.insert((i.min(j), i.max(j)));
        }
        Ok(SimpleGraph {
            vertices,
            edges: edge_set,
        })
    }

    /// K_n on vertices v1..vn.
    pub fn complete(n: usize) -> Self {
        let vertices: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
        let edges = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .collect();
        SimpleGraph { vertices, edges }
    }

    /// C_n on vertices v1..vn.
    pub fn cycle(n: usize) -> Self {
        let vertices: Vec<String> = (1..=n).map(|i| format!("v{i}")).collect();
        let edges = (0..n)
            .map(|i| {
                let j = (i + 1) % n;
                (i.min(j), i.max(j))
            })
            .collect();
        SimpleGraph { vertices, edges }
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_names(&self) -> impl Iterator<Item = (&str, &str)> + '_ {
        self.edges
            .iter()
            .map(|&(i, j)| (self.vertices[i].as_str(), self.vertices[j].as_str()))
    }
}

/// Find a name not already taken, appending underscores as needed.
fn fresh(base: &str, taken: &BTreeSet<String>) -> String {
    let mut name = base.to_string();
    while taken.contains(&name) {
        name.push('_');
    }
    name
}

/// The three-coloring gadget with its bookkeeping: which DAG node plays each
/// input vertex and each of its three color choices.
#[derive(Clone, Debug)]
pub struct ThreeColGadget {
    pub instance: DaccInstance<String, (String, String)>,
    pub vertex_nodes: Vec<String>,
    pub color_nodes: Vec<[String; 3]>,
}

/// Reduce three-colorability to constrained connectivity.
///
/// Source-to-target paths traverse, per input vertex, exactly one of three
/// color edges; single-assignment triangles and per-input-edge color
/// conflicts make valid paths correspond to proper colorings. The produced
/// DAG has 4n+2 vertices and 6n+1 edges.
pub fn reduce_3col_to_dacc(g: &SimpleGraph) -> DaccInstance<String, (String, String)> {
    build_3col_gadget(g).instance
}

pub fn build_3col_gadget(g: &SimpleGraph) -> ThreeColGadget {
    let mut taken: BTreeSet<String> = g.vertices().iter().cloned().collect();
    let source = fresh("s", &taken);
    taken.insert(source.clone());
    let target = fresh("t", &taken);
    taken.insert(target.clone());

    let vertex_nodes: Vec<String> = g.vertices().to_vec();
    let mut color_nodes: Vec<[String; 3]> = Vec::with_capacity(g.vertex_count());
    for v in g.vertices() {
        let trio = ["R", "G", "B"].map(|c| {
            let name = fresh(&format!("{v}_{c}"), &taken);
            taken.insert(name.clone());
            name
        });
        color_nodes.push(trio);
    }

    let mut nodes: Vec<String> = vec![source.clone(), target.clone()];
    nodes.extend(vertex_nodes.iter().cloned());
    nodes.extend(color_nodes.iter().flatten().cloned());

    let mut edges: Vec<(String, String)> = Vec::new();
    let n = g.vertex_count();
    if n == 0 {
        edges.push((source.clone(), target.clone()));
    } else {
        edges.push((source.clone(), vertex_nodes[0].clone()));
        for i in 0..n {
            for c in &color_nodes[i] {
                edges.push((vertex_nodes[i].clone(), c.clone()));
                let next = if i + 1 < n {
                    vertex_nodes[i + 1].clone()
                } else {
                    target.clone()
                };
                edges.push((c.clone(), next));
            }
        }
    }

    let dag = Dag::new(
        nodes,
        edges.iter().map(|e| (e.clone(), e.clone())),
    )
    .expect("the layered gadget is acyclic");

    let mut constraints = ConstraintGraph::new(dag.edge_ids());
    let color_edge = |i: usize, c: usize| {
        (
            vertex_nodes[i].clone(),
            color_nodes[i][c].clone(),
        )
    };
    // Single-assignment triangles: at most one color edge per input vertex.
    for i in 0..n {
        for c1 in 0..3 {
            for c2 in c1 + 1..3 {
                constraints
                    .add_conflict(color_edge(i, c1), color_edge(i, c2))
                    .expect("color edges exist");
            }
        }
    }
    // Coloring conflicts: adjacent input vertices may not pick the same color.
    for (i, j) in g.edge_indices() {
        for c in 0..3 {
            constraints
                .add_conflict(color_edge(i, c), color_edge(j, c))
                .expect("color edges exist");
        }
    }

    let instance = DaccInstance::new(dag, constraints, source, target)
        .expect("gadget instance is well-formed");
    ThreeColGadget {
        instance,
        vertex_nodes,
        color_nodes,
    }
}

/// Read a color assignment off a source-to-target path through the gadget.
/// Returns one color index per input vertex.
pub fn coloring_from_path(gadget: &ThreeColGadget, path: &[String]) -> Option<Vec<usize>> {
    let mut colors = Vec::with_capacity(gadget.vertex_nodes.len());
    for (i, trio) in gadget.color_nodes.iter().enumerate() {
        let pos = path.iter().position(|p| p == &gadget.vertex_nodes[i])?;
        let chosen = path.get(pos + 1)?;
        colors.push(trio.iter().position(|c| c == chosen)?);
    }
    Some(colors)
}

/// Reduce constrained connectivity to the co-safety question.
///
/// The DAG is embedded in the user-attribute layer: one user wired to the
/// source, an association from the target to a single resource attribute and
/// resource. Edge-creation commands carry the conflicts as absence
/// conditions, so reachable user-DAG states are exactly the valid subgraphs;
/// the model is unsafe precisely when the instance is reachable.
pub fn reduce_dacc_to_cosp(inst: &DaccInstance<String, (String, String)>) -> NgacModel {
    let taken: BTreeSet<String> = inst.dag.vertices().iter().cloned().collect();
    let user = fresh("u", &taken);
    let resource = fresh("rs", &taken);
    let res_attr = fresh("rsa", &taken);
    let right = RightId::new("r");

    let mut initial = StateDigraph::new();
    initial.insert_vertex(EntityKind::User, user.as_str());
    initial.insert_vertex(EntityKind::Resource, resource.as_str());
    initial.insert_vertex(EntityKind::ResourceAttr, res_attr.as_str());
    for v in inst.dag.vertices() {
        initial.insert_vertex(EntityKind::UserAttr, v.as_str());
    }
    initial.insert_edge(Edge::user_assign(user.as_str(), inst.source.as_str()));
    initial.insert_edge(Edge::res_assign(res_attr.as_str(), resource.as_str()));
    initial.insert_edge(Edge::assoc(inst.target.as_str(), res_attr.as_str(), "r"));

    let universe: BTreeMap<_, _> = initial.vertices().map(|(id, k)| (id.clone(), k)).collect();

    let gamma_edge = |(a, b): &(String, String)| Edge::user_assign(a.as_str(), b.as_str());

    let mut commands = Vec::new();
    // Vertex create/destroy commands for the embedded DAG.
    for v in inst.dag.vertices() {
        commands.push(Command::unconditional(
            format!("create_ua_{v}"),
            PrimitiveOp::create(OpTarget::Vertex(v.as_str().into(), EntityKind::UserAttr)),
        ));
    }
    // Unconditional destroys for every vertex and every possible edge.
    for (id, kind) in initial.vertices() {
        commands.push(Command::unconditional(
            format!("destroy_{}_{id}", kind.as_str()),
            PrimitiveOp::destroy(OpTarget::Vertex(id.clone(), kind)),
        ));
    }
    for e in initial.edges() {
        commands.push(Command::unconditional(
            format!("destroy_edge_{}__{}", e.src, e.dst),
            PrimitiveOp::destroy(OpTarget::Edge(e.clone())),
        ));
    }
    for id in inst.dag.edges().keys() {
        let e = gamma_edge(id);
        commands.push(Command::unconditional(
            format!("destroy_edge_{}__{}", e.src, e.dst),
            PrimitiveOp::destroy(OpTarget::Edge(e)),
        ));
    }
    // One create command per DAG edge whose conditions cover all of the
    // edge's conflict partners; unconstrained edges get unconditional
    // creates so every valid subgraph stays constructible.
    for id in inst.dag.edges().keys() {
        let e = gamma_edge(id);
        let partners: Vec<Edge> = inst
            .constraints
            .conflicts()
            .iter()
            .filter_map(|(a, b)| {
                if a == id {
                    Some(gamma_edge(b))
                } else if b == id {
                    Some(gamma_edge(a))
                } else {
                    None
                }
            })
            .collect();
        let name = format!("create_edge_{}__{}", e.src, e.dst);
        commands.push(if partners.is_empty() {
            Command::unconditional(name, PrimitiveOp::create(OpTarget::Edge(e)))
        } else {
            Command::guarded_edge_create(name, e, partners)
        });
    }

    NgacModel {
        initial,
        rights: [right].into(),
        universe,
        commands,
    }
}

/// k vertex-disjoint triangles: the extremal case for the number of maximal
/// independent sets (3^k on 3k vertices).
pub fn gen_disjoint_triangles(k: usize) -> ConstraintGraph<String> {
    let vertices: Vec<String> = (1..=k)
        .flat_map(|i| ["a", "b", "c"].map(|p| format!("t{i}{p}")))
        .collect();
    let mut graph = ConstraintGraph::new(vertices.clone());
    for i in 0..k {
        for x in 0..3 {
            for y in x + 1..3 {
                graph
                    .add_conflict(vertices[3 * i + x].clone(), vertices[3 * i + y].clone())
                    .expect("triangle vertices exist");
            }
        }
    }
    graph
}

/// A model with `users` users and one mutually exclusive attribute group per
/// entry of `groups`: a user may hold at most one attribute per group,
/// enforced by pairwise absence conditions on the assignment creates. Each
/// (user, group) pair contributes one disconnected clique to the constraint
/// graph. Requires every group size to be at least 2.
pub fn gen_mutex_groups_model(users: usize, groups: &[usize]) -> NgacModel {
    assert!(
        groups.iter().all(|&k| k >= 2),
        "mutually exclusive groups need at least two attributes"
    );
    let user_names: Vec<String> = (1..=users).map(|i| format!("u{i}")).collect();
    let group_attrs: Vec<Vec<String>> = groups
        .iter()
        .enumerate()
        .map(|(gi, &k)| (1..=k).map(|ai| format!("g{}_a{ai}", gi + 1)).collect())
        .collect();

    let mut initial = StateDigraph::new();
    for u in &user_names {
        initial.insert_vertex(EntityKind::User, u.as_str());
    }
    for attr in group_attrs.iter().flatten() {
        initial.insert_vertex(EntityKind::UserAttr, attr.as_str());
    }
    initial.insert_vertex(EntityKind::Resource, "rs");
    initial.insert_vertex(EntityKind::ResourceAttr, "rsa");
    initial.insert_edge(Edge::res_assign("rsa", "rs"));

    let universe: BTreeMap<_, _> = initial.vertices().map(|(id, k)| (id.clone(), k)).collect();

    let mut commands = Vec::new();
    for u in &user_names {
        for attrs in &group_attrs {
            for attr in attrs {
                let edge = Edge::user_assign(u.as_str(), attr.as_str());
                let others = attrs
                    .iter()
                    .filter(|a| *a != attr)
                    .map(|a| Edge::user_assign(u.as_str(), a.as_str()));
                commands.push(Command::guarded_edge_create(
                    format!("assign_{u}_{attr}"),
                    edge,
                    others,
                ));
            }
        }
    }
    for (id, kind) in initial.vertices() {
        commands.push(Command::unconditional(
            format!("destroy_{}_{id}", kind.as_str()),
            PrimitiveOp::destroy(OpTarget::Vertex(id.clone(), kind)),
        ));
    }
    let mut possible_edges: Vec<Edge> = vec![Edge::res_assign("rsa", "rs")];
    for u in &user_names {
        for attr in group_attrs.iter().flatten() {
            possible_edges.push(Edge::user_assign(u.as_str(), attr.as_str()));
        }
    }
    for e in possible_edges {
        commands.push(Command::unconditional(
            format!("destroy_edge_{}__{}", e.src, e.dst),
            PrimitiveOp::destroy(OpTarget::Edge(e)),
        ));
    }

    NgacModel {
        initial,
        rights: [RightId::new("r")].into(),
        universe,
        commands,
    }
}
