//! The safety decision procedure.
//!
//! Builds the supergraph (initial state plus everything any create command
//! could add), derives a constraint graph from the creation conditions, and
//! for every candidate (user, resource, right) tuple without initial access
//! asks DACC whether some valid subgraph connects them. An unsafe verdict
//! carries a replayable command sequence.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::atomic::{AtomicU64, Ordering};

use rayon::prelude::*;
use thiserror::Error;

use crate::dacc::{
    solve_dacc, st_path_with_edges, ConstraintGraph, Dag, DaccError, DaccInstance,
};
use crate::model::{
    access_holds, execute_command, has_errors, validate_model, Action, Command, Diagnostic, Edge,
    EdgeKind, EntityId, NgacModel, OpTarget, RightId, StateDigraph,
};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SafetyError {
    #[error("model failed validation: {}", format_diags(.0))]
    InvalidModel(Vec<Diagnostic>),
    #[error("model rejected: {0}")]
    Rejected(Diagnostic),
    #[error("commands creating the same edge carry different condition sets: {0}")]
    DivergentCreators(String),
    #[error("model lacks a command for {0}; witness cannot be assembled")]
    MissingCommand(String),
    #[error("dacc: {0}")]
    Dacc(#[from] DaccError),
    #[error("reconstructed sequence does not replay to the requested state")]
    ReplayMismatch,
    #[error("{0}")]
    Internal(String),
}

fn format_diags(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// The initial state plus every vertex and edge any create command could
/// ever add, conditions ignored. Every reachable state digraph is a
/// subgraph of it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Supergraph {
    graph: StateDigraph,
}

impl Supergraph {
    pub fn digraph(&self) -> &StateDigraph {
        &self.graph
    }
}

/// The closure computation behind [`build_supergraph`], without the
/// acyclicity gate. Also used during model validation.
pub(crate) fn supergraph_closure(model: &NgacModel) -> StateDigraph {
    let mut graph = model.initial.clone();
    // Edge creates may depend on vertices other creates introduce, so
    // iterate to a fixpoint. Growth is monotone and bounded by the universe.
    loop {
        let mut changed = false;
        for cmd in &model.commands {
            if cmd.op.action != Action::Create {
                continue;
            }
            match &cmd.op.target {
                OpTarget::Vertex(id, kind) => {
                    if !graph.contains_vertex(id)
                        && model.universe.get(id) == Some(kind)
                    {
                        graph.insert_vertex(*kind, id.clone());
                        changed = true;
                    }
                }
                OpTarget::Edge(edge) => {
                    if !graph.contains_edge(edge) && edge.domain_check(&graph).is_ok() {
                        let label_ok = edge
                            .label
                            .as_ref()
                            .is_none_or(|l| model.rights.contains(l));
                        if label_ok {
                            graph.insert_edge(edge.clone());
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            return graph;
        }
    }
}

/// Build the supergraph, rejecting models whose creatable assignments close
/// a cycle in the user or resource DAG.
pub fn build_supergraph(model: &NgacModel) -> Result<Supergraph, SafetyError> {
    let graph = supergraph_closure(model);
    if !graph.user_dag_acyclic() {
        return Err(SafetyError::Rejected(Diagnostic::error(
            "supergraph-cycle",
            "creatable user assignments close a cycle in the user DAG",
        )));
    }
    if !graph.resource_dag_acyclic() {
        return Err(SafetyError::Rejected(Diagnostic::error(
            "supergraph-cycle",
            "creatable resource assignments close a cycle in the resource DAG",
        )));
    }
    Ok(Supergraph { graph })
}

/// Conflict pairs implied by the creation conditions, plus diagnostics.
///
/// For an edge with several create commands the effective condition set is
/// the intersection of the commands' condition sets (any single command
/// suffices to create the edge); differing sets are flagged since the
/// constraint graph then only approximates the reachable states. Conditions
/// naming edges outside the supergraph are vacuously true and dropped.
pub(crate) fn edge_conflicts(
    model: &NgacModel,
    sg: &StateDigraph,
) -> (BTreeSet<(Edge, Edge)>, Vec<Diagnostic>) {
    let mut diags = Vec::new();
    let mut effective: BTreeMap<&Edge, BTreeSet<&Edge>> = BTreeMap::new();
    for cmd in &model.commands {
        let Some(edge) = cmd.created_edge() else {
            continue;
        };
        let conds: BTreeSet<&Edge> = cmd.absent_edges.iter().collect();
        match effective.entry(edge) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(conds);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                if *o.get() != conds {
                    diags.push(Diagnostic::warning(
                        "divergent-creators",
                        format!(
                            "multiple commands create {edge} with differing condition sets; \
                             the constraint graph keeps only their intersection"
                        ),
                    ));
                }
                let merged = o.get().intersection(&conds).copied().collect();
                o.insert(merged);
            }
        }
    }
    let mut conflicts = BTreeSet::new();
    for (edge, conds) in effective {
        if !sg.contains_edge(edge) {
            // Endpoints never exist, so the command can never execute.
            continue;
        }
        for cond in conds {
            if cond == edge || !sg.contains_edge(cond) {
                continue;
            }
            let pair = if edge < cond {
                (edge.clone(), cond.clone())
            } else {
                (cond.clone(), edge.clone())
            };
            conflicts.insert(pair);
        }
    }
    (conflicts, diags)
}

/// The constraint graph over the supergraph's edges.
pub fn build_constraint_graph(
    model: &NgacModel,
    sg: &Supergraph,
) -> (ConstraintGraph<Edge>, Vec<Diagnostic>) {
    let (conflicts, diags) = edge_conflicts(model, sg.digraph());
    let graph = ConstraintGraph::from_parts(sg.digraph().edges().iter().cloned(), conflicts)
        .expect("conflict endpoints are supergraph edges by construction");
    (graph, diags)
}

/// The supergraph restricted to assignments and associations labeled
/// `right`; differently-labeled associations and all prohibitions drop out.
pub fn restrict_to_right(sg: &Supergraph, right: &RightId) -> Dag<EntityId, Edge> {
    let graph = sg.digraph();
    let vertices = graph.vertices().map(|(id, _)| id.clone());
    let edges = graph
        .edges()
        .iter()
        .filter(|e| match e.kind {
            EdgeKind::UserAssign | EdgeKind::ResAssign => true,
            EdgeKind::Assoc => e.label.as_ref() == Some(right),
            EdgeKind::Prohib => false,
        })
        .map(|e| (e.clone(), (e.src.clone(), e.dst.clone())));
    Dag::new(vertices, edges)
        .expect("restricted supergraph is acyclic once the model passed validation")
}

/// An unsafety witness: the tuple gaining access and a replayable command
/// sequence that produces it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Witness {
    pub user: EntityId,
    pub resource: EntityId,
    pub right: RightId,
    pub sequence: Vec<(Command, OpTarget)>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SafetyVerdict {
    pub safe: bool,
    pub witness: Option<Witness>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SafetyStats {
    pub tuples_checked: u64,
    pub mis_enumerated: u64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SafetyReport {
    pub verdict: SafetyVerdict,
    pub stats: SafetyStats,
}

#[derive(Clone, Copy, Debug)]
pub struct SafetyOptions {
    /// Sweep all users/resources of the supergraph instead of only the
    /// initial ones, covering principals that commands could create.
    pub all_potential: bool,
    /// Downgrade differing condition sets for the same created edge from a
    /// hard error to the validation warning.
    pub allow_divergent_creators: bool,
    /// Worker threads for per-tuple checks; 0 or 1 means sequential.
    pub jobs: usize,
}

impl Default for SafetyOptions {
    fn default() -> Self {
        SafetyOptions {
            all_potential: false,
            allow_divergent_creators: false,
            jobs: 1,
        }
    }
}

/// Decide safety. Returns `safe` when no command sequence can create a new
/// access pair, otherwise the lexicographically first unsafe tuple with a
/// verified witness sequence.
pub fn check_safety(
    model: &NgacModel,
    opts: &SafetyOptions,
) -> Result<SafetyReport, SafetyError> {
    let diags = validate_model(model);
    if has_errors(&diags) {
        return Err(SafetyError::InvalidModel(
            diags
                .into_iter()
                .filter(|d| d.severity == crate::model::Severity::Error)
                .collect(),
        ));
    }
    let sg = build_supergraph(model)?;
    let (constraints, cdiags) = build_constraint_graph(model, &sg);
    if !opts.allow_divergent_creators {
        if let Some(d) = cdiags.iter().find(|d| d.code == "divergent-creators") {
            return Err(SafetyError::DivergentCreators(d.message.clone()));
        }
    }

    let (users, resources) = if opts.all_potential {
        (sg.digraph().users(), sg.digraph().resources())
    } else {
        (model.initial.users(), model.initial.resources())
    };
    let mut candidates = Vec::new();
    for u in users {
        for rs in resources {
            for r in &model.rights {
                if !access_holds(&model.initial, u, r, rs) {
                    candidates.push((u.clone(), rs.clone(), r.clone()));
                }
            }
        }
    }
    candidates.sort();

    // Per-right restriction of the supergraph and induced constraint graph.
    let mut per_right: BTreeMap<&RightId, (Dag<EntityId, Edge>, ConstraintGraph<Edge>)> =
        BTreeMap::new();
    for r in &model.rights {
        let dag = restrict_to_right(&sg, r);
        let induced = constraints.induced(&dag.edge_ids());
        per_right.insert(r, (dag, induced));
    }

    let tuples_checked = AtomicU64::new(0);
    let mis_enumerated = AtomicU64::new(0);
    let solve_tuple = |cand: &(EntityId, EntityId, RightId)| {
        let (u, rs, r) = cand;
        let (dag, c_r) = &per_right[r];
        tuples_checked.fetch_add(1, Ordering::Relaxed);
        let instance = DaccInstance::new(dag.clone(), c_r.clone(), u.clone(), rs.clone())
            .expect("candidate tuples are distinct supergraph vertices");
        let verdict = solve_dacc(&instance);
        mis_enumerated.fetch_add(verdict.mis_examined, Ordering::Relaxed);
        verdict
    };

    let hit = if opts.jobs > 1 {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(opts.jobs)
            .build()
            .map_err(|e| SafetyError::Internal(e.to_string()))?;
        pool.install(|| {
            candidates
                .par_iter()
                .map(|cand| (cand, solve_tuple(cand)))
                .find_first(|(_, v)| v.reachable)
        })
    } else {
        candidates
            .iter()
            .map(|cand| (cand, solve_tuple(cand)))
            .find(|(_, v)| v.reachable)
    };

    let stats = SafetyStats {
        tuples_checked: tuples_checked.load(Ordering::Relaxed),
        mis_enumerated: mis_enumerated.load(Ordering::Relaxed),
    };

    let Some(((u, rs, r), verdict)) = hit else {
        return Ok(SafetyReport {
            verdict: SafetyVerdict {
                safe: true,
                witness: None,
            },
            stats,
        });
    };

    let (dag, _) = &per_right[r];
    let mis = verdict
        .witness_edge_set
        .expect("reachable verdicts carry their witness set");
    let (path_nodes, path_edges) = st_path_with_edges(dag, u, rs, &mis)
        .expect("the witness set was chosen because it contains a path");
    let target = witness_target(model, &sg, &constraints, &path_nodes, &path_edges);
    let mut sequence = reconstruct_command_sequence(model, &target)?;
    minimize_witness(model, u, rs, r, &mut sequence);
    if !verify_unsafety_certificate(model, u, rs, r, &sequence) {
        return Err(SafetyError::ReplayMismatch);
    }
    Ok(SafetyReport {
        verdict: SafetyVerdict {
            safe: false,
            witness: Some(Witness {
                user: u.clone(),
                resource: rs.clone(),
                right: r.clone(),
                sequence,
            }),
        },
        stats,
    })
}

/// A concrete target state exhibiting the access path: the initial state,
/// minus initial edges that creation constraints declare exclusive with a
/// path edge, plus the path's vertices and edges.
fn witness_target(
    _model: &NgacModel,
    sg: &Supergraph,
    constraints: &ConstraintGraph<Edge>,
    path_nodes: &[EntityId],
    path_edges: &[Edge],
) -> StateDigraph {
    let conflicts_with_path = |f: &Edge| {
        path_edges.iter().any(|p| {
            let pair = if f < p {
                (f.clone(), p.clone())
            } else {
                (p.clone(), f.clone())
            };
            constraints.conflicts().contains(&pair)
        })
    };
    let mut target = StateDigraph::new();
    for (id, kind) in _model.initial.vertices() {
        target.insert_vertex(kind, id.clone());
    }
    for e in _model.initial.edges() {
        if !conflicts_with_path(e) {
            target.insert_edge(e.clone());
        }
    }
    for id in path_nodes {
        if !target.contains_vertex(id) {
            let kind = sg
                .digraph()
                .kind_of(id)
                .expect("path nodes are supergraph vertices");
            target.insert_vertex(kind, id.clone());
        }
    }
    for e in path_edges {
        target.insert_edge(e.clone());
    }
    target
}

/// A command sequence that, replayed from the initial state, produces
/// exactly `target`: unconditional destroys of initial elements not in the
/// target, then creates of target elements absent initially.
///
/// Requires `target` to be a valid subgraph of the supergraph with respect
/// to the constraint graph; validity guarantees every create's conditions
/// hold at execution time.
pub fn reconstruct_command_sequence(
    model: &NgacModel,
    target: &StateDigraph,
) -> Result<Vec<(Command, OpTarget)>, SafetyError> {
    let destroys: BTreeMap<&OpTarget, &Command> = model
        .commands
        .iter()
        .filter(|c| {
            c.op.action == Action::Destroy && c.guard.is_none() && c.absent_edges.is_empty()
        })
        .map(|c| (&c.op.target, c))
        .collect();
    let creates: BTreeMap<&OpTarget, &Command> = model
        .commands
        .iter()
        .rev() // first command in model order wins
        .filter(|c| c.op.action == Action::Create)
        .map(|c| (&c.op.target, c))
        .collect();

    let mut sequence: Vec<(Command, OpTarget)> = Vec::new();
    let push = |index: &BTreeMap<&OpTarget, &Command>,
                    what: OpTarget,
                    sequence: &mut Vec<(Command, OpTarget)>|
     -> Result<(), SafetyError> {
        let cmd = index
            .get(&what)
            .ok_or_else(|| SafetyError::MissingCommand(what.to_string()))?;
        sequence.push(((*cmd).clone(), what));
        Ok(())
    };

    // Destroy phase: edges first, then vertices, each in deterministic order.
    for e in model.initial.edges() {
        if !target.contains_edge(e) {
            push(&destroys, OpTarget::Edge(e.clone()), &mut sequence)?;
        }
    }
    for (id, kind) in model.initial.vertices() {
        if target.kind_of(id) != Some(kind) {
            push(&destroys, OpTarget::Vertex(id.clone(), kind), &mut sequence)?;
        }
    }
    // Create phase: vertices before the edges that need them.
    for (id, kind) in target.vertices() {
        if model.initial.kind_of(id) != Some(kind) {
            push(&creates, OpTarget::Vertex(id.clone(), kind), &mut sequence)?;
        }
    }
    for e in target.edges() {
        if !model.initial.contains_edge(e) {
            push(&creates, OpTarget::Edge(e.clone()), &mut sequence)?;
        }
    }

    if replay(&model.initial, &sequence) != *target {
        return Err(SafetyError::ReplayMismatch);
    }
    Ok(sequence)
}

/// Replay a command sequence from a state. Entries whose guard or conditions
/// fail are silent no-ops, exactly as in normal execution.
pub fn replay(initial: &StateDigraph, sequence: &[(Command, OpTarget)]) -> StateDigraph {
    sequence
        .iter()
        .fold(initial.clone(), |state, (cmd, arg)| {
            execute_command(&state, cmd, arg)
        })
}

/// Greedily drop destroy entries whose removal keeps the certificate valid.
/// The result is shorter, not guaranteed minimal.
fn minimize_witness(
    model: &NgacModel,
    u: &EntityId,
    rs: &EntityId,
    right: &RightId,
    sequence: &mut Vec<(Command, OpTarget)>,
) {
    let mut i = 0;
    while i < sequence.len() {
        if sequence[i].0.op.action == Action::Destroy {
            let mut candidate = sequence.clone();
            candidate.remove(i);
            if verify_unsafety_certificate(model, u, rs, right, &candidate) {
                *sequence = candidate;
                continue;
            }
        }
        i += 1;
    }
}

/// Certificate check: the access pair is absent initially and present after
/// replaying the sequence. Polynomial time; malformed entries no-op.
pub fn verify_unsafety_certificate(
    model: &NgacModel,
    u: &EntityId,
    rs: &EntityId,
    right: &RightId,
    sequence: &[(Command, OpTarget)],
) -> bool {
    if access_holds(&model.initial, u, right, rs) {
        return false;
    }
    access_holds(&replay(&model.initial, sequence), u, right, rs)
}
