//! The formal access-control model: state digraphs, the 16 primitive
//! operations, guarded mono-operational commands, and access-relation queries.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Opaque entity name, unique within a model's universe.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EntityId(String);

impl EntityId {
    pub fn new(name: impl Into<String>) -> Self {
        EntityId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for EntityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for EntityId {
    fn from(s: &str) -> Self {
        EntityId::new(s)
    }
}

/// An access right, used as a label on association and prohibition edges.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RightId(String);

impl RightId {
    pub fn new(name: impl Into<String>) -> Self {
        RightId(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for RightId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for RightId {
    fn from(s: &str) -> Self {
        RightId::new(s)
    }
}

/// The four pairwise-disjoint vertex classes of a state digraph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EntityKind {
    User,
    UserAttr,
    Resource,
    ResourceAttr,
}

impl EntityKind {
    pub const ALL: [EntityKind; 4] = [
        EntityKind::User,
        EntityKind::UserAttr,
        EntityKind::Resource,
        EntityKind::ResourceAttr,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EntityKind::User => "user",
            EntityKind::UserAttr => "user-attr",
            EntityKind::Resource => "resource",
            EntityKind::ResourceAttr => "resource-attr",
        }
    }
}

impl fmt::Display for EntityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// The four edge classes of a state digraph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EdgeKind {
    /// Unlabeled edge in (U x UA) u (UA x UA); forms the user DAG.
    UserAssign,
    /// Unlabeled edge in (RA x R) u (RA x RA); forms the resource DAG.
    ResAssign,
    /// Labeled UA -> RA edge granting a right.
    Assoc,
    /// Labeled UA -> RA edge expressing denial. Stored, never traversed.
    Prohib,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::UserAssign => "user-assign",
            EdgeKind::ResAssign => "res-assign",
            EdgeKind::Assoc => "assoc",
            EdgeKind::Prohib => "prohib",
        }
    }

    /// Whether edges of this kind carry a right label.
    pub fn labeled(self) -> bool {
        matches!(self, EdgeKind::Assoc | EdgeKind::Prohib)
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A directed, possibly labeled edge of a state digraph.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub kind: EdgeKind,
    pub src: EntityId,
    pub dst: EntityId,
    pub label: Option<RightId>,
}

impl Edge {
    pub fn user_assign(src: impl Into<EntityId>, dst: impl Into<EntityId>) -> Self {
        Edge {
            kind: EdgeKind::UserAssign,
            src: src.into(),
            dst: dst.into(),
            label: None,
        }
    }

    pub fn res_assign(src: impl Into<EntityId>, dst: impl Into<EntityId>) -> Self {
        Edge {
            kind: EdgeKind::ResAssign,
            src: src.into(),
            dst: dst.into(),
            label: None,
        }
    }

    pub fn assoc(
        src: impl Into<EntityId>,
        dst: impl Into<EntityId>,
        right: impl Into<RightId>,
    ) -> Self {
        Edge {
            kind: EdgeKind::Assoc,
            src: src.into(),
            dst: dst.into(),
            label: Some(right.into()),
        }
    }

    pub fn prohib(
        src: impl Into<EntityId>,
        dst: impl Into<EntityId>,
        right: impl Into<RightId>,
    ) -> Self {
        Edge {
            kind: EdgeKind::Prohib,
            src: src.into(),
            dst: dst.into(),
            label: Some(right.into()),
        }
    }

    /// The (source kind set, destination kind set) domain of this edge kind.
    fn domain(kind: EdgeKind) -> (&'static [EntityKind], &'static [EntityKind]) {
        match kind {
            EdgeKind::UserAssign => (
                &[EntityKind::User, EntityKind::UserAttr],
                &[EntityKind::UserAttr],
            ),
            EdgeKind::ResAssign => (
                &[EntityKind::ResourceAttr],
                &[EntityKind::Resource, EntityKind::ResourceAttr],
            ),
            EdgeKind::Assoc | EdgeKind::Prohib => {
                (&[EntityKind::UserAttr], &[EntityKind::ResourceAttr])
            }
        }
    }

    /// Check this edge against its domain in the given state: endpoints must
    /// exist with permitted kinds and the label must be present exactly for
    /// association and prohibition edges.
    pub fn domain_check(&self, state: &StateDigraph) -> Result<(), OpError> {
        let (src_kinds, dst_kinds) = Edge::domain(self.kind);
        let src_kind = state.kind_of(&self.src);
        if !src_kind.is_some_and(|k| src_kinds.contains(&k)) {
            return Err(OpError::EdgeDomain {
                edge: self.clone(),
                reason: format!("source {} not in {:?}", self.src, src_kinds),
            });
        }
        let dst_kind = state.kind_of(&self.dst);
        if !dst_kind.is_some_and(|k| dst_kinds.contains(&k)) {
            return Err(OpError::EdgeDomain {
                edge: self.clone(),
                reason: format!("destination {} not in {:?}", self.dst, dst_kinds),
            });
        }
        if self.kind.labeled() != self.label.is_some() {
            return Err(OpError::EdgeDomain {
                edge: self.clone(),
                reason: if self.kind.labeled() {
                    "missing right label".into()
                } else {
                    "unexpected right label".into()
                },
            });
        }
        Ok(())
    }
}

impl fmt::Display for Edge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(r) => write!(f, "{}({} -> {}, {})", self.kind, self.src, self.dst, r),
            None => write!(f, "{}({} -> {})", self.kind, self.src, self.dst),
        }
    }
}

/// The current dynamic state: a kind-partitioned vertex set plus edges.
///
/// All mutating operations go through [`apply_primitive_op`]; values are
/// otherwise immutable and freely shareable.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord)]
pub struct StateDigraph {
    users: BTreeSet<EntityId>,
    user_attrs: BTreeSet<EntityId>,
    resources: BTreeSet<EntityId>,
    resource_attrs: BTreeSet<EntityId>,
    edges: BTreeSet<Edge>,
}

impl StateDigraph {
    pub fn new() -> Self {
        StateDigraph::default()
    }

    pub fn kind_set(&self, kind: EntityKind) -> &BTreeSet<EntityId> {
        match kind {
            EntityKind::User => &self.users,
            EntityKind::UserAttr => &self.user_attrs,
            EntityKind::Resource => &self.resources,
            EntityKind::ResourceAttr => &self.resource_attrs,
        }
    }

    fn kind_set_mut(&mut self, kind: EntityKind) -> &mut BTreeSet<EntityId> {
        match kind {
            EntityKind::User => &mut self.users,
            EntityKind::UserAttr => &mut self.user_attrs,
            EntityKind::Resource => &mut self.resources,
            EntityKind::ResourceAttr => &mut self.resource_attrs,
        }
    }

    pub fn users(&self) -> &BTreeSet<EntityId> {
        &self.users
    }

    pub fn resources(&self) -> &BTreeSet<EntityId> {
        &self.resources
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    /// All vertices with their kinds, in id order.
    pub fn vertices(&self) -> impl Iterator<Item = (&EntityId, EntityKind)> {
        EntityKind::ALL
            .iter()
            .flat_map(move |&k| self.kind_set(k).iter().map(move |id| (id, k)))
    }

    pub fn vertex_count(&self) -> usize {
        EntityKind::ALL.iter().map(|&k| self.kind_set(k).len()).sum()
    }

    /// The kind of a vertex, if present. When the disjointness invariant is
    /// violated the first matching kind (in U, UA, R, RA order) is reported.
    pub fn kind_of(&self, id: &EntityId) -> Option<EntityKind> {
        EntityKind::ALL
            .iter()
            .copied()
            .find(|&k| self.kind_set(k).contains(id))
    }

    pub fn contains_vertex(&self, id: &EntityId) -> bool {
        self.kind_of(id).is_some()
    }

    pub fn contains_edge(&self, edge: &Edge) -> bool {
        self.edges.contains(edge)
    }

    /// Unchecked insertion, used when building states directly. Invariants are
    /// enforced by [`validate_model`] and [`apply_primitive_op`], not here.
    pub fn insert_vertex(&mut self, kind: EntityKind, id: impl Into<EntityId>) {
        self.kind_set_mut(kind).insert(id.into());
    }

    pub fn insert_edge(&mut self, edge: Edge) {
        self.edges.insert(edge);
    }

    fn remove_vertex(&mut self, kind: EntityKind, id: &EntityId) {
        self.kind_set_mut(kind).remove(id);
        self.edges.retain(|e| e.src != *id && e.dst != *id);
    }

    /// True when the user-assignment subgraph on U u UA is acyclic.
    pub fn user_dag_acyclic(&self) -> bool {
        acyclic(self.edges.iter().filter(|e| e.kind == EdgeKind::UserAssign))
    }

    /// True when the resource-assignment subgraph on R u RA is acyclic.
    pub fn resource_dag_acyclic(&self) -> bool {
        acyclic(self.edges.iter().filter(|e| e.kind == EdgeKind::ResAssign))
    }
}

fn acyclic<'a>(edges: impl Iterator<Item = &'a Edge>) -> bool {
    let mut succ: BTreeMap<&EntityId, Vec<&EntityId>> = BTreeMap::new();
    let mut indeg: BTreeMap<&EntityId, usize> = BTreeMap::new();
    let mut count = 0usize;
    for e in edges {
        succ.entry(&e.src).or_default().push(&e.dst);
        *indeg.entry(&e.dst).or_insert(0) += 1;
        indeg.entry(&e.src).or_insert(0);
        count += 1;
    }
    let mut queue: VecDeque<&EntityId> = indeg
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(&v, _)| v)
        .collect();
    let mut removed = 0usize;
    while let Some(v) = queue.pop_front() {
        for &w in succ.get(v).into_iter().flatten() {
            let d = indeg.get_mut(w).unwrap();
            *d -= 1;
            removed += 1;
            if *d == 0 {
                queue.push_back(w);
            }
        }
    }
    removed == count
}

/// Target of a primitive operation: a concrete vertex or edge.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum OpTarget {
    Vertex(EntityId, EntityKind),
    Edge(Edge),
}

impl fmt::Display for OpTarget {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OpTarget::Vertex(id, kind) => write!(f, "{kind} {id}"),
            OpTarget::Edge(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Action {
    Create,
    Destroy,
}

/// One of the 16 primitive operations: create or destroy one of the four
/// vertex classes or one of the four edge classes.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct PrimitiveOp {
    pub action: Action,
    pub target: OpTarget,
}

impl PrimitiveOp {
    pub fn create(target: OpTarget) -> Self {
        PrimitiveOp {
            action: Action::Create,
            target,
        }
    }

    pub fn destroy(target: OpTarget) -> Self {
        PrimitiveOp {
            action: Action::Destroy,
            target,
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum OpError {
    #[error("create {0}: already present")]
    AlreadyPresent(OpTarget),
    #[error("destroy {0}: not present")]
    NotPresent(OpTarget),
    #[error("create {id}: present with kind {existing}, not {requested}")]
    KindConflict {
        id: EntityId,
        existing: EntityKind,
        requested: EntityKind,
    },
    #[error("{edge}: {reason}")]
    EdgeDomain { edge: Edge, reason: String },
}

/// Apply a single primitive operation, returning the successor state.
///
/// The precondition column of the operation table is enforced: creates require
/// absence and (for edges) domain membership in the current state, destroys
/// require presence. Destroying a vertex also destroys all incident edges.
/// Universe membership is a model-level concern checked by [`validate_model`].
pub fn apply_primitive_op(state: &StateDigraph, op: &PrimitiveOp) -> Result<StateDigraph, OpError> {
    let mut next = state.clone();
    match (op.action, &op.target) {
        (Action::Create, OpTarget::Vertex(id, kind)) => match state.kind_of(id) {
            None => {
                next.insert_vertex(*kind, id.clone());
            }
            Some(existing) if existing == *kind => {
                return Err(OpError::AlreadyPresent(op.target.clone()));
            }
            Some(existing) => {
                return Err(OpError::KindConflict {
                    id: id.clone(),
                    existing,
                    requested: *kind,
                });
            }
        },
        (Action::Destroy, OpTarget::Vertex(id, kind)) => {
            if state.kind_of(id) != Some(*kind) {
                return Err(OpError::NotPresent(op.target.clone()));
            }
            next.remove_vertex(*kind, id);
        }
        (Action::Create, OpTarget::Edge(edge)) => {
            if state.contains_edge(edge) {
                return Err(OpError::AlreadyPresent(op.target.clone()));
            }
            edge.domain_check(state)?;
            next.insert_edge(edge.clone());
        }
        (Action::Destroy, OpTarget::Edge(edge)) => {
            if !state.contains_edge(edge) {
                return Err(OpError::NotPresent(op.target.clone()));
            }
            next.edges.remove(edge);
        }
    }
    Ok(next)
}

/// A guarded mono-operational command.
///
/// The guard, when present, is an equality check of the formal parameter
/// against a specific edge; `absent_edges` are the `e not in G` conditions.
/// A failed guard or condition makes execution a silent no-op.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Command {
    pub name: String,
    pub guard: Option<Edge>,
    pub absent_edges: BTreeSet<Edge>,
    pub op: PrimitiveOp,
}

impl Command {
    /// An unconditional command (no guard, no absence conditions).
    pub fn unconditional(name: impl Into<String>, op: PrimitiveOp) -> Self {
        Command {
            name: name.into(),
            guard: None,
            absent_edges: BTreeSet::new(),
            op,
        }
    }

    /// An edge-creation command guarded by the created edge itself, with
    /// absence conditions.
    pub fn guarded_edge_create(
        name: impl Into<String>,
        edge: Edge,
        absent_edges: impl IntoIterator<Item = Edge>,
    ) -> Self {
        Command {
            name: name.into(),
            guard: Some(edge.clone()),
            absent_edges: absent_edges.into_iter().collect(),
            op: PrimitiveOp::create(OpTarget::Edge(edge)),
        }
    }

    /// The edge this command creates, if it is an edge-creation command.
    pub fn created_edge(&self) -> Option<&Edge> {
        match (&self.op.action, &self.op.target) {
            (Action::Create, OpTarget::Edge(e)) => Some(e),
            _ => None,
        }
    }
}

/// Execute a command against a state for the given argument.
///
/// Returns the successor state. When the guard does not match the argument,
/// an absence condition fails, or the primitive operation's own precondition
/// does not hold, the input state is returned unchanged.
pub fn execute_command(state: &StateDigraph, cmd: &Command, arg: &OpTarget) -> StateDigraph {
    if let Some(guard) = &cmd.guard {
        match arg {
            OpTarget::Edge(e) if e == guard => {}
            _ => return state.clone(),
        }
    }
    // The operation's input is the formal parameter, so the argument must
    // name the operation's target.
    if *arg != cmd.op.target {
        return state.clone();
    }
    if cmd.absent_edges.iter().any(|e| state.contains_edge(e)) {
        return state.clone();
    }
    apply_primitive_op(state, &cmd.op).unwrap_or_else(|_| state.clone())
}

/// True iff a directed path from `u` to `rs` exists using user assignments,
/// associations labeled exactly `right`, and resource assignments.
///
/// Prohibition edges and differently-labeled associations are not traversed.
/// Absent or wrongly-kinded endpoints yield `false`.
pub fn access_holds(state: &StateDigraph, u: &EntityId, right: &RightId, rs: &EntityId) -> bool {
    if state.kind_of(u) != Some(EntityKind::User) || state.kind_of(rs) != Some(EntityKind::Resource)
    {
        return false;
    }
    // Drop associations not labeled `right` and all prohibitions, then BFS.
    let mut succ: BTreeMap<&EntityId, Vec<&EntityId>> = BTreeMap::new();
    for e in state.edges() {
        let traversable = match e.kind {
            EdgeKind::UserAssign | EdgeKind::ResAssign => true,
            EdgeKind::Assoc => e.label.as_ref() == Some(right),
            EdgeKind::Prohib => false,
        };
        if traversable {
            succ.entry(&e.src).or_default().push(&e.dst);
        }
    }
    let mut seen: BTreeSet<&EntityId> = BTreeSet::new();
    let mut queue = VecDeque::from([u]);
    seen.insert(u);
    while let Some(v) = queue.pop_front() {
        if v == rs {
            return true;
        }
        for &w in succ.get(v).into_iter().flatten() {
            if seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    false
}

/// The access relation for `right`: all (user, resource) pairs of the current
/// state related by an access path.
pub fn access_relation(state: &StateDigraph, right: &RightId) -> BTreeSet<(EntityId, EntityId)> {
    let mut rel = BTreeSet::new();
    for u in state.users() {
        for rs in state.resources() {
            if access_holds(state, u, right, rs) {
                rel.insert((u.clone(), rs.clone()));
            }
        }
    }
    rel
}

/// An access-control model: initial state, rights, universe, and command set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NgacModel {
    pub initial: StateDigraph,
    pub rights: BTreeSet<RightId>,
    pub universe: BTreeMap<EntityId, EntityKind>,
    pub commands: Vec<Command>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Warning => "warning",
            Severity::Error => "error",
        })
    }
}

/// A validation finding. Errors make the model unusable for analysis;
/// warnings flag constructs that weaken the analysis guarantees.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: &'static str,
    pub message: String,
}

impl Diagnostic {
    pub fn error(code: &'static str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
        }
    }

    pub fn warning(code: &'static str, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} [{}]: {}", self.severity, self.code, self.message)
    }
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(|d| d.severity == Severity::Error)
}

/// Check all model well-formedness invariants, returning diagnostics rather
/// than failing. An empty list means the model is fully well-formed.
pub fn validate_model(model: &NgacModel) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    let state = &model.initial;

    // Pairwise disjointness of the four vertex classes.
    for i in 0..EntityKind::ALL.len() {
        for j in i + 1..EntityKind::ALL.len() {
            let (a, b) = (EntityKind::ALL[i], EntityKind::ALL[j]);
            for id in state.kind_set(a).intersection(state.kind_set(b)) {
                diags.push(Diagnostic::error(
                    "kind-overlap",
                    format!("entity {id} is both {a} and {b}"),
                ));
            }
        }
    }

    // Initial vertices must be declared in the universe with matching kind.
    for (id, kind) in state.vertices() {
        match model.universe.get(id) {
            None => diags.push(Diagnostic::error(
                "universe-membership",
                format!("initial {kind} {id} is not in the universe"),
            )),
            Some(&declared) if declared != kind => diags.push(Diagnostic::error(
                "universe-membership",
                format!("initial {id} has kind {kind} but is declared {declared}"),
            )),
            _ => {}
        }
    }

    // Edge domains and labels in the initial state.
    for e in state.edges() {
        if let Err(err) = e.domain_check(state) {
            diags.push(Diagnostic::error("edge-domain", err.to_string()));
        }
        if let Some(label) = &e.label {
            if !model.rights.contains(label) {
                diags.push(Diagnostic::error(
                    "unknown-right",
                    format!("{e}: label {label} not among the declared rights"),
                ));
            }
        }
    }

    if !state.user_dag_acyclic() {
        diags.push(Diagnostic::error(
            "cycle",
            "initial user assignment subgraph is cyclic",
        ));
    }
    if !state.resource_dag_acyclic() {
        diags.push(Diagnostic::error(
            "cycle",
            "initial resource assignment subgraph is cyclic",
        ));
    }

    validate_commands(model, &mut diags);

    // Supergraph-level checks: acyclicity must hold for every edge any create
    // command could add, and the initial state should already respect the
    // creation constraints (otherwise the analysis approximates).
    let sg = crate::safety::supergraph_closure(model);
    if !sg.user_dag_acyclic() {
        diags.push(Diagnostic::error(
            "supergraph-cycle",
            "creatable user assignments close a cycle in the user DAG",
        ));
    }
    if !sg.resource_dag_acyclic() {
        diags.push(Diagnostic::error(
            "supergraph-cycle",
            "creatable resource assignments close a cycle in the resource DAG",
        ));
    }
    let (conflicts, conflict_diags) = crate::safety::edge_conflicts(model, &sg);
    diags.extend(conflict_diags);
    for (a, b) in &conflicts {
        if state.contains_edge(a) && state.contains_edge(b) {
            diags.push(Diagnostic::warning(
                "initial-conflict",
                format!("initial state contains both {a} and {b}, which a creation condition declares exclusive"),
            ));
        }
    }

    diags
}

fn validate_commands(model: &NgacModel, diags: &mut Vec<Diagnostic>) {
    let mut names: BTreeSet<&str> = BTreeSet::new();
    let mut creators: BTreeMap<&Edge, Vec<&Command>> = BTreeMap::new();

    for cmd in &model.commands {
        if !names.insert(&cmd.name) {
            diags.push(Diagnostic::warning(
                "duplicate-command-name",
                format!("command name {} is not unique", cmd.name),
            ));
        }

        let is_edge_create = cmd.created_edge().is_some();
        if !is_edge_create && (cmd.guard.is_some() || !cmd.absent_edges.is_empty()) {
            diags.push(Diagnostic::error(
                "command-shape",
                format!(
                    "command {}: only edge-creation commands may carry a guard or conditions",
                    cmd.name
                ),
            ));
        }
        if let Some(edge) = cmd.created_edge() {
            creators.entry(edge).or_default().push(cmd);
            if !cmd.absent_edges.is_empty() && cmd.guard.as_ref() != Some(edge) {
                diags.push(Diagnostic::error(
                    "command-shape",
                    format!(
                        "command {}: guard must equal the created edge when conditions are present",
                        cmd.name
                    ),
                ));
            }
            if let Some(guard) = &cmd.guard {
                if guard != edge {
                    diags.push(Diagnostic::error(
                        "command-shape",
                        format!("command {}: guard differs from the created edge", cmd.name),
                    ));
                }
            }
        }

        // Every entity and right a command mentions must be declared.
        let mut mentioned: Vec<(&Edge, &str)> = Vec::new();
        match &cmd.op.target {
            OpTarget::Vertex(id, kind) => match model.universe.get(id) {
                None => diags.push(Diagnostic::error(
                    "universe-membership",
                    format!("command {}: references unknown entity {id}", cmd.name),
                )),
                Some(declared) if declared != kind => diags.push(Diagnostic::error(
                    "universe-membership",
                    format!(
                        "command {}: {id} is declared {declared}, not {kind}",
                        cmd.name
                    ),
                )),
                _ => {}
            },
            OpTarget::Edge(edge) => mentioned.push((edge, "target")),
        }
        mentioned.extend(cmd.absent_edges.iter().map(|e| (e, "condition")));
        for (edge, role) in mentioned {
            for id in [&edge.src, &edge.dst] {
                if !model.universe.contains_key(id) {
                    diags.push(Diagnostic::error(
                        "universe-membership",
                        format!("command {}: {role} {edge} references unknown entity {id}", cmd.name),
                    ));
                }
            }
            if let Some(label) = &edge.label {
                if !model.rights.contains(label) {
                    diags.push(Diagnostic::error(
                        "unknown-right",
                        format!("command {}: {role} {edge} references unknown right {label}", cmd.name),
                    ));
                }
            }
        }
    }

    for (edge, cmds) in &creators {
        if cmds.len() > 1 {
            diags.push(Diagnostic::warning(
                "duplicate-creators",
                format!("{} commands create {edge}", cmds.len()),
            ));
        }
    }

    // With conditional creates in play, the state-space correspondence needs
    // an unconditional destroy for everything that can appear in a state.
    let has_conditional = model
        .commands
        .iter()
        .any(|c| !c.absent_edges.is_empty());
    if has_conditional {
        let sg = crate::safety::supergraph_closure(model);
        let destroyable: BTreeSet<&OpTarget> = model
            .commands
            .iter()
            .filter(|c| c.op.action == Action::Destroy && c.guard.is_none() && c.absent_edges.is_empty())
            .map(|c| &c.op.target)
            .collect();
        let mut missing = 0usize;
        for (id, kind) in sg.vertices() {
            if !destroyable.contains(&OpTarget::Vertex(id.clone(), kind)) {
                missing += 1;
            }
        }
        for e in sg.edges() {
            if !destroyable.contains(&OpTarget::Edge(e.clone())) {
                missing += 1;
            }
        }
        if missing > 0 {
            diags.push(Diagnostic::warning(
                "missing-destroys",
                format!(
                    "{missing} reachable element(s) lack an unconditional destroy command; \
                     safety verdicts may over-approximate"
                ),
            ));
        }
    }
}
