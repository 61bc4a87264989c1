//! JSON document formats, schema version `ngacsafe/1`.
//!
//! Four document kinds: policy models, constrained-connectivity instances
//! (conflicts as edge-index pairs), simple graphs (undirected edge lists),
//! and bare constraint graphs. Serialization is key-order stable; parsing is
//! strict on shape and schema, while semantic checks remain with
//! `validate_model` and the instance constructors.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dacc::{ConstraintGraph, Dag, DaccError, DaccInstance};
use crate::model::{
    Action, Command, Edge, EdgeKind, EntityKind, NgacModel, OpTarget, PrimitiveOp, StateDigraph,
};
use crate::reductions::{ReductionError, SimpleGraph};

pub const SCHEMA: &str = "ngacsafe/1";

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum DocError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("unsupported schema {found:?}, expected {SCHEMA:?}")]
    Schema { found: String },
    #[error("{0}")]
    Semantic(String),
}

impl From<serde_json::Error> for DocError {
    fn from(e: serde_json::Error) -> Self {
        DocError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

impl From<DaccError> for DocError {
    fn from(e: DaccError) -> Self {
        DocError::Semantic(e.to_string())
    }
}

impl From<ReductionError> for DocError {
    fn from(e: ReductionError) -> Self {
        DocError::Semantic(e.to_string())
    }
}

fn check_schema(found: &str) -> Result<(), DocError> {
    if found == SCHEMA {
        Ok(())
    } else {
        Err(DocError::Schema {
            found: found.to_string(),
        })
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub enum KindDoc {
    #[serde(rename = "user")]
    User,
    #[serde(rename = "user-attr")]
    UserAttr,
    #[serde(rename = "resource")]
    Resource,
    #[serde(rename = "resource-attr")]
    ResourceAttr,
}

impl From<EntityKind> for KindDoc {
    fn from(k: EntityKind) -> Self {
        match k {
            EntityKind::User => KindDoc::User,
            EntityKind::UserAttr => KindDoc::UserAttr,
            EntityKind::Resource => KindDoc::Resource,
            EntityKind::ResourceAttr => KindDoc::ResourceAttr,
        }
    }
}

impl From<KindDoc> for EntityKind {
    fn from(k: KindDoc) -> Self {
        match k {
            KindDoc::User => EntityKind::User,
            KindDoc::UserAttr => EntityKind::UserAttr,
            KindDoc::Resource => EntityKind::Resource,
            KindDoc::ResourceAttr => EntityKind::ResourceAttr,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub enum EdgeKindDoc {
    #[serde(rename = "user-assign")]
    UserAssign,
    #[serde(rename = "res-assign")]
    ResAssign,
    #[serde(rename = "assoc")]
    Assoc,
    #[serde(rename = "prohib")]
    Prohib,
}

impl From<EdgeKind> for EdgeKindDoc {
    fn from(k: EdgeKind) -> Self {
        match k {
            EdgeKind::UserAssign => EdgeKindDoc::UserAssign,
            EdgeKind::ResAssign => EdgeKindDoc::ResAssign,
            EdgeKind::Assoc => EdgeKindDoc::Assoc,
            EdgeKind::Prohib => EdgeKindDoc::Prohib,
        }
    }
}

impl From<EdgeKindDoc> for EdgeKind {
    fn from(k: EdgeKindDoc) -> Self {
        match k {
            EdgeKindDoc::UserAssign => EdgeKind::UserAssign,
            EdgeKindDoc::ResAssign => EdgeKind::ResAssign,
            EdgeKindDoc::Assoc => EdgeKind::Assoc,
            EdgeKindDoc::Prohib => EdgeKind::Prohib,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct EdgeDoc {
    pub kind: EdgeKindDoc,
    pub src: String,
    pub dst: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub right: Option<String>,
}

impl From<&Edge> for EdgeDoc {
    fn from(e: &Edge) -> Self {
        EdgeDoc {
            kind: e.kind.into(),
            src: e.src.to_string(),
            dst: e.dst.to_string(),
            right: e.label.as_ref().map(|r| r.to_string()),
        }
    }
}

impl From<&EdgeDoc> for Edge {
    fn from(d: &EdgeDoc) -> Self {
        Edge {
            kind: d.kind.into(),
            src: d.src.as_str().into(),
            dst: d.dst.as_str().into(),
            label: d.right.as_deref().map(Into::into),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct EntityDecl {
    pub name: String,
    pub kind: KindDoc,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct StateDoc {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "camelCase")]
pub enum TargetDoc {
    #[serde(rename = "vertex")]
    Vertex { name: String, kind: KindDoc },
    #[serde(rename = "edge")]
    Edge(EdgeDoc),
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub enum ActionDoc {
    #[serde(rename = "create")]
    Create,
    #[serde(rename = "destroy")]
    Destroy,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct CommandDoc {
    pub name: String,
    pub action: ActionDoc,
    pub target: TargetDoc,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub guard: Option<EdgeDoc>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub when_absent: Vec<EdgeDoc>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub schema: String,
    pub rights: Vec<String>,
    pub entities: Vec<EntityDecl>,
    pub initial: StateDoc,
    pub commands: Vec<CommandDoc>,
}

/// Parse a policy document into a model.
///
/// Shape errors (bad JSON, unknown kinds, initial vertices missing from the
/// entity list) are reported here; everything `validate_model` covers is
/// deliberately left to it so diagnostics stay in one place.
pub fn parse_policy(input: &str) -> Result<NgacModel, DocError> {
    let doc: ModelDoc = serde_json::from_str(input)?;
    check_schema(&doc.schema)?;

    let mut universe: BTreeMap<_, EntityKind> = BTreeMap::new();
    for decl in &doc.entities {
        let prev = universe.insert(decl.name.as_str().into(), decl.kind.into());
        if prev.is_some() {
            return Err(DocError::Semantic(format!(
                "entity {} declared twice",
                decl.name
            )));
        }
    }

    let mut initial = StateDigraph::new();
    for name in &doc.initial.vertices {
        let kind = universe
            .get(&name.as_str().into())
            .copied()
            .ok_or_else(|| {
                DocError::Semantic(format!("initial vertex {name} is not a declared entity"))
            })?;
        initial.insert_vertex(kind, name.as_str());
    }
    for e in &doc.initial.edges {
        initial.insert_edge(e.into());
    }

    let commands = doc.commands.iter().map(command_from_doc).collect();
    Ok(NgacModel {
        initial,
        rights: doc.rights.iter().map(|r| r.as_str().into()).collect(),
        universe,
        commands,
    })
}

fn command_from_doc(d: &CommandDoc) -> Command {
    let target = match &d.target {
        TargetDoc::Vertex { name, kind } => {
            OpTarget::Vertex(name.as_str().into(), (*kind).into())
        }
        TargetDoc::Edge(e) => OpTarget::Edge(e.into()),
    };
    let op = match d.action {
        ActionDoc::Create => PrimitiveOp::create(target),
        ActionDoc::Destroy => PrimitiveOp::destroy(target),
    };
    Command {
        name: d.name.clone(),
        guard: d.guard.as_ref().map(Into::into),
        absent_edges: d.when_absent.iter().map(Into::into).collect(),
        op,
    }
}

fn command_to_doc(c: &Command) -> CommandDoc {
    let target = match &c.op.target {
        OpTarget::Vertex(id, kind) => TargetDoc::Vertex {
            name: id.to_string(),
            kind: (*kind).into(),
        },
        OpTarget::Edge(e) => TargetDoc::Edge(e.into()),
    };
    CommandDoc {
        name: c.name.clone(),
        action: match c.op.action {
            Action::Create => ActionDoc::Create,
            Action::Destroy => ActionDoc::Destroy,
        },
        target,
        guard: c.guard.as_ref().map(Into::into),
        when_absent: c.absent_edges.iter().map(Into::into).collect(),
    }
}

pub fn serialize_policy(model: &NgacModel) -> String {
    let doc = ModelDoc {
        schema: SCHEMA.to_string(),
        rights: model.rights.iter().map(|r| r.to_string()).collect(),
        entities: model
            .universe
            .iter()
            .map(|(id, &kind)| EntityDecl {
                name: id.to_string(),
                kind: kind.into(),
            })
            .collect(),
        initial: StateDoc {
            vertices: model.initial.vertices().map(|(id, _)| id.to_string()).collect(),
            edges: model.initial.edges().iter().map(Into::into).collect(),
        },
        commands: model.commands.iter().map(command_to_doc).collect(),
    };
    to_pretty(&doc)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct DagEdgeDoc {
    pub src: String,
    pub dst: String,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct DaccDoc {
    pub schema: String,
    pub vertices: Vec<String>,
    pub edges: Vec<DagEdgeDoc>,
    /// Conflict pairs as indices into `edges`.
    pub conflicts: Vec<(usize, usize)>,
    pub source: String,
    pub target: String,
}

/// Instances use the endpoint pair as edge identity, so parallel document
/// edges collapse; duplicates are rejected instead.
pub fn parse_dacc(input: &str) -> Result<DaccInstance<String, (String, String)>, DocError> {
    let doc: DaccDoc = serde_json::from_str(input)?;
    check_schema(&doc.schema)?;
    let ids: Vec<(String, String)> = doc
        .edges
        .iter()
        .map(|e| (e.src.clone(), e.dst.clone()))
        .collect();
    for (i, id) in ids.iter().enumerate() {
        if ids[..i].contains(id) {
            return Err(DocError::Semantic(format!(
                "duplicate edge {} -> {}",
                id.0, id.1
            )));
        }
    }
    let dag = Dag::new(
        doc.vertices.iter().cloned(),
        ids.iter().map(|id| (id.clone(), id.clone())),
    )?;
    let mut constraints = ConstraintGraph::new(dag.edge_ids());
    for &(i, j) in &doc.conflicts {
        let a = ids
            .get(i)
            .ok_or_else(|| DocError::Semantic(format!("conflict index {i} out of range")))?;
        let b = ids
            .get(j)
            .ok_or_else(|| DocError::Semantic(format!("conflict index {j} out of range")))?;
        constraints.add_conflict(a.clone(), b.clone())?;
    }
    Ok(DaccInstance::new(dag, constraints, doc.source, doc.target)?)
}

pub fn serialize_dacc(inst: &DaccInstance<String, (String, String)>) -> String {
    let ids: Vec<&(String, String)> = inst.dag.edges().keys().collect();
    let doc = DaccDoc {
        schema: SCHEMA.to_string(),
        vertices: inst.dag.vertices().iter().cloned().collect(),
        edges: ids
            .iter()
            .map(|(src, dst)| DagEdgeDoc {
                src: src.clone(),
                dst: dst.clone(),
            })
            .collect(),
        conflicts: inst
            .constraints
            .conflicts()
            .iter()
            .map(|(a, b)| {
                let pos = |e| ids.iter().position(|&id| id == e).expect("conflict endpoints are edges");
                (pos(a), pos(b))
            })
            .collect(),
        source: inst.source.clone(),
        target: inst.target.clone(),
    };
    to_pretty(&doc)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct GraphDoc {
    pub schema: String,
    pub vertices: Vec<String>,
    pub edges: Vec<(String, String)>,
}

pub fn parse_graph(input: &str) -> Result<SimpleGraph, DocError> {
    let doc: GraphDoc = serde_json::from_str(input)?;
    check_schema(&doc.schema)?;
    Ok(SimpleGraph::new(doc.vertices, doc.edges)?)
}

pub fn serialize_graph(g: &SimpleGraph) -> String {
    let doc = GraphDoc {
        schema: SCHEMA.to_string(),
        vertices: g.vertices().to_vec(),
        edges: g
            .edge_names()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
    };
    to_pretty(&doc)
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct ConstraintGraphDoc {
    pub schema: String,
    pub vertices: Vec<String>,
    pub conflicts: Vec<(String, String)>,
}

pub fn parse_constraint_graph(input: &str) -> Result<ConstraintGraph<String>, DocError> {
    let doc: ConstraintGraphDoc = serde_json::from_str(input)?;
    check_schema(&doc.schema)?;
    Ok(ConstraintGraph::from_parts(doc.vertices, doc.conflicts)?)
}

pub fn serialize_constraint_graph(g: &ConstraintGraph<String>) -> String {
    let doc = ConstraintGraphDoc {
        schema: SCHEMA.to_string(),
        vertices: g.vertices().iter().cloned().collect(),
        conflicts: g.conflicts().iter().cloned().collect(),
    };
    to_pretty(&doc)
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut out = serde_json::to_string_pretty(value).expect("document types serialize");
    out.push('\n');
    out
}
