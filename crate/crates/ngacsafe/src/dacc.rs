//! Directed acyclic constrained connectivity.
//!
//! An instance pairs a DAG with a constraint graph whose vertices are the
//! DAG's edges; a conflict pair forbids two edges from coexisting. The solver
//! enumerates maximal independent sets of the constraint graph and runs a
//! breadth-first search inside each induced edge subset.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Debug;

use thiserror::Error;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum DaccError {
    #[error("edge endpoint {0} is not a vertex")]
    UnknownEndpoint(String),
    #[error("graph contains a directed cycle")]
    Cyclic,
    #[error("conflict endpoint {0} is not a constraint-graph vertex")]
    UnknownConflictEndpoint(String),
    #[error("self-conflict on {0}")]
    SelfConflict(String),
    #[error("constraint-graph vertices do not match the DAG edge set")]
    VertexMismatch,
    #[error("source and target must be distinct")]
    SourceEqualsTarget,
    #[error("{0} is not a vertex of the DAG")]
    UnknownVertex(String),
    #[error("edge subset contains an unknown edge")]
    UnknownEdgeInSubset,
}

/// A directed acyclic graph with identified edges.
///
/// Edges carry an explicit identity `E` distinct from their endpoint pair so
/// that parallel edges (e.g. differently labeled associations) stay distinct
/// as constraint-graph vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dag<N: Ord + Clone, E: Ord + Clone> {
    vertices: BTreeSet<N>,
    edges: BTreeMap<E, (N, N)>,
}

impl<N: Ord + Clone + Debug, E: Ord + Clone + Debug> Dag<N, E> {
    pub fn new(
        vertices: impl IntoIterator<Item = N>,
        edges: impl IntoIterator<Item = (E, (N, N))>,
    ) -> Result<Self, DaccError> {
        let vertices: BTreeSet<N> = vertices.into_iter().collect();
        let edges: BTreeMap<E, (N, N)> = edges.into_iter().collect();
        for (src, dst) in edges.values() {
            for v in [src, dst] {
                if !vertices.contains(v) {
                    return Err(DaccError::UnknownEndpoint(format!("{v:?}")));
                }
            }
        }
        let dag = Dag { vertices, edges };
        if !dag.is_acyclic() {
            return Err(DaccError::Cyclic);
        }
        Ok(dag)
    }

    pub fn vertices(&self) -> &BTreeSet<N> {
        &self.vertices
    }

    pub fn edges(&self) -> &BTreeMap<E, (N, N)> {
        &self.edges
    }

    pub fn edge_ids(&self) -> BTreeSet<E> {
        self.edges.keys().cloned().collect()
    }

    fn is_acyclic(&self) -> bool {
        let mut succ: BTreeMap<&N, Vec<&N>> = BTreeMap::new();
        let mut indeg: BTreeMap<&N, usize> = self.vertices.iter().map(|v| (v, 0)).collect();
        for (src, dst) in self.edges.values() {
            succ.entry(src).or_default().push(dst);
            *indeg.get_mut(dst).unwrap() += 1;
        }
        let mut queue: VecDeque<&N> = indeg
            .iter()
            .filter(|(_, &d)| d == 0)
            .map(|(&v, _)| v)
            .collect();
        let mut visited = 0usize;
        while let Some(v) = queue.pop_front() {
            visited += 1;
            for &w in succ.get(v).into_iter().flatten() {
                let d = indeg.get_mut(w).unwrap();
                *d -= 1;
                if *d == 0 {
                    queue.push_back(w);
                }
            }
        }
        visited == self.vertices.len()
    }
}

/// An undirected conflict graph over edge identities: a conflict pair means
/// the two edges cannot coexist in a valid subgraph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConstraintGraph<E: Ord + Clone> {
    vertices: BTreeSet<E>,
    conflicts: BTreeSet<(E, E)>,
}

impl<E: Ord + Clone + Debug> ConstraintGraph<E> {
    pub fn new(vertices: impl IntoIterator<Item = E>) -> Self {
        ConstraintGraph {
            vertices: vertices.into_iter().collect(),
            conflicts: BTreeSet::new(),
        }
    }

    pub fn from_parts(
        vertices: impl IntoIterator<Item = E>,
        conflicts: impl IntoIterator<Item = (E, E)>,
    ) -> Result<Self, DaccError> {
        let mut graph = ConstraintGraph::new(vertices);
        for (a, b) in conflicts {
            graph.add_conflict(a, b)?;
        }
        Ok(graph)
    }

    /// Insert a conflict; pairs are stored unordered and deduplicated.
    pub fn add_conflict(&mut self, a: E, b: E) -> Result<(), DaccError> {
        if a == b {
            return Err(DaccError::SelfConflict(format!("{a:?}")));
        }
        for v in [&a, &b] {
            if !self.vertices.contains(v) {
                return Err(DaccError::UnknownConflictEndpoint(format!("{v:?}")));
            }
        }
        let pair = if a < b { (a, b) } else { (b, a) };
        self.conflicts.insert(pair);
        Ok(())
    }

    pub fn vertices(&self) -> &BTreeSet<E> {
        &self.vertices
    }

    pub fn conflicts(&self) -> &BTreeSet<(E, E)> {
        &self.conflicts
    }

    pub fn is_independent(&self, set: &BTreeSet<E>) -> bool {
        self.conflicts
            .iter()
            .all(|(a, b)| !(set.contains(a) && set.contains(b)))
    }

    /// Independent and not extendable by any further vertex.
    pub fn is_maximal_independent(&self, set: &BTreeSet<E>) -> bool {
        if !self.is_independent(set) {
            return false;
        }
        self.vertices.iter().all(|v| {
            set.contains(v)
                || self.conflicts.iter().any(|(a, b)| {
                    (a == v && set.contains(b)) || (b == v && set.contains(a))
                })
        })
    }

    /// Restriction to a subset of the vertices, keeping conflicts with both
    /// endpoints inside.
    pub fn induced(&self, keep: &BTreeSet<E>) -> ConstraintGraph<E> {
        ConstraintGraph {
            vertices: self.vertices.intersection(keep).cloned().collect(),
            conflicts: self
                .conflicts
                .iter()
                .filter(|(a, b)| keep.contains(a) && keep.contains(b))
                .cloned()
                .collect(),
        }
    }
}

/// Enumerate every maximal independent set of the constraint graph exactly
/// once, in lexicographic order by smallest member.
///
/// Maximal independent sets are maximal cliques of the complement graph; the
/// search is Bron-Kerbosch with pivoting over complement adjacency, with the
/// results ordered afterwards for reproducible witnesses.
pub fn enumerate_mis<E: Ord + Clone + Debug>(
    graph: &ConstraintGraph<E>,
) -> impl Iterator<Item = BTreeSet<E>> {
    let index: Vec<&E> = graph.vertices.iter().collect();
    let pos: BTreeMap<&E, u32> = index.iter().enumerate().map(|(i, &e)| (e, i as u32)).collect();
    let n = index.len();
    let mut conf_adj: Vec<BTreeSet<u32>> = vec![BTreeSet::new(); n];
    for (a, b) in &graph.conflicts {
        let (i, j) = (pos[a], pos[b]);
        conf_adj[i as usize].insert(j);
        conf_adj[j as usize].insert(i);
    }

    let mut found: Vec<Vec<u32>> = Vec::new();
    bron_kerbosch(
        &conf_adj,
        Vec::new(),
        (0..n as u32).collect(),
        Vec::new(),
        &mut found,
    );
    let mut sets: Vec<BTreeSet<E>> = found
        .into_iter()
        .map(|s| s.into_iter().map(|i| index[i as usize].clone()).collect())
        .collect();
    sets.sort();
    sets.into_iter()
}

/// Bron-Kerbosch with pivoting on the complement of the conflict adjacency.
/// `p` and `x` are kept sorted.
fn bron_kerbosch(
    conf_adj: &[BTreeSet<u32>],
    r: Vec<u32>,
    p: Vec<u32>,
    x: Vec<u32>,
    out: &mut Vec<Vec<u32>>,
) {
    if p.is_empty() && x.is_empty() {
        out.push(r);
        return;
    }
    // Complement neighbors of v within s: everything in s that does not
    // conflict with v (and is not v itself).
    let comp = |s: &[u32], v: u32| -> Vec<u32> {
        s.iter()
            .copied()
            .filter(|&w| w != v && !conf_adj[v as usize].contains(&w))
            .collect()
    };
    let pivot = p
        .iter()
        .chain(x.iter())
        .copied()
        .max_by_key(|&u| comp(&p, u).len())
        .unwrap();
    // Candidates outside the pivot's complement neighborhood: vertices of p
    // that conflict with the pivot, plus the pivot itself if present.
    let todo: Vec<u32> = p
        .iter()
        .copied()
        .filter(|&v| v == pivot || conf_adj[pivot as usize].contains(&v))
        .collect();
    let mut p = p;
    let mut x = x;
    for v in todo {
        let mut next_r = r.clone();
        next_r.push(v);
        bron_kerbosch(conf_adj, next_r, comp(&p, v), comp(&x, v), out);
        p.retain(|&w| w != v);
        let at = x.partition_point(|&w| w < v);
        x.insert(at, v);
    }
}

/// The full DACC decision-problem input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DaccInstance<N: Ord + Clone, E: Ord + Clone> {
    pub dag: Dag<N, E>,
    pub constraints: ConstraintGraph<E>,
    pub source: N,
    pub target: N,
}

impl<N: Ord + Clone + Debug, E: Ord + Clone + Debug> DaccInstance<N, E> {
    pub fn new(
        dag: Dag<N, E>,
        constraints: ConstraintGraph<E>,
        source: N,
        target: N,
    ) -> Result<Self, DaccError> {
        if source == target {
            return Err(DaccError::SourceEqualsTarget);
        }
        for v in [&source, &target] {
            if !dag.vertices().contains(v) {
                return Err(DaccError::UnknownVertex(format!("{v:?}")));
            }
        }
        if constraints.vertices() != &dag.edge_ids() {
            return Err(DaccError::VertexMismatch);
        }
        Ok(DaccInstance {
            dag,
            constraints,
            source,
            target,
        })
    }
}

/// True iff no conflict pair lies entirely inside `edge_subset`.
pub fn is_valid_subgraph<N: Ord + Clone + Debug, E: Ord + Clone + Debug>(
    instance: &DaccInstance<N, E>,
    edge_subset: &BTreeSet<E>,
) -> Result<bool, DaccError> {
    if !edge_subset.iter().all(|e| instance.dag.edges().contains_key(e)) {
        return Err(DaccError::UnknownEdgeInSubset);
    }
    Ok(instance.constraints.is_independent(edge_subset))
}

/// A shortest directed path from `source` to `target` using only the allowed
/// edges, as a vertex sequence, or `None`.
pub fn st_path<N: Ord + Clone + Debug, E: Ord + Clone + Debug>(
    dag: &Dag<N, E>,
    source: &N,
    target: &N,
    allowed_edges: &BTreeSet<E>,
) -> Option<Vec<N>> {
    st_path_with_edges(dag, source, target, allowed_edges).map(|(nodes, _)| nodes)
}

/// As [`st_path`], additionally returning the edge identities along the path.
pub fn st_path_with_edges<N: Ord + Clone + Debug, E: Ord + Clone + Debug>(
    dag: &Dag<N, E>,
    source: &N,
    target: &N,
    allowed_edges: &BTreeSet<E>,
) -> Option<(Vec<N>, Vec<E>)> {
    if !dag.vertices().contains(source) || !dag.vertices().contains(target) {
        return None;
    }
    if source == target {
        return Some((vec![source.clone()], vec![]));
    }
    let mut succ: BTreeMap<&N, Vec<(&N, &E)>> = BTreeMap::new();
    for (id, (src, dst)) in dag.edges() {
        if allowed_edges.contains(id) {
            succ.entry(src).or_default().push((dst, id));
        }
    }
    let mut pred: BTreeMap<&N, (&N, &E)> = BTreeMap::new();
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        for &(w, id) in succ.get(v).into_iter().flatten() {
            if w != source && !pred.contains_key(w) {
                pred.insert(w, (v, id));
                if w == target {
                    let mut nodes = vec![w.clone()];
                    let mut edges = Vec::new();
                    let mut cur = w;
                    while let Some(&(prev, id)) = pred.get(cur) {
                        nodes.push(prev.clone());
                        edges.push(id.clone());
                        cur = prev;
                    }
                    nodes.reverse();
                    edges.reverse();
                    return Some((nodes, edges));
                }
                queue.push_back(w);
            }
        }
    }
    None
}

/// Outcome of a DACC solve, with the path and the maximal independent set
/// that witnessed reachability.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DaccVerdict<N: Ord + Clone, E: Ord + Clone> {
    pub reachable: bool,
    pub witness_path: Option<Vec<N>>,
    pub witness_edge_set: Option<BTreeSet<E>>,
    /// Number of maximal independent sets examined before deciding.
    pub mis_examined: u64,
}

/// Decide reachability inside some valid subgraph.
///
/// Since adding edges to a valid subgraph cannot destroy a path, it suffices
/// to search only the maximal valid subgraphs, i.e. the maximal independent
/// sets of the constraint graph. Short-circuits on the first reachable one.
pub fn solve_dacc<N: Ord + Clone + Debug, E: Ord + Clone + Debug>(
    instance: &DaccInstance<N, E>,
) -> DaccVerdict<N, E> {
    let mut examined = 0u64;
    for mis in enumerate_mis(&instance.constraints) {
        examined += 1;
        if let Some(path) = st_path(&instance.dag, &instance.source, &instance.target, &mis) {
            return DaccVerdict {
                reachable: true,
                witness_path: Some(path),
                witness_edge_set: Some(mis),
                mis_examined: examined,
            };
        }
    }
    DaccVerdict {
        reachable: false,
        witness_path: None,
        witness_edge_set: None,
        mis_examined: examined,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    type G = Dag<&'static str, (&'static str, &'static str)>;

    fn dag(
        vertices: &[&'static str],
        edges: &[(&'static str, &'static str)],
    ) -> G {
        Dag::new(
            vertices.iter().copied(),
            edges.iter().map(|&(a, b)| ((a, b), (a, b))),
        )
        .unwrap()
    }

    fn mis_sets<E: Ord + Clone + std::fmt::Debug>(
        c: &ConstraintGraph<E>,
    ) -> Vec<BTreeSet<E>> {
        enumerate_mis(c).collect()
    }

    #[test]
    fn cyclic_graph_rejected() {
        let err = Dag::new(["a", "b"], [(("a", "b"), ("a", "b")), (("b", "a"), ("b", "a"))]);
        assert_eq!(err.unwrap_err(), DaccError::Cyclic);
    }

    #[test]
    fn mis_of_edgeless_graph_is_whole_vertex_set() {
        let c = ConstraintGraph::new(["a", "b", "c"]);
        assert_eq!(mis_sets(&c), vec![BTreeSet::from(["a", "b", "c"])]);
    }

    #[test]
    fn mis_of_triangle_is_three_singletons() {
        let c = ConstraintGraph::from_parts(
            ["a", "b", "c"],
            [("a", "b"), ("b", "c"), ("a", "c")],
        )
        .unwrap();
        let sets = mis_sets(&c);
        assert_eq!(
            sets,
            vec![
                BTreeSet::from(["a"]),
                BTreeSet::from(["b"]),
                BTreeSet::from(["c"])
            ]
        );
    }

    #[test]
    fn mis_of_disjoint_triangles_counts_powers_of_three() {
        for k in 0..=4usize {
            let c = crate::reductions::gen_disjoint_triangles(k);
            let sets: Vec<_> = enumerate_mis(&c).collect();
            assert_eq!(sets.len(), 3usize.pow(k as u32));
            for s in &sets {
                assert!(c.is_maximal_independent(s));
            }
        }
    }

    #[test]
    fn mis_enumeration_is_sorted_and_duplicate_free() {
        let c = ConstraintGraph::from_parts(
            ["a", "b", "c", "d", "e"],
            [("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("a", "e")],
        )
        .unwrap();
        let sets = mis_sets(&c);
        let mut sorted = sets.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sets, sorted);
    }

    #[test]
    fn st_path_single_edge() {
        let g = dag(&["s", "t"], &[("s", "t")]);
        let allowed = BTreeSet::from([("s", "t")]);
        assert_eq!(st_path(&g, &"s", &"t", &allowed), Some(vec!["s", "t"]));
    }

    #[test]
    fn st_path_empty_allowed_set() {
        let g = dag(&["s", "t"], &[("s", "t")]);
        assert_eq!(st_path(&g, &"s", &"t", &BTreeSet::new()), None);
    }

    #[test]
    fn st_path_respects_allowed_branch() {
        let g = dag(
            &["s", "a", "b", "t"],
            &[("s", "a"), ("a", "t"), ("s", "b"), ("b", "t")],
        );
        let allowed = BTreeSet::from([("s", "b"), ("b", "t")]);
        assert_eq!(
            st_path(&g, &"s", &"t", &allowed),
            Some(vec!["s", "b", "t"])
        );
    }

    #[test]
    fn valid_subgraph_checks() {
        let g = dag(&["s", "a", "t"], &[("s", "a"), ("a", "t")]);
        let mut c = ConstraintGraph::new(g.edge_ids());
        c.add_conflict(("s", "a"), ("a", "t")).unwrap();
        let inst = DaccInstance::new(g, c, "s", "t").unwrap();
        assert!(is_valid_subgraph(&inst, &BTreeSet::new()).unwrap());
        assert!(!is_valid_subgraph(&inst, &BTreeSet::from([("s", "a"), ("a", "t")])).unwrap());
        assert_eq!(
            is_valid_subgraph(&inst, &BTreeSet::from([("x", "y")])),
            Err(DaccError::UnknownEdgeInSubset)
        );
    }

    #[test]
    fn solve_unconstrained_single_edge() {
        let g = dag(&["s", "t"], &[("s", "t")]);
        let c = ConstraintGraph::new(g.edge_ids());
        let inst = DaccInstance::new(g, c, "s", "t").unwrap();
        let verdict = solve_dacc(&inst);
        assert!(verdict.reachable);
        assert_eq!(verdict.witness_path, Some(vec!["s", "t"]));
    }

    // Oracle-frozen: brute force over all four edge subsets of the two-edge
    // path with the edges in conflict finds no valid connected subset.
    #[test]
    fn solve_conflicting_two_edge_path_unreachable() {
        let g = dag(&["s", "a", "t"], &[("s", "a"), ("a", "t")]);
        let mut c = ConstraintGraph::new(g.edge_ids());
        c.add_conflict(("s", "a"), ("a", "t")).unwrap();
        let inst = DaccInstance::new(g, c, "s", "t").unwrap();
        assert_eq!(crate::oracles::brute_force_dacc(&inst), Ok(false));
        assert!(!solve_dacc(&inst).reachable);
    }

    #[test]
    fn source_equals_target_rejected() {
        let g = dag(&["s", "t"], &[("s", "t")]);
        let c = ConstraintGraph::new(g.edge_ids());
        assert_eq!(
            DaccInstance::new(g, c, "s", "s").unwrap_err(),
            DaccError::SourceEqualsTarget
        );
    }

    #[test]
    fn constraint_vertex_mismatch_rejected() {
        let g = dag(&["s", "t"], &[("s", "t")]);
        let c = ConstraintGraph::new([("s", "x")]);
        assert_eq!(
            DaccInstance::new(g, c, "s", "t").unwrap_err(),
            DaccError::VertexMismatch
        );
    }

    #[test]
    fn reachable_witness_is_valid_and_a_path() {
        let g = dag(
            &["s", "a", "b", "t"],
            &[("s", "a"), ("a", "t"), ("s", "b"), ("b", "t")],
        );
        let mut c = ConstraintGraph::new(g.edge_ids());
        c.add_conflict(("s", "a"), ("a", "t")).unwrap();
        let inst = DaccInstance::new(g, c, "s", "t").unwrap();
        let verdict = solve_dacc(&inst);
        assert!(verdict.reachable);
        let path = verdict.witness_path.unwrap();
        assert_eq!(path.first(), Some(&"s"));
        assert_eq!(path.last(), Some(&"t"));
        let mis = verdict.witness_edge_set.unwrap();
        assert!(is_valid_subgraph(&inst, &mis).unwrap());
        // Consecutive path nodes are joined by allowed edges.
        for w in path.windows(2) {
            assert!(mis.contains(&(w[0], w[1])));
        }
    }
}
