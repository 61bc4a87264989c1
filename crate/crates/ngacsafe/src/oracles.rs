//! Brute-force reference implementations.
//!
//! Deliberately simple and exponential; used by tests and acceptance runs as
//! independent correctness anchors. None of these consult the algorithms they
//! validate. Hard size guards fail fast instead of hanging; the limits can be
//! overridden through the `NGACSAFE_SIZE_GUARD` environment variable (tests
//! only).

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt::Debug;

use thiserror::Error;

use crate::dacc::{ConstraintGraph, DaccInstance};
use crate::model::{access_holds, execute_command, NgacModel, StateDigraph};
use crate::reductions::SimpleGraph;
use crate::safety::{SafetyVerdict, Witness};

pub const MIS_VERTEX_LIMIT: usize = 20;
pub const DACC_EDGE_LIMIT: usize = 20;
pub const SAFETY_ENTITY_LIMIT: usize = 8;
pub const SAFETY_EDGE_LIMIT: usize = 20;
pub const COLORING_VERTEX_LIMIT: usize = 15;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{what} has size {size}, above the oracle limit {limit}")]
pub struct SizeGuard {
    pub what: &'static str,
    pub size: usize,
    pub limit: usize,
}

fn limit(default: usize) -> usize {
    std::env::var("NGACSAFE_SIZE_GUARD")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(default)
}

fn guard(what: &'static str, size: usize, default: usize) -> Result<(), SizeGuard> {
    let limit = limit(default);
    if size > limit {
        Err(SizeGuard { what, size, limit })
    } else {
        Ok(())
    }
}

/// All maximal independent sets, by filtering all 2^n vertex subsets.
pub fn brute_force_mis<E: Ord + Clone + Debug>(
    graph: &ConstraintGraph<E>,
) -> Result<BTreeSet<BTreeSet<E>>, SizeGuard> {
    let verts: Vec<&E> = graph.vertices().iter().collect();
    let n = verts.len();
    guard("constraint graph vertex set", n, MIS_VERTEX_LIMIT)?;
    let mut out = BTreeSet::new();
    for mask in 0u64..(1u64 << n) {
        let set: BTreeSet<E> = verts
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &e)| e.clone())
            .collect();
        if graph.is_maximal_independent(&set) {
            out.insert(set);
        }
    }
    Ok(out)
}

/// True iff some edge subset is a valid subgraph containing a directed
/// source-to-target path. Checks all 2^m subsets with its own reachability
/// search.
pub fn brute_force_dacc<N: Ord + Clone + Debug, E: Ord + Clone + Debug>(
    instance: &DaccInstance<N, E>,
) -> Result<bool, SizeGuard> {
    let edges: Vec<(&E, &(N, N))> = instance.dag.edges().iter().collect();
    let m = edges.len();
    guard("DACC edge set", m, DACC_EDGE_LIMIT)?;
    for mask in 0u64..(1u64 << m) {
        let subset: Vec<&(N, N)> = edges
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &(_, ep))| ep)
            .collect();
        let ids: BTreeSet<E> = edges
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &(id, _))| id.clone())
            .collect();
        if !instance.constraints.is_independent(&ids) {
            continue;
        }
        // Plain reachability over the chosen endpoint pairs.
        let mut seen = BTreeSet::from([&instance.source]);
        let mut queue = VecDeque::from([&instance.source]);
        let mut hit = false;
        while let Some(v) = queue.pop_front() {
            if *v == instance.target {
                hit = true;
                break;
            }
            for (src, dst) in &subset {
                if src == v && seen.insert(dst) {
                    queue.push_back(dst);
                }
            }
        }
        if hit {
            return Ok(true);
        }
    }
    Ok(false)
}

/// Safety by exhaustive breadth-first exploration of the reachable
/// state-digraph space. Unsafe iff some reachable state exhibits an access
/// pair (over the initial users, resources and rights) absent initially;
/// the witness sequence is shortest.
pub fn brute_force_safety(model: &NgacModel) -> Result<SafetyVerdict, SizeGuard> {
    guard(
        "model universe",
        model.universe.len(),
        SAFETY_ENTITY_LIMIT,
    )?;
    let potential_edges: BTreeSet<_> = model
        .initial
        .edges()
        .iter()
        .cloned()
        .chain(model.commands.iter().filter_map(|c| c.created_edge().cloned()))
        .collect();
    guard("potential edge set", potential_edges.len(), SAFETY_EDGE_LIMIT)?;

    let tuples: Vec<_> = model
        .initial
        .users()
        .iter()
        .flat_map(|u| {
            model.initial.resources().iter().flat_map(move |rs| {
                model.rights.iter().map(move |r| (u, rs, r))
            })
        })
        .filter(|(u, rs, r)| !access_holds(&model.initial, u, r, rs))
        .collect();

    let mut states: Vec<StateDigraph> = vec![model.initial.clone()];
    let mut seen: BTreeMap<StateDigraph, usize> = BTreeMap::new();
    seen.insert(model.initial.clone(), 0);
    // parent state index and the command (by index) that produced this state
    let mut parents: Vec<Option<(usize, usize)>> = vec![None];
    let mut frontier = VecDeque::from([0usize]);

    while let Some(idx) = frontier.pop_front() {
        let state = states[idx].clone();
        for (u, rs, r) in &tuples {
            if access_holds(&state, u, r, rs) {
                let mut sequence = Vec::new();
                let mut cur = idx;
                while let Some((prev, ci)) = parents[cur] {
                    let cmd = &model.commands[ci];
                    sequence.push((cmd.clone(), cmd.op.target.clone()));
                    cur = prev;
                }
                sequence.reverse();
                return Ok(SafetyVerdict {
                    safe: false,
                    witness: Some(Witness {
                        user: (*u).clone(),
                        resource: (*rs).clone(),
                        right: (*r).clone(),
                        sequence,
                    }),
                });
            }
        }
        for (ci, cmd) in model.commands.iter().enumerate() {
            let next = execute_command(&state, cmd, &cmd.op.target);
            if next != state && !seen.contains_key(&next) {
                let ni = states.len();
                states.push(next.clone());
                seen.insert(next, ni);
                parents.push(Some((idx, ci)));
                frontier.push_back(ni);
            }
        }
    }
    Ok(SafetyVerdict {
        safe: true,
        witness: None,
    })
}

/// The set of reachable state digraphs under the model's commands.
/// Shares the size guards of [`brute_force_safety`].
pub fn reachable_states(model: &NgacModel) -> Result<BTreeSet<StateDigraph>, SizeGuard> {
    guard("model universe", model.universe.len(), SAFETY_ENTITY_LIMIT)?;
    let potential_edges: BTreeSet<_> = model
        .initial
        .edges()
        .iter()
        .cloned()
        .chain(model.commands.iter().filter_map(|c| c.created_edge().cloned()))
        .collect();
    guard("potential edge set", potential_edges.len(), SAFETY_EDGE_LIMIT)?;

    let mut seen = BTreeSet::from([model.initial.clone()]);
    let mut frontier = VecDeque::from([model.initial.clone()]);
    while let Some(state) = frontier.pop_front() {
        for cmd in &model.commands {
            let next = execute_command(&state, cmd, &cmd.op.target);
            if !seen.contains(&next) {
                seen.insert(next.clone());
                frontier.push_back(next);
            }
        }
    }
    Ok(seen)
}

/// True iff some of the 3^n color assignments is a proper coloring.
pub fn brute_force_3col(g: &SimpleGraph) -> Result<bool, SizeGuard> {
    let n = g.vertex_count();
    guard("graph vertex set", n, COLORING_VERTEX_LIMIT)?;
    let mut colors = vec![0u8; n];
    loop {
        if g.edge_indices()
            .all(|(i, j)| colors[i] != colors[j])
        {
            return Ok(true);
        }
        // next assignment in base 3
        let mut i = 0;
        loop {
            if i == n {
                return Ok(false);
            }
            colors[i] += 1;
            if colors[i] < 3 {
                break;
            }
            colors[i] = 0;
            i += 1;
        }
    }
}
