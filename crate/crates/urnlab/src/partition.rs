//! Graph exploration process on the flexible subgraph.
//!
//! Starting from a seed node, membership in the four sets `(P1, P2, D1, D2)`
//! is propagated along in-neighbourhoods until the flexible set is covered:
//! in-neighbours of `P1`/`D2` nodes land in `P1` (preferential) or `D1`
//! (de-preferential), and in-neighbours of `D1`/`P2` nodes land in `P2` or
//! `D2`. The graph admits a partition when the four sets stay disjoint and a
//! confirmation sweep causes no reassignment.
//!
//! For stubborn-free graphs in which every flexible node is Polya type, the
//! existence of such a partition is equivalent to `I − W_F` being singular;
//! [`kernel_oracle`] decides that side in exact rational arithmetic.
//!
//! The exploration runs on the subgraph induced by the flexible set, with
//! in-neighbourhoods restricted accordingly; stubborn nodes never
//! participate.

use std::collections::BTreeSet;

use serde::Serialize;
use thiserror::Error;

use crate::netmodel::{DerivedMatrices, NodeId, NodeKind, Sampling};
use crate::spectral;

#[derive(Debug, Error, PartialEq)]
pub enum PartitionError {
    #[error("flexible subgraph is not strongly connected")]
    NotStronglyConnected,
    #[error("start node {0} is stubborn or unknown")]
    InvalidStart(NodeId),
    #[error("kernel oracle precondition violated: {0}")]
    OraclePrecondition(String),
}

/// Why the exploration rejected the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum FailureReason {
    /// Two of the four sets intersected during the propagation loop.
    DisjointnessViolated,
    /// The confirmation sweep moved a node between sibling sets.
    ReassignmentDetected,
}

/// The four sets, as sorted user ids.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PartitionSets {
    pub p1: Vec<NodeId>,
    pub p2: Vec<NodeId>,
    pub d1: Vec<NodeId>,
    pub d2: Vec<NodeId>,
}

impl PartitionSets {
    /// The role permutation `(P1↔P2, D1↔D2)`.
    pub fn role_swapped(&self) -> PartitionSets {
        PartitionSets {
            p1: self.p2.clone(),
            p2: self.p1.clone(),
            d1: self.d2.clone(),
            d2: self.d1.clone(),
        }
    }

    /// Equal up to the role permutation.
    pub fn equivalent(&self, other: &PartitionSets) -> bool {
        self == other || &self.role_swapped() == other
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum PartitionResult {
    Admits(PartitionSets),
    NoPartition(FailureReason),
}

impl PartitionResult {
    pub fn admits(&self) -> bool {
        matches!(self, PartitionResult::Admits(_))
    }

    pub fn sets(&self) -> Option<&PartitionSets> {
        match self {
            PartitionResult::Admits(sets) => Some(sets),
            PartitionResult::NoPartition(_) => None,
        }
    }
}

/// Tarjan's strongly connected components; returned in reverse topological
/// order (sinks first).
pub(crate) fn tarjan_scc(adj: &[Vec<usize>]) -> Vec<Vec<usize>> {
    struct State<'a> {
        adj: &'a [Vec<usize>],
        index: usize,
        indices: Vec<Option<usize>>,
        lowlink: Vec<usize>,
        on_stack: Vec<bool>,
        stack: Vec<usize>,
        comps: Vec<Vec<usize>>,
    }

    fn connect(v: usize, st: &mut State) {
        st.indices[v] = Some(st.index);
        st.lowlink[v] = st.index;
        st.index += 1;
        st.stack.push(v);
        st.on_stack[v] = true;
        for &w in st.adj[v].iter() {
            if st.indices[w].is_none() {
                connect(w, st);
                st.lowlink[v] = st.lowlink[v].min(st.lowlink[w]);
            } else if st.on_stack[w] {
                st.lowlink[v] = st.lowlink[v].min(st.indices[w].unwrap());
            }
        }
        if st.lowlink[v] == st.indices[v].unwrap() {
            let mut comp = Vec::new();
            loop {
                let w = st.stack.pop().expect("stack underflow");
                st.on_stack[w] = false;
                comp.push(w);
                if w == v {
                    break;
                }
            }
            comp.sort_unstable();
            st.comps.push(comp);
        }
    }

    let n = adj.len();
    let mut st = State {
        adj,
        index: 0,
        indices: vec![None; n],
        lowlink: vec![0; n],
        on_stack: vec![false; n],
        stack: Vec::new(),
        comps: Vec::new(),
    };
    for v in 0..n {
        if st.indices[v].is_none() {
            connect(v, &mut st);
        }
    }
    st.comps
}

/// Induced subgraph over a set of internal node indices, with
/// in-neighbourhoods restricted to the members.
pub(crate) struct Subgraph {
    /// Internal indices of the members, ascending.
    pub members: Vec<usize>,
    /// In-neighbour positions (into `members`) per member position.
    in_lists: Vec<Vec<usize>>,
    out_lists: Vec<Vec<usize>>,
    depref: Vec<bool>,
}

impl Subgraph {
    pub fn new(dm: &DerivedMatrices, members: &[usize]) -> Subgraph {
        let members: Vec<usize> = {
            let mut m = members.to_vec();
            m.sort_unstable();
            m
        };
        let pos_of = |internal: usize| members.binary_search(&internal).ok();
        let mut in_lists = vec![Vec::new(); members.len()];
        let mut out_lists = vec![Vec::new(); members.len()];
        for (pos, &node) in members.iter().enumerate() {
            for &nb in dm.in_neighbors(node) {
                if let Some(nb_pos) = pos_of(nb) {
                    in_lists[pos].push(nb_pos);
                }
            }
            for &nb in dm.out_neighbors(node) {
                if let Some(nb_pos) = pos_of(nb) {
                    out_lists[pos].push(nb_pos);
                }
            }
        }
        let depref = members
            .iter()
            .map(|&node| dm.sampling(node) == Sampling::DePreferential)
            .collect();
        Subgraph {
            members,
            in_lists,
            out_lists,
            depref,
        }
    }

    /// Flexible subgraph of the network.
    pub fn flexible(dm: &DerivedMatrices) -> Subgraph {
        let members: Vec<usize> = (0..dm.f_len()).collect();
        Subgraph::new(dm, &members)
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_strongly_connected(&self) -> bool {
        !self.members.is_empty() && tarjan_scc(&self.out_lists).len() == 1
    }

    /// One round of the four propagation steps; returns whether the four
    /// sets are still mutually disjoint afterwards.
    fn sweep(&self, sets: &mut [BTreeSet<usize>; 4]) -> bool {
        // Feeding rules: in-neighbours of P1 and D2 go to (P1, D1);
        // in-neighbours of D1 and P2 go to (P2, D2).
        for (source, pref_target, depref_target) in
            [(P1, P1, D1), (D1, P2, D2), (D2, P1, D1), (P2, P2, D2)]
        {
            let additions: Vec<usize> = sets[source]
                .iter()
                .flat_map(|&pos| self.in_lists[pos].iter().copied())
                .collect();
            for nb in additions {
                let target = if self.depref[nb] { depref_target } else { pref_target };
                sets[target].insert(nb);
            }
        }
        for a in 0..4 {
            for b in (a + 1)..4 {
                if !sets[a].is_disjoint(&sets[b]) {
                    return false;
                }
            }
        }
        true
    }

    /// Runs the exploration from the given member position.
    pub fn explore(&self, start_pos: usize) -> Result<ExploreOutcome, PartitionError> {
        if !self.is_strongly_connected() {
            return Err(PartitionError::NotStronglyConnected);
        }
        let mut sets: [BTreeSet<usize>; 4] = Default::default();
        let seed_set = if self.depref[start_pos] { D1 } else { P1 };
        sets[seed_set].insert(start_pos);

        let total = self.len();
        loop {
            let covered: usize = sets.iter().map(|s| s.len()).sum();
            if covered >= total {
                break;
            }
            if !self.sweep(&mut sets) {
                return Ok(ExploreOutcome::Failed(FailureReason::DisjointnessViolated));
            }
            let now: usize = sets.iter().map(|s| s.len()).sum();
            debug_assert!(now > covered, "coverage must grow on a strongly connected graph");
        }

        // Confirmation round: membership must be a fixpoint.
        if !self.sweep(&mut sets) {
            return Ok(ExploreOutcome::Failed(FailureReason::ReassignmentDetected));
        }
        Ok(ExploreOutcome::Admits(sets))
    }
}

const P1: usize = 0;
const P2: usize = 1;
const D1: usize = 2;
const D2: usize = 3;

pub(crate) enum ExploreOutcome {
    Admits([BTreeSet<usize>; 4]),
    Failed(FailureReason),
}

impl ExploreOutcome {
    pub fn admits(&self) -> bool {
        matches!(self, ExploreOutcome::Admits(_))
    }
}

fn to_public(dm: &DerivedMatrices, sub: &Subgraph, outcome: ExploreOutcome) -> PartitionResult {
    match outcome {
        ExploreOutcome::Failed(reason) => PartitionResult::NoPartition(reason),
        ExploreOutcome::Admits(sets) => {
            let ids = |set: &BTreeSet<usize>| -> Vec<NodeId> {
                let mut out: Vec<NodeId> = set
                    .iter()
                    .map(|&pos| dm.user_id(sub.members[pos]))
                    .collect();
                out.sort_unstable();
                out
            };
            PartitionResult::Admits(PartitionSets {
                p1: ids(&sets[P1]),
                p2: ids(&sets[P2]),
                d1: ids(&sets[D1]),
                d2: ids(&sets[D2]),
            })
        }
    }
}

/// Runs the exploration on the flexible subgraph from the given user id.
pub fn explore_partition(
    dm: &DerivedMatrices,
    start: NodeId,
) -> Result<PartitionResult, PartitionError> {
    let internal = dm
        .internal_of_user(start)
        .filter(|&i| dm.is_flexible(i))
        .ok_or(PartitionError::InvalidStart(start))?;
    let sub = Subgraph::flexible(dm);
    let start_pos = sub
        .members
        .binary_search(&internal)
        .map_err(|_| PartitionError::InvalidStart(start))?;
    let outcome = sub.explore(start_pos)?;
    Ok(to_public(dm, &sub, outcome))
}

/// Runs the exploration from every flexible start node and checks that all
/// runs agree: same admits flag, and admitting set quadruples equal up to
/// the role permutation.
pub fn partition_invariant_check(dm: &DerivedMatrices) -> Result<bool, PartitionError> {
    let sub = Subgraph::flexible(dm);
    let mut reference: Option<PartitionResult> = None;
    for pos in 0..sub.len() {
        let result = to_public(dm, &sub, sub.explore(pos)?);
        match &reference {
            None => reference = Some(result),
            Some(r) => {
                let agree = match (r, &result) {
                    (PartitionResult::Admits(a), PartitionResult::Admits(b)) => a.equivalent(b),
                    (PartitionResult::NoPartition(_), PartitionResult::NoPartition(_)) => true,
                    _ => false,
                };
                if !agree {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// Exact-arithmetic cross-check: returns true iff `I − W_F` is singular.
///
/// Only meaningful (and only permitted) in the regime where the equivalence
/// with the exploration process holds: every flexible node Polya type, no
/// stubborn nodes, flexible subgraph strongly connected.
pub fn kernel_oracle(dm: &DerivedMatrices) -> Result<bool, PartitionError> {
    if dm.stubborn_len() != 0 {
        return Err(PartitionError::OraclePrecondition(
            "stubborn nodes present".into(),
        ));
    }
    if (0..dm.f_len()).any(|i| dm.kind(i) != NodeKind::Polya) {
        return Err(PartitionError::OraclePrecondition(
            "non-Polya flexible node present".into(),
        ));
    }
    let sub = Subgraph::flexible(dm);
    if !sub.is_strongly_connected() {
        return Err(PartitionError::NotStronglyConnected);
    }
    let kernel = spectral::kernel_basis_exact(&dm.i_minus_w_f_exact());
    Ok(!kernel.is_empty())
}

/// Edge-consistency check for an admitting partition (the reduced-graph
/// rules): in-neighbours of `P1`/`D2` members must sit in `P1`/`D1`, and
/// in-neighbours of `D1`/`P2` members in `P2`/`D2`.
pub fn edge_consistent(dm: &DerivedMatrices, sets: &PartitionSets) -> bool {
    let find = |id: NodeId| -> Option<usize> { dm.internal_of_user(id) };
    let p1: BTreeSet<usize> = sets.p1.iter().filter_map(|&id| find(id)).collect();
    let p2: BTreeSet<usize> = sets.p2.iter().filter_map(|&id| find(id)).collect();
    let d1: BTreeSet<usize> = sets.d1.iter().filter_map(|&id| find(id)).collect();
    let d2: BTreeSet<usize> = sets.d2.iter().filter_map(|&id| find(id)).collect();
    let check = |members: &BTreeSet<usize>,
                 pref_home: &BTreeSet<usize>,
                 depref_home: &BTreeSet<usize>| {
        members.iter().all(|&node| {
            dm.in_neighbors(node).iter().all(|&nb| {
                if !dm.is_flexible(nb) {
                    return true;
                }
                match dm.sampling(nb) {
                    Sampling::Preferential => pref_home.contains(&nb),
                    Sampling::DePreferential => depref_home.contains(&nb),
                }
            })
        })
    };
    check(&p1, &p1, &d1) && check(&d2, &p1, &d1) && check(&d1, &p2, &d2) && check(&p2, &p2, &d2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{derive, NetworkSpec, NodeSpec, Sampling};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn polya_node(id: NodeId, sampling: Sampling) -> NodeSpec {
        NodeSpec {
            id,
            sampling,
            m: 1,
            alpha: 1,
            beta: 1,
            w0: 1,
            b0: 1,
        }
    }

    /// Alternating 8-cycle 1→5→2→6→3→7→4→8→1 with preferential ids 1..=4.
    fn alternating_eight_cycle() -> NetworkSpec {
        let nodes = (1..=8)
            .map(|id| {
                let sampling = if id <= 4 {
                    Sampling::Preferential
                } else {
                    Sampling::DePreferential
                };
                polya_node(id, sampling)
            })
            .collect();
        let edges = vec![
            (1, 5),
            (5, 2),
            (2, 6),
            (6, 3),
            (3, 7),
            (7, 4),
            (4, 8),
            (8, 1),
        ];
        NetworkSpec { nodes, edges }
    }

    /// 8-cycle 1→2→…→8→1 with the single de-preferential node 8.
    fn eight_cycle_one_depref() -> NetworkSpec {
        let nodes = (1..=8)
            .map(|id| {
                let sampling = if id == 8 {
                    Sampling::DePreferential
                } else {
                    Sampling::Preferential
                };
                polya_node(id, sampling)
            })
            .collect();
        let edges = (1..=8).map(|id| (id, id % 8 + 1)).collect();
        NetworkSpec { nodes, edges }
    }

    /// Simple cycle 1→2→…→n→1 with the given de-preferential ids.
    fn cycle(n: u32, depref: &[u32]) -> NetworkSpec {
        let nodes = (1..=n)
            .map(|id| {
                let sampling = if depref.contains(&id) {
                    Sampling::DePreferential
                } else {
                    Sampling::Preferential
                };
                polya_node(id, sampling)
            })
            .collect();
        let edges = (1..=n).map(|id| (id, id % n + 1)).collect();
        NetworkSpec { nodes, edges }
    }

    #[test]
    fn alternating_cycle_partition_sets() {
        let dm = derive(&alternating_eight_cycle()).unwrap();
        let result = explore_partition(&dm, 1).unwrap();
        let sets = result.sets().expect("admits");
        assert_eq!(sets.p1, vec![1, 3]);
        assert_eq!(sets.p2, vec![2, 4]);
        assert_eq!(sets.d1, vec![6, 8]);
        assert_eq!(sets.d2, vec![5, 7]);
        assert!(edge_consistent(&dm, sets));
        assert!(partition_invariant_check(&dm).unwrap());
    }

    #[test]
    fn single_depref_cycle_has_no_partition() {
        let dm = derive(&eight_cycle_one_depref()).unwrap();
        let result = explore_partition(&dm, 1).unwrap();
        assert_eq!(
            result,
            PartitionResult::NoPartition(FailureReason::ReassignmentDetected)
        );
        assert!(partition_invariant_check(&dm).unwrap());
    }

    #[test]
    fn all_preferential_collapses_to_p1() {
        let dm = derive(&cycle(5, &[])).unwrap();
        let result = explore_partition(&dm, 3).unwrap();
        let sets = result.sets().expect("admits");
        assert_eq!(sets.p1, vec![1, 2, 3, 4, 5]);
        assert!(sets.p2.is_empty() && sets.d1.is_empty() && sets.d2.is_empty());
    }

    #[test]
    fn invalid_start_rejected() {
        let spec = NetworkSpec {
            nodes: vec![
                polya_node(1, Sampling::Preferential),
                polya_node(2, Sampling::Preferential),
                polya_node(3, Sampling::Preferential),
            ],
            edges: vec![(1, 2), (2, 1), (3, 1)],
        };
        let dm = derive(&spec).unwrap();
        assert_eq!(
            explore_partition(&dm, 3).unwrap_err(),
            PartitionError::InvalidStart(3)
        );
        assert_eq!(
            explore_partition(&dm, 9).unwrap_err(),
            PartitionError::InvalidStart(9)
        );
    }

    #[test]
    fn not_strongly_connected_rejected() {
        // F = {2, 3} with 2→3 but no path back.
        let spec = NetworkSpec {
            nodes: vec![
                polya_node(1, Sampling::Preferential),
                polya_node(2, Sampling::Preferential),
                polya_node(3, Sampling::Preferential),
            ],
            edges: vec![(1, 2), (1, 3), (2, 3)],
        };
        let dm = derive(&spec).unwrap();
        assert_eq!(
            explore_partition(&dm, 2).unwrap_err(),
            PartitionError::NotStronglyConnected
        );
    }

    #[test]
    fn cycle_parity_law() {
        // On a directed n-cycle a partition exists iff |D| is even.
        for n in 2..=10u32 {
            for mask in 0u32..(1 << n) {
                let depref: Vec<u32> = (1..=n).filter(|id| mask & (1 << (id - 1)) != 0).collect();
                let parity_even = depref.len().is_multiple_of(2);
                let dm = derive(&cycle(n, &depref)).unwrap();
                let admits = explore_partition(&dm, 1).unwrap().admits();
                assert_eq!(
                    admits, parity_even,
                    "cycle n={n} depref={depref:?}: admits={admits}"
                );
            }
        }
    }

    #[test]
    fn even_cycle_alternating_closed_form() {
        // Alternating labels put k de-preferential nodes on a 2k-cycle, so
        // the closed-form split needs k even.
        for k in [2u32, 4, 6] {
            let n = 2 * k;
            let depref: Vec<u32> = (1..=n).filter(|id| id % 2 == 0).collect();
            let dm = derive(&cycle(n, &depref)).unwrap();
            let result = explore_partition(&dm, 1).unwrap();
            let sets = result.sets().expect("even count admits");
            assert!(edge_consistent(&dm, sets));
            assert!(partition_invariant_check(&dm).unwrap());
            // Preferential odd ids split alternately around the cycle.
            let p1: Vec<u32> = (1..=n).step_by(4).collect();
            assert_eq!(sets.p1, p1);
        }
    }

    #[test]
    fn kernel_oracle_matches_exploration_on_cycles() {
        for n in 2..=8u32 {
            for mask in 0u32..(1 << n) {
                let depref: Vec<u32> = (1..=n).filter(|id| mask & (1 << (id - 1)) != 0).collect();
                let dm = derive(&cycle(n, &depref)).unwrap();
                let admits = explore_partition(&dm, 1).unwrap().admits();
                let singular = kernel_oracle(&dm).unwrap();
                assert_eq!(admits, singular, "n={n} depref={depref:?}");
            }
        }
    }

    #[test]
    fn kernel_oracle_enforces_preconditions() {
        let spec = NetworkSpec {
            nodes: vec![
                polya_node(1, Sampling::Preferential),
                polya_node(2, Sampling::Preferential),
                polya_node(3, Sampling::Preferential),
            ],
            edges: vec![(1, 2), (2, 1), (3, 1)],
        };
        let dm = derive(&spec).unwrap();
        assert!(matches!(
            kernel_oracle(&dm),
            Err(PartitionError::OraclePrecondition(_))
        ));

        let mut friedman = cycle(2, &[]);
        friedman.nodes[0].m = 2;
        friedman.nodes[0].alpha = 1;
        friedman.nodes[0].beta = 1;
        let dm = derive(&friedman).unwrap();
        assert!(matches!(
            kernel_oracle(&dm),
            Err(PartitionError::OraclePrecondition(_))
        ));
    }

    /// Random strongly connected all-Polya stubborn-free digraph, |F| ≤ 6.
    pub(crate) fn random_sc_polya_spec(rng: &mut StdRng) -> NetworkSpec {
        loop {
            let n: u32 = rng.gen_range(2..=6);
            let mut edges = Vec::new();
            for src in 1..=n {
                for dst in 1..=n {
                    if src != dst && rng.gen_bool(0.4) {
                        edges.push((src, dst));
                    }
                }
            }
            let nodes: Vec<NodeSpec> = (1..=n)
                .map(|id| {
                    let m = rng.gen_range(1..=3);
                    NodeSpec {
                        id,
                        sampling: if rng.gen_bool(0.5) {
                            Sampling::Preferential
                        } else {
                            Sampling::DePreferential
                        },
                        m,
                        alpha: m,
                        beta: m,
                        w0: 1,
                        b0: 1,
                    }
                })
                .collect();
            let spec = NetworkSpec { nodes, edges };
            if !crate::netmodel::validate(&spec).is_valid() {
                continue;
            }
            let Ok(dm) = derive(&spec) else { continue };
            if dm.stubborn_len() == 0 && Subgraph::flexible(&dm).is_strongly_connected() {
                return spec;
            }
        }
    }

    #[test]
    fn kernel_equivalence_random_digraphs() {
        let mut rng = StdRng::seed_from_u64(2024);
        for _ in 0..120 {
            let spec = random_sc_polya_spec(&mut rng);
            let dm = derive(&spec).unwrap();
            let result = explore_partition(&dm, dm.user_id(0)).unwrap();
            let singular = kernel_oracle(&dm).unwrap();
            assert_eq!(result.admits(), singular, "spec: {spec:?}");
            assert!(partition_invariant_check(&dm).unwrap());
            if let PartitionResult::Admits(sets) = result {
                assert!(edge_consistent(&dm, &sets));
            }
        }
    }
}
