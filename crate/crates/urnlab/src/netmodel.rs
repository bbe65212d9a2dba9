//! Network specification and the derived matrix family.
//!
//! A [`NetworkSpec`] is the immutable problem statement: the directed graph,
//! per-node sampling labels, reinforcement parameters and initial urn
//! contents. [`DerivedMatrices`] holds everything built from it: the
//! flexible/stubborn split, the scaled adjacency `Ã = M A M̄⁻¹`, the balance
//! diagonal `B`, the sign diagonal and the interaction matrix `W = 𝓘 B Ã`
//! whose spectrum controls limits and fluctuations.
//!
//! All entries of the derived matrices are rational in the integer inputs,
//! so they are computed exactly and materialized to `f64` once. Internally
//! nodes are reordered so that flexible nodes (positive in-degree) come
//! first; reports translate back to user ids.

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use thiserror::Error;

/// Exact rational scalar used for all derived-matrix entries.
pub type Rat = BigRational;

/// User-facing node identifier (positive integer from the spec file).
pub type NodeId = u32;

pub(crate) fn rat(num: i64, den: i64) -> Rat {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// How a node samples a ball from its own urn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampling {
    /// White is drawn with probability equal to the white fraction.
    Preferential,
    /// White is drawn with probability equal to the black fraction.
    DePreferential,
}

impl Sampling {
    /// Diagonal entry of the sign matrix: +1 preferential, -1 de-preferential.
    pub fn sign(self) -> i8 {
        match self {
            Sampling::Preferential => 1,
            Sampling::DePreferential => -1,
        }
    }
}

/// Reinforcement classification of a node.
///
/// `Polya` reinforces the drawn colour only (`R = m·I`); `NonPolya` mixes
/// colours (`0 < α+β < 2m`); `AntiPolya` (`α = β = 0`) always reinforces the
/// opposite colour and sits outside the convergence theory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeKind {
    Polya,
    NonPolya,
    AntiPolya,
}

/// One node of the network specification.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeSpec {
    pub id: NodeId,
    pub sampling: Sampling,
    /// Balls added to each out-neighbour per draw (row sum of `R`).
    pub m: u64,
    /// White balls added on a white draw.
    pub alpha: u64,
    /// Black balls added on a black draw.
    pub beta: u64,
    /// Initial white balls.
    pub w0: u64,
    /// Initial black balls.
    pub b0: u64,
}

impl NodeSpec {
    pub fn kind(&self) -> NodeKind {
        if self.alpha == self.m && self.beta == self.m {
            NodeKind::Polya
        } else if self.alpha + self.beta == 0 {
            NodeKind::AntiPolya
        } else {
            NodeKind::NonPolya
        }
    }

    /// Initial white fraction `w0 / (w0 + b0)`.
    pub fn z0(&self) -> f64 {
        self.w0 as f64 / (self.w0 + self.b0) as f64
    }
}

/// Immutable problem statement: nodes plus directed edges `source → target`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub nodes: Vec<NodeSpec>,
    pub edges: Vec<(NodeId, NodeId)>,
}

/// Structural errors raised while reading a spec document.
#[derive(Debug, Error)]
pub enum ParseError {
    #[error("malformed document: {0}")]
    Malformed(#[from] serde_json::Error),
    #[error("node list is empty")]
    EmptyNodeList,
    #[error("node id 0 is not allowed (ids are positive integers)")]
    NonPositiveId,
    #[error("duplicate node id {0}")]
    DuplicateNodeId(NodeId),
    #[error("edge ({0}, {1}) references unknown node {2}")]
    UnknownEndpoint(NodeId, NodeId, NodeId),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(NodeId, NodeId),
}

/// A single rule violation found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    /// `d_in = d_out = 0`.
    IsolatedNode(NodeId),
    /// The node's only in-neighbour is itself.
    SingleSelfLoop(NodeId),
    /// `w0 + b0 = 0`, so the initial proportion is undefined.
    EmptyUrn(NodeId),
    /// `m = 0`: the node would add no balls at all.
    ZeroRowSum(NodeId),
    AlphaOutOfRange(NodeId),
    BetaOutOfRange(NodeId),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::IsolatedNode(id) => write!(f, "node {id}: isolated (no in- or out-edges)"),
            Violation::SingleSelfLoop(id) => {
                write!(f, "node {id}: single self-loop (only in-neighbour is itself)")
            }
            Violation::EmptyUrn(id) => write!(f, "node {id}: initial urn is empty (w0 + b0 = 0)"),
            Violation::ZeroRowSum(id) => write!(f, "node {id}: m must be positive"),
            Violation::AlphaOutOfRange(id) => write!(f, "node {id}: alpha exceeds m"),
            Violation::BetaOutOfRange(id) => write!(f, "node {id}: beta exceeds m"),
        }
    }
}

/// A non-fatal finding: the spec is usable but outside the proven theory.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Warning {
    /// `α = β = 0`: convergence theory does not cover this reinforcement.
    AntiPolya(NodeId),
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::AntiPolya(id) => write!(
                f,
                "node {id}: anti-Polya reinforcement (alpha = beta = 0), convergence theory not covered"
            ),
        }
    }
}

/// Outcome of [`validate`]: all violations and warnings, never an error.
#[derive(Debug, Clone, Default, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("invalid spec: {}", .0.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Invalid(ValidationReport),
}

/// Parses a spec document (JSON) and checks its structural identity:
/// unique positive ids, known edge endpoints, no duplicate edges,
/// non-empty node list. Semantic rules are left to [`validate`].
pub fn parse_spec(text: &str) -> Result<NetworkSpec, ParseError> {
    let spec: NetworkSpec = serde_json::from_str(text)?;
    if spec.nodes.is_empty() {
        return Err(ParseError::EmptyNodeList);
    }
    let mut seen = BTreeSet::new();
    for node in &spec.nodes {
        if node.id == 0 {
            return Err(ParseError::NonPositiveId);
        }
        if !seen.insert(node.id) {
            return Err(ParseError::DuplicateNodeId(node.id));
        }
    }
    let mut edge_seen = BTreeSet::new();
    for &(src, dst) in &spec.edges {
        for endpoint in [src, dst] {
            if !seen.contains(&endpoint) {
                return Err(ParseError::UnknownEndpoint(src, dst, endpoint));
            }
        }
        if !edge_seen.insert((src, dst)) {
            return Err(ParseError::DuplicateEdge(src, dst));
        }
    }
    Ok(spec)
}

/// Serializes a spec in canonical form: sorted object keys, nodes ordered
/// by id, edges lexicographic. `parse_spec(render(s))` reproduces `s` up to
/// that ordering, and derived matrices are bit-for-bit identical.
pub fn render(spec: &NetworkSpec) -> String {
    let mut canonical = spec.clone();
    canonical.nodes.sort_by_key(|n| n.id);
    canonical.edges.sort_unstable();
    // serde_json maps are BTree-backed, so object keys come out sorted.
    let value = serde_json::to_value(&canonical).expect("spec serializes");
    serde_json::to_string(&value).expect("value serializes")
}

/// Checks the semantic rules: no isolated nodes, no single-self-loop nodes,
/// non-empty initial urns, `0 ≤ α, β ≤ m`, `m ≥ 1`. Anti-Polya nodes are
/// reported as warnings, not violations.
pub fn validate(spec: &NetworkSpec) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut in_neighbors: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    let mut out_degree: BTreeMap<NodeId, usize> = BTreeMap::new();
    for &(src, dst) in &spec.edges {
        in_neighbors.entry(dst).or_default().insert(src);
        *out_degree.entry(src).or_default() += 1;
    }
    for node in &spec.nodes {
        let id = node.id;
        let ins = in_neighbors.get(&id);
        let d_in = ins.map_or(0, |s| s.len());
        let d_out = out_degree.get(&id).copied().unwrap_or(0);
        if d_in == 0 && d_out == 0 {
            report.violations.push(Violation::IsolatedNode(id));
        }
        if d_in > 0 && ins.is_some_and(|s| s.len() == 1 && s.contains(&id)) {
            report.violations.push(Violation::SingleSelfLoop(id));
        }
        if node.w0 + node.b0 == 0 {
            report.violations.push(Violation::EmptyUrn(id));
        }
        if node.m == 0 {
            report.violations.push(Violation::ZeroRowSum(id));
        } else {
            if node.alpha > node.m {
                report.violations.push(Violation::AlphaOutOfRange(id));
            }
            if node.beta > node.m {
                report.violations.push(Violation::BetaOutOfRange(id));
            }
        }
        if node.kind() == NodeKind::AntiPolya {
            report.warnings.push(Warning::AntiPolya(id));
        }
    }
    report
}

/// Splits the node set by in-degree: flexible (`d_in > 0`) and stubborn
/// (`d_in = 0`). Both lists are sorted by user id.
pub fn classify_nodes(spec: &NetworkSpec) -> (Vec<NodeId>, Vec<NodeId>) {
    let mut has_in: BTreeSet<NodeId> = BTreeSet::new();
    for &(_, dst) in &spec.edges {
        has_in.insert(dst);
    }
    let mut flexible = Vec::new();
    let mut stubborn = Vec::new();
    for node in &spec.nodes {
        if has_in.contains(&node.id) {
            flexible.push(node.id);
        } else {
            stubborn.push(node.id);
        }
    }
    flexible.sort_unstable();
    stubborn.sort_unstable();
    (flexible, stubborn)
}

/// Per-node reinforcement kinds, in document order.
pub fn node_kinds(spec: &NetworkSpec) -> Vec<(NodeId, NodeKind)> {
    spec.nodes.iter().map(|n| (n.id, n.kind())).collect()
}

/// Everything the analysis needs, in the internal ordering: flexible nodes
/// first (ascending user id), then stubborn nodes (ascending user id).
///
/// Exact rational copies of `Ã` and `W` are kept alongside their `f64`
/// materializations so that singularity questions can be answered crisply.
#[derive(Debug, Clone)]
pub struct DerivedMatrices {
    n: usize,
    f_len: usize,
    user_ids: Vec<NodeId>,
    doc_pos: Vec<usize>,
    internal_of_doc: Vec<usize>,
    sampling: Vec<Sampling>,
    kinds: Vec<NodeKind>,
    m: Vec<u64>,
    alpha: Vec<u64>,
    beta: Vec<u64>,
    w0: Vec<u64>,
    b0: Vec<u64>,
    in_neighbors: Vec<Vec<usize>>,
    out_neighbors: Vec<Vec<usize>>,
    mbar: Vec<u64>,
    a_frac: Vec<Rat>,
    b_frac: Vec<Rat>,
    b_diag: Vec<Rat>,
    i_signs: Vec<i8>,
    a: DMatrix<f64>,
    a_tilde: DMatrix<f64>,
    a_tilde_exact: Vec<Vec<Rat>>,
    w: DMatrix<f64>,
    w_exact: Vec<Vec<Rat>>,
}

impl DerivedMatrices {
    /// Total node count `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of flexible nodes; internal indices `0..f_len()` are flexible.
    pub fn f_len(&self) -> usize {
        self.f_len
    }

    pub fn stubborn_len(&self) -> usize {
        self.n - self.f_len
    }

    pub fn is_flexible(&self, internal: usize) -> bool {
        internal < self.f_len
    }

    /// User id of an internal index.
    pub fn user_id(&self, internal: usize) -> NodeId {
        self.user_ids[internal]
    }

    /// Internal index of a user id, if the id exists.
    pub fn internal_of_user(&self, id: NodeId) -> Option<usize> {
        self.user_ids.iter().position(|&u| u == id)
    }

    /// Flexible user ids in internal order.
    pub fn flexible_ids(&self) -> &[NodeId] {
        &self.user_ids[..self.f_len]
    }

    pub fn stubborn_ids(&self) -> &[NodeId] {
        &self.user_ids[self.f_len..]
    }

    pub fn sampling(&self, internal: usize) -> Sampling {
        self.sampling[internal]
    }

    pub fn kind(&self, internal: usize) -> NodeKind {
        self.kinds[internal]
    }

    pub fn kinds(&self) -> &[NodeKind] {
        &self.kinds
    }

    pub fn m(&self, internal: usize) -> u64 {
        self.m[internal]
    }

    pub fn alpha(&self, internal: usize) -> u64 {
        self.alpha[internal]
    }

    pub fn beta(&self, internal: usize) -> u64 {
        self.beta[internal]
    }

    pub fn w0(&self, internal: usize) -> u64 {
        self.w0[internal]
    }

    pub fn b0(&self, internal: usize) -> u64 {
        self.b0[internal]
    }

    /// Total reinforcement `m̄ᵢ = Σ_{j∈Nᵢ} mⱼ` (zero for stubborn nodes).
    pub fn mbar(&self, internal: usize) -> u64 {
        self.mbar[internal]
    }

    pub fn in_neighbors(&self, internal: usize) -> &[usize] {
        &self.in_neighbors[internal]
    }

    pub fn out_neighbors(&self, internal: usize) -> &[usize] {
        &self.out_neighbors[internal]
    }

    pub fn a_frac(&self, internal: usize) -> &Rat {
        &self.a_frac[internal]
    }

    pub fn b_frac(&self, internal: usize) -> &Rat {
        &self.b_frac[internal]
    }

    /// Balance diagonal entry `aᵢ + bᵢ − 1`.
    pub fn b_diag(&self, internal: usize) -> &Rat {
        &self.b_diag[internal]
    }

    /// Sampling sign `sᵢ` (+1 preferential, −1 de-preferential).
    pub fn sign(&self, internal: usize) -> i8 {
        self.i_signs[internal]
    }

    pub fn i_signs(&self) -> &[i8] {
        &self.i_signs
    }

    /// 0/1 adjacency in internal order (`[i, j] = 1` iff `i → j`).
    pub fn adjacency(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// Scaled adjacency `Ã` (column-stochastic over flexible columns).
    pub fn a_tilde(&self) -> &DMatrix<f64> {
        &self.a_tilde
    }

    pub fn a_tilde_exact(&self) -> &[Vec<Rat>] {
        &self.a_tilde_exact
    }

    /// Full N×N interaction matrix `W = 𝓘 B Ã`.
    pub fn w_full(&self) -> &DMatrix<f64> {
        &self.w
    }

    pub fn w_exact(&self) -> &[Vec<Rat>] {
        &self.w_exact
    }

    /// Flexible block `W_F`.
    pub fn w_f(&self) -> DMatrix<f64> {
        self.w.view((0, 0), (self.f_len, self.f_len)).into()
    }

    /// Exact flexible block of `I − W`.
    pub fn i_minus_w_f_exact(&self) -> Vec<Vec<Rat>> {
        let mut out = vec![vec![Rat::zero(); self.f_len]; self.f_len];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, entry) in row.iter_mut().enumerate() {
                *entry = -self.w_exact[i][j].clone();
                if i == j {
                    *entry += rat(1, 1);
                }
            }
        }
        out
    }

    /// Initial proportions `Z⁰` in internal order.
    pub fn z0_internal(&self) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.w0[i] as f64 / (self.w0[i] + self.b0[i]) as f64)
            .collect()
    }

    /// Exact initial proportions in internal order.
    pub fn z0_exact(&self) -> Vec<Rat> {
        (0..self.n)
            .map(|i| {
                BigRational::new(BigInt::from(self.w0[i]), BigInt::from(self.w0[i] + self.b0[i]))
            })
            .collect()
    }

    /// Reorders an internal-order vector into document (user-facing) order.
    pub fn to_user_order<T: Clone>(&self, internal: &[T]) -> Vec<T> {
        let mut out: Vec<T> = internal.to_vec();
        for (idx, &pos) in self.doc_pos.iter().enumerate() {
            out[pos] = internal[idx].clone();
        }
        out
    }

    /// Reorders a document-order vector into internal order.
    pub fn to_internal_order<T: Clone>(&self, doc: &[T]) -> Vec<T> {
        self.doc_pos.iter().map(|&pos| doc[pos].clone()).collect()
    }

    /// User ids in document order.
    pub fn user_ids_doc_order(&self) -> Vec<NodeId> {
        let internal: Vec<NodeId> = self.user_ids.clone();
        self.to_user_order(&internal)
    }

    /// Internal index for a document position.
    pub fn internal_of_doc(&self, doc: usize) -> usize {
        self.internal_of_doc[doc]
    }
}

/// Builds the full derived-matrix family from a validated spec.
///
/// Errors with the validation report if the spec breaks a semantic rule;
/// anti-Polya warnings do not block derivation.
pub fn derive(spec: &NetworkSpec) -> Result<DerivedMatrices, SpecError> {
    let report = validate(spec);
    if !report.is_valid() {
        return Err(SpecError::Invalid(report));
    }

    let n = spec.nodes.len();
    let (flexible, stubborn) = classify_nodes(spec);
    let f_len = flexible.len();

    let doc_of_id: BTreeMap<NodeId, usize> = spec
        .nodes
        .iter()
        .enumerate()
        .map(|(pos, node)| (node.id, pos))
        .collect();

    // Internal order: flexible ascending by id, then stubborn ascending by id.
    let user_ids: Vec<NodeId> = flexible.iter().chain(stubborn.iter()).copied().collect();
    let doc_pos: Vec<usize> = user_ids.iter().map(|id| doc_of_id[id]).collect();
    let mut internal_of_doc = vec![0usize; n];
    for (internal, &pos) in doc_pos.iter().enumerate() {
        internal_of_doc[pos] = internal;
    }
    let internal_of_id: BTreeMap<NodeId, usize> = user_ids
        .iter()
        .enumerate()
        .map(|(internal, &id)| (id, internal))
        .collect();

    let node = |internal: usize| -> &NodeSpec { &spec.nodes[doc_pos[internal]] };

    let sampling: Vec<Sampling> = (0..n).map(|i| node(i).sampling).collect();
    let kinds: Vec<NodeKind> = (0..n).map(|i| node(i).kind()).collect();
    let m: Vec<u64> = (0..n).map(|i| node(i).m).collect();
    let alpha: Vec<u64> = (0..n).map(|i| node(i).alpha).collect();
    let beta: Vec<u64> = (0..n).map(|i| node(i).beta).collect();
    let w0: Vec<u64> = (0..n).map(|i| node(i).w0).collect();
    let b0: Vec<u64> = (0..n).map(|i| node(i).b0).collect();
    let i_signs: Vec<i8> = sampling.iter().map(|s| s.sign()).collect();

    let mut in_neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut out_neighbors: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(src, dst) in &spec.edges {
        let i = internal_of_id[&src];
        let j = internal_of_id[&dst];
        out_neighbors[i].push(j);
        in_neighbors[j].push(i);
    }
    for list in in_neighbors.iter_mut().chain(out_neighbors.iter_mut()) {
        list.sort_unstable();
    }

    let mbar: Vec<u64> = (0..n)
        .map(|j| in_neighbors[j].iter().map(|&i| m[i]).sum())
        .collect();

    let a_frac: Vec<Rat> = (0..n)
        .map(|i| BigRational::new(BigInt::from(alpha[i]), BigInt::from(m[i])))
        .collect();
    let b_frac: Vec<Rat> = (0..n)
        .map(|i| BigRational::new(BigInt::from(beta[i]), BigInt::from(m[i])))
        .collect();
    let b_diag: Vec<Rat> = (0..n)
        .map(|i| a_frac[i].clone() + b_frac[i].clone() - rat(1, 1))
        .collect();

    let mut a = DMatrix::zeros(n, n);
    let mut a_tilde_exact = vec![vec![Rat::zero(); n]; n];
    let mut w_exact = vec![vec![Rat::zero(); n]; n];
    for j in 0..n {
        for &i in &in_neighbors[j] {
            a[(i, j)] = 1.0;
            debug_assert!(j < f_len, "edge targets are flexible by definition");
            let scale = BigRational::new(BigInt::from(m[i]), BigInt::from(mbar[j]));
            // [W]_{ij} = s_i (α_i + β_i − m_i) / m̄_j.
            let weight = BigRational::new(
                BigInt::from(i_signs[i]) * (BigInt::from(alpha[i] + beta[i]) - BigInt::from(m[i])),
                BigInt::from(mbar[j]),
            );
            a_tilde_exact[i][j] = scale;
            w_exact[i][j] = weight;
        }
    }
    let to_f64 = |m_exact: &Vec<Vec<Rat>>| {
        DMatrix::from_fn(n, n, |i, j| m_exact[i][j].to_f64().expect("rational fits f64"))
    };
    let a_tilde = to_f64(&a_tilde_exact);
    let w = to_f64(&w_exact);

    Ok(DerivedMatrices {
        n,
        f_len,
        user_ids,
        doc_pos,
        internal_of_doc,
        sampling,
        kinds,
        m,
        alpha,
        beta,
        w0,
        b0,
        in_neighbors,
        out_neighbors,
        mbar,
        a_frac,
        b_frac,
        b_diag,
        i_signs,
        a,
        a_tilde,
        a_tilde_exact,
        w,
        w_exact,
    })
}

impl PartialEq for DerivedMatrices {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.f_len == other.f_len
            && self.user_ids == other.user_ids
            && self.sampling == other.sampling
            && self.m == other.m
            && self.alpha == other.alpha
            && self.beta == other.beta
            && self.w0 == other.w0
            && self.b0 == other.b0
            && self.in_neighbors == other.in_neighbors
            && self.mbar == other.mbar
            && self.w_exact == other.w_exact
            && self.a_tilde_exact == other.a_tilde_exact
            && self.a == other.a
            && self.a_tilde == other.a_tilde
            && self.w == other.w
    }
}
