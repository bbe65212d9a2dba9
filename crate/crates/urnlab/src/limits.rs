//! Deterministic limits, their sufficient conditions, and synchronisation.
//!
//! On a strongly connected flexible set the colour proportions converge to a
//! deterministic vector when at least one of three conditions holds: a
//! non-Polya flexible node exists, a stubborn node exists, or (all-Polya
//! case) the flexible subgraph admits no valid partition. When the flexible
//! set is only weakly connected, the criterion is applied per strongly
//! connected component of its condensation: every source component must be
//! covered on its own, while every non-source component is covered by the
//! external in-edge feeding it.
//!
//! The limit itself is the fixed point of the affine drift
//! `h(z) = −z(I − W_F) + rhs`, solved as a row system. Synchronisation
//! constants come from column-sum equalities of `W` and its stubborn block;
//! sums with integer ingredients are compared in exact rational arithmetic.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::netmodel::{DerivedMatrices, NodeId, NodeKind, Rat, Sampling};
use crate::partition::{tarjan_scc, Subgraph};
use crate::spectral::{self, SpectralError};

#[derive(Debug, Error)]
pub enum LimitError {
    #[error("no deterministic limit: I − W_F is singular")]
    NoDeterministicLimit,
    #[error(transparent)]
    Numerical(#[from] SpectralError),
}

fn rat_i(v: i64) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// Verdict for one strongly connected component of the flexible set,
/// reported in condensation topological order (sources first).
#[derive(Debug, Clone, Serialize)]
pub struct SccVerdict {
    /// Member user ids, sorted.
    pub nodes: Vec<NodeId>,
    /// No in-edges from other flexible components.
    pub is_source: bool,
    /// Some stubborn node feeds a member.
    pub has_stubborn_in_edge: bool,
    /// Any in-edge from outside the component (flexible or stubborn).
    pub external_in_edge: bool,
    /// A non-Polya member exists.
    pub cond_i: bool,
    /// Self-contained all-Polya components only: no valid partition.
    pub cond_iii: Option<bool>,
    /// This component's limit is pinned deterministically.
    pub covered: bool,
}

/// Evaluation of the deterministic-limit conditions.
#[derive(Debug, Clone, Serialize)]
pub struct ConditionReport {
    pub strongly_connected_f: bool,
    /// A non-Polya node exists in the flexible set.
    pub cond_i: bool,
    /// Stubborn nodes exist.
    pub cond_ii: bool,
    /// All flexible nodes Polya and no valid partition (evaluated on a
    /// strongly connected flexible set; false otherwise).
    pub cond_iii: bool,
    /// Anti-Polya reinforcement among flexible nodes; the convergence theory
    /// does not cover it, so no guarantee is issued.
    pub anti_polya_in_f: bool,
    /// Per-component verdicts when the flexible set is not strongly
    /// connected, in condensation topological order.
    pub per_scc: Option<Vec<SccVerdict>>,
    /// A deterministic limit is guaranteed.
    pub guaranteed: bool,
}

/// The deterministic limit and its diagnostics. Vectors are in document
/// order; `rhs` is indexed by `flexible_ids`.
#[derive(Debug, Clone, Serialize)]
pub struct LimitReport {
    pub node_ids: Vec<NodeId>,
    /// Limit proportions: fixed point on flexible coordinates, initial
    /// proportions on stubborn ones.
    pub z_star: Vec<f64>,
    pub flexible_ids: Vec<NodeId>,
    /// The bracketed row vector of the limit formula (diagnostic).
    pub rhs: Vec<f64>,
    /// `‖h(z*_F)‖∞`.
    pub residual: f64,
}

/// Synchronisation constants, present when the per-node sums agree.
#[derive(Debug, Clone, Default, Serialize)]
pub struct SyncReport {
    /// Common flexible column sum of `W` (μ_F).
    pub sc1: Option<f64>,
    /// Common stubborn-weighted column sum (μ_S).
    pub sc2: Option<f64>,
    /// Common drift offset (δ).
    pub sc3: Option<f64>,
    /// `(δ + μ_S) / (1 − μ_F)`, when all three hold and `μ_F ≠ 1`.
    pub z_sync: Option<f64>,
    /// All three sums agree but `μ_F = 1`, so the constant is undefined.
    pub degenerate: bool,
    /// Aggregate equalities in the preferential-only case.
    pub psc: Option<PscReport>,
}

/// Preferential-only aggregates: node-independent in-neighbourhood sums of
/// the reinforcement matrices, plus their initial-proportion weighting over
/// stubborn in-neighbours.
#[derive(Debug, Clone, Serialize)]
pub struct PscReport {
    pub alpha_f: u64,
    pub beta_f: u64,
    pub m_f: u64,
    pub m_s: u64,
    pub beta_s: u64,
    pub m0_s: f64,
    pub alpha0_s: f64,
    pub beta0_s: f64,
    pub z_star: f64,
}

/// Full analysis bundle.
#[derive(Debug, Clone, Serialize)]
pub struct Analysis {
    pub conditions: ConditionReport,
    pub limit: Option<LimitReport>,
    /// Set when the limit system is singular.
    pub limit_error: Option<String>,
    pub sync: SyncReport,
}

/// Evaluates the deterministic-limit conditions, including the weakly
/// connected extension over the condensation of the flexible subgraph.
pub fn check_conditions(dm: &DerivedMatrices) -> ConditionReport {
    let f_len = dm.f_len();
    let sub = Subgraph::flexible(dm);
    let strongly_connected_f = sub.is_strongly_connected();

    let anti_polya_in_f = (0..f_len).any(|i| dm.kind(i) == NodeKind::AntiPolya);
    let cond_i = (0..f_len).any(|i| dm.kind(i) == NodeKind::NonPolya);
    let cond_ii = dm.stubborn_len() > 0;
    let all_polya_f = (0..f_len).all(|i| dm.kind(i) == NodeKind::Polya);

    let cond_iii = if strongly_connected_f && all_polya_f {
        !sub.explore(0).map(|o| o.admits()).unwrap_or(true)
    } else {
        false
    };

    if strongly_connected_f {
        let guaranteed = !anti_polya_in_f && (cond_i || cond_ii || cond_iii);
        return ConditionReport {
            strongly_connected_f,
            cond_i,
            cond_ii,
            cond_iii,
            anti_polya_in_f,
            per_scc: None,
            guaranteed,
        };
    }

    // Condensation of the flexible subgraph, topological order.
    let mut adj = vec![Vec::new(); f_len];
    for j in 0..f_len {
        for &i in dm.in_neighbors(j) {
            if dm.is_flexible(i) {
                adj[i].push(j);
            }
        }
    }
    let mut comps = tarjan_scc(&adj);
    comps.reverse(); // sources first
    let comp_of = {
        let mut map = vec![0usize; f_len];
        for (cid, comp) in comps.iter().enumerate() {
            for &v in comp {
                map[v] = cid;
            }
        }
        map
    };

    let mut verdicts = Vec::with_capacity(comps.len());
    for (cid, comp) in comps.iter().enumerate() {
        let mut is_source = true;
        let mut has_stubborn_in_edge = false;
        let mut external_in_edge = false;
        for &v in comp {
            for &nb in dm.in_neighbors(v) {
                if !dm.is_flexible(nb) {
                    has_stubborn_in_edge = true;
                    external_in_edge = true;
                } else if comp_of[nb] != cid {
                    is_source = false;
                    external_in_edge = true;
                }
            }
        }
        let comp_cond_i = comp.iter().any(|&v| dm.kind(v) == NodeKind::NonPolya);
        let comp_all_polya = comp.iter().all(|&v| dm.kind(v) == NodeKind::Polya);
        // The partition test is only meaningful when the component's column
        // sums are self-contained, i.e. no external mass enters.
        let comp_cond_iii = if comp_all_polya && !external_in_edge {
            let comp_sub = Subgraph::new(dm, comp);
            Some(!comp_sub.explore(0).map(|o| o.admits()).unwrap_or(true))
        } else {
            None
        };
        let covered = if is_source {
            comp_cond_i || has_stubborn_in_edge || comp_cond_iii == Some(true)
        } else {
            true
        };
        let mut ids: Vec<NodeId> = comp.iter().map(|&v| dm.user_id(v)).collect();
        ids.sort_unstable();
        verdicts.push(SccVerdict {
            nodes: ids,
            is_source,
            has_stubborn_in_edge,
            external_in_edge,
            cond_i: comp_cond_i,
            cond_iii: comp_cond_iii,
            covered,
        });
    }

    let guaranteed = !anti_polya_in_f && verdicts.iter().all(|v| v.covered);
    ConditionReport {
        strongly_connected_f,
        cond_i,
        cond_ii,
        cond_iii,
        anti_polya_in_f,
        per_scc: Some(verdicts),
        guaranteed,
    }
}

/// The bracketed row vector of the limit formula, on flexible coordinates
/// (internal order): stubborn influence, de-preferential offset, and the
/// white-reinforcement mass, each scaled by `1/m̄_j`.
pub(crate) fn rhs_vector(dm: &DerivedMatrices, z0: &[f64]) -> Vec<f64> {
    let f_len = dm.f_len();
    let mut rhs = vec![0.0; f_len];
    for (j, entry) in rhs.iter_mut().enumerate() {
        let mbar = dm.mbar(j) as f64;
        let mut acc = 0.0;
        for &i in dm.in_neighbors(j) {
            let balance = (dm.alpha(i) + dm.beta(i)) as f64 - dm.m(i) as f64;
            if !dm.is_flexible(i) {
                acc += f64::from(dm.sign(i)) * z0[i] * balance;
            }
            if dm.sampling(i) == Sampling::DePreferential {
                acc += balance;
            }
            acc += (dm.m(i) - dm.beta(i)) as f64;
        }
        *entry = acc / mbar;
    }
    rhs
}

/// Drift `h(z) = −z(I − W_F) + rhs`, on flexible coordinates (internal
/// order). `z0` supplies the stubborn proportions entering `rhs`.
pub fn drift(dm: &DerivedMatrices, z_f: &[f64], z0: &[f64]) -> Vec<f64> {
    let f_len = dm.f_len();
    assert_eq!(z_f.len(), f_len);
    let rhs = rhs_vector(dm, z0);
    let w = dm.w_full();
    (0..f_len)
        .map(|j| {
            let mut acc = -z_f[j] + rhs[j];
            for &i in dm.in_neighbors(j) {
                if dm.is_flexible(i) {
                    acc += z_f[i] * w[(i, j)];
                }
            }
            acc
        })
        .collect()
}

/// Solves for the deterministic limit with the spec's own initial
/// proportions supplying the stubborn coordinates.
pub fn deterministic_limit(dm: &DerivedMatrices) -> Result<LimitReport, LimitError> {
    deterministic_limit_with(dm, &dm.z0_internal())
}

/// Solves `z (I − W_F) = rhs` and assembles the full limit vector
/// `(z*_F, z⁰_S)`. `z0` is in internal order.
pub fn deterministic_limit_with(
    dm: &DerivedMatrices,
    z0: &[f64],
) -> Result<LimitReport, LimitError> {
    let f_len = dm.f_len();
    assert_eq!(z0.len(), dm.n());
    let rhs = rhs_vector(dm, z0);
    let i_minus_wf = nalgebra::DMatrix::identity(f_len, f_len) - dm.w_f();
    let z_f = spectral::solve_row_system(&i_minus_wf, &rhs).map_err(|e| match e {
        SpectralError::SingularMatrix => LimitError::NoDeterministicLimit,
        other => LimitError::Numerical(other),
    })?;

    let residual = drift(dm, &z_f, z0)
        .iter()
        .fold(0.0_f64, |acc, h| acc.max(h.abs()));

    let mut z_star_internal = z_f;
    z_star_internal.extend_from_slice(&z0[f_len..]);

    Ok(LimitReport {
        node_ids: dm.user_ids_doc_order(),
        z_star: dm.to_user_order(&z_star_internal),
        flexible_ids: dm.flexible_ids().to_vec(),
        rhs,
        residual,
    })
}

fn all_equal_rat(values: &[Rat]) -> Option<&Rat> {
    let (first, rest) = values.split_first()?;
    rest.iter().all(|v| v == first).then_some(first)
}

fn all_equal_f64(values: &[f64], rel_tol: f64) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    // + 0.0 canonicalizes the negative zero of an empty sum.
    let mean = values.iter().sum::<f64>() / values.len() as f64 + 0.0;
    let scale = 1.0_f64.max(mean.abs());
    values
        .iter()
        .all(|v| (v - mean).abs() <= rel_tol * scale)
        .then_some(mean)
}

/// Evaluates the synchronisation conditions. `z0` is in internal order; the
/// integer-only sums (SC1, SC3, the preferential aggregates) are compared
/// exactly, the initial-proportion-weighted ones at 1e−12 relative.
pub fn check_sync(dm: &DerivedMatrices, z0: &[f64]) -> SyncReport {
    let f_len = dm.f_len();
    assert_eq!(z0.len(), dm.n());
    let mut report = SyncReport::default();
    if f_len == 0 {
        return report;
    }

    // SC1: column sums of W over flexible in-neighbours, exact.
    let sc1: Vec<Rat> = (0..f_len)
        .map(|j| {
            (0..f_len)
                .map(|i| dm.w_exact()[i][j].clone())
                .fold(Rat::zero(), |acc, x| acc + x)
        })
        .collect();
    let mu_f_exact = all_equal_rat(&sc1).cloned();

    // SC2: stubborn-weighted column sums, float (weights are proportions).
    let sc2: Vec<f64> = (0..f_len)
        .map(|j| {
            dm.in_neighbors(j)
                .iter()
                .filter(|&&i| !dm.is_flexible(i))
                .map(|&i| z0[i] * dm.w_full()[(i, j)])
                .sum::<f64>()
                + 0.0
        })
        .collect();
    let mu_s = all_equal_f64(&sc2, 1e-12);

    // SC3: de-preferential offset plus white-reinforcement mass, exact.
    let sc3: Vec<Rat> = (0..f_len)
        .map(|j| {
            let mut acc = Rat::zero();
            for &i in dm.in_neighbors(j) {
                let balance = rat_i((dm.alpha(i) + dm.beta(i)) as i64 - dm.m(i) as i64);
                if dm.sampling(i) == Sampling::DePreferential {
                    acc += balance;
                }
                acc += rat_i((dm.m(i) - dm.beta(i)) as i64);
            }
            acc / rat_i(dm.mbar(j) as i64)
        })
        .collect();
    let delta_exact = all_equal_rat(&sc3).cloned();

    report.sc1 = mu_f_exact.as_ref().and_then(|r| r.to_f64());
    report.sc2 = mu_s;
    report.sc3 = delta_exact.as_ref().and_then(|r| r.to_f64());

    if let (Some(mu_f), Some(mu_s), Some(delta)) = (&mu_f_exact, mu_s, &delta_exact) {
        if mu_f.is_one() {
            report.degenerate = true;
        } else {
            let denom = 1.0 - mu_f.to_f64().unwrap();
            report.z_sync = Some((delta.to_f64().unwrap() + mu_s) / denom);
        }
    }

    if (0..dm.n()).all(|i| dm.sampling(i) == Sampling::Preferential) {
        report.psc = check_psc(dm, z0);
    }
    report
}

fn check_psc(dm: &DerivedMatrices, z0: &[f64]) -> Option<PscReport> {
    let f_len = dm.f_len();
    let sums: Vec<[u64; 5]> = (0..f_len)
        .map(|i| {
            let mut acc = [0u64; 5];
            for &j in dm.in_neighbors(i) {
                if dm.is_flexible(j) {
                    acc[0] += dm.alpha(j);
                    acc[1] += dm.beta(j);
                    acc[2] += dm.m(j);
                } else {
                    acc[3] += dm.m(j);
                    acc[4] += dm.beta(j);
                }
            }
            acc
        })
        .collect();
    let first = sums.first()?;
    if !sums.iter().all(|s| s == first) {
        return None;
    }
    let [alpha_f, beta_f, m_f, m_s, beta_s] = *first;
    if alpha_f + beta_f >= 2 * m_f + m_s {
        return None;
    }

    let (mut m0_s, mut alpha0_s, mut beta0_s) = (0.0, 0.0, 0.0);
    if dm.stubborn_len() > 0 {
        let per_node: Vec<[f64; 3]> = (0..f_len)
            .map(|i| {
                let mut acc = [0.0; 3];
                for &j in dm.in_neighbors(i) {
                    if !dm.is_flexible(j) {
                        acc[0] += z0[j] * dm.m(j) as f64;
                        acc[1] += z0[j] * dm.alpha(j) as f64;
                        acc[2] += z0[j] * dm.beta(j) as f64;
                    }
                }
                acc
            })
            .collect();
        for coord in 0..3 {
            let values: Vec<f64> = per_node.iter().map(|a| a[coord]).collect();
            all_equal_f64(&values, 1e-12)?;
        }
        m0_s = per_node[0][0];
        alpha0_s = per_node[0][1];
        beta0_s = per_node[0][2];
    }

    let numer = (m_f + m_s) as f64 - (beta_f + beta_s) as f64 - (m0_s - alpha0_s - beta0_s);
    let denom = (2 * m_f + m_s) as f64 - (alpha_f + beta_f) as f64;
    Some(PscReport {
        alpha_f,
        beta_f,
        m_f,
        m_s,
        beta_s,
        m0_s,
        alpha0_s,
        beta0_s,
        z_star: numer / denom,
    })
}

/// Conditions, limit, and synchronisation in one pass, using the spec's
/// initial proportions.
pub fn analyze(dm: &DerivedMatrices) -> Analysis {
    let conditions = check_conditions(dm);
    let z0 = dm.z0_internal();
    let (limit, limit_error) = match deterministic_limit_with(dm, &z0) {
        Ok(report) => (Some(report), None),
        Err(err) => (None, Some(err.to_string())),
    };
    let sync = check_sync(dm, &z0);
    Analysis {
        conditions,
        limit,
        limit_error,
        sync,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::netmodel::{derive, NetworkSpec, NodeSpec, Sampling};

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

    /// 4-cycle 1→3→2→4→1 with node 4 de-preferential (all Polya, m = 1).
    fn four_cycle_one_depref() -> NetworkSpec {
        let mut nodes: Vec<NodeSpec> = (1..=4)
            .map(|id| polya_node(id, Sampling::Preferential))
            .collect();
        nodes[3].sampling = Sampling::DePreferential;
        NetworkSpec {
            nodes,
            edges: vec![(1, 3), (3, 2), (2, 4), (4, 1)],
        }
    }

    fn stubborn_feeds_cycle(w0: u64, b0: u64) -> NetworkSpec {
        NetworkSpec {
            nodes: vec![
                polya_node(1, Sampling::Preferential),
                polya_node(2, Sampling::Preferential),
                NodeSpec {
                    w0,
                    b0,
                    ..polya_node(3, Sampling::Preferential)
                },
            ],
            edges: vec![(1, 2), (2, 1), (3, 1)],
        }
    }

    #[test]
    fn preferential_polya_cycle_satisfies_nothing() {
        let dm = derive(&cycle(4, &[])).unwrap();
        let report = check_conditions(&dm);
        assert!(report.strongly_connected_f);
        assert!(!report.cond_i && !report.cond_ii && !report.cond_iii);
        assert!(!report.guaranteed);
    }

    #[test]
    fn one_depref_cycle_satisfies_condition_iii() {
        let dm = derive(&four_cycle_one_depref()).unwrap();
        let report = check_conditions(&dm);
        assert!(report.cond_iii && report.guaranteed);
        assert!(!report.cond_i && !report.cond_ii);
    }

    #[test]
    fn stubborn_gives_condition_ii() {
        let dm = derive(&stubborn_feeds_cycle(1, 1)).unwrap();
        let report = check_conditions(&dm);
        assert!(report.cond_ii && report.guaranteed);
    }

    #[test]
    fn anti_polya_blocks_guarantee() {
        let mut spec = cycle(4, &[2]);
        spec.nodes[0].m = 2;
        spec.nodes[0].alpha = 0;
        spec.nodes[0].beta = 0;
        let dm = derive(&spec).unwrap();
        let report = check_conditions(&dm);
        assert!(report.anti_polya_in_f);
        assert!(!report.guaranteed);
    }

    #[test]
    fn one_depref_cycle_limit_is_half() {
        let dm = derive(&four_cycle_one_depref()).unwrap();
        let report = deterministic_limit(&dm).unwrap();
        for z in &report.z_star {
            assert!((z - 0.5).abs() <= 1e-12, "z = {z}");
        }
        assert!(report.residual <= 1e-12);
    }

    #[test]
    fn stubborn_feeds_cycle_limit_tracks_z0() {
        let spec = stubborn_feeds_cycle(3, 1);
        let dm = derive(&spec).unwrap();
        let report = deterministic_limit(&dm).unwrap();
        for z in &report.z_star {
            assert!((z - 0.75).abs() <= 1e-12);
        }
    }

    #[test]
    fn friedman_pair_limit_is_half() {
        let mut spec = cycle(2, &[]);
        for node in &mut spec.nodes {
            node.m = 2;
            node.alpha = 1;
            node.beta = 1;
        }
        let dm = derive(&spec).unwrap();
        let report = deterministic_limit(&dm).unwrap();
        assert!(report.z_star.iter().all(|z| (z - 0.5).abs() <= 1e-12));
    }

    #[test]
    fn preferential_polya_cycle_limit_is_singular() {
        let dm = derive(&cycle(4, &[])).unwrap();
        assert!(matches!(
            deterministic_limit(&dm),
            Err(LimitError::NoDeterministicLimit)
        ));
    }

    #[test]
    fn drift_vanishes_at_fixed_point_and_matches_direct_form() {
        let dm = derive(&four_cycle_one_depref()).unwrap();
        let z0 = dm.z0_internal();
        let report = deterministic_limit(&dm).unwrap();
        let z_internal = dm.to_internal_order(&report.z_star);
        let h = drift(&dm, &z_internal[..dm.f_len()], &z0);
        assert!(h.iter().all(|x| x.abs() <= 1e-10));

        // At the all-white corner h = 1·(W_F − I) + rhs, evaluated directly.
        let ones = vec![1.0; dm.f_len()];
        let h1 = drift(&dm, &ones, &z0);
        let rhs = rhs_vector(&dm, &z0);
        for j in 0..dm.f_len() {
            let mut expect = -1.0 + rhs[j];
            for i in 0..dm.f_len() {
                expect += dm.w_full()[(i, j)];
            }
            assert!((h1[j] - expect).abs() <= 1e-12);
        }
    }

    #[test]
    fn drift_with_zero_w_is_affine_identity() {
        let mut spec = cycle(2, &[]);
        for node in &mut spec.nodes {
            node.m = 2;
            node.alpha = 1;
            node.beta = 1;
        }
        let dm = derive(&spec).unwrap();
        let z0 = dm.z0_internal();
        let rhs = rhs_vector(&dm, &z0);
        let z = vec![0.3, 0.9];
        let h = drift(&dm, &z, &z0);
        for j in 0..2 {
            assert!((h[j] - (rhs[j] - z[j])).abs() <= 1e-15);
        }
    }

    #[test]
    fn weakly_connected_source_coverage() {
        // Two 2-cycles {1,2} and {3,4} with bridge 2→3. The all-Polya
        // all-preferential source admits a partition, so nothing covers it.
        let nodes: Vec<NodeSpec> = (1..=4)
            .map(|id| polya_node(id, Sampling::Preferential))
            .collect();
        let edges = vec![(1, 2), (2, 1), (3, 4), (4, 3), (2, 3)];
        let spec = NetworkSpec {
            nodes: nodes.clone(),
            edges: edges.clone(),
        };
        let dm = derive(&spec).unwrap();
        let report = check_conditions(&dm);
        assert!(!report.strongly_connected_f);
        let verdicts = report.per_scc.as_ref().unwrap();
        assert_eq!(verdicts.len(), 2);
        assert!(verdicts[0].is_source && !verdicts[0].covered);
        assert!(!verdicts[1].is_source && verdicts[1].covered);
        assert!(!report.guaranteed);

        // Making one source node non-Polya covers the source component.
        let mut nodes = nodes;
        nodes[0].m = 2;
        nodes[0].alpha = 1;
        nodes[0].beta = 1;
        let spec = NetworkSpec { nodes, edges };
        let dm = derive(&spec).unwrap();
        let report = check_conditions(&dm);
        assert!(report.guaranteed, "{report:?}");
        assert!(deterministic_limit(&dm).is_ok());
    }

    #[test]
    fn scc_permutation_leaves_limit_consistent() {
        // Same weakly connected graph, relabelled so the block order swaps.
        let build = |swap: bool| {
            let map = |id: u32| if swap { 5 - id } else { id };
            let mut nodes: Vec<NodeSpec> = (1..=4)
                .map(|id| polya_node(map(id), Sampling::Preferential))
                .collect();
            nodes.sort_by_key(|n| n.id);
            for node in &mut nodes {
                if node.id == map(1) {
                    node.m = 2;
                    node.alpha = 1;
                    node.beta = 1;
                }
            }
            let edges = vec![
                (map(1), map(2)),
                (map(2), map(1)),
                (map(3), map(4)),
                (map(4), map(3)),
                (map(2), map(3)),
            ];
            NetworkSpec { nodes, edges }
        };
        let a = deterministic_limit(&derive(&build(false)).unwrap()).unwrap();
        let b = deterministic_limit(&derive(&build(true)).unwrap()).unwrap();
        // Node id k in `a` corresponds to id 5−k in `b`.
        for (idx, &id) in a.node_ids.iter().enumerate() {
            let other = b.node_ids.iter().position(|&x| x == 5 - id).unwrap();
            assert!((a.z_star[idx] - b.z_star[other]).abs() <= 1e-12);
        }
    }

    #[test]
    fn sync_absent_with_single_depreferential() {
        let dm = derive(&cycle(8, &[8])).unwrap();
        let report = check_sync(&dm, &dm.z0_internal());
        assert!(report.sc1.is_none());
    }

    #[test]
    fn degenerate_sync_on_all_preferential_polya_cycle() {
        let dm = derive(&cycle(4, &[])).unwrap();
        let report = check_sync(&dm, &dm.z0_internal());
        assert_eq!(report.sc1, Some(1.0));
        assert!(report.degenerate && report.z_sync.is_none());
    }

    #[test]
    fn friedman_pair_psc_gives_half() {
        let mut spec = cycle(2, &[]);
        for node in &mut spec.nodes {
            node.m = 2;
            node.alpha = 1;
            node.beta = 1;
        }
        let dm = derive(&spec).unwrap();
        let report = check_sync(&dm, &dm.z0_internal());
        let psc = report.psc.expect("psc1 holds");
        assert_eq!((psc.m_f, psc.alpha_f, psc.beta_f), (2, 1, 1));
        assert!((psc.z_star - 0.5).abs() <= 1e-15);
        assert_eq!(report.z_sync, Some(0.5));
    }

    #[test]
    fn shared_stubborn_neighbour_syncs_to_its_initial_fraction() {
        // All-Polya 2-cycle where the single stubborn node feeds both.
        let spec = NetworkSpec {
            nodes: vec![
                polya_node(1, Sampling::Preferential),
                polya_node(2, Sampling::Preferential),
                NodeSpec {
                    w0: 3,
                    b0: 1,
                    ..polya_node(3, Sampling::Preferential)
                },
            ],
            edges: vec![(1, 2), (2, 1), (3, 1), (3, 2)],
        };
        let dm = derive(&spec).unwrap();
        let z0 = dm.z0_internal();
        let sync = check_sync(&dm, &z0);
        let psc = sync.psc.expect("psc holds");
        assert!((psc.z_star - 0.75).abs() <= 1e-12);
        let limit = deterministic_limit(&dm).unwrap();
        for (idx, &id) in limit.node_ids.iter().enumerate() {
            if id != 3 {
                assert!((limit.z_star[idx] - 0.75).abs() <= 1e-9);
            }
        }
        if let Some(z) = sync.z_sync {
            assert!((z - 0.75).abs() <= 1e-9);
        }
    }

    #[test]
    fn limit_independent_of_initial_conditions_without_stubborn() {
        let dm = derive(&four_cycle_one_depref()).unwrap();
        let a = deterministic_limit_with(&dm, &[0.1, 0.9, 0.4, 0.7]).unwrap();
        let b = deterministic_limit_with(&dm, &[0.99, 0.01, 0.5, 0.3]).unwrap();
        for (x, y) in a.z_star.iter().zip(b.z_star.iter()) {
            assert!((x - y).abs() <= 1e-12);
        }
    }
}
