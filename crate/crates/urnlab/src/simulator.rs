//! Exact urn dynamics with reproducible randomness.
//!
//! Every step draws one ball from each urn simultaneously (all colour
//! indicators are sampled from the time-`t` state before any reinforcement
//! is applied) and then adds balls to the out-neighbours according to the
//! per-node reinforcement matrices. Counts are exact integers; a colour is
//! drawn by comparing a uniform integer below the urn total against the
//! white (or black) count, so degenerate proportions never touch floating
//! point.
//!
//! Reproducibility contract: a trajectory is a pure function of
//! `(spec, steps, seed)`. Replication `r` of an ensemble uses
//! `replication_seed(base_seed, r)` (a SplitMix64 mix), node draws consume
//! randomness in ascending internal node order, and ensemble statistics are
//! reduced in replication order, so results are identical for any thread
//! count.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::netmodel::{DerivedMatrices, NodeId, Sampling};

#[derive(Debug, Error, PartialEq)]
pub enum SimulatorError {
    #[error("checkpoint {checkpoint} exceeds trajectory length {steps}")]
    CheckpointBeyondSteps { checkpoint: u64, steps: u64 },
    #[error("urn totals would overflow 64-bit counts within {steps} steps")]
    CountOverflow { steps: u64 },
    #[error("ensembles need at least 2 replications")]
    InsufficientReplications,
    #[error("need at least 3 checkpoints inside the fit window")]
    InsufficientPoints,
    #[error("zero variance inside the fit window (degenerate dynamics)")]
    ZeroVariance,
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
}

/// Urn configuration at one time step, in internal node order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UrnState {
    pub t: u64,
    pub white: Vec<u64>,
    pub black: Vec<u64>,
}

impl UrnState {
    pub fn total(&self, i: usize) -> u64 {
        self.white[i] + self.black[i]
    }

    /// Proportions `Z_i = W_i / T_i`, internal order.
    pub fn proportions(&self) -> Vec<f64> {
        (0..self.white.len())
            .map(|i| self.white[i] as f64 / self.total(i) as f64)
            .collect()
    }
}

/// Initial state from the spec's urn contents.
pub fn init_state(dm: &DerivedMatrices) -> UrnState {
    UrnState {
        t: 0,
        white: (0..dm.n()).map(|i| dm.w0(i)).collect(),
        black: (0..dm.n()).map(|i| dm.b0(i)).collect(),
    }
}

/// Samples the colour indicators for every node from the current state, in
/// ascending internal node order. `true` means white.
pub fn draw_colors(state: &UrnState, dm: &DerivedMatrices, rng: &mut ChaCha8Rng) -> Vec<bool> {
    (0..dm.n())
        .map(|i| {
            let total = state.total(i);
            let threshold = match dm.sampling(i) {
                Sampling::Preferential => state.white[i],
                Sampling::DePreferential => state.black[i],
            };
            rng.gen_range(0..total) < threshold
        })
        .collect()
}

/// Applies one round of reinforcement for the drawn colours.
pub fn apply_reinforcement(state: &mut UrnState, dm: &DerivedMatrices, chi: &[bool]) {
    for (i, &white_drawn) in chi.iter().enumerate() {
        let (dw, db) = if white_drawn {
            (dm.alpha(i), dm.m(i) - dm.alpha(i))
        } else {
            (dm.m(i) - dm.beta(i), dm.beta(i))
        };
        for &j in dm.out_neighbors(i) {
            state.white[j] += dw;
            state.black[j] += db;
        }
    }
    state.t += 1;
}

/// One step of the dynamics: simultaneous draws, then reinforcement.
pub fn step(state: &mut UrnState, dm: &DerivedMatrices, rng: &mut ChaCha8Rng) {
    let chi = draw_colors(state, dm, rng);
    apply_reinforcement(state, dm, &chi);
}

/// SplitMix64-style derivation of the seed for one replication.
pub fn replication_seed(base_seed: u64, replication: u64) -> u64 {
    let mut z = base_seed
        .wrapping_add(replication.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `count` log-spaced checkpoint times in `[1, steps]`, deduplicated.
pub fn log_spaced_checkpoints(steps: u64, count: usize) -> Vec<u64> {
    assert!(steps >= 1 && count >= 1);
    let mut out: Vec<u64> = (0..count)
        .map(|k| {
            let frac = if count == 1 { 1.0 } else { k as f64 / (count - 1) as f64 };
            ((steps as f64).powf(frac)).round() as u64
        })
        .map(|t| t.clamp(1, steps))
        .collect();
    out.sort_unstable();
    out.dedup();
    out
}

fn check_capacity(dm: &DerivedMatrices, state: &UrnState, steps: u64) -> Result<(), SimulatorError> {
    for i in 0..dm.n() {
        let growth = steps.checked_mul(dm.mbar(i));
        let bound = growth.and_then(|g| state.total(i).checked_add(g));
        if bound.is_none() {
            return Err(SimulatorError::CountOverflow { steps });
        }
    }
    Ok(())
}

fn normalize_checkpoints(checkpoints: &[u64], steps: u64) -> Result<Vec<u64>, SimulatorError> {
    let mut sorted = checkpoints.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if let Some(&beyond) = sorted.iter().find(|&&t| t > steps) {
        return Err(SimulatorError::CheckpointBeyondSteps {
            checkpoint: beyond,
            steps,
        });
    }
    Ok(sorted)
}

/// Runs one trajectory and records the proportions (document order) at each
/// checkpoint. Bit-identical for identical `(spec, steps, seed)`.
pub fn run_trajectory(
    dm: &DerivedMatrices,
    steps: u64,
    seed: u64,
    checkpoints: &[u64],
) -> Result<Vec<(u64, Vec<f64>)>, SimulatorError> {
    let checkpoints = normalize_checkpoints(checkpoints, steps)?;
    let mut state = init_state(dm);
    check_capacity(dm, &state, steps)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    for t in 0..=steps {
        if let Some(&&cp) = next.peek() {
            if cp == t {
                out.push((t, dm.to_user_order(&state.proportions())));
                next.next();
            }
        } else {
            break;
        }
        if t < steps {
            step(&mut state, dm, &mut rng);
        }
    }
    Ok(out)
}

/// Ensemble statistics across replications. All per-node vectors are in
/// document order; the end-time covariance runs over `flexible_ids`.
#[derive(Debug, Clone, Serialize)]
pub struct EnsembleStats {
    pub node_ids: Vec<NodeId>,
    pub flexible_ids: Vec<NodeId>,
    pub checkpoints: Vec<u64>,
    /// `mean[c][node]`: sample mean of `Z` at checkpoint `c`.
    pub mean: Vec<Vec<f64>>,
    /// `variance[c][node]`: sample variance (unbiased) of `Z`.
    pub variance: Vec<Vec<f64>>,
    /// Sample covariance of `√t (Z_F − z*_F)` at the last checkpoint, when
    /// a reference limit was supplied.
    pub covariance_at_end: Option<Vec<Vec<f64>>>,
    pub replications: u64,
}

/// Runs `replications` independent trajectories (in parallel if a rayon
/// pool is active) and aggregates means, variances, and optionally the
/// end-time CLT covariance against `z_star_doc` (document order).
pub fn run_ensemble(
    dm: &DerivedMatrices,
    steps: u64,
    replications: u64,
    base_seed: u64,
    checkpoints: &[u64],
    z_star_doc: Option<&[f64]>,
) -> Result<EnsembleStats, SimulatorError> {
    if replications < 2 {
        return Err(SimulatorError::InsufficientReplications);
    }
    let checkpoints = normalize_checkpoints(checkpoints, steps)?;
    check_capacity(dm, &init_state(dm), steps)?;

    // Per replication: proportions (internal order) at each checkpoint.
    let snapshots: Vec<Vec<Vec<f64>>> = (0..replications)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(replication_seed(base_seed, r));
            let mut state = init_state(dm);
            let mut rows = Vec::with_capacity(checkpoints.len());
            let mut next = checkpoints.iter().peekable();
            for t in 0..=steps {
                if let Some(&&cp) = next.peek() {
                    if cp == t {
                        rows.push(state.proportions());
                        next.next();
                    }
                } else {
                    break;
                }
                if t < steps {
                    step(&mut state, dm, &mut rng);
                }
            }
            rows
        })
        .collect();

    let n = dm.n();
    let reps = replications as f64;
    let mut mean = Vec::with_capacity(checkpoints.len());
    let mut variance = Vec::with_capacity(checkpoints.len());
    for c in 0..checkpoints.len() {
        let mut mu = vec![0.0; n];
        for snap in &snapshots {
            for (acc, z) in mu.iter_mut().zip(snap[c].iter()) {
                *acc += z;
            }
        }
        for acc in mu.iter_mut() {
            *acc /= reps;
        }
        let mut var = vec![0.0; n];
        for snap in &snapshots {
            for ((acc, z), m) in var.iter_mut().zip(snap[c].iter()).zip(mu.iter()) {
                let d = z - m;
                *acc += d * d;
            }
        }
        for acc in var.iter_mut() {
            *acc /= reps - 1.0;
        }
        mean.push(dm.to_user_order(&mu));
        variance.push(dm.to_user_order(&var));
    }

    let covariance_at_end = z_star_doc.map(|z_star| {
        let z_star_internal = dm.to_internal_order(z_star);
        let f_len = dm.f_len();
        let t_end = *checkpoints.last().expect("checkpoints nonempty") as f64;
        let scale = t_end.sqrt();
        let last = checkpoints.len() - 1;
        let deviations: Vec<Vec<f64>> = snapshots
            .iter()
            .map(|snap| {
                (0..f_len)
                    .map(|i| scale * (snap[last][i] - z_star_internal[i]))
                    .collect()
            })
            .collect();
        let mut centre = vec![0.0; f_len];
        for dev in &deviations {
            for (acc, d) in centre.iter_mut().zip(dev.iter()) {
                *acc += d;
            }
        }
        for acc in centre.iter_mut() {
            *acc /= reps;
        }
        let mut cov = vec![vec![0.0; f_len]; f_len];
        for dev in &deviations {
            for i in 0..f_len {
                for j in 0..f_len {
                    cov[i][j] += (dev[i] - centre[i]) * (dev[j] - centre[j]);
                }
            }
        }
        for row in cov.iter_mut() {
            for entry in row.iter_mut() {
                *entry /= reps - 1.0;
            }
        }
        cov
    });

    Ok(EnsembleStats {
        node_ids: dm.user_ids_doc_order(),
        flexible_ids: dm.flexible_ids().to_vec(),
        checkpoints,
        mean,
        variance,
        covariance_at_end,
        replications,
    })
}

/// Least-squares slope of `log Var(Z_node)` against `log t` over the
/// checkpoints falling inside `[window.0, window.1]`.
pub fn fit_decay_slope(
    stats: &EnsembleStats,
    node_id: NodeId,
    window: (u64, u64),
) -> Result<f64, SimulatorError> {
    let node = stats
        .node_ids
        .iter()
        .position(|&id| id == node_id)
        .ok_or(SimulatorError::UnknownNode(node_id))?;
    let mut points = Vec::new();
    for (c, &t) in stats.checkpoints.iter().enumerate() {
        if t < window.0 || t > window.1 {
            continue;
        }
        let var = stats.variance[c][node];
        if var <= 0.0 {
            return Err(SimulatorError::ZeroVariance);
        }
        points.push(((t as f64).ln(), var.ln()));
    }
    if points.len() < 3 {
        return Err(SimulatorError::InsufficientPoints);
    }
    let n = points.len() as f64;
    let sx: f64 = points.iter().map(|p| p.0).sum();
    let sy: f64 = points.iter().map(|p| p.1).sum();
    let sxx: f64 = points.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = points.iter().map(|p| p.0 * p.1).sum();
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}
