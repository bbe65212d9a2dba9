//! Stubborn nodes pin the limit.
//!
//! A stubborn node never changes its own urn but keeps reinforcing its
//! out-neighbours, so its initial fraction propagates: when every flexible
//! node sees the same stubborn neighbourhood, the whole network
//! synchronises to a weighted average of the stubborn initial fractions.
//! The example verifies the closed form and confirms it by simulation.
//!
//! Run with: cargo run --example stubborn_influence

use urnlab::limits::{analyze, deterministic_limit};
use urnlab::netmodel::{derive, NetworkSpec, NodeSpec, Sampling};
use urnlab::simulator::{log_spaced_checkpoints, run_ensemble};

fn polya(id: u32, w0: u64, b0: u64) -> NodeSpec {
    NodeSpec {
        id,
        sampling: Sampling::Preferential,
        m: 1,
        alpha: 1,
        beta: 1,
        w0,
        b0,
    }
}

fn main() {
    // Flexible 2-cycle {1, 2}; node 3 is stubborn with white fraction 3/4
    // and feeds node 1 only.
    let chain = NetworkSpec {
        nodes: vec![polya(1, 1, 1), polya(2, 1, 1), polya(3, 3, 1)],
        edges: vec![(1, 2), (2, 1), (3, 1)],
    };
    let dm = derive(&chain).unwrap();
    let limit = deterministic_limit(&dm).unwrap();
    println!("stubborn feeds one node: z* = {:?}", limit.z_star);

    // Both flexible nodes see the same stubborn neighbour: the aggregate
    // form gives the weighted average of the stubborn initial fractions.
    let shared = NetworkSpec {
        nodes: vec![polya(1, 1, 1), polya(2, 1, 1), polya(3, 3, 1)],
        edges: vec![(1, 2), (2, 1), (3, 1), (3, 2)],
    };
    let dm = derive(&shared).unwrap();
    let analysis = analyze(&dm);
    if let Some(psc) = &analysis.sync.psc {
        println!(
            "shared stubborn neighbour: aggregate z* = {:.6} (stubborn fraction 0.75)",
            psc.z_star
        );
    }

    // Monte Carlo confirmation on the chain spec.
    let steps = 50_000;
    let cps = log_spaced_checkpoints(steps, 12);
    let stats = run_ensemble(&dm, steps, 64, 2024, &cps, None).unwrap();
    let last = stats.checkpoints.len() - 1;
    println!("ensemble means at t = {steps}:");
    for (id, mean) in stats.node_ids.iter().zip(stats.mean[last].iter()) {
        println!("  node {id}: {mean:.4}");
    }
}
