//! Variance decay rates: spectral prediction vs log-log slope fits.
//!
//! The decay of Var(Z_t) is governed by Re(lambda_max(W_F)): t^(2r−2)
//! above 1/2, t^-1·log t at 1/2, 1/t below. Two ensembles are fitted over
//! a log-spaced window and compared with the predicted exponents.
//!
//! Run with: cargo run --example variance_decay

use urnlab::fluctuation::{variance_decay, DecayBound};
use urnlab::netmodel::{derive, NetworkSpec, NodeSpec, Sampling};
use urnlab::simulator::{fit_decay_slope, log_spaced_checkpoints, run_ensemble};

fn node(id: u32, sampling: Sampling, m: u64, alpha: u64, beta: u64) -> NodeSpec {
    NodeSpec {
        id,
        sampling,
        m,
        alpha,
        beta,
        w0: 1,
        b0: 1,
    }
}

fn study(name: &str, spec: &NetworkSpec, steps: u64, reps: u64) {
    let dm = derive(spec).unwrap();
    let decay = variance_decay(&dm).unwrap();
    let predicted = match decay.bound {
        DecayBound::PowerLaw(e) => format!("t^{e:.4}"),
        DecayBound::LogCorrected => "t^-1 log t".to_string(),
    };
    println!("== {name} ==");
    println!(
        "Re(lambda_max) = {:.4}, predicted decay {predicted}",
        decay.lambda_max_re
    );

    let mut cps = log_spaced_checkpoints(steps, 20);
    cps.push(1000);
    cps.sort_unstable();
    cps.dedup();
    let stats = run_ensemble(&dm, steps, reps, 4321, &cps, None).unwrap();
    for &id in &stats.node_ids {
        match fit_decay_slope(&stats, id, (1000, steps)) {
            Ok(slope) => println!("  node {id}: fitted slope {slope:.3}"),
            Err(err) => println!("  node {id}: {err}"),
        }
    }
    println!();
}

fn main() {
    // One de-preferential node on the Polya 4-cycle:
    // Re(lambda_max) = 1/sqrt(2), variance decays like t^(sqrt(2)-2).
    let mut slow = NetworkSpec {
        nodes: (1..=4)
            .map(|id| node(id, Sampling::Preferential, 1, 1, 1))
            .collect(),
        edges: vec![(1, 3), (3, 2), (2, 4), (4, 1)],
    };
    slow.nodes[3].sampling = Sampling::DePreferential;
    study("slow decay (4-cycle, one de-preferential)", &slow, 100_000, 100);

    // Mutual mixing pair: Re(lambda_max) = 1/4 < 1/2, decay 1/t.
    let fast = NetworkSpec {
        nodes: vec![
            node(1, Sampling::Preferential, 4, 2, 1),
            node(2, Sampling::Preferential, 4, 2, 1),
        ],
        edges: vec![(1, 2), (2, 1)],
    };
    study("fast decay (mixing pair)", &fast, 100_000, 100);
}
