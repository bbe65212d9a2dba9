//! Deterministic limits and synchronisation constants.
//!
//! Walks through the three sufficient conditions on the 4-cycle family:
//! the all-preferential Polya cycle (no condition holds, limit random),
//! the same cycle with one de-preferential node (condition (iii), limit
//! 1/2), and a mixing-reinforcement cycle (condition (i) plus the
//! preferential aggregate constants).
//!
//! Run with: cargo run --example deterministic_limit

use urnlab::limits::{analyze, drift};
use urnlab::netmodel::{derive, NetworkSpec, NodeSpec, Sampling};

fn four_cycle(samplings: [Sampling; 4], m: u64, alpha: u64, beta: u64) -> NetworkSpec {
    NetworkSpec {
        nodes: (1..=4)
            .map(|id| NodeSpec {
                id,
                sampling: samplings[(id - 1) as usize],
                m,
                alpha,
                beta,
                w0: 1,
                b0: 1,
            })
            .collect(),
        edges: vec![(1, 3), (3, 2), (2, 4), (4, 1)],
    }
}

fn report(name: &str, spec: &NetworkSpec) {
    let dm = derive(spec).unwrap();
    let analysis = analyze(&dm);
    let c = &analysis.conditions;
    println!("== {name} ==");
    println!(
        "conditions: i={} ii={} iii={} guaranteed={}",
        c.cond_i, c.cond_ii, c.cond_iii, c.guaranteed
    );
    match &analysis.limit {
        Some(limit) => {
            let z: Vec<String> = limit.z_star.iter().map(|z| format!("{z:.6}")).collect();
            println!("z* = [{}]  residual = {:.2e}", z.join(", "), limit.residual);
            // The drift vanishes at the fixed point.
            let z_internal = dm.to_internal_order(&limit.z_star);
            let h = drift(&dm, &z_internal[..dm.f_len()], &dm.z0_internal());
            let hmax = h.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
            println!("|h(z*)|_inf = {hmax:.2e}");
        }
        None => println!("{}", analysis.limit_error.as_deref().unwrap_or("no limit")),
    }
    if let Some(z) = analysis.sync.z_sync {
        println!("synchronisation constant z_sync = {z:.6}");
    }
    if analysis.sync.degenerate {
        println!("synchronisation sums hold but mu_F = 1 (degenerate)");
    }
    if let Some(psc) = &analysis.sync.psc {
        println!(
            "preferential aggregates: (m^F, alpha^F, beta^F) = ({}, {}, {}) => z* = {:.6}",
            psc.m_f, psc.alpha_f, psc.beta_f, psc.z_star
        );
    }
    println!();
}

fn main() {
    let pref = Sampling::Preferential;
    let depref = Sampling::DePreferential;

    report(
        "all-preferential Polya 4-cycle (random limit)",
        &four_cycle([pref; 4], 1, 1, 1),
    );
    report(
        "one de-preferential node (condition iii, limit 1/2)",
        &four_cycle([pref, pref, pref, depref], 1, 1, 1),
    );
    report(
        "mixing reinforcement m=3, alpha=beta=2 (condition i, aggregates)",
        &four_cycle([pref; 4], 3, 2, 2),
    );
}
