//! CLT covariance: closed forms against Monte Carlo.
//!
//! The mutual pair with m=4, alpha=2, beta=1 sits in the diffusive regime
//! (rho = 3/4) with a symmetric interaction matrix, so the covariance of
//! sqrt(t)·(Z_t − z*) has two independent closed forms: the spectral sum
//! and z*(1−z*)·W²(I−2W)⁻¹. Both are compared with the empirical
//! covariance over an ensemble.
//!
//! Run with: cargo run --example fluctuation_covariance

use urnlab::fluctuation::{classify_regime, clt_covariance, clt_covariance_symmetric};
use urnlab::limits::deterministic_limit;
use urnlab::netmodel::{derive, NetworkSpec, NodeSpec, Sampling};
use urnlab::simulator::run_ensemble;

fn main() {
    let spec = NetworkSpec {
        nodes: (1..=2)
            .map(|id| NodeSpec {
                id,
                sampling: Sampling::Preferential,
                m: 4,
                alpha: 2,
                beta: 1,
                w0: 1,
                b0: 1,
            })
            .collect(),
        edges: vec![(1, 2), (2, 1)],
    };
    let dm = derive(&spec).unwrap();

    let (rho, regime) = classify_regime(&dm).unwrap();
    println!("rho = {rho}, regime = {regime:?}");

    let limit = deterministic_limit(&dm).unwrap();
    println!("z* = {:?}", limit.z_star);

    let sigma = clt_covariance(&dm, &limit.z_star).unwrap();
    let sigma_sym = clt_covariance_symmetric(&dm, limit.z_star[0]).unwrap();
    println!("spectral-sum sigma:   [[{:.6}, {:.6}], [{:.6}, {:.6}]]",
        sigma[(0, 0)], sigma[(0, 1)], sigma[(1, 0)], sigma[(1, 1)]);
    println!("symmetric-form sigma: [[{:.6}, {:.6}], [{:.6}, {:.6}]]",
        sigma_sym[(0, 0)], sigma_sym[(0, 1)], sigma_sym[(1, 0)], sigma_sym[(1, 1)]);

    let steps = 100_000;
    let reps = 500;
    let stats = run_ensemble(&dm, steps, reps, 99, &[steps], Some(&limit.z_star)).unwrap();
    let cov = stats.covariance_at_end.as_ref().unwrap();
    println!(
        "empirical covariance ({reps} reps, t = {steps}): [[{:.6}, {:.6}], [{:.6}, {:.6}]]",
        cov[0][0], cov[0][1], cov[1][0], cov[1][1]
    );

    let mut num = 0.0_f64;
    let mut den = 0.0_f64;
    for i in 0..2 {
        for j in 0..2 {
            num += (cov[i][j] - sigma[(i, j)]).powi(2);
            den += sigma[(i, j)].powi(2);
        }
    }
    println!("relative Frobenius error: {:.1}%", 100.0 * (num / den).sqrt());
}
