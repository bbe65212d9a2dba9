//! Interacting two-colour urn processes on finite directed networks.
//!
//! Each node of a directed graph carries an urn of white and black balls.
//! At every time step a ball is drawn simultaneously from each urn
//! (preferentially or de-preferentially, per node) and the node reinforces
//! its out-neighbours according to its balanced reinforcement matrix.
//!
//! The crate computes the closed-form objects that control the asymptotics
//! of this process and provides the Monte Carlo machinery to verify every
//! one of them empirically:
//!
//! * [`netmodel`] — network specification, validation, and the derived
//!   matrix family (scaled adjacency, interaction matrix `W`, node kinds).
//! * [`partition`] — the graph exploration process deciding whether the
//!   flexible subgraph splits into the four sets `(P1, P2, D1, D2)`, plus
//!   an exact-arithmetic kernel oracle for the equivalent singularity test.
//! * [`spectral`] — the small dense linear-algebra kernel (row solves,
//!   general real eigendecomposition, exact rational kernel bases).
//! * [`limits`] — deterministic-limit conditions, the limit vector itself,
//!   the drift function, and the synchronisation constants.
//! * [`fluctuation`] — fluctuation regime classification, CLT covariance
//!   matrices, and variance-decay exponents.
//! * [`simulator`] — reproducible seeded trajectories and parallel
//!   ensembles with mean/variance/covariance estimation.
//! * [`cli`] — the `urnlab` command-line front end.
//!
//! Matrices are dense; the crate is designed for networks up to a few
//! hundred nodes. Larger graphs need a different numerical kernel.

pub mod cli;
pub mod fluctuation;
pub mod limits;
pub mod netmodel;
pub mod partition;
pub mod simulator;
pub mod spectral;

pub use netmodel::{DerivedMatrices, NetworkSpec, NodeKind, NodeSpec, Sampling};
