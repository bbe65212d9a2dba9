//! Fluctuations around the deterministic limit.
//!
//! The spectrum of `W_F` controls everything: with `ρ = λ_min(I − W_F)`
//! (minimum over real parts), the centred proportions obey a `√t` central
//! limit theorem when `ρ > 1/2` and a `√(t/log t)` one when `ρ = 1/2` is
//! attained by a simple eigenvalue `1/2` of `W`. The limiting covariance
//! `Σ` is assembled from the biorthogonal eigendecomposition of the full
//! `W`; a symmetric `W` admits the closed forms `z*(1−z*)·W²(I−2W)⁻¹`
//! (diffusive) and `z*(1−z*)·¼·u₁u₁ᵀ` (critical).
//!
//! The same spectrum bounds the variance decay of the proportions:
//! `t^{2Re(λ_max)−2}` above `1/2`, `t⁻¹ log t` at `1/2`, `1/t` below.

use nalgebra::DMatrix;
use serde::Serialize;
use thiserror::Error;

use crate::limits::Analysis;
use crate::netmodel::{DerivedMatrices, NodeId};
use crate::spectral::{self, EigenDecomposition, SpectralError, C64};

/// Absolute tolerance for detecting the eigenvalue 1/2 and for the
/// `ρ = 1/2` regime boundary.
const HALF_TOL: f64 = 1e-9;

/// Entries with `|λ|` below this are the structural zeros of the stubborn
/// block and contribute nothing to the covariance.
const ZERO_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum FluctuationError {
    #[error("covariance formula does not apply in the {0:?} regime")]
    RegimeMismatch(Regime),
    #[error("W is not diagonalizable to working precision")]
    NonDiagonalizable,
    #[error("W is not symmetric")]
    AsymmetricW,
    #[error("imaginary residue {0:e} exceeds tolerance (conjugate pairs must cancel)")]
    ImaginaryResidue(f64),
    #[error("covariance formula pole: 1 − λ_k − λ_ℓ vanishes")]
    FormulaPole,
    #[error(transparent)]
    Numerical(#[from] SpectralError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Regime {
    /// `ρ > 1/2`: `√t` scaling.
    Diffusive,
    /// `ρ = 1/2` attained by a simple eigenvalue 1/2: `√(t/log t)` scaling.
    Critical,
    /// `ρ = 1/2` but not by a simple eigenvalue 1/2; no covariance formula.
    CriticalNonSimple,
    /// `ρ < 1/2`: outside this crate's CLT scope.
    Subcritical,
}

/// Variance-decay bound for `Var(Z_F^t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DecayBound {
    /// `t^exponent`.
    PowerLaw(f64),
    /// `t⁻¹ log t`.
    LogCorrected,
}

#[derive(Debug, Clone, Serialize)]
pub struct DecayReport {
    pub lambda_max_re: f64,
    pub bound: DecayBound,
}

/// Classifies the fluctuation regime from the spectrum of `W_F`.
pub fn classify_regime(dm: &DerivedMatrices) -> Result<(f64, Regime), FluctuationError> {
    let eigs = spectral::eigenvalues(&dm.w_f())?;
    let max_re = eigs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let rho = 1.0 - max_re;
    let half_multiplicity = eigs
        .iter()
        .filter(|l| (*l - C64::new(0.5, 0.0)).norm() <= HALF_TOL)
        .count();
    let regime = if (rho - 0.5).abs() <= HALF_TOL {
        if half_multiplicity == 1 {
            Regime::Critical
        } else {
            Regime::CriticalNonSimple
        }
    } else if rho > 0.5 {
        Regime::Diffusive
    } else {
        Regime::Subcritical
    };
    Ok((rho, regime))
}

/// Variance-decay bound keyed on `Re(λ_max(W_F))`.
pub fn variance_decay(dm: &DerivedMatrices) -> Result<DecayReport, FluctuationError> {
    let eigs = spectral::eigenvalues(&dm.w_f())?;
    let lambda_max_re = eigs.iter().map(|l| l.re).fold(f64::NEG_INFINITY, f64::max);
    let bound = if (lambda_max_re - 0.5).abs() <= HALF_TOL {
        DecayBound::LogCorrected
    } else if lambda_max_re > 0.5 {
        DecayBound::PowerLaw(2.0 * lambda_max_re - 2.0)
    } else {
        DecayBound::PowerLaw(-1.0)
    };
    Ok(DecayReport {
        lambda_max_re,
        bound,
    })
}

/// Diagonal of `Θ`: `z(1−z)` per node, where `z` is the limit on flexible
/// coordinates and the initial proportion on stubborn ones.
fn theta_diag(z_internal: &[f64]) -> Vec<f64> {
    z_internal.iter().map(|z| z * (1.0 - z)).collect()
}

/// CLT covariance from the general eigendecomposition formula.
///
/// `z_star_doc` is the full limit vector in document order (as produced by
/// the limit report). The result is `|F|×|F|` over flexible nodes in
/// ascending-id order.
pub fn clt_covariance(
    dm: &DerivedMatrices,
    z_star_doc: &[f64],
) -> Result<DMatrix<f64>, FluctuationError> {
    let (_, regime) = classify_regime(dm)?;
    let critical = match regime {
        Regime::Diffusive => false,
        Regime::Critical => true,
        other => return Err(FluctuationError::RegimeMismatch(other)),
    };
    let eig = spectral::eigendecompose(dm.w_full())?;
    if !eig.diagonalizable {
        return Err(FluctuationError::NonDiagonalizable);
    }
    let z_internal = dm.to_internal_order(z_star_doc);
    let theta = theta_diag(&z_internal);
    assemble_sigma(&eig, &theta, dm.f_len(), critical)
}

/// Assembles `Σ` from a given eigendecomposition of the full `W`.
///
/// Diffusive: `Σ_ij = Σ_{k,ℓ} λ_k λ_ℓ (u_kᵀ Θ u_ℓ) / (1 − λ_k − λ_ℓ) ·
/// v_{ki} v_{ℓj}`, the sums running over nonzero eigenvalues. Critical:
/// only the simple eigenvalue 1/2 survives with weight 1/4.
pub(crate) fn assemble_sigma(
    eig: &EigenDecomposition,
    theta: &[f64],
    f_len: usize,
    critical: bool,
) -> Result<DMatrix<f64>, FluctuationError> {
    let n = eig.n();
    assert_eq!(theta.len(), n);
    let v = eig.left.as_ref().ok_or(FluctuationError::NonDiagonalizable)?;

    // G = Uᵀ Θ U (bilinear, not Hermitian).
    let mut theta_u = eig.right.clone();
    for i in 0..n {
        for k in 0..n {
            theta_u[(i, k)] *= C64::new(theta[i], 0.0);
        }
    }
    let g = eig.right.transpose() * theta_u;

    // Weighted kernel G̃, zero outside the participating eigenvalues.
    let mut weighted = DMatrix::<C64>::zeros(n, n);
    if critical {
        let half_indices: Vec<usize> = (0..n)
            .filter(|&k| (eig.eigenvalues[k] - C64::new(0.5, 0.0)).norm() <= HALF_TOL)
            .collect();
        let [k] = half_indices.as_slice() else {
            return Err(FluctuationError::RegimeMismatch(Regime::CriticalNonSimple));
        };
        weighted[(*k, *k)] = C64::new(0.25, 0.0) * g[(*k, *k)];
    } else {
        for k in 0..n {
            let lk = eig.eigenvalues[k];
            if lk.norm() <= ZERO_TOL {
                continue;
            }
            for l in 0..n {
                let ll = eig.eigenvalues[l];
                if ll.norm() <= ZERO_TOL {
                    continue;
                }
                let denom = C64::new(1.0, 0.0) - lk - ll;
                if denom.norm() < 1e-12 {
                    return Err(FluctuationError::FormulaPole);
                }
                weighted[(k, l)] = lk * ll * g[(k, l)] / denom;
            }
        }
    }

    // Σ = (V_F)ᵀ G̃ V_F with V_F the flexible columns of the left vectors.
    let vf = v.view((0, 0), (n, f_len));
    let sigma_c = vf.transpose() * weighted * vf;

    let max_im = sigma_c.iter().fold(0.0_f64, |acc, z| acc.max(z.im.abs()));
    if max_im > 1e-9 {
        return Err(FluctuationError::ImaginaryResidue(max_im));
    }
    let re = sigma_c.map(|z| z.re);
    let asym = (0..f_len)
        .flat_map(|i| (0..f_len).map(move |j| (i, j)))
        .fold(0.0_f64, |acc, (i, j)| acc.max((re[(i, j)] - re[(j, i)]).abs()));
    if asym > 1e-9 {
        return Err(FluctuationError::ImaginaryResidue(asym));
    }
    Ok(0.5 * (&re + re.transpose()))
}

/// CLT covariance for symmetric `W` with a synchronised limit `z*·𝟏`:
/// `z*(1−z*)·W²(I−2W)⁻¹` in the diffusive regime and
/// `z*(1−z*)·¼·u₁u₁ᵀ` (unit eigenvector at 1/2) in the critical one.
pub fn clt_covariance_symmetric(
    dm: &DerivedMatrices,
    z_star: f64,
) -> Result<DMatrix<f64>, FluctuationError> {
    let n = dm.n();
    let f_len = dm.f_len();
    let w = dm.w_full();
    let asym = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .fold(0.0_f64, |acc, (i, j)| acc.max((w[(i, j)] - w[(j, i)]).abs()));
    if asym > 1e-12 {
        return Err(FluctuationError::AsymmetricW);
    }
    let (_, regime) = classify_regime(dm)?;
    let c = z_star * (1.0 - z_star);

    let sigma_full = match regime {
        Regime::Diffusive => {
            let w_sq = w * w;
            let i_minus_2w = DMatrix::identity(n, n) - 2.0 * w;
            // Row r of W²(I−2W)⁻¹ solves x(I−2W) = (W²)_r.
            let mut out = DMatrix::zeros(n, n);
            for r in 0..n {
                let rhs: Vec<f64> = (0..n).map(|cix| w_sq[(r, cix)]).collect();
                let x = spectral::solve_row_system(&i_minus_2w, &rhs)?;
                for (cix, val) in x.into_iter().enumerate() {
                    out[(r, cix)] = val;
                }
            }
            c * out
        }
        Regime::Critical => {
            let eig = spectral::eigendecompose(w)?;
            let idx: Vec<usize> = (0..n)
                .filter(|&k| (eig.eigenvalues[k] - C64::new(0.5, 0.0)).norm() <= HALF_TOL)
                .collect();
            let [k] = idx.as_slice() else {
                return Err(FluctuationError::RegimeMismatch(Regime::CriticalNonSimple));
            };
            let u = eig.right_vector(*k);
            let max_im = u.iter().fold(0.0_f64, |acc, z| acc.max(z.im.abs()));
            if max_im > 1e-9 {
                return Err(FluctuationError::ImaginaryResidue(max_im));
            }
            let mut out = DMatrix::zeros(n, n);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] = 0.25 * u[i].re * u[j].re;
                }
            }
            c * out
        }
        other => return Err(FluctuationError::RegimeMismatch(other)),
    };
    Ok(sigma_full.view((0, 0), (f_len, f_len)).into())
}

/// User-facing fluctuation summary.
#[derive(Debug, Clone, Serialize)]
pub struct FluctuationReport {
    pub rho: f64,
    pub regime: Regime,
    /// CLT scaling in force: `sqrt(t)`, `sqrt(t/log t)`, or `unsupported`.
    pub scaling: String,
    pub flexible_ids: Vec<NodeId>,
    /// Covariance over `flexible_ids`, when the regime admits one and the
    /// limit is available.
    pub sigma: Option<Vec<Vec<f64>>>,
    pub sigma_note: Option<String>,
    /// Diagonal of `Θ` in document order, when a limit is available.
    pub theta: Option<Vec<f64>>,
    pub decay: DecayReport,
}

/// Combines regime classification, decay bound, and (where defined) the
/// covariance into one report.
pub fn fluctuation_report(
    dm: &DerivedMatrices,
    analysis: &Analysis,
) -> Result<FluctuationReport, FluctuationError> {
    let (rho, regime) = classify_regime(dm)?;
    let scaling = match regime {
        Regime::Diffusive => "sqrt(t)",
        Regime::Critical => "sqrt(t/log t)",
        _ => "unsupported",
    }
    .to_string();
    let decay = variance_decay(dm)?;

    let theta = analysis
        .limit
        .as_ref()
        .map(|limit| limit.z_star.iter().map(|z| z * (1.0 - z)).collect());

    let mut sigma = None;
    let mut sigma_note = None;
    if matches!(regime, Regime::Diffusive | Regime::Critical) {
        if let Some(limit) = &analysis.limit {
            match clt_covariance(dm, &limit.z_star) {
                Ok(mat) => {
                    sigma = Some(
                        (0..mat.nrows())
                            .map(|i| (0..mat.ncols()).map(|j| mat[(i, j)]).collect())
                            .collect(),
                    );
                    if !analysis.conditions.guaranteed {
                        sigma_note = Some(
                            "conditional: almost-sure convergence not guaranteed for this spec"
                                .to_string(),
                        );
                    }
                }
                Err(err) => sigma_note = Some(err.to_string()),
            }
        } else {
            sigma_note = Some("no deterministic limit available".to_string());
        }
    }

    Ok(FluctuationReport {
        rho,
        regime,
        scaling,
        flexible_ids: dm.flexible_ids().to_vec(),
        sigma,
        sigma_note,
        theta,
        decay,
    })
}
