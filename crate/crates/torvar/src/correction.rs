//! Unitary corrections that commute with a fixed spectral partition: direct
//! rotations between nearby projectors, and the blockwise correction that
//! turns an almost-partition-preserving unitary into a nearby one commuting
//! with the partition's diagonal.

use crate::matcore::{commutator, defects, nearest_unitary, op_norm, CMatrix};
use crate::psra::ProjectiveDecomposition;
use crate::{Error, Result};

// validation of projector inputs, per unit dimension
const PROJECTOR_TOL: f64 = 1e-9;
// self-certification of outputs, per unit dimension
const CERT_TOL: f64 = 1e-9;
// extra absolute slack on the triangle-inequality bound chain
const CHAIN_SLACK: f64 = 1e-8;

/// Outcome of [`commuting_unitary_correction`].
#[derive(Debug, Clone)]
pub struct CorrectionResult {
    /// Unitary commuting with the partition's diagonal.
    pub z: CMatrix,
    /// `op_norm(1 - w z)`.
    pub achieved: f64,
    /// `op_norm(1 - w_j)` for each block transport.
    pub block_bounds: Vec<f64>,
    /// Whether `achieved` met the requested target `nu`.
    pub meets_target: bool,
}

fn projector_defect(p: &CMatrix) -> f64 {
    let herm = op_norm(&p.sub(&p.adjoint()));
    let idem = op_norm(&p.mul(p).sub(p));
    herm.max(idem)
}

/// Direct rotation between nearby orthogonal projectors: a unitary `w` with
/// `w* p w = p_tilde` and `op_norm(1 - w) <= sqrt(2) * op_norm(p - p_tilde)`.
///
/// `w` is the unitary polar factor of `p p_tilde + (1-p)(1-p_tilde)`, which
/// is invertible exactly when `op_norm(p - p_tilde) < 1`.
pub fn projector_transport(p: &CMatrix, p_tilde: &CMatrix) -> Result<CMatrix> {
    if p.n() != p_tilde.n() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "projector_transport: {}x{} vs {}x{}",
                p.n(),
                p.n(),
                p_tilde.n(),
                p_tilde.n()
            ),
        });
    }
    let n = p.n();
    let tol = PROJECTOR_TOL * n as f64;
    for q in [p, p_tilde] {
        let defect = projector_defect(q);
        if defect > tol {
            return Err(Error::NotProjector { defect, tol });
        }
    }
    let gap = op_norm(&p.sub(p_tilde));
    if gap >= 1.0 {
        return Err(Error::TransportUndefined { gap });
    }
    let id = CMatrix::identity(n);
    let s = p
        .mul(p_tilde)
        .add(&id.sub(p).mul(&id.sub(p_tilde)));
    let w = nearest_unitary(&s)?;
    let residual = op_norm(&w.adjoint().mul(p).mul(&w).sub(p_tilde));
    if residual > CERT_TOL * n as f64 {
        return Err(Error::Domain(format!(
            "projector transport residual {residual:.3e} exceeds {:.3e}",
            CERT_TOL * n as f64
        )));
    }
    Ok(w)
}

/// Replace `w` by a unitary `z` that commutes with every projector of `d`
/// (hence with any matrix diagonal over the partition) while staying close to
/// `w` inverse: `op_norm(1 - w z) <= sum_j op_norm(1 - w_j)`, where `w_j`
/// transports the j-th projector to its conjugate `w p_j w*`.
///
/// Requires every conjugated projector to stay within `1/sqrt(2)` of its
/// block, and at least two blocks — for a scalar diagonal the correction is
/// the trivial `z = w*`, which this operation refuses to dress up as work.
pub fn commuting_unitary_correction(
    w: &CMatrix,
    d: &ProjectiveDecomposition,
    nu: f64,
) -> Result<CorrectionResult> {
    let n = w.n();
    if !nu.is_finite() || nu < 0.0 {
        return Err(Error::Domain(format!("correction target nu = {nu} invalid")));
    }
    let tol_in = 1e-8 * n as f64;
    let w_defect = defects(w).unitarity;
    if w_defect > tol_in {
        return Err(Error::NotUnitary {
            defect: w_defect,
            tol: tol_in,
        });
    }
    let r = d.projectors.len();
    if r < 2 {
        return Err(Error::Domain(
            "correction needs at least two spectral blocks (scalar diagonals commute with everything)".into(),
        ));
    }
    let id = CMatrix::identity(n);
    let mut partition_sum = CMatrix::zeros(n);
    for p in &d.projectors {
        if p.n() != n {
            return Err(Error::DimensionMismatch {
                context: format!("correction: projector {}x{} vs unitary {}x{}", p.n(), p.n(), n, n),
            });
        }
        partition_sum = partition_sum.add(p);
    }
    let partition_defect = op_norm(&partition_sum.sub(&id));
    if partition_defect > tol_in {
        return Err(Error::Domain(format!(
            "projector family does not sum to identity (defect {partition_defect:.3e})"
        )));
    }

    let w_adj = w.adjoint();
    let mut transports = Vec::with_capacity(r);
    let mut block_bounds = Vec::with_capacity(r);
    for (j, p) in d.projectors.iter().enumerate() {
        let moved = w.mul(p).mul(&w_adj);
        let gap = op_norm(&moved.sub(p));
        if gap >= std::f64::consts::FRAC_1_SQRT_2 {
            return Err(Error::CorrectionFailed {
                block: j,
                reason: format!("conjugated projector moved by {gap:.3e} >= 1/sqrt(2)"),
            });
        }
        let w_j = projector_transport(p, &moved).map_err(|e| Error::CorrectionFailed {
            block: j,
            reason: e.to_string(),
        })?;
        block_bounds.push(op_norm(&id.sub(&w_j)));
        transports.push(w_j);
    }

    // w_tilde = sum_j w_j w p_j agrees with w_j w on ran(p_j); it is unitary
    // because each w_j w maps ran(p_j) onto ran(p_j) by construction.
    let mut w_tilde = CMatrix::zeros(n);
    for (w_j, p) in transports.iter().zip(&d.projectors) {
        w_tilde = w_tilde.add(&w_j.mul(w).mul(p));
    }
    let tol_cert = CERT_TOL * n as f64;
    let unit_defect = defects(&w_tilde).unitarity;
    if unit_defect > tol_cert {
        return Err(Error::NotUnitary {
            defect: unit_defect,
            tol: tol_cert,
        });
    }
    let z = w_tilde.adjoint();
    for (j, p) in d.projectors.iter().enumerate() {
        let comm = op_norm(&commutator(&z, p)?);
        if comm > tol_cert {
            return Err(Error::CorrectionFailed {
                block: j,
                reason: format!("correction fails to commute with block projector ({comm:.3e})"),
            });
        }
    }
    let achieved = op_norm(&id.sub(&w.mul(&z)));
    let chain: f64 = block_bounds.iter().sum::<f64>() + CHAIN_SLACK;
    if achieved > chain {
        return Err(Error::Domain(format!(
            "correction bound chain violated: {achieved:.3e} > {chain:.3e}"
        )));
    }
    Ok(CorrectionResult {
        z,
        achieved,
        block_bounds,
        meets_target: achieved <= nu,
    })
}
