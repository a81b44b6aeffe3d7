//! Seeded generation of variety members and small in-variety perturbations.
//!
//! Everything here is deterministic given the seed: the generator is ChaCha8,
//! chosen as a named portable stream cipher RNG so experiments reproduce
//! across platforms and reimplementations.

use crate::jointspec::joint_diagonalize;
use crate::kernels;
use crate::matcore::{expm_i_pi, op_norm, unitary_conjugate, CMatrix};
use crate::varieties::{variety_defect, MatrixTuple, VarietyKind};
use crate::{Complex64, Error, Result};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

// membership is re-verified on every generated tuple
const MEMBER_TOL: f64 = 1e-9;

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    let (a, b) = kernels::normal_pair(rng);
    Complex64::new(a, b)
}

/// Haar-distributed unitary: modified Gram-Schmidt QR of a Ginibre matrix.
/// The R factor's diagonal is real positive by construction, which is exactly
/// the normalization that makes the Q factor Haar.
pub fn haar_unitary(n: usize, rng: &mut ChaCha8Rng) -> CMatrix {
    assert!(n >= 1, "haar_unitary needs n >= 1");
    let mut cols: Vec<Vec<Complex64>> = (0..n)
        .map(|_| (0..n).map(|_| gaussian(rng)).collect())
        .collect();
    for j in 0..n {
        // two orthogonalization passes keep the columns orthonormal to
        // machine precision even for unlucky draws
        for _pass in 0..2 {
            for i in 0..j {
                let proj: Complex64 = cols[i]
                    .iter()
                    .zip(&cols[j])
                    .map(|(qi, vj)| qi.conj() * vj)
                    .sum();
                for k in 0..n {
                    let d = proj * cols[i][k];
                    cols[j][k] -= d;
                }
            }
        }
        let norm: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        for k in 0..n {
            cols[j][k] /= norm;
        }
    }
    CMatrix::from_fn(n, |i, l| cols[l][i])
}

fn member_values(kind: VarietyKind, rng: &mut ChaCha8Rng, n: usize) -> Vec<Complex64> {
    (0..n)
        .map(|_| match kind {
            VarietyKind::Cube => Complex64::new(rng.gen::<f64>() * 2.0 - 1.0, 0.0),
            VarietyKind::Disk => {
                // uniform on the disk: sqrt-radius times uniform phase
                let r = rng.gen::<f64>().sqrt();
                let theta = TAU * rng.gen::<f64>();
                Complex64::from_polar(r, theta)
            }
            VarietyKind::Torus => Complex64::from_polar(1.0, TAU * rng.gen::<f64>() - PI),
        })
        .collect()
}

fn assemble(kind: VarietyKind, q: &CMatrix, diags: &[Vec<Complex64>]) -> Result<MatrixTuple> {
    let mats = diags
        .iter()
        .map(|d| {
            let x = unitary_conjugate(q, &CMatrix::from_diag(d))?;
            Ok(match kind {
                VarietyKind::Cube => x.hermitian_part(),
                _ => x,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let tuple = MatrixTuple::new(mats)?;
    let defect = variety_defect(&tuple, kind);
    let tol = MEMBER_TOL * tuple.n() as f64;
    if defect > tol {
        return Err(Error::OutsideVariety {
            kind,
            defect,
            tol,
        });
    }
    Ok(tuple)
}

/// Random member of the given variety: a Haar unitary conjugating random
/// diagonal tuples drawn from the variety's scalar domain.
pub fn gen_member(kind: VarietyKind, n: usize, m: usize, seed: u64) -> Result<MatrixTuple> {
    if n < 1 || m < 1 {
        return Err(Error::Domain(format!(
            "member needs n >= 1 and m >= 1, got n = {n}, m = {m}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = haar_unitary(n, &mut rng);
    let diags: Vec<Vec<Complex64>> = (0..m).map(|_| member_values(kind, &mut rng, n)).collect();
    assemble(kind, &q, &diags)
}

/// Member with a prescribed joint spectrum: slot `k` of every component gets
/// `values[j][k % L]`, so small spectra embed into any dimension with
/// multiplicity and the spectral geometry stays fixed as `n` grows.
pub fn member_with_spectrum(
    kind: VarietyKind,
    values: &[Vec<Complex64>],
    n: usize,
    seed: u64,
) -> Result<MatrixTuple> {
    if values.is_empty() || values[0].is_empty() {
        return Err(Error::EmptyTuple);
    }
    let len = values[0].len();
    if values.iter().any(|v| v.len() != len) {
        return Err(Error::DimensionMismatch {
            context: "member_with_spectrum: ragged value lists".into(),
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = haar_unitary(n, &mut rng);
    let diags: Vec<Vec<Complex64>> = values
        .iter()
        .map(|v| (0..n).map(|k| v[k % len]).collect())
        .collect();
    assemble(kind, &q, &diags)
}

fn perturb_value(
    kind: VarietyKind,
    v: Complex64,
    step: f64,
    rng: &mut ChaCha8Rng,
) -> Complex64 {
    match kind {
        VarietyKind::Cube => {
            let moved = v.re + step * (rng.gen::<f64>() * 2.0 - 1.0);
            Complex64::new(moved.clamp(-1.0, 1.0), 0.0)
        }
        VarietyKind::Disk => {
            let kick = Complex64::from_polar(step * rng.gen::<f64>(), TAU * rng.gen::<f64>());
            let moved = v + kick;
            let r = moved.norm();
            if r > 1.0 {
                moved / r
            } else {
                moved
            }
        }
        VarietyKind::Torus => {
            let (r, theta) = v.to_polar();
            Complex64::from_polar(r, theta + step * (rng.gen::<f64>() * 2.0 - 1.0))
        }
    }
}

/// Random member of the same variety within `eth` distance `delta` of `x`:
/// the joint eigenvalues move by at most `delta/4` inside the scalar domain
/// and the eigenbasis turns by `exp(i (delta/4) K)` for a random hermitian
/// contraction `K` (a basis turn of angle `a` moves a contraction by at most
/// `2a`), keeping the total within `delta` with margin.
pub fn gen_perturbation(
    x: &MatrixTuple,
    kind: VarietyKind,
    delta: f64,
    seed: u64,
) -> Result<MatrixTuple> {
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::Domain(format!(
            "perturbation radius must be a finite nonnegative real, got {delta}"
        )));
    }
    if delta == 0.0 {
        return Ok(x.clone());
    }
    let n = x.n();
    let js = joint_diagonalize(x)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = delta / 4.0;
    let diags: Vec<Vec<Complex64>> = js
        .values
        .iter()
        .map(|vals| {
            vals.iter()
                .map(|&v| perturb_value(kind, normalize_value(kind, v), step, &mut rng))
                .collect()
        })
        .collect();
    // random hermitian contraction generating the basis turn
    let g = CMatrix::from_fn(n, |_, _| gaussian(&mut rng)).hermitian_part();
    let scale = op_norm(&g).max(1e-300);
    let k = g.scale_re(1.0 / scale);
    let turn = expm_i_pi(&k.scale_re(step / PI))?;
    let q = turn.mul(&js.q);
    assemble(kind, &q, &diags)
}

// joint_diagonalize returns numerically-diagonal values; pull them back onto
// the variety's scalar domain before perturbing so roundoff never compounds
fn normalize_value(kind: VarietyKind, v: Complex64) -> Complex64 {
    match kind {
        VarietyKind::Cube => Complex64::new(v.re.clamp(-1.0, 1.0), 0.0),
        VarietyKind::Disk => {
            let r = v.norm();
            if r > 1.0 {
                v / r
            } else {
                v
            }
        }
        VarietyKind::Torus => {
            let (_, theta) = v.to_polar();
            Complex64::from_polar(1.0, theta)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::defects;
    use crate::varieties::eth;

    #[test]
    fn haar_unitary_is_unitary_and_seeded() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let q = haar_unitary(6, &mut rng);
        assert!(defects(&q).unitarity < 1e-12);
        let mut rng2 = ChaCha8Rng::seed_from_u64(7);
        let q2 = haar_unitary(6, &mut rng2);
        assert_eq!(q.max_abs_diff(&q2), 0.0);
    }

    #[test]
    fn members_live_on_their_varieties() {
        for kind in [VarietyKind::Cube, VarietyKind::Disk, VarietyKind::Torus] {
            for seed in 0..8 {
                let x = gen_member(kind, 5, 2, seed).unwrap();
                assert!(variety_defect(&x, kind) < 1e-10 * 5.0);
            }
        }
    }

    #[test]
    fn member_generation_is_deterministic() {
        let a = gen_member(VarietyKind::Torus, 4, 2, 99).unwrap();
        let b = gen_member(VarietyKind::Torus, 4, 2, 99).unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.max_abs_diff(y), 0.0);
        }
    }

    #[test]
    fn scalar_cube_member_is_a_real_contraction() {
        let x = gen_member(VarietyKind::Cube, 1, 1, 3).unwrap();
        let v = x.get(0).get(0, 0);
        assert!(v.im.abs() < 1e-15);
        assert!(v.re.abs() <= 1.0);
    }

    #[test]
    fn zero_radius_perturbation_is_identity() {
        let x = gen_member(VarietyKind::Disk, 4, 2, 11).unwrap();
        let y = gen_perturbation(&x, VarietyKind::Disk, 0.0, 5).unwrap();
        for (a, b) in x.iter().zip(y.iter()) {
            assert_eq!(a.max_abs_diff(b), 0.0);
        }
    }

    #[test]
    fn perturbations_stay_close_and_in_variety() {
        for kind in [VarietyKind::Cube, VarietyKind::Disk, VarietyKind::Torus] {
            for seed in 0..6 {
                let x = gen_member(kind, 4, 2, 1000 + seed).unwrap();
                let delta = 0.1;
                let y = gen_perturbation(&x, kind, delta, seed).unwrap();
                let d = eth(&x, &y).unwrap();
                assert!(d <= delta, "{kind}: eth {d} > delta {delta}");
                assert!(variety_defect(&y, kind) < 1e-9 * 4.0);
            }
        }
    }

    #[test]
    fn embedded_spectrum_repeats_across_dimensions() {
        let vals = vec![
            vec![
                Complex64::new(0.25, 0.0),
                Complex64::new(-0.5, 0.0),
                Complex64::new(0.75, 0.0),
            ],
            vec![
                Complex64::new(-0.125, 0.0),
                Complex64::new(0.375, 0.0),
                Complex64::new(0.875, 0.0),
            ],
        ];
        for n in [3, 6, 12] {
            let x = member_with_spectrum(VarietyKind::Cube, &vals, n, 42).unwrap();
            assert_eq!(x.n(), n);
            let js = joint_diagonalize(&x).unwrap();
            // recovered joint values must all be embedded grid values
            for point in js.points() {
                let hit = (0..3).any(|k| {
                    (point[0] - vals[0][k]).norm() < 1e-9 && (point[1] - vals[1][k]).norm() < 1e-9
                });
                assert!(hit, "unexpected joint value {point:?}");
            }
        }
    }
}
