//! Dense square complex matrices and the scalar kernels everything else
//! builds on: operator norm, hermitian eigendecomposition, `e^{iπK}`,
//! principal logarithm of a unitary, and the polar-based nearest unitary.
//!
//! Eigendecompositions use cyclic Jacobi sweeps in a fixed order, so all
//! results are deterministic functions of the input bits.

use crate::kernels;
use crate::{Complex64, Error, Result};
use serde::{Deserialize, Serialize};
use std::ops::Index;

/// Dense square complex matrix, row-major storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl CMatrix {
    /// Build from row-major data. Fails on length mismatch or non-finite entries.
    pub fn new(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch {
                context: format!("expected {} entries for a {n}x{n} matrix, got {}", n * n, data.len()),
            });
        }
        if !data.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(CMatrix { n, data })
    }

    pub fn zeros(n: usize) -> Self {
        CMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_diag(diag: &[Complex64]) -> Self {
        let n = diag.len();
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = diag[i];
        }
        m
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::DimensionMismatch {
                context: "ragged rows".into(),
            });
        }
        CMatrix::new(n, rows.concat())
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    pub(crate) fn data_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn diag(&self) -> Vec<Complex64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn adjoint(&self) -> CMatrix {
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.data[j * n + i] = self.data[i * n + j].conj();
            }
        }
        out
    }

    pub fn add(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch in add");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        CMatrix { n: self.n, data }
    }

    pub fn sub(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch in sub");
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a - b)
            .collect();
        CMatrix { n: self.n, data }
    }

    pub fn scale(&self, c: Complex64) -> CMatrix {
        CMatrix {
            n: self.n,
            data: self.data.iter().map(|a| a * c).collect(),
        }
    }

    pub fn scale_re(&self, c: f64) -> CMatrix {
        self.scale(Complex64::new(c, 0.0))
    }

    pub fn mul(&self, other: &CMatrix) -> CMatrix {
        assert_eq!(self.n, other.n, "dimension mismatch in mul");
        let n = self.n;
        let mut out = CMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let aik = self.data[i * n + k];
                if aik.re == 0.0 && aik.im == 0.0 {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let orow = &mut out.data[i * n..(i + 1) * n];
                for j in 0..n {
                    orow[j] += aik * row[j];
                }
            }
        }
        out
    }

    /// Hermitian part `(A + A*)/2`.
    pub fn hermitian_part(&self) -> CMatrix {
        self.add(&self.adjoint()).scale_re(0.5)
    }

    /// Skew part divided by `i`: `(A - A*)/(2i)`, which is hermitian.
    pub fn antihermitian_part(&self) -> CMatrix {
        self.sub(&self.adjoint()).scale(Complex64::new(0.0, -0.5))
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entry modulus of `self - other`; cheap test helper.
    pub fn max_abs_diff(&self, other: &CMatrix) -> f64 {
        assert_eq!(self.n, other.n);
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.n + j]
    }
}

/// Hermiticity, unitarity, normality, and contraction defects of one matrix,
/// all in operator norm.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DefectReport {
    pub hermitian: f64,
    pub unitarity: f64,
    pub normality: f64,
    pub contraction_excess: f64,
}

/// Eigendecomposition of a hermitian matrix: `h = q diag(values) q*`,
/// eigenvalues ascending, column phases canonical.
#[derive(Debug, Clone)]
pub struct HermEigDecomposition {
    pub values: Vec<f64>,
    pub q: CMatrix,
}

impl HermEigDecomposition {
    pub fn reconstruct(&self) -> CMatrix {
        let d = CMatrix::from_diag(
            &self
                .values
                .iter()
                .map(|&v| Complex64::new(v, 0.0))
                .collect::<Vec<_>>(),
        );
        self.q.mul(&d).mul(&self.q.adjoint())
    }
}

/// Operator norm (largest singular value).
///
/// Computed by deterministic power iteration on `A*A` from a fixed seeded
/// start vector; tests cross-check against a full Jacobi SVD oracle.
pub fn op_norm(a: &CMatrix) -> f64 {
    kernels::sigma_max_power(a)
}

/// Smallest singular value, via one-sided Jacobi SVD (high relative accuracy).
pub fn sigma_min(a: &CMatrix) -> f64 {
    kernels::svd_values(a)
        .into_iter()
        .fold(f64::INFINITY, f64::min)
}

/// `[A, B] = AB - BA`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if a.n() != b.n() {
        return Err(Error::DimensionMismatch {
            context: format!("commutator of {}x{} with {}x{}", a.n(), a.n(), b.n(), b.n()),
        });
    }
    Ok(a.mul(b).sub(&b.mul(a)))
}

/// `u a u*`.
pub fn unitary_conjugate(u: &CMatrix, a: &CMatrix) -> Result<CMatrix> {
    if u.n() != a.n() {
        return Err(Error::DimensionMismatch {
            context: "conjugation dimension mismatch".into(),
        });
    }
    Ok(u.mul(a).mul(&u.adjoint()))
}

/// All structural defects of a single matrix.
pub fn defects(a: &CMatrix) -> DefectReport {
    let adj = a.adjoint();
    let aa = a.mul(&adj);
    let a_a = adj.mul(a);
    let id = CMatrix::identity(a.n());
    DefectReport {
        hermitian: op_norm(&a.sub(&adj)),
        unitarity: op_norm(&a_a.sub(&id)).max(op_norm(&aa.sub(&id))),
        normality: op_norm(&aa.sub(&a_a)),
        contraction_excess: (op_norm(a) - 1.0).max(0.0),
    }
}

const HERM_INPUT_TOL: f64 = 1e-8;

/// Eigendecomposition of a hermitian matrix by cyclic Jacobi sweeps.
///
/// Requires hermiticity defect at most `1e-8 * n`. Eigenvalues ascending;
/// reconstruction residual stays below `1e-10 * n * ||h||`.
pub fn herm_eig(h: &CMatrix) -> Result<HermEigDecomposition> {
    let n = h.n();
    let herm_defect = h.max_abs_diff(&h.adjoint());
    if herm_defect > HERM_INPUT_TOL * n as f64 {
        return Err(Error::NotHermitian {
            defect: herm_defect,
            tol: HERM_INPUT_TOL * n as f64,
        });
    }
    Ok(kernels::hermitian_eig(h))
}

/// `e^{iπK}` for hermitian `K`, via eigendecomposition and scalar exponentials.
pub fn expm_i_pi(k: &CMatrix) -> Result<CMatrix> {
    let eig = herm_eig(k)?;
    let phases: Vec<Complex64> = eig
        .values
        .iter()
        .map(|&v| {
            let (s, c) = (std::f64::consts::PI * v).sin_cos();
            Complex64::new(c, s)
        })
        .collect();
    Ok(eig.q.mul(&CMatrix::from_diag(&phases)).mul(&eig.q.adjoint()))
}

const UNITARY_INPUT_TOL: f64 = 1e-8;

/// Principal logarithm of a unitary: hermitian `K` with `e^{iπK} = u` and
/// eigenvalues of `K` in `(-1, 1]`; the phase `π` maps to `+1`.
pub fn logm_unitary(u: &CMatrix) -> Result<CMatrix> {
    let n = u.n();
    let rep = defects(u);
    if rep.unitarity > UNITARY_INPUT_TOL * n as f64 {
        return Err(Error::NotUnitary {
            defect: rep.unitarity,
            tol: UNITARY_INPUT_TOL * n as f64,
        });
    }
    // A unitary is normal, so its hermitian and skew parts commute exactly;
    // diagonalize both at once and read phases off the joint diagonal.
    let h1 = u.hermitian_part();
    let h2 = u.antihermitian_part();
    let jd = kernels::joint_jacobi(&[h1, h2], kernels::MAX_SWEEPS);
    let mut kvals = Vec::with_capacity(n);
    for i in 0..n {
        let re = jd.transformed[0].get(i, i).re;
        let im = jd.transformed[1].get(i, i).re;
        let mut theta = im.atan2(re);
        if theta <= -std::f64::consts::PI {
            theta = std::f64::consts::PI;
        }
        kvals.push(Complex64::new(theta / std::f64::consts::PI, 0.0));
    }
    let k = jd.q.mul(&CMatrix::from_diag(&kvals)).mul(&jd.q.adjoint());
    Ok(k.hermitian_part())
}

const RANK_FLOOR: f64 = 1e-12;

/// Unitary polar factor: the unitary minimizing `||a - u||` over all
/// unitaries. Requires `a` invertible (smallest singular value above 1e-12).
pub fn nearest_unitary(a: &CMatrix) -> Result<CMatrix> {
    let (b, sigmas, v) = kernels::svd_uv(a);
    let smin = sigmas.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(smin > RANK_FLOOR) {
        return Err(Error::RankDeficient {
            sigma_min: smin,
            floor: RANK_FLOOR,
        });
    }
    let n = a.n();
    // b = a v has orthogonal columns with norms sigmas; u = b diag(1/sigma) v*.
    let mut u = b;
    for j in 0..n {
        let inv = 1.0 / sigmas[j];
        for i in 0..n {
            let val = u.get(i, j) * inv;
            u.set(i, j, val);
        }
    }
    Ok(u.mul(&v.adjoint()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn r(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn rejects_non_finite_and_bad_shape() {
        assert!(matches!(
            CMatrix::new(2, vec![r(1.0); 3]),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(matches!(
            CMatrix::new(1, vec![c(f64::NAN, 0.0)]),
            Err(Error::NonFinite)
        ));
    }

    #[test]
    fn op_norm_matches_svd_oracle_on_nilpotent() {
        // [[0,1],[0,0]] has singular values {1, 0}.
        let a = CMatrix::from_rows(&[vec![r(0.0), r(1.0)], vec![r(0.0), r(0.0)]]).unwrap();
        assert!((op_norm(&a) - 1.0).abs() < 1e-12);
        let vals = kernels::svd_values(&a);
        let mx = vals.iter().cloned().fold(0.0, f64::max);
        assert!((mx - 1.0).abs() < 1e-14);
    }

    #[test]
    fn op_norm_diagonal() {
        let a = CMatrix::from_diag(&[r(0.5), r(-0.8)]);
        assert!((op_norm(&a) - 0.8).abs() < 1e-12);
    }

    #[test]
    fn op_norm_unitary_invariance_and_submultiplicativity() {
        let a = CMatrix::from_rows(&[
            vec![c(0.3, -0.2), c(0.1, 0.7), r(-0.4)],
            vec![c(0.0, 0.9), r(0.2), c(0.5, 0.1)],
            vec![r(1.1), c(-0.3, 0.3), c(0.2, -0.6)],
        ])
        .unwrap();
        let b = CMatrix::from_rows(&[
            vec![r(0.7), c(0.2, 0.1), c(-0.5, 0.4)],
            vec![c(0.1, -0.1), r(-0.9), r(0.3)],
            vec![c(0.6, 0.2), r(0.0), c(0.1, 0.8)],
        ])
        .unwrap();
        let na = op_norm(&a);
        let nb = op_norm(&b);
        let nab = op_norm(&a.mul(&b));
        assert!(nab <= na * nb + 1e-12 * 3.0);
        // conjugate by a simple unitary (permutation * phase)
        let u = CMatrix::from_rows(&[
            vec![r(0.0), c(0.0, 1.0), r(0.0)],
            vec![r(1.0), r(0.0), r(0.0)],
            vec![r(0.0), r(0.0), c(0.0, -1.0)],
        ])
        .unwrap();
        let conj = unitary_conjugate(&u, &a).unwrap();
        assert!((op_norm(&conj) - na).abs() < 1e-12 * 3.0);
    }

    #[test]
    fn commutator_of_shift_pair_is_diag_1_minus_1() {
        let e12 = CMatrix::from_rows(&[vec![r(0.0), r(1.0)], vec![r(0.0), r(0.0)]]).unwrap();
        let e21 = e12.adjoint();
        let comm = commutator(&e12, &e21).unwrap();
        let expect = CMatrix::from_diag(&[r(1.0), r(-1.0)]);
        assert!(comm.max_abs_diff(&expect) == 0.0);
        assert!((op_norm(&comm) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn defects_flag_normality_of_jordan_block() {
        let a = CMatrix::from_rows(&[vec![r(0.0), r(1.0)], vec![r(0.0), r(0.0)]]).unwrap();
        let rep = defects(&a);
        assert!((rep.normality - 1.0).abs() < 1e-12);
        assert!((rep.hermitian - 1.0).abs() < 1e-12); // ||A - A*|| = 1 here
    }

    #[test]
    fn herm_eig_pauli_x() {
        let h = CMatrix::from_rows(&[vec![r(0.0), r(1.0)], vec![r(1.0), r(0.0)]]).unwrap();
        let eig = herm_eig(&h).unwrap();
        assert!((eig.values[0] + 1.0).abs() < 1e-14);
        assert!((eig.values[1] - 1.0).abs() < 1e-14);
        assert!(eig.reconstruct().max_abs_diff(&h) < 1e-13);
    }

    #[test]
    fn herm_eig_is_deterministic_and_accurate() {
        let h = CMatrix::from_rows(&[
            vec![r(0.2), c(0.1, 0.3), c(-0.4, 0.05)],
            vec![c(0.1, -0.3), r(-0.7), c(0.0, 0.2)],
            vec![c(-0.4, -0.05), c(0.0, -0.2), r(0.5)],
        ])
        .unwrap();
        let e1 = herm_eig(&h).unwrap();
        let e2 = herm_eig(&h).unwrap();
        assert_eq!(e1.values, e2.values);
        assert_eq!(e1.q, e2.q);
        let resid = e1.reconstruct().max_abs_diff(&h);
        assert!(resid < 1e-10 * 3.0 * op_norm(&h), "residual {resid}");
        let qtq = e1.q.adjoint().mul(&e1.q);
        assert!(qtq.max_abs_diff(&CMatrix::identity(3)) < 1e-13);
    }

    #[test]
    fn herm_eig_rejects_non_hermitian() {
        let a = CMatrix::from_rows(&[vec![r(0.0), r(1.0)], vec![r(0.0), r(0.0)]]).unwrap();
        assert!(matches!(herm_eig(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn expm_of_half_is_i() {
        let k = CMatrix::from_diag(&[r(0.5)]);
        let u = expm_i_pi(&k).unwrap();
        assert!((u.get(0, 0) - c(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn logm_branch_maps_minus_one_to_plus_one() {
        let u = CMatrix::from_diag(&[r(-1.0)]);
        let k = logm_unitary(&u).unwrap();
        assert!((k.get(0, 0) - r(1.0)).norm() < 1e-14);
        let ui = CMatrix::from_diag(&[c(0.0, 1.0)]);
        let ki = logm_unitary(&ui).unwrap();
        assert!((ki.get(0, 0) - r(0.5)).norm() < 1e-14);
    }

    #[test]
    fn expm_logm_roundtrip() {
        let k = CMatrix::from_rows(&[
            vec![r(0.3), c(0.2, -0.1)],
            vec![c(0.2, 0.1), r(-0.6)],
        ])
        .unwrap();
        let u = expm_i_pi(&k).unwrap();
        assert!(defects(&u).unitarity < 1e-12);
        let k2 = logm_unitary(&u).unwrap();
        assert!(k2.max_abs_diff(&k) < 1e-12, "diff {}", k2.max_abs_diff(&k));
    }

    #[test]
    fn nearest_unitary_of_diagonal() {
        let a = CMatrix::from_diag(&[r(2.0), c(1.0, 1.0)]);
        let u = nearest_unitary(&a).unwrap();
        let s = 1.0 / 2.0_f64.sqrt();
        assert!((u.get(0, 0) - r(1.0)).norm() < 1e-14);
        assert!((u.get(1, 1) - c(s, s)).norm() < 1e-14);
    }

    #[test]
    fn nearest_unitary_rejects_singular() {
        let a = CMatrix::from_diag(&[r(1.0), r(0.0)]);
        assert!(matches!(
            nearest_unitary(&a),
            Err(Error::RankDeficient { .. })
        ));
    }

    #[test]
    fn nearest_unitary_minimizes_distance_locally() {
        // compare against phase-perturbed candidates
        let a = CMatrix::from_rows(&[
            vec![c(0.9, 0.1), c(0.1, -0.2)],
            vec![c(-0.05, 0.3), c(0.8, -0.4)],
        ])
        .unwrap();
        let u = nearest_unitary(&a).unwrap();
        assert!(defects(&u).unitarity < 1e-13);
        let base = op_norm(&a.sub(&u));
        for t in [-0.05_f64, 0.03, 0.08] {
            let k = CMatrix::from_rows(&[
                vec![r(t), c(0.0, t / 2.0)],
                vec![c(0.0, -t / 2.0), r(-t)],
            ])
            .unwrap();
            let cand = u.mul(&expm_i_pi(&k).unwrap());
            assert!(op_norm(&a.sub(&cand)) >= base - 1e-12);
        }
    }
}
