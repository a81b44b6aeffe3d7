//! Deterministic numerical engines: cyclic Jacobi (single and joint),
//! one-sided Jacobi SVD, power-iteration operator norm, and a shifted-QR
//! eigensolver for general matrices.
//!
//! No randomized pivoting anywhere; sweep orders are fixed, so every routine
//! is a pure function of its input bits.

use crate::matcore::{CMatrix, HermEigDecomposition};
use crate::{Complex64, Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub(crate) const MAX_SWEEPS: usize = 64;

pub(crate) struct JointDiagResult {
    pub q: CMatrix,
    pub transformed: Vec<CMatrix>,
}

/// Top eigenvector of a 3x3 real symmetric PSD matrix, by fixed Jacobi
/// sweeps; sign-canonical (first nonzero component positive).
pub(crate) fn sym3_top_eigvec(g: [[f64; 3]; 3]) -> [f64; 3] {
    let mut a = g;
    let mut v = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    for _ in 0..12 {
        for (p, q) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let apq = a[p][q];
            if apq.abs() <= 1e-300 {
                continue;
            }
            let tau = (a[q][q] - a[p][p]) / (2.0 * apq);
            let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
            let c = 1.0 / (1.0 + t * t).sqrt();
            let s = t * c;
            for i in 0..3 {
                let (aip, aiq) = (a[i][p], a[i][q]);
                a[i][p] = c * aip - s * aiq;
                a[i][q] = s * aip + c * aiq;
            }
            for j in 0..3 {
                let (apj, aqj) = (a[p][j], a[q][j]);
                a[p][j] = c * apj - s * aqj;
                a[q][j] = s * apj + c * aqj;
            }
            for i in 0..3 {
                let (vip, viq) = (v[i][p], v[i][q]);
                v[i][p] = c * vip - s * viq;
                v[i][q] = s * vip + c * viq;
            }
        }
    }
    let mut best = 0;
    for i in 1..3 {
        if a[i][i] > a[best][best] {
            best = i;
        }
    }
    let mut w = [v[0][best], v[1][best], v[2][best]];
    let flip = if w[0] != 0.0 {
        w[0] < 0.0
    } else if w[1] != 0.0 {
        w[1] < 0.0
    } else {
        w[2] < 0.0
    };
    if flip {
        for wi in &mut w {
            *wi = -*wi;
        }
    }
    w
}

/// Complex Jacobi rotation parameters (c real, s complex) from a canonical
/// unit 3-vector `w`; the rotation is `[[c, s], [-conj(s), c]]`.
#[inline]
fn cs_from_w(w: [f64; 3]) -> (f64, Complex64) {
    let c = ((1.0 + w[0]) / 2.0).sqrt();
    let s = Complex64::new(-w[1] / (2.0 * c), -w[2] / (2.0 * c));
    (c, s)
}

#[inline]
fn rotate_cols(m: &mut CMatrix, p: usize, q: usize, c: f64, s: Complex64) {
    let n = m.n();
    let data = m.data_mut();
    let sc = s.conj();
    for i in 0..n {
        let (mip, miq) = (data[i * n + p], data[i * n + q]);
        data[i * n + p] = mip * c - miq * sc;
        data[i * n + q] = mip * s + miq * c;
    }
}

#[inline]
fn rotate_rows(m: &mut CMatrix, p: usize, q: usize, c: f64, s: Complex64) {
    let n = m.n();
    let data = m.data_mut();
    let sc = s.conj();
    for j in 0..n {
        let (mpj, mqj) = (data[p * n + j], data[q * n + j]);
        data[p * n + j] = mpj * c - mqj * s;
        data[q * n + j] = mpj * sc + mqj * c;
    }
}

fn offdiag_sq(mats: &[CMatrix]) -> f64 {
    let mut total = 0.0;
    for m in mats {
        let n = m.n();
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    total += m.get(i, j).norm_sqr();
                }
            }
        }
    }
    total
}

/// Simultaneous approximate diagonalization of a family of hermitian
/// matrices by cyclic joint Jacobi sweeps. Each pair rotation maximizes the
/// family's diagonal mass exactly (top eigenvector of the 3x3 pair Gram).
/// For a commuting family the off-diagonal mass converges to roundoff; for
/// near-commuting families it plateaus at the obstruction, which the caller
/// inspects.
pub(crate) fn joint_jacobi(mats: &[CMatrix], max_sweeps: usize) -> JointDiagResult {
    let n = mats.first().map_or(0, CMatrix::n);
    let mut work: Vec<CMatrix> = mats.to_vec();
    let mut q = CMatrix::identity(n);
    if n <= 1 || mats.is_empty() {
        return JointDiagResult {
            q,
            transformed: work,
        };
    }
    let scale_sq: f64 = work.iter().map(|m| m.fro_norm().powi(2)).sum();
    if scale_sq == 0.0 {
        return JointDiagResult {
            q,
            transformed: work,
        };
    }
    let target = scale_sq * 1e-30 * n as f64;
    let pair_skip = scale_sq * 1e-32;
    let mut prev = f64::INFINITY;
    for _ in 0..max_sweeps {
        for p in 0..n - 1 {
            for qq in p + 1..n {
                let mut g = [[0.0f64; 3]; 3];
                let mut pair_mass = 0.0;
                for m in work.iter() {
                    let h = [
                        m.get(p, p).re - m.get(qq, qq).re,
                        2.0 * m.get(p, qq).re,
                        2.0 * m.get(p, qq).im,
                    ];
                    pair_mass += m.get(p, qq).norm_sqr();
                    for a in 0..3 {
                        for b in 0..3 {
                            g[a][b] += h[a] * h[b];
                        }
                    }
                }
                if pair_mass <= pair_skip {
                    continue;
                }
                let w = sym3_top_eigvec(g);
                let (c, s) = cs_from_w(w);
                if s.norm_sqr() <= 1e-34 {
                    continue;
                }
                for m in work.iter_mut() {
                    rotate_cols(m, p, qq, c, s);
                    rotate_rows(m, p, qq, c, s);
                }
                rotate_cols(&mut q, p, qq, c, s);
            }
        }
        let off = offdiag_sq(&work);
        if off <= target || off >= prev * 0.999 {
            break;
        }
        prev = off;
    }
    JointDiagResult {
        q,
        transformed: work,
    }
}

/// Hermitian eigendecomposition: Jacobi diagonalization, eigenvalues sorted
/// ascending, eigenvector column phases fixed so the largest-modulus entry
/// of each column is real positive.
pub(crate) fn hermitian_eig(h: &CMatrix) -> HermEigDecomposition {
    let n = h.n();
    let jd = joint_jacobi(std::slice::from_ref(h), MAX_SWEEPS);
    let raw: Vec<f64> = (0..n).map(|i| jd.transformed[0].get(i, i).re).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| raw[a].partial_cmp(&raw[b]).unwrap().then(a.cmp(&b)));
    let values: Vec<f64> = order.iter().map(|&i| raw[i]).collect();
    let mut q = CMatrix::zeros(n);
    for (newj, &oldj) in order.iter().enumerate() {
        // canonical phase: largest-modulus entry made real positive
        let mut imax = 0;
        let mut best = -1.0;
        for i in 0..n {
            let a = jd.q.get(i, oldj).norm();
            if a > best {
                best = a;
                imax = i;
            }
        }
        let pivot = jd.q.get(imax, oldj);
        let phase = if pivot.norm() > 0.0 {
            pivot.conj() / pivot.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..n {
            q.set(i, newj, jd.q.get(i, oldj) * phase);
        }
    }
    HermEigDecomposition { values, q }
}

/// One-sided Jacobi SVD core: returns `b = a * v` with orthogonal columns,
/// the column norms (unsorted singular values), and optionally `v`.
fn svd_onesided(a: &CMatrix, want_v: bool) -> (CMatrix, Vec<f64>, Option<CMatrix>) {
    let n = a.n();
    let mut b = a.clone();
    let mut v = if want_v {
        Some(CMatrix::identity(n))
    } else {
        None
    };
    if n > 1 {
        for _ in 0..MAX_SWEEPS {
            let mut rotated = false;
            for p in 0..n - 1 {
                for qq in p + 1..n {
                    let mut app = 0.0;
                    let mut aqq = 0.0;
                    let mut apq = Complex64::new(0.0, 0.0);
                    for i in 0..n {
                        let bip = b.get(i, p);
                        let biq = b.get(i, qq);
                        app += bip.norm_sqr();
                        aqq += biq.norm_sqr();
                        apq += bip.conj() * biq;
                    }
                    if apq.norm_sqr() <= 1e-30 * app * aqq {
                        continue;
                    }
                    let g = [app - aqq, 2.0 * apq.re, 2.0 * apq.im];
                    let norm = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
                    if norm == 0.0 {
                        continue;
                    }
                    let mut w = [g[0] / norm, g[1] / norm, g[2] / norm];
                    if w[0] < 0.0 || (w[0] == 0.0 && (w[1] < 0.0 || (w[1] == 0.0 && w[2] < 0.0)))
                    {
                        w = [-w[0], -w[1], -w[2]];
                    }
                    let (c, s) = cs_from_w(w);
                    rotate_cols(&mut b, p, qq, c, s);
                    if let Some(vm) = v.as_mut() {
                        rotate_cols(vm, p, qq, c, s);
                    }
                    rotated = true;
                }
            }
            if !rotated {
                break;
            }
        }
    }
    let sigmas: Vec<f64> = (0..n)
        .map(|j| {
            (0..n)
                .map(|i| b.get(i, j).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    (b, sigmas, v)
}

/// Unsorted singular values of `a`.
pub(crate) fn svd_values(a: &CMatrix) -> Vec<f64> {
    svd_onesided(a, false).1
}

/// `(b, sigmas, v)` with `b = a v`, `b`'s columns orthogonal with norms
/// `sigmas`, and `v` unitary.
pub(crate) fn svd_uv(a: &CMatrix) -> (CMatrix, Vec<f64>, CMatrix) {
    let (b, sigmas, v) = svd_onesided(a, true);
    (b, sigmas, v.expect("v requested"))
}

/// Largest singular value by power iteration on `a* a` from a fixed seeded
/// start vector. The Rayleigh quotient approaches the top eigenvalue from
/// below; iteration stops on relative stagnation. When the top of the
/// spectrum is (nearly) degenerate — commutator residuals have paired
/// singular values, for example — the iteration cannot settle, so after a
/// bounded number of sweeps the exact one-sided Jacobi SVD takes over.
pub(crate) fn sigma_max_power(a: &CMatrix) -> f64 {
    let n = a.n();
    if n == 0 {
        return 0.0;
    }
    if a.fro_norm() == 0.0 {
        return 0.0;
    }
    let c = a.adjoint().mul(a);
    let mut rng = ChaCha8Rng::seed_from_u64(0x746f_7276_6172);
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| {
            let (x, y) = normal_pair(&mut rng);
            Complex64::new(x, y)
        })
        .collect();
    normalize(&mut v);
    let mut lam_prev = 0.0f64;
    let mut lam = 0.0f64;
    let mut stagnant = 0;
    let mut converged = false;
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    for it in 0..600 {
        matvec(&c, &v, &mut w);
        lam = v
            .iter()
            .zip(&w)
            .map(|(vi, wi)| (vi.conj() * wi).re)
            .sum::<f64>();
        let nw = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if nw == 0.0 {
            // start vector lay in the kernel; restart from a basis vector
            v.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            v[it % n] = Complex64::new(1.0, 0.0);
            lam_prev = 0.0;
            stagnant = 0;
            continue;
        }
        for (vi, wi) in v.iter_mut().zip(&w) {
            *vi = wi / nw;
        }
        if it >= 32 {
            if (lam - lam_prev).abs() <= 1e-15 * lam.abs() + 1e-300 {
                stagnant += 1;
                if stagnant >= 3 {
                    converged = true;
                    break;
                }
            } else {
                stagnant = 0;
            }
        }
        lam_prev = lam;
    }
    if !converged {
        return svd_values(a).into_iter().fold(0.0, f64::max);
    }
    lam.max(0.0).sqrt()
}

fn matvec(m: &CMatrix, v: &[Complex64], out: &mut [Complex64]) {
    let n = m.n();
    for i in 0..n {
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..n {
            acc += m.get(i, j) * v[j];
        }
        out[i] = acc;
    }
}

fn normalize(v: &mut [Complex64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|z| *z /= norm);
    }
}

/// One standard-normal pair via Box-Muller.
pub(crate) fn normal_pair(rng: &mut impl Rng) -> (f64, f64) {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // (0, 1]
    let u2: f64 = rng.gen();
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = std::f64::consts::TAU * u2;
    (r * theta.cos(), r * theta.sin())
}

const QR_EPS: f64 = 2.2e-16;

/// Eigenvalues of a general complex matrix: Householder Hessenberg reduction
/// followed by explicitly shifted QR with Wilkinson shifts. Unordered.
pub(crate) fn eigenvalues_general(a: &CMatrix) -> Result<Vec<Complex64>> {
    let n = a.n();
    if n == 0 {
        return Ok(vec![]);
    }
    if n == 1 {
        return Ok(vec![a.get(0, 0)]);
    }
    let mut h = a.clone();
    hessenberg(&mut h);
    let mut hi = n - 1;
    let mut iters_here = 0usize;
    let mut total = 0usize;
    let max_total = 100 * n;
    while hi > 0 {
        // scan for the largest deflation point at or below hi
        let mut lo = hi;
        while lo > 0 {
            let sub = h.get(lo, lo - 1).norm();
            if sub <= QR_EPS * (h.get(lo - 1, lo - 1).norm() + h.get(lo, lo).norm()) + 1e-300 {
                h.set(lo, lo - 1, Complex64::new(0.0, 0.0));
                break;
            }
            lo -= 1;
        }
        if lo == hi {
            hi -= 1;
            iters_here = 0;
            continue;
        }
        total += 1;
        iters_here += 1;
        if total > max_total {
            return Err(Error::Convergence {
                what: "shifted QR eigenvalue iteration",
            });
        }
        let mu = if iters_here % 14 == 0 {
            h.get(hi, hi) + Complex64::new(0.75 * h.get(hi, hi - 1).norm(), 0.0)
        } else {
            wilkinson_shift(&h, hi)
        };
        qr_step(&mut h, lo, hi, mu);
    }
    Ok((0..n).map(|i| h.get(i, i)).collect())
}

fn hessenberg(a: &mut CMatrix) {
    let n = a.n();
    for k in 0..n.saturating_sub(2) {
        let m = n - k - 1;
        let mut x: Vec<Complex64> = (0..m).map(|i| a.get(k + 1 + i, k)).collect();
        let xnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if xnorm <= 1e-300 {
            continue;
        }
        let alpha = if x[0].norm() > 0.0 {
            -(x[0] / x[0].norm()) * xnorm
        } else {
            Complex64::new(-xnorm, 0.0)
        };
        x[0] -= alpha;
        let vnorm = x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if vnorm <= 1e-15 * xnorm {
            continue;
        }
        x.iter_mut().for_each(|z| *z /= vnorm);
        // rows k+1.. : A <- (I - 2vv*) A
        for j in k..n {
            let mut w = Complex64::new(0.0, 0.0);
            for i in 0..m {
                w += x[i].conj() * a.get(k + 1 + i, j);
            }
            let w2 = w * 2.0;
            for i in 0..m {
                let val = a.get(k + 1 + i, j) - x[i] * w2;
                a.set(k + 1 + i, j, val);
            }
        }
        // cols k+1.. : A <- A (I - 2vv*)
        for i in 0..n {
            let mut w = Complex64::new(0.0, 0.0);
            for j in 0..m {
                w += a.get(i, k + 1 + j) * x[j];
            }
            let w2 = w * 2.0;
            for j in 0..m {
                let val = a.get(i, k + 1 + j) - w2 * x[j].conj();
                a.set(i, k + 1 + j, val);
            }
        }
        a.set(k + 1, k, alpha);
        for i in k + 2..n {
            a.set(i, k, Complex64::new(0.0, 0.0));
        }
    }
}

fn wilkinson_shift(h: &CMatrix, hi: usize) -> Complex64 {
    let a = h.get(hi - 1, hi - 1);
    let b = h.get(hi - 1, hi);
    let c = h.get(hi, hi - 1);
    let d = h.get(hi, hi);
    let mid = (a - d) * 0.5;
    let disc = (mid * mid + b * c).sqrt();
    // of d + mid ± disc, take the root closer to d
    if (mid + disc).norm() >= (mid - disc).norm() {
        d + mid - disc
    } else {
        d + mid + disc
    }
}

/// Complex Givens pair zeroing `g` against `f`; rotation `[[c, s], [-conj(s), c]]`
/// applied on the left to rows (f_row, g_row).
fn givens(f: Complex64, g: Complex64) -> (f64, Complex64) {
    let fg = (f.norm_sqr() + g.norm_sqr()).sqrt();
    if fg == 0.0 || g.norm() == 0.0 {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if f.norm() == 0.0 {
        return (0.0, g.conj() / g.norm());
    }
    let c = f.norm() / fg;
    let s = (f / f.norm()) * g.conj() / fg;
    (c, s)
}

/// One explicit shifted QR step on the active block `[lo..=hi]`.
fn qr_step(h: &mut CMatrix, lo: usize, hi: usize, mu: Complex64) {
    let n = h.n();
    for i in lo..=hi {
        let val = h.get(i, i) - mu;
        h.set(i, i, val);
    }
    let mut rots: Vec<(f64, Complex64)> = Vec::with_capacity(hi - lo);
    for i in lo..hi {
        let (c, s) = givens(h.get(i, i), h.get(i + 1, i));
        rots.push((c, s));
        // rows i, i+1: G H with G = [[c, s], [-conj(s), c]]
        for j in i..n {
            let (top, bot) = (h.get(i, j), h.get(i + 1, j));
            h.set(i, j, top * c + s * bot);
            h.set(i + 1, j, bot * c - s.conj() * top);
        }
        h.set(i + 1, i, Complex64::new(0.0, 0.0));
    }
    for (idx, (c, s)) in rots.iter().enumerate() {
        let i = lo + idx;
        // cols i, i+1: H G* with G* = [[c, -s], [conj(s), c]]
        let top_row = (i + 2).min(hi + 1);
        for r in 0..top_row {
            let (left, right) = (h.get(r, i), h.get(r, i + 1));
            h.set(r, i, left * *c + right * s.conj());
            h.set(r, i + 1, right * *c - left * *s);
        }
    }
    for i in lo..=hi {
        let val = h.get(i, i) + mu;
        h.set(i, i, val);
    }
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
    fn sym3_top_eigvec_identity_like() {
        let w = sym3_top_eigvec([[2.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 0.5]]);
        assert!((w[0] - 1.0).abs() < 1e-14);
        assert!(w[1].abs() < 1e-14 && w[2].abs() < 1e-14);
    }

    #[test]
    fn sym3_top_eigvec_known_2x2_block() {
        // [[1,1,0],[1,1,0],[0,0,0]] has top eigenvector (1,1,0)/sqrt(2)
        let w = sym3_top_eigvec([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 0.0]]);
        let s = 1.0 / 2.0f64.sqrt();
        assert!((w[0] - s).abs() < 1e-12 && (w[1] - s).abs() < 1e-12);
    }

    #[test]
    fn joint_jacobi_diagonalizes_pauli_z_pair() {
        // sigma_x and a matrix commuting with it
        let sx = CMatrix::from_rows(&[vec![r(0.0), r(1.0)], vec![r(1.0), r(0.0)]]).unwrap();
        let other = CMatrix::from_rows(&[vec![r(2.0), r(3.0)], vec![r(3.0), r(2.0)]]).unwrap();
        let jd = joint_jacobi(&[sx.clone(), other.clone()], MAX_SWEEPS);
        for t in &jd.transformed {
            for i in 0..2 {
                for j in 0..2 {
                    if i != j {
                        assert!(t.get(i, j).norm() < 1e-14);
                    }
                }
            }
        }
        // reconstruction
        let rec = jd.q.mul(&jd.transformed[0]).mul(&jd.q.adjoint());
        assert!(rec.max_abs_diff(&sx) < 1e-13);
    }

    #[test]
    fn joint_jacobi_on_commuting_3x3_family() {
        // build commuting pair by conjugating diagonals with a fixed unitary
        let d1 = CMatrix::from_diag(&[r(0.3), r(-0.5), r(0.9)]);
        let d2 = CMatrix::from_diag(&[r(-0.2), r(0.7), r(0.1)]);
        let k = CMatrix::from_rows(&[
            vec![r(0.1), c(0.2, 0.3), c(-0.1, 0.05)],
            vec![c(0.2, -0.3), r(-0.4), c(0.0, 0.6)],
            vec![c(-0.1, -0.05), c(0.0, -0.6), r(0.2)],
        ])
        .unwrap();
        let u = crate::matcore::expm_i_pi(&k).unwrap();
        let x1 = u.mul(&d1).mul(&u.adjoint());
        let x2 = u.mul(&d2).mul(&u.adjoint());
        let jd = joint_jacobi(&[x1.clone(), x2.clone()], MAX_SWEEPS);
        let off: f64 = jd
            .transformed
            .iter()
            .map(|t| {
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        if i != j {
                            s += t.get(i, j).norm_sqr();
                        }
                    }
                }
                s
            })
            .sum();
        assert!(off < 1e-24, "off-diagonal mass {off}");
        let rec1 = jd.q.mul(&jd.transformed[0]).mul(&jd.q.adjoint());
        assert!(rec1.max_abs_diff(&x1) < 1e-12);
    }

    #[test]
    fn svd_values_of_known_matrix() {
        // A = [[3,0],[4,5]] has singular values sqrt(45)=6.708..., sqrt(5)=2.236...
        let a = CMatrix::from_rows(&[vec![r(3.0), r(0.0)], vec![r(4.0), r(5.0)]]).unwrap();
        let mut s = svd_values(&a);
        s.sort_by(|x, y| y.partial_cmp(x).unwrap());
        assert!((s[0] - 45.0f64.sqrt()).abs() < 1e-12);
        assert!((s[1] - 5.0f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn svd_uv_factors_consistently() {
        let a = CMatrix::from_rows(&[
            vec![c(0.3, -0.2), c(0.1, 0.7), r(-0.4)],
            vec![c(0.0, 0.9), r(0.2), c(0.5, 0.1)],
            vec![r(1.1), c(-0.3, 0.3), c(0.2, -0.6)],
        ])
        .unwrap();
        let (b, sigmas, v) = svd_uv(&a);
        // b = a v
        assert!(b.max_abs_diff(&a.mul(&v)) < 1e-12);
        // v unitary
        assert!(v.adjoint().mul(&v).max_abs_diff(&CMatrix::identity(3)) < 1e-13);
        // columns of b orthogonal with norms sigmas
        for p in 0..3 {
            for q in 0..3 {
                let mut dot = c(0.0, 0.0);
                for i in 0..3 {
                    dot += b.get(i, p).conj() * b.get(i, q);
                }
                if p == q {
                    assert!((dot.re.sqrt() - sigmas[p]).abs() < 1e-10);
                } else {
                    assert!(dot.norm() < 1e-10 * (sigmas[p] * sigmas[q]).max(1e-30));
                }
            }
        }
    }

    #[test]
    fn power_norm_agrees_with_jacobi_svd() {
        let a = CMatrix::from_rows(&[
            vec![c(0.3, -0.2), c(0.1, 0.7), r(-0.4), r(0.9)],
            vec![c(0.0, 0.9), r(0.2), c(0.5, 0.1), c(0.1, -0.8)],
            vec![r(1.1), c(-0.3, 0.3), c(0.2, -0.6), r(0.0)],
            vec![c(-0.7, 0.1), r(0.4), c(0.0, 0.2), c(0.3, 0.3)],
        ])
        .unwrap();
        let svd_max = svd_values(&a).into_iter().fold(0.0, f64::max);
        let pw = sigma_max_power(&a);
        assert!(
            (svd_max - pw).abs() < 1e-10 * svd_max,
            "svd {svd_max} vs power {pw}"
        );
    }

    #[test]
    fn eigenvalues_of_rotation_block() {
        // [[0,-1],[1,0]] has eigenvalues ±i
        let a = CMatrix::from_rows(&[vec![r(0.0), r(-1.0)], vec![r(1.0), r(0.0)]]).unwrap();
        let mut ev = eigenvalues_general(&a).unwrap();
        ev.sort_by(|x, y| x.im.partial_cmp(&y.im).unwrap());
        assert!((ev[0] - c(0.0, -1.0)).norm() < 1e-12);
        assert!((ev[1] - c(0.0, 1.0)).norm() < 1e-12);
    }

    #[test]
    fn eigenvalues_of_jordan_block_cluster_at_zero() {
        let a = CMatrix::from_rows(&[
            vec![r(0.0), r(1.0), r(0.0)],
            vec![r(0.0), r(0.0), r(1.0)],
            vec![r(0.0), r(0.0), r(0.0)],
        ])
        .unwrap();
        let ev = eigenvalues_general(&a).unwrap();
        // defective eigenvalue: accuracy only to eps^(1/3)
        for e in ev {
            assert!(e.norm() < 1e-4, "eigenvalue {e} too far from 0");
        }
    }

    #[test]
    fn eigenvalues_of_upper_triangular() {
        let a = CMatrix::from_rows(&[
            vec![c(1.0, 2.0), r(5.0), r(-3.0)],
            vec![r(0.0), c(-0.5, 0.1), r(7.0)],
            vec![r(0.0), r(0.0), c(0.25, -1.0)],
        ])
        .unwrap();
        let mut ev = eigenvalues_general(&a).unwrap();
        ev.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        let mut expect = [c(1.0, 2.0), c(-0.5, 0.1), c(0.25, -1.0)];
        expect.sort_by(|x, y| x.re.partial_cmp(&y.re).unwrap());
        for (e, x) in ev.iter().zip(&expect) {
            assert!((e - x).norm() < 1e-10, "{e} vs {x}");
        }
    }

    #[test]
    fn eigenvalues_match_trace_and_det_2x2() {
        let a = CMatrix::from_rows(&[vec![c(0.2, 0.1), c(-0.4, 0.6)], vec![c(0.9, -0.3), c(-0.7, 0.2)]])
            .unwrap();
        let ev = eigenvalues_general(&a).unwrap();
        let tr = a.get(0, 0) + a.get(1, 1);
        let det = a.get(0, 0) * a.get(1, 1) - a.get(0, 1) * a.get(1, 0);
        assert!((ev[0] + ev[1] - tr).norm() < 1e-12);
        assert!((ev[0] * ev[1] - det).norm() < 1e-12);
    }

    #[test]
    fn normal_pair_statistics_sane() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        let k = 20_000;
        for _ in 0..k {
            let (a, b) = normal_pair(&mut rng);
            sum += a + b;
            sumsq += a * a + b * b;
        }
        let mean = sum / (2 * k) as f64;
        let var = sumsq / (2 * k) as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        assert!((var - 1.0).abs() < 0.05, "var {var}");
    }
}
