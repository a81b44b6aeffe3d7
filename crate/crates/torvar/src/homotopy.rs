//! Piecewise matrix paths and the certified local homotopy builders on the
//! cube, disk, and torus varieties.
//!
//! A path between nearby commuting tuples runs through four stages: a short
//! hop from the start tuple onto a quantized model of itself, a curved
//! (conjugation) stage that carries the quantized model into the target's
//! eigenbasis, and two flat stages through the exact joint-spectrum model of
//! the start down to the target. Certificates report measured membership
//! defects and distances alongside rigorous per-segment bounds.

use crate::correction::commuting_unitary_correction;
use crate::jointspec::intertwiner;
use crate::matcore::{commutator, expm_i_pi, logm_unitary, op_norm, CMatrix};
use crate::psra::{build_grids, projector_from_columns, round_clustered, ProjectiveDecomposition};
use crate::varieties::{eth, variety_defect, MatrixTuple, VarietyKind};
use crate::{tol_certificate, Complex64, Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

// junction mismatch allowed when splicing segments, per unit dimension
const CONTINUITY_TOL: f64 = 1e-9;
// slack multiplier when validating the eth(x,y) <= delta precondition
const RADIUS_SLACK: f64 = 1e-9;

/// One smooth piece of a matrix path on `[0, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub enum PathSegment {
    /// `(1-t) a + t b`.
    Flat { a: CMatrix, b: CMatrix },
    /// `Ad[exp(i pi phi(t) k_hat)](base)` with `phi` affine from `t0` to `t1`.
    Curved {
        k_hat: CMatrix,
        base: CMatrix,
        t0: f64,
        t1: f64,
    },
    /// `exp(i pi ((1-t) h_u + t h_v))`; the exponents share an eigenbasis so
    /// every point is unitary and the eigenphases move monotonically.
    FlatUnitary { h_u: CMatrix, h_v: CMatrix },
}

impl PathSegment {
    pub fn eval(&self, t: f64) -> Result<CMatrix> {
        match self {
            PathSegment::Flat { a, b } => Ok(a.scale_re(1.0 - t).add(&b.scale_re(t))),
            PathSegment::Curved { k_hat, base, t0, t1 } => {
                let phase = t0 + t * (t1 - t0);
                let u = expm_i_pi(&k_hat.scale_re(phase))?;
                Ok(u.mul(base).mul(&u.adjoint()))
            }
            PathSegment::FlatUnitary { h_u, h_v } => {
                expm_i_pi(&h_u.scale_re(1.0 - t).add(&h_v.scale_re(t)))
            }
        }
    }

    fn n(&self) -> usize {
        match self {
            PathSegment::Flat { a, .. } => a.n(),
            PathSegment::Curved { base, .. } => base.n(),
            PathSegment::FlatUnitary { h_u, .. } => h_u.n(),
        }
    }
}

/// Continuous piecewise path of matrices on `[0, 1]`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MatrixPath {
    pub segments: Vec<PathSegment>,
    /// Parameter values where segments meet: `segments.len() + 1` reals from
    /// 0 to 1, strictly increasing.
    pub breaks: Vec<f64>,
}

impl MatrixPath {
    pub fn single(segment: PathSegment) -> MatrixPath {
        MatrixPath {
            segments: vec![segment],
            breaks: vec![0.0, 1.0],
        }
    }

    /// Validating constructor: checks break-vector shape and continuity at
    /// every junction within `1e-9 * n`.
    pub fn new(segments: Vec<PathSegment>, breaks: Vec<f64>) -> Result<MatrixPath> {
        if segments.is_empty() || breaks.len() != segments.len() + 1 {
            return Err(Error::Domain(format!(
                "path needs k segments and k+1 breaks, got {} and {}",
                segments.len(),
                breaks.len()
            )));
        }
        if breaks[0] != 0.0 || *breaks.last().unwrap() != 1.0 {
            return Err(Error::Domain("path breaks must span [0, 1]".into()));
        }
        if breaks.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Domain("path breaks must strictly increase".into()));
        }
        let n = segments[0].n();
        if segments.iter().any(|s| s.n() != n) {
            return Err(Error::DimensionMismatch {
                context: "path segments of unequal dimension".into(),
            });
        }
        let tol = CONTINUITY_TOL * n as f64;
        for pair in segments.windows(2) {
            let gap = op_norm(&pair[0].eval(1.0)?.sub(&pair[1].eval(0.0)?));
            if gap > tol {
                return Err(Error::Domain(format!(
                    "path junction mismatch {gap:.3e} exceeds {tol:.3e}"
                )));
            }
        }
        Ok(MatrixPath { segments, breaks })
    }

    pub fn n(&self) -> usize {
        self.segments[0].n()
    }

    /// Piecewise evaluation; boundaries belong to the right-hand segment
    /// except `t = 1`.
    pub fn eval(&self, t: f64) -> Result<CMatrix> {
        if !(0.0..=1.0).contains(&t) {
            return Err(Error::Domain(format!("path parameter {t} outside [0, 1]")));
        }
        let idx = self
            .breaks
            .partition_point(|&b| b <= t)
            .saturating_sub(1)
            .min(self.segments.len() - 1);
        let (b0, b1) = (self.breaks[idx], self.breaks[idx + 1]);
        self.segments[idx].eval((t - b0) / (b1 - b0))
    }
}

/// Join two paths end to start: the result traverses `p` on `[0, 1/2]` and
/// `q` on `[1/2, 1]`, so `result(s) = p(2s)` then `q(2s - 1)`.
pub fn concat(p: &MatrixPath, q: &MatrixPath) -> Result<MatrixPath> {
    let pn = p.n();
    if pn != q.n() {
        return Err(Error::DimensionMismatch {
            context: "concatenating paths of unequal dimension".into(),
        });
    }
    let gap = op_norm(&p.eval(1.0)?.sub(&q.eval(0.0)?));
    let tol = CONTINUITY_TOL * pn as f64;
    if gap > tol {
        return Err(Error::Domain(format!(
            "concat endpoint mismatch {gap:.3e} exceeds {tol:.3e}"
        )));
    }
    let mut segments = p.segments.clone();
    segments.extend(q.segments.iter().cloned());
    let mut breaks: Vec<f64> = p.breaks.iter().map(|b| b / 2.0).collect();
    breaks.extend(q.breaks.iter().skip(1).map(|b| 0.5 + b / 2.0));
    Ok(MatrixPath { segments, breaks })
}

/// A path of matrix tuples: one matrix path per component, sharing breaks.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TuplePath {
    pub components: Vec<MatrixPath>,
}

impl TuplePath {
    pub fn m(&self) -> usize {
        self.components.len()
    }

    pub fn n(&self) -> usize {
        self.components[0].n()
    }

    pub fn eval(&self, t: f64) -> Result<MatrixTuple> {
        let mats = self
            .components
            .iter()
            .map(|c| c.eval(t))
            .collect::<Result<Vec<_>>>()?;
        MatrixTuple::new(mats)
    }

    /// Component-wise concatenation.
    pub fn concat(&self, other: &TuplePath) -> Result<TuplePath> {
        if self.m() != other.m() {
            return Err(Error::DimensionMismatch {
                context: "concatenating tuple paths of unequal arity".into(),
            });
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(p, q)| concat(p, q))
            .collect::<Result<Vec<_>>>()?;
        Ok(TuplePath { components })
    }

    /// Junction parameters of all components, deduplicated.
    fn all_breaks(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .components
            .iter()
            .flat_map(|c| c.breaks.iter().copied())
            .collect();
        out.sort_unstable_by(f64::total_cmp);
        out.dedup();
        out
    }
}

/// Evaluate a tuple path at `t`.
pub fn eval_path(p: &TuplePath, t: f64) -> Result<MatrixTuple> {
    p.eval(t)
}

/// Knobs shared by the three homotopy builders.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomotopyOptions {
    /// Verification samples per path segment.
    pub samples_per_segment: usize,
    /// Target for the commuting correction's distance to the intertwiner
    /// inverse; purely diagnostic (recorded, never fatal).
    pub correction_target: f64,
}

impl Default for HomotopyOptions {
    fn default() -> Self {
        HomotopyOptions {
            samples_per_segment: 256,
            correction_target: 1.0,
        }
    }
}

/// Quantization and correction figures behind a certificate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EpsilonReport {
    pub delta: f64,
    pub k_m: f64,
    /// `(2 k_m + 3) delta`: the locality budget of the flat-only branch.
    pub eps_1: f64,
    /// `2 * op_norm(1 - w_hat)`, measured; absent when one spectral cell
    /// makes the correction unnecessary.
    pub eps_2: Option<f64>,
    /// `eps_2 + (k_m + 1) delta`; absent alongside `eps_2`.
    pub eps_3: Option<f64>,
    /// Number of spectral cells in the quantization.
    pub n_epsilon: usize,
    /// Whether the commuting correction succeeded (false means the raw
    /// intertwiner was used, typically inflating `eps_2`).
    pub corrected: bool,
    /// Bottleneck joint-spectrum matching cost.
    pub matching_cost: f64,
}

/// Sampling-based evidence that a path stays on a variety near a center.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HomotopyCertificate {
    pub variety: VarietyKind,
    /// Claimed deviation bound; builders put their rigorous per-segment
    /// bound here, bare verification records the caller's epsilon.
    pub epsilon_budget: f64,
    pub max_membership_defect: f64,
    pub max_eth_deviation: f64,
    /// Distances of path(0) and path(1) to the tuples they must hit (the
    /// builders' endpoints; the center twice for a bare verification).
    pub endpoint_residuals: (f64, f64),
    pub samples: usize,
    pub defect_tol: f64,
    pub passed: bool,
    pub epsilons: Option<EpsilonReport>,
}

/// Sample a tuple path and check membership and locality.
///
/// Samples are uniform on `[0, 1]` with every segment boundary forced in;
/// the path passes when the worst variety defect stays within `1e-8 * n` and
/// the worst `eth` deviation from `center` stays within `epsilon`, up to a
/// relative rounding allowance — the deviation and the budget can be two
/// float evaluations of the same exact quantity (a pair at distance zero
/// saturates its own bound), and ulp-level ties must not fail. Failures are
/// encoded in the certificate, not raised.
pub fn verify_path(
    path: &TuplePath,
    kind: VarietyKind,
    center: &MatrixTuple,
    epsilon: f64,
    num_samples: usize,
) -> Result<HomotopyCertificate> {
    if num_samples < 2 {
        return Err(Error::Domain(format!(
            "verification needs at least 2 samples, got {num_samples}"
        )));
    }
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::Domain(format!(
            "deviation budget must be a finite nonnegative real, got {epsilon}"
        )));
    }
    if path.m() != center.m() || path.n() != center.n() {
        return Err(Error::DimensionMismatch {
            context: "verify_path center shape differs from the path".into(),
        });
    }
    let mut ts: Vec<f64> = (0..num_samples)
        .map(|k| k as f64 / (num_samples - 1) as f64)
        .collect();
    ts.extend(path.all_breaks());
    ts.sort_unstable_by(f64::total_cmp);
    ts.dedup();

    let stats = ts
        .par_iter()
        .map(|&t| -> Result<(f64, f64)> {
            let point = path.eval(t)?;
            let defect = variety_defect(&point, kind);
            let deviation = eth(center, &point)?;
            Ok((defect, deviation))
        })
        .try_reduce(
            || (0.0, 0.0),
            |a, b| Ok((a.0.max(b.0), a.1.max(b.1))),
        )?;

    let defect_tol = tol_certificate(path.n());
    Ok(HomotopyCertificate {
        variety: kind,
        epsilon_budget: epsilon,
        max_membership_defect: stats.0,
        max_eth_deviation: stats.1,
        endpoint_residuals: (
            eth(center, &path.eval(0.0)?)?,
            eth(center, &path.eval(1.0)?)?,
        ),
        samples: ts.len(),
        defect_tol,
        passed: stats.0 <= defect_tol && stats.1 <= epsilon * (1.0 + RADIUS_SLACK) + 1e-12,
        epsilons: None,
    })
}

// ---------------------------------------------------------------------------
// shared construction machinery

/// Everything the builders need after aligning and quantizing `x` against
/// `y`'s eigenbasis.
struct AlignedFrame {
    w: CMatrix,
    q_x: CMatrix,
    q_y: CMatrix,
    /// Scalarized x-values in x's own slot order.
    x_scalar: Vec<Vec<f64>>,
    /// Scalarized x-values scattered into y's slots.
    x_in_y: Vec<Vec<f64>>,
    /// Scalarized y-values per slot.
    y_scalar: Vec<Vec<f64>>,
    /// Quantized x-values per y-slot (canonicalized, clamp applied).
    rounded: Vec<Vec<f64>>,
    /// `permutation[k]` is the y-slot matched to x-slot `k`.
    permutation: Vec<usize>,
    d_decomp: ProjectiveDecomposition,
    matching_cost: f64,
}

fn scalarize(kind: VarietyKind, v: Complex64) -> f64 {
    match kind {
        VarietyKind::Cube => v.re,
        VarietyKind::Torus => v.arg() / PI,
        VarietyKind::Disk => unreachable!("disk tuples are partitioned before alignment"),
    }
}

/// `q diag(vals) q*`.
fn basis_diag(q: &CMatrix, vals: &[Complex64]) -> CMatrix {
    let n = q.n();
    CMatrix::from_fn(n, |i, l| {
        (0..n)
            .map(|s| q.get(i, s) * vals[s] * q.get(l, s).conj())
            .sum()
    })
}

fn real_diag(q: &CMatrix, vals: &[f64]) -> CMatrix {
    let complexed: Vec<Complex64> = vals.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    basis_diag(q, &complexed)
}

fn phase_diag(q: &CMatrix, half_phases: &[f64]) -> CMatrix {
    let complexed: Vec<Complex64> = half_phases
        .iter()
        .map(|&h| Complex64::from_polar(1.0, PI * h))
        .collect();
    basis_diag(q, &complexed)
}

/// Shift `h` by an even integer to land within 1 of `reference`; exponents
/// differing by even integers give the same unitary, so this only picks the
/// shorter interpolation arc.
fn align_half_phase(reference: f64, h: f64) -> f64 {
    let mut best = h;
    for shift in [-2.0, 2.0] {
        if (h + shift - reference).abs() < (best - reference).abs() {
            best = h + shift;
        }
    }
    best
}

fn align_and_quantize(
    x: &MatrixTuple,
    y: &MatrixTuple,
    kind: VarietyKind,
    delta: f64,
    clamp_pairs: Option<usize>,
) -> Result<AlignedFrame> {
    let aligned = intertwiner(x, y).map_err(|e| e.at_stage("intertwiner"))?;
    let (m, n) = (x.m(), x.n());
    let grids = build_grids(delta).map_err(|e| e.at_stage("quantization grid"))?;

    let x_scalar: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            aligned.x_spec.values[j]
                .iter()
                .map(|&v| scalarize(kind, v))
                .collect()
        })
        .collect();
    let y_scalar: Vec<Vec<f64>> = (0..m)
        .map(|j| {
            aligned.y_spec.values[j]
                .iter()
                .map(|&v| scalarize(kind, v))
                .collect()
        })
        .collect();
    let mut x_in_y = vec![vec![0.0; n]; m];
    for j in 0..m {
        for k in 0..n {
            x_in_y[j][aligned.permutation[k]] = x_scalar[j][k];
        }
    }

    let mut rounded = vec![vec![0.0; n]; m];
    for j in 0..m {
        let mut sorted: Vec<(usize, f64)> = x_in_y[j].iter().copied().enumerate().collect();
        sorted.sort_unstable_by(|a, b| a.1.total_cmp(&b.1));
        for (slot, v) in round_clustered(&grids, &sorted) {
            rounded[j][slot] = v;
        }
        if kind == VarietyKind::Torus {
            // exp(-i pi) = exp(i pi): one canonical representative per cell
            for v in &mut rounded[j] {
                if *v == -1.0 {
                    *v = 1.0;
                }
            }
        }
    }
    if let Some(pairs) = clamp_pairs {
        // quantized (re, im) value pairs may stick out of the unit disk by up
        // to sqrt(2) * delta; pull them back radially so the recombined
        // approximant stays a contraction
        for slot in 0..n {
            for j in 0..pairs {
                let (a, b) = (rounded[j][slot], rounded[j + pairs][slot]);
                let r = a.hypot(b);
                if r > 1.0 {
                    rounded[j][slot] = a / r;
                    rounded[j + pairs][slot] = b / r;
                }
            }
        }
    }

    // cells: slots with bit-identical quantized value vectors
    let mut cells: Vec<(Vec<u64>, Vec<usize>)> = Vec::new();
    for slot in 0..n {
        let key: Vec<u64> = (0..m).map(|j| rounded[j][slot].to_bits()).collect();
        match cells.iter_mut().find(|(k, _)| *k == key) {
            Some((_, slots)) => slots.push(slot),
            None => cells.push((key, vec![slot])),
        }
    }
    cells.sort_by(|a, b| {
        let va: Vec<f64> = a.0.iter().map(|&bits| f64::from_bits(bits)).collect();
        let vb: Vec<f64> = b.0.iter().map(|&bits| f64::from_bits(bits)).collect();
        va.iter()
            .zip(&vb)
            .map(|(p, q)| p.total_cmp(q))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });

    let projectors: Vec<CMatrix> = cells
        .iter()
        .map(|(_, slots)| projector_from_columns(&aligned.y_spec.q, slots))
        .collect();
    let values: Vec<Vec<f64>> = cells
        .iter()
        .map(|(key, _)| key.iter().map(|&bits| f64::from_bits(bits)).collect())
        .collect();
    let d_decomp = ProjectiveDecomposition {
        projectors,
        n_delta: values.len(),
        values,
    };

    Ok(AlignedFrame {
        w: aligned.w,
        q_x: aligned.x_spec.q,
        q_y: aligned.y_spec.q,
        x_scalar,
        x_in_y,
        y_scalar,
        rounded,
        permutation: aligned.permutation,
        d_decomp,
        matching_cost: aligned.cost,
    })
}

struct BuiltPath {
    path: TuplePath,
    report: EpsilonReport,
    /// `op_norm(1 - w_hat)`; zero when no curved stage exists.
    w_dist: f64,
    budget: f64,
}

/// Largest deviation from `center` along one segment: exact suprema for flat
/// pieces, rigorous envelopes for the curved and unitary-flat ones.
fn segment_sup_bound(seg: &PathSegment, center: &CMatrix, w_dist: f64) -> Result<f64> {
    match seg {
        PathSegment::Flat { a, b } => {
            Ok(op_norm(&a.sub(center)).max(op_norm(&b.sub(center))))
        }
        PathSegment::Curved { k_hat, base, t0, t1 } => {
            let span = t0.abs().max(t1.abs());
            // inside the unit phase span the conjugator never strays farther
            // from 1 than w_hat itself does
            debug_assert!(span <= 1.0 + 1e-12);
            let turn = 2.0 * w_dist * op_norm(base);
            let sweep = PI * span * op_norm(&commutator(k_hat, base)?);
            Ok(op_norm(&base.sub(center)) + turn.min(sweep))
        }
        PathSegment::FlatUnitary { .. } => {
            // commuting exponents: each eigenphase moves monotonically, so
            // the far endpoint dominates the sweep
            let start = seg.eval(0.0)?;
            let end = seg.eval(1.0)?;
            Ok(op_norm(&start.sub(center)) + op_norm(&end.sub(&start)))
        }
    }
}

fn path_budget(path: &TuplePath, center: &MatrixTuple, w_dist: f64) -> Result<f64> {
    let mut budget: f64 = 0.0;
    for (comp, c) in path.components.iter().zip(center.iter()) {
        for seg in &comp.segments {
            budget = budget.max(segment_sup_bound(seg, c, w_dist)?);
        }
    }
    Ok(budget)
}

fn check_preconditions(
    x: &MatrixTuple,
    y: &MatrixTuple,
    kind: VarietyKind,
    radius: f64,
    delta: f64,
    k_m: f64,
) -> Result<()> {
    if !(delta > 0.0 && delta <= 1.0) {
        return Err(Error::Domain(format!(
            "quantization step must lie in (0, 1], got {delta}"
        )));
    }
    if !k_m.is_finite() || k_m < 0.0 {
        return Err(Error::Domain(format!(
            "k_m must be a finite nonnegative real, got {k_m}"
        )));
    }
    let tol = tol_certificate(x.n());
    for (tuple, name) in [(x, "start"), (y, "end")] {
        let defect = variety_defect(tuple, kind);
        if defect > tol {
            return Err(Error::OutsideVariety { kind, defect, tol }.at_stage(match name {
                "start" => "start tuple",
                _ => "end tuple",
            }));
        }
    }
    let dist = eth(x, y)?;
    if dist > radius * (1.0 + RADIUS_SLACK) + 1e-12 {
        return Err(Error::Domain(format!(
            "eth(x, y) = {dist:.6e} exceeds the homotopy radius {radius:.6e}"
        )));
    }
    Ok(())
}

/// Correction stage shared by the cube and torus builders: returns the
/// partition-commuting conjugator `w_hat`, its distance to 1, and whether the
/// blockwise correction succeeded (on failure the raw intertwiner is kept —
/// the path stays exact, only the locality budget inflates).
fn corrected_conjugator(
    frame: &AlignedFrame,
    nu: f64,
) -> (CMatrix, f64, bool) {
    let n = frame.w.n();
    let id = CMatrix::identity(n);
    match commuting_unitary_correction(&frame.w, &frame.d_decomp, nu) {
        Ok(res) => {
            let w_hat = res.z.mul(&frame.w);
            let dist = op_norm(&id.sub(&w_hat));
            (w_hat, dist, true)
        }
        Err(_) => {
            let dist = op_norm(&id.sub(&frame.w));
            (frame.w.clone(), dist, false)
        }
    }
}

fn quarter_path(
    s1: PathSegment,
    s2: PathSegment,
    s3: PathSegment,
    s4: PathSegment,
) -> Result<MatrixPath> {
    let front = concat(&MatrixPath::single(s1), &MatrixPath::single(s2))?;
    let back = concat(&MatrixPath::single(s3), &MatrixPath::single(s4))?;
    concat(&front, &back)
}

fn epsilon_report(
    delta: f64,
    k_m: f64,
    n_cells: usize,
    corrected: bool,
    w_dist: f64,
    matching_cost: f64,
) -> EpsilonReport {
    let (eps_2, eps_3) = if n_cells >= 2 {
        let e2 = 2.0 * w_dist;
        (Some(e2), Some(e2 + (k_m + 1.0) * delta))
    } else {
        (None, None)
    };
    EpsilonReport {
        delta,
        k_m,
        eps_1: (2.0 * k_m + 3.0) * delta,
        eps_2,
        eps_3,
        n_epsilon: n_cells,
        corrected,
        matching_cost,
    }
}

fn build_cube_path(
    x: &MatrixTuple,
    y: &MatrixTuple,
    delta: f64,
    k_m: f64,
    nu: f64,
    clamp_pairs: Option<usize>,
) -> Result<BuiltPath> {
    let frame = align_and_quantize(x, y, VarietyKind::Cube, delta, clamp_pairs)?;
    let (m, n_cells) = (x.m(), frame.d_decomp.n_delta);

    let x_tilde: Vec<CMatrix> = (0..m)
        .map(|j| real_diag(&frame.q_y, &frame.rounded[j]).hermitian_part())
        .collect();
    let lambda: Vec<CMatrix> = (0..m)
        .map(|j| real_diag(&frame.q_y, &frame.x_in_y[j]).hermitian_part())
        .collect();

    let (curved, w_dist, corrected) = if n_cells >= 2 {
        let (w_hat, dist, ok) = corrected_conjugator(&frame, nu);
        let k_hat = logm_unitary(&w_hat).map_err(|e| e.at_stage("conjugator logarithm"))?;
        (Some(k_hat), dist, ok)
    } else {
        (None, 0.0, false)
    };

    let mut components = Vec::with_capacity(m);
    for j in 0..m {
        let s2 = match &curved {
            Some(k_hat) => PathSegment::Curved {
                k_hat: k_hat.clone(),
                base: x_tilde[j].clone(),
                t0: -1.0,
                t1: 0.0,
            },
            None => PathSegment::Flat {
                a: x_tilde[j].clone(),
                b: x_tilde[j].clone(),
            },
        };
        let x_hat = s2.eval(0.0)?;
        let s1 = PathSegment::Flat {
            a: x.get(j).clone(),
            b: x_hat,
        };
        let s3 = PathSegment::Flat {
            a: x_tilde[j].clone(),
            b: lambda[j].clone(),
        };
        let s4 = PathSegment::Flat {
            a: lambda[j].clone(),
            b: y.get(j).clone(),
        };
        components.push(quarter_path(s1, s2, s3, s4)?);
    }
    let path = TuplePath { components };
    let budget = path_budget(&path, x, w_dist)?;
    Ok(BuiltPath {
        path,
        report: epsilon_report(delta, k_m, n_cells, corrected, w_dist, frame.matching_cost),
        w_dist,
        budget,
    })
}

fn build_torus_path(
    x: &MatrixTuple,
    y: &MatrixTuple,
    delta: f64,
    k_m: f64,
    nu: f64,
) -> Result<BuiltPath> {
    let frame = align_and_quantize(x, y, VarietyKind::Torus, delta, None)?;
    let (m, n, n_cells) = (x.m(), x.n(), frame.d_decomp.n_delta);

    let x_tilde: Vec<CMatrix> = (0..m)
        .map(|j| phase_diag(&frame.q_y, &frame.rounded[j]))
        .collect();

    let (curved, w_dist, corrected) = if n_cells >= 2 {
        let (w_hat, dist, ok) = corrected_conjugator(&frame, nu);
        let k_hat = logm_unitary(&w_hat).map_err(|e| e.at_stage("conjugator logarithm"))?;
        (Some(k_hat), dist, ok)
    } else {
        (None, 0.0, false)
    };

    let mut components = Vec::with_capacity(m);
    for j in 0..m {
        let s2 = match &curved {
            Some(k_hat) => PathSegment::Curved {
                k_hat: k_hat.clone(),
                base: x_tilde[j].clone(),
                t0: -1.0,
                t1: 0.0,
            },
            None => PathSegment::Flat {
                a: x_tilde[j].clone(),
                b: x_tilde[j].clone(),
            },
        };

        // segment 1 in x's own eigenbasis: true phases to quantized phases
        // (pulled back through the matching, branch-aligned per slot)
        let h_start: Vec<f64> = frame.x_scalar[j].clone();
        let h_quant: Vec<f64> = (0..n)
            .map(|k| align_half_phase(h_start[k], frame.rounded[j][frame.permutation[k]]))
            .collect();
        let s1 = PathSegment::FlatUnitary {
            h_u: real_diag(&frame.q_x, &h_start).hermitian_part(),
            h_v: real_diag(&frame.q_x, &h_quant).hermitian_part(),
        };

        // segments 3 and 4 in y's eigenbasis: quantized phases back to the
        // exact x-phases, then the shorter arc onto y's phases
        let h_mid: Vec<f64> = (0..n)
            .map(|slot| align_half_phase(frame.rounded[j][slot], frame.x_in_y[j][slot]))
            .collect();
        let h_end: Vec<f64> = (0..n)
            .map(|slot| align_half_phase(h_mid[slot], frame.y_scalar[j][slot]))
            .collect();
        let h_mid_mat = real_diag(&frame.q_y, &h_mid).hermitian_part();
        let s3 = PathSegment::FlatUnitary {
            h_u: real_diag(&frame.q_y, &frame.rounded[j]).hermitian_part(),
            h_v: h_mid_mat.clone(),
        };
        let s4 = PathSegment::FlatUnitary {
            h_u: h_mid_mat,
            h_v: real_diag(&frame.q_y, &h_end).hermitian_part(),
        };
        components.push(quarter_path(s1, s2, s3, s4)?);
    }
    let path = TuplePath { components };
    let budget = path_budget(&path, x, w_dist)?;
    Ok(BuiltPath {
        path,
        report: epsilon_report(delta, k_m, n_cells, corrected, w_dist, frame.matching_cost),
        w_dist,
        budget,
    })
}

fn certify(
    path: &TuplePath,
    kind: VarietyKind,
    x: &MatrixTuple,
    y: &MatrixTuple,
    budget: f64,
    report: EpsilonReport,
    opts: &HomotopyOptions,
) -> Result<HomotopyCertificate> {
    let per_seg = opts.samples_per_segment.max(1);
    let segments = path.components.first().map(|c| c.segments.len()).unwrap_or(1);
    let mut cert = verify_path(path, kind, x, budget, (per_seg * segments).max(2))?;
    let start_residual = eth(&path.eval(0.0)?, x)?;
    let end_residual = eth(&path.eval(1.0)?, y)?;
    let tol = tol_certificate(path.n());
    cert.endpoint_residuals = (start_residual, end_residual);
    cert.passed = cert.passed && start_residual <= tol && end_residual <= tol;
    cert.epsilons = Some(report);
    Ok(cert)
}

/// Certified homotopy between nearby commuting hermitian contraction tuples.
///
/// `k_m` scales the reported theoretical budgets only; the certificate's
/// `epsilon_budget` is the rigorous per-segment bound actually achieved.
pub fn cube_homotopy(
    x: &MatrixTuple,
    y: &MatrixTuple,
    delta: f64,
    k_m: f64,
) -> Result<(TuplePath, HomotopyCertificate)> {
    cube_homotopy_with(x, y, delta, k_m, &HomotopyOptions::default())
}

pub fn cube_homotopy_with(
    x: &MatrixTuple,
    y: &MatrixTuple,
    delta: f64,
    k_m: f64,
    opts: &HomotopyOptions,
) -> Result<(TuplePath, HomotopyCertificate)> {
    check_preconditions(x, y, VarietyKind::Cube, delta, delta, k_m)?;
    let built = build_cube_path(x, y, delta, k_m, opts.correction_target, None)?;
    let cert = certify(
        &built.path,
        VarietyKind::Cube,
        x,
        y,
        built.budget,
        built.report.clone(),
        opts,
    )?;
    Ok((built.path, cert))
}

/// Certified homotopy between nearby commuting normal contraction tuples.
/// Requires `eth(z, s) <= delta / 2`: each tuple splits into hermitian and
/// antihermitian halves, the cube construction runs on the doubled tuple,
/// and recombination doubles distances.
pub fn disk_homotopy(
    z: &MatrixTuple,
    s: &MatrixTuple,
    delta: f64,
    k_m: f64,
) -> Result<(TuplePath, HomotopyCertificate)> {
    disk_homotopy_with(z, s, delta, k_m, &HomotopyOptions::default())
}

pub fn disk_homotopy_with(
    z: &MatrixTuple,
    s: &MatrixTuple,
    delta: f64,
    k_m: f64,
    opts: &HomotopyOptions,
) -> Result<(TuplePath, HomotopyCertificate)> {
    check_preconditions(z, s, VarietyKind::Disk, delta / 2.0, delta, k_m)?;
    let m = z.m();
    let px = split_parts(z)?;
    let py = split_parts(s)?;
    let built = build_cube_path(&px, &py, delta, k_m, opts.correction_target, Some(m))?;
    let path = combine_parts(&built.path, m)?;
    let budget = path_budget(&path, z, built.w_dist)?;
    let cert = certify(&path, VarietyKind::Disk, z, s, budget, built.report.clone(), opts)?;
    Ok((path, cert))
}

/// Certified homotopy between nearby commuting unitary tuples. Flat stages
/// interpolate commuting exponents (staying unitary throughout); phases live
/// in `(-pi, pi]` with the shorter arc chosen when a matched pair straddles
/// the branch cut.
pub fn torus_homotopy(
    u: &MatrixTuple,
    v: &MatrixTuple,
    delta: f64,
    k_m: f64,
) -> Result<(TuplePath, HomotopyCertificate)> {
    torus_homotopy_with(u, v, delta, k_m, &HomotopyOptions::default())
}

pub fn torus_homotopy_with(
    u: &MatrixTuple,
    v: &MatrixTuple,
    delta: f64,
    k_m: f64,
    opts: &HomotopyOptions,
) -> Result<(TuplePath, HomotopyCertificate)> {
    check_preconditions(u, v, VarietyKind::Torus, delta, delta, k_m)?;
    let built = build_torus_path(u, v, delta, k_m, opts.correction_target)?;
    let cert = certify(
        &built.path,
        VarietyKind::Torus,
        u,
        v,
        built.budget,
        built.report.clone(),
        opts,
    )?;
    Ok((built.path, cert))
}

/// `[re_1..re_m, im_1..im_m]` hermitian halves of a normal tuple.
fn split_parts(z: &MatrixTuple) -> Result<MatrixTuple> {
    let parts = crate::jointspec::partition_mcintosh_pryde(z);
    let mut mats = parts.re;
    mats.extend(parts.im);
    MatrixTuple::new(mats)
}

/// Zip the doubled tuple path back into complex components:
/// `component j = re_j + i * im_j`, segment by segment.
fn combine_parts(path: &TuplePath, m: usize) -> Result<TuplePath> {
    if path.m() != 2 * m {
        return Err(Error::DimensionMismatch {
            context: format!("expected {} part paths, got {}", 2 * m, path.m()),
        });
    }
    let i = Complex64::new(0.0, 1.0);
    let mut components = Vec::with_capacity(m);
    for j in 0..m {
        let re = &path.components[j];
        let im = &path.components[j + m];
        let segments = re
            .segments
            .iter()
            .zip(&im.segments)
            .map(|(sr, si)| -> Result<PathSegment> {
                match (sr, si) {
                    (PathSegment::Flat { a: ra, b: rb }, PathSegment::Flat { a: ia, b: ib }) => {
                        Ok(PathSegment::Flat {
                            a: ra.add(&ia.scale(i)),
                            b: rb.add(&ib.scale(i)),
                        })
                    }
                    (
                        PathSegment::Curved { k_hat, base: rb, t0, t1 },
                        PathSegment::Curved { base: ib, .. },
                    ) => Ok(PathSegment::Curved {
                        k_hat: k_hat.clone(),
                        base: rb.add(&ib.scale(i)),
                        t0: *t0,
                        t1: *t1,
                    }),
                    _ => Err(Error::Domain(
                        "mismatched segment kinds while recombining disk parts".into(),
                    )),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        components.push(MatrixPath {
            segments,
            breaks: re.breaks.clone(),
        });
    }
    Ok(TuplePath { components })
}
