//! Spectral-grid quantization: uniform representation grids on [-1, 1],
//! projective decompositions grouping eigenspaces by nearest grid point, and
//! the commuting grid approximants built from them (one matrix or a whole
//! commuting hermitian tuple on a shared partition).

use crate::jointspec::joint_diagonalize;
use crate::matcore::{herm_eig, CMatrix};
use crate::varieties::{MatrixTuple, VarietyKind};
use crate::{Complex64, Error, Result};
use serde::Serialize;

const HERM_TOL: f64 = 1e-8;
const CONTRACTION_SLACK: f64 = 1e-8;
// eigenvalues this close are one spectral cluster and must land in one cell
const DEGENERACY_TOL: f64 = 1e-12;

/// Uniform grid of representation points on [-1, 1] with spacing `2*delta`,
/// plus the assignment-interval boundaries between them.
#[derive(Debug, Clone, Serialize)]
pub struct SpectralGrids {
    pub delta: f64,
    /// Number of representation points.
    pub m_delta: usize,
    /// `-1 + 2(k-1)delta`, with the top point clamped to 1 so the grid stays
    /// inside the contraction range when `1/delta` is not an integer.
    pub rep_points: Vec<f64>,
    /// Assignment boundaries: `m_delta + 1` reals; values in
    /// `(support_points[k], support_points[k+1]]` belong to `rep_points[k]`
    /// up to the tie rule (exact midpoints round toward +).
    pub support_points: Vec<f64>,
}

impl SpectralGrids {
    /// Index of the nearest representation point; midpoint ties round up.
    pub fn round_index(&self, v: f64) -> usize {
        let pts = &self.rep_points;
        match pts.binary_search_by(|p| p.partial_cmp(&v).unwrap()) {
            Ok(i) => i,
            Err(0) => 0,
            Err(i) if i == pts.len() => pts.len() - 1,
            Err(i) => {
                if v - pts[i - 1] < pts[i] - v {
                    i - 1
                } else {
                    i
                }
            }
        }
    }

    /// Nearest representation point; midpoint ties round toward +.
    pub fn round(&self, v: f64) -> f64 {
        self.rep_points[self.round_index(v)]
    }

    /// Upper bound on the number of occupied cells for an m-tuple.
    pub fn cell_bound(&self, m: usize) -> f64 {
        (self.m_delta as f64).powi(m as i32)
    }
}

/// Build the representation and support grids for a resolution `delta` in
/// (0, 1].
pub fn build_grids(delta: f64) -> Result<SpectralGrids> {
    if !delta.is_finite() || delta <= 0.0 || delta > 1.0 {
        return Err(Error::Domain(format!(
            "grid resolution must lie in (0, 1], got {delta}"
        )));
    }
    let ratio = 1.0 / delta;
    // snap near-integer ratios so representable deltas like 0.1 stay exact
    let count = if (ratio - ratio.round()).abs() < 1e-9 {
        ratio.round()
    } else {
        ratio.ceil()
    };
    let m_delta = 1 + count as usize;
    let mut rep_points: Vec<f64> = (0..m_delta)
        .map(|k| -1.0 + 2.0 * k as f64 * delta)
        .collect();
    let last = rep_points.len() - 1;
    rep_points[last] = rep_points[last].min(1.0);
    let mut support_points = Vec::with_capacity(m_delta + 1);
    support_points.push(rep_points[0] - delta);
    for k in 0..m_delta - 1 {
        support_points.push(0.5 * (rep_points[k] + rep_points[k + 1]));
    }
    support_points.push(rep_points[last] + delta);
    Ok(SpectralGrids {
        delta,
        m_delta,
        rep_points,
        support_points,
    })
}

/// Orthogonal partition of unity whose ranges are eigenspace groups, with
/// the grid value vector assigned to each member. Every projector is
/// nonzero; the list is sorted by value vector.
#[derive(Debug, Clone)]
pub struct ProjectiveDecomposition {
    pub projectors: Vec<CMatrix>,
    /// Grid assignment per projector: one coordinate per tuple component.
    pub values: Vec<Vec<f64>>,
    pub n_delta: usize,
}

impl ProjectiveDecomposition {
    /// Rank of each projector (exact by construction).
    pub fn ranks(&self) -> Vec<usize> {
        self.projectors
            .iter()
            .map(|p| {
                let tr: f64 = (0..p.n()).map(|i| p.get(i, i).re).sum();
                tr.round() as usize
            })
            .collect()
    }
}

/// A quantized commuting approximant together with the partition that
/// carries it.
#[derive(Debug, Clone)]
pub struct PsraResult {
    pub grids: SpectralGrids,
    /// `approximant[j] = sum_k values[k][j] * P_k`, built exactly from the
    /// partition, so its spectrum lies on the grid by construction.
    pub approximant: MatrixTuple,
    pub decomposition: ProjectiveDecomposition,
    /// Distinct grid values actually used, per component, ascending.
    pub rep_sets: Vec<Vec<f64>>,
    /// Worst distance from an eigenvalue to its assigned grid value.
    pub error: f64,
}

/// JSON-friendly summary of a [`PsraResult`].
#[derive(Debug, Clone, Serialize)]
pub struct PsraExport {
    pub delta: f64,
    pub grid: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    pub ranks: Vec<usize>,
    pub rep_sets: Vec<Vec<f64>>,
    pub error: f64,
}

impl PsraResult {
    pub fn export(&self) -> PsraExport {
        PsraExport {
            delta: self.grids.delta,
            grid: self.grids.rep_points.clone(),
            values: self.decomposition.values.clone(),
            ranks: self.decomposition.ranks(),
            rep_sets: self.rep_sets.clone(),
            error: self.error,
        }
    }
}

/// Round an ascending eigenvalue list to the grid, keeping clusters within
/// the degeneracy tolerance together: each cluster is rounded at its
/// minimum, so near-degenerate pairs straddling a cell boundary land in the
/// lower cell instead of splitting.
pub(crate) fn round_clustered(grids: &SpectralGrids, sorted: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut out = Vec::with_capacity(sorted.len());
    let mut start = 0;
    while start < sorted.len() {
        let mut end = start + 1;
        while end < sorted.len() && sorted[end].1 - sorted[end - 1].1 <= DEGENERACY_TOL {
            end += 1;
        }
        let v = grids.round(sorted[start].1);
        for &(pos, _) in &sorted[start..end] {
            out.push((pos, v));
        }
        start = end;
    }
    out
}

/// `sum over listed columns of q_c q_c*`.
pub(crate) fn projector_from_columns(q: &CMatrix, cols: &[usize]) -> CMatrix {
    let n = q.n();
    CMatrix::from_fn(n, |i, l| {
        cols.iter()
            .map(|&c| q.get(i, c) * q.get(l, c).conj())
            .sum::<Complex64>()
    })
}

fn check_contraction(values: &[f64]) -> Result<()> {
    let maxabs = values.iter().map(|v| v.abs()).fold(0.0, f64::max);
    if maxabs > 1.0 + CONTRACTION_SLACK {
        return Err(Error::NotContraction {
            excess: maxabs - 1.0,
        });
    }
    Ok(())
}

/// Eigenspace partition of one hermitian contraction grouped by nearest
/// grid point.
pub fn projective_decomposition_1d(x: &CMatrix, delta: f64) -> Result<ProjectiveDecomposition> {
    Ok(psra_1d(x, delta)?.decomposition)
}

/// Quantize one hermitian contraction onto the grid: a commuting hermitian
/// approximant within `delta`, carried by a projective decomposition.
pub fn psra_1d(x: &CMatrix, delta: f64) -> Result<PsraResult> {
    let grids = build_grids(delta)?;
    let n = x.n();
    let herm_defect = x.max_abs_diff(&x.adjoint());
    if herm_defect > HERM_TOL * n as f64 {
        return Err(Error::NotHermitian {
            defect: herm_defect,
            tol: HERM_TOL * n as f64,
        });
    }
    let eig = herm_eig(x)?;
    check_contraction(&eig.values)?;
    let sorted: Vec<(usize, f64)> = eig.values.iter().copied().enumerate().collect();
    let rounded = round_clustered(&grids, &sorted);
    let mut error = 0.0f64;
    for &(pos, v) in &rounded {
        error = error.max((eig.values[pos] - v).abs());
    }
    // eigenvalues ascend and rounding is monotone, so groups are contiguous
    let mut cells: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    for &(pos, v) in &rounded {
        match cells.last_mut() {
            Some((val, members)) if val[0] == v => members.push(pos),
            _ => cells.push((vec![v], vec![pos])),
        }
    }
    finish(grids, &eig.q, cells, 1, error)
}

/// Quantize a commuting hermitian tuple on one shared partition. The cells
/// are the nonzero intersections of the per-component decompositions
/// (equivalently their products: all projectors are column groups of one
/// joint eigenbasis, so intersecting index sets is the exact product).
/// For m = 1 this is exactly [`psra_1d`].
pub fn psra_md(x: &MatrixTuple, delta: f64) -> Result<PsraResult> {
    if x.m() == 1 {
        return psra_1d(x.get(0), delta);
    }
    let grids = build_grids(delta)?;
    let n = x.n();
    for mat in x.iter() {
        let herm_defect = mat.max_abs_diff(&mat.adjoint());
        if herm_defect > HERM_TOL * n as f64 {
            return Err(Error::OutsideVariety {
                kind: VarietyKind::Cube,
                defect: herm_defect,
                tol: HERM_TOL * n as f64,
            });
        }
    }
    let js = joint_diagonalize(x)?;
    let mut error = 0.0f64;
    let mut rounded = vec![vec![0.0f64; n]; x.m()];
    for j in 0..x.m() {
        let reals: Vec<f64> = js.values[j].iter().map(|z| z.re).collect();
        check_contraction(&reals).map_err(|e| match e {
            Error::NotContraction { excess } => Error::OutsideVariety {
                kind: VarietyKind::Cube,
                defect: excess,
                tol: CONTRACTION_SLACK,
            },
            other => other,
        })?;
        let mut sorted: Vec<(usize, f64)> = reals.iter().copied().enumerate().collect();
        sorted.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
        for (pos, v) in round_clustered(&grids, &sorted) {
            rounded[j][pos] = v;
            error = error.max((js.values[j][pos] - Complex64::new(v, 0.0)).norm());
        }
    }
    // group diagonal positions by their full value vector
    let mut cells: Vec<(Vec<f64>, Vec<usize>)> = Vec::new();
    'pos: for k in 0..n {
        let vector: Vec<f64> = (0..x.m()).map(|j| rounded[j][k]).collect();
        for (val, members) in cells.iter_mut() {
            if val == &vector {
                members.push(k);
                continue 'pos;
            }
        }
        cells.push((vector, vec![k]));
    }
    cells.sort_by(|a, b| {
        a.0.iter()
            .zip(&b.0)
            .map(|(x, y)| x.partial_cmp(y).unwrap())
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    finish(grids, &js.q, cells, x.m(), error)
}

fn finish(
    grids: SpectralGrids,
    q: &CMatrix,
    cells: Vec<(Vec<f64>, Vec<usize>)>,
    m: usize,
    error: f64,
) -> Result<PsraResult> {
    let n = q.n();
    let projectors: Vec<CMatrix> = cells
        .iter()
        .map(|(_, members)| projector_from_columns(q, members))
        .collect();
    let values: Vec<Vec<f64>> = cells.iter().map(|(v, _)| v.clone()).collect();
    let mut approximant = Vec::with_capacity(m);
    for j in 0..m {
        let mut acc = CMatrix::zeros(n);
        for (cell, p) in values.iter().zip(&projectors) {
            acc = acc.add(&p.scale_re(cell[j]));
        }
        approximant.push(acc);
    }
    let mut rep_sets = Vec::with_capacity(m);
    for j in 0..m {
        let mut used: Vec<f64> = values.iter().map(|v| v[j]).collect();
        used.sort_by(|a, b| a.partial_cmp(b).unwrap());
        used.dedup();
        rep_sets.push(used);
    }
    let n_delta = projectors.len();
    Ok(PsraResult {
        grids,
        approximant: MatrixTuple::new(approximant)?,
        decomposition: ProjectiveDecomposition {
            projectors,
            values,
            n_delta,
        },
        rep_sets,
        error,
    })
}
