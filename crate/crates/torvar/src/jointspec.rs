//! Joint spectral data of commuting families: simultaneous diagonalization,
//! hermitian real/imaginary partitions, bottleneck matching of joint
//! spectra, and the unitary intertwiner aligning two nearby tuples.

use crate::kernels;
use crate::matcore::{herm_eig, op_norm, CMatrix};
use crate::varieties::{eth, MatrixTuple};
use crate::{Complex64, Error, Result};

const DEFAULT_DIAG_SEED: u64 = 0x6469_6167; // arbitrary fixed constant
const CLUSTER_REL_TOL: f64 = 1e-7;
// A perturbed family cannot diagonalize below its own commutation
// obstruction; allow that times a small constant before flagging failure.
const RESIDUAL_SLACK: f64 = 10.0;

/// Result of simultaneous diagonalization: unitary `q` and per-matrix
/// diagonal values, column-aligned with `q`. `values[j][k]` is the k-th
/// diagonal entry of `q* x_j q`; `residual` is the worst off-diagonal mass
/// left, in operator norm.
#[derive(Debug, Clone)]
pub struct JointSpectrum {
    pub q: CMatrix,
    pub values: Vec<Vec<Complex64>>,
    pub residual: f64,
}

impl JointSpectrum {
    pub fn m(&self) -> usize {
        self.values.len()
    }

    pub fn n(&self) -> usize {
        self.q.n()
    }

    /// Joint eigenvalue at diagonal position `k`: one coordinate per matrix.
    pub fn point(&self, k: usize) -> Vec<Complex64> {
        self.values.iter().map(|v| v[k]).collect()
    }

    /// All joint eigenvalue points, in column order of `q`.
    pub fn points(&self) -> Vec<Vec<Complex64>> {
        (0..self.n()).map(|k| self.point(k)).collect()
    }
}

/// The hermitian real/imaginary parts of a tuple:
/// `x_j = re_j + i im_j` with `re_j`, `im_j` hermitian. For a commuting
/// normal family all `2m` parts commute pairwise.
#[derive(Debug, Clone)]
pub struct HermitianPartition {
    pub re: Vec<CMatrix>,
    pub im: Vec<CMatrix>,
}

/// Split a tuple into hermitian real/imaginary parts.
pub fn partition_mcintosh_pryde(x: &MatrixTuple) -> HermitianPartition {
    HermitianPartition {
        re: x.iter().map(CMatrix::hermitian_part).collect(),
        im: x.iter().map(CMatrix::antihermitian_part).collect(),
    }
}

/// Rebuild the tuple from its parts.
pub fn recombine_partition(p: &HermitianPartition) -> Result<MatrixTuple> {
    if p.re.len() != p.im.len() {
        return Err(Error::DimensionMismatch {
            context: "partition with unequal re/im counts".into(),
        });
    }
    let i = Complex64::new(0.0, 1.0);
    MatrixTuple::new(
        p.re.iter()
            .zip(&p.im)
            .map(|(re, im)| re.add(&im.scale(i)))
            .collect(),
    )
}

/// Simultaneously diagonalize a commuting (hermitian or normal) tuple with
/// the default internal seed for the spectral-splitting combination.
pub fn joint_diagonalize(x: &MatrixTuple) -> Result<JointSpectrum> {
    joint_diagonalize_seeded(x, DEFAULT_DIAG_SEED)
}

/// Simultaneous diagonalization, two stages: a seeded random hermitian
/// combination of all real/imaginary parts splits the joint eigenspaces
/// generically; eigenvalue clusters of the combination are then refined by
/// joint Jacobi sweeps so degenerate or accidentally-merged blocks come out
/// jointly diagonal. Fails if the residual exceeds what the family's own
/// commutation defect can explain.
pub fn joint_diagonalize_seeded(x: &MatrixTuple, seed: u64) -> Result<JointSpectrum> {
    let n = x.n();
    let parts = partition_mcintosh_pryde(x);
    let stack: Vec<&CMatrix> = parts.re.iter().chain(parts.im.iter()).collect();
    let scale = stack
        .iter()
        .map(|s| op_norm(s))
        .fold(0.0f64, f64::max)
        .max(1e-300);

    // stage 1: split eigenspaces with one random combination
    let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(seed);
    let mut comb = CMatrix::zeros(n);
    for s in &stack {
        let (g, _) = kernels::normal_pair(&mut rng);
        comb = comb.add(&s.scale_re(g));
    }
    let eig = herm_eig(&comb)?;
    let mut q = eig.q;

    // stage 2: refine each eigenvalue cluster of the combination jointly
    let gap_tol = CLUSTER_REL_TOL * scale;
    let transformed: Vec<CMatrix> = stack
        .iter()
        .map(|s| q.adjoint().mul(s).mul(&q))
        .collect();
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && eig.values[end] - eig.values[end - 1] <= gap_tol {
            end += 1;
        }
        if end - start > 1 {
            let blocks: Vec<CMatrix> = transformed
                .iter()
                .map(|t| {
                    CMatrix::from_fn(end - start, |i, j| t.get(start + i, start + j))
                })
                .collect();
            let jd = kernels::joint_jacobi(&blocks, kernels::MAX_SWEEPS);
            // embed the block rotation: q[:, start..end] *= jd.q
            let cols: Vec<Vec<Complex64>> = (0..end - start)
                .map(|bj| {
                    (0..n)
                        .map(|i| {
                            (0..end - start)
                                .map(|bk| q.get(i, start + bk) * jd.q.get(bk, bj))
                                .sum()
                        })
                        .collect()
                })
                .collect();
            for (bj, col) in cols.iter().enumerate() {
                for i in 0..n {
                    q.set(i, start + bj, col[i]);
                }
            }
        }
        start = end;
    }

    // read off diagonals and measure what is left off-diagonal
    let mut values = Vec::with_capacity(x.m());
    let mut residual = 0.0f64;
    for mat in x.iter() {
        let d = q.adjoint().mul(mat).mul(&q);
        values.push((0..n).map(|k| d.get(k, k)).collect());
        let mut off = d.clone();
        for k in 0..n {
            off.set(k, k, Complex64::new(0.0, 0.0));
        }
        residual = residual.max(op_norm(&off));
    }

    let comm_defect = commutation_defect(&stack);
    let threshold = (1e-9 * n as f64).max(RESIDUAL_SLACK * comm_defect);
    if residual > threshold {
        return Err(Error::DiagonalizationResidual {
            residual,
            tol: threshold,
        });
    }
    Ok(JointSpectrum {
        q,
        values,
        residual,
    })
}

fn commutation_defect(stack: &[&CMatrix]) -> f64 {
    let mut worst = 0.0f64;
    for (i, a) in stack.iter().enumerate() {
        for b in stack.iter().skip(i + 1) {
            let comm = a.mul(b).sub(&b.mul(a));
            worst = worst.max(op_norm(&comm));
        }
    }
    worst
}

/// Joint eigenvalue points of a commuting tuple, sorted lexicographically
/// by (re, im) of each coordinate in turn.
pub fn joint_spectrum(x: &MatrixTuple) -> Result<Vec<Vec<Complex64>>> {
    let js = joint_diagonalize(x)?;
    let mut pts = js.points();
    pts.sort_by(|a, b| lex_cmp(a, b));
    Ok(pts)
}

fn lex_cmp(a: &[Complex64], b: &[Complex64]) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b) {
        match x
            .re
            .partial_cmp(&y.re)
            .unwrap()
            .then(x.im.partial_cmp(&y.im).unwrap())
        {
            std::cmp::Ordering::Equal => continue,
            other => return other,
        }
    }
    std::cmp::Ordering::Equal
}

/// Sup distance between two joint eigenvalue points.
fn point_dist(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// Pair two joint spectra minimizing the worst pair distance (bottleneck
/// assignment). Returns `sigma` with `b[sigma[k]]` matched to `a[k]`;
/// among optimal assignments the lexicographically smallest is returned.
pub fn match_spectra(a: &[Vec<Complex64>], b: &[Vec<Complex64>]) -> Result<Vec<usize>> {
    Ok(match_spectra_with_cost(a, b)?.0)
}

/// Bottleneck assignment together with its cost.
pub fn match_spectra_with_cost(
    a: &[Vec<Complex64>],
    b: &[Vec<Complex64>],
) -> Result<(Vec<usize>, f64)> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch {
            context: format!("matching {} points against {}", a.len(), b.len()),
        });
    }
    let n = a.len();
    if n == 0 {
        return Ok((vec![], 0.0));
    }
    if a.iter().chain(b.iter()).any(|p| p.len() != a[0].len()) {
        return Err(Error::DimensionMismatch {
            context: "joint spectrum points of unequal arity".into(),
        });
    }
    let d: Vec<Vec<f64>> = a
        .iter()
        .map(|pa| b.iter().map(|pb| point_dist(pa, pb)).collect())
        .collect();

    // smallest threshold admitting a perfect matching
    let mut levels: Vec<f64> = d.iter().flatten().copied().collect();
    levels.sort_by(|x, y| x.partial_cmp(y).unwrap());
    levels.dedup();
    let mut lo = 0usize;
    let mut hi = levels.len() - 1;
    if !has_perfect_matching(&d, levels[hi], &[], &[]) {
        // cannot happen with finite costs; guard anyway
        return Err(Error::Convergence {
            what: "bottleneck matching",
        });
    }
    while lo < hi {
        let mid = (lo + hi) / 2;
        if has_perfect_matching(&d, levels[mid], &[], &[]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let t = levels[lo];

    // lexicographically smallest optimal assignment: fix columns greedily,
    // keeping the remainder feasible
    let mut sigma = vec![usize::MAX; n];
    let mut used = vec![false; n];
    for k in 0..n {
        let mut fixed = false;
        for l in 0..n {
            if used[l] || d[k][l] > t {
                continue;
            }
            used[l] = true;
            sigma[k] = l;
            if has_perfect_matching(&d, t, &sigma[..k + 1], &used) {
                fixed = true;
                break;
            }
            used[l] = false;
            sigma[k] = usize::MAX;
        }
        if !fixed {
            return Err(Error::Convergence {
                what: "bottleneck matching refinement",
            });
        }
    }
    let cost = (0..n).map(|k| d[k][sigma[k]]).fold(0.0, f64::max);
    Ok((sigma, cost))
}

/// Kuhn augmenting-path feasibility: can rows `prefix.len()..n` be matched
/// into the columns not already `used`, with edges of cost at most `t`?
fn has_perfect_matching(d: &[Vec<f64>], t: f64, prefix: &[usize], used: &[bool]) -> bool {
    let n = d.len();
    let start = prefix.len();
    let mut match_col = vec![usize::MAX; n];
    for (k, &l) in prefix.iter().enumerate() {
        if l != usize::MAX {
            match_col[l] = k;
        }
    }
    let blocked = |l: usize| used.get(l).copied().unwrap_or(false);
    for k in start..n {
        let mut seen = vec![false; n];
        if !augment(d, t, k, start, &blocked, &mut match_col, &mut seen) {
            return false;
        }
    }
    true
}

fn augment(
    d: &[Vec<f64>],
    t: f64,
    k: usize,
    start: usize,
    blocked: &dyn Fn(usize) -> bool,
    match_col: &mut [usize],
    seen: &mut [bool],
) -> bool {
    let n = d.len();
    for l in 0..n {
        if seen[l] || blocked(l) || d[k][l] > t {
            continue;
        }
        seen[l] = true;
        // a column owned by a fixed prefix row is never reassignable
        if match_col[l] != usize::MAX && match_col[l] < start {
            continue;
        }
        if match_col[l] == usize::MAX
            || augment(d, t, match_col[l], start, blocked, match_col, seen)
        {
            match_col[l] = k;
            return true;
        }
    }
    false
}

/// Unitary intertwiner between two nearby commuting tuples.
#[derive(Debug, Clone)]
pub struct IntertwinerResult {
    /// Unitary `w` such that every `w x_j w*` commutes with `y_j` exactly in
    /// `y`'s eigenbasis.
    pub w: CMatrix,
    /// `sigma[k]`: the diagonal slot of `y` matched to slot `k` of `x`.
    pub permutation: Vec<usize>,
    /// Bottleneck cost of the joint-spectrum matching.
    pub cost: f64,
    pub x_spec: JointSpectrum,
    pub y_spec: JointSpectrum,
}

/// Align `x` with `y`: diagonalize both, pair their joint spectra by
/// bottleneck matching, and return `w = q_y P q_x*` carrying each
/// eigenvector of `x` onto its partner's. Fails when the matching cost is
/// far out of proportion to `eth(x, y)`, which signals a spectral pairing
/// breakdown rather than an honest perturbation.
pub fn intertwiner(x: &MatrixTuple, y: &MatrixTuple) -> Result<IntertwinerResult> {
    let result = intertwiner_unchecked(x, y)?;
    let dist = eth(x, y)?;
    let threshold = RESIDUAL_SLACK * dist + 1e-9 * x.n() as f64;
    if result.cost > threshold {
        return Err(Error::MatchingDiagnostic {
            cost: result.cost,
            threshold,
        });
    }
    Ok(result)
}

/// The intertwiner without the cost diagnostic; callers that tolerate large
/// spectral motion (and account for it in their own bounds) use this.
pub(crate) fn intertwiner_unchecked(x: &MatrixTuple, y: &MatrixTuple) -> Result<IntertwinerResult> {
    if x.m() != y.m() || x.n() != y.n() {
        return Err(Error::DimensionMismatch {
            context: "intertwiner endpoints of unequal shape".into(),
        });
    }
    let x_spec = joint_diagonalize(x).map_err(|e| e.at_stage("diagonalize x"))?;
    let y_spec = joint_diagonalize(y).map_err(|e| e.at_stage("diagonalize y"))?;
    let (sigma, cost) = match_spectra_with_cost(&x_spec.points(), &y_spec.points())?;
    let n = x.n();
    let mut perm = CMatrix::zeros(n);
    for (k, &sk) in sigma.iter().enumerate() {
        perm.set(sk, k, Complex64::new(1.0, 0.0));
    }
    let w = y_spec.q.mul(&perm).mul(&x_spec.q.adjoint());
    Ok(IntertwinerResult {
        w,
        permutation: sigma,
        cost,
        x_spec,
        y_spec,
    })
}
