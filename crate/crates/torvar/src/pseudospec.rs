//! Spectra and epsilon-pseudospectra on planar grids, plus the point-set
//! comparisons used to relate them: Hausdorff distance and delta-density.

use crate::kernels;
use crate::matcore::{defects, CMatrix};
use crate::varieties::MatrixTuple;
use crate::{Complex64, Error, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Rectangular lattice in the complex plane, row-major from bottom-left.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridSpec {
    pub center: Complex64,
    pub width: f64,
    pub height: f64,
    /// Samples along the real axis.
    pub nx: usize,
    /// Samples along the imaginary axis.
    pub ny: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        GridSpec {
            center: Complex64::new(0.0, 0.0),
            width: 3.0,
            height: 3.0,
            nx: 256,
            ny: 256,
        }
    }
}

impl GridSpec {
    pub fn square(center: Complex64, side: f64, resolution: usize) -> Self {
        GridSpec {
            center,
            width: side,
            height: side,
            nx: resolution,
            ny: resolution,
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Lattice point at column `ix`, row `iy`; single-sample axes collapse to
    /// the center line.
    pub fn point(&self, ix: usize, iy: usize) -> Complex64 {
        let frac = |i: usize, count: usize| -> f64 {
            if count <= 1 {
                0.5
            } else {
                i as f64 / (count - 1) as f64
            }
        };
        Complex64::new(
            self.center.re - self.width / 2.0 + self.width * frac(ix, self.nx),
            self.center.im - self.height / 2.0 + self.height * frac(iy, self.ny),
        )
    }

    /// All lattice points, row-major (`iy` outer, `ix` inner).
    pub fn points(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.len());
        for iy in 0..self.ny {
            for ix in 0..self.nx {
                out.push(self.point(ix, iy));
            }
        }
        out
    }
}

/// Boolean pseudospectrum indicator on a grid, with the underlying smallest
/// singular values kept for exact re-thresholding and export.
#[derive(Debug, Clone, Serialize)]
pub struct PseudospectrumMask {
    pub grid: GridSpec,
    pub epsilon: f64,
    /// Row-major, `iy * nx + ix`.
    pub inside: Vec<bool>,
    /// `sigma_min(a - lambda)` per lattice point, same layout.
    pub sigma_min: Vec<f64>,
}

impl PseudospectrumMask {
    pub fn at(&self, ix: usize, iy: usize) -> bool {
        self.inside[iy * self.grid.nx + ix]
    }

    /// Points of the lattice inside the mask.
    pub fn points_inside(&self) -> Vec<Complex64> {
        let mut out = Vec::new();
        for iy in 0..self.grid.ny {
            for ix in 0..self.grid.nx {
                if self.at(ix, iy) {
                    out.push(self.grid.point(ix, iy));
                }
            }
        }
        out
    }

    /// `Re, Im, 0/1` rows, row-major.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "re,im,inside")?;
        for iy in 0..self.grid.ny {
            for ix in 0..self.grid.nx {
                let z = self.grid.point(ix, iy);
                writeln!(
                    out,
                    "{:.16e},{:.16e},{}",
                    z.re,
                    z.im,
                    u8::from(self.at(ix, iy))
                )?;
            }
        }
        Ok(())
    }

    /// Plain PGM raster (P2), white inside the mask, top row = max Im.
    pub fn write_pgm<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "P2")?;
        writeln!(out, "{} {}", self.grid.nx, self.grid.ny)?;
        writeln!(out, "255")?;
        for iy in (0..self.grid.ny).rev() {
            let row: Vec<&str> = (0..self.grid.nx)
                .map(|ix| if self.at(ix, iy) { "255" } else { "0" })
                .collect();
            writeln!(out, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

fn sort_points(points: &mut [Complex64]) {
    points.sort_unstable_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
}

/// Eigenvalues with multiplicity, sorted by `(Re, Im)`.
///
/// Normal matrices go through the joint diagonalization of their hermitian
/// and antihermitian parts (exact for commuting parts); anything else falls
/// back to a dense Hessenberg-QR eigensolver.
pub fn spectrum(a: &CMatrix) -> Result<Vec<Complex64>> {
    let n = a.n();
    if n == 0 {
        return Ok(Vec::new());
    }
    let normality = defects(a).normality;
    let mut values = if normality <= 1e-8 * n as f64 {
        let tuple = MatrixTuple::new(vec![a.clone()])?;
        match crate::jointspec::joint_diagonalize(&tuple) {
            Ok(js) => js.values[0].clone(),
            // borderline normality: defer to the general path
            Err(_) => kernels::eigenvalues_general(a)?,
        }
    } else {
        kernels::eigenvalues_general(a)?
    };
    sort_points(&mut values);
    Ok(values)
}

/// Indicator of `sigma_min(a - lambda) <= epsilon` over the grid.
///
/// Each lattice point gets a full singular value decomposition; points are
/// independent and evaluated in parallel with a fixed output order.
pub fn pseudospectrum_mask(
    a: &CMatrix,
    epsilon: f64,
    grid: &GridSpec,
) -> Result<PseudospectrumMask> {
    if !epsilon.is_finite() || epsilon < 0.0 {
        return Err(Error::Domain(format!(
            "pseudospectrum level must be a finite nonnegative real, got {epsilon}"
        )));
    }
    if grid.is_empty() {
        return Err(Error::Domain("empty pseudospectrum grid".into()));
    }
    let n = a.n();
    let points = grid.points();
    let sigma_min: Vec<f64> = points
        .par_iter()
        .map(|lambda| {
            let shifted = CMatrix::from_fn(n, |i, l| {
                let v = a.get(i, l);
                if i == l {
                    v - lambda
                } else {
                    v
                }
            });
            kernels::svd_values(&shifted)
                .into_iter()
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let inside = sigma_min.iter().map(|&s| s <= epsilon).collect();
    Ok(PseudospectrumMask {
        grid: grid.clone(),
        epsilon,
        inside,
        sigma_min,
    })
}

/// Exact Hausdorff distance between two finite nonempty point sets.
pub fn hausdorff(a: &[Complex64], b: &[Complex64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Domain("hausdorff distance of an empty set".into()));
    }
    let one_sided = |from: &[Complex64], to: &[Complex64]| -> f64 {
        from.iter()
            .map(|x| {
                to.iter()
                    .map(|y| (x - y).norm())
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
    };
    Ok(one_sided(a, b).max(one_sided(b, a)))
}

/// True iff every point of `whole` lies within `delta` of some point of
/// `subset`.
pub fn delta_dense_check(subset: &[Complex64], whole: &[Complex64], delta: f64) -> Result<bool> {
    if subset.is_empty() || whole.is_empty() {
        return Err(Error::Domain("density check on an empty set".into()));
    }
    if !delta.is_finite() || delta < 0.0 {
        return Err(Error::Domain(format!(
            "density radius must be a finite nonnegative real, got {delta}"
        )));
    }
    Ok(whole.iter().all(|x| {
        subset
            .iter()
            .any(|s| (x - s).norm() <= delta)
    }))
}
