//! Tuples of matrices, the sup operator-norm metric on them, the three model
//! varieties (cube, disk, torus), and noncommutative polynomial constraint
//! systems with numerical defect evaluation.

use crate::matcore::{defects, op_norm, CMatrix};
use crate::{Complex64, Error, Result};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use std::str::FromStr;

/// Which model variety a tuple is measured against.
///
/// * `Cube`: commuting hermitian contractions.
/// * `Disk`: commuting normal contractions.
/// * `Torus`: commuting unitaries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VarietyKind {
    Cube,
    Disk,
    Torus,
}

impl fmt::Display for VarietyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VarietyKind::Cube => "cube",
            VarietyKind::Disk => "disk",
            VarietyKind::Torus => "torus",
        })
    }
}

impl FromStr for VarietyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "cube" => Ok(VarietyKind::Cube),
            "disk" => Ok(VarietyKind::Disk),
            "torus" => Ok(VarietyKind::Torus),
            other => Err(Error::Domain(format!(
                "unknown variety '{other}' (expected cube, disk, or torus)"
            ))),
        }
    }
}

/// An m-tuple of same-size square complex matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixTuple {
    mats: Vec<CMatrix>,
}

impl MatrixTuple {
    pub fn new(mats: Vec<CMatrix>) -> Result<Self> {
        let first = mats.first().ok_or(Error::EmptyTuple)?;
        let n = first.n();
        if mats.iter().any(|m| m.n() != n) {
            return Err(Error::DimensionMismatch {
                context: "tuple entries of unequal size".into(),
            });
        }
        Ok(MatrixTuple { mats })
    }

    /// Number of matrices in the tuple.
    pub fn m(&self) -> usize {
        self.mats.len()
    }

    /// Side length of each matrix.
    pub fn n(&self) -> usize {
        self.mats[0].n()
    }

    pub fn get(&self, j: usize) -> &CMatrix {
        &self.mats[j]
    }

    pub fn mats(&self) -> &[CMatrix] {
        &self.mats
    }

    pub fn iter(&self) -> std::slice::Iter<'_, CMatrix> {
        self.mats.iter()
    }

    pub fn into_vec(self) -> Vec<CMatrix> {
        self.mats
    }
}

/// Sup metric on tuples: `max_j || x_j - y_j ||` in operator norm.
pub fn eth(x: &MatrixTuple, y: &MatrixTuple) -> Result<f64> {
    if x.m() != y.m() || x.n() != y.n() {
        return Err(Error::DimensionMismatch {
            context: format!(
                "eth between {}-tuple of size {} and {}-tuple of size {}",
                x.m(),
                x.n(),
                y.m(),
                y.n()
            ),
        });
    }
    Ok(x.iter()
        .zip(y.iter())
        .map(|(a, b)| op_norm(&a.sub(b)))
        .fold(0.0, f64::max))
}

/// Worst violation of the variety's defining constraints, in operator norm:
/// pairwise commutators plus the per-matrix structural defect
/// (cube: hermiticity and contraction excess; disk: normality and
/// contraction excess; torus: unitarity).
pub fn variety_defect(x: &MatrixTuple, kind: VarietyKind) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..x.m() {
        for k in j + 1..x.m() {
            let comm = x.get(j).mul(x.get(k)).sub(&x.get(k).mul(x.get(j)));
            worst = worst.max(op_norm(&comm));
        }
    }
    for mat in x.iter() {
        let rep = defects(mat);
        let structural = match kind {
            VarietyKind::Cube => rep.hermitian.max(rep.contraction_excess),
            VarietyKind::Disk => rep.normality.max(rep.contraction_excess),
            VarietyKind::Torus => rep.unitarity,
        };
        worst = worst.max(structural);
    }
    worst
}

/// Closed ð-ball around a tuple.
#[derive(Debug, Clone)]
pub struct Neighborhood {
    pub center: MatrixTuple,
    pub radius: f64,
}

impl Neighborhood {
    pub fn new(center: MatrixTuple, radius: f64) -> Self {
        Neighborhood { center, radius }
    }

    pub fn distance(&self, y: &MatrixTuple) -> Result<f64> {
        eth(&self.center, y)
    }

    pub fn contains(&self, y: &MatrixTuple) -> Result<bool> {
        Ok(self.distance(y)? <= self.radius)
    }
}

/// One symbol of a noncommutative word: variable index (1-based) with an
/// optional adjoint star.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NCSymbol {
    pub index: usize,
    pub adjoint: bool,
}

impl fmt::Display for NCSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "x{}{}", self.index, if self.adjoint { "*" } else { "" })
    }
}

impl FromStr for NCSymbol {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let body = s
            .strip_prefix('x')
            .ok_or_else(|| Error::Domain(format!("bad symbol '{s}': expected x<k> or x<k>*")))?;
        let (digits, adjoint) = match body.strip_suffix('*') {
            Some(d) => (d, true),
            None => (body, false),
        };
        let index: usize = digits
            .parse()
            .map_err(|_| Error::Domain(format!("bad symbol '{s}': expected x<k> or x<k>*")))?;
        if index == 0 {
            return Err(Error::Domain(format!("bad symbol '{s}': indices start at 1")));
        }
        Ok(NCSymbol { index, adjoint })
    }
}

/// One term `coef * x_{i1}^{(*)} x_{i2}^{(*)} ...`; the empty word is the
/// identity.
#[derive(Debug, Clone, PartialEq)]
pub struct NCTerm {
    pub coef: Complex64,
    pub word: Vec<NCSymbol>,
}

pub type NCPolynomial = Vec<NCTerm>;

/// Finite constraint system: `vars` matrix variables, membership tolerance
/// `eps`, and a list of NC polynomials that should all vanish on the
/// variety.
#[derive(Debug, Clone, PartialEq)]
pub struct NCPolynomialSystem {
    pub vars: usize,
    pub eps: f64,
    pub polys: Vec<NCPolynomial>,
}

#[derive(Serialize, Deserialize)]
struct TermRepr {
    coef: [f64; 2],
    word: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct SystemRepr {
    vars: usize,
    eps: f64,
    polys: Vec<Vec<TermRepr>>,
}

impl Serialize for NCPolynomialSystem {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let repr = SystemRepr {
            vars: self.vars,
            eps: self.eps,
            polys: self
                .polys
                .iter()
                .map(|p| {
                    p.iter()
                        .map(|t| TermRepr {
                            coef: [t.coef.re, t.coef.im],
                            word: t.word.iter().map(|s| s.to_string()).collect(),
                        })
                        .collect()
                })
                .collect(),
        };
        repr.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for NCPolynomialSystem {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let repr = SystemRepr::deserialize(de)?;
        let polys = repr
            .polys
            .into_iter()
            .map(|p| {
                p.into_iter()
                    .map(|t| {
                        let word = t
                            .word
                            .iter()
                            .map(|s| s.parse().map_err(|e| D::Error::custom(format!("{e}"))))
                            .collect::<std::result::Result<Vec<NCSymbol>, D::Error>>()?;
                        Ok(NCTerm {
                            coef: Complex64::new(t.coef[0], t.coef[1]),
                            word,
                        })
                    })
                    .collect::<std::result::Result<NCPolynomial, D::Error>>()
            })
            .collect::<std::result::Result<Vec<_>, D::Error>>()?;
        Ok(NCPolynomialSystem {
            vars: repr.vars,
            eps: repr.eps,
            polys,
        })
    }
}

/// Evaluate one NC polynomial at a tuple. Symbol indices must lie in
/// `1..=x.m()`.
pub fn nc_eval(poly: &NCPolynomial, x: &MatrixTuple) -> Result<CMatrix> {
    let n = x.n();
    let mut acc = CMatrix::zeros(n);
    for term in poly {
        let mut prod = CMatrix::identity(n);
        for sym in &term.word {
            if sym.index == 0 || sym.index > x.m() {
                return Err(Error::UnboundSymbol {
                    index: sym.index,
                    vars: x.m(),
                });
            }
            let mat = x.get(sym.index - 1);
            prod = if sym.adjoint {
                prod.mul(&mat.adjoint())
            } else {
                prod.mul(mat)
            };
        }
        acc = acc.add(&prod.scale(term.coef));
    }
    Ok(acc)
}

/// Worst operator-norm residual of the system's polynomials at `x`.
/// Membership in the ε,n-presented variety means this stays at or below
/// `sys.eps` (plus the contraction bound, which is not polynomial and is
/// checked by [`variety_defect`]).
pub fn smv_defect(sys: &NCPolynomialSystem, x: &MatrixTuple) -> Result<f64> {
    if sys.vars != x.m() {
        return Err(Error::DimensionMismatch {
            context: format!("system over {} variables evaluated at {}-tuple", sys.vars, x.m()),
        });
    }
    let mut worst = 0.0f64;
    for poly in &sys.polys {
        worst = worst.max(op_norm(&nc_eval(poly, x)?));
    }
    Ok(worst)
}

fn sym(index: usize, adjoint: bool) -> NCSymbol {
    NCSymbol { index, adjoint }
}

fn term(re: f64, word: Vec<NCSymbol>) -> NCTerm {
    NCTerm {
        coef: Complex64::new(re, 0.0),
        word,
    }
}

/// The polynomial part of a variety's defining system for `m` variables:
/// all pairwise commutators, plus per-variable hermiticity (cube),
/// normality (disk), or two-sided unitarity (torus).
pub fn defining_system(kind: VarietyKind, m: usize, eps: f64) -> NCPolynomialSystem {
    let mut polys: Vec<NCPolynomial> = Vec::new();
    for j in 1..=m {
        for k in j + 1..=m {
            polys.push(vec![
                term(1.0, vec![sym(j, false), sym(k, false)]),
                term(-1.0, vec![sym(k, false), sym(j, false)]),
            ]);
        }
    }
    for j in 1..=m {
        match kind {
            VarietyKind::Cube => {
                polys.push(vec![
                    term(1.0, vec![sym(j, false)]),
                    term(-1.0, vec![sym(j, true)]),
                ]);
            }
            VarietyKind::Disk => {
                polys.push(vec![
                    term(1.0, vec![sym(j, false), sym(j, true)]),
                    term(-1.0, vec![sym(j, true), sym(j, false)]),
                ]);
            }
            VarietyKind::Torus => {
                polys.push(vec![
                    term(1.0, vec![sym(j, false), sym(j, true)]),
                    term(-1.0, vec![]),
                ]);
                polys.push(vec![
                    term(1.0, vec![sym(j, true), sym(j, false)]),
                    term(-1.0, vec![]),
                ]);
            }
        }
    }
    NCPolynomialSystem {
        vars: m,
        eps,
        polys,
    }
}
