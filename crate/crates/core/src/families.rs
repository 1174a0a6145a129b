//! Parametric diagonal measurement families `M^(t)`, `t = 0..=4`.
//!
//! Each family is described by polynomials in the strength `p` that give the
//! squared diagonal entries `λ²` of every operator, optionally normalized per
//! diagonal position so that completeness holds. The same description is the
//! JSON format accepted by [`DiagonalFamily::from_json`], so a family can be
//! replaced without touching code.
//!
//! `M^(4)` is the weak measurement `diag(1, √(1−p), 1)`, `diag(0, √p, 0)`.
//! `M^(0..3)` are cyclic three-outcome families: outcome `r` places the sorted
//! triple `(s, m, t)` at positions `r, r+1, r+2 (mod 3)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bounds::BoundReport;
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::measurement::{InfoTriple, Measurement};
use crate::scalar::{Real, C};

pub const DEFAULT_GRID_POINTS: usize = 101;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct FamilyId(u8);

impl FamilyId {
    pub const ALL: [FamilyId; 5] = [FamilyId(0), FamilyId(1), FamilyId(2), FamilyId(3), FamilyId(4)];

    pub fn new(t: u8) -> Result<Self> {
        if t <= 4 {
            Ok(Self(t))
        } else {
            Err(Error::UnknownFamily(t))
        }
    }

    #[inline]
    pub fn index(self) -> u8 {
        self.0
    }

    /// Closed interval of admissible strengths.
    pub fn domain(self) -> (f64, f64) {
        match self.0 {
            2 => (1.0 / 3.0, 2.0 / 3.0),
            _ => (0.0, 1.0),
        }
    }

    pub fn builtin(self) -> DiagonalFamily {
        DiagonalFamily::builtin(self)
    }
}

impl TryFrom<u8> for FamilyId {
    type Error = Error;
    fn try_from(t: u8) -> Result<Self> {
        Self::new(t)
    }
}

impl From<FamilyId> for u8 {
    fn from(id: FamilyId) -> u8 {
        id.0
    }
}

impl fmt::Display for FamilyId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Polynomial coefficients in ascending powers of `p`.
pub type Poly = Vec<f64>;

/// Family of diagonal operators whose squared entries are polynomials in `p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalFamily {
    pub t: u8,
    pub domain: [f64; 2],
    /// Divide each squared entry by the column sum over outcomes.
    #[serde(default)]
    pub normalize: bool,
    /// `operators[r][i]` is the polynomial for `(λ^r_i)²`.
    pub operators: Vec<Vec<Poly>>,
}

fn eval_poly<T: Real>(poly: &[f64], p: T) -> T {
    poly.iter().rev().fold(T::zero(), |acc, &a| acc * p + T::lit(a))
}

fn cyclic(triple: [Poly; 3]) -> Vec<Vec<Poly>> {
    (0..3)
        .map(|r| (0..3).map(|i| triple[(i + 3 - r) % 3].clone()).collect())
        .collect()
}

impl DiagonalFamily {
    pub fn builtin(id: FamilyId) -> Self {
        let third = 1.0 / 3.0;
        let (normalize, operators) = match id.0 {
            // s² = (1+2p)/3, m² = t² = (1−p)/3
            0 => (
                false,
                cyclic([
                    vec![third, 2.0 * third],
                    vec![third, -third],
                    vec![third, -third],
                ]),
            ),
            // (s, m, t) ∝ (1, 1 − p/2, 1 − p)
            1 => (
                true,
                cyclic([vec![1.0], vec![1.0, -1.0, 0.25], vec![1.0, -2.0, 1.0]]),
            ),
            // (s², m², t²) = (p, 1/3, 2/3 − p)
            2 => (
                false,
                cyclic([vec![0.0, 1.0], vec![third], vec![2.0 * third, -1.0]]),
            ),
            // (s, m, t) ∝ (1, 1 − p², (1 − p)²)
            3 => (
                true,
                cyclic([
                    vec![1.0],
                    vec![1.0, 0.0, -2.0, 0.0, 1.0],
                    vec![1.0, -4.0, 6.0, -4.0, 1.0],
                ]),
            ),
            4 => (
                false,
                vec![
                    vec![vec![1.0], vec![1.0, -1.0], vec![1.0]],
                    vec![vec![0.0], vec![0.0, 1.0], vec![0.0]],
                ],
            ),
            _ => unreachable!("FamilyId is validated"),
        };
        let (lo, hi) = id.domain();
        Self {
            t: id.0,
            domain: [lo, hi],
            normalize,
            operators,
        }
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let fam: Self = serde_json::from_str(s)
            .map_err(|e| Error::InvalidParameter(format!("family file: {e}")))?;
        fam.check_shape()?;
        Ok(fam)
    }

    fn check_shape(&self) -> Result<()> {
        let dim = self.operators.first().map_or(0, Vec::len);
        if self.operators.is_empty() {
            return Err(Error::InvalidMeasurement("family has no operators".into()));
        }
        if dim < 2 {
            return Err(Error::InvalidDimension(dim));
        }
        if self.operators.iter().any(|op| op.len() != dim) {
            return Err(Error::Shape("family operators differ in dimension".into()));
        }
        if !(self.domain[0] <= self.domain[1]) {
            return Err(Error::InvalidParameter("family domain is empty".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.operators.first().map_or(0, Vec::len)
    }

    /// `slack` absorbs the rounding of `p` into the caller's scalar type.
    fn check_domain(&self, p: f64, slack: f64) -> Result<()> {
        let [lo, hi] = self.domain;
        let slack = slack.max(1e-12);
        if !p.is_finite() || p < lo - slack || p > hi + slack {
            return Err(Error::Domain {
                family: self.t,
                p,
                lo,
                hi,
            });
        }
        Ok(())
    }

    /// Diagonal entries `λ^r_i` at strength `p`.
    pub fn singular_table<T: Real>(&self, p: T) -> Result<Vec<Vec<T>>> {
        let pf = p.to_f64().unwrap_or(f64::NAN);
        self.check_domain(pf, scalar_slack::<T>())?;
        let [lo, hi] = self.domain;
        let p = p.max(T::lit(lo)).min(T::lit(hi));
        let dim = self.dim();
        let mut sq: Vec<Vec<T>> = self
            .operators
            .iter()
            .map(|op| op.iter().map(|poly| eval_poly(poly, p).max(T::zero())).collect())
            .collect();
        if self.normalize {
            for i in 0..dim {
                let total: T = sq.iter().map(|row| row[i]).sum();
                if total <= T::zero() {
                    return Err(Error::InvalidMeasurement(format!(
                        "family {} has an empty column {i} at p = {pf}",
                        self.t
                    )));
                }
                for row in sq.iter_mut() {
                    row[i] /= total;
                }
            }
        }
        Ok(sq
            .into_iter()
            .map(|row| row.into_iter().map(|x| x.sqrt()).collect())
            .collect())
    }

    pub fn measurement<T: Real>(&self, p: T) -> Result<Measurement<T>> {
        let table = self.singular_table(p)?;
        Measurement::new(table.iter().map(|d| CMatrix::from_real_diag(d)).collect())
    }
}

fn scalar_slack<T: Real>() -> f64 {
    4.0 * T::epsilon().to_f64().unwrap_or(0.0)
}

/// The measurement `M^(t)` at strength `p`.
pub fn family<T: Real>(t: FamilyId, p: T) -> Result<Measurement<T>> {
    DiagonalFamily::builtin(t).measurement(p)
}

/// `(G, F, R)` of `M^(t)`; the weak measurement uses its analytic expressions.
pub fn closed_form_triple<T: Real>(t: FamilyId, p: T) -> Result<InfoTriple<T>> {
    if t.0 == 4 {
        let fam = DiagonalFamily::builtin(t);
        fam.check_domain(p.to_f64().unwrap_or(f64::NAN), scalar_slack::<T>())?;
        let twelve = T::lit(12.0);
        let three = T::lit(3.0);
        let q = (T::one() - p).max(T::zero());
        return Ok(InfoTriple::new(
            (T::lit(4.0) + p) / twelve,
            (T::lit(2.0) + q.sqrt()) / three,
            q,
        ));
    }
    Ok(family(t, p)?.triple())
}

/// `count` evenly spaced points from `start` to `end`, both included exactly.
pub fn uniform_grid(start: f64, end: f64, count: usize) -> Vec<f64> {
    match count {
        0 => vec![],
        1 => vec![start],
        _ => (0..count)
            .map(|i| {
                if i + 1 == count {
                    end
                } else {
                    start + (end - start) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

pub fn default_grid(t: FamilyId) -> Vec<f64> {
    let (lo, hi) = t.domain();
    uniform_grid(lo, hi, DEFAULT_GRID_POINTS)
}

#[derive(Debug, Clone)]
pub struct SweepRow<T> {
    pub t: FamilyId,
    pub p: T,
    pub triple: InfoTriple<T>,
    pub report: BoundReport<T>,
    pub angles: Option<Vec<OutcomeAngles<T>>>,
}

/// Evaluates `M^(t)` over `grid`, rows sorted by `p`.
pub fn sweep<T: Real>(t: FamilyId, grid: &[T]) -> Result<Vec<SweepRow<T>>> {
    sweep_family(&DiagonalFamily::builtin(t), t, grid)
}

pub fn sweep_family<T: Real>(
    fam: &DiagonalFamily,
    t: FamilyId,
    grid: &[T],
) -> Result<Vec<SweepRow<T>>> {
    let mut ps = grid.to_vec();
    ps.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    ps.into_iter()
        .map(|p| {
            let m = fam.measurement(p)?;
            let triple = m.triple();
            let report = BoundReport::new(triple, m.dim())?;
            let angles = compile_angles(&m).ok();
            Ok(SweepRow {
                t,
                p,
                triple,
                report,
                angles,
            })
        })
        .collect()
}

/// Half-wave-plate settings realizing one outcome and its reversal.
#[derive(Debug, Clone, PartialEq)]
pub struct OutcomeAngles<T> {
    pub outcome: usize,
    /// `θ_i` in degrees with `λ_i = cos 2θ_i`.
    pub theta_deg: Vec<T>,
    /// `θ'_i` in degrees for the optimal reversal.
    pub reversal_deg: Vec<T>,
}

const REALIZABLE_TOL: f64 = 1e-10;

/// Transmission amplitudes of a diagonal operator after removing its global phase.
fn diagonal_amplitudes<T: Real>(m: &CMatrix<T>, operator: usize) -> Result<Vec<T>> {
    let tol = T::lit(REALIZABLE_TOL).max(T::epsilon() * T::lit(16.0));
    if !m.is_diagonal(tol) {
        return Err(Error::NotRealizable {
            operator,
            reason: "operator is not diagonal".into(),
        });
    }
    let diag = m.diagonal();
    let pivot = diag
        .iter()
        .copied()
        .max_by(|a, b| a.norm().partial_cmp(&b.norm()).unwrap_or(std::cmp::Ordering::Equal))
        .unwrap_or_else(|| C::new(T::zero(), T::zero()));
    let phase = if pivot.norm() > T::zero() {
        pivot.unscale(pivot.norm())
    } else {
        C::new(T::one(), T::zero())
    };
    diag.iter()
        .enumerate()
        .map(|(i, z)| {
            let w = z * phase.conj();
            if w.im.abs() > tol || w.re < -tol || w.re > T::one() + tol {
                Err(Error::NotRealizable {
                    operator,
                    reason: format!("entry {i} = {z} is not a transmission amplitude in [0, 1]"),
                })
            } else {
                Ok(w.re.max(T::zero()).min(T::one()))
            }
        })
        .collect()
}

fn plate_angle<T: Real>(lambda: T) -> T {
    lambda.acos().to_degrees() / T::lit(2.0)
}

/// Waveplate angles `θ_i = arccos(λ_i)/2` for every outcome and its reversal.
pub fn compile_angles<T: Real>(m: &Measurement<T>) -> Result<Vec<OutcomeAngles<T>>> {
    (0..m.outcomes())
        .map(|r| {
            let lambdas = diagonal_amplitudes(&m.kraus()[r], r)?;
            let rev = m.optimal_reversal(r)?;
            let rev_lambdas = diagonal_amplitudes(&rev.operator, r)?;
            Ok(OutcomeAngles {
                outcome: r,
                theta_deg: lambdas.into_iter().map(plate_angle).collect(),
                reversal_deg: rev_lambdas.into_iter().map(plate_angle).collect(),
            })
        })
        .collect()
}

/// Diagonal operator `Σ_i cos(2θ_i)|i⟩⟨i|` for angles in degrees.
pub fn operator_from_angles<T: Real>(theta_deg: &[T]) -> CMatrix<T> {
    let lambdas: Vec<T> = theta_deg
        .iter()
        .map(|&th| (T::lit(2.0) * th.to_radians()).cos())
        .collect();
    CMatrix::from_real_diag(&lambdas)
}
