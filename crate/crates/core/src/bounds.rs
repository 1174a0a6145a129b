//! Global and pairwise trade-off relations between `G`, `F` and `R`.
//!
//! Every gap is reported as "right-hand side minus left-hand side", so a
//! satisfied inequality has a non-negative gap and a saturated one a zero gap.

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, svd, CMatrix};
use crate::measurement::{InfoTriple, Measurement};
use crate::scalar::Real;

/// Window within which a slightly negative radicand is clamped to zero.
const RADICAND_CLAMP: f64 = 1e-9;

fn sqrt_clamped<T: Real>(x: T) -> T {
    x.max(T::zero()).sqrt()
}

/// Slack of the global relation
/// `√(F − 1/(d+1)) ≤ √(G − 1/(d+1)) + √(R/(d(d+1))) + √((d−2)(2/(d+1) − G − R/(d(d+1))))`.
pub fn global_gap<T: Real>(triple: &InfoTriple<T>, dim: usize) -> Result<T> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let d = T::from_usize_lossy(dim);
    let d1 = d + T::one();
    let inv = T::one() / d1;
    let r_term = triple.r / (d * d1);
    let radicand = (d - T::lit(2.0)) * (T::lit(2.0) / d1 - triple.g - r_term);
    if radicand < -T::lit(RADICAND_CLAMP) {
        return Err(Error::InfeasibleTriple {
            radicand: radicand.to_f64().unwrap_or(f64::NAN),
        });
    }
    let rhs = sqrt_clamped(triple.g - inv) + sqrt_clamped(r_term) + sqrt_clamped(radicand);
    Ok(rhs - sqrt_clamped(triple.f - inv))
}

/// Slacks of the G-F, G-R and F-R relations, in that order.
pub fn pairwise_gaps<T: Real>(triple: &InfoTriple<T>, dim: usize) -> Result<(T, T, T)> {
    if dim < 2 {
        return Err(Error::InvalidDimension(dim));
    }
    let d = T::from_usize_lossy(dim);
    let d1 = d + T::one();
    let two = T::lit(2.0);
    let inv = T::one() / d1;
    let gf = sqrt_clamped(triple.g - inv) + sqrt_clamped((d - T::one()) * (two / d1 - triple.g))
        - sqrt_clamped(triple.f - inv);
    let gr = two * d - d * d1 * triple.g - (d - T::one()) * triple.r;
    let fr = d1 * triple.f - (d - T::one()) * triple.r - two;
    Ok((gf, gr, fr))
}

/// Gaps and numeric saturation flags for one triple.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundReport<T> {
    pub dim: usize,
    pub triple: InfoTriple<T>,
    pub gap_global: T,
    pub gap_gf: T,
    pub gap_gr: T,
    pub gap_fr: T,
    pub sat_global: bool,
    pub sat_gf: bool,
    pub sat_gr: bool,
    pub sat_fr: bool,
}

impl<T: Real> BoundReport<T> {
    pub fn new(triple: InfoTriple<T>, dim: usize) -> Result<Self> {
        Self::with_tolerance(triple, dim, T::saturation_tol())
    }

    pub fn with_tolerance(triple: InfoTriple<T>, dim: usize, tol: T) -> Result<Self> {
        let gap_global = global_gap(&triple, dim)?;
        let (gap_gf, gap_gr, gap_fr) = pairwise_gaps(&triple, dim)?;
        Ok(Self {
            dim,
            triple,
            gap_global,
            gap_gf,
            gap_gr,
            gap_fr,
            sat_global: gap_global.abs() <= tol,
            sat_gf: gap_gf.abs() <= tol,
            sat_gr: gap_gr.abs() <= tol,
            sat_fr: gap_fr.abs() <= tol,
        })
    }

    pub fn for_measurement(m: &Measurement<T>) -> Result<Self> {
        Self::new(m.triple(), m.dim())
    }

    pub fn gaps(&self) -> [T; 4] {
        [self.gap_global, self.gap_gf, self.gap_gr, self.gap_fr]
    }

    pub fn flags(&self) -> SaturationFlags {
        SaturationFlags {
            global: self.sat_global,
            gf: self.sat_gf,
            gr: self.sat_gr,
            fr: self.sat_fr,
        }
    }
}

impl<T: Real + Serialize> Serialize for BoundReport<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeStruct;
        let mut s = serializer.serialize_struct("BoundReport", 12)?;
        s.serialize_field("dim", &self.dim)?;
        s.serialize_field("G", &self.triple.g)?;
        s.serialize_field("F", &self.triple.f)?;
        s.serialize_field("R", &self.triple.r)?;
        s.serialize_field("gap_global", &self.gap_global)?;
        s.serialize_field("gap_GF", &self.gap_gf)?;
        s.serialize_field("gap_GR", &self.gap_gr)?;
        s.serialize_field("gap_FR", &self.gap_fr)?;
        s.serialize_field("sat_global", &self.sat_global)?;
        s.serialize_field("sat_GF", &self.sat_gf)?;
        s.serialize_field("sat_GR", &self.sat_gr)?;
        s.serialize_field("sat_FR", &self.sat_fr)?;
        s.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SaturationFlags {
    pub global: bool,
    pub gf: bool,
    pub gr: bool,
    pub fr: bool,
}

/// Saturation read off the operator structure rather than the gaps.
///
/// With `v_i = (λ^0_i, …, λ^N_i)` built from per-outcome singular values in
/// descending order:
///
/// * global: all `v_i` collinear and `|v_1| = … = |v_{d−2}|`;
/// * G-F: all `v_i` collinear and `|v_1| = … = |v_{d−1}|`;
/// * G-R: every `M_r†M_r = a_r|i_r⟩⟨i_r| + b_r·1` with `a_r, b_r ≥ 0`, i.e. all
///   eigenvalues except the largest coincide;
/// * F-R: every operator is rank ≤ 1 or proportional to a unitary.
pub fn classify_saturation<T: Real>(m: &Measurement<T>, tol: T) -> SaturationFlags {
    let d = m.dim();
    let outcomes = m.outcomes();
    let sorted = CMatrix::from_fn(d, outcomes, |i, r| {
        crate::scalar::c(m.svds()[r].singulars[i])
    });
    // Second singular value of a d x (N+1) matrix: pad to square.
    let n = d.max(outcomes);
    let padded = CMatrix::from_fn(n, n, |i, j| {
        if i < d && j < outcomes {
            sorted[(i, j)]
        } else {
            crate::scalar::c(T::zero())
        }
    });
    let collinear = svd(&padded)
        .map(|s| s.singulars.get(1).map_or(true, |&x| x <= tol))
        .unwrap_or(false);
    let row_norm = |i: usize| {
        (0..outcomes)
            .map(|r| sorted[(i, r)].re.powi(2))
            .sum::<T>()
            .sqrt()
    };
    let equal_norms = |range: std::ops::Range<usize>| {
        let norms: Vec<T> = range.map(row_norm).collect();
        norms.windows(2).all(|w| (w[0] - w[1]).abs() <= tol)
    };
    let global = collinear && (d < 3 || equal_norms(1..d - 1));
    let gf = collinear && equal_norms(1..d);

    let gr = m.kraus().iter().all(|k| {
        let gram = &k.adjoint() * k;
        match hermitian_eigen(&gram) {
            Ok(e) => e.values[1..].windows(2).all(|w| (w[0] - w[1]).abs() <= tol),
            Err(_) => false,
        }
    });

    let fr = m.svds().iter().all(|s| {
        let rank_le_one = s.singulars.len() < 2 || s.singulars[1] <= tol;
        let flat = s.max() - s.min() <= tol;
        rank_le_one || flat
    });

    SaturationFlags { global, gf, gr, fr }
}
