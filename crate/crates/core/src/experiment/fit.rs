//! Fit of the input-noise parameter `e` to a measured sweep.

use crate::error::{Error, Result};
use crate::experiment::pipeline::model_triple;
use crate::families::{family, FamilyId};
use crate::measurement::{InfoTriple, Measurement};
use crate::scalar::Real;

pub const FIT_TOLERANCE: f64 = 1e-6;

/// Minimizes a unimodal function on `[lo, hi]` by golden-section search.
pub fn golden_section<T: Real>(mut f: impl FnMut(T) -> T, lo: T, hi: T, tol: T) -> T {
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) / T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
    }
    let mid = (a + b) / T::lit(2.0);
    // The interior search cannot land exactly on a boundary minimum.
    [(f(mid), mid), (f(lo), lo), (f(hi), hi)]
        .into_iter()
        .min_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal))
        .map(|(_, x)| x)
        .unwrap_or(mid)
}

fn squared_distance<T: Real>(a: &InfoTriple<T>, b: &InfoTriple<T>) -> T {
    (a.g - b.g).powi(2) + (a.f - b.f).powi(2) + (a.r - b.r).powi(2)
}

/// `argmin_e Σ_j ‖measured_j − model_j(e)‖²` over `e ∈ [0, 1]` for arbitrary
/// measurements.
pub fn fit_noise_measurements<T: Real>(points: &[(Measurement<T>, InfoTriple<T>)]) -> Result<T> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "noise fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    // The model is affine in e, so two evaluations per point determine it.
    let anchors = points
        .iter()
        .map(|(m, measured)| Ok((model_triple(m, T::one())?, model_triple(m, T::zero())?, *measured)))
        .collect::<Result<Vec<_>>>()?;
    let objective = |e: T| {
        anchors
            .iter()
            .map(|(clean, mixed, measured)| {
                let model = InfoTriple::new(
                    e * clean.g + (T::one() - e) * mixed.g,
                    e * clean.f + (T::one() - e) * mixed.f,
                    e * clean.r + (T::one() - e) * mixed.r,
                );
                squared_distance(&model, measured)
            })
            .sum::<T>()
    };
    Ok(golden_section(objective, T::zero(), T::one(), T::lit(FIT_TOLERANCE)))
}

/// Fits `e` to measured `(p, triple)` points of family `t`.
pub fn fit_noise<T: Real>(points: &[(T, InfoTriple<T>)], t: FamilyId) -> Result<T> {
    if points.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "noise fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    let with_models = points
        .iter()
        .map(|&(p, triple)| Ok((family(t, p)?, triple)))
        .collect::<Result<Vec<_>>>()?;
    fit_noise_measurements(&with_models)
}
