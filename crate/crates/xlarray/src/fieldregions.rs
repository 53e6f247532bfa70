//! Near-/far-field boundary criteria: weakest-to-strongest element power
//! ratio, uniform-power distance (UPD), maximum phase error and the
//! classical and direction-dependent Rayleigh distances.

use std::f64::consts::PI;

use crate::channel::ChannelModel;
use crate::geometry::{distance_factor, ArrayGeometry, UserPose};
use crate::{invalid, Error, Result};

const MAX_BRACKET_R: f64 = 1e9;
const BISECT_REL_TOL: f64 = 1e-10;

/// Which boundary criterion produced a distance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistanceCriterion {
    Upd,
    DdRayleigh,
    ClassicalRayleigh,
}

/// A solved near-/far-field boundary distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldDistanceResult {
    pub distance: f64,
    pub criterion: DistanceCriterion,
    pub theta: f64,
    pub phi: f64,
    /// `Gamma_th` for UPD, `pi/8` for the Rayleigh criteria.
    pub threshold: f64,
    /// `|Gamma - Gamma_th|` or `|delta_phi - pi/8|` at the returned distance.
    pub residual: f64,
    /// Model the criterion was evaluated for (UPD only).
    pub model: Option<ChannelModel>,
    /// True when the bracketing solver detected non-monotonic behaviour and
    /// fell back to a scan for the outermost root.
    pub fallback_scan: bool,
}

/// Power ratio between the weakest and strongest array element, closed
/// form over the array plate `[-L_y/2, L_y/2] x [-L_z/2, L_z/2]`.
///
/// Proposed model: ratio of cubed extreme distances; NUSW: ratio of squared
/// extreme distances; UPW/USW: identically 1.
pub fn power_ratio(model: ChannelModel, geom: &ArrayGeometry, pose: &UserPose) -> Result<f64> {
    match model {
        ChannelModel::Upw | ChannelModel::Usw => Ok(1.0),
        ChannelModel::Proposed | ChannelModel::Nusw => {
            let dir = pose.direction();
            if model == ChannelModel::Proposed && dir.psi <= 0.0 {
                return Err(Error::PowerRatioUndefined {
                    reason: "the projected-aperture model with the user in the array plane (all gains zero)",
                });
            }
            let r = pose.r();
            let hy = geom.len_y() / 2.0;
            let hz = geom.len_z() / 2.0;
            let perp2 = (r * dir.psi).powi(2);
            let near_y = (r * dir.phi.abs() - hy).max(0.0);
            let near_z = (r * dir.omega.abs() - hz).max(0.0);
            let far_y = r * dir.phi.abs() + hy;
            let far_z = r * dir.omega.abs() + hz;
            let min_sq = perp2 + near_y * near_y + near_z * near_z;
            let max_sq = perp2 + far_y * far_y + far_z * far_z;
            let exponent = match model {
                ChannelModel::Proposed => 1.5,
                _ => 1.0,
            };
            Ok((min_sq / max_sq).powf(exponent))
        }
    }
}

/// Exhaustive per-element min/max gain ratio, the brute-force counterpart
/// of [`power_ratio`]. The two differ by the half-spacing between the
/// outermost element centers and the plate edge; they agree in the
/// large-`r` limit.
pub fn power_ratio_scan(model: ChannelModel, geom: &ArrayGeometry, pose: &UserPose) -> Result<f64> {
    match model {
        ChannelModel::Upw | ChannelModel::Usw => Ok(1.0),
        ChannelModel::Proposed | ChannelModel::Nusw => {
            let dir = pose.direction();
            if model == ChannelModel::Proposed && dir.psi <= 0.0 {
                return Err(Error::PowerRatioUndefined {
                    reason: "the projected-aperture model with the user in the array plane (all gains zero)",
                });
            }
            let eps = pose.epsilon(geom);
            let mut min_f = f64::INFINITY;
            let mut max_f = f64::NEG_INFINITY;
            for idx in geom.indices() {
                let f = distance_factor(eps, &dir, idx.i_y, idx.i_z);
                min_f = min_f.min(f);
                max_f = max_f.max(f);
            }
            let p = match model {
                ChannelModel::Proposed => 3,
                _ => 2,
            };
            Ok((min_f / max_f).powi(p))
        }
    }
}

/// Uniform-power distance: minimum `r` with
/// `power_ratio(r, theta, phi) >= gamma_th`, solved by bracketing and
/// bisection (the ratio is increasing in `r`).
pub fn upd(
    model: ChannelModel,
    geom: &ArrayGeometry,
    theta: f64,
    phi: f64,
    gamma_th: f64,
) -> Result<FieldDistanceResult> {
    if !(gamma_th > 0.0 && gamma_th < 1.0) {
        return Err(invalid("gamma_th", format!("threshold must lie in (0,1), got {gamma_th}")));
    }
    if matches!(model, ChannelModel::Upw | ChannelModel::Usw) {
        return Err(Error::PowerRatioUndefined {
            reason: "uniform-amplitude models (the power ratio is identically 1)",
        });
    }
    let ratio = |r: f64| -> Result<f64> {
        power_ratio(model, geom, &UserPose::new(r, theta, phi)?)
    };
    let (lo, hi) = bracket_increasing(&ratio, gamma_th, geom)?;
    let root = bisect(&|r| Ok(ratio(r)? - gamma_th), lo, hi)?;
    let residual = (ratio(root)? - gamma_th).abs();
    Ok(FieldDistanceResult {
        distance: root,
        criterion: DistanceCriterion::Upd,
        theta,
        phi,
        threshold: gamma_th,
        residual,
        model: Some(model),
        fallback_scan: false,
    })
}

/// Expand a bracket for an increasing function crossing `target`.
fn bracket_increasing(
    f: &impl Fn(f64) -> Result<f64>,
    target: f64,
    geom: &ArrayGeometry,
) -> Result<(f64, f64)> {
    let r0 = geom.len_diag().max(10.0 * geom.spacing());
    let mut lo = r0;
    let mut hi = r0;
    if f(r0)? < target {
        while f(hi)? < target {
            lo = hi;
            hi *= 2.0;
            if hi > MAX_BRACKET_R {
                return Err(Error::BracketFailure(format!(
                    "power ratio never reaches {target} below r = {MAX_BRACKET_R:.0} m"
                )));
            }
        }
    } else {
        for _ in 0..200 {
            hi = lo;
            lo /= 2.0;
            if f(lo)? < target {
                return Ok((lo, hi));
            }
        }
        return Err(Error::BracketFailure(
            "power ratio exceeds the threshold down to r = 0".into(),
        ));
    }
    Ok((lo, hi))
}

/// Bisection for a sign change of `f` on `[lo, hi]`, to relative tolerance
/// in the abscissa.
fn bisect(f: &impl Fn(f64) -> Result<f64>, mut lo: f64, mut hi: f64) -> Result<f64> {
    let f_lo = f(lo)?;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (hi - lo) <= BISECT_REL_TOL * hi {
            return Ok(mid);
        }
        let fm = f(mid)?;
        if (fm <= 0.0) == (f_lo <= 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Maximum phase error of the UPW approximation over the element centers
/// (exhaustive scan, lexicographic tie-break).
pub fn max_phase_error(geom: &ArrayGeometry, pose: &UserPose, lambda: f64) -> f64 {
    let dir = pose.direction();
    let eps = pose.epsilon(geom);
    let r = pose.r();
    let d = geom.spacing();
    let mut best = f64::NEG_INFINITY;
    for idx in geom.indices() {
        let dist = r * distance_factor(eps, &dir, idx.i_y, idx.i_z);
        let upw = r - (idx.i_y * d * dir.phi + idx.i_z * d * dir.omega);
        let err = 2.0 * PI / lambda * (dist - upw);
        if err > best {
            best = err;
        }
    }
    best
}

/// Maximum phase error of the UPW approximation over the whole array plate
/// `[-L_y/2, L_y/2] x [-L_z/2, L_z/2]`: coarse lattice scan (capped at 1025
/// nodes per axis) followed by local grid refinement around the argmax.
///
/// This is the function the direction-dependent Rayleigh criterion is
/// solved against; at normal incidence it reproduces `2 L_d^2 / lambda`
/// with `L_y = M_y d`, whereas the element-center scan stops half a spacing
/// short of the plate edge.
pub fn aperture_phase_error(geom: &ArrayGeometry, pose: &UserPose, lambda: f64) -> f64 {
    let dir = pose.direction();
    let r = pose.r();
    let hy = geom.len_y() / 2.0;
    let hz = geom.len_z() / 2.0;
    let err = |u: f64, v: f64| -> f64 {
        let dist_sq = r * r - 2.0 * r * (u * dir.phi + v * dir.omega) + u * u + v * v;
        let upw = r - (u * dir.phi + v * dir.omega);
        2.0 * PI / lambda * (dist_sq.max(0.0).sqrt() - upw)
    };
    let ny = geom.m_y().min(1024) + 1;
    let nz = geom.m_z().min(1024) + 1;
    let mut best = f64::NEG_INFINITY;
    let mut arg = (0.0, 0.0);
    for kz in 0..nz {
        let v = -hz + 2.0 * hz * kz as f64 / (nz - 1).max(1) as f64;
        for ky in 0..ny {
            let u = -hy + 2.0 * hy * ky as f64 / (ny - 1).max(1) as f64;
            let e = err(u, v);
            if e > best {
                best = e;
                arg = (u, v);
            }
        }
    }
    // 3x3 refinement around the coarse argmax
    let mut step_u = if ny > 1 { 2.0 * hy / (ny - 1) as f64 } else { hy };
    let mut step_v = if nz > 1 { 2.0 * hz / (nz - 1) as f64 } else { hz };
    for _ in 0..80 {
        let (u0, v0) = arg;
        for dv in [-1.0, 0.0, 1.0] {
            for du in [-1.0, 0.0, 1.0] {
                let u = (u0 + du * step_u).clamp(-hy, hy);
                let v = (v0 + dv * step_v).clamp(-hz, hz);
                let e = err(u, v);
                if e > best {
                    best = e;
                    arg = (u, v);
                }
            }
        }
        step_u *= 0.5;
        step_v *= 0.5;
    }
    best
}

/// Direction-dependent Rayleigh distance: minimum `r` such that the
/// maximum phase error over the aperture is at most `pi/8`. Monotonicity
/// of the phase error in `r` is verified on the bracket; a scan fallback
/// finds the outermost crossing otherwise.
pub fn dd_rayleigh(
    geom: &ArrayGeometry,
    theta: f64,
    phi: f64,
    lambda: f64,
) -> Result<FieldDistanceResult> {
    let target = PI / 8.0;
    let err = |r: f64| -> Result<f64> {
        Ok(aperture_phase_error(geom, &UserPose::new(r, theta, phi)?, lambda))
    };
    let r0 = geom.len_diag().max(10.0 * geom.spacing());
    let mut lo = r0;
    let mut hi = r0;
    if err(r0)? > target {
        while err(hi)? > target {
            lo = hi;
            hi *= 2.0;
            if hi > MAX_BRACKET_R {
                return Err(Error::BracketFailure(format!(
                    "phase error stays above pi/8 up to r = {MAX_BRACKET_R:.0} m"
                )));
            }
        }
    } else {
        let mut found = false;
        for _ in 0..200 {
            hi = lo;
            lo /= 2.0;
            if err(lo)? > target {
                found = true;
                break;
            }
        }
        if !found {
            // phase error never exceeds pi/8: the whole range is far field
            let residual = (err(lo)? - target).abs();
            return Ok(FieldDistanceResult {
                distance: lo,
                criterion: DistanceCriterion::DdRayleigh,
                theta,
                phi,
                threshold: target,
                residual,
                model: None,
                fallback_scan: false,
            });
        }
    }
    // verify the error is nonincreasing across the bracket
    let mut monotone = true;
    let mut prev = f64::INFINITY;
    for k in 0..=16 {
        let r = lo * (hi / lo).powf(k as f64 / 16.0);
        let e = err(r)?;
        if e > prev * (1.0 + 1e-9) {
            monotone = false;
            break;
        }
        prev = e;
    }
    let (root, fallback) = if monotone {
        (bisect(&|r| Ok(target - err(r)?), lo, hi)?, false)
    } else {
        // outermost crossing on a dense log grid, then local bisection
        let n = 1024;
        let mut upper = hi;
        let mut lower = lo;
        for k in (0..n).rev() {
            let r = lo * (hi / lo).powf(k as f64 / (n - 1) as f64);
            if err(r)? > target {
                lower = r;
                break;
            }
            upper = r;
        }
        (bisect(&|r| Ok(target - err(r)?), lower, upper)?, true)
    };
    let residual = (err(root)? - target).abs();
    Ok(FieldDistanceResult {
        distance: root,
        criterion: DistanceCriterion::DdRayleigh,
        theta,
        phi,
        threshold: target,
        residual,
        model: None,
        fallback_scan: fallback,
    })
}

/// Classical Rayleigh distance `2 D^2 / lambda`.
pub fn classical_rayleigh(aperture_d: f64, lambda: f64) -> Result<f64> {
    if !(aperture_d > 0.0) {
        return Err(invalid("aperture_d", format!("aperture must be positive, got {aperture_d}")));
    }
    if !(lambda > 0.0) {
        return Err(invalid("lambda", format!("wavelength must be positive, got {lambda}")));
    }
    Ok(2.0 * aperture_d * aperture_d / lambda)
}
