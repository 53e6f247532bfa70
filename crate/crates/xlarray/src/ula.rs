//! Uniform linear array specialization (`M_y = 1`): angular span and
//! difference, the reduced SNR form, the NUSW comparison, the constant-span
//! circle and the per-element path-loss / projected-aperture decomposition.

use std::f64::consts::PI;

use crate::channel::LinkBudget;
use crate::geometry::UserPose;
use crate::snr::{SnrMethod, SnrResult};
use crate::{invalid, Error, Result};

/// Arctangent angles subtended at the user by the two ULA end points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UlaAngles {
    pub alpha_1: f64,
    pub alpha_2: f64,
    /// `alpha_1 + alpha_2`, the angle formed by the segments from the user
    /// to both array ends.
    pub delta_span: f64,
    /// `alpha_1 - alpha_2`.
    pub delta_diff: f64,
}

/// Normalized path-loss, projected-aperture and channel power gain of the
/// end element relative to the central element.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RhoFactors {
    pub rho_pl: f64,
    pub rho_aper: f64,
    pub rho: f64,
}

/// Critical array size below which the NUSW model stays within a given
/// accuracy of the projected-aperture model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CriticalPoint {
    /// Largest `M` with `ula_snr / ula_nusw_snr >= ratio_th`; 0 when the
    /// ratio is already below the threshold at `M = 1`.
    pub m_star: usize,
    /// The search hit the size cap (threshold below the infinite-`M` ratio).
    pub capped: bool,
    /// Monotonicity of the ratio failed on the bracket and a linear scan
    /// was used instead of binary search.
    pub fallback_scan: bool,
}

fn require_off_axis(pose: &UserPose) -> Result<f64> {
    let st = pose.theta().sin();
    if st <= 0.0 {
        return Err(Error::UnsupportedPose {
            requirement: "sin(theta) > 0 (user off the array axis)",
        });
    }
    Ok(st)
}

/// End-point angles of an `M`-element ULA along the z-axis:
/// `alpha_1 = arctan((Md/2 - r cos t)/(r sin t))`,
/// `alpha_2 = arctan((Md/2 + r cos t)/(r sin t))`.
pub fn ula_angles(m: usize, d: f64, pose: &UserPose) -> Result<UlaAngles> {
    if m == 0 {
        return Err(invalid("m", "element count must be positive"));
    }
    if !(d > 0.0) {
        return Err(invalid("d", format!("spacing must be positive, got {d}")));
    }
    let st = require_off_axis(pose)?;
    let r = pose.r();
    let half = m as f64 * d / 2.0;
    let alpha_1 = ((half - r * pose.theta().cos()) / (r * st)).atan();
    let alpha_2 = ((half + r * pose.theta().cos()) / (r * st)).atan();
    Ok(UlaAngles {
        alpha_1,
        alpha_2,
        delta_span: alpha_1 + alpha_2,
        delta_diff: alpha_1 - alpha_2,
    })
}

/// Reduced SNR of the projected-aperture model for a ULA:
/// `(p_bar A cos p / 4 pi d r sin t) [sin a1 + sin a2]`.
pub fn ula_snr(
    m: usize,
    d: f64,
    a: f64,
    pose: &UserPose,
    budget: &LinkBudget,
) -> Result<SnrResult> {
    if !(a > 0.0) {
        return Err(invalid("a", format!("element area must be positive, got {a}")));
    }
    let st = require_off_axis(pose)?;
    let ang = ula_angles(m, d, pose)?;
    let cp = pose.phi().cos();
    let gamma = if cp <= 0.0 {
        0.0
    } else {
        budget.p_bar() * a * cp / (4.0 * PI * d * pose.r() * st)
            * (ang.alpha_1.sin() + ang.alpha_2.sin())
    };
    Ok(SnrResult::new(gamma, SnrMethod::ClosedForm))
}

/// NUSW reference SNR for a ULA,
/// `p_bar lambda^2 delta_span / ((4 pi)^2 d r sin t)`.
pub fn ula_nusw_snr(m: usize, d: f64, pose: &UserPose, budget: &LinkBudget) -> Result<SnrResult> {
    let st = require_off_axis(pose)?;
    let ang = ula_angles(m, d, pose)?;
    let gamma = budget.p_bar() * budget.lambda().powi(2) * ang.delta_span
        / ((4.0 * PI).powi(2) * d * pose.r() * st);
    Ok(SnrResult::new(gamma, SnrMethod::NuswReference))
}

/// Infinite-`M` ULA limit `p_bar A cos p / (2 pi d r sin t)`.
pub fn ula_snr_limit(d: f64, a: f64, pose: &UserPose, budget: &LinkBudget) -> Result<SnrResult> {
    let st = require_off_axis(pose)?;
    let gamma = budget.p_bar() * a * pose.phi().cos().max(0.0) / (2.0 * PI * d * pose.r() * st);
    Ok(SnrResult::new(gamma, SnrMethod::Asymptotic))
}

const CRITICAL_M_CAP: usize = 1 << 32;
const FALLBACK_SCAN_CAP: usize = 1 << 20;

/// Largest `M` for which the NUSW SNR stays within `ratio_th` of the
/// projected-aperture SNR (`ula_snr / ula_nusw_snr >= ratio_th`).
///
/// Doubling search for the bracket, with the ratio checked to be
/// nonincreasing over the sampled sizes; binary search inside the bracket,
/// or a linear scan (flagged) when monotonicity fails.
pub fn ula_critical_point(
    d: f64,
    a: f64,
    pose: &UserPose,
    budget: &LinkBudget,
    ratio_th: f64,
) -> Result<CriticalPoint> {
    if !(ratio_th > 0.0 && ratio_th < 1.0) {
        return Err(invalid("ratio_th", format!("threshold must lie in (0,1), got {ratio_th}")));
    }
    let ratio = |m: usize| -> Result<f64> {
        Ok(ula_snr(m, d, a, pose, budget)?.gamma / ula_nusw_snr(m, d, pose, budget)?.gamma)
    };
    if ratio(1)? < ratio_th {
        return Ok(CriticalPoint {
            m_star: 0,
            capped: false,
            fallback_scan: false,
        });
    }
    let mut lo = 1usize;
    let mut hi = 1usize;
    let mut prev = f64::INFINITY;
    let mut monotone = true;
    loop {
        let r = ratio(hi)?;
        if r > prev * (1.0 + 1e-12) {
            monotone = false;
        }
        prev = r;
        if r < ratio_th {
            break;
        }
        lo = hi;
        if hi >= CRITICAL_M_CAP {
            return Ok(CriticalPoint {
                m_star: hi,
                capped: true,
                fallback_scan: false,
            });
        }
        hi *= 2;
    }
    if monotone {
        // invariant: ratio(lo) >= th > ratio(hi)
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if ratio(mid)? >= ratio_th {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(CriticalPoint {
            m_star: lo,
            capped: false,
            fallback_scan: false,
        })
    } else {
        let cap = hi.min(FALLBACK_SCAN_CAP);
        let mut best = 0usize;
        for m in 1..=cap {
            if ratio(m)? >= ratio_th {
                best = m;
            }
        }
        Ok(CriticalPoint {
            m_star: best,
            capped: hi > FALLBACK_SCAN_CAP,
            fallback_scan: true,
        })
    }
}

/// Path-loss / projected-aperture decomposition of the end element's
/// channel power gain relative to the central element, for a ULA along the
/// z-axis with the end element at offset `(M-1)/2` spacings.
pub fn ula_rho_factors(m: usize, d: f64, pose: &UserPose) -> Result<RhoFactors> {
    if m < 2 {
        return Err(invalid("m", "rho factors need distinct end and center elements (m >= 2)"));
    }
    if !(d > 0.0) {
        return Err(invalid("d", format!("spacing must be positive, got {d}")));
    }
    let dir = pose.direction();
    if dir.psi <= 0.0 {
        return Err(Error::UnsupportedPose {
            requirement: "sin(theta) cos(phi) > 0 (positive projected aperture)",
        });
    }
    let q = pose.position();
    let end_z = (m as f64 - 1.0) / 2.0 * d;
    let d0 = (q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt();
    let de = (q[0] * q[0] + q[1] * q[1] + (q[2] - end_z).powi(2)).sqrt();
    let rho_pl = (d0 / de).powi(2);
    let rho_aper = (q[0] / de) / (q[0] / d0);
    Ok(RhoFactors {
        rho_pl,
        rho_aper,
        rho: rho_pl * rho_aper,
    })
}

/// Center and radius of the circle through the two ULA end points on which
/// the angular span is constant:
/// center `[(Md/2) cot(s) cos p, (Md/2) cot(s) sin p, 0]`,
/// radius `(Md/2)/sin(s)`.
pub fn ula_constant_span_circle(m: usize, d: f64, phi: f64, span: f64) -> Result<([f64; 3], f64)> {
    if !(span > 0.0 && span < PI) {
        return Err(invalid("span", format!("angular span must lie in (0, pi), got {span}")));
    }
    if m == 0 {
        return Err(invalid("m", "element count must be positive"));
    }
    if !(d > 0.0) {
        return Err(invalid("d", format!("spacing must be positive, got {d}")));
    }
    let half = m as f64 * d / 2.0;
    let g = half * span.cos() / span.sin();
    Ok(([g * phi.cos(), g * phi.sin(), 0.0], half / span.sin()))
}

/// Pose on the user-side arc of the constant-span circle, parametrized by
/// the angle `t in (-(pi - span), pi - span)` measured at the circle center
/// from the in-plane direction `(cos p, sin p, 0)`; `t = 0` is the arc apex
/// and the limits approach the array end points.
pub fn constant_span_arc_pose(m: usize, d: f64, phi: f64, span: f64, t: f64) -> Result<UserPose> {
    let (_, radius) = ula_constant_span_circle(m, d, phi, span)?;
    if t.abs() >= PI - span {
        return Err(invalid("t", format!("arc parameter must lie in (-(pi-span), pi-span), got {t}")));
    }
    // signed in-plane center offset (cot is negative for span > pi/2)
    let g = m as f64 * d / 2.0 * span.cos() / span.sin();
    let u = g + radius * t.cos();
    let z = radius * t.sin();
    let r = u.hypot(z);
    let theta = (z / r).acos();
    UserPose::new(r, theta, phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::LinkBudget;
    use crate::geometry::ArrayGeometry;
    use crate::snr::snr_closed_form;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_6};

    const LAMBDA: f64 = 0.0628;
    const D: f64 = 0.0628;

    fn budget() -> LinkBudget {
        LinkBudget::isotropic_db(90.0, LAMBDA).unwrap()
    }

    fn area() -> f64 {
        LAMBDA * LAMBDA / (4.0 * PI)
    }

    #[test]
    fn angles_normal_incidence() {
        let p = UserPose::boresight(25.0).unwrap();
        let ang = ula_angles(64, D, &p).unwrap();
        assert_relative_eq!(ang.alpha_1, (2.0096f64 / 25.0).atan(), epsilon = 1e-12);
        assert_relative_eq!(ang.alpha_1, 0.08025, epsilon = 1e-4);
        // cos(pi/2) is ~6e-17, not exactly zero
        assert_relative_eq!(ang.alpha_1, ang.alpha_2, epsilon = 1e-15);
        assert_relative_eq!(ang.delta_span, 0.16050, epsilon = 1e-4);
        assert_relative_eq!(ang.delta_diff, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn angles_limit_and_errors() {
        let p = UserPose::new(25.0, 1.0, 0.2).unwrap();
        let ang = ula_angles(1 << 40, D, &p).unwrap();
        assert_relative_eq!(ang.delta_span, PI, epsilon = 1e-6);
        let axis = UserPose::new(25.0, 0.0, 0.0).unwrap();
        assert!(ula_angles(64, D, &axis).is_err());
        assert!(ula_angles(0, D, &p).is_err());
    }

    #[test]
    fn snr_two_forms_agree() {
        let b = budget();
        for (theta, phi) in [(FRAC_PI_2, 0.0), (FRAC_PI_3, 0.4), (2.2, -0.9)] {
            let p = UserPose::new(25.0, theta, phi).unwrap();
            let ang = ula_angles(64, D, &p).unwrap();
            let gamma = ula_snr(64, D, area(), &p, &b).unwrap().gamma;
            let alt = b.p_bar() * area() * phi.cos() / (2.0 * PI * D * 25.0 * theta.sin())
                * (ang.delta_span / 2.0).sin()
                * (ang.delta_diff / 2.0).cos();
            assert_relative_eq!(gamma, alt, max_relative = 1e-12);
        }
    }

    #[test]
    fn snr_matches_planar_closed_form() {
        let b = budget();
        let g = ArrayGeometry::new(1, 64, D, area()).unwrap();
        for (theta, phi) in [(FRAC_PI_2, 0.0), (1.2, 0.5), (2.0, -0.7)] {
            let p = UserPose::new(25.0, theta, phi).unwrap();
            let ula = ula_snr(64, D, area(), &p, &b).unwrap().gamma;
            let upa = snr_closed_form(&g, &p, &b).gamma;
            assert_relative_eq!(ula, upa, max_relative = 1e-6);
        }
    }

    #[test]
    fn snr_monotone_and_bounded() {
        let b = budget();
        let p = UserPose::new(25.0, 1.1, 0.3).unwrap();
        let bound = ula_snr_limit(D, area(), &p, &b).unwrap().gamma;
        let mut last = 0.0;
        for m in [1usize, 8, 64, 512, 4096, 1 << 20] {
            let gamma = ula_snr(m, D, area(), &p, &b).unwrap().gamma;
            assert!(gamma >= last && gamma <= bound * (1.0 + 1e-12));
            last = gamma;
        }
        assert_relative_eq!(
            ula_snr(1 << 34, D, area(), &p, &b).unwrap().gamma,
            bound,
            max_relative = 1e-6
        );
    }

    #[test]
    fn nusw_overestimates_at_normal_incidence() {
        let b = budget();
        let p = UserPose::boresight(25.0).unwrap();
        for m in [1usize, 16, 64, 1024, 1 << 16] {
            let nusw = ula_nusw_snr(m, D, &p, &b).unwrap().gamma;
            let prop = ula_snr(m, D, area(), &p, &b).unwrap().gamma;
            assert!(nusw >= prop, "m={m}: {nusw} < {prop}");
        }
    }

    #[test]
    fn nusw_linear_in_span() {
        let b = budget();
        let p = UserPose::boresight(25.0).unwrap();
        let per_span = |m: usize| {
            ula_nusw_snr(m, D, &p, &b).unwrap().gamma / ula_angles(m, D, &p).unwrap().delta_span
        };
        assert_relative_eq!(per_span(16), per_span(4096), max_relative = 1e-12);
        // delta_span -> pi limit
        let lim = b.p_bar() * LAMBDA * LAMBDA / (16.0 * PI * D * 25.0);
        assert_relative_eq!(ula_nusw_snr(1 << 40, D, &p, &b).unwrap().gamma, lim, max_relative = 1e-6);
    }

    #[test]
    fn critical_point_matches_linear_scan() {
        let b = budget();
        let p = UserPose::boresight(25.0).unwrap();
        let cp = ula_critical_point(D, area(), &p, &b, 0.95).unwrap();
        assert!(!cp.capped && !cp.fallback_scan);
        let ratio = |m: usize| {
            ula_snr(m, D, area(), &p, &b).unwrap().gamma
                / ula_nusw_snr(m, D, &p, &b).unwrap().gamma
        };
        assert!(ratio(cp.m_star) >= 0.95);
        assert!(ratio(cp.m_star + 1) < 0.95);
        let mut scan = 0usize;
        for m in 1..=(2 * cp.m_star + 4) {
            if ratio(m) >= 0.95 {
                scan = m;
            }
        }
        assert_eq!(cp.m_star, scan);
    }

    #[test]
    fn critical_point_edge_cases() {
        let b = budget();
        let p = UserPose::boresight(25.0).unwrap();
        // below the infinite-M ratio 2/pi: every M qualifies
        let cp = ula_critical_point(D, area(), &p, &b, 0.01).unwrap();
        assert!(cp.capped);
        // inclined view: the ratio starts at cos(pi/3) = 0.5 < 0.95
        let inclined = UserPose::new(25.0, FRAC_PI_6, 0.0).unwrap();
        let cp = ula_critical_point(D, area(), &inclined, &b, 0.95).unwrap();
        assert_eq!(cp.m_star, 0);
        assert!(ula_critical_point(D, area(), &p, &b, 1.5).is_err());
    }

    #[test]
    fn rho_factors_normal_incidence() {
        let p = UserPose::boresight(25.0).unwrap();
        let f = ula_rho_factors(65, D, &p).unwrap();
        let end = 32.0 * D;
        assert_relative_eq!(f.rho_pl, 625.0 / (625.0 + end * end), max_relative = 1e-12);
        assert_relative_eq!(f.rho_aper, 25.0 / (625.0 + end * end).sqrt(), max_relative = 1e-12);
        assert_relative_eq!(f.rho, f.rho_pl * f.rho_aper, max_relative = 1e-12);
        assert!(f.rho_pl <= f.rho_aper);
    }

    #[test]
    fn rho_factors_decrease_with_span() {
        let mut last = RhoFactors { rho_pl: 1.0, rho_aper: 1.0, rho: 1.0 };
        for m in [3usize, 65, 301, 1001, 4001] {
            let p = UserPose::boresight(25.0).unwrap();
            let f = ula_rho_factors(m, D, &p).unwrap();
            assert!(f.rho_pl < last.rho_pl && f.rho_aper < last.rho_aper);
            last = f;
        }
        assert!(ula_rho_factors(1, D, &UserPose::boresight(25.0).unwrap()).is_err());
        assert!(ula_rho_factors(65, D, &UserPose::new(25.0, 0.0, 0.0).unwrap()).is_err());
    }

    #[test]
    fn constant_span_circle_geometry() {
        let (c, r) = ula_constant_span_circle(64, D, 0.0, FRAC_PI_2).unwrap();
        assert_relative_eq!(c[0], 0.0, epsilon = 1e-12);
        assert_relative_eq!(r, 2.0096, epsilon = 1e-12);
        let (c, r) = ula_constant_span_circle(64, D, 0.4, FRAC_PI_3).unwrap();
        assert_relative_eq!(c[0].hypot(c[1]), 2.0096 / FRAC_PI_3.tan(), max_relative = 1e-12);
        assert_relative_eq!(r, 2.0096 / FRAC_PI_3.sin(), max_relative = 1e-12);
        // circle passes through both array ends
        for end in [2.0096, -2.0096] {
            let dist = (c[0] * c[0] + c[1] * c[1] + (end - c[2]) * (end - c[2])).sqrt();
            assert_relative_eq!(dist, r, max_relative = 1e-12);
        }
    }

    #[test]
    fn arc_has_constant_span() {
        let span = FRAC_PI_3;
        let mut samples = Vec::new();
        for k in 0..41 {
            let t = -0.95 * (PI - span) + 1.9 * (PI - span) * k as f64 / 40.0;
            let pose = constant_span_arc_pose(64, D, 0.0, span, t).unwrap();
            let ang = ula_angles(64, D, &pose).unwrap();
            assert_relative_eq!(ang.delta_span, span, max_relative = 1e-9);
            let c = (ang.delta_diff / 2.0).cos();
            assert!(c <= 1.0 + 1e-15);
            samples.push((pose.theta(), c));
        }
        // below normal incidence, cos(delta_diff/2) grows with theta
        samples.retain(|&(theta, _)| theta <= FRAC_PI_2);
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        for w in samples.windows(2) {
            assert!(w[1].1 >= w[0].1 - 1e-15, "{w:?}");
        }
        // apex of the arc is normal incidence with delta_diff = 0
        let apex = constant_span_arc_pose(64, D, 0.0, span, 0.0).unwrap();
        assert_relative_eq!(apex.theta(), FRAC_PI_2, epsilon = 1e-12);
        let ang = ula_angles(64, D, &apex).unwrap();
        assert_relative_eq!((ang.delta_diff / 2.0).cos(), 1.0, epsilon = 1e-12);
    }
}
