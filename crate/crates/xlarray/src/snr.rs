//! Received SNR under optimal maximum-ratio combining: brute-force
//! summation over elements, the closed form, angular-span forms, asymptotic
//! limits and far-field reference models.

use std::f64::consts::PI;

use crate::channel::{ChannelModel, LinkBudget};
use crate::exec;
use crate::geometry::{distance_factor, ArrayGeometry, UserPose};
use crate::{Error, Result};

/// How an SNR value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SnrMethod {
    BruteForce,
    ClosedForm,
    AngularForm,
    FarField,
    Asymptotic,
    UpwReference,
    NuswReference,
}

/// A linear SNR value with provenance and a validity flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SnrResult {
    pub gamma: f64,
    pub method: SnrMethod,
    /// Set when the operation was evaluated outside its stated validity
    /// range (`r < 10 d` for the closed form, `r Psi < 10 max(L_y, L_z)`
    /// for the far-field approximation).
    pub range_warning: bool,
}

impl SnrResult {
    pub(crate) fn new(gamma: f64, method: SnrMethod) -> Self {
        Self {
            gamma,
            method,
            range_warning: false,
        }
    }

    fn with_warning(mut self, warn: bool) -> Self {
        self.range_warning = warn;
        self
    }

    /// `10 log10(gamma)`; negative infinity for `gamma = 0`.
    pub fn gamma_db(&self) -> f64 {
        if self.gamma == 0.0 {
            f64::NEG_INFINITY
        } else {
            10.0 * self.gamma.log10()
        }
    }
}

/// Horizontal (`eta`) and vertical (`beta`) angular spans of the
/// pentahedron formed by the user and half of the array, with the sign
/// selectors of the alternative SNR form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngularSpans {
    pub eta_1: f64,
    pub eta_2: f64,
    pub beta_1: f64,
    pub beta_2: f64,
    pub sign_i: u8,
    pub sign_j: u8,
}

/// Brute-force SNR `gamma = p_bar * ||a||^2`, summing per-element powers
/// directly in row-major order.
pub fn snr_bruteforce(
    model: ChannelModel,
    geom: &ArrayGeometry,
    pose: &UserPose,
    budget: &LinkBudget,
) -> SnrResult {
    let dir = pose.direction();
    let eps = pose.epsilon(geom);
    let r = pose.r();
    let m = geom.element_count();
    let gamma = match model {
        ChannelModel::Proposed => {
            if dir.psi <= 0.0 {
                0.0
            } else {
                let scale =
                    budget.p_bar() * geom.effective_aperture() * dir.psi / (4.0 * PI * r * r);
                scale
                    * exec::sum_terms(m, |n| {
                        let idx = geom.index_from_flat(n);
                        distance_factor(eps, &dir, idx.i_y, idx.i_z).powi(-3)
                    })
            }
        }
        ChannelModel::Upw | ChannelModel::Usw => {
            budget.p_bar() * m as f64 * budget.beta_0() / (r * r)
        }
        ChannelModel::Nusw => {
            let scale = budget.p_bar() * budget.beta_0() / (r * r);
            scale
                * exec::sum_terms(m, |n| {
                    let idx = geom.index_from_flat(n);
                    let f = distance_factor(eps, &dir, idx.i_y, idx.i_z);
                    1.0 / (f * f)
                })
        }
    };
    SnrResult::new(gamma, SnrMethod::BruteForce)
}

/// Sequential variant of [`snr_bruteforce`] for the projected-aperture
/// model; bit-identical to the parallel path, used by benchmarks.
pub fn snr_bruteforce_sequential(
    geom: &ArrayGeometry,
    pose: &UserPose,
    budget: &LinkBudget,
) -> f64 {
    let dir = pose.direction();
    if dir.psi <= 0.0 {
        return 0.0;
    }
    let eps = pose.epsilon(geom);
    let r = pose.r();
    let scale = budget.p_bar() * geom.effective_aperture() * dir.psi / (4.0 * PI * r * r);
    scale
        * exec::sum_terms_sequential(geom.element_count(), |n| {
            let idx = geom.index_from_flat(n);
            distance_factor(eps, &dir, idx.i_y, idx.i_z).powi(-3)
        })
}

/// The arctangent kernel of the closed form:
/// `U(x, y) = arctan(x y / (Psi sqrt(Psi^2 + x^2 + y^2)))`.
pub fn u_kernel(x: f64, y: f64, psi: f64) -> f64 {
    (x * y / (psi * (psi * psi + x * x + y * y).sqrt())).atan()
}

/// Closed-form SNR of the projected-aperture model:
/// `(xi p_bar / 4 pi)` times the four-corner sum of [`u_kernel`] terms.
///
/// Returns `gamma = 0` for poses in the array plane. Flags a range warning
/// when `r < 10 d`.
pub fn snr_closed_form(geom: &ArrayGeometry, pose: &UserPose, budget: &LinkBudget) -> SnrResult {
    let dir = pose.direction();
    let warn = pose.r() < 10.0 * geom.spacing();
    if dir.psi <= 0.0 {
        return SnrResult::new(0.0, SnrMethod::ClosedForm).with_warning(warn);
    }
    let hy = geom.len_y() / (2.0 * pose.r());
    let hz = geom.len_z() / (2.0 * pose.r());
    let sum = u_kernel(hy - dir.phi, hz - dir.omega, dir.psi)
        + u_kernel(hy + dir.phi, hz - dir.omega, dir.psi)
        + u_kernel(hy - dir.phi, hz + dir.omega, dir.psi)
        + u_kernel(hy + dir.phi, hz + dir.omega, dir.psi);
    let gamma = geom.occupation_ratio() * budget.p_bar() / (4.0 * PI) * sum;
    SnrResult::new(gamma, SnrMethod::ClosedForm).with_warning(warn)
}

fn angular_form(
    half_par: f64,   // half array length along the in-plane user component
    half_perp: f64,  // half array length along the orthogonal axis
    proj: f64,       // signed in-plane projection of the user (r sin(phi) or r cos(theta))
    x_perp: f64,     // perpendicular distance r * Psi
    xi: f64,
    p_bar: f64,
) -> (SnrResult, AngularSpans) {
    let t1 = half_par - proj;
    let t2 = half_par + proj;
    let eta_1 = (t1.abs() / x_perp).atan();
    let eta_2 = (t2.abs() / x_perp).atan();
    let beta_1 = (half_perp / (x_perp * x_perp + t1 * t1 + half_perp * half_perp).sqrt()).asin();
    let beta_2 = (half_perp / (x_perp * x_perp + t2 * t2 + half_perp * half_perp).sqrt()).asin();
    // boundary ties fall in the middle case
    let (sign_i, sign_j) = if proj > half_par {
        (1, 0)
    } else if proj < -half_par {
        (0, 1)
    } else {
        (0, 0)
    };
    let term = |eta: f64, beta: f64, sign: u8| {
        let v = (eta.tan() * beta.sin()).atan();
        if sign == 1 {
            -v
        } else {
            v
        }
    };
    let gamma = xi * p_bar / (2.0 * PI) * (term(eta_1, beta_1, sign_i) + term(eta_2, beta_2, sign_j));
    (
        SnrResult::new(gamma, SnrMethod::AngularForm),
        AngularSpans {
            eta_1,
            eta_2,
            beta_1,
            beta_2,
            sign_i,
            sign_j,
        },
    )
}

/// Angular-span form of the SNR for a user in the array's horizontal plane
/// (`theta = pi/2` exactly).
pub fn snr_angular_theta_pi2(
    geom: &ArrayGeometry,
    pose: &UserPose,
    budget: &LinkBudget,
) -> Result<(SnrResult, AngularSpans)> {
    if pose.theta() != std::f64::consts::FRAC_PI_2 {
        return Err(Error::UnsupportedPose {
            requirement: "theta = pi/2",
        });
    }
    let r = pose.r();
    Ok(angular_form(
        geom.len_y() / 2.0,
        geom.len_z() / 2.0,
        r * pose.phi().sin(),
        r * pose.phi().cos(),
        geom.occupation_ratio(),
        budget.p_bar(),
    ))
}

/// Angular-span form of the SNR for a user in the vertical plane
/// (`phi = 0` exactly).
pub fn snr_angular_phi0(
    geom: &ArrayGeometry,
    pose: &UserPose,
    budget: &LinkBudget,
) -> Result<(SnrResult, AngularSpans)> {
    if pose.phi() != 0.0 {
        return Err(Error::UnsupportedPose {
            requirement: "phi = 0",
        });
    }
    let r = pose.r();
    Ok(angular_form(
        geom.len_z() / 2.0,
        geom.len_y() / 2.0,
        r * pose.theta().cos(),
        r * pose.theta().sin(),
        geom.occupation_ratio(),
        budget.p_bar(),
    ))
}

/// Boresight SNR,
/// `(xi p_bar / pi) arctan((L_y/2)(L_z/2) / (r sqrt(r^2 + (L_y/2)^2 + (L_z/2)^2)))`.
pub fn snr_boresight(geom: &ArrayGeometry, r: f64, budget: &LinkBudget) -> SnrResult {
    let hy = geom.len_y() / 2.0;
    let hz = geom.len_z() / 2.0;
    let gamma = geom.occupation_ratio() * budget.p_bar() / PI
        * (hy * hz / (r * (r * r + hy * hy + hz * hz).sqrt())).atan();
    SnrResult::new(gamma, SnrMethod::ClosedForm)
}

/// Infinite-array SNR limit `xi p_bar / 2`.
pub fn snr_asymptotic_limit(geom: &ArrayGeometry, budget: &LinkBudget) -> SnrResult {
    SnrResult::new(
        geom.occupation_ratio() * budget.p_bar() / 2.0,
        SnrMethod::Asymptotic,
    )
}

/// Far-field SNR with the projected aperture retained:
/// `p_bar M A_e sin(theta) cos(phi) / (4 pi r^2)`.
///
/// Flags a range warning unless `r Psi >= 10 max(L_y, L_z)`.
pub fn snr_far_field(geom: &ArrayGeometry, pose: &UserPose, budget: &LinkBudget) -> SnrResult {
    let psi = pose.direction().psi;
    let r = pose.r();
    let gamma = budget.p_bar() * geom.element_count() as f64 * geom.effective_aperture()
        * psi.max(0.0)
        / (4.0 * PI * r * r);
    let warn = r * psi < 10.0 * geom.len_y().max(geom.len_z());
    SnrResult::new(gamma, SnrMethod::FarField).with_warning(warn)
}

/// Size of the cross term neglected by the far-field reduction (largest of
/// the four sign combinations). The reduction assumes this is much smaller
/// than one; no hard cutoff is applied.
pub fn far_field_validity_metric(geom: &ArrayGeometry, pose: &UserPose) -> f64 {
    let dir = pose.direction();
    if dir.psi <= 0.0 {
        return f64::INFINITY;
    }
    let a = geom.len_y() / (2.0 * pose.r() * dir.psi);
    let b = geom.len_z() / (2.0 * pose.r() * dir.psi);
    let u = dir.phi / dir.psi;
    let v = dir.omega / dir.psi;
    let mut worst: f64 = 0.0;
    for sy in [-1.0, 1.0] {
        for sz in [-1.0, 1.0] {
            let x = a + sy * u;
            let y = b + sz * v;
            worst = worst.max((u * v).abs() / (1.0 + x * x + y * y).sqrt());
        }
    }
    worst
}

/// Conventional far-field UPW reference `p_bar M beta_0 / r^2`.
pub fn snr_upw_reference(m: usize, r: f64, budget: &LinkBudget) -> SnrResult {
    SnrResult::new(
        budget.p_bar() * m as f64 * budget.beta_0() / (r * r),
        SnrMethod::UpwReference,
    )
}

/// NUSW reference SNR, the double sum of per-element `beta_0 / dist^2`.
pub fn snr_nusw_reference(
    geom: &ArrayGeometry,
    pose: &UserPose,
    budget: &LinkBudget,
) -> SnrResult {
    let gamma = snr_bruteforce(ChannelModel::Nusw, geom, pose, budget).gamma;
    SnrResult::new(gamma, SnrMethod::NuswReference)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::array_response;
    use approx::assert_relative_eq;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6};

    const LAMBDA: f64 = 0.0628;

    fn geom(my: usize, mz: usize) -> ArrayGeometry {
        ArrayGeometry::isotropic_half_wavelength(my, mz, LAMBDA).unwrap()
    }

    fn budget() -> LinkBudget {
        LinkBudget::isotropic_db(90.0, LAMBDA).unwrap()
    }

    #[test]
    fn single_element_boresight() {
        let g = geom(1, 1);
        let p = UserPose::boresight(25.0).unwrap();
        let got = snr_bruteforce(ChannelModel::Proposed, &g, &p, &budget());
        let a = LAMBDA * LAMBDA / (4.0 * PI);
        assert_relative_eq!(got.gamma, 1e9 * a / (4.0 * PI * 625.0), max_relative = 1e-12);
        assert_relative_eq!(got.gamma, 39.96, max_relative = 1e-3);
    }

    #[test]
    fn in_plane_pose_gives_zero() {
        let g = geom(11, 11);
        let p = UserPose::new(25.0, 0.0, 0.0).unwrap();
        assert_eq!(snr_bruteforce(ChannelModel::Proposed, &g, &p, &budget()).gamma, 0.0);
        let r = snr_closed_form(&g, &p, &budget());
        assert_eq!(r.gamma, 0.0);
        assert_eq!(r.gamma_db(), f64::NEG_INFINITY);
    }

    #[test]
    fn upw_and_usw_identical() {
        let g = geom(51, 71);
        let p = UserPose::new(25.0, 1.1, 0.4).unwrap();
        let b = budget();
        let upw = snr_bruteforce(ChannelModel::Upw, &g, &p, &b);
        let usw = snr_bruteforce(ChannelModel::Usw, &g, &p, &b);
        assert_eq!(upw.gamma, usw.gamma);
        assert_relative_eq!(upw.gamma, snr_upw_reference(g.element_count(), 25.0, &b).gamma);
    }

    #[test]
    fn bruteforce_matches_response_norm() {
        let g = geom(31, 41);
        let p = UserPose::new(25.0, 1.2, -0.3).unwrap();
        let b = budget();
        for model in ChannelModel::ALL {
            let direct = snr_bruteforce(model, &g, &p, &b).gamma;
            let via_norm = b.p_bar() * array_response(model, &g, &p, &b).norm_sq();
            assert_relative_eq!(direct, via_norm, max_relative = 1e-12);
        }
    }

    #[test]
    fn closed_form_matches_bruteforce() {
        let g = geom(101, 101);
        let p = UserPose::new(25.0, FRAC_PI_2, FRAC_PI_4).unwrap();
        let b = budget();
        let brute = snr_bruteforce(ChannelModel::Proposed, &g, &p, &b).gamma;
        let closed = snr_closed_form(&g, &p, &b);
        assert!(!closed.range_warning);
        assert_relative_eq!(closed.gamma, brute, max_relative = 1e-3);
    }

    #[test]
    fn closed_form_warns_below_ten_spacings() {
        let g = geom(3, 3);
        let p = UserPose::boresight(0.3).unwrap();
        assert!(snr_closed_form(&g, &p, &budget()).range_warning);
    }

    #[test]
    fn boresight_u_terms_equal() {
        let g = geom(101, 101);
        let p = UserPose::boresight(25.0).unwrap();
        let dir = p.direction();
        let hy = g.len_y() / 50.0;
        let hz = g.len_z() / 50.0;
        let u = u_kernel(hy - dir.phi, hz - dir.omega, dir.psi);
        for (sy, sz) in [(1.0, -1.0), (-1.0, 1.0), (1.0, 1.0)] {
            assert_relative_eq!(
                u_kernel(hy + sy * dir.phi, hz + sz * dir.omega, dir.psi),
                u,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn closed_form_approaches_half_occupation_limit() {
        // effectively infinite plate: only L_y, L_z enter the closed form
        let g = ArrayGeometry::isotropic_half_wavelength(16_000_000, 16_000_000, LAMBDA).unwrap();
        let b = budget();
        let p = UserPose::boresight(25.0).unwrap();
        let limit = snr_asymptotic_limit(&g, &b).gamma;
        assert_relative_eq!(snr_closed_form(&g, &p, &b).gamma, limit, max_relative = 1e-4);
    }

    #[test]
    fn u_kernel_properties() {
        assert_eq!(u_kernel(0.0, 3.0, 0.5), 0.0);
        assert_eq!(u_kernel(1.2, 0.7, 0.5), u_kernel(0.7, 1.2, 0.5));
        assert_relative_eq!(u_kernel(1e9, 1e9, 1.0), FRAC_PI_2, epsilon = 1e-6);
        // odd in each argument
        assert_eq!(u_kernel(-1.2, 0.7, 0.5), -u_kernel(1.2, 0.7, 0.5));
        assert_eq!(u_kernel(1.2, -0.7, 0.5), -u_kernel(1.2, 0.7, 0.5));
    }

    #[test]
    fn angular_theta_pi2_sign_cases() {
        let g = geom(101, 101);
        let b = budget();
        // middle, third and first case of the sign table
        for (r, phi, expect) in [
            (25.0, 0.05, (0u8, 0u8)),
            (25.0, 1.2, (1, 0)),
            (25.0, -1.2, (0, 1)),
        ] {
            let p = UserPose::new(r, FRAC_PI_2, phi).unwrap();
            let (snr, spans) = snr_angular_theta_pi2(&g, &p, &b).unwrap();
            assert_eq!((spans.sign_i, spans.sign_j), expect, "phi={phi}");
            let closed = snr_closed_form(&g, &p, &b).gamma;
            assert_relative_eq!(snr.gamma, closed, max_relative = 1e-9);
        }
    }

    #[test]
    fn angular_theta_pi2_rejects_other_theta() {
        let g = geom(11, 11);
        let p = UserPose::new(25.0, 1.0, 0.0).unwrap();
        assert!(snr_angular_theta_pi2(&g, &p, &budget()).is_err());
    }

    #[test]
    fn angular_phi0_cases_and_identity() {
        let g = geom(201, 201);
        let b = budget();
        for (theta, expect) in [
            (FRAC_PI_2 - 0.02, (0u8, 0u8)),
            (0.2, (1, 0)),
            (std::f64::consts::PI - 0.2, (0, 1)),
        ] {
            let p = UserPose::new(25.0, theta, 0.0).unwrap();
            let (snr, spans) = snr_angular_phi0(&g, &p, &b).unwrap();
            assert_eq!((spans.sign_i, spans.sign_j), expect, "theta={theta}");
            assert_relative_eq!(snr.gamma, snr_closed_form(&g, &p, &b).gamma, max_relative = 1e-9);
        }
        let p = UserPose::new(25.0, FRAC_PI_3, 0.0).unwrap();
        let (snr, _) = snr_angular_phi0(&g, &p, &b).unwrap();
        assert_relative_eq!(snr.gamma, snr_closed_form(&g, &p, &b).gamma, max_relative = 1e-9);
        assert!(snr_angular_phi0(&g, &UserPose::new(25.0, 1.0, 0.1).unwrap(), &b).is_err());
    }

    #[test]
    fn boresight_phi0_intersection() {
        let g = geom(101, 101);
        let b = budget();
        let p = UserPose::boresight(25.0).unwrap();
        let (a1, _) = snr_angular_theta_pi2(&g, &p, &b).unwrap();
        let (a2, _) = snr_angular_phi0(&g, &p, &b).unwrap();
        let bs = snr_boresight(&g, 25.0, &b).gamma;
        assert_relative_eq!(a1.gamma, bs, max_relative = 1e-12);
        assert_relative_eq!(a2.gamma, bs, max_relative = 1e-12);
    }

    #[test]
    fn boresight_equals_closed_form() {
        let g = geom(101, 151);
        let b = budget();
        let p = UserPose::boresight(25.0).unwrap();
        assert_relative_eq!(
            snr_boresight(&g, 25.0, &b).gamma,
            snr_closed_form(&g, &p, &b).gamma,
            max_relative = 1e-12
        );
    }

    #[test]
    fn boresight_continuous_surface_form() {
        // xi = 1 reduces to the continuous-surface expression
        let d = 0.01;
        let g = ArrayGeometry::new(500, 500, d, d * d).unwrap();
        let b = budget();
        let r = 10.0;
        let hy = g.len_y() / 2.0;
        let hz = g.len_z() / 2.0;
        let expect =
            b.p_bar() / PI * (hy * hz / (r * (r * r + hy * hy + hz * hz).sqrt())).atan();
        assert_relative_eq!(snr_boresight(&g, r, &b).gamma, expect, max_relative = 1e-14);
    }

    #[test]
    fn asymptotic_limit_values() {
        let b = budget();
        let d = 0.01;
        let surface = ArrayGeometry::new(10, 10, d, d * d).unwrap();
        assert_relative_eq!(snr_asymptotic_limit(&surface, &b).gamma, 0.5e9);
        let iso = geom(10, 10);
        assert_relative_eq!(snr_asymptotic_limit(&iso, &b).gamma, 1e9 / (2.0 * PI));
        assert_relative_eq!(snr_asymptotic_limit(&iso, &b).gamma, 1.5915e8, max_relative = 1e-4);
    }

    #[test]
    fn far_field_vs_upw_reference() {
        let g = geom(101, 101);
        let b = budget();
        let p = UserPose::new(1e4, FRAC_PI_6, FRAC_PI_3).unwrap();
        let ff = snr_far_field(&g, &p, &b);
        assert!(!ff.range_warning);
        let upw = snr_upw_reference(g.element_count(), 1e4, &b);
        let psi = p.direction().psi;
        assert_relative_eq!(ff.gamma, upw.gamma * psi, max_relative = 1e-12);
        assert!(upw.gamma >= ff.gamma);
        // boresight: equal
        let pb = UserPose::boresight(1e4).unwrap();
        assert_relative_eq!(
            snr_far_field(&g, &pb, &b).gamma,
            snr_upw_reference(g.element_count(), 1e4, &b).gamma,
            max_relative = 1e-12
        );
    }

    #[test]
    fn closed_form_converges_to_far_field() {
        let g = ArrayGeometry::isotropic_half_wavelength(100, 100, LAMBDA).unwrap();
        let b = budget();
        let p = UserPose::new(1e4, FRAC_PI_6, FRAC_PI_3).unwrap();
        let ratio = snr_closed_form(&g, &p, &b).gamma / snr_far_field(&g, &p, &b).gamma;
        assert!((0.999..=1.001).contains(&ratio), "ratio {ratio}");
    }

    #[test]
    fn upw_reference_values() {
        let b = budget();
        let got = snr_upw_reference(1, 1.0, &b).gamma;
        assert_relative_eq!(got, 1e9 * (LAMBDA / (4.0 * PI)).powi(2), max_relative = 1e-12);
        assert_relative_eq!(got, 2.498e4, max_relative = 1e-3);
        assert_relative_eq!(
            snr_upw_reference(2000, 7.0, &b).gamma,
            2.0 * snr_upw_reference(1000, 7.0, &b).gamma,
            max_relative = 1e-14
        );
    }

    #[test]
    fn nusw_reference_values() {
        let b = budget();
        let g1 = geom(1, 1);
        let p = UserPose::boresight(25.0).unwrap();
        assert_relative_eq!(
            snr_nusw_reference(&g1, &p, &b).gamma,
            1e9 * b.beta_0() / 625.0,
            max_relative = 1e-12
        );
        let g = geom(73, 55);
        let pp = UserPose::new(25.0, 1.2, 0.3).unwrap();
        assert_eq!(
            snr_nusw_reference(&g, &pp, &b).gamma,
            snr_bruteforce(ChannelModel::Nusw, &g, &pp, &b).gamma
        );
    }

    #[test]
    fn nusw_violates_physical_bound_for_large_arrays() {
        // 0.0628 m spacing: the NUSW log-growth crosses the saturation
        // level around M = 2000 per axis at r = 25 m
        let lambda = 2.0 * 0.0628;
        let g = ArrayGeometry::isotropic_half_wavelength(2000, 2000, lambda).unwrap();
        let b = LinkBudget::isotropic_db(90.0, lambda).unwrap();
        let p = UserPose::boresight(25.0).unwrap();
        let nusw = snr_nusw_reference(&g, &p, &b).gamma;
        let bound = snr_asymptotic_limit(&g, &b).gamma;
        assert!(nusw > bound, "nusw {nusw} should exceed {bound}");
    }

    #[test]
    fn closed_form_nondecreasing_in_counts() {
        let b = budget();
        let p = UserPose::new(25.0, 1.2, 0.4).unwrap();
        let mut last = 0.0;
        for m in [11usize, 51, 101, 401, 1601] {
            let g = geom(m, m);
            let gamma = snr_closed_form(&g, &p, &b).gamma;
            assert!(gamma >= last);
            last = gamma;
        }
    }

    #[test]
    fn mrc_is_optimal_over_random_combiners() {
        use rand::prelude::*;
        use rand_chacha::ChaCha8Rng;
        let g = geom(15, 17);
        let b = budget();
        let p = UserPose::new(10.0, 1.0, 0.5).unwrap();
        let a = array_response(ChannelModel::Proposed, &g, &p, &b);
        let best = b.p_bar() * a.norm_sq();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let mut v: Vec<num_complex::Complex64> = (0..a.len())
                .map(|_| num_complex::Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            v.iter_mut().for_each(|z| *z /= norm);
            let inner: num_complex::Complex64 = v
                .iter()
                .zip(a.entries())
                .map(|(vi, ai)| vi.conj() * ai)
                .sum();
            assert!(b.p_bar() * inner.norm_sqr() <= best * (1.0 + 1e-12));
        }
    }

    proptest::proptest! {
        #[test]
        fn physical_bound_holds(
            my in 1usize..120,
            mz in 1usize..120,
            r in 0.7f64..500.0,
            theta in 0.01f64..3.13,
            phi in -1.5f64..1.5,
        ) {
            let g = geom(my, mz);
            let b = budget();
            let p = UserPose::new(r, theta, phi).unwrap();
            let bound = g.occupation_ratio() * b.p_bar() / 2.0;
            let closed = snr_closed_form(&g, &p, &b).gamma;
            let brute = snr_bruteforce(ChannelModel::Proposed, &g, &p, &b).gamma;
            proptest::prop_assert!(closed <= bound * (1.0 + 1e-12));
            proptest::prop_assert!(brute <= bound * (1.0 + 1e-12));
        }

        #[test]
        fn angular_form_matches_closed_form(
            r in 1.0f64..1000.0,
            phi in -1.55f64..1.55,
            my in 2usize..300,
            mz in 2usize..300,
        ) {
            let g = geom(my, mz);
            let b = budget();
            let p = UserPose::new(r, FRAC_PI_2, phi).unwrap();
            let (snr, spans) = snr_angular_theta_pi2(&g, &p, &b).unwrap();
            let closed = snr_closed_form(&g, &p, &b).gamma;
            // both routes subtract near-equal arctangents at grazing
            // geometry, so allow rounding slack relative to the terms
            let scale = g.occupation_ratio() * b.p_bar() / (2.0 * PI);
            let t1 = (spans.eta_1.tan() * spans.beta_1.sin()).atan().abs();
            let t2 = (spans.eta_2.tan() * spans.beta_2.sin()).atan().abs();
            let tol = 1e-9 * closed.abs().max(1e-300) + 1e-12 * scale * (t1 + t2);
            proptest::prop_assert!((snr.gamma - closed).abs() <= tol);
        }
    }
}
