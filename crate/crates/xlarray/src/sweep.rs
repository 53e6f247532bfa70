//! Scenario resolution, parameter sweeps and figure-data generation.
//!
//! A scenario is assembled from an optional JSON file plus flag overrides,
//! with defaults matching the reference setup (`p_bar` 90 dB, carrier
//! wavelength 0.0628 m, half-wavelength spacing, `A = lambda^2 / 4 pi`,
//! boresight direction). All emitters return complete CSV documents
//! (UTF-8, comma-delimited, `.` decimal, `-inf` sentinel for zero SNR in
//! dB columns); sweep points may be evaluated in parallel but rows are
//! always emitted in ascending order of the swept value.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_6, PI};
use std::str::FromStr;

use serde::Deserialize;

use crate::channel::{ChannelModel, LinkBudget};
use crate::fieldregions::{classical_rayleigh, dd_rayleigh, upd};
use crate::geometry::{ArrayGeometry, UserPose};
use crate::snr::{
    snr_asymptotic_limit, snr_bruteforce, snr_closed_form, snr_nusw_reference, snr_upw_reference,
};
use crate::ula::{constant_span_arc_pose, ula_angles, ula_critical_point, ula_nusw_snr,
    ula_rho_factors, ula_snr};
use crate::{exec, invalid, Result};

pub const DEFAULT_LAMBDA: f64 = 0.0628;
pub const DEFAULT_PBAR_DB: f64 = 90.0;
pub const DEFAULT_GAMMA_TH: f64 = 0.9;
pub const DEFAULT_ELEMENTS: usize = 101;

/// Element-count cap for brute-force (per-element) columns in sweeps and
/// figures; closed-form columns are uncapped.
pub const BRUTE_FORCE_CAP: usize = 400_000;

/// Raw scenario, as parsed from a JSON file or collected from flags.
/// Every field is optional; [`Settings::resolve`] merges and defaults.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub my: Option<usize>,
    pub mz: Option<usize>,
    pub d: Option<f64>,
    pub a: Option<f64>,
    pub lambda: Option<f64>,
    pub r: Option<f64>,
    pub theta: Option<f64>,
    pub phi: Option<f64>,
    pub pbar_db: Option<f64>,
    pub beta0: Option<f64>,
    pub model: Option<String>,
    pub gamma_th: Option<f64>,
    pub var: Option<String>,
    pub from: Option<f64>,
    pub to: Option<f64>,
    pub points: Option<usize>,
    pub log: Option<bool>,
}

impl ScenarioFile {
    pub fn parse_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| invalid("scenario", e.to_string()))
    }

    /// Field-wise merge, `self` taking precedence.
    pub fn over(&self, base: &ScenarioFile) -> ScenarioFile {
        macro_rules! pick {
            ($f:ident) => {
                self.$f.clone().or_else(|| base.$f.clone())
            };
        }
        ScenarioFile {
            my: pick!(my),
            mz: pick!(mz),
            d: pick!(d),
            a: pick!(a),
            lambda: pick!(lambda),
            r: pick!(r),
            theta: pick!(theta),
            phi: pick!(phi),
            pbar_db: pick!(pbar_db),
            beta0: pick!(beta0),
            model: pick!(model),
            gamma_th: pick!(gamma_th),
            var: pick!(var),
            from: pick!(from),
            to: pick!(to),
            points: pick!(points),
            log: pick!(log),
        }
    }
}

/// Fully resolved scenario parameters.
#[derive(Debug, Clone)]
pub struct Settings {
    pub my: usize,
    pub mz: usize,
    pub d: f64,
    pub a: f64,
    pub lambda: f64,
    pub r: Option<f64>,
    pub theta: f64,
    pub phi: f64,
    pub p_bar: f64,
    pub beta_0: f64,
    pub model: ChannelModel,
    pub gamma_th: f64,
}

impl Settings {
    /// Apply defaults to a merged scenario. Derived defaults (`d`, `a`,
    /// `beta0`) follow the resolved wavelength.
    pub fn resolve(s: &ScenarioFile) -> Result<Settings> {
        let lambda = s.lambda.unwrap_or(DEFAULT_LAMBDA);
        if !(lambda > 0.0) {
            return Err(invalid("lambda", format!("wavelength must be positive, got {lambda}")));
        }
        let model = match &s.model {
            Some(name) => ChannelModel::from_str(name)?,
            None => ChannelModel::Proposed,
        };
        Ok(Settings {
            my: s.my.unwrap_or(DEFAULT_ELEMENTS),
            mz: s.mz.unwrap_or(DEFAULT_ELEMENTS),
            d: s.d.unwrap_or(lambda / 2.0),
            a: s.a.unwrap_or(lambda * lambda / (4.0 * PI)),
            lambda,
            r: s.r,
            theta: s.theta.unwrap_or(FRAC_PI_2),
            phi: s.phi.unwrap_or(0.0),
            p_bar: 10f64.powf(s.pbar_db.unwrap_or(DEFAULT_PBAR_DB) / 10.0),
            beta_0: s.beta0.unwrap_or((lambda / (4.0 * PI)).powi(2)),
            model,
            gamma_th: s.gamma_th.unwrap_or(DEFAULT_GAMMA_TH),
        })
    }

    pub fn geometry(&self) -> Result<ArrayGeometry> {
        ArrayGeometry::new(self.my, self.mz, self.d, self.a)
    }

    pub fn budget(&self) -> Result<LinkBudget> {
        LinkBudget::new(self.p_bar, self.lambda, self.beta_0)
    }

    pub fn require_r(&self) -> Result<f64> {
        self.r.ok_or_else(|| invalid("r", "link distance is required (pass --r or set it in the scenario file)"))
    }

    pub fn pose(&self) -> Result<UserPose> {
        UserPose::new(self.require_r()?, self.theta, self.phi)
    }
}

/// Format a linear value for CSV (shortest round-trip representation).
pub fn fmt(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x}")
    }
}

/// Format a linear SNR as dB; zero maps to the `-inf` sentinel.
pub fn fmt_db(gamma: f64) -> String {
    if gamma == 0.0 {
        "-inf".into()
    } else if gamma.is_nan() {
        "nan".into()
    } else {
        format!("{}", 10.0 * gamma.log10())
    }
}

fn csv(header: &[&str], rows: Vec<Vec<String>>) -> String {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Which parameter a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepVar {
    /// Elements per axis of a square UPA (value rounded to an integer).
    M,
    R,
    Theta,
    Phi,
}

impl SweepVar {
    fn column(&self) -> &'static str {
        match self {
            SweepVar::M => "m",
            SweepVar::R => "r_m",
            SweepVar::Theta => "theta_rad",
            SweepVar::Phi => "phi_rad",
        }
    }
}

impl FromStr for SweepVar {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "m" => Ok(SweepVar::M),
            "r" => Ok(SweepVar::R),
            "theta" => Ok(SweepVar::Theta),
            "phi" => Ok(SweepVar::Phi),
            other => Err(invalid(
                "var",
                format!("unknown sweep variable `{other}` (expected m, r, theta or phi)"),
            )),
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SweepSpec {
    pub var: SweepVar,
    pub from: f64,
    pub to: f64,
    pub points: usize,
    pub log: bool,
}

impl SweepSpec {
    pub fn from_scenario(s: &ScenarioFile) -> Result<SweepSpec> {
        let var = SweepVar::from_str(
            s.var.as_deref().ok_or_else(|| invalid("var", "sweep variable is required"))?,
        )?;
        let spec = SweepSpec {
            var,
            from: s.from.ok_or_else(|| invalid("from", "sweep start is required"))?,
            to: s.to.ok_or_else(|| invalid("to", "sweep end is required"))?,
            points: s.points.ok_or_else(|| invalid("points", "sweep point count is required"))?,
            log: s.log.unwrap_or(false),
        };
        spec.grid()?;
        Ok(spec)
    }

    /// Ascending sample grid, `points` values inclusive of both ends.
    pub fn grid(&self) -> Result<Vec<f64>> {
        if self.points < 2 {
            return Err(invalid("points", format!("a sweep needs at least 2 points, got {}", self.points)));
        }
        if !(self.to > self.from) {
            return Err(invalid("to", format!("sweep end {} must exceed start {}", self.to, self.from)));
        }
        if self.log && !(self.from > 0.0) {
            return Err(invalid("from", "log spacing requires a positive start"));
        }
        let n = self.points;
        Ok((0..n)
            .map(|k| {
                let t = k as f64 / (n - 1) as f64;
                if self.log {
                    self.from * (self.to / self.from).powf(t)
                } else {
                    self.from + (self.to - self.from) * t
                }
            })
            .collect())
    }
}

/// Closed-form (or reference) SNR for the scenario's model.
fn model_snr(
    model: ChannelModel,
    geom: &ArrayGeometry,
    pose: &UserPose,
    budget: &LinkBudget,
) -> f64 {
    match model {
        ChannelModel::Proposed => snr_closed_form(geom, pose, budget).gamma,
        ChannelModel::Upw | ChannelModel::Usw => {
            snr_upw_reference(geom.element_count(), pose.r(), budget).gamma
        }
        ChannelModel::Nusw => snr_nusw_reference(geom, pose, budget).gamma,
    }
}

/// Single-point SNR: closed-form and brute-force values for one model.
pub fn snr_csv(settings: &Settings) -> Result<String> {
    let geom = settings.geometry()?;
    let budget = settings.budget()?;
    let pose = settings.pose()?;
    let closed = model_snr(settings.model, &geom, &pose, &budget);
    let brute = snr_bruteforce(settings.model, &geom, &pose, &budget).gamma;
    Ok(csv(
        &[
            "model", "m", "r_m", "theta_rad", "phi_rad",
            "gamma_closed", "gamma_closed_db", "gamma_brute", "gamma_brute_db",
        ],
        vec![vec![
            settings.model.name().into(),
            geom.element_count().to_string(),
            fmt(pose.r()),
            fmt(pose.theta()),
            fmt(pose.phi()),
            fmt(closed),
            fmt_db(closed),
            fmt(brute),
            fmt_db(brute),
        ]],
    ))
}

/// Parameter sweep for the scenario's model: closed-form column plus a
/// brute-force column (blank above [`BRUTE_FORCE_CAP`] elements).
pub fn sweep_csv(settings: &Settings, spec: &SweepSpec) -> Result<String> {
    let grid = spec.grid()?;
    let budget = settings.budget()?;
    // validate the fixed parameters once up front
    if spec.var != SweepVar::M {
        settings.geometry()?;
    }
    if spec.var != SweepVar::R {
        settings.require_r()?;
    }
    let point = |value: f64| -> Result<Vec<String>> {
        let (geom, pose) = match spec.var {
            SweepVar::M => {
                let n = (value.round().max(1.0)) as usize;
                (
                    ArrayGeometry::new(n, n, settings.d, settings.a)?,
                    UserPose::new(settings.require_r()?, settings.theta, settings.phi)?,
                )
            }
            SweepVar::R => (
                settings.geometry()?,
                UserPose::new(value, settings.theta, settings.phi)?,
            ),
            SweepVar::Theta => (
                settings.geometry()?,
                UserPose::new(settings.require_r()?, value, settings.phi)?,
            ),
            SweepVar::Phi => (
                settings.geometry()?,
                UserPose::new(settings.require_r()?, settings.theta, value)?,
            ),
        };
        let closed = model_snr(settings.model, &geom, &pose, &budget);
        let (brute, brute_db) = if geom.element_count() <= BRUTE_FORCE_CAP {
            let g = snr_bruteforce(settings.model, &geom, &pose, &budget).gamma;
            (fmt(g), fmt_db(g))
        } else {
            (String::new(), String::new())
        };
        let swept = match spec.var {
            SweepVar::M => geom.element_count().to_string(),
            _ => fmt(value),
        };
        Ok(vec![swept, fmt(closed), fmt_db(closed), brute, brute_db])
    };
    let rows = exec::map_indexed(grid.len(), |i| point(grid[i]));
    let rows: Vec<Vec<String>> = rows.into_iter().collect::<Result<_>>()?;
    Ok(csv(
        &[spec.var.column(), "gamma_closed", "gamma_closed_db", "gamma_brute", "gamma_brute_db"],
        rows,
    ))
}

/// Single-point field-region boundaries. Solver failures render as `nan`
/// columns rather than aborting the row.
pub fn field_distances_csv(settings: &Settings) -> Result<String> {
    let geom = settings.geometry()?;
    let dist = |model| -> String {
        match upd(model, &geom, settings.theta, settings.phi, settings.gamma_th) {
            Ok(res) => fmt(res.distance),
            Err(_) => "nan".into(),
        }
    };
    let dd = match dd_rayleigh(&geom, settings.theta, settings.phi, settings.lambda) {
        Ok(res) => fmt(res.distance),
        Err(_) => "nan".into(),
    };
    let classical = classical_rayleigh(geom.len_diag(), settings.lambda)?;
    Ok(csv(
        &[
            "theta_rad", "phi_rad", "gamma_th",
            "r_upd_proposed_m", "r_upd_nusw_m", "r_dd_rayleigh_m", "r_classical_m",
        ],
        vec![vec![
            fmt(settings.theta),
            fmt(settings.phi),
            fmt(settings.gamma_th),
            dist(ChannelModel::Proposed),
            dist(ChannelModel::Nusw),
            dd,
            fmt(classical),
        ]],
    ))
}

/// Single-point ULA summary (`M = mz`, array along the z-axis).
pub fn ula_csv(settings: &Settings) -> Result<String> {
    let m = settings.mz;
    let budget = settings.budget()?;
    let pose = settings.pose()?;
    let ang = ula_angles(m, settings.d, &pose)?;
    let prop = ula_snr(m, settings.d, settings.a, &pose, &budget)?.gamma;
    let nusw = ula_nusw_snr(m, settings.d, &pose, &budget)?.gamma;
    Ok(csv(
        &[
            "m", "r_m", "theta_rad", "phi_rad",
            "alpha1_rad", "alpha2_rad", "delta_span_rad", "delta_diff_rad",
            "gamma_proposed", "gamma_proposed_db", "gamma_nusw", "gamma_nusw_db",
        ],
        vec![vec![
            m.to_string(),
            fmt(pose.r()),
            fmt(pose.theta()),
            fmt(pose.phi()),
            fmt(ang.alpha_1),
            fmt(ang.alpha_2),
            fmt(ang.delta_span),
            fmt(ang.delta_diff),
            fmt(prop),
            fmt_db(prop),
            fmt(nusw),
            fmt_db(nusw),
        ]],
    ))
}

pub const FIGURE_NAMES: [&str; 7] = ["fig5", "fig6", "fig7a", "fig7b", "fig8", "fig9", "fig10"];

/// Reproduce the data behind one of the reference figures.
pub fn figure_csv(name: &str) -> Result<String> {
    match name {
        "fig5" => Ok(fig5()),
        "fig6" => Ok(fig6()),
        "fig7a" => Ok(fig7(FRAC_PI_6, FRAC_PI_3)),
        "fig7b" => Ok(fig7(FRAC_PI_2, FRAC_PI_4)),
        "fig8" => Ok(fig8()),
        "fig9" => Ok(fig9()),
        "fig10" => Ok(fig10()),
        other => Err(invalid(
            "figure",
            format!("unknown figure `{other}` (expected one of {})", FIGURE_NAMES.join(", ")),
        )),
    }
}

fn reference_budget() -> LinkBudget {
    LinkBudget::isotropic_db(DEFAULT_PBAR_DB, DEFAULT_LAMBDA).unwrap()
}

/// Wavelength-spaced 64-element ULA used by the boundary-distance figure.
fn fig9_ula() -> ArrayGeometry {
    ArrayGeometry::new(
        1,
        64,
        DEFAULT_LAMBDA,
        DEFAULT_LAMBDA * DEFAULT_LAMBDA / (4.0 * PI),
    )
    .unwrap()
}

/// Log-spaced distinct per-axis element counts from 1 to 10^6.
fn element_count_grid() -> Vec<usize> {
    let mut out: Vec<usize> = (0..=48)
        .map(|k| 10f64.powf(k as f64 / 8.0).round() as usize)
        .collect();
    out.dedup();
    out
}

/// SNR of the four models versus element count for a square UPA.
fn fig7(theta: f64, phi: f64) -> String {
    let budget = reference_budget();
    let counts = element_count_grid();
    let rows = exec::map_indexed(counts.len(), |i| {
        let n = counts[i];
        let geom = ArrayGeometry::isotropic_half_wavelength(n, n, DEFAULT_LAMBDA).unwrap();
        let pose = UserPose::new(25.0, theta, phi).unwrap();
        let prop = snr_closed_form(&geom, &pose, &budget).gamma;
        let upw = snr_upw_reference(geom.element_count(), pose.r(), &budget).gamma;
        let limit = snr_asymptotic_limit(&geom, &budget).gamma;
        let (nusw, nusw_db) = if geom.element_count() <= BRUTE_FORCE_CAP {
            let g = snr_nusw_reference(&geom, &pose, &budget).gamma;
            (fmt(g), fmt_db(g))
        } else {
            (String::new(), String::new())
        };
        vec![
            geom.element_count().to_string(),
            fmt(prop),
            fmt_db(prop),
            fmt(upw),
            fmt_db(upw),
            nusw,
            nusw_db,
            fmt(limit),
            fmt_db(limit),
        ]
    });
    csv(
        &[
            "m", "gamma_proposed", "gamma_proposed_db", "gamma_upw_usw", "gamma_upw_usw_db",
            "gamma_nusw", "gamma_nusw_db", "gamma_limit", "gamma_limit_db",
        ],
        rows,
    )
}

/// SNR of the four models versus zenith angle for a 400 x 400 UPA.
fn fig8() -> String {
    let budget = reference_budget();
    let geom = ArrayGeometry::isotropic_half_wavelength(400, 400, DEFAULT_LAMBDA).unwrap();
    let n = 179;
    let rows = exec::map_indexed(n, |i| {
        let theta = PI * (i + 1) as f64 / 180.0;
        let pose = UserPose::new(25.0, theta, 0.0).unwrap();
        let prop = snr_closed_form(&geom, &pose, &budget).gamma;
        let upw = snr_upw_reference(geom.element_count(), pose.r(), &budget).gamma;
        let nusw = snr_nusw_reference(&geom, &pose, &budget).gamma;
        vec![
            fmt(theta),
            fmt(prop),
            fmt_db(prop),
            fmt(upw),
            fmt_db(upw),
            fmt(nusw),
            fmt_db(nusw),
        ]
    });
    csv(
        &[
            "theta_rad", "gamma_proposed", "gamma_proposed_db",
            "gamma_upw_usw", "gamma_upw_usw_db", "gamma_nusw", "gamma_nusw_db",
        ],
        rows,
    )
}

/// Near-/far-field boundary distances versus zenith angle for the ULA.
fn fig9() -> String {
    let geom = fig9_ula();
    let classical = classical_rayleigh(geom.len_diag(), DEFAULT_LAMBDA).unwrap();
    let n = 179;
    let rows = exec::map_indexed(n, |i| {
        let theta = PI * (i + 1) as f64 / 180.0;
        let solve = |model| match upd(model, &geom, theta, 0.0, DEFAULT_GAMMA_TH) {
            Ok(res) => fmt(res.distance),
            Err(_) => "nan".into(),
        };
        let dd = match dd_rayleigh(&geom, theta, 0.0, DEFAULT_LAMBDA) {
            Ok(res) => fmt(res.distance),
            Err(_) => "nan".into(),
        };
        vec![
            fmt(theta),
            solve(ChannelModel::Proposed),
            solve(ChannelModel::Nusw),
            dd,
            fmt(classical),
        ]
    });
    csv(
        &["theta_rad", "r_upd_proposed_m", "r_upd_nusw_m", "r_dd_rayleigh_m", "r_classical_m"],
        rows,
    )
}

/// ULA SNR versus element count at normal and inclined incidence, with the
/// 95% NUSW-accuracy critical point.
fn fig10() -> String {
    let budget = reference_budget();
    let d = DEFAULT_LAMBDA;
    let a = DEFAULT_LAMBDA * DEFAULT_LAMBDA / (4.0 * PI);
    let normal = UserPose::boresight(25.0).unwrap();
    let inclined = UserPose::new(25.0, FRAC_PI_6, 0.0).unwrap();
    let m_star = ula_critical_point(d, a, &normal, &budget, 0.95)
        .map(|cp| cp.m_star.to_string())
        .unwrap_or_else(|_| "nan".into());
    let counts = element_count_grid();
    let rows = counts
        .iter()
        .map(|&m| {
            let row = |pose: &UserPose| {
                let p = ula_snr(m, d, a, pose, &budget).unwrap().gamma;
                let u = ula_nusw_snr(m, d, pose, &budget).unwrap().gamma;
                [fmt(p), fmt_db(p), fmt(u), fmt_db(u)]
            };
            let [p1, p1db, u1, u1db] = row(&normal);
            let [p2, p2db, u2, u2db] = row(&inclined);
            vec![m.to_string(), p1, p1db, u1, u1db, p2, p2db, u2, u2db, m_star.clone()]
        })
        .collect();
    csv(
        &[
            "m",
            "gamma_proposed_normal", "gamma_proposed_normal_db",
            "gamma_nusw_normal", "gamma_nusw_normal_db",
            "gamma_proposed_inclined", "gamma_proposed_inclined_db",
            "gamma_nusw_inclined", "gamma_nusw_inclined_db",
            "m_star_95",
        ],
        rows,
    )
}

/// `cos(delta_diff / 2)` versus zenith angle along the constant-span arc.
fn fig5() -> String {
    let span = FRAC_PI_3;
    let m = 64;
    let d = DEFAULT_LAMBDA;
    let n = 121;
    // descending arc parameter gives ascending zenith angle
    let rows = (0..n)
        .map(|k| {
            let t = 0.98 * (PI - span) * (1.0 - 2.0 * k as f64 / (n - 1) as f64);
            let pose = constant_span_arc_pose(m, d, 0.0, span, t).unwrap();
            let ang = ula_angles(m, d, &pose).unwrap();
            vec![
                fmt(pose.theta()),
                fmt((ang.delta_diff / 2.0).cos()),
                fmt(ang.delta_span),
            ]
        })
        .collect();
    csv(&["theta_rad", "cos_half_delta_diff", "delta_span_rad"], rows)
}

/// Normalized path loss, projected aperture and power gain of the end
/// element versus the half angular span at normal incidence.
fn fig6() -> String {
    let m = 65;
    let d = DEFAULT_LAMBDA;
    let n = 63;
    let rows = (0..n)
        .map(|k| {
            let alpha = 0.02 + (1.55 - 0.02) * k as f64 / (n - 1) as f64;
            let r = m as f64 * d / 2.0 / alpha.tan();
            let pose = UserPose::boresight(r).unwrap();
            let f = ula_rho_factors(m, d, &pose).unwrap();
            vec![fmt(alpha), fmt(f.rho_pl), fmt(f.rho_aper), fmt(f.rho)]
        })
        .collect();
    csv(&["alpha_rad", "rho_pl", "rho_aper", "rho"], rows)
}
