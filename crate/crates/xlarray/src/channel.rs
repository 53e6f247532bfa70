//! Per-element channel power gains and complex array-response vectors.
//!
//! The projected-aperture gain integrates free-space spreading times the
//! projection of the element normal onto the local propagation direction
//! over the element surface. The simplified form evaluates both factors at
//! the element center; the exact form does the surface integral with
//! tensor-product Gauss-Legendre quadrature.

use num_complex::Complex64;
use std::f64::consts::PI;

use crate::exec;
use crate::geometry::{element_distance, ArrayGeometry, ElementIndex, UserPose};
use crate::{invalid, Result};

/// Array-response model selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ChannelModel {
    /// Projected-aperture spherical-wave model: amplitude, phase and
    /// element aperture all vary across the array.
    Proposed,
    /// Uniform plane wave: common amplitude, linear phase ramp.
    Upw,
    /// Uniform spherical wave: common amplitude, exact per-element phase.
    Usw,
    /// Non-uniform spherical wave: per-element distance in amplitude and
    /// phase, but no projected-aperture factor.
    Nusw,
}

impl ChannelModel {
    pub const ALL: [ChannelModel; 4] = [
        ChannelModel::Proposed,
        ChannelModel::Upw,
        ChannelModel::Usw,
        ChannelModel::Nusw,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ChannelModel::Proposed => "proposed",
            ChannelModel::Upw => "upw",
            ChannelModel::Usw => "usw",
            ChannelModel::Nusw => "nusw",
        }
    }
}

impl std::str::FromStr for ChannelModel {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "proposed" => Ok(ChannelModel::Proposed),
            "upw" => Ok(ChannelModel::Upw),
            "usw" => Ok(ChannelModel::Usw),
            "nusw" => Ok(ChannelModel::Nusw),
            other => Err(invalid(
                "model",
                format!("unknown model `{other}` (expected proposed|upw|usw|nusw)"),
            )),
        }
    }
}

/// Transmit SNR, wavelength and reference channel gain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    p_bar: f64,
    lambda: f64,
    beta_0: f64,
}

impl LinkBudget {
    pub fn new(p_bar: f64, lambda: f64, beta_0: f64) -> Result<Self> {
        if !(p_bar > 0.0) {
            return Err(invalid("p_bar", format!("transmit SNR must be positive, got {p_bar}")));
        }
        if !(lambda > 0.0) {
            return Err(invalid("lambda", format!("wavelength must be positive, got {lambda}")));
        }
        if !(beta_0 > 0.0) {
            return Err(invalid("beta0", format!("reference gain must be positive, got {beta_0}")));
        }
        Ok(Self { p_bar, lambda, beta_0 })
    }

    /// Isotropic-element default `beta_0 = (lambda / 4 pi)^2`.
    pub fn isotropic(p_bar: f64, lambda: f64) -> Result<Self> {
        let b = lambda / (4.0 * PI);
        Self::new(p_bar, lambda, b * b)
    }

    /// Same, with the transmit SNR given in dB (`90 dB -> 1e9`).
    pub fn isotropic_db(p_bar_db: f64, lambda: f64) -> Result<Self> {
        Self::isotropic(10f64.powf(p_bar_db / 10.0), lambda)
    }

    pub fn p_bar(&self) -> f64 {
        self.p_bar
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn beta_0(&self) -> f64 {
        self.beta_0
    }
}

/// Projected-aperture channel power gain of one element (center-point
/// simplification):
/// `A_e r sin(t) cos(p) / (4 pi ||q - w||^3)`.
///
/// Returns exactly 0 when the user direction lies in the array plane.
pub fn element_gain(geom: &ArrayGeometry, pose: &UserPose, idx: ElementIndex) -> f64 {
    let psi = pose.direction().psi;
    if psi <= 0.0 {
        return 0.0;
    }
    let dist = element_distance(geom, pose, idx);
    geom.effective_aperture() * pose.r() * psi / (4.0 * PI * dist.powi(3))
}

/// Result of the exact surface-integral gain evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactGain {
    pub value: f64,
    /// Relative change when the quadrature order is doubled.
    pub rel_change: f64,
    /// False when doubling the order moved the result by more than 1e-6
    /// relative.
    pub converged: bool,
}

/// Exact per-element gain: integral of
/// `(1 / 4 pi ||q - s||^2) * ((q - s) . u_x / ||q - s||)` over the element
/// square of side `sqrt(A)`, by tensor-product Gauss-Legendre quadrature.
pub fn element_gain_exact(
    geom: &ArrayGeometry,
    pose: &UserPose,
    idx: ElementIndex,
    quad_order: usize,
) -> Result<ExactGain> {
    if quad_order < 2 {
        return Err(invalid("quad_order", format!("quadrature order must be >= 2, got {quad_order}")));
    }
    geom.validate_index(idx)?;
    let coarse = surface_integral(geom, pose, idx, quad_order);
    let fine = surface_integral(geom, pose, idx, quad_order * 2);
    let rel_change = if fine == 0.0 {
        (coarse - fine).abs()
    } else {
        ((coarse - fine) / fine).abs()
    };
    Ok(ExactGain {
        value: fine,
        rel_change,
        converged: rel_change <= 1e-6,
    })
}

fn surface_integral(geom: &ArrayGeometry, pose: &UserPose, idx: ElementIndex, order: usize) -> f64 {
    let q = pose.position();
    if q[0] <= 0.0 {
        return 0.0;
    }
    let half = geom.element_area().sqrt() / 2.0;
    let cy = idx.i_y * geom.spacing();
    let cz = idx.i_z * geom.spacing();
    let (nodes, weights) = gauss_legendre(order);
    let mut sum = 0.0;
    for (ny, wy) in nodes.iter().zip(&weights) {
        let sy = cy + half * ny;
        for (nz, wz) in nodes.iter().zip(&weights) {
            let sz = cz + half * nz;
            let dx = q[0];
            let dy = q[1] - sy;
            let dz = q[2] - sz;
            let dist2 = dx * dx + dy * dy + dz * dz;
            let dist = dist2.sqrt();
            sum += wy * wz * dx / (4.0 * PI * dist2 * dist);
        }
    }
    geom.aperture_efficiency() * sum * half * half
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre polynomial (standard Golub-Welsch-free construction).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        // Chebyshev-based initial guess
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_and_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_and_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Complex array response for all elements of a geometry, row-major
/// (`i_z` outer, `i_y` inner).
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayResponse {
    entries: Vec<Complex64>,
    model: ChannelModel,
}

impl ArrayResponse {
    pub fn model(&self) -> ChannelModel {
        self.model
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Squared Euclidean norm, deterministic chunked reduction.
    pub fn norm_sq(&self) -> f64 {
        exec::sum_terms(self.entries.len(), |i| self.entries[i].norm_sqr())
    }
}

/// Build the array response vector for the given model.
pub fn array_response(
    model: ChannelModel,
    geom: &ArrayGeometry,
    pose: &UserPose,
    budget: &LinkBudget,
) -> ArrayResponse {
    let k = 2.0 * PI / budget.lambda();
    let dir = pose.direction();
    let r = pose.r();
    let d = geom.spacing();
    let sqrt_beta = budget.beta_0().sqrt();
    let entries = exec::map_indexed(geom.element_count(), |n| {
        let idx = geom.index_from_flat(n);
        match model {
            ChannelModel::Proposed => {
                let amp = element_gain(geom, pose, idx).sqrt();
                let dist = element_distance(geom, pose, idx);
                Complex64::from_polar(amp, -k * dist)
            }
            ChannelModel::Upw => {
                let ramp = k * (idx.i_y * d * dir.phi + idx.i_z * d * dir.omega);
                Complex64::from_polar(sqrt_beta / r, -k * r + ramp)
            }
            ChannelModel::Usw => {
                let dist = element_distance(geom, pose, idx);
                Complex64::from_polar(sqrt_beta / r, -k * dist)
            }
            ChannelModel::Nusw => {
                let dist = element_distance(geom, pose, idx);
                Complex64::from_polar(sqrt_beta / dist, -k * dist)
            }
        }
    });
    ArrayResponse { entries, model }
}
