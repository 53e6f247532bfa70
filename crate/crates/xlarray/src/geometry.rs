//! Array and user geometry: element grid, user coordinates, direction
//! cosines and element-to-user distances.
//!
//! The array lies in the y-z plane, centered at the origin. Element centers
//! sit on a regular grid with spacing `d`; for odd counts the offsets are
//! integers, for even counts half-integers, so the grid is always centered.

use crate::{invalid, Error, Result};

/// Uniform planar array description.
///
/// `m_y` x `m_z` square elements of area `a` on a grid with spacing `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArrayGeometry {
    m_y: usize,
    m_z: usize,
    d: f64,
    a: f64,
    e_a: f64,
}

impl ArrayGeometry {
    /// Build a geometry with unit aperture efficiency.
    pub fn new(m_y: usize, m_z: usize, d: f64, a: f64) -> Result<Self> {
        Self::with_efficiency(m_y, m_z, d, a, 1.0)
    }

    pub fn with_efficiency(m_y: usize, m_z: usize, d: f64, a: f64, e_a: f64) -> Result<Self> {
        if m_y == 0 {
            return Err(invalid("m_y", "element count must be positive"));
        }
        if m_z == 0 {
            return Err(invalid("m_z", "element count must be positive"));
        }
        if !(d > 0.0) {
            return Err(invalid("d", format!("spacing must be positive, got {d}")));
        }
        if !(a > 0.0) {
            return Err(invalid("a", format!("element area must be positive, got {a}")));
        }
        if a.sqrt() > d * (1.0 + 1e-12) {
            return Err(invalid(
                "a",
                format!("element side sqrt(a)={} exceeds spacing d={d}", a.sqrt()),
            ));
        }
        if !(e_a > 0.0 && e_a <= 1.0) {
            return Err(invalid("e_a", format!("aperture efficiency must be in (0,1], got {e_a}")));
        }
        Ok(Self { m_y, m_z, d, a, e_a })
    }

    /// Isotropic half-wavelength reference layout: `d = lambda/2`,
    /// `a = lambda^2 / 4 pi` (occupation ratio `1/pi`).
    pub fn isotropic_half_wavelength(m_y: usize, m_z: usize, lambda: f64) -> Result<Self> {
        Self::new(m_y, m_z, lambda / 2.0, lambda * lambda / (4.0 * std::f64::consts::PI))
    }

    pub fn m_y(&self) -> usize {
        self.m_y
    }

    pub fn m_z(&self) -> usize {
        self.m_z
    }

    /// Total element count `M = m_y * m_z`.
    pub fn element_count(&self) -> usize {
        self.m_y * self.m_z
    }

    pub fn spacing(&self) -> f64 {
        self.d
    }

    pub fn element_area(&self) -> f64 {
        self.a
    }

    pub fn aperture_efficiency(&self) -> f64 {
        self.e_a
    }

    /// Effective element aperture `A_e = e_a * A`.
    pub fn effective_aperture(&self) -> f64 {
        self.e_a * self.a
    }

    /// Array occupation ratio `xi = A / d^2`, in (0, 1].
    pub fn occupation_ratio(&self) -> f64 {
        self.a / (self.d * self.d)
    }

    /// Horizontal dimension `L_y = m_y * d`.
    pub fn len_y(&self) -> f64 {
        self.m_y as f64 * self.d
    }

    /// Vertical dimension `L_z = m_z * d`.
    pub fn len_z(&self) -> f64 {
        self.m_z as f64 * self.d
    }

    /// Diagonal dimension `L_d = sqrt(L_y^2 + L_z^2)`.
    pub fn len_diag(&self) -> f64 {
        self.len_y().hypot(self.len_z())
    }

    /// Grid offset for row/column `k` in `0..m`: `k - (m-1)/2`.
    fn offset(k: usize, m: usize) -> f64 {
        k as f64 - (m as f64 - 1.0) / 2.0
    }

    /// Element index from grid coordinates `(k_y, k_z)` with
    /// `k_y in 0..m_y`, `k_z in 0..m_z`.
    pub fn index_at(&self, k_y: usize, k_z: usize) -> Result<ElementIndex> {
        if k_y >= self.m_y || k_z >= self.m_z {
            return Err(Error::IndexOutOfGrid {
                i_y: k_y as f64,
                i_z: k_z as f64,
                m_y: self.m_y,
                m_z: self.m_z,
            });
        }
        Ok(ElementIndex {
            i_y: Self::offset(k_y, self.m_y),
            i_z: Self::offset(k_z, self.m_z),
        })
    }

    /// All element indices in row-major order (`i_z` outer, `i_y` inner).
    pub fn indices(&self) -> impl Iterator<Item = ElementIndex> + '_ {
        (0..self.m_z).flat_map(move |k_z| {
            (0..self.m_y).map(move |k_y| ElementIndex {
                i_y: Self::offset(k_y, self.m_y),
                i_z: Self::offset(k_z, self.m_z),
            })
        })
    }

    /// Row-major flat index -> element index, matching [`Self::indices`].
    pub fn index_from_flat(&self, n: usize) -> ElementIndex {
        ElementIndex {
            i_y: Self::offset(n % self.m_y, self.m_y),
            i_z: Self::offset(n / self.m_y, self.m_z),
        }
    }

    /// Check that `idx` lies on this grid (offset range and parity).
    pub fn validate_index(&self, idx: ElementIndex) -> Result<()> {
        let ok_axis = |i: f64, m: usize| {
            let two_i = 2.0 * i;
            let parity_ok = if m % 2 == 1 {
                i.fract() == 0.0
            } else {
                two_i.fract() == 0.0 && (two_i as i64) % 2 != 0
            };
            parity_ok && 2.0 * i.abs() <= (m - 1) as f64
        };
        if ok_axis(idx.i_y, self.m_y) && ok_axis(idx.i_z, self.m_z) {
            Ok(())
        } else {
            Err(Error::IndexOutOfGrid {
                i_y: idx.i_y,
                i_z: idx.i_z,
                m_y: self.m_y,
                m_z: self.m_z,
            })
        }
    }
}

/// Signed grid offset of one element. Integer for odd counts, half-integer
/// for even counts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementIndex {
    pub i_y: f64,
    pub i_z: f64,
}

impl ElementIndex {
    pub fn new(i_y: f64, i_z: f64) -> Self {
        Self { i_y, i_z }
    }

    pub fn center() -> Self {
        Self { i_y: 0.0, i_z: 0.0 }
    }
}

/// Unit vector from the array center toward the user,
/// `(sin t cos p, sin t sin p, cos t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    /// Boresight component `Psi = sin(theta) cos(phi)`.
    pub psi: f64,
    /// Horizontal component `Phi = sin(theta) sin(phi)`.
    pub phi: f64,
    /// Vertical component `Omega = cos(theta)`.
    pub omega: f64,
}

/// User location in spherical coordinates relative to the array center.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UserPose {
    r: f64,
    theta: f64,
    phi: f64,
}

impl UserPose {
    /// `r > 0`, `theta in [0, pi]`, `phi in [-pi/2, pi/2]`. Out-of-range
    /// angles are rejected, not wrapped.
    pub fn new(r: f64, theta: f64, phi: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(invalid("r", format!("link distance must be positive, got {r}")));
        }
        if !(0.0..=std::f64::consts::PI).contains(&theta) {
            return Err(invalid("theta", format!("zenith angle must lie in [0, pi], got {theta}")));
        }
        let half_pi = std::f64::consts::FRAC_PI_2;
        if !(-half_pi..=half_pi).contains(&phi) {
            return Err(invalid(
                "phi",
                format!("azimuth angle must lie in [-pi/2, pi/2], got {phi}"),
            ));
        }
        Ok(Self { r, theta, phi })
    }

    /// Boresight pose `(theta, phi) = (pi/2, 0)` at distance `r`.
    pub fn boresight(r: f64) -> Result<Self> {
        Self::new(r, std::f64::consts::FRAC_PI_2, 0.0)
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn direction(&self) -> Direction {
        direction_cosines(self)
    }

    /// Cartesian user location `q = r * (Psi, Phi, Omega)`.
    pub fn position(&self) -> [f64; 3] {
        let dir = self.direction();
        [self.r * dir.psi, self.r * dir.phi, self.r * dir.omega]
    }

    /// `epsilon = d / r` for a given geometry.
    pub fn epsilon(&self, geom: &ArrayGeometry) -> f64 {
        geom.spacing() / self.r
    }
}

/// Direction cosines `(Psi, Phi, Omega)` of a pose.
pub fn direction_cosines(pose: &UserPose) -> Direction {
    let (st, ct) = pose.theta.sin_cos();
    let (sp, cp) = pose.phi.sin_cos();
    Direction {
        psi: st * cp,
        phi: st * sp,
        omega: ct,
    }
}

/// Center position of an element, `(0, i_y d, i_z d)`.
pub fn element_position(geom: &ArrayGeometry, idx: ElementIndex) -> Result<[f64; 3]> {
    geom.validate_index(idx)?;
    Ok([0.0, idx.i_y * geom.spacing(), idx.i_z * geom.spacing()])
}

/// User-to-element distance,
/// `r sqrt(1 - 2 i_y eps Phi - 2 i_z eps Omega + (i_y^2 + i_z^2) eps^2)`.
pub fn element_distance(geom: &ArrayGeometry, pose: &UserPose, idx: ElementIndex) -> f64 {
    let dir = pose.direction();
    let eps = pose.epsilon(geom);
    distance_factor(eps, &dir, idx.i_y, idx.i_z) * pose.r()
}

/// `sqrt` of the quadratic form in the distance expression, i.e. the
/// element distance normalized by `r`.
pub(crate) fn distance_factor(eps: f64, dir: &Direction, i_y: f64, i_z: f64) -> f64 {
    (1.0 - 2.0 * i_y * eps * dir.phi - 2.0 * i_z * eps * dir.omega
        + (i_y * i_y + i_z * i_z) * eps * eps)
        .sqrt()
}

/// Element distance by the coordinate-space Euclidean norm `||q - w||`,
/// an independent route used to cross-check [`element_distance`].
pub fn element_distance_euclid(geom: &ArrayGeometry, pose: &UserPose, idx: ElementIndex) -> f64 {
    let q = pose.position();
    let d = geom.spacing();
    let dx = q[0];
    let dy = q[1] - idx.i_y * d;
    let dz = q[2] - idx.i_z * d;
    (dx * dx + dy * dy + dz * dz).sqrt()
}
