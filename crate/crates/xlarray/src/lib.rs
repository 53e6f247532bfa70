//! Near-field channel modelling and received-SNR analysis for extremely
//! large-scale antenna arrays (XL-arrays) and holographic surfaces.
//!
//! The library models a single-user free-space link to a uniform planar
//! array lying in the y-z plane. Per-element channel gains account for the
//! projected aperture of each element, so the resulting maximum-ratio
//! combining SNR saturates instead of growing without bound as the array
//! grows. Four array-response models are provided (the projected-aperture
//! model plus the UPW, USW and NUSW benchmarks), together with closed-form
//! SNR expressions, their brute-force oracles, and near-/far-field boundary
//! solvers (uniform-power distance and direction-dependent Rayleigh
//! distance).
//!
//! Everything is a pure function over immutable value types, so the whole
//! API is thread-safe. Large element sums are evaluated with a fixed
//! chunked reduction that is bit-identical regardless of thread count; the
//! `parallel` feature (on by default) runs the chunks on rayon.

pub mod channel;
mod exec;
pub mod fieldregions;
pub mod geometry;
pub mod snr;
pub mod sweep;
pub mod ula;

pub use channel::{ArrayResponse, ChannelModel, LinkBudget};
pub use fieldregions::{DistanceCriterion, FieldDistanceResult};
pub use geometry::{ArrayGeometry, Direction, ElementIndex, UserPose};
pub use snr::{SnrMethod, SnrResult};

use thiserror::Error;

/// Errors reported by constructors and operations across the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("element index ({i_y}, {i_z}) outside the {m_y}x{m_z} grid")]
    IndexOutOfGrid {
        i_y: f64,
        i_z: f64,
        m_y: usize,
        m_z: usize,
    },
    #[error("operation requires {requirement}")]
    UnsupportedPose { requirement: &'static str },
    #[error("power ratio is undefined for {reason}")]
    PowerRatioUndefined { reason: &'static str },
    #[error("bracket expansion failed: {0}")]
    BracketFailure(String),
}

pub type Result<T> = std::result::Result<T, Error>;

fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
