//! Planar curves, the two boundary curves of the scene, and the compact
//! sets built over them.

mod bezier;
mod curve;
mod intersect;
mod scene;
mod sets;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::C64;

pub use bezier::{CubicBezier, Rect};
pub use curve::{CurveSpec, CurveSample};
pub use intersect::{intersect_curves, IntersectionReport};
pub use scene::{
    build_default_geometry, validate_geometry, Arrangement, Check, GeometryOverrides,
    SceneGeometry, ValidationReport, DEFAULT_H_GRID, I_MINUS, I_PLUS,
};
pub use sets::{
    retained_t_intervals, retained_w_intervals, sample_set, set_membership, set_separation, totally_real_defect, Family, SampleId,
    SampleParam, SetLabel, SetSample,
};

/// Default membership tolerance.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("curve chain is not closed: gap {gap:.3e} between segment {segment} and its successor")]
    OpenChain { segment: usize, gap: f64 },
    #[error("degenerate curve: segment {segment} has zero length")]
    DegenerateSegment { segment: usize },
    #[error("point {point} lies on the curve (distance {distance:.3e})")]
    OnBoundary { point: C64, distance: f64 },
    #[error("usage: {0}")]
    Usage(String),
}

/// A point `(z, w)` of `C^2`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ComplexPoint {
    pub z: C64,
    pub w: C64,
}

impl ComplexPoint {
    pub const fn new(z: C64, w: C64) -> Self {
        Self { z, w }
    }

    pub fn from_reals(re_z: f64, im_z: f64, re_w: f64, im_w: f64) -> Self {
        Self::new(C64::new(re_z, im_z), C64::new(re_w, im_w))
    }

    pub fn real(z: f64, w: f64) -> Self {
        Self::from_reals(z, 0.0, w, 0.0)
    }

    /// The projection onto the first coordinate.
    pub fn pi(&self) -> C64 {
        self.z
    }

    pub fn is_finite(&self) -> bool {
        self.z.is_finite() && self.w.is_finite()
    }

    pub fn dist(&self, other: &ComplexPoint) -> f64 {
        ((self.z - other.z).norm_sqr() + (self.w - other.w).norm_sqr()).sqrt()
    }

    pub fn norm(&self) -> f64 {
        (self.z.norm_sqr() + self.w.norm_sqr()).sqrt()
    }

    pub fn to_reals(&self) -> [f64; 4] {
        [self.z.re, self.z.im, self.w.re, self.w.im]
    }

    pub fn conj(&self) -> Self {
        Self::new(self.z.conj(), self.w.conj())
    }
}

impl std::ops::Add for ComplexPoint {
    type Output = ComplexPoint;
    fn add(self, rhs: ComplexPoint) -> ComplexPoint {
        ComplexPoint::new(self.z + rhs.z, self.w + rhs.w)
    }
}

impl std::ops::Sub for ComplexPoint {
    type Output = ComplexPoint;
    fn sub(self, rhs: ComplexPoint) -> ComplexPoint {
        ComplexPoint::new(self.z - rhs.z, self.w - rhs.w)
    }
}

impl std::ops::Mul<C64> for ComplexPoint {
    type Output = ComplexPoint;
    fn mul(self, rhs: C64) -> ComplexPoint {
        ComplexPoint::new(self.z * rhs, self.w * rhs)
    }
}

impl std::fmt::Display for ComplexPoint {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.z, self.w)
    }
}
