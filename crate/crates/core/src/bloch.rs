//! Bloch-vector geometry for single qubits.
//!
//! A qubit density matrix is carried as its Bloch vector `n`, with
//! `rho = (I + n . sigma) / 2`. A two-outcome projective measurement is
//! carried as the unit Bloch vector `s` of its `+1` projector.
//!
//! In-plane angles are measured counterclockwise from the first plane axis,
//! so a unit in-plane vector is `(cos a, sin a)` in plane coordinates. The
//! plane coordinates are `(x, z)` for [`PlaneTag::XZ`] and `(x, y)` for
//! [`PlaneTag::ConstZ`].

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance for physical-state checks on exact (analytic) inputs.
pub const EPS_PHYS: f64 = 1e-9;
/// Below this in-plane norm a perpendicular direction is meaningless.
pub const EPS_DEGENERATE: f64 = 1e-6;
/// Slack granted to estimated (shot-noise) inputs before `cos theta` is rejected.
pub const EPS_CLAMP: f64 = 0.02;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct BlochVec {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVec {
    pub const ZERO: BlochVec = BlochVec::new(0.0, 0.0, 0.0);
    pub const X: BlochVec = BlochVec::new(1.0, 0.0, 0.0);
    pub const Y: BlochVec = BlochVec::new(0.0, 1.0, 0.0);
    pub const Z: BlochVec = BlochVec::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVec { x, y, z }
    }

    pub fn dot(&self, other: &BlochVec) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm_sq(&self) -> f64 {
        self.dot(self)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Unit vector along `self`, or `None` for (near) zero vectors.
    pub fn normalized(&self) -> Option<BlochVec> {
        let n = self.norm();
        (n > EPS_DEGENERATE).then(|| *self * (1.0 / n))
    }

    pub fn distance(&self, other: &BlochVec) -> f64 {
        (*self - *other).norm()
    }

    pub fn max_abs_diff(&self, other: &BlochVec) -> f64 {
        (self.x - other.x).abs().max((self.y - other.y).abs()).max((self.z - other.z).abs())
    }

    pub fn is_physical(&self) -> bool {
        self.is_finite() && self.norm() <= 1.0 + EPS_PHYS
    }

    pub fn is_pure(&self) -> bool {
        self.is_finite() && (self.norm() - 1.0).abs() <= EPS_PHYS
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Purity `Tr(rho^2) = (1 + |n|^2) / 2`.
    pub fn purity(&self) -> f64 {
        0.5 * (1.0 + self.norm_sq())
    }

    pub(crate) fn require_unit(&self, what: &str) -> Result<()> {
        if self.is_pure() {
            Ok(())
        } else {
            Err(Error::Contract(format!("{what} must be a unit Bloch vector, got {self} (norm {})", self.norm())))
        }
    }

    pub(crate) fn require_physical(&self, what: &str) -> Result<()> {
        if self.is_physical() {
            Ok(())
        } else {
            Err(Error::Contract(format!("{what} is not a physical Bloch vector: {self} (norm {})", self.norm())))
        }
    }
}

impl fmt::Display for BlochVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

impl Add for BlochVec {
    type Output = BlochVec;
    fn add(self, rhs: BlochVec) -> BlochVec {
        BlochVec::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for BlochVec {
    type Output = BlochVec;
    fn sub(self, rhs: BlochVec) -> BlochVec {
        BlochVec::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Neg for BlochVec {
    type Output = BlochVec;
    fn neg(self) -> BlochVec {
        BlochVec::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for BlochVec {
    type Output = BlochVec;
    fn mul(self, k: f64) -> BlochVec {
        BlochVec::new(self.x * k, self.y * k, self.z * k)
    }
}

impl Mul<BlochVec> for f64 {
    type Output = BlochVec;
    fn mul(self, v: BlochVec) -> BlochVec {
        v * self
    }
}

/// An angle in radians, reduced to `[0, 2pi)`.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct PlanarAngle(f64);

impl PlanarAngle {
    pub fn new(radians: f64) -> Self {
        PlanarAngle(reduce_mod(radians, TAU))
    }

    pub fn radians(self) -> f64 {
        self.0
    }

    /// Shortest signed distance to `other` on the circle of circumference `period`.
    pub fn wrapped_distance(self, other: f64, period: f64) -> f64 {
        let d = reduce_mod(self.0 - other, period);
        d.min(period - d)
    }
}

impl From<f64> for PlanarAngle {
    fn from(radians: f64) -> Self {
        PlanarAngle::new(radians)
    }
}

pub(crate) fn reduce_mod(value: f64, period: f64) -> f64 {
    let r = value.rem_euclid(period);
    // rem_euclid can round up to `period` for tiny negative inputs
    if r >= period {
        0.0
    } else {
        r
    }
}

/// The plane that the ensemble's Bloch vectors are known to lie in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum PlaneTag {
    /// Real-amplitude states: `y = 0`. Plane coordinates `(x, z)`.
    XZ,
    /// States sharing the z component `n_z`. Plane coordinates `(x, y)`.
    ConstZ(f64),
}

impl PlaneTag {
    pub fn validate(&self) -> Result<()> {
        match *self {
            PlaneTag::XZ => Ok(()),
            PlaneTag::ConstZ(nz) if nz.is_finite() && nz.abs() < 1.0 => Ok(()),
            PlaneTag::ConstZ(nz) => Err(Error::Contract(format!("constant-z plane needs |n_z| < 1, got {nz}"))),
        }
    }

    /// Coordinates of `v` along the two in-plane axes.
    pub fn plane_coords(&self, v: &BlochVec) -> (f64, f64) {
        match self {
            PlaneTag::XZ => (v.x, v.z),
            PlaneTag::ConstZ(_) => (v.x, v.y),
        }
    }

    /// Component of `v` along the plane's normal axis (`y` or `z`).
    pub fn normal_coord(&self, v: &BlochVec) -> f64 {
        match self {
            PlaneTag::XZ => v.y,
            PlaneTag::ConstZ(_) => v.z,
        }
    }

    /// Assembles a vector from plane coordinates and a normal component.
    pub fn from_coords(&self, u: f64, w: f64, normal: f64) -> BlochVec {
        match self {
            PlaneTag::XZ => BlochVec::new(u, normal, w),
            PlaneTag::ConstZ(_) => BlochVec::new(u, w, normal),
        }
    }

    /// Projection of `v` onto the two in-plane axes (normal component zeroed).
    pub fn in_plane_part(&self, v: &BlochVec) -> BlochVec {
        let (u, w) = self.plane_coords(v);
        self.from_coords(u, w, 0.0)
    }

    /// The normal component every vector of this plane must carry.
    pub fn offset(&self) -> f64 {
        match *self {
            PlaneTag::XZ => 0.0,
            PlaneTag::ConstZ(nz) => nz,
        }
    }

    pub fn contains(&self, v: &BlochVec, tol: f64) -> bool {
        (self.normal_coord(v) - self.offset()).abs() <= tol
    }

    pub(crate) fn require_contains(&self, v: &BlochVec, what: &str) -> Result<()> {
        if self.contains(v, EPS_PHYS) {
            Ok(())
        } else {
            Err(Error::Contract(format!("{what} {v} does not lie in plane {self:?}")))
        }
    }

    /// Counterclockwise angle of the in-plane part of `v` from the first plane axis.
    pub fn angle_of(&self, v: &BlochVec) -> PlanarAngle {
        let (u, w) = self.plane_coords(v);
        PlanarAngle::new(w.atan2(u))
    }
}

/// Bloch vector of `cos(g/2)|0> + sin(g/2)|1>`, i.e. `(sin g, 0, cos g)`.
///
/// `polar_from_z` is the polar angle measured from `+z`. Convert an in-plane
/// angle `a` (from `+x`) with `polar_from_z = pi/2 - a`.
pub fn bloch_from_state_angle(polar_from_z: f64) -> BlochVec {
    let (s, c) = polar_from_z.sin_cos();
    BlochVec::new(s, 0.0, c)
}

/// Probability of the `+1` outcome of the measurement `s` on state `n`:
/// `(1 + s . n) / 2`.
///
/// Evaluated so that `prob_plus(s, n) + prob_plus(-s, n) == 1.0` holds exactly
/// in floating point.
pub fn prob_plus(s: &BlochVec, n: &BlochVec) -> Result<f64> {
    s.require_unit("measurement axis")?;
    n.require_physical("state")?;
    Ok(prob_plus_unchecked(s, n))
}

pub(crate) fn prob_plus_unchecked(s: &BlochVec, n: &BlochVec) -> f64 {
    let a = s.dot(n).clamp(-1.0, 1.0);
    let smaller = 0.5 - 0.5 * a.abs();
    if a >= 0.0 {
        1.0 - smaller
    } else {
        smaller
    }
}

/// Rotates `v` counterclockwise by `angle` inside `plane`, leaving the normal
/// component untouched.
pub fn rotate_in_plane(v: &BlochVec, plane: PlaneTag, angle: f64) -> Result<BlochVec> {
    plane.validate()?;
    plane.require_contains(v, "vector")?;
    let (u, w) = plane.plane_coords(v);
    let (s, c) = angle.sin_cos();
    Ok(plane.from_coords(u * c - w * s, u * s + w * c, plane.normal_coord(v)))
}

/// Unit in-plane vector obtained by a +90 degree rotation of the normalized
/// in-plane part of `n`. For the x-z plane this is `(-n_z, n_x) / |n|`.
pub fn perp_in_plane(n: &BlochVec, plane: PlaneTag) -> Result<BlochVec> {
    let (u, w) = plane.plane_coords(n);
    let r = u.hypot(w);
    if !(r > EPS_DEGENERATE) {
        return Err(Error::DegenerateEnsemble(format!(
            "in-plane part of {n} has norm {r:e}, no perpendicular direction"
        )));
    }
    Ok(plane.from_coords(-w / r, u / r, 0.0))
}
