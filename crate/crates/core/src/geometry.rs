//! Signature-aware geometry of the unit 3-sphere and the unit hyperbolic 3-sphere.
//!
//! Both spaces are embedded in an ambient 4-space with coordinates `(w, x, y, z)`.
//! On S³ the ambient inner product is Euclidean; on H³ it is the Lorentz product
//! with signature `(+, +, +, -)`, and points live on the upper sheet `z > 0`.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default tolerance for manifold membership tests.
pub const DEFAULT_MANIFOLD_TOL: f64 = 1e-10;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum GeometryError {
    #[error("vector cannot be rescaled onto the manifold (signed norm {signed_norm:e})")]
    NonRenormalizable { signed_norm: f64 },
    #[error("degenerate base point: inner(q, q) = 0")]
    DegenerateBasePoint,
    #[error("curvature sign must be +1 or -1, got {0}")]
    InvalidCurvature(i32),
}

/// Sign of the curvature: `+1` selects S³, `-1` selects H³.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i32", into = "i32")]
pub enum Curvature {
    Positive,
    Negative,
}

impl Curvature {
    pub fn sigma(self) -> f64 {
        match self {
            Curvature::Positive => 1.0,
            Curvature::Negative => -1.0,
        }
    }

    pub fn as_i32(self) -> i32 {
        match self {
            Curvature::Positive => 1,
            Curvature::Negative => -1,
        }
    }
}

impl TryFrom<i32> for Curvature {
    type Error = GeometryError;

    fn try_from(value: i32) -> Result<Self, Self::Error> {
        match value {
            1 => Ok(Curvature::Positive),
            -1 => Ok(Curvature::Negative),
            other => Err(GeometryError::InvalidCurvature(other)),
        }
    }
}

impl From<Curvature> for i32 {
    fn from(c: Curvature) -> i32 {
        c.as_i32()
    }
}

impl fmt::Display for Curvature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_i32())
    }
}

/// A point or velocity in the ambient 4-space.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 4]", into = "[f64; 4]")]
pub struct Vec4 {
    pub w: f64,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec4 {
    pub const ZERO: Vec4 = Vec4::new(0.0, 0.0, 0.0, 0.0);

    pub const fn new(w: f64, x: f64, y: f64, z: f64) -> Self {
        Self { w, x, y, z }
    }

    pub fn to_array(self) -> [f64; 4] {
        [self.w, self.x, self.y, self.z]
    }

    pub fn is_finite(self) -> bool {
        self.to_array().iter().all(|c| c.is_finite())
    }

    /// Largest absolute component.
    pub fn max_abs(self) -> f64 {
        self.to_array().iter().fold(0.0_f64, |m, c| m.max(c.abs()))
    }

    /// Euclidean norm of the components, regardless of the curvature.
    pub fn euclidean_norm(self) -> f64 {
        inner(self, self, Curvature::Positive).sqrt()
    }
}

impl From<[f64; 4]> for Vec4 {
    fn from(a: [f64; 4]) -> Self {
        Vec4::new(a[0], a[1], a[2], a[3])
    }
}

impl From<Vec4> for [f64; 4] {
    fn from(v: Vec4) -> Self {
        v.to_array()
    }
}

impl Add for Vec4 {
    type Output = Vec4;
    fn add(self, o: Vec4) -> Vec4 {
        Vec4::new(self.w + o.w, self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec4 {
    type Output = Vec4;
    fn sub(self, o: Vec4) -> Vec4 {
        Vec4::new(self.w - o.w, self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec4 {
    type Output = Vec4;
    fn neg(self) -> Vec4 {
        Vec4::new(-self.w, -self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec4 {
    type Output = Vec4;
    fn mul(self, s: f64) -> Vec4 {
        Vec4::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }
}

impl Mul<Vec4> for f64 {
    type Output = Vec4;
    fn mul(self, v: Vec4) -> Vec4 {
        v * self
    }
}

impl AddAssign for Vec4 {
    fn add_assign(&mut self, o: Vec4) {
        *self = *self + o;
    }
}

impl SubAssign for Vec4 {
    fn sub_assign(&mut self, o: Vec4) {
        *self = *self - o;
    }
}

impl Index<usize> for Vec4 {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        match i {
            0 => &self.w,
            1 => &self.x,
            2 => &self.y,
            3 => &self.z,
            _ => panic!("Vec4 index {i} out of range"),
        }
    }
}

impl IndexMut<usize> for Vec4 {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        match i {
            0 => &mut self.w,
            1 => &mut self.x,
            2 => &mut self.y,
            3 => &mut self.z,
            _ => panic!("Vec4 index {i} out of range"),
        }
    }
}

/// Ambient inner product with the metric selected by `sigma`.
#[inline]
pub fn inner(u: Vec4, v: Vec4, sigma: Curvature) -> f64 {
    u.w * v.w + u.x * v.x + u.y * v.y + sigma.sigma() * u.z * v.z
}

/// Whether `q` lies on S³ (σ=+1) or on the upper sheet of H³ (σ=-1), within `tol`.
pub fn on_manifold(q: Vec4, sigma: Curvature, tol: f64) -> bool {
    debug_assert!(tol > 0.0);
    let s = sigma.sigma();
    if !q.is_finite() || (inner(q, q, sigma) - s).abs() > tol {
        return false;
    }
    match sigma {
        Curvature::Positive => true,
        Curvature::Negative => q.z > 0.0,
    }
}

/// Removes the normal component of `v` at `q`: `v - σ⟨q,v⟩q`.
pub fn tangent_project(q: Vec4, v: Vec4, sigma: Curvature) -> Result<Vec4, GeometryError> {
    let qq = inner(q, q, sigma);
    if qq == 0.0 {
        return Err(GeometryError::DegenerateBasePoint);
    }
    // On the manifold qq = σ, so dividing by qq equals multiplying by σ; this
    // form also stays exact for slightly off-manifold base points.
    Ok(v - q * (inner(q, v, sigma) / qq))
}

/// Rescales `q` onto the manifold.
pub fn renormalize(q: Vec4, sigma: Curvature) -> Result<Vec4, GeometryError> {
    let signed_norm = sigma.sigma() * inner(q, q, sigma);
    if !(signed_norm > 0.0) || !signed_norm.is_finite() {
        return Err(GeometryError::NonRenormalizable { signed_norm });
    }
    if sigma == Curvature::Negative && q.z <= 0.0 {
        return Err(GeometryError::NonRenormalizable { signed_norm });
    }
    Ok(q * (1.0 / signed_norm.sqrt()))
}

/// Rotation by `angle` in the coordinate plane `(a, b)`.
///
/// Planes spanned by `w`, `x`, `y` give isometries of both spaces; planes
/// containing `z` are isometries of S³ only.
pub fn rotate_plane(v: Vec4, a: usize, b: usize, angle: f64) -> Vec4 {
    debug_assert!(a < 4 && b < 4 && a != b);
    let (s, c) = angle.sin_cos();
    let mut out = v;
    out[a] = c * v[a] - s * v[b];
    out[b] = s * v[a] + c * v[b];
    out
}

/// Lorentz boost with the given rapidity in the plane `(a, z)`, `a ∈ {w, x, y}`.
/// Isometry of H³ preserving the upper sheet.
pub fn boost(v: Vec4, a: usize, rapidity: f64) -> Vec4 {
    debug_assert!(a < 3);
    let (ch, sh) = (rapidity.cosh(), rapidity.sinh());
    let mut out = v;
    out[a] = ch * v[a] + sh * v.z;
    out.z = sh * v[a] + ch * v.z;
    out
}
