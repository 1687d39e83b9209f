//! Classical O(3) frame mathematics.
//!
//! A [`Frame`] lists the axes of the described frame in the coordinates of
//! the frame we sit in, whose own axes are always the canonical `e1, e2, e3`.
//! Euler angles follow the zxz convention with passive elementary rotations:
//! `M = Rz(gamma) Rx(beta) Rz(alpha)`, where
//! `Rz(a) = [[cos a, sin a, 0], [-sin a, cos a, 0], [0, 0, 1]]`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Matrix3, Vector3};
use rand::Rng;

use crate::error::{QrfError, Result};
use crate::spin::fold_angle;

/// Frames further than this from orthonormal are rejected.
pub const ORTHONORMAL_TOL: f64 = 1e-9;
/// Frames with `1 - (f3.e3)^2` at or below this use the gimbal-lock formulas.
pub const GIMBAL_THRESHOLD: f64 = 1e-10;

/// `sign` with `sign(0) = -1`.
pub fn sign_neg_zero(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Handedness of a frame relative to the canonical one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Chirality {
    Proper,
    Improper,
}

impl Chirality {
    pub fn sign(self) -> f64 {
        match self {
            Chirality::Proper => 1.0,
            Chirality::Improper => -1.0,
        }
    }
}

/// Three orthonormal axes `f1, f2, f3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    axes: [Vector3<f64>; 3],
}

impl Frame {
    pub fn new(f1: Vector3<f64>, f2: Vector3<f64>, f3: Vector3<f64>) -> Result<Self> {
        let axes = [f1, f2, f3];
        let mut deviation = 0.0_f64;
        for a in 0..3 {
            for b in a..3 {
                let target = if a == b { 1.0 } else { 0.0 };
                deviation = deviation.max((axes[a].dot(&axes[b]) - target).abs());
            }
        }
        if deviation > ORTHONORMAL_TOL || !deviation.is_finite() {
            return Err(QrfError::NonOrthonormalFrame { deviation });
        }
        Ok(Self { axes })
    }

    /// Frame whose axes are the rows of `m`.
    pub fn from_rows(m: &Matrix3<f64>) -> Result<Self> {
        Self::new(
            m.row(0).transpose(),
            m.row(1).transpose(),
            m.row(2).transpose(),
        )
    }

    pub fn canonical() -> Self {
        Self {
            axes: [Vector3::x(), Vector3::y(), Vector3::z()],
        }
    }

    pub fn axes(&self) -> &[Vector3<f64>; 3] {
        &self.axes
    }

    pub fn axis(&self, i: usize) -> &Vector3<f64> {
        &self.axes[i]
    }

    pub fn determinant(&self) -> f64 {
        self.axes[0].dot(&self.axes[1].cross(&self.axes[2]))
    }

    pub fn chirality(&self) -> Chirality {
        if self.determinant() > 0.0 {
            Chirality::Proper
        } else {
            Chirality::Improper
        }
    }

    /// `f3 . e3`.
    pub fn cos_beta(&self) -> f64 {
        self.axes[2].z
    }

    pub fn is_gimbal_locked(&self) -> bool {
        let c = self.cos_beta();
        1.0 - c * c <= GIMBAL_THRESHOLD
    }

    /// Largest componentwise difference between the axes of two frames.
    pub fn max_difference(&self, other: &Frame) -> f64 {
        self.axes
            .iter()
            .zip(other.axes.iter())
            .flat_map(|(a, b)| (a - b).iter().map(|x| x.abs()).collect::<Vec<_>>())
            .fold(0.0, f64::max)
    }
}

/// Euler angles with `alpha, gamma` in `[-pi, pi)` and `beta` in `[0, pi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EulerAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EulerAngles {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        if !(-PI..PI).contains(&alpha) {
            return Err(QrfError::AngleOutOfRange {
                name: "alpha",
                value: alpha,
            });
        }
        if !(0.0..=PI).contains(&beta) {
            return Err(QrfError::AngleOutOfRange {
                name: "beta",
                value: beta,
            });
        }
        if !(-PI..PI).contains(&gamma) {
            return Err(QrfError::AngleOutOfRange {
                name: "gamma",
                value: gamma,
            });
        }
        Ok(Self { alpha, beta, gamma })
    }

    pub fn zero() -> Self {
        Self {
            alpha: 0.0,
            beta: 0.0,
            gamma: 0.0,
        }
    }

    fn folded(alpha: f64, beta: f64, gamma: f64) -> Self {
        Self {
            alpha: fold_angle(alpha),
            beta: beta.clamp(0.0, PI),
            gamma: fold_angle(gamma),
        }
    }
}

/// Orthogonal 3x3 matrix with determinant +-1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RotationMatrix(Matrix3<f64>);

impl RotationMatrix {
    pub fn new(m: Matrix3<f64>) -> Result<Self> {
        let deviation = orthogonality_deviation(&m);
        if deviation > 1e-10 {
            return Err(QrfError::NonOrthonormalFrame { deviation });
        }
        Ok(Self(m))
    }

    pub fn identity() -> Self {
        Self(Matrix3::identity())
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    pub fn determinant(&self) -> f64 {
        self.0.determinant()
    }

    pub fn apply(&self, v: &Vector3<f64>) -> Vector3<f64> {
        self.0 * v
    }

    pub fn transpose(&self) -> Self {
        Self(self.0.transpose())
    }

    pub fn max_difference(&self, other: &RotationMatrix) -> f64 {
        (self.0 - other.0).abs().max()
    }
}

/// Max-entry deviation of `M^T M` from the identity.
pub fn orthogonality_deviation(m: &Matrix3<f64>) -> f64 {
    (m.transpose() * m - Matrix3::identity()).abs().max()
}

/// The change-of-frame matrix: row `i` holds the components of `f_i`, so
/// that `M f_i = e_i`.
pub fn matrix_from_frames(a: &Frame) -> RotationMatrix {
    let [f1, f2, f3] = a.axes();
    RotationMatrix(Matrix3::from_rows(&[
        f1.transpose(),
        f2.transpose(),
        f3.transpose(),
    ]))
}

/// Euler angles of a frame, falling back to [`gimbal_euler`] near gimbal lock.
///
/// Valid for both chiralities: the angles depend only on `f2, f3` and the
/// third component of `f1`.
pub fn euler_from_frame(a: &Frame) -> EulerAngles {
    if a.is_gimbal_locked() {
        return gimbal_euler(a);
    }
    let [f1, f2, f3] = a.axes();
    let c = f3.z;
    let s = (1.0 - c * c).sqrt();
    let alpha = sign_neg_zero(f3.x) * (-f3.y / s).clamp(-1.0, 1.0).acos();
    let beta = c.clamp(-1.0, 1.0).acos();
    let gamma = sign_neg_zero(f1.z) * (f2.z / s).clamp(-1.0, 1.0).acos();
    EulerAngles::folded(alpha, beta, gamma)
}

/// Euler angles for `f3 = +-e3`: `alpha = 0` and the whole in-plane rotation
/// goes into `gamma`.
pub fn gimbal_euler(a: &Frame) -> EulerAngles {
    let [f1, f2, f3] = a.axes();
    let c = f3.z;
    let beta = (1.0 - c) * FRAC_PI_2;
    let gamma = sign_neg_zero(c * f1.y) * (c * f2.y).clamp(-1.0, 1.0).acos();
    EulerAngles::folded(0.0, beta, gamma)
}

fn rz(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, s, 0.0, -s, c, 0.0, 0.0, 0.0, 1.0)
}

fn rx(b: f64, first: f64) -> Matrix3<f64> {
    let (s, c) = b.sin_cos();
    Matrix3::new(first, 0.0, 0.0, 0.0, c, s, 0.0, -s, c)
}

/// `Rz(gamma) Rx(beta) Rz(alpha)`, determinant +1.
pub fn compose_proper(e: &EulerAngles) -> RotationMatrix {
    RotationMatrix(rz(e.gamma) * rx(e.beta, 1.0) * rz(e.alpha))
}

/// `Rz(gamma) diag(-1, Rx(beta)) Rz(alpha)`: a reflection along `e1`
/// inserted before the last rotation; determinant -1.
pub fn compose_improper(e: &EulerAngles) -> RotationMatrix {
    RotationMatrix(rz(e.gamma) * rx(e.beta, -1.0) * rz(e.alpha))
}

/// Composes with the variant matching the chirality.
pub fn compose(e: &EulerAngles, chirality: Chirality) -> RotationMatrix {
    match chirality {
        Chirality::Proper => compose_proper(e),
        Chirality::Improper => compose_improper(e),
    }
}

/// Haar-random proper frame from a uniformly random unit quaternion.
pub fn random_proper_frame<R: Rng + ?Sized>(rng: &mut R) -> Frame {
    let m = random_rotation_matrix(rng);
    Frame::from_rows(&m).expect("rotation matrix rows are orthonormal")
}

/// Random improper frame: a random proper frame with `f1` reversed.
pub fn random_improper_frame<R: Rng + ?Sized>(rng: &mut R) -> Frame {
    let f = random_proper_frame(rng);
    let [f1, f2, f3] = *f.axes();
    Frame::new(-f1, f2, f3).expect("negated axis keeps orthonormality")
}

/// Haar-random element of SO(3).
pub fn random_rotation_matrix<R: Rng + ?Sized>(rng: &mut R) -> Matrix3<f64> {
    // Shoemake's subgroup algorithm.
    let u1: f64 = rng.random();
    let u2: f64 = rng.random::<f64>() * 2.0 * PI;
    let u3: f64 = rng.random::<f64>() * 2.0 * PI;
    let a = (1.0 - u1).sqrt();
    let b = u1.sqrt();
    let q = nalgebra::Quaternion::new(b * u3.cos(), a * u2.sin(), a * u2.cos(), b * u3.sin());
    nalgebra::UnitQuaternion::from_quaternion(q)
        .to_rotation_matrix()
        .into_inner()
}
