//! Finite-dimensional angular-momentum algebra.
//!
//! Basis vectors are ordered by descending magnetic quantum number:
//! index `i` holds `|j, m = j - i>`. Units are chosen so that hbar = 1.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64 as C64;
use statrs::function::factorial::ln_binomial;

use crate::error::{QrfError, Result};

/// Tolerance used when checking that a direction is a unit vector.
pub const UNIT_TOL: f64 = 1e-9;
/// Eigenvalues within this distance of a function's domain are clamped onto it.
pub const CLAMP_TOL: f64 = 1e-9;

const HERMITIAN_TOL: f64 = 1e-12;
const UNITARY_TOL: f64 = 1e-10;
const NORM_TOL: f64 = 1e-12;

/// Spin quantum number stored as `2j` so half-integers are exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpinQuantumNumber {
    twice_j: u32,
}

impl SpinQuantumNumber {
    pub const HALF: SpinQuantumNumber = SpinQuantumNumber { twice_j: 1 };

    pub fn from_twice(twice_j: u32) -> Self {
        Self { twice_j }
    }

    /// Parses a real value such as `0.5` or `3.0`; anything that is not a
    /// non-negative multiple of 1/2 is rejected.
    pub fn from_f64(j: f64) -> Result<Self> {
        let twice = 2.0 * j;
        if !j.is_finite() || j < 0.0 || (twice - twice.round()).abs() > 1e-9 {
            return Err(QrfError::InvalidSpin(j));
        }
        Ok(Self {
            twice_j: twice.round() as u32,
        })
    }

    pub fn twice(self) -> u32 {
        self.twice_j
    }

    pub fn value(self) -> f64 {
        self.twice_j as f64 / 2.0
    }

    pub fn dim(self) -> usize {
        self.twice_j as usize + 1
    }

    /// `j (j + 1)`, the Casimir eigenvalue.
    pub fn casimir(self) -> f64 {
        let j = self.value();
        j * (j + 1.0)
    }

    /// Magnetic quantum numbers in basis order (descending).
    pub fn m_values(self) -> impl Iterator<Item = f64> {
        let j = self.value();
        (0..self.dim()).map(move |i| j - i as f64)
    }
}

impl std::fmt::Display for SpinQuantumNumber {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.twice_j.is_multiple_of(2) {
            write!(f, "{}", self.twice_j / 2)
        } else {
            write!(f, "{}/2", self.twice_j)
        }
    }
}

/// Which tensor slot of the joint space an operator acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subsystem {
    /// A lone spin, not embedded in any joint space.
    Single,
    A1,
    A2,
    A3,
    B,
    /// The full joint space.
    Joint,
}

impl Subsystem {
    pub fn slot(self) -> Option<usize> {
        match self {
            Subsystem::A1 => Some(0),
            Subsystem::A2 => Some(1),
            Subsystem::A3 => Some(2),
            Subsystem::B => Some(3),
            Subsystem::Single | Subsystem::Joint => None,
        }
    }
}

/// Normalized amplitude vector over `|j, m>` with descending `m`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinState {
    j: SpinQuantumNumber,
    amplitudes: DVector<C64>,
}

impl SpinState {
    pub fn new(j: SpinQuantumNumber, amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() != j.dim() {
            return Err(QrfError::DimensionMismatch {
                expected: j.dim(),
                found: amplitudes.len(),
            });
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QrfError::NotNormalized { norm });
        }
        Ok(Self { j, amplitudes })
    }

    /// Rescales to unit norm; fails only on the zero vector or a bad length.
    pub fn normalized(j: SpinQuantumNumber, amplitudes: DVector<C64>) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QrfError::NotNormalized { norm });
        }
        Self::new(j, amplitudes.unscale(norm))
    }

    /// The basis state `|j, m>`.
    pub fn basis(j: SpinQuantumNumber, m: f64) -> Result<Self> {
        let index = m_index(j, m)?;
        let mut amps = DVector::zeros(j.dim());
        amps[index] = C64::new(1.0, 0.0);
        Ok(Self { j, amplitudes: amps })
    }

    pub fn j(&self) -> SpinQuantumNumber {
        self.j
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &SpinState) -> C64 {
        self.amplitudes.dotc(&other.amplitudes)
    }

    /// `|<self|other>|^2`.
    pub fn fidelity(&self, other: &SpinState) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Probabilities `|amplitude(m)|^2` in basis order.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// Position of `m` in the descending basis.
pub fn m_index(j: SpinQuantumNumber, m: f64) -> Result<usize> {
    let offset = j.value() - m;
    let rounded = offset.round();
    if (offset - rounded).abs() > 1e-9 || rounded < 0.0 || rounded as usize >= j.dim() {
        return Err(QrfError::InvalidProjection { m, s: j.value() });
    }
    Ok(rounded as usize)
}

fn hermitian_deviation(m: &DMatrix<C64>) -> f64 {
    let mut dev = 0.0_f64;
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            dev = dev.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    dev
}

fn hermitize(m: DMatrix<C64>) -> DMatrix<C64> {
    let adj = m.adjoint();
    (m + adj).scale(0.5)
}

/// Dense Hermitian matrix tagged with the subsystem it acts on.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator {
    matrix: DMatrix<C64>,
    subsystem: Subsystem,
}

impl HermitianOperator {
    pub fn new(matrix: DMatrix<C64>, subsystem: Subsystem) -> Result<Self> {
        if !matrix.is_square() {
            return Err(QrfError::DimensionMismatch {
                expected: matrix.nrows(),
                found: matrix.ncols(),
            });
        }
        let scale = matrix.iter().fold(1.0_f64, |acc, z| acc.max(z.norm()));
        let deviation = hermitian_deviation(&matrix);
        if deviation > HERMITIAN_TOL * scale {
            return Err(QrfError::NotHermitian { deviation });
        }
        Ok(Self {
            matrix: hermitize(matrix),
            subsystem,
        })
    }

    /// Wraps a matrix known to be Hermitian up to rounding, removing the
    /// anti-Hermitian residue.
    pub(crate) fn from_hermitian_unchecked(matrix: DMatrix<C64>, subsystem: Subsystem) -> Self {
        Self {
            matrix: hermitize(matrix),
            subsystem,
        }
    }

    pub fn zeros(dim: usize, subsystem: Subsystem) -> Self {
        Self {
            matrix: DMatrix::zeros(dim, dim),
            subsystem,
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn subsystem(&self) -> Subsystem {
        self.subsystem
    }

    pub fn with_subsystem(mut self, subsystem: Subsystem) -> Self {
        self.subsystem = subsystem;
        self
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            matrix: self.matrix.scale(factor),
            subsystem: self.subsystem,
        }
    }

    /// `<psi|H|psi>` for a normalized vector.
    pub fn expectation(&self, psi: &DVector<C64>) -> f64 {
        psi.dotc(&(&self.matrix * psi)).re
    }

    /// Eigenvalues in descending order with matching eigenvector columns.
    pub fn spectrum(&self) -> Spectrum {
        let eig = self.matrix.clone().symmetric_eigen();
        let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
        let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        let vectors = DMatrix::from_fn(self.dim(), self.dim(), |r, c| {
            eig.eigenvectors[(r, order[c])]
        });
        Spectrum { values, vectors }
    }
}

/// Eigen-decomposition `H = V diag(values) V^dagger`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<C64>,
}

impl Spectrum {
    /// Rebuilds `V diag(g(values)) V^dagger` for a complex-valued `g`.
    pub fn map_complex(&self, g: impl Fn(f64) -> C64) -> DMatrix<C64> {
        let mut scaled = self.vectors.clone();
        for (c, &v) in self.values.iter().enumerate() {
            let w = g(v);
            for r in 0..scaled.nrows() {
                scaled[(r, c)] *= w;
            }
        }
        scaled * self.vectors.adjoint()
    }
}

/// Square matrix with `U^dagger U = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOperator {
    matrix: DMatrix<C64>,
    subsystem: Subsystem,
}

impl UnitaryOperator {
    pub fn new(matrix: DMatrix<C64>, subsystem: Subsystem) -> Result<Self> {
        let deviation = unitarity_deviation(&matrix);
        if deviation > UNITARY_TOL {
            return Err(QrfError::NotUnitary { deviation });
        }
        Ok(Self { matrix, subsystem })
    }

    pub fn identity(dim: usize, subsystem: Subsystem) -> Self {
        Self {
            matrix: DMatrix::identity(dim, dim),
            subsystem,
        }
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn subsystem(&self) -> Subsystem {
        self.subsystem
    }

    pub fn with_subsystem(mut self, subsystem: Subsystem) -> Self {
        self.subsystem = subsystem;
        self
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            subsystem: self.subsystem,
        }
    }

    /// Operator product `self * rhs`.
    pub fn compose(&self, rhs: &UnitaryOperator) -> Self {
        Self {
            matrix: &self.matrix * &rhs.matrix,
            subsystem: self.subsystem,
        }
    }

    pub fn apply(&self, state: &SpinState) -> Result<SpinState> {
        if state.j().dim() != self.dim() {
            return Err(QrfError::DimensionMismatch {
                expected: self.dim(),
                found: state.j().dim(),
            });
        }
        SpinState::normalized(state.j(), &self.matrix * state.amplitudes())
    }
}

/// Max-entry deviation of `U^dagger U` from the identity.
pub fn unitarity_deviation(u: &DMatrix<C64>) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let prod = u.adjoint() * u;
    let mut dev = 0.0_f64;
    for r in 0..prod.nrows() {
        for c in 0..prod.ncols() {
            let target = if r == c { 1.0 } else { 0.0 };
            dev = dev.max((prod[(r, c)] - C64::new(target, 0.0)).norm());
        }
    }
    dev
}

/// The three Cartesian components of the angular momentum for one spin.
#[derive(Debug, Clone)]
pub struct AngularMomentum {
    pub j: SpinQuantumNumber,
    pub x: HermitianOperator,
    pub y: HermitianOperator,
    pub z: HermitianOperator,
}

/// Builds `Jx, Jy, Jz` from the ladder operators.
pub fn angular_momentum_ops(j: SpinQuantumNumber) -> AngularMomentum {
    let d = j.dim();
    let jv = j.value();
    let mut raise = DMatrix::<C64>::zeros(d, d);
    for i in 1..d {
        let m = jv - i as f64;
        raise[(i - 1, i)] = C64::new((jv * (jv + 1.0) - m * (m + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.transpose();
    let x = (&raise + &lower).scale(0.5);
    let y = (&raise - &lower) * C64::new(0.0, -0.5);
    let z = DMatrix::from_fn(d, d, |r, c| {
        if r == c {
            C64::new(jv - r as f64, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let wrap = |m| HermitianOperator::from_hermitian_unchecked(m, Subsystem::Single);
    AngularMomentum {
        j,
        x: wrap(x),
        y: wrap(y),
        z: wrap(z),
    }
}

pub(crate) fn check_unit(n: &Vector3<f64>) -> Result<()> {
    let norm = n.norm();
    if (norm - 1.0).abs() > UNIT_TOL || !norm.is_finite() {
        return Err(QrfError::NonUnitVector { norm });
    }
    Ok(())
}

impl AngularMomentum {
    /// `n . J` for a unit vector `n`.
    pub fn along(&self, n: &Vector3<f64>) -> Result<HermitianOperator> {
        check_unit(n)?;
        let m = self.x.matrix().scale(n.x) + self.y.matrix().scale(n.y) + self.z.matrix().scale(n.z);
        Ok(HermitianOperator::from_hermitian_unchecked(m, Subsystem::Single))
    }

    /// The three components as an array, in x, y, z order.
    pub fn components(&self) -> [&HermitianOperator; 3] {
        [&self.x, &self.y, &self.z]
    }
}

/// Convenience wrapper for [`AngularMomentum::along`].
pub fn j_along(ops: &AngularMomentum, n: &Vector3<f64>) -> Result<HermitianOperator> {
    ops.along(n)
}

/// Unit vector with polar angle `theta` and azimuth `phi`.
pub fn direction(theta: f64, phi: f64) -> Vector3<f64> {
    Vector3::new(theta.sin() * phi.cos(), theta.sin() * phi.sin(), theta.cos())
}

/// Folds an angle into `[-pi, pi)`.
pub fn fold_angle(a: f64) -> f64 {
    let mut x = (a + PI).rem_euclid(2.0 * PI) - PI;
    if x >= PI {
        x -= 2.0 * PI;
    }
    x
}

/// Polar and azimuthal angles of a unit vector, with `phi` in `[-pi, pi)`.
pub fn polar_angles(n: &Vector3<f64>) -> Result<(f64, f64)> {
    check_unit(n)?;
    let theta = (n.z / n.norm()).clamp(-1.0, 1.0).acos();
    let phi = if n.x == 0.0 && n.y == 0.0 {
        0.0
    } else {
        fold_angle(n.y.atan2(n.x))
    };
    Ok((theta, phi))
}

/// Spin coherent state pointing along `(theta, phi)`.
///
/// The amplitude of `|j, m>` is
/// `sqrt(C(2j, j+m)) cos(theta/2)^(j+m) sin(theta/2)^(j-m) exp(i (j-m) phi)`,
/// so the `m = j` amplitude is real and non-negative.
pub fn scs(j: SpinQuantumNumber, theta: f64, phi: f64) -> Result<SpinState> {
    if !(0.0..=PI).contains(&theta) {
        return Err(QrfError::AngleOutOfRange {
            name: "theta",
            value: theta,
        });
    }
    if !(-PI..PI).contains(&phi) {
        return Err(QrfError::AngleOutOfRange {
            name: "phi",
            value: phi,
        });
    }
    let n = j.twice() as u64;
    let c = (theta / 2.0).cos();
    let s = (theta / 2.0).sin();
    let amps = DVector::from_iterator(
        j.dim(),
        (0..j.dim()).map(|i| {
            // i = j - m, so j + m = 2j - i.
            let up = n - i as u64;
            let down = i as u64;
            let magnitude = if c > 0.0 && s > 0.0 {
                (0.5 * ln_binomial(n, up) + up as f64 * c.ln() + down as f64 * s.ln()).exp()
            } else {
                (0.5 * ln_binomial(n, up)).exp() * c.powi(up as i32) * s.powi(down as i32)
            };
            C64::from_polar(magnitude, down as f64 * phi)
        }),
    );
    SpinState::normalized(j, amps)
}

/// Coherent state along a unit vector.
pub fn scs_along(j: SpinQuantumNumber, n: &Vector3<f64>) -> Result<SpinState> {
    let (theta, phi) = polar_angles(n)?;
    scs(j, theta, phi)
}

/// Sign of the exponent in a rotation operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    /// `exp(+i phi n.J)`: re-description in a rotated frame.
    Passive,
    /// `exp(-i phi n.J)`: physical rotation of the state.
    Active,
}

/// `exp(+- i phi n.J)` through the eigen-decomposition of `n.J`.
pub fn rotation_operator(
    j: SpinQuantumNumber,
    n: &Vector3<f64>,
    phi: f64,
    sense: Sense,
) -> Result<UnitaryOperator> {
    let ops = angular_momentum_ops(j);
    rotation_from_ops(&ops, n, phi, sense)
}

pub(crate) fn rotation_from_ops(
    ops: &AngularMomentum,
    n: &Vector3<f64>,
    phi: f64,
    sense: Sense,
) -> Result<UnitaryOperator> {
    let generator = ops.along(n)?;
    let sign = match sense {
        Sense::Passive => 1.0,
        Sense::Active => -1.0,
    };
    let spectrum = generator.spectrum();
    let matrix = spectrum.map_complex(|m| C64::from_polar(1.0, sign * phi * m));
    Ok(UnitaryOperator {
        matrix,
        subsystem: Subsystem::Single,
    })
}

/// Domain restriction for [`operator_function`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Domain {
    /// Every real number.
    All,
    /// `[lo, hi]`; eigenvalues within [`CLAMP_TOL`] outside are clamped, the
    /// rest is an error.
    Closed(f64, f64),
    /// `[lo, hi]`; every eigenvalue is clamped onto the interval.
    Saturating(f64, f64),
}

impl Domain {
    fn admit(self, x: f64) -> Result<f64> {
        match self {
            Domain::All => Ok(x),
            Domain::Closed(lo, hi) => {
                if x < lo - CLAMP_TOL || x > hi + CLAMP_TOL || x.is_nan() {
                    Err(QrfError::Domain { value: x, lo, hi })
                } else {
                    Ok(x.clamp(lo, hi))
                }
            }
            Domain::Saturating(lo, hi) => Ok(x.clamp(lo, hi)),
        }
    }
}

/// `f(H)`: `f` applied to the eigenvalues of `H` in its eigenbasis.
pub fn operator_function(
    h: &HermitianOperator,
    f: impl Fn(f64) -> f64,
    domain: Domain,
) -> Result<HermitianOperator> {
    let spectrum = h.spectrum();
    let mapped = spectrum
        .values
        .iter()
        .map(|&v| domain.admit(v).map(&f))
        .collect::<Result<Vec<f64>>>()?;
    let mut scaled = spectrum.vectors.clone();
    for (c, &w) in mapped.iter().enumerate() {
        for r in 0..scaled.nrows() {
            scaled[(r, c)] *= w;
        }
    }
    let matrix = scaled * spectrum.vectors.adjoint();
    Ok(HermitianOperator::from_hermitian_unchecked(matrix, h.subsystem()))
}

/// `J_l / sqrt(j (j + 1))`.
pub fn cosine_operator(j: SpinQuantumNumber, l: &Vector3<f64>) -> Result<HermitianOperator> {
    let ops = angular_momentum_ops(j);
    cosine_from_ops(&ops, l)
}

pub(crate) fn cosine_from_ops(ops: &AngularMomentum, l: &Vector3<f64>) -> Result<HermitianOperator> {
    let casimir = ops.j.casimir();
    if casimir == 0.0 {
        // Spin 0 carries no direction.
        return Ok(HermitianOperator::zeros(1, Subsystem::Single));
    }
    Ok(ops.along(l)?.scale(1.0 / casimir.sqrt()))
}

/// Total dimension of a tensor product.
pub fn joint_dim(dims: &[usize]) -> usize {
    dims.iter().product()
}

/// `(1 x ... x op x ... x 1) state` with `op` on `slot`, computed by strided
/// contraction over the slot index. The Kronecker product is never formed.
pub fn apply_on_subsystem(
    state: &DVector<C64>,
    op: &DMatrix<C64>,
    slot: usize,
    dims: &[usize],
) -> Result<DVector<C64>> {
    if slot >= dims.len() {
        return Err(QrfError::DimensionMismatch {
            expected: dims.len(),
            found: slot,
        });
    }
    let total = joint_dim(dims);
    if state.len() != total {
        return Err(QrfError::DimensionMismatch {
            expected: total,
            found: state.len(),
        });
    }
    let d = dims[slot];
    if op.nrows() != d || op.ncols() != d {
        return Err(QrfError::DimensionMismatch {
            expected: d,
            found: op.nrows(),
        });
    }
    let inner: usize = dims[slot + 1..].iter().product();
    let outer = total / (d * inner);
    let mut out = DVector::<C64>::zeros(total);
    let mut column = vec![C64::new(0.0, 0.0); d];
    for o in 0..outer {
        let base = o * d * inner;
        for r in 0..inner {
            for (k, slot_val) in column.iter_mut().enumerate() {
                *slot_val = state[base + k * inner + r];
            }
            for i in 0..d {
                let mut acc = C64::new(0.0, 0.0);
                for (k, v) in column.iter().enumerate() {
                    acc += op[(i, k)] * v;
                }
                out[base + i * inner + r] = acc;
            }
        }
    }
    Ok(out)
}

/// Kronecker product of state vectors, first factor most significant.
pub fn kron_vectors(factors: &[&DVector<C64>]) -> DVector<C64> {
    let mut out = DVector::from_element(1, C64::new(1.0, 0.0));
    for f in factors {
        let mut next = DVector::zeros(out.len() * f.len());
        for (i, a) in out.iter().enumerate() {
            for (k, b) in f.iter().enumerate() {
                next[i * f.len() + k] = a * b;
            }
        }
        out = next;
    }
    out
}
