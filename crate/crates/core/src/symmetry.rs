//! Rotationally invariant Hamiltonians on `A1 x A2 x A3 x B` and checks that
//! their matrix elements survive a change of quantum reference frame.

use nalgebra::{DMatrix, DVector, Rotation3, Vector3};
use num_complex::Complex64 as C64;
use rand::Rng;

use crate::error::{QrfError, Result};
use crate::frames::{compose_proper, euler_from_frame, Chirality, Frame, RotationMatrix};
use crate::qrf::joint_dims;
use crate::spin::{
    angular_momentum_ops, apply_on_subsystem, check_unit, kron_vectors, rotation_from_ops,
    scs_along, AngularMomentum, HermitianOperator, Sense, SpinQuantumNumber, SpinState,
    Subsystem, UnitaryOperator,
};

/// Largest commutator with the total angular momentum accepted as invariant.
pub const INVARIANCE_TOL: f64 = 1e-8;

/// Hamiltonian on the three frame spins and system B.
#[derive(Debug, Clone)]
pub struct JointHamiltonian {
    operator: HermitianOperator,
    j: SpinQuantumNumber,
    s: SpinQuantumNumber,
}

impl JointHamiltonian {
    pub fn new(matrix: DMatrix<C64>, j: SpinQuantumNumber, s: SpinQuantumNumber) -> Result<Self> {
        let dim: usize = joint_dims(j, s).iter().product();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(QrfError::DimensionMismatch {
                expected: dim,
                found: matrix.nrows(),
            });
        }
        Ok(Self {
            operator: HermitianOperator::new(matrix, Subsystem::Joint)?,
            j,
            s,
        })
    }

    /// `J^B_n`, acting on B alone; not rotationally invariant.
    pub fn system_component(
        j: SpinQuantumNumber,
        s: SpinQuantumNumber,
        n: &Vector3<f64>,
    ) -> Result<Self> {
        let jb = angular_momentum_ops(s).along(n)?;
        let dims = joint_dims(j, s);
        let matrix = build_columns(&dims, |v| apply_on_subsystem(v, jb.matrix(), 3, &dims))?;
        Self::new(matrix, j, s)
    }

    pub fn operator(&self) -> &HermitianOperator {
        &self.operator
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        self.operator.matrix()
    }

    pub fn j(&self) -> SpinQuantumNumber {
        self.j
    }

    pub fn s(&self) -> SpinQuantumNumber {
        self.s
    }

    pub fn dim(&self) -> usize {
        self.operator.dim()
    }

    /// `self + other`.
    pub fn add(&self, other: &JointHamiltonian) -> Result<Self> {
        if self.j != other.j || self.s != other.s {
            return Err(QrfError::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Self::new(self.matrix() + other.matrix(), self.j, self.s)
    }
}

fn build_columns(
    dims: &[usize],
    f: impl Fn(&DVector<C64>) -> Result<DVector<C64>>,
) -> Result<DMatrix<C64>> {
    let n: usize = dims.iter().product();
    let mut m = DMatrix::<C64>::zeros(n, n);
    for k in 0..n {
        let mut e = DVector::<C64>::zeros(n);
        e[k] = C64::new(1.0, 0.0);
        m.set_column(k, &f(&e)?);
    }
    Ok(m)
}

/// `sum_i c_i J_Ai . J_B`.
pub fn heisenberg_like_hamiltonian(
    j: SpinQuantumNumber,
    s: SpinQuantumNumber,
    couplings: [f64; 3],
) -> Result<JointHamiltonian> {
    let dims = joint_dims(j, s);
    let a = angular_momentum_ops(j);
    let b = angular_momentum_ops(s);
    let matrix = build_columns(&dims, |v| {
        let mut out = DVector::<C64>::zeros(v.len());
        for (slot, &c) in couplings.iter().enumerate() {
            if c == 0.0 {
                continue;
            }
            for (ja, jb) in a.components().iter().zip(b.components()) {
                let w = apply_on_subsystem(v, jb.matrix(), 3, &dims)?;
                let w = apply_on_subsystem(&w, ja.matrix(), slot, &dims)?;
                out.axpy(C64::new(c, 0.0), &w, C64::new(1.0, 0.0));
            }
        }
        Ok(out)
    })?;
    JointHamiltonian::new(matrix, j, s)
}

/// The same rotation represented on every subsystem.
#[derive(Debug, Clone)]
pub struct CommonRotation {
    axis: Vector3<f64>,
    angle: f64,
    factors: [UnitaryOperator; 4],
    dims: [usize; 4],
}

impl CommonRotation {
    /// Active rotation by `angle` about `axis` on `A1, A2, A3` and `B`.
    pub fn new(
        j: SpinQuantumNumber,
        s: SpinQuantumNumber,
        axis: &Vector3<f64>,
        angle: f64,
    ) -> Result<Self> {
        check_unit(axis)?;
        let a = angular_momentum_ops(j);
        let b = angular_momentum_ops(s);
        let ra = rotation_from_ops(&a, axis, angle, Sense::Active)?;
        let rb = rotation_from_ops(&b, axis, angle, Sense::Active)?;
        Ok(Self {
            axis: *axis,
            angle,
            factors: [
                ra.clone().with_subsystem(Subsystem::A1),
                ra.clone().with_subsystem(Subsystem::A2),
                ra.with_subsystem(Subsystem::A3),
                rb.with_subsystem(Subsystem::B),
            ],
            dims: joint_dims(j, s),
        })
    }

    /// Representation of a proper rotation matrix, mapping `scs(n)` to
    /// `scs(M n)` on each slot up to phase.
    pub fn from_matrix(
        j: SpinQuantumNumber,
        s: SpinQuantumNumber,
        m: &RotationMatrix,
    ) -> Result<Self> {
        if m.determinant() < 0.0 {
            return Err(QrfError::ImproperFrame);
        }
        let rot = Rotation3::from_matrix_unchecked(*m.matrix());
        match rot.axis_angle() {
            Some((axis, angle)) => Self::new(j, s, &axis.into_inner(), angle),
            None => Self::new(j, s, &Vector3::z(), 0.0),
        }
    }

    pub fn axis(&self) -> &Vector3<f64> {
        &self.axis
    }

    pub fn angle(&self) -> f64 {
        self.angle
    }

    pub fn factors(&self) -> &[UnitaryOperator; 4] {
        &self.factors
    }

    pub fn apply(&self, psi: &DVector<C64>) -> Result<DVector<C64>> {
        let mut out = psi.clone();
        for (slot, u) in self.factors.iter().enumerate() {
            out = apply_on_subsystem(&out, u.matrix(), slot, &self.dims)?;
        }
        Ok(out)
    }

    pub fn apply_adjoint(&self, psi: &DVector<C64>) -> Result<DVector<C64>> {
        let mut out = psi.clone();
        for (slot, u) in self.factors.iter().enumerate() {
            out = apply_on_subsystem(&out, &u.matrix().adjoint(), slot, &self.dims)?;
        }
        Ok(out)
    }
}

/// `max_k ||(R H R^dagger - H) e_k||` over the computational basis.
pub fn check_rotational_invariance(h: &JointHamiltonian, r: &CommonRotation) -> Result<f64> {
    if r.dims != joint_dims(h.j, h.s) {
        return Err(QrfError::DimensionMismatch {
            expected: h.dim(),
            found: r.dims.iter().product(),
        });
    }
    let n = h.dim();
    let mut worst: f64 = 0.0;
    for k in 0..n {
        let mut e = DVector::<C64>::zeros(n);
        e[k] = C64::new(1.0, 0.0);
        let conjugated = r.apply(&(h.matrix() * r.apply_adjoint(&e)?))?;
        let diff = conjugated - h.matrix().column(k);
        worst = worst.max(diff.norm());
    }
    Ok(worst)
}

/// `max_a max_k ||[H, J_a] e_k||` with `J` the total angular momentum; zero
/// exactly when `H` commutes with every common rotation.
pub fn generator_deviation(h: &JointHamiltonian) -> Result<f64> {
    let dims = joint_dims(h.j, h.s);
    let a = angular_momentum_ops(h.j);
    let b = angular_momentum_ops(h.s);
    let total = |ops_a: &AngularMomentum, ops_b: &AngularMomentum, c: usize| {
        build_columns(&dims, |v| {
            let mut out = apply_on_subsystem(v, ops_b.components()[c].matrix(), 3, &dims)?;
            for slot in 0..3 {
                out += apply_on_subsystem(v, ops_a.components()[c].matrix(), slot, &dims)?;
            }
            Ok(out)
        })
    };
    let mut worst: f64 = 0.0;
    for c in 0..3 {
        let jt = total(&a, &b, c)?;
        let comm = h.matrix() * &jt - &jt * h.matrix();
        for col in comm.column_iter() {
            worst = worst.max(col.norm());
        }
    }
    Ok(worst)
}

/// Matrix elements on the two sides of the frame-change identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QrfInvariance {
    /// `<bra| R H R^dagger |ket>` with `R` the ket frame's rotation.
    pub lhs: C64,
    /// `<bra| H |ket>`.
    pub rhs: C64,
}

impl QrfInvariance {
    pub fn deviation(&self) -> f64 {
        (self.lhs - self.rhs).norm()
    }
}

fn check_frame(frame: &Frame) -> Result<()> {
    if frame.chirality() != Chirality::Proper {
        return Err(QrfError::ImproperFrame);
    }
    if frame.is_gimbal_locked() {
        return Err(QrfError::GimbalLock {
            cos_beta: frame.cos_beta(),
        });
    }
    Ok(())
}

/// Coherent-state triple of `frame` at spin `j` tensored with `b`.
pub fn frame_product_state(
    frame: &Frame,
    j: SpinQuantumNumber,
    b: &SpinState,
) -> Result<DVector<C64>> {
    let [f1, f2, f3] = frame.axes();
    let (a1, a2, a3) = (scs_along(j, f1)?, scs_along(j, f2)?, scs_along(j, f3)?);
    Ok(kron_vectors(&[
        a1.amplitudes(),
        a2.amplitudes(),
        a3.amplitudes(),
        b.amplitudes(),
    ]))
}

/// Compares `H`'s matrix element between two frame/B product states before
/// and after the ket frame's rotation is applied to every subsystem.
///
/// The frame change replaces the operator-valued angles by the ket frame's
/// classical angles, so it reduces to conjugation by a common rotation, and
/// the two sides agree whenever `H` is rotationally invariant. `H` is
/// checked for invariance first.
pub fn check_qrf_invariance(
    h: &JointHamiltonian,
    ket_frame: &Frame,
    bra_frame: &Frame,
    ket_b: &SpinState,
    bra_b: &SpinState,
) -> Result<QrfInvariance> {
    check_frame(ket_frame)?;
    check_frame(bra_frame)?;
    for b in [ket_b, bra_b] {
        if b.j() != h.s {
            return Err(QrfError::DimensionMismatch {
                expected: h.s.dim(),
                found: b.j().dim(),
            });
        }
    }
    let deviation = generator_deviation(h)?;
    if deviation > INVARIANCE_TOL {
        return Err(QrfError::NotInvariant { deviation });
    }
    qrf_matrix_elements(h, ket_frame, bra_frame, ket_b, bra_b)
}

/// The two sides of [`check_qrf_invariance`] without the invariance gate.
pub fn qrf_matrix_elements(
    h: &JointHamiltonian,
    ket_frame: &Frame,
    bra_frame: &Frame,
    ket_b: &SpinState,
    bra_b: &SpinState,
) -> Result<QrfInvariance> {
    let ket = frame_product_state(ket_frame, h.j, ket_b)?;
    let bra = frame_product_state(bra_frame, h.j, bra_b)?;
    let m = compose_proper(&euler_from_frame(ket_frame));
    let r = CommonRotation::from_matrix(h.j, h.s, &m)?;
    let rotated = r.apply(&(h.matrix() * r.apply_adjoint(&ket)?))?;
    Ok(QrfInvariance {
        lhs: bra.dotc(&rotated),
        rhs: bra.dotc(&(h.matrix() * &ket)),
    })
}

/// Axis uniform on the sphere and angle uniform on `[0, pi]`.
pub fn random_axis_angle<R: Rng + ?Sized>(rng: &mut R) -> (Vector3<f64>, f64) {
    (random_direction(rng), rng.random::<f64>() * std::f64::consts::PI)
}

/// Unit vector uniform on the sphere.
pub fn random_direction<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    let z = 2.0 * rng.random::<f64>() - 1.0;
    let phi = 2.0 * std::f64::consts::PI * rng.random::<f64>();
    let r = (1.0 - z * z).max(0.0).sqrt();
    Vector3::new(r * phi.cos(), r * phi.sin(), z)
}

/// Coherent state of spin `s` along a random direction.
pub fn random_coherent_state<R: Rng + ?Sized>(rng: &mut R, s: SpinQuantumNumber) -> SpinState {
    scs_along(s, &random_direction(rng)).expect("unit direction")
}
