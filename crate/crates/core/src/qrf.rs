//! Quantum reference frame states and the change of frame.
//!
//! Two levels are provided. [`branch_transform`] works in the large-spin
//! limit, where every branch of a [`BranchState`] carries a sharp frame and
//! the Euler angles act as numbers. [`u_transform_finite_j`] applies the
//! operator-valued Euler angles to an explicit finite-`j` joint vector over
//! `A1 x A2 x A3 x B`, which is how the large-spin limit is approached.

use std::f64::consts::FRAC_2_PI;

use nalgebra::{DMatrix, DVector, Vector3};
use num_complex::Complex64 as C64;

use crate::error::{QrfError, Result};
use crate::frames::{
    compose, euler_from_frame, Chirality, EulerAngles, Frame, RotationMatrix,
};
use crate::spin::{
    angular_momentum_ops, check_unit, cosine_from_ops, kron_vectors, m_index, operator_function,
    polar_angles, rotation_from_ops, scs_along, AngularMomentum, Domain, HermitianOperator, Sense,
    SpinQuantumNumber, SpinState, Subsystem, UnitaryOperator,
};

/// Branches closer than this (frames and spin states) are merged.
pub const MERGE_TOL: f64 = 1e-9;

/// State of the described spin system B in one branch.
#[derive(Debug, Clone, PartialEq)]
pub enum SystemB {
    /// `|n, m>`: eigenstate of `n.J` with eigenvalue `m`, for spin `s`.
    Label {
        n: Vector3<f64>,
        twice_m: i32,
        s: SpinQuantumNumber,
    },
    /// Explicit amplitudes in the `|s, m>` basis of the current frame.
    Vector(SpinState),
}

impl SystemB {
    pub fn label(n: Vector3<f64>, m: f64, s: SpinQuantumNumber) -> Result<Self> {
        check_unit(&n)?;
        m_index(s, m)?;
        Ok(SystemB::Label {
            n,
            twice_m: (2.0 * m).round() as i32,
            s,
        })
    }

    pub fn spin(&self) -> SpinQuantumNumber {
        match self {
            SystemB::Label { s, .. } => *s,
            SystemB::Vector(v) => v.j(),
        }
    }

    /// Amplitudes of the state.
    ///
    /// A label `|n, m>` becomes `exp(i s phi) Rz(phi) Ry(theta) |s, m>` with
    /// active rotations; for `m = s` this is exactly the coherent state with
    /// its `m = s` amplitude real.
    pub fn to_vector(&self) -> Result<SpinState> {
        match self {
            SystemB::Vector(v) => Ok(v.clone()),
            SystemB::Label { n, twice_m, s } => {
                let (theta, phi) = polar_angles(n)?;
                let ops = angular_momentum_ops(*s);
                let rz = rotation_from_ops(&ops, &Vector3::z(), phi, Sense::Active)?;
                let ry = rotation_from_ops(&ops, &Vector3::y(), theta, Sense::Active)?;
                let basis = SpinState::basis(*s, *twice_m as f64 / 2.0)?;
                let phase = C64::from_polar(1.0, s.value() * phi);
                let amps = rz.matrix() * (ry.matrix() * basis.amplitudes()) * phase;
                SpinState::normalized(*s, amps)
            }
        }
    }

    fn approx_eq(&self, other: &SystemB, tol: f64) -> bool {
        match (self, other) {
            (
                SystemB::Label { n, twice_m, s },
                SystemB::Label {
                    n: n2,
                    twice_m: m2,
                    s: s2,
                },
            ) => s == s2 && twice_m == m2 && (n - n2).abs().max() <= tol,
            _ => match (self.to_vector(), other.to_vector()) {
                (Ok(a), Ok(b)) if a.j() == b.j() => {
                    (a.amplitudes() - b.amplitudes()).camax() <= tol
                }
                _ => false,
            },
        }
    }
}

/// One term of a superposition: amplitude, frame orientation and B state.
#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub amplitude: C64,
    pub frame: Frame,
    pub system: SystemB,
}

/// Superposition of branches as seen from the frame named `perspective`.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchState {
    pub branches: Vec<Branch>,
    /// The frame we are in.
    pub perspective: String,
    /// The frame whose orientation the branches record.
    pub described: String,
}

impl BranchState {
    pub fn new(branches: Vec<Branch>) -> Self {
        Self {
            branches,
            perspective: "C".to_string(),
            described: "A".to_string(),
        }
    }

    /// `sum |amplitude|^2`, the squared norm when branches are orthogonal.
    pub fn norm_sqr(&self) -> f64 {
        self.branches.iter().map(|b| b.amplitude.norm_sqr()).sum()
    }

    /// Common spin of system B across branches.
    pub fn system_spin(&self) -> Result<SpinQuantumNumber> {
        let mut spins = self.branches.iter().map(|b| b.system.spin());
        let first = spins.next().ok_or(QrfError::InvalidBranch {
            branch: 0,
            reason: "state has no branches".to_string(),
        })?;
        for (i, s) in spins.enumerate() {
            if s != first {
                return Err(QrfError::InvalidBranch {
                    branch: i + 1,
                    reason: format!("system spin {s} differs from {first}"),
                });
            }
        }
        Ok(first)
    }

    /// Merges branches with matching frames and B states by adding their
    /// amplitudes; branches that cancel are dropped.
    pub fn merged(mut self) -> Self {
        let mut out: Vec<Branch> = Vec::with_capacity(self.branches.len());
        for b in self.branches.drain(..) {
            match out.iter_mut().find(|o| {
                o.frame.max_difference(&b.frame) <= MERGE_TOL
                    && o.system.approx_eq(&b.system, MERGE_TOL)
            }) {
                Some(o) => o.amplitude += b.amplitude,
                None => out.push(b),
            }
        }
        out.retain(|b| b.amplitude.norm() > 1e-14);
        self.branches = out;
        self
    }
}

/// `exp(i gamma Jz) exp(i beta Jx) exp(i alpha Jz)`: the passive spin-`j`
/// representative of the zxz rotation, mapping `|n>` to `|M n>` up to phase.
pub fn euler_unitary(j: SpinQuantumNumber, e: &EulerAngles) -> UnitaryOperator {
    let ops = angular_momentum_ops(j);
    euler_unitary_from_ops(&ops, e)
}

pub(crate) fn euler_unitary_from_ops(ops: &AngularMomentum, e: &EulerAngles) -> UnitaryOperator {
    let rot = |axis: Vector3<f64>, angle| {
        rotation_from_ops(ops, &axis, angle, Sense::Passive).expect("axis is a unit vector")
    };
    rot(Vector3::z(), e.gamma)
        .compose(&rot(Vector3::x(), e.beta))
        .compose(&rot(Vector3::z(), e.alpha))
}

/// Frame-independent part of one branch's transformation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BranchKinematics {
    pub angles: EulerAngles,
    pub chirality: Chirality,
    pub matrix: RotationMatrix,
}

/// Euler angles and change-of-frame matrix of one frame.
pub fn branch_kinematics(frame: &Frame) -> BranchKinematics {
    let angles = euler_from_frame(frame);
    let chirality = frame.chirality();
    BranchKinematics {
        angles,
        chirality,
        matrix: compose(&angles, chirality),
    }
}

/// Change of perspective to the described frame, branch by branch.
///
/// Each branch reads its Euler angles off its frame, rotates B with them (a
/// reflection is included for improper frames), and replaces its frame by
/// the old perspective's axes `{M e1, M e2, M e3}` as seen from the new one.
/// Amplitudes are untouched and the two frame labels are swapped.
pub fn branch_transform(state: &BranchState) -> Result<BranchState> {
    let mut branches = Vec::with_capacity(state.branches.len());
    for (index, branch) in state.branches.iter().enumerate() {
        let kin = branch_kinematics(&branch.frame);
        let m = kin.matrix;
        let system = match &branch.system {
            SystemB::Label { n, twice_m, s } => SystemB::Label {
                n: m.apply(n),
                twice_m: *twice_m,
                s: *s,
            },
            SystemB::Vector(v) => {
                if kin.chirality == Chirality::Improper {
                    return Err(QrfError::UnsupportedReflection { branch: index });
                }
                SystemB::Vector(euler_unitary(v.j(), &kin.angles).apply(v)?)
            }
        };
        let cols = m.matrix();
        let frame = Frame::new(
            cols.column(0).into_owned(),
            cols.column(1).into_owned(),
            cols.column(2).into_owned(),
        )
        .map_err(|e| QrfError::InvalidBranch {
            branch: index,
            reason: e.to_string(),
        })?;
        branches.push(Branch {
            amplitude: branch.amplitude,
            frame,
            system,
        });
    }
    Ok(BranchState {
        branches,
        perspective: state.described.clone(),
        described: state.perspective.clone(),
    }
    .merged())
}

/// The `gamma` angle operator on `A1 x A2 x A3`.
///
/// It is `F (x) G` with `F = (2/pi) arctan(j cos_e3)` on `A1` and
/// `G = arccos(cos_e3 (1 - cos_e3^2)^(-1/2))` on `A2 x A3`. Both factors are
/// functions of `J_e3` on each slot, so the operator is diagonal in the
/// product eigenbasis of `J_e3` and is stored that way.
#[derive(Debug, Clone)]
pub struct GammaOperator {
    j: SpinQuantumNumber,
    /// Columns: eigenvectors of `J_e3` ordered by descending eigenvalue.
    basis: DMatrix<C64>,
    sign_factor: Vec<f64>,
    arccos_factor: Vec<f64>,
}

impl GammaOperator {
    pub fn dim(&self) -> usize {
        self.j.dim()
    }

    /// Eigenvalue for the product eigenvector with slot indices `(i1, i2, i3)`.
    pub fn value(&self, i1: usize, i2: usize, i3: usize) -> f64 {
        self.sign_factor[i1] * self.arccos_factor[i2 * self.dim() + i3]
    }

    /// Eigenbasis of `J_e3` on one slot.
    pub fn basis(&self) -> &DMatrix<C64> {
        &self.basis
    }

    pub fn sign_values(&self) -> &[f64] {
        &self.sign_factor
    }

    pub fn arccos_values(&self) -> &[f64] {
        &self.arccos_factor
    }

    /// The `A1` factor as a dense matrix.
    pub fn sign_operator(&self) -> HermitianOperator {
        let m = spectral(&self.basis, &self.sign_factor);
        HermitianOperator::from_hermitian_unchecked(m, Subsystem::A1)
    }

    /// The `A2 x A3` factor as a dense matrix; dimension `(2j+1)^2`.
    pub fn arccos_operator(&self) -> HermitianOperator {
        let w = self.basis.kronecker(&self.basis);
        let m = spectral(&w, &self.arccos_factor);
        HermitianOperator::from_hermitian_unchecked(m, Subsystem::Joint)
    }

    /// Full dense operator on `A1 x A2 x A3`; dimension `(2j+1)^3`.
    pub fn to_dense(&self) -> HermitianOperator {
        let m = self
            .sign_operator()
            .matrix()
            .kronecker(self.arccos_operator().matrix());
        HermitianOperator::from_hermitian_unchecked(m, Subsystem::Joint)
    }
}

fn spectral(vectors: &DMatrix<C64>, values: &[f64]) -> DMatrix<C64> {
    let mut scaled = vectors.clone();
    for (c, &v) in values.iter().enumerate() {
        for r in 0..scaled.nrows() {
            scaled[(r, c)] *= v;
        }
    }
    scaled * vectors.adjoint()
}

/// Operator-valued Euler angles acting on a frame's three spins.
#[derive(Debug, Clone)]
pub struct EulerAngleOperators {
    pub j: SpinQuantumNumber,
    /// The fixed axes `e1, e2, e3` of the frame we sit in.
    pub axes: Frame,
    /// `alpha` on `A3`.
    pub alpha: HermitianOperator,
    /// `beta` on `A3`.
    pub beta: HermitianOperator,
    pub gamma: GammaOperator,
}

/// Builds the Euler angle operators for spin `j` frames.
///
/// `beta = arccos(cos_e3)` on `A3`. For `alpha` the two non-commuting `A3`
/// factors are combined with the Jordan product `(F G + G F) / 2`, where
/// `F = (2/pi) arctan(j cos_e1)` and `G = arccos(S^(1/2) (-cos_e2) S^(1/2))`
/// with `S = (1 - cos_e3^2)^(-1/2)`. The arguments of every arccos are
/// clamped onto `[-1, 1]`.
pub fn euler_angle_operators(j: SpinQuantumNumber, axes: &Frame) -> Result<EulerAngleOperators> {
    if j.twice() == 0 {
        return Err(QrfError::InvalidSpin(0.0));
    }
    let ops = angular_momentum_ops(j);
    let jv = j.value();
    let [e1, e2, e3] = axes.axes();
    let cos1 = cosine_from_ops(&ops, e1)?;
    let cos2 = cosine_from_ops(&ops, e2)?;
    let cos3 = cosine_from_ops(&ops, e3)?;

    let unit = Domain::Closed(-1.0, 1.0);
    let sign = operator_function(&cos1, |x| FRAC_2_PI * (jv * x).atan(), Domain::All)?;
    let root = operator_function(&cos3, |x| (1.0 - x * x).powf(-0.25), unit)?;
    let argument = root.matrix() * cos2.matrix().scale(-1.0) * root.matrix();
    let argument = HermitianOperator::from_hermitian_unchecked(argument, Subsystem::A3);
    let arccos = operator_function(&argument, f64::acos, Domain::Saturating(-1.0, 1.0))?;
    let jordan = (sign.matrix() * arccos.matrix() + arccos.matrix() * sign.matrix()).scale(0.5);
    let alpha = HermitianOperator::from_hermitian_unchecked(jordan, Subsystem::A3);

    let beta = operator_function(&cos3, f64::acos, unit)?.with_subsystem(Subsystem::A3);

    let spectrum = cos3.spectrum();
    let casimir = j.casimir();
    let cosines: Vec<f64> = j.m_values().map(|m| m / casimir.sqrt()).collect();
    let sign_factor = cosines.iter().map(|c| FRAC_2_PI * (jv * c).atan()).collect();
    let d = j.dim();
    let mut arccos_factor = Vec::with_capacity(d * d);
    for c2 in &cosines {
        for c3 in &cosines {
            let arg = c2 / (1.0 - c3 * c3).sqrt();
            arccos_factor.push(arg.clamp(-1.0, 1.0).acos());
        }
    }
    Ok(EulerAngleOperators {
        j,
        axes: *axes,
        alpha,
        beta,
        gamma: GammaOperator {
            j,
            basis: spectrum.vectors,
            sign_factor,
            arccos_factor,
        },
    })
}

/// Joint dimensions `[(2j+1), (2j+1), (2j+1), (2s+1)]`.
pub fn joint_dims(j: SpinQuantumNumber, s: SpinQuantumNumber) -> [usize; 4] {
    [j.dim(), j.dim(), j.dim(), s.dim()]
}

/// Multiplies every component `(a, b)` of a vector already expressed in a
/// product eigenbasis by `exp(i angle(a) mu_b)`, where `a` runs over the
/// flattened `A1 A2 A3` index.
fn apply_phases(psi: &mut DVector<C64>, db: usize, angle: impl Fn(usize) -> f64, mu: &[f64]) {
    let blocks = psi.len() / db;
    for a in 0..blocks {
        let theta = angle(a);
        if theta == 0.0 {
            continue;
        }
        for (b, m) in mu.iter().enumerate() {
            psi[a * db + b] *= C64::from_polar(1.0, theta * m);
        }
    }
}

fn apply_slots(psi: &DVector<C64>, ops: &[(usize, &DMatrix<C64>)], dims: &[usize]) -> DVector<C64> {
    let mut out = psi.clone();
    for (slot, op) in ops {
        out = crate::spin::apply_on_subsystem(&out, op, *slot, dims)
            .expect("dimensions validated by caller");
    }
    out
}

/// `exp(i theta_hat (x) J^B_n)` for `theta_hat` on `A3`, applied through the
/// eigenbases of `theta_hat` and `J^B_n`.
fn apply_a3_rotation(
    psi: &DVector<C64>,
    angle_op: &HermitianOperator,
    b_generator: &HermitianOperator,
    dims: &[usize; 4],
) -> DVector<C64> {
    let a = angle_op.spectrum();
    let b = b_generator.spectrum();
    let (va, vb) = (a.vectors.adjoint(), b.vectors.adjoint());
    let mut rotated = apply_slots(psi, &[(2, &va), (3, &vb)], dims);
    let d3 = dims[2];
    apply_phases(&mut rotated, dims[3], |idx| a.values[idx % d3], &b.values);
    apply_slots(&rotated, &[(2, &a.vectors), (3, &b.vectors)], dims)
}

/// Applies `exp(i gamma J^B_e3) exp(i beta J^B_e1) exp(i alpha J^B_e3)` with
/// operator-valued angles to a joint vector over `A1 x A2 x A3 x B`.
///
/// Each exponential is evaluated as `sum_k P_k (x) exp(i theta_k J^B)` over
/// the spectral projectors `P_k` of its angle operator; no joint matrix is
/// ever formed.
pub fn u_transform_finite_j(
    joint: &DVector<C64>,
    ops: &EulerAngleOperators,
    s: SpinQuantumNumber,
) -> Result<DVector<C64>> {
    let dims = joint_dims(ops.j, s);
    let total: usize = dims.iter().product();
    if joint.len() != total {
        return Err(QrfError::DimensionMismatch {
            expected: total,
            found: joint.len(),
        });
    }
    let b_ops = angular_momentum_ops(s);
    let [e1, _, e3] = ops.axes.axes();
    let jb1 = b_ops.along(e1)?;
    let jb3 = b_ops.along(e3)?;

    let psi = apply_a3_rotation(joint, &ops.alpha, &jb3, &dims);
    let psi = apply_a3_rotation(&psi, &ops.beta, &jb1, &dims);

    let g = &ops.gamma;
    let w_adj = g.basis.adjoint();
    let b3 = jb3.spectrum();
    let b3_adj = b3.vectors.adjoint();
    let mut rotated = apply_slots(
        &psi,
        &[(0, &w_adj), (1, &w_adj), (2, &w_adj), (3, &b3_adj)],
        &dims,
    );
    let d = dims[0];
    apply_phases(
        &mut rotated,
        dims[3],
        |idx| g.value(idx / (d * d), (idx / d) % d, idx % d),
        &b3.values,
    );
    Ok(apply_slots(
        &rotated,
        &[(0, &g.basis), (1, &g.basis), (2, &g.basis), (3, &b3.vectors)],
        &dims,
    ))
}

/// Reduced density matrix of the last slot (system B) of a joint vector.
pub fn reduced_b_density(joint: &DVector<C64>, db: usize) -> DMatrix<C64> {
    let blocks = joint.len() / db;
    let mut rho = DMatrix::<C64>::zeros(db, db);
    for a in 0..blocks {
        for r in 0..db {
            let x = joint[a * db + r];
            for c in 0..db {
                rho[(r, c)] += x * joint[a * db + c].conj();
            }
        }
    }
    rho
}

/// Finite-`j` joint vector of a branch state.
#[derive(Debug, Clone)]
pub struct Realization {
    pub j: SpinQuantumNumber,
    pub s: SpinQuantumNumber,
    /// Normalized joint vector over `A1 x A2 x A3 x B`.
    pub vector: DVector<C64>,
    /// Norm before renormalization; differs from 1 because coherent states of
    /// different frames overlap at finite `j`.
    pub raw_norm: f64,
}

/// `sum amplitude * scs(f1) (x) scs(f2) (x) scs(f3) (x) |B>`, renormalized.
pub fn realize_finite_j(state: &BranchState, j: SpinQuantumNumber) -> Result<Realization> {
    let s = state.system_spin()?;
    let total: usize = joint_dims(j, s).iter().product();
    let mut vector = DVector::<C64>::zeros(total);
    for (index, branch) in state.branches.iter().enumerate() {
        let wrap = |e: QrfError| QrfError::InvalidBranch {
            branch: index,
            reason: e.to_string(),
        };
        let [f1, f2, f3] = branch.frame.axes();
        let a1 = scs_along(j, f1).map_err(wrap)?;
        let a2 = scs_along(j, f2).map_err(wrap)?;
        let a3 = scs_along(j, f3).map_err(wrap)?;
        let b = branch.system.to_vector().map_err(wrap)?;
        let term = kron_vectors(&[a1.amplitudes(), a2.amplitudes(), a3.amplitudes(), b.amplitudes()]);
        vector.axpy(branch.amplitude, &term, C64::new(1.0, 0.0));
    }
    let raw_norm = vector.norm();
    if raw_norm == 0.0 {
        return Err(QrfError::NotNormalized { norm: 0.0 });
    }
    Ok(Realization {
        j,
        s,
        vector: vector.unscale(raw_norm),
        raw_norm,
    })
}

/// Reduced state of B in the large-spin limit, where branches with different
/// frames are orthogonal. Branches sharing a frame add coherently.
pub fn reduced_b_exact(state: &BranchState) -> Result<DMatrix<C64>> {
    let s = state.system_spin()?;
    let mut groups: Vec<(Frame, DVector<C64>)> = Vec::new();
    for branch in &state.branches {
        let b = branch.system.to_vector()?;
        let term = b.amplitudes() * branch.amplitude;
        match groups
            .iter_mut()
            .find(|(f, _)| f.max_difference(&branch.frame) <= MERGE_TOL)
        {
            Some((_, acc)) => *acc += term,
            None => groups.push((branch.frame, term)),
        }
    }
    let mut rho = DMatrix::<C64>::zeros(s.dim(), s.dim());
    for (_, v) in &groups {
        rho += v * v.adjoint();
    }
    let trace = rho.trace().re;
    if trace <= 0.0 {
        return Err(QrfError::NotNormalized { norm: trace });
    }
    Ok(rho.unscale(trace))
}

/// Von Neumann entropy (bits) of B's reduced state across the frame/B cut,
/// with distinct frames treated as orthogonal.
pub fn entanglement_diagnostic(state: &BranchState) -> Result<f64> {
    let rho = reduced_b_exact(state)?;
    let h = HermitianOperator::from_hermitian_unchecked(rho, Subsystem::B);
    let entropy: f64 = h
        .spectrum()
        .values
        .iter()
        .filter(|&&p| p > 1e-14)
        .map(|&p| -p * p.log2())
        .sum();
    Ok(if entropy < 1e-12 { 0.0 } else { entropy })
}

/// `<psi| rho |psi>`.
pub fn fidelity_with_pure(rho: &DMatrix<C64>, psi: &DVector<C64>) -> f64 {
    psi.dotc(&(rho * psi)).re
}

/// Uhlmann fidelity `(tr sqrt(sqrt(rho) sigma sqrt(rho)))^2`.
pub fn uhlmann_fidelity(rho: &DMatrix<C64>, sigma: &DMatrix<C64>) -> Result<f64> {
    let sqrt = |m: &DMatrix<C64>| -> Result<DMatrix<C64>> {
        let h = HermitianOperator::from_hermitian_unchecked(m.clone(), Subsystem::B);
        Ok(operator_function(&h, |x| x.max(0.0).sqrt(), Domain::All)?.matrix().clone())
    };
    let r = sqrt(rho)?;
    let inner = &r * sigma * &r;
    let root = sqrt(&inner)?;
    Ok(root.trace().re.powi(2))
}

/// Finite-`j` B state compared with the large-spin result.
pub fn finite_j_b_fidelity(state: &BranchState, j: SpinQuantumNumber) -> Result<f64> {
    for (index, branch) in state.branches.iter().enumerate() {
        if branch.frame.chirality() == Chirality::Improper {
            return Err(QrfError::UnsupportedReflection { branch: index });
        }
    }
    let exact = reduced_b_exact(&branch_transform(state)?)?;
    let realized = realize_finite_j(state, j)?;
    let ops = euler_angle_operators(j, &Frame::canonical())?;
    let out = u_transform_finite_j(&realized.vector, &ops, realized.s)?;
    let rho = reduced_b_density(&out, realized.s.dim());
    uhlmann_fidelity(&rho, &exact)
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergenceRow {
    pub j: SpinQuantumNumber,
    /// RMS deviations `||(angle_op - angle) psi||` on the realized frame.
    pub alpha_err: f64,
    pub beta_err: f64,
    pub gamma_err: f64,
    /// Expectation values of the angle operators.
    pub alpha_mean: f64,
    pub beta_mean: f64,
    pub gamma_mean: f64,
    /// `cos(theta) - <cos_z>` on the spin-`j` coherent state along `(theta, phi)`.
    pub cos_op_err: f64,
    /// Overlap of the finite-`j` reduced B state with the large-spin result.
    pub b_fidelity: f64,
}

fn rms_deviation(op: &HermitianOperator, psi: &DVector<C64>, value: f64) -> (f64, f64) {
    let applied = op.matrix() * psi - psi * C64::new(value, 0.0);
    (applied.norm(), op.expectation(psi))
}

/// Compares operator-valued and classical Euler angles, the cosine
/// operator, and the finite-`j` B transformation over a list of spins.
///
/// B is a spin-1/2 pointing along `(theta, phi)`.
pub fn convergence_study(
    frame: &Frame,
    theta: f64,
    phi: f64,
    js: &[SpinQuantumNumber],
) -> Result<Vec<ConvergenceRow>> {
    if frame.chirality() != Chirality::Proper {
        return Err(QrfError::ImproperFrame);
    }
    if frame.is_gimbal_locked() {
        return Err(QrfError::GimbalLock {
            cos_beta: frame.cos_beta(),
        });
    }
    let classical = euler_from_frame(frame);
    let n = crate::spin::direction(theta, phi);
    let half = SpinQuantumNumber::HALF;
    let system = SystemB::label(n, 0.5, half)?;
    let b_in = system.to_vector()?;
    let state = BranchState::new(vec![Branch {
        amplitude: C64::new(1.0, 0.0),
        frame: *frame,
        system,
    }]);
    let b_exact = branch_transform(&state)?.branches[0].system.to_vector()?;

    js.iter()
        .map(|&j| {
            let ops = euler_angle_operators(j, &Frame::canonical())?;
            let [f1, f2, f3] = frame.axes();
            let a1 = scs_along(j, f1)?;
            let a2 = scs_along(j, f2)?;
            let a3 = scs_along(j, f3)?;
            let (alpha_err, alpha_mean) = rms_deviation(&ops.alpha, a3.amplitudes(), classical.alpha);
            let (beta_err, beta_mean) = rms_deviation(&ops.beta, a3.amplitudes(), classical.beta);

            let g = &ops.gamma;
            let w_adj = g.basis().adjoint();
            let probs = |v: &SpinState| -> Vec<f64> {
                (&w_adj * v.amplitudes()).iter().map(|z| z.norm_sqr()).collect()
            };
            let (p1, p2, p3) = (probs(&a1), probs(&a2), probs(&a3));
            let d = j.dim();
            let (mut sq, mut mean) = (0.0, 0.0);
            for i1 in 0..d {
                for i2 in 0..d {
                    for i3 in 0..d {
                        let p = p1[i1] * p2[i2] * p3[i3];
                        let v = g.value(i1, i2, i3);
                        sq += p * (v - classical.gamma).powi(2);
                        mean += p * v;
                    }
                }
            }

            let cos_z = cosine_from_ops(&angular_momentum_ops(j), &Vector3::z())?;
            let probe = crate::spin::scs(j, theta, phi)?;
            let cos_op_err = theta.cos() - cos_z.expectation(probe.amplitudes());

            let joint = kron_vectors(&[a1.amplitudes(), a2.amplitudes(), a3.amplitudes(), b_in.amplitudes()]);
            let out = u_transform_finite_j(&joint, &ops, half)?;
            let rho = reduced_b_density(&out, half.dim());
            let b_fidelity = fidelity_with_pure(&rho, b_exact.amplitudes());

            Ok(ConvergenceRow {
                j,
                alpha_err,
                beta_err,
                gamma_err: sq.sqrt(),
                alpha_mean,
                beta_mean,
                gamma_mean: mean,
                cos_op_err,
                b_fidelity,
            })
        })
        .collect()
}

/// The test frame `{e1, e3, -e2}`, with classical angles `(0, pi/2, 0)`.
pub fn quarter_turn_frame() -> Frame {
    Frame::new(Vector3::x(), Vector3::z(), -Vector3::y()).expect("orthonormal")
}
