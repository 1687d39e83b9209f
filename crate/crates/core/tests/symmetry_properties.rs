use nalgebra::{Rotation3, Unit};
use qrf_core::frames::random_proper_frame;
use qrf_core::spin::{angular_momentum_ops, SpinQuantumNumber};
use qrf_core::symmetry::{
    check_qrf_invariance, check_rotational_invariance, heisenberg_like_hamiltonian,
    random_axis_angle, random_coherent_state, random_direction, CommonRotation,
};
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;

fn spin(twice: u32) -> SpinQuantumNumber {
    SpinQuantumNumber::from_twice(twice)
}

#[test]
fn heisenberg_family_is_invariant_under_common_rotations() {
    for (j, s) in [(1, 1), (2, 1), (2, 2)] {
        let (j, s) = (spin(j), spin(s));
        let h = heisenberg_like_hamiltonian(j, s, [1.0, -0.6, 0.35]).unwrap();
        let mut rng = SplitMix64::seed_from_u64(100 + j.twice() as u64 * 10 + s.twice() as u64);
        for _ in 0..100 {
            let (axis, angle) = random_axis_angle(&mut rng);
            let r = CommonRotation::new(j, s, &axis, angle).unwrap();
            let dev = check_rotational_invariance(&h, &r).unwrap();
            assert!(dev < 1e-10, "j={j} s={s} deviation {dev}");
        }
    }
}

#[test]
fn rotation_factors_transform_vector_operators() {
    let mut rng = SplitMix64::seed_from_u64(8);
    for _ in 0..30 {
        let (axis, angle) = random_axis_angle(&mut rng);
        let m = Rotation3::from_axis_angle(&Unit::new_normalize(axis), angle);
        let r = CommonRotation::new(spin(3), spin(2), &axis, angle).unwrap();
        let n = random_direction(&mut rng);
        for (u, sp) in r.factors().iter().zip([spin(3), spin(3), spin(3), spin(2)]) {
            let ops = angular_momentum_ops(sp);
            let lhs = u.matrix() * ops.along(&n).unwrap().matrix() * u.matrix().adjoint();
            assert!((lhs - ops.along(&(m * n)).unwrap().matrix()).norm() < 1e-10);
        }
    }
}

#[test]
fn qrf_matrix_elements_agree_across_spins() {
    for (j, s) in [(1, 1), (2, 1), (2, 2)] {
        let (j, s) = (spin(j), spin(s));
        let h = heisenberg_like_hamiltonian(j, s, [0.9, 0.4, -1.1]).unwrap();
        let mut rng = SplitMix64::seed_from_u64(77);
        for _ in 0..20 {
            let out = check_qrf_invariance(
                &h,
                &random_proper_frame(&mut rng),
                &random_proper_frame(&mut rng),
                &random_coherent_state(&mut rng, s),
                &random_coherent_state(&mut rng, s),
            )
            .unwrap();
            assert!(out.deviation() < 1e-10);
        }
    }
}
