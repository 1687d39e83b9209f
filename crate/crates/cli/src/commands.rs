use std::f64::consts::FRAC_1_SQRT_2;
use std::path::Path;

use nalgebra::Vector3;
use num_complex::Complex64 as C64;
use qrf_core::frames::{compose_proper, euler_from_frame, EulerAngles, Frame};
use qrf_core::qrf::{
    branch_transform, convergence_study, entanglement_diagnostic, finite_j_b_fidelity,
    quarter_turn_frame, Branch, BranchState, SystemB,
};
use qrf_core::spin::{direction, SpinQuantumNumber};
use qrf_core::symmetry::{
    check_qrf_invariance, check_rotational_invariance, heisenberg_like_hamiltonian,
    random_axis_angle, random_coherent_state, CommonRotation, JointHamiltonian,
};
use qrf_core::QrfError;
use rand::SeedableRng;
use rand_xoshiro::SplitMix64;

use crate::error::CliError;
use crate::json::{format_number, Json};
use crate::statefile::{self, parse_frame, parse_spin, FrameSpin, StateFile};
use crate::Format;

/// Largest deviation `symmetry` accepts.
pub const SYMMETRY_TOL: f64 = 1e-8;

pub const COUPLINGS: [f64; 3] = [1.0, 0.7, 0.3];

pub struct Output {
    pub stdout: String,
    pub warnings: Vec<String>,
    pub failure: Option<CliError>,
}

impl Output {
    fn ok(stdout: String) -> Self {
        Self {
            stdout,
            warnings: Vec::new(),
            failure: None,
        }
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

pub fn transform(input: &Path, output: &Path, finite_j: Option<f64>) -> Result<Output, CliError> {
    let (file, warnings) = statefile::parse(&read(input)?)?;
    let transformed = branch_transform(&file.state)?;
    let mut json = statefile::to_json(&StateFile {
        j: file.j,
        state: transformed,
    });
    if let Some(j) = finite_j {
        let j = parse_spin(j)?;
        let fidelity = finite_j_b_fidelity(&file.state, j).map_err(|e| match e {
            QrfError::UnsupportedReflection { branch } => CliError::Unsupported(format!(
                "branch {branch}: finite-j transformation has no reflection; improper frames are label-only"
            )),
            other => other.into(),
        })?;
        if let Json::Obj(fields) = &mut json {
            fields.push((
                "finite_j".to_string(),
                Json::obj([("j", Json::Num(j.value())), ("b_fidelity", Json::Num(fidelity))]),
            ));
        }
    }
    std::fs::write(output, json.render())
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", output.display())))?;
    Ok(Output {
        stdout: String::new(),
        warnings,
        failure: None,
    })
}

#[derive(Debug, Clone, Copy)]
pub struct ExampleParams {
    pub theta: f64,
    pub phi: f64,
    pub phase: f64,
    pub euler: [f64; 3],
}

fn swapped_frame() -> Frame {
    Frame::new(Vector3::x(), Vector3::z(), Vector3::y()).expect("orthonormal")
}

fn spin_half_label(n: Vector3<f64>) -> Result<SystemB, CliError> {
    Ok(SystemB::label(n, 0.5, SpinQuantumNumber::HALF)?)
}

fn example_state(name: &str, p: &ExampleParams) -> Result<BranchState, CliError> {
    if !(0.0..=std::f64::consts::PI).contains(&p.theta) {
        return Err(CliError::Input(format!("theta {} outside [0, pi]", p.theta)));
    }
    let n = direction(p.theta, p.phi);
    let half = C64::new(FRAC_1_SQRT_2, 0.0);
    let phased = C64::from_polar(FRAC_1_SQRT_2, p.phase);
    let branches = match name {
        "a" => {
            let [a, b, g] = p.euler;
            let e = EulerAngles::new(a, b, g)?;
            let frame = Frame::from_rows(compose_proper(&e).matrix())?;
            vec![Branch {
                amplitude: C64::new(1.0, 0.0),
                frame,
                system: spin_half_label(n)?,
            }]
        }
        "b" => vec![
            Branch {
                amplitude: half,
                frame: Frame::canonical(),
                system: spin_half_label(n)?,
            },
            Branch {
                amplitude: phased,
                frame: swapped_frame(),
                system: spin_half_label(n)?,
            },
        ],
        "c" => vec![
            Branch {
                amplitude: half,
                frame: Frame::canonical(),
                system: spin_half_label(Vector3::z())?,
            },
            Branch {
                amplitude: phased,
                frame: swapped_frame(),
                system: spin_half_label(Vector3::y())?,
            },
        ],
        other => {
            return Err(CliError::Input(format!(
                "unknown example {other:?}; expected a, b or c"
            )))
        }
    };
    Ok(BranchState::new(branches))
}

pub fn example(name: &str, p: &ExampleParams, format: Format) -> Result<Output, CliError> {
    let input = example_state(name, p)?;
    let output = branch_transform(&input)?;
    let angles: Vec<EulerAngles> = input
        .branches
        .iter()
        .map(|b| euler_from_frame(&b.frame))
        .collect();
    let (s_in, s_out) = (
        entanglement_diagnostic(&input)?,
        entanglement_diagnostic(&output)?,
    );
    let wrap = |state: BranchState| StateFile {
        j: FrameSpin::Infinite,
        state,
    };
    let (input, output) = (wrap(input), wrap(output));
    let text = match format {
        Format::Json => Json::obj([
            ("example", Json::str(name)),
            (
                "parameters",
                Json::obj([
                    ("theta", Json::Num(p.theta)),
                    ("phi", Json::Num(p.phi)),
                    ("phase", Json::Num(p.phase)),
                ]),
            ),
            (
                "euler_angles",
                Json::Arr(
                    angles
                        .iter()
                        .map(|e| Json::nums([e.alpha, e.beta, e.gamma]))
                        .collect(),
                ),
            ),
            (
                "entanglement",
                Json::obj([("input", Json::Num(s_in)), ("output", Json::Num(s_out))]),
            ),
            ("input", statefile::to_json(&input)),
            ("output", statefile::to_json(&output)),
        ])
        .render(),
        Format::Text => {
            let mut out = format!("example {name}\n\ninput\n{}", statefile::to_text(&input));
            for (i, e) in angles.iter().enumerate() {
                out.push_str(&format!(
                    "  euler angles [{i}]: ({:.6}, {:.6}, {:.6})\n",
                    e.alpha, e.beta, e.gamma
                ));
            }
            out.push_str(&format!("  entanglement: {s_in:.6} ebit\n\noutput\n"));
            out.push_str(&statefile::to_text(&output));
            out.push_str(&format!("  entanglement: {s_out:.6} ebit\n"));
            out
        }
    };
    Ok(Output::ok(text))
}

fn read_frame(path: &Path) -> Result<Frame, CliError> {
    let value: serde_json::Value = serde_json::from_str(&read(path)?)
        .map_err(|e| CliError::Input(format!("frame file: {e}")))?;
    let rows = value.get("frame").unwrap_or(&value);
    let rows: Vec<Vec<f64>> = serde_json::from_value(rows.clone())
        .map_err(|e| CliError::Input(format!("frame file: {e}")))?;
    parse_frame(&rows).map_err(CliError::Input)
}

pub fn converge(
    js: &[f64],
    theta: f64,
    phi: f64,
    frame: Option<&Path>,
    format: Format,
) -> Result<Output, CliError> {
    let frame = match frame {
        Some(path) => read_frame(path)?,
        None => quarter_turn_frame(),
    };
    let spins = js
        .iter()
        .map(|&j| {
            let s = parse_spin(j)?;
            if s.twice() == 0 {
                return Err(CliError::Input("j must be at least 1/2".to_string()));
            }
            Ok(s)
        })
        .collect::<Result<Vec<_>, _>>()?;
    if !(0.0..=std::f64::consts::PI).contains(&theta) {
        return Err(CliError::Input(format!("theta {theta} outside [0, pi]")));
    }
    let rows = convergence_study(&frame, theta, phi, &spins)?;
    let header = ["j", "alpha_err", "beta_err", "gamma_err", "cos_op_err", "b_fidelity"];
    let cells = |r: &qrf_core::qrf::ConvergenceRow| {
        [r.alpha_err, r.beta_err, r.gamma_err, r.cos_op_err, r.b_fidelity]
    };
    let mut out = String::new();
    match format {
        Format::Json => {
            out.push_str(&header.join(","));
            out.push('\n');
            for r in &rows {
                let values: Vec<String> = cells(r).iter().map(|&x| format_number(x)).collect();
                out.push_str(&format!("{},{}\n", r.j.value(), values.join(",")));
            }
        }
        Format::Text => {
            out.push_str(&format!(
                "{:>6} {:>12} {:>12} {:>12} {:>12} {:>12}\n",
                header[0], header[1], header[2], header[3], header[4], header[5]
            ));
            for r in &rows {
                let [a, b, g, c, f] = cells(r);
                out.push_str(&format!(
                    "{:>6} {a:>12.6e} {b:>12.6e} {g:>12.6e} {c:>12.6e} {f:>12.8}\n",
                    r.j.to_string()
                ));
            }
        }
    }
    Ok(Output::ok(out))
}

pub struct SymmetryArgs {
    pub j: f64,
    pub s: f64,
    pub trials: usize,
    pub seed: u64,
    pub break_invariance: bool,
}

pub fn symmetry(args: &SymmetryArgs, format: Format) -> Result<Output, CliError> {
    let (j, s) = (parse_spin(args.j)?, parse_spin(args.s)?);
    let mut h = heisenberg_like_hamiltonian(j, s, COUPLINGS)?;
    if args.break_invariance {
        h = h.add(&JointHamiltonian::system_component(j, s, &Vector3::z())?)?;
    }
    let mut rng = SplitMix64::seed_from_u64(args.seed);
    let (mut max_rot, mut max_qrf): (f64, f64) = (0.0, 0.0);
    let mut rejected = false;
    for _ in 0..args.trials {
        let (axis, angle) = random_axis_angle(&mut rng);
        let r = CommonRotation::new(j, s, &axis, angle)?;
        max_rot = max_rot.max(check_rotational_invariance(&h, &r)?);
        let ket = qrf_core::frames::random_proper_frame(&mut rng);
        let bra = qrf_core::frames::random_proper_frame(&mut rng);
        let (bk, bb) = (
            random_coherent_state(&mut rng, s),
            random_coherent_state(&mut rng, s),
        );
        match check_qrf_invariance(&h, &ket, &bra, &bk, &bb) {
            Ok(pair) => max_qrf = max_qrf.max(pair.deviation()),
            Err(QrfError::NotInvariant { deviation }) => {
                rejected = true;
                max_qrf = max_qrf.max(deviation);
            }
            Err(e) => return Err(e.into()),
        }
    }
    let passed = !rejected && max_rot < SYMMETRY_TOL && max_qrf < SYMMETRY_TOL;
    let stdout = match format {
        Format::Json => Json::obj([
            ("j", Json::Num(j.value())),
            ("s", Json::Num(s.value())),
            ("trials", Json::Int(args.trials as u64)),
            ("seed", Json::Int(args.seed)),
            ("couplings", Json::nums(COUPLINGS)),
            ("max_rotation_deviation", Json::Num(max_rot)),
            ("max_qrf_deviation", Json::Num(max_qrf)),
            ("hamiltonian_rejected", Json::Bool(rejected)),
            ("passed", Json::Bool(passed)),
        ])
        .render(),
        Format::Text => format!(
            "j = {j}, s = {s}, trials = {}, seed = {}\nmax rotational deviation: {max_rot:.3e}\nmax |lhs - rhs|: {max_qrf:.3e}{}\n{}\n",
            args.trials,
            args.seed,
            if rejected { " (hamiltonian not invariant)" } else { "" },
            if passed { "PASS" } else { "FAIL" }
        ),
    };
    Ok(Output {
        stdout,
        warnings: Vec::new(),
        failure: (!passed).then(|| {
            CliError::Verification(format!(
                "invariance violated: rotation {max_rot:.3e}, frame change {max_qrf:.3e}"
            ))
        }),
    })
}
