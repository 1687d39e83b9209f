//! State files: JSON serialization of branch states.

use nalgebra::{DVector, Matrix3, Vector3};
use num_complex::Complex64 as C64;
use qrf_core::frames::Frame;
use qrf_core::qrf::{Branch, BranchState, SystemB};
use qrf_core::spin::{SpinQuantumNumber, SpinState};
use serde::Deserialize;

use crate::error::CliError;
use crate::json::Json;

/// Amplitude norms further than this from 1 are renormalized with a warning.
pub const NORM_TOL: f64 = 1e-6;

/// Spin of the frame realization recorded in a file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FrameSpin {
    Infinite,
    Finite(SpinQuantumNumber),
}

#[derive(Debug, Clone, PartialEq)]
pub struct StateFile {
    pub j: FrameSpin,
    pub state: BranchState,
}

#[derive(Deserialize)]
struct RawState {
    j: serde_json::Value,
    #[serde(default = "default_perspective")]
    perspective: String,
    #[serde(default = "default_frame_label")]
    frame_label: String,
    branches: Vec<RawBranch>,
}

fn default_perspective() -> String {
    "C".to_string()
}

fn default_frame_label() -> String {
    "A".to_string()
}

#[derive(Deserialize)]
struct RawBranch {
    amp: Vec<f64>,
    frame: Vec<Vec<f64>>,
    system: RawSystem,
}

#[derive(Deserialize)]
struct RawSystem {
    form: String,
    n: Option<Vec<f64>>,
    m: Option<f64>,
    s: f64,
    amps: Option<Vec<Vec<f64>>>,
}

pub fn parse_spin(value: f64) -> Result<SpinQuantumNumber, CliError> {
    SpinQuantumNumber::from_f64(value).map_err(|e| CliError::Input(e.to_string()))
}

fn parse_frame_spin(v: &serde_json::Value) -> Result<FrameSpin, CliError> {
    match v {
        serde_json::Value::String(s) if s == "infinite" => Ok(FrameSpin::Infinite),
        serde_json::Value::Number(n) => {
            let j = n
                .as_f64()
                .ok_or_else(|| CliError::Input(format!("invalid j: {n}")))?;
            Ok(FrameSpin::Finite(parse_spin(j)?))
        }
        other => Err(CliError::Input(format!(
            "j must be \"infinite\" or a spin value, found {other}"
        ))),
    }
}

fn complex(pair: &[f64], what: &str) -> Result<C64, String> {
    match pair {
        [re, im] => Ok(C64::new(*re, *im)),
        _ => Err(format!("{what} must be [re, im]")),
    }
}

/// Parses frame rows `[f1, f2, f3]`.
pub fn parse_frame(rows: &[Vec<f64>]) -> Result<Frame, String> {
    if rows.len() != 3 || rows.iter().any(|r| r.len() != 3) {
        return Err("frame must be 3 rows of 3 numbers".to_string());
    }
    let flat: Vec<f64> = rows.iter().flatten().copied().collect();
    Frame::from_rows(&Matrix3::from_row_slice(&flat)).map_err(|e| format!("frame: {e}"))
}

fn parse_system(raw: &RawSystem) -> Result<SystemB, String> {
    let s = SpinQuantumNumber::from_f64(raw.s).map_err(|e| format!("system spin: {e}"))?;
    match raw.form.as_str() {
        "label" => {
            let n = match raw.n.as_deref() {
                Some([x, y, z]) => Vector3::new(*x, *y, *z),
                _ => return Err("label form needs n = [x, y, z]".to_string()),
            };
            let m = raw.m.ok_or("label form needs m")?;
            SystemB::label(n, m, s).map_err(|e| format!("system: {e}"))
        }
        "vector" => {
            let amps = raw.amps.as_ref().ok_or("vector form needs amps")?;
            let values = amps
                .iter()
                .map(|p| complex(p, "amplitude"))
                .collect::<Result<Vec<_>, _>>()?;
            if values.len() != s.dim() {
                return Err(format!(
                    "vector form of spin {s} needs {} amplitudes, found {}",
                    s.dim(),
                    values.len()
                ));
            }
            SpinState::normalized(s, DVector::from_vec(values))
                .map(SystemB::Vector)
                .map_err(|e| format!("system: {e}"))
        }
        other => Err(format!("unknown system form {other:?}")),
    }
}

/// Parses a state file. Warnings (renormalization) are returned alongside.
pub fn parse(text: &str) -> Result<(StateFile, Vec<String>), CliError> {
    let raw: RawState =
        serde_json::from_str(text).map_err(|e| CliError::Input(format!("state file: {e}")))?;
    let j = parse_frame_spin(&raw.j)?;
    if raw.branches.is_empty() {
        return Err(CliError::Input("state file has no branches".to_string()));
    }
    let mut branches = Vec::with_capacity(raw.branches.len());
    for (index, b) in raw.branches.iter().enumerate() {
        let wrap = |msg: String| CliError::Input(format!("branch {index}: {msg}"));
        branches.push(Branch {
            amplitude: complex(&b.amp, "amp").map_err(wrap)?,
            frame: parse_frame(&b.frame).map_err(wrap)?,
            system: parse_system(&b.system).map_err(wrap)?,
        });
    }
    let mut state = BranchState {
        branches,
        perspective: raw.perspective,
        described: raw.frame_label,
    };
    let mut warnings = Vec::new();
    let norm = state.norm_sqr().sqrt();
    if norm == 0.0 {
        return Err(CliError::Input("all branch amplitudes are zero".to_string()));
    }
    if (norm - 1.0).abs() > NORM_TOL {
        warnings.push(format!("amplitudes have norm {norm}; renormalized"));
        for b in &mut state.branches {
            b.amplitude /= norm;
        }
    }
    Ok((StateFile { j, state }, warnings))
}

fn complex_json(z: C64) -> Json {
    Json::nums([z.re, z.im])
}

pub fn frame_json(frame: &Frame) -> Json {
    Json::Arr(frame.axes().iter().map(|a| Json::nums(a.iter().copied())).collect())
}

fn system_json(system: &SystemB) -> Json {
    match system {
        SystemB::Label { n, twice_m, s } => Json::obj([
            ("form", Json::str("label")),
            ("n", Json::nums(n.iter().copied())),
            ("m", Json::Num(*twice_m as f64 / 2.0)),
            ("s", Json::Num(s.value())),
        ]),
        SystemB::Vector(v) => Json::obj([
            ("form", Json::str("vector")),
            ("s", Json::Num(v.j().value())),
            (
                "amps",
                Json::Arr(v.amplitudes().iter().map(|z| complex_json(*z)).collect()),
            ),
        ]),
    }
}

pub fn to_json(file: &StateFile) -> Json {
    let j = match file.j {
        FrameSpin::Infinite => Json::str("infinite"),
        FrameSpin::Finite(j) => Json::Num(j.value()),
    };
    let branches = file
        .state
        .branches
        .iter()
        .map(|b| {
            Json::obj([
                ("amp", complex_json(b.amplitude)),
                ("frame", frame_json(&b.frame)),
                ("system", system_json(&b.system)),
            ])
        })
        .collect();
    Json::obj([
        ("j", j),
        ("perspective", Json::str(file.state.perspective.clone())),
        ("frame_label", Json::str(file.state.described.clone())),
        ("branches", Json::Arr(branches)),
    ])
}

/// Human-readable rendering.
pub fn to_text(file: &StateFile) -> String {
    let mut out = format!(
        "state of {} and B seen from {} ({} branch{})\n",
        file.state.described,
        file.state.perspective,
        file.state.branches.len(),
        if file.state.branches.len() == 1 { "" } else { "es" }
    );
    for (i, b) in file.state.branches.iter().enumerate() {
        let [f1, f2, f3] = b.frame.axes();
        let v = |x: &Vector3<f64>| {
            let x = x.map(|c| if c.abs() < 5e-7 { 0.0 } else { c });
            format!("({:.6}, {:.6}, {:.6})", x[0], x[1], x[2])
        };
        out.push_str(&format!(
            "  [{i}] amp {:.6}{:+.6}i  axes {} {} {}\n",
            b.amplitude.re,
            b.amplitude.im,
            v(f1),
            v(f2),
            v(f3)
        ));
        match &b.system {
            SystemB::Label { n, twice_m, s } => out.push_str(&format!(
                "      B: |n = {}, m = {}>, s = {s}\n",
                v(n),
                *twice_m as f64 / 2.0
            )),
            SystemB::Vector(state) => {
                let amps: Vec<String> = state
                    .amplitudes()
                    .iter()
                    .map(|z| format!("{:.6}{:+.6}i", z.re, z.im))
                    .collect();
                out.push_str(&format!("      B: [{}], s = {}\n", amps.join(", "), state.j()));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const IDENTITY: &str = r#"{
        "j": "infinite",
        "branches": [{
            "amp": [1.0, 0.0],
            "frame": [[1,0,0],[0,1,0],[0,0,1]],
            "system": {"form": "label", "n": [0,0,1], "m": 0.5, "s": 0.5}
        }]
    }"#;

    #[test]
    fn parse_and_serialize_roundtrip() {
        let (file, warnings) = parse(IDENTITY).unwrap();
        assert!(warnings.is_empty());
        assert_eq!(file.state.perspective, "C");
        let text = to_json(&file).render();
        let (again, _) = parse(&text).unwrap();
        assert_eq!(again, file);
        assert_eq!(to_json(&again).render(), text);
    }

    #[test]
    fn bad_frame_names_branch() {
        let text = IDENTITY.replace("[0,0,1]],", "[0,0]],");
        match parse(&text) {
            Err(CliError::Input(msg)) => assert!(msg.starts_with("branch 0:"), "{msg}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn unnormalized_amplitudes_warn() {
        let text = IDENTITY.replace("[1.0, 0.0]", "[2.0, 0.0]");
        let (file, warnings) = parse(&text).unwrap();
        assert_eq!(warnings.len(), 1);
        assert_eq!(file.state.branches[0].amplitude, C64::new(1.0, 0.0));
    }

    #[test]
    fn vector_form_dimension_is_checked() {
        let text = IDENTITY.replace(
            r#"{"form": "label", "n": [0,0,1], "m": 0.5, "s": 0.5}"#,
            r#"{"form": "vector", "s": 1, "amps": [[1,0],[0,0]]}"#,
        );
        assert!(matches!(parse(&text), Err(CliError::Input(_))));
    }
}
