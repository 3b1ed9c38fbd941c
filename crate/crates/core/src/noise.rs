//! Stochastic device emulation and the calibration data model.
//!
//! Each shot is one Monte Carlo trajectory: the circuit runs gate by gate
//! on a state vector, and after every gate each touched qubit may suffer a
//! T2 phase flip; after every CNOT one of the 15 non-identity two-qubit
//! Paulis may be inserted. Measurement draws one basis index from |ψ|² and
//! then flips each bit with its readout error. Trajectory k consumes RNG
//! stream k of the master seed, and a draw only happens when its
//! probability is nonzero, so with all rates zero the output is identical
//! bit for bit to noiseless sampling and independent of how shots are
//! partitioned across threads.

use crate::circuit::{Circuit, Gate};
use crate::rng::stream_rng;
use crate::sim::{apply_gate_in_place, sample_index, Counts, StateVector};
use rand::RngExt;
use rayon::prelude::*;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

/// Errors from calibration parsing/validation and emulation setup.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum NoiseError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("calibration lists no qubits")]
    EmptyQubits,
    #[error("qubit {index}: {message}")]
    BadQubit { index: usize, message: String },
    #[error("edge {a}-{b}: {message}")]
    BadEdge { a: usize, b: usize, message: String },
    #[error("layout maps {got} wires, circuit has {expected}")]
    LayoutLength { expected: usize, got: usize },
    #[error("layout repeats physical qubit {0}")]
    LayoutDuplicate(usize),
    #[error("physical qubit {0} is not in the calibration")]
    UnknownQubit(usize),
    #[error("no calibration edge between physical qubits {0} and {1}")]
    MissingEdge(usize, usize),
}

/// Per-qubit calibration record.
#[derive(Debug, Clone, PartialEq)]
pub struct QubitCal {
    pub index: usize,
    pub readout_error: f64,
    pub t1: f64,
    pub t2: f64,
}

/// Per-CNOT-edge calibration record. Edges are undirected.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeCal {
    pub a: usize,
    pub b: usize,
    pub cnot_error: f64,
    pub duration: f64,
}

/// Device snapshot: qubit and edge records plus the single-qubit gate time.
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub qubits: Vec<QubitCal>,
    pub edges: Vec<EdgeCal>,
    pub single_qubit_duration: f64,
}

impl Calibration {
    pub fn qubit(&self, index: usize) -> Option<&QubitCal> {
        self.qubits.iter().find(|q| q.index == index)
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<&EdgeCal> {
        self.edges.iter().find(|e| (e.a, e.b) == (a, b) || (e.a, e.b) == (b, a))
    }

    pub fn validate(&self) -> Result<(), NoiseError> {
        if self.qubits.is_empty() {
            return Err(NoiseError::EmptyQubits);
        }
        let mut seen = std::collections::BTreeSet::new();
        for q in &self.qubits {
            if !seen.insert(q.index) {
                return Err(NoiseError::BadQubit {
                    index: q.index,
                    message: "listed twice".into(),
                });
            }
            if !(0.0..=1.0).contains(&q.readout_error) {
                return Err(NoiseError::BadQubit {
                    index: q.index,
                    message: format!("readout error {} outside [0, 1]", q.readout_error),
                });
            }
            for (name, value) in [("t1", q.t1), ("t2", q.t2)] {
                if value <= 0.0 || value.is_nan() {
                    return Err(NoiseError::BadQubit {
                        index: q.index,
                        message: format!("{name} must be positive, got {value}"),
                    });
                }
            }
        }
        for e in &self.edges {
            if !seen.contains(&e.a) || !seen.contains(&e.b) || e.a == e.b {
                return Err(NoiseError::BadEdge {
                    a: e.a,
                    b: e.b,
                    message: "endpoints must be two distinct listed qubits".into(),
                });
            }
            if !(0.0..=1.0).contains(&e.cnot_error) {
                return Err(NoiseError::BadEdge {
                    a: e.a,
                    b: e.b,
                    message: format!("CNOT error {} outside [0, 1]", e.cnot_error),
                });
            }
            if e.duration <= 0.0 || e.duration.is_nan() {
                return Err(NoiseError::BadEdge {
                    a: e.a,
                    b: e.b,
                    message: format!("duration must be positive, got {}", e.duration),
                });
            }
        }
        if self.single_qubit_duration <= 0.0 || self.single_qubit_duration.is_nan() {
            return Err(NoiseError::Parse {
                line: 0,
                message: "single-qubit duration must be positive".into(),
            });
        }
        Ok(())
    }

    /// Text form; [`load_calibration`] reads it back bit-exactly.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "single_duration {}", self.single_qubit_duration);
        for q in &self.qubits {
            let _ = writeln!(
                s,
                "qubit {} readout {} t1 {} t2 {}",
                q.index, q.readout_error, q.t1, q.t2
            );
        }
        for e in &self.edges {
            let _ = writeln!(s, "edge {} {} cnot {} duration {}", e.a, e.b, e.cnot_error, e.duration);
        }
        s
    }
}

fn parse_field<T: std::str::FromStr>(
    tokens: &mut std::str::SplitWhitespace,
    line: usize,
    what: &str,
) -> Result<T, NoiseError> {
    let token = tokens
        .next()
        .ok_or_else(|| NoiseError::Parse { line, message: format!("missing {what}") })?;
    token.parse().map_err(|_| NoiseError::Parse { line, message: format!("bad {what} {token:?}") })
}

fn expect_label(
    tokens: &mut std::str::SplitWhitespace,
    line: usize,
    label: &str,
) -> Result<(), NoiseError> {
    match tokens.next() {
        Some(t) if t == label => Ok(()),
        other => Err(NoiseError::Parse {
            line,
            message: format!("expected label {label:?}, got {other:?}"),
        }),
    }
}

/// Parses the labeled-record calibration format written by
/// [`Calibration::to_text`] and validates the result.
pub fn load_calibration(text: &str) -> Result<Calibration, NoiseError> {
    let mut qubits = Vec::new();
    let mut edges = Vec::new();
    let mut single_qubit_duration = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let mut tokens = trimmed.split_whitespace();
        match tokens.next().unwrap() {
            "single_duration" => {
                single_qubit_duration = Some(parse_field(&mut tokens, line, "duration")?);
            }
            "qubit" => {
                let index = parse_field(&mut tokens, line, "qubit index")?;
                expect_label(&mut tokens, line, "readout")?;
                let readout_error = parse_field(&mut tokens, line, "readout error")?;
                expect_label(&mut tokens, line, "t1")?;
                let t1 = parse_field(&mut tokens, line, "t1")?;
                expect_label(&mut tokens, line, "t2")?;
                let t2 = parse_field(&mut tokens, line, "t2")?;
                qubits.push(QubitCal { index, readout_error, t1, t2 });
            }
            "edge" => {
                let a = parse_field(&mut tokens, line, "edge endpoint")?;
                let b = parse_field(&mut tokens, line, "edge endpoint")?;
                expect_label(&mut tokens, line, "cnot")?;
                let cnot_error = parse_field(&mut tokens, line, "CNOT error")?;
                expect_label(&mut tokens, line, "duration")?;
                let duration = parse_field(&mut tokens, line, "duration")?;
                edges.push(EdgeCal { a, b, cnot_error, duration });
            }
            other => {
                return Err(NoiseError::Parse {
                    line,
                    message: format!("unknown record kind {other:?}"),
                });
            }
        }
        if let Some(extra) = tokens.next() {
            return Err(NoiseError::Parse { line, message: format!("trailing token {extra:?}") });
        }
    }
    let calibration = Calibration {
        qubits,
        edges,
        single_qubit_duration: single_qubit_duration.ok_or(NoiseError::Parse {
            line: 0,
            message: "missing single_duration record".into(),
        })?,
    };
    calibration.validate()?;
    Ok(calibration)
}

/// Which error channels the emulation applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Channels {
    pub cnot_depolarizing: bool,
    pub readout: bool,
    pub dephasing: bool,
}

impl Channels {
    pub fn all() -> Channels {
        Channels { cnot_depolarizing: true, readout: true, dephasing: true }
    }

    pub fn none() -> Channels {
        Channels { cnot_depolarizing: false, readout: false, dephasing: false }
    }
}

/// A calibration with a channel selection, ready to emulate.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    pub calibration: Calibration,
    pub channels: Channels,
}

/// A noise model paired with the physical-qubit layout to run on.
#[derive(Debug, Clone, Copy)]
pub struct Emulation<'a> {
    pub model: &'a NoiseModel,
    pub layout: &'a [usize],
}

/// Per-gate noise plan: phase-flip probabilities for each touched wire in
/// operand order, plus the depolarizing probability for CNOTs.
struct GateNoise {
    dephase: Vec<(usize, f64)>,
    depolarize: Option<f64>,
}

fn compile_noise(
    circuit: &Circuit,
    layout: &[usize],
    noise: &NoiseModel,
) -> Result<(Vec<GateNoise>, Vec<f64>), NoiseError> {
    let cal = &noise.calibration;
    cal.validate()?;
    if layout.len() != circuit.n_qubits() {
        return Err(NoiseError::LayoutLength { expected: circuit.n_qubits(), got: layout.len() });
    }
    let mut seen = std::collections::BTreeSet::new();
    for &phys in layout {
        if cal.qubit(phys).is_none() {
            return Err(NoiseError::UnknownQubit(phys));
        }
        if !seen.insert(phys) {
            return Err(NoiseError::LayoutDuplicate(phys));
        }
    }
    let dephase_p = |wire: usize, duration: f64| -> f64 {
        if !noise.channels.dephasing {
            return 0.0;
        }
        let t2 = cal.qubit(layout[wire]).expect("layout checked").t2;
        (1.0 - (-duration / t2).exp()) / 2.0
    };
    let mut plan = Vec::with_capacity(circuit.len());
    for gate in circuit.gates() {
        let noise_for = match gate {
            Gate::Cnot(c, t) => {
                let edge = cal
                    .edge(layout[*c], layout[*t])
                    .ok_or(NoiseError::MissingEdge(layout[*c], layout[*t]))?;
                GateNoise {
                    dephase: vec![(*c, dephase_p(*c, edge.duration)), (*t, dephase_p(*t, edge.duration))],
                    depolarize: noise.channels.cnot_depolarizing.then_some(edge.cnot_error),
                }
            }
            single => {
                let wire = single.qubits().next().expect("single-qubit gate");
                GateNoise {
                    dephase: vec![(wire, dephase_p(wire, cal.single_qubit_duration))],
                    depolarize: None,
                }
            }
        };
        plan.push(noise_for);
    }
    let readout: Vec<f64> = layout
        .iter()
        .map(|&phys| {
            if noise.channels.readout {
                cal.qubit(phys).expect("layout checked").readout_error
            } else {
                0.0
            }
        })
        .collect();
    Ok((plan, readout))
}

type PauliCtor = Option<fn(usize) -> Gate>;
const PAULIS: [PauliCtor; 4] = [None, Some(Gate::X), Some(Gate::Y), Some(Gate::Z)];

fn run_trajectory(
    circuit: &Circuit,
    plan: &[GateNoise],
    readout: &[f64],
    seed: u64,
    shot: u64,
) -> usize {
    let n = circuit.n_qubits();
    let mut rng = stream_rng(seed, shot);
    let mut state = StateVector::basis_state(n, 0);
    for (gate, noise_for) in circuit.gates().iter().zip(plan) {
        apply_gate_in_place(&mut state, gate);
        for &(wire, p) in &noise_for.dephase {
            if p > 0.0 && rng.random_bool(p) {
                apply_gate_in_place(&mut state, &Gate::Z(wire));
            }
        }
        if let (Some(p), Gate::Cnot(c, t)) = (noise_for.depolarize, gate) {
            if p > 0.0 && rng.random_bool(p) {
                let pick = rng.random_range(0..15usize) + 1;
                let (on_control, on_target) = (PAULIS[pick / 4], PAULIS[pick % 4]);
                if let Some(pauli) = on_control {
                    apply_gate_in_place(&mut state, &pauli(*c));
                }
                if let Some(pauli) = on_target {
                    apply_gate_in_place(&mut state, &pauli(*t));
                }
            }
        }
    }
    let u: f64 = rng.random();
    let mut index = sample_index(&state, u);
    for (wire, &p) in readout.iter().enumerate() {
        if p > 0.0 && rng.random_bool(p) {
            index ^= 1 << (n - 1 - wire);
        }
    }
    index
}

/// Emulates `shots` noisy executions of `circuit` on the physical qubits
/// named by `layout` (wire w runs on physical qubit layout[w]).
///
/// The result is reproducible from `seed` and independent of the rayon
/// thread count, because shot k depends only on stream k and tallies merge
/// commutatively.
pub fn noisy_counts(
    circuit: &Circuit,
    layout: &[usize],
    noise: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<Counts, NoiseError> {
    let (plan, readout) = compile_noise(circuit, layout, noise)?;
    let table = (0..shots)
        .into_par_iter()
        .fold(BTreeMap::<usize, u64>::new, |mut acc, shot| {
            let index = run_trajectory(circuit, &plan, &readout, seed, shot);
            *acc.entry(index).or_insert(0) += 1;
            acc
        })
        .reduce(BTreeMap::new, |mut a, b| {
            for (k, v) in b {
                *a.entry(k).or_insert(0) += v;
            }
            a
        });
    let mut counts = Counts::new(circuit.n_qubits());
    for (index, tally) in table {
        counts.record_many(index, tally);
    }
    Ok(counts)
}
