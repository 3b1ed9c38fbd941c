//! Gate-level circuit representation: the device-native gate set, circuit
//! composition, inversion, and single-qubit gate fusion.
//!
//! Gates are stored in application order: the first gate in the list acts on
//! the state first. The matrix conventions are
//!
//! - Rα(θ) = exp(−iθσα/2) for α ∈ {x, y, z},
//! - U3(θ,φ,λ) = [[cos(θ/2), −e^{iλ}sin(θ/2)], [e^{iφ}sin(θ/2), e^{i(λ+φ)}cos(θ/2)]],
//! - U1(λ) = U3(0,0,λ) and U2(φ,λ) = U3(π/2,φ,λ),
//!
//! and qubit 0 is the most significant bit of a basis-state index. Global
//! phase is unobservable; every equivalence contract in this module is "up to
//! global phase".

use nalgebra::Matrix2;
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::fmt;
use thiserror::Error;

/// One gate from the device-native set, with its qubit operands and angles.
#[derive(Debug, Clone, PartialEq)]
pub enum Gate {
    X(usize),
    Y(usize),
    Z(usize),
    H(usize),
    S(usize),
    Sdg(usize),
    T(usize),
    Rx(usize, f64),
    Ry(usize, f64),
    Rz(usize, f64),
    U1(usize, f64),
    U2(usize, f64, f64),
    U3(usize, f64, f64, f64),
    /// Controlled-NOT; fields are (control, target).
    Cnot(usize, usize),
}

impl Gate {
    /// Qubits the gate acts on, in operand order (control before target).
    pub fn qubits(&self) -> impl Iterator<Item = usize> + '_ {
        use Gate::*;
        let (first, second) = match *self {
            X(q) | Y(q) | Z(q) | H(q) | S(q) | Sdg(q) | T(q) | Rx(q, _) | Ry(q, _)
            | Rz(q, _) | U1(q, _) | U2(q, _, _) | U3(q, _, _, _) => (q, None),
            Cnot(c, t) => (c, Some(t)),
        };
        std::iter::once(first).chain(second)
    }

    /// Adjoint gate, expressed within the same gate set (T† becomes U1(−π/4)).
    pub fn adjoint(&self) -> Gate {
        use Gate::*;
        match *self {
            X(q) => X(q),
            Y(q) => Y(q),
            Z(q) => Z(q),
            H(q) => H(q),
            S(q) => Sdg(q),
            Sdg(q) => S(q),
            T(q) => U1(q, -FRAC_PI_4),
            Rx(q, t) => Rx(q, -t),
            Ry(q, t) => Ry(q, -t),
            Rz(q, t) => Rz(q, -t),
            U1(q, l) => U1(q, -l),
            U2(q, p, l) => U3(q, -FRAC_PI_2, -l, -p),
            U3(q, t, p, l) => U3(q, -t, -l, -p),
            Cnot(c, t) => Cnot(c, t),
        }
    }

    /// 2×2 matrix of a single-qubit gate; `None` for CNOT.
    pub fn single_qubit_matrix(&self) -> Option<Matrix2<Complex64>> {
        use Gate::*;
        let re = |x: f64| Complex64::new(x, 0.0);
        let im = |x: f64| Complex64::new(0.0, x);
        let cis = |x: f64| Complex64::new(x.cos(), x.sin());
        let m = match *self {
            X(_) => Matrix2::new(re(0.0), re(1.0), re(1.0), re(0.0)),
            Y(_) => Matrix2::new(re(0.0), im(-1.0), im(1.0), re(0.0)),
            Z(_) => Matrix2::new(re(1.0), re(0.0), re(0.0), re(-1.0)),
            H(_) => {
                let h = re(std::f64::consts::FRAC_1_SQRT_2);
                Matrix2::new(h, h, h, -h)
            }
            S(_) => Matrix2::new(re(1.0), re(0.0), re(0.0), im(1.0)),
            Sdg(_) => Matrix2::new(re(1.0), re(0.0), re(0.0), im(-1.0)),
            T(_) => Matrix2::new(re(1.0), re(0.0), re(0.0), cis(FRAC_PI_4)),
            Rx(_, t) => {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                Matrix2::new(re(c), im(-s), im(-s), re(c))
            }
            Ry(_, t) => {
                let (c, s) = ((t / 2.0).cos(), (t / 2.0).sin());
                Matrix2::new(re(c), re(-s), re(s), re(c))
            }
            Rz(_, t) => Matrix2::new(cis(-t / 2.0), re(0.0), re(0.0), cis(t / 2.0)),
            U1(_, l) => Matrix2::new(re(1.0), re(0.0), re(0.0), cis(l)),
            U2(_, p, l) => u3_matrix(FRAC_PI_2, p, l),
            U3(_, t, p, l) => u3_matrix(t, p, l),
            Cnot(_, _) => return None,
        };
        Some(m)
    }
}

fn u3_matrix(theta: f64, phi: f64, lambda: f64) -> Matrix2<Complex64> {
    let (c, s) = ((theta / 2.0).cos(), (theta / 2.0).sin());
    let cis = |x: f64| Complex64::new(x.cos(), x.sin());
    Matrix2::new(
        Complex64::new(c, 0.0),
        -cis(lambda) * s,
        cis(phi) * s,
        cis(lambda + phi) * c,
    )
}

/// Recovers (θ, φ, λ) with u ∝ U3(θ,φ,λ) up to global phase.
///
/// θ ∈ [0, π]; the diagonal (θ≈0) and anti-diagonal (θ≈π) cases fix the
/// redundant angle to zero.
fn u3_angles(u: &Matrix2<Complex64>) -> (f64, f64, f64) {
    let (u00, u01, u10, u11) = (u[(0, 0)], u[(0, 1)], u[(1, 0)], u[(1, 1)]);
    let theta = 2.0 * u10.norm().atan2(u00.norm());
    if u10.norm() < 1e-12 {
        // Diagonal: only λ+φ is defined; put it all in λ.
        (0.0, 0.0, (u11 / u00).arg())
    } else if u00.norm() < 1e-12 {
        // Anti-diagonal: only the angle sum is defined; put it all in λ.
        (std::f64::consts::PI, 0.0, (-u01 / u10).arg())
    } else {
        let delta = u00.arg();
        (theta, u10.arg() - delta, (-u01).arg() - delta)
    }
}

/// Errors from circuit construction, rewriting, or parsing.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    #[error("qubit {qubit} out of range for a {n_qubits}-qubit circuit")]
    QubitOutOfRange { qubit: usize, n_qubits: usize },
    #[error("CNOT control and target must be distinct (both {0})")]
    CnotQubitsEqual(usize),
    #[error("cannot extend a {dst}-qubit circuit with a {src}-qubit circuit")]
    ExtendTooWide { src: usize, dst: usize },
    #[error("remap table has {got} entries, circuit has {expected} qubits")]
    RemapLength { got: usize, expected: usize },
    #[error("remap table maps two qubits to {0}")]
    RemapCollision(usize),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Ordered list of gates over a fixed qubit register.
#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    n_qubits: usize,
    gates: Vec<Gate>,
}

impl Circuit {
    /// Empty circuit on `n_qubits` qubits.
    pub fn new(n_qubits: usize) -> Circuit {
        assert!(n_qubits >= 1, "circuit needs at least one qubit");
        Circuit { n_qubits, gates: Vec::new() }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    pub fn cnot_count(&self) -> usize {
        self.gates.iter().filter(|g| matches!(g, Gate::Cnot(_, _))).count()
    }

    fn validate(&self, gate: &Gate) -> Result<(), CircuitError> {
        for q in gate.qubits() {
            if q >= self.n_qubits {
                return Err(CircuitError::QubitOutOfRange { qubit: q, n_qubits: self.n_qubits });
            }
        }
        if let Gate::Cnot(c, t) = gate {
            if c == t {
                return Err(CircuitError::CnotQubitsEqual(*c));
            }
        }
        Ok(())
    }

    /// Appends in place; the mutable counterpart of [`Circuit::append`].
    pub fn push(&mut self, gate: Gate) -> Result<(), CircuitError> {
        self.validate(&gate)?;
        self.gates.push(gate);
        Ok(())
    }

    /// New circuit with `gate` at the end; `self` is unchanged.
    pub fn append(&self, gate: Gate) -> Result<Circuit, CircuitError> {
        let mut out = self.clone();
        out.push(gate)?;
        Ok(out)
    }

    /// Appends all gates of `other`, which may act on a narrower register.
    pub fn extend(&mut self, other: &Circuit) -> Result<(), CircuitError> {
        if other.n_qubits > self.n_qubits {
            return Err(CircuitError::ExtendTooWide { src: other.n_qubits, dst: self.n_qubits });
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    /// Copy of the circuit on a `n_qubits`-wide register with qubit `i`
    /// renamed to `map[i]`.
    pub fn remap(&self, n_qubits: usize, map: &[usize]) -> Result<Circuit, CircuitError> {
        if map.len() != self.n_qubits {
            return Err(CircuitError::RemapLength { got: map.len(), expected: self.n_qubits });
        }
        let mut seen = vec![false; n_qubits];
        for &m in map {
            if m >= n_qubits {
                return Err(CircuitError::QubitOutOfRange { qubit: m, n_qubits });
            }
            if seen[m] {
                return Err(CircuitError::RemapCollision(m));
            }
            seen[m] = true;
        }
        let mut out = Circuit::new(n_qubits);
        for gate in &self.gates {
            use Gate::*;
            let g = match *gate {
                X(q) => X(map[q]),
                Y(q) => Y(map[q]),
                Z(q) => Z(map[q]),
                H(q) => H(map[q]),
                S(q) => S(map[q]),
                Sdg(q) => Sdg(map[q]),
                T(q) => T(map[q]),
                Rx(q, t) => Rx(map[q], t),
                Ry(q, t) => Ry(map[q], t),
                Rz(q, t) => Rz(map[q], t),
                U1(q, l) => U1(map[q], l),
                U2(q, p, l) => U2(map[q], p, l),
                U3(q, t, p, l) => U3(map[q], t, p, l),
                Cnot(c, t) => Cnot(map[c], map[t]),
            };
            out.push(g)?;
        }
        Ok(out)
    }

    /// Adjoint circuit: gates reversed, each replaced by its adjoint, so
    /// that `inverse(c)` composed after `c` is the identity up to global
    /// phase.
    pub fn inverse(&self) -> Circuit {
        Circuit {
            n_qubits: self.n_qubits,
            gates: self.gates.iter().rev().map(Gate::adjoint).collect(),
        }
    }

    /// Collapses every maximal run of two or more single-qubit gates on one
    /// qubit (uninterrupted by a CNOT touching it) into a single U3.
    ///
    /// Lone single-qubit gates pass through unchanged, so the pass is
    /// structurally idempotent. The total unitary is preserved up to global
    /// phase and the CNOT count is untouched.
    pub fn fuse_single_qubit_runs(&self) -> Circuit {
        struct Pending {
            matrix: Matrix2<Complex64>,
            first_gate: Gate,
            run_len: usize,
        }
        let mut pending: Vec<Option<Pending>> = (0..self.n_qubits).map(|_| None).collect();
        let mut out = Circuit::new(self.n_qubits);
        let flush = |slot: &mut Option<Pending>, out: &mut Circuit| {
            if let Some(p) = slot.take() {
                let gate = if p.run_len == 1 {
                    p.first_gate
                } else {
                    let q = p.first_gate.qubits().next().expect("single-qubit gate");
                    let (t, phi, lambda) = u3_angles(&p.matrix);
                    Gate::U3(q, t, phi, lambda)
                };
                out.push(gate).expect("fused gate stays in range");
            }
        };
        for gate in &self.gates {
            match gate {
                Gate::Cnot(c, t) => {
                    let (c, t) = (*c, *t);
                    flush(&mut pending[c], &mut out);
                    flush(&mut pending[t], &mut out);
                    out.push(gate.clone()).expect("validated on input circuit");
                }
                single => {
                    let q = single.qubits().next().expect("single-qubit gate");
                    let m = single.single_qubit_matrix().expect("single-qubit gate");
                    match &mut pending[q] {
                        Some(p) => {
                            p.matrix = m * p.matrix;
                            p.run_len += 1;
                        }
                        slot @ None => {
                            *slot = Some(Pending { matrix: m, first_gate: single.clone(), run_len: 1 });
                        }
                    }
                }
            }
        }
        for slot in &mut pending {
            flush(slot, &mut out);
        }
        out
    }

    /// Line-oriented text form, one gate per line: `KIND q[,q2][;angle,...]`.
    pub fn to_text(&self) -> String {
        use fmt::Write;
        let mut s = String::new();
        for gate in &self.gates {
            use Gate::*;
            match *gate {
                X(q) => writeln!(s, "X {q}"),
                Y(q) => writeln!(s, "Y {q}"),
                Z(q) => writeln!(s, "Z {q}"),
                H(q) => writeln!(s, "H {q}"),
                S(q) => writeln!(s, "S {q}"),
                Sdg(q) => writeln!(s, "SDG {q}"),
                T(q) => writeln!(s, "T {q}"),
                Rx(q, t) => writeln!(s, "RX {q};{t}"),
                Ry(q, t) => writeln!(s, "RY {q};{t}"),
                Rz(q, t) => writeln!(s, "RZ {q};{t}"),
                U1(q, l) => writeln!(s, "U1 {q};{l}"),
                U2(q, p, l) => writeln!(s, "U2 {q};{p},{l}"),
                U3(q, t, p, l) => writeln!(s, "U3 {q};{t},{p},{l}"),
                Cnot(c, t) => writeln!(s, "CNOT {c},{t}"),
            }
            .expect("writing to String cannot fail");
        }
        s
    }

    /// Parses the [`Circuit::to_text`] format. Blank lines are ignored.
    pub fn from_text(n_qubits: usize, text: &str) -> Result<Circuit, CircuitError> {
        let mut out = Circuit::new(n_qubits);
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            let err = |message: String| CircuitError::Parse { line, message };
            let (kind, rest) = trimmed
                .split_once(char::is_whitespace)
                .ok_or_else(|| err(format!("expected `KIND operands`, got {trimmed:?}")))?;
            let rest = rest.trim();
            let (qubit_part, angle_part) = match rest.split_once(';') {
                Some((q, a)) => (q, Some(a)),
                None => (rest, None),
            };
            let qubits = parse_list::<usize>(qubit_part)
                .map_err(|field| err(format!("bad qubit index {field:?}")))?;
            let angles = match angle_part {
                Some(a) => parse_list::<f64>(a)
                    .map_err(|field| err(format!("bad angle {field:?}")))?,
                None => Vec::new(),
            };
            let arity = |n| {
                if qubits.len() == n {
                    Ok(())
                } else {
                    Err(err(format!("{kind} takes {n} qubit(s), got {}", qubits.len())))
                }
            };
            let nangles = |n| {
                if angles.len() == n {
                    Ok(())
                } else {
                    Err(err(format!("{kind} takes {n} angle(s), got {}", angles.len())))
                }
            };
            use Gate::*;
            let gate = match kind {
                "X" | "Y" | "Z" | "H" | "S" | "SDG" | "T" => {
                    arity(1)?;
                    nangles(0)?;
                    let q = qubits[0];
                    match kind {
                        "X" => X(q),
                        "Y" => Y(q),
                        "Z" => Z(q),
                        "H" => H(q),
                        "S" => S(q),
                        "SDG" => Sdg(q),
                        _ => T(q),
                    }
                }
                "RX" | "RY" | "RZ" | "U1" => {
                    arity(1)?;
                    nangles(1)?;
                    let (q, a) = (qubits[0], angles[0]);
                    match kind {
                        "RX" => Rx(q, a),
                        "RY" => Ry(q, a),
                        "RZ" => Rz(q, a),
                        _ => U1(q, a),
                    }
                }
                "U2" => {
                    arity(1)?;
                    nangles(2)?;
                    U2(qubits[0], angles[0], angles[1])
                }
                "U3" => {
                    arity(1)?;
                    nangles(3)?;
                    U3(qubits[0], angles[0], angles[1], angles[2])
                }
                "CNOT" => {
                    arity(2)?;
                    nangles(0)?;
                    Cnot(qubits[0], qubits[1])
                }
                other => return Err(err(format!("unknown gate kind {other:?}"))),
            };
            out.push(gate).map_err(|e| err(e.to_string()))?;
        }
        Ok(out)
    }
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, String> {
    s.split(',')
        .map(|f| f.trim().parse::<T>().map_err(|_| f.trim().to_string()))
        .collect()
}

/// Measurement axis for [`basis_change`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
}

/// Direction of a basis-change rotation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Forward,
    Inverse,
}

/// CNOT with control and target exchanged relative to the physical gate.
///
/// Emits H on both qubits, CNOT(control, target), then H on both qubits; the
/// resulting unitary is CNOT(target, control). This is the standard trick
/// for devices whose native CNOT only points one way along an edge.
pub fn reversed_cnot(control: usize, target: usize) -> Circuit {
    assert_ne!(control, target, "CNOT qubits must be distinct");
    let mut c = Circuit::new(control.max(target) + 1);
    for gate in [
        Gate::H(control),
        Gate::H(target),
        Gate::Cnot(control, target),
        Gate::H(control),
        Gate::H(target),
    ] {
        c.push(gate).expect("qubits in range by construction");
    }
    c
}

/// Rotation mapping the measurement axis onto Z.
///
/// Forward X is [H] (self-inverse); forward Y is [H, S, H] with inverse
/// [H, S†, H]. "Forward" is what gets appended before a Z measurement:
/// conjugating Z as U†ZU with the forward unitary yields the named axis, so
/// applying the forward gates to the state and measuring Z measures X or Y.
pub fn basis_change(axis: Axis, qubit: usize, direction: Direction) -> Circuit {
    let mut c = Circuit::new(qubit + 1);
    let gates: &[Gate] = match (axis, direction) {
        (Axis::X, _) => &[Gate::H(qubit)],
        (Axis::Y, Direction::Forward) => &[Gate::H(qubit), Gate::S(qubit), Gate::H(qubit)],
        (Axis::Y, Direction::Inverse) => &[Gate::H(qubit), Gate::Sdg(qubit), Gate::H(qubit)],
    };
    for gate in gates {
        c.push(gate.clone()).expect("qubit in range by construction");
    }
    c
}
