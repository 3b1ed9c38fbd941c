//! Exact state-vector execution, the continuous-time ED oracle, and shot
//! sampling.
//!
//! Amplitude indexing follows the crate convention: qubit 0 is the most
//! significant bit, so basis index i assigns qubit q the bit
//! `(i >> (n−1−q)) & 1` and a bitstring key reads site 1 first. Gate
//! application updates amplitude pairs in place; no tolerance is applied
//! anywhere in the kernel, so circuits act exactly (up to f64 roundoff).

use crate::circuit::{Circuit, Gate};
use crate::model::{self, ModelParams, ED_MAX_SITES};
use crate::rng::stream_rng;
use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;
use rand::RngExt;
use std::collections::{BTreeMap, HashMap};
use thiserror::Error;

/// Full-unitary extraction is refused above this width (2^10 columns).
pub const UNITARY_MAX_QUBITS: usize = 10;

/// Errors from simulation and counts handling.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("state has {state} qubits but circuit expects {circuit}")]
    WidthMismatch { state: usize, circuit: usize },
    #[error("unitary extraction is capped at {UNITARY_MAX_QUBITS} qubits, got {0}")]
    UnitaryCapExceeded(usize),
    #[error("exact diagonalization is capped at {ED_MAX_SITES} sites, got {0}")]
    EdCapExceeded(usize),
    #[error("counts have {a} bits, expected {b}")]
    BitWidthMismatch { a: usize, b: usize },
    #[error("invalid bitstring key {0:?}")]
    BadKey(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// 2^N complex amplitudes of an N-qubit pure state.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_qubits: usize,
    amps: Vec<Complex64>,
}

impl StateVector {
    /// Computational basis state |index⟩.
    pub fn basis_state(n_qubits: usize, index: usize) -> StateVector {
        assert!(n_qubits >= 1, "state needs at least one qubit");
        assert!(index < 1usize << n_qubits, "basis index out of range");
        let mut amps = vec![Complex64::ZERO; 1 << n_qubits];
        amps[index] = Complex64::ONE;
        StateVector { n_qubits, amps }
    }

    /// State from explicit amplitudes (length must be a power of two).
    pub fn from_amplitudes(amps: Vec<Complex64>) -> StateVector {
        let n_qubits = amps.len().trailing_zeros() as usize;
        assert!(amps.len() >= 2 && amps.len() == 1 << n_qubits, "length must be 2^N");
        StateVector { n_qubits, amps }
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Probability of measuring basis state `index`.
    pub fn prob_of_basis(&self, index: usize) -> f64 {
        self.amps[index].norm_sqr()
    }

    /// ⟨σᶻ⟩ of qubit `q` (0-based).
    pub fn expect_z(&self, q: usize) -> f64 {
        let mask = 1usize << (self.n_qubits - 1 - q);
        self.amps
            .iter()
            .enumerate()
            .map(|(i, a)| if i & mask == 0 { a.norm_sqr() } else { -a.norm_sqr() })
            .sum()
    }

    /// ⟨σᶻ_a σᶻ_b⟩ for qubits `a`, `b` (0-based).
    pub fn expect_zz(&self, a: usize, b: usize) -> f64 {
        let ma = 1usize << (self.n_qubits - 1 - a);
        let mb = 1usize << (self.n_qubits - 1 - b);
        self.amps
            .iter()
            .enumerate()
            .map(|(i, amp)| {
                let sign = ((i & ma != 0) as u32 + (i & mb != 0) as u32) % 2;
                if sign == 0 {
                    amp.norm_sqr()
                } else {
                    -amp.norm_sqr()
                }
            })
            .sum()
    }
}

fn apply_single(amps: &mut [Complex64], n: usize, q: usize, m: &Matrix2<Complex64>) {
    let dist = 1usize << (n - 1 - q);
    let (m00, m01, m10, m11) = (m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)]);
    let mut base = 0;
    while base < amps.len() {
        for i in base..base + dist {
            let j = i + dist;
            let (a, b) = (amps[i], amps[j]);
            amps[i] = m00 * a + m01 * b;
            amps[j] = m10 * a + m11 * b;
        }
        base += 2 * dist;
    }
}

fn apply_cnot(amps: &mut [Complex64], n: usize, control: usize, target: usize) {
    let cmask = 1usize << (n - 1 - control);
    let tmask = 1usize << (n - 1 - target);
    for i in 0..amps.len() {
        if i & cmask != 0 && i & tmask == 0 {
            amps.swap(i, i | tmask);
        }
    }
}

pub(crate) fn apply_gate_in_place(state: &mut StateVector, gate: &Gate) {
    match gate {
        Gate::Cnot(c, t) => apply_cnot(&mut state.amps, state.n_qubits, *c, *t),
        single => {
            let m = single.single_qubit_matrix().expect("non-CNOT gates are single-qubit");
            let q = single.qubits().next().expect("single-qubit gate");
            apply_single(&mut state.amps, state.n_qubits, q, &m);
        }
    }
}

/// Runs `circuit` on `state` in place.
pub fn apply_circuit_in_place(state: &mut StateVector, circuit: &Circuit) -> Result<(), SimError> {
    if state.n_qubits != circuit.n_qubits() {
        return Err(SimError::WidthMismatch { state: state.n_qubits, circuit: circuit.n_qubits() });
    }
    for gate in circuit.gates() {
        apply_gate_in_place(state, gate);
    }
    Ok(())
}

/// Runs `circuit` on a copy of `state`; norms are preserved to roundoff.
pub fn apply_circuit(state: &StateVector, circuit: &Circuit) -> Result<StateVector, SimError> {
    let mut out = state.clone();
    apply_circuit_in_place(&mut out, circuit)?;
    Ok(out)
}

/// Max-norm distance between `a` and `b` after aligning the global phase
/// of `a` to `b` by their trace overlap. If the overlap is numerically
/// zero the matrices are not phase-related and the raw distance returns.
pub fn phase_aligned_distance(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
    let overlap: Complex64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() < 1e-12 { Complex64::new(1.0, 0.0) } else { overlap / overlap.norm() };
    a.iter().zip(b.iter()).map(|(x, y)| (x * phase - y).norm()).fold(0.0, f64::max)
}

/// Full unitary of a circuit, column k = circuit applied to |k⟩.
pub fn unitary_of(circuit: &Circuit) -> Result<DMatrix<Complex64>, SimError> {
    let n = circuit.n_qubits();
    if n > UNITARY_MAX_QUBITS {
        return Err(SimError::UnitaryCapExceeded(n));
    }
    let dim = 1usize << n;
    let mut m = DMatrix::zeros(dim, dim);
    for k in 0..dim {
        let col = apply_circuit(&StateVector::basis_state(n, k), circuit)?;
        for (r, amp) in col.amplitudes().iter().enumerate() {
            m[(r, k)] = *amp;
        }
    }
    Ok(m)
}

struct SectorEigen {
    indices: Vec<usize>,
    vals: DVector<f64>,
    vecs: DMatrix<f64>,
}

/// Continuous-time evolution oracle e^{−iHt} with cached per-sector
/// eigendecompositions.
///
/// H conserves total σᶻ, so the dense problem splits into popcount sectors;
/// only sectors the state actually occupies are decomposed, and repeated
/// `evolve` calls (time grids) reuse the cache.
pub struct EdEvolver {
    params: ModelParams,
    sectors: HashMap<u32, SectorEigen>,
}

impl EdEvolver {
    pub fn new(params: &ModelParams) -> Result<EdEvolver, SimError> {
        if params.n_sites > ED_MAX_SITES {
            return Err(SimError::EdCapExceeded(params.n_sites));
        }
        Ok(EdEvolver { params: params.clone(), sectors: HashMap::new() })
    }

    fn sector(&mut self, n_down: u32) -> &SectorEigen {
        let params = &self.params;
        self.sectors.entry(n_down).or_insert_with(|| {
            let indices = model::sector_indices(params.n_sites, n_down);
            let h = model::hamiltonian_sector(params, &indices);
            let eig = h.symmetric_eigen();
            SectorEigen { indices, vals: eig.eigenvalues, vecs: eig.eigenvectors }
        })
    }

    /// |ψ(t)⟩ = e^{−iHt}|ψ⟩ via the eigenbasis.
    pub fn evolve(&mut self, state: &StateVector, t: f64) -> Result<StateVector, SimError> {
        if state.n_qubits != self.params.n_sites {
            return Err(SimError::WidthMismatch {
                state: state.n_qubits,
                circuit: self.params.n_sites,
            });
        }
        let n = state.n_qubits;
        let mut present = vec![false; n + 1];
        for (i, a) in state.amps.iter().enumerate() {
            if a.norm_sqr() > 0.0 {
                present[i.count_ones() as usize] = true;
            }
        }
        let mut out = vec![Complex64::ZERO; state.amps.len()];
        for n_down in 0..=n as u32 {
            if !present[n_down as usize] {
                continue;
            }
            let sec = self.sector(n_down);
            let dim = sec.indices.len();
            let mut xr = DVector::zeros(dim);
            let mut xi = DVector::zeros(dim);
            for (k, &idx) in sec.indices.iter().enumerate() {
                xr[k] = state.amps[idx].re;
                xi[k] = state.amps[idx].im;
            }
            let mut yr = sec.vecs.transpose() * xr;
            let mut yi = sec.vecs.transpose() * xi;
            for k in 0..dim {
                let theta = sec.vals[k] * t;
                let (c, s) = (theta.cos(), theta.sin());
                // Multiply the eigencoefficient by e^{−iθ}.
                let (re, im) = (yr[k], yi[k]);
                yr[k] = re * c + im * s;
                yi[k] = im * c - re * s;
            }
            yr = &sec.vecs * yr;
            yi = &sec.vecs * yi;
            for (k, &idx) in sec.indices.iter().enumerate() {
                out[idx] = Complex64::new(yr[k], yi[k]);
            }
        }
        Ok(StateVector { n_qubits: n, amps: out })
    }
}

/// One-shot e^{−iHt}|ψ⟩; build an [`EdEvolver`] instead for time grids.
pub fn exact_evolve(params: &ModelParams, state: &StateVector, t: f64) -> Result<StateVector, SimError> {
    EdEvolver::new(params)?.evolve(state, t)
}

/// Bitstring key of basis index `index`, site 1 first.
pub fn index_to_key(index: usize, n_bits: usize) -> String {
    (0..n_bits)
        .map(|q| if index >> (n_bits - 1 - q) & 1 == 0 { '0' } else { '1' })
        .collect()
}

/// Total σᶻ of a bitstring key (number of 0s minus number of 1s).
pub fn sz_of_key(key: &str) -> i32 {
    key.chars().map(|c| if c == '0' { 1 } else { -1 }).sum()
}

/// Measured z-basis shot tallies: bitstring → occurrence count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts {
    n_bits: usize,
    shots: u64,
    table: BTreeMap<String, u64>,
}

impl Counts {
    pub fn new(n_bits: usize) -> Counts {
        assert!(n_bits >= 1, "counts need at least one bit");
        Counts { n_bits, shots: 0, table: BTreeMap::new() }
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn shots(&self) -> u64 {
        self.shots
    }

    /// Tallies in ascending bitstring order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> {
        self.table.iter().map(|(k, &v)| (k.as_str(), v))
    }

    pub fn get(&self, key: &str) -> u64 {
        self.table.get(key).copied().unwrap_or(0)
    }

    /// Records one shot on basis index `index`.
    pub fn record_index(&mut self, index: usize) {
        self.record_many(index, 1);
    }

    /// Records `count` shots on basis index `index`.
    pub fn record_many(&mut self, index: usize, count: u64) {
        *self.table.entry(index_to_key(index, self.n_bits)).or_insert(0) += count;
        self.shots += count;
    }

    /// Records a pre-formatted key after validating it.
    pub fn record_key(&mut self, key: &str, count: u64) -> Result<(), SimError> {
        if key.len() != self.n_bits || !key.chars().all(|c| c == '0' || c == '1') {
            return Err(SimError::BadKey(key.to_string()));
        }
        *self.table.entry(key.to_string()).or_insert(0) += count;
        self.shots += count;
        Ok(())
    }

    /// Adds all tallies of `other` into `self`. Addition is commutative, so
    /// any partition of shots merges to the same table.
    pub fn merge(&mut self, other: &Counts) -> Result<(), SimError> {
        if other.n_bits != self.n_bits {
            return Err(SimError::BitWidthMismatch { a: other.n_bits, b: self.n_bits });
        }
        for (k, v) in &other.table {
            *self.table.entry(k.clone()).or_insert(0) += v;
        }
        self.shots += other.shots;
        Ok(())
    }

    /// Text form: `bitstring count` per line, ascending bitstrings.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in &self.table {
            s.push_str(k);
            s.push(' ');
            s.push_str(&v.to_string());
            s.push('\n');
        }
        s
    }

    /// Parses the [`Counts::to_text`] format.
    pub fn from_text(n_bits: usize, text: &str) -> Result<Counts, SimError> {
        let mut counts = Counts::new(n_bits);
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() {
                continue;
            }
            let (key, count) = trimmed
                .split_once(char::is_whitespace)
                .ok_or_else(|| SimError::Parse {
                    line,
                    message: format!("expected `bitstring count`, got {trimmed:?}"),
                })?;
            let count: u64 = count.trim().parse().map_err(|_| SimError::Parse {
                line,
                message: format!("bad count {count:?}"),
            })?;
            counts.record_key(key, count).map_err(|e| SimError::Parse {
                line,
                message: e.to_string(),
            })?;
        }
        Ok(counts)
    }
}

/// First basis index whose cumulative probability exceeds u·‖ψ‖².
///
/// Accumulates in index order, exactly like [`sample_counts`], so the two
/// sampling paths agree bit for bit on the same state and draw.
pub(crate) fn sample_index(state: &StateVector, u: f64) -> usize {
    let total: f64 = state.amps.iter().map(|a| a.norm_sqr()).sum();
    let target = u * total;
    let mut acc = 0.0;
    for (i, a) in state.amps.iter().enumerate() {
        acc += a.norm_sqr();
        if acc > target {
            return i;
        }
    }
    state.amps.len() - 1
}

/// Draws `shots` i.i.d. z-basis samples from |ψ|².
///
/// Shot k consumes stream k of `seed`, so the result is independent of how
/// the shot loop is partitioned.
pub fn sample_counts(state: &StateVector, shots: u64, seed: u64) -> Counts {
    let mut cum = Vec::with_capacity(state.amps.len());
    let mut total = 0.0;
    for a in &state.amps {
        total += a.norm_sqr();
        cum.push(total);
    }
    let mut counts = Counts::new(state.n_qubits);
    for k in 0..shots {
        let u: f64 = stream_rng(seed, k).random();
        let idx = cum.partition_point(|&c| c <= u * total);
        counts.record_index(idx.min(state.amps.len() - 1));
    }
    counts
}

/// Von Neumann entropy (natural log) of the reduced state of sites 1..=cut.
///
/// Computed from the singular values of the amplitude matrix reshaped to
/// 2^cut × 2^(N−cut); the Schmidt coefficients are the singular values, so
/// no density matrix is ever formed.
pub fn entanglement_entropy(state: &StateVector, cut: usize) -> f64 {
    let n = state.n_qubits;
    assert!(cut >= 1 && cut < n, "cut must split the chain");
    let (rows, cols) = (1usize << cut, 1usize << (n - cut));
    let a = DMatrix::from_fn(rows, cols, |r, c| state.amps[(r << (n - cut)) | c]);
    let svd = a.svd(false, false);
    let mut s = 0.0;
    for sv in svd.singular_values.iter() {
        let p = sv * sv;
        if p > 1e-15 {
            s -= p * p.ln();
        }
    }
    s.max(0.0)
}
