//! Estimators for every measured quantity: site magnetization, half-chain
//! particle number, connected correlators, quantum Fisher information, the
//! three-qubit Mermin witness, the physical-sector fraction, and the
//! Loschmidt echo.
//!
//! Each counts-based estimator returns an [`Estimate`] whose standard error
//! comes from binomial or delta-method propagation of the per-shot
//! statistics; `_exact` variants evaluate the same quantity from a state
//! vector with zero error. Sites are 1-based throughout.

use crate::circuit::{basis_change, Axis, Circuit, Direction, Gate};
use crate::model::{initial_statevector, InitialState, ModelParams};
use crate::noise::{noisy_counts, Emulation, NoiseError};
use crate::sim::{apply_circuit, sample_counts, sz_of_key, Counts, SimError, StateVector};
use crate::trotter::{evolution_circuit, TrotterPlan};
use thiserror::Error;

/// Scale factor a in the entropy proxy S_vN ≈ F_Q/(a·N) · N = F_Q/a for the
/// half-chain comparison; the proxy plotted is (1/a)·F_Q = (5/32)·F_Q.
pub const QFI_ENTROPY_SCALE: f64 = 32.0 / 5.0;

/// A measured value with its standard error (0 for exact sources).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObsError {
    #[error("no shots recorded")]
    EmptyCounts,
    #[error("site {site} outside 1..={n_sites}")]
    SiteOutOfRange { site: usize, n_sites: usize },
    #[error("correlator needs two distinct sites, got {0} twice")]
    SameSite(usize),
    #[error("half-chain observable needs an even site count, got {0}")]
    OddSites(usize),
    #[error("{got} signs for {want} sites")]
    SignsLength { want: usize, got: usize },
    #[error("signs must be +1 or -1, got {0}")]
    BadSign(i32),
    #[error("witness counts must cover 3 qubits, got {0}")]
    NotThreeQubits(usize),
    #[error("initial state has {state} sites, model has {model}")]
    SiteCountMismatch { state: usize, model: usize },
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

fn check_site(counts_bits: usize, site: usize) -> Result<(), ObsError> {
    if site == 0 || site > counts_bits {
        return Err(ObsError::SiteOutOfRange { site, n_sites: counts_bits });
    }
    Ok(())
}

fn z_at(key: &str, site: usize) -> f64 {
    if key.as_bytes()[site - 1] == b'0' {
        1.0
    } else {
        -1.0
    }
}

/// Mean and variance of a per-shot statistic over the counts distribution.
///
/// Tally-weighted sums are divided once at the end, so a statistic that is
/// constant over the support comes out exact (zero variance).
fn shot_moments(counts: &Counts, f: impl Fn(&str) -> f64) -> Result<(f64, f64), ObsError> {
    if counts.shots() == 0 {
        return Err(ObsError::EmptyCounts);
    }
    let total = counts.shots() as f64;
    let (mut sum1, mut sum2) = (0.0, 0.0);
    for (key, tally) in counts.iter() {
        let w = f(key);
        sum1 += tally as f64 * w;
        sum2 += tally as f64 * w * w;
    }
    let (m1, m2) = (sum1 / total, sum2 / total);
    Ok((m1, (m2 - m1 * m1).max(0.0)))
}

/// ⟨σᶻ_j⟩ with binomial standard error.
pub fn magnetization(counts: &Counts, site: usize) -> Result<Estimate, ObsError> {
    check_site(counts.n_bits(), site)?;
    let (m, var) = shot_moments(counts, |key| z_at(key, site))?;
    Ok(Estimate { value: m, stderr: (var / counts.shots() as f64).sqrt() })
}

/// ⟨σᶻ_j⟩ from the state vector.
pub fn magnetization_exact(state: &StateVector, site: usize) -> Result<f64, ObsError> {
    check_site(state.n_qubits(), site)?;
    Ok(state.expect_z(site - 1))
}

/// Particle number on the left half: Σ_{j≤N/2} (⟨σᶻ_j⟩+1)/2.
pub fn n_half(counts: &Counts, n_sites: usize) -> Result<Estimate, ObsError> {
    if !n_sites.is_multiple_of(2) {
        return Err(ObsError::OddSites(n_sites));
    }
    check_site(counts.n_bits(), n_sites)?;
    let half = n_sites / 2;
    let left_sum = |key: &str| (1..=half).map(|j| z_at(key, j)).sum::<f64>();
    let (mean, var) = shot_moments(counts, left_sum)?;
    Ok(Estimate {
        value: (mean + half as f64) / 2.0,
        stderr: (var / counts.shots() as f64).sqrt() / 2.0,
    })
}

/// Exact-state version of [`n_half`].
pub fn n_half_exact(state: &StateVector, n_sites: usize) -> Result<f64, ObsError> {
    if !n_sites.is_multiple_of(2) {
        return Err(ObsError::OddSites(n_sites));
    }
    check_site(state.n_qubits(), n_sites)?;
    Ok((1..=n_sites / 2).map(|j| (state.expect_z(j - 1) + 1.0) / 2.0).sum())
}

/// Connected correlator C_jk = ⟨σᶻ_jσᶻ_k⟩ − ⟨σᶻ_j⟩⟨σᶻ_k⟩.
///
/// The standard error uses the delta method: the first-order fluctuation of
/// C is the per-shot statistic z_jz_k − ⟨z_k⟩z_j − ⟨z_j⟩z_k.
pub fn connected_correlator(counts: &Counts, j: usize, k: usize) -> Result<Estimate, ObsError> {
    check_site(counts.n_bits(), j)?;
    check_site(counts.n_bits(), k)?;
    if j == k {
        return Err(ObsError::SameSite(j));
    }
    // Canonical site order makes C_jk = C_kj exact, not just up to roundoff.
    let (j, k) = (j.min(k), j.max(k));
    let (mj, _) = shot_moments(counts, |key| z_at(key, j))?;
    let (mk, _) = shot_moments(counts, |key| z_at(key, k))?;
    let (mjk, _) = shot_moments(counts, |key| z_at(key, j) * z_at(key, k))?;
    let (_, var) =
        shot_moments(counts, |key| {
            z_at(key, j) * z_at(key, k) - mk * z_at(key, j) - mj * z_at(key, k)
        })?;
    Ok(Estimate { value: mjk - mj * mk, stderr: (var / counts.shots() as f64).sqrt() })
}

/// Exact-state version of [`connected_correlator`].
pub fn connected_correlator_exact(state: &StateVector, j: usize, k: usize) -> Result<f64, ObsError> {
    check_site(state.n_qubits(), j)?;
    check_site(state.n_qubits(), k)?;
    if j == k {
        return Err(ObsError::SameSite(j));
    }
    Ok(state.expect_zz(j - 1, k - 1) - state.expect_z(j - 1) * state.expect_z(k - 1))
}

fn check_signs(n_sites: usize, signs: &[i32]) -> Result<(), ObsError> {
    if signs.len() != n_sites {
        return Err(ObsError::SignsLength { want: n_sites, got: signs.len() });
    }
    if let Some(&bad) = signs.iter().find(|&&s| s != 1 && s != -1) {
        return Err(ObsError::BadSign(bad));
    }
    Ok(())
}

/// Quantum Fisher information of the collective operator W = Σ_j s_jσᶻ_j
/// for a pure state: F_Q = Var(W) = ⟨W²⟩ − ⟨W⟩².
///
/// The standard error of a variance is sqrt((μ₄ − μ₂²)/S) from the central
/// moments of the per-shot W.
pub fn qfi(counts: &Counts, signs: &[i32]) -> Result<Estimate, ObsError> {
    check_signs(counts.n_bits(), signs)?;
    if counts.shots() == 0 {
        return Err(ObsError::EmptyCounts);
    }
    let w_of = |key: &str| -> f64 {
        signs.iter().enumerate().map(|(i, &s)| s as f64 * z_at(key, i + 1)).sum()
    };
    let total = counts.shots() as f64;
    let (mut m1, mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0, 0.0);
    for (key, tally) in counts.iter() {
        let w = w_of(key);
        let t = tally as f64;
        m1 += t * w;
        m2 += t * w * w;
        m3 += t * w * w * w;
        m4 += t * w * w * w * w;
    }
    let (m1, m2, m3, m4) = (m1 / total, m2 / total, m3 / total, m4 / total);
    let var = (m2 - m1 * m1).max(0.0);
    let mu4 = m4 - 4.0 * m3 * m1 + 6.0 * m2 * m1 * m1 - 3.0 * m1.powi(4);
    let var_of_var = (mu4 - var * var).max(0.0);
    Ok(Estimate { value: var, stderr: (var_of_var / total).sqrt() })
}

/// Exact-state version of [`qfi`].
pub fn qfi_exact(state: &StateVector, signs: &[i32]) -> Result<f64, ObsError> {
    let n = state.n_qubits();
    check_signs(n, signs)?;
    let mut mean = 0.0;
    for (j, &s) in signs.iter().enumerate() {
        mean += s as f64 * state.expect_z(j);
    }
    let mut second = n as f64;
    for j in 0..n {
        for k in 0..n {
            if j != k {
                second += (signs[j] * signs[k]) as f64 * state.expect_zz(j, k);
            }
        }
    }
    Ok((second - mean * mean).max(0.0))
}

/// ⟨∏_j σᶻ_j⟩, the parity of all measured bits.
pub fn parity_expectation(counts: &Counts) -> Result<Estimate, ObsError> {
    let parity = |key: &str| if key.bytes().filter(|&b| b == b'1').count() % 2 == 0 { 1.0 } else { -1.0 };
    let (e, var) = shot_moments(counts, parity)?;
    Ok(Estimate { value: e, stderr: (var / counts.shots() as f64).sqrt() })
}

/// Exact-state version of [`parity_expectation`].
pub fn parity_expectation_exact(state: &StateVector) -> f64 {
    state
        .amplitudes()
        .iter()
        .enumerate()
        .map(|(i, a)| if i.count_ones() % 2 == 0 { a.norm_sqr() } else { -a.norm_sqr() })
        .sum()
}

/// Mermin witness |⟨XYY⟩ + ⟨YXY⟩ + ⟨YYX⟩ − ⟨XXX⟩| from four measured
/// bases. Classical bound 2, quantum maximum 4.
///
/// The stderr combines the four parity errors in quadrature and ignores
/// the magnitude nonlinearity, which is negligible away from 0.
pub fn mermin(
    counts_xxx: &Counts,
    counts_xyy: &Counts,
    counts_yxy: &Counts,
    counts_yyx: &Counts,
) -> Result<Estimate, ObsError> {
    let mut terms = [0.0; 4];
    let mut var_sum = 0.0;
    for (slot, counts) in [counts_xxx, counts_xyy, counts_yxy, counts_yyx].iter().enumerate() {
        if counts.n_bits() != 3 {
            return Err(ObsError::NotThreeQubits(counts.n_bits()));
        }
        let parity = parity_expectation(counts)?;
        terms[slot] = parity.value;
        var_sum += parity.stderr * parity.stderr;
    }
    let value = (terms[1] + terms[2] + terms[3] - terms[0]).abs();
    Ok(Estimate { value, stderr: var_sum.sqrt() })
}

/// Fraction of shots whose bitstring lies in the Σσᶻ = target_sz sector.
pub fn physical_fraction(counts: &Counts, target_sz: i32) -> Result<Estimate, ObsError> {
    let (p, var) =
        shot_moments(counts, |key| if sz_of_key(key) == target_sz { 1.0 } else { 0.0 })?;
    Ok(Estimate { value: p, stderr: (var / counts.shots() as f64).sqrt() })
}

/// Three-qubit GHZ preparation (|000⟩ + |111⟩)/√2.
pub fn ghz_circuit() -> Circuit {
    let mut c = Circuit::new(3);
    c.push(Gate::H(0)).expect("in range");
    c.push(Gate::Cnot(0, 1)).expect("in range");
    c.push(Gate::Cnot(1, 2)).expect("in range");
    c
}

/// Measurement words of the witness, in the order [XXX, XYY, YXY, YYX].
pub const MERMIN_WORDS: [[Axis; 3]; 4] = [
    [Axis::X, Axis::X, Axis::X],
    [Axis::X, Axis::Y, Axis::Y],
    [Axis::Y, Axis::X, Axis::Y],
    [Axis::Y, Axis::Y, Axis::X],
];

/// GHZ preparation followed by the basis rotation for each witness word;
/// measuring z afterwards estimates that word's correlator.
pub fn mermin_circuits() -> [Circuit; 4] {
    MERMIN_WORDS.map(|word| {
        let mut c = ghz_circuit();
        for (qubit, axis) in word.into_iter().enumerate() {
            c.extend(&basis_change(axis, qubit, Direction::Forward)).expect("three wires");
        }
        c
    })
}

/// Fraction of shots landing on one bitstring, with binomial stderr.
pub fn fraction_on_key(counts: &Counts, key: &str) -> Result<Estimate, ObsError> {
    if counts.shots() == 0 {
        return Err(ObsError::EmptyCounts);
    }
    let total = counts.shots() as f64;
    let p = counts.get(key) as f64 / total;
    Ok(Estimate { value: p, stderr: (p * (1.0 - p) / total).sqrt() })
}

/// Return probability of the forward-then-inverted evolution: compile the
/// plan's circuit, append its inverse, and measure the probability of
/// coming back to the initial bitstring.
///
/// Noiseless and with shots = 0 this evaluates the state vector exactly
/// (the answer is 1 up to roundoff); with shots it samples; with an
/// emulation attached it runs noisy trajectories of prep + echo.
pub fn loschmidt_echo(
    params: &ModelParams,
    plan: &TrotterPlan,
    init: &InitialState,
    emulation: Option<&Emulation>,
    shots: u64,
    seed: u64,
) -> Result<Estimate, ObsError> {
    if init.n_sites() != params.n_sites {
        return Err(ObsError::SiteCountMismatch { state: init.n_sites(), model: params.n_sites });
    }
    let forward = evolution_circuit(params, plan);
    let mut echo = forward.clone();
    echo.extend(&forward.inverse()).expect("same width");
    let key = init.bitstring_key();
    match emulation {
        Some(em) => {
            let mut full = init.prep_circuit();
            full.extend(&echo).expect("same width");
            let counts = noisy_counts(&full, em.layout, em.model, shots, seed)?;
            fraction_on_key(&counts, &key)
        }
        None => {
            let psi0 = initial_statevector(init, params.n_sites)?;
            let state = apply_circuit(&psi0, &echo)?;
            if shots == 0 {
                Ok(Estimate { value: state.prob_of_basis(init.basis_index()), stderr: 0.0 })
            } else {
                fraction_on_key(&sample_counts(&state, shots, seed), &key)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{build_case, CaseId};
    use crate::sim::exact_evolve;
    use crate::trotter::Scheme;
    use approx::assert_abs_diff_eq;

    fn counts_of(entries: &[(&str, u64)]) -> Counts {
        let mut counts = Counts::new(entries[0].0.len());
        for &(key, tally) in entries {
            counts.record_key(key, tally).unwrap();
        }
        counts
    }

    #[test]
    fn magnetization_of_pure_sectors() {
        let all_up = counts_of(&[("00", 10)]);
        let m = magnetization(&all_up, 1).unwrap();
        assert_eq!((m.value, m.stderr), (1.0, 0.0));

        let dw = initial_statevector(&InitialState::domain_wall(6).unwrap(), 6).unwrap();
        let counts = sample_counts(&dw, 100, 3);
        assert_eq!(magnetization(&counts, 1).unwrap().value, -1.0);
        assert_eq!(magnetization(&counts, 6).unwrap().value, 1.0);

        assert!(matches!(magnetization(&all_up, 3), Err(ObsError::SiteOutOfRange { .. })));
        assert!(matches!(magnetization(&Counts::new(2), 1), Err(ObsError::EmptyCounts)));
    }

    #[test]
    fn sampled_magnetization_matches_exact_within_stderr() {
        let params = build_case(CaseId::I, 6, 1.0, 0.0, 0.0, 0).unwrap();
        let psi0 = initial_statevector(&InitialState::domain_wall(6).unwrap(), 6).unwrap();
        let state = exact_evolve(&params, &psi0, 0.5).unwrap();
        let counts = sample_counts(&state, 8192, 17);
        let est = magnetization(&counts, 4).unwrap();
        let exact = magnetization_exact(&state, 4).unwrap();
        assert!(
            (est.value - exact).abs() < 3.0 * est.stderr,
            "estimate {} vs exact {exact} (stderr {})",
            est.value,
            est.stderr
        );
        assert!(est.stderr > 0.0 && est.stderr < 0.02);
    }

    #[test]
    fn n_half_counts_left_particles() {
        let dw = counts_of(&[("111000", 50)]);
        assert_eq!(n_half(&dw, 6).unwrap().value, 0.0);
        let up = counts_of(&[("000000", 50)]);
        assert_eq!(n_half(&up, 6).unwrap().value, 3.0);
        assert!(matches!(n_half(&up, 5), Err(ObsError::OddSites(5))));
    }

    #[test]
    fn correlator_vanishes_on_products_and_is_one_on_bell() {
        let neel = counts_of(&[("0101", 200)]);
        for j in 1..=4 {
            for k in 1..=4 {
                if j != k {
                    let c = connected_correlator(&neel, j, k).unwrap();
                    assert_eq!((c.value, c.stderr), (0.0, 0.0));
                }
            }
        }
        let bell = counts_of(&[("00", 4096), ("11", 4096)]);
        let c = connected_correlator(&bell, 1, 2).unwrap();
        assert_abs_diff_eq!(c.value, 1.0);
        assert!(matches!(connected_correlator(&bell, 2, 2), Err(ObsError::SameSite(2))));
    }

    #[test]
    fn correlator_is_symmetric_in_its_sites() {
        let counts = counts_of(&[("001", 13), ("010", 7), ("100", 19), ("111", 2)]);
        for (j, k) in [(1, 2), (1, 3), (2, 3)] {
            let a = connected_correlator(&counts, j, k).unwrap();
            let b = connected_correlator(&counts, k, j).unwrap();
            assert_eq!(a, b);
        }
    }

    #[test]
    fn qfi_vanishes_on_sector_eigenstates_and_products() {
        let product = counts_of(&[("0110", 100)]);
        assert_eq!(qfi(&product, &[1, 1, 1, 1]).unwrap().value, 0.0);

        // Any counts supported on one S_z sector give zero variance for
        // uniform signs, the conservation statement.
        let sector = counts_of(&[("0011", 40), ("0101", 30), ("1010", 30)]);
        let f = qfi(&sector, &[1, 1, 1, 1]).unwrap();
        assert_eq!((f.value, f.stderr), (0.0, 0.0));
    }

    #[test]
    fn qfi_of_ghz_reaches_heisenberg_scaling() {
        let ghz = apply_circuit(&StateVector::basis_state(3, 0), &ghz_circuit()).unwrap();
        let f = qfi_exact(&ghz, &[1, 1, 1]).unwrap();
        assert_abs_diff_eq!(f, 9.0, epsilon = 1e-12);

        // Sampled at finite shots the estimate stays within its stderr.
        let counts = sample_counts(&ghz, 8192, 19);
        let est = qfi(&counts, &[1, 1, 1]).unwrap();
        assert!((est.value - 9.0).abs() < 4.0 * est.stderr + 1e-9);
    }

    #[test]
    fn qfi_exceeds_shot_noise_after_neel_quench() {
        let params = build_case(CaseId::I, 6, 1.0, 0.0, 0.0, 0).unwrap();
        let psi0 = initial_statevector(&InitialState::neel(6), 6).unwrap();
        let state = exact_evolve(&params, &psi0, 1.0).unwrap();
        let signs = [1, 1, 1, -1, -1, -1];
        let f = qfi_exact(&state, &signs).unwrap();
        assert!(f / 6.0 > 1.0, "F_Q/N = {}", f / 6.0);
    }

    #[test]
    fn mermin_is_maximal_on_ghz_and_zero_on_products() {
        let mut parities = [0.0; 4];
        for (slot, circuit) in mermin_circuits().iter().enumerate() {
            let state = apply_circuit(&StateVector::basis_state(3, 0), circuit).unwrap();
            parities[slot] = parity_expectation_exact(&state);
        }
        assert_abs_diff_eq!(parities[0], 1.0, epsilon = 1e-12);
        for parity in &parities[1..] {
            assert_abs_diff_eq!(*parity, -1.0, epsilon = 1e-12);
        }
        let witness = (parities[1] + parities[2] + parities[3] - parities[0]).abs();
        assert_abs_diff_eq!(witness, 4.0, epsilon = 1e-12);

        // Every shot of every rotated GHZ circuit has a sharp parity, so
        // finite sampling reproduces 4 exactly.
        let sampled: Vec<Counts> = mermin_circuits()
            .iter()
            .map(|c| {
                let state = apply_circuit(&StateVector::basis_state(3, 0), c).unwrap();
                sample_counts(&state, 500, 23)
            })
            .collect();
        let est = mermin(&sampled[0], &sampled[1], &sampled[2], &sampled[3]).unwrap();
        assert_eq!((est.value, est.stderr), (4.0, 0.0));

        // |↑↑↑⟩ without GHZ preparation: every witness term vanishes.
        let product = StateVector::basis_state(3, 0);
        for word in MERMIN_WORDS {
            let mut rotations = Circuit::new(3);
            for (qubit, axis) in word.into_iter().enumerate() {
                rotations.extend(&basis_change(axis, qubit, Direction::Forward)).unwrap();
            }
            let rotated = apply_circuit(&product, &rotations).unwrap();
            assert_abs_diff_eq!(parity_expectation_exact(&rotated), 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn mermin_rejects_wrong_width() {
        let two = counts_of(&[("00", 1)]);
        let three = counts_of(&[("000", 1)]);
        assert!(matches!(
            mermin(&two, &three, &three, &three),
            Err(ObsError::NotThreeQubits(2))
        ));
    }

    #[test]
    fn physical_fraction_counts_sector_membership() {
        let mixed = counts_of(&[("0011", 60), ("0001", 25), ("1011", 15)]);
        let est = physical_fraction(&mixed, 0).unwrap();
        assert_abs_diff_eq!(est.value, 0.6);

        // All 64 strings equally often: the random-state plateau C(6,3)/2⁶.
        let mut uniform = Counts::new(6);
        for index in 0..64 {
            uniform.record_many(index, 1);
        }
        let est = physical_fraction(&uniform, 0).unwrap();
        assert_abs_diff_eq!(est.value, 0.3125);
    }

    #[test]
    fn echo_returns_home_without_noise() {
        let params = build_case(CaseId::I, 4, 1.0, 0.0, 0.0, 0).unwrap();
        let plan = TrotterPlan::new(Scheme::Symmetric, 0.25, 3, 0.25, 1).unwrap();
        let init = InitialState::neel(4);

        let exact = loschmidt_echo(&params, &plan, &init, None, 0, 0).unwrap();
        assert_abs_diff_eq!(exact.value, 1.0, epsilon = 1e-12);
        assert_eq!(exact.stderr, 0.0);

        let sampled = loschmidt_echo(&params, &plan, &init, None, 8192, 7).unwrap();
        assert!(sampled.value >= 0.99);
    }

    #[test]
    fn estimate_errors_shrink_with_shots() {
        let ghz = apply_circuit(&StateVector::basis_state(3, 0), &ghz_circuit()).unwrap();
        let small = magnetization(&sample_counts(&ghz, 100, 1), 1).unwrap();
        let large = magnetization(&sample_counts(&ghz, 10_000, 1), 1).unwrap();
        assert!(large.stderr < small.stderr);
        assert!((large.stderr / (1.0 / 100.0) - 1.0).abs() < 0.2, "≈ 1/sqrt(S) scaling");
    }
}
