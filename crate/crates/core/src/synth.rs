//! Two-qubit block synthesis.
//!
//! Every bond block of the evolution has the canonical form
//! N(α,β,γ) = exp[i(ασˣ⊗σˣ + βσʸ⊗σʸ + γσᶻ⊗σᶻ)]. The general case compiles
//! to three CNOTs; when the interaction vanishes (β = α after the angle
//! mapping, γ = 0) a local frame change reduces it to two. All constructors
//! return width-2 circuits acting on qubits (0, 1) = (first, second) site of
//! the bond; callers embed them with [`Circuit::remap`].

use crate::circuit::{Circuit, Gate};
use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::FRAC_PI_2;

/// Angles of the canonical interaction N(α,β,γ).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CanonicalAngles {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

/// Canonical angles of one bond block evolved for `dt`:
/// exp[−i(Uσᶻσᶻ − J(σˣσˣ+σʸσʸ))dt] = N(J·dt, J·dt, −U·dt).
pub fn block_angles(j: f64, u: f64, dt: f64) -> CanonicalAngles {
    CanonicalAngles { alpha: j * dt, beta: j * dt, gamma: -u * dt }
}

fn circuit2(gates: impl IntoIterator<Item = Gate>) -> Circuit {
    let mut c = Circuit::new(2);
    for gate in gates {
        c.push(gate).expect("gates stay on qubits 0 and 1");
    }
    c
}

/// Closed form of N(α,β,γ) = exp[i(ασˣσˣ + βσʸσʸ + γσᶻσᶻ)] in the
/// computational basis: the {|00⟩,|11⟩} block rotates by α−β under phase
/// e^{iγ}, the {|01⟩,|10⟩} block by α+β under e^{−iγ}.
pub fn canonical_block_unitary(angles: CanonicalAngles) -> DMatrix<Complex64> {
    let CanonicalAngles { alpha, beta, gamma } = angles;
    let outer = Complex64::from_polar(1.0, gamma);
    let inner = Complex64::from_polar(1.0, -gamma);
    let i = Complex64::new(0.0, 1.0);
    let mut m = DMatrix::zeros(4, 4);
    m[(0, 0)] = outer * (alpha - beta).cos();
    m[(0, 3)] = i * outer * (alpha - beta).sin();
    m[(3, 0)] = m[(0, 3)];
    m[(3, 3)] = m[(0, 0)];
    m[(1, 1)] = inner * (alpha + beta).cos();
    m[(1, 2)] = i * inner * (alpha + beta).sin();
    m[(2, 1)] = m[(1, 2)];
    m[(2, 2)] = m[(1, 1)];
    m
}

/// Three-CNOT realization of N(α,β,γ), exact up to global phase.
pub fn synth_general(angles: CanonicalAngles) -> Circuit {
    let theta = FRAC_PI_2 - 2.0 * angles.gamma;
    let phi = 2.0 * angles.alpha - FRAC_PI_2;
    let lambda = FRAC_PI_2 - 2.0 * angles.beta;
    circuit2([
        Gate::Rz(1, -FRAC_PI_2),
        Gate::Cnot(1, 0),
        Gate::Rz(0, theta),
        Gate::Ry(1, phi),
        Gate::Cnot(0, 1),
        Gate::Ry(1, lambda),
        Gate::Cnot(1, 0),
        Gate::Rz(0, FRAC_PI_2),
    ])
}

/// Two-CNOT realization of N(α,0,γ), exact up to global phase.
///
/// The Magic-matrix conjugation diagonalizes N(α,0,γ) into
/// e^{iγσᶻ}⊗e^{iασᶻ}, which collapses to CNOT·(Rx(−2α)⊗Rz(−2γ))·CNOT.
pub fn synth_xz(alpha: f64, gamma: f64) -> Circuit {
    circuit2([
        Gate::Cnot(0, 1),
        Gate::Rx(0, -2.0 * alpha),
        Gate::Rz(1, -2.0 * gamma),
        Gate::Cnot(0, 1),
    ])
}

/// Compiles one bond block exp[−i(Uσᶻσᶻ − J(σˣσˣ+σʸσʸ))dt].
///
/// With `use_two_cnot` and U = 0 the XX+YY block is conjugated by
/// Rx(±π/2) on both qubits, which maps σʸσʸ onto σᶻσᶻ and routes through
/// [`synth_xz`] (2 CNOTs); otherwise [`synth_general`] is used (3 CNOTs).
/// A block with all angles zero is the identity and compiles to no gates.
pub fn synth_block(j: f64, u: f64, dt: f64, use_two_cnot: bool) -> Circuit {
    let angles = block_angles(j, u, dt);
    if angles.alpha == 0.0 && angles.beta == 0.0 && angles.gamma == 0.0 {
        return Circuit::new(2);
    }
    if use_two_cnot && u == 0.0 {
        let mut c = circuit2([Gate::Rx(0, FRAC_PI_2), Gate::Rx(1, FRAC_PI_2)]);
        c.extend(&synth_xz(angles.alpha, angles.beta))
            .and_then(|()| c.extend(&circuit2([Gate::Rx(0, -FRAC_PI_2), Gate::Rx(1, -FRAC_PI_2)])))
            .expect("two-CNOT route stays on two qubits");
        c
    } else {
        synth_general(angles)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::unitary_of;
    use nalgebra::DMatrix;
    use num_complex::Complex64;
    use rand::{RngExt, SeedableRng};
    use rand_chacha::ChaCha12Rng;
    use std::f64::consts::PI;

    /// Independent oracle: e^{iH} for the real symmetric
    /// H = a·σˣσˣ + b·σʸσʸ + c·σᶻσᶻ via eigendecomposition.
    fn n_target(a: f64, b: f64, c: f64) -> DMatrix<Complex64> {
        let xx = [(0, 3, 1.0), (1, 2, 1.0), (2, 1, 1.0), (3, 0, 1.0)];
        let yy = [(0, 3, -1.0), (1, 2, 1.0), (2, 1, 1.0), (3, 0, -1.0)];
        let zz = [(0, 0, 1.0), (1, 1, -1.0), (2, 2, -1.0), (3, 3, 1.0)];
        let mut h = DMatrix::<f64>::zeros(4, 4);
        for &(r, col, v) in &xx {
            h[(r, col)] += a * v;
        }
        for &(r, col, v) in &yy {
            h[(r, col)] += b * v;
        }
        for &(r, col, v) in &zz {
            h[(r, col)] += c * v;
        }
        let eig = h.symmetric_eigen();
        let mut m = DMatrix::<Complex64>::zeros(4, 4);
        for k in 0..4 {
            let phase = Complex64::new(0.0, eig.eigenvalues[k]).exp();
            for r in 0..4 {
                for col in 0..4 {
                    m[(r, col)] += phase * eig.eigenvectors[(r, k)] * eig.eigenvectors[(col, k)];
                }
            }
        }
        m
    }

    /// Max-norm distance after aligning the global phase of `u` to `target`.
    fn phase_aligned_err(u: &DMatrix<Complex64>, target: &DMatrix<Complex64>) -> f64 {
        let overlap: Complex64 = u.iter().zip(target.iter()).map(|(a, b)| a.conj() * b).sum();
        let z = if overlap.norm() > 1e-12 { overlap / overlap.norm() } else { Complex64::ONE };
        (u * z - target).iter().map(|d| d.norm()).fold(0.0, f64::max)
    }

    fn cnot_total(c: &Circuit) -> usize {
        c.cnot_count()
    }

    #[test]
    fn closed_form_matches_eigendecomposition_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        for _ in 0..200 {
            let (a, b, c): (f64, f64, f64) = (
                rng.random_range(-PI..PI),
                rng.random_range(-PI..PI),
                rng.random_range(-PI..PI),
            );
            let closed = canonical_block_unitary(CanonicalAngles { alpha: a, beta: b, gamma: c });
            let spectral = n_target(a, b, c);
            let worst =
                closed.iter().zip(spectral.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
            assert!(worst < 1e-12, "closed form drifts from spectral oracle: {worst}");
        }
    }

    #[test]
    fn block_angle_mapping_reproduces_bond_unitary() {
        let a = block_angles(1.0, 0.0, 0.3);
        assert_eq!((a.alpha, a.beta, a.gamma), (0.3, 0.3, 0.0));
        let a = block_angles(0.0, 1.0, 0.5);
        assert_eq!((a.alpha, a.beta, a.gamma), (0.0, 0.0, -0.5));
        let a = block_angles(0.7, -0.2, 0.0);
        assert_eq!((a.alpha, a.beta, a.gamma), (0.0, 0.0, 0.0));

        // exp[−i(Uσᶻσᶻ − J(σˣσˣ+σʸσʸ))dt] computed directly matches N.
        let (j, u, dt) = (0.9, 0.4, 0.23);
        let bond = n_target(j * dt, j * dt, -u * dt);
        let angles = block_angles(j, u, dt);
        let n = n_target(angles.alpha, angles.beta, angles.gamma);
        assert!(phase_aligned_err(&n, &bond) < 1e-12);
    }

    #[test]
    fn general_synthesis_matches_exponential_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(5);
        let mut worst = 0.0_f64;
        for _ in 0..300 {
            let (a, b, c) = (
                rng.random_range(-6.3..6.3),
                rng.random_range(-6.3..6.3),
                rng.random_range(-6.3..6.3),
            );
            let circ = synth_general(CanonicalAngles { alpha: a, beta: b, gamma: c });
            assert_eq!(cnot_total(&circ), 3);
            let err = phase_aligned_err(&unitary_of(&circ).unwrap(), &n_target(a, b, c));
            worst = worst.max(err);
        }
        assert!(worst < 1e-10, "worst equivalence error {worst}");
    }

    #[test]
    fn general_synthesis_of_zero_angles_is_identity() {
        let circ = synth_general(CanonicalAngles { alpha: 0.0, beta: 0.0, gamma: 0.0 });
        let id = DMatrix::<Complex64>::identity(4, 4);
        assert!(phase_aligned_err(&unitary_of(&circ).unwrap(), &id) < 1e-12);
    }

    #[test]
    fn xz_synthesis_matches_exponential_oracle() {
        let mut rng = ChaCha12Rng::seed_from_u64(6);
        for _ in 0..300 {
            let (a, c) = (rng.random_range(-6.3..6.3), rng.random_range(-6.3..6.3));
            let circ = synth_xz(a, c);
            assert_eq!(cnot_total(&circ), 2);
            let err = phase_aligned_err(&unitary_of(&circ).unwrap(), &n_target(a, 0.0, c));
            assert!(err < 1e-10, "equivalence error {err} at ({a}, {c})");
        }
    }

    #[test]
    fn magic_matrix_diagonalizes_the_xz_block() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let i = Complex64::I;
        let re = |x: f64| Complex64::new(x, 0.0);
        #[rustfmt::skip]
        let magic = DMatrix::from_row_slice(4, 4, &[
            re(s),         i * s,        re(0.0), re(0.0),
            re(0.0),       re(0.0),      i * s,   re(s),
            re(0.0),       re(0.0),      i * s,   re(-s),
            re(s),         -i * s,       re(0.0), re(0.0),
        ]);
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        for _ in 0..20 {
            let (a, c) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let diag = magic.adjoint() * n_target(a, 0.0, c) * &magic;
            // Expected: e^{iγσᶻ}⊗e^{iασᶻ} with γ = c on the first factor.
            let want = [c + a, c - a, -c + a, -c - a];
            for (k, phase) in want.iter().enumerate() {
                let expected = Complex64::new(0.0, *phase).exp();
                assert!((diag[(k, k)] - expected).norm() < 1e-10);
            }
            let off = (0..4)
                .flat_map(|r| (0..4).map(move |col| (r, col)))
                .filter(|&(r, col)| r != col)
                .map(|rc| diag[rc].norm())
                .fold(0.0, f64::max);
            assert!(off < 1e-10, "off-diagonal leakage {off}");
        }
    }

    #[test]
    fn block_dispatch_counts_and_equivalence() {
        let two = synth_block(1.0, 0.0, 0.2, true);
        assert_eq!(cnot_total(&two), 2);
        let target = n_target(0.2, 0.2, 0.0);
        assert!(phase_aligned_err(&unitary_of(&two).unwrap(), &target) < 1e-10);

        let three = synth_block(1.0, 0.5, 0.2, true);
        assert_eq!(cnot_total(&three), 3, "interaction forces the general path");
        let target = n_target(0.2, 0.2, -0.1);
        assert!(phase_aligned_err(&unitary_of(&three).unwrap(), &target) < 1e-10);

        let general_route = synth_block(1.0, 0.0, 0.2, false);
        assert_eq!(cnot_total(&general_route), 3);

        assert!(synth_block(0.0, 0.0, 0.7, true).is_empty(), "identity block compiles away");
    }

    #[test]
    fn synthesized_blocks_are_swap_symmetric() {
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for _ in 0..50 {
            let angles = CanonicalAngles {
                alpha: rng.random_range(-3.0..3.0),
                beta: rng.random_range(-3.0..3.0),
                gamma: rng.random_range(-3.0..3.0),
            };
            let circ = synth_general(angles);
            let swapped = circ.remap(2, &[1, 0]).unwrap();
            let (u, v) = (unitary_of(&circ).unwrap(), unitary_of(&swapped).unwrap());
            let diff = (u - v).iter().map(|d| d.norm()).fold(0.0, f64::max);
            assert!(diff < 1e-12, "swap asymmetry {diff}");
        }
    }

    #[test]
    fn bond_blocks_conserve_sz_sectors() {
        for (j, u, dt, flag) in [(1.0, 0.0, 0.3, true), (1.0, 0.5, 0.3, false), (0.8, -0.2, 0.15, true)] {
            let m = unitary_of(&synth_block(j, u, dt, flag)).unwrap();
            for r in 0..4usize {
                for c in 0..4usize {
                    if r.count_ones() != c.count_ones() {
                        assert!(m[(r, c)].norm() < 1e-12, "sector leakage at ({r},{c})");
                    }
                }
            }
        }
    }
}
