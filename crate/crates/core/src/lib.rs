//! Simulation toolkit for quench dynamics of XX/XXZ spin chains compiled to
//! CNOT+rotation circuits.
//!
//! The pipeline mirrors a digital quantum simulation end to end:
//!
//! 1. [`model`] defines the open-chain Hamiltonian family
//!    H = −J Σ (σˣσˣ + σʸσʸ) + U Σ σᶻσᶻ + Σ hⱼσᶻⱼ, its parameter cases, and
//!    initial product states;
//! 2. [`trotter`] compiles a time grid into basic (first-order) or symmetric
//!    (second-order) Trotter circuits, with [`synth`] providing the 3-CNOT
//!    and 2-CNOT decompositions of the two-qubit bond blocks;
//! 3. [`sim`] executes circuits on an exact state-vector engine, provides a
//!    continuous-time exact-diagonalization oracle, and samples shots;
//! 4. [`noise`] emulates a NISQ device with Monte Carlo trajectories driven
//!    by calibration data (CNOT depolarizing errors, readout flips, T2
//!    dephasing);
//! 5. [`observables`], [`mitigation`], and [`device_select`] post-process
//!    counts into magnetization/correlator/QFI/Mermin/echo estimates, apply
//!    symmetry-sector post-selection, and choose qubit chains from
//!    calibration snapshots.
//!
//! Conventions shared by every module: site j (1-based) is qubit j−1; ↑ is
//! bit 0 with σᶻ eigenvalue +1; qubit 0 is the most significant bit of a
//! basis-state index, so bitstrings read site 1 first; rotation gates are
//! Rα(θ) = exp(−iθσα/2); global phase is unobservable and quotiented out of
//! every equivalence check.

pub mod circuit;
pub mod device_select;
pub mod mitigation;
pub mod model;
pub mod noise;
pub mod observables;
pub mod rng;
pub mod sim;
pub mod synth;
pub mod trotter;
