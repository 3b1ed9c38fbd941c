//! Trotter compilation: model parameters plus a time grid become circuits.
//!
//! A step is first laid out as coarse layers (on-site field layer, even-bond
//! layer, odd-bond layer), then lowered to gates. Bond j joins sites j and
//! j+1 (1-based); even-j bond layers are applied before odd-j layers. The
//! basic step is field, even bonds, odd bonds at full dt; the symmetric step
//! is the palindrome field(dt/2), even(dt/2), odd(dt), even(dt/2),
//! field(dt/2). Multi-step circuits merge the touching half-layers of
//! consecutive symmetric steps before lowering, so each added step only
//! contributes interior layers.

use crate::circuit::Circuit;
use crate::circuit::Gate;
use crate::model::ModelParams;
use crate::synth::synth_block;
use thiserror::Error;

/// Decomposition order of a single step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// First-order splitting, per-step error O(dt²).
    Basic,
    /// Symmetrized splitting, per-step error O(dt³).
    Symmetric,
}

/// Errors from plan construction.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum TrotterError {
    #[error("step size must be positive, got {0}")]
    NonPositiveDt(f64),
    #[error("final sub-step {sub_dt} must lie in (0, {dt}]")]
    SubDtOutOfRange { sub_dt: f64, dt: f64 },
    #[error("substep divisor must be at least 1")]
    ZeroDivisor,
}

/// A discretized evolution time t = n_steps·dt + sub_dt.
///
/// The final step runs at sub_dt ∈ (0, dt], which refines the reachable
/// time grid to multiples of dt / substep_divisor without changing the
/// step size used for the bulk of the evolution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrotterPlan {
    pub scheme: Scheme,
    pub dt: f64,
    pub n_steps: u32,
    pub sub_dt: f64,
    pub substep_divisor: u32,
}

impl TrotterPlan {
    pub fn new(
        scheme: Scheme,
        dt: f64,
        n_steps: u32,
        sub_dt: f64,
        substep_divisor: u32,
    ) -> Result<TrotterPlan, TrotterError> {
        if dt <= 0.0 || dt.is_nan() {
            return Err(TrotterError::NonPositiveDt(dt));
        }
        if !(sub_dt > 0.0 && sub_dt <= dt) {
            return Err(TrotterError::SubDtOutOfRange { sub_dt, dt });
        }
        if substep_divisor == 0 {
            return Err(TrotterError::ZeroDivisor);
        }
        Ok(TrotterPlan { scheme, dt, n_steps, sub_dt, substep_divisor })
    }

    /// Plan with n_steps full steps and a full-size final step (t = (n+1)·dt).
    pub fn full_steps(scheme: Scheme, dt: f64, total_steps: u32) -> Result<TrotterPlan, TrotterError> {
        if total_steps == 0 {
            return Err(TrotterError::SubDtOutOfRange { sub_dt: 0.0, dt });
        }
        TrotterPlan::new(scheme, dt, total_steps - 1, dt, 1)
    }

    /// Plan for point `index` of the grid t_i = i·dt/divisor.
    ///
    /// Index 0 is t = 0, which needs no circuit, hence `None`.
    pub fn at_grid_index(
        scheme: Scheme,
        dt: f64,
        substep_divisor: u32,
        index: u32,
    ) -> Result<Option<TrotterPlan>, TrotterError> {
        if dt <= 0.0 || dt.is_nan() {
            return Err(TrotterError::NonPositiveDt(dt));
        }
        if substep_divisor == 0 {
            return Err(TrotterError::ZeroDivisor);
        }
        if index == 0 {
            return Ok(None);
        }
        let (full, rem) = (index / substep_divisor, index % substep_divisor);
        let plan = if rem == 0 {
            TrotterPlan::new(scheme, dt, full - 1, dt, substep_divisor)?
        } else {
            let sub_dt = dt * rem as f64 / substep_divisor as f64;
            TrotterPlan::new(scheme, dt, full, sub_dt, substep_divisor)?
        };
        Ok(Some(plan))
    }

    /// Evolution time this plan realizes.
    pub fn time(&self) -> f64 {
        self.n_steps as f64 * self.dt + self.sub_dt
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Parity {
    Even,
    Odd,
}

fn bond_parity(bond: usize) -> Parity {
    if bond.is_multiple_of(2) {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// One coarse layer of a step, before lowering to gates.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Layer {
    Fields(f64),
    Bonds(Parity, f64),
}

fn step_layers(scheme: Scheme, dt: f64) -> Vec<Layer> {
    use Layer::*;
    use Parity::*;
    match scheme {
        Scheme::Basic => vec![Fields(dt), Bonds(Even, dt), Bonds(Odd, dt)],
        Scheme::Symmetric => vec![
            Fields(dt / 2.0),
            Bonds(Even, dt / 2.0),
            Bonds(Odd, dt),
            Bonds(Even, dt / 2.0),
            Fields(dt / 2.0),
        ],
    }
}

/// Drops layers that lower to nothing, then sums adjacent same-kind layers.
fn merge_layers(layers: Vec<Layer>, params: &ModelParams) -> Vec<Layer> {
    let no_fields = params.fields.iter().all(|&h| h == 0.0);
    let mut merged: Vec<Layer> = Vec::with_capacity(layers.len());
    for layer in layers {
        let dead = match layer {
            Layer::Fields(tau) => tau == 0.0 || no_fields,
            Layer::Bonds(_, tau) => tau == 0.0,
        };
        if dead {
            continue;
        }
        match (merged.last_mut(), layer) {
            (Some(Layer::Fields(acc)), Layer::Fields(tau)) => *acc += tau,
            (Some(Layer::Bonds(p, acc)), Layer::Bonds(q, tau)) if *p == q => *acc += tau,
            _ => merged.push(layer),
        }
    }
    merged
}

fn lower_layers(layers: &[Layer], params: &ModelParams) -> Circuit {
    let n = params.n_sites;
    let mut circuit = Circuit::new(n);
    for layer in layers {
        match *layer {
            Layer::Fields(tau) => {
                for (site0, &h) in params.fields.iter().enumerate() {
                    if h != 0.0 {
                        circuit.push(Gate::Rz(site0, 2.0 * h * tau)).expect("site in range");
                    }
                }
            }
            Layer::Bonds(parity, tau) => {
                for bond in 1..n {
                    if bond_parity(bond) != parity {
                        continue;
                    }
                    let block = synth_block(params.hopping, params.interaction, tau, true);
                    let embedded =
                        block.remap(n, &[bond - 1, bond]).expect("bond sites in range");
                    circuit.extend(&embedded).expect("same width");
                }
            }
        }
    }
    circuit
}

/// One first-order step e^{−iHdt} ≈ fields, even bonds, odd bonds.
///
/// Any finite dt is accepted; dt = 0 lowers to an empty circuit and a
/// negative dt yields the adjoint step.
pub fn basic_step(params: &ModelParams, dt: f64) -> Circuit {
    lower_layers(&step_layers(Scheme::Basic, dt), params)
}

/// One palindromic second-order step.
pub fn symmetric_step(params: &ModelParams, dt: f64) -> Circuit {
    lower_layers(&step_layers(Scheme::Symmetric, dt), params)
}

/// Full evolution circuit for a plan: n_steps full steps, one sub_dt step,
/// touching layers merged, single-qubit runs fused.
pub fn evolution_circuit(params: &ModelParams, plan: &TrotterPlan) -> Circuit {
    let mut layers = Vec::new();
    for _ in 0..plan.n_steps {
        layers.extend(step_layers(plan.scheme, plan.dt));
    }
    layers.extend(step_layers(plan.scheme, plan.sub_dt));
    let merged = merge_layers(layers, params);
    lower_layers(&merged, params).fuse_single_qubit_runs()
}
