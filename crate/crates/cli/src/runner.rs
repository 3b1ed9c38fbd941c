//! Experiment execution: walk a time grid, gather rows from each source
//! (exact-diagonalization oracle, compiled-circuit expectations, sampled
//! counts raw and post-selected), and render one CSV per run. Time points
//! fan out over the rayon pool; the gather order is fixed by grid index, so
//! output bytes never depend on thread count.

use crate::config::{ExperimentConfig, LayoutSpec, ObservablesSection};
use crate::output::{
    render_csv, Row, SOURCE_ED, SOURCE_EXACT, SOURCE_SHOTS_MITIGATED, SOURCE_SHOTS_RAW,
    SOURCE_TROTTER,
};
use quench_core::circuit::Circuit;
use quench_core::device_select::{best_chain, brute_force_chain, chain_stats, SelectionConfig};
use quench_core::mitigation::postselect;
use quench_core::model::{initial_statevector, InitialState, ModelParams, ED_MAX_SITES};
use quench_core::noise::{Calibration, NoiseModel};
use quench_core::observables::{
    connected_correlator, connected_correlator_exact, fraction_on_key, magnetization,
    magnetization_exact, mermin, mermin_circuits, n_half, n_half_exact, parity_expectation,
    parity_expectation_exact, physical_fraction, qfi, qfi_exact,
};
use quench_core::rng::derived_seed;
use quench_core::sim::{
    apply_circuit, phase_aligned_distance, sample_counts, unitary_of, Counts, EdEvolver,
    StateVector,
};
use quench_core::synth::{canonical_block_unitary, synth_general, synth_xz, CanonicalAngles};
use quench_core::trotter::{evolution_circuit, TrotterPlan};
use rayon::prelude::*;
use std::fmt;
use std::f64::consts::PI;
use std::path::Path;

#[derive(Debug)]
pub enum RunError {
    Config(String),
    Infeasible(String),
    Internal(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Config(_) => 2,
            RunError::Infeasible(_) => 3,
            RunError::Internal(_) => 4,
        }
    }
}

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RunError::Config(m) => write!(f, "config error: {m}"),
            RunError::Infeasible(m) => write!(f, "infeasible: {m}"),
            RunError::Internal(m) => write!(f, "internal error: {m}"),
        }
    }
}

impl std::error::Error for RunError {}

impl From<crate::config::ConfigError> for RunError {
    fn from(e: crate::config::ConfigError) -> RunError {
        RunError::Config(e.0)
    }
}

fn internal(e: impl fmt::Display) -> RunError {
    RunError::Internal(e.to_string())
}

/// Noise model plus the chain of device qubits hosting sites 1..N.
pub struct NoiseSetup {
    pub model: NoiseModel,
    pub layout: Vec<usize>,
}

/// Resolves the noise section, running chain selection when the layout says
/// "auto". `width` is the number of wires the experiment needs.
fn resolve_noise(
    config: &ExperimentConfig,
    config_dir: &Path,
    width: usize,
) -> Result<Option<NoiseSetup>, RunError> {
    let Some(section) = &config.noise else { return Ok(None) };
    let calibration = config.calibration(config_dir)?;
    let channels = config.channels()?;
    let layout = match &section.layout {
        LayoutSpec::Explicit(wires) => {
            if wires.len() != width {
                return Err(RunError::Config(format!(
                    "noise.layout lists {} wires but the experiment needs {width}",
                    wires.len()
                )));
            }
            wires.clone()
        }
        LayoutSpec::Named(name) if name == "auto" => {
            auto_layout(config, &calibration, width)?
        }
        LayoutSpec::Named(other) => {
            return Err(RunError::Config(format!(
                "noise.layout must be \"auto\" or a wire list, got {other:?}"
            )))
        }
    };
    let model = NoiseModel { calibration, channels };
    Ok(Some(NoiseSetup { model, layout }))
}

fn selection_config(config: &ExperimentConfig, width: usize) -> Result<SelectionConfig, RunError> {
    let s = config.section(&config.select, "select")?;
    Ok(SelectionConfig {
        chain_length: s.chain_length.unwrap_or(width),
        meas_threshold: s.meas_threshold,
        t2_threshold: s.t2_threshold,
        relax_factor: s.relax_factor,
    })
}

fn auto_layout(
    config: &ExperimentConfig,
    calibration: &Calibration,
    width: usize,
) -> Result<Vec<usize>, RunError> {
    let mut selection = selection_config(config, width)?;
    selection.chain_length = width;
    best_chain(calibration, &selection).map_err(|e| RunError::Infeasible(e.to_string()))
}

/// Resolved request: which named series to compute, over which sites/pairs.
struct ObservablePlan {
    magnetization_sites: Vec<usize>,
    n_half: bool,
    correlator_pairs: Vec<(usize, usize)>,
    qfi_signs: Option<Vec<i32>>,
    parity: bool,
    fraction: bool,
}

impl ObservablePlan {
    fn from_section(section: &ObservablesSection, n_sites: usize) -> Result<ObservablePlan, RunError> {
        let wants = |name: &str| section.names.iter().any(|n| n == name);
        let magnetization_sites = if wants("magnetization") {
            if section.sites.is_empty() {
                (1..=n_sites).collect()
            } else {
                section.sites.clone()
            }
        } else {
            Vec::new()
        };
        let correlator_pairs = if wants("correlator") {
            if section.pairs.is_empty() {
                return Err(RunError::Config(
                    "observables.pairs must list site pairs when correlator is requested".into(),
                ));
            }
            section.pairs.iter().map(|p| (p[0], p[1])).collect()
        } else {
            Vec::new()
        };
        let qfi_signs = if wants("qfi") {
            let signs = if section.qfi_signs.is_empty() {
                vec![1; n_sites]
            } else {
                section.qfi_signs.clone()
            };
            if signs.len() != n_sites {
                return Err(RunError::Config(format!(
                    "observables.qfi_signs needs {n_sites} entries, got {}",
                    signs.len()
                )));
            }
            Some(signs)
        } else {
            None
        };
        Ok(ObservablePlan {
            magnetization_sites,
            n_half: wants("n_half"),
            correlator_pairs,
            qfi_signs,
            parity: wants("parity"),
            fraction: wants("fraction"),
        })
    }

    /// Requested names in emission order, for undefined-marker rows.
    fn names(&self, include_fraction: bool) -> Vec<String> {
        let mut names = Vec::new();
        for &site in &self.magnetization_sites {
            names.push(format!("m_{site}"));
        }
        if self.n_half {
            names.push("n_half".to_string());
        }
        for &(j, k) in &self.correlator_pairs {
            names.push(format!("c_{j}_{k}"));
        }
        if self.qfi_signs.is_some() {
            names.push("qfi".to_string());
        }
        if self.parity {
            names.push("parity".to_string());
        }
        if self.fraction && include_fraction {
            names.push("fraction".to_string());
        }
        names
    }
}

/// Rows from exact state-vector expectations. The sector fraction is
/// identically 1 for exact evolution, so it is skipped here.
fn state_rows(
    plan: &ObservablePlan,
    state: &StateVector,
    n_sites: usize,
    t: f64,
    source: &'static str,
) -> Result<Vec<Row>, RunError> {
    let mut rows = Vec::new();
    let mut push = |name: String, value: f64| {
        rows.push(Row { t, name, value: Some(value), stderr: Some(0.0), retained_fraction: 1.0, source });
    };
    for &site in &plan.magnetization_sites {
        push(format!("m_{site}"), magnetization_exact(state, site).map_err(internal)?);
    }
    if plan.n_half {
        push("n_half".to_string(), n_half_exact(state, n_sites).map_err(internal)?);
    }
    for &(j, k) in &plan.correlator_pairs {
        push(format!("c_{j}_{k}"), connected_correlator_exact(state, j, k).map_err(internal)?);
    }
    if let Some(signs) = &plan.qfi_signs {
        push("qfi".to_string(), qfi_exact(state, signs).map_err(internal)?);
    }
    if plan.parity {
        push("parity".to_string(), parity_expectation_exact(state));
    }
    Ok(rows)
}

/// Rows from sampled counts. An empty table (everything post-selected away)
/// yields undefined markers for each requested observable.
fn counts_rows(
    plan: &ObservablePlan,
    counts: &Counts,
    n_sites: usize,
    target_sz: i32,
    t: f64,
    retained_fraction: f64,
    source: &'static str,
) -> Result<Vec<Row>, RunError> {
    let include_fraction = source == SOURCE_SHOTS_RAW;
    if counts.shots() == 0 {
        return Ok(plan
            .names(include_fraction)
            .into_iter()
            .map(|name| Row { t, name, value: None, stderr: None, retained_fraction, source })
            .collect());
    }
    let mut rows = Vec::new();
    let mut push = |name: String, est: quench_core::observables::Estimate| {
        rows.push(Row {
            t,
            name,
            value: Some(est.value),
            stderr: Some(est.stderr),
            retained_fraction,
            source,
        });
    };
    for &site in &plan.magnetization_sites {
        push(format!("m_{site}"), magnetization(counts, site).map_err(internal)?);
    }
    if plan.n_half {
        push("n_half".to_string(), n_half(counts, n_sites).map_err(internal)?);
    }
    for &(j, k) in &plan.correlator_pairs {
        push(format!("c_{j}_{k}"), connected_correlator(counts, j, k).map_err(internal)?);
    }
    if let Some(signs) = &plan.qfi_signs {
        push("qfi".to_string(), qfi(counts, signs).map_err(internal)?);
    }
    if plan.parity {
        push("parity".to_string(), parity_expectation(counts).map_err(internal)?);
    }
    if plan.fraction && include_fraction {
        push("fraction".to_string(), physical_fraction(counts, target_sz).map_err(internal)?);
    }
    Ok(rows)
}

fn provenance(config: &ExperimentConfig, seed: u64) -> Vec<(String, String)> {
    let mut p = Vec::new();
    let mut add = |key: &str, value: String| p.push((key.to_string(), value));
    if let Some(m) = &config.model {
        add("case", m.case.clone());
        add("n_sites", m.n_sites.to_string());
        add("hopping", m.hopping.to_string());
        add("interaction", m.interaction.to_string());
        add("field", m.field.to_string());
        add("disorder_seed", m.disorder_seed.to_string());
    }
    if let Some(i) = &config.initial {
        add("initial", i.state.clone());
    }
    if let Some(e) = &config.evolution {
        add("scheme", e.scheme.clone());
        add("dt", e.dt.to_string());
        add("n_steps", e.n_steps.to_string());
        add("substeps", e.substeps.to_string());
    }
    if let Some(s) = &config.sampling {
        add("shots", s.shots.to_string());
        add("seed", seed.to_string());
    }
    add("postselect", config.mitigation.postselect.to_string());
    match &config.noise {
        Some(n) => {
            add("noise_calibration", n.calibration.display().to_string());
            add("noise_channels", n.channels.join("+"));
            let layout = match &n.layout {
                LayoutSpec::Named(name) => name.clone(),
                LayoutSpec::Explicit(wires) => wires
                    .iter()
                    .map(|w| w.to_string())
                    .collect::<Vec<_>>()
                    .join(" "),
            };
            add("noise_layout", layout);
        }
        None => add("noise", "off".to_string()),
    }
    p
}

/// Counts for one grid point: sampled from the exact state when noiseless,
/// or accumulated over noisy trajectories of prep + circuit.
fn point_counts(
    circuit: &Circuit,
    init: &InitialState,
    exact_state: &StateVector,
    noise: Option<&NoiseSetup>,
    shots: u64,
    seed: u64,
) -> Result<Counts, RunError> {
    match noise {
        None => Ok(sample_counts(exact_state, shots, seed)),
        Some(setup) => {
            let mut full = init.prep_circuit();
            full.extend(circuit).map_err(internal)?;
            quench_core::noise::noisy_counts(&full, &setup.layout, &setup.model, shots, seed)
                .map_err(internal)
        }
    }
}

/// Shared time-grid walk. `emit` maps one grid point (index, time, circuit,
/// exact state after the circuit) to its rows; exact-diagonalization rows
/// are prepended serially when the model is small enough.
fn grid_run(
    config: &ExperimentConfig,
    params: &ModelParams,
    init: &InitialState,
    with_ed: bool,
    emit: impl Fn(u32, f64, &Circuit, &StateVector) -> Result<Vec<Row>, RunError> + Sync,
) -> Result<Vec<Row>, RunError> {
    let evolution = config.section(&config.evolution, "evolution")?;
    let scheme = config.scheme()?;
    let dt = evolution.dt;
    let divisor = evolution.substeps;
    let total = evolution
        .n_steps
        .checked_mul(divisor)
        .ok_or_else(|| RunError::Config("n_steps * substeps overflows".into()))?;
    let init_state = initial_statevector(init, params.n_sites).map_err(internal)?;

    let mut ed_rows: Vec<Vec<Row>> = Vec::new();
    if with_ed && params.n_sites <= ED_MAX_SITES {
        let plan = ObservablePlan::from_section(
            config.section(&config.observables, "observables")?,
            params.n_sites,
        )?;
        let mut evolver = EdEvolver::new(params).map_err(internal)?;
        for index in 0..=total {
            let t = dt * index as f64 / divisor as f64;
            let state = evolver.evolve(&init_state, t).map_err(internal)?;
            ed_rows.push(state_rows(&plan, &state, params.n_sites, t, SOURCE_ED)?);
        }
    }

    let point_rows: Vec<Vec<Row>> = (0..=total)
        .into_par_iter()
        .map(|index| {
            let t = dt * index as f64 / divisor as f64;
            let circuit = match TrotterPlan::at_grid_index(scheme, dt, divisor, index)
                .map_err(|e| RunError::Config(e.to_string()))?
            {
                Some(plan) => evolution_circuit(params, &plan),
                None => Circuit::new(params.n_sites),
            };
            let state = apply_circuit(&init_state, &circuit).map_err(internal)?;
            emit(index, t, &circuit, &state)
        })
        .collect::<Result<_, _>>()?;

    let mut rows = Vec::new();
    for (index, point) in point_rows.iter().enumerate() {
        if let Some(ed) = ed_rows.get(index) {
            rows.extend(ed.iter().cloned());
        }
        rows.extend(point.iter().cloned());
    }
    Ok(rows)
}

/// Quench pipeline: per time point, rows from the ED oracle, the compiled
/// circuit's exact expectations, and sampled counts raw plus post-selected.
pub fn run_quench(
    config: &ExperimentConfig,
    config_dir: &Path,
    seed_override: Option<u64>,
) -> Result<String, RunError> {
    let params = config.model_params()?;
    let init = config.initial_state()?;
    let sampling = config.section(&config.sampling, "sampling")?;
    let seed = seed_override.unwrap_or(sampling.seed);
    let shots = sampling.shots;
    let plan = ObservablePlan::from_section(
        config.section(&config.observables, "observables")?,
        params.n_sites,
    )?;
    let noise = resolve_noise(config, config_dir, params.n_sites)?;
    let postselecting = config.mitigation.postselect;
    let target_sz = init.total_sz();
    let n_sites = params.n_sites;

    let rows = grid_run(config, &params, &init, true, |index, t, circuit, state| {
        let mut rows = state_rows(&plan, state, n_sites, t, SOURCE_TROTTER)?;
        let counts = point_counts(
            circuit,
            &init,
            state,
            noise.as_ref(),
            shots,
            derived_seed(seed, index as u64),
        )?;
        rows.extend(counts_rows(&plan, &counts, n_sites, target_sz, t, 1.0, SOURCE_SHOTS_RAW)?);
        if postselecting {
            let report = postselect(&counts, target_sz);
            rows.extend(counts_rows(
                &plan,
                &report.kept,
                n_sites,
                target_sz,
                t,
                report.retained_fraction,
                SOURCE_SHOTS_MITIGATED,
            )?);
        }
        Ok(rows)
    })?;
    Ok(render_csv(&provenance(config, seed), &rows))
}

/// Echo pipeline: forward evolution followed by its inverse; emits the
/// return probability and the physical-sector fraction per time point.
pub fn run_echo(
    config: &ExperimentConfig,
    config_dir: &Path,
    seed_override: Option<u64>,
) -> Result<String, RunError> {
    let params = config.model_params()?;
    let init = config.initial_state()?;
    let sampling = config.section(&config.sampling, "sampling")?;
    let seed = seed_override.unwrap_or(sampling.seed);
    let shots = sampling.shots;
    let noise = resolve_noise(config, config_dir, params.n_sites)?;
    let postselecting = config.mitigation.postselect;
    let target_sz = init.total_sz();
    let key = init.bitstring_key();
    let basis_index = init.basis_index();
    let init_state = initial_statevector(&init, params.n_sites).map_err(internal)?;

    let rows = grid_run(config, &params, &init, false, |index, t, circuit, _state| {
        let mut echo_circuit = circuit.clone();
        echo_circuit.extend(&circuit.inverse()).map_err(internal)?;
        let echoed = apply_circuit(&init_state, &echo_circuit).map_err(internal)?;
        let mut rows = vec![Row {
            t,
            name: "echo".to_string(),
            value: Some(echoed.prob_of_basis(basis_index)),
            stderr: Some(0.0),
            retained_fraction: 1.0,
            source: SOURCE_TROTTER,
        }];
        let counts = point_counts(
            &echo_circuit,
            &init,
            &echoed,
            noise.as_ref(),
            shots,
            derived_seed(seed, index as u64),
        )?;
        let echo_est = fraction_on_key(&counts, &key).map_err(internal)?;
        let fraction = physical_fraction(&counts, target_sz).map_err(internal)?;
        rows.push(Row {
            t,
            name: "echo".to_string(),
            value: Some(echo_est.value),
            stderr: Some(echo_est.stderr),
            retained_fraction: 1.0,
            source: SOURCE_SHOTS_RAW,
        });
        rows.push(Row {
            t,
            name: "fraction".to_string(),
            value: Some(fraction.value),
            stderr: Some(fraction.stderr),
            retained_fraction: 1.0,
            source: SOURCE_SHOTS_RAW,
        });
        if postselecting {
            let report = postselect(&counts, target_sz);
            let (value, stderr) = if report.kept.shots() == 0 {
                (None, None)
            } else {
                let est = fraction_on_key(&report.kept, &key).map_err(internal)?;
                (Some(est.value), Some(est.stderr))
            };
            rows.push(Row {
                t,
                name: "echo".to_string(),
                value,
                stderr,
                retained_fraction: report.retained_fraction,
                source: SOURCE_SHOTS_MITIGATED,
            });
        }
        Ok(rows)
    })?;
    Ok(render_csv(&provenance(config, seed), &rows))
}

/// GHZ verification: the four basis-rotated parity circuits and the Mermin
/// witness, exactly and from sampled (optionally noise-emulated) counts.
pub fn run_ghz_mermin(
    config: &ExperimentConfig,
    config_dir: &Path,
    seed_override: Option<u64>,
) -> Result<String, RunError> {
    let sampling = config.section(&config.sampling, "sampling")?;
    let seed = seed_override.unwrap_or(sampling.seed);
    let shots = sampling.shots;
    let noise = resolve_noise(config, config_dir, 3)?;
    if let Some(setup) = &noise {
        if setup.layout.len() < 3 {
            return Err(RunError::Infeasible("GHZ verification needs three wires".into()));
        }
    }
    const WORDS: [&str; 4] = ["xxx", "xyy", "yxy", "yyx"];
    let circuits = mermin_circuits();
    let ground = StateVector::basis_state(3, 0);

    let mut rows = Vec::new();
    let mut exact_terms = [0.0; 4];
    for (w, circuit) in circuits.iter().enumerate() {
        let state = apply_circuit(&ground, circuit).map_err(internal)?;
        exact_terms[w] = parity_expectation_exact(&state);
        rows.push(Row {
            t: 0.0,
            name: format!("parity_{}", WORDS[w]),
            value: Some(exact_terms[w]),
            stderr: Some(0.0),
            retained_fraction: 1.0,
            source: SOURCE_EXACT,
        });
    }
    let witness = (exact_terms[1] + exact_terms[2] + exact_terms[3] - exact_terms[0]).abs();
    rows.push(Row {
        t: 0.0,
        name: "mermin".to_string(),
        value: Some(witness),
        stderr: Some(0.0),
        retained_fraction: 1.0,
        source: SOURCE_EXACT,
    });

    let mut sampled = Vec::new();
    for (w, circuit) in circuits.iter().enumerate() {
        let counts = match &noise {
            None => {
                let state = apply_circuit(&ground, circuit).map_err(internal)?;
                sample_counts(&state, shots, derived_seed(seed, w as u64))
            }
            Some(setup) => quench_core::noise::noisy_counts(
                circuit,
                &setup.layout[..3],
                &setup.model,
                shots,
                derived_seed(seed, w as u64),
            )
            .map_err(internal)?,
        };
        let parity = parity_expectation(&counts).map_err(internal)?;
        rows.push(Row {
            t: 0.0,
            name: format!("parity_{}", WORDS[w]),
            value: Some(parity.value),
            stderr: Some(parity.stderr),
            retained_fraction: 1.0,
            source: SOURCE_SHOTS_RAW,
        });
        sampled.push(counts);
    }
    let estimate =
        mermin(&sampled[0], &sampled[1], &sampled[2], &sampled[3]).map_err(internal)?;
    rows.push(Row {
        t: 0.0,
        name: "mermin".to_string(),
        value: Some(estimate.value),
        stderr: Some(estimate.stderr),
        retained_fraction: 1.0,
        source: SOURCE_SHOTS_RAW,
    });
    Ok(render_csv(&provenance(config, seed), &rows))
}

/// Chain selection over a calibration document; returns a small CSV with
/// the chosen chain and its per-metric min/avg/max summary.
pub fn run_select(config: &ExperimentConfig, config_dir: &Path) -> Result<String, RunError> {
    let calibration = config.calibration(config_dir)?;
    let section = config.section(&config.select, "select")?;
    let length = match (section.chain_length, &config.model) {
        (Some(length), _) => length,
        (None, Some(m)) => m.n_sites,
        (None, None) => {
            return Err(RunError::Config(
                "select.chain_length is required without a [model] section".into(),
            ))
        }
    };
    let selection = SelectionConfig {
        chain_length: length,
        meas_threshold: section.meas_threshold,
        t2_threshold: section.t2_threshold,
        relax_factor: section.relax_factor,
    };
    let chain =
        best_chain(&calibration, &selection).map_err(|e| RunError::Infeasible(e.to_string()))?;
    let stats = chain_stats(&calibration, &chain);

    let mut out = String::new();
    let chain_text =
        chain.iter().map(|q| q.to_string()).collect::<Vec<_>>().join(" ");
    out.push_str(&format!("# chain={chain_text}\n"));
    if let Ok(optimum) = brute_force_chain(&calibration, &selection) {
        out.push_str(&format!("# matches_brute_force={}\n", optimum == chain));
    }
    out.push_str("metric,min,avg,max\n");
    out.push_str(&format!(
        "readout,{},{},{}\n",
        stats.readout_min, stats.readout_avg, stats.readout_max
    ));
    out.push_str(&format!("cnot,{},{},{}\n", stats.cnot_min, stats.cnot_avg, stats.cnot_max));
    out.push_str(&format!("t2,{},{},{}\n", stats.t2_min, stats.t2_avg, stats.t2_max));
    Ok(out)
}

/// Synthesis self-test: random canonical angles against the closed-form
/// unitary, with structural CNOT-count checks. Returns a pass/fail report;
/// any failure is an internal invariant violation.
pub fn run_synth_check(samples: u32, seed: u64) -> Result<String, RunError> {
    use quench_core::rng::{stream_rng, RngExt};

    let mut rng = stream_rng(seed, 0);
    let mut angle = move || -> f64 { rng.random_range(-PI..PI) };
    let mut worst_general: f64 = 0.0;
    let mut worst_xz: f64 = 0.0;
    for _ in 0..samples {
        let angles =
            CanonicalAngles { alpha: angle(), beta: angle(), gamma: angle() };
        let circuit = synth_general(angles);
        if circuit.cnot_count() != 3 {
            return Err(RunError::Internal(format!(
                "general synthesis used {} CNOTs for {angles:?}",
                circuit.cnot_count()
            )));
        }
        let u = unitary_of(&circuit).map_err(internal)?;
        worst_general =
            worst_general.max(phase_aligned_distance(&u, &canonical_block_unitary(angles)));
    }
    for _ in 0..samples {
        let angles = CanonicalAngles { alpha: angle(), beta: 0.0, gamma: angle() };
        let circuit = synth_xz(angles.alpha, angles.gamma);
        if circuit.cnot_count() != 2 {
            return Err(RunError::Internal(format!(
                "two-CNOT synthesis used {} CNOTs for {angles:?}",
                circuit.cnot_count()
            )));
        }
        let u = unitary_of(&circuit).map_err(internal)?;
        worst_xz = worst_xz.max(phase_aligned_distance(&u, &canonical_block_unitary(angles)));
    }
    let mut report = String::new();
    report.push_str(&format!("general: {samples} samples, max error {worst_general:.3e}\n"));
    report.push_str(&format!("two-cnot: {samples} samples, max error {worst_xz:.3e}\n"));
    if worst_general < 1e-9 && worst_xz < 1e-9 {
        report.push_str("synth-check: pass\n");
        Ok(report)
    } else {
        Err(RunError::Internal(format!("synthesis error above 1e-9\n{report}")))
    }
}
