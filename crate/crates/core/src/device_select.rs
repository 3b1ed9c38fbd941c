//! Qubit-chain selection over a calibration graph.
//!
//! The iterative procedure restricts candidate CNOT edges to the M
//! lowest-error ones and searches for an N-qubit simple path, growing M on
//! failure and, once M covers the whole allowed set, relaxing the
//! measurement threshold and starting over. The T2 threshold is never
//! relaxed. A brute-force enumerator over all simple paths serves as the
//! validation oracle.

use crate::noise::Calibration;
use std::collections::{BTreeMap, BTreeSet};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SelectError {
    #[error("invalid selection config: {0}")]
    BadConfig(String),
    #[error("no {chain_length}-qubit chain exists (measurement threshold relaxed to {final_meas_threshold})")]
    NoChain { chain_length: usize, final_meas_threshold: f64 },
}

/// Chain-search parameters: the wanted length and the qubit-quality gates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionConfig {
    pub chain_length: usize,
    pub meas_threshold: f64,
    pub t2_threshold: f64,
    /// Multiplier applied to meas_threshold each time the allowed set must
    /// grow; T2 is a hard floor and never moves.
    pub relax_factor: f64,
}

impl SelectionConfig {
    pub fn new(chain_length: usize, meas_threshold: f64, t2_threshold: f64) -> SelectionConfig {
        SelectionConfig { chain_length, meas_threshold, t2_threshold, relax_factor: 1.25 }
    }

    fn validate(&self) -> Result<(), SelectError> {
        if self.chain_length < 2 {
            return Err(SelectError::BadConfig(format!(
                "chain length must be at least 2, got {}",
                self.chain_length
            )));
        }
        for (name, value) in [
            ("measurement threshold", self.meas_threshold),
            ("T2 threshold", self.t2_threshold),
        ] {
            if value <= 0.0 || value.is_nan() {
                return Err(SelectError::BadConfig(format!(
                    "{name} must be positive, got {value}"
                )));
            }
        }
        if self.relax_factor <= 1.0 || self.relax_factor.is_nan() {
            return Err(SelectError::BadConfig(format!(
                "relax factor must exceed 1, got {}",
                self.relax_factor
            )));
        }
        Ok(())
    }
}

/// Min/avg/max CNOT error along a chain, plus the same for readout and T2
/// of its qubits (the calibration-sheet summary layout).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainStats {
    pub cnot_min: f64,
    pub cnot_avg: f64,
    pub cnot_max: f64,
    pub readout_min: f64,
    pub readout_avg: f64,
    pub readout_max: f64,
    pub t2_min: f64,
    pub t2_avg: f64,
    pub t2_max: f64,
}

/// Average CNOT error of a chain, accumulated in chain-edge order.
pub fn chain_average(cal: &Calibration, chain: &[usize]) -> f64 {
    let mut sum = 0.0;
    for pair in chain.windows(2) {
        sum += cal.edge(pair[0], pair[1]).expect("chain edges exist in calibration").cnot_error;
    }
    sum / (chain.len() - 1) as f64
}

/// Summary statistics of a selected chain.
pub fn chain_stats(cal: &Calibration, chain: &[usize]) -> ChainStats {
    let errors: Vec<f64> =
        chain.windows(2).map(|p| cal.edge(p[0], p[1]).expect("chain edge").cnot_error).collect();
    let readouts: Vec<f64> =
        chain.iter().map(|&q| cal.qubit(q).expect("chain qubit").readout_error).collect();
    let t2s: Vec<f64> = chain.iter().map(|&q| cal.qubit(q).expect("chain qubit").t2).collect();
    let min = |v: &[f64]| v.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = |v: &[f64]| v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    ChainStats {
        cnot_min: min(&errors),
        cnot_avg: chain_average(cal, chain),
        cnot_max: max(&errors),
        readout_min: min(&readouts),
        readout_avg: readouts.iter().sum::<f64>() / readouts.len() as f64,
        readout_max: max(&readouts),
        t2_min: min(&t2s),
        t2_avg: t2s.iter().sum::<f64>() / t2s.len() as f64,
        t2_max: max(&t2s),
    }
}

fn allowed_qubits(cal: &Calibration, meas: f64, t2: f64) -> BTreeSet<usize> {
    cal.qubits
        .iter()
        .filter(|q| q.readout_error <= meas && q.t2 >= t2)
        .map(|q| q.index)
        .collect()
}

/// All simple paths on exactly `n` vertices, canonicalized to start from
/// the lower-indexed endpoint. The set is lexicographically ordered.
fn all_chains(edges: &[(usize, usize)], n: usize) -> BTreeSet<Vec<usize>> {
    let mut adjacency: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for &(a, b) in edges {
        adjacency.entry(a).or_default().push(b);
        adjacency.entry(b).or_default().push(a);
    }
    for neighbors in adjacency.values_mut() {
        neighbors.sort_unstable();
    }
    let mut found = BTreeSet::new();
    let mut path = Vec::with_capacity(n);
    let mut visited = BTreeSet::new();
    fn extend(
        adjacency: &BTreeMap<usize, Vec<usize>>,
        n: usize,
        path: &mut Vec<usize>,
        visited: &mut BTreeSet<usize>,
        found: &mut BTreeSet<Vec<usize>>,
    ) {
        if path.len() == n {
            let mut chain = path.clone();
            if chain[0] > chain[n - 1] {
                chain.reverse();
            }
            found.insert(chain);
            return;
        }
        let last = *path.last().expect("path never empty here");
        for &next in adjacency.get(&last).map(Vec::as_slice).unwrap_or(&[]) {
            if visited.insert(next) {
                path.push(next);
                extend(adjacency, n, path, visited, found);
                path.pop();
                visited.remove(&next);
            }
        }
    }
    for &start in adjacency.keys() {
        visited.insert(start);
        path.push(start);
        extend(&adjacency, n, &mut path, &mut visited, &mut found);
        path.pop();
        visited.remove(&start);
    }
    found
}

/// Lowest-average chain; lexicographic order breaks exact ties because the
/// candidate set iterates in sorted order.
fn pick_best(cal: &Calibration, chains: &BTreeSet<Vec<usize>>) -> Option<Vec<usize>> {
    let mut best: Option<(f64, &Vec<usize>)> = None;
    for chain in chains {
        let avg = chain_average(cal, chain);
        if best.is_none_or(|(best_avg, _)| avg < best_avg) {
            best = Some((avg, chain));
        }
    }
    best.map(|(_, chain)| chain.clone())
}

/// Iterative restricted-edge selection.
///
/// Loop structure: 1) gate qubits on measurement error and T2; 2) collect
/// CNOTs between allowed qubits, sorted by error; 3) M = N−1; 4) keep the
/// M lowest-error CNOTs; 5) enumerate N-qubit chains over them; 6) on
/// failure grow M, and once M reaches the allowed-qubit count multiply the
/// measurement threshold by relax_factor and restart from 2; 7) of the
/// found chains return the one with the lowest average CNOT error. Fails
/// once the threshold reaches 1 (every qubit admitted) with still no chain.
pub fn best_chain(cal: &Calibration, config: &SelectionConfig) -> Result<Vec<usize>, SelectError> {
    config.validate()?;
    cal.validate().map_err(|e| SelectError::BadConfig(e.to_string()))?;
    let n = config.chain_length;
    let mut meas = config.meas_threshold;
    loop {
        let allowed = allowed_qubits(cal, meas, config.t2_threshold);
        let mut edges: Vec<(usize, usize, f64)> = cal
            .edges
            .iter()
            .filter(|e| allowed.contains(&e.a) && allowed.contains(&e.b))
            .map(|e| (e.a.min(e.b), e.a.max(e.b), e.cnot_error))
            .collect();
        edges.sort_by(|x, y| x.2.total_cmp(&y.2).then(x.0.cmp(&y.0)).then(x.1.cmp(&y.1)));

        let mut m = n - 1;
        loop {
            let restricted: Vec<(usize, usize)> =
                edges.iter().take(m).map(|&(a, b, _)| (a, b)).collect();
            let chains = all_chains(&restricted, n);
            if let Some(chain) = pick_best(cal, &chains) {
                return Ok(chain);
            }
            if m < allowed.len() {
                m += 1;
            } else {
                break;
            }
        }
        if meas >= 1.0 {
            return Err(SelectError::NoChain { chain_length: n, final_meas_threshold: meas });
        }
        meas = (meas * config.relax_factor).min(1.0);
    }
}

/// Exhaustive optimum over every simple path whose qubits meet the strict
/// thresholds; no relaxation. Ties break lexicographically.
pub fn brute_force_chain(
    cal: &Calibration,
    config: &SelectionConfig,
) -> Result<Vec<usize>, SelectError> {
    config.validate()?;
    cal.validate().map_err(|e| SelectError::BadConfig(e.to_string()))?;
    let allowed = allowed_qubits(cal, config.meas_threshold, config.t2_threshold);
    let edges: Vec<(usize, usize)> = cal
        .edges
        .iter()
        .filter(|e| allowed.contains(&e.a) && allowed.contains(&e.b))
        .map(|e| (e.a, e.b))
        .collect();
    let chains = all_chains(&edges, config.chain_length);
    pick_best(cal, &chains).ok_or(SelectError::NoChain {
        chain_length: config.chain_length,
        final_meas_threshold: config.meas_threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{EdgeCal, QubitCal};

    fn cal_from(qubits: &[(usize, f64, f64)], edges: &[(usize, usize, f64)]) -> Calibration {
        Calibration {
            qubits: qubits
                .iter()
                .map(|&(index, readout_error, t2)| QubitCal { index, readout_error, t1: 70.0, t2 })
                .collect(),
            edges: edges
                .iter()
                .map(|&(a, b, cnot_error)| EdgeCal { a, b, cnot_error, duration: 0.4 })
                .collect(),
            single_qubit_duration: 0.1,
        }
    }

    #[test]
    fn forced_linear_chain_is_found() {
        let cal = cal_from(
            &[(0, 0.02, 80.0), (1, 0.02, 80.0), (2, 0.02, 80.0), (3, 0.02, 80.0)],
            &[(0, 1, 0.02), (1, 2, 0.02), (2, 3, 0.02)],
        );
        let config = SelectionConfig::new(4, 0.05, 20.0);
        let chain = best_chain(&cal, &config).unwrap();
        assert_eq!(chain, vec![0, 1, 2, 3]);
        assert_eq!(brute_force_chain(&cal, &config).unwrap(), chain);
    }

    #[test]
    fn six_qubit_fixture_reproduces_known_average() {
        let cal = crate::noise::tests::chain_fixture();
        let config = SelectionConfig::new(6, 0.08, 20.0);
        let chain = best_chain(&cal, &config).unwrap();
        assert_eq!(chain, vec![3, 2, 1, 0, 5, 6]);
        assert_eq!(chain_average(&cal, &chain), 0.0215);
        assert_eq!(brute_force_chain(&cal, &config).unwrap(), chain);
        let stats = chain_stats(&cal, &chain);
        assert_eq!((stats.cnot_min, stats.cnot_max), (0.0127, 0.0288));
        assert_eq!((stats.readout_min, stats.readout_max), (0.0370, 0.0670));
        assert_eq!((stats.t2_min, stats.t2_max), (58.03, 125.01));
    }

    #[test]
    fn restricted_list_grows_until_a_chain_appears() {
        // The three lowest edges form a star around qubit 1; only after
        // admitting the fourth does a 4-chain exist.
        let cal = cal_from(
            &[(0, 0.02, 80.0), (1, 0.02, 80.0), (2, 0.02, 80.0), (3, 0.02, 80.0), (4, 0.02, 80.0)],
            &[(0, 1, 0.010), (1, 2, 0.011), (1, 3, 0.012), (2, 3, 0.020), (3, 4, 0.030)],
        );
        let config = SelectionConfig::new(4, 0.05, 20.0);
        let chain = best_chain(&cal, &config).unwrap();
        assert_eq!(chain, vec![0, 1, 2, 3]);
        assert_eq!(brute_force_chain(&cal, &config).unwrap(), chain);
    }

    #[test]
    fn measurement_threshold_relaxes_but_t2_never_does() {
        let noisy_middle = cal_from(
            &[(0, 0.01, 80.0), (1, 0.20, 80.0), (2, 0.01, 80.0)],
            &[(0, 1, 0.02), (1, 2, 0.02)],
        );
        let config = SelectionConfig::new(3, 0.05, 20.0);
        let chain = best_chain(&noisy_middle, &config).unwrap();
        assert_eq!(chain, vec![0, 1, 2], "readout gate opens after relaxation");
        assert!(
            brute_force_chain(&noisy_middle, &config).is_err(),
            "brute force keeps strict thresholds"
        );

        let dead_middle = cal_from(
            &[(0, 0.01, 80.0), (1, 0.01, 5.0), (2, 0.01, 80.0)],
            &[(0, 1, 0.02), (1, 2, 0.02)],
        );
        let err = best_chain(&dead_middle, &config).unwrap_err();
        assert!(matches!(err, SelectError::NoChain { chain_length: 3, .. }));
    }

    #[test]
    fn ties_break_toward_the_lexicographically_smallest_chain() {
        let config = SelectionConfig::new(3, 0.05, 20.0);

        // A 4-cycle with equal errors has four equally good 3-chains; the
        // exhaustive search returns the lexicographically smallest.
        let cycle = cal_from(
            &[(0, 0.02, 80.0), (1, 0.02, 80.0), (2, 0.02, 80.0), (3, 0.02, 80.0)],
            &[(0, 1, 0.02), (1, 3, 0.02), (0, 2, 0.02), (2, 3, 0.02)],
        );
        assert_eq!(brute_force_chain(&cycle, &config).unwrap(), vec![0, 1, 3]);

        // The two cheapest edges are disjoint, so the restricted search
        // first succeeds at M = 3 where two equal-average chains compete.
        let tied = cal_from(
            &[(0, 0.01, 80.0), (1, 0.01, 80.0), (2, 0.01, 80.0), (3, 0.01, 80.0)],
            &[(0, 1, 0.01), (2, 3, 0.01), (0, 3, 0.02), (1, 2, 0.02)],
        );
        let first = best_chain(&tied, &config).unwrap();
        assert_eq!(first, vec![0, 3, 2]);
        assert_eq!(best_chain(&tied, &config).unwrap(), first, "deterministic");
    }

    #[test]
    fn brute_force_on_pairs_and_disconnected_graphs() {
        let cal = cal_from(
            &[(0, 0.02, 80.0), (1, 0.02, 80.0), (2, 0.02, 80.0), (3, 0.02, 80.0)],
            &[(0, 1, 0.03), (2, 3, 0.01)],
        );
        let pair = brute_force_chain(&cal, &SelectionConfig::new(2, 0.05, 20.0)).unwrap();
        assert_eq!(pair, vec![2, 3], "lowest-error edge wins");
        assert!(matches!(
            brute_force_chain(&cal, &SelectionConfig::new(3, 0.05, 20.0)),
            Err(SelectError::NoChain { .. })
        ));
    }

    #[test]
    fn config_validation() {
        let cal = cal_from(&[(0, 0.02, 80.0), (1, 0.02, 80.0)], &[(0, 1, 0.02)]);
        for bad in [
            SelectionConfig::new(1, 0.05, 20.0),
            SelectionConfig::new(2, 0.0, 20.0),
            SelectionConfig { relax_factor: 1.0, ..SelectionConfig::new(2, 0.05, 20.0) },
        ] {
            assert!(matches!(best_chain(&cal, &bad), Err(SelectError::BadConfig(_))));
        }
    }
}
