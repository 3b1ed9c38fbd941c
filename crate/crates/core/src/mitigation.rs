//! Symmetry-sector post-selection.
//!
//! The evolution conserves total σᶻ, so any measured bitstring outside the
//! initial state's sector is a detector of at least one error. Discarding
//! those shots cancels the leading-order bit-flip error: a single flip
//! always leaves the sector, so surviving errors need at least two flips
//! and enter at O(p²).

use crate::sim::{sz_of_key, Counts};

/// Result of filtering counts to one total-σᶻ sector.
///
/// `kept` may be empty when noise scrambled every shot out of the sector;
/// observables computed on it then report their own empty-counts error
/// instead of silently yielding zero.
#[derive(Debug, Clone, PartialEq)]
pub struct PostselectionReport {
    pub kept: Counts,
    pub retained_fraction: f64,
    pub target_sz: i32,
}

/// Keeps exactly the shots whose bitstring has Σσᶻ = target_sz.
///
/// Sector membership is integer arithmetic on the key, so the split is
/// exact. An empty input yields an empty report with fraction 0.
pub fn postselect(counts: &Counts, target_sz: i32) -> PostselectionReport {
    let mut kept = Counts::new(counts.n_bits());
    for (key, tally) in counts.iter() {
        if sz_of_key(key) == target_sz {
            kept.record_key(key, tally).expect("key came from counts of the same width");
        }
    }
    let retained_fraction = if counts.shots() == 0 {
        0.0
    } else {
        kept.shots() as f64 / counts.shots() as f64
    };
    PostselectionReport { kept, retained_fraction, target_sz }
}
