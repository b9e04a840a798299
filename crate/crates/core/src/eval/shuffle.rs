use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{CsaError, Result};

/// Positions picked for corruption and the resulting modality-2 index per position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShufflePlan {
    /// Sorted positions whose partner was reassigned.
    pub picked: Vec<usize>,
    pub indices: Vec<usize>,
}

/// Corrupts a fraction of an `n`-item pairing: `round(fraction·n)` positions
/// are picked uniformly and their assignments permuted uniformly among
/// themselves. Unpicked positions keep their own index.
pub fn shuffle_plan(n: usize, fraction: f64, seed: u64) -> Result<ShufflePlan> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(CsaError::InvalidParameter(format!("shuffle fraction {fraction} outside [0, 1]")));
    }
    let mut indices: Vec<usize> = (0..n).collect();
    let k = (fraction * n as f64).round() as usize;
    if k == 0 {
        return Ok(ShufflePlan { picked: Vec::new(), indices });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picked = index::sample(&mut rng, n, k).into_vec();
    picked.sort_unstable();
    let mut targets = picked.clone();
    targets.shuffle(&mut rng);
    for (&pos, &t) in picked.iter().zip(&targets) {
        indices[pos] = t;
    }
    Ok(ShufflePlan { picked, indices })
}

/// Modality-2 index for each position; see [`shuffle_plan`].
pub fn shuffle_indices(n: usize, fraction: f64, seed: u64) -> Result<Vec<usize>> {
    Ok(shuffle_plan(n, fraction, seed)?.indices)
}

/// Applies [`shuffle_indices`] to the modality-2 side of a pairing.
pub fn shuffle_labels<T: Clone>(second: &[T], fraction: f64, seed: u64) -> Result<Vec<T>> {
    Ok(shuffle_indices(second.len(), fraction, seed)?.into_iter().map(|i| second[i].clone()).collect())
}
