//! Linear latent-factor lab.
//!
//! Paired observations are generated as `x¹ = G¹ℓ + ξ¹`, `x² = G²ℓ + ξ²` from
//! a shared latent `ℓ ∈ ℝ^q`. Unimodal encoders are the closed-form optimum of
//! a linear contrastive objective under complementary masking, and the
//! alignment is fitted on top of the encoded features. This is where the
//! trade-off in the retained dimension `s` can be measured directly, because
//! the signal and noise parts of every observation are known.

mod bound;
mod classes;
mod encoder;
mod ranksum;
mod tradeoff;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{CsaError, Result};
use crate::linalg::Matrix;

pub use bound::{distance_bound_check, BoundReport, ModalityBound};
pub use classes::{ClassTask, ClassTaskConfig, EncodedClassTask};
pub use encoder::{offdiag_moment, optimal_linear_encoder};
pub use ranksum::{rank_sum, rank_sum_pvalue, RankSum};
pub use tradeoff::{tradeoff_curves, LinearPipeline, TradeoffRow};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig {
    /// Latent dimension.
    pub q: usize,
    pub p1: usize,
    pub p2: usize,
    pub n: usize,
    pub noise_sigma: f64,
    pub latent_sigma: f64,
    pub seed: u64,
}

impl Default for SyntheticConfig {
    /// The configuration the trade-off curves are documented against.
    fn default() -> Self {
        SyntheticConfig {
            q: 10,
            p1: 40,
            p2: 60,
            n: 2000,
            noise_sigma: tradeoff::DEFAULT_NOISE_SIGMA,
            latent_sigma: 1.0,
            seed: tradeoff::DEFAULT_SEED,
        }
    }
}

impl SyntheticConfig {
    pub fn validate(&self) -> Result<()> {
        if self.q == 0 || self.q > self.p1.min(self.p2) {
            return Err(CsaError::InvalidParameter(format!(
                "latent dim q = {} must be in 1..=min(p1, p2) = {}",
                self.q,
                self.p1.min(self.p2)
            )));
        }
        if self.n < 2 {
            return Err(CsaError::InsufficientItems { needed: 2, found: self.n });
        }
        for (name, v) in [("noise_sigma", self.noise_sigma), ("latent_sigma", self.latent_sigma)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CsaError::InvalidParameter(format!("{name} must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

/// Generated data. Signal and noise are kept apart so that
/// `x1 = g1·latents + noise1` can be recomputed exactly.
#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub config: SyntheticConfig,
    /// q × n
    pub latents: Matrix,
    /// p1 × q
    pub g1: Matrix,
    /// p2 × q
    pub g2: Matrix,
    pub x1: Matrix,
    pub x2: Matrix,
    pub noise1: Matrix,
    pub noise2: Matrix,
}

pub(crate) fn gaussian_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize, sigma: f64) -> Matrix {
    Matrix::from_fn(rows, cols, |_, _| sigma * rng.sample::<f64, _>(StandardNormal))
}

/// Gaussian matrix filled column by column, so column `j` is the `j`-th draw.
pub(crate) fn gaussian_columns(rng: &mut ChaCha8Rng, rows: usize, cols: usize, sigma: f64) -> Matrix {
    gaussian_matrix(rng, cols, rows, sigma).transpose()
}

/// Mixes a seed with a stream index so derived experiments get independent RNGs.
pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws mixing maps, latents and noise for the configuration.
pub fn generate(cfg: &SyntheticConfig) -> Result<SyntheticDataset> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let g1 = gaussian_matrix(&mut rng, cfg.p1, cfg.q, 1.0);
    let g2 = gaussian_matrix(&mut rng, cfg.p2, cfg.q, 1.0);
    Ok(sample_observations(cfg.clone(), g1, g2, &mut rng))
}

fn sample_observations(config: SyntheticConfig, g1: Matrix, g2: Matrix, rng: &mut ChaCha8Rng) -> SyntheticDataset {
    let latents = gaussian_columns(rng, config.q, config.n, config.latent_sigma);
    let noise1 = gaussian_columns(rng, config.p1, config.n, config.noise_sigma);
    let noise2 = gaussian_columns(rng, config.p2, config.n, config.noise_sigma);
    let x1 = g1.mul_unchecked(&latents).add(&noise1);
    let x2 = g2.mul_unchecked(&latents).add(&noise2);
    SyntheticDataset { config, latents, g1, g2, x1, x2, noise1, noise2 }
}

impl SyntheticDataset {
    /// Fresh latents and noise through the same mixing maps.
    pub fn resample(&self, n: usize, seed: u64) -> Result<SyntheticDataset> {
        let config = SyntheticConfig { n, seed, ..self.config.clone() };
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok(sample_observations(config, self.g1.clone(), self.g2.clone(), &mut rng))
    }

    /// Noise-free observations `G·ℓ` for modality 1 or 2.
    pub fn signal(&self, modality: u8) -> Matrix {
        match modality {
            1 => self.g1.mul_unchecked(&self.latents),
            _ => self.g2.mul_unchecked(&self.latents),
        }
    }
}

/// Complementary random masking: each entry goes to exactly one of the two
/// outputs with probability 1/2, the other output holds 0 there.
pub fn complementary_mask_pairs(x: &Matrix, seed: u64) -> (Matrix, Matrix) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Matrix::zeros(x.rows(), x.cols());
    let mut b = Matrix::zeros(x.rows(), x.cols());
    // Column-major so each item's mask is drawn contiguously.
    for j in 0..x.cols() {
        for i in 0..x.rows() {
            if rng.random::<bool>() {
                a[(i, j)] = x[(i, j)];
            } else {
                b[(i, j)] = x[(i, j)];
            }
        }
    }
    (a, b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> SyntheticConfig {
        SyntheticConfig { q: 3, p1: 5, p2: 7, n: 50, noise_sigma: 0.5, latent_sigma: 2.0, seed: 9 }
    }

    #[test]
    fn reconstruction_identity_is_exact() {
        let d = generate(&small()).unwrap();
        assert_eq!(d.g1.matmul(&d.latents).unwrap().add(&d.noise1), d.x1);
        assert_eq!(d.g2.matmul(&d.latents).unwrap().add(&d.noise2), d.x2);
        assert_eq!(d.x1.shape(), (5, 50));
        assert_eq!(d.latents.shape(), (3, 50));
    }

    #[test]
    fn same_seed_same_data() {
        let a = generate(&small()).unwrap();
        let b = generate(&small()).unwrap();
        assert_eq!(a.x1, b.x1);
        assert_eq!(a.noise2, b.noise2);
        let c = generate(&SyntheticConfig { seed: 10, ..small() }).unwrap();
        assert_ne!(a.x1, c.x1);
    }

    #[test]
    fn noiseless_limit() {
        let d = generate(&SyntheticConfig { noise_sigma: 1e-12, ..small() }).unwrap();
        assert!(d.x1.max_abs_diff(&d.signal(1)) < 1e-10);
    }

    #[test]
    fn config_validation() {
        assert!(generate(&SyntheticConfig { q: 6, ..small() }).is_err());
        assert!(generate(&SyntheticConfig { n: 1, ..small() }).is_err());
        assert!(generate(&SyntheticConfig { noise_sigma: 0.0, ..small() }).is_err());
    }

    #[test]
    fn resample_keeps_maps() {
        let d = generate(&small()).unwrap();
        let e = d.resample(20, 77).unwrap();
        assert_eq!(d.g1, e.g1);
        assert_eq!(e.x1.cols(), 20);
        assert_ne!(d.x1.column(0), e.x1.column(0));
    }

    #[test]
    fn masks_are_complementary() {
        let x = Matrix::from_fn(4, 6, |i, j| (i * 7 + j) as f64 - 10.5);
        let (a, b) = complementary_mask_pairs(&x, 3);
        assert_eq!(a.add(&b), x);
        for k in 0..x.as_slice().len() {
            assert!(a.as_slice()[k] == 0.0 || b.as_slice()[k] == 0.0);
        }
        let (za, zb) = complementary_mask_pairs(&Matrix::zeros(3, 3), 1);
        assert_eq!(za.max_abs(), 0.0);
        assert_eq!(zb.max_abs(), 0.0);
    }

    #[test]
    fn derived_seeds_differ() {
        assert_ne!(derive_seed(1, 0), derive_seed(1, 1));
        assert_ne!(derive_seed(1, 0), derive_seed(2, 0));
        assert_eq!(derive_seed(5, 3), derive_seed(5, 3));
    }
}
