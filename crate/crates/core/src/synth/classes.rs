//! Class-structured variant of the latent-factor lab: latents cluster around
//! per-class means, and each class has a noise-free "caption" in modality 2.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{gaussian_columns, gaussian_matrix, optimal_linear_encoder};
use crate::error::{CsaError, Result};
use crate::features::FeatureMatrix;
use crate::linalg::Matrix;

#[derive(Debug, Clone, PartialEq)]
pub struct ClassTaskConfig {
    pub q: usize,
    pub p1: usize,
    pub p2: usize,
    pub n_classes: usize,
    pub n_train: usize,
    pub n_test: usize,
    /// Standard deviation of the class means.
    pub class_sigma: f64,
    /// Within-class latent spread.
    pub within_sigma: f64,
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for ClassTaskConfig {
    fn default() -> Self {
        ClassTaskConfig {
            q: 10,
            p1: 40,
            p2: 60,
            n_classes: 10,
            n_train: 2000,
            n_test: 1000,
            class_sigma: 1.0,
            within_sigma: 0.5,
            noise_sigma: 5.0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ClassTask {
    pub config: ClassTaskConfig,
    pub g1: Matrix,
    pub g2: Matrix,
    /// q × n_classes
    pub class_means: Matrix,
    pub train_x1: Matrix,
    pub train_x2: Matrix,
    pub train_labels: Vec<usize>,
    pub test_x1: Matrix,
    pub test_x2: Matrix,
    pub test_labels: Vec<usize>,
}

/// Encoded features ready for alignment and evaluation.
#[derive(Debug, Clone)]
pub struct EncodedClassTask {
    pub train1: FeatureMatrix,
    pub train2: FeatureMatrix,
    pub test1: FeatureMatrix,
    pub test2: FeatureMatrix,
    /// One modality-2 prototype per class, ids `class_<k>`.
    pub prototypes: FeatureMatrix,
    pub train_labels: Vec<usize>,
    pub test_labels: Vec<usize>,
}

impl ClassTaskConfig {
    pub fn validate(&self) -> Result<()> {
        if self.q == 0 || self.q > self.p1.min(self.p2) {
            return Err(CsaError::InvalidParameter(format!("latent dim q = {} must be in 1..=min(p1, p2)", self.q)));
        }
        if self.n_classes < 2 {
            return Err(CsaError::InvalidParameter("need at least 2 classes".into()));
        }
        if self.n_train < 2 || self.n_test < 1 {
            return Err(CsaError::InsufficientItems { needed: 2, found: self.n_train.min(self.n_test) });
        }
        for v in [self.class_sigma, self.within_sigma, self.noise_sigma] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CsaError::InvalidParameter(format!("sigmas must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

impl ClassTask {
    pub fn generate(config: &ClassTaskConfig) -> Result<Self> {
        config.validate()?;
        let c = config;
        let mut rng = ChaCha8Rng::seed_from_u64(c.seed);
        let g1 = gaussian_matrix(&mut rng, c.p1, c.q, 1.0);
        let g2 = gaussian_matrix(&mut rng, c.p2, c.q, 1.0);
        let class_means = gaussian_columns(&mut rng, c.q, c.n_classes, c.class_sigma);

        let mut draw = |n: usize| {
            let labels: Vec<usize> = (0..n).map(|_| rng.random_range(0..c.n_classes)).collect();
            let spread = gaussian_columns(&mut rng, c.q, n, c.within_sigma);
            let latents = class_means.select_columns(&labels).add(&spread);
            let x1 = g1.mul_unchecked(&latents).add(&gaussian_columns(&mut rng, c.p1, n, c.noise_sigma));
            let x2 = g2.mul_unchecked(&latents).add(&gaussian_columns(&mut rng, c.p2, n, c.noise_sigma));
            (labels, x1, x2)
        };
        let (train_labels, train_x1, train_x2) = draw(c.n_train);
        let (test_labels, test_x1, test_x2) = draw(c.n_test);
        Ok(ClassTask {
            config: config.clone(),
            g1,
            g2,
            class_means,
            train_x1,
            train_x2,
            train_labels,
            test_x1,
            test_x2,
            test_labels,
        })
    }

    /// Fits both encoders on the training observations and encodes every split.
    /// Prototypes are the noise-free class means pushed through modality 2.
    pub fn encode(&self) -> Result<EncodedClassTask> {
        let q = self.config.q;
        let e1 = optimal_linear_encoder(&self.train_x1, q)?;
        let e2 = optimal_linear_encoder(&self.train_x2, q)?;
        let ids = |prefix: &str, n: usize| (0..n).map(|i| format!("{prefix}{i}")).collect::<Vec<_>>();
        let n_tr = self.config.n_train;
        let n_te = self.config.n_test;
        let k = self.config.n_classes;
        Ok(EncodedClassTask {
            train1: FeatureMatrix::new(e1.mul_unchecked(&self.train_x1), ids("train_", n_tr))?,
            train2: FeatureMatrix::new(e2.mul_unchecked(&self.train_x2), ids("train_", n_tr))?,
            test1: FeatureMatrix::new(e1.mul_unchecked(&self.test_x1), ids("test_", n_te))?,
            test2: FeatureMatrix::new(e2.mul_unchecked(&self.test_x2), ids("test_", n_te))?,
            prototypes: FeatureMatrix::new(e2.mul_unchecked(&self.g2.mul_unchecked(&self.class_means)), ids("class_", k))?,
            train_labels: self.train_labels.clone(),
            test_labels: self.test_labels.clone(),
        })
    }
}
