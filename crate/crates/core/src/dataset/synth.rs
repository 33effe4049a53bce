//! Synthetic stand-in for the 144-specimen fire-test database.
//!
//! Each input is an independent scaled beta variate on its observed
//! `[min, max]` range, with shape parameters fit by the method of moments so
//! that mean and standard deviation match the published summary statistics.
//! The effective length factor `K` has no published statistics; its range and
//! moments below are a synthetic choice.
//!
//! Fire resistance follows a linear structural equation in the inputs plus
//! Gaussian noise, clipped to the observed `[55, 389]` minute range. The
//! coefficients are illustrative: signs follow the reported treatment effects
//! (negative for `L` and `K`, positive for `r`, `fc`, `C`, `P`) and `W` carries
//! a small positive coefficient chosen for the generator, not taken from data.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Normal};

use super::{Schema, Table, FIRE_INPUTS};
use crate::error::{Error, Result};

/// Target marginal for one input column.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarginalSpec {
    pub name: &'static str,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std_dev: f64,
}

impl MarginalSpec {
    /// Method-of-moments beta shape parameters on `[min, max]`.
    pub fn beta_shape(&self) -> (f64, f64) {
        let range = self.max - self.min;
        let m = (self.mean - self.min) / range;
        let v = (self.std_dev / range).powi(2);
        let common = m * (1.0 - m) / v - 1.0;
        (m * common, (1.0 - m) * common)
    }
}

/// Linear structural equation for the synthetic outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FireDgp {
    pub marginals: [MarginalSpec; 7],
    /// Coefficient per input, in `FIRE_INPUTS` order (minutes per input unit).
    pub coefficients: [f64; 7],
    pub intercept: f64,
    pub noise_sd: f64,
    pub outcome_min: f64,
    pub outcome_max: f64,
}

impl FireDgp {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        FIRE_INPUTS
            .iter()
            .position(|n| *n == name)
            .map(|i| self.coefficients[i])
    }

    /// Expected outcome before clipping, at the marginal means.
    pub fn mean_outcome(&self) -> f64 {
        self.intercept
            + self
                .marginals
                .iter()
                .zip(self.coefficients)
                .map(|(m, c)| m.mean * c)
                .sum::<f64>()
    }
}

const fn spec(name: &'static str, min: f64, max: f64, mean: f64, std_dev: f64) -> MarginalSpec {
    MarginalSpec {
        name,
        min,
        max,
        mean,
        std_dev,
    }
}

/// The generator used by [`synthesize_fire_dataset`].
pub const FIRE_DGP: FireDgp = FireDgp {
    marginals: [
        spec("W", 203.0, 610.0, 350.4, 105.3),
        spec("r", 0.9, 4.4, 2.1, 0.5),
        spec("L", 2.1, 5.7, 3.9, 0.5),
        spec("fc", 24.0, 138.0, 55.7, 33.0),
        spec("K", 0.5, 2.0, 1.0, 0.25),
        spec("C", 25.0, 64.0, 42.4, 7.1),
        spec("P", 0.0, 5373.0, 1501.8, 1168.6),
    ],
    coefficients: [0.1, 15.0, -20.0, 0.3, -60.0, 2.5, 0.01],
    // places the mean outcome at 176.6 min
    intercept: 110.332,
    noise_sd: 15.0,
    outcome_min: 55.0,
    outcome_max: 389.0,
};

/// Draw `n` synthetic fire-test rows. Bit-deterministic for a given seed.
pub fn synthesize_fire_dataset(n: usize, seed: u64) -> Result<Table> {
    if n < 10 {
        return Err(Error::InvalidArgument(format!(
            "synthetic dataset needs n >= 10, got {n}"
        )));
    }
    let dgp = &FIRE_DGP;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(8);
    for m in &dgp.marginals {
        let (a, b) = m.beta_shape();
        let beta = Beta::new(a, b).expect("beta shape parameters are positive");
        let range = m.max - m.min;
        columns.push(
            (0..n)
                .map(|_| (m.min + range * beta.sample(&mut rng)).clamp(m.min, m.max))
                .collect(),
        );
    }
    let noise = Normal::new(0.0, dgp.noise_sd).expect("finite noise sd");
    let outcome = (0..n)
        .map(|i| {
            let signal: f64 = columns
                .iter()
                .zip(dgp.coefficients)
                .map(|(c, k)| c[i] * k)
                .sum();
            (dgp.intercept + signal + noise.sample(&mut rng))
                .clamp(dgp.outcome_min, dgp.outcome_max)
        })
        .collect();
    columns.push(outcome);
    Table::from_columns(Schema::fire(), columns)
}
