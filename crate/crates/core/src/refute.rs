//! Robustness checks for an estimated effect: random common cause, data
//! subset and placebo treatment.
//!
//! Replicate `r` draws from a ChaCha8 stream seeded with `seed + r`, so a
//! result depends only on `(seed, replicates)`.

use rand::seq::{index, SliceRandom};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::dataset::{Column, Role};
use crate::error::{Error, Result};
use crate::inference::{fit_effect, CausalEstimate, CausalQuery, SIGNIFICANCE_LEVEL};
use crate::regression::t_test_p_value;
use crate::Table;

/// Relative tolerance of the closeness rules.
pub const RELATIVE_TOLERANCE: f64 = 0.10;

/// Minimum rows in a data subset.
pub const MIN_SUBSET_ROWS: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RefutationMethod {
    RandomCommonCause,
    DataSubset,
    PlaceboTreatment,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RefutationResult {
    pub method: RefutationMethod,
    /// Mean of the replicate estimates.
    pub refuted_ate: f64,
    pub passed: bool,
    pub replicates: usize,
    pub seed: u64,
    pub replicate_values: Vec<f64>,
    /// Two-sided p-value of the mean placebo effect (placebo only).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_value: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RefuteConfig {
    pub replicates: usize,
    pub subset_fraction: f64,
    pub seed: u64,
}

impl Default for RefuteConfig {
    fn default() -> Self {
        RefuteConfig {
            replicates: 20,
            subset_fraction: 0.8,
            seed: 42,
        }
    }
}

fn replicate_rng(seed: u64, r: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.wrapping_add(r as u64))
}

fn check_replicates(replicates: usize) -> Result<()> {
    if replicates == 0 {
        Err(Error::InvalidArgument("replicates must be >= 1".into()))
    } else {
        Ok(())
    }
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// `|refuted - original| <= max(10% of |original|, 2 standard errors)`.
fn close_to_original(refuted: f64, original: &CausalEstimate) -> bool {
    (refuted - original.ate).abs()
        <= (RELATIVE_TOLERANCE * original.ate.abs()).max(2.0 * original.std_error)
}

/// Add an independent standard-normal column to the adjustment set and
/// re-estimate.
pub fn random_common_cause(
    table: &Table,
    query: &CausalQuery,
    original: &CausalEstimate,
    replicates: usize,
    seed: u64,
) -> Result<RefutationResult> {
    check_replicates(replicates)?;
    let mut name = String::from("random_common_cause");
    while table.schema().index_of(&name).is_some() {
        name.insert(0, '_');
    }
    let treatment = query.treatment_def.as_f64();
    let mut adjustment = original.adjustment_set.clone();
    adjustment.push(name.clone());

    let values = (0..replicates)
        .map(|r| {
            let mut rng = replicate_rng(seed, r);
            let noise: Vec<f64> = (0..table.n_rows())
                .map(|_| StandardNormal.sample(&mut rng))
                .collect();
            let augmented =
                table.with_column(Column::new(name.clone(), "", Role::Auxiliary), noise)?;
            Ok(fit_effect(&augmented, &treatment, &query.outcome, &adjustment)?.ate)
        })
        .collect::<Result<Vec<f64>>>()?;
    let refuted = mean(&values);
    Ok(RefutationResult {
        method: RefutationMethod::RandomCommonCause,
        refuted_ate: refuted,
        passed: close_to_original(refuted, original),
        replicates,
        seed,
        replicate_values: values,
        p_value: None,
    })
}

/// Re-estimate on `floor(fraction * n)` rows sampled without replacement.
pub fn data_subset(
    table: &Table,
    query: &CausalQuery,
    original: &CausalEstimate,
    fraction: f64,
    replicates: usize,
    seed: u64,
) -> Result<RefutationResult> {
    check_replicates(replicates)?;
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "subset fraction must be in (0, 1), got {fraction}"
        )));
    }
    let n = table.n_rows();
    let size = (fraction * n as f64).floor() as usize;
    if size < MIN_SUBSET_ROWS {
        return Err(Error::TooFewRows {
            needed: MIN_SUBSET_ROWS,
            got: size,
        });
    }
    let treatment = query.treatment_def.as_f64();
    let values = (0..replicates)
        .map(|r| {
            let mut rows = index::sample(&mut replicate_rng(seed, r), n, size).into_vec();
            rows.sort_unstable();
            let sub = table.select_rows(&rows);
            let t: Vec<f64> = rows.iter().map(|&i| treatment[i]).collect();
            Ok(fit_effect(&sub, &t, &query.outcome, &original.adjustment_set)?.ate)
        })
        .collect::<Result<Vec<f64>>>()?;
    let refuted = mean(&values);
    Ok(RefutationResult {
        method: RefutationMethod::DataSubset,
        refuted_ate: refuted,
        passed: close_to_original(refuted, original),
        replicates,
        seed,
        replicate_values: values,
        p_value: None,
    })
}

/// Replace the treatment with a random permutation of itself and re-estimate.
///
/// Passes when the mean placebo effect is not significant (tested against the
/// mean replicate standard error) or is within 10% of the original magnitude.
pub fn placebo_treatment(
    table: &Table,
    query: &CausalQuery,
    original: &CausalEstimate,
    replicates: usize,
    seed: u64,
) -> Result<RefutationResult> {
    check_replicates(replicates)?;
    let treatment = query.treatment_def.as_f64();
    let fits = (0..replicates)
        .map(|r| {
            let mut placebo = treatment.clone();
            placebo.shuffle(&mut replicate_rng(seed, r));
            fit_effect(table, &placebo, &query.outcome, &original.adjustment_set)
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = fits.iter().map(|f| f.ate).collect();
    let refuted = mean(&values);
    let se = mean(&fits.iter().map(|f| f.std_error).collect::<Vec<_>>());
    let p_value = t_test_p_value(refuted, se, fits[0].df);
    let passed =
        p_value >= SIGNIFICANCE_LEVEL || refuted.abs() <= RELATIVE_TOLERANCE * original.ate.abs();
    Ok(RefutationResult {
        method: RefutationMethod::PlaceboTreatment,
        refuted_ate: refuted,
        passed,
        replicates,
        seed,
        replicate_values: values,
        p_value: Some(p_value),
    })
}
