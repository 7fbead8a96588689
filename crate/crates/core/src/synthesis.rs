//! The mixup engine.
//!
//! Synthetic row `k` picks two original rows `i_k`, `j_k` independently and
//! uniformly (so `i_k = j_k` happens with probability `1/n`, matching the
//! independent-copies model the moment identities rely on) and sets
//!
//! * continuous cells to `W·x_i + (1−W)·x_j`,
//! * categorical cells to `L_i` if `W^L ≥ τ`, else `L_j`.
//!
//! Under the standard scheme a single draw `W` per row drives every column.
//! Under the general scheme each continuous column gets its own independent
//! draw and one extra draw drives all categorical columns of the row.
//!
//! Synthetic values are not clipped to the observed range.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{ColumnData, ColumnKind, Dataset};
use crate::error::{Error, Result};
use crate::rng::{generation_seed, row_stream, StreamRng};
use crate::scalar::Scalar;
use crate::weights::{WeightDistribution, WeightSampler};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = ""))]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Scheme<T: Scalar> {
    Standard {
        weight: WeightDistribution<T>,
    },
    General {
        per_column: BTreeMap<String, WeightDistribution<T>>,
        categorical_weight: WeightDistribution<T>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Pairing {
    #[default]
    IndependentUniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = ""))]
pub struct MixupConfig<T: Scalar> {
    pub scheme: Scheme<T>,
    #[serde(default = "default_tau")]
    pub tau: T,
    pub m: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub pairing: Pairing,
}

fn default_tau<T: Scalar>() -> T {
    T::lit(0.5)
}

impl<T: Scalar> MixupConfig<T> {
    pub fn standard(weight: WeightDistribution<T>, m: usize, seed: u64) -> Self {
        MixupConfig { scheme: Scheme::Standard { weight }, tau: default_tau(), m, seed, pairing: Pairing::default() }
    }

    pub fn with_seed(&self, seed: u64) -> Self {
        MixupConfig { seed, ..self.clone() }
    }

    /// Weight law driving continuous column `name`.
    pub fn weight_for(&self, name: &str) -> Option<&WeightDistribution<T>> {
        match &self.scheme {
            Scheme::Standard { weight } => Some(weight),
            Scheme::General { per_column, .. } => per_column.get(name),
        }
    }

    pub fn validate_against(&self, data: &Dataset<T>) -> Result<()> {
        if self.m == 0 {
            return Err(Error::InvalidConfig("output size m must be positive".into()));
        }
        if !self.tau.is_finite() {
            return Err(Error::InvalidConfig("tau must be finite".into()));
        }
        match &self.scheme {
            Scheme::Standard { weight } => weight.validate()?,
            Scheme::General { per_column, categorical_weight } => {
                categorical_weight.validate()?;
                let schema = data.schema();
                for (name, w) in per_column {
                    w.validate()?;
                    match schema.index_of(name).map(|i| schema.columns[i].kind) {
                        Some(ColumnKind::Continuous) => {}
                        Some(ColumnKind::Categorical) => {
                            return Err(Error::InvalidConfig(format!(
                                "column {name:?} is categorical; it is driven by categorical_weight"
                            )))
                        }
                        None => return Err(Error::InvalidConfig(format!("weight given for unknown column {name:?}"))),
                    }
                }
                if let Some(missing) = schema.continuous_names().into_iter().find(|c| !per_column.contains_key(c)) {
                    return Err(Error::InvalidConfig(format!("general scheme has no weight for column {missing:?}")));
                }
            }
        }
        Ok(())
    }
}

fn draw_pair(rng: &mut StreamRng, n: usize) -> (usize, usize) {
    let i = rng.random_range(0..n);
    let j = rng.random_range(0..n);
    (i, j)
}

/// The `(i_k, j_k)` pairs used by [`synthesize`] for the same `n`, `m` and seed.
pub fn pair_indices(n: usize, m: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    if n < 2 {
        return Err(Error::TooFewRows(n));
    }
    Ok((0..m)
        .into_par_iter()
        .map(|k| draw_pair(&mut row_stream(seed, k as u64), n))
        .collect())
}

/// `w·a + (1−w)·b`.
#[inline]
pub fn mix<T: Scalar>(w: T, a: T, b: T) -> T {
    w * a + (T::one() - w) * b
}

/// Label of the synthetic row: `L_i` when `w ≥ τ`, else `L_j`.
#[inline]
pub fn pick_label<T: Scalar>(w: T, tau: T, li: u32, lj: u32) -> u32 {
    if w >= tau {
        li
    } else {
        lj
    }
}

enum Samplers<T: Scalar> {
    Standard(WeightSampler<T>),
    General { continuous: Vec<WeightSampler<T>>, categorical: WeightSampler<T> },
}

struct RowDraw<T> {
    i: usize,
    j: usize,
    /// One weight per continuous column (or one shared weight).
    weights: Vec<T>,
    label_weight: T,
}

/// Generates `cfg.m` synthetic rows from `data`.
pub fn synthesize<T: Scalar>(data: &Dataset<T>, cfg: &MixupConfig<T>) -> Result<Dataset<T>> {
    let n = data.n_rows();
    if n < 2 {
        return Err(Error::TooFewRows(n));
    }
    cfg.validate_against(data)?;
    let schema = data.schema();
    let samplers = match &cfg.scheme {
        Scheme::Standard { weight } => Samplers::Standard(weight.sampler()?),
        Scheme::General { per_column, categorical_weight } => Samplers::General {
            continuous: schema
                .continuous_names()
                .iter()
                .map(|name| per_column[name].sampler())
                .collect::<Result<_>>()?,
            categorical: categorical_weight.sampler()?,
        },
    };

    let draws: Vec<RowDraw<T>> = (0..cfg.m)
        .into_par_iter()
        .map(|k| {
            let mut rng = row_stream(cfg.seed, k as u64);
            let (i, j) = draw_pair(&mut rng, n);
            match &samplers {
                Samplers::Standard(s) => {
                    let w = s.draw(&mut rng);
                    RowDraw { i, j, weights: vec![w], label_weight: w }
                }
                Samplers::General { continuous, categorical } => {
                    let weights = continuous.iter().map(|s| s.draw(&mut rng)).collect();
                    let label_weight = categorical.draw(&mut rng);
                    RowDraw { i, j, weights, label_weight }
                }
            }
        })
        .collect();

    let shared = matches!(samplers, Samplers::Standard(_));
    let mut continuous_idx = 0usize;
    let columns = data
        .columns()
        .iter()
        .map(|col| match col {
            ColumnData::Continuous(x) => {
                let slot = if shared { 0 } else { continuous_idx };
                continuous_idx += 1;
                ColumnData::Continuous(draws.iter().map(|d| mix(d.weights[slot], x[d.i], x[d.j])).collect())
            }
            ColumnData::Categorical(l) => ColumnData::Categorical(
                draws.iter().map(|d| pick_label(d.label_weight, cfg.tau, l[d.i], l[d.j])).collect(),
            ),
        })
        .collect();
    Dataset::new(schema.clone(), columns)
}

/// Repeated synthesis: generation `g` (1-based) is synthesized from
/// generation `g−1` with seed `cfg.seed ⊕ g`. Calls `visit` with each
/// generation instead of keeping the whole chain.
pub fn resynthesize_each<T, F>(data: &Dataset<T>, cfg: &MixupConfig<T>, generations: usize, mut visit: F) -> Result<()>
where
    T: Scalar,
    F: FnMut(usize, &Dataset<T>) -> Result<()>,
{
    if generations == 0 {
        return Err(Error::InvalidConfig("generations must be at least 1".into()));
    }
    let mut current = synthesize(data, &cfg.with_seed(generation_seed(cfg.seed, 1)))?;
    visit(1, &current)?;
    for g in 2..=generations {
        current = synthesize(&current, &cfg.with_seed(generation_seed(cfg.seed, g as u64)))?;
        visit(g, &current)?;
    }
    Ok(())
}

/// All generations `1..=generations` of a resynthesis chain.
pub fn resynthesize<T: Scalar>(data: &Dataset<T>, cfg: &MixupConfig<T>, generations: usize) -> Result<Vec<Dataset<T>>> {
    let mut chain = Vec::with_capacity(generations);
    resynthesize_each(data, cfg, generations, |_, d| {
        chain.push(d.clone());
        Ok(())
    })?;
    Ok(chain)
}
