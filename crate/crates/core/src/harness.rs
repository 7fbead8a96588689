//! Desk-scale experiments: quadratic-regression inference on synthetic
//! data, a bivariate Gaussian preservation demo, and repeated-resynthesis
//! drift.

use rayon::prelude::*;
use serde::Serialize;

use crate::data::{ColumnInput, Dataset};
use crate::error::{Error, Result};
use crate::rng::sequential;
use crate::scalar::Scalar;
use crate::stats::{describe, ols_fit, relative_bias, BiasReport, StatsReport};
use crate::synthesis::{resynthesize_each, synthesize, MixupConfig};
use crate::weights::WeightDistribution;

const MIN_EXPERIMENT_ROWS: usize = 100;

/// Quadratic coefficient fitted on one synthetic sample next to the fit on
/// the original sample it was generated from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InferenceResult<T: Scalar> {
    pub seed: u64,
    pub u_at_half: T,
    pub estimate: T,
    pub std_error: T,
    pub ci: (T, T),
    pub reference_estimate: T,
    pub reference_ci: (T, T),
    pub reference_in_ci: bool,
}

impl<T: Scalar> InferenceResult<T> {
    pub fn gap(&self) -> T {
        (self.estimate - self.reference_estimate).abs()
    }
}

fn standard_normals<T: Scalar>(seed: u64, count: usize) -> Vec<T> {
    let mut rng = sequential(seed);
    (0..count).map(|_| T::sample_standard_normal(&mut rng)).collect()
}

/// `X ~ N(5, 1)`, `Y ~ N(X², 1)` as columns `x`, `y`.
pub fn quadratic_sample<T: Scalar>(n: usize, seed: u64) -> Result<Dataset<T>> {
    let z = standard_normals::<T>(seed, 2 * n);
    let x: Vec<T> = z[..n].iter().map(|&e| T::lit(5.0) + e).collect();
    let y: Vec<T> = x.iter().zip(&z[n..]).map(|(&x, &e)| x * x + e).collect();
    Dataset::from_columns(vec![("x", ColumnInput::Continuous(x)), ("y", ColumnInput::Continuous(y))])
}

/// Fits `target = β·regressor² + e` without intercept.
pub fn quadratic_fit<T: Scalar>(data: &Dataset<T>, regressor: &str, target: &str) -> Result<crate::stats::OlsFit<T>> {
    let x = data.continuous(regressor).ok_or_else(|| Error::UnknownColumn(regressor.to_string()))?;
    let y = data.continuous(target).ok_or_else(|| Error::UnknownColumn(target.to_string()))?;
    let design: Vec<Vec<T>> = x.iter().map(|&v| vec![v * v]).collect();
    ols_fit(&design, y, false)
}

/// One replicate: original sample of size `n`, standard-scheme synthesis of
/// `m = n` rows, and the quadratic fit on both. The original sample and the
/// pairing depend only on `seed`, so two weight laws run with the same seed
/// are paired.
pub fn quadratic_experiment<T: Scalar>(n: usize, weight: &WeightDistribution<T>, seed: u64) -> Result<InferenceResult<T>> {
    if n < MIN_EXPERIMENT_ROWS {
        return Err(Error::TooFewRows(n));
    }
    let original = quadratic_sample::<T>(n, seed)?;
    let reference = quadratic_fit(&original, "x", "y")?;
    let synthetic = synthesize(&original, &MixupConfig::standard(*weight, n, seed))?;
    let fit = quadratic_fit(&synthetic, "x", "y")?;
    let ci = fit.confidence_intervals[0];
    let reference_estimate = reference.coefficients[0];
    Ok(InferenceResult {
        seed,
        u_at_half: weight.u_value(T::lit(0.5)),
        estimate: fit.coefficients[0],
        std_error: fit.std_errors[0],
        ci,
        reference_estimate,
        reference_ci: reference.confidence_intervals[0],
        reference_in_ci: ci.0 <= reference_estimate && reference_estimate <= ci.1,
    })
}

/// A weight law under a display name, for sweeps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NamedWeight<T: Scalar> {
    pub name: String,
    pub weight: WeightDistribution<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticRun<T: Scalar> {
    pub weight: String,
    #[serde(flatten)]
    pub result: InferenceResult<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadraticStudy<T: Scalar> {
    pub n: usize,
    pub runs: Vec<QuadraticRun<T>>,
}

/// Runs every weight law on every seed in `seeds`; replicates run in
/// parallel and are returned in (seed, weight) order.
pub fn quadratic_study<T: Scalar>(n: usize, weights: &[NamedWeight<T>], seeds: &[u64]) -> Result<QuadraticStudy<T>> {
    let jobs: Vec<(u64, &NamedWeight<T>)> = seeds.iter().flat_map(|&s| weights.iter().map(move |w| (s, w))).collect();
    let runs = jobs
        .into_par_iter()
        .map(|(seed, w)| {
            Ok(QuadraticRun { weight: w.name.clone(), result: quadratic_experiment(n, &w.weight, seed)? })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuadraticStudy { n, runs })
}

impl<T: Scalar> QuadraticStudy<T> {
    pub fn runs_for<'a>(&'a self, weight: &'a str) -> impl Iterator<Item = &'a InferenceResult<T>> + 'a {
        self.runs.iter().filter(move |r| r.weight == weight).map(|r| &r.result)
    }

    pub fn coverage(&self, weight: &str) -> Option<T> {
        let (hit, total) = self.runs_for(weight).fold((0usize, 0usize), |(h, t), r| (h + usize::from(r.reference_in_ci), t + 1));
        (total > 0).then(|| T::from_usize_lossy(hit) / T::from_usize_lossy(total))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `seed,weight,u_at_half,estimate,std_error,ci_lower,ci_upper,reference,reference_in_ci`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["seed", "weight", "u_at_half", "estimate", "std_error", "ci_lower", "ci_upper", "reference", "reference_in_ci"])?;
        for run in &self.runs {
            let r = &run.result;
            w.write_record([
                r.seed.to_string(),
                run.weight.clone(),
                r.u_at_half.to_string(),
                r.estimate.to_string(),
                r.std_error.to_string(),
                r.ci.0.to_string(),
                r.ci.1.to_string(),
                r.reference_estimate.to_string(),
                r.reference_in_ci.to_string(),
            ])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8"))
    }
}

/// `n` draws from the bivariate normal with unit-free covariance
/// `[[1.1, 0.9], [0.9, 1.1]]`, as columns `x`, `y`.
pub fn gaussian_sample<T: Scalar>(n: usize, seed: u64) -> Result<Dataset<T>> {
    let z = standard_normals::<T>(seed, 2 * n);
    let l11 = T::lit(1.1).sqrt();
    let l21 = T::lit(0.9) / l11;
    let l22 = (T::lit(1.1) - l21 * l21).sqrt();
    let x: Vec<T> = z[..n].iter().map(|&a| l11 * a).collect();
    let y: Vec<T> = z[..n].iter().zip(&z[n..]).map(|(&a, &b)| l21 * a + l22 * b).collect();
    Dataset::from_columns(vec![("x", ColumnInput::Continuous(x)), ("y", ColumnInput::Continuous(y))])
}

/// `n` standard-normal draws as a single column `x`.
pub fn gaussian_column<T: Scalar>(n: usize, seed: u64) -> Result<Dataset<T>> {
    Dataset::from_columns(vec![("x", ColumnInput::Continuous(standard_normals(seed, n)))])
}

/// Synthesizes `m` rows from a bivariate Gaussian sample of size `n` and
/// reports the bias of every moment against the sample.
pub fn gaussian_demo<T: Scalar>(n: usize, m: usize, weight: &WeightDistribution<T>, seed: u64) -> Result<BiasReport<T>> {
    if n < MIN_EXPERIMENT_ROWS {
        return Err(Error::TooFewRows(n));
    }
    let original = gaussian_sample::<T>(n, seed)?;
    let synthetic = synthesize(&original, &MixupConfig::standard(*weight, m, seed))?;
    relative_bias(&describe(&original)?, &describe(&synthetic)?)
}

/// Regression tracked across generations: `target = β·regressor² + e`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct QuadraticColumns {
    pub regressor: String,
    pub target: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DriftOptions {
    pub quadratic: Option<QuadraticColumns>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ColumnDrift<T: Scalar> {
    pub column: String,
    pub variance: T,
    /// Variance relative to generation 0.
    pub ratio: T,
    /// `variance_scale^g`.
    pub predicted: T,
    /// 4σ Monte-Carlo envelope around `predicted`.
    pub envelope: (T, T),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Generation<T: Scalar> {
    pub generation: usize,
    pub columns: Vec<ColumnDrift<T>>,
    /// Largest absolute category-frequency change since generation 0.
    pub max_frequency_shift: T,
    pub frequency_tolerance: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub quadratic_estimate: Option<T>,
    pub stats: StatsReport<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftTrace<T: Scalar> {
    pub m: usize,
    pub seed: u64,
    pub generations: Vec<Generation<T>>,
}

fn excess_kurtosis_term<T: Scalar>(x: &[T]) -> T {
    let n = T::from_usize_lossy(x.len());
    let mean = x.iter().copied().sum::<T>() / n;
    let (m2, m4) = x.iter().fold((T::zero(), T::zero()), |(a, b), &v| {
        let d2 = (v - mean) * (v - mean);
        (a + d2, b + d2 * d2)
    });
    let (m2, m4) = (m2 / n, m4 / n);
    if m2 > T::zero() {
        m4 / (m2 * m2) - T::one()
    } else {
        T::zero()
    }
}

/// Runs `generations` rounds of resynthesis (each of `cfg.m` rows) starting
/// from `data` with seed `seed`, recording the statistics of every
/// generation. Generation 0 is `data` itself.
///
/// The sample variance of `m` iid draws has relative variance about
/// `(κ − 1)/m` for kurtosis `κ`, so the log variance ratio after `g`
/// generations has standard deviation about `√(Σ_h (κ̂_h − 1)/m)`, with
/// `κ̂_h` the sample kurtosis of the parent of generation `h`. The envelope
/// is `scale^g · exp(±4σ)`. Frequencies move by a multinomial resample per
/// generation, giving the tolerance `4·√(g/(4m))`.
pub fn drift_study<T: Scalar>(
    data: &Dataset<T>,
    cfg: &MixupConfig<T>,
    generations: usize,
    seed: u64,
    options: &DriftOptions,
) -> Result<DriftTrace<T>> {
    if generations == 0 {
        return Err(Error::InvalidConfig("generations must be at least 1".into()));
    }
    cfg.validate_against(data)?;
    let names = data.schema().continuous_names();
    let scales: Vec<T> = names
        .iter()
        .map(|c| cfg.weight_for(c).map(WeightDistribution::variance_scale).unwrap_or(T::one()))
        .collect();
    let m = T::from_usize_lossy(cfg.m);

    let quadratic = |d: &Dataset<T>| -> Result<Option<T>> {
        match &options.quadratic {
            Some(q) => Ok(Some(quadratic_fit(d, &q.regressor, &q.target)?.coefficients[0])),
            None => Ok(None),
        }
    };

    let base = describe(data)?;
    let base_var: Vec<T> = names.iter().map(|c| base.variance(c).unwrap_or(T::nan())).collect();
    let mut log_var: Vec<T> = vec![T::zero(); names.len()];
    let mut parent_kurt: Vec<T> = names.iter().map(|c| excess_kurtosis_term(data.continuous(c).unwrap_or(&[]))).collect();

    let record = |g: usize, stats: StatsReport<T>, log_var: &[T], q: Option<T>| -> Generation<T> {
        let gf = T::from_usize_lossy(g);
        let columns = names
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let variance = stats.variance(c).unwrap_or(T::nan());
                let predicted = scales[k].powi(g as i32);
                let half = T::lit(4.0) * log_var[k].sqrt();
                ColumnDrift {
                    column: c.clone(),
                    variance,
                    ratio: variance / base_var[k],
                    predicted,
                    envelope: (predicted * (-half).exp(), predicted * half.exp()),
                }
            })
            .collect();
        let max_frequency_shift = base
            .categorical
            .iter()
            .flat_map(|col| {
                col.categories.iter().map(|f| (f.frequency - stats.frequency(&col.column, &f.category).unwrap_or(T::zero())).abs())
            })
            .fold(T::zero(), T::max);
        Generation {
            generation: g,
            columns,
            max_frequency_shift,
            frequency_tolerance: T::lit(4.0) * (gf * T::lit(0.25) / m).sqrt(),
            quadratic_estimate: q,
            stats,
        }
    };

    let mut trace = vec![record(0, base.clone(), &log_var, quadratic(data)?)];
    resynthesize_each(data, &cfg.with_seed(seed), generations, |g, d| {
        for (k, c) in names.iter().enumerate() {
            log_var[k] = log_var[k] + parent_kurt[k] / m;
            parent_kurt[k] = excess_kurtosis_term(d.continuous(c).unwrap_or(&[]));
        }
        trace.push(record(g, describe(d)?, &log_var, quadratic(d)?));
        Ok(())
    })?;
    Ok(DriftTrace { m: cfg.m, seed, generations: trace })
}

impl<T: Scalar> DriftTrace<T> {
    pub fn last(&self) -> &Generation<T> {
        self.generations.last().expect("trace holds generation 0")
    }

    /// True when every variance ratio lies in its envelope and every
    /// frequency shift within its tolerance.
    pub fn within_envelope(&self) -> bool {
        self.generations.iter().all(|g| {
            g.max_frequency_shift <= g.frequency_tolerance
                && g.columns.iter().all(|c| c.envelope.0 <= c.ratio && c.ratio <= c.envelope.1)
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Tidy rows `generation,statistic,columns,category,value`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["generation", "statistic", "columns", "category", "value"])?;
        for g in &self.generations {
            let gen = g.generation.to_string();
            let mut row = |stat: &str, cols: &str, cat: &str, v: T| w.write_record([gen.as_str(), stat, cols, cat, &v.to_string()]);
            for c in &g.columns {
                row("variance", &c.column, "", c.variance)?;
                row("variance_ratio", &c.column, "", c.ratio)?;
                row("predicted_ratio", &c.column, "", c.predicted)?;
                row("envelope_lower", &c.column, "", c.envelope.0)?;
                row("envelope_upper", &c.column, "", c.envelope.1)?;
            }
            let cov = &g.stats.covariance;
            for (i, a) in cov.columns.iter().enumerate() {
                for (j, b) in cov.columns.iter().enumerate().skip(i + 1) {
                    row("covariance", &format!("{a};{b}"), "", cov.values[i][j])?;
                }
            }
            for col in &g.stats.categorical {
                for f in &col.categories {
                    row("frequency", &col.column, &f.category, f.frequency)?;
                }
            }
            for cond in &g.stats.conditional {
                let cols = format!("{};{}", cond.continuous, cond.categorical);
                for c in &cond.by_category {
                    row("conditional_mean", &cols, &c.category, c.mean)?;
                }
            }
            if let Some(q) = g.quadratic_estimate {
                row("quadratic_estimate", "", "", q)?;
            }
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8"))
    }
}
