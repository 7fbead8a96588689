//! Descriptive statistics, relative bias, the theory-predicted conditional
//! moments, and ordinary least squares.
//!
//! All sample (co)variances use the `n − 1` divisor, conditional variances
//! the `n_l − 1` divisor. The predicted conditional moments are population
//! identities; applied to a [`StatsReport`] they use its estimates as
//! plug-ins.

use serde::Serialize;

use crate::data::{ColumnData, Dataset};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special_fn::student_t_quantile;

const BIAS_FALLBACK_THRESHOLD: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContinuousSummary<T: Scalar> {
    pub column: String,
    pub mean: T,
    pub variance: T,
}

/// Square matrix over the continuous columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matrix<T: Scalar> {
    pub columns: Vec<String>,
    pub values: Vec<Vec<T>>,
}

impl<T: Scalar> Matrix<T> {
    pub fn get(&self, a: &str, b: &str) -> Option<T> {
        let i = self.columns.iter().position(|c| c == a)?;
        let j = self.columns.iter().position(|c| c == b)?;
        Some(self.values[i][j])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoryFrequency<T: Scalar> {
    pub category: String,
    pub count: usize,
    pub frequency: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CategoricalSummary<T: Scalar> {
    pub column: String,
    pub categories: Vec<CategoryFrequency<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalMoments<T: Scalar> {
    pub category: String,
    pub count: usize,
    pub mean: T,
    /// `None` when fewer than two rows carry the category.
    pub variance: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionalSummary<T: Scalar> {
    pub categorical: String,
    pub continuous: String,
    pub by_category: Vec<ConditionalMoments<T>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StatsReport<T: Scalar> {
    pub n: usize,
    pub continuous: Vec<ContinuousSummary<T>>,
    pub covariance: Matrix<T>,
    pub correlation: Matrix<T>,
    pub categorical: Vec<CategoricalSummary<T>>,
    pub conditional: Vec<ConditionalSummary<T>>,
}

fn mean<T: Scalar>(x: &[T]) -> T {
    x.iter().copied().sum::<T>() / T::from_usize_lossy(x.len())
}

fn covariance<T: Scalar>(x: &[T], y: &[T], mx: T, my: T) -> T {
    let s: T = x.iter().zip(y).map(|(&a, &b)| (a - mx) * (b - my)).sum();
    s / T::from_usize_lossy(x.len() - 1)
}

/// Sample statistics of every column and (categorical, continuous) pair.
pub fn describe<T: Scalar>(data: &Dataset<T>) -> Result<StatsReport<T>> {
    let n = data.n_rows();
    if n < 2 {
        return Err(Error::TooFewRows(n));
    }
    let schema = data.schema();
    let mut cont: Vec<(&str, &[T])> = Vec::new();
    let mut cats: Vec<(&str, &[u32], &[String])> = Vec::new();
    for (spec, col) in schema.columns.iter().zip(data.columns()) {
        match col {
            ColumnData::Continuous(v) => cont.push((&spec.name, v)),
            ColumnData::Categorical(ids) => cats.push((&spec.name, ids, &spec.categories)),
        }
    }

    let means: Vec<T> = cont.iter().map(|(_, v)| mean(v)).collect();
    let p = cont.len();
    let mut cov = vec![vec![T::zero(); p]; p];
    for a in 0..p {
        for b in a..p {
            let c = covariance(cont[a].1, cont[b].1, means[a], means[b]);
            cov[a][b] = c;
            cov[b][a] = c;
        }
    }
    let corr: Vec<Vec<T>> = (0..p)
        .map(|a| (0..p).map(|b| if a == b && cov[a][a] > T::zero() { T::one() } else { cov[a][b] / (cov[a][a] * cov[b][b]).sqrt() }).collect())
        .collect();
    let names: Vec<String> = cont.iter().map(|(name, _)| name.to_string()).collect();

    let continuous = cont
        .iter()
        .enumerate()
        .map(|(k, (name, _))| ContinuousSummary { column: name.to_string(), mean: means[k], variance: cov[k][k] })
        .collect();

    let nf = T::from_usize_lossy(n);
    let mut categorical = Vec::new();
    let mut conditional = Vec::new();
    for &(cat_name, ids, labels) in &cats {
        let mut counts = vec![0usize; labels.len()];
        for &id in ids {
            counts[id as usize] += 1;
        }
        categorical.push(CategoricalSummary {
            column: cat_name.to_string(),
            categories: labels
                .iter()
                .zip(&counts)
                .map(|(l, &c)| CategoryFrequency { category: l.clone(), count: c, frequency: T::from_usize_lossy(c) / nf })
                .collect(),
        });
        for &(num_name, x) in &cont {
            let mut sums = vec![T::zero(); labels.len()];
            for (&id, &v) in ids.iter().zip(x) {
                sums[id as usize] = sums[id as usize] + v;
            }
            let cmeans: Vec<T> = sums
                .iter()
                .zip(&counts)
                .map(|(&s, &c)| if c > 0 { s / T::from_usize_lossy(c) } else { T::nan() })
                .collect();
            let mut ss = vec![T::zero(); labels.len()];
            for (&id, &v) in ids.iter().zip(x) {
                let d = v - cmeans[id as usize];
                ss[id as usize] = ss[id as usize] + d * d;
            }
            let by_category = labels
                .iter()
                .enumerate()
                .filter(|&(k, _)| counts[k] > 0)
                .map(|(k, l)| ConditionalMoments {
                    category: l.clone(),
                    count: counts[k],
                    mean: cmeans[k],
                    variance: (counts[k] >= 2).then(|| ss[k] / T::from_usize_lossy(counts[k] - 1)),
                })
                .collect();
            conditional.push(ConditionalSummary {
                categorical: cat_name.to_string(),
                continuous: num_name.to_string(),
                by_category,
            });
        }
    }

    Ok(StatsReport {
        n,
        continuous,
        covariance: Matrix { columns: names.clone(), values: cov },
        correlation: Matrix { columns: names, values: corr },
        categorical,
        conditional,
    })
}

impl<T: Scalar> StatsReport<T> {
    pub fn mean(&self, column: &str) -> Option<T> {
        self.continuous.iter().find(|c| c.column == column).map(|c| c.mean)
    }

    pub fn variance(&self, column: &str) -> Option<T> {
        self.continuous.iter().find(|c| c.column == column).map(|c| c.variance)
    }

    pub fn frequency(&self, column: &str, category: &str) -> Option<T> {
        self.categorical
            .iter()
            .find(|c| c.column == column)?
            .categories
            .iter()
            .find(|f| f.category == category)
            .map(|f| f.frequency)
    }

    pub fn conditional(&self, cat_col: &str, num_col: &str, category: &str) -> Option<&ConditionalMoments<T>> {
        self.conditional
            .iter()
            .find(|c| c.categorical == cat_col && c.continuous == num_col)?
            .by_category
            .iter()
            .find(|m| m.category == category)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One statistic per row: `kind,columns,category,value`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["kind", "columns", "category", "value"])?;
        let mut row = |kind: &str, cols: String, cat: &str, v: String| w.write_record([kind, &cols, cat, &v]);
        row("n", String::new(), "", self.n.to_string())?;
        for c in &self.continuous {
            row("mean", c.column.clone(), "", c.mean.to_string())?;
            row("variance", c.column.clone(), "", c.variance.to_string())?;
        }
        for (kind, m) in [("covariance", &self.covariance), ("correlation", &self.correlation)] {
            for (i, a) in m.columns.iter().enumerate() {
                for (j, b) in m.columns.iter().enumerate().skip(i + 1) {
                    row(kind, format!("{a};{b}"), "", m.values[i][j].to_string())?;
                }
            }
        }
        for c in &self.categorical {
            for f in &c.categories {
                row("frequency", c.column.clone(), &f.category, f.frequency.to_string())?;
            }
        }
        for c in &self.conditional {
            let cols = format!("{};{}", c.continuous, c.categorical);
            for m in &c.by_category {
                row("conditional_mean", cols.clone(), &m.category, m.mean.to_string())?;
                let v = m.variance.map(|v| v.to_string()).unwrap_or_else(|| "NA".into());
                row("conditional_variance", cols.clone(), &m.category, v)?;
            }
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8"))
    }
}

/// Moments entering the conditional-moment identities for one category `l`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConditionalInputs<T: Scalar> {
    /// `E[X]`
    pub mean: T,
    /// `Var[X]`
    pub variance: T,
    /// `E[X | L = l]`
    pub cond_mean: T,
    /// `Var[X | L = l]`
    pub cond_variance: T,
    /// `Pr{L ≠ l}`
    pub prob_other: T,
    /// `E[X | L ≠ l]`; equals `cond_mean` when `prob_other = 0`.
    pub mean_other: T,
}

impl<T: Scalar> ConditionalInputs<T> {
    /// Plug-in inputs from a report. Needs `Var[X | L = l]`, so the
    /// category must have at least two rows.
    pub fn from_report(report: &StatsReport<T>, cat_col: &str, num_col: &str, category: &str) -> Result<Self> {
        let unknown = || Error::UnknownCategory { column: cat_col.to_string(), category: category.to_string() };
        let mean = report.mean(num_col).ok_or_else(|| Error::UnknownColumn(num_col.to_string()))?;
        let variance = report.variance(num_col).ok_or_else(|| Error::UnknownColumn(num_col.to_string()))?;
        let cond = report.conditional(cat_col, num_col, category).ok_or_else(unknown)?;
        let cond_variance = cond
            .variance
            .ok_or_else(|| Error::domain(format!("category {category:?} has fewer than two rows")))?;
        let n = report.n;
        let prob_other = T::from_usize_lossy(n - cond.count) / T::from_usize_lossy(n);
        let mean_other = if cond.count == n {
            cond.mean
        } else {
            (T::from_usize_lossy(n) * mean - T::from_usize_lossy(cond.count) * cond.mean)
                / T::from_usize_lossy(n - cond.count)
        };
        Ok(ConditionalInputs { mean, variance, cond_mean: cond.mean, cond_variance, prob_other, mean_other })
    }

    /// `(1−u)·E[X|l] + u·E[X]`.
    pub fn predicted_mean(&self, u: T) -> T {
        (T::one() - u) * self.cond_mean + u * self.mean
    }

    /// Equivalent form `(1 − u·Pr{L≠l})·E[X|l] + u·Pr{L≠l}·E[X|L≠l]`.
    pub fn predicted_mean_complement(&self, u: T) -> T {
        let w = u * self.prob_other;
        (T::one() - w) * self.cond_mean + w * self.mean_other
    }

    /// `(1−u)·Var[X|l] + u·Var[X] + u(1−u)·(E[X|l] − E[X])²`, exact when
    /// the weight law has `E[W²] = E[W]` and the scheme is standard.
    pub fn predicted_variance(&self, u: T) -> T {
        let gap = self.cond_mean - self.mean;
        (T::one() - u) * self.cond_variance + u * self.variance + u * (T::one() - u) * gap * gap
    }

    /// `(|u|·Pr{L≠l}·|E[X|l] − E[X|L≠l]|, |u|·|Var[X|l] − Var[X]| + |u(1−u)|·(E[X|l] − E[X])²)`.
    pub fn gap_bounds(&self, u: T) -> (T, T) {
        let mean_gap = u.abs() * self.prob_other * (self.cond_mean - self.mean_other).abs();
        let gap = self.cond_mean - self.mean;
        let var_bound = u.abs() * (self.cond_variance - self.variance).abs() + (u * (T::one() - u)).abs() * gap * gap;
        (mean_gap, var_bound)
    }
}

pub fn predicted_conditional_mean<T: Scalar>(orig: &StatsReport<T>, u: T, cat_col: &str, num_col: &str, category: &str) -> Result<T> {
    Ok(ConditionalInputs::from_report(orig, cat_col, num_col, category)?.predicted_mean(u))
}

pub fn predicted_conditional_variance<T: Scalar>(
    orig: &StatsReport<T>,
    u: T,
    cat_col: &str,
    num_col: &str,
    category: &str,
) -> Result<T> {
    Ok(ConditionalInputs::from_report(orig, cat_col, num_col, category)?.predicted_variance(u))
}

pub fn conditional_gap_bounds<T: Scalar>(
    orig: &StatsReport<T>,
    u: T,
    cat_col: &str,
    num_col: &str,
    category: &str,
) -> Result<(T, T)> {
    Ok(ConditionalInputs::from_report(orig, cat_col, num_col, category)?.gap_bounds(u))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    Mean,
    Variance,
    Covariance,
    Correlation,
    Frequency,
    ConditionalMean,
    ConditionalVariance,
}

impl Statistic {
    pub fn as_str(&self) -> &'static str {
        match self {
            Statistic::Mean => "mean",
            Statistic::Variance => "variance",
            Statistic::Covariance => "covariance",
            Statistic::Correlation => "correlation",
            Statistic::Frequency => "frequency",
            Statistic::ConditionalMean => "conditional_mean",
            Statistic::ConditionalVariance => "conditional_variance",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasEntry<T: Scalar> {
    pub statistic: Statistic,
    pub columns: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    pub reference: T,
    pub synthetic: T,
    /// `(synthetic − reference)/reference`, or `synthetic − reference` when
    /// `absolute` is set.
    pub bias: T,
    pub absolute: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BiasReport<T: Scalar> {
    pub entries: Vec<BiasEntry<T>>,
}

impl<T: Scalar> BiasReport<T> {
    pub fn find(&self, statistic: Statistic, columns: &[&str], category: Option<&str>) -> Option<&BiasEntry<T>> {
        self.entries.iter().find(|e| {
            e.statistic == statistic
                && e.columns.len() == columns.len()
                && e.columns.iter().zip(columns).all(|(a, b)| a == b)
                && e.category.as_deref() == category
        })
    }

    pub fn max_abs_bias(&self, statistic: Statistic) -> Option<T> {
        self.entries.iter().filter(|e| e.statistic == statistic).map(|e| e.bias.abs()).reduce(T::max)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// `kind,columns,category,reference,synthetic,bias,absolute`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["kind", "columns", "category", "reference", "synthetic", "bias", "absolute"])?;
        for e in &self.entries {
            w.write_record([
                e.statistic.as_str(),
                &e.columns.join(";"),
                e.category.as_deref().unwrap_or(""),
                &e.reference.to_string(),
                &e.synthetic.to_string(),
                &e.bias.to_string(),
                if e.absolute { "true" } else { "false" },
            ])?;
        }
        Ok(String::from_utf8(w.into_inner().map_err(|e| e.into_error())?).expect("utf-8"))
    }
}

fn bias_entry<T: Scalar>(statistic: Statistic, columns: Vec<String>, category: Option<String>, reference: T, synthetic: T) -> BiasEntry<T> {
    let absolute = reference.abs() < T::lit(BIAS_FALLBACK_THRESHOLD);
    let bias = if absolute { synthetic - reference } else { (synthetic - reference) / reference };
    BiasEntry { statistic, columns, category, reference, synthetic, bias, absolute }
}

/// Element-wise bias of `synthetic` against `reference`.
///
/// Entries whose value is undefined on either side (a conditional variance
/// over fewer than two rows, a category absent from the synthetic
/// conditional table) are omitted; a category absent from the synthetic
/// frequencies counts as frequency 0.
pub fn relative_bias<T: Scalar>(reference: &StatsReport<T>, synthetic: &StatsReport<T>) -> Result<BiasReport<T>> {
    let ref_cont: Vec<&str> = reference.continuous.iter().map(|c| c.column.as_str()).collect();
    let syn_cont: Vec<&str> = synthetic.continuous.iter().map(|c| c.column.as_str()).collect();
    let ref_cat: Vec<&str> = reference.categorical.iter().map(|c| c.column.as_str()).collect();
    let syn_cat: Vec<&str> = synthetic.categorical.iter().map(|c| c.column.as_str()).collect();
    if ref_cont != syn_cont || ref_cat != syn_cat {
        return Err(Error::SchemaMismatch(format!(
            "reference columns {ref_cont:?}/{ref_cat:?} differ from synthetic {syn_cont:?}/{syn_cat:?}"
        )));
    }

    let mut entries = Vec::new();
    for (r, s) in reference.continuous.iter().zip(&synthetic.continuous) {
        entries.push(bias_entry(Statistic::Mean, vec![r.column.clone()], None, r.mean, s.mean));
    }
    for (r, s) in reference.continuous.iter().zip(&synthetic.continuous) {
        entries.push(bias_entry(Statistic::Variance, vec![r.column.clone()], None, r.variance, s.variance));
    }
    for (stat, rm, sm) in [
        (Statistic::Covariance, &reference.covariance, &synthetic.covariance),
        (Statistic::Correlation, &reference.correlation, &synthetic.correlation),
    ] {
        for i in 0..rm.columns.len() {
            for j in (i + 1)..rm.columns.len() {
                let (rv, sv) = (rm.values[i][j], sm.values[i][j]);
                if rv.is_finite() && sv.is_finite() {
                    entries.push(bias_entry(stat, vec![rm.columns[i].clone(), rm.columns[j].clone()], None, rv, sv));
                }
            }
        }
    }
    for rc in &reference.categorical {
        for f in &rc.categories {
            let s = synthetic.frequency(&rc.column, &f.category).unwrap_or(T::zero());
            entries.push(bias_entry(Statistic::Frequency, vec![rc.column.clone()], Some(f.category.clone()), f.frequency, s));
        }
    }
    for rc in &reference.conditional {
        for m in &rc.by_category {
            let cols = vec![rc.continuous.clone(), rc.categorical.clone()];
            let Some(sm) = synthetic.conditional(&rc.categorical, &rc.continuous, &m.category) else {
                continue;
            };
            entries.push(bias_entry(Statistic::ConditionalMean, cols.clone(), Some(m.category.clone()), m.mean, sm.mean));
            if let (Some(rv), Some(sv)) = (m.variance, sm.variance) {
                entries.push(bias_entry(Statistic::ConditionalVariance, cols, Some(m.category.clone()), rv, sv));
            }
        }
    }
    Ok(BiasReport { entries })
}

/// Least-squares fit with classical homoskedastic standard errors.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OlsFit<T: Scalar> {
    /// Intercept first when fitted with one.
    pub coefficients: Vec<T>,
    pub std_errors: Vec<T>,
    /// 95% confidence intervals `(lower, upper)`.
    pub confidence_intervals: Vec<(T, T)>,
    pub residual_variance: T,
    pub df: usize,
}

const RANK_TOL: f64 = 1e-10;

/// OLS by Householder QR of the design matrix (rows of `design`).
pub fn ols_fit<T: Scalar>(design: &[Vec<T>], target: &[T], intercept: bool) -> Result<OlsFit<T>> {
    let n = design.len();
    if n != target.len() {
        return Err(Error::domain(format!("design has {n} rows, target has {}", target.len())));
    }
    let k = design.first().map_or(0, Vec::len);
    if design.iter().any(|r| r.len() != k) {
        return Err(Error::domain("design rows have unequal lengths"));
    }
    let p = k + usize::from(intercept);
    if p == 0 {
        return Err(Error::domain("no regressors"));
    }
    if n < p + 1 {
        return Err(Error::domain(format!("need at least {} rows for {p} coefficients, got {n}", p + 1)));
    }

    // Column-major copy, intercept column first.
    let mut a: Vec<Vec<T>> = Vec::with_capacity(p);
    if intercept {
        a.push(vec![T::one(); n]);
    }
    for c in 0..k {
        a.push(design.iter().map(|r| r[c]).collect());
    }
    let mut qty: Vec<T> = target.to_vec();

    for col in 0..p {
        let norm = a[col][col..].iter().map(|&v| v * v).sum::<T>().sqrt();
        if norm == T::zero() {
            continue;
        }
        let alpha = if a[col][col] > T::zero() { -norm } else { norm };
        let mut v: Vec<T> = a[col][col..].to_vec();
        v[0] = v[0] - alpha;
        let vnorm2: T = v.iter().map(|&x| x * x).sum();
        if vnorm2 == T::zero() {
            continue;
        }
        let reflect = |x: &mut [T]| {
            let dot: T = v.iter().zip(x.iter()).map(|(&vi, &xi)| vi * xi).sum();
            let f = T::lit(2.0) * dot / vnorm2;
            for (xi, &vi) in x.iter_mut().zip(&v) {
                *xi = *xi - f * vi;
            }
        };
        for column in a.iter_mut().skip(col) {
            reflect(&mut column[col..]);
        }
        reflect(&mut qty[col..]);
    }

    let diag: Vec<T> = (0..p).map(|i| a[i][i].abs()).collect();
    let dmax = diag.iter().copied().fold(T::zero(), T::max);
    let dmin = diag.iter().copied().fold(T::infinity(), T::min);
    if !(dmin > T::lit(RANK_TOL) * dmax) {
        return Err(Error::RankDeficient { condition: (dmax / dmin).to_f64_lossy() });
    }

    // R is stored as a[col][row] for row <= col.
    let r = |row: usize, col: usize| a[col][row];
    let mut beta = vec![T::zero(); p];
    for i in (0..p).rev() {
        let s: T = ((i + 1)..p).map(|j| r(i, j) * beta[j]).sum();
        beta[i] = (qty[i] - s) / r(i, i);
    }
    let rss: T = qty[p..].iter().map(|&v| v * v).sum();
    let df = n - p;
    let sigma2 = rss / T::from_usize_lossy(df);

    // R⁻¹ (upper triangular); Var(β̂) = σ²·R⁻¹R⁻ᵀ.
    let mut rinv = vec![vec![T::zero(); p]; p];
    for j in 0..p {
        rinv[j][j] = r(j, j).recip();
        for i in (0..j).rev() {
            let s: T = ((i + 1)..=j).map(|l| r(i, l) * rinv[l][j]).sum();
            rinv[i][j] = -s / r(i, i);
        }
    }
    let std_errors: Vec<T> = (0..p)
        .map(|i| (sigma2 * (i..p).map(|j| rinv[i][j] * rinv[i][j]).sum::<T>()).sqrt())
        .collect();
    let tq = student_t_quantile(T::lit(0.975), T::from_usize_lossy(df))?;
    let confidence_intervals = beta.iter().zip(&std_errors).map(|(&b, &se)| (b - tq * se, b + tq * se)).collect();
    Ok(OlsFit { coefficients: beta, std_errors, confidence_intervals, residual_variance: sigma2, df })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::ColumnInput;
    use approx::assert_abs_diff_eq;
    use rand::Rng;

    fn labels(v: &[&str]) -> ColumnInput<f64> {
        ColumnInput::Labels(v.iter().map(|s| s.to_string()).collect())
    }

    #[test]
    fn describe_examples() {
        let d = Dataset::from_columns(vec![("x", ColumnInput::Continuous(vec![0.0, 2.0]))]).unwrap();
        let r = describe(&d).unwrap();
        assert_eq!(r.mean("x"), Some(1.0));
        assert_eq!(r.variance("x"), Some(2.0));

        let d = Dataset::from_columns(vec![
            ("a", ColumnInput::Continuous(vec![1.0, 4.0, 2.0, 8.0])),
            ("b", ColumnInput::Continuous(vec![1.0, 4.0, 2.0, 8.0])),
        ])
        .unwrap();
        let r = describe(&d).unwrap();
        assert_abs_diff_eq!(r.correlation.get("a", "b").unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.covariance.get("a", "b").unwrap(), r.variance("a").unwrap(), epsilon = 1e-15);

        let d = Dataset::from_columns(vec![
            ("l", labels(&["a", "a", "b"])),
            ("x", ColumnInput::Continuous(vec![1.0, 3.0, 5.0])),
        ])
        .unwrap();
        let r = describe(&d).unwrap();
        let c = r.conditional("l", "x", "a").unwrap();
        assert_abs_diff_eq!(c.mean, 2.0);
        assert_abs_diff_eq!(r.frequency("l", "a").unwrap(), 2.0 / 3.0);
        assert_eq!(r.conditional("l", "x", "b").unwrap().variance, None);
        let total: f64 = r.categorical[0].categories.iter().map(|f| f.frequency).sum();
        assert_abs_diff_eq!(total, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn describe_needs_two_rows() {
        let d = Dataset::from_columns(vec![("x", ColumnInput::Continuous(vec![1.0f64]))]).unwrap();
        assert!(matches!(describe(&d), Err(Error::TooFewRows(1))));
    }

    #[test]
    fn doubling_a_sample_rescales_variance_by_divisor_ratio() {
        let x = vec![0.3, -1.2, 2.5, 0.0, 4.1, -0.7];
        let d = Dataset::from_columns(vec![
            ("x", ColumnInput::Continuous(x.clone())),
            ("l", labels(&["a", "b", "a", "b", "b", "a"])),
        ])
        .unwrap();
        let dd = d.concat(&d).unwrap();
        let (r1, r2) = (describe(&d).unwrap(), describe(&dd).unwrap());
        let n = x.len() as f64;
        assert_abs_diff_eq!(r1.mean("x").unwrap(), r2.mean("x").unwrap(), epsilon = 1e-14);
        assert_abs_diff_eq!(r1.frequency("l", "a").unwrap(), r2.frequency("l", "a").unwrap(), epsilon = 1e-15);
        // Same population variance: s²_{2n}·(2n−1)/(2n) = s²_n·(n−1)/n.
        assert_abs_diff_eq!(
            r2.variance("x").unwrap() * (2.0 * n - 1.0) / (2.0 * n),
            r1.variance("x").unwrap() * (n - 1.0) / n,
            epsilon = 1e-13
        );
    }

    fn two_group_report() -> StatsReport<f64> {
        let d = Dataset::from_columns(vec![
            ("l", labels(&["a", "a", "b", "b"])),
            ("x", ColumnInput::Continuous(vec![1.0, 3.0, 0.0, 0.0])),
        ])
        .unwrap();
        describe(&d).unwrap()
    }

    #[test]
    fn predicted_mean_examples() {
        let r = two_group_report();
        let ea = r.conditional("l", "x", "a").unwrap().mean;
        assert_abs_diff_eq!(predicted_conditional_mean(&r, 0.0, "l", "x", "a").unwrap(), ea);
        assert_abs_diff_eq!(predicted_conditional_mean(&r, 1.0, "l", "x", "a").unwrap(), r.mean("x").unwrap());
        // E[X|a] = 2, E[X] = 1.
        assert_abs_diff_eq!(predicted_conditional_mean(&r, 0.25, "l", "x", "a").unwrap(), 1.75, epsilon = 1e-15);
        assert!(matches!(
            predicted_conditional_mean(&r, 0.25, "l", "x", "zzz"),
            Err(Error::UnknownCategory { .. })
        ));
    }

    #[test]
    fn predicted_variance_examples() {
        let inputs = ConditionalInputs { mean: 1.0, variance: 2.0, cond_mean: 3.0, cond_variance: 1.0, prob_other: 0.5, mean_other: -1.0 };
        assert_abs_diff_eq!(inputs.predicted_variance(0.0), 1.0);
        assert_abs_diff_eq!(inputs.predicted_variance(1.0), 2.0);
        assert_abs_diff_eq!(inputs.predicted_variance(0.5), 2.5, epsilon = 1e-15);
        let r = two_group_report();
        let v = predicted_conditional_variance(&r, 0.0, "l", "x", "a").unwrap();
        assert_abs_diff_eq!(v, r.conditional("l", "x", "a").unwrap().variance.unwrap());
    }

    #[test]
    fn gap_bound_examples() {
        let base = ConditionalInputs { mean: 1.0, variance: 2.0, cond_mean: 2.0, cond_variance: 1.0, prob_other: 0.5, mean_other: 0.0 };
        assert_eq!(base.gap_bounds(0.0), (0.0, 0.0));
        let single = ConditionalInputs { prob_other: 0.0, mean_other: 2.0, mean: 2.0, ..base };
        assert_eq!(single.gap_bounds(0.3).0, 0.0);
        assert_abs_diff_eq!(base.gap_bounds(0.05).0, 0.05, epsilon = 1e-15);
        let r = two_group_report();
        let (mg, _) = conditional_gap_bounds(&r, 0.05, "l", "x", "a").unwrap();
        assert_abs_diff_eq!(mg, 0.05 * 0.5 * 2.0, epsilon = 1e-15);
    }

    #[test]
    fn mean_forms_agree_and_gap_matches() {
        let mut rng = crate::rng::sequential(77);
        for _ in 0..200 {
            let p_l: f64 = rng.random_range(0.05..0.95);
            let m_l: f64 = rng.random_range(-5.0..5.0);
            let m_o: f64 = rng.random_range(-5.0..5.0);
            let mean = p_l * m_l + (1.0 - p_l) * m_o;
            let inputs = ConditionalInputs { mean, variance: 1.0, cond_mean: m_l, cond_variance: 1.0, prob_other: 1.0 - p_l, mean_other: m_o };
            let u: f64 = rng.random_range(0.0..1.0);
            assert_abs_diff_eq!(inputs.predicted_mean(u), inputs.predicted_mean_complement(u), epsilon = 1e-12);
            assert_abs_diff_eq!(inputs.gap_bounds(u).0, (inputs.predicted_mean(u) - m_l).abs(), epsilon = 1e-12);
        }
    }

    #[test]
    fn relative_bias_examples() {
        let d = Dataset::from_columns(vec![
            ("x", ColumnInput::Continuous(vec![1.0, 2.0, 4.0, 7.0])),
            ("y", ColumnInput::Continuous(vec![0.0, 0.0, 0.0, 0.0])),
        ])
        .unwrap();
        let r = describe(&d).unwrap();
        let b = relative_bias(&r, &r).unwrap();
        assert!(b.entries.iter().all(|e| e.bias == 0.0));
        let ym = b.find(Statistic::Mean, &["y"], None).unwrap();
        assert!(ym.absolute);

        let mut s = r.clone();
        s.continuous[0].variance = r.continuous[0].variance * 2.0 / 3.0;
        let b = relative_bias(&r, &s).unwrap();
        assert_abs_diff_eq!(b.find(Statistic::Variance, &["x"], None).unwrap().bias, -1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn relative_bias_schema_mismatch() {
        let a = describe(&Dataset::from_columns(vec![("x", ColumnInput::Continuous(vec![1.0, 2.0]))]).unwrap()).unwrap();
        let b = describe(&Dataset::from_columns(vec![("z", ColumnInput::Continuous(vec![1.0, 2.0]))]).unwrap()).unwrap();
        assert!(matches!(relative_bias(&a, &b), Err(Error::SchemaMismatch(_))));
    }

    #[test]
    fn report_csv_and_json() {
        let r = two_group_report();
        let csv = r.to_csv().unwrap();
        assert!(csv.starts_with("kind,columns,category,value\n"));
        assert!(csv.contains("conditional_mean,x;l,a,2"));
        let json = r.to_json().unwrap();
        let first = json.find("\"n\"").unwrap();
        let second = json.find("\"continuous\"").unwrap();
        assert!(first < second);
        let b = relative_bias(&r, &r).unwrap();
        assert!(b.to_csv().unwrap().starts_with("kind,columns,category,reference,synthetic,bias,absolute\n"));
    }

    #[test]
    fn ols_examples() {
        let design: Vec<Vec<f64>> = (1..=5).map(|i| vec![f64::from(i)]).collect();
        let y: Vec<f64> = (1..=5).map(|i| 2.0 * f64::from(i)).collect();
        let f = ols_fit(&design, &y, false).unwrap();
        assert_abs_diff_eq!(f.coefficients[0], 2.0, epsilon = 1e-14);
        assert!(f.residual_variance < 1e-25);

        let empty: Vec<Vec<f64>> = vec![vec![]; 4];
        let f = ols_fit(&empty, &[3.0, 3.0, 3.0, 3.0], true).unwrap();
        assert_abs_diff_eq!(f.coefficients[0], 3.0, epsilon = 1e-14);

        // Normal equations by hand for {(1,1),(2,2.1),(3,2.9),(4,4.2)}:
        // slope = Sxy/Sxx = 5.2/5 = 1.04, intercept = 2.55 − 1.04·2.5 = −0.05.
        let design: Vec<Vec<f64>> = vec![vec![1.0], vec![2.0], vec![3.0], vec![4.0]];
        let f = ols_fit(&design, &[1.0, 2.1, 2.9, 4.2], true).unwrap();
        assert_abs_diff_eq!(f.coefficients[1], 1.04, epsilon = 1e-12);
        assert_abs_diff_eq!(f.coefficients[0], -0.05, epsilon = 1e-12);
        // RSS = Syy − Sxy²/Sxx = 5.45 − 5.408 = 0.042 on 2 df.
        assert_abs_diff_eq!(f.residual_variance, 0.021, epsilon = 1e-12);
        assert_abs_diff_eq!(f.std_errors[1], (0.021f64 / 5.0).sqrt(), epsilon = 1e-12);
        let (lo, hi) = f.confidence_intervals[1];
        assert_abs_diff_eq!(hi - 1.04, 4.302652729696142 * (0.021f64 / 5.0).sqrt(), epsilon = 1e-8);
        assert_abs_diff_eq!(1.04 - lo, hi - 1.04, epsilon = 1e-12);
    }

    #[test]
    fn ols_rank_deficient() {
        let design: Vec<Vec<f64>> = (0..6).map(|i| vec![f64::from(i), 2.0 * f64::from(i)]).collect();
        let y: Vec<f64> = (0..6).map(f64::from).collect();
        assert!(matches!(ols_fit(&design, &y, true), Err(Error::RankDeficient { .. })));
        assert!(ols_fit(&design[..2], &y[..2], true).is_err());
    }
}
