//! Mixup weight laws.
//!
//! A weight law `W` turns a pair of original values into `W·x_i + (1−W)·x_j`.
//! Only the first two moments of `W` matter for the synthetic mean, variance
//! and covariance; the conditional moments additionally depend on the
//! `u`-function, `u(W, τ) = E[(1−W)·1{W ≥ τ} + W·1{W < τ}]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::special_fn::{normal_cdf, normal_pdf, reg_incomplete_beta};

/// A mixup weight law.
///
/// Serialized as a JSON object tagged by `kind`:
/// `{"kind":"epbeta","alpha":..,"beta":..,"eps0":..,"eps1":..}`,
/// `{"kind":"beta","alpha":..,"beta":..}`, `{"kind":"uniform"}`,
/// `{"kind":"gauss_preserving","mu":..}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = ""))]
#[serde(tag = "kind", rename_all = "snake_case", try_from = "RawWeight<T>")]
pub enum WeightDistribution<T: Scalar> {
    /// `(1+ε0+ε1)·V − ε0` with `V ~ Beta(α, β)`; support `[−ε0, 1+ε1]`.
    #[serde(rename = "epbeta")]
    EpBeta { alpha: T, beta: T, eps0: T, eps1: T },
    Beta { alpha: T, beta: T },
    Uniform,
    /// `N(μ, μ − μ²)`, variance preserving for every `μ ∈ [0, 1]`.
    GaussPreserving { mu: T },
}

#[derive(Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum RawWeight<T> {
    #[serde(rename = "epbeta")]
    EpBeta { alpha: T, beta: T, eps0: T, eps1: T },
    Beta { alpha: T, beta: T },
    Uniform,
    GaussPreserving { mu: T },
}

impl<T: Scalar> TryFrom<RawWeight<T>> for WeightDistribution<T> {
    type Error = Error;

    fn try_from(raw: RawWeight<T>) -> Result<Self> {
        let dist = match raw {
            RawWeight::EpBeta { alpha, beta, eps0, eps1 } => {
                WeightDistribution::EpBeta { alpha, beta, eps0, eps1 }
            }
            RawWeight::Beta { alpha, beta } => WeightDistribution::Beta { alpha, beta },
            RawWeight::Uniform => WeightDistribution::Uniform,
            RawWeight::GaussPreserving { mu } => WeightDistribution::GaussPreserving { mu },
        };
        dist.validate()?;
        Ok(dist)
    }
}

/// Joint law of the weights of two continuous columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Joint {
    /// Same draw for both columns (the standard scheme).
    Equal,
    Independent,
}

fn positive<T: Scalar>(v: T) -> bool {
    v > T::zero() && v.is_finite()
}

impl<T: Scalar> WeightDistribution<T> {
    pub fn epbeta(alpha: T, beta: T, eps0: T, eps1: T) -> Result<Self> {
        let d = WeightDistribution::EpBeta { alpha, beta, eps0, eps1 };
        d.validate()?;
        Ok(d)
    }

    pub fn beta(alpha: T, beta: T) -> Result<Self> {
        let d = WeightDistribution::Beta { alpha, beta };
        d.validate()?;
        Ok(d)
    }

    pub fn gauss_preserving(mu: T) -> Result<Self> {
        let d = WeightDistribution::GaussPreserving { mu };
        d.validate()?;
        Ok(d)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightDistribution::EpBeta { alpha, beta, eps0, eps1 } => {
                if !positive(alpha) || !positive(beta) {
                    return Err(Error::domain(format!(
                        "epbeta shapes must be positive, got alpha = {alpha}, beta = {beta}"
                    )));
                }
                if !(eps0 >= T::zero() && eps1 >= T::zero()) || !eps0.is_finite() || !eps1.is_finite() {
                    return Err(Error::domain(format!(
                        "epbeta expansions must be nonnegative, got eps0 = {eps0}, eps1 = {eps1}"
                    )));
                }
            }
            WeightDistribution::Beta { alpha, beta } => {
                if !positive(alpha) || !positive(beta) {
                    return Err(Error::domain(format!(
                        "beta shapes must be positive, got alpha = {alpha}, beta = {beta}"
                    )));
                }
            }
            WeightDistribution::Uniform => {}
            WeightDistribution::GaussPreserving { mu } => {
                if !(mu >= T::zero() && mu <= T::one()) {
                    return Err(Error::domain(format!("gauss_preserving mu must lie in [0, 1], got {mu}")));
                }
            }
        }
        Ok(())
    }

    /// Closed interval containing the support, `None` when unbounded.
    pub fn support(&self) -> Option<(T, T)> {
        match *self {
            WeightDistribution::EpBeta { eps0, eps1, .. } => Some((-eps0, T::one() + eps1)),
            WeightDistribution::Beta { .. } | WeightDistribution::Uniform => Some((T::zero(), T::one())),
            WeightDistribution::GaussPreserving { mu } if mu == T::zero() || mu == T::one() => Some((mu, mu)),
            WeightDistribution::GaussPreserving { .. } => None,
        }
    }

    /// `E[W]`.
    pub fn mean(&self) -> T {
        match *self {
            WeightDistribution::EpBeta { alpha, beta, eps0, eps1 } => {
                ((T::one() + eps1) * alpha - eps0 * beta) / (alpha + beta)
            }
            WeightDistribution::Beta { alpha, beta } => alpha / (alpha + beta),
            WeightDistribution::Uniform => T::lit(0.5),
            WeightDistribution::GaussPreserving { mu } => mu,
        }
    }

    /// `Var[W]`.
    pub fn variance(&self) -> T {
        let beta_var = |a: T, b: T| a * b / ((a + b) * (a + b) * (a + b + T::one()));
        match *self {
            WeightDistribution::EpBeta { alpha, beta, eps0, eps1 } => {
                let scale = T::one() + eps0 + eps1;
                scale * scale * beta_var(alpha, beta)
            }
            WeightDistribution::Beta { alpha, beta } => beta_var(alpha, beta),
            WeightDistribution::Uniform => T::one() / T::lit(12.0),
            WeightDistribution::GaussPreserving { mu } => mu - mu * mu,
        }
    }

    /// `E[W²]`.
    pub fn second_moment(&self) -> T {
        match *self {
            WeightDistribution::Uniform => T::one() / T::lit(3.0),
            WeightDistribution::GaussPreserving { mu } => mu,
            _ => {
                let m = self.mean();
                self.variance() + m * m
            }
        }
    }

    /// Factor relating synthetic to original variance, `1 + 2(E[W²] − E[W])`.
    pub fn variance_scale(&self) -> T {
        T::one() + T::lit(2.0) * (self.second_moment() - self.mean())
    }

    /// True iff `|E[W²] − E[W]| ≤ tol`.
    pub fn is_variance_preserving(&self, tol: T) -> bool {
        (self.second_moment() - self.mean()).abs() <= tol
    }

    /// `P(W < x)`.
    pub fn cdf(&self, x: T) -> T {
        let clamp01 = |v: T| v.max(T::zero()).min(T::one());
        match *self {
            WeightDistribution::EpBeta { alpha, beta, eps0, eps1 } => {
                let t = clamp01((x + eps0) / (T::one() + eps0 + eps1));
                reg_incomplete_beta(t, alpha, beta).unwrap_or(T::nan())
            }
            WeightDistribution::Beta { alpha, beta } => {
                reg_incomplete_beta(clamp01(x), alpha, beta).unwrap_or(T::nan())
            }
            WeightDistribution::Uniform => clamp01(x),
            WeightDistribution::GaussPreserving { mu } => {
                let sd = (mu - mu * mu).max(T::zero()).sqrt();
                if sd == T::zero() {
                    if mu < x { T::one() } else { T::zero() }
                } else {
                    normal_cdf((x - mu) / sd)
                }
            }
        }
    }

    /// `E[W·1{W < x}]`.
    fn partial_mean_below(&self, x: T) -> T {
        let clamp01 = |v: T| v.max(T::zero()).min(T::one());
        match *self {
            WeightDistribution::EpBeta { alpha, beta, eps0, eps1 } => {
                let scale = T::one() + eps0 + eps1;
                let t = clamp01((x + eps0) / scale);
                let v_part = alpha / (alpha + beta) * reg_incomplete_beta(t, alpha + T::one(), beta).unwrap_or(T::nan());
                scale * v_part - eps0 * reg_incomplete_beta(t, alpha, beta).unwrap_or(T::nan())
            }
            WeightDistribution::Beta { alpha, beta } => {
                let t = clamp01(x);
                alpha / (alpha + beta) * reg_incomplete_beta(t, alpha + T::one(), beta).unwrap_or(T::nan())
            }
            WeightDistribution::Uniform => {
                let t = clamp01(x);
                t * t / T::lit(2.0)
            }
            WeightDistribution::GaussPreserving { mu } => {
                let sd = (mu - mu * mu).max(T::zero()).sqrt();
                if sd == T::zero() {
                    if mu < x { mu } else { T::zero() }
                } else {
                    let z = (x - mu) / sd;
                    mu * normal_cdf(z) - sd * normal_pdf(z)
                }
            }
        }
    }

    /// `u(W, τ) = E[(1−W)·1{W ≥ τ} + W·1{W < τ}]` under the standard scheme.
    ///
    /// Rewritten as `E[1−W] + 2·E[W·1{W<τ}] − P(W<τ)` and evaluated in
    /// closed form; for EpBeta this is the regularized-incomplete-beta
    /// expression with `ε̃ = (τ+ε0)/(1+ε0+ε1)` clamped to `[0, 1]`.
    pub fn u_value(&self, tau: T) -> T {
        let two = T::lit(2.0);
        T::one() - self.mean() + two * self.partial_mean_below(tau) - self.cdf(tau)
    }

    /// Prepared sampler; reuse it across draws.
    pub fn sampler(&self) -> Result<WeightSampler<T>> {
        self.validate()?;
        let beta_sampler = |a: T, b: T| {
            T::beta_sampler(a, b).ok_or_else(|| Error::domain(format!("invalid beta shapes {a}, {b}")))
        };
        Ok(match *self {
            WeightDistribution::EpBeta { alpha, beta, eps0, eps1 } => WeightSampler::Affine {
                inner: beta_sampler(alpha, beta)?,
                scale: T::one() + eps0 + eps1,
                shift: eps0,
            },
            WeightDistribution::Beta { alpha, beta } => WeightSampler::Affine {
                inner: beta_sampler(alpha, beta)?,
                scale: T::one(),
                shift: T::zero(),
            },
            WeightDistribution::Uniform => WeightSampler::Uniform,
            WeightDistribution::GaussPreserving { mu } => WeightSampler::Gauss {
                mu,
                sd: (mu - mu * mu).max(T::zero()).sqrt(),
            },
        })
    }

    /// One draw. Builds a sampler per call; use [`Self::sampler`] in loops.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<T> {
        Ok(self.sampler()?.draw(rng))
    }
}

/// Ready-to-draw form of a [`WeightDistribution`].
#[derive(Debug, Clone)]
pub enum WeightSampler<T: Scalar> {
    Affine { inner: T::BetaSampler, scale: T, shift: T },
    Uniform,
    Gauss { mu: T, sd: T },
}

impl<T: Scalar> WeightSampler<T> {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        use rand_distr::Distribution;
        match self {
            WeightSampler::Affine { inner, scale, shift } => *scale * inner.sample(rng) - *shift,
            WeightSampler::Uniform => T::sample_unit(rng),
            WeightSampler::Gauss { mu, sd } => {
                if *sd == T::zero() {
                    *mu
                } else {
                    *mu + *sd * T::sample_standard_normal(rng)
                }
            }
        }
    }
}

/// Covariance scale factor `1 + E[2·W^X·W^Y − W^X − W^Y]`.
///
/// `Joint::Equal` is the standard scheme and requires `dx == dy`.
pub fn covariance_scale<T: Scalar>(
    dx: &WeightDistribution<T>,
    dy: &WeightDistribution<T>,
    joint: Joint,
) -> Result<T> {
    match joint {
        Joint::Equal => {
            if dx != dy {
                return Err(Error::InvalidConfig(
                    "equal-weight joint requires identical weight laws".into(),
                ));
            }
            Ok(dx.variance_scale())
        }
        Joint::Independent => {
            let (mx, my) = (dx.mean(), dy.mean());
            Ok(T::one() + T::lit(2.0) * mx * my - mx - my)
        }
    }
}

/// General-scheme `u(W^X, W^L, τ) = E[(1−W^X)·1{W^L ≥ τ} + W^X·1{W^L < τ}]`.
pub fn u_value_general<T: Scalar>(
    dx: &WeightDistribution<T>,
    dl: &WeightDistribution<T>,
    tau: T,
    joint: Joint,
) -> Result<T> {
    match joint {
        Joint::Equal => {
            if dx != dl {
                return Err(Error::InvalidConfig(
                    "equal-weight joint requires identical weight laws".into(),
                ));
            }
            Ok(dx.u_value(tau))
        }
        Joint::Independent => {
            let below = dl.cdf(tau);
            let mx = dx.mean();
            Ok((T::one() - mx) * (T::one() - below) + mx * below)
        }
    }
}
