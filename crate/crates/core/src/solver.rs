//! Solver for structure-preserving EpBeta parameters.
//!
//! For fixed expansions `(ε0, ε1)` the variance-preservation constraint
//!
//! ```text
//! (1 + ε1 − ε0·β/α)·(1 + ε0 − ε1·α/β)·(1 + α + β) = (1 + ε0 + ε1)²
//! ```
//!
//! is a curve in the `(α, β)` plane. Writing `ρ = β/α` gives the curve in
//! closed form, `α + β = (1+ε0+ε1)² / ((1+ε1−ε0ρ)(1+ε0−ε1/ρ)) − 1`, so the
//! search for a pair whose `u(W, τ)` meets the tolerance `δ` is a scalar
//! root-finding problem in `ρ`. Restricting to `ρ ≤ 1` enforces `α ≥ β`.
//! Along the curve `u` falls to zero as `ρ` approaches the lower end of the
//! feasible interval, while `α` shrinks as `ρ` grows, so the minimal-`α`
//! pair is the largest `ρ` with `u = δ`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::weights::WeightDistribution;

const GRID_POINTS: usize = 256;
const GRID_DECADES: f64 = 12.0;
const U_TOL: f64 = 1e-10;
const RHO_WIDTH_TOL: f64 = 1e-12;
const OPEN_END_SHRINK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = ""))]
pub struct SolverRequest<T: Scalar> {
    pub eps0: T,
    pub eps1: T,
    pub delta: T,
    #[serde(default = "default_tau")]
    pub tau: T,
}

fn default_tau<T: Scalar>() -> T {
    T::lit(0.5)
}

impl<T: Scalar> SolverRequest<T> {
    pub fn new(eps0: T, eps1: T, delta: T) -> Self {
        SolverRequest { eps0, eps1, delta, tau: default_tau() }
    }

    pub fn validate(&self) -> Result<()> {
        check_eps(self.eps0, self.eps1)?;
        if !(self.delta >= T::zero() && self.delta <= T::one()) {
            return Err(Error::domain(format!("delta must lie in [0, 1], got {}", self.delta)));
        }
        if !self.tau.is_finite() {
            return Err(Error::domain("tau must be finite"));
        }
        Ok(())
    }
}

/// A pair that is feasible for `δ` but has smaller `α` than the equality root.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = ""))]
pub struct AlternativePair<T: Scalar> {
    pub alpha: T,
    pub beta: T,
    pub u: T,
}

/// Solved EpBeta parameters together with their certificates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = ""))]
pub struct EpBetaParams<T: Scalar> {
    pub alpha: T,
    pub beta: T,
    pub eps0: T,
    pub eps1: T,
    pub delta: T,
    pub tau: T,
    /// `u(W, τ)` at the solution (named for the default `τ = 0.5`).
    pub u_at_half: T,
    #[serde(rename = "residual")]
    pub constraint_residual: T,
    /// Set when the grid scan finds a feasible pair with strictly smaller
    /// `α` than the equality root; both are reported.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_alpha_alternative: Option<AlternativePair<T>>,
}

impl<T: Scalar> EpBetaParams<T> {
    pub fn weight(&self) -> WeightDistribution<T> {
        WeightDistribution::EpBeta {
            alpha: self.alpha,
            beta: self.beta,
            eps0: self.eps0,
            eps1: self.eps1,
        }
    }
}

fn check_eps<T: Scalar>(eps0: T, eps1: T) -> Result<()> {
    if !(eps0 >= T::zero() && eps1 >= T::zero()) || !eps0.is_finite() || !eps1.is_finite() {
        return Err(Error::domain(format!(
            "expansions must be finite and nonnegative, got eps0 = {eps0}, eps1 = {eps1}"
        )));
    }
    Ok(())
}

/// LHS − RHS of the variance-preservation constraint.
pub fn constraint_residual<T: Scalar>(alpha: T, beta: T, eps0: T, eps1: T) -> T {
    let one = T::one();
    let scale = one + eps0 + eps1;
    (one + eps1 - eps0 * (beta / alpha)) * (one + eps0 - eps1 * (alpha / beta)) * (one + alpha + beta)
        - scale * scale
}

/// Open interval of admissible `ρ = β/α` together with whether the upper
/// end `min(1, (1+ε1)/ε0)` may itself be used.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioInterval<T> {
    pub lower: T,
    pub upper: T,
    pub upper_closed: bool,
}

impl<T: Scalar> RatioInterval<T> {
    pub fn new(eps0: T, eps1: T) -> Result<Self> {
        check_eps(eps0, eps1)?;
        if eps0 + eps1 == T::zero() {
            return Err(Error::NoPreservingParams);
        }
        let lower = eps1 / (T::one() + eps0);
        let positivity = if eps0 > T::zero() { (T::one() + eps1) / eps0 } else { T::infinity() };
        let (upper, upper_closed) = if positivity > T::one() { (T::one(), true) } else { (positivity, false) };
        if !(lower < upper) {
            return Err(Error::EmptyRatioInterval {
                lower: lower.to_f64_lossy(),
                upper: upper.to_f64_lossy(),
            });
        }
        Ok(RatioInterval { lower, upper, upper_closed })
    }

    pub fn contains(&self, rho: T) -> bool {
        rho > self.lower && (rho < self.upper || (self.upper_closed && rho == self.upper))
    }

    /// Log-spaced points, dense toward the lower end where `α + β` diverges.
    fn grid(&self) -> Vec<T> {
        let span = self.upper - self.lower;
        let shrink = if self.upper_closed { T::one() } else { T::one() - T::lit(OPEN_END_SHRINK) };
        (0..GRID_POINTS)
            .map(|k| {
                let expo = -GRID_DECADES + GRID_DECADES * k as f64 / (GRID_POINTS - 1) as f64;
                let rho = self.lower + span * T::lit(10f64.powf(expo)) * shrink;
                if k == GRID_POINTS - 1 && self.upper_closed { self.upper } else { rho }
            })
            .filter(|&rho| self.contains(rho))
            .collect()
    }
}

/// The point with `β/α = rho` on the variance-preservation curve.
pub fn curve_point<T: Scalar>(rho: T, eps0: T, eps1: T) -> Result<(T, T)> {
    let interval = RatioInterval::new(eps0, eps1)?;
    if !interval.contains(rho) {
        return Err(Error::InfeasibleRatio {
            rho: rho.to_f64_lossy(),
            lower: interval.lower.to_f64_lossy(),
            upper: interval.upper.to_f64_lossy(),
        });
    }
    Ok(curve_point_unchecked(rho, eps0, eps1))
}

fn curve_point_unchecked<T: Scalar>(rho: T, eps0: T, eps1: T) -> (T, T) {
    let one = T::one();
    let scale = one + eps0 + eps1;
    let sum = scale * scale / ((one + eps1 - eps0 * rho) * (one + eps0 - eps1 / rho)) - one;
    let alpha = sum / (one + rho);
    (alpha, rho * alpha)
}

/// `u(W, 0.5)` of the EpBeta law at `curve_point(rho)`.
pub fn u_on_curve<T: Scalar>(rho: T, eps0: T, eps1: T) -> Result<T> {
    u_on_curve_at(rho, eps0, eps1, T::lit(0.5))
}

pub fn u_on_curve_at<T: Scalar>(rho: T, eps0: T, eps1: T, tau: T) -> Result<T> {
    let (alpha, beta) = curve_point(rho, eps0, eps1)?;
    Ok(curve_u(alpha, beta, eps0, eps1, tau))
}

fn curve_u<T: Scalar>(alpha: T, beta: T, eps0: T, eps1: T, tau: T) -> T {
    WeightDistribution::EpBeta { alpha, beta, eps0, eps1 }.u_value(tau)
}

struct Sample<T> {
    rho: T,
    alpha: T,
    beta: T,
    u: T,
}

fn sample_at<T: Scalar>(rho: T, req: &SolverRequest<T>) -> Sample<T> {
    let (alpha, beta) = curve_point_unchecked(rho, req.eps0, req.eps1);
    Sample { rho, alpha, beta, u: curve_u(alpha, beta, req.eps0, req.eps1, req.tau) }
}

/// Minimal-`α` pair on the curve with `u(W, τ) ≤ δ` and `α ≥ β`.
///
/// Scans a log grid in `ρ`, brackets the crossing `u = δ` closest to
/// `ρ = 1`, and bisects. When `u ≤ δ` already at the top of the interval the
/// grid point of smallest `α` is returned.
pub fn solve<T: Scalar>(req: &SolverRequest<T>) -> Result<EpBetaParams<T>> {
    req.validate()?;
    let interval = RatioInterval::new(req.eps0, req.eps1)?;
    let grid: Vec<Sample<T>> = interval.grid().into_iter().map(|rho| sample_at(rho, req)).collect();

    let (min_u, max_u) = grid.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), s| {
        let u = s.u.to_f64_lossy();
        (lo.min(u), hi.max(u))
    });
    // δ = 0 is attained only in the limit α + β → ∞.
    let infeasible = || Error::Infeasible { delta: req.delta.to_f64_lossy(), min_u, max_u };
    if req.delta == T::zero() {
        return Err(infeasible());
    }

    let last_feasible = grid.iter().rposition(|s| s.u <= req.delta).ok_or_else(infeasible)?;
    let chosen = if last_feasible + 1 == grid.len() {
        grid.iter()
            .filter(|s| s.u <= req.delta)
            .min_by(|a, b| a.alpha.partial_cmp(&b.alpha).expect("finite alpha"))
            .map(|s| sample_at(s.rho, req))
            .ok_or_else(infeasible)?
    } else {
        bisect(&grid[last_feasible], &grid[last_feasible + 1], req)
    };

    let alternative = grid
        .iter()
        .filter(|s| s.u <= req.delta && s.alpha < chosen.alpha * (T::one() - T::lit(1e-9)))
        .min_by(|a, b| a.alpha.partial_cmp(&b.alpha).expect("finite alpha"))
        .map(|s| AlternativePair { alpha: s.alpha, beta: s.beta, u: s.u });

    Ok(EpBetaParams {
        alpha: chosen.alpha,
        beta: chosen.beta,
        eps0: req.eps0,
        eps1: req.eps1,
        delta: req.delta,
        tau: req.tau,
        u_at_half: chosen.u,
        constraint_residual: constraint_residual(chosen.alpha, chosen.beta, req.eps0, req.eps1),
        min_alpha_alternative: alternative,
    })
}

fn bisect<T: Scalar>(feasible: &Sample<T>, infeasible: &Sample<T>, req: &SolverRequest<T>) -> Sample<T> {
    let half = T::lit(0.5);
    let u_tol = T::lit(U_TOL);
    let width_tol = T::lit(RHO_WIDTH_TOL);
    let (mut lo, mut hi) = (feasible.rho, infeasible.rho);
    let mut best = sample_at(lo, req);
    for _ in 0..200 {
        if hi - lo <= width_tol {
            break;
        }
        let mid = sample_at(half * (lo + hi), req);
        if (mid.u - req.delta).abs() <= u_tol {
            return mid;
        }
        if mid.u <= req.delta {
            lo = mid.rho;
            best = mid;
        } else {
            hi = mid.rho;
        }
    }
    best
}

/// One cell of a parameter table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TableCell<T: Scalar> {
    pub eps0: T,
    pub eps1: T,
    pub delta: T,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<EpBetaParams<T>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

impl<T: Scalar> TableCell<T> {
    pub fn is_feasible(&self) -> bool {
        self.params.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterTable<T: Scalar> {
    pub delta: T,
    pub cells: Vec<TableCell<T>>,
}

/// The `ε ∈ {0.0, 0.1, …, 0.9}` grid, row-major in `ε0`.
pub fn decile_grid<T: Scalar>() -> Vec<(T, T)> {
    let eps = |k: usize| T::lit(k as f64 / 10.0);
    (0..10).flat_map(|i| (0..10).map(move |j| (eps(i), eps(j)))).collect()
}

/// Solves every cell; cells that fail are kept with their reason.
pub fn parameter_table<T: Scalar>(eps_grid: &[(T, T)], delta: T) -> ParameterTable<T> {
    let cells = eps_grid
        .par_iter()
        .map(|&(eps0, eps1)| match solve(&SolverRequest::new(eps0, eps1, delta)) {
            Ok(params) => TableCell { eps0, eps1, delta, params: Some(params), reason: None },
            Err(e) => TableCell { eps0, eps1, delta, params: None, reason: Some(e.to_string()) },
        })
        .collect();
    ParameterTable { delta, cells }
}

impl<T: Scalar> ParameterTable<T> {
    pub fn cell(&self, eps0: T, eps1: T) -> Option<&TableCell<T>> {
        self.cells.iter().find(|c| c.eps0 == eps0 && c.eps1 == eps1)
    }

    /// CSV with header `eps0,eps1,delta,alpha,beta,u_at_half,residual`;
    /// infeasible cells carry `-` in the solved columns.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("eps0,eps1,delta,alpha,beta,u_at_half,residual\n");
        for c in &self.cells {
            match &c.params {
                Some(p) => out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    c.eps0, c.eps1, c.delta, p.alpha, p.beta, p.u_at_half, p.constraint_residual
                )),
                None => out.push_str(&format!("{},{},{},-,-,-,-\n", c.eps0, c.eps1, c.delta)),
            }
        }
        out
    }

    /// Human-readable grid: rows `ε0`, columns `ε1`, cells `α, β` to two
    /// decimals, `-` where infeasible.
    pub fn render_grid(&self) -> String {
        let mut eps0s: Vec<T> = Vec::new();
        let mut eps1s: Vec<T> = Vec::new();
        for c in &self.cells {
            if !eps0s.contains(&c.eps0) {
                eps0s.push(c.eps0);
            }
            if !eps1s.contains(&c.eps1) {
                eps1s.push(c.eps1);
            }
        }
        let mut out = format!("delta = {}\n", self.delta);
        for block in eps1s.chunks(5) {
            out.push_str(&format!("{:>10}", "eps0\\eps1"));
            for e1 in block {
                out.push_str(&format!(" | {:>16}", format!("{:.1}", e1.to_f64_lossy())));
            }
            out.push('\n');
            for &e0 in &eps0s {
                out.push_str(&format!("{:>10}", format!("{:.1}", e0.to_f64_lossy())));
                for &e1 in block {
                    let text = match self.cell(e0, e1).and_then(|c| c.params.as_ref()) {
                        Some(p) => format!("{:.2}, {:.2}", p.alpha.to_f64_lossy(), p.beta.to_f64_lossy()),
                        None => "-".to_string(),
                    };
                    out.push_str(&format!(" | {text:>16}"));
                }
                out.push('\n');
            }
            out.push('\n');
        }
        out
    }
}

/// Equal expansions from conjectured population bounds `[x_lower, x_upper]`
/// around the observed range `[x_min, x_max]`:
/// `ε0 = ε1 = (x_upper − x_lower)/(x_max − x_min) − 1`.
pub fn epsilon_from_bounds<T: Scalar>(x_lower: T, x_upper: T, x_min: T, x_max: T) -> Result<(T, T)> {
    if ![x_lower, x_upper, x_min, x_max].iter().all(|v| v.is_finite()) {
        return Err(Error::domain("bounds must be finite"));
    }
    if x_min == x_max {
        return Err(Error::domain("degenerate observed range: x_min == x_max"));
    }
    if !(x_lower <= x_min && x_min < x_max && x_max <= x_upper) {
        return Err(Error::domain(format!(
            "bounds must satisfy x_lower <= x_min < x_max <= x_upper, got {x_lower}, {x_min}, {x_max}, {x_upper}"
        )));
    }
    let eps = ((x_upper - x_lower) / (x_max - x_min) - T::one()).max(T::zero());
    Ok((eps, eps))
}
