//! Independent reference computations for tests. Nothing here calls into
//! the numeric routines under test.

#![allow(dead_code)]

/// Adaptive Simpson quadrature of `f` on `[a, b]` to absolute tolerance `tol`.
pub fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (fa, fb, m) = (f(a), f(b), 0.5 * (a + b));
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_step(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    // Stop at the requested tolerance or once the refinement is at the
    // rounding level of the panel itself.
    if depth == 0 || delta.abs() <= 15.0 * tol || delta.abs() <= 1e-15 * (left.abs() + right.abs()) + 1e-300 {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
}

/// Composite Simpson with `n` (even) panels; a rough magnitude for
/// setting the adaptive tolerance.
fn simpson_fixed<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut s = f(a) + f(b);
    for k in 1..n {
        s += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// `∫_lo^hi g(v)·v^(a−1)·(1−v)^(b−1) dv` for `0 ≤ lo ≤ hi ≤ 1`, scaled by
/// `exp(−shift)`.
///
/// The interval is split at 1/2. On the left piece `v = u^(1/a')` with
/// `a' = min(a, 1)` removes the singularity at 0; the right piece is
/// mirrored and treated the same way in `b`.
pub fn beta_integral<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, lo: f64, hi: f64, shift: f64, rel_tol: f64) -> f64 {
    let mut total = 0.0;
    if lo < 0.5 {
        total += half_integral(&|v| g(v), a, b, lo, hi.min(0.5), shift, rel_tol);
    }
    if hi > 0.5 {
        // s = 1 − v runs over [1 − hi, 1 − max(lo, 1/2)].
        total += half_integral(&|s| g(1.0 - s), b, a, 1.0 - hi, 1.0 - lo.max(0.5), shift, rel_tol);
    }
    total
}

/// `∫_lo^hi g(v)·v^(a−1)(1−v)^(b−1) dv` with `hi ≤ 1/2`.
fn half_integral<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, lo: f64, hi: f64, shift: f64, rel_tol: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let ap = a.min(1.0);
    // v = u^(1/ap): v^(a−1) dv = v^(a−ap) du / ap.
    let integrand = |u: f64| {
        let v = if ap == 1.0 { u } else { u.powf(1.0 / ap) };
        if v <= 0.0 {
            return if a == ap { g(0.0) * (-shift).exp() / ap } else { 0.0 };
        }
        let log = (a - ap) * v.ln() + (b - 1.0) * (1.0 - v).ln() - shift;
        g(v) * log.exp() / ap
    };
    let (ulo, uhi) = if ap == 1.0 { (lo, hi) } else { (lo.powf(ap), hi.powf(ap)) };
    let rough = simpson_fixed(&|u| integrand(u).abs(), ulo, uhi, 4096);
    if rough == 0.0 {
        return 0.0;
    }
    // Kernels are normalized to peak near 1, so pieces below the floor are
    // negligible against any full integral.
    simpson(&integrand, ulo, uhi, (rel_tol * rough).max(1e-25))
}

/// Log of the density kernel at its interior mode, or 0 when either shape
/// is below 1 (the substituted integrands are then bounded by 1/a').
fn kernel_shift(a: f64, b: f64) -> f64 {
    if a > 1.0 && b > 1.0 {
        let t = (a - 1.0) / (a + b - 2.0);
        (a - 1.0) * t.ln() + (b - 1.0) * (1.0 - t).ln()
    } else {
        0.0
    }
}

/// Regularized incomplete beta `I_x(a, b)` by quadrature of the kernel,
/// normalized by the quadrature of the full kernel.
pub fn incomplete_beta(x: f64, a: f64, b: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if x >= 1.0 {
        return 1.0;
    }
    let shift = kernel_shift(a, b);
    let one = |_: f64| 1.0;
    let total = beta_integral(&one, a, b, 0.0, 1.0, shift, 1e-13);
    if x <= 0.5 {
        beta_integral(&one, a, b, 0.0, x, shift, 1e-13) / total
    } else {
        1.0 - beta_integral(&one, a, b, x, 1.0, shift, 1e-13) / total
    }
}

/// `E[g(W)]` for `W = (1+ε0+ε1)V − ε0`, `V ~ Beta(a, b)`, with `g` allowed
/// to jump at `breaks` (in `W` units).
pub fn epbeta_expectation<G: Fn(f64) -> f64>(g: &G, a: f64, b: f64, eps0: f64, eps1: f64, breaks: &[f64]) -> f64 {
    let c = 1.0 + eps0 + eps1;
    let shift = kernel_shift(a, b);
    let mut cuts: Vec<f64> = vec![0.0, 1.0];
    cuts.extend(breaks.iter().map(|&w| ((w + eps0) / c).clamp(0.0, 1.0)));
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    // `g` may jump at a cut; inside each window it is evaluated at points
    // pulled slightly inward so the endpoint value comes from that side.
    let num: f64 = cuts
        .windows(2)
        .map(|w| {
            let pad = 1e-12 * (w[1] - w[0]);
            let h = |v: f64| g(c * v.clamp(w[0] + pad, w[1] - pad) - eps0);
            beta_integral(&h, a, b, w[0], w[1], shift, 1e-12)
        })
        .sum();
    num / beta_integral(&|_| 1.0, a, b, 0.0, 1.0, shift, 1e-13)
}

/// `u(W, τ) = E[(1−W)·1{W ≥ τ} + W·1{W < τ}]` by quadrature.
pub fn u_epbeta(a: f64, b: f64, eps0: f64, eps1: f64, tau: f64) -> f64 {
    let h = |w: f64| if w >= tau { 1.0 - w } else { w };
    epbeta_expectation(&h, a, b, eps0, eps1, &[tau])
}

/// `(E[W], E[W²])` of an EpBeta law by quadrature.
pub fn epbeta_moments(a: f64, b: f64, eps0: f64, eps1: f64) -> (f64, f64) {
    (
        epbeta_expectation(&|w| w, a, b, eps0, eps1, &[]),
        epbeta_expectation(&|w| w * w, a, b, eps0, eps1, &[]),
    )
}

/// `u(W, τ)` for `W ~ N(μ, σ²)` by quadrature over `μ ± 12σ`.
pub fn u_gauss(mu: f64, sd: f64, tau: f64) -> f64 {
    if sd == 0.0 {
        return if mu >= tau { 1.0 - mu } else { mu };
    }
    let pdf = |w: f64| (-0.5 * ((w - mu) / sd).powi(2)).exp() / (sd * (2.0 * std::f64::consts::PI).sqrt());
    let (lo, hi) = (mu - 12.0 * sd, mu + 12.0 * sd);
    let t = tau.clamp(lo, hi);
    simpson(&|w| w * pdf(w), lo, t, 1e-14) + simpson(&|w| (1.0 - w) * pdf(w), t, hi, 1e-14)
}

/// A discrete weight law.
#[derive(Debug, Clone)]
pub struct Atoms {
    pub values: Vec<f64>,
    pub probs: Vec<f64>,
}

impl Atoms {
    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.probs).map(|(w, p)| w * p).sum()
    }

    pub fn second_moment(&self) -> f64 {
        self.values.iter().zip(&self.probs).map(|(w, p)| w * w * p).sum()
    }

    pub fn u(&self, tau: f64) -> f64 {
        self.values
            .iter()
            .zip(&self.probs)
            .map(|(&w, &p)| p * if w >= tau { 1.0 - w } else { w })
            .sum()
    }

    /// Affine image of `raw` with mean `m` and `E[W²] = E[W]`, i.e.
    /// variance `m − m²`.
    pub fn variance_preserving(raw: &[f64], probs: &[f64], m: f64) -> Atoms {
        let mu: f64 = raw.iter().zip(probs).map(|(z, p)| z * p).sum();
        let var: f64 = raw.iter().zip(probs).map(|(z, p)| (z - mu).powi(2) * p).sum();
        let s = (m - m * m).sqrt() / var.sqrt();
        Atoms { values: raw.iter().map(|z| s * (z - mu) + m).collect(), probs: probs.to_vec() }
    }
}

/// Exact conditional moments of one synthetic row given its label,
/// by enumerating every `(i, j, atom)` triple.
#[derive(Debug, Clone, Copy)]
pub struct EnumeratedMoments {
    pub prob: f64,
    pub mean: f64,
    pub variance: f64,
}

pub fn enumerate_conditional(x: &[f64], labels: &[u32], law: &Atoms, tau: f64, label: u32) -> EnumeratedMoments {
    let n = x.len();
    let pair = 1.0 / (n * n) as f64;
    let (mut p, mut s1, mut s2) = (0.0, 0.0, 0.0);
    for i in 0..n {
        for j in 0..n {
            for (&w, &pw) in law.values.iter().zip(&law.probs) {
                let l = if w >= tau { labels[i] } else { labels[j] };
                if l != label {
                    continue;
                }
                let v = w * x[i] + (1.0 - w) * x[j];
                let q = pair * pw;
                p += q;
                s1 += q * v;
                s2 += q * v * v;
            }
        }
    }
    let mean = s1 / p;
    EnumeratedMoments { prob: p, mean, variance: s2 / p - mean * mean }
}

/// Population (divisor `n`) moments of `x` overall and within `label`.
pub struct PopulationMoments {
    pub mean: f64,
    pub variance: f64,
    pub cond_mean: f64,
    pub cond_variance: f64,
    pub prob: f64,
    pub mean_other: f64,
}

pub fn population_moments(x: &[f64], labels: &[u32], label: u32) -> PopulationMoments {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let variance = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let inside: Vec<f64> = x.iter().zip(labels).filter(|(_, &l)| l == label).map(|(&v, _)| v).collect();
    let outside: Vec<f64> = x.iter().zip(labels).filter(|(_, &l)| l != label).map(|(&v, _)| v).collect();
    let k = inside.len() as f64;
    let cond_mean = inside.iter().sum::<f64>() / k;
    let cond_variance = inside.iter().map(|v| (v - cond_mean).powi(2)).sum::<f64>() / k;
    let mean_other = if outside.is_empty() { cond_mean } else { outside.iter().sum::<f64>() / outside.len() as f64 };
    PopulationMoments { mean, variance, cond_mean, cond_variance, prob: k / n, mean_other }
}

/// Least squares by the normal equations `XᵀX β = Xᵀy`, solved with
/// Gauss-Jordan elimination and partial pivoting.
pub fn ols_normal_equations(design: &[Vec<f64>], y: &[f64], intercept: bool) -> Vec<f64> {
    let rows: Vec<Vec<f64>> = design
        .iter()
        .map(|r| {
            let mut full = if intercept { vec![1.0] } else { vec![] };
            full.extend_from_slice(r);
            full
        })
        .collect();
    let p = rows[0].len();
    let mut m = vec![vec![0.0; p + 1]; p];
    for (r, &t) in rows.iter().zip(y) {
        for i in 0..p {
            for j in 0..p {
                m[i][j] += r[i] * r[j];
            }
            m[i][p] += r[i] * t;
        }
    }
    for col in 0..p {
        let piv = (col..p).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        m.swap(col, piv);
        let d = m[col][col];
        for v in m[col].iter_mut() {
            *v /= d;
        }
        for r in 0..p {
            if r != col {
                let f = m[r][col];
                let pivot_row = m[col].clone();
                for (v, pv) in m[r].iter_mut().zip(&pivot_row) {
                    *v -= f * pv;
                }
            }
        }
    }
    m.iter().map(|r| r[p]).collect()
}

/// Sample variance (divisor `n − 1`), mean and Pearson correlation.
pub fn sample_mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

pub fn sample_cov(x: &[f64], y: &[f64]) -> f64 {
    let (mx, my) = (sample_mean(x), sample_mean(y));
    x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum::<f64>() / (x.len() - 1) as f64
}

pub fn sample_corr(x: &[f64], y: &[f64]) -> f64 {
    sample_cov(x, y) / (sample_cov(x, x) * sample_cov(y, y)).sqrt()
}
