//! Log-gamma, (regularized) incomplete beta, and the normal / Student-t
//! distribution functions built on them.
//!
//! Everything here is pure and reentrant.

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS_COEF: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const CF_MAX_ITER: usize = 300;
const CF_REL_TOL: f64 = 1e-15;

fn cf_tol<T: Scalar>() -> T {
    T::lit(CF_REL_TOL).max(T::epsilon())
}

fn tiny<T: Scalar>() -> T {
    T::min_positive_value() / T::epsilon()
}

/// `ln Γ(x)` for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma<T: Scalar>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(Error::domain(format!("ln_gamma argument must be positive, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

fn ln_gamma_unchecked<T: Scalar>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        // Γ(x) = Γ(x+1)/x keeps the series in its accurate range.
        return ln_gamma_unchecked(x + T::one()) - x.ln();
    }
    let z = x - T::one();
    let mut acc = T::lit(LANCZOS_COEF[0]);
    for (k, &c) in LANCZOS_COEF.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (z + T::from_usize_lossy(k));
    }
    let t = z + T::lit(LANCZOS_G) + half;
    half * (T::TAU()).ln() + (z + half) * t.ln() - t + acc.ln()
}

/// `ln B(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a+b)`.
pub fn log_beta<T: Scalar>(a: T, b: T) -> Result<T> {
    check_shapes(a, b)?;
    Ok(ln_gamma_unchecked(a) + ln_gamma_unchecked(b) - ln_gamma_unchecked(a + b))
}

fn check_shapes<T: Scalar>(a: T, b: T) -> Result<()> {
    if !(a > T::zero()) || !(b > T::zero()) || !a.is_finite() || !b.is_finite() {
        return Err(Error::domain(format!(
            "beta shape parameters must be positive and finite, got a = {a}, b = {b}"
        )));
    }
    Ok(())
}

/// Regularized incomplete beta `I_x(a, b)`.
///
/// Continued fraction (modified Lentz) with the usual switch to
/// `1 − I_{1−x}(b, a)` when `x > (a+1)/(a+b+2)`.
pub fn reg_incomplete_beta<T: Scalar>(x: T, a: T, b: T) -> Result<T> {
    check_shapes(a, b)?;
    if !(x >= T::zero() && x <= T::one()) {
        return Err(Error::domain(format!("incomplete beta argument must lie in [0, 1], got {x}")));
    }
    if x == T::zero() {
        return Ok(T::zero());
    }
    if x == T::one() {
        return Ok(T::one());
    }
    let two = T::lit(2.0);
    let swap = x > (a + T::one()) / (a + b + two);
    let (x, a, b) = if swap { (T::one() - x, b, a) } else { (x, a, b) };
    let ln_front = a * x.ln() + b * (-x).ln_1p() - (ln_gamma_unchecked(a) + ln_gamma_unchecked(b)
        - ln_gamma_unchecked(a + b));
    let value = (ln_front.exp() * beta_cf(x, a, b) / a).max(T::zero()).min(T::one());
    Ok(if swap { T::one() - value } else { value })
}

fn beta_cf<T: Scalar>(x: T, a: T, b: T) -> T {
    let one = T::one();
    let tol = cf_tol::<T>();
    let fpmin = tiny::<T>();
    let clamp = |v: T| if v.abs() < fpmin { fpmin } else { v };

    let qab = a + b;
    let qap = a + one;
    let qam = a - one;
    let mut c = one;
    let mut d = (one - qab * x / qap).recip_clamped(fpmin);
    let mut h = d;
    for m in 1..=CF_MAX_ITER {
        let m = T::from_usize_lossy(m);
        let m2 = m + m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = clamp(one + aa * d).recip();
        c = clamp(one + aa / c);
        h = h * d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = clamp(one + aa * d).recip();
        c = clamp(one + aa / c);
        let delta = d * c;
        h = h * delta;
        if (delta - one).abs() <= tol {
            break;
        }
    }
    h
}

trait RecipClamped {
    fn recip_clamped(self, floor: Self) -> Self;
}

impl<T: Scalar> RecipClamped for T {
    fn recip_clamped(self, floor: T) -> T {
        if self.abs() < floor {
            floor.recip()
        } else {
            self.recip()
        }
    }
}

/// Non-regularized incomplete beta `B(x; a, b) = I_x(a, b)·B(a, b)`.
pub fn incomplete_beta<T: Scalar>(x: T, a: T, b: T) -> Result<T> {
    Ok(reg_incomplete_beta(x, a, b)? * log_beta(a, b)?.exp())
}

/// Regularized lower incomplete gamma `P(a, x)`.
fn reg_lower_gamma<T: Scalar>(a: T, x: T) -> T {
    if x <= T::zero() {
        return T::zero();
    }
    if x < a + T::one() {
        gamma_series(a, x)
    } else {
        T::one() - gamma_cf(a, x)
    }
}

/// Regularized upper incomplete gamma `Q(a, x)`.
fn reg_upper_gamma<T: Scalar>(a: T, x: T) -> T {
    if x <= T::zero() {
        return T::one();
    }
    if x < a + T::one() {
        T::one() - gamma_series(a, x)
    } else {
        gamma_cf(a, x)
    }
}

fn gamma_series<T: Scalar>(a: T, x: T) -> T {
    let tol = cf_tol::<T>();
    let mut ap = a;
    let mut del = a.recip();
    let mut sum = del;
    for _ in 0..1000 {
        ap = ap + T::one();
        del = del * x / ap;
        sum = sum + del;
        if del.abs() < sum.abs() * tol {
            break;
        }
    }
    sum * (-x + a * x.ln() - ln_gamma_unchecked(a)).exp()
}

fn gamma_cf<T: Scalar>(a: T, x: T) -> T {
    let one = T::one();
    let two = T::lit(2.0);
    let tol = cf_tol::<T>();
    let fpmin = tiny::<T>();
    let mut b = x + one - a;
    let mut c = fpmin.recip();
    let mut d = b.recip();
    let mut h = d;
    for i in 1..=1000usize {
        let i = T::from_usize_lossy(i);
        let an = -i * (i - a);
        b = b + two;
        d = an * d + b;
        if d.abs() < fpmin {
            d = fpmin;
        }
        c = b + an / c;
        if c.abs() < fpmin {
            c = fpmin;
        }
        d = d.recip();
        let del = d * c;
        h = h * del;
        if (del - one).abs() <= tol {
            break;
        }
    }
    (-x + a * x.ln() - ln_gamma_unchecked(a)).exp() * h
}

/// Complementary error function.
pub fn erfc<T: Scalar>(x: T) -> T {
    let half = T::lit(0.5);
    if x >= T::zero() {
        reg_upper_gamma(half, x * x)
    } else {
        T::one() + reg_lower_gamma(half, x * x)
    }
}

/// Standard normal CDF `Φ(z)`.
pub fn normal_cdf<T: Scalar>(z: T) -> T {
    let half = T::lit(0.5);
    half * erfc(-z / T::SQRT_2())
}

/// Standard normal density `φ(z)`.
pub fn normal_pdf<T: Scalar>(z: T) -> T {
    (-(z * z) / T::lit(2.0)).exp() / (T::TAU()).sqrt()
}

/// CDF of Student's t with `df` degrees of freedom.
pub fn student_t_cdf<T: Scalar>(t: T, df: T) -> Result<T> {
    if !(df > T::zero()) {
        return Err(Error::domain(format!("degrees of freedom must be positive, got {df}")));
    }
    let half = T::lit(0.5);
    let x = df / (df + t * t);
    let tail = half * reg_incomplete_beta(x, df * half, half)?;
    Ok(if t > T::zero() { T::one() - tail } else { tail })
}

/// Quantile of Student's t, found by bisection on the CDF.
pub fn student_t_quantile<T: Scalar>(p: T, df: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(Error::domain(format!("probability must lie in (0, 1), got {p}")));
    }
    let half = T::lit(0.5);
    if p == half {
        return Ok(T::zero());
    }
    let (target, sign) = if p > half { (p, T::one()) } else { (T::one() - p, -T::one()) };
    let mut lo = T::zero();
    let mut hi = T::one();
    while student_t_cdf(hi, df)? < target {
        hi = hi * T::lit(2.0);
        if hi > T::lit(1e12) {
            break;
        }
    }
    for _ in 0..200 {
        let mid = half * (lo + hi);
        if student_t_cdf(mid, df)? < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= T::epsilon() * hi {
            break;
        }
    }
    Ok(sign * half * (lo + hi))
}
