//! Closed-form order statistics of the sample median.
//!
//! These are the analytical predictions the simulator is checked against:
//! the binomial law for where a percentile falls among `M` ordered samples,
//! its normal approximation, and the percentile-space laws for one peer's
//! median and for the difference between two peers' medians.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{EdaError, Result};

/// Sample size above which probabilities are evaluated in log space.
pub const LOG_SPACE_THRESHOLD: u64 = 50;

/// `M` samples, percentile fraction `p`, order index `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderStatParams {
    m: u64,
    p: f64,
    k: u64,
}

impl OrderStatParams {
    pub fn new(m: u64, p: f64, k: u64) -> Result<Self> {
        if m == 0 {
            return Err(EdaError::InvalidParams("M must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(EdaError::InvalidParams(format!("p = {p} is outside [0, 1]")));
        }
        if k > m {
            return Err(EdaError::InvalidParams(format!("k = {k} exceeds M = {m}")));
        }
        Ok(OrderStatParams { m, p, k })
    }

    /// Parameters for the whole law; `k` is irrelevant and set to 0.
    pub fn law(m: u64, p: f64) -> Result<Self> {
        Self::new(m, p, 0)
    }

    pub fn m(&self) -> u64 {
        self.m
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn k(&self) -> u64 {
        self.k
    }

    pub fn with_k(self, k: u64) -> Result<Self> {
        Self::new(self.m, self.p, k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalLaw {
    pub mean: f64,
    pub variance: f64,
}

impl NormalLaw {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if variance.is_nan() || variance < 0.0 {
            return Err(EdaError::InvalidParams(format!(
                "variance {variance} must be non-negative"
            )));
        }
        Ok(NormalLaw { mean, variance })
    }

    pub fn std(&self) -> f64 {
        self.variance.sqrt()
    }

    /// Cumulative distribution function. A zero-variance law is a point mass.
    pub fn cdf(&self, x: f64) -> f64 {
        if self.variance == 0.0 {
            return if x < self.mean { 0.0 } else { 1.0 };
        }
        0.5 * libm::erfc(-(x - self.mean) / (self.std() * std::f64::consts::SQRT_2))
    }
}

/// `Pr(x_k ≤ P_100p ≤ x_{k+1}) = C(M,k) p^k (1-p)^(M-k)`.
pub fn binomial_order_prob(params: &OrderStatParams) -> f64 {
    let OrderStatParams { m, p, k } = *params;
    if m > LOG_SPACE_THRESHOLD {
        binomial_pmf_saddle(m as f64, k as f64, p)
    } else {
        binomial_pmf_product(m, k, p)
    }
}

/// `Σ_{j ≤ k} Pr(j)`.
pub fn binomial_cdf(params: &OrderStatParams) -> f64 {
    let mut acc = 0.0;
    for j in 0..=params.k {
        let q = OrderStatParams { k: j, ..*params };
        acc += binomial_order_prob(&q);
    }
    acc.min(1.0)
}

/// `N(Mp, Mp(1-p))`.
pub fn normal_approx(params: &OrderStatParams) -> NormalLaw {
    let m = params.m as f64;
    NormalLaw {
        mean: m * params.p,
        variance: m * params.p * (1.0 - params.p),
    }
}

/// The normal approximation is trusted when `Mp(1-p) > 9` (strict).
pub fn approx_is_valid(params: &OrderStatParams) -> bool {
    normal_approx(params).variance > 9.0
}

/// Percentile-space law of a median over `m` received values:
/// `N(0.5, 0.25/m)`. Only stated for `m > 2`.
pub fn median_percentile_law(m: u64) -> Result<NormalLaw> {
    check_sample_size(m)?;
    Ok(NormalLaw {
        mean: 0.5,
        variance: 0.25 / m as f64,
    })
}

/// Law of `o(s_i) - o(s_j)` for two peers with `m_i` and `m_j` received
/// values: `N(0, 0.25/m_i + 0.25/m_j)`, i.e. `N(0, 0.5/M)` when equal.
pub fn peer_difference_law(m_i: u64, m_j: u64) -> Result<NormalLaw> {
    let a = median_percentile_law(m_i)?;
    let b = median_percentile_law(m_j)?;
    Ok(NormalLaw {
        mean: 0.0,
        variance: a.variance + b.variance,
    })
}

/// Asymptotic standard deviation of the median of `m` draws from a normal
/// population with standard deviation `sigma`: `sigma · sqrt(π / 2m)`.
pub fn value_space_median_std(sigma: f64, m: u64) -> Result<f64> {
    check_sample_size(m)?;
    if sigma.is_nan() || sigma <= 0.0 {
        return Err(EdaError::InvalidParams(format!("sigma = {sigma} must be positive")));
    }
    Ok(sigma * (PI / (2.0 * m as f64)).sqrt())
}

fn check_sample_size(m: u64) -> Result<()> {
    if m <= 2 {
        return Err(EdaError::InvalidParams(format!(
            "the median law needs M > 2, got {m}"
        )));
    }
    Ok(())
}

// C(m, k) is exact in f64 for m ≤ 50 (C(50, 25) < 2^53).
fn binomial_pmf_product(m: u64, k: u64, p: f64) -> f64 {
    let k_small = k.min(m - k);
    let mut c = 1.0f64;
    for i in 1..=k_small {
        c = c * (m - k_small + i) as f64 / i as f64;
    }
    c.round() * p.powi(k as i32) * (1.0 - p).powi((m - k) as i32)
}

// Loader's saddle-point evaluation: the pmf is assembled from Stirling
// remainders and deviance terms, all O(1) in magnitude, so it keeps full
// relative precision for any M.
fn binomial_pmf_saddle(n: f64, x: f64, p: f64) -> f64 {
    let q = 1.0 - p;
    if p == 0.0 {
        return if x == 0.0 { 1.0 } else { 0.0 };
    }
    if q == 0.0 {
        return if x == n { 1.0 } else { 0.0 };
    }
    if x == 0.0 {
        let lc = if p < 0.1 { -bd0(n, n * q) - n * p } else { n * q.ln() };
        return lc.exp();
    }
    if x == n {
        let lc = if q < 0.1 { -bd0(n, n * p) - n * q } else { n * p.ln() };
        return lc.exp();
    }
    let lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(x, n * p) - bd0(n - x, n * q);
    let lf = (2.0 * PI).ln() + x.ln() + (-x / n).ln_1p();
    (lc - 0.5 * lf).exp()
}

/// `ln(n!) - [(n + 1/2) ln n - n + ln sqrt(2π)]` for integer `n ≥ 1`.
fn stirlerr(n: f64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15.0 {
        let fact: f64 = (1..=n as u64).map(|i| i as f64).product();
        return fact.ln() - (n + 0.5) * n.ln() + n - 0.5 * (2.0 * PI).ln();
    }
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `x ln(x/np) + np - x`, by series when `x ≈ np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        if s.abs() < f64::MIN_POSITIVE {
            return s;
        }
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / (2 * j + 1) as f64;
            if s1 == s {
                return s1;
            }
            s = s1;
        }
    }
    x * (x / np).ln() + np - x
}
