//! Type space, cross-sectional type distribution, and conditional
//! cash-flow families.
//!
//! Both families are ordered by first-order stochastic dominance in the
//! type index: `Exponential` shifts the scale (mean equals theta) and
//! `LognormalLocation` shifts the log-mean (log-mean equals theta, fixed
//! log-sd sigma). Both satisfy MLRP.

use std::sync::OnceLock;

use statrs::distribution::{Beta, Continuous, ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::numerics::gauss_legendre;

fn std_normal() -> &'static Normal {
    static N: OnceLock<Normal> = OnceLock::new();
    N.get_or_init(|| Normal::new(0.0, 1.0).unwrap())
}

/// Closed type interval `[theta_lo, theta_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypeSpace {
    pub theta_lo: f64,
    pub theta_hi: f64,
}

impl TypeSpace {
    pub fn new(theta_lo: f64, theta_hi: f64) -> Result<Self> {
        if !theta_lo.is_finite() || !theta_hi.is_finite() || theta_lo >= theta_hi {
            return Err(Error::Domain(format!(
                "type space needs finite theta_lo < theta_hi, got [{theta_lo}, {theta_hi}]"
            )));
        }
        Ok(Self { theta_lo, theta_hi })
    }

    pub fn contains(&self, theta: f64) -> bool {
        theta >= self.theta_lo && theta <= self.theta_hi
    }

    pub fn width(&self) -> f64 {
        self.theta_hi - self.theta_lo
    }
}

/// Cross-sectional distribution of types on a [`TypeSpace`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TypeDistributionKind {
    Uniform,
    /// Beta(alpha, beta) rescaled onto the support.
    TruncatedBeta { alpha: f64, beta: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TypeDistribution {
    pub kind: TypeDistributionKind,
    pub support: TypeSpace,
}

impl TypeDistribution {
    pub fn uniform(support: TypeSpace) -> Self {
        Self {
            kind: TypeDistributionKind::Uniform,
            support,
        }
    }

    pub fn truncated_beta(support: TypeSpace, alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && beta > 0.0) {
            return Err(Error::Domain(format!(
                "beta shape parameters must be positive, got ({alpha}, {beta})"
            )));
        }
        Ok(Self {
            kind: TypeDistributionKind::TruncatedBeta { alpha, beta },
            support,
        })
    }

    /// Density `f(theta)`; zero outside the support.
    pub fn pdf(&self, theta: f64) -> f64 {
        if !self.support.contains(theta) {
            return 0.0;
        }
        let w = self.support.width();
        let u = (theta - self.support.theta_lo) / w;
        match self.kind {
            TypeDistributionKind::Uniform => 1.0 / w,
            TypeDistributionKind::TruncatedBeta { alpha, beta } => {
                Beta::new(alpha, beta).unwrap().pdf(u.clamp(0.0, 1.0)) / w
            }
        }
    }

    /// Cdf `F(theta)`, clamped to `[0, 1]` outside the support.
    pub fn cdf(&self, theta: f64) -> f64 {
        let u = ((theta - self.support.theta_lo) / self.support.width()).clamp(0.0, 1.0);
        match self.kind {
            TypeDistributionKind::Uniform => u,
            TypeDistributionKind::TruncatedBeta { alpha, beta } => {
                Beta::new(alpha, beta).unwrap().cdf(u)
            }
        }
    }
}

/// Uniform collateral cap applied to every type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CollateralEndowment {
    pub a_bar: f64,
}

impl CollateralEndowment {
    pub fn new(a_bar: f64) -> Result<Self> {
        if !a_bar.is_finite() || a_bar < 0.0 {
            return Err(Error::Domain(format!(
                "collateral cap must be finite and nonnegative, got {a_bar}"
            )));
        }
        Ok(Self { a_bar })
    }
}

/// Conditional cash-flow law of the project payoff given the type.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CashFlowFamily {
    /// X | theta ~ Exponential with mean theta (theta > 0).
    Exponential,
    /// ln X | theta ~ Normal(theta, sigma^2), sigma > 0.
    LognormalLocation { sigma: f64 },
}

impl CashFlowFamily {
    pub fn lognormal(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::Domain(format!("lognormal sigma must be positive, got {sigma}")));
        }
        Ok(Self::LognormalLocation { sigma })
    }

    fn check_theta(&self, theta: f64) -> Result<()> {
        let ok = match self {
            Self::Exponential => theta > 0.0 && theta.is_finite(),
            Self::LognormalLocation { .. } => theta.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Domain(format!("type {theta} outside the family's parameter range")))
        }
    }

    /// Unconditional mean `mu(theta)`.
    pub fn mean(&self, theta: f64) -> f64 {
        match self {
            Self::Exponential => theta,
            Self::LognormalLocation { sigma } => (theta + 0.5 * sigma * sigma).exp(),
        }
    }

    /// Survivor `G(d | theta) = Pr[X >= d | theta]`.
    pub fn survivor(&self, d: f64, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        if d < 0.0 {
            return Err(Error::Domain(format!("face value must be nonnegative, got {d}")));
        }
        Ok(self.survivor_raw(d, theta))
    }

    pub(crate) fn survivor_raw(&self, d: f64, theta: f64) -> f64 {
        if d <= 0.0 {
            return 1.0;
        }
        match self {
            Self::Exponential => (-d / theta).exp(),
            Self::LognormalLocation { sigma } => {
                1.0 - std_normal().cdf((d.ln() - theta) / sigma)
            }
        }
    }

    /// Density `g(d | theta) = -dG/dd`, defined on the interior of the support.
    pub fn density(&self, d: f64, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        let interior = match self {
            Self::Exponential => d >= 0.0,
            Self::LognormalLocation { .. } => d > 0.0,
        };
        if !interior {
            return Err(Error::Domain(format!("face value {d} outside the cash-flow support")));
        }
        Ok(self.density_raw(d, theta))
    }

    pub(crate) fn density_raw(&self, d: f64, theta: f64) -> f64 {
        match self {
            Self::Exponential => (-d / theta).exp() / theta,
            Self::LognormalLocation { sigma } => {
                if d <= 0.0 {
                    return 0.0;
                }
                std_normal().pdf((d.ln() - theta) / sigma) / (d * sigma)
            }
        }
    }

    /// Partial expectation `E[(X - d) 1{X >= d} | theta]`.
    pub fn partial_expectation(&self, d: f64, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        if d < 0.0 {
            return Err(Error::Domain(format!("face value must be nonnegative, got {d}")));
        }
        Ok(self.partial_expectation_raw(d, theta))
    }

    pub(crate) fn partial_expectation_raw(&self, d: f64, theta: f64) -> f64 {
        match self {
            Self::Exponential => theta * (-d / theta).exp(),
            Self::LognormalLocation { sigma } => {
                if d <= 0.0 {
                    return self.mean(theta);
                }
                let z = (d.ln() - theta) / sigma;
                // E[X 1{X>=d}] for a lognormal, minus d * G.
                let upper = self.mean(theta) * (1.0 - std_normal().cdf(z - sigma));
                (upper - d * (1.0 - std_normal().cdf(z))).max(0.0)
            }
        }
    }

    /// Conditional upper-tail mean `mu_+(d, theta) = E[X | X >= d, theta]`.
    ///
    /// Derived from the partial expectation; errors when the tail is empty.
    pub fn upper_tail_mean(&self, d: f64, theta: f64) -> Result<f64> {
        let g = self.survivor(d, theta)?;
        if g < 1e-300 {
            return Err(Error::Domain(format!("empty upper tail at d = {d}")));
        }
        Ok(self.partial_expectation_raw(d, theta) / g + d)
    }

    /// Quantile of the conditional cash-flow law.
    pub fn quantile(&self, p: f64, theta: f64) -> Result<f64> {
        self.check_theta(theta)?;
        if !(0.0..1.0).contains(&p) {
            return Err(Error::Domain(format!("quantile level must lie in [0,1), got {p}")));
        }
        Ok(match self {
            Self::Exponential => -theta * (1.0 - p).ln(),
            Self::LognormalLocation { sigma } => (theta + sigma * std_normal().inverse_cdf(p)).exp(),
        })
    }
}

/// Pool-averaged integrand for [`pool_moment`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolIntegrand {
    /// Repayment probability `G(d | theta)`.
    Survivor,
    /// Cash-flow density `g(d | theta)`.
    Density,
    /// Default probability `1 - G(d | theta)`.
    DefaultProb,
}

/// Mass of a pool under the type distribution.
pub fn pool_mass(dist: &TypeDistribution, pool: (f64, f64)) -> f64 {
    dist.cdf(pool.1) - dist.cdf(pool.0)
}

/// Cross-sectional expectation of `h(d | theta)` over a type pool,
/// normalized by the pool mass. Fixed-order Gauss-Legendre in theta.
///
/// Degenerate pools (mass below 1e-12) are an error; callers hold the
/// point-mass branch.
pub fn pool_moment(
    fam: &CashFlowFamily,
    dist: &TypeDistribution,
    pool: (f64, f64),
    d: f64,
    which: PoolIntegrand,
    order: usize,
) -> Result<f64> {
    let (lo, hi) = pool;
    if lo > hi || !dist.support.contains(lo) || !dist.support.contains(hi) {
        return Err(Error::Domain(format!(
            "pool [{lo}, {hi}] is not an interval inside the support"
        )));
    }
    let mass = pool_mass(dist, pool);
    if mass < 1e-12 {
        return Err(Error::DegeneratePool(lo, hi));
    }
    let (nodes, weights) = gauss_legendre(order);
    let mid = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        let theta = mid + half * x;
        let h = match which {
            PoolIntegrand::Survivor => fam.survivor_raw(d, theta),
            PoolIntegrand::Density => fam.density_raw(d, theta),
            PoolIntegrand::DefaultProb => 1.0 - fam.survivor_raw(d, theta),
        };
        acc += w * h * dist.pdf(theta);
    }
    Ok(acc * half / mass)
}
