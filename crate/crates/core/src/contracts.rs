//! Contract primitives: borrower utility, financier profit, per-type social
//! surplus, the zero-profit collateral map, and the slope identities the
//! solvers verify against finite differences.

use crate::distributions::CashFlowFamily;
use crate::error::{Error, Result};

/// Secured debt contract: face value `d` due at date 1 and pledged
/// collateral `m`, forfeited in default. Feasibility against the cap
/// `a_bar` is the caller's responsibility.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contract {
    pub d: f64,
    pub m: f64,
}

impl Contract {
    pub fn new(d: f64, m: f64) -> Result<Self> {
        if !(d >= 0.0 && m >= 0.0 && d.is_finite() && m.is_finite()) {
            return Err(Error::Domain(format!(
                "contract needs d >= 0 and m >= 0, got (d = {d}, m = {m})"
            )));
        }
        Ok(Self { d, m })
    }
}

/// Which financier holds the contract.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FinancierSide {
    Bank,
    Market,
}

/// Financier liquidation technology: fraction `lambda` of seized collateral
/// realized net of deadweight costs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FinancierTech {
    pub lambda: f64,
    pub side: FinancierSide,
    /// Fraction of the defaulted cash flow the financier recovers beyond
    /// collateral. Zero in the baseline model.
    pub cash_recovery: f64,
}

impl FinancierTech {
    pub fn new(lambda: f64, side: FinancierSide) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::Domain(format!(
                "liquidation efficiency must lie in (0, 1], got {lambda}"
            )));
        }
        Ok(Self {
            lambda,
            side,
            cash_recovery: 0.0,
        })
    }

    pub fn bank(lambda: f64) -> Result<Self> {
        Self::new(lambda, FinancierSide::Bank)
    }

    pub fn market(lambda: f64) -> Result<Self> {
        Self::new(lambda, FinancierSide::Market)
    }
}

/// Borrower expected payoff `E[(X - d) 1{X >= d}] - m Pr[X < d]`.
///
/// Independent of the financier's liquidation technology.
pub fn borrower_utility(fam: &CashFlowFamily, theta: f64, c: Contract) -> f64 {
    let g = fam.survivor_raw(c.d, theta);
    fam.partial_expectation_raw(c.d, theta) - c.m * (1.0 - g)
}

/// Financier expected net revenue `d G + lambda m (1 - G) - 1`.
pub fn financier_profit(fam: &CashFlowFamily, theta: f64, c: Contract, tech: &FinancierTech) -> f64 {
    let g = fam.survivor_raw(c.d, theta);
    let mut profit = c.d * g + tech.lambda * c.m * (1.0 - g) - 1.0;
    if tech.cash_recovery > 0.0 {
        // E[X 1{X < d}] = mu - (pe + d G).
        let below = fam.mean(theta) - fam.partial_expectation_raw(c.d, theta) - c.d * g;
        profit += tech.cash_recovery * below;
    }
    profit
}

/// Per-type social surplus `mu(theta) - (1 - lambda) m Pr[X < d] - 1`.
pub fn social_surplus(fam: &CashFlowFamily, theta: f64, c: Contract, tech: &FinancierTech) -> f64 {
    let q = 1.0 - fam.survivor_raw(c.d, theta);
    fam.mean(theta) - (1.0 - tech.lambda) * c.m * q - 1.0
}

/// Collateral required for zero profit at face value `d`:
/// `m(d) = (1 - d G) / (lambda (1 - G))`.
///
/// May exceed the collateral cap; callers check feasibility.
pub fn zero_profit_collateral(
    fam: &CashFlowFamily,
    theta: f64,
    d: f64,
    tech: &FinancierTech,
) -> Result<f64> {
    let g = fam.survivor(d, theta)?;
    if g >= 1.0 - 1e-12 {
        return Err(Error::NoDefaultRisk);
    }
    let shortfall = 1.0 - d * g;
    if shortfall < 0.0 {
        return Err(Error::OverRepaid);
    }
    Ok(shortfall / (tech.lambda * (1.0 - g)))
}

/// Partial derivatives of borrower utility and financier profit at a
/// contract: `(dU/dd, dU/dm, dPi/dd, dPi/dm)`.
///
/// `dU/dd = -(G + m g)`: raising the face value costs `G` in expected
/// repayment and widens the default region where collateral is lost. The
/// unsecured shorthand `-G` applies only at `m = 0`.
pub fn slope_identities(
    fam: &CashFlowFamily,
    theta: f64,
    c: Contract,
    tech: &FinancierTech,
) -> (f64, f64, f64, f64) {
    let g = fam.survivor_raw(c.d, theta);
    let dens = fam.density_raw(c.d, theta);
    (
        -(g + c.m * dens),
        -(1.0 - g),
        g - c.d * dens + tech.lambda * c.m * dens,
        tech.lambda * (1.0 - g),
    )
}
