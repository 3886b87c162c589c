use thiserror::Error;

/// Errors surfaced by the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Argument outside the valid domain (negative face value, type outside
    /// the family's parameter range, malformed interval, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// Zero-profit collateral is undefined because repayment is certain.
    #[error("no default risk: G(d|theta) >= 1 - 1e-12, collateral plays no role")]
    NoDefaultRisk,

    /// Face value alone over-repays the unit investment; the implied
    /// collateral would be negative.
    #[error("over-repaid: d*G(d|theta) > 1, zero profit needs negative collateral")]
    OverRepaid,

    /// Pool mass below 1e-12; callers must use the point-mass branch.
    #[error("degenerate pool [{0}, {1}]: mass below 1e-12")]
    DegeneratePool(f64, f64),

    /// No grid type admits a zero-profit bank contract.
    #[error("no type on the grid is financeable at zero profit")]
    AllUnfinanceable,

    /// No market participation fixed point exists.
    #[error("market unravels: no participation cutoff with zero utility exists")]
    MarketUnravels,

    /// Iteration budget exhausted before reaching tolerance.
    #[error("no convergence after {0} iterations")]
    NoConvergence(usize),

    /// Brute-force grid found no point satisfying zero profit.
    #[error("no feasible point on the contract grid")]
    NoFeasiblePoint,

    /// Bracketing for a root search failed even after interval expansion.
    #[error("bracketing failed: {0}")]
    BracketingFailed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
