//! Pooled collateralized bond: the market prices one contract against a
//! conjectured type pool, breaking even on the pool average. Includes the
//! collateral-capped branch and the market-only participation fixed point.
//!
//! The interior first-order condition is the pool-averaged slope equality
//! `E_T[g] (d - lambda_m m) = (1 - lambda_m) E_T[G]` on the pooled
//! zero-profit locus `m(d) = (1 - d E_T[G]) / (lambda_m E_T[1 - G])`,
//! mirroring the per-type bank construction; candidate selection uses the
//! same screening objective `V` (see the bank module).

use crate::bank::{solve_bank_contract_opts, BankBranch, TangencyForm, D_TOL};
use crate::contracts::{borrower_utility, Contract, FinancierTech};
use crate::distributions::{
    pool_mass, pool_moment, CashFlowFamily, PoolIntegrand, TypeDistribution,
};
use crate::error::{Error, Result};
use crate::numerics::{bisect, gauss_legendre, golden_max, integrate};

/// Gauss-Legendre order for pool moments.
pub const POOL_ORDER: usize = 64;

const SCAN_POINTS: usize = 1600;

/// Pools narrower than this collapse to the point-mass branch.
const POINT_MASS_WIDTH: f64 = 1e-9;

/// How the pooled solve terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MarketBranch {
    /// Collateral below the cap; pooled slope-equality residual near zero.
    Interior,
    /// Collateral pinned at the cap; face value solves pooled zero profit.
    CollateralCapped,
    /// Optimum at the `d E[G] = 1` boundary: the face value alone repays
    /// the investment and no collateral is pledged.
    ZeroCollateral,
    /// No contract with `m <= a_bar` breaks even on the pool.
    Infeasible,
}

/// Pooled bond contract for a conjectured pool of types.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketContract {
    pub contract: Contract,
    pub pool: (f64, f64),
    pub branch: MarketBranch,
    /// `(pool_tangency_residual, zero_profit_residual)`.
    pub residuals: (f64, f64),
}

impl MarketContract {
    fn infeasible(pool: (f64, f64)) -> Self {
        Self {
            contract: Contract { d: 0.0, m: 0.0 },
            pool,
            branch: MarketBranch::Infeasible,
            residuals: (f64::NAN, f64::NAN),
        }
    }

    pub fn feasible(&self) -> bool {
        self.branch != MarketBranch::Infeasible
    }
}

/// Market-only regime: pooled contract priced on `[cutoff, theta_hi]` such
/// that the cutoff type is exactly indifferent to staying out.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketOnlyRegime {
    pub participation_cutoff: f64,
    pub contract: MarketContract,
    /// The participation condition had several fixed points; the largest
    /// (most inclusive) one is returned.
    pub multiple_fixed_points: bool,
}

/// Pool-averaged borrower payoff at a contract.
pub fn pooled_utility(
    fam: &CashFlowFamily,
    dist: &TypeDistribution,
    pool: (f64, f64),
    c: Contract,
) -> Result<f64> {
    let mass = pool_mass(dist, pool);
    if mass < 1e-12 {
        return Err(Error::DegeneratePool(pool.0, pool.1));
    }
    let (nodes, weights) = gauss_legendre(POOL_ORDER);
    let mid = 0.5 * (pool.0 + pool.1);
    let half = 0.5 * (pool.1 - pool.0);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(&weights) {
        let theta = mid + half * x;
        acc += w * borrower_utility(fam, theta, c) * dist.pdf(theta);
    }
    Ok(acc * half / mass)
}

/// Pooled bond for a conjectured pool at the default tolerance.
pub fn solve_market_contract(
    fam: &CashFlowFamily,
    dist: &TypeDistribution,
    pool: (f64, f64),
    lambda_m: f64,
    a_bar: f64,
) -> Result<MarketContract> {
    solve_market_contract_tol(fam, dist, pool, lambda_m, a_bar, D_TOL)
}

/// Pooled bond with explicit root tolerance.
pub fn solve_market_contract_tol(
    fam: &CashFlowFamily,
    dist: &TypeDistribution,
    pool: (f64, f64),
    lambda_m: f64,
    a_bar: f64,
    tol: f64,
) -> Result<MarketContract> {
    if !(lambda_m > 0.0 && lambda_m < 1.0) {
        return Err(Error::Domain(format!(
            "market liquidation efficiency must lie in (0, 1), got {lambda_m}"
        )));
    }
    if !(a_bar >= 0.0) || !a_bar.is_finite() {
        return Err(Error::Domain(format!(
            "collateral cap must be finite and nonnegative, got {a_bar}"
        )));
    }
    let (lo_t, hi_t) = pool;
    if lo_t > hi_t || !dist.support.contains(lo_t) || !dist.support.contains(hi_t) {
        return Err(Error::Domain(format!(
            "pool [{lo_t}, {hi_t}] is not an interval inside the support"
        )));
    }

    // Degenerate pool: the pooled problem is the per-type problem at the
    // market's liquidation efficiency.
    if hi_t - lo_t < POINT_MASS_WIDTH || pool_mass(dist, pool) < 1e-12 {
        let theta = 0.5 * (lo_t + hi_t);
        let sol =
            solve_bank_contract_opts(fam, theta, lambda_m, a_bar, TangencyForm::SlopeEquality, tol)?;
        return Ok(MarketContract {
            contract: sol.contract,
            pool,
            branch: match sol.branch {
                BankBranch::Interior => MarketBranch::Interior,
                BankBranch::CollateralBound => MarketBranch::CollateralCapped,
                BankBranch::ZeroCollateral => MarketBranch::ZeroCollateral,
                BankBranch::Unfinanceable => MarketBranch::Infeasible,
            },
            residuals: sol.residuals,
        });
    }

    let eg = |d: f64| pool_moment(fam, dist, pool, d, PoolIntegrand::Survivor, POOL_ORDER).unwrap();
    let edens = |d: f64| pool_moment(fam, dist, pool, d, PoolIntegrand::Density, POOL_ORDER).unwrap();
    // Zero profit attainable with m <= a_bar at this face value / with m >= 0.
    let r = |d: f64| {
        let g = eg(d);
        d * g + lambda_m * a_bar * (1.0 - g) - 1.0
    };
    let s = |d: f64| 1.0 - d * eg(d);
    let feas = |d: f64| r(d).min(s(d));
    let m_zp = |d: f64| {
        let g = eg(d);
        if g >= 1.0 - 1e-12 {
            return Err(Error::NoDefaultRisk);
        }
        if 1.0 - d * g < 0.0 {
            return Err(Error::OverRepaid);
        }
        Ok((1.0 - d * g) / (lambda_m * (1.0 - g)))
    };
    let residual = |d: f64| match m_zp(d) {
        Ok(m) => edens(d) * (d - lambda_m * m) - (1.0 - lambda_m) * eg(d),
        Err(_) => 1.0,
    };

    let d_max = fam
        .quantile(1.0 - 1e-10, lo_t)?
        .max(fam.quantile(1.0 - 1e-10, hi_t)?);
    let grid: Vec<f64> = (1..=SCAN_POINTS)
        .map(|k| d_max * k as f64 / SCAN_POINTS as f64)
        .collect();
    let r_vals: Vec<f64> = grid.iter().map(|&d| r(d)).collect();
    let i_rmax = (0..SCAN_POINTS)
        .max_by(|&a, &b| r_vals[a].total_cmp(&r_vals[b]))
        .unwrap();
    let rmax = if r_vals[i_rmax] >= 0.0 {
        r_vals[i_rmax]
    } else {
        let lo = grid[i_rmax.saturating_sub(1)];
        let hi = grid[(i_rmax + 1).min(SCAN_POINTS - 1)];
        golden_max(&r, lo, hi, tol).1
    };
    if rmax < 0.0 {
        return Ok(MarketContract::infeasible(pool));
    }

    // Component boundaries are roots of r or s; scanning them separately
    // catches feasible stretches thinner than the grid spacing.
    let s_vals: Vec<f64> = grid.iter().map(|&d| s(d)).collect();
    let mut cuts: Vec<f64> = vec![1e-12, d_max];
    for k in 1..SCAN_POINTS {
        if r_vals[k - 1] == 0.0 || r_vals[k - 1] * r_vals[k] < 0.0 {
            cuts.push(bisect(&r, grid[k - 1], grid[k], 1e-13, 200)?);
        }
        if s_vals[k - 1] == 0.0 || s_vals[k - 1] * s_vals[k] < 0.0 {
            cuts.push(bisect(&s, grid[k - 1], grid[k], 1e-13, 200)?);
        }
    }
    cuts.sort_by(f64::total_cmp);
    let mut components: Vec<(f64, f64)> = Vec::new();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b - a > 1e-12 && feas(0.5 * (a + b)) >= 0.0 {
            components.push((a, b));
        }
    }
    if components.is_empty() {
        return cap_bound_market(fam, dist, pool, lambda_m, a_bar, &grid, &r_vals, i_rmax, tol);
    }

    // Candidate kind: 0 interior root, 1 left edge, 2 right edge.
    let mut best: Option<(f64, u8, f64)> = None; // (d, kind, pooled payoff)
    for &(left, right) in &components {
        let lo = left + 1e-12;
        let hi = right - 1e-12;
        if hi <= lo {
            continue;
        }
        let mut candidates: Vec<(f64, u8)> = Vec::new();
        let mut prev_pt = (lo, residual(lo));
        if prev_pt.1 > 0.0 {
            candidates.push((left, 1));
        }
        for k in 1..=200 {
            let d = lo + (hi - lo) * k as f64 / 200.0;
            let rd = residual(d);
            if prev_pt.1 <= 0.0 && rd > 0.0 {
                candidates.push((bisect(&residual, prev_pt.0, d, tol, 200)?, 0));
            }
            prev_pt = (d, rd);
        }
        if prev_pt.1 < 0.0 {
            candidates.push((right, 2));
        }
        if candidates.is_empty() {
            candidates.push((0.5 * (lo + hi), 0));
        }
        let chosen = if candidates.len() == 1 {
            candidates[0]
        } else {
            *candidates
                .iter()
                .max_by(|a, b| {
                    let va = integrate(|x| -residual(x) / lambda_m, lo, a.0.max(lo), 64);
                    let vb = integrate(|x| -residual(x) / lambda_m, lo, b.0.max(lo), 64);
                    va.total_cmp(&vb)
                })
                .unwrap()
        };
        let m = m_zp(chosen.0.clamp(lo, hi)).unwrap_or(a_bar).clamp(0.0, a_bar);
        let payoff = pooled_utility(fam, dist, pool, Contract { d: chosen.0, m })?;
        if best.is_none_or(|(_, _, u)| payoff > u) {
            best = Some((chosen.0, chosen.1, payoff));
        }
    }

    let (d_star, kind, _) = best.unwrap();
    if kind == 1 {
        return cap_bound_market(fam, dist, pool, lambda_m, a_bar, &grid, &r_vals, i_rmax, tol);
    }
    let (branch, m_star) = if kind == 2 {
        // Which constraint ends the component at this edge?
        if s(d_star).abs() <= r(d_star).abs() {
            (MarketBranch::ZeroCollateral, 0.0)
        } else {
            (MarketBranch::CollateralCapped, a_bar)
        }
    } else {
        (
            MarketBranch::Interior,
            m_zp(d_star).unwrap_or(0.0).clamp(0.0, a_bar),
        )
    };
    let g = eg(d_star);
    Ok(MarketContract {
        contract: Contract { d: d_star, m: m_star },
        pool,
        branch,
        residuals: (
            residual(d_star).abs(),
            (d_star * g + lambda_m * m_star * (1.0 - g) - 1.0).abs(),
        ),
    })
}

#[allow(clippy::too_many_arguments)]
fn cap_bound_market(
    fam: &CashFlowFamily,
    dist: &TypeDistribution,
    pool: (f64, f64),
    lambda_m: f64,
    a_bar: f64,
    grid: &[f64],
    r_vals: &[f64],
    i_rmax: usize,
    tol: f64,
) -> Result<MarketContract> {
    let eg = |d: f64| pool_moment(fam, dist, pool, d, PoolIntegrand::Survivor, POOL_ORDER).unwrap();
    let r = |d: f64| {
        let g = eg(d);
        d * g + lambda_m * a_bar * (1.0 - g) - 1.0
    };
    let mut best: Option<(f64, f64)> = None;
    let mut prev = (grid[0], r_vals[0]);
    for (&d, &rd) in grid.iter().zip(r_vals).skip(1) {
        if prev.1 == 0.0 || prev.1 * rd < 0.0 {
            let root = bisect(&r, prev.0, d, tol, 200)?;
            let u = pooled_utility(fam, dist, pool, Contract { d: root, m: a_bar })?;
            if best.is_none_or(|(_, bu)| u > bu) {
                best = Some((root, u));
            }
        }
        prev = (d, rd);
    }
    let d_m = match best {
        Some((d, _)) => d,
        None => {
            let lo = grid[i_rmax.saturating_sub(1)];
            let hi = grid[(i_rmax + 1).min(grid.len() - 1)];
            golden_max(&r, lo, hi, tol).0
        }
    };
    let c = Contract { d: d_m, m: a_bar };
    let g = eg(d_m);
    let edens = pool_moment(fam, dist, pool, d_m, PoolIntegrand::Density, POOL_ORDER)?;
    Ok(MarketContract {
        contract: c,
        pool,
        branch: MarketBranch::CollateralCapped,
        residuals: (
            (edens * (d_m - lambda_m * a_bar) - (1.0 - lambda_m) * g).abs(),
            (d_m * g + lambda_m * a_bar * (1.0 - g) - 1.0).abs(),
        ),
    })
}

/// Market-only regime: participation cutoff such that the marginal type is
/// indifferent under the contract priced on everyone above it.
///
/// When several cutoffs satisfy the indifference condition, the largest
/// (most inclusive pool) is returned and flagged.
pub fn solve_market_only(
    fam: &CashFlowFamily,
    dist: &TypeDistribution,
    lambda_m: f64,
    a_bar: f64,
) -> Result<MarketOnlyRegime> {
    let (lo, hi) = (dist.support.theta_lo, dist.support.theta_hi);
    // Marginal-type payoff as a function of the conjectured cutoff;
    // infeasible pools count as staying out.
    let h = |cut: f64| -> Result<f64> {
        let mc = solve_market_contract(fam, dist, (cut, hi), lambda_m, a_bar)?;
        if !mc.feasible() {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(borrower_utility(fam, cut, mc.contract))
    };
    const N: usize = 200;
    let step = (hi - lo) / N as f64;
    let mut prev = (lo, h(lo)?);
    if prev.1 > 0.0 {
        // Even the worst type gains: full participation. Still scan for
        // other fixed points to report multiplicity.
        let contract = solve_market_contract(fam, dist, (lo, hi), lambda_m, a_bar)?;
        let mut crossings = 0usize;
        let mut last = prev.1;
        for k in 1..N {
            let u = h(lo + step * k as f64)?;
            if last.is_finite() && u.is_finite() && last * u < 0.0 {
                crossings += 1;
            }
            last = u;
        }
        return Ok(MarketOnlyRegime {
            participation_cutoff: lo,
            contract,
            multiple_fixed_points: crossings > 0,
        });
    }
    let mut roots: Vec<f64> = Vec::new();
    for k in 1..N {
        // Stop short of the upper endpoint where the pool degenerates.
        let cut = lo + step * k as f64;
        let u = h(cut)?;
        if prev.1.is_finite() && u.is_finite() && prev.1 <= 0.0 && u > 0.0 {
            let (mut a, mut b) = (prev.0, cut);
            for _ in 0..80 {
                let mid = 0.5 * (a + b);
                if h(mid)? > 0.0 {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            roots.push(0.5 * (a + b));
        }
        prev = (cut, u);
    }
    let Some(&cutoff) = roots.last() else {
        return Err(Error::MarketUnravels);
    };
    let contract = solve_market_contract(fam, dist, (cutoff, hi), lambda_m, a_bar)?;
    Ok(MarketOnlyRegime {
        participation_cutoff: cutoff,
        contract,
        multiple_fixed_points: roots.len() > 1,
    })
}

/// Per-type financier profit at a pooled contract (cross-subsidy check).
pub fn pooled_profit_on_type(
    fam: &CashFlowFamily,
    theta: f64,
    mc: &MarketContract,
    lambda_m: f64,
) -> Result<f64> {
    let tech = FinancierTech::market(lambda_m)?;
    Ok(crate::contracts::financier_profit(fam, theta, mc.contract, &tech))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{TypeDistribution, TypeSpace};
    use approx::assert_abs_diff_eq;

    fn expo() -> CashFlowFamily {
        CashFlowFamily::Exponential
    }

    fn uniform13() -> TypeDistribution {
        TypeDistribution::uniform(TypeSpace::new(1.0, 3.0).unwrap())
    }

    #[test]
    fn point_mass_pool_equals_per_type_solution() {
        let dist = uniform13();
        let mc = solve_market_contract(&expo(), &dist, (2.0, 2.0), 0.9, 10.0).unwrap();
        let bank = crate::bank::solve_bank_contract(&expo(), 2.0, 0.9, 10.0).unwrap();
        assert_abs_diff_eq!(mc.contract.d, bank.contract.d, epsilon = 1e-12);
        assert_abs_diff_eq!(mc.contract.m, bank.contract.m, epsilon = 1e-12);
        assert_eq!(mc.branch, MarketBranch::Interior);
    }

    #[test]
    fn pooled_residuals_below_tolerance() {
        let dist = uniform13();
        let mc = solve_market_contract(&expo(), &dist, (1.5, 3.0), 0.85, 2.0).unwrap();
        assert_eq!(mc.branch, MarketBranch::Interior);
        assert!(mc.residuals.0 < 1e-9, "tangency residual {}", mc.residuals.0);
        assert!(mc.residuals.1 < 1e-9, "zero-profit residual {}", mc.residuals.1);
        assert!(mc.contract.m <= 2.0);
    }

    #[test]
    fn tiny_cap_never_interior_above_cap() {
        let dist = uniform13();
        let mc = solve_market_contract(&expo(), &dist, (1.5, 3.0), 0.85, 0.01).unwrap();
        assert_ne!(mc.branch, MarketBranch::Interior);
        if mc.feasible() {
            assert!(mc.contract.m <= 0.01);
        }
    }

    #[test]
    fn cross_subsidy_runs_from_safe_to_risky() {
        let dist = uniform13();
        let mc = solve_market_contract(&expo(), &dist, (1.5, 3.0), 0.85, 2.0).unwrap();
        let lo = pooled_profit_on_type(&expo(), 1.5, &mc, 0.85).unwrap();
        let hi = pooled_profit_on_type(&expo(), 3.0, &mc, 0.85).unwrap();
        assert!(lo < 0.0, "lowest pool type should be subsidized, got {lo}");
        assert!(hi > 0.0, "highest pool type should subsidize, got {hi}");
        // Pool-weighted average profit is the zero-profit residual.
        assert!(mc.residuals.1 < 1e-9);
    }

    #[test]
    fn market_only_cutoff_is_indifferent() {
        let dist = uniform13();
        let regime = solve_market_only(&expo(), &dist, 0.85, 2.0).unwrap();
        let cut = regime.participation_cutoff;
        assert!(cut > 1.0 && cut < 3.0);
        let u = borrower_utility(&expo(), cut, regime.contract.contract);
        assert!(u.abs() < 1e-8, "cutoff utility {u}");
    }

    #[test]
    fn full_participation_when_worst_type_gains() {
        // High types relative to the unit investment: everyone profits.
        let dist = TypeDistribution::uniform(TypeSpace::new(4.0, 6.0).unwrap());
        let regime = solve_market_only(&expo(), &dist, 0.85, 2.0).unwrap();
        assert_eq!(regime.participation_cutoff, 4.0);
    }

    #[test]
    fn pooled_utility_increasing_in_type_at_fixed_contract() {
        let dist = uniform13();
        let mc = solve_market_contract(&expo(), &dist, (1.5, 3.0), 0.85, 2.0).unwrap();
        let mut last = f64::NEG_INFINITY;
        for k in 0..=20 {
            let theta = 1.5 + 1.5 * k as f64 / 20.0;
            let u = borrower_utility(&expo(), theta, mc.contract);
            assert!(u > last);
            last = u;
        }
    }

    #[test]
    fn market_unravels_for_hopeless_types
    () {
        let dist = TypeDistribution::uniform(TypeSpace::new(0.1, 0.3).unwrap());
        assert_eq!(
            solve_market_only(&expo(), &dist, 0.85, 0.2),
            Err(Error::MarketUnravels)
        );
    }
}
