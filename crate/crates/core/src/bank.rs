//! Borrower-optimal zero-profit bank contracts: per-type solve along the
//! zero-profit locus, the menu over a type grid with its participation
//! cutoff, and one-parameter comparative statics.
//!
//! Interior optima solve the slope-equality condition
//! `g (d - lambda m) = (1 - lambda) G` jointly with zero profit. Candidate
//! selection on the locus uses the screening objective `V` defined by the
//! line integral of the indifference slope `-G/(1-G)` against the
//! zero-profit slope, so `V'(d) = [(1 - lambda) G - g (d - lambda m(d))] / lambda`.
//! `V` is the preference functional under which the slope-equality point is
//! the optimum; the raw expected payoff ranks locus points differently and
//! would contradict the interior condition (see oracle module, which ranks
//! by the same `V`).

use crate::contracts::{
    borrower_utility, financier_profit, zero_profit_collateral, Contract, FinancierTech,
};
use crate::distributions::{CashFlowFamily, TypeDistribution};
use crate::error::{Error, Result};
use crate::numerics::{bisect, golden_max, integrate};

/// Default number of menu grid nodes.
pub const DEFAULT_GRID: usize = 401;

/// Root-finder interval tolerance on the face value.
pub const D_TOL: f64 = 1e-10;

/// Acceptance threshold for first-order and zero-profit residuals.
pub const RESIDUAL_TOL: f64 = 1e-9;

const SCAN_POINTS: usize = 1600;

/// First-order condition variant for interior optima.
///
/// `SlopeEquality` equates the borrower indifference slope with the
/// zero-profit slope: `g (d - lambda m) = (1 - lambda) G`. `FaceValueOnly`
/// is the diagnostic alternative `d g = (1 - lambda) G`, which drops the
/// collateral term from the zero-profit slope.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TangencyForm {
    #[default]
    SlopeEquality,
    FaceValueOnly,
}

/// Absolute first-order residual of the chosen tangency form at a contract.
pub fn tangency_residual(
    fam: &CashFlowFamily,
    theta: f64,
    c: Contract,
    lambda: f64,
    form: TangencyForm,
) -> f64 {
    signed_tangency(fam, theta, c.d, c.m, lambda, form).abs()
}

fn signed_tangency(
    fam: &CashFlowFamily,
    theta: f64,
    d: f64,
    m: f64,
    lambda: f64,
    form: TangencyForm,
) -> f64 {
    let g = fam.survivor_raw(d, theta);
    let dens = fam.density_raw(d, theta);
    match form {
        TangencyForm::SlopeEquality => dens * (d - lambda * m) - (1.0 - lambda) * g,
        TangencyForm::FaceValueOnly => d * dens - (1.0 - lambda) * g,
    }
}

/// How the per-type solve terminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BankBranch {
    /// Collateral strictly below the cap; first-order residual near zero.
    Interior,
    /// Collateral pinned at the cap; face value solves zero profit.
    CollateralBound,
    /// Optimum at the `d G = 1` boundary: the face value alone repays the
    /// investment and no collateral is pledged.
    ZeroCollateral,
    /// No zero-profit contract exists even with all collateral pledged.
    Unfinanceable,
}

/// Per-type solution of the bank's contracting problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BankContractSolution {
    pub contract: Contract,
    pub branch: BankBranch,
    /// Borrower expected payoff at the contract; `-inf` when unfinanceable.
    pub utility: f64,
    pub default_prob: f64,
    /// `(tangency_residual, zero_profit_residual)`.
    pub residuals: (f64, f64),
}

impl BankContractSolution {
    fn unfinanceable() -> Self {
        Self {
            contract: Contract { d: 0.0, m: 0.0 },
            branch: BankBranch::Unfinanceable,
            utility: f64::NEG_INFINITY,
            default_prob: f64::NAN,
            residuals: (f64::NAN, f64::NAN),
        }
    }

    pub fn financed(&self) -> bool {
        self.branch != BankBranch::Unfinanceable
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum CandidateKind {
    Root,
    LeftEdge,
    RightEdge,
}

/// Borrower-optimal contract for one type along the zero-profit locus,
/// with the default slope-equality condition and tolerance.
pub fn solve_bank_contract(
    fam: &CashFlowFamily,
    theta: f64,
    lambda: f64,
    a_bar: f64,
) -> Result<BankContractSolution> {
    solve_bank_contract_opts(fam, theta, lambda, a_bar, TangencyForm::SlopeEquality, D_TOL)
}

/// Full-control variant: choice of first-order condition and root tolerance.
///
/// Finds the feasible stretch(es) of the zero-profit locus (`0 <= m(d) <=
/// a_bar`; possibly disconnected when `d G = 1` has interior roots), locates
/// sign changes of the first-order residual by scan plus bisection, and
/// falls back to the cap-binding boundary when the residual is one-signed.
pub fn solve_bank_contract_opts(
    fam: &CashFlowFamily,
    theta: f64,
    lambda: f64,
    a_bar: f64,
    form: TangencyForm,
    tol: f64,
) -> Result<BankContractSolution> {
    let tech = FinancierTech::bank(lambda)?;
    fam.survivor(0.0, theta)?; // validates theta for the family
    if !(a_bar >= 0.0) || !a_bar.is_finite() {
        return Err(Error::Domain(format!(
            "collateral cap must be finite and nonnegative, got {a_bar}"
        )));
    }
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let d_max = fam.quantile(1.0 - 1e-10, theta)?;

    let g_at = |d: f64| fam.survivor_raw(d, theta);
    // r >= 0 iff zero profit is attainable with m <= a_bar at this face
    // value; s >= 0 iff it needs m >= 0. Feasible locus: both hold.
    let r = |d: f64| {
        let g = g_at(d);
        d * g + lambda * a_bar * (1.0 - g) - 1.0
    };
    let s = |d: f64| 1.0 - d * g_at(d);
    let feas = |d: f64| r(d).min(s(d));
    let m_zp = |d: f64| zero_profit_collateral(fam, theta, d, &tech);

    let grid: Vec<f64> = (1..=SCAN_POINTS)
        .map(|k| d_max * k as f64 / SCAN_POINTS as f64)
        .collect();

    // Financeability: sup_d of revenue at the cap must reach 1.
    let r_vals: Vec<f64> = grid.iter().map(|&d| r(d)).collect();
    let i_rmax = (0..SCAN_POINTS)
        .max_by(|&a, &b| r_vals[a].total_cmp(&r_vals[b]))
        .unwrap();
    let rmax = if r_vals[i_rmax] >= 0.0 {
        r_vals[i_rmax]
    } else {
        let lo = grid[i_rmax.saturating_sub(1)];
        let hi = grid[(i_rmax + 1).min(SCAN_POINTS - 1)];
        golden_max(r, lo, hi, tol).1
    };
    if rmax < 0.0 {
        return Ok(BankContractSolution::unfinanceable());
    }

    // Component boundaries are roots of r or s. Both functions are smooth
    // and individually wide, so scanning them separately catches feasible
    // stretches of min(r, s) thinner than the grid spacing.
    let s_vals: Vec<f64> = grid.iter().map(|&d| s(d)).collect();
    let mut cuts: Vec<f64> = vec![1e-12, d_max];
    for k in 1..SCAN_POINTS {
        if r_vals[k - 1] == 0.0 || r_vals[k - 1] * r_vals[k] < 0.0 {
            cuts.push(bisect(r, grid[k - 1], grid[k], 1e-13, 200)?);
        }
        if s_vals[k - 1] == 0.0 || s_vals[k - 1] * s_vals[k] < 0.0 {
            cuts.push(bisect(s, grid[k - 1], grid[k], 1e-13, 200)?);
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
        // Feasible set too thin for the grid (e.g. a_bar = 0 needs d G = 1
        // exactly): take the cap-binding roots of r directly.
        return cap_bound_solution(fam, theta, lambda, a_bar, &tech, &grid, &r_vals, i_rmax, tol, form);
    }

    let residual = |d: f64| match m_zp(d) {
        Ok(m) => signed_tangency(fam, theta, d, m, lambda, form),
        // Outside the locus domain; treated as a positive residual so the
        // scan never brackets across it.
        Err(_) => 1.0,
    };

    // Best candidate per component, then compare components by the
    // borrower's expected payoff (the screening objective V is only defined
    // up to a constant within each connected stretch).
    let mut best: Option<(f64, CandidateKind, f64)> = None; // (d, kind, payoff)
    for &(left, right) in &components {
        // Nudge inward so the locus map is defined at the probe points.
        let lo = left + 1e-12;
        let hi = right - 1e-12;
        if hi <= lo {
            continue;
        }

        let mut candidates: Vec<(f64, CandidateKind)> = Vec::new();
        let mut prev_pt = (lo, residual(lo));
        if prev_pt.1 > 0.0 {
            candidates.push((left, CandidateKind::LeftEdge));
        }
        for k in 1..=200 {
            let d = lo + (hi - lo) * k as f64 / 200.0;
            let rd = residual(d);
            // Downcrossings of the residual are minima of V; skip them.
            if prev_pt.1 <= 0.0 && rd > 0.0 {
                candidates.push((bisect(&residual, prev_pt.0, d, tol, 200)?, CandidateKind::Root));
            }
            prev_pt = (d, rd);
        }
        if prev_pt.1 < 0.0 {
            candidates.push((right, CandidateKind::RightEdge));
        }
        if candidates.is_empty() {
            // Residual identically zero to machine precision (flat case):
            // any point is first-order optimal; take the midpoint.
            candidates.push((0.5 * (lo + hi), CandidateKind::Root));
        }
        let chosen = if candidates.len() == 1 {
            candidates[0]
        } else {
            // Rank local optima by V, integrating V' from the left edge.
            *candidates
                .iter()
                .max_by(|a, b| {
                    let va = integrate(|x| -residual(x) / lambda, lo, a.0.max(lo), 64);
                    let vb = integrate(|x| -residual(x) / lambda, lo, b.0.max(lo), 64);
                    va.total_cmp(&vb)
                })
                .unwrap()
        };
        let m = m_zp(chosen.0.clamp(lo, hi)).unwrap_or(a_bar).clamp(0.0, a_bar);
        let payoff = borrower_utility(fam, theta, Contract { d: chosen.0, m });
        if best.is_none_or(|(_, _, u)| payoff > u) {
            best = Some((chosen.0, chosen.1, payoff));
        }
    }

    let (d_star, kind, _) = best.unwrap();
    if kind == CandidateKind::LeftEdge {
        // The cap binds at the optimum (ties at m = a_bar classify here).
        return cap_bound_solution(fam, theta, lambda, a_bar, &tech, &grid, &r_vals, i_rmax, tol, form);
    }
    if kind == CandidateKind::RightEdge {
        // Which constraint ends the component at this edge?
        let (branch, m_star) = if s(d_star).abs() <= r(d_star).abs() {
            (BankBranch::ZeroCollateral, 0.0)
        } else {
            (BankBranch::CollateralBound, a_bar)
        };
        let c = Contract { d: d_star, m: m_star };
        return Ok(BankContractSolution {
            contract: c,
            branch,
            utility: borrower_utility(fam, theta, c),
            default_prob: 1.0 - g_at(d_star),
            residuals: (
                tangency_residual(fam, theta, c, lambda, form),
                financier_profit(fam, theta, c, &tech).abs(),
            ),
        });
    }
    let m_star = m_zp(d_star).unwrap_or(0.0).clamp(0.0, a_bar);
    let c = Contract { d: d_star, m: m_star };
    Ok(BankContractSolution {
        contract: c,
        branch: BankBranch::Interior,
        utility: borrower_utility(fam, theta, c),
        default_prob: 1.0 - g_at(d_star),
        residuals: (
            tangency_residual(fam, theta, c, lambda, form),
            financier_profit(fam, theta, c, &tech).abs(),
        ),
    })
}

#[allow(clippy::too_many_arguments)]
fn cap_bound_solution(
    fam: &CashFlowFamily,
    theta: f64,
    lambda: f64,
    a_bar: f64,
    tech: &FinancierTech,
    grid: &[f64],
    r_vals: &[f64],
    i_rmax: usize,
    tol: f64,
    form: TangencyForm,
) -> Result<BankContractSolution> {
    let r = |d: f64| {
        let g = fam.survivor_raw(d, theta);
        d * g + lambda * a_bar * (1.0 - g) - 1.0
    };
    // Roots of the cap-revenue condition d G + lambda a_bar (1 - G) = 1;
    // the borrower payoff at m = a_bar is decreasing in d, so the smallest
    // root wins, but rank explicitly for robustness.
    let mut best: Option<(f64, f64)> = None;
    let mut prev = (grid[0], r_vals[0]);
    for (&d, &rd) in grid.iter().zip(r_vals).skip(1) {
        if prev.1 == 0.0 || prev.1 * rd < 0.0 {
            let root = bisect(r, prev.0, d, tol, 200)?;
            let u = borrower_utility(fam, theta, Contract { d: root, m: a_bar });
            if best.is_none_or(|(_, bu)| u > bu) {
                best = Some((root, u));
            }
        }
        prev = (d, rd);
    }
    let (d_b, utility) = match best {
        Some(x) => x,
        // r touches zero without crossing: use the revenue maximizer.
        None => {
            let lo = grid[i_rmax.saturating_sub(1)];
            let hi = grid[(i_rmax + 1).min(grid.len() - 1)];
            let (d_t, _) = golden_max(r, lo, hi, tol);
            (d_t, borrower_utility(fam, theta, Contract { d: d_t, m: a_bar }))
        }
    };
    let c = Contract { d: d_b, m: a_bar };
    Ok(BankContractSolution {
        contract: c,
        branch: BankBranch::CollateralBound,
        utility,
        default_prob: 1.0 - fam.survivor_raw(d_b, theta),
        residuals: (
            tangency_residual(fam, theta, c, lambda, form),
            financier_profit(fam, theta, c, tech).abs(),
        ),
    })
}

/// Type-indexed schedule of bank contracts with the participation cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct BankMenu {
    pub thetas: Vec<f64>,
    pub solutions: Vec<BankContractSolution>,
    /// Lowest type with nonnegative payoff (`theta_hi` if nobody
    /// participates).
    pub ir_cutoff: f64,
    pub lambda: f64,
    pub a_bar: f64,
}

impl BankMenu {
    /// Contract at an off-grid type by linear interpolation of the menu
    /// between financed nodes; `None` outside the financed range.
    pub fn interp_contract(&self, theta: f64) -> Option<Contract> {
        let n = self.thetas.len();
        if theta < self.thetas[0] || theta > self.thetas[n - 1] {
            return None;
        }
        let step = (self.thetas[n - 1] - self.thetas[0]) / (n - 1) as f64;
        let i = (((theta - self.thetas[0]) / step) as usize).min(n - 2);
        let (a, b) = (&self.solutions[i], &self.solutions[i + 1]);
        if !a.financed() || !b.financed() {
            return None;
        }
        let w = (theta - self.thetas[i]) / step;
        Some(Contract {
            d: (1.0 - w) * a.contract.d + w * b.contract.d,
            m: (1.0 - w) * a.contract.m + w * b.contract.m,
        })
    }
}

/// Solve the menu on a uniform type grid and locate the participation
/// cutoff by bisection on the payoff.
pub fn bank_menu(
    fam: &CashFlowFamily,
    dist: &TypeDistribution,
    lambda: f64,
    a_bar: f64,
    grid_size: usize,
) -> Result<BankMenu> {
    if grid_size < 2 {
        return Err(Error::Domain(format!(
            "menu grid needs at least 2 nodes, got {grid_size}"
        )));
    }
    let (lo, hi) = (dist.support.theta_lo, dist.support.theta_hi);
    let thetas: Vec<f64> = (0..grid_size)
        .map(|k| lo + (hi - lo) * k as f64 / (grid_size - 1) as f64)
        .collect();
    let solutions: Vec<BankContractSolution> = thetas
        .iter()
        .map(|&t| solve_bank_contract(fam, t, lambda, a_bar))
        .collect::<Result<_>>()?;
    if !solutions.iter().any(|s| s.financed()) {
        return Err(Error::AllUnfinanceable);
    }

    let u_at = |t: f64| -> Result<f64> { Ok(solve_bank_contract(fam, t, lambda, a_bar)?.utility) };
    let ir_cutoff = if solutions[0].utility > 0.0 {
        lo
    } else {
        match solutions.iter().position(|s| s.utility > 0.0) {
            Some(i) => {
                // 80 halvings between the last nonpositive node and the
                // first positive one.
                let (mut a, mut b) = (thetas[i - 1], thetas[i]);
                for _ in 0..80 {
                    let mid = 0.5 * (a + b);
                    if u_at(mid)? > 0.0 {
                        b = mid;
                    } else {
                        a = mid;
                    }
                }
                0.5 * (a + b)
            }
            // Financed types exist but none gains: empty participation set.
            None => hi,
        }
    };
    Ok(BankMenu {
        thetas,
        solutions,
        ir_cutoff,
        lambda,
        a_bar,
    })
}

/// Which primitive a comparative static perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BankParam {
    Lambda,
    ABar,
}

/// Finite-difference response of the per-type solution to a parameter bump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BankComparativeStatic {
    pub base: BankContractSolution,
    pub perturbed: BankContractSolution,
    pub d_diff: f64,
    pub m_diff: f64,
    pub default_prob_diff: f64,
    pub utility_diff: f64,
    /// The bump flipped the solution branch; signs are then unreliable.
    pub branch_changed: bool,
}

/// Upward parameter bump of size `delta` (default 1e-3) at one type.
pub fn bank_comparative_static(
    fam: &CashFlowFamily,
    theta: f64,
    lambda: f64,
    a_bar: f64,
    param: BankParam,
    delta: f64,
) -> Result<BankComparativeStatic> {
    if !(delta > 0.0) {
        return Err(Error::Domain(format!("perturbation must be positive, got {delta}")));
    }
    let (lam2, a2) = match param {
        BankParam::Lambda => {
            if lambda + delta > 1.0 {
                return Err(Error::Domain(format!(
                    "lambda + delta = {} exceeds 1",
                    lambda + delta
                )));
            }
            (lambda + delta, a_bar)
        }
        BankParam::ABar => (lambda, a_bar + delta),
    };
    let base = solve_bank_contract(fam, theta, lambda, a_bar)?;
    let perturbed = solve_bank_contract(fam, theta, lam2, a2)?;
    Ok(BankComparativeStatic {
        base,
        perturbed,
        d_diff: perturbed.contract.d - base.contract.d,
        m_diff: perturbed.contract.m - base.contract.m,
        default_prob_diff: perturbed.default_prob - base.default_prob,
        utility_diff: perturbed.utility - base.utility,
        branch_changed: perturbed.branch != base.branch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{TypeDistribution, TypeSpace};
    use approx::assert_abs_diff_eq;

    fn expo() -> CashFlowFamily {
        CashFlowFamily::Exponential
    }

    #[test]
    fn exponential_interior_closed_form() {
        // The first-order system reduces to d = 1 + (1-lambda) theta (1 - e^(-d/theta))
        // and lambda m = d - (1-lambda) theta.
        let sol = solve_bank_contract(&expo(), 2.0, 0.9, 2.0).unwrap();
        assert_eq!(sol.branch, BankBranch::Interior);
        let mut d = 1.0;
        for _ in 0..200 {
            d = 1.0 + 0.1 * 2.0 * (1.0 - (-d / 2.0f64).exp());
        }
        let m = (d - 0.1 * 2.0) / 0.9;
        assert_abs_diff_eq!(sol.contract.d, d, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.contract.m, m, epsilon = 1e-9);
        assert!(sol.residuals.0 < RESIDUAL_TOL);
        assert!(sol.residuals.1 < RESIDUAL_TOL);
        assert_abs_diff_eq!(sol.default_prob, 1.0 - (-d / 2.0f64).exp(), epsilon = 1e-9);
    }

    #[test]
    fn matches_published_rounding() {
        let sol = solve_bank_contract(&expo(), 2.0, 0.9, 2.0).unwrap();
        assert_abs_diff_eq!(sol.contract.d, 1.08369, epsilon = 5e-5);
        assert_abs_diff_eq!(sol.contract.m, 0.98188, epsilon = 5e-5);
    }

    #[test]
    fn lambda_one_posts_exact_face_value() {
        // At lambda = 1 the slope-equality point has m(d) = d, which under
        // zero profit forces d = 1 for every family.
        let sol = solve_bank_contract(&expo(), 2.0, 1.0, 2.0).unwrap();
        assert_abs_diff_eq!(sol.contract.d, 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(sol.contract.m, 1.0, epsilon = 1e-9);
        assert!(sol.residuals.1 < RESIDUAL_TOL);
        let logn = CashFlowFamily::lognormal(0.5).unwrap();
        let sol2 = solve_bank_contract(&logn, 0.4, 1.0, 3.0).unwrap();
        assert_abs_diff_eq!(sol2.contract.d, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn collateral_bound_branch() {
        // Cap below the interior optimum's collateral but financeable.
        let sol = solve_bank_contract(&expo(), 2.0, 0.9, 0.8).unwrap();
        assert_eq!(sol.branch, BankBranch::CollateralBound);
        assert_eq!(sol.contract.m, 0.8);
        assert!(sol.residuals.1 < RESIDUAL_TOL);
        // Zero-profit check at the cap.
        let g = (-sol.contract.d / 2.0f64).exp();
        assert_abs_diff_eq!(
            sol.contract.d * g + 0.9 * 0.8 * (1.0 - g),
            1.0,
            epsilon = 1e-9
        );
    }

    #[test]
    fn unfinanceable_when_revenue_cannot_reach_one() {
        let sol = solve_bank_contract(&expo(), 0.2, 0.9, 0.1).unwrap();
        assert_eq!(sol.branch, BankBranch::Unfinanceable);
        assert!(sol.utility.is_infinite());
        // theta = 2 with a tiny cap is also out of reach.
        let sol2 = solve_bank_contract(&expo(), 2.0, 0.9, 0.3).unwrap();
        assert_eq!(sol2.branch, BankBranch::Unfinanceable);
    }

    #[test]
    fn zero_cap_needs_exact_break_even() {
        // a_bar = 0: feasible only where d G = 1; exponential theta = 3 has
        // max d G = 3/e > 1, so roots exist and the smaller one wins.
        let sol = solve_bank_contract(&expo(), 3.0, 0.9, 0.0).unwrap();
        assert!(sol.financed());
        assert_eq!(sol.contract.m, 0.0);
        assert!(sol.residuals.1 < 1e-8);
        assert!(sol.contract.d < 3.0);
        // theta = 2: max d G = 2/e < 1, nothing works without collateral.
        let none = solve_bank_contract(&expo(), 2.0, 0.9, 0.0).unwrap();
        assert_eq!(none.branch, BankBranch::Unfinanceable);
    }

    #[test]
    fn face_value_only_form_hits_cap_on_baseline() {
        // The diagnostic first-order condition d g = (1-lambda) G puts the
        // exponential optimum at d = (1-lambda) theta, whose zero-profit
        // collateral far exceeds the cap; the solve lands on the boundary.
        let sol =
            solve_bank_contract_opts(&expo(), 2.0, 0.9, 2.0, TangencyForm::FaceValueOnly, D_TOL)
                .unwrap();
        assert_eq!(sol.branch, BankBranch::CollateralBound);
        assert_eq!(sol.contract.m, 2.0);
        // With a loose cap it is interior at d = (1-lambda) theta.
        let loose =
            solve_bank_contract_opts(&expo(), 2.0, 0.9, 20.0, TangencyForm::FaceValueOnly, D_TOL)
                .unwrap();
        assert_eq!(loose.branch, BankBranch::Interior);
        assert_abs_diff_eq!(loose.contract.d, 0.2, epsilon = 1e-8);
    }

    #[test]
    fn menu_monotone_and_cutoff_pinned() {
        let ts = TypeSpace::new(1.0, 3.0).unwrap();
        let dist = TypeDistribution::uniform(ts);
        let menu = bank_menu(&expo(), &dist, 0.9, 2.0, 101).unwrap();
        let fin: Vec<_> = menu.solutions.iter().filter(|s| s.financed()).collect();
        assert!(fin.len() == menu.solutions.len());
        for w in fin.windows(2) {
            assert!(w[1].contract.m <= w[0].contract.m + 1e-9);
            assert!(w[1].default_prob <= w[0].default_prob + 1e-9);
            assert!(w[1].utility >= w[0].utility - 1e-9);
        }
        let at_cut = solve_bank_contract(&expo(), menu.ir_cutoff, 0.9, 2.0).unwrap();
        assert!(at_cut.utility.abs() < 1e-8);
        assert!(menu.ir_cutoff > 1.0 && menu.ir_cutoff < 2.0);
    }

    #[test]
    fn menu_interpolation_stays_near_nodes() {
        let ts = TypeSpace::new(1.0, 3.0).unwrap();
        let dist = TypeDistribution::uniform(ts);
        let menu = bank_menu(&expo(), &dist, 0.9, 2.0, 401).unwrap();
        let c = menu.interp_contract(2.0).unwrap();
        let exact = solve_bank_contract(&expo(), 2.0, 0.9, 2.0).unwrap().contract;
        assert_abs_diff_eq!(c.d, exact.d, epsilon = 1e-5);
        assert_abs_diff_eq!(c.m, exact.m, epsilon = 1e-5);
    }

    #[test]
    fn comparative_statics_signs() {
        // Interior responses to the liquidation efficiency: all three fall.
        // (The collateral response changes sign near lambda = 1; the clean
        // region is moderate lambda.)
        let cs = bank_comparative_static(&expo(), 2.0, 0.5, 2.0, BankParam::Lambda, 1e-3).unwrap();
        assert!(!cs.branch_changed);
        assert!(cs.d_diff < 0.0 && cs.m_diff < 0.0 && cs.default_prob_diff < 0.0);
        assert!(cs.utility_diff > 0.0);
        // Interior cap bump: nothing moves.
        let ca = bank_comparative_static(&expo(), 2.0, 0.5, 2.0, BankParam::ABar, 1e-3).unwrap();
        assert!(ca.d_diff.abs() < 1e-6 && ca.m_diff.abs() < 1e-6);
        // Binding cap: more collateral capacity lowers the face value.
        let cb = bank_comparative_static(&expo(), 2.0, 0.9, 0.8, BankParam::ABar, 1e-3).unwrap();
        assert!(cb.d_diff < 0.0);
        // lambda already at the boundary.
        assert!(bank_comparative_static(&expo(), 2.0, 1.0, 2.0, BankParam::Lambda, 1e-3).is_err());
    }
}
