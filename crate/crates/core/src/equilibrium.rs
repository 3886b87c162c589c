//! Self-selection between per-type bank contracts and the pooled bond: the
//! utility gap between the two options, the inner cutoff map, the
//! conjectured-pool fixed point, and corner-regime classification.

use crate::bank::{bank_menu, solve_bank_contract_opts, BankMenu, TangencyForm, D_TOL, DEFAULT_GRID};
use crate::contracts::borrower_utility;
use crate::distributions::{CashFlowFamily, TypeDistribution};
use crate::error::{Error, Result};
use crate::market::{solve_market_contract_tol, solve_market_only, MarketContract};

/// Primitives plus solver knobs for one equilibrium computation.
#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumConfig {
    pub fam: CashFlowFamily,
    pub dist: TypeDistribution,
    pub lambda_b: f64,
    pub lambda_m: f64,
    pub a_bar: f64,
    /// Root tolerance for the per-type and pooled solves.
    pub tol: f64,
    /// Nodes in the bank menu grid.
    pub menu_grid: usize,
}

impl EquilibriumConfig {
    pub fn new(
        fam: CashFlowFamily,
        dist: TypeDistribution,
        lambda_b: f64,
        lambda_m: f64,
        a_bar: f64,
    ) -> Result<Self> {
        if !(lambda_b > 0.0 && lambda_b <= 1.0) {
            return Err(Error::Domain(format!(
                "bank liquidation efficiency must lie in (0, 1], got {lambda_b}"
            )));
        }
        if !(lambda_m > 0.0 && lambda_m < lambda_b) {
            return Err(Error::Domain(format!(
                "market liquidation efficiency must lie in (0, lambda_b), got {lambda_m} \
                 with lambda_b = {lambda_b}"
            )));
        }
        if !(a_bar >= 0.0) || !a_bar.is_finite() {
            return Err(Error::Domain(format!(
                "collateral cap must be finite and nonnegative, got {a_bar}"
            )));
        }
        Ok(Self {
            fam,
            dist,
            lambda_b,
            lambda_m,
            a_bar,
            tol: D_TOL,
            menu_grid: DEFAULT_GRID,
        })
    }

    /// Liquidation gap between the two financiers.
    pub fn delta(&self) -> f64 {
        self.lambda_b - self.lambda_m
    }
}

/// Who serves whom in equilibrium.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// Bank serves `[ir_cutoff, star_cutoff)`, market `[star_cutoff, hi]`.
    Coexistence,
    AllBank,
    AllMarket,
    NoFinance,
}

/// Solved equilibrium object.
#[derive(Debug, Clone, PartialEq)]
pub struct Equilibrium {
    pub regime: Regime,
    /// Participation cutoff: lowest financed type.
    pub ir_cutoff: f64,
    /// Self-selection cutoff between bank and market.
    pub star_cutoff: f64,
    /// Full-support bank menu (present whenever the bank finances anyone).
    pub bank_menu: Option<BankMenu>,
    /// Pooled bond on `[star_cutoff, hi]` (present when the market is active).
    pub market_contract: Option<MarketContract>,
    /// Utility gap at the financed endpoints given the solved conjecture:
    /// `(gap(ir_cutoff), gap(hi))`.
    pub gap_endpoints: (f64, f64),
}

fn bank_utility(cfg: &EquilibriumConfig, theta: f64) -> Result<f64> {
    Ok(solve_bank_contract_opts(
        &cfg.fam,
        theta,
        cfg.lambda_b,
        cfg.a_bar,
        TangencyForm::SlopeEquality,
        cfg.tol,
    )?
    .utility)
}

fn gap_with_market(cfg: &EquilibriumConfig, theta: f64, mc: &MarketContract) -> Result<f64> {
    let ub = bank_utility(cfg, theta)?;
    if !mc.feasible() {
        return Ok(if ub.is_finite() { f64::INFINITY } else { f64::NAN });
    }
    if !ub.is_finite() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(ub - borrower_utility(&cfg.fam, theta, mc.contract))
}

fn market_on(cfg: &EquilibriumConfig, vartheta: f64) -> Result<MarketContract> {
    solve_market_contract_tol(
        &cfg.fam,
        &cfg.dist,
        (vartheta, cfg.dist.support.theta_hi),
        cfg.lambda_m,
        cfg.a_bar,
        cfg.tol,
    )
}

/// Difference between a type's bank payoff and its payoff under the pooled
/// bond priced on `[vartheta, hi]`.
///
/// `-inf` when the bank cannot finance the type, `+inf` when the pooled
/// side is infeasible, `NaN` when both fail.
pub fn utility_gap(cfg: &EquilibriumConfig, theta: f64, vartheta: f64) -> Result<f64> {
    let mc = market_on(cfg, vartheta)?;
    gap_with_market(cfg, theta, &mc)
}

/// Root report for the inner cutoff map at one conjecture.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InnerCutoff {
    /// Indifferent type, when the gap brackets zero on `[ir_cutoff, hi]`.
    pub root: Option<f64>,
    /// Gap at the participation cutoff.
    pub gap_lo: f64,
    /// Gap at the top type.
    pub gap_hi: f64,
}

/// Lowest type whose bank contract clears the participation constraint.
pub fn bank_ir_cutoff(cfg: &EquilibriumConfig) -> Result<f64> {
    let (lo, hi) = (cfg.dist.support.theta_lo, cfg.dist.support.theta_hi);
    if bank_utility(cfg, lo)? > 0.0 {
        return Ok(lo);
    }
    const N: usize = 200;
    let mut a = lo;
    let mut found = None;
    for k in 1..=N {
        let t = lo + (hi - lo) * k as f64 / N as f64;
        if bank_utility(cfg, t)? > 0.0 {
            found = Some(t);
            break;
        }
        a = t;
    }
    let Some(mut b) = found else {
        return Err(Error::AllUnfinanceable);
    };
    for _ in 0..80 {
        let mid = 0.5 * (a + b);
        if bank_utility(cfg, mid)? > 0.0 {
            b = mid;
        } else {
            a = mid;
        }
    }
    Ok(0.5 * (a + b))
}

/// Indifferent type for a conjectured pool lower edge, by bisection of the
/// utility gap over the financed range; `root = None` with endpoint signs
/// when the gap does not change sign (corner conjectures).
pub fn inner_cutoff(cfg: &EquilibriumConfig, vartheta: f64) -> Result<InnerCutoff> {
    let ir = bank_ir_cutoff(cfg)?;
    let mc = market_on(cfg, vartheta)?;
    inner_cutoff_given(cfg, ir, &mc)
}

fn inner_cutoff_given(cfg: &EquilibriumConfig, ir: f64, mc: &MarketContract) -> Result<InnerCutoff> {
    let hi = cfg.dist.support.theta_hi;
    let gap_lo = gap_with_market(cfg, ir, mc)?;
    let gap_hi = gap_with_market(cfg, hi, mc)?;
    if !(gap_lo <= 0.0 && gap_hi >= 0.0) {
        return Ok(InnerCutoff { root: None, gap_lo, gap_hi });
    }
    let (mut a, mut b) = (ir, hi);
    for _ in 0..100 {
        let mid = 0.5 * (a + b);
        if gap_with_market(cfg, mid, mc)? >= 0.0 {
            b = mid;
        } else {
            a = mid;
        }
        if b - a < 1e-14 {
            break;
        }
    }
    Ok(InnerCutoff {
        root: Some(0.5 * (a + b)),
        gap_lo,
        gap_hi,
    })
}

/// Fixed-point residual of the conjectured pool edge: `theta*(vartheta) -
/// vartheta`, with the inner cutoff clamped to the financed range when the
/// gap is one-signed.
pub fn gamma(cfg: &EquilibriumConfig, vartheta: f64) -> Result<f64> {
    let ir = bank_ir_cutoff(cfg)?;
    let mc = market_on(cfg, vartheta)?;
    Ok(gamma_given(cfg, ir, vartheta, &mc)? .0)
}

fn gamma_given(
    cfg: &EquilibriumConfig,
    ir: f64,
    vartheta: f64,
    mc: &MarketContract,
) -> Result<(f64, InnerCutoff)> {
    let hi = cfg.dist.support.theta_hi;
    let inner = inner_cutoff_given(cfg, ir, mc)?;
    let star = match inner.root {
        Some(t) => t,
        None if inner.gap_lo > 0.0 => ir, // bank preferred throughout
        None => hi,                       // market preferred even at the top
    };
    Ok((star - vartheta, inner))
}

/// Solve for the equilibrium regime and cutoffs.
///
/// Bisects the fixed-point residual `gamma` over conjectured pool edges in
/// `[ir_cutoff, hi]`; classifies corners from the endpoint signs of the
/// utility gap when no interior fixed point exists. Ties resolve to the
/// bank.
pub fn solve_equilibrium(cfg: &EquilibriumConfig) -> Result<Equilibrium> {
    let hi = cfg.dist.support.theta_hi;
    let menu = match bank_menu(&cfg.fam, &cfg.dist, cfg.lambda_b, cfg.a_bar, cfg.menu_grid) {
        Ok(m) => Some(m),
        Err(Error::AllUnfinanceable) => None,
        Err(e) => return Err(e),
    };
    let bank_active = menu.as_ref().is_some_and(|m| m.ir_cutoff < hi);
    if !bank_active {
        // Bank side empty: either the market carries everyone or nobody is
        // financed at all.
        return match solve_market_only(&cfg.fam, &cfg.dist, cfg.lambda_m, cfg.a_bar) {
            Ok(mo) => Ok(Equilibrium {
                regime: Regime::AllMarket,
                ir_cutoff: mo.participation_cutoff,
                star_cutoff: mo.participation_cutoff,
                bank_menu: menu,
                market_contract: Some(mo.contract),
                gap_endpoints: (f64::NEG_INFINITY, f64::NEG_INFINITY),
            }),
            Err(Error::MarketUnravels) => Ok(Equilibrium {
                regime: Regime::NoFinance,
                ir_cutoff: hi,
                star_cutoff: hi,
                bank_menu: menu,
                market_contract: None,
                gap_endpoints: (f64::NAN, f64::NAN),
            }),
            Err(e) => Err(e),
        };
    }
    let ir = menu.as_ref().unwrap().ir_cutoff;

    let gamma_at = |v: f64| -> Result<(f64, InnerCutoff)> {
        let mc = market_on(cfg, v)?;
        gamma_given(cfg, ir, v, &mc)
    };

    let (g_lo, inner_lo) = gamma_at(ir)?;
    let (g_hi, _) = gamma_at(hi)?;
    // gamma(ir) <= 0 means even the most inclusive pool conjecture leaves
    // the marginal type preferring the bank; with the gap increasing in
    // theta no conjecture attracts anyone.
    if g_lo <= 0.0 {
        if inner_lo.gap_lo < 0.0 && inner_lo.gap_hi < 0.0 {
            // Market preferred by every financed type at the widest pool.
            let mc = market_on(cfg, ir)?;
            return Ok(Equilibrium {
                regime: Regime::AllMarket,
                ir_cutoff: ir,
                star_cutoff: ir,
                bank_menu: menu,
                market_contract: Some(mc),
                gap_endpoints: (inner_lo.gap_lo, inner_lo.gap_hi),
            });
        }
        let mc = market_on(cfg, hi)?;
        let gap_lo = gap_with_market(cfg, ir, &mc)?;
        let gap_hi = gap_with_market(cfg, hi, &mc)?;
        return Ok(Equilibrium {
            regime: Regime::AllBank,
            ir_cutoff: ir,
            star_cutoff: hi,
            bank_menu: menu,
            market_contract: None,
            gap_endpoints: (gap_lo, gap_hi),
        });
    }
    if g_hi >= 0.0 {
        // The top type weakly prefers a degenerate own-type pool: with a
        // positive liquidation gap this is a tie at most; resolve to bank.
        let mc = market_on(cfg, hi)?;
        let gap_lo = gap_with_market(cfg, ir, &mc)?;
        let gap_hi = gap_with_market(cfg, hi, &mc)?;
        let regime = if gap_hi <= 0.0 { Regime::AllMarket } else { Regime::AllBank };
        return Ok(Equilibrium {
            regime,
            ir_cutoff: ir,
            star_cutoff: hi,
            bank_menu: menu,
            market_contract: if regime == Regime::AllMarket { Some(mc) } else { None },
            gap_endpoints: (gap_lo, gap_hi),
        });
    }

    let (mut a, mut b) = (ir, hi);
    let mut converged = false;
    for _ in 0..200 {
        let mid = 0.5 * (a + b);
        let (g, _) = gamma_at(mid)?;
        if g > 0.0 {
            a = mid;
        } else {
            b = mid;
        }
        if b - a < 1e-13 {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence(200));
    }
    let star = 0.5 * (a + b);
    let mc = market_on(cfg, star)?;
    let gap_lo = gap_with_market(cfg, ir, &mc)?;
    let gap_hi = gap_with_market(cfg, hi, &mc)?;
    Ok(Equilibrium {
        regime: Regime::Coexistence,
        ir_cutoff: ir,
        star_cutoff: star,
        bank_menu: menu,
        market_contract: Some(mc),
        gap_endpoints: (gap_lo, gap_hi),
    })
}

/// Which primitive a cutoff comparative static perturbs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CutoffParam {
    /// Liquidation gap; implemented as `lambda_m` down by `step` (or
    /// `lambda_b` up when `move_lambda_b` is set).
    Delta,
    ABar,
}

/// Response of the self-selection cutoff to a parameter bump.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffResponse {
    pub base: Equilibrium,
    pub perturbed: Equilibrium,
    /// `star(perturbed) - star(base)`; `NaN` unless both solves coexist.
    pub star_diff: f64,
    pub regime_changed: bool,
}

/// Bump one parameter and report the movement of the cutoff.
pub fn cutoff_comparative_statics(
    cfg: &EquilibriumConfig,
    param: CutoffParam,
    step: f64,
    move_lambda_b: bool,
) -> Result<CutoffResponse> {
    if !(step > 0.0) {
        return Err(Error::Domain(format!("perturbation must be positive, got {step}")));
    }
    let mut pert = cfg.clone();
    match param {
        CutoffParam::Delta => {
            if move_lambda_b {
                pert.lambda_b += step;
                if pert.lambda_b > 1.0 {
                    return Err(Error::Domain(format!(
                        "lambda_b + step = {} exceeds 1",
                        pert.lambda_b
                    )));
                }
            } else {
                pert.lambda_m -= step;
                if pert.lambda_m <= 0.0 {
                    return Err(Error::Domain(format!(
                        "lambda_m - step = {} is not positive",
                        pert.lambda_m
                    )));
                }
            }
        }
        CutoffParam::ABar => pert.a_bar += step,
    }
    let base = solve_equilibrium(cfg)?;
    let perturbed = solve_equilibrium(&pert)?;
    let regime_changed = base.regime != perturbed.regime;
    let star_diff = if base.regime == Regime::Coexistence && !regime_changed {
        perturbed.star_cutoff - base.star_cutoff
    } else {
        f64::NAN
    };
    Ok(CutoffResponse {
        base,
        perturbed,
        star_diff,
        regime_changed,
    })
}
