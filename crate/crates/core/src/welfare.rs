//! Welfare accounting: per-regime aggregates, the three-term decomposition
//! of coexistence versus bank-only, the bank-versus-market-only comparison
//! with its sufficient condition, the expected-loss wedge, and liquidation
//! efficiency sensitivities.

use crate::bank::{bank_menu, BankMenu};
use crate::contracts::{borrower_utility, financier_profit, Contract, FinancierTech};
use crate::distributions::TypeDistribution;
use crate::equilibrium::{solve_equilibrium, Equilibrium, EquilibriumConfig, Regime};
use crate::error::{Error, Result};
use crate::market::{solve_market_contract_tol, solve_market_only, MarketOnlyRegime};
use crate::numerics::gauss_legendre;

/// Quadrature layout for welfare integrals: composite panels so that the
/// piecewise-linear menu interpolation is integrated accurately.
const PANELS: usize = 256;
const PANEL_ORDER: usize = 16;

/// Regime label for a welfare report.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WelfareRegime {
    BankOnly,
    MarketOnly,
    Coexistence,
}

/// Aggregate welfare for one regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WelfareReport {
    pub regime: WelfareRegime,
    /// `integral of (mu(theta) - 1) dF` over the financed set.
    pub gross_surplus: f64,
    /// `integral of (1 - lambda) m q dF` over the financed set.
    pub deadweight: f64,
    /// `gross_surplus - deadweight`.
    pub total: f64,
    /// Probability mass of financed types.
    pub financed_measure: f64,
    /// Diagnostic: `integral of (U + Pi) dF`, which coincides with `total`
    /// analytically but is computed from the contract payoffs directly.
    pub private_surplus: f64,
}

impl WelfareReport {
    /// All-zero report for a regime that finances nobody.
    pub fn empty(regime: WelfareRegime) -> Self {
        Self {
            regime,
            gross_surplus: 0.0,
            deadweight: 0.0,
            total: 0.0,
            financed_measure: 0.0,
            private_surplus: 0.0,
        }
    }
}

/// `integral of f(theta) dF(theta)` over `[a, b]` by composite quadrature.
fn integrate_df<F: Fn(f64) -> f64>(dist: &TypeDistribution, a: f64, b: f64, f: F) -> f64 {
    if b <= a {
        return 0.0;
    }
    let (nodes, weights) = gauss_legendre(PANEL_ORDER);
    let step = (b - a) / PANELS as f64;
    let mut acc = 0.0;
    for p in 0..PANELS {
        let lo = a + step * p as f64;
        let mid = lo + 0.5 * step;
        let half = 0.5 * step;
        for (x, w) in nodes.iter().zip(&weights) {
            let theta = mid + half * x;
            acc += w * f(theta) * dist.pdf(theta);
        }
    }
    acc * 0.5 * step
}

struct Segment<'a> {
    lo: f64,
    hi: f64,
    lambda: f64,
    contract_at: Box<dyn Fn(f64) -> Option<Contract> + 'a>,
}

fn report_from_segments(
    cfg: &EquilibriumConfig,
    regime: WelfareRegime,
    segments: &[Segment],
) -> WelfareReport {
    let mut gross = 0.0;
    let mut dead = 0.0;
    let mut mass = 0.0;
    let mut private = 0.0;
    for seg in segments {
        gross += integrate_df(&cfg.dist, seg.lo, seg.hi, |t| cfg.fam.mean(t) - 1.0);
        dead += integrate_df(&cfg.dist, seg.lo, seg.hi, |t| match (seg.contract_at)(t) {
            Some(c) => {
                let q = 1.0 - cfg.fam.survivor_raw(c.d, t);
                (1.0 - seg.lambda) * c.m * q
            }
            None => 0.0,
        });
        mass += integrate_df(&cfg.dist, seg.lo, seg.hi, |_| 1.0);
        let tech = FinancierTech {
            lambda: seg.lambda,
            side: crate::contracts::FinancierSide::Bank,
            cash_recovery: 0.0,
        };
        private += integrate_df(&cfg.dist, seg.lo, seg.hi, |t| match (seg.contract_at)(t) {
            Some(c) => {
                borrower_utility(&cfg.fam, t, c) + financier_profit(&cfg.fam, t, c, &tech)
            }
            None => 0.0,
        });
    }
    WelfareReport {
        regime,
        gross_surplus: gross,
        deadweight: dead,
        total: gross - dead,
        financed_measure: mass,
        private_surplus: private,
    }
}

/// Welfare of the bank-only regime given its solved menu.
pub fn bank_welfare(cfg: &EquilibriumConfig, menu: &BankMenu) -> WelfareReport {
    let hi = cfg.dist.support.theta_hi;
    if menu.ir_cutoff >= hi {
        return WelfareReport::empty(WelfareRegime::BankOnly);
    }
    report_from_segments(
        cfg,
        WelfareRegime::BankOnly,
        &[Segment {
            lo: menu.ir_cutoff,
            hi,
            lambda: cfg.lambda_b,
            contract_at: Box::new(|t| menu.interp_contract(t)),
        }],
    )
}

/// Welfare of the market-only regime given its solved participation pool.
pub fn market_welfare(cfg: &EquilibriumConfig, mo: &MarketOnlyRegime) -> WelfareReport {
    let hi = cfg.dist.support.theta_hi;
    let c = mo.contract.contract;
    report_from_segments(
        cfg,
        WelfareRegime::MarketOnly,
        &[Segment {
            lo: mo.participation_cutoff,
            hi,
            lambda: cfg.lambda_m,
            contract_at: Box::new(move |_| Some(c)),
        }],
    )
}

/// Welfare of the solved equilibrium (bank segment plus market segment).
pub fn coexistence_welfare(cfg: &EquilibriumConfig, eq: &Equilibrium) -> WelfareReport {
    let hi = cfg.dist.support.theta_hi;
    let mut segments: Vec<Segment> = Vec::new();
    match eq.regime {
        Regime::NoFinance => return WelfareReport::empty(WelfareRegime::Coexistence),
        Regime::AllMarket => {
            if let Some(mc) = &eq.market_contract {
                let c = mc.contract;
                segments.push(Segment {
                    lo: eq.star_cutoff,
                    hi,
                    lambda: cfg.lambda_m,
                    contract_at: Box::new(move |_| Some(c)),
                });
            }
        }
        Regime::AllBank => {
            if let Some(menu) = &eq.bank_menu {
                segments.push(Segment {
                    lo: eq.ir_cutoff,
                    hi,
                    lambda: cfg.lambda_b,
                    contract_at: Box::new(|t| menu.interp_contract(t)),
                });
            }
        }
        Regime::Coexistence => {
            let menu = eq.bank_menu.as_ref().expect("coexistence carries a bank menu");
            let mc = eq.market_contract.expect("coexistence carries a market contract");
            let c = mc.contract;
            segments.push(Segment {
                lo: eq.ir_cutoff,
                hi: eq.star_cutoff,
                lambda: cfg.lambda_b,
                contract_at: Box::new(|t| menu.interp_contract(t)),
            });
            segments.push(Segment {
                lo: eq.star_cutoff,
                hi,
                lambda: cfg.lambda_m,
                contract_at: Box::new(move |_| Some(c)),
            });
        }
    }
    report_from_segments(cfg, WelfareRegime::Coexistence, &segments)
}

/// Solve whatever the regime needs and report its welfare.
pub fn regime_welfare(cfg: &EquilibriumConfig, regime: WelfareRegime) -> Result<WelfareReport> {
    match regime {
        WelfareRegime::BankOnly => {
            match bank_menu(&cfg.fam, &cfg.dist, cfg.lambda_b, cfg.a_bar, cfg.menu_grid) {
                Ok(menu) => Ok(bank_welfare(cfg, &menu)),
                Err(Error::AllUnfinanceable) => Ok(WelfareReport::empty(WelfareRegime::BankOnly)),
                Err(e) => Err(e),
            }
        }
        WelfareRegime::MarketOnly => {
            match solve_market_only(&cfg.fam, &cfg.dist, cfg.lambda_m, cfg.a_bar) {
                Ok(mo) => Ok(market_welfare(cfg, &mo)),
                Err(Error::MarketUnravels) => Ok(WelfareReport::empty(WelfareRegime::MarketOnly)),
                Err(e) => Err(e),
            }
        }
        WelfareRegime::Coexistence => {
            let eq = solve_equilibrium(cfg)?;
            Ok(coexistence_welfare(cfg, &eq))
        }
    }
}

/// Three-term split of the coexistence-versus-bank-only welfare difference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Decomposition {
    /// Deadweight change on the market-served set from switching those
    /// types' liquidation technology and contract.
    pub liquidation_penalty: f64,
    /// Residual: utility-relevant contract changes on the market-served
    /// set beyond the liquidation switch. Near zero here because the bank
    /// menu is already type-by-type optimal; reported, not asserted.
    pub screening_relief: f64,
    /// Signed surplus over the symmetric difference of financed sets.
    pub extensive_margin: f64,
    /// `W(coexistence) - W(bank-only)`.
    pub total_diff: f64,
}

/// Decompose `W(coexistence) - W(bank-only)` given both solved regimes.
pub fn decompose(
    cfg: &EquilibriumConfig,
    menu_b: &BankMenu,
    report_b: &WelfareReport,
    eq: &Equilibrium,
    report_bm: &WelfareReport,
) -> Decomposition {
    let hi = cfg.dist.support.theta_hi;
    let total_diff = report_bm.total - report_b.total;
    // Market-served set H under coexistence.
    let (h_lo, h_hi, mc) = match (eq.regime, eq.market_contract) {
        (Regime::Coexistence, Some(mc)) => (eq.star_cutoff, hi, Some(mc)),
        (Regime::AllMarket, Some(mc)) => (eq.star_cutoff, hi, Some(mc)),
        _ => (hi, hi, None),
    };
    let liquidation_penalty = match mc {
        Some(mc) => integrate_df(&cfg.dist, h_lo, h_hi, |t| {
            let bank_term = match menu_b.interp_contract(t) {
                Some(c) => {
                    let q = 1.0 - cfg.fam.survivor_raw(c.d, t);
                    (1.0 - cfg.lambda_b) * c.m * q
                }
                None => 0.0,
            };
            let qm = 1.0 - cfg.fam.survivor_raw(mc.contract.d, t);
            bank_term - (1.0 - cfg.lambda_m) * mc.contract.m * qm
        }),
        None => 0.0,
    };
    // Financed sets: bank-only [ir_b, hi]; coexistence [eq.ir_cutoff, hi].
    let (b_lo, c_lo) = (menu_b.ir_cutoff, eq.ir_cutoff);
    let extensive_margin = if c_lo < b_lo {
        // Types financed only under coexistence, valued at their
        // coexistence surplus.
        integrate_df(&cfg.dist, c_lo, b_lo.min(h_lo), |t| {
            match eq.bank_menu.as_ref().and_then(|m| m.interp_contract(t)) {
                Some(c) => {
                    let q = 1.0 - cfg.fam.survivor_raw(c.d, t);
                    cfg.fam.mean(t) - 1.0 - (1.0 - cfg.lambda_b) * c.m * q
                }
                None => 0.0,
            }
        })
    } else if b_lo < c_lo {
        -integrate_df(&cfg.dist, b_lo, c_lo, |t| match menu_b.interp_contract(t) {
            Some(c) => {
                let q = 1.0 - cfg.fam.survivor_raw(c.d, t);
                cfg.fam.mean(t) - 1.0 - (1.0 - cfg.lambda_b) * c.m * q
            }
            None => 0.0,
        })
    } else {
        0.0
    };
    Decomposition {
        liquidation_penalty,
        screening_relief: total_diff - liquidation_penalty - extensive_margin,
        extensive_margin,
        total_diff,
    }
}

/// Solve both regimes on the config and decompose the difference.
pub fn decompose_solved(cfg: &EquilibriumConfig) -> Result<(Decomposition, WelfareReport, WelfareReport)> {
    let menu = bank_menu(&cfg.fam, &cfg.dist, cfg.lambda_b, cfg.a_bar, cfg.menu_grid)?;
    let report_b = bank_welfare(cfg, &menu);
    let eq = solve_equilibrium(cfg)?;
    let report_bm = coexistence_welfare(cfg, &eq);
    Ok((decompose(cfg, &menu, &report_b, &eq, &report_bm), report_b, report_bm))
}

/// Bank-only versus market-only, with the extensive/intensive sufficient
/// condition for bank dominance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BankVsMarket {
    pub w_bank: f64,
    pub w_market: f64,
    /// `w_bank - w_market`.
    pub diff: f64,
    /// Gross surplus of types financed only by the market
    /// (`integral of (mu - 1) dF` between the two participation cutoffs).
    pub extensive_gain: f64,
    /// Deadweight excess of the pooled contract over the bank menu on the
    /// common financed set.
    pub intensive_loss: f64,
    /// `extensive_gain < intensive_loss` (sufficient for bank dominance).
    pub sufficient_condition_holds: bool,
}

pub fn compare_bank_vs_market(cfg: &EquilibriumConfig) -> Result<BankVsMarket> {
    let hi = cfg.dist.support.theta_hi;
    let menu = bank_menu(&cfg.fam, &cfg.dist, cfg.lambda_b, cfg.a_bar, cfg.menu_grid)?;
    let report_b = bank_welfare(cfg, &menu);
    let mo = solve_market_only(&cfg.fam, &cfg.dist, cfg.lambda_m, cfg.a_bar)?;
    let report_m = market_welfare(cfg, &mo);
    let (b_lo, m_lo) = (menu.ir_cutoff, mo.participation_cutoff);
    let extensive_gain = if m_lo < b_lo {
        integrate_df(&cfg.dist, m_lo, b_lo, |t| cfg.fam.mean(t) - 1.0)
    } else {
        -integrate_df(&cfg.dist, b_lo, m_lo, |t| cfg.fam.mean(t) - 1.0)
    };
    let c_m = mo.contract.contract;
    let intensive_loss = integrate_df(&cfg.dist, b_lo.max(m_lo), hi, |t| {
        let qm = 1.0 - cfg.fam.survivor_raw(c_m.d, t);
        let bank_term = match menu.interp_contract(t) {
            Some(c) => {
                let qb = 1.0 - cfg.fam.survivor_raw(c.d, t);
                (1.0 - cfg.lambda_b) * c.m * qb
            }
            None => 0.0,
        };
        (1.0 - cfg.lambda_m) * c_m.m * qm - bank_term
    });
    Ok(BankVsMarket {
        w_bank: report_b.total,
        w_market: report_m.total,
        diff: report_b.total - report_m.total,
        extensive_gain,
        intensive_loss,
        sufficient_condition_holds: extensive_gain < intensive_loss,
    })
}

/// Per-unit-notional expected-loss difference between financiers.
pub fn expected_loss_wedge(delta: f64, m: f64, q: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&delta) || !(0.0..=1.0).contains(&q) || !(m >= 0.0) {
        return Err(Error::Domain(format!(
            "need delta, q in [0, 1] and m >= 0, got ({delta}, {m}, {q})"
        )));
    }
    Ok(delta * m * q)
}

/// Which liquidation efficiency a welfare sensitivity moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaSide {
    Bank,
    Market,
}

/// Response of regime welfare to a liquidation-efficiency bump.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LambdaSensitivity {
    /// Welfare change holding the financed partition fixed (contracts
    /// re-solved at the bumped efficiency on the same sets).
    pub fixed_partition_diff: f64,
    /// Welfare change with the partition re-solved.
    pub endogenous_diff: f64,
    /// `endogenous_diff - fixed_partition_diff`.
    pub reallocation: f64,
    pub regime_changed: bool,
}

/// Bump one side's liquidation efficiency by `step > 0` and report the
/// fixed-partition and endogenous welfare responses.
pub fn welfare_lambda_sensitivity(
    cfg: &EquilibriumConfig,
    regime: WelfareRegime,
    side: LambdaSide,
    step: f64,
) -> Result<LambdaSensitivity> {
    if !(step >= 0.0) {
        return Err(Error::Domain(format!("step must be nonnegative, got {step}")));
    }
    let mut pert = cfg.clone();
    match side {
        LambdaSide::Bank => {
            pert.lambda_b += step;
            if pert.lambda_b > 1.0 {
                return Err(Error::Domain(format!(
                    "lambda_b + step = {} exceeds 1",
                    pert.lambda_b
                )));
            }
        }
        LambdaSide::Market => {
            pert.lambda_m += step;
            if pert.lambda_m >= pert.lambda_b {
                return Err(Error::Domain(format!(
                    "lambda_m + step = {} reaches lambda_b",
                    pert.lambda_m
                )));
            }
        }
    }
    let hi = cfg.dist.support.theta_hi;
    match regime {
        WelfareRegime::BankOnly => {
            let menu = bank_menu(&cfg.fam, &cfg.dist, cfg.lambda_b, cfg.a_bar, cfg.menu_grid)?;
            let base = bank_welfare(cfg, &menu);
            let menu2 = bank_menu(&pert.fam, &pert.dist, pert.lambda_b, pert.a_bar, pert.menu_grid)?;
            // Fixed partition: new contracts, old financed set.
            let fixed = report_from_segments(
                &pert,
                WelfareRegime::BankOnly,
                &[Segment {
                    lo: menu.ir_cutoff,
                    hi,
                    lambda: pert.lambda_b,
                    contract_at: Box::new(|t| menu2.interp_contract(t)),
                }],
            );
            let endo = bank_welfare(&pert, &menu2);
            Ok(LambdaSensitivity {
                fixed_partition_diff: fixed.total - base.total,
                endogenous_diff: endo.total - base.total,
                reallocation: endo.total - fixed.total,
                regime_changed: false,
            })
        }
        WelfareRegime::MarketOnly => {
            let mo = solve_market_only(&cfg.fam, &cfg.dist, cfg.lambda_m, cfg.a_bar)?;
            let base = market_welfare(cfg, &mo);
            let mc2 = solve_market_contract_tol(
                &pert.fam,
                &pert.dist,
                (mo.participation_cutoff, hi),
                pert.lambda_m,
                pert.a_bar,
                pert.tol,
            )?;
            let c2 = mc2.contract;
            let fixed = report_from_segments(
                &pert,
                WelfareRegime::MarketOnly,
                &[Segment {
                    lo: mo.participation_cutoff,
                    hi,
                    lambda: pert.lambda_m,
                    contract_at: Box::new(move |_| Some(c2)),
                }],
            );
            let mo2 = solve_market_only(&pert.fam, &pert.dist, pert.lambda_m, pert.a_bar)?;
            let endo = market_welfare(&pert, &mo2);
            Ok(LambdaSensitivity {
                fixed_partition_diff: fixed.total - base.total,
                endogenous_diff: endo.total - base.total,
                reallocation: endo.total - fixed.total,
                regime_changed: false,
            })
        }
        WelfareRegime::Coexistence => {
            let eq = solve_equilibrium(cfg)?;
            let base = coexistence_welfare(cfg, &eq);
            // Fixed partition: keep (ir, star); re-solve the bumped side's
            // contracts on its own segment.
            let menu2 = bank_menu(&pert.fam, &pert.dist, pert.lambda_b, pert.a_bar, pert.menu_grid)?;
            let star = eq.star_cutoff;
            let mc2 = if star < hi {
                Some(solve_market_contract_tol(
                    &pert.fam,
                    &pert.dist,
                    (star, hi),
                    pert.lambda_m,
                    pert.a_bar,
                    pert.tol,
                )?)
            } else {
                None
            };
            let mut segments: Vec<Segment> = vec![Segment {
                lo: eq.ir_cutoff,
                hi: star,
                lambda: pert.lambda_b,
                contract_at: Box::new(|t| menu2.interp_contract(t)),
            }];
            if let Some(mc2) = mc2 {
                let c2 = mc2.contract;
                segments.push(Segment {
                    lo: star,
                    hi,
                    lambda: pert.lambda_m,
                    contract_at: Box::new(move |_| Some(c2)),
                });
            }
            let fixed = report_from_segments(&pert, WelfareRegime::Coexistence, &segments);
            let eq2 = solve_equilibrium(&pert)?;
            let endo = coexistence_welfare(&pert, &eq2);
            Ok(LambdaSensitivity {
                fixed_partition_diff: fixed.total - base.total,
                endogenous_diff: endo.total - base.total,
                reallocation: endo.total - fixed.total,
                regime_changed: eq2.regime != eq.regime,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{CashFlowFamily, TypeDistribution, TypeSpace};
    use approx::assert_abs_diff_eq;

    fn cfg(lambda_b: f64, lambda_m: f64, a_bar: f64) -> EquilibriumConfig {
        let dist = TypeDistribution::uniform(TypeSpace::new(1.0, 3.0).unwrap());
        EquilibriumConfig::new(CashFlowFamily::Exponential, dist, lambda_b, lambda_m, a_bar)
            .unwrap()
    }

    #[test]
    fn no_deadweight_when_bank_keeps_everything() {
        let c = cfg(1.0, 0.85, 2.0);
        let rep = regime_welfare(&c, WelfareRegime::BankOnly).unwrap();
        assert_abs_diff_eq!(rep.deadweight, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rep.total, rep.gross_surplus, epsilon = 1e-14);
        assert!(rep.total > 0.0);
    }

    #[test]
    fn report_identity_and_private_surplus_wedge() {
        let c = cfg(0.9, 0.85, 2.0);
        for regime in [
            WelfareRegime::BankOnly,
            WelfareRegime::MarketOnly,
            WelfareRegime::Coexistence,
        ] {
            let rep = regime_welfare(&c, regime).unwrap();
            assert_abs_diff_eq!(rep.total, rep.gross_surplus - rep.deadweight, epsilon = 1e-15);
            assert!(rep.deadweight >= 0.0);
            assert!(rep.financed_measure > 0.0 && rep.financed_measure <= 1.0);
            // The contract payoffs miss the defaulted cash flow
            // E[X 1{X < d}], which the social measure keeps.
            assert!(rep.private_surplus < rep.total);
        }
        // Exact wedge check on the bank-only regime.
        let menu = bank_menu(&c.fam, &c.dist, c.lambda_b, c.a_bar, c.menu_grid).unwrap();
        let rep = bank_welfare(&c, &menu);
        let hi = c.dist.support.theta_hi;
        let missing = integrate_df(&c.dist, menu.ir_cutoff, hi, |t| {
            let con = menu.interp_contract(t).unwrap();
            let g = c.fam.survivor_raw(con.d, t);
            c.fam.mean(t) - c.fam.partial_expectation_raw(con.d, t) - con.d * g
        });
        assert_abs_diff_eq!(rep.total - rep.private_surplus, missing, epsilon = 1e-9);
    }

    #[test]
    fn empty_financed_set_reports_zero() {
        let dist = TypeDistribution::uniform(TypeSpace::new(0.1, 0.3).unwrap());
        let c = EquilibriumConfig::new(CashFlowFamily::Exponential, dist, 0.9, 0.85, 0.2).unwrap();
        let rep = regime_welfare(&c, WelfareRegime::BankOnly).unwrap();
        assert_eq!(rep.total, 0.0);
        assert_eq!(rep.financed_measure, 0.0);
    }

    #[test]
    fn decomposition_is_an_identity() {
        let c = cfg(0.9, 0.89, 2.0);
        let (dec, rep_b, rep_bm) = decompose_solved(&c).unwrap();
        assert_abs_diff_eq!(
            dec.liquidation_penalty + dec.screening_relief + dec.extensive_margin,
            dec.total_diff,
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(dec.total_diff, rep_bm.total - rep_b.total, epsilon = 1e-15);
        // The bank menu is type-by-type optimal, so the switch to pooling
        // costs welfare through the liquidation channel and relieves
        // (almost) nothing on the screening side.
        assert!(dec.liquidation_penalty < 0.0);
        assert!(dec.screening_relief.abs() < 1e-6);
        assert_abs_diff_eq!(dec.extensive_margin, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn decomposition_trivial_when_market_is_empty() {
        // Wide gap: all-bank equilibrium, H empty, both regimes identical.
        let c = cfg(0.9, 0.75, 2.0);
        let (dec, ..) = decompose_solved(&c).unwrap();
        assert_abs_diff_eq!(dec.total_diff, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dec.liquidation_penalty, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dec.screening_relief, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn bank_beats_market_only_on_slack_collateral() {
        for lm in [0.89, 0.85, 0.8] {
            let c = cfg(0.9, lm, 2.0);
            let cmp = compare_bank_vs_market(&c).unwrap();
            assert!(cmp.diff >= 0.0, "W(B) - W(M) = {} at lambda_m = {lm}", cmp.diff);
        }
    }

    #[test]
    fn wedge_arithmetic() {
        assert_abs_diff_eq!(expected_loss_wedge(0.3, 0.5, 0.02).unwrap(), 0.003);
        assert_eq!(expected_loss_wedge(0.0, 0.5, 0.02).unwrap(), 0.0);
        assert_eq!(expected_loss_wedge(0.3, 0.0, 0.02).unwrap(), 0.0);
        assert!(expected_loss_wedge(1.5, 0.5, 0.02).is_err());
    }

    #[test]
    fn fixed_partition_welfare_rises_with_lambda() {
        let c = cfg(0.9, 0.85, 2.0);
        let sb =
            welfare_lambda_sensitivity(&c, WelfareRegime::BankOnly, LambdaSide::Bank, 0.005)
                .unwrap();
        assert!(sb.fixed_partition_diff > 0.0);
        let sm =
            welfare_lambda_sensitivity(&c, WelfareRegime::MarketOnly, LambdaSide::Market, 0.005)
                .unwrap();
        assert!(sm.fixed_partition_diff > 0.0);
        let sc =
            welfare_lambda_sensitivity(&c, WelfareRegime::Coexistence, LambdaSide::Bank, 0.005)
                .unwrap();
        assert!(sc.fixed_partition_diff > 0.0);
    }

    #[test]
    fn lambda_one_bank_sensitivity_is_zero() {
        let c = cfg(1.0, 0.85, 2.0);
        let s = welfare_lambda_sensitivity(&c, WelfareRegime::BankOnly, LambdaSide::Bank, 0.0)
            .unwrap();
        assert_abs_diff_eq!(s.fixed_partition_diff, 0.0, epsilon = 1e-12);
    }
}
