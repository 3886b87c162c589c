//! Cross-check the solvers on the loaded scenario against the brute-force
//! oracles and print one pass/fail line per check.

use sde_core::bank::{solve_bank_contract_opts, TangencyForm};
use sde_core::{
    bank_menu, grid_best_on_locus, grid_best_on_pooled_locus, pool_mass, pool_moment,
    pooled_utility, riemann_integral, scan_sign_changes, solve_bank_contract,
    solve_market_contract, GridSpec, PoolIntegrand,
};

use crate::config::Scenario;
use crate::EXIT_VERIFY;

struct Check {
    name: &'static str,
    outcome: Result<String, String>,
}

pub fn cmd_verify(scenario: &Scenario) -> Result<(), (u8, String)> {
    let cfg = &scenario.config;
    let (lo, hi) = (cfg.dist.support.theta_lo, cfg.dist.support.theta_hi);
    let spec = GridSpec::default();
    let mut checks = Vec::new();

    // 1. Per-type solver vs. exhaustive grid on the zero-profit locus.
    for k in 0..5 {
        let theta = lo + (hi - lo) * (0.1 + 0.8 * k as f64 / 4.0);
        checks.push(Check {
            name: "bank solver vs grid oracle",
            outcome: bank_vs_grid(cfg, theta, spec),
        });
    }

    // 2. Pooled solver vs. grid oracle on the upper-half pool.
    let pool = (0.5 * (lo + hi), hi);
    checks.push(Check {
        name: "market solver vs grid oracle",
        outcome: market_vs_grid(cfg, pool, spec),
    });

    // 3. A point-mass pool must reproduce the per-type solution.
    checks.push(Check {
        name: "point-mass market equals bank technology solve",
        outcome: point_mass_consistency(cfg),
    });

    // 4. Quadrature pool moment vs. midpoint Riemann sum.
    checks.push(Check {
        name: "pool moment quadrature vs Riemann oracle",
        outcome: quadrature_vs_riemann(cfg),
    });

    // 5. Participation cutoff sits inside the unique utility sign change.
    checks.push(Check {
        name: "participation cutoff bracketed by sign scan",
        outcome: cutoff_scan(cfg),
    });

    let mut failed = 0usize;
    for c in &checks {
        match &c.outcome {
            Ok(detail) => println!("PASS  {}  ({detail})", c.name),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {}  ({detail})", c.name);
            }
        }
    }
    if failed > 0 {
        Err((
            EXIT_VERIFY,
            format!("{failed} of {} verification checks failed", checks.len()),
        ))
    } else {
        println!("all {} checks passed", checks.len());
        Ok(())
    }
}

fn bank_vs_grid(
    cfg: &sde_core::EquilibriumConfig,
    theta: f64,
    spec: GridSpec,
) -> Result<String, String> {
    let sol = solve_bank_contract_opts(
        &cfg.fam,
        theta,
        cfg.lambda_b,
        cfg.a_bar,
        TangencyForm::SlopeEquality,
        cfg.tol,
    )
    .map_err(|e| e.to_string())?;
    let gb = match grid_best_on_locus(&cfg.fam, theta, cfg.lambda_b, cfg.a_bar, spec) {
        Ok(gb) => gb,
        Err(sde_core::Error::NoFeasiblePoint) if !sol.utility.is_finite() => {
            return Ok(format!("theta = {theta:.3}: both report unfinanceable"));
        }
        Err(e) => return Err(e.to_string()),
    };
    let gap = (gb.utility - sol.utility).abs();
    if gap <= 1e-7 {
        Ok(format!("theta = {theta:.3}, utility gap {gap:.2e}"))
    } else {
        Err(format!("theta = {theta:.3}, utility gap {gap:.2e} exceeds 1e-7"))
    }
}

fn market_vs_grid(
    cfg: &sde_core::EquilibriumConfig,
    pool: (f64, f64),
    spec: GridSpec,
) -> Result<String, String> {
    let mc = solve_market_contract(&cfg.fam, &cfg.dist, pool, cfg.lambda_m, cfg.a_bar)
        .map_err(|e| e.to_string())?;
    let solver_u =
        pooled_utility(&cfg.fam, &cfg.dist, pool, mc.contract).map_err(|e| e.to_string())?;
    let gb = grid_best_on_pooled_locus(&cfg.fam, &cfg.dist, pool, cfg.lambda_m, cfg.a_bar, spec)
        .map_err(|e| e.to_string())?;
    let gap = (gb.utility - solver_u).abs();
    if gap <= 1e-7 {
        Ok(format!("pool [{:.3}, {:.3}], utility gap {gap:.2e}", pool.0, pool.1))
    } else {
        Err(format!("pool [{:.3}, {:.3}], utility gap {gap:.2e} exceeds 1e-7", pool.0, pool.1))
    }
}

fn point_mass_consistency(cfg: &sde_core::EquilibriumConfig) -> Result<String, String> {
    let mid = 0.5 * (cfg.dist.support.theta_lo + cfg.dist.support.theta_hi);
    let pool = (mid, mid + 1e-12);
    let mc = solve_market_contract(&cfg.fam, &cfg.dist, pool, cfg.lambda_m, cfg.a_bar)
        .map_err(|e| e.to_string())?;
    let per_type = solve_bank_contract(&cfg.fam, mid, cfg.lambda_m, cfg.a_bar)
        .map_err(|e| e.to_string())?;
    let gap = (mc.contract.d - per_type.contract.d)
        .abs()
        .max((mc.contract.m - per_type.contract.m).abs());
    if gap <= 1e-9 {
        Ok(format!("contract gap {gap:.2e}"))
    } else {
        Err(format!("contract gap {gap:.2e} exceeds 1e-9"))
    }
}

fn quadrature_vs_riemann(cfg: &sde_core::EquilibriumConfig) -> Result<String, String> {
    let (lo, hi) = (cfg.dist.support.theta_lo, cfg.dist.support.theta_hi);
    let d = 0.5 * (lo + hi).min(2.0);
    let quad = pool_moment(&cfg.fam, &cfg.dist, (lo, hi), d, PoolIntegrand::Survivor, 64)
        .map_err(|e| e.to_string())?;
    let riem = riemann_integral(
        |t| cfg.fam.survivor(d, t).unwrap_or(0.0) * cfg.dist.pdf(t),
        (lo, hi),
        100_000,
    ) / pool_mass(&cfg.dist, (lo, hi));
    let gap = (quad - riem).abs();
    if gap <= 1e-6 {
        Ok(format!("moment gap {gap:.2e}"))
    } else {
        Err(format!("moment gap {gap:.2e} exceeds 1e-6"))
    }
}

fn cutoff_scan(cfg: &sde_core::EquilibriumConfig) -> Result<String, String> {
    let menu = bank_menu(&cfg.fam, &cfg.dist, cfg.lambda_b, cfg.a_bar, cfg.menu_grid)
        .map_err(|e| e.to_string())?;
    let (lo, hi) = (cfg.dist.support.theta_lo, cfg.dist.support.theta_hi);
    let brackets = scan_sign_changes(
        |t| {
            solve_bank_contract(&cfg.fam, t, cfg.lambda_b, cfg.a_bar)
                .map(|s| if s.utility.is_finite() { s.utility } else { -1.0 })
                .unwrap_or(-1.0)
        },
        (lo, hi),
        100,
    );
    match brackets.len() {
        0 => {
            // No crossing: the cutoff sits at an endpoint.
            if menu.ir_cutoff <= lo + 1e-9 || menu.ir_cutoff >= hi - 1e-9 {
                Ok("no interior crossing; cutoff at support edge".to_string())
            } else {
                Err(format!(
                    "interior cutoff {} but no sign change found",
                    menu.ir_cutoff
                ))
            }
        }
        1 => {
            let (a, b) = brackets[0];
            if menu.ir_cutoff >= a && menu.ir_cutoff <= b {
                Ok(format!("cutoff {:.6} in [{a:.6}, {b:.6}]", menu.ir_cutoff))
            } else {
                Err(format!(
                    "cutoff {:.6} outside scan bracket [{a:.6}, {b:.6}]",
                    menu.ir_cutoff
                ))
            }
        }
        n => Err(format!("expected one participation sign change, found {n}")),
    }
}
