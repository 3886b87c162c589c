//! Parameter sweeps: re-solve the scenario across a grid of one parameter
//! and tabulate cutoffs, regime shares, and welfare. Rows are computed
//! concurrently (capped by `SDE_THREADS`) and written in parameter order;
//! failed points carry a status instead of aborting the run.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use sde_core::{
    coexistence_welfare, regime_welfare, solve_equilibrium, CashFlowFamily, EquilibriumConfig,
    Regime, WelfareRegime,
};

use crate::config::Scenario;
use crate::report::{regime_label, sig9, write_csv};
use crate::{core_exit, EXIT_CONFIG};

#[derive(Clone, Copy)]
enum Param {
    LambdaM,
    LambdaB,
    ABar,
    Sigma,
}

pub fn cmd_sweep(
    scenario: &Scenario,
    param: &str,
    lo: f64,
    hi: f64,
    steps: usize,
) -> Result<(), (u8, String)> {
    let param = match param {
        "lambda_m" => Param::LambdaM,
        "lambda_b" => Param::LambdaB,
        "a_bar" => Param::ABar,
        "sigma" => Param::Sigma,
        other => {
            return Err((
                EXIT_CONFIG,
                format!("unknown sweep parameter `{other}` (expected lambda_m, lambda_b, a_bar, or sigma)"),
            ))
        }
    };
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err((EXIT_CONFIG, format!("sweep range needs lo < hi, got [{lo}, {hi}]")));
    }
    if steps < 2 {
        return Err((EXIT_CONFIG, format!("sweep needs at least 2 steps, got {steps}")));
    }
    if matches!(param, Param::Sigma)
        && !matches!(scenario.config.fam, CashFlowFamily::LognormalLocation { .. })
    {
        return Err((
            EXIT_CONFIG,
            "sigma sweep requires family.kind = lognormal".to_string(),
        ));
    }

    let values: Vec<f64> = (0..steps)
        .map(|k| lo + (hi - lo) * k as f64 / (steps - 1) as f64)
        .collect();

    let threads = std::env::var("SDE_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism().map(usize::from).unwrap_or(1)
        })
        .min(steps);

    let rows: Mutex<Vec<Option<String>>> = Mutex::new(vec![None; steps]);
    let next = AtomicUsize::new(0);
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= steps {
                    break;
                }
                let row = sweep_row(scenario, param, values[i]);
                rows.lock().unwrap()[i] = Some(row);
            });
        }
    });
    let rows: Vec<String> = rows.into_inner().unwrap().into_iter().flatten().collect();

    write_csv(
        &scenario.output_dir,
        "sweep.csv",
        "value,theta_star,regime,bank_share,W_B,W_M,W_BM,spread_gap_at_cutoff,status",
        &rows,
    )
    .map_err(|e| (crate::EXIT_SOLVER, format!("cannot write sweep.csv: {e}")))?;
    println!(
        "sweep.csv: {} rows in {}",
        rows.len(),
        scenario.output_dir.display()
    );
    Ok(())
}

fn config_with(scenario: &Scenario, param: Param, value: f64) -> Result<EquilibriumConfig, String> {
    let base = &scenario.config;
    let (mut lambda_b, mut lambda_m, mut a_bar, mut fam) =
        (base.lambda_b, base.lambda_m, base.a_bar, base.fam);
    match param {
        Param::LambdaM => lambda_m = value,
        Param::LambdaB => lambda_b = value,
        Param::ABar => a_bar = value,
        Param::Sigma => fam = CashFlowFamily::lognormal(value).map_err(|e| e.to_string())?,
    }
    let mut cfg = EquilibriumConfig::new(fam, base.dist, lambda_b, lambda_m, a_bar)
        .map_err(|e| e.to_string())?;
    cfg.tol = base.tol;
    cfg.menu_grid = base.menu_grid;
    Ok(cfg)
}

fn sweep_row(scenario: &Scenario, param: Param, value: f64) -> String {
    match try_row(scenario, param, value) {
        Ok(body) => format!("{},{body},ok", sig9(value)),
        Err(msg) => format!(
            "{},nan,none,nan,nan,nan,nan,nan,{}",
            sig9(value),
            msg.replace(',', ";")
        ),
    }
}

fn try_row(scenario: &Scenario, param: Param, value: f64) -> Result<String, String> {
    let cfg = config_with(scenario, param, value)?;
    let solver_err = |e: sde_core::Error| {
        let _ = core_exit(&e);
        e.to_string()
    };
    let eq = solve_equilibrium(&cfg).map_err(solver_err)?;
    let w_b = regime_welfare(&cfg, WelfareRegime::BankOnly).map_err(solver_err)?;
    let w_m = regime_welfare(&cfg, WelfareRegime::MarketOnly).map_err(solver_err)?;
    let w_bm = coexistence_welfare(&cfg, &eq);

    // Share of financed types served by the bank.
    let f_ir = cfg.dist.cdf(eq.ir_cutoff);
    let bank_share = if eq.regime == Regime::NoFinance || 1.0 - f_ir <= 0.0 {
        f64::NAN
    } else {
        (cfg.dist.cdf(eq.star_cutoff) - f_ir) / (1.0 - f_ir)
    };

    // Face-value gap between the bank contract at the cutoff and the bond.
    let spread_gap = match (&eq.bank_menu, &eq.market_contract) {
        (Some(menu), Some(mc)) => menu
            .interp_contract(eq.star_cutoff)
            .map(|c| c.d - mc.contract.d)
            .unwrap_or(f64::NAN),
        _ => f64::NAN,
    };

    Ok(format!(
        "{},{},{},{},{},{},{}",
        sig9(eq.star_cutoff),
        regime_label(eq.regime),
        sig9(bank_share),
        sig9(w_b.total),
        sig9(w_m.total),
        sig9(w_bm.total),
        sig9(spread_gap)
    ))
}
