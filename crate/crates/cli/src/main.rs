//! `sde` — solve, sweep, and verify secured-debt screening equilibria from
//! flat key=value configs.
//!
//! Exit codes: 0 success, 2 config error, 3 solver non-convergence,
//! 4 verification failure.

mod config;
mod report;
mod sweep;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::{load_scenario, Scenario};
use report::{bank_branch_label, market_branch_label, regime_label, sig9, write_csv};
use sde_core::{
    coexistence_welfare, decompose_solved, regime_welfare, solve_equilibrium, Decomposition,
    Error as CoreError, Regime, WelfareRegime, WelfareReport,
};

#[derive(Parser)]
#[command(
    name = "sde",
    about = "Secured-debt screening equilibrium solver",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Solve the scenario and write bank_menu.csv, market.csv, equilibrium.csv.
    Solve { config: PathBuf },
    /// Re-solve across a parameter grid and write sweep.csv.
    Sweep {
        config: PathBuf,
        /// One of: lambda_m, lambda_b, a_bar, sigma.
        #[arg(long)]
        param: String,
        #[arg(long)]
        lo: f64,
        #[arg(long)]
        hi: f64,
        #[arg(long)]
        steps: usize,
    },
    /// Check the solvers against brute-force grid and Riemann oracles.
    Verify { config: PathBuf },
}

const EXIT_CONFIG: u8 = 2;
const EXIT_SOLVER: u8 = 3;
const EXIT_VERIFY: u8 = 4;

fn core_exit(e: &CoreError) -> u8 {
    match e {
        CoreError::Domain(_) => EXIT_CONFIG,
        _ => EXIT_SOLVER,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (path, run): (&PathBuf, fn(&Scenario) -> Result<(), (u8, String)>) = match &cli.cmd {
        Cmd::Solve { config } => (config, |s| cmd_solve(s)),
        Cmd::Verify { config } => (config, |s| verify::cmd_verify(s)),
        Cmd::Sweep {
            config,
            param,
            lo,
            hi,
            steps,
        } => {
            let scenario = match load_scenario(config) {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("{e}");
                    return ExitCode::from(EXIT_CONFIG);
                }
            };
            return match sweep::cmd_sweep(&scenario, param, *lo, *hi, *steps) {
                Ok(()) => ExitCode::SUCCESS,
                Err((code, msg)) => {
                    eprintln!("{msg}");
                    ExitCode::from(code)
                }
            };
        }
    };
    let scenario = match load_scenario(path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run(&scenario) {
        Ok(()) => ExitCode::SUCCESS,
        Err((code, msg)) => {
            eprintln!("{msg}");
            ExitCode::from(code)
        }
    }
}

fn cmd_solve(scenario: &Scenario) -> Result<(), (u8, String)> {
    let cfg = &scenario.config;
    let eq = solve_equilibrium(cfg).map_err(|e| (core_exit(&e), e.to_string()))?;

    let menu_rows: Vec<String> = match &eq.bank_menu {
        Some(menu) => menu
            .thetas
            .iter()
            .zip(&menu.solutions)
            .map(|(t, s)| {
                format!(
                    "{},{},{},{},{},{}",
                    sig9(*t),
                    sig9(s.contract.d),
                    sig9(s.contract.m),
                    bank_branch_label(s.branch),
                    sig9(s.utility),
                    sig9(s.default_prob)
                )
            })
            .collect(),
        None => Vec::new(),
    };

    let market_rows: Vec<String> = match &eq.market_contract {
        Some(mc) => vec![format!(
            "{},{},{},{},{}",
            sig9(mc.contract.d),
            sig9(mc.contract.m),
            sig9(mc.pool.0),
            sig9(mc.pool.1),
            market_branch_label(mc.branch)
        )],
        None => Vec::new(),
    };

    let (dec, w_b, w_bm) = welfare_triplet(cfg, &eq)?;
    let w_m = regime_welfare(cfg, WelfareRegime::MarketOnly)
        .map_err(|e| (core_exit(&e), e.to_string()))?;
    let eq_row = format!(
        "{},{},{},{},{},{},{},{},{}",
        regime_label(eq.regime),
        sig9(eq.ir_cutoff),
        sig9(eq.star_cutoff),
        sig9(w_b.total),
        sig9(w_m.total),
        sig9(w_bm.total),
        sig9(dec.liquidation_penalty),
        sig9(dec.screening_relief),
        sig9(dec.extensive_margin)
    );

    let dir = &scenario.output_dir;
    let io = |e: std::io::Error| (EXIT_SOLVER, format!("cannot write outputs: {e}"));
    write_csv(dir, "bank_menu.csv", "theta,d,m,branch,utility,default_prob", &menu_rows)
        .map_err(io)?;
    write_csv(dir, "market.csv", "d_m,m_m,pool_lo,pool_hi,branch", &market_rows).map_err(io)?;
    write_csv(
        dir,
        "equilibrium.csv",
        "regime,theta_ir,theta_star,W_B,W_M,W_BM,liquidation_penalty,screening_relief,extensive_margin",
        &[eq_row],
    )
    .map_err(io)?;

    println!("regime            {}", regime_label(eq.regime));
    println!("participation     theta_ir   = {}", sig9(eq.ir_cutoff));
    println!("self-selection    theta_star = {}", sig9(eq.star_cutoff));
    if let Some(mc) = &eq.market_contract {
        println!(
            "pooled bond       d = {}  m = {}  pool = [{}, {}]",
            sig9(mc.contract.d),
            sig9(mc.contract.m),
            sig9(mc.pool.0),
            sig9(mc.pool.1)
        );
    }
    println!("welfare           bank-only = {}", sig9(w_b.total));
    println!("                  market-only = {}", sig9(w_m.total));
    println!("                  equilibrium = {}", sig9(w_bm.total));
    println!(
        "decomposition     liquidation = {}  screening = {}  extensive = {}",
        sig9(dec.liquidation_penalty),
        sig9(dec.screening_relief),
        sig9(dec.extensive_margin)
    );
    println!("outputs           {}", dir.display());
    Ok(())
}

/// Decomposition plus the bank-only and equilibrium welfare reports,
/// degrading to empty reports when the bank finances nobody.
fn welfare_triplet(
    cfg: &sde_core::EquilibriumConfig,
    eq: &sde_core::Equilibrium,
) -> Result<(Decomposition, WelfareReport, WelfareReport), (u8, String)> {
    if eq.regime == Regime::NoFinance
        || (eq.bank_menu.is_none() && eq.regime != Regime::AllMarket)
    {
        let empty_b = WelfareReport::empty(WelfareRegime::BankOnly);
        let w_bm = coexistence_welfare(cfg, eq);
        let dec = Decomposition {
            liquidation_penalty: 0.0,
            screening_relief: 0.0,
            extensive_margin: w_bm.total,
            total_diff: w_bm.total,
        };
        return Ok((dec, empty_b, w_bm));
    }
    match decompose_solved(cfg) {
        Ok(t) => Ok(t),
        Err(CoreError::AllUnfinanceable) => {
            let empty_b = WelfareReport::empty(WelfareRegime::BankOnly);
            let w_bm = coexistence_welfare(cfg, eq);
            let dec = Decomposition {
                liquidation_penalty: 0.0,
                screening_relief: 0.0,
                extensive_margin: w_bm.total,
                total_diff: w_bm.total,
            };
            Ok((dec, empty_b, w_bm))
        }
        Err(e) => Err((core_exit(&e), e.to_string())),
    }
}
