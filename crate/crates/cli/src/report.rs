//! Deterministic, locale-independent number formatting and CSV writing.

use std::io::Write;
use std::path::Path;

use sde_core::{BankBranch, MarketBranch, Regime};

/// Nine significant digits in scientific notation; byte-identical across
/// runs and platforms.
pub fn sig9(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    format!("{x:.8e}")
}

pub fn bank_branch_label(b: BankBranch) -> &'static str {
    match b {
        BankBranch::Interior => "interior",
        BankBranch::CollateralBound => "collateral_bound",
        BankBranch::ZeroCollateral => "zero_collateral",
        BankBranch::Unfinanceable => "unfinanceable",
    }
}

pub fn market_branch_label(b: MarketBranch) -> &'static str {
    match b {
        MarketBranch::Interior => "interior",
        MarketBranch::CollateralCapped => "collateral_capped",
        MarketBranch::ZeroCollateral => "zero_collateral",
        MarketBranch::Infeasible => "infeasible",
    }
}

pub fn regime_label(r: Regime) -> &'static str {
    match r {
        Regime::Coexistence => "coexistence",
        Regime::AllBank => "all_bank",
        Regime::AllMarket => "all_market",
        Regime::NoFinance => "no_finance",
    }
}

/// Write rows as CSV (header first) to `dir/name`, creating `dir`.
pub fn write_csv(
    dir: &Path,
    name: &str,
    header: &str,
    rows: &[String],
) -> std::io::Result<std::path::PathBuf> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path)?;
    writeln!(f, "{header}")?;
    for row in rows {
        writeln!(f, "{row}")?;
    }
    Ok(path)
}
