//! Flat `key = value` scenario configs with dotted keys.
//!
//! Recognized keys (defaults in parentheses):
//!
//! ```text
//! family.kind     exponential | lognormal   (exponential)
//! family.sigma    log-sd, lognormal only    (0.5)
//! types.dist      uniform | beta            (uniform)
//! types.lo        lower type bound          (1.0)
//! types.hi        upper type bound          (3.0)
//! types.alpha     beta shape, beta only
//! types.beta      beta shape, beta only
//! bank.lambda     bank liquidation efficiency    (0.9)
//! market.lambda   market liquidation efficiency  (0.85)
//! collateral.cap  collateral endowment cap       (2.0)
//! grid.menu       bank menu nodes                (401)
//! solver.tol      root tolerance                 (1e-10)
//! output.dir      directory for CSV outputs      (out)
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. Unknown keys are
//! rejected so typos fail loudly.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use sde_core::{CashFlowFamily, EquilibriumConfig, TypeDistribution, TypeSpace};

/// Fully resolved scenario.
pub struct Scenario {
    pub config: EquilibriumConfig,
    pub output_dir: PathBuf,
}

#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

const KNOWN_KEYS: &[&str] = &[
    "family.kind",
    "family.sigma",
    "types.dist",
    "types.lo",
    "types.hi",
    "types.alpha",
    "types.beta",
    "bank.lambda",
    "market.lambda",
    "collateral.cap",
    "grid.menu",
    "solver.tol",
    "output.dir",
];

pub fn load_scenario(path: &Path) -> Result<Scenario, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let mut kv: HashMap<String, String> = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError(format!("line {}: expected `key = value`", lineno + 1)))?;
        let key = k.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            return Err(ConfigError(format!("line {}: unknown key `{key}`", lineno + 1)));
        }
        if kv.insert(key.clone(), v.trim().to_string()).is_some() {
            return Err(ConfigError(format!("line {}: duplicate key `{key}`", lineno + 1)));
        }
    }
    scenario_from_map(&kv)
}

fn get_f64(kv: &HashMap<String, String>, key: &str, default: f64) -> Result<f64, ConfigError> {
    match kv.get(key) {
        None => Ok(default),
        Some(s) => s
            .parse()
            .map_err(|_| ConfigError(format!("`{key}` must be a number, got `{s}`"))),
    }
}

fn scenario_from_map(kv: &HashMap<String, String>) -> Result<Scenario, ConfigError> {
    let sigma = get_f64(kv, "family.sigma", 0.5)?;
    let kind = kv.get("family.kind").map(String::as_str).unwrap_or("exponential");
    let fam = match kind {
        "exponential" => CashFlowFamily::Exponential,
        "lognormal" => CashFlowFamily::lognormal(sigma).map_err(|e| ConfigError(e.to_string()))?,
        other => {
            return Err(ConfigError(format!(
                "`family.kind` must be `exponential` or `lognormal`, got `{other}`"
            )))
        }
    };

    let lo = get_f64(kv, "types.lo", 1.0)?;
    let hi = get_f64(kv, "types.hi", 3.0)?;
    let support = TypeSpace::new(lo, hi).map_err(|e| ConfigError(e.to_string()))?;
    let dist = match kv.get("types.dist").map(String::as_str).unwrap_or("uniform") {
        "uniform" => TypeDistribution::uniform(support),
        "beta" => {
            let alpha = get_f64(kv, "types.alpha", 2.0)?;
            let beta = get_f64(kv, "types.beta", 2.0)?;
            TypeDistribution::truncated_beta(support, alpha, beta)
                .map_err(|e| ConfigError(e.to_string()))?
        }
        other => {
            return Err(ConfigError(format!(
                "`types.dist` must be `uniform` or `beta`, got `{other}`"
            )))
        }
    };

    let lambda_b = get_f64(kv, "bank.lambda", 0.9)?;
    let lambda_m = get_f64(kv, "market.lambda", 0.85)?;
    if lambda_m >= lambda_b {
        return Err(ConfigError(format!(
            "market.lambda = {lambda_m} must be strictly below bank.lambda = {lambda_b}: \
             the model assumes the bank liquidates collateral more efficiently than \
             the market (liquidation-ordering assumption)"
        )));
    }
    let a_bar = get_f64(kv, "collateral.cap", 2.0)?;

    let mut config = EquilibriumConfig::new(fam, dist, lambda_b, lambda_m, a_bar)
        .map_err(|e| ConfigError(e.to_string()))?;
    let menu = get_f64(kv, "grid.menu", 401.0)?;
    if menu < 2.0 || menu.fract() != 0.0 {
        return Err(ConfigError(format!("`grid.menu` must be an integer >= 2, got {menu}")));
    }
    config.menu_grid = menu as usize;
    let tol = get_f64(kv, "solver.tol", config.tol)?;
    if !(tol > 0.0 && tol < 1.0) {
        return Err(ConfigError(format!("`solver.tol` must lie in (0, 1), got {tol}")));
    }
    config.tol = tol;

    let output_dir = PathBuf::from(kv.get("output.dir").map(String::as_str).unwrap_or("out"));
    Ok(Scenario { config, output_dir })
}
