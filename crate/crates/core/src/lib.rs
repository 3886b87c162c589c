//! Solver for a secured-debt market with privately known borrower quality:
//! type-specific zero-profit bank menus, a pooled collateralized bond, the
//! self-selection cutoff between them, and welfare accounting — each optimum
//! checkable against brute-force oracles.

pub mod bank;
pub mod contracts;
pub mod distributions;
pub mod equilibrium;
pub mod error;
pub mod market;
pub mod numerics;
pub mod oracle;
pub mod welfare;

pub use bank::{
    bank_comparative_static, bank_menu, solve_bank_contract, BankBranch, BankContractSolution,
    BankMenu, BankParam, TangencyForm,
};
pub use contracts::{
    borrower_utility, financier_profit, slope_identities, social_surplus, zero_profit_collateral,
    Contract, FinancierSide, FinancierTech,
};
pub use distributions::{
    pool_mass, pool_moment, CashFlowFamily, CollateralEndowment, PoolIntegrand, TypeDistribution,
    TypeDistributionKind, TypeSpace,
};
pub use equilibrium::{
    bank_ir_cutoff, cutoff_comparative_statics, gamma, inner_cutoff, solve_equilibrium,
    utility_gap, CutoffParam, Equilibrium, EquilibriumConfig, Regime,
};
pub use error::{Error, Result};
pub use market::{
    pooled_utility, solve_market_contract, solve_market_only, MarketBranch, MarketContract,
    MarketOnlyRegime,
};
pub use oracle::{
    grid_best_on_locus, grid_best_on_pooled_locus, riemann_integral, scan_sign_changes, GridBest,
    GridSpec,
};
pub use welfare::{
    bank_welfare, coexistence_welfare, compare_bank_vs_market, decompose, decompose_solved,
    expected_loss_wedge, market_welfare, regime_welfare, welfare_lambda_sensitivity,
    BankVsMarket, Decomposition, LambdaSensitivity, LambdaSide, WelfareRegime, WelfareReport,
};
