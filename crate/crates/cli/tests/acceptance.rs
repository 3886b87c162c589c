//! End-to-end acceptance checks, one test per criterion. Each prints a
//! single PASS line on success; a failed assertion marks the criterion
//! failed.

use std::process::Command;

use sde_core::bank::bank_menu;
use sde_core::{
    bank_comparative_static, borrower_utility, compare_bank_vs_market, decompose_solved,
    expected_loss_wedge, financier_profit, gamma, grid_best_on_locus, grid_best_on_pooled_locus,
    pooled_utility, riemann_integral, scan_sign_changes, slope_identities, solve_bank_contract,
    solve_equilibrium, solve_market_contract, utility_gap, welfare_lambda_sensitivity, BankBranch,
    BankParam, CashFlowFamily, Contract, EquilibriumConfig, FinancierTech, GridSpec, LambdaSide,
    Regime, TypeDistribution, TypeSpace, WelfareRegime,
};

fn baseline(lambda_m: f64) -> EquilibriumConfig {
    let dist = TypeDistribution::uniform(TypeSpace::new(1.0, 3.0).unwrap());
    EquilibriumConfig::new(CashFlowFamily::Exponential, dist, 0.9, lambda_m, 2.0).unwrap()
}

/// Deterministic 64-bit LCG for seeded parameter draws.
struct Lcg(u64);

impl Lcg {
    fn next_unit(&mut self) -> f64 {
        self.0 = self.0.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (self.0 >> 11) as f64 / (1u64 << 53) as f64
    }
    fn in_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_unit()
    }
}

#[test]
fn criterion_01_expected_loss_wedge_arithmetic() {
    let w = expected_loss_wedge(0.3, 0.5, 0.02).unwrap();
    assert_eq!(w, 0.003);
    println!("PASS criterion 1: expected-loss wedge 0.3 * 0.5 * 0.02 = 0.003 exactly");
}

#[test]
fn criterion_02_solver_matches_grid_oracle_on_seeded_draws() {
    let spec = GridSpec::default();
    // Per-type solver, both cash-flow families.
    for (fam, theta_range, seed) in [
        (CashFlowFamily::Exponential, (1.0, 3.0), 7u64),
        (CashFlowFamily::lognormal(0.5).unwrap(), (0.3, 1.2), 11u64),
    ] {
        let mut rng = Lcg(seed);
        for _ in 0..10 {
            let theta = rng.in_range(theta_range.0, theta_range.1);
            let lambda = rng.in_range(0.6, 1.0);
            let sol = solve_bank_contract(&fam, theta, lambda, 2.0).unwrap();
            match grid_best_on_locus(&fam, theta, lambda, 2.0, spec) {
                Ok(gb) => {
                    let gap = (gb.utility - sol.utility).abs();
                    assert!(
                        gap <= 1e-7,
                        "{fam:?} theta={theta} lambda={lambda}: utility gap {gap}"
                    );
                }
                Err(_) => assert_eq!(sol.branch, BankBranch::Unfinanceable),
            }
        }
    }
    // Pooled solver on the fixed upper pool.
    let dist = TypeDistribution::uniform(TypeSpace::new(1.0, 3.0).unwrap());
    let fam = CashFlowFamily::Exponential;
    let pool = (1.5, 3.0);
    let mut rng = Lcg(13);
    for _ in 0..10 {
        let lambda_m = rng.in_range(0.6, 0.95);
        let mc = solve_market_contract(&fam, &dist, pool, lambda_m, 2.0).unwrap();
        let solver_u = pooled_utility(&fam, &dist, pool, mc.contract).unwrap();
        let gb = grid_best_on_pooled_locus(&fam, &dist, pool, lambda_m, 2.0, spec).unwrap();
        let gap = (gb.utility - solver_u).abs();
        assert!(gap <= 1e-7, "pooled lambda_m={lambda_m}: utility gap {gap}");
    }
    println!("PASS criterion 2: solver-vs-grid utility gap <= 1e-7 on 30 seeded draws");
}

#[test]
fn criterion_03_slope_identities_match_finite_differences() {
    let mut checked = 0;
    for (fam, thetas) in [
        (
            CashFlowFamily::Exponential,
            (0..10).map(|i| 1.0 + 0.22 * i as f64).collect::<Vec<_>>(),
        ),
        (
            CashFlowFamily::lognormal(0.5).unwrap(),
            (0..10).map(|i| -0.2 + 0.1 * i as f64).collect::<Vec<_>>(),
        ),
    ] {
        let tech = FinancierTech::bank(0.8).unwrap();
        for &theta in &thetas {
            for i in 0..10 {
                let d = 0.3 + 0.25 * i as f64;
                for m in [0.0, 0.6, 1.5] {
                    let c = Contract { d, m };
                    let (ud, um, pd, pm) = slope_identities(&fam, theta, c, &tech);
                    let h = 1e-5;
                    let fd = |f: &dyn Fn(Contract) -> f64, dd: f64, dm: f64| {
                        (f(Contract { d: d + h * dd, m: m + h * dm })
                            - f(Contract { d: d - h * dd, m: m - h * dm }))
                            / (2.0 * h)
                    };
                    let u = |c: Contract| borrower_utility(&fam, theta, c);
                    let p = |c: Contract| financier_profit(&fam, theta, c, &tech);
                    for (analytic, numeric) in [
                        (ud, fd(&u, 1.0, 0.0)),
                        (um, fd(&u, 0.0, 1.0)),
                        (pd, fd(&p, 1.0, 0.0)),
                        (pm, fd(&p, 0.0, 1.0)),
                    ] {
                        let err = (analytic - numeric).abs()
                            / analytic.abs().max(numeric.abs()).max(1e-3);
                        assert!(
                            err <= 1e-6,
                            "{fam:?} theta={theta} d={d} m={m}: {analytic} vs {numeric}"
                        );
                        checked += 1;
                    }
                }
            }
        }
    }
    println!("PASS criterion 3: {checked} slope identities within 1e-6 of finite differences");
}

#[test]
fn criterion_04_menu_monotone_with_pinned_participation() {
    let cfg = baseline(0.85);
    let menu = bank_menu(&cfg.fam, &cfg.dist, cfg.lambda_b, cfg.a_bar, 401).unwrap();
    assert_eq!(menu.thetas.len(), 401);
    for w in menu.solutions.windows(2) {
        assert!(w[1].contract.m <= w[0].contract.m + 1e-12, "collateral not decreasing");
        assert!(w[1].default_prob <= w[0].default_prob + 1e-12, "default risk not decreasing");
        assert!(w[1].utility >= w[0].utility - 1e-12, "utility not increasing");
    }
    let u_at_cutoff = solve_bank_contract(&cfg.fam, menu.ir_cutoff, cfg.lambda_b, cfg.a_bar)
        .unwrap()
        .utility;
    assert!(u_at_cutoff.abs() <= 1e-8, "utility at cutoff {u_at_cutoff}");
    println!(
        "PASS criterion 4: collateral/default risk fall and utility rises over 401 nodes; \
         participation utility pinned at zero"
    );
}

#[test]
fn criterion_05_bank_comparative_statics() {
    let fam = CashFlowFamily::Exponential;
    // Interior point: better liquidation lowers face value, collateral, and
    // default risk.
    let cs = bank_comparative_static(&fam, 2.0, 0.5, 2.0, BankParam::Lambda, 1e-3).unwrap();
    assert!(!cs.branch_changed);
    assert!(cs.d_diff < 0.0 && cs.m_diff < 0.0 && cs.default_prob_diff < 0.0);
    // A slack cap is irrelevant.
    let cs = bank_comparative_static(&fam, 2.0, 0.5, 2.0, BankParam::ABar, 1e-2).unwrap();
    assert!(cs.d_diff.abs() <= 1e-6 && cs.m_diff.abs() <= 1e-6);
    // A binding cap: more collateral capacity lowers the face value.
    let base = solve_bank_contract(&fam, 2.0, 0.9, 0.8).unwrap();
    assert_eq!(base.branch, BankBranch::CollateralBound);
    let cs = bank_comparative_static(&fam, 2.0, 0.9, 0.8, BankParam::ABar, 1e-2).unwrap();
    assert!(cs.d_diff < 0.0);
    println!("PASS criterion 5: liquidation and collateral-capacity responses have the predicted signs");
}

#[test]
fn criterion_06_equilibrium_indifference_and_unique_crossing() {
    let cfg = baseline(0.85);
    let eq = solve_equilibrium(&cfg).unwrap();
    assert_eq!(eq.regime, Regime::Coexistence);
    let gap = utility_gap(&cfg, eq.star_cutoff, eq.star_cutoff).unwrap();
    assert!(gap.abs() < 1e-8, "indifference gap {gap}");
    let brackets = scan_sign_changes(
        |v| gamma(&cfg, v).unwrap(),
        (eq.ir_cutoff + 1e-3, 3.0 - 1e-3),
        100,
    );
    assert_eq!(brackets.len(), 1, "expected a unique fixed-point crossing");
    assert!(brackets[0].0 <= eq.star_cutoff && eq.star_cutoff <= brackets[0].1);
    println!(
        "PASS criterion 6: cutoff type indifferent within 1e-8 and fixed-point residual \
         crosses zero once on a 100-point scan"
    );
}

#[test]
fn criterion_07_cutoff_comparative_statics() {
    // As the liquidation gap shrinks (lambda_m rises toward lambda_b), the
    // market absorbs types from below less and less; the self-selection
    // cutoff rises, i.e. it falls in the gap.
    let mut last = f64::NEG_INFINITY;
    for k in 0..10 {
        let lambda_m = 0.85 + (0.8995 - 0.85) * k as f64 / 9.0;
        let eq = solve_equilibrium(&baseline(lambda_m)).unwrap();
        assert_eq!(eq.regime, Regime::Coexistence, "lambda_m = {lambda_m}");
        assert!(
            eq.star_cutoff >= last - 1e-9,
            "cutoff fell from {last} to {} at lambda_m = {lambda_m}",
            eq.star_cutoff
        );
        last = eq.star_cutoff;
    }
    // Vanishing gap: the market pool contracts to a sliver at the top, so
    // the cutoff approaches the upper type bound.
    let eq = solve_equilibrium(&baseline(0.9 - 1e-6)).unwrap();
    let cell = 2.0 / 400.0;
    assert!(
        eq.star_cutoff >= 3.0 - cell,
        "cutoff {} not within one menu cell of the top type",
        eq.star_cutoff
    );
    println!(
        "PASS criterion 7: cutoff weakly decreasing in the liquidation gap over a 10-step \
         sweep; within one grid cell of the top type as the gap vanishes"
    );
}

#[test]
fn criterion_08_welfare_decomposition_identity() {
    let cfg = baseline(0.85);
    let (dec, report_b, report_bm) = decompose_solved(&cfg).unwrap();
    let sum = dec.liquidation_penalty + dec.screening_relief + dec.extensive_margin;
    assert!(
        (sum - dec.total_diff).abs() <= 1e-9,
        "terms sum to {sum}, total {}",
        dec.total_diff
    );
    assert!((dec.total_diff - (report_bm.total - report_b.total)).abs() <= 1e-12);

    // Independent check: rebuild both welfare levels by midpoint Riemann
    // sums over the solved contracts.
    let menu = bank_menu(&cfg.fam, &cfg.dist, cfg.lambda_b, cfg.a_bar, cfg.menu_grid).unwrap();
    let eq = solve_equilibrium(&cfg).unwrap();
    let surplus = |t: f64, c: Contract, lambda: f64| {
        let q = 1.0 - cfg.fam.survivor(c.d, t).unwrap();
        (cfg.fam.mean(t) - 1.0 - (1.0 - lambda) * c.m * q) * cfg.dist.pdf(t)
    };
    let w_b = riemann_integral(
        |t| menu.interp_contract(t).map_or(0.0, |c| surplus(t, c, cfg.lambda_b)),
        (menu.ir_cutoff, 3.0),
        200_000,
    );
    let bank_part = riemann_integral(
        |t| {
            eq.bank_menu
                .as_ref()
                .and_then(|m| m.interp_contract(t))
                .map_or(0.0, |c| surplus(t, c, cfg.lambda_b))
        },
        (eq.ir_cutoff, eq.star_cutoff),
        200_000,
    );
    let mc = eq.market_contract.unwrap();
    let market_part = riemann_integral(
        |t| surplus(t, mc.contract, cfg.lambda_m),
        (eq.star_cutoff, 3.0),
        200_000,
    );
    let direct = (bank_part + market_part) - w_b;
    assert!(
        (sum - direct).abs() <= 1e-6,
        "decomposition sum {sum} vs direct quadrature {direct}"
    );
    println!(
        "PASS criterion 8: decomposition terms sum to the welfare difference within 1e-9 \
         and match direct quadrature within 1e-6"
    );
}

#[test]
fn criterion_09_regime_ranking_and_welfare_sensitivity() {
    for lambda_m in [0.89, 0.85, 0.8] {
        let cmp = compare_bank_vs_market(&baseline(lambda_m)).unwrap();
        assert!(
            cmp.diff >= 0.0,
            "bank-only welfare below market-only at lambda_m = {lambda_m}"
        );
    }
    let cfg = baseline(0.85);
    for side in [LambdaSide::Bank, LambdaSide::Market] {
        let s = welfare_lambda_sensitivity(&cfg, WelfareRegime::Coexistence, side, 1e-3).unwrap();
        assert!(
            s.fixed_partition_diff > 0.0,
            "{side:?} bump did not raise fixed-partition welfare: {}",
            s.fixed_partition_diff
        );
    }
    println!(
        "PASS criterion 9: bank-only welfare dominates market-only across the gap grid; \
         fixed-partition welfare rises in both liquidation efficiencies"
    );
}

#[test]
fn criterion_10_market_default_risk_dominates() {
    let cfg = baseline(0.85);
    let eq = solve_equilibrium(&cfg).unwrap();
    let d_m = eq.market_contract.unwrap().contract.d;
    for k in 0..20 {
        let theta = 1.0 + 2.0 * k as f64 / 19.0;
        let q_market = 1.0 - cfg.fam.survivor(d_m, theta).unwrap();
        let bank = solve_bank_contract(&cfg.fam, theta, cfg.lambda_b, cfg.a_bar).unwrap();
        assert!(
            q_market >= bank.default_prob - 1e-12,
            "theta = {theta}: market default {q_market} below bank {}",
            bank.default_prob
        );
    }
    println!("PASS criterion 10: pooled bond default risk weakly above the bank's for 20 types");
}

#[test]
fn criterion_11_cli_contract() {
    let bin = env!("CARGO_BIN_EXE_sde");
    let dir = std::env::temp_dir().join(format!("sde_acceptance_{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg_path = dir.join("baseline.conf");
    let write_cfg = |path: &std::path::Path, extra: &str, out: &str| {
        std::fs::write(
            path,
            format!(
                "family.kind = exponential\ntypes.lo = 1.0\ntypes.hi = 3.0\n\
                 bank.lambda = 0.9\nmarket.lambda = 0.85\ncollateral.cap = 2.0\n\
                 output.dir = {}\n{extra}",
                dir.join(out).display()
            ),
        )
        .unwrap()
    };
    write_cfg(&cfg_path, "", "run1");

    let status = Command::new(bin).args(["solve"]).arg(&cfg_path).output().unwrap();
    assert!(status.status.success(), "solve failed: {}", String::from_utf8_lossy(&status.stderr));
    let headers = [
        ("bank_menu.csv", "theta,d,m,branch,utility,default_prob"),
        ("market.csv", "d_m,m_m,pool_lo,pool_hi,branch"),
        (
            "equilibrium.csv",
            "regime,theta_ir,theta_star,W_B,W_M,W_BM,liquidation_penalty,screening_relief,extensive_margin",
        ),
    ];
    for (file, header) in headers {
        let text = std::fs::read_to_string(dir.join("run1").join(file)).unwrap();
        assert_eq!(text.lines().next().unwrap(), header, "header of {file}");
    }
    // Byte-identical rerun.
    let cfg2 = dir.join("baseline2.conf");
    write_cfg(&cfg2, "", "run2");
    let status = Command::new(bin).args(["solve"]).arg(&cfg2).output().unwrap();
    assert!(status.status.success());
    for (file, _) in headers {
        let a = std::fs::read(dir.join("run1").join(file)).unwrap();
        let b = std::fs::read(dir.join("run2").join(file)).unwrap();
        assert_eq!(a, b, "{file} differs across reruns");
    }

    // Verification passes on the baseline...
    let out = Command::new(bin).args(["verify"]).arg(&cfg_path).output().unwrap();
    assert!(out.status.success(), "verify failed: {}", String::from_utf8_lossy(&out.stdout));
    // ...and catches an artificially loosened solver tolerance.
    let loose = dir.join("loose.conf");
    write_cfg(&loose, "solver.tol = 1e-2\n", "run3");
    let out = Command::new(bin).args(["verify"]).arg(&loose).output().unwrap();
    assert_eq!(out.status.code(), Some(4), "negative control must exit 4");

    std::fs::remove_dir_all(&dir).ok();
    println!(
        "PASS criterion 11: CSV headers exact, reruns byte-identical, verification exits 0 \
         on the baseline and 4 under the loosened-tolerance negative control"
    );
}
