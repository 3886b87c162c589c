//! Independent brute-force verifiers: grid search along the zero-profit
//! locus, dense sign-change scans, and midpoint Riemann sums. These share
//! no root-finding with the solvers; agreement within tolerance is the
//! verification criterion. Shipped in the library so the CLI can verify
//! arbitrary configs.

use crate::contracts::{borrower_utility, Contract};
use crate::distributions::{
    pool_mass, pool_moment, CashFlowFamily, PoolIntegrand, TypeDistribution,
};
use crate::error::{Error, Result};
use crate::market::POOL_ORDER;

/// Grid sizes for the brute-force searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridSpec {
    pub d_points: usize,
    pub m_points: usize,
    pub theta_points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            d_points: 2000,
            m_points: 2000,
            theta_points: 200,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.d_points < 10 || self.m_points < 10 || self.theta_points < 10 {
            return Err(Error::Domain(format!(
                "grid counts must be at least 10, got ({}, {}, {})",
                self.d_points, self.m_points, self.theta_points
            )));
        }
        Ok(())
    }
}

/// Best locus point found by grid search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridBest {
    pub contract: Contract,
    /// The winner sits on the collateral cap (zero-profit collateral would
    /// exceed it; the face value re-solves zero profit at `m = a_bar`).
    pub clamped: bool,
    /// Borrower expected payoff at the contract.
    pub utility: f64,
}

/// Grid search over the feasible stretch of the per-type zero-profit locus,
/// ranked by the screening objective (see the bank module): coarse pass
/// plus two local refinements around the best node.
pub fn grid_best_on_locus(
    fam: &CashFlowFamily,
    theta: f64,
    lambda: f64,
    a_bar: f64,
    spec: GridSpec,
) -> Result<GridBest> {
    spec.validate()?;
    let d_max = fam.quantile(1.0 - 1e-10, theta)?;
    let g = move |d: f64| fam.survivor_raw(d, theta);
    let dens = move |d: f64| fam.density_raw(d, theta);
    locus_search(
        d_max,
        lambda,
        a_bar,
        spec.d_points,
        &g,
        &dens,
        &|c: Contract| borrower_utility(fam, theta, c),
    )
}

/// Pooled-locus counterpart ranked by the same objective with pool-averaged
/// moments; utilities are pool averages.
pub fn grid_best_on_pooled_locus(
    fam: &CashFlowFamily,
    dist: &TypeDistribution,
    pool: (f64, f64),
    lambda_m: f64,
    a_bar: f64,
    spec: GridSpec,
) -> Result<GridBest> {
    spec.validate()?;
    if pool.1 - pool.0 < 1e-9 || pool_mass(dist, pool) < 1e-12 {
        let theta = 0.5 * (pool.0 + pool.1);
        return grid_best_on_locus(fam, theta, lambda_m, a_bar, spec);
    }
    let d_max = fam
        .quantile(1.0 - 1e-10, pool.0)?
        .max(fam.quantile(1.0 - 1e-10, pool.1)?);
    let g =
        move |d: f64| pool_moment(fam, dist, pool, d, PoolIntegrand::Survivor, POOL_ORDER).unwrap();
    let dens =
        move |d: f64| pool_moment(fam, dist, pool, d, PoolIntegrand::Density, POOL_ORDER).unwrap();
    locus_search(d_max, lambda_m, a_bar, spec.d_points, &g, &dens, &|c| {
        crate::market::pooled_utility(fam, dist, pool, c).unwrap()
    })
}

fn locus_search(
    d_max: f64,
    lambda: f64,
    a_bar: f64,
    d_points: usize,
    g: &dyn Fn(f64) -> f64,
    dens: &dyn Fn(f64) -> f64,
    utility: &dyn Fn(Contract) -> f64,
) -> Result<GridBest> {
    // Feasible iff zero profit is reachable with 0 <= m <= a_bar.
    let r = |d: f64| {
        let gv = g(d);
        d * gv + lambda * a_bar * (1.0 - gv) - 1.0
    };
    let feasible = |d: f64| {
        let gv = g(d);
        d * gv <= 1.0 && r(d) >= 0.0 && gv < 1.0 - 1e-12
    };
    let m_zp = |d: f64| {
        let gv = g(d);
        (1.0 - d * gv) / (lambda * (1.0 - gv))
    };
    // Slope of the screening objective along the locus.
    let vprime = |d: f64| ((1.0 - lambda) * g(d) - dens(d) * (d - lambda * m_zp(d))) / lambda;

    let h = d_max / d_points as f64;
    let grid: Vec<f64> = (1..=d_points).map(|k| h * k as f64).collect();
    let bisect_r = |mut a: f64, mut b: f64| {
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if r(mid) * r(a) <= 0.0 {
                b = mid;
            } else {
                a = mid;
            }
        }
        0.5 * (a + b)
    };

    // One candidate per feasible component: the argmax of the
    // cumulative-trapezoid objective, sharpened by shrinking-window passes.
    // A winner stuck at the component's left edge is the collateral-cap
    // point; its face value is re-rooted exactly on the break-even curve.
    let mut candidates: Vec<GridBest> = Vec::new();
    let mut component_edges: Vec<(f64, f64)> = Vec::new();
    let mut i = 0;
    while i < grid.len() {
        if !feasible(grid[i]) {
            i += 1;
            continue;
        }
        let start = i;
        while i < grid.len() && feasible(grid[i]) {
            i += 1;
        }
        let comp = &grid[start..i];
        // True component edges sit between the coarse nodes; bisect the
        // feasibility boundary so the search window covers the whole run.
        let c_lo = if start > 0 {
            let (mut bad, mut good) = (grid[start - 1], comp[0]);
            for _ in 0..100 {
                let mid = 0.5 * (bad + good);
                if feasible(mid) {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            good
        } else {
            comp[0]
        };
        let c_hi = if i < grid.len() {
            let (mut good, mut bad) = (comp[comp.len() - 1], grid[i]);
            for _ in 0..100 {
                let mid = 0.5 * (good + bad);
                if feasible(mid) {
                    good = mid;
                } else {
                    bad = mid;
                }
            }
            good
        } else {
            comp[comp.len() - 1]
        };
        component_edges.push((c_lo, c_hi));
        let first_pass = comp.len().max(10);
        let mut spacing = (c_hi - c_lo) / first_pass as f64;
        let mut d_best = argmax_on_grid(c_lo, c_hi, first_pass, &vprime, &feasible);
        for _ in 0..3 {
            if spacing <= 0.0 {
                break;
            }
            let lo = (d_best - 2.0 * spacing).max(c_lo);
            let hi = (d_best + 2.0 * spacing).min(c_hi);
            let n = d_points.max(1000);
            d_best = argmax_on_grid(lo, hi, n, &vprime, &feasible);
            spacing = (hi - lo) / n as f64;
        }
        // Interior maximum: polish by bisecting the objective slope.
        if d_best > c_lo + 4.0 * spacing && d_best < c_hi - 4.0 * spacing {
            let (mut a, mut b) = (d_best - 2.0 * spacing, d_best + 2.0 * spacing);
            if vprime(a) > 0.0 && vprime(b) < 0.0 {
                for _ in 0..200 {
                    let mid = 0.5 * (a + b);
                    if vprime(mid) > 0.0 {
                        a = mid;
                    } else {
                        b = mid;
                    }
                }
                d_best = 0.5 * (a + b);
            }
        }
        let at_left_edge = d_best <= c_lo + 4.0 * spacing.max(f64::EPSILON);
        let crosses_break_even = start > 0 && r(grid[start - 1]) < 0.0;
        let cand = if at_left_edge && crosses_break_even {
            // Exact break-even face value at the cap, bracketed just below
            // the first feasible node.
            let d = bisect_r(grid[start - 1], c_lo);
            GridBest {
                contract: Contract { d, m: a_bar },
                clamped: true,
                utility: utility(Contract { d, m: a_bar }),
            }
        } else {
            let c = Contract { d: d_best, m: m_zp(d_best).clamp(0.0, a_bar) };
            GridBest { contract: c, clamped: false, utility: utility(c) }
        };
        candidates.push(cand);
    }

    // Standalone break-even points at m = a_bar that touch no feasible
    // component (e.g. a_bar = 0, where break-even holds on a measure-zero
    // set the grid cannot hit).
    let mut prev = (grid[0], r(grid[0]));
    for &d in &grid[1..] {
        let rd = r(d);
        if prev.1 * rd < 0.0 {
            let root = bisect_r(prev.0, d);
            let touches = component_edges
                .iter()
                .any(|&(lo, hi)| root >= lo - 2.0 * h && root <= hi + 2.0 * h);
            if !touches && root * g(root) <= 1.0 + 1e-12 {
                let c = Contract { d: root, m: a_bar };
                candidates.push(GridBest { contract: c, clamped: true, utility: utility(c) });
            }
        }
        prev = (d, rd);
    }

    candidates
        .into_iter()
        .filter(|c| c.utility.is_finite())
        .max_by(|a, b| a.utility.total_cmp(&b.utility))
        .ok_or(Error::NoFeasiblePoint)
}

/// Argmax of the cumulative-trapezoid integral of `vprime` on a uniform
/// grid over `[lo, hi]`, restricted to feasible nodes.
fn argmax_on_grid(
    lo: f64,
    hi: f64,
    points: usize,
    vprime: &dyn Fn(f64) -> f64,
    feasible: &dyn Fn(f64) -> bool,
) -> f64 {
    if hi <= lo {
        return lo;
    }
    let n = points.max(10);
    let step = (hi - lo) / n as f64;
    let mut best = (lo, 0.0);
    let mut acc = 0.0;
    let mut prev_v = vprime(lo);
    let mut prev_d = lo;
    for k in 1..=n {
        let d = lo + step * k as f64;
        if !feasible(d) {
            continue;
        }
        let v = vprime(d);
        acc += 0.5 * (prev_v + v) * (d - prev_d);
        prev_v = v;
        prev_d = d;
        if acc > best.1 {
            best = (d, acc);
        }
    }
    best.0
}

/// Every adjacent grid pair on which `f` changes sign.
pub fn scan_sign_changes<F: Fn(f64) -> f64>(
    f: F,
    interval: (f64, f64),
    points: usize,
) -> Vec<(f64, f64)> {
    assert!(points >= 10, "scan needs at least 10 points");
    let (a, b) = interval;
    let mut out = Vec::new();
    let mut prev = (a, f(a));
    for k in 1..points {
        let x = a + (b - a) * k as f64 / (points - 1) as f64;
        let fx = f(x);
        if prev.1 * fx < 0.0 {
            out.push((prev.0, x));
        }
        prev = (x, fx);
    }
    out
}

/// Midpoint-rule integral of `f` over an interval.
pub fn riemann_integral<F: Fn(f64) -> f64>(f: F, interval: (f64, f64), points: usize) -> f64 {
    assert!(points >= 1000, "Riemann oracle needs at least 1000 points");
    let (a, b) = interval;
    let step = (b - a) / points as f64;
    let mut acc = 0.0;
    for k in 0..points {
        acc += f(a + step * (k as f64 + 0.5));
    }
    acc * step
}
