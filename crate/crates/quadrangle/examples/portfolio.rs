//! Minimum-risk long-only portfolios over return scenarios.

use quadrangle::robust::{cvar_portfolio_lp, portfolio_optimize, PortfolioRisk, Scenarios};
use quadrangle::solvers::Budget;
use quadrangle::Family;

fn main() -> quadrangle::Result<()> {
    let returns = vec![
        vec![0.02, 0.01, -0.01],
        vec![-0.03, 0.00, 0.02],
        vec![0.05, 0.02, -0.02],
        vec![-0.01, -0.01, 0.03],
        vec![0.01, 0.015, 0.00],
    ];
    let s = Scenarios::new(returns, None)?;
    println!("asset means {:?}", s.asset_means());
    let lp = cvar_portfolio_lp(0.8, &s, None)?;
    println!("CVaR_0.8 LP: w = {:?}, risk {:.6}", lp.weights, lp.risk);
    let target = Some(0.008);
    let lp = cvar_portfolio_lp(0.8, &s, target)?;
    println!("  with mean return 0.008: w = {:?}, risk {:.6}", lp.weights, lp.risk);
    let q = Family::ExpectileMse { q: 0.8 }.quartet()?;
    let r = portfolio_optimize(&PortfolioRisk::Regret(q), &s, None, &Budget::default())?;
    println!("expectile risk via regret: w = {:?}, risk {:.6} ({})", r.weights, r.risk, r.method);
    Ok(())
}
