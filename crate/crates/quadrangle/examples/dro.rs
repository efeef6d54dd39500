//! Distributionally robust portfolios over KL and total variation balls.

use quadrangle::divergence::DivergenceFn;
use quadrangle::robust::{dro_solve, evar_portfolio, DroProblem, Scenarios};
use quadrangle::solvers::Budget;

fn main() -> quadrangle::Result<()> {
    let returns = vec![vec![0.03, 0.01], vec![-0.04, 0.00], vec![0.02, 0.015], vec![0.01, -0.005]];
    let s = Scenarios::new(returns, Some(vec![0.3, 0.2, 0.3, 0.2]))?;
    for (phi, tau) in [(DivergenceFn::kl(), 0.2), (DivergenceFn::kl(), 1.0), (DivergenceFn::tv(), 0.3)] {
        let name = phi.name.clone();
        let res = dro_solve(&DroProblem { scenarios: s.clone(), phi, tau, target_mean: None, budget: Budget::default() })?;
        println!(
            "{name} tau {tau}: w = {:.4?}, worst-case loss {:.6} (envelope {:.6}, gap {:.1e})",
            res.weights, res.value, res.envelope_value, res.gap
        );
        println!("  worst-case density {:.4?}", res.density);
    }
    let e = evar_portfolio(&s, 1.0, None, &Budget::default())?;
    println!("EVaR portfolio at beta 1: w = {:.4?}, risk {:.6}", e.weights, e.risk);
    Ok(())
}
