//! Epi-regularized CVaR with KL and Pearson kernels over a sweep of epsilon.

use quadrangle::divergence::DivergenceFn;
use quadrangle::dual::cvar_envelope;
use quadrangle::robust::{epi_risk_dual, epi_risk_primal, EpiSpec, Kernel};
use quadrangle::DiscreteRv;

fn main() -> quadrangle::Result<()> {
    let x = DiscreteRv::new(&[-1.0, 0.0, 1.5], &[0.3, 0.5, 0.2])?;
    let alpha = 0.7;
    println!("E[X] = {:.6}, CVaR = {:.6}", x.expectation(), x.cvar(alpha));
    for phi in [DivergenceFn::kl(), DivergenceFn::pearson()] {
        for eps in [0.01, 0.1, 1.0, 10.0, 100.0] {
            let spec = EpiSpec::new(cvar_envelope(alpha)?, Kernel::Phi(phi.clone()), eps)?;
            println!(
                "{} eps {eps:>6}: primal {:.8}  dual {:.8}",
                phi.name,
                epi_risk_primal(&spec, &x)?,
                epi_risk_dual(&spec, &x)?
            );
        }
    }
    Ok(())
}
