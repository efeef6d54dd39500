//! The KL ball family: from the mean at small radius to ess sup at large
//! radius, the perspective route against the envelope route, and EVaR.

use quadrangle::divergence::{
    evar, family_eval_envelope, family_eval_perspective, DivergenceFn, StochasticDivergenceJ,
};
use quadrangle::DiscreteRv;

fn main() -> quadrangle::Result<()> {
    let x = DiscreteRv::new(&[0.0, 1.0, 2.0, 4.0], &[0.4, 0.3, 0.2, 0.1])?;
    let j = StochasticDivergenceJ::from_phi(DivergenceFn::kl(), true);
    let log_mgf = |x: &DiscreteRv| {
        let m = x.ess_sup();
        m + x.expect(|v| (v - m).exp()).ln()
    };
    println!("E[X] = {}, ess sup = {}", x.expectation(), x.ess_sup());
    for tau in [1e-4, 0.01, 0.1, 0.5, 1.0, 2.0, 10.0] {
        let env = family_eval_envelope(&j, tau, &x)?;
        let per = family_eval_perspective(log_mgf, tau, &x)?;
        let (e, _) = evar(&x, tau);
        println!(
            "tau {tau:>7}: envelope {:.8}  perspective {:.8} (lambda {:.4})  evar {:.8}",
            env.value, per.value, per.lambda, e
        );
    }
    Ok(())
}
