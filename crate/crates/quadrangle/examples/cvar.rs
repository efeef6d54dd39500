//! CVaR computed directly, through the regret formula and through its dual envelope.

use quadrangle::constructions::regret_functional_to_risk;
use quadrangle::dual::cvar_envelope;
use quadrangle::{cvar_direct, DiscreteRv, Family};

fn main() -> quadrangle::Result<()> {
    let x = DiscreteRv::uniform(&[1.0, 2.0, 3.0, 4.0, 5.0])?;
    for alpha in [0.1, 0.3, 0.6, 0.9] {
        let q = Family::Quantile { alpha }.quartet()?;
        let via_regret = regret_functional_to_risk(&q.regret_fn(), &x)?;
        let via_dual = cvar_envelope(alpha)?.support(&x)?;
        println!(
            "alpha {alpha:.1}: direct {:.6}  min_C C + V(X - C) {:.6} (argmin {:?})  sup E[QX] {:.6}",
            cvar_direct(&x, alpha)?,
            via_regret.value,
            (via_regret.statistic.lo, via_regret.statistic.hi),
            via_dual.value
        );
    }
    Ok(())
}
