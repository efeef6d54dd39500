//! Dual envelopes of catalog risks with sampled clause checks.

use quadrangle::dual::{dual_axiom_check, envelope_extract, DualKind};
use quadrangle::{DiscreteRv, Family};

fn main() -> quadrangle::Result<()> {
    let x = DiscreteRv::new(&[-1.0, 0.5, 2.0], &[0.5, 0.3, 0.2])?;
    for f in [Family::Quantile { alpha: 0.8 }, Family::MeanPl, Family::ExpectilePl { k: 0.5 }] {
        let q = f.quartet()?;
        let env = envelope_extract(&f, DualKind::Risk)?;
        let s = env.support(&x)?;
        println!("{}: R(X) = {:.6}, sup E[QX] = {:.6} via {}", q.label, q.risk(&x), s.value, s.method);
        if let Some(d) = s.density {
            println!("  maximizing density {d:?}");
        }
        for c in dual_axiom_check(&env, DualKind::Risk, 4, 100, 7).clauses {
            println!("  [{}] {}", if c.pass { "ok" } else { "FAIL" }, c.name);
        }
    }
    Ok(())
}
