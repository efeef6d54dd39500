//! Every catalog quadrangle evaluated on one random variable.

use quadrangle::{DiscreteRv, Family};

fn main() -> quadrangle::Result<()> {
    let x = DiscreteRv::new(&[-2.0, -0.5, 0.0, 1.0, 3.0], &[0.1, 0.2, 0.3, 0.25, 0.15])?;
    println!("E[X] = {:.4}", x.expectation());
    println!("{:<22} {:>9} {:>9} {:>9} {:>9}  statistic", "quadrangle", "risk", "dev", "regret", "error");
    for f in Family::defaults() {
        let q = f.quartet()?;
        let v = q.evaluate(&x)?;
        println!(
            "{:<22} {:>9.4} {:>9.4} {:>9.4} {:>9.4}  [{:.4}, {:.4}]",
            q.label, v.risk, v.deviation, v.regret, v.error, v.statistic.lo, v.statistic.hi
        );
    }
    Ok(())
}
