//! Expectiles from the squared asymmetric error and from the piecewise linear regret.

use quadrangle::measures::expectile_value;
use quadrangle::{DiscreteRv, Family};

fn main() -> quadrangle::Result<()> {
    let x = DiscreteRv::new(&[-1.0, 0.0, 2.0, 5.0], &[0.3, 0.3, 0.3, 0.1])?;
    for q in [0.55, 0.75, 0.9] {
        let k = (1.0 - q) / (2.0 * q - 1.0);
        let mse = Family::ExpectileMse { q }.quartet()?.statistic(&x);
        let pl = Family::ExpectilePl { k }.quartet()?;
        println!(
            "q {q}: root {:.8}  squared error {:.8}  pl (k = {k:.4}) {:.8}  risk {:.6}",
            expectile_value(&x, q)?,
            mse.lo,
            pl.statistic(&x).lo,
            pl.risk(&x)
        );
    }
    Ok(())
}
