//! Quantile regression by LP and the matching deviation problem.

use quadrangle::regression::{fit_named, regression_equivalence_check, Dataset, Model};
use quadrangle::Family;

fn main() -> quadrangle::Result<()> {
    let features: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64]).collect();
    let target = vec![1.0, 1.8, 3.1, 3.7, 5.4, 5.9, 7.2, 7.5, 9.8, 9.9, 11.0, 13.5];
    let data = Dataset::new(features, target, None)?;

    for alpha in [0.1, 0.5, 0.9] {
        let fit = fit_named(Model::Quantile { alpha }, &data)?;
        println!(
            "alpha {alpha}: y = {:.4} + {:.4} x, error {:.6} ({})",
            fit.intercept, fit.coefficients[0], fit.objective, fit.method
        );
        let f = Family::Quantile { alpha };
        let rep = regression_equivalence_check(&f.quartet()?, &f.error_fn()?, &data)?;
        println!(
            "  min error {:.8}, min deviation with 0 in statistic {:.8}, gap {:.1e}",
            rep.error_objective, rep.deviation_objective, rep.gap
        );
    }
    let fit = fit_named(Model::ExpectileMse { q: 0.5 }, &data)?;
    println!("least squares: y = {:.4} + {:.4} x", fit.intercept, fit.coefficients[0]);
    Ok(())
}
