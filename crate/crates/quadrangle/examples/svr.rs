//! Insensitive-loss regression and nu-SVC through CVaR.

use quadrangle::measures::{qsau_alpha_set, qsau_statistic_union};
use quadrangle::regression::{fit_named, nu_svc, Dataset, Model};

fn main() -> quadrangle::Result<()> {
    let y = vec![0.0, 0.4, 1.1, 1.3, 2.0, 2.6, 3.9];
    let data = Dataset::intercept_only(y, None)?;
    let x = data.residual_rv(0.0, &[]);
    let eps = 0.65;
    let fit = fit_named(Model::Svr { eps }, &data)?;
    println!("svr eps {eps}: constant fit {:.6}, error {:.6}", fit.intercept, fit.objective);
    println!("  levels {:?}", qsau_alpha_set(&x, eps));
    println!("  statistic union {:?}", qsau_statistic_union(&x, eps));

    let features = vec![vec![0.0, 1.0], vec![1.0, 1.5], vec![0.5, 2.0], vec![2.0, 0.0], vec![3.0, 0.5], vec![2.5, -0.5]];
    let labels = vec![1.0, 1.0, 1.0, -1.0, -1.0, -1.0];
    let svc = nu_svc(0.5, &Dataset::new(features, labels, None)?)?;
    println!("nu-svc: w = {:?}, b = {:.4}, objective {:.6}", svc.direction, svc.intercept, svc.objective);
    Ok(())
}
