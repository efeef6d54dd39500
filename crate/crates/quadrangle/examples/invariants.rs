//! The invariant suite over the catalog on random variables.

use quadrangle::checks::quadrangle_checks;
use quadrangle::sampling::random_batch;
use quadrangle::Family;

fn main() -> quadrangle::Result<()> {
    let rvs = random_batch(3, 40, 6, -4.0, 4.0);
    for f in Family::defaults() {
        let rows = quadrangle_checks(&f.quartet()?, Some(&f.error_fn()?), &rvs);
        let bad: Vec<_> = rows.iter().filter(|r| !r.pass).map(|r| r.name).collect();
        println!("{:<16} {} checks, {}", f.name(), rows.len(), if bad.is_empty() { "all pass".into() } else { bad.join(", ") });
    }
    Ok(())
}
