//! Mixing, scaling and reverting quadrangles.

use quadrangle::constructions::{mix_quadrangles, revert_quadrangles, scale_quadrangle};
use quadrangle::{DiscreteRv, Family, ScaleMode};

fn main() -> quadrangle::Result<()> {
    let x = DiscreteRv::new(&[-3.0, -1.0, 0.0, 2.0], &[0.1, 0.3, 0.4, 0.2])?;
    let cvar = Family::Quantile { alpha: 0.9 }.quartet()?;
    let mse = Family::ExpectileMse { q: 0.7 }.quartet()?;

    let mix = mix_quadrangles(&[cvar.clone(), mse.clone()], &[0.25, 0.75])?;
    println!("{}: risk {:.6} = 0.25 * {:.6} + 0.75 * {:.6}", mix.label, mix.risk(&x), cvar.risk(&x), mse.risk(&x));
    println!("  statistic {:?}", mix.statistic(&x));

    for mode in [ScaleMode::Affine, ScaleMode::Perspective] {
        let s = scale_quadrangle(&mse, 0.5, mode)?;
        println!("{}: risk {:.6}, deviation {:.6}", s.label, s.risk(&x), s.deviation(&x));
    }

    let rev = revert_quadrangles(&cvar, &mse);
    println!(
        "{}: deviation {:.6} = ({:.6} + {:.6}) / 2",
        rev.label,
        rev.deviation(&x),
        cvar.deviation(&x),
        mse.deviation(&x.neg())
    );
    Ok(())
}
