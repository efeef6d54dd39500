use approx::abs_diff_eq;
use proptest::prelude::*;
use quadrangle::{cvar_direct, DiscreteRv, Family};

fn rv() -> impl Strategy<Value = DiscreteRv> {
    prop::collection::vec((-10.0f64..10.0, 0.01f64..1.0), 1..10).prop_map(|atoms| {
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        DiscreteRv::from_atoms(atoms.into_iter().map(|(v, p)| (v, p / total))).unwrap()
    })
}

proptest! {
    #[test]
    fn cvar_between_mean_and_sup(x in rv(), alpha in 0.0f64..0.999) {
        let c = cvar_direct(&x, alpha).unwrap();
        prop_assert!(c >= x.expectation() - 1e-9 && c <= x.ess_sup() + 1e-9);
    }

    #[test]
    fn cvar_nondecreasing_in_level(x in rv(), a in 0.0f64..0.99, b in 0.0f64..0.99) {
        let (lo, hi) = (a.min(b), a.max(b));
        prop_assert!(x.cvar(lo) <= x.cvar(hi) + 1e-9);
    }

    #[test]
    fn risk_is_translation_equivariant(x in rv(), c in -5.0f64..5.0, idx in 0usize..9) {
        let q = Family::defaults()[idx].quartet().unwrap();
        if q.check_domain(&x).is_ok() && q.check_domain(&x.shift(c)).is_ok() {
            let scale = 1.0 + x.l2_norm() + c.abs();
            prop_assert!(abs_diff_eq!(q.risk(&x.shift(c)), q.risk(&x) + c, epsilon = 1e-7 * scale));
            prop_assert!(abs_diff_eq!(q.deviation(&x.shift(c)), q.deviation(&x), epsilon = 1e-7 * scale));
        }
    }

    #[test]
    fn quantile_risk_is_positively_homogeneous(x in rv(), alpha in 0.0f64..0.99, lambda in 0.0f64..10.0) {
        let q = Family::Quantile { alpha }.quartet().unwrap();
        let scale = 1.0 + lambda * x.l2_norm();
        prop_assert!(abs_diff_eq!(q.risk(&x.scale(lambda)), lambda * q.risk(&x), epsilon = 1e-9 * scale));
    }

    #[test]
    fn statistic_shifts_with_the_variable(x in rv(), c in -5.0f64..5.0, q in 0.05f64..0.95) {
        let quad = Family::ExpectileMse { q }.quartet().unwrap();
        let (s, t) = (quad.statistic(&x), quad.statistic(&x.shift(c)));
        prop_assert!(abs_diff_eq!(t.lo, s.lo + c, epsilon = 1e-7 * (1.0 + x.l2_norm())));
    }
}
