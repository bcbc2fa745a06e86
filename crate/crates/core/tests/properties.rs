use g2roll::algebra::{omul, Quaternion, SplitOctonion, UnitQuaternion};
use g2roll::invariants::{char_membership, CotangentState};
use g2roll::octmodel::{self, derivation_algebra, DerivationAlgebra};
use g2roll::rolling::{self, bracket, normalize, CoeffPair, ConfigPoint, Rho};
use proptest::prelude::*;

fn octonion() -> impl Strategy<Value = SplitOctonion> {
    prop::array::uniform8(-2.0f64..2.0).prop_map(SplitOctonion::from_array)
}

fn unit_quaternion() -> impl Strategy<Value = UnitQuaternion> {
    prop::array::uniform4(-1.0f64..1.0)
        .prop_filter("away from zero", |v| v.iter().map(|c| c * c).sum::<f64>() > 1e-2)
        .prop_map(|v| UnitQuaternion::new_normalize(Quaternion::new(v[0], v[1], v[2], v[3])).unwrap())
}

fn config() -> impl Strategy<Value = ConfigPoint> {
    (unit_quaternion(), unit_quaternion()).prop_map(|(a, b)| normalize(a, b))
}

fn coeff_pair() -> impl Strategy<Value = CoeffPair> {
    prop::array::uniform6(-1.0f64..1.0).prop_map(CoeffPair::from_vec6)
}

fn close(a: SplitOctonion, b: SplitOctonion, scale: f64) -> bool {
    (a - b).euclid_norm() <= 1e-12 * scale.max(1.0)
}

proptest! {
    #[test]
    fn norm_is_multiplicative(x in octonion(), y in octonion()) {
        let scale = (x.euclid_norm() * y.euclid_norm()).powi(2);
        prop_assert!((omul(x, y).q_form() - x.q_form() * y.q_form()).abs() <= 1e-12 * scale.max(1.0));
    }

    #[test]
    fn product_is_alternative_and_flexible(x in octonion(), y in octonion()) {
        let scale = x.euclid_norm().powi(2) * y.euclid_norm();
        prop_assert!(close(omul(x, omul(x, y)), omul(omul(x, x), y), scale));
        prop_assert!(close(omul(omul(y, x), x), omul(y, omul(x, x)), scale));
        prop_assert!(close(omul(omul(x, y), x), omul(x, omul(y, x)), scale));
    }

    #[test]
    fn conjugation_reverses_products(x in octonion(), y in octonion()) {
        let scale = x.euclid_norm() * y.euclid_norm();
        prop_assert!(close(omul(x, y).conj(), omul(y.conj(), x.conj()), scale));
        let n = omul(x, x.conj());
        prop_assert!(close(n, SplitOctonion::basis(0).scale(x.q_form()), x.euclid_norm().powi(2)));
    }

    #[test]
    fn derivations_obey_the_leibniz_rule(
        coeffs in prop::collection::vec(-1.0f64..1.0, 14),
        x in octonion(),
        y in octonion(),
    ) {
        let alg = derivation_algebra();
        let d: [[f64; 8]; 8] = std::array::from_fn(|r| {
            std::array::from_fn(|c| coeffs.iter().zip(&alg.basis).map(|(k, b)| k * b[r][c]).sum())
        });
        let lhs = DerivationAlgebra::apply(&d, omul(x, y));
        let rhs = omul(DerivationAlgebra::apply(&d, x), y) + omul(x, DerivationAlgebra::apply(&d, y));
        prop_assert!(close(lhs, rhs, 10.0 * x.euclid_norm() * y.euclid_norm()));
        prop_assert!(DerivationAlgebra::apply(&d, SplitOctonion::basis(0)).euclid_norm() <= 1e-10);
    }

    #[test]
    fn phi_lands_on_the_cone_and_inverts(p in config()) {
        let x = octmodel::phi(&p);
        prop_assert!(octmodel::cone_member(x.octonion()));
        let back = octmodel::phi(&octmodel::phi_inv(&x));
        prop_assert!((back.octonion() - x.octonion()).euclid_norm() <= 1e-12);
    }

    #[test]
    fn pushforward_is_annihilated_only_at_three(p in config(), z in prop::array::uniform2(-1.0f64..1.0)) {
        let n = z[0].hypot(z[1]);
        prop_assume!(n > 1e-2);
        prop_assert!(octmodel::pushforward_residual(&p, z, 3.0) <= 1e-10 * n);
        prop_assert!(octmodel::pushforward_residual(&p, z, 2.0) > 1e-3 * n);
    }

    #[test]
    fn spherized_delta_is_null(p in config()) {
        prop_assert!(octmodel::nurowski_quadric_check(&octmodel::phi(&p)).unwrap() <= 1e-10);
    }

    #[test]
    fn bracket_is_a_lie_bracket(u in coeff_pair(), v in coeff_pair(), w in coeff_pair()) {
        prop_assert!((bracket(u, v) + bracket(v, u)).norm() <= 1e-14);
        let jac = bracket(u, bracket(v, w)) + bracket(v, bracket(w, u)) + bracket(w, bracket(u, v));
        prop_assert!(jac.norm() <= 1e-13);
    }

    #[test]
    fn growth_vector_is_generic(p in config(), rho in 1.01f64..50.0) {
        prop_assert_eq!(rolling::flag(Rho::Finite(rho), &p, 5).unwrap().dims, vec![2, 3, 5]);
        prop_assert_eq!(rolling::flag(Rho::Finite(1.0), &p, 5).unwrap().dims, vec![2, 2]);
    }

    #[test]
    fn regular_states_lie_on_the_characteristic_variety(p in config(), angle in 0.0f64..6.3, rho in 1.1f64..20.0) {
        let r = Rho::Finite(rho);
        let z = CotangentState::regular(r, p, angle).unwrap();
        prop_assert_eq!(char_membership(&z, r).unwrap(), (true, false));
        prop_assert!((z.speed(r).unwrap() - 1.0).abs() <= 1e-12);
        prop_assert_eq!(char_membership(&z.scaled(3.0), r).unwrap(), (true, false));
    }
}
