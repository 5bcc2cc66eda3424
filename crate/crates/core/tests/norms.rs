use holmstedt_core::couples::LogProfile;
use holmstedt_core::phi::{Exponent, MinProfile, Side, Support};
use holmstedt_core::quadrature::Kink;
use holmstedt_core::{Element, Phi, Seq, Sv};
use proptest::prelude::*;

fn phi(theta: f64, q: f64, c: f64) -> Phi {
    Phi::new(theta, Exponent::Finite(q), Sv::constant(c).unwrap()).unwrap()
}

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn min_norm_and_canonical_weight() {
    let p = phi(0.5, 1.0, 1.0);
    assert!(rel(p.norm_min_by_quadrature(1.0).unwrap(), 4.0) < 1e-6);
    assert!(rel(p.norm_min(1.0).unwrap(), 4.0) < 1e-12);
    let (p0, p1) = (phi(0.25, 1.0, 1.0), phi(0.75, 1.0, 1.0));
    for t in [1e-4, 0.3, 1.0, 7.0, 1e4] {
        let rho = p0.norm_min_by_quadrature(t).unwrap() / p1.norm_min_by_quadrature(t).unwrap();
        assert!(rel(rho, t.sqrt()) < 1e-6, "t={t} rho={rho}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn closed_forms_match_quadrature(theta in 0.05f64..0.95, q in 1.0f64..4.0, c in 0.1f64..10.0, x in -7.0f64..7.0) {
        let p = phi(theta, q, c);
        let by_quad = p.ln_norm_min_by_quadrature(x);
        prop_assert!((p.ln_norm_min(x) - by_quad).abs() < 1e-6);
        let tail = p.ln_norm_with(|_| 0.0, &[], Support::tail(x.exp()));
        prop_assert!((p.ln_norm_tail_char(x) - tail).abs() < 1e-6);
        let head = p.ln_norm_with(|y| y, &[], Support::head(x.exp()));
        prop_assert!((p.ln_norm_head_u(x) - head).abs() < 1e-6);
    }

    #[test]
    fn norm_is_lattice_monotone(theta in 0.05f64..0.95, q in 1.0f64..3.0, t in 0.01f64..100.0, shrink in 0.0f64..0.9, bump in 0.0f64..2.0) {
        let p = Phi::new(theta, Exponent::Finite(q), Sv::broken_log(1.0, -1.0)).unwrap();
        let lt = t.ln();
        let kinks = [Kink::at(lt)];
        let big = p.ln_norm_with(|y| y.min(lt), &kinks, Support::all());
        let small = p.ln_norm_with(|y| y.min(lt) + (1.0 - shrink).ln() - bump * (-y * y).exp(), &kinks, Support::all());
        prop_assert!(small <= big + 1e-12);
        let sub = p.ln_norm_with(|y| y.min(lt), &kinks, Support::new(t / 10.0, t * 10.0).unwrap());
        prop_assert!(sub <= big + 1e-12);
    }

    #[test]
    fn homogeneity(theta in 0.05f64..0.95, q in 1.0f64..3.0, lambda in 1e-3f64..1e3) {
        let p = Phi::new(theta, Exponent::Finite(q), Sv::broken_log(-1.0, 2.0)).unwrap();
        let g = MinProfile { t: 2.0 };
        let a = p.ln_norm(&g, Support::all());
        let b = p.ln_norm_with(|y| lambda.ln() + g.ln_value(y), &g.kinks(), Support::all());
        prop_assert!((b - a - lambda.ln()).abs() < 1e-9);
    }

    #[test]
    fn monotone_reductions(
        coeffs in prop::collection::vec(0.1f64..5.0, 1..5),
        w0 in prop::collection::vec(0.01f64..100.0, 5),
        w1 in prop::collection::vec(0.01f64..100.0, 5),
        theta in 0.1f64..0.9,
        t in 1e-2f64..1e2,
    ) {
        let n = coeffs.len();
        let k = Element::WeightedSeq(Seq::new(coeffs, w0[..n].to_vec(), w1[..n].to_vec()).unwrap());
        let p = Phi::new(theta, Exponent::Finite(1.5), Sv::broken_log(-2.0, 1.0)).unwrap();
        let kt = k.k(t);
        let head = p.norm_trunc_profile(&k, Side::Head, t).unwrap();
        prop_assert!(head >= kt / t * p.norm_head_u(t).unwrap() * (1.0 - 1e-9));
        let tail = p.norm_trunc_profile(&k, Side::Tail, t).unwrap();
        prop_assert!(tail >= kt * p.norm_tail_char(t).unwrap() * (1.0 - 1e-9));
    }
}

#[test]
fn sup_norm_of_min() {
    let p = Phi::new(0.25, Exponent::Infinite, Sv::one()).unwrap();
    // sup_u u^{-1/4} min(u, t) = t^{3/4}
    for t in [1e-3, 1.0, 50.0] {
        assert!(rel(p.norm_min(t).unwrap(), t.powf(0.75)) < 1e-9);
    }
}
