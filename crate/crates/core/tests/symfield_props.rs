mod common;

use std::sync::{Arc, OnceLock};

use common::*;
use fedosov::fedosov::{FedosovSolution, StarFunction};
use fedosov::symfield::{eta_of, gamma_x_crosscheck, QuantizedDerivation, Quantizer, SymplecticVectorField};
use fedosov::weyl::WeylForm;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn solutions() -> &'static [FedosovSolution] {
    static S: OnceLock<Vec<FedosovSolution>> = OnceLock::new();
    S.get_or_init(|| vec![flat(4), nonflat(4), nonflat_second(4)])
}

fn hamiltonian(sol: &FedosovSolution, h: &fedosov::ring::Poly) -> SymplecticVectorField {
    SymplecticVectorField::hamiltonian(sol.ctx(), h).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn partial_commutes_with_lie_derivative_up_to_gamma_x(h in arb_poly(3), seed in 0u64..1000, which in 0usize..3) {
        let sol = &solutions()[which];
        let c = Arc::clone(sol.ctx());
        let x = hamiltonian(sol, &h);
        let conn = sol.connection();
        let diff = &gamma_x_crosscheck(&x, conn).unwrap().connection_form(&c) - &conn.connection_form(&c);
        let a = rand_form(&mut ChaCha8Rng::seed_from_u64(seed), &c);
        let lhs = &sol.partial(&x.lie_derivative(&a).unwrap()).unwrap()
            - &x.lie_derivative(&sol.partial(&a).unwrap()).unwrap();
        prop_assert_eq!(lhs, diff.commutator_div_h(&a).unwrap());
    }

    #[test]
    fn d_commutes_with_lie_derivative_up_to_eta(h in arb_poly(3), seed in 0u64..1000, which in 0usize..3) {
        let sol = &solutions()[which];
        let c = Arc::clone(sol.ctx());
        let x = hamiltonian(sol, &h);
        let eta = eta_of(&x, sol).unwrap().form().with_context(&c).unwrap();
        let a = rand_form(&mut ChaCha8Rng::seed_from_u64(seed), &c);
        prop_assert_eq!(x.lie_derivative(&a.delta()).unwrap(), x.lie_derivative(&a).unwrap().delta());
        let lhs = &sol.op_d(&x.lie_derivative(&a).unwrap()).unwrap()
            - &x.lie_derivative(&sol.op_d(&a).unwrap()).unwrap();
        prop_assert!(lhs.agrees_upto(&eta.commutator_div_h(&a).unwrap(), i64::from(sol.order()) - 2));
    }

    #[test]
    fn eta_and_u_are_linear(f in arb_poly(3), g in arb_poly(3), which in 0usize..3) {
        let sol = &solutions()[which];
        let (x, y) = (hamiltonian(sol, &f), hamiltonian(sol, &g));
        let sum = x.try_add(&y).unwrap();
        let (ex, ey, es) = (eta_of(&x, sol).unwrap(), eta_of(&y, sol).unwrap(), eta_of(&sum, sol).unwrap());
        prop_assert_eq!(es.form(), &(ex.form() + ey.form()));
        let u = |v: &SymplecticVectorField| QuantizedDerivation::new(v, sol).unwrap().u().form().clone();
        prop_assert_eq!(u(&sum), &u(&x) + &u(&y));
    }

    #[test]
    fn quantized_fields_are_derivations(h in arb_poly(3), f in arb_poly(2), g in arb_poly(2), which in 0usize..3) {
        let sol = &solutions()[which];
        let c = sol.ctx();
        let x = hamiltonian(sol, &h);
        let q = Quantizer::new(sol);
        let (f, g) = (StarFunction::from_poly(c, f), StarFunction::from_poly(c, g));
        let lhs = q.apply(&x, &sol.star(&f, &g).unwrap()).unwrap();
        let rhs = &sol.star(&q.apply(&x, &f).unwrap(), &g).unwrap() + &sol.star(&f, &q.apply(&x, &g).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
        prop_assert!(q.apply(&x, &StarFunction::one(c)).unwrap().is_zero());
        prop_assert_eq!(q.apply(&x, &f).unwrap().classical(), x.apply(&f.classical()));
    }

    #[test]
    fn tau_satisfies_the_derivation_commutator(h1 in arb_poly(3), h2 in arb_poly(3), f in arb_poly(2), which in 1usize..3) {
        let sol = &solutions()[which];
        let (x, y) = (hamiltonian(sol, &h1), hamiltonian(sol, &h2));
        let q = Quantizer::new(sol);
        let f = StarFunction::from_poly(sol.ctx(), f);
        let t = q.tau(&x, &y).unwrap();
        prop_assert!(t.coefficient(0).is_zero());
        prop_assert_eq!(q.tau(&y, &x).unwrap(), -&t);
        let lhs = &(&q.apply(&x, &q.apply(&y, &f).unwrap()).unwrap() - &q.apply(&y, &q.apply(&x, &f).unwrap()).unwrap())
            - &q.apply(&x.bracket(&y).unwrap(), &f).unwrap();
        prop_assert_eq!(lhs, sol.star_commutator(&t, &f).unwrap());
    }
}

#[test]
fn flatness_of_eta_and_u() {
    for sol in solutions() {
        let c = sol.ctx();
        for (_, x) in fixture_fields(c) {
            let q = QuantizedDerivation::new(&x, sol).unwrap();
            let ext = sol.ctx_extended();
            let d_eta = sol.op_d(q.eta().form()).unwrap();
            assert!(d_eta.agrees_upto(&WeylForm::zero(ext), i64::from(ext.order()) - 1));
            assert!(q.u().h_range().is_none_or(|(lo, _)| lo >= -1));
        }
    }
}
