mod common;

use std::sync::{Arc, OnceLock};

use common::*;
use fedosov::fedosov::{FedosovSolution, StarFunction};
use fedosov::liecross::{
    CrossElement, CrossPairElement, CrossProduct, LieAction, LieAlgebraPresentation, Strategy as Rewrite,
};
use fedosov::ring::{rat, Poly};
use proptest::prelude::*;

fn solutions() -> &'static [FedosovSolution] {
    static S: OnceLock<Vec<FedosovSolution>> = OnceLock::new();
    S.get_or_init(|| vec![flat(4), nonflat(4), nonflat_second(4)])
}

fn abelian_action(sol: &FedosovSolution) -> LieAction {
    let c = sol.ctx();
    LieAction::new(
        LieAlgebraPresentation::abelian(names(2)).unwrap(),
        vec![d(c, 0), d(c, 1)],
    )
    .unwrap()
}

fn actions(sol: &FedosovSolution) -> Vec<LieAction> {
    vec![
        abelian_action(sol),
        two_dim_action(sol.ctx()),
        three_dim_action(sol.ctx()),
    ]
}

fn arb_word(dim: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..dim, 0..3).prop_map(|mut w| {
        w.sort_unstable();
        w
    })
}

fn element(sol: &FedosovSolution, p: Poly, w: Vec<usize>) -> CrossElement {
    CrossElement::monomial(&StarFunction::from_poly(sol.ctx(), p), w).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn pair_bracket_is_a_lie_bracket(
        a in arb_poly(2), b in arb_poly(2), c in arb_poly(2),
        g in prop::collection::vec(-3i64..=3, 9),
        which in 0usize..3, act in 0usize..3,
    ) {
        let sol = &solutions()[which];
        let action = actions(sol).swap_remove(act);
        let m = action.algebra().dim();
        let cp = CrossProduct::new(action, sol).unwrap();
        let pair = |p: Poly, k: usize| CrossPairElement {
            a: StarFunction::from_poly(sol.ctx(), p),
            g: g[3 * k..3 * k + m].iter().map(|&n| rat(n, 1)).collect(),
        };
        let (u, v, w) = (pair(a, 0), pair(b, 1), pair(c, 2));
        let br = |p: &CrossPairElement, q: &CrossPairElement| cp.pair_bracket(p, q).unwrap();
        prop_assert!(br(&u, &v).try_add(&br(&v, &u)).unwrap().is_zero());
        let jac = br(&u, &br(&v, &w))
            .try_add(&br(&v, &br(&w, &u)))
            .unwrap()
            .try_add(&br(&w, &br(&u, &v)))
            .unwrap();
        prop_assert!(jac.is_zero());
    }

    #[test]
    fn cross_product_is_associative(
        p in arb_poly(1), q in arb_poly(1), r in arb_poly(1),
        w1 in arb_word(3), w2 in arb_word(3), w3 in arb_word(3),
        which in 0usize..3,
    ) {
        let sol = &solutions()[which];
        let cp = CrossProduct::new(three_dim_action(sol.ctx()), sol).unwrap();
        let (a, b, c) = (element(sol, p, w1), element(sol, q, w2), element(sol, r, w3));
        let left = cp.mul(&cp.mul(&a, &b).unwrap(), &c).unwrap();
        let right = cp.mul(&a, &cp.mul(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn functions_embed_as_a_subalgebra(f in arb_poly(3), g in arb_poly(3), which in 0usize..3) {
        let sol = &solutions()[which];
        let cp = CrossProduct::new(two_dim_action(sol.ctx()), sol).unwrap();
        let (f, g) = (StarFunction::from_poly(sol.ctx(), f), StarFunction::from_poly(sol.ctx(), g));
        let prod = cp.mul(&CrossElement::function(&f), &CrossElement::function(&g)).unwrap();
        prop_assert_eq!(prod, CrossElement::function(&sol.star(&f, &g).unwrap()));
    }

    #[test]
    fn normal_forms_do_not_depend_on_the_strategy(w in prop::collection::vec(0usize..3, 0..5), which in 0usize..3) {
        let sol = &solutions()[which];
        for action in actions(sol) {
            let m = action.algebra().dim();
            let w: Vec<usize> = w.iter().map(|i| i % m).collect();
            let cp = CrossProduct::new(action, sol).unwrap();
            prop_assert_eq!(
                cp.normalize_word(&w, Rewrite::Leftmost).unwrap(),
                cp.normalize_word(&w, Rewrite::Rightmost).unwrap()
            );
        }
    }
}

#[test]
fn abelian_generators_commute_up_to_tau() {
    // the first nonzero term of tau(d1, d2) sits at h^3
    let sol = &nonflat_second(6);
    let c = Arc::clone(sol.ctx());
    let cp = CrossProduct::new(abelian_action(sol), sol).unwrap();
    let (e1, e2) = (CrossElement::generator(&c, 0), CrossElement::generator(&c, 1));
    let comm = cp
        .mul(&e1, &e2)
        .unwrap()
        .try_sub(&cp.mul(&e2, &e1).unwrap())
        .unwrap();
    let tau = cp.tau_basis(0, 1).unwrap();
    assert!(!tau.is_zero());
    assert_eq!(comm, CrossElement::function(&tau));
    assert!(comm.classical_limit().is_zero());
}

#[test]
fn concurrent_products_agree() {
    let sol = &solutions()[2];
    let c = Arc::clone(sol.ctx());
    let cp = CrossProduct::new(two_dim_action(&c), sol).unwrap();
    let a = element(sol, &x(0) * &x(1), vec![1, 1]);
    let b = element(sol, x(1), vec![0, 1]);
    let serial = cp.mul(&a, &b).unwrap();
    let results: Vec<CrossElement> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..4).map(|_| s.spawn(|| cp.mul(&a, &b).unwrap())).collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    assert!(results.iter().all(|r| r == &serial));
}
