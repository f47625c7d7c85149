#![allow(dead_code)]

use std::sync::Arc;

use fedosov::fedosov::{FedosovSolution, StarFunction, SymplecticConnection};
use fedosov::liecross::{LieAction, LieAlgebraPresentation};
use fedosov::ring::{int, rat, Monomial, Poly, Rational};
use fedosov::symfield::SymplecticVectorField;
use fedosov::weyl::{ChartContext, DxSet, TermKey, WeylForm};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn ctx(order: u32) -> Arc<ChartContext> {
    ChartContext::standard(2, order).unwrap()
}

pub fn x(i: usize) -> Poly {
    Poly::var(2, i)
}

pub fn flat(order: u32) -> FedosovSolution {
    FedosovSolution::solve(&SymplecticConnection::flat(&ctx(order))).unwrap()
}

/// `Γ_111 = x2`
pub fn nonflat(order: u32) -> FedosovSolution {
    let conn = SymplecticConnection::from_entries(&ctx(order), [(0, 0, 0, x(1))]).unwrap();
    FedosovSolution::solve(&conn).unwrap()
}

/// `Γ_111 = x2`, `Γ_122 = x1^2`
pub fn nonflat_second(order: u32) -> FedosovSolution {
    let conn =
        SymplecticConnection::from_entries(&ctx(order), [(0, 0, 0, x(1)), (0, 1, 1, &x(0) * &x(0))]).unwrap();
    FedosovSolution::solve(&conn).unwrap()
}

pub fn d(c: &Arc<ChartContext>, i: usize) -> SymplecticVectorField {
    SymplecticVectorField::coordinate(c, i)
}

/// `x1 ∂1 - x2 ∂2`
pub fn hyperbolic(c: &Arc<ChartContext>) -> SymplecticVectorField {
    SymplecticVectorField::new(c, vec![x(0), -&x(1)]).unwrap()
}

/// `x1^2 ∂1 - 2 x1 x2 ∂2`
pub fn quadratic(c: &Arc<ChartContext>) -> SymplecticVectorField {
    SymplecticVectorField::new(c, vec![&x(0) * &x(0), (&x(0) * &x(1)).scale(&int(-2))]).unwrap()
}

pub fn fixture_fields(c: &Arc<ChartContext>) -> Vec<(&'static str, SymplecticVectorField)> {
    vec![
        ("d1", d(c, 0)),
        ("x1d1-x2d2", hyperbolic(c)),
        ("x1^2d1-2x1x2d2", quadratic(c)),
    ]
}

pub fn names(n: usize) -> Vec<String> {
    (1..=n).map(|i| format!("e{i}")).collect()
}

/// `[e1, e2] = e1` acting by `∂1` and `x1 ∂1 - x2 ∂2`.
pub fn two_dim_action(c: &Arc<ChartContext>) -> LieAction {
    let alg = LieAlgebraPresentation::new(names(2), [(0, 1, 0, int(1)), (1, 0, 0, int(-1))]).unwrap();
    LieAction::new(alg, vec![d(c, 0), hyperbolic(c)]).unwrap()
}

/// `[e1, e3] = e1`, `[e2, e3] = -e2` acting by `∂1`, `∂2`, `x1 ∂1 - x2 ∂2`.
pub fn three_dim_action(c: &Arc<ChartContext>) -> LieAction {
    let alg = LieAlgebraPresentation::new(
        names(3),
        [
            (0, 2, 0, int(1)),
            (2, 0, 0, int(-1)),
            (1, 2, 1, int(-1)),
            (2, 1, 1, int(1)),
        ],
    )
    .unwrap();
    LieAction::new(alg, vec![d(c, 0), d(c, 1), hyperbolic(c)]).unwrap()
}

pub fn rand_rational(rng: &mut ChaCha8Rng) -> Rational {
    rat(rng.gen_range(-4..=4), rng.gen_range(1..=3))
}

/// Random polynomial in two variables of total degree at most `deg`.
pub fn rand_poly(rng: &mut ChaCha8Rng, deg: u32) -> Poly {
    let n = rng.gen_range(1..=4);
    let terms: Vec<(Vec<u32>, Rational)> = (0..n)
        .map(|_| {
            let total = rng.gen_range(0..=deg);
            let a = rng.gen_range(0..=total);
            (vec![a, total - a], rand_rational(rng))
        })
        .collect();
    Poly::from_terms(2, terms).unwrap()
}

pub fn rand_fn(rng: &mut ChaCha8Rng, c: &Arc<ChartContext>, deg: u32) -> StarFunction {
    StarFunction::from_poly(c, rand_poly(rng, deg))
}

/// Random form with y-degree at most 3, dx-degree at most 1 and h-power at most 1.
pub fn rand_form(rng: &mut ChaCha8Rng, c: &Arc<ChartContext>) -> WeylForm {
    let mut out = WeylForm::zero(c);
    for _ in 0..rng.gen_range(1..=5) {
        let total = rng.gen_range(0..=3);
        let a = rng.gen_range(0..=total);
        let dx = match rng.gen_range(0..3) {
            0 => DxSet::EMPTY,
            k => DxSet::single(k - 1),
        };
        let key = TermKey::new(
            Monomial::from_exponents(vec![a, total - a]),
            dx,
            rng.gen_range(0..=1),
        );
        let t = WeylForm::term(c, key, rand_poly(rng, 2)).unwrap();
        out = &out + &t;
    }
    out
}

/// Polynomials in two variables of total degree at most `deg`, small rational coefficients.
pub fn arb_poly(deg: u32) -> impl proptest::strategy::Strategy<Value = Poly> {
    use proptest::prelude::*;
    prop::collection::vec((0..=deg, 0..=deg, -4i64..=4, 1i64..=3), 1..4).prop_map(move |ts| {
        let terms = ts
            .into_iter()
            .map(|(a, b, n, m)| (vec![a, b.min(deg - a.min(deg))], rat(n, m)));
        Poly::from_terms(2, terms.collect::<Vec<_>>()).unwrap()
    })
}
