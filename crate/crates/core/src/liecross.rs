//! Lie algebras acting by symplectic vector fields, the Lie algebra
//! `A ×_τ g` and the deformed cross product `A >◁_τ U(g)` in PBW normal form.
//!
//! Products in the cross product are computed by rewriting words of
//! generators and function letters with three rules:
//!
//! * `f g → f ⋆ g` for adjacent functions,
//! * `e_l f → X̃_l(f) + f e_l`,
//! * `e_j e_i → e_i e_j + Σ_k c^k_ji e_k + τ(Φe_j, Φe_i)` for `j > i`,
//!
//! until every word is a single function followed by a non-decreasing run of
//! generators.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fedosov::{FedosovSolution, StarFunction};
use crate::ring::Rational;
use crate::symfield::{Quantizer, SymplecticVectorField};
use crate::weyl::{check_same, ChartContext};

/// Basis names and structure constants `[e_i, e_j] = c^k_ij e_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebraPresentation {
    names: Vec<String>,
    // c[i][j][k] = c^k_ij
    c: Vec<Vec<Vec<Rational>>>,
}

impl LieAlgebraPresentation {
    /// Validates antisymmetry and the Jacobi identity of the given constants
    /// `(i, j, k, c^k_ij)` (0-based); unlisted constants are zero.
    pub fn new<I>(names: Vec<String>, constants: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, usize, Rational)>,
    {
        let m = names.len();
        if m == 0 {
            return Err(Error::Invalid(
                "a Lie algebra needs at least one basis element".into(),
            ));
        }
        let mut c = vec![vec![vec![Rational::zero(); m]; m]; m];
        for (i, j, k, v) in constants {
            for idx in [i, j, k] {
                if idx >= m {
                    return Err(Error::IndexOutOfRange {
                        index: idx + 1,
                        dim: m,
                    });
                }
            }
            c[i][j][k] += v;
        }
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    if c[i][j][k] != -&c[j][i][k] {
                        return Err(Error::LieAntisymmetry {
                            i: i + 1,
                            j: j + 1,
                            k: k + 1,
                        });
                    }
                }
            }
        }
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    for l in 0..m {
                        let mut s = Rational::zero();
                        for p in 0..m {
                            s += &c[i][j][p] * &c[p][k][l];
                            s += &c[j][k][p] * &c[p][i][l];
                            s += &c[k][i][p] * &c[p][j][l];
                        }
                        if !s.is_zero() {
                            return Err(Error::LieJacobi {
                                i: i + 1,
                                j: j + 1,
                                k: k + 1,
                                l: l + 1,
                            });
                        }
                    }
                }
            }
        }
        Ok(LieAlgebraPresentation { names, c })
    }

    /// The abelian algebra on the given names.
    pub fn abelian(names: Vec<String>) -> Result<Self> {
        Self::new(names, [])
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// `c^k_ij`
    pub fn structure(&self, i: usize, j: usize, k: usize) -> &Rational {
        &self.c[i][j][k]
    }

    /// Bracket of two coordinate vectors.
    pub fn bracket(&self, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        let m = self.dim();
        let mut out = vec![Rational::zero(); m];
        for i in 0..m {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..m {
                if y[j].is_zero() {
                    continue;
                }
                let w = &x[i] * &y[j];
                for (k, o) in out.iter_mut().enumerate() {
                    let c = &self.c[i][j][k];
                    if !c.is_zero() {
                        *o += &w * c;
                    }
                }
            }
        }
        out
    }
}

/// A Lie algebra homomorphism `Φ: g → symplectic vector fields`.
#[derive(Clone, Debug)]
pub struct LieAction {
    alg: LieAlgebraPresentation,
    images: Vec<SymplecticVectorField>,
}

impl LieAction {
    /// Checks `[Φe_i, Φe_j] = c^k_ij Φe_k` for every pair of basis elements.
    pub fn new(alg: LieAlgebraPresentation, images: Vec<SymplecticVectorField>) -> Result<Self> {
        if images.len() != alg.dim() {
            return Err(Error::DimensionMismatch {
                left: alg.dim(),
                right: images.len(),
            });
        }
        let ctx = images[0].ctx();
        for f in &images {
            if !f.ctx().same_chart(ctx) {
                return Err(Error::ContextMismatch);
            }
        }
        let action = LieAction { alg, images };
        let m = action.alg.dim();
        for i in 0..m {
            for j in i + 1..m {
                let lhs = action.images[i].bracket(&action.images[j])?;
                let rhs = action.field_of(&action.alg.c[i][j]);
                if lhs != rhs {
                    return Err(Error::ActionHomomorphism { i: i + 1, j: j + 1 });
                }
            }
        }
        Ok(action)
    }

    pub fn algebra(&self) -> &LieAlgebraPresentation {
        &self.alg
    }

    pub fn ctx(&self) -> &Arc<ChartContext> {
        self.images[0].ctx()
    }

    pub fn image(&self, i: usize) -> &SymplecticVectorField {
        &self.images[i]
    }

    /// `Φ(Σ x_i e_i) = Σ x_i Φe_i`
    pub fn field_of(&self, x: &[Rational]) -> SymplecticVectorField {
        let mut out = SymplecticVectorField::zero(self.ctx());
        for (xi, f) in x.iter().zip(&self.images) {
            if !xi.is_zero() {
                out = out.try_add(&f.scale(xi)).expect("images share a chart");
            }
        }
        out
    }
}

/// Element `(a, x)` of `A ×_τ g`.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossPairElement {
    pub a: StarFunction,
    pub g: Vec<Rational>,
}

impl CrossPairElement {
    pub fn try_add(&self, other: &Self) -> Result<Self> {
        Ok(CrossPairElement {
            a: self.a.try_add(&other.a)?,
            g: self.g.iter().zip(&other.g).map(|(x, y)| x + y).collect(),
        })
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.g.iter().all(Zero::is_zero)
    }
}

/// Element `Σ f_α ⊗ e_α` of the cross product, `α` non-decreasing.
#[derive(Clone, PartialEq)]
pub struct CrossElement {
    ctx: Arc<ChartContext>,
    terms: BTreeMap<Vec<usize>, StarFunction>,
}

impl fmt::Debug for CrossElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CrossElement({self})")
    }
}

impl CrossElement {
    pub fn zero(ctx: &Arc<ChartContext>) -> Self {
        CrossElement {
            ctx: Arc::clone(ctx),
            terms: BTreeMap::new(),
        }
    }

    pub fn one(ctx: &Arc<ChartContext>) -> Self {
        Self::function(&StarFunction::one(ctx))
    }

    /// `f ⊗ 1`
    pub fn function(f: &StarFunction) -> Self {
        let mut out = Self::zero(f.ctx());
        out.add_term(Vec::new(), f);
        out
    }

    /// `1 ⊗ e_i`
    pub fn generator(ctx: &Arc<ChartContext>, i: usize) -> Self {
        let mut out = Self::zero(ctx);
        out.add_term(vec![i], &StarFunction::one(ctx));
        out
    }

    /// `f ⊗ e_{i1} ⋯ e_{ik}` for a non-decreasing index sequence.
    pub fn monomial(f: &StarFunction, word: Vec<usize>) -> Result<Self> {
        if word.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::Invalid(format!("PBW word {word:?} is not normal-ordered")));
        }
        let mut out = Self::zero(f.ctx());
        out.add_term(word, f);
        Ok(out)
    }

    fn add_term(&mut self, word: Vec<usize>, f: &StarFunction) {
        if f.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(word) {
            Entry::Vacant(v) => {
                v.insert(f.clone());
            }
            Entry::Occupied(mut o) => {
                let sum = o.get().try_add(f).expect("shared context");
                if sum.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = sum;
                }
            }
        }
    }

    pub fn ctx(&self) -> &Arc<ChartContext> {
        &self.ctx
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &StarFunction)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, word: &[usize]) -> StarFunction {
        self.terms
            .get(word)
            .cloned()
            .unwrap_or_else(|| StarFunction::zero(&self.ctx))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Highest PBW degree present.
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(Vec::len).max()
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        check_same(&self.ctx, &other.ctx)?;
        let mut out = self.clone();
        for (w, f) in &other.terms {
            out.add_term(w.clone(), f);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        check_same(&self.ctx, &other.ctx)?;
        let mut out = self.clone();
        for (w, f) in &other.terms {
            out.add_term(w.clone(), &-f);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (w, f) in &self.terms {
            out.add_term(w.clone(), &f.scale(c));
        }
        out
    }

    /// Coefficients reduced modulo `h`.
    pub fn classical_limit(&self) -> Self {
        self.truncate_h(0)
    }

    /// Coefficients truncated after `h^m`.
    pub fn truncate_h(&self, m: u32) -> Self {
        let mut out = Self::zero(&self.ctx);
        for (w, f) in &self.terms {
            out.add_term(w.clone(), &f.truncate_h(m));
        }
        out
    }

    /// Renders with the given basis names.
    pub fn render(&self, names: &[String]) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(w, f)| {
                if w.is_empty() {
                    format!("({f})")
                } else {
                    let gens: Vec<&str> = w.iter().map(|&i| names[i].as_str()).collect();
                    format!("({f}) * {}", gens.join("*"))
                }
            })
            .collect();
        parts.join(" + ")
    }
}

impl fmt::Display for CrossElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dim = self.terms.keys().flatten().max().map_or(0, |m| m + 1);
        let names: Vec<String> = (1..=dim).map(|i| format!("e{i}")).collect();
        f.write_str(&self.render(&names))
    }
}

/// Which redex the rewriting engine contracts first.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Strategy {
    Leftmost,
    Rightmost,
}

#[derive(Clone, Debug)]
enum Letter {
    Fun(StarFunction),
    Gen(usize),
}

/// Cross-product arithmetic for an action over one Fedosov solution.
/// Basis index and the coefficients of the function it acts on.
type RhoKey = (usize, Vec<(u32, crate::ring::Poly)>);

pub struct CrossProduct<'a> {
    action: LieAction,
    quantizer: Quantizer<'a>,
    tau: Mutex<HashMap<(usize, usize), StarFunction>>,
    rho: Mutex<HashMap<RhoKey, StarFunction>>,
}

impl<'a> CrossProduct<'a> {
    pub fn new(action: LieAction, sol: &'a FedosovSolution) -> Result<Self> {
        if !action.ctx().same_chart(sol.ctx()) {
            return Err(Error::ContextMismatch);
        }
        Ok(CrossProduct {
            action,
            quantizer: Quantizer::new(sol),
            tau: Mutex::new(HashMap::new()),
            rho: Mutex::new(HashMap::new()),
        })
    }

    pub fn action(&self) -> &LieAction {
        &self.action
    }

    pub fn solution(&self) -> &'a FedosovSolution {
        self.quantizer.solution()
    }

    pub fn ctx(&self) -> &Arc<ChartContext> {
        self.solution().ctx()
    }

    /// `ρ_i(f) = X̃_i f` with `X_i = Φe_i`.
    pub fn rho(&self, i: usize, f: &StarFunction) -> Result<StarFunction> {
        let key = (i, f.coeffs().map(|(l, p)| (l, p.clone())).collect::<Vec<_>>());
        if let Some(v) = self.rho.lock().unwrap().get(&key) {
            return Ok(v.clone());
        }
        let v = self.quantizer.apply(self.action.image(i), f)?;
        self.rho.lock().unwrap().insert(key, v.clone());
        Ok(v)
    }

    /// `τ(Φe_i, Φe_j)`
    pub fn tau_basis(&self, i: usize, j: usize) -> Result<StarFunction> {
        if i == j {
            return Ok(StarFunction::zero(self.ctx()));
        }
        if i > j {
            return Ok(-&self.tau_basis(j, i)?);
        }
        if let Some(v) = self.tau.lock().unwrap().get(&(i, j)) {
            return Ok(v.clone());
        }
        let v = self.quantizer.tau(self.action.image(i), self.action.image(j))?;
        self.tau.lock().unwrap().insert((i, j), v.clone());
        Ok(v)
    }

    /// `ρ_x(f) = Σ x_i X̃_i f`
    pub fn rho_vec(&self, x: &[Rational], f: &StarFunction) -> Result<StarFunction> {
        let mut out = StarFunction::zero(self.ctx());
        for (i, xi) in x.iter().enumerate() {
            if !xi.is_zero() {
                out = out.try_add(&self.rho(i, f)?.scale(xi))?;
            }
        }
        Ok(out)
    }

    /// `τ(x, y) = Σ x_i y_j τ(Φe_i, Φe_j)`
    pub fn tau_vec(&self, x: &[Rational], y: &[Rational]) -> Result<StarFunction> {
        let mut out = StarFunction::zero(self.ctx());
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                if i != j && !xi.is_zero() && !yj.is_zero() {
                    out = out.try_add(&self.tau_basis(i, j)?.scale(&(xi * yj)))?;
                }
            }
        }
        Ok(out)
    }

    /// `[(a, x), (b, y)] = ([a, b] + ρ_x(b) - ρ_y(a) + τ(x, y), [x, y])`
    pub fn pair_bracket(&self, u: &CrossPairElement, v: &CrossPairElement) -> Result<CrossPairElement> {
        let sol = self.solution();
        let a = sol.star_commutator(&u.a, &v.a)?;
        let a = a.try_add(&self.rho_vec(&u.g, &v.a)?)?;
        let a = a.try_sub(&self.rho_vec(&v.g, &u.a)?)?;
        let a = a.try_add(&self.tau_vec(&u.g, &v.g)?)?;
        Ok(CrossPairElement {
            a,
            g: self.action.alg.bracket(&u.g, &v.g),
        })
    }

    fn check(&self, u: &CrossElement) -> Result<()> {
        if !u.ctx.same_chart(self.ctx()) {
            return Err(Error::ContextMismatch);
        }
        if u.ctx.order() != self.ctx().order() {
            return Err(Error::TruncationOverflow {
                requested: u.ctx.h_order(),
                limit: self.ctx().h_order(),
            });
        }
        Ok(())
    }

    /// Product in the deformed cross product, normal-ordered.
    pub fn mul(&self, u: &CrossElement, v: &CrossElement) -> Result<CrossElement> {
        self.mul_with(u, v, Strategy::Leftmost)
    }

    /// Product truncated after `h^m`; `m` may not exceed `⌊N/2⌋`.
    pub fn mul_to_order(&self, u: &CrossElement, v: &CrossElement, m: u32) -> Result<CrossElement> {
        let limit = self.ctx().h_order();
        if m > limit {
            return Err(Error::TruncationOverflow { requested: m, limit });
        }
        Ok(self.mul(u, v)?.truncate_h(m))
    }

    pub fn mul_with(&self, u: &CrossElement, v: &CrossElement, strategy: Strategy) -> Result<CrossElement> {
        self.check(u)?;
        self.check(v)?;
        let mut out = CrossElement::zero(self.ctx());
        for (wa, f) in &u.terms {
            for (wb, g) in &v.terms {
                let mut word = vec![Letter::Fun(f.clone())];
                word.extend(wa.iter().map(|&i| Letter::Gen(i)));
                word.push(Letter::Fun(g.clone()));
                word.extend(wb.iter().map(|&i| Letter::Gen(i)));
                let part = self.normalize(word, strategy)?;
                out = out.try_add(&part)?;
            }
        }
        Ok(out)
    }

    /// Normal form of `e_{i1} ⋯ e_{ik}` for an arbitrary index sequence.
    pub fn normalize_word(&self, word: &[usize], strategy: Strategy) -> Result<CrossElement> {
        for &i in word {
            if i >= self.action.alg.dim() {
                return Err(Error::IndexOutOfRange {
                    index: i + 1,
                    dim: self.action.alg.dim(),
                });
            }
        }
        self.normalize(word.iter().map(|&i| Letter::Gen(i)).collect(), strategy)
    }

    fn find_redex(word: &[Letter], strategy: Strategy) -> Option<usize> {
        let is_redex = |p: usize| match (&word[p], &word[p + 1]) {
            (Letter::Fun(_), Letter::Fun(_)) => true,
            (Letter::Gen(_), Letter::Fun(_)) => true,
            (Letter::Gen(j), Letter::Gen(i)) => j > i,
            (Letter::Fun(_), Letter::Gen(_)) => false,
        };
        let n = word.len().saturating_sub(1);
        match strategy {
            Strategy::Leftmost => (0..n).find(|&p| is_redex(p)),
            Strategy::Rightmost => (0..n).rev().find(|&p| is_redex(p)),
        }
    }

    fn normalize(&self, start: Vec<Letter>, strategy: Strategy) -> Result<CrossElement> {
        let ctx = Arc::clone(self.ctx());
        let sol = self.solution();
        let mut out = CrossElement::zero(&ctx);
        let mut stack = vec![start];
        let splice = |w: &[Letter], p: usize, mid: Vec<Letter>| -> Vec<Letter> {
            let mut v = w[..p].to_vec();
            v.extend(mid);
            v.extend_from_slice(&w[p + 2..]);
            v
        };
        while let Some(w) = stack.pop() {
            if w.iter().any(|l| matches!(l, Letter::Fun(f) if f.is_zero())) {
                continue;
            }
            let Some(p) = Self::find_redex(&w, strategy) else {
                let (f, gens) = match w.first() {
                    Some(Letter::Fun(f)) => (f.clone(), &w[1..]),
                    _ => (StarFunction::one(&ctx), &w[..]),
                };
                let word = gens
                    .iter()
                    .map(|l| match l {
                        Letter::Gen(i) => *i,
                        Letter::Fun(_) => unreachable!("normal words have one leading function"),
                    })
                    .collect();
                out.add_term(word, &f);
                continue;
            };
            match (&w[p], &w[p + 1]) {
                (Letter::Fun(f), Letter::Fun(g)) => {
                    let fg = sol.star(f, g)?;
                    stack.push(splice(&w, p, vec![Letter::Fun(fg)]));
                }
                (Letter::Gen(l), Letter::Fun(f)) => {
                    let l = *l;
                    stack.push(splice(&w, p, vec![Letter::Fun(self.rho(l, f)?)]));
                    stack.push(splice(&w, p, vec![Letter::Fun(f.clone()), Letter::Gen(l)]));
                }
                (Letter::Gen(j), Letter::Gen(i)) => {
                    let (i, j) = (*i, *j);
                    stack.push(splice(&w, p, vec![Letter::Gen(i), Letter::Gen(j)]));
                    for k in 0..self.action.alg.dim() {
                        let c = self.action.alg.structure(j, i, k);
                        if !c.is_zero() {
                            let cf = StarFunction::constant(&ctx, c.clone());
                            stack.push(splice(&w, p, vec![Letter::Fun(cf), Letter::Gen(k)]));
                        }
                    }
                    let t = self.tau_basis(j, i)?;
                    if !t.is_zero() {
                        stack.push(splice(&w, p, vec![Letter::Fun(t)]));
                    }
                }
                (Letter::Fun(_), Letter::Gen(_)) => unreachable!("not a redex"),
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fedosov::SymplecticConnection;
    use crate::ring::{int, Poly};

    fn names(n: usize) -> Vec<String> {
        (1..=n).map(|i| format!("e{i}")).collect()
    }

    /// [e1, e2] = e1
    fn two_dim() -> LieAlgebraPresentation {
        LieAlgebraPresentation::new(names(2), [(0, 1, 0, int(1)), (1, 0, 0, int(-1))]).unwrap()
    }

    fn ctx(order: u32) -> Arc<ChartContext> {
        ChartContext::standard(2, order).unwrap()
    }

    fn x(i: usize) -> Poly {
        Poly::var(2, i)
    }

    fn d(c: &Arc<ChartContext>, i: usize) -> SymplecticVectorField {
        SymplecticVectorField::coordinate(c, i)
    }

    fn hyperbolic(c: &Arc<ChartContext>) -> SymplecticVectorField {
        SymplecticVectorField::new(c, vec![x(0), -&x(1)]).unwrap()
    }

    #[test]
    fn lie_validation() {
        assert!(LieAlgebraPresentation::abelian(names(3)).is_ok());
        assert_eq!(
            two_dim().bracket(&[int(1), int(0)], &[int(0), int(1)]),
            vec![int(1), int(0)]
        );
        let bad = LieAlgebraPresentation::new(names(2), [(0, 1, 0, int(1)), (1, 0, 0, int(1))]);
        assert_eq!(bad.unwrap_err(), Error::LieAntisymmetry { i: 1, j: 2, k: 1 });
        // [e1,e2]=e3, [e2,e3]=e1, [e3,e1]=e1 breaks Jacobi
        let jac = LieAlgebraPresentation::new(
            names(3),
            [
                (0, 1, 2, int(1)),
                (1, 0, 2, int(-1)),
                (1, 2, 0, int(1)),
                (2, 1, 0, int(-1)),
                (2, 0, 0, int(1)),
                (0, 2, 0, int(-1)),
            ],
        );
        assert!(matches!(jac, Err(Error::LieJacobi { .. })));
    }

    #[test]
    fn action_validation() {
        let c = ctx(4);
        assert!(LieAction::new(
            LieAlgebraPresentation::abelian(names(2)).unwrap(),
            vec![d(&c, 0), d(&c, 1)]
        )
        .is_ok());
        assert!(LieAction::new(two_dim(), vec![d(&c, 0), hyperbolic(&c)]).is_ok());
        assert_eq!(
            LieAction::new(two_dim(), vec![d(&c, 0), d(&c, 1)]).unwrap_err(),
            Error::ActionHomomorphism { i: 1, j: 2 }
        );
    }

    fn engine_fixture(sol: &FedosovSolution) -> CrossProduct<'_> {
        let c = sol.ctx();
        let action = LieAction::new(two_dim(), vec![d(c, 0), hyperbolic(c)]).unwrap();
        CrossProduct::new(action, sol).unwrap()
    }

    #[test]
    fn cross_mul_examples() {
        let sol =
            FedosovSolution::solve(&SymplecticConnection::from_entries(&ctx(4), [(0, 0, 0, x(1))]).unwrap())
                .unwrap();
        let c = Arc::clone(sol.ctx());
        let cp = engine_fixture(&sol);
        let f = StarFunction::from_poly(&c, &x(0) * &x(1));
        let g = StarFunction::from_poly(&c, x(1));
        let prod = cp
            .mul(&CrossElement::function(&f), &CrossElement::function(&g))
            .unwrap();
        assert_eq!(prod, CrossElement::function(&sol.star(&f, &g).unwrap()));

        let e1 = CrossElement::generator(&c, 0);
        let lhs = cp.mul(&e1, &CrossElement::function(&f)).unwrap();
        let mut rhs = CrossElement::function(&cp.rho(0, &f).unwrap());
        rhs = rhs
            .try_add(&CrossElement::monomial(&f, vec![0]).unwrap())
            .unwrap();
        assert_eq!(lhs, rhs);

        let e2 = CrossElement::generator(&c, 1);
        let swapped = cp.mul(&e2, &e1).unwrap();
        let one = StarFunction::one(&c);
        let expected = CrossElement::monomial(&one, vec![0, 1])
            .unwrap()
            .try_sub(&e1)
            .unwrap()
            .try_sub(&CrossElement::function(&cp.tau_basis(0, 1).unwrap()))
            .unwrap();
        assert_eq!(swapped, expected);
        assert_eq!(cp.mul(&CrossElement::one(&c), &swapped).unwrap(), swapped);
    }

    #[test]
    fn pair_bracket_examples() {
        let sol = FedosovSolution::solve(&SymplecticConnection::flat(&ctx(4))).unwrap();
        let c = Arc::clone(sol.ctx());
        let cp = engine_fixture(&sol);
        let f = StarFunction::from_poly(&c, x(0));
        let g = StarFunction::from_poly(&c, x(1));
        let u = CrossPairElement {
            a: f.clone(),
            g: vec![int(0), int(0)],
        };
        let v = CrossPairElement {
            a: g.clone(),
            g: vec![int(0), int(0)],
        };
        let b = cp.pair_bracket(&u, &v).unwrap();
        assert_eq!(b.a, sol.star_commutator(&f, &g).unwrap());
        let e1 = CrossPairElement {
            a: StarFunction::zero(&c),
            g: vec![int(1), int(0)],
        };
        let e2 = CrossPairElement {
            a: StarFunction::zero(&c),
            g: vec![int(0), int(1)],
        };
        let b = cp.pair_bracket(&e1, &e2).unwrap();
        assert_eq!(b.g, vec![int(1), int(0)]);
        assert_eq!(b.a, cp.tau_basis(0, 1).unwrap());
    }

    #[test]
    fn classical_limit_examples() {
        let c = ctx(4);
        let f = StarFunction::from_coeffs(&c, [(0, x(0)), (1, x(1))]);
        let e = CrossElement::monomial(&f, vec![0, 1]).unwrap();
        let lim = e.classical_limit();
        assert_eq!(lim.coefficient(&[0, 1]), StarFunction::from_poly(&c, x(0)));
        assert_eq!(CrossElement::one(&c).classical_limit(), CrossElement::one(&c));
        assert!(CrossElement::monomial(&f, vec![1, 0]).is_err());
    }

    #[test]
    fn truncation_contract() {
        let sol = FedosovSolution::solve(&SymplecticConnection::flat(&ctx(4))).unwrap();
        let cp = engine_fixture(&sol);
        let one = CrossElement::one(sol.ctx());
        assert!(cp.mul_to_order(&one, &one, 2).is_ok());
        assert_eq!(
            cp.mul_to_order(&one, &one, 3).unwrap_err(),
            Error::TruncationOverflow {
                requested: 3,
                limit: 2
            }
        );
        let other = CrossElement::one(&ctx(6));
        assert!(matches!(
            cp.mul(&one, &other),
            Err(Error::TruncationOverflow { .. })
        ));
    }

    #[test]
    fn rendering() {
        let c = ctx(4);
        let f = StarFunction::from_coeffs(&c, [(0, x(0)), (1, Poly::constant(2, int(2)))]);
        let e = CrossElement::monomial(&f, vec![0, 1])
            .unwrap()
            .try_add(&CrossElement::one(&c))
            .unwrap();
        assert_eq!(e.to_string(), "(1) + (x1 + 2*h) * e1*e2");
        assert_eq!(CrossElement::zero(&c).to_string(), "0");
    }
}
