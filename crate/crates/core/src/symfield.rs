//! Symplectic vector fields and their quantization.
//!
//! For a symplectic field `X` the Lie derivative `L_X` fails to commute with
//! the Fedosov connection by an inner term `[η_X/h, ·]`. Solving
//! `D u_X = -η_X/h` gives the derivation `X̂ = L_X + [u_X, ·]` of flat
//! sections, and the defect of `X ↦ X̂` to be a Lie map is the 2-cocycle
//! `τ(X, Y) = [u_X, u_Y] - u_[X,Y] + L_X u_Y - L_Y u_X`.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fedosov::{affine_fixed_point, FedosovSolution, StarFunction, SymplecticConnection};

use crate::ring::{int, rat, Monomial, Poly, Rational};
use crate::weyl::{ChartContext, DxSet, TermKey, WeylForm};

/// Vector field `X^i ∂_i` with `L_X ω = 0`.
#[derive(Clone)]
pub struct SymplecticVectorField {
    ctx: Arc<ChartContext>,
    components: Vec<Poly>,
}

impl PartialEq for SymplecticVectorField {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same_chart(&other.ctx) && self.components == other.components
    }
}

impl Eq for SymplecticVectorField {}

impl std::hash::Hash for SymplecticVectorField {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.components.hash(state);
    }
}

impl fmt::Debug for SymplecticVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymplecticVectorField({self})")
    }
}

impl fmt::Display for SymplecticVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.components.iter().map(ToString::to_string).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

impl SymplecticVectorField {
    /// Validates `∂X^k/∂x^i ω_kj = ∂X^k/∂x^j ω_ki` for all `i, j`.
    pub fn new(ctx: &Arc<ChartContext>, components: Vec<Poly>) -> Result<Self> {
        let dim = ctx.dim();
        if components.len() != dim {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: components.len(),
            });
        }
        if let Some(p) = components.iter().find(|p| p.dim() != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: p.dim(),
            });
        }
        let field = SymplecticVectorField {
            ctx: Arc::clone(ctx),
            components,
        };
        let jac = field.jacobian();
        for i in 0..dim {
            for j in i + 1..dim {
                let mut lhs = Poly::zero(dim);
                let mut rhs = Poly::zero(dim);
                for k in 0..dim {
                    lhs += &jac[k][i].scale(ctx.omega(k, j));
                    rhs += &jac[k][j].scale(ctx.omega(k, i));
                }
                if lhs != rhs {
                    return Err(Error::NotSymplectic { i: i + 1, j: j + 1 });
                }
            }
        }
        Ok(field)
    }

    pub fn zero(ctx: &Arc<ChartContext>) -> Self {
        SymplecticVectorField {
            ctx: Arc::clone(ctx),
            components: vec![Poly::zero(ctx.dim()); ctx.dim()],
        }
    }

    /// The constant field `∂_i`.
    pub fn coordinate(ctx: &Arc<ChartContext>, i: usize) -> Self {
        let mut f = Self::zero(ctx);
        f.components[i] = Poly::one(ctx.dim());
        f
    }

    /// Hamiltonian field `X_f` of `f`, defined by `ω(X_f, ·) = df`.
    pub fn hamiltonian(ctx: &Arc<ChartContext>, f: &Poly) -> Result<Self> {
        let dim = ctx.dim();
        // X^k = ω^{jk} ∂_j f solves ω_kl X^k = ∂_l f
        let components = (0..dim)
            .map(|k| {
                let mut c = Poly::zero(dim);
                for j in 0..dim {
                    c += &f.partial(j).scale(ctx.omega_inv(j, k));
                }
                c
            })
            .collect();
        Self::new(ctx, components)
    }

    pub fn ctx(&self) -> &Arc<ChartContext> {
        &self.ctx
    }

    pub fn components(&self) -> &[Poly] {
        &self.components
    }

    pub fn component(&self, i: usize) -> &Poly {
        &self.components[i]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Poly::is_zero)
    }

    /// `jac[i][j] = ∂X^i/∂x^j`
    fn jacobian(&self) -> Vec<Vec<Poly>> {
        let dim = self.ctx.dim();
        self.components
            .iter()
            .map(|c| (0..dim).map(|j| c.partial(j)).collect())
            .collect()
    }

    /// `Xf = X^i ∂_i f`
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut out = Poly::zero(self.ctx.dim());
        for (i, c) in self.components.iter().enumerate() {
            if !c.is_zero() {
                out += &(c * &f.partial(i));
            }
        }
        out
    }

    /// `[X, Y]^i = X^j ∂_j Y^i - Y^j ∂_j X^i`, revalidated.
    pub fn bracket(&self, other: &Self) -> Result<Self> {
        if !self.ctx.same_chart(&other.ctx) {
            return Err(Error::ContextMismatch);
        }
        let components = (0..self.ctx.dim())
            .map(|i| &self.apply(&other.components[i]) - &other.apply(&self.components[i]))
            .collect();
        Self::new(&self.ctx, components)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if !self.ctx.same_chart(&other.ctx) {
            return Err(Error::ContextMismatch);
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a + b)
            .collect();
        Ok(SymplecticVectorField {
            ctx: Arc::clone(&self.ctx),
            components,
        })
    }

    pub fn scale(&self, c: &Rational) -> Self {
        SymplecticVectorField {
            ctx: Arc::clone(&self.ctx),
            components: self.components.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// Lie derivative: `X` on coefficients, `L_X y^i = ∂_j X^i y^j` and
    /// `L_X dx^i = ∂_j X^i dx^j` on the factors, extended as a derivation.
    pub fn lie_derivative(&self, a: &WeylForm) -> Result<WeylForm> {
        if !self.ctx.same_chart(a.ctx()) {
            return Err(Error::ContextMismatch);
        }
        let dim = self.ctx.dim();
        let jac = self.jacobian();
        let mut out = WeylForm::zero(a.ctx());
        for (k, p) in a.terms() {
            let xp = self.apply(p);
            if !xp.is_zero() {
                out.add_poly(k.clone(), xp);
            }
            for i in 0..dim {
                let Some(rest) = k.y.lower(i) else { continue };
                let mult = int(i64::from(k.y.get(i)));
                for (j, dij) in jac[i].iter().enumerate() {
                    if dij.is_zero() {
                        continue;
                    }
                    let y = rest.raise(j);
                    out.add_poly(TermKey::new(y, k.dx, k.h), (p * dij).scale(&mult));
                }
            }
            for i in k.dx.indices() {
                let (s1, rest) = k.dx.remove(i).expect("index present");
                for (j, dij) in jac[i].iter().enumerate() {
                    if dij.is_zero() {
                        continue;
                    }
                    let Some((s2, dx)) = rest.insert_left(j) else {
                        continue;
                    };
                    let c = p * dij;
                    let c = if s1 * s2 < 0 { -c } else { c };
                    out.add_poly(TermKey::new(k.y.clone(), dx, k.h), c);
                }
            }
        }
        Ok(out)
    }

    /// `λ_X = ½ ω_il ∂²X^l/∂x^j∂x^k y^i y^j dx^k`
    pub fn second_derivative_term(&self, ctx: &Arc<ChartContext>) -> WeylForm {
        let dim = self.ctx.dim();
        let half = rat(1, 2);
        let mut out = WeylForm::zero(ctx);
        for l in 0..dim {
            for j in 0..dim {
                let dj = self.components[l].partial(j);
                if dj.is_zero() {
                    continue;
                }
                for k in 0..dim {
                    let djk = dj.partial(k);
                    if djk.is_zero() {
                        continue;
                    }
                    for i in 0..dim {
                        let w = self.ctx.omega(i, l);
                        if w.is_zero() {
                            continue;
                        }
                        let y = Monomial::var(dim, i).mul(&Monomial::var(dim, j));
                        out.add_poly(TermKey::new(y, DxSet::single(k), 0), djk.scale(&(w * &half)));
                    }
                }
            }
        }
        out
    }
}

/// The connection `∇^X = ∇ + L_X ∇` from its transformed Christoffel symbols
/// `(Γ^X)^l_jk = Γ^l_jk + X(Γ^l_jk) - ∂_pX^l Γ^p_jk + ∂_jX^p Γ^l_pk
/// + ∂_kX^p Γ^l_jp + ∂²_jk X^l`, lowered with `ω_il`.
///
/// Fails with a symmetry conflict if the lowered symbols are not totally
/// symmetric, which happens only for non-symplectic input.
pub fn gamma_x_crosscheck(
    x: &SymplecticVectorField,
    conn: &SymplecticConnection,
) -> Result<SymplecticConnection> {
    let ctx = conn.ctx();
    if !ctx.same_chart(x.ctx()) {
        return Err(Error::ContextMismatch);
    }
    let dim = ctx.dim();
    let jac = x.jacobian();
    let up = |l: usize, j: usize, k: usize| conn.gamma_upper(l, j, k);
    let mut upper_x = vec![vec![vec![Poly::zero(dim); dim]; dim]; dim];
    for l in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                let g = up(l, j, k);
                let mut v = &g + &x.apply(&g);
                for p in 0..dim {
                    v -= &(&jac[l][p] * &up(p, j, k));
                    v += &(&jac[p][j] * &up(l, p, k));
                    v += &(&jac[p][k] * &up(l, j, p));
                }
                v += &x.components[l].partial(j).partial(k);
                upper_x[l][j][k] = v;
            }
        }
    }
    let mut entries = Vec::new();
    for i in 0..dim {
        for j in 0..dim {
            for k in 0..dim {
                let mut v = Poly::zero(dim);
                for (l, row) in upper_x.iter().enumerate() {
                    v += &row[j][k].scale(ctx.omega(i, l));
                }
                entries.push((i, j, k, v));
            }
        }
    }
    SymplecticConnection::from_entries(ctx, entries)
}

/// `η_X` at the extended order `N + 2`.
#[derive(Clone, Debug, PartialEq)]
pub struct EtaForm {
    form: WeylForm,
}

impl EtaForm {
    pub fn form(&self) -> &WeylForm {
        &self.form
    }
}

/// `η_X = L_X Γ + L_X r + λ_X`, checked against `D η_X = 0`.
pub fn eta_of(x: &SymplecticVectorField, sol: &FedosovSolution) -> Result<EtaForm> {
    let ctx = sol.ctx_extended();
    let gamma = sol.connection().connection_form(ctx);
    let form =
        &(&x.lie_derivative(&gamma)? + &x.lie_derivative(sol.r_extended())?) + &x.second_derivative_term(ctx);
    let d_eta = sol.op_d(&form)?;
    if !d_eta.agrees_upto(&WeylForm::zero(ctx), i64::from(ctx.order()) - 1) {
        return Err(Error::Postcondition(format!("D eta_X != 0 for X = {x}")));
    }
    Ok(EtaForm { form })
}

/// `η_X = Γ^X - Γ + L_X r` through the transformed connection.
pub fn eta_by_definition(x: &SymplecticVectorField, sol: &FedosovSolution) -> Result<WeylForm> {
    let ctx = sol.ctx_extended();
    let conn = sol.connection();
    let gamma_x = gamma_x_crosscheck(x, conn)?.connection_form(ctx);
    let gamma = conn.connection_form(ctx);
    Ok(&(&gamma_x - &gamma) + &x.lie_derivative(sol.r_extended())?)
}

/// `u_X`, a 0-form in `W+` with `D u_X = -η_X/h`.
#[derive(Clone, Debug, PartialEq)]
pub struct UElement {
    form: WeylForm,
}

impl UElement {
    pub fn form(&self) -> &WeylForm {
        &self.form
    }

    /// Range of h-powers present, `None` for zero.
    pub fn h_range(&self) -> Option<(i32, i32)> {
        let hs: Vec<i32> = self.form.terms().map(|(k, _)| k.h).collect();
        Some((*hs.iter().min()?, *hs.iter().max()?))
    }
}

/// `η_X/h` at order `N`.
fn eta_over_h(eta: &EtaForm, sol: &FedosovSolution) -> Result<WeylForm> {
    eta.form.div_h()?.with_context(sol.ctx())
}

/// Solves `u = δ⁻¹((D + δ)u + η_X/h)` from `u = 0`.
pub fn solve_u(eta: &EtaForm, sol: &FedosovSolution) -> Result<UElement> {
    let source = eta_over_h(eta, sol)?;
    let cap = sol.order() as usize + 1;
    let base = source.delta_inv();
    let (u, _) = affine_fixed_point(WeylForm::zero(sol.ctx()), &base, cap, "u recursion", |u| {
        Ok(sol.d_plus_delta(u)?.delta_inv())
    })?;
    let du = sol.op_d(&u)?;
    if !du.agrees_upto(&-&source, i64::from(sol.order()) - 1) {
        return Err(Error::Postcondition("D u_X != -eta_X/h".into()));
    }
    Ok(UElement { form: u })
}

/// `X̂ = L_X + [u_X, ·]` acting on flat sections.
#[derive(Clone, Debug)]
pub struct QuantizedDerivation {
    field: SymplecticVectorField,
    eta: EtaForm,
    u: UElement,
}

impl QuantizedDerivation {
    pub fn new(field: &SymplecticVectorField, sol: &FedosovSolution) -> Result<Self> {
        if !field.ctx().same_chart(sol.ctx()) {
            return Err(Error::ContextMismatch);
        }
        let eta = eta_of(field, sol)?;
        let u = solve_u(&eta, sol)?;
        Ok(QuantizedDerivation {
            field: field.clone(),
            eta,
            u,
        })
    }

    pub fn field(&self) -> &SymplecticVectorField {
        &self.field
    }

    pub fn eta(&self) -> &EtaForm {
        &self.eta
    }

    pub fn u(&self) -> &UElement {
        &self.u
    }

    /// `X̂a = L_X a + [u_X, a]`
    pub fn hat(&self, a: &WeylForm) -> Result<WeylForm> {
        Ok(&self.field.lie_derivative(a)? + &self.u.form.commutator(a)?)
    }

    /// `X̃f = σ(X̂ σ⁻¹f)`
    pub fn apply(&self, f: &StarFunction, sol: &FedosovSolution) -> Result<StarFunction> {
        let a = sol.lift(f)?;
        let a = a.form();
        let lie = self.field.lie_derivative(a)?.sigma();
        let u = &self.u.form;
        StarFunction::from_form(&(&(&lie + &u.moyal_mul_sigma(a)?) - &a.moyal_mul_sigma(u)?))
    }
}

/// `X̃f` for a single use; see [`Quantizer`] to reuse `u_X`.
pub fn quantized_apply(
    x: &SymplecticVectorField,
    f: &StarFunction,
    sol: &FedosovSolution,
) -> Result<StarFunction> {
    QuantizedDerivation::new(x, sol)?.apply(f, sol)
}

/// `τ(X, Y)` as a function series; see [`Quantizer::tau`].
pub fn tau(
    x: &SymplecticVectorField,
    y: &SymplecticVectorField,
    sol: &FedosovSolution,
) -> Result<StarFunction> {
    Quantizer::new(sol).tau(x, y)
}

/// Quantizes fields against one solution, caching `u_X` per field.
pub struct Quantizer<'a> {
    sol: &'a FedosovSolution,
    cache: Mutex<HashMap<SymplecticVectorField, Arc<QuantizedDerivation>>>,
}

impl<'a> Quantizer<'a> {
    pub fn new(sol: &'a FedosovSolution) -> Self {
        Quantizer {
            sol,
            cache: Mutex::new(HashMap::new()),
        }
    }

    pub fn solution(&self) -> &'a FedosovSolution {
        self.sol
    }

    pub fn quantize(&self, x: &SymplecticVectorField) -> Result<Arc<QuantizedDerivation>> {
        if let Some(q) = self.cache.lock().unwrap().get(x) {
            return Ok(Arc::clone(q));
        }
        let q = Arc::new(QuantizedDerivation::new(x, self.sol)?);
        self.cache.lock().unwrap().insert(x.clone(), Arc::clone(&q));
        Ok(q)
    }

    /// `X̃f`
    pub fn apply(&self, x: &SymplecticVectorField, f: &StarFunction) -> Result<StarFunction> {
        self.quantize(x)?.apply(f, self.sol)
    }

    /// The flat section `τ(X, Y) = [u_X, u_Y] - u_[X,Y] + L_X u_Y - L_Y u_X`,
    /// checked for `Dτ = 0` and for the absence of negative h-powers.
    pub fn tau_form(&self, x: &SymplecticVectorField, y: &SymplecticVectorField) -> Result<WeylForm> {
        let qx = self.quantize(x)?;
        let qy = self.quantize(y)?;
        let qxy = self.quantize(&x.bracket(y)?)?;
        let (ux, uy) = (qx.u.form(), qy.u.form());
        let t = &(&ux.commutator(uy)? - qxy.u.form()) + &(&x.lie_derivative(uy)? - &y.lie_derivative(ux)?);
        let order = i64::from(self.sol.order());
        if !self
            .sol
            .op_d(&t)?
            .agrees_upto(&WeylForm::zero(t.ctx()), order - 1)
        {
            return Err(Error::Postcondition(format!("tau({x}, {y}) is not flat")));
        }
        if t.min_h_power().is_some_and(|h| h < 0) {
            return Err(Error::Postcondition(format!(
                "tau({x}, {y}) has negative h-powers"
            )));
        }
        Ok(t)
    }

    /// `σ(τ(X, Y))`
    pub fn tau(&self, x: &SymplecticVectorField, y: &SymplecticVectorField) -> Result<StarFunction> {
        StarFunction::from_form(&self.tau_form(x, y)?.sigma())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fedosov::SymplecticConnection;

    fn ctx(order: u32) -> Arc<ChartContext> {
        ChartContext::standard(2, order).unwrap()
    }

    fn x(i: usize) -> Poly {
        Poly::var(2, i)
    }

    fn field(c: &Arc<ChartContext>, comps: [Poly; 2]) -> SymplecticVectorField {
        SymplecticVectorField::new(c, comps.to_vec()).unwrap()
    }

    fn d1(c: &Arc<ChartContext>) -> SymplecticVectorField {
        SymplecticVectorField::coordinate(c, 0)
    }

    fn hyperbolic(c: &Arc<ChartContext>) -> SymplecticVectorField {
        field(c, [x(0), -&x(1)])
    }

    fn quadratic(c: &Arc<ChartContext>) -> SymplecticVectorField {
        field(c, [&x(0) * &x(0), (&x(0) * &x(1)).scale(&int(-2))])
    }

    fn fixture(order: u32) -> SymplecticConnection {
        SymplecticConnection::from_entries(&ctx(order), [(0, 0, 0, x(1))]).unwrap()
    }

    #[test]
    fn symplectic_check() {
        let c = ctx(4);
        assert!(SymplecticVectorField::new(&c, vec![Poly::one(2), Poly::zero(2)]).is_ok());
        assert!(SymplecticVectorField::new(&c, vec![x(0), -&x(1)]).is_ok());
        assert_eq!(
            SymplecticVectorField::new(&c, vec![x(0), Poly::zero(2)]).unwrap_err(),
            Error::NotSymplectic { i: 1, j: 2 }
        );
        let h = SymplecticVectorField::hamiltonian(&c, &(&(&x(0) * &x(0)) * &x(1))).unwrap();
        assert_eq!(h.component(0).clone(), (&x(0) * &x(0)).scale(&int(1)));
        assert_eq!(h, quadratic(&c));
    }

    #[test]
    fn brackets() {
        let c = ctx(4);
        let d2 = SymplecticVectorField::coordinate(&c, 1);
        assert!(d1(&c).bracket(&d2).unwrap().is_zero());
        assert_eq!(d1(&c).bracket(&hyperbolic(&c)).unwrap(), d1(&c));
        assert!(quadratic(&c).bracket(&quadratic(&c)).unwrap().is_zero());
    }

    #[test]
    fn lie_derivative_examples() {
        let c = ctx(4);
        let y1 = WeylForm::y(&c, 0);
        let a = y1.mul_poly(&x(0));
        assert_eq!(d1(&c).lie_derivative(&a).unwrap(), y1);
        assert_eq!(hyperbolic(&c).lie_derivative(&y1).unwrap(), y1);
        let dx2 = WeylForm::dx(&c, 1);
        assert_eq!(hyperbolic(&c).lie_derivative(&dx2).unwrap(), -&dx2);
    }

    #[test]
    fn eta_on_flat_chart() {
        let c = ctx(6);
        let sol = FedosovSolution::solve(&SymplecticConnection::flat(&c)).unwrap();
        assert!(eta_of(&d1(&c), &sol).unwrap().form().is_zero());
        assert!(eta_of(&hyperbolic(&c), &sol).unwrap().form().is_zero());
        let q = quadratic(&c);
        let eta = eta_of(&q, &sol).unwrap();
        assert_eq!(eta.form(), &q.second_derivative_term(sol.ctx_extended()));
        assert!(!eta.form().is_zero());
    }

    #[test]
    fn gamma_x_on_flat_chart() {
        let c = ctx(4);
        let flat = SymplecticConnection::flat(&c);
        assert!(gamma_x_crosscheck(&d1(&c), &flat).unwrap().is_flat());
        let gx = gamma_x_crosscheck(&quadratic(&c), &flat).unwrap();
        assert_eq!(gx.connection_form(&c), quadratic(&c).second_derivative_term(&c));
    }

    #[test]
    fn eta_routes_agree_on_nonflat_fixture() {
        let sol = FedosovSolution::solve(&fixture(4)).unwrap();
        let c = Arc::clone(sol.ctx());
        for f in [d1(&c), hyperbolic(&c), quadratic(&c)] {
            let local = eta_of(&f, &sol).unwrap();
            assert_eq!(local.form(), &eta_by_definition(&f, &sol).unwrap());
        }
    }

    #[test]
    fn u_examples() {
        let c = ctx(6);
        let sol = FedosovSolution::solve(&SymplecticConnection::flat(&c)).unwrap();
        let q = QuantizedDerivation::new(&hyperbolic(&c), &sol).unwrap();
        assert!(q.u().form().is_zero());
        let f = StarFunction::from_poly(&c, &x(0) * &x(1));
        let expected = StarFunction::from_poly(&c, hyperbolic(&c).apply(&(&x(0) * &x(1))));
        assert_eq!(q.apply(&f, &sol).unwrap(), expected);
        let q1 = QuantizedDerivation::new(&d1(&c), &sol).unwrap();
        assert_eq!(
            q1.apply(&StarFunction::from_poly(&c, x(0)), &sol).unwrap(),
            StarFunction::one(&c)
        );
        assert!(q1.apply(&StarFunction::one(&c), &sol).unwrap().is_zero());
    }

    #[test]
    fn u_first_iteration() {
        let sol = FedosovSolution::solve(&fixture(4)).unwrap();
        let c = Arc::clone(sol.ctx());
        let q = QuantizedDerivation::new(&quadratic(&c), &sol).unwrap();
        let first = eta_over_h(q.eta(), &sol).unwrap().delta_inv();
        assert!(q.u().form().agrees_upto(&first, 1));
    }

    #[test]
    fn tau_trivial_cases() {
        let c = ctx(6);
        let sol = FedosovSolution::solve(&SymplecticConnection::flat(&c)).unwrap();
        let quant = Quantizer::new(&sol);
        let d2 = SymplecticVectorField::coordinate(&c, 1);
        assert!(quant.tau(&d1(&c), &d2).unwrap().is_zero());
        let nonflat = FedosovSolution::solve(&fixture(4)).unwrap();
        let quant = Quantizer::new(&nonflat);
        let q = quadratic(nonflat.ctx());
        assert!(quant.tau(&q, &q).unwrap().is_zero());
    }

    #[test]
    fn zero_field_is_quantized_to_zero() {
        let sol = FedosovSolution::solve(&fixture(4)).unwrap();
        let z = SymplecticVectorField::zero(sol.ctx());
        let q = QuantizedDerivation::new(&z, &sol).unwrap();
        assert!(q.eta().form().is_zero());
        assert!(q.u().form().is_zero());
    }
}
