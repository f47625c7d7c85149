//! Symplectic connections, the Fedosov connection `D`, flat sections and the
//! star product they induce.
//!
//! A [`FedosovSolution`] works at two truncation orders: the user order `N`
//! and an extended order `N + 2`. The correction `r` is solved at the extended
//! order so that quantities divided by `h` later on (`η_X/h` in particular)
//! remain exact up to degree `N`.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::{Arc, Mutex};

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::ring::{rat, write_sum, Monomial, Poly, Rational};
use crate::weyl::{check_same, ChartContext, DxSet, TermKey, WeylForm};

fn sorted3(i: usize, j: usize, k: usize) -> (usize, usize, usize) {
    let mut v = [i, j, k];
    v.sort_unstable();
    (v[0], v[1], v[2])
}

/// Totally symmetric lowered Christoffel symbols `Γ_ijk` on a Darboux chart.
#[derive(Clone, Debug)]
pub struct SymplecticConnection {
    ctx: Arc<ChartContext>,
    gamma: BTreeMap<(usize, usize, usize), Poly>,
}

impl PartialEq for SymplecticConnection {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same_chart(&other.ctx) && self.gamma == other.gamma
    }
}

impl SymplecticConnection {
    /// The trivial connection `Γ = 0`.
    pub fn flat(ctx: &Arc<ChartContext>) -> Self {
        SymplecticConnection {
            ctx: Arc::clone(ctx),
            gamma: BTreeMap::new(),
        }
    }

    /// Installs each `(i, j, k, Γ_ijk)` entry (0-based indices) at every
    /// permutation of its indices. Two entries on the same symmetric orbit
    /// must agree.
    pub fn from_entries<I>(ctx: &Arc<ChartContext>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, usize, Poly)>,
    {
        let dim = ctx.dim();
        let mut gamma: BTreeMap<(usize, usize, usize), Poly> = BTreeMap::new();
        for (i, j, k, p) in entries {
            for idx in [i, j, k] {
                if idx >= dim {
                    return Err(Error::IndexOutOfRange { index: idx + 1, dim });
                }
            }
            if p.dim() != dim {
                return Err(Error::DimensionMismatch {
                    left: dim,
                    right: p.dim(),
                });
            }
            let key = sorted3(i, j, k);
            match gamma.get(&key) {
                Some(existing) if *existing != p => {
                    return Err(Error::SymmetryConflict {
                        i: i + 1,
                        j: j + 1,
                        k: k + 1,
                    });
                }
                Some(_) => {}
                None => {
                    gamma.insert(key, p);
                }
            }
        }
        gamma.retain(|_, p| !p.is_zero());
        Ok(SymplecticConnection {
            ctx: Arc::clone(ctx),
            gamma,
        })
    }

    pub fn ctx(&self) -> &Arc<ChartContext> {
        &self.ctx
    }

    /// Same Christoffel data at another truncation order.
    pub fn with_order(&self, order: u32) -> Self {
        SymplecticConnection {
            ctx: self.ctx.with_order(order),
            gamma: self.gamma.clone(),
        }
    }

    pub fn is_flat(&self) -> bool {
        self.gamma.is_empty()
    }

    /// Nonzero entries with sorted indices.
    pub fn entries(&self) -> impl Iterator<Item = ((usize, usize, usize), &Poly)> {
        self.gamma.iter().map(|(k, p)| (*k, p))
    }

    /// `Γ_ijk`
    pub fn gamma_lower(&self, i: usize, j: usize, k: usize) -> Poly {
        self.gamma
            .get(&sorted3(i, j, k))
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.ctx.dim()))
    }

    /// `Γ^l_jk = ω^{li} Γ_ijk`
    pub fn gamma_upper(&self, l: usize, j: usize, k: usize) -> Poly {
        let dim = self.ctx.dim();
        let mut out = Poly::zero(dim);
        for i in 0..dim {
            let w = self.ctx.omega_inv(l, i);
            if !w.is_zero() {
                out += &self.gamma_lower(i, j, k).scale(w);
            }
        }
        out
    }

    /// The connection form `Γ = ½ Γ_ijk y^i y^j dx^k` in the given context.
    pub fn connection_form(&self, ctx: &Arc<ChartContext>) -> WeylForm {
        let dim = self.ctx.dim();
        let half = rat(1, 2);
        let mut out = WeylForm::zero(ctx);
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let g = self.gamma_lower(i, j, k);
                    if g.is_zero() {
                        continue;
                    }
                    let y = Monomial::var(dim, i).mul(&Monomial::var(dim, j));
                    out.add_poly(TermKey::new(y, DxSet::single(k), 0), g.scale(&half));
                }
            }
        }
        out
    }
}

/// `R = ¼ R_ijkl y^i y^j dx^k ∧ dx^l` together with its components.
#[derive(Clone, Debug)]
pub struct CurvatureForm {
    components: BTreeMap<(usize, usize, usize, usize), Poly>,
    dim: usize,
    form: WeylForm,
}

impl CurvatureForm {
    /// `R_ijkl = ω_ip R^p_jkl` with `R(X,Y) = ∇_X∇_Y - ∇_Y∇_X - ∇_[X,Y]`.
    pub fn of(conn: &SymplecticConnection, ctx: &Arc<ChartContext>) -> Self {
        let dim = conn.ctx.dim();
        let upper: Vec<Vec<Vec<Poly>>> = (0..dim)
            .map(|l| {
                (0..dim)
                    .map(|j| (0..dim).map(|k| conn.gamma_upper(l, j, k)).collect())
                    .collect()
            })
            .collect();
        let mut components = BTreeMap::new();
        for p in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    for l in 0..dim {
                        // R^p_jkl = ∂_k Γ^p_lj - ∂_l Γ^p_kj + Γ^m_lj Γ^p_km - Γ^m_kj Γ^p_lm
                        let mut v = &upper[p][l][j].partial(k) - &upper[p][k][j].partial(l);
                        for m in 0..dim {
                            v += &(&upper[m][l][j] * &upper[p][k][m]);
                            v -= &(&upper[m][k][j] * &upper[p][l][m]);
                        }
                        if v.is_zero() {
                            continue;
                        }
                        for i in 0..dim {
                            let w = conn.ctx.omega(i, p);
                            if w.is_zero() {
                                continue;
                            }
                            let e = components.entry((i, j, k, l)).or_insert_with(|| Poly::zero(dim));
                            *e += &v.scale(w);
                        }
                    }
                }
            }
        }
        components.retain(|_, p: &mut Poly| !p.is_zero());
        let quarter = rat(1, 4);
        let mut form = WeylForm::zero(ctx);
        for (&(i, j, k, l), c) in &components {
            let y = Monomial::var(dim, i).mul(&Monomial::var(dim, j));
            let (sign, dx) = DxSet::single(l)
                .insert_left(k)
                .expect("R_ijkk vanishes by antisymmetry");
            let c = c.scale(&(&quarter * Rational::from_integer(sign.into())));
            form.add_poly(TermKey::new(y, dx, 0), c);
        }
        CurvatureForm {
            components,
            dim,
            form,
        }
    }

    /// `R_ijkl`
    pub fn component(&self, i: usize, j: usize, k: usize, l: usize) -> Poly {
        self.components
            .get(&(i, j, k, l))
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.dim))
    }

    pub fn form(&self) -> &WeylForm {
        &self.form
    }

    pub fn is_zero(&self) -> bool {
        self.components.is_empty()
    }
}

/// `∂a = da - [Γ/h, a]`
pub fn op_partial(a: &WeylForm, conn: &SymplecticConnection) -> Result<WeylForm> {
    if !a.ctx().same_chart(conn.ctx()) {
        return Err(Error::ContextMismatch);
    }
    let gamma = conn.connection_form(a.ctx());
    Ok(&a.exterior_d() - &gamma.commutator_div_h(a)?)
}

/// Formal power series `Σ p_l h^l` truncated at `h^⌊N/2⌋`.
#[derive(Clone)]
pub struct StarFunction {
    ctx: Arc<ChartContext>,
    coeffs: BTreeMap<u32, Poly>,
}

impl PartialEq for StarFunction {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.same_chart(&other.ctx) && self.coeffs == other.coeffs
    }
}

impl Eq for StarFunction {}

impl fmt::Debug for StarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "StarFunction({self})")
    }
}

impl StarFunction {
    pub fn zero(ctx: &Arc<ChartContext>) -> Self {
        StarFunction {
            ctx: Arc::clone(ctx),
            coeffs: BTreeMap::new(),
        }
    }

    pub fn from_poly(ctx: &Arc<ChartContext>, p: Poly) -> Self {
        Self::from_coeffs(ctx, [(0, p)])
    }

    pub fn constant(ctx: &Arc<ChartContext>, c: Rational) -> Self {
        Self::from_poly(ctx, Poly::constant(ctx.dim(), c))
    }

    pub fn one(ctx: &Arc<ChartContext>) -> Self {
        Self::constant(ctx, Rational::one())
    }

    /// Builds `Σ p_l h^l`, dropping powers above `⌊N/2⌋`.
    pub fn from_coeffs<I>(ctx: &Arc<ChartContext>, coeffs: I) -> Self
    where
        I: IntoIterator<Item = (u32, Poly)>,
    {
        let mut out = Self::zero(ctx);
        for (l, p) in coeffs {
            assert_eq!(p.dim(), ctx.dim(), "coefficient dimension mismatch");
            out.add_coeff(l, &p);
        }
        out
    }

    fn add_coeff(&mut self, l: u32, p: &Poly) {
        if l > self.ctx.h_order() || p.is_zero() {
            return;
        }
        let e = self.coeffs.entry(l).or_insert_with(|| Poly::zero(self.ctx.dim()));
        *e += p;
        if e.is_zero() {
            self.coeffs.remove(&l);
        }
    }

    /// Reads a y-free, dx-free form with nonnegative h-powers.
    pub fn from_form(form: &WeylForm) -> Result<Self> {
        let mut out = Self::zero(form.ctx());
        for (k, p) in form.terms() {
            if !k.y.is_one() || k.dx != DxSet::EMPTY || k.h < 0 {
                return Err(Error::Invalid(format!(
                    "form is not a scalar function series: {form}"
                )));
            }
            out.add_coeff(k.h as u32, p);
        }
        Ok(out)
    }

    pub fn to_form(&self) -> WeylForm {
        let dim = self.ctx.dim();
        let mut out = WeylForm::zero(&self.ctx);
        for (&l, p) in &self.coeffs {
            out.add_poly(
                TermKey::new(Monomial::one(dim), DxSet::EMPTY, l as i32),
                p.clone(),
            );
        }
        out
    }

    pub fn ctx(&self) -> &Arc<ChartContext> {
        &self.ctx
    }

    pub fn with_context(&self, ctx: &Arc<ChartContext>) -> Result<Self> {
        if !self.ctx.same_chart(ctx) {
            return Err(Error::ContextMismatch);
        }
        Ok(Self::from_coeffs(ctx, self.coeffs.clone()))
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Coefficient of `h^l`.
    pub fn coefficient(&self, l: u32) -> Poly {
        self.coeffs
            .get(&l)
            .cloned()
            .unwrap_or_else(|| Poly::zero(self.ctx.dim()))
    }

    pub fn coeffs(&self) -> impl Iterator<Item = (u32, &Poly)> {
        self.coeffs.iter().map(|(l, p)| (*l, p))
    }

    /// Highest h-power present.
    pub fn h_degree(&self) -> Option<u32> {
        self.coeffs.keys().next_back().copied()
    }

    /// Keeps the powers `h^0 ..= h^m`.
    pub fn truncate_h(&self, m: u32) -> Self {
        StarFunction {
            ctx: Arc::clone(&self.ctx),
            coeffs: self
                .coeffs
                .iter()
                .filter(|(l, _)| **l <= m)
                .map(|(l, p)| (*l, p.clone()))
                .collect(),
        }
    }

    /// The `h = 0` value.
    pub fn classical(&self) -> Poly {
        self.coefficient(0)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        check_same(&self.ctx, &other.ctx)?;
        let mut out = self.clone();
        for (&l, p) in &other.coeffs {
            out.add_coeff(l, p);
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        check_same(&self.ctx, &other.ctx)?;
        let mut out = self.clone();
        for (&l, p) in &other.coeffs {
            out.add_coeff(l, &-p);
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::from_coeffs(&self.ctx, self.coeffs.iter().map(|(l, p)| (*l, p.scale(c))))
    }

    /// Commutative product of the series, truncated in `h`.
    pub fn pointwise_mul(&self, other: &Self) -> Result<Self> {
        check_same(&self.ctx, &other.ctx)?;
        let mut out = Self::zero(&self.ctx);
        for (&a, p) in &self.coeffs {
            for (&b, q) in &other.coeffs {
                out.add_coeff(a + b, &(p * q));
            }
        }
        Ok(out)
    }

    /// Multiplies by `h^k`.
    pub fn mul_h(&self, k: u32) -> Self {
        Self::from_coeffs(&self.ctx, self.coeffs.iter().map(|(l, p)| (l + k, p.clone())))
    }
}

impl fmt::Display for StarFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let items: Vec<(&Rational, String)> = self
            .coeffs
            .iter()
            .flat_map(|(&l, p)| {
                p.terms().rev().map(move |(m, c)| {
                    let mono = m.render("x");
                    let h = match l {
                        0 => String::new(),
                        1 => "h".to_string(),
                        _ => format!("h^{l}"),
                    };
                    let factor = match (mono.is_empty(), h.is_empty()) {
                        (true, _) => h,
                        (false, true) => mono,
                        (false, false) => format!("{mono}*{h}"),
                    };
                    (c, factor)
                })
            })
            .collect();
        write_sum(f, items)
    }
}

impl std::ops::Add for &StarFunction {
    type Output = StarFunction;
    fn add(self, rhs: &StarFunction) -> StarFunction {
        self.try_add(rhs).expect("context mismatch")
    }
}

impl std::ops::Sub for &StarFunction {
    type Output = StarFunction;
    fn sub(self, rhs: &StarFunction) -> StarFunction {
        self.try_sub(rhs).expect("context mismatch")
    }
}

impl std::ops::Neg for &StarFunction {
    type Output = StarFunction;
    fn neg(self) -> StarFunction {
        self.scale(&-Rational::one())
    }
}

/// A solution of `Da = 0` in `W`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatSection {
    form: WeylForm,
}

impl FlatSection {
    pub fn form(&self) -> &WeylForm {
        &self.form
    }

    pub fn into_form(self) -> WeylForm {
        self.form
    }

    /// `σ(a)` as a function series.
    pub fn sigma(&self) -> StarFunction {
        StarFunction::from_form(&self.form.sigma()).expect("flat sections have no negative h-powers")
    }
}

/// The correction `r` and the resulting Fedosov connection for a given
/// symplectic connection and truncation order.
pub struct FedosovSolution {
    conn: SymplecticConnection,
    ctx: Arc<ChartContext>,
    ctx_ext: Arc<ChartContext>,
    curvature: CurvatureForm,
    r_ext: WeylForm,
    r: WeylForm,
    iterations: usize,
    lift_cache: Mutex<HashMap<Vec<(u32, Poly)>, WeylForm>>,
}

impl fmt::Debug for FedosovSolution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FedosovSolution")
            .field("order", &self.ctx.order())
            .field("r", &self.r)
            .finish_non_exhaustive()
    }
}

/// Iterates `step` from `start` until two consecutive iterates agree.
fn fixed_point<F>(start: WeylForm, cap: usize, what: &'static str, mut step: F) -> Result<(WeylForm, usize)>
where
    F: FnMut(&WeylForm) -> Result<WeylForm>,
{
    let mut cur = start;
    for it in 1..=cap {
        let next = step(&cur)?;
        if next == cur {
            return Ok((cur, it));
        }
        cur = next;
    }
    Err(Error::NonConvergence {
        what,
        iterations: cap,
    })
}

/// Iterates `x ← base + step(x)` for a linear `step`. By linearity each
/// increment is `step` of the previous one, so only increments are pushed
/// through `step`.
pub(crate) fn affine_fixed_point<F>(
    start: WeylForm,
    base: &WeylForm,
    cap: usize,
    what: &'static str,
    mut step: F,
) -> Result<(WeylForm, usize)>
where
    F: FnMut(&WeylForm) -> Result<WeylForm>,
{
    let mut cur = &step(&start)? + base;
    let mut inc = &cur - &start;
    for it in 1..=cap {
        if inc.is_zero() {
            return Ok((cur, it));
        }
        inc = step(&inc)?;
        cur = &cur + &inc;
    }
    Err(Error::NonConvergence {
        what,
        iterations: cap,
    })
}

impl FedosovSolution {
    /// Solves `δr = R + ∂r - r∘r/h`, `δ⁻¹r = 0` by iterating
    /// `r ← δ⁻¹(R + ∂r - r∘r/h)` from zero.
    pub fn solve(conn: &SymplecticConnection) -> Result<Self> {
        let ctx = Arc::clone(conn.ctx());
        let ctx_ext = ctx.with_order(ctx.order() + 2);
        let curvature = CurvatureForm::of(conn, &ctx_ext);
        let gamma = conn.connection_form(&ctx_ext);
        let half = rat(1, 2);
        let cap = ctx_ext.order() as usize + 1;
        let (r_ext, iterations) = fixed_point(WeylForm::zero(&ctx_ext), cap, "r recursion", |r| {
            let partial = &r.exterior_d() - &gamma.commutator_div_h(r)?;
            // r is odd, so r∘r = ½[r, r]
            let square = r.commutator_div_h(r)?.scale(&half);
            Ok((&(curvature.form() + &partial) - &square).delta_inv())
        })?;
        let r = r_ext.with_context(&ctx)?;
        Ok(FedosovSolution {
            conn: conn.clone(),
            curvature: CurvatureForm::of(conn, &ctx),
            ctx,
            ctx_ext,
            r_ext,
            r,
            iterations,
            lift_cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn connection(&self) -> &SymplecticConnection {
        &self.conn
    }

    pub fn ctx(&self) -> &Arc<ChartContext> {
        &self.ctx
    }

    /// Context at order `N + 2`, where `r` is solved.
    pub fn ctx_extended(&self) -> &Arc<ChartContext> {
        &self.ctx_ext
    }

    pub fn order(&self) -> u32 {
        self.ctx.order()
    }

    pub fn curvature(&self) -> &CurvatureForm {
        &self.curvature
    }

    /// `r` truncated at order `N`.
    pub fn r(&self) -> &WeylForm {
        &self.r
    }

    /// `r` at order `N + 2`.
    pub fn r_extended(&self) -> &WeylForm {
        &self.r_ext
    }

    /// Number of iterations the recursion for `r` took to stabilise.
    pub fn iterations(&self) -> usize {
        self.iterations
    }

    fn r_in(&self, ctx: &Arc<ChartContext>) -> Result<WeylForm> {
        if ctx.order() == self.ctx.order() {
            Ok(self.r.clone())
        } else if ctx.order() <= self.ctx_ext.order() {
            self.r_ext.with_context(ctx)
        } else {
            Err(Error::TruncationOverflow {
                requested: ctx.order(),
                limit: self.ctx_ext.order(),
            })
        }
    }

    /// `∂a`
    pub fn partial(&self, a: &WeylForm) -> Result<WeylForm> {
        op_partial(a, &self.conn)
    }

    /// `(D + δ)a = ∂a - [r/h, a]`
    pub fn d_plus_delta(&self, a: &WeylForm) -> Result<WeylForm> {
        let r = self.r_in(a.ctx())?;
        Ok(&self.partial(a)? - &r.commutator_div_h(a)?)
    }

    /// `Da = -δa + ∂a - [r/h, a]`. Since `δ` lowers degree, the result is
    /// exact only up to degree `N - 1`.
    pub fn op_d(&self, a: &WeylForm) -> Result<WeylForm> {
        Ok(&self.d_plus_delta(a)? - &a.delta())
    }

    /// The unique flat section `a` with `σ(a) = f`, from the iteration
    /// `a ← f + δ⁻¹(∂a - [r/h, a])`.
    pub fn lift(&self, f: &StarFunction) -> Result<FlatSection> {
        let f = f.with_context(&self.ctx)?;
        let key: Vec<(u32, Poly)> = f.coeffs().map(|(l, p)| (l, p.clone())).collect();
        if let Some(form) = self.lift_cache.lock().unwrap().get(&key) {
            return Ok(FlatSection { form: form.clone() });
        }
        let base = f.to_form();
        let cap = self.ctx.order() as usize + 1;
        let (form, _) = affine_fixed_point(base.clone(), &base, cap, "flat lift", |a| {
            Ok(self.d_plus_delta(a)?.delta_inv())
        })?;
        self.lift_cache.lock().unwrap().insert(key, form.clone());
        Ok(FlatSection { form })
    }

    /// `f ⋆ g = σ(σ⁻¹f ∘ σ⁻¹g)`
    pub fn star(&self, f: &StarFunction, g: &StarFunction) -> Result<StarFunction> {
        let a = self.lift(f)?;
        let b = self.lift(g)?;
        StarFunction::from_form(&a.form.moyal_mul_sigma(&b.form)?)
    }

    /// `f ⋆ g - g ⋆ f`
    pub fn star_commutator(&self, f: &StarFunction, g: &StarFunction) -> Result<StarFunction> {
        Ok(&self.star(f, g)? - &self.star(g, f)?)
    }
}

/// `{f, g} = -ω^{ij} ∂_i f ∂_j g`, so that `{x^i, x^j} = -ω^{ij}`.
pub fn poisson(f: &Poly, g: &Poly, ctx: &ChartContext) -> Result<Poly> {
    let dim = ctx.dim();
    if f.dim() != dim || g.dim() != dim {
        return Err(Error::DimensionMismatch {
            left: dim,
            right: if f.dim() != dim { f.dim() } else { g.dim() },
        });
    }
    let mut out = Poly::zero(dim);
    for i in 0..dim {
        let fi = f.partial(i);
        if fi.is_zero() {
            continue;
        }
        for j in 0..dim {
            let w = ctx.omega_inv(i, j);
            if w.is_zero() {
                continue;
            }
            out -= &(&fi * &g.partial(j)).scale(w);
        }
    }
    Ok(out)
}
