//! The identity suite behind `verify`: one line per identity, seeded samples.

use std::collections::BTreeMap;
use std::sync::Arc;

use fedosov::fedosov::{poisson, FedosovSolution, StarFunction};
use fedosov::liecross::{CrossElement, CrossPairElement, CrossProduct, LieAction, Strategy};
use fedosov::ring::{int, rat, Monomial, Poly, Rational};
use fedosov::symfield::{
    eta_by_definition, eta_of, gamma_x_crosscheck, QuantizedDerivation, Quantizer, SymplecticVectorField,
};
use fedosov::weyl::{ChartContext, DxSet, TermKey, WeylForm};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::problem::{Instance, Problem};

/// Which group of identities to run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    All,
    Weyl,
    Fedosov,
    Symfield,
    Liecross,
}

impl Suite {
    fn includes(self, other: Suite) -> bool {
        self == Suite::All || self == other
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckLine {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub seed: u64,
    pub order: u32,
    pub checks: Vec<CheckLine>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn render_text(&self) -> String {
        let mut out = format!("# seed {} order {}\n", self.seed, self.order);
        for c in &self.checks {
            let status = if c.passed { "PASS" } else { "FAIL" };
            out.push_str(&format!("{status} {} {}\n", c.name, c.detail));
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        out.push_str(&format!("# {} checks, {failed} failed\n", self.checks.len()));
        out
    }

    pub fn to_json(&self) -> serde_json::Value {
        json!({
            "seed": self.seed,
            "order": self.order,
            "passed": self.passed(),
            "checks": self.checks.iter().map(|c| json!({
                "name": c.name,
                "passed": c.passed,
                "detail": c.detail,
            })).collect::<Vec<_>>(),
        })
    }
}

type Outcome = Result<String, String>;

struct Runner {
    rng: ChaCha8Rng,
    checks: Vec<CheckLine>,
}

impl Runner {
    fn check(&mut self, name: impl Into<String>, f: impl FnOnce(&mut ChaCha8Rng) -> Outcome) {
        let (passed, detail) = match f(&mut self.rng) {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.checks.push(CheckLine {
            name: name.into(),
            passed,
            detail,
        });
    }
}

fn core<T>(r: fedosov::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

const SAMPLES: usize = 4;

fn samples() -> String {
    format!("samples={SAMPLES}")
}

pub fn rand_poly(rng: &mut ChaCha8Rng, dim: usize, deg: u32) -> Poly {
    let terms: Vec<(Vec<u32>, Rational)> = (0..rng.gen_range(1..=3))
        .map(|_| {
            let mut e = vec![0u32; dim];
            for _ in 0..rng.gen_range(0..=deg) {
                e[rng.gen_range(0..dim)] += 1;
            }
            (e, rat(rng.gen_range(-3..=3), rng.gen_range(1..=2)))
        })
        .collect();
    Poly::from_terms(dim, terms).expect("dimensions agree")
}

fn rand_fn(rng: &mut ChaCha8Rng, ctx: &Arc<ChartContext>, deg: u32) -> StarFunction {
    StarFunction::from_poly(ctx, rand_poly(rng, ctx.dim(), deg))
}

/// Random form with y-degree at most 3, dx-degree at most 2, h-power at most 1.
pub fn rand_form(rng: &mut ChaCha8Rng, ctx: &Arc<ChartContext>) -> WeylForm {
    let dim = ctx.dim();
    let mut out = WeylForm::zero(ctx);
    for _ in 0..rng.gen_range(1..=4) {
        let mut e = vec![0u32; dim];
        for _ in 0..rng.gen_range(0..=3) {
            e[rng.gen_range(0..dim)] += 1;
        }
        let mut dx: Vec<usize> = (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..dim)).collect();
        dx.sort_unstable();
        dx.dedup();
        let Some((_, set)) = DxSet::from_indices(&dx) else {
            continue;
        };
        let key = TermKey::new(Monomial::from_exponents(e), set, rng.gen_range(0..=1));
        if let Ok(t) = WeylForm::term(ctx, key, rand_poly(rng, dim, 2)) {
            out = &out + &t;
        }
    }
    out
}

pub fn verify(problem: &Problem, order: u32, seed: u64, suite: Suite) -> Report {
    let mut run = Runner {
        rng: ChaCha8Rng::seed_from_u64(seed),
        checks: Vec::new(),
    };
    match problem.instantiate(order) {
        Err(e) => run.check("setup.instantiate", |_| Err(e.to_string())),
        Ok(inst) => match inst.solve() {
            Err(e) => run.check("setup.solve", |_| Err(e.to_string())),
            Ok(sol) => {
                if suite.includes(Suite::Weyl) {
                    weyl_suite(&mut run, &inst);
                }
                if suite.includes(Suite::Fedosov) {
                    fedosov_suite(&mut run, problem, &sol, order);
                }
                if suite.includes(Suite::Symfield) {
                    symfield_suite(&mut run, &inst, &sol);
                }
                if suite.includes(Suite::Liecross) {
                    match &inst.action {
                        Some(action) => liecross_suite(&mut run, action, &sol),
                        None => run.check("liecross.skipped", |_| Ok("no algebra declared".into())),
                    }
                }
            }
        },
    }
    Report {
        seed,
        order,
        checks: run.checks,
    }
}

fn weyl_suite(run: &mut Runner, inst: &Instance) {
    let ctx = &inst.ctx;
    let n = i64::from(ctx.order());
    run.check("weyl.associativity", |rng| {
        for _ in 0..SAMPLES {
            let (a, b, c) = (rand_form(rng, ctx), rand_form(rng, ctx), rand_form(rng, ctx));
            ensure(&(&a * &b) * &c == &a * &(&b * &c), || {
                format!("fails for a = {a}")
            })?;
        }
        Ok(samples())
    });
    run.check("weyl.delta-squared", |rng| {
        for _ in 0..SAMPLES {
            let a = rand_form(rng, ctx);
            ensure(
                a.delta().delta().is_zero() && a.delta_star().delta_star().is_zero(),
                || format!("fails for a = {a}"),
            )?;
        }
        Ok(samples())
    });
    run.check("weyl.hodge", |rng| {
        for _ in 0..SAMPLES {
            let a = rand_form(rng, ctx).truncate(ctx.order().saturating_sub(1));
            let rebuilt = &(&a.delta_inv().delta() + &a.delta().delta_inv()) + &a.a00();
            ensure(rebuilt == a, || format!("fails for a = {a}"))?;
        }
        Ok(samples())
    });
    run.check("weyl.delta-derivation", |rng| {
        for _ in 0..SAMPLES {
            let (a, b) = (rand_form(rng, ctx), rand_form(rng, ctx));
            for k in 0..=2u32 {
                let ak = a.form_component(k);
                let sign = if k % 2 == 0 { int(1) } else { int(-1) };
                let lhs = (&ak * &b).delta();
                let rhs = &(&ak.delta() * &b) + &(&ak * &b.delta()).scale(&sign);
                ensure(lhs.agrees_upto(&rhs, n - 1), || format!("fails for a = {ak}"))?;
            }
        }
        Ok(format!("{} through degree {}", samples(), n - 1))
    });
    run.check("weyl.delta-inner", |rng| {
        let mut theta = WeylForm::zero(ctx);
        for i in 0..ctx.dim() {
            for j in 0..ctx.dim() {
                let w = ctx.omega(i, j).clone();
                if !w.is_zero() {
                    theta = &theta + &core(WeylForm::y(ctx, i).symbol_mul(&WeylForm::dx(ctx, j)))?.scale(&w);
                }
            }
        }
        for _ in 0..SAMPLES {
            let a = rand_form(rng, ctx);
            ensure(a.delta() == core(theta.commutator_div_h(&a))?, || {
                format!("fails for a = {a}")
            })?;
        }
        Ok(samples())
    });
    run.check("weyl.filtration", |rng| {
        for _ in 0..SAMPLES {
            let (a, b) = (rand_form(rng, ctx), rand_form(rng, ctx));
            let p = &a * &b;
            if let (Some(da), Some(db), Some(dp)) = (a.min_degree(), b.min_degree(), p.min_degree()) {
                ensure(dp >= da + db, || format!("degree {dp} < {da} + {db}"))?;
            }
            ensure(p.terms().all(|(k, _)| k.degree() >= 0 && k.degree() <= n), || {
                "inadmissible term".into()
            })?;
        }
        Ok(samples())
    });
}

fn fedosov_suite(run: &mut Runner, problem: &Problem, sol: &FedosovSolution, order: u32) {
    let ctx = sol.ctx();
    let n = i64::from(order);
    run.check("fedosov.d-squared", |rng| {
        for _ in 0..SAMPLES {
            let a = rand_form(rng, ctx);
            let dda = core(sol.op_d(&core(sol.op_d(&a))?))?;
            ensure(dda.agrees_upto(&WeylForm::zero(ctx), n - 2), || {
                format!("D^2 a != 0 for a = {a}")
            })?;
        }
        Ok(format!("{} through degree {}", samples(), n - 2))
    });
    run.check("fedosov.r-normalized", |_| {
        ensure(sol.r().delta_inv().is_zero(), || "delta^-1 r != 0".into())?;
        ensure(sol.r().min_degree().is_none_or(|d| d >= 3), || {
            "r has terms below degree 3".into()
        })?;
        Ok(format!("iterations={}", sol.iterations()))
    });
    run.check("fedosov.lift-sigma", |rng| {
        for _ in 0..SAMPLES {
            let f = StarFunction::from_coeffs(
                ctx,
                [
                    (0, rand_poly(rng, ctx.dim(), 3)),
                    (1, rand_poly(rng, ctx.dim(), 1)),
                ],
            );
            let a = core(sol.lift(&f))?;
            ensure(a.sigma() == f, || format!("sigma(lift f) != f for f = {f}"))?;
            ensure(core(sol.lift(&a.sigma()))?.form() == a.form(), || {
                "lift(sigma a) != a".into()
            })?;
        }
        Ok(samples())
    });
    run.check("fedosov.associativity", |rng| {
        for _ in 0..SAMPLES {
            let (f, g, h) = (rand_fn(rng, ctx, 2), rand_fn(rng, ctx, 2), rand_fn(rng, ctx, 2));
            let left = core(sol.star(&core(sol.star(&f, &g))?, &h))?;
            let right = core(sol.star(&f, &core(sol.star(&g, &h))?))?;
            ensure(left == right, || format!("fails for f = {f}, g = {g}, h = {h}"))?;
        }
        Ok(samples())
    });
    run.check("fedosov.unit-and-center", |rng| {
        let one = StarFunction::one(ctx);
        for _ in 0..SAMPLES {
            let f = rand_fn(rng, ctx, 3);
            let c = rat(rng.gen_range(-5..=5), rng.gen_range(1..=3));
            let k = StarFunction::constant(ctx, c.clone());
            ensure(
                core(sol.star(&one, &f))? == f && core(sol.star(&f, &one))? == f,
                || format!("unit fails on {f}"),
            )?;
            let cf = f.scale(&c);
            ensure(
                core(sol.star(&k, &f))? == cf && core(sol.star(&f, &k))? == cf,
                || format!("{c} not central"),
            )?;
        }
        Ok(samples())
    });
    run.check("fedosov.first-order-bracket", |rng| {
        for _ in 0..SAMPLES {
            let (f, g) = (rand_fn(rng, ctx, 3), rand_fn(rng, ctx, 3));
            let comm = core(sol.star_commutator(&f, &g))?;
            let pb = core(poisson(&f.classical(), &g.classical(), ctx))?;
            ensure(comm.coefficient(0).is_zero() && comm.coefficient(1) == pb, || {
                format!("[f, g]/h|0 != {{f, g}} for f = {f}, g = {g}")
            })?;
        }
        Ok(samples())
    });
    run.check("fedosov.truncation-stability", |rng| {
        let high = core(problem.instantiate(order + 2).and_then(|i| i.solve()))?;
        let m = ctx.h_order();
        for _ in 0..SAMPLES {
            let (f, g) = (rand_poly(rng, ctx.dim(), 3), rand_poly(rng, ctx.dim(), 3));
            let lo = core(sol.star(
                &StarFunction::from_poly(ctx, f.clone()),
                &StarFunction::from_poly(ctx, g.clone()),
            ))?;
            let hc = high.ctx();
            let hi = core(high.star(&StarFunction::from_poly(hc, f), &StarFunction::from_poly(hc, g)))?;
            ensure((0..=m).all(|l| lo.coefficient(l) == hi.coefficient(l)), || {
                format!("{lo} vs {hi}")
            })?;
        }
        Ok(format!("{} through h^{m} against order {}", samples(), order + 2))
    });
}

fn symfield_suite(run: &mut Runner, inst: &Instance, sol: &FedosovSolution) {
    let ctx = sol.ctx();
    let n = i64::from(ctx.order());
    let mut fields: Vec<(String, SymplecticVectorField)> = inst.fields.clone();
    if fields.is_empty() {
        fields = (0..ctx.dim())
            .map(|i| (format!("d{}", i + 1), SymplecticVectorField::coordinate(ctx, i)))
            .collect();
    }
    let quant = Quantizer::new(sol);
    let conn = sol.connection();
    for (name, x) in &fields {
        run.check(format!("symfield.partial-lie[{name}]"), |rng| {
            let diff = &core(gamma_x_crosscheck(x, conn))?.connection_form(ctx) - &conn.connection_form(ctx);
            for _ in 0..SAMPLES {
                let a = rand_form(rng, ctx);
                let lhs = &core(sol.partial(&core(x.lie_derivative(&a))?))?
                    - &core(x.lie_derivative(&core(sol.partial(&a))?))?;
                ensure(lhs == core(diff.commutator_div_h(&a))?, || {
                    format!("fails for a = {a}")
                })?;
            }
            Ok(samples())
        });
        run.check(format!("symfield.d-lie-eta[{name}]"), |rng| {
            let eta = core(eta_of(x, sol))?;
            let eta_n = core(eta.form().with_context(ctx))?;
            for _ in 0..SAMPLES {
                let a = rand_form(rng, ctx);
                ensure(
                    core(x.lie_derivative(&a.delta()))? == core(x.lie_derivative(&a))?.delta(),
                    || format!("L_X delta != delta L_X on {a}"),
                )?;
                let lhs = &core(sol.op_d(&core(x.lie_derivative(&a))?))?
                    - &core(x.lie_derivative(&core(sol.op_d(&a))?))?;
                ensure(lhs.agrees_upto(&core(eta_n.commutator_div_h(&a))?, n - 2), || {
                    format!("fails for a = {a}")
                })?;
            }
            Ok(format!("{} through degree {}", samples(), n - 2))
        });
        run.check(format!("symfield.eta-u[{name}]"), |_| {
            let eta = core(eta_of(x, sol))?;
            ensure(core(eta_by_definition(x, sol))? == *eta.form(), || {
                "eta routes disagree".into()
            })?;
            let ext = sol.ctx_extended();
            let d_eta = core(sol.op_d(eta.form()))?;
            ensure(
                d_eta.agrees_upto(&WeylForm::zero(ext), i64::from(ext.order()) - 1),
                || "D eta != 0".into(),
            )?;
            let q = core(QuantizedDerivation::new(x, sol))?;
            let target = core(eta.form().div_h().and_then(|e| e.with_context(ctx)))?;
            ensure(
                core(sol.op_d(q.u().form()))?.agrees_upto(&-&target, n - 1),
                || "D u != -eta/h".into(),
            )?;
            Ok(match q.u().h_range() {
                Some((lo, hi)) => format!("u h-powers {lo}..{hi}"),
                None => "u = 0".into(),
            })
        });
        run.check(format!("symfield.derivation[{name}]"), |rng| {
            for _ in 0..SAMPLES {
                let (f, g) = (rand_fn(rng, ctx, 2), rand_fn(rng, ctx, 2));
                let lhs = core(quant.apply(x, &core(sol.star(&f, &g))?))?;
                let rhs = &core(sol.star(&core(quant.apply(x, &f))?, &g))?
                    + &core(sol.star(&f, &core(quant.apply(x, &g))?))?;
                ensure(lhs == rhs, || format!("fails for f = {f}, g = {g}"))?;
            }
            ensure(core(quant.apply(x, &StarFunction::one(ctx)))?.is_zero(), || {
                "X~(1) != 0".into()
            })?;
            Ok(samples())
        });
    }
    for (i, (nx, x)) in fields.iter().enumerate() {
        for (ny, y) in &fields[i + 1..] {
            run.check(format!("symfield.cocycle[{nx},{ny}]"), |rng| {
                let xy = core(x.bracket(y))?;
                let (ex, ey, exy) = (
                    core(eta_of(x, sol))?,
                    core(eta_of(y, sol))?,
                    core(eta_of(&xy, sol))?,
                );
                let lhs = &core(x.lie_derivative(ey.form()))? - &core(y.lie_derivative(ex.form()))?;
                ensure(lhs == *exy.form(), || "eta cocycle fails".into())?;
                let sum = core(x.try_add(y))?;
                ensure(*core(eta_of(&sum, sol))?.form() == ex.form() + ey.form(), || {
                    "eta not linear".into()
                })?;
                let u = |v: &SymplecticVectorField| core(quant.quantize(v)).map(|q| q.u().form().clone());
                ensure(u(&sum)? == &u(x)? + &u(y)?, || "u not linear".into())?;
                let t = core(quant.tau(x, y))?;
                for _ in 0..SAMPLES {
                    let f = rand_fn(rng, ctx, 2);
                    let a = core(quant.apply(x, &core(quant.apply(y, &f))?))?;
                    let b = core(quant.apply(y, &core(quant.apply(x, &f))?))?;
                    let c = core(quant.apply(&xy, &f))?;
                    ensure(&(&a - &b) - &c == core(sol.star_commutator(&t, &f))?, || {
                        format!("fails for f = {f}")
                    })?;
                }
                Ok(format!("{}; tau = {t}", samples()))
            });
        }
    }
    for i in 0..fields.len() {
        for j in i + 1..fields.len() {
            for k in j + 1..fields.len() {
                let (x, y, z) = (&fields[i].1, &fields[j].1, &fields[k].1);
                run.check(
                    format!(
                        "symfield.tau-closure[{},{},{}]",
                        fields[i].0, fields[j].0, fields[k].0
                    ),
                    |_| {
                        let t = |p: &SymplecticVectorField, q: &SymplecticVectorField| core(quant.tau(p, q));
                        let br = |p: &SymplecticVectorField, q: &SymplecticVectorField| core(p.bracket(q));
                        let lhs = &(&t(&br(x, y)?, z)? + &t(&br(y, z)?, x)?) + &t(&br(z, x)?, y)?;
                        let ap = |p: &SymplecticVectorField, f: StarFunction| core(quant.apply(p, &f));
                        let rhs = &(&ap(x, t(y, z)?)? + &ap(y, t(z, x)?)?) + &ap(z, t(x, y)?)?;
                        ensure(lhs == rhs, || format!("{lhs} vs {rhs}"))?;
                        Ok("exact".into())
                    },
                );
            }
        }
    }
}

/// Undeformed cross product through the coproduct of `U(g)`, as an oracle
/// for the classical limit.
fn classical_cross(
    action: &LieAction,
    ctx: &Arc<ChartContext>,
    u: &CrossElement,
    v: &CrossElement,
) -> CrossElement {
    let alg = action.algebra();
    let normal = |word: Vec<usize>| {
        let mut out: BTreeMap<Vec<usize>, Rational> = BTreeMap::new();
        let mut todo = vec![(word, Rational::one())];
        while let Some((w, c)) = todo.pop() {
            match w.windows(2).position(|p| p[0] > p[1]) {
                None => *out.entry(w).or_insert_with(Rational::zero) += c,
                Some(p) => {
                    let mut s = w.clone();
                    s.swap(p, p + 1);
                    todo.push((s, c.clone()));
                    for k in 0..alg.dim() {
                        let sc = alg.structure(w[p], w[p + 1], k);
                        if !sc.is_zero() {
                            let mut nw = w[..p].to_vec();
                            nw.push(k);
                            nw.extend_from_slice(&w[p + 2..]);
                            todo.push((nw, &c * sc));
                        }
                    }
                }
            }
        }
        out
    };
    let mut out = CrossElement::zero(ctx);
    for (alpha, f) in u.terms() {
        for (beta, g) in v.terms() {
            for mask in 0u32..(1 << alpha.len()) {
                let mut acted = g.classical();
                for (pos, &i) in alpha.iter().enumerate().rev() {
                    if mask & (1 << pos) != 0 {
                        acted = action.image(i).apply(&acted);
                    }
                }
                let mut rest: Vec<usize> = alpha
                    .iter()
                    .enumerate()
                    .filter(|(pos, _)| mask & (1 << pos) == 0)
                    .map(|(_, &i)| i)
                    .collect();
                rest.extend_from_slice(beta);
                let coeff = &f.classical() * &acted;
                for (w, s) in normal(rest) {
                    let sf = StarFunction::from_poly(ctx, coeff.scale(&s));
                    out = out
                        .try_add(&CrossElement::monomial(&sf, w).expect("normal word"))
                        .expect("same context");
                }
            }
        }
    }
    out
}

fn liecross_suite(run: &mut Runner, action: &LieAction, sol: &FedosovSolution) {
    let ctx = sol.ctx();
    let m = action.algebra().dim();
    let cp = match CrossProduct::new(action.clone(), sol) {
        Ok(cp) => cp,
        Err(e) => return run.check("liecross.setup", |_| Err(e.to_string())),
    };
    let rand_pair = |rng: &mut ChaCha8Rng| CrossPairElement {
        a: rand_fn(rng, ctx, 2),
        g: (0..m).map(|_| rat(rng.gen_range(-3..=3), 1)).collect(),
    };
    run.check("liecross.pair-bracket", |rng| {
        for _ in 0..SAMPLES {
            let (u, v, w) = (rand_pair(rng), rand_pair(rng), rand_pair(rng));
            let br = |p: &CrossPairElement, q: &CrossPairElement| core(cp.pair_bracket(p, q));
            ensure(core(br(&u, &v)?.try_add(&br(&v, &u)?))?.is_zero(), || {
                "not antisymmetric".into()
            })?;
            let (a, b, c) = (
                br(&u, &br(&v, &w)?)?,
                br(&v, &br(&w, &u)?)?,
                br(&w, &br(&u, &v)?)?,
            );
            ensure(core(a.try_add(&b).and_then(|s| s.try_add(&c)))?.is_zero(), || {
                "Jacobi fails".into()
            })?;
        }
        Ok(samples())
    });
    let rand_monomial = |rng: &mut ChaCha8Rng| {
        let mut w: Vec<usize> = (0..rng.gen_range(0..=2)).map(|_| rng.gen_range(0..m)).collect();
        w.sort_unstable();
        CrossElement::monomial(&rand_fn(rng, ctx, 1), w).expect("sorted word")
    };
    run.check("liecross.associativity", |rng| {
        for _ in 0..SAMPLES {
            let (a, b, c) = (rand_monomial(rng), rand_monomial(rng), rand_monomial(rng));
            let left = core(cp.mul(&core(cp.mul(&a, &b))?, &c))?;
            let right = core(cp.mul(&a, &core(cp.mul(&b, &c))?))?;
            ensure(left == right, || format!("fails for {a}, {b}, {c}"))?;
        }
        Ok(samples())
    });
    run.check("liecross.diamond", |_| {
        let mut words = 0;
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    let w = [k, j, i];
                    let l = core(cp.normalize_word(&w, Strategy::Leftmost))?;
                    let r = core(cp.normalize_word(&w, Strategy::Rightmost))?;
                    ensure(l == r, || format!("word {w:?}: {l} vs {r}"))?;
                    words += 1;
                }
            }
        }
        Ok(format!("words={words}"))
    });
    run.check("liecross.embedding", |rng| {
        for _ in 0..SAMPLES {
            let (f, g) = (rand_fn(rng, ctx, 3), rand_fn(rng, ctx, 3));
            let prod = core(cp.mul(&CrossElement::function(&f), &CrossElement::function(&g)))?;
            ensure(prod == CrossElement::function(&core(sol.star(&f, &g))?), || {
                format!("fails for {f}, {g}")
            })?;
        }
        Ok(samples())
    });
    run.check("liecross.classical-limit", |rng| {
        for i in 0..m {
            for j in 0..m {
                ensure(core(cp.tau_basis(i, j))?.coefficient(0).is_zero(), || {
                    "tau has an h^0 term".into()
                })?;
            }
        }
        for _ in 0..SAMPLES {
            let (a, b) = (rand_monomial(rng), rand_monomial(rng));
            let deformed = core(cp.mul(&a, &b))?.classical_limit();
            let classical = classical_cross(action, ctx, &a.classical_limit(), &b.classical_limit());
            ensure(deformed == classical, || format!("{deformed} vs {classical}"))?;
        }
        Ok(samples())
    });
}
