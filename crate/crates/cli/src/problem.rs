//! The line-oriented problem file. See `docs/problem-format.md`.

use std::collections::BTreeMap;
use std::sync::Arc;

use fedosov::fedosov::{FedosovSolution, SymplecticConnection};
use fedosov::liecross::{LieAction, LieAlgebraPresentation};
use fedosov::ring::{Poly, Rational};
use fedosov::symfield::SymplecticVectorField;
use fedosov::weyl::{standard_omega, ChartContext};
use fedosov::Error as CoreError;
use num_traits::{ToPrimitive, Zero};
use sha2::{Digest, Sha256};

use crate::expr::{tokenize, variable_index, ParseError, Parser, Tok};

pub const DEFAULT_ORDER: u32 = 6;

/// Where a declaration came from, for error reporting.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl Pos {
    fn error(self, message: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.col, message)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FieldDecl {
    pub name: String,
    pub components: Vec<Poly>,
    pub pos: Pos,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AlgebraDecl {
    pub names: Vec<String>,
    /// `(i, j, k, c^k_ij)`, 0-based, both orders of each bracket.
    pub constants: Vec<(usize, usize, usize, Rational)>,
    pub pos: Pos,
}

/// A validated problem.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub dim: usize,
    pub order: u32,
    pub omega: Vec<Vec<Rational>>,
    /// Christoffel symbols `Γ_ijk` keyed by sorted 0-based indices.
    pub gamma: BTreeMap<(usize, usize, usize), Poly>,
    pub fields: Vec<FieldDecl>,
    pub algebra: Option<AlgebraDecl>,
    /// `(basis index, field index)`, one per basis element.
    pub action: Vec<(usize, usize)>,
    /// Seed derived from the file contents.
    pub seed: u64,
}

/// The problem instantiated at a truncation order.
pub struct Instance {
    pub ctx: Arc<ChartContext>,
    pub connection: SymplecticConnection,
    pub fields: Vec<(String, SymplecticVectorField)>,
    pub action: Option<LieAction>,
}

impl Instance {
    pub fn solve(&self) -> Result<FedosovSolution, CoreError> {
        FedosovSolution::solve(&self.connection)
    }

    pub fn field(&self, name: &str) -> Option<&SymplecticVectorField> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, f)| f)
    }

    pub fn basis(&self) -> Option<&[String]> {
        self.action.as_ref().map(|a| a.algebra().names())
    }
}

/// The flat problem on the plane.
pub fn default_problem() -> Problem {
    parse_problem("dim 2\n").expect("default problem is valid")
}

enum RawComponents {
    Explicit(Vec<Poly>),
    Hamiltonian(Poly),
}

struct RawField {
    name: String,
    components: RawComponents,
    pos: Pos,
}

struct RawAction {
    basis: String,
    basis_pos: Pos,
    field: String,
    field_pos: Pos,
}

type LinComb = Vec<(usize, Rational)>;

struct Builder {
    dim: Option<(usize, Pos)>,
    order: Option<(u32, Pos)>,
    omega: Vec<((usize, usize), Rational, Pos)>,
    gamma: BTreeMap<(usize, usize, usize), (Poly, Pos)>,
    fields: Vec<RawField>,
    algebra: Option<(Vec<String>, Pos)>,
    brackets: BTreeMap<(usize, usize), (LinComb, Pos)>,
    action: Vec<RawAction>,
}

fn small_index(p: &mut Parser, bound: usize, what: &str) -> Result<usize, ParseError> {
    let (n, col) = p.int_token()?;
    match n.to_usize() {
        Some(i) if i >= 1 && i <= bound => Ok(i - 1),
        _ => Err(ParseError::new(
            p.line(),
            col,
            format!("{what} index {n} outside 1..{bound}"),
        )),
    }
}

pub fn parse_problem(text: &str) -> Result<Problem, ParseError> {
    let mut b = Builder {
        dim: None,
        order: None,
        omega: Vec::new(),
        gamma: BTreeMap::new(),
        fields: Vec::new(),
        algebra: None,
        brackets: BTreeMap::new(),
        action: Vec::new(),
    };
    let mut last_line = 1;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("");
        let toks = tokenize(content, line, 1)?;
        if toks.is_empty() {
            continue;
        }
        let end = content.chars().count() + 1;
        parse_line(&mut b, &toks, line, end)?;
    }
    finish(b, last_line, text)
}

fn parse_line(
    b: &mut Builder,
    toks: &[crate::expr::Token],
    line: usize,
    end: usize,
) -> Result<(), ParseError> {
    let dim_now = b.dim.map_or(0, |(d, _)| d);
    let mut p = Parser::new(toks, line, end, dim_now, false);
    let (kw, kw_col) = p.name()?;
    let kw_pos = Pos { line, col: kw_col };
    let need_dim = |what: &str| -> Result<usize, ParseError> {
        b.dim
            .map(|(d, _)| d)
            .ok_or_else(|| kw_pos.error(format!("`dim` must be declared before `{what}`")))
    };
    match kw.as_str() {
        "dim" => {
            if b.dim.is_some() {
                return Err(kw_pos.error("duplicate `dim`"));
            }
            let (n, col) = p.int_token()?;
            let d = n.to_usize().filter(|d| *d >= 2 && d % 2 == 0 && *d <= 32);
            let d =
                d.ok_or_else(|| ParseError::new(line, col, "dimension must be even, between 2 and 32"))?;
            p.finish()?;
            b.dim = Some((d, kw_pos));
        }
        "order" => {
            if b.order.is_some() {
                return Err(kw_pos.error("duplicate `order`"));
            }
            let (n, col) = p.int_token()?;
            let o = n.to_u32().filter(|o| *o <= 64);
            let o = o.ok_or_else(|| ParseError::new(line, col, "order must be at most 64"))?;
            p.finish()?;
            b.order = Some((o, kw_pos));
        }
        "omega" => {
            let d = need_dim("omega")?;
            let i = small_index(&mut p, d, "omega")?;
            let j = small_index(&mut p, d, "omega")?;
            p.expect(Tok::Eq)?;
            let start = p.current_col();
            let v = p.expr()?.to_poly(d);
            p.finish()?;
            if !v.is_constant() {
                return Err(ParseError::new(line, start, "omega entries must be constants"));
            }
            b.omega.push(((i, j), v.constant_term(), kw_pos));
        }
        "gamma" => {
            let d = need_dim("gamma")?;
            let mut idx = [0; 3];
            for slot in &mut idx {
                *slot = small_index(&mut p, d, "gamma")?;
            }
            p.expect(Tok::Eq)?;
            let col = p.current_col();
            let v = p.expr()?.to_poly(d);
            p.finish()?;
            idx.sort_unstable();
            let key = (idx[0], idx[1], idx[2]);
            if let Some((old, old_pos)) = b.gamma.get(&key) {
                if *old != v {
                    return Err(ParseError::new(
                        line,
                        col,
                        format!(
                            "gamma {} {} {} conflicts with the symmetric entry on line {}",
                            key.0 + 1,
                            key.1 + 1,
                            key.2 + 1,
                            old_pos.line
                        ),
                    ));
                }
            } else {
                b.gamma.insert(key, (v, Pos { line, col }));
            }
        }
        "field" | "hamiltonian" => {
            let d = need_dim(&kw)?;
            let (name, col) = p.name()?;
            check_new_name(b, &name, Pos { line, col })?;
            p.expect(Tok::Eq)?;
            let pos = Pos {
                line,
                col: p.current_col(),
            };
            let components = if kw == "field" {
                p.expect(Tok::LBracket)?;
                let mut comps = vec![p.expr()?.to_poly(d)];
                while p.peek_is(&Tok::Comma) {
                    p.expect(Tok::Comma)?;
                    comps.push(p.expr()?.to_poly(d));
                }
                p.expect(Tok::RBracket)?;
                if comps.len() != d {
                    return Err(pos.error(format!("field has {} components, expected {d}", comps.len())));
                }
                RawComponents::Explicit(comps)
            } else {
                RawComponents::Hamiltonian(p.expr()?.to_poly(d))
            };
            p.finish()?;
            b.fields.push(RawField {
                name,
                components,
                pos,
            });
        }
        "algebra" => {
            if b.algebra.is_some() {
                return Err(kw_pos.error("duplicate `algebra`"));
            }
            let mut names = Vec::new();
            while !p.at_end() {
                let (n, col) = p.name()?;
                if n == "h" || variable_index(&n).is_some() || names.contains(&n) {
                    return Err(ParseError::new(
                        line,
                        col,
                        format!("invalid or repeated basis name `{n}`"),
                    ));
                }
                names.push(n);
            }
            if names.is_empty() {
                return Err(p.error("expected basis names"));
            }
            b.algebra = Some((names, kw_pos));
        }
        "bracket" => {
            let names = b
                .algebra
                .as_ref()
                .map(|(n, _)| n.clone())
                .ok_or_else(|| kw_pos.error("`algebra` must be declared before `bracket`"))?;
            let basis_index = |p: &mut Parser| -> Result<usize, ParseError> {
                let (n, col) = p.name()?;
                names
                    .iter()
                    .position(|b| *b == n)
                    .ok_or_else(|| ParseError::new(line, col, format!("unknown basis element `{n}`")))
            };
            let i = basis_index(&mut p)?;
            let j = basis_index(&mut p)?;
            p.expect(Tok::Eq)?;
            let pos = Pos {
                line,
                col: p.current_col(),
            };
            let comb = p.lincomb(&names)?;
            p.finish()?;
            let dense = |c: &[(usize, Rational)]| {
                let mut v = vec![Rational::zero(); names.len()];
                for (k, x) in c {
                    v[*k] += x;
                }
                v
            };
            let conflict = |other: &[(usize, Rational)], neg: bool, at: Pos| {
                let mine = dense(&comb);
                let theirs: Vec<Rational> = dense(other)
                    .into_iter()
                    .map(|x| if neg { -x } else { x })
                    .collect();
                if mine == theirs {
                    Ok(())
                } else {
                    Err(pos.error(format!("bracket conflicts with line {}", at.line)))
                }
            };
            if i == j && dense(&comb).iter().any(|c| !c.is_zero()) {
                return Err(pos.error("the bracket of an element with itself is zero"));
            }
            if let Some((other, at)) = b.brackets.get(&(i, j)) {
                conflict(other, false, *at)?;
            }
            if let Some((other, at)) = b.brackets.get(&(j, i)) {
                conflict(other, true, *at)?;
            }
            b.brackets.insert((i, j), (comb, pos));
        }
        "action" => {
            let (basis, bcol) = p.name()?;
            p.expect(Tok::Eq)?;
            let (field, fcol) = p.name()?;
            p.finish()?;
            b.action.push(RawAction {
                basis,
                basis_pos: Pos { line, col: bcol },
                field,
                field_pos: Pos { line, col: fcol },
            });
        }
        _ => return Err(kw_pos.error(format!("unknown keyword `{kw}`"))),
    }
    Ok(())
}

fn check_new_name(b: &Builder, name: &str, pos: Pos) -> Result<(), ParseError> {
    if name == "h" || variable_index(name).is_some() {
        return Err(pos.error(format!("`{name}` is reserved")));
    }
    if b.fields.iter().any(|f| f.name == name) {
        return Err(pos.error(format!("duplicate field `{name}`")));
    }
    Ok(())
}

fn finish(b: Builder, last_line: usize, text: &str) -> Result<Problem, ParseError> {
    let (dim, _) = b
        .dim
        .ok_or_else(|| ParseError::new(last_line, 1, "missing `dim` declaration"))?;
    let order = b.order.map_or(DEFAULT_ORDER, |(o, _)| o);

    let omega = if b.omega.is_empty() {
        standard_omega(dim)
    } else {
        let mut m = vec![vec![Rational::zero(); dim]; dim];
        let mut set: BTreeMap<(usize, usize), Pos> = BTreeMap::new();
        for ((i, j), v, pos) in &b.omega {
            for (a, c, val) in [(*i, *j, v.clone()), (*j, *i, -v)] {
                if let Some(at) = set.get(&(a, c)) {
                    if m[a][c] != val {
                        return Err(pos.error(format!("omega entry conflicts with line {}", at.line)));
                    }
                }
                m[a][c] = val;
                set.insert((a, c), *pos);
            }
        }
        m
    };
    let first_omega = b.omega.first().map_or(Pos { line: 1, col: 1 }, |o| o.2);
    let ctx = ChartContext::new(omega.clone(), order).map_err(|e| first_omega.error(e.to_string()))?;

    let mut fields = Vec::new();
    for f in b.fields {
        let x = match f.components {
            RawComponents::Explicit(c) => SymplecticVectorField::new(&ctx, c),
            RawComponents::Hamiltonian(h) => SymplecticVectorField::hamiltonian(&ctx, &h),
        }
        .map_err(|e| f.pos.error(e.to_string()))?;
        fields.push(FieldDecl {
            name: f.name,
            components: x.components().to_vec(),
            pos: f.pos,
        });
    }

    let gamma: BTreeMap<_, _> = b.gamma.iter().map(|(k, (p, _))| (*k, p.clone())).collect();
    SymplecticConnection::from_entries(&ctx, gamma.iter().map(|(&(i, j, k), p)| (i, j, k, p.clone())))
        .map_err(|e| ParseError::new(1, 1, e.to_string()))?;

    let mut algebra = None;
    let mut action = Vec::new();
    if let Some((names, pos)) = b.algebra {
        let mut constants = Vec::new();
        for (&(i, j), (comb, _)) in &b.brackets {
            for (k, c) in comb {
                constants.push((i, j, *k, c.clone()));
                if !b.brackets.contains_key(&(j, i)) {
                    constants.push((j, i, *k, -c));
                }
            }
        }
        let alg = LieAlgebraPresentation::new(names.clone(), constants.clone())
            .map_err(|e| pos.error(e.to_string()))?;
        let mut images: Vec<Option<(usize, Pos)>> = vec![None; names.len()];
        for RawAction {
            basis,
            basis_pos: bpos,
            field,
            field_pos: fpos,
        } in &b.action
        {
            let bi = names
                .iter()
                .position(|n| n == basis)
                .ok_or_else(|| bpos.error(format!("unknown basis element `{basis}`")))?;
            let fi = fields
                .iter()
                .position(|f| f.name == *field)
                .ok_or_else(|| fpos.error(format!("unknown field `{field}`")))?;
            if images[bi].is_some() {
                return Err(bpos.error(format!("duplicate action for `{basis}`")));
            }
            images[bi] = Some((fi, *bpos));
        }
        let mut fields_for = Vec::new();
        for (bi, img) in images.iter().enumerate() {
            let (fi, _) = img.ok_or_else(|| pos.error(format!("no action given for `{}`", names[bi])))?;
            action.push((bi, fi));
            fields_for.push(
                SymplecticVectorField::new(&ctx, fields[fi].components.clone()).expect("validated above"),
            );
        }
        LieAction::new(alg, fields_for).map_err(|e| match e {
            CoreError::ActionHomomorphism { i, .. } => {
                images[i - 1].expect("all present").1.error(e.to_string())
            }
            other => pos.error(other.to_string()),
        })?;
        algebra = Some(AlgebraDecl {
            names,
            constants,
            pos,
        });
    } else if let Some(a) = b.action.first() {
        return Err(a.basis_pos.error("`action` requires an `algebra` declaration"));
    }

    let digest = Sha256::digest(text.as_bytes());
    let seed = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
    Ok(Problem {
        dim,
        order,
        omega,
        gamma,
        fields,
        algebra,
        action,
        seed,
    })
}

impl Problem {
    pub fn instantiate(&self, order: u32) -> Result<Instance, CoreError> {
        let ctx = ChartContext::new(self.omega.clone(), order)?;
        let connection = SymplecticConnection::from_entries(
            &ctx,
            self.gamma.iter().map(|(&(i, j, k), p)| (i, j, k, p.clone())),
        )?;
        let fields = self
            .fields
            .iter()
            .map(|f| {
                Ok((
                    f.name.clone(),
                    SymplecticVectorField::new(&ctx, f.components.clone())?,
                ))
            })
            .collect::<Result<Vec<_>, CoreError>>()?;
        let action = match &self.algebra {
            None => None,
            Some(a) => {
                let alg = LieAlgebraPresentation::new(a.names.clone(), a.constants.clone())?;
                let images = self.action.iter().map(|(_, fi)| fields[*fi].1.clone()).collect();
                Some(LieAction::new(alg, images)?)
            }
        };
        Ok(Instance {
            ctx,
            connection,
            fields,
            action,
        })
    }
}
