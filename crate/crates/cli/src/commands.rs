//! Subcommand implementations, independent of argument parsing.

use std::path::Path;
use std::sync::Arc;

use fedosov::fedosov::StarFunction;
use fedosov::liecross::{CrossElement, CrossProduct};
use fedosov::symfield::Quantizer;
use fedosov::weyl::ChartContext;
use serde_json::json;
use thiserror::Error;

use crate::expr::{parse_cross, parse_expr, ParseError, PolyExpr};
use crate::problem::{default_problem, parse_problem, Instance, Problem};
use crate::verify::{verify, Report, Suite};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Problem { path: String, source: ParseError },
    #[error("argument {arg}: {source}")]
    Argument { arg: String, source: ParseError },
    #[error("unknown field `{0}`")]
    UnknownField(String),
    #[error("the problem declares no algebra action")]
    NoAction,
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error(transparent)]
    Core(#[from] fedosov::Error),
}

impl CliError {
    /// 2 for bad input, 1 for a failed computation.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(_) => 1,
            _ => 2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Text,
    Json,
}

/// Result of a command: what to print and whether it counts as success.
#[derive(Clone, Debug, PartialEq)]
pub struct Output {
    pub text: String,
    pub success: bool,
}

impl Output {
    fn ok(text: String) -> Self {
        Output { text, success: true }
    }
}

pub fn load_problem(path: Option<&Path>) -> Result<Problem, CliError> {
    let Some(path) = path else {
        return Ok(default_problem());
    };
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: shown.clone(),
        source,
    })?;
    parse_problem(&text).map_err(|source| CliError::Problem { path: shown, source })
}

fn function_arg(ctx: &Arc<ChartContext>, arg: &str, text: &str) -> Result<StarFunction, CliError> {
    let e = parse_expr(text, ctx.dim(), true).map_err(|source| CliError::Argument {
        arg: arg.to_string(),
        source,
    })?;
    Ok(series_function(ctx, &e))
}

fn series_function(ctx: &Arc<ChartContext>, e: &PolyExpr) -> StarFunction {
    StarFunction::from_coeffs(ctx, e.to_series(ctx.dim()))
}

fn render_function(name: &str, f: &StarFunction, format: Format) -> String {
    match format {
        Format::Text => format!("{f}\n"),
        Format::Json => {
            let coeffs: serde_json::Map<String, serde_json::Value> = f
                .coeffs()
                .map(|(l, p)| (l.to_string(), json!(p.to_string())))
                .collect();
            format!(
                "{}\n",
                json!({ "command": name, "result": f.to_string(), "coefficients": coeffs })
            )
        }
    }
}

fn solved(problem: &Problem, order: u32) -> Result<(Instance, fedosov::fedosov::FedosovSolution), CliError> {
    let inst = problem.instantiate(order)?;
    let sol = inst.solve()?;
    Ok((inst, sol))
}

pub fn star(problem: &Problem, order: u32, f: &str, g: &str, format: Format) -> Result<Output, CliError> {
    let (inst, sol) = solved(problem, order)?;
    let f = function_arg(&inst.ctx, "F", f)?;
    let g = function_arg(&inst.ctx, "G", g)?;
    Ok(Output::ok(render_function("star", &sol.star(&f, &g)?, format)))
}

pub fn quantize(
    problem: &Problem,
    order: u32,
    field: &str,
    f: &str,
    format: Format,
) -> Result<Output, CliError> {
    let (inst, sol) = solved(problem, order)?;
    let x = inst
        .field(field)
        .ok_or_else(|| CliError::UnknownField(field.to_string()))?;
    let f = function_arg(&inst.ctx, "F", f)?;
    let out = Quantizer::new(&sol).apply(x, &f)?;
    Ok(Output::ok(render_function("quantize", &out, format)))
}

pub fn tau(problem: &Problem, order: u32, x: &str, y: &str, format: Format) -> Result<Output, CliError> {
    let (inst, sol) = solved(problem, order)?;
    let fx = inst
        .field(x)
        .ok_or_else(|| CliError::UnknownField(x.to_string()))?;
    let fy = inst
        .field(y)
        .ok_or_else(|| CliError::UnknownField(y.to_string()))?;
    let out = Quantizer::new(&sol).tau(fx, fy)?;
    Ok(Output::ok(render_function("tau", &out, format)))
}

fn cross_arg(
    cp: &CrossProduct<'_>,
    basis: &[String],
    arg: &str,
    text: &str,
) -> Result<CrossElement, CliError> {
    let ctx = cp.ctx();
    let terms = parse_cross(text, ctx.dim(), basis).map_err(|source| CliError::Argument {
        arg: arg.to_string(),
        source,
    })?;
    let mut out = CrossElement::zero(ctx);
    for t in terms {
        let f = CrossElement::function(&series_function(ctx, &t.coeff));
        let w = cp.normalize_word(&t.word, fedosov::liecross::Strategy::Leftmost)?;
        out = out.try_add(&cp.mul(&f, &w)?)?;
    }
    Ok(out)
}

pub fn cross_mul(
    problem: &Problem,
    order: u32,
    u: &str,
    v: &str,
    format: Format,
) -> Result<Output, CliError> {
    let (inst, sol) = solved(problem, order)?;
    let action = inst.action.clone().ok_or(CliError::NoAction)?;
    let basis: Vec<String> = action.algebra().names().to_vec();
    let cp = CrossProduct::new(action, &sol)?;
    let u = cross_arg(&cp, &basis, "U", u)?;
    let v = cross_arg(&cp, &basis, "V", v)?;
    let p = cp.mul(&u, &v)?;
    let rendered = p.render(&basis);
    let text = match format {
        Format::Text => format!("{rendered}\n"),
        Format::Json => {
            let terms: Vec<serde_json::Value> = p
                .terms()
                .map(|(w, f)| {
                    json!({
                        "word": w.iter().map(|&i| basis[i].clone()).collect::<Vec<_>>(),
                        "coefficient": f.to_string(),
                    })
                })
                .collect();
            format!(
                "{}\n",
                json!({ "command": "cross-mul", "result": rendered, "terms": terms })
            )
        }
    };
    Ok(Output::ok(text))
}

pub fn run_verify(problem: &Problem, order: u32, seed: u64, suite: Suite, format: Format) -> Output {
    let report: Report = verify(problem, order, seed, suite);
    let text = match format {
        Format::Text => report.render_text(),
        Format::Json => format!("{}\n", report.to_json()),
    };
    Output {
        text,
        success: report.passed(),
    }
}
