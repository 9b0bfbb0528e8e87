mod commute;
mod constraint;
mod evolve;
mod hodograph;
mod nutku;
mod verify;

use anyhow::{anyhow, bail, Context, Result};
use hydrowave::{FuncExpr, SpeedLaw};

use crate::args::{CaseArgs, CaseKind, Command};
use crate::report::Report;

pub fn run(cmd: &Command) -> Result<Report> {
    match cmd {
        Command::Verify(a) => verify::run(a),
        Command::Commute(a) => commute::run(a),
        Command::Hodograph(a) => hodograph::run(a),
        Command::Evolve(a) => evolve::run(a),
        Command::Nutku(a) => nutku::run(a),
        Command::ConstraintCheck(a) => constraint::run(a),
    }
}

pub(crate) fn expr(flag: &str, src: &str) -> Result<FuncExpr> {
    FuncExpr::parse(src).with_context(|| format!("parsing --{flag} `{src}`"))
}

fn need(flag: &str, x: Option<f64>) -> Result<f64> {
    x.ok_or_else(|| anyhow!("this case needs --{flag}"))
}

/// The speed law selected by `--case` and its parameters, with a description.
pub(crate) fn speed_law(c: &CaseArgs) -> Result<(SpeedLaw, String)> {
    let (law, text) = match c.case {
        CaseKind::One => {
            let (c0, v0) = (need("c0", c.c0)?, need("v0", c.v0)?);
            (SpeedLaw::Case1 { c0, v0 }, format!("case1 c0={c0} v0={v0}"))
        }
        CaseKind::Two => {
            let k0 = need("k0", c.k0)?;
            (SpeedLaw::Case2 { k0 }, format!("case2 k0={k0}"))
        }
        CaseKind::Three => {
            let k1 = need("k1", c.k1)?;
            (SpeedLaw::Case3 { k1 }, format!("case3 k1={k1}"))
        }
        CaseKind::General => {
            let a =
                c.a.as_deref()
                    .ok_or_else(|| anyhow!("the general case needs --a"))?;
            let b =
                c.b.as_deref()
                    .ok_or_else(|| anyhow!("the general case needs --b"))?;
            let text = format!("general A={a} B={b}");
            let law = SpeedLaw::GeneralAbc {
                a: expr("a", a)?,
                b: expr("b", b)?,
                c: FuncExpr::constant(0.0),
            };
            (law, text)
        }
    };
    Ok((law.validated().context("invalid speed law")?, text))
}

/// `a:b:n`.
pub(crate) fn span(s: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = s.split(':').collect();
    let [a, b, n] = parts[..] else {
        bail!("expected `a:b:n`, got `{s}`");
    };
    let a: f64 = a
        .trim()
        .parse()
        .with_context(|| format!("bad start in `{s}`"))?;
    let b: f64 = b
        .trim()
        .parse()
        .with_context(|| format!("bad end in `{s}`"))?;
    let n: usize = n
        .trim()
        .parse()
        .with_context(|| format!("bad count in `{s}`"))?;
    Ok((a, b, n))
}

/// Comma-separated numbers.
pub(crate) fn numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|p| {
            let x: f64 = p
                .trim()
                .parse()
                .with_context(|| format!("`{p}` is not a number"))?;
            if !x.is_finite() {
                bail!("`{p}` is not finite");
            }
            Ok(x)
        })
        .collect()
}
