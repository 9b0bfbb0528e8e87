use anyhow::{anyhow, bail, Context, Result};

use hydrowave::catalog::parse_density_spec;
use hydrowave::hodograph::{
    invert_from_scan, psystem_residual, solve_fields, Grid1, HodographMap, PSystem,
};
use hydrowave::solutions::family_case2;
use hydrowave::{Error, SpeedLaw};

use super::{expr, numbers, span};
use crate::args::HodographArgs;
use crate::report::{num, write_csv, Report};

pub fn run(a: &HodographArgs) -> Result<Report> {
    let system: PSystem = a
        .pressure
        .parse()
        .with_context(|| format!("parsing --pressure `{}`", a.pressure))?;
    let f = match (&a.density, &a.theta1) {
        (Some(spec), _) => {
            parse_density_spec(spec)
                .with_context(|| format!("parsing --density `{spec}`"))?
                .density
        }
        (None, Some(t1)) => {
            let SpeedLaw::Case2 { k0 } = system.speed_law() else {
                bail!("--theta1/--theta2 need a case2 pressure; pass --density instead");
            };
            let t2 = a.theta2.as_deref().unwrap_or("0");
            family_case2(k0, expr("theta1", t1)?, expr("theta2", t2)?)?
        }
        (None, None) => bail!("give --density or --theta1"),
    };
    let m = HodographMap::new(f, a.rect);
    let symmetry = m
        .symmetry_residual(&system, 20)
        .context("checking the density against the pressure")?;

    let (x0, x1, n) = span(&a.x)?;
    let grid = Grid1::span(x0, x1, n).context("bad --x")?;
    let seed = match &a.seed {
        Some(s) => match numbers(s)?[..] {
            [u, v] => (u, v),
            _ => bail!("--seed expects `u,v`, got `{s}`"),
        },
        None => invert_from_scan(&m, grid.x(0), a.t, 8)
            .context("no scan seed converges at the first grid point")?,
    };
    let times = [a.t - a.delta, a.t, a.t + a.delta];
    let fields = solve_fields(&m, grid, &times, seed)
        .with_context(|| format!("inverting from seed ({}, {})", seed.0, seed.1))?;
    let field = &fields[1];
    if let Some(path) = &a.common.out {
        let rows = (0..field.len()).map(|i| {
            vec![
                num(field.x(i)),
                num(field.u[i]),
                num(field.v[i]),
                field.flags[i].as_str().to_string(),
            ]
        });
        write_csv(path, &["x", "u", "v", "flag"], rows)?;
    }

    let mut rep = Report::new("hodograph");
    rep.field("pressure", system.to_string())
        .field("density", m.f.provenance())
        .field("rect", a.rect.to_string())
        .number("t", a.t)
        .field("points", n)
        .field("seed", format!("({}, {})", seed.0, seed.1))
        .field("catastrophes", field.flagged())
        .number("symmetry_residual", symmetry);
    let mut pass = symmetry <= a.sym_tol;
    match psystem_residual(&fields[0], field, &fields[2], &system) {
        Ok((r1, r2)) => {
            rep.number("psystem_r1", r1).number("psystem_r2", r2);
            pass &= r1.max(r2) <= a.tol;
        }
        Err(e @ (Error::MaskedCells { .. } | Error::GridTooSmall { .. })) => {
            rep.field("psystem_residual", format!("unavailable: {e}"));
        }
        Err(e) => return Err(anyhow!(e).context("p-system residual")),
    }
    rep.number("tolerance", a.tol);
    rep.pass = pass;
    Ok(rep)
}
