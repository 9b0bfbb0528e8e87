use anyhow::{Context, Result};
use rayon::prelude::*;

use hydrowave::catalog::parse_density_spec;
use hydrowave::commute::commute_residual_at;

use crate::args::CommuteArgs;
use crate::report::{jnum, num, write_csv, Report};

pub fn run(a: &CommuteArgs) -> Result<Report> {
    let h = parse_density_spec(&a.h).with_context(|| format!("parsing --h `{}`", a.h))?;
    let f = parse_density_spec(&a.f).with_context(|| format!("parsing --f `{}`", a.f))?;
    let probe = a.domain.grid(a.grid);
    let residuals: Vec<f64> = probe
        .par_iter()
        .map(|&(u, v)| {
            commute_residual_at(&h.density, &f.density, u, v)
                .with_context(|| format!("at (u, v) = ({u}, {v})"))
        })
        .collect::<Result<_>>()?;
    let max = residuals.iter().copied().fold(0.0, f64::max);
    if let Some(path) = &a.common.out {
        let rows = probe
            .iter()
            .zip(&residuals)
            .map(|(&(u, v), &r)| vec![num(u), num(v), num(r)]);
        write_csv(path, &["u", "v", "residual"], rows)?;
    }
    let mut rep = Report::new("commute");
    rep.field("h", h.density.provenance())
        .field("f", f.density.provenance())
        .field("domain", a.domain.to_string())
        .field("grid", a.grid)
        .number("max_residual", max)
        .number("tolerance", a.tol);
    rep.pass = max <= a.tol;
    if !rep.pass {
        let mut order: Vec<usize> = (0..probe.len()).collect();
        order.sort_by(|&i, &j| residuals[j].total_cmp(&residuals[i]));
        let rows = order
            .into_iter()
            .take(a.rows)
            .map(|i| vec![jnum(probe[i].0), jnum(probe[i].1), jnum(residuals[i])])
            .collect();
        rep.table("worst_points", &["u", "v", "residual"], rows);
    }
    Ok(rep)
}
