use anyhow::{Context, Result};

use hydrowave::solutions::{nutku_tower, separability_residual};

use super::expr;
use crate::args::NutkuArgs;
use crate::report::{jnum, num, write_csv, Report};

pub fn run(a: &NutkuArgs) -> Result<Report> {
    let (alpha, beta) = (expr("alpha", &a.alpha)?, expr("beta", &a.beta)?);
    let (f0, g0) = (expr("f0", &a.f0)?, expr("g0", &a.g0)?);
    let tower = nutku_tower(&alpha, &beta, &f0, &g0, a.levels as usize, &a.domain)
        .context("building the tower")?;
    let probe = a.domain.grid(a.grid);
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for (k, h) in tower.iter().enumerate() {
        let r = separability_residual(h, &alpha, &beta, &probe, a.step)
            .with_context(|| format!("level {}", k + 1))?;
        worst = worst.max(r);
        rows.push(vec![(k + 1).into(), jnum(r)]);
    }
    if let Some(path) = &a.common.out {
        let mut csv_rows = Vec::new();
        for (k, h) in tower.iter().enumerate() {
            for &(u, v) in &probe {
                csv_rows.push(vec![
                    (k + 1).to_string(),
                    num(u),
                    num(v),
                    num(h.value(u, v)?),
                ]);
            }
        }
        write_csv(path, &["level", "u", "v", "value"], csv_rows)?;
    }
    let mut rep = Report::new("nutku");
    rep.field("alpha", a.alpha.as_str())
        .field("beta", a.beta.as_str())
        .field("f0", a.f0.as_str())
        .field("g0", a.g0.as_str())
        .field("domain", a.domain.to_string())
        .field("levels", a.levels)
        .number("fd_step", a.step)
        .number("max_residual", worst)
        .number("tolerance", a.tol)
        .table("levels", &["level", "residual"], rows);
    rep.pass = worst <= a.tol;
    Ok(rep)
}
