use anyhow::{Context, Result};
use rayon::prelude::*;

use hydrowave::speedlaw::{constraint_residuals, probe_points, ConstraintData};

use super::{expr, numbers, speed_law};
use crate::args::ConstraintArgs;
use crate::report::{num, write_csv, Report};

pub fn run(a: &ConstraintArgs) -> Result<Report> {
    let (law, case_text) = speed_law(&a.case)?;
    let mut cd = ConstraintData::for_law(&law, expr("c", &a.c)?)?;
    if let Some(d) = a.perturb {
        cd = cd.perturbed(d);
    }
    let probe = probe_points(&a.domain, a.grid, &numbers(&a.fvals)?);
    let per_point: Vec<[f64; 3]> = probe
        .par_iter()
        .map(|&(u, v, f)| {
            let r = constraint_residuals(&cd, &[(u, v, f)])
                .with_context(|| format!("at (u, v, f) = ({u}, {v}, {f})"))?;
            Ok([r.r1, r.r2, r.r3])
        })
        .collect::<Result<_>>()?;
    let max = |k: usize| per_point.iter().map(|r| r[k]).fold(0.0, f64::max);
    let (r1, r2, r3) = (max(0), max(1), max(2));
    if let Some(path) = &a.common.out {
        let rows = probe
            .iter()
            .zip(&per_point)
            .map(|(&(u, v, f), r)| vec![num(u), num(v), num(f), num(r[0]), num(r[1]), num(r[2])]);
        write_csv(path, &["u", "v", "f", "r1", "r2", "r3"], rows)?;
    }
    let mut rep = Report::new("constraint-check");
    rep.field("case", case_text)
        .field("c", a.c.as_str())
        .field("domain", a.domain.to_string())
        .field("grid", a.grid)
        .field("fvals", a.fvals.as_str());
    if let Some(d) = a.perturb {
        rep.number("perturbation", d);
    }
    rep.number("r1", r1)
        .number("r2", r2)
        .number("r3", r3)
        .number("tolerance", a.tol);
    rep.pass = r1.max(r2).max(r3) <= a.tol;
    Ok(rep)
}
