use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use hydrowave::solutions::{family_case1, family_case2, family_case3, wave_residual_at};
use hydrowave::SpeedLaw;

use super::{expr, speed_law};
use crate::args::VerifyArgs;
use crate::report::{jnum, num, write_csv, Report};

pub fn run(a: &VerifyArgs) -> Result<Report> {
    let (law, case_text) = speed_law(&a.case)?;
    let (t1, t2) = (expr("theta1", &a.theta1)?, expr("theta2", &a.theta2)?);
    let f = match law {
        SpeedLaw::Case1 { c0, v0 } => family_case1(c0, v0, t1, t2)?,
        SpeedLaw::Case2 { k0 } => family_case2(k0, t1, t2)?,
        SpeedLaw::Case3 { k1 } => family_case3(k1, t1, t2)?,
        _ => bail!("verify needs --case 1, 2 or 3"),
    };
    let probe = a.domain.grid(a.grid);
    let residuals: Vec<f64> = probe
        .par_iter()
        .map(|&(u, v)| {
            wave_residual_at(&f, &law, u, v).with_context(|| format!("at (u, v) = ({u}, {v})"))
        })
        .collect::<Result<_>>()?;
    let (worst, max) =
        residuals.iter().enumerate().fold(
            (0, 0.0f64),
            |(bi, bm), (i, &r)| if r > bm { (i, r) } else { (bi, bm) },
        );
    if let Some(path) = &a.common.out {
        let rows = probe
            .iter()
            .zip(&residuals)
            .map(|(&(u, v), &r)| vec![num(u), num(v), num(r)]);
        write_csv(path, &["u", "v", "residual"], rows)?;
    }
    let mut rep = Report::new("verify");
    rep.field("case", case_text)
        .field("theta1", a.theta1.as_str())
        .field("theta2", a.theta2.as_str())
        .field("provenance", f.provenance())
        .field("domain", a.domain.to_string())
        .field("grid", a.grid)
        .number("max_residual", max)
        .field(
            "worst_point",
            format!("({}, {})", probe[worst].0, probe[worst].1),
        )
        .number("tolerance", a.tol);
    if max > a.tol {
        rep.pass = false;
        let mut order: Vec<usize> = (0..probe.len()).collect();
        order.sort_by(|&i, &j| residuals[j].total_cmp(&residuals[i]));
        let rows = order
            .into_iter()
            .take(10)
            .map(|i| vec![jnum(probe[i].0), jnum(probe[i].1), jnum(residuals[i])])
            .collect();
        rep.table("worst_points", &["u", "v", "residual"], rows);
    }
    Ok(rep)
}
