use std::f64::consts::PI;
use std::path::Path;

use anyhow::{bail, Context, Result};

use hydrowave::catalog::parse_density_spec;
use hydrowave::evolve::{evolve_to, functional_monitor, Scheme};
use hydrowave::hodograph::PSystem;
use hydrowave::{CellFlag, StateField};

use crate::args::EvolveArgs;
use crate::report::{jnum, num, write_csv, Report};

pub fn run(a: &EvolveArgs) -> Result<Report> {
    let system: PSystem = a
        .pressure
        .parse()
        .with_context(|| format!("parsing --pressure `{}`", a.pressure))?;
    let scheme: Scheme = a.scheme.parse()?;
    let start = initial_field(&a.init)?;
    if !(a.tend >= start.time) {
        bail!("--tend {} precedes the initial time {}", a.tend, start.time);
    }
    let monitors = a
        .monitor
        .iter()
        .map(|s| parse_density_spec(s).with_context(|| format!("parsing --monitor `{s}`")))
        .collect::<Result<Vec<_>>>()?;

    let mut rows = Vec::new();
    let mut last_written = None;
    let mut steps = 0;
    let every = a.every as usize;
    let end = evolve_to(&start, &system, scheme, a.cfl, a.tend, |k, s| {
        steps = k;
        if a.common.out.is_some() && k % every == 0 {
            push_rows(&mut rows, k, s);
            last_written = Some(k);
        }
    })
    .context("evolving")?;
    if let Some(path) = &a.common.out {
        if last_written != Some(steps) {
            push_rows(&mut rows, steps, &end);
        }
        write_csv(path, &["step", "t", "x", "u", "v"], rows)?;
    }

    let mut rep = Report::new("evolve");
    rep.field("pressure", system.to_string())
        .field("scheme", scheme.to_string())
        .number("cfl", a.cfl)
        .field("cells", start.len())
        .number("t_start", start.time)
        .number("t_end", end.time)
        .field("steps", steps);
    let duration = end.time - start.time;
    let mut table = Vec::new();
    let mut pass = true;
    for m in &monitors {
        let before = functional_monitor(&start, &m.density)?;
        let after = functional_monitor(&end, &m.density)?;
        let drift = (after - before).abs();
        let rel = if duration > 0.0 {
            drift / before.abs().max(f64::MIN_POSITIVE) / duration
        } else {
            0.0
        };
        if a.drift_tol.is_some_and(|tol| rel > tol) {
            pass = false;
        }
        table.push(vec![
            m.density.provenance().into(),
            jnum(before),
            jnum(after),
            jnum(drift),
            jnum(rel),
        ]);
    }
    if !table.is_empty() {
        rep.table(
            "monitors",
            &[
                "density",
                "initial",
                "final",
                "drift",
                "relative_drift_rate",
            ],
            table,
        );
    }
    if let Some(tol) = a.drift_tol {
        rep.number("drift_tolerance", tol);
    }
    rep.pass = pass;
    Ok(rep)
}

fn push_rows(rows: &mut Vec<Vec<String>>, k: usize, s: &StateField) {
    for i in 0..s.len() {
        rows.push(vec![
            k.to_string(),
            num(s.time),
            num(s.x(i)),
            num(s.u[i]),
            num(s.v[i]),
        ]);
    }
}

fn initial_field(spec: &str) -> Result<StateField> {
    match spec.strip_prefix("preset:") {
        Some(rest) => preset(rest),
        None => read_field(Path::new(spec)),
    }
}

/// `wavy`: u = u0 + amp cos(2πx/L), v = v0 + amp sin(2πx/L) on n periodic cells.
fn preset(rest: &str) -> Result<StateField> {
    let mut parts = rest.split(',');
    let name = parts.next().unwrap_or("").trim();
    if name != "wavy" {
        bail!("unknown preset `{name}` (known: wavy)");
    }
    let (mut n, mut amp, mut u0, mut v0, mut length) = (200usize, 0.05, 1.0, 1.0, 1.0);
    for part in parts {
        let Some((k, v)) = part.split_once('=') else {
            bail!("expected `key=value` in preset, got `{part}`");
        };
        let v = v.trim();
        match k.trim() {
            "n" => n = v.parse().with_context(|| format!("bad n `{v}`"))?,
            "amp" => amp = v.parse().with_context(|| format!("bad amp `{v}`"))?,
            "u0" => u0 = v.parse().with_context(|| format!("bad u0 `{v}`"))?,
            "v0" => v0 = v.parse().with_context(|| format!("bad v0 `{v}`"))?,
            "length" => length = v.parse().with_context(|| format!("bad length `{v}`"))?,
            other => bail!("unknown preset key `{other}`"),
        }
    }
    if !(length > 0.0) || n == 0 {
        bail!("preset needs n > 0 and length > 0");
    }
    let h = length / n as f64;
    Ok(StateField::sample(0.0, h, n, 0.0, |x| {
        let a = 2.0 * PI * x / length;
        Ok((u0 + amp * a.cos(), v0 + amp * a.sin()))
    })?)
}

/// CSV with columns x,u,v and an optional flag column, on a uniform grid.
fn read_field(path: &Path) -> Result<StateField> {
    let mut r =
        csv::Reader::from_path(path).with_context(|| format!("opening {}", path.display()))?;
    let headers = r.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h.trim() == name);
    let (Some(cx), Some(cu), Some(cv)) = (col("x"), col("u"), col("v")) else {
        bail!("{} needs columns x, u, v", path.display());
    };
    let cf = col("flag");
    let (mut xs, mut us, mut vs, mut flags) = (vec![], vec![], vec![], vec![]);
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let get = |c: usize| -> Result<f64> {
            let s = rec.get(c).unwrap_or("").trim();
            s.parse().with_context(|| {
                format!("{} row {}: `{s}` is not a number", path.display(), line + 2)
            })
        };
        xs.push(get(cx)?);
        us.push(get(cu)?);
        vs.push(get(cv)?);
        flags.push(match cf.and_then(|c| rec.get(c)).map(str::trim) {
            None | Some("ok") => CellFlag::Ok,
            Some("catastrophe") => CellFlag::Catastrophe,
            Some("masked") => CellFlag::Masked,
            Some(other) => bail!(
                "{} row {}: unknown flag `{other}`",
                path.display(),
                line + 2
            ),
        });
    }
    if xs.len() < 2 {
        bail!("{} needs at least two rows", path.display());
    }
    let h = xs[1] - xs[0];
    for w in xs.windows(2) {
        if ((w[1] - w[0]) - h).abs() > 1e-9 * h.abs() {
            bail!("{} is not on a uniform grid", path.display());
        }
    }
    let mut field = StateField::new(xs[0], h, us, vs, 0.0)?;
    field.flags = flags;
    Ok(field)
}
