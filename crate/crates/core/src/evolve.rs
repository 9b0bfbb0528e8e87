//! Conservative finite-difference evolution of the p-system on a periodic
//! grid, in the form `w_t + F(w)_x = 0` with `w = (v, u)`, `F = (−u, p(v))`.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::field::{CellFlag, StateField, MIN_CELLS};
use crate::hodograph::PSystem;
use crate::solutions::Density;

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    LaxFriedrichs,
    /// Richtmyer two-step Lax–Wendroff.
    LaxWendroff,
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::LaxFriedrichs => "lxf",
            Scheme::LaxWendroff => "lw",
        })
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lxf" | "lax-friedrichs" => Ok(Scheme::LaxFriedrichs),
            "lw" | "lax-wendroff" => Ok(Scheme::LaxWendroff),
            other => Err(Error::UnknownName(format!(
                "scheme `{other}` (known: lxf, lw)"
            ))),
        }
    }
}

fn check_field(s: &StateField) -> Result<()> {
    if s.len() < MIN_CELLS {
        return Err(Error::GridTooSmall {
            needed: MIN_CELLS,
            got: s.len(),
        });
    }
    let count = s.flagged();
    if count > 0 {
        return Err(Error::MaskedCells { count });
    }
    Ok(())
}

fn check_cfl(cfl: f64) -> Result<()> {
    if !(cfl > 0.0 && cfl <= 1.0) {
        return Err(Error::invalid(format!(
            "CFL number must lie in (0, 1], got {cfl}"
        )));
    }
    Ok(())
}

/// Largest characteristic speed `max √(−p'(v))`; fails on loss of hyperbolicity.
pub fn max_speed(s: &StateField, system: &PSystem) -> Result<f64> {
    (0..s.len())
        .into_par_iter()
        .map(|i| Ok(system.sound_speed_sq(s.x(i), s.v[i])?.sqrt()))
        .try_reduce(|| 0.0, |a, b| Ok(a.max(b)))
}

/// Stable time step `cfl · h / max c`.
pub fn stable_dt(s: &StateField, system: &PSystem, cfl: f64) -> Result<f64> {
    check_cfl(cfl)?;
    let c = max_speed(s, system)?;
    let dt = cfl * s.h / c;
    if !(dt > f64::EPSILON * (1.0 + s.time.abs())) || !dt.is_finite() {
        return Err(Error::CflUnderflow { dt });
    }
    Ok(dt)
}

pub fn step_lax_friedrichs(s: &StateField, system: &PSystem, cfl: f64) -> Result<StateField> {
    check_field(s)?;
    let dt = stable_dt(s, system, cfl)?;
    step_with_dt(s, system, Scheme::LaxFriedrichs, dt)
}

pub fn step_lax_wendroff(s: &StateField, system: &PSystem, cfl: f64) -> Result<StateField> {
    check_field(s)?;
    let dt = stable_dt(s, system, cfl)?;
    step_with_dt(s, system, Scheme::LaxWendroff, dt)
}

/// One step of `scheme` with a prescribed `dt` (not checked against the CFL limit).
pub fn step_with_dt(
    s: &StateField,
    system: &PSystem,
    scheme: Scheme,
    dt: f64,
) -> Result<StateField> {
    check_field(s)?;
    let n = s.len();
    let r = dt / s.h;
    let left = |i: usize| (i + n - 1) % n;
    let right = |i: usize| (i + 1) % n;
    let p: Vec<f64> =
        s.v.par_iter()
            .map(|&v| system.p(v))
            .collect::<Result<_>>()?;
    let (v, u): (Vec<f64>, Vec<f64>) = match scheme {
        Scheme::LaxFriedrichs => (0..n)
            .into_par_iter()
            .map(|i| {
                let (a, b) = (left(i), right(i));
                let v = 0.5 * (s.v[b] + s.v[a]) + 0.5 * r * (s.u[b] - s.u[a]);
                let u = 0.5 * (s.u[b] + s.u[a]) - 0.5 * r * (p[b] - p[a]);
                (v, u)
            })
            .unzip(),
        Scheme::LaxWendroff => {
            // Half-step states at i + 1/2.
            let half: Vec<(f64, f64)> = (0..n)
                .into_par_iter()
                .map(|i| {
                    let b = right(i);
                    let v = 0.5 * (s.v[i] + s.v[b]) + 0.5 * r * (s.u[b] - s.u[i]);
                    let u = 0.5 * (s.u[i] + s.u[b]) - 0.5 * r * (p[b] - p[i]);
                    (v, u)
                })
                .collect();
            let ph: Vec<f64> = half
                .par_iter()
                .map(|&(v, _)| system.p(v))
                .collect::<Result<_>>()?;
            (0..n)
                .into_par_iter()
                .map(|i| {
                    let a = left(i);
                    let v = s.v[i] + r * (half[i].1 - half[a].1);
                    let u = s.u[i] - r * (ph[i] - ph[a]);
                    (v, u)
                })
                .unzip()
        }
    };
    let mut out = StateField::new(s.x0, s.h, u, v, s.time + dt)?;
    out.flags = vec![CellFlag::Ok; n];
    Ok(out)
}

/// Evolves to `t_end`, shortening the last step to land on it exactly.
/// `observe` sees every state including the initial and final ones.
pub fn evolve_to<F>(
    s: &StateField,
    system: &PSystem,
    scheme: Scheme,
    cfl: f64,
    t_end: f64,
    mut observe: F,
) -> Result<StateField>
where
    F: FnMut(usize, &StateField),
{
    if !(t_end >= s.time) {
        return Err(Error::invalid(format!(
            "end time {t_end} precedes start time {}",
            s.time
        )));
    }
    check_field(s)?;
    let mut cur = s.clone();
    let mut k = 0;
    observe(k, &cur);
    while cur.time < t_end {
        let dt = stable_dt(&cur, system, cfl)?.min(t_end - cur.time);
        let mut next = step_with_dt(&cur, system, scheme, dt)?;
        if t_end - next.time <= 4.0 * f64::EPSILON * t_end.abs().max(1.0) {
            next.time = t_end;
        }
        cur = next;
        k += 1;
        observe(k, &cur);
    }
    Ok(cur)
}

/// `h Σ d(u_i, v_i)`, the trapezoid rule on a periodic grid.
pub fn functional_monitor(s: &StateField, d: &Density) -> Result<f64> {
    let count = s.flagged();
    if count > 0 {
        return Err(Error::MaskedCells { count });
    }
    let values: Vec<f64> = (0..s.len())
        .into_par_iter()
        .map(|i| d.value(s.u[i], s.v[i]))
        .collect::<Result<_>>()?;
    Ok(s.h * values.iter().sum::<f64>())
}

/// `h Σ |a_i − b_i|` over cells `lo..hi`.
pub fn l1_distance(a: &[f64], b: &[f64], h: f64, lo: usize, hi: usize) -> f64 {
    h * a[lo..hi]
        .iter()
        .zip(&b[lo..hi])
        .map(|(x, y)| (x - y).abs())
        .sum::<f64>()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solutions::trivial_density;

    fn sine_field(n: usize) -> StateField {
        let h = 1.0 / n as f64;
        StateField::sample(0.0, h, n, 0.0, |x| {
            Ok((0.0, 1.0 + 0.05 * (2.0 * std::f64::consts::PI * x).sin()))
        })
        .unwrap()
    }

    #[test]
    fn constant_state_is_preserved() {
        let p = PSystem::case2(1.0, 0.0).unwrap();
        let s = StateField::new(0.0, 0.1, vec![0.3; 8], vec![1.2; 8], 0.0).unwrap();
        for scheme in [Scheme::LaxFriedrichs, Scheme::LaxWendroff] {
            let next = step_with_dt(&s, &p, scheme, 0.01).unwrap();
            assert_eq!(next.u, s.u);
            assert_eq!(next.v, s.v);
        }
        let lxf = step_lax_friedrichs(&s, &p, 0.5).unwrap();
        assert!(lxf.time > 0.0);
    }

    #[test]
    fn totals_are_conserved() {
        let p = PSystem::case2(1.0, 0.0).unwrap();
        let s = sine_field(64);
        let total = |f: &StateField| (f.u.iter().sum::<f64>(), f.v.iter().sum::<f64>());
        let (u0, v0) = total(&s);
        for scheme in [Scheme::LaxFriedrichs, Scheme::LaxWendroff] {
            let end = evolve_to(&s, &p, scheme, 0.5, 0.3, |_, _| {}).unwrap();
            let (u1, v1) = total(&end);
            assert!((u1 - u0).abs() < 1e-12 && (v1 - v0).abs() < 1e-12);
            assert_eq!(end.time, 0.3);
        }
    }

    #[test]
    fn hyperbolicity_and_cfl_checks() {
        let vk = PSystem::von_karman(1.0, 0.0).unwrap();
        let s = sine_field(16);
        assert!(matches!(
            step_lax_friedrichs(&s, &vk, 0.5),
            Err(Error::HyperbolicityLoss { .. })
        ));
        let p = PSystem::case2(1.0, 0.0).unwrap();
        assert!(matches!(
            step_lax_wendroff(&s, &p, 1.5),
            Err(Error::InvalidParameter(_))
        ));
        let stiff = PSystem::case2(1e300, 0.0).unwrap();
        assert!(matches!(
            stable_dt(&s, &stiff, 0.5),
            Err(Error::CflUnderflow { .. })
        ));
    }

    #[test]
    fn monitor_requires_clean_fields() {
        let mut s = sine_field(16);
        let d = trivial_density(0.0, 1.0, 0.0, 0.0);
        assert!((functional_monitor(&s, &d).unwrap() - 1.0).abs() < 1e-14);
        s.flags[3] = CellFlag::Catastrophe;
        assert!(matches!(
            functional_monitor(&s, &d),
            Err(Error::MaskedCells { count: 1 })
        ));
        let p = PSystem::case2(1.0, 0.0).unwrap();
        assert!(matches!(
            step_lax_friedrichs(&s, &p, 0.5),
            Err(Error::MaskedCells { .. })
        ));
    }
}
