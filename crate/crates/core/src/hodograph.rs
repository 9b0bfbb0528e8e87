//! The p-system `v_t − u_x = 0`, `u_t + p(v)_x = 0` and its implicit
//! solutions `x = f_v(u, v)`, `t = f_u(u, v)` built from symmetries `f` with
//! `f_vv + p'(v) f_uu = 0`.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rayon::prelude::*;

use crate::calculus::Stencil;
use crate::catalog::key_values;
use crate::domain::{parse_num, Rect};
use crate::error::{Error, Result};
use crate::exprlang::FuncExpr;
use crate::field::{CellFlag, StateField, MIN_CELLS};
use crate::jet::Jet3;
use crate::solutions::{wave_residual, Density};
use crate::speedlaw::SpeedLaw;

/// Pressure law of a p-system.
#[derive(Debug, Clone)]
pub enum Pressure {
    /// `p = k₀²/(3v³) + p₀`, so `−p' = k₀²/v⁴` is the case-2 speed.
    Case2 { k0: f64, p0: f64 },
    /// `p = −k₀²/v + p₀`.
    VonKarman { k0: f64, p0: f64 },
    /// `p` given as an expression in `v`, optionally with `F` such that `F' = p`.
    Expr {
        p: FuncExpr,
        antiderivative: Option<FuncExpr>,
    },
}

/// A p-system with a given pressure law.
#[derive(Debug, Clone)]
pub struct PSystem {
    pressure: Pressure,
}

impl PSystem {
    pub fn new(pressure: Pressure) -> Result<Self> {
        match &pressure {
            Pressure::Case2 { k0, p0 } | Pressure::VonKarman { k0, p0 } => {
                if !(k0.is_finite() && p0.is_finite()) || *k0 == 0.0 {
                    return Err(Error::invalid("pressure needs finite p0 and non-zero k0"));
                }
            }
            Pressure::Expr { .. } => {}
        }
        Ok(PSystem { pressure })
    }

    pub fn case2(k0: f64, p0: f64) -> Result<Self> {
        PSystem::new(Pressure::Case2 { k0, p0 })
    }

    pub fn von_karman(k0: f64, p0: f64) -> Result<Self> {
        PSystem::new(Pressure::VonKarman { k0, p0 })
    }

    pub fn pressure(&self) -> &Pressure {
        &self.pressure
    }

    /// `[p, p']` at `v`.
    pub fn p_and_slope(&self, v: f64) -> Result<(f64, f64)> {
        if v == 0.0 && !matches!(self.pressure, Pressure::Expr { .. }) {
            return Err(Error::singular(f64::NAN, v, "v = 0"));
        }
        Ok(match &self.pressure {
            Pressure::Case2 { k0, p0 } => (k0 * k0 / (3.0 * v.powi(3)) + p0, -k0 * k0 / v.powi(4)),
            Pressure::VonKarman { k0, p0 } => (-k0 * k0 / v + p0, k0 * k0 / (v * v)),
            Pressure::Expr { p, .. } => {
                let d = p.eval_jet1(v, 1)?;
                (d[0], d[1])
            }
        })
    }

    pub fn p(&self, v: f64) -> Result<f64> {
        Ok(self.p_and_slope(v)?.0)
    }

    /// `c² = −p'(v)`; errors with [`Error::HyperbolicityLoss`] unless positive.
    pub fn sound_speed_sq(&self, x: f64, v: f64) -> Result<f64> {
        let (_, dp) = self.p_and_slope(v)?;
        if !(dp < 0.0) {
            return Err(Error::HyperbolicityLoss { x, v, dp });
        }
        Ok(-dp)
    }

    /// The wave speed `a² = −p'(v)` of the symmetry equation.
    pub fn speed_law(&self) -> SpeedLaw {
        match &self.pressure {
            Pressure::Case2 { k0, .. } => SpeedLaw::Case2 { k0: *k0 },
            _ => {
                let me = self.clone();
                SpeedLaw::Custom(Arc::new(move |_, v| me.sound_speed_sq(f64::NAN, v)))
            }
        }
    }

    /// Hamiltonian density `h = u²/2 − F(v)` with `F' = p`.
    pub fn hamiltonian(&self) -> Result<Density> {
        let tag = format!("hamiltonian({self})");
        match self.pressure.clone() {
            Pressure::Case2 { k0, p0 } => Ok(Density::new(tag, move |u, v| {
                let (uu, vv) = (Jet3::var_u(u), Jet3::var_v(v));
                Ok(uu * uu * 0.5 + vv.powi(-2) * (k0 * k0 / 6.0) - vv * p0)
            })),
            Pressure::VonKarman { k0, p0 } => Ok(Density::new(tag, move |u, v| {
                if !(v > 0.0) {
                    return Err(Error::domain("Von Kármán Hamiltonian needs v > 0"));
                }
                let (uu, vv) = (Jet3::var_u(u), Jet3::var_v(v));
                Ok(uu * uu * 0.5 + vv.ln() * (k0 * k0) - vv * p0)
            })),
            Pressure::Expr {
                antiderivative: Some(big_f),
                ..
            } => Ok(Density::new(tag, move |u, v| {
                let (uu, vv) = (Jet3::var_u(u), Jet3::var_v(v));
                Ok(uu * uu * 0.5 - vv.apply(&big_f)?)
            })),
            Pressure::Expr {
                antiderivative: None,
                ..
            } => Err(Error::invalid(
                "the Hamiltonian of an expression pressure needs its antiderivative `F`",
            )),
        }
    }
}

impl fmt::Display for PSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.pressure {
            Pressure::Case2 { k0, p0 } => write!(f, "case2:k0={k0},p0={p0}"),
            Pressure::VonKarman { k0, p0 } => write!(f, "vonkarman:k0={k0},p0={p0}"),
            Pressure::Expr { p, antiderivative } => {
                write!(f, "expr:p={p}")?;
                if let Some(a) = antiderivative {
                    write!(f, ",F={a}")?;
                }
                Ok(())
            }
        }
    }
}

/// Parses `case2:k0=1[,p0=0]`, `vonkarman:k0=1[,p0=0]` or `expr:p=<expr>[,F=<expr>]`.
impl FromStr for PSystem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (kind, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::invalid(format!("pressure spec `{s}` needs a `kind:` prefix")))?;
        let kv = key_values(rest)?;
        match kind.trim() {
            "case2" | "vonkarman" => {
                let (mut k0, mut p0) = (None, 0.0);
                for (k, v) in kv {
                    match k.as_str() {
                        "k0" => k0 = Some(parse_num(&v)?),
                        "p0" => p0 = parse_num(&v)?,
                        _ => return Err(Error::UnknownName(format!("pressure parameter `{k}`"))),
                    }
                }
                let k0 = k0.ok_or_else(|| Error::invalid("pressure needs `k0`"))?;
                if kind.trim() == "case2" {
                    PSystem::case2(k0, p0)
                } else {
                    PSystem::von_karman(k0, p0)
                }
            }
            "expr" => {
                let (mut p, mut big_f) = (None, None);
                for (k, v) in kv {
                    match k.as_str() {
                        "p" => p = Some(FuncExpr::parse(&v)?),
                        "F" => big_f = Some(FuncExpr::parse(&v)?),
                        _ => return Err(Error::UnknownName(format!("pressure parameter `{k}`"))),
                    }
                }
                PSystem::new(Pressure::Expr {
                    p: p.ok_or_else(|| Error::invalid("expression pressure needs `p`"))?,
                    antiderivative: big_f,
                })
            }
            other => Err(Error::UnknownName(format!(
                "pressure kind `{other}` (known: case2, vonkarman, expr)"
            ))),
        }
    }
}

/// The map `(u, v) ↦ (x, t) = (f_v, f_u)` restricted to a rectangle.
#[derive(Debug, Clone)]
pub struct HodographMap {
    pub f: Density,
    pub rect: Rect,
}

/// Image of a point under the hodograph map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForwardImage {
    pub x: f64,
    pub t: f64,
    /// `∂(x, t)/∂(u, v) = [[f_uv, f_vv], [f_uu, f_uv]]`.
    pub jacobian: [[f64; 2]; 2],
}

impl ForwardImage {
    pub fn det(&self) -> f64 {
        let j = &self.jacobian;
        j[0][0] * j[1][1] - j[0][1] * j[1][0]
    }

    /// Magnitude against which `det` is judged singular.
    pub fn det_scale(&self) -> f64 {
        let j = &self.jacobian;
        (j[0][0] * j[1][1]).abs() + (j[0][1] * j[1][0]).abs()
    }
}

/// Newton limits for [`invert_point_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonOptions {
    pub max_iterations: usize,
    pub max_halvings: usize,
    /// Relative step tolerance, scaled by `1 + |u| + |v|`.
    pub step_tol: f64,
    /// Residual tolerance on `(f_v − x, f_u − t)`.
    pub residual_tol: f64,
    /// `|det J| < singular_tol · scale` is a gradient catastrophe.
    pub singular_tol: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            max_iterations: 50,
            max_halvings: 30,
            step_tol: 1e-12,
            residual_tol: 1e-10,
            singular_tol: 1e-12,
        }
    }
}

impl HodographMap {
    pub fn new(f: Density, rect: Rect) -> Self {
        HodographMap { f, rect }
    }

    /// Max wave residual of `f` against `a² = −p'(v)` on an `n × n` grid.
    pub fn symmetry_residual(&self, system: &PSystem, n: usize) -> Result<f64> {
        wave_residual(&self.f, &system.speed_law(), &self.rect.grid(n))
    }
}

pub fn forward_map(m: &HodographMap, u: f64, v: f64) -> Result<ForwardImage> {
    if !m.rect.contains(u, v) {
        return Err(Error::domain(format!("({u}, {v}) lies outside {}", m.rect)));
    }
    let j = m.f.jet(u, v)?;
    Ok(ForwardImage {
        x: j.p,
        t: j.q,
        jacobian: [[j.w, j.s], [j.r, j.w]],
    })
}

pub fn invert_point(m: &HodographMap, x: f64, t: f64, guess: (f64, f64)) -> Result<(f64, f64)> {
    invert_point_with(m, x, t, guess, NewtonOptions::default())
}

/// Solves `(f_v(u, v), f_u(u, v)) = (x, t)` by damped Newton iteration from
/// `guess`. When that stalls, the target is approached from the image of
/// `guess` along a straight segment cut into 4, then 16, then 64 pieces,
/// each piece solved from the previous solution.
pub fn invert_point_with(
    m: &HodographMap,
    x: f64,
    t: f64,
    guess: (f64, f64),
    opts: NewtonOptions,
) -> Result<(f64, f64)> {
    let err = match newton(m, x, t, guess, opts) {
        Err(e @ Error::NoConvergence { .. }) => e,
        other => return other,
    };
    let start = forward_map(m, guess.0, guess.1)?;
    'pieces: for pieces in [4usize, 16, 64] {
        let mut cur = guess;
        for k in 1..=pieces {
            let s = k as f64 / pieces as f64;
            let (xk, tk) = (start.x + s * (x - start.x), start.t + s * (t - start.t));
            match newton(m, xk, tk, cur, opts) {
                Ok(p) => cur = p,
                Err(_) => continue 'pieces,
            }
        }
        return Ok(cur);
    }
    Err(err)
}

fn newton(
    m: &HodographMap,
    x: f64,
    t: f64,
    guess: (f64, f64),
    opts: NewtonOptions,
) -> Result<(f64, f64)> {
    let (mut u, mut v) = guess;
    let res_tol = opts.residual_tol * (1.0 + x.abs() + t.abs());
    let residual = |img: &ForwardImage| (img.x - x).abs().max((img.t - t).abs());
    let mut img = forward_map(m, u, v)?;
    let mut rnorm = residual(&img);
    for _ in 0..opts.max_iterations {
        let det = img.det();
        if det.abs() < opts.singular_tol * img.det_scale() || det == 0.0 {
            return Err(Error::SingularJacobian { u, v, det });
        }
        let j = &img.jacobian;
        let (rx, rt) = (img.x - x, img.t - t);
        let du = (j[1][1] * rx - j[0][1] * rt) / det;
        let dv = (-j[1][0] * rx + j[0][0] * rt) / det;
        let step_tol = opts.step_tol * (1.0 + u.abs() + v.abs());
        if du.abs().max(dv.abs()) <= step_tol && rnorm <= res_tol {
            let (nu, nv) = (u - du, v - dv);
            return Ok(if m.rect.contains(nu, nv) {
                (nu, nv)
            } else {
                (u, v)
            });
        }
        let mut lambda = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let (nu, nv) = (u - lambda * du, v - lambda * dv);
            if m.rect.contains(nu, nv) {
                if let Ok(next) = forward_map(m, nu, nv) {
                    let nr = residual(&next);
                    if nr < rnorm || (nr <= res_tol && lambda == 1.0) {
                        accepted = Some((nu, nv, next, nr));
                        break;
                    }
                }
            }
            lambda *= 0.5;
        }
        match accepted {
            Some((nu, nv, next, nr)) => {
                u = nu;
                v = nv;
                img = next;
                rnorm = nr;
            }
            // No decrease is possible at rounding level.
            None if rnorm <= res_tol => return Ok((u, v)),
            None => {
                return Err(Error::NoConvergence {
                    iterations: opts.max_iterations,
                    residual: rnorm,
                })
            }
        }
    }
    if rnorm <= res_tol {
        return Ok((u, v));
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
        residual: rnorm,
    })
}

/// Grid point of a 32×32 scan of the rectangle whose image is nearest to
/// `(x, t)`; ties go to the smallest `u`, then the smallest `v`.
pub fn seed_scan(m: &HodographMap, x: f64, t: f64) -> Result<(f64, f64)> {
    Ok(seed_candidates(m, x, t, 1)?[0])
}

/// The `k` scan points whose images are nearest to `(x, t)`, nearest first.
pub fn seed_candidates(m: &HodographMap, x: f64, t: f64, k: usize) -> Result<Vec<(f64, f64)>> {
    let mut scored: Vec<((f64, f64), f64)> = m
        .rect
        .grid(32)
        .into_iter()
        .filter_map(|(u, v)| {
            let img = forward_map(m, u, v).ok()?;
            let d = (img.x - x).hypot(img.t - t);
            d.is_finite().then_some(((u, v), d))
        })
        .collect();
    if scored.is_empty() {
        return Err(Error::domain(format!(
            "the hodograph map is undefined on all of {}",
            m.rect
        )));
    }
    // Stable sort keeps grid order (u first, then v) among ties.
    scored.sort_by(|a, b| a.1.total_cmp(&b.1));
    Ok(scored.into_iter().take(k.max(1)).map(|(p, _)| p).collect())
}

/// Inverts `(x, t)` from the nearest scan seeds in turn, up to `tries` of them.
pub fn invert_from_scan(m: &HodographMap, x: f64, t: f64, tries: usize) -> Result<(f64, f64)> {
    let mut last = None;
    for seed in seed_candidates(m, x, t, tries)? {
        match invert_point(m, x, t, seed) {
            Ok(p) => return Ok(p),
            Err(e) => last = Some(e),
        }
    }
    Err(last.expect("at least one candidate"))
}

/// Uniform spatial grid `x_i = x0 + i h`, `i < n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1 {
    pub x0: f64,
    pub h: f64,
    pub n: usize,
}

impl Grid1 {
    /// `n` points spanning `[a, b]`.
    pub fn span(a: f64, b: f64, n: usize) -> Result<Self> {
        if n == 0 || !(a.is_finite() && b.is_finite()) || (n > 1 && !(b > a)) {
            return Err(Error::invalid(format!("bad grid {a}:{b}:{n}")));
        }
        let h = if n > 1 { (b - a) / (n - 1) as f64 } else { 1.0 };
        Ok(Grid1 { x0: a, h, n })
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }
}

/// Inverts the hodograph map along `grid` at time `t`, marching from `seed`
/// with the previous solved cell as the next guess. Cells where the map is
/// singular, where Newton fails, or where `det J` changes sign relative to the
/// previous solved cell are flagged as catastrophes and left as NaN.
pub fn solve_field(m: &HodographMap, grid: Grid1, t: f64, seed: (f64, f64)) -> Result<StateField> {
    let mut u = vec![f64::NAN; grid.n];
    let mut v = vec![f64::NAN; grid.n];
    let mut flags = vec![CellFlag::Ok; grid.n];
    let mut guess = seed;
    let mut last_sign = None;
    for i in 0..grid.n {
        match invert_point(m, grid.x(i), t, guess) {
            Ok((ui, vi)) => {
                let sign = forward_map(m, ui, vi)?.det().signum();
                if last_sign.is_some_and(|s| s != sign) {
                    flags[i] = CellFlag::Catastrophe;
                    continue;
                }
                (u[i], v[i]) = (ui, vi);
                guess = (ui, vi);
                last_sign = Some(sign);
            }
            Err(Error::SingularJacobian { .. } | Error::NoConvergence { .. }) => {
                flags[i] = CellFlag::Catastrophe;
            }
            Err(e) => return Err(e),
        }
    }
    let mut field = StateField::new(grid.x0, grid.h, u, v, t)?;
    field.flags = flags;
    Ok(field)
}

/// Solves fields at several times in parallel, each sweep seeded from `seed`.
pub fn solve_fields(
    m: &HodographMap,
    grid: Grid1,
    times: &[f64],
    seed: (f64, f64),
) -> Result<Vec<StateField>> {
    times
        .par_iter()
        .map(|&t| solve_field(m, grid, t, seed))
        .collect()
}

/// Max norms of `v_t − u_x` and `u_t + p(v)_x` over the interior, from three
/// time slices `t − δ, t, t + δ` on the same grid. Time derivatives are
/// central differences, space derivatives fourth-order central differences;
/// cells within two cells of a flagged one are skipped.
pub fn psystem_residual(
    before: &StateField,
    now: &StateField,
    after: &StateField,
    system: &PSystem,
) -> Result<(f64, f64)> {
    let n = now.len();
    if n < MIN_CELLS {
        return Err(Error::GridTooSmall {
            needed: MIN_CELLS,
            got: n,
        });
    }
    if before.len() != n
        || after.len() != n
        || before.x0 != now.x0
        || after.x0 != now.x0
        || before.h != now.h
        || after.h != now.h
    {
        return Err(Error::invalid("time slices must share one spatial grid"));
    }
    let two_dt = after.time - before.time;
    if !(two_dt > 0.0) {
        return Err(Error::invalid("time slices must be ordered in time"));
    }
    let d1 = Stencil::central(1, 4)?;
    let pv: Vec<f64> = now
        .v
        .iter()
        .map(|&v| {
            if v.is_nan() {
                Ok(f64::NAN)
            } else {
                system.p(v)
            }
        })
        .collect::<Result<_>>()?;
    let (mut r1, mut r2) = (0.0f64, 0.0f64);
    let mut used = 0;
    for i in 2..n - 2 {
        if !(now.clean_around(i, 2) && before.clean_around(i, 0) && after.clean_around(i, 0)) {
            continue;
        }
        let v_t = (after.v[i] - before.v[i]) / two_dt;
        let u_t = (after.u[i] - before.u[i]) / two_dt;
        let u_x = d1.apply_samples(&now.u, i, now.h);
        let p_x = d1.apply_samples(&pv, i, now.h);
        r1 = r1.max((v_t - u_x).abs());
        r2 = r2.max((u_t + p_x).abs());
        used += 1;
    }
    if used == 0 {
        return Err(Error::MaskedCells {
            count: now.flagged(),
        });
    }
    Ok((r1, r2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solutions::{family_case2, trivial_density};

    fn e(s: &str) -> FuncExpr {
        FuncExpr::parse(s).unwrap()
    }

    /// `f = u²v + 2u + 1/v`.
    fn square_map() -> HodographMap {
        let f = family_case2(1.0, e("s^2"), e("0")).unwrap();
        HodographMap::new(f, Rect::new(0.5, 3.0, 0.5, 3.0).unwrap())
    }

    #[test]
    fn forward_examples() {
        let m = square_map();
        let img = forward_map(&m, 2.0, 1.0).unwrap();
        assert_eq!((img.x, img.t, img.det()), (3.0, 6.0, 12.0));
        assert_eq!(forward_map(&m, 1.0, 1.0).unwrap().det(), 0.0);
        let id = HodographMap::new(
            trivial_density(0.0, 0.0, 1.0, 0.0),
            Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap(),
        );
        let img = forward_map(&id, 0.3, -0.2).unwrap();
        assert_eq!((img.x, img.t), (0.3, -0.2));
        assert_eq!(img.jacobian, [[1.0, 0.0], [0.0, 1.0]]);
        assert_eq!(invert_point(&id, 0.0, 0.0, (0.5, 0.5)).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn inverts_known_point() {
        let m = square_map();
        let (u, v) = invert_point(&m, 3.0, 6.0, (1.5, 1.2)).unwrap();
        assert!((u - 2.0).abs() < 1e-10 && (v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn critical_point_is_singular() {
        let m = square_map();
        assert!(matches!(
            invert_point(&m, 0.0, 4.0, (1.0, 1.0)),
            Err(Error::SingularJacobian { .. })
        ));
    }

    #[test]
    fn single_point_sweep_and_seed_scan() {
        let m = square_map();
        let f = solve_field(&m, Grid1::span(3.0, 3.0, 1).unwrap(), 6.0, (1.5, 1.2)).unwrap();
        assert!((f.u[0] - 2.0).abs() < 1e-10 && (f.v[0] - 1.0).abs() < 1e-10);
        let (u, v) = seed_scan(&m, 3.0, 6.0).unwrap();
        assert!((u - 2.0).abs() < 0.2 && (v - 1.0).abs() < 0.2);
    }

    #[test]
    fn pressure_specs() {
        let p: PSystem = "case2:k0=1".parse().unwrap();
        assert_eq!(p.p_and_slope(1.0).unwrap(), (1.0 / 3.0, -1.0));
        let vk: PSystem = "vonkarman:k0=2,p0=1".parse().unwrap();
        assert_eq!(vk.p(2.0).unwrap(), -1.0);
        assert!(matches!(
            vk.sound_speed_sq(0.0, 2.0),
            Err(Error::HyperbolicityLoss { .. })
        ));
        let ex: PSystem = "expr:p=1/(3*s^3),F=-1/(6*s^2)".parse().unwrap();
        assert!((ex.sound_speed_sq(0.0, 1.0).unwrap() - 1.0).abs() < 1e-15);
        assert!("foo:k0=1".parse::<PSystem>().is_err());
        assert!("case2:q=1".parse::<PSystem>().is_err());
    }

    #[test]
    fn case2_hamiltonian_generates_the_p_system() {
        let p = PSystem::case2(1.0, 0.5).unwrap();
        let h = p.hamiltonian().unwrap();
        let j = h.jet(0.7, 1.3).unwrap();
        let (_, dp) = p.p_and_slope(1.3).unwrap();
        assert!((j.r - 1.0).abs() < 1e-15);
        assert!((j.s + dp).abs() < 1e-14);
        assert_eq!(j.w, 0.0);
    }
}
