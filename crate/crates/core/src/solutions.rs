//! Exact solutions `f(u, v)` of `f_vv = a²(u, v) f_uu`.

use std::fmt;
use std::ops::Add;
use std::sync::Arc;

use crate::calculus::{
    default_step, fd_partial, integrate_linear_second_order, Chebyshev, Partial, Stencil,
};
use crate::domain::Rect;
use crate::error::{Error, Result};
use crate::exprlang::FuncExpr;
use crate::jet::{Jet2, Jet3};
use crate::speedlaw::{SpeedLaw, SpeedVariable, Univariate};

type JetFn = Arc<dyn Fn(f64, f64) -> Result<Jet3> + Send + Sync>;

/// A scalar density `f(u, v)` with exact derivatives up to third order.
#[derive(Clone)]
pub struct Density {
    eval: JetFn,
    provenance: String,
}

impl fmt::Debug for Density {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Density({})", self.provenance)
    }
}

impl Density {
    pub fn new<F>(provenance: impl Into<String>, f: F) -> Self
    where
        F: Fn(f64, f64) -> Result<Jet3> + Send + Sync + 'static,
    {
        Density {
            eval: Arc::new(f),
            provenance: provenance.into(),
        }
    }

    /// Which family and parameters produced this density.
    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn jet3(&self, u: f64, v: f64) -> Result<Jet3> {
        let j = (self.eval)(u, v)?;
        if !j.is_finite() {
            return Err(Error::domain(format!(
                "{} is not finite at ({u}, {v})",
                self.provenance
            )));
        }
        Ok(j)
    }

    pub fn jet(&self, u: f64, v: f64) -> Result<Jet2> {
        Ok(self.jet3(u, v)?.jet2())
    }

    pub fn value(&self, u: f64, v: f64) -> Result<f64> {
        Ok(self.jet3(u, v)?.value())
    }

    /// `(u, v) ↦ f(v, u)`.
    pub fn swapped(&self) -> Density {
        let inner = self.clone();
        Density::new(format!("swap({})", self.provenance), move |u, v| {
            Ok(inner.jet3(v, u)?.transposed())
        })
    }

    pub fn scaled(&self, c: f64) -> Density {
        let inner = self.clone();
        Density::new(format!("{c}*{}", self.provenance), move |u, v| {
            Ok(inner.jet3(u, v)? * c)
        })
    }

    /// A density given as an expression in `u` alone.
    pub fn of_u(e: FuncExpr) -> Density {
        Density::new(format!("u:{e}"), move |u, _| Jet3::var_u(u).apply(&e))
    }

    /// A density given as an expression in `v` alone.
    pub fn of_v(e: FuncExpr) -> Density {
        Density::new(format!("v:{e}"), move |_, v| Jet3::var_v(v).apply(&e))
    }
}

/// Superposition: the sum of two solutions of the same linear equation.
impl Add for Density {
    type Output = Density;

    fn add(self, o: Density) -> Density {
        let provenance = format!("{} + {}", self.provenance, o.provenance);
        Density::new(provenance, move |u, v| Ok(self.jet3(u, v)? + o.jet3(u, v)?))
    }
}

/// `f = √(u(v+v₀)(v+v₁)) (θ₁(η) + θ₂(σ))`.
pub fn family_case1(c0: f64, v0: f64, theta1: FuncExpr, theta2: FuncExpr) -> Result<Density> {
    SpeedLaw::Case1 { c0, v0 }.validated()?;
    let v1 = v0 - c0;
    let tag = format!("case1(c0={c0}, v0={v0}, theta1={theta1}, theta2={theta2})");
    Ok(Density::new(tag, move |u, v| {
        if v + v0 == 0.0 || v + v1 == 0.0 {
            return Err(Error::singular(u, v, "v = -v0 or v = -v1"));
        }
        let (uu, vv) = (Jet3::var_u(u), Jet3::var_v(v));
        let (p0, p1) = (vv + v0, vv + v1);
        let pre = uu * p0 * p1;
        if !(pre.value() > 0.0) {
            return Err(Error::domain(format!(
                "u(v+v0)(v+v1) = {} is not positive at ({u}, {v})",
                pre.value()
            )));
        }
        let eta = uu * p0 / p1;
        let sigma = uu * p1 / p0;
        Ok(pre.sqrt() * (eta.apply(&theta1)? + sigma.apply(&theta2)?))
    }))
}

/// `f = v (θ₁(u + k₀/v) + θ₂(u − k₀/v))`.
pub fn family_case2(k0: f64, theta1: FuncExpr, theta2: FuncExpr) -> Result<Density> {
    SpeedLaw::Case2 { k0 }.validated()?;
    let tag = format!("case2(k0={k0}, theta1={theta1}, theta2={theta2})");
    Ok(Density::new(tag, move |u, v| {
        if v == 0.0 {
            return Err(Error::singular(u, v, "v = 0"));
        }
        let (uu, vv) = (Jet3::var_u(u), Jet3::var_v(v));
        let w = vv.recip() * k0;
        Ok(vv * ((uu + w).apply(&theta1)? + (uu - w).apply(&theta2)?))
    }))
}

/// `f = u (θ₁(v + 1/(k₁²u)) + θ₂(v − 1/(k₁²u)))`.
pub fn family_case3(k1: f64, theta1: FuncExpr, theta2: FuncExpr) -> Result<Density> {
    SpeedLaw::Case3 { k1 }.validated()?;
    let tag = format!("case3(k1={k1}, theta1={theta1}, theta2={theta2})");
    Ok(Density::new(tag, move |u, v| {
        if u == 0.0 {
            return Err(Error::singular(u, v, "u = 0"));
        }
        let (uu, vv) = (Jet3::var_u(u), Jet3::var_v(v));
        let w = uu.recip() / (k1 * k1);
        Ok(uu * ((vv + w).apply(&theta1)? + (vv - w).apply(&theta2)?))
    }))
}

/// `h* = c₁u + c₂v + c₃uv + c₄`, a solution for every wave speed.
pub fn trivial_density(c1: f64, c2: f64, c3: f64, c4: f64) -> Density {
    let tag = format!("trivial(c1={c1}, c2={c2}, c3={c3}, c4={c4})");
    Density::new(tag, move |u, v| {
        let (uu, vv) = (Jet3::var_u(u), Jet3::var_v(v));
        Ok(uu * c1 + vv * c2 + uu * vv * c3 + c4)
    })
}

/// Free data of a separable solution `f = F(u) G(v)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparableData {
    /// Coefficients `(c₁, c₂)` of the closed-form factor: `c₁e^{√μ x} + c₂e^{−√μ x}`
    /// for `μ > 0`, `c₁cos(√−μ x) + c₂sin(√−μ x)` for `μ < 0`.
    pub closed: (f64, f64),
    /// `(x_ref, value, slope)` of the numerically integrated factor.
    pub initial: (f64, f64, f64),
    pub tol: f64,
}

impl SeparableData {
    pub fn new(x_ref: f64, value: f64, slope: f64) -> Self {
        SeparableData {
            closed: (1.0, 0.0),
            initial: (x_ref, value, slope),
            tol: 1e-12,
        }
    }
}

/// `f = F(u) G(v)` for a speed depending on one coordinate only.
///
/// With separation constant `μ`, the factor in the coordinate the speed does
/// not depend on solves `X'' = μX` in closed form. The other factor is
/// integrated numerically: `G'' = μ a²(v) G` when `a = a(v)` and
/// `F'' = μ F / a²(u)` when `a = a(u)`.
pub fn family_separable(law: &SpeedLaw, mu: f64, data: SeparableData) -> Result<Density> {
    if mu == 0.0 || !mu.is_finite() {
        return Err(Error::invalid("separation constant must be non-zero"));
    }
    let (var, a2) = law
        .separable()
        .ok_or_else(|| Error::invalid(format!("{law:?} does not depend on a single coordinate")))?;
    let closed = closed_factor(mu, data.closed);
    let numeric = numeric_factor(a2, mu, var == SpeedVariable::U, data);
    let tag = format!(
        "separable({law:?}, mu={mu}, closed={:?}, initial={:?})",
        data.closed, data.initial
    );
    Ok(match var {
        SpeedVariable::V => Density::new(tag, move |u, v| {
            Ok(Jet3::of_u(closed(u)) * Jet3::of_v(numeric(v)?))
        }),
        SpeedVariable::U => Density::new(tag, move |u, v| {
            Ok(Jet3::of_u(numeric(u)?) * Jet3::of_v(closed(v)))
        }),
    })
}

fn closed_factor(mu: f64, (c1, c2): (f64, f64)) -> impl Fn(f64) -> [f64; 4] + Send + Sync {
    move |x| {
        if mu > 0.0 {
            let k = mu.sqrt();
            let (ep, em) = ((k * x).exp(), (-k * x).exp());
            let even = |n: i32| c1 * ep * k.powi(n) + c2 * em * (-k).powi(n);
            [even(0), even(1), even(2), even(3)]
        } else {
            let k = (-mu).sqrt();
            let (s, c) = (k * x).sin_cos();
            [
                c1 * c + c2 * s,
                k * (-c1 * s + c2 * c),
                -k * k * (c1 * c + c2 * s),
                k.powi(3) * (c1 * s - c2 * c),
            ]
        }
    }
}

fn numeric_factor(
    a2: Univariate,
    mu: f64,
    inverse: bool,
    data: SeparableData,
) -> impl Fn(f64) -> Result<[f64; 4]> + Send + Sync {
    move |x| {
        let w = |t: f64| {
            let a = a2(t)?;
            if inverse {
                if a == 0.0 {
                    return Err(Error::singular(t, f64::NAN, "wave speed vanishes"));
                }
                Ok(mu / a)
            } else {
                Ok(mu * a)
            }
        };
        let (g, dg) = integrate_linear_second_order(w, data.initial, x, data.tol)?;
        let wx = w(x)?;
        let dw = Stencil::central(1, 4)?.apply(w, x, default_step(x))?;
        Ok([g, dg, wx * g, dw * g + wx * dg])
    }
}

/// One factor `F_i` of the recursion tower, with its first three derivatives.
#[derive(Debug, Clone)]
struct TowerFactor {
    value: Chebyshev,
    d1: Chebyshev,
    d2: Chebyshev,
    d3: Chebyshev,
}

impl TowerFactor {
    fn derivs(&self, x: f64) -> [f64; 4] {
        [
            self.value.eval(x),
            self.d1.eval(x),
            self.d2.eval(x),
            self.d3.eval(x),
        ]
    }
}

enum Factor {
    Seed(FuncExpr),
    Tower(TowerFactor),
}

impl Factor {
    fn derivs(&self, x: f64) -> Result<[f64; 4]> {
        match self {
            Factor::Seed(e) => {
                let d = e.eval_jet1(x, 3)?;
                Ok([d[0], d[1], d[2], d[3]])
            }
            Factor::Tower(t) => Ok(t.derivs(x)),
        }
    }

    fn value(&self, x: f64) -> Result<f64> {
        Ok(self.derivs(x)?[0])
    }
}

/// Relative margin by which the tower factors are resolved beyond the
/// rectangle, so stencils and probes touching the edge stay accurate.
const TOWER_MARGIN: f64 = 0.05;
const TOWER_TOL: f64 = 1e-14;

/// The tower `H_n = Σ_{i=0}^{n} F_i(u) G_{n−i}(v)` with
/// `F_i'' = F_{i−1}/α(u)` and `G_i'' = G_{i−1}/β(v)`, so every `H_n` solves
/// `h_vv = (α/β) h_uu`. The seeds must be linear; each `F_i`, `G_i` with
/// `i ≥ 1` vanishes with its slope at the lower corner of `rect`.
///
/// Returns `[H_1, …, H_n]`.
pub fn nutku_tower(
    alpha: &FuncExpr,
    beta: &FuncExpr,
    f0: &FuncExpr,
    g0: &FuncExpr,
    n: usize,
    rect: &Rect,
) -> Result<Vec<Density>> {
    if n == 0 {
        return Err(Error::invalid("tower length must be at least 1"));
    }
    check_linear_seed(f0, rect.u_min, rect.u_max, "F0")?;
    check_linear_seed(g0, rect.v_min, rect.v_max, "G0")?;
    let fs = tower_factors(alpha, f0, n, rect.u_min, rect.u_max)?;
    let gs = tower_factors(beta, g0, n, rect.v_min, rect.v_max)?;
    let fs: Arc<Vec<Factor>> = Arc::new(fs);
    let gs: Arc<Vec<Factor>> = Arc::new(gs);
    Ok((1..=n)
        .map(|k| {
            let (fs, gs) = (fs.clone(), gs.clone());
            let tag =
                format!("nutku(alpha={alpha}, beta={beta}, F0={f0}, G0={g0}, n={k}, rect={rect})");
            Density::new(tag, move |u, v| {
                let mut acc = Jet3::constant(0.0);
                for i in 0..=k {
                    acc = acc + Jet3::of_u(fs[i].derivs(u)?) * Jet3::of_v(gs[k - i].derivs(v)?);
                }
                Ok(acc)
            })
        })
        .collect())
}

fn check_linear_seed(e: &FuncExpr, lo: f64, hi: f64, name: &str) -> Result<()> {
    for k in 0..=8 {
        let x = lo + (hi - lo) * k as f64 / 8.0;
        let d = e.eval_jet1(x, 2)?;
        if d[2].abs() > 1e-12 * (1.0 + d[0].abs() + d[1].abs()) {
            return Err(Error::invalid(format!(
                "seed {name} = {e} must be linear (second derivative {} at {x})",
                d[2]
            )));
        }
    }
    Ok(())
}

fn tower_factors(
    weight: &FuncExpr,
    seed: &FuncExpr,
    n: usize,
    lo: f64,
    hi: f64,
) -> Result<Vec<Factor>> {
    let m = TOWER_MARGIN * (hi - lo);
    let (a, b) = (lo - m, hi + m);
    let mut out = vec![Factor::Seed(seed.clone())];
    for _ in 1..=n {
        let prev = out.last().expect("seed present");
        let rhs = |x: f64| -> Result<f64> {
            let w = weight.eval(x)?;
            if w == 0.0 {
                return Err(Error::domain(format!("weight {weight} vanishes at {x}")));
            }
            Ok(prev.value(x)? / w)
        };
        let d2 = Chebyshev::fit(rhs, a, b, TOWER_TOL)?;
        let d1 = anchored(d2.integral(), lo);
        let value = anchored(d1.integral(), lo);
        let d3 = d2.derivative();
        out.push(Factor::Tower(TowerFactor { value, d1, d2, d3 }));
    }
    Ok(out)
}

/// Shifts an antiderivative so it vanishes at `x0`.
fn anchored(c: Chebyshev, x0: f64) -> Chebyshev {
    let shift = c.eval(x0);
    c.shifted(-shift)
}

/// `|f_vv − a² f_uu| / (1 + |f_uu| + |f_vv|)` at one point.
pub fn wave_residual_at(f: &Density, law: &SpeedLaw, u: f64, v: f64) -> Result<f64> {
    let j = f.jet(u, v)?;
    let a2 = law.eval_speed(u, v)?;
    Ok((j.s - a2 * j.r).abs() / (1.0 + j.r.abs() + j.s.abs()))
}

/// Max-norm wave residual over the probe points.
pub fn wave_residual(f: &Density, law: &SpeedLaw, probe: &[(f64, f64)]) -> Result<f64> {
    probe.iter().try_fold(0.0f64, |m, &(u, v)| {
        Ok(m.max(wave_residual_at(f, law, u, v)?))
    })
}

/// `|h_vv − (α/β) h_uu| / (1 + |h_uu| + |h_vv|)` with both second
/// derivatives taken by fourth-order central differences of the value
/// channel, so it does not trust the jets it checks.
pub fn separability_residual(
    h: &Density,
    alpha: &FuncExpr,
    beta: &FuncExpr,
    probe: &[(f64, f64)],
    step: f64,
) -> Result<f64> {
    let value = |u: f64, v: f64| h.value(u, v);
    probe.iter().try_fold(0.0f64, |m, &(u, v)| {
        let huu = fd_partial(value, (u, v), Partial::UU, step, 4)?;
        let hvv = fd_partial(value, (u, v), Partial::VV, step, 4)?;
        let b = beta.eval(v)?;
        if b == 0.0 {
            return Err(Error::singular(u, v, format!("beta = {beta} vanishes")));
        }
        let ratio = alpha.eval(u)? / b;
        Ok(m.max((hvv - ratio * huu).abs() / (1.0 + huu.abs() + hvv.abs())))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(s: &str) -> FuncExpr {
        FuncExpr::parse(s).unwrap()
    }

    fn square(lo: f64, hi: f64) -> Rect {
        Rect::new(lo, hi, lo, hi).unwrap()
    }

    #[test]
    fn case2_square_matches_expanded_polynomial() {
        let f = family_case2(1.0, e("s^2"), e("0")).unwrap();
        let j = f.jet(2.0, 1.0).unwrap();
        assert_eq!((j.f, j.q, j.p, j.s, j.r), (9.0, 6.0, 3.0, 2.0, 2.0));
    }

    #[test]
    fn case1_constant_theta() {
        let f = family_case1(1.0, 1.0, e("1"), e("0")).unwrap();
        assert!((f.value(1.0, 1.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        let law = SpeedLaw::Case1 { c0: 1.0, v0: 1.0 };
        assert!(wave_residual_at(&f, &law, 1.0, 1.0).unwrap() < 1e-10);
    }

    #[test]
    fn case1_rejects_non_positive_prefactor() {
        let f = family_case1(1.0, 1.0, e("s"), e("s")).unwrap();
        assert!(matches!(f.value(-1.0, 1.0), Err(Error::Domain(_))));
        assert!(matches!(
            f.value(1.0, -1.0),
            Err(Error::SingularPoint { .. })
        ));
        assert!(matches!(
            family_case1(0.0, 1.0, e("s"), e("s")),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn trivial_kernel_members() {
        let f = family_case2(1.0, e("s"), e("s")).unwrap();
        let law = SpeedLaw::Case2 { k0: 1.0 };
        assert_eq!(
            wave_residual(&f, &law, &square(1.0, 2.0).grid(10)).unwrap(),
            0.0
        );
        let g = family_case3(1.0, e("1"), e("1")).unwrap();
        assert_eq!(g.value(1.5, 0.3).unwrap(), 3.0);
        let t = trivial_density(1.0, 2.0, 3.0, 4.0).jet(1.0, 1.0).unwrap();
        assert_eq!(
            t,
            Jet2 {
                f: 10.0,
                p: 5.0,
                q: 4.0,
                s: 0.0,
                r: 0.0,
                w: 3.0
            }
        );
    }

    #[test]
    fn swap_relates_cases_two_and_three() {
        let f2 = family_case2(1.0, e("s^2"), e("0")).unwrap();
        let f3 = family_case3(1.0, e("s^2"), e("0")).unwrap();
        let sw = f2.swapped();
        for (u, v) in square(1.0, 2.0).grid(5) {
            let (a, b) = (f3.jet3(u, v).unwrap(), sw.jet3(u, v).unwrap());
            assert!((a.value() - b.value()).abs() < 1e-12);
            assert!((a.duu() - b.duu()).abs() < 1e-12);
            assert!((a.duvv() - b.duvv()).abs() < 1e-12);
        }
    }

    #[test]
    fn separable_rejects_zero_mu_and_two_variable_speeds() {
        let law = SpeedLaw::OfV(e("1"));
        assert!(matches!(
            family_separable(&law, 0.0, SeparableData::new(0.0, 1.0, 1.0)),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            family_separable(
                &SpeedLaw::Case1 { c0: 1.0, v0: 1.0 },
                1.0,
                SeparableData::new(0.0, 1.0, 1.0)
            ),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn separable_constant_speed_is_exponential() {
        let f = family_separable(
            &SpeedLaw::OfV(e("1")),
            1.0,
            SeparableData::new(0.0, 1.0, 1.0),
        )
        .unwrap();
        for (u, v) in square(-0.5, 0.5).grid(4) {
            let x = (u + v).exp();
            assert!((f.value(u, v).unwrap() - x).abs() < 1e-10 * x);
        }
    }

    #[test]
    fn separable_oscillatory_branch() {
        let law = SpeedLaw::OfV(e("1"));
        let f = family_separable(&law, -4.0, SeparableData::new(0.0, 1.0, 0.0)).unwrap();
        let (u, v) = (0.3f64, 0.7f64);
        let exact = (2.0 * u).cos() * (2.0 * v).cos();
        let j = f.jet(u, v).unwrap();
        assert!((j.f - exact).abs() < 1e-10);
        assert!(wave_residual_at(&f, &law, u, v).unwrap() < 1e-9);
    }

    #[test]
    fn tower_unit_weights() {
        let rect = Rect::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let hs = nutku_tower(&e("1"), &e("1"), &e("1"), &e("1"), 2, &rect).unwrap();
        let (u, v) = (0.6f64, 0.8f64);
        let h2 = u.powi(4) / 24.0 + u * u * v * v / 4.0 + v.powi(4) / 24.0;
        assert!((hs[1].value(u, v).unwrap() - h2).abs() < 1e-13);
        let h1 = u * u / 2.0 + v * v / 2.0;
        assert!((hs[0].value(u, v).unwrap() - h1).abs() < 1e-13);
    }

    #[test]
    fn tower_from_zero_seed_vanishes() {
        let rect = Rect::new(0.0, 1.0, 0.0, 1.0).unwrap();
        let hs = nutku_tower(&e("1"), &e("1"), &e("0"), &e("1"), 1, &rect).unwrap();
        assert_eq!(hs[0].value(0.4, 0.9).unwrap(), 0.0);
    }

    #[test]
    fn tower_rejects_curved_seed() {
        let rect = Rect::new(0.0, 1.0, 0.0, 1.0).unwrap();
        assert!(matches!(
            nutku_tower(&e("1"), &e("1"), &e("s^2"), &e("1"), 1, &rect),
            Err(Error::InvalidParameter(_))
        ));
    }
}
