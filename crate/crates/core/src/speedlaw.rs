//! Wave-speed families `a²(u, v)`, their characteristic coordinates and the
//! first-order constraint data `(λ, g)` that reduces the wave equation to a
//! semilinear first-order equation.

use std::fmt;
use std::sync::Arc;

use crate::calculus::{default_step, newton_bisect, Stencil};
use crate::error::{Error, Result};
use crate::exprlang::FuncExpr;

/// A scalar field of `(u, v)`.
pub type Bivariate = Arc<dyn Fn(f64, f64) -> Result<f64> + Send + Sync>;
/// A scalar field of `(u, v, f)`.
pub type Trivariate = Arc<dyn Fn(f64, f64, f64) -> Result<f64> + Send + Sync>;
/// A scalar function of one variable.
pub type Univariate = Arc<dyn Fn(f64) -> Result<f64> + Send + Sync>;

/// Squared wave speed of `f_vv - a²(u, v) f_uu = 0`.
#[derive(Clone)]
pub enum SpeedLaw {
    /// `a² = c₀²u² / ((v+v₀)²(v+v₁)²)` with `v₁ = v₀ - c₀`.
    Case1 { c0: f64, v0: f64 },
    /// `a² = k₀²/v⁴`.
    Case2 { k0: f64 },
    /// `a² = k₁⁴u⁴`.
    Case3 { k1: f64 },
    /// `a² = 1/(A(η)v + B(η))⁴` with `η` defined implicitly by
    /// `η = u - v / (B(η)(A(η)v + B(η)))`. `C` enters only the constraint.
    GeneralAbc {
        a: FuncExpr,
        b: FuncExpr,
        c: FuncExpr,
    },
    /// `a²` given as an expression in `u` alone.
    OfU(FuncExpr),
    /// `a²` given as an expression in `v` alone.
    OfV(FuncExpr),
    /// Arbitrary user evaluator.
    Custom(Bivariate),
}

impl fmt::Debug for SpeedLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SpeedLaw::Case1 { c0, v0 } => write!(f, "Case1 {{ c0: {c0}, v0: {v0} }}"),
            SpeedLaw::Case2 { k0 } => write!(f, "Case2 {{ k0: {k0} }}"),
            SpeedLaw::Case3 { k1 } => write!(f, "Case3 {{ k1: {k1} }}"),
            SpeedLaw::GeneralAbc { a, b, c } => {
                write!(f, "GeneralAbc {{ a: {a}, b: {b}, c: {c} }}")
            }
            SpeedLaw::OfU(e) => write!(f, "OfU({e})"),
            SpeedLaw::OfV(e) => write!(f, "OfV({e})"),
            SpeedLaw::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// Which coordinate a separable speed depends on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpeedVariable {
    U,
    V,
}

/// Scan and iteration limits for [`solve_eta_general`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaSolveOptions {
    /// Bracket search radius is `scan_radius * (1 + |u|)`.
    pub scan_radius: f64,
    pub max_bisections: usize,
}

impl Default for EtaSolveOptions {
    fn default() -> Self {
        EtaSolveOptions {
            scan_radius: 1e3,
            max_bisections: 200,
        }
    }
}

impl SpeedLaw {
    /// Validates parameters; parameters that would make the speed vanish
    /// identically are rejected.
    pub fn validated(self) -> Result<Self> {
        let finite = |xs: &[f64]| xs.iter().all(|x| x.is_finite());
        match &self {
            SpeedLaw::Case1 { c0, v0 } => {
                if !finite(&[*c0, *v0]) || *c0 == 0.0 {
                    return Err(Error::invalid("case 1 needs finite v0 and non-zero c0"));
                }
            }
            SpeedLaw::Case2 { k0 } => {
                if !finite(&[*k0]) || *k0 == 0.0 {
                    return Err(Error::invalid("case 2 needs non-zero k0"));
                }
            }
            SpeedLaw::Case3 { k1 } if (!finite(&[*k1]) || *k1 == 0.0) => {
                return Err(Error::invalid("case 3 needs non-zero k1"));
            }
            _ => {}
        }
        Ok(self)
    }

    /// `v₁ = v₀ - c₀` for case 1.
    pub fn v1(&self) -> Option<f64> {
        match self {
            SpeedLaw::Case1 { c0, v0 } => Some(v0 - c0),
            _ => None,
        }
    }

    /// Squared wave speed `a²(u, v)`.
    pub fn eval_speed(&self, u: f64, v: f64) -> Result<f64> {
        let a2 = match self {
            SpeedLaw::Case1 { c0, v0 } => {
                let v1 = v0 - c0;
                if v + v0 == 0.0 || v + v1 == 0.0 {
                    return Err(Error::singular(u, v, "v = -v0 or v = -v1"));
                }
                let d = (v + v0) * (v + v1);
                c0 * c0 * u * u / (d * d)
            }
            SpeedLaw::Case2 { k0 } => {
                if v == 0.0 {
                    return Err(Error::singular(u, v, "v = 0"));
                }
                k0 * k0 / v.powi(4)
            }
            SpeedLaw::Case3 { k1 } => {
                if u == 0.0 {
                    return Err(Error::singular(u, v, "u = 0"));
                }
                k1.powi(4) * u.powi(4)
            }
            SpeedLaw::GeneralAbc { a, b, .. } => {
                let eta = solve_eta_general(a, b, u, v)?;
                let d = a.eval(eta)? * v + b.eval(eta)?;
                if d == 0.0 {
                    return Err(Error::singular(u, v, "A(η)v + B(η) = 0"));
                }
                d.powi(-4)
            }
            SpeedLaw::OfU(e) => e.eval(u)?,
            SpeedLaw::OfV(e) => e.eval(v)?,
            SpeedLaw::Custom(f) => f(u, v)?,
        };
        if a2 == 0.0 {
            return Err(Error::singular(u, v, "wave speed vanishes"));
        }
        if !(a2 > 0.0) || !a2.is_finite() {
            return Err(Error::domain(format!(
                "a²({u}, {v}) = {a2} is not positive"
            )));
        }
        Ok(a2)
    }

    /// Characteristic coordinates `(η, σ)` of cases 1–3.
    pub fn eval_eta_sigma(&self, u: f64, v: f64) -> Result<(f64, f64)> {
        match self {
            SpeedLaw::Case1 { c0, v0 } => {
                let v1 = v0 - c0;
                if v + v0 == 0.0 || v + v1 == 0.0 {
                    return Err(Error::singular(u, v, "v = -v0 or v = -v1"));
                }
                Ok((u * (v + v0) / (v + v1), u * (v + v1) / (v + v0)))
            }
            SpeedLaw::Case2 { k0 } => {
                if v == 0.0 {
                    return Err(Error::singular(u, v, "v = 0"));
                }
                Ok((u + k0 / v, u - k0 / v))
            }
            SpeedLaw::Case3 { k1 } => {
                if u == 0.0 {
                    return Err(Error::singular(u, v, "u = 0"));
                }
                let w = 1.0 / (k1 * k1 * u);
                Ok((v + w, v - w))
            }
            _ => Err(Error::invalid(
                "closed-form characteristic coordinates exist only for cases 1, 2 and 3",
            )),
        }
    }

    /// For speeds depending on a single coordinate, that coordinate and `a²`
    /// as a function of it.
    pub fn separable(&self) -> Option<(SpeedVariable, Univariate)> {
        match self {
            SpeedLaw::Case2 { k0 } => {
                let k0 = *k0;
                Some((
                    SpeedVariable::V,
                    Arc::new(move |v: f64| Ok(k0 * k0 / v.powi(4))),
                ))
            }
            SpeedLaw::Case3 { k1 } => {
                let k1 = *k1;
                Some((
                    SpeedVariable::U,
                    Arc::new(move |u: f64| Ok(k1.powi(4) * u.powi(4))),
                ))
            }
            SpeedLaw::OfU(e) => {
                let e = e.clone();
                Some((SpeedVariable::U, Arc::new(move |u| e.eval(u))))
            }
            SpeedLaw::OfV(e) => {
                let e = e.clone();
                Some((SpeedVariable::V, Arc::new(move |v| e.eval(v))))
            }
            _ => None,
        }
    }

    /// Characteristic label `η` and its gradient `(η_u, η_v)`; `η` is constant
    /// along `du/dv = λ`.
    fn eta_with_gradient(&self, u: f64, v: f64) -> Result<(f64, f64, f64)> {
        match self {
            SpeedLaw::Case1 { c0, v0 } => {
                let v1 = v0 - c0;
                if v + v0 == 0.0 || v + v1 == 0.0 {
                    return Err(Error::singular(u, v, "v = -v0 or v = -v1"));
                }
                let eta = u * (v + v0) / (v + v1);
                Ok((eta, (v + v0) / (v + v1), u * (v1 - v0) / (v + v1).powi(2)))
            }
            SpeedLaw::Case2 { k0 } => {
                if v == 0.0 {
                    return Err(Error::singular(u, v, "v = 0"));
                }
                Ok((u + k0 / v, 1.0, -k0 / (v * v)))
            }
            SpeedLaw::Case3 { k1 } => {
                if u == 0.0 {
                    return Err(Error::singular(u, v, "u = 0"));
                }
                let k2 = k1 * k1;
                Ok((v + 1.0 / (k2 * u), -1.0 / (k2 * u * u), 1.0))
            }
            SpeedLaw::GeneralAbc { a, b, .. } => {
                let eta = solve_eta_general(a, b, u, v)?;
                let (da, db) = (a.eval_jet1(eta, 1)?, b.eval_jet1(eta, 1)?);
                let d = db[0] * (da[0] * v + db[0]);
                let dd_eta = db[1] * (da[0] * v + db[0]) + db[0] * (da[1] * v + db[1]);
                let f_eta = 1.0 - v * dd_eta / (d * d);
                let f_v = 1.0 / d - v * db[0] * da[0] / (d * d);
                if f_eta == 0.0 {
                    return Err(Error::singular(u, v, "characteristic relation degenerates"));
                }
                Ok((eta, 1.0 / f_eta, -f_v / f_eta))
            }
            _ => Err(Error::invalid("no characteristic label for this speed law")),
        }
    }
}

/// Solves `η = u - v / (B(η)(A(η)v + B(η)))` for `η`.
pub fn solve_eta_general(a: &FuncExpr, b: &FuncExpr, u: f64, v: f64) -> Result<f64> {
    solve_eta_with(a, b, u, v, EtaSolveOptions::default())
}

pub fn solve_eta_with(
    a: &FuncExpr,
    b: &FuncExpr,
    u: f64,
    v: f64,
    opts: EtaSolveOptions,
) -> Result<f64> {
    let tol = 1e-12 * (1.0 + u.abs());
    let denom = |eta: f64| -> Result<(f64, f64)> {
        let (da, db) = (a.eval_jet1(eta, 1)?, b.eval_jet1(eta, 1)?);
        let d = db[0] * (da[0] * v + db[0]);
        let dd = db[1] * (da[0] * v + db[0]) + db[0] * (da[1] * v + db[1]);
        Ok((d, dd))
    };
    let relation = |eta: f64| -> Result<(f64, f64)> {
        let (d, dd) = denom(eta)?;
        if d == 0.0 {
            return Err(Error::singular(u, v, "B(η)(A(η)v + B(η)) = 0"));
        }
        let g = eta - u + v / d;
        let dg = 1.0 - v * dd / (d * d);
        if !g.is_finite() || !dg.is_finite() {
            return Err(Error::domain("characteristic relation not finite"));
        }
        Ok((g, dg))
    };
    let accept = |eta: f64| -> Result<Option<f64>> {
        let (g, _) = relation(eta)?;
        if g.abs() > tol {
            return Ok(None);
        }
        let (d, _) = denom(eta)?;
        if d.abs() < 1e-12 * (1.0 + v.abs()) {
            return Err(Error::singular(
                u,
                v,
                "B(η)(A(η)v + B(η)) vanishes at the root",
            ));
        }
        Ok(Some(eta))
    };

    let value = |eta: f64| relation(eta).ok().map(|(g, _)| g);
    let center = value(u);
    if let Some(g0) = center {
        if g0.abs() <= tol {
            if let Some(r) = accept(u)? {
                return Ok(r);
            }
        }
    }
    let radius = opts.scan_radius * (1.0 + u.abs());
    let mut d = 1e-3 * (1.0 + u.abs());
    let mut last = [center.map(|g| (u, g)), center.map(|g| (u, g))];
    let mut singular = None;
    while d <= radius {
        for (side, sign) in [(0usize, 1.0), (1usize, -1.0)] {
            let eta = u + sign * d;
            let Some(g) = value(eta) else {
                last[side] = None;
                continue;
            };
            if let Some((prev, gp)) = last[side] {
                if gp.signum() != g.signum() {
                    let (lo, hi) = if prev < eta { (prev, eta) } else { (eta, prev) };
                    let root = newton_bisect(
                        relation,
                        lo,
                        hi,
                        1e-16 * (1.0 + u.abs() + lo.abs()),
                        opts.max_bisections,
                    );
                    match root.and_then(&accept) {
                        Ok(Some(r)) => return Ok(r),
                        Ok(None) => {}
                        Err(e @ Error::SingularPoint { .. }) => singular = Some(e),
                        Err(_) => {}
                    }
                }
            }
            last[side] = Some((eta, g));
        }
        d *= 1.5;
    }
    Err(singular.unwrap_or(Error::NoBracket { radius }))
}

/// Data of the first-order constraint `f_v - λ f_u = g(u, v, f)`.
#[derive(Clone)]
pub struct ConstraintData {
    kind: ConstraintKind,
    sign: f64,
}

#[derive(Clone)]
enum ConstraintKind {
    /// `λ = r²`, `r = 1/(A(η)v + B(η))`, `g = r (A(η) f + C(η))`.
    Abc {
        law: SpeedLaw,
        a: FuncExpr,
        b: FuncExpr,
        c: FuncExpr,
    },
    Custom {
        lambda: Trivariate,
        g: Trivariate,
    },
}

/// Max-norm residuals of the three compatibility conditions.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ConstraintResiduals {
    /// `λ_f`
    pub r1: f64,
    /// `λ_v + λ λ_u + 2 λ g_f`
    pub r2: f64,
    /// `g_v + λ g_u + g g_f`
    pub r3: f64,
}

impl ConstraintResiduals {
    pub fn max(&self) -> f64 {
        self.r1.max(self.r2).max(self.r3)
    }
}

impl ConstraintData {
    /// Constraint data of the `λ = +a` branch for cases 1–3 and the general
    /// `A, B, C` family. `c` is the free function `C(η)` of the `g` integral.
    pub fn for_law(law: &SpeedLaw, c: FuncExpr) -> Result<Self> {
        let num = |x: f64| format!("({x:?})");
        let (a, b) =
            match law {
                SpeedLaw::Case1 { c0, v0 } => (
                    FuncExpr::parse(&format!("1/sqrt({}*s)", num(*c0)))?,
                    FuncExpr::parse(&format!("{}/sqrt({}*s)", num(*v0), num(*c0)))?,
                ),
                SpeedLaw::Case2 { k0 } => {
                    if !(*k0 > 0.0) {
                        return Err(Error::invalid("the λ = +a branch of case 2 needs k0 > 0"));
                    }
                    (FuncExpr::constant(1.0 / k0.sqrt()), FuncExpr::constant(0.0))
                }
                SpeedLaw::Case3 { k1 } => {
                    if !(*k1 > 0.0) {
                        return Err(Error::invalid("the λ = +a branch of case 3 needs k1 > 0"));
                    }
                    (
                        FuncExpr::constant(-k1),
                        FuncExpr::parse(&format!("{}*s", num(*k1)))?,
                    )
                }
                SpeedLaw::GeneralAbc { a, b, c } => {
                    return Ok(ConstraintData {
                        kind: ConstraintKind::Abc {
                            law: law.clone(),
                            a: a.clone(),
                            b: b.clone(),
                            c: c.clone(),
                        },
                        sign: 1.0,
                    })
                }
                _ => return Err(Error::invalid(
                    "constraint data are available for cases 1-3 and the general A, B, C family",
                )),
            };
        Ok(ConstraintData {
            kind: ConstraintKind::Abc {
                law: law.clone(),
                a,
                b,
                c,
            },
            sign: 1.0,
        })
    }

    /// Constraint data from arbitrary evaluators of `λ(u, v, f)` and `g(u, v, f)`.
    pub fn custom(lambda: Trivariate, g: Trivariate) -> Self {
        ConstraintData {
            kind: ConstraintKind::Custom { lambda, g },
            sign: 1.0,
        }
    }

    /// Branch of `λ = ±a`; always `+1` for data built by [`ConstraintData::for_law`].
    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn lambda(&self, u: f64, v: f64, f: f64) -> Result<f64> {
        match &self.kind {
            ConstraintKind::Abc { .. } => Ok(self.abc_local(u, v, f)?.lambda),
            ConstraintKind::Custom { lambda, .. } => lambda(u, v, f),
        }
    }

    pub fn g(&self, u: f64, v: f64, f: f64) -> Result<f64> {
        match &self.kind {
            ConstraintKind::Abc { .. } => Ok(self.abc_local(u, v, f)?.g),
            ConstraintKind::Custom { g, .. } => g(u, v, f),
        }
    }

    /// The same data with `λ` shifted by `delta` (a deliberate violation).
    pub fn perturbed(&self, delta: f64) -> Self {
        let base = self.clone();
        let lam = base.clone();
        ConstraintData::custom(
            Arc::new(move |u, v, f| Ok(lam.lambda(u, v, f)? + delta)),
            Arc::new(move |u, v, f| base.g(u, v, f)),
        )
    }

    fn abc_local(&self, u: f64, v: f64, f: f64) -> Result<AbcLocal> {
        let ConstraintKind::Abc { law, a, b, c } = &self.kind else {
            unreachable!("abc_local on custom constraint data")
        };
        let (eta, eta_u, eta_v) = law.eta_with_gradient(u, v)?;
        let (ja, jb, jc) = (
            a.eval_jet1(eta, 1)?,
            b.eval_jet1(eta, 1)?,
            c.eval_jet1(eta, 1)?,
        );
        let den = ja[0] * v + jb[0];
        if den == 0.0 {
            return Err(Error::singular(u, v, "A(η)v + B(η) = 0"));
        }
        let r = 1.0 / den;
        let den_eta = ja[1] * v + jb[1];
        let r_u = -r * r * den_eta * eta_u;
        let r_v = -r * r * (ja[0] + den_eta * eta_v);
        let inner = ja[0] * f + jc[0];
        let inner_eta = ja[1] * f + jc[1];
        Ok(AbcLocal {
            lambda: r * r,
            lambda_u: 2.0 * r * r_u,
            lambda_v: 2.0 * r * r_v,
            g: r * inner,
            g_u: r_u * inner + r * inner_eta * eta_u,
            g_v: r_v * inner + r * inner_eta * eta_v,
            g_f: r * ja[0],
        })
    }

    fn local(&self, u: f64, v: f64, f: f64) -> Result<AbcLocal> {
        match &self.kind {
            ConstraintKind::Abc { .. } => self.abc_local(u, v, f),
            ConstraintKind::Custom { lambda, g } => {
                let d1 = Stencil::central(1, 4)?;
                let (hu, hv, hf) = (default_step(u), default_step(v), default_step(f));
                Ok(AbcLocal {
                    lambda: lambda(u, v, f)?,
                    lambda_u: d1.apply(|x| lambda(x, v, f), u, hu)?,
                    lambda_v: d1.apply(|y| lambda(u, y, f), v, hv)?,
                    g: g(u, v, f)?,
                    g_u: d1.apply(|x| g(x, v, f), u, hu)?,
                    g_v: d1.apply(|y| g(u, y, f), v, hv)?,
                    g_f: d1.apply(|z| g(u, v, z), f, hf)?,
                })
            }
        }
    }

    fn lambda_f(&self, u: f64, v: f64, f: f64) -> Result<f64> {
        match &self.kind {
            ConstraintKind::Abc { .. } => Ok(0.0),
            ConstraintKind::Custom { lambda, .. } => {
                Stencil::central(1, 4)?.apply(|z| lambda(u, v, z), f, default_step(f))
            }
        }
    }
}

struct AbcLocal {
    lambda: f64,
    lambda_u: f64,
    lambda_v: f64,
    g: f64,
    g_u: f64,
    g_v: f64,
    g_f: f64,
}

/// Probe points `(u, v, f)`: the `n × n` grid of `rect` crossed with `fs`.
pub fn probe_points(rect: &crate::domain::Rect, n: usize, fs: &[f64]) -> Vec<(f64, f64, f64)> {
    rect.grid(n)
        .into_iter()
        .flat_map(|(u, v)| fs.iter().map(move |&f| (u, v, f)))
        .collect()
}

/// Max norms of the compatibility residuals over the probe points.
pub fn constraint_residuals(
    cd: &ConstraintData,
    probe: &[(f64, f64, f64)],
) -> Result<ConstraintResiduals> {
    let mut out = ConstraintResiduals::default();
    for &(u, v, f) in probe {
        let l = cd.local(u, v, f)?;
        let r1 = cd.lambda_f(u, v, f)?.abs();
        let r2 = (l.lambda_v + l.lambda * l.lambda_u + 2.0 * l.lambda * l.g_f).abs();
        let r3 = (l.g_v + l.lambda * l.g_u + l.g * l.g_f).abs();
        out.r1 = out.r1.max(r1);
        out.r2 = out.r2.max(r2);
        out.r3 = out.r3.max(r3);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Rect;

    fn e(s: &str) -> FuncExpr {
        FuncExpr::parse(s).unwrap()
    }

    #[test]
    fn case_speeds() {
        assert_eq!(
            SpeedLaw::Case2 { k0: 1.0 }.eval_speed(0.7, 2.0).unwrap(),
            1.0 / 16.0
        );
        assert_eq!(
            SpeedLaw::Case3 { k1: 1.0 }.eval_speed(2.0, 0.0).unwrap(),
            16.0
        );
        assert_eq!(
            SpeedLaw::Case1 { c0: 1.0, v0: 1.0 }
                .eval_speed(1.0, 1.0)
                .unwrap(),
            0.25
        );
    }

    #[test]
    fn singular_manifolds_are_rejected() {
        let c1 = SpeedLaw::Case1 { c0: 1.0, v0: 2.0 };
        assert!(matches!(
            c1.eval_speed(1.0, -2.0),
            Err(Error::SingularPoint { .. })
        ));
        assert!(matches!(
            c1.eval_speed(1.0, -1.0),
            Err(Error::SingularPoint { .. })
        ));
        assert!(matches!(
            SpeedLaw::Case2 { k0: 1.0 }.eval_speed(1.0, 0.0),
            Err(Error::SingularPoint { .. })
        ));
        assert!(matches!(
            SpeedLaw::Case3 { k1: 1.0 }.eval_speed(0.0, 1.0),
            Err(Error::SingularPoint { .. })
        ));
        assert!(matches!(
            SpeedLaw::Case3 { k1: 1.0 }.eval_eta_sigma(0.0, 1.0),
            Err(Error::SingularPoint { .. })
        ));
    }

    #[test]
    fn characteristic_coordinates() {
        assert_eq!(
            SpeedLaw::Case2 { k0: 2.0 }
                .eval_eta_sigma(1.0, 1.0)
                .unwrap(),
            (3.0, -1.0)
        );
        assert_eq!(
            SpeedLaw::Case1 { c0: 1.0, v0: 1.0 }
                .eval_eta_sigma(1.0, 1.0)
                .unwrap(),
            (2.0, 0.5)
        );
        assert_eq!(
            SpeedLaw::Case3 { k1: 1.0 }
                .eval_eta_sigma(1.0, 0.0)
                .unwrap(),
            (1.0, -1.0)
        );
    }

    #[test]
    fn general_eta_closed_forms() {
        assert_eq!(solve_eta_general(&e("1"), &e("1"), 1.0, 0.0).unwrap(), 1.0);
        let eta = solve_eta_general(&e("0"), &e("1"), 2.0, 3.0).unwrap();
        assert!((eta + 1.0).abs() < 1e-12);
    }

    #[test]
    fn general_eta_with_case1_coefficients() {
        // A = B = 1/sqrt(s), u = v = 1: the relation reads η = 1 - η/2.
        let eta = solve_eta_general(&e("1/sqrt(s)"), &e("1/sqrt(s)"), 1.0, 1.0).unwrap();
        assert!((eta - 2.0 / 3.0).abs() < 1e-12);
        let d = (1.0 / eta.sqrt()) * (2.0 / eta.sqrt());
        assert!((eta - 1.0 + 1.0 / d).abs() <= 1e-12 * 2.0);
    }

    #[test]
    fn general_eta_without_root_reports_no_bracket() {
        // η - u + v/1 = 0 always has a root; η·0 + 1 with B = exp(s) large v:
        // g(η) = η - u + v e^{-2η}/(...); use a relation with no root instead.
        let r = solve_eta_with(
            &e("0"),
            &e("1/sqrt(1+s^2)"),
            0.0,
            -1.0,
            EtaSolveOptions {
                scan_radius: 10.0,
                max_bisections: 200,
            },
        );
        // g(η) = η - (1 + η²) < 0 everywhere
        assert!(matches!(r, Err(Error::NoBracket { .. })), "{r:?}");
    }

    #[test]
    fn general_law_speed_is_inverse_fourth_power() {
        let law = SpeedLaw::GeneralAbc {
            a: e("0"),
            b: e("1"),
            c: e("0"),
        };
        assert!((law.eval_speed(2.0, 3.0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn case2_constraint_is_compatible() {
        let law = SpeedLaw::Case2 { k0: 1.0 };
        let cd = ConstraintData::for_law(&law, FuncExpr::constant(0.0)).unwrap();
        let probe = probe_points(
            &Rect::new(1.0, 2.0, 1.0, 2.0).unwrap(),
            20,
            &[-1.0, 0.0, 1.5],
        );
        let r = constraint_residuals(&cd, &probe).unwrap();
        assert!(r.max() <= 1e-8, "{r:?}");
        let bad = constraint_residuals(&cd.perturbed(0.1), &probe).unwrap();
        assert!(bad.r2 > 1e-3, "{bad:?}");
    }

    #[test]
    fn constant_speed_constraint_has_zero_residuals() {
        let cd = ConstraintData::custom(Arc::new(|_, _, _| Ok(1.0)), Arc::new(|_, _, _| Ok(0.0)));
        let probe = probe_points(&Rect::new(-1.0, 1.0, -1.0, 1.0).unwrap(), 5, &[0.0, 2.0]);
        let r = constraint_residuals(&cd, &probe).unwrap();
        assert_eq!(r, ConstraintResiduals::default());
    }

    #[test]
    fn lambda_squares_to_speed() {
        let rect = Rect::new(1.0, 2.0, 1.0, 2.0).unwrap();
        for law in [
            SpeedLaw::Case1 { c0: 1.0, v0: 1.0 },
            SpeedLaw::Case2 { k0: 2.0 },
            SpeedLaw::Case3 { k1: 0.5 },
        ] {
            let cd = ConstraintData::for_law(&law, e("s")).unwrap();
            for (u, v) in rect.grid(7) {
                let lam = cd.lambda(u, v, 0.3).unwrap();
                let a2 = law.eval_speed(u, v).unwrap();
                assert!((lam * lam - a2).abs() <= 1e-13 * a2, "{law:?} at ({u},{v})");
                assert!(lam > 0.0);
            }
        }
    }
}
