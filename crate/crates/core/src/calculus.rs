//! Shared numerical kernels: finite-difference stencils, Richardson
//! extrapolation, adaptive ODE integration, quadrature, bracketed root
//! finding and Chebyshev interpolants.

use crate::error::{Error, Result};

/// Central finite-difference stencil on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Stencil {
    /// Formal order of accuracy.
    pub order: usize,
    /// Derivative degree (1 or 2).
    pub degree: usize,
    /// Offsets in units of the step.
    pub offsets: Vec<i32>,
    /// Weights before division by `step^degree`.
    pub coeffs: Vec<f64>,
}

impl Stencil {
    pub fn central(degree: usize, order: usize) -> Result<Self> {
        let (offsets, coeffs) = match (degree, order) {
            (1, 2) => (vec![-1, 1], vec![-0.5, 0.5]),
            (1, 4) => (
                vec![-2, -1, 1, 2],
                vec![1.0 / 12.0, -8.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0],
            ),
            (2, 2) => (vec![-1, 0, 1], vec![1.0, -2.0, 1.0]),
            (2, 4) => (
                vec![-2, -1, 0, 1, 2],
                vec![
                    -1.0 / 12.0,
                    16.0 / 12.0,
                    -30.0 / 12.0,
                    16.0 / 12.0,
                    -1.0 / 12.0,
                ],
            ),
            _ => {
                return Err(Error::invalid(format!(
                    "no central stencil for derivative {degree} of order {order}"
                )))
            }
        };
        Ok(Stencil {
            order,
            degree,
            offsets,
            coeffs,
        })
    }

    /// Highest monomial degree differentiated exactly.
    pub fn exactness_degree(&self) -> usize {
        self.order + self.degree - 1
    }

    pub fn half_width(&self) -> usize {
        self.offsets
            .iter()
            .map(|o| o.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn apply<F>(&self, f: F, x: f64, step: f64) -> Result<f64>
    where
        F: Fn(f64) -> Result<f64>,
    {
        check_step(step)?;
        let terms = self
            .offsets
            .iter()
            .zip(&self.coeffs)
            .map(|(o, c)| Ok(c * f(x + *o as f64 * step)?))
            .collect::<Result<Vec<f64>>>()?;
        Ok(symmetric_sum(&terms) / step.powi(self.degree as i32))
    }

    /// Applies the stencil to samples on a grid at index `i` (no wrapping).
    pub fn apply_samples(&self, samples: &[f64], i: usize, step: f64) -> f64 {
        let terms: Vec<f64> = self
            .offsets
            .iter()
            .zip(&self.coeffs)
            .map(|(o, c)| c * samples[(i as i64 + *o as i64) as usize])
            .collect();
        symmetric_sum(&terms) / step.powi(self.degree as i32)
    }
}

/// Sums mirrored stencil terms pairwise so odd stencils annihilate constants exactly.
fn symmetric_sum(terms: &[f64]) -> f64 {
    let n = terms.len();
    let mut acc = if n % 2 == 1 { terms[n / 2] } else { 0.0 };
    for k in (0..n / 2).rev() {
        acc += terms[k] + terms[n - 1 - k];
    }
    acc
}

fn check_step(step: f64) -> Result<()> {
    if !(step > 0.0) || !step.is_finite() {
        return Err(Error::invalid(format!(
            "finite-difference step must be positive, got {step}"
        )));
    }
    Ok(())
}

/// Which partial derivative of a bivariate field to approximate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Partial {
    U,
    V,
    UU,
    VV,
    UV,
}

/// Default step for fourth-order second derivatives at coordinate `x`.
pub fn default_step(x: f64) -> f64 {
    1e-4 * (1.0 + x.abs())
}

/// Finite-difference partial derivative of `field` at `(u, v)`.
pub fn fd_partial<F>(
    field: F,
    (u, v): (f64, f64),
    which: Partial,
    step: f64,
    order: usize,
) -> Result<f64>
where
    F: Fn(f64, f64) -> Result<f64>,
{
    check_step(step)?;
    match which {
        Partial::U => Stencil::central(1, order)?.apply(|x| field(x, v), u, step),
        Partial::V => Stencil::central(1, order)?.apply(|y| field(u, y), v, step),
        Partial::UU => Stencil::central(2, order)?.apply(|x| field(x, v), u, step),
        Partial::VV => Stencil::central(2, order)?.apply(|y| field(u, y), v, step),
        Partial::UV => {
            let d1 = Stencil::central(1, order)?;
            d1.apply(|x| d1.apply(|y| field(x, y), v, step), u, step)
        }
    }
}

/// Richardson extrapolation of `approx(h)` with error expansion
/// `C h^order + O(h^(order+2))`, halving the step `levels` times.
pub fn richardson<F>(approx: F, step: f64, order: u32, levels: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    check_step(step)?;
    let mut table = Vec::with_capacity(levels + 1);
    let mut h = step;
    for _ in 0..=levels {
        table.push(approx(h)?);
        h /= 2.0;
    }
    let mut p = order;
    for _ in 0..levels {
        let factor = 2f64.powi(p as i32);
        table = table
            .windows(2)
            .map(|w| (factor * w[1] - w[0]) / (factor - 1.0))
            .collect();
        p += 2;
    }
    Ok(table[0])
}

/// Observed convergence order from errors at successive halvings.
pub fn observed_order(coarse: f64, fine: f64, ratio: f64) -> f64 {
    (coarse / fine).ln() / ratio.ln()
}

/// Least-squares slope of `ln(err)` against `ln(1/h)`, i.e. the fitted
/// convergence order over a refinement sequence.
pub fn fitted_order(steps: &[f64], errors: &[f64]) -> f64 {
    let xs: Vec<f64> = steps.iter().map(|h| -h.ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    -sxy / sxx
}

/// Adaptive classical RK4 with step doubling. Each accepted step has an
/// estimated local error at most `tol` (max norm); the returned state is the
/// Richardson-improved fine solution.
pub fn ode_integrate<F>(rhs: F, t0: f64, y0: &[f64], t1: f64, tol: f64) -> Result<Vec<f64>>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
{
    if !(tol > 0.0) {
        return Err(Error::invalid("ODE tolerance must be positive"));
    }
    let mut y = y0.to_vec();
    if t1 == t0 {
        return Ok(y);
    }
    let span = t1 - t0;
    let dir = span.signum();
    let mut t = t0;
    let mut h = span.abs().min(0.1 * (1.0 + t0.abs())) * dir;
    let rk4 = |t: f64, y: &[f64], h: f64| -> Result<Vec<f64>> {
        let k1 = rhs(t, y)?;
        let y2: Vec<f64> = y.iter().zip(&k1).map(|(a, k)| a + 0.5 * h * k).collect();
        let k2 = rhs(t + 0.5 * h, &y2)?;
        let y3: Vec<f64> = y.iter().zip(&k2).map(|(a, k)| a + 0.5 * h * k).collect();
        let k3 = rhs(t + 0.5 * h, &y3)?;
        let y4: Vec<f64> = y.iter().zip(&k3).map(|(a, k)| a + h * k).collect();
        let k4 = rhs(t + h, &y4)?;
        Ok((0..y.len())
            .map(|i| y[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect())
    };
    let mut steps = 0usize;
    while (t1 - t) * dir > 0.0 {
        if (t1 - t).abs() <= 4.0 * f64::EPSILON * (1.0 + t1.abs()) {
            break;
        }
        if (t + h - t1) * dir > 0.0 {
            h = t1 - t;
        }
        if h.abs() < 1e-14 * (1.0 + t.abs()) {
            return Err(Error::IntegrationFailure(format!(
                "step size underflow at t = {t}"
            )));
        }
        steps += 1;
        if steps > 2_000_000 {
            return Err(Error::IntegrationFailure("too many steps".into()));
        }
        let big = rk4(t, &y, h)?;
        let half = rk4(t, &y, 0.5 * h)?;
        let small = rk4(t + 0.5 * h, &half, 0.5 * h)?;
        let err = big
            .iter()
            .zip(&small)
            .map(|(a, b)| (a - b).abs() / 15.0)
            .fold(0.0, f64::max);
        if !err.is_finite() {
            h *= 0.25;
            continue;
        }
        if err <= tol {
            t += h;
            for i in 0..y.len() {
                y[i] = small[i] + (small[i] - big[i]) / 15.0;
            }
        }
        let factor = if err == 0.0 {
            4.0
        } else {
            (0.9 * (tol / err).powf(0.2)).clamp(0.2, 4.0)
        };
        h *= factor;
    }
    Ok(y)
}

/// Integrates `G'' = w(x) G` from `(x0, G(x0), G'(x0))` to `x1`, returning
/// `(G(x1), G'(x1))`.
pub fn integrate_linear_second_order<W>(
    w: W,
    (x0, g0, dg0): (f64, f64, f64),
    x1: f64,
    tol: f64,
) -> Result<(f64, f64)>
where
    W: Fn(f64) -> Result<f64>,
{
    let y = ode_integrate(|x, y| Ok(vec![y[1], w(x)? * y[0]]), x0, &[g0, dg0], x1, tol)?;
    Ok((y[0], y[1]))
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn integrate<F>(f: F, a: f64, b: f64, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    #[allow(clippy::too_many_arguments)]
    fn recurse<F: Fn(f64) -> Result<f64>>(
        f: &F,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: usize,
    ) -> Result<f64> {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm)?, f(rm)?);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 {
            return Err(Error::IntegrationFailure(format!(
                "quadrature recursion limit reached on [{a}, {b}]"
            )));
        }
        if delta.abs() <= 15.0 * tol {
            return Ok(left + right + delta / 15.0);
        }
        Ok(recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)?
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)?)
    }
    if a == b {
        return Ok(0.0);
    }
    let (fa, fb, fm) = (f(a)?, f(b)?, f(0.5 * (a + b))?);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(&f, a, b, fa, fm, fb, whole, tol, 50)
}

/// Safeguarded Newton iteration on a sign-changing bracket `[lo, hi]`.
/// `f` returns the function value and its derivative.
pub fn newton_bisect<F>(f: F, mut lo: f64, mut hi: f64, xtol: f64, max_iter: usize) -> Result<f64>
where
    F: Fn(f64) -> Result<(f64, f64)>,
{
    let (flo, _) = f(lo)?;
    let (fhi, _) = f(hi)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::invalid("bracket does not change sign"));
    }
    let lo_positive = flo > 0.0;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..max_iter {
        let (fx, dfx) = f(x)?;
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx > 0.0) == lo_positive {
            lo = x;
        } else {
            hi = x;
        }
        let newton = x - fx / dfx;
        let next = if dfx != 0.0 && newton.is_finite() && newton > lo.min(hi) && newton < lo.max(hi)
        {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= xtol || (hi - lo).abs() <= xtol {
            return Ok(next);
        }
        x = next;
    }
    Ok(x)
}

/// Chebyshev expansion `Σ c_k T_k(t)` on `[a, b]`, `t = (2x - a - b)/(b - a)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chebyshev {
    a: f64,
    b: f64,
    coeffs: Vec<f64>,
}

impl Chebyshev {
    /// Interpolates `f` at Chebyshev–Lobatto points, doubling the degree
    /// until the trailing coefficients fall below `tol` relative to the
    /// largest one.
    pub fn fit<F>(f: F, a: f64, b: f64, tol: f64) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        if !(b > a) {
            return Err(Error::invalid(format!("empty interval [{a}, {b}]")));
        }
        let mut n = 16;
        loop {
            let cheb = Self::interpolate(&f, a, b, n)?;
            let scale = cheb.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            let tail = cheb.coeffs[n - 2..]
                .iter()
                .fold(0.0f64, |m, c| m.max(c.abs()));
            if tail <= tol * scale.max(1e-300) || scale == 0.0 {
                return Ok(cheb.trimmed(tol * scale));
            }
            if n >= 4096 {
                return Err(Error::IntegrationFailure(format!(
                    "Chebyshev series did not resolve on [{a}, {b}] (tail {tail:e})"
                )));
            }
            n *= 2;
        }
    }

    fn interpolate<F>(f: &F, a: f64, b: f64, n: usize) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let pi = std::f64::consts::PI;
        let values: Vec<f64> = (0..=n)
            .map(|k| {
                let t = (pi * k as f64 / n as f64).cos();
                f(0.5 * (a + b) + 0.5 * (b - a) * t)
            })
            .collect::<Result<_>>()?;
        let mut coeffs = vec![0.0; n + 1];
        for (j, c) in coeffs.iter_mut().enumerate() {
            let mut acc = 0.0;
            for (k, fk) in values.iter().enumerate() {
                let w = if k == 0 || k == n { 0.5 } else { 1.0 };
                acc += w * fk * (pi * (j * k) as f64 / n as f64).cos();
            }
            *c = 2.0 * acc / n as f64;
        }
        coeffs[0] *= 0.5;
        coeffs[n] *= 0.5;
        Ok(Chebyshev { a, b, coeffs })
    }

    fn trimmed(mut self, cutoff: f64) -> Self {
        while self.coeffs.len() > 1 && self.coeffs.last().is_some_and(|c| c.abs() <= cutoff) {
            self.coeffs.pop();
        }
        self
    }

    pub fn zero(a: f64, b: f64) -> Self {
        Chebyshev {
            a,
            b,
            coeffs: vec![0.0],
        }
    }

    /// The series plus a constant.
    pub fn shifted(mut self, c: f64) -> Self {
        self.coeffs[0] += c;
        self
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn eval(&self, x: f64) -> f64 {
        let t = (2.0 * x - self.a - self.b) / (self.b - self.a);
        let (mut b1, mut b2) = (0.0, 0.0);
        for c in self.coeffs.iter().skip(1).rev() {
            let b0 = c + 2.0 * t * b1 - b2;
            b2 = b1;
            b1 = b0;
        }
        self.coeffs[0] + t * b1 - b2
    }

    pub fn derivative(&self) -> Self {
        let n = self.coeffs.len();
        if n == 1 {
            return Chebyshev::zero(self.a, self.b);
        }
        let mut d = vec![0.0; n + 1];
        for k in (1..n).rev() {
            d[k - 1] = d[k + 1] + 2.0 * k as f64 * self.coeffs[k];
        }
        d[0] *= 0.5;
        d.truncate(n - 1);
        let scale = 2.0 / (self.b - self.a);
        Chebyshev {
            a: self.a,
            b: self.b,
            coeffs: d.into_iter().map(|c| c * scale).collect(),
        }
    }

    /// Antiderivative vanishing at the left end of the interval.
    pub fn integral(&self) -> Self {
        let n = self.coeffs.len();
        let c = |k: usize| self.coeffs.get(k).copied().unwrap_or(0.0);
        let mut out = vec![0.0; n + 1];
        for (k, o) in out.iter_mut().enumerate().skip(1) {
            let prev = if k == 1 { 2.0 * c(0) } else { c(k - 1) };
            *o = (prev - c(k + 1)) / (2.0 * k as f64);
        }
        let scale = 0.5 * (self.b - self.a);
        for o in out.iter_mut() {
            *o *= scale;
        }
        // value at t = -1 is Σ b_k (-1)^k
        let at_left: f64 = out
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, b)| if k % 2 == 0 { *b } else { -*b })
            .sum();
        out[0] = -at_left;
        Chebyshev {
            a: self.a,
            b: self.b,
            coeffs: out,
        }
    }
}
