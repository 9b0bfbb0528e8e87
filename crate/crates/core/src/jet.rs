//! Bivariate jets: values together with partial derivatives in `(u, v)`.

use std::ops::{Add, Div, Mul, Neg, Sub};

use crate::error::Result;
use crate::exprlang::FuncExpr;

/// Value and partial derivatives up to second order of a scalar function of
/// `(u, v)`.
///
/// The channel names follow the classical compatibility notation:
/// `p = f_v`, `q = f_u`, `s = f_vv`, `r = f_uu`, `w = f_uv`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Jet2 {
    pub f: f64,
    pub p: f64,
    pub q: f64,
    pub s: f64,
    pub r: f64,
    pub w: f64,
}

impl Jet2 {
    pub fn is_finite(&self) -> bool {
        [self.f, self.p, self.q, self.s, self.r, self.w]
            .iter()
            .all(|x| x.is_finite())
    }
}

/// Order of the truncated Taylor arithmetic carried by [`Jet3`].
const ORDER: usize = 3;

/// Truncated bivariate Taylor polynomial of total degree 3.
///
/// `t[i][j]` holds `∂ᵘⁱ∂ᵛʲ f / (i! j!)`; entries with `i + j > 3` are zero.
/// Arithmetic propagates exact partial derivatives through every operation,
/// so densities built from jets get exact Hessians and third derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet3 {
    t: [[f64; ORDER + 1]; ORDER + 1],
}

impl Jet3 {
    pub fn constant(c: f64) -> Self {
        let mut t = [[0.0; ORDER + 1]; ORDER + 1];
        t[0][0] = c;
        Jet3 { t }
    }

    /// The coordinate `u` seeded at `u0`.
    pub fn var_u(u0: f64) -> Self {
        let mut j = Jet3::constant(u0);
        j.t[1][0] = 1.0;
        j
    }

    /// The coordinate `v` seeded at `v0`.
    pub fn var_v(v0: f64) -> Self {
        let mut j = Jet3::constant(v0);
        j.t[0][1] = 1.0;
        j
    }

    /// Builds a jet from explicit partial derivatives
    /// `[f, f_u, f_v, f_uu, f_uv, f_vv, f_uuu, f_uuv, f_uvv, f_vvv]`.
    pub fn from_partials(d: [f64; 10]) -> Self {
        let mut t = [[0.0; ORDER + 1]; ORDER + 1];
        t[0][0] = d[0];
        t[1][0] = d[1];
        t[0][1] = d[2];
        t[2][0] = d[3] / 2.0;
        t[1][1] = d[4];
        t[0][2] = d[5] / 2.0;
        t[3][0] = d[6] / 6.0;
        t[2][1] = d[7] / 2.0;
        t[1][2] = d[8] / 2.0;
        t[0][3] = d[9] / 6.0;
        Jet3 { t }
    }

    /// A function of `u` alone given its derivatives `[g, g', g'', g''']`.
    pub fn of_u(d: [f64; 4]) -> Self {
        Jet3::from_partials([d[0], d[1], 0.0, d[2], 0.0, 0.0, d[3], 0.0, 0.0, 0.0])
    }

    /// A function of `v` alone given its derivatives `[g, g', g'', g''']`.
    pub fn of_v(d: [f64; 4]) -> Self {
        Jet3::from_partials([d[0], 0.0, d[1], 0.0, 0.0, d[2], 0.0, 0.0, 0.0, d[3]])
    }

    pub fn value(&self) -> f64 {
        self.t[0][0]
    }
    pub fn du(&self) -> f64 {
        self.t[1][0]
    }
    pub fn dv(&self) -> f64 {
        self.t[0][1]
    }
    pub fn duu(&self) -> f64 {
        2.0 * self.t[2][0]
    }
    pub fn duv(&self) -> f64 {
        self.t[1][1]
    }
    pub fn dvv(&self) -> f64 {
        2.0 * self.t[0][2]
    }
    pub fn duuu(&self) -> f64 {
        6.0 * self.t[3][0]
    }
    pub fn duuv(&self) -> f64 {
        2.0 * self.t[2][1]
    }
    pub fn duvv(&self) -> f64 {
        2.0 * self.t[1][2]
    }
    pub fn dvvv(&self) -> f64 {
        6.0 * self.t[0][3]
    }

    pub fn jet2(&self) -> Jet2 {
        Jet2 {
            f: self.value(),
            p: self.dv(),
            q: self.du(),
            s: self.dvv(),
            r: self.duu(),
            w: self.duv(),
        }
    }

    /// The jet of `(u, v) ↦ f(v, u)`.
    pub fn transposed(&self) -> Jet3 {
        let mut t = [[0.0; ORDER + 1]; ORDER + 1];
        for (i, row) in self.t.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                t[j][i] = *x;
            }
        }
        Jet3 { t }
    }

    pub fn is_finite(&self) -> bool {
        self.t.iter().flatten().all(|x| x.is_finite())
    }

    /// `g(self)` where `derivs = [g, g', g'', g''']` evaluated at `self.value()`.
    pub fn compose(&self, derivs: &[f64]) -> Jet3 {
        let mut delta = *self;
        delta.t[0][0] = 0.0;
        let mut out = Jet3::constant(derivs[0]);
        let mut power = Jet3::constant(1.0);
        let mut fact = 1.0;
        for (k, d) in derivs.iter().enumerate().take(ORDER + 1).skip(1) {
            power = power * delta;
            fact *= k as f64;
            out = out + power * (d / fact);
        }
        out
    }

    /// Composes a parsed expression with this jet as its argument.
    pub fn apply(&self, e: &FuncExpr) -> Result<Jet3> {
        let d = e.eval_jet1(self.value(), ORDER)?;
        Ok(self.compose(&d))
    }

    pub fn recip(&self) -> Jet3 {
        let x = self.value();
        self.compose(&[1.0 / x, -1.0 / (x * x), 2.0 / x.powi(3), -6.0 / x.powi(4)])
    }

    pub fn sqrt(&self) -> Jet3 {
        let x = self.value();
        let r = x.sqrt();
        self.compose(&[r, 0.5 / r, -0.25 / (r * x), 0.375 / (r * x * x)])
    }

    pub fn ln(&self) -> Jet3 {
        let x = self.value();
        self.compose(&[x.ln(), 1.0 / x, -1.0 / (x * x), 2.0 / x.powi(3)])
    }

    pub fn exp(&self) -> Jet3 {
        let e = self.value().exp();
        self.compose(&[e; 4])
    }

    pub fn sinh(&self) -> Jet3 {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        self.compose(&[s, c, s, c])
    }

    pub fn cosh(&self) -> Jet3 {
        let (s, c) = (self.value().sinh(), self.value().cosh());
        self.compose(&[c, s, c, s])
    }

    pub fn sin(&self) -> Jet3 {
        let (s, c) = self.value().sin_cos();
        self.compose(&[s, c, -s, -c])
    }

    pub fn cos(&self) -> Jet3 {
        let (s, c) = self.value().sin_cos();
        self.compose(&[c, -s, -c, s])
    }

    /// Integer power by repeated multiplication.
    pub fn powi(&self, n: i32) -> Jet3 {
        let mut acc = Jet3::constant(1.0);
        for _ in 0..n.unsigned_abs() {
            acc = acc * *self;
        }
        if n < 0 {
            acc.recip()
        } else {
            acc
        }
    }

    /// Real power, valid for positive base.
    pub fn powf(&self, q: f64) -> Jet3 {
        let x = self.value();
        self.compose(&[
            x.powf(q),
            q * x.powf(q - 1.0),
            q * (q - 1.0) * x.powf(q - 2.0),
            q * (q - 1.0) * (q - 2.0) * x.powf(q - 3.0),
        ])
    }
}

impl Add for Jet3 {
    type Output = Jet3;
    fn add(mut self, o: Jet3) -> Jet3 {
        for i in 0..=ORDER {
            for j in 0..=ORDER - i {
                self.t[i][j] += o.t[i][j];
            }
        }
        self
    }
}

impl Sub for Jet3 {
    type Output = Jet3;
    fn sub(mut self, o: Jet3) -> Jet3 {
        for i in 0..=ORDER {
            for j in 0..=ORDER - i {
                self.t[i][j] -= o.t[i][j];
            }
        }
        self
    }
}

impl Neg for Jet3 {
    type Output = Jet3;
    fn neg(self) -> Jet3 {
        self * -1.0
    }
}

impl Mul for Jet3 {
    type Output = Jet3;
    fn mul(self, o: Jet3) -> Jet3 {
        let mut r = Jet3::constant(0.0);
        for i in 0..=ORDER {
            for j in 0..=ORDER - i {
                let mut acc = 0.0;
                for a in 0..=i {
                    for b in 0..=j {
                        acc += self.t[a][b] * o.t[i - a][j - b];
                    }
                }
                r.t[i][j] = acc;
            }
        }
        r
    }
}

impl Div for Jet3 {
    type Output = Jet3;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, o: Jet3) -> Jet3 {
        self * o.recip()
    }
}

impl Add<f64> for Jet3 {
    type Output = Jet3;
    fn add(mut self, c: f64) -> Jet3 {
        self.t[0][0] += c;
        self
    }
}

impl Sub<f64> for Jet3 {
    type Output = Jet3;
    fn sub(mut self, c: f64) -> Jet3 {
        self.t[0][0] -= c;
        self
    }
}

impl Mul<f64> for Jet3 {
    type Output = Jet3;
    fn mul(mut self, c: f64) -> Jet3 {
        for row in self.t.iter_mut() {
            for x in row.iter_mut() {
                *x *= c;
            }
        }
        self
    }
}

impl Div<f64> for Jet3 {
    type Output = Jet3;
    fn div(self, c: f64) -> Jet3 {
        self * (1.0 / c)
    }
}
