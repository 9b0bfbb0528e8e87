//! Truncated univariate Taylor series used for forward-mode differentiation
//! of expression trees.

use crate::error::{Error, Result};

/// Highest derivative order supported by [`super::FuncExpr::eval_jet1`].
pub const MAX_ORDER: usize = 4;

/// Taylor coefficients `c[k] = f^(k)(x0) / k!` truncated after `order`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Series {
    pub c: [f64; MAX_ORDER + 1],
    pub order: usize,
}

impl Series {
    pub fn constant(value: f64, order: usize) -> Self {
        let mut c = [0.0; MAX_ORDER + 1];
        c[0] = value;
        Series { c, order }
    }

    pub fn variable(x0: f64, order: usize) -> Self {
        let mut s = Series::constant(x0, order);
        if order >= 1 {
            s.c[1] = 1.0;
        }
        s
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    /// Derivatives `f, f', ..., f^(order)`.
    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        (0..=self.order)
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                self.c[k] * fact
            })
            .collect()
    }

    pub fn add(&self, o: &Series) -> Series {
        let mut r = *self;
        for k in 0..=self.order {
            r.c[k] += o.c[k];
        }
        r
    }

    pub fn sub(&self, o: &Series) -> Series {
        let mut r = *self;
        for k in 0..=self.order {
            r.c[k] -= o.c[k];
        }
        r
    }

    pub fn neg(&self) -> Series {
        let mut r = *self;
        for k in 0..=self.order {
            r.c[k] = -r.c[k];
        }
        r
    }

    pub fn mul(&self, o: &Series) -> Series {
        let mut r = Series::constant(0.0, self.order);
        for k in 0..=self.order {
            r.c[k] = (0..=k).map(|i| self.c[i] * o.c[k - i]).sum();
        }
        r
    }

    pub fn div(&self, o: &Series) -> Result<Series> {
        let b0 = o.c[0];
        if b0 == 0.0 {
            return Err(Error::domain("division by zero"));
        }
        let mut q = Series::constant(0.0, self.order);
        for k in 0..=self.order {
            let acc: f64 = (1..=k).map(|i| o.c[i] * q.c[k - i]).sum();
            q.c[k] = (self.c[k] - acc) / b0;
        }
        Ok(q)
    }

    /// `g(self)` given `derivs[j] = g^(j)(self.value())` for `j = 0..=order`.
    pub fn compose(&self, derivs: &[f64]) -> Series {
        let mut delta = *self;
        delta.c[0] = 0.0;
        let mut out = Series::constant(derivs[0], self.order);
        let mut power = Series::constant(1.0, self.order);
        let mut fact = 1.0;
        for (j, d) in derivs.iter().enumerate().take(self.order + 1).skip(1) {
            power = power.mul(&delta);
            fact *= j as f64;
            for k in 0..=self.order {
                out.c[k] += d / fact * power.c[k];
            }
        }
        out
    }

    /// Integer power by repeated squaring; negative exponents divide.
    pub fn powi(&self, n: i64) -> Result<Series> {
        let mut base = *self;
        let mut acc = Series::constant(1.0, self.order);
        let mut e = n.unsigned_abs();
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            base = base.mul(&base);
            e >>= 1;
        }
        if n < 0 {
            Series::constant(1.0, self.order).div(&acc)
        } else {
            Ok(acc)
        }
    }
}

/// Derivative ladders of the elementary functions at a point.
pub(crate) fn elementary_derivatives(name: Elementary, x: f64, order: usize) -> Result<Vec<f64>> {
    let n = order + 1;
    let out = match name {
        Elementary::Exp => vec![x.exp(); n],
        Elementary::Ln => {
            if x <= 0.0 {
                return Err(Error::domain(format!("ln of non-positive argument {x}")));
            }
            let mut d = vec![x.ln()];
            let mut fact = 1.0;
            for j in 1..n {
                if j > 1 {
                    fact *= (j - 1) as f64;
                }
                let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
                d.push(sign * fact / x.powi(j as i32));
            }
            d
        }
        Elementary::Sin => {
            let (s, c) = x.sin_cos();
            let cycle = [s, c, -s, -c];
            (0..n).map(|j| cycle[j % 4]).collect()
        }
        Elementary::Cos => {
            let (s, c) = x.sin_cos();
            let cycle = [c, -s, -c, s];
            (0..n).map(|j| cycle[j % 4]).collect()
        }
        Elementary::Sinh => {
            let (s, c) = (x.sinh(), x.cosh());
            (0..n).map(|j| if j % 2 == 0 { s } else { c }).collect()
        }
        Elementary::Cosh => {
            let (s, c) = (x.sinh(), x.cosh());
            (0..n).map(|j| if j % 2 == 0 { c } else { s }).collect()
        }
        Elementary::Sqrt => {
            if x < 0.0 || (x == 0.0 && order > 0) {
                return Err(Error::domain(format!("sqrt at {x}")));
            }
            real_power_derivatives(x, 0.5, order)
        }
    };
    Ok(out)
}

/// Derivatives of `x^q` for `x > 0`.
pub(crate) fn real_power_derivatives(x: f64, q: f64, order: usize) -> Vec<f64> {
    let mut d = Vec::with_capacity(order + 1);
    let mut falling = 1.0;
    for j in 0..=order {
        d.push(falling * x.powf(q - j as f64));
        falling *= q - j as f64;
    }
    d
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Elementary {
    Exp,
    Ln,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Sqrt,
}

impl Elementary {
    pub fn name(self) -> &'static str {
        match self {
            Elementary::Exp => "exp",
            Elementary::Ln => "ln",
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Sinh => "sinh",
            Elementary::Cosh => "cosh",
            Elementary::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "exp" => Elementary::Exp,
            "ln" => Elementary::Ln,
            "sin" => Elementary::Sin,
            "cos" => Elementary::Cos,
            "sinh" => Elementary::Sinh,
            "cosh" => Elementary::Cosh,
            "sqrt" => Elementary::Sqrt,
            _ => return None,
        })
    }

    pub const ALL: [Elementary; 7] = [
        Elementary::Exp,
        Elementary::Ln,
        Elementary::Sin,
        Elementary::Cos,
        Elementary::Sinh,
        Elementary::Cosh,
        Elementary::Sqrt,
    ];
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn product_and_quotient_are_inverse() {
        let x = Series::variable(0.7, 4);
        let y = x.compose(&elementary_derivatives(Elementary::Exp, 0.7, 4).unwrap());
        let back = x.mul(&y).div(&y).unwrap();
        for k in 0..=4 {
            assert!((back.c[k] - x.c[k]).abs() < 1e-14);
        }
    }

    #[test]
    fn negative_integer_power() {
        let x = Series::variable(2.0, 3);
        let d = x.powi(-2).unwrap().derivatives();
        // 1/x^2: -2/x^3, 6/x^4, -24/x^5
        assert!((d[0] - 0.25).abs() < 1e-15);
        assert!((d[1] + 0.25).abs() < 1e-15);
        assert!((d[2] - 6.0 / 16.0).abs() < 1e-15);
        assert!((d[3] + 24.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn ln_derivative_ladder() {
        let d = elementary_derivatives(Elementary::Ln, 2.0, 4).unwrap();
        assert_eq!(d[1], 0.5);
        assert_eq!(d[2], -0.25);
        assert_eq!(d[3], 2.0 / 8.0);
        assert_eq!(d[4], -6.0 / 16.0);
    }
}
