//! Single-variable function expressions with exact forward-mode derivatives.
//!
//! Users supply the arbitrary functions of the solution families (θ₁, θ₂),
//! pressure laws and density factors as text in the formal variable `s`.
//! Which physical coordinate `s` stands for is decided by the caller.

mod parser;
mod series;

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use series::{elementary_derivatives, real_power_derivatives, Series};
pub use series::{Elementary, MAX_ORDER};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Node {
    Const(f64),
    Var,
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, f64),
    Call(Elementary, Box<Node>),
}

impl Node {
    /// Value of a variable-free subtree.
    fn constant_value(&self) -> Option<f64> {
        if self.has_var() {
            return None;
        }
        eval_series(self, &Series::constant(0.0, 0))
            .ok()
            .map(|s| s.value())
    }

    fn has_var(&self) -> bool {
        match self {
            Node::Const(_) => false,
            Node::Var => true,
            Node::Neg(a) | Node::Pow(a, _) | Node::Call(_, a) => a.has_var(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                a.has_var() || b.has_var()
            }
        }
    }

    fn render(&self, out: &mut String) {
        match self {
            Node::Const(x) => {
                if *x < 0.0 {
                    out.push_str(&format!("({x:?})"));
                } else {
                    out.push_str(&format!("{x:?}"));
                }
            }
            Node::Var => out.push('s'),
            Node::Neg(a) => {
                out.push_str("(-");
                a.render(out);
                out.push(')');
            }
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => {
                let op = match self {
                    Node::Add(..) => '+',
                    Node::Sub(..) => '-',
                    Node::Mul(..) => '*',
                    _ => '/',
                };
                out.push('(');
                a.render(out);
                out.push(op);
                b.render(out);
                out.push(')');
            }
            Node::Pow(a, q) => {
                out.push('(');
                a.render(out);
                out.push_str(&format!(")^({q:?})"));
            }
            Node::Call(f, a) => {
                out.push_str(f.name());
                out.push('(');
                a.render(out);
                out.push(')');
            }
        }
    }
}

fn eval_series(node: &Node, x: &Series) -> Result<Series> {
    let order = x.order;
    Ok(match node {
        Node::Const(c) => Series::constant(*c, order),
        Node::Var => *x,
        Node::Neg(a) => eval_series(a, x)?.neg(),
        Node::Add(a, b) => eval_series(a, x)?.add(&eval_series(b, x)?),
        Node::Sub(a, b) => eval_series(a, x)?.sub(&eval_series(b, x)?),
        Node::Mul(a, b) => eval_series(a, x)?.mul(&eval_series(b, x)?),
        Node::Div(a, b) => eval_series(a, x)?.div(&eval_series(b, x)?)?,
        Node::Pow(a, q) => {
            let base = eval_series(a, x)?;
            if q.fract() == 0.0 && q.abs() < 1e9 {
                base.powi(*q as i64)?
            } else {
                let b0 = base.value();
                if b0 <= 0.0 {
                    return Err(Error::domain(format!(
                        "fractional power {q} of non-positive base {b0}"
                    )));
                }
                base.compose(&real_power_derivatives(b0, *q, order))
            }
        }
        Node::Call(f, a) => {
            let arg = eval_series(a, x)?;
            arg.compose(&elementary_derivatives(*f, arg.value(), order)?)
        }
    })
}

/// A parsed expression in the formal variable `s`.
///
/// Cheap to clone; the tree is shared and never mutated after parsing.
#[derive(Clone)]
pub struct FuncExpr {
    root: Arc<Node>,
    source: Arc<str>,
}

impl FuncExpr {
    /// Parses `src`. Malformed input yields [`Error::Syntax`] with the byte
    /// offset of the offending token.
    pub fn parse(src: &str) -> Result<Self> {
        let root = parser::parse(src)?;
        Ok(FuncExpr {
            root: Arc::new(root),
            source: Arc::from(src.trim()),
        })
    }

    pub fn constant(c: f64) -> Self {
        FuncExpr {
            root: Arc::new(Node::Const(c)),
            source: Arc::from(format!("{c:?}")),
        }
    }

    /// The text this expression was parsed from.
    pub fn source(&self) -> &str {
        &self.source
    }

    /// Fully parenthesised rendering that re-parses to an equivalent tree.
    pub fn render(&self) -> String {
        let mut out = String::new();
        self.root.render(&mut out);
        out
    }

    pub fn is_constant(&self) -> bool {
        !self.root.has_var()
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        Ok(self.eval_jet1(x, 0)?[0])
    }

    /// Value and derivatives `[e(x), e'(x), ..., e^(order)(x)]`, computed by
    /// propagating truncated Taylor series through the tree.
    pub fn eval_jet1(&self, x: f64, order: usize) -> Result<Vec<f64>> {
        if order > MAX_ORDER {
            return Err(Error::invalid(format!(
                "derivative order {order} exceeds {MAX_ORDER}"
            )));
        }
        let s = eval_series(&self.root, &Series::variable(x, order))?;
        let d = s.derivatives();
        if d.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain(format!(
                "`{}` is not finite at s = {x}",
                self.source
            )));
        }
        Ok(d)
    }
}

impl fmt::Debug for FuncExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FuncExpr({:?})", self.source)
    }
}

impl fmt::Display for FuncExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.source)
    }
}

impl std::str::FromStr for FuncExpr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        FuncExpr::parse(s)
    }
}
