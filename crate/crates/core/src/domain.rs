//! Rectangular working domains in the `(u, v)` plane and probe grids.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Closed rectangle `[u_min, u_max] × [v_min, v_max]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub u_min: f64,
    pub u_max: f64,
    pub v_min: f64,
    pub v_max: f64,
}

impl Rect {
    pub fn new(u_min: f64, u_max: f64, v_min: f64, v_max: f64) -> Result<Self> {
        let ok = [u_min, u_max, v_min, v_max].iter().all(|x| x.is_finite());
        if !ok || !(u_max > u_min) || !(v_max > v_min) {
            return Err(Error::invalid(format!(
                "degenerate rectangle u={u_min}:{u_max}, v={v_min}:{v_max}"
            )));
        }
        Ok(Rect {
            u_min,
            u_max,
            v_min,
            v_max,
        })
    }

    pub fn contains(&self, u: f64, v: f64) -> bool {
        u >= self.u_min && u <= self.u_max && v >= self.v_min && v <= self.v_max
    }

    pub fn clamp(&self, u: f64, v: f64) -> (f64, f64) {
        (
            u.clamp(self.u_min, self.u_max),
            v.clamp(self.v_min, self.v_max),
        )
    }

    /// `n × n` tensor grid including the corners, row-major in `u` then `v`.
    pub fn grid(&self, n: usize) -> Vec<(f64, f64)> {
        let n = n.max(2);
        let mut pts = Vec::with_capacity(n * n);
        for i in 0..n {
            let u = lerp(self.u_min, self.u_max, i as f64 / (n - 1) as f64);
            for j in 0..n {
                let v = lerp(self.v_min, self.v_max, j as f64 / (n - 1) as f64);
                pts.push((u, v));
            }
        }
        pts
    }

    /// Swaps the roles of `u` and `v`.
    pub fn transposed(&self) -> Rect {
        Rect {
            u_min: self.v_min,
            u_max: self.v_max,
            v_min: self.u_min,
            v_max: self.u_max,
        }
    }
}

fn lerp(a: f64, b: f64, t: f64) -> f64 {
    a + (b - a) * t
}

impl fmt::Display for Rect {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "u={}:{},v={}:{}",
            self.u_min, self.u_max, self.v_min, self.v_max
        )
    }
}

/// Parses `u=1:2,v=0.5:3`.
impl FromStr for Rect {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut u = None;
        let mut v = None;
        for part in s.split(',') {
            let (key, range) = part
                .split_once('=')
                .ok_or_else(|| Error::invalid(format!("expected `u=a:b,v=c:d`, got `{s}`")))?;
            let (lo, hi) = range
                .split_once(':')
                .ok_or_else(|| Error::invalid(format!("expected `lo:hi` range, got `{range}`")))?;
            let lo: f64 = parse_num(lo)?;
            let hi: f64 = parse_num(hi)?;
            match key.trim() {
                "u" => u = Some((lo, hi)),
                "v" => v = Some((lo, hi)),
                other => return Err(Error::UnknownName(other.to_string())),
            }
        }
        match (u, v) {
            (Some((a, b)), Some((c, d))) => Rect::new(a, b, c, d),
            _ => Err(Error::invalid(format!(
                "domain `{s}` must give both u and v ranges"
            ))),
        }
    }
}

pub(crate) fn parse_num(s: &str) -> Result<f64> {
    let x: f64 = s
        .trim()
        .parse()
        .map_err(|_| Error::invalid(format!("`{s}` is not a number")))?;
    if !x.is_finite() {
        return Err(Error::invalid(format!("`{s}` is not finite")));
    }
    Ok(x)
}
