//! Discrete states `u(x), v(x)` on a uniform grid.

use crate::calculus::Stencil;
use crate::error::{Error, Result};

/// Status of a single grid cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CellFlag {
    Ok,
    /// The hodograph map is singular here (gradient catastrophe).
    Catastrophe,
    /// Excluded from downstream use for some other reason.
    Masked,
}

impl CellFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            CellFlag::Ok => "ok",
            CellFlag::Catastrophe => "catastrophe",
            CellFlag::Masked => "masked",
        }
    }
}

/// Cells needed by the fourth-order stencils and the time steppers.
pub const MIN_CELLS: usize = 5;

/// Snapshot of `(u, v)` on the grid `x_i = x0 + i h`.
///
/// Any non-empty length is accepted; operations that differentiate in `x`
/// need at least [`MIN_CELLS`] cells and report [`Error::GridTooSmall`]
/// otherwise.
#[derive(Debug, Clone, PartialEq)]
pub struct StateField {
    pub x0: f64,
    pub h: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub time: f64,
    pub flags: Vec<CellFlag>,
}

impl StateField {
    pub fn new(x0: f64, h: f64, u: Vec<f64>, v: Vec<f64>, time: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() || !x0.is_finite() {
            return Err(Error::invalid(format!(
                "grid spacing must be positive, got {h}"
            )));
        }
        if u.len() != v.len() {
            return Err(Error::invalid(format!(
                "u and v have different lengths ({} vs {})",
                u.len(),
                v.len()
            )));
        }
        if u.is_empty() {
            return Err(Error::GridTooSmall { needed: 1, got: 0 });
        }
        let flags = vec![CellFlag::Ok; u.len()];
        Ok(StateField {
            x0,
            h,
            u,
            v,
            time,
            flags,
        })
    }

    /// Samples `init(x) -> (u, v)` at `n` points starting at `x0`.
    pub fn sample<F>(x0: f64, h: f64, n: usize, time: f64, init: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<(f64, f64)>,
    {
        let (u, v): (Vec<f64>, Vec<f64>) = (0..n)
            .map(|i| init(x0 + i as f64 * h))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .unzip();
        StateField::new(x0, h, u, v, time)
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.h
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.x(i)).collect()
    }

    pub fn flagged(&self) -> usize {
        self.flags.iter().filter(|f| **f != CellFlag::Ok).count()
    }

    /// Whether cells `i - r ..= i + r` are all inside the grid and unflagged.
    pub fn clean_around(&self, i: usize, r: usize) -> bool {
        i >= r && i + r < self.len() && self.flags[i - r..=i + r].iter().all(|f| *f == CellFlag::Ok)
    }

    /// Fourth-order central derivatives `(u_x, v_x, u_xx, v_xx)` at an interior cell.
    pub fn derivatives_at(&self, i: usize) -> Result<[f64; 4]> {
        let d1 = Stencil::central(1, 4)?;
        let d2 = Stencil::central(2, 4)?;
        let r = d1.half_width();
        if i < r || i + r >= self.len() {
            return Err(Error::GridTooSmall {
                needed: 2 * r + 1,
                got: self.len(),
            });
        }
        Ok([
            d1.apply_samples(&self.u, i, self.h),
            d1.apply_samples(&self.v, i, self.h),
            d2.apply_samples(&self.u, i, self.h),
            d2.apply_samples(&self.v, i, self.h),
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_short_or_mismatched_grids() {
        assert!(matches!(
            StateField::new(0.0, 0.1, vec![], vec![], 0.0),
            Err(Error::GridTooSmall { .. })
        ));
        let short = StateField::new(0.0, 0.1, vec![0.0; 4], vec![0.0; 4], 0.0).unwrap();
        assert!(matches!(
            short.derivatives_at(2),
            Err(Error::GridTooSmall { .. })
        ));
        assert!(StateField::new(0.0, 0.1, vec![0.0; 5], vec![0.0; 6], 0.0).is_err());
        assert!(StateField::new(0.0, 0.0, vec![0.0; 5], vec![0.0; 5], 0.0).is_err());
    }

    #[test]
    fn derivatives_of_a_quadratic() {
        let f = StateField::sample(0.0, 0.1, 9, 0.0, |x| Ok((x * x, 3.0 * x))).unwrap();
        let d = f.derivatives_at(4).unwrap();
        assert!((d[0] - 0.8).abs() < 1e-13);
        assert!((d[1] - 3.0).abs() < 1e-13);
        assert!((d[2] - 2.0).abs() < 1e-11);
        assert!(d[3].abs() < 1e-11);
        assert!(f.derivatives_at(1).is_err());
    }
}
