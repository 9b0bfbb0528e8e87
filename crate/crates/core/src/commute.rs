//! Commutativity of Hamiltonian flows of hydrodynamic type.
//!
//! A density `h(u, v)` generates `(u, v)_t = V (u, v)_x` with
//! `V = [[h_uv, h_vv], [h_uu, h_uv]]`. Two such flows commute exactly when
//! `h_uu f_vv − h_vv f_uu = 0`.

use crate::error::Result;
use crate::field::StateField;
use crate::jet::Jet3;
use crate::solutions::Density;

type Mat = [[f64; 2]; 2];

/// Matrix of the flow generated by a density, in `(u, v)` ordering.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowMatrix(pub Mat);

impl FlowMatrix {
    pub fn from_jet(j: &Jet3) -> Self {
        FlowMatrix([[j.duv(), j.dvv()], [j.duu(), j.duv()]])
    }

    /// `∂V/∂u` and `∂V/∂v` from third derivatives.
    fn gradient(j: &Jet3) -> (Mat, Mat) {
        (
            [[j.duuv(), j.duvv()], [j.duuu(), j.duuv()]],
            [[j.duvv(), j.dvvv()], [j.duuv(), j.duvv()]],
        )
    }
}

fn mul(a: &Mat, b: &Mat) -> Mat {
    let mut c = [[0.0; 2]; 2];
    for i in 0..2 {
        for k in 0..2 {
            c[i][k] = a[i][0] * b[0][k] + a[i][1] * b[1][k];
        }
    }
    c
}

fn apply(a: &Mat, x: [f64; 2]) -> [f64; 2] {
    [
        a[0][0] * x[0] + a[0][1] * x[1],
        a[1][0] * x[0] + a[1][1] * x[1],
    ]
}

pub fn flow_matrix(h: &Density, u: f64, v: f64) -> Result<FlowMatrix> {
    Ok(FlowMatrix::from_jet(&h.jet3(u, v)?))
}

/// `|h_uu f_vv − h_vv f_uu| / (1 + |h_uu f_vv| + |h_vv f_uu|)` at one point.
pub fn commute_residual_at(h: &Density, f: &Density, u: f64, v: f64) -> Result<f64> {
    let (jh, jf) = (h.jet(u, v)?, f.jet(u, v)?);
    let (a, b) = (jh.r * jf.s, jh.s * jf.r);
    Ok((a - b).abs() / (1.0 + (a.abs() + b.abs())))
}

/// Max-norm commutation residual over the probe points.
pub fn commute_residual(h: &Density, f: &Density, probe: &[(f64, f64)]) -> Result<f64> {
    probe.iter().try_fold(0.0f64, |m, &(u, v)| {
        Ok(m.max(commute_residual_at(h, f, u, v)?))
    })
}

/// Residuals of the two tensorial commutation conditions along a field.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct TensorResiduals {
    /// `max |(AV − VA) w_xx|`
    pub r_a1: f64,
    /// `max |∂_k A (V w_x)^k w_x + A ∂_k V w_x^k w_x − ∂_k V (A w_x)^k w_x − V ∂_k A w_x^k w_x|`
    pub r_a2: f64,
}

/// Evaluates the compatibility `w_ty = w_yt` of `w_t = V w_x` (from `h`) and
/// `w_y = A w_x` (from `f`) on the interior of `field`, where `w = (u, v)`.
/// Spatial derivatives use fourth-order central differences; flagged cells
/// and their stencil neighbours are skipped.
pub fn tensor_commutation_residual(
    h: &Density,
    f: &Density,
    field: &StateField,
) -> Result<TensorResiduals> {
    let mut out = TensorResiduals::default();
    if field.len() < crate::field::MIN_CELLS {
        return Err(crate::Error::GridTooSmall {
            needed: crate::field::MIN_CELLS,
            got: field.len(),
        });
    }
    for i in 2..field.len() - 2 {
        if !field.clean_around(i, 2) {
            continue;
        }
        let (u, v) = (field.u[i], field.v[i]);
        let [ux, vx, uxx, vxx] = field.derivatives_at(i)?;
        let (wx, wxx) = ([ux, vx], [uxx, vxx]);
        let (jh, jf) = (h.jet3(u, v)?, f.jet3(u, v)?);
        let (vm, am) = (FlowMatrix::from_jet(&jh).0, FlowMatrix::from_jet(&jf).0);
        let (dv, da) = (FlowMatrix::gradient(&jh), FlowMatrix::gradient(&jf));
        let (av, va) = (mul(&am, &vm), mul(&vm, &am));
        let (p, q) = (apply(&av, wxx), apply(&va, wxx));
        let a1 = (p[0] - q[0]).abs().max((p[1] - q[1]).abs());

        // Directional derivatives of a matrix field along a vector.
        let along = |g: &(Mat, Mat), d: [f64; 2]| -> Mat {
            std::array::from_fn(|r| std::array::from_fn(|c| g.0[r][c] * d[0] + g.1[r][c] * d[1]))
        };
        let (vwx, awx) = (apply(&vm, wx), apply(&am, wx));
        let t1 = apply(&along(&da, vwx), wx);
        let t2 = apply(&am, apply(&along(&dv, wx), wx));
        let t3 = apply(&along(&dv, awx), wx);
        let t4 = apply(&vm, apply(&along(&da, wx), wx));
        let a2 = (0..2)
            .map(|k| (t1[k] + t2[k] - t3[k] - t4[k]).abs())
            .fold(0.0f64, f64::max);
        out.r_a1 = out.r_a1.max(a1);
        out.r_a2 = out.r_a2.max(a2);
    }
    Ok(out)
}
