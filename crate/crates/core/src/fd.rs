//! Central finite differences for gradients and Hessians.
//!
//! Coordinate `j` is stepped by `rel_step * max(1, |x_j|)`. The divisor uses
//! the representable step `(x + h) - (x - h)` rather than `2h`.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::linalg::Matrix;

pub const DEFAULT_REL_STEP: f64 = 1e-5;

#[inline]
pub fn step(x: f64, rel_step: f64) -> f64 {
    rel_step * x.abs().max(1.0)
}

/// Central-difference gradient of `f` at `x`.
pub fn gradient(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], rel_step: f64) -> Result<Vec<f64>> {
    let mut work = x.to_vec();
    let mut grad = Vec::with_capacity(x.len());
    for j in 0..x.len() {
        let h = step(x[j], rel_step);
        let (xp, xm) = (x[j] + h, x[j] - h);
        work[j] = xp;
        let fp = f(&work);
        work[j] = xm;
        let fm = f(&work);
        work[j] = x[j];
        if !(fp.is_finite() && fm.is_finite()) {
            return Err(Error::NonFiniteNeighbourhood { coordinate: j });
        }
        grad.push((fp - fm) / (xp - xm));
    }
    Ok(grad)
}

/// Central-difference Hessian of `f` at `x`; exactly symmetric.
///
/// Diagonal entries use the three-point second difference, off-diagonal
/// entries the four-point cross difference.
pub fn hessian(mut f: impl FnMut(&[f64]) -> f64, x: &[f64], rel_step: f64) -> Result<Matrix> {
    let n = x.len();
    let f0 = f(x);
    if !f0.is_finite() {
        return Err(Error::NonFiniteStart);
    }
    let mut work = x.to_vec();
    let mut hess = Matrix::zeros(n);
    let steps: Vec<(f64, f64)> = x
        .iter()
        .map(|&xi| {
            let h = step(xi, rel_step);
            // Half of the representable central step on either side.
            let span = (xi + h) - (xi - h);
            (h, span / 2.0)
        })
        .collect();
    let finite = |v: f64, j: usize| {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::NonFiniteNeighbourhood { coordinate: j })
        }
    };
    for i in 0..n {
        let (h, eff) = steps[i];
        work[i] = x[i] + h;
        let fp = finite(f(&work), i)?;
        work[i] = x[i] - h;
        let fm = finite(f(&work), i)?;
        work[i] = x[i];
        hess.set(i, i, (fp - 2.0 * f0 + fm) / (eff * eff));
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let (hi, ei) = steps[i];
            let (hj, ej) = steps[j];
            let mut eval = |si: f64, sj: f64| {
                work[i] = x[i] + si * hi;
                work[j] = x[j] + sj * hj;
                let v = f(&work);
                work[i] = x[i];
                work[j] = x[j];
                finite(v, i)
            };
            let fpp = eval(1.0, 1.0)?;
            let fpm = eval(1.0, -1.0)?;
            let fmp = eval(-1.0, 1.0)?;
            let fmm = eval(-1.0, -1.0)?;
            let v = (fpp - fpm - fmp + fmm) / (4.0 * ei * ej);
            hess.set(i, j, v);
            hess.set(j, i, v);
        }
    }
    Ok(hess)
}
