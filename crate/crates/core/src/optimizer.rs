//! Quasi-Newton (BFGS) maximisation with finite-difference gradients.
//!
//! The method minimises `-f`. It keeps an inverse-Hessian approximation `H`,
//! starting from `I / |g0|` and rescaled by `s.y / y.y` before the first
//! update. When the curvature condition is weak the step is damped (Powell's
//! rule in its dual form for the inverse update), which keeps `H` positive
//! definite without a Wolfe line search. The line search backtracks from the
//! unit step using quadratic interpolation and accepts the better of the unit
//! step and the interpolated minimiser when both give sufficient increase.

use alloc::vec;
use alloc::vec::Vec;

use libm::sqrt;

use crate::error::{Error, Result};
use crate::fd;
use crate::linalg::Matrix;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptControls {
    pub max_iterations: usize,
    /// Stop when `|grad|_inf <= g_tol * max(1, |f|)`.
    pub g_tol: f64,
    /// Stop when the accepted change in `f` is at most `f_tol * max(1, |f|)`.
    pub f_tol: f64,
    /// Sufficient-increase constant of the line search.
    pub armijo: f64,
    /// Relative finite-difference step.
    pub fd_step: f64,
}

impl Default for OptControls {
    fn default() -> Self {
        Self {
            max_iterations: 1000,
            g_tol: 1e-5,
            f_tol: 1e-9,
            armijo: 1e-4,
            fd_step: fd::DEFAULT_REL_STEP,
        }
    }
}

impl OptControls {
    pub fn validate(&self) -> Result<()> {
        if self.max_iterations == 0 {
            return Err(Error::InvalidControls("max_iterations must be at least 1"));
        }
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.g_tol) || !positive(self.f_tol) || !positive(self.fd_step) {
            return Err(Error::InvalidControls("tolerances and step must be positive"));
        }
        if !(positive(self.armijo) && self.armijo < 1.0) {
            return Err(Error::InvalidControls("armijo constant must lie in (0, 1)"));
        }
        Ok(())
    }

    /// Gradient tolerance scaled by the objective magnitude.
    pub fn gradient_threshold(&self, value: f64) -> f64 {
        self.g_tol * value.abs().max(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Gradient,
    ObjectiveChange,
    MaxIterations,
    LineSearchFailure,
}

impl Termination {
    pub fn converged(self) -> bool {
        matches!(self, Termination::Gradient | Termination::ObjectiveChange)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Termination::Gradient => "gradient",
            Termination::ObjectiveChange => "objective-change",
            Termination::MaxIterations => "max-iterations",
            Termination::LineSearchFailure => "line-search-failure",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptReport {
    pub argmax: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub termination: Termination,
    pub grad_inf: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Gradient of `-f`. Falls back to a one-sided difference on a coordinate
/// whose central stencil leaves the finite region.
fn neg_gradient(f: &mut impl FnMut(&[f64]) -> f64, x: &[f64], fx: f64, rel: f64) -> Option<Vec<f64>> {
    match fd::gradient(|p| -f(p), x, rel) {
        Ok(g) => Some(g),
        Err(_) => {
            let mut work = x.to_vec();
            let mut g = vec![0.0; x.len()];
            for j in 0..x.len() {
                let h = fd::step(x[j], rel);
                work[j] = x[j] + h;
                let fp = f(&work);
                work[j] = x[j] - h;
                let fm = f(&work);
                work[j] = x[j];
                g[j] = match (fp.is_finite(), fm.is_finite()) {
                    (true, true) => -(fp - fm) / (2.0 * h),
                    (true, false) => -(fp - fx) / h,
                    (false, true) => -(fx - fm) / h,
                    (false, false) => return None,
                };
            }
            Some(g)
        }
    }
}

struct Trial {
    step: f64,
    point: Vec<f64>,
    value: f64,
}

/// Backtracking line search on `phi(a) = -f(x + a d)`; returns the accepted trial.
fn line_search(
    f: &mut impl FnMut(&[f64]) -> f64,
    x: &[f64],
    d: &[f64],
    phi0: f64,
    slope: f64,
    armijo: f64,
) -> Option<Trial> {
    let at = |a: f64| -> Vec<f64> { x.iter().zip(d).map(|(xi, di)| xi + a * di).collect() };
    let sufficient = |a: f64, phi: f64| phi.is_finite() && phi <= phi0 + armijo * a * slope;
    // Minimiser of the parabola through phi(0), phi'(0) and phi(a).
    let parabola = |a: f64, phi: f64| {
        let curv = phi - phi0 - slope * a;
        (curv > 0.0).then(|| -slope * a * a / (2.0 * curv))
    };

    let mut a = 1.0;
    for _ in 0..60 {
        let point = at(a);
        let phi = -f(&point);
        if sufficient(a, phi) {
            let mut best = Trial {
                step: a,
                point,
                value: phi,
            };
            if let Some(a_star) = parabola(a, phi) {
                if a_star.is_finite() && a_star > 0.0 && a_star <= 10.0 * a && (a_star - a).abs() > 1e-3 * a {
                    let p2 = at(a_star);
                    let phi2 = -f(&p2);
                    if sufficient(a_star, phi2) && phi2 < best.value {
                        best = Trial {
                            step: a_star,
                            point: p2,
                            value: phi2,
                        };
                    }
                }
            }
            return Some(best);
        }
        let next = if phi.is_finite() {
            parabola(a, phi).unwrap_or(0.5 * a)
        } else {
            0.5 * a
        };
        a = next.clamp(0.1 * a, 0.5 * a);
        if a < 1e-20 {
            break;
        }
    }
    None
}

/// Maximises `f` from `x0`.
///
/// The objective sequence over accepted steps is nondecreasing and the run is
/// deterministic in `(f, x0, controls)`.
pub fn maximize(mut f: impl FnMut(&[f64]) -> f64, x0: &[f64], controls: &OptControls) -> Result<OptReport> {
    controls.validate()?;
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = f(&x);
    if !fx.is_finite() {
        return Err(Error::NonFiniteStart);
    }
    let report = |x: Vec<f64>, fx: f64, it: usize, term: Termination, g: &[f64]| OptReport {
        argmax: x,
        value: fx,
        iterations: it,
        termination: term,
        grad_inf: inf_norm(g),
    };
    let Some(mut g) = neg_gradient(&mut f, &x, fx, controls.fd_step) else {
        return Err(Error::NonFiniteStart);
    };
    if n == 0 {
        return Ok(report(x, fx, 0, Termination::Gradient, &g));
    }

    let identity_scaled = |g: &[f64]| {
        let norm = sqrt(dot(g, g));
        Matrix::identity(n).scaled(if norm > 0.0 { 1.0 / norm } else { 1.0 })
    };
    let mut h = identity_scaled(&g);
    let mut updated = false;

    for iter in 0..controls.max_iterations {
        if inf_norm(&g) <= controls.gradient_threshold(fx) {
            return Ok(report(x, fx, iter, Termination::Gradient, &g));
        }
        let mut d: Vec<f64> = h.mul_vec(&g).iter().map(|v| -v).collect();
        let mut slope = dot(&g, &d);
        if !(slope < 0.0) {
            h = identity_scaled(&g);
            updated = false;
            d = h.mul_vec(&g).iter().map(|v| -v).collect();
            slope = dot(&g, &d);
        }
        let phi0 = -fx;
        let Some(trial) = line_search(&mut f, &x, &d, phi0, slope, controls.armijo) else {
            return Ok(report(x, fx, iter, Termination::LineSearchFailure, &g));
        };
        let f_new = -trial.value;
        let Some(g_new) = neg_gradient(&mut f, &trial.point, f_new, controls.fd_step) else {
            return Ok(report(trial.point, f_new, iter + 1, Termination::LineSearchFailure, &g));
        };

        let s: Vec<f64> = d.iter().map(|di| trial.step * di).collect();
        let y: Vec<f64> = g_new.iter().zip(&g).map(|(a, b)| a - b).collect();
        let change = (f_new - fx).abs();
        x = trial.point;
        fx = f_new;
        g = g_new;

        if inf_norm(&g) <= controls.gradient_threshold(fx) {
            return Ok(report(x, fx, iter + 1, Termination::Gradient, &g));
        }
        if change <= controls.f_tol * fx.abs().max(1.0) {
            return Ok(report(x, fx, iter + 1, Termination::ObjectiveChange, &g));
        }

        let yy = dot(&y, &y);
        let sy0 = dot(&s, &y);
        if !updated && sy0 > 0.0 && yy > 0.0 {
            h = Matrix::identity(n).scaled(sy0 / yy);
        }
        updated = true;
        bfgs_update(&mut h, s, &y);
    }
    Ok(report(x, fx, controls.max_iterations, Termination::MaxIterations, &g))
}

/// Damped inverse BFGS update `H <- (I - r s y^T) H (I - r y s^T) + r s s^T`.
fn bfgs_update(h: &mut Matrix, mut s: Vec<f64>, y: &[f64]) {
    let n = s.len();
    let hy = h.mul_vec(y);
    let yhy = dot(y, &hy);
    let mut sy = dot(&s, y);
    if !(yhy > 0.0 && yhy.is_finite()) {
        return;
    }
    if sy < 0.2 * yhy {
        let theta = 0.8 * yhy / (yhy - sy);
        for (si, hyi) in s.iter_mut().zip(&hy) {
            *si = theta * *si + (1.0 - theta) * hyi;
        }
        sy = dot(&s, y);
    }
    if !(sy > 0.0 && sy.is_finite()) {
        return;
    }
    let rho = 1.0 / sy;
    // H' = H - r (s hy^T + hy s^T) + (r^2 yHy + r) s s^T
    let coef = rho * rho * yhy + rho;
    for i in 0..n {
        for j in 0..n {
            let v = h.get(i, j) - rho * (s[i] * hy[j] + hy[i] * s[j]) + coef * s[i] * s[j];
            h.set(i, j, v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_quadratic() {
        let r = maximize(|x| -(x[0] - 3.0) * (x[0] - 3.0), &[0.0], &OptControls::default()).unwrap();
        assert!((r.argmax[0] - 3.0).abs() < 1e-8, "{r:?}");
        assert!(r.termination.converged());
    }

    #[test]
    fn rosenbrock() {
        let f = |x: &[f64]| -(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2));
        let controls = OptControls {
            g_tol: 1e-9,
            ..OptControls::default()
        };
        let r = maximize(f, &[-1.2, 1.0], &controls).unwrap();
        assert!((r.argmax[0] - 1.0).abs() < 1e-5 && (r.argmax[1] - 1.0).abs() < 1e-5, "{r:?}");
    }

    #[test]
    fn concave_quadratic_terminates_in_few_iterations() {
        // f = -1/2 x^T A x + b^T x with A positive definite.
        let a = [[5.0, 1.0, 0.3, 0.0], [1.0, 3.0, 0.2, 0.1], [0.3, 0.2, 2.0, 0.4], [0.0, 0.1, 0.4, 1.0]];
        let b = [1.0, -2.0, 0.5, 3.0];
        let f = |x: &[f64]| {
            let mut v = 0.0;
            for i in 0..4 {
                v += b[i] * x[i];
                for j in 0..4 {
                    v -= 0.5 * x[i] * a[i][j] * x[j];
                }
            }
            v
        };
        let controls = OptControls {
            g_tol: 1e-10,
            ..OptControls::default()
        };
        let r = maximize(f, &[0.0; 4], &controls).unwrap();
        assert!(r.iterations <= 4 + 2, "{r:?}");
        // A x = b at the optimum.
        for i in 0..4 {
            let ax: f64 = (0..4).map(|j| a[i][j] * r.argmax[j]).sum();
            assert!((ax - b[i]).abs() < 1e-8);
        }
    }

    #[test]
    fn scale_invariance() {
        let f = |x: &[f64]| -((x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2) + x[0].powi(4));
        let c = OptControls::default();
        let a = maximize(f, &[2.0, 2.0], &c).unwrap();
        let b = maximize(|x| 1000.0 * f(x), &[2.0, 2.0], &c).unwrap();
        for (u, v) in a.argmax.iter().zip(&b.argmax) {
            assert!((u - v).abs() < 1e-4);
        }
    }

    #[test]
    fn rejects_non_finite_start() {
        let r = maximize(|_| f64::NAN, &[0.0], &OptControls::default());
        assert_eq!(r, Err(Error::NonFiniteStart));
        let bad = OptControls {
            max_iterations: 0,
            ..OptControls::default()
        };
        assert!(maximize(|x| -x[0] * x[0], &[1.0], &bad).is_err());
    }

    #[test]
    fn reported_value_matches_point() {
        let f = |x: &[f64]| -(x[0] - 0.5).powi(2) - (x[0] * x[1] - 1.0).powi(2);
        let r = maximize(f, &[3.0, -1.0], &OptControls::default()).unwrap();
        assert_eq!(r.value, f(&r.argmax));
    }

    #[test]
    fn iteration_limit_keeps_best_point() {
        let f = |x: &[f64]| -(100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2));
        let c = OptControls {
            max_iterations: 3,
            ..OptControls::default()
        };
        let r = maximize(f, &[-1.2, 1.0], &c).unwrap();
        assert_eq!(r.termination, Termination::MaxIterations);
        assert!(r.value >= f(&[-1.2, 1.0]));
    }
}
