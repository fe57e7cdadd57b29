//! Quasi-Newton (BFGS) maximization with backtracking line search.

use nalgebra::{DMatrix, DVector};

use super::{NumericsError, DEFAULT_MAX_ITER, DEFAULT_TOL};

/// A smooth scalar objective with gradient, to be maximized.
///
/// Implementations must be reentrant: the optimizer and the
/// finite-difference Hessian call them from immutable references.
pub trait Objective {
    fn value(&self, x: &[f64]) -> f64;
    fn gradient(&self, x: &[f64]) -> Vec<f64>;
}

#[derive(Debug, Clone)]
pub struct MaximizeOptions {
    /// Gradient max-norm at which iteration stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Central-difference step for the observed information.
    pub fd_step: f64,
}

impl Default for MaximizeOptions {
    fn default() -> Self {
        Self { tol: DEFAULT_TOL, max_iter: DEFAULT_MAX_ITER, fd_step: 1e-5 }
    }
}

#[derive(Debug, Clone)]
pub struct Maximum {
    pub argmax: Vec<f64>,
    pub value: f64,
    /// Negative Hessian of the objective at the maximum.
    pub observed_information: DMatrix<f64>,
    pub iterations: usize,
}

/// Maximize `f` from `init` by BFGS with an Armijo backtracking line search.
pub fn maximize(f: &dyn Objective, init: &[f64], opts: &MaximizeOptions) -> Result<Maximum, NumericsError> {
    let p = init.len();
    let mut x = DVector::from_column_slice(init);
    let mut fx = f.value(x.as_slice());
    if !fx.is_finite() {
        return Err(NumericsError::NonFinite { at: init.to_vec() });
    }
    let mut g = DVector::from_vec(f.gradient(x.as_slice()));
    if g.iter().any(|v| !v.is_finite()) {
        return Err(NumericsError::NonFinite { at: init.to_vec() });
    }

    // Inverse-Hessian approximation of the negated objective.
    let mut h_inv = DMatrix::<f64>::identity(p, p);
    let mut iterations = 0;

    while g.amax() >= opts.tol {
        if iterations >= opts.max_iter {
            return Err(NumericsError::NonConvergence {
                iterations,
                grad_norm: g.amax(),
                best: x.iter().copied().collect(),
                best_value: fx,
            });
        }
        iterations += 1;

        let dir = &h_inv * &g; // ascent direction
        let slope = g.dot(&dir);
        let dir = if slope <= 0.0 {
            // Curvature information went bad; fall back to steepest ascent.
            h_inv = DMatrix::identity(p, p);
            g.clone()
        } else {
            dir
        };
        let slope = g.dot(&dir);

        let mut alpha = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand = &x + alpha * &dir;
            let fc = f.value(cand.as_slice());
            if fc.is_finite() && fc >= fx + 1e-4 * alpha * slope {
                accepted = Some((cand, fc));
                break;
            }
            alpha *= 0.5;
        }
        let (x_new, f_new) = match accepted {
            Some(v) => v,
            None => {
                return Err(NumericsError::NonConvergence {
                    iterations,
                    grad_norm: g.amax(),
                    best: x.iter().copied().collect(),
                    best_value: fx,
                })
            }
        };

        let g_new = DVector::from_vec(f.gradient(x_new.as_slice()));
        if g_new.iter().any(|v| !v.is_finite()) {
            return Err(NumericsError::NonFinite { at: x_new.iter().copied().collect() });
        }

        let s = &x_new - &x;
        // BFGS works on the minimization of -f, whose gradient change is
        // -(g_new - g).
        let yv = -(&g_new - &g);
        let sy = s.dot(&yv);
        if sy > 1e-12 * s.norm() * yv.norm() {
            let hy = &h_inv * &yv;
            let yhy = yv.dot(&hy);
            let rho = 1.0 / sy;
            // standard BFGS inverse update
            h_inv = &h_inv + (sy + yhy) * rho * rho * (&s * s.transpose())
                - rho * (&hy * s.transpose() + &s * hy.transpose());
        }

        x = x_new;
        fx = f_new;
        g = g_new;
    }

    let observed_information = observed_information(f, x.as_slice(), opts.fd_step);
    Ok(Maximum { argmax: x.iter().copied().collect(), value: fx, observed_information, iterations })
}

/// Negative Hessian by central differences of the analytic gradient.
pub fn observed_information(f: &dyn Objective, x: &[f64], step: f64) -> DMatrix<f64> {
    let p = x.len();
    let mut h = DMatrix::zeros(p, p);
    let mut xp = x.to_vec();
    for j in 0..p {
        let dj = step * (1.0 + x[j].abs());
        xp[j] = x[j] + dj;
        let gp = f.gradient(&xp);
        xp[j] = x[j] - dj;
        let gm = f.gradient(&xp);
        xp[j] = x[j];
        for i in 0..p {
            h[(i, j)] -= (gp[i] - gm[i]) / (2.0 * dj);
        }
    }
    // symmetrize
    for i in 0..p {
        for j in (i + 1)..p {
            let v = 0.5 * (h[(i, j)] + h[(j, i)]);
            h[(i, j)] = v;
            h[(j, i)] = v;
        }
    }
    h
}
