//! Small BFGS maximizer with an Armijo backtracking line search that treats
//! `None` objective values as infeasible trial points (the step is halved
//! until the iterate is back inside the feasible region).

use ndarray::{Array1, Array2};

/// Options for [`maximize`].
#[derive(Debug, Clone)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Stop when the sup-norm of the gradient falls below this.
    pub grad_tol: f64,
    /// Stop when the accepted step is shorter than this.
    pub step_tol: f64,
    /// Maximum number of step halvings in the line search.
    pub max_halvings: u32,
    /// Armijo sufficient-increase constant.
    pub armijo_c: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 200,
            grad_tol: 1e-8,
            step_tol: 1e-12,
            max_halvings: 30,
            armijo_c: 1e-4,
        }
    }
}

/// Result of a BFGS run.
#[derive(Debug, Clone)]
pub struct BfgsOutcome {
    pub x: Array1<f64>,
    pub value: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Set when the search stopped early (no feasible ascent direction).
    pub warning: Option<String>,
}

/// Maximize `f` starting from the feasible point `x0`.
///
/// `f` and `grad` return `None` outside the feasible region. `x0` itself
/// must be feasible.
pub fn maximize<F, G>(f: F, grad: G, x0: &Array1<f64>, opts: &BfgsOptions) -> BfgsOutcome
where
    F: Fn(&Array1<f64>) -> Option<f64>,
    G: Fn(&Array1<f64>) -> Option<Array1<f64>>,
{
    let d = x0.len();
    let mut x = x0.clone();
    let mut fx = match f(&x) {
        Some(v) => v,
        None => {
            return BfgsOutcome {
                x,
                value: f64::NAN,
                grad_norm: f64::NAN,
                iterations: 0,
                converged: false,
                warning: Some("starting point is infeasible".into()),
            }
        }
    };
    let mut g = match grad(&x) {
        Some(g) => g,
        None => {
            return BfgsOutcome {
                x,
                value: fx,
                grad_norm: f64::NAN,
                iterations: 0,
                converged: false,
                warning: Some("gradient unavailable at the starting point".into()),
            }
        }
    };
    let mut hinv: Array2<f64> = Array2::eye(d);
    let mut warning = None;
    let mut converged = false;
    let mut iter = 0;

    while iter < opts.max_iter {
        let gnorm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gnorm < opts.grad_tol {
            converged = true;
            break;
        }
        let mut dir = hinv.dot(&g);
        let mut slope = dir.dot(&g);
        if slope <= 0.0 {
            // Inverse-Hessian approximation lost positive definiteness.
            hinv = Array2::eye(d);
            dir = g.clone();
            slope = dir.dot(&g);
        }

        // Backtracking: halve on infeasibility or insufficient increase.
        let mut t = 1.0f64;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let xt = &x + &(t * &dir);
            if let Some(ft) = f(&xt) {
                if ft >= fx + opts.armijo_c * t * slope {
                    accepted = Some((xt, ft));
                    break;
                }
            }
            t *= 0.5;
        }
        let (x_new, f_new) = match accepted {
            Some(a) => a,
            None => {
                if dir.iter().zip(g.iter()).any(|(a, b)| a != b) {
                    // Retry once along steepest ascent before giving up.
                    hinv = Array2::eye(d);
                    iter += 1;
                    continue;
                }
                warning = Some("line search found no feasible ascent step".into());
                break;
            }
        };
        let g_new = match grad(&x_new) {
            Some(g) => g,
            None => {
                warning = Some("gradient unavailable at an accepted point".into());
                x = x_new;
                fx = f_new;
                break;
            }
        };

        let s = &x_new - &x;
        let yv = &g - &g_new; // gradient of -f increases by g - g_new
        let sy = s.dot(&yv);
        let step_len = s.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if sy > 1e-12 * s.dot(&s).sqrt() * yv.dot(&yv).sqrt() {
            // Standard inverse BFGS update (formulated for maximization).
            let rho_bfgs = 1.0 / sy;
            let hy = hinv.dot(&yv);
            let yhy = yv.dot(&hy);
            let ss = outer(&s, &s);
            let hys = outer(&hy, &s);
            let shy = outer(&s, &hy);
            hinv = &hinv + &((rho_bfgs * rho_bfgs * yhy + rho_bfgs) * &ss)
                - &(rho_bfgs * (&hys + &shy));
        }
        x = x_new;
        fx = f_new;
        g = g_new;
        iter += 1;
        if step_len < opts.step_tol {
            converged = true;
            break;
        }
    }

    let grad_norm = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !converged && warning.is_none() && iter >= opts.max_iter {
        warning = Some(format!("reached max_iter={} (|grad|={grad_norm:.3e})", opts.max_iter));
    }
    BfgsOutcome {
        x,
        value: fx,
        grad_norm,
        iterations: iter,
        converged,
        warning,
    }
}

fn outer(a: &Array1<f64>, b: &Array1<f64>) -> Array2<f64> {
    let (n, m) = (a.len(), b.len());
    Array2::from_shape_fn((n, m), |(i, j)| a[i] * b[j])
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn concave_quadratic_maximized_exactly() {
        // f(x) = -(x - m)' D (x - m) with distinct curvatures.
        let m = array![1.0, -2.0, 0.5];
        let d = array![1.0, 4.0, 0.25];
        let f = |x: &Array1<f64>| {
            Some(-(0..3).map(|i| d[i] * (x[i] - m[i]).powi(2)).sum::<f64>())
        };
        let g = |x: &Array1<f64>| {
            Some(Array1::from_shape_fn(3, |i| -2.0 * d[i] * (x[i] - m[i])))
        };
        let out = maximize(f, g, &array![0.0, 0.0, 0.0], &BfgsOptions::default());
        assert!(out.converged);
        for i in 0..3 {
            assert!((out.x[i] - m[i]).abs() < 1e-7, "{:?}", out.x);
        }
    }

    #[test]
    fn backtracks_out_of_infeasible_region() {
        // Feasible set is the unit ball; the unconstrained optimum sits inside
        // but the first full Newton-like step from the start would leave it.
        let f = |x: &Array1<f64>| {
            let r2 = x.dot(x);
            if r2 >= 1.0 {
                None
            } else {
                Some(-(x[0] - 0.7).powi(2) - 20.0 * (x[1] + 0.1).powi(2))
            }
        };
        let g = |x: &Array1<f64>| {
            if x.dot(x) >= 1.0 {
                None
            } else {
                Some(array![-2.0 * (x[0] - 0.7), -40.0 * (x[1] + 0.1)])
            }
        };
        let out = maximize(f, g, &array![-0.9, 0.0], &BfgsOptions::default());
        assert!(out.converged, "{out:?}");
        assert!((out.x[0] - 0.7).abs() < 1e-6);
        assert!((out.x[1] + 0.1).abs() < 1e-6);
    }
}
