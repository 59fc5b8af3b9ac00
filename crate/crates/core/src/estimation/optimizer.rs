//! Box-constrained quasi-Newton minimizer on function values only.
//!
//! BFGS with an active-set projection for the box: coordinates sitting on
//! a bound with the gradient pushing outward are frozen, trial steps are
//! clipped back into the box (so a step that crosses a face lands exactly
//! on it), and the inverse-Hessian approximation is reset whenever the
//! active set changes. Gradients come from central finite differences,
//! falling back to one-sided differences where a probe would leave the
//! box or hit a non-finite objective value.
//!
//! Convergence is declared when the projected gradient's sup norm drops
//! below `grad_tol` or the relative function decrease falls below
//! `rel_tol`. The projected-gradient test also runs before the first
//! step, so a start that already satisfies it is returned untouched,
//! bit for bit; warm-starting from a previous optimum is then an exact
//! fixed point.

#[derive(Debug, Clone)]
pub(crate) struct Bounds {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Bounds {
    pub fn clip(&self, x: &mut [f64]) {
        for i in 0..x.len() {
            x[i] = x[i].clamp(self.lo[i], self.hi[i]);
        }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct OptimOutcome {
    pub x: Vec<f64>,
    pub f: f64,
    pub iterations: usize,
    pub n_evals: usize,
    pub converged: bool,
}

const ARMIJO_C1: f64 = 1e-4;
const MAX_BACKTRACKS: usize = 60;

fn grad_step(x: f64) -> f64 {
    3e-6 * x.abs().max(1e-3)
}

/// Finite-difference gradient honoring the box: central where both probes
/// fit, one-sided otherwise. A coordinate whose probes all come back
/// non-finite gets gradient zero (the optimizer then leaves it alone).
fn gradient(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x: &[f64],
    fx: f64,
    bounds: &Bounds,
    n_evals: &mut usize,
) -> Vec<f64> {
    let n = x.len();
    let mut g = vec![0.0; n];
    let mut probe = x.to_vec();
    for i in 0..n {
        let h = grad_step(x[i]);
        let up_ok = x[i] + h <= bounds.hi[i];
        let down_ok = x[i] - h >= bounds.lo[i];
        let mut eval_at = |v: f64, probe: &mut Vec<f64>, n_evals: &mut usize| -> f64 {
            probe[i] = v;
            let fv = f(probe);
            *n_evals += 1;
            probe[i] = x[i];
            fv
        };
        g[i] = match (up_ok, down_ok) {
            (true, true) => {
                let fu = eval_at(x[i] + h, &mut probe, n_evals);
                let fd = eval_at(x[i] - h, &mut probe, n_evals);
                if fu.is_finite() && fd.is_finite() {
                    (fu - fd) / (2.0 * h)
                } else if fu.is_finite() {
                    (fu - fx) / h
                } else if fd.is_finite() {
                    (fx - fd) / h
                } else {
                    0.0
                }
            }
            (true, false) => {
                let fu = eval_at(x[i] + h, &mut probe, n_evals);
                if fu.is_finite() {
                    (fu - fx) / h
                } else {
                    0.0
                }
            }
            (false, true) => {
                let fd = eval_at(x[i] - h, &mut probe, n_evals);
                if fd.is_finite() {
                    (fx - fd) / h
                } else {
                    0.0
                }
            }
            (false, false) => 0.0,
        };
    }
    g
}

/// Coordinates pinned to a face with the gradient pointing out of the box.
fn active_set(x: &[f64], g: &[f64], bounds: &Bounds) -> Vec<bool> {
    (0..x.len())
        .map(|i| (x[i] == bounds.lo[i] && g[i] > 0.0) || (x[i] == bounds.hi[i] && g[i] < 0.0))
        .collect()
}

fn projected_grad_sup(g: &[f64], active: &[bool]) -> f64 {
    g.iter()
        .zip(active)
        .map(|(gi, &a)| if a { 0.0 } else { gi.abs() })
        .fold(0.0, f64::max)
}

pub(crate) fn minimize_bounded(
    f: &mut dyn FnMut(&[f64]) -> f64,
    x0: &[f64],
    bounds: &Bounds,
    max_iters: usize,
    rel_tol: f64,
    grad_tol: f64,
) -> OptimOutcome {
    let n = x0.len();
    let mut x = x0.to_vec();
    bounds.clip(&mut x);
    let mut n_evals = 0usize;
    let mut fx = f(&x);
    n_evals += 1;
    if !fx.is_finite() {
        return OptimOutcome {
            x,
            f: fx,
            iterations: 0,
            n_evals,
            converged: false,
        };
    }

    let mut g = gradient(f, &x, fx, bounds, &mut n_evals);
    let mut active = active_set(&x, &g, bounds);
    if projected_grad_sup(&g, &active) < grad_tol {
        return OptimOutcome {
            x,
            f: fx,
            iterations: 0,
            n_evals,
            converged: true,
        };
    }

    // Inverse-Hessian approximation, row-major.
    let mut h_inv = identity(n);

    for iter in 1..=max_iters {
        // Search direction on the free coordinates.
        let mut g_free = g.clone();
        for i in 0..n {
            if active[i] {
                g_free[i] = 0.0;
            }
        }
        let mut d = mat_vec_neg(&h_inv, &g_free);
        for i in 0..n {
            if active[i] {
                d[i] = 0.0;
            }
        }
        let mut descent: f64 = d.iter().zip(&g).map(|(di, gi)| di * gi).sum();
        if descent >= 0.0 {
            h_inv = identity(n);
            for i in 0..n {
                d[i] = if active[i] { 0.0 } else { -g[i] };
            }
            descent = d.iter().zip(&g).map(|(di, gi)| di * gi).sum();
            if descent >= 0.0 {
                // No usable direction anywhere: projected stationary point.
                return OptimOutcome {
                    x,
                    f: fx,
                    iterations: iter,
                    n_evals,
                    converged: true,
                };
            }
        }

        // Backtracking line search with clipping; predicted decrease uses
        // the step actually taken, so clipped steps are judged fairly.
        let mut alpha = 1.0f64;
        let mut accepted: Option<(Vec<f64>, f64, f64)> = None;
        for _ in 0..MAX_BACKTRACKS {
            let mut xt: Vec<f64> = (0..n).map(|i| x[i] + alpha * d[i]).collect();
            bounds.clip(&mut xt);
            let pred: f64 = (0..n).map(|i| g[i] * (xt[i] - x[i])).sum();
            if pred >= 0.0 {
                alpha *= 0.5;
                continue;
            }
            let ft = f(&xt);
            n_evals += 1;
            if ft.is_finite() && ft <= fx + ARMIJO_C1 * pred {
                accepted = Some((xt, ft, pred));
                break;
            }
            alpha *= 0.5;
        }

        let Some((x_new, f_new, _)) = accepted else {
            // Line search exhausted without any improving step: treat as
            // a stall at a local solution (zero function decrease).
            return OptimOutcome {
                x,
                f: fx,
                iterations: iter,
                n_evals,
                converged: true,
            };
        };

        let g_new = gradient(f, &x_new, f_new, bounds, &mut n_evals);
        let active_new = active_set(&x_new, &g_new, bounds);

        let decrease = fx - f_new;
        let s: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| g_new[i] - g[i]).collect();

        if active_new != active {
            h_inv = identity(n);
        } else {
            let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
            let s_norm = s.iter().map(|v| v * v).sum::<f64>().sqrt();
            let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if sy > 1e-10 * s_norm * y_norm {
                bfgs_update(&mut h_inv, &s, &y, sy);
            }
        }

        x = x_new;
        fx = f_new;
        g = g_new;
        active = active_new;

        if projected_grad_sup(&g, &active) < grad_tol {
            return OptimOutcome {
                x,
                f: fx,
                iterations: iter,
                n_evals,
                converged: true,
            };
        }
        if decrease <= rel_tol * fx.abs().max(1.0) {
            return OptimOutcome {
                x,
                f: fx,
                iterations: iter,
                n_evals,
                converged: true,
            };
        }
    }

    OptimOutcome {
        x,
        f: fx,
        iterations: max_iters,
        n_evals,
        converged: false,
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

fn mat_vec_neg(m: &[f64], v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..n)
        .map(|i| -(0..n).map(|j| m[i * n + j] * v[j]).sum::<f64>())
        .collect()
}

/// Sherman-Morrison form of the inverse-Hessian BFGS update:
/// H <- (I - rho s y')H(I - rho y s') + rho s s'.
fn bfgs_update(h: &mut Vec<f64>, s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n)
        .map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum::<f64>())
        .collect();
    let yhy: f64 = y.iter().zip(&hy).map(|(a, b)| a * b).sum();
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            out[i * n + j] = h[i * n + j] - rho * (s[i] * hy[j] + hy[i] * s[j])
                + rho * rho * yhy * s[i] * s[j]
                + rho * s[i] * s[j];
        }
    }
    *h = out;
}
