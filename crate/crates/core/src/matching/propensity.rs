//! Ridge-penalized logistic propensity model fitted by damped Newton steps.

use super::{MatchError, NCOV};

/// Number of coefficients: intercept plus one slope per covariate.
pub const NCOEF: usize = NCOV + 1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// L2 penalty on the slopes (the intercept is unpenalized).
    pub ridge: f64,
    /// Convergence threshold on the largest absolute gradient component.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { ridge: 1e-6, tolerance: 1e-10, max_iterations: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropensityFit {
    /// `[intercept, slope_1, slope_2, slope_3]` on standardized covariates.
    pub coefficients: [f64; NCOEF],
    pub iterations: usize,
    /// Largest absolute component of the penalized gradient at the solution.
    pub gradient_norm: f64,
    /// Penalized log-likelihood after each accepted step, starting at the
    /// initial point.
    pub objective_trace: Vec<f64>,
}

impl PropensityFit {
    pub fn slopes(&self) -> [f64; NCOV] {
        let mut s = [0.0; NCOV];
        s.copy_from_slice(&self.coefficients[1..]);
        s
    }

    pub fn linear_predictor(&self, z: &[f64; NCOV]) -> f64 {
        self.coefficients[0] + z.iter().zip(&self.coefficients[1..]).map(|(x, b)| x * b).sum::<f64>()
    }

    /// Membership probability. Clamped one ulp-scale step inside (0, 1) so
    /// extreme covariates never produce a score of exactly 0 or 1.
    pub fn score(&self, z: &[f64; NCOV]) -> f64 {
        const EPS: f64 = 1e-15;
        sigmoid(self.linear_predictor(z)).clamp(EPS, 1.0 - EPS)
    }
}

fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// log(1 + e^t) without overflow.
fn softplus(t: f64) -> f64 {
    if t > 0.0 {
        t + (-t).exp().ln_1p()
    } else {
        t.exp().ln_1p()
    }
}

struct Problem<'a> {
    focal: &'a [[f64; NCOV]],
    pool: &'a [[f64; NCOV]],
    ridge: f64,
}

impl Problem<'_> {
    fn rows(&self) -> impl Iterator<Item = (&[f64; NCOV], f64)> {
        self.focal.iter().map(|z| (z, 1.0)).chain(self.pool.iter().map(|z| (z, 0.0)))
    }

    fn eta(beta: &[f64; NCOEF], z: &[f64; NCOV]) -> f64 {
        beta[0] + z.iter().zip(&beta[1..]).map(|(x, b)| x * b).sum::<f64>()
    }

    fn objective(&self, beta: &[f64; NCOEF]) -> f64 {
        let mut ll = 0.0;
        for (z, y) in self.rows() {
            let eta = Self::eta(beta, z);
            // y log p + (1-y) log(1-p) with log p = -softplus(-eta)
            ll -= if y > 0.5 { softplus(-eta) } else { softplus(eta) };
        }
        ll - 0.5 * self.ridge * beta[1..].iter().map(|b| b * b).sum::<f64>()
    }

    /// Gradient and negated Hessian of the penalized log-likelihood.
    fn derivatives(&self, beta: &[f64; NCOEF]) -> ([f64; NCOEF], [[f64; NCOEF]; NCOEF]) {
        let mut g = [0.0; NCOEF];
        let mut h = [[0.0; NCOEF]; NCOEF];
        for (z, y) in self.rows() {
            let p = sigmoid(Self::eta(beta, z));
            let w = p * (1.0 - p);
            let x = [1.0, z[0], z[1], z[2]];
            let r = y - p;
            for i in 0..NCOEF {
                g[i] += x[i] * r;
                for j in 0..=i {
                    h[i][j] += w * x[i] * x[j];
                }
            }
        }
        for i in 1..NCOEF {
            g[i] -= self.ridge * beta[i];
            h[i][i] += self.ridge;
        }
        for i in 0..NCOEF {
            for j in 0..i {
                h[j][i] = h[i][j];
            }
        }
        (g, h)
    }
}

/// Fits `P(focal | z) = sigmoid(b0 + b·z)` on standardized covariates.
///
/// The penalized log-likelihood is concave, so Newton steps with step
/// halving increase it monotonically; iteration stops once every gradient
/// component is below `tolerance`.
pub fn fit_propensity(
    focal: &[[f64; NCOV]],
    pool: &[[f64; NCOV]],
    opts: &FitOptions,
) -> Result<PropensityFit, MatchError> {
    if focal.is_empty() {
        return Err(MatchError::EmptyFocal);
    }
    if pool.len() < focal.len() {
        return Err(MatchError::PoolTooSmall { focal: focal.len(), pool: pool.len() });
    }
    let problem = Problem { focal, pool, ridge: opts.ridge };
    let prior = focal.len() as f64 / (focal.len() + pool.len()) as f64;
    let mut beta = [0.0; NCOEF];
    beta[0] = (prior / (1.0 - prior)).ln();
    let mut obj = problem.objective(&beta);
    let mut trace = vec![obj];

    for iteration in 0..=opts.max_iterations {
        let (g, h) = problem.derivatives(&beta);
        let gnorm = g.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if gnorm < opts.tolerance {
            return Ok(PropensityFit { coefficients: beta, iterations: iteration, gradient_norm: gnorm, objective_trace: trace });
        }
        if iteration == opts.max_iterations {
            return Err(MatchError::NonConvergence { iterations: iteration, gradient_norm: gnorm });
        }
        let step = solve(h, g).ok_or(MatchError::NonConvergence { iterations: iteration, gradient_norm: gnorm })?;
        // Expected gain of the full step; below this scale objective changes
        // are rounding noise and the step is taken as is.
        let predicted: f64 = 0.5 * g.iter().zip(&step).map(|(a, b)| a * b).sum::<f64>();
        let noise = 1e-13 * (1.0 + obj.abs());
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let mut cand = beta;
            for i in 0..NCOEF {
                cand[i] += t * step[i];
            }
            let cand_obj = problem.objective(&cand);
            if cand_obj >= obj || predicted < noise {
                accepted = Some((cand, cand_obj));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((b, o)) => {
                beta = b;
                obj = o;
                trace.push(o);
            }
            None => return Err(MatchError::NonConvergence { iterations: iteration, gradient_norm: gnorm }),
        }
    }
    unreachable!("loop returns on its final iteration")
}

/// Solves `a x = b` for a small dense system by Gaussian elimination with
/// partial pivoting.
fn solve(mut a: [[f64; NCOEF]; NCOEF], mut b: [f64; NCOEF]) -> Option<[f64; NCOEF]> {
    for col in 0..NCOEF {
        let pivot = (col..NCOEF).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..NCOEF {
            let f = a[row][col] / a[col][col];
            for k in col..NCOEF {
                a[row][k] -= f * a[col][k];
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = [0.0; NCOEF];
    for row in (0..NCOEF).rev() {
        let s: f64 = (row + 1..NCOEF).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - s) / a[row][row];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn point_masses_give_flat_scores() {
        let focal = vec![[0.0; 3]; 5];
        let pool = vec![[0.0; 3]; 20];
        let fit = fit_propensity(&focal, &pool, &FitOptions::default()).unwrap();
        assert!(fit.slopes().iter().all(|s| s.abs() < 1e-6));
        assert!((fit.score(&[0.0; 3]) - 5.0 / 25.0).abs() < 1e-12);
    }

    #[test]
    fn separable_pair_converges_inside_unit_interval() {
        let fit = fit_propensity(&[[1.0, 1.0, 1.0]], &[[-1.0, -1.0, -1.0]], &FitOptions::default()).unwrap();
        assert!(fit.gradient_norm < 1e-10);
        let hi = fit.score(&[1.0, 1.0, 1.0]);
        let lo = fit.score(&[-1.0, -1.0, -1.0]);
        assert!(hi > 0.5 && hi < 1.0 && lo > 0.0 && lo < 0.5);
    }

    #[test]
    fn solve_small_system() {
        let a = [[4.0, 1.0, 0.0, 0.0], [1.0, 3.0, 0.0, 0.0], [0.0, 0.0, 2.0, 0.0], [0.0, 0.0, 0.0, 1.0]];
        let x = solve(a, [1.0, 2.0, 4.0, 3.0]).unwrap();
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-15 && (x[1] - 7.0 / 11.0).abs() < 1e-15);
        assert_eq!((x[2], x[3]), (2.0, 3.0));
    }

    #[test]
    fn rejects_small_pool() {
        assert_eq!(
            fit_propensity(&[[0.0; 3]; 3], &[[0.0; 3]; 2], &FitOptions::default()),
            Err(MatchError::PoolTooSmall { focal: 3, pool: 2 })
        );
    }
}
