use std::f64::consts::PI;
use std::sync::Arc;

use super::cholesky::Cholesky;
use super::kernel::{factor_from_sq, se_kernel, squared_distances, KernelFactor, SeHyperparams};
use crate::error::{Error, Result};

/// One zero-mean GP on centered inputs and a centered scalar target.
#[derive(Debug, Clone, PartialEq)]
pub struct GpModel {
    /// Centered training inputs, `n×d` row-major.
    pub inputs: Arc<Vec<f64>>,
    pub n: usize,
    pub d: usize,
    pub input_mean: Arc<Vec<f64>>,
    pub target_mean: f64,
    /// `(K + σn²I)⁻¹·y′`.
    pub alpha: Vec<f64>,
    pub chol: Cholesky,
    pub hyper: SeHyperparams,
    pub jitter: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizeOptions {
    pub max_iter: usize,
    pub grad_tol: f64,
    /// Box constraints on the log-hyperparameters `[signal, length, noise]`.
    pub bounds: [[f64; 2]; 3],
}

impl Default for OptimizeOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            grad_tol: 1e-6,
            bounds: [[-30.0, 30.0]; 3],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeTrace {
    /// Objective after every accepted step, starting at the initial point.
    pub values: Vec<f64>,
    pub converged: bool,
}

struct Eval {
    value: f64,
    grad: [f64; 3],
}

fn check_targets(y: &[f64]) -> Result<()> {
    if y.iter().any(|v| !v.is_finite()) {
        return Err(Error::Input("targets contain non-finite values".into()));
    }
    Ok(())
}

/// Value and log-parameter gradient from precomputed squared distances.
fn lml_sq(sq: &[f64], n: usize, y: &[f64], h: &SeHyperparams) -> Result<(Eval, KernelFactor, Vec<f64>)> {
    let f = factor_from_sq(sq, n, h)?;
    let alpha = f.chol.solve(y);
    let fit: f64 = y.iter().zip(&alpha).map(|(a, b)| a * b).sum();
    let value = -0.5 * fit - 0.5 * f.chol.log_det() - 0.5 * n as f64 * (2.0 * PI).ln();

    // ∂/∂θ = ½ tr((ααᵀ − K⁻¹)·∂K/∂θ)
    let inv = f.chol.inverse();
    let l2 = h.length_scale().powi(2);
    let sn2 = h.noise_variance();
    let mut g = [0.0; 3];
    for i in 0..n {
        for j in 0..n {
            let w = alpha[i] * alpha[j] - inv[i * n + j];
            let kf = f.k_signal[i * n + j];
            g[0] += w * kf;
            g[1] += w * kf * sq[i * n + j] / l2;
        }
        g[2] += (alpha[i] * alpha[i] - inv[i * n + i]) * sn2;
    }
    g.iter_mut().for_each(|v| *v *= 0.5);
    Ok((Eval { value, grad: g }, f, alpha))
}

/// Log marginal likelihood of centered targets `y` and its gradient with
/// respect to `(log σf², log ℓ, log σn²)`.
pub fn log_marginal_likelihood(x: &[f64], n: usize, d: usize, y: &[f64], h: &SeHyperparams) -> Result<(f64, [f64; 3])> {
    if x.len() != n * d || y.len() != n || n == 0 {
        return Err(Error::shape("inputs and targets do not agree in size"));
    }
    check_targets(y)?;
    let (e, _, _) = lml_sq(&squared_distances(x, n, d), n, y, h)?;
    Ok((e.value, e.grad))
}

fn clamp(theta: [f64; 3], bounds: &[[f64; 2]; 3]) -> [f64; 3] {
    let mut out = theta;
    for k in 0..3 {
        out[k] = out[k].clamp(bounds[k][0], bounds[k][1]);
    }
    out
}

fn projected(theta: &[f64; 3], g: &[f64; 3], bounds: &[[f64; 2]; 3]) -> [f64; 3] {
    let mut p = *g;
    for k in 0..3 {
        if (theta[k] <= bounds[k][0] && g[k] < 0.0) || (theta[k] >= bounds[k][1] && g[k] > 0.0) {
            p[k] = 0.0;
        }
    }
    p
}

fn optimize_sq(sq: &[f64], n: usize, y: &[f64], init: &SeHyperparams, opts: &OptimizeOptions) -> Result<(SeHyperparams, OptimizeTrace)> {
    let eval = |t: [f64; 3]| lml_sq(sq, n, y, &SeHyperparams::from_logs(t)).map(|r| r.0);
    let mut theta = clamp(init.logs(), &opts.bounds);
    let mut cur = eval(theta).map_err(|e| Error::Numerical(format!("objective undefined at initial hyperparameters: {e}")))?;
    if !cur.value.is_finite() || cur.grad.iter().any(|g| !g.is_finite()) {
        return Err(Error::Numerical("objective is not finite at initial hyperparameters".into()));
    }
    let mut trace = OptimizeTrace {
        values: vec![cur.value],
        converged: false,
    };
    let mut prev: Option<([f64; 3], [f64; 3])> = None;
    for _ in 0..opts.max_iter {
        let pg = projected(&theta, &cur.grad, &opts.bounds);
        let gmax = pg.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if gmax < opts.grad_tol {
            trace.converged = true;
            break;
        }
        // Barzilai–Borwein step for an ascent problem, safeguarded
        let mut t = match prev {
            Some((tp, gp)) => {
                let s: Vec<f64> = (0..3).map(|k| theta[k] - tp[k]).collect();
                let yv: Vec<f64> = (0..3).map(|k| cur.grad[k] - gp[k]).collect();
                let ss: f64 = s.iter().map(|v| v * v).sum();
                let sy: f64 = s.iter().zip(&yv).map(|(a, b)| a * b).sum();
                if sy < 0.0 {
                    (ss / -sy).clamp(1e-12, 1e6)
                } else {
                    1.0 / gmax.max(1.0)
                }
            }
            None => 0.5 / gmax.max(1.0),
        };
        let mut accepted = None;
        for _ in 0..60 {
            let cand = clamp(std::array::from_fn(|k| theta[k] + t * pg[k]), &opts.bounds);
            let step: [f64; 3] = std::array::from_fn(|k| cand[k] - theta[k]);
            if step.iter().all(|&s| s == 0.0) {
                break;
            }
            let gain: f64 = (0..3).map(|k| cur.grad[k] * step[k]).sum();
            if let Ok(next) = eval(cand) {
                if next.value.is_finite() && next.grad.iter().all(|g| g.is_finite()) && next.value >= cur.value + 1e-4 * gain {
                    accepted = Some((cand, next));
                    break;
                }
            }
            t *= 0.5;
        }
        let Some((cand, next)) = accepted else {
            break;
        };
        prev = Some((theta, cur.grad));
        theta = cand;
        cur = next;
        trace.values.push(cur.value);
    }
    Ok((SeHyperparams::from_logs(theta), trace))
}

/// Gradient ascent on the log marginal likelihood in log-parameter space,
/// with Barzilai–Borwein trial steps and Armijo backtracking. Stops when the
/// projected gradient's ∞-norm drops below `grad_tol`, after `max_iter`
/// steps, or when no step improves the objective.
pub fn optimize_hyperparams(
    x: &[f64],
    n: usize,
    d: usize,
    y: &[f64],
    init: &SeHyperparams,
    opts: &OptimizeOptions,
) -> Result<(SeHyperparams, OptimizeTrace)> {
    if x.len() != n * d || y.len() != n || n == 0 {
        return Err(Error::shape("inputs and targets do not agree in size"));
    }
    check_targets(y)?;
    optimize_sq(&squared_distances(x, n, d), n, y, init, opts)
}

fn population_variance(y: &[f64]) -> f64 {
    let n = y.len() as f64;
    let mean = y.iter().sum::<f64>() / n;
    y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

fn median_distance(sq: &[f64], n: usize) -> f64 {
    let mut dists: Vec<f64> = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| sq[i * n + j].sqrt()).collect();
    if dists.is_empty() {
        return 1.0;
    }
    dists.sort_by(f64::total_cmp);
    let m = dists.len();
    let med = if m % 2 == 1 {
        dists[m / 2]
    } else {
        0.5 * (dists[m / 2 - 1] + dists[m / 2])
    };
    if med > 0.0 {
        med
    } else {
        1.0
    }
}

/// `σf² = var(y)`, `ℓ` = median pairwise input distance, `σn² = 0.1·var(y)`.
pub fn initial_hyperparams(x: &[f64], n: usize, d: usize, y: &[f64]) -> Result<SeHyperparams> {
    let var = population_variance(y).max(1e-12);
    SeHyperparams::new(var, median_distance(&squared_distances(x, n, d), n), 0.1 * var)
}

impl GpModel {
    /// Conditions a GP with fixed hyperparameters on raw inputs and targets,
    /// centering them with the given means.
    pub fn condition(
        x: &[f64],
        n: usize,
        d: usize,
        y: &[f64],
        hyper: SeHyperparams,
        input_mean: Arc<Vec<f64>>,
        target_mean: f64,
    ) -> Result<Self> {
        if x.len() != n * d || y.len() != n || n == 0 || input_mean.len() != d {
            return Err(Error::shape("inputs, targets and means do not agree in size"));
        }
        check_targets(y)?;
        let centered: Vec<f64> = x.iter().enumerate().map(|(i, v)| v - input_mean[i % d]).collect();
        let yc: Vec<f64> = y.iter().map(|v| v - target_mean).collect();
        let f = factor_from_sq(&squared_distances(&centered, n, d), n, &hyper)?;
        Ok(Self {
            alpha: f.chol.solve(&yc),
            inputs: Arc::new(centered),
            n,
            d,
            input_mean,
            target_mean,
            chol: f.chol,
            hyper,
            jitter: f.jitter,
        })
    }

    fn kstar(&self, xs: &[f64]) -> Vec<f64> {
        let xc: Vec<f64> = xs.iter().zip(self.input_mean.iter()).map(|(a, m)| a - m).collect();
        (0..self.n)
            .map(|i| se_kernel(&xc, &self.inputs[i * self.d..(i + 1) * self.d], &self.hyper))
            .collect()
    }

    /// Posterior covariance of the latent function between two inputs.
    pub fn posterior_covariance(&self, a: &[f64], b: &[f64]) -> f64 {
        let mut ka = self.kstar(a);
        let mut kb = self.kstar(b);
        self.chol.forward(&mut ka);
        self.chol.forward(&mut kb);
        se_kernel(a, b, &self.hyper) - ka.iter().zip(&kb).map(|(u, v)| u * v).sum::<f64>()
    }
}

/// Predictive mean and variance (noise included) at `xs`.
pub fn gp_predict(m: &GpModel, xs: &[f64]) -> (f64, f64) {
    let mut k = m.kstar(xs);
    let mean = k.iter().zip(&m.alpha).map(|(a, b)| a * b).sum::<f64>() + m.target_mean;
    m.chol.forward(&mut k);
    let prior = m.hyper.signal_variance() + m.hyper.noise_variance();
    let var = prior - k.iter().map(|v| v * v).sum::<f64>();
    (mean, var.max(prior * 1e-15))
}

pub(crate) fn fit_shared(
    inputs: &Arc<Vec<f64>>,
    input_mean: &Arc<Vec<f64>>,
    sq: &[f64],
    n: usize,
    d: usize,
    y: &[f64],
    opts: &OptimizeOptions,
) -> Result<GpModel> {
    check_targets(y)?;
    let target_mean = y.iter().sum::<f64>() / n as f64;
    let yc: Vec<f64> = y.iter().map(|v| v - target_mean).collect();
    let raw_var = population_variance(&yc);
    let var = raw_var.max(1e-12);
    let init = SeHyperparams::new(var, median_distance(sq, n), 0.1 * var)?;
    let hyper = if raw_var > 0.0 {
        let mut o = *opts;
        // keep the noise from collapsing far below the data scale
        o.bounds[2][0] = o.bounds[2][0].max((1e-8 * var).ln());
        optimize_sq(sq, n, &yc, &init, &o)?.0
    } else {
        init
    };
    let f = factor_from_sq(sq, n, &hyper)?;
    if f.jitter > 0.0 {
        log::warn!("GP kernel matrix is near-singular; factorized with jitter {:e}", f.jitter);
    }
    Ok(GpModel {
        alpha: f.chol.solve(&yc),
        inputs: Arc::clone(inputs),
        n,
        d,
        input_mean: Arc::clone(input_mean),
        target_mean,
        chol: f.chol,
        hyper,
        jitter: f.jitter,
    })
}

/// Centers `x` (`n×d`) and `y`, fits hyperparameters and conditions.
pub fn fit_gp(x: &[f64], n: usize, d: usize, y: &[f64], opts: &OptimizeOptions) -> Result<GpModel> {
    if x.len() != n * d || y.len() != n || n == 0 {
        return Err(Error::shape("inputs and targets do not agree in size"));
    }
    let mean: Vec<f64> = (0..d).map(|j| (0..n).map(|i| x[i * d + j]).sum::<f64>() / n as f64).collect();
    let centered: Vec<f64> = x.iter().enumerate().map(|(i, v)| v - mean[i % d]).collect();
    let sq = squared_distances(&centered, n, d);
    fit_shared(&Arc::new(centered), &Arc::new(mean), &sq, n, d, y, opts)
}
