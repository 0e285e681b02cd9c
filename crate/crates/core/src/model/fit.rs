use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::{Deformation, PairwiseParams};
use crate::error::{Error, Result};

/// Minimum-norm ridge regression with an unpenalized intercept.
///
/// Returns `(w, b)` minimizing `Σ (w·x + b − y)² + λ‖w‖²`. With `λ = 0` the
/// minimum-norm least-squares solution is returned; all-identical samples
/// leave the slope undetermined and are reported as singular.
pub fn ridge_discriminant(samples: &[&[f64]], targets: &[f64], lambda: f64) -> Result<(Vec<f64>, f64)> {
    if samples.is_empty() || samples.len() != targets.len() {
        return Err(Error::shape("ridge needs one target per sample"));
    }
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::config(format!("ridge lambda must be finite and nonnegative, got {lambda}")));
    }
    let d = samples[0].len();
    if samples.iter().any(|s| s.len() != d) {
        return Err(Error::shape("ridge samples have different lengths"));
    }
    let n = samples.len();
    let mut mean = vec![0.0; d];
    for s in samples {
        for (m, v) in mean.iter_mut().zip(s.iter()) {
            *m += v;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n as f64);
    let y_mean = targets.iter().sum::<f64>() / n as f64;

    let xc = DMatrix::from_fn(n, d, |i, j| samples[i][j] - mean[j]);
    let yc = DVector::from_iterator(n, targets.iter().map(|t| t - y_mean));
    if lambda == 0.0 && xc.iter().all(|&v| v == 0.0) {
        return Err(Error::SingularSystem(
            "all samples are identical; use a positive ridge lambda".into(),
        ));
    }

    let w = if n > d {
        let scatter = xc.transpose() * &xc;
        pinv_apply(scatter, lambda, &(xc.transpose() * &yc))
    } else {
        let gram = &xc * xc.transpose();
        let alpha = pinv_apply(gram, lambda, &yc);
        xc.transpose() * alpha
    };
    let bias = y_mean - w.iter().zip(&mean).map(|(a, b)| a * b).sum::<f64>();
    Ok((w.iter().copied().collect(), bias))
}

/// `(A + λI)⁺ v` for symmetric positive semidefinite `A`.
fn pinv_apply(a: DMatrix<f64>, lambda: f64, v: &DVector<f64>) -> DVector<f64> {
    let eig = SymmetricEigen::new(a);
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
    let tol = top * 1e-12 * eig.eigenvalues.len() as f64;
    let proj = eig.eigenvectors.transpose() * v;
    let scaled = DVector::from_iterator(
        proj.len(),
        proj.iter().zip(eig.eigenvalues.iter()).map(|(p, &e)| {
            let e = e.max(0.0) + lambda;
            if e > tol {
                p / e
            } else {
                0.0
            }
        }),
    );
    eig.eigenvectors * scaled
}

/// Linear template for one part type: positives target +1, negatives −1.
pub fn fit_templates(positives: &[Vec<f64>], negatives: &[Vec<f64>], lambda: f64) -> Result<(Vec<f64>, f64)> {
    if positives.is_empty() {
        return Err(Error::config("template fit needs at least one positive"));
    }
    if negatives.len() < 10 {
        return Err(Error::config(format!(
            "template fit needs at least 10 negatives, got {}",
            negatives.len()
        )));
    }
    let samples: Vec<&[f64]> = positives.iter().chain(negatives).map(|v| v.as_slice()).collect();
    let targets: Vec<f64> = positives
        .iter()
        .map(|_| 1.0)
        .chain(negatives.iter().map(|_| -1.0))
        .collect();
    ridge_discriminant(&samples, &targets, lambda)
}

/// One observed child placement relative to its type anchor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairSample {
    pub child_type: usize,
    pub parent_type: usize,
    /// Offset from the parent minus the child type's anchor, in cells.
    pub residual: [f64; 2],
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairwiseFitConfig {
    /// Variance floor in cells²; bounds the spring stiffness.
    pub min_variance: f64,
    /// Variance ceiling; keeps the quadratic weight at or below −10⁻³.
    pub max_variance: f64,
}

impl Default for PairwiseFitConfig {
    fn default() -> Self {
        Self {
            min_variance: 1.0,
            max_variance: 500.0,
        }
    }
}

fn gaussian_deformation(residuals: &[[f64; 2]], cfg: &PairwiseFitConfig) -> Deformation {
    let n = residuals.len() as f64;
    let axis = |k: usize| {
        let mu = residuals.iter().map(|r| r[k]).sum::<f64>() / n;
        let var = residuals.iter().map(|r| (r[k] - mu).powi(2)).sum::<f64>() / n;
        let var = var.clamp(cfg.min_variance, cfg.max_variance);
        (mu / var, -1.0 / (2.0 * var))
    };
    let (w_dx, w_dx2) = axis(0);
    let (w_dy, w_dy2) = axis(1);
    Deformation {
        w_dx,
        w_dx2,
        w_dy,
        w_dy2,
    }
}

/// Generative fit of springs and type co-occurrence for one child part.
///
/// The edge term for a type pair is the Laplace-smoothed log frequency
/// `log((n(t_c,t_p) + 1) / (n(t_c) + n_parent))` plus the Gaussian log-density
/// of the residual up to a constant, `-Σ (r − μ)² / 2σ²`. One shared offset is
/// then folded into the co-occurrence so the edge averages zero over the
/// training samples; it shifts every configuration's tree score equally but
/// keeps edge terms from being uniformly negative under overlap weighting.
/// Type pairs never observed fall back to the spring fitted on all samples.
pub fn fit_pairwise(samples: &[PairSample], n_child: usize, n_parent: usize, cfg: &PairwiseFitConfig) -> Result<PairwiseParams> {
    if samples.is_empty() {
        return Err(Error::config("pairwise fit needs at least one sample"));
    }
    if cfg.min_variance <= 0.0 || cfg.max_variance > 500.0 || cfg.min_variance > cfg.max_variance {
        return Err(Error::config("pairwise variance bounds must satisfy 0 < min ≤ max ≤ 500"));
    }
    if let Some(s) = samples.iter().find(|s| s.child_type >= n_child || s.parent_type >= n_parent) {
        return Err(Error::config(format!(
            "type pair ({}, {}) outside {}x{}",
            s.child_type, s.parent_type, n_child, n_parent
        )));
    }
    let all: Vec<[f64; 2]> = samples.iter().map(|s| s.residual).collect();
    let pooled = gaussian_deformation(&all, cfg);

    let mut co_occurrence = Vec::with_capacity(n_child * n_parent);
    let mut deform = Vec::with_capacity(n_child * n_parent);
    for tc in 0..n_child {
        let n_tc = samples.iter().filter(|s| s.child_type == tc).count();
        for tp in 0..n_parent {
            let pair: Vec<[f64; 2]> = samples
                .iter()
                .filter(|s| s.child_type == tc && s.parent_type == tp)
                .map(|s| s.residual)
                .collect();
            let d = if pair.is_empty() { pooled } else { gaussian_deformation(&pair, cfg) };
            co_occurrence.push(((pair.len() + 1) as f64 / (n_tc + n_parent) as f64).ln() - d.peak());
            deform.push(d);
        }
    }
    let mean_edge = samples
        .iter()
        .map(|s| {
            let k = s.child_type * n_parent + s.parent_type;
            co_occurrence[k] + deform[k].eval(s.residual[0], s.residual[1])
        })
        .sum::<f64>()
        / samples.len() as f64;
    for c in &mut co_occurrence {
        *c -= mean_edge;
    }
    Ok(PairwiseParams {
        n_child,
        n_parent,
        co_occurrence,
        deform,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo(i: usize, j: usize) -> f64 {
        ((i * 31 + j * 17) as f64 * 0.713).sin()
    }

    #[test]
    fn orthogonal_pair_scores_plus_and_minus_one() {
        let pos = vec![vec![1.0, 0.0]];
        let neg = [vec![0.0, 1.0]];
        let samples: Vec<&[f64]> = vec![&pos[0], &neg[0]];
        let (w, b) = ridge_discriminant(&samples, &[1.0, -1.0], 0.0).unwrap();
        let score = |x: &[f64]| w[0] * x[0] + w[1] * x[1] + b;
        assert!((score(&pos[0]) - 1.0).abs() < 1e-12);
        assert!((score(&neg[0]) + 1.0).abs() < 1e-12);
        // hand solution: w = e1 − e2, b = 0
        assert!((w[0] - 1.0).abs() < 1e-12 && (w[1] + 1.0).abs() < 1e-12 && b.abs() < 1e-12);
    }

    #[test]
    fn huge_lambda_shrinks_to_mean_target() {
        let pos: Vec<Vec<f64>> = (0..3).map(|i| (0..5).map(|j| pseudo(i, j)).collect()).collect();
        let neg: Vec<Vec<f64>> = (3..15).map(|i| (0..5).map(|j| pseudo(i, j)).collect()).collect();
        let (w, b) = fit_templates(&pos, &neg, 1e12).unwrap();
        assert!(w.iter().all(|v| v.abs() < 1e-9));
        assert!((b - (3.0 - 12.0) / 15.0).abs() < 1e-9);
    }

    #[test]
    fn permutation_does_not_change_the_filter() {
        let pos: Vec<Vec<f64>> = (0..4).map(|i| (0..6).map(|j| pseudo(i, j)).collect()).collect();
        let neg: Vec<Vec<f64>> = (4..20).map(|i| (0..6).map(|j| pseudo(i, j)).collect()).collect();
        let (w1, b1) = fit_templates(&pos, &neg, 0.5).unwrap();
        let pos_r: Vec<_> = pos.iter().rev().cloned().collect();
        let neg_r: Vec<_> = neg.iter().rev().cloned().collect();
        let (w2, b2) = fit_templates(&pos_r, &neg_r, 0.5).unwrap();
        for (a, c) in w1.iter().zip(&w2) {
            assert!((a - c).abs() < 1e-10);
        }
        assert!((b1 - b2).abs() < 1e-10);
    }

    #[test]
    fn underdetermined_and_overdetermined_paths_agree() {
        // same problem solved through the dual (n ≤ d) and primal (n > d) forms
        let xs: Vec<Vec<f64>> = (0..6).map(|i| (0..6).map(|j| pseudo(i, j)).collect()).collect();
        let ys: Vec<f64> = (0..6).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let refs: Vec<&[f64]> = xs.iter().map(|v| v.as_slice()).collect();
        let (w_dual, b_dual) = ridge_discriminant(&refs, &ys, 0.3).unwrap();
        let mut xs7 = xs.clone();
        xs7.push(xs[0].clone());
        let mut ys7 = ys.clone();
        ys7.push(ys[0]);
        let refs7: Vec<&[f64]> = xs7.iter().map(|v| v.as_slice()).collect();
        let (w7, _) = ridge_discriminant(&refs7, &ys7, 0.3).unwrap();
        assert!(w_dual.iter().all(|v| v.is_finite()) && b_dual.is_finite());
        assert!(w7.iter().all(|v| v.is_finite()));
        // the dual solution satisfies the normal equations
        let d = 6;
        let n = 6;
        let mean: Vec<f64> = (0..d).map(|j| xs.iter().map(|x| x[j]).sum::<f64>() / n as f64).collect();
        let ym = ys.iter().sum::<f64>() / n as f64;
        for k in 0..d {
            let mut lhs = 0.3 * w_dual[k];
            let mut rhs = 0.0;
            for i in 0..n {
                let pred: f64 = (0..d).map(|j| (xs[i][j] - mean[j]) * w_dual[j]).sum();
                lhs += (xs[i][k] - mean[k]) * pred;
                rhs += (xs[i][k] - mean[k]) * (ys[i] - ym);
            }
            assert!((lhs - rhs).abs() < 1e-9);
        }
    }

    #[test]
    fn identical_features_are_singular_without_ridge() {
        let pos = vec![vec![0.5, 0.5]];
        let neg = vec![vec![0.5, 0.5]; 10];
        assert!(matches!(fit_templates(&pos, &neg, 0.0), Err(Error::SingularSystem(_))));
        assert!(fit_templates(&pos, &neg, 1.0).is_ok());
    }

    #[test]
    fn template_fit_requires_enough_samples() {
        let neg = vec![vec![0.0]; 9];
        assert!(matches!(fit_templates(&[vec![1.0]], &neg, 1.0), Err(Error::Config(_))));
        assert!(matches!(fit_templates(&[], &vec![vec![0.0]; 10], 1.0), Err(Error::Config(_))));
    }

    #[test]
    fn unit_variance_gives_half_stiffness() {
        let samples: Vec<PairSample> = [-1.0, 1.0]
            .iter()
            .map(|&r| PairSample {
                child_type: 0,
                parent_type: 0,
                residual: [r, 2.0 * r],
            })
            .collect();
        let pw = fit_pairwise(&samples, 1, 1, &PairwiseFitConfig::default()).unwrap();
        let d = pw.deformation(0, 0);
        assert!((d.w_dx2 + 0.5).abs() < 1e-15 && d.w_dx.abs() < 1e-15);
        assert!((d.w_dy2 + 0.125).abs() < 1e-15);
    }

    #[test]
    fn degenerate_variance_is_clamped() {
        let s = PairSample {
            child_type: 0,
            parent_type: 0,
            residual: [0.0, 0.0],
        };
        let cfg = PairwiseFitConfig::default();
        let pw = fit_pairwise(&[s, s, s], 1, 1, &cfg).unwrap();
        assert_eq!(pw.deformation(0, 0).w_dx2, -1.0 / (2.0 * cfg.min_variance));
        let wide = [-1000.0, 1000.0].map(|r| PairSample { residual: [r, r], ..s });
        let pw = fit_pairwise(&wide, 1, 1, &cfg).unwrap();
        assert!(pw.deformation(0, 0).w_dx2 <= -1e-3);
    }

    #[test]
    fn co_occurrence_is_laplace_smoothed() {
        // child type 0 seen 10 times, 3 of them with parent type 1
        let mut samples = Vec::new();
        for i in 0..10 {
            samples.push(PairSample {
                child_type: 0,
                parent_type: usize::from(i < 3),
                residual: [i as f64, 0.0],
            });
        }
        let pw = fit_pairwise(&samples, 2, 2, &PairwiseFitConfig::default()).unwrap();
        let log_p = |tc, tp| pw.cooc(tc, tp) + pw.deformation(tc, tp).peak();
        assert!((log_p(0, 1) - log_p(0, 0) - (4.0f64 / 8.0).ln()).abs() < 1e-12);
        // child type 1 never seen: smoothing floor and pooled spring
        assert!((log_p(1, 0) - log_p(0, 0) - (6.0f64 / 8.0).ln()).abs() < 1e-12);
        let all: Vec<[f64; 2]> = samples.iter().map(|s| s.residual).collect();
        assert_eq!(*pw.deformation(1, 1), gaussian_deformation(&all, &PairwiseFitConfig::default()));
    }

    #[test]
    fn edge_terms_average_zero_on_training_samples() {
        let samples: Vec<PairSample> = (0..40)
            .map(|i| PairSample {
                child_type: i % 3,
                parent_type: (i / 3) % 2,
                residual: [pseudo(i, 0) * 3.0 + (i % 3) as f64, pseudo(i, 1) * 2.0 - 1.0],
            })
            .collect();
        let pw = fit_pairwise(&samples, 3, 2, &PairwiseFitConfig::default()).unwrap();
        let mean = samples
            .iter()
            .map(|s| pw.cooc(s.child_type, s.parent_type) + pw.deformation(s.child_type, s.parent_type).eval(s.residual[0], s.residual[1]))
            .sum::<f64>()
            / 40.0;
        assert!(mean.abs() < 1e-12);
    }

    #[test]
    fn spring_peaks_at_the_mean_residual() {
        let samples: Vec<PairSample> = [1.0, 3.0, 2.0]
            .iter()
            .map(|&r| PairSample { child_type: 0, parent_type: 0, residual: [r, -r] })
            .collect();
        let pw = fit_pairwise(&samples, 1, 1, &PairwiseFitConfig::default()).unwrap();
        let d = pw.deformation(0, 0);
        assert!((d.eval(2.0, -2.0) - d.peak()).abs() < 1e-12);
        assert!(d.eval(2.5, -2.0) < d.peak());
    }
}
