use std::sync::Arc;

use super::gp::{fit_shared, gp_predict, GpModel, OptimizeOptions};
use super::kernel::squared_distances;
use crate::error::{Error, Result};
use crate::infer::par_map;

/// Independent per-output GPs over one shared, centered input matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GpLifter {
    pub models: Vec<GpModel>,
}

impl GpLifter {
    pub fn n_train(&self) -> usize {
        self.models[0].n
    }

    pub fn input_dim(&self) -> usize {
        self.models[0].d
    }

    pub fn output_dim(&self) -> usize {
        self.models.len()
    }

    pub fn output_means(&self) -> Vec<f64> {
        self.models.iter().map(|m| m.target_mean).collect()
    }

    /// Every model must point at the same input rows and mean.
    pub fn validate(&self) -> Result<()> {
        let Some(first) = self.models.first() else {
            return Err(Error::shape("lifter has no output dimensions"));
        };
        for m in &self.models {
            if m.n != first.n || m.d != first.d || *m.inputs != *first.inputs || *m.input_mean != *first.input_mean {
                return Err(Error::Contract("lifter models do not share their inputs".into()));
            }
        }
        Ok(())
    }
}

pub const MIN_TRAINING_POSES: usize = 8;

/// Fits one GP per output column. Rows of `inputs` and `outputs` pair up.
pub fn train_lifter(inputs: &[Vec<f64>], outputs: &[Vec<f64>], opts: &OptimizeOptions) -> Result<GpLifter> {
    let n = inputs.len();
    if n < MIN_TRAINING_POSES {
        return Err(Error::Data(format!("need at least {MIN_TRAINING_POSES} training poses, got {n}")));
    }
    if outputs.len() != n {
        return Err(Error::shape(format!("{n} inputs but {} outputs", outputs.len())));
    }
    let d = inputs[0].len();
    let d_out = outputs[0].len();
    if d == 0 || d_out == 0 || inputs.iter().any(|r| r.len() != d) || outputs.iter().any(|r| r.len() != d_out) {
        return Err(Error::shape("training rows have inconsistent lengths"));
    }
    if inputs.iter().flatten().chain(outputs.iter().flatten()).any(|v| !v.is_finite()) {
        return Err(Error::Input("training poses contain non-finite values".into()));
    }

    // canonical row order, so that the fit does not depend on how rows arrive
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let ka = inputs[a].iter().chain(&outputs[a]);
        let kb = inputs[b].iter().chain(&outputs[b]);
        ka.zip(kb).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal)
    });
    let inputs: Vec<&Vec<f64>> = order.iter().map(|&i| &inputs[i]).collect();
    let outputs: Vec<&Vec<f64>> = order.iter().map(|&i| &outputs[i]).collect();

    let mean: Vec<f64> = (0..d).map(|j| inputs.iter().map(|r| r[j]).sum::<f64>() / n as f64).collect();
    let centered: Vec<f64> = inputs.iter().flat_map(|r| r.iter().zip(&mean).map(|(v, m)| v - m)).collect();
    let sq = squared_distances(&centered, n, d);
    let centered = Arc::new(centered);
    let mean = Arc::new(mean);

    let dims: Vec<usize> = (0..d_out).collect();
    let models = par_map(&dims, |&k| {
        let y: Vec<f64> = outputs.iter().map(|r| r[k]).collect();
        fit_shared(&centered, &mean, &sq, n, d, &y, opts)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    if let Some(m) = models.iter().find(|m| m.jitter > 0.0) {
        log::warn!("lifter inputs are rank-deficient; jitter {:e} was needed", m.jitter);
    }
    Ok(GpLifter { models })
}

/// Predictive means and variances for every output dimension.
pub fn lift(l: &GpLifter, input: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if input.len() != l.input_dim() {
        return Err(Error::shape(format!("expected {} inputs, got {}", l.input_dim(), input.len())));
    }
    Ok(l.models.iter().map(|m| gp_predict(m, input)).unzip())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn data(n: usize, seed: u64) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let xs: Vec<Vec<f64>> = (0..n).map(|_| (0..4).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let ys = xs
            .iter()
            .map(|x| vec![x[0] * 100.0 + x[1] * 20.0, (0.5 * (x[0] + x[1] + x[2] + x[3])).sin() * 50.0, 42.0])
            .collect();
        (xs, ys)
    }

    #[test]
    fn constant_dimension_predicts_the_constant() {
        let (xs, ys) = data(12, 1);
        let l = train_lifter(&xs, &ys, &OptimizeOptions::default()).unwrap();
        l.validate().unwrap();
        for probe in [[0.0; 4], [5.0, -3.0, 1.0, 0.2]] {
            let (m, v) = lift(&l, &probe).unwrap();
            assert!((m[2] - 42.0).abs() < 1e-9);
            assert!(v.iter().all(|&v| v > 0.0));
        }
    }

    #[test]
    fn training_rows_are_interpolated() {
        let (xs, ys) = data(30, 2);
        let l = train_lifter(&xs, &ys, &OptimizeOptions::default()).unwrap();
        for (x, y) in xs.iter().zip(&ys) {
            let (m, _) = lift(&l, x).unwrap();
            for k in 0..3 {
                assert!((m[k] - y[k]).abs() < 1.0, "dim {k}: {} vs {}", m[k], y[k]);
            }
        }
    }

    #[test]
    fn row_order_does_not_matter() {
        let (xs, ys) = data(10, 3);
        let a = train_lifter(&xs, &ys, &OptimizeOptions::default()).unwrap();
        let mut idx: Vec<usize> = (0..10).collect();
        idx.reverse();
        idx.swap(0, 4);
        let xs2: Vec<_> = idx.iter().map(|&i| xs[i].clone()).collect();
        let ys2: Vec<_> = idx.iter().map(|&i| ys[i].clone()).collect();
        let b = train_lifter(&xs2, &ys2, &OptimizeOptions::default()).unwrap();
        let probe = [0.3, -0.2, 0.5, 0.1];
        let (ma, va) = lift(&a, &probe).unwrap();
        let (mb, vb) = lift(&b, &probe).unwrap();
        assert_eq!((ma, va), (mb, vb));
    }

    #[test]
    fn rejects_bad_shapes() {
        let (xs, ys) = data(7, 4);
        assert!(matches!(train_lifter(&xs, &ys, &OptimizeOptions::default()), Err(Error::Data(_))));
        let (xs, ys) = data(9, 4);
        let l = train_lifter(&xs, &ys, &OptimizeOptions::default()).unwrap();
        assert!(matches!(lift(&l, &[0.0; 3]), Err(Error::Shape(_))));
    }

    #[test]
    fn duplicated_rows_engage_jitter_or_noise() {
        let (mut xs, mut ys) = data(9, 5);
        xs.extend(xs.clone());
        ys.extend(ys.clone());
        let l = train_lifter(&xs, &ys, &OptimizeOptions::default()).unwrap();
        let (m, _) = lift(&l, &xs[0]).unwrap();
        assert!(m.iter().all(|v| v.is_finite()));
    }
}
