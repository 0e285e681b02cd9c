use super::cholesky::Cholesky;
use crate::error::{Error, Result};

/// Squared-exponential hyperparameters, held as natural logarithms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeHyperparams {
    pub log_signal_variance: f64,
    pub log_length_scale: f64,
    pub log_noise_variance: f64,
}

impl SeHyperparams {
    pub fn new(signal_variance: f64, length_scale: f64, noise_variance: f64) -> Result<Self> {
        for (name, v) in [
            ("signal variance", signal_variance),
            ("length scale", length_scale),
            ("noise variance", noise_variance),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        Ok(Self {
            log_signal_variance: signal_variance.ln(),
            log_length_scale: length_scale.ln(),
            log_noise_variance: noise_variance.ln(),
        })
    }

    pub fn from_logs(logs: [f64; 3]) -> Self {
        Self {
            log_signal_variance: logs[0],
            log_length_scale: logs[1],
            log_noise_variance: logs[2],
        }
    }

    pub fn logs(&self) -> [f64; 3] {
        [self.log_signal_variance, self.log_length_scale, self.log_noise_variance]
    }

    pub fn signal_variance(&self) -> f64 {
        self.log_signal_variance.exp()
    }

    pub fn length_scale(&self) -> f64 {
        self.log_length_scale.exp()
    }

    pub fn noise_variance(&self) -> f64 {
        self.log_noise_variance.exp()
    }

    fn kernel_from_sq(&self, d2: f64) -> f64 {
        let l = self.length_scale();
        self.signal_variance() * (-d2 / (2.0 * l * l)).exp()
    }
}

/// `σf²·exp(−‖x−x′‖²/(2ℓ²))`.
pub fn se_kernel(x: &[f64], x2: &[f64], h: &SeHyperparams) -> f64 {
    let d2: f64 = x.iter().zip(x2).map(|(a, b)| (a - b) * (a - b)).sum();
    h.kernel_from_sq(d2)
}

/// Pairwise squared distances of the rows of an `n×d` row-major matrix.
pub fn squared_distances(x: &[f64], n: usize, d: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..i {
            let s: f64 = x[i * d..(i + 1) * d]
                .iter()
                .zip(&x[j * d..(j + 1) * d])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            out[i * n + j] = s;
            out[j * n + i] = s;
        }
    }
    out
}

/// Noisy kernel matrix with its factor.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelFactor {
    /// Noise-free kernel `K_f`, row-major.
    pub k_signal: Vec<f64>,
    /// `K_f + (σn² + jitter)·I`.
    pub k_noisy: Vec<f64>,
    pub chol: Cholesky,
    /// Diagonal jitter that made the factorization succeed (0 if none).
    pub jitter: f64,
}

pub(crate) fn factor_from_sq(sq: &[f64], n: usize, h: &SeHyperparams) -> Result<KernelFactor> {
    let k_signal: Vec<f64> = sq.iter().map(|&d2| h.kernel_from_sq(d2)).collect();
    let sf2 = h.signal_variance();
    let sn2 = h.noise_variance();
    let mut last_err = None;
    for jitter in [0.0, 1e-8 * sf2, 1e-7 * sf2, 1e-6 * sf2] {
        let mut k_noisy = k_signal.clone();
        for i in 0..n {
            k_noisy[i * n + i] += sn2 + jitter;
        }
        match Cholesky::new(&k_noisy, n) {
            Ok(chol) => {
                if jitter > 0.0 {
                    log::debug!("kernel matrix needed jitter {jitter:e}");
                }
                return Ok(KernelFactor {
                    k_signal,
                    k_noisy,
                    chol,
                    jitter,
                });
            }
            Err(e) => last_err = Some(e),
        }
    }
    Err(Error::Numerical(format!(
        "kernel matrix not positive definite after maximum jitter: {}",
        last_err.map(|e| e.to_string()).unwrap_or_default()
    )))
}

/// `K + σn²I` over the rows of `x` (`n×d`), factorized with escalating
/// jitter `10⁻⁸·σf²·{1, 10, 100}` if the plain factorization fails.
pub fn kernel_matrix(x: &[f64], n: usize, d: usize, h: &SeHyperparams) -> Result<KernelFactor> {
    if n == 0 || x.len() != n * d {
        return Err(Error::shape(format!("input matrix has {} values, expected {n}x{d}", x.len())));
    }
    factor_from_sq(&squared_distances(x, n, d), n, h)
}
