use std::path::Path;
use std::sync::Arc;

use super::cholesky::Cholesky;
use super::gp::GpModel;
use super::kernel::SeHyperparams;
use super::lifter::GpLifter;
use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};

pub const LIFTER_MAGIC: &[u8; 4] = b"GPL1";

const MAX_ROWS: usize = 1 << 16;
const MAX_DIM: usize = 4096;

/// Header `{magic, n, d_in, d_out}`, the input mean and centered input
/// rows, then per output `(log hyperparameters, jitter, target mean, alpha,
/// packed Cholesky factor)`. Little-endian throughout.
pub fn write_lifter(l: &GpLifter) -> Result<Vec<u8>> {
    l.validate()?;
    let first = &l.models[0];
    let mut w = Writer::default();
    w.bytes(LIFTER_MAGIC);
    w.len_u32(first.n)?;
    w.len_u32(first.d)?;
    w.len_u32(l.models.len())?;
    w.f64s(&first.input_mean);
    w.f64s(&first.inputs);
    for m in &l.models {
        w.f64s(&m.hyper.logs());
        w.f64(m.jitter);
        w.f64(m.target_mean);
        w.f64s(&m.alpha);
        w.f64s(&m.chol.packed());
    }
    Ok(w.buf)
}

pub fn read_lifter(bytes: &[u8]) -> Result<GpLifter> {
    let mut r = Reader::new(bytes);
    let magic = r.take(4, "magic")?;
    if magic != LIFTER_MAGIC {
        return Err(r.error_at(0, format!("bad magic {magic:?}, expected \"GPL1\"")));
    }
    let n = r.count(MAX_ROWS, "training rows")?;
    let d = r.count(MAX_DIM, "input dimension")?;
    let d_out = r.count(MAX_DIM, "output dimension")?;
    if n == 0 || d == 0 || d_out == 0 {
        return Err(r.error("sizes must be positive"));
    }
    let input_mean = Arc::new(r.f64s(d, "input mean")?);
    let inputs = Arc::new(r.f64s(n * d, "inputs")?);
    let mut models = Vec::with_capacity(d_out);
    for _ in 0..d_out {
        let logs = r.f64s(3, "hyperparameters")?;
        let jitter = r.f64("jitter")?;
        let target_mean = r.f64("target mean")?;
        let alpha = r.f64s(n, "alpha")?;
        let at = r.offset();
        let packed = r.f64s(n * (n + 1) / 2, "cholesky factor")?;
        let chol = Cholesky::from_packed(n, &packed).map_err(|e| r.error_at(at, e.to_string()))?;
        models.push(GpModel {
            inputs: Arc::clone(&inputs),
            n,
            d,
            input_mean: Arc::clone(&input_mean),
            target_mean,
            alpha,
            chol,
            hyper: SeHyperparams::from_logs([logs[0], logs[1], logs[2]]),
            jitter,
        });
    }
    r.finish()?;
    Ok(GpLifter { models })
}

pub fn save_lifter(l: &GpLifter, path: &Path) -> Result<()> {
    let bytes = write_lifter(l)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_lifter(path: &Path) -> Result<GpLifter> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_lifter(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lift3d::{lift, train_lifter, OptimizeOptions};

    fn lifter() -> GpLifter {
        let xs: Vec<Vec<f64>> = (0..9).map(|i| vec![i as f64, (i * i) as f64 * 0.1]).collect();
        let ys: Vec<Vec<f64>> = xs.iter().map(|x| vec![x[0] * 3.0 - x[1], 7.0]).collect();
        train_lifter(&xs, &ys, &OptimizeOptions::default()).unwrap()
    }

    #[test]
    fn round_trip_is_exact() {
        let l = lifter();
        let bytes = write_lifter(&l).unwrap();
        let back = read_lifter(&bytes).unwrap();
        assert_eq!(back, l);
        assert_eq!(write_lifter(&back).unwrap(), bytes);
        assert_eq!(lift(&back, &[2.5, 0.3]).unwrap(), lift(&l, &[2.5, 0.3]).unwrap());
    }

    #[test]
    fn corrupt_files_are_rejected() {
        let bytes = write_lifter(&lifter()).unwrap();
        for cut in [0, 3, 10, 40, bytes.len() - 1] {
            assert!(matches!(read_lifter(&bytes[..cut]), Err(Error::Format { .. })), "cut {cut}");
        }
        let mut extra = bytes.clone();
        extra.push(0);
        assert!(matches!(read_lifter(&extra), Err(Error::Format { .. })));
        let mut bad = bytes;
        bad[0] = b'X';
        assert!(matches!(read_lifter(&bad), Err(Error::Format { offset: 0, .. })));
    }
}
