use crate::error::{Error, Result};
use crate::imaging::ImageGrid;
use crate::model::Deformation;

/// Transformed scores and, per query cell, the row-major index of the
/// maximizing source cell.
#[derive(Debug, Clone, PartialEq)]
pub struct DtResult {
    pub values: ImageGrid,
    pub argmax: Vec<usize>,
}

impl DtResult {
    pub fn argmax_xy(&self, x: usize, y: usize) -> (usize, usize) {
        let w = self.values.width();
        let k = self.argmax[y * w + x];
        (k % w, k / w)
    }
}

/// Scratch buffers for the lower-envelope sweep.
struct Envelope {
    v: Vec<usize>,
    z: Vec<f64>,
}

impl Envelope {
    fn new(n: usize) -> Self {
        Self {
            v: vec![0; n],
            z: vec![0.0; n + 1],
        }
    }

    /// `out[q] = max_p src[p] + lin·d + quad·d²` with `d = p − q − shift`;
    /// ties go to the lowest `p`.
    fn run(&mut self, src: &[f64], lin: f64, quad: f64, shift: f64, out: &mut [f64], arg: &mut [usize]) {
        let n = src.len();
        let c = -quad;
        // lin·d − c·d² = −c·(d − lin/2c)² + const, so each source is a
        // downward parabola in the query coordinate z = q + shift + lin/2c.
        let offset = shift + lin / (2.0 * c);
        let eval = |p: usize, q: usize| {
            let d = p as f64 - q as f64 - shift;
            src[p] + (lin * d + quad * d * d)
        };
        let meet = |p: usize, q: usize| {
            let (pf, qf) = (p as f64, q as f64);
            ((src[p] - src[q]) / c + qf * qf - pf * pf) / (2.0 * (qf - pf))
        };

        let first = src.iter().position(|v| *v > f64::NEG_INFINITY);
        let Some(first) = first else {
            out.fill(f64::NEG_INFINITY);
            arg.fill(0);
            return;
        };
        let mut k = 0;
        self.v[0] = first;
        self.z[0] = f64::NEG_INFINITY;
        self.z[1] = f64::INFINITY;
        for q in first + 1..n {
            if src[q] == f64::NEG_INFINITY {
                continue;
            }
            let mut s = meet(self.v[k], q);
            while s <= self.z[k] {
                if k == 0 {
                    break;
                }
                k -= 1;
                s = meet(self.v[k], q);
            }
            if k == 0 && s <= self.z[0] {
                self.v[0] = q;
                self.z[1] = f64::INFINITY;
                continue;
            }
            k += 1;
            self.v[k] = q;
            self.z[k] = s;
            self.z[k + 1] = f64::INFINITY;
        }

        let top = k;
        let mut k = 0;
        for q in 0..n {
            let zq = q as f64 + offset;
            while k < top && self.z[k + 1] < zq {
                k += 1;
            }
            // The envelope pick can be off by a rounding step at segment
            // boundaries; re-score the neighbouring envelope members exactly.
            let lo = k.saturating_sub(2);
            let hi = (k + 2).min(top);
            let mut best_p = self.v[lo];
            let mut best = eval(best_p, q);
            for j in lo + 1..=hi {
                let p = self.v[j];
                let val = eval(p, q);
                if val > best || (val == best && p < best_p) {
                    best = val;
                    best_p = p;
                }
            }
            out[q] = best;
            arg[q] = best_p;
        }
    }
}

fn check(lin: f64, quad: f64) -> Result<()> {
    if !(quad < 0.0) || !quad.is_finite() || !lin.is_finite() {
        return Err(Error::Contract(format!(
            "distance transform needs a finite, strictly negative quadratic weight (got lin {lin}, quad {quad})"
        )));
    }
    Ok(())
}

/// One-dimensional transform; see [`distance_transform`].
pub fn distance_transform_1d(src: &[f64], lin: f64, quad: f64, shift: f64) -> Result<(Vec<f64>, Vec<usize>)> {
    check(lin, quad)?;
    if src.iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(Error::Input("distance transform source contains NaN or +inf".into()));
    }
    let mut out = vec![0.0; src.len()];
    let mut arg = vec![0; src.len()];
    Envelope::new(src.len()).run(src, lin, quad, shift, &mut out, &mut arg);
    Ok((out, arg))
}

/// `out(q) = max_p score(p) + w_dx·dx + w_dx2·dx² + w_dy·dy + w_dy2·dy²` with
/// `(dx, dy) = p − q − anchor`, by two separable lower-envelope passes.
/// Ties resolve to the lowest row-major source index.
pub fn distance_transform(score: &ImageGrid, deform: &Deformation, anchor: [f64; 2]) -> Result<DtResult> {
    check(deform.w_dx, deform.w_dx2)?;
    check(deform.w_dy, deform.w_dy2)?;
    if score.data().iter().any(|v| v.is_nan() || *v == f64::INFINITY) {
        return Err(Error::Input("distance transform source contains NaN or +inf".into()));
    }
    let (w, h) = score.dims();
    let mut row_val = vec![0.0; w * h];
    let mut row_arg = vec![0usize; w * h];
    let mut env = Envelope::new(w.max(h));
    for y in 0..h {
        let src = &score.data()[y * w..(y + 1) * w];
        env.run(
            src,
            deform.w_dx,
            deform.w_dx2,
            anchor[0],
            &mut row_val[y * w..(y + 1) * w],
            &mut row_arg[y * w..(y + 1) * w],
        );
    }
    let mut values = vec![0.0; w * h];
    let mut argmax = vec![0usize; w * h];
    let mut col = vec![0.0; h];
    let mut col_out = vec![0.0; h];
    let mut col_arg = vec![0usize; h];
    for x in 0..w {
        for y in 0..h {
            col[y] = row_val[y * w + x];
        }
        env.run(&col, deform.w_dy, deform.w_dy2, anchor[1], &mut col_out, &mut col_arg);
        for y in 0..h {
            let py = col_arg[y];
            values[y * w + x] = col_out[y];
            argmax[y * w + x] = py * w + row_arg[py * w + x];
        }
    }
    Ok(DtResult {
        values: ImageGrid::new(w, h, values)?,
        argmax,
    })
}
