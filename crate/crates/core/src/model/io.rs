use std::path::Path;

use super::{Deformation, PairwiseParams, PartSpec, PartTreeModel, PartType};
use crate::binio::{Reader, Writer};
use crate::error::{Error, Result};

pub const MODEL_MAGIC: &[u8; 4] = b"PFM1";
pub const MODEL_VERSION: u32 = 1;

const MAX_PARTS: usize = 1024;
const MAX_TYPES: usize = 256;
const MAX_NAME: usize = 256;
const MAX_CELLS: usize = 4096;

/// Serializes a model: header, parts, types, then pairwise blocks, all in
/// topological order and little-endian.
pub fn write_model(m: &PartTreeModel) -> Result<Vec<u8>> {
    m.validate()?;
    let mut w = Writer::default();
    w.bytes(MODEL_MAGIC);
    w.u32(MODEL_VERSION);
    w.len_u32(m.parts.len())?;
    w.len_u32(m.cell_size)?;
    w.len_u32(m.n_orientations)?;
    for p in &m.parts {
        w.len_u32(p.name.len())?;
        w.bytes(p.name.as_bytes());
        w.i32(p.parent.map_or(-1, |v| v as i32));
        w.len_u32(p.n_types)?;
        w.len_u32(p.template_w)?;
        w.len_u32(p.template_h)?;
    }
    for types in &m.types {
        for t in types {
            w.f64s(&t.filter);
            w.f64(t.bias);
            w.f64s(&t.anchor);
        }
    }
    for pw in m.pairwise.iter().flatten() {
        w.f64s(&pw.co_occurrence);
        for d in &pw.deform {
            w.f64s(&[d.w_dx, d.w_dx2, d.w_dy, d.w_dy2]);
        }
    }
    Ok(w.buf)
}

pub fn read_model(bytes: &[u8]) -> Result<PartTreeModel> {
    let mut r = Reader::new(bytes);
    let magic = r.take(4, "magic")?;
    if magic != MODEL_MAGIC {
        return Err(r.error_at(0, format!("bad magic {magic:?}, expected \"PFM1\"")));
    }
    let version = r.u32("version")?;
    if version != MODEL_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            expected: MODEL_VERSION,
        });
    }
    let k = r.count(MAX_PARTS, "part count")?;
    let cell_size = r.count(MAX_CELLS, "cell size")?;
    let n_orientations = r.count(MAX_TYPES, "orientation count")?;
    if k == 0 || cell_size == 0 || n_orientations == 0 {
        return Err(r.error("part count, cell size and orientations must be positive"));
    }

    let mut parts = Vec::with_capacity(k);
    for i in 0..k {
        let at = r.offset();
        let len = r.count(MAX_NAME, "name length")?;
        let name = std::str::from_utf8(r.take(len, "part name")?)
            .map_err(|_| r.error_at(at, "part name is not UTF-8"))?
            .to_string();
        let parent_at = r.offset();
        let parent = r.i32("parent")?;
        let parent = match parent {
            -1 => None,
            p if p >= 0 && (p as usize) < i => Some(p as usize),
            p => return Err(r.error_at(parent_at, format!("part {i} has invalid parent {p}"))),
        };
        let n_types = r.count(MAX_TYPES, "type count")?;
        let template_w = r.count(MAX_CELLS, "template width")?;
        let template_h = r.count(MAX_CELLS, "template height")?;
        parts.push(PartSpec {
            name,
            parent,
            n_types,
            template_w,
            template_h,
        });
    }
    super::validate_tree(&parts).map_err(|e| r.error(e.to_string()))?;

    let mut types = Vec::with_capacity(k);
    for p in &parts {
        let flen = p.template_w * p.template_h * n_orientations;
        let mut ts = Vec::with_capacity(p.n_types);
        for _ in 0..p.n_types {
            let filter = r.f64s(flen, "filter")?;
            let bias = r.f64("bias")?;
            let anchor = r.f64s(2, "anchor")?;
            ts.push(PartType {
                filter,
                bias,
                anchor: [anchor[0], anchor[1]],
            });
        }
        types.push(ts);
    }

    let mut pairwise = Vec::with_capacity(k);
    for p in &parts {
        let Some(parent) = p.parent else {
            pairwise.push(None);
            continue;
        };
        let (nc, np) = (p.n_types, parts[parent].n_types);
        let co_occurrence = r.f64s(nc * np, "co-occurrence")?;
        let mut deform = Vec::with_capacity(nc * np);
        for _ in 0..nc * np {
            let at = r.offset();
            let v = r.f64s(4, "deformation")?;
            let d = Deformation {
                w_dx: v[0],
                w_dx2: v[1],
                w_dy: v[2],
                w_dy2: v[3],
            };
            if !d.is_concave() {
                return Err(r.error_at(at, "deformation is not strictly concave"));
            }
            deform.push(d);
        }
        pairwise.push(Some(PairwiseParams {
            n_child: nc,
            n_parent: np,
            co_occurrence,
            deform,
        }));
    }
    r.finish()?;
    let m = PartTreeModel {
        parts,
        types,
        pairwise,
        cell_size,
        n_orientations,
    };
    m.validate()?;
    Ok(m)
}

pub fn save_model(m: &PartTreeModel, path: &Path) -> Result<()> {
    let bytes = write_model(m)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<PartTreeModel> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    read_model(&bytes)
}
