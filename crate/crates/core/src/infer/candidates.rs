use super::mc::McScorer;
use super::responses::{part_overlaps, ResponseStack};
use super::{Detection, Placement, SENTINEL};
use crate::imaging::BlobMask;
use crate::model::PartTreeModel;

/// Largest joint search (configurations, or DP transitions per level) the
/// global optimizer will enumerate before falling back to coordinate ascent.
pub const MAX_PRODUCT: usize = 1_000_000;

const MAX_SWEEPS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Candidate {
    pub part: usize,
    pub placement: Placement,
    pub unary: f64,
    pub blob_overlap: f64,
}

/// Per-part candidate placements: local maxima of each type's unary map
/// whose box overlaps the blob by at least `thresh2`, the best `top_n` per
/// type, plus the `baseline` placement. The second return value names parts
/// for which only the baseline survived.
pub fn enumerate_candidates(
    rs: &ResponseStack,
    m: &PartTreeModel,
    mask: &BlobMask,
    baseline: &[Placement],
    thresh2: f64,
    top_n: usize,
) -> (Vec<Vec<Candidate>>, Vec<String>) {
    let (w, h) = (rs.width, rs.height);
    let overlaps = part_overlaps(m, mask, w, h);
    let mut all = Vec::with_capacity(m.num_parts());
    let mut empty = Vec::new();
    for i in 0..m.num_parts() {
        let mut list: Vec<Candidate> = Vec::new();
        for (t, map) in rs.maps[i].iter().enumerate() {
            let mut peaks: Vec<(usize, f64)> = Vec::new();
            for y in 0..h {
                for x in 0..w {
                    let v = map.get(x, y);
                    if v <= SENTINEL || overlaps[i].get(x, y) < thresh2 {
                        continue;
                    }
                    let is_peak = (y.saturating_sub(1)..(y + 2).min(h))
                        .all(|ny| (x.saturating_sub(1)..(x + 2).min(w)).all(|nx| map.get(nx, ny) <= v));
                    if is_peak {
                        peaks.push((y * w + x, v));
                    }
                }
            }
            peaks.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
            list.extend(peaks.into_iter().take(top_n).map(|(q, v)| Candidate {
                part: i,
                placement: Placement {
                    cell: (q % w, q / w),
                    type_index: t,
                },
                unary: v,
                blob_overlap: overlaps[i].data()[q],
            }));
        }
        if list.is_empty() {
            empty.push(m.parts[i].name.clone());
        }
        let base = baseline[i];
        if !list.iter().any(|c| c.placement == base) {
            list.push(Candidate {
                part: i,
                placement: base,
                unary: rs.get(i, base.type_index, base.cell),
                blob_overlap: overlaps[i].get(base.cell.0, base.cell.1),
            });
        }
        all.push(list);
    }
    (all, empty)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizeOutcome {
    pub detection: Detection,
    /// Some flagged pair's joint search exceeded [`MAX_PRODUCT`].
    pub fallback: bool,
}

/// Parts searched jointly for one flagged pair.
enum SearchSet {
    /// Two mirrored chains hanging off a common ancestor, paired level by level.
    Ladder { lca: usize, levels: Vec<(usize, usize)> },
    Parts(Vec<usize>),
}

fn subtree(m: &PartTreeModel, root: usize) -> Vec<usize> {
    let mut out = vec![root];
    let mut i = 0;
    while i < out.len() {
        out.extend(m.children(out[i]));
        i += 1;
    }
    out.sort_unstable();
    out
}

fn ancestors(m: &PartTreeModel, mut part: usize) -> Vec<usize> {
    let mut path = vec![part];
    while let Some(p) = m.parts[part].parent {
        path.push(p);
        part = p;
    }
    path
}

fn chain_below(m: &PartTreeModel, top: usize) -> Option<Vec<usize>> {
    let mut chain = vec![top];
    let mut cur = top;
    loop {
        let kids: Vec<usize> = m.children(cur).collect();
        match kids.len() {
            0 => return Some(chain),
            1 => {
                cur = kids[0];
                chain.push(cur);
            }
            _ => return None,
        }
    }
}

/// The flagged siblings together with everything hanging below them, from
/// the children of their lowest common ancestor down.
fn search_set(m: &PartTreeModel, a: usize, b: usize, pairs: &[(usize, usize)]) -> SearchSet {
    let up_a = ancestors(m, a);
    let up_b = ancestors(m, b);
    let Some(&lca) = up_b.iter().find(|x| up_a.contains(x)) else {
        return SearchSet::Parts(subtree(m, 0));
    };
    if lca == a || lca == b {
        return SearchSet::Parts(subtree(m, lca));
    }
    let top_a = up_a[up_a.iter().position(|&x| x == lca).unwrap() - 1];
    let top_b = up_b[up_b.iter().position(|&x| x == lca).unwrap() - 1];
    if let (Some(ca), Some(cb)) = (chain_below(m, top_a), chain_below(m, top_b)) {
        if ca.len() == cb.len() {
            let levels: Vec<(usize, usize)> = ca.into_iter().zip(cb).collect();
            let members: Vec<usize> = levels.iter().flat_map(|&(x, y)| [x, y]).collect();
            // sharing partners must sit on the same rung
            let consistent = pairs.iter().all(|&(p, q)| {
                let (ip, iq) = (members.contains(&p), members.contains(&q));
                if !ip && !iq {
                    return true;
                }
                levels.iter().any(|&(x, y)| (x, y) == (p, q) || (y, x) == (p, q))
            });
            if consistent {
                return SearchSet::Ladder { lca, levels };
            }
        }
    }
    let mut parts = subtree(m, top_a);
    parts.extend(subtree(m, top_b));
    parts.sort_unstable();
    parts.dedup();
    SearchSet::Parts(parts)
}

/// Raw edge term (co-occurrence plus deformation) between a child placement
/// and its parent placement.
fn edge_value(m: &PartTreeModel, child: usize, c: Placement, p: Placement) -> f64 {
    let pw = m.pairwise[child].as_ref().expect("non-root");
    let anchor = m.types[child][c.type_index].anchor;
    let dx = c.cell.0 as f64 - p.cell.0 as f64 - anchor[0];
    let dy = c.cell.1 as f64 - p.cell.1 as f64 - anchor[1];
    pw.cooc(c.type_index, p.type_index) + pw.deformation(c.type_index, p.type_index).eval(dx, dy)
}

/// Exact max over the ladder's joint states by dynamic programming along
/// the rungs; `None` if a rung transition count exceeds [`MAX_PRODUCT`].
fn solve_ladder(scorer: &McScorer, cands: &[Vec<Candidate>], current: &[Placement], lca: usize, levels: &[(usize, usize)]) -> Option<Vec<Placement>> {
    let m = scorer.model;
    let base_f = scorer.factors(current);
    let f_lca = base_f[lca];
    let lca_place = current[lca];
    let shares = |x: usize, y: usize| scorer.pairs.iter().any(|&(p, q)| (p, q) == (x, y) || (q, p) == (x, y));
    let area = |part: usize, p: Placement| m.part_box(part, p.cell.0, p.cell.1).area() as f64;

    // per rung: overlap factors and local score of each joint state
    struct Rung {
        fa: Vec<f64>,
        fb: Vec<f64>,
        local: Vec<f64>,
        nb: usize,
    }
    let mut rungs = Vec::with_capacity(levels.len());
    for &(a, b) in levels {
        let (la, lb) = (&cands[a], &cands[b]);
        let share = shares(a, b);
        let n = la.len() * lb.len();
        let (mut fa, mut fb, mut local) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
        for ca in la {
            let pa = ca.placement;
            let box_a = m.part_box(a, pa.cell.0, pa.cell.1);
            let fg_a = scorer.integral.count_box(&box_a) as f64;
            let bias_a = m.types[a][pa.type_index].bias;
            let app_a = scorer.responses.get(a, pa.type_index, pa.cell) - bias_a;
            for cb in lb {
                let pb = cb.placement;
                let box_b = m.part_box(b, pb.cell.0, pb.cell.1);
                let mut fg_b = scorer.integral.count_box(&box_b) as f64;
                let mut fg_a2 = fg_a;
                if share {
                    if let Some((x0, y0, x1, y1)) = box_a.intersection(&box_b) {
                        let shared = scorer.integral.count(x0, y0, x1, y1) as f64;
                        fg_a2 -= 0.5 * shared;
                        fg_b -= 0.5 * shared;
                    }
                }
                let f_a = fg_a2 / area(a, pa);
                let f_b = fg_b / area(b, pb);
                let bias_b = m.types[b][pb.type_index].bias;
                let app_b = scorer.responses.get(b, pb.type_index, pb.cell) - bias_b;
                fa.push(f_a);
                fb.push(f_b);
                local.push(app_a * f_a + bias_a + app_b * f_b + bias_b);
            }
        }
        rungs.push(Rung { fa, fb, local, nb: lb.len() });
    }

    // first rung attaches to the fixed common ancestor
    let (a0, b0) = levels[0];
    let r0 = &rungs[0];
    let mut best: Vec<f64> = (0..r0.local.len())
        .map(|s| {
            let (i, j) = (s / r0.nb, s % r0.nb);
            let ea = edge_value(m, a0, cands[a0][i].placement, lca_place);
            let eb = edge_value(m, b0, cands[b0][j].placement, lca_place);
            r0.local[s] + ea * r0.fa[s] * f_lca + eb * r0.fb[s] * f_lca
        })
        .collect();
    let mut back: Vec<Vec<u32>> = Vec::with_capacity(levels.len());
    for l in 1..levels.len() {
        let (pa, pb) = levels[l - 1];
        let (a, b) = levels[l];
        let (prev, cur) = (&rungs[l - 1], &rungs[l]);
        if prev.local.len().saturating_mul(cur.local.len()) > MAX_PRODUCT {
            return None;
        }
        let ea: Vec<f64> = cands[pa]
            .iter()
            .flat_map(|p| cands[a].iter().map(move |c| (p.placement, c.placement)))
            .map(|(p, c)| edge_value(m, a, c, p))
            .collect();
        let eb: Vec<f64> = cands[pb]
            .iter()
            .flat_map(|p| cands[b].iter().map(move |c| (p.placement, c.placement)))
            .map(|(p, c)| edge_value(m, b, c, p))
            .collect();
        let (na, nb) = (cands[a].len(), cands[b].len());
        let mut next = vec![f64::NEG_INFINITY; cur.local.len()];
        let mut ptr = vec![0u32; cur.local.len()];
        for s in 0..cur.local.len() {
            let (i, j) = (s / nb, s % nb);
            for (sp, &bp) in best.iter().enumerate() {
                let (ip, jp) = (sp / prev.nb, sp % prev.nb);
                let v = bp + ea[ip * na + i] * prev.fa[sp] * cur.fa[s] + eb[jp * nb + j] * prev.fb[sp] * cur.fb[s];
                if v > next[s] {
                    next[s] = v;
                    ptr[s] = sp as u32;
                }
            }
            next[s] += cur.local[s];
        }
        best = next;
        back.push(ptr);
    }

    let mut s = (0..best.len()).fold(0, |acc, s| if best[s] > best[acc] { s } else { acc });
    let mut out = current.to_vec();
    for l in (0..levels.len()).rev() {
        let (a, b) = levels[l];
        let nb = rungs[l].nb;
        out[a] = cands[a][s / nb].placement;
        out[b] = cands[b][s % nb].placement;
        if l > 0 {
            s = back[l - 1][s] as usize;
        }
    }
    Some(out)
}

/// Exhaustive product search over `parts`, everything else frozen.
fn solve_product(scorer: &McScorer, cands: &[Vec<Candidate>], current: &[Placement], parts: &[usize]) -> Option<Vec<Placement>> {
    let total = parts
        .iter()
        .try_fold(1usize, |acc, &p| acc.checked_mul(cands[p].len()))
        .filter(|&n| n <= MAX_PRODUCT)?;
    let mut trial = current.to_vec();
    let mut best = (f64::NEG_INFINITY, current.to_vec());
    let mut idx = vec![0usize; parts.len()];
    for _ in 0..total {
        for (k, &p) in parts.iter().enumerate() {
            trial[p] = cands[p][idx[k]].placement;
        }
        let s = scorer.score(&trial);
        if s > best.0 {
            best = (s, trial.clone());
        }
        for k in (0..parts.len()).rev() {
            idx[k] += 1;
            if idx[k] < cands[parts[k]].len() {
                break;
            }
            idx[k] = 0;
        }
    }
    Some(best.1)
}

/// Maximizes the multi-cue score starting from `start`.
///
/// Each flagged sibling pair triggers a joint search over both siblings and
/// their descendants (exact, via a rung-by-rung dynamic program when the two
/// sides are mirrored chains); coordinate-ascent sweeps over every part's
/// candidates follow until no single move improves the score. Moves are
/// accepted only on strict improvement, so the result never scores below
/// `start`. With no flagged pairs `start` is returned with its score.
pub fn optimize_global(scorer: &McScorer, candidates: &[Vec<Candidate>], start: &Detection, flagged: &[(usize, usize)]) -> OptimizeOutcome {
    let mut current = start.placements.clone();
    let mut best = scorer.score(&current);
    let mut fallback = false;
    if !flagged.is_empty() {
        for &(a, b) in flagged {
            let proposal = match search_set(scorer.model, a, b, &scorer.pairs) {
                SearchSet::Ladder { lca, levels } => solve_ladder(scorer, candidates, &current, lca, &levels),
                SearchSet::Parts(parts) => solve_product(scorer, candidates, &current, &parts),
            };
            match proposal {
                Some(p) => {
                    let s = scorer.score(&p);
                    if s > best {
                        best = s;
                        current = p;
                    }
                }
                None => fallback = true,
            }
        }
        for _ in 0..MAX_SWEEPS {
            let mut improved = false;
            for part in 0..current.len() {
                let mut trial = current.clone();
                let mut part_best = (best, current[part]);
                for c in &candidates[part] {
                    trial[part] = c.placement;
                    let s = scorer.score(&trial);
                    if s > part_best.0 {
                        part_best = (s, c.placement);
                    }
                }
                if part_best.0 > best {
                    best = part_best.0;
                    current[part] = part_best.1;
                    improved = true;
                }
            }
            if !improved {
                break;
            }
        }
    }
    let mut detection = Detection::new(current, start.root_score);
    detection.s_mc = Some(best);
    detection.flags = start.flags.clone();
    OptimizeOutcome { detection, fallback }
}
