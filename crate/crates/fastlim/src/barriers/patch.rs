//! Min-patching of overlapping profile pieces: U = pointwise min with a
//! recorded index map, continuity verification at switches, the delta-gap
//! check at window boundaries, and V rebuilt from the patched U so the
//! V-side inequality holds with equality up to quadrature error.

use super::{
    accumulate_power_integral, fill_v_from_accum, BarrierParams, BarrierProfile,
    ConstructionKind, PieceForm, Segment,
};
use crate::error::{Error, Result};
use crate::numerics::bisect;
use serde::Serialize;

/// One input piece: a sampled segment whose y-range is its window.
#[derive(Debug, Clone)]
pub struct PatchPiece {
    pub segment: Segment,
}

impl PatchPiece {
    pub fn window(&self) -> (f64, f64) {
        let y = &self.segment.y;
        (y[0], y[y.len() - 1])
    }

    fn covers(&self, y: f64) -> bool {
        let (lo, hi) = self.window();
        y >= lo - 1e-15 * lo.abs().max(1.0) && y <= hi + 1e-15 * hi.abs().max(1.0)
    }

    fn u(&self, y: f64) -> f64 {
        self.segment.hermite_u(y)
    }

    fn du(&self, y: f64) -> f64 {
        self.segment.hermite_du(y)
    }
}

/// Reaction parameters used to rebuild V along the patched profile.
#[derive(Debug, Clone, Copy)]
pub struct PatchReaction {
    pub k: f64,
    pub s: f64,
    pub m3: f64,
    pub m4: f64,
    /// V at the left end of the union
    pub b3: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct PatchReport {
    /// (start, end, 1-based piece index) of each constant-index stretch
    pub index_map: Vec<(f64, f64, usize)>,
    /// switch locations interior to the union
    pub switches: Vec<f64>,
    /// per window-edge: (location, measured gap to the nearest other piece)
    pub gaps: Vec<(f64, f64)>,
    /// the delta actually used (supplied, or half the smallest measured gap)
    pub delta_used: f64,
    pub min_gap: f64,
    /// worst |jump| of U across a switch
    pub max_jump: f64,
}

/// Pointwise-min patching. With `delta = None` the gap requirement defaults
/// to half the smallest measured boundary gap (the discrete analogue of
/// "some delta > 0 exists"); a supplied delta that is violated at a window
/// boundary is a hard error naming the location.
pub fn patch_min(
    pieces: &[PatchPiece],
    delta: Option<f64>,
    reaction: PatchReaction,
) -> Result<(BarrierProfile, PatchReport)> {
    if pieces.is_empty() {
        return Err(Error::Config("patch_min needs at least one piece".into()));
    }
    // union must be an interval: sort windows, check chain coverage
    let mut order: Vec<usize> = (0..pieces.len()).collect();
    order.sort_by(|&a, &b| {
        pieces[a]
            .window()
            .0
            .partial_cmp(&pieces[b].window().0)
            .unwrap()
    });
    let union_lo = pieces[order[0]].window().0;
    let mut cover = pieces[order[0]].window().1;
    for &i in order.iter().skip(1) {
        let (lo, hi) = pieces[i].window();
        if lo > cover + 1e-12 * cover.abs().max(1.0) {
            return Err(Error::Config(format!(
                "piece windows leave a coverage gap near y={cover:e}"
            )));
        }
        cover = cover.max(hi);
    }
    let union_hi = cover;

    let active_at = |y: f64| -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in pieces.iter().enumerate() {
            if p.covers(y) {
                let u = p.u(y);
                match best {
                    Some((_, bu)) if u >= bu => {}
                    _ => best = Some((i, u)),
                }
            }
        }
        best.map(|(i, _)| i)
    };

    // dense scan for index switches
    let n_scan: usize = pieces
        .iter()
        .map(|p| p.segment.len())
        .sum::<usize>()
        .clamp(1024, 2_000_000);
    let mut switch_points: Vec<(f64, usize, usize)> = Vec::new();
    let mut prev_active = active_at(union_lo).expect("union start covered");
    let mut prev_y = union_lo;
    for j in 1..=n_scan {
        let y = union_lo + (union_hi - union_lo) * j as f64 / n_scan as f64;
        let a = active_at(y).expect("union covered");
        if a != prev_active {
            // refine: if both pieces cover the bracket, locate the crossing;
            // otherwise the switch is pinned at the vanishing window's edge
            let pa = &pieces[prev_active];
            let pb = &pieces[a];
            let both = |z: f64| pa.covers(z) && pb.covers(z);
            let loc = if both(prev_y) && both(y) {
                bisect(|z| pa.u(z) - pb.u(z), prev_y, y, 1e-13).unwrap_or(0.5 * (prev_y + y))
            } else {
                // edge of whichever window ends inside the bracket
                let (_, hi_a) = pa.window();
                let (lo_b, _) = pb.window();
                if hi_a > prev_y && hi_a <= y {
                    hi_a
                } else if lo_b >= prev_y && lo_b <= y {
                    lo_b
                } else {
                    0.5 * (prev_y + y)
                }
            };
            switch_points.push((loc, prev_active, a));
            prev_active = a;
        }
        prev_y = y;
    }

    // continuity across switches
    let mut max_jump = 0.0f64;
    for &(loc, ia, ib) in &switch_points {
        let eps = 1e-9 * (union_hi - union_lo);
        let left = pieces[ia].u((loc - eps).max(pieces[ia].window().0));
        let right = pieces[ib].u((loc + eps).min(pieces[ib].window().1));
        let jump = (left - right).abs();
        max_jump = max_jump.max(jump);
        let scale = left.abs().max(right.abs()).max(1e-300);
        let slope_tol = 4.0 * eps * (pieces[ia].du(loc).abs() + pieces[ib].du(loc).abs());
        if jump > 1e-8 * scale + slope_tol {
            return Err(Error::Patch {
                location: loc,
                reason: format!(
                    "U jumps by {jump:e} when switching from piece {} to piece {}",
                    ia + 1,
                    ib + 1
                ),
            });
        }
    }

    // delta-gap at window edges interior to (or shared with) the union
    let mut gaps: Vec<(f64, f64)> = Vec::new();
    for p in pieces {
        let (lo, hi) = p.window();
        for e in [lo, hi] {
            let a = match active_at(e) {
                Some(a) => a,
                None => continue,
            };
            let ua = pieces[a].u(e);
            let mut other = f64::INFINITY;
            for (j, q) in pieces.iter().enumerate() {
                if j != a && q.covers(e) {
                    other = other.min(q.u(e));
                }
            }
            if other.is_finite() {
                gaps.push((e, other - ua));
            }
        }
    }
    gaps.sort_by(|l, r| l.0.partial_cmp(&r.0).unwrap());
    gaps.dedup_by(|l, r| (l.0 - r.0).abs() < 1e-15 * l.0.abs().max(1.0));
    let min_gap = gaps.iter().map(|&(_, g)| g).fold(f64::INFINITY, f64::min);
    let delta_used = delta.unwrap_or_else(|| {
        if min_gap.is_finite() {
            0.5 * min_gap.max(0.0)
        } else {
            0.0
        }
    });
    if let Some(d) = delta {
        for &(e, g) in &gaps {
            if g < d {
                return Err(Error::Patch {
                    location: e,
                    reason: format!("delta-gap violated: gap {g:e} < delta {d:e}"),
                });
            }
        }
    }

    // assemble segments between consecutive breakpoints
    let mut bounds: Vec<f64> = vec![union_lo];
    for &(loc, _, _) in &switch_points {
        bounds.push(loc);
    }
    bounds.push(union_hi);
    bounds.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * a.abs().max(1.0));

    let mut segments = Vec::new();
    let mut index_map = Vec::new();
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let idx = active_at(mid).expect("union covered");
        let piece = &pieces[idx];
        // match the source piece's resolution
        let n = (((b - a) / piece.segment.h()).ceil() as usize + 1).clamp(33, 400_000);
        let ys: Vec<f64> = (0..n)
            .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
            .collect();
        let seg = Segment {
            u: ys.iter().map(|&y| piece.u(y)).collect(),
            du: ys.iter().map(|&y| piece.du(y)).collect(),
            v: vec![0.0; n],
            accum: vec![0.0; n],
            y: ys,
            form: match piece.segment.form {
                PieceForm::Samples => PieceForm::Samples,
                ref f => f.clone(),
            },
        };
        segments.push(seg);
        index_map.push((a, b, idx + 1));
    }
    accumulate_power_integral(&mut segments, reaction.m3, reaction.k / reaction.s);
    fill_v_from_accum(&mut segments, reaction.b3, reaction.m4);

    let mut breakpoints: Vec<(String, f64)> = Vec::new();
    for (i, &(loc, _, to)) in switch_points.iter().enumerate() {
        breakpoints.push((format!("switch_{}_to_piece_{}", i + 1, to + 1), loc));
    }
    let profile = BarrierProfile {
        kind: ConstructionKind::Patched,
        segments,
        breakpoints,
        params: BarrierParams {
            k: reaction.k,
            s: Some(reaction.s),
            b3: Some(reaction.b3),
            m3: Some(reaction.m3),
            m4: Some(reaction.m4),
            ..Default::default()
        },
    };
    let report = PatchReport {
        index_map,
        switches: switch_points.iter().map(|&(l, _, _)| l).collect(),
        gaps,
        delta_used,
        min_gap: if min_gap.is_finite() { min_gap } else { 0.0 },
        max_jump,
    };
    Ok((profile, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn constant_piece(lo: f64, hi: f64, value: f64, n: usize) -> PatchPiece {
        let ys: Vec<f64> = (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect();
        PatchPiece {
            segment: Segment {
                u: vec![value; n],
                du: vec![0.0; n],
                v: vec![0.0; n],
                accum: vec![0.0; n],
                y: ys,
                form: PieceForm::Constant { value },
            },
        }
    }

    fn reaction() -> PatchReaction {
        PatchReaction {
            k: 100.0,
            s: 0.25,
            m3: 1.0,
            m4: 1.0,
            b3: 2.0,
        }
    }

    #[test]
    fn single_piece_returned_unchanged() {
        let p = constant_piece(0.0, 1.0, 3.0, 64);
        let (profile, report) = patch_min(std::slice::from_ref(&p), None, reaction()).unwrap();
        assert_eq!(report.index_map.len(), 1);
        assert_eq!(report.index_map[0].2, 1);
        assert!(report.switches.is_empty());
        assert!((profile.eval_u(0.5) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn two_constants_pick_the_smaller_with_unit_gap() {
        let p1 = constant_piece(0.0, 1.0, 1.0, 64);
        let p2 = constant_piece(0.0, 1.0, 2.0, 64);
        let (profile, report) = patch_min(&[p1, p2], Some(0.9), reaction()).unwrap();
        assert!((profile.eval_u(0.3) - 1.0).abs() < 1e-14);
        assert_eq!(report.index_map[0].2, 1);
        assert!((report.min_gap - 1.0).abs() < 1e-12);
        // delta above the gap must fail
        let p1 = constant_piece(0.0, 1.0, 1.0, 64);
        let p2 = constant_piece(0.0, 1.0, 2.0, 64);
        let err = patch_min(&[p1, p2], Some(1.5), reaction());
        assert!(matches!(err, Err(Error::Patch { .. })));
    }

    #[test]
    fn crossing_pieces_switch_at_the_crossing() {
        // piece 1: u = 1 + y on [0, 1]; piece 2: u = 2 - y on [0, 1];
        // they cross at y = 0.5
        let n = 128;
        let ys: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let mk = |f: &dyn Fn(f64) -> f64, d: f64| PatchPiece {
            segment: Segment {
                u: ys.iter().map(|&y| f(y)).collect(),
                du: vec![d; n],
                v: vec![0.0; n],
                accum: vec![0.0; n],
                y: ys.clone(),
                form: PieceForm::Samples,
            },
        };
        let p1 = mk(&|y| 1.0 + y, 1.0);
        let p2 = mk(&|y| 2.0 - y, -1.0);
        let (profile, report) = patch_min(&[p1, p2], None, reaction()).unwrap();
        assert_eq!(report.switches.len(), 1);
        assert!((report.switches[0] - 0.5).abs() < 1e-10);
        assert!((profile.eval_u(0.2) - 1.2).abs() < 1e-12);
        assert!((profile.eval_u(0.8) - 1.2).abs() < 1e-12);
        assert!(report.max_jump < 1e-10);
    }

    #[test]
    fn discontinuous_window_exhaustion_is_a_patch_error() {
        // piece 1 on [0, 0.5] sits below piece 2 everywhere it exists, and
        // piece 2 on [0, 1] is far above at the handover point
        let p1 = constant_piece(0.0, 0.5, 1.0, 64);
        let p2 = constant_piece(0.0, 1.0, 2.0, 64);
        let err = patch_min(&[p1, p2], None, reaction());
        assert!(matches!(err, Err(Error::Patch { .. })), "{err:?}");
    }

    #[test]
    fn idempotence() {
        let n = 128;
        let ys: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let p1 = PatchPiece {
            segment: Segment {
                u: ys.iter().map(|&y| 1.0 + y).collect(),
                du: vec![1.0; n],
                v: vec![0.0; n],
                accum: vec![0.0; n],
                y: ys.clone(),
                form: PieceForm::Samples,
            },
        };
        let p2 = PatchPiece {
            segment: Segment {
                u: ys.iter().map(|&y| 2.0 - y).collect(),
                du: vec![-1.0; n],
                v: vec![0.0; n],
                accum: vec![0.0; n],
                y: ys,
                form: PieceForm::Samples,
            },
        };
        let (profile, _) = patch_min(&[p1, p2], None, reaction()).unwrap();
        let again: Vec<PatchPiece> = profile
            .segments
            .iter()
            .map(|s| PatchPiece { segment: s.clone() })
            .collect();
        let (profile2, _) = patch_min(&again, None, reaction()).unwrap();
        for &y in &[0.1, 0.49, 0.5, 0.51, 0.9] {
            assert!(
                (profile.eval_u(y) - profile2.eval_u(y)).abs() < 1e-12,
                "y={y}"
            );
        }
    }

    #[test]
    fn rebuilt_v_satisfies_the_v_inequality() {
        use crate::barriers::scan::{residual_scan, ScanCheck};
        let n = 2048;
        let ys: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64 * 0.5).collect();
        let p = PatchPiece {
            segment: Segment {
                u: ys.iter().map(|&y| 0.01 + y * y).collect(),
                du: ys.iter().map(|&y| 2.0 * y).collect(),
                v: vec![0.0; n],
                accum: vec![0.0; n],
                y: ys,
                form: PieceForm::Samples,
            },
        };
        let r = PatchReaction {
            k: 1e4,
            s: 0.25,
            m3: 2.0,
            m4: 2.0,
            b3: 2.0,
        };
        let (profile, _) = patch_min(std::slice::from_ref(&p), None, r).unwrap();
        let rep = residual_scan(
            &profile,
            &[ScanCheck::Mo2 {
                s: r.s,
                k: r.k,
                m3: r.m3,
                m4: r.m4,
            }],
            1e-8,
        )
        .unwrap();
        assert!(rep.all_pass(), "{:?}", rep.inequalities);
    }
}
