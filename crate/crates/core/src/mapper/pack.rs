//! First-fit-decreasing packing of rotated clusters onto the module grid.

use log::debug;

use super::plan::{ClusterShape, MappingPlan, Placement, PLAN_SCHEMA_VERSION};
use crate::error::{GoaError, Result};
use crate::photonic::GoaArch;

/// Free/used state of one pass.
#[derive(Debug, Clone)]
pub(crate) struct Occupancy {
    m: usize,
    n: usize,
    used: Vec<bool>,
    free: usize,
}

impl Occupancy {
    pub(crate) fn new(m: usize, n: usize) -> Self {
        Self {
            m,
            n,
            used: vec![false; m * n],
            free: m * n,
        }
    }

    pub(crate) fn is_free(&self, r: usize, c: usize) -> bool {
        !self.used[r * self.n + c]
    }

    pub(crate) fn fill(&mut self, r0: usize, c0: usize, h: usize, w: usize) {
        for r in r0..r0 + h {
            for c in c0..c0 + w {
                debug_assert!(self.is_free(r, c));
                self.used[r * self.n + c] = true;
            }
        }
        self.free -= h * w;
    }

    /// For every origin, how many consecutive rows from it have `w` free cells
    /// starting at that column.
    fn heights(&self, w: usize) -> Vec<usize> {
        let (m, n) = (self.m, self.n);
        let mut run = vec![0usize; n + 1];
        let mut heights = vec![0usize; (m + 1) * n];
        for r in (0..m).rev() {
            run[n] = 0;
            for c in (0..n).rev() {
                run[c] = if self.is_free(r, c) { run[c + 1] + 1 } else { 0 };
            }
            for c in 0..n {
                heights[r * n + c] = if run[c] >= w {
                    heights[(r + 1) * n + c] + 1
                } else {
                    0
                };
            }
        }
        heights.truncate(m * n);
        heights
    }

    /// First origin in row-major order where an `h × w` rectangle is free.
    fn find_whole(&self, h: usize, w: usize) -> Option<(usize, usize)> {
        if self.free < h * w || h > self.m || w > self.n {
            return None;
        }
        let heights = self.heights(w);
        heights
            .iter()
            .position(|&hh| hh >= h)
            .map(|i| (i / self.n, i % self.n))
    }

    /// Origin admitting the tallest full-width strip (capped at `max_h`),
    /// earliest in row-major order among equals.
    fn find_partial(&self, w: usize, max_h: usize) -> Option<(usize, usize, usize)> {
        if self.free < w || w > self.n {
            return None;
        }
        let heights = self.heights(w);
        let mut best: Option<(usize, usize)> = None;
        for (i, &h) in heights.iter().enumerate() {
            let h = h.min(max_h);
            if h > 0 && best.is_none_or(|(_, bh)| h > bh) {
                best = Some((i, h));
                if h == max_h {
                    break;
                }
            }
        }
        best.map(|(i, h)| (i / self.n, i % self.n, h))
    }
}

/// Packs every cluster onto as few passes as the greedy allows.
///
/// Clusters are taken by decreasing area (ties by layer, then id). A cluster
/// that fits whole in an existing pass is placed there at the first free
/// row-major origin. Otherwise it is cut into full-width segments along its
/// block columns, each filling the tallest free strip of the earliest pass
/// that has room, and a new pass is opened only when no pass has any.
pub fn pack(shapes: &[ClusterShape], arch: &GoaArch) -> Result<MappingPlan> {
    arch.validate()?;
    let (m, n) = (arch.m, arch.n);
    for (i, s) in shapes.iter().enumerate() {
        if s.id != i {
            return Err(GoaError::InvalidConfig(format!(
                "cluster ids must equal their index (index {i} has id {})",
                s.id
            )));
        }
        if s.width() > n {
            return Err(GoaError::InfeasibleCluster {
                layer: s.layer,
                width: s.width(),
                columns: n,
            });
        }
    }

    let mut order: Vec<usize> = (0..shapes.len()).collect();
    order.sort_by(|&a, &b| {
        let (sa, sb) = (&shapes[a], &shapes[b]);
        sb.area()
            .cmp(&sa.area())
            .then(sa.layer.cmp(&sb.layer))
            .then(sa.id.cmp(&sb.id))
    });

    let mut grids: Vec<Occupancy> = Vec::new();
    let mut passes: Vec<Vec<Placement>> = Vec::new();
    let mut eo = 0;

    for idx in order {
        let shape = &shapes[idx];
        let w = shape.width();
        let total = shape.height();
        if w == 0 || total == 0 {
            continue;
        }
        let place = |grids: &mut Vec<Occupancy>,
                         passes: &mut Vec<Vec<Placement>>,
                         pass: usize,
                         r: usize,
                         c: usize,
                         h: usize,
                         start: usize,
                         segment: usize| {
            grids[pass].fill(r, c, h, w);
            passes[pass].push(Placement {
                cluster: shape.id,
                layer: shape.layer,
                pass,
                segment,
                origin_row: r,
                origin_col: c,
                height: h,
                width: w,
                block_col_start: start,
                restored: shape.restored.clone(),
            });
        };

        if total <= m {
            let hit = grids
                .iter()
                .enumerate()
                .find_map(|(p, g)| g.find_whole(total, w).map(|(r, c)| (p, r, c)));
            if let Some((p, r, c)) = hit {
                place(&mut grids, &mut passes, p, r, c, total, 0, 0);
                continue;
            }
        }

        let mut start = 0;
        let mut segment = 0;
        while start < total {
            let remaining = total - start;
            let hit = grids
                .iter()
                .enumerate()
                .find_map(|(p, g)| g.find_partial(w, remaining).map(|(r, c, h)| (p, r, c, h)));
            let (p, r, c, h) = match hit {
                Some(h) => h,
                None => {
                    grids.push(Occupancy::new(m, n));
                    passes.push(Vec::new());
                    (grids.len() - 1, 0, 0, remaining.min(m))
                }
            };
            place(&mut grids, &mut passes, p, r, c, h, start, segment);
            start += h;
            segment += 1;
        }
        eo += segment - 1;
        debug!(
            "cluster {} (layer {}) placed in {segment} segment(s)",
            shape.id, shape.layer
        );
    }

    for pass in &mut passes {
        pass.sort_by_key(|p| (p.origin_row, p.origin_col));
    }
    let plan = MappingPlan {
        schema_version: PLAN_SCHEMA_VERSION,
        arch: arch.clone(),
        clusters: shapes.to_vec(),
        mapping_cost: passes.len(),
        passes,
        eo_conversions: eo,
    };
    debug_assert!(plan.validate().is_ok());
    Ok(plan)
}

/// Best [`pack`] result over every sub-grid anchored at the origin, kept
/// when it needs fewer passes (then fewer E/O conversions) than the full grid.
///
/// The greedy alone can need an extra pass when the grid grows; a plan for a
/// sub-grid is also legal on the full grid, so this variant never does.
/// Costs one greedy run per sub-grid.
pub fn pack_monotone(shapes: &[ClusterShape], arch: &GoaArch) -> Result<MappingPlan> {
    let mut best = pack(shapes, arch)?;
    let min_cols = shapes.iter().map(ClusterShape::width).max().unwrap_or(1).max(1);
    for rows in (1..=arch.m).rev() {
        for cols in (min_cols..=arch.n).rev() {
            if (rows, cols) == (arch.m, arch.n) {
                continue;
            }
            let sub = GoaArch::new(rows, cols, arch.k, arch.wavelengths)?;
            let plan = pack(shapes, &sub)?;
            if (plan.mapping_cost, plan.eo_conversions) < (best.mapping_cost, best.eo_conversions) {
                best = MappingPlan {
                    arch: arch.clone(),
                    ..plan
                };
            }
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arch(m: usize, n: usize) -> GoaArch {
        GoaArch::new(m, n, 4, m.max(1)).unwrap()
    }

    fn shape(id: usize, height: usize, width: usize) -> ClusterShape {
        ClusterShape {
            id,
            layer: id,
            rows: width * 4,
            cols: height * 4,
            block_rows: width,
            block_cols: height,
            restored: vec![],
        }
    }

    #[test]
    fn single_unit_cluster() {
        let plan = pack(&[shape(0, 1, 1)], &arch(3, 3)).unwrap();
        assert_eq!(plan.mapping_cost, 1);
        assert_eq!(plan.eo_conversions, 0);
        plan.validate().unwrap();
    }

    #[test]
    fn small_clusters_share_a_pass() {
        let shapes = vec![shape(0, 1, 2), shape(1, 1, 2), shape(2, 2, 2)];
        let plan = pack(&shapes, &arch(2, 2)).unwrap();
        plan.validate().unwrap();
        assert_eq!(plan.mapping_cost, 2);
        assert_eq!(plan.passes[0].len(), 1);
        assert_eq!(plan.passes[0][0].cluster, 2);
        assert_eq!(plan.passes[1].len(), 2);
        assert_eq!(plan.eo_conversions, 0);
    }

    #[test]
    fn tall_cluster_is_segmented() {
        let s = ClusterShape::new(0, 0, 256, 2304, 63);
        let a = GoaArch::new(20, 12, 63, 20).unwrap();
        let plan = pack(&[s], &a).unwrap();
        plan.validate().unwrap();
        let segs = plan.segments_of(0);
        assert!(segs.len() >= 2);
        assert!(segs.iter().all(|p| p.height <= 20 && p.width == 5));
        assert_eq!(plan.eo_conversions, segs.len() - 1);
    }

    #[test]
    fn too_wide_is_infeasible() {
        let err = pack(&[shape(0, 1, 4)], &arch(3, 3)).unwrap_err();
        assert!(matches!(
            err,
            GoaError::InfeasibleCluster {
                width: 4,
                columns: 3,
                ..
            }
        ));
    }

    #[test]
    fn unit_clusters_fill_passes() {
        let shapes: Vec<_> = (0..23).map(|i| shape(i, 1, 1)).collect();
        let plan = pack(&shapes, &arch(3, 4)).unwrap();
        assert_eq!(plan.mapping_cost, 2);
        let plan = pack(&[], &arch(3, 4)).unwrap();
        assert_eq!(plan.mapping_cost, 0);
    }

    #[test]
    fn partial_finder_prefers_tallest_strip() {
        let mut g = Occupancy::new(4, 3);
        g.fill(0, 0, 1, 3);
        g.fill(1, 2, 3, 1);
        assert_eq!(g.find_partial(2, 10), Some((1, 0, 3)));
        assert_eq!(g.find_whole(3, 2), Some((1, 0)));
        assert_eq!(g.find_whole(4, 1), None);
    }
}
