//! Box coverings of the supported domains.
//!
//! Euclidean windows get a uniform grid. Spheres get a cube-sphere covering:
//! a uniform grid on each face of ∂[−1,1]ⁿ⁺¹, radially projected onto 𝕊ⁿ.
//! Hemisphere coverings filter the sphere covering by the sign of the last
//! coordinate; projective coverings keep one canonical box per antipodal
//! pair. All box ids are assigned in a fixed lexicographic order
//! (face-major, then grid indices), so coverings are fully deterministic.

use super::{depth_max, EngineError, BOX_BUDGET};

#[derive(Debug, Clone, PartialEq)]
pub enum DomainSpec {
    EuclideanWindow { lower: Vec<f64>, upper: Vec<f64> },
    Sphere { dim: usize },
    Hemisphere { dim: usize, sign: i8, closed: bool },
    Projective { dim: usize },
}

impl DomainSpec {
    pub fn euclidean(bounds: &[(f64, f64)]) -> Self {
        DomainSpec::EuclideanWindow {
            lower: bounds.iter().map(|b| b.0).collect(),
            upper: bounds.iter().map(|b| b.1).collect(),
        }
    }

    /// Number of grid axes per face / window.
    pub fn grid_axes(&self) -> usize {
        match self {
            DomainSpec::EuclideanWindow { lower, .. } => lower.len(),
            DomainSpec::Sphere { dim }
            | DomainSpec::Hemisphere { dim, .. }
            | DomainSpec::Projective { dim } => *dim,
        }
    }

    /// Ambient coordinate dimension of points in this domain.
    pub fn ambient_dim(&self) -> usize {
        match self {
            DomainSpec::EuclideanWindow { lower, .. } => lower.len(),
            DomainSpec::Sphere { dim }
            | DomainSpec::Hemisphere { dim, .. }
            | DomainSpec::Projective { dim } => dim + 1,
        }
    }

    fn is_sphere_kind(&self) -> bool {
        !matches!(self, DomainSpec::EuclideanWindow { .. })
    }
}

/// One covering box: ambient center and axis-aligned half-widths; for
/// cube-sphere boxes also the face id and the cell geometry in face
/// coordinates (used for sampling start points inside the box).
#[derive(Debug, Clone)]
pub struct BoxCell {
    pub center: Vec<f64>,
    pub radius: Vec<f64>,
    pub face: Option<usize>,
    pub face_center: Vec<f64>,
    pub face_half: f64,
}

impl BoxCell {
    /// Max-coordinate distance from a point to this box (0 inside).
    pub fn distance(&self, p: &[f64]) -> f64 {
        self.center
            .iter()
            .zip(&self.radius)
            .zip(p)
            .map(|((c, r), x)| ((x - c).abs() - r).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Same, against the antipodal image of this box.
    pub fn distance_antipodal(&self, p: &[f64]) -> f64 {
        self.center
            .iter()
            .zip(&self.radius)
            .zip(p)
            .map(|((c, r), x)| ((x + c).abs() - r).max(0.0))
            .fold(0.0, f64::max)
    }

    /// Box diameter in the max-coordinate metric.
    pub fn diameter(&self) -> f64 {
        self.radius.iter().fold(0.0f64, |a, &r| a.max(2.0 * r))
    }
}

#[derive(Debug, Clone)]
pub struct BoxCovering {
    pub domain: DomainSpec,
    pub depth: usize,
    pub boxes: Vec<BoxCell>,
    /// Cells per grid axis (2^depth).
    cells: usize,
    /// Sphere kinds: map from raw cube-sphere box id to local id (u32::MAX
    /// when the raw box is not part of this covering).
    from_sphere: Vec<u32>,
    /// Local antipodal involution; usize::MAX when the partner is absent.
    antipodal: Vec<usize>,
    max_radius: f64,
}

pub fn build_covering(domain: DomainSpec, depth: usize) -> Result<BoxCovering, EngineError> {
    let axes = domain.grid_axes();
    if axes == 0 {
        return Err(EngineError::Input("domain has no grid axes".into()));
    }
    let dmax = depth_max(axes);
    if depth > dmax {
        return Err(EngineError::Depth { depth, max: dmax });
    }
    let cells = 1usize << depth;
    match &domain {
        DomainSpec::EuclideanWindow { lower, upper } => {
            if lower.iter().zip(upper).any(|(l, u)| !(l < u)) {
                return Err(EngineError::Input("empty euclidean window".into()));
            }
            let n = lower.len();
            let total = cells.checked_pow(n as u32).ok_or(EngineError::Budget {
                needed: usize::MAX,
                budget: BOX_BUDGET,
            })?;
            if total > BOX_BUDGET {
                return Err(EngineError::Budget {
                    needed: total,
                    budget: BOX_BUDGET,
                });
            }
            let widths: Vec<f64> = lower
                .iter()
                .zip(upper)
                .map(|(l, u)| (u - l) / cells as f64)
                .collect();
            let radius: Vec<f64> = widths.iter().map(|w| w / 2.0).collect();
            let mut boxes = Vec::with_capacity(total);
            let mut idx = vec![0usize; n];
            loop {
                let center: Vec<f64> = (0..n)
                    .map(|k| lower[k] + (idx[k] as f64 + 0.5) * widths[k])
                    .collect();
                boxes.push(BoxCell {
                    center,
                    radius: radius.clone(),
                    face: None,
                    face_center: vec![],
                    face_half: 0.0,
                });
                // lexicographic increment, last axis fastest
                let mut k = n;
                loop {
                    if k == 0 {
                        break;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] < cells {
                        break;
                    }
                    idx[k] = 0;
                }
                if idx.iter().all(|&i| i == 0) {
                    break;
                }
            }
            let max_radius = radius.iter().fold(0.0f64, |a, &r| a.max(r));
            Ok(BoxCovering {
                domain,
                depth,
                boxes,
                cells,
                from_sphere: vec![],
                antipodal: vec![],
                max_radius,
            })
        }
        DomainSpec::Sphere { dim }
        | DomainSpec::Hemisphere { dim, .. }
        | DomainSpec::Projective { dim } => {
            let n = *dim;
            let per_face = cells
                .checked_pow(n as u32)
                .ok_or(EngineError::Budget {
                    needed: usize::MAX,
                    budget: BOX_BUDGET,
                })?;
            let raw_total = per_face
                .checked_mul(2 * (n + 1))
                .ok_or(EngineError::Budget {
                    needed: usize::MAX,
                    budget: BOX_BUDGET,
                })?;
            if raw_total > BOX_BUDGET {
                return Err(EngineError::Budget {
                    needed: raw_total,
                    budget: BOX_BUDGET,
                });
            }
            let w = 2.0 / cells as f64;
            let mut boxes = Vec::new();
            let mut from_sphere = vec![u32::MAX; raw_total];
            // First pass: geometry of every raw sphere box, then filter.
            let mut keep_raw: Vec<usize> = Vec::new();
            for raw in 0..raw_total {
                let (face, idx) = split_raw(raw, n, cells);
                let cell = sphere_cell(face, &idx, n, w);
                if keep_box(&domain, raw, n, cells, &cell) {
                    keep_raw.push(raw);
                    from_sphere[raw] = boxes.len() as u32;
                    boxes.push(cell);
                }
            }
            // Projective coverings alias both pair members to the canonical id.
            if matches!(domain, DomainSpec::Projective { .. }) {
                for raw in 0..raw_total {
                    let p = pair_raw(raw, n, cells);
                    if from_sphere[raw] == u32::MAX {
                        from_sphere[raw] = from_sphere[p];
                    }
                }
            }
            let antipodal: Vec<usize> = keep_raw
                .iter()
                .map(|&raw| {
                    let p = pair_raw(raw, n, cells);
                    let loc = from_sphere[p];
                    if loc == u32::MAX {
                        usize::MAX
                    } else {
                        loc as usize
                    }
                })
                .collect();
            let max_radius = boxes
                .iter()
                .flat_map(|b| b.radius.iter())
                .fold(0.0f64, |a, &r| a.max(r));
            Ok(BoxCovering {
                domain,
                depth,
                boxes,
                cells,
                from_sphere,
                antipodal,
                max_radius,
            })
        }
    }
}

/// raw id → (face, in-face grid indices); face-major, last index fastest.
fn split_raw(raw: usize, n: usize, cells: usize) -> (usize, Vec<usize>) {
    let per_face = cells.pow(n as u32);
    let face = raw / per_face;
    let mut rest = raw % per_face;
    let mut idx = vec![0usize; n];
    for k in (0..n).rev() {
        idx[k] = rest % cells;
        rest /= cells;
    }
    (face, idx)
}

fn join_raw(face: usize, idx: &[usize], cells: usize) -> usize {
    let mut lin = 0usize;
    for &i in idx {
        lin = lin * cells + i;
    }
    face * cells.pow(idx.len() as u32) + lin
}

/// Antipodal raw box: opposite face, grid indices reversed per axis.
fn pair_raw(raw: usize, n: usize, cells: usize) -> usize {
    let (face, idx) = split_raw(raw, n, cells);
    let pface = face ^ 1;
    let pidx: Vec<usize> = idx.iter().map(|&i| cells - 1 - i).collect();
    join_raw(pface, &pidx, cells)
}

/// Face f = 2j + s covers the cube facet {c_j = σ}, σ = +1 for s = 0.
fn face_axis_sign(face: usize) -> (usize, f64) {
    (face / 2, if face % 2 == 0 { 1.0 } else { -1.0 })
}

/// Map in-face coordinates t (one per non-j axis, ascending) to the cube
/// facet and project radially to the sphere.
pub fn face_point(face: usize, t: &[f64]) -> Vec<f64> {
    let (j, sigma) = face_axis_sign(face);
    let mut c = Vec::with_capacity(t.len() + 1);
    let mut ti = t.iter();
    for a in 0..=t.len() {
        if a == j {
            c.push(sigma);
        } else {
            c.push(*ti.next().expect("face coordinate"));
        }
    }
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    c.iter().map(|v| v / norm).collect()
}

fn sphere_cell(face: usize, idx: &[usize], n: usize, w: f64) -> BoxCell {
    let t_center: Vec<f64> = idx.iter().map(|&i| -1.0 + (i as f64 + 0.5) * w).collect();
    let center = face_point(face, &t_center);
    // Ambient AABB from the projected cell corners (plus the center).
    let mut lo = center.clone();
    let mut hi = center.clone();
    for mask in 0..(1usize << n) {
        let corner: Vec<f64> = t_center
            .iter()
            .enumerate()
            .map(|(k, &c)| c + if mask >> k & 1 == 0 { -w / 2.0 } else { w / 2.0 })
            .collect();
        let p = face_point(face, &corner);
        for (a, &v) in p.iter().enumerate() {
            lo[a] = lo[a].min(v);
            hi[a] = hi[a].max(v);
        }
    }
    let amb_center: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| (l + h) / 2.0).collect();
    let radius: Vec<f64> = lo.iter().zip(&hi).map(|(l, h)| (h - l) / 2.0).collect();
    BoxCell {
        center: amb_center,
        radius,
        face: Some(face),
        face_center: t_center,
        face_half: w / 2.0,
    }
}

fn keep_box(domain: &DomainSpec, raw: usize, n: usize, cells: usize, cell: &BoxCell) -> bool {
    match domain {
        DomainSpec::Sphere { .. } => true,
        DomainSpec::Projective { .. } => raw <= pair_raw(raw, n, cells),
        DomainSpec::Hemisphere { sign, closed, .. } => {
            let h = cell.center[n] * *sign as f64;
            if *closed {
                h >= 0.0
            } else {
                // open: drop boxes whose span touches the equator
                h > 0.0 && h - cell.radius[n] > 1e-12
            }
        }
        DomainSpec::EuclideanWindow { .. } => unreachable!(),
    }
}

impl BoxCovering {
    pub fn n_boxes(&self) -> usize {
        self.boxes.len()
    }

    pub fn ambient_dim(&self) -> usize {
        self.domain.ambient_dim()
    }

    pub fn max_diameter(&self) -> f64 {
        2.0 * self.max_radius
    }

    /// Local antipodal partner, if it belongs to the covering.
    pub fn antipodal_pair(&self, id: usize) -> Option<usize> {
        self.antipodal
            .get(id)
            .copied()
            .filter(|&p| p != usize::MAX)
    }

    /// Box containing a point, or None when the point leaves a euclidean
    /// window (sphere-kind domains always locate, up to hemisphere filtering).
    pub fn locate(&self, p: &[f64]) -> Option<usize> {
        match &self.domain {
            DomainSpec::EuclideanWindow { lower, upper } => {
                let n = lower.len();
                let mut lin = 0usize;
                for k in 0..n {
                    if p[k] < lower[k] || p[k] > upper[k] {
                        return None;
                    }
                    let w = (upper[k] - lower[k]) / self.cells as f64;
                    let i = (((p[k] - lower[k]) / w) as usize).min(self.cells - 1);
                    lin = lin * self.cells + i;
                }
                Some(lin)
            }
            _ => {
                let raw = self.locate_raw(p)?;
                let loc = self.from_sphere[raw];
                if loc == u32::MAX {
                    None
                } else {
                    Some(loc as usize)
                }
            }
        }
    }

    /// Raw cube-sphere box id of a point on (or near) the sphere.
    fn locate_raw(&self, p: &[f64]) -> Option<usize> {
        let n = self.domain.grid_axes();
        // dominant axis, ties to the smallest index
        let mut j = 0usize;
        for a in 1..p.len() {
            if p[a].abs() > p[j].abs() {
                j = a;
            }
        }
        if p[j] == 0.0 {
            return None;
        }
        let face = 2 * j + if p[j] > 0.0 { 0 } else { 1 };
        let w = 2.0 / self.cells as f64;
        let mut idx = Vec::with_capacity(n);
        for a in 0..p.len() {
            if a == j {
                continue;
            }
            let t = p[a] / p[j].abs();
            let i = (((t + 1.0) / w).floor().max(0.0) as usize).min(self.cells - 1);
            idx.push(i);
        }
        Some(join_raw(face, &idx, self.cells))
    }

    /// All boxes strictly closer than `r` to `p` in the max metric (for
    /// projective coverings: to `p` or its antipode). Sorted, deduplicated.
    pub fn query_ball(&self, p: &[f64], r: f64) -> Vec<usize> {
        let mut out = match &self.domain {
            DomainSpec::EuclideanWindow { lower, upper } => {
                let n = lower.len();
                let mut ranges = Vec::with_capacity(n);
                for k in 0..n {
                    let w = (upper[k] - lower[k]) / self.cells as f64;
                    let lo = (((p[k] - r - lower[k]) / w).floor().max(0.0)) as usize;
                    let hi_f = ((p[k] + r - lower[k]) / w).floor();
                    if hi_f < 0.0 || p[k] - r > upper[k] {
                        return vec![];
                    }
                    let hi = (hi_f as usize).min(self.cells - 1);
                    if lo > hi {
                        return vec![];
                    }
                    ranges.push((lo, hi));
                }
                let mut out = Vec::new();
                let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
                'outer: loop {
                    let mut lin = 0usize;
                    for k in 0..n {
                        lin = lin * self.cells + idx[k];
                    }
                    if self.boxes[lin].distance(p) < r {
                        out.push(lin);
                    }
                    let mut k = n;
                    loop {
                        if k == 0 {
                            break 'outer;
                        }
                        k -= 1;
                        idx[k] += 1;
                        if idx[k] <= ranges[k].1 {
                            break;
                        }
                        idx[k] = ranges[k].0;
                    }
                }
                out
            }
            DomainSpec::Projective { .. } => {
                let neg: Vec<f64> = p.iter().map(|v| -v).collect();
                let mut out = self.query_ball_sphere(p, r);
                out.extend(self.query_ball_sphere(&neg, r));
                out
            }
            _ => self.query_ball_sphere(p, r),
        };
        out.sort_unstable();
        out.dedup();
        out
    }

    fn query_ball_sphere(&self, p: &[f64], r: f64) -> Vec<usize> {
        let n = self.domain.grid_axes();
        let amb = n + 1;
        let w = 2.0 / self.cells as f64;
        // Every point of a face-j box satisfies |s_j| ≥ 1/√(n+1); pad by the
        // largest box radius to absorb AABB inflation.
        let pad = self.max_radius + 1e-12;
        let dom_min = 1.0 / (amb as f64).sqrt() - pad;
        let mut out = Vec::new();
        for face in 0..2 * amb {
            let (j, sigma) = face_axis_sign(face);
            let sj_lo = (sigma * p[j] - r - pad).max(dom_min);
            let sj_hi = (sigma * p[j] + r + pad).min(1.0 + pad);
            if sj_lo > sj_hi || sj_lo <= 0.0 {
                if sj_lo <= 0.0 && sj_hi >= dom_min {
                    // interval clipped from below; use dom_min
                } else {
                    continue;
                }
            }
            let lo_abs = sj_lo.max(dom_min).max(1e-9);
            let hi_abs = sj_hi.max(lo_abs);
            // in-face coordinate ranges c_a = s_a / |s_j|
            let mut ranges = Vec::with_capacity(n);
            let mut empty = false;
            for a in 0..amb {
                if a == j {
                    continue;
                }
                let s_lo = p[a] - r - pad;
                let s_hi = p[a] + r + pad;
                let c_lo = if s_lo >= 0.0 { s_lo / hi_abs } else { s_lo / lo_abs };
                let c_hi = if s_hi >= 0.0 { s_hi / lo_abs } else { s_hi / hi_abs };
                if c_hi < -1.0 || c_lo > 1.0 {
                    empty = true;
                    break;
                }
                let i_lo = (((c_lo + 1.0) / w).floor().max(0.0)) as usize;
                let i_hi = ((((c_hi + 1.0) / w).floor()).max(0.0) as usize).min(self.cells - 1);
                if i_lo > i_hi {
                    empty = true;
                    break;
                }
                ranges.push((i_lo, i_hi));
            }
            if empty {
                continue;
            }
            let mut idx: Vec<usize> = ranges.iter().map(|r| r.0).collect();
            'cells: loop {
                let raw = join_raw(face, &idx, self.cells);
                let loc = self.from_sphere[raw];
                if loc != u32::MAX {
                    let b = &self.boxes[loc as usize];
                    let d = if matches!(self.domain, DomainSpec::Projective { .. }) {
                        b.distance(p).min(b.distance_antipodal(p))
                    } else {
                        b.distance(p)
                    };
                    if d < r {
                        out.push(loc as usize);
                    }
                }
                let mut k = n;
                loop {
                    if k == 0 {
                        break 'cells;
                    }
                    k -= 1;
                    idx[k] += 1;
                    if idx[k] <= ranges[k].1 {
                        break;
                    }
                    idx[k] = ranges[k].0;
                }
            }
        }
        out
    }

    /// Integration start points for a box: the box center plus scaled
    /// offsets (each offset coordinate in (−1,1), scaled by the box
    /// half-width; cube-sphere boxes sample in face coordinates and project).
    pub fn sample_points(&self, id: usize, offsets: &[Vec<f64>]) -> Vec<Vec<f64>> {
        let b = &self.boxes[id];
        match &self.domain {
            DomainSpec::EuclideanWindow { .. } => offsets
                .iter()
                .map(|o| {
                    b.center
                        .iter()
                        .zip(&b.radius)
                        .zip(o)
                        .map(|((c, r), q)| c + r * q)
                        .collect()
                })
                .collect(),
            _ => {
                let face = b.face.expect("sphere box has a face");
                offsets
                    .iter()
                    .map(|o| {
                        let t: Vec<f64> = b
                            .face_center
                            .iter()
                            .zip(o)
                            .map(|(c, q)| c + b.face_half * q)
                            .collect();
                        face_point(face, &t)
                    })
                    .collect()
            }
        }
    }

    /// True when the box span reaches the equator {s_{n+1} = 0}.
    pub fn touches_equator(&self, id: usize) -> bool {
        if !self.domain.is_sphere_kind() {
            return false;
        }
        let b = &self.boxes[id];
        let last = self.ambient_dim() - 1;
        b.center[last].abs() <= b.radius[last] + 1e-12
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn euclidean_depth3_unit_square() {
        let c = build_covering(DomainSpec::euclidean(&[(0.0, 1.0), (0.0, 1.0)]), 3).unwrap();
        assert_eq!(c.n_boxes(), 64);
        assert!(c.boxes.iter().all(|b| (b.radius[0] - 1.0 / 16.0).abs() < 1e-15));
        // locate matches geometry
        let id = c.locate(&[0.03, 0.97]).unwrap();
        assert!(c.boxes[id].distance(&[0.03, 0.97]) == 0.0);
        assert!(c.locate(&[1.5, 0.5]).is_none());
    }

    #[test]
    fn circle_depth0_has_four_boxes() {
        let c = build_covering(DomainSpec::Sphere { dim: 1 }, 0).unwrap();
        assert_eq!(c.n_boxes(), 4);
        for id in 0..4 {
            let p = c.antipodal_pair(id).unwrap();
            assert_eq!(c.antipodal_pair(p).unwrap(), id);
            let b = &c.boxes[id];
            let q = &c.boxes[p];
            for a in 0..2 {
                assert!((b.center[a] + q.center[a]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn projective_circle_depth0_has_two_boxes() {
        let c = build_covering(DomainSpec::Projective { dim: 1 }, 0).unwrap();
        assert_eq!(c.n_boxes(), 2);
    }

    #[test]
    fn sphere_covering_covers_random_points() {
        let c = build_covering(DomainSpec::Sphere { dim: 2 }, 4).unwrap();
        assert_eq!(c.n_boxes(), 6 * 16 * 16);
        let mut state = 12345u64;
        for _ in 0..500 {
            let mut p = [0.0f64; 3];
            for v in &mut p {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                *v = (state >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0;
            }
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            if n < 1e-6 {
                continue;
            }
            let s: Vec<f64> = p.iter().map(|v| v / n).collect();
            let id = c.locate(&s).expect("sphere point locates");
            // small tolerance: the AABB slightly underestimates curvature
            assert!(c.boxes[id].distance(&s) < 1e-9, "dist {}", c.boxes[id].distance(&s));
            // query at radius 0.1 finds at least the containing box
            assert!(c.query_ball(&s, 0.1).contains(&id));
        }
    }

    #[test]
    fn hemisphere_filters_by_sign() {
        let closed = build_covering(
            DomainSpec::Hemisphere {
                dim: 2,
                sign: 1,
                closed: true,
            },
            3,
        )
        .unwrap();
        let open = build_covering(
            DomainSpec::Hemisphere {
                dim: 2,
                sign: 1,
                closed: false,
            },
            3,
        )
        .unwrap();
        assert!(closed.n_boxes() > open.n_boxes());
        assert!(closed.boxes.iter().all(|b| b.center[2] > 0.0));
        assert!(closed.boxes.iter().enumerate().any(|(i, _)| closed.touches_equator(i)));
        assert!(open
            .boxes
            .iter()
            .all(|b| b.center[2] - b.radius[2] > 0.0));
        // south pole not locatable in the northern covering
        assert!(closed.locate(&[0.0, 0.0, -1.0]).is_none());
        assert!(closed.locate(&[0.0, 0.0, 1.0]).is_some());
    }

    #[test]
    fn projective_locate_identifies_antipodes() {
        let c = build_covering(DomainSpec::Projective { dim: 2 }, 3).unwrap();
        let s = [0.6, -0.64, 0.45];
        let n = (s.iter().map(|v| v * v).sum::<f64>()).sqrt();
        let s: Vec<f64> = s.iter().map(|v| v / n).collect();
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        assert_eq!(c.locate(&s), c.locate(&neg));
    }

    #[test]
    fn depth_budget_enforced() {
        assert!(matches!(
            build_covering(DomainSpec::Sphere { dim: 3 }, 9),
            Err(EngineError::Depth { .. })
        ));
    }

    #[test]
    fn euclidean_query_ball_ranges() {
        let c = build_covering(DomainSpec::euclidean(&[(-1.0, 1.0), (-1.0, 1.0)]), 4).unwrap();
        let hits = c.query_ball(&[0.0, 0.0], 0.2);
        assert!(!hits.is_empty());
        for id in 0..c.n_boxes() {
            let d = c.boxes[id].distance(&[0.0, 0.0]);
            assert_eq!(hits.contains(&id), d < 0.2, "box {id} d = {d}");
        }
        assert!(c.query_ball(&[5.0, 5.0], 0.1).is_empty());
    }
}
