//! Sampled-control transition graphs over a box covering.
//!
//! For every box, a fixed set of start points (center plus low-discrepancy
//! offsets, chosen antipodally symmetric) is integrated under every constant
//! control sample for time exactly T. An edge goes to every box within the
//! jump radius of the arrival point — the radius evaluated at the arrival,
//! per the jump-function semantics — inflated by a quarter of the source-box
//! diameter to compensate sampling sparsity (strictly below the box radius,
//! so a point resting at a box center never reaches a neighbor with a
//! vanishing jump), plus always the box containing the arrival.
//! Escapes from euclidean windows and integrator divergence route to a
//! distinguished OUT-OF-DOMAIN sink and are never silently dropped.
//!
//! Each box additionally records whether any sampled start point *returns
//! pointwise* — arrives within the jump radius of the start itself. This
//! distinguishes genuine one-box recurrence (fixed points, slow limit
//! cycles) from boxes whose only self-loop comes from sub-box-scale drift:
//! such a loop cannot be iterated without restart jumps of up to a box
//! diameter, far beyond a vanishing jump function.
//!
//! Construction is parallel over source boxes; each box's edge list is
//! computed independently and assembled in box-id order, so the result is
//! bit-identical for every thread count.

use rayon::prelude::*;

use super::covering::{BoxCovering, DomainSpec};
use super::EngineError;
use crate::systems::{integrate, AffineSystem, ControlSignal, ExtendedBilinearSystem, SystemError};
use nalgebra::DVector;

/// Dynamics closure: arrival point after time T from a start point under a
/// constant control. Divergence is an error, not a panic.
pub type Flow<'a> = dyn Fn(&[f64], &[f64]) -> Result<Vec<f64>, SystemError> + Sync + 'a;

/// Named state-dependent weight for the jump-function ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    /// w ≡ 1 (reduces the ladder to constant jumps).
    Unit,
    /// w(s) = |s_{n+1}|: vanishes toward the equator / points at infinity.
    EquatorHeight,
    /// w(x) = 1/(1+‖x‖₂): vanishes toward infinity in euclidean windows.
    InverseNorm,
}

impl Weight {
    pub fn eval(&self, p: &[f64]) -> f64 {
        match self {
            Weight::Unit => 1.0,
            Weight::EquatorHeight => p[p.len() - 1].abs(),
            Weight::InverseNorm => 1.0 / (1.0 + p.iter().map(|v| v * v).sum::<f64>().sqrt()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Weight::Unit => "unit",
            Weight::EquatorHeight => "equator_height",
            Weight::InverseNorm => "inverse_norm",
        }
    }

    pub fn parse(s: &str) -> Option<Weight> {
        match s {
            "unit" => Some(Weight::Unit),
            "equator_height" => Some(Weight::EquatorHeight),
            "inverse_norm" => Some(Weight::InverseNorm),
            _ => None,
        }
    }
}

/// Jump radius: constant ε, or δ·w(arrival) for a named weight.
#[derive(Debug, Clone, PartialEq)]
pub enum JumpSpec {
    Constant(f64),
    Weighted { delta: f64, weight: Weight },
}

impl JumpSpec {
    pub fn eval(&self, arrival: &[f64]) -> f64 {
        match self {
            JumpSpec::Constant(e) => *e,
            JumpSpec::Weighted { delta, weight } => delta * weight.eval(arrival),
        }
    }

    /// Total acceptance radius at an arrival point, including the
    /// discretization slack. For weighted jumps the slack is scaled by the
    /// same weight as the jump: a constant slack would reintroduce ordinary
    /// chains wherever the jump function vanishes (e.g. at the equator).
    pub fn radius(&self, arrival: &[f64], inflation: f64) -> f64 {
        match self {
            JumpSpec::Constant(e) => e + inflation,
            JumpSpec::Weighted { delta, weight } => {
                (delta + inflation) * weight.eval(arrival)
            }
        }
    }

    /// Per-axis acceptance slacks at an arrival point. The discretization
    /// slack compensates sampling sparsity, and sample spacing scales with
    /// each axis's box width, so on anisotropic grids the slack is a quarter
    /// of the per-axis width rather than a ball of the largest one.
    pub fn axis_slacks(&self, arrival: &[f64], inflations: &[f64]) -> Vec<f64> {
        match self {
            JumpSpec::Constant(e) => inflations.iter().map(|q| e + q).collect(),
            JumpSpec::Weighted { delta, weight } => {
                let w = weight.eval(arrival);
                inflations.iter().map(|q| (delta + q) * w).collect()
            }
        }
    }
}

/// Provenance of an edge: indices of the first (sample, control) pair that
/// witnessed it.
pub type Witness = (u16, u16);

#[derive(Debug, Clone)]
pub struct TransitionGraph {
    pub covering: BoxCovering,
    pub t_chain: f64,
    pub control_samples: Vec<Vec<f64>>,
    pub jump: JumpSpec,
    /// Adjacency: sorted destination box ids per source box.
    pub edges: Vec<Vec<usize>>,
    /// First witness per edge, aligned with `edges`.
    pub witnesses: Vec<Vec<Witness>>,
    /// Boxes with a pointwise-returning transition: some sampled start point
    /// comes back within the jump radius of *itself* (not merely back into
    /// its own box). A box whose containing-box self-loop exists only because
    /// the flow moves slower than one box width is not recurrent — iterating
    /// that loop would need a restart jump of up to a box diameter — so a
    /// singleton SCC counts as a chain set only when this flag holds.
    pub returning: Vec<bool>,
    /// Like `returning`, but identifying antipodal points; used when the
    /// graph is folded to projective space, where a start point returning to
    /// its own antipode is a genuine return.
    pub returning_antipodal: Vec<bool>,
    /// Source boxes with at least one edge to the OUT-OF-DOMAIN sink, sorted.
    pub sink_edges: Vec<usize>,
    /// Arrival events that hit the sink vs. all arrival events.
    pub sink_events: usize,
    pub total_events: usize,
}

impl TransitionGraph {
    pub fn n_boxes(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.edges[a].binary_search(&b).is_ok()
    }

    /// Fraction of arrival events that left the domain.
    pub fn sink_fraction(&self) -> f64 {
        if self.total_events == 0 {
            0.0
        } else {
            self.sink_events as f64 / self.total_events as f64
        }
    }
}

/// Deterministic low-discrepancy start-point offsets in (−1, 1)^dim:
/// the zero offset first, then ± pairs from a Halton sequence (so the offset
/// set is symmetric under negation, which makes sphere graphs exactly
/// antipodally symmetric). `seed` shifts the Halton index.
pub fn sample_offsets(dim: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    const PRIMES: [u64; 4] = [2, 3, 5, 7];
    let mut out = vec![vec![0.0; dim]];
    let mut k = 1u64;
    while out.len() < count {
        let idx = seed + k;
        let o: Vec<f64> = (0..dim)
            .map(|a| (2.0 * halton(idx, PRIMES[a % PRIMES.len()]) - 1.0) * 0.7)
            .collect();
        let neg: Vec<f64> = o.iter().map(|v| -v).collect();
        out.push(o);
        if out.len() < count {
            out.push(neg);
        }
        k += 1;
    }
    out
}

fn halton(mut i: u64, base: u64) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// Flow closure for an affine system on a euclidean window.
pub fn euclidean_flow<'a>(
    sys: &'a AffineSystem,
    t: f64,
    step: f64,
) -> impl Fn(&[f64], &[f64]) -> Result<Vec<f64>, SystemError> + Sync + 'a {
    move |x: &[f64], u: &[f64]| {
        let u_sig = ControlSignal::constant_unchecked(u.to_vec());
        let x0 = DVector::from_column_slice(x);
        let field = |y: &DVector<f64>, uc: &[f64]| sys.field(y, uc);
        let xf = integrate(&field, &x0, &u_sig, 0.0, t, step)?;
        Ok(xf.iter().copied().collect())
    }
}

/// Flow closure for the projected dynamics on the Poincaré sphere.
pub fn sphere_flow<'a>(
    ext: &'a ExtendedBilinearSystem,
    t: f64,
    step: f64,
) -> impl Fn(&[f64], &[f64]) -> Result<Vec<f64>, SystemError> + Sync + 'a {
    use crate::compactification::{sphere_integrate, CompactError, SpherePoint};
    move |s: &[f64], u: &[f64]| {
        let u_sig = ControlSignal::constant_unchecked(u.to_vec());
        let s0 = SpherePoint::from_slice(s).map_err(|_| SystemError::Divergence { time: 0.0 })?;
        match sphere_integrate(ext, &s0, &u_sig, 0.0, t, step) {
            Ok(s1) => Ok(s1.coords().iter().copied().collect()),
            Err(CompactError::System(e)) => Err(e),
            Err(_) => Err(SystemError::Divergence { time: 0.0 }),
        }
    }
}

/// Flow arrivals for one box: per (sample, control) pair in iteration order,
/// the arrival point or a divergence marker. Computed once and shared across
/// jump specifications (edge assembly is much cheaper than integration).
pub struct BoxArrivals {
    pub events: Vec<(Witness, Result<Vec<f64>, ()>)>,
}

/// Integrate every sampled start point of every box under every control
/// sample for time T. Parallel over boxes, deterministic result.
pub fn compute_arrivals(
    covering: &BoxCovering,
    flow: &Flow,
    control_samples: &[Vec<f64>],
    samples_per_box: usize,
    seed: u64,
) -> Result<Vec<BoxArrivals>, EngineError> {
    if control_samples.is_empty() {
        return Err(EngineError::Input("need at least one control sample".into()));
    }
    if samples_per_box == 0 {
        return Err(EngineError::Input("need at least one sample per box".into()));
    }
    let offsets = sample_offsets(covering.domain.grid_axes(), samples_per_box, seed);
    Ok((0..covering.n_boxes())
        .into_par_iter()
        .map(|src| {
            let starts = covering.sample_points(src, &offsets);
            let mut events = Vec::with_capacity(starts.len() * control_samples.len());
            for (si, start) in starts.iter().enumerate() {
                for (ci, u) in control_samples.iter().enumerate() {
                    let wit = (si as u16, ci as u16);
                    events.push((wit, flow(start, u).map_err(|_| ())));
                }
            }
            BoxArrivals { events }
        })
        .collect())
}

/// Edge assembly over precomputed arrivals for one jump specification.
pub fn graph_from_arrivals(
    covering: &BoxCovering,
    arrivals: &[BoxArrivals],
    t_chain: f64,
    control_samples: &[Vec<f64>],
    jump: &JumpSpec,
    samples_per_box: usize,
    seed: u64,
) -> Result<TransitionGraph, EngineError> {
    if !(t_chain > 0.0) {
        return Err(EngineError::Input("T must be positive".into()));
    }
    let offsets = sample_offsets(covering.domain.grid_axes(), samples_per_box, seed);
    let projective = matches!(covering.domain, DomainSpec::Projective { .. });

    struct PerBox {
        edges: Vec<usize>,
        witnesses: Vec<Witness>,
        returning: bool,
        returning_antipodal: bool,
        sink: bool,
        sink_events: usize,
        total_events: usize,
    }

    fn max_dist(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }
    fn max_dist_neg(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x + y).abs()).fold(0.0, f64::max)
    }

    // Euclidean windows may have different box widths per axis; there the
    // sampling-sparsity slack is applied per axis. Sphere-family coverings
    // have square cells in face coordinates and keep the scalar ball.
    let euclidean = matches!(covering.domain, DomainSpec::EuclideanWindow { .. });

    let per_box: Vec<PerBox> = (0..covering.n_boxes())
        .into_par_iter()
        .map(|src| {
            let inflation = covering.boxes[src].diameter() / 4.0;
            let axis_inflations: Vec<f64> =
                covering.boxes[src].radius.iter().map(|r| r / 2.0).collect();
            let starts = covering.sample_points(src, &offsets);
            let mut found: Vec<(usize, Witness)> = Vec::new();
            let mut returning = false;
            let mut returning_antipodal = false;
            let mut sink = false;
            let mut sink_events = 0usize;
            let mut total_events = 0usize;
            for &(wit, ref outcome) in &arrivals[src].events {
                {
                    let start = &starts[wit.0 as usize];
                    total_events += 1;
                    match outcome {
                        Ok(arrival) => {
                            let r = jump.radius(&arrival, inflation);
                            let slacks = euclidean
                                .then(|| jump.axis_slacks(&arrival, &axis_inflations));
                            match &slacks {
                                Some(s) => {
                                    if arrival
                                        .iter()
                                        .zip(start.iter())
                                        .zip(s)
                                        .all(|((a, b), sk)| (a - b).abs() < *sk)
                                    {
                                        returning = true;
                                        returning_antipodal = true;
                                    }
                                }
                                None => {
                                    let d_plain = max_dist(&arrival, start);
                                    let d_anti =
                                        d_plain.min(max_dist_neg(&arrival, start));
                                    if if projective { d_anti } else { d_plain } < r {
                                        returning = true;
                                    }
                                    if d_anti < r {
                                        returning_antipodal = true;
                                    }
                                }
                            }
                            let mut dsts = covering.query_ball(&arrival, r);
                            if let Some(s) = &slacks {
                                // the scalar query radius is a superset of
                                // the per-axis region; filter it down
                                dsts.retain(|&d| {
                                    let cell = &covering.boxes[d];
                                    cell.center
                                        .iter()
                                        .zip(&cell.radius)
                                        .zip(arrival.iter())
                                        .zip(s)
                                        .all(|(((c, rad), x), sk)| {
                                            ((x - c).abs() - rad).max(0.0) < *sk
                                        })
                                });
                            }
                            match covering.locate(&arrival) {
                                Some(c) => {
                                    if dsts.binary_search(&c).is_err() {
                                        dsts.push(c);
                                        dsts.sort_unstable();
                                    }
                                }
                                None => {
                                    if projective {
                                        // antipode may locate instead
                                        let neg: Vec<f64> =
                                            arrival.iter().map(|v| -v).collect();
                                        if let Some(c) = covering.locate(&neg) {
                                            if dsts.binary_search(&c).is_err() {
                                                dsts.push(c);
                                                dsts.sort_unstable();
                                            }
                                        }
                                    }
                                    if dsts.is_empty() {
                                        sink = true;
                                        sink_events += 1;
                                        continue;
                                    } else {
                                        // left the covering but still within
                                        // jump range of domain boxes: count
                                        // the escape too
                                        sink = true;
                                        sink_events += 1;
                                    }
                                }
                            }
                            for d in dsts {
                                found.push((d, wit));
                            }
                        }
                        Err(()) => {
                            sink = true;
                            sink_events += 1;
                        }
                    }
                }
            }
            // stable dedup keeping the first witness in iteration order
            found.sort_by_key(|&(d, w)| (d, w));
            let mut edges = Vec::new();
            let mut witnesses = Vec::new();
            for (d, w) in found {
                if edges.last() != Some(&d) {
                    edges.push(d);
                    witnesses.push(w);
                }
            }
            PerBox {
                edges,
                witnesses,
                returning,
                returning_antipodal,
                sink,
                sink_events,
                total_events,
            }
        })
        .collect();

    let mut edges = Vec::with_capacity(per_box.len());
    let mut witnesses = Vec::with_capacity(per_box.len());
    let mut returning = Vec::with_capacity(per_box.len());
    let mut returning_antipodal = Vec::with_capacity(per_box.len());
    let mut sink_edges = Vec::new();
    let mut sink_events = 0;
    let mut total_events = 0;
    for (i, pb) in per_box.into_iter().enumerate() {
        edges.push(pb.edges);
        witnesses.push(pb.witnesses);
        returning.push(pb.returning);
        returning_antipodal.push(pb.returning_antipodal);
        if pb.sink {
            sink_edges.push(i);
        }
        sink_events += pb.sink_events;
        total_events += pb.total_events;
    }

    Ok(TransitionGraph {
        covering: covering.clone(),
        t_chain,
        control_samples: control_samples.to_vec(),
        jump: jump.clone(),
        edges,
        witnesses,
        returning,
        returning_antipodal,
        sink_edges,
        sink_events,
        total_events,
    })
}

pub fn build_transition_graph(
    covering: &BoxCovering,
    flow: &Flow,
    t_chain: f64,
    control_samples: &[Vec<f64>],
    jump: &JumpSpec,
    samples_per_box: usize,
    seed: u64,
) -> Result<TransitionGraph, EngineError> {
    if !(t_chain > 0.0) {
        return Err(EngineError::Input("T must be positive".into()));
    }
    let arrivals = compute_arrivals(covering, flow, control_samples, samples_per_box, seed)?;
    graph_from_arrivals(
        covering,
        &arrivals,
        t_chain,
        control_samples,
        jump,
        samples_per_box,
        seed,
    )
}
