//! Chain control sets and the sphere-specific analyses: antipodal
//! classification, projective quotient, equator containment, hemisphere
//! restriction.

use super::covering::{build_covering, BoxCovering, DomainSpec};
use super::graph::TransitionGraph;
use super::ladder::LadderRecord;
use super::scc::{chain_reachable_set, tarjan_scc};
use super::EngineError;

#[derive(Debug, Clone, PartialEq)]
pub enum Classification {
    Chain,
    StrongChainApprox(LadderRecord),
}

impl Classification {
    pub fn label(&self) -> String {
        match self {
            Classification::Chain => "chain".into(),
            Classification::StrongChainApprox(r) => {
                format!("strong_chain_approx(deltas={:?})", r.deltas)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AntipodalClass {
    One,
    Two { partner: usize },
    NotApplicable,
}

impl AntipodalClass {
    pub fn label(&self) -> String {
        match self {
            AntipodalClass::One => "one".into(),
            AntipodalClass::Two { partner } => format!("two(partner={partner})"),
            AntipodalClass::NotApplicable => "n/a".into(),
        }
    }
}

/// One extracted chain (or strong chain) control set approximation: a
/// nontrivial SCC of its transition graph.
#[derive(Debug, Clone)]
pub struct ChainSetResult {
    /// Sorted box ids.
    pub boxes: Vec<usize>,
    pub classification: Classification,
    pub touches_equator: bool,
    /// +1 all boxes north, −1 all south, 0 mixed or not a sphere domain.
    pub hemisphere_sign: i8,
    pub antipodal_class: AntipodalClass,
}

pub(crate) fn make_result(
    covering: &BoxCovering,
    boxes: Vec<usize>,
    classification: Classification,
) -> ChainSetResult {
    let sphere_kind = !matches!(covering.domain, DomainSpec::EuclideanWindow { .. });
    let touches_equator = sphere_kind && boxes.iter().any(|&b| covering.touches_equator(b));
    let hemisphere_sign = if sphere_kind {
        let last = covering.ambient_dim() - 1;
        let pos = boxes.iter().all(|&b| covering.boxes[b].center[last] > 0.0);
        let neg = boxes.iter().all(|&b| covering.boxes[b].center[last] < 0.0);
        if pos {
            1
        } else if neg {
            -1
        } else {
            0
        }
    } else {
        0
    };
    ChainSetResult {
        boxes,
        classification,
        touches_equator,
        hemisphere_sign,
        antipodal_class: AntipodalClass::NotApplicable,
    }
}

/// A component is recurrent if it has an internal cycle through at least two
/// boxes, or — for a singleton — a pointwise-returning transition. A bare
/// containing-box self-loop is not enough: it only certifies that the flow
/// moved less than a box width, and iterating it would need restart jumps of
/// a box diameter.
fn nontrivial(comp: &[usize], returning: &[bool]) -> bool {
    comp.len() > 1 || returning[comp[0]]
}

/// Nontrivial SCCs of the graph (each box has in- and out-edges inside the
/// component), tagged with equator/hemisphere flags. Ordered by smallest
/// contained box id.
pub fn chain_control_sets(graph: &TransitionGraph) -> Vec<ChainSetResult> {
    tarjan_scc(&graph.edges)
        .into_iter()
        .filter(|c| nontrivial(c, &graph.returning))
        .map(|c| make_result(&graph.covering, c, Classification::Chain))
        .collect()
}

/// Antipodal classification of a sphere-graph chain set: "one" when the set
/// reaches its own antipodal image (a single antipodally symmetric set),
/// otherwise "two" with the id of the partner set −E.
pub fn antipodal_classification(
    graph: &TransitionGraph,
    sets: &[ChainSetResult],
    idx: usize,
) -> Result<AntipodalClass, EngineError> {
    let set = sets
        .get(idx)
        .ok_or_else(|| EngineError::Input(format!("no chain set {idx}")))?;
    let b = *set.boxes.first().ok_or_else(|| EngineError::Input("empty chain set".into()))?;
    let pair = graph
        .covering
        .antipodal_pair(b)
        .ok_or_else(|| EngineError::Input("covering is not antipodally closed".into()))?;
    let reach = chain_reachable_set(graph, b)?;
    if reach.binary_search(&pair).is_ok() {
        return Ok(AntipodalClass::One);
    }
    let partner = sets
        .iter()
        .position(|s| s.boxes.binary_search(&pair).is_ok())
        .ok_or_else(|| {
            EngineError::Input("antipodal partner component missing (broken symmetry)".into())
        })?;
    Ok(AntipodalClass::Two { partner })
}

/// Quotient of a sphere graph by the antipodal involution: nodes are
/// canonical pairs; an edge exists iff any sphere edge between the four
/// representatives exists. SCCs of the quotient correspond to chain control
/// sets on ℙⁿ.
pub fn projective_quotient(graph: &TransitionGraph) -> Result<TransitionGraph, EngineError> {
    let dim = match graph.covering.domain {
        DomainSpec::Sphere { dim } => dim,
        _ => {
            return Err(EngineError::Input(
                "projective quotient needs a full-sphere graph".into(),
            ))
        }
    };
    let cov = &graph.covering;
    let n = cov.n_boxes();
    // canonical sphere id per box and its projective index
    let mut canon = vec![0usize; n];
    for b in 0..n {
        let p = cov
            .antipodal_pair(b)
            .ok_or_else(|| EngineError::Input("sphere covering missing pairs".into()))?;
        canon[b] = b.min(p);
    }
    let pcov = build_covering(DomainSpec::Projective { dim }, cov.depth)?;
    // canonical ids in ascending order match the projective covering order
    let mut canon_ids: Vec<usize> = canon.iter().copied().collect();
    canon_ids.sort_unstable();
    canon_ids.dedup();
    debug_assert_eq!(canon_ids.len(), pcov.n_boxes());
    let mut pidx = vec![usize::MAX; n];
    for (i, &c) in canon_ids.iter().enumerate() {
        pidx[c] = i;
    }
    let pmap = |b: usize| pidx[canon[b]];

    let mut edges: Vec<Vec<usize>> = vec![Vec::new(); pcov.n_boxes()];
    let mut witnesses: Vec<Vec<(u16, u16)>> = vec![Vec::new(); pcov.n_boxes()];
    for src in 0..n {
        let ps = pmap(src);
        for (k, &dst) in graph.edges[src].iter().enumerate() {
            edges[ps].push(pmap(dst));
            witnesses[ps].push(graph.witnesses[src][k]);
        }
    }
    for (e, w) in edges.iter_mut().zip(witnesses.iter_mut()) {
        let mut zipped: Vec<(usize, (u16, u16))> =
            e.iter().copied().zip(w.iter().copied()).collect();
        zipped.sort_by_key(|&(d, wit)| (d, wit));
        e.clear();
        w.clear();
        for (d, wit) in zipped {
            if e.last() != Some(&d) {
                e.push(d);
                w.push(wit);
            }
        }
    }
    let mut sink_edges: Vec<usize> = graph.sink_edges.iter().map(|&b| pmap(b)).collect();
    sink_edges.sort_unstable();
    sink_edges.dedup();
    // on the quotient, returning to the antipode of the start is a return
    let mut returning = vec![false; pcov.n_boxes()];
    for b in 0..n {
        returning[pmap(b)] |= graph.returning_antipodal[b];
    }
    Ok(TransitionGraph {
        covering: pcov,
        t_chain: graph.t_chain,
        control_samples: graph.control_samples.clone(),
        jump: graph.jump.clone(),
        edges,
        witnesses,
        returning: returning.clone(),
        returning_antipodal: returning,
        sink_edges,
        sink_events: graph.sink_events,
        total_events: graph.total_events,
    })
}

/// Containment of embedded homogeneous chain control sets (computed on
/// 𝕊^{n−1} and placed on the equator {s_{n+1} = 0}) inside equator-touching
/// central sets, with one-box-diameter slack.
#[derive(Debug, Clone)]
pub struct ContainmentReport {
    pub entries: Vec<ContainmentEntry>,
}

#[derive(Debug, Clone)]
pub struct ContainmentEntry {
    pub central_set: usize,
    pub homogeneous_set: usize,
    pub contained: bool,
    /// Flagged when the embedded homogeneous set is strictly larger than the
    /// central set's equator trace (must not happen for true chain sets).
    pub violation: bool,
    pub max_gap: f64,
}

pub fn equator_containment(
    central_covering: &BoxCovering,
    central_sets: &[ChainSetResult],
    hom_covering: &BoxCovering,
    hom_sets: &[ChainSetResult],
) -> ContainmentReport {
    let slack = central_covering.max_diameter();
    let projective = matches!(central_covering.domain, DomainSpec::Projective { .. });
    let mut entries = Vec::new();
    for (ci, cset) in central_sets.iter().enumerate() {
        if !cset.touches_equator {
            continue;
        }
        for (hi, hset) in hom_sets.iter().enumerate() {
            let mut max_gap = 0.0f64;
            for &hb in &hset.boxes {
                // embed the 𝕊^{n−1} box center on the equator of 𝕊ⁿ
                let mut p = hom_covering.boxes[hb].center.clone();
                p.push(0.0);
                let gap = cset
                    .boxes
                    .iter()
                    .map(|&cb| {
                        let b = &central_covering.boxes[cb];
                        if projective {
                            b.distance(&p).min(b.distance_antipodal(&p))
                        } else {
                            b.distance(&p)
                        }
                    })
                    .fold(f64::INFINITY, f64::min);
                max_gap = max_gap.max(gap);
            }
            let contained = max_gap <= slack;
            entries.push(ContainmentEntry {
                central_set: ci,
                homogeneous_set: hi,
                contained,
                violation: !contained,
                max_gap,
            });
        }
    }
    ContainmentReport { entries }
}

/// Induced subgraph on one hemisphere and its chain sets (reported in the
/// original sphere box ids). Closed keeps equator-touching boxes.
#[derive(Debug, Clone)]
pub struct RestrictionResult {
    /// Original sphere box ids kept by the restriction, sorted.
    pub kept: Vec<usize>,
    /// Induced adjacency, indexed like `kept`.
    pub edges: Vec<Vec<usize>>,
    /// Chain sets of the restricted graph, in original sphere box ids.
    pub chain_sets: Vec<ChainSetResult>,
}

pub fn hemisphere_restriction(
    graph: &TransitionGraph,
    sign: i8,
    closed: bool,
) -> Result<RestrictionResult, EngineError> {
    if matches!(graph.covering.domain, DomainSpec::EuclideanWindow { .. }) {
        return Err(EngineError::Input(
            "hemisphere restriction needs a sphere graph".into(),
        ));
    }
    let cov = &graph.covering;
    let last = cov.ambient_dim() - 1;
    let keep = |b: usize| -> bool {
        let cell = &cov.boxes[b];
        let h = cell.center[last] * sign as f64;
        if closed {
            h >= 0.0
        } else {
            h > 0.0 && h - cell.radius[last] > 1e-12
        }
    };
    let kept: Vec<usize> = (0..cov.n_boxes()).filter(|&b| keep(b)).collect();
    let mut local = vec![usize::MAX; cov.n_boxes()];
    for (i, &b) in kept.iter().enumerate() {
        local[b] = i;
    }
    let edges: Vec<Vec<usize>> = kept
        .iter()
        .map(|&b| {
            graph.edges[b]
                .iter()
                .filter_map(|&d| {
                    let l = local[d];
                    if l == usize::MAX {
                        None
                    } else {
                        Some(l)
                    }
                })
                .collect()
        })
        .collect();
    let kept_returning: Vec<bool> = kept.iter().map(|&b| graph.returning[b]).collect();
    let chain_sets = tarjan_scc(&edges)
        .into_iter()
        .filter(|c| nontrivial(c, &kept_returning))
        .map(|c| {
            let orig: Vec<usize> = c.iter().map(|&l| kept[l]).collect();
            make_result(cov, orig, Classification::Chain)
        })
        .collect();
    Ok(RestrictionResult {
        kept,
        edges,
        chain_sets,
    })
}
