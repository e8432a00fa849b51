//! Strongly connected components (iterative Tarjan) and graph reachability.

use super::{EngineError, TransitionGraph};

/// Tarjan SCC on an adjacency list, iterative so deep graphs cannot overflow
/// the call stack. Components are returned with sorted member ids, ordered by
/// their smallest member.
pub fn tarjan_scc(graph: &[Vec<usize>]) -> Vec<Vec<usize>> {
    let n = graph.len();
    let mut idx: Vec<Option<usize>> = vec![None; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut index = 0usize;

    // explicit DFS frames: (vertex, next child position)
    let mut frames: Vec<(usize, usize)> = Vec::new();
    for root in 0..n {
        if idx[root].is_some() {
            continue;
        }
        frames.push((root, 0));
        idx[root] = Some(index);
        low[root] = index;
        index += 1;
        stack.push(root);
        on_stack[root] = true;

        while !frames.is_empty() {
            let (v, next) = {
                let f = frames.last_mut().expect("nonempty frames");
                let v = f.0;
                if f.1 < graph[v].len() {
                    let w = graph[v][f.1];
                    f.1 += 1;
                    (v, Some(w))
                } else {
                    (v, None)
                }
            };
            match next {
                Some(w) => {
                    if idx[w].is_none() {
                        idx[w] = Some(index);
                        low[w] = index;
                        index += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        frames.push((w, 0));
                    } else if on_stack[w] {
                        low[v] = low[v].min(idx[w].unwrap());
                    }
                }
                None => {
                    frames.pop();
                    if let Some(f) = frames.last() {
                        let p = f.0;
                        low[p] = low[p].min(low[v]);
                    }
                    if low[v] == idx[v].unwrap() {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().expect("tarjan stack underflow");
                            on_stack[w] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        comp.sort_unstable();
                        comps.push(comp);
                    }
                }
            }
        }
    }
    comps.sort_by_key(|c| c[0]);
    comps
}

/// SCC partition of a transition graph (sink excluded; the sink has no
/// internal id, so the box adjacency is already sink-free).
pub fn strongly_connected_components(graph: &TransitionGraph) -> Vec<Vec<usize>> {
    tarjan_scc(&graph.edges)
}

/// Forward reachability closure from a box.
pub fn chain_reachable_set(
    graph: &TransitionGraph,
    from_box: usize,
) -> Result<Vec<usize>, EngineError> {
    if from_box >= graph.n_boxes() {
        return Err(EngineError::UnknownBox(from_box));
    }
    let mut seen = vec![false; graph.n_boxes()];
    let mut queue = vec![from_box];
    seen[from_box] = true;
    while let Some(v) = queue.pop() {
        for &w in &graph.edges[v] {
            if !seen[w] {
                seen[w] = true;
                queue.push(w);
            }
        }
    }
    Ok((0..graph.n_boxes()).filter(|&i| seen[i]).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn self_loops_are_singletons() {
        let g = vec![vec![0], vec![1], vec![2]];
        let c = tarjan_scc(&g);
        assert_eq!(c, vec![vec![0], vec![1], vec![2]]);
    }

    #[test]
    fn three_cycle_is_one_component() {
        let g = vec![vec![1], vec![2], vec![0]];
        let c = tarjan_scc(&g);
        assert_eq!(c, vec![vec![0, 1, 2]]);
    }

    #[test]
    fn two_cycles_one_way_bridge() {
        // cycle {0,1} -> cycle {2,3}
        let g = vec![vec![1], vec![0, 2], vec![3], vec![2]];
        let c = tarjan_scc(&g);
        assert_eq!(c, vec![vec![0, 1], vec![2, 3]]);
    }

    #[test]
    fn long_path_does_not_overflow() {
        let n = 200_000;
        let mut g: Vec<Vec<usize>> = (0..n).map(|i| if i + 1 < n { vec![i + 1] } else { vec![] }).collect();
        g[n - 1].push(0); // close into one giant cycle
        let c = tarjan_scc(&g);
        assert_eq!(c.len(), 1);
        assert_eq!(c[0].len(), n);
    }
}
