//! Minimum spanning arborescences.
//!
//! The tree family that matters here points *at* the root — every node must
//! reach it along tree edges. That problem is solved on the reversed graph
//! as an ordinary out-arborescence search (each non-root node keeps its
//! cheapest incoming edge; cycles are contracted with re-weighted entering
//! edges and expanded after the recursive solve), then the answer is
//! flipped back.

#[derive(Clone, Copy)]
struct E {
    from: usize,
    to: usize,
    w: f64,
    /// Index into the caller's edge list; self-index at the top level.
    back: usize,
}

/// Minimum-weight spanning arborescence with all edges directed away from
/// `root`. Returns the total weight and the chosen `(from, to)` edges, or
/// `None` when some node cannot be reached. Parallel edges are allowed;
/// weights must be finite.
pub fn min_out_arborescence(
    nodes: usize,
    edges: &[(usize, usize, f64)],
    root: usize,
) -> Option<(f64, Vec<(usize, usize)>)> {
    assert!(root < nodes);
    let list: Vec<E> = edges
        .iter()
        .enumerate()
        .map(|(i, &(from, to, w))| {
            assert!(from < nodes && to < nodes, "edge ({from}, {to}) out of range");
            assert!(w.is_finite(), "edge ({from}, {to}) has weight {w}");
            E { from, to, w, back: i }
        })
        .collect();
    let chosen = solve(nodes, root, &list)?;
    let mut total = 0.0;
    let mut out = Vec::with_capacity(chosen.len());
    for idx in chosen {
        let (from, to, w) = edges[list[idx].back];
        total += w;
        out.push((from, to));
    }
    Some((total, out))
}

/// Minimum-weight spanning tree with every node directed *toward* `root`
/// (one outgoing edge per non-root node). Solved by reversing the edges,
/// finding the out-arborescence, and reversing back.
pub fn min_in_tree(
    nodes: usize,
    edges: &[(usize, usize, f64)],
    root: usize,
) -> Option<(f64, Vec<(usize, usize)>)> {
    let reversed: Vec<(usize, usize, f64)> =
        edges.iter().map(|&(from, to, w)| (to, from, w)).collect();
    let (total, picked) = min_out_arborescence(nodes, &reversed, root)?;
    Some((total, picked.into_iter().map(|(from, to)| (to, from)).collect()))
}

/// Recursive contraction step; returns indices into `edges`.
fn solve(nodes: usize, root: usize, edges: &[E]) -> Option<Vec<usize>> {
    let mut best: Vec<Option<usize>> = vec![None; nodes];
    for (i, e) in edges.iter().enumerate() {
        if e.to == root || e.from == e.to {
            continue;
        }
        if best[e.to].is_none_or(|b| e.w < edges[b].w) {
            best[e.to] = Some(i);
        }
    }
    for v in 0..nodes {
        if v != root && best[v].is_none() {
            return None;
        }
    }

    // A cycle in the best-edge pointers, if any.
    let mut color = vec![0u8; nodes];
    color[root] = 2;
    let mut cycle: Option<Vec<usize>> = None;
    'scan: for start in 0..nodes {
        if color[start] != 0 {
            continue;
        }
        let mut path = Vec::new();
        let mut v = start;
        while color[v] == 0 {
            color[v] = 1;
            path.push(v);
            v = edges[best[v].unwrap()].from;
        }
        let closed = color[v] == 1;
        for &u in &path {
            color[u] = 2;
        }
        if closed {
            let at = path.iter().position(|&u| u == v).unwrap();
            cycle = Some(path[at..].to_vec());
            break 'scan;
        }
    }
    let Some(cycle) = cycle else {
        return Some((0..nodes).filter(|&v| v != root).map(|v| best[v].unwrap()).collect());
    };

    // Contract the cycle into one super node; edges entering it are
    // discounted by the cycle edge they displace.
    let mut in_cycle = vec![false; nodes];
    for &v in &cycle {
        in_cycle[v] = true;
    }
    let mut map = vec![usize::MAX; nodes];
    let mut m = 0;
    for (v, slot) in map.iter_mut().enumerate() {
        if !in_cycle[v] {
            *slot = m;
            m += 1;
        }
    }
    let super_node = m;

    let mut contracted = Vec::new();
    for (i, e) in edges.iter().enumerate() {
        match (in_cycle[e.from], in_cycle[e.to]) {
            (true, true) => {}
            (false, true) => contracted.push(E {
                from: map[e.from],
                to: super_node,
                w: e.w - edges[best[e.to].unwrap()].w,
                back: i,
            }),
            (true, false) => contracted.push(E {
                from: super_node,
                to: map[e.to],
                w: e.w,
                back: i,
            }),
            (false, false) => contracted.push(E {
                from: map[e.from],
                to: map[e.to],
                w: e.w,
                back: i,
            }),
        }
    }

    let child = solve(m + 1, map[root], &contracted)?;
    let mut chosen = Vec::with_capacity(nodes - 1);
    let mut entered = None;
    for ci in child {
        let e = &contracted[ci];
        if e.to == super_node {
            debug_assert!(entered.is_none(), "arborescence enters a node twice");
            entered = Some(edges[e.back].to);
        }
        chosen.push(e.back);
    }
    let entered = entered.expect("contracted cycle must be entered exactly once");
    for &v in &cycle {
        if v != entered {
            chosen.push(best[v].unwrap());
        }
    }
    Some(chosen)
}

/// Brute-force oracle: tries every way of giving each non-root node one
/// outgoing edge and keeps the cheapest acyclic choice. Exponential; meant
/// for cross-checking on graphs of at most a dozen nodes.
pub fn exhaustive_min_in_tree(
    nodes: usize,
    edges: &[(usize, usize, f64)],
    root: usize,
) -> Option<(f64, Vec<(usize, usize)>)> {
    assert!(root < nodes);
    let mut outgoing: Vec<Vec<usize>> = vec![Vec::new(); nodes];
    for (i, &(from, to, _)) in edges.iter().enumerate() {
        if from != root && from != to {
            outgoing[from].push(i);
        }
    }
    let slots: Vec<usize> = (0..nodes).filter(|&v| v != root).collect();
    if slots.iter().any(|&v| outgoing[v].is_empty()) {
        return None;
    }
    let combos = slots
        .iter()
        .map(|&v| outgoing[v].len() as u128)
        .try_fold(1u128, |acc, c| acc.checked_mul(c))
        .unwrap_or(u128::MAX);
    assert!(combos <= 10_000_000, "oracle blow-up: {combos} combinations");

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut pick = vec![0usize; slots.len()];
    'outer: loop {
        // Follow the chosen edges; every node must reach the root without
        // revisiting anything.
        let mut ok = true;
        let mut total = 0.0;
        for (si, &v) in slots.iter().enumerate() {
            total += edges[outgoing[v][pick[si]]].2;
            let mut hops = 0;
            let mut cur = v;
            while cur != root {
                let pos = slots.iter().position(|&s| s == cur).unwrap();
                cur = edges[outgoing[cur][pick[pos]]].1;
                hops += 1;
                if hops > nodes {
                    ok = false;
                    break;
                }
            }
            if !ok {
                break;
            }
        }
        if ok && best.as_ref().is_none_or(|(w, _)| total < *w) {
            let ids = slots
                .iter()
                .zip(&pick)
                .map(|(&v, &p)| outgoing[v][p])
                .collect();
            best = Some((total, ids));
        }

        let mut i = slots.len();
        loop {
            if i == 0 {
                break 'outer;
            }
            i -= 1;
            if pick[i] + 1 < outgoing[slots[i]].len() {
                pick[i] += 1;
                break;
            }
            pick[i] = 0;
        }
    }
    best.map(|(w, ids)| {
        (
            w,
            ids.into_iter().map(|i| (edges[i].0, edges[i].1)).collect(),
        )
    })
}
