use std::collections::VecDeque;

use super::DirectedGraph;

const NIL: usize = usize::MAX;

/// Maximum matching of the bipartite split (out-copies vs in-copies, one
/// bipartite edge per directed edge), via Hopcroft–Karp.
pub fn maximum_matching(g: &DirectedGraph) -> usize {
    let n = g.node_count();
    let mut match_left = vec![NIL; n];
    let mut match_right = vec![NIL; n];
    let mut dist = vec![0usize; n];
    let mut matched = 0;

    loop {
        // BFS layering from free left vertices.
        let mut queue = VecDeque::new();
        for u in 0..n {
            if match_left[u] == NIL {
                dist[u] = 0;
                queue.push_back(u);
            } else {
                dist[u] = usize::MAX;
            }
        }
        let mut found_free = false;
        while let Some(u) = queue.pop_front() {
            for v in g.successors(u) {
                let w = match_right[v];
                if w == NIL {
                    found_free = true;
                } else if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    queue.push_back(w);
                }
            }
        }
        if !found_free {
            break;
        }

        // Vertex-disjoint shortest augmenting paths, iterative DFS.
        let mut next_edge = vec![0usize; n];
        for root in 0..n {
            if match_left[root] != NIL {
                continue;
            }
            let mut stack = vec![root];
            while let Some(&u) = stack.last() {
                let out = g.out_edges(u);
                if next_edge[u] == out.len() {
                    dist[u] = usize::MAX;
                    stack.pop();
                    continue;
                }
                let v = out[next_edge[u]].dst;
                next_edge[u] += 1;
                let w = match_right[v];
                if w == NIL {
                    // Flip the path root..u, then u-v.
                    let mut right = v;
                    while let Some(left) = stack.pop() {
                        let prev_right = match_left[left];
                        match_left[left] = right;
                        match_right[right] = left;
                        right = prev_right;
                    }
                    matched += 1;
                    break;
                } else if dist[w] == dist[u] + 1 {
                    stack.push(w);
                }
            }
        }
    }
    matched
}

/// Classical minimum driver count for full structural control.
pub fn driver_count(g: &DirectedGraph) -> usize {
    (g.node_count() - maximum_matching(g)).max(1)
}
