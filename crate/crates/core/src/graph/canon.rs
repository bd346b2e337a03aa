//! Canonical forms and automorphism counts for decorated dual graphs.
//!
//! The canonical form is the lexicographically smallest serialization over
//! all admissible relabelings (vertex orders compatible with iterated color
//! refinement, half-edge orders compatible with their local sort keys).
//! Every relabeling achieving the minimum differs from any other by a
//! decoration-preserving automorphism, so the number of minimizers is
//! exactly |Aut(G)|.

use super::{DualGraph, HalfEdge, Tail};

pub fn canonicalize(g: &DualGraph) -> (DualGraph, u64) {
    let colors = refine_colors(g);

    // Vertex classes ordered by color; orderings enumerate permutations
    // within each class.
    let nv = g.vertices().len();
    let mut classes: Vec<Vec<usize>> = Vec::new();
    {
        let mut order: Vec<usize> = (0..nv).collect();
        order.sort_by_key(|&v| (&colors[v], v));
        let mut i = 0;
        while i < nv {
            let mut j = i;
            while j < nv && colors[order[j]] == colors[order[i]] {
                j += 1;
            }
            classes.push(order[i..j].to_vec());
            i = j;
        }
    }

    let mut best: Option<(String, DualGraph)> = None;
    let mut count = 0u64;

    let class_perms: Vec<Vec<Vec<usize>>> =
        classes.iter().map(|c| permutations(c)).collect();
    // Cartesian product over per-class permutations.
    let mut idx = vec![0usize; classes.len()];
    loop {
        let vertex_order: Vec<usize> = idx
            .iter()
            .enumerate()
            .flat_map(|(c, &i)| class_perms[c][i].iter().copied())
            .collect();
        explore_half_edge_orders(g, &vertex_order, &mut best, &mut count);

        // Advance the mixed-radix counter.
        let mut c = 0;
        loop {
            if c == idx.len() {
                let (_, graph) = best.expect("at least one labeling");
                return (graph, count);
            }
            idx[c] += 1;
            if idx[c] < class_perms[c].len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
}

/// Iterated refinement of vertex colors by local decorations and the colored
/// neighborhood structure.  Returns a stable coloring encoded as strings
/// (identical strings <=> identical color).
fn refine_colors(g: &DualGraph) -> Vec<String> {
    let nv = g.vertices().len();
    let mut colors: Vec<String> = (0..nv)
        .map(|v| {
            let vert = &g.vertices()[v];
            let mut tails: Vec<String> = g
                .tails()
                .iter()
                .filter(|t| t.vertex == v)
                .map(|t| format!("{}^{}", t.marking, t.psi))
                .collect();
            tails.sort();
            let mut hes: Vec<u32> = g
                .half_edges_at(v)
                .into_iter()
                .map(|h| g.half_edges()[h].psi)
                .collect();
            hes.sort_unstable();
            format!("g{};k{:?};t{:?};h{:?}", vert.genus, vert.kappa, tails, hes)
        })
        .collect();

    loop {
        let mut next: Vec<String> = Vec::with_capacity(nv);
        for v in 0..nv {
            let mut nbrs: Vec<String> = g
                .half_edges_at(v)
                .into_iter()
                .map(|h| {
                    let p = g.partner(h);
                    format!(
                        "({},{},{})",
                        g.half_edges()[h].psi,
                        colors[g.half_edges()[p].vertex],
                        g.half_edges()[p].psi
                    )
                })
                .collect();
            nbrs.sort();
            next.push(format!("{}|{}", colors[v], nbrs.join(";")));
        }
        // Re-encode to keep strings short and detect stabilization by the
        // induced partition.
        let part_old = partition_ids(&colors);
        let part_new = partition_ids(&next);
        if part_old == part_new {
            return colors;
        }
        colors = next;
    }
}

fn partition_ids(colors: &[String]) -> Vec<usize> {
    let mut sorted: Vec<&String> = colors.iter().collect();
    sorted.sort();
    sorted.dedup();
    colors
        .iter()
        .map(|c| sorted.binary_search(&c).unwrap())
        .collect()
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut tail in permutations(&rest) {
            let mut v = vec![x];
            v.append(&mut tail);
            out.push(v);
        }
    }
    out
}

/// For a fixed vertex order, enumerate half-edge orders compatible with the
/// local sort key and fold each resulting serialization into the running
/// minimum and minimizer count.
fn explore_half_edge_orders(
    g: &DualGraph,
    vertex_order: &[usize],
    best: &mut Option<(String, DualGraph)>,
    count: &mut u64,
) {
    let nh = g.half_edges().len();
    let mut new_vertex = vec![0usize; g.vertices().len()];
    for (new, &old) in vertex_order.iter().enumerate() {
        new_vertex[old] = new;
    }

    // Local key: relabel-invariant given the vertex order.
    let key = |h: usize| {
        let p = g.partner(h);
        (
            new_vertex[g.half_edges()[h].vertex],
            g.half_edges()[h].psi,
            new_vertex[g.half_edges()[p].vertex],
            g.half_edges()[p].psi,
        )
    };
    let mut order: Vec<usize> = (0..nh).collect();
    order.sort_by_key(|&h| key(h));
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    while i < nh {
        let mut j = i;
        while j < nh && key(order[j]) == key(order[i]) {
            j += 1;
        }
        groups.push(order[i..j].to_vec());
        i = j;
    }

    let group_perms: Vec<Vec<Vec<usize>>> = groups.iter().map(|c| permutations(c)).collect();
    let mut idx = vec![0usize; groups.len()];
    loop {
        let he_order: Vec<usize> = idx
            .iter()
            .enumerate()
            .flat_map(|(c, &i)| group_perms[c][i].iter().copied())
            .collect();
        let relabeled = relabel(g, vertex_order, &he_order);
        let s = relabeled.to_string();
        match best {
            Some((min, _)) if s > *min => {}
            Some((min, _)) if s == *min => *count += 1,
            _ => {
                *best = Some((s, relabeled));
                *count = 1;
            }
        }

        let mut c = 0;
        loop {
            if c == idx.len() {
                return;
            }
            idx[c] += 1;
            if idx[c] < group_perms[c].len() {
                break;
            }
            idx[c] = 0;
            c += 1;
        }
    }
}

/// Applies a relabeling given as new-index -> old-index maps.
fn relabel(g: &DualGraph, vertex_order: &[usize], he_order: &[usize]) -> DualGraph {
    let mut new_vertex = vec![0usize; g.vertices().len()];
    for (new, &old) in vertex_order.iter().enumerate() {
        new_vertex[old] = new;
    }
    let mut new_he = vec![0usize; g.half_edges().len()];
    for (new, &old) in he_order.iter().enumerate() {
        new_he[old] = new;
    }

    let vertices = vertex_order
        .iter()
        .map(|&old| g.vertices()[old].clone())
        .collect();
    let half_edges = he_order
        .iter()
        .map(|&old| HalfEdge {
            vertex: new_vertex[g.half_edges()[old].vertex],
            psi: g.half_edges()[old].psi,
        })
        .collect();
    let mut edges: Vec<(usize, usize)> = g
        .edges()
        .iter()
        .map(|&(a, b)| {
            let (x, y) = (new_he[a], new_he[b]);
            if x <= y {
                (x, y)
            } else {
                (y, x)
            }
        })
        .collect();
    edges.sort_unstable();
    let mut tails: Vec<Tail> = g
        .tails()
        .iter()
        .map(|t| Tail {
            vertex: new_vertex[t.vertex],
            marking: t.marking,
            psi: t.psi,
        })
        .collect();
    tails.sort_by_key(|t| (t.vertex, t.marking, t.psi));

    DualGraph {
        vertices,
        half_edges,
        edges,
        tails,
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::{m11_boundary_graph, m11_psi_graph};
    use super::super::{DualGraph, HalfEdge, Marking, Tail, Vertex};

    #[test]
    fn single_vertex_trivial_automorphisms() {
        let (c, aut) = m11_psi_graph().canonicalize();
        assert_eq!(aut, 1);
        assert_eq!(c, m11_psi_graph());
    }

    #[test]
    fn self_loop_has_two_automorphisms() {
        let (_, aut) = m11_boundary_graph().canonicalize();
        assert_eq!(aut, 2);
    }

    #[test]
    fn self_loop_with_distinct_psi_is_rigid() {
        let g = DualGraph::new(
            vec![Vertex {
                genus: 0,
                kappa: vec![],
            }],
            vec![HalfEdge { vertex: 0, psi: 1 }, HalfEdge { vertex: 0, psi: 0 }],
            vec![(0, 1)],
            vec![Tail {
                vertex: 0,
                marking: Marking::Num(1),
                psi: 0,
            }],
        )
        .unwrap();
        let (_, aut) = g.canonicalize();
        assert_eq!(aut, 1);
    }

    #[test]
    fn relabeling_invariance() {
        // Two-vertex genus-1 + genus-1 graph joined by one edge, half-edges
        // listed in both orders.
        let a = DualGraph::new(
            vec![
                Vertex {
                    genus: 1,
                    kappa: vec![],
                },
                Vertex {
                    genus: 1,
                    kappa: vec![2],
                },
            ],
            vec![HalfEdge { vertex: 0, psi: 3 }, HalfEdge { vertex: 1, psi: 0 }],
            vec![(0, 1)],
            vec![],
        )
        .unwrap();
        let b = DualGraph::new(
            vec![
                Vertex {
                    genus: 1,
                    kappa: vec![2],
                },
                Vertex {
                    genus: 1,
                    kappa: vec![],
                },
            ],
            vec![HalfEdge { vertex: 1, psi: 3 }, HalfEdge { vertex: 0, psi: 0 }],
            vec![(0, 1)],
            vec![],
        )
        .unwrap();
        let (ca, na) = a.canonicalize();
        let (cb, nb) = b.canonicalize();
        assert_eq!(ca, cb);
        assert_eq!(na, nb);
        assert_eq!(na, 1);
    }

    #[test]
    fn symmetric_theta_graph() {
        // Two genus-0 vertices joined by three undecorated edges plus one
        // tail on each side would be asymmetric; without tails but genus 1
        // on one side it is rigid.  The fully symmetric theta graph (two
        // vertices, three parallel edges, no decorations) has |Aut| = 12:
        // swap the vertices and permute the three edges.
        let g = DualGraph::new(
            vec![
                Vertex {
                    genus: 0,
                    kappa: vec![],
                },
                Vertex {
                    genus: 0,
                    kappa: vec![],
                },
            ],
            vec![
                HalfEdge { vertex: 0, psi: 0 },
                HalfEdge { vertex: 1, psi: 0 },
                HalfEdge { vertex: 0, psi: 0 },
                HalfEdge { vertex: 1, psi: 0 },
                HalfEdge { vertex: 0, psi: 0 },
                HalfEdge { vertex: 1, psi: 0 },
            ],
            vec![(0, 1), (2, 3), (4, 5)],
            vec![],
        )
        .unwrap();
        assert_eq!(g.genus(), 2);
        let (_, aut) = g.canonicalize();
        assert_eq!(aut, 12);
    }

    #[test]
    fn idempotent() {
        let (c1, _) = m11_boundary_graph().canonicalize();
        let (c2, _) = c1.canonicalize();
        assert_eq!(c1, c2);
    }
}
