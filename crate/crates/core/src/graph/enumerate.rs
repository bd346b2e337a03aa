//! Exhaustive enumeration of isomorphism classes of stable dual graphs of a
//! given degree on one moduli factor.
//!
//! The generator walks over vertex counts, connected multigraph structures,
//! genus and marking assignments, and decoration distributions; duplicates
//! are removed through canonical forms, so the output is a duplicate-free
//! list in a deterministic order.

use std::collections::BTreeSet;

use super::{DualGraph, HalfEdge, Marking, ModuliFactor, Tail, Vertex};
use crate::error::Error;
use crate::Result;

/// All stable dual graphs of the given degree on the factor, canonical and
/// sorted.  Degree = edges + psi-exponents + kappa indices.
pub fn enumerate_graphs(factor: &ModuliFactor, degree: u32) -> Result<Vec<DualGraph>> {
    if degree > factor.dimension() {
        return Err(Error::DegreeExceedsDimension {
            degree,
            dimension: factor.dimension(),
        });
    }
    let g = factor.genus;
    let markings: Vec<Marking> = factor.markings.iter().copied().collect();
    let n = markings.len();
    let mut out: BTreeSet<DualGraph> = BTreeSet::new();

    for num_edges in 0..=degree {
        let remaining = degree - num_edges;
        let e = num_edges as usize;
        let v_min = (e + 1).saturating_sub(g as usize).max(1);
        for num_vertices in v_min..=e + 1 {
            let b1 = (e + 1 - num_vertices) as u32;
            let genus_budget = g - b1; // v_min guarantees b1 <= g
            for edge_multiset in edge_multisets(num_vertices, e) {
                if !connected(num_vertices, &edge_multiset) {
                    continue;
                }
                let mut he_deg = vec![0usize; num_vertices];
                for &(a, b) in &edge_multiset {
                    he_deg[a] += 1;
                    he_deg[b] += 1;
                }
                for genera in compositions(genus_budget, num_vertices) {
                    for assignment in functions(n, num_vertices) {
                        let mut valence = he_deg.clone();
                        for &vtx in &assignment {
                            valence[vtx] += 1;
                        }
                        let stable = (0..num_vertices).all(|v| {
                            2 * genera[v] as i64 - 2 + valence[v] as i64 > 0
                        });
                        if !stable {
                            continue;
                        }
                        decorate(
                            &genera,
                            &edge_multiset,
                            &markings,
                            &assignment,
                            remaining,
                            &mut out,
                        );
                    }
                }
            }
        }
    }
    Ok(out.into_iter().collect())
}

/// Distributes `budget` over psi-exponents (half-edges then tails) and
/// per-vertex kappa partitions, pushing every canonical result.
fn decorate(
    genera: &[u32],
    edges: &[(usize, usize)],
    markings: &[Marking],
    assignment: &[usize],
    budget: u32,
    out: &mut BTreeSet<DualGraph>,
) {
    let nh = 2 * edges.len();
    let nt = markings.len();
    let nv = genera.len();
    for slots in compositions(budget, nh + nt + nv) {
        let (psi_he, rest) = slots.split_at(nh);
        let (psi_tail, kappa_budget) = rest.split_at(nt);

        // Every vertex kappa budget expands into all partitions.
        let per_vertex: Vec<Vec<Vec<u32>>> =
            kappa_budget.iter().map(|&q| partitions(q)).collect();
        let mut idx = vec![0usize; nv];
        let mut done = false;
        while !done {
            let vertices: Vec<Vertex> = (0..nv)
                .map(|v| Vertex {
                    genus: genera[v],
                    kappa: per_vertex[v][idx[v]].clone(),
                })
                .collect();
            let mut half_edges = Vec::with_capacity(nh);
            let mut edge_pairs = Vec::with_capacity(edges.len());
            for (k, &(a, b)) in edges.iter().enumerate() {
                half_edges.push(HalfEdge {
                    vertex: a,
                    psi: psi_he[2 * k],
                });
                half_edges.push(HalfEdge {
                    vertex: b,
                    psi: psi_he[2 * k + 1],
                });
                edge_pairs.push((2 * k, 2 * k + 1));
            }
            let tails: Vec<Tail> = markings
                .iter()
                .zip(assignment)
                .zip(psi_tail)
                .map(|((&marking, &vertex), &psi)| Tail {
                    vertex,
                    marking,
                    psi,
                })
                .collect();
            if let Ok(graph) = DualGraph::new(vertices, half_edges, edge_pairs, tails) {
                out.insert(graph.canonicalize().0);
            }

            let mut c = 0;
            loop {
                if c == nv {
                    done = true;
                    break;
                }
                idx[c] += 1;
                if idx[c] < per_vertex[c].len() {
                    break;
                }
                idx[c] = 0;
                c += 1;
            }
        }
    }
}

fn connected(nv: usize, edges: &[(usize, usize)]) -> bool {
    let mut reach = vec![false; nv];
    reach[0] = true;
    let mut stack = vec![0usize];
    while let Some(v) = stack.pop() {
        for &(a, b) in edges {
            for (x, y) in [(a, b), (b, a)] {
                if x == v && !reach[y] {
                    reach[y] = true;
                    stack.push(y);
                }
            }
        }
    }
    reach.into_iter().all(|r| r)
}

/// Multisets of `e` unordered vertex pairs (loops allowed) on `nv` vertices.
fn edge_multisets(nv: usize, e: usize) -> Vec<Vec<(usize, usize)>> {
    let mut pairs = Vec::new();
    for i in 0..nv {
        for j in i..nv {
            pairs.push((i, j));
        }
    }
    let mut out = Vec::new();
    let mut current = Vec::new();
    multisets_rec(&pairs, 0, e, &mut current, &mut out);
    out
}

fn multisets_rec(
    pairs: &[(usize, usize)],
    from: usize,
    remaining: usize,
    current: &mut Vec<(usize, usize)>,
    out: &mut Vec<Vec<(usize, usize)>>,
) {
    if remaining == 0 {
        out.push(current.clone());
        return;
    }
    for i in from..pairs.len() {
        current.push(pairs[i]);
        multisets_rec(pairs, i, remaining - 1, current, out);
        current.pop();
    }
}

/// Nonnegative integer vectors of length `parts` summing to `total`.
pub(crate) fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut tail in compositions(total - first, parts - 1) {
            let mut v = vec![first];
            v.append(&mut tail);
            out.push(v);
        }
    }
    out
}

/// Partitions of `total` into weakly increasing parts >= 1.
pub(crate) fn partitions(total: u32) -> Vec<Vec<u32>> {
    fn rec(total: u32, min: u32) -> Vec<Vec<u32>> {
        if total == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first in min..=total {
            for mut tail in rec(total - first, first) {
                let mut v = vec![first];
                v.append(&mut tail);
                out.push(v);
            }
        }
        out
    }
    rec(total, 1)
}

/// All maps `{0..n-1} -> {0..nv-1}`.
fn functions(n: usize, nv: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..n {
        let mut next = Vec::with_capacity(out.len() * nv);
        for f in &out {
            for v in 0..nv {
                let mut g = f.clone();
                g.push(v);
                next.push(g);
            }
        }
        out = next;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smooth_point_space() {
        let f = ModuliFactor::numbered(0, 3).unwrap();
        let got = enumerate_graphs(&f, 0).unwrap();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0], DualGraph::fundamental(&f));
    }

    #[test]
    fn m11_degree_one() {
        // psi on the tail, kappa_1 on the vertex, irreducible boundary.
        let f = ModuliFactor::numbered(1, 1).unwrap();
        let got = enumerate_graphs(&f, 1).unwrap();
        assert_eq!(got.len(), 3, "{got:?}");
        assert!(got.iter().all(|g| g.degree() == 1 && g.genus() == 1));
        assert_eq!(got.iter().filter(|g| !g.edges().is_empty()).count(), 1);
        assert_eq!(
            got.iter()
                .filter(|g| g.vertices().iter().any(|v| !v.kappa.is_empty()))
                .count(),
            1
        );
    }

    #[test]
    fn m2_degree_zero() {
        let f = ModuliFactor::new(2, Default::default()).unwrap();
        let got = enumerate_graphs(&f, 0).unwrap();
        assert_eq!(got.len(), 1);
    }

    #[test]
    fn degree_beyond_dimension_rejected() {
        let f = ModuliFactor::numbered(1, 1).unwrap();
        assert!(enumerate_graphs(&f, 2).is_err());
    }

    #[test]
    fn closed_under_canonicalize_and_stable() {
        let f = ModuliFactor::numbered(1, 2).unwrap();
        for d in 0..=2 {
            for g in enumerate_graphs(&f, d).unwrap() {
                let (c, _) = g.canonicalize();
                assert_eq!(c, g);
                assert_eq!(g.degree(), d);
                assert_eq!(g.genus(), 1);
            }
        }
    }
}
