//! Boundary restriction operators on graph sums and the rho polynomial
//! calculus on the node covering space.
//!
//! `tau(k, L)` cuts edges, splits vertices and drops genus, producing for
//! every boundary component of the ambient factor the restricted class with
//! two new tails `alpha`, `beta`.  The covering space of nodes is the
//! disjoint union of one nonseparating component `Mbar_{g-1, S+{a,b}}` and
//! one component `Mbar_{g1, S1+{a}} x Mbar_{g2, S2+{b}}` per ordered stable
//! split, so outputs are grouped by component.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::Error;
use crate::graph::{
    AmbientSpace, DualGraph, GraphSum, GraphTuple, HalfEdge, Marking, ModuliFactor, Tail, Vertex,
};
use crate::rat::{rat, Rat};
use crate::Result;

/// One connected component of the double cover of the node locus of a
/// moduli factor.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BoundaryComponentId {
    /// `Mbar_{g-1, S + {alpha, beta}}`.
    Nonseparating,
    /// `Mbar_{g1, S1 + {alpha}} x Mbar_{g2, S2 + {beta}}`; the split is
    /// ordered (alpha side first) and `markings_first` excludes `alpha`.
    Separating {
        genus_first: u32,
        markings_first: BTreeSet<Marking>,
    },
}

impl std::fmt::Display for BoundaryComponentId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            BoundaryComponentId::Nonseparating => write!(f, "irr"),
            BoundaryComponentId::Separating {
                genus_first,
                markings_first,
            } => {
                write!(f, "sep({genus_first};")?;
                for (i, m) in markings_first.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{m}")?;
                }
                write!(f, ")")
            }
        }
    }
}

/// All boundary components of one moduli factor, in a deterministic order.
pub fn boundary_components(factor: &ModuliFactor) -> Vec<BoundaryComponentId> {
    let mut out = Vec::new();
    if factor.genus >= 1 {
        out.push(BoundaryComponentId::Nonseparating);
    }
    let marks: Vec<Marking> = factor.markings.iter().copied().collect();
    for g1 in 0..=factor.genus {
        let g2 = factor.genus - g1;
        for mask in 0..(1u64 << marks.len()) {
            let s1: BTreeSet<Marking> = marks
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, &m)| m)
                .collect();
            let n1 = s1.len() + 1;
            let n2 = marks.len() - s1.len() + 1;
            if 2 * g1 as i64 - 2 + n1 as i64 > 0 && 2 * g2 as i64 - 2 + n2 as i64 > 0 {
                out.push(BoundaryComponentId::Separating {
                    genus_first: g1,
                    markings_first: s1,
                });
            }
        }
    }
    out.sort();
    out
}

/// The moduli factors a component consists of, with reserved labels of the
/// given depth.
pub fn component_factors(
    factor: &ModuliFactor,
    id: &BoundaryComponentId,
    depth: u32,
) -> Vec<ModuliFactor> {
    let alpha = Marking::Alpha(depth);
    let beta = Marking::Beta(depth);
    match id {
        BoundaryComponentId::Nonseparating => {
            let mut s = factor.markings.clone();
            s.insert(alpha);
            s.insert(beta);
            vec![ModuliFactor::new(factor.genus - 1, s).expect("stable by construction")]
        }
        BoundaryComponentId::Separating {
            genus_first,
            markings_first,
        } => {
            let mut s1 = markings_first.clone();
            s1.insert(alpha);
            let mut s2: BTreeSet<Marking> = factor
                .markings
                .difference(markings_first)
                .copied()
                .collect();
            s2.insert(beta);
            vec![
                ModuliFactor::new(*genus_first, s1).expect("stable by construction"),
                ModuliFactor::new(factor.genus - genus_first, s2).expect("stable by construction"),
            ]
        }
    }
}

/// The polynomial `rho_k = sum_{i+j=k-1} (-1)^j psi_a^i psi_b^j` on the
/// covering space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RhoPolynomial {
    /// `(alpha exponent, beta exponent, integer coefficient)`.
    terms: Vec<(u32, u32, i64)>,
}

impl RhoPolynomial {
    pub fn terms(&self) -> &[(u32, u32, i64)] {
        &self.terms
    }

    /// Product with `(psi_a + psi_b)`, collected.
    pub fn mul_psi_sum(&self) -> Vec<(u32, u32, i64)> {
        let mut acc: BTreeMap<(u32, u32), i64> = BTreeMap::new();
        for &(i, j, c) in &self.terms {
            *acc.entry((i + 1, j)).or_insert(0) += c;
            *acc.entry((i, j + 1)).or_insert(0) += c;
        }
        acc.into_iter()
            .filter(|&(_, c)| c != 0)
            .map(|((i, j), c)| (i, j, c))
            .collect()
    }
}

/// `rho_1 = 1`, `rho_2 = psi_a - psi_b`, and so on.
pub fn rho(k: u32) -> Result<RhoPolynomial> {
    if k == 0 {
        return Err(Error::NonPositiveTauIndex(0));
    }
    let mut terms = Vec::new();
    for i in 0..k {
        let j = k - 1 - i;
        terms.push((i, j, if j % 2 == 0 { 1 } else { -1 }));
    }
    Ok(RhoPolynomial { terms })
}

/// Raw material of one dual graph before the component split.
#[derive(Debug, Clone)]
struct Parts {
    vertices: Vec<Vertex>,
    half_edges: Vec<HalfEdge>,
    edges: Vec<(usize, usize)>,
    tails: Vec<Tail>,
}

impl Parts {
    fn of(g: &DualGraph) -> Self {
        Parts {
            vertices: g.vertices().to_vec(),
            half_edges: g.half_edges().to_vec(),
            edges: g.edges().to_vec(),
            tails: g.tails().to_vec(),
        }
    }

    /// Connected components with locally renumbered indices.
    fn split_components(&self) -> Vec<Parts> {
        let nv = self.vertices.len();
        let mut comp = vec![usize::MAX; nv];
        let mut count = 0;
        for start in 0..nv {
            if comp[start] != usize::MAX {
                continue;
            }
            comp[start] = count;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &(a, b) in &self.edges {
                    let va = self.half_edges[a].vertex;
                    let vb = self.half_edges[b].vertex;
                    for (x, y) in [(va, vb), (vb, va)] {
                        if x == v && comp[y] == usize::MAX {
                            comp[y] = count;
                            stack.push(y);
                        }
                    }
                }
            }
            count += 1;
        }

        let mut out = Vec::new();
        for c in 0..count {
            let mut vmap = vec![usize::MAX; nv];
            let mut vertices = Vec::new();
            for v in 0..nv {
                if comp[v] == c {
                    vmap[v] = vertices.len();
                    vertices.push(self.vertices[v].clone());
                }
            }
            let mut hmap = vec![usize::MAX; self.half_edges.len()];
            let mut half_edges = Vec::new();
            for (h, he) in self.half_edges.iter().enumerate() {
                if comp[he.vertex] == c {
                    hmap[h] = half_edges.len();
                    half_edges.push(HalfEdge {
                        vertex: vmap[he.vertex],
                        psi: he.psi,
                    });
                }
            }
            let edges = self
                .edges
                .iter()
                .filter(|&&(a, _)| comp[self.half_edges[a].vertex] == c)
                .map(|&(a, b)| (hmap[a], hmap[b]))
                .collect();
            let tails = self
                .tails
                .iter()
                .filter(|t| comp[t.vertex] == c)
                .map(|t| Tail {
                    vertex: vmap[t.vertex],
                    ..*t
                })
                .collect();
            out.push(Parts {
                vertices,
                half_edges,
                edges,
                tails,
            });
        }
        out
    }

    fn build(self) -> crate::Result<DualGraph> {
        DualGraph::new(self.vertices, self.half_edges, self.edges, self.tails)
    }
}

/// One candidate output term of the boundary restriction.
struct Candidate {
    coeff: Rat,
    parts: Parts,
}

/// Boundary restriction of a single-factor graph sum; the result maps each
/// boundary component of the ambient factor to the restricted class on it.
///
/// New tails are labeled with reserved markings of the first unused depth.
pub fn tau(k: u32, sum: &GraphSum) -> Result<BTreeMap<BoundaryComponentId, GraphSum>> {
    if sum.ambient().factors().len() != 1 {
        return Err(Error::InvalidGraph(
            "tau expects a single-factor ambient; use tau_on_factor".into(),
        ));
    }
    tau_on_factor(k, sum, 0)
}

/// Boundary restriction applied to one factor of a product ambient; the
/// remaining factors are carried through unchanged.
pub fn tau_on_factor(
    k: u32,
    sum: &GraphSum,
    factor_index: usize,
) -> Result<BTreeMap<BoundaryComponentId, GraphSum>> {
    if k == 0 {
        return Err(Error::NonPositiveTauIndex(0));
    }
    let factors = sum.ambient().factors();
    if factor_index >= factors.len() {
        return Err(Error::InvalidGraph(format!(
            "factor index {factor_index} out of range ({} factors)",
            factors.len()
        )));
    }
    let factor = &factors[factor_index];
    let depth = sum.ambient().fresh_reserved_depth();
    let alpha = Marking::Alpha(depth);
    let beta = Marking::Beta(depth);

    // One output sum per boundary component of the chosen factor.
    let mut out: BTreeMap<BoundaryComponentId, GraphSum> = BTreeMap::new();
    for id in boundary_components(factor) {
        let mut new_factors: Vec<ModuliFactor> = Vec::new();
        new_factors.extend_from_slice(&factors[..factor_index]);
        new_factors.extend(component_factors(factor, &id, depth));
        new_factors.extend_from_slice(&factors[factor_index + 1..]);
        out.insert(id, GraphSum::zero(AmbientSpace::new(new_factors)?));
    }

    for (tuple, coeff) in sum.terms() {
        let graph = &tuple.0[factor_index];
        for cand in restrict_graph(k, graph, alpha, beta) {
            let comps = cand.parts.split_components();
            let term_coeff = coeff * &cand.coeff;
            match comps.len() {
                1 => {
                    let g = match comps.into_iter().next().unwrap().build() {
                        Ok(g) => g,
                        Err(_) => continue, // unstable split output
                    };
                    debug_assert_eq!(g.genus() + 1, factor.genus);
                    let mut new_tuple = tuple.0.clone();
                    new_tuple[factor_index] = g;
                    let target = out
                        .get_mut(&BoundaryComponentId::Nonseparating)
                        .expect("nonseparating component exists when outputs do");
                    target.add_tuple(GraphTuple(new_tuple), term_coeff)?;
                }
                2 => {
                    let mut comps = comps;
                    // The alpha component goes first.
                    let has_alpha = |p: &Parts| p.tails.iter().any(|t| t.marking == alpha);
                    if has_alpha(&comps[1]) {
                        comps.swap(0, 1);
                    }
                    let pb = comps.pop().unwrap();
                    let pa = comps.pop().unwrap();
                    let (ga, gb) = match (pa.build(), pb.build()) {
                        (Ok(a), Ok(b)) => (a, b),
                        _ => continue, // unstable split output
                    };
                    let mut s1 = ga.markings();
                    s1.remove(&alpha);
                    let id = BoundaryComponentId::Separating {
                        genus_first: ga.genus(),
                        markings_first: s1,
                    };
                    let mut new_tuple: Vec<DualGraph> = Vec::new();
                    new_tuple.extend_from_slice(&tuple.0[..factor_index]);
                    new_tuple.push(ga);
                    new_tuple.push(gb);
                    new_tuple.extend_from_slice(&tuple.0[factor_index + 1..]);
                    let target = out.get_mut(&id).expect("stable split is a component");
                    target.add_tuple(GraphTuple(new_tuple), term_coeff)?;
                }
                n => unreachable!("boundary restriction produced {n} components"),
            }
        }
    }
    Ok(out)
}

/// The three defining operations applied to one graph; unstable outputs are
/// filtered later, when components are rebuilt.
fn restrict_graph(k: u32, g: &DualGraph, alpha: Marking, beta: Marking) -> Vec<Candidate> {
    let mut cands = Vec::new();
    let sign = |j: u32| if j % 2 == 0 { rat(1) } else { rat(-1) };

    // Operation 1: cut an edge into tails alpha, beta; the psi-exponent k
    // lands on either side (alpha side with coefficient 1, beta side with
    // (-1)^(k-1)).
    for (ei, &(ha, hb)) in g.edges().iter().enumerate() {
        for (h_alpha, h_beta) in [(ha, hb), (hb, ha)] {
            for (extra_a, extra_b, coeff) in
                [(k, 0, rat(1)), (0, k, sign((k - 1) % 2))]
            {
                let mut parts = Parts::of(g);
                parts.edges.remove(ei);
                let (a_vertex, a_psi) = {
                    let he = &g.half_edges()[h_alpha];
                    (he.vertex, he.psi)
                };
                let (b_vertex, b_psi) = {
                    let he = &g.half_edges()[h_beta];
                    (he.vertex, he.psi)
                };
                // Remove the two half-edges (larger index first) and remap.
                let mut remove = [h_alpha, h_beta];
                remove.sort_unstable();
                for &h in remove.iter().rev() {
                    parts.half_edges.remove(h);
                }
                let remap = |h: usize| h - remove.iter().filter(|&&r| r < h).count();
                for e in parts.edges.iter_mut() {
                    *e = (remap(e.0), remap(e.1));
                }
                parts.tails.push(Tail {
                    vertex: a_vertex,
                    marking: alpha,
                    psi: a_psi + extra_a,
                });
                parts.tails.push(Tail {
                    vertex: b_vertex,
                    marking: beta,
                    psi: b_psi + extra_b,
                });
                cands.push(Candidate { coeff, parts });
            }
        }
    }

    // Operation 2: split a vertex in two, adding tail alpha on one side and
    // beta on the other; the genus, incident half-edges, tails and kappa
    // indices are distributed in all ways; psi-labels (i, j) with
    // i + j = k - 1 and coefficient (-1)^(j+1).
    for v in 0..g.vertices().len() {
        let hv = g.half_edges_at(v);
        let tv: Vec<usize> = (0..g.tails().len())
            .filter(|&t| g.tails()[t].vertex == v)
            .collect();
        let kv = g.vertices()[v].kappa.clone();
        let gv = g.vertices()[v].genus;
        for g1 in 0..=gv {
            for hmask in 0..(1u64 << hv.len()) {
                for tmask in 0..(1u64 << tv.len()) {
                    for kmask in 0..(1u64 << kv.len()) {
                        for i in 0..k {
                            let j = k - 1 - i;
                            let coeff = -sign(j % 2);
                            let mut parts = Parts::of(g);
                            // v keeps index v with side-1 data; side 2 is
                            // appended as a new vertex.
                            let v2 = parts.vertices.len();
                            let (mut k1, mut k2) = (Vec::new(), Vec::new());
                            for (x, &ki) in kv.iter().enumerate() {
                                if kmask & (1 << x) != 0 {
                                    k1.push(ki);
                                } else {
                                    k2.push(ki);
                                }
                            }
                            parts.vertices[v] = Vertex {
                                genus: g1,
                                kappa: k1,
                            };
                            parts.vertices.push(Vertex {
                                genus: gv - g1,
                                kappa: k2,
                            });
                            for (x, &h) in hv.iter().enumerate() {
                                if hmask & (1 << x) == 0 {
                                    parts.half_edges[h].vertex = v2;
                                }
                            }
                            for (x, &t) in tv.iter().enumerate() {
                                if tmask & (1 << x) == 0 {
                                    parts.tails[t].vertex = v2;
                                }
                            }
                            parts.tails.push(Tail {
                                vertex: v,
                                marking: alpha,
                                psi: i,
                            });
                            parts.tails.push(Tail {
                                vertex: v2,
                                marking: beta,
                                psi: j,
                            });
                            cands.push(Candidate { coeff, parts });
                        }
                    }
                }
            }
        }
    }

    // Operation 3: drop the genus of a vertex by one and add both tails to
    // it; psi-labels (i, j) with i + j = k - 1 and coefficient (-1)^(j+1).
    for v in 0..g.vertices().len() {
        if g.vertices()[v].genus == 0 {
            continue;
        }
        for i in 0..k {
            let j = k - 1 - i;
            let coeff = -sign(j % 2);
            let mut parts = Parts::of(g);
            parts.vertices[v].genus -= 1;
            parts.tails.push(Tail {
                vertex: v,
                marking: alpha,
                psi: i,
            });
            parts.tails.push(Tail {
                vertex: v,
                marking: beta,
                psi: j,
            });
            cands.push(Candidate { coeff, parts });
        }
    }

    cands
}
