//! Decorated stable dual graphs and formal sums of them.
//!
//! A [`DualGraph`] records the topological type of a stable curve together
//! with its decorations: a genus and a kappa multi-index at every vertex, a
//! psi-exponent on every half-edge and tail.  Graphs are compared through
//! their canonical form (see [`canon`]); the canonical text serialization is
//! both the map key and the on-disk format.

mod canon;
mod enumerate;
mod kappa;
mod sum;

pub use enumerate::enumerate_graphs;
pub use kappa::{
    kappa_mono_to_multi, kappa_multi_product, kappa_multi_to_monomials, kappa_pullback,
    KappaExpansion, KappaPullback, PullbackMap,
};
pub use sum::{GraphSum, GraphTuple};

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use crate::error::Error;
use crate::Result;

/// A marked-point label.
///
/// Boundary restriction introduces the reserved pair `alpha`/`beta`; nested
/// applications use increasing depths so that marking sets stay disjoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Marking {
    Num(u32),
    Alpha(u32),
    Beta(u32),
    /// Transient label of a kappa-tail introduced by kappa elimination.
    Kappa(u32),
}

impl Marking {
    /// Depth of a reserved label, if it is one.
    pub fn reserved_depth(&self) -> Option<u32> {
        match self {
            Marking::Num(_) | Marking::Kappa(_) => None,
            Marking::Alpha(d) | Marking::Beta(d) => Some(*d),
        }
    }
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Marking::Num(k) => write!(f, "{k}"),
            Marking::Alpha(0) => write!(f, "a"),
            Marking::Alpha(d) => write!(f, "a{d}"),
            Marking::Beta(0) => write!(f, "b"),
            Marking::Beta(d) => write!(f, "b{d}"),
            Marking::Kappa(i) => write!(f, "k{i}"),
        }
    }
}

impl FromStr for Marking {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("bad marking {s:?}"));
        if let Some(rest) = s.strip_prefix('a') {
            let d = if rest.is_empty() {
                0
            } else {
                rest.parse().map_err(|_| bad())?
            };
            Ok(Marking::Alpha(d))
        } else if let Some(rest) = s.strip_prefix('b') {
            let d = if rest.is_empty() {
                0
            } else {
                rest.parse().map_err(|_| bad())?
            };
            Ok(Marking::Beta(d))
        } else if let Some(rest) = s.strip_prefix('k') {
            Ok(Marking::Kappa(rest.parse().map_err(|_| bad())?))
        } else {
            Ok(Marking::Num(s.parse().map_err(|_| bad())?))
        }
    }
}

/// Vertex decoration: geometric genus and a kappa multi-index
/// (sorted, all indices >= 1).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Vertex {
    pub genus: u32,
    pub kappa: Vec<u32>,
}

/// Half of an edge, rooted at a vertex and carrying a psi-exponent.
/// Its label is its index in the graph's half-edge list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HalfEdge {
    pub vertex: usize,
    pub psi: u32,
}

/// A marked point: host vertex, marking and psi-exponent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tail {
    pub vertex: usize,
    pub marking: Marking,
    pub psi: u32,
}

/// A connected stable dual graph with decorations.
///
/// Invariants (checked by [`DualGraph::new`]): every half-edge belongs to
/// exactly one edge, every vertex is stable, markings are pairwise distinct,
/// kappa indices are positive, and the graph is connected.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DualGraph {
    vertices: Vec<Vertex>,
    half_edges: Vec<HalfEdge>,
    edges: Vec<(usize, usize)>,
    tails: Vec<Tail>,
}

impl DualGraph {
    pub fn new(
        vertices: Vec<Vertex>,
        half_edges: Vec<HalfEdge>,
        edges: Vec<(usize, usize)>,
        mut tails: Vec<Tail>,
    ) -> Result<Self> {
        if vertices.is_empty() {
            return Err(Error::InvalidGraph("no vertices".into()));
        }
        for (i, he) in half_edges.iter().enumerate() {
            if he.vertex >= vertices.len() {
                return Err(Error::InvalidGraph(format!(
                    "half-edge {i} attached to missing vertex {}",
                    he.vertex
                )));
            }
        }
        let mut seen = vec![0usize; half_edges.len()];
        let mut edges: Vec<(usize, usize)> = edges
            .into_iter()
            .map(|(a, b)| if a <= b { (a, b) } else { (b, a) })
            .collect();
        edges.sort_unstable();
        for &(a, b) in &edges {
            if a == b {
                return Err(Error::InvalidGraph(format!(
                    "edge pairs half-edge {a} with itself"
                )));
            }
            for h in [a, b] {
                if h >= half_edges.len() {
                    return Err(Error::InvalidGraph(format!("edge uses missing half-edge {h}")));
                }
                seen[h] += 1;
            }
        }
        if let Some(h) = seen.iter().position(|&c| c != 1) {
            return Err(Error::InvalidGraph(format!(
                "half-edge {h} belongs to {} edges instead of exactly one",
                seen[h]
            )));
        }
        for (i, t) in tails.iter().enumerate() {
            if t.vertex >= vertices.len() {
                return Err(Error::InvalidGraph(format!(
                    "tail {i} attached to missing vertex {}",
                    t.vertex
                )));
            }
        }
        let mut vertices = vertices;
        for (i, v) in vertices.iter_mut().enumerate() {
            v.kappa.sort_unstable();
            if v.kappa.first() == Some(&0) {
                return Err(Error::InvalidGraph(format!(
                    "vertex {i} carries kappa index 0"
                )));
            }
        }
        tails.sort_by_key(|t| (t.vertex, t.marking, t.psi));
        let markings: Vec<Marking> = tails.iter().map(|t| t.marking).collect();
        let distinct: BTreeSet<Marking> = markings.iter().copied().collect();
        if distinct.len() != markings.len() {
            return Err(Error::InvalidGraph("repeated marking".into()));
        }

        let graph = DualGraph {
            vertices,
            half_edges,
            edges,
            tails,
        };
        for (i, _) in graph.vertices.iter().enumerate() {
            if !graph.vertex_is_stable(i) {
                return Err(Error::InvalidGraph(format!(
                    "vertex {i} unstable: genus {}, valence {}",
                    graph.vertices[i].genus,
                    graph.vertex_valence(i)
                )));
            }
        }
        if !graph.is_connected() {
            return Err(Error::InvalidGraph("graph is not connected".into()));
        }
        Ok(graph)
    }

    /// Smooth one-vertex graph: the fundamental class of a moduli factor.
    pub fn fundamental(factor: &ModuliFactor) -> Self {
        let tails = factor
            .markings
            .iter()
            .map(|&m| Tail {
                vertex: 0,
                marking: m,
                psi: 0,
            })
            .collect();
        DualGraph::new(
            vec![Vertex {
                genus: factor.genus,
                kappa: vec![],
            }],
            vec![],
            vec![],
            tails,
        )
        .expect("factor is stable")
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn half_edges(&self) -> &[HalfEdge] {
        &self.half_edges
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn tails(&self) -> &[Tail] {
        &self.tails
    }

    /// Number of half-edges plus tails at vertex `v`.
    pub fn vertex_valence(&self, v: usize) -> usize {
        self.half_edges.iter().filter(|h| h.vertex == v).count()
            + self.tails.iter().filter(|t| t.vertex == v).count()
    }

    fn vertex_is_stable(&self, v: usize) -> bool {
        2 * self.vertices[v].genus as i64 - 2 + self.vertex_valence(v) as i64 > 0
    }

    fn is_connected(&self) -> bool {
        let n = self.vertices.len();
        let mut reach = vec![false; n];
        let mut stack = vec![0usize];
        reach[0] = true;
        while let Some(v) = stack.pop() {
            for &(a, b) in &self.edges {
                let (va, vb) = (self.half_edges[a].vertex, self.half_edges[b].vertex);
                for (x, y) in [(va, vb), (vb, va)] {
                    if x == v && !reach[y] {
                        reach[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        reach.into_iter().all(|r| r)
    }

    /// Total genus: sum of vertex genera plus the first Betti number.
    pub fn genus(&self) -> u32 {
        let gv: u32 = self.vertices.iter().map(|v| v.genus).sum();
        gv + self.edges.len() as u32 + 1 - self.vertices.len() as u32
    }

    /// Algebraic degree of the class: edges + all psi-exponents + all
    /// kappa indices.
    pub fn degree(&self) -> u32 {
        let psi: u32 = self
            .half_edges
            .iter()
            .map(|h| h.psi)
            .chain(self.tails.iter().map(|t| t.psi))
            .sum();
        let kap: u32 = self
            .vertices
            .iter()
            .flat_map(|v| v.kappa.iter().copied())
            .sum();
        self.edges.len() as u32 + psi + kap
    }

    /// The marking set carried by the tails.
    pub fn markings(&self) -> BTreeSet<Marking> {
        self.tails.iter().map(|t| t.marking).collect()
    }

    /// Canonical form plus the number of decoration-preserving self-maps.
    pub fn canonicalize(&self) -> (DualGraph, u64) {
        canon::canonicalize(self)
    }

    /// Partner half-edge across the unique edge containing `h`.
    pub fn partner(&self, h: usize) -> usize {
        for &(a, b) in &self.edges {
            if a == h {
                return b;
            }
            if b == h {
                return a;
            }
        }
        unreachable!("half-edge {h} has no edge");
    }

    /// Indices of half-edges rooted at `v`.
    pub fn half_edges_at(&self, v: usize) -> Vec<usize> {
        (0..self.half_edges.len())
            .filter(|&h| self.half_edges[h].vertex == v)
            .collect()
    }

    /// Tail carrying marking `m`, if present.
    pub fn tail_with_marking(&self, m: Marking) -> Option<usize> {
        self.tails.iter().position(|t| t.marking == m)
    }
}

impl fmt::Display for DualGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V=")?;
        for v in &self.vertices {
            write!(f, "({};", v.genus)?;
            for (i, k) in v.kappa.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{k}")?;
            }
            write!(f, ")")?;
        }
        write!(f, "|E=")?;
        for &(a, b) in &self.edges {
            write!(f, "({a},{b})")?;
        }
        write!(f, "|T=")?;
        for t in &self.tails {
            write!(f, "({},{},{})", t.vertex, t.marking, t.psi)?;
        }
        write!(f, "|H=")?;
        for (i, h) in self.half_edges.iter().enumerate() {
            write!(f, "({},{},{})", h.vertex, h.psi, i)?;
        }
        Ok(())
    }
}

fn split_parenthesized(section: &str, what: &str) -> Result<Vec<String>> {
    let s = section.trim();
    if s.is_empty() {
        return Ok(vec![]);
    }
    if !s.starts_with('(') || !s.ends_with(')') {
        return Err(Error::Parse(format!("bad {what} section {s:?}")));
    }
    Ok(s[1..s.len() - 1]
        .split(")(")
        .map(|p| p.to_string())
        .collect())
}

impl FromStr for DualGraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut sections = [None, None, None, None];
        for part in s.trim().split('|') {
            let (idx, rest) = if let Some(r) = part.strip_prefix("V=") {
                (0, r)
            } else if let Some(r) = part.strip_prefix("E=") {
                (1, r)
            } else if let Some(r) = part.strip_prefix("T=") {
                (2, r)
            } else if let Some(r) = part.strip_prefix("H=") {
                (3, r)
            } else {
                return Err(Error::Parse(format!("unknown graph section {part:?}")));
            };
            sections[idx] = Some(rest.to_string());
        }
        let [sv, se, st, sh] = sections;
        let (sv, se, st, sh) = (
            sv.ok_or_else(|| Error::Parse("missing V section".into()))?,
            se.unwrap_or_default(),
            st.unwrap_or_default(),
            sh.unwrap_or_default(),
        );

        let mut vertices = Vec::new();
        for item in split_parenthesized(&sv, "V")? {
            let (g, ks) = item
                .split_once(';')
                .ok_or_else(|| Error::Parse(format!("bad vertex {item:?}")))?;
            let genus = g
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad genus {g:?}")))?;
            let kappa = if ks.trim().is_empty() {
                vec![]
            } else {
                ks.split(',')
                    .map(|k| {
                        k.trim()
                            .parse()
                            .map_err(|_| Error::Parse(format!("bad kappa index {k:?}")))
                    })
                    .collect::<Result<Vec<u32>>>()?
            };
            vertices.push(Vertex { genus, kappa });
        }

        let fields = |item: &str, n: usize| -> Result<Vec<String>> {
            let parts: Vec<String> = item.split(',').map(|x| x.trim().to_string()).collect();
            if parts.len() != n {
                return Err(Error::Parse(format!("expected {n} fields in {item:?}")));
            }
            Ok(parts)
        };
        let int = |x: &str| -> Result<usize> {
            x.parse()
                .map_err(|_| Error::Parse(format!("bad integer {x:?}")))
        };

        let mut edges = Vec::new();
        for item in split_parenthesized(&se, "E")? {
            let p = fields(&item, 2)?;
            edges.push((int(&p[0])?, int(&p[1])?));
        }
        let mut tails = Vec::new();
        for item in split_parenthesized(&st, "T")? {
            let p = fields(&item, 3)?;
            tails.push(Tail {
                vertex: int(&p[0])?,
                marking: p[1].parse()?,
                psi: int(&p[2])? as u32,
            });
        }
        let mut half_edges = Vec::new();
        for (i, item) in split_parenthesized(&sh, "H")?.into_iter().enumerate() {
            let p = fields(&item, 3)?;
            if int(&p[2])? != i {
                return Err(Error::Parse(format!(
                    "half-edge labels must be consecutive from 0, got {item:?}"
                )));
            }
            half_edges.push(HalfEdge {
                vertex: int(&p[0])?,
                psi: int(&p[1])? as u32,
            });
        }
        DualGraph::new(vertices, half_edges, edges, tails)
    }
}

/// One moduli factor `Mbar_{g,S}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ModuliFactor {
    pub genus: u32,
    pub markings: BTreeSet<Marking>,
}

impl ModuliFactor {
    pub fn new(genus: u32, markings: BTreeSet<Marking>) -> Result<Self> {
        if 2 * genus as i64 - 2 + markings.len() as i64 <= 0 {
            return Err(Error::Unstable {
                genus,
                points: markings.len(),
            });
        }
        Ok(ModuliFactor { genus, markings })
    }

    /// Factor with markings 1..=n.
    pub fn numbered(genus: u32, n: u32) -> Result<Self> {
        ModuliFactor::new(genus, (1..=n).map(Marking::Num).collect())
    }

    pub fn dimension(&self) -> u32 {
        (3 * self.genus as i64 - 3 + self.markings.len() as i64) as u32
    }

    /// A graph lives on this factor when genus and markings agree.
    pub fn admits(&self, g: &DualGraph) -> bool {
        g.genus() == self.genus && g.markings() == self.markings
    }
}

impl fmt::Display for ModuliFactor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M({};", self.genus)?;
        for (i, m) in self.markings.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, ")")
    }
}

/// A product of moduli factors; classes on it are tuples of dual graphs.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AmbientSpace {
    factors: Vec<ModuliFactor>,
}

impl AmbientSpace {
    pub fn new(factors: Vec<ModuliFactor>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::InvalidGraph("ambient space with no factors".into()));
        }
        Ok(AmbientSpace { factors })
    }

    pub fn single(factor: ModuliFactor) -> Self {
        AmbientSpace {
            factors: vec![factor],
        }
    }

    /// `Mbar_{g,n}` with markings 1..=n.
    pub fn numbered(genus: u32, n: u32) -> Result<Self> {
        Ok(Self::single(ModuliFactor::numbered(genus, n)?))
    }

    pub fn factors(&self) -> &[ModuliFactor] {
        &self.factors
    }

    pub fn dimension(&self) -> u32 {
        self.factors.iter().map(|f| f.dimension()).sum()
    }

    /// Smallest reserved-label depth unused anywhere in the space.
    pub fn fresh_reserved_depth(&self) -> u32 {
        self.factors
            .iter()
            .flat_map(|f| f.markings.iter())
            .filter_map(|m| m.reserved_depth())
            .map(|d| d + 1)
            .max()
            .unwrap_or(0)
    }
}

impl fmt::Display for AmbientSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, factor) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " x ")?;
            }
            write!(f, "{factor}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn m11_psi_graph() -> DualGraph {
        DualGraph::new(
            vec![Vertex {
                genus: 1,
                kappa: vec![],
            }],
            vec![],
            vec![],
            vec![Tail {
                vertex: 0,
                marking: Marking::Num(1),
                psi: 1,
            }],
        )
        .unwrap()
    }

    pub(crate) fn m11_boundary_graph() -> DualGraph {
        DualGraph::new(
            vec![Vertex {
                genus: 0,
                kappa: vec![],
            }],
            vec![HalfEdge { vertex: 0, psi: 0 }, HalfEdge { vertex: 0, psi: 0 }],
            vec![(0, 1)],
            vec![Tail {
                vertex: 0,
                marking: Marking::Num(1),
                psi: 0,
            }],
        )
        .unwrap()
    }

    #[test]
    fn genus_and_degree() {
        let g = m11_boundary_graph();
        assert_eq!(g.genus(), 1);
        assert_eq!(g.degree(), 1);
        let s = m11_psi_graph();
        assert_eq!(s.genus(), 1);
        assert_eq!(s.degree(), 1);
    }

    #[test]
    fn rejects_unstable_vertex() {
        let r = DualGraph::new(
            vec![Vertex {
                genus: 0,
                kappa: vec![],
            }],
            vec![],
            vec![],
            vec![
                Tail {
                    vertex: 0,
                    marking: Marking::Num(1),
                    psi: 0,
                },
                Tail {
                    vertex: 0,
                    marking: Marking::Num(2),
                    psi: 0,
                },
            ],
        );
        let err = format!("{}", r.unwrap_err());
        assert!(err.contains("vertex 0 unstable"), "{err}");
    }

    #[test]
    fn rejects_dangling_half_edge() {
        let r = DualGraph::new(
            vec![Vertex {
                genus: 1,
                kappa: vec![],
            }],
            vec![HalfEdge { vertex: 0, psi: 0 }],
            vec![],
            vec![Tail {
                vertex: 0,
                marking: Marking::Num(1),
                psi: 0,
            }],
        );
        let err = format!("{}", r.unwrap_err());
        assert!(err.contains("half-edge 0"), "{err}");
    }

    #[test]
    fn rejects_disconnected() {
        let r = DualGraph::new(
            vec![
                Vertex {
                    genus: 1,
                    kappa: vec![],
                },
                Vertex {
                    genus: 1,
                    kappa: vec![],
                },
            ],
            vec![],
            vec![],
            vec![
                Tail {
                    vertex: 0,
                    marking: Marking::Num(1),
                    psi: 0,
                },
                Tail {
                    vertex: 1,
                    marking: Marking::Num(2),
                    psi: 0,
                },
            ],
        );
        assert!(r.is_err());
    }

    #[test]
    fn display_parse_round_trip() {
        for g in [m11_psi_graph(), m11_boundary_graph()] {
            let s = g.to_string();
            let back: DualGraph = s.parse().unwrap();
            assert_eq!(back, g);
            assert_eq!(back.to_string(), s);
        }
    }

    #[test]
    fn marking_round_trip() {
        for m in [
            Marking::Num(7),
            Marking::Alpha(0),
            Marking::Beta(0),
            Marking::Alpha(3),
            Marking::Beta(12),
        ] {
            let s = m.to_string();
            assert_eq!(s.parse::<Marking>().unwrap(), m);
        }
    }
}
