//! Formal rational linear combinations of canonical dual graphs over a
//! fixed ambient space.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::Zero;

use super::{AmbientSpace, DualGraph};
use crate::error::Error;
use crate::rat::{parse_rat, Rat};
use crate::Result;

/// One graph per ambient factor, each in canonical form.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GraphTuple(pub Vec<DualGraph>);

impl GraphTuple {
    pub fn degree(&self) -> u32 {
        self.0.iter().map(|g| g.degree()).sum()
    }

    /// Canonical key: factor keys joined by " & ".
    pub fn key(&self) -> String {
        self.0
            .iter()
            .map(|g| g.to_string())
            .collect::<Vec<_>>()
            .join(" & ")
    }

    pub fn parse(s: &str) -> Result<Self> {
        let graphs = s
            .split(" & ")
            .map(|p| p.trim().parse::<DualGraph>())
            .collect::<Result<Vec<_>>>()?;
        Ok(GraphTuple(graphs))
    }
}

impl fmt::Display for GraphTuple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.key())
    }
}

/// Homogeneous rational combination of graph tuples.
///
/// Terms are kept canonical, zero coefficients are pruned, and all terms
/// must share one degree (the empty sum has none).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphSum {
    ambient: AmbientSpace,
    degree: Option<u32>,
    terms: BTreeMap<GraphTuple, Rat>,
}

impl GraphSum {
    pub fn zero(ambient: AmbientSpace) -> Self {
        GraphSum {
            ambient,
            degree: None,
            terms: BTreeMap::new(),
        }
    }

    /// Single-graph sum with coefficient 1 (single-factor ambient).
    pub fn from_graph(ambient: AmbientSpace, graph: DualGraph) -> Result<Self> {
        let mut s = GraphSum::zero(ambient);
        s.add_graph(graph, Rat::from_integer(1.into()))?;
        Ok(s)
    }

    pub fn ambient(&self) -> &AmbientSpace {
        &self.ambient
    }

    /// Common degree of the terms; `None` for the zero sum.
    pub fn degree(&self) -> Option<u32> {
        self.degree
    }

    /// Dimension of the class: ambient dimension minus degree.
    pub fn dimension(&self) -> Option<i64> {
        self.degree
            .map(|d| self.ambient.dimension() as i64 - d as i64)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GraphTuple, &Rat)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `coeff` times the tuple, canonicalizing each factor graph and
    /// enforcing the ambient and homogeneity invariants.
    pub fn add_tuple(&mut self, tuple: GraphTuple, coeff: Rat) -> Result<()> {
        if coeff.is_zero() {
            return Ok(());
        }
        if tuple.0.len() != self.ambient.factors().len() {
            return Err(Error::InvalidGraph(format!(
                "tuple has {} factors, ambient has {}",
                tuple.0.len(),
                self.ambient.factors().len()
            )));
        }
        let mut canon = Vec::with_capacity(tuple.0.len());
        for (graph, factor) in tuple.0.into_iter().zip(self.ambient.factors()) {
            if !factor.admits(&graph) {
                return Err(Error::InvalidGraph(format!(
                    "graph (genus {}, markings {:?}) does not live on factor {factor}",
                    graph.genus(),
                    graph
                        .markings()
                        .iter()
                        .map(|m| m.to_string())
                        .collect::<Vec<_>>()
                )));
            }
            canon.push(graph.canonicalize().0);
        }
        let tuple = GraphTuple(canon);
        let d = tuple.degree();
        match self.degree {
            None => self.degree = Some(d),
            Some(existing) if existing != d => {
                return Err(Error::InhomogeneousSum(existing, d));
            }
            _ => {}
        }
        let entry = self.terms.entry(tuple).or_insert_with(Rat::zero);
        *entry += coeff;
        if entry.is_zero() {
            let key = self
                .terms
                .iter()
                .find(|(_, c)| c.is_zero())
                .map(|(k, _)| k.clone())
                .unwrap();
            self.terms.remove(&key);
        }
        if self.terms.is_empty() {
            self.degree = None;
        }
        Ok(())
    }

    /// Single-factor convenience form of [`GraphSum::add_tuple`].
    pub fn add_graph(&mut self, graph: DualGraph, coeff: Rat) -> Result<()> {
        self.add_tuple(GraphTuple(vec![graph]), coeff)
    }

    /// Adds `coeff` times another sum over the same ambient.
    pub fn add_scaled(&mut self, other: &GraphSum, coeff: &Rat) -> Result<()> {
        for (t, c) in other.terms() {
            self.add_tuple(t.clone(), c * coeff)?;
        }
        Ok(())
    }

    pub fn scale(&mut self, coeff: &Rat) {
        if coeff.is_zero() {
            self.terms.clear();
            self.degree = None;
            return;
        }
        for c in self.terms.values_mut() {
            *c *= coeff;
        }
    }

    /// Serializes as `coefficient<TAB>canonical-key` lines.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (t, c) in &self.terms {
            out.push_str(&format!("{c}\t{}\n", t.key()));
        }
        out
    }

    /// Parses the line format, ignoring blank lines and `#` comments.
    /// The ambient must be supplied by the caller.
    pub fn parse_text(ambient: AmbientSpace, text: &str) -> Result<Self> {
        let mut sum = GraphSum::zero(ambient);
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (coeff, key) = line
                .split_once('\t')
                .or_else(|| line.split_once(' '))
                .ok_or_else(|| {
                    Error::Parse(format!("expected `coefficient<TAB>graph-key`, got {line:?}"))
                })?;
            sum.add_tuple(GraphTuple::parse(key.trim())?, parse_rat(coeff)?)?;
        }
        Ok(sum)
    }
}

impl fmt::Display for GraphSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::{m11_boundary_graph, m11_psi_graph};
    use super::*;
    use crate::rat::{rat, ratio};

    fn m11() -> AmbientSpace {
        AmbientSpace::numbered(1, 1).unwrap()
    }

    #[test]
    fn homogeneity_enforced() {
        let mut s = GraphSum::zero(m11());
        s.add_graph(m11_psi_graph(), rat(1)).unwrap();
        let smooth = DualGraph::fundamental(&m11().factors()[0].clone());
        assert!(matches!(
            s.add_graph(smooth, rat(1)),
            Err(Error::InhomogeneousSum(1, 0))
        ));
    }

    #[test]
    fn zero_pruning() {
        let mut s = GraphSum::zero(m11());
        s.add_graph(m11_psi_graph(), rat(1)).unwrap();
        s.add_graph(m11_psi_graph(), rat(-1)).unwrap();
        assert!(s.is_zero());
        assert_eq!(s.degree(), None);
    }

    #[test]
    fn text_round_trip() {
        let mut s = GraphSum::zero(m11());
        s.add_graph(m11_psi_graph(), rat(1)).unwrap();
        s.add_graph(m11_boundary_graph(), ratio(-1, 12)).unwrap();
        let text = s.to_text();
        let back = GraphSum::parse_text(m11(), &text).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn ambient_mismatch_rejected() {
        let mut s = GraphSum::zero(m11());
        let m12 = AmbientSpace::numbered(1, 2).unwrap();
        let wrong = DualGraph::fundamental(&m12.factors()[0].clone());
        assert!(s.add_graph(wrong, rat(1)).is_err());
    }
}
