//! The Gorenstein-vanishing decision procedure, relation finder and rank
//! reports.
//!
//! A homogeneous class is Gorenstein vanishing iff (a) it pairs to zero
//! against every psi-kappa monomial of complementary degree and (b) every
//! boundary restriction `tau_1` of it, on every component of every factor,
//! is Gorenstein vanishing.  The recursion bottoms out at dimension zero
//! because `tau_1` lowers the dimension by one.  Restriction by `tau_k`
//! for `k >= 2` is the `rho_k`-multiple of the `tau_1` restriction and is
//! therefore redundant in the recursion.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;
use std::sync::{Mutex, OnceLock};

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use rayon::prelude::*;

use crate::error::Error;
use crate::eval::{monomials, pair, PsiKappaMonomial};
use crate::graph::{enumerate_graphs, AmbientSpace, DualGraph, GraphSum, ModuliFactor};
use crate::rat::Rat;
use crate::tau::{tau_on_factor, BoundaryComponentId};
use crate::Result;

/// Identifier of one constraint: the boundary-restriction path from the
/// root ambient followed by the pairing monomial on the final ambient.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestId {
    pub path: Vec<(usize, BoundaryComponentId)>,
    pub monomial: PsiKappaMonomial,
}

impl std::fmt::Display for TestId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "path=[")?;
        for (i, (factor, id)) in self.path.iter().enumerate() {
            if i > 0 {
                write!(f, "|")?;
            }
            write!(f, "f{factor}:{id}")?;
        }
        write!(f, "];M={}", self.monomial)
    }
}

/// Outcome of the decision procedure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    GorensteinVanishing,
    Fails(Witness),
}

/// A failing constraint, re-evaluatable through [`evaluate_test`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub test: TestId,
    pub value: Rat,
}

impl Verdict {
    pub fn is_vanishing(&self) -> bool {
        matches!(self, Verdict::GorensteinVanishing)
    }
}

/// Decides Gorenstein vanishing of a homogeneous class of nonnegative
/// dimension.  The zero class passes trivially.
pub fn check(sum: &GraphSum) -> Result<Verdict> {
    if sum.is_zero() {
        return Ok(Verdict::GorensteinVanishing);
    }
    let dim = sum.dimension().expect("nonzero sum is homogeneous");
    if dim < 0 {
        return Err(Error::NegativeDimension(dim));
    }
    match check_rec(sum, &mut Vec::new(), 1)? {
        None => Ok(Verdict::GorensteinVanishing),
        Some(w) => Ok(Verdict::Fails(w)),
    }
}

/// Variant recursion restricting by `tau_k`; `check` is the `k = 1` case.
pub fn check_with_tau(sum: &GraphSum, k: u32) -> Result<Verdict> {
    if sum.is_zero() {
        return Ok(Verdict::GorensteinVanishing);
    }
    let dim = sum.dimension().expect("nonzero sum is homogeneous");
    if dim < 0 {
        return Err(Error::NegativeDimension(dim));
    }
    match check_rec(sum, &mut Vec::new(), k)? {
        None => Ok(Verdict::GorensteinVanishing),
        Some(w) => Ok(Verdict::Fails(w)),
    }
}

fn check_rec(
    sum: &GraphSum,
    path: &mut Vec<(usize, BoundaryComponentId)>,
    k: u32,
) -> Result<Option<Witness>> {
    if sum.is_zero() {
        return Ok(None);
    }
    let dim = sum.dimension().expect("nonzero sum is homogeneous");
    if dim < 0 {
        // Classes of degree beyond the ambient dimension have no
        // complementary monomials and no deeper structure to test.
        return Ok(None);
    }
    for m in monomials(sum.ambient(), dim as u32) {
        let v = pair(sum, &m)?;
        if !v.is_zero() {
            return Ok(Some(Witness {
                test: TestId {
                    path: path.clone(),
                    monomial: m,
                },
                value: v,
            }));
        }
    }
    if dim >= 1 {
        for factor in 0..sum.ambient().factors().len() {
            for (id, component) in tau_on_factor(k, sum, factor)? {
                path.push((factor, id));
                let w = check_rec(&component, path, k)?;
                path.pop();
                if w.is_some() {
                    return Ok(w);
                }
            }
        }
    }
    Ok(None)
}

/// Re-evaluates one test on a class: walk the restriction path, then pair
/// with the monomial.  Missing components along the path give zero.
pub fn evaluate_test(sum: &GraphSum, test: &TestId) -> Result<Rat> {
    let mut current = sum.clone();
    for (factor, id) in &test.path {
        if current.is_zero() {
            return Ok(Rat::zero());
        }
        let mut parts = tau_on_factor(1, &current, *factor)?;
        match parts.remove(id) {
            Some(next) => current = next,
            None => return Ok(Rat::zero()),
        }
    }
    if current.is_zero() {
        return Ok(Rat::zero());
    }
    pair(&current, &test.monomial)
}

/// The constraint matrix of an enumeration of generator graphs: one column
/// per generator, one row per retained test.  Rows that are linearly
/// dependent on earlier ones are dropped during assembly, so the row count
/// never exceeds the generator count while the row space (hence the
/// nullspace) is unchanged.
#[derive(Debug, Clone)]
pub struct ConstraintMatrix {
    pub ambient: AmbientSpace,
    pub generators: Vec<DualGraph>,
    pub rows: Vec<(TestId, Vec<Rat>)>,
}

impl ConstraintMatrix {
    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn nullity(&self) -> usize {
        self.generators.len() - self.rows.len()
    }

    /// Exact rational basis of the nullspace, one vector per free
    /// generator, in a deterministic order.
    pub fn nullspace(&self) -> Vec<Vec<Rat>> {
        let rows: Vec<Vec<Rat>> = self.rows.iter().map(|(_, r)| r.clone()).collect();
        nullspace(&rows, self.generators.len())
    }

    /// CSV export: `test_id` column followed by one column per canonical
    /// generator key; entries in the exact `p/q` form.
    pub fn to_csv(&self) -> String {
        let quote = |s: &str| format!("\"{}\"", s.replace('"', "\"\""));
        let mut out = String::new();
        out.push_str("test_id");
        for g in &self.generators {
            out.push(',');
            out.push_str(&quote(&g.to_string()));
        }
        out.push('\n');
        for (id, row) in &self.rows {
            out.push_str(&quote(&id.to_string()));
            for v in row {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }
}

/// Incrementally reduced row basis used to keep only rank-increasing rows.
struct RankTracker {
    /// Reduced rows with their leading column.
    reduced: Vec<(usize, Vec<Rat>)>,
}

impl RankTracker {
    fn new() -> Self {
        RankTracker {
            reduced: Vec::new(),
        }
    }

    fn rank(&self) -> usize {
        self.reduced.len()
    }

    /// Returns true (and absorbs the row) when it enlarges the row space.
    fn offer(&mut self, row: &[Rat]) -> bool {
        let mut r = row.to_vec();
        for (lead, basis) in &self.reduced {
            if !r[*lead].is_zero() {
                let f = &r[*lead] / &basis[*lead];
                for (x, b) in r.iter_mut().zip(basis) {
                    *x -= &f * b;
                }
            }
        }
        match r.iter().position(|x| !x.is_zero()) {
            None => false,
            Some(lead) => {
                self.reduced.push((lead, r));
                self.reduced.sort_by_key(|(l, _)| *l);
                true
            }
        }
    }
}

/// Builds the constraint matrix for all generator graphs of the given
/// degree on a single-factor ambient.
///
/// `root_monomials = false` omits the pairing tests at the root (keeping
/// every test that involves at least one boundary restriction); this is the
/// recursion-only variant used to probe the necessity of the root pairing
/// condition.
pub fn constraint_matrix(
    factor: &ModuliFactor,
    degree: u32,
    root_monomials: bool,
) -> Result<ConstraintMatrix> {
    let ambient = AmbientSpace::single(factor.clone());
    let generators = enumerate_graphs(factor, degree)?;
    let n = generators.len();
    let mut rows: Vec<(TestId, Vec<Rat>)> = Vec::new();
    let mut tracker = RankTracker::new();

    // Depth-first walk over restriction states; identical states reached
    // along different paths contribute identical constraints and are
    // visited once.
    struct State {
        path: Vec<(usize, BoundaryComponentId)>,
        sums: Vec<GraphSum>,
    }
    let root_sums: Vec<GraphSum> = generators
        .iter()
        .map(|g| GraphSum::from_graph(ambient.clone(), g.clone()).expect("generator is valid"))
        .collect();
    let mut stack = vec![State {
        path: Vec::new(),
        sums: root_sums,
    }];
    let mut visited: HashSet<String> = HashSet::new();

    while let Some(state) = stack.pop() {
        if tracker.rank() == n {
            break; // full rank: the nullspace is already trivial
        }
        if state.sums.iter().all(|s| s.is_zero()) {
            continue;
        }
        let key = {
            let mut k = String::new();
            let ambient_here = state
                .sums
                .iter()
                .find(|s| !s.is_zero())
                .map(|s| s.ambient().to_string())
                .unwrap_or_default();
            k.push_str(&ambient_here);
            for s in &state.sums {
                k.push('|');
                k.push_str(&s.to_text());
            }
            k
        };
        if !visited.insert(key) {
            continue;
        }

        let dim = state
            .sums
            .iter()
            .filter_map(|s| s.dimension())
            .next()
            .expect("some sum is nonzero");
        if dim >= 0 && (root_monomials || !state.path.is_empty()) {
            let ambient_here = state
                .sums
                .iter()
                .find(|s| !s.is_zero())
                .map(|s| s.ambient().clone())
                .expect("some sum is nonzero");
            for m in monomials(&ambient_here, dim as u32) {
                let row: Vec<Rat> = state
                    .sums
                    .par_iter()
                    .map(|s| {
                        if s.is_zero() {
                            Ok(Rat::zero())
                        } else {
                            pair(s, &m)
                        }
                    })
                    .collect::<Result<Vec<_>>>()?;
                if tracker.offer(&row) {
                    rows.push((
                        TestId {
                            path: state.path.clone(),
                            monomial: m,
                        },
                        row,
                    ));
                    if tracker.rank() == n {
                        break;
                    }
                }
            }
        }
        if dim >= 1 {
            let nf = state
                .sums
                .iter()
                .find(|s| !s.is_zero())
                .map(|s| s.ambient().factors().len())
                .expect("some sum is nonzero");
            for factor_index in 0..nf {
                let restricted: Vec<_> = state
                    .sums
                    .par_iter()
                    .map(|s| tau_on_factor(1, s, factor_index))
                    .collect::<Result<Vec<_>>>()?;
                // Component ids present for this factor (from any sum).
                let ids: Vec<BoundaryComponentId> = {
                    let mut ids: Vec<_> = restricted
                        .iter()
                        .flat_map(|m| m.keys().cloned())
                        .collect();
                    ids.sort();
                    ids.dedup();
                    ids
                };
                for id in ids {
                    let sums: Vec<GraphSum> = restricted
                        .iter()
                        .zip(&state.sums)
                        .map(|(m, parent)| match m.get(&id) {
                            Some(s) => s.clone(),
                            // The parent was the zero sum: its restriction
                            // is the zero sum on the component's ambient.
                            None => {
                                let _ = parent;
                                GraphSum::zero(
                                    restricted
                                        .iter()
                                        .find_map(|m| m.get(&id))
                                        .expect("id came from some map")
                                        .ambient()
                                        .clone(),
                                )
                            }
                        })
                        .collect();
                    let mut path = state.path.clone();
                    path.push((factor_index, id));
                    stack.push(State { path, sums });
                }
            }
        }
    }

    Ok(ConstraintMatrix {
        ambient,
        generators,
        rows,
    })
}

/// Basis of Gorenstein-vanishing combinations of the degree-`degree`
/// generator graphs on the factor.  Every returned sum is verified against
/// [`check`] before being handed out.
pub fn find_relations(factor: &ModuliFactor, degree: u32) -> Result<Vec<GraphSum>> {
    let matrix = constraint_matrix(factor, degree, true)?;
    let ambient = AmbientSpace::single(factor.clone());
    let mut out = Vec::new();
    for vector in matrix.nullspace() {
        let mut sum = GraphSum::zero(ambient.clone());
        for (coeff, g) in vector.iter().zip(&matrix.generators) {
            if !coeff.is_zero() {
                sum.add_graph(g.clone(), coeff.clone())?;
            }
        }
        let verdict = check(&sum)?;
        assert!(
            verdict.is_vanishing(),
            "nullspace vector fails its own defining constraints: {verdict:?}"
        );
        out.push(sum);
    }
    Ok(out)
}

/// `(generator count, rank, nullity)` of the pairing constraint system.
pub fn gorenstein_rank(factor: &ModuliFactor, degree: u32) -> Result<(usize, usize, usize)> {
    let matrix = constraint_matrix(factor, degree, true)?;
    Ok((matrix.generators.len(), matrix.rank(), matrix.nullity()))
}

// ---------------------------------------------------------------------------
// Exact nullspace via fraction-free elimination

/// Nullspace basis of the row system, deterministic: Bareiss fraction-free
/// elimination on the denominator-cleared integer matrix, pivots chosen in
/// column order, one basis vector per free column.
pub fn nullspace(rows: &[Vec<Rat>], cols: usize) -> Vec<Vec<Rat>> {
    if rows.is_empty() {
        // Everything is free.
        return (0..cols)
            .map(|i| {
                let mut v = vec![Rat::zero(); cols];
                v[i] = Rat::from_integer(1.into());
                v
            })
            .collect();
    }

    // Clear denominators row by row.
    let mut m: Vec<Vec<BigInt>> = rows
        .iter()
        .map(|row| {
            let mut lcm = BigInt::from(1);
            for x in row {
                let d = x.denom();
                let g = gcd(&lcm, d);
                lcm = &lcm / g * d;
            }
            row.iter()
                .map(|x| x.numer() * (&lcm / x.denom()))
                .collect()
        })
        .collect();

    let nrows = m.len();
    let mut pivots: Vec<usize> = Vec::new();
    let mut prev = BigInt::from(1);
    let mut r = 0usize;
    for c in 0..cols {
        let Some(p) = (r..nrows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        for i in r + 1..nrows {
            for j in c + 1..cols {
                let num = &m[r][c] * &m[i][j] - &m[i][c] * &m[r][j];
                m[i][j] = num / &prev;
            }
            m[i][c] = BigInt::zero();
        }
        prev = m[r][c].clone();
        pivots.push(c);
        r += 1;
        if r == nrows {
            break;
        }
    }

    let pivot_set: HashSet<usize> = pivots.iter().copied().collect();
    let free: Vec<usize> = (0..cols).filter(|c| !pivot_set.contains(c)).collect();

    let mut basis = Vec::with_capacity(free.len());
    for &fc in &free {
        let mut x = vec![Rat::zero(); cols];
        x[fc] = Rat::from_integer(1.into());
        for (i, &pc) in pivots.iter().enumerate().rev() {
            let mut s = Rat::zero();
            for j in pc + 1..cols {
                if !x[j].is_zero() {
                    s += Rat::from_integer(m[i][j].clone()) * &x[j];
                }
            }
            x[pc] = -s / Rat::from_integer(m[i][pc].clone());
        }
        basis.push(x);
    }
    basis
}

fn gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let mut a = a.abs();
    let mut b = b.abs();
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    if a.is_zero() {
        BigInt::from(1)
    } else {
        a
    }
}

// ---------------------------------------------------------------------------

/// Cache of full verdict computations, keyed by the serialized class.
/// Distinct recursion branches frequently reach identical classes.
#[allow(dead_code)]
fn verdict_cache() -> &'static Mutex<HashMap<String, bool>> {
    static CACHE: OnceLock<Mutex<HashMap<String, bool>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{GraphTuple, HalfEdge, Marking, Tail, Vertex};
    use crate::rat::{rat, ratio};

    fn m11_factor() -> ModuliFactor {
        ModuliFactor::numbered(1, 1).unwrap()
    }

    fn psi_graph() -> DualGraph {
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

    fn boundary_graph() -> DualGraph {
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

    fn genus1_relation() -> GraphSum {
        let ambient = AmbientSpace::single(m11_factor());
        let mut s = GraphSum::zero(ambient);
        s.add_graph(psi_graph(), rat(1)).unwrap();
        s.add_graph(boundary_graph(), ratio(-1, 12)).unwrap();
        s
    }

    #[test]
    fn relation_passes() {
        assert!(check(&genus1_relation()).unwrap().is_vanishing());
    }

    #[test]
    fn psi_alone_fails_with_witness() {
        let ambient = AmbientSpace::single(m11_factor());
        let sum = GraphSum::from_graph(ambient, psi_graph()).unwrap();
        match check(&sum).unwrap() {
            Verdict::Fails(w) => {
                assert!(w.test.path.is_empty());
                assert_eq!(w.test.monomial, PsiKappaMonomial::one(1));
                assert_eq!(w.value, ratio(1, 24));
                // The witness re-evaluates to its stated value.
                assert_eq!(evaluate_test(&sum, &w.test).unwrap(), w.value);
            }
            v => panic!("expected failure, got {v:?}"),
        }
    }

    #[test]
    fn zero_class_passes() {
        let sum = GraphSum::zero(AmbientSpace::single(m11_factor()));
        assert!(check(&sum).unwrap().is_vanishing());
    }

    #[test]
    fn m11_degree_one_nullspace() {
        // Generators: psi, kappa_1, boundary.  kappa_1 = psi on this space,
        // so the pairing matrix has rank 1 and the nullspace is spanned by
        // (psi - kappa_1) and (psi - boundary/12).
        let (generators, rank, nullity) = gorenstein_rank(&m11_factor(), 1).unwrap();
        assert_eq!(generators, 3);
        assert_eq!(rank, 1);
        assert_eq!(nullity, 2);

        let relations = find_relations(&m11_factor(), 1).unwrap();
        assert_eq!(relations.len(), 2);
        // The displayed relation psi - boundary/12 lies in the span.
        let rel = genus1_relation();
        let matrix = constraint_matrix(&m11_factor(), 1, true).unwrap();
        let coords = |s: &GraphSum| -> Vec<Rat> {
            matrix
                .generators
                .iter()
                .map(|g| {
                    s.terms()
                        .find(|(t, _)| t == &&GraphTuple(vec![g.clone()]))
                        .map(|(_, c)| c.clone())
                        .unwrap_or_else(Rat::zero)
                })
                .collect()
        };
        let mut all_rows: Vec<Vec<Rat>> =
            relations.iter().map(|r| coords(r)).collect();
        let mut tracker = RankTracker::new();
        for row in &all_rows {
            tracker.offer(row);
        }
        assert_eq!(tracker.rank(), 2);
        all_rows.push(coords(&rel));
        let mut tracker2 = RankTracker::new();
        for row in &all_rows {
            tracker2.offer(row);
        }
        assert_eq!(tracker2.rank(), 2, "displayed relation lies in the span");
    }

    #[test]
    fn m04_degree_one() {
        let f = ModuliFactor::numbered(0, 4).unwrap();
        let (generators, rank, nullity) = gorenstein_rank(&f, 1).unwrap();
        assert_eq!((generators, rank, nullity), (8, 1, 7));
    }

    #[test]
    fn m03_degree_zero() {
        let f = ModuliFactor::numbered(0, 3).unwrap();
        let relations = find_relations(&f, 0).unwrap();
        assert!(relations.is_empty());
        assert_eq!(gorenstein_rank(&f, 0).unwrap(), (1, 1, 0));
    }

    #[test]
    fn row_linearity_spot_check() {
        // Tests evaluate linearly on combinations.
        let ambient = AmbientSpace::single(m11_factor());
        let a = GraphSum::from_graph(ambient.clone(), psi_graph()).unwrap();
        let b = GraphSum::from_graph(ambient.clone(), boundary_graph()).unwrap();
        let mut combo = GraphSum::zero(ambient);
        combo.add_scaled(&a, &ratio(2, 3)).unwrap();
        combo.add_scaled(&b, &ratio(-5, 7)).unwrap();
        let test = TestId {
            path: vec![],
            monomial: PsiKappaMonomial::one(1),
        };
        let va = evaluate_test(&a, &test).unwrap();
        let vb = evaluate_test(&b, &test).unwrap();
        let vc = evaluate_test(&combo, &test).unwrap();
        assert_eq!(vc, ratio(2, 3) * va + ratio(-5, 7) * vb);
    }

    #[test]
    fn csv_export_shape() {
        let matrix = constraint_matrix(&m11_factor(), 1, true).unwrap();
        let csv = matrix.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 1 + matrix.rows.len());
        assert!(lines[0].starts_with("test_id,"));
        assert_eq!(lines[0].matches('"').count(), 2 * matrix.generators.len());
    }

    #[test]
    fn nullspace_small_example() {
        // x + y + 12 z = 0 over three unknowns.
        let rows = vec![vec![rat(1), rat(1), rat(12)]];
        let basis = nullspace(&rows, 3);
        assert_eq!(basis.len(), 2);
        for v in &basis {
            let s = &v[0] + &v[1] + rat(12) * &v[2];
            assert!(s.is_zero());
        }
    }
}
