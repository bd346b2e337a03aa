//! Witten-Kontsevich point correlators.
//!
//! `point_correlator` evaluates
//! `<tau_{d_1} ... tau_{d_n}>_g = int_{Mbar_{g,n}} psi_1^{d_1} ... psi_n^{d_n}`
//! exactly, by the Virasoro (DVV) recursion together with the string and
//! dilaton reductions.  The function is total: unstable spaces and
//! dimension-mismatched exponent data give 0.
//!
//! Values are memoized globally; the cache is consistent under concurrent
//! use (entries are immutable once computed and recomputation is benign).

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use num_traits::Zero;

use crate::error::Error;
use crate::rat::{double_factorial_odd, rat, ratio, Rat};
use crate::Result;

/// Index of a point correlator: the genus and the multiset of psi-exponents.
///
/// The exponent list is kept sorted, so equal multisets compare equal.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CorrelatorKey {
    genus: u32,
    exponents: Vec<u32>,
}

impl CorrelatorKey {
    /// Canonical key; the exponents may be given in any order.
    pub fn new(genus: u32, mut exponents: Vec<u32>) -> Self {
        exponents.sort_unstable();
        CorrelatorKey { genus, exponents }
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    /// Sorted exponent multiset.
    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn num_points(&self) -> usize {
        self.exponents.len()
    }

    /// 2g - 2 + n > 0.
    pub fn is_stable(&self) -> bool {
        2 * self.genus as i64 - 2 + self.exponents.len() as i64 > 0
    }

    /// Sum of exponents equals 3g - 3 + n.
    pub fn dimension_matches(&self) -> bool {
        let sum: i64 = self.exponents.iter().map(|&d| d as i64).sum();
        sum == 3 * self.genus as i64 - 3 + self.exponents.len() as i64
    }
}

impl std::fmt::Display for CorrelatorKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "<")?;
        for (i, d) in self.exponents.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "tau_{d}")?;
        }
        write!(f, ">_{}", self.genus)
    }
}

fn cache() -> &'static Mutex<HashMap<CorrelatorKey, Rat>> {
    static CACHE: OnceLock<Mutex<HashMap<CorrelatorKey, Rat>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// The exact intersection number indexed by `key`.
pub fn point_correlator(key: &CorrelatorKey) -> Rat {
    if !key.is_stable() || !key.dimension_matches() {
        return Rat::zero();
    }
    if let Some(v) = cache().lock().unwrap().get(key) {
        return v.clone();
    }
    let value = compute(key);
    cache()
        .lock()
        .unwrap()
        .entry(key.clone())
        .or_insert(value)
        .clone()
}

/// Convenience wrapper taking the raw data.
pub fn correlator(genus: u32, exponents: Vec<u32>) -> Rat {
    point_correlator(&CorrelatorKey::new(genus, exponents))
}

fn compute(key: &CorrelatorKey) -> Rat {
    let g = key.genus;
    let ds = &key.exponents;
    let n = ds.len();

    // Base integrals that the reductions cannot reach.
    if g == 0 && ds.as_slice() == [0, 0, 0] {
        return rat(1);
    }
    if g == 1 && ds.as_slice() == [1] {
        return ratio(1, 24);
    }

    // String equation: remove one tau_0, decrement each remaining exponent.
    if ds[0] == 0 {
        let rest = &ds[1..];
        let mut total = Rat::zero();
        for j in 0..rest.len() {
            if rest[j] == 0 {
                continue;
            }
            let mut sub = rest.to_vec();
            sub[j] -= 1;
            total += correlator(g, sub);
        }
        return total;
    }

    // Dilaton equation: remove one tau_1.
    if ds[0] == 1 {
        let rest = ds[1..].to_vec();
        let factor = 2 * g as i64 - 2 + rest.len() as i64;
        return rat(factor) * correlator(g, rest);
    }

    // All exponents >= 2: Virasoro step on the largest one, d_max = m + 1.
    let m = (ds[n - 1] - 1) as i64;
    let rest: Vec<u32> = ds[..n - 1].to_vec();
    let mut total = Rat::zero();

    // Exponent transfer: tau_{d_j} tau_{m+1} -> tau_{d_j + m}.
    for j in 0..rest.len() {
        let d = rest[j] as i64;
        let coeff = double_factorial_odd(d + m) / double_factorial_odd(d - 1);
        let mut sub = rest.clone();
        sub[j] = (d + m) as u32;
        total += coeff * correlator(g, sub);
    }

    // Boundary terms: ordered (a, b) with a + b = m - 1, weight 1/2.
    let half = ratio(1, 2);
    for a in 0..=(m - 1) {
        let b = m - 1 - a;
        let w = &half * double_factorial_odd(a) * double_factorial_odd(b);

        // Nonseparating: genus drops by one, both insertions on one space.
        if g >= 1 {
            let mut sub = rest.clone();
            sub.push(a as u32);
            sub.push(b as u32);
            total += &w * correlator(g - 1, sub);
        }

        // Separating: split the genus and the remaining insertions.
        for g1 in 0..=g {
            let g2 = g - g1;
            for mask in 0..(1u32 << rest.len()) {
                let mut left = vec![a as u32];
                let mut right = vec![b as u32];
                for (j, &d) in rest.iter().enumerate() {
                    if mask & (1 << j) != 0 {
                        left.push(d);
                    } else {
                        right.push(d);
                    }
                }
                let f1 = correlator(g1, left);
                if f1.is_zero() {
                    continue;
                }
                let f2 = correlator(g2, right);
                if f2.is_zero() {
                    continue;
                }
                total += &w * f1 * f2;
            }
        }
    }

    total / double_factorial_odd(m + 1)
}

/// `int_{Mbar_{g,n}} psi_1^{d_1}...psi_n^{d_n} kappa_{k_1,...,k_m}` for the
/// multi-index kappa class, via the pushforward identity that trades each
/// kappa index `k` for an extra marked point with exponent `k + 1`.
///
/// Rejects unstable `(g, n)` and kappa index 0 (the latter is the scalar
/// `2g - 2 + n` and is handled by the caller).
pub fn integral_psi_kappa(genus: u32, psi: &[u32], kappa: &[u32]) -> Result<Rat> {
    if 2 * genus as i64 - 2 + psi.len() as i64 <= 0 {
        return Err(Error::Unstable {
            genus,
            points: psi.len(),
        });
    }
    if kappa.iter().any(|&k| k == 0) {
        return Err(Error::KappaIndexZero);
    }
    let mut exps = psi.to_vec();
    exps.extend(kappa.iter().map(|&k| k + 1));
    Ok(correlator(genus, exps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rat::factorial;

    #[test]
    fn golden_values() {
        assert_eq!(correlator(0, vec![0, 0, 0]), rat(1));
        assert_eq!(correlator(0, vec![1, 0, 0, 0]), rat(1));
        assert_eq!(correlator(1, vec![1]), ratio(1, 24));
        assert_eq!(correlator(1, vec![0, 2]), ratio(1, 24));
        assert_eq!(correlator(1, vec![1, 1]), ratio(1, 24));
        assert_eq!(correlator(1, vec![0, 1, 2]), ratio(1, 12));
        assert_eq!(correlator(1, vec![1, 1, 1]), ratio(1, 12));
        assert_eq!(correlator(2, vec![4]), ratio(1, 1152));
        assert_eq!(correlator(2, vec![0, 5]), ratio(1, 1152));
        assert_eq!(correlator(2, vec![1, 4]), ratio(1, 384));
        assert_eq!(correlator(2, vec![2, 3]), ratio(29, 5760));
    }

    #[test]
    fn genus_zero_closed_form() {
        // <tau_{d_1}...tau_{d_n}>_0 = (n-3)! / (d_1! ... d_n!).
        fn expected(ds: &[u32]) -> Rat {
            let n = ds.len() as u32;
            let mut v = factorial(n - 3);
            for &d in ds {
                v /= factorial(d);
            }
            v
        }
        fn compositions(total: u32, parts: usize) -> Vec<Vec<u32>> {
            if parts == 1 {
                return vec![vec![total]];
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
        for n in 3..=8usize {
            for ds in compositions(n as u32 - 3, n) {
                assert_eq!(correlator(0, ds.clone()), expected(&ds), "ds = {ds:?}");
            }
        }
    }

    #[test]
    fn dimension_vanishing() {
        assert_eq!(correlator(1, vec![0, 0]), rat(0));
        assert_eq!(correlator(0, vec![0, 0, 1]), rat(0));
        assert_eq!(correlator(2, vec![3]), rat(0));
    }

    #[test]
    fn unstable_vanishing() {
        assert_eq!(correlator(0, vec![0, 0]), rat(0));
        assert_eq!(correlator(0, vec![0]), rat(0));
        assert_eq!(correlator(1, vec![]), rat(0));
    }

    #[test]
    fn permutation_invariance() {
        assert_eq!(correlator(2, vec![2, 3]), correlator(2, vec![3, 2]));
        assert_eq!(correlator(1, vec![2, 0]), correlator(1, vec![0, 2]));
    }

    #[test]
    fn psi_kappa_integrals() {
        assert_eq!(integral_psi_kappa(1, &[0], &[1]).unwrap(), ratio(1, 24));
        assert_eq!(integral_psi_kappa(0, &[0, 0, 0], &[]).unwrap(), rat(1));
        assert_eq!(integral_psi_kappa(1, &[1], &[]).unwrap(), ratio(1, 24));
        // Degree mismatch is a zero value, not an error.
        assert_eq!(integral_psi_kappa(1, &[0], &[2]).unwrap(), rat(0));
    }

    #[test]
    fn psi_kappa_rejections() {
        assert_eq!(
            integral_psi_kappa(1, &[0], &[0]).unwrap_err(),
            Error::KappaIndexZero
        );
        assert!(matches!(
            integral_psi_kappa(0, &[0, 0], &[1]).unwrap_err(),
            Error::Unstable { .. }
        ));
    }
}
