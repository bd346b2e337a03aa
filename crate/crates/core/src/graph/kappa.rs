//! Kappa calculus: basis changes between multi-index kappa classes and
//! monomials in single kappa classes, products, and pullback rules along
//! forgetful and gluing maps.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::rat::Rat;

/// Integer linear combination of kappa multisets.  A key `[k1,...,km]`
/// stands for the product `kappa_{k1} ... kappa_{km}` in monomial context
/// and for the class `kappa_{k1,...,km}` in multi-index context.
pub type KappaExpansion = BTreeMap<Vec<u32>, i64>;

fn add_term(exp: &mut KappaExpansion, mut key: Vec<u32>, coeff: i64) {
    key.sort_unstable();
    *exp.entry(key).or_insert(0) += coeff;
}

/// Expands the multi-index class `kappa_K` in the basis of monomials in
/// single kappa classes: a sum over permutations of `K`'s positions, one
/// single-index factor per cycle, with index the sum over the cycle.
pub fn kappa_multi_to_monomials(k: &[u32]) -> KappaExpansion {
    let m = k.len();
    let mut out = KappaExpansion::new();
    if m == 0 {
        out.insert(vec![], 1);
        return out;
    }
    for perm in permutations(m) {
        let mut seen = vec![false; m];
        let mut factors = Vec::new();
        for start in 0..m {
            if seen[start] {
                continue;
            }
            let mut sum = 0u32;
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                sum += k[i];
                i = perm[i];
            }
            factors.push(sum);
        }
        add_term(&mut out, factors, 1);
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Inverse basis change: the monomial `kappa_{c1} ... kappa_{cm}` as a sum
/// of multi-index classes, summing over set partitions with a block of
/// size s contributing `(-1)^(s-1)`.  (The forward change sums blockwise
/// weights (s-1)!, so the inverse weights come from the compositional
/// inverse of -ln(1-x), which is 1 - exp(-x).)
pub fn kappa_mono_to_multi(c: &[u32]) -> KappaExpansion {
    let mut out = KappaExpansion::new();
    if c.is_empty() {
        out.insert(vec![], 1);
        return out;
    }
    for blocks in set_partitions(c.len()) {
        let mut key = Vec::with_capacity(blocks.len());
        let mut coeff = 1i64;
        for block in &blocks {
            key.push(block.iter().map(|&i| c[i]).sum());
            if block.len() % 2 == 0 {
                coeff = -coeff;
            }
        }
        add_term(&mut out, key, coeff);
    }
    out.retain(|_, c| *c != 0);
    out
}

/// Product of a list of multi-index kappa classes, expanded back in the
/// multi-index basis.
pub fn kappa_multi_product(factors: &[Vec<u32>]) -> BTreeMap<Vec<u32>, Rat> {
    // Expand every factor into single-kappa monomials, multiply the
    // monomials (multiset union), then convert back.
    let mut acc: BTreeMap<Vec<u32>, i64> = BTreeMap::new();
    acc.insert(vec![], 1);
    for f in factors {
        let exp = kappa_multi_to_monomials(f);
        let mut next: BTreeMap<Vec<u32>, i64> = BTreeMap::new();
        for (m1, c1) in &acc {
            for (m2, c2) in &exp {
                let mut key = m1.clone();
                key.extend(m2.iter().copied());
                key.sort_unstable();
                *next.entry(key).or_insert(0) += c1 * c2;
            }
        }
        next.retain(|_, c| *c != 0);
        acc = next;
    }

    let mut out: BTreeMap<Vec<u32>, Rat> = BTreeMap::new();
    for (mono, c) in acc {
        for (multi, c2) in kappa_mono_to_multi(&mono) {
            let e = out
                .entry(multi)
                .or_insert_with(|| Rat::from_integer(BigInt::from(0)));
            *e += Rat::from_integer(BigInt::from(c * c2));
        }
    }
    out.retain(|_, c| *c != Rat::from_integer(BigInt::from(0)));
    out
}

/// The map along which a kappa class is pulled back.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PullbackMap {
    /// Forgetting one marked point.
    Forgetful,
    /// Gluing map of a separating boundary divisor (two-factor target).
    GluingSeparating,
    /// Gluing map of the irreducible boundary divisor.
    GluingNonseparating,
}

/// Pullback of `kappa_K`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum KappaPullback {
    /// Terms `(psi-exponent on the new point, remaining multi-index, sign)`.
    Forgetful(Vec<(u32, Vec<u32>, i64)>),
    /// Ordered splits `(kappa_I, kappa_J)`, one term per position split.
    Separating(Vec<(Vec<u32>, Vec<u32>)>),
    /// The class is unchanged.
    Nonseparating(Vec<u32>),
}

pub fn kappa_pullback(map: PullbackMap, k: &[u32]) -> KappaPullback {
    match map {
        PullbackMap::Forgetful => {
            let mut terms = vec![(0u32, k.to_vec(), 1i64)];
            for i in 0..k.len() {
                let mut rest = k.to_vec();
                let ki = rest.remove(i);
                terms.push((ki, rest, -1));
            }
            KappaPullback::Forgetful(terms)
        }
        PullbackMap::GluingSeparating => {
            let mut terms = Vec::new();
            for mask in 0..(1u64 << k.len()) {
                let mut left = Vec::new();
                let mut right = Vec::new();
                for (i, &ki) in k.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        left.push(ki);
                    } else {
                        right.push(ki);
                    }
                }
                left.sort_unstable();
                right.sort_unstable();
                terms.push((left, right));
            }
            KappaPullback::Separating(terms)
        }
        PullbackMap::GluingNonseparating => {
            let mut v = k.to_vec();
            v.sort_unstable();
            KappaPullback::Nonseparating(v)
        }
    }
}

fn permutations(m: usize) -> Vec<Vec<usize>> {
    fn rec(items: &[usize]) -> Vec<Vec<usize>> {
        if items.is_empty() {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for (i, &x) in items.iter().enumerate() {
            let mut rest = items.to_vec();
            rest.remove(i);
            for mut tail in rec(&rest) {
                let mut v = vec![x];
                v.append(&mut tail);
                out.push(v);
            }
        }
        out
    }
    rec(&(0..m).collect::<Vec<_>>())
}

/// All partitions of `{0, ..., n-1}` into nonempty blocks.
fn set_partitions(n: usize) -> Vec<Vec<Vec<usize>>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for mut smaller in set_partitions(n - 1) {
        // element n-1 joins an existing block ...
        for b in 0..smaller.len() {
            let mut p = smaller.clone();
            p[b].push(n - 1);
            out.push(p);
        }
        // ... or opens a new one.
        smaller.push(vec![n - 1]);
        out.push(smaller);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exp(pairs: &[(&[u32], i64)]) -> KappaExpansion {
        pairs
            .iter()
            .map(|(k, c)| {
                let mut v = k.to_vec();
                v.sort_unstable();
                (v, *c)
            })
            .collect()
    }

    #[test]
    fn pair_expansion() {
        // kappa_{k1,k2} = kappa_{k1} kappa_{k2} + kappa_{k1+k2}
        let got = kappa_multi_to_monomials(&[2, 5]);
        assert_eq!(got, exp(&[(&[2, 5], 1), (&[7], 1)]));
    }

    #[test]
    fn singleton_expansion() {
        assert_eq!(kappa_multi_to_monomials(&[4]), exp(&[(&[4], 1)]));
    }

    #[test]
    fn triple_expansion() {
        // kappa_{k1,k2,k3} = k1 k2 k3 + (k1+k2)k3 + (k1+k3)k2 + (k2+k3)k1
        //                    + 2 (k1+k2+k3)
        let got = kappa_multi_to_monomials(&[1, 2, 4]);
        assert_eq!(
            got,
            exp(&[
                (&[1, 2, 4], 1),
                (&[3, 4], 1),
                (&[5, 2], 1),
                (&[6, 1], 1),
                (&[7], 2),
            ])
        );
    }

    #[test]
    fn coefficients_sum_to_m_factorial() {
        // Distinct powers of two keep all cycle sums distinct.
        for m in 1..=6u32 {
            let k: Vec<u32> = (0..m).map(|i| 1 << i).collect();
            let total: i64 = kappa_multi_to_monomials(&k).values().sum();
            let mf: i64 = (1..=m as i64).product();
            assert_eq!(total, mf, "m = {m}");
        }
    }

    #[test]
    fn basis_change_round_trip() {
        for k in [vec![1u32], vec![1, 2], vec![2, 2], vec![1, 2, 3], vec![1, 1, 2, 3]] {
            let mono = kappa_multi_to_monomials(&k);
            let mut back = KappaExpansion::new();
            for (m, c) in mono {
                for (multi, c2) in kappa_mono_to_multi(&m) {
                    let e = back.entry(multi).or_insert(0);
                    *e += c * c2;
                }
            }
            back.retain(|_, c| *c != 0);
            let mut sorted = k.clone();
            sorted.sort_unstable();
            assert_eq!(back, exp(&[(&sorted, 1)]), "k = {k:?}");
        }
    }

    #[test]
    fn mono_to_multi_pair() {
        // kappa_a kappa_b = kappa_{a,b} - kappa_{a+b}
        assert_eq!(
            kappa_mono_to_multi(&[1, 2]),
            exp(&[(&[1, 2], 1), (&[3], -1)])
        );
    }

    #[test]
    fn pullback_forgetful() {
        // p*(kappa_k) = kappa_k - psi_new^k
        let got = kappa_pullback(PullbackMap::Forgetful, &[3]);
        assert_eq!(
            got,
            KappaPullback::Forgetful(vec![(0, vec![3], 1), (3, vec![], -1)])
        );
    }

    #[test]
    fn pullback_separating() {
        let got = kappa_pullback(PullbackMap::GluingSeparating, &[3]);
        assert_eq!(
            got,
            KappaPullback::Separating(vec![(vec![], vec![3]), (vec![3], vec![])])
        );
    }

    #[test]
    fn pullback_nonseparating() {
        let got = kappa_pullback(PullbackMap::GluingNonseparating, &[2, 1]);
        assert_eq!(got, KappaPullback::Nonseparating(vec![1, 2]));
    }
}
