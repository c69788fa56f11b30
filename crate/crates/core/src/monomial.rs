//! The monomial case: the function `h = (-p, ω, ℓ)` on divisor exponents,
//! its maximum, and exponent bookkeeping under blow-ups.

use std::collections::BTreeMap;
use std::fmt;

use crate::charts::DivisorLabel;
use crate::poly::Rational;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GammaValue {
    pub neg_p: i64,
    pub omega: Rational,
    pub ell: Vec<DivisorLabel>,
}

impl fmt::Display for GammaValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ell: Vec<String> = self.ell.iter().map(|l| l.to_string()).collect();
        write!(f, "Γ({}, {}, [{}])", self.neg_p, self.omega, ell.join(", "))
    }
}

/// `h` at a point lying exactly on the divisors `through`, given as
/// `(label, exponent)`. `None` when no subset reaches `b`.
pub fn gamma_at(through: &[(DivisorLabel, u64)], b: u64) -> Option<GammaValue> {
    let mut items: Vec<(DivisorLabel, u64)> = through.to_vec();
    items.sort_unstable();
    let m = items.len();
    assert!(m < 32, "too many divisors through a point");
    let mut best: Option<(usize, u64, Vec<DivisorLabel>)> = None;
    for mask in 1u32..(1u32 << m) {
        let q = mask.count_ones() as usize;
        let sum: u64 = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| items[i].1).sum();
        if sum < b {
            continue;
        }
        let ell: Vec<DivisorLabel> = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| items[i].0).collect();
        let better = match &best {
            None => true,
            Some((bq, bs, bl)) => q < *bq || (q == *bq && (sum > *bs || (sum == *bs && ell > *bl))),
        };
        if better {
            best = Some((q, sum, ell));
        }
    }
    best.map(|(q, sum, ell)| GammaValue {
        neg_p: -(q as i64),
        omega: Rational::new((sum as i64).into(), (b as i64).into()),
        ell,
    })
}

/// Maximum of `h` over the components of `Sing` in one chart, with the
/// divisors `(label, var, exponent)` of the chart. Returns the value and the
/// variables of the maximizing intersection.
pub fn max_h(divisors: &[(DivisorLabel, usize, u64)], b: u64) -> Option<(GammaValue, Vec<usize>)> {
    let through: Vec<(DivisorLabel, u64)> = divisors.iter().filter(|d| d.2 > 0).map(|d| (d.0, d.2)).collect();
    // the maximum over all component intersections is attained on a
    // maximizing subset itself, so one enumeration over all divisors suffices
    let g = gamma_at(&through, b)?;
    let vars = g
        .ell
        .iter()
        .map(|l| divisors.iter().find(|d| d.0 == *l).unwrap().1)
        .collect();
    Some((g, vars))
}

/// Predicted exponents in the chart whose pivot divisor was `pivot`, after
/// blowing up the intersection of `center`: the new divisor gets
/// `Σ a - b`, the pivot's old divisor leaves the chart, others are kept.
pub fn exponents_after(
    exps: &BTreeMap<DivisorLabel, u64>,
    center: &[DivisorLabel],
    pivot: Option<DivisorLabel>,
    b: u64,
    new_label: DivisorLabel,
) -> BTreeMap<DivisorLabel, u64> {
    let total: u64 = center.iter().map(|l| exps.get(l).copied().unwrap_or(0)).sum();
    let mut out = exps.clone();
    if let Some(p) = pivot {
        out.remove(&p);
    }
    out.insert(new_label, total.saturating_sub(b));
    out
}

/// Exhaustive reference for `gamma_at`: enumerate sizes, then sums, then tuples.
pub fn gamma_brute_force(through: &[(DivisorLabel, u64)], b: u64) -> Option<GammaValue> {
    let m = through.len();
    for q in 1..=m {
        let mut cands: Vec<(u64, Vec<DivisorLabel>)> = Vec::new();
        for mask in 1u32..(1u32 << m) {
            if mask.count_ones() as usize != q {
                continue;
            }
            let mut ell: Vec<DivisorLabel> = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| through[i].0).collect();
            ell.sort_unstable();
            let s: u64 = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| through[i].1).sum();
            if s >= b {
                cands.push((s, ell));
            }
        }
        if let Some(max) = cands.into_iter().max() {
            return Some(GammaValue {
                neg_p: -(q as i64),
                omega: Rational::new((max.0 as i64).into(), (b as i64).into()),
                ell: max.1,
            });
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::ratio;

    #[test]
    fn gamma_examples() {
        let g2 = gamma_at(&[(2, 7)], 5).unwrap();
        assert_eq!(g2, GammaValue { neg_p: -1, omega: ratio(7, 5), ell: vec![2] });
        let g1 = gamma_at(&[(1, 6)], 5).unwrap();
        assert!(g1 < g2);
        let (g, vars) = max_h(&[(1, 0, 6), (2, 1, 7), (3, 2, 4)], 5).unwrap();
        assert_eq!(g, g2);
        assert_eq!(vars, vec![1]);
        let a = gamma_at(&[(2, 2), (3, 4)], 5).unwrap();
        assert_eq!(a, GammaValue { neg_p: -2, omega: ratio(6, 5), ell: vec![2, 3] });
        let b = gamma_at(&[(1, 1), (3, 4)], 5).unwrap();
        assert_eq!(b.omega, ratio(1, 1));
        assert!(b < a);
        assert!(gamma_at(&[(1, 1), (2, 1)], 5).is_none());
    }

    #[test]
    fn exponent_update() {
        let exps: BTreeMap<DivisorLabel, u64> = [(1, 1), (2, 2), (3, 4)].into_iter().collect();
        let after = exponents_after(&exps, &[2, 3], Some(2), 5, 4);
        assert_eq!(after.get(&4), Some(&1));
        assert_eq!(after.get(&3), Some(&4));
        assert_eq!(after.get(&2), None);
    }
}
