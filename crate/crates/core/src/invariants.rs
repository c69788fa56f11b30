//! Resolution-function ingredients in one chart: w-ord, the `n` count, the
//! pair `t`, their maxima and Max loci, and the codimension-one part.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;

use num_traits::Zero;

use crate::charts::DivisorLabel;
use crate::delta::{delta_power, max_order, order_at_point, vanishes_at};
use crate::error::ResolveError;
use crate::ideal::Ideal;
use crate::monomial::GammaValue;
use crate::poly::{Polynomial, Rational};
use crate::transforms::{BasicObjectState, EMinusSplit};

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TValue {
    pub word: Rational,
    pub n: u32,
}

impl TValue {
    pub fn new(word: Rational, n: u32) -> TValue {
        TValue { word, n }
    }
}

impl fmt::Display for TValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.word, self.n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Entry {
    T(TValue),
    Gamma(GammaValue),
    Infinity,
}

impl Entry {
    fn rank(&self) -> u8 {
        match self {
            Entry::Gamma(_) => 0,
            Entry::T(_) => 1,
            Entry::Infinity => 2,
        }
    }
}

impl Ord for Entry {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Entry::T(a), Entry::T(b)) => a.cmp(b),
            (Entry::Gamma(a), Entry::Gamma(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Entry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Entry::T(t) => write!(f, "{}", t),
            Entry::Gamma(g) => write!(f, "{}", g),
            Entry::Infinity => write!(f, "inf"),
        }
    }
}

/// Value of the resolution function: `d + 1` entries compared
/// lexicographically.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InvariantVector {
    pub entries: Vec<Entry>,
}

impl InvariantVector {
    /// Pads with `inf` up to `len` entries.
    pub fn padded(mut entries: Vec<Entry>, len: usize) -> InvariantVector {
        while entries.len() < len {
            entries.push(Entry::Infinity);
        }
        InvariantVector { entries }
    }

    /// The smooth value: `r` copies of `(1,0)` followed by `inf`.
    pub fn smooth(r: usize, len: usize) -> InvariantVector {
        let one = TValue::new(Rational::from_integer(1.into()), 0);
        InvariantVector::padded(vec![Entry::T(one); r], len)
    }

    /// Once a Γ or `inf` entry appears only `inf` may follow.
    pub fn is_well_formed(&self) -> bool {
        let mut closed = false;
        for e in &self.entries {
            match e {
                Entry::T(_) if closed => return false,
                Entry::T(_) => {}
                Entry::Gamma(_) if closed => return false,
                Entry::Gamma(_) | Entry::Infinity => closed = true,
            }
        }
        true
    }

    pub fn t_entries(&self) -> Vec<TValue> {
        self.entries
            .iter()
            .filter_map(|e| if let Entry::T(t) = e { Some(t.clone()) } else { None })
            .collect()
    }
}

impl fmt::Display for InvariantVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.entries.iter().map(|e| e.to_string()).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// `ν_{J̄}(p) / b` at a point of `Sing(J, b)`.
pub fn word_at(state: &BasicObjectState, p: &[Rational]) -> Result<Rational, ResolveError> {
    if order_at_point(&state.ideal, p) < state.bound {
        return Err(ResolveError::NotInSing);
    }
    let nu = order_at_point(&state.reduced, p);
    Ok(Rational::new((nu as i64).into(), (state.bound as i64).into()))
}

#[derive(Clone, Debug)]
pub struct MaxWord {
    pub b_prime: u64,
    pub word: Rational,
    /// `Sing(J̄, b′) ∩ Sing(J, b)`, or the Sing ideal when `b′ = 0`.
    pub locus: Ideal,
}

/// Largest `b′` with `Δ^{b′-1}(J̄) + Δ^{b-1}(J)` proper, searched downward
/// from the maximal order of `J̄`.
pub fn max_word_parts(sing: &Ideal, reduced: &Ideal, b: u64) -> Result<MaxWord, ResolveError> {
    let top = if reduced.is_zero() { 0 } else { max_order(reduced)? };
    for bp in (1..=top).rev() {
        let locus = sing.sum(&delta_power(reduced, bp - 1)?);
        if !locus.is_trivial()? {
            return Ok(MaxWord { b_prime: bp, word: Rational::new((bp as i64).into(), (b as i64).into()), locus });
        }
    }
    Ok(MaxWord { b_prime: 0, word: Rational::zero(), locus: sing.clone() })
}

pub fn max_word(state: &BasicObjectState) -> Result<MaxWord, ResolveError> {
    let sing = delta_power(&state.ideal, state.bound - 1)?;
    max_word_parts(&sing, &state.reduced, state.bound)
}

/// Two-case count of divisors through `p`; `max_word` is the global maximum.
pub fn n_at(state: &BasicObjectState, split: &EMinusSplit, max_word: &Rational, p: &[Rational]) -> Result<u32, ResolveError> {
    let w = word_at(state, p)?;
    let through = |l: &DivisorLabel| {
        state
            .divisors
            .iter()
            .find(|d| d.0 == *l)
            .map(|d| p[d.1].is_zero())
            .unwrap_or(false)
    };
    let count = if &w < max_word {
        state.divisors.iter().filter(|d| p[d.1].is_zero()).count()
    } else {
        split.minus.iter().filter(|l| through(l)).count()
    };
    Ok(count as u32)
}

pub fn t_at(state: &BasicObjectState, split: &EMinusSplit, max_word: &Rational, p: &[Rational]) -> Result<TValue, ResolveError> {
    Ok(TValue::new(word_at(state, p)?, n_at(state, split, max_word, p)?))
}

/// Largest `n` such that some `n`-subset of `candidates` (variables) meets
/// `locus`, with all maximizing subsets.
pub fn max_subsets(locus: &Ideal, candidates: &[usize]) -> Result<(u32, Vec<Vec<usize>>), ResolveError> {
    let ctx = locus.ctx();
    let m = candidates.len();
    for size in (1..=m).rev() {
        let mut found = Vec::new();
        for mask in 1u32..(1u32 << m) {
            if mask.count_ones() as usize != size {
                continue;
            }
            let vars: Vec<usize> = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| candidates[i]).collect();
            let sum = locus.add_generators(&vars.iter().map(|&v| Polynomial::var(ctx, v)).collect::<Vec<_>>());
            if !sum.is_trivial()? {
                found.push(vars);
            }
        }
        if !found.is_empty() {
            return Ok((size as u32, found));
        }
    }
    Ok((0, Vec::new()))
}

/// `∏_S (locus + Σ_{v∈S} <x_v>)` over the given subsets; `locus` itself when
/// there are none.
pub fn max_t_locus(locus: &Ideal, subsets: &[Vec<usize>]) -> Ideal {
    let ctx = locus.ctx();
    let mut acc: Option<Ideal> = None;
    for s in subsets {
        let f = locus.add_generators(&s.iter().map(|&v| Polynomial::var(ctx, v)).collect::<Vec<_>>());
        acc = Some(match acc {
            None => f,
            Some(a) => a.product(&f),
        });
    }
    acc.unwrap_or_else(|| locus.clone())
}

/// Chart-local max t against the split; the E⁻ labels are read off the
/// chart's divisors.
pub fn max_t(state: &BasicObjectState, split: &EMinusSplit) -> Result<(TValue, Ideal), ResolveError> {
    let mw = max_word(state)?;
    let cands: Vec<usize> = state
        .divisors
        .iter()
        .filter(|d| split.minus.contains(&d.0))
        .map(|d| d.1)
        .collect();
    let (n, subsets) = max_subsets(&mw.locus, &cands)?;
    Ok((TValue::new(mw.word, n), max_t_locus(&mw.locus, &subsets)))
}

/// Squarefree equation of the union of codimension-one components of `V(sing)`.
pub fn codim_one_part(sing: &Ideal) -> Option<Polynomial> {
    if sing.is_zero() {
        return None;
    }
    let h = sing.gcd_squarefree();
    if h.is_constant() {
        None
    } else {
        Some(h)
    }
}

/// Labels of `labels` whose hyperplane contains `p`.
pub fn labels_through(divisors: &[(DivisorLabel, usize)], p: &[Rational]) -> BTreeSet<DivisorLabel> {
    divisors.iter().filter(|d| p[d.1].is_zero()).map(|d| d.0).collect()
}

/// Whether `p` is in `Sing(J, b)`.
pub fn in_sing(state: &BasicObjectState, p: &[Rational]) -> bool {
    vanishes_at(&state.ideal, p) && order_at_point(&state.ideal, p) >= state.bound
}
