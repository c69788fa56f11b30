//! Maximal contact, Tschirnhausen changes, coefficient ideals and the
//! companion object attached to the maximum of `t`.

use crate::charts::{Chart, CoordinateChange};
use crate::delta::{delta_power, Couple};
use crate::error::ResolveError;
use crate::ideal::Ideal;
use crate::invariants::{max_subsets, max_word, TValue};
use crate::poly::{Polynomial, Rational};
use crate::transforms::{BasicObjectState, EMinusSplit};

pub const DEFAULT_FACTORIAL_CAP: u64 = 6;

/// Degree and length of the remainder, then candidate position.
type ContactKey = (u64, usize, usize);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaximalContact {
    pub chart: usize,
    pub var: usize,
    /// New `x_var` = old `x_var + shift`.
    pub change: Option<CoordinateChange>,
    pub witness: Polynomial,
}

#[derive(Clone, Debug)]
pub struct CoefficientIdeal {
    pub ideal: Ideal,
    pub bound: u64,
}

/// An element `u·z + r` of `Δ^{c-1}(K)` with `u` constant and `r` free of
/// `z`, chosen by highest variable index, then by the degree and length of
/// `r`, then by position among the generators followed by the reduced
/// Gröbner basis. An exceptional `z` is
/// accepted only when `r = 0`. Variables in `excluded` are skipped.
pub fn find_maximal_contact(k: &Ideal, c: u64, chart: &Chart, excluded: &[usize]) -> Result<MaximalContact, ResolveError> {
    let d = delta_power(k, c - 1)?;
    let mut candidates: Vec<Polynomial> = d.generators().to_vec();
    if !d.is_zero() {
        candidates.extend(d.groebner()?.elements().iter().cloned());
    }
    let n = k.ctx().dimension();
    for z in (0..n).rev().filter(|v| !excluded.contains(v)) {
        let mut best: Option<(ContactKey, &Polynomial, Rational, Polynomial)> = None;
        for (pos, g) in candidates.iter().enumerate() {
            let Some((u, rest)) = g.split_unit_linear(z) else { continue };
            if !rest.is_zero() && chart.exceptional.contains_key(&z) {
                continue;
            }
            let key = (rest.total_degree().unwrap_or(0), rest.len(), pos);
            if best.as_ref().is_none_or(|b| key < b.0) {
                best = Some((key, g, u, rest));
            }
        }
        if let Some((_, g, u, rest)) = best {
            let change = (!rest.is_zero()).then(|| CoordinateChange { var: z, shift: rest.scale(&u.recip()) });
            return Ok(MaximalContact { chart: chart.id, var: z, change, witness: g.clone() });
        }
    }
    Err(ResolveError::NoUnitLinearVariable { chart: chart.id, stage: 0 })
}

pub fn factorial(b: u64) -> u64 {
    (1..=b).product()
}

/// `<(coefficient of z^i in f)^{b!/(b-i)} : f, 0 <= i < b>` with bound `b!`.
pub fn coefficient_ideal(gens: &[Polynomial], b: u64, z: usize, cap: u64) -> Result<CoefficientIdeal, ResolveError> {
    if b > cap {
        return Err(ResolveError::FactorialBlowup { b, cap });
    }
    let ctx = gens
        .first()
        .map(|g| g.ctx().clone())
        .ok_or(ResolveError::ZeroCoefficientIdeal { chart: 0, stage: 0 })?;
    let d = factorial(b);
    let mut out: Vec<Polynomial> = Vec::new();
    for f in gens {
        for i in 0..b {
            let a = f.coefficient_in(z, i as u32);
            if a.is_zero() {
                continue;
            }
            let p = a.pow(d / (b - i));
            if !out.contains(&p) {
                out.push(p);
            }
        }
    }
    if out.is_empty() {
        return Err(ResolveError::ZeroCoefficientIdeal { chart: 0, stage: 0 });
    }
    Ok(CoefficientIdeal { ideal: Ideal::new(&ctx, out), bound: d })
}

/// `(J^c + K^b, b·c)`.
pub fn intersect_objects(a: &Couple, b: &Couple) -> Couple {
    Couple::new(a.ideal.power(b.bound).sum(&b.ideal.power(a.bound)), a.bound * b.bound)
}

/// One summand `P^power` of a companion ideal; `bound · power` equals the
/// companion bound.
#[derive(Clone, Debug)]
pub struct CompanionPart {
    pub ideal: Ideal,
    pub bound: u64,
    pub power: u64,
}

/// The couple `(Σ P_i^{power_i}, c)` kept as its summands, so that its
/// singular locus `∩ Sing(P_i, bound_i)` never needs `Δ^{c-1}` of the sum.
#[derive(Clone, Debug)]
pub struct Companion {
    pub parts: Vec<CompanionPart>,
    pub bound: u64,
}

impl Companion {
    pub fn unit(ctx: &std::sync::Arc<crate::poly::VariableContext>, bound: u64) -> Companion {
        Companion { parts: vec![CompanionPart { ideal: Ideal::unit(ctx), bound: 1, power: bound }], bound }
    }

    /// An ideal with the same zero set as `Sing(K, c)`.
    pub fn sing_locus(&self) -> Result<Ideal, ResolveError> {
        let mut acc: Option<Ideal> = None;
        for p in &self.parts {
            let s = delta_power(&p.ideal, p.bound - 1)?;
            acc = Some(match acc {
                None => s,
                Some(a) => a.sum(&s),
            });
        }
        Ok(acc.expect("companion has parts"))
    }

    pub fn materialize(&self) -> Ideal {
        let mut acc: Option<Ideal> = None;
        for p in &self.parts {
            let s = p.ideal.power(p.power);
            acc = Some(match acc {
                None => s,
                Some(a) => a.sum(&s),
            });
        }
        acc.expect("companion has parts")
    }

    pub fn couple(&self) -> Couple {
        Couple::new(self.materialize(), self.bound)
    }

    pub fn map_parts(&self, f: impl Fn(&CompanionPart) -> Result<Ideal, ResolveError>) -> Result<Companion, ResolveError> {
        let parts = self
            .parts
            .iter()
            .map(|p| Ok(CompanionPart { ideal: f(p)?, bound: p.bound, power: p.power }))
            .collect::<Result<Vec<_>, ResolveError>>()?;
        Ok(Companion { parts, bound: self.bound })
    }
}

/// `(J, b) ∩ (J̄, b′) ∩ (B, 1)` with bound `c = lcm(b, b′)`, kept as the
/// parts `J^{c/b}`, `J̄^{c/b′}`, `B^c`. `B` is the product over the
/// maximizing divisor subsets of the sums of their ideals; no `B` part when
/// `subsets` is empty.
pub fn build_companion(j: &Ideal, b: u64, reduced: &Ideal, b_prime: u64, subsets: &[Vec<usize>]) -> Companion {
    let c = num_integer::lcm(b, b_prime);
    let mut parts = vec![
        CompanionPart { ideal: j.clone(), bound: b, power: c / b },
        CompanionPart { ideal: reduced.clone(), bound: b_prime, power: c / b_prime },
    ];
    if !subsets.is_empty() {
        let ctx = j.ctx();
        let mut bi: Option<Ideal> = None;
        for s in subsets {
            let f = Ideal::new(ctx, s.iter().map(|&v| Polynomial::var(ctx, v)).collect());
            bi = Some(match bi {
                None => f,
                Some(a) => a.product(&f),
            });
        }
        parts.push(CompanionPart { ideal: bi.unwrap(), bound: 1, power: c });
    }
    Companion { parts, bound: c }
}

/// Companion of one chart for the global maximum `maxt`; `None` in the
/// monomial case. Charts below the maximum get the unit companion.
pub fn companion_object(state: &BasicObjectState, split: &EMinusSplit, maxt: &TValue) -> Result<Option<Companion>, ResolveError> {
    if num_traits::Zero::is_zero(&maxt.word) {
        return Ok(None);
    }
    let mw = max_word(state)?;
    let c_bound = |bp: u64| num_integer::lcm(state.bound, bp.max(1));
    if mw.word != maxt.word {
        return Ok(Some(Companion::unit(state.ideal.ctx(), c_bound(mw.b_prime))));
    }
    let cands: Vec<usize> = state.divisors.iter().filter(|d| split.minus.contains(&d.0)).map(|d| d.1).collect();
    let (n, subsets) = max_subsets(&mw.locus, &cands)?;
    if n != maxt.n {
        return Ok(Some(Companion::unit(state.ideal.ctx(), c_bound(mw.b_prime))));
    }
    Ok(Some(build_companion(&state.ideal, state.bound, &state.reduced, mw.b_prime, &subsets)))
}
