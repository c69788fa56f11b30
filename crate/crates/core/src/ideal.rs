//! Ideals, Buchberger's algorithm and the derived tests: triviality,
//! membership, colon and saturation, dimension, and the squarefree gcd part.
//!
//! Gröbner bases are computed in the canonical graded reverse lexicographic
//! order. Colon ideals need one elimination, which runs the same engine under
//! a block order with one auxiliary variable in front.

use std::cell::Cell;
use std::cmp::Ordering;
use std::sync::{Arc, Mutex, OnceLock};

use num_traits::{One, Zero};

use crate::error::ResolveError;
use crate::poly::{Monomial, Polynomial, Rational, VariableContext};

pub const DEFAULT_GB_BUDGET: u64 = 10_000;

thread_local! {
    static GB_BUDGET: Cell<u64> = const { Cell::new(DEFAULT_GB_BUDGET) };
}

/// Reduction-step budget for each Gröbner basis computation on this thread.
pub fn gb_budget() -> u64 {
    GB_BUDGET.with(|b| b.get())
}

/// Run `f` with a different per-computation reduction budget.
pub fn with_gb_budget<T>(budget: u64, f: impl FnOnce() -> T) -> T {
    let old = GB_BUDGET.with(|b| b.replace(budget));
    struct Restore(u64);
    impl Drop for Restore {
        fn drop(&mut self) {
            GB_BUDGET.with(|b| b.set(self.0));
        }
    }
    let _r = Restore(old);
    f()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum TermOrder {
    Grevlex,
    /// Degree in the first `k` variables first, grevlex to break ties.
    Elim(usize),
}

impl TermOrder {
    fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        match self {
            TermOrder::Grevlex => a.cmp(b),
            TermOrder::Elim(k) => {
                let da: u64 = a.0[..*k].iter().map(|&e| e as u64).sum();
                let db: u64 = b.0[..*k].iter().map(|&e| e as u64).sum();
                da.cmp(&db).then_with(|| a.cmp(b))
            }
        }
    }
}

/// Terms sorted in descending order under the active term order.
#[derive(Clone, Debug)]
struct Sp {
    terms: Vec<(Monomial, Rational)>,
}

impl Sp {
    fn from_poly(p: &Polynomial, ord: TermOrder) -> Sp {
        let mut terms: Vec<(Monomial, Rational)> =
            p.terms().iter().map(|(m, c)| (m.clone(), c.clone())).collect();
        terms.sort_by(|a, b| ord.cmp(&b.0, &a.0));
        Sp { terms }
    }

    fn to_poly(&self, ctx: &Arc<VariableContext>) -> Polynomial {
        Polynomial::from_terms(ctx, self.terms.iter().cloned())
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn lm(&self) -> &Monomial {
        &self.terms[0].0
    }

    fn lc(&self) -> &Rational {
        &self.terms[0].1
    }

    fn monic(mut self) -> Sp {
        if let Some(lc) = self.terms.first().map(|t| t.1.clone()) {
            if !lc.is_one() {
                let inv = lc.recip();
                for t in &mut self.terms {
                    t.1 *= &inv;
                }
            }
        }
        self
    }

    /// `self - c * m * q`, all in descending order.
    fn sub_mul(&self, q: &Sp, m: &Monomial, c: &Rational, ord: TermOrder) -> Sp {
        let mut out = Vec::with_capacity(self.terms.len() + q.terms.len());
        let mut i = 0;
        let mut j = 0;
        let shifted: Vec<(Monomial, Rational)> =
            q.terms.iter().map(|(n, d)| (n.mul(m), d * c)).collect();
        while i < self.terms.len() && j < shifted.len() {
            match ord.cmp(&self.terms[i].0, &shifted[j].0) {
                Ordering::Greater => {
                    out.push(self.terms[i].clone());
                    i += 1;
                }
                Ordering::Less => {
                    out.push((shifted[j].0.clone(), -shifted[j].1.clone()));
                    j += 1;
                }
                Ordering::Equal => {
                    let v = &self.terms[i].1 - &shifted[j].1;
                    if !v.is_zero() {
                        out.push((self.terms[i].0.clone(), v));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.terms[i..]);
        for (n, d) in &shifted[j..] {
            out.push((n.clone(), -d.clone()));
        }
        Sp { terms: out }
    }
}

struct Engine {
    ord: TermOrder,
    steps: u64,
    budget: u64,
}

impl Engine {
    fn tick(&mut self) -> Result<(), ResolveError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(ResolveError::ResourceLimit {
                what: "Gröbner reduction steps".into(),
                budget: self.budget,
            });
        }
        Ok(())
    }

    /// Full reduction of `f` modulo `g`.
    fn reduce(&mut self, f: &Sp, g: &[Sp]) -> Result<Sp, ResolveError> {
        let mut p = f.clone();
        let mut r: Vec<(Monomial, Rational)> = Vec::new();
        while !p.is_zero() {
            let (m, c) = (p.lm().clone(), p.lc().clone());
            match g.iter().find(|q| q.lm().divides(&m)) {
                Some(q) => {
                    self.tick()?;
                    let qm = q.lm().quotient(&m);
                    let qc = &c / q.lc();
                    p = p.sub_mul(q, &qm, &qc, self.ord);
                }
                None => {
                    r.push((m, c));
                    p.terms.remove(0);
                }
            }
        }
        Ok(Sp { terms: r })
    }

    fn spoly(&self, a: &Sp, b: &Sp) -> Sp {
        let l = a.lm().lcm(b.lm());
        let ma = a.lm().quotient(&l);
        let mb = b.lm().quotient(&l);
        let ca = a.lc().recip();
        let cb = b.lc().recip();
        let zero = Sp { terms: vec![] };
        let t = zero.sub_mul(a, &ma, &(-ca), self.ord);
        t.sub_mul(b, &mb, &cb, self.ord)
    }

    fn buchberger(&mut self, input: Vec<Sp>) -> Result<Vec<Sp>, ResolveError> {
        let n = input.first().map(|p| p.lm().0.len()).unwrap_or(0);
        let mut basis: Vec<Sp> = Vec::new();
        for p in input {
            if p.is_zero() {
                continue;
            }
            basis.push(p.monic());
        }
        if basis.iter().any(|p| p.lm().is_one()) {
            return Ok(vec![unit_sp(n)]);
        }
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        for j in 0..basis.len() {
            for i in 0..j {
                pairs.push((i, j));
            }
        }
        while !pairs.is_empty() {
            // normal selection: smallest lcm of leading monomials
            let mut best = 0;
            for k in 1..pairs.len() {
                let (i, j) = pairs[k];
                let (bi, bj) = pairs[best];
                let lk = basis[i].lm().lcm(basis[j].lm());
                let lb = basis[bi].lm().lcm(basis[bj].lm());
                if self.ord.cmp(&lk, &lb) == Ordering::Less {
                    best = k;
                }
            }
            let (i, j) = pairs.remove(best);
            if basis[i].lm().coprime(basis[j].lm()) {
                continue;
            }
            let s = self.spoly(&basis[i], &basis[j]);
            let r = self.reduce(&s, &basis)?;
            if r.is_zero() {
                continue;
            }
            let r = r.monic();
            if r.lm().is_one() {
                return Ok(vec![unit_sp(n)]);
            }
            let k = basis.len();
            basis.push(r);
            for i in 0..k {
                pairs.push((i, k));
            }
        }
        self.interreduce(basis)
    }

    fn interreduce(&mut self, basis: Vec<Sp>) -> Result<Vec<Sp>, ResolveError> {
        // drop elements whose leading monomial is divisible by another one
        let mut minimal: Vec<Sp> = Vec::new();
        for (k, p) in basis.iter().enumerate() {
            let redundant = basis.iter().enumerate().any(|(l, q)| {
                l != k && q.lm().divides(p.lm()) && (q.lm() != p.lm() || l < k)
            });
            if !redundant {
                minimal.push(p.clone());
            }
        }
        let mut out = Vec::with_capacity(minimal.len());
        for k in 0..minimal.len() {
            let others: Vec<Sp> = minimal
                .iter()
                .enumerate()
                .filter(|(l, _)| *l != k)
                .map(|(_, q)| q.clone())
                .collect();
            let r = self.reduce(&minimal[k], &others)?.monic();
            out.push(r);
        }
        out.sort_by(|a, b| self.ord.cmp(a.lm(), b.lm()));
        Ok(out)
    }
}

fn unit_sp(n: usize) -> Sp {
    Sp { terms: vec![(Monomial::one(n), Rational::one())] }
}

/// Reduced, monic Gröbner basis in the canonical order, sorted by leading
/// monomial ascending.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroebnerBasis {
    ctx: Arc<VariableContext>,
    elements: Vec<Polynomial>,
}

impl GroebnerBasis {
    pub fn elements(&self) -> &[Polynomial] {
        &self.elements
    }

    pub fn is_unit(&self) -> bool {
        self.elements.len() == 1 && self.elements[0].is_unit()
    }

    /// Normal form of `f`. Counted against the thread budget.
    pub fn normal_form(&self, f: &Polynomial) -> Result<Polynomial, ResolveError> {
        let mut e = Engine { ord: TermOrder::Grevlex, steps: 0, budget: gb_budget() };
        let g: Vec<Sp> = self.elements.iter().map(|p| Sp::from_poly(p, TermOrder::Grevlex)).collect();
        let r = e.reduce(&Sp::from_poly(f, TermOrder::Grevlex), &g)?;
        Ok(r.to_poly(&self.ctx))
    }

    pub fn leading_monomials(&self) -> Vec<Monomial> {
        self.elements.iter().filter_map(|p| p.leading_monomial().cloned()).collect()
    }
}

/// Finite generator list with a lazily computed reduced Gröbner basis.
#[derive(Clone)]
pub struct Ideal {
    ctx: Arc<VariableContext>,
    gens: Vec<Polynomial>,
    gb: OnceLock<Arc<GroebnerBasis>>,
    // Δ^k for k = 1, 2, ..., shared between clones
    pub(crate) deltas: Arc<Mutex<Vec<Ideal>>>,
}

impl std::fmt::Debug for Ideal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Ideal{}", self)
    }
}

impl std::fmt::Display for Ideal {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.gens.iter().map(|g| g.to_string()).collect();
        write!(f, "<{}>", parts.join(", "))
    }
}

impl Ideal {
    /// Zero generators are dropped; an empty list is the zero ideal.
    pub fn new(ctx: &Arc<VariableContext>, gens: Vec<Polynomial>) -> Ideal {
        let gens = gens.into_iter().filter(|g| !g.is_zero()).collect();
        Ideal { ctx: ctx.clone(), gens, gb: OnceLock::new(), deltas: Arc::new(Mutex::new(Vec::new())) }
    }

    pub fn principal(f: &Polynomial) -> Ideal {
        Ideal::new(f.ctx(), vec![f.clone()])
    }

    pub fn unit(ctx: &Arc<VariableContext>) -> Ideal {
        Ideal::new(ctx, vec![Polynomial::one(ctx)])
    }

    pub fn parse(texts: &[&str], ctx: &Arc<VariableContext>) -> Result<Ideal, crate::error::ParseError> {
        let gens = texts
            .iter()
            .map(|t| Polynomial::parse(t, ctx))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Ideal::new(ctx, gens))
    }

    pub fn ctx(&self) -> &Arc<VariableContext> {
        &self.ctx
    }

    pub fn generators(&self) -> &[Polynomial] {
        &self.gens
    }

    pub fn is_zero(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn groebner(&self) -> Result<Arc<GroebnerBasis>, ResolveError> {
        if let Some(gb) = self.gb.get() {
            return Ok(gb.clone());
        }
        let gb = Arc::new(groebner_of(&self.ctx, &self.gens)?);
        // a concurrent initializer may have won; either value is the same basis
        let _ = self.gb.set(gb.clone());
        Ok(self.gb.get().cloned().unwrap_or(gb))
    }

    /// Whether a basis has already been computed for this ideal.
    pub fn has_cached_basis(&self) -> bool {
        self.gb.get().is_some()
    }

    pub fn is_trivial(&self) -> Result<bool, ResolveError> {
        if self.gens.iter().any(|g| g.is_unit()) {
            return Ok(true);
        }
        if self.gens.is_empty() {
            return Ok(false);
        }
        Ok(self.groebner()?.is_unit())
    }

    pub fn member(&self, f: &Polynomial) -> Result<bool, ResolveError> {
        if f.is_zero() {
            return Ok(true);
        }
        if self.gens.is_empty() {
            return Ok(false);
        }
        let gb = self.groebner()?;
        if gb.is_unit() {
            return Ok(true);
        }
        Ok(gb.normal_form(f)?.is_zero())
    }

    /// Every generator of `other` lies in `self`.
    pub fn contains(&self, other: &Ideal) -> Result<bool, ResolveError> {
        for g in &other.gens {
            if !self.member(g)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    /// Ideal equality by mutual membership.
    pub fn same_ideal(&self, other: &Ideal) -> Result<bool, ResolveError> {
        Ok(self.contains(other)? && other.contains(self)?)
    }

    pub fn sum(&self, other: &Ideal) -> Ideal {
        let mut gens = self.gens.clone();
        gens.extend(other.gens.iter().cloned());
        Ideal::new(&self.ctx, gens)
    }

    pub fn add_generators(&self, extra: &[Polynomial]) -> Ideal {
        let mut gens = self.gens.clone();
        gens.extend(extra.iter().cloned());
        Ideal::new(&self.ctx, gens)
    }

    pub fn product(&self, other: &Ideal) -> Ideal {
        let mut gens = Vec::with_capacity(self.gens.len() * other.gens.len());
        for a in &self.gens {
            for b in &other.gens {
                gens.push(a.mul(b));
            }
        }
        Ideal::new(&self.ctx, dedup(gens))
    }

    /// `I^e` by generator products; `I^0` is the unit ideal.
    pub fn power(&self, e: u64) -> Ideal {
        if e == 0 {
            return Ideal::unit(&self.ctx);
        }
        if self.gens.len() == 1 {
            return Ideal::new(&self.ctx, vec![self.gens[0].pow(e)]);
        }
        let mut acc = self.clone();
        for _ in 1..e {
            acc = acc.product(self);
        }
        acc
    }

    /// The same ideal presented by its reduced Gröbner basis.
    pub fn normalized(&self) -> Result<Ideal, ResolveError> {
        if self.gens.is_empty() {
            return Ok(self.clone());
        }
        let gb = self.groebner()?;
        let out = Ideal::new(&self.ctx, gb.elements().to_vec());
        let _ = out.gb.set(gb);
        Ok(out)
    }

    pub fn map_generators(&self, f: impl Fn(&Polynomial) -> Polynomial) -> Ideal {
        Ideal::new(&self.ctx, self.gens.iter().map(f).collect())
    }

    /// `(I : f, I : f^∞)`.
    pub fn colon_sat(&self, f: &Polynomial) -> Result<(Ideal, Ideal), ResolveError> {
        let q = self.colon(f)?;
        let mut cur = q.clone();
        let mut rounds = 0u64;
        loop {
            let next = cur.colon(f)?;
            if cur.contains(&next)? {
                return Ok((q, cur));
            }
            cur = next;
            rounds += 1;
            if rounds > 64 {
                return Err(ResolveError::ResourceLimit { what: "saturation rounds".into(), budget: 64 });
            }
        }
    }

    /// `I : f` via `I ∩ <f>` with one auxiliary elimination variable.
    pub fn colon(&self, f: &Polynomial) -> Result<Ideal, ResolveError> {
        assert!(!f.is_zero(), "colon by zero");
        if f.is_unit() || self.gens.is_empty() {
            return Ok(self.clone());
        }
        if self.is_trivial()? {
            return Ok(Ideal::unit(&self.ctx));
        }
        let n = self.ctx.dimension();
        let ext = extended_ctx(&self.ctx);
        let lift = |p: &Polynomial| -> Polynomial {
            Polynomial::from_terms(
                &ext,
                p.terms().iter().map(|(m, c)| {
                    let mut e = Vec::with_capacity(n + 1);
                    e.push(0);
                    e.extend_from_slice(&m.0);
                    (Monomial(e), c.clone())
                }),
            )
        };
        let t = Polynomial::var(&ext, 0);
        let one_minus_t = Polynomial::one(&ext).sub(&t);
        let mut input: Vec<Polynomial> = self.gens.iter().map(|g| t.mul(&lift(g))).collect();
        input.push(one_minus_t.mul(&lift(f)));
        let ord = TermOrder::Elim(1);
        let mut eng = Engine { ord, steps: 0, budget: gb_budget() };
        let sps = input.iter().map(|p| Sp::from_poly(p, ord)).collect();
        let basis = eng.buchberger(sps)?;
        let mut gens = Vec::new();
        for b in basis {
            if b.terms.iter().all(|(m, _)| m.0[0] == 0) {
                let p = Polynomial::from_terms(
                    &self.ctx,
                    b.terms.iter().map(|(m, c)| (Monomial(m.0[1..].to_vec()), c.clone())),
                );
                let q = p.div_exact(f).expect("intersection element divisible by f");
                gens.push(q);
            }
        }
        Ideal::new(&self.ctx, gens).normalized()
    }

    /// Krull dimension of `V(I)`, or −1 when `V(I)` is empty.
    pub fn dimension(&self) -> Result<i64, ResolveError> {
        let n = self.ctx.dimension();
        if self.gens.is_empty() {
            return Ok(n as i64);
        }
        let gb = self.groebner()?;
        if gb.is_unit() {
            return Ok(-1);
        }
        let lms = gb.leading_monomials();
        let mut best = 0i64;
        for mask in 0u32..(1u32 << n) {
            let size = mask.count_ones() as i64;
            if size <= best {
                continue;
            }
            let independent = lms.iter().all(|m| {
                // some variable of the leading monomial lies outside the set
                m.0.iter().enumerate().any(|(i, &e)| e > 0 && mask & (1 << i) == 0)
            });
            if independent {
                best = size;
            }
        }
        Ok(best)
    }

    /// Squarefree part of the gcd of the generators.
    pub fn gcd_squarefree(&self) -> Polynomial {
        let g = self
            .gens
            .iter()
            .fold(Polynomial::zero(&self.ctx), |acc, f| gcd(&acc, f));
        squarefree_part(&g)
    }
}

fn dedup(mut gens: Vec<Polynomial>) -> Vec<Polynomial> {
    let mut out: Vec<Polynomial> = Vec::with_capacity(gens.len());
    for g in gens.drain(..) {
        if !out.contains(&g) {
            out.push(g);
        }
    }
    out
}

fn extended_ctx(ctx: &Arc<VariableContext>) -> Arc<VariableContext> {
    let mut name = String::from("t");
    while ctx.index_of(&name).is_some() {
        name.push('_');
        name.push('t');
    }
    let mut names = vec![name];
    names.extend(ctx.names().iter().cloned());
    VariableContext::new(&names).expect("fresh auxiliary name")
}

pub fn groebner_of(ctx: &Arc<VariableContext>, gens: &[Polynomial]) -> Result<GroebnerBasis, ResolveError> {
    let ord = TermOrder::Grevlex;
    let mut eng = Engine { ord, steps: 0, budget: gb_budget() };
    let sps = gens.iter().filter(|g| !g.is_zero()).map(|p| Sp::from_poly(p, ord)).collect();
    let basis = eng.buchberger(sps)?;
    Ok(GroebnerBasis { ctx: ctx.clone(), elements: basis.iter().map(|s| s.to_poly(ctx)).collect() })
}

/// Reduced Gröbner basis of an ideal.
pub fn groebner(i: &Ideal) -> Result<Arc<GroebnerBasis>, ResolveError> {
    i.groebner()
}

/// Every S-polynomial of the basis reduces to zero and the basis is reduced.
pub fn is_groebner_basis(gb: &GroebnerBasis) -> Result<bool, ResolveError> {
    let ord = TermOrder::Grevlex;
    let sps: Vec<Sp> = gb.elements.iter().map(|p| Sp::from_poly(p, ord)).collect();
    let mut eng = Engine { ord, steps: 0, budget: u64::MAX };
    for j in 0..sps.len() {
        for i in 0..j {
            let s = eng.spoly(&sps[i], &sps[j]);
            if !eng.reduce(&s, &sps)?.is_zero() {
                return Ok(false);
            }
        }
    }
    for (k, p) in gb.elements.iter().enumerate() {
        if !p.leading_coefficient().map(|c| c.is_one()).unwrap_or(false) {
            return Ok(false);
        }
        for (l, q) in gb.elements.iter().enumerate() {
            if k != l && q.leading_monomial().unwrap().divides(p.leading_monomial().unwrap()) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Monic gcd of two polynomials over the rationals; `gcd(0, 0) = 0`.
pub fn gcd(a: &Polynomial, b: &Polynomial) -> Polynomial {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Polynomial::one(a.ctx());
    }
    let ma = a.monomial_content();
    let mb = b.monomial_content();
    let mono = ma.gcd(&mb);
    let a = a.div_monomial(&ma).unwrap();
    let b = b.div_monomial(&mb).unwrap();
    let g = gcd_rec(&a, &b);
    g.mul_term(&mono, &Rational::one()).monic()
}

fn main_var(a: &Polynomial, b: &Polynomial) -> Option<usize> {
    (0..a.nvars()).rev().find(|&v| a.involves(v) || b.involves(v))
}

fn gcd_rec(a: &Polynomial, b: &Polynomial) -> Polynomial {
    if a.is_zero() {
        return b.monic();
    }
    if b.is_zero() {
        return a.monic();
    }
    if a.is_constant() || b.is_constant() {
        return Polynomial::one(a.ctx());
    }
    let v = main_var(a, b).unwrap();
    let ca = content(a, v);
    let cb = content(b, v);
    let c = gcd_rec(&ca, &cb);
    let pa = a.div_exact(&ca).unwrap();
    let pb = b.div_exact(&cb).unwrap();
    let (da, db) = (pa.degree_in(v).unwrap_or(0), pb.degree_in(v).unwrap_or(0));
    let g = if da == 0 || db == 0 {
        Polynomial::one(a.ctx())
    } else if da >= db {
        subresultant_gcd(&pa, &pb, v)
    } else {
        subresultant_gcd(&pb, &pa, v)
    };
    c.mul(&g).monic()
}

/// Content with respect to `v`: gcd of the coefficients in the other variables.
fn content(p: &Polynomial, v: usize) -> Polynomial {
    let d = p.degree_in(v).unwrap_or(0);
    let mut g = Polynomial::zero(p.ctx());
    for k in 0..=d {
        let c = p.coefficient_in(v, k);
        if c.is_zero() {
            continue;
        }
        g = gcd_rec(&g, &c);
        if g.is_constant() {
            return Polynomial::one(p.ctx());
        }
    }
    g
}

fn lead_in(p: &Polynomial, v: usize) -> Polynomial {
    p.coefficient_in(v, p.degree_in(v).unwrap_or(0))
}

fn var_power(p: &Polynomial, v: usize, k: u32) -> Monomial {
    let mut m = Monomial::one(p.nvars());
    m.0[v] = k;
    m
}

fn prem(a: &Polynomial, b: &Polynomial, v: usize) -> Polynomial {
    let db = b.degree_in(v).unwrap_or(0);
    let lb = lead_in(b, v);
    let mut r = a.clone();
    let mut e = a.degree_in(v).unwrap_or(0) as i64 - db as i64 + 1;
    while !r.is_zero() && r.degree_in(v).unwrap_or(0) >= db {
        let dr = r.degree_in(v).unwrap();
        let s = lead_in(&r, v).mul_term(&var_power(&r, v, dr - db), &Rational::one());
        r = lb.mul(&r).sub(&s.mul(b));
        e -= 1;
    }
    if e > 0 {
        r = lb.pow(e as u64).mul(&r);
    }
    r
}

/// Primitive part of the gcd of two primitive polynomials in `v`, using the
/// subresultant remainder sequence.
fn subresultant_gcd(a: &Polynomial, b: &Polynomial, v: usize) -> Polynomial {
    let ctx = a.ctx();
    let mut a = a.clone();
    let mut b = b.clone();
    let mut g = Polynomial::one(ctx);
    let mut h = Polynomial::one(ctx);
    loop {
        let delta = a.degree_in(v).unwrap_or(0) - b.degree_in(v).unwrap_or(0);
        let r = prem(&a, &b, v);
        if r.is_zero() {
            break;
        }
        if r.degree_in(v).unwrap_or(0) == 0 {
            return Polynomial::one(ctx);
        }
        a = b;
        let denom = g.mul(&h.pow(delta as u64));
        b = r.div_exact(&denom).expect("subresultant division is exact");
        g = lead_in(&a, v);
        h = if delta == 0 {
            h
        } else {
            let num = g.pow(delta as u64);
            num.div_exact(&h.pow(delta as u64 - 1)).expect("subresultant h update is exact")
        };
    }
    let c = content(&b, v);
    b.div_exact(&c).unwrap().monic()
}

/// `f / gcd(f, ∂f/∂x_1, …, ∂f/∂x_n)`, monic.
pub fn squarefree_part(f: &Polynomial) -> Polynomial {
    if f.is_zero() || f.is_constant() {
        return if f.is_zero() { f.clone() } else { Polynomial::one(f.ctx()) };
    }
    let mut g = f.clone();
    for v in 0..f.nvars() {
        let d = f.derivative(v);
        g = gcd(&g, &d);
        if g.is_constant() {
            break;
        }
    }
    f.div_exact(&g).expect("gcd divides").monic()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(names: &[&str]) -> Arc<VariableContext> {
        VariableContext::new(names).unwrap()
    }

    fn p(s: &str, c: &Arc<VariableContext>) -> Polynomial {
        Polynomial::parse(s, c).unwrap()
    }

    #[test]
    fn groebner_examples() {
        let c = ctx(&["x", "y"]);
        let i = Ideal::parse(&["x", "y"], &c).unwrap();
        let gb = i.groebner().unwrap();
        assert_eq!(gb.elements(), &[p("y", &c), p("x", &c)]);
        let i = Ideal::parse(&["x^2+y^2", "x^2-y^2"], &c).unwrap();
        let gb = i.groebner().unwrap();
        assert_eq!(gb.elements(), &[p("y^2", &c), p("x^2", &c)]);
        let i = Ideal::parse(&["x", "x+1"], &c).unwrap();
        assert!(i.groebner().unwrap().is_unit());
    }

    #[test]
    fn membership_examples() {
        let c = ctx(&["Z", "X", "Y"]);
        let i = Ideal::parse(&["Z", "X*Y", "Y^2", "X^3"], &c).unwrap();
        assert!(i.member(&p("Z", &c)).unwrap());
        let c2 = ctx(&["x", "y"]);
        assert!(!Ideal::parse(&["x^2"], &c2).unwrap().member(&p("x", &c2)).unwrap());
        let j = Ideal::parse(&["x^2+y^2", "x^2-y^2"], &c2).unwrap();
        assert!(j.member(&p("y^2", &c2)).unwrap());
    }

    #[test]
    fn colon_examples() {
        let c = ctx(&["x", "y", "z"]);
        let i = Ideal::parse(&["x*y", "x*z"], &c).unwrap();
        let q = i.colon(&p("x", &c)).unwrap();
        assert!(q.same_ideal(&Ideal::parse(&["y", "z"], &c).unwrap()).unwrap());
        let i = Ideal::parse(&["x^2*y"], &c).unwrap();
        let (_, sat) = i.colon_sat(&p("y", &c)).unwrap();
        assert!(sat.same_ideal(&Ideal::parse(&["x^2"], &c).unwrap()).unwrap());
    }

    #[test]
    fn dimension_examples() {
        let c = ctx(&["x", "y", "z"]);
        assert_eq!(Ideal::parse(&["x"], &c).unwrap().dimension().unwrap(), 2);
        assert_eq!(Ideal::parse(&["x", "y"], &c).unwrap().dimension().unwrap(), 1);
        let c2 = ctx(&["Z", "X", "Y"]);
        let i = Ideal::parse(&["Z", "X*Y", "Y^2", "X^3"], &c2).unwrap();
        assert_eq!(i.dimension().unwrap(), 0);
        assert_eq!(Ideal::parse(&["x", "x+1"], &c).unwrap().dimension().unwrap(), -1);
    }

    #[test]
    fn gcd_examples() {
        let c = ctx(&["x", "y"]);
        assert_eq!(Ideal::parse(&["x^2*y", "x^3"], &c).unwrap().gcd_squarefree(), p("x", &c));
        let f = p("x^2-y^5", &c);
        assert_eq!(Ideal::principal(&f).gcd_squarefree(), f.monic());
        assert_eq!(Ideal::parse(&["x", "y"], &c).unwrap().gcd_squarefree(), p("1", &c));
        let a = p("(x-y)^2*(x+y+1)", &c);
        let b = p("(x-y)*(x^2+y)", &c);
        assert_eq!(gcd(&a, &b), p("x-y", &c).monic());
        assert_eq!(squarefree_part(&a), p("(x-y)*(x+y+1)", &c).monic());
    }

    #[test]
    fn budget_is_enforced() {
        let c = ctx(&["x", "y", "z"]);
        let i = Ideal::parse(&["x^3*y - z^4 + x", "y^3*z - x^2 + 1", "z^3*x - y^5"], &c).unwrap();
        let r = with_gb_budget(5, || i.groebner());
        assert!(matches!(r, Err(ResolveError::ResourceLimit { .. })));
        assert!(!i.has_cached_basis());
    }
}
