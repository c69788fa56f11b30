//! Exact multivariate polynomials over the rationals.
//!
//! Monomials are dense exponent vectors compared in graded reverse
//! lexicographic order. A [`Polynomial`] keeps its terms in a `BTreeMap`, so
//! iteration runs from the smallest to the largest monomial and the leading
//! term is the last entry.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{ParseError, PolyError};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Exponent vector, one entry per chart variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(n: usize) -> Self {
        Monomial(vec![0; n])
    }

    pub fn var(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Monomial(e)
    }

    pub fn degree(&self) -> u64 {
        self.0.iter().map(|&e| e as u64).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self` divides `other`.
    pub fn quotient(&self, other: &Monomial) -> Monomial {
        Monomial(other.0.iter().zip(&self.0).map(|(a, b)| a - b).collect())
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn gcd(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| *a.min(b)).collect())
    }

    pub fn coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        for (a, b) in self.0.iter().zip(&other.0).rev() {
            if a != b {
                // smaller exponent in the last differing variable wins
                return b.cmp(a);
            }
        }
        Ordering::Equal
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Ordered list of distinct variable names.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VariableContext {
    names: Vec<String>,
}

impl VariableContext {
    pub fn new<S: AsRef<str>>(names: &[S]) -> Result<Arc<Self>, PolyError> {
        if names.is_empty() {
            return Err(PolyError::EmptyContext);
        }
        let mut out: Vec<String> = Vec::with_capacity(names.len());
        for n in names {
            let n = n.as_ref();
            if !is_identifier(n) {
                return Err(PolyError::BadName(n.to_string()));
            }
            if out.iter().any(|m| m == n) {
                return Err(PolyError::DuplicateName(n.to_string()));
            }
            out.push(n.to_string());
        }
        Ok(Arc::new(VariableContext { names: out }))
    }

    pub fn dimension(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
}

fn is_identifier(s: &str) -> bool {
    let mut c = s.chars();
    match c.next() {
        Some(f) if f.is_ascii_alphabetic() => c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_'),
        _ => false,
    }
}

#[derive(Clone)]
pub struct Polynomial {
    ctx: Arc<VariableContext>,
    terms: BTreeMap<Monomial, Rational>,
}

impl PartialEq for Polynomial {
    fn eq(&self, other: &Self) -> bool {
        self.terms == other.terms
    }
}

impl Eq for Polynomial {}

impl std::hash::Hash for Polynomial {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        for (m, c) in &self.terms {
            m.hash(state);
            c.hash(state);
        }
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({})", self)
    }
}

impl Polynomial {
    pub fn zero(ctx: &Arc<VariableContext>) -> Self {
        Polynomial { ctx: ctx.clone(), terms: BTreeMap::new() }
    }

    pub fn one(ctx: &Arc<VariableContext>) -> Self {
        Self::constant(ctx, Rational::one())
    }

    pub fn constant(ctx: &Arc<VariableContext>, c: Rational) -> Self {
        let mut p = Self::zero(ctx);
        if !c.is_zero() {
            p.terms.insert(Monomial::one(ctx.dimension()), c);
        }
        p
    }

    pub fn var(ctx: &Arc<VariableContext>, i: usize) -> Self {
        Self::term(ctx, Monomial::var(ctx.dimension(), i), Rational::one())
    }

    pub fn term(ctx: &Arc<VariableContext>, m: Monomial, c: Rational) -> Self {
        assert_eq!(m.0.len(), ctx.dimension(), "monomial length mismatch");
        let mut p = Self::zero(ctx);
        if !c.is_zero() {
            p.terms.insert(m, c);
        }
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Monomial, Rational)>>(
        ctx: &Arc<VariableContext>,
        it: I,
    ) -> Self {
        let mut p = Self::zero(ctx);
        for (m, c) in it {
            p.add_term(m, c);
        }
        p
    }

    pub fn parse(text: &str, ctx: &Arc<VariableContext>) -> Result<Self, ParseError> {
        Parser::new(text, ctx).parse()
    }

    pub fn ctx(&self) -> &Arc<VariableContext> {
        &self.ctx
    }

    pub fn nvars(&self) -> usize {
        self.ctx.dimension()
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Rational> {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|m| m.is_one())
    }

    /// Nonzero constant, i.e. a unit of the polynomial ring.
    pub fn is_unit(&self) -> bool {
        !self.is_zero() && self.is_constant()
    }

    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Monomial::one(self.nvars()))
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn leading_monomial(&self) -> Option<&Monomial> {
        self.terms.keys().next_back()
    }

    pub fn leading_coefficient(&self) -> Option<&Rational> {
        self.terms.values().next_back()
    }

    pub fn total_degree(&self) -> Option<u64> {
        self.terms.keys().map(|m| m.degree()).max()
    }

    /// Lowest total degree of a term: the order at the origin.
    pub fn min_degree(&self) -> Option<u64> {
        self.terms.keys().map(|m| m.degree()).min()
    }

    pub fn degree_in(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[var]).max()
    }

    /// Largest `k` with `x_var^k` dividing every term; `None` for zero.
    pub fn var_order(&self, var: usize) -> Option<u32> {
        self.terms.keys().map(|m| m.0[var]).min()
    }

    pub fn involves(&self, var: usize) -> bool {
        self.terms.keys().any(|m| m.0[var] > 0)
    }

    pub fn variables(&self) -> Vec<usize> {
        (0..self.nvars()).filter(|&v| self.involves(v)).collect()
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Polynomial {
        Polynomial {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c.clone())).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(&self.ctx);
        }
        Polynomial {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect(),
        }
    }

    pub fn mul_term(&self, m: &Monomial, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(&self.ctx);
        }
        Polynomial {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(n, d)| (n.mul(m), d * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Polynomial) -> Polynomial {
        let (a, b) = if self.len() <= other.len() { (self, other) } else { (other, self) };
        let mut acc: BTreeMap<Monomial, Rational> = BTreeMap::new();
        for (m1, c1) in &a.terms {
            for (m2, c2) in &b.terms {
                let m = m1.mul(m2);
                let c = c1 * c2;
                let e = acc.entry(m).or_insert_with(Rational::zero);
                *e += c;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Polynomial { ctx: self.ctx.clone(), terms: acc }
    }

    pub fn pow(&self, mut e: u64) -> Polynomial {
        let mut base = self.clone();
        let mut acc = Polynomial::one(&self.ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Divide by the leading coefficient.
    pub fn monic(&self) -> Polynomial {
        match self.leading_coefficient() {
            Some(c) => {
                let inv = c.recip();
                self.scale(&inv)
            }
            None => self.clone(),
        }
    }

    pub fn derivative(&self, var: usize) -> Polynomial {
        assert!(var < self.nvars(), "variable index out of range");
        let mut out = Polynomial::zero(&self.ctx);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e == 0 {
                continue;
            }
            let mut n = m.clone();
            n.0[var] -= 1;
            out.add_term(n, c * rat(e as i64));
        }
        out
    }

    /// `k`-th derivative in one variable.
    pub fn derivative_n(&self, var: usize, k: u32) -> Polynomial {
        let mut p = self.clone();
        for _ in 0..k {
            p = p.derivative(var);
        }
        p
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars());
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(&m.0) {
                if e > 0 {
                    t *= num_traits::pow::pow(x.clone(), e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Replace `x_var` by `value` (a polynomial in the same context).
    pub fn substitute_var(&self, var: usize, value: &Polynomial) -> Polynomial {
        let mut images: Vec<Polynomial> = (0..self.nvars()).map(|i| Polynomial::var(&self.ctx, i)).collect();
        images[var] = value.clone();
        RingMap { source: self.ctx.clone(), target: self.ctx.clone(), images }
            .apply_unchecked(self)
    }

    /// Set `x_var = 0`.
    pub fn restrict_zero(&self, var: usize) -> Polynomial {
        Polynomial {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.0[var] == 0)
                .map(|(m, c)| (m.clone(), c.clone()))
                .collect(),
        }
    }

    /// `f(x + p)` expanded.
    pub fn taylor_shift(&self, point: &[Rational]) -> Polynomial {
        assert_eq!(point.len(), self.nvars(), "point has wrong length");
        let images = (0..self.nvars())
            .map(|i| Polynomial::var(&self.ctx, i).add(&Polynomial::constant(&self.ctx, point[i].clone())))
            .collect();
        RingMap { source: self.ctx.clone(), target: self.ctx.clone(), images }.apply_unchecked(self)
    }

    /// Order at a rational point: lowest total degree of the shifted polynomial.
    pub fn order_at(&self, point: &[Rational]) -> Option<u64> {
        if point.iter().all(|x| x.is_zero()) {
            return self.min_degree();
        }
        self.taylor_shift(point).min_degree()
    }

    /// Coefficient of `x_var^k`, as a polynomial not involving `x_var`.
    pub fn coefficient_in(&self, var: usize, k: u32) -> Polynomial {
        Polynomial {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| m.0[var] == k)
                .map(|(m, c)| {
                    let mut n = m.clone();
                    n.0[var] = 0;
                    (n, c.clone())
                })
                .collect(),
        }
    }

    /// `self / x_var^k` when exact.
    pub fn div_var_power(&self, var: usize, k: u32) -> Option<Polynomial> {
        if self.terms.keys().any(|m| m.0[var] < k) {
            return None;
        }
        Some(Polynomial {
            ctx: self.ctx.clone(),
            terms: self
                .terms
                .iter()
                .map(|(m, c)| {
                    let mut n = m.clone();
                    n.0[var] -= k;
                    (n, c.clone())
                })
                .collect(),
        })
    }

    /// Divide by the monomial `m` when exact.
    pub fn div_monomial(&self, m: &Monomial) -> Option<Polynomial> {
        if !self.terms.keys().all(|n| m.divides(n)) {
            return None;
        }
        Some(Polynomial {
            ctx: self.ctx.clone(),
            terms: self.terms.iter().map(|(n, c)| (m.quotient(n), c.clone())).collect(),
        })
    }

    /// Exact quotient `self / d`, or `None` when `d` does not divide.
    pub fn div_exact(&self, d: &Polynomial) -> Option<Polynomial> {
        let (lm, lc) = d.leading_term()?;
        let (lm, lc) = (lm.clone(), lc.clone());
        let mut rem = self.clone();
        let mut q = Polynomial::zero(&self.ctx);
        while let Some((m, c)) = rem.leading_term() {
            if !lm.divides(m) {
                return None;
            }
            let qm = lm.quotient(m);
            let qc = c / &lc;
            rem = rem.sub(&d.mul_term(&qm, &qc));
            q.add_term(qm, qc);
        }
        Some(q)
    }

    /// Gcd of all exponent vectors: the largest monomial factor.
    pub fn monomial_content(&self) -> Monomial {
        let mut it = self.terms.keys();
        match it.next() {
            None => Monomial::one(self.nvars()),
            Some(first) => it.fold(first.clone(), |acc, m| acc.gcd(m)),
        }
    }

    /// Whether the polynomial is `c * x^m` for a single term.
    pub fn is_monomial(&self) -> bool {
        self.terms.len() == 1
    }

    /// Write as `c * x_var + rest` with `c` a nonzero constant and `rest` free
    /// of `x_var`; returns `(c, rest)`.
    pub fn split_unit_linear(&self, var: usize) -> Option<(Rational, Polynomial)> {
        let mut coeff: Option<Rational> = None;
        let mut rest = Polynomial::zero(&self.ctx);
        let lin = Monomial::var(self.nvars(), var);
        for (m, c) in &self.terms {
            if m.0[var] == 0 {
                rest.add_term(m.clone(), c.clone());
            } else if *m == lin {
                coeff = Some(c.clone());
            } else {
                return None;
            }
        }
        coeff.map(|c| (c, rest))
    }

    pub fn to_string_with(&self, ctx: &VariableContext) -> String {
        format_poly(self, ctx)
    }

    /// Reinterpret in another context of the same dimension.
    pub fn with_ctx(&self, ctx: &Arc<VariableContext>) -> Polynomial {
        assert_eq!(ctx.dimension(), self.nvars());
        Polynomial { ctx: ctx.clone(), terms: self.terms.clone() }
    }

    /// Integer-valued exponents as `usize` pairs, descending order.
    pub fn terms_desc(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter().rev()
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_poly(self, &self.ctx))
    }
}

fn format_monomial(m: &Monomial, ctx: &VariableContext) -> String {
    let mut parts = Vec::new();
    for (i, &e) in m.0.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(ctx.name(i).to_string()),
            _ => parts.push(format!("{}^{}", ctx.name(i), e)),
        }
    }
    parts.join("*")
}

fn format_rational(c: &Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

fn format_poly(p: &Polynomial, ctx: &VariableContext) -> String {
    if p.is_zero() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (k, (m, c)) in p.terms.iter().rev().enumerate() {
        let neg = c.is_negative();
        let abs = c.abs();
        if k == 0 {
            if neg {
                out.push('-');
            }
        } else {
            out.push_str(if neg { " - " } else { " + " });
        }
        let mono = format_monomial(m, ctx);
        if mono.is_empty() {
            out.push_str(&format_rational(&abs));
        } else if abs.is_one() {
            out.push_str(&mono);
        } else {
            out.push_str(&format_rational(&abs));
            out.push('*');
            out.push_str(&mono);
        }
    }
    out
}

/// A ring homomorphism given by the image of each source variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingMap {
    pub source: Arc<VariableContext>,
    pub target: Arc<VariableContext>,
    pub images: Vec<Polynomial>,
}

impl RingMap {
    pub fn identity(ctx: &Arc<VariableContext>) -> Self {
        RingMap {
            source: ctx.clone(),
            target: ctx.clone(),
            images: (0..ctx.dimension()).map(|i| Polynomial::var(ctx, i)).collect(),
        }
    }

    pub fn new(
        source: &Arc<VariableContext>,
        target: &Arc<VariableContext>,
        images: Vec<Polynomial>,
    ) -> Result<Self, PolyError> {
        if images.len() != source.dimension() {
            return Err(PolyError::ContextMismatch);
        }
        if images.iter().any(|p| p.nvars() != target.dimension()) {
            return Err(PolyError::ContextMismatch);
        }
        Ok(RingMap { source: source.clone(), target: target.clone(), images })
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, p)| *p == Polynomial::var(&self.target, i))
    }

    pub fn apply(&self, f: &Polynomial) -> Result<Polynomial, PolyError> {
        if f.nvars() != self.source.dimension() || **f.ctx() != *self.source {
            return Err(PolyError::ContextMismatch);
        }
        Ok(self.apply_unchecked(f))
    }

    pub(crate) fn apply_unchecked(&self, f: &Polynomial) -> Polynomial {
        // cache powers of each image
        let n = self.images.len();
        let mut powers: Vec<Vec<Polynomial>> = vec![vec![Polynomial::one(&self.target)]; n];
        let mut out = Polynomial::zero(&self.target);
        for (m, c) in &f.terms {
            let mut t = Polynomial::constant(&self.target, c.clone());
            for (i, &e) in m.0.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().unwrap().mul(&self.images[i]);
                    powers[i].push(next);
                }
                t = t.mul(&powers[i][e as usize]);
            }
            out = out.add(&t);
        }
        out
    }

    /// First `self`, then `next`: the map `x -> next(self(x))`.
    pub fn then(&self, next: &RingMap) -> Result<RingMap, PolyError> {
        if *self.target != *next.source {
            return Err(PolyError::ContextMismatch);
        }
        let images = self
            .images
            .iter()
            .map(|p| next.apply_unchecked(p))
            .collect();
        Ok(RingMap { source: self.source.clone(), target: next.target.clone(), images })
    }
}

pub fn substitute(f: &Polynomial, map: &RingMap) -> Result<Polynomial, PolyError> {
    map.apply(f)
}

pub fn derivative(f: &Polynomial, var: usize) -> Polynomial {
    f.derivative(var)
}

pub fn taylor_shift(f: &Polynomial, point: &[Rational]) -> Polynomial {
    f.taylor_shift(point)
}

pub fn parse(text: &str, ctx: &Arc<VariableContext>) -> Result<Polynomial, ParseError> {
    Polynomial::parse(text, ctx)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    ctx: &'a Arc<VariableContext>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str, ctx: &'a Arc<VariableContext>) -> Self {
        Parser { src: text.as_bytes(), pos: 0, ctx }
    }

    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::Syntax { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn parse(mut self) -> Result<Polynomial, ParseError> {
        if self.peek().is_none() {
            return Err(self.err("empty expression"));
        }
        let p = self.expr()?;
        if self.peek().is_some() {
            return Err(self.err(format!("unexpected '{}'", self.src[self.pos] as char)));
        }
        Ok(p)
    }

    fn expr(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    acc = acc.add(&self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Polynomial, ParseError> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = acc.mul(&self.unary()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.unary()?;
                    if !d.is_unit() {
                        self.pos = at;
                        return Err(self.err("division only by a nonzero constant"));
                    }
                    acc = acc.scale(&d.constant_term().recip());
                }
                _ => return Ok(acc),
            }
        }
    }

    fn unary(&mut self) -> Result<Polynomial, ParseError> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(self.unary()?.neg())
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Polynomial, ParseError> {
        let mut base = self.atom()?;
        while self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return Err(self.err("expected a non-negative integer exponent"));
            }
            let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
            let e: u64 = s
                .parse()
                .map_err(|_| ParseError::Syntax { pos: start, msg: "exponent too large".into() })?;
            base = base.pow(e);
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Polynomial, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let p = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(p)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let n: BigInt = s.parse().map_err(|_| ParseError::Syntax { pos: start, msg: "bad integer".into() })?;
                Ok(Polynomial::constant(self.ctx, BigRational::from_integer(n)))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
                {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                match self.ctx.index_of(name) {
                    Some(i) => Ok(Polynomial::var(self.ctx, i)),
                    None => Err(ParseError::UnknownVariable { pos: start, name: name.to_string() }),
                }
            }
            Some(c) => Err(self.err(format!("unexpected '{}'", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }
}

/// Convert a small non-negative rational exponent-like value to `u64`.
pub fn rational_to_u64(r: &Rational) -> Option<u64> {
    if r.is_integer() && !r.is_negative() {
        r.numer().to_u64()
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(names: &[&str]) -> Arc<VariableContext> {
        VariableContext::new(names).unwrap()
    }

    #[test]
    fn grevlex_order() {
        // x > y > z; x*z < y^2 in grevlex
        let xz = Monomial(vec![1, 0, 1]);
        let y2 = Monomial(vec![0, 2, 0]);
        assert!(y2 > xz);
        let x = Monomial(vec![1, 0, 0]);
        let y = Monomial(vec![0, 1, 0]);
        assert!(x > y);
        assert!(Monomial(vec![0, 0, 3]) > Monomial(vec![2, 0, 0]));
    }

    #[test]
    fn parse_and_print() {
        let c = ctx(&["x", "y"]);
        let p = Polynomial::parse("x^2 - y^5", &c).unwrap();
        assert_eq!(p.len(), 2);
        assert_eq!(p.to_string(), "-y^5 + x^2");
        let z = Polynomial::parse("(x+y)^2 - x^2 - 2*x*y - y^2", &c).unwrap();
        assert!(z.is_zero());
        let q = Polynomial::parse("1/2*x - 3", &c).unwrap();
        assert_eq!(Polynomial::parse(&q.to_string(), &c).unwrap(), q);
    }

    #[test]
    fn parse_errors() {
        let c = ctx(&["x", "y"]);
        match Polynomial::parse("x + w", &c) {
            Err(ParseError::UnknownVariable { pos, name }) => {
                assert_eq!(pos, 4);
                assert_eq!(name, "w");
            }
            other => panic!("{:?}", other),
        }
        assert!(matches!(Polynomial::parse("x +* y", &c), Err(ParseError::Syntax { pos: 3, .. })));
        assert!(Polynomial::parse("(x", &c).is_err());
        assert!(Polynomial::parse("", &c).is_err());
        assert!(Polynomial::parse("x/y", &c).is_err());
    }

    #[test]
    fn derivatives_of_g() {
        let c = ctx(&["X", "Y", "Z"]);
        let g = Polynomial::parse("Z^3+X*Y^2*Z+X^5", &c).unwrap();
        assert_eq!(g.derivative(2), Polynomial::parse("3*Z^2+X*Y^2", &c).unwrap());
        assert_eq!(g.derivative(1), Polynomial::parse("2*X*Y*Z", &c).unwrap());
        assert!(Polynomial::constant(&c, rat(7)).derivative(0).is_zero());
    }

    #[test]
    fn taylor_examples() {
        let c = ctx(&["x", "y"]);
        let f = Polynomial::parse("x^2 - y^5", &c).unwrap();
        assert_eq!(f.taylor_shift(&[rat(0), rat(0)]), f);
        let g = Polynomial::parse("x^2", &c).unwrap();
        assert_eq!(g.taylor_shift(&[rat(1), rat(0)]), Polynomial::parse("x^2+2*x+1", &c).unwrap());
        let s = f.taylor_shift(&[rat(1), rat(1)]);
        assert!(s.constant_term().is_zero());
        assert_eq!(s.coefficient_in(0, 1).constant_term(), rat(2));
        assert_eq!(s.coefficient_in(1, 1).constant_term(), rat(-5));
        assert_eq!(s.min_degree(), Some(1));
    }

    #[test]
    fn substitute_examples() {
        let c = ctx(&["Z", "X", "Y"]);
        let g = Polynomial::parse("Z^3+X*Y^2*Z+X^5", &c).unwrap();
        let map = RingMap::new(
            &c,
            &c,
            vec![
                Polynomial::parse("Z*Y", &c).unwrap(),
                Polynomial::parse("X*Y", &c).unwrap(),
                Polynomial::parse("Y", &c).unwrap(),
            ],
        )
        .unwrap();
        let t = substitute(&g, &map).unwrap().div_var_power(2, 3).unwrap();
        assert_eq!(t, Polynomial::parse("Z^3+X*Y*Z+X^5*Y^2", &c).unwrap());

        let f1 = Polynomial::parse("Z^2+X*Y^2", &c).unwrap();
        let back = RingMap::new(
            &c,
            &c,
            vec![Polynomial::parse("Z+X", &c).unwrap(), Polynomial::var(&c, 1), Polynomial::var(&c, 2)],
        )
        .unwrap();
        assert_eq!(
            back.apply(&f1).unwrap(),
            Polynomial::parse("Z^2+2*X*Z+X^2+X*Y^2", &c).unwrap()
        );
        assert_eq!(RingMap::identity(&c).apply(&g).unwrap(), g);
    }

    #[test]
    fn exact_division() {
        let c = ctx(&["x", "y"]);
        let f = Polynomial::parse("x^3 - x*y^2", &c).unwrap();
        let d = Polynomial::parse("x - y", &c).unwrap();
        assert_eq!(f.div_exact(&d).unwrap(), Polynomial::parse("x^2 + x*y", &c).unwrap());
        assert!(Polynomial::parse("x^2 + 1", &c).unwrap().div_exact(&d).is_none());
    }

    #[test]
    fn context_mismatch() {
        let a = ctx(&["x", "y"]);
        let b = ctx(&["u", "v"]);
        let f = Polynomial::parse("x", &a).unwrap();
        assert!(RingMap::identity(&b).apply(&f).is_err());
        assert!(VariableContext::new(&["x", "x"]).is_err());
        assert!(VariableContext::new(&["1x"]).is_err());
    }
}
