//! The resolution loop. Each stage descends through the levels (the input
//! couple, then coefficient ideals of companion objects) until it reaches a
//! center: a Γ-maximum in the monomial case or a codimension-one part of a
//! Max t locus. All frontier charts are updated together.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::charts::{coordinate_of, Center, ChartTree, CoordinateChange, DivisorLabel, Origin};
use crate::contact::{build_companion, coefficient_ideal, factorial, find_maximal_contact, Companion, DEFAULT_FACTORIAL_CAP};
use crate::delta::{delta_power, order_at_point};
use crate::error::ResolveError;
use crate::ideal::{with_gb_budget, Ideal, DEFAULT_GB_BUDGET};
use crate::invariants::{codim_one_part, max_subsets, max_word_parts, n_at, word_at, Entry, InvariantVector, MaxWord, TValue};
use crate::monomial::{max_h, GammaValue};
use crate::poly::{Monomial, Polynomial, Rational, RingMap, VariableContext};
use crate::transforms::{exceptional_exponents, strict_transform, BasicObjectState, EMinusSplit};

#[derive(Clone, Debug)]
pub struct Budgets {
    pub max_steps: usize,
    pub gb_budget: u64,
    pub factorial_cap: u64,
    /// Random points per frontier chart and stage whose invariants are
    /// compared across overlapping charts; 0 disables the check.
    pub overlap_samples: usize,
    pub seed: u64,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets {
            max_steps: 64,
            gb_budget: DEFAULT_GB_BUDGET,
            factorial_cap: DEFAULT_FACTORIAL_CAP,
            overlap_samples: 0,
            seed: 0,
        }
    }
}

/// `(A^n, (J, b), E)` with `E` given as root coordinates.
#[derive(Clone, Debug)]
pub struct Problem {
    pub ctx: Arc<VariableContext>,
    pub generators: Vec<Polynomial>,
    pub bound: u64,
    pub divisors: Vec<usize>,
}

impl Problem {
    pub fn new(ideal: &Ideal, bound: u64) -> Problem {
        assert!(bound >= 1, "bound must be positive");
        Problem { ctx: ideal.ctx().clone(), generators: ideal.generators().to_vec(), bound, divisors: Vec::new() }
    }

    pub fn with_divisors(mut self, divisors: Vec<usize>) -> Problem {
        self.divisors = divisors;
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Goal {
    Resolve,
    Desing,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeCenter {
    pub vars: Vec<usize>,
    /// Coordinate change that produced the chart during this stage.
    pub change: Option<CoordinateChange>,
    /// Set for a blowdown.
    pub hypersurface: Option<Polynomial>,
}

/// A coefficient-ideal level seen from one chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LevelSnapshot {
    pub bound: u64,
    /// Contact variables, outermost first.
    pub contact: Vec<usize>,
    pub generators: Vec<Polynomial>,
}

#[derive(Clone, Debug)]
pub struct ResolutionNode {
    pub chart: usize,
    pub stage: usize,
    pub generators: Vec<Polynomial>,
    pub bound: u64,
    pub exponents: BTreeMap<DivisorLabel, u64>,
    /// Exponents of the total transform of the input along the divisors.
    pub total: BTreeMap<DivisorLabel, u64>,
    pub invariant: Option<InvariantVector>,
    pub center: Option<NodeCenter>,
    /// Levels below the first one, in descent order.
    pub levels: Vec<LevelSnapshot>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Resolved,
    Desingularized,
    Aborted,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Resolved => "resolved",
            Status::Desingularized => "desingularized",
            Status::Aborted => "aborted",
        })
    }
}

#[derive(Clone, Debug)]
pub struct DesingRecord {
    pub stage: usize,
    pub codim: usize,
    pub strict: BTreeMap<usize, Vec<Polynomial>>,
}

#[derive(Clone, Debug)]
pub struct ResolutionTrace {
    pub tree: ChartTree,
    pub generators: Vec<Polynomial>,
    pub bound: u64,
    pub nodes: Vec<ResolutionNode>,
    /// Global maximum of the invariant at each stage.
    pub invariants: Vec<InvariantVector>,
    pub status: Status,
    pub error: Option<String>,
    /// Leaf chart → exponents `c_i` of the total transform.
    pub principal: BTreeMap<usize, BTreeMap<DivisorLabel, u64>>,
    /// Leaf chart → hypersurfaces removed without a label, with multiplicity.
    pub residuals: BTreeMap<usize, Vec<(Polynomial, u64)>>,
    pub desing: Option<DesingRecord>,
}

impl ResolutionTrace {
    pub fn ctx(&self) -> &Arc<VariableContext> {
        self.tree.ctx()
    }

    /// Number of stages at which blow-ups or blowdowns were applied.
    pub fn steps(&self) -> usize {
        self.nodes.iter().filter(|n| n.center.is_some()).map(|n| n.stage).collect::<BTreeSet<_>>().len()
    }

    /// First entry of each stage's invariant, when it is a `t` value.
    pub fn t_sequence(&self) -> Vec<TValue> {
        self.invariants
            .iter()
            .filter_map(|v| match v.entries.first() {
                Some(Entry::T(t)) => Some(t.clone()),
                _ => None,
            })
            .collect()
    }

    pub fn nodes_at(&self, stage: usize) -> impl Iterator<Item = &ResolutionNode> {
        self.nodes.iter().filter(move |n| n.stage == stage)
    }

    /// `(stage, chart, center)` in the order applied.
    pub fn centers(&self) -> Vec<(usize, usize, NodeCenter)> {
        self.nodes.iter().filter_map(|n| n.center.clone().map(|c| (n.stage, n.chart, c))).collect()
    }

    /// Latest invariant recorded for a chart.
    pub fn chart_invariant(&self, chart: usize) -> Option<&InvariantVector> {
        self.nodes.iter().rev().find(|n| n.chart == chart).and_then(|n| n.invariant.as_ref())
    }
}

#[derive(Debug)]
pub struct Aborted {
    pub error: ResolveError,
    pub stage: usize,
    pub trace: Box<ResolutionTrace>,
}

impl fmt::Display for Aborted {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "stage {}: {}", self.stage, self.error)
    }
}

impl std::error::Error for Aborted {}

pub fn resolve_object(problem: &Problem, budgets: &Budgets) -> Result<ResolutionTrace, Aborted> {
    run(problem, budgets, Goal::Resolve)
}

/// Resolution of `(I, 1)`; every leaf carries the exponents of the total
/// transform.
pub fn principalize(ideal: &Ideal, budgets: &Budgets) -> Result<ResolutionTrace, Aborted> {
    run(&Problem::new(ideal, 1), budgets, Goal::Resolve)
}

/// Runs the resolution of `(I, 1)` until the invariant equals the smooth
/// value and returns the trace with the strict transform at that stage.
pub fn embedded_desing(ideal: &Ideal, budgets: &Budgets) -> Result<ResolutionTrace, Aborted> {
    run(&Problem::new(ideal, 1), budgets, Goal::Desing)
}

pub fn run(problem: &Problem, budgets: &Budgets, goal: Goal) -> Result<ResolutionTrace, Aborted> {
    with_gb_budget(budgets.gb_budget, || {
        let mut r = Run::new(problem, budgets, goal);
        match r.go() {
            Ok(status) => Ok(r.finish(status, None)),
            Err(e) => {
                let stage = r.stage;
                let msg = format!("stage {}: {}", stage, e);
                Err(Aborted { error: e, stage, trace: Box::new(r.finish(Status::Aborted, Some(msg))) })
            }
        }
    })
}

#[derive(Clone, Debug)]
struct CompanionState {
    t: TValue,
    bound: u64,
    marker: DivisorLabel,
    parts: BTreeMap<usize, Companion>,
}

#[derive(Clone, Debug)]
struct Level {
    bound: u64,
    objs: BTreeMap<usize, Ideal>,
    /// Contact variables of the levels above, per chart.
    contact: BTreeMap<usize, Vec<usize>>,
    /// Divisors with labels from here on belong to this level.
    marker: DivisorLabel,
    last_word: Option<Rational>,
    k0: usize,
    eminus: BTreeSet<DivisorLabel>,
    companion: Option<CompanionState>,
}

enum Plan {
    Done,
    Step { entries: Vec<Entry>, centers: Vec<(usize, Vec<usize>)>, downs: Vec<(usize, Polynomial)> },
}

struct Run {
    ctx: Arc<VariableContext>,
    tree: ChartTree,
    levels: Vec<Level>,
    /// Per frontier chart: exponents by variable of the monomial split off
    /// the total transform so far.
    factor: BTreeMap<usize, Vec<u64>>,
    residuals: BTreeMap<usize, Vec<(Polynomial, u64)>>,
    changes: BTreeMap<usize, CoordinateChange>,
    stage: usize,
    budgets: Budgets,
    goal: Goal,
    generators: Vec<Polynomial>,
    bound: u64,
    codim: Option<usize>,
    nodes: Vec<ResolutionNode>,
    invariants: Vec<InvariantVector>,
    principal: BTreeMap<usize, BTreeMap<DivisorLabel, u64>>,
    desing: Option<DesingRecord>,
    rng: ChaCha8Rng,
}

fn pull(i: &Ideal, map: &RingMap) -> Ideal {
    i.map_generators(|g| map.apply_unchecked(g))
}

fn controlled(i: &Ideal, map: &RingMap, pivot: usize, b: u64, chart: usize, stage: usize) -> Result<Ideal, ResolveError> {
    let mut out = Vec::with_capacity(i.generators().len());
    for g in i.generators() {
        let p = map.apply_unchecked(g);
        match p.div_var_power(pivot, b as u32) {
            Some(q) => out.push(q),
            None => {
                return Err(ResolveError::InexactDivision {
                    chart,
                    stage,
                    detail: format!("{} by {}^{}", p, i.ctx().name(pivot), b),
                })
            }
        }
    }
    Ok(Ideal::new(i.ctx(), out))
}

fn divide_hypersurface(i: &Ideal, h: &Polynomial, b: u64, chart: usize, stage: usize) -> Result<Ideal, ResolveError> {
    let hb = h.pow(b);
    let mut out = Vec::with_capacity(i.generators().len());
    for g in i.generators() {
        match g.div_exact(&hb) {
            Some(q) => out.push(q),
            None => {
                return Err(ResolveError::InexactDivision { chart, stage, detail: format!("{} by ({})^{}", g, h, b) })
            }
        }
    }
    Ok(Ideal::new(i.ctx(), out))
}

fn consistency(chart: usize, stage: usize, detail: impl Into<String>) -> ResolveError {
    ResolveError::Consistency { chart, stage, detail: detail.into() }
}

impl Run {
    fn new(problem: &Problem, budgets: &Budgets, goal: Goal) -> Run {
        let ctx = problem.ctx.clone();
        let n = ctx.dimension();
        let tree = ChartTree::with_divisors(&ctx, &problem.divisors);
        let root = Ideal::new(&ctx, problem.generators.clone());
        let level0 = Level {
            bound: problem.bound,
            objs: [(0, root.clone())].into_iter().collect(),
            contact: BTreeMap::new(),
            marker: 0,
            last_word: None,
            k0: 0,
            eminus: BTreeSet::new(),
            companion: None,
        };
        Run {
            ctx,
            tree,
            levels: vec![level0],
            factor: [(0, vec![0; n])].into_iter().collect(),
            residuals: [(0, Vec::new())].into_iter().collect(),
            changes: BTreeMap::new(),
            stage: 0,
            budgets: budgets.clone(),
            goal,
            generators: root.generators().to_vec(),
            bound: problem.bound,
            codim: None,
            nodes: Vec::new(),
            invariants: Vec::new(),
            principal: BTreeMap::new(),
            desing: None,
            rng: ChaCha8Rng::seed_from_u64(budgets.seed),
        }
    }

    fn finish(&self, status: Status, error: Option<String>) -> ResolutionTrace {
        ResolutionTrace {
            tree: self.tree.clone(),
            generators: self.generators.clone(),
            bound: self.bound,
            nodes: self.nodes.clone(),
            invariants: self.invariants.clone(),
            status,
            error,
            principal: if status == Status::Resolved { self.principal.clone() } else { BTreeMap::new() },
            residuals: if status == Status::Resolved { self.residuals.clone() } else { BTreeMap::new() },
            desing: self.desing.clone(),
        }
    }

    fn go(&mut self) -> Result<Status, ResolveError> {
        let n = self.ctx.dimension();
        if self.bound == 1 {
            let d = Ideal::new(&self.ctx, self.generators.clone()).dimension()?;
            if d >= 0 {
                self.codim = Some(n - d as usize);
            }
        }
        loop {
            let plan = self.plan()?;
            let (entries, centers, downs) = match plan {
                Plan::Done => {
                    self.record(None, &[], &[]);
                    self.certify()?;
                    if self.goal == Goal::Desing && self.desing.is_none() {
                        return Err(ResolveError::NotDesingularized);
                    }
                    return Ok(Status::Resolved);
                }
                Plan::Step { entries, centers, downs } => (entries, centers, downs),
            };
            let vector = InvariantVector::padded(entries, n + 1);
            if !vector.is_well_formed() {
                return Err(consistency(0, self.stage, format!("malformed invariant {}", vector)));
            }
            if let Some(prev) = self.invariants.last() {
                if vector >= *prev {
                    return Err(consistency(0, self.stage, format!("invariant did not drop: {} then {}", prev, vector)));
                }
            }
            let desing_now = self.check_desing(&vector)?;
            let stop = desing_now && self.goal == Goal::Desing;
            if stop {
                self.record(Some(&vector), &[], &[]);
            } else {
                self.record(Some(&vector), &centers, &downs);
            }
            self.invariants.push(vector);
            if self.budgets.overlap_samples > 0 {
                self.check_overlaps()?;
            }
            if stop {
                return Ok(Status::Desingularized);
            }
            if self.stage >= self.budgets.max_steps {
                return Err(ResolveError::ResourceLimit { what: "blow-up steps".into(), budget: self.budgets.max_steps as u64 });
            }
            self.apply(centers, downs)?;
            self.stage += 1;
        }
    }

    fn contact_of(&self, l: usize, chart: usize) -> Vec<usize> {
        self.levels[l].contact.get(&chart).cloned().unwrap_or_default()
    }

    fn level_state(&self, l: usize, chart: usize, g: &Ideal) -> BasicObjectState {
        let marker = self.levels[l].marker;
        let divs = self
            .tree
            .chart(chart)
            .exceptional
            .iter()
            .filter(|(_, &lab)| lab >= marker)
            .map(|(&v, &lab)| (lab, v))
            .collect();
        BasicObjectState::with_divisors(chart, g.clone(), self.levels[l].bound, divs)
    }

    fn plan(&mut self) -> Result<Plan, ResolveError> {
        let n = self.ctx.dimension();
        let stage = self.stage;
        let mut entries: Vec<Entry> = Vec::new();
        let mut l = 0;
        loop {
            let bound = self.levels[l].bound;
            let objs: Vec<(usize, Ideal)> = self.levels[l].objs.iter().map(|(c, g)| (*c, g.clone())).collect();
            let mut live: BTreeMap<usize, (BasicObjectState, Ideal)> = BTreeMap::new();
            for (ch, g) in objs {
                let s = delta_power(&g, bound - 1)?;
                if !s.is_trivial()? {
                    live.insert(ch, (self.level_state(l, ch, &g), s));
                }
            }
            if live.is_empty() {
                if l == 0 {
                    return Ok(Plan::Done);
                }
                if let Some(cs) = &self.levels[l - 1].companion {
                    for (ch, comp) in &cs.parts {
                        if !comp.sing_locus()?.is_trivial()? {
                            return Err(consistency(*ch, stage, format!("level {} is resolved but its companion is not", l)));
                        }
                    }
                }
                self.levels.truncate(l);
                self.levels[l - 1].companion = None;
                entries.pop();
                l -= 1;
                continue;
            }

            let mut words: BTreeMap<usize, MaxWord> = BTreeMap::new();
            let mut wmax = Rational::zero();
            for (ch, (st, s)) in &live {
                let mw = max_word_parts(s, &st.reduced, bound)?;
                if mw.word > wmax {
                    wmax = mw.word.clone();
                }
                words.insert(*ch, mw);
            }
            let next_label = self.tree.next_label();
            {
                let level = &mut self.levels[l];
                let reset = match &level.last_word {
                    None => true,
                    Some(w) if wmax > *w => {
                        return Err(consistency(0, stage, format!("maximal w-ord rose from {} to {} at level {}", w, wmax, l)))
                    }
                    Some(w) => wmax < *w,
                };
                if reset {
                    level.k0 = stage;
                    level.eminus = (level.marker..next_label).collect();
                }
                level.last_word = Some(wmax.clone());
            }

            if wmax.is_zero() {
                self.levels.truncate(l + 1);
                self.levels[l].companion = None;
                let mut best: Option<GammaValue> = None;
                let mut per: Vec<(usize, GammaValue, Vec<usize>)> = Vec::new();
                for (ch, (st, _)) in &live {
                    let divs: Vec<(DivisorLabel, usize, u64)> =
                        st.divisors.iter().map(|&(lab, v)| (lab, v, st.exponent(lab))).collect();
                    let (g, vars) =
                        max_h(&divs, bound).ok_or_else(|| consistency(*ch, stage, "monomial object with no Γ value"))?;
                    if best.as_ref().is_none_or(|b| g > *b) {
                        best = Some(g.clone());
                    }
                    per.push((*ch, g, vars));
                }
                let best = best.expect("live charts");
                let mut centers = Vec::new();
                for (ch, g, mut vars) in per {
                    if g == best {
                        vars.extend(self.contact_of(l, ch));
                        centers.push((ch, vars));
                    }
                }
                entries.push(Entry::Gamma(best));
                return Ok(Plan::Step { entries, centers, downs: Vec::new() });
            }

            let eminus = self.levels[l].eminus.clone();
            let mut attain: BTreeMap<usize, (u32, Vec<Vec<usize>>)> = BTreeMap::new();
            let mut nmax = 0;
            for (ch, mw) in &words {
                if mw.word != wmax {
                    continue;
                }
                let st = &live[ch].0;
                let cands: Vec<usize> = st.divisors.iter().filter(|d| eminus.contains(&d.0)).map(|d| d.1).collect();
                let (nv, subs) = max_subsets(&mw.locus, &cands)?;
                nmax = nmax.max(nv);
                attain.insert(*ch, (nv, subs));
            }
            attain.retain(|_, v| v.0 == nmax);
            let t = TValue::new(wmax.clone(), nmax);
            entries.push(Entry::T(t.clone()));

            let reuse = matches!(&self.levels[l].companion, Some(cs) if cs.t == t);
            if reuse {
                let cs = self.levels[l].companion.as_ref().expect("reused companion");
                if let Some(ch) = attain.keys().find(|ch| !cs.parts.contains_key(ch)) {
                    return Err(consistency(*ch, stage, format!("max t {} reached outside the companion object", t)));
                }
            } else {
                self.levels.truncate(l + 1);
                let mut parts = BTreeMap::new();
                let mut c = 1;
                for (ch, (_, subs)) in &attain {
                    let st = &live[ch].0;
                    let comp = build_companion(&st.ideal, bound, &st.reduced, words[ch].b_prime, subs);
                    c = comp.bound;
                    parts.insert(*ch, comp);
                }
                self.levels[l].companion = Some(CompanionState { t: t.clone(), bound: c, marker: next_label, parts });
            }
            let cs = self.levels[l].companion.clone().expect("companion");

            let mut r1: Vec<(usize, Polynomial)> = Vec::new();
            for (ch, comp) in &cs.parts {
                if let Some(h) = codim_one_part(&comp.sing_locus()?) {
                    r1.push((*ch, h));
                }
            }
            if !r1.is_empty() {
                self.levels.truncate(l + 1);
                entries.push(Entry::Infinity);
                let mut centers = Vec::new();
                let mut downs = Vec::new();
                for (ch, h) in r1 {
                    if l == 0 {
                        match coordinate_of(&h) {
                            Some(i) => centers.push((ch, vec![i])),
                            None => downs.push((ch, h)),
                        }
                        continue;
                    }
                    let contact = self.contact_of(l, ch);
                    let chart = self.tree.chart(ch);
                    let pick = (0..n).filter(|v| !contact.contains(v)).find_map(|v| {
                        h.split_unit_linear(v)
                            .filter(|(_, r)| r.is_zero() || !chart.exceptional.contains_key(&v))
                            .map(|(u, r)| (v, u, r))
                    });
                    let (i, u, r) =
                        pick.ok_or_else(|| ResolveError::CenterNotCoordinate { chart: ch, stage, ideal: h.to_string() })?;
                    let target = if r.is_zero() { ch } else { self.move_chart(ch, i, r.scale(&u.recip()))? };
                    let mut vars = contact;
                    vars.push(i);
                    centers.push((target, vars));
                }
                return Ok(Plan::Step { entries, centers, downs });
            }

            if self.levels.len() > l + 1 {
                for (ch, comp) in &cs.parts {
                    if !self.levels[l + 1].objs.contains_key(ch) && !comp.sing_locus()?.is_trivial()? {
                        return Err(consistency(*ch, stage, format!("companion at level {} has no coefficient ideal", l)));
                    }
                }
                l += 1;
                continue;
            }

            let c = cs.bound;
            if c > self.budgets.factorial_cap {
                return Err(ResolveError::FactorialBlowup { b: c, cap: self.budgets.factorial_cap });
            }
            let mut objs = BTreeMap::new();
            let mut contacts = BTreeMap::new();
            for (ch, comp) in &cs.parts {
                if comp.sing_locus()?.is_trivial()? {
                    continue;
                }
                let k = comp.materialize().normalized()?;
                let excluded = self.contact_of(l, *ch);
                let mc = find_maximal_contact(&k, c, self.tree.chart(*ch), &excluded).map_err(|e| e.located(*ch, stage))?;
                let (target, k) = match &mc.change {
                    None => (*ch, k),
                    Some(chg) => {
                        let t = self.move_chart(*ch, chg.var, chg.shift.clone())?;
                        let map = self.tree.chart(t).map.clone();
                        (t, pull(&k, &map))
                    }
                };
                let coef = coefficient_ideal(k.generators(), c, mc.var, self.budgets.factorial_cap)
                    .map_err(|e| e.located(target, stage))?;
                let mut cv = excluded;
                cv.push(mc.var);
                objs.insert(target, coef.ideal);
                contacts.insert(target, cv);
            }
            if objs.is_empty() {
                return Err(consistency(0, stage, format!("companion at level {} has an empty singular locus", l)));
            }
            self.levels.push(Level {
                bound: factorial(c),
                objs,
                contact: contacts,
                marker: cs.marker,
                last_word: None,
                k0: stage,
                eminus: BTreeSet::new(),
                companion: None,
            });
            l += 1;
        }
    }

    /// Replace `chart` by the chart with `x_var` moved by `shift`, carrying
    /// every object along.
    fn move_chart(&mut self, chart: usize, var: usize, shift: Polynomial) -> Result<usize, ResolveError> {
        let target = self.tree.change_coordinates(chart, var, &shift)?;
        if target == chart {
            return Ok(chart);
        }
        let map = self.tree.chart(target).map.clone();
        for level in &mut self.levels {
            if let Some(g) = level.objs.remove(&chart) {
                level.objs.insert(target, pull(&g, &map));
            }
            if let Some(c) = level.contact.remove(&chart) {
                level.contact.insert(target, c);
            }
            if let Some(cs) = &mut level.companion {
                if let Some(comp) = cs.parts.remove(&chart) {
                    cs.parts.insert(target, comp.map_parts(|p| Ok(pull(&p.ideal, &map)))?);
                }
            }
        }
        if let Some(f) = self.factor.remove(&chart) {
            self.factor.insert(target, f);
        }
        if let Some(rs) = self.residuals.remove(&chart) {
            self.residuals.insert(target, rs.into_iter().map(|(h, e)| (map.apply_unchecked(&h), e)).collect());
        }
        self.changes.insert(target, CoordinateChange { var, shift });
        Ok(target)
    }

    fn forget(&mut self, chart: usize) {
        for level in &mut self.levels {
            level.objs.remove(&chart);
            level.contact.remove(&chart);
            if let Some(cs) = &mut level.companion {
                cs.parts.remove(&chart);
            }
        }
        self.factor.remove(&chart);
        self.residuals.remove(&chart);
    }

    fn apply(&mut self, centers: Vec<(usize, Vec<usize>)>, downs: Vec<(usize, Polynomial)>) -> Result<(), ResolveError> {
        if !centers.is_empty() {
            let label = self.tree.fresh_label();
            for (ch, vars) in centers {
                let kids = self.tree.blowup_with_label(&Center::new(ch, vars), label)?;
                for k in kids {
                    self.transfer_blowup(ch, k)?;
                }
                self.forget(ch);
            }
        }
        for (ch, h) in downs {
            let k = self.tree.blowdown(ch, &h);
            self.transfer_down(ch, k, &h)?;
            self.forget(ch);
        }
        Ok(())
    }

    fn transfer_blowup(&mut self, parent: usize, kid: usize) -> Result<(), ResolveError> {
        let chart = self.tree.chart(kid).clone();
        let (center, p) = match &chart.origin {
            Origin::Blowup { center, pivot } => (center.clone(), *pivot),
            _ => return Err(consistency(kid, self.stage, "expected a blow-up chart")),
        };
        let map = &chart.map;
        let stage = self.stage;
        for level in &mut self.levels {
            let Some(g) = level.objs.get(&parent).cloned() else { continue };
            let contact = level.contact.get(&parent).cloned().unwrap_or_default();
            if contact.contains(&p) {
                continue;
            }
            let ng = controlled(&g, map, p, level.bound, kid, stage)?;
            level.objs.insert(kid, ng);
            level.contact.insert(kid, contact);
            if let Some(cs) = &mut level.companion {
                if let Some(comp) = cs.parts.get(&parent).cloned() {
                    let nc = comp.map_parts(|part| controlled(&part.ideal, map, p, part.bound, kid, stage))?;
                    cs.parts.insert(kid, nc);
                }
            }
        }
        let f = self.factor[&parent].clone();
        let mut nf = f.clone();
        nf[p] = center.iter().map(|&v| f[v]).sum::<u64>() + self.bound;
        let mut rs = Vec::new();
        for (h, e) in &self.residuals[&parent] {
            let hp = map.apply_unchecked(h);
            let k = hp.var_order(p).unwrap_or(0);
            nf[p] += k as u64 * e;
            rs.push((hp.div_var_power(p, k).expect("order divides"), *e));
        }
        self.factor.insert(kid, nf);
        self.residuals.insert(kid, rs);
        Ok(())
    }

    fn transfer_down(&mut self, parent: usize, kid: usize, h: &Polynomial) -> Result<(), ResolveError> {
        let stage = self.stage;
        if self.levels.len() != 1 {
            return Err(consistency(parent, stage, "blowdown below the first level"));
        }
        let level = &mut self.levels[0];
        let g = level.objs[&parent].clone();
        level.objs.insert(kid, divide_hypersurface(&g, h, level.bound, kid, stage)?);
        if let Some(cs) = &mut level.companion {
            if let Some(comp) = cs.parts.get(&parent).cloned() {
                let nc = comp.map_parts(|part| divide_hypersurface(&part.ideal, h, part.bound, kid, stage))?;
                cs.parts.insert(kid, nc);
            }
        }
        self.factor.insert(kid, self.factor[&parent].clone());
        let mut rs = self.residuals[&parent].clone();
        rs.push((h.clone(), self.bound));
        self.residuals.insert(kid, rs);
        Ok(())
    }

    fn frontier(&self) -> Vec<usize> {
        let mut f = self.tree.frontier.clone();
        f.sort_unstable();
        f
    }

    fn record(&mut self, vector: Option<&InvariantVector>, centers: &[(usize, Vec<usize>)], downs: &[(usize, Polynomial)]) {
        for ch in self.frontier() {
            let chart = self.tree.chart(ch);
            let g = &self.levels[0].objs[&ch];
            let (a, _) = exceptional_exponents(g, chart);
            let f = &self.factor[&ch];
            let total = chart.exceptional.iter().map(|(&v, &lab)| (lab, a.get(&lab).copied().unwrap_or(0) + f[v])).collect();
            let center = if let Some((_, vars)) = centers.iter().find(|c| c.0 == ch) {
                let mut vars = vars.clone();
                vars.sort_unstable();
                Some(NodeCenter { vars, change: self.changes.get(&ch).cloned(), hypersurface: None })
            } else {
                downs.iter().find(|d| d.0 == ch).map(|(_, h)| NodeCenter {
                    vars: Vec::new(),
                    change: self.changes.get(&ch).cloned(),
                    hypersurface: Some(h.clone()),
                })
            };
            let levels = self.levels[1..]
                .iter()
                .filter_map(|lv| {
                    lv.objs.get(&ch).map(|g| LevelSnapshot {
                        bound: lv.bound,
                        contact: lv.contact.get(&ch).cloned().unwrap_or_default(),
                        generators: g.generators().to_vec(),
                    })
                })
                .collect();
            self.nodes.push(ResolutionNode {
                chart: ch,
                stage: self.stage,
                generators: g.generators().to_vec(),
                bound: self.bound,
                exponents: a,
                total,
                invariant: vector.cloned(),
                center,
                levels,
            });
        }
        self.changes.clear();
    }

    fn check_desing(&mut self, vector: &InvariantVector) -> Result<bool, ResolveError> {
        let Some(r) = self.codim else { return Ok(false) };
        let n = self.ctx.dimension();
        if self.desing.is_some() || *vector != InvariantVector::smooth(r, n + 1) {
            return Ok(false);
        }
        let mut strict = BTreeMap::new();
        for ch in self.frontier() {
            let m = self.tree.composed_map(0, ch)?;
            let total = Ideal::new(&self.ctx, self.generators.iter().map(|g| m.apply_unchecked(g)).collect());
            let s = strict_transform(&total, self.tree.chart(ch))?;
            if !s.is_trivial()? {
                check_smooth(&s, r).map_err(|d| consistency(ch, self.stage, d))?;
            }
            strict.insert(ch, s.generators().to_vec());
        }
        self.desing = Some(DesingRecord { stage: self.stage, codim: r, strict });
        Ok(true)
    }

    /// Total transform = monomial · residuals · final generators, generator by
    /// generator, in every leaf.
    fn certify(&mut self) -> Result<(), ResolveError> {
        for ch in self.frontier() {
            let chart = self.tree.chart(ch);
            let m = self.tree.composed_map(0, ch)?;
            let f = &self.factor[&ch];
            let mono = Monomial(f.iter().map(|&e| e as u32).collect());
            let mut rprod = Polynomial::one(&self.ctx);
            for (h, e) in &self.residuals[&ch] {
                rprod = rprod.mul(&h.pow(*e));
            }
            let g0 = &self.levels[0].objs[&ch];
            for (root, last) in self.generators.iter().zip(g0.generators()) {
                let lhs = m.apply_unchecked(root);
                let rhs = last.mul_term(&mono, &Rational::one()).mul(&rprod);
                if lhs != rhs {
                    return Err(consistency(ch, self.stage, format!("total transform of {} does not factor", root)));
                }
            }
            if f.iter().enumerate().any(|(v, &e)| e > 0 && !chart.exceptional.contains_key(&v)) {
                return Err(consistency(ch, self.stage, "monomial factor outside the exceptional divisors"));
            }
            let (a, _) = exceptional_exponents(g0, chart);
            let c = chart.exceptional.iter().map(|(&v, &lab)| (lab, a.get(&lab).copied().unwrap_or(0) + f[v])).collect();
            self.principal.insert(ch, c);
        }
        Ok(())
    }

    /// ord, w-ord, n and t of the first level agree at random points seen
    /// from every frontier chart containing them.
    fn check_overlaps(&mut self) -> Result<(), ResolveError> {
        let n = self.ctx.dimension();
        let level = &self.levels[0];
        let Some(wmax) = level.last_word.clone() else { return Ok(()) };
        let split = EMinusSplit { k0: level.k0, minus: level.eminus.clone(), plus: BTreeSet::new() };
        let b = level.bound;
        for ch in self.frontier() {
            for _ in 0..self.budgets.overlap_samples {
                let p: Vec<Rational> = (0..n)
                    .map(|_| {
                        if self.rng.gen_range(0..3) == 0 {
                            Rational::zero()
                        } else {
                            Rational::from_integer(self.rng.gen_range(-3i64..=3).into())
                        }
                    })
                    .collect();
                let seen = self.tree.locate(ch, &p)?;
                let mut reference: Option<(u64, Option<(Rational, u32)>)> = None;
                for (other, q) in seen {
                    let g = &self.levels[0].objs[&other];
                    let ord = order_at_point(g, &q);
                    let t = if ord >= b && ord != u64::MAX {
                        let st = self.level_state(0, other, g);
                        Some((word_at(&st, &q)?, n_at(&st, &split, &wmax, &q)?))
                    } else {
                        None
                    };
                    match &reference {
                        None => reference = Some((ord, t)),
                        Some(r) if *r != (ord, t.clone()) => {
                            return Err(consistency(
                                other,
                                self.stage,
                                format!("invariants differ from chart {} at a shared point", ch),
                            ))
                        }
                        _ => {}
                    }
                }
            }
        }
        Ok(())
    }
}

/// Pure codimension `r` and the Jacobian criterion on the reduced basis.
fn check_smooth(s: &Ideal, r: usize) -> Result<(), String> {
    let n = s.ctx().dimension();
    let dim = s.dimension().map_err(|e| e.to_string())?;
    if dim != (n - r) as i64 {
        return Err(format!("strict transform {} has dimension {}", s, dim));
    }
    let gens = s.groebner().map_err(|e| e.to_string())?.elements().to_vec();
    let jac: Vec<Vec<Polynomial>> = gens.iter().map(|g| (0..n).map(|v| g.derivative(v)).collect()).collect();
    let m = jacobian_minors(&jac, r);
    let check = s.add_generators(&m);
    match check.is_trivial() {
        Ok(true) => Ok(()),
        Ok(false) => Err(format!("strict transform {} is singular", s)),
        Err(e) => Err(e.to_string()),
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn go(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    go(0, n, k, &mut cur, &mut out);
    out
}

fn determinant(m: &[Vec<Polynomial>]) -> Polynomial {
    if m.len() == 1 {
        return m[0][0].clone();
    }
    let mut acc = Polynomial::zero(m[0][0].ctx());
    for j in 0..m.len() {
        let minor: Vec<Vec<Polynomial>> =
            m[1..].iter().map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, p)| p.clone()).collect()).collect();
        let term = m[0][j].mul(&determinant(&minor));
        acc = if j % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
    }
    acc
}

/// All `r × r` minors of a polynomial matrix.
pub fn jacobian_minors(m: &[Vec<Polynomial>], r: usize) -> Vec<Polynomial> {
    if m.is_empty() || r == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut out = Vec::new();
    for rows in combinations(m.len(), r) {
        for cs in combinations(cols, r) {
            let sub: Vec<Vec<Polynomial>> = rows.iter().map(|&i| cs.iter().map(|&j| m[i][j].clone()).collect()).collect();
            let d = determinant(&sub);
            if !d.is_zero() {
                out.push(d);
            }
        }
    }
    out
}
