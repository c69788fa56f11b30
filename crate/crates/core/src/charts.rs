//! Affine charts, coordinate changes, blow-ups at coordinate centers and the
//! chart tree.
//!
//! Every chart uses the same variable names; a chart's map sends each parent
//! coordinate to a polynomial in the chart's own coordinates.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::ResolveError;
use crate::ideal::Ideal;
use crate::poly::{Polynomial, Rational, RingMap, VariableContext};

/// Exceptional divisor ids, assigned in creation order.
pub type DivisorLabel = u32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Origin {
    Root,
    /// Chart of the blow-up along `V(x_i : i ∈ center)` where `x_pivot` is the
    /// new exceptional coordinate.
    Blowup { center: Vec<usize>, pivot: usize },
    /// `x_var` of the parent equals `x_var - shift` here.
    CoordinateChange { var: usize, shift: Polynomial },
    /// Identity map after removing a non-coordinate hypersurface.
    Blowdown { hypersurface: Polynomial },
}

#[derive(Clone, Debug)]
pub struct Chart {
    pub id: usize,
    pub parent: Option<usize>,
    pub map: RingMap,
    pub exceptional: BTreeMap<usize, DivisorLabel>,
    pub origin: Origin,
    pub children: Vec<usize>,
}

impl Chart {
    pub fn ctx(&self) -> &Arc<VariableContext> {
        &self.map.target
    }

    pub fn label_of(&self, var: usize) -> Option<DivisorLabel> {
        self.exceptional.get(&var).copied()
    }

    pub fn var_of(&self, label: DivisorLabel) -> Option<usize> {
        self.exceptional.iter().find(|(_, &l)| l == label).map(|(&v, _)| v)
    }

    pub fn labels(&self) -> Vec<DivisorLabel> {
        let mut l: Vec<DivisorLabel> = self.exceptional.values().copied().collect();
        l.sort_unstable();
        l
    }

    /// Pivot of a blow-up chart.
    pub fn pivot(&self) -> Option<usize> {
        match &self.origin {
            Origin::Blowup { pivot, .. } => Some(*pivot),
            _ => None,
        }
    }
}

/// A coordinate change applied before blowing up.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoordinateChange {
    pub var: usize,
    pub shift: Polynomial,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Center {
    pub chart: usize,
    pub vars: Vec<usize>,
    pub pre_change: Option<CoordinateChange>,
}

impl Center {
    pub fn new(chart: usize, mut vars: Vec<usize>) -> Center {
        vars.sort_unstable();
        vars.dedup();
        Center { chart, vars, pre_change: None }
    }

    /// Read a center off an ideal whose generators are distinct coordinates
    /// up to nonzero constants.
    pub fn from_ideal(chart: usize, stage: usize, ideal: &Ideal) -> Result<Center, ResolveError> {
        let mut vars = Vec::new();
        for g in ideal.generators() {
            match coordinate_of(g) {
                Some(v) => vars.push(v),
                None => {
                    return Err(ResolveError::CenterNotCoordinate { chart, stage, ideal: ideal.to_string() })
                }
            }
        }
        if vars.is_empty() {
            return Err(ResolveError::CenterNotCoordinate { chart, stage, ideal: ideal.to_string() });
        }
        Ok(Center::new(chart, vars))
    }

    pub fn ideal(&self, ctx: &Arc<VariableContext>) -> Ideal {
        Ideal::new(ctx, self.vars.iter().map(|&v| Polynomial::var(ctx, v)).collect())
    }
}

/// `Some(i)` when `p = c * x_i` with `c` a nonzero constant.
pub fn coordinate_of(p: &Polynomial) -> Option<usize> {
    if p.len() != 1 {
        return None;
    }
    let (m, _) = p.leading_term()?;
    if m.degree() != 1 {
        return None;
    }
    m.0.iter().position(|&e| e == 1)
}

#[derive(Clone, Debug)]
pub struct ChartTree {
    ctx: Arc<VariableContext>,
    pub charts: Vec<Chart>,
    pub frontier: Vec<usize>,
    next_label: DivisorLabel,
}

impl ChartTree {
    pub fn new(ctx: &Arc<VariableContext>) -> ChartTree {
        ChartTree::with_divisors(ctx, &[])
    }

    /// Root chart with the given coordinates pre-labeled as divisors
    /// `1, 2, ...` in the order given.
    pub fn with_divisors(ctx: &Arc<VariableContext>, divisors: &[usize]) -> ChartTree {
        let mut exceptional = BTreeMap::new();
        let mut next = 1;
        for &v in divisors {
            exceptional.insert(v, next);
            next += 1;
        }
        let root = Chart {
            id: 0,
            parent: None,
            map: RingMap::identity(ctx),
            exceptional,
            origin: Origin::Root,
            children: Vec::new(),
        };
        ChartTree { ctx: ctx.clone(), charts: vec![root], frontier: vec![0], next_label: next }
    }

    pub fn ctx(&self) -> &Arc<VariableContext> {
        &self.ctx
    }

    pub fn chart(&self, id: usize) -> &Chart {
        &self.charts[id]
    }

    pub fn next_label(&self) -> DivisorLabel {
        self.next_label
    }

    fn push_child(&mut self, parent: usize, map: RingMap, exceptional: BTreeMap<usize, DivisorLabel>, origin: Origin) -> usize {
        let id = self.charts.len();
        self.charts.push(Chart { id, parent: Some(parent), map, exceptional, origin, children: Vec::new() });
        self.charts[parent].children.push(id);
        id
    }

    fn replace_in_frontier(&mut self, old: usize, new: &[usize]) {
        if let Some(pos) = self.frontier.iter().position(|&c| c == old) {
            self.frontier.splice(pos..pos + 1, new.iter().copied());
        }
    }

    /// Blow up a coordinate center; returns the new charts, one per pivot in
    /// increasing variable order. A pending coordinate change is applied first.
    pub fn blowup(&mut self, center: &Center) -> Result<Vec<usize>, ResolveError> {
        let label = self.fresh_label();
        self.blowup_with_label(center, label)
    }

    /// Reserve a new divisor label.
    pub fn fresh_label(&mut self) -> DivisorLabel {
        let l = self.next_label;
        self.next_label += 1;
        l
    }

    /// As `blowup`, with a label from `fresh_label`, so that centers in
    /// several charts of one step share one exceptional divisor.
    pub fn blowup_with_label(&mut self, center: &Center, label: DivisorLabel) -> Result<Vec<usize>, ResolveError> {
        if label >= self.next_label {
            return Err(ResolveError::BadCenter(format!("label {} was not reserved", label)));
        }
        let mut chart = center.chart;
        if let Some(ch) = &center.pre_change {
            chart = self.change_coordinates(chart, ch.var, &ch.shift)?;
        }
        let n = self.ctx.dimension();
        if center.vars.is_empty() || center.vars.iter().any(|&v| v >= n) {
            return Err(ResolveError::BadCenter(format!("{:?} in chart {}", center.vars, chart)));
        }
        if !self.frontier.contains(&chart) {
            return Err(ResolveError::BadCenter(format!("chart {} is not in the frontier", chart)));
        }
        let ctx = self.ctx.clone();
        let mut out = Vec::with_capacity(center.vars.len());
        for &pivot in &center.vars {
            let xi = Polynomial::var(&ctx, pivot);
            let images = (0..n)
                .map(|j| {
                    let xj = Polynomial::var(&ctx, j);
                    if j != pivot && center.vars.contains(&j) {
                        xj.mul(&xi)
                    } else {
                        xj
                    }
                })
                .collect();
            let mut exceptional = self.charts[chart].exceptional.clone();
            exceptional.insert(pivot, label);
            let map = RingMap::new(&ctx, &ctx, images)?;
            let id = self.push_child(chart, map, exceptional, Origin::Blowup { center: center.vars.clone(), pivot });
            out.push(id);
        }
        self.replace_in_frontier(chart, &out);
        Ok(out)
    }

    /// New chart whose coordinate `x_var` is the old `x_var + shift`. A zero
    /// shift returns `chart` itself.
    pub fn change_coordinates(&mut self, chart: usize, var: usize, shift: &Polynomial) -> Result<usize, ResolveError> {
        if shift.is_zero() {
            return Ok(chart);
        }
        if shift.involves(var) {
            return Err(ResolveError::BadCenter(format!("shift {} involves {}", shift, self.ctx.name(var))));
        }
        if self.charts[chart].exceptional.contains_key(&var) {
            return Err(ResolveError::BadCenter(format!(
                "cannot move exceptional coordinate {} in chart {}",
                self.ctx.name(var),
                chart
            )));
        }
        let ctx = self.ctx.clone();
        let mut images: Vec<Polynomial> = (0..ctx.dimension()).map(|j| Polynomial::var(&ctx, j)).collect();
        images[var] = images[var].sub(shift);
        let map = RingMap::new(&ctx, &ctx, images)?;
        let exceptional = self.charts[chart].exceptional.clone();
        let id = self.push_child(chart, map, exceptional, Origin::CoordinateChange { var, shift: shift.clone() });
        self.replace_in_frontier(chart, &[id]);
        Ok(id)
    }

    /// Identity child recording the removal of a hypersurface; no label.
    pub fn blowdown(&mut self, chart: usize, hypersurface: &Polynomial) -> usize {
        let map = RingMap::identity(&self.ctx);
        let exceptional = self.charts[chart].exceptional.clone();
        let id = self.push_child(chart, map, exceptional, Origin::Blowdown { hypersurface: hypersurface.clone() });
        self.replace_in_frontier(chart, &[id]);
        id
    }

    /// Map from the coordinates of `ancestor` into those of `descendant`.
    pub fn composed_map(&self, ancestor: usize, descendant: usize) -> Result<RingMap, ResolveError> {
        let mut path = Vec::new();
        let mut cur = descendant;
        while cur != ancestor {
            path.push(cur);
            cur = self.charts[cur]
                .parent
                .ok_or_else(|| ResolveError::BadCenter(format!("chart {} is not above {}", ancestor, descendant)))?;
        }
        let mut m = RingMap::identity(&self.ctx);
        for &c in path.iter().rev() {
            m = m.then(&self.charts[c].map)?;
        }
        Ok(m)
    }

    pub fn ancestors(&self, chart: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut cur = self.charts[chart].parent;
        while let Some(c) = cur {
            out.push(c);
            cur = self.charts[c].parent;
        }
        out
    }

    /// Image of a point of `chart` in its parent.
    pub fn to_parent(&self, chart: usize, p: &[Rational]) -> Vec<Rational> {
        self.charts[chart].map.images.iter().map(|f| f.eval(p)).collect()
    }

    /// Lift a point of `chart` to its frontier descendants. Points on a later
    /// center have no unique lift and are dropped.
    fn lift(&self, chart: usize, p: Vec<Rational>, out: &mut Vec<(usize, Vec<Rational>)>) {
        let c = &self.charts[chart];
        if c.children.is_empty() {
            if self.frontier.contains(&chart) {
                out.push((chart, p));
            }
            return;
        }
        for &k in &c.children {
            match &self.charts[k].origin {
                Origin::CoordinateChange { var, shift } => {
                    let mut q = p.clone();
                    q[*var] = &p[*var] + shift.eval(&p);
                    self.lift(k, q, out);
                }
                Origin::Blowdown { .. } | Origin::Root => self.lift(k, p.clone(), out),
                Origin::Blowup { center, pivot } => {
                    if p[*pivot].is_zero() {
                        continue;
                    }
                    let mut q = p.clone();
                    for &j in center {
                        if j != *pivot {
                            q[j] = &p[j] / &p[*pivot];
                        }
                    }
                    self.lift(k, q, out);
                }
            }
        }
    }

    /// All frontier charts containing the given point of `chart`, with its
    /// coordinates there, in chart-id order.
    pub fn locate(&self, chart: usize, p: &[Rational]) -> Result<Vec<(usize, Vec<Rational>)>, ResolveError> {
        if chart >= self.charts.len() || p.len() != self.ctx.dimension() {
            return Err(ResolveError::OutsideChart(format!("chart {} point of length {}", chart, p.len())));
        }
        let mut out = Vec::new();
        self.lift(chart, p.to_vec(), &mut out);
        let mut cur = chart;
        let mut q = p.to_vec();
        while let Some(parent) = self.charts[cur].parent {
            if let Origin::Blowup { center, pivot } = &self.charts[cur].origin {
                for &sib in &self.charts[parent].children {
                    if sib == cur {
                        continue;
                    }
                    let k = self.charts[sib].pivot().expect("blow-up sibling");
                    if q[k].is_zero() {
                        continue;
                    }
                    let yk = q[k].clone();
                    let mut r = q.clone();
                    for &j in center {
                        if j == k {
                            r[j] = &q[k] * &q[*pivot];
                        } else if j == *pivot {
                            r[j] = Rational::one() / &yk;
                        } else {
                            r[j] = &q[j] / &yk;
                        }
                    }
                    self.lift(sib, r, &mut out);
                }
            }
            q = self.to_parent(cur, &q);
            cur = parent;
        }
        out.sort_by_key(|(c, _)| *c);
        Ok(out)
    }

    /// Graphviz rendering; `annotate` supplies an extra line per chart.
    pub fn to_dot(&self, annotate: impl Fn(usize) -> Option<String>) -> String {
        let mut s = String::from("digraph charts {\n  node [shape=box];\n");
        for c in &self.charts {
            let divs: Vec<String> = c
                .exceptional
                .iter()
                .map(|(&v, &l)| format!("H{}:{}", l, self.ctx.name(v)))
                .collect();
            let mut label = format!("chart {}\\n[{}]", c.id, divs.join(", "));
            if let Some(extra) = annotate(c.id) {
                label.push_str("\\n");
                label.push_str(&extra.replace('"', "\\\""));
            }
            let _ = writeln!(s, "  c{} [label=\"{}\"];", c.id, label);
        }
        for c in &self.charts {
            if let Some(p) = c.parent {
                let edge = match &c.origin {
                    Origin::Blowup { pivot, .. } => format!("blowup/{}", self.ctx.name(*pivot)),
                    Origin::CoordinateChange { var, shift } => format!("{} += {}", self.ctx.name(*var), shift),
                    Origin::Blowdown { hypersurface } => format!("drop {}", hypersurface),
                    Origin::Root => String::new(),
                };
                let _ = writeln!(s, "  c{} -> c{} [label=\"{}\"];", p, c.id, edge);
            }
        }
        s.push_str("}\n");
        s
    }
}
