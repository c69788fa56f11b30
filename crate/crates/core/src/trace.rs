//! Serializable traces: JSON, text and DOT renderings, and an auditor that
//! replays a trace using substitution and exact division only.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::charts::{DivisorLabel, Origin};
use crate::delta::delta_power;
use crate::driver::{ResolutionTrace, Status};
use crate::ideal::Ideal;
use crate::poly::{Monomial, Polynomial, Rational, RingMap, VariableContext};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceFile {
    pub vars: Vec<String>,
    pub bound: u64,
    pub generators: Vec<String>,
    pub charts: Vec<ChartRecord>,
    pub nodes: Vec<NodeRecord>,
    pub result: ResultRecord,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChartRecord {
    pub id: usize,
    pub parent: Option<usize>,
    /// Parent coordinate → its expression in this chart.
    pub map: serde_json::Map<String, serde_json::Value>,
    pub divisors: Vec<DivisorRecord>,
    pub origin: OriginRecord,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DivisorRecord {
    pub label: DivisorLabel,
    pub var: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OriginRecord {
    Root,
    Blowup { center: Vec<String>, pivot: String },
    Change { var: String, shift: String },
    Blowdown { hypersurface: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub chart: usize,
    pub stage: usize,
    #[serde(rename = "J")]
    pub generators: Vec<String>,
    pub b: u64,
    pub a: BTreeMap<DivisorLabel, u64>,
    pub total: BTreeMap<DivisorLabel, u64>,
    pub invariant: Option<String>,
    pub center: Option<CenterRecord>,
    pub levels: Vec<LevelRecord>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelRecord {
    pub bound: u64,
    pub contact: Vec<String>,
    #[serde(rename = "J")]
    pub generators: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterRecord {
    pub vars: Vec<String>,
    pub change: Option<ChangeRecord>,
    pub hypersurface: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChangeRecord {
    pub var: String,
    pub shift: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResidualRecord {
    pub hypersurface: String,
    pub exponent: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DesingJson {
    pub stage: usize,
    pub codim: usize,
    pub strict: BTreeMap<usize, Vec<String>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub status: String,
    pub error: Option<String>,
    /// Global invariant maximum per stage.
    pub invariants: Vec<String>,
    pub principal: BTreeMap<usize, BTreeMap<DivisorLabel, u64>>,
    pub residuals: BTreeMap<usize, Vec<ResidualRecord>>,
    pub desing: Option<DesingJson>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("malformed trace: {0}")]
    Input(String),
    #[error("check failed in chart {chart} at stage {stage}: {detail}")]
    Check { chart: usize, stage: usize, detail: String },
}

/// Counts of what `verify` checked.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub nodes: usize,
    pub leaves: usize,
}

fn names(ctx: &VariableContext, vars: &[usize]) -> Vec<String> {
    vars.iter().map(|&v| ctx.name(v).to_string()).collect()
}

impl TraceFile {
    pub fn from_trace(t: &ResolutionTrace) -> TraceFile {
        let ctx = t.ctx().clone();
        let charts = t
            .tree
            .charts
            .iter()
            .map(|c| {
                let map = if c.parent.is_none() {
                    serde_json::Map::new()
                } else {
                    c.map
                        .images
                        .iter()
                        .enumerate()
                        .map(|(i, p)| (ctx.name(i).to_string(), serde_json::Value::String(p.to_string())))
                        .collect()
                };
                let mut divisors: Vec<DivisorRecord> =
                    c.exceptional.iter().map(|(&v, &l)| DivisorRecord { label: l, var: ctx.name(v).to_string() }).collect();
                divisors.sort_by_key(|d| d.label);
                let origin = match &c.origin {
                    Origin::Root => OriginRecord::Root,
                    Origin::Blowup { center, pivot } => {
                        OriginRecord::Blowup { center: names(&ctx, center), pivot: ctx.name(*pivot).to_string() }
                    }
                    Origin::CoordinateChange { var, shift } => {
                        OriginRecord::Change { var: ctx.name(*var).to_string(), shift: shift.to_string() }
                    }
                    Origin::Blowdown { hypersurface } => OriginRecord::Blowdown { hypersurface: hypersurface.to_string() },
                };
                ChartRecord { id: c.id, parent: c.parent, map, divisors, origin }
            })
            .collect();
        let nodes = t
            .nodes
            .iter()
            .map(|n| NodeRecord {
                chart: n.chart,
                stage: n.stage,
                generators: n.generators.iter().map(|g| g.to_string()).collect(),
                b: n.bound,
                a: n.exponents.clone(),
                total: n.total.clone(),
                invariant: n.invariant.as_ref().map(|v| v.to_string()),
                center: n.center.as_ref().map(|c| CenterRecord {
                    vars: names(&ctx, &c.vars),
                    change: c
                        .change
                        .as_ref()
                        .map(|ch| ChangeRecord { var: ctx.name(ch.var).to_string(), shift: ch.shift.to_string() }),
                    hypersurface: c.hypersurface.as_ref().map(|h| h.to_string()),
                }),
                levels: n
                    .levels
                    .iter()
                    .map(|l| LevelRecord {
                        bound: l.bound,
                        contact: names(&ctx, &l.contact),
                        generators: l.generators.iter().map(|g| g.to_string()).collect(),
                    })
                    .collect(),
            })
            .collect();
        let result = ResultRecord {
            status: t.status.to_string(),
            error: t.error.clone(),
            invariants: t.invariants.iter().map(|v| v.to_string()).collect(),
            principal: t.principal.clone(),
            residuals: t
                .residuals
                .iter()
                .filter(|(_, rs)| !rs.is_empty())
                .map(|(c, rs)| {
                    (*c, rs.iter().map(|(h, e)| ResidualRecord { hypersurface: h.to_string(), exponent: *e }).collect())
                })
                .collect(),
            desing: t.desing.as_ref().map(|d| DesingJson {
                stage: d.stage,
                codim: d.codim,
                strict: d.strict.iter().map(|(c, gs)| (*c, gs.iter().map(|g| g.to_string()).collect())).collect(),
            }),
        };
        TraceFile {
            vars: ctx.names().to_vec(),
            bound: t.bound,
            generators: t.generators.iter().map(|g| g.to_string()).collect(),
            charts,
            nodes,
            result,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("trace serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<TraceFile, VerifyError> {
        serde_json::from_str(text).map_err(|e| VerifyError::Input(e.to_string()))
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "input: <{}> with bound {} in {}", self.generators.join(", "), self.bound, self.vars.join(", "));
        let mut stage = None;
        for n in &self.nodes {
            if stage != Some(n.stage) {
                stage = Some(n.stage);
                match self.result.invariants.get(n.stage) {
                    Some(v) => {
                        let _ = writeln!(s, "stage {}: max {}", n.stage, v);
                    }
                    None => {
                        let _ = writeln!(s, "stage {}: final", n.stage);
                    }
                }
            }
            let a: Vec<String> = n.a.iter().map(|(l, e)| format!("H{}^{}", l, e)).collect();
            let _ = write!(s, "  chart {}: <{}>", n.chart, n.generators.join(", "));
            if !a.is_empty() {
                let _ = write!(s, " a=[{}]", a.join(" "));
            }
            if let Some(c) = &n.center {
                if let Some(ch) = &c.change {
                    let _ = write!(s, " after {} -> {} + ({})", ch.var, ch.var, ch.shift);
                }
                match &c.hypersurface {
                    Some(h) => {
                        let _ = write!(s, " remove V({})", h);
                    }
                    None => {
                        let _ = write!(s, " center V({})", c.vars.join(", "));
                    }
                }
            }
            s.push('\n');
            if n.center.is_some() {
                for l in &n.levels {
                    let _ = writeln!(s, "    on V({}): <{}> with bound {}", l.contact.join(", "), l.generators.join(", "), l.bound);
                }
            }
        }
        let _ = writeln!(s, "status: {}", self.result.status);
        if let Some(e) = &self.result.error {
            let _ = writeln!(s, "error: {}", e);
        }
        for (c, exps) in &self.result.principal {
            let m: Vec<String> = exps.iter().filter(|(_, &e)| e > 0).map(|(l, e)| format!("H{}^{}", l, e)).collect();
            let _ = write!(s, "leaf chart {}: {}", c, if m.is_empty() { "1".to_string() } else { m.join("*") });
            if let Some(rs) = self.result.residuals.get(c) {
                for r in rs {
                    let _ = write!(s, " * ({})^{}", r.hypersurface, r.exponent);
                }
            }
            s.push('\n');
        }
        if let Some(d) = &self.result.desing {
            let _ = writeln!(s, "embedded desingularization at stage {} (codimension {})", d.stage, d.codim);
            for (c, gs) in &d.strict {
                let _ = writeln!(s, "  chart {}: <{}>", c, gs.join(", "));
            }
        }
        s
    }

    /// Graphviz chart tree; each node shows the last invariant maximum
    /// recorded for the chart.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph charts {\n  node [shape=box];\n");
        for c in &self.charts {
            let divs: Vec<String> = c.divisors.iter().map(|d| format!("H{}:{}", d.label, d.var)).collect();
            let mut label = format!("chart {}\\n[{}]", c.id, divs.join(", "));
            if let Some(v) = self.nodes.iter().rev().find(|n| n.chart == c.id).and_then(|n| n.invariant.as_ref()) {
                label.push_str("\\n");
                label.push_str(&v.replace('"', "\\\""));
            }
            let _ = writeln!(s, "  c{} [label=\"{}\"];", c.id, label);
        }
        for c in &self.charts {
            if let Some(p) = c.parent {
                let edge = match &c.origin {
                    OriginRecord::Blowup { pivot, .. } => format!("blowup/{}", pivot),
                    OriginRecord::Change { var, shift } => format!("{} += {}", var, shift),
                    OriginRecord::Blowdown { hypersurface } => format!("drop {}", hypersurface),
                    OriginRecord::Root => String::new(),
                };
                let _ = writeln!(s, "  c{} -> c{} [label=\"{}\"];", p, c.id, edge);
            }
        }
        s.push_str("}\n");
        s
    }
}

struct Replay {
    gens: Vec<Polynomial>,
    factor: Vec<u64>,
    residuals: Vec<(Polynomial, u64)>,
}

struct Parsed {
    ctx: Arc<VariableContext>,
    parents: Vec<Option<usize>>,
    maps: Vec<RingMap>,
    divisors: Vec<BTreeMap<usize, DivisorLabel>>,
    origins: Vec<OriginRecord>,
}

fn var_index(ctx: &VariableContext, name: &str) -> Result<usize, VerifyError> {
    ctx.index_of(name).ok_or_else(|| VerifyError::Input(format!("unknown variable '{}'", name)))
}

fn poly(ctx: &Arc<VariableContext>, text: &str) -> Result<Polynomial, VerifyError> {
    Polynomial::parse(text, ctx).map_err(|e| VerifyError::Input(format!("'{}': {}", text, e)))
}

fn parse_charts(t: &TraceFile) -> Result<Parsed, VerifyError> {
    let ctx = VariableContext::new(&t.vars).map_err(|e| VerifyError::Input(e.to_string()))?;
    let n = ctx.dimension();
    let mut out = Parsed { ctx: ctx.clone(), parents: Vec::new(), maps: Vec::new(), divisors: Vec::new(), origins: Vec::new() };
    for (i, c) in t.charts.iter().enumerate() {
        if c.id != i {
            return Err(VerifyError::Input(format!("chart {} listed at position {}", c.id, i)));
        }
        if let Some(p) = c.parent {
            if p >= i {
                return Err(VerifyError::Input(format!("chart {} has parent {}", i, p)));
            }
        } else if i != 0 {
            return Err(VerifyError::Input(format!("chart {} has no parent", i)));
        }
        let map = if c.parent.is_none() {
            RingMap::identity(&ctx)
        } else {
            let mut images = Vec::with_capacity(n);
            for v in 0..n {
                let e = c
                    .map
                    .get(ctx.name(v))
                    .and_then(|x| x.as_str())
                    .ok_or_else(|| VerifyError::Input(format!("chart {} has no image for {}", i, ctx.name(v))))?;
                images.push(poly(&ctx, e)?);
            }
            RingMap::new(&ctx, &ctx, images).map_err(|e| VerifyError::Input(e.to_string()))?
        };
        let mut divs = BTreeMap::new();
        for d in &c.divisors {
            divs.insert(var_index(&ctx, &d.var)?, d.label);
        }
        out.parents.push(c.parent);
        out.maps.push(map);
        out.divisors.push(divs);
        out.origins.push(c.origin.clone());
    }
    if out.parents.is_empty() {
        return Err(VerifyError::Input("trace has no charts".into()));
    }
    Ok(out)
}

fn check(ok: bool, chart: usize, stage: usize, detail: impl FnOnce() -> String) -> Result<(), VerifyError> {
    if ok {
        Ok(())
    } else {
        Err(VerifyError::Check { chart, stage, detail: detail() })
    }
}

/// Walk the charts from `from` down to `to`, transforming the replayed data.
fn descend(p: &Parsed, from: usize, to: usize, state: &Replay, b: u64, stage: usize) -> Result<Replay, VerifyError> {
    let mut path = Vec::new();
    let mut cur = to;
    while cur != from {
        path.push(cur);
        cur = p.parents[cur].ok_or_else(|| VerifyError::Input(format!("chart {} is not below chart {}", to, from)))?;
    }
    let mut st = Replay { gens: state.gens.clone(), factor: state.factor.clone(), residuals: state.residuals.clone() };
    for &c in path.iter().rev() {
        let map = &p.maps[c];
        match &p.origins[c] {
            OriginRecord::Root => return Err(VerifyError::Input(format!("chart {} is a second root", c))),
            OriginRecord::Change { .. } => {
                st.gens = st.gens.iter().map(|g| map.apply_unchecked(g)).collect();
                st.residuals = st.residuals.iter().map(|(h, e)| (map.apply_unchecked(h), *e)).collect();
            }
            OriginRecord::Blowdown { hypersurface } => {
                let h = poly(&p.ctx, hypersurface)?;
                let hb = h.pow(b);
                let mut gens = Vec::with_capacity(st.gens.len());
                for g in &st.gens {
                    let q = g.div_exact(&hb);
                    check(q.is_some(), c, stage, || format!("{} is not divisible by ({})^{}", g, h, b))?;
                    gens.push(q.expect("checked"));
                }
                st.gens = gens;
                st.residuals.push((h, b));
            }
            OriginRecord::Blowup { center, pivot } => {
                let piv = var_index(&p.ctx, pivot)?;
                let cvars = center.iter().map(|v| var_index(&p.ctx, v)).collect::<Result<Vec<_>, _>>()?;
                let mut gens = Vec::with_capacity(st.gens.len());
                for g in &st.gens {
                    let pulled = map.apply_unchecked(g);
                    let q = pulled.div_var_power(piv, b as u32);
                    check(q.is_some(), c, stage, || format!("{} is not divisible by {}^{}", pulled, pivot, b))?;
                    gens.push(q.expect("checked"));
                }
                st.gens = gens;
                let mut f = st.factor.clone();
                f[piv] = cvars.iter().map(|&v| st.factor[v]).sum::<u64>() + b;
                let mut rs = Vec::with_capacity(st.residuals.len());
                for (h, e) in &st.residuals {
                    let hp = map.apply_unchecked(h);
                    let k = hp.var_order(piv).unwrap_or(0);
                    f[piv] += k as u64 * e;
                    rs.push((hp.div_var_power(piv, k).expect("order divides"), *e));
                }
                st.factor = f;
                st.residuals = rs;
            }
        }
    }
    Ok(st)
}

/// Replays the recorded transforms from the input and checks every node's
/// generators and exponents, the centers against the chart tree, and at the
/// leaves of a resolved trace the factorization of the total transform and
/// the emptiness of the singular locus.
pub fn verify(t: &TraceFile) -> Result<VerifyReport, VerifyError> {
    let p = parse_charts(t)?;
    let ctx = p.ctx.clone();
    let n = ctx.dimension();
    if t.bound == 0 {
        return Err(VerifyError::Input("bound must be positive".into()));
    }
    if t.nodes.is_empty() {
        return Err(VerifyError::Input("trace has no nodes".into()));
    }
    let b = t.bound;
    let input = t.generators.iter().map(|g| poly(&ctx, g)).collect::<Result<Vec<_>, _>>()?;
    let root = Replay { gens: input.clone(), factor: vec![0; n], residuals: Vec::new() };
    let mut prev: BTreeMap<usize, Replay> = BTreeMap::new();
    let mut current: BTreeMap<usize, Replay> = BTreeMap::new();
    let mut stage = 0;
    let mut report = VerifyReport::default();
    for node in &t.nodes {
        if node.chart >= p.parents.len() {
            return Err(VerifyError::Input(format!("node refers to unknown chart {}", node.chart)));
        }
        if node.stage != stage {
            if node.stage != stage + 1 {
                return Err(VerifyError::Input(format!("stage {} follows stage {}", node.stage, stage)));
            }
            prev = std::mem::take(&mut current);
            stage = node.stage;
        }
        let (source, base) = if stage == 0 {
            (0, &root)
        } else {
            let mut cur = Some(node.chart);
            let mut found = None;
            while let Some(c) = cur {
                if let Some(r) = prev.get(&c) {
                    found = Some((c, r));
                    break;
                }
                cur = p.parents[c];
            }
            found.ok_or_else(|| VerifyError::Check {
                chart: node.chart,
                stage,
                detail: "no chart of the previous stage lies above this one".into(),
            })?
        };
        let st = descend(&p, source, node.chart, base, b, stage)?;
        let recorded = node.generators.iter().map(|g| poly(&ctx, g)).collect::<Result<Vec<_>, _>>()?;
        check(recorded == st.gens, node.chart, stage, || {
            format!(
                "recorded generators <{}> differ from the replayed <{}>",
                node.generators.join(", "),
                st.gens.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(", ")
            )
        })?;
        check(node.b == b, node.chart, stage, || format!("bound {} instead of {}", node.b, b))?;
        let divs = &p.divisors[node.chart];
        let a = exponents_of(&st.gens, divs);
        check(a == node.a, node.chart, stage, || format!("exponents {:?} recorded, {:?} replayed", node.a, a))?;
        let total: BTreeMap<DivisorLabel, u64> =
            divs.iter().map(|(&v, &l)| (l, a.get(&l).copied().unwrap_or(0) + st.factor[v])).collect();
        check(total == node.total, node.chart, stage, || {
            format!("total exponents {:?} recorded, {:?} replayed", node.total, total)
        })?;
        if let Some(c) = &node.center {
            check_center(&p, node.chart, stage, c)?;
        }
        current.insert(node.chart, st);
        report.nodes += 1;
    }
    if t.result.status == Status::Resolved.to_string() {
        check(!current.is_empty(), 0, stage, || "resolved trace has no final nodes".into())?;
        let leaves: Vec<usize> = current.keys().copied().collect();
        let recorded: Vec<usize> = t.result.principal.keys().copied().collect();
        check(leaves == recorded, 0, stage, || format!("leaf charts {:?} but certificates for {:?}", leaves, recorded))?;
        for (&c, st) in &current {
            let node = t.nodes.iter().rev().find(|x| x.chart == c).expect("node exists");
            check(t.result.principal[&c] == node.total, c, stage, || "certificate differs from the final node".into())?;
            let res = t
                .result
                .residuals
                .get(&c)
                .map(|rs| rs.iter().map(|r| Ok((poly(&ctx, &r.hypersurface)?, r.exponent))).collect::<Result<Vec<_>, _>>())
                .transpose()?
                .unwrap_or_default();
            check(res == st.residuals, c, stage, || "recorded residual hypersurfaces differ from the replay".into())?;
            let m = composed(&p, c);
            let mono = Monomial(st.factor.iter().map(|&e| e as u32).collect());
            let mut rprod = Polynomial::one(&ctx);
            for (h, e) in &st.residuals {
                rprod = rprod.mul(&h.pow(*e));
            }
            for (g, last) in input.iter().zip(&st.gens) {
                let lhs = m.apply_unchecked(g);
                let rhs = last.mul_term(&mono, &Rational::from_integer(1.into())).mul(&rprod);
                check(lhs == rhs, c, stage, || format!("total transform of {} does not factor", g))?;
            }
            let sing = delta_power(&Ideal::new(&ctx, st.gens.clone()), b - 1).and_then(|s| s.is_trivial());
            check(matches!(sing, Ok(true)), c, stage, || "singular locus is not empty".into())?;
            report.leaves += 1;
        }
    }
    Ok(report)
}

fn exponents_of(gens: &[Polynomial], divs: &BTreeMap<usize, DivisorLabel>) -> BTreeMap<DivisorLabel, u64> {
    let mut out = BTreeMap::new();
    for (&v, &l) in divs {
        let e = gens.iter().filter_map(|g| g.var_order(v)).min().unwrap_or(0);
        out.insert(l, e as u64);
    }
    out
}

fn composed(p: &Parsed, chart: usize) -> RingMap {
    let mut path = Vec::new();
    let mut cur = Some(chart);
    while let Some(c) = cur {
        path.push(c);
        cur = p.parents[c];
    }
    let mut m = RingMap::identity(&p.ctx);
    for &c in path.iter().rev() {
        m = m.then(&p.maps[c]).expect("same context");
    }
    m
}

/// A blow-up center must match the origins of the children created from
/// the node's chart.
fn check_center(p: &Parsed, chart: usize, stage: usize, c: &CenterRecord) -> Result<(), VerifyError> {
    let kids: Vec<usize> = (0..p.parents.len()).filter(|&k| p.parents[k] == Some(chart)).collect();
    check(!kids.is_empty(), chart, stage, || "center recorded but the chart has no children".into())?;
    for k in kids {
        match (&p.origins[k], &c.hypersurface) {
            (OriginRecord::Blowup { center, .. }, None) => {
                check(*center == c.vars, chart, stage, || format!("child {} blows up {:?}, not {:?}", k, center, c.vars))?
            }
            (OriginRecord::Blowdown { hypersurface }, Some(h)) => {
                check(hypersurface == h, chart, stage, || format!("child {} removes {}, not {}", k, hypersurface, h))?
            }
            _ => return Err(VerifyError::Check { chart, stage, detail: format!("child {} does not match the center", k) }),
        }
    }
    Ok(())
}
