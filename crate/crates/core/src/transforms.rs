//! Transforms of couples along blow-ups: controlled and strict transforms,
//! exceptional exponents, and the divisorial step.

use std::collections::{BTreeMap, BTreeSet};

use crate::charts::{Chart, ChartTree, DivisorLabel, Origin};
use crate::error::ResolveError;
use crate::ideal::Ideal;
use crate::poly::{Monomial, Polynomial};

/// `(J_k, b, E_k)` in one chart together with `J_k = ∏ x_i^{a_i} · J̄_k`.
#[derive(Clone, Debug)]
pub struct BasicObjectState {
    pub chart: usize,
    pub ideal: Ideal,
    pub bound: u64,
    /// `(label, variable)` sorted by label.
    pub divisors: Vec<(DivisorLabel, usize)>,
    pub exponents: BTreeMap<DivisorLabel, u64>,
    pub reduced: Ideal,
}

impl BasicObjectState {
    pub fn new(chart: &Chart, ideal: Ideal, bound: u64) -> BasicObjectState {
        let (exponents, reduced) = exceptional_exponents(&ideal, chart);
        let mut divisors: Vec<(DivisorLabel, usize)> = chart.exceptional.iter().map(|(&v, &l)| (l, v)).collect();
        divisors.sort_unstable();
        BasicObjectState { chart: chart.id, ideal, bound, divisors, exponents, reduced }
    }

    /// State whose exceptional part only uses the given `(label, var)`
    /// divisors.
    pub fn with_divisors(chart: usize, ideal: Ideal, bound: u64, mut divisors: Vec<(DivisorLabel, usize)>) -> BasicObjectState {
        divisors.sort_unstable();
        let (exponents, reduced) = reduce_with(&ideal, &divisors);
        BasicObjectState { chart, ideal, bound, divisors, exponents, reduced }
    }

    pub fn exponent(&self, label: DivisorLabel) -> u64 {
        self.exponents.get(&label).copied().unwrap_or(0)
    }

    /// `∏ x_i^{a_i} · J̄` as generators, for reconstruction checks.
    pub fn reconstructed(&self) -> Ideal {
        let n = self.ideal.ctx().dimension();
        let mut m = Monomial::one(n);
        for &(l, v) in &self.divisors {
            m.0[v] = self.exponent(l) as u32;
        }
        self.reduced.map_generators(|g| g.mul_term(&m, &num_traits::One::one()))
    }
}

/// The E⁻/E⁺ split of the current labels.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EMinusSplit {
    pub k0: usize,
    pub minus: BTreeSet<DivisorLabel>,
    pub plus: BTreeSet<DivisorLabel>,
}

/// `a_i` = least `x_i`-adic order over the generators, for each exceptional
/// coordinate, and the generators with those powers removed.
pub fn exceptional_exponents(i: &Ideal, chart: &Chart) -> (BTreeMap<DivisorLabel, u64>, Ideal) {
    let mut exps = BTreeMap::new();
    let mut gens = i.generators().to_vec();
    for (&v, &l) in &chart.exceptional {
        let a = gens.iter().filter_map(|g| g.var_order(v)).min().unwrap_or(0);
        if a > 0 {
            gens = gens.iter().map(|g| g.div_var_power(v, a).expect("minimal order divides")).collect();
        }
        exps.insert(l, a as u64);
    }
    (exps, Ideal::new(i.ctx(), gens))
}

/// Pull back along the chart map of `child` and divide by the new
/// exceptional coordinate to the power `b`.
pub fn controlled_transform(state: &BasicObjectState, tree: &ChartTree, child: usize) -> Result<BasicObjectState, ResolveError> {
    let c = tree.chart(child);
    if c.parent != Some(state.chart) {
        return Err(ResolveError::BadCenter(format!("chart {} is not a child of {}", child, state.chart)));
    }
    let pulled: Vec<Polynomial> = state.ideal.generators().iter().map(|g| c.map.apply(g)).collect::<Result<_, _>>()?;
    let gens = match &c.origin {
        Origin::Blowup { pivot, .. } => {
            let mut out = Vec::with_capacity(pulled.len());
            for g in pulled {
                match g.div_var_power(*pivot, state.bound as u32) {
                    Some(q) => out.push(q),
                    None => {
                        return Err(ResolveError::InexactDivision {
                            chart: child,
                            stage: 0,
                            detail: format!("{} by {}^{}", g, tree.ctx().name(*pivot), state.bound),
                        })
                    }
                }
            }
            out
        }
        Origin::CoordinateChange { .. } | Origin::Root => pulled,
        Origin::Blowdown { hypersurface } => {
            return divisorial_blowdown(state, hypersurface).map(|s| BasicObjectState::new(c, s.ideal, s.bound))
        }
    };
    Ok(BasicObjectState::new(c, Ideal::new(tree.ctx(), gens), state.bound))
}

/// Saturation of `total` by every exceptional coordinate of `chart`.
pub fn strict_transform(total: &Ideal, chart: &Chart) -> Result<Ideal, ResolveError> {
    let vars: Vec<usize> = chart.exceptional.keys().copied().collect();
    saturate_by_vars(total, &vars)
}

/// `I : (∏ x_v)^∞`.
pub fn saturate_by_vars(i: &Ideal, vars: &[usize]) -> Result<Ideal, ResolveError> {
    if i.generators().len() == 1 {
        let mut g = i.generators()[0].clone();
        for &v in vars {
            let a = g.var_order(v).unwrap_or(0);
            g = g.div_var_power(v, a).unwrap();
        }
        return Ok(Ideal::new(i.ctx(), vec![g]));
    }
    let mut cur = i.clone();
    for &v in vars {
        let x = Polynomial::var(i.ctx(), v);
        cur = cur.colon_sat(&x)?.1;
    }
    Ok(cur)
}

/// Remove `h^b` from every generator; the chart and its labels are unchanged.
pub fn divisorial_blowdown(state: &BasicObjectState, h: &Polynomial) -> Result<BasicObjectState, ResolveError> {
    let hb = h.pow(state.bound);
    let mut gens = Vec::with_capacity(state.ideal.generators().len());
    for g in state.ideal.generators() {
        match g.div_exact(&hb) {
            Some(q) => gens.push(q),
            None => {
                return Err(ResolveError::InexactDivision {
                    chart: state.chart,
                    stage: 0,
                    detail: format!("{} by ({})^{}", g, h, state.bound),
                })
            }
        }
    }
    let ideal = Ideal::new(state.ideal.ctx(), gens);
    let mut out = state.clone();
    let (exps, reduced) = reduce_with(&ideal, &state.divisors);
    out.ideal = ideal;
    out.exponents = exps;
    out.reduced = reduced;
    Ok(out)
}

fn reduce_with(i: &Ideal, divisors: &[(DivisorLabel, usize)]) -> (BTreeMap<DivisorLabel, u64>, Ideal) {
    let mut exps = BTreeMap::new();
    let mut gens = i.generators().to_vec();
    for &(l, v) in divisors {
        let a = gens.iter().filter_map(|g| g.var_order(v)).min().unwrap_or(0);
        if a > 0 {
            gens = gens.iter().map(|g| g.div_var_power(v, a).unwrap()).collect();
        }
        exps.insert(l, a as u64);
    }
    (exps, Ideal::new(i.ctx(), gens))
}
