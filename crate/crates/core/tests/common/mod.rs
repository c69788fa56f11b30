#![allow(dead_code)]

use std::sync::Arc;

use blowup::charts::Origin;
use blowup::delta::order_at_point;
use blowup::driver::{run, Aborted, Budgets, Goal, Problem, ResolutionTrace};
use blowup::poly::rat;
use blowup::{Ideal, Monomial, Polynomial, Rational, VariableContext};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn ctx(names: &[&str]) -> Arc<VariableContext> {
    VariableContext::new(names).unwrap()
}

pub fn ideal(c: &Arc<VariableContext>, gens: &[&str]) -> Ideal {
    Ideal::parse(gens, c).unwrap()
}

pub fn poly(c: &Arc<VariableContext>, s: &str) -> Polynomial {
    Polynomial::parse(s, c).unwrap()
}

pub fn budgets() -> Budgets {
    Budgets { overlap_samples: 20, ..Budgets::default() }
}

pub fn try_run(i: &Ideal, b: u64, divisors: &[usize], goal: Goal) -> Result<ResolutionTrace, Aborted> {
    run(&Problem::new(i, b).with_divisors(divisors.to_vec()), &budgets(), goal)
}

pub fn resolve(i: &Ideal, b: u64, divisors: &[usize]) -> Result<ResolutionTrace, String> {
    try_run(i, b, divisors, Goal::Resolve).map_err(|a| a.to_string())
}

/// Copy of `f` in a context with one extra variable appended.
fn lift(f: &Polynomial, big: &Arc<VariableContext>) -> Polynomial {
    let mut out = Polynomial::zero(big);
    for (m, c) in f.terms() {
        let mut e = m.0.clone();
        e.push(0);
        out = out.add(&Polynomial::one(big).mul_term(&Monomial(e), c));
    }
    out
}

/// `f ∈ √I`, by asking whether `I + <1 - t f>` is the unit ideal.
pub fn radical_contains(i: &Ideal, f: &Polynomial) -> bool {
    let c = i.ctx();
    let mut names: Vec<String> = (0..c.dimension()).map(|v| c.name(v).to_string()).collect();
    names.push("rabinowitsch".into());
    let big = VariableContext::new(&names).unwrap();
    let t = Polynomial::var(&big, c.dimension());
    let mut gens: Vec<Polynomial> = i.generators().iter().map(|g| lift(g, &big)).collect();
    gens.push(Polynomial::one(&big).sub(&t.mul(&lift(f, &big))));
    Ideal::new(&big, gens).is_trivial().unwrap()
}

pub fn same_zero_set(a: &Ideal, b: &Ideal) -> bool {
    a.generators().iter().all(|g| radical_contains(b, g)) && b.generators().iter().all(|g| radical_contains(a, g))
}

/// Every recorded stage maximum is strictly below the previous one.
pub fn strict_descent(t: &ResolutionTrace) -> Result<(), String> {
    for w in t.invariants.windows(2) {
        if w[1] >= w[0] {
            return Err(format!("{} is not below {}", w[1], w[0]));
        }
    }
    Ok(())
}

pub fn random_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    (0..n)
        .map(|_| if rng.gen_range(0..3) == 0 { rat(0) } else { rat(rng.gen_range(-3i64..=3)) })
        .collect()
}

/// Compare order and divisor exponents of the recorded ideals of sibling
/// blow-up charts at random points of their overlap. The transition map is
/// written out here from the chart origins. Returns the number of points
/// compared.
pub fn sibling_overlaps(t: &ResolutionTrace, samples: usize, rng: &mut ChaCha8Rng) -> Result<usize, String> {
    let n = t.ctx().dimension();
    let mut compared = 0;
    for a in &t.nodes {
        let Origin::Blowup { center, pivot } = &t.tree.chart(a.chart).origin else { continue };
        let parent = t.tree.chart(a.chart).parent.unwrap();
        for &sib in &t.tree.chart(parent).children {
            let Some(b) = t.nodes.iter().find(|m| m.chart == sib && m.stage == a.stage) else { continue };
            let Origin::Blowup { pivot: k, .. } = &t.tree.chart(sib).origin else { continue };
            if sib == a.chart {
                continue;
            }
            for _ in 0..samples {
                let mut p = random_point(rng, n);
                if p[*k] == rat(0) {
                    p[*k] = rat(2);
                }
                let mut q = p.clone();
                for &j in center {
                    q[j] = if j == *k {
                        &p[*k] * &p[*pivot]
                    } else if j == *pivot {
                        rat(1) / &p[*k]
                    } else {
                        &p[j] / &p[*k]
                    };
                }
                let ia = Ideal::new(t.ctx(), a.generators.clone());
                let ib = Ideal::new(t.ctx(), b.generators.clone());
                let (oa, ob) = (order_at_point(&ia, &p), order_at_point(&ib, &q));
                if oa != ob {
                    return Err(format!("stage {}: order {} in chart {} but {} in chart {}", a.stage, oa, a.chart, ob, sib));
                }
                for (l, e) in &a.exponents {
                    if let Some(f) = b.exponents.get(l) {
                        if e != f {
                            return Err(format!("stage {}: label {} has exponent {} and {}", a.stage, l, e, f));
                        }
                    }
                }
                compared += 1;
            }
        }
    }
    Ok(compared)
}
