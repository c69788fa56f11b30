//! The Δ operator, singular loci of couples, and orders.

use crate::error::ResolveError;
use crate::ideal::Ideal;
use crate::poly::{Polynomial, Rational};

/// A couple `(J, b)`.
#[derive(Clone, Debug)]
pub struct Couple {
    pub ideal: Ideal,
    pub bound: u64,
}

impl Couple {
    pub fn new(ideal: Ideal, bound: u64) -> Couple {
        assert!(bound >= 1, "bound must be positive");
        Couple { ideal, bound }
    }
}

/// The generators of `I` together with all their first partials.
pub fn delta(i: &Ideal) -> Ideal {
    let n = i.ctx().dimension();
    let mut gens: Vec<Polynomial> = i.generators().to_vec();
    for g in i.generators() {
        for v in 0..n {
            let d = g.derivative(v);
            if !d.is_zero() && !gens.contains(&d) {
                gens.push(d);
            }
        }
    }
    Ideal::new(i.ctx(), gens)
}

/// `Δ^k(I)`; `Δ^0(I) = I`. Powers beyond the first are taken on the reduced
/// Gröbner basis of the previous one and cached on `I`.
pub fn delta_power(i: &Ideal, k: u64) -> Result<Ideal, ResolveError> {
    if k == 0 {
        return Ok(i.clone());
    }
    let mut cache = i.deltas.lock().unwrap_or_else(|e| e.into_inner());
    while (cache.len() as u64) < k {
        let next = match cache.last() {
            None => delta(i),
            Some(prev) => {
                if prev.is_trivial()? {
                    Ideal::unit(i.ctx())
                } else {
                    delta(&prev.normalized()?)
                }
            }
        };
        cache.push(next);
    }
    Ok(cache[(k - 1) as usize].clone())
}

/// `Δ^{b-1}(J)`, whose zero set is `Sing(J, b)`.
pub fn sing(c: &Couple) -> Result<Ideal, ResolveError> {
    delta_power(&c.ideal, c.bound - 1)
}

/// The largest `b` with `Δ^{b-1}(I)` proper, or 0 when `I` is the unit ideal.
pub fn max_order(i: &Ideal) -> Result<u64, ResolveError> {
    assert!(!i.is_zero(), "max_order of the zero ideal");
    let mut b = 0;
    while !delta_power(i, b)?.is_trivial()? {
        b += 1;
    }
    Ok(b)
}

/// Order of `I` at a rational point. The zero ideal has order `u64::MAX`.
pub fn order_at_point(i: &Ideal, p: &[Rational]) -> u64 {
    assert_eq!(p.len(), i.ctx().dimension(), "point dimension");
    i.generators()
        .iter()
        .filter_map(|g| g.order_at(p))
        .min()
        .unwrap_or(u64::MAX)
}

/// Whether `p` lies on `V(I)`.
pub fn vanishes_at(i: &Ideal, p: &[Rational]) -> bool {
    i.generators().iter().all(|g| num_traits::Zero::is_zero(&g.eval(p)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::{rat, VariableContext};

    #[test]
    fn delta_chain_of_g() {
        let c = VariableContext::new(&["Z", "X", "Y"]).unwrap();
        let j = Ideal::parse(&["Z^3+X*Y^2*Z+X^5"], &c).unwrap();
        let d1 = delta_power(&j, 1).unwrap();
        let expect1 = Ideal::parse(&["3*Z^2+X*Y^2", "Y^2*Z+5*X^4", "2*X*Y*Z", "Z^3+X*Y^2*Z+X^5"], &c).unwrap();
        assert!(d1.same_ideal(&expect1).unwrap());
        let d2 = delta_power(&j, 2).unwrap();
        assert!(d2.same_ideal(&Ideal::parse(&["Z", "X*Y", "Y^2", "X^3"], &c).unwrap()).unwrap());
        assert!(delta_power(&j, 3).unwrap().is_trivial().unwrap());
        assert_eq!(max_order(&j).unwrap(), 3);
    }

    #[test]
    fn orders() {
        let c = VariableContext::new(&["x", "y"]).unwrap();
        let j = Ideal::parse(&["x^2-y^5"], &c).unwrap();
        assert_eq!(order_at_point(&j, &[rat(0), rat(0)]), 2);
        assert_eq!(order_at_point(&j, &[rat(1), rat(1)]), 1);
        assert_eq!(order_at_point(&j, &[rat(2), rat(1)]), 0);
        assert_eq!(max_order(&j).unwrap(), 2);
        let s = sing(&Couple::new(j, 2)).unwrap();
        assert_eq!(s.dimension().unwrap(), 0);
        let x = Ideal::parse(&["x"], &c).unwrap();
        assert!(delta(&x).is_trivial().unwrap());
        assert!(sing(&Couple::new(x, 2)).unwrap().is_trivial().unwrap());
    }
}
