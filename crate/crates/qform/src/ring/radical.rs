use super::finite::{Elem, FiniteRing};
use crate::error::{Error, Result};

const ABSENT: Elem = Elem::MAX;

/// J = {a : 1 − xa is a unit for every x}, sorted.
pub fn jacobson_radical(ring: &FiniteRing) -> Vec<Elem> {
    let one = ring.one();
    let unit: Vec<bool> = ring.elements().map(|a| ring.is_unit(a)).collect();
    ring.elements()
        .filter(|&a| {
            ring.elements()
                .all(|x| unit[ring.sub(one, ring.mul(x, a)) as usize])
        })
        .collect()
}

fn in_radical(ring: &FiniteRing, a: Elem) -> bool {
    ring.radical().binary_search(&a).is_ok()
}

/// Lifts an element that is idempotent modulo J to an idempotent congruent to it.
pub fn lift_idempotent(ring: &FiniteRing, e: Elem) -> Result<Elem> {
    if !in_radical(ring, ring.sub(ring.mul(e, e), e)) {
        return Err(Error::NotIdempotentModJ);
    }
    let two = ring.from_int(2);
    let three = ring.from_int(3);
    let mut e = e;
    // e ← 3e² − 2e³ squares the defect each round
    for _ in 0..64 {
        let e2 = ring.mul(e, e);
        if e2 == e {
            return Ok(e);
        }
        let e3 = ring.mul(e2, e);
        e = ring.sub(ring.mul(three, e2), ring.mul(two, e3));
    }
    Err(Error::SearchExhausted(
        "idempotent lifting did not stabilise".into(),
    ))
}

/// Lifts a complete orthogonal system of idempotents modulo J (given by
/// representatives) to a complete orthogonal system in A.
pub fn lift_orthogonal_system(ring: &FiniteRing, reps: &[Elem]) -> Result<Vec<Elem>> {
    let one = ring.one();
    let mut acc = 0;
    let mut out = Vec::with_capacity(reps.len());
    for (k, &r) in reps.iter().enumerate() {
        let rest = ring.sub(one, acc);
        let e = if k + 1 == reps.len() {
            rest
        } else {
            lift_idempotent(ring, ring.mul3(rest, r, rest))?
        };
        if !in_radical(ring, ring.sub(e, r)) {
            return Err(Error::NotIdempotentModJ);
        }
        acc = ring.add(acc, e);
        out.push(e);
    }
    Ok(out)
}

/// Sorted set xAy.
pub fn corner_set(ring: &FiniteRing, x: Elem, y: Elem) -> Vec<Elem> {
    let mut out: Vec<Elem> = ring.elements().map(|a| ring.mul3(x, a, y)).collect();
    out.sort_unstable();
    out.dedup();
    out
}

/// The (e,f)-inverse of a ∈ eAf: the a° ∈ fAe with a a° = e and a° a = f.
pub fn ef_inverse(ring: &FiniteRing, a: Elem, e: Elem, f: Elem) -> Result<Option<Elem>> {
    if ring.mul3(e, a, f) != a {
        return Err(Error::DomainViolation(format!(
            "{} does not lie in eAf",
            ring.show(a)
        )));
    }
    Ok(corner_set(ring, f, e)
        .into_iter()
        .find(|&c| ring.mul(a, c) == e && ring.mul(c, a) == f))
}

/// Table of (e,f)-inverses for every a ∈ eAf.
#[derive(Clone, Debug)]
pub struct EfInverter {
    pub e: Elem,
    pub f: Elem,
    table: Vec<Elem>,
    domain: Vec<Elem>,
}

impl EfInverter {
    pub fn new(ring: &FiniteRing, e: Elem, f: Elem) -> EfInverter {
        let domain = corner_set(ring, e, f);
        let targets = corner_set(ring, f, e);
        let mut table = vec![ABSENT; ring.size()];
        for &a in &domain {
            if let Some(&c) = targets
                .iter()
                .find(|&&c| ring.mul(a, c) == e && ring.mul(c, a) == f)
            {
                table[a as usize] = c;
            }
        }
        EfInverter {
            e,
            f,
            table,
            domain,
        }
    }

    pub fn inverse(&self, a: Elem) -> Option<Elem> {
        let c = self.table[a as usize];
        (c != ABSENT).then_some(c)
    }

    /// eAf in canonical order.
    pub fn domain(&self) -> &[Elem] {
        &self.domain
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::finite::RingSpec;
    use serde_json::json;

    fn build(v: serde_json::Value) -> FiniteRing {
        FiniteRing::build(&RingSpec::from_json(&v).unwrap()).unwrap()
    }

    // independent oracle: nilpotent elements generating nilpotent ideals,
    // J = {a : xa nilpotent for all x}
    fn radical_oracle(r: &FiniteRing) -> Vec<Elem> {
        let nilpotent = |a: Elem| {
            let mut p = a;
            for _ in 0..r.size() {
                if p == 0 {
                    return true;
                }
                p = r.mul(p, a);
            }
            p == 0
        };
        r.elements()
            .filter(|&a| r.elements().all(|x| nilpotent(r.mul(x, a))))
            .collect()
    }

    #[test]
    fn radicals_of_small_rings() {
        let z4 = build(json!({"residue": 4}));
        assert_eq!(z4.radical(), &[0, 2]);
        let d = build(json!({"truncated": {"over": {"residue": 2}, "degree": 2}}));
        let t = d.parse_literal(&json!([0, 1])).unwrap();
        assert_eq!(d.radical(), &[0, t]);
        let f4 = build(json!({"field": {"p": 2, "degree": 2}}));
        assert_eq!(f4.radical(), &[0]);
        for spec in [
            json!({"matrix": {"n": 2, "over": {"residue": 4}}}),
            json!({"matrix": {"n": 2, "over": {"truncated": {"over": {"residue": 2}, "degree": 2}}}}),
            json!({"product": [{"residue": 9}, {"residue": 2}]}),
        ] {
            let r = build(spec);
            assert_eq!(r.radical(), radical_oracle(&r).as_slice());
        }
    }

    #[test]
    fn lifting_in_dual_number_matrices() {
        let r = build(
            json!({"matrix": {"n": 2, "over": {"truncated": {"over": {"residue": 2}, "degree": 2}}}}),
        );
        let e_bar = r
            .parse_literal(&json!([[[1, 0], [0, 1]], [[0, 1], [0, 0]]]))
            .unwrap();
        let e = lift_idempotent(&r, e_bar).unwrap();
        assert!(r.is_idempotent(e));
        assert!(r.radical().binary_search(&r.sub(e, e_bar)).is_ok());
        let f_bar = r.sub(r.one(), e_bar);
        let sys = lift_orthogonal_system(&r, &[e_bar, f_bar]).unwrap();
        assert_eq!(r.add(sys[0], sys[1]), r.one());
        assert_eq!(r.mul(sys[0], sys[1]), 0);
        assert_eq!(r.mul(sys[1], sys[0]), 0);
    }

    #[test]
    fn non_idempotent_rejected() {
        let z4 = build(json!({"residue": 4}));
        assert_eq!(lift_idempotent(&z4, 1).unwrap(), 1);
        assert_eq!(lift_idempotent(&z4, 3), Ok(1));
        assert_eq!(lift_idempotent(&z4, 2), Ok(0));
        let z6 = build(json!({"residue": 6}));
        assert_eq!(lift_idempotent(&z6, 2), Err(Error::NotIdempotentModJ));
    }

    #[test]
    fn ef_inverse_examples() {
        let m = build(json!({"matrix": {"n": 2, "over": {"residue": 2}}}));
        let lit = |v| m.parse_literal(&v).unwrap();
        let e11 = lit(json!([[1, 0], [0, 0]]));
        let e22 = lit(json!([[0, 0], [0, 1]]));
        let e12 = lit(json!([[0, 1], [0, 0]]));
        let e21 = lit(json!([[0, 0], [1, 0]]));
        assert_eq!(ef_inverse(&m, e12, e11, e22).unwrap(), Some(e21));
        assert_eq!(ef_inverse(&m, 0, e11, e22).unwrap(), None);
        assert!(matches!(
            ef_inverse(&m, e21, e11, e22),
            Err(Error::DomainViolation(_))
        ));
        let z4 = build(json!({"residue": 4}));
        assert_eq!(ef_inverse(&z4, 3, 1, 1).unwrap(), Some(3));
        let inv = EfInverter::new(&m, e11, e22);
        assert_eq!(inv.inverse(e12), Some(e21));
        assert_eq!(inv.domain().len(), 2);
    }
}
