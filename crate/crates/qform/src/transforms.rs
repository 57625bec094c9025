use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::forms::{PresentedModule, QuadraticSpace};
use crate::matrix::{Mat, Vector};
use crate::ring::{corner_set, AntiStructure, Elem, FiniteRing, LambdaSpec, UnitaryRing};

/// Conjugation of (σ, u, Λ) by a unit v; forms go to vβ.
#[derive(Clone, Debug)]
pub struct ConjugationMap {
    v: Elem,
    source: UnitaryRing,
    target: UnitaryRing,
}

pub fn conjugate(ur: &UnitaryRing, v: Elem) -> Result<ConjugationMap> {
    let r = ur.ring();
    let vinv = r.inv(v).ok_or(Error::NotAUnit)?;
    let sigma: Vec<Elem> = r.elements().map(|a| r.mul3(v, ur.sigma(a), vinv)).collect();
    let vs_inv = r.inv(ur.sigma(v)).ok_or(Error::NotAUnit)?;
    let u = r.mul3(v, vs_inv, ur.u());
    let lambda: Vec<Elem> = ur
        .lambda_generators()
        .iter()
        .map(|&l| r.mul(v, l))
        .collect();
    let target = UnitaryRing::new(
        r.clone(),
        AntiStructure { sigma, u },
        LambdaSpec::Generators(lambda),
    )?;
    Ok(ConjugationMap {
        v,
        source: ur.clone(),
        target,
    })
}

impl ConjugationMap {
    /// Conjugation onto an already-built target (trusted to be the conjugate).
    pub(crate) fn onto(source: &UnitaryRing, v: Elem, target: &UnitaryRing) -> ConjugationMap {
        ConjugationMap {
            v,
            source: source.clone(),
            target: target.clone(),
        }
    }

    pub fn v(&self) -> Elem {
        self.v
    }

    pub fn source(&self) -> &UnitaryRing {
        &self.source
    }

    pub fn target(&self) -> &UnitaryRing {
        &self.target
    }

    /// (P, [β]) ↦ (P, [vβ]).
    pub fn map_space(&self, s: &QuadraticSpace) -> Result<QuadraticSpace> {
        if !s.ur().same(&self.source) {
            return Err(Error::RingMismatch);
        }
        let r = self.source.ring();
        QuadraticSpace::new(
            &self.target,
            s.module().clone(),
            s.gram().left_scale(r, self.v),
        )
    }

    /// Isometries are the same maps on both sides.
    pub fn map_isometry(&self, u: &Mat) -> Mat {
        u.clone()
    }

    /// Reflection parameter c ↦ vc.
    pub fn map_parameter(&self, c: Elem) -> Elem {
        self.source.ring().mul(self.v, c)
    }

    pub fn inverse(&self) -> Result<ConjugationMap> {
        let vinv = self.source.ring().inv(self.v).ok_or(Error::NotAUnit)?;
        Ok(ConjugationMap {
            v: vinv,
            source: self.target.clone(),
            target: self.source.clone(),
        })
    }
}

/// e-transfer to the corner (eAe, σ|, eu, eΛe), with 1 = Σ x_j e y_j fixing coordinates.
#[derive(Clone, Debug)]
pub struct TransferMap {
    e: Elem,
    source: UnitaryRing,
    target: UnitaryRing,
    xs: Vec<Elem>,
    ys: Vec<Elem>,
}

pub fn transfer(ur: &UnitaryRing, e: Elem) -> Result<TransferMap> {
    let r = ur.ring();
    if !r.is_idempotent(e) {
        return Err(Error::DomainViolation(format!(
            "{} is not idempotent",
            r.show(e)
        )));
    }
    if ur.sigma(e) != e {
        return Err(Error::NotSymmetricIdempotent);
    }
    let gens = r.additive_generators();
    let products: Vec<Elem> = gens
        .iter()
        .flat_map(|&x| gens.iter().map(move |&y| (x, y)))
        .map(|(x, y)| r.mul3(x, e, y))
        .collect();
    if crate::ring::additive_closure(r, &products).len() != r.size() {
        return Err(Error::NotFullIdempotent);
    }
    let (xs, ys) = unit_decomposition(r, e)?;
    let members = corner_set(r, e, e);
    let d = r.subring(&members, e);
    let into = |a: Elem| d.project(a).expect("corner element");
    let sigma: Vec<Elem> = d
        .elements()
        .map(|a| into(ur.sigma(d.lift(a).unwrap())))
        .collect();
    let lambda: Vec<Elem> = ur
        .lambda_generators()
        .iter()
        .map(|&l| into(r.mul3(e, l, e)))
        .collect();
    let target = UnitaryRing::new(
        d.clone(),
        AntiStructure {
            sigma,
            u: into(r.mul(e, ur.u())),
        },
        LambdaSpec::Generators(lambda),
    )?;
    Ok(TransferMap {
        e,
        source: ur.clone(),
        target,
        xs,
        ys,
    })
}

/// Shortest 1 = Σ x_j e y_j, least witnesses first.
fn unit_decomposition(r: &FiniteRing, e: Elem) -> Result<(Vec<Elem>, Vec<Elem>)> {
    let mut witness: HashMap<Elem, (Elem, Elem)> = HashMap::new();
    let mut steps: Vec<Elem> = Vec::new();
    for x in r.elements() {
        let xe = r.mul(x, e);
        for y in r.elements() {
            let s = r.mul(xe, y);
            if s != 0 && !witness.contains_key(&s) {
                witness.insert(s, (x, y));
                steps.push(s);
            }
        }
    }
    steps.sort_unstable();
    let mut parent: HashMap<Elem, (Elem, Elem)> = HashMap::new();
    let mut frontier = vec![0 as Elem];
    parent.insert(0, (0, 0));
    while !frontier.is_empty() && !parent.contains_key(&r.one()) {
        let mut next = Vec::new();
        for &a in &frontier {
            for &s in &steps {
                let b = r.add(a, s);
                if let std::collections::hash_map::Entry::Vacant(v) = parent.entry(b) {
                    v.insert((a, s));
                    next.push(b);
                }
            }
        }
        frontier = next;
    }
    if !parent.contains_key(&r.one()) {
        return Err(Error::NotFullIdempotent);
    }
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut cur = r.one();
    while cur != 0 {
        let (prev, s) = parent[&cur];
        let (x, y) = witness[&s];
        xs.push(x);
        ys.push(y);
        cur = prev;
    }
    xs.reverse();
    ys.reverse();
    Ok((xs, ys))
}

impl TransferMap {
    pub fn e(&self) -> Elem {
        self.e
    }

    pub fn source(&self) -> &UnitaryRing {
        &self.source
    }

    pub fn target(&self) -> &UnitaryRing {
        &self.target
    }

    /// Number of corner coordinates per ambient coordinate.
    pub fn width(&self) -> usize {
        self.xs.len()
    }

    fn corner(&self) -> &FiniteRing {
        self.target.ring()
    }

    fn to_corner(&self, a: Elem) -> Elem {
        self.corner().project(a).expect("corner element")
    }

    /// (e y_j a x_{j'} e) block expansion of an ambient matrix.
    fn expand(&self, m: &Mat, left: impl Fn(usize) -> Elem) -> Mat {
        let r = self.source.ring();
        let w = self.width();
        let mut out = Mat::zeros(m.rows * w, m.cols * w);
        for l in 0..m.rows {
            for j in 0..w {
                let lj = left(j);
                for mm in 0..m.cols {
                    let a = r.mul(lj, m.get(l, mm));
                    for jp in 0..w {
                        let v = r.mul3(a, self.xs[jp], self.e);
                        out.set(l * w + j, mm * w + jp, self.to_corner(v));
                    }
                }
            }
        }
        out
    }

    fn module_image(&self, m: &PresentedModule) -> Result<PresentedModule> {
        let r = self.source.ring();
        let proj = self.expand(m.proj(), |j| r.mul(self.e, self.ys[j]));
        PresentedModule::new(self.corner(), proj)
    }

    /// (P, [β]) ↦ (Pe, [β_e]).
    pub fn map_space(&self, s: &QuadraticSpace) -> Result<QuadraticSpace> {
        if !s.ur().same(&self.source) {
            return Err(Error::RingMismatch);
        }
        let r = self.source.ring();
        let module = self.module_image(s.module())?;
        let gram = self.expand(s.gram(), |j| r.mul(self.e, self.source.sigma(self.xs[j])));
        QuadraticSpace::new(&self.target, module, gram)
    }

    /// Restriction of an endomorphism of P to Pe.
    pub fn map_isometry(&self, u: &Mat) -> Mat {
        let r = self.source.ring();
        self.expand(u, |j| r.mul(self.e, self.ys[j]))
    }

    /// p ∈ Pe ↦ (e y_j p_l)_{l,j}.
    pub fn map_vector(&self, p: &[Elem]) -> Vector {
        let r = self.source.ring();
        p.iter()
            .flat_map(|&a| self.ys.iter().map(move |&y| (a, y)))
            .map(|(a, y)| self.to_corner(r.mul3(self.e, y, a)))
            .collect()
    }

    /// Inverse of [`TransferMap::map_vector`].
    pub fn unmap_vector(&self, q: &[Elem]) -> Vector {
        let r = self.source.ring();
        let w = self.width();
        q.chunks(w)
            .map(|c| {
                r.sum(
                    c.iter()
                        .zip(&self.xs)
                        .map(|(&b, &x)| r.mul(x, self.corner().lift(b).unwrap())),
                )
            })
            .collect()
    }

    /// Class-level inverse: a form on the corner module pulled back to `original`'s module.
    pub fn pull_back(
        &self,
        original: &QuadraticSpace,
        corner_gram: &Mat,
    ) -> Result<QuadraticSpace> {
        let r = self.source.ring();
        let w = self.width();
        let k = original.rank();
        if corner_gram.rows != k * w || corner_gram.cols != k * w {
            return Err(Error::ShapeMismatch(
                "corner gram has the wrong size".into(),
            ));
        }
        let mut b = Mat::zeros(k, k);
        for l in 0..k {
            for m in 0..k {
                let mut acc = 0;
                for j in 0..w {
                    for jp in 0..w {
                        let entry = self
                            .corner()
                            .lift(corner_gram.get(l * w + j, m * w + jp))
                            .unwrap();
                        acc = r.add(
                            acc,
                            r.mul3(self.source.sigma(self.ys[j]), entry, self.ys[jp]),
                        );
                    }
                }
                b.set(l, m, acc);
            }
        }
        original.with_gram(b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn unitary(v: serde_json::Value) -> UnitaryRing {
        UnitaryRing::from_json(&v).unwrap()
    }

    fn m2f2() -> UnitaryRing {
        unitary(
            json!({"ring": {"matrix": {"n": 2, "over": {"residue": 2}}}, "sigma": "transpose", "u": [[1,0],[0,1]], "lambda": "min"}),
        )
    }

    #[test]
    fn conjugation_examples() {
        let f3 =
            unitary(json!({"ring": {"residue": 3}, "sigma": "identity", "u": 1, "lambda": "min"}));
        let c = conjugate(&f3, 2).unwrap();
        assert_eq!(c.target().u(), 1);
        assert!(matches!(conjugate(&f3, 0), Err(Error::NotAUnit)));
        let m = m2f2();
        let v = m.ring().parse_literal(&json!([[0, 1], [1, 0]])).unwrap();
        let c = conjugate(&m, v).unwrap();
        let back = c.inverse().unwrap();
        assert!(back.target().same(&m));
    }

    #[test]
    fn corner_of_m2f2_is_f2() {
        let m = m2f2();
        let e11 = m.ring().parse_literal(&json!([[1, 0], [0, 0]])).unwrap();
        let t = transfer(&m, e11).unwrap();
        assert_eq!(t.target().ring().size(), 2);
        assert_eq!(t.width(), 2);
        let id = transfer(&m, m.ring().one()).unwrap();
        assert_eq!(id.width(), 1);
        let e12 = m.ring().parse_literal(&json!([[0, 1], [0, 0]])).unwrap();
        assert!(matches!(transfer(&m, e12), Err(Error::DomainViolation(_))));
    }

    #[test]
    fn hyperbolic_m2f2_transfers_to_rank_four() {
        let m = m2f2();
        let r = m.ring();
        let h = QuadraticSpace::free(
            &m,
            Mat::from_rows(vec![vec![0, r.one()], vec![0, 0]]).unwrap(),
        )
        .unwrap();
        let e11 = r.parse_literal(&json!([[1, 0], [0, 0]])).unwrap();
        let t = transfer(&m, e11).unwrap();
        let he = t.map_space(&h).unwrap();
        assert_eq!(he.module().cardinality().unwrap(), 16);
        assert!(he.is_unimodular().unwrap());
        let back = t.pull_back(&h, he.gram()).unwrap();
        assert!(back.classes_equal(&h).unwrap());
    }

    #[test]
    fn exchange_sigma_does_not_fix_half() {
        let x = unitary(
            json!({"ring": {"product": [{"residue": 2}, {"residue": 2}]}, "sigma": "exchange", "u": [1,1], "lambda": {"generators": [[1,1]]}}),
        );
        let half = x.ring().parse_literal(&json!([1, 0])).unwrap();
        assert!(matches!(
            transfer(&x, half),
            Err(Error::NotSymmetricIdempotent)
        ));
    }
}
