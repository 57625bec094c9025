use std::collections::HashSet;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::{QuadraticSpace, Submodule};
use crate::matrix::{vadd, vector_from_json, vector_to_json, vscale, vsub, Mat, Vector};
use crate::ring::{ef_inverse, EfInverter, Elem};

/// s_{y,e,c}: x ↦ x − y c° h(y, x).
#[derive(Clone, Debug)]
pub struct QuasiReflection {
    space: QuadraticSpace,
    pub y: Vector,
    pub e: Elem,
    pub c: Elem,
    pub c_inv: Elem,
}

impl PartialEq for QuasiReflection {
    fn eq(&self, other: &QuasiReflection) -> bool {
        self.y == other.y && self.e == other.e && self.c == other.c
    }
}

pub fn make_reflection(
    space: &QuadraticSpace,
    y: Vector,
    e: Elem,
    c: Elem,
) -> Result<QuasiReflection> {
    let ur = space.ur();
    let r = ur.ring();
    if !r.is_idempotent(e) {
        return Err(Error::DomainViolation(format!(
            "{} is not idempotent",
            r.show(e)
        )));
    }
    if !space.module().contains(&y) {
        return Err(Error::NotInModule);
    }
    if vscale(r, &y, e) != y {
        return Err(Error::DomainViolation("y·e ≠ y".into()));
    }
    let offset = r.sub(c, space.beta(&y, &y));
    if ur.lambda_sandwich(e).binary_search(&offset).is_err() {
        return Err(Error::InvalidC(format!(
            "{} is not in β(y,y) + e^σΛe",
            r.show(c)
        )));
    }
    let c_inv = ef_inverse(r, c, ur.sigma(e), e)?
        .ok_or_else(|| Error::InvalidC(format!("{} is not (e^σ,e)-invertible", r.show(c))))?;
    Ok(QuasiReflection {
        space: space.clone(),
        y,
        e,
        c,
        c_inv,
    })
}

impl QuasiReflection {
    pub fn space(&self) -> &QuadraticSpace {
        &self.space
    }

    pub fn apply(&self, x: &[Elem]) -> Vector {
        let r = self.space.ring();
        let t = r.mul(self.c_inv, self.space.h(&self.y, x));
        if t == 0 {
            return x.to_vec();
        }
        vsub(r, x, &vscale(r, &self.y, t))
    }

    /// E − y c° r_y, the matrix of the map on the presentation.
    pub fn matrix(&self) -> Mat {
        let r = self.space.ring();
        let row = self.space.h_row(&self.y);
        let k = self.space.rank();
        let mut m = self.space.module().proj().clone();
        for i in 0..k {
            let yc = r.mul(self.y[i], self.c_inv);
            for (j, &rj) in row.iter().enumerate().take(k) {
                m.set(i, j, r.sub(m.get(i, j), r.mul(yc, rj)));
            }
        }
        m
    }

    /// s_{y,e,c^σu}.
    pub fn inverse(&self) -> QuasiReflection {
        let ur = self.space.ur();
        let c = ur.ring().mul(ur.sigma(self.c), ur.u());
        make_reflection(&self.space, self.y.clone(), self.e, c).expect("inverse parameter is valid")
    }

    /// s_{ya,f,a^σca} for a ∈ eAf (e,f)-invertible.
    pub fn reindex(&self, a: Elem, f: Elem) -> Result<QuasiReflection> {
        let ur = self.space.ur();
        let r = ur.ring();
        match ef_inverse(r, a, self.e, f) {
            Ok(Some(_)) => {}
            _ => return Err(Error::NotEFInvertible),
        }
        let c = r.mul3(ur.sigma(a), self.c, a);
        make_reflection(&self.space, vscale(r, &self.y, a), f, c)
    }

    /// Same map, same data, on another presentation of the parameters (e.g. after conjugation).
    pub fn with_parameter(&self, space: &QuadraticSpace, c: Elem) -> Result<QuasiReflection> {
        make_reflection(space, self.y.clone(), self.e, c)
    }

    pub fn to_json(&self) -> Value {
        let r = self.space.ring();
        json!({ "y": vector_to_json(r, &self.y), "e": r.literal(self.e), "c": r.literal(self.c) })
    }

    pub fn from_json(space: &QuadraticSpace, v: &Value) -> Result<QuasiReflection> {
        let r = space.ring();
        let field = |k: &str| {
            v.get(k)
                .ok_or_else(|| Error::MalformedSpec(format!("reflection needs {k}")))
        };
        let y = vector_from_json(r, field("y")?)?;
        if y.len() != space.rank() {
            return Err(Error::ShapeMismatch(
                "reflection vector has the wrong length".into(),
            ));
        }
        make_reflection(
            space,
            y,
            r.parse_literal(field("e")?)?,
            r.parse_literal(field("c")?)?,
        )
    }
}

/// s_{y,e,c} s_{z,f,d} = s_{y+z, e+f, c+d+h(y,z)} for orthogonal e, f.
pub fn compose_orthogonal(a: &QuasiReflection, b: &QuasiReflection) -> Result<QuasiReflection> {
    let s = &a.space;
    let r = s.ring();
    if r.mul(a.e, b.e) != 0 || r.mul(b.e, a.e) != 0 {
        return Err(Error::IdempotentsNotOrthogonal);
    }
    let c = r.add(r.add(a.c, b.c), s.h(&a.y, &b.y));
    make_reflection(s, vadd(r, &a.y, &b.y), r.add(a.e, b.e), c)
}

/// Product of reflections listed outermost first, as a matrix.
pub fn product_matrix(space: &QuadraticSpace, factors: &[QuasiReflection]) -> Mat {
    let r = space.ring();
    factors
        .iter()
        .fold(space.module().proj().clone(), |acc, f| {
            acc.mul(r, &f.matrix())
        })
}

/// Applies a product listed outermost first.
pub fn apply_product(factors: &[QuasiReflection], x: &[Elem]) -> Vector {
    factors.iter().rev().fold(x.to_vec(), |v, f| f.apply(&v))
}

/// Valid parameters of e-reflections for one idempotent e, precomputed.
#[derive(Clone, Debug)]
pub struct ReflectionKit {
    pub e: Elem,
    sandwich: Vec<Elem>,
    inv: EfInverter,
}

impl ReflectionKit {
    pub fn new(space: &QuadraticSpace, e: Elem) -> ReflectionKit {
        let ur = space.ur();
        ReflectionKit {
            e,
            sandwich: ur.lambda_sandwich(e),
            inv: EfInverter::new(ur.ring(), ur.sigma(e), e),
        }
    }

    pub fn inverse(&self, c: Elem) -> Option<Elem> {
        self.inv.inverse(c)
    }

    /// The coset β(y,y) + e^σΛe in canonical order, invertible members only.
    pub fn parameters(&self, space: &QuadraticSpace, y: &[Elem]) -> Vec<Elem> {
        let r = space.ring();
        let b = space.beta(y, y);
        let mut cs: Vec<Elem> = self.sandwich.iter().map(|&l| r.add(b, l)).collect();
        cs.sort_unstable();
        cs.dedup();
        cs.retain(|&c| self.inv.inverse(c).is_some());
        cs
    }

    /// Builds s_{y,e,c} with c already known to be a valid parameter.
    pub fn build(&self, space: &QuadraticSpace, y: Vector, c: Elem) -> Option<QuasiReflection> {
        let r = space.ring();
        let c_inv = self.inv.inverse(c)?;
        if self
            .sandwich
            .binary_search(&r.sub(c, space.beta(&y, &y)))
            .is_err()
        {
            return None;
        }
        Some(QuasiReflection {
            space: space.clone(),
            y,
            e: self.e,
            c,
            c_inv,
        })
    }

    /// All e-reflections with y ∈ V·e, canonical order.
    pub fn all(&self, space: &QuadraticSpace, v: &Submodule) -> Vec<QuasiReflection> {
        let mut out = Vec::new();
        for y in distinct_multiples(space, v, self.e) {
            for c in self.parameters(space, &y) {
                if let Some(s) = self.build(space, y.clone(), c) {
                    out.push(s);
                }
            }
        }
        out
    }
}

/// {v·e : v ∈ V} without repeats, canonical order.
pub fn distinct_multiples(space: &QuadraticSpace, v: &Submodule, e: Elem) -> Vec<Vector> {
    let r = space.ring();
    let mut seen = HashSet::new();
    let mut out: Vec<Vector> = v
        .elements()
        .iter()
        .map(|x| vscale(r, x, e))
        .filter(|x| seen.insert(x.clone()))
        .collect();
    out.sort_unstable();
    out
}

/// Single reflection s_{x−y,e,h(x−y,x)} when that datum is valid and lies over `within`.
pub fn one_step(
    space: &QuadraticSpace,
    kit: &ReflectionKit,
    x: &[Elem],
    y: &[Elem],
    within: Option<&Submodule>,
) -> Option<QuasiReflection> {
    let r = space.ring();
    let d = vsub(r, x, y);
    if within.is_some_and(|v| !v.contains(&d)) {
        return None;
    }
    let c = space.h(&d, x);
    let s = kit.build(space, d, c)?;
    (s.apply(x) == y).then_some(s)
}

/// At most two e-reflections (w.r.t. `within`, default P) sending x to y, outermost first.
pub fn transvect_to(
    space: &QuadraticSpace,
    x: &[Elem],
    y: &[Elem],
    e: Elem,
    within: Option<&Submodule>,
) -> Result<Vec<QuasiReflection>> {
    let r = space.ring();
    if vscale(r, x, e) != x || vscale(r, y, e) != y {
        return Err(Error::DomainViolation("x and y must lie in Pe".into()));
    }
    let kit = ReflectionKit::new(space, e);
    if let Some(s) = one_step(space, &kit, x, y, within) {
        return Ok(vec![s]);
    }
    let pool = match within {
        Some(v) => v.clone(),
        None => space.elements()?.clone(),
    };
    two_step(space, &kit, x, y, &pool).ok_or(Error::NoTransvectionFound)
}

/// The (z, c) search: s_{w,e,d} s_{z,e,c}(x) = y with w = y − s_{z,e,c}(x).
pub fn two_step(
    space: &QuadraticSpace,
    kit: &ReflectionKit,
    x: &[Elem],
    y: &[Elem],
    pool: &Submodule,
) -> Option<Vec<QuasiReflection>> {
    for z in distinct_multiples(space, pool, kit.e) {
        if crate::matrix::is_zero(&z) {
            continue;
        }
        for c in kit.parameters(space, &z) {
            let Some(first) = kit.build(space, z.clone(), c) else {
                continue;
            };
            let x1 = first.apply(x);
            if x1 == y {
                return Some(vec![first]);
            }
            if let Some(second) = one_step(space, kit, &x1, y, Some(pool)) {
                return Some(vec![second, first]);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::UnitaryRing;

    fn f3() -> UnitaryRing {
        UnitaryRing::from_json(
            &json!({"ring": {"residue": 3}, "sigma": "identity", "u": 1, "lambda": "min"}),
        )
        .unwrap()
    }

    fn diag11() -> QuadraticSpace {
        QuadraticSpace::free(&f3(), Mat::from_rows(vec![vec![1, 0], vec![0, 1]]).unwrap()).unwrap()
    }

    #[test]
    fn coordinate_reflection_over_f3() {
        let s = diag11();
        let r = make_reflection(&s, vec![1, 0], 1, 1).unwrap();
        assert_eq!(r.apply(&[1, 0]), vec![2, 0]);
        assert_eq!(r.apply(&[0, 1]), vec![0, 1]);
        assert_eq!(r.inverse(), r);
        assert!(crate::forms::check_isometry(&r.matrix(), &s, &s).unwrap());
        assert!(matches!(
            make_reflection(&s, vec![1, 0], 1, 2),
            Err(Error::InvalidC(_))
        ));
    }

    #[test]
    fn transvection_between_basis_vectors() {
        let s = diag11();
        let steps = transvect_to(&s, &[1, 0], &[0, 1], 1, None).unwrap();
        assert_eq!(steps.len(), 1);
        assert_eq!(apply_product(&steps, &[1, 0]), vec![0, 1]);
    }

    #[test]
    fn zero_vector_gives_identity() {
        let f2 = UnitaryRing::from_json(
            &json!({"ring": {"residue": 2}, "sigma": "identity", "u": 1, "lambda": "max"}),
        )
        .unwrap();
        let s = QuadraticSpace::free(&f2, Mat::from_rows(vec![vec![0, 1], vec![0, 0]]).unwrap())
            .unwrap();
        let r = make_reflection(&s, vec![0, 0], 1, 1).unwrap();
        assert_eq!(r.matrix(), Mat::identity(f2.ring(), 2));
    }
}
