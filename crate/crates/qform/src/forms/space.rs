use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::matrix::{Mat, Vector};
use crate::ring::{Elem, FiniteRing, UnitaryRing};

use super::module::{PresentedModule, Submodule};

/// (P, [β]) with P = E·A^k and Gram matrix B normalized to E^{σT} B E.
#[derive(Clone)]
pub struct QuadraticSpace {
    ur: UnitaryRing,
    module: PresentedModule,
    gram: Mat,
    herm: Mat,
}

impl std::fmt::Debug for QuadraticSpace {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "QuadraticSpace(rank {}, gram {:?})",
            self.rank(),
            self.gram.data
        )
    }
}

impl QuadraticSpace {
    pub fn new(ur: &UnitaryRing, module: PresentedModule, gram: Mat) -> Result<QuadraticSpace> {
        if module.ring() != ur.ring() {
            return Err(Error::RingMismatch);
        }
        let k = module.rank();
        if gram.rows != k || gram.cols != k {
            return Err(Error::ShapeMismatch(format!(
                "gram is {}×{} but the module has rank {k}",
                gram.rows, gram.cols
            )));
        }
        let r = ur.ring();
        let e = module.proj();
        let gram = e.sigma_transpose(ur).mul(r, &gram).mul(r, e);
        let herm = hermitian_matrix(ur, &gram);
        Ok(QuadraticSpace {
            ur: ur.clone(),
            module,
            gram,
            herm,
        })
    }

    pub fn free(ur: &UnitaryRing, gram: Mat) -> Result<QuadraticSpace> {
        let m = PresentedModule::free(ur.ring(), gram.rows);
        QuadraticSpace::new(ur, m, gram)
    }

    pub fn zero(ur: &UnitaryRing) -> QuadraticSpace {
        QuadraticSpace::free(ur, Mat::zeros(0, 0)).expect("empty space")
    }

    pub fn ur(&self) -> &UnitaryRing {
        &self.ur
    }

    pub fn ring(&self) -> &FiniteRing {
        self.ur.ring()
    }

    pub fn module(&self) -> &PresentedModule {
        &self.module
    }

    pub fn rank(&self) -> usize {
        self.module.rank()
    }

    pub fn gram(&self) -> &Mat {
        &self.gram
    }

    /// H with h_β(x, y) = σ(x)ᵀ H y.
    pub fn hermitian_of(&self) -> &Mat {
        &self.herm
    }

    pub fn elements(&self) -> Result<&Submodule> {
        self.module.elements()
    }

    pub fn with_gram(&self, gram: Mat) -> Result<QuadraticSpace> {
        QuadraticSpace::new(&self.ur, self.module.clone(), gram)
    }

    fn pair(&self, m: &Mat, x: &[Elem], y: &[Elem]) -> Elem {
        let r = self.ring();
        let mut acc = 0;
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            let sx = self.ur.sigma(xi);
            for (j, &yj) in y.iter().enumerate() {
                let b = m.get(i, j);
                if b != 0 && yj != 0 {
                    acc = r.add(acc, r.mul3(sx, b, yj));
                }
            }
        }
        acc
    }

    pub fn beta(&self, x: &[Elem], y: &[Elem]) -> Elem {
        self.pair(&self.gram, x, y)
    }

    pub fn h(&self, x: &[Elem], y: &[Elem]) -> Elem {
        self.pair(&self.herm, x, y)
    }

    /// Row r with h(y, x) = r·x for all x.
    pub fn h_row(&self, y: &[Elem]) -> Vector {
        let r = self.ring();
        (0..self.rank())
            .map(|j| {
                r.sum(
                    y.iter()
                        .enumerate()
                        .map(|(i, &yi)| r.mul(self.ur.sigma(yi), self.herm.get(i, j))),
                )
            })
            .collect()
    }

    /// Least representative of β(x,x) + Λ.
    pub fn quad_value(&self, x: &[Elem]) -> Result<Elem> {
        if !self.module.contains(x) {
            return Err(Error::NotInModule);
        }
        Ok(self.ur.coset_rep(self.beta(x, x)))
    }

    /// Whether [β|_{span gens}] = [0]: h vanishes on generator pairs and β(g,g) ∈ Λ.
    pub fn class_zero_on(&self, gens: &[Vector]) -> bool {
        gens.iter().enumerate().all(|(i, g)| {
            self.ur.in_lambda(self.beta(g, g)) && gens[i..].iter().all(|g2| self.h(g, g2) == 0)
        })
    }

    pub fn is_class_zero(&self) -> bool {
        self.class_zero_on(&self.module.generators())
    }

    pub fn classes_equal(&self, other: &QuadraticSpace) -> Result<bool> {
        if !self.ur.same(&other.ur) {
            return Err(Error::RingMismatch);
        }
        if self.module.proj() != other.module.proj() {
            return Err(Error::ModuleMismatch);
        }
        let diff = self.with_gram(self.gram.sub(self.ring(), &other.gram))?;
        Ok(diff.is_class_zero())
    }

    /// Number of distinct functionals h(v, ·)|_Q for v ∈ `from`, Q presented by `q`.
    pub fn functional_count(&self, from: &[Vector], q: &Mat) -> usize {
        let r = self.ring();
        let mut seen = HashSet::new();
        for v in from {
            let row = self.h_row(v);
            let restricted: Vector = (0..q.cols)
                .map(|j| r.sum((0..q.rows).map(|l| r.mul(row[l], q.get(l, j)))))
                .collect();
            seen.insert(restricted);
        }
        seen.len()
    }

    /// x ↦ h(x, ·) is a bijection P → Hom(P, A).
    pub fn is_unimodular(&self) -> Result<bool> {
        let p = self.elements()?;
        let dual = self.module.dual(&self.ur).cardinality()?;
        if dual != p.len() {
            return Ok(false);
        }
        Ok(self.functional_count(p.elements(), self.module.proj()) == p.len())
    }

    pub fn orthogonal_sum(&self, other: &QuadraticSpace) -> Result<QuadraticSpace> {
        if !self.ur.same(&other.ur) {
            return Err(Error::RingMismatch);
        }
        QuadraticSpace::new(
            &self.ur,
            self.module.direct_sum(&other.module),
            Mat::block_diag(&self.gram, &other.gram),
        )
    }

    pub fn restrict(&self, sub: &PresentedModule) -> Result<QuadraticSpace> {
        if !self.module.admits_summand(sub.proj()) {
            return Err(Error::NotASummand(
                "projection image is not inside the module".into(),
            ));
        }
        QuadraticSpace::new(&self.ur, sub.clone(), self.gram.clone())
    }

    /// {x ∈ P : h(x, g) = 0 for every g in `gens`}.
    pub fn orthogonal_complement(&self, gens: &[Vector]) -> Result<Submodule> {
        self.elements()?
            .filter(|x| gens.iter().all(|g| self.h(x, g) == 0))
    }

    /// U* ⊕ U with γ(f ⊕ x, g ⊕ y) = f(y).
    pub fn hyperbolic(ur: &UnitaryRing, u: &PresentedModule) -> QuadraticSpace {
        let r = ur.ring();
        let k = u.rank();
        let dual = u.dual(ur);
        let module = dual.direct_sum(u);
        let mut gram = Mat::zeros(2 * k, 2 * k);
        for i in 0..k {
            gram.set(i, k + i, r.one());
        }
        QuadraticSpace::new(ur, module, gram).expect("hyperbolic presentation")
    }

    /// Gram of the pulled-back form β(U·, U·).
    pub fn pullback(&self, u: &Mat) -> Mat {
        let r = self.ring();
        u.sigma_transpose(&self.ur).mul(r, &self.gram).mul(r, u)
    }
}

fn hermitian_matrix(ur: &UnitaryRing, b: &Mat) -> Mat {
    let r = ur.ring();
    let mut h = Mat::zeros(b.rows, b.cols);
    for i in 0..b.rows {
        for j in 0..b.cols {
            h.set(
                i,
                j,
                r.add(b.get(i, j), r.mul(ur.sigma(b.get(j, i)), ur.u())),
            );
        }
    }
    h
}

/// Whether U maps s1 bijectively onto s2 and pulls [β₂] back to [β₁].
pub fn check_isometry(u: &Mat, s1: &QuadraticSpace, s2: &QuadraticSpace) -> Result<bool> {
    if u.rows != s2.rank() || u.cols != s1.rank() {
        return Err(Error::ShapeMismatch(format!(
            "map is {}×{}, spaces have ranks {} and {}",
            u.rows,
            u.cols,
            s1.rank(),
            s2.rank()
        )));
    }
    if !s1.ur.same(&s2.ur) {
        return Err(Error::RingMismatch);
    }
    let r = s1.ring();
    if !s1
        .module
        .generators()
        .iter()
        .all(|g| s2.module.contains(&u.apply(r, g)))
    {
        return Ok(false);
    }
    let p1 = s1.elements()?;
    let p2 = s2.elements()?;
    if p1.len() != p2.len() || p1.image(u)?.len() != p2.len() {
        return Ok(false);
    }
    let pulled = s1.with_gram(s2.pullback(u))?;
    pulled.classes_equal(s1)
}

/// E₂·U·E₁, the presentation-compatible form of a map.
pub fn normalize_map(u: &Mat, s1: &QuadraticSpace, s2: &QuadraticSpace) -> Mat {
    let r = s1.ring();
    s2.module.proj().mul(r, u).mul(r, s1.module.proj())
}

/// Inverse of a bijective map s1 → s2, as a map s2 → s1.
pub fn invert_map(u: &Mat, s1: &QuadraticSpace, s2: &QuadraticSpace) -> Result<Mat> {
    let r = s1.ring();
    let p1 = s1.elements()?;
    let mut back = std::collections::HashMap::new();
    for x in p1.elements() {
        back.insert(u.apply(r, x), x.clone());
    }
    let cols: Vec<Vector> = s2
        .module
        .proj()
        .columns()
        .into_iter()
        .map(|c| back.get(&c).cloned().ok_or(Error::NotAnIsometry))
        .collect::<Result<_>>()?;
    Ok(Mat::from_columns(s1.rank(), &cols))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::{AntiStructure, LambdaSpec, RingSpec};
    use serde_json::json;

    fn field(p: u32, lambda: LambdaSpec) -> UnitaryRing {
        let r = FiniteRing::build(&RingSpec::from_json(&json!({"residue": p})).unwrap()).unwrap();
        let sigma = r.elements().collect();
        UnitaryRing::new(r.clone(), AntiStructure { sigma, u: r.one() }, lambda).unwrap()
    }

    fn mat(rows: Vec<Vec<Elem>>) -> Mat {
        Mat::from_rows(rows).unwrap()
    }

    #[test]
    fn hermitian_examples() {
        let f3 = field(3, LambdaSpec::Min);
        let s = QuadraticSpace::free(&f3, mat(vec![vec![1]])).unwrap();
        assert_eq!(s.hermitian_of(), &mat(vec![vec![2]]));
        let hyp = QuadraticSpace::free(&f3, mat(vec![vec![0, 1], vec![0, 0]])).unwrap();
        assert_eq!(hyp.hermitian_of(), &mat(vec![vec![0, 1], vec![1, 0]]));
        assert!(hyp.is_unimodular().unwrap());
    }

    #[test]
    fn class_equality_depends_on_lambda() {
        let small = field(2, LambdaSpec::Min);
        let big = field(2, LambdaSpec::Max);
        for (ur, expect) in [(small, false), (big, true)] {
            let a = QuadraticSpace::free(&ur, mat(vec![vec![1]])).unwrap();
            let b = QuadraticSpace::free(&ur, mat(vec![vec![0]])).unwrap();
            assert_eq!(a.classes_equal(&b).unwrap(), expect);
        }
    }

    #[test]
    fn unimodularity_examples() {
        let f2 = field(2, LambdaSpec::Min);
        let d = QuadraticSpace::free(&f2, mat(vec![vec![1, 0], vec![0, 1]])).unwrap();
        assert!(!d.is_unimodular().unwrap());
        let z = QuadraticSpace::free(&f2, mat(vec![vec![0]])).unwrap();
        assert!(!z.is_unimodular().unwrap());
        assert!(QuadraticSpace::zero(&f2).is_unimodular().unwrap());
    }

    #[test]
    fn isometry_examples() {
        let f3 = field(3, LambdaSpec::Min);
        let s = QuadraticSpace::free(&f3, mat(vec![vec![1, 0], vec![0, 2]])).unwrap();
        let id = Mat::identity(f3.ring(), 2);
        assert!(check_isometry(&id, &s, &s).unwrap());
        let swap = mat(vec![vec![0, 1], vec![1, 0]]);
        assert!(!check_isometry(&swap, &s, &s).unwrap());
        let neg = mat(vec![vec![2, 0], vec![0, 2]]);
        assert!(check_isometry(&neg, &s, &s).unwrap());
        assert_eq!(invert_map(&neg, &s, &s).unwrap(), neg);
    }

    #[test]
    fn complement_in_hyperbolic_plane() {
        let f3 = field(3, LambdaSpec::Min);
        let hyp = QuadraticSpace::free(&f3, mat(vec![vec![0, 1], vec![0, 0]])).unwrap();
        let perp = hyp.orthogonal_complement(&[vec![1, 0]]).unwrap();
        assert_eq!(perp.elements(), &[vec![0, 0], vec![1, 0], vec![2, 0]]);
        let z = PresentedModule::new(f3.ring(), mat(vec![vec![1, 0], vec![0, 0]])).unwrap();
        assert!(hyp.restrict(&z).unwrap().is_class_zero());
    }

    #[test]
    fn hyperbolic_on_the_ring() {
        let f2 = field(2, LambdaSpec::Min);
        let h = QuadraticSpace::hyperbolic(&f2, &PresentedModule::free(f2.ring(), 1));
        assert_eq!(h.gram(), &mat(vec![vec![0, 1], vec![0, 0]]));
        assert!(h.is_unimodular().unwrap());
    }
}
