mod conditions;
mod search;

use serde::Serialize;

use crate::dickson::CornerType;
use crate::error::{Error, Result};
use crate::forms::{
    check_isometry, invert_map, normalize_map, PresentedModule, QuadraticSpace, Submodule,
};
use crate::matrix::{Mat, Vector};
use crate::reflections::{make_reflection, product_matrix, QuasiReflection};
use crate::transforms::conjugate;

pub use conditions::{f2f2_obstruction, self_dual_check, ConditionReport, FactorConditions};

use conditions::{conditions_on, functionals_free_rank_one, least_corner_element, FactorView};

/// Extend ψ: Q → S (summands of P) to an isometry of P moving P only inside V.
#[derive(Clone, Debug)]
pub struct ExtensionProblem {
    pub space: QuadraticSpace,
    pub q: PresentedModule,
    pub s: PresentedModule,
    pub v: PresentedModule,
    /// Normalized to F_S ψ F_Q.
    pub psi: Mat,
}

impl ExtensionProblem {
    pub fn new(
        space: &QuadraticSpace,
        q: PresentedModule,
        s: PresentedModule,
        v: PresentedModule,
        psi: &Mat,
    ) -> Result<ExtensionProblem> {
        for (name, m) in [("Q", &q), ("S", &s), ("V", &v)] {
            if !space.module().admits_summand(m.proj()) {
                return Err(Error::NotASummand(format!("{name} is not a summand of P")));
            }
        }
        let sq = space.restrict(&q)?;
        let ss = space.restrict(&s)?;
        if psi.rows != space.rank() || psi.cols != space.rank() {
            return Err(Error::ShapeMismatch("ψ must be a k×k matrix".into()));
        }
        let psi = normalize_map(psi, &sq, &ss);
        if !check_isometry(&psi, &sq, &ss)? {
            return Err(Error::NotAnIsometry);
        }
        Ok(ExtensionProblem {
            space: space.clone(),
            q,
            s,
            v,
            psi,
        })
    }

    /// V = P, which is enough when P or Q is unimodular.
    pub fn with_full_v(
        space: &QuadraticSpace,
        q: PresentedModule,
        s: PresentedModule,
        psi: &Mat,
    ) -> Result<ExtensionProblem> {
        let prob = ExtensionProblem::new(space, q.clone(), s, space.module().clone(), psi)?;
        if !space.is_unimodular()? && !space.restrict(&q)?.is_unimodular()? {
            return Err(Error::PreconditionViolation(
                "neither P nor Q is unimodular".into(),
            ));
        }
        Ok(prob)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    /// Product of quasi-reflections w.r.t. V.
    WittI,
    /// Through an orthogonal sum with a rank-two space (and a hyperbolic space when Q ≇ Q*).
    WittIIAugmented { hyperbolic: bool },
}

#[derive(Clone, Debug)]
pub struct ExtensionResult {
    pub phi: Mat,
    pub route: Route,
    /// Outermost first; present on the Witt-I route.
    pub factors: Option<Vec<QuasiReflection>>,
}

/// (P, [vβ]) over the standardized ring, with the unit v.
fn standardize(space: &QuadraticSpace) -> Result<(QuadraticSpace, u32)> {
    let d = space.ur().decomposition()?;
    let v = d.conjugator;
    if v == space.ring().one() {
        return Ok((space.clone(), v));
    }
    let cm = conjugate(space.ur(), v)?;
    Ok((cm.map_space(space)?, v))
}

pub fn check_conditions(prob: &ExtensionProblem) -> Result<ConditionReport> {
    let (work, _) = standardize(&prob.space)?;
    conditions_on(
        &work,
        prob.q.proj(),
        prob.s.proj(),
        &prob.psi,
        prob.v.elements()?,
    )
}

fn require_preconditions(report: &ConditionReport) -> Result<()> {
    if report.preconditions() {
        Ok(())
    } else {
        Err(Error::PreconditionViolation(
            report.first_failure().unwrap_or_default(),
        ))
    }
}

/// Witt-I: a product of quasi-reflections w.r.t. V extending ψ.
pub fn extend_with_reflections(prob: &ExtensionProblem) -> Result<ExtensionResult> {
    let (work, v) = standardize(&prob.space)?;
    let vset = prob.v.elements()?;
    let report = conditions_on(&work, prob.q.proj(), prob.s.proj(), &prob.psi, vset)?;
    require_preconditions(&report)?;
    if !report.witt_i() {
        return Err(Error::ConditionViolation(
            report.first_failure().unwrap_or_default(),
        ));
    }
    let found = search::induct(&work, prob.q.elements()?, &prob.psi, vset)?;
    let r = prob.space.ring();
    let vinv = r.inv(v).ok_or(Error::NotAUnit)?;
    let factors: Vec<QuasiReflection> = found
        .into_iter()
        .map(|s| make_reflection(&prob.space, s.y.clone(), s.e, r.mul(vinv, s.c)))
        .collect::<Result<_>>()?;
    let phi = product_matrix(&prob.space, &factors);
    Ok(ExtensionResult {
        phi,
        route: Route::WittI,
        factors: Some(factors),
    })
}

/// Extends ψ, augmenting the space when the Witt-I conditions fail.
pub fn extend(prob: &ExtensionProblem) -> Result<ExtensionResult> {
    let (work, _) = standardize(&prob.space)?;
    let vset = prob.v.elements()?;
    let report = conditions_on(&work, prob.q.proj(), prob.s.proj(), &prob.psi, vset)?;
    require_preconditions(&report)?;
    if report.witt_i() {
        return extend_with_reflections(prob);
    }
    let k = work.rank();
    let phi = if report.self_dual {
        augment_rank_two(&work, prob.q.proj(), prob.s.proj(), &prob.psi, vset)?
    } else {
        augment_hyperbolic(&work, prob.q.proj(), prob.s.proj(), &prob.psi, vset)?
    };
    let phi = normalize_map(&phi.block(0, k, 0, k), &prob.space, &prob.space);
    if !check_isometry(&phi, &prob.space, &prob.space)? {
        return Err(Error::SearchExhausted(
            "augmented extension does not restrict to P".into(),
        ));
    }
    Ok(ExtensionResult {
        phi,
        route: Route::WittIIAugmented {
            hyperbolic: !report.self_dual,
        },
        factors: None,
    })
}

fn embed_vectors(gens: &[Vector], before: usize, after: usize) -> Vec<Vector> {
    gens.iter()
        .map(|g| {
            let mut x = vec![0; before];
            x.extend_from_slice(g);
            x.resize(before + g.len() + after, 0);
            x
        })
        .collect()
}

fn pad(m: &Mat, extra: usize) -> Mat {
    Mat::block_diag(m, &Mat::zeros(extra, extra))
}

/// Runs Witt-I on an augmented space and returns the whole extension matrix.
fn solve_augmented(
    space: &QuadraticSpace,
    q: &Mat,
    s: &Mat,
    psi: &Mat,
    v: &Submodule,
) -> Result<Mat> {
    let report = conditions_on(space, q, s, psi, v)?;
    if !report.witt_i() {
        return Err(Error::SearchExhausted(format!(
            "augmented problem still fails: {}",
            report.first_failure().unwrap_or_default()
        )));
    }
    let qset = PresentedModule::new(space.ring(), q.clone())?;
    let factors = search::induct(space, qset.elements()?, psi, v)?;
    Ok(product_matrix(space, &factors))
}

/// P ⊥ T with T = [[0,1],[0,a]], Q′ = Q ⊕ zA, V′ = V ⊕ (z+w)A.
fn augment_rank_two(
    space: &QuadraticSpace,
    q: &Mat,
    s: &Mat,
    psi: &Mat,
    v: &Submodule,
) -> Result<Mat> {
    let ur = space.ur();
    let r = ur.ring();
    let d = ur.decomposition()?;
    let mut a_bar = 0;
    for i in 0..d.factors.len() {
        let view = FactorView::new(space, i)?;
        if view.profile.corner == CornerType::F2xF2 && functionals_free_rank_one(&view, v)? {
            if let Some(ai) = least_corner_element(d, i) {
                a_bar = d.quotient.add(a_bar, d.embed(i, ai));
            }
        }
    }
    let a = d.quotient.lift(a_bar).expect("quotient element");
    let t = QuadraticSpace::free(ur, Mat::from_rows(vec![vec![0, r.one()], vec![0, a]])?)?;
    let big = space.orthogonal_sum(&t)?;
    let k = space.rank();
    let mut corner = Mat::zeros(2, 2);
    corner.set(0, 0, r.one());
    let q2 = Mat::block_diag(q, &corner);
    let s2 = Mat::block_diag(s, &corner);
    let psi2 = Mat::block_diag(psi, &corner);
    let mut gens = embed_vectors(v.gens(), 0, 2);
    let mut zw = vec![0; k + 2];
    zw[k] = r.one();
    zw[k + 1] = r.one();
    gens.push(zw);
    let v2 = Submodule::span(r, k + 2, &gens)?;
    solve_augmented(&big, &q2, &s2, &psi2, &v2)
}

/// P ⊥ H(Q*) with Q ⊕ 0 ⊕ Q* and V ⊕ Q** ⊕ 0, then the rank-two step if still needed.
fn augment_hyperbolic(
    space: &QuadraticSpace,
    q: &Mat,
    s: &Mat,
    psi: &Mat,
    v: &Submodule,
) -> Result<Mat> {
    let ur = space.ur();
    let r = ur.ring();
    let k = space.rank();
    let u = PresentedModule::new(r, q.clone())?.dual(ur);
    let hyp = QuadraticSpace::hyperbolic(ur, &u);
    let big = space.orthogonal_sum(&hyp)?;
    let fu = u.proj();
    let q1 = Mat::block_diag(&pad(q, k), fu);
    let s1 = Mat::block_diag(&pad(s, k), fu);
    let psi1 = Mat::block_diag(&pad(psi, k), fu);
    let mut gens = embed_vectors(v.gens(), 0, 2 * k);
    gens.extend(embed_vectors(&u.dual(ur).generators(), k, k));
    let v1 = Submodule::span(r, 3 * k, &gens)?;
    let report = conditions_on(&big, &q1, &s1, &psi1, &v1)?;
    if report.witt_i() {
        solve_augmented(&big, &q1, &s1, &psi1, &v1)
    } else {
        augment_rank_two(&big, &q1, &s1, &psi1, &v1)
    }
}

/// Given an isometry B ⊥ P₁ → B ⊥ P₂ with B unimodular, an isometry P₁ → P₂.
pub fn cancel(
    base: &QuadraticSpace,
    s1: &QuadraticSpace,
    s2: &QuadraticSpace,
    iso: &Mat,
) -> Result<Mat> {
    if !base.ur().same(s1.ur()) || !base.ur().same(s2.ur()) {
        return Err(Error::RingMismatch);
    }
    if !base.is_unimodular()? {
        return Err(Error::NotUnimodularBase);
    }
    let z1 = base.orthogonal_sum(s1)?;
    let z2 = base.orthogonal_sum(s2)?;
    if !check_isometry(iso, &z1, &z2)? {
        return Err(Error::NotAnIsometry);
    }
    let r = base.ring();
    let (kb, k1, k2) = (base.rank(), s1.rank(), s2.rank());
    let back = invert_map(iso, &z1, &z2)?;
    let q = Mat::block_diag(base.module().proj(), &Mat::zeros(k1, k1));
    let d2 = Mat::block_diag(base.module().proj(), &Mat::zeros(k2, k2));
    let s = back.mul(r, &d2).mul(r, iso);
    let mut inclusion = Mat::zeros(kb + k2, kb + k1);
    for i in 0..kb {
        inclusion.set(i, i, r.one());
    }
    let psi = back.mul(r, &inclusion).mul(r, &q);
    let prob = ExtensionProblem::with_full_v(
        &z1,
        PresentedModule::new(r, q)?,
        PresentedModule::new(r, s)?,
        &psi,
    )?;
    let phi = extend(&prob)?.phi;
    let total = iso.mul(r, &phi);
    let result = normalize_map(&total.block(kb, k2, kb, k1), s1, s2);
    if !check_isometry(&result, s1, s2)? {
        return Err(Error::SearchExhausted(
            "cancelled map is not an isometry".into(),
        ));
    }
    Ok(result)
}

/// P = Q′ ⊕ Q″ from P* = U ⊕ U′ (U the image of G on the realized dual), Q″ = U^⊥, Q′ = U′^⊥.
pub fn dual_split(space: &QuadraticSpace, g: &Mat) -> Result<(Submodule, Submodule)> {
    let ur = space.ur();
    let r = ur.ring();
    let dual = space.module().dual(ur);
    if !dual.admits_summand(g) {
        return Err(Error::NotADecomposition(
            "G is not an idempotent on P*".into(),
        ));
    }
    let complement = dual.proj().sub(r, g);
    let pair = |w: &[u32], x: &[u32]| r.sum(w.iter().zip(x).map(|(&a, &b)| r.mul(ur.sigma(a), b)));
    let p = space.elements()?;
    let annihilator = |m: &Mat| {
        let cols = m.columns();
        p.filter(|x| cols.iter().all(|w| pair(w, x) == 0))
    };
    let q2 = annihilator(g)?;
    let q1 = annihilator(&complement)?;
    let meet = q1.elements().iter().filter(|x| q2.contains(x)).count();
    if meet != 1 || q1.len() * q2.len() != p.len() {
        return Err(Error::NotADecomposition(
            "annihilators do not split P".into(),
        ));
    }
    Ok((q1, q2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::UnitaryRing;
    use serde_json::json;

    fn f3() -> UnitaryRing {
        UnitaryRing::from_json(
            &json!({"ring": {"residue": 3}, "sigma": "identity", "u": 1, "lambda": "min"}),
        )
        .unwrap()
    }

    fn f2_min() -> UnitaryRing {
        UnitaryRing::from_json(
            &json!({"ring": {"residue": 2}, "sigma": "identity", "u": 1, "lambda": "min"}),
        )
        .unwrap()
    }

    fn mat(rows: Vec<Vec<u32>>) -> Mat {
        Mat::from_rows(rows).unwrap()
    }

    #[test]
    fn swap_lines_over_f3() {
        let ur = f3();
        let s = QuadraticSpace::free(&ur, mat(vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]))
            .unwrap();
        let q = PresentedModule::new(
            ur.ring(),
            mat(vec![vec![1, 0, 0], vec![0, 0, 0], vec![0, 0, 0]]),
        )
        .unwrap();
        let t = PresentedModule::new(
            ur.ring(),
            mat(vec![vec![0, 0, 0], vec![0, 1, 0], vec![0, 0, 0]]),
        )
        .unwrap();
        let psi = mat(vec![vec![0, 0, 0], vec![1, 0, 0], vec![0, 0, 0]]);
        let prob = ExtensionProblem::with_full_v(&s, q, t, &psi).unwrap();
        let res = extend(&prob).unwrap();
        assert_eq!(res.route, Route::WittI);
        assert!(check_isometry(&res.phi, &s, &s).unwrap());
        assert_eq!(res.phi.apply(ur.ring(), &[1, 0, 0]), vec![0, 1, 0]);
    }

    #[test]
    fn hyperbolic_plane_over_f2_needs_augmentation() {
        let ur = f2_min();
        let s = QuadraticSpace::free(&ur, mat(vec![vec![0, 1], vec![0, 0]])).unwrap();
        let q = PresentedModule::new(ur.ring(), mat(vec![vec![1, 0], vec![0, 0]])).unwrap();
        let t = PresentedModule::new(ur.ring(), mat(vec![vec![0, 0], vec![0, 1]])).unwrap();
        let psi = mat(vec![vec![0, 0], vec![1, 0]]);
        let prob = ExtensionProblem::with_full_v(&s, q, t, &psi).unwrap();
        let report = check_conditions(&prob).unwrap();
        assert!(report.preconditions());
        assert!(!report.witt_i());
        let res = extend(&prob).unwrap();
        assert_eq!(res.route, Route::WittIIAugmented { hyperbolic: false });
        assert_eq!(res.phi.apply(ur.ring(), &[1, 0]), vec![0, 1]);
        assert!(check_isometry(&res.phi, &s, &s).unwrap());
    }

    #[test]
    fn cancel_f3_line() {
        let ur = f3();
        let base = QuadraticSpace::free(&ur, mat(vec![vec![1]])).unwrap();
        let s1 = QuadraticSpace::free(&ur, mat(vec![vec![1]])).unwrap();
        let swap = mat(vec![vec![0, 1], vec![1, 0]]);
        let u = cancel(&base, &s1, &s1, &swap).unwrap();
        assert!(check_isometry(&u, &s1, &s1).unwrap());
    }
}
