use serde::Serialize;

use crate::dickson::{classify_factor, CornerType, FactorProfile};
use crate::error::{Error, Result};
use crate::forms::{project_element, PresentedModule, QuadraticSpace, Submodule};
use crate::matrix::{is_zero, vscale, Mat, Vector};
use crate::ring::{corner_set, lift_idempotent, Decomposition, Elem, UnitaryRing};

#[derive(Clone, Debug, Serialize)]
pub struct FactorConditions {
    pub index: usize,
    /// Q_i = 0 or [β_i|V_i] ≠ 0 (split-orthogonal factors).
    pub restriction_nonzero: bool,
    /// The radical of V_i carries a nonzero class (split-orthogonal, D ≅ F_2).
    pub radical_nonzero: bool,
    /// No F_2×F_2 obstruction vector in V.
    pub no_obstruction: bool,
    /// An obstruction vector, when one exists.
    pub witness: Option<Vector>,
    /// L_{Q_i}(V_i) = Q_i*, implied by the global condition.
    pub onto: bool,
}

impl FactorConditions {
    pub fn holds(&self) -> bool {
        self.restriction_nonzero && self.radical_nonzero && self.no_obstruction
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub onto_q: bool,
    pub onto_s: bool,
    pub moves_into_v: bool,
    pub self_dual: bool,
    pub factors: Vec<FactorConditions>,
}

impl ConditionReport {
    pub fn preconditions(&self) -> bool {
        self.onto_q && self.onto_s && self.moves_into_v
    }

    pub fn witt_i(&self) -> bool {
        self.preconditions() && self.factors.iter().all(FactorConditions::holds)
    }

    pub fn first_failure(&self) -> Option<String> {
        if !self.onto_q {
            return Some("L_Q(V) ≠ Q*".into());
        }
        if !self.onto_s {
            return Some("L_S(V) ≠ S*".into());
        }
        if !self.moves_into_v {
            return Some("ψx − x ∉ V".into());
        }
        self.factors.iter().find(|f| !f.holds()).map(|f| {
            let what = if !f.restriction_nonzero {
                "[β_i|V_i] = 0"
            } else if !f.radical_nonzero {
                "radical of V_i has zero class"
            } else {
                "F_2×F_2 obstruction"
            };
            format!("factor {}: {what}", f.index)
        })
    }
}

/// Per-factor view of a space: π_i, Λ_i and the standardizing unit.
pub(crate) struct FactorView<'a> {
    pub space: &'a QuadraticSpace,
    pub d: &'a Decomposition,
    pub i: usize,
    pub profile: FactorProfile,
}

impl<'a> FactorView<'a> {
    pub fn new(space: &'a QuadraticSpace, i: usize) -> Result<FactorView<'a>> {
        let d = space.ur().decomposition()?;
        Ok(FactorView {
            space,
            d,
            i,
            profile: classify_factor(&d.factors[i]),
        })
    }

    pub fn pi(&self, a: Elem) -> Elem {
        project_element(self.d, self.i, a)
    }

    fn factor_ring(&self) -> &UnitaryRing {
        &self.d.factors[self.i].ring
    }

    /// [β_i] vanishes on the span of `gens`.
    pub fn class_zero(&self, gens: &[Vector]) -> bool {
        let fr = self.factor_ring();
        gens.iter().enumerate().all(|(k, g)| {
            fr.in_lambda(self.pi(self.space.beta(g, g)))
                && gens[k..].iter().all(|g2| self.pi(self.space.h(g, g2)) == 0)
        })
    }

    pub fn touches(&self, gens: &[Vector]) -> bool {
        gens.iter().any(|g| g.iter().any(|&a| self.pi(a) != 0))
    }

    /// {x ∈ V : π_i h(x, g) = 0 for all g}.
    pub fn orth(&self, v: &Submodule, gens: &[Vector]) -> Result<Submodule> {
        v.filter(|x| gens.iter().all(|g| self.pi(self.space.h(x, g)) == 0))
    }

    /// (2a) for this factor on V.
    pub fn restriction_nonzero(&self, q_gens: &[Vector], v: &Submodule) -> bool {
        !self.profile.split_orthogonal || !self.touches(q_gens) || !self.class_zero(v.gens())
    }

    /// (2b) for this factor on V.
    pub fn radical_nonzero(&self, v: &Submodule) -> Result<bool> {
        if !(self.profile.split_orthogonal && self.profile.corner == CornerType::F2) {
            return Ok(true);
        }
        let rad = self.orth(v, v.gens())?;
        Ok(!self.class_zero(rad.gens()))
    }

    /// (2c) for this factor on V: a vector z ∈ V·e_i with h(z,z) ≡ ε_i and
    /// [β_i] vanishing on {x ∈ V : h(z, x) ≡ 0}.
    pub fn obstruction(&self, v: &Submodule) -> Result<Option<Vector>> {
        if self.profile.corner != CornerType::F2xF2 {
            return Ok(None);
        }
        let f = &self.d.factors[self.i];
        let fr = f.ring.ring();
        let r = self.space.ring();
        let e = f.e();
        let mut seen = std::collections::HashSet::new();
        for x in v.elements() {
            let z = vscale(r, x, e);
            if !seen.insert(z.clone()) {
                continue;
            }
            if fr.mul(f.conjugator, self.pi(self.space.h(&z, &z))) != f.epsilon() {
                continue;
            }
            let y = self.orth(v, std::slice::from_ref(&z))?;
            if self.class_zero(y.gens()) {
                return Ok(Some(z));
            }
        }
        Ok(None)
    }

    /// L_{Q_i}(V_i) = Q_i* over the factor ring.
    pub fn onto(&self, q: &Mat, v: &Submodule) -> Result<bool> {
        let f = &self.d.factors[self.i];
        let fr = f.ring.ring();
        let qi = PresentedModule::new(fr, q.map(|a| self.pi(a)))?;
        let ambient = PresentedModule::free(fr, q.rows);
        let gram = self.space.gram().map(|a| self.pi(a));
        let si = QuadraticSpace::new(&f.ring, ambient, gram)?;
        let vi: Vec<Vector> = v
            .elements()
            .iter()
            .map(|x| x.iter().map(|&a| self.pi(a)).collect())
            .collect();
        Ok(si.functional_count(&vi, qi.proj()) == qi.dual(&f.ring).cardinality()?)
    }
}

/// Q ≅ Q*: equal multiplicities on the two halves of every exchange factor.
pub fn self_dual_check(ur: &UnitaryRing, q: &Submodule) -> Result<bool> {
    let d = ur.decomposition()?;
    let r = ur.ring();
    let count = |c: Elem| -> Result<usize> {
        let lift = lift_idempotent(r, d.quotient.lift(c).expect("quotient element"))?;
        let mut all = std::collections::HashSet::new();
        let mut rad = std::collections::HashSet::new();
        for x in q.elements() {
            let y = vscale(r, x, lift);
            if y.iter().all(|&a| d.in_radical(a)) {
                rad.insert(y.clone());
            }
            all.insert(y);
        }
        Ok(all.len() / rad.len().max(1))
    };
    for f in &d.factors {
        if f.halves.len() == 2 && count(f.halves[0])? != count(f.halves[1])? {
            return Ok(false);
        }
    }
    Ok(true)
}

pub(crate) fn conditions_on(
    space: &QuadraticSpace,
    q: &Mat,
    s: &Mat,
    psi: &Mat,
    v: &Submodule,
) -> Result<ConditionReport> {
    let r = space.ring();
    let qm = PresentedModule::new(r, q.clone())?;
    let sm = PresentedModule::new(r, s.clone())?;
    let onto_q = space.functional_count(v.elements(), q) == qm.dual(space.ur()).cardinality()?;
    let onto_s = space.functional_count(v.elements(), s) == sm.dual(space.ur()).cardinality()?;
    let q_gens = qm.generators();
    let moves_into_v = q_gens
        .iter()
        .all(|g| v.contains(&crate::matrix::vsub(r, &psi.apply(r, g), g)));
    let self_dual = self_dual_check(space.ur(), qm.elements()?)?;
    let d = space.ur().decomposition()?;
    let mut factors = Vec::with_capacity(d.factors.len());
    for i in 0..d.factors.len() {
        let view = FactorView::new(space, i)?;
        let witness = view.obstruction(v)?;
        factors.push(FactorConditions {
            index: i,
            restriction_nonzero: view.restriction_nonzero(&q_gens, v),
            radical_nonzero: view.radical_nonzero(v)?,
            no_obstruction: witness.is_none(),
            witness,
            onto: view.onto(q, v)?,
        });
    }
    Ok(ConditionReport {
        onto_q,
        onto_s,
        moves_into_v,
        self_dual,
        factors,
    })
}

/// Whether no z′ ∈ V has h(x, z′) = 1 and β̂(z′) = Λ, over an F_2×F_2 factor.
pub fn f2f2_obstruction(space: &QuadraticSpace, v: &Submodule, x: &[Elem]) -> Result<bool> {
    let d = space.ur().decomposition()?;
    if d.factors.len() != 1 || classify_factor(&d.factors[0]).corner != CornerType::F2xF2 {
        return Err(Error::WrongFactorType);
    }
    let one = space.ring().one();
    Ok(!v
        .elements()
        .iter()
        .any(|z| space.h(x, z) == one && space.ur().in_lambda(space.beta(z, z))))
}

/// Least element of ε_i A_i ε_i outside {0, ε_i}, in A_i coordinates.
pub(crate) fn least_corner_element(d: &Decomposition, i: usize) -> Option<Elem> {
    let f = &d.factors[i];
    let fr = f.standard.ring();
    let eps = f.epsilon();
    corner_set(fr, eps, eps)
        .into_iter()
        .filter(|&a| a != 0 && a != eps)
        .min()
}

/// L_{V_i}(V_i) ≅ ε_i A_i, compared half by half.
pub(crate) fn functionals_free_rank_one(view: &FactorView, v: &Submodule) -> Result<bool> {
    let f = &view.d.factors[view.i];
    let fr = f.ring.ring();
    let vi: Vec<Vector> = v
        .elements()
        .iter()
        .map(|x| x.iter().map(|&a| view.pi(a)).collect())
        .collect();
    let vi = Submodule::from_elements(fr, v.rank(), vi)?;
    let gram = view.space.gram().map(|a| view.pi(a));
    let si = QuadraticSpace::new(&f.ring, PresentedModule::free(fr, v.rank()), gram)?;
    let rad = vi.filter(|x| vi.gens().iter().all(|g| si.h(x, g) == 0))?;
    for &half in &f.halves {
        let delta = view.d.component(view.i, half);
        let part = |m: &Submodule| {
            m.elements()
                .iter()
                .map(|x| vscale(fr, x, delta))
                .collect::<std::collections::HashSet<_>>()
                .len()
        };
        let quotient = part(&vi) / part(&rad).max(1);
        let free: std::collections::HashSet<Elem> = fr
            .elements()
            .map(|a| fr.mul3(f.epsilon(), a, delta))
            .collect();
        if quotient != free.len() {
            return Ok(false);
        }
    }
    Ok(true)
}

pub(crate) fn nonzero(v: &[Elem]) -> bool {
    !is_zero(v)
}
