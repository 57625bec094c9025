use super::finite::{Elem, FiniteRing};
use super::radical::{corner_set, lift_orthogonal_system};
use super::unitary::{AntiStructure, LambdaSpec, UnitaryRing};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FactorKind {
    /// Ā_i is a simple ring.
    Simple,
    /// Ā_i = B × B^op with σ swapping the factors.
    ExchangePair,
}

/// One σ̄-invariant simple factor of (Ā, σ̄, ū, Λ̄).
#[derive(Clone, Debug)]
pub struct SimpleFactorData {
    pub index: usize,
    pub kind: FactorKind,
    /// Central idempotent C_i of Ā cutting out the factor.
    pub central: Elem,
    /// Primitive central idempotents of Ā below C_i (one, or a swapped pair).
    pub halves: Vec<Elem>,
    /// (A_i, σ_i, u_i, Λ_i) on the sub-ring C_i Ā.
    pub ring: UnitaryRing,
    /// Unit v_i of A_i bringing the factor into standard form.
    pub conjugator: Elem,
    /// The factor conjugated by v_i.
    pub standard: UnitaryRing,
    /// σ-fixed ε_i^(j) in A_i coordinates; ε_i = epsilons[0].
    pub epsilons: Vec<Elem>,
    /// (A_(i), σ_(i), u_(i), Λ_(i)) on ε_i A_i ε_i.
    pub corner: UnitaryRing,
    /// Lifts e_i^(j) ∈ A of the ε_i^(j); e_i = lifts[0].
    pub lifts: Vec<Elem>,
    /// f_i = Σ_j e_i^(j).
    pub f: Elem,
}

impl SimpleFactorData {
    pub fn length(&self) -> usize {
        self.epsilons.len()
    }

    pub fn e(&self) -> Elem {
        self.lifts[0]
    }

    pub fn epsilon(&self) -> Elem {
        self.epsilons[0]
    }
}

/// J, Ā and the simple factors of a unitary ring.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub radical: Vec<Elem>,
    pub quotient: FiniteRing,
    pub bar: UnitaryRing,
    pub factors: Vec<SimpleFactorData>,
    /// Unit of A reducing to Σ v_i.
    pub conjugator: Elem,
}

impl Decomposition {
    pub fn compute(ur: &UnitaryRing) -> Result<Decomposition> {
        let ring = ur.ring();
        let radical = ring.radical().to_vec();
        let quotient = ring.quotient(&radical);
        let q = &quotient;
        let down = |a: Elem| q.project(a).expect("quotient is total");
        let up = |x: Elem| q.lift(x).expect("quotient element");
        let sigma_bar: Vec<Elem> = q.elements().map(|x| down(ur.sigma(up(x)))).collect();
        let lambda_bar: Vec<Elem> = ur.lambda().iter().map(|&l| down(l)).collect();
        let bar = UnitaryRing::new(
            q.clone(),
            AntiStructure {
                sigma: sigma_bar,
                u: down(ur.u()),
            },
            LambdaSpec::Generators(lambda_bar),
        )?;

        let center = q.center();
        let central_idem: Vec<Elem> = center
            .iter()
            .copied()
            .filter(|&c| c != 0 && q.is_idempotent(c))
            .collect();
        let primitive: Vec<Elem> = central_idem
            .iter()
            .copied()
            .filter(|&c| !central_idem.iter().any(|&d| d != c && q.mul(d, c) == d))
            .collect();
        let mut groups: Vec<(Elem, Vec<Elem>)> = Vec::new();
        for &c in &primitive {
            let cs = bar.sigma(c);
            if cs < c {
                continue;
            }
            if cs == c {
                groups.push((c, vec![c]));
            } else {
                groups.push((q.add(c, cs), vec![c, cs]));
            }
        }
        groups.sort_by_key(|g| g.0);

        let mut factors = Vec::with_capacity(groups.len());
        let mut v_bar = 0;
        let mut system_bar = Vec::new();
        for (index, (central, halves)) in groups.into_iter().enumerate() {
            let members: Vec<Elem> = q.elements().map(|x| q.mul(central, x)).collect();
            let sub = q.subring(&members, central);
            let into = |x: Elem| sub.project(x).expect("element of the factor");
            let out = |a: Elem| sub.lift(a).expect("factor element");
            let sigma_i: Vec<Elem> = sub.elements().map(|a| into(bar.sigma(out(a)))).collect();
            let lambda_i: Vec<Elem> = bar
                .lambda()
                .iter()
                .map(|&l| into(q.mul(l, central)))
                .collect();
            let factor_ring = UnitaryRing::new(
                sub.clone(),
                AntiStructure {
                    sigma: sigma_i,
                    u: into(q.mul(bar.u(), central)),
                },
                LambdaSpec::Generators(lambda_i),
            )?;
            let (v, epsilons) = standard_form_conjugator(&factor_ring)?;
            let standard = conjugate_unchecked(&factor_ring, v);
            let corner = corner_ring(&standard, epsilons[0])?;
            v_bar = q.add(v_bar, out(v));
            system_bar.extend(epsilons.iter().map(|&e| out(e)));
            let kind = if halves.len() == 2 {
                FactorKind::ExchangePair
            } else {
                FactorKind::Simple
            };
            factors.push(SimpleFactorData {
                index,
                kind,
                central,
                halves,
                ring: factor_ring,
                conjugator: v,
                standard,
                epsilons,
                corner,
                lifts: Vec::new(),
                f: 0,
            });
        }

        let reps: Vec<Elem> = system_bar.iter().map(|&x| up(x)).collect();
        let lifted = lift_orthogonal_system(ring, &reps)?;
        let mut pos = 0;
        for f in &mut factors {
            let n = f.epsilons.len();
            f.lifts = lifted[pos..pos + n].to_vec();
            f.f = ring.sum(f.lifts.iter().copied());
            pos += n;
        }
        let conjugator = up(v_bar);
        Ok(Decomposition {
            radical,
            quotient,
            bar,
            factors,
            conjugator,
        })
    }

    /// Image in Ā.
    pub fn reduce(&self, a: Elem) -> Elem {
        self.quotient.project(a).expect("quotient is total")
    }

    pub fn in_radical(&self, a: Elem) -> bool {
        self.radical.binary_search(&a).is_ok()
    }

    /// π_i: Ā → A_i in factor coordinates.
    pub fn component(&self, i: usize, x_bar: Elem) -> Elem {
        let f = &self.factors[i];
        f.ring
            .ring()
            .project(self.quotient.mul(f.central, x_bar))
            .expect("factor element")
    }

    /// A_i → Ā.
    pub fn embed(&self, i: usize, a: Elem) -> Elem {
        self.factors[i].ring.ring().lift(a).expect("factor element")
    }
}

/// (A, vσv⁻¹, v(v^σ)⁻¹u, vΛ) without re-validation.
pub(crate) fn conjugate_unchecked(ur: &UnitaryRing, v: Elem) -> UnitaryRing {
    let r = ur.ring();
    let vinv = r.inv(v).expect("conjugator is a unit");
    let sigma: Vec<Elem> = r.elements().map(|a| r.mul3(v, ur.sigma(a), vinv)).collect();
    let vs_inv = r.inv(ur.sigma(v)).expect("sigma preserves units");
    let u = r.mul3(v, vs_inv, ur.u());
    let mut lambda: Vec<Elem> = ur.lambda().iter().map(|&l| r.mul(v, l)).collect();
    lambda.sort_unstable();
    UnitaryRing::assemble(r.clone(), AntiStructure { sigma, u }, lambda, None)
}

fn corner_ring(ur: &UnitaryRing, eps: Elem) -> Result<UnitaryRing> {
    let r = ur.ring();
    let members = corner_set(r, eps, eps);
    let d = r.subring(&members, eps);
    let into = |x: Elem| d.project(x).expect("corner element");
    let sigma: Vec<Elem> = d
        .elements()
        .map(|a| into(ur.sigma(d.lift(a).unwrap())))
        .collect();
    let u = into(r.mul(ur.u(), eps));
    let lambda: Vec<Elem> = ur
        .lambda()
        .iter()
        .map(|&l| into(r.mul3(eps, l, eps)))
        .collect();
    UnitaryRing::new(
        d,
        AntiStructure { sigma, u },
        LambdaSpec::Generators(lambda),
    )
}

/// Complete system of σ-fixed idempotents with division-ring corners, linked by matrix units
/// a with a a^σ = ε_1, a^σ a = ε_j, when (σ, u) is in standard form.
pub fn standard_system(ur: &UnitaryRing) -> Option<Vec<Elem>> {
    let r = ur.ring();
    let one = r.one();
    if r.elements().any(|a| ur.sigma(ur.sigma(a)) != a) {
        return None;
    }
    let u = ur.u();
    if u != one && u != r.neg(one) {
        return None;
    }
    let sym: Vec<Elem> = r
        .elements()
        .filter(|&e| e != 0 && r.is_idempotent(e) && ur.sigma(e) == e)
        .collect();
    let minimal: Vec<Elem> = sym
        .iter()
        .copied()
        .filter(|&e| {
            !sym.iter()
                .any(|&d| d != e && r.mul(d, e) == d && r.mul(e, d) == d)
        })
        .collect();
    let central_idempotents = r.center().iter().filter(|&&c| r.is_idempotent(c)).count();
    for &first in &minimal {
        let corner = corner_set(r, first, first);
        if corner.iter().filter(|&&d| r.is_idempotent(d)).count() != central_idempotents {
            continue;
        }
        let tau_is_identity = corner.iter().all(|&d| ur.sigma(d) == d);
        if !tau_is_identity && u != one {
            continue;
        }
        let mut chosen = vec![first];
        if extend_system(ur, &minimal, &mut chosen) {
            return Some(chosen);
        }
    }
    None
}

fn linked(ur: &UnitaryRing, first: Elem, eps: Elem) -> bool {
    let r = ur.ring();
    corner_set(r, first, eps).into_iter().any(|a| {
        let s = ur.sigma(a);
        r.mul(a, s) == first && r.mul(s, a) == eps
    })
}

fn extend_system(ur: &UnitaryRing, minimal: &[Elem], chosen: &mut Vec<Elem>) -> bool {
    let r = ur.ring();
    let rest = r.sub(r.one(), r.sum(chosen.iter().copied()));
    if rest == 0 {
        return true;
    }
    let floor = if chosen.len() >= 2 {
        *chosen.last().unwrap()
    } else {
        0
    };
    for &c in minimal {
        if c <= floor || chosen.contains(&c) || r.mul3(rest, c, rest) != c {
            continue;
        }
        if !linked(ur, chosen[0], c) {
            continue;
        }
        chosen.push(c);
        if extend_system(ur, minimal, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

/// A unit v with the conjugate of the factor in standard form, and the
/// resulting ε-system. Tries v = 1, then v = d + u⁻¹d^σ, then every unit.
pub fn standard_form_conjugator(factor: &UnitaryRing) -> Result<(Elem, Vec<Elem>)> {
    let r = factor.ring();
    let mut tried = vec![false; r.size()];
    let uinv = factor.u_inv();
    let candidates = std::iter::once(r.one())
        .chain(r.elements().map(|d| r.add(d, r.mul(uinv, factor.sigma(d)))))
        .chain(r.elements());
    for v in candidates {
        if tried[v as usize] || !r.is_unit(v) {
            continue;
        }
        tried[v as usize] = true;
        let conj = conjugate_unchecked(factor, v);
        if let Some(system) = standard_system(&conj) {
            return Ok((v, system));
        }
    }
    Err(Error::SearchExhausted(format!(
        "no standard form conjugator for factor over {}",
        r.label()
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn ur(v: serde_json::Value) -> UnitaryRing {
        UnitaryRing::from_json(&v).unwrap()
    }

    #[test]
    fn f3_single_factor() {
        let r = ur(json!({"ring": {"residue": 3}, "sigma": "identity", "u": 1}));
        let d = r.decomposition().unwrap();
        assert_eq!(d.factors.len(), 1);
        assert_eq!(d.factors[0].length(), 1);
        assert_eq!(d.factors[0].corner.ring().size(), 3);
        assert_eq!(d.factors[0].conjugator, d.factors[0].ring.ring().one());
    }

    #[test]
    fn exchange_pair_is_one_factor() {
        let r = ur(
            json!({"ring": {"product": [{"residue": 2}, {"residue": 2}]}, "sigma": "exchange", "u": [1, 1]}),
        );
        let d = r.decomposition().unwrap();
        assert_eq!(d.factors.len(), 1);
        assert_eq!(d.factors[0].kind, FactorKind::ExchangePair);
        assert_eq!(d.factors[0].corner.ring().size(), 4);
        assert_eq!(d.factors[0].length(), 1);
    }

    #[test]
    fn mixed_product_lengths() {
        let r = ur(json!({
            "ring": {"product": [{"matrix": {"n": 2, "over": {"residue": 2}}}, {"residue": 3}]},
            "sigma": {"componentwise": ["transpose", "identity"]},
            "u": [[[1, 0], [0, 1]], 1]
        }));
        let d = r.decomposition().unwrap();
        let mut lengths: Vec<usize> = d.factors.iter().map(|f| f.length()).collect();
        lengths.sort();
        assert_eq!(lengths, vec![1, 2]);
        let one = r.ring().one();
        let total = r.ring().sum(d.factors.iter().map(|f| f.f));
        assert_eq!(total, one);
    }

    #[test]
    fn radical_is_split_off() {
        let r = ur(json!({"ring": {"residue": 4}, "sigma": "identity", "u": 1}));
        let d = r.decomposition().unwrap();
        assert_eq!(d.quotient.size(), 2);
        assert_eq!(d.factors[0].lifts, vec![1]);
    }

    #[test]
    fn twisted_factor_gets_conjugated() {
        // transpose conjugated by [[0,1],[1,1]] is not in standard form over F_3
        let r = ur(json!({
            "ring": {"matrix": {"n": 2, "over": {"residue": 3}}},
            "sigma": {"conjugate": {"by": [[1, 0], [0, 2]], "sigma": "transpose"}},
            "u": [[1, 0], [0, 1]]
        }));
        let d = r.decomposition().unwrap();
        let f = &d.factors[0];
        let s = &f.standard;
        for a in s.ring().elements() {
            assert_eq!(s.sigma(s.sigma(a)), a);
        }
        assert_eq!(f.length(), 2);
    }
}
