use std::collections::{HashMap, HashSet, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::dickson::{
    check_generation_hypotheses, idempotent_degree, reflection_subgroup, DicksonContext,
    SubgroupCase,
};
use crate::error::{Error, Result};
use crate::forms::{check_isometry, PresentedModule, QuadraticSpace, Submodule};
use crate::limits::{check_enumeration, power};
use crate::matrix::{vadd, vscale, Mat, Vector};
use crate::reflections::ReflectionKit;
use crate::witt::{extend, ExtensionProblem, Route};

/// A finite group of k×k matrices acting on P.
#[derive(Clone, Debug)]
pub struct GroupTable {
    pub elements: Vec<Mat>,
    index: HashMap<Mat, usize>,
}

impl GroupTable {
    pub fn new(mut elements: Vec<Mat>) -> GroupTable {
        elements.sort();
        elements.dedup();
        let index = elements
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, m)| (m, i))
            .collect();
        GroupTable { elements, index }
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn contains(&self, m: &Mat) -> bool {
        self.index.contains_key(m)
    }

    pub fn position(&self, m: &Mat) -> Option<usize> {
        self.index.get(m).copied()
    }

    pub fn is_subset_of(&self, other: &GroupTable) -> bool {
        self.elements.iter().all(|m| other.contains(m))
    }

    /// Multiplication table by positions.
    pub fn table(&self, space: &QuadraticSpace) -> Vec<Vec<usize>> {
        let r = space.ring();
        self.elements
            .iter()
            .map(|a| {
                self.elements
                    .iter()
                    .map(|b| self.index[&a.mul(r, b)])
                    .collect()
            })
            .collect()
    }
}

/// Coefficients a with Σ g_j a_j = target, over all coefficient tuples.
fn solve_in_span(
    space: &QuadraticSpace,
    gens: &[Vector],
    tuples: &[Vec<u32>],
    target: &[u32],
) -> Option<Vec<u32>> {
    let r = space.ring();
    tuples
        .iter()
        .find(|a| combine(r, gens, a, space.rank()) == target)
        .cloned()
}

fn combine(r: &crate::ring::FiniteRing, gens: &[Vector], coeffs: &[u32], k: usize) -> Vector {
    gens.iter().zip(coeffs).fold(vec![0; k], |acc, (g, &a)| {
        if a == 0 {
            acc
        } else {
            vadd(r, &acc, &vscale(r, g, a))
        }
    })
}

fn all_tuples(size: usize, len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..size as u32).map(move |a| {
                    let mut t = t.clone();
                    t.push(a);
                    t
                })
            })
            .collect();
    }
    out
}

/// Every isometry s1 → s2 (bijective, class-preserving), as normalized matrices.
pub fn enumerate_maps(s1: &QuadraticSpace, s2: &QuadraticSpace) -> Result<Vec<Mat>> {
    if !s1.ur().same(s2.ur()) {
        return Err(Error::RingMismatch);
    }
    let r = s1.ring();
    let p1 = s1.elements()?;
    let p2 = s2.elements()?;
    if p1.len() != p2.len() {
        return Ok(Vec::new());
    }
    let gens = p1.gens().to_vec();
    let n = gens.len();
    check_enumeration("isometry candidates", power(p2.len(), n))?;
    check_enumeration("coefficient tuples", power(r.size(), n))?;
    let tuples = all_tuples(r.size(), n);
    let relations: Vec<Vec<u32>> = {
        let rel: Vec<Vector> = tuples
            .iter()
            .filter(|a| crate::matrix::is_zero(&combine(r, &gens, a, s1.rank())))
            .cloned()
            .collect();
        Submodule::from_elements(r, n, rel)?.gens().to_vec()
    };
    let columns: Vec<Vec<u32>> = s1
        .module()
        .proj()
        .columns()
        .iter()
        .map(|c| solve_in_span(s1, &gens, &tuples, c).ok_or(Error::NotInModule))
        .collect::<Result<_>>()?;
    let ur = s1.ur();
    let targets: Vec<Vec<&Vector>> = gens
        .iter()
        .map(|g| {
            let b = s1.beta(g, g);
            p2.elements()
                .iter()
                .filter(|t| ur.in_lambda(r.sub(s2.beta(t, t), b)))
                .collect()
        })
        .collect();
    if n == 0 {
        return Ok(vec![Mat::zeros(s2.rank(), s1.rank())]);
    }
    let found: Vec<Mat> = targets[0]
        .par_iter()
        .flat_map_iter(|&first| {
            let mut out = Vec::new();
            let mut chosen = vec![first.clone()];
            backtrack(
                s1,
                s2,
                &gens,
                &targets,
                &relations,
                &columns,
                p2.len(),
                &mut chosen,
                &mut out,
            );
            out
        })
        .collect();
    let mut found = found;
    found.sort();
    Ok(found)
}

#[allow(clippy::too_many_arguments)]
fn backtrack(
    s1: &QuadraticSpace,
    s2: &QuadraticSpace,
    gens: &[Vector],
    targets: &[Vec<&Vector>],
    relations: &[Vec<u32>],
    columns: &[Vec<u32>],
    size: usize,
    chosen: &mut Vec<Vector>,
    out: &mut Vec<Mat>,
) {
    let r = s1.ring();
    let j = chosen.len();
    if j == gens.len() {
        let k2 = s2.rank();
        if relations
            .iter()
            .any(|a| !crate::matrix::is_zero(&combine(r, chosen, a, k2)))
        {
            return;
        }
        match Submodule::span(r, k2, chosen) {
            Ok(img) if img.len() == size => {}
            _ => return,
        }
        let cols: Vec<Vector> = columns.iter().map(|a| combine(r, chosen, a, k2)).collect();
        out.push(Mat::from_columns(k2, &cols));
        return;
    }
    for &t in &targets[j] {
        if (0..j).all(|l| s2.h(&chosen[l], t) == s1.h(&gens[l], &gens[j])) {
            chosen.push(t.clone());
            backtrack(s1, s2, gens, targets, relations, columns, size, chosen, out);
            chosen.pop();
        }
    }
}

pub fn enumerate_isometries(space: &QuadraticSpace) -> Result<GroupTable> {
    Ok(GroupTable::new(enumerate_maps(space, space)?))
}

/// Subgroup generated by `gens` inside the isometries of `space`.
pub fn closure(space: &QuadraticSpace, gens: &[Mat]) -> Result<GroupTable> {
    let r = space.ring();
    let id = space.module().proj().clone();
    let mut seen: HashSet<Mat> = HashSet::from([id.clone()]);
    let mut queue = VecDeque::from([id]);
    let gens: Vec<Mat> = gens
        .iter()
        .cloned()
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    while let Some(g) = queue.pop_front() {
        for s in &gens {
            let m = g.mul(r, s);
            if seen.insert(m.clone()) {
                check_enumeration("group elements", seen.len() as u128)?;
                queue.push_back(m);
            }
        }
    }
    Ok(GroupTable::new(seen.into_iter().collect()))
}

/// All 1-reflections s_{y,1,c} of the space, as matrices.
pub fn reflection_matrices(space: &QuadraticSpace) -> Result<Vec<Mat>> {
    let kit = ReflectionKit::new(space, space.ring().one());
    let mut out: Vec<Mat> = kit
        .all(space, space.elements()?)
        .iter()
        .map(|s| s.matrix())
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// All quasi-reflections s_{y,e,c} for every idempotent e, as matrices.
pub fn quasi_reflection_matrices(space: &QuadraticSpace) -> Result<Vec<Mat>> {
    let p = space.elements()?;
    let mut out: Vec<Mat> = space
        .ring()
        .idempotents()
        .into_par_iter()
        .flat_map_iter(|e| {
            let kit = ReflectionKit::new(space, e);
            kit.all(space, p)
                .into_iter()
                .map(|s| s.matrix())
                .collect::<Vec<_>>()
        })
        .collect();
    out.sort();
    out.dedup();
    Ok(out)
}

/// Every direct summand of P, one idempotent per summand (least matrix first).
pub fn all_summands(space: &QuadraticSpace) -> Result<Vec<PresentedModule>> {
    let r = space.ring();
    let k = space.rank();
    let e = space.module().proj();
    check_enumeration("summand candidates", power(r.size(), k * k))?;
    let cands: Vec<Mat> = all_tuples(r.size(), k * k)
        .into_par_iter()
        .map(|data| {
            e.mul(
                r,
                &Mat {
                    rows: k,
                    cols: k,
                    data,
                },
            )
            .mul(r, e)
        })
        .filter(|f| f.is_idempotent(r))
        .collect();
    let mut cands = cands;
    cands.sort();
    cands.dedup();
    let mut seen: HashSet<Vec<Vector>> = HashSet::new();
    let mut out = Vec::new();
    for f in cands {
        let m = PresentedModule::new(r, f)?;
        if seen.insert(m.elements()?.elements().to_vec()) {
            out.push(m);
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct ExtensionVerification {
    pub summands: usize,
    pub pairs: usize,
    pub maps: usize,
    pub witt_i: usize,
    pub augmented: usize,
    pub failures: Vec<String>,
}

impl ExtensionVerification {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Extends every isometry between summands of a unimodular space and checks the results.
pub fn verify_extension(space: &QuadraticSpace) -> Result<ExtensionVerification> {
    if !space.is_unimodular()? {
        return Err(Error::NotUnimodular);
    }
    let group = enumerate_isometries(space)?;
    let summands = all_summands(space)?;
    let restricted: Vec<QuadraticSpace> = summands
        .iter()
        .map(|m| space.restrict(m))
        .collect::<Result<_>>()?;
    let mut jobs = Vec::new();
    for (a, qa) in restricted.iter().enumerate() {
        for (b, qb) in restricted.iter().enumerate() {
            if qa.elements()?.len() == qb.elements()?.len() {
                jobs.push((a, b));
            }
        }
    }
    let rows: Vec<Result<ExtensionVerification>> = jobs
        .par_iter()
        .map(|&(a, b)| {
            let mut rep = ExtensionVerification {
                pairs: 1,
                ..Default::default()
            };
            for psi in enumerate_maps(&restricted[a], &restricted[b])? {
                rep.maps += 1;
                let r = space.ring();
                let prob = ExtensionProblem::with_full_v(
                    space,
                    summands[a].clone(),
                    summands[b].clone(),
                    &psi,
                )?;
                match extend(&prob) {
                    Ok(res) => {
                        match res.route {
                            Route::WittI => rep.witt_i += 1,
                            Route::WittIIAugmented { .. } => rep.augmented += 1,
                        }
                        let agrees = summands[a]
                            .generators()
                            .iter()
                            .all(|g| res.phi.apply(r, g) == psi.apply(r, g));
                        if !agrees
                            || !group.contains(&res.phi)
                            || !check_isometry(&res.phi, space, space)?
                        {
                            rep.failures
                                .push(format!("summands {a}→{b}: extension is wrong"));
                        }
                    }
                    Err(err) => rep.failures.push(format!("summands {a}→{b}: {err}")),
                }
            }
            Ok(rep)
        })
        .collect();
    let mut total = ExtensionVerification {
        summands: summands.len(),
        ..Default::default()
    };
    for row in rows {
        let row = row?;
        total.pairs += row.pairs;
        total.maps += row.maps;
        total.witt_i += row.witt_i;
        total.augmented += row.augmented;
        total.failures.extend(row.failures);
    }
    Ok(total)
}

#[derive(Clone, Debug, Serialize)]
pub struct IndexVerification {
    pub group_order: usize,
    pub subgroup_order: usize,
    pub measured_index: u64,
    /// From the classification; None when a hypothesis fails.
    pub predicted_index: Option<u64>,
    pub case: Option<SubgroupCase>,
    pub hypothesis_violation: Option<String>,
    /// O′ = {g ∈ O : Δ_I(g) ∈ {0, ξ}}.
    pub kernel_matches: bool,
}

impl IndexVerification {
    pub fn passed(&self) -> bool {
        match self.case {
            Some(SubgroupCase::AllOddFactorsPopulated) => {
                self.predicted_index == Some(self.measured_index) && self.kernel_matches
            }
            Some(_) => self.subgroup_order == 1,
            None => self.hypothesis_violation.is_some(),
        }
    }
}

pub fn verify_index(space: &QuadraticSpace) -> Result<IndexVerification> {
    let ctx = DicksonContext::new(space)?;
    let group = enumerate_isometries(space)?;
    let sub = closure(space, &reflection_matrices(space)?)?;
    let zero = vec![0u8; ctx.index_set.len()];
    let predicted: Vec<Result<bool>> = group
        .elements
        .par_iter()
        .map(|g| {
            let d = ctx.delta(g)?;
            Ok(d == zero || d == ctx.xi)
        })
        .collect();
    let mut kernel_matches = true;
    for (g, p) in group.elements.iter().zip(predicted) {
        if p? != sub.contains(g) {
            kernel_matches = false;
        }
    }
    let (predicted_index, case, hypothesis_violation) = match reflection_subgroup(space) {
        Ok(rep) => (rep.predicted_index, Some(rep.case), None),
        Err(err @ Error::HypothesisViolation { .. }) => (None, None, Some(err.to_string())),
        Err(err) => return Err(err),
    };
    Ok(IndexVerification {
        group_order: group.order(),
        subgroup_order: sub.order(),
        measured_index: (group.order() / sub.order().max(1)) as u64,
        predicted_index,
        case,
        hypothesis_violation,
        kernel_matches,
    })
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct DicksonVerification {
    pub group_order: usize,
    pub index_set: Vec<usize>,
    pub image_size: usize,
    pub reflections: usize,
    pub homomorphism: bool,
    pub surjective: bool,
    pub failures: Vec<String>,
}

impl DicksonVerification {
    pub fn passed(&self) -> bool {
        self.homomorphism && self.surjective && self.failures.is_empty()
    }
}

/// Δ_I against the full isometry group: additivity, surjectivity and its value on reflections.
pub fn verify_dickson(space: &QuadraticSpace) -> Result<DicksonVerification> {
    let ctx = DicksonContext::new(space)?;
    let group = enumerate_isometries(space)?;
    let n = group.order();
    check_enumeration("Dickson products", power(n, 2))?;
    let deltas: Vec<Vec<u8>> = group
        .elements
        .par_iter()
        .map(|g| ctx.delta(g))
        .collect::<Result<_>>()?;
    let r = space.ring();
    let homomorphism = (0..n).into_par_iter().all(|a| {
        (0..n).all(|b| {
            let ab = group.elements[a].mul(r, &group.elements[b]);
            group.position(&ab).is_some_and(|c| {
                deltas[c]
                    .iter()
                    .zip(deltas[a].iter().zip(&deltas[b]))
                    .all(|(&x, (&y, &z))| x == (y ^ z))
            })
        })
    });
    let image: HashSet<&Vec<u8>> = deltas.iter().collect();
    let surjective = image.len() == 1usize << ctx.index_set.len();
    let mut rep = DicksonVerification {
        group_order: n,
        index_set: ctx.index_set.clone(),
        image_size: image.len(),
        homomorphism,
        surjective,
        ..Default::default()
    };
    let p = space.elements()?;
    for e in r.idempotents().into_iter().filter(|&e| e != 0) {
        let expected: Vec<u8> = ctx
            .index_set
            .iter()
            .map(|&i| idempotent_degree(space, &ctx.profiles[i], e).map(|d| (d % 2) as u8))
            .collect::<Result<_>>()?;
        for s in ReflectionKit::new(space, e).all(space, p) {
            rep.reflections += 1;
            let got = ctx.delta(&s.matrix())?;
            if got != expected {
                rep.failures.push(format!(
                    "reflection {} has Δ {:?}, expected {:?}",
                    s.to_json(),
                    got,
                    expected
                ));
            }
        }
    }
    Ok(rep)
}

#[derive(Clone, Debug, Serialize)]
pub struct GenerationVerification {
    pub group_order: usize,
    pub quasi_reflections: usize,
    pub closure_order: usize,
    pub hypothesis_violation: Option<String>,
}

impl GenerationVerification {
    pub fn generated(&self) -> bool {
        self.closure_order == self.group_order
    }

    /// Generation holds wherever the hypotheses do.
    pub fn passed(&self) -> bool {
        self.hypothesis_violation.is_some() || self.generated()
    }
}

/// Compares the group generated by all quasi-reflections with O(P).
pub fn verify_generation(space: &QuadraticSpace) -> Result<GenerationVerification> {
    if !space.is_unimodular()? {
        return Err(Error::NotUnimodular);
    }
    let hypothesis_violation = match check_generation_hypotheses(space) {
        Ok(()) => None,
        Err(err @ Error::HypothesisViolation { .. }) => Some(err.to_string()),
        Err(err) => return Err(err),
    };
    let group = enumerate_isometries(space)?;
    let gens = quasi_reflection_matrices(space)?;
    let sub = closure(space, &gens)?;
    Ok(GenerationVerification {
        group_order: group.order(),
        quasi_reflections: gens.len(),
        closure_order: if sub.is_subset_of(&group) {
            sub.order()
        } else {
            0
        },
        hypothesis_violation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::UnitaryRing;
    use serde_json::json;

    #[test]
    fn orthogonal_group_of_f3_plane() {
        let ur = UnitaryRing::from_json(
            &json!({"ring": {"residue": 3}, "sigma": "identity", "u": 1, "lambda": "min"}),
        )
        .unwrap();
        let s = QuadraticSpace::free(&ur, Mat::from_rows(vec![vec![1, 0], vec![0, 1]]).unwrap())
            .unwrap();
        let o = enumerate_isometries(&s).unwrap();
        assert_eq!(o.order(), 8);
        let v = verify_index(&s).unwrap();
        assert_eq!(v.subgroup_order, 8);
        assert!(v.kernel_matches);
    }
}
