use std::collections::HashSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::forms::{project_element, reduce_mod_radical, FactorComponent, QuadraticSpace};
use crate::matrix::{is_zero, Mat};
use crate::reflections::{QuasiReflection, ReflectionKit};
use crate::ring::{Elem, FactorKind, FiniteRing, SimpleFactorData};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CornerType {
    F2,
    F2xF2,
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactorProfile {
    pub index: usize,
    pub exchange: bool,
    pub center_size: usize,
    pub sigma_fixes_center: bool,
    /// n with A_i of K-dimension n², when that dimension is a square.
    pub degree: Option<usize>,
    pub lambda_dimension: Option<usize>,
    pub orthogonal: bool,
    pub split_orthogonal: bool,
    /// n mod 2 for split-orthogonal factors.
    pub parity: Option<u8>,
    pub corner: CornerType,
    pub corner_size: usize,
}

fn log_exact(base: usize, n: usize) -> Option<usize> {
    if base < 2 {
        return None;
    }
    let (mut k, mut p) = (0, 1usize);
    while p < n {
        p *= base;
        k += 1;
    }
    (p == n).then_some(k)
}

fn isqrt_exact(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

pub fn classify_factor(f: &SimpleFactorData) -> FactorProfile {
    let ur = &f.ring;
    let r = ur.ring();
    let center = r.center();
    let sigma_fixes_center = center.iter().all(|&k| ur.sigma(k) == k);
    let q = center.len();
    let degree = log_exact(q, r.size()).and_then(isqrt_exact);
    let stable = center
        .iter()
        .all(|&k| ur.lambda().iter().all(|&l| ur.in_lambda(r.mul(k, l))));
    let lambda_dimension = if stable {
        log_exact(q, ur.lambda().len())
    } else {
        None
    };
    let orthogonal = f.kind == FactorKind::Simple
        && sigma_fixes_center
        && matches!((degree, lambda_dimension), (Some(n), Some(d)) if d * 2 == n * (n - 1));
    let corner_ring = f.corner.ring();
    let split_orthogonal = orthogonal && corner_ring.is_commutative();
    let corner = match corner_ring.size() {
        2 => CornerType::F2,
        4 if f.kind == FactorKind::ExchangePair && corner_ring.idempotents().len() == 4 => {
            CornerType::F2xF2
        }
        _ => CornerType::Other,
    };
    FactorProfile {
        index: f.index,
        exchange: f.kind == FactorKind::ExchangePair,
        center_size: q,
        sigma_fixes_center,
        degree,
        lambda_dimension,
        orthogonal,
        split_orthogonal,
        parity: if split_orthogonal {
            degree.map(|n| (n % 2) as u8)
        } else {
            None
        },
        corner,
        corner_size: corner_ring.size(),
    }
}

pub fn classify(space_ring: &crate::ring::UnitaryRing) -> Result<Vec<FactorProfile>> {
    Ok(space_ring
        .decomposition()?
        .factors
        .iter()
        .map(classify_factor)
        .collect())
}

/// F_p-coordinates on a ring whose additive group is elementary abelian.
struct PrimeCoords {
    p: u32,
    coords: Vec<Vec<u32>>,
}

impl PrimeCoords {
    fn new(ring: &FiniteRing) -> Result<PrimeCoords> {
        let one = ring.one();
        let (mut p, mut x) = (1u32, one);
        while x != 0 {
            x = ring.add(x, one);
            p += 1;
        }
        let mut coords: Vec<Option<Vec<u32>>> = vec![None; ring.size()];
        coords[0] = Some(Vec::new());
        let mut assigned = vec![0 as Elem];
        let mut dim = 0;
        for a in ring.elements() {
            if coords[a as usize].is_some() {
                continue;
            }
            let mut multiple = 0;
            let mut fresh = Vec::new();
            for m in 1..p {
                multiple = ring.add(multiple, a);
                for &b in &assigned {
                    let t = ring.add(b, multiple);
                    let mut c = coords[b as usize].clone().expect("assigned");
                    c.resize(dim, 0);
                    c.push(m);
                    if coords[t as usize].is_some() {
                        return Err(Error::DomainViolation(
                            "additive group is not elementary abelian".into(),
                        ));
                    }
                    coords[t as usize] = Some(c);
                    fresh.push(t);
                }
            }
            if ring.add(multiple, a) != 0 {
                return Err(Error::DomainViolation(
                    "additive group is not elementary abelian".into(),
                ));
            }
            assigned.extend(fresh);
            dim += 1;
        }
        let coords = coords
            .into_iter()
            .map(|c| {
                let mut c = c.expect("every element is reached");
                c.resize(dim, 0);
                c
            })
            .collect();
        Ok(PrimeCoords { p, coords })
    }

    /// F_p-rank of the additive span of `vectors`.
    fn rank(&self, vectors: &[Vec<Elem>]) -> usize {
        let p = self.p;
        let mut rows: Vec<Vec<u32>> = vectors
            .iter()
            .map(|v| {
                v.iter()
                    .flat_map(|&a| self.coords[a as usize].iter().copied())
                    .collect()
            })
            .collect();
        let width = rows.first().map_or(0, Vec::len);
        let mut rank = 0;
        for col in 0..width {
            let Some(pivot) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else {
                continue;
            };
            rows.swap(rank, pivot);
            let inv = (1..p)
                .find(|&x| x * rows[rank][col] % p == 1)
                .expect("p is prime");
            for x in rows[rank].iter_mut() {
                *x = *x * inv % p;
            }
            let pivot = rows[rank].clone();
            for (r, row) in rows.iter_mut().enumerate() {
                let f = row[col];
                if r != rank && f != 0 {
                    for (x, &y) in row[col..width].iter_mut().zip(&pivot[col..width]) {
                        *x = (*x + (p - f) * y) % p;
                    }
                }
            }
            rank += 1;
        }
        rank
    }
}

/// Δ(ψ_i) for one factor, from the K-dimension of (1 − ψ_i)·End(P_i).
pub fn dickson_invariant(
    component: &FactorComponent,
    profile: &FactorProfile,
    psi: &Mat,
) -> Result<u8> {
    if !profile.split_orthogonal {
        if profile.orthogonal {
            return Ok(0);
        }
        return Err(Error::NotSplitOrthogonal(profile.index));
    }
    let space = &component.space;
    let ai = space.ring();
    let k = space.rank();
    let e = space.module().proj();
    let mut gens = Vec::new();
    for &a in ai.additive_generators() {
        for l in 0..k {
            for m in 0..k {
                let mut unit = Mat::zeros(k, k);
                unit.set(l, m, a);
                gens.push(e.mul(ai, &unit).mul(ai, e).data);
            }
        }
    }
    let pc = PrimeCoords::new(ai)?;
    let f = log_exact(pc.p as usize, profile.center_size)
        .ok_or_else(|| Error::DomainViolation("center is not an F_p-space".into()))?;
    let dim_e = pc.rank(&gens) / f;
    if dim_e == 0 {
        return Ok(0);
    }
    let deg = isqrt_exact(dim_e)
        .ok_or_else(|| Error::SearchExhausted("End(P_i) has non-square dimension".into()))?;
    let one_minus = e.sub(ai, psi);
    let images: Vec<Vec<Elem>> = gens
        .iter()
        .map(|g| {
            one_minus
                .mul(
                    ai,
                    &Mat {
                        rows: k,
                        cols: k,
                        data: g.clone(),
                    },
                )
                .data
        })
        .collect();
    let dim = pc.rank(&images) / f;
    if dim % deg != 0 {
        return Err(Error::SearchExhausted(
            "dim (1−ψ)E not divisible by deg E".into(),
        ));
    }
    Ok(((dim / deg) % 2) as u8)
}

/// deg of π_i(e) A_i π_i(e) over the center of A_i.
pub fn idempotent_degree(
    space: &QuadraticSpace,
    profile: &FactorProfile,
    e: Elem,
) -> Result<usize> {
    let d = space.ur().decomposition()?;
    let fr = d.factors[profile.index].ring.ring();
    let ei = project_element(d, profile.index, e);
    let corner: HashSet<Elem> = fr.elements().map(|a| fr.mul3(ei, a, ei)).collect();
    log_exact(profile.center_size, corner.len())
        .and_then(isqrt_exact)
        .ok_or_else(|| Error::SearchExhausted("corner is not a matrix algebra".into()))
}

/// ψ on P_i: entries projected to A_i.
pub fn factor_map(space: &QuadraticSpace, i: usize, psi: &Mat) -> Result<Mat> {
    let d = space.ur().decomposition()?;
    Ok(psi.map(|a| project_element(d, i, a)))
}

/// Factors i with P_i ≠ 0.
pub fn populated(space: &QuadraticSpace) -> Result<Vec<bool>> {
    let d = space.ur().decomposition()?;
    let gens = space.module().generators();
    Ok((0..d.factors.len())
        .map(|i| {
            gens.iter()
                .any(|g| g.iter().any(|&a| project_element(d, i, a) != 0))
        })
        .collect())
}

/// Context shared by Δ_I evaluations on one space.
#[derive(Clone, Debug)]
pub struct DicksonContext {
    pub profiles: Vec<FactorProfile>,
    pub components: Vec<FactorComponent>,
    /// I: populated split-orthogonal factors.
    pub index_set: Vec<usize>,
    /// ξ = (n_i mod 2)_{i∈I}.
    pub xi: Vec<u8>,
    space: QuadraticSpace,
}

impl DicksonContext {
    pub fn new(space: &QuadraticSpace) -> Result<DicksonContext> {
        if !space.is_unimodular()? {
            return Err(Error::NotUnimodular);
        }
        let profiles = classify(space.ur())?;
        let components = reduce_mod_radical(space)?.factors;
        let pop = populated(space)?;
        let index_set: Vec<usize> = profiles
            .iter()
            .filter(|p| p.split_orthogonal && pop[p.index])
            .map(|p| p.index)
            .collect();
        let xi = index_set
            .iter()
            .map(|&i| profiles[i].parity.unwrap_or(0))
            .collect();
        Ok(DicksonContext {
            profiles,
            components,
            index_set,
            xi,
            space: space.clone(),
        })
    }

    pub fn delta(&self, psi: &Mat) -> Result<Vec<u8>> {
        self.index_set
            .iter()
            .map(|&i| {
                let psi_i = factor_map(&self.space, i, psi)?;
                dickson_invariant(&self.components[i], &self.profiles[i], &psi_i)
            })
            .collect()
    }
}

/// Δ_I(ψ) as a bit vector over I.
pub fn delta_i(space: &QuadraticSpace, psi: &Mat) -> Result<Vec<u8>> {
    DicksonContext::new(space)?.delta(psi)
}

#[derive(Clone, Debug)]
pub struct ReflectionExistence {
    pub exists: bool,
    /// An odd split-orthogonal factor with P_i = 0, when one exists.
    pub empty_odd_factor: Option<usize>,
    pub witness: Option<QuasiReflection>,
}

pub fn reflection_existence(space: &QuadraticSpace) -> Result<ReflectionExistence> {
    let profiles = classify(space.ur())?;
    let pop = populated(space)?;
    let empty_odd_factor = profiles
        .iter()
        .find(|p| p.split_orthogonal && p.parity == Some(1) && !pop[p.index])
        .map(|p| p.index);
    let kit = ReflectionKit::new(space, space.ring().one());
    let mut witness = None;
    if empty_odd_factor.is_none() {
        for y in space.elements()?.elements() {
            if let Some(&c) = kit.parameters(space, y).first() {
                witness = kit.build(space, y.clone(), c);
                break;
            }
        }
    }
    Ok(ReflectionExistence {
        exists: witness.is_some(),
        empty_odd_factor,
        witness,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubgroupCase {
    AllOddFactorsPopulated,
    EmptyOddFactor,
    NoReflection,
}

#[derive(Clone, Debug, Serialize)]
pub struct ReflectionSubgroupReport {
    pub case: SubgroupCase,
    pub index_set: Vec<usize>,
    pub xi: Vec<u8>,
    /// m and n: populated even and all odd split-orthogonal factors.
    pub even: usize,
    pub odd: usize,
    /// [O : O′] in the populated case; O′ = 1 otherwise.
    pub predicted_index: Option<u64>,
    pub measured_index: Option<u64>,
}

/// The space is the 4-dimensional hyperbolic quadratic space over F_2.
fn is_f2_exception(corner: &QuadraticSpace) -> Result<bool> {
    let elems = corner.elements()?;
    if corner.ring().size() != 2 || elems.len() != 16 {
        return Ok(false);
    }
    let zeros = elems
        .elements()
        .iter()
        .filter(|x| corner.ur().in_lambda(corner.beta(x, x)))
        .count();
    Ok(zeros == 10)
}

/// P_(i) ≅ A_(i) over an F_2×F_2 corner: both halves one-dimensional.
pub(crate) fn is_free_rank_one_f2f2(corner: &QuadraticSpace) -> Result<bool> {
    let elems = corner.elements()?;
    if elems.len() != 4 {
        return Ok(false);
    }
    let r = corner.ring();
    let halves: Vec<Elem> = r
        .idempotents()
        .into_iter()
        .filter(|&e| e != 0 && e != r.one())
        .collect();
    Ok(halves.iter().all(|&d| {
        let part: HashSet<Vec<Elem>> = elems
            .elements()
            .iter()
            .map(|x| crate::matrix::vscale(r, x, d))
            .collect();
        part.len() == 2
    }))
}

/// Checks the hypotheses of the O′ description; Err(HypothesisViolation) names the factor.
pub fn check_hypotheses(space: &QuadraticSpace) -> Result<()> {
    let profiles = classify(space.ur())?;
    let comps = reduce_mod_radical(space)?.factors;
    for p in &profiles {
        let corner = &comps[p.index].corner;
        if p.split_orthogonal && p.corner == CornerType::F2 && is_f2_exception(corner)? {
            return Err(Error::HypothesisViolation {
                factor: p.index,
                reason: "corner is the 4-dimensional hyperbolic space over F_2".into(),
            });
        }
        if p.corner == CornerType::F2xF2 && is_free_rank_one_f2f2(corner)? {
            return Err(Error::HypothesisViolation {
                factor: p.index,
                reason: "P_i ≅ ε_i A_i over an F_2×F_2 corner".into(),
            });
        }
    }
    Ok(())
}

/// Hypotheses under which O(P) is generated by quasi-reflections: no split-orthogonal
/// factor with D_i ≅ F_2, and P_(i) ≇ ε_iA_i over F_2×F_2 corners.
pub fn check_generation_hypotheses(space: &QuadraticSpace) -> Result<()> {
    let profiles = classify(space.ur())?;
    let comps = reduce_mod_radical(space)?.factors;
    for p in &profiles {
        if p.split_orthogonal && p.corner == CornerType::F2 {
            return Err(Error::HypothesisViolation {
                factor: p.index,
                reason: "split-orthogonal factor with residue field F_2".into(),
            });
        }
        if p.corner == CornerType::F2xF2 && is_free_rank_one_f2f2(&comps[p.index].corner)? {
            return Err(Error::HypothesisViolation {
                factor: p.index,
                reason: "P_i ≅ ε_i A_i over an F_2×F_2 corner".into(),
            });
        }
    }
    Ok(())
}

pub fn reflection_subgroup(space: &QuadraticSpace) -> Result<ReflectionSubgroupReport> {
    let ctx = DicksonContext::new(space)?;
    check_hypotheses(space)?;
    let pop = populated(space)?;
    let odd: Vec<&FactorProfile> = ctx
        .profiles
        .iter()
        .filter(|p| p.parity == Some(1))
        .collect();
    let even = ctx
        .index_set
        .iter()
        .filter(|&&i| ctx.profiles[i].parity == Some(0))
        .count();
    let all_populated = odd.iter().all(|p| pop[p.index]);
    let zero_space = space.module().generators().iter().all(|g| is_zero(g));
    let case = if all_populated {
        SubgroupCase::AllOddFactorsPopulated
    } else if zero_space {
        SubgroupCase::NoReflection
    } else {
        SubgroupCase::EmptyOddFactor
    };
    let predicted_index = all_populated.then(|| 1u64 << (even + odd.len().saturating_sub(1)));
    Ok(ReflectionSubgroupReport {
        case,
        index_set: ctx.index_set.clone(),
        xi: ctx.xi.clone(),
        even,
        odd: odd.len(),
        predicted_index,
        measured_index: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::UnitaryRing;
    use serde_json::json;

    fn ur(v: serde_json::Value) -> UnitaryRing {
        UnitaryRing::from_json(&v).unwrap()
    }

    #[test]
    fn profiles_of_basic_factors() {
        let f3 = ur(json!({"ring": {"residue": 3}, "sigma": "identity", "u": 1, "lambda": "min"}));
        let p = &classify(&f3).unwrap()[0];
        assert!(p.split_orthogonal);
        assert_eq!(p.parity, Some(1));
        let x = ur(
            json!({"ring": {"product": [{"residue": 2}, {"residue": 2}]}, "sigma": "exchange", "u": [1, 1], "lambda": {"generators": [[1, 1]]}}),
        );
        let p = &classify(&x).unwrap()[0];
        assert!(!p.orthogonal);
        assert_eq!(p.corner, CornerType::F2xF2);
        let m = ur(
            json!({"ring": {"matrix": {"n": 2, "over": {"residue": 2}}}, "sigma": "transpose", "u": [[1, 0], [0, 1]], "lambda": "min"}),
        );
        let p = &classify(&m).unwrap()[0];
        assert!(p.split_orthogonal);
        assert_eq!(p.parity, Some(0));
        assert_eq!(p.lambda_dimension, Some(1));
        assert_eq!(p.corner, CornerType::F2);
    }

    #[test]
    fn minus_identity_on_f3_plane() {
        let f3 = ur(json!({"ring": {"residue": 3}, "sigma": "identity", "u": 1, "lambda": "min"}));
        let s = QuadraticSpace::free(&f3, Mat::from_rows(vec![vec![1, 0], vec![0, 1]]).unwrap())
            .unwrap();
        let minus = Mat::from_rows(vec![vec![2, 0], vec![0, 2]]).unwrap();
        assert_eq!(delta_i(&s, &minus).unwrap(), vec![0]);
        assert_eq!(delta_i(&s, &Mat::identity(f3.ring(), 2)).unwrap(), vec![0]);
        let refl = Mat::from_rows(vec![vec![2, 0], vec![0, 1]]).unwrap();
        assert_eq!(delta_i(&s, &refl).unwrap(), vec![1]);
    }
}
