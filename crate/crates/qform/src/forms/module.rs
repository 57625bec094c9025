use std::collections::HashSet;
use std::sync::{Arc, OnceLock};

use crate::error::{Error, Result};
use crate::limits;
use crate::matrix::{is_zero, vadd, vscale, Mat, Vector};
use crate::ring::{FiniteRing, UnitaryRing};

/// Injective packing of vectors in A^k into u64, first coordinate most significant.
#[derive(Clone, Copy, Debug)]
pub struct Codec {
    base: u64,
    k: usize,
}

impl Codec {
    pub fn new(ring: &FiniteRing, k: usize) -> Result<Codec> {
        let base = ring.size() as u64;
        if limits::power(ring.size(), k) > u64::MAX as u128 {
            return Err(Error::EnumerationBoundExceeded {
                what: format!("vector encoding of rank {k}"),
                bound: u64::MAX,
            });
        }
        Ok(Codec { base, k })
    }

    #[inline]
    pub fn encode(&self, v: &[crate::ring::Elem]) -> u64 {
        v.iter().fold(0u64, |acc, &x| acc * self.base + x as u64)
    }

    pub fn decode(&self, mut code: u64) -> Vector {
        let mut v = vec![0; self.k];
        for i in (0..self.k).rev() {
            v[i] = (code % self.base) as crate::ring::Elem;
            code /= self.base;
        }
        v
    }
}

/// A right submodule of A^k, stored as a generator list plus its full element set.
#[derive(Clone)]
pub struct Submodule {
    ring: FiniteRing,
    rank: usize,
    codec: Codec,
    gens: Vec<Vector>,
    elems: Arc<Vec<Vector>>,
    codes: Arc<HashSet<u64>>,
}

impl std::fmt::Debug for Submodule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "Submodule(rank {}, {} elements, {} generators)",
            self.rank,
            self.elems.len(),
            self.gens.len()
        )
    }
}

impl PartialEq for Submodule {
    fn eq(&self, other: &Submodule) -> bool {
        self.rank == other.rank && self.elems == other.elems
    }
}

impl Submodule {
    /// Right A-span of `gens`.
    pub fn span(ring: &FiniteRing, rank: usize, gens: &[Vector]) -> Result<Submodule> {
        let codec = Codec::new(ring, rank)?;
        let (elems, codes, kept) = grow(ring, &codec, vec![vec![0; rank]], gens)?;
        Ok(Self::finish(ring, rank, codec, kept, elems, codes))
    }

    /// The submodule whose elements are exactly `members` (must be closed; not re-checked).
    pub fn from_elements(
        ring: &FiniteRing,
        rank: usize,
        mut members: Vec<Vector>,
    ) -> Result<Submodule> {
        let codec = Codec::new(ring, rank)?;
        members.sort_unstable();
        members.dedup();
        let (_, _, gens) = grow(ring, &codec, vec![vec![0; rank]], &members)?;
        let codes = members.iter().map(|v| codec.encode(v)).collect();
        Ok(Submodule {
            ring: ring.clone(),
            rank,
            codec,
            gens,
            elems: Arc::new(members),
            codes: Arc::new(codes),
        })
    }

    fn finish(
        ring: &FiniteRing,
        rank: usize,
        codec: Codec,
        gens: Vec<Vector>,
        mut elems: Vec<Vector>,
        codes: HashSet<u64>,
    ) -> Submodule {
        elems.sort_unstable();
        Submodule {
            ring: ring.clone(),
            rank,
            codec,
            gens,
            elems: Arc::new(elems),
            codes: Arc::new(codes),
        }
    }

    pub fn zero(ring: &FiniteRing, rank: usize) -> Result<Submodule> {
        Self::span(ring, rank, &[])
    }

    pub fn ring(&self) -> &FiniteRing {
        &self.ring
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn codec(&self) -> Codec {
        self.codec
    }

    /// Generators, each outside the span of the earlier ones.
    pub fn gens(&self) -> &[Vector] {
        &self.gens
    }

    /// All elements in canonical order.
    pub fn elements(&self) -> &[Vector] {
        &self.elems
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn is_zero(&self) -> bool {
        self.elems.len() == 1
    }

    pub fn contains(&self, v: &[crate::ring::Elem]) -> bool {
        v.len() == self.rank && self.codes.contains(&self.codec.encode(v))
    }

    pub fn contains_code(&self, code: u64) -> bool {
        self.codes.contains(&code)
    }

    pub fn is_subset_of(&self, other: &Submodule) -> bool {
        self.gens.iter().all(|g| other.contains(g))
    }

    /// Elements satisfying `keep`, which must cut out a submodule.
    pub fn filter(&self, keep: impl Fn(&Vector) -> bool) -> Result<Submodule> {
        let members: Vec<Vector> = self.elems.iter().filter(|v| keep(v)).cloned().collect();
        Self::from_elements(&self.ring, self.rank, members)
    }

    /// Image under a matrix.
    pub fn image(&self, m: &Mat) -> Result<Submodule> {
        let gens: Vec<Vector> = self.gens.iter().map(|g| m.apply(&self.ring, g)).collect();
        Self::span(&self.ring, m.rows, &gens)
    }

    pub fn sum(&self, other: &Submodule) -> Result<Submodule> {
        let mut gens = self.gens.clone();
        gens.extend(other.gens.iter().cloned());
        Self::span(&self.ring, self.rank, &gens)
    }
}

type Grown = (Vec<Vector>, HashSet<u64>, Vec<Vector>);

fn grow(ring: &FiniteRing, codec: &Codec, start: Vec<Vector>, gens: &[Vector]) -> Result<Grown> {
    let bound = limits::enumeration_bound() as usize;
    let mut codes: HashSet<u64> = start.iter().map(|v| codec.encode(v)).collect();
    let mut elems = start;
    let mut kept = Vec::new();
    for g in gens {
        if codes.contains(&codec.encode(g)) {
            continue;
        }
        kept.push(g.clone());
        let multiples: Vec<Vector> = {
            let mut seen = HashSet::new();
            ring.elements()
                .map(|a| vscale(ring, g, a))
                .filter(|m| seen.insert(codec.encode(m)))
                .collect()
        };
        let base = elems.clone();
        for s in &base {
            for m in &multiples {
                let t = vadd(ring, s, m);
                if codes.insert(codec.encode(&t)) {
                    elems.push(t);
                    if elems.len() > bound {
                        return Err(Error::EnumerationBoundExceeded {
                            what: "module elements".into(),
                            bound: bound as u64,
                        });
                    }
                }
            }
        }
    }
    Ok((elems, codes, kept))
}

/// P = E·A^k for an idempotent E ∈ M_k(A).
#[derive(Clone)]
pub struct PresentedModule {
    ring: FiniteRing,
    proj: Mat,
    cache: Arc<OnceLock<Result<Submodule>>>,
}

impl std::fmt::Debug for PresentedModule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "PresentedModule({:?})", self.proj)
    }
}

impl PartialEq for PresentedModule {
    fn eq(&self, other: &PresentedModule) -> bool {
        self.rank() == other.rank()
            && (self.proj == other.proj
                || match (self.elements(), other.elements()) {
                    (Ok(a), Ok(b)) => a == b,
                    _ => false,
                })
    }
}

impl PresentedModule {
    pub fn new(ring: &FiniteRing, proj: Mat) -> Result<PresentedModule> {
        if !proj.is_square() {
            return Err(Error::ShapeMismatch("presentation must be square".into()));
        }
        if !proj.is_idempotent(ring) {
            return Err(Error::NotASummand(
                "presentation matrix is not idempotent".into(),
            ));
        }
        Ok(PresentedModule {
            ring: ring.clone(),
            proj,
            cache: Arc::new(OnceLock::new()),
        })
    }

    pub fn free(ring: &FiniteRing, k: usize) -> PresentedModule {
        PresentedModule {
            ring: ring.clone(),
            proj: Mat::identity(ring, k),
            cache: Arc::new(OnceLock::new()),
        }
    }

    pub fn zero(ring: &FiniteRing, k: usize) -> PresentedModule {
        PresentedModule {
            ring: ring.clone(),
            proj: Mat::zeros(k, k),
            cache: Arc::new(OnceLock::new()),
        }
    }

    pub fn ring(&self) -> &FiniteRing {
        &self.ring
    }

    pub fn rank(&self) -> usize {
        self.proj.rows
    }

    pub fn proj(&self) -> &Mat {
        &self.proj
    }

    pub fn contains(&self, v: &[crate::ring::Elem]) -> bool {
        v.len() == self.rank() && self.proj.apply(&self.ring, v) == v
    }

    /// Nonzero columns of E; they generate the module.
    pub fn generators(&self) -> Vec<Vector> {
        self.proj
            .columns()
            .into_iter()
            .filter(|c| !is_zero(c))
            .collect()
    }

    pub fn elements(&self) -> Result<&Submodule> {
        self.cache
            .get_or_init(|| Submodule::span(&self.ring, self.rank(), &self.generators()))
            .as_ref()
            .map_err(|e| e.clone())
    }

    pub fn cardinality(&self) -> Result<usize> {
        Ok(self.elements()?.len())
    }

    pub fn is_free_presentation(&self) -> bool {
        self.proj == Mat::identity(&self.ring, self.rank())
    }

    pub fn direct_sum(&self, other: &PresentedModule) -> PresentedModule {
        PresentedModule {
            ring: self.ring.clone(),
            proj: Mat::block_diag(&self.proj, &other.proj),
            cache: Arc::new(OnceLock::new()),
        }
    }

    /// Realized dual Hom(P, A) = A^{1×k}E, carried to columns by σ⁻¹: presentation σ⁻¹(E)ᵀ.
    pub fn dual(&self, ur: &UnitaryRing) -> PresentedModule {
        PresentedModule {
            ring: self.ring.clone(),
            proj: self.proj.map(|a| ur.sigma_inv(a)).transpose(),
            cache: Arc::new(OnceLock::new()),
        }
    }

    /// Whether `sub` (an idempotent whose image should lie in P) presents a summand of P.
    pub fn admits_summand(&self, sub: &Mat) -> bool {
        sub.rows == self.rank()
            && sub.is_idempotent(&self.ring)
            && self.proj.mul(&self.ring, sub) == *sub
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ring::RingSpec;
    use serde_json::json;

    fn ring(v: serde_json::Value) -> FiniteRing {
        FiniteRing::build(&RingSpec::from_json(&v).unwrap()).unwrap()
    }

    #[test]
    fn spans_and_codes() {
        let f3 = ring(json!({"residue": 3}));
        let p = PresentedModule::free(&f3, 2);
        assert_eq!(p.cardinality().unwrap(), 9);
        let line = Submodule::span(&f3, 2, &[vec![1, 2], vec![2, 1]]).unwrap();
        assert_eq!(line.len(), 3);
        assert_eq!(line.gens().len(), 1);
        assert!(line.contains(&[2, 1]));
        assert!(!line.contains(&[1, 1]));
        let c = line.codec();
        assert_eq!(c.decode(c.encode(&[2, 1])), vec![2, 1]);
    }

    #[test]
    fn idempotent_presentation() {
        let z4 = ring(json!({"residue": 4}));
        let e = Mat::from_rows(vec![vec![1, 1], vec![0, 0]]).unwrap();
        let p = PresentedModule::new(&z4, e).unwrap();
        assert_eq!(p.cardinality().unwrap(), 4);
        assert!(p.contains(&[3, 0]));
        assert!(!p.contains(&[0, 1]));
        assert!(PresentedModule::new(&z4, Mat::from_rows(vec![vec![2]]).unwrap()).is_err());
    }
}
