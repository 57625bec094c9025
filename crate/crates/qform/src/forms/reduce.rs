use crate::error::Result;
use crate::matrix::{Mat, Vector};
use crate::ring::{Decomposition, Elem};
use crate::transforms::{transfer, ConjugationMap, TransferMap};

use super::module::PresentedModule;
use super::space::QuadraticSpace;

/// (P_i, [β_i]) over A_i and its corner (P_(i), [β_(i)]) over A_(i).
#[derive(Clone, Debug)]
pub struct FactorComponent {
    pub index: usize,
    pub space: QuadraticSpace,
    /// (P_i, [v_i β_i]) over the standardized factor.
    pub standard: QuadraticSpace,
    pub corner: QuadraticSpace,
    pub to_corner: TransferMap,
}

#[derive(Clone, Debug)]
pub struct Reduction {
    pub reduced: QuadraticSpace,
    pub factors: Vec<FactorComponent>,
}

fn map_entries(m: &Mat, f: impl Fn(Elem) -> Elem) -> Mat {
    m.map(f)
}

/// π_i applied coordinatewise, in A_i coordinates.
pub fn project_vector(d: &Decomposition, i: usize, v: &[Elem]) -> Vector {
    v.iter().map(|&a| d.component(i, d.reduce(a))).collect()
}

pub fn project_element(d: &Decomposition, i: usize, a: Elem) -> Elem {
    d.component(i, d.reduce(a))
}

pub fn reduce_mod_radical(s: &QuadraticSpace) -> Result<Reduction> {
    let ur = s.ur();
    let d = ur.decomposition()?;
    let bar_ring = d.bar.ring();
    let reduced = QuadraticSpace::new(
        &d.bar,
        PresentedModule::new(bar_ring, map_entries(s.module().proj(), |a| d.reduce(a)))?,
        map_entries(s.gram(), |a| d.reduce(a)),
    )?;
    let mut factors = Vec::with_capacity(d.factors.len());
    for (i, f) in d.factors.iter().enumerate() {
        let fr = f.ring.ring();
        let space = QuadraticSpace::new(
            &f.ring,
            PresentedModule::new(
                fr,
                map_entries(s.module().proj(), |a| project_element(d, i, a)),
            )?,
            map_entries(s.gram(), |a| project_element(d, i, a)),
        )?;
        let standard =
            ConjugationMap::onto(&f.ring, f.conjugator, &f.standard).map_space(&space)?;
        let to_corner = transfer(&f.standard, f.epsilon())?;
        let corner = to_corner.map_space(&standard)?;
        factors.push(FactorComponent {
            index: i,
            space,
            standard,
            corner,
            to_corner,
        });
    }
    Ok(Reduction { reduced, factors })
}
