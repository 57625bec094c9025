use std::collections::{HashMap, HashSet};

use crate::error::{Error, Result};
use crate::forms::{QuadraticSpace, Submodule};
use crate::matrix::{vscale, vsub, Mat, Vector};
use crate::reflections::{
    apply_product, distinct_multiples, one_step, two_step, QuasiReflection, ReflectionKit,
};

use super::conditions::{nonzero, FactorView};

/// Reflections in V1 (outermost first) sending x to y, both in P·e.
pub(crate) fn extend_cyclic(
    space: &QuadraticSpace,
    kit: &ReflectionKit,
    view: &FactorView,
    x: &[u32],
    y: &[u32],
    v1: &Submodule,
) -> Result<Vec<QuasiReflection>> {
    if x == y {
        return Ok(Vec::new());
    }
    let direct = |from: &[u32]| -> Option<Vec<QuasiReflection>> {
        if let Some(s) = one_step(space, kit, from, y, Some(v1)) {
            return Some(vec![s]);
        }
        two_step(space, kit, from, y, v1)
    };
    if let Some(steps) = direct(x) {
        return Ok(steps);
    }
    // Detour through states reachable by at most two e-reflections.
    let refl = kit.all(space, v1);
    let target_bar: Vector = y.iter().map(|&a| view.pi(a)).collect();
    let mut seen: HashSet<Vector> = HashSet::from([x.to_vec()]);
    let mut frontier: Vec<(Vector, Vec<QuasiReflection>)> = vec![(x.to_vec(), Vec::new())];
    for depth in 1..=2 {
        let mut next = Vec::new();
        for (state, path) in &frontier {
            for s in &refl {
                let st = s.apply(state);
                if !seen.insert(st.clone()) {
                    continue;
                }
                let mut p = vec![s.clone()];
                p.extend(path.iter().cloned());
                let reduced_match =
                    st.iter().map(|&a| view.pi(a)).collect::<Vector>() == target_bar;
                if depth == 1 || reduced_match {
                    if let Some(mut steps) = direct(&st) {
                        steps.extend(p.iter().cloned());
                        return Ok(steps);
                    }
                }
                next.push((st, p));
            }
        }
        frontier = next;
    }
    Err(Error::SearchExhausted(format!(
        "no reflection product found in factor {}",
        view.i
    )))
}

fn orbit_size(space: &QuadraticSpace, x: &[u32]) -> usize {
    let r = space.ring();
    r.elements()
        .map(|a| vscale(r, x, a))
        .collect::<HashSet<_>>()
        .len()
}

fn ideal_size(space: &QuadraticSpace, e: u32) -> usize {
    let r = space.ring();
    r.elements()
        .map(|a| r.mul(e, a))
        .collect::<HashSet<_>>()
        .len()
}

struct Split {
    v1: Submodule,
    ok: bool,
    outer: Option<Result<Vec<QuasiReflection>>>,
}

/// Reflections w.r.t. V, outermost first, whose product agrees with ψ on Q.
pub(crate) fn induct(
    space: &QuadraticSpace,
    q: &Submodule,
    psi: &Mat,
    v: &Submodule,
) -> Result<Vec<QuasiReflection>> {
    if q.is_zero() {
        return Ok(Vec::new());
    }
    let r = space.ring();
    let d = space.ur().decomposition()?;
    let mut last = Error::SearchExhausted("no admissible splitting of Q".into());
    for i in 0..d.factors.len() {
        let view = FactorView::new(space, i)?;
        if !view.touches(q.gens()) {
            continue;
        }
        let e = d.factors[i].e();
        let kit = ReflectionKit::new(space, e);
        // Cyclic summands of the shape e_iA first, then any other cyclic pieces.
        let full = ideal_size(space, e);
        let mut xs: Vec<(usize, Vector)> = distinct_multiples(space, q, e)
            .into_iter()
            .filter(|x| nonzero(x))
            .map(|x| (orbit_size(space, &x), x))
            .collect();
        xs.sort_by_key(|(n, _)| usize::from(*n != full));
        let ws: Vec<Vector> = distinct_multiples(space, v, e)
            .into_iter()
            .filter(|w| nonzero(w))
            .collect();
        let mut splits: HashMap<Vec<Vector>, Split> = HashMap::new();
        // Splittings meeting the factor conditions on V₁ first; the rest only if those fail.
        for pass in [true, false] {
            for (orbit, x) in &xs {
                for w in &ws {
                    let c = space.h(w, x);
                    if *orbit == full {
                        if kit.inverse(c).is_none() {
                            continue;
                        }
                    } else if orbit_size(space, &[c]) != *orbit {
                        continue;
                    }
                    let q2 = q.filter(|p| space.h(w, p) == 0)?;
                    if q2.len() * orbit != q.len() {
                        continue;
                    }
                    let key = q2.elements().to_vec();
                    if !splits.contains_key(&key) {
                        let v1 = v.filter(|p| q2.gens().iter().all(|g| space.h(p, g) == 0))?;
                        let ok = view.restriction_nonzero(std::slice::from_ref(x), &v1)
                            && view.radical_nonzero(&v1)?
                            && view.obstruction(&v1)?.is_none();
                        splits.insert(
                            key.clone(),
                            Split {
                                v1,
                                ok,
                                outer: None,
                            },
                        );
                    }
                    let split = splits.get_mut(&key).expect("just inserted");
                    if split.ok != pass {
                        continue;
                    }
                    if split.outer.is_none() {
                        split.outer = Some(induct(space, &q2, psi, v));
                    }
                    let mut outer = match split.outer.clone().expect("computed") {
                        Ok(f) => f,
                        Err(err) => {
                            last = err;
                            continue;
                        }
                    };
                    // y′ = φ″⁻¹(ψx): undo the outer product one reflection at a time.
                    let mut target = psi.apply(r, x);
                    for s in &outer {
                        target = s.inverse().apply(&target);
                    }
                    if !split.v1.contains(&vsub(r, &target, x)) {
                        last = Error::SearchExhausted("ψx − x left V₁".into());
                        continue;
                    }
                    match extend_cyclic(space, &kit, &view, x, &target, &split.v1) {
                        Ok(inner) => {
                            outer.extend(inner);
                            debug_assert_eq!(apply_product(&outer, x), psi.apply(r, x));
                            return Ok(outer);
                        }
                        Err(err) => last = err,
                    }
                }
            }
        }
    }
    Err(last)
}
