use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use qform::catalog;
use qform::dickson::{classify, reflection_subgroup, FactorProfile};
use qform::forms::{check_isometry, QuadraticSpace};
use qform::matrix::Mat;
use qform::oracle::{
    closure, enumerate_isometries, enumerate_maps, reflection_matrices, verify_dickson,
    verify_extension, verify_generation, verify_index,
};
use qform::reflections::{compose_orthogonal, make_reflection, QuasiReflection, ReflectionKit};
use qform::ring::{
    lambda_bounds, validate_anti_structure, validate_form_parameter, EfInverter, Elem, FiniteRing,
    UnitaryRing,
};
use qform::transforms::{conjugate, transfer};
use qform::witt::cancel;
use qform::Error;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn lib<T>(r: qform::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn spaces() -> Vec<(&'static str, QuadraticSpace)> {
    catalog::space_names()
        .map(|n| (n, catalog::space(n).expect("catalog space")))
        .collect()
}

fn unimodular_spaces(max_card: usize) -> Vec<(&'static str, QuadraticSpace)> {
    spaces()
        .into_iter()
        .filter(|(_, s)| s.is_unimodular().unwrap() && s.elements().unwrap().len() <= max_card)
        .collect()
}

/// Additive subgroup generated by `gens`, by breadth-first closure.
fn additive_subgroup(r: &FiniteRing, gens: &[Elem]) -> BTreeSet<Elem> {
    let mut set = BTreeSet::from([0]);
    let mut frontier = vec![0];
    while let Some(x) = frontier.pop() {
        for &g in gens {
            let y = r.add(x, g);
            if set.insert(y) {
                frontier.push(y);
            }
        }
    }
    set
}

fn criterion_1() -> Outcome {
    let mut rings = 0;
    for name in catalog::ring_names() {
        let ur = lib(catalog::ring(name))?;
        let r = ur.ring();
        let anti = ur.anti();
        ensure(validate_anti_structure(r, &anti).is_valid(), || {
            format!("{name}: anti-structure rejected")
        })?;
        ensure(
            validate_form_parameter(r, &anti, ur.lambda()).is_valid(),
            || format!("{name}: form parameter rejected"),
        )?;
        let s = |a: Elem| ur.sigma(a);
        let u = ur.u();
        let uinv = r.inv(u).ok_or(format!("{name}: u not a unit"))?;
        for a in r.elements() {
            ensure(s(s(a)) == r.mul3(u, a, uinv), || {
                format!("{name}: σσ ≠ conj by u")
            })?;
            for b in r.elements() {
                ensure(s(r.add(a, b)) == r.add(s(a), s(b)), || {
                    format!("{name}: σ not additive")
                })?;
                ensure(s(r.mul(a, b)) == r.mul(s(b), s(a)), || {
                    format!("{name}: σ not anti-multiplicative")
                })?;
            }
        }
        ensure(r.mul(s(u), u) == r.one(), || format!("{name}: u^σ u ≠ 1"))?;
        let min_gens: Vec<Elem> = r.elements().map(|a| r.sub(a, r.mul(s(a), u))).collect();
        let min = additive_subgroup(r, &min_gens);
        let max: BTreeSet<Elem> = r
            .elements()
            .filter(|&a| r.add(a, r.mul(s(a), u)) == 0)
            .collect();
        let (lmin, lmax) = lambda_bounds(r, &anti);
        ensure(lmin.iter().copied().collect::<BTreeSet<_>>() == min, || {
            format!("{name}: Λmin differs")
        })?;
        ensure(lmax.iter().copied().collect::<BTreeSet<_>>() == max, || {
            format!("{name}: Λmax differs")
        })?;
        let lam: BTreeSet<Elem> = ur.lambda().iter().copied().collect();
        ensure(min.is_subset(&lam) && lam.is_subset(&max), || {
            format!("{name}: Λ outside bounds")
        })?;
        rings += 1;
    }
    Ok(format!("{rings} catalog rings"))
}

/// (e,f)-invertibility by search: a ∈ eAf and some b ∈ fAe with ab = e, ba = f.
fn ef_invertible(r: &FiniteRing, a: Elem, e: Elem, f: Elem) -> bool {
    r.mul3(e, a, f) == a
        && r.elements()
            .any(|b| r.mul3(f, b, e) == b && r.mul(a, b) == e && r.mul(b, a) == f)
}

fn criterion_2() -> Outcome {
    let mut triples = 0usize;
    let mut rings = 0;
    for name in catalog::ring_names() {
        let ur = lib(catalog::ring(name))?;
        let r = ur.ring();
        if r.size() > 256 {
            continue;
        }
        let d = lib(ur.decomposition())?;
        let q = &d.quotient;
        let idem = r.idempotents();
        for &e in &idem {
            for &f in &idem {
                let inv = EfInverter::new(r, e, f);
                let (eb, fb) = (d.reduce(e), d.reduce(f));
                for &a in inv.domain() {
                    let upstairs = ef_invertible(r, a, e, f);
                    let downstairs = ef_invertible(q, d.reduce(a), eb, fb);
                    ensure(upstairs == downstairs, || {
                        format!("{name}: mismatch at a={a} e={e} f={f}")
                    })?;
                    ensure(inv.inverse(a).is_some() == upstairs, || {
                        format!("{name}: library disagrees at a={a} e={e} f={f}")
                    })?;
                    triples += 1;
                }
            }
        }
        rings += 1;
    }
    Ok(format!(
        "{triples} triples over {rings} rings, 0 mismatches"
    ))
}

fn agree_on(
    points: &[Vec<Elem>],
    f: impl Fn(&[Elem]) -> Vec<Elem>,
    g: impl Fn(&[Elem]) -> Vec<Elem>,
) -> bool {
    points.iter().all(|x| f(x) == g(x))
}

fn criterion_3() -> Outcome {
    let (mut total, mut reindexed, mut composed) = (0usize, 0usize, 0usize);
    for (name, space) in spaces() {
        let p = lib(space.elements())?;
        if p.len() > 729 {
            continue;
        }
        let r = space.ring();
        let ur = space.ur();
        let pts = p.elements();
        let idem: Vec<Elem> = r.idempotents().into_iter().filter(|&e| e != 0).collect();
        let mut by_e: Vec<(Elem, Vec<QuasiReflection>)> = Vec::new();
        for &e in &idem {
            let refl = ReflectionKit::new(&space, e).all(&space, p);
            for s in &refl {
                total += 1;
                ensure(lib(check_isometry(&s.matrix(), &space, &space))?, || {
                    format!("{name}: {} is not an isometry", s.to_json())
                })?;
                let c2 = r.mul(ur.sigma(s.c), ur.u());
                let inv = lib(make_reflection(&space, s.y.clone(), e, c2))?;
                ensure(
                    agree_on(pts, |x| s.apply(&inv.apply(x)), |x| x.to_vec()),
                    || format!("{name}: inverse law fails for {}", s.to_json()),
                )?;
                for &f in &idem {
                    let ef = EfInverter::new(r, e, f);
                    let Some(&a) = ef
                        .domain()
                        .iter()
                        .find(|&&a| a != e && ef.inverse(a).is_some())
                    else {
                        continue;
                    };
                    let t = lib(s.reindex(a, f))?;
                    ensure(agree_on(pts, |x| t.apply(x), |x| s.apply(x)), || {
                        format!("{name}: reindex by ({a},{f}) changes {}", s.to_json())
                    })?;
                    reindexed += 1;
                }
            }
            by_e.push((e, refl));
        }
        for (e, re) in &by_e {
            for (f, rf) in &by_e {
                if r.mul(*e, *f) != 0 || r.mul(*f, *e) != 0 {
                    continue;
                }
                for a in re.iter().take(12) {
                    for b in rf.iter().take(12) {
                        let ab = lib(compose_orthogonal(a, b))?;
                        ensure(
                            agree_on(pts, |x| ab.apply(x), |x| a.apply(&b.apply(x))),
                            || format!("{name}: composition law fails"),
                        )?;
                        composed += 1;
                    }
                }
            }
        }
    }
    ensure(total >= 500, || {
        format!("only {total} reflections generated")
    })?;
    Ok(format!(
        "{total} quasi-reflections, {reindexed} reindexings, {composed} orthogonal compositions"
    ))
}

fn criterion_4() -> Outcome {
    let mut summary = Vec::new();
    let (mut maps, mut n) = (0, 0);
    for (name, space) in unimodular_spaces(729) {
        if space.rank() > 3 {
            continue;
        }
        let t = Instant::now();
        let v = lib(verify_extension(&space))?;
        ensure(v.passed(), || format!("{name}: {:?}", v.failures.first()))?;
        maps += v.maps;
        n += 1;
        summary.push(format!(
            "{name} {}/{} in {:.1?}",
            v.witt_i,
            v.augmented,
            t.elapsed()
        ));
    }
    Ok(format!(
        "{n} spaces, {maps} extensions (witt-I/augmented: {})",
        summary.join(", ")
    ))
}

fn criterion_5() -> Outcome {
    let all = spaces();
    let (mut triples, mut checked) = (0, 0);
    for (bn, base) in &all {
        if !base.is_unimodular().unwrap() || base.rank() > 2 {
            continue;
        }
        for (n1, s1) in &all {
            for (n2, s2) in &all {
                if !s1.ur().same(base.ur())
                    || !s2.ur().same(base.ur())
                    || s1.rank() != s2.rank()
                    || s1.rank() + base.rank() > 3
                {
                    continue;
                }
                let z1 = lib(base.orthogonal_sum(s1))?;
                let z2 = lib(base.orthogonal_sum(s2))?;
                if z1.elements().unwrap().len() > 729 {
                    continue;
                }
                let isos = lib(enumerate_maps(&z1, &z2))?;
                if isos.is_empty() {
                    continue;
                }
                triples += 1;
                for iso in &isos {
                    let m = lib(cancel(base, s1, s2, iso))?;
                    ensure(lib(check_isometry(&m, s1, s2))?, || {
                        format!("{bn} ⊥ {n1} ≅ {bn} ⊥ {n2}: cancel returned a non-isometry")
                    })?;
                    checked += 1;
                }
            }
        }
    }
    ensure(triples > 0, || "no isometric triples".into())?;
    Ok(format!(
        "{triples} triples, {checked} cancellations verified"
    ))
}

fn criterion_6() -> Outcome {
    let mut covered = Vec::new();
    for (name, space) in unimodular_spaces(usize::MAX) {
        let v = lib(verify_generation(&space))?;
        if v.hypothesis_violation.is_some() {
            continue;
        }
        ensure(v.generated(), || {
            format!(
                "{name}: quasi-reflections generate {} of {}",
                v.closure_order, v.group_order
            )
        })?;
        covered.push(format!("{name} |O|={}", v.group_order));
    }
    ensure(!covered.is_empty(), || {
        "no space satisfies the hypotheses".into()
    })?;
    Ok(covered.join(", "))
}

fn criterion_7() -> Outcome {
    let (mut n, mut refl, mut group) = (0, 0, 0);
    for (name, space) in unimodular_spaces(usize::MAX) {
        let v = lib(verify_dickson(&space))?;
        ensure(v.homomorphism, || format!("{name}: Δ_I not additive"))?;
        ensure(v.surjective, || format!("{name}: Δ_I not onto"))?;
        ensure(v.failures.is_empty(), || {
            format!("{name}: {}", v.failures[0])
        })?;
        n += 1;
        refl += v.reflections;
        group += v.group_order;
    }
    let non_split = spaces().iter().any(|(_, s)| {
        classify(s.ur())
            .unwrap()
            .iter()
            .any(|p| p.orthogonal && !p.split_orthogonal)
    });
    Ok(format!(
        "{n} spaces, {group} isometries, {refl} reflections; non-split orthogonal factor present: {non_split} (Δ ≡ 0 case untested)"
    ))
}

const INDEX_CASES: [(&str, u64); 4] = [
    ("f3_plane", 1),
    ("f3xf3_line", 2),
    ("m2f2_hyperbolic", 2),
    ("m2f2_anisotropic", 2),
];

fn criterion_8() -> Outcome {
    let mut out = Vec::new();
    for (name, expected) in INDEX_CASES {
        let space = lib(catalog::space(name))?;
        let predicted = lib(reflection_subgroup(&space))?.predicted_index;
        let v = lib(verify_index(&space))?;
        ensure(
            predicted == Some(expected) && v.measured_index == expected,
            || {
                format!(
                    "{name}: predicted {predicted:?}, measured {}, expected {expected}",
                    v.measured_index
                )
            },
        )?;
        out.push(format!("{name} [O:O′]={}", v.measured_index));
    }
    Ok(out.join(", "))
}

fn criterion_9() -> Outcome {
    for (name, _) in INDEX_CASES {
        let v = lib(verify_index(&lib(catalog::space(name))?))?;
        ensure(v.kernel_matches, || format!("{name}: O′ ≠ Δ_I⁻¹{{0, ξ}}"))?;
    }
    Ok(format!("{} instances", INDEX_CASES.len()))
}

fn criterion_10() -> Outcome {
    let ur = lib(catalog::ring("f2_min"))?;
    let (mut unimodular, mut exceptional) = (0, 0);
    for code in 0u32..1 << 10 {
        let mut gram = Mat::zeros(4, 4);
        let mut bit = 0;
        for i in 0..4 {
            for j in i..4 {
                gram.set(i, j, (code >> bit) & 1);
                bit += 1;
            }
        }
        let space = lib(QuadraticSpace::free(&ur, gram))?;
        if !lib(space.is_unimodular())? {
            continue;
        }
        unimodular += 1;
        let o = lib(enumerate_isometries(&space))?;
        let sub = lib(closure(&space, &lib(reflection_matrices(&space))?))?;
        let proper = sub.order() < o.order();
        match reflection_subgroup(&space) {
            Err(Error::HypothesisViolation { .. }) => {
                ensure(proper, || {
                    format!("gram code {code}: flagged but generated")
                })?;
                exceptional += 1;
            }
            Ok(rep) => {
                ensure(!proper, || {
                    format!("gram code {code}: proper closure not flagged")
                })?;
                ensure(rep.predicted_index == Some(1), || {
                    format!("gram code {code}: predicted {:?}", rep.predicted_index)
                })?;
            }
            Err(e) => return Err(e.to_string()),
        }
    }
    ensure(exceptional > 0, || "no exceptional form found".into())?;
    Ok(format!(
        "{unimodular} unimodular forms, {exceptional} with closure ⊊ O, all reported as HypothesisViolation"
    ))
}

fn invariants(p: &[FactorProfile]) -> Vec<(bool, bool, bool)> {
    p.iter()
        .map(|f| (f.exchange, f.orthogonal, f.split_orthogonal))
        .collect()
}

fn full_symmetric_idempotents(ur: &UnitaryRing) -> Vec<Elem> {
    ur.ring()
        .idempotents()
        .into_iter()
        .filter(|&e| e != 0 && transfer(ur, e).is_ok())
        .collect()
}

fn criterion_11() -> Outcome {
    let mut checks = 0;
    for name in catalog::ring_names() {
        let ur = lib(catalog::ring(name))?;
        let base = invariants(&lib(classify(&ur))?);
        for e in full_symmetric_idempotents(&ur) {
            let t = lib(transfer(&ur, e))?;
            let corner = t.target();
            ensure(invariants(&lib(classify(corner))?) == base, || {
                format!("{name}: classification changes under transfer by {e}")
            })?;
            for v in corner.ring().units() {
                let c = lib(conjugate(corner, v))?;
                ensure(invariants(&lib(classify(c.target()))?) == base, || {
                    format!("{name}: classification changes under conjugation by {v} after transfer by {e}")
                })?;
                checks += 1;
            }
        }
    }
    for (name, space) in spaces() {
        let ur = space.ur();
        let zero = space.is_class_zero();
        let uni = lib(space.is_unimodular())?;
        for e in full_symmetric_idempotents(ur) {
            let t = lib(transfer(ur, e))?;
            let te = lib(t.map_space(&space))?;
            ensure(te.is_class_zero() == zero, || {
                format!("{name}: [β]=0 not preserved by transfer {e}")
            })?;
            ensure(lib(te.is_unimodular())? == uni, || {
                format!("{name}: unimodularity not preserved by transfer {e}")
            })?;
            let back = lib(t.pull_back(&space, te.gram()))?;
            ensure(lib(back.classes_equal(&space))?, || {
                format!("{name}: transfer round trip changes the class")
            })?;
            checks += 1;
        }
        for v in ur.ring().units() {
            let c = lib(conjugate(ur, v))?;
            let cs = lib(c.map_space(&space))?;
            ensure(cs.is_class_zero() == zero, || {
                format!("{name}: [β]=0 not preserved by conjugation {v}")
            })?;
            ensure(lib(cs.is_unimodular())? == uni, || {
                format!("{name}: unimodularity not preserved by conjugation {v}")
            })?;
            let back = lib(lib(c.inverse())?.map_space(&cs))?;
            ensure(lib(back.classes_equal(&space))?, || {
                format!("{name}: conjugation round trip changes the class")
            })?;
            checks += 1;
        }
    }
    Ok(format!("{checks} transfer/conjugation checks"))
}

fn main() {
    let criteria: [Criterion; 11] = [
        ("axioms and form parameter bounds", criterion_1),
        ("(e,f)-invertibility modulo the radical", criterion_2),
        ("quasi-reflection calculus", criterion_3),
        ("isometry extension", criterion_4),
        ("cancellation", criterion_5),
        ("generation by quasi-reflections", criterion_6),
        ("Dickson invariant", criterion_7),
        ("index of the reflection subgroup", criterion_8),
        ("reflection subgroup as a Dickson kernel", criterion_9),
        ("rank-4 exception over F_2", criterion_10),
        ("transfer and conjugation coherence", criterion_11),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    for (i, (title, run)) in criteria.iter().enumerate() {
        let id = format!("criterion_{:02}", i + 1);
        if !filter.is_empty()
            && !filter
                .iter()
                .any(|f| id.contains(f.as_str()) || title.contains(f.as_str()))
        {
            continue;
        }
        let t = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let elapsed = t.elapsed();
        match outcome {
            Ok(detail) => println!("{id} PASS {title}: {detail} [{elapsed:.2?}]"),
            Err(why) => {
                failed += 1;
                println!("{id} FAIL {title}: {why} [{elapsed:.2?}]");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
