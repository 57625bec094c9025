use std::fmt;
use std::sync::{Arc, OnceLock};

use serde::Serialize;
use serde_json::{json, Value};

use super::factor::Decomposition;
use super::finite::{additive_closure, additive_span_generators, Elem, FiniteRing, RingSpec};
use crate::error::{Error, Result};

/// Structural description of an anti-automorphism.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SigmaRule {
    Identity,
    /// Transpose of a matrix ring, applying the inner rule entrywise.
    Transpose(Box<SigmaRule>),
    /// Swap of the two factors of a product.
    Exchange,
    Componentwise(Vec<SigmaRule>),
    /// Coefficientwise on a truncated polynomial ring, t fixed.
    Coefficientwise(Box<SigmaRule>),
    Opposite(Box<SigmaRule>),
    /// x ↦ x^(p^j) on a field.
    Frobenius(u32),
    /// Explicit images of the elements in canonical order.
    Map(Vec<Value>),
    /// a ↦ v a^σ v⁻¹
    Conjugate {
        by: Value,
        inner: Box<SigmaRule>,
    },
}

impl SigmaRule {
    pub fn from_json(v: &Value) -> Result<SigmaRule> {
        let bad = |m: &str| Error::MalformedSpec(format!("sigma rule: {m}"));
        if let Some(s) = v.as_str() {
            return match s {
                "identity" | "id" => Ok(SigmaRule::Identity),
                "transpose" => Ok(SigmaRule::Transpose(Box::new(SigmaRule::Identity))),
                "exchange" => Ok(SigmaRule::Exchange),
                other => Err(bad(&format!("unknown rule {other:?}"))),
            };
        }
        let obj = v
            .as_object()
            .ok_or_else(|| bad("expected string or object"))?;
        if obj.len() != 1 {
            return Err(bad("object must have exactly one key"));
        }
        let (key, body) = obj.iter().next().unwrap();
        match key.as_str() {
            "transpose" => Ok(SigmaRule::Transpose(Box::new(SigmaRule::from_json(body)?))),
            "componentwise" => Ok(SigmaRule::Componentwise(
                body.as_array()
                    .ok_or_else(|| bad("componentwise needs an array"))?
                    .iter()
                    .map(SigmaRule::from_json)
                    .collect::<Result<Vec<_>>>()?,
            )),
            "coefficientwise" => Ok(SigmaRule::Coefficientwise(Box::new(SigmaRule::from_json(
                body,
            )?))),
            "opposite" => Ok(SigmaRule::Opposite(Box::new(SigmaRule::from_json(body)?))),
            "frobenius" => Ok(SigmaRule::Frobenius(
                body.as_u64()
                    .ok_or_else(|| bad("frobenius needs an exponent"))? as u32,
            )),
            "map" => Ok(SigmaRule::Map(
                body.as_array()
                    .ok_or_else(|| bad("map needs an array"))?
                    .clone(),
            )),
            "conjugate" => {
                let by = body
                    .get("by")
                    .ok_or_else(|| bad("conjugate needs by"))?
                    .clone();
                let inner = body
                    .get("sigma")
                    .ok_or_else(|| bad("conjugate needs sigma"))?;
                Ok(SigmaRule::Conjugate {
                    by,
                    inner: Box::new(SigmaRule::from_json(inner)?),
                })
            }
            other => Err(bad(&format!("unknown rule {other:?}"))),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            SigmaRule::Identity => json!("identity"),
            SigmaRule::Transpose(inner) if **inner == SigmaRule::Identity => json!("transpose"),
            SigmaRule::Transpose(inner) => json!({ "transpose": inner.to_json() }),
            SigmaRule::Exchange => json!("exchange"),
            SigmaRule::Componentwise(rs) => {
                json!({ "componentwise": rs.iter().map(|r| r.to_json()).collect::<Vec<_>>() })
            }
            SigmaRule::Coefficientwise(r) => json!({ "coefficientwise": r.to_json() }),
            SigmaRule::Opposite(r) => json!({ "opposite": r.to_json() }),
            SigmaRule::Frobenius(j) => json!({ "frobenius": j }),
            SigmaRule::Map(v) => json!({ "map": v }),
            SigmaRule::Conjugate { by, inner } => {
                json!({ "conjugate": { "by": by, "sigma": inner.to_json() } })
            }
        }
    }

    /// Evaluates the rule to a table over the ring's canonical elements.
    pub fn table(&self, ring: &FiniteRing) -> Result<Vec<Elem>> {
        let bad = |m: &str| Error::MalformedSpec(format!("sigma rule on {}: {m}", ring.label()));
        match self {
            SigmaRule::Identity => Ok(ring.elements().collect()),
            SigmaRule::Transpose(inner) => {
                let (n, base) = ring
                    .matrix_shape()
                    .ok_or_else(|| bad("transpose needs a matrix ring"))?;
                let t = inner.table(base)?;
                Ok(ring
                    .elements()
                    .map(|a| {
                        let d = ring.coords(a);
                        let mut out = vec![0; n * n];
                        for i in 0..n {
                            for j in 0..n {
                                out[i * n + j] = t[d[j * n + i] as usize];
                            }
                        }
                        ring.from_coords(&out)
                    })
                    .collect())
            }
            SigmaRule::Exchange => {
                let parts = ring
                    .product_parts()
                    .ok_or_else(|| bad("exchange needs a product"))?;
                if parts.len() != 2 || parts[0].size() != parts[1].size() {
                    return Err(bad("exchange needs two factors of equal size"));
                }
                Ok(ring
                    .elements()
                    .map(|a| {
                        let d = ring.coords(a);
                        ring.from_coords(&[d[1], d[0]])
                    })
                    .collect())
            }
            SigmaRule::Componentwise(rules) => {
                let parts = ring
                    .product_parts()
                    .ok_or_else(|| bad("componentwise needs a product"))?;
                if parts.len() != rules.len() {
                    return Err(bad("one rule per factor required"));
                }
                let tables = rules
                    .iter()
                    .zip(parts)
                    .map(|(r, p)| r.table(p))
                    .collect::<Result<Vec<_>>>()?;
                Ok(ring
                    .elements()
                    .map(|a| {
                        let d: Vec<Elem> = ring
                            .coords(a)
                            .iter()
                            .zip(&tables)
                            .map(|(&x, t)| t[x as usize])
                            .collect();
                        ring.from_coords(&d)
                    })
                    .collect())
            }
            SigmaRule::Coefficientwise(inner) => {
                let (_, base) = ring
                    .truncated_shape()
                    .ok_or_else(|| bad("coefficientwise needs a truncated polynomial ring"))?;
                let t = inner.table(base)?;
                Ok(ring
                    .elements()
                    .map(|a| {
                        let d: Vec<Elem> = ring.coords(a).iter().map(|&x| t[x as usize]).collect();
                        ring.from_coords(&d)
                    })
                    .collect())
            }
            SigmaRule::Opposite(inner) => {
                let base = ring
                    .opposite_base()
                    .ok_or_else(|| bad("opposite rule needs an opposite ring"))?;
                inner.table(base)
            }
            SigmaRule::Frobenius(j) => {
                let (p, _) = ring
                    .field_shape()
                    .ok_or_else(|| bad("frobenius needs a field"))?;
                let exp = (p as u64).pow(*j);
                Ok(ring
                    .elements()
                    .map(|a| {
                        let mut acc = ring.one();
                        for _ in 0..exp {
                            acc = ring.mul(acc, a);
                        }
                        acc
                    })
                    .collect())
            }
            SigmaRule::Map(images) => {
                if images.len() != ring.size() {
                    return Err(bad("map must list one image per element"));
                }
                images.iter().map(|v| ring.parse_literal(v)).collect()
            }
            SigmaRule::Conjugate { by, inner } => {
                let v = ring.parse_literal(by)?;
                let vinv = ring.inv(v).ok_or(Error::NotAUnit)?;
                let t = inner.table(ring)?;
                Ok(ring
                    .elements()
                    .map(|a| ring.mul3(v, t[a as usize], vinv))
                    .collect())
            }
        }
    }
}

/// σ as a table together with the unit u.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AntiStructure {
    pub sigma: Vec<Elem>,
    pub u: Elem,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Violation {
    pub axiom: String,
    pub witness: Vec<Value>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, ring: &FiniteRing, axiom: &str, witness: &[Elem]) {
        self.violations.push(Violation {
            axiom: axiom.to_string(),
            witness: witness.iter().map(|&a| ring.literal(a)).collect(),
        });
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "valid");
        }
        let parts: Vec<String> = self
            .violations
            .iter()
            .map(|v| {
                let w: Vec<String> = v.witness.iter().map(|x| x.to_string()).collect();
                format!("{} (witness {})", v.axiom, w.join(", "))
            })
            .collect();
        write!(f, "{}", parts.join("; "))
    }
}

pub fn validate_anti_structure(ring: &FiniteRing, anti: &AntiStructure) -> ValidationReport {
    let mut report = ValidationReport::default();
    let n = ring.size();
    let s = &anti.sigma;
    if s.len() != n || s.iter().any(|&x| x as usize >= n) {
        report.push(ring, "sigma is total on the ring", &[]);
        return report;
    }
    let mut seen = vec![false; n];
    for &x in s {
        seen[x as usize] = true;
    }
    if let Some(missing) = seen.iter().position(|&b| !b) {
        report.push(ring, "sigma is bijective", &[missing as Elem]);
    }
    let gens = ring.additive_generators();
    'add: for a in ring.elements() {
        for &g in gens {
            if s[ring.add(a, g) as usize] != ring.add(s[a as usize], s[g as usize]) {
                report.push(ring, "sigma is additive", &[a, g]);
                break 'add;
            }
        }
    }
    'mul: for &a in gens {
        for &b in gens {
            if s[ring.mul(a, b) as usize] != ring.mul(s[b as usize], s[a as usize]) {
                report.push(ring, "sigma is anti-multiplicative", &[a, b]);
                break 'mul;
            }
        }
    }
    let u = anti.u;
    if u as usize >= n {
        report.push(ring, "u lies in the ring", &[]);
        return report;
    }
    match ring.inv(u) {
        None => report.push(ring, "u is a unit", &[u]),
        Some(uinv) => {
            if ring.mul(s[u as usize], u) != ring.one() {
                report.push(ring, "u^sigma u = 1", &[u]);
            }
            if let Some(a) = ring
                .elements()
                .find(|&a| s[s[a as usize] as usize] != ring.mul3(u, a, uinv))
            {
                report.push(ring, "a^(sigma sigma) = u a u^-1", &[a]);
            }
        }
    }
    report
}

/// (Λ^min, Λ^max), each sorted.
pub fn lambda_bounds(ring: &FiniteRing, anti: &AntiStructure) -> (Vec<Elem>, Vec<Elem>) {
    let s = &anti.sigma;
    let mut min: Vec<Elem> = ring
        .elements()
        .map(|a| ring.sub(a, ring.mul(s[a as usize], anti.u)))
        .collect();
    min.sort_unstable();
    min.dedup();
    let max: Vec<Elem> = ring
        .elements()
        .filter(|&a| ring.mul(s[a as usize], anti.u) == ring.neg(a))
        .collect();
    (min, max)
}

pub fn validate_form_parameter(
    ring: &FiniteRing,
    anti: &AntiStructure,
    lambda: &[Elem],
) -> ValidationReport {
    let mut report = ValidationReport::default();
    let mut set = lambda.to_vec();
    set.sort_unstable();
    set.dedup();
    let mut member = vec![false; ring.size()];
    for &x in &set {
        member[x as usize] = true;
    }
    let closure = additive_closure(ring, &set);
    if closure != set {
        let w = closure
            .iter()
            .find(|&&x| !member[x as usize])
            .copied()
            .unwrap_or(0);
        report.push(ring, "lambda is an additive subgroup", &[w]);
    }
    let (min, max) = lambda_bounds(ring, anti);
    if let Some(&w) = min.iter().find(|&&x| !member[x as usize]) {
        report.push(ring, "lambda contains lambda_min", &[w]);
    }
    let mut in_max = vec![false; ring.size()];
    for &x in &max {
        in_max[x as usize] = true;
    }
    if let Some(&w) = set.iter().find(|&&x| !in_max[x as usize]) {
        report.push(ring, "lambda is contained in lambda_max", &[w]);
    }
    let gens = additive_span_generators(ring, &set);
    'outer: for a in ring.elements() {
        for &l in &gens {
            let x = ring.mul3(anti.sigma[a as usize], l, a);
            if !member[x as usize] {
                report.push(ring, "a^sigma lambda a lies in lambda", &[a, l]);
                break 'outer;
            }
        }
    }
    report
}

/// Which form parameter to use.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LambdaSpec {
    Min,
    Max,
    Generators(Vec<Elem>),
}

struct UnitaryInner {
    ring: FiniteRing,
    sigma: Vec<Elem>,
    sigma_inv: Vec<Elem>,
    u: Elem,
    u_inv: Elem,
    lambda_gens: Vec<Elem>,
    lambda: Vec<Elem>,
    in_lambda: Vec<bool>,
    coset_rep: Vec<Elem>,
    source: Option<Value>,
    decomposition: OnceLock<Result<Decomposition>>,
}

/// (A, σ, u, Λ), validated at construction. Cheap to clone.
#[derive(Clone)]
pub struct UnitaryRing(Arc<UnitaryInner>);

impl fmt::Debug for UnitaryRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "UnitaryRing({}, |Λ|={})",
            self.0.ring.label(),
            self.0.lambda.len()
        )
    }
}

impl UnitaryRing {
    pub fn new(ring: FiniteRing, anti: AntiStructure, lambda: LambdaSpec) -> Result<UnitaryRing> {
        let report = validate_anti_structure(&ring, &anti);
        if !report.is_valid() {
            return Err(Error::InvalidUnitaryRing(report.to_string()));
        }
        let set = match lambda {
            LambdaSpec::Min => lambda_bounds(&ring, &anti).0,
            LambdaSpec::Max => lambda_bounds(&ring, &anti).1,
            LambdaSpec::Generators(g) => additive_closure(&ring, &g),
        };
        let report = validate_form_parameter(&ring, &anti, &set);
        if !report.is_valid() {
            return Err(Error::InvalidUnitaryRing(report.to_string()));
        }
        Ok(Self::assemble(ring, anti, set, None))
    }

    /// Construction without re-validation; callers guarantee the axioms.
    pub(crate) fn assemble(
        ring: FiniteRing,
        anti: AntiStructure,
        lambda: Vec<Elem>,
        source: Option<Value>,
    ) -> UnitaryRing {
        let n = ring.size();
        let mut sigma_inv = vec![0; n];
        for (a, &s) in anti.sigma.iter().enumerate() {
            sigma_inv[s as usize] = a as Elem;
        }
        let mut in_lambda = vec![false; n];
        for &x in &lambda {
            in_lambda[x as usize] = true;
        }
        let coset_rep = ring
            .elements()
            .map(|a| lambda.iter().map(|&l| ring.add(a, l)).min().unwrap_or(a))
            .collect();
        let lambda_gens = additive_span_generators(&ring, &lambda);
        let u_inv = ring.inv(anti.u).expect("u is a unit");
        UnitaryRing(Arc::new(UnitaryInner {
            ring,
            sigma: anti.sigma,
            sigma_inv,
            u: anti.u,
            u_inv,
            lambda_gens,
            lambda,
            in_lambda,
            coset_rep,
            source,
            decomposition: OnceLock::new(),
        }))
    }

    fn parse_parts(v: &Value) -> Result<(FiniteRing, AntiStructure, LambdaSpec)> {
        let bad = |m: &str| Error::MalformedSpec(format!("unitary ring: {m}"));
        let spec = RingSpec::from_json(v.get("ring").ok_or_else(|| bad("missing ring"))?)?;
        let ring = FiniteRing::build(&spec)?;
        let rule = match v.get("sigma") {
            Some(s) => SigmaRule::from_json(s)?,
            None => SigmaRule::Identity,
        };
        let sigma = rule.table(&ring)?;
        let u = match v.get("u") {
            Some(lit) => ring.parse_literal(lit)?,
            None => ring.one(),
        };
        let lambda = match v.get("lambda") {
            None => LambdaSpec::Min,
            Some(Value::String(s)) if s == "min" => LambdaSpec::Min,
            Some(Value::String(s)) if s == "max" => LambdaSpec::Max,
            Some(obj) => {
                let gens = obj
                    .get("generators")
                    .and_then(|g| g.as_array())
                    .ok_or_else(|| {
                        bad("lambda must be \"min\", \"max\" or {\"generators\": [..]}")
                    })?;
                LambdaSpec::Generators(
                    gens.iter()
                        .map(|g| ring.parse_literal(g))
                        .collect::<Result<Vec<_>>>()?,
                )
            }
        };
        Ok((ring, AntiStructure { sigma, u }, lambda))
    }

    /// Axiom violations of a ring document; Err only when it does not parse.
    pub fn validate_json(v: &Value) -> Result<ValidationReport> {
        let (ring, anti, lambda) = Self::parse_parts(v)?;
        let mut report = validate_anti_structure(&ring, &anti);
        if !report.is_valid() {
            return Ok(report);
        }
        let set = match lambda {
            LambdaSpec::Min => lambda_bounds(&ring, &anti).0,
            LambdaSpec::Max => lambda_bounds(&ring, &anti).1,
            LambdaSpec::Generators(g) => additive_closure(&ring, &g),
        };
        report
            .violations
            .extend(validate_form_parameter(&ring, &anti, &set).violations);
        Ok(report)
    }

    /// Parses `{"ring": .., "sigma": .., "u": .., "lambda": ..}`.
    pub fn from_json(v: &Value) -> Result<UnitaryRing> {
        let (ring, anti, lambda) = Self::parse_parts(v)?;
        let ur = UnitaryRing::new(ring, anti, lambda)?;
        let mut inner = Arc::try_unwrap(ur.0)
            .ok()
            .expect("fresh unitary ring is unshared");
        inner.source = Some(v.clone());
        Ok(UnitaryRing(Arc::new(inner)))
    }

    /// JSON document this ring was parsed from, or a canonical one.
    pub fn to_json(&self) -> Value {
        if let Some(src) = &self.0.source {
            return src.clone();
        }
        let ring = self.ring();
        let body = match ring.spec() {
            Some(spec) => spec.to_json(),
            None => json!({ "derived": ring.label(), "size": ring.size() }),
        };
        json!({
            "ring": body,
            "sigma": { "map": ring.elements().map(|a| ring.literal(self.sigma(a))).collect::<Vec<_>>() },
            "u": ring.literal(self.u()),
            "lambda": { "generators": self.lambda_generators().iter().map(|&a| ring.literal(a)).collect::<Vec<_>>() },
        })
    }

    pub fn ring(&self) -> &FiniteRing {
        &self.0.ring
    }

    pub fn anti(&self) -> AntiStructure {
        AntiStructure {
            sigma: self.0.sigma.clone(),
            u: self.0.u,
        }
    }

    #[inline]
    pub fn sigma(&self, a: Elem) -> Elem {
        self.0.sigma[a as usize]
    }

    #[inline]
    pub fn sigma_inv(&self, a: Elem) -> Elem {
        self.0.sigma_inv[a as usize]
    }

    pub fn u(&self) -> Elem {
        self.0.u
    }

    pub fn u_inv(&self) -> Elem {
        self.0.u_inv
    }

    #[inline]
    pub fn in_lambda(&self, a: Elem) -> bool {
        self.0.in_lambda[a as usize]
    }

    pub fn lambda(&self) -> &[Elem] {
        &self.0.lambda
    }

    pub fn lambda_generators(&self) -> &[Elem] {
        &self.0.lambda_gens
    }

    /// Least element of a + Λ.
    #[inline]
    pub fn coset_rep(&self, a: Elem) -> Elem {
        self.0.coset_rep[a as usize]
    }

    pub fn same(&self, other: &UnitaryRing) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.0.ring == other.0.ring
                && self.0.sigma == other.0.sigma
                && self.0.u == other.0.u
                && self.0.lambda == other.0.lambda)
    }

    pub fn decomposition(&self) -> Result<&Decomposition> {
        self.0
            .decomposition
            .get_or_init(|| Decomposition::compute(self))
            .as_ref()
            .map_err(|e| e.clone())
    }

    /// e^σ Λ e as a sorted set.
    pub fn lambda_sandwich(&self, e: Elem) -> Vec<Elem> {
        let r = self.ring();
        let es = self.sigma(e);
        let mut out: Vec<Elem> = self.lambda().iter().map(|&l| r.mul3(es, l, e)).collect();
        out.sort_unstable();
        out.dedup();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ur(v: Value) -> Result<UnitaryRing> {
        UnitaryRing::from_json(&v)
    }

    #[test]
    fn f3_identity_is_valid() {
        let r = ur(json!({"ring": {"residue": 3}, "sigma": "identity", "u": 1, "lambda": "min"}))
            .unwrap();
        let (min, max) = lambda_bounds(r.ring(), &r.anti());
        assert_eq!(min, vec![0]);
        assert_eq!(max, vec![0]);
    }

    #[test]
    fn f2_bounds() {
        let r = ur(json!({"ring": {"residue": 2}, "sigma": "identity", "u": 1, "lambda": "max"}))
            .unwrap();
        let (min, max) = lambda_bounds(r.ring(), &r.anti());
        assert_eq!(min, vec![0]);
        assert_eq!(max, vec![0, 1]);
        assert_eq!(r.lambda(), &[0, 1]);
    }

    #[test]
    fn exchange_forces_diagonal_lambda() {
        let r = ur(json!({"ring": {"product": [{"residue": 2}, {"residue": 2}]}, "sigma": "exchange", "u": [1, 1]}))
            .unwrap();
        let (min, max) = lambda_bounds(r.ring(), &r.anti());
        let diag = vec![0, r.ring().parse_literal(&json!([1, 1])).unwrap()];
        assert_eq!(min, diag);
        assert_eq!(max, diag);
    }

    #[test]
    fn transpose_with_bad_u_rejected() {
        let ring = FiniteRing::build(&RingSpec::Matrix {
            n: 2,
            over: Box::new(RingSpec::Residue(2)),
        })
        .unwrap();
        let sigma = SigmaRule::Transpose(Box::new(SigmaRule::Identity))
            .table(&ring)
            .unwrap();
        let u = ring.parse_literal(&json!([[1, 1], [0, 1]])).unwrap();
        let report = validate_anti_structure(&ring, &AntiStructure { sigma, u });
        assert!(report
            .violations
            .iter()
            .any(|v| v.axiom.contains("u^sigma u") || v.axiom.contains("u a u^-1")));
    }

    #[test]
    fn alternating_matrices() {
        let r = ur(json!({"ring": {"matrix": {"n": 2, "over": {"residue": 2}}}, "sigma": "transpose", "u": [[1, 0], [0, 1]], "lambda": "min"}))
            .unwrap();
        assert_eq!(r.lambda().len(), 2);
    }

    #[test]
    fn bad_lambda_reported() {
        let r = ur(json!({"ring": {"residue": 2}, "sigma": "identity", "u": 1})).unwrap();
        let ring = FiniteRing::build(&RingSpec::Residue(4)).unwrap();
        let anti = AntiStructure {
            sigma: ring.elements().collect(),
            u: 1,
        };
        let report = validate_form_parameter(&ring, &anti, &[0, 1]);
        assert!(!report.is_valid());
        assert!(r.lambda().len() == 1);
    }
}
