use std::fmt;
use std::sync::{Arc, OnceLock};

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::limits;

/// Canonical index of a ring element in `0..|A|`.
pub type Elem = u32;

const TABLE_LIMIT: usize = 1024;
const ABSENT: u32 = u32::MAX;

/// Constructor tree of a finite ring.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum RingSpec {
    Residue(u32),
    /// GF(p^k) as F_p[x]/(modulus); modulus is monic, coefficients low-to-high.
    Field {
        p: u32,
        modulus: Vec<u32>,
    },
    Matrix {
        n: usize,
        over: Box<RingSpec>,
    },
    Product(Vec<RingSpec>),
    Opposite(Box<RingSpec>),
    /// over[t]/(t^degree)
    Truncated {
        over: Box<RingSpec>,
        degree: usize,
    },
}

impl RingSpec {
    pub fn from_json(v: &Value) -> Result<RingSpec> {
        let obj = v
            .as_object()
            .ok_or_else(|| malformed("ring constructor must be an object"))?;
        if obj.len() != 1 {
            return Err(malformed("ring constructor must have exactly one key"));
        }
        let (key, body) = obj.iter().next().unwrap();
        match key.as_str() {
            "residue" => {
                let m = as_u32(body, "residue modulus")?;
                Ok(RingSpec::Residue(m))
            }
            "field" => {
                let p = as_u32(
                    body.get("p").ok_or_else(|| malformed("field needs p"))?,
                    "p",
                )?;
                if let Some(m) = body.get("modulus") {
                    let coeffs = m
                        .as_array()
                        .ok_or_else(|| malformed("modulus must be an array"))?
                        .iter()
                        .map(|c| as_u32(c, "modulus coefficient"))
                        .collect::<Result<Vec<_>>>()?;
                    Ok(RingSpec::Field { p, modulus: coeffs })
                } else {
                    let k = match body.get("degree") {
                        Some(d) => as_u32(d, "degree")? as usize,
                        None => 1,
                    };
                    Ok(RingSpec::Field {
                        p,
                        modulus: least_irreducible(p, k)?,
                    })
                }
            }
            "matrix" => {
                let n = as_u32(
                    body.get("n").ok_or_else(|| malformed("matrix needs n"))?,
                    "n",
                )?;
                let over = body
                    .get("over")
                    .ok_or_else(|| malformed("matrix needs over"))?;
                Ok(RingSpec::Matrix {
                    n: n as usize,
                    over: Box::new(RingSpec::from_json(over)?),
                })
            }
            "product" => {
                let parts = body
                    .as_array()
                    .ok_or_else(|| malformed("product must be an array"))?
                    .iter()
                    .map(RingSpec::from_json)
                    .collect::<Result<Vec<_>>>()?;
                Ok(RingSpec::Product(parts))
            }
            "opposite" => Ok(RingSpec::Opposite(Box::new(RingSpec::from_json(body)?))),
            "truncated" => {
                let over = body
                    .get("over")
                    .ok_or_else(|| malformed("truncated needs over"))?;
                let degree = as_u32(
                    body.get("degree")
                        .ok_or_else(|| malformed("truncated needs degree"))?,
                    "degree",
                )?;
                Ok(RingSpec::Truncated {
                    over: Box::new(RingSpec::from_json(over)?),
                    degree: degree as usize,
                })
            }
            other => Err(malformed(&format!("unknown ring constructor {other:?}"))),
        }
    }

    pub fn to_json(&self) -> Value {
        match self {
            RingSpec::Residue(m) => json!({ "residue": m }),
            RingSpec::Field { p, modulus } => json!({ "field": { "p": p, "modulus": modulus } }),
            RingSpec::Matrix { n, over } => json!({ "matrix": { "n": n, "over": over.to_json() } }),
            RingSpec::Product(parts) => {
                json!({ "product": parts.iter().map(|p| p.to_json()).collect::<Vec<_>>() })
            }
            RingSpec::Opposite(b) => json!({ "opposite": b.to_json() }),
            RingSpec::Truncated { over, degree } => {
                json!({ "truncated": { "over": over.to_json(), "degree": degree } })
            }
        }
    }
}

impl fmt::Display for RingSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RingSpec::Residue(m) => write!(f, "Z/{m}"),
            RingSpec::Field { p, modulus } if modulus.len() == 2 => write!(f, "F{p}"),
            RingSpec::Field { p, modulus } => write!(f, "F{}", p.pow(modulus.len() as u32 - 1)),
            RingSpec::Matrix { n, over } => write!(f, "M{n}({over})"),
            RingSpec::Product(parts) => {
                let names: Vec<String> = parts.iter().map(|p| p.to_string()).collect();
                write!(f, "{}", names.join("x"))
            }
            RingSpec::Opposite(b) => write!(f, "({b})^op"),
            RingSpec::Truncated { over, degree } => write!(f, "{over}[t]/(t^{degree})"),
        }
    }
}

fn malformed(msg: &str) -> Error {
    Error::MalformedSpec(msg.to_string())
}

fn as_u32(v: &Value, what: &str) -> Result<u32> {
    v.as_u64()
        .and_then(|x| u32::try_from(x).ok())
        .ok_or_else(|| malformed(&format!("{what} must be a non-negative integer")))
}

fn is_prime(p: u32) -> bool {
    p >= 2
        && (2..p)
            .take_while(|d| d * d <= p)
            .all(|d| !p.is_multiple_of(d))
}

/// Remainder of `a` modulo the monic polynomial `m` over F_p.
fn poly_rem(mut a: Vec<u32>, m: &[u32], p: u32) -> Vec<u32> {
    let dm = m.len() - 1;
    while a.len() > dm {
        let lead = *a.last().unwrap();
        let shift = a.len() - 1 - dm;
        if lead != 0 {
            for (i, &c) in m.iter().enumerate() {
                let t = (lead as u64 * c as u64 % p as u64) as u32;
                a[shift + i] = (a[shift + i] + p - t) % p;
            }
        }
        a.pop();
    }
    a
}

fn is_irreducible(p: u32, modulus: &[u32]) -> bool {
    let k = modulus.len() - 1;
    for d in 1..=k / 2 {
        // every monic polynomial of degree d
        let count = (p as usize).pow(d as u32);
        for idx in 0..count {
            let mut g = Vec::with_capacity(d + 1);
            let mut r = idx;
            for _ in 0..d {
                g.push((r % p as usize) as u32);
                r /= p as usize;
            }
            g.push(1);
            if poly_rem(modulus.to_vec(), &g, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

/// Least monic irreducible of degree k, ordered by coefficients low-to-high.
fn least_irreducible(p: u32, k: usize) -> Result<Vec<u32>> {
    if !is_prime(p) || k == 0 {
        return Err(malformed("field needs a prime p and positive degree"));
    }
    if k == 1 {
        return Ok(vec![0, 1]);
    }
    let count = limits::power(p as usize, k);
    if count > limits::ring_bound() as u128 {
        return Err(Error::OversizeRing {
            size: count.min(usize::MAX as u128) as usize,
            bound: limits::ring_bound() as usize,
        });
    }
    for idx in 0..count as usize {
        // lexicographic with the constant coefficient most significant
        let mut m = vec![0u32; k + 1];
        let mut r = idx;
        for i in (0..k).rev() {
            m[i] = (r % p as usize) as u32;
            r /= p as usize;
        }
        m[k] = 1;
        if is_irreducible(p, &m) {
            return Ok(m);
        }
    }
    Err(malformed("no irreducible polynomial found"))
}

enum Kind {
    Residue(u32),
    Field {
        p: u32,
        modulus: Vec<u32>,
    },
    Matrix {
        n: usize,
        base: FiniteRing,
    },
    Product(Vec<FiniteRing>),
    Opposite(FiniteRing),
    Truncated {
        base: FiniteRing,
        k: usize,
    },
    /// Quotient or sub-ring of `parent`: element i is represented by `reps[i]`.
    Derived {
        parent: FiniteRing,
        reps: Vec<Elem>,
        index: Vec<u32>,
    },
}

struct Inner {
    kind: Kind,
    spec: Option<RingSpec>,
    label: String,
    size: usize,
    radices: Vec<usize>,
    one: Elem,
    add: Option<Vec<Elem>>,
    mul: Option<Vec<Elem>>,
    neg: Vec<Elem>,
    inverse: OnceLock<Vec<Elem>>,
    additive_gens: OnceLock<Vec<Elem>>,
    radical: OnceLock<Vec<Elem>>,
}

/// A finite ring with canonical element encoding. Cheap to clone.
#[derive(Clone)]
pub struct FiniteRing(Arc<Inner>);

impl fmt::Debug for FiniteRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteRing({}, |A|={})", self.0.label, self.0.size)
    }
}

impl PartialEq for FiniteRing {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.spec.is_some() && self.0.spec == other.0.spec)
    }
}

impl Eq for FiniteRing {}

fn decode(mut code: usize, radices: &[usize]) -> Vec<Elem> {
    let mut out = vec![0; radices.len()];
    for i in (0..radices.len()).rev() {
        out[i] = (code % radices[i]) as Elem;
        code /= radices[i];
    }
    out
}

fn encode(digits: &[Elem], radices: &[usize]) -> Elem {
    let mut code = 0usize;
    for (d, r) in digits.iter().zip(radices) {
        code = code * r + *d as usize;
    }
    code as Elem
}

fn checked_size(radices: &[usize]) -> Result<usize> {
    let mut size: u128 = 1;
    for &r in radices {
        size = size.saturating_mul(r as u128);
    }
    let bound = limits::ring_bound();
    if size > bound as u128 {
        return Err(Error::OversizeRing {
            size: size.min(usize::MAX as u128) as usize,
            bound: bound as usize,
        });
    }
    Ok(size as usize)
}

impl FiniteRing {
    pub fn build(spec: &RingSpec) -> Result<FiniteRing> {
        let ring = match spec {
            RingSpec::Residue(m) => {
                if *m < 2 {
                    return Err(malformed("residue modulus must be at least 2"));
                }
                let size = checked_size(&[*m as usize])?;
                Self::assemble(
                    Kind::Residue(*m),
                    Some(spec.clone()),
                    vec![*m as usize],
                    size,
                    1 % m,
                )
            }
            RingSpec::Field { p, modulus } => {
                if !is_prime(*p) {
                    return Err(malformed("field characteristic must be prime"));
                }
                if modulus.len() < 2 || *modulus.last().unwrap() != 1 {
                    return Err(malformed("field modulus must be monic of positive degree"));
                }
                if modulus.iter().any(|&c| c >= *p) {
                    return Err(malformed("modulus coefficients must lie in 0..p"));
                }
                if !is_irreducible(*p, modulus) {
                    return Err(malformed("field modulus is reducible"));
                }
                let k = modulus.len() - 1;
                let radices = vec![*p as usize; k];
                let size = checked_size(&radices)?;
                let mut one = vec![0; k];
                one[0] = 1;
                let one = encode(&one, &radices);
                Self::assemble(
                    Kind::Field {
                        p: *p,
                        modulus: modulus.clone(),
                    },
                    Some(spec.clone()),
                    radices,
                    size,
                    one,
                )
            }
            RingSpec::Matrix { n, over } => {
                if *n == 0 {
                    return Err(malformed("matrix size must be positive"));
                }
                let base = FiniteRing::build(over)?;
                let radices = vec![base.size(); n * n];
                let size = checked_size(&radices)?;
                let mut one = vec![0; n * n];
                for i in 0..*n {
                    one[i * n + i] = base.one();
                }
                let one = encode(&one, &radices);
                Self::assemble(
                    Kind::Matrix { n: *n, base },
                    Some(spec.clone()),
                    radices,
                    size,
                    one,
                )
            }
            RingSpec::Product(parts) => {
                if parts.is_empty() {
                    return Err(malformed("product needs at least one factor"));
                }
                let rings = parts
                    .iter()
                    .map(FiniteRing::build)
                    .collect::<Result<Vec<_>>>()?;
                let radices: Vec<usize> = rings.iter().map(|r| r.size()).collect();
                let size = checked_size(&radices)?;
                let one: Vec<Elem> = rings.iter().map(|r| r.one()).collect();
                let one = encode(&one, &radices);
                Self::assemble(Kind::Product(rings), Some(spec.clone()), radices, size, one)
            }
            RingSpec::Opposite(b) => {
                let base = FiniteRing::build(b)?;
                let radices = vec![base.size()];
                let one = base.one();
                let size = base.size();
                Self::assemble(Kind::Opposite(base), Some(spec.clone()), radices, size, one)
            }
            RingSpec::Truncated { over, degree } => {
                if *degree == 0 {
                    return Err(malformed("truncation degree must be positive"));
                }
                let base = FiniteRing::build(over)?;
                let radices = vec![base.size(); *degree];
                let size = checked_size(&radices)?;
                let mut one = vec![0; *degree];
                one[0] = base.one();
                let one = encode(&one, &radices);
                Self::assemble(
                    Kind::Truncated { base, k: *degree },
                    Some(spec.clone()),
                    radices,
                    size,
                    one,
                )
            }
        };
        Ok(ring)
    }

    fn assemble(
        kind: Kind,
        spec: Option<RingSpec>,
        radices: Vec<usize>,
        size: usize,
        one: Elem,
    ) -> FiniteRing {
        let label = match (&spec, &kind) {
            (Some(s), _) => s.to_string(),
            (None, Kind::Derived { parent, .. }) => format!("derived({})", parent.label()),
            _ => "ring".to_string(),
        };
        let bare = FiniteRing(Arc::new(Inner {
            kind,
            spec,
            label,
            size,
            radices,
            one,
            add: None,
            mul: None,
            neg: Vec::new(),
            inverse: OnceLock::new(),
            additive_gens: OnceLock::new(),
            radical: OnceLock::new(),
        }));
        let neg: Vec<Elem> = (0..size as Elem).map(|a| bare.raw_neg(a)).collect();
        let (add, mul) = if size <= TABLE_LIMIT {
            let mut add = Vec::with_capacity(size * size);
            let mut mul = Vec::with_capacity(size * size);
            for a in 0..size as Elem {
                for b in 0..size as Elem {
                    add.push(bare.raw_add(a, b));
                    mul.push(bare.raw_mul(a, b));
                }
            }
            (Some(add), Some(mul))
        } else {
            (None, None)
        };
        let mut inner = Arc::try_unwrap(bare.0)
            .ok()
            .expect("freshly built ring is unshared");
        inner.neg = neg;
        inner.add = add;
        inner.mul = mul;
        FiniteRing(Arc::new(inner))
    }

    /// Quotient by a two-sided ideal; classes are indexed by their least representative.
    pub fn quotient(&self, ideal: &[Elem]) -> FiniteRing {
        let n = self.size();
        let mut rep = vec![0 as Elem; n];
        for a in 0..n as Elem {
            rep[a as usize] = ideal.iter().map(|&j| self.add(a, j)).min().unwrap_or(a);
        }
        let mut reps: Vec<Elem> = rep.clone();
        reps.sort_unstable();
        reps.dedup();
        let mut pos = vec![ABSENT; n];
        for (i, &r) in reps.iter().enumerate() {
            pos[r as usize] = i as u32;
        }
        let index: Vec<u32> = rep.iter().map(|&r| pos[r as usize]).collect();
        let one = index[self.one() as usize];
        let size = reps.len();
        Self::assemble(
            Kind::Derived {
                parent: self.clone(),
                reps,
                index,
            },
            None,
            vec![size],
            size,
            one,
        )
    }

    /// Sub-ring on `members` (closed under + and ×) with identity `one`, e.g. a corner eAe.
    pub fn subring(&self, members: &[Elem], one: Elem) -> FiniteRing {
        let mut reps = members.to_vec();
        reps.sort_unstable();
        reps.dedup();
        let mut index = vec![ABSENT; self.size()];
        for (i, &r) in reps.iter().enumerate() {
            index[r as usize] = i as u32;
        }
        let one = index[one as usize];
        let size = reps.len();
        Self::assemble(
            Kind::Derived {
                parent: self.clone(),
                reps,
                index,
            },
            None,
            vec![size],
            size,
            one,
        )
    }

    /// For a derived ring: the parent element representing `a`.
    pub fn lift(&self, a: Elem) -> Option<Elem> {
        match &self.0.kind {
            Kind::Derived { reps, .. } => Some(reps[a as usize]),
            _ => None,
        }
    }

    /// For a derived ring: the element represented by the parent element `a`, if any.
    pub fn project(&self, a: Elem) -> Option<Elem> {
        match &self.0.kind {
            Kind::Derived { index, .. } => {
                let i = index[a as usize];
                (i != ABSENT).then_some(i)
            }
            _ => None,
        }
    }

    pub fn parent(&self) -> Option<&FiniteRing> {
        match &self.0.kind {
            Kind::Derived { parent, .. } => Some(parent),
            _ => None,
        }
    }

    pub fn spec(&self) -> Option<&RingSpec> {
        self.0.spec.as_ref()
    }

    pub fn label(&self) -> &str {
        &self.0.label
    }

    pub fn size(&self) -> usize {
        self.0.size
    }

    pub fn zero(&self) -> Elem {
        0
    }

    pub fn one(&self) -> Elem {
        self.0.one
    }

    pub fn elements(&self) -> std::ops::Range<Elem> {
        0..self.0.size as Elem
    }

    pub fn same(&self, other: &FiniteRing) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }

    #[inline]
    pub fn add(&self, a: Elem, b: Elem) -> Elem {
        match &self.0.add {
            Some(t) => t[a as usize * self.0.size + b as usize],
            None => self.raw_add(a, b),
        }
    }

    #[inline]
    pub fn mul(&self, a: Elem, b: Elem) -> Elem {
        match &self.0.mul {
            Some(t) => t[a as usize * self.0.size + b as usize],
            None => self.raw_mul(a, b),
        }
    }

    #[inline]
    pub fn neg(&self, a: Elem) -> Elem {
        self.0.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: Elem, b: Elem) -> Elem {
        self.add(a, self.neg(b))
    }

    pub fn mul3(&self, a: Elem, b: Elem, c: Elem) -> Elem {
        self.mul(self.mul(a, b), c)
    }

    pub fn sum<I: IntoIterator<Item = Elem>>(&self, it: I) -> Elem {
        it.into_iter().fold(0, |acc, x| self.add(acc, x))
    }

    /// n·1
    pub fn from_int(&self, n: i64) -> Elem {
        let mut acc = 0;
        let unit = if n < 0 {
            self.neg(self.one())
        } else {
            self.one()
        };
        for _ in 0..n.unsigned_abs() {
            acc = self.add(acc, unit);
        }
        acc
    }

    pub fn is_idempotent(&self, e: Elem) -> bool {
        self.mul(e, e) == e
    }

    /// Two-sided inverse, if `a` is a unit.
    pub fn inv(&self, a: Elem) -> Option<Elem> {
        let table = self.0.inverse.get_or_init(|| {
            let n = self.size();
            let one = self.one();
            let mut inv = vec![ABSENT; n];
            for a in 0..n as Elem {
                if inv[a as usize] != ABSENT {
                    continue;
                }
                for b in 0..n as Elem {
                    if self.mul(a, b) == one && self.mul(b, a) == one {
                        inv[a as usize] = b;
                        inv[b as usize] = a;
                        break;
                    }
                }
            }
            inv
        });
        let i = table[a as usize];
        (i != ABSENT).then_some(i)
    }

    pub fn is_unit(&self, a: Elem) -> bool {
        self.inv(a).is_some()
    }

    pub fn units(&self) -> Vec<Elem> {
        self.elements().filter(|&a| self.is_unit(a)).collect()
    }

    /// Least-first greedy generating set of the additive group.
    pub fn additive_generators(&self) -> &[Elem] {
        self.0.additive_gens.get_or_init(|| {
            let all: Vec<Elem> = self.elements().collect();
            additive_span_generators(self, &all)
        })
    }

    /// Jacobson radical, sorted; see [`super::radical::jacobson_radical`].
    pub fn radical(&self) -> &[Elem] {
        self.0
            .radical
            .get_or_init(|| super::radical::jacobson_radical(self))
    }

    pub fn is_commutative(&self) -> bool {
        let g = self.additive_generators();
        g.iter()
            .all(|&a| g.iter().all(|&b| self.mul(a, b) == self.mul(b, a)))
    }

    pub fn center(&self) -> Vec<Elem> {
        let g = self.additive_generators();
        self.elements()
            .filter(|&z| g.iter().all(|&a| self.mul(z, a) == self.mul(a, z)))
            .collect()
    }

    pub fn idempotents(&self) -> Vec<Elem> {
        self.elements().filter(|&e| self.is_idempotent(e)).collect()
    }

    /// Coordinates of a structural element (see [`RingSpec`] for the order).
    pub fn coords(&self, a: Elem) -> Vec<Elem> {
        decode(a as usize, &self.0.radices)
    }

    pub fn from_coords(&self, digits: &[Elem]) -> Elem {
        encode(digits, &self.0.radices)
    }

    /// Child rings of a structural node, one per coordinate.
    pub fn coordinate_rings(&self) -> Vec<FiniteRing> {
        match &self.0.kind {
            Kind::Matrix { n, base } => vec![base.clone(); n * n],
            Kind::Product(parts) => parts.clone(),
            Kind::Opposite(b) => vec![b.clone()],
            Kind::Truncated { base, k } => vec![base.clone(); *k],
            _ => Vec::new(),
        }
    }

    pub fn matrix_shape(&self) -> Option<(usize, &FiniteRing)> {
        match &self.0.kind {
            Kind::Matrix { n, base } => Some((*n, base)),
            _ => None,
        }
    }

    pub fn product_parts(&self) -> Option<&[FiniteRing]> {
        match &self.0.kind {
            Kind::Product(p) => Some(p),
            _ => None,
        }
    }

    pub fn truncated_shape(&self) -> Option<(usize, &FiniteRing)> {
        match &self.0.kind {
            Kind::Truncated { base, k } => Some((*k, base)),
            _ => None,
        }
    }

    pub fn opposite_base(&self) -> Option<&FiniteRing> {
        match &self.0.kind {
            Kind::Opposite(b) => Some(b),
            _ => None,
        }
    }

    /// (p, k) for GF(p^k).
    pub fn field_shape(&self) -> Option<(u32, usize)> {
        match &self.0.kind {
            Kind::Field { p, modulus } => Some((*p, modulus.len() - 1)),
            Kind::Residue(m) if is_prime(*m) => Some((*m, 1)),
            _ => None,
        }
    }

    fn raw_neg(&self, a: Elem) -> Elem {
        match &self.0.kind {
            Kind::Residue(m) => (m - a % m) % m,
            Kind::Field { p, .. } => {
                let d: Vec<Elem> = self.coords(a).iter().map(|&c| (p - c) % p).collect();
                self.from_coords(&d)
            }
            Kind::Matrix { base, .. } | Kind::Truncated { base, .. } => {
                let d: Vec<Elem> = self.coords(a).iter().map(|&c| base.neg(c)).collect();
                self.from_coords(&d)
            }
            Kind::Product(parts) => {
                let d: Vec<Elem> = self
                    .coords(a)
                    .iter()
                    .zip(parts)
                    .map(|(&c, r)| r.neg(c))
                    .collect();
                self.from_coords(&d)
            }
            Kind::Opposite(b) => b.neg(a),
            Kind::Derived {
                parent,
                reps,
                index,
            } => index[parent.neg(reps[a as usize]) as usize],
        }
    }

    fn raw_add(&self, a: Elem, b: Elem) -> Elem {
        match &self.0.kind {
            Kind::Residue(m) => ((a as u64 + b as u64) % *m as u64) as Elem,
            Kind::Field { p, .. } => {
                let x = self.coords(a);
                let y = self.coords(b);
                let d: Vec<Elem> = x.iter().zip(&y).map(|(&s, &t)| (s + t) % p).collect();
                self.from_coords(&d)
            }
            Kind::Matrix { base, .. } | Kind::Truncated { base, .. } => {
                let x = self.coords(a);
                let y = self.coords(b);
                let d: Vec<Elem> = x.iter().zip(&y).map(|(&s, &t)| base.add(s, t)).collect();
                self.from_coords(&d)
            }
            Kind::Product(parts) => {
                let x = self.coords(a);
                let y = self.coords(b);
                let d: Vec<Elem> = parts
                    .iter()
                    .enumerate()
                    .map(|(i, r)| r.add(x[i], y[i]))
                    .collect();
                self.from_coords(&d)
            }
            Kind::Opposite(base) => base.add(a, b),
            Kind::Derived {
                parent,
                reps,
                index,
            } => index[parent.add(reps[a as usize], reps[b as usize]) as usize],
        }
    }

    fn raw_mul(&self, a: Elem, b: Elem) -> Elem {
        match &self.0.kind {
            Kind::Residue(m) => ((a as u64 * b as u64) % *m as u64) as Elem,
            Kind::Field { p, modulus } => {
                let x = self.coords(a);
                let y = self.coords(b);
                let mut prod = vec![0u32; x.len() + y.len() - 1];
                for (i, &s) in x.iter().enumerate() {
                    for (j, &t) in y.iter().enumerate() {
                        prod[i + j] =
                            ((prod[i + j] as u64 + s as u64 * t as u64) % *p as u64) as u32;
                    }
                }
                let mut r = poly_rem(prod, modulus, *p);
                r.resize(x.len(), 0);
                self.from_coords(&r)
            }
            Kind::Matrix { n, base } => {
                let x = self.coords(a);
                let y = self.coords(b);
                let mut d = vec![0; n * n];
                for i in 0..*n {
                    for j in 0..*n {
                        let mut acc = 0;
                        for k in 0..*n {
                            acc = base.add(acc, base.mul(x[i * n + k], y[k * n + j]));
                        }
                        d[i * n + j] = acc;
                    }
                }
                self.from_coords(&d)
            }
            Kind::Product(parts) => {
                let x = self.coords(a);
                let y = self.coords(b);
                let d: Vec<Elem> = parts
                    .iter()
                    .enumerate()
                    .map(|(i, r)| r.mul(x[i], y[i]))
                    .collect();
                self.from_coords(&d)
            }
            Kind::Opposite(base) => base.mul(b, a),
            Kind::Truncated { base, k } => {
                let x = self.coords(a);
                let y = self.coords(b);
                let mut d = vec![0; *k];
                for i in 0..*k {
                    for j in 0..*k - i {
                        d[i + j] = base.add(d[i + j], base.mul(x[i], y[j]));
                    }
                }
                self.from_coords(&d)
            }
            Kind::Derived {
                parent,
                reps,
                index,
            } => index[parent.mul(reps[a as usize], reps[b as usize]) as usize],
        }
    }

    /// Parses an element literal in the ring's canonical literal syntax.
    pub fn parse_literal(&self, v: &Value) -> Result<Elem> {
        let bad = || malformed(&format!("bad element literal {v} for {}", self.label()));
        match &self.0.kind {
            Kind::Residue(m) => {
                let x = v.as_i64().ok_or_else(bad)?;
                Ok(x.rem_euclid(*m as i64) as Elem)
            }
            Kind::Field { p, modulus } => {
                let k = modulus.len() - 1;
                if let Some(x) = v.as_i64() {
                    let c = x.rem_euclid(*p as i64) as Elem;
                    let mut d = vec![0; k];
                    d[0] = c;
                    return Ok(self.from_coords(&d));
                }
                let arr = v.as_array().ok_or_else(bad)?;
                if arr.len() != k {
                    return Err(bad());
                }
                let d = arr
                    .iter()
                    .map(|c| {
                        c.as_i64()
                            .map(|x| x.rem_euclid(*p as i64) as Elem)
                            .ok_or_else(bad)
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(self.from_coords(&d))
            }
            Kind::Matrix { n, base } => {
                let rows = v.as_array().ok_or_else(bad)?;
                if rows.len() != *n {
                    return Err(bad());
                }
                let mut d = Vec::with_capacity(n * n);
                for row in rows {
                    let row = row.as_array().ok_or_else(bad)?;
                    if row.len() != *n {
                        return Err(bad());
                    }
                    for x in row {
                        d.push(base.parse_literal(x)?);
                    }
                }
                Ok(self.from_coords(&d))
            }
            Kind::Product(parts) => {
                let arr = v.as_array().ok_or_else(bad)?;
                if arr.len() != parts.len() {
                    return Err(bad());
                }
                let d = arr
                    .iter()
                    .zip(parts)
                    .map(|(x, r)| r.parse_literal(x))
                    .collect::<Result<Vec<_>>>()?;
                Ok(self.from_coords(&d))
            }
            Kind::Opposite(b) => b.parse_literal(v),
            Kind::Truncated { base, k } => {
                if let Some(x) = v.as_i64() {
                    let mut d = vec![0; *k];
                    d[0] = base.parse_literal(&json!(x))?;
                    return Ok(self.from_coords(&d));
                }
                let arr = v.as_array().ok_or_else(bad)?;
                if arr.len() != *k {
                    return Err(bad());
                }
                let d = arr
                    .iter()
                    .map(|x| base.parse_literal(x))
                    .collect::<Result<Vec<_>>>()?;
                Ok(self.from_coords(&d))
            }
            Kind::Derived { .. } => {
                let x = v.as_u64().ok_or_else(bad)?;
                if x as usize >= self.size() {
                    return Err(bad());
                }
                Ok(x as Elem)
            }
        }
    }

    /// Canonical literal of an element; inverse of [`FiniteRing::parse_literal`].
    pub fn literal(&self, a: Elem) -> Value {
        match &self.0.kind {
            Kind::Residue(_) | Kind::Derived { .. } => json!(a),
            Kind::Field { modulus, .. } => {
                let d = self.coords(a);
                if modulus.len() == 2 {
                    json!(d[0])
                } else {
                    json!(d)
                }
            }
            Kind::Matrix { n, base } => {
                let d = self.coords(a);
                let rows: Vec<Value> = (0..*n)
                    .map(|i| Value::Array((0..*n).map(|j| base.literal(d[i * n + j])).collect()))
                    .collect();
                Value::Array(rows)
            }
            Kind::Product(parts) => {
                let d = self.coords(a);
                Value::Array(parts.iter().zip(&d).map(|(r, &x)| r.literal(x)).collect())
            }
            Kind::Opposite(b) => b.literal(a),
            Kind::Truncated { base, .. } => {
                let d = self.coords(a);
                Value::Array(d.iter().map(|&x| base.literal(x)).collect())
            }
        }
    }

    pub fn show(&self, a: Elem) -> String {
        self.literal(a).to_string()
    }
}

/// Least-first greedy generators of the additive subgroup spanned by `elems`.
pub fn additive_span_generators(ring: &FiniteRing, elems: &[Elem]) -> Vec<Elem> {
    let mut inside = vec![false; ring.size()];
    inside[0] = true;
    let mut members = vec![0 as Elem];
    let mut gens = Vec::new();
    let mut sorted = elems.to_vec();
    sorted.sort_unstable();
    for &g in &sorted {
        if inside[g as usize] {
            continue;
        }
        gens.push(g);
        let base = members.clone();
        let mut m = g;
        while !inside[m as usize] {
            for &h in &base {
                let s = ring.add(h, m);
                if !inside[s as usize] {
                    inside[s as usize] = true;
                    members.push(s);
                }
            }
            m = ring.add(m, g);
        }
    }
    gens
}

/// Additive subgroup generated by `gens`, sorted.
pub fn additive_closure(ring: &FiniteRing, gens: &[Elem]) -> Vec<Elem> {
    let mut inside = vec![false; ring.size()];
    inside[0] = true;
    let mut members = vec![0 as Elem];
    for &g in gens {
        if inside[g as usize] {
            continue;
        }
        let base = members.clone();
        let mut m = g;
        while !inside[m as usize] {
            for &h in &base {
                let s = ring.add(h, m);
                if !inside[s as usize] {
                    inside[s as usize] = true;
                    members.push(s);
                }
            }
            m = ring.add(m, g);
        }
    }
    members.sort_unstable();
    members
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(v: Value) -> FiniteRing {
        FiniteRing::build(&RingSpec::from_json(&v).unwrap()).unwrap()
    }

    #[test]
    fn residue_ring_elements() {
        let z4 = ring(json!({"residue": 4}));
        assert_eq!(z4.size(), 4);
        assert_eq!(z4.mul(3, 3), 1);
        assert_eq!(z4.neg(1), 3);
        assert_eq!(z4.units(), vec![1, 3]);
    }

    #[test]
    fn gf4_is_a_field() {
        let f4 = ring(json!({"field": {"p": 2, "modulus": [1, 1, 1]}}));
        assert_eq!(f4.size(), 4);
        assert_eq!(f4.units().len(), 3);
        assert!(f4.is_commutative());
        let auto = ring(json!({"field": {"p": 2, "degree": 2}}));
        assert_eq!(auto.spec(), f4.spec());
    }

    #[test]
    fn reducible_modulus_rejected() {
        let spec = RingSpec::Field {
            p: 2,
            modulus: vec![1, 0, 1],
        };
        assert!(matches!(
            FiniteRing::build(&spec),
            Err(Error::MalformedSpec(_))
        ));
    }

    #[test]
    fn m2f2_has_six_units() {
        let m = ring(json!({"matrix": {"n": 2, "over": {"residue": 2}}}));
        assert_eq!(m.size(), 16);
        assert_eq!(m.units().len(), 6);
        assert_eq!(m.literal(m.one()), json!([[1, 0], [0, 1]]));
        assert!(!m.is_commutative());
    }

    #[test]
    fn opposite_reverses_products() {
        let m = ring(json!({"matrix": {"n": 2, "over": {"residue": 2}}}));
        let op = ring(json!({"opposite": {"matrix": {"n": 2, "over": {"residue": 2}}}}));
        for a in m.elements() {
            for b in m.elements() {
                assert_eq!(op.mul(a, b), m.mul(b, a));
            }
        }
    }

    #[test]
    fn truncated_nilpotent() {
        let r = ring(json!({"truncated": {"over": {"residue": 2}, "degree": 2}}));
        let t = r.parse_literal(&json!([0, 1])).unwrap();
        assert_eq!(r.mul(t, t), 0);
        assert_eq!(r.literal(r.one()), json!([1, 0]));
    }

    #[test]
    fn oversize_rejected() {
        let spec = RingSpec::Matrix {
            n: 3,
            over: Box::new(RingSpec::Residue(4)),
        };
        assert!(matches!(
            FiniteRing::build(&spec),
            Err(Error::OversizeRing { .. })
        ));
    }

    #[test]
    fn large_ring_without_tables() {
        let r = ring(json!({"matrix": {"n": 2, "over": {"residue": 8}}}));
        assert_eq!(r.size(), 4096);
        let a = r.parse_literal(&json!([[1, 2], [3, 4]])).unwrap();
        let b = r.parse_literal(&json!([[0, 1], [1, 0]])).unwrap();
        assert_eq!(r.literal(r.mul(a, b)), json!([[2, 1], [4, 3]]));
    }

    #[test]
    fn quotient_and_subring() {
        let z4 = ring(json!({"residue": 4}));
        let q = z4.quotient(&[0, 2]);
        assert_eq!(q.size(), 2);
        assert_eq!(q.one(), 1);
        assert_eq!(q.add(1, 1), 0);
        let m = ring(json!({"matrix": {"n": 2, "over": {"residue": 2}}}));
        let e = m.parse_literal(&json!([[1, 0], [0, 0]])).unwrap();
        let corner: Vec<Elem> = m.elements().map(|a| m.mul3(e, a, e)).collect();
        let c = m.subring(&corner, e);
        assert_eq!(c.size(), 2);
        assert_eq!(c.lift(c.one()), Some(e));
    }

    #[test]
    fn literal_round_trip() {
        let r = ring(
            json!({"product": [{"residue": 3}, {"matrix": {"n": 2, "over": {"residue": 2}}}]}),
        );
        for a in r.elements() {
            assert_eq!(r.parse_literal(&r.literal(a)).unwrap(), a);
        }
    }
}
