use serde_json::Value;

use crate::error::{Error, Result};
use crate::forms::QuadraticSpace;
use crate::io::space_from_json;
use crate::ring::UnitaryRing;

const RINGS: &[(&str, &str)] = &[
    ("f2_max", include_str!("../catalog/rings/f2_max.json")),
    ("f2_min", include_str!("../catalog/rings/f2_min.json")),
    ("f2t", include_str!("../catalog/rings/f2t.json")),
    (
        "f2xf2_exchange",
        include_str!("../catalog/rings/f2xf2_exchange.json"),
    ),
    ("f3", include_str!("../catalog/rings/f3.json")),
    ("f3xf3", include_str!("../catalog/rings/f3xf3.json")),
    ("f3xm2f2", include_str!("../catalog/rings/f3xm2f2.json")),
    ("f4", include_str!("../catalog/rings/f4.json")),
    (
        "f4_frobenius",
        include_str!("../catalog/rings/f4_frobenius.json"),
    ),
    ("m2f2", include_str!("../catalog/rings/m2f2.json")),
    ("m2f2t", include_str!("../catalog/rings/m2f2t.json")),
    ("z4", include_str!("../catalog/rings/z4.json")),
];

const SPACES: &[(&str, &str)] = &[
    (
        "f2_hyperbolic",
        include_str!("../catalog/spaces/f2_hyperbolic.json"),
    ),
    (
        "f2_hyperbolic_rank4",
        include_str!("../catalog/spaces/f2_hyperbolic_rank4.json"),
    ),
    ("f2_line", include_str!("../catalog/spaces/f2_line.json")),
    (
        "f2_symplectic_plane",
        include_str!("../catalog/spaces/f2_symplectic_plane.json"),
    ),
    (
        "f2t_hyperbolic",
        include_str!("../catalog/spaces/f2t_hyperbolic.json"),
    ),
    (
        "f2xf2_hyperbolic",
        include_str!("../catalog/spaces/f2xf2_hyperbolic.json"),
    ),
    (
        "f2xf2_line",
        include_str!("../catalog/spaces/f2xf2_line.json"),
    ),
    (
        "f2xf2_plane",
        include_str!("../catalog/spaces/f2xf2_plane.json"),
    ),
    (
        "f3_degenerate_plane",
        include_str!("../catalog/spaces/f3_degenerate_plane.json"),
    ),
    (
        "f3_hyperbolic",
        include_str!("../catalog/spaces/f3_hyperbolic.json"),
    ),
    ("f3_line", include_str!("../catalog/spaces/f3_line.json")),
    (
        "f3_null_line",
        include_str!("../catalog/spaces/f3_null_line.json"),
    ),
    ("f3_plane", include_str!("../catalog/spaces/f3_plane.json")),
    (
        "f3_plane_nonsquare",
        include_str!("../catalog/spaces/f3_plane_nonsquare.json"),
    ),
    ("f3_rank3", include_str!("../catalog/spaces/f3_rank3.json")),
    (
        "f3xf3_half",
        include_str!("../catalog/spaces/f3xf3_half.json"),
    ),
    (
        "f3xf3_line",
        include_str!("../catalog/spaces/f3xf3_line.json"),
    ),
    (
        "f3xm2f2_line",
        include_str!("../catalog/spaces/f3xm2f2_line.json"),
    ),
    (
        "f4_hermitian_hyperbolic",
        include_str!("../catalog/spaces/f4_hermitian_hyperbolic.json"),
    ),
    (
        "f4_hermitian_line",
        include_str!("../catalog/spaces/f4_hermitian_line.json"),
    ),
    (
        "f4_hyperbolic",
        include_str!("../catalog/spaces/f4_hyperbolic.json"),
    ),
    (
        "m2f2_anisotropic",
        include_str!("../catalog/spaces/m2f2_anisotropic.json"),
    ),
    (
        "m2f2_hyperbolic",
        include_str!("../catalog/spaces/m2f2_hyperbolic.json"),
    ),
    (
        "m2f2t_hyperbolic",
        include_str!("../catalog/spaces/m2f2t_hyperbolic.json"),
    ),
    (
        "z4_hyperbolic",
        include_str!("../catalog/spaces/z4_hyperbolic.json"),
    ),
    ("z4_line", include_str!("../catalog/spaces/z4_line.json")),
];

pub fn ring_names() -> impl Iterator<Item = &'static str> {
    RINGS.iter().map(|(n, _)| *n)
}

pub fn space_names() -> impl Iterator<Item = &'static str> {
    SPACES.iter().map(|(n, _)| *n)
}

fn lookup(table: &[(&'static str, &'static str)], name: &str) -> Result<Value> {
    let (_, text) = table
        .iter()
        .find(|(n, _)| *n == name)
        .ok_or_else(|| Error::MalformedSpec(format!("no catalog entry {name:?}")))?;
    serde_json::from_str(text).map_err(|e| Error::MalformedSpec(e.to_string()))
}

pub fn ring_json(name: &str) -> Result<Value> {
    lookup(RINGS, name)
}

pub fn ring(name: &str) -> Result<UnitaryRing> {
    UnitaryRing::from_json(&ring_json(name)?)
}

/// Resolves `ring_ref` entries of catalog spaces by file stem.
pub fn resolve_ring(reference: &str) -> Result<UnitaryRing> {
    let stem = reference
        .rsplit('/')
        .next()
        .unwrap_or(reference)
        .trim_end_matches(".json");
    ring(stem)
}

pub fn space(name: &str) -> Result<QuadraticSpace> {
    space_from_json(&lookup(SPACES, name)?, &resolve_ring)
}

/// Name of the ring a catalog space refers to.
pub fn space_ring_name(name: &str) -> Result<String> {
    let v = lookup(SPACES, name)?;
    let reference = v["ring_ref"].as_str().unwrap_or_default();
    Ok(reference
        .rsplit('/')
        .next()
        .unwrap_or(reference)
        .trim_end_matches(".json")
        .to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_entry_loads() {
        for name in ring_names() {
            ring(name).unwrap();
        }
        for name in space_names() {
            space(name).unwrap();
        }
    }
}
