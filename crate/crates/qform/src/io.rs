use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::{Error, Result};
use crate::forms::{PresentedModule, QuadraticSpace};
use crate::matrix::Mat;
use crate::ring::UnitaryRing;

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::MalformedSpec(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text)
        .map_err(|e| Error::MalformedSpec(format!("{}: {e}", path.display())))
}

pub fn load_ring(path: &Path) -> Result<UnitaryRing> {
    UnitaryRing::from_json(&read_json(path)?)
}

/// Parses a space document; string `ring_ref`s go through `resolve`.
pub fn space_from_json(
    v: &Value,
    resolve: &dyn Fn(&str) -> Result<UnitaryRing>,
) -> Result<QuadraticSpace> {
    let ur = match v.get("ring_ref") {
        Some(Value::String(s)) => resolve(s)?,
        Some(inline @ Value::Object(_)) => UnitaryRing::from_json(inline)?,
        _ => return Err(Error::MalformedSpec("space needs ring_ref".into())),
    };
    let r = ur.ring();
    let gram = Mat::from_json(
        r,
        v.get("gram")
            .ok_or_else(|| Error::MalformedSpec("space needs gram".into()))?,
    )?;
    if let Some(k) = v.get("rank") {
        if k.as_u64() != Some(gram.rows as u64) {
            return Err(Error::ShapeMismatch(
                "rank does not match the gram matrix".into(),
            ));
        }
    }
    let module = match v.get("presentation") {
        Some(p) => PresentedModule::new(r, Mat::from_json(r, p)?)?,
        None => PresentedModule::free(r, gram.rows),
    };
    QuadraticSpace::new(&ur, module, gram)
}

/// Loads a space file; a relative `ring_ref` is taken from the file's directory,
/// and `catalog:<name>` refers to a bundled ring.
pub fn load_space(path: &Path) -> Result<QuadraticSpace> {
    let base: PathBuf = path.parent().map(Path::to_path_buf).unwrap_or_default();
    let resolve = |s: &str| match s.strip_prefix("catalog:") {
        Some(name) => crate::catalog::ring(name),
        None => load_ring(&base.join(s)),
    };
    space_from_json(&read_json(path)?, &resolve)
}

pub fn space_to_json(space: &QuadraticSpace) -> Value {
    let r = space.ring();
    serde_json::json!({
        "ring_ref": space.ur().to_json(),
        "rank": space.rank(),
        "presentation": space.module().proj().to_json(r),
        "gram": space.gram().to_json(r),
    })
}

/// `{"matrix": ..}` or `{"projection": ..}`.
pub fn matrix_from_json(space: &QuadraticSpace, v: &Value) -> Result<Mat> {
    let m = v
        .get("matrix")
        .or_else(|| v.get("projection"))
        .ok_or_else(|| Error::MalformedSpec("expected {\"matrix\": ..}".into()))?;
    let m = Mat::from_json(space.ring(), m)?;
    if m.rows != space.rank() {
        return Err(Error::ShapeMismatch(format!(
            "matrix has {} rows, space has rank {}",
            m.rows,
            space.rank()
        )));
    }
    Ok(m)
}

pub fn load_matrix(space: &QuadraticSpace, path: &Path) -> Result<Mat> {
    matrix_from_json(space, &read_json(path)?)
}

pub fn load_summand(space: &QuadraticSpace, path: &Path) -> Result<PresentedModule> {
    PresentedModule::new(space.ring(), load_matrix(space, path)?)
}
