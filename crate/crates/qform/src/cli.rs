use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use crate::dickson::{
    check_generation_hypotheses, classify, delta_i, populated, reflection_subgroup,
};
use crate::error::{Error, Result};
use crate::forms::{PresentedModule, QuadraticSpace};
use crate::io::{load_matrix, load_space, load_summand, read_json, space_from_json};
use crate::limits;
use crate::matrix::Mat;
use crate::oracle::{
    closure, enumerate_isometries, quasi_reflection_matrices, reflection_matrices, verify_dickson,
    verify_extension, verify_generation, verify_index,
};
use crate::ring::UnitaryRing;
use crate::witt::{
    self, check_conditions, extend, extend_with_reflections, ExtensionProblem, Route,
};

#[derive(Parser, Debug)]
#[command(
    name = "qform",
    version,
    about = "Quadratic forms over finite unitary rings"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Cap on enumerated candidates.
    #[arg(long, global = true)]
    pub bound: Option<u64>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Assert that no randomness is used (always true).
    #[arg(long, global = true)]
    pub seedless: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check the axioms of a unitary ring or parse a space.
    Validate { file: PathBuf },
    /// Classify the simple factors of a ring or space.
    Classify { file: PathBuf },
    /// Extend an isometry between summands to the whole space.
    Extend(ExtendArgs),
    /// Cancel a unimodular summand from an isometry of orthogonal sums.
    Cancel(CancelArgs),
    /// Dickson invariant of an isometry, or the reflection subgroup report.
    Dickson(DicksonArgs),
    /// Orders of the isometry group and its reflection subgroups.
    Group {
        #[arg(long)]
        space: PathBuf,
    },
    /// Brute-force verification against the oracle.
    OracleVerify(VerifyArgs),
    /// Oracle subcommands (`oracle verify`).
    Oracle {
        #[command(subcommand)]
        action: OracleAction,
    },
}

#[derive(Subcommand, Debug)]
pub enum OracleAction {
    Verify(VerifyArgs),
}

#[derive(Args, Debug)]
pub struct ExtendArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long)]
    pub q: PathBuf,
    #[arg(long)]
    pub s: PathBuf,
    #[arg(long)]
    pub iso: PathBuf,
    /// Summand V; when given, only the reflection route is tried.
    #[arg(long)]
    pub v: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct CancelArgs {
    #[arg(long)]
    pub base: PathBuf,
    #[arg(long)]
    pub s1: PathBuf,
    #[arg(long)]
    pub s2: PathBuf,
    #[arg(long)]
    pub iso: PathBuf,
}

#[derive(Args, Debug)]
pub struct DicksonArgs {
    #[arg(long)]
    pub space: PathBuf,
    /// Isometry to evaluate; without it the subgroup report is produced.
    #[arg(long)]
    pub iso: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Check {
    Extension,
    Index,
    Dickson,
    Generation,
    All,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long)]
    pub space: PathBuf,
    #[arg(long, value_enum, default_value_t = Check::All)]
    pub what: Check,
}

/// A report and whether the mathematical outcome is a success.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub body: Value,
    pub ok: bool,
}

impl Report {
    fn ok(body: Value) -> Report {
        Report { body, ok: true }
    }
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report types serialize")
}

fn route_name(route: Route) -> &'static str {
    match route {
        Route::WittI => "witt-I",
        Route::WittIIAugmented { .. } => "witt-II-augmented",
    }
}

fn is_ring_document(v: &Value) -> bool {
    v.get("ring").is_some() && v.get("gram").is_none()
}

pub fn validate_value(
    doc: &Value,
    resolve: &dyn Fn(&str) -> Result<UnitaryRing>,
) -> Result<Report> {
    if is_ring_document(doc) {
        let report = UnitaryRing::validate_json(doc)?;
        return Ok(Report {
            ok: report.is_valid(),
            body: json!({ "kind": "ring", "violations": report.violations }),
        });
    }
    let space = space_from_json(doc, resolve)?;
    Ok(Report::ok(json!({
        "kind": "space",
        "rank": space.rank(),
        "cardinality": space.elements()?.len(),
        "unimodular": space.is_unimodular()?,
        "violations": [],
    })))
}

pub fn classify_ring(ur: &UnitaryRing) -> Result<Report> {
    Ok(Report::ok(json!({ "factors": to_value(&classify(ur)?) })))
}

pub fn classify_space(space: &QuadraticSpace) -> Result<Report> {
    let unimodular = space.is_unimodular()?;
    let mut body = json!({
        "factors": to_value(&classify(space.ur())?),
        "populated": populated(space)?,
        "unimodular": unimodular,
    });
    if unimodular {
        body["generation_hypotheses"] = hypothesis_value(check_generation_hypotheses(space))?;
        body["subgroup"] = match reflection_subgroup(space) {
            Ok(rep) => to_value(&rep),
            Err(err @ Error::HypothesisViolation { .. }) => {
                json!({ "hypothesis_violation": err.to_string() })
            }
            Err(err) => return Err(err),
        };
    }
    Ok(Report::ok(body))
}

fn hypothesis_value(r: Result<()>) -> Result<Value> {
    match r {
        Ok(()) => Ok(json!("hold")),
        Err(err @ Error::HypothesisViolation { .. }) => Ok(json!(err.to_string())),
        Err(err) => Err(err),
    }
}

pub fn extend_report(
    space: &QuadraticSpace,
    q: PresentedModule,
    s: PresentedModule,
    iso: &Mat,
    v: Option<PresentedModule>,
) -> Result<Report> {
    let (prob, result) = match v {
        Some(v) => {
            let prob = ExtensionProblem::new(space, q, s, v, iso)?;
            let res = extend_with_reflections(&prob);
            (prob, res)
        }
        None => {
            let prob = ExtensionProblem::with_full_v(space, q, s, iso)?;
            let res = extend(&prob);
            (prob, res)
        }
    };
    match result {
        Ok(res) => {
            let r = space.ring();
            let mut body = json!({
                "phi": res.phi.to_json(r),
                "route": route_name(res.route),
            });
            if let Some(factors) = &res.factors {
                body["factors"] = Value::Array(factors.iter().map(|f| f.to_json()).collect());
            }
            Ok(Report::ok(body))
        }
        Err(err @ Error::ConditionViolation(_)) => Ok(Report {
            ok: false,
            body: json!({
                "error": err.to_string(),
                "conditions": to_value(&check_conditions(&prob)?),
            }),
        }),
        Err(err) => Err(err),
    }
}

pub fn cancel_report(
    base: &QuadraticSpace,
    s1: &QuadraticSpace,
    s2: &QuadraticSpace,
    iso: &Mat,
) -> Result<Report> {
    let m = witt::cancel(base, s1, s2, iso)?;
    Ok(Report::ok(json!({ "isometry": m.to_json(base.ring()) })))
}

pub fn dickson_report(space: &QuadraticSpace, iso: Option<&Mat>) -> Result<Report> {
    if let Some(psi) = iso {
        if !crate::forms::check_isometry(psi, space, space)? {
            return Err(Error::NotAnIsometry);
        }
        let ctx = crate::dickson::DicksonContext::new(space)?;
        return Ok(Report::ok(json!({
            "index_set": ctx.index_set,
            "delta": delta_i(space, psi)?,
        })));
    }
    let profiles = to_value(&classify(space.ur())?);
    match reflection_subgroup(space) {
        Ok(mut rep) => {
            let v = verify_index(space)?;
            rep.measured_index = Some(v.measured_index);
            let mut body = to_value(&rep);
            body["factors"] = profiles;
            Ok(Report {
                ok: v.passed(),
                body,
            })
        }
        Err(err @ Error::HypothesisViolation { .. }) => Ok(Report {
            ok: false,
            body: json!({ "factors": profiles, "hypothesis_violation": err.to_string() }),
        }),
        Err(err) => Err(err),
    }
}

pub fn group_report(space: &QuadraticSpace) -> Result<Report> {
    let group = enumerate_isometries(space)?;
    let refl = closure(space, &reflection_matrices(space)?)?;
    let quasi = closure(space, &quasi_reflection_matrices(space)?)?;
    Ok(Report::ok(json!({
        "order": group.order(),
        "reflection_subgroup_order": refl.order(),
        "quasi_reflection_subgroup_order": quasi.order(),
    })))
}

pub fn verify_report(space: &QuadraticSpace, what: Check) -> Result<Report> {
    let mut body = serde_json::Map::new();
    let mut ok = true;
    let unimodular = space.is_unimodular()?;
    let want = |c: Check| what == c || what == Check::All;
    if want(Check::Extension) && unimodular {
        let v = verify_extension(space)?;
        ok &= v.passed();
        body.insert("extension".into(), to_value(&v));
    }
    if want(Check::Generation) && unimodular {
        let v = verify_generation(space)?;
        ok &= v.passed();
        body.insert("generation".into(), to_value(&v));
    }
    if want(Check::Index) && unimodular {
        let v = verify_index(space)?;
        ok &= v.passed();
        body.insert("index".into(), to_value(&v));
    }
    if want(Check::Dickson) && unimodular {
        let v = verify_dickson(space)?;
        ok &= v.passed();
        body.insert("dickson".into(), to_value(&v));
    }
    if body.is_empty() {
        return Err(Error::NotUnimodular);
    }
    body.insert("passed".into(), json!(ok));
    Ok(Report {
        body: Value::Object(body),
        ok,
    })
}

fn file_resolver(path: &Path) -> impl Fn(&str) -> Result<UnitaryRing> {
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    move |s: &str| match s.strip_prefix("catalog:") {
        Some(name) => crate::catalog::ring(name),
        None => crate::io::load_ring(&base.join(s)),
    }
}

fn load_any_ring(path: &Path) -> Result<std::result::Result<UnitaryRing, QuadraticSpace>> {
    let doc = read_json(path)?;
    if is_ring_document(&doc) {
        Ok(Ok(UnitaryRing::from_json(&doc)?))
    } else {
        Ok(Err(space_from_json(&doc, &file_resolver(path))?))
    }
}

fn dispatch(cmd: &Command) -> Result<Report> {
    match cmd {
        Command::Validate { file } => validate_value(&read_json(file)?, &file_resolver(file)),
        Command::Classify { file } => match load_any_ring(file)? {
            Ok(ur) => classify_ring(&ur),
            Err(space) => classify_space(&space),
        },
        Command::Extend(a) => {
            let space = load_space(&a.space)?;
            let v = a.v.as_ref().map(|p| load_summand(&space, p)).transpose()?;
            extend_report(
                &space,
                load_summand(&space, &a.q)?,
                load_summand(&space, &a.s)?,
                &load_matrix(&space, &a.iso)?,
                v,
            )
        }
        Command::Cancel(a) => {
            let base = load_space(&a.base)?;
            let s1 = load_space(&a.s1)?;
            let s2 = load_space(&a.s2)?;
            let iso = Mat::from_json(
                base.ring(),
                read_json(&a.iso)?
                    .get("matrix")
                    .ok_or_else(|| Error::MalformedSpec("expected {\"matrix\": ..}".into()))?,
            )?;
            cancel_report(&base, &s1, &s2, &iso)
        }
        Command::Dickson(a) => {
            let space = load_space(&a.space)?;
            let iso = a.iso.as_ref().map(|p| load_matrix(&space, p)).transpose()?;
            dickson_report(&space, iso.as_ref())
        }
        Command::Group { space } => group_report(&load_space(space)?),
        Command::OracleVerify(a)
        | Command::Oracle {
            action: OracleAction::Verify(a),
        } => verify_report(&load_space(&a.space)?, a.what),
    }
}

/// Exit status: 0 success, 1 mathematical failure, 2 input error.
pub fn exit_code(result: &Result<Report>) -> i32 {
    match result {
        Ok(r) if r.ok => 0,
        Ok(_) => 1,
        Err(e) if e.is_input_error() => 2,
        Err(_) => 1,
    }
}

pub fn error_value(err: &Error) -> Value {
    json!({ "error": err.to_string(), "input_error": err.is_input_error() })
}

pub fn render(value: &Value, format: Format) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(value).expect("JSON serializes"),
        Format::Text => {
            let mut out = String::new();
            render_text(value, "", &mut out);
            out.trim_end().to_string()
        }
    }
}

fn render_text(value: &Value, prefix: &str, out: &mut String) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let key = if prefix.is_empty() {
                    k.clone()
                } else {
                    format!("{prefix}.{k}")
                };
                render_text(v, &key, out);
            }
        }
        Value::Array(items) if items.iter().any(|x| x.is_object()) => {
            for (i, v) in items.iter().enumerate() {
                render_text(v, &format!("{prefix}[{i}]"), out);
            }
        }
        other => {
            out.push_str(&format!("{prefix}: {other}\n"));
        }
    }
}

/// Runs one job; returns the exit status and the rendered report.
pub fn run(cli: &Cli) -> (i32, String) {
    if let Some(n) = cli.bound {
        limits::set_enumeration_bound(n);
    }
    let result = dispatch(&cli.command);
    let code = exit_code(&result);
    let value = match &result {
        Ok(r) => r.body.clone(),
        Err(e) => error_value(e),
    };
    (code, render(&value, cli.format))
}
