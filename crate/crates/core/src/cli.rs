//! Batch driver: one JSON job in, JSON/CSV/SVG results plus a run manifest
//! out.
//!
//! Exit codes: 0 on success, 1 on a negative verdict (rejected certificate,
//! no certificate found, failed self-checks), 2 on usage, schema, IO or
//! computation errors. Errors are reported as a JSON object on stderr.

use crate::cert::{search_certificate, verify_certificate, Certificate, SearchOptions, Verdict};
use crate::io::{sha256_hex, to_json_string, write_csv};
use crate::knot_reps::{
    find_splice_rep, knot_group, sample_image_curve, solve_rep_on_slice, splice_presentation, ImageOptions, KnotSpec,
    Presentation, SpliceOptions,
};
use crate::pillowcase::{
    graph_csv, graph_svg, has_essential_cycle, separates, CylinderCurve, PillowcasePoint, SvgOptions,
};
use crate::torus_dynamics::{
    build_shearing_program, measure_deviation, moser_correct, BuildParams, FieldConfig, IsotopySpec, MoserOptions,
};
use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Debug, Parser)]
#[command(name = "torusrep", version, about = "Torus isotopies, pillowcase images and SL(2, Z/p) certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
struct IoArgs {
    /// JSON job file.
    #[arg(long)]
    input: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Deterministic scheduling and no timing data in the outputs.
    #[arg(long)]
    reproducible: bool,
}

#[derive(Debug, Clone, Subcommand)]
enum Command {
    /// Approximate the flow of a field by a shearing program.
    ApproxIsotopy {
        #[command(flatten)]
        io: IoArgs,
        /// Target uniform error, overriding the job
        #[arg(long)]
        eps: Option<f64>,
    },
    /// Sample the pillowcase image of a knot's representation variety.
    PillowcaseImage {
        #[command(flatten)]
        io: IoArgs,
        /// Number of samples, overriding the job
        #[arg(long)]
        samples: Option<usize>,
        /// Grid resolution, overriding the job
        #[arg(long)]
        resolution: Option<usize>,
        /// Random seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Representations whose boundary holonomy lies on a curve.
    SliceReps {
        #[command(flatten)]
        io: IoArgs,
        /// Number of samples, overriding the job
        #[arg(long)]
        samples: Option<usize>,
        /// Random seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// An irreducible representation of a spliced group.
    SpliceRep {
        #[command(flatten)]
        io: IoArgs,
        /// Number of samples, overriding the job
        #[arg(long)]
        samples: Option<usize>,
        /// Random seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Check an SL(2, Z/p) certificate.
    VerifyCert {
        #[command(flatten)]
        io: IoArgs,
    },
    /// Search for an SL(2, Z/p) certificate.
    SearchCert {
        #[command(flatten)]
        io: IoArgs,
        /// Comma-separated primes to try
        #[arg(long, value_delimiter = ',')]
        primes: Option<Vec<u64>>,
        /// Random seed
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Correct an isotopy to an area-preserving one.
    Moser {
        #[command(flatten)]
        io: IoArgs,
        /// Grid resolution, overriding the job
        #[arg(long)]
        resolution: Option<usize>,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::ApproxIsotopy { .. } => "approx-isotopy",
            Command::PillowcaseImage { .. } => "pillowcase-image",
            Command::SliceReps { .. } => "slice-reps",
            Command::SpliceRep { .. } => "splice-rep",
            Command::VerifyCert { .. } => "verify-cert",
            Command::SearchCert { .. } => "search-cert",
            Command::Moser { .. } => "moser",
        }
    }

    fn io(&self) -> &IoArgs {
        match self {
            Command::ApproxIsotopy { io, .. }
            | Command::PillowcaseImage { io, .. }
            | Command::SliceReps { io, .. }
            | Command::SpliceRep { io, .. }
            | Command::VerifyCert { io }
            | Command::SearchCert { io, .. }
            | Command::Moser { io, .. } => io,
        }
    }
}

#[derive(Debug)]
struct CliError {
    kind: &'static str,
    message: String,
}

impl CliError {
    fn usage(m: impl ToString) -> Self {
        Self { kind: "usage", message: m.to_string() }
    }

    fn io(m: impl ToString) -> Self {
        Self { kind: "io", message: m.to_string() }
    }

    fn schema(m: impl ToString) -> Self {
        Self { kind: "schema", message: m.to_string() }
    }

    fn compute(m: impl ToString) -> Self {
        Self { kind: "compute", message: m.to_string() }
    }
}

type Tolerances = BTreeMap<String, f64>;

/// Splits `--tol.KEY=VAL` flags off the argument list.
fn extract_tolerances(argv: Vec<OsString>) -> Result<(Vec<OsString>, Tolerances), CliError> {
    let mut rest = Vec::with_capacity(argv.len());
    let mut tols = Tolerances::new();
    for a in argv {
        let Some(spec) = a.to_str().and_then(|s| s.strip_prefix("--tol.")) else {
            rest.push(a);
            continue;
        };
        let (key, val) = spec
            .split_once('=')
            .ok_or_else(|| CliError::usage(format!("expected --tol.KEY=VALUE, got --tol.{spec}")))?;
        let v: f64 = val
            .parse()
            .map_err(|_| CliError::usage(format!("tolerance {key}: cannot parse {val:?}")))?;
        if !(v > 0.0 && v.is_finite()) {
            return Err(CliError::usage(format!("tolerance {key} must be positive and finite")));
        }
        tols.insert(key.to_string(), v);
    }
    Ok((rest, tols))
}

/// Applies each tolerance through `set`, which returns false for keys the
/// subcommand does not know.
fn apply_tolerances(tols: &Tolerances, mut set: impl FnMut(&str, f64) -> bool, allowed: &[&str]) -> Result<(), CliError> {
    for (k, &v) in tols {
        if !set(k, v) {
            return Err(CliError::usage(format!(
                "unknown tolerance key {k:?}; accepted: {}",
                if allowed.is_empty() { "none".to_string() } else { allowed.join(", ") }
            )));
        }
    }
    Ok(())
}

fn parse_job<T: for<'de> Deserialize<'de>>(bytes: &[u8]) -> Result<T, CliError> {
    serde_json::from_slice(bytes).map_err(CliError::schema)
}

fn json_bytes<T: Serialize + ?Sized>(v: &T) -> Result<Vec<u8>, CliError> {
    to_json_string(v).map(String::into_bytes).map_err(CliError::compute)
}

fn csv_bytes(header: &[&str], rows: &[Vec<f64>]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_csv(&mut buf, header, rows).map_err(CliError::io)?;
    Ok(buf)
}

struct Outcome {
    files: Vec<(&'static str, Vec<u8>)>,
    parameters: Value,
    summary: Value,
    exit: i32,
}

#[derive(Serialize)]
struct OutputRecord {
    name: &'static str,
    sha256: String,
    bytes: usize,
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    subcommand: &'a str,
    input_path: String,
    input_sha256: String,
    parameters: &'a Value,
    tolerances: &'a Tolerances,
    reproducible: bool,
    outputs: Vec<OutputRecord>,
    summary: &'a Value,
    exit_code: i32,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_time_seconds: Option<f64>,
}

/// Runs the command line `argv` (including the program name) and returns
/// the process exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    match run_inner(argv) {
        Ok(code) => code,
        Err(e) => {
            let body = json!({ "error": { "kind": e.kind, "message": e.message } });
            eprintln!("{body}");
            2
        }
    }
}

fn run_inner(argv: Vec<OsString>) -> Result<i32, CliError> {
    let (argv, tols) = extract_tolerances(argv)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return Ok(0);
            }
            return Err(CliError::usage(e.to_string().trim_end()));
        }
    };
    let start = Instant::now();
    let io = cli.command.io().clone();
    let input = std::fs::read(&io.input).map_err(|e| CliError::io(format!("{}: {e}", io.input.display())))?;
    let outcome = match &cli.command {
        Command::ApproxIsotopy { eps, .. } => approx_isotopy(&input, *eps, &tols)?,
        Command::PillowcaseImage {
            samples,
            resolution,
            seed,
            ..
        } => pillowcase_image(&input, *samples, *resolution, *seed, &tols, io.reproducible)?,
        Command::SliceReps { samples, seed, .. } => slice_reps(&input, *samples, *seed, &tols)?,
        Command::SpliceRep { samples, seed, .. } => splice_rep(&input, *samples, *seed, &tols)?,
        Command::VerifyCert { .. } => verify_cert(&input, &tols, io.reproducible)?,
        Command::SearchCert { primes, seed, .. } => search_cert(&input, primes.clone(), *seed, &tols, io.reproducible)?,
        Command::Moser { resolution, .. } => moser(&input, *resolution, &tols)?,
    };
    write_outputs(&io.out, &outcome.files)?;
    let manifest = Manifest {
        tool: "torusrep",
        version: crate::VERSION,
        subcommand: cli.command.name(),
        input_path: io.input.display().to_string(),
        input_sha256: sha256_hex(&input),
        parameters: &outcome.parameters,
        tolerances: &tols,
        reproducible: io.reproducible,
        outputs: outcome
            .files
            .iter()
            .map(|(name, bytes)| OutputRecord {
                name,
                sha256: sha256_hex(bytes),
                bytes: bytes.len(),
            })
            .collect(),
        summary: &outcome.summary,
        exit_code: outcome.exit,
        wall_time_seconds: (!io.reproducible).then(|| start.elapsed().as_secs_f64()),
    };
    write_outputs(&io.out, &[("manifest.json", json_bytes(&manifest)?)])?;
    println!("{}", to_json_string(&outcome.summary).map_err(CliError::compute)?.trim_end());
    Ok(outcome.exit)
}

fn write_outputs(dir: &Path, files: &[(&'static str, Vec<u8>)]) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(format!("{}: {e}", dir.display())))?;
    for (name, bytes) in files {
        let path = dir.join(name);
        std::fs::write(&path, bytes).map_err(|e| CliError::io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

fn to_value<T: Serialize>(v: &T) -> Result<Value, CliError> {
    serde_json::to_value(v).map_err(CliError::compute)
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct VerificationGrid {
    grid: usize,
    times: usize,
    /// Largest RK4 step of the reference flow.
    max_dt: f64,
}

impl Default for VerificationGrid {
    fn default() -> Self {
        Self {
            grid: 64,
            times: 21,
            max_dt: 1e-3,
        }
    }
}

fn default_eps() -> f64 {
    0.05
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ApproxJob {
    field: FieldConfig,
    #[serde(default = "default_eps")]
    eps: f64,
    #[serde(default)]
    params: BuildParams,
    #[serde(default)]
    verification: VerificationGrid,
}

/// Integration roundoff allowed on top of the certified bound.
const ROUNDOFF_SLACK: f64 = 1e-12;

fn approx_isotopy(input: &[u8], eps: Option<f64>, tols: &Tolerances) -> Result<Outcome, CliError> {
    let mut job: ApproxJob = parse_job(input)?;
    if let Some(e) = eps {
        job.eps = e;
    }
    apply_tolerances(
        tols,
        |k, v| match k {
            "div_tol" => {
                job.params.div_tol = v;
                true
            }
            "max_dt" => {
                job.verification.max_dt = v;
                true
            }
            _ => false,
        },
        &["div_tol", "max_dt"],
    )?;
    let field = job.field.build(job.params.div_tol).map_err(CliError::compute)?;
    let (program, cert) = build_shearing_program(&field, job.eps, &job.params).map_err(CliError::compute)?;
    let v = job.verification;
    if v.grid == 0 || v.times < 2 {
        return Err(CliError::schema("verification needs grid ≥ 1 and times ≥ 2"));
    }
    let times: Vec<f64> = (0..v.times).map(|r| r as f64 / (v.times - 1) as f64).collect();
    let (report, samples) = measure_deviation(&field, &program, v.grid, &times, v.max_dt);
    let rows: Vec<Vec<f64>> = samples
        .iter()
        .map(|&(t, p, a, b)| {
            vec![t, p[0], p[1], a[0], a[1], b[0], b[1], crate::torus_dynamics::point::torus_distance(a, b)]
        })
        .collect();
    let sound = report.max <= cert.total + ROUNDOFF_SLACK;
    let summary = json!({
        "eps": job.eps,
        "certificate_total": cert.total,
        "max_deviation": report.max,
        "within_certificate": sound,
        "slices": cert.n,
        "steps": program.step_count(),
    });
    Ok(Outcome {
        files: vec![
            ("program.json", json_bytes(&program)?),
            ("certificate.json", json_bytes(&cert)?),
            ("deviation.json", json_bytes(&report)?),
            (
                "deviation.csv",
                csv_bytes(
                    &["t", "x", "y", "program_x", "program_y", "reference_x", "reference_y", "distance"],
                    &rows,
                )?,
            ),
        ],
        parameters: to_value(&job)?,
        summary,
        exit: if sound { 0 } else { 1 },
    })
}

fn image_tolerance(o: &mut ImageOptions, k: &str, v: f64) -> bool {
    match k {
        "rep_tol" => o.rep_tol = v,
        "irreducible_tol" => o.irreducible_tol = v,
        "endpoint_tol" => o.endpoint_tol = v,
        "jump_tol" => o.jump_tol = v,
        "lm_tol" => o.lm.tol = v,
        _ => return false,
    }
    true
}

const IMAGE_TOLERANCES: &[&str] = &["rep_tol", "irreducible_tol", "endpoint_tol", "jump_tol", "lm_tol"];

fn override_image(o: &mut ImageOptions, samples: Option<usize>, seed: Option<u64>) {
    if let Some(n) = samples {
        o.n_samples = n;
    }
    if let Some(s) = seed {
        o.seed = s;
    }
}

fn default_resolutions() -> Vec<usize> {
    vec![512, 1024]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ImageJob {
    knot: KnotSpec,
    #[serde(default)]
    options: ImageOptions,
    /// Raster resolutions for the separation test.
    #[serde(default = "default_resolutions")]
    resolutions: Vec<usize>,
}

fn pillowcase_image(
    input: &[u8],
    samples: Option<usize>,
    resolution: Option<usize>,
    seed: Option<u64>,
    tols: &Tolerances,
    reproducible: bool,
) -> Result<Outcome, CliError> {
    let mut job: ImageJob = parse_job(input)?;
    override_image(&mut job.options, samples, seed);
    if let Some(r) = resolution {
        job.resolutions = vec![r];
    }
    apply_tolerances(tols, |k, v| image_tolerance(&mut job.options, k, v), IMAGE_TOLERANCES)?;
    let curve = sample_image_curve(&job.knot, &job.options).map_err(CliError::compute)?;
    let graph = curve.graph();
    let p = PillowcasePoint::P;
    let q = PillowcasePoint::Q;
    let mut separation = Vec::new();
    for &r in &job.resolutions {
        let s = separates(&graph, p, q, r).map_err(CliError::compute)?;
        separation.push(json!({ "resolution": r, "separates": s }));
    }
    let essential = job
        .resolutions
        .iter()
        .max()
        .map(|&r| has_essential_cycle(&graph, r));
    let arcs: Vec<Value> = curve
        .arcs
        .iter()
        .zip(curve.arc_closures(job.options.max_edge))
        .map(|(a, closure)| {
            json!({
                "vertices": a.curve.vertices.len(),
                "endpoints": a.endpoints(),
                "closure_winding": closure.winding_number().ok(),
            })
        })
        .collect();
    let svg = graph_svg(
        &graph,
        &SvgOptions {
            reproducible,
            title: Some(curve.knot.clone()),
            ..SvgOptions::default()
        },
    );
    let summary = json!({
        "knot": curve.knot,
        "arcs": arcs,
        "notes": curve.notes,
        "separation": separation,
        "essential_cycle": essential,
    });
    Ok(Outcome {
        files: vec![
            ("image.json", json_bytes(&curve)?),
            ("image.csv", graph_csv(&graph).into_bytes()),
            ("image.svg", svg.into_bytes()),
        ],
        parameters: to_value(&job)?,
        summary,
        exit: 0,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum SliceSpec {
    /// The circle α = const.
    VerticalCircle { alpha: f64 },
    Segment { from: [f64; 2], to: [f64; 2] },
    Polyline { vertices: Vec<[f64; 2]>, closed: bool },
}

impl SliceSpec {
    fn curve(&self, max_edge: f64) -> CylinderCurve {
        match self {
            SliceSpec::VerticalCircle { alpha } => CylinderCurve::vertical_circle(*alpha, max_edge),
            SliceSpec::Segment { from, to } => CylinderCurve::segment(*from, *to, max_edge),
            SliceSpec::Polyline { vertices, closed } => CylinderCurve {
                vertices: vertices.clone(),
                closed: *closed,
            },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SliceJob {
    knot: KnotSpec,
    slice: SliceSpec,
    #[serde(default)]
    options: ImageOptions,
}

fn slice_reps(input: &[u8], samples: Option<usize>, seed: Option<u64>, tols: &Tolerances) -> Result<Outcome, CliError> {
    let mut job: SliceJob = parse_job(input)?;
    override_image(&mut job.options, samples, seed);
    apply_tolerances(tols, |k, v| image_tolerance(&mut job.options, k, v), IMAGE_TOLERANCES)?;
    let curve = job.slice.curve(job.options.max_edge);
    let reps = solve_rep_on_slice(&job.knot, &curve, &job.options).map_err(CliError::compute)?;
    let rows: Vec<Vec<f64>> = reps
        .iter()
        .map(|r| {
            vec![
                r.alpha,
                r.beta,
                r.arc.map_or(-1.0, |a| a as f64),
                r.assignment.residual,
                r.assignment.noncommutativity(),
            ]
        })
        .collect();
    let summary = json!({
        "knot": job.knot.name(),
        "count": reps.len(),
        "irreducible": reps.iter().filter(|r| r.arc.is_some()).count(),
    });
    Ok(Outcome {
        files: vec![
            ("reps.json", json_bytes(&reps)?),
            (
                "reps.csv",
                csv_bytes(&["alpha", "beta", "arc", "residual", "noncommutativity"], &rows)?,
            ),
        ],
        parameters: to_value(&job)?,
        summary,
        exit: 0,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpliceJob {
    left: KnotSpec,
    right: KnotSpec,
    #[serde(default)]
    options: SpliceOptions,
}

fn splice_rep(input: &[u8], samples: Option<usize>, seed: Option<u64>, tols: &Tolerances) -> Result<Outcome, CliError> {
    let mut job: SpliceJob = parse_job(input)?;
    override_image(&mut job.options.image, samples, seed);
    let mut allowed = IMAGE_TOLERANCES.to_vec();
    allowed.extend(["newton_tol", "irreducible_threshold"]);
    apply_tolerances(
        tols,
        |k, v| match k {
            "newton_tol" => {
                job.options.newton_tol = v;
                true
            }
            "irreducible_threshold" => {
                job.options.irreducible_threshold = v;
                true
            }
            _ => image_tolerance(&mut job.options.image, k, v),
        },
        &allowed,
    )?;
    let rep = find_splice_rep(&job.left, &job.right, &job.options).map_err(CliError::compute)?;
    let summary = json!({
        "splice": rep.splice.presentation.id,
        "residual": rep.assignment.residual,
        "alpha": rep.alpha,
        "beta": rep.beta,
        "irreducible": rep.irreducible,
        "left_irreducible": rep.left_irreducible,
        "right_irreducible": rep.right_irreducible,
    });
    Ok(Outcome {
        files: vec![("splice_rep.json", json_bytes(&rep)?)],
        parameters: to_value(&job)?,
        summary,
        exit: 0,
    })
}

/// Where the group presentation of a certificate job comes from.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum GroupSource {
    Presentation { presentation: Presentation },
    Knot { knot: KnotSpec },
    Splice { left: KnotSpec, right: KnotSpec },
}

impl GroupSource {
    fn presentation(&self) -> Result<Presentation, CliError> {
        let p = match self {
            GroupSource::Presentation { presentation } => presentation.clone(),
            GroupSource::Knot { knot } => knot_group(knot).map_err(CliError::compute)?.presentation,
            GroupSource::Splice { left, right } => {
                splice_presentation(left, right).map_err(CliError::compute)?.presentation
            }
        };
        p.validate().map_err(CliError::schema)?;
        Ok(p)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VerifyJob {
    group: GroupSource,
    certificate: Certificate,
}

fn verdict_summary(v: &Verdict) -> Value {
    match v {
        Verdict::Accept => json!({ "verdict": "accept" }),
        Verdict::Reject(r) => json!({ "verdict": "reject", "reason": r.to_string(), "detail": r }),
    }
}

fn verify_cert(input: &[u8], tols: &Tolerances, reproducible: bool) -> Result<Outcome, CliError> {
    let job: VerifyJob = parse_job(input)?;
    apply_tolerances(tols, |_, _| false, &[])?;
    let pres = job.group.presentation()?;
    let v = verify_certificate(&pres, &job.certificate);
    let mut result = verdict_summary(&v.verdict);
    result["multiplications"] = json!(v.multiplications);
    result["relator_length"] = json!(pres.total_length());
    if !reproducible {
        result["elapsed_seconds"] = json!(v.elapsed.as_secs_f64());
    }
    Ok(Outcome {
        files: vec![("verification.json", json_bytes(&result)?)],
        parameters: to_value(&job)?,
        exit: if v.verdict.is_accept() { 0 } else { 1 },
        summary: result,
    })
}

fn default_primes() -> Vec<u64> {
    vec![2, 3, 5, 7, 11, 13]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SearchJob {
    group: GroupSource,
    #[serde(default = "default_primes")]
    primes: Vec<u64>,
    #[serde(default)]
    options: SearchOptions,
}

fn search_cert(
    input: &[u8],
    primes: Option<Vec<u64>>,
    seed: Option<u64>,
    tols: &Tolerances,
    reproducible: bool,
) -> Result<Outcome, CliError> {
    let mut job: SearchJob = parse_job(input)?;
    if let Some(p) = primes {
        job.primes = p;
    }
    if let Some(s) = seed {
        job.options.seed = s;
    }
    job.options.reproducible |= reproducible;
    apply_tolerances(tols, |_, _| false, &[])?;
    let pres = job.group.presentation()?;
    let report = search_certificate(&pres, &job.primes, &job.options).map_err(CliError::compute)?;
    let mut files = Vec::new();
    let verdict = report.certificate.as_ref().map(|c| {
        let v = verify_certificate(&pres, c);
        verdict_summary(&v.verdict)
    });
    if let Some(c) = &report.certificate {
        files.push(("certificate.json", json_bytes(c)?));
    }
    let summary = json!({
        "presentation_id": pres.id,
        "found": report.certificate.is_some(),
        "p": report.certificate.as_ref().map(|c| c.p.to_string()),
        "nodes": report.nodes,
        "exhausted_budget": report.exhausted_budget,
        "verification": verdict,
    });
    files.push(("search.json", json_bytes(&summary)?));
    Ok(Outcome {
        files,
        parameters: to_value(&job)?,
        exit: if report.certificate.is_some() { 0 } else { 1 },
        summary,
    })
}

fn default_sample_grid() -> usize {
    16
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MoserJob {
    isotopy: IsotopySpec,
    #[serde(default)]
    options: MoserOptions,
    /// Lattice size for the exported trajectories.
    #[serde(default = "default_sample_grid")]
    sample_grid: usize,
}

fn moser(input: &[u8], resolution: Option<usize>, tols: &Tolerances) -> Result<Outcome, CliError> {
    let mut job: MoserJob = parse_job(input)?;
    if let Some(m) = resolution {
        job.options.grid = m;
    }
    apply_tolerances(
        tols,
        |k, v| {
            let o = &mut job.options;
            match k {
                "area_tol" => o.area_tol = v,
                "curve_tol" => o.curve_tol = v,
                "poisson_tol" => o.poisson_tol = v,
                "form_floor" => o.form_floor = v,
                _ => return false,
            }
            true
        },
        &["area_tol", "curve_tol", "poisson_tol", "form_floor"],
    )?;
    let result = moser_correct(job.isotopy.isotopy(), job.options).map_err(CliError::compute)?;
    let checks = result.check();
    let g = job.sample_grid;
    let mut rows = Vec::new();
    for (k, t) in result.times().into_iter().enumerate() {
        for idx in 0..g * g {
            let p = crate::torus_dynamics::point::grid_point(idx / g, idx % g, g);
            let a = result.eval(k, p);
            let b = result.input(t, p);
            rows.push(vec![t, p[0], p[1], a[0], a[1], b[0], b[1]]);
        }
    }
    let summary = json!({
        "passed": checks.passed,
        "max_area_defect": checks.area_defect.iter().cloned().fold(0.0, f64::max),
        "max_hausdorff": checks.hausdorff.iter().cloned().fold(0.0, f64::max),
        "equivariance_defect": checks.equivariance_defect,
    });
    Ok(Outcome {
        files: vec![
            ("checks.json", json_bytes(&checks)?),
            (
                "trajectories.csv",
                csv_bytes(&["t", "x", "y", "psi_x", "psi_y", "phi_x", "phi_y"], &rows)?,
            ),
        ],
        parameters: to_value(&job)?,
        exit: if checks.passed { 0 } else { 1 },
        summary,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tolerance_flags_are_extracted() {
        let argv: Vec<OsString> = ["torusrep", "moser", "--tol.area_tol=1e-4", "--out", "x"]
            .iter()
            .map(OsString::from)
            .collect();
        let (rest, tols) = extract_tolerances(argv).unwrap();
        assert_eq!(rest.len(), 4);
        assert_eq!(tols["area_tol"], 1e-4);
    }

    #[test]
    fn malformed_tolerance_is_usage_error() {
        for bad in ["--tol.area_tol", "--tol.x=abc", "--tol.x=-1"] {
            let argv = vec![OsString::from("torusrep"), OsString::from(bad)];
            assert_eq!(extract_tolerances(argv).unwrap_err().kind, "usage");
        }
    }

    #[test]
    fn unknown_tolerance_key_is_rejected() {
        let mut tols = Tolerances::new();
        tols.insert("bogus".into(), 1.0);
        let e = apply_tolerances(&tols, |_, _| false, &["a"]).unwrap_err();
        assert!(e.message.contains("bogus"));
    }

    #[test]
    fn unknown_job_keys_are_rejected() {
        let bad = br#"{"group": {"kind": "knot", "knot": {"kind": "unknot"}}, "certificate": {"presentation_id": "x", "p": "5", "images": []}, "extra": 1}"#;
        let e = parse_job::<VerifyJob>(bad).unwrap_err();
        assert_eq!(e.kind, "schema");
    }

    #[test]
    fn group_sources_resolve() {
        let g: GroupSource = serde_json::from_str(r#"{"kind": "knot", "knot": {"kind": "torus_knot", "p": 2, "q": 3}}"#).unwrap();
        assert_eq!(g.presentation().unwrap().generators, 2);
        let g: GroupSource = serde_json::from_str(
            r#"{"kind": "presentation", "presentation": {"id": "trefoil-braid", "generators": 2, "relators": [[1, 2, 1, -2, -1, -2]]}}"#,
        )
        .unwrap();
        assert_eq!(g.presentation().unwrap(), Presentation::trefoil_braid());
    }
}
