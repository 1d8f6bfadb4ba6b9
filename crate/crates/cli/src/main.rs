use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use spectral_scale::export::{extremes_table, fmt_f64, hull_obj, Table};
use spectral_scale::faces::{cut_down, minimal_exposed_chain};
use spectral_scale::oracle::hull::PointCloudHull;
use spectral_scale::oracle::{random_unit_ball_element, seeded_rng};
use spectral_scale::scale::{support_pair, SweepTable};
use spectral_scale::structure::{
    analyze_face, isolated_extremes_to_center, swept_faces, CloudEscalation, ESCALATION_BASE,
};
use spectral_scale::{
    abelian_verdict, build_facial_complex, extreme_point_cloud, face_dimension, face_from_complex, fixtures,
    interval_projections, io, isotrace_slice, DirectionSampling, Error, FaceHandle, OperatorTuple, ScalePoint,
    SpectralPair, StructureReport,
};

#[derive(Parser)]
#[command(name = "spectral-scale", version, about = "Spectral scales of self-adjoint operator tuples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Support values and exposed faces over the direction sample.
    Support(Common),
    /// Extreme point cloud (csv, json, or an obj hull mesh for n = 2).
    Extremes(Common),
    /// Face reports with their minimal exposed chains.
    Faces {
        #[command(flatten)]
        common: Common,
        /// JSON list of spectral pairs `[{"s": .., "t": [..]}, ..]` defining a facial complex.
        #[arg(long)]
        complex: Option<PathBuf>,
    },
    /// Isotrace slices.
    Slice {
        #[command(flatten)]
        common: Common,
        /// Trace levels in [0, 1]; repeatable.
        #[arg(long, num_args = 1.., default_values_t = vec![0.0, 0.5, 1.0])]
        level: Vec<f64>,
    },
    /// Sharp faces and spectral gaps.
    Corners(Common),
    /// Central projections detected from normals and from isolated extreme points.
    Center(Common),
    /// Geometric and algebraic commutativity verdicts.
    Abelian(Common),
    /// Emit a built-in tuple as input JSON.
    Fixture {
        #[arg(value_parser = clap::builder::PossibleValuesParser::new(fixtures::NAMES))]
        name: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Clone)]
struct Common {
    /// Tuple JSON file.
    #[arg(long)]
    input: PathBuf,
    /// Output directory; data goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of sampled directions.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    samples: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Relative eigenvalue clustering tolerance.
    #[arg(long)]
    cluster_tol: Option<f64>,
    /// Relative band for deciding that s is an eigenvalue.
    #[arg(long)]
    eig_eq_tol: Option<f64>,
    /// Isolation radius as a fraction of the cloud diameter.
    #[arg(long)]
    iso_radius: Option<f64>,
    #[arg(long, value_enum)]
    format: Option<Format>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Obj,
}

impl Format {
    fn ext(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Obj => "obj",
        }
    }
}

enum CliError {
    Usage(String),
    Input(String),
    Lib(Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Input(_) => 2,
            CliError::Lib(e) => match e {
                Error::Parse(_) | Error::InvalidAlgebra(_) | Error::Shape(_) => 2,
                Error::NotHermitian { .. } => 3,
                Error::Invariant(_) | Error::ChainDidNotConverge(_) | Error::EigenSolver { .. } => 4,
                _ => 1,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) | CliError::Input(m) => m.clone(),
            CliError::Lib(e) => e.to_string(),
        }
    }
}

type CliResult<T> = Result<T, CliError>;

struct Context {
    tuple: OperatorTuple,
    common: Common,
}

impl Context {
    fn load(common: Common) -> CliResult<Self> {
        let text = fs::read_to_string(&common.input)
            .map_err(|e| CliError::Input(format!("{}: {e}", common.input.display())))?;
        let mut tuple = io::parse_tuple(&text)?;
        let mut tol = *tuple.tolerances();
        if let Some(v) = common.cluster_tol {
            tol.cluster_rel = v;
        }
        if let Some(v) = common.eig_eq_tol {
            tol.eig_eq_rel = v;
        }
        if let Some(v) = common.iso_radius {
            tol.iso_radius_rel = v;
        }
        tol.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        tuple = tuple.with_tolerances(tol);
        Ok(Context { tuple, common })
    }

    fn samples(&self, default: usize) -> usize {
        self.common.samples.map_or(default, |v| v as usize)
    }

    fn sampling(&self) -> DirectionSampling {
        DirectionSampling::with_count(self.samples(DirectionSampling::default().count))
    }

    fn format(&self, allowed: &[Format]) -> CliResult<Format> {
        let f = self.common.format.unwrap_or(allowed[0]);
        if allowed.contains(&f) {
            Ok(f)
        } else {
            Err(CliError::Usage(format!("format {} is not available here", f.ext())))
        }
    }

    fn emit(&self, stem: &str, ext: &str, data: &str) -> CliResult<()> {
        emit(self.common.out.as_deref(), stem, ext, data)
    }
}

/// Atomic write into `dir`, or stdout.
fn emit(dir: Option<&Path>, stem: &str, ext: &str, data: &str) -> CliResult<()> {
    let io_err = |e: std::io::Error| CliError::Usage(format!("cannot write output: {e}"));
    match dir {
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(data.as_bytes()).map_err(io_err)?;
            out.flush().map_err(io_err)
        }
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io_err)?;
            let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
            tmp.write_all(data.as_bytes()).map_err(io_err)?;
            tmp.persist(dir.join(format!("{stem}.{ext}")))
                .map_err(|e| io_err(e.error))?;
            Ok(())
        }
    }
}

fn csv_string(table: &Table) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&table.header).expect("in-memory write");
    for row in &table.rows {
        w.write_record(row).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8")
}

fn json_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable report");
    s.push('\n');
    s
}

fn cmd_support(ctx: &Context) -> CliResult<()> {
    let format = ctx.format(&[Format::Csv, Format::Json])?;
    let tuple = &ctx.tuple;
    let table = SweepTable::build(tuple, &ctx.sampling())?;
    let alg = tuple.algebra();
    let mut header = vec!["s".to_string()];
    header.extend((1..=tuple.n()).map(|i| format!("t{i}")));
    header.extend(["alpha", "trace_lower", "trace_upper", "face_dim"].map(String::from));
    let mut rows = Vec::new();
    for pair in table.pairs() {
        let (alpha, _) = support_pair(tuple, &pair)?;
        let iv = interval_projections(tuple, &pair)?;
        let dim = face_dimension(tuple, &iv)?;
        let mut row = vec![fmt_f64(pair.s)];
        row.extend(pair.t.iter().map(|&v| fmt_f64(v)));
        row.push(fmt_f64(alpha));
        row.push(fmt_f64(alg.trace(&iv.lower)?));
        row.push(fmt_f64(alg.trace(&iv.upper)?));
        row.push(dim.to_string());
        rows.push(row);
    }
    let table = Table { header, rows };
    match format {
        Format::Csv => ctx.emit("support", "csv", &csv_string(&table)),
        _ => ctx.emit("support", "json", &json_string(&table_objects(&table))),
    }
}

fn table_objects(table: &Table) -> Vec<serde_json::Map<String, serde_json::Value>> {
    table
        .rows
        .iter()
        .map(|row| {
            table
                .header
                .iter()
                .zip(row)
                .map(|(h, v)| {
                    let value = v
                        .parse::<f64>()
                        .ok()
                        .and_then(serde_json::Number::from_f64)
                        .map_or_else(|| serde_json::Value::String(v.clone()), serde_json::Value::Number);
                    (h.clone(), value)
                })
                .collect()
        })
        .collect()
}

#[derive(Serialize)]
struct CloudStats {
    distinct: usize,
    raw: usize,
    directions: usize,
}

fn cmd_extremes(ctx: &Context) -> CliResult<()> {
    let format = ctx.format(&[Format::Csv, Format::Json, Format::Obj])?;
    let tuple = &ctx.tuple;
    let cloud = extreme_point_cloud(tuple, &ctx.sampling())?;
    let stats = CloudStats {
        distinct: cloud.len(),
        raw: cloud.raw_count,
        directions: cloud.directions,
    };
    let table = extremes_table(tuple, &cloud);
    match format {
        Format::Csv => ctx.emit("extremes", "csv", &csv_string(&table))?,
        Format::Json => ctx.emit("extremes", "json", &json_string(&table_objects(&table)))?,
        Format::Obj => {
            if tuple.n() != 2 {
                return Err(CliError::Usage("obj export needs exactly two operators".into()));
            }
            let hull = PointCloudHull::new(cloud.scale_points())?;
            ctx.emit("extremes", "obj", &hull_obj(&hull)?)?;
        }
    }
    match &ctx.common.out {
        Some(_) => ctx.emit("extremes_stats", "json", &json_string(&stats)),
        None => {
            eprintln!(
                "{} distinct extreme points from {} candidates over {} directions",
                stats.distinct, stats.raw, stats.directions
            );
            Ok(())
        }
    }
}

#[derive(Serialize)]
struct ChainLink {
    traces: [f64; 2],
    vertices: [ScalePoint; 2],
    dimension: usize,
}

#[derive(Serialize)]
struct FaceEntry {
    pair: Option<SpectralPair>,
    report: spectral_scale::FaceReport,
    chain: Vec<ChainLink>,
    /// Largest cut-down reconstruction error over the random checks.
    reconstruction_error: f64,
}

const RECONSTRUCTION_CHECKS: usize = 16;

fn face_entry(ctx: &Context, table: &SweepTable, face: &FaceHandle, pair: Option<SpectralPair>) -> CliResult<FaceEntry> {
    let tuple = &ctx.tuple;
    let report = analyze_face(tuple, face, table)?;
    let alg = tuple.algebra();
    let chain = minimal_exposed_chain(tuple, &face.interval, &ctx.sampling())?
        .into_iter()
        .map(|h| -> CliResult<ChainLink> {
            Ok(ChainLink {
                traces: [alg.trace(&h.interval.lower)?, alg.trace(&h.interval.upper)?],
                vertices: h.vertices(tuple),
                dimension: face_dimension(tuple, &h.interval)?,
            })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut reconstruction_error: f64 = 0.0;
    if !face.interval.is_point(tuple.tolerances().order) {
        let cd = cut_down(tuple, &face.interval)?;
        let mut rng = seeded_rng(ctx.common.seed);
        for _ in 0..RECONSTRUCTION_CHECKS {
            let x = random_unit_ball_element(&cd.tuple.algebra().dims(), &mut rng);
            let direct = tuple.psi(&face.interval.lower.plus(&cd.embed(&x)))?;
            reconstruction_error = reconstruction_error.max(cd.reconstruct(&x).max_abs_diff(&direct));
        }
        if reconstruction_error > 1e-8 {
            return Err(Error::Invariant(format!("cut-down reconstruction off by {reconstruction_error:.3e}")).into());
        }
    }
    Ok(FaceEntry {
        pair,
        report,
        chain,
        reconstruction_error,
    })
}

fn cmd_faces(ctx: &Context, complex: Option<&Path>) -> CliResult<()> {
    ctx.format(&[Format::Json])?;
    let tuple = &ctx.tuple;
    let table = SweepTable::build(tuple, &ctx.sampling())?;
    let entries = match complex {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            let pairs: Vec<SpectralPair> = serde_json::from_str(&text).map_err(|e| {
                CliError::Input(format!("{}: line {}, column {}: {e}", path.display(), e.line(), e.column()))
            })?;
            let complex = build_facial_complex(tuple, &pairs)?;
            if let Some(level) = complex.terminated_at {
                eprintln!("facial complex terminated early at level {}", level + 1);
            }
            let face = face_from_complex(tuple, &complex)?;
            vec![face_entry(ctx, &table, &face, None)?]
        }
        None => swept_faces(tuple, &table)
            .into_iter()
            .map(|f| face_entry(ctx, &table, &FaceHandle::new(f.interval), Some(f.pair)))
            .collect::<CliResult<Vec<_>>>()?,
    };
    ctx.emit("faces", "json", &json_string(&entries))
}

fn cmd_slice(ctx: &Context, levels: &[f64]) -> CliResult<()> {
    let format = ctx.format(&[Format::Csv, Format::Json])?;
    let tuple = &ctx.tuple;
    let resolution = ctx.samples(720);
    let slices = levels
        .iter()
        .map(|&l| isotrace_slice(tuple, l, resolution))
        .collect::<spectral_scale::Result<Vec<_>>>()?;
    match format {
        Format::Csv => {
            let mut header = vec!["level".to_string()];
            header.extend((1..=tuple.n()).map(|i| format!("x{i}")));
            let rows = slices
                .iter()
                .flat_map(|sl| {
                    sl.points.iter().map(move |p| {
                        let mut row = vec![fmt_f64(sl.level)];
                        row.extend(p.iter().map(|&v| fmt_f64(v)));
                        row
                    })
                })
                .collect();
            ctx.emit("slice", "csv", &csv_string(&Table { header, rows }))
        }
        _ => ctx.emit("slice", "json", &json_string(&slices)),
    }
}

#[derive(Serialize)]
struct SharpFace {
    pair: SpectralPair,
    vertices: [ScalePoint; 2],
    dimension: usize,
    degree: usize,
    degree_exact: bool,
}

#[derive(Serialize)]
struct CornersReport {
    sharp_faces: Vec<SharpFace>,
    gaps: Vec<spectral_scale::GapReport>,
}

fn cmd_corners(ctx: &Context) -> CliResult<()> {
    ctx.format(&[Format::Json])?;
    let tuple = &ctx.tuple;
    let table = SweepTable::build(tuple, &ctx.sampling())?;
    let mut report = CornersReport {
        sharp_faces: Vec::new(),
        gaps: Vec::new(),
    };
    for f in swept_faces(tuple, &table) {
        let r = analyze_face(tuple, &FaceHandle::new(f.interval), &table)?;
        if r.sharp {
            report.sharp_faces.push(SharpFace {
                pair: f.pair,
                vertices: r.vertices.clone(),
                dimension: r.dimension,
                degree: r.degree,
                degree_exact: r.degree_exact,
            });
        }
        report.gaps.extend(r.gaps);
    }
    ctx.emit("corners", "json", &json_string(&report))
}

fn escalation(ctx: &Context) -> CliResult<CloudEscalation> {
    Ok(CloudEscalation::build(&ctx.tuple, ctx.samples(ESCALATION_BASE))?)
}

#[derive(Serialize)]
struct CenterReport {
    #[serde(flatten)]
    structure: StructureReport,
    isolated: Vec<spectral_scale::structure::IsolatedPoint>,
}

fn cmd_center(ctx: &Context) -> CliResult<()> {
    ctx.format(&[Format::Json])?;
    let tuple = &ctx.tuple;
    let table = SweepTable::build(tuple, &ctx.sampling())?;
    let mut central_projections = Vec::new();
    let mut gaps = Vec::new();
    for f in swept_faces(tuple, &table) {
        let r = analyze_face(tuple, &FaceHandle::new(f.interval), &table)?;
        if r.centrality.detected {
            central_projections.push(r.centrality);
        }
        gaps.extend(r.gaps);
    }
    let clouds = escalation(ctx)?;
    let isolated = isolated_extremes_to_center(tuple, &clouds);
    if let Some(bad) = isolated.iter().find(|p| !p.is_central) {
        return Err(Error::Invariant(format!(
            "isolated extreme point {} has a non-central projection (commutator {:.3e})",
            bad.point, bad.commutator
        ))
        .into());
    }
    let report = CenterReport {
        structure: StructureReport {
            abelian: abelian_verdict(tuple, &clouds),
            central_projections,
            gaps,
        },
        isolated,
    };
    ctx.emit("center", "json", &json_string(&report))
}

fn cmd_abelian(ctx: &Context) -> CliResult<()> {
    ctx.format(&[Format::Json])?;
    let clouds = escalation(ctx)?;
    let verdict = abelian_verdict(&ctx.tuple, &clouds);
    ctx.emit("abelian", "json", &json_string(&verdict))
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Support(c) => cmd_support(&Context::load(c)?),
        Command::Extremes(c) => cmd_extremes(&Context::load(c)?),
        Command::Faces { common, complex } => cmd_faces(&Context::load(common)?, complex.as_deref()),
        Command::Slice { common, level } => cmd_slice(&Context::load(common)?, &level),
        Command::Corners(c) => cmd_corners(&Context::load(c)?),
        Command::Center(c) => cmd_center(&Context::load(c)?),
        Command::Abelian(c) => cmd_abelian(&Context::load(c)?),
        Command::Fixture { name, out } => {
            let tuple = fixtures::by_name(&name).expect("validated by clap");
            emit(out.as_deref(), &name, "json", &io::tuple_to_json(&tuple))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
