//! Command-line surface over the bellcomm library: vertex and facet
//! enumeration, facet verification, membership checks, catalog export
//! and classification, operator-norm bounds, the quantum stress test,
//! and the protocol simulator. Every run echoes its resolved
//! configuration; identical invocations produce byte-identical output.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use bellcomm::catalog::{
    self, classify, family, max_violation, CatalogFamily, FamilyName,
};
use bellcomm::model::{table_to_vector, validate_prob_table};
use bellcomm::ncpoly::quantum_safety_check;
use bellcomm::polytope::{facets_to_vertices, membership, verify_facet, vertices_to_facets};
use bellcomm::protocols::{vertex_set, EnumError, DEFAULT_PROTOCOL_CAP};
use bellcomm::quantum::stress_test;
use bellcomm::simulate::{simulate, tv_distance, SimError};
use bellcomm::{
    CorrMatrix, FacetList, HRepresentation, ModelError, Picture, PointList, ProbTable, Rat,
    Scenario,
};

#[derive(Parser)]
#[command(name = "bellcomm", version, about = "Exact analysis of communication-assisted correlation polytopes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Report format on stdout
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Write the run's artifact (point list, facet list, ...) to a file
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Text,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PictureArg {
    Probability,
    Correlation,
}

impl From<PictureArg> for Picture {
    fn from(p: PictureArg) -> Picture {
        match p {
            PictureArg::Probability => Picture::Probability,
            PictureArg::Correlation => Picture::Correlation,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DirectionArg {
    #[value(name = "AtoB")]
    AtoB,
    #[value(name = "BtoA")]
    BtoA,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate the extreme points of a scenario's protocol polytope
    Vertices {
        #[arg(long = "M")]
        m: u32,
        #[arg(long = "K", default_value_t = 2)]
        k: u32,
        #[arg(long)]
        r: u32,
        #[arg(long, value_enum)]
        picture: PictureArg,
        /// Abort if the protocol count exceeds this bound
        #[arg(long, default_value_t = DEFAULT_PROTOCOL_CAP)]
        cap: u64,
    },
    /// Convert a point list to its facets and affine-hull equations
    Facets {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Convert facets and equations back to the vertex list
    Extreme {
        #[arg(long = "in")]
        input: PathBuf,
    },
    /// Check facet status of every inequality in a file against a point set
    Verify {
        #[arg(long)]
        facets: PathBuf,
        #[arg(long)]
        points: PathBuf,
    },
    /// Membership of a table or correlation matrix, plus its worst violation
    Check {
        /// Probability table or correlation matrix JSON
        #[arg(long = "in")]
        input: PathBuf,
        /// H-representation file to test against
        #[arg(long, conflicts_with = "catalog")]
        facets: Option<PathBuf>,
        /// Built-in catalog name (p221, corr3, ...)
        #[arg(long)]
        catalog: Option<String>,
    },
    /// Export a built-in catalog or family
    Catalog {
        #[arg(long)]
        name: String,
    },
    /// Match computed facets one-to-one against a built-in catalog
    Classify {
        #[arg(long)]
        facets: PathBuf,
        #[arg(long)]
        catalog: String,
    },
    /// Coefficient-sum norm bound of the operator of a matrix at power k
    Bound {
        /// M1, M2, or a path to a JSON square matrix of rationals
        #[arg(long)]
        matrix: String,
        #[arg(long)]
        k: u32,
    },
    /// Randomized quantum search for catalog violations
    Quantum {
        #[arg(long, default_value = "corr3")]
        catalog: String,
        #[arg(long)]
        trials: u64,
        #[arg(long, value_delimiter = ',', default_value = "2,3,4")]
        dims: Vec<usize>,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Monte Carlo run of the one-way communication protocol
    Simulate {
        #[arg(long)]
        table: PathBuf,
        #[arg(long, value_enum)]
        direction: DirectionArg,
        /// Samples per measurement context
        #[arg(long)]
        samples: u64,
        #[arg(long)]
        seed: u64,
    },
}

/// One-line machine-parsable failure: `error[CODE]: message`.
struct CliError {
    code: &'static str,
    message: String,
}

impl CliError {
    fn new(code: &'static str, message: impl Into<String>) -> Self {
        CliError {
            code,
            message: message.into(),
        }
    }

    fn usage(message: impl Into<String>) -> Self {
        CliError::new("E_USAGE", message)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::new("E_IO", e.to_string())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::new("E_SCHEMA", e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::InvalidTable(_) => CliError::new("E_PRECONDITION", e.to_string()),
            _ => CliError::new("E_DOMAIN", e.to_string()),
        }
    }
}

impl From<EnumError> for CliError {
    fn from(e: EnumError) -> Self {
        match e {
            EnumError::CapExceeded { .. } => CliError::new("E_SIZE", e.to_string()),
            EnumError::Model(m) => m.into(),
        }
    }
}

impl From<bellcomm::polytope::PolytopeError> for CliError {
    fn from(e: bellcomm::polytope::PolytopeError) -> Self {
        CliError::new("E_DOMAIN", e.to_string())
    }
}

impl From<bellcomm::ncpoly::OperatorError> for CliError {
    fn from(e: bellcomm::ncpoly::OperatorError) -> Self {
        CliError::new("E_DOMAIN", e.to_string())
    }
}

impl From<bellcomm::quantum::QuantumError> for CliError {
    fn from(e: bellcomm::quantum::QuantumError) -> Self {
        CliError::new("E_DOMAIN", e.to_string())
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Signaling { .. } => CliError::new("E_PRECONDITION", e.to_string()),
            SimError::Model(m) => m.into(),
            SimError::DenominatorOverflow => CliError::new("E_DOMAIN", e.to_string()),
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::new("E_IO", format!("{}: {e}", path.display())))?;
    serde_json::from_str(&raw)
        .map_err(|e| CliError::new("E_SCHEMA", format!("{}: {e}", path.display())))
}

/// Accepts a full H-representation or a bare facet list.
fn read_h_representation(path: &Path) -> Result<HRepresentation, CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::new("E_IO", format!("{}: {e}", path.display())))?;
    if let Ok(h) = serde_json::from_str::<HRepresentation>(&raw) {
        return Ok(h);
    }
    let facets: FacetList = serde_json::from_str(&raw)
        .map_err(|e| CliError::new("E_SCHEMA", format!("{}: {e}", path.display())))?;
    Ok(HRepresentation {
        picture: facets.picture,
        scenario: None,
        facets: facets.facets,
        equations: Vec::new(),
    })
}

fn named_catalog(name: &str) -> Result<FacetList, CliError> {
    let list = match name {
        "p221" => catalog::prob_catalog_m2(),
        "corr3" => catalog::corr_catalog_m3(),
        other => {
            let fam = named_family(other)?;
            fam.members
        }
    };
    Ok(list)
}

fn named_family(name: &str) -> Result<CatalogFamily, CliError> {
    let name = match name {
        "positivity22" => FamilyName::Positivity22,
        "pattern-sum22" => FamilyName::PatternSum22,
        "marginal-joint22" => FamilyName::MarginalJoint22,
        "trivial-corr3" => FamilyName::TrivialCorr3,
        "orbit-m1" => FamilyName::OrbitM1,
        "orbit-m2" => FamilyName::OrbitM2,
        "trivial-corr2" => FamilyName::TrivialCorr2,
        "chsh22-prob" => FamilyName::Chsh22Prob,
        "chsh22-corr" => FamilyName::Chsh22Corr,
        other => {
            return Err(CliError::usage(format!(
                "unknown catalog or family {other:?} (try p221, corr3, positivity22, pattern-sum22, marginal-joint22, \
                 trivial-corr3, orbit-m1, orbit-m2, trivial-corr2, chsh22-prob, chsh22-corr)"
            )))
        }
    };
    Ok(family(name))
}

fn named_families(name: &str) -> Result<Vec<CatalogFamily>, CliError> {
    Ok(match name {
        "p221" => vec![
            family(FamilyName::Positivity22),
            family(FamilyName::PatternSum22),
            family(FamilyName::MarginalJoint22),
        ],
        "corr3" => vec![
            family(FamilyName::TrivialCorr3),
            family(FamilyName::OrbitM1),
            family(FamilyName::OrbitM2),
        ],
        "local22" => vec![
            family(FamilyName::Positivity22),
            family(FamilyName::Chsh22Prob),
        ],
        "corr2" => vec![family(FamilyName::TrivialCorr2)],
        other => vec![named_family(other)?],
    })
}

fn named_matrix(spec: &str) -> Result<Vec<Vec<Rat>>, CliError> {
    match spec {
        "M1" => Ok(catalog::matrix_m1()),
        "M2" => Ok(catalog::matrix_m2()),
        path => {
            let p = Path::new(path);
            if !p.exists() {
                return Err(CliError::usage(format!(
                    "matrix {spec:?} is not M1, M2, or an existing file"
                )));
            }
            read_json(p)
        }
    }
}

/// A point in either picture, read from a table, matrix, or raw vector.
fn read_point(path: &Path) -> Result<(Picture, Vec<Rat>, Value), CliError> {
    let raw = std::fs::read_to_string(path)
        .map_err(|e| CliError::new("E_IO", format!("{}: {e}", path.display())))?;
    if let Ok(table) = serde_json::from_str::<ProbTable>(&raw) {
        let report = validate_prob_table(&table);
        if !report.is_valid() {
            return Err(CliError::new(
                "E_PRECONDITION",
                format!(
                    "table is invalid: {} negative entries, {} bad context sums",
                    report.negative_entries.len(),
                    report.bad_context_sums.len()
                ),
            ));
        }
        let coords = table_to_vector(&table).into_coords();
        let meta = json!({"kind": "table", "scenario": table.scenario()});
        return Ok((Picture::Probability, coords, meta));
    }
    if let Ok(matrix) = serde_json::from_str::<CorrMatrix>(&raw) {
        let meta = json!({"kind": "matrix", "scenario": matrix.scenario()});
        return Ok((Picture::Correlation, matrix.coords().to_vec(), meta));
    }
    Err(CliError::new(
        "E_SCHEMA",
        format!("{}: neither a probability table nor a correlation matrix", path.display()),
    ))
}

fn write_artifact(path: &Path, value: &Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)
        .map_err(|e| CliError::new("E_IO", format!("{}: {e}", path.display())))?;
    Ok(())
}

/// Fixed-width text rendering of the JSON report; JSON stays the source
/// of truth.
fn render_text(value: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match value {
        Value::Object(map) => {
            let width = map.keys().map(|k| k.len()).max().unwrap_or(0);
            for (key, val) in map {
                match val {
                    Value::Object(_) | Value::Array(_) => {
                        out.push_str(&format!("{pad}{key}:\n"));
                        render_text(val, indent + 1, out);
                    }
                    _ => out.push_str(&format!("{pad}{key:<width$}  {val}\n")),
                }
            }
        }
        Value::Array(items) => {
            if items.iter().all(|v| !matches!(v, Value::Object(_) | Value::Array(_))) {
                let joined: Vec<String> = items.iter().map(|v| v.to_string()).collect();
                out.push_str(&format!("{pad}[{}]\n", joined.join(", ")));
            } else {
                for (idx, item) in items.iter().enumerate() {
                    out.push_str(&format!("{pad}- [{idx}]\n"));
                    render_text(item, indent + 1, out);
                }
            }
        }
        other => out.push_str(&format!("{pad}{other}\n")),
    }
}

fn emit(report: Value, format: Format) -> Result<(), CliError> {
    match format {
        Format::Json => {
            let mut text = serde_json::to_string_pretty(&report)?;
            text.push('\n');
            print!("{text}");
        }
        Format::Text => {
            let mut text = String::new();
            render_text(&report, 0, &mut text);
            print!("{text}");
        }
    }
    Ok(())
}

fn to_value<T: serde::Serialize>(v: &T) -> Result<Value, CliError> {
    Ok(serde_json::to_value(v)?)
}

/// Wraps the result with the echoed configuration; honors --out by
/// writing the artifact file and summarizing it in the report.
fn finish(
    command: &str,
    config: Value,
    artifact: Option<(Value, Value)>,
    result: Value,
    cli_out: &Option<PathBuf>,
    format: Format,
) -> Result<(), CliError> {
    let mut result = result;
    if let Some((artifact_value, summary)) = artifact {
        match cli_out {
            Some(path) => {
                write_artifact(path, &artifact_value)?;
                result = json!({"written": path.display().to_string(), "summary": summary});
            }
            None => {
                result = json!({"artifact": artifact_value, "summary": summary});
            }
        }
    }
    emit(
        json!({"command": command, "config": config, "result": result}),
        format,
    )
}

fn run(cli: Cli) -> Result<(), CliError> {
    let format = cli.format;
    match cli.command {
        Command::Vertices { m, k, r, picture, cap } => {
            let scenario = Scenario::new(m, k, r)?;
            let picture: Picture = picture.into();
            let points = vertex_set(&scenario, picture, cap)?;
            let config = json!({
                "M": m, "K": k, "r": r,
                "picture": picture.to_string(),
                "cap": cap,
            });
            let summary = json!({"points": points.len(), "dimension": points.dim()});
            finish("vertices", config, Some((to_value(&points)?, summary)), Value::Null, &cli.out, format)
        }
        Command::Facets { input } => {
            let points: PointList = read_json(&input)?;
            let h = vertices_to_facets(&points)?;
            let config = json!({"in": input.display().to_string()});
            let summary = json!({
                "facets": h.facets.len(),
                "equations": h.equations.len(),
            });
            finish("facets", config, Some((to_value(&h)?, summary)), Value::Null, &cli.out, format)
        }
        Command::Extreme { input } => {
            let h = read_h_representation(&input)?;
            let points = facets_to_vertices(&h)?;
            let config = json!({"in": input.display().to_string()});
            let summary = json!({"points": points.len(), "dimension": points.dim()});
            finish("extreme", config, Some((to_value(&points)?, summary)), Value::Null, &cli.out, format)
        }
        Command::Verify { facets, points } => {
            let h = read_h_representation(&facets)?;
            let point_list: PointList = read_json(&points)?;
            let mut reports = Vec::new();
            let mut all_facets = true;
            for facet in &h.facets {
                let report = verify_facet(facet, &point_list)?;
                all_facets &= report.is_facet;
                reports.push(json!({
                    "facet": to_value(facet)?,
                    "valid": report.valid,
                    "tightRank": report.tight_rank,
                    "isFacet": report.is_facet,
                }));
            }
            let config = json!({
                "facets": facets.display().to_string(),
                "points": points.display().to_string(),
            });
            let result = json!({"reports": reports, "allFacets": all_facets});
            finish("verify", config, None, result, &cli.out, format)
        }
        Command::Check { input, facets, catalog } => {
            let (picture, coords, meta) = read_point(&input)?;
            let (h, source) = match (&facets, &catalog) {
                (Some(path), None) => (read_h_representation(path)?, path.display().to_string()),
                (None, Some(name)) => {
                    let list = named_catalog(name)?;
                    (
                        HRepresentation {
                            picture: list.picture,
                            scenario: None,
                            facets: list.facets,
                            equations: Vec::new(),
                        },
                        name.clone(),
                    )
                }
                _ => return Err(CliError::usage("check needs exactly one of --facets or --catalog")),
            };
            if h.picture != picture {
                return Err(CliError::new(
                    "E_DOMAIN",
                    format!("point is in the {picture} picture, facets in {}", h.picture),
                ));
            }
            let member = membership(&coords, &h)?;
            let list = FacetList {
                picture: h.picture,
                facets: h.facets.clone(),
            };
            let worst = max_violation(&coords, &list).map(|(idx, margin)| {
                json!({
                    "index": idx,
                    "margin": margin.to_string(),
                    "inequality": serde_json::to_value(&list.facets[idx]).unwrap_or(Value::Null),
                })
            });
            let config = json!({"in": input.display().to_string(), "against": source, "input": meta});
            let result = json!({
                "member": member.member,
                "violatedFacets": member.violated_facets,
                "violatedEquations": member.violated_equations,
                "maxViolation": worst,
            });
            finish("check", config, None, result, &cli.out, format)
        }
        Command::Catalog { name } => {
            let list = named_catalog(&name)?;
            let config = json!({"name": name});
            let summary = json!({"members": list.len(), "picture": list.picture.to_string()});
            finish("catalog", config, Some((to_value(&list)?, summary)), Value::Null, &cli.out, format)
        }
        Command::Classify { facets, catalog } => {
            let h = read_h_representation(&facets)?;
            let families = named_families(&catalog)?;
            let computed = FacetList {
                picture: h.picture,
                facets: h.facets.clone(),
            };
            let report = classify(&computed, &h.equations, &families)?;
            let config = json!({
                "facets": facets.display().to_string(),
                "catalog": catalog,
            });
            finish("classify", config, None, to_value(&report)?, &cli.out, format)
        }
        Command::Bound { matrix, k } => {
            let mat = named_matrix(&matrix)?;
            let report = quantum_safety_check(&mat, k)?;
            let config = json!({"matrix": matrix, "k": k});
            let result = json!({
                "sum": report.sum.to_string(),
                "k": report.k,
                "certified": report.certified,
            });
            finish("bound", config, None, result, &cli.out, format)
        }
        Command::Quantum { catalog, trials, dims, seed, tol } => {
            let list = named_catalog(&catalog)?;
            let report = stress_test(&list, trials, &dims, seed, tol)?;
            let config = json!({
                "catalog": catalog,
                "trials": trials,
                "dims": dims,
                "seed": seed,
                "tol": tol,
            });
            finish("quantum", config, None, to_value(&report)?, &cli.out, format)
        }
        Command::Simulate { table, direction, samples, seed } => {
            let target: ProbTable = read_json(&table)?;
            let direction = match direction {
                DirectionArg::AtoB => bellcomm::Direction::AtoB,
                DirectionArg::BtoA => bellcomm::Direction::BtoA,
            };
            let run = simulate(&target, direction, samples, seed)?;
            let tv = tv_distance(&run);
            let s = *target.scenario();
            let mut counts = serde_json::Map::new();
            for (i, j) in s.contexts() {
                let rows: Vec<Vec<u64>> = (0..s.k())
                    .map(|a| (0..s.k()).map(|b| run.count(a, b, i, j)).collect())
                    .collect();
                counts.insert(format!("{i},{j}"), serde_json::to_value(rows)?);
            }
            let config = json!({
                "table": table.display().to_string(),
                "direction": direction.to_string(),
                "samples": samples,
                "seed": seed,
            });
            let result = json!({
                "messageBits": run.message_bits,
                "tvDistance": tv,
                "counts": Value::Object(counts),
            });
            finish("simulate", config, None, result, &cli.out, format)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {}", e.code, e.message);
            if e.code == "E_USAGE" {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
