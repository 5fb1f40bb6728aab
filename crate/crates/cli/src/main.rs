//! `sheaflab` — one command-line entry point over the exact sheaf/Radon
//! laboratory.
//!
//! Every subcommand prints a single JSON run report to standard output:
//! `{command, inputsDigest, pass, payload}` with stable field order.  All
//! rational values are strings `"p/q"`; floats appear only in the contact
//! and knot residual fields.  Identical argument vectors (and seeds)
//! produce byte-identical reports; `--timing` adds a wall-clock field and
//! is therefore off by default.
//!
//! Exit codes: `0` success/pass, `1` a check failed (the report says
//! where), `2` input error (malformed JSON is reported with its position).

use std::collections::BTreeSet;
use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest as _, Sha256};

use sheaflab::cellsheaf::line::{
    random_compact_sheaf1d, sample_grid, Bar, BarEnd, CellSheaf1D, IndicatorSpec1D, Interval1D,
    SheafSpec1D,
};
use sheaflab::cellsheaf::spec::{sheaf_from_json, spec1d_from_json};
use sheaflab::cellsheaf::{CellSheaf, SectorDesc};
use sheaflab::contact::{
    chi_base_unnormalized, contact_check, diagram_check, CotPoint, DiagramId, MapId, Mode,
};
use sheaflab::euler::circle::{circle_dualities, random_cfun_circle};
use sheaflab::euler::{
    cfun_from_json, euler_radon, inversion_check, local_euler, random_compact_cfun,
};
use sheaflab::exactlin::GradedDims;
use sheaflab::knot::{map_conormal, sample_conormal, ConormalSample, MappedSample, PlKnot};
use sheaflab::radon::{
    direction_barcode, probe_grid, radon_stalk, sector_contains, simpleness_transfer,
    ss_image_check, stalk_at_scaled, wall_set, LineQuery,
};
use sheaflab::ratio::{fmt_rat, parse_rat};
use sheaflab::{rat, Rat};

#[derive(Parser)]
#[command(
    name = "sheaflab",
    version,
    about = "Exact microlocal sheaf, Radon-transform, and Euler-calculus laboratory"
)]
struct Cli {
    /// Add wall-clock milliseconds to the report (breaks byte-for-byte
    /// reproducibility between runs, so it is opt-in).
    #[arg(long, global = true)]
    timing: bool,

    /// Also write the report to this file (`conormal`: the CSV sample
    /// dump goes here instead).
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Scan the singular support of plane sheaves.
    Ss(MultiSheafArgs),
    /// Microstalks of a plane sheaf at one point, one or more covectors.
    Microstalk(MicrostalkArgs),
    /// Stalks of the transform: one line query, or a full chamber scan.
    RadonStalk(RadonStalkArgs),
    /// Walls of the transform, checked against the contact-side image of
    /// the singular support.
    RadonWalls(RadonWallsArgs),
    /// Interval decomposition of the transform along one direction.
    RadonBarcode(RadonBarcodeArgs),
    /// Wall structure vs singular support, both inclusions, per direction.
    SsImageCheck(SheafArg),
    /// Microstalk multiplicity vs bar-endpoint multiplicity at conormal
    /// covectors.
    SimplenessTransfer(SimplenessArgs),
    /// The decategorified transform of a constructible function, or its
    /// agreement with stalkwise Euler characteristics of the sheaf
    /// transform.
    EulerRadon(EulerRadonArgs),
    /// The inversion identity for compactly supported constructible
    /// functions.
    EulerInvert(EulerInvertArgs),
    /// The three circle duality identities on random circle functions.
    CircleDualities(CircleArgs),
    /// The positive-ray projector on sheaves over the line.
    Project1d(Project1dArgs),
    /// Exact and float-mode checks of one cotangent correspondence.
    ContactCheck(ContactCheckArgs),
    /// Kernel-restriction identities between the transform diagrams.
    DiagramCheck(DiagramCheckArgs),
    /// Sample a PL knot's unit conormal and push it through the
    /// correspondence.
    Conormal(ConormalArgs),
}

impl Cmd {
    fn name(&self) -> &'static str {
        match self {
            Cmd::Ss(_) => "ss",
            Cmd::Microstalk(_) => "microstalk",
            Cmd::RadonStalk(_) => "radon-stalk",
            Cmd::RadonWalls(_) => "radon-walls",
            Cmd::RadonBarcode(_) => "radon-barcode",
            Cmd::SsImageCheck(_) => "ss-image-check",
            Cmd::SimplenessTransfer(_) => "simpleness-transfer",
            Cmd::EulerRadon(_) => "euler-radon",
            Cmd::EulerInvert(_) => "euler-invert",
            Cmd::CircleDualities(_) => "circle-dualities",
            Cmd::Project1d(_) => "project1d",
            Cmd::ContactCheck(_) => "contact-check",
            Cmd::DiagramCheck(_) => "diagram-check",
            Cmd::Conormal(_) => "conormal",
        }
    }
}

#[derive(Args)]
struct SheafArg {
    /// Plane sheaf JSON (indicator or explicit schema).
    #[arg(long, value_name = "FILE")]
    sheaf: PathBuf,
}

#[derive(Args)]
struct MultiSheafArgs {
    /// Plane sheaf JSON; repeat to process several sheaves in one run.
    #[arg(long, value_name = "FILE", required = true)]
    sheaf: Vec<PathBuf>,
}

#[derive(Args)]
struct MicrostalkArgs {
    #[arg(long, value_name = "FILE")]
    sheaf: PathBuf,
    /// Base point "x,y" (rationals "p/q").
    #[arg(long, allow_hyphen_values = true)]
    point: String,
    /// Covector "a,b"; repeat to probe several covectors at the point.
    #[arg(long, required = true, allow_hyphen_values = true)]
    xi: Vec<String>,
}

#[derive(Args)]
struct RadonStalkArgs {
    /// Plane sheaf JSON; repeatable in scan mode.
    #[arg(long, value_name = "FILE", required = true)]
    sheaf: Vec<PathBuf>,
    /// Co-oriented direction "a,b"; repeatable in scan mode.
    #[arg(long, required = true, allow_hyphen_values = true)]
    nhat: Vec<String>,
    /// Signed offset of the query line against the unit normal.  Omit it
    /// to scan every wall chamber of each direction instead (offsets in
    /// the scan are measured against the primitive integer direction).
    #[arg(long, allow_hyphen_values = true)]
    r: Option<String>,
}

#[derive(Args)]
struct RadonWallsArgs {
    #[arg(long, value_name = "FILE")]
    sheaf: PathBuf,
    /// Restrict to one direction (skips the contact-side comparison).
    #[arg(long, allow_hyphen_values = true)]
    nhat: Option<String>,
}

#[derive(Args)]
struct RadonBarcodeArgs {
    #[arg(long, value_name = "FILE")]
    sheaf: PathBuf,
    /// Direction "a,b"; bar positions are offsets against the primitive
    /// integer direction.
    #[arg(long, allow_hyphen_values = true)]
    nhat: String,
}

#[derive(Args)]
struct SimplenessArgs {
    /// Plane sheaf JSON; repeatable with --auto.
    #[arg(long, value_name = "FILE", required = true)]
    sheaf: Vec<PathBuf>,
    /// Base point "x,y" of the covector (requires --xi).
    #[arg(long, allow_hyphen_values = true)]
    point: Option<String>,
    /// Covector "a,b" at the base point; the transfer is defined for
    /// points parallel to the covector.
    #[arg(long, allow_hyphen_values = true)]
    xi: Option<String>,
    /// Probe every singular-support sample with base point parallel to
    /// the covector.
    #[arg(long)]
    auto: bool,
}

#[derive(Args)]
struct EulerRadonArgs {
    /// Constructible function JSON (sheaf schema with integer "value").
    /// Alone: evaluate its transform at --nhat/--r.  With --sheaf and
    /// --random: check it decategorifies that sheaf's transform.
    #[arg(long, value_name = "FILE")]
    cfun: Option<PathBuf>,
    /// Direction "a,b" of the query line (with --cfun alone).
    #[arg(long, allow_hyphen_values = true)]
    nhat: Option<String>,
    /// Signed offset against the unit normal (with --cfun alone).
    #[arg(long, allow_hyphen_values = true)]
    r: Option<String>,
    /// Plane sheaf JSON; with --random, compare stalkwise Euler
    /// characteristics of the sheaf transform against the decategorified
    /// transform of its local Euler function (or of --cfun).  Repeatable.
    #[arg(long, value_name = "FILE")]
    sheaf: Vec<PathBuf>,
    /// Number of random line queries per sheaf.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct EulerInvertArgs {
    /// Compactly supported constructible function JSON.
    #[arg(long, value_name = "FILE", conflicts_with = "random")]
    cfun: Option<PathBuf>,
    /// Check this many seeded random compactly supported functions.
    #[arg(long)]
    random: Option<usize>,
    /// Maximum number of lines in each random arrangement.
    #[arg(long, default_value_t = 6)]
    lines: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct CircleArgs {
    /// Number of seeded random circle functions.
    #[arg(long, default_value_t = 100)]
    random: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct Project1dArgs {
    /// Sheaf-on-the-line JSON (interval indicator schema).
    #[arg(long, value_name = "FILE", conflicts_with = "random")]
    sheaf: Option<PathBuf>,
    /// Soak mode: two fixed worked examples plus this many seeded random
    /// compactly supported sheaves (no negative covectors in the output,
    /// projecting twice changes nothing).
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ContactCheckArgs {
    /// chi | chi-plus | chi-minus | identity.
    #[arg(long)]
    map: String,
    /// Ambient dimension; omit to sweep n = 2 and n = 3.
    #[arg(long)]
    n: Option<usize>,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    /// exact | float; omit to run both.
    #[arg(long)]
    mode: Option<String>,
}

#[derive(Args)]
struct DiagramCheckArgs {
    /// raS | ftRa | fsSph | iotaPhi, or "all" for every kernel identity
    /// plus the decategorified circle shadow.
    #[arg(long)]
    identity: String,
    /// Base dimension of the sampled cotangent points.
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    #[arg(long, default_value_t = 3)]
    seed: u64,
}

#[derive(Args)]
struct ConormalArgs {
    /// PL knot JSON: {"vertices":[[x,y,z],...]} with at least three
    /// non-degenerate vertices (floats).
    #[arg(long, value_name = "FILE")]
    knot: PathBuf,
    /// Base samples per segment.
    #[arg(long = "per-seg", default_value_t = 10)]
    per_seg: usize,
    /// Fiber angles per base point.
    #[arg(long = "per-fiber", default_value_t = 16)]
    per_fiber: usize,
    /// Finite-difference step for the Legendrian residual.
    #[arg(long, default_value_t = 1e-4)]
    step: f64,
}

/// The one report every subcommand prints.
#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct RunReport {
    command: String,
    inputs_digest: String,
    pass: bool,
    payload: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    wall_ms: Option<u64>,
}

struct Outcome {
    digest: String,
    pass: bool,
    payload: Value,
    /// True when the handler already wrote `--out` itself (CSV dumps).
    out_written: bool,
}

impl Outcome {
    fn query(digest: InputDigest, payload: Value) -> Outcome {
        Outcome {
            digest: digest.hex(),
            pass: true,
            payload,
            out_written: false,
        }
    }

    fn check(digest: InputDigest, pass: bool, payload: Value) -> Outcome {
        Outcome {
            digest: digest.hex(),
            pass,
            payload,
            out_written: false,
        }
    }
}

/// SHA-256 over the command name and every semantic input (file contents,
/// parsed parameters, seeds) in a fixed order.
struct InputDigest {
    hasher: Sha256,
}

impl InputDigest {
    fn new(command: &str) -> InputDigest {
        let mut hasher = Sha256::new();
        hasher.update(command.as_bytes());
        hasher.update([0]);
        InputDigest { hasher }
    }

    fn push(&mut self, key: &str, value: &str) {
        self.hasher.update(key.as_bytes());
        self.hasher.update([b'=']);
        self.hasher.update(value.as_bytes());
        self.hasher.update([0]);
    }

    fn hex(self) -> String {
        format!("{:x}", self.hasher.finalize())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let started = Instant::now();
    let outcome = match run(&cli) {
        Ok(outcome) => outcome,
        Err(err) => {
            eprintln!("error: {err:#}");
            return ExitCode::from(2);
        }
    };
    let report = RunReport {
        command: cli.cmd.name().to_string(),
        inputs_digest: outcome.digest,
        pass: outcome.pass,
        payload: outcome.payload,
        wall_ms: cli.timing.then(|| started.elapsed().as_millis() as u64),
    };
    let text = serde_json::to_string_pretty(&report).expect("reports serialize");
    println!("{text}");
    if !outcome.out_written {
        if let Some(path) = &cli.out {
            if let Err(err) = fs::write(path, format!("{text}\n")) {
                eprintln!("error: writing {}: {err}", path.display());
                return ExitCode::from(2);
            }
        }
    }
    if report.pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.cmd {
        Cmd::Ss(a) => cmd_ss(a),
        Cmd::Microstalk(a) => cmd_microstalk(a),
        Cmd::RadonStalk(a) => cmd_radon_stalk(a),
        Cmd::RadonWalls(a) => cmd_radon_walls(a),
        Cmd::RadonBarcode(a) => cmd_radon_barcode(a),
        Cmd::SsImageCheck(a) => cmd_ss_image_check(a),
        Cmd::SimplenessTransfer(a) => cmd_simpleness(a),
        Cmd::EulerRadon(a) => cmd_euler_radon(a),
        Cmd::EulerInvert(a) => cmd_euler_invert(a),
        Cmd::CircleDualities(a) => cmd_circle_dualities(a),
        Cmd::Project1d(a) => cmd_project1d(a),
        Cmd::ContactCheck(a) => cmd_contact_check(a),
        Cmd::DiagramCheck(a) => cmd_diagram_check(a),
        Cmd::Conormal(a) => cmd_conormal(a, cli.out.as_deref()),
    }
}

// ---------------------------------------------------------------------
// Input plumbing
// ---------------------------------------------------------------------

fn load(path: &Path, key: &str, digest: &mut InputDigest) -> Result<String> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    digest.push(key, &text);
    Ok(text)
}

fn load_sheaf(path: &Path, digest: &mut InputDigest) -> Result<CellSheaf> {
    let text = load(path, "sheaf", digest)?;
    sheaf_from_json(&text).with_context(|| format!("in {}", path.display()))
}

fn parse_rational(s: &str) -> Result<Rat> {
    parse_rat(s.trim()).with_context(|| format!("bad rational {s:?}"))
}

fn parse_pair(s: &str) -> Result<(Rat, Rat)> {
    let (a, b) = s
        .split_once(',')
        .with_context(|| format!("expected \"a,b\", got {s:?}"))?;
    Ok((parse_rational(a)?, parse_rational(b)?))
}

// ---------------------------------------------------------------------
// Payload rendering
// ---------------------------------------------------------------------

fn fmt_pair(p: &(Rat, Rat)) -> String {
    format!("{},{}", fmt_rat(&p.0), fmt_rat(&p.1))
}

fn fmt_dir<T: Display>(d: &(T, T)) -> String {
    format!("{},{}", d.0, d.1)
}

fn dims_json(g: &GradedDims) -> Value {
    serde_json::to_value(g).expect("graded dims serialize")
}

fn sector_json(s: &SectorDesc) -> Value {
    match s {
        SectorDesc::Ray { dir } => json!({ "ray": fmt_dir(dir) }),
        SectorDesc::Open { from, to } => json!({ "from": fmt_dir(from), "to": fmt_dir(to) }),
    }
}

fn bar_end_json(e: &BarEnd) -> Value {
    match e {
        BarEnd::NegInf => json!("-inf"),
        BarEnd::PosInf => json!("+inf"),
        BarEnd::At { t, closed } => json!({ "t": fmt_rat(t), "closed": closed }),
    }
}

fn bar_json(b: &Bar) -> Value {
    json!({
        "degree": b.degree,
        "birth": bar_end_json(&b.birth),
        "death": bar_end_json(&b.death),
        "mult": b.mult,
    })
}

fn table_json(f: &CellSheaf1D) -> Value {
    Value::Array(
        f.stalk_table()
            .into_iter()
            .map(|(on, dims)| json!({ "on": on, "dims": dims_json(&dims) }))
            .collect(),
    )
}

// ---------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------

fn cmd_ss(a: &MultiSheafArgs) -> Result<Outcome> {
    let mut digest = InputDigest::new("ss");
    let mut sheaves = Vec::new();
    for path in &a.sheaf {
        let f = load_sheaf(path, &mut digest)?;
        let arr = f.arrangement().clone();
        let report = f.singular_support();
        let entries: Vec<Value> = report
            .entries
            .iter()
            .map(|e| {
                let cell = arr.cell(e.cell);
                json!({
                    "cell": e.cell,
                    "dim": cell.dim,
                    "at": fmt_pair(&cell.sample),
                    "sector": sector_json(&e.sector),
                    "micro": dims_json(&e.micro),
                })
            })
            .collect();
        sheaves.push(json!({
            "file": path.display().to_string(),
            "empty": report.is_empty(),
            "entries": entries,
        }));
    }
    Ok(Outcome::query(digest, json!({ "sheaves": sheaves })))
}

fn cmd_microstalk(a: &MicrostalkArgs) -> Result<Outcome> {
    let mut digest = InputDigest::new("microstalk");
    let f = load_sheaf(&a.sheaf, &mut digest)?;
    let p = parse_pair(&a.point)?;
    digest.push("point", &fmt_pair(&p));
    let mut probes = Vec::new();
    for s in &a.xi {
        let xi = parse_pair(s)?;
        if xi == (rat(0), rat(0)) {
            bail!("covector must be nonzero");
        }
        digest.push("xi", &fmt_pair(&xi));
        let m = f.microstalk(&p, &xi);
        probes.push(json!({
            "xi": fmt_pair(&xi),
            "micro": dims_json(&m),
            "total": m.total(),
        }));
    }
    Ok(Outcome::query(
        digest,
        json!({ "point": fmt_pair(&p), "probes": probes }),
    ))
}

fn cmd_radon_stalk(a: &RadonStalkArgs) -> Result<Outcome> {
    let mut digest = InputDigest::new("radon-stalk");
    let mut loaded = Vec::new();
    for path in &a.sheaf {
        let f = load_sheaf(path, &mut digest)?;
        loaded.push((path, f));
    }
    let nhats: Vec<(Rat, Rat)> = a.nhat.iter().map(|s| parse_pair(s)).collect::<Result<_>>()?;
    for n in &nhats {
        digest.push("nhat", &fmt_pair(n));
    }
    if let Some(rtext) = &a.r {
        let r = parse_rational(rtext)?;
        digest.push("r", &fmt_rat(&r));
        if loaded.len() != 1 || nhats.len() != 1 {
            bail!("a single stalk query takes exactly one --sheaf and one --nhat");
        }
        let q = LineQuery::new(nhats[0].clone(), r)?;
        let g = radon_stalk(&loaded[0].1, &q)?;
        return Ok(Outcome::query(digest, json!({ "stalk": dims_json(&g) })));
    }
    let mut scan = Vec::new();
    for (path, f) in &loaded {
        let mut directions = Vec::new();
        for nhat in &nhats {
            let d = LineQuery::new(nhat.clone(), rat(0))?.dir()?;
            let walls = wall_set(f.arrangement(), &d);
            let samples = if walls.is_empty() {
                vec![rat(0)]
            } else {
                sample_grid(&walls)
            };
            let rows: Vec<Value> = samples
                .iter()
                .map(|rho| {
                    let g = stalk_at_scaled(f, &d, rho)?;
                    Ok(json!({
                        "r": fmt_rat(rho),
                        "stalk": dims_json(&g),
                        "euler": g.euler(),
                    }))
                })
                .collect::<Result<_>>()?;
            directions.push(json!({
                "nhat": fmt_dir(&d),
                "walls": walls.iter().map(fmt_rat).collect::<Vec<_>>(),
                "samples": rows,
            }));
        }
        scan.push(json!({
            "file": path.display().to_string(),
            "directions": directions,
        }));
    }
    Ok(Outcome::query(digest, json!({ "scan": scan })))
}

/// Finite walls of the transform along one direction: positions, covector
/// signs, and microstalks of the direction's bar sheaf.
fn direction_wall_entries(
    f: &CellSheaf,
    nhat: &(Rat, Rat),
) -> Result<Vec<(Rat, i8, GradedDims)>> {
    let bars = direction_barcode(f, nhat)?;
    if bars.is_empty() {
        return Ok(Vec::new());
    }
    let sheaf = CellSheaf1D::compile_from_bars(&bars)?;
    let arr = sheaf.arrangement().clone();
    Ok(sheaf
        .singular_support()
        .into_iter()
        .map(|e| {
            let cell = arr.cell(e.cell);
            let t = cell.point.clone().unwrap_or_else(|| cell.sample.clone());
            (t, e.sign, e.micro)
        })
        .collect())
}

fn cmd_radon_walls(a: &RadonWallsArgs) -> Result<Outcome> {
    let mut digest = InputDigest::new("radon-walls");
    let f = load_sheaf(&a.sheaf, &mut digest)?;
    if let Some(ntext) = &a.nhat {
        let nhat = parse_pair(ntext)?;
        digest.push("nhat", &fmt_pair(&nhat));
        let d = LineQuery::new(nhat.clone(), rat(0))?.dir()?;
        let walls: Vec<Value> = direction_wall_entries(&f, &nhat)?
            .iter()
            .map(|(t, sign, micro)| {
                json!({ "t": fmt_rat(t), "sign": sign, "micro": dims_json(micro) })
            })
            .collect();
        return Ok(Outcome::query(
            digest,
            json!({ "nhat": fmt_dir(&d), "walls": walls }),
        ));
    }

    // Predict the wall set by pushing singular-support covectors through
    // the cotangent correspondence: for each primitive direction in the
    // scan grid and each support entry whose sector contains it, the
    // image line has that direction, offset from the correspondence, and
    // an always-positive covector in the offset coordinate.
    let arr = f.arrangement().clone();
    let ss = f.singular_support();
    let to_primitive = |x: &Rat, y: &Rat| -> Result<_> {
        Ok(LineQuery::new((x.clone(), y.clone()), rat(0))?.dir()?)
    };
    let mut dirs: BTreeSet<_> = probe_grid().into_iter().collect();
    for e in &ss.entries {
        let sd = e.sector.sample_dir();
        dirs.insert(to_primitive(&Rat::from(sd.0), &Rat::from(sd.1))?);
        if let SectorDesc::Open { from, to } = &e.sector {
            dirs.insert(from.clone());
            dirs.insert(to.clone());
        }
    }
    for line in arr.lines() {
        dirs.insert(to_primitive(line.a(), line.b())?);
        dirs.insert(to_primitive(&-line.a(), &-line.b())?);
    }

    let mut predicted = BTreeSet::new();
    for d in &dirs {
        let nhat = (Rat::from(d.0.clone()), Rat::from(d.1.clone()));
        for e in &ss.entries {
            if !sector_contains(&e.sector, d) {
                continue;
            }
            let cell = arr.cell(e.cell);
            let cp = CotPoint::new(
                vec![cell.sample.0.clone(), cell.sample.1.clone()],
                vec![nhat.0.clone(), nhat.1.clone()],
            )?;
            // `d` is primitive, so the base offset needs no rescaling.
            let (_, xdot) = chi_base_unnormalized(&cp);
            predicted.insert((d.clone(), xdot, 1i8));
        }
    }

    let mut detected = BTreeSet::new();
    let mut walls_out = Vec::new();
    for d in &dirs {
        let nhat = (Rat::from(d.0.clone()), Rat::from(d.1.clone()));
        let entries = direction_wall_entries(&f, &nhat)?;
        if entries.is_empty() {
            continue;
        }
        let list: Vec<Value> = entries
            .iter()
            .map(|(t, sign, micro)| {
                detected.insert((d.clone(), t.clone(), *sign));
                json!({ "t": fmt_rat(t), "sign": sign, "micro": dims_json(micro) })
            })
            .collect();
        walls_out.push(json!({ "nhat": fmt_dir(d), "walls": list }));
    }
    let chi_predicted: Vec<Value> = predicted
        .iter()
        .map(|(d, t, sign)| json!({ "nhat": fmt_dir(d), "t": fmt_rat(t), "sign": sign }))
        .collect();
    let agrees = predicted == detected;
    Ok(Outcome::check(
        digest,
        agrees,
        json!({
            "scannedDirections": dirs.len(),
            "walls": walls_out,
            "chiPredicted": chi_predicted,
            "chiAgrees": agrees,
        }),
    ))
}

fn cmd_radon_barcode(a: &RadonBarcodeArgs) -> Result<Outcome> {
    let mut digest = InputDigest::new("radon-barcode");
    let f = load_sheaf(&a.sheaf, &mut digest)?;
    let nhat = parse_pair(&a.nhat)?;
    digest.push("nhat", &fmt_pair(&nhat));
    let d = LineQuery::new(nhat.clone(), rat(0))?.dir()?;
    let bars = direction_barcode(&f, &nhat)?;
    Ok(Outcome::query(
        digest,
        json!({
            "nhat": fmt_dir(&d),
            "bars": bars.iter().map(bar_json).collect::<Vec<_>>(),
        }),
    ))
}

fn cmd_ss_image_check(a: &SheafArg) -> Result<Outcome> {
    let mut digest = InputDigest::new("ss-image-check");
    let f = load_sheaf(&a.sheaf, &mut digest)?;
    let rep = ss_image_check(&f)?;
    let directions: Vec<Value> = rep
        .directions
        .iter()
        .map(|d| {
            json!({
                "nhat": fmt_dir(&d.dir),
                "predicted": d.predicted.iter().map(fmt_rat).collect::<Vec<_>>(),
                "detected": d.detected.iter().map(fmt_rat).collect::<Vec<_>>(),
            })
        })
        .collect();
    let missing: Vec<Value> = rep
        .missing
        .iter()
        .map(|(d, t)| json!({ "nhat": fmt_dir(d), "t": fmt_rat(t) }))
        .collect();
    let spurious: Vec<Value> = rep
        .spurious
        .iter()
        .map(|(d, t)| json!({ "nhat": fmt_dir(d), "t": fmt_rat(t) }))
        .collect();
    let pass = rep.pass();
    Ok(Outcome::check(
        digest,
        pass,
        json!({
            "directions": directions,
            "missing": missing,
            "spurious": spurious,
        }),
    ))
}

fn cmd_simpleness(a: &SimplenessArgs) -> Result<Outcome> {
    let mut digest = InputDigest::new("simpleness-transfer");
    match (&a.point, &a.xi, a.auto) {
        (Some(ptext), Some(xtext), false) => {
            if a.sheaf.len() != 1 {
                bail!("an explicit covector takes exactly one --sheaf");
            }
            let f = load_sheaf(&a.sheaf[0], &mut digest)?;
            let x = parse_pair(ptext)?;
            let xi = parse_pair(xtext)?;
            digest.push("point", &fmt_pair(&x));
            digest.push("xi", &fmt_pair(&xi));
            let rep = simpleness_transfer(&f, &x, &xi)?;
            let pass = rep.pass();
            Ok(Outcome::check(
                digest,
                pass,
                json!({
                    "point": fmt_pair(&x),
                    "xi": fmt_pair(&xi),
                    "source": dims_json(&rep.source),
                    "sourceTotal": rep.source.total(),
                    "endpoint": dims_json(&rep.endpoint),
                    "endpointTotal": rep.endpoint.total(),
                }),
            ))
        }
        (None, None, true) => {
            let mut sheaves = Vec::new();
            let mut pass = true;
            for path in &a.sheaf {
                let f = load_sheaf(path, &mut digest)?;
                let arr = f.arrangement().clone();
                let mut probes = Vec::new();
                for e in &f.singular_support().entries {
                    let x = arr.cell(e.cell).sample.clone();
                    let sd = e.sector.sample_dir();
                    let xi = (Rat::from(sd.0), Rat::from(sd.1));
                    if &x.0 * &xi.1 != &x.1 * &xi.0 {
                        continue;
                    }
                    let rep = simpleness_transfer(&f, &x, &xi)?;
                    pass &= rep.pass();
                    probes.push(json!({
                        "point": fmt_pair(&x),
                        "xi": fmt_pair(&xi),
                        "sourceTotal": rep.source.total(),
                        "endpointTotal": rep.endpoint.total(),
                        "pass": rep.pass(),
                    }));
                }
                sheaves.push(json!({
                    "file": path.display().to_string(),
                    "probes": probes,
                }));
            }
            Ok(Outcome::check(digest, pass, json!({ "sheaves": sheaves })))
        }
        _ => bail!("pass either --point with --xi, or --auto"),
    }
}

fn random_query<R: Rng>(rng: &mut R) -> LineQuery {
    loop {
        let a = rng.gen_range(-5i64..=5);
        let b = rng.gen_range(-5i64..=5);
        if a == 0 && b == 0 {
            continue;
        }
        let r = Rat::new(
            rng.gen_range(-20i64..=20).into(),
            rng.gen_range(1i64..=4).into(),
        );
        return LineQuery::new((rat(a), rat(b)), r).expect("direction is nonzero");
    }
}

fn cmd_euler_radon(a: &EulerRadonArgs) -> Result<Outcome> {
    let mut digest = InputDigest::new("euler-radon");
    let cfun = a
        .cfun
        .as_ref()
        .map(|path| -> Result<_> {
            let text = load(path, "cfun", &mut digest)?;
            cfun_from_json(&text).with_context(|| format!("in {}", path.display()))
        })
        .transpose()?;
    match (cfun, a.random) {
        (Some(phi), None) => {
            let nhat = parse_pair(a.nhat.as_deref().context("--nhat is required")?)?;
            let r = parse_rational(a.r.as_deref().context("--r is required")?)?;
            digest.push("nhat", &fmt_pair(&nhat));
            digest.push("r", &fmt_rat(&r));
            let q = LineQuery::new(nhat, r)?;
            let v = euler_radon(&phi, &q)?;
            Ok(Outcome::query(digest, json!({ "value": v })))
        }
        (user_phi, Some(runs)) => {
            if a.sheaf.is_empty() {
                bail!("comparison mode needs at least one --sheaf");
            }
            if user_phi.is_some() && a.sheaf.len() != 1 {
                bail!("comparing against --cfun takes exactly one --sheaf");
            }
            digest.push("random", &runs.to_string());
            digest.push("seed", &a.seed.to_string());
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let mut sheaves = Vec::new();
            let mut mismatches = 0usize;
            let mut first = Value::Null;
            for path in &a.sheaf {
                let f = load_sheaf(path, &mut digest)?;
                let phi = match &user_phi {
                    Some(phi) => phi.clone(),
                    None => local_euler(&f),
                };
                let mut bad = 0usize;
                for _ in 0..runs {
                    let q = random_query(&mut rng);
                    let sheaf_side = radon_stalk(&f, &q)?.euler();
                    let euler_side = euler_radon(&phi, &q)?;
                    if sheaf_side != euler_side {
                        bad += 1;
                        if first.is_null() {
                            first = json!({
                                "file": path.display().to_string(),
                                "nhat": fmt_pair(&q.nhat),
                                "r": fmt_rat(&q.r),
                                "stalkEuler": sheaf_side,
                                "cfunValue": euler_side,
                            });
                        }
                    }
                }
                mismatches += bad;
                sheaves.push(json!({
                    "file": path.display().to_string(),
                    "queries": runs,
                    "mismatches": bad,
                }));
            }
            Ok(Outcome::check(
                digest,
                mismatches == 0,
                json!({
                    "seed": a.seed,
                    "sheaves": sheaves,
                    "mismatches": mismatches,
                    "firstMismatch": first,
                }),
            ))
        }
        _ => bail!("pass --cfun with --nhat/--r, or --sheaf ... --random N"),
    }
}

fn inversion_json(rep: &sheaflab::euler::InversionReport) -> (bool, usize, Value) {
    let failures: Vec<&sheaflab::euler::InversionSample> = rep
        .samples
        .iter()
        .filter(|s| s.value != s.reconstructed)
        .collect();
    let first = failures.first().map_or(Value::Null, |s| {
        json!({
            "point": fmt_pair(&s.point),
            "value": s.value,
            "reconstructed": s.reconstructed,
        })
    });
    (rep.pass(), failures.len(), first)
}

fn cmd_euler_invert(a: &EulerInvertArgs) -> Result<Outcome> {
    let mut digest = InputDigest::new("euler-invert");
    match (&a.cfun, a.random) {
        (Some(path), None) => {
            let text = load(path, "cfun", &mut digest)?;
            let phi =
                cfun_from_json(&text).with_context(|| format!("in {}", path.display()))?;
            let rep = inversion_check(&phi)?;
            let (pass, failed, first) = inversion_json(&rep);
            Ok(Outcome::check(
                digest,
                pass,
                json!({
                    "integral": rep.integral,
                    "kernelOffDiagonal": rep.kernel_off_diagonal,
                    "kernelDiagonal": rep.kernel_diagonal,
                    "samples": rep.samples.len(),
                    "failures": failed,
                    "firstFailure": first,
                }),
            ))
        }
        (None, Some(runs)) => {
            digest.push("random", &runs.to_string());
            digest.push("lines", &a.lines.to_string());
            digest.push("seed", &a.seed.to_string());
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let mut failures = 0usize;
            let mut first = Value::Null;
            for i in 0..runs {
                let phi = random_compact_cfun(&mut rng, a.lines);
                let rep = inversion_check(&phi)?;
                if !rep.pass() {
                    failures += 1;
                    if first.is_null() {
                        let (_, _, sample) = inversion_json(&rep);
                        first = json!({ "run": i, "sample": sample });
                    }
                }
            }
            Ok(Outcome::check(
                digest,
                failures == 0,
                json!({
                    "runs": runs,
                    "lines": a.lines,
                    "seed": a.seed,
                    "failures": failures,
                    "firstFailure": first,
                }),
            ))
        }
        _ => bail!("pass --cfun FILE, or --random N"),
    }
}

/// Seeded soak of the three circle identities; shared by
/// `circle-dualities` and `diagram-check --identity all`.
fn circle_soak(runs: usize, seed: u64) -> (bool, Value) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut failures = 0usize;
    let mut first = Value::Null;
    let (mut sum_all, mut antipodal_all, mut polarization_all) = (true, true, true);
    for i in 0..runs {
        let phi = random_cfun_circle(&mut rng, 12);
        let rep = circle_dualities(&phi);
        sum_all &= rep.sum_rule;
        antipodal_all &= rep.antipodal_rule;
        polarization_all &= rep.polarization_rule;
        if !(rep.sum_rule && rep.antipodal_rule && rep.polarization_rule) {
            failures += 1;
            if first.is_null() {
                first = json!({
                    "run": i,
                    "integral": rep.integral,
                    "sumRule": rep.sum_rule,
                    "antipodalRule": rep.antipodal_rule,
                    "polarizationRule": rep.polarization_rule,
                });
            }
        }
    }
    let payload = json!({
        "runs": runs,
        "seed": seed,
        "failures": failures,
        "sumRule": sum_all,
        "antipodalRule": antipodal_all,
        "polarizationRule": polarization_all,
        "firstFailure": first,
    });
    (failures == 0, payload)
}

fn cmd_circle_dualities(a: &CircleArgs) -> Result<Outcome> {
    let mut digest = InputDigest::new("circle-dualities");
    digest.push("random", &a.random.to_string());
    digest.push("seed", &a.seed.to_string());
    let (pass, payload) = circle_soak(a.random, a.seed);
    Ok(Outcome::check(digest, pass, payload))
}

/// Project, test for negative covectors, and re-project via the bars of
/// the (possibly unbounded) output.
fn project_once(f: &CellSheaf1D) -> Result<(CellSheaf1D, bool, bool)> {
    let p = f.tamarkin_project()?;
    let no_negative = p.singular_support().iter().all(|e| e.sign > 0);
    let pp = CellSheaf1D::compile_from_bars(&p.persistence_bars()?)?;
    let idempotent = pp.stalk_table() == p.stalk_table();
    Ok((p, no_negative, idempotent))
}

fn ray_sheaf(at: i64, shift: i32) -> Result<CellSheaf1D> {
    let spec = SheafSpec1D {
        indicators: vec![IndicatorSpec1D {
            support: Interval1D {
                lo: Some((rat(at), true)),
                hi: None,
            },
            shift,
            mult: 1,
        }],
    };
    Ok(CellSheaf1D::compile(&spec)?)
}

fn cmd_project1d(a: &Project1dArgs) -> Result<Outcome> {
    let mut digest = InputDigest::new("project1d");
    match (&a.sheaf, a.random) {
        (Some(path), None) => {
            let text = load(path, "sheaf", &mut digest)?;
            let spec =
                spec1d_from_json(&text).with_context(|| format!("in {}", path.display()))?;
            let f = CellSheaf1D::compile(&spec)?;
            let (p, no_negative, idempotent) = project_once(&f)?;
            let pass = no_negative && idempotent;
            Ok(Outcome::check(
                digest,
                pass,
                json!({
                    "input": table_json(&f),
                    "projected": table_json(&p),
                    "bars": p.persistence_bars()?.iter().map(bar_json).collect::<Vec<_>>(),
                    "noNegativeCovectors": no_negative,
                    "idempotent": idempotent,
                }),
            ))
        }
        (None, Some(runs)) => {
            digest.push("random", &runs.to_string());
            digest.push("seed", &a.seed.to_string());

            // Two fixed worked examples, then the seeded soak.
            let closed = CellSheaf1D::compile(&SheafSpec1D {
                indicators: vec![IndicatorSpec1D {
                    support: Interval1D::closed(rat(0), rat(1)),
                    shift: 0,
                    mult: 1,
                }],
            })?;
            let closed_ok =
                closed.tamarkin_project()?.stalk_table() == ray_sheaf(0, 0)?.stalk_table();
            let open = CellSheaf1D::compile(&SheafSpec1D {
                indicators: vec![IndicatorSpec1D {
                    support: Interval1D::open(rat(0), rat(1)),
                    shift: 0,
                    mult: 1,
                }],
            })?;
            let open_ok =
                open.tamarkin_project()?.stalk_table() == ray_sheaf(1, -1)?.stalk_table();
            let checks = vec![
                json!({ "name": "closed unit interval projects to the closed ray at 0", "pass": closed_ok }),
                json!({ "name": "open unit interval projects to the shifted closed ray at 1", "pass": open_ok }),
            ];

            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            let mut failures = 0usize;
            let mut first = Value::Null;
            for i in 0..runs {
                let f = random_compact_sheaf1d(&mut rng, 4);
                let (_, no_negative, idempotent) = project_once(&f)?;
                if !(no_negative && idempotent) {
                    failures += 1;
                    if first.is_null() {
                        first = json!({
                            "run": i,
                            "noNegativeCovectors": no_negative,
                            "idempotent": idempotent,
                        });
                    }
                }
            }
            let pass = closed_ok && open_ok && failures == 0;
            Ok(Outcome::check(
                digest,
                pass,
                json!({
                    "checks": checks,
                    "runs": runs,
                    "seed": a.seed,
                    "failures": failures,
                    "firstFailure": first,
                }),
            ))
        }
        _ => bail!("pass --sheaf FILE, or --random N"),
    }
}

fn cmd_contact_check(a: &ContactCheckArgs) -> Result<Outcome> {
    let mut digest = InputDigest::new("contact-check");
    let map: MapId = a.map.parse()?;
    digest.push("map", &a.map.to_ascii_lowercase());
    let ns = match a.n {
        Some(n) => vec![n],
        None => vec![2, 3],
    };
    let modes = match &a.mode {
        Some(s) => vec![s.parse::<Mode>()?],
        None => vec![Mode::Exact, Mode::Float],
    };
    for n in &ns {
        digest.push("n", &n.to_string());
    }
    digest.push("samples", &a.samples.to_string());
    digest.push("seed", &a.seed.to_string());
    for mode in &modes {
        digest.push("mode", match mode {
            Mode::Exact => "exact",
            Mode::Float => "float",
        });
    }
    let mut checks = Vec::new();
    let mut pass = true;
    for &n in &ns {
        for &mode in &modes {
            let rep = contact_check(map, n, a.samples, a.seed, mode)?;
            pass &= rep.pass();
            checks.push(json!({
                "map": rep.map,
                "mode": rep.mode,
                "n": rep.n,
                "samples": rep.samples,
                "failures": rep.failures,
                "maxFormResidual": rep.max_form_residual,
                "maxLiouvilleResidual": rep.max_liouville_residual,
                "maxCosphereResidual": rep.max_cosphere_residual,
                "tol": rep.tol,
                "notes": rep.notes,
                "pass": rep.pass(),
            }));
        }
    }
    Ok(Outcome::check(digest, pass, json!({ "checks": checks })))
}

fn diagram_json(rep: &sheaflab::contact::DiagramReport) -> Value {
    json!({
        "identity": rep.identity,
        "n": rep.n,
        "samples": rep.samples,
        "failures": rep.failures,
        "maxResidual": if rep.failures == 0 { 0.0 } else { 1.0 },
        "pairings": rep.pairings,
        "pass": rep.pass(),
    })
}

fn cmd_diagram_check(a: &DiagramCheckArgs) -> Result<Outcome> {
    let mut digest = InputDigest::new("diagram-check");
    digest.push("identity", &a.identity.to_ascii_lowercase());
    digest.push("n", &a.n.to_string());
    digest.push("samples", &a.samples.to_string());
    digest.push("seed", &a.seed.to_string());
    if a.identity.eq_ignore_ascii_case("all") {
        let mut kernels = Vec::new();
        let mut pass = true;
        for id in [
            DiagramId::RaS,
            DiagramId::FtRa,
            DiagramId::FsSph,
            DiagramId::IotaPhi,
        ] {
            let rep = diagram_check(id, a.n, a.samples, a.seed)?;
            pass &= rep.pass();
            kernels.push(diagram_json(&rep));
        }
        let (circle_pass, circle) = circle_soak(100, a.seed);
        pass &= circle_pass;
        return Ok(Outcome::check(
            digest,
            pass,
            json!({ "kernels": kernels, "circle": circle }),
        ));
    }
    let id: DiagramId = a.identity.parse()?;
    let rep = diagram_check(id, a.n, a.samples, a.seed)?;
    let pass = rep.pass();
    Ok(Outcome::check(digest, pass, diagram_json(&rep)))
}

fn conormal_csv(samples: &[ConormalSample<f64>], mapped: &[MappedSample]) -> String {
    let mut out = String::from(
        "qx,qy,qz,px,py,pz,nhatx,nhaty,nhatz,r,etax,etay,etaz,etar,\
         constraintResidual,routeResidual,legendrianResidual\n",
    );
    for (s, m) in samples.iter().zip(mapped) {
        let i = &m.image;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            s.q[0],
            s.q[1],
            s.q[2],
            s.p[0],
            s.p[1],
            s.p[2],
            i.nhat[0],
            i.nhat[1],
            i.nhat[2],
            i.r,
            i.eta[0],
            i.eta[1],
            i.eta[2],
            i.etar,
            m.constraint_residual,
            m.route_residual,
            m.legendrian_residual,
        ));
    }
    out
}

fn cmd_conormal(a: &ConormalArgs, out: Option<&Path>) -> Result<Outcome> {
    let mut digest = InputDigest::new("conormal");
    let text = load(&a.knot, "knot", &mut digest)?;
    #[derive(serde::Deserialize)]
    struct KnotFile {
        vertices: Vec<Vec<f64>>,
    }
    let kf: KnotFile =
        serde_json::from_str(&text).with_context(|| format!("in {}", a.knot.display()))?;
    let knot = PlKnot::new(kf.vertices).with_context(|| format!("in {}", a.knot.display()))?;
    digest.push("perSeg", &a.per_seg.to_string());
    digest.push("perFiber", &a.per_fiber.to_string());
    digest.push("step", &a.step.to_string());
    let samples = sample_conormal(&knot, a.per_seg, a.per_fiber)?;
    let (mapped, rep) = map_conormal(&samples, a.step);
    let mut outcome = Outcome::check(
        digest,
        rep.pass(),
        json!({
            "samples": rep.samples,
            "step": rep.step,
            "maxConstraintResidual": rep.max_constraint_residual,
            "maxRouteResidual": rep.max_route_residual,
            "maxLegendrianResidual": rep.max_legendrian_residual,
            "fiberInjective": rep.fiber_injective,
        }),
    );
    if let Some(path) = out {
        fs::write(path, conormal_csv(&samples, &mapped))
            .with_context(|| format!("writing {}", path.display()))?;
        outcome.out_written = true;
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_parsing() {
        let (a, b) = parse_pair(" 1/2 , -3 ").unwrap();
        assert_eq!(fmt_rat(&a), "1/2");
        assert_eq!(fmt_rat(&b), "-3");
        assert!(parse_pair("1").is_err());
        assert!(parse_pair("x,1").is_err());
    }

    #[test]
    fn digest_orders_and_separates() {
        let mut a = InputDigest::new("cmd");
        a.push("k", "v1");
        a.push("k", "v2");
        let mut b = InputDigest::new("cmd");
        b.push("k", "v2");
        b.push("k", "v1");
        assert_ne!(a.hex(), b.hex());

        let mut c = InputDigest::new("cmd");
        c.push("k", "v1");
        let mut d = InputDigest::new("cmd");
        d.push("k", "v1");
        assert_eq!(c.hex(), d.hex());
    }

    #[test]
    fn report_field_order_is_stable() {
        let rep = RunReport {
            command: "ss".into(),
            inputs_digest: "d".into(),
            pass: true,
            payload: json!({"z": 1, "a": 2}),
            wall_ms: None,
        };
        let text = serde_json::to_string(&rep).unwrap();
        assert_eq!(
            text,
            r#"{"command":"ss","inputsDigest":"d","pass":true,"payload":{"a":2,"z":1}}"#
        );
    }

    #[test]
    fn bar_rendering() {
        let b = Bar {
            degree: -1,
            birth: BarEnd::At {
                t: rat(0),
                closed: true,
            },
            death: BarEnd::PosInf,
            mult: 2,
        };
        assert_eq!(
            bar_json(&b).to_string(),
            r#"{"birth":{"closed":true,"t":"0"},"death":"+inf","degree":-1,"mult":2}"#
        );
    }
}
