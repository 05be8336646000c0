//! `gfh`: batch front end over scene files.
//!
//! Exit codes: 0 success, 1 a verdict failed, 2 invalid input or field gate,
//! 3 theorem-violation alarm, 4 I/O, 5 numerical failure, 64 usage.

use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use gfh_core::report::{self, SceneRun};
use gfh_core::scene::Scene;
use gfh_core::svg::barcode_svg;
use gfh_core::weights::CoefficientField;
use gfh_core::GfhError;

#[derive(Parser)]
#[command(
    name = "gfh",
    version,
    about = "Generating-function homology of Hamiltonian maps of weighted projective spaces"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fixed orbits, isotropy orders, actions and index data.
    Spectrum(Common),
    /// Periodic barcode as JSON and SVG; `--barcode` replays a saved file.
    Barcode(Common),
    /// Spectral invariants c_k.
    Invariants(Common),
    /// Verdicts for the requested checks; exit 1 if any fails.
    Verify(Common),
    /// Everything above, written to the output directory.
    Report(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// Scene file (TOML).
    #[arg(long)]
    scene: Option<PathBuf>,
    /// Saved barcode JSON to replay instead of a scene.
    #[arg(long, conflicts_with = "scene")]
    barcode: Option<PathBuf>,
    /// Output directory; defaults to the scene's `out` or `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Coefficient field `q` or `f<p>`; overrides the scene.
    #[arg(long)]
    field: Option<String>,
    /// Window m; overrides the scene.
    #[arg(long)]
    window: Option<usize>,
    /// Comma-separated odd primes for the Smith checks; overrides the scene.
    #[arg(long)]
    primes: Option<String>,
    /// Comma-separated check names, or `all`.
    #[arg(long)]
    checks: Option<String>,
    /// Seed for randomized checks.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

enum Failure {
    Lib(GfhError),
    Verdict,
}

impl From<GfhError> for Failure {
    fn from(e: GfhError) -> Self {
        Failure::Lib(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Lib(GfhError::Io(e))
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 64 } else { 0 });
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verdict) => ExitCode::from(1),
        Err(Failure::Lib(e)) => {
            let msg = json!({ "error": e.reason(), "message": e.to_string() });
            eprintln!("{msg}");
            ExitCode::from(e.code())
        }
    }
}

fn load_scene(c: &Common) -> Result<Scene, GfhError> {
    let path = c.scene.as_ref().ok_or_else(|| GfhError::Scene("either --scene or --barcode is required".into()))?;
    let mut scene = Scene::load(path)?;
    if let Some(f) = &c.field {
        scene.fields = vec![CoefficientField::parse(f)?];
    }
    if let Some(m) = c.window {
        scene.window = m;
    }
    if let Some(p) = &c.primes {
        scene.primes = p
            .split(',')
            .map(|x| x.trim().parse::<u32>().map_err(|_| GfhError::Scene(format!("bad prime '{x}'"))))
            .collect::<Result<_, _>>()?;
    }
    scene.validate()?;
    Ok(scene)
}

fn out_dir(c: &Common, scene: Option<&Scene>) -> PathBuf {
    c.out
        .clone()
        .or_else(|| scene.and_then(|s| s.out.clone()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"))
}

/// Writes through a temporary file in the same directory and renames it.
fn write_atomic(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, GfhError> {
    std::fs::create_dir_all(dir)?;
    let target = dir.join(name);
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(&target).map_err(|e| GfhError::Io(e.error))?;
    Ok(target)
}

fn emit(dir: &Path, name: &str, contents: &str) -> Result<(), GfhError> {
    let p = write_atomic(dir, name, contents)?;
    println!("{}", p.display());
    Ok(())
}

fn first_run(scene: &Scene) -> Result<SceneRun, GfhError> {
    report::run_scene(scene, scene.fields[0])
}

fn checks(c: &Common) -> Result<Vec<String>, GfhError> {
    match &c.checks {
        Some(list) => report::parse_checks(list),
        None => Ok(report::DEFAULT_CHECKS.iter().map(|s| s.to_string()).collect()),
    }
}

fn run(cmd: Command) -> Result<(), Failure> {
    match cmd {
        Command::Spectrum(c) => {
            let scene = load_scene(&c)?;
            let table = report::spectrum_table(&first_run(&scene)?)?;
            emit(&out_dir(&c, Some(&scene)), "spectrum.json", &report::to_json(&table)?)?;
        }
        Command::Barcode(c) => {
            if let Some(path) = &c.barcode {
                let b = report::parse_barcode(&std::fs::read_to_string(path)?)?;
                let dir = out_dir(&c, None);
                emit(&dir, "barcode.json", &report::to_json(&b)?)?;
                emit(&dir, "barcode.svg", &barcode_svg(&b, -1.0, 2.0))?;
                return Ok(());
            }
            let scene = load_scene(&c)?;
            let run = first_run(&scene)?;
            let doc = report::barcode_document(&run);
            let dir = out_dir(&c, Some(&scene));
            emit(&dir, "barcode.json", &report::to_json(&doc)?)?;
            emit(&dir, "barcode.svg", &barcode_svg(&doc.barcode, -1.0, 2.0))?;
        }
        Command::Invariants(c) => {
            let scene = load_scene(&c)?;
            let doc = report::invariants_document(&first_run(&scene)?)?;
            emit(&out_dir(&c, Some(&scene)), "invariants.json", &report::to_json(&doc)?)?;
        }
        Command::Verify(c) => {
            let (rep, dir) = if let Some(path) = &c.barcode {
                let b = report::parse_barcode(&std::fs::read_to_string(path)?)?;
                (report::verify_barcode(&b)?, out_dir(&c, None))
            } else {
                let scene = load_scene(&c)?;
                (report::verify_scene(&scene, &checks(&c)?, c.seed)?, out_dir(&c, Some(&scene)))
            };
            emit(&dir, "verify.json", &report::to_json(&rep)?)?;
            if !rep.passed() {
                return Err(Failure::Verdict);
            }
        }
        Command::Report(c) => {
            let scene = load_scene(&c)?;
            let dir = out_dir(&c, Some(&scene));
            let run = first_run(&scene)?;
            emit(&dir, "scene.toml", &scene.to_toml()?)?;
            match report::spectrum_table(&run) {
                Ok(t) => emit(&dir, "spectrum.json", &report::to_json(&t)?)?,
                Err(GfhError::NonIsolated { .. }) => {}
                Err(e) => return Err(e.into()),
            }
            let doc = report::barcode_document(&run);
            emit(&dir, "barcode.json", &report::to_json(&doc)?)?;
            emit(&dir, "barcode.svg", &barcode_svg(&doc.barcode, -1.0, 2.0))?;
            if run.output.resolution.is_exact() {
                emit(&dir, "invariants.json", &report::to_json(&report::invariants_document(&run)?)?)?;
            }
            let rep = report::verify_scene(&scene, &checks(&c)?, c.seed)?;
            emit(&dir, "verify.json", &report::to_json(&rep)?)?;
            if !rep.passed() {
                return Err(Failure::Verdict);
            }
        }
    }
    Ok(())
}
