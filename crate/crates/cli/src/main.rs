use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use lzquench::io::{read_json, write_json, ExperimentConfig};
use lzquench::pipeline::{self, Detection, RunOverrides, ScanReport};
use lzquench::validate;
use lzquench::{Error, Method};

/// Slow quench dynamics and topology of band models.
#[derive(Debug, Parser)]
#[command(name = "lzquench", version)]
struct Cli {
    /// Experiment configuration (TOML).
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory; overrides `output.dir` from the configuration.
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Worker threads for momentum scans.
    #[arg(long, global = true, env = "QT_THREADS", value_name = "N")]
    threads: Option<usize>,
    /// Texture evaluation method; overrides `scan.method`.
    #[arg(long, global = true, value_parser = ["analytic", "numeric", "auto"])]
    method: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Quench at a single momentum for one or more values of g.
    Single,
    /// Texture map over the Brillouin zone, zero sets and invariant.
    Scan,
    /// Re-analyze a saved texture map.
    Detect {
        /// Map CSV written by `scan`.
        map: PathBuf,
        /// SIS tolerance; defaults to the configuration value or 0.02.
        #[arg(long)]
        tol_sis: Option<f64>,
    },
    /// Figures from saved map CSVs or scan reports.
    Plot {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        tol_sis: Option<f64>,
    },
    /// Cross-check the solvers against independent references.
    Validate,
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, Error> {
    let path = cli.config.as_ref().ok_or_else(|| Error::Config("--config is required for this command".into()))?;
    ExperimentConfig::load(path)
}

fn out_dir(cli: &Cli, cfg: Option<&ExperimentConfig>) -> PathBuf {
    cli.out.clone().or_else(|| cfg.map(|c| c.output.dir.clone())).unwrap_or_else(|| PathBuf::from("out"))
}

fn tol_sis(cli: &Cli, explicit: Option<f64>) -> Result<f64, Error> {
    if let Some(t) = explicit {
        return Ok(t);
    }
    match &cli.config {
        Some(p) => Ok(ExperimentConfig::load(p)?.detect.tol_sis),
        None => Ok(lzquench::topo::DEFAULT_TOL_SIS),
    }
}

fn print_detection(d: &Detection) {
    let count = |k| d.zero_sets.iter().filter(|s| s.kind == k).count();
    use lzquench::topo::ZeroKind::*;
    println!("zero sets: {} bis, {} sis, {} ambiguous", count(Bis), count(Sis), count(Ambiguous));
    match (&d.invariant, &d.invariant_error) {
        (Some(r), _) => println!("invariant: {} (raw {:.6})", r.value, r.raw),
        (None, Some(e)) => println!("invariant: unavailable ({e})"),
        (None, None) => {}
    }
    if let Some(e) = d.expected {
        println!("expected: {e}");
    }
    if let Some(o) = d.oracle {
        println!("oracle: {o:.6}");
    }
}

/// Map files referenced by a scan report, resolved against its directory.
fn report_maps(path: &Path) -> Result<Vec<PathBuf>, Error> {
    let r: ScanReport = read_json(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    Ok(std::iter::once(&r.map_file).chain(&r.slice_files).map(|f| dir.join(f)).collect())
}

fn run(cli: &Cli) -> Result<(), Error> {
    let method = cli.method.as_deref().map(|m| m.parse::<Method>().map_err(Error::Config)).transpose()?;
    match &cli.command {
        Command::Single => {
            let cfg = load_config(cli)?;
            let out = out_dir(cli, Some(&cfg));
            let r = pipeline::run_single(&cfg, &out)?;
            for p in &r.points {
                match p.p_analytic {
                    Some(pa) => println!("g = {}: P numeric {:.9} closed form {pa:.9}", p.g, p.p_numeric),
                    None => println!("g = {}: P numeric {:.9}", p.g, p.p_numeric),
                }
            }
            println!("wrote {}", out.join("single_report.json").display());
        }
        Command::Scan => {
            let cfg = load_config(cli)?;
            let out = out_dir(cli, Some(&cfg));
            let r = pipeline::run_scan(&cfg, &out, RunOverrides { method, threads: cli.threads })?;
            println!("{} points ({}), {} failed", r.points, r.method, r.failures);
            print_detection(&r.detection);
            println!("wrote {}", out.join("report.json").display());
            r.detection.status()?;
        }
        Command::Detect { map, tol_sis: t } => {
            let t = tol_sis(cli, *t)?;
            let out = cli.out.clone().unwrap_or_else(|| map.parent().unwrap_or(Path::new(".")).to_path_buf());
            let d = pipeline::detect_file(map, t, &out)?;
            print_detection(&d);
            println!("wrote {}", out.join("detect_report.json").display());
            d.status()?;
        }
        Command::Plot { files, tol_sis: t } => {
            let t = tol_sis(cli, *t)?;
            let out = out_dir(cli, None);
            let mut maps = Vec::new();
            for f in files {
                if f.extension().is_some_and(|e| e == "json") {
                    maps.extend(report_maps(f)?);
                } else {
                    maps.push(f.clone());
                }
            }
            for name in pipeline::plot_files(&maps, t, &out)? {
                println!("wrote {}", out.join(name).display());
            }
        }
        Command::Validate => {
            let out = out_dir(cli, None);
            std::fs::create_dir_all(&out)?;
            let r = validate::run_all()?;
            for c in &r.checks {
                let tag = if c.pass { "PASS" } else { "FAIL" };
                println!("{tag} {}: {:.3e} (tol {:.1e})", c.name, c.value, c.tol);
            }
            write_json(&out.join("validation.json"), &r)?;
            if !r.passed() {
                let failed: Vec<&str> = r.checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
                return Err(Error::Validation(failed.join(", ")));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
