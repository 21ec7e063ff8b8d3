use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicU64, Ordering};

use clap::{Args, Parser, Subcommand, ValueEnum};

use dtc_core::analysis::CollapseMode;
use dtc_core::observables::AverageMode;
use dtc_core::pipeline::{
    alpha_table, collapse_dataset, cx_table, relaxation_table, CollapseOutcome, CollapseRequest,
    RelaxOptions, COLLAPSE_WINDOW, DEFAULT_BOOTSTRAP_SEED, RELAX_WINDOW,
};
use dtc_core::store::{export, run_sweep, Dataset, ExportFormat, Selector, SweepConfig, SweepOptions};
use dtc_core::Error;

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_MISSING: u8 = 4;
const EXIT_UNIDENTIFIABLE: u8 = 5;

/// Disordered kicked Ising chain: sweeps, relaxation fits and scaling collapses.
#[derive(Parser)]
#[command(name = "dtc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run (or resume) a disorder sweep described by a config file.
    Sweep(SweepArgs),
    /// Fit a1 exp(-T/tau) + a2 to the disorder-averaged O(T) of every (L, g).
    FitRelax(FitRelaxArgs),
    /// Disorder-averaged eigenstate order parameter or C_x tables.
    Eigen(EigenArgs),
    /// Finite-size-scaling collapse with bootstrap errors.
    Collapse(CollapseArgs),
    /// Dump selected records as JSON lines or a table.
    Export(ExportArgs),
}

#[derive(Args)]
struct DataArgs {
    /// Dataset directory.
    #[arg(long, conflicts_with = "config")]
    data: Option<PathBuf>,
    /// Sweep config whose out_dir is the dataset.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Config override key=value (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE", requires = "config")]
    overrides: Vec<String>,
}

impl DataArgs {
    fn open(&self) -> Result<Dataset, Error> {
        let dir = match (&self.data, &self.config) {
            (Some(d), _) => d.clone(),
            (None, Some(c)) => SweepConfig::load(c, &self.overrides)?.out_dir,
            (None, None) => return Err(Error::Config("either --data or --config is required".into())),
        };
        Dataset::open(&dir)
    }
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    /// Config override key=value (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
    /// Worker threads (0: one per core).
    #[arg(long, default_value_t = 0)]
    workers: usize,
    /// Suppress progress output.
    #[arg(long)]
    quiet: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum Average {
    Mean,
    Typical,
}

impl From<Average> for AverageMode {
    fn from(a: Average) -> Self {
        match a {
            Average::Mean => AverageMode::Mean,
            Average::Typical => AverageMode::Typical,
        }
    }
}

#[derive(Args)]
struct OutArg {
    /// Output file (default: standard output).
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OutArg {
    fn writer(&self) -> Result<Box<dyn Write>, Error> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(File::create(p).map_err(|e| io_err(p, e))?)),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

#[derive(Args)]
struct FitRelaxArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value = "mean")]
    average: Average,
    #[arg(long, default_value_t = RELAX_WINDOW.0)]
    t_min: f64,
    #[arg(long, default_value_t = RELAX_WINDOW.1)]
    t_max: f64,
    /// Bootstrap resamples for a tau_err column.
    #[arg(long)]
    bootstrap: Option<usize>,
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP_SEED)]
    seed: u64,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum EigenTable {
    Alpha,
    Cx,
}

#[derive(Args)]
struct EigenArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value = "alpha")]
    table: EigenTable,
    #[command(flatten)]
    out: OutArg,
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    #[value(name = "1d")]
    OneD,
    #[value(name = "2d")]
    TwoD,
}

#[derive(Args)]
struct CollapseArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum)]
    mode: Mode,
    #[arg(long, value_enum, default_value = "mean")]
    average: Average,
    /// Fixed nu of the two-variable collapse.
    #[arg(long, default_value_t = 2.0)]
    nu: f64,
    /// Error on the fixed nu, used by the critical-slowing-down check.
    #[arg(long, default_value_t = 0.0)]
    nu_err: f64,
    #[arg(long, default_value_t = dtc_core::model::G_CRITICAL)]
    g_c: f64,
    /// Also fit g_c inside lo:hi (one-variable collapse only).
    #[arg(long, value_parser = parse_range)]
    free_gc: Option<(f64, f64)>,
    /// Band lo:hi of ln(T/T0) L^-b for the slice table (two-variable only).
    #[arg(long, value_parser = parse_range)]
    band: Option<(f64, f64)>,
    #[arg(long, default_value_t = COLLAPSE_WINDOW.0)]
    t_min: f64,
    #[arg(long, default_value_t = COLLAPSE_WINDOW.1)]
    t_max: f64,
    #[arg(long, default_value_t = dtc_core::analysis::DEFAULT_RESAMPLES)]
    resamples: usize,
    #[arg(long, default_value_t = DEFAULT_BOOTSTRAP_SEED)]
    seed: u64,
    /// Write report.json, collapsed.tsv and slice.tsv here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Records,
    Table,
}

#[derive(Args)]
struct ExportArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Selector terms key=value (keys: kind, L, g, index), comma separated or repeated.
    #[arg(long = "select")]
    select: Vec<String>,
    #[arg(long, value_enum, default_value = "records")]
    format: Format,
    #[command(flatten)]
    out: OutArg,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (a, b) = s.split_once(':').ok_or_else(|| format!("expected lo:hi, got `{s}`"))?;
    let lo: f64 = a.trim().parse().map_err(|_| format!("bad number `{a}`"))?;
    let hi: f64 = b.trim().parse().map_err(|_| format!("bad number `{b}`"))?;
    if !(lo < hi) {
        return Err(format!("empty range `{s}`"));
    }
    Ok((lo, hi))
}

fn io_err(path: &Path, e: io::Error) -> Error {
    Error::Io {
        path: path.to_path_buf(),
        source: e,
    }
}

fn out_err(e: io::Error) -> Error {
    io_err(Path::new("<output>"), e)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Config(_) | Error::ConfigMismatch { .. } | Error::Selector(_) => EXIT_CONFIG,
        Error::Io { .. } => EXIT_IO,
        Error::MissingRecords(_) => EXIT_MISSING,
        _ => EXIT_FAILURE,
    }
}

fn cmd_sweep(a: &SweepArgs) -> Result<u8, Error> {
    let cfg = SweepConfig::load(&a.config, &a.overrides).map_err(|e| match e {
        Error::Io { path, source } => Error::Config(format!("{}: {source}", path.display())),
        other => other,
    })?;
    let step = (cfg.expected_records() / 100).max(1);
    let shown = AtomicU64::new(0);
    let progress = |done: u64, total: u64| {
        if done / step > shown.load(Ordering::Relaxed) || done == total {
            shown.store(done / step, Ordering::Relaxed);
            eprintln!("{done}/{total} records");
        }
    };
    let opts = SweepOptions {
        workers: a.workers,
        progress: if a.quiet { None } else { Some(&progress) },
        max_units: None,
    };
    let s = run_sweep(&cfg, &opts)?;
    if !a.quiet {
        eprintln!(
            "{}: {} of {} records ({} new)",
            s.dir.display(),
            s.completed,
            s.expected,
            s.new_records
        );
    }
    Ok(0)
}

fn cmd_fit_relax(a: &FitRelaxArgs) -> Result<u8, Error> {
    let ds = a.data.open()?;
    let rows = relaxation_table(
        &ds,
        &RelaxOptions {
            mode: a.average.into(),
            window: (a.t_min, a.t_max),
            resamples: a.bootstrap,
            seed: a.seed,
        },
    )?;
    let mut w = a.out.writer()?;
    let header = if a.bootstrap.is_some() {
        "# g\tL\ttau\tsse\tdegenerate\ttau_err"
    } else {
        "# g\tL\ttau\tsse\tdegenerate"
    };
    writeln!(w, "{header}").map_err(out_err)?;
    for r in &rows {
        write!(w, "{}\t{}\t{}\t{}\t{}", r.g, r.l, r.tau, r.sse, r.degenerate as u8).map_err(out_err)?;
        if let Some(e) = r.tau_err {
            write!(w, "\t{e}").map_err(out_err)?;
        }
        writeln!(w).map_err(out_err)?;
    }
    w.flush().map_err(out_err)?;
    Ok(0)
}

fn cmd_eigen(a: &EigenArgs) -> Result<u8, Error> {
    let ds = a.data.open()?;
    let mut w = a.out.writer()?;
    match a.table {
        EigenTable::Alpha => {
            writeln!(w, "# g\tL\talpha_mean\talpha_typical\trealizations\texcluded").map_err(out_err)?;
            for r in alpha_table(&ds)? {
                writeln!(w, "{}\t{}\t{}\t{}\t{}\t{}", r.g, r.l, r.mean, r.typical, r.realizations, r.excluded)
                    .map_err(out_err)?;
            }
        }
        EigenTable::Cx => {
            writeln!(w, "# g\tL\tx\tcx_mean\tcx_typical").map_err(out_err)?;
            for r in cx_table(&ds)? {
                writeln!(w, "{}\t{}\t{}\t{}\t{}", r.g, r.l, r.x, r.mean, r.typical).map_err(out_err)?;
            }
        }
    }
    w.flush().map_err(out_err)?;
    Ok(0)
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

fn write_report(w: &mut dyn Write, o: &CollapseOutcome) -> io::Result<()> {
    let f = &o.fit;
    let err = |k: &str| fmt_opt(f.errors.get(k).copied());
    writeln!(w, "# key\tvalue\terror")?;
    let mode = match f.mode {
        CollapseMode::OneD => "1d",
        CollapseMode::TwoD => "2d",
    };
    writeln!(w, "mode\t{mode}\t-")?;
    let avg = match o.average {
        AverageMode::Mean => "mean",
        AverageMode::Typical => "typical",
    };
    writeln!(w, "average\t{avg}\t-")?;
    writeln!(w, "g_c\t{}\t-", f.g_c)?;
    match f.mode {
        CollapseMode::OneD => {
            writeln!(w, "nu\t{}\t{}", f.nu, err("nu"))?;
            writeln!(w, "a\t{}\t{}", fmt_opt(f.a), err("a"))?;
        }
        CollapseMode::TwoD => {
            writeln!(w, "nu\t{}\t-", f.nu)?;
            writeln!(w, "beta\t{}\t{}", fmt_opt(f.beta), err("beta"))?;
            writeln!(w, "b\t{}\t{}", fmt_opt(f.b), err("b"))?;
            writeln!(w, "t0\t{}\t{}", fmt_opt(f.t0), err("t0"))?;
        }
    }
    writeln!(w, "objective\t{}\t-", f.objective)?;
    writeln!(w, "points\t{}\t-", f.points)?;
    writeln!(w, "resamples\t{}\t-", o.resamples)?;
    writeln!(w, "failed_resamples\t{}\t-", o.failed_resamples)?;
    writeln!(w, "unidentifiable\t{}\t-", f.unidentifiable as u8)?;
    writeln!(w, "boundary_warning\t{}\t-", f.boundary_warning as u8)?;
    if let Some(c) = &o.csd {
        writeln!(w, "nu_b\t{}\t{}", c.nu_b, c.nu_b_err)?;
        writeln!(w, "csd_consistent\t{}\t-", c.consistent as u8)?;
    }
    Ok(())
}

fn write_collapsed(w: &mut dyn Write, o: &CollapseOutcome) -> io::Result<()> {
    match o.fit.mode {
        CollapseMode::OneD => {
            writeln!(w, "# L\tg\tx\tv")?;
            for p in &o.collapsed {
                writeln!(w, "{}\t{}\t{}\t{}", p.l, p.g, p.x, p.v)?;
            }
        }
        CollapseMode::TwoD => {
            writeln!(w, "# L\tg\tT\tx\ty\tv")?;
            for p in &o.collapsed {
                writeln!(w, "{}\t{}\t{}\t{}\t{}\t{}", p.l, p.g, fmt_opt(p.t), p.x, fmt_opt(p.y), p.v)?;
            }
        }
    }
    Ok(())
}

/// Points with `y = ln(T/T0) L^-b` inside `band`, for one-variable plots.
fn write_slice(w: &mut dyn Write, o: &CollapseOutcome, band: (f64, f64)) -> io::Result<()> {
    writeln!(w, "# L\tg\tT\tx\ty\tv")?;
    for p in &o.collapsed {
        if let (Some(t), Some(y)) = (p.t, p.y) {
            if y >= band.0 && y <= band.1 {
                writeln!(w, "{}\t{}\t{}\t{}\t{}\t{}", p.l, p.g, t, p.x, y, p.v)?;
            }
        }
    }
    Ok(())
}

fn cmd_collapse(a: &CollapseArgs) -> Result<u8, Error> {
    if a.band.is_some() && matches!(a.mode, Mode::OneD) {
        return Err(Error::Config("--band applies to the 2d collapse only".into()));
    }
    let ds = a.data.open()?;
    let sigma_j = ds.config.sigma_j();
    let mut req = CollapseRequest {
        mode: match a.mode {
            Mode::OneD => CollapseMode::OneD,
            Mode::TwoD => CollapseMode::TwoD,
        },
        average: a.average.into(),
        resamples: a.resamples,
        seed: a.seed,
        window: (a.t_min, a.t_max),
        nu_err: a.nu_err,
        ..Default::default()
    };
    req.opts_1d.g_c = a.g_c;
    req.opts_1d.sigma_j = sigma_j;
    req.opts_1d.free_gc = a.free_gc;
    req.opts_2d.g_c = a.g_c;
    req.opts_2d.sigma_j = sigma_j;
    req.opts_2d.nu = a.nu;
    let outcome = collapse_dataset(&ds, &req)?;

    let stdout = io::stdout();
    let mut w = BufWriter::new(stdout.lock());
    write_report(&mut w, &outcome).map_err(out_err)?;
    match &a.out_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
            let json = serde_json::to_string_pretty(&outcome.fit).expect("report serializes");
            let p = dir.join("report.json");
            std::fs::write(&p, json + "\n").map_err(|e| io_err(&p, e))?;
            let p = dir.join("collapsed.tsv");
            let mut f = BufWriter::new(File::create(&p).map_err(|e| io_err(&p, e))?);
            write_collapsed(&mut f, &outcome).and_then(|_| f.flush()).map_err(|e| io_err(&p, e))?;
            if let Some(band) = a.band {
                let p = dir.join("slice.tsv");
                let mut f = BufWriter::new(File::create(&p).map_err(|e| io_err(&p, e))?);
                write_slice(&mut f, &outcome, band)
                    .and_then(|_| f.flush())
                    .map_err(|e| io_err(&p, e))?;
            }
        }
        None => {
            if let Some(band) = a.band {
                write_slice(&mut w, &outcome, band).map_err(out_err)?;
            }
        }
    }
    w.flush().map_err(out_err)?;
    if outcome.fit.unidentifiable {
        eprintln!("warning: collapse exponents are not identifiable from this data");
        return Ok(EXIT_UNIDENTIFIABLE);
    }
    Ok(0)
}

fn cmd_export(a: &ExportArgs) -> Result<u8, Error> {
    let sel = Selector::parse(&a.select)?;
    let ds = a.data.open()?;
    let format = match a.format {
        Format::Records => ExportFormat::Records,
        Format::Table => ExportFormat::Table,
    };
    export(&ds, &sel, format, a.out.writer()?)?;
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Sweep(a) => cmd_sweep(a),
        Command::FitRelax(a) => cmd_fit_relax(a),
        Command::Eigen(a) => cmd_eigen(a),
        Command::Collapse(a) => cmd_collapse(a),
        Command::Export(a) => cmd_export(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
