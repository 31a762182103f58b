//! Command-line front end: `state`, `regions`, `sample`, `curves`,
//! `plotscript`, `verify`.
//!
//! Exit codes: 0 success, 1 verification failure, 2 usage or input error,
//! 3 I/O error. `ENTROPLANE_THREADS` sets the worker count.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiment::{fmt_float, run_sample, Family, SampleConfig};
use crate::families::{e0_state, e1_state, mems1, mems2, E0Params, E1Params};
use crate::plane::{
    chsh_region_areas, entropic_region_areas, frontier_mems, nv_lower, s_l_minus, s_l_plus,
    AreaReport,
};
use crate::qstate::DensityMatrix;
use crate::report::StateReport;
use crate::verify::{corrupted_curves, run_all, VerifyOptions};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

pub const THREADS_ENV: &str = "ENTROPLANE_THREADS";

#[derive(Debug, Parser)]
#[command(
    name = "entroplane",
    version,
    about = "Entropic-inequality regions of two-qubit states"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Metrics of a single state, as JSON.
    State(StateArgs),
    /// Entropic and CHSH region areas side by side.
    Regions(RegionsArgs),
    /// Seeded Monte Carlo samples as CSV, plus a run manifest.
    Sample(SampleArgs),
    /// Boundary curves of the plane as CSV.
    Curves(CurvesArgs),
    /// A gnuplot script rendering curves (and optionally samples).
    Plotscript(PlotArgs),
    /// Run the verification suite.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StateFamily {
    E0,
    E1,
    Mems1,
    Mems2,
}

#[derive(Debug, Args)]
pub struct StateArgs {
    #[arg(
        long,
        value_enum,
        conflicts_with = "matrix",
        required_unless_present = "matrix"
    )]
    pub family: Option<StateFamily>,
    /// Density matrix file: four lines of four `re,im` pairs.
    #[arg(long)]
    pub matrix: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    pub a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub f: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub d: Option<f64>,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub theta: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi: f64,
}

#[derive(Debug, Args)]
pub struct RegionsArgs {
    /// Quadrature tolerance for the entropic areas.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    /// Grid size of the CHSH scan.
    #[arg(long, default_value_t = 1000)]
    pub resolution: usize,
    /// Also write the reports as JSON here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long, value_enum, default_value_t = Family::E1)]
    pub family: Family,
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of RNG streams; fixes the partition of the run.
    #[arg(long, default_value_t = 1)]
    pub streams: u64,
    /// CSV destination; stdout if omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Manifest destination; defaults to `<out>.manifest.json`, or stderr
    /// when writing to stdout.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CurvesArgs {
    #[arg(long, default_value_t = 0.001)]
    pub step: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PlotKind {
    /// Boundary curves only.
    Plane,
    /// Sample scatter coloured by region, over the curves.
    Scatter,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    #[arg(long, value_enum, default_value_t = PlotKind::Plane)]
    pub kind: PlotKind,
    /// Curves CSV produced by `curves`.
    #[arg(long, default_value = "curves.csv")]
    pub curves: PathBuf,
    /// Samples CSV produced by `sample` (scatter only).
    #[arg(long, default_value = "samples.csv")]
    pub samples: PathBuf,
    /// Image the script renders.
    #[arg(long, default_value = "plane.png")]
    pub image: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Shrink Monte Carlo counts 100x (smoke run, not the acceptance bar).
    #[arg(long)]
    pub quick: bool,
    /// Write outcomes as JSON here.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Replace the S_L+ curve with a corrupted one.
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

/// Runs the CLI on `args` (program name first) and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    configure_threads();
    let result = match cli.command {
        Command::State(a) => cmd_state(&a),
        Command::Regions(a) => cmd_regions(&a),
        Command::Sample(a) => cmd_sample(&a),
        Command::Curves(a) => cmd_curves(&a),
        Command::Plotscript(a) => cmd_plotscript(&a),
        Command::Verify(a) => cmd_verify(&a),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => EXIT_IO,
                _ => EXIT_USAGE,
            }
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
    {
        // Fails only if the pool already exists, which is harmless.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json<T: Serialize>(w: &mut dyn Write, v: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *w, v).map_err(|e| Error::Io(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

fn need(name: &str, v: Option<f64>) -> Result<f64> {
    v.ok_or_else(|| Error::InvalidArgument(format!("--{name} is required for this family")))
}

fn state_from_args(a: &StateArgs) -> Result<DensityMatrix> {
    if let Some(path) = &a.matrix {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        return text.parse();
    }
    match a.family.expect("clap requires family or matrix") {
        StateFamily::E0 => e0_state(&E0Params::new(
            need("a", a.a)?,
            need("b", a.b)?,
            need("c", a.c)?,
            a.theta,
        )?),
        StateFamily::E1 => e1_state(&E1Params::new(
            need("a", a.a)?,
            need("b", a.b)?,
            need("f", a.f)?,
            need("c", a.c)?,
            need("d", a.d)?,
            a.theta,
            a.phi,
        )?),
        StateFamily::Mems1 => mems1(need("c", a.c)?, a.theta),
        StateFamily::Mems2 => mems2(need("c", a.c)?, a.theta),
    }
}

fn cmd_state(a: &StateArgs) -> Result<i32> {
    let rho = state_from_args(a)?;
    let report = StateReport::new(&rho)?;
    let mut out = open_out(None)?;
    write_json(&mut *out, &report)?;
    out.flush()?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct RegionsJson {
    entropic: AreaReport,
    chsh: AreaReport,
}

fn cmd_regions(a: &RegionsArgs) -> Result<i32> {
    let entropic = entropic_region_areas(a.tol)?;
    let chsh = chsh_region_areas(a.resolution)?;
    let mut out = open_out(None)?;
    writeln!(
        out,
        "{:<8} {:>14} {:>14}",
        "region", "entropic (%)", "CHSH (%)"
    )?;
    for (name, e, c) in [
        ("V", entropic.v_percent, chsh.v_percent),
        ("Zero", entropic.zero_percent, chsh.zero_percent),
        ("NV", entropic.nv_percent, chsh.nv_percent),
    ] {
        writeln!(out, "{name:<8} {e:>14.4} {c:>14.4}")?;
    }
    writeln!(
        out,
        "{:<8} {:>14.10} {:>14.10}",
        "area", entropic.total_area, chsh.total_area
    )?;
    out.flush()?;
    if let Some(p) = &a.json {
        let mut w = open_out(Some(p))?;
        write_json(&mut *w, &RegionsJson { entropic, chsh })?;
        w.flush()?;
    }
    Ok(EXIT_OK)
}

fn cmd_sample(a: &SampleArgs) -> Result<i32> {
    let cfg = SampleConfig {
        family: a.family,
        n: a.n,
        seed: a.seed,
        streams: a.streams,
    };
    cfg.validate()?;
    let mut out = open_out(a.out.as_deref())?;
    let manifest = run_sample(&cfg, &mut out)?;
    out.flush()?;
    let manifest_path = a.manifest.clone().or_else(|| {
        a.out
            .as_ref()
            .map(|p| PathBuf::from(format!("{}.manifest.json", p.display())))
    });
    match manifest_path {
        Some(p) => {
            let mut w = open_out(Some(&p))?;
            write_json(&mut *w, &manifest)?;
            w.flush()?;
        }
        None => {
            let json = serde_json::to_string(&manifest).map_err(|e| Error::Io(e.to_string()))?;
            eprintln!("{json}");
        }
    }
    Ok(EXIT_OK)
}

fn opt_field(v: Option<f64>) -> String {
    v.map(fmt_float).unwrap_or_default()
}

/// Grid `0, step, 2 step, ..., 1` plus the curve junctions.
pub fn curve_grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "step must be in (0, 1], got {step}"
        )));
    }
    let n = (1.0 / step).ceil() as usize;
    let mut grid: Vec<f64> = (0..=n).map(|i| (i as f64 * step).min(1.0)).collect();
    grid.extend([0.5, 2.0 / 3.0, FRAC_1_SQRT_2]);
    grid.sort_by(f64::total_cmp);
    grid.dedup_by(|x, y| (*x - *y).abs() < 1e-15);
    Ok(grid)
}

/// Writes the curves CSV; empty fields where a curve is undefined.
pub fn write_curves<W: Write>(w: &mut W, step: f64) -> Result<()> {
    writeln!(w, "c,frontier,s_l_minus,s_l_plus,nv_lower")?;
    for c in curve_grid(step)? {
        writeln!(
            w,
            "{},{},{},{},{}",
            fmt_float(c),
            opt_field(frontier_mems(c).ok()),
            opt_field(s_l_minus(c).ok()),
            opt_field(s_l_plus(c).ok()),
            opt_field(nv_lower(c)),
        )?;
    }
    Ok(())
}

fn cmd_curves(a: &CurvesArgs) -> Result<i32> {
    let mut out = open_out(a.out.as_deref())?;
    write_curves(&mut out, a.step)?;
    out.flush()?;
    Ok(EXIT_OK)
}

/// Gnuplot script for the given kind.
pub fn plot_script(kind: PlotKind, curves: &Path, samples: &Path, image: &Path) -> String {
    let mut s = format!(
        "# Render with: gnuplot <this file>\n\
         set terminal pngcairo size 1000,800\n\
         set output '{}'\n\
         set datafile separator ','\n\
         set key autotitle columnhead outside right\n\
         set xlabel 'concurrence C'\n\
         set ylabel 'linear entropy S_L'\n\
         set xrange [0:1]\n\
         set yrange [0:1]\n",
        image.display()
    );
    let c = curves.display();
    let curve_lines = format!(
        "'{c}' using 1:2 with lines lw 2 lc rgb 'black' title 'MEMS frontier', \\\n     \
         '{c}' using 1:3 with lines lw 2 lc rgb 'red' title 'S_L-', \\\n     \
         '{c}' using 1:4 with lines lw 2 lc rgb 'blue' title 'S_L+', \\\n     \
         '{c}' using 1:5 with lines lw 2 dt 2 lc rgb 'dark-green' title 'NV lower edge'"
    );
    match kind {
        PlotKind::Plane => {
            s.push_str(&format!("plot {curve_lines}\n"));
        }
        PlotKind::Scatter => {
            let p = samples.display();
            s.push_str(&format!(
                "plot '{p}' using 2:(strcol(7) eq 'V_E' ? $3 : 1/0) with dots lc rgb 'orange' title 'V_E', \\\n     \
                 '{p}' using 2:(strcol(7) eq 'Zero_E' ? $3 : 1/0) with dots lc rgb 'gray' title 'Zero_E', \\\n     \
                 '{p}' using 2:(strcol(7) eq 'NV_E' ? $3 : 1/0) with dots lc rgb 'cyan' title 'NV_E', \\\n     \
                 {curve_lines}\n"
            ));
        }
    }
    s
}

fn cmd_plotscript(a: &PlotArgs) -> Result<i32> {
    let mut out = open_out(a.out.as_deref())?;
    out.write_all(plot_script(a.kind, &a.curves, &a.samples, &a.image).as_bytes())?;
    out.flush()?;
    Ok(EXIT_OK)
}

fn cmd_verify(a: &VerifyArgs) -> Result<i32> {
    let opts = VerifyOptions {
        curves: if a.inject_fault {
            corrupted_curves()
        } else {
            Default::default()
        },
        sample_divisor: if a.quick { 100 } else { 1 },
    };
    let outcomes = run_all(&opts);
    let mut out = open_out(None)?;
    for o in &outcomes {
        writeln!(out, "{o}")?;
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    writeln!(
        out,
        "{} of {} criteria passed",
        outcomes.len() - failed,
        outcomes.len()
    )?;
    out.flush()?;
    if let Some(p) = &a.json {
        let mut w = open_out(Some(p))?;
        write_json(&mut *w, &outcomes)?;
        w.flush()?;
    }
    Ok(if failed == 0 {
        EXIT_OK
    } else {
        EXIT_VERIFY_FAILED
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_contains_junctions() {
        let g = curve_grid(0.01).unwrap();
        assert_eq!(g[0], 0.0);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!(g.contains(&(2.0 / 3.0)) && g.contains(&FRAC_1_SQRT_2));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(curve_grid(0.0).is_err());
    }

    #[test]
    fn curves_csv_junction_row() {
        let mut buf = Vec::new();
        write_curves(&mut buf, 0.1).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("c,frontier,s_l_minus,s_l_plus,nv_lower"));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[1], "");
        let row = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').collect::<Vec<_>>())
            .find(|f| (f[0].parse::<f64>().unwrap() - 2.0 / 3.0).abs() < 1e-15)
            .unwrap();
        assert!((row[1].parse::<f64>().unwrap() - 16.0 / 27.0).abs() < 1e-15);
        assert_eq!(row[4], "");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(["entroplane", "bogus"]), EXIT_USAGE);
        assert_eq!(
            run(["entroplane", "state", "--family", "e0", "--a", "0.5"]),
            EXIT_USAGE
        );
        assert_eq!(run(["entroplane", "curves", "--step", "0"]), EXIT_USAGE);
    }

    #[test]
    fn scatter_script_mentions_inputs() {
        let s = plot_script(
            PlotKind::Scatter,
            Path::new("c.csv"),
            Path::new("s.csv"),
            Path::new("o.png"),
        );
        assert!(s.contains("'s.csv'") && s.contains("'c.csv'") && s.contains("set output 'o.png'"));
    }
}
