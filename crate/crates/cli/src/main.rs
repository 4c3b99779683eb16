//! `mramsim` — command-line driver for the analog in-memory
//! multiply-accumulate macro model.
//!
//! Every subcommand prints one pretty-printed JSON report to stdout,
//! writes the same report under `--out-dir`, and emits its tabular
//! artifact as CSV next to it. Human-oriented progress lines go to
//! stderr so stdout stays machine-readable.

mod io;
mod report;

use std::env;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mramsim_core::{
    adc, analog_transfer_curve, calibrate, compare_conventional, compute_inl, derive_seed,
    efficiency_report, quantized_transfer_curve, run_mvm, unit_current_ua, yield_points,
    yield_sweep, Calibration, CalibrationTargets, CompareReport, EfficiencyReport, InlConvention,
    InlReport, InputVector, LocalBca, MacroConfig, MirrorMode, MvmRun, OperatingPoint,
    SarAdcParams, SweepGrid, SweepPoint,
};

/// Environment variable consulted for the seed when `--seed` is absent.
const SEED_ENV: &str = "MRAMSIM_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "mramsim",
    version,
    about = "Behavioral simulator of an analog in-memory multiply-accumulate macro",
    long_about = "Behavioral simulator of an analog in-memory multiply-accumulate macro: \
                  resistive bit-cells behind latch-based weight buffers, current-domain \
                  column accumulation, and a 4-bit successive-approximation readout. \
                  Each subcommand emits a JSON report (stdout and --out-dir) plus CSV \
                  artifacts."
)]
struct Cli {
    /// TOML configuration file; omitted means the built-in calibrated defaults
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// RNG seed; takes precedence over MRAMSIM_SEED and the config file
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker-thread cap for parallel sections (0 = automatic)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Directory for reports and CSV artifacts
    #[arg(long, global = true, default_value = ".", value_name = "DIR")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one matrix-vector multiplication through the full analog pipeline
    Mvm {
        /// Weight grid: ASCII rows of 0/1 characters
        weights: PathBuf,
        /// Activation vector: one integer in 0..=3 per line
        inputs: PathBuf,
        /// Accumulator front end to use
        #[arg(long, value_enum, default_value_t = MirrorArg::Cmf)]
        mode: MirrorArg,
        /// Also export per-column accumulator transients as CSV into this directory
        #[arg(long, value_name = "DIR")]
        trace_dir: Option<PathBuf>,
    },
    /// Monte-Carlo latch yield/power sweep over the configured operating grid
    Sweep {
        /// Reproduce the five calibration anchor points instead of the configured grid
        #[arg(long)]
        table4: bool,
    },
    /// Accumulator transfer-curve linearity report
    Inl {
        /// Which front end(s) to analyze
        #[arg(long, value_enum, default_value_t = InlModeArg::Both)]
        mode: InlModeArg,
    },
    /// Column energy model and efficiency report
    Energy {
        /// Accumulation depth (rows on) to model
        #[arg(long, default_value_t = 64)]
        rows: u32,
        /// Model the standard depth ladder 4, 8, 16, 32, 64 instead of --rows
        #[arg(long)]
        sweep: bool,
    },
    /// Ramp test of the successive-approximation converter against the arithmetic quantizer
    AdcTest {
        /// Number of evenly spaced input points on [0, v_ref)
        #[arg(long, default_value_t = 256)]
        grid: usize,
    },
    /// Fit the tunable constants against the built-in targets and write them as TOML
    Calibrate {
        /// Where to write the fitted constants (default: <out-dir>/calibration.toml)
        #[arg(long, value_name = "FILE")]
        output: Option<PathBuf>,
    },
    /// Contrast weight-influence of junction-in-path cells against latch-based cells
    CompareConventional {
        /// Junction contrast values to evaluate
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.5,1.0,1.5,2.0,2.5",
            value_name = "LIST"
        )]
        tmr: Vec<f64>,
    },
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MirrorArg {
    /// Plain current mirror
    Tcm,
    /// Current mirror with droop-compensating feedback
    Cmf,
}

impl From<MirrorArg> for MirrorMode {
    fn from(m: MirrorArg) -> Self {
        match m {
            MirrorArg::Tcm => MirrorMode::Tcm,
            MirrorArg::Cmf => MirrorMode::Cmf,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InlModeArg {
    /// Both front ends, plus the reduction between them
    Both,
    /// Plain current mirror only
    Tcm,
    /// Feedback current mirror only
    Cmf,
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn run() -> Result<()> {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("configuring the worker pool")?;
    }
    let cfg = load_config(&cli)?;
    let out_dir = cli.out_dir.as_path();
    match &cli.command {
        Command::Mvm {
            weights,
            inputs,
            mode,
            trace_dir,
        } => cmd_mvm(
            &cfg,
            weights,
            inputs,
            (*mode).into(),
            trace_dir.as_deref(),
            out_dir,
        ),
        Command::Sweep { table4 } => cmd_sweep(&cfg, *table4, out_dir),
        Command::Inl { mode } => cmd_inl(&cfg, *mode, out_dir),
        Command::Energy { rows, sweep } => cmd_energy(&cfg, *rows, *sweep, out_dir),
        Command::AdcTest { grid } => cmd_adc_test(&cfg, *grid, out_dir),
        Command::Calibrate { output } => cmd_calibrate(&cfg, output.as_deref(), out_dir),
        Command::CompareConventional { tmr } => cmd_compare(&cfg, tmr, out_dir),
    }
}

/// Loads the configuration, applies seed precedence
/// (`--seed` > `MRAMSIM_SEED` > config file > built-in default), and folds
/// any calibration — from `calibration_file` or the inline table — into
/// the block parameters it tunes.
fn load_config(cli: &Cli) -> Result<MacroConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            let cfg: MacroConfig = toml::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?;
            cfg
        }
        None => MacroConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    } else if let Ok(text) = env::var(SEED_ENV) {
        cfg.seed = text
            .trim()
            .parse()
            .with_context(|| format!("{SEED_ENV} must be an unsigned 64-bit integer, got {text:?}"))?;
    }
    cfg.validate()?;
    if let Some(path) = cfg.calibration_file.take() {
        let text = fs::read_to_string(&path)
            .with_context(|| format!("reading calibration file {}", path.display()))?;
        let cal: Calibration = toml::from_str(&text)
            .with_context(|| format!("parsing calibration file {}", path.display()))?;
        cfg.apply_calibration(cal)?;
    } else if let Some(cal) = cfg.calibration.clone() {
        cfg.apply_calibration(cal)?;
    }
    Ok(cfg)
}

fn mode_name(mode: MirrorMode) -> &'static str {
    match mode {
        MirrorMode::Tcm => "tcm",
        MirrorMode::Cmf => "cmf",
    }
}

// ---------------------------------------------------------------------------
// mvm

#[derive(Debug, Serialize)]
struct MvmPayload<'a> {
    /// Columns whose converted code equals the clamped digital dot product.
    exact_columns: usize,
    run: &'a MvmRun,
}

fn cmd_mvm(
    cfg: &MacroConfig,
    weights: &Path,
    inputs: &Path,
    mode: MirrorMode,
    trace_dir: Option<&Path>,
    out_dir: &Path,
) -> Result<()> {
    let wtext = fs::read_to_string(weights)
        .with_context(|| format!("reading weights {}", weights.display()))?;
    let matrix = io::parse_weights(&wtext)?;
    let itext = fs::read_to_string(inputs)
        .with_context(|| format!("reading inputs {}", inputs.display()))?;
    let xs = io::parse_inputs(&itext)?;
    if xs.len() != matrix.len() {
        bail!(
            "dimension mismatch: weights have {} rows but inputs have {} activations",
            matrix.len(),
            xs.len()
        );
    }
    let bca = LocalBca::load_weights(&matrix, &cfg.device)?;
    let input_vec = InputVector::new(xs)?;
    let run = run_mvm(&bca, &input_vec, cfg, mode, cfg.seed)?;

    if let Some(dir) = trace_dir {
        let paths = io::write_trace_csvs(dir, &run)?;
        eprintln!("wrote {} accumulator traces to {}", paths.len(), dir.display());
    }
    let exact = run
        .results
        .iter()
        .filter(|r| u32::from(r.code) == r.oracle.min(15))
        .count();
    eprintln!(
        "mvm: {} rows x {} cols, {} mirror: {exact}/{} codes equal the clamped digital dot product",
        run.rows,
        run.cols,
        mode_name(mode),
        run.cols
    );
    let rep = report::wrap(
        "mvm",
        cfg,
        MvmPayload {
            exact_columns: exact,
            run: &run,
        },
    );
    let path = report::emit(out_dir, &rep)?;
    eprintln!("report: {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Debug, Serialize)]
struct SweepPayload<'a> {
    grid: &'a SweepGrid,
    points: Vec<SweepPoint>,
    csv: &'static str,
}

#[derive(Debug, Serialize)]
struct AnchorRow {
    tmr0: f64,
    r_ref_ohm: f64,
    v_l_mv: f64,
    trials: usize,
    yield_target_pct: f64,
    yield_mc_pct: f64,
    yield_mc_err_pts: f64,
    yield_analytic_pct: f64,
    yield_analytic_err_pts: f64,
    power_target_fj: f64,
    power_model_fj: f64,
    power_err_pct: f64,
}

#[derive(Debug, Serialize)]
struct AnchorPayload {
    trials: usize,
    rows: Vec<AnchorRow>,
    max_abs_yield_err_pts: f64,
    max_abs_power_err_pct: f64,
    csv: &'static str,
}

fn cmd_sweep(cfg: &MacroConfig, table4: bool, out_dir: &Path) -> Result<()> {
    if table4 {
        let targets = CalibrationTargets::default();
        let pts: Vec<OperatingPoint> = targets
            .yield_anchors
            .iter()
            .map(|a| OperatingPoint {
                tmr0: a.tmr0,
                r_ref_ohm: a.r_ref_ohm,
                v_l_mv: a.v_l_mv,
            })
            .collect();
        let trials = cfg.analysis.trials;
        let sim = yield_points(&pts, &cfg.device, &cfg.latch, trials, cfg.seed)?;
        let rows: Vec<AnchorRow> = targets
            .yield_anchors
            .iter()
            .zip(&sim)
            .map(|(a, s)| AnchorRow {
                tmr0: a.tmr0,
                r_ref_ohm: a.r_ref_ohm,
                v_l_mv: a.v_l_mv,
                trials,
                yield_target_pct: a.yield_avg * 100.0,
                yield_mc_pct: s.yield_avg * 100.0,
                yield_mc_err_pts: (s.yield_avg - a.yield_avg) * 100.0,
                yield_analytic_pct: s.analytic_avg * 100.0,
                yield_analytic_err_pts: (s.analytic_avg - a.yield_avg) * 100.0,
                power_target_fj: a.power_fj,
                power_model_fj: s.energy_fj,
                power_err_pct: (s.energy_fj - a.power_fj) / a.power_fj * 100.0,
            })
            .collect();
        let max_abs_yield_err_pts = rows
            .iter()
            .map(|r| r.yield_mc_err_pts.abs())
            .fold(0.0, f64::max);
        let max_abs_power_err_pct = rows
            .iter()
            .map(|r| r.power_err_pct.abs())
            .fold(0.0, f64::max);
        io::write_records_csv(&out_dir.join("table4_repro.csv"), &rows)?;
        eprintln!(
            "anchor reproduction at {trials} trials/point: max |yield error| {max_abs_yield_err_pts:.2} points, \
             max |power error| {max_abs_power_err_pct:.1}%"
        );
        let rep = report::wrap(
            "sweep",
            cfg,
            AnchorPayload {
                trials,
                rows,
                max_abs_yield_err_pts,
                max_abs_power_err_pct,
                csv: "table4_repro.csv",
            },
        );
        let path = report::emit(out_dir, &rep)?;
        eprintln!("report: {}", path.display());
    } else {
        let points = yield_sweep(&cfg.analysis, &cfg.device, &cfg.latch, cfg.seed)?;
        io::write_sweep_csv(&out_dir.join("fig7_yield.csv"), &points)?;
        eprintln!(
            "swept {} operating points at {} trials each",
            points.len(),
            cfg.analysis.trials
        );
        let rep = report::wrap(
            "sweep",
            cfg,
            SweepPayload {
                grid: &cfg.analysis,
                points,
                csv: "fig7_yield.csv",
            },
        );
        let path = report::emit(out_dir, &rep)?;
        eprintln!("report: {}", path.display());
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// inl

#[derive(Debug, Serialize)]
struct InlModePayload {
    mode: &'static str,
    max_abs_inl_lsb: f64,
    quantized_max_abs_inl_lsb: f64,
    report: InlReport,
}

#[derive(Debug, Serialize)]
struct InlPayload {
    convention: String,
    modes: Vec<InlModePayload>,
    /// Present when both front ends were analyzed: how much the feedback
    /// mirror shrinks the worst-case deviation, in percent.
    #[serde(skip_serializing_if = "Option::is_none")]
    reduction_percent: Option<f64>,
    csv: &'static str,
}

fn cmd_inl(cfg: &MacroConfig, mode_arg: InlModeArg, out_dir: &Path) -> Result<()> {
    let selected: Vec<MirrorMode> = match mode_arg {
        InlModeArg::Both => vec![MirrorMode::Tcm, MirrorMode::Cmf],
        InlModeArg::Tcm => vec![MirrorMode::Tcm],
        InlModeArg::Cmf => vec![MirrorMode::Cmf],
    };
    let i_a_ua = unit_current_ua(cfg.array.v_cl_mv, &cfg.switch)?;

    let mut csv_rows: Vec<io::InlCsvRow> = Vec::new();
    let mut modes: Vec<InlModePayload> = Vec::new();
    for &mode in &selected {
        let curve = analog_transfer_curve(&cfg.integrator, mode, i_a_ua, 15)?;
        let inl = compute_inl(&curve, InlConvention::EndpointFit)?;
        let quant = quantized_transfer_curve(cfg, mode)?;
        let quant_curve: Vec<(u32, f64)> = quant
            .iter()
            .map(|&(count, code)| (count, f64::from(code)))
            .collect();
        let quant_inl = compute_inl(&quant_curve, InlConvention::EndpointFit)?;
        for (i, &(count, v_out_mv)) in curve.iter().enumerate() {
            csv_rows.push(io::InlCsvRow {
                mode: mode_name(mode).to_string(),
                count,
                v_out_mv,
                inl_lsb: inl.inl_lsb[i],
                code: quant[i].1,
            });
        }
        eprintln!(
            "{} mirror: max |INL| {:.3} LSB on the analog curve, {:.3} LSB through the converter",
            mode_name(mode),
            inl.max_abs_inl_lsb,
            quant_inl.max_abs_inl_lsb
        );
        modes.push(InlModePayload {
            mode: mode_name(mode),
            max_abs_inl_lsb: inl.max_abs_inl_lsb,
            quantized_max_abs_inl_lsb: quant_inl.max_abs_inl_lsb,
            report: inl,
        });
    }

    let reduction_percent = if let [tcm, cmf] = modes.as_slice() {
        let r = (tcm.max_abs_inl_lsb - cmf.max_abs_inl_lsb) / tcm.max_abs_inl_lsb * 100.0;
        eprintln!("feedback mirror reduces the worst-case deviation by {r:.1}%");
        Some(r)
    } else {
        None
    };

    io::write_records_csv(&out_dir.join("fig8_inl.csv"), &csv_rows)?;
    let rep = report::wrap(
        "inl",
        cfg,
        InlPayload {
            convention: InlConvention::EndpointFit.to_string(),
            modes,
            reduction_percent,
            csv: "fig8_inl.csv",
        },
    );
    let path = report::emit(out_dir, &rep)?;
    eprintln!("report: {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// energy

#[derive(Debug, Serialize)]
struct EnergyPayload {
    reports: Vec<EfficiencyReport>,
}

fn cmd_energy(cfg: &MacroConfig, rows: u32, sweep: bool, out_dir: &Path) -> Result<()> {
    let depths: Vec<u32> = if sweep { vec![4, 8, 16, 32, 64] } else { vec![rows] };
    let mut reports = Vec::with_capacity(depths.len());
    for m in depths {
        let r = efficiency_report(m, cfg)?;
        eprintln!(
            "{:>2} rows on: column energy {:.2} fJ ({:.2} fJ/OP), {:.2} TOPS/W \
             ({:.2}x baseline), average delay {:.3} ns = {:.1}% of baseline",
            r.rows_on,
            r.energy_per_column_fj,
            r.energy_per_column_fj / r.ops_per_column as f64,
            r.tops_per_watt,
            r.energy_ratio_vs_baseline,
            r.average_delay_ns,
            100.0 * r.delay_fraction_of_baseline,
        );
        reports.push(r);
    }
    let rep = report::wrap("energy", cfg, EnergyPayload { reports });
    let path = report::emit(out_dir, &rep)?;
    eprintln!("report: {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// adc-test

#[derive(Debug, Serialize)]
struct AdcMismatch {
    v_in_mv: f64,
    code: u8,
    oracle: u8,
    boundary: bool,
}

#[derive(Debug, Serialize)]
struct AdcTestPayload {
    grid: usize,
    v_ref_mv: f64,
    lsb_mv: f64,
    /// Codes equal to the arithmetic quantizer, over the whole grid.
    agreements: usize,
    /// Points sitting (within rounding dust) on a code edge; exactness is
    /// only contractual away from these.
    boundary_points: usize,
    /// Disagreements at non-boundary points: must be empty.
    mismatches: Vec<AdcMismatch>,
    /// Every conversion's node-P history matched the charge-redistribution
    /// replay at every phase.
    telescoping_ok: bool,
    csv: &'static str,
}

/// Replays the charge-redistribution arithmetic implied by the returned
/// code and requires the recorded node-P history to match bit for bit.
fn telescoping_holds(v_in_mv: f64, p: &SarAdcParams, res: &adc::AdcResult) -> bool {
    let nbits = p.bits as usize;
    if res.vp_history.len() != nbits + 1 {
        return false;
    }
    let mut vp = p.v_com_mv - v_in_mv;
    if res.vp_history[0].to_bits() != vp.to_bits() {
        return false;
    }
    let mut release = 0.0f64;
    for i in 0..nbits {
        let test = f64::from(p.cap_weights[i]) / f64::from(adc::CAP_TOTAL_UNITS) * p.v_ref_mv;
        vp += test - release;
        if res.vp_history[i + 1].to_bits() != vp.to_bits() {
            return false;
        }
        let kept = res.code >> (nbits - 1 - i) & 1 == 1;
        release = if kept { 0.0 } else { test };
    }
    true
}

fn cmd_adc_test(cfg: &MacroConfig, grid: usize, out_dir: &Path) -> Result<()> {
    if !(2..=1_000_000).contains(&grid) {
        bail!("--grid must be in 2..=1000000, got {grid}");
    }
    let p = &cfg.adc;
    let lsb = p.lsb_mv();
    let max_code = (1u32 << p.bits) - 1;

    let mut csv_rows = Vec::with_capacity(grid);
    let mut agreements = 0usize;
    let mut boundary_points = 0usize;
    let mut mismatches = Vec::new();
    let mut telescoping_ok = true;
    for i in 0..grid {
        let v = p.v_ref_mv * (i as f64) / (grid as f64);
        let res = adc::convert(v, p, derive_seed(cfg.seed, &[4, i as u64]))?;
        let steps = v / lsb;
        let oracle = (steps.floor() as u32).min(max_code) as u8;
        let boundary = (steps - steps.round()).abs() <= 1e-6;
        let agree = res.code == oracle;
        if boundary {
            boundary_points += 1;
        }
        if agree {
            agreements += 1;
        } else if !boundary {
            mismatches.push(AdcMismatch {
                v_in_mv: v,
                code: res.code,
                oracle,
                boundary,
            });
        }
        telescoping_ok &= telescoping_holds(v, p, &res);
        csv_rows.push(io::AdcCsvRow {
            v_in_mv: v,
            code: res.code,
            oracle,
            boundary,
            agree,
        });
    }
    io::write_records_csv(&out_dir.join("adc_ramp.csv"), &csv_rows)?;
    eprintln!(
        "adc ramp: {agreements}/{grid} codes equal the arithmetic quantizer \
         ({boundary_points} on code edges); node-P histories {}",
        if telescoping_ok { "consistent" } else { "INCONSISTENT" }
    );
    let rep = report::wrap(
        "adc-test",
        cfg,
        AdcTestPayload {
            grid,
            v_ref_mv: p.v_ref_mv,
            lsb_mv: lsb,
            agreements,
            boundary_points,
            mismatches,
            telescoping_ok,
            csv: "adc_ramp.csv",
        },
    );
    let path = report::emit(out_dir, &rep)?;
    eprintln!("report: {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// calibrate

#[derive(Debug, Serialize)]
struct CalibratePayload {
    targets: CalibrationTargets,
    calibration: Calibration,
    /// File name of the TOML written next to the reports (or at --output).
    written_to: String,
}

fn cmd_calibrate(cfg: &MacroConfig, output: Option<&Path>, out_dir: &Path) -> Result<()> {
    let targets = CalibrationTargets::default();
    let cal = calibrate(&targets, cfg)?;
    let toml_text = toml::to_string(&cal).context("serializing fitted constants")?;
    let path = match output {
        Some(p) => p.to_path_buf(),
        None => out_dir.join("calibration.toml"),
    };
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)
                .with_context(|| format!("creating directory {}", dir.display()))?;
        }
    }
    fs::write(&path, toml_text).with_context(|| format!("writing {}", path.display()))?;
    let r = &cal.residuals;
    eprintln!(
        "fit residuals: yield <= {:.2} points, power <= {:.1}%, linearity <= {:.1e} LSB",
        r.yield_points_pct.iter().fold(0.0f64, |a, &x| a.max(x.abs())),
        r.power_pct.iter().fold(0.0f64, |a, &x| a.max(x.abs())),
        r.inl_plain_lsb.abs().max(r.inl_feedback_lsb.abs()),
    );
    eprintln!("wrote fitted constants to {}", path.display());
    let written_to = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_else(|| "calibration.toml".to_string());
    let rep = report::wrap(
        "calibrate",
        cfg,
        CalibratePayload {
            targets,
            calibration: cal,
            written_to,
        },
    );
    let report_path = report::emit(out_dir, &rep)?;
    eprintln!("report: {}", report_path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// compare-conventional

#[derive(Debug, Serialize)]
struct ComparePayload {
    report: CompareReport,
    csv: &'static str,
}

fn cmd_compare(cfg: &MacroConfig, tmr: &[f64], out_dir: &Path) -> Result<()> {
    let report = compare_conventional(tmr, &cfg.device, &cfg.switch, cfg.array.v_cl_mv)?;
    io::write_compare_csv(&out_dir.join("fig8e_compare.csv"), &report)?;
    for f in &report.factors {
        eprintln!(
            "contrast {:.2}: junction-in-path weight error is {:.1}x the latch-based cell's",
            f.tmr0, f.conventional_over_proposed
        );
    }
    let rep = report::wrap(
        "compare-conventional",
        cfg,
        ComparePayload {
            report,
            csv: "fig8e_compare.csv",
        },
    );
    let path = report::emit(out_dir, &rep)?;
    eprintln!("report: {}", path.display());
    Ok(())
}
