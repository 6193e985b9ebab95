use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use pucvsim::coupling::coupling_constants;
use pucvsim::detection::{
    alignment_geometry, backward_partner_rate, pdcv_rate_closed, pucv_rate_closed, rate_integral, ratio_peak,
    ratio_table, DetectionMode, DetectorConfig, RatioSetup,
};
use pucvsim::phasematch::ModePolarizations;
use pucvsim::report::{nm_grid, rainbow, RateRecord, RatioRecord, RAINBOW_HEADER, RATIO_HEADER};
use pucvsim::tables::{paper_tables, render};
use pucvsim::{
    CrystalRegistry, ExecMode, MatchProblem, PlaneSelector, Polarization, ProcessKind, PumpWave, UniaxialCrystal,
};

#[derive(Parser, Debug)]
#[command(
    name = "pucvsim",
    version,
    about = "Phase matching and photocount rates of parametric up- and down-conversion of the vacuum"
)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct GlobalArgs {
    /// Crystal name in the registry
    #[arg(long, global = true, default_value = "bbo")]
    crystal: String,
    /// Extra crystal registry file
    #[arg(long, global = true, env = "PUCVSIM_CRYSTAL_REGISTRY")]
    registry: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 351.0)]
    pump_nm: f64,
    #[arg(long, global = true, value_enum, default_value_t = Pol::O)]
    pump_pol: Pol,
    #[arg(long, global = true, value_enum, default_value_t = Process::Puc)]
    process: Process,
    #[arg(long, global = true, value_enum, default_value_t = Plane::Eq)]
    plane: Plane,
    #[arg(long, global = true, default_value_t = 5000.0)]
    length_um: f64,
    #[arg(long, global = true, default_value_t = 1.0)]
    d31_over_d15: f64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Write data here instead of standard output
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Evaluate batches on the calling thread only
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Pol {
    O,
    E,
}

impl From<Pol> for Polarization {
    fn from(p: Pol) -> Self {
        match p {
            Pol::O => Polarization::Ordinary,
            Pol::E => Polarization::Extraordinary,
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Process {
    Pdc,
    Puc,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Plane {
    Eq,
    Long,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Closed,
    Integral,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Detector {
    Pinhole,
    Filter,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Refractive index of one eigenmode
    Index {
        #[arg(long = "lambda")]
        lambda_nm: f64,
        #[arg(long, value_enum, default_value_t = Pol::O)]
        pol: Pol,
        /// Angle between wavevector and optic axis, degrees
        #[arg(long, default_value_t = 90.0)]
        psi: f64,
    },
    /// Collinear edge of the emission spectrum
    Edge,
    /// Solve one signal wavelength
    Match {
        #[arg(long = "lambda1")]
        lambda1_nm: f64,
        /// Dump the coupling constants as JSON instead
        #[arg(long)]
        coupling: bool,
    },
    /// Emission angles over a wavelength range in both planes
    Rainbow {
        #[arg(long)]
        min_nm: f64,
        #[arg(long)]
        max_nm: f64,
        #[arg(long, default_value_t = 1.0)]
        step_nm: f64,
    },
    /// Photocount rate of one signal wavelength
    Rates {
        #[arg(long = "lambda1")]
        lambda1_nm: f64,
        #[arg(long, value_enum, default_value_t = Method::Closed)]
        method: Method,
        #[arg(long, value_enum, default_value_t = Detector::Pinhole)]
        detector: Detector,
        #[arg(long, default_value_t = 1.0)]
        efficiency: f64,
        #[arg(long, default_value_t = 1.0)]
        solid_angle: f64,
        /// Also report the rate of the backward mirror image
        #[arg(long)]
        backward: bool,
    },
    /// Up-conversion rate relative to a down-conversion reference
    RatioTable {
        #[arg(long, default_value_t = 482.0)]
        min_nm: f64,
        #[arg(long, default_value_t = 500.0)]
        max_nm: f64,
        #[arg(long, default_value_t = 2.0)]
        step_nm: f64,
        /// Signal wavelength of the down-conversion reference
        #[arg(long, default_value_t = 692.0)]
        reference_nm: f64,
    },
    /// Wavelength and incidence of a laser that stimulates a chosen signal
    Align {
        #[arg(long = "lambda1")]
        lambda1_nm: f64,
    },
    /// Recompute the reference tables and compare with embedded values
    PaperTables,
}

struct RunConfig {
    crystal: UniaxialCrystal,
    pump: PumpWave,
    process: ProcessKind,
    plane: PlaneSelector,
    format: Format,
    exec: ExecMode,
    d31_over_d15: f64,
}

impl RunConfig {
    fn from_args(g: &GlobalArgs) -> Result<Self> {
        let mut registry = CrystalRegistry::with_builtin();
        if let Some(path) = &g.registry {
            registry
                .load_file(path)
                .with_context(|| format!("loading crystal registry {}", path.display()))?;
        }
        if g.d31_over_d15.is_nan() || g.d31_over_d15 <= 0.0 {
            bail!("--d31-over-d15 must be positive, got {}", g.d31_over_d15);
        }
        let crystal = registry
            .get(&g.crystal)?
            .clone()
            .with_length(g.length_um)
            .with_d31_over_d15(g.d31_over_d15);
        crystal.validate()?;
        let lambda0 = g.pump_nm / 1e3;
        if !crystal.window().contains(lambda0) {
            bail!(
                "pump {} nm is outside the {} window [{}, {}] nm",
                g.pump_nm,
                crystal.name,
                crystal.window().min * 1e3,
                crystal.window().max * 1e3
            );
        }
        Ok(Self {
            pump: PumpWave::new(lambda0, g.pump_pol.into()),
            crystal,
            process: match g.process {
                Process::Pdc => ProcessKind::Pdc,
                Process::Puc => ProcessKind::Puc,
            },
            plane: match g.plane {
                Plane::Eq => PlaneSelector::Equatorial,
                Plane::Long => PlaneSelector::Longitudinal,
            },
            format: g.format,
            exec: if g.sequential {
                ExecMode::Sequential
            } else {
                ExecMode::Parallel
            },
            d31_over_d15: g.d31_over_d15,
        })
    }

    fn problem(&self) -> MatchProblem<'_> {
        MatchProblem::new(self.process, &self.crystal, self.pump)
            .with_modes(ModePolarizations::default_for(self.process))
    }
}

fn write_json<T: Serialize + ?Sized>(out: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    writeln!(out)?;
    Ok(())
}

fn write_csv<I, R>(out: &mut dyn Write, header: &[&str], records: I) -> Result<()>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator,
    R::Item: AsRef<[u8]>,
{
    let mut w = csv::Writer::from_writer(out);
    w.write_record(header)?;
    for r in records {
        w.write_record(r)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct IndexRecord {
    lambda_nm: f64,
    pol: char,
    psi_deg: f64,
    n: f64,
}

#[derive(Serialize)]
struct EdgeRecord {
    pump_nm: f64,
    edge_nm: f64,
    partner_nm: f64,
    below_transparency: bool,
}

#[derive(Serialize)]
struct MatchRecord {
    lambda1_nm: f64,
    lambda2_nm: f64,
    theta1_deg: f64,
    theta2_deg: f64,
    phi1_deg: f64,
    phi2_deg: f64,
    n0: f64,
    n1: f64,
    n2: f64,
    residual_transverse: f64,
    residual_longitudinal: f64,
    below_transparency: bool,
}

#[derive(Serialize)]
struct AlignRecord {
    target_nm: f64,
    aligner_nm: f64,
    aligner_pol: char,
    aligner_incidence_deg: f64,
    signal_exit_deg: f64,
}

#[derive(Serialize)]
struct BackwardRecord {
    #[serde(flatten)]
    forward: RateRecord,
    backward_rate_arbitrary: f64,
}

fn run(cli: Cli, out: &mut dyn Write) -> Result<ExitCode> {
    let ctx = RunConfig::from_args(&cli.global)?;
    match cli.command {
        Command::Index { lambda_nm, pol, psi } => {
            let n = ctx.crystal.index(pol.into(), lambda_nm / 1e3, psi)?;
            let pol = Polarization::from(pol).letter();
            match ctx.format {
                Format::Csv => writeln!(out, "{n:.6}")?,
                Format::Json => write_json(
                    out,
                    &IndexRecord {
                        lambda_nm,
                        pol,
                        psi_deg: psi,
                        n,
                    },
                )?,
            }
        }
        Command::Edge => {
            let problem = ctx.problem();
            let edge = problem.collinear_edge()?;
            let partner = problem.partner_wavelength(edge)?;
            let rec = EdgeRecord {
                pump_nm: cli.global.pump_nm,
                edge_nm: edge * 1e3,
                partner_nm: partner * 1e3,
                below_transparency: ctx.crystal.below_transparency(partner),
            };
            if rec.below_transparency {
                eprintln!(
                    "warning: partner {:.2} nm is below the transparency limit",
                    rec.partner_nm
                );
            }
            match ctx.format {
                Format::Csv => write_csv(
                    out,
                    &["pump_nm", "edge_nm", "partner_nm", "below_transparency"],
                    [[
                        format!("{:.2}", rec.pump_nm),
                        format!("{:.2}", rec.edge_nm),
                        format!("{:.2}", rec.partner_nm),
                        rec.below_transparency.to_string(),
                    ]],
                )?,
                Format::Json => write_json(out, &rec)?,
            }
        }
        Command::Match { lambda1_nm, coupling } => {
            let sol = ctx.problem().solve_pair(lambda1_nm / 1e3, ctx.plane)?;
            if coupling {
                let cs = coupling_constants(&ctx.crystal, &ctx.pump, &sol)?;
                write_json(out, &cs)?;
                return Ok(ExitCode::SUCCESS);
            }
            let rec = MatchRecord {
                lambda1_nm,
                lambda2_nm: sol.lambda2 * 1e3,
                theta1_deg: sol.theta1,
                theta2_deg: sol.theta2,
                phi1_deg: sol.phi1,
                phi2_deg: sol.phi2,
                n0: sol.n0,
                n1: sol.n1,
                n2: sol.n2,
                residual_transverse: sol.residual_transverse,
                residual_longitudinal: sol.residual_longitudinal,
                below_transparency: sol.below_transparency,
            };
            match ctx.format {
                Format::Csv => write_csv(
                    out,
                    &[
                        "lambda1_nm",
                        "lambda2_nm",
                        "theta1_deg",
                        "theta2_deg",
                        "phi1_deg",
                        "phi2_deg",
                        "n0",
                        "n1",
                        "n2",
                        "residual_transverse",
                        "residual_longitudinal",
                        "below_transparency",
                    ],
                    [[
                        format!("{:.2}", rec.lambda1_nm),
                        format!("{:.2}", rec.lambda2_nm),
                        format!("{:.2}", rec.theta1_deg),
                        format!("{:.2}", rec.theta2_deg),
                        format!("{:.2}", rec.phi1_deg),
                        format!("{:.2}", rec.phi2_deg),
                        format!("{:.6}", rec.n0),
                        format!("{:.6}", rec.n1),
                        format!("{:.6}", rec.n2),
                        format!("{:.1e}", rec.residual_transverse),
                        format!("{:.1e}", rec.residual_longitudinal),
                        rec.below_transparency.to_string(),
                    ]],
                )?,
                Format::Json => write_json(out, &rec)?,
            }
        }
        Command::Rainbow {
            min_nm,
            max_nm,
            step_nm,
        } => {
            let grid = nm_grid(min_nm, max_nm, step_nm)?;
            let sweep = rainbow(&ctx.problem(), &grid, ctx.exec)?;
            for note in &sweep.notes {
                eprintln!("note: {:.2} nm omitted: {}", note.lambda1 * 1e3, note.message);
            }
            match ctx.format {
                Format::Csv => write_csv(out, &RAINBOW_HEADER, sweep.rows.iter().map(|r| r.csv_record()))?,
                Format::Json => write_json(out, &sweep.rows)?,
            }
        }
        Command::Rates {
            lambda1_nm,
            method,
            detector,
            efficiency,
            solid_angle,
            backward,
        } => {
            let det = DetectorConfig {
                efficiency_c: efficiency,
                solid_angle,
                mode: match detector {
                    Detector::Pinhole => DetectionMode::Pinhole,
                    Detector::Filter => DetectionMode::Filter,
                },
            };
            let sol = ctx.problem().solve_pair(lambda1_nm / 1e3, ctx.plane)?;
            let rate = match (method, ctx.process) {
                (Method::Closed, ProcessKind::Puc) => pucv_rate_closed(&ctx.crystal, &ctx.pump, &sol, &det)?,
                (Method::Closed, ProcessKind::Pdc) => pdcv_rate_closed(&ctx.crystal, &ctx.pump, &sol, &det)?,
                (Method::Integral, _) => rate_integral(&ctx.crystal, &ctx.pump, &sol, &det)?,
            };
            for w in &rate.warnings {
                eprintln!("warning: {w}");
            }
            let rec = RateRecord::new(lambda1_nm, &sol, &rate);
            let back = if backward {
                let cs = coupling_constants(&ctx.crystal, &ctx.pump, &sol)?;
                Some(backward_partner_rate(&rate, &cs))
            } else {
                None
            };
            match ctx.format {
                Format::Csv => {
                    let mut header = vec![
                        "lambda1_nm",
                        "theta1_deg",
                        "rate_arbitrary",
                        "detectable_mode",
                        "method",
                        "warnings",
                    ];
                    let mut row = vec![
                        format!("{:.2}", rec.lambda1_nm),
                        format!("{:.2}", rec.theta1_deg),
                        format!("{:.6e}", rec.rate_arbitrary),
                        serde_json::to_value(rec.detectable_mode)?
                            .as_str()
                            .unwrap_or_default()
                            .to_string(),
                        serde_json::to_value(rec.method)?
                            .as_str()
                            .unwrap_or_default()
                            .to_string(),
                        rec.warnings.join("; "),
                    ];
                    if let Some(b) = back {
                        header.push("backward_rate_arbitrary");
                        row.push(format!("{b:.6e}"));
                    }
                    write_csv(out, &header, [row])?;
                }
                Format::Json => match back {
                    Some(b) => write_json(
                        out,
                        &BackwardRecord {
                            forward: rec,
                            backward_rate_arbitrary: b,
                        },
                    )?,
                    None => write_json(out, &rec)?,
                },
            }
        }
        Command::RatioTable {
            min_nm,
            max_nm,
            step_nm,
            reference_nm,
        } => {
            let grid_nm = nm_grid(min_nm, max_nm, step_nm)?;
            let grid: Vec<f64> = grid_nm.iter().map(|nm| nm / 1e3).collect();
            let setup = RatioSetup {
                puc_pump: PumpWave::new(ctx.pump.lambda0, Polarization::Ordinary),
                pdc_pump: PumpWave::new(ctx.pump.lambda0, Polarization::Extraordinary),
                reference_lambda1: reference_nm / 1e3,
                plane: ctx.plane,
            };
            let rows = ratio_table(&ctx.crystal, &setup, &grid, &DetectorConfig::default(), ctx.exec)?;
            let records: Vec<RatioRecord> = grid_nm
                .iter()
                .zip(&rows)
                .map(|(&nm, r)| RatioRecord::new(nm, r))
                .collect();
            for r in &records {
                if let Some(note) = &r.note {
                    eprintln!("note: {:.2} nm: {note}", r.lambda1_nm);
                }
            }
            if let Some(peak) = ratio_peak(&rows) {
                eprintln!(
                    "peak ratio {:.3} at {:.2} nm (d31/d15 = {})",
                    peak.ratio.unwrap_or_default(),
                    peak.lambda1 * 1e3,
                    ctx.d31_over_d15
                );
            }
            match ctx.format {
                Format::Csv => write_csv(out, &RATIO_HEADER, records.iter().map(|r| r.csv_record()))?,
                Format::Json => write_json(out, &records)?,
            }
        }
        Command::Align { lambda1_nm } => {
            if ctx.process != ProcessKind::Puc {
                bail!("align applies to up-conversion only");
            }
            let a = alignment_geometry(&ctx.crystal, &ctx.pump, lambda1_nm / 1e3, ctx.plane)?;
            let rec = AlignRecord {
                target_nm: lambda1_nm,
                aligner_nm: a.aligner_lambda * 1e3,
                aligner_pol: a.aligner_polarization.letter(),
                aligner_incidence_deg: a.aligner_incidence_deg,
                signal_exit_deg: a.signal_exit_deg,
            };
            match ctx.format {
                Format::Csv => write_csv(
                    out,
                    &[
                        "target_nm",
                        "aligner_nm",
                        "aligner_pol",
                        "aligner_incidence_deg",
                        "signal_exit_deg",
                    ],
                    [[
                        format!("{:.2}", rec.target_nm),
                        format!("{:.2}", rec.aligner_nm),
                        rec.aligner_pol.to_string(),
                        format!("{:.2}", rec.aligner_incidence_deg),
                        format!("{:.2}", rec.signal_exit_deg),
                    ]],
                )?,
                Format::Json => write_json(out, &rec)?,
            }
        }
        Command::PaperTables => {
            let checks = paper_tables(&ctx.crystal, ctx.d31_over_d15, ctx.exec);
            match ctx.format {
                Format::Csv => write!(out, "{}", render(&checks))?,
                Format::Json => write_json(out, &checks)?,
            }
            let failed: Vec<&str> = checks.iter().filter(|c| !c.passed()).map(|c| c.id.as_str()).collect();
            out.flush()?;
            if !failed.is_empty() {
                eprintln!("failed: {}", failed.join(", "));
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    out.flush()?;
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out: Box<dyn Write> = match &cli.global.out {
        Some(path) => match File::create(path) {
            Ok(f) => Box::new(BufWriter::new(f)),
            Err(e) => {
                eprintln!("error: cannot create {}: {e}", path.display());
                return ExitCode::FAILURE;
            }
        },
        None => Box::new(BufWriter::new(io::stdout().lock())),
    };
    match run(cli, &mut *out) {
        Ok(code) => code,
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
