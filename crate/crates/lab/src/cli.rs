//! Command line harness: argument schema, config echo, output files and exit codes.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{ArgMatches, Args, CommandFactory, FromArgMatches, Parser, Subcommand, ValueEnum};
use restrict_core::exponents::{oscillatory_exponents, parse_rational, to_f64};
use restrict_core::phase::{Amplitude, PhaseSpec};

use crate::accept;
use crate::error::{LabError, Result};
use crate::experiments::{self, DecayExpectation, KnappTolerances, MeasureSource, Outcome};
use crate::io::{read_phase, write_measure};
use crate::knapp::KnappOptions;
use crate::oscillatory::ScalingOptions;
use crate::report::{emit_csv, emit_text};

#[derive(Debug, Parser)]
#[command(name = "restrict-lab", version, about = "Restriction and oscillatory integral experiments")]
pub struct Cli {
    /// Directory for CSV and verdict files.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact exponent profile for (d, a, b), with identity checks.
    Exponents(ExponentsArgs),
    /// Largest ball masses and the fitted Frostman exponent.
    Measure(MeasureCmd),
    /// Sup of |mu^| on spheres and the fitted decay exponent.
    Decay(DecayCmd),
    /// Sup norms of the Littlewood-Paley pieces mu_j and mu^_j.
    Dyadic(DyadicCmd),
    /// Lorentz norm checks on random fields.
    Lorentz(LorentzCmd),
    /// Knapp superposition: norm growth of g and of f in L^{p,s}.
    Knapp(KnappCmd),
    /// Tomas identity and adjointness of extension and restriction.
    Restrict(RestrictCmd),
    /// Decay of the L^2 -> L^{q,2} ratios of T_lambda, or of the dyadic kernel pieces.
    Oscillatory(OscillatoryCmd),
    /// Fold condition check and scaling for a fold phase.
    Fold(FoldCmd),
    /// The acceptance suite.
    Accept(AcceptCmd),
}

#[derive(Debug, Args)]
pub struct ExponentsArgs {
    #[arg(long, default_value_t = 3)]
    pub d: u32,
    /// Rational, e.g. 2, 3/2 or 0.5.
    #[arg(long, default_value = "2")]
    pub a: String,
    #[arg(long, default_value = "1")]
    pub b: String,
    /// Also list the oscillatory exponents for this curvature count.
    #[arg(long)]
    pub kappa: Option<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureKind {
    Sphere,
    Cantor,
    RandomCantor,
    File,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    #[arg(long, value_enum, default_value = "sphere")]
    pub measure: MeasureKind,
    /// Ambient dimension of the sphere.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 8192)]
    pub atoms: usize,
    /// Cantor contraction ratio, as a decimal or `n/m`.
    #[arg(long, default_value = "1/3", value_parser = rational_value)]
    pub ratio: f64,
    #[arg(long, default_value_t = 14)]
    pub levels: u32,
    /// Atom file (header `d n label`, rows `x.. w`).
    #[arg(long)]
    pub file: Option<PathBuf>,
}

impl MeasureArgs {
    fn source(&self, seed: u64) -> Result<MeasureSource> {
        Ok(match self.measure {
            MeasureKind::Sphere => MeasureSource::Sphere { d: self.dim, n: self.atoms },
            MeasureKind::Cantor => MeasureSource::Cantor { ratio: self.ratio, levels: self.levels },
            MeasureKind::RandomCantor => MeasureSource::RandomCantor { ratio: self.ratio, levels: self.levels, seed },
            MeasureKind::File => MeasureSource::File(
                self.file.clone().ok_or_else(|| LabError::Invalid("--measure file needs --file".into()))?,
            ),
        })
    }
}

#[derive(Debug, Args)]
pub struct MeasureCmd {
    #[command(flatten)]
    pub measure: MeasureArgs,
    /// Descending radii in (0, 1]; defaults to ratio^2 .. ratio^8 (1/2 for spheres).
    #[arg(long, value_delimiter = ',')]
    pub radii: Vec<f64>,
    /// Ball centres sampled among the atoms; 0 uses all.
    #[arg(long, default_value_t = 0)]
    pub centers: usize,
    /// Expected Frostman exponent; defaults to the known value for spheres and Cantor sets.
    #[arg(long)]
    pub expect_a: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub a_tol: f64,
    /// Also write the atoms to this file.
    #[arg(long)]
    pub save: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DecayCmd {
    #[command(flatten)]
    pub measure: MeasureArgs,
    /// Increasing frequencies, at least 1.
    #[arg(long, value_delimiter = ',')]
    pub frequencies: Vec<f64>,
    #[arg(long, default_value_t = 64)]
    pub directions: usize,
    /// Expected decay exponent; defaults to (d-1)/2 for spheres.
    #[arg(long)]
    pub expect_b: Option<f64>,
    #[arg(long, default_value_t = 0.05)]
    pub b_tol: f64,
    /// For Cantor sets the fitted exponent must stay below this.
    #[arg(long, default_value_t = 0.05)]
    pub witness_below: f64,
}

#[derive(Debug, Args)]
pub struct DyadicCmd {
    #[command(flatten)]
    pub measure: MeasureArgs,
    #[arg(long, default_value_t = 1)]
    pub j_min: u32,
    #[arg(long, default_value_t = 8)]
    pub j_max: u32,
    #[arg(long, default_value_t = 2.0)]
    pub half_width: f64,
    #[arg(long, default_value_t = 64)]
    pub min_points: usize,
    /// Decay exponent b in sup|mu^_j| 2^(j b); defaults to (d-1)/2 for spheres.
    #[arg(long)]
    pub decay_exp: Option<f64>,
    /// d - a in sup|mu_j| 2^(-j(d-a)); defaults to 1 for spheres.
    #[arg(long)]
    pub gap: Option<f64>,
    #[arg(long, default_value_t = 10.0)]
    pub factor: f64,
}

#[derive(Debug, Args)]
pub struct LorentzCmd {
    #[arg(long, default_value_t = 1000)]
    pub fields: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct KnappCmd {
    #[arg(long, default_value_t = 2.0)]
    pub q: f64,
    #[arg(long = "N-list", value_delimiter = ',', default_value = "2,3,4,5,6")]
    pub n_list: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "2,inf")]
    pub s_list: Vec<f64>,
    #[arg(long, default_value_t = 1 << 18)]
    pub circle_atoms: usize,
    #[arg(long, default_value_t = 0.1)]
    pub g_tol: f64,
    #[arg(long, default_value_t = 0.15)]
    pub s_tol: f64,
    #[arg(long, default_value_t = 0.3)]
    pub gap: f64,
}

#[derive(Debug, Args)]
pub struct RestrictCmd {
    #[arg(long, default_value_t = 20)]
    pub trials: usize,
    #[arg(long, default_value_t = 512)]
    pub atoms: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    /// Catalog phase: parabola, cone, zero, fold-flat, fold-curved.
    #[arg(long)]
    pub phase: Option<String>,
    /// Polynomial phase file; overrides --phase.
    #[arg(long)]
    pub phase_file: Option<PathBuf>,
    #[arg(long, default_value_t = 2)]
    pub d: usize,
    #[arg(long, default_value_t = 1)]
    pub kappa: u32,
    /// Output exponent; defaults from kappa.
    #[arg(long)]
    pub q: Option<f64>,
    /// Amplitude radius.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
}

impl PhaseArgs {
    fn spec(&self, default: &str) -> Result<PhaseSpec> {
        let amp = Amplitude::new(self.radius)?;
        match &self.phase_file {
            Some(p) => {
                let phase = read_phase(p)?;
                let name = phase.name().to_string();
                Ok(PhaseSpec::new(Box::new(phase), amp, name))
            }
            None => Ok(PhaseSpec::from_catalog(self.phase.as_deref().unwrap_or(default), self.d, amp)?),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OscillatoryMode {
    Scaling,
    Kernel,
}

#[derive(Debug, Args)]
pub struct OscillatoryCmd {
    #[command(flatten)]
    pub phase: PhaseArgs,
    #[arg(long, value_enum, default_value = "scaling")]
    pub mode: OscillatoryMode,
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128,256,512,1024")]
    pub lambdas: Vec<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub slope_tol: f64,
    /// Lambda for --mode kernel.
    #[arg(long, default_value_t = 1024.0)]
    pub kernel_lambda: f64,
    #[arg(long, default_value_t = 2)]
    pub j_min: u32,
    #[arg(long, default_value_t = 7)]
    pub j_max: u32,
    #[arg(long, default_value_t = 10.0)]
    pub factor: f64,
}

#[derive(Debug, Args)]
pub struct FoldCmd {
    #[command(flatten)]
    pub phase: PhaseArgs,
    #[arg(long, value_delimiter = ',', default_value = "16,32,64,128,256,512")]
    pub lambdas: Vec<f64>,
    #[arg(long, default_value_t = 0.15)]
    pub slope_tol: f64,
}

#[derive(Debug, Args)]
pub struct AcceptCmd {
    /// Criteria to run (1 to 11); all by default.
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u32>,
    /// Run the suite a second time into <out>/rerun and compare the CSV files.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    pub rerun: bool,
}

/// The effective configuration of one run, with defaults resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub subcommand: String,
    pub params: BTreeMap<String, String>,
    pub out: PathBuf,
    pub seed: u64,
}

impl ExperimentConfig {
    fn from_matches(cli: &Cli, m: &ArgMatches) -> Self {
        let (name, sub) = m.subcommand().expect("a subcommand is required");
        let cmd = Cli::command();
        // (id, long flag) of every argument of the subcommand
        let args: Vec<(String, String)> = cmd
            .find_subcommand(name)
            .map(|c| {
                c.get_arguments()
                    .filter_map(|a| a.get_long().map(|l| (a.get_id().to_string(), l.to_string())))
                    .collect()
            })
            .unwrap_or_default();
        let mut params = BTreeMap::new();
        for (id, long) in &args {
            if long == "out" || long == "seed" || long == "help" {
                continue;
            }
            let value = match sub.get_raw(id) {
                Some(raw) => raw.map(|v| v.to_string_lossy().into_owned()).collect::<Vec<_>>().join(","),
                None => "(unset)".to_string(),
            };
            params.insert(long.clone(), value);
        }
        Self { subcommand: name.to_string(), params, out: cli.out.clone(), seed: cli.seed }
    }

    pub fn echo(&self) -> String {
        let mut s = format!("command: {}\nseed: {}\nout: {}\n", self.subcommand, self.seed, self.out.display());
        for (k, v) in &self.params {
            s.push_str(&format!("param {k} = {v}\n"));
        }
        s
    }
}

/// A flag value given as a decimal or `n/m`.
fn rational_value(text: &str) -> std::result::Result<f64, String> {
    parse_rational(text).map(|r| to_f64(&r)).map_err(|e| e.to_string())
}

fn known_or(source: &MeasureSource, explicit: Option<f64>, pick: impl Fn((Option<f64>, Option<f64>)) -> Option<f64>) -> Option<f64> {
    explicit.or_else(|| pick(source.known_exponents()))
}

/// Runs one non-accept subcommand.
pub fn run_command(cmd: &Command, seed: u64) -> Result<Outcome> {
    match cmd {
        Command::Exponents(a) => {
            experiments::exponent_table(a.d, parse_rational(&a.a)?, parse_rational(&a.b)?, a.kappa)
        }
        Command::Measure(c) => {
            let src = c.measure.source(seed)?;
            let mu = src.build()?;
            if let Some(p) = &c.save {
                write_measure(&mu, p)?;
            }
            let radii = if c.radii.is_empty() { src.default_ball_radii() } else { c.radii.clone() };
            let expect = known_or(&src, c.expect_a, |k| k.0).map(|a| (a, c.a_tol));
            experiments::regularity(&mu, &radii, c.centers, expect)
        }
        Command::Decay(c) => {
            let src = c.measure.source(seed)?;
            let mu = src.build()?;
            let freqs = if c.frequencies.is_empty() { src.default_frequencies() } else { c.frequencies.clone() };
            let expect = match (known_or(&src, c.expect_b, |k| k.1), &src) {
                (Some(b), _) => DecayExpectation::Near(b, c.b_tol),
                (None, MeasureSource::Cantor { .. } | MeasureSource::RandomCantor { .. }) => {
                    DecayExpectation::Below(c.witness_below)
                }
                _ => DecayExpectation::None,
            };
            experiments::decay(&mu, &freqs, c.directions, expect)
        }
        Command::Dyadic(c) => {
            let src = c.measure.source(seed)?;
            let mu = src.build()?;
            let (a, b) = src.known_exponents();
            let b = c.decay_exp.or(b).ok_or_else(|| LabError::Invalid("--decay-exp is required for this measure".into()))?;
            let gap = c
                .gap
                .or(a.map(|a| mu.dim() as f64 - a))
                .ok_or_else(|| LabError::Invalid("--gap is required for this measure".into()))?;
            if c.j_min > c.j_max {
                return Err(LabError::Invalid("--j-min exceeds --j-max".into()));
            }
            let js: Vec<u32> = (c.j_min..=c.j_max).collect();
            experiments::dyadic_bounds(&mu, &js, c.half_width, c.min_points, b, gap, c.factor)
        }
        Command::Lorentz(c) => experiments::lorentz_suite(c.fields, seed, c.tol),
        Command::Knapp(c) => {
            let mut opts = KnappOptions::planar(c.q, c.s_list.clone(), c.n_list.clone());
            opts.circle_atoms = c.circle_atoms;
            experiments::knapp(&opts, KnappTolerances { g: c.g_tol, s: c.s_tol, gap: c.gap })
        }
        Command::Restrict(c) => experiments::tomas_suite(c.trials, c.atoms, seed, c.tol),
        Command::Oscillatory(c) => {
            let spec = c.phase.spec("parabola")?;
            match c.mode {
                OscillatoryMode::Scaling => {
                    let q = match c.phase.q {
                        Some(q) => q,
                        None => to_f64(oscillatory_exponents(c.phase.kappa).q_circ()?),
                    };
                    scaling_run(&spec, c.lambdas.clone(), q, c.slope_tol, seed)
                }
                OscillatoryMode::Kernel => {
                    if c.j_min > c.j_max {
                        return Err(LabError::Invalid("--j-min exceeds --j-max".into()));
                    }
                    let js: Vec<u32> = (c.j_min..=c.j_max).collect();
                    experiments::kernel_sup(&spec, c.kernel_lambda, &js, c.phase.kappa, c.factor)
                }
            }
        }
        Command::Fold(c) => {
            let spec = c.phase.spec("fold-curved")?;
            let q = c.phase.q.unwrap_or_else(|| to_f64(&oscillatory_exponents(c.phase.kappa).q1));
            let mut out = experiments::fold_check(&spec, c.phase.kappa as usize)?;
            let scaling = scaling_run(&spec, c.lambdas.clone(), q, c.slope_tol, seed)?;
            out.absorb("scaling", scaling);
            Ok(out)
        }
        Command::Accept(_) => Err(LabError::Invalid("accept is dispatched separately".into())),
    }
}

fn scaling_run(spec: &PhaseSpec, lambdas: Vec<f64>, q: f64, tol: f64, seed: u64) -> Result<Outcome> {
    let mut opts = ScalingOptions::new(lambdas, q);
    opts.seed = seed;
    let target = -(spec.x_dim() as f64) / q;
    experiments::scaling(spec, &opts, (target - tol, target + tol))
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> LabError + '_ {
    move |source| LabError::Io { path: path.to_path_buf(), source }
}

/// Writes `<out>/<stem>.csv` (and `<stem>_<suffix>.csv` for further tables).
pub fn write_tables(out: &Path, stem: &str, outcome: &Outcome) -> Result<()> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    for (suffix, table) in &outcome.tables {
        let name = if suffix.is_empty() { format!("{stem}.csv") } else { format!("{stem}_{suffix}.csv") };
        emit_csv(table, &out.join(name))?;
    }
    Ok(())
}

fn verdict_text(config: &ExperimentConfig, summary: &[String], pass: bool) -> String {
    let mut s = config.echo();
    s.push('\n');
    for l in summary {
        s.push_str(l);
        s.push('\n');
    }
    s.push_str(if pass { "verdict: PASS\n" } else { "verdict: FAIL\n" });
    s
}

fn schema(args: &[OsString]) -> String {
    let mut cmd = Cli::command();
    cmd.build();
    let names: Vec<String> = cmd.get_subcommands().map(|c| c.get_name().to_string()).collect();
    let sub = args.iter().skip(1).filter_map(|a| a.to_str()).find(|a| names.iter().any(|n| n == a));
    match sub {
        Some(name) => cmd.find_subcommand_mut(name).expect("known subcommand").render_long_help().to_string(),
        None => cmd.render_long_help().to_string(),
    }
}

/// Parses `args`, runs, writes files and returns the exit status: 0 pass, 1 fail, 2 invalid.
pub fn main_with_args(args: Vec<OsString>) -> i32 {
    let matches = match Cli::command().try_get_matches_from(&args) {
        Ok(m) => m,
        Err(e) => {
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return 0;
            }
            eprintln!("{}", e.render());
            eprintln!("{}", schema(&args));
            return 2;
        }
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{}", e.render());
            return 2;
        }
    };
    let config = ExperimentConfig::from_matches(&cli, &matches);
    let result = match &cli.command {
        Command::Accept(a) => accept::run_cli(&cli.out, cli.seed, &a.only, a.rerun).map(|(pass, summary)| {
            let text = verdict_text(&config, &summary, pass);
            (pass, text)
        }),
        cmd => run_command(cmd, cli.seed).and_then(|outcome| {
            write_tables(&cli.out, &config.subcommand, &outcome)?;
            let text = verdict_text(&config, &outcome.summary, outcome.pass);
            Ok((outcome.pass, text))
        }),
    };
    match result {
        Ok((pass, text)) => {
            print!("{text}");
            let path = cli.out.join(format!("{}_verdict.txt", config.subcommand));
            if let Err(e) = fs::create_dir_all(&cli.out).map_err(io_err(&cli.out)).and_then(|_| emit_text(&text, &path)) {
                eprintln!("error: {e}");
                return 2;
            }
            if pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            eprintln!("{}", schema(&args));
            2
        }
    }
}
