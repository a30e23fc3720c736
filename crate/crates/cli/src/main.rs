use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use pinncert::certify::{self, Family, Report, SweepRecord, DEFAULT_FD_MESH};
use pinncert::net::Network;
use pinncert::oracle::{fd_solve, Reference};
use pinncert::problem::{registry_summary, Problem, ProblemSpec, EXAMPLES};
use pinncert::sample::SampleSet;
use pinncert::train::{train, EpochRecord};
use pinncert::trial::{TrialFunction, TrialKind};

mod config;
mod svg;

use config::{parse_assignment, parse_values, Config, Values};

#[derive(Parser)]
#[command(
    name = "pinncert",
    version,
    about = "Train PINNs for 1D convection-diffusion-reaction problems and certify their error",
    args_override_self = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a network and write its loss history and a checkpoint.
    Train(Common),
    /// Certify a trained, untrained or analytic trial function.
    Verify(VerifyArgs),
    /// Train and certify one network per parameter value.
    Sweep(SweepArgs),
    /// Solve with finite differences and dump the mesh values.
    Fd(FdArgs),
    /// Print the built-in example problems.
    ListExamples,
}

/// Flags shared by the problem-solving subcommands; each overrides the
/// matching config key.
#[derive(Args, Debug, Clone)]
#[command(allow_negative_numbers = true)]
struct Common {
    /// TOML config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in problem (see list-examples).
    #[arg(long)]
    example: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    k: Option<f64>,
    #[arg(long)]
    lambda: Option<f64>,
    /// Problem parameter, repeatable: --set name=value.
    #[arg(long = "set", value_name = "NAME=VALUE", value_parser = parse_assignment)]
    set: Vec<(String, f64)>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    epochs: Option<usize>,
    /// Collocation points.
    #[arg(long)]
    n: Option<usize>,
    /// pinn1 or pinn2.
    #[arg(long)]
    kind: Option<String>,
    /// Hidden layers.
    #[arg(long)]
    depth: Option<usize>,
    /// Neurons per hidden layer.
    #[arg(long)]
    width: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    steps_per_epoch: Option<usize>,
    /// Redraw collocation points every epoch.
    #[arg(long)]
    resample: bool,
    #[arg(long)]
    boundary_weight: Option<f64>,
    /// Output directory [default: $PINNCERT_OUT or ./out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Skip SVG charts.
    #[arg(long)]
    no_svg: bool,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct VerifyArgs {
    #[command(flatten)]
    common: Common,
    /// Network checkpoint [default: <out>/checkpoint.bin].
    #[arg(long, conflicts_with_all = ["untrained", "analytic"])]
    checkpoint: Option<PathBuf>,
    /// Certify a freshly initialized network.
    #[arg(long, conflicts_with = "analytic")]
    untrained: bool,
    /// Certify the closed-form solution itself.
    #[arg(long)]
    analytic: bool,
    /// Families to check, comma separated [default: all that apply].
    #[arg(long, value_delimiter = ',')]
    family: Vec<String>,
    /// Starting mesh for a finite-difference reference.
    #[arg(long, default_value_t = DEFAULT_FD_MESH)]
    mesh: usize,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    /// Parameter to vary (eps or a problem parameter).
    #[arg(long)]
    param: Option<String>,
    /// a:b:Nlog, a:b:N or a comma-separated list.
    #[arg(long)]
    values: Option<String>,
    /// Worker threads; 0 picks one per core.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Args)]
#[command(allow_negative_numbers = true)]
struct FdArgs {
    #[command(flatten)]
    common: Common,
    /// Number of cells.
    #[arg(long, default_value_t = DEFAULT_FD_MESH)]
    mesh: usize,
}

impl Common {
    fn resolve(&self) -> Result<Config> {
        let mut cfg = match &self.config {
            Some(path) => Config::load(path)?,
            None => Config::default(),
        };
        if let Some(e) = &self.example {
            let p = &mut cfg.problem;
            p.example = Some(e.clone());
            (p.interval, p.b, p.c, p.f, p.p, p.q, p.exact) = (None, None, None, None, None, None, None);
        }
        if let Some(v) = self.eps {
            cfg.set_param("eps", v);
        }
        if let Some(v) = self.k {
            cfg.set_param("k", v);
        }
        if let Some(v) = self.lambda {
            cfg.set_param("lambda", v);
        }
        for (name, v) in &self.set {
            cfg.set_param(name, *v);
        }
        let t = &mut cfg.train;
        t.seed = self.seed.or(t.seed);
        t.epochs = self.epochs.or(t.epochs);
        t.n = self.n.or(t.n);
        t.lr = self.lr.or(t.lr);
        t.steps_per_epoch = self.steps_per_epoch.or(t.steps_per_epoch);
        t.boundary_weight = self.boundary_weight.or(t.boundary_weight);
        if self.resample {
            t.resample = Some(true);
        }
        let tr = &mut cfg.trial;
        tr.kind = self.kind.clone().or(tr.kind.take());
        tr.depth = self.depth.or(tr.depth);
        tr.width = self.width.or(tr.width);
        if let Some(out) = &self.out {
            cfg.output.directory = Some(out.clone());
        }
        if self.no_svg {
            cfg.output.emit_svg = Some(false);
        }
        Ok(cfg)
    }
}

/// How a successful run ended.
#[derive(Debug, PartialEq, Eq)]
enum Outcome {
    Ok,
    /// Some sweep points could not be computed.
    Failed,
    /// A certificate inequality was violated.
    Violated,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    // exit code 2 is reserved for certificate failures, so usage errors get 1
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::Failed) => ExitCode::from(1),
        Ok(Outcome::Violated) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::Train(common) => cmd_train(&common.resolve()?),
        Command::Verify(args) => cmd_verify(&args),
        Command::Sweep(args) => cmd_sweep(&args),
        Command::Fd(args) => cmd_fd(&args.common.resolve()?, args.mesh),
        Command::ListExamples => {
            for name in EXAMPLES {
                println!("{name:<10} {}", registry_summary(name)?);
            }
            Ok(Outcome::Ok)
        }
    }
}

fn build_problem(cfg: &Config) -> Result<(ProblemSpec, Problem)> {
    let spec = cfg.problem_spec()?;
    let prob = spec.build().context("invalid problem")?;
    Ok((spec, prob))
}

fn out_dir(cfg: &Config) -> Result<PathBuf> {
    let dir = cfg.out_dir();
    fs::create_dir_all(&dir).with_context(|| format!("cannot create {}", dir.display()))?;
    Ok(dir)
}

fn write(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn history_csv(history: &[EpochRecord]) -> String {
    let mut out = String::from("epoch,loss,error\n");
    for h in history {
        let err = h.error.map(|e| e.to_string()).unwrap_or_default();
        out.push_str(&format!("{},{},{}\n", h.epoch, h.loss, err));
    }
    out
}

#[derive(Serialize)]
struct TrainSummary<'a> {
    problem: &'a ProblemSpec,
    kind: TrialKind,
    depth: usize,
    width: usize,
    n: usize,
    seed: u64,
    epochs: usize,
    initial_loss: f64,
    final_loss: f64,
    final_boundary_loss: f64,
    smoothed_nonincreasing: bool,
}

fn cmd_train(cfg: &Config) -> Result<Outcome> {
    let (spec, prob) = build_problem(cfg)?;
    let loss = cfg.loss_spec()?;
    let tc = cfg.train_config()?;
    let net = Network::init(tc.seed, cfg.depth(), cfg.width())?;
    let s = SampleSet::draw(tc.seed, loss.n, prob.interval());
    let t = TrialFunction::new(loss.kind, net, &prob);
    let trained = train(&prob, t, &s, &loss, &tc)?;

    let dir = out_dir(cfg)?;
    write(&dir.join("history.csv"), history_csv(&trained.history))?;
    write(&dir.join("checkpoint.bin"), trained.trial.net().to_bytes())?;
    let summary = TrainSummary {
        problem: &spec,
        kind: loss.kind,
        depth: cfg.depth(),
        width: cfg.width(),
        n: loss.n,
        seed: tc.seed,
        epochs: tc.epochs,
        initial_loss: trained.initial_loss,
        final_loss: trained.final_loss.total,
        final_boundary_loss: trained.final_loss.boundary,
        smoothed_nonincreasing: trained.smoothed_nonincreasing,
    };
    write(&dir.join("train.json"), serde_json::to_string_pretty(&summary)?)?;
    if cfg.emit_svg() {
        let xs: Vec<f64> = trained.history.iter().map(|h| h.epoch as f64).collect();
        let mut series = vec![svg::Series { name: "loss", values: trained.history.iter().map(|h| Some(h.loss)).collect() }];
        if prob.exact().is_some() {
            series.push(svg::Series { name: "error", values: trained.history.iter().map(|h| h.error).collect() });
        }
        write(&dir.join("history.svg"), svg::line_chart("training history", "epoch", &xs, &series, false))?;
    }
    let last_error = trained.history.last().and_then(|h| h.error);
    println!(
        "{} epochs  loss {:.4e} -> {:.4e}{}",
        tc.epochs,
        trained.initial_loss,
        trained.final_loss.total,
        last_error.map(|e| format!("  error {e:.4e}")).unwrap_or_default()
    );
    println!("wrote {}", dir.display());
    Ok(Outcome::Ok)
}

fn cmd_verify(args: &VerifyArgs) -> Result<Outcome> {
    let cfg = args.common.resolve()?;
    let (_, prob) = build_problem(&cfg)?;
    let loss = cfg.loss_spec()?;
    let seed = cfg.seed();
    let families = args
        .family
        .iter()
        .map(|f| Family::parse(f).with_context(|| format!("unknown family {f:?} (energy, weighted, plain)")))
        .collect::<Result<Vec<_>>>()?;
    let families = (!families.is_empty()).then_some(families.as_slice());
    let s = SampleSet::draw(seed, loss.n, prob.interval());
    let dir = out_dir(&cfg)?;

    let report: Report = if args.analytic {
        let Some(exact) = prob.exact() else {
            bail!("--analytic needs a problem with a closed-form solution");
        };
        let reference = Reference::Exact(exact.clone());
        certify::report(&prob, exact, "exact", &s, &reference, families)?
    } else {
        let net = if args.untrained {
            Network::init(seed, cfg.depth(), cfg.width())?
        } else {
            let path = args.checkpoint.clone().unwrap_or_else(|| dir.join("checkpoint.bin"));
            let bytes = fs::read(&path).with_context(|| format!("cannot read checkpoint {}", path.display()))?;
            Network::from_bytes(&bytes).with_context(|| format!("bad checkpoint {}", path.display()))?
        };
        let t = TrialFunction::new(loss.kind, net, &prob);
        let reference = certify::reference_for(&prob, &t, &s, args.mesh)?;
        certify::report(&prob, &t, loss.kind.name(), &s, &reference, families)?
    };
    write(&dir.join("report.json"), serde_json::to_string_pretty(&report)?)?;
    print_report(&report);
    Ok(if report.pass { Outcome::Ok } else { Outcome::Violated })
}

fn print_report(r: &Report) {
    println!("trial {}  n {}  seed {}  reference {}", r.trial, r.n, r.seed, r.reference);
    println!(
        "error {:.4e}  loss {:.4e} (boundary {:.4e})  ratio {:.4e}",
        r.error, r.loss, r.boundary_loss, r.ratio
    );
    println!(
        "quadrature: error {:.4e}  loss {:.4e}  ratio {:.4e}",
        r.integral_error, r.integral_loss, r.integral_ratio
    );
    for c in &r.families {
        println!(
            "{:<9} bound {:.4e}  |e| {:.4e} <= {:.4e}  {}  sampled {}",
            c.certificate.family.name(),
            c.bound,
            c.lhs,
            c.rhs,
            if c.holds { "holds" } else { "VIOLATED" },
            if c.sampled_holds { "below bound" } else { "above bound" }
        );
    }
    println!("{}", if r.pass { "PASS" } else { "FAIL" });
}

fn cmd_sweep(args: &SweepArgs) -> Result<Outcome> {
    let mut cfg = args.common.resolve()?;
    if let Some(p) = &args.param {
        cfg.sweep.parameter = Some(p.clone());
    }
    if let Some(v) = &args.values {
        cfg.sweep.values = Some(Values::Range(v.clone()));
    }
    if let Some(j) = args.jobs {
        cfg.sweep.jobs = Some(j);
    }
    let param = cfg.sweep.parameter.clone().context("missing key sweep.parameter (or --param)")?;
    let values = match &cfg.sweep.values {
        Some(Values::Range(s)) => parse_values(s).context("sweep values")?,
        _ => cfg.sweep_values()?,
    };
    let spec = cfg.problem_spec()?;
    // fail fast on an unknown parameter or a bad base problem
    spec.with_param(&param, values[0])?.build().context("invalid problem")?;
    let sc = cfg.sweep_config()?;
    let dir = out_dir(&cfg)?;

    let records = certify::sweep(&spec, &param, &values, &sc);
    write(&dir.join("sweep.csv"), certify::sweep_csv(&records))?;
    if cfg.emit_svg() {
        write(&dir.join("sweep.svg"), sweep_chart(&param, &values, &records))?;
    }

    println!("{:>12} {:>11} {:>11} {:>11} {:>11}  pass", param, "loss", "error", "ratio", "bound");
    let mut outcome = Outcome::Ok;
    for r in &records {
        if let Some(msg) = &r.failure {
            eprintln!("{} = {}: {msg}", param, r.param_value);
            if outcome == Outcome::Ok {
                outcome = Outcome::Failed;
            }
            continue;
        }
        let pass = r.report.as_ref().is_some_and(|rep| rep.pass);
        if !pass {
            outcome = Outcome::Violated;
        }
        let bound = r.bound_plain.or(r.bound_weighted_tight).or(r.bound_energy);
        let f = |v: Option<f64>| v.map(|x| format!("{x:.4e}")).unwrap_or_else(|| "-".into());
        println!(
            "{:>12} {:>11} {:>11} {:>11} {:>11}  {}",
            r.param_value,
            f(r.loss),
            f(r.error),
            f(r.ratio),
            f(bound),
            if pass { "yes" } else { "NO" }
        );
    }
    println!("wrote {}", dir.display());
    Ok(outcome)
}

fn sweep_chart(param: &str, values: &[f64], records: &[SweepRecord]) -> String {
    let columns: [(&str, fn(&SweepRecord) -> Option<f64>); 7] = [
        ("loss", |r| r.loss),
        ("error", |r| r.error),
        ("ratio", |r| r.ratio),
        ("plain bound", |r| r.bound_plain),
        ("weighted tight", |r| r.bound_weighted_tight),
        ("weighted loose", |r| r.bound_weighted_loose),
        ("energy bound", |r| r.bound_energy),
    ];
    let series: Vec<svg::Series> = columns
        .iter()
        .map(|(name, get)| svg::Series { name, values: records.iter().map(get).collect() })
        .filter(|s| s.values.iter().any(Option::is_some))
        .collect();
    let positive = values.iter().all(|&v| v > 0.0);
    let (lo, hi) = values.iter().fold((f64::INFINITY, 0.0_f64), |(a, b), &v| (a.min(v), b.max(v)));
    let log_x = positive && hi >= 10.0 * lo;
    svg::line_chart(&format!("sweep over {param}"), param, values, &series, log_x)
}

fn cmd_fd(cfg: &Config, mesh: usize) -> Result<Outcome> {
    let (_, prob) = build_problem(cfg)?;
    let sol = fd_solve(&prob, mesh)?;
    let dir = out_dir(cfg)?;
    write(&dir.join("fd.csv"), sol.to_csv())?;
    println!(
        "{:?} scheme  {} cells  h {:.3e}  peclet {:.3e}  scaled residual {:.3e}",
        sol.scheme(),
        sol.cells(),
        sol.h(),
        sol.peclet(),
        sol.discrete_residual()
    );
    if let Some(exact) = prob.exact() {
        let mut gap = 0.0_f64;
        for (&x, &y) in sol.nodes().iter().zip(sol.values()) {
            gap = gap.max((exact.eval(x)? - y).abs());
        }
        println!("max nodal error against the closed form {gap:.3e}");
    }
    println!("wrote {}", dir.display());
    Ok(Outcome::Ok)
}
