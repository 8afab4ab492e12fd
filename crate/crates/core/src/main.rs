use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};

use eaton_chain::worked::{ex1_discretize, ex2_discretize, DiscretizationSpec, ZeroVariant};
use eaton_chain::{
    build_eaton_kernel, build_fpd, check_reversibility, find_closed_sets,
    find_partition_witness_with_tau, io, is_phi_irreducible, marginal, validate_witness,
    verify_fpd, ClosedSet, FiniteChain, FiniteModel, IrreducibilityVerdict, NullColumnPolicy,
    PartitionWitness, ReturnTimeConfig, TransitionKernel, WeightedMeasure,
    build_reducible_version, simulate_return_finite, simulate_return_walk,
};

const EXIT_REDUCIBLE: u8 = 3;

#[derive(Parser)]
#[command(
    name = "eaton-chain",
    about = "Irreducibility analysis for posterior-driven Markov chains on finite grids",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide from (P, nu) alone whether a reducible kernel version exists.
    ///
    /// Exit code 0: every version is irreducible. Exit code 3: a reducible
    /// version exists (witness printed). Exit code 1: error.
    Check {
        model: PathBuf,
        /// Support threshold: entries at or below it count as zero.
        /// Nonzero values make verdicts threshold-dependent; intended for
        /// matrices entered with rounding noise.
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
    },
    /// Validate a model file and its derived posterior and kernel.
    Verify {
        model: PathBuf,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value = "uniform")]
        policy: String,
    },
    /// Run the full analysis: marginal, posterior, kernel, reversibility,
    /// closed sets, and the irreducibility verdict by two independent
    /// routes, cross-checked.
    Pipeline {
        model: PathBuf,
        #[arg(long, default_value = "uniform")]
        policy: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        #[arg(long, default_value_t = 0.0)]
        tau: f64,
        /// Emit the kernel in the sectioned machine format instead of the
        /// human dossier.
        #[arg(long)]
        machine: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build the parameter-space kernel and write it as a kernel file.
    Kernel {
        model: PathBuf,
        #[arg(long, default_value = "uniform")]
        policy: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analyze a kernel file: minimal closed sets and irreducibility.
    Chain { kernel: PathBuf },
    /// Monte Carlo return-time diagnostics.
    Simulate {
        #[command(subcommand)]
        target: SimulateCommand,
    },
    /// Generate the worked example models as model files.
    Example {
        #[command(subcommand)]
        which: ExampleCommand,
    },
}

#[derive(Subcommand)]
enum SimulateCommand {
    /// Simulate first returns on a kernel file.
    Finite {
        kernel: PathBuf,
        /// Starting state label; repeat for several starts.
        #[arg(long, required = true, allow_hyphen_values = true)]
        start: Vec<String>,
        /// Comma-separated target state labels.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        target: Vec<String>,
        #[command(flatten)]
        run: SimFlags,
    },
    /// Simulate the triangular-increment random walk on the real line.
    Walk {
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        start: f64,
        #[arg(long, default_value_t = -0.5, allow_hyphen_values = true)]
        b_lo: f64,
        #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
        b_hi: f64,
        #[command(flatten)]
        run: SimFlags,
    },
}

#[derive(Args)]
struct SimFlags {
    #[arg(long, default_value_t = 10_000)]
    horizon: usize,
    #[arg(long, default_value_t = 2000)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SimFlags {
    fn config(&self) -> ReturnTimeConfig {
        ReturnTimeConfig {
            horizon: self.horizon,
            replicates: self.reps,
            seed: self.seed,
        }
    }
}

#[derive(Subcommand)]
enum ExampleCommand {
    /// Location-uniform model under a flat prior.
    Ex1 {
        #[arg(long, default_value_t = 0.25)]
        h: f64,
        /// Grid range: lower and upper bound.
        #[arg(long, num_args = 2, default_values_t = [-4.0, 4.0], allow_hyphen_values = true)]
        range: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Scale-uniform model under d(theta)/theta, collapsed to the sample
    /// maximum.
    Ex2 {
        #[arg(long, default_value_t = 2)]
        n: usize,
        #[arg(long, default_value_t = 0.1)]
        h: f64,
        #[arg(long, default_value_t = 4.0)]
        upper: f64,
        /// Sampling distribution at scale zero: pointmass | exponential.
        #[arg(long, default_value = "pointmass")]
        variant: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_policy(spec: &str, model: &FiniteModel) -> anyhow::Result<NullColumnPolicy> {
    if spec == "uniform" {
        return Ok(NullColumnPolicy::UniformOverPositivePrior);
    }
    if let Some(label) = spec.strip_prefix("pointmass:") {
        let idx = model
            .prior()
            .index_of(label)
            .ok_or_else(|| anyhow!("unknown parameter label {label:?}"))?;
        return Ok(NullColumnPolicy::PointMass(idx));
    }
    if let Some(path) = spec.strip_prefix("custom:") {
        let text = fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
        let weights = text
            .lines()
            .flat_map(|l| l.split(';').next().unwrap_or("").split_whitespace())
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|_| anyhow!("cannot parse weight {tok:?} in {path}"))
            })
            .collect::<anyhow::Result<Vec<f64>>>()?;
        return Ok(NullColumnPolicy::Custom(weights));
    }
    bail!("unknown policy {spec:?}; expected uniform, pointmass:<label>, or custom:<file>")
}

fn load_model(path: &Path) -> anyhow::Result<FiniteModel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    io::parse_model(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn load_kernel(path: &Path) -> anyhow::Result<(WeightedMeasure, TransitionKernel)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    io::parse_kernel(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
}

fn emit(out: &Option<PathBuf>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            fs::write(path, content).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn label_list(labels: &[String], set: &BTreeSet<usize>) -> String {
    let names: Vec<&str> = set.iter().map(|&i| labels[i].as_str()).collect();
    names.join(" ")
}

fn witness_report(model: &FiniteModel, w: &PartitionWitness) -> String {
    let theta_labels = model.prior().labels();
    let x_labels = model.x_labels();
    let m = marginal(model);
    let c_bar: BTreeSet<usize> = (0..model.n_theta()).filter(|i| !w.c.contains(i)).collect();
    let a_bar: BTreeSet<usize> = (0..model.n_x()).filter(|j| !w.a.contains(j)).collect();
    let mut s = String::new();
    s.push_str("a reducible version exists; witness sets:\n");
    s.push_str(&format!(
        "  C      ({} points, nu-mass {}): {}\n",
        w.c.len(),
        model.prior().mass_of(&w.c),
        label_list(theta_labels, &w.c)
    ));
    s.push_str(&format!(
        "  C-comp ({} points, nu-mass {}): {}\n",
        c_bar.len(),
        model.prior().mass_of(&c_bar),
        label_list(theta_labels, &c_bar)
    ));
    s.push_str(&format!(
        "  A      ({} points, M-mass {}): {}\n",
        w.a.len(),
        m.mass_of(&w.a),
        label_list(x_labels, &w.a)
    ));
    s.push_str(&format!(
        "  A-comp ({} points, M-mass {}): {}\n",
        a_bar.len(),
        m.mass_of(&a_bar),
        label_list(x_labels, &a_bar)
    ));
    s.push_str(
        "conditions: C nonempty; its complement carries prior mass; every sampling\n\
         distribution in C lives inside A; prior-almost-every sampling distribution\n\
         outside C avoids A.\n",
    );
    s
}

fn cmd_check(model_path: &Path, tau: f64) -> anyhow::Result<u8> {
    let model = load_model(model_path)?;
    match find_partition_witness_with_tau(&model, tau)? {
        Some(w) => {
            debug_assert!(validate_witness(&model, &w)?.ok || tau > 0.0);
            print!("{}", witness_report(&model, &w));
            Ok(EXIT_REDUCIBLE)
        }
        None => {
            println!("every version of the parameter chain is irreducible");
            Ok(0)
        }
    }
}

fn cmd_verify(model_path: &Path, tol: f64, policy: &str) -> anyhow::Result<u8> {
    let model = load_model(model_path)?;
    let policy = parse_policy(policy, &model)?;
    let q = build_fpd(&model, &policy)?;
    let fpd = verify_fpd(&q, &model, tol)?;
    let r = build_eaton_kernel(&model, &q)?;
    let rev = check_reversibility(&r, model.prior(), tol)?;
    println!(
        "model: {} parameter points, {} sample points, {} marginal-null columns",
        model.n_theta(),
        model.n_x(),
        q.null_columns().len()
    );
    println!(
        "posterior identity: max violation {:.3e}, max column-sum deviation {:.3e} [{}]",
        fpd.max_identity_violation,
        fpd.max_column_sum_dev,
        if fpd.pass { "pass" } else { "FAIL" }
    );
    println!(
        "reversibility: max detailed-balance residual {:.3e} [{}]",
        rev.max_residual,
        if rev.pass { "pass" } else { "FAIL" }
    );
    if fpd.pass && rev.pass {
        Ok(0)
    } else {
        Err(anyhow!("verification failed at tolerance {tol}"))
    }
}

struct PipelineOutcome {
    reducible_version_exists: bool,
    dossier: String,
    machine: String,
}

fn run_pipeline(
    model: &FiniteModel,
    policy: &NullColumnPolicy,
    tol: f64,
    tau: f64,
) -> anyhow::Result<PipelineOutcome> {
    let m = marginal(model);
    let q = build_fpd(model, policy)?;
    let fpd = verify_fpd(&q, model, tol)?;
    if !fpd.pass {
        bail!(
            "constructed posterior fails its own identity (violation {:.3e})",
            fpd.max_identity_violation
        );
    }
    let r = build_eaton_kernel(model, &q)?;
    let rev = check_reversibility(&r, model.prior(), tol)?;
    let chain = FiniteChain::new(r.clone(), model.prior().clone())
        .map_err(|e| anyhow!("kernel/prior mismatch: {e}"))?;
    let closed = find_closed_sets(&chain);
    let this_version = is_phi_irreducible(&chain);
    let witness = find_partition_witness_with_tau(model, tau)?;

    // Cross-check the two routes; a disagreement would be a bug, so it
    // aborts with a dump rather than reporting anything.
    match &witness {
        Some(w) => {
            let theta0 = *w.c.iter().next().expect("witness C is nonempty");
            let qt = build_reducible_version(model, &q, w, theta0)?;
            let rt = build_eaton_kernel(model, &qt)?;
            let chain_t = FiniteChain::new(rt, model.prior().clone())
                .map_err(|e| anyhow!("kernel/prior mismatch: {e}"))?;
            let leak = w
                .c
                .iter()
                .flat_map(|&i| {
                    (0..model.n_theta())
                        .filter(|k| !w.c.contains(k))
                        .map(move |k| (i, k))
                })
                .map(|(i, k)| chain_t.kernel().at(i, k))
                .fold(0.0_f64, f64::max);
            let verdict_t = is_phi_irreducible(&chain_t);
            if leak != 0.0 || verdict_t.is_irreducible() {
                bail!(
                    "internal cross-check failed: witness {:?} but constructed version \
                     leaks {leak} out of C (verdict {verdict_t:?}); model dump:\n{}",
                    w,
                    io::write_model(model)
                );
            }
        }
        None => {
            if !this_version.is_irreducible() {
                bail!(
                    "internal cross-check failed: no witness, yet this version is \
                     reducible ({this_version:?}); model dump:\n{}",
                    io::write_model(model)
                );
            }
        }
    }

    let mut d = String::new();
    d.push_str(&format!(
        "model: {} parameter points, {} sample points\n",
        model.n_theta(),
        model.n_x()
    ));
    d.push_str(&format!(
        "prior mass {}, marginal mass {}, {} marginal-null columns (policy {})\n",
        model.prior().total_mass(),
        m.total_mass(),
        q.null_columns().len(),
        q.policy_tag()
    ));
    d.push_str(&format!(
        "posterior identity: max violation {:.3e} [pass]\n",
        fpd.max_identity_violation
    ));
    d.push_str(&format!(
        "reversibility: max residual {:.3e} [{}]\n",
        rev.max_residual,
        if rev.pass { "pass" } else { "FAIL" }
    ));
    d.push_str(&format!(
        "minimal closed sets ({}):\n",
        closed.minimal_closed_sets.len()
    ));
    for cs in &closed.minimal_closed_sets {
        d.push_str(&format!(
            "  [nu-mass {}] {}\n",
            model.prior().mass_of(&cs.states),
            label_list(model.prior().labels(), &cs.states)
        ));
    }
    d.push_str(&format!(
        "this version: {}\n",
        if this_version.is_irreducible() {
            "irreducible"
        } else {
            "reducible"
        }
    ));
    match &witness {
        Some(w) => d.push_str(&witness_report(model, w)),
        None => d.push_str("every version of the parameter chain is irreducible\n"),
    }

    let mut machine = String::new();
    machine.push_str(&format!(
        "; verdict: {}\n",
        if witness.is_some() {
            "reducible-version-exists"
        } else {
            "irreducible-all-versions"
        }
    ));
    machine.push_str(&format!(
        "; this-version: {}\n",
        if this_version.is_irreducible() {
            "irreducible"
        } else {
            "reducible"
        }
    ));
    machine.push_str(&io::write_kernel(model.prior(), &r)?);

    Ok(PipelineOutcome {
        reducible_version_exists: witness.is_some(),
        dossier: d,
        machine,
    })
}

fn cmd_pipeline(
    model_path: &Path,
    policy: &str,
    tol: f64,
    tau: f64,
    machine: bool,
    out: &Option<PathBuf>,
) -> anyhow::Result<u8> {
    let model = load_model(model_path)?;
    let policy = parse_policy(policy, &model)?;
    let outcome = run_pipeline(&model, &policy, tol, tau)?;
    emit(
        out,
        if machine {
            &outcome.machine
        } else {
            &outcome.dossier
        },
    )?;
    Ok(if outcome.reducible_version_exists {
        EXIT_REDUCIBLE
    } else {
        0
    })
}

fn cmd_kernel(model_path: &Path, policy: &str, out: &Option<PathBuf>) -> anyhow::Result<u8> {
    let model = load_model(model_path)?;
    let policy = parse_policy(policy, &model)?;
    let q = build_fpd(&model, &policy)?;
    let r = build_eaton_kernel(&model, &q)?;
    emit(out, &io::write_kernel(model.prior(), &r)?)?;
    Ok(0)
}

fn cmd_chain(kernel_path: &Path) -> anyhow::Result<u8> {
    let (phi, kernel) = load_kernel(kernel_path)?;
    let chain = FiniteChain::new(kernel, phi).map_err(|e| anyhow!("{e}"))?;
    let report = find_closed_sets(&chain);
    let verdict = is_phi_irreducible(&chain);
    println!(
        "minimal closed sets ({}):",
        report.minimal_closed_sets.len()
    );
    for ClosedSet { states } in &report.minimal_closed_sets {
        println!(
            "  [mass {}] {}",
            chain.phi().mass_of(states),
            label_list(chain.phi().labels(), states)
        );
    }
    match verdict {
        IrreducibilityVerdict::Irreducible => {
            println!("verdict: irreducible");
            Ok(0)
        }
        IrreducibilityVerdict::Reducible(w) => {
            println!(
                "verdict: reducible; from state {} the positive-mass set {{{}}} is unreachable",
                chain.phi().label(w.y),
                label_list(chain.phi().labels(), &w.a)
            );
            Ok(EXIT_REDUCIBLE)
        }
    }
}

fn cmd_simulate_finite(
    kernel_path: &Path,
    starts: &[String],
    target: &[String],
    cfg: &ReturnTimeConfig,
) -> anyhow::Result<u8> {
    let (phi, kernel) = load_kernel(kernel_path)?;
    let resolve = |label: &String| {
        phi.index_of(label)
            .ok_or_else(|| anyhow!("unknown state label {label:?}"))
    };
    let target_set: BTreeSet<usize> = target.iter().map(resolve).collect::<anyhow::Result<_>>()?;
    println!("start p_hat ci censored");
    for label in starts {
        let s = resolve(label)?;
        let e = simulate_return_finite(&kernel, s, &target_set, cfg)?;
        println!(
            "{label} {} {} {}",
            e.p_hat, e.ci_halfwidth, e.censored_count
        );
    }
    println!("; {}", eaton_chain::sim::RECURRENCE_CAVEAT);
    Ok(0)
}

fn cmd_simulate_walk(
    start: f64,
    b_lo: f64,
    b_hi: f64,
    cfg: &ReturnTimeConfig,
) -> anyhow::Result<u8> {
    let e = simulate_return_walk(start, (b_lo, b_hi), cfg)?;
    println!("start p_hat ci censored");
    println!("{start} {} {} {}", e.p_hat, e.ci_halfwidth, e.censored_count);
    println!("; {}", eaton_chain::sim::RECURRENCE_CAVEAT);
    Ok(0)
}

fn cmd_example(which: &ExampleCommand) -> anyhow::Result<u8> {
    match which {
        ExampleCommand::Ex1 { h, range, out } => {
            let spec = DiscretizationSpec {
                lower: range[0],
                upper: range[1],
                h: *h,
                include_origin_atom: false,
            };
            let disc = ex1_discretize(&spec)?;
            let mut text = format!(
                "; location-uniform model, h={h}, range=[{}, {}], {} boundary rows\n",
                range[0],
                range[1],
                disc.boundary_rows.len()
            );
            text.push_str(&io::write_model(&disc.model));
            emit(out, &text)?;
        }
        ExampleCommand::Ex2 {
            n,
            h,
            upper,
            variant,
            out,
        } => {
            let variant = match variant.as_str() {
                "pointmass" => ZeroVariant::PointMassAtOrigin,
                "exponential" => ZeroVariant::UnitExponential,
                other => bail!("unknown variant {other:?}; expected pointmass or exponential"),
            };
            let spec = DiscretizationSpec {
                lower: 0.0,
                upper: *upper,
                h: *h,
                include_origin_atom: true,
            };
            let disc = ex2_discretize(*n, variant, &spec)?;
            let mut text = format!(
                "; scale-uniform model, n={n}, h={h}, upper={upper}, variant={variant:?}\n"
            );
            text.push_str(&io::write_model(&disc.model));
            emit(out, &text)?;
        }
    }
    Ok(0)
}

fn run(cli: &Cli) -> anyhow::Result<u8> {
    match &cli.command {
        Command::Check { model, tau } => cmd_check(model, *tau),
        Command::Verify { model, tol, policy } => cmd_verify(model, *tol, policy),
        Command::Pipeline {
            model,
            policy,
            tol,
            tau,
            machine,
            out,
        } => cmd_pipeline(model, policy, *tol, *tau, *machine, out),
        Command::Kernel { model, policy, out } => cmd_kernel(model, policy, out),
        Command::Chain { kernel } => cmd_chain(kernel),
        Command::Simulate { target } => match target {
            SimulateCommand::Finite {
                kernel,
                start,
                target,
                run,
            } => cmd_simulate_finite(kernel, start, target, &run.config()),
            SimulateCommand::Walk {
                start,
                b_lo,
                b_hi,
                run,
            } => cmd_simulate_walk(*start, *b_lo, *b_hi, &run.config()),
        },
        Command::Example { which } => cmd_example(which),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}
