use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use twoweight::characterize::characterize;
use twoweight::counterexamples::{LargeGammaChain, LargeGammaParams, SmallGammaChain, SmallGammaParams};
use twoweight::io::{instance_digest, instance_to_value, load_instance, RunReport};
use twoweight::lp::{f_norm, FNorm};
use twoweight::operator::{estimate_norm, NormOptions};
use twoweight::suite::{run_suite, write_reproducers, SuiteConfig, SuiteName};
use twoweight::wolff::wolff_report;
use twoweight::{Error, Instance, Side};

#[derive(Parser)]
#[command(name = "twoweight", version, about = "Two-weight L^p(σ) → L^q(ω) inequalities for positive dyadic operators")]
struct Cli {
    /// Print what the subcommand computes instead of running it.
    #[arg(long, global = true)]
    explain: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate the operator norm with a certificate.
    Norm {
        instance: PathBuf,
        #[arg(long, default_value_t = 4)]
        restarts: usize,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
        /// Print only the norm value.
        #[arg(long)]
        value_only: bool,
    },
    /// Mixed norm of a coefficient family (λ by default).
    LpNorm {
        instance: PathBuf,
        #[arg(long)]
        r: f64,
        #[arg(long)]
        s: f64,
        #[arg(long, value_enum, default_value_t = SideArg::Sigma)]
        side: SideArg,
        /// JSON object `{path: value}`; missing paths are zero.
        #[arg(long)]
        coefficients: Option<PathBuf>,
    },
    /// Generalized Wolff potential, its integral condition and the oscillation ratio.
    Wolff {
        instance: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
    },
    /// Auxiliary-family quantities, both upper bounds and the norm.
    Characterize { instance: PathBuf },
    /// Build one of the two chain counterexamples and report its series.
    Counterexample {
        #[arg(long, value_enum)]
        which: Which,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 0.5)]
        q: f64,
        #[arg(long, default_value_t = 0.25)]
        gamma: f64,
        #[arg(long, default_value_t = 1000)]
        depth: usize,
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        #[arg(long, default_value_t = 1.25)]
        beta: f64,
        /// Write the materialized instance here (small depths only).
        #[arg(long)]
        instance_out: Option<PathBuf>,
    },
    /// Run a seeded verification suite; exit code 1 on any failed check.
    Verify {
        #[arg(value_enum)]
        suite: SuiteArg,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        max_depth: Option<usize>,
        /// Chain depths for the counterexamples suite.
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        /// Also write the report (with its constants table) here.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, default_value = "reproducers")]
        repro_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SideArg {
    Sigma,
    Omega,
}

#[derive(Clone, Copy, ValueEnum)]
enum Which {
    SmallGamma,
    LargeGamma,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Invariants,
    Sandwich,
    WolffScale,
    Counterexamples,
}

impl From<SuiteArg> for SuiteName {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Invariants => SuiteName::Invariants,
            SuiteArg::Sandwich => SuiteName::Sandwich,
            SuiteArg::WolffScale => SuiteName::WolffScale,
            SuiteArg::Counterexamples => SuiteName::Counterexamples,
        }
    }
}

fn explain(cmd: &Command) -> &'static str {
    match cmd {
        Command::Norm { .. } => {
            "norm: sup over f ≥ 0 of ‖T(fσ)‖_{L^q(ω)} / ‖f‖_{L^p(σ)}, T(fσ) = Σ_Q λ_Q ⟨f⟩^σ_Q 1_Q over the\n\
             active cubes (λ, σ(Q), ω(Q) > 0). Solved in the dual variable g = f^p σ; reports the\n\
             maximizer, the relative duality gap and a certified upper value."
        }
        Command::LpNorm { .. } => {
            "lp-norm: ‖a‖_{f^{r,s}(μ)} = (∫ (Σ_Q a_Q^s 1_Q)^{r/s} dμ)^{1/r}, with r or s = ∞ read as the\n\
             ess sup or sup over cubes; μ is σ or ω."
        }
        Command::Wolff { .. } => {
            "wolff: Λ_{γ,Q} = (⟨ρ_Q^γ⟩^ω_Q)^{1/γ} with ρ_Q = Σ_{R⊆Q} λ_R 1_R;\n\
             W_γ = Σ_Q λ_Q (ω(Q)/σ(Q))^{p′−1} Λ_{γ,Q}^{p′−1} 1_Q; condition ∫ W_γ^{(p−1)q/(p−q)} dω;\n\
             oscillation max_Q sup ρ_Q / inf ρ_Q."
        }
        Command::Characterize { .. } => {
            "characterize: A1 = ‖Σ λ_Q (ω(Q)/σ(Q)) a_Q⁻¹ 1_Q‖_{L^{p′}(σ)}, A2 = ‖sup a_Q 1_Q‖_{L^{q/(1−q)}(ω)};\n\
             D1 = sup_Q σ(Q)⁻¹ Σ_{R⊆Q} λ_R d_R⁻¹ ω(R), D2 = (∫(Σ λ_Q d_Q^{p′−1} 1_Q)^{(p−1)q/(p−q)} dω)^{(p−q)/q};\n\
             upper bound minimized over a; factorization bound ‖sup b 1_Q‖_{L^{q/(1−q)}(ω)} ·\n\
             ‖Σ c_Q (ω(Q)/σ(Q)) 1_Q‖_{L^{p′}(σ)} for λ = bc; the estimated norm and the two-sided ratios."
        }
        Command::Counterexample { .. } => {
            "counterexample: small-gamma is a descending chain on which the γ-Wolff condition (γ < q)\n\
             converges while sup_Q σ(Q)^{−q/p} ∫ ρ_Q^q dω grows without bound; large-gamma is an\n\
             ascending chain on which Σ λ^q ω(P_j) converges while the endpoint sup condition diverges\n\
             like N^{1−αβ}, α = (p−1)/(p−q)."
        }
        Command::Verify { .. } => {
            "verify: invariants (measure additivity, power scaling, a↔b domination identities, γ = 1 inner\n\
             sums, Jensen monotonicity in γ, a↔d power relations, density round trip, comparability\n\
             brackets); sandwich (minimized upper bound and factorization bounds against the norm);\n\
             wolff-scale (monotonicity and Carleson bounds of the potential families); counterexamples\n\
             (both chain verdicts). Observed constants are recorded in the report."
        }
    }
}

enum Failure {
    Usage(Error),
    Assertion,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Usage(e)
    }
}

fn load(path: &PathBuf) -> Result<Instance, Failure> {
    Ok(load_instance(path)?)
}

fn coefficients(inst: &Instance, path: &Option<PathBuf>) -> Result<Vec<f64>, Error> {
    let Some(path) = path else {
        return Ok(inst.lambda().to_vec());
    };
    let v: Value = serde_json::from_str(&std::fs::read_to_string(path)?)?;
    let Value::Object(m) = v else {
        return Err(Error::Schema { pointer: String::new(), message: "expected an object keyed by path".into() });
    };
    let mut a = vec![0.0; inst.tree.node_count()];
    for (k, x) in m {
        let node = inst.tree.node_from_path(&k)?;
        a[node] = x.as_f64().filter(|x| *x >= 0.0).ok_or_else(|| Error::Schema {
            pointer: format!("/{k}"),
            message: "expected a nonnegative number".into(),
        })?;
    }
    Ok(a)
}

/// Print to stdout, ignoring a closed pipe.
fn out(text: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}

fn emit(mut report: RunReport, start: Instant) {
    report.wall_time_s = start.elapsed().as_secs_f64();
    out(&report.to_pretty());
}

fn run(cli: Cli) -> Result<(), Failure> {
    let start = Instant::now();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    match cli.command {
        Command::Norm { instance, restarts, seed, value_only } => {
            let inst = load(&instance)?;
            let est = estimate_norm(&inst, NormOptions { restarts, seed, ..Default::default() })?;
            if value_only {
                out(&est.value.to_string());
                return Ok(());
            }
            let results = json!({"norm": est.value, "estimate": est});
            emit(RunReport::new(argv, Some(instance_digest(&inst)), results), start);
        }
        Command::LpNorm { instance, r, s, side, coefficients: file } => {
            let inst = load(&instance)?;
            let a = coefficients(&inst, &file)?;
            let side = match side {
                SideArg::Sigma => Side::Sigma,
                SideArg::Omega => Side::Omega,
            };
            let value = f_norm(&inst, &a, FNorm::new(r, s, side)?);
            let results = json!({"r": r, "s": s, "side": side, "value": twoweight::io::number(value)});
            emit(RunReport::new(argv, Some(instance_digest(&inst)), results), start);
        }
        Command::Wolff { instance, gamma } => {
            let inst = load(&instance)?;
            let report = wolff_report(&inst, gamma.unwrap_or(inst.exponents.gamma))?;
            let results = serde_json::to_value(report).map_err(Error::from)?;
            emit(RunReport::new(argv, Some(instance_digest(&inst)), results), start);
        }
        Command::Characterize { instance } => {
            let inst = load(&instance)?;
            let report = characterize(&inst, NormOptions::default())?;
            let results = serde_json::to_value(report).map_err(Error::from)?;
            emit(RunReport::new(argv, Some(instance_digest(&inst)), results), start);
        }
        Command::Counterexample { which, p, q, gamma, depth, epsilon, beta, instance_out } => {
            let (report, materialized) = match which {
                Which::SmallGamma => {
                    let chain = SmallGammaChain::new(SmallGammaParams { p, q, gamma, depth, epsilon, alpha: 1.0 })?;
                    (serde_json::to_value(chain.report()).map_err(Error::from)?, chain.instance())
                }
                Which::LargeGamma => {
                    let chain = LargeGammaChain::new(LargeGammaParams { p, q, depth, beta })?;
                    (serde_json::to_value(chain.report()).map_err(Error::from)?, chain.instance())
                }
            };
            let (digest, instance) = match materialized {
                Ok(inst) => {
                    if let Some(path) = &instance_out {
                        twoweight::io::save_instance(&inst, path)?;
                    }
                    (Some(instance_digest(&inst)), instance_to_value(&inst))
                }
                Err(Error::Resource { .. }) if instance_out.is_none() => (None, json!("streaming")),
                Err(e) => return Err(e.into()),
            };
            let results = json!({"report": report, "instance": instance});
            emit(RunReport::new(argv, digest, results), start);
        }
        Command::Verify { suite, seed, count, max_depth, sizes, report, repro_dir } => {
            let name = SuiteName::from(suite);
            let mut cfg = SuiteConfig::new(name, seed);
            if let Some(c) = count {
                cfg.count = c;
            }
            if let Some(d) = max_depth {
                cfg.max_depth = d;
            }
            if let Some(s) = sizes {
                cfg.sizes = s;
            }
            let outcome = run_suite(name, &cfg)?;
            let text = outcome.report.to_pretty();
            out(&text);
            if let Some(path) = report {
                std::fs::write(path, text + "\n").map_err(Error::from)?;
            }
            if !outcome.failures.is_empty() {
                for path in write_reproducers(name, &outcome.failures, &repro_dir)? {
                    eprintln!("reproducer written to {}", path.display());
                }
                return Err(Failure::Assertion);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.explain {
        out(explain(&cli.command));
        return ExitCode::SUCCESS;
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Assertion) => ExitCode::from(1),
        Err(Failure::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
