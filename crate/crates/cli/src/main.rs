//! Command-line interface: model simulation, empirical estimation, entropy
//! and rate-function evaluation, exact type-class censuses, and bound
//! verification, with seeded determinism and fixed-precision output.
//!
//! Conventions shared by every subcommand:
//!
//! * models are JSON files `{"n": int, "s": int, "mu": [n^(s+1) floats]}`
//!   in lexicographic tuple order; loading validates stationarity and
//!   reports the max constraint violation on rejection;
//! * path files hold one path per line, symbols as space-separated
//!   integers;
//! * floats are printed with 17 significant digits and all outputs are
//!   byte-identical across reruns and worker counts;
//! * exit codes: 0 success, 1 input error (machine-readable JSON on
//!   stderr), 2 verification failure (the report is still written).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use markov_ldp::dist::KTupleDistribution;
use markov_ldp::empirical::{cyclic_empirical, raw_doublet_empirical};
use markov_ldp::error::Error;
use markov_ldp::information::{
    empirical_entropy_rate, entropy, entropy_rate, entropy_rate_row_average,
};
use markov_ldp::io;
use markov_ldp::ldp::{
    class_probabilities_with, event_rate_report, rate_convergence_row, tuple_rate,
};
use markov_ldp::model::MarkovModel;
use markov_ldp::type_classes::{
    check_census_bounds, enumerate_census_with, BoundsReport, ScanOptions,
};
use markov_ldp::EmpiricalMeasure;

#[derive(Parser)]
#[command(
    name = "markov-ldp",
    version,
    about = "Entropy rates, exact type-class censuses, and large-deviation \
             rate checks for finite-state Markov chains"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct ScanArgs {
    /// Maximum n^l * l path-steps for exhaustive enumeration
    /// (overrides the LDP_BUDGET environment variable).
    #[arg(long)]
    budget: Option<u128>,
    /// Worker threads for enumeration (0 = all cores). Outputs are
    /// identical for every setting.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

impl ScanArgs {
    fn options(&self) -> Result<ScanOptions, Error> {
        let mut options = ScanOptions {
            workers: self.workers,
            ..ScanOptions::default()
        };
        if let Some(budget) = self.budget {
            options.max_path_steps = budget;
        } else if let Ok(text) = std::env::var("LDP_BUDGET") {
            options.max_path_steps = text.parse().map_err(|_| {
                Error::InvalidInput(format!("LDP_BUDGET '{text}' is not an integer"))
            })?;
        }
        if options.max_path_steps == 0 {
            return Err(Error::InvalidInput("budget must be positive".into()));
        }
        Ok(options)
    }
}

#[derive(Args, Clone)]
struct ModelArgs {
    /// Model JSON file: {"n": int, "s": int, "mu": [n^(s+1) floats]}.
    #[arg(long)]
    model: PathBuf,
    /// Validation tolerance override for the sum-to-one and stationarity
    /// checks (default 1e-12).
    #[arg(long)]
    tol: Option<f64>,
}

impl ModelArgs {
    fn load(&self) -> Result<MarkovModel<f64>, Error> {
        io::model_from_json_with(&std::fs::read_to_string(&self.model)?, self.tol)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Sample paths from a model (path i uses stream seed + i).
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        length: usize,
        #[arg(long)]
        seed: u64,
        /// Number of paths to emit, one per line.
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical tuple counts of each path in a file, as JSON lines
    /// {"l": int, "s": int, "counts": [...]}.
    Estimate {
        #[arg(long)]
        path: PathBuf,
        /// Memory length: counts are over (s+1)-tuples of the cyclically
        /// wrapped path; s = 0 gives plain symbol frequencies.
        #[arg(long, default_value_t = 1)]
        s: usize,
        /// Alphabet size (default: max symbol + 1 over the file).
        #[arg(long)]
        n: Option<usize>,
        /// Use the raw (l-1)-window pair estimator instead (no wrap; the
        /// counts then sum to l-1 and need not be stationary).
        #[arg(long, default_value_t = false)]
        raw: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Entropy rate and the entropies it is built from; with --path, also
    /// the per-path normalized negative log-likelihood (which converges to
    /// the entropy rate), one JSON line per path.
    Entropy {
        #[command(flatten)]
        model: ModelArgs,
        /// Path file to score against the model.
        #[arg(long)]
        path: Option<PathBuf>,
    },
    /// Rate-function value of an empirical tuple distribution against the
    /// model ("inf" when the distribution is not stationary).
    Rate {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma- or space-separated n^(s+1) frequencies.
        #[arg(long, conflicts_with = "nu_file")]
        nu: Option<String>,
        /// File containing a JSON array of n^(s+1) frequencies.
        #[arg(long)]
        nu_file: Option<PathBuf>,
    },
    /// Type-class censuses.
    Types {
        #[command(subcommand)]
        command: TypesCommand,
    },
    /// Verification reports.
    Verify {
        #[command(subcommand)]
        command: VerifyCommand,
    },
    /// Singleton-frequency rate function: variational value, constrained
    /// value, row-form value, and the optimizer construction.
    Contract {
        #[command(flatten)]
        model: ModelArgs,
        /// Comma- or space-separated target frequencies (length n).
        #[arg(long)]
        phi: String,
    },
}

#[derive(Subcommand)]
enum TypesCommand {
    /// Exhaustive census: JSON array of {"counts": [...], "cardinality": c}
    /// sorted lexicographically.
    Census {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        s: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Check the cardinality sandwich and permutation bounds for every
    /// class of a census file; prints one PASS/FAIL/UNVERIFIED line.
    Verify {
        #[arg(long)]
        census: PathBuf,
        /// Memory length the census was built with.
        #[arg(long, default_value_t = 1)]
        s: usize,
        /// Write the per-class report as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum VerifyCommand {
    /// Full bound verification at (n, l, s): census sandwiches, mass
    /// conservation, and the per-class rate envelope under the model.
    Bounds {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        l: usize,
        #[arg(long)]
        s: usize,
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        scan: ScanArgs,
    },
    /// Exact event probabilities against the rate proxy over l = lmin..=
    /// lmax; CSV columns: l, exact, rate_proxy, envelope, pass. "exact" is
    /// (1/l) log P{empirical in event}, "rate_proxy" is -min D_c over event
    /// classes, "envelope" the explicit finite-l error bound; infinite
    /// log-probabilities print as -inf.
    Ldp {
        #[command(flatten)]
        model: ModelArgs,
        /// Event JSON: {"type": "l1_ball", "center": [...], "radius": r},
        /// {"type": "half_space", "normal": [...], "offset": b}, or
        /// {"type": "classes", "classes": [[counts], ...]}.
        #[arg(long)]
        event: PathBuf,
        #[arg(long)]
        lmin: usize,
        #[arg(long)]
        lmax: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        scan: ScanArgs,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(error) => {
            eprintln!("{}", error_json(&error));
            ExitCode::from(1)
        }
    }
}

fn error_json(error: &Error) -> String {
    let mut body = serde_json::Map::new();
    body.insert("error".into(), serde_json::Value::String(error.to_string()));
    if let Error::NotStationary { max_violation } = error {
        if let Some(number) = serde_json::Number::from_f64(*max_violation) {
            body.insert("max_violation".into(), serde_json::Value::Number(number));
        }
    }
    if let Error::BudgetExceeded { required, budget } = error {
        body.insert(
            "required".into(),
            serde_json::Value::String(required.to_string()),
        );
        body.insert(
            "budget".into(),
            serde_json::Value::String(budget.to_string()),
        );
    }
    serde_json::Value::Object(body).to_string()
}

fn write_output(out: &Option<PathBuf>, content: &str) -> Result<(), Error> {
    match out {
        Some(path) => {
            std::fs::write(path, content)?;
            Ok(())
        }
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn parse_floats(text: &str) -> Result<Vec<f64>, Error> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|token| !token.is_empty())
        .map(|token| {
            token
                .parse::<f64>()
                .map_err(|_| Error::InvalidInput(format!("'{token}' is not a number")))
        })
        .collect()
}

fn run(command: Command) -> Result<ExitCode, Error> {
    match command {
        Command::Simulate {
            model,
            length,
            seed,
            count,
            out,
        } => {
            let model = model.load()?;
            let mut lines = String::new();
            for index in 0..count {
                let path = model.sample_path(length, seed.wrapping_add(index))?;
                lines.push_str(&io::path_to_line(&path));
                lines.push('\n');
            }
            write_output(&out, &lines)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Estimate {
            path,
            s,
            n,
            raw,
            out,
        } => {
            let text = std::fs::read_to_string(&path)?;
            let paths = io::paths_from_text(&text, n)?;
            let mut body = String::new();
            for path in &paths {
                if !raw && s >= path.len() {
                    eprintln!(
                        "warning: s = {s} >= path length {}; the wrapped window \
                         spans the whole path more than once",
                        path.len()
                    );
                }
                let (s_used, measure) = if raw {
                    (1usize, raw_doublet_empirical(path)?)
                } else {
                    (s, cyclic_empirical(path, s))
                };
                #[derive(Serialize)]
                struct EstimateRow<'a> {
                    l: u64,
                    s: usize,
                    counts: &'a [u64],
                }
                body.push_str(&io::to_json(&EstimateRow {
                    l: path.len() as u64,
                    s: s_used,
                    counts: measure.counts(),
                })?);
                body.push('\n');
            }
            write_output(&out, &body)?;
            Ok(ExitCode::SUCCESS)
        }

        Command::Entropy { model, path } => {
            let model = model.load()?;
            #[derive(Serialize)]
            struct EntropyReport {
                entropy_rate: f64,
                tuple_entropy: f64,
                marginal_entropy: f64,
                row_average_rate: f64,
            }
            let report = EntropyReport {
                entropy_rate: entropy_rate(&model),
                tuple_entropy: entropy(model.mu()),
                marginal_entropy: entropy(model.mu_bar()),
                row_average_rate: entropy_rate_row_average(&model),
            };
            println!("{}", io::to_json(&report)?);
            if let Some(path) = path {
                let text = std::fs::read_to_string(&path)?;
                for sample in io::paths_from_text(&text, Some(model.n()))? {
                    #[derive(Serialize)]
                    struct PathRow {
                        l: u64,
                        #[serde(with = "io::maybe_infinite")]
                        empirical_entropy_rate: f64,
                    }
                    println!(
                        "{}",
                        io::to_json(&PathRow {
                            l: sample.len() as u64,
                            empirical_entropy_rate: empirical_entropy_rate(&model, &sample)?,
                        })?
                    );
                }
            }
            Ok(ExitCode::SUCCESS)
        }

        Command::Rate { model, nu, nu_file } => {
            let model = model.load()?;
            let values = match (nu, nu_file) {
                (Some(text), None) => parse_floats(&text)?,
                (None, Some(path)) => {
                    serde_json::from_str::<Vec<f64>>(&std::fs::read_to_string(path)?)?
                }
                _ => {
                    return Err(Error::InvalidInput(
                        "exactly one of --nu or --nu-file is required".into(),
                    ))
                }
            };
            let nu = KTupleDistribution::new(model.n(), model.s() + 1, values)?;
            let flag = nu.check_stationary();
            #[derive(Serialize)]
            struct RateReportOut {
                stationary: bool,
                max_violation: f64,
                #[serde(with = "io::maybe_infinite")]
                value: f64,
                #[serde(with = "io::maybe_infinite")]
                row_form: f64,
            }
            let (value, row_form) = if flag.is_stationary {
                let value = tuple_rate(&nu, model.mu())?;
                let rows =
                    markov_ldp::information::conditional_relative_entropy_rows(&nu, model.mu())?;
                (value, rows)
            } else {
                (f64::INFINITY, f64::INFINITY)
            };
            println!(
                "{}",
                io::to_json(&RateReportOut {
                    stationary: flag.is_stationary,
                    max_violation: flag.max_violation,
                    value,
                    row_form,
                })?
            );
            Ok(ExitCode::SUCCESS)
        }

        Command::Types { command } => match command {
            TypesCommand::Census { n, l, s, out, scan } => {
                let census = enumerate_census_with(n, l, s, &scan.options()?)?;
                let mut body = io::census_to_json(&census)?;
                body.push('\n');
                write_output(&out, &body)?;
                Ok(ExitCode::SUCCESS)
            }
            TypesCommand::Verify { census, s, out } => {
                let census = io::census_from_json(&std::fs::read_to_string(&census)?, s)?;
                let report = check_census_bounds::<f64>(&census);
                let body = bounds_report_json(&report)?;
                if let Some(path) = &out {
                    std::fs::write(path, &body)?;
                } else {
                    print!("{body}");
                }
                println!("{}", summarize_bounds(&report));
                Ok(bounds_exit(&report))
            }
        },

        Command::Verify { command } => match command {
            VerifyCommand::Bounds {
                n,
                l,
                s,
                model,
                out,
                scan,
            } => {
                let model = model.load()?;
                if model.n() != n || model.s() != s {
                    return Err(Error::InvalidInput(format!(
                        "model has n={}, s={}, but the census is requested at n={n}, s={s}",
                        model.n(),
                        model.s()
                    )));
                }
                let options = scan.options()?;
                let census = enumerate_census_with(n, l, s, &options)?;
                let report = check_census_bounds::<f64>(&census);
                let mass_ok = census.total_paths() == (n as u128).pow(l as u32);
                let probs = class_probabilities_with(&model, l, &options)?;
                let probability_gap = (probs.total_probability() - 1.0).abs();
                let probability_ok = probability_gap <= 1e-9;
                let mut rate_rows_ok = true;
                for (counts, _) in probs.iter() {
                    let zeta = EmpiricalMeasure::new(n, s + 1, counts.to_vec())?;
                    let row = rate_convergence_row(&model, &zeta, &probs)?;
                    rate_rows_ok &= row.pass;
                }
                #[derive(Serialize)]
                struct BoundsSummary {
                    n: usize,
                    s: usize,
                    l: u64,
                    classes: usize,
                    hypothesis_met: bool,
                    sandwich_pass: bool,
                    mass_conservation_pass: bool,
                    probability_gap: f64,
                    rate_envelope_pass: bool,
                }
                let summary = BoundsSummary {
                    n,
                    s,
                    l: census.l(),
                    classes: census.class_count(),
                    hypothesis_met: report.hypothesis_met,
                    sandwich_pass: report.all_pass,
                    mass_conservation_pass: mass_ok && probability_ok,
                    probability_gap,
                    rate_envelope_pass: rate_rows_ok,
                };
                if let Some(path) = &out {
                    std::fs::write(path, format!("{}\n", io::to_json(&summary)?))?;
                }
                if !report.hypothesis_met {
                    println!(
                        "UNVERIFIED: l = {l} < n = {n}, sandwich hypothesis unmet ({} classes)",
                        census.class_count()
                    );
                    return Ok(ExitCode::SUCCESS);
                }
                let all_ok = report.all_pass && mass_ok && probability_ok && rate_rows_ok;
                println!(
                    "{}: {} classes; sandwich {}; mass {}; rate envelope {}",
                    if all_ok { "PASS" } else { "FAIL" },
                    census.class_count(),
                    pass_word(report.all_pass),
                    pass_word(mass_ok && probability_ok),
                    pass_word(rate_rows_ok),
                );
                Ok(if all_ok {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(2)
                })
            }
            VerifyCommand::Ldp {
                model,
                event,
                lmin,
                lmax,
                out,
                scan,
            } => {
                let model = model.load()?;
                let event = io::event_from_json(&std::fs::read_to_string(&event)?)?;
                if lmin > lmax || lmin == 0 {
                    return Err(Error::InvalidInput(format!(
                        "invalid schedule {lmin}..={lmax}"
                    )));
                }
                let schedule: Vec<usize> = (lmin..=lmax).collect();
                let report = event_rate_report(&model, &event, &schedule, &scan.options()?)?;
                let mut csv = String::from("l,exact,rate_proxy,envelope,pass\n");
                for row in &report.rows {
                    csv.push_str(&format!(
                        "{},{},{},{},{}\n",
                        row.l,
                        io::format_float(row.exact),
                        io::format_float(row.rate),
                        io::format_float(row.envelope),
                        row.pass
                    ));
                }
                let all_pass = report.all_pass();
                match &out {
                    Some(path) => {
                        std::fs::write(path, &csv)?;
                        println!("{}: {} lengths", pass_word(all_pass), report.rows.len());
                    }
                    None => {
                        print!("{csv}");
                        eprintln!("{}: {} lengths", pass_word(all_pass), report.rows.len());
                    }
                }
                Ok(if all_pass {
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(2)
                })
            }
        },

        Command::Contract { model, phi } => {
            let model = model.load()?;
            let phi = KTupleDistribution::new(model.n(), 1, parse_floats(&phi)?)?;
            println!("{}", contract_report(&phi, &model)?);
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn contract_report(
    phi: &KTupleDistribution<f64>,
    model: &MarkovModel<f64>,
) -> Result<String, Error> {
    use markov_ldp::contraction::{
        singleton_rate_constrained, singleton_rate_row_form, singleton_rate_variational,
    };
    let variational = singleton_rate_variational(phi, model)?;
    let constrained = singleton_rate_constrained(phi, model)?;
    let row_form = singleton_rate_row_form(phi, model)?;
    #[derive(Serialize)]
    struct ContractReport {
        value_variational: f64,
        value_constrained: f64,
        value_row_form: f64,
        u_star: Vec<f64>,
        nu_star: Vec<f64>,
        residual_variational: f64,
        residual_constrained: f64,
        residual_row_form: f64,
    }
    io::to_json(&ContractReport {
        value_variational: variational.value,
        value_constrained: constrained.value,
        value_row_form: row_form.value,
        u_star: variational.u_star.clone(),
        nu_star: variational.nu_star.as_slice().to_vec(),
        residual_variational: variational.residual,
        residual_constrained: constrained.marginal_residual,
        residual_row_form: row_form.residual,
    })
}

fn pass_word(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn summarize_bounds(report: &BoundsReport<f64>) -> String {
    if !report.hypothesis_met {
        format!(
            "UNVERIFIED: l = {} < n = {}, sandwich hypothesis unmet ({} classes)",
            report.l,
            report.n,
            report.rows.len()
        )
    } else if report.all_pass {
        format!(
            "PASS: {} classes at n={}, s={}, l={}",
            report.rows.len(),
            report.n,
            report.s,
            report.l
        )
    } else {
        let failures = report
            .rows
            .iter()
            .filter(|r| !r.entropy_pass || !r.permutation_pass)
            .count();
        format!(
            "FAIL: {failures} of {} classes violate bounds at n={}, s={}, l={}",
            report.rows.len(),
            report.n,
            report.s,
            report.l
        )
    }
}

fn bounds_exit(report: &BoundsReport<f64>) -> ExitCode {
    if !report.hypothesis_met || report.all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    }
}

fn bounds_report_json(report: &BoundsReport<f64>) -> Result<String, Error> {
    #[derive(Serialize)]
    struct Row<'a> {
        counts: &'a [u64],
        cardinality: u64,
        log_cardinality: f64,
        scaled_conditional_entropy: f64,
        log_lower: f64,
        log_upper: f64,
        entropy_pass: bool,
        perm_log_lower: f64,
        perm_log_upper: f64,
        permutation_pass: bool,
    }
    #[derive(Serialize)]
    struct Report<'a> {
        n: usize,
        s: usize,
        l: u64,
        hypothesis_met: bool,
        all_pass: bool,
        rows: Vec<Row<'a>>,
    }
    let rows = report
        .rows
        .iter()
        .map(|r| Row {
            counts: &r.counts,
            cardinality: r.cardinality,
            log_cardinality: r.log_cardinality,
            scaled_conditional_entropy: r.scaled_conditional_entropy,
            log_lower: r.log_lower,
            log_upper: r.log_upper,
            entropy_pass: r.entropy_pass,
            perm_log_lower: r.perm_log_lower,
            perm_log_upper: r.perm_log_upper,
            permutation_pass: r.permutation_pass,
        })
        .collect();
    let mut body = io::to_json(&Report {
        n: report.n,
        s: report.s,
        l: report.l,
        hypothesis_met: report.hypothesis_met,
        all_pass: report.all_pass,
        rows,
    })?;
    body.push('\n');
    Ok(body)
}
