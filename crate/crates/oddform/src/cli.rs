//! The `oddform` command line: classify, dualize, bracket and verify.
//!
//! The interface is deliberately thin.  Every command loads a scenario
//! file (or one of the built-in flat spacetime models), realizes it into
//! symbolic fields, hands those to the library, and renders a
//! [`Report`].  Nothing here decides any mathematics; the CLI only
//! routes and formats.  That split keeps the whole surface testable
//! through [`run`], which parses an argument vector and returns the
//! exit code together with captured stdout/stderr instead of touching
//! the process.
//!
//! # Commands
//!
//! * `classify FILE` — structure labels for the pair(s) the file
//!   describes, with the certifying residual table.  Scenario files with
//!   a `darboux`, `galilei` or `einstein` payload carry both a covariant
//!   and a contravariant pair, so those are classified as two sections.
//! * `dualize FILE` — the dual pair tabulated at every sample point,
//!   with the duality axioms certified numerically.  `--roundtrip` also
//!   dualizes the dual again and reports the worst round-trip deviation.
//! * `bracket FILE --f EXPR --g EXPR` — the Poisson bracket `{f,g}` and
//!   the identity-corrected bracket `[f,g]` as expressions and as
//!   sampled values.  `--h EXPR` adds the jacobiator of the three
//!   functions (of `[.,.]` with `--jacobi`, of `{.,.}` otherwise); it is
//!   reported, not gated, because a large jacobiator is often exactly
//!   the point of the computation.  `--curvature` checks the criterion
//!   `{f,g} = −dω(X_f, X_g)` against the scenario's one-form and *does*
//!   gate the exit code, since passing that flag is an explicit request
//!   for a verdict.
//! * `scenario MODEL` — build the phase space of a `galilei` or
//!   `einstein` model (built-in flat metric, or `--metric FILE` for a
//!   scenario file with the matching payload) and verify every
//!   structural theorem the construction promises.
//!
//! # Exit codes
//!
//! `0` on success, `1` for input errors and failed verifications, `2`
//! when `--expect LABEL` names a valid label that was not granted
//! (usage errors keep clap's own convention, which is also `2`).
//!
//! # Reading reports
//!
//! Residual keys without a section prefix are verdicts: each must stay
//! within the tolerance (`scenario`, `dualize`, `--curvature`).  Keys
//! prefixed with `covariant: ` or `contravariant: ` come from
//! classification and are diagnostics — a large value there simply
//! records that some identity fails, which is what distinguishes the
//! labels from one another.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::algebra::{
    check_bracket_curvature, hamiltonian_lift, jacobi_bracket, jacobiator, poisson_bracket,
    AlgebraError, BracketContext, BracketKind,
};
use crate::expr::{parse_expr, EvalError, ParseError, Point};
use crate::exterior::{pair as pairing, ExteriorError};
use crate::report::{Report, ReportFormat, SampleRow};
use crate::scenario::{load_scenario, Realized, RealizedObject, ScenarioError, ScenarioFile};
use crate::spacetime::{verify_theorems, SpacetimeError};
use crate::structures::{
    classify_contravariant, classify_covariant, dual_of_contravariant, dual_of_covariant,
    dualize_contravariant_at, dualize_covariant_at, StructureError, StructureKind,
};

/// Exit code for success.
pub const EXIT_OK: i32 = 0;
/// Exit code for input errors and failed verifications.
pub const EXIT_FAILURE: i32 = 1;
/// Exit code when `--expect LABEL` is not among the granted labels.
pub const EXIT_MISMATCH: i32 = 2;

/// Anything a command can fail with before a report exists.  All of
/// these map to exit code 1 and are printed to stderr.
#[derive(Debug, Error)]
pub enum CliError {
    /// Scenario loading or realization failed.
    #[error(transparent)]
    Scenario(#[from] ScenarioError),
    /// Structure construction, classification or dualization failed.
    #[error(transparent)]
    Structure(#[from] StructureError),
    /// Bracket machinery failed.
    #[error(transparent)]
    Algebra(#[from] AlgebraError),
    /// Spacetime verification failed to build.
    #[error(transparent)]
    Spacetime(#[from] SpacetimeError),
    /// Numeric evaluation failed.
    #[error(transparent)]
    Eval(#[from] EvalError),
    /// Exterior algebra failed.
    #[error(transparent)]
    Exterior(#[from] ExteriorError),
    /// An `--f/--g/--h` expression did not parse.
    #[error("in --{arg}: {source}")]
    Expr {
        /// Which flag carried the bad expression.
        arg: &'static str,
        /// The parser's diagnosis, with byte offset.
        source: ParseError,
    },
    /// `--expect` named no known structure label.
    #[error("{0}")]
    BadLabel(String),
    /// The scenario command's model was not recognized.
    #[error("unknown model {0:?}; expected \"galilei\" or \"einstein\"")]
    BadModel(String),
    /// `--metric FILE` carried a payload for a different model.
    #[error("the file's {found} payload does not provide a {model} model")]
    ModelMismatch {
        /// Payload found in the file.
        found: String,
        /// Model the command line asked for.
        model: String,
    },
}

/// Top-level argument parser.
#[derive(Debug, Parser)]
#[command(
    name = "oddform",
    version = crate::VERSION,
    about = "classify, dualize and verify geometric structures on odd-dimensional charts",
    propagate_version = true
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Classify the structure a scenario file describes
    Classify(ClassifyArgs),
    /// Compute the dual pair and certify the duality axioms
    Dualize(DualizeArgs),
    /// Evaluate Poisson and Jacobi brackets of two functions
    Bracket(BracketArgs),
    /// Build a spacetime phase space and verify its theorems
    Scenario(ScenarioArgs),
}

impl Command {
    fn common(&self) -> &CommonArgs {
        match self {
            Command::Classify(a) => &a.common,
            Command::Dualize(a) => &a.common,
            Command::Bracket(a) => &a.common,
            Command::Scenario(a) => &a.common,
        }
    }
}

/// Flags shared by every command.
#[derive(Debug, Args)]
struct CommonArgs {
    /// Number of admissible sample points
    #[arg(long, default_value_t = 32)]
    samples: usize,

    /// Tolerance for every residual verdict
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,

    /// Seed for the deterministic sampler
    #[arg(long, default_value_t = 42)]
    seed: u64,

    /// Output format: text or structured (JSON)
    #[arg(long, default_value = "text")]
    format: ReportFormat,

    /// Exit with code 2 unless this structure label is granted
    #[arg(long, value_name = "LABEL")]
    expect: Option<String>,
}

#[derive(Debug, Args)]
struct ClassifyArgs {
    /// Scenario file (TOML)
    file: PathBuf,

    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct DualizeArgs {
    /// Scenario file (TOML)
    file: PathBuf,

    /// Dualize the dual again and report the round-trip deviation
    #[arg(long)]
    roundtrip: bool,

    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct BracketArgs {
    /// Scenario file (TOML); its payload must carry a contravariant pair
    file: PathBuf,

    /// First function
    #[arg(long, value_name = "EXPR")]
    f: String,

    /// Second function
    #[arg(long, value_name = "EXPR")]
    g: String,

    /// Third function: also report the jacobiator of (f, g, h)
    #[arg(long, value_name = "EXPR")]
    h: Option<String>,

    /// Use the identity-corrected bracket [.,.] for the jacobiator
    #[arg(long, requires = "h")]
    jacobi: bool,

    /// Check {f,g} = -d(omega)(X_f, X_g); needs the scenario's one-form
    #[arg(long, alias = "eq27")]
    curvature: bool,

    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Spacetime model: galilei or einstein
    model: String,

    /// Metric source: "flat" or a scenario file path
    #[arg(long, default_value = "flat", value_name = "FLAT|FILE")]
    metric: String,

    #[command(flatten)]
    common: CommonArgs,
}

/// What a finished invocation produced.  [`run`] never prints and never
/// exits; the binary decides what to do with the pieces, and tests can
/// assert on them directly.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    /// Process exit code.
    pub code: i32,
    /// Complete standard output (the rendered report).
    pub stdout: String,
    /// Complete standard error (error messages; empty on success).
    pub stderr: String,
}

/// Parse `args` (including the program name) and execute the selected
/// command, capturing all output.
pub fn run<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version requests are "errors" to clap but not to
            // the user: they go to stdout with exit code 0.
            let code = err.exit_code();
            let rendered = err.render().to_string();
            return if err.use_stderr() {
                Outcome {
                    code,
                    stdout: String::new(),
                    stderr: rendered,
                }
            } else {
                Outcome {
                    code,
                    stdout: rendered,
                    stderr: String::new(),
                }
            };
        }
    };
    let format = cli.command.common().format;
    match dispatch(cli.command) {
        Ok((report, code)) => Outcome {
            code,
            stdout: report.render(format),
            stderr: String::new(),
        },
        Err(err) => Outcome {
            code: EXIT_FAILURE,
            stdout: String::new(),
            stderr: format!("error: {err}\n"),
        },
    }
}

fn dispatch(command: Command) -> Result<(Report, i32), CliError> {
    match command {
        Command::Classify(args) => cmd_classify(args),
        Command::Dualize(args) => cmd_dualize(args),
        Command::Bracket(args) => cmd_bracket(args),
        Command::Scenario(args) => cmd_scenario(args),
    }
}

fn point_coords(p: &Point) -> Vec<f64> {
    p.values().to_vec()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / (1.0 + a.abs().max(b.abs()))
}

/// Classify whatever pair(s) the realized scenario carries into the
/// report.  Single-pair payloads become one unnamed section; payloads
/// carrying both variances become `covariant`/`contravariant` sections.
fn classify_into(report: &mut Report, realized: &Realized, tol: f64) -> Result<(), CliError> {
    match &realized.object {
        RealizedObject::Covariant { .. } => {
            let pair = realized.covariant_pair(tol)?;
            let c = classify_covariant(&pair, &realized.sampler, tol)?;
            report.absorb_classification("", &c);
        }
        RealizedObject::Contravariant { omega, .. } => {
            let pair = realized.contravariant_pair(tol)?;
            let c = classify_contravariant(&pair, omega.as_ref(), &realized.sampler, tol)?;
            report.absorb_classification("", &c);
        }
        RealizedObject::Darboux(_) | RealizedObject::Spacetime { .. } => {
            let cov = realized.covariant_pair(tol)?;
            let c = classify_covariant(&cov, &realized.sampler, tol)?;
            report.absorb_classification("covariant", &c);
            let contra = realized.contravariant_pair(tol)?;
            let one_form = realized.one_form();
            let c = classify_contravariant(&contra, one_form.as_ref(), &realized.sampler, tol)?;
            report.absorb_classification("contravariant", &c);
        }
    }
    Ok(())
}

/// Apply `--expect`: check the label parses, then check membership.
fn apply_expect(report: &mut Report, expect: &Option<String>) -> Result<i32, CliError> {
    let Some(want) = expect else {
        return Ok(EXIT_OK);
    };
    let kind = StructureKind::from_str(want).map_err(CliError::BadLabel)?;
    let name = kind.to_string();
    if report.labels.iter().any(|l| l == &name) {
        Ok(EXIT_OK)
    } else {
        report.status = "mismatch".to_owned();
        report
            .notes
            .push(format!("expected label {name:?} was not granted"));
        Ok(EXIT_MISMATCH)
    }
}

fn cmd_classify(args: ClassifyArgs) -> Result<(Report, i32), CliError> {
    let tol = args.common.tol;
    let file = load_scenario(&args.file)?;
    let realized = file.realize(args.common.seed, args.common.samples)?;
    let mut report = Report::new(
        "classify",
        file.payload_name(),
        args.common.seed,
        realized.sampler.count(),
        tol,
    );
    classify_into(&mut report, &realized, tol)?;
    let code = apply_expect(&mut report, &args.common.expect)?;
    Ok((report, code))
}

fn cmd_dualize(args: DualizeArgs) -> Result<(Report, i32), CliError> {
    let tol = args.common.tol;
    let file = load_scenario(&args.file)?;
    let realized = file.realize(args.common.seed, args.common.samples)?;
    let mut report = Report::new(
        "dualize",
        file.payload_name(),
        args.common.seed,
        realized.sampler.count(),
        tol,
    );
    let dim = realized.chart.dim();

    // A contravariant payload dualizes to forms; everything else carries
    // (or induces) a covariant pair and dualizes to fields.
    if matches!(realized.object, RealizedObject::Contravariant { .. }) {
        let pair = realized.contravariant_pair(tol)?;
        let dual = dual_of_contravariant(&pair, &realized.sampler, tol)?;
        for (k, v) in dual.axiom_residuals() {
            report.residuals.insert(format!("axiom: {k}"), *v);
        }
        let mut roundtrip = 0.0f64;
        for entry in dual.at() {
            let mut values = BTreeMap::new();
            for i in 0..dim {
                values.insert(format!("omega[{i}]"), entry.omega[i]);
            }
            for i in 0..dim {
                for j in (i + 1)..dim {
                    values.insert(format!("Omega[{i}][{j}]"), entry.big_omega[(i, j)]);
                }
            }
            report.samples.push(SampleRow {
                point: point_coords(&entry.point),
                values,
            });
            if args.roundtrip {
                let (e_rt, lambda_rt) = dualize_covariant_at(&entry.omega, &entry.big_omega)?;
                let e_in = pair.e().vector_at(&entry.point)?;
                let lambda_in = pair.lambda().matrix_at(&entry.point)?;
                for i in 0..dim {
                    roundtrip = roundtrip.max(rel(e_rt[i], e_in[i]));
                    for j in 0..dim {
                        roundtrip = roundtrip.max(rel(lambda_rt[(i, j)], lambda_in[(i, j)]));
                    }
                }
            }
        }
        if args.roundtrip {
            report
                .residuals
                .insert("roundtrip: dual of dual".to_owned(), roundtrip);
        }
    } else {
        let pair = realized.covariant_pair(tol)?;
        let dual = dual_of_covariant(&pair, &realized.sampler, tol)?;
        for (k, v) in dual.axiom_residuals() {
            report.residuals.insert(format!("axiom: {k}"), *v);
        }
        let mut roundtrip = 0.0f64;
        for entry in dual.at() {
            let mut values = BTreeMap::new();
            for i in 0..dim {
                values.insert(format!("E[{i}]"), entry.e[i]);
            }
            for i in 0..dim {
                for j in (i + 1)..dim {
                    values.insert(format!("Lambda[{i}][{j}]"), entry.lambda[(i, j)]);
                }
            }
            report.samples.push(SampleRow {
                point: point_coords(&entry.point),
                values,
            });
            if args.roundtrip {
                let (omega_rt, big_omega_rt) = dualize_contravariant_at(&entry.e, &entry.lambda)?;
                let omega_in = pair.omega().vector_at(&entry.point)?;
                let big_omega_in = pair.big_omega().matrix_at(&entry.point)?;
                for i in 0..dim {
                    roundtrip = roundtrip.max(rel(omega_rt[i], omega_in[i]));
                    for j in 0..dim {
                        roundtrip =
                            roundtrip.max(rel(big_omega_rt[(i, j)], big_omega_in[(i, j)]));
                    }
                }
            }
        }
        if args.roundtrip {
            report
                .residuals
                .insert("roundtrip: dual of dual".to_owned(), roundtrip);
        }
    }

    // Verdict residuals are exactly the ones present at this point; the
    // classification absorbed for --expect below adds diagnostic keys
    // that may legitimately be large.
    let verdict_max = report.residuals.values().cloned().fold(0.0, f64::max);
    if args.common.expect.is_some() {
        classify_into(&mut report, &realized, tol)?;
    }
    if verdict_max > tol {
        report.status = "failed".to_owned();
        return Ok((report, EXIT_FAILURE));
    }
    let code = apply_expect(&mut report, &args.common.expect)?;
    Ok((report, code))
}

fn cmd_bracket(args: BracketArgs) -> Result<(Report, i32), CliError> {
    let tol = args.common.tol;
    let file = load_scenario(&args.file)?;
    let realized = file.realize(args.common.seed, args.common.samples)?;
    let mut report = Report::new(
        "bracket",
        file.payload_name(),
        args.common.seed,
        realized.sampler.count(),
        tol,
    );

    let pair = realized.contravariant_pair(tol)?;
    let ctx = match realized.one_form() {
        Some(omega) => BracketContext::with_omega(pair, omega)?,
        None => BracketContext::new(pair)?,
    };

    let parse = |arg: &'static str, text: &str| {
        parse_expr(text, &realized.chart).map_err(|source| CliError::Expr { arg, source })
    };
    let f = parse("f", &args.f)?;
    let g = parse("g", &args.g)?;
    let h = match &args.h {
        Some(text) => Some(parse("h", text)?),
        None => None,
    };

    let poisson = poisson_bracket(&ctx, &f, &g);
    let jacobi = jacobi_bracket(&ctx, &f, &g);
    report.expressions.insert("f".to_owned(), f.to_string());
    report.expressions.insert("g".to_owned(), g.to_string());
    report
        .expressions
        .insert("{f,g}".to_owned(), poisson.to_string());
    report
        .expressions
        .insert("[f,g]".to_owned(), jacobi.to_string());

    let jac = match &h {
        Some(h) => {
            let kind = if args.jacobi {
                BracketKind::Jacobi
            } else {
                BracketKind::Poisson
            };
            report.expressions.insert("h".to_owned(), h.to_string());
            report.notes.push(format!(
                "jacobiator uses the {} bracket",
                match kind {
                    BracketKind::Jacobi => "identity-corrected [.,.]",
                    BracketKind::Poisson => "Poisson {.,.}",
                }
            ));
            Some(jacobiator(&ctx, kind, &f, &g, h))
        }
        None => None,
    };

    let mut jac_max = 0.0f64;
    for p in realized.sampler.points() {
        let mut values = BTreeMap::new();
        values.insert("{f,g}".to_owned(), poisson.eval(p)?);
        values.insert("[f,g]".to_owned(), jacobi.eval(p)?);
        if let Some(jac) = &jac {
            let v = jac.eval(p)?;
            jac_max = jac_max.max(v.abs());
            values.insert("jacobiator".to_owned(), v);
        }
        report.samples.push(SampleRow {
            point: point_coords(p),
            values,
        });
    }
    if jac.is_some() {
        report
            .residuals
            .insert("jacobiator max |value|".to_owned(), jac_max);
    }

    let mut curvature_failed = false;
    if args.curvature {
        let omega = ctx.omega().ok_or(AlgebraError::MissingOneForm)?;
        let d_omega = omega.d()?;
        let xf = hamiltonian_lift(&ctx, &f);
        let xg = hamiltonian_lift(&ctx, &g);
        let rhs = -&pairing(&d_omega.hook(&xf)?, &xg);
        let mut worst = 0.0f64;
        for p in realized.sampler.points() {
            worst = worst.max(rel(poisson.eval(p)?, rhs.eval(p)?));
        }
        let random = check_bracket_curvature(&ctx, &realized.sampler, 5)?;
        report
            .residuals
            .insert("curvature criterion (f,g)".to_owned(), worst);
        report
            .residuals
            .insert("curvature criterion (random)".to_owned(), random);
        curvature_failed = worst > tol || random > tol;
    }

    if args.common.expect.is_some() {
        classify_into(&mut report, &realized, tol)?;
    }
    if curvature_failed {
        report.status = "failed".to_owned();
        return Ok((report, EXIT_FAILURE));
    }
    let code = apply_expect(&mut report, &args.common.expect)?;
    Ok((report, code))
}

fn cmd_scenario(args: ScenarioArgs) -> Result<(Report, i32), CliError> {
    let tol = args.common.tol;
    let model = args.model.to_ascii_lowercase();
    let file = match model.as_str() {
        "galilei" if args.metric == "flat" => ScenarioFile::galilei_flat(),
        "einstein" if args.metric == "flat" => ScenarioFile::einstein_flat(),
        "galilei" | "einstein" => {
            let file = load_scenario(&args.metric)?;
            if file.payload_name() != model {
                return Err(CliError::ModelMismatch {
                    found: file.payload_name().to_owned(),
                    model,
                });
            }
            file
        }
        _ => return Err(CliError::BadModel(args.model)),
    };

    let realized = file.realize(args.common.seed, args.common.samples)?;
    let RealizedObject::Spacetime { input, .. } = &realized.object else {
        unreachable!("model payloads realize to spacetime objects");
    };
    let theorems = verify_theorems(input, &realized.sampler, tol)?;

    let mut report = Report::new(
        "scenario",
        file.payload_name(),
        args.common.seed,
        realized.sampler.count(),
        tol,
    );
    report.residuals = theorems.residuals.clone();
    report.nonvanishing = theorems.nonvanishing.clone();
    let ok = theorems.all_ok(tol);
    report.absorb_classification("covariant", &theorems.covariant);
    report.absorb_classification("contravariant", &theorems.contravariant);
    if !ok {
        report.status = "failed".to_owned();
        return Ok((report, EXIT_FAILURE));
    }
    let code = apply_expect(&mut report, &args.common.expect)?;
    Ok((report, code))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn temp_scenario(name: &str, contents: &str) -> PathBuf {
        let path = std::env::temp_dir().join(format!(
            "oddform-cli-{}-{name}.toml",
            std::process::id()
        ));
        std::fs::write(&path, contents).expect("write temp scenario");
        path
    }

    fn run_vec(args: &[&str]) -> Outcome {
        run(args.iter().copied())
    }

    /// The contact structure in normal form on a 3-dimensional chart.
    const CONTACT_DARBOUX: &str = r#"
version = 1

[darboux]
n = 1
s = 1
omega_funcs = ["-x2", "0"]
"#;

    /// E = d/dt, Lambda = d/dx2 ^ d/dx1: a coPoisson pair that is not
    /// Jacobi.
    const FLAT_COPOISSON: &str = r#"
version = 1

[chart]
coords = ["t", "x1", "x2"]

[contravariant]
E = ["1", "0", "0"]
Lambda = [["0", "0", "0"], ["-1"], []]
"#;

    #[test]
    fn help_and_version_exit_cleanly() {
        let help = run_vec(&["oddform", "--help"]);
        assert_eq!(help.code, EXIT_OK);
        assert!(help.stdout.contains("classify"));
        assert!(help.stdout.contains("scenario"));
        assert!(help.stderr.is_empty());

        let version = run_vec(&["oddform", "--version"]);
        assert_eq!(version.code, EXIT_OK);
        assert!(version.stdout.contains(crate::VERSION));
    }

    #[test]
    fn usage_errors_keep_claps_exit_code() {
        let out = run_vec(&["oddform", "frobnicate"]);
        assert_eq!(out.code, 2);
        assert!(out.stdout.is_empty());
        assert!(!out.stderr.is_empty());

        let out = run_vec(&["oddform", "bracket", "x.toml", "--f", "t"]);
        assert_eq!(out.code, 2, "missing --g is a usage error");

        let out = run_vec(&["oddform", "bracket", "x.toml", "--f", "t", "--g", "t", "--jacobi"]);
        assert_eq!(out.code, 2, "--jacobi without --h is a usage error");
    }

    #[test]
    fn missing_file_is_an_input_error() {
        let out = run_vec(&["oddform", "classify", "/nonexistent/scenario.toml"]);
        assert_eq!(out.code, EXIT_FAILURE);
        assert!(out.stdout.is_empty());
        assert!(out.stderr.contains("scenario.toml"));
    }

    #[test]
    fn classify_grants_contact_and_honours_expect() {
        let path = temp_scenario("contact", CONTACT_DARBOUX);
        let path_s = path.to_str().unwrap();

        let out = run_vec(&["oddform", "classify", path_s, "--samples", "8"]);
        assert_eq!(out.code, EXIT_OK, "stderr: {}", out.stderr);
        assert!(out.stdout.contains("contact"));
        assert!(out.stdout.contains("status: ok"));
        assert!(out.stdout.contains("rank[covariant]"));
        assert!(out.stdout.contains("rank[contravariant]"));

        let out = run_vec(&[
            "oddform", "classify", path_s, "--samples", "8", "--expect", "contact",
        ]);
        assert_eq!(out.code, EXIT_OK);

        let out = run_vec(&[
            "oddform", "classify", path_s, "--samples", "8", "--expect", "cosymplectic",
        ]);
        assert_eq!(out.code, EXIT_MISMATCH);
        assert!(out.stdout.contains("status: mismatch"));

        let out = run_vec(&[
            "oddform", "classify", path_s, "--samples", "8", "--expect", "symplectic",
        ]);
        assert_eq!(out.code, EXIT_FAILURE, "unknown labels are input errors");
        assert!(out.stderr.contains("symplectic"));
    }

    #[test]
    fn bracket_applies_the_identity_correction() {
        let path = temp_scenario("copoisson", FLAT_COPOISSON);
        let out = run_vec(&[
            "oddform",
            "bracket",
            path.to_str().unwrap(),
            "--f",
            "t",
            "--g",
            "x1",
            "--samples",
            "6",
            "--format",
            "structured",
        ]);
        assert_eq!(out.code, EXIT_OK, "stderr: {}", out.stderr);
        let report: Report = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(report.samples.len(), 6);
        for row in &report.samples {
            // [t, x1] = x1 on this pair, while {t, x1} = 0.
            let x1 = row.point[1];
            assert!((row.values["[f,g]"] - x1).abs() < 1e-12);
            assert!(row.values["{f,g}"].abs() < 1e-12);
        }
    }

    #[test]
    fn jacobiator_witnesses_the_copoisson_defect() {
        let path = temp_scenario("copoisson-jac", FLAT_COPOISSON);
        let out = run_vec(&[
            "oddform",
            "bracket",
            path.to_str().unwrap(),
            "--f",
            "t",
            "--g",
            "x1",
            "--h",
            "x2",
            "--jacobi",
            "--samples",
            "5",
            "--format",
            "structured",
        ]);
        assert_eq!(out.code, EXIT_OK, "stderr: {}", out.stderr);
        let report: Report = serde_json::from_str(&out.stdout).unwrap();
        let witness = report.residuals["jacobiator max |value|"];
        assert!(
            (witness - 1.0).abs() < 1e-12,
            "jacobiator witness should be exactly 1, got {witness}"
        );
        for row in &report.samples {
            assert!((row.values["jacobiator"].abs() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn curvature_criterion_needs_a_one_form() {
        let path = temp_scenario("copoisson-curv", FLAT_COPOISSON);
        let path_s = path.to_str().unwrap();
        let out = run_vec(&[
            "oddform", "bracket", path_s, "--f", "t", "--g", "x1", "--curvature",
        ]);
        assert_eq!(out.code, EXIT_FAILURE);
        assert!(out.stderr.contains("one-form"));

        // The historical spelling of the flag is accepted as an alias.
        let out = run_vec(&[
            "oddform", "bracket", path_s, "--f", "t", "--g", "x1", "--eq27",
        ]);
        assert_eq!(out.code, EXIT_FAILURE);
        assert!(out.stderr.contains("one-form"));
    }

    #[test]
    fn curvature_criterion_passes_on_contact() {
        let path = temp_scenario("contact-curv", CONTACT_DARBOUX);
        let out = run_vec(&[
            "oddform",
            "bracket",
            path.to_str().unwrap(),
            "--f",
            "t + x1",
            "--g",
            "x1 * x2",
            "--curvature",
            "--samples",
            "6",
            "--format",
            "structured",
        ]);
        assert_eq!(out.code, EXIT_OK, "stderr: {}", out.stderr);
        let report: Report = serde_json::from_str(&out.stdout).unwrap();
        assert!(report.residuals["curvature criterion (f,g)"] <= 1e-9);
        assert!(report.residuals["curvature criterion (random)"] <= 1e-9);
    }

    #[test]
    fn dualize_certifies_axioms_and_roundtrip() {
        let path = temp_scenario("contact-dual", CONTACT_DARBOUX);
        let path_s = path.to_str().unwrap();
        let out = run_vec(&[
            "oddform",
            "dualize",
            path_s,
            "--roundtrip",
            "--samples",
            "5",
            "--format",
            "structured",
        ]);
        assert_eq!(out.code, EXIT_OK, "stderr: {}", out.stderr);
        let report: Report = serde_json::from_str(&out.stdout).unwrap();
        assert!(report.residuals.keys().any(|k| k.starts_with("axiom: ")));
        assert!(report.residuals["roundtrip: dual of dual"] <= 1e-9);
        assert_eq!(report.samples.len(), 5);
        let row = &report.samples[0];
        assert!(row.values.contains_key("E[0]"));
        assert!(row.values.contains_key("Lambda[1][2]"));

        let out = run_vec(&[
            "oddform", "dualize", path_s, "--samples", "5", "--expect", "contact",
        ]);
        assert_eq!(out.code, EXIT_OK, "stderr: {}", out.stderr);
    }

    #[test]
    fn dualize_contravariant_payload_produces_forms() {
        let path = temp_scenario("copoisson-dual", FLAT_COPOISSON);
        let out = run_vec(&[
            "oddform",
            "dualize",
            path.to_str().unwrap(),
            "--roundtrip",
            "--samples",
            "4",
            "--format",
            "structured",
        ]);
        assert_eq!(out.code, EXIT_OK, "stderr: {}", out.stderr);
        let report: Report = serde_json::from_str(&out.stdout).unwrap();
        assert!(report.residuals["roundtrip: dual of dual"] <= 1e-9);
        let row = &report.samples[0];
        assert!(row.values.contains_key("omega[0]"));
        assert!(row.values.contains_key("Omega[1][2]"));
    }

    #[test]
    fn scenario_galilei_flat_verifies() {
        let out = run_vec(&["oddform", "scenario", "galilei", "--samples", "6"]);
        assert_eq!(
            out.code, EXIT_OK,
            "stderr: {}\nstdout: {}",
            out.stderr, out.stdout
        );
        assert!(out.stdout.contains("cosymplectic"));
        assert!(out.stdout.contains("coPoisson"));
        assert!(out.stdout.contains("status: ok"));
    }

    #[test]
    fn scenario_rejects_unknown_model() {
        let out = run_vec(&["oddform", "scenario", "newton"]);
        assert_eq!(out.code, EXIT_FAILURE);
        assert!(out.stderr.contains("newton"));
    }

    #[test]
    fn identical_invocations_render_identical_bytes() {
        let path = temp_scenario("contact-det", CONTACT_DARBOUX);
        let args = [
            "oddform",
            "classify",
            path.to_str().unwrap(),
            "--format",
            "structured",
            "--samples",
            "7",
        ];
        let first = run_vec(&args);
        let second = run_vec(&args);
        assert_eq!(first.code, EXIT_OK);
        assert_eq!(first.stdout, second.stdout);
    }
}
