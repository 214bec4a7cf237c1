mod instance;

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use invform::certificate::{verify_form, FormCertificate, Setting, Symmetry};
use invform::construction::decide_and_construct;
use invform::decision::{decide_infinitesimal_form_with, decide_invariant_form_with, decide_real_with};
use invform::error::Error;
use invform::factor::{FactorOptions, DEFAULT_DEGREE_LIMIT};
use invform::isometry::{level_analysis, orthogonal_decomposition};
use invform::oracle::{find_nondegenerate, solve_form_space, DEFAULT_TRIALS};
use invform::selftest::{run_selftest, SelftestOptions, DEFAULT_CORPUS_SIZE, DEFAULT_SELFTEST_SEED};

use instance::{parse_instance, Instance};

const EXIT_VERIFICATION: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_CAPABILITY: u8 = 3;

#[derive(Parser)]
#[command(name = "invform", version, about = "Invariant bilinear forms of linear maps over Q and F_p")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SymmetryArg {
    Symmetric,
    Skew,
}

impl From<SymmetryArg> for Symmetry {
    fn from(s: SymmetryArg) -> Symmetry {
        match s {
            SymmetryArg::Symmetric => Symmetry::Symmetric,
            SymmetryArg::Skew => Symmetry::Skew,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SettingArg {
    Invariant,
    Infinitesimal,
}

impl From<SettingArg> for Setting {
    fn from(s: SettingArg) -> Setting {
        match s {
            SettingArg::Invariant => Setting::Invariant,
            SettingArg::Infinitesimal => Setting::Infinitesimal,
        }
    }
}

#[derive(Args)]
struct Input {
    /// Instance JSON file; `-` reads standard input.
    file: PathBuf,
    #[arg(long, default_value_t = DEFAULT_DEGREE_LIMIT)]
    degree_limit: usize,
}

#[derive(Args)]
struct FormArgs {
    #[command(flatten)]
    input: Input,
    #[arg(long, value_enum)]
    symmetry: SymmetryArg,
    #[arg(long, value_enum, default_value = "invariant")]
    setting: SettingArg,
}

#[derive(Args)]
struct GramArgs {
    #[command(flatten)]
    input: Input,
    /// Defaults to the instance's `symmetry`, then to whatever the Gram matrix is.
    #[arg(long, value_enum)]
    symmetry: Option<SymmetryArg>,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a non-degenerate form exists.
    Decide(FormArgs),
    /// Decide and, when possible, build a verified witness.
    Construct(FormArgs),
    /// Re-check a (matrix, gram) pair; exits 1 on failure.
    Verify {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        symmetry: Option<SymmetryArg>,
        #[arg(long, value_enum)]
        setting: Option<SettingArg>,
    },
    /// Is the map conjugate to its inverse?
    Real(Input),
    /// Decide and construct an infinitesimally invariant form.
    Infinitesimal {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        symmetry: SymmetryArg,
    },
    /// Orthogonal decomposition of a unipotent-up-to-sign isometry.
    Decompose(GramArgs),
    /// Level of a unipotent isometry against the Witt index of its form.
    Level(GramArgs),
    /// Solve the invariance equations directly and search for a witness.
    Oracle {
        #[command(flatten)]
        input: Input,
        #[arg(long, value_enum)]
        symmetry: SymmetryArg,
        #[arg(long, value_enum, default_value = "invariant")]
        setting: SettingArg,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
    },
    /// Run the random corpus through every component.
    Selftest {
        #[arg(long, default_value_t = DEFAULT_SELFTEST_SEED)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_CORPUS_SIZE)]
        count: usize,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_DEGREE_LIMIT)]
        degree_limit: usize,
    },
}

/// Exit code plus the JSON printed on standard output.
struct Response {
    code: u8,
    body: Value,
}

impl Response {
    fn ok(body: Value) -> Response {
        Response { code: 0, body }
    }
}

fn error_response(e: &Error) -> Response {
    let code = if e.is_capability() {
        EXIT_CAPABILITY
    } else if matches!(e, Error::UnverifiedForm(_)) {
        EXIT_VERIFICATION
    } else {
        EXIT_INPUT
    };
    Response {
        code,
        body: json!({ "error": { "kind": e.kind(), "detail": e.to_string() } }),
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("library types serialize")
}

fn read_input(input: &Input) -> Result<Instance, Error> {
    let text = if input.file.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Error::Parse(format!("stdin: {e}")))?;
        s
    } else {
        std::fs::read_to_string(&input.file).map_err(|e| Error::Parse(format!("{}: {e}", input.file.display())))?
    };
    parse_instance(&text)
}

fn factor_options(input: &Input) -> FactorOptions {
    FactorOptions {
        degree_limit: input.degree_limit,
        ..FactorOptions::default()
    }
}

fn with_instance(inst: &Instance, mut body: Value) -> Value {
    if let Value::Object(map) = &mut body {
        map.insert("field".into(), to_json(&inst.field));
        map.insert("matrix".into(), to_json(&inst.matrix));
    }
    body
}

fn require_gram(inst: &Instance) -> Result<&invform::linalg::Matrix, Error> {
    inst.gram.as_ref().ok_or_else(|| Error::Parse("missing gram".into()))
}

/// Flag, then instance field, then the shape of the Gram matrix.
fn resolve_symmetry(flag: Option<SymmetryArg>, inst: &Instance) -> Result<Symmetry, Error> {
    if let Some(s) = flag.map(Symmetry::from).or(inst.symmetry) {
        return Ok(s);
    }
    let b = require_gram(inst)?;
    let bt = b.transpose();
    if &bt == b {
        Ok(Symmetry::Symmetric)
    } else if bt == -b {
        Ok(Symmetry::Skew)
    } else {
        Err(Error::UnverifiedForm("gram is neither symmetric nor skew".into()))
    }
}

fn certificate(inst: &Instance, flag: Option<SymmetryArg>) -> Result<FormCertificate, Error> {
    let symmetry = resolve_symmetry(flag, inst)?;
    FormCertificate::new(&inst.matrix, require_gram(inst)?.clone(), symmetry, Setting::Invariant, Vec::new())
}

fn run(command: Command) -> Result<Response, Error> {
    match command {
        Command::Decide(args) => {
            let inst = read_input(&args.input)?;
            let opts = factor_options(&args.input);
            let symmetry = args.symmetry.into();
            let report = match Setting::from(args.setting) {
                Setting::Invariant => decide_invariant_form_with(&inst.matrix, symmetry, &opts)?,
                Setting::Infinitesimal => decide_infinitesimal_form_with(&inst.matrix, symmetry, &opts)?,
            };
            Ok(Response::ok(to_json(&report)))
        }
        Command::Construct(args) => {
            let inst = read_input(&args.input)?;
            let report = decide_and_construct(&inst.matrix, args.symmetry.into(), args.setting.into(), &factor_options(&args.input))?;
            Ok(Response::ok(with_instance(&inst, to_json(&report))))
        }
        Command::Infinitesimal { input, symmetry } => {
            let inst = read_input(&input)?;
            let report = decide_and_construct(&inst.matrix, symmetry.into(), Setting::Infinitesimal, &factor_options(&input))?;
            Ok(Response::ok(with_instance(&inst, to_json(&report))))
        }
        Command::Verify {
            input,
            symmetry,
            setting,
        } => {
            let inst = read_input(&input)?;
            let symmetry = resolve_symmetry(symmetry, &inst)?;
            let setting = setting.map(Setting::from).or(inst.setting).unwrap_or(Setting::Invariant);
            let checks = verify_form(&inst.matrix, require_gram(&inst)?, symmetry, setting)?;
            let verified = checks.all();
            Ok(Response {
                code: if verified { 0 } else { EXIT_VERIFICATION },
                body: json!({
                    "verified": verified,
                    "symmetry": symmetry,
                    "setting": setting,
                    "checks": to_json(&checks),
                }),
            })
        }
        Command::Real(input) => {
            let inst = read_input(&input)?;
            Ok(Response::ok(to_json(&decide_real_with(&inst.matrix, &factor_options(&input))?)))
        }
        Command::Decompose(args) => {
            let inst = read_input(&args.input)?;
            let cert = certificate(&inst, args.symmetry)?;
            let report = orthogonal_decomposition(&inst.matrix, &cert)?;
            let checks = report.check(&inst.matrix, cert.gram(), cert.symmetry());
            let mut body = to_json(&report);
            body["checks"] = to_json(&checks);
            Ok(Response {
                code: if checks.all() { 0 } else { EXIT_VERIFICATION },
                body,
            })
        }
        Command::Level(args) => {
            let inst = read_input(&args.input)?;
            let cert = certificate(&inst, args.symmetry)?;
            Ok(Response::ok(to_json(&level_analysis(&inst.matrix, &cert)?)))
        }
        Command::Oracle {
            input,
            symmetry,
            setting,
            seed,
            trials,
        } => {
            let inst = read_input(&input)?;
            let space = solve_form_space(&inst.matrix, symmetry.into(), setting.into())?;
            let witness = find_nondegenerate(&space, seed, trials);
            Ok(Response::ok(json!({
                "dimension": space.dimension,
                "basis": to_json(&space.basis),
                "symmetry": space.symmetry,
                "setting": space.setting,
                "exists": witness.is_some(),
                "witness": to_json(&witness),
                "seed": seed,
                "trials": trials,
            })))
        }
        Command::Selftest {
            seed,
            count,
            jobs,
            trials,
            degree_limit,
        } => {
            let report = run_selftest(&SelftestOptions {
                seed,
                count,
                jobs,
                trials,
                degree_limit,
            });
            let mut body = to_json(&report);
            body["passed"] = json!(report.passed());
            Ok(Response {
                code: if report.passed() { 0 } else { EXIT_VERIFICATION },
                body,
            })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version.
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let err = Error::Parse(e.to_string().trim().to_string());
            emit(&error_response(&err).body);
            return ExitCode::from(EXIT_INPUT);
        }
    };
    let response = run(cli.command).unwrap_or_else(|e| error_response(&e));
    emit(&response.body);
    ExitCode::from(response.code)
}

/// A closed pipe on stdout is not worth a panic.
fn emit(body: &Value) {
    let text = serde_json::to_string_pretty(body).expect("JSON value serializes");
    let _ = writeln!(std::io::stdout().lock(), "{text}");
}
