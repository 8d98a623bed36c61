use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use spectral_fermion::bases::Subspace;
use spectral_fermion::ensemble::{
    random_dirac, rotated_structures, run_ensemble, sample_rng, standard_structures, EnsembleConfig,
};
use spectral_fermion::integrals::{self, IntegralResult, KERNEL_TOL};
use spectral_fermion::io::{fmt_f64, triple_from_json, triple_to_json_pretty, write_csv, write_jsonl};
use spectral_fermion::triple::validate;
use spectral_fermion::{Complex64, Error, KoDimension, SpectralTriple, TAU_UNIT};

/// Relative gap above which `double` reports a mismatch.
const DOUBLE_TOL: f64 = 1e-6;

#[derive(Parser)]
#[command(name = "spectral-fermion", version, about = "Fermion integrals of finite real spectral triples")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every defining relation of a triple file.
    Validate { path: PathBuf },
    /// Evaluate one of the fermion integrals.
    Integrate {
        path: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        json: bool,
    },
    /// Double an s = 4 triple with Majorana mass μ and compare F₊ with its closed form.
    Double {
        path: PathBuf,
        /// μ as `re,im`.
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        mu: Complex64,
        #[arg(long)]
        json: bool,
    },
    /// Sample random Dirac operators for the reference structures.
    Ensemble {
        #[arg(long)]
        s: i64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        mu: Option<Complex64>,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        /// Dimension of H₊ for even s (defaults to n/2).
        #[arg(long)]
        plus_dim: Option<usize>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        out: Format,
        /// Write here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Write a random valid triple file.
    Gen {
        #[arg(long)]
        s: i64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
        #[arg(long)]
        plus_dim: Option<usize>,
        /// Conjugate Γ and J by a random unitary instead of using the reference form.
        #[arg(long)]
        rotated: bool,
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Complex,
    Real,
    #[value(name = "chiral+")]
    ChiralPlus,
    #[value(name = "chiral-")]
    ChiralMinus,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Jsonl,
}

/// A failed command: exit 1 for domain errors, 2 for I/O and parse errors.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn domain(message: impl Into<String>) -> Self {
        Failure { code: 1, message: message.into() }
    }

    fn io(message: impl Into<String>) -> Self {
        Failure { code: 2, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::domain(e.to_string())
    }
}

fn parse_complex(text: &str) -> Result<Complex64, String> {
    let (re, im) = text.split_once(',').ok_or_else(|| format!("expected re,im, got {text:?}"))?;
    let re: f64 = re.trim().parse().map_err(|e| format!("real part: {e}"))?;
    let im: f64 = im.trim().parse().map_err(|e| format!("imaginary part: {e}"))?;
    if !(re.is_finite() && im.is_finite()) {
        return Err("μ must be finite".into());
    }
    Ok(Complex64::new(re, im))
}

fn load(path: &Path) -> Result<SpectralTriple, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::io(format!("{}: {e}", path.display())))?;
    triple_from_json(&text).map_err(|e| Failure::io(format!("{}: {e}", path.display())))
}

fn emit(text: &str, output: Option<&Path>) -> Result<(), Failure> {
    match output {
        Some(p) => fs::write(p, text).map_err(|e| Failure::io(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn ko(s: i64) -> Result<KoDimension, Failure> {
    Ok(KoDimension::new(s)?)
}

fn pair(z: Complex64) -> String {
    format!("({}, {})", fmt_f64(z.re), fmt_f64(z.im))
}

fn cmd_validate(path: &Path) -> Result<(), Failure> {
    let t = load(path)?;
    let report = validate(&t, TAU_UNIT);
    print!("{report}");
    if report.is_valid() {
        Ok(())
    } else {
        Err(Failure::domain(format!("{} relation(s) violated", report.violations.len())))
    }
}

fn cmd_integrate(path: &Path, kind: Kind, as_json: bool) -> Result<(), Failure> {
    let t = load(path)?;
    let mut note = None;
    let (name, result): (&str, IntegralResult) = match kind {
        Kind::Complex => ("complex", integrals::complex_integral(&t)),
        Kind::Real => {
            if !t.signs().action_is_skew() {
                note = Some("εε′≠−1");
            }
            ("real", integrals::real_integral(&t)?)
        }
        Kind::ChiralPlus => ("chiral+", integrals::chiral_integral(&t, Subspace::Plus)?),
        Kind::ChiralMinus => ("chiral-", integrals::chiral_integral(&t, Subspace::Minus)?),
    };
    let v = result.value;
    if as_json {
        let record = json!({
            "kind": name,
            "s": t.s().value(),
            "re": v.re,
            "im": v.im,
            "ambiguity": result.ambiguity.as_str(),
            "basis_kind": result.basis_kind.as_str(),
            "note": note,
        });
        println!("{record}");
    } else {
        println!("kind: {name}");
        println!("s: {}", t.s().value());
        println!("value: {}", pair(v));
        println!("ambiguity: {}", result.ambiguity.as_str());
        println!("basis: {}", result.basis_kind.as_str());
        if let Some(note) = note {
            println!("note: {note}");
        }
    }
    Ok(())
}

fn cmd_double(path: &Path, mu: Complex64, as_json: bool) -> Result<(), Failure> {
    let t = load(path)?;
    if mu == Complex64::new(0.0, 0.0) {
        return Err(Error::ZeroMu.into());
    }
    let dt = integrals::double_triple(&t, mu)?;
    let direct = integrals::doubled_chiral_integral(&dt)?.value;
    let closed = integrals::closed_form_fchiral(&dt)?;
    let index = integrals::index_of(&t, KERNEL_TOL)?;
    let scale = direct.norm().max(closed.norm());
    let diff = if scale == 0.0 { 0.0 } else { (direct - closed).norm() / scale };
    if as_json {
        let record = json!({
            "mu": [mu.re, mu.im],
            "index": index,
            "direct": [direct.re, direct.im],
            "closed_form": [closed.re, closed.im],
            "relative_difference": diff,
        });
        println!("{record}");
    } else {
        println!("mu: {}", pair(mu));
        println!("index: {index}");
        println!("direct: {}", pair(direct));
        println!("closed form: {}", pair(closed));
        println!("relative difference: {}", fmt_f64(diff));
    }
    if diff > DOUBLE_TOL {
        return Err(Failure::domain(format!("relative difference {diff:e} exceeds {DOUBLE_TOL:e}")));
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_ensemble(
    s: i64,
    n: usize,
    count: usize,
    seed: u64,
    mu: Option<Complex64>,
    scale: f64,
    plus_dim: Option<usize>,
    out: Format,
    output: Option<&Path>,
) -> Result<(), Failure> {
    let cfg = EnsembleConfig { s: ko(s)?, n, count, seed, mu, scale, plus_dim };
    let records = run_ensemble(&cfg)?;
    let text = match out {
        Format::Csv => write_csv(&records),
        Format::Jsonl => write_jsonl(&records),
    };
    emit(&text, output)
}

fn cmd_gen(
    s: i64,
    n: usize,
    seed: u64,
    scale: f64,
    plus_dim: Option<usize>,
    rotated: bool,
    output: Option<&Path>,
) -> Result<(), Failure> {
    let s = ko(s)?;
    if !(scale.is_finite() && scale > 0.0) {
        return Err(Failure::domain("scale must be positive and finite"));
    }
    // sample 0 of an ensemble with the same seed, unless rotated
    let mut rng = sample_rng(seed, 0);
    let (g, j) = if rotated {
        rotated_structures(s, n, plus_dim, &mut rng)?
    } else {
        standard_structures(s, n, plus_dim)?
    };
    let d = random_dirac(s, &g, &j, scale, &mut rng);
    let t = SpectralTriple::new(s, d, g, j)?;
    let mut text = triple_to_json_pretty(&t);
    text.push('\n');
    emit(&text, output)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Validate { path } => cmd_validate(&path),
        Command::Integrate { path, kind, json } => cmd_integrate(&path, kind, json),
        Command::Double { path, mu, json } => cmd_double(&path, mu, json),
        Command::Ensemble { s, n, count, seed, mu, scale, plus_dim, out, output } => {
            cmd_ensemble(s, n, count, seed, mu, scale, plus_dim, out, output.as_deref())
        }
        Command::Gen { s, n, seed, scale, plus_dim, rotated, output } => {
            cmd_gen(s, n, seed, scale, plus_dim, rotated, output.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
