//! Command surface behind the `quasiorth` binary.
//!
//! Every command builds a [`CommandReport`] of named verdicts and JSON
//! artifacts. The exit code is 0 when every boolean verdict is true, 1 when
//! some boolean verdict is false and 2 on usage or input errors.
//!
//! Subalgebra input files hold one of
//!
//! - `{"generators": [M, ...]}` with matrices `M = {"dim", "re", "im"}`,
//! - `{"words": ["s11", "s22"]}`, generated by two-qubit Pauli words,
//! - a serialized subalgebra `{"ambient_dim", "basis", "kind"}`.
//!
//! Triplet files hold a list of three entries, each a matrix or a Pauli label.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use crate::constructions::{car_model, quantum_fourier, weyl_subalgebra, PhaseVector};
use crate::entropy::{appendix_probe, estimate, upper_bound, EstimateOptions, ProbeOptions};
use crate::error::{Error, Result};
use crate::four_level::{
    bell_factorize, classify_triplet, complementary_family_search, enumerate_pauli_subalgebras,
    reference_families, DecompositionFamily, TripletKind,
};
use crate::matrix::{ComplexMatrix, PauliWord};
use crate::subalgebra::{complementarity_report, transition_is_hadamard, AlgebraKind, Subalgebra};

/// Environment variable capping the worker count.
pub const THREADS_ENV: &str = "QUASIORTH_THREADS";

#[derive(Parser, Debug)]
#[command(name = "quasiorth", version, about = "Complementary subalgebras of matrix algebras")]
struct Cli {
    /// Emit the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    /// Leave `elapsed_ms` out of the report.
    #[arg(long, global = true)]
    no_timing: bool,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fourier basis of C^n and its Hadamard check.
    Mub {
        #[arg(long)]
        dim: usize,
    },
    /// Subalgebra generated by pi(u), pi(v) in M_p (x) M_p.
    Weyl {
        #[arg(long)]
        p: u64,
        /// Four comma-separated components k1,l1,k2,l2.
        #[arg(long, value_delimiter = ',', default_value = "1,0,1,0")]
        u: Vec<u64>,
        #[arg(long, value_delimiter = ',', default_value = "0,1,0,1")]
        v: Vec<u64>,
    },
    /// Complementarity report of two subalgebras.
    Check {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
    },
    /// Lower bound on H(A|B) with the -log d bound and the gap.
    Entropy {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        b: PathBuf,
        #[arg(long, default_value_t = 8)]
        restarts: usize,
        #[arg(long, default_value_t = 500)]
        max_iters: usize,
        /// Terms per random decomposition (default n^2).
        #[arg(long)]
        terms: Option<usize>,
    },
    /// Split an M-triplet orthogonal to a qubit factor and its commutant.
    BellFactorize {
        #[arg(long)]
        a: PathBuf,
        #[arg(long)]
        triplet: PathBuf,
    },
    /// Subalgebras of M_4 spanned by Pauli triples.
    Catalog,
    /// Complementary decompositions of M_4 into five Pauli subalgebras.
    Families,
    /// Test of the conjectured closed form for two MASAs of M_2.
    Appendix {
        #[arg(long, allow_hyphen_values = true)]
        beta: f64,
    },
    /// CAR model checks.
    Car,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommandEcho {
    pub name: String,
    pub args: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CommandReport {
    pub command: CommandEcho,
    pub verdicts: BTreeMap<String, Value>,
    pub artifacts: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub elapsed_ms: Option<f64>,
    pub seed: u64,
}

impl CommandReport {
    /// 0 if every boolean verdict holds, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        let failed = self.verdicts.values().any(|v| v.as_bool() == Some(false));
        i32::from(failed)
    }

    pub fn to_table(&self) -> String {
        let mut out = format!("quasiorth {}\n", self.command.args.join(" "));
        out.push_str(&format!("seed: {}\n", self.seed));
        let width = self.verdicts.keys().map(String::len).max().unwrap_or(0);
        for (k, v) in &self.verdicts {
            out.push_str(&format!("  {k:<width$}  {v}\n"));
        }
        if !self.artifacts.is_empty() {
            let keys: Vec<&str> = self.artifacts.keys().map(String::as_str).collect();
            out.push_str(&format!("artifacts: {} (use --json)\n", keys.join(", ")));
        }
        if let Some(ms) = self.elapsed_ms {
            out.push_str(&format!("elapsed: {ms:.1} ms\n"));
        }
        out
    }
}

/// Result of [`run`]: the report (absent on usage errors), the exit code and
/// the text destined for stdout and stderr.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Option<CommandReport>,
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Parses `argv` (including the program name) and executes the command.
pub fn run<I, T>(argv: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<String>,
{
    let argv: Vec<String> = argv.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    Outcome { report: None, code: 0, stdout: text, stderr: String::new() }
                }
                _ => Outcome { report: None, code: 2, stdout: String::new(), stderr: text },
            };
        }
    };
    let start = Instant::now();
    let name = argv.get(1).cloned().unwrap_or_default();
    let mut report = CommandReport {
        command: CommandEcho { name: command_name(&cli.command).into(), args: argv[1..].to_vec() },
        verdicts: BTreeMap::new(),
        artifacts: BTreeMap::new(),
        elapsed_ms: None,
        seed: cli.seed,
    };
    if let Err(e) = execute(&cli, &mut report) {
        return Outcome {
            report: None,
            code: 2,
            stdout: String::new(),
            stderr: format!("error: {name}: {e}\n"),
        };
    }
    if !cli.no_timing {
        report.elapsed_ms = Some(start.elapsed().as_secs_f64() * 1e3);
    }
    let stdout = if cli.json {
        let mut s = serde_json::to_string_pretty(&report).expect("report serializes");
        s.push('\n');
        s
    } else {
        report.to_table()
    };
    let code = report.exit_code();
    Outcome { report: Some(report), code, stdout, stderr: String::new() }
}

/// Builds the global worker pool, honoring [`THREADS_ENV`].
pub fn configure_threads() {
    if let Some(n) = std::env::var(THREADS_ENV).ok().and_then(|s| s.parse::<usize>().ok()) {
        // an already-initialized pool keeps its size
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Mub { .. } => "mub",
        Command::Weyl { .. } => "weyl",
        Command::Check { .. } => "check",
        Command::Entropy { .. } => "entropy",
        Command::BellFactorize { .. } => "bell-factorize",
        Command::Catalog => "catalog",
        Command::Families => "families",
        Command::Appendix { .. } => "appendix",
        Command::Car => "car",
    }
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable")
}

fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    Ok(serde_json::from_str(&text)?)
}

fn parse_matrix_or_word(v: &Value) -> Result<ComplexMatrix> {
    match v {
        Value::String(s) => Ok(s.parse::<PauliWord>()?.matrix()),
        _ => Ok(serde_json::from_value(v.clone())?),
    }
}

/// Reads a subalgebra in any of the formats listed in the module docs.
pub fn load_subalgebra(path: &Path) -> Result<Subalgebra> {
    subalgebra_from_json(&read_json(path)?)
}

pub fn subalgebra_from_json(v: &Value) -> Result<Subalgebra> {
    let gens: Vec<ComplexMatrix> = if let Some(g) = v.get("generators") {
        serde_json::from_value(g.clone())?
    } else if let Some(w) = v.get("words") {
        let labels: Vec<String> = serde_json::from_value(w.clone())?;
        labels.iter().map(|l| Ok(l.parse::<PauliWord>()?.matrix())).collect::<Result<_>>()?
    } else if v.get("basis").is_some() {
        return Ok(serde_json::from_value(v.clone())?);
    } else {
        return Err(Error::Parse(
            "expected an object with \"generators\", \"words\" or \"basis\"".into(),
        ));
    };
    let n = gens.first().map(ComplexMatrix::dim).ok_or_else(|| {
        Error::Parse("at least one generator is required".into())
    })?;
    Subalgebra::from_generators(n, &gens)
}

pub fn load_triplet(path: &Path) -> Result<[ComplexMatrix; 3]> {
    let v = read_json(path)?;
    let items = v
        .as_array()
        .filter(|a| a.len() == 3)
        .ok_or_else(|| Error::Parse("a triplet file holds a list of three entries".into()))?;
    Ok([
        parse_matrix_or_word(&items[0])?,
        parse_matrix_or_word(&items[1])?,
        parse_matrix_or_word(&items[2])?,
    ])
}

fn put(map: &mut BTreeMap<String, Value>, key: &str, v: impl Serialize) {
    map.insert(key.to_string(), to_value(&v));
}

fn phase_vector(c: &[u64], p: u64, flag: &str) -> Result<PhaseVector> {
    match c {
        &[k1, l1, k2, l2] => Ok(PhaseVector::new(k1, l1, k2, l2, p)),
        _ => Err(Error::InvalidParameter(format!("--{flag} needs four components"))),
    }
}

fn execute(cli: &Cli, r: &mut CommandReport) -> Result<()> {
    let (v, a) = (&mut r.verdicts, &mut r.artifacts);
    match &cli.command {
        Command::Mub { dim } => {
            if *dim == 0 {
                return Err(Error::InvalidParameter("--dim must be positive".into()));
            }
            let f = quantum_fourier(*dim);
            let check = transition_is_hadamard(&ComplexMatrix::identity(*dim), &f)?;
            let masas = complementarity_report(
                &Subalgebra::diagonal_masa(*dim),
                &Subalgebra::masa_of_basis(&f)?,
            )?;
            put(v, "hadamard", check.holds);
            put(v, "hadamard_residual", check.residual);
            put(v, "masas_complementary", masas.verdict);
            put(a, "fourier", &f);
            put(a, "report", &masas);
        }
        Command::Weyl { p, u, v: vv } => {
            let (u, w) = (phase_vector(u, *p, "u")?, phase_vector(vv, *p, "v")?);
            let alg = weyl_subalgebra(&u, &w, *p)?;
            let n = *p as usize;
            let left = complementarity_report(&alg, &Subalgebra::left_factor(n, n))?;
            let right = complementarity_report(&alg, &Subalgebra::right_factor(n, n))?;
            put(v, "factor", alg.kind() == AlgebraKind::Factor && alg.dim() == n * n);
            put(v, "complementary_to_left", left.verdict);
            put(v, "complementary_to_right", right.verdict);
            put(a, "u", u);
            put(a, "v", w);
            put(a, "dim", alg.dim());
            put(a, "left_report", &left);
            put(a, "right_report", &right);
        }
        Command::Check { a: fa, b: fb } => {
            let (x, y) = (load_subalgebra(fa)?, load_subalgebra(fb)?);
            let rep = complementarity_report(&x, &y)?;
            put(v, "complementary", rep.verdict);
            put(v, "conditions_agree", rep.conditions_agree());
            put(a, "report", &rep);
        }
        Command::Entropy { a: fa, b: fb, restarts, max_iters, terms } => {
            let (x, y) = (load_subalgebra(fa)?, load_subalgebra(fb)?);
            let opts = EstimateOptions {
                restarts: *restarts,
                max_iters: *max_iters,
                seed: cli.seed,
                terms: *terms,
                ..Default::default()
            };
            let est = estimate(&x, &y, &opts)?;
            put(v, "value_nats", est.value);
            put(v, "value_bits", est.value_bits());
            if let Some(bound) = est.bound {
                put(v, "within_bound", est.value <= bound + 1e-8);
            } else if let Err(e) = upper_bound(&x) {
                put(a, "bound_unavailable", e.to_string());
            }
            put(a, "possible_inclusion", est.possible_inclusion);
            put(a, "estimate", &est);
        }
        Command::BellFactorize { a: fa, triplet } => {
            let alg = load_subalgebra(fa)?;
            let [x, y, z] = load_triplet(triplet)?;
            let t = classify_triplet(&x, &y, &z)?;
            let f = bell_factorize(&alg, &t)?;
            put(v, "round_trip", f.residual < 1e-9);
            put(v, "residual", f.residual);
            put(v, "a_is_f_triplet", f.a.kind == TripletKind::F);
            put(v, "b_is_f_triplet", f.b.kind == TripletKind::F);
            put(a, "factorization", &f);
        }
        Command::Catalog => {
            let cat = enumerate_pauli_subalgebras();
            put(v, "total", cat.len());
            put(v, "masas", cat.masas.len());
            put(v, "factors", cat.factors.len());
            put(
                v,
                "masas_abelian",
                cat.masas.iter().all(|t| t.subalgebra().kind() == AlgebraKind::Abelian),
            );
            put(
                v,
                "factors_are_factors",
                cat.factors.iter().all(|t| t.subalgebra().kind() == AlgebraKind::Factor),
            );
            put(a, "catalog", &cat);
        }
        Command::Families => {
            let search = complementary_family_search(5)?;
            let mut found_reference = true;
            for (ell, labels) in reference_families() {
                let fam = DecompositionFamily::from_labels(&labels)?;
                let mut sets = fam.index_sets();
                sets.sort();
                found_reference &= fam.ell == ell
                    && search.families.iter().any(|f| f.index_sets() == sets);
            }
            let ell4_rest_masa = search
                .families
                .iter()
                .filter(|f| f.ell == 4)
                .all(|f| f.kinds.iter().filter(|&&k| k == TripletKind::M).count() == 1);
            put(v, "families", search.families.len());
            put(v, "ell_values", &search.ell_values);
            put(v, "ell_values_are_0_2_4", search.ell_values.iter().copied().eq([0, 2, 4]));
            put(v, "all_pairwise_complementary", search.families.iter().all(|f| f.pairwise_ok));
            put(v, "reference_families_found", found_reference);
            put(v, "ell4_remaining_member_is_masa", ell4_rest_masa);
            put(a, "families", &search.families);
        }
        Command::Appendix { beta } => {
            if !beta.is_finite() || *beta <= 0.0 || *beta >= PI {
                return Err(Error::InvalidParameter("--beta must lie in (0, pi)".into()));
            }
            let probe = appendix_probe(*beta, &ProbeOptions::default());
            put(v, "refuted", probe.refuted);
            put(v, "f0_equals_c", (probe.f_at_zero - probe.c).abs() < 1e-9);
            put(
                v,
                "derivative_matches_analytic",
                (probe.f_prime_0 - probe.analytic_f_prime_0).abs() < 1e-5,
            );
            put(v, "margin", probe.margin);
            put(a, "probe", &probe);
        }
        Command::Car => {
            let car = car_model();
            let check = car.verify()?;
            put(v, "car_relations", check.car_holds);
            put(v, "modes_complementary", check.modes_complementary);
            put(v, "bell_complementary_to_mode1", check.bell_complementary_to_mode1);
            put(v, "bell_complementary_to_mode2", check.bell_complementary_to_mode2);
            put(v, "parity_fixes_bell", check.parity_fixes_bell);
            put(a, "checks", check);
            put(a, "a1", &car.a1);
            put(a, "a2", &car.a2);
            put(a, "even_bases", car.even_bases);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    fn argv(s: &str) -> Vec<String> {
        std::iter::once("quasiorth").chain(s.split_whitespace()).map(String::from).collect()
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run(argv("frobnicate")).code, 2);
        assert_eq!(run(argv("mub")).code, 2);
        assert_eq!(run(argv("mub --dim 0")).code, 2);
        assert_eq!(run(argv("check --a /nonexistent.json --b /nonexistent.json")).code, 2);
        assert_eq!(run(argv("weyl --p 4")).code, 2);
        assert_eq!(run(argv("weyl --p 3 --u 1,0")).code, 2);
    }

    #[test]
    fn help_exits_0() {
        let out = run(argv("--help"));
        assert_eq!(out.code, 0);
        assert!(out.stdout.contains("families"));
    }

    #[test]
    fn mub_and_car() {
        let out = run(argv("mub --dim 5 --json --no-timing"));
        assert_eq!(out.code, 0, "{}", out.stdout);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["verdicts"]["hadamard"], true);
        assert_eq!(v["seed"], 0);
        assert!(v.get("elapsed_ms").is_none());
        assert_eq!(run(argv("car")).code, 0);
    }

    #[test]
    fn appendix_command() {
        let out = run(argv("appendix --beta 0.7853981634 --json"));
        assert_eq!(out.code, 0);
        let v: Value = serde_json::from_str(&out.stdout).unwrap();
        assert_eq!(v["verdicts"]["refuted"], true);
        assert!(v["verdicts"]["margin"].as_f64().unwrap() > 0.0);
        assert!(v["elapsed_ms"].is_f64());
        assert_eq!(run(argv("appendix --beta 1.5707963267948966")).code, 1);
    }

    #[test]
    fn subalgebra_formats() {
        let by_words = subalgebra_from_json(&json!({"words": ["s11", "s22"]})).unwrap();
        assert_eq!(by_words.dim(), 4);
        let serialized = to_value(&by_words);
        assert!(subalgebra_from_json(&serialized).unwrap().same_span(&by_words));
        let diag = ComplexMatrix::diagonal(&[crate::C64::new(1.0, 0.0), crate::C64::new(-1.0, 0.0)]);
        let by_gens = subalgebra_from_json(&json!({"generators": [to_value(&diag)]})).unwrap();
        assert!(by_gens.same_span(&Subalgebra::diagonal_masa(2)));
        assert!(subalgebra_from_json(&json!({"nothing": 1})).is_err());
    }
}
