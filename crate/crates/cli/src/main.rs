use std::fs;
use std::io::{self, IsTerminal, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use ostr_core::bisim::{run_bisim, BisimConfig, BisimReport, Counterexample};
use ostr_core::engine::{rewrite_trace, ClosureConfig, MsTheory, OsTheory, Strategy, Theory, Trace};
use ostr_core::poset::TieBreak;
use ostr_core::specfmt::{parse_ground, parse_ms, parse_os, print_ms, SpecError};
use ostr_core::terms::{MSAlgebra, OSAlgebra, Sort};
use ostr_core::translate::{translate_algebra_with, TranslateError};
use ostr_core::validity::validate;

#[derive(Parser)]
#[command(name = "ostr", version, about = "Translate order-sorted algebras into many-sorted ones and check the result")]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,

    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    JsonLines,
}

#[derive(Clone, Copy, ValueEnum)]
enum Tie {
    Lex,
    Revlex,
}

impl From<Tie> for TieBreak {
    fn from(t: Tie) -> Self {
        match t {
            Tie::Lex => TieBreak::Lexicographic,
            Tie::Revlex => TieBreak::ReverseLexicographic,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    LeftmostInnermost,
    LeftmostOutermost,
    ExhaustiveBreadth,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::LeftmostInnermost => Strategy::LeftmostInnermost,
            StrategyArg::LeftmostOutermost => Strategy::LeftmostOutermost,
            StrategyArg::ExhaustiveBreadth => Strategy::ExhaustiveBreadth,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Classify an order-sorted algebra.
    Check { file: PathBuf },
    /// Translate an order-sorted algebra into a many-sorted one.
    Translate {
        file: PathBuf,
        /// Write the many-sorted spec here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Tie::Lex)]
        tie_break: Tie,
    },
    /// List the subsort paths between two sorts, marking the canonical one.
    Paths {
        file: PathBuf,
        #[arg(long)]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, value_enum, default_value_t = Tie::Lex)]
        tie_break: Tie,
    },
    /// Rewrite a ground term; `.msa` files use the many-sorted engine.
    Rewrite {
        file: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        term: String,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long, value_enum, default_value_t = StrategyArg::LeftmostInnermost)]
        strategy: StrategyArg,
        #[arg(long, default_value_t = 5)]
        eclass_depth: usize,
        #[arg(long, default_value_t = 10_000)]
        eclass_max: usize,
    },
    /// Check that the algebra and its translation simulate each other.
    Bisim {
        file: PathBuf,
        #[arg(long, default_value_t = 3)]
        depth: usize,
        #[arg(long, default_value_t = 5)]
        eclass_depth: usize,
        #[arg(long, default_value_t = 10_000)]
        eclass_max: usize,
        /// Cap on enumerated terms per direction; larger levels are sampled.
        #[arg(long, default_value_t = 2_000)]
        max_terms: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

enum Failure {
    /// Exit 1: the input is fine but a check did not pass.
    Check,
    /// Exit 2: bad input.
    Input(String),
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Input(e.to_string())
    }
}

struct Out {
    format: Format,
    color: bool,
    stdout: io::StdoutLock<'static>,
}

impl Out {
    fn line(&mut self, text: impl AsRef<str>) -> io::Result<()> {
        writeln!(self.stdout, "{}", text.as_ref())
    }

    fn record(&mut self, kind: &str, mut fields: Value) -> io::Result<()> {
        let obj = fields.as_object_mut().expect("records are objects");
        obj.insert("schema".into(), json!(1));
        obj.insert("kind".into(), json!(kind));
        writeln!(self.stdout, "{fields}")
    }

    fn verdict(&self, ok: bool) -> String {
        let (word, code) = if ok { ("yes", "32") } else { ("no", "31") };
        if self.color {
            format!("\x1b[{code}m{word}\x1b[0m")
        } else {
            word.to_string()
        }
    }

    fn json(&self) -> bool {
        self.format == Format::JsonLines
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn spec_error(path: &Path, e: SpecError) -> Failure {
    Failure::Input(format!("{}:{e}", path.display()))
}

fn load_os(path: &Path) -> Result<OSAlgebra, Failure> {
    parse_os(&read(path)?).map_err(|e| spec_error(path, e))
}

fn load_ms(path: &Path) -> Result<MSAlgebra, Failure> {
    parse_ms(&read(path)?).map_err(|e| spec_error(path, e))
}

fn translate_failure(e: TranslateError) -> Result<(), Failure> {
    if let TranslateError::NotStrictlySensible(violations) = &e {
        for v in violations {
            eprintln!("{v}");
        }
    }
    eprintln!("error: {e}");
    Err(Failure::Check)
}

fn check(out: &mut Out, file: &Path) -> Result<(), Failure> {
    let alg = load_os(file)?;
    let r = validate(&alg);
    let rows = [
        ("sensible", r.sensible),
        ("strong sensible", r.strong_sensible),
        ("maximal argument-bounding", r.maximal_argument_bounding),
        ("strictly sensible", r.strictly_sensible),
        ("unique tops", r.unique_tops),
        ("rules sort-decreasing", r.rules_sort_decreasing),
        ("equations sort-equal", r.equations_sort_equal),
    ];
    if out.json() {
        let mut fields = serde_json::Map::new();
        fields.insert("algebra".into(), json!(alg.name));
        for (name, ok) in rows {
            fields.insert(name.replace([' ', '-'], "_"), json!(ok));
        }
        fields.insert("translatable".into(), json!(r.is_translatable()));
        out.record("check", Value::Object(fields))?;
        for v in &r.violations {
            out.record("violation", json!({"violation": v.kind.to_string(), "message": v.message}))?;
        }
    } else {
        for (name, ok) in rows {
            let v = out.verdict(ok);
            out.line(format!("{name}: {v}"))?;
        }
        for v in &r.violations {
            out.line(format!("  {v}"))?;
        }
    }
    if r.is_translatable() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn translate(out: &mut Out, file: &Path, output: Option<&Path>, tie: TieBreak) -> Result<(), Failure> {
    let alg = load_os(file)?;
    let (ms, _) = match translate_algebra_with(&alg, tie) {
        Ok(x) => x,
        Err(e) => return translate_failure(e),
    };
    let text = print_ms(&ms);
    match output {
        Some(path) => {
            fs::write(path, &text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            if out.json() {
                out.record(
                    "translate",
                    json!({
                        "algebra": ms.name,
                        "output": path.display().to_string(),
                        "operators": ms.signature.operators().len(),
                        "casts": ms.signature.casts().count(),
                        "equations": ms.equations.len(),
                        "core_equations": ms.core_equations.len(),
                        "rules": ms.rules.len(),
                    }),
                )?;
            }
        }
        None if out.json() => {
            out.record("translate", json!({"algebra": ms.name, "spec": text}))?;
        }
        None => write!(out.stdout, "{text}")?,
    }
    Ok(())
}

fn paths(out: &mut Out, file: &Path, from: &str, to: &str, tie: TieBreak) -> Result<(), Failure> {
    let alg = load_os(file)?;
    let poset = alg.signature.poset();
    let (a, b) = (Sort::new(from), Sort::new(to));
    let all = poset.enumerate_paths(&a, &b).map_err(|e| Failure::Input(e.to_string()))?;
    let canonical = poset.canonical_path(&a, &b, tie).map_err(|e| Failure::Input(e.to_string()))?;
    let show = |p: &[Sort]| p.iter().map(Sort::as_str).collect::<Vec<_>>().join(" < ");
    for p in &all {
        let is_canonical = canonical.as_deref() == Some(p.as_slice());
        if out.json() {
            let names: Vec<&str> = p.iter().map(Sort::as_str).collect();
            out.record("path", json!({"path": names, "canonical": is_canonical}))?;
        } else {
            out.line(format!("{} {}", if is_canonical { "*" } else { " " }, show(p)))?;
        }
    }
    if all.is_empty() && !out.json() {
        out.line(format!("no path from {from} to {to}"))?;
    }
    Ok(())
}

fn emit_trace(out: &mut Out, trace: &Trace, start: &str) -> Result<(), Failure> {
    if !trace.complete {
        eprintln!("warning: an equivalence class search hit its budget; steps may be missing");
    }
    if out.json() {
        for s in &trace.steps {
            out.record(
                "step",
                json!({
                    "position": s.position.to_string(),
                    "rule": s.rule_index,
                    "before": s.bridging.to_string(),
                    "after": s.result.to_string(),
                }),
            )?;
        }
        let last = trace.steps.last().map_or(start.to_string(), |s| s.result.to_string());
        out.record(
            "trace",
            json!({"steps": trace.steps.len(), "normal_form": trace.normal_form, "complete": trace.complete, "last": last}),
        )?;
    } else {
        for s in &trace.steps {
            out.line(s.to_string())?;
        }
        if trace.normal_form {
            let last = trace.steps.last().map_or(start.to_string(), |s| s.result.to_string());
            out.line(format!("normal form: {last}"))?;
        } else {
            out.line(format!("stopped after {} steps", trace.steps.len()))?;
        }
    }
    Ok(())
}

fn run_trace<T: Theory>(
    out: &mut Out,
    th: &T,
    term: ostr_core::terms::GroundTerm,
    strategy: Strategy,
    steps: usize,
    cfg: &ClosureConfig,
) -> Result<(), Failure> {
    let start = th.normalize(term.clone()).to_string();
    let trace = rewrite_trace(th, &term, strategy, steps, cfg)
        .ok_or_else(|| Failure::Input(format!("term `{term}` is not well-formed")))?;
    emit_trace(out, &trace, &start)
}

fn rewrite(out: &mut Out, file: &Path, text: &str, strategy: Strategy, steps: usize, cfg: ClosureConfig) -> Result<(), Failure> {
    let term_error = |e: SpecError| Failure::Input(format!("--term:{e}"));
    if file.extension().is_some_and(|e| e == "msa") {
        let alg = load_ms(file)?;
        let sig = &alg.signature;
        let t = parse_ground(sig, sig.sorts(), sig.constructors(), text).map_err(term_error)?;
        let th = MsTheory::standalone(&alg).map_err(|e| Failure::Input(e.to_string()))?;
        run_trace(out, &th, t, strategy, steps, &cfg)
    } else {
        let alg = load_os(file)?;
        let sig = &alg.signature;
        let t = parse_ground(sig, sig.sorts(), sig.constructors(), text).map_err(term_error)?;
        run_trace(out, &OsTheory::new(&alg), t, strategy, steps, &cfg)
    }
}

fn counterexample_json(c: &Counterexample) -> Value {
    json!({
        "direction": c.direction.to_string(),
        "term": c.source_term.to_string(),
        "rule": c.rule_index,
        "position": c.witness.position.to_string(),
        "bridging": c.witness.bridging.to_string(),
        "result": c.witness.result.to_string(),
        "missing": c.missing,
    })
}

fn bisim(out: &mut Out, file: &Path, cfg: BisimConfig) -> Result<(), Failure> {
    let alg = load_os(file)?;
    let report: BisimReport = match run_bisim(&alg, &cfg) {
        Ok(r) => r,
        Err(e) => return translate_failure(e),
    };
    let failures = report.forward_failures.iter().chain(&report.backward_failures);
    if out.json() {
        for c in failures {
            out.record("counterexample", counterexample_json(c))?;
        }
        out.record(
            "bisim",
            json!({
                "terms_checked": report.terms_checked,
                "steps_checked": report.steps_checked,
                "forward_failures": report.forward_failures.len(),
                "backward_failures": report.backward_failures.len(),
                "skipped_unexhausted": report.skipped_unexhausted,
                "skipped_not_in_image": report.skipped_not_in_image,
                "sampled": report.truncated,
                "passed": report.passes(),
            }),
        )?;
    } else {
        for c in failures {
            out.line(format!("counterexample: {c}"))?;
        }
        out.line(report.to_string())?;
        let v = out.verdict(report.passes());
        out.line(format!("passed: {v}"))?;
    }
    if report.passes() {
        Ok(())
    } else {
        Err(Failure::Check)
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let color = std::env::var("OSTR_COLOR").map_or(true, |v| v != "0") && io::stdout().is_terminal();
    let mut out = Out {
        format: cli.format,
        color,
        stdout: io::stdout().lock(),
    };
    let result = match cli.command {
        Command::Check { file } => check(&mut out, &file),
        Command::Translate { file, output, tie_break } => translate(&mut out, &file, output.as_deref(), tie_break.into()),
        Command::Paths {
            file,
            from,
            to,
            tie_break,
        } => paths(&mut out, &file, &from, &to, tie_break.into()),
        Command::Rewrite {
            file,
            term,
            steps,
            strategy,
            eclass_depth,
            eclass_max,
        } => rewrite(
            &mut out,
            &file,
            &term,
            strategy.into(),
            steps,
            ClosureConfig {
                depth: eclass_depth,
                max_size: eclass_max,
                size_limit: None,
            },
        ),
        Command::Bisim {
            file,
            depth,
            eclass_depth,
            eclass_max,
            max_terms,
            seed,
        } => bisim(
            &mut out,
            &file,
            BisimConfig {
                term_depth: depth,
                eclass_depth,
                eclass_max,
                max_terms,
                seed,
            },
        ),
    };
    let _ = out.stdout.flush();
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Check) => ExitCode::from(1),
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
