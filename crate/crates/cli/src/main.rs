//! `cfj`: check, run and soundness-test programs.
//!
//! Exit codes: 0 success, 1 type error, 2 parse/validation/IO error,
//! 3 evaluation stuck, 4 out of fuel, 5 soundness violation.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use cfj::harness::differential::run_differential_with;
use cfj::harness::enumerate::MAX_DEPTH;
use cfj::harness::fixtures::load_dir;
use cfj::harness::{run_soundness, SoundnessConfig, SoundnessReport, Verdict};
use cfj::semantics::{default_max_steps, eval_with, EvalConfig, Fault, Outcome};
use cfj::syntax::LoadError;
use cfj::{check_program, parse_program, Program, TypeError};

const TYPE_ERROR: u8 = 1;
const LOAD_ERROR: u8 = 2;
const STUCK: u8 = 3;
const OUT_OF_FUEL: u8 = 4;
const UNSOUND: u8 = 5;

#[derive(Parser)]
#[command(name = "cfj", version, about = "Typecheck, run and soundness-test context-oriented FJ programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Typecheck a program and print the type of its main expression.
    Check { file: PathBuf },
    /// Typecheck and evaluate a program, printing the final value.
    Run {
        file: PathBuf,
        /// Print one line per reduction step.
        #[arg(long)]
        trace: bool,
        /// Step budget (default: CFJ_MAX_STEPS or 10000).
        #[arg(long)]
        max_steps: Option<usize>,
        /// Skip typechecking.
        #[arg(long)]
        unchecked: bool,
    },
    /// Check subject reduction and progress along evaluation traces.
    Soundness {
        /// A single program.
        #[arg(required_unless_present = "suite", conflicts_with = "suite")]
        file: Option<PathBuf>,
        /// Every `.cfj` file in a directory.
        #[arg(long)]
        suite: Option<PathBuf>,
        /// Also enumerate mains up to this depth over each program's tables.
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=MAX_DEPTH as i64))]
        depth: Option<u8>,
        #[arg(long)]
        max_steps: Option<usize>,
        /// Write one JSON record per candidate to this file.
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long, hide = true)]
        inject_fault: Option<FaultArg>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    SkipArgSubst,
}

impl From<FaultArg> for Fault {
    fn from(f: FaultArg) -> Fault {
        match f {
            FaultArg::SkipArgSubst => Fault::SkipArgSubst,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let code = match cli.command {
        Command::Check { file } => check(&file),
        Command::Run { file, trace, max_steps, unchecked } => run(&file, trace, max_steps, unchecked),
        Command::Soundness { file, suite, depth, max_steps, report, inject_fault } => {
            let cfg = SoundnessConfig {
                fault: inject_fault.map(Fault::from),
                keep_records: false,
                ..SoundnessConfig::new(max_steps.unwrap_or_else(default_max_steps))
            };
            soundness(file.as_deref(), suite.as_deref(), depth.map(usize::from), cfg, report.as_deref())
        }
    };
    ExitCode::from(code)
}

fn load(file: &Path) -> Result<Program, u8> {
    let src = fs::read_to_string(file).map_err(|e| {
        eprintln!("{}: {e}", file.display());
        LOAD_ERROR
    })?;
    parse_program(&src).map_err(|e| {
        report_load_error(file, &e);
        LOAD_ERROR
    })
}

fn report_load_error(file: &Path, e: &LoadError) {
    match e {
        LoadError::Parse(p) => eprintln!("{}:{p}", file.display()),
        LoadError::Validation(r) => {
            for v in &r.violations {
                eprintln!("{}:{v}", file.display());
            }
        }
    }
}

fn report_type_errors(file: &Path, errs: &[TypeError]) {
    for e in errs {
        eprintln!("{}:{}:{}: {e}", file.display(), e.span.line, e.span.col);
    }
}

fn typecheck(file: &Path, p: &Program) -> Result<String, u8> {
    check_program(p).map(|t| t.to_string()).map_err(|errs| {
        report_type_errors(file, &errs);
        TYPE_ERROR
    })
}

fn check(file: &Path) -> u8 {
    let result = load(file).and_then(|p| typecheck(file, &p));
    match result {
        Ok(ty) => {
            println!("{ty}");
            0
        }
        Err(code) => code,
    }
}

fn run(file: &Path, trace: bool, max_steps: Option<usize>, unchecked: bool) -> u8 {
    let p = match load(file) {
        Ok(p) => p,
        Err(code) => return code,
    };
    if !unchecked {
        if let Err(code) = typecheck(file, &p) {
            return code;
        }
    }
    let cfg = EvalConfig { max_steps: max_steps.unwrap_or_else(default_max_steps), fault: None };
    let (outcome, steps) = eval_with(&p, &p.main, cfg);
    let mut out = BufWriter::new(io::stdout().lock());
    if trace {
        let _ = out.write_all(steps.render().as_bytes());
    }
    let code = match outcome {
        Outcome::Value(v) => {
            let _ = writeln!(out, "{v}");
            0
        }
        Outcome::Stuck { reason, expr, active } => {
            eprintln!("stuck after {} step(s): {reason}", steps.entries.len());
            eprintln!("  under {active}: {expr}");
            STUCK
        }
        Outcome::OutOfFuel => {
            eprintln!("out of fuel after {} step(s)", cfg.max_steps);
            OUT_OF_FUEL
        }
    };
    let _ = out.flush();
    code
}

#[derive(Default)]
struct Tally {
    programs: usize,
    accepted: usize,
    candidates: usize,
    violations: usize,
    records: Vec<serde_json::Value>,
}

impl Tally {
    fn record(&mut self, id: &str, verdict: Verdict, steps: usize, failing_step: Option<usize>, failure: Option<String>) {
        self.records.push(json!({
            "id": id,
            "verdict": verdict,
            "steps": steps,
            "failing_step": failing_step,
            "failure": failure,
        }));
    }

    fn program(&mut self, r: &SoundnessReport) {
        self.programs += 1;
        let first = r.violations.first();
        let failure = first.map(ToString::to_string);
        match r.verdict {
            Verdict::Pass => {
                self.accepted += 1;
                let ty = r.static_type.map(|t| t.to_string()).unwrap_or_default();
                println!("{}: ok ({ty}, {} step(s), {})", r.id, r.steps, r.outcome);
            }
            Verdict::NotAccepted => println!("{}: not accepted", r.id),
            Verdict::Fail => {
                self.violations += 1;
                println!("{}: FAIL {}", r.id, failure.as_deref().unwrap_or(""));
            }
        }
        self.record(&r.id, r.verdict, r.steps, first.map(|v| v.step), failure);
    }

    fn enumerate(&mut self, id: &str, p: &Program, depth: usize, cfg: SoundnessConfig) {
        let s = run_differential_with(p, depth, cfg.max_steps, cfg.fault);
        self.candidates += s.candidates;
        self.violations += s.violations.len();
        println!(
            "{id}: {} candidate(s) to depth {depth}, {} accepted, {} violation(s)",
            s.candidates,
            s.accepted,
            s.violations.len()
        );
        for v in &s.violations {
            println!("{id}#{}: FAIL {} {}", v.id, v.main, v.failure.as_deref().unwrap_or(""));
        }
        for c in s.results {
            self.record(&format!("{id}#{}", c.id), c.verdict, c.steps, c.failing_step, c.failure);
        }
    }
}

fn soundness(
    file: Option<&Path>,
    suite: Option<&Path>,
    depth: Option<usize>,
    cfg: SoundnessConfig,
    report: Option<&Path>,
) -> u8 {
    let mut programs: Vec<(String, Program)> = Vec::new();
    if let Some(dir) = suite {
        let fixtures = match load_dir(dir) {
            Ok(f) => f,
            Err(e) => {
                eprintln!("{e}");
                return LOAD_ERROR;
            }
        };
        for f in fixtures {
            let path = f.path.clone().unwrap_or_else(|| dir.join(&f.id));
            match f.program() {
                Ok(p) => programs.push((f.id, p)),
                Err(e) => {
                    report_load_error(&path, &e);
                    return LOAD_ERROR;
                }
            }
        }
    } else if let Some(file) = file {
        match load(file) {
            Ok(p) => programs.push((file.display().to_string(), p)),
            Err(code) => return code,
        }
    }
    if programs.is_empty() {
        println!("0 programs");
    }
    let mut tally = Tally::default();
    for (id, p) in &programs {
        tally.program(&run_soundness(id, p, cfg));
        if let Some(d) = depth {
            tally.enumerate(id, p, d, cfg);
        }
    }
    println!(
        "{} program(s), {} accepted, {} enumerated candidate(s), {} violation(s)",
        tally.programs, tally.accepted, tally.candidates, tally.violations
    );
    if let Some(path) = report {
        let lines: String = tally.records.iter().map(|r| format!("{r}\n")).collect();
        if let Err(e) = fs::write(path, lines) {
            eprintln!("{}: {e}", path.display());
            return LOAD_ERROR;
        }
    }
    if tally.violations == 0 {
        0
    } else {
        UNSOUND
    }
}
