use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value as Json};

use logpot::interp::{run_function, EvalError, EvalOptions, DEFAULT_FUEL};
use logpot::lang::{load, parse_value, Program};
use logpot::potential::{parse_signatures, print_signatures, AnnotatedSignature, IndexTemplate};
use logpot::typing::{check_program, infer_program, TypingOptions};
use logpot::validate::{corpus, telescoping, validate, CorpusSpec};
use logpot::Mode;

#[derive(Parser)]
#[command(name = "logpot", version, about = "Logarithmic amortised cost analysis for tree programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    program: PathBuf,
    /// Further definitions the program calls (repeatable).
    #[arg(long = "with", value_name = "FILE")]
    with: Vec<PathBuf>,
}

#[derive(Args)]
struct Common {
    /// Log index template, e.g. `a=0..1,b=0..2`.
    #[arg(long, default_value = "a=0..1,b=0..2")]
    template: String,
    /// Write a JSON report here.
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Check annotated signatures against a program.
    Check {
        #[command(flatten)]
        source: Source,
        signatures: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Infer a costed signature for every function.
    Infer {
        #[command(flatten)]
        source: Source,
        /// Write the signatures here instead of standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Evaluate a function on literal arguments.
    Eval {
        #[command(flatten)]
        source: Source,
        function: String,
        args: Vec<String>,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        /// Do not charge for applications.
        #[arg(long)]
        cost_free: bool,
        /// Print the evaluation trace as JSON lines.
        #[arg(long)]
        trace: bool,
    },
    /// Compare certified bounds with measured costs on generated trees.
    Validate {
        #[command(flatten)]
        source: Source,
        signatures: PathBuf,
        /// Every search tree with at most this many leaves.
        #[arg(long, conflicts_with = "random")]
        exhaustive: Option<usize>,
        /// This many random search trees.
        #[arg(long)]
        random: Option<usize>,
        #[arg(long, default_value_t = 64)]
        max_leaves: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_FUEL)]
        fuel: u64,
        /// Validate even if the signatures do not type check.
        #[arg(long)]
        force: bool,
        #[command(flatten)]
        common: Common,
    },
}

/// Exit code 2: unusable input.
struct Usage(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.into())
    }
}

fn read(path: &Path) -> Result<String, Usage> {
    Ok(fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)
}

fn program(source: &Source) -> Result<Program, Usage> {
    let mut src = String::new();
    for path in source.with.iter().chain([&source.program]) {
        src.push_str(&read(path)?);
        src.push('\n');
    }
    Ok(load(&src).with_context(|| format!("in {}", source.program.display()))?)
}

fn signatures(path: &Path) -> Result<Vec<AnnotatedSignature>, Usage> {
    let src = read(path)?;
    Ok(parse_signatures(&src).with_context(|| format!("in {}", path.display()))?)
}

fn options(common: &Common) -> Result<TypingOptions, Usage> {
    let template = IndexTemplate::parse(&common.template).map_err(|e| anyhow!("--template: {e}"))?;
    Ok(TypingOptions { template, ..Default::default() })
}

fn write_report(common: &Common, report: Json) -> Result<(), Usage> {
    if let Some(path) = &common.json {
        let text = serde_json::to_string_pretty(&report)?;
        fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Costed => "costed",
        Mode::CostFree => "costfree",
    }
}

fn check(p: &Program, sigs: &[AnnotatedSignature], opts: &TypingOptions) -> Result<(bool, Json), Usage> {
    let report = check_program(p, sigs, opts)?;
    for v in &report.verdicts {
        let mode = mode_name(v.mode);
        let verdict = if v.typable { "typable" } else { "NOT typable" };
        println!("{} {mode} #{}: {verdict} ({} constraints, {} variables)", v.function, v.index, v.constraints, v.variables);
    }
    let json = json!({
        "command": "check",
        "typable": report.typable(),
        "verdicts": report.verdicts,
        "signatures": print_signatures(sigs),
    });
    Ok((report.typable(), json))
}

fn run(cli: Cli) -> Result<bool, Usage> {
    match cli.command {
        Command::Check { source, signatures: sig_path, common } => {
            let p = program(&source)?;
            let sigs = signatures(&sig_path)?;
            let (ok, json) = check(&p, &sigs, &options(&common)?)?;
            write_report(&common, json)?;
            Ok(ok)
        }
        Command::Infer { source, output, common } => {
            let p = program(&source)?;
            let opts = options(&common)?;
            let report = infer_program(&p, &opts)?;
            let text = report.signatures.as_deref().map(print_signatures);
            match (&text, &output) {
                (Some(t), Some(out)) => fs::write(out, t).with_context(|| format!("writing {}", out.display()))?,
                (Some(t), None) => print!("{t}"),
                (None, _) => eprintln!(
                    "no signature within the template `{}`; try a larger one, e.g. --template a=0..1,b=0..{}",
                    common.template,
                    opts.template.max_b() + 1
                ),
            }
            write_report(
                &common,
                json!({
                    "command": "infer",
                    "feasible": text.is_some(),
                    "signatures": text,
                    "constraints": report.constraints,
                    "variables": report.variables,
                    "pivots": report.pivots,
                    "build": report.build,
                }),
            )?;
            Ok(text.is_some())
        }
        Command::Eval { source, function, args, fuel, cost_free, trace } => {
            let p = program(&source)?;
            let def = p.get(&function).ok_or_else(|| anyhow!("no function `{function}`"))?;
            if def.params.len() != args.len() {
                return Err(anyhow!("`{function}` takes {} arguments, {} given", def.params.len(), args.len()).into());
            }
            let values = args
                .iter()
                .map(|a| parse_value(a).with_context(|| format!("argument `{a}`")))
                .collect::<Result<Vec<_>, _>>()?;
            let mode = if cost_free { Mode::CostFree } else { Mode::Costed };
            match run_function(&p, &function, &values, EvalOptions { mode, fuel, trace }) {
                Ok(out) => {
                    if trace {
                        eprint!("{}", out.trace_jsonl());
                    }
                    println!("value: {}", out.value);
                    println!("cost: {}", out.cost);
                    Ok(true)
                }
                Err(e @ EvalError::OutOfFuel { .. }) => {
                    eprintln!("nontermination: {e}");
                    Ok(false)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Validate { source, signatures: sig_path, exhaustive, random, max_leaves, seed, fuel, force, common } => {
            let p = program(&source)?;
            let sigs = signatures(&sig_path)?;
            let (typable, _) = check(&p, &sigs, &options(&common)?)?;
            if !typable && !force {
                eprintln!("the signatures are not certified; pass --force to validate anyway");
                return Ok(false);
            }
            let spec = match random {
                Some(count) => CorpusSpec::Random { count, max_leaves, seed },
                None => CorpusSpec::Exhaustive { max_leaves: exhaustive.unwrap_or(10) },
            };
            let inputs = corpus(&spec);
            if inputs.is_empty() {
                eprintln!("warning: empty corpus, validation is vacuous");
            }
            let mut ok = true;
            let mut results = Vec::new();
            let mut sequences = Vec::new();
            for s in &sigs {
                let pairs = s.costed.iter().map(|pq| (Mode::Costed, pq)).chain(s.cost_free.iter().map(|pq| (Mode::CostFree, pq)));
                let mut index = [0, 0];
                for (mode, (q, q1)) in pairs {
                    let k = &mut index[(mode == Mode::CostFree) as usize];
                    let v = validate(&p, &s.name, (*k, q, q1), mode, &inputs, fuel)?;
                    *k += 1;
                    let line = format!("{} {} #{}: {} runs, min slack {:.6}", s.name, mode_name(mode), v.pair, v.runs, v.min_slack);
                    match &v.witness {
                        None => println!("{line}: ok"),
                        Some(w) => {
                            ok = false;
                            println!(
                                "{line}: VIOLATED on ({}) -> {}, cost {} > {} - {}",
                                w.arguments.join(", "),
                                w.result,
                                w.cost,
                                w.potential_before,
                                w.potential_after
                            );
                        }
                    }
                    results.push(v);
                }
                // Sequences telescope when the result keeps exactly the input rank.
                let shape = s.ty.params.len() == 2 && !s.ty.params[0].is_tree() && s.ty.params[1].is_tree() && s.ty.result.is_tree();
                if let (true, Some((q, q1))) = (shape, s.costed.first()) {
                    if q1.rank == q.rank && q1.logs().next().is_none() {
                        let t = telescoping(&p, &s.name, q, 100, 256, max_leaves.max(2), seed)?;
                        let pass = t.passed(1e-4);
                        ok &= pass;
                        println!(
                            "{} telescoping over {}x{} calls: worst excess {:.6}: {}",
                            s.name,
                            t.sequences,
                            t.length,
                            t.worst_excess,
                            if pass { "ok" } else { "VIOLATED" }
                        );
                        sequences.push(t);
                    }
                }
            }
            let min = results.iter().map(|v| v.min_slack).fold(f64::INFINITY, f64::min);
            let max = results.iter().map(|v| v.max_slack).fold(f64::NEG_INFINITY, f64::max);
            write_report(
                &common,
                json!({
                    "command": "validate",
                    "passed": ok,
                    "corpus": spec,
                    "corpus_size": inputs.len(),
                    "min_slack": min.is_finite().then_some(min),
                    "max_slack": max.is_finite().then_some(max),
                    "validations": results,
                    "telescoping": sequences,
                    "signatures": print_signatures(&sigs),
                }),
            )?;
            Ok(ok)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
