use std::collections::BTreeMap;
use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use monocircuit::abp::{
    abp_expand, abp_length_bound_check, abp_to_expsum, bits_to_string, edge_support_violations, SuccinctAbp,
};
use monocircuit::acceptance;
use monocircuit::circuit::{validate, AnyCircuit, CircuitFile, ValidationReport};
use monocircuit::geometry::{is_transparent, shadow_complexity_search, shadow_svg, SearchMode, ShadowMatrix};
use monocircuit::poly::{format_rational, parse_rational};
use monocircuit::semantics::{evaluate, expand, expand_quantified};
use monocircuit::transforms::{
    build_perm_projection_circuit, build_perm_projection_stages, extract_hom_circuit,
    homogeneous_quantified_to_expsum, lower_to_projections, pruned_expsum, support_preservation_check,
    trivial_expsum, HOM_SIZE_CONSTANT,
};
use monocircuit::{Error, ExpansionGuards, Polynomial, Var};

/// Monotone circuits with projection gates, quantified circuits, succinct
/// branching programs and Newton-polygon shadows. Reports are JSON on stdout.
#[derive(Parser)]
#[command(name = "monocircuit", version)]
struct Cli {
    /// Largest number of terms in any intermediate polynomial.
    #[arg(long, global = true, default_value_t = 200_000)]
    max_terms: usize,
    /// Largest sum of absolute exponents in any intermediate term.
    #[arg(long, global = true, default_value_t = 64)]
    max_degree: i64,
    /// Longest quantifier prefix that is expanded.
    #[arg(long, global = true, default_value_t = 24)]
    max_prefix: usize,
    /// Seed for every randomized search.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Input {
    /// Input file; standard input when omitted.
    file: Option<PathBuf>,
}

#[derive(Args)]
struct ShadowArgs {
    #[command(flatten)]
    input: Input,
    /// Entry bound K for searched matrices.
    #[arg(long, default_value_t = 2)]
    k: i64,
    /// Sample this many random matrices instead of enumerating all of them.
    #[arg(long)]
    samples: Option<u64>,
    /// Largest number of matrices enumerated.
    #[arg(long, default_value_t = monocircuit::geometry::DEFAULT_SEARCH_BUDGET)]
    budget: u64,
    /// Variable order for exponent vectors, comma separated.
    #[arg(long, value_delimiter = ',')]
    vars: Option<Vec<String>>,
}

#[derive(Subcommand)]
enum Command {
    /// Check a circuit, quantified circuit or ABP file.
    Validate(Input),
    /// Expand to polynomials.
    Expand(Input),
    /// Evaluate at a rational point.
    Eval {
        #[command(flatten)]
        input: Input,
        /// `var=value`, repeatable.
        #[arg(long = "at", value_name = "VAR=VALUE")]
        at: Vec<String>,
    },
    /// Replace summation and production gates by projections.
    Lower(Input),
    /// Circuit for the degree-k homogeneous component.
    Hom {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        k: usize,
    },
    /// Exponential sum for a homogeneous quantified circuit.
    Expsum(Input),
    /// Exponential sum with prefix-indexed copies of the summed variables.
    ExpsumTrivial(Input),
    /// Exponential sum restricted to the copies that depend on x, with a weight table.
    ExpsumPruned(Input),
    /// Projection-gate circuit for the n×n permanent.
    PermGen {
        #[arg(long)]
        n: usize,
        /// Emit every stage P0..Pn as an output.
        #[arg(long)]
        stages: bool,
    },
    /// Path sum of a succinct ABP.
    AbpExpand(Input),
    /// Weighted exponential sum for a succinct ABP.
    AbpExpsum {
        #[command(flatten)]
        input: Input,
        /// Degree bound; defaults to the degree of the path sum.
        #[arg(long)]
        d: Option<i64>,
        /// Also enumerate every assignment and compare with the path sum.
        #[arg(long)]
        check: bool,
    },
    /// Length-bound and edge-support checks for a succinct ABP.
    AbpCheck(Input),
    /// Best planar shadow of a polynomial's support.
    Shadow {
        #[command(flatten)]
        args: ShadowArgs,
        /// Write an SVG plot of the shadow here.
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Transparency verdict for a polynomial's support.
    Transparent {
        #[command(flatten)]
        args: ShadowArgs,
        /// Check this 2×n matrix, rows separated by `;`, e.g. `1,0;0,1`.
        #[arg(long, allow_hyphen_values = true)]
        witness: Option<String>,
    },
    /// Compare supp(f) with supp(g(x,1)) for a quantified circuit.
    SupportCheck(Input),
    /// Run the acceptance suite.
    Selftest {
        /// Emit the results as JSON instead of a table.
        #[arg(long)]
        json: bool,
        /// Run only this criterion.
        #[arg(long)]
        only: Option<u8>,
    },
}

enum Failure {
    Error(Error),
    Io(String),
    Violations(Value),
    Selftest,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Error(e)
    }
}

type Outcome = Result<Value, Failure>;

fn read_input(input: &Input) -> Result<String, Failure> {
    let mut s = String::new();
    match &input.file {
        Some(p) => s = std::fs::read_to_string(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?,
        None => {
            std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Io(format!("stdin: {e}")))?;
        }
    }
    Ok(s)
}

fn circuit_file(input: &Input) -> Result<CircuitFile, Failure> {
    Ok(CircuitFile::from_json(&read_input(input)?)?)
}

fn report_json(r: &ValidationReport) -> Value {
    json!({
        "valid": r.is_valid(),
        "violations": r.violations.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "notes": r.notes,
    })
}

fn require_valid(c: AnyCircuit<'_>) -> Result<(), Failure> {
    let r = validate(c);
    if r.is_valid() {
        Ok(())
    } else {
        Err(Failure::Violations(report_json(&r)))
    }
}

fn polys_json(ps: &[Polynomial]) -> Value {
    if ps.len() == 1 {
        serde_json::to_value(&ps[0]).expect("polynomial serializes")
    } else {
        serde_json::to_value(ps).expect("polynomial serializes")
    }
}

fn parse_json(s: &str) -> Result<Value, Failure> {
    serde_json::from_str(s).map_err(|e| Failure::Error(e.into()))
}

/// A polynomial file, a circuit (first output) or a quantified circuit, with its variable order.
fn polynomial_input(args: &ShadowArgs, guards: &ExpansionGuards) -> Result<(Polynomial, Vec<Var>), Failure> {
    let text = read_input(&args.input)?;
    let v = parse_json(&text)?;
    let (p, order): (Polynomial, Vec<Var>) = if v.get("terms").is_some() {
        let p = Polynomial::from_json(&text)?;
        let order = p.vars().into_iter().collect();
        (p, order)
    } else {
        match CircuitFile::from_json(&text)? {
            CircuitFile::Plain(c) => {
                require_valid(AnyCircuit::Plain(&c))?;
                (expand(&c, guards)?.swap_remove(0), c.universe().true_vars().to_vec())
            }
            CircuitFile::Quantified(q) => {
                require_valid(AnyCircuit::Quantified(&q))?;
                (expand_quantified(&q, guards)?, q.inner().universe().true_vars().to_vec())
            }
        }
    };
    let order = match &args.vars {
        Some(names) => names.iter().map(|n| Var::new(n.trim())).collect(),
        None => order,
    };
    Ok((p, order))
}

fn search_mode(args: &ShadowArgs, seed: u64) -> SearchMode {
    match args.samples {
        Some(trials) => SearchMode::Sampled { trials, seed },
        None => SearchMode::Exhaustive { budget: args.budget },
    }
}

fn parse_matrix(s: &str) -> Result<ShadowMatrix, Failure> {
    let rows = s
        .split(';')
        .map(|r| {
            r.split(',')
                .map(|e| e.trim().parse::<i64>().map_err(|_| Error::Parse(format!("bad matrix entry {e:?}"))))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(ShadowMatrix::new(rows)?)
}

fn run(cli: &Cli) -> Outcome {
    let guards = ExpansionGuards {
        max_terms: cli.max_terms,
        max_total_degree: cli.max_degree,
        max_prefix_length: cli.max_prefix,
    }
    .validated()?;
    let g = &guards;
    let out = match &cli.command {
        Command::Validate(input) => {
            let text = read_input(input)?;
            let v = parse_json(&text)?;
            let report = if v.get("B").is_some() {
                match SuccinctAbp::from_json(&text) {
                    Ok(_) => json!({ "valid": true, "violations": [], "notes": [] }),
                    Err(e @ Error::Parse(_)) => return Err(e.into()),
                    Err(e) => json!({ "valid": false, "violations": [e.to_string()], "notes": [] }),
                }
            } else {
                let r = match CircuitFile::from_json(&text)? {
                    CircuitFile::Plain(c) => validate(AnyCircuit::Plain(&c)),
                    CircuitFile::Quantified(q) => validate(AnyCircuit::Quantified(&q)),
                };
                report_json(&r)
            };
            if report["valid"] != json!(true) {
                return Err(Failure::Violations(report));
            }
            report
        }
        Command::Expand(input) => match circuit_file(input)? {
            CircuitFile::Plain(c) => {
                require_valid(AnyCircuit::Plain(&c))?;
                polys_json(&expand(&c, g)?)
            }
            CircuitFile::Quantified(q) => {
                require_valid(AnyCircuit::Quantified(&q))?;
                polys_json(&[expand_quantified(&q, g)?])
            }
        },
        Command::Eval { input, at } => {
            let mut assignment = BTreeMap::new();
            for a in at {
                let (v, x) = a.split_once('=').ok_or_else(|| Error::Parse(format!("expected VAR=VALUE, got {a:?}")))?;
                assignment.insert(Var::new(v.trim()), parse_rational(x.trim())?);
            }
            let c = match circuit_file(input)? {
                CircuitFile::Plain(c) => c,
                CircuitFile::Quantified(_) => {
                    return Err(Error::PreconditionViolation("eval takes a circuit without a prefix".into()).into())
                }
            };
            require_valid(AnyCircuit::Plain(&c))?;
            let values = evaluate(&c, &assignment)?;
            json!({ "values": values.iter().map(format_rational).collect::<Vec<_>>() })
        }
        Command::Lower(input) => match circuit_file(input)? {
            CircuitFile::Plain(c) => {
                require_valid(AnyCircuit::Plain(&c))?;
                lower_to_projections(&c).to_json_value()
            }
            CircuitFile::Quantified(_) => {
                return Err(Error::PreconditionViolation("lower takes a circuit without a prefix".into()).into())
            }
        },
        Command::Hom { input, k } => {
            let c = match circuit_file(input)? {
                CircuitFile::Plain(c) => c,
                CircuitFile::Quantified(_) => {
                    return Err(Error::PreconditionViolation("hom takes a circuit without a prefix".into()).into())
                }
            };
            require_valid(AnyCircuit::Plain(&c))?;
            let h = extract_hom_circuit(&c, *k, g)?;
            let mut v = h.to_json_value();
            v["size_constant"] = json!(HOM_SIZE_CONSTANT);
            v
        }
        Command::Expsum(input) | Command::ExpsumTrivial(input) | Command::ExpsumPruned(input) | Command::SupportCheck(input) => {
            let q = match circuit_file(input)? {
                CircuitFile::Quantified(q) => q,
                CircuitFile::Plain(_) => {
                    return Err(Error::PreconditionViolation("expected a quantified circuit with `prefix`".into()).into())
                }
            };
            require_valid(AnyCircuit::Quantified(&q))?;
            match &cli.command {
                Command::Expsum(_) => {
                    let (es, report) = homogeneous_quantified_to_expsum(&q, g)?;
                    json!({ "expsum": es.to_json_value(), "report": report })
                }
                Command::ExpsumTrivial(_) => trivial_expsum(&q, g)?.to_json_value(),
                Command::ExpsumPruned(_) => pruned_expsum(&q, g)?.to_json_value(),
                _ => serde_json::to_value(support_preservation_check(&q, g)?).expect("report serializes"),
            }
        }
        Command::PermGen { n, stages } => {
            let c = if *stages { build_perm_projection_stages(*n)? } else { build_perm_projection_circuit(*n)? };
            c.to_json_value()
        }
        Command::AbpExpand(input) => {
            let abp = SuccinctAbp::from_json(&read_input(input)?)?;
            serde_json::to_value(abp_expand(&abp, g)?).expect("polynomial serializes")
        }
        Command::AbpExpsum { input, d, check } => {
            let abp = SuccinctAbp::from_json(&read_input(input)?)?;
            let es = abp_to_expsum(&abp, *d, g)?;
            let mut v = es.to_json_value();
            if *check {
                let equal = es.enumerate(g)? == abp_expand(&abp, g)?;
                v["enumeration_matches"] = json!(equal);
            }
            v
        }
        Command::AbpCheck(input) => {
            let abp = SuccinctAbp::from_json(&read_input(input)?)?;
            let report = abp_length_bound_check(&abp, g)?;
            let bad = edge_support_violations(&abp, g)?;
            json!({
                "length_bound": report,
                "edge_support_violations": bad
                    .iter()
                    .map(|(a, b)| json!([bits_to_string(a), bits_to_string(b)]))
                    .collect::<Vec<_>>(),
            })
        }
        Command::Shadow { args, svg } => {
            let (p, vars) = polynomial_input(args, g)?;
            let report = shadow_complexity_search(&p, &vars, args.k, search_mode(args, cli.seed))?;
            if let Some(path) = svg {
                write_file(path, &shadow_svg(&report))?;
            }
            shadow_json(&report, &vars)
        }
        Command::Transparent { args, witness } => {
            let (p, vars) = polynomial_input(args, g)?;
            let m = witness.as_deref().map(parse_matrix).transpose()?;
            let report = is_transparent(&p, &vars, m.as_ref(), args.k, search_mode(args, cli.seed))?;
            shadow_json(&report, &vars)
        }
        Command::Selftest { json: as_json, only } => {
            let results = match only {
                Some(id) => acceptance::run_one(*id, cli.seed)
                    .map(|r| vec![r])
                    .ok_or_else(|| Error::PreconditionViolation(format!("no criterion {id}")))?,
                None => acceptance::run_all(cli.seed),
            };
            let passed = results.iter().all(|r| r.passed);
            if *as_json {
                let rows: Vec<Value> = results
                    .iter()
                    .map(|r| {
                        json!({
                            "id": r.id, "name": r.name, "passed": r.passed, "detail": r.detail,
                            "seconds": r.elapsed.as_secs_f64(), "limit_seconds": r.limit.as_secs(),
                        })
                    })
                    .collect();
                println!("{}", serde_json::to_string_pretty(&json!({ "passed": passed, "criteria": rows })).unwrap());
            } else {
                for r in &results {
                    println!("{r}");
                }
                let n = results.iter().filter(|r| r.passed).count();
                println!("{n} of {} criteria passed", results.len());
            }
            return if passed { Ok(Value::Null) } else { Err(Failure::Selftest) };
        }
    };
    Ok(out)
}

fn shadow_json(report: &monocircuit::geometry::ShadowReport, vars: &[Var]) -> Value {
    let mut v = serde_json::to_value(report).expect("report serializes");
    v["vars"] = json!(vars.iter().map(|v| v.to_string()).collect::<Vec<_>>());
    v
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    std::fs::write(path, contents).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) => 1,
        e if e.is_overflow() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(Value::Null) => ExitCode::SUCCESS,
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("report serializes"));
            ExitCode::SUCCESS
        }
        Err(Failure::Error(e)) => {
            let code = exit_code(&e);
            let kind = match code {
                1 => "parse",
                3 => "overflow",
                _ => "error",
            };
            println!("{}", serde_json::to_string_pretty(&json!({ "error": kind, "message": e.to_string() })).unwrap());
            eprintln!("monocircuit: {e}");
            ExitCode::from(code)
        }
        Err(Failure::Io(m)) => {
            eprintln!("monocircuit: {m}");
            ExitCode::from(1)
        }
        Err(Failure::Violations(v)) => {
            println!("{}", serde_json::to_string_pretty(&v).unwrap());
            ExitCode::from(2)
        }
        Err(Failure::Selftest) => ExitCode::from(4),
    }
}
