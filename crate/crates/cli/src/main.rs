use std::fmt::Display;
use std::path::Path;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use zgrade::freealg::{gen_identities, GradedPolynomial, IdentityFamily};
use zgrade::grading::{FiniteModel, GradingSpec, UpperIndex};
use zgrade::support::{
    classify_cases, full_support_3, gcd_all, subgroup_test, support_contains, variety_of,
    SupportError, SupportQueryResult, VarietyTag, DEFAULT_BOUND, DEFAULT_WINDOW,
};
use zgrade::verify::{
    chain_witness, check_quotient, check_scaling, compare, is_graded_identity, Scope, Verdict,
    VerifyError,
};

const SCHEMA: u32 = 1;

#[derive(Parser)]
#[command(
    name = "zgrade",
    version,
    about = "Z-gradings on the Grassmann algebra: supports, cases and graded identities"
)]
struct Cli {
    #[command(flatten)]
    opts: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Rank of models built from a grading spec
    #[arg(long, global = true, default_value_t = 10)]
    rank: usize,
    /// Per-variable monomial length cap (default: 4 up to degree 3, else 3)
    #[arg(long, global = true)]
    length_cap: Option<usize>,
    /// Per-coefficient search bound
    #[arg(long, global = true, default_value_t = DEFAULT_BOUND)]
    bound: u64,
    /// Half-width of grade windows
    #[arg(long, global = true, default_value_t = DEFAULT_WINDOW)]
    window: i64,
    /// Largest degree of generated identities
    #[arg(long, global = true, default_value_t = 4)]
    degree_bound: usize,
    /// Seed for randomized checks
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Random substitutions for polynomials that are not multilinear
    #[arg(long, global = true, default_value_t = 10_000)]
    samples: usize,
    /// Worker threads for searches (default: all cores)
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Print JSON
    #[arg(long, global = true)]
    json: bool,
}

impl GlobalOpts {
    fn scope(&self) -> Scope {
        Scope {
            rank: self.rank,
            length_cap: self.length_cap,
            multilinear_only: false,
            samples: self.samples,
            seed: self.seed,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a degree lies in the support of a grading
    SupportCheck {
        /// Grading spec as JSON or a path to a JSON file
        #[arg(long)]
        spec: String,
        #[arg(long, allow_hyphen_values = true)]
        z: i64,
    },
    /// Parity cases, centrality and variety of a triple (a, b, c)
    Classify(TripleArgs),
    /// Variety generated by the grading (-b, c, a)^(inf, k, inf)
    Variety(TripleArgs),
    /// Enumerate instances of an identity family
    GenIdentities {
        #[arg(long, value_enum)]
        family: FamilyKind,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<i64>,
        #[arg(long, allow_hyphen_values = true)]
        c: Option<i64>,
        #[arg(long)]
        k: Option<u64>,
        /// Scale the family by d and add the single variables outside <d>
        #[arg(long)]
        scaled: Option<u64>,
    },
    /// Check a graded polynomial identity on a truncated model
    Verify {
        #[command(flatten)]
        model: ModelArgs,
        /// Polynomial text, e.g. '[x1@0, x2@0]'
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
    },
    /// Cross-check the support, quotient or scaling correspondence
    CrossCheck {
        #[command(subcommand)]
        check: CrossCheck,
    },
    /// Polynomial separating the first family at k1 from k2
    Chain {
        #[arg(long)]
        d: u64,
        #[arg(long, allow_hyphen_values = true)]
        c: i64,
        #[arg(long)]
        k1: u64,
        #[arg(long)]
        k2: u64,
    },
}

#[derive(Args)]
struct TripleArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: i64,
    #[arg(long, allow_hyphen_values = true)]
    b: i64,
    #[arg(long, allow_hyphen_values = true)]
    c: i64,
    /// Size of the middle block, a number or "inf"
    #[arg(long)]
    k: Option<UpperIndex>,
}

#[derive(Args)]
struct ModelArgs {
    /// Model JSON ({"spec": ..., "counts": [...]}) or a path to one
    #[arg(long, conflicts_with = "spec")]
    model: Option<String>,
    /// Grading spec JSON or path, truncated to --rank generators
    #[arg(long)]
    spec: Option<String>,
}

#[derive(Subcommand)]
enum CrossCheck {
    /// Realized degrees against the subgroup criterion
    Support {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 6)]
        max_length: usize,
    },
    /// Verdict for f against the verdict for pi_d(f)
    Quotient {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
        #[arg(long)]
        d: u64,
    },
    /// Verdict for f on the divided model against Phi_d(f) on the model
    Scaling {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, allow_hyphen_values = true)]
        poly: String,
        #[arg(long)]
        d: i64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyKind {
    Can,
    V1,
    V2,
}

/// Failure of a command, mapped to an exit code.
enum Failure {
    Usage(String),
    Negative(Value, String),
}

fn usage(e: impl Display) -> Failure {
    Failure::Usage(e.to_string())
}

struct Outcome {
    json: Value,
    text: String,
    positive: bool,
}

fn positive(json: Value, text: String) -> Outcome {
    Outcome {
        json,
        text,
        positive: true,
    }
}

fn read_source(arg: &str) -> Result<String, Failure> {
    let trimmed = arg.trim_start();
    if trimmed.starts_with('{') {
        return Ok(arg.to_string());
    }
    std::fs::read_to_string(Path::new(arg)).map_err(|e| usage(format!("cannot read {arg}: {e}")))
}

fn load_spec(arg: &str) -> Result<GradingSpec, Failure> {
    serde_json::from_str(&read_source(arg)?).map_err(|e| usage(format!("invalid spec: {e}")))
}

fn load_model(args: &ModelArgs, rank: usize) -> Result<FiniteModel, Failure> {
    match (&args.model, &args.spec) {
        (Some(m), _) => {
            serde_json::from_str(&read_source(m)?).map_err(|e| usage(format!("invalid model: {e}")))
        }
        (None, Some(s)) => FiniteModel::truncated(load_spec(s)?, rank).map_err(usage),
        (None, None) => Err(usage("one of --model or --spec is required")),
    }
}

fn parse_poly(text: &str) -> Result<GradedPolynomial, Failure> {
    GradedPolynomial::parse(text).map_err(usage)
}

fn verify_failure(e: VerifyError) -> Failure {
    usage(e)
}

fn verdict_text(v: &Verdict) -> String {
    match v {
        Verdict::HoldsInScope(d) => format!(
            "holds in scope (rank {}, length cap {}, {})",
            d.rank,
            d.length_cap,
            if d.exhaustive {
                "exhaustive".to_string()
            } else {
                format!("{} random samples", d.samples)
            }
        ),
        Verdict::Counterexample { assignment, value } => {
            let asg: Vec<String> = assignment
                .iter()
                .map(|(v, e)| format!("{v} -> {e}"))
                .collect();
            format!("counterexample: {} gives {value}", asg.join(", "))
        }
    }
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    let opts = &cli.opts;
    match &cli.command {
        Command::SupportCheck { spec, z } => {
            let spec = load_spec(spec)?;
            let result = support_contains(&spec, *z, opts.bound);
            let subgroup = subgroup_test(&spec).ok();
            let json = json!({
                "command": "support-check",
                "spec": spec,
                "z": z,
                "bound": opts.bound,
                "result": result,
                "subgroup": subgroup,
            });
            let text = match &result {
                SupportQueryResult::Yes { witness } => {
                    format!("yes: {z} in support of {spec}, witness {witness:?}")
                }
                SupportQueryResult::ExactNo { reason } => format!("no: {reason}"),
                SupportQueryResult::NotFoundWithinBound => {
                    format!("not found with coefficients up to {}", opts.bound)
                }
            };
            if result.is_yes() {
                Ok(positive(json, text))
            } else {
                Err(Failure::Negative(json, text))
            }
        }
        Command::Classify(t) => {
            let report = classify_cases(t.a, t.b, t.c, opts.bound).map_err(usage)?;
            let full = if gcd_all([t.a, t.b, t.c]) == 1 {
                t.k.and_then(|k| full_support_3(-t.b, t.c, t.a, k).ok().flatten())
            } else {
                None
            };
            let variety = t.k.map(|k| variety_of(t.a, t.b, t.c, k));
            let variety_json = match &variety {
                Some(Ok(tag)) => json!({ "tag": tag, "name": tag.to_string() }),
                Some(Err(e)) => json!({ "error": e.to_string() }),
                None => Value::Null,
            };
            let mut text = format!(
                "d = {}, bhat {}, case ({}') for +-d, centrality {}",
                report.d,
                report.bhat,
                report.pair_case.number(),
                report.centrality
            );
            if let Some(tc) = &report.triple {
                text.push_str(&format!(", case ({}) for +-1", tc.case.number()));
            }
            if let Some(case) = full {
                text.push_str(&format!(", full support case {case}"));
            }
            match &variety {
                Some(Ok(tag)) => text.push_str(&format!(", variety {tag}")),
                Some(Err(e)) => text.push_str(&format!(", variety: {e}")),
                None => {}
            }
            let json = json!({
                "command": "classify",
                "report": report,
                "pair_case": format!("({}')", report.pair_case.number()),
                "triple_case": report.triple.as_ref().map(|t| format!("({})", t.case.number())),
                "full_support_case": full,
                "variety": variety_json,
            });
            Ok(positive(json, text))
        }
        Command::Variety(t) => {
            let k = t.k.ok_or_else(|| usage("--k is required"))?;
            match variety_of(t.a, t.b, t.c, k) {
                Ok(tag) => Ok(positive(
                    json!({ "command": "variety", "tag": tag, "name": tag.to_string() }),
                    tag.to_string(),
                )),
                Err(e @ SupportError::NotFullSupport { .. }) => Err(Failure::Negative(
                    json!({ "command": "variety", "error": e.to_string() }),
                    e.to_string(),
                )),
                Err(e) => Err(usage(e)),
            }
        }
        Command::GenIdentities {
            family,
            a,
            b,
            c,
            k,
            scaled,
        } => {
            let tag = match family {
                FamilyKind::Can => VarietyTag::Can,
                FamilyKind::V1 | FamilyKind::V2 => {
                    let need = |v: Option<i64>, name: &str| {
                        v.ok_or_else(|| usage(format!("--{name} is required for this family")))
                    };
                    let (a, b, c) = (need(*a, "a")?, need(*b, "b")?, need(*c, "c")?);
                    let k = k.ok_or_else(|| usage("--k is required for this family"))?;
                    if matches!(family, FamilyKind::V1) {
                        VarietyTag::V1 { a, b, c, k }
                    } else {
                        VarietyTag::V2 { a, b, c, k }
                    }
                }
            };
            let fam = match scaled {
                Some(d) => IdentityFamily::Scaled { base: tag, d: *d },
                None => IdentityFamily::Variety { tag },
            };
            let list = gen_identities(&fam, opts.degree_bound, opts.window).map_err(usage)?;
            let text = list
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join("\n");
            Ok(positive(
                json!({
                    "command": "gen-identities",
                    "family": fam,
                    "degree_bound": opts.degree_bound,
                    "window": opts.window,
                    "count": list.len(),
                    "identities": list,
                }),
                text,
            ))
        }
        Command::Verify { model, poly } => {
            let model = load_model(model, opts.rank)?;
            let f = parse_poly(poly)?;
            let verdict = is_graded_identity(&f, &model, &opts.scope()).map_err(verify_failure)?;
            let json = json!({
                "command": "verify",
                "poly": f.to_string(),
                "model": model,
                "verdict": verdict.to_json(),
            });
            let text = verdict_text(&verdict);
            if verdict.holds() {
                Ok(positive(json, text))
            } else {
                Err(Failure::Negative(json, text))
            }
        }
        Command::CrossCheck { check } => match check {
            CrossCheck::Support { model, max_length } => {
                let model = load_model(model, opts.rank)?;
                let cmp = compare(&model, *max_length, opts.window).map_err(verify_failure)?;
                let text = format!(
                    "{}: {:?}, {} realized degrees, missing {:?}, unexpected {:?}",
                    if cmp.agree { "agree" } else { "disagree" },
                    cmp.verdict,
                    cmp.observed.len(),
                    cmp.missing,
                    cmp.unexpected
                );
                let agree = cmp.agree;
                let json =
                    json!({ "command": "cross-check support", "model": model, "comparison": cmp });
                if agree {
                    Ok(positive(json, text))
                } else {
                    Err(Failure::Negative(json, text))
                }
            }
            CrossCheck::Quotient { model, poly, d } => {
                let model = load_model(model, opts.rank)?;
                let f = parse_poly(poly)?;
                let r = check_quotient(&f, &model, *d, &opts.scope()).map_err(verify_failure)?;
                let text = format!(
                    "{}: Z verdict {}; Z_{d} verdict {}",
                    if r.agree { "agree" } else { "disagree" },
                    verdict_text(&r.integral),
                    verdict_text(&r.quotient)
                );
                let json = json!({ "command": "cross-check quotient", "poly": f.to_string(), "report": r.to_json() });
                if r.agree {
                    Ok(positive(json, text))
                } else {
                    Err(Failure::Negative(json, text))
                }
            }
            CrossCheck::Scaling { model, poly, d } => {
                let model = load_model(model, opts.rank)?;
                let f = parse_poly(poly)?;
                let r = check_scaling(&f, &model, *d, &opts.scope()).map_err(verify_failure)?;
                let text = format!(
                    "{}: divided model {}; scaled {}",
                    if r.agree { "agree" } else { "disagree" },
                    verdict_text(&r.base),
                    verdict_text(&r.scaled)
                );
                let json = json!({ "command": "cross-check scaling", "poly": f.to_string(), "report": r.to_json() });
                if r.agree {
                    Ok(positive(json, text))
                } else {
                    Err(Failure::Negative(json, text))
                }
            }
        },
        Command::Chain { d, c, k1, k2 } => {
            let w = chain_witness(*d, *c, *k1, *k2, &opts.scope()).map_err(verify_failure)?;
            let text = format!(
                "{} is an identity for (-{}, {}, {})^(inf,{k1},inf) but not for k = {k2}",
                w.poly, w.b, w.c, w.a
            );
            let mut json = w.to_json();
            json["command"] = json!("chain");
            Ok(positive(json, text))
        }
    }
}

fn emit(json_mode: bool, mut json: Value, text: &str) {
    if json_mode {
        json["schema"] = json!(SCHEMA);
        println!(
            "{}",
            serde_json::to_string_pretty(&json).expect("serializable output")
        );
    } else {
        println!("{text}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.opts.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(out) => {
            emit(cli.opts.json, out.json, &out.text);
            if out.positive {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(Failure::Negative(json, text)) => {
            emit(cli.opts.json, json, &text);
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            if cli.opts.json {
                println!("{}", json!({ "schema": SCHEMA, "error": msg }));
            }
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
