//! Command-line front end. Every command prints one JSON report on standard
//! output; diagnostics go to standard error.
//!
//! Exit codes: 0 when a verdict was reached, 1 for unreadable or malformed
//! input, 2 for budget or precondition failures, 3 when `selfcheck` finds a
//! disagreement.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use rand::rngs::StdRng;
use rand::SeedableRng;
use serde::Serialize;
use serde_json::{json, Value as Json};
use sha2::{Digest, Sha256};

use crate::algebra::{essentially_unary_witness, polymorphisms_of_arity, SchaeferOp};
use crate::budget::Budget;
use crate::classify::{bounded_alternation_classify, qcsp_classify, schaefer_classify, PrefixKind};
use crate::equality::{decide_positive_qcsp, game_oracle_eval, positive_qcsp_reduce, satisfying_partition, EqSentence};
use crate::error::Error;
use crate::model::{
    parse_instance, parse_language, parse_qcsp, write_instance, write_language, write_qcsp, ConstraintLanguage,
    CspInstance, Operation, QcspInstance, Quantifier,
};
use crate::oracle::{brute_eval_qcsp, brute_solve, pp_closure};
use crate::qcsp::{pi2_decide, prefix_pattern, AssignmentFamily};
use crate::reductions::{
    inline_reduce_csp, inline_reduce_qcsp, lift_constants_qcsp, lift_with_constants, negation_closure, negation_csp,
    negation_qcsp, synthesize_pp_definition, FewDefinition, QcspReduction,
};
use crate::solvers::{dispatch_solve, solve_with, Method};
use crate::{gen, qcsp};

pub const DEFAULT_SEED: u64 = 0x5eed;

#[derive(Parser, Debug)]
#[command(name = "polycsp", version, about = "Classify, solve and reduce boolean constraint languages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// CSP, QCSP and bounded-alternation classification of a language.
    Classify { language: PathBuf },
    /// Solve a CSP instance.
    Solve {
        language: PathBuf,
        instance: PathBuf,
        #[arg(long, default_value = "auto", value_parser = ["auto", "brute", "const0", "const1", "ac-and", "ac-or", "majority", "minority"])]
        method: String,
        /// Re-run the brute-force oracle and compare verdicts.
        #[arg(long)]
        verify: bool,
    },
    /// Decide a quantified instance.
    Qsolve {
        language: PathBuf,
        instance: PathBuf,
        #[arg(long, value_enum, default_value_t = QMethod::Auto)]
        method: QMethod,
        /// Universal-assignment family for pi2, e.g. `[<=1,false]|[<=0,true]`.
        #[arg(long)]
        family: Option<String>,
    },
    /// List the polymorphisms of a given arity.
    Polymorphisms {
        language: PathBuf,
        #[arg(long)]
        arity: usize,
    },
    /// Test whether the relations of TARGET are pp-definable from LANGUAGE.
    Ppmember { language: PathBuf, target: PathBuf },
    /// Apply a reduction to a language and optionally an instance.
    Reduce {
        #[arg(value_enum)]
        gadget: Gadget,
        language: PathBuf,
        instance: Option<PathBuf>,
        /// Language to inline pp-definitions into (pp-inline only).
        #[arg(long)]
        target: Option<PathBuf>,
        /// Quantifier of the pivot variable (negation on quantified input).
        #[arg(long, value_enum, default_value_t = Pivot::Exists)]
        pivot: Pivot,
        /// Write the output language here instead of embedding it.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the output instance here instead of embedding it.
        #[arg(long)]
        out_instance: Option<PathBuf>,
    },
    /// Decide a quantified equality sentence over an infinite domain.
    Eq {
        formula: String,
        #[arg(long, value_enum, default_value_t = EqMethod::Auto)]
        method: EqMethod,
    },
    /// Compare solvers with the brute-force oracles on random inputs.
    Selfcheck {
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        count: usize,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum QMethod {
    Auto,
    Pi2,
    Brute,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Gadget {
    LiftConstants,
    Negation,
    PpInline,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Pivot {
    Exists,
    Forall,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EqMethod {
    Auto,
    Reduce,
    Game,
}

enum CliError {
    Io(PathBuf, std::io::Error),
    Lib(Error),
    SelfcheckFailed(Json),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Lib(e)
    }
}

type CliResult<T> = Result<T, CliError>;

#[derive(Serialize)]
struct Report<'a> {
    command: &'a [String],
    inputs_digest: String,
    result: Json,
    timing: Timing,
}

#[derive(Serialize)]
struct Timing {
    elapsed_us: u128,
}

/// Inputs read so far, hashed into the report.
#[derive(Default)]
struct Inputs {
    hasher: Sha256,
}

impl Inputs {
    fn add(&mut self, bytes: &[u8]) {
        self.hasher.update((bytes.len() as u64).to_le_bytes());
        self.hasher.update(bytes);
    }

    fn read(&mut self, path: &Path) -> CliResult<String> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(path.to_path_buf(), e))?;
        self.add(text.as_bytes());
        Ok(text)
    }

    fn language(&mut self, path: &Path) -> CliResult<Arc<ConstraintLanguage>> {
        Ok(Arc::new(parse_language(&self.read(path)?)?))
    }

    fn digest(self) -> String {
        self.hasher.finalize().iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Parse `args` (program name first), run the command and return the exit
/// code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
        }
    };
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    let start = Instant::now();
    let mut inputs = Inputs::default();
    let outcome = Budget::from_env().map_err(CliError::from).and_then(|budget| execute(cli.command, &budget, &mut inputs));
    let (result, code) = match outcome {
        Ok(result) => (result, 0),
        Err(CliError::SelfcheckFailed(result)) => {
            let _ = writeln!(err, "error: selfcheck found disagreements");
            (result, 3)
        }
        Err(CliError::Io(path, e)) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
            return 1;
        }
        Err(CliError::Lib(e)) => {
            let _ = writeln!(err, "error: {e}");
            return if e.is_input_error() { 1 } else { 2 };
        }
    };
    let report = Report {
        command: &echo,
        inputs_digest: inputs.digest(),
        result,
        timing: Timing {
            elapsed_us: start.elapsed().as_micros(),
        },
    };
    let text = serde_json::to_string_pretty(&report).expect("reports serialize");
    let _ = writeln!(out, "{text}");
    code
}

fn execute(command: Command, budget: &Budget, inputs: &mut Inputs) -> CliResult<Json> {
    match command {
        Command::Classify { language } => classify(&*inputs.language(&language)?),
        Command::Solve {
            language,
            instance,
            method,
            verify,
        } => {
            let lang = inputs.language(&language)?;
            let inst = parse_instance(&inputs.read(&instance)?, lang)?;
            solve(&inst, &method, verify, budget)
        }
        Command::Qsolve {
            language,
            instance,
            method,
            family,
        } => {
            let lang = inputs.language(&language)?;
            let q = parse_qcsp(&inputs.read(&instance)?, lang)?;
            qsolve(&q, method, family.as_deref(), budget)
        }
        Command::Polymorphisms { language, arity } => polymorphisms(&*inputs.language(&language)?, arity, budget),
        Command::Ppmember { language, target } => {
            let lang = inputs.language(&language)?;
            let target = inputs.language(&target)?;
            ppmember(&lang, &target, budget)
        }
        Command::Reduce {
            gadget,
            language,
            instance,
            target,
            pivot,
            out,
            out_instance,
        } => {
            let lang = inputs.language(&language)?;
            let instance = instance.map(|p| inputs.read(&p)).transpose()?;
            let target = target.map(|p| inputs.language(&p)).transpose()?;
            let pivot = match pivot {
                Pivot::Exists => Quantifier::Exists,
                Pivot::Forall => Quantifier::Forall,
            };
            let (result, lang_text, inst_text) = reduce(gadget, lang, instance.as_deref(), target, pivot, budget)?;
            let mut result = result;
            emit(&mut result, "language", &lang_text, out.as_deref())?;
            if let Some(text) = inst_text {
                emit(&mut result, "instance", &text, out_instance.as_deref())?;
            }
            Ok(result)
        }
        Command::Eq { formula, method } => {
            inputs.add(formula.as_bytes());
            let s: EqSentence = formula.parse()?;
            eq(&s, method, budget)
        }
        Command::Selfcheck { seed, count } => selfcheck(seed, count, budget),
    }
}

fn emit(result: &mut Json, key: &str, text: &str, path: Option<&Path>) -> CliResult<()> {
    match path {
        Some(p) => {
            std::fs::write(p, text).map_err(|e| CliError::Io(p.to_path_buf(), e))?;
            result[format!("{key}_path")] = json!(p.display().to_string());
        }
        None => result[key] = json!(text),
    }
    Ok(())
}

fn classify(lang: &ConstraintLanguage) -> CliResult<Json> {
    let mut bounded = Vec::new();
    for k in 1..=4 {
        for kind in [PrefixKind::Pi, PrefixKind::Sigma] {
            let label = match kind {
                PrefixKind::Pi => format!("Pi{k}"),
                PrefixKind::Sigma => format!("Sigma{k}"),
            };
            let entry = match bounded_alternation_classify(lang, k, kind) {
                Ok(c) => json!({ "prefix_class": label, "classification": c }),
                Err(Error::UnsupportedPrefixClass(_)) => json!({ "prefix_class": label, "classification": null }),
                Err(e) => return Err(e.into()),
            };
            bounded.push(entry);
        }
    }
    Ok(json!({
        "csp": schaefer_classify(lang)?,
        "qcsp": qcsp_classify(lang)?,
        "bounded_alternation": bounded,
    }))
}

fn solve(inst: &CspInstance, method: &str, verify: bool, budget: &Budget) -> CliResult<Json> {
    let (method, assignment) = if method == "auto" {
        let r = dispatch_solve(inst)?;
        (r.method, r.assignment)
    } else {
        let m: Method = method.parse().map_err(|e: String| Error::Precondition(e))?;
        let a = solve_with(inst, m, budget)?;
        if let Some(a) = &a {
            if !inst.is_solution(a)? {
                return Err(Error::Internal(format!("{m} returned a non-solution")).into());
            }
        }
        (m, a)
    };
    let mut result = json!({
        "method": method,
        "satisfiable": assignment.is_some(),
        "assignment": assignment,
    });
    if verify {
        let oracle = brute_solve(inst, budget)?.is_some();
        result["verify"] = json!({
            "oracle_satisfiable": oracle,
            "agrees": oracle == assignment.is_some(),
        });
    }
    Ok(result)
}

fn qsolve(q: &QcspInstance, method: QMethod, family: Option<&str>, budget: &Budget) -> CliResult<Json> {
    let pattern = prefix_pattern(q);
    let class = pattern.class();
    let family = family.map(str::parse::<AssignmentFamily>).transpose()?;
    let mut result = json!({
        "pattern": pattern.to_string(),
        "prefix_class": pattern.class_label(),
    });
    let tractable = qcsp_classify(q.language())?.is_tractable();
    let chosen = match method {
        QMethod::Pi2 => "pi2",
        QMethod::Brute => "brute",
        QMethod::Auto => match class {
            None | Some((PrefixKind::Sigma, 1)) => "csp",
            Some((PrefixKind::Pi, 1 | 2)) if tractable => "pi2",
            _ => "brute",
        },
    };
    match chosen {
        "csp" => match dispatch_solve(q.csp()) {
            Ok(r) => {
                result["method"] = json!(format!("csp:{}", r.method));
                result["truth"] = json!(r.satisfiable);
                result["witness"] = json!(r.assignment);
            }
            Err(Error::NoTractableMethod) => {
                result["method"] = json!("brute");
                result["truth"] = json!(brute_eval_qcsp(q, budget)?);
            }
            Err(e) => return Err(e.into()),
        },
        "pi2" => {
            let fam = match family {
                Some(f) => f,
                None => AssignmentFamily::default_for(q.language())?,
            };
            let out = pi2_decide(q, &fam, budget, |inst| Ok(dispatch_solve(inst)?.assignment))?;
            result["method"] = json!("pi2");
            result["family"] = json!(fam.to_string());
            result["truth"] = json!(out.holds);
            result["certificate"] = json!(out.counterexample);
            result["members_checked"] = json!(out.members_checked);
        }
        _ => {
            result["method"] = json!("brute");
            result["truth"] = json!(brute_eval_qcsp(q, budget)?);
        }
    }
    Ok(result)
}

fn table_string(op: &Operation) -> String {
    let sep = if op.domain_size() > 10 { "," } else { "" };
    op.table().iter().map(ToString::to_string).collect::<Vec<_>>().join(sep)
}

fn polymorphisms(lang: &ConstraintLanguage, arity: usize, budget: &Budget) -> CliResult<Json> {
    let pols = polymorphisms_of_arity(lang, arity, budget)?;
    let ops: Vec<Json> = pols
        .iter()
        .map(|f| {
            let named = SchaeferOp::ALL.into_iter().find(|s| s.operation() == *f).map(SchaeferOp::name);
            json!({
                "table": table_string(f),
                "essentially_unary": essentially_unary_witness(f).is_some(),
                "named": named,
            })
        })
        .collect();
    Ok(json!({
        "arity": arity,
        "count": pols.len(),
        "all_essentially_unary": pols.iter().all(|f| essentially_unary_witness(f).is_some()),
        "operations": ops,
    }))
}

fn ppmember(lang: &ConstraintLanguage, target: &ConstraintLanguage, budget: &Budget) -> CliResult<Json> {
    let mut rows = Vec::new();
    for rel in target.relations() {
        let closure = pp_closure(rel, lang, budget)?;
        let member = closure.same_tuples(rel);
        let definition = if member {
            synthesize_pp_definition(rel, lang, budget)?.map(|d| d.to_string())
        } else {
            None
        };
        rows.push(json!({
            "relation": rel.name(),
            "member": member,
            "closure_size": closure.len(),
            "definition": definition,
        }));
    }
    Ok(json!({ "relations": rows }))
}

enum Parsed {
    Csp(CspInstance),
    Qcsp(QcspInstance),
}

fn parse_any(text: &str, lang: Arc<ConstraintLanguage>) -> CliResult<Parsed> {
    let quantified = text.lines().any(|l| l.trim_start().starts_with("prefix"));
    Ok(if quantified {
        Parsed::Qcsp(parse_qcsp(text, lang)?)
    } else {
        Parsed::Csp(parse_instance(text, lang)?)
    })
}

type Reduced = (Json, String, Option<String>);

fn reduce(
    gadget: Gadget,
    lang: Arc<ConstraintLanguage>,
    instance: Option<&str>,
    target: Option<Arc<ConstraintLanguage>>,
    pivot: Quantifier,
    budget: &Budget,
) -> CliResult<Reduced> {
    let parsed = instance.map(|t| parse_any(t, lang.clone())).transpose()?;
    match gadget {
        Gadget::LiftConstants => {
            let rels = lang.relations().map(lift_with_constants).collect::<crate::Result<Vec<_>>>()?;
            let out = ConstraintLanguage::with_relations(2, rels)?;
            let inst = match parsed {
                None => None,
                Some(Parsed::Qcsp(q)) => Some(write_qcsp(&lift_constants_qcsp(&q)?)),
                Some(Parsed::Csp(c)) => {
                    let prefix = c.variables().iter().map(|v| (Quantifier::Exists, v.clone())).collect();
                    Some(write_qcsp(&lift_constants_qcsp(&QcspInstance::new(c, prefix)?)?))
                }
            };
            Ok((json!({ "gadget": "lift-constants" }), write_language(&out), inst))
        }
        Gadget::Negation => {
            let rels = lang.relations().map(negation_closure).collect::<crate::Result<Vec<_>>>()?;
            let out = ConstraintLanguage::with_relations(2, rels)?;
            let inst = match parsed {
                None => None,
                Some(Parsed::Qcsp(q)) => Some(write_qcsp(&negation_qcsp(&q, pivot)?)),
                Some(Parsed::Csp(c)) => Some(write_instance(&negation_csp(&c)?)),
            };
            Ok((json!({ "gadget": "negation" }), write_language(&out), inst))
        }
        Gadget::PpInline => {
            let target = target.ok_or_else(|| Error::Precondition("pp-inline needs --target".into()))?;
            let mut defs = std::collections::BTreeMap::new();
            for rel in lang.relations() {
                let def = synthesize_pp_definition(rel, &target, budget)?.ok_or_else(|| {
                    Error::Precondition(format!("`{}` is not pp-definable from the target language", rel.name()))
                })?;
                defs.insert(rel.name().to_string(), def);
            }
            let shown: Vec<String> = defs.values().map(ToString::to_string).collect();
            let mut result = json!({ "gadget": "pp-inline", "definitions": shown });
            let inst = match parsed {
                None => None,
                Some(Parsed::Csp(c)) => Some(write_instance(&inline_reduce_csp(&c, &defs, target.clone())?)),
                Some(Parsed::Qcsp(q)) => {
                    let few: std::collections::BTreeMap<String, FewDefinition> =
                        defs.iter().map(|(k, d)| (k.clone(), d.to_few())).collect();
                    match inline_reduce_qcsp(&q, &few, target.clone())? {
                        QcspReduction::Instance(out) => Some(write_qcsp(&out)),
                        QcspReduction::ConstantFalse => {
                            result["constant_false"] = json!(true);
                            None
                        }
                    }
                }
            };
            Ok((result, write_language(&target), inst))
        }
    }
}

fn eq(s: &EqSentence, method: EqMethod, budget: &Budget) -> CliResult<Json> {
    let use_reduce = match method {
        EqMethod::Auto => s.is_positive(),
        EqMethod::Reduce => true,
        EqMethod::Game => false,
    };
    let mut result = json!({ "sentence": s.to_string(), "positive": s.is_positive() });
    if use_reduce {
        let reduced = positive_qcsp_reduce(s)?;
        let partition = satisfying_partition(&reduced, budget)?;
        result["method"] = json!("reduce");
        result["reduced"] = json!(reduced.to_string());
        result["truth"] = json!(partition.is_some());
        result["partition"] = json!(partition.map(|p| p.to_string()));
    } else {
        result["method"] = json!("game");
        result["truth"] = json!(game_oracle_eval(s, budget)?);
    }
    Ok(result)
}

fn selfcheck(seed: u64, count: usize, budget: &Budget) -> CliResult<Json> {
    let mut rng = StdRng::seed_from_u64(seed);
    let mut checks = serde_json::Map::new();
    let mut ok = true;
    let mut record = |name: String, cases: usize, mismatches: usize| {
        ok &= mismatches == 0;
        checks.insert(name, json!({ "cases": cases, "mismatches": mismatches }));
    };
    for op in SchaeferOp::ALL {
        let mut bad = 0;
        for _ in 0..count {
            let lang = Arc::new(gen::random_language(&mut rng, 3, 3, Some(op)));
            let n = rand::Rng::gen_range(&mut rng, 1..=8);
            let m = rand::Rng::gen_range(&mut rng, 0..=10);
            let inst = gen::random_csp(&mut rng, lang, n, m);
            let fast = dispatch_solve(&inst)?.satisfiable;
            if fast != brute_solve(&inst, budget)?.is_some() {
                bad += 1;
            }
        }
        record(format!("csp-{}", op.name()), count, bad);
    }
    for op in [SchaeferOp::And, SchaeferOp::Or, SchaeferOp::Majority, SchaeferOp::Minority] {
        let mut bad = 0;
        for _ in 0..count {
            let lang = Arc::new(gen::random_language(&mut rng, 3, 3, Some(op)));
            let ys = rand::Rng::gen_range(&mut rng, 0..=4);
            let xs = rand::Rng::gen_range(&mut rng, 0..=4);
            let m = rand::Rng::gen_range(&mut rng, 0..=6);
            let q = gen::random_pi2(&mut rng, lang, ys, xs, m);
            if qcsp::pi2_solve(&q, budget)?.holds != brute_eval_qcsp(&q, budget)? {
                bad += 1;
            }
        }
        record(format!("pi2-{}", op.name()), count, bad);
    }
    let mut bad = 0;
    for _ in 0..count {
        let n = rand::Rng::gen_range(&mut rng, 1..=6);
        let atoms = rand::Rng::gen_range(&mut rng, 1..=5);
        let s = gen::random_eq_sentence(&mut rng, n, atoms, true);
        if decide_positive_qcsp(&s, budget)? != game_oracle_eval(&s, budget)? {
            bad += 1;
        }
    }
    record("equality".into(), count, bad);
    let result = json!({ "seed": seed, "count": count, "checks": checks, "ok": ok });
    if ok {
        Ok(result)
    } else {
        Err(CliError::SelfcheckFailed(result))
    }
}
