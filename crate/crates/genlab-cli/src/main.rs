//! Command-line surface: load posets and systems, run the worked examples
//! and experiments, emit machine-readable results.
//!
//! Exit codes: 0 success, 2 input error, 3 cap refusal, 4 verification
//! failure.

use std::fs;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use genlab::bitset::BitSet;
use genlab::boolalg::{filter_sentence_values, regular_algebra};
use genlab::expr;
use genlab::fixtures;
use genlab::forcing;
use genlab::generic::{
    born_simulate, frequency_report, verify_certificate, BornParams, ChooserPolicy,
    FrequencyConfig, GenericBuildSpec, GenericError,
};
use genlab::order::FinitePoset;
use genlab::psys::{self, AbstractPS, PsysError, SemifilterCaps};
use genlab::quantum::{self, QuantumError};

const SCHEMA: &str = "genlab/1";

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Parser)]
#[command(
    name = "genlab",
    version,
    about = "Regular algebras, generic filters, semifilter logic, Born statistics, and forcing names at desk scale"
)]
struct Cli {
    /// Output format (csv only where a command defines a tabular form)
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    /// Seed for seeded policies and corpus generation
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Refuse enumerations estimated beyond this budget
    #[arg(long, global = true)]
    cap_seconds: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Separativity, the regular algebra, the embedding, and the three
    /// filter-sentence values of a poset
    Reg {
        /// Poset JSON file: { "elements": [...], "leq": [["p","q"],...] }
        poset: PathBuf,
    },
    /// Build a generic filter by the descending-sequence construction
    Generic {
        poset: PathBuf,
        /// Start condition (element name); defaults to a maximum element
        #[arg(long)]
        start: Option<String>,
        /// Dense family as JSON: [["p","q"],...] (list of element-name sets),
        /// or @file
        #[arg(long, default_value = "[]")]
        family: String,
        #[arg(long, value_enum, default_value = "lex")]
        policy: Policy,
    },
    /// Born-statistics simulation with a genericity certificate
    Born {
        #[arg(long)]
        q: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 20)]
        mmax: u32,
        #[arg(long, default_value_t = 512)]
        nmax: usize,
        #[arg(long, value_enum, default_value = "lex")]
        policy: Policy,
        /// Write the per-step CSV here
        #[arg(long)]
        out_csv: Option<PathBuf>,
        /// Write the JSON certificate here
        #[arg(long)]
        out_cert: Option<PathBuf>,
        /// JSON file with descriptive-test thresholds
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Parse, canonicalize, and optionally evaluate a boolean expression
    Expr {
        text: String,
        /// Atom count of the target algebra for evaluation
        #[arg(long)]
        atoms: Option<usize>,
        /// Assignment "0:0,1;2:1" mapping primitive indices to atom lists
        #[arg(long)]
        assign: Option<String>,
    },
    /// Semifilter logic on a propositional system
    Psys {
        /// System: a JSON file path, or one of "@malley", "@spin:K", "@ks18"
        system: String,
        #[command(subcommand)]
        analysis: PsysCmd,
    },
    /// Build concrete projection systems
    Quantum {
        #[command(subcommand)]
        builder: QuantumCmd,
    },
    /// Truth-lemma verification and name evaluation over a forcing poset
    Force {
        poset: PathBuf,
        /// Number of generated sentences
        #[arg(long, default_value_t = 100)]
        corpus: usize,
        /// Ground-universe rank bound
        #[arg(long, default_value_t = 2)]
        rank: usize,
        /// Evaluate a name literal (check(<hf>), gname, {[name,elem],...})
        /// under --filter instead of running the truth lemma
        #[arg(long)]
        eval: Option<String>,
        /// Filter base for --eval: comma-separated element names
        #[arg(long)]
        filter: Option<String>,
    },
    /// Transitive collapse of an extensional well-founded relation
    Collapse {
        #[arg(long)]
        nodes: usize,
        /// Edges "x<y,..." meaning x is a member of y
        #[arg(long, default_value = "")]
        edges: String,
    },
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Policy {
    Lex,
    Seeded,
}

#[derive(Subcommand)]
enum PsysCmd {
    /// Brute-force reductivity with a counterexample witness
    Reductive,
    /// Enumerate the complete semifilters and their order
    Conditions,
    /// Search for an ultrasemifilter
    Ultra,
    /// Evaluate the three theory sentences
    Tr,
    /// The noncommuting-pair measure table
    Malley {
        /// Four atom weights "w1,w2,w3,w4" (default uniform)
        #[arg(long)]
        weights: Option<String>,
    },
}

#[derive(Subcommand)]
enum QuantumCmd {
    /// Spin-1/2 system from measurement directions
    Spin {
        /// Inline directions "x,y,z;x,y,z;..."
        #[arg(long, conflicts_with = "file")]
        directions: Option<String>,
        /// Direction file: { "directions": [[x,y,z],...] }
        #[arg(long)]
        file: Option<PathBuf>,
        /// Write the abstract system JSON here
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// System generated by a ray file (defaults to the shipped 18-ray set)
    Ks {
        #[arg(long)]
        rays: Option<PathBuf>,
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

enum CliError {
    Input(String),
    Cap(String),
    Verify(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Cap(_) => 3,
            CliError::Verify(_) => 4,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Input(m) | CliError::Cap(m) | CliError::Verify(m) => m,
        }
    }
}

impl From<PsysError> for CliError {
    fn from(e: PsysError) -> Self {
        match e {
            PsysError::CapExceeded { .. } | PsysError::TimeBudgetExceeded { .. } => {
                CliError::Cap(e.to_string())
            }
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<QuantumError> for CliError {
    fn from(e: QuantumError) -> Self {
        match e {
            QuantumError::ClosureCapExceeded(_) => CliError::Cap(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<GenericError> for CliError {
    fn from(e: GenericError) -> Self {
        match e {
            GenericError::CertificateMismatch(_) => CliError::Verify(e.to_string()),
            GenericError::CapExceeded(_) => CliError::Cap(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

impl From<forcing::ForcingError> for CliError {
    fn from(e: forcing::ForcingError) -> Self {
        CliError::Input(e.to_string())
    }
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", e.message());
            e.code()
        }
    });
}

fn emit(format: Format, value: &Value, text: impl FnOnce() -> String) -> Result<(), CliError> {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(value).unwrap()),
        Format::Text => println!("{}", text()),
        Format::Csv => {
            return Err(CliError::Input(
                "csv output is only defined for the born command".into(),
            ))
        }
    }
    Ok(())
}

fn load_poset(path: &PathBuf) -> Result<FinitePoset, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
    FinitePoset::from_json(&text).map_err(CliError::Input)
}

fn caps_from(cap_seconds: Option<f64>) -> SemifilterCaps {
    let mut caps = SemifilterCaps::default();
    if let Some(s) = cap_seconds {
        caps.time_budget = Some(Duration::from_secs_f64(s));
    }
    caps
}

fn format_set(poset: &FinitePoset, s: &BitSet) -> String {
    let names: Vec<&str> = s.iter().map(|i| poset.name(i)).collect();
    format!("{{{}}}", names.join(","))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Reg { poset } => cmd_reg(cli.format, &poset),
        Command::Generic {
            poset,
            start,
            family,
            policy,
        } => cmd_generic(cli.format, &poset, start, &family, policy, cli.seed),
        Command::Born {
            q,
            n,
            mmax,
            nmax,
            policy,
            out_csv,
            out_cert,
            config,
        } => cmd_born(
            cli.format, q, n, mmax, nmax, policy, cli.seed, out_csv, out_cert, config,
        ),
        Command::Expr {
            text,
            atoms,
            assign,
        } => cmd_expr(cli.format, &text, atoms, assign),
        Command::Psys { system, analysis } => {
            cmd_psys(cli.format, &system, analysis, cli.cap_seconds)
        }
        Command::Quantum { builder } => cmd_quantum(cli.format, builder),
        Command::Force {
            poset,
            corpus,
            rank,
            eval,
            filter,
        } => cmd_force(cli.format, &poset, corpus, rank, eval, filter, cli.seed),
        Command::Collapse { nodes, edges } => cmd_collapse(cli.format, nodes, &edges),
    }
}

fn cmd_reg(format: Format, path: &PathBuf) -> Result<(), CliError> {
    let poset = load_poset(path)?;
    let separative = poset.is_separative();
    let (ra, values) = filter_sentence_values(&poset);
    let one = ra.algebra().one();
    let atom_names: Vec<String> = (0..ra.atoms())
        .map(|a| poset.name(ra.atom_element(a)).to_string())
        .collect();
    let embed: Vec<(String, Vec<String>)> = (0..poset.len())
        .map(|p| {
            (
                poset.name(p).to_string(),
                ra.embed(p).iter().map(|a| atom_names[a].clone()).collect(),
            )
        })
        .collect();
    let validity_flags: Vec<u8> = values.iter().map(|v| u8::from(*v == one)).collect();
    let value = json!({
        "schema": SCHEMA,
        "separative": separative,
        "atoms": ra.atoms(),
        "atom_elements": atom_names,
        "embed": embed.iter().map(|(p, atoms)| json!({"element": p, "atoms": atoms})).collect::<Vec<_>>(),
        "validities": validity_flags,
    });
    emit(format, &value, || {
        let mut out = format!("separative: {separative}\natoms: {}\n", ra.atoms());
        for (p, atoms) in &embed {
            out.push_str(&format!("embed {p} -> {{{}}}\n", atoms.join(",")));
        }
        out.push_str(&format!(
            "validities: {}",
            validity_flags
                .iter()
                .map(u8::to_string)
                .collect::<Vec<_>>()
                .join(",")
        ));
        out
    })
}

fn cmd_generic(
    format: Format,
    path: &PathBuf,
    start: Option<String>,
    family_arg: &str,
    policy: Policy,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let poset = load_poset(path)?;
    let family_text = if let Some(file) = family_arg.strip_prefix('@') {
        fs::read_to_string(file).map_err(|e| CliError::Input(format!("{file}: {e}")))?
    } else {
        family_arg.to_string()
    };
    let names: Vec<Vec<String>> =
        serde_json::from_str(&family_text).map_err(|e| CliError::Input(e.to_string()))?;
    let mut family = Vec::new();
    for set in &names {
        let mut s = poset.empty_set();
        for n in set {
            s.insert(
                poset
                    .element(n)
                    .map_err(|e| CliError::Input(e.to_string()))?,
            );
        }
        family.push(s);
    }
    let start = match start {
        Some(name) => poset
            .element(&name)
            .map_err(|e| CliError::Input(e.to_string()))?,
        None => poset
            .top()
            .ok_or_else(|| CliError::Input("poset has no maximum; pass --start".into()))?,
    };
    let policy = resolve_policy(policy, seed)?;
    let built = build_generic_checked(&poset, start, family.clone(), policy)?;
    let generic = poset
        .is_generic(&built.filter, &family)
        .map_err(|e| CliError::Input(e.to_string()))?;
    let value = json!({
        "schema": SCHEMA,
        "chain": built.chain.iter().map(|&p| poset.name(p)).collect::<Vec<_>>(),
        "filter": built.filter.iter().map(|p| poset.name(p)).collect::<Vec<_>>(),
        "generic": generic,
    });
    emit(format, &value, || {
        format!(
            "chain: {}\nfilter: {}\ngeneric: {generic}",
            built
                .chain
                .iter()
                .map(|&p| poset.name(p))
                .collect::<Vec<_>>()
                .join(" -> "),
            format_set(&poset, &built.filter)
        )
    })
}

fn build_generic_checked(
    poset: &FinitePoset,
    start: usize,
    family: Vec<BitSet>,
    policy: ChooserPolicy,
) -> Result<genlab::generic::GenericBuild, CliError> {
    genlab::generic::build_generic(&GenericBuildSpec {
        poset,
        start,
        family,
        policy,
    })
    .map_err(CliError::from)
}

fn resolve_policy(policy: Policy, seed: Option<u64>) -> Result<ChooserPolicy, CliError> {
    Ok(match policy {
        Policy::Lex => ChooserPolicy::Lexicographic,
        Policy::Seeded => ChooserPolicy::Seeded(
            seed.ok_or_else(|| CliError::Input("seeded policy requires --seed".into()))?,
        ),
    })
}

#[allow(clippy::too_many_arguments)]
fn cmd_born(
    format: Format,
    q: f64,
    n: usize,
    mmax: u32,
    nmax: usize,
    policy: Policy,
    seed: Option<u64>,
    out_csv: Option<PathBuf>,
    out_cert: Option<PathBuf>,
    config: Option<PathBuf>,
) -> Result<(), CliError> {
    let thresholds = match config {
        None => FrequencyConfig::default(),
        Some(path) => {
            let text = fs::read_to_string(&path)
                .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            serde_json::from_str(&text).map_err(|e| CliError::Input(e.to_string()))?
        }
    };
    let policy = resolve_policy(policy, seed)?;
    let run = born_simulate(&BornParams {
        q,
        n_bits: n,
        m_max: mmax,
        n_max: nmax,
        policy,
    })?;
    verify_certificate(&run, mmax, nmax)?;
    let means = run.running_means();
    let csv = {
        let mut s = String::from("step,bit,running_mean\n");
        for (i, (&b, m)) in run.bits.iter().zip(&means).enumerate() {
            s.push_str(&format!("{},{},{:.10}\n", i + 1, b, m));
        }
        s
    };
    if let Some(path) = &out_csv {
        fs::write(path, &csv).map_err(|e| CliError::Input(e.to_string()))?;
    }
    let cert_json = json!({
        "schema": SCHEMA,
        "q": run.q,
        "n": run.bits.len(),
        "m_max": mmax,
        "n_max": nmax,
        "families_met": run.certificate.iter().filter(|e| e.met).count(),
        "families_total": run.certificate.len(),
        "certificate": run.certificate,
    });
    if let Some(path) = &out_cert {
        fs::write(path, serde_json::to_string_pretty(&cert_json).unwrap())
            .map_err(|e| CliError::Input(e.to_string()))?;
    }
    let report = frequency_report(&run.bits, q, &thresholds);
    match format {
        Format::Csv => print!("{csv}"),
        Format::Json => println!(
            "{}",
            serde_json::to_string_pretty(&json!({
                "schema": SCHEMA,
                "q": q,
                "n": n,
                "mean": report.mean,
                "deviation": report.deviation,
                "longest_run": report.longest_run,
                "families_met": run.certificate.iter().filter(|e| e.met).count(),
                "families_total": run.certificate.len(),
                "report": report,
            }))
            .unwrap()
        ),
        Format::Text => {
            println!(
                "n: {}\nmean: {:.6}\ndeviation: {:.6}\nlongest run: {}\nfamilies met: {}/{}",
                n,
                report.mean,
                report.deviation,
                report.longest_run,
                run.certificate.iter().filter(|e| e.met).count(),
                run.certificate.len()
            );
        }
    }
    Ok(())
}

fn cmd_expr(
    format: Format,
    text: &str,
    atoms: Option<usize>,
    assign: Option<String>,
) -> Result<(), CliError> {
    let parsed = expr::parse(text).map_err(|e| CliError::Input(e.to_string()))?;
    let mut value = json!({
        "schema": SCHEMA,
        "canonical": expr::print(&parsed),
        "rank": parsed.rank(),
        "subexpressions": parsed.subexpressions().len(),
        "borel": parsed.is_borel(),
    });
    let mut eval_line = String::new();
    if let Some(k) = atoms {
        if k == 0 || k > 20 {
            return Err(CliError::Input("atoms must lie in 1..=20".into()));
        }
        let algebra = genlab::boolalg::FiniteBooleanAlgebra::new(k);
        let mut pairs = Vec::new();
        if let Some(assign) = assign {
            for part in assign.split(';').filter(|p| !p.is_empty()) {
                let (idx, atom_list) = part
                    .split_once(':')
                    .ok_or_else(|| CliError::Input(format!("bad assignment {part:?}")))?;
                let i: usize = idx
                    .trim()
                    .parse()
                    .map_err(|_| CliError::Input(format!("bad primitive index {idx:?}")))?;
                let mut e = algebra.zero();
                for a in atom_list.split(',').filter(|a| !a.trim().is_empty()) {
                    let a: usize = a
                        .trim()
                        .parse()
                        .map_err(|_| CliError::Input(format!("bad atom {a:?}")))?;
                    if a >= k {
                        return Err(CliError::Input(format!("atom {a} out of range")));
                    }
                    e.insert(a);
                }
                pairs.push((i, e));
            }
        }
        let interp = expr::Interpretation::new(&algebra, pairs);
        let result =
            expr::evaluate(&parsed, &interp).map_err(|e| CliError::Input(e.to_string()))?;
        let atoms_list: Vec<usize> = result.iter().collect();
        value["value_atoms"] = json!(atoms_list);
        eval_line = format!("\nvalue atoms: {atoms_list:?}");
    }
    emit(format, &value, || {
        format!(
            "canonical: {}\nrank: {}\nsubexpressions: {}\nborel: {}{}",
            expr::print(&parsed),
            parsed.rank(),
            parsed.subexpressions().len(),
            parsed.is_borel(),
            eval_line
        )
    })
}

fn load_system(spec: &str) -> Result<AbstractPS, CliError> {
    if spec == "@malley" {
        return Ok(fixtures::malley_ps());
    }
    if spec == "@ks18" {
        let file = quantum::parse_ray_file(fixtures::KS18_JSON)?;
        let system = quantum::ks_system(&file, quantum::DEFAULT_CLOSURE_CAP)?;
        return Ok(AbstractPS::from_prop_system(&system)?);
    }
    if let Some(k) = spec.strip_prefix("@spin:") {
        let k: usize = k
            .parse()
            .map_err(|_| CliError::Input(format!("bad direction count {k:?}")))?;
        if k == 0 || k > 4 {
            return Err(CliError::Input("@spin:K supports 1..=4 directions".into()));
        }
        let system = quantum::spin_half_system(&fixtures::spin_directions(k))?;
        return Ok(AbstractPS::from_prop_system(&system)?);
    }
    let text = fs::read_to_string(spec).map_err(|e| CliError::Input(format!("{spec}: {e}")))?;
    Ok(AbstractPS::from_json(&text)?)
}

fn cmd_psys(
    format: Format,
    system: &str,
    analysis: PsysCmd,
    cap_seconds: Option<f64>,
) -> Result<(), CliError> {
    let ps = load_system(system)?;
    let caps = caps_from(cap_seconds);
    match analysis {
        PsysCmd::Reductive => {
            let report = psys::is_reductive(&ps, &caps)?;
            let witness = report.witness.as_ref().map(
                |(s, p)| json!({"premises": ps.format_subset(s), "proposition": ps.label(*p)}),
            );
            let value = json!({
                "schema": SCHEMA,
                "reductive": report.reductive,
                "witness": witness,
            });
            emit(format, &value, || match &report.witness {
                None => format!("reductive: {}", report.reductive),
                Some((s, p)) => format!(
                    "reductive: false\nwitness: premises {} fail to entail {}",
                    ps.format_subset(s),
                    ps.label(*p)
                ),
            })
        }
        PsysCmd::Conditions => {
            let cp = psys::condition_poset(&ps, &caps)?;
            let maximal = cp.poset.minimal_elements().count();
            let value = json!({
                "schema": SCHEMA,
                "conditions": cp.conditions.len(),
                "maximal": maximal,
                "separative": cp.poset.is_separative(),
                "list": cp.conditions.iter().map(|c| ps.format_subset(c)).collect::<Vec<_>>(),
            });
            emit(format, &value, || {
                let mut out = format!(
                    "conditions: {}\nmaximal: {maximal}\nseparative: {}\n",
                    cp.conditions.len(),
                    cp.poset.is_separative()
                );
                for c in &cp.conditions {
                    out.push_str(&format!("  {}\n", ps.format_subset(c)));
                }
                out.pop();
                out
            })
        }
        PsysCmd::Ultra => {
            let found = psys::ultrasemifilter_search(&ps, &caps)?;
            let value = json!({
                "schema": SCHEMA,
                "found": found.is_some(),
                "ultrasemifilter": found.as_ref().map(|f| ps.format_subset(f)),
            });
            emit(format, &value, || match &found {
                Some(f) => format!("ultrasemifilter: {}", ps.format_subset(f)),
                None => "none (exhaustive)".to_string(),
            })
        }
        PsysCmd::Tr => {
            let cp = psys::condition_poset(&ps, &caps)?;
            let tv = psys::t_r_validities(&ps, &cp, &caps)?;
            let one = tv.reg.algebra().one();
            let flags: Vec<u8> = tv.values.iter().map(|v| u8::from(*v == one)).collect();
            let value = json!({
                "schema": SCHEMA,
                "clauses": flags,
                "all_valid": flags.iter().all(|&f| f == 1),
            });
            emit(format, &value, || {
                format!(
                    "theory clauses: {}",
                    flags
                        .iter()
                        .map(u8::to_string)
                        .collect::<Vec<_>>()
                        .join(",")
                )
            })
        }
        PsysCmd::Malley { weights } => {
            let cp = psys::condition_poset(&ps, &caps)?;
            let reg = regular_algebra(&cp.poset);
            let w = match weights {
                None => [0.25; 4],
                Some(text) => {
                    let parts: Vec<f64> = text
                        .split(',')
                        .map(|p| p.trim().parse::<f64>())
                        .collect::<Result<_, _>>()
                        .map_err(|e| CliError::Input(e.to_string()))?;
                    let arr: [f64; 4] = parts
                        .try_into()
                        .map_err(|_| CliError::Input("need exactly 4 weights".into()))?;
                    arr
                }
            };
            let table = psys::measure_table(&ps, &cp, &w)?;
            let value = json!({
                "schema": SCHEMA,
                "conditions": cp.conditions.len(),
                "maximal": cp.poset.minimal_elements().count(),
                "atoms": reg.atoms(),
                "table": table,
            });
            emit(format, &value, || {
                format!(
                    "conditions: {}; maximal: {}; atoms: {}\n\
                     mu({p}) = {:.6}   mu(~{p}) = {:.6}\n\
                     mu({q}) = {:.6}   mu(~{q}) = {:.6}\n\
                     marginals hold: {}",
                    cp.conditions.len(),
                    cp.poset.minimal_elements().count(),
                    reg.atoms(),
                    table.mu_p,
                    table.mu_compl_p,
                    table.mu_q,
                    table.mu_compl_q,
                    table.marginals_ok,
                    p = table.p_label,
                    q = table.q_label,
                )
            })
        }
    }
}

fn cmd_quantum(format: Format, builder: QuantumCmd) -> Result<(), CliError> {
    let (system, label) = match &builder {
        QuantumCmd::Spin {
            directions, file, ..
        } => {
            let dirs: Vec<[f64; 3]> = match (directions, file) {
                (Some(inline), None) => inline
                    .split(';')
                    .map(|d| {
                        let parts: Vec<f64> = d
                            .split(',')
                            .map(|x| x.trim().parse::<f64>())
                            .collect::<Result<_, _>>()
                            .map_err(|e| CliError::Input(e.to_string()))?;
                        let arr: [f64; 3] = parts
                            .try_into()
                            .map_err(|_| CliError::Input("directions are 3-vectors".into()))?;
                        Ok::<_, CliError>(arr)
                    })
                    .collect::<Result<_, _>>()?,
                (None, Some(path)) => {
                    let text = fs::read_to_string(path)
                        .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                    quantum::parse_direction_file(&text)?.directions
                }
                _ => {
                    return Err(CliError::Input(
                        "pass exactly one of --directions or --file".into(),
                    ))
                }
            };
            (quantum::spin_half_system(&dirs)?, "spin")
        }
        QuantumCmd::Ks { rays, .. } => {
            let text = match rays {
                Some(path) => fs::read_to_string(path)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?,
                None => fixtures::KS18_JSON.to_string(),
            };
            let file = quantum::parse_ray_file(&text)?;
            (
                quantum::ks_system(&file, quantum::DEFAULT_CLOSURE_CAP)?,
                "rays",
            )
        }
    };
    let export = match &builder {
        QuantumCmd::Spin { export, .. } | QuantumCmd::Ks { export, .. } => export.clone(),
    };
    let ps = AbstractPS::from_prop_system(&system)?;
    if let Some(path) = export {
        let text = serde_json::to_string_pretty(&ps.to_json()).unwrap();
        fs::write(&path, text).map_err(|e| CliError::Input(e.to_string()))?;
    }
    let mut rank_histogram: Vec<(i64, usize)> = Vec::new();
    for e in system.elements() {
        let r = e.matrix().trace().re.round() as i64;
        match rank_histogram.iter_mut().find(|(rank, _)| *rank == r) {
            Some((_, count)) => *count += 1,
            None => rank_histogram.push((r, 1)),
        }
    }
    rank_histogram.sort_unstable();
    let value = json!({
        "schema": SCHEMA,
        "kind": label,
        "dim": system.dim(),
        "elements": system.len(),
        "rank_histogram": rank_histogram,
    });
    emit(format, &value, || {
        format!(
            "kind: {label}\ndim: {}\nelements: {}\nrank histogram: {}",
            system.dim(),
            system.len(),
            rank_histogram
                .iter()
                .map(|(r, c)| format!("{r}:{c}"))
                .collect::<Vec<_>>()
                .join(" ")
        )
    })
}

fn cmd_force(
    format: Format,
    path: &PathBuf,
    corpus: usize,
    rank: usize,
    eval: Option<String>,
    filter: Option<String>,
    seed: Option<u64>,
) -> Result<(), CliError> {
    let poset = load_poset(path)?;
    if let Some(name_text) = eval {
        let name = forcing::parse_name(&poset, &name_text)?;
        let filter_text =
            filter.ok_or_else(|| CliError::Input("--eval requires --filter".into()))?;
        let mut base = poset.empty_set();
        for n in filter_text.split(',').filter(|n| !n.trim().is_empty()) {
            base.insert(
                poset
                    .element(n.trim())
                    .map_err(|e| CliError::Input(e.to_string()))?,
            );
        }
        let filter = poset.upset(&base);
        if !poset.is_filter(&filter) {
            return Err(CliError::Input(
                "--filter base must generate a filter".into(),
            ));
        }
        let result = forcing::eval_name(&name, &filter);
        let value = json!({
            "schema": SCHEMA,
            "filter": filter.iter().map(|p| poset.name(p)).collect::<Vec<_>>(),
            "value": result.to_string(),
        });
        return emit(format, &value, || {
            format!("filter: {}\nvalue: {result}", format_set(&poset, &filter))
        });
    }
    if rank > 3 {
        return Err(CliError::Input("rank bound is capped at 3".into()));
    }
    let universe = forcing::universe_up_to_rank(rank);
    let sentences =
        forcing::generate_sentence_corpus(&poset, &universe, corpus, seed.unwrap_or(1009))?;
    let report = forcing::truth_lemma_check(&poset, &universe, &sentences)?;
    let ok = report.discrepancies.is_empty();
    let value = json!({
        "schema": SCHEMA,
        "generics": report.generics,
        "sentences": report.sentences,
        "checks": report.checks,
        "discrepancies": report.discrepancies.len(),
    });
    emit(format, &value, || {
        format!(
            "generics: {}\nsentences: {}\nchecks: {}\ndiscrepancies: {}",
            report.generics,
            report.sentences,
            report.checks,
            report.discrepancies.len()
        )
    })?;
    if !ok {
        return Err(CliError::Verify(format!(
            "{} truth-lemma discrepancies",
            report.discrepancies.len()
        )));
    }
    Ok(())
}

fn cmd_collapse(format: Format, nodes: usize, edges: &str) -> Result<(), CliError> {
    if nodes == 0 || nodes > 12 {
        return Err(CliError::Input("nodes must lie in 1..=12".into()));
    }
    let mut parsed = Vec::new();
    for part in edges.split(',').filter(|p| !p.trim().is_empty()) {
        let (x, y) = part
            .split_once('<')
            .ok_or_else(|| CliError::Input(format!("bad edge {part:?}; use x<y")))?;
        let x: usize = x
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("bad node {x:?}")))?;
        let y: usize = y
            .trim()
            .parse()
            .map_err(|_| CliError::Input(format!("bad node {y:?}")))?;
        if x >= nodes || y >= nodes {
            return Err(CliError::Input(format!("edge {part:?} out of range")));
        }
        parsed.push((x, y));
    }
    let collapse = forcing::transitive_collapse(nodes, &parsed)?;
    let value = json!({
        "schema": SCHEMA,
        "collapse": collapse.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        "ranks": collapse.iter().map(forcing::HfSet::rank).collect::<Vec<_>>(),
    });
    emit(format, &value, || {
        collapse
            .iter()
            .enumerate()
            .map(|(n, s)| format!("{n} -> {s}"))
            .collect::<Vec<_>>()
            .join("\n")
    })
}
