use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use om_forge::acceptance::{criterion_id, AcceptanceOptions, Campaign, Outcome, CRITERIA};
use om_forge::classify::{classify, mutation_graph_bfs, summary_table, BfsOptions, ClassifyOptions, MandelStatus};
use om_forge::extensions::{lex_extend, mandel_from_euclidean_mutant, perturb_extension, LexExtensionSpec};
use om_forge::faces::{adjacency_table, flip, l_statistic, mutation_from_basis, mutations, topes};
use om_forge::io::{self, Format};
use om_forge::programs::{analyze_cycle, euclidean_all, reduce_cycle_chordless, Program};
use om_forge::{Chirotope, ElementSet, Error, OrientedMatroid, SignVector};

/// Oriented matroid toolkit: cocircuit graphs, Euclideaness, lexicographic extensions,
/// mutation flips and classification.
#[derive(Parser, Debug)]
#[command(name = "om-forge", version)]
struct RunConfig {
    /// Seed for every random choice, echoed in the output.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Write JSON here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Wall-clock budget; exceeding it gives exit code 2 after the result is written.
    #[arg(long, global = true)]
    time_ms: Option<u64>,
    /// Suppress the human-readable tables on stderr.
    #[arg(short, long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the chirotope or cocircuit axioms of a file.
    Validate { file: PathBuf },
    /// List the cocircuits.
    Cocircuits { file: PathBuf },
    /// List the topes.
    Topes { file: PathBuf },
    /// Mutations, per-element adjacency and L.
    Mutations { file: PathBuf },
    /// Euclideaness of one program, with a directed cycle if there is one.
    Euclidean {
        #[arg(long)]
        g: usize,
        #[arg(long)]
        f: usize,
        file: PathBuf,
    },
    /// Euclideaness of every program.
    EuclideanAll { file: PathBuf },
    /// Lexicographic extension, e.g. `--spec "0:+,3:-,5:+"`.
    Lexext {
        #[arg(long)]
        spec: LexExtensionSpec,
        /// Also write the extension as .chi or .ccj.
        #[arg(long)]
        save: Option<PathBuf>,
        file: PathBuf,
    },
    /// Flip the mutation on a basis, e.g. `--basis "0,1,2,3"`.
    Flip {
        #[arg(long)]
        basis: String,
        #[arg(long)]
        save: Option<PathBuf>,
        file: PathBuf,
    },
    /// Move element `e` off the cocircuit `X` to its negative side.
    Perturb {
        #[arg(long)]
        element: usize,
        #[arg(long)]
        cocircuit: SignVector,
        #[arg(long)]
        save: Option<PathBuf>,
        file: PathBuf,
    },
    /// Classification report; exit 2 if the Mandel search is undetermined.
    Classify {
        #[arg(long, default_value_t = 2000)]
        max_candidates: usize,
        /// Classify the dual too, side by side.
        #[arg(long)]
        dual: bool,
        file: PathBuf,
    },
    /// Breadth-first search over mutation flips from a uniform seed.
    MutationGraph {
        #[arg(long = "seed", value_name = "FILE")]
        seed_file: PathBuf,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = 5000)]
        max_nodes: usize,
        /// Per-node Euclideaness and L.
        #[arg(long)]
        summarize: bool,
    },
    /// Mandel witness from a Euclidean mutant; `--mutation` lists `f` first.
    MandelPipeline {
        #[arg(long)]
        mutation: String,
        #[arg(long)]
        g: usize,
        #[arg(long)]
        save: Option<PathBuf>,
        file: PathBuf,
    },
    /// L ranges per rank and class over several files.
    Summary {
        #[arg(long, default_value_t = 2000)]
        max_candidates: usize,
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Run acceptance criteria by id (`C5`) or name (`lex-suite`); all when none given.
    Acceptance {
        suites: Vec<String>,
        #[arg(long, default_value_t = 5000)]
        max_nodes: usize,
    },
}

/// How a command ended once its output is written.
enum Status {
    Ok,
    Undetermined,
    Invalid,
}

fn main() -> ExitCode {
    let cfg = RunConfig::parse();
    if let Some(n) = std::env::var("OM_FORGE_THREADS").ok().and_then(|s| s.parse::<usize>().ok()) {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("warning: OM_FORGE_THREADS ignored: {e}");
        }
    }
    let start = Instant::now();
    match run(&cfg) {
        Ok(status) => {
            let over = cfg.time_ms.is_some_and(|ms| start.elapsed().as_millis() > u128::from(ms));
            if over {
                eprintln!("time budget of {} ms exceeded", cfg.time_ms.unwrap_or_default());
            }
            match status {
                Status::Invalid => ExitCode::from(3),
                Status::Undetermined => ExitCode::from(2),
                Status::Ok if over => ExitCode::from(2),
                Status::Ok => ExitCode::SUCCESS,
            }
        }
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<Error>() {
        Some(Error::InvalidChirotope(_) | Error::InvalidCocircuits(_) | Error::Verification(_)) => 3,
        _ => 1,
    }
}

fn emit(cfg: &RunConfig, mut value: Value) -> anyhow::Result<()> {
    if let Value::Object(map) = &mut value {
        map.insert("seed".into(), json!(cfg.seed));
    }
    let text = serde_json::to_string_pretty(&value)?;
    match &cfg.out {
        Some(path) => std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            match writeln!(stdout, "{text}") {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => return Err(e.into()),
                _ => {}
            }
        }
    }
    Ok(())
}

fn table(cfg: &RunConfig, text: &str) {
    if !cfg.quiet {
        eprint!("{text}");
    }
}

/// Reads any supported file; cocircuit files must satisfy the axioms.
fn load(path: &Path) -> anyhow::Result<OrientedMatroid> {
    let om = io::read(path).with_context(|| format!("reading {}", path.display()))?;
    if Format::from_path(path)? == Format::Cocircuits {
        let report = om.validate();
        if !report.ok {
            let first = &report.violations[0];
            return Err(Error::InvalidCocircuits(format!("{}: {}", first.axiom, first.witness)))
                .with_context(|| path.display().to_string());
        }
    }
    Ok(om)
}

fn parse_elements(text: &str) -> anyhow::Result<Vec<usize>> {
    text.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| anyhow!("bad element {t:?} in {text:?}")))
        .collect()
}

fn save(om: &OrientedMatroid, path: &Option<PathBuf>) -> anyhow::Result<()> {
    if let Some(p) = path {
        io::write(om, p).with_context(|| format!("writing {}", p.display()))?;
    }
    Ok(())
}

fn describe(om: &OrientedMatroid) -> Value {
    json!({
        "n": om.n(),
        "rank": om.rank(),
        "uniform": om.is_uniform(),
        "chirotope": om.chirotope().map(Chirotope::sign_string),
        "cocircuits": om.cocircuits().iter().map(|x| x.to_string()).collect::<Vec<_>>(),
    })
}

fn run(cfg: &RunConfig) -> anyhow::Result<Status> {
    match &cfg.command {
        Command::Validate { file } => validate(cfg, file),
        Command::Cocircuits { file } => {
            let om = load(file)?;
            let list: Vec<String> = om.cocircuits().iter().map(|x| x.to_string()).collect();
            emit(cfg, json!({"n": om.n(), "rank": om.rank(), "count": list.len(), "cocircuits": list}))?;
            Ok(Status::Ok)
        }
        Command::Topes { file } => {
            let om = load(file)?;
            let list: Vec<String> = topes(&om).iter().map(|t| t.to_string()).collect();
            emit(cfg, json!({"n": om.n(), "rank": om.rank(), "count": list.len(), "topes": list}))?;
            Ok(Status::Ok)
        }
        Command::Mutations { file } => {
            let om = load(file)?;
            let certs = mutations(&om);
            let adjacency = adjacency_table(om.n(), &certs);
            let l = l_statistic(&om, &adjacency);
            let mut text = String::from("element  adjacent mutations\n");
            for (e, k) in adjacency.iter().enumerate() {
                text.push_str(&format!("{:>7}  {k}\n", om.label(e)));
            }
            text.push_str(&format!("{} mutations, L = {}\n", certs.len(), l.map_or("-".into(), |l| l.to_string())));
            table(cfg, &text);
            let list: Vec<Value> =
                certs.iter().map(|c| json!({"basis": c.basis, "tope": c.tope.to_string()})).collect();
            emit(cfg, json!({"count": certs.len(), "mutations": list, "adjacency": adjacency, "L": l}))?;
            Ok(Status::Ok)
        }
        Command::Euclidean { g, f, file } => {
            let om = load(file)?;
            let p = Program::new(&om, *g, *f)?;
            let verdict = p.is_euclidean();
            let mut out = json!({"g": g, "f": f, "euclidean": verdict.euclidean, "witness": verdict.witness});
            if let Some(w) = &verdict.witness {
                let chordless = reduce_cycle_chordless(&p, w)?;
                out["chordless"] = json!(chordless);
                out["elements"] = json!(analyze_cycle(&p, &chordless));
            }
            emit(cfg, out)?;
            Ok(Status::Ok)
        }
        Command::EuclideanAll { file } => {
            let om = load(file)?;
            let verdicts = euclidean_all(&om);
            let n = om.n();
            let mut matrix = vec![vec![Value::Null; n]; n];
            for v in &verdicts {
                matrix[v.g][v.f] = json!(v.euclidean);
            }
            let mut text = String::from("rows g, columns f: '.' Euclidean, 'x' directed cycle\n");
            for row in &matrix {
                let cells: String = row
                    .iter()
                    .map(|c| match c {
                        Value::Bool(true) => '.',
                        Value::Bool(false) => 'x',
                        _ => ' ',
                    })
                    .collect();
                text.push_str(&cells);
                text.push('\n');
            }
            table(cfg, &text);
            let euclidean = verdicts.iter().filter(|v| v.euclidean).count();
            emit(
                cfg,
                json!({
                    "programs": verdicts.len(),
                    "euclidean_programs": euclidean,
                    "euclidean": euclidean == verdicts.len(),
                    "totally_non_euclidean": !verdicts.is_empty() && euclidean == 0,
                    "matrix": matrix,
                }),
            )?;
            Ok(Status::Ok)
        }
        Command::Lexext { spec, save: target, file } => {
            let om = load(file)?;
            let ext = lex_extend(&om, spec)?;
            save(&ext, target)?;
            emit(cfg, json!({"spec": spec, "new_element": om.n(), "extension": describe(&ext)}))?;
            Ok(Status::Ok)
        }
        Command::Flip { basis, save: target, file } => {
            let om = load(file)?;
            let b: ElementSet = parse_elements(basis)?.into_iter().collect();
            let Some(cert) = mutation_from_basis(&om, b)? else {
                emit(cfg, json!({"basis": b, "mutation": false}))?;
                eprintln!("{:?} is not a mutation", b.to_vec());
                return Ok(Status::Invalid);
            };
            let mutant = flip(&om, &cert)?;
            save(&mutant, target)?;
            emit(cfg, json!({"basis": b, "mutation": true, "tope": cert.tope.to_string(), "mutant": describe(&mutant)}))?;
            Ok(Status::Ok)
        }
        Command::Perturb { element, cocircuit, save: target, file } => {
            let om = load(file)?;
            let out = perturb_extension(&om, cocircuit, *element)?;
            save(&out, target)?;
            emit(cfg, json!({"element": element, "cocircuit": cocircuit, "perturbed": describe(&out)}))?;
            Ok(Status::Ok)
        }
        Command::Classify { max_candidates, dual, file } => {
            let om = load(file)?;
            let opts = ClassifyOptions { mandel_budget: *max_candidates };
            let report = classify(&om, opts)?;
            let mut undetermined = report.mandel_status == MandelStatus::Undetermined;
            let value = if *dual {
                let dual_report = classify(&om.dual()?, opts)?;
                undetermined |= dual_report.mandel_status == MandelStatus::Undetermined;
                json!({"primal": report, "dual": dual_report})
            } else {
                serde_json::to_value(&report)?
            };
            emit(cfg, value)?;
            Ok(if undetermined { Status::Undetermined } else { Status::Ok })
        }
        Command::MutationGraph { seed_file, depth, max_nodes, summarize } => {
            let om = load(seed_file)?;
            let opts = BfsOptions {
                max_nodes: *max_nodes,
                max_depth: depth.unwrap_or(usize::MAX),
                summarize: *summarize,
                ..BfsOptions::default()
            };
            let graph = mutation_graph_bfs(&om, opts)?;
            let capped = graph.nodes.len() >= *max_nodes && !graph.closed;
            table(
                cfg,
                &format!(
                    "{} classes, {}{}\n",
                    graph.nodes.len(),
                    if graph.closed { "closed" } else { "not closed" },
                    if graph.inexact_keys { ", some keys inexact" } else { "" }
                ),
            );
            emit(cfg, serde_json::to_value(&graph)?)?;
            Ok(if capped || graph.inexact_keys { Status::Undetermined } else { Status::Ok })
        }
        Command::MandelPipeline { mutation, g, save: target, file } => {
            let om = load(file)?;
            let elems = parse_elements(mutation)?;
            let Some(&f) = elems.first() else { bail!("empty mutation") };
            let b: ElementSet = elems.iter().copied().collect();
            let cert = mutation_from_basis(&om, b)?.ok_or_else(|| Error::Verification(format!("{elems:?} is not a mutation")))?;
            let m = mandel_from_euclidean_mutant(&om, &cert, f, *g)?;
            save(&m.extended, target)?;
            let mut value = serde_json::to_value(&m)?;
            value["infinity_role_euclidean"] = json!(m.infinity_role_euclidean());
            value["extension"] = describe(&m.extended);
            emit(cfg, value)?;
            Ok(Status::Ok)
        }
        Command::Summary { max_candidates, files } => {
            let opts = ClassifyOptions { mandel_budget: *max_candidates };
            let reports = files
                .iter()
                .map(|f| Ok(classify(&load(f)?, opts)?))
                .collect::<anyhow::Result<Vec<_>>>()?;
            let rows = summary_table(&reports);
            let mut text = format!("{:<18} {:>4} {:>6} {:>5} {:>5}\n", "class", "rank", "count", "minL", "maxL");
            let show = |l: Option<usize>| l.map_or("-".to_string(), |l| l.to_string());
            for r in &rows {
                text.push_str(&format!("{:<18} {:>4} {:>6} {:>5} {:>5}\n", r.class, r.rank, r.count, show(r.min_l), show(r.max_l)));
            }
            table(cfg, &text);
            emit(cfg, json!({"files": files, "rows": rows, "reports": reports}))?;
            Ok(Status::Ok)
        }
        Command::Acceptance { suites, max_nodes } => acceptance(cfg, suites, *max_nodes),
    }
}

fn validate(cfg: &RunConfig, file: &Path) -> anyhow::Result<Status> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let report = match Format::from_path(file)? {
        Format::Chirotope => Chirotope::parse(&text)?.validate(),
        Format::Points => io::parse(&text, Format::Points)?.validate(),
        Format::Cocircuits => io::parse_cocircuits(&text)?.validate(),
    };
    let ok = report.ok;
    emit(cfg, serde_json::to_value(&report)?)?;
    Ok(if ok { Status::Ok } else { Status::Invalid })
}

fn acceptance(cfg: &RunConfig, suites: &[String], max_nodes: usize) -> anyhow::Result<Status> {
    let ids: Vec<usize> = if suites.is_empty() || suites.iter().any(|s| s == "all") {
        CRITERIA.iter().map(|&(id, _)| id).collect()
    } else {
        suites
            .iter()
            .map(|s| {
                criterion_id(s).ok_or_else(|| {
                    let names: Vec<&str> = CRITERIA.iter().map(|&(_, n)| n).collect();
                    anyhow!("unknown suite {s:?}; expected one of {}", names.join(", "))
                })
            })
            .collect::<anyhow::Result<_>>()?
    };
    let opts = AcceptanceOptions { seed: cfg.seed, eight_point_max_nodes: max_nodes, ..AcceptanceOptions::default() };
    let campaign = Campaign::new(opts);
    let mut reports = Vec::new();
    for id in ids {
        let report = campaign.run(id);
        table(cfg, &format!("{}\n", report.line()));
        reports.push(report);
    }
    let status = if reports.iter().any(|r| r.outcome == Outcome::Fail) {
        Status::Invalid
    } else if reports.iter().any(|r| r.outcome == Outcome::Undetermined) {
        Status::Undetermined
    } else {
        Status::Ok
    };
    emit(cfg, json!({"options": campaign.options(), "criteria": reports}))?;
    Ok(status)
}
