use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use csb_core::clustering::{elbow_optimal_k, kmeans, sse_curve, ClusterConfig, KChoice};
use csb_core::discernibility::ReductConfig;
use csb_core::model::{
    min_max_normalize, parse_labels, validate_information_system, DefinitionDocument, InformationSystem, WeightCheck,
};
use csb_core::pipeline::{decision_system, run_pipeline, PipelineConfig};
use csb_core::ranking::{ranked_list_csv, ranked_list_json, ranked_list_table, score_contributions};
use csb_core::reduct::{
    alpha_grid, enumerate_all_reducts_with_limit, select_best_reduct, summarize_reducts, sweep_alpha, Reduct,
};
use csb_core::registry::RegistryStore;
use csb_core::sim::bench::{run_benchmark, BenchConfig};
use csb_core::sim::broker::{run_scenario, ScenarioConfig};
use csb_core::sim::SimConfig;
use csb_core::{casestudy, Error};

#[derive(Parser)]
#[command(name = "csb", version, about = "Cloud service provider ranking and brokerage")]
struct Cli {
    /// Do not print the timestamped header line to stderr.
    #[arg(long, global = true)]
    no_banner: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Table,
}

#[derive(clap::Args, Clone)]
struct Input {
    /// Information system, JSON or CSV (CSV needs --schema).
    #[arg(long)]
    is: PathBuf,
    /// Attribute schema JSON for a CSV information system.
    #[arg(long)]
    schema: Option<PathBuf>,
}

#[derive(clap::Args, Clone)]
struct Clustering {
    /// Number of clusters, or `auto` for the elbow method.
    #[arg(long, default_value = "auto")]
    k: String,
    #[arg(long, default_value_t = 25)]
    nstart: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Subcommand)]
enum Command {
    /// Check an information system and optionally a definition document and labels.
    Validate {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        request: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long)]
        allow_unbalanced_weights: bool,
    },
    /// Cluster providers with k-means and print decision labels.
    Cluster {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        clustering: Clustering,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Enumerate every reduct and mark the one chosen for a request.
    Reducts {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        request: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, default_value_t = 0.15)]
        alpha: f64,
        #[command(flatten)]
        clustering: Clustering,
        #[arg(long)]
        allow_unbalanced_weights: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rank providers for a definition document.
    Rank {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        request: PathBuf,
        /// Decision labels JSON (provider id to label); skips clustering.
        #[arg(long)]
        labels: Option<PathBuf>,
        /// Reduct JSON (array of attribute names); skips reduct search.
        #[arg(long)]
        reduct: Option<PathBuf>,
        #[arg(long, default_value_t = 0.15)]
        alpha: f64,
        #[command(flatten)]
        clustering: Clustering,
        /// Rank over all attributes.
        #[arg(long)]
        no_reduction: bool,
        /// Also print the chosen reduct, weights and score contributions.
        #[arg(long)]
        explain: bool,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Warn instead of failing when a category's user weights do not sum to 1.
        #[arg(long)]
        allow_unbalanced_weights: bool,
    },
    /// Reduct statistics over a grid of alpha values (CSV).
    SweepAlpha {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, default_value_t = 0.05)]
        step: f64,
        #[command(flatten)]
        clustering: Clustering,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Register, rank, select, execute, give feedback and re-rank.
    Simulate {
        /// Information system; defaults to the built-in case study.
        #[arg(long)]
        is: Option<PathBuf>,
        #[arg(long, requires = "is")]
        request: Option<PathBuf>,
        #[arg(long)]
        labels: Option<PathBuf>,
        #[arg(long, default_value_t = 0.15)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        tasks: usize,
        #[arg(long, default_value_t = 50)]
        hosts: usize,
        #[arg(long, default_value_t = 9)]
        feedback: i64,
        /// Directory for the monitoring log, SLA records and documents.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Time full against reduced ranking over synthetic providers (CSV).
    Bench {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        runs: usize,
        /// Small sweeps for a quick check.
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Record a satisfaction level for a provider in a registry store file.
    Feedback {
        #[arg(long)]
        store: PathBuf,
        /// Create the store from this information system if it does not exist.
        #[arg(long)]
        init_from: Option<PathBuf>,
        #[arg(long)]
        provider: String,
        #[arg(long)]
        level: i64,
        #[arg(long, default_value = "Feedback")]
        attribute: String,
    },
}

fn error_kind(e: &Error) -> &'static str {
    match e {
        Error::Parse(_) => "parse",
        Error::Validation(_) => "validation",
        Error::InvalidK(_) => "invalid-k",
        Error::MissingLabel(_) => "missing-label",
        Error::TooManyAttributes { .. } => "too-many-attributes",
        Error::EmptyRds => "empty-rds",
        Error::SchemaMismatch(_) => "schema-mismatch",
        Error::BackendUnavailable(_) => "backend-unavailable",
        Error::UnknownAttribute(_) => "unknown-attribute",
        Error::EmptyRegistry => "empty-registry",
        Error::UnknownProvider(_) => "unknown-provider",
        Error::NotRanked { .. } => "not-ranked",
        Error::OutOfRange(_) => "out-of-range",
        Error::Io { .. } => "io",
    }
}

/// Writes to stdout, ignoring a closed pipe.
macro_rules! say {
    ($($arg:tt)*) => {{
        let _ = write!(std::io::stdout(), $($arg)*);
    }};
}

macro_rules! sayln {
    ($($arg:tt)*) => {{
        let _ = writeln!(std::io::stdout(), $($arg)*);
    }};
}

fn read(path: &Path) -> Result<Vec<u8>, Error> {
    std::fs::read(path).map_err(|e| Error::io(path, e))
}

fn write_out(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn load_is(input: &Input) -> Result<InformationSystem, Error> {
    let bytes = read(&input.is)?;
    let is = if input.is.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        let schema = input
            .schema
            .as_ref()
            .ok_or_else(|| Error::Validation("--schema is required for a CSV information system".into()))?;
        InformationSystem::from_csv(&bytes, &read(schema)?)?
    } else {
        InformationSystem::from_json(&bytes)?
    };
    validate_information_system(&is).into_result()?;
    Ok(is)
}

fn weight_check(allow_unbalanced: bool) -> WeightCheck {
    if allow_unbalanced {
        WeightCheck::Lenient
    } else {
        WeightCheck::PerCategory
    }
}

fn load_request(path: &Path, is: &InformationSystem, check: WeightCheck) -> Result<DefinitionDocument, Error> {
    let doc = DefinitionDocument::from_json(&read(path)?)?;
    doc.validate_with(&is.schema, check)?;
    Ok(doc)
}

fn load_labels(path: Option<&PathBuf>) -> Result<Option<BTreeMap<String, u32>>, Error> {
    path.map(|p| read(p).and_then(|b| parse_labels(&b))).transpose()
}

fn cluster_config(c: &Clustering) -> Result<ClusterConfig, Error> {
    let k = if c.k.eq_ignore_ascii_case("auto") {
        KChoice::Auto
    } else {
        KChoice::Fixed(
            c.k.parse()
                .map_err(|_| Error::InvalidK(format!("k: `{}` is neither `auto` nor an integer", c.k)))?,
        )
    };
    Ok(ClusterConfig {
        k,
        nstart: c.nstart,
        seed: c.seed,
        ..ClusterConfig::default()
    })
}

fn pipeline_config(
    alpha: f64,
    clustering: &Clustering,
    labels: Option<&PathBuf>,
    check: WeightCheck,
) -> Result<PipelineConfig, Error> {
    Ok(PipelineConfig {
        reduct: ReductConfig::with_alpha(alpha)?,
        cluster: cluster_config(clustering)?,
        labels: load_labels(labels)?,
        weight_check: check,
        ..PipelineConfig::default()
    })
}

/// Prints to stdout, or writes to `out` when given.
fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        Some(path) => write_out(path, text),
        None => {
            say!("{text}");
            Ok(())
        }
    }
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Validate {
            input,
            request,
            labels,
            allow_unbalanced_weights,
        } => {
            let is = load_is(&input)?;
            if let Some(path) = request {
                load_request(&path, &is, weight_check(allow_unbalanced_weights))?;
            }
            let labels = load_labels(labels.as_ref())?;
            if let Some(labels) = labels {
                csb_core::model::DecisionSystem::new(is.clone(), labels)?;
            }
            sayln!(
                "ok: {} attributes, {} providers",
                is.schema.len(),
                is.providers.len()
            );
        }
        Command::Cluster {
            input,
            clustering,
            format,
            out,
        } => {
            let is = load_is(&input)?;
            let config = cluster_config(&clustering)?;
            let matrix = min_max_normalize(&is);
            let assignment = kmeans(&matrix, &config)?;
            let k = assignment.centroids.len();
            let curve = match config.k {
                KChoice::Auto => Some((
                    sse_curve(&matrix, 10.min(matrix.n_rows() - 1), &config)?,
                    elbow_optimal_k(&matrix, &config)?,
                )),
                KChoice::Fixed(_) => None,
            };
            let text = match format {
                Format::Json => {
                    let mut doc = json!({ "k": k, "sse": assignment.sse, "labels": assignment.labels });
                    if let Some((sse, _)) = &curve {
                        doc["sse_curve"] = json!(sse);
                    }
                    serde_json::to_string_pretty(&doc).expect("json") + "\n"
                }
                Format::Csv => {
                    let mut s = String::from("provider_id,label\n");
                    for p in &is.providers {
                        let _ = writeln!(s, "{},{}", p.id, assignment.labels[&p.id]);
                    }
                    s
                }
                Format::Table => {
                    let mut s = format!("k = {k}, SSE = {:.3}\n", assignment.sse);
                    if let Some((sse, _)) = &curve {
                        for (i, v) in sse.iter().enumerate() {
                            let _ = writeln!(s, "  SSE(k={}) = {v:.3}", i + 1);
                        }
                    }
                    for p in &is.providers {
                        let _ = writeln!(s, "{:<28} {}", p.display_name, assignment.labels[&p.id]);
                    }
                    s
                }
            };
            emit(out.as_ref(), &text)?;
        }
        Command::Reducts {
            input,
            request,
            labels,
            alpha,
            clustering,
            allow_unbalanced_weights,
            out,
        } => {
            let is = load_is(&input)?;
            let check = weight_check(allow_unbalanced_weights);
            let config = pipeline_config(alpha, &clustering, labels.as_ref(), check)?;
            let doc = match &request {
                Some(path) => load_request(path, &is, check)?,
                None => DefinitionDocument {
                    user_id: "none".into(),
                    requests: Vec::new(),
                },
            };
            let ds = decision_system(&is, &config)?;
            let clauses = csb_core::discernibility::build_clause_set(&ds, &config.reduct);
            let reducts = enumerate_all_reducts_with_limit(&clauses, config.reduct.max_attributes)?;
            let chosen = select_best_reduct(&reducts, &doc, &is.schema)?;
            let doc = json!({
                "alpha": alpha,
                "clauses": clauses.clauses.len(),
                "count": reducts.len(),
                "chosen": chosen,
                "reducts": summarize_reducts(&reducts, &chosen, &doc, &is.schema),
            });
            emit(out.as_ref(), &(serde_json::to_string_pretty(&doc).expect("json") + "\n"))?;
        }
        Command::Rank {
            input,
            request,
            labels,
            reduct,
            alpha,
            clustering,
            no_reduction,
            explain,
            format,
            out,
            allow_unbalanced_weights,
        } => {
            let is = load_is(&input)?;
            let check = weight_check(allow_unbalanced_weights);
            let mut config = pipeline_config(alpha, &clustering, labels.as_ref(), check)?;
            let doc = load_request(&request, &is, check)?;
            if let Some(path) = &reduct {
                let names: BTreeSet<String> = serde_json::from_slice(&read(path)?)
                    .map_err(|e| Error::Parse(format!("reduct {}: {e}", path.display())))?;
                config.reduct_override = Some(Reduct::new(names));
            }
            config.reduction = !no_reduction;
            let outcome = run_pipeline(&is, &doc, &config)?;
            let entries = &outcome.ranking.entries;
            let artifact = match format {
                Format::Json => ranked_list_json(entries) + "\n",
                Format::Csv => ranked_list_csv(entries),
                Format::Table => ranked_list_table(entries),
            };
            match &out {
                Some(path) => {
                    write_out(path, &artifact)?;
                    say!("{}", ranked_list_table(entries));
                }
                None => say!("{artifact}"),
            }
            if explain {
                say!("{}", explanation(&outcome));
            }
        }
        Command::SweepAlpha {
            input,
            labels,
            step,
            clustering,
            out,
        } => {
            let is = load_is(&input)?;
            let config = pipeline_config(0.15, &clustering, labels.as_ref(), WeightCheck::PerCategory)?;
            let alphas = alpha_grid(step)?;
            let ds = decision_system(&is, &config)?;
            let rows = sweep_alpha(&ds, &alphas)?;
            let mut s = String::from(
                "alpha,reduct_count,min_size,max_size,min_dynamic,max_dynamic,min_static,max_static\n",
            );
            for r in rows {
                let _ = writeln!(
                    s,
                    "{:.2},{},{},{},{},{},{},{}",
                    r.alpha, r.reduct_count, r.min_size, r.max_size, r.min_dynamic, r.max_dynamic, r.min_static, r.max_static
                );
            }
            emit(out.as_ref(), &s)?;
        }
        Command::Simulate {
            is,
            request,
            labels,
            alpha,
            seed,
            tasks,
            hosts,
            feedback,
            out_dir,
        } => {
            let sim = SimConfig {
                seed,
                tasks_per_request: tasks,
                hosts_per_provider: hosts,
                ..SimConfig::default()
            };
            sim.validate()?;
            let config = ScenarioConfig {
                sim,
                alpha,
                feedback_level: feedback,
            };
            let (is, doc, labels) = match &is {
                Some(path) => {
                    let is = load_is(&Input {
                        is: path.clone(),
                        schema: None,
                    })?;
                    let doc = match &request {
                        Some(r) => load_request(r, &is, WeightCheck::Lenient)?,
                        None => return Err(Error::Validation("--request is required with --is".into())),
                    };
                    (is, doc, load_labels(labels.as_ref())?)
                }
                None => (
                    casestudy::information_system(),
                    casestudy::effective_request(),
                    Some(load_labels(labels.as_ref())?.unwrap_or_else(casestudy::labels)),
                ),
            };
            let pipeline = PipelineConfig {
                reduct: ReductConfig::with_alpha(alpha)?,
                labels,
                weight_check: WeightCheck::Lenient,
                ..PipelineConfig::default()
            };
            if let Some(dir) = &out_dir {
                std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
            }
            let t = run_scenario(&is, &doc, pipeline, &config, out_dir.as_deref())?;
            sayln!("initial ranking:\n{}", t.first_ranking_csv);
            sayln!("selected: {}", t.selected);
            sayln!("sla: {}", t.sla_json);
            sayln!("log entries: {}", t.log_csv.lines().count() - 1);
            sayln!("feedback stored: {}", t.feedback_stored);
            sayln!("re-ranking:\n{}", t.second_ranking_csv);
        }
        Command::Bench { seed, runs, quick, out } => {
            let mut config = BenchConfig {
                seed,
                runs,
                ..BenchConfig::default()
            };
            if quick {
                config.request_counts = vec![1, 10, 100];
                config.provider_counts = vec![10, 50, 100];
                config.sweep_b_requests = 10;
            }
            let report = run_benchmark(&config)?;
            emit(out.as_ref(), &report.to_csv())?;
        }
        Command::Feedback {
            store,
            init_from,
            provider,
            level,
            attribute,
        } => {
            let mut registry = if store.exists() {
                RegistryStore::open(&store)?
            } else {
                let source = init_from.ok_or_else(|| {
                    Error::io(
                        &store,
                        std::io::Error::new(std::io::ErrorKind::NotFound, "store missing and no --init-from"),
                    )
                })?;
                let is = load_is(&Input {
                    is: source,
                    schema: None,
                })?;
                let mut registry = RegistryStore::from_information_system(&is)?;
                registry.persist_to(&store)?;
                registry
            };
            let stored = registry.record_feedback(&provider, &attribute, level)?;
            sayln!("{provider}: {attribute} = {stored} (version {})", registry.version);
        }
    }
    Ok(())
}

fn explanation(outcome: &csb_core::pipeline::PipelineOutcome) -> String {
    let mut s = String::new();
    let table = &outcome.ranking.table;
    if let Some(chosen) = &outcome.chosen {
        let names: Vec<&str> = chosen.attributes.iter().map(String::as_str).collect();
        let _ = writeln!(s, "\nchosen reduct: {}", names.join(", "));
    }
    let _ = writeln!(
        s,
        "reduction: {} -> {} attributes ({:.2}%)",
        outcome.report.is_attributes, outcome.report.rds_attributes, outcome.report.percent
    );
    let _ = writeln!(s, "\n{:<16} {:>8} {:>8} {:>8}", "attribute", "system", "user", "combined");
    for w in &outcome.ranking.weights.entries {
        let user = w.user_weight.map_or("-".to_string(), |u| format!("{u:.3}"));
        let _ = writeln!(
            s,
            "{:<16} {:>8.4} {:>8} {:>8.4}",
            w.attribute, w.system_weight, user, w.combined
        );
    }
    let _ = writeln!(s, "\nsquared contributions per attribute:");
    let _ = writeln!(s, "provider,{}", table.attributes.join(","));
    let contributions = score_contributions(table);
    for (id, row) in table.provider_ids.iter().zip(&contributions) {
        let cells: Vec<String> = row.iter().map(|c| format!("{c:.3}")).collect();
        let _ = writeln!(s, "{id},{}", cells.join(","));
    }
    s
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if !cli.no_banner {
        let now = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map_or(0, |d| d.as_secs());
        eprintln!("# csb {} at unix time {now}", env!("CARGO_PKG_VERSION"));
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let line = e.to_string().replace('\n', " ");
            eprintln!("error[{}]: {line}", error_kind(&e));
            ExitCode::from(if e.is_io() { 3 } else { 2 })
        }
    }
}
