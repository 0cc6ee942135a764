//! Command-line surface: one subcommand per pipeline stage, exit code 0 on
//! success, 1 on usage errors, 2 on data errors. Every random choice flows
//! from an explicit `--seed`.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};

use crate::credibility::{
    compute_features, credibility_rank, flagged_handles, write_credibility_tsv, CredibilityConfig,
};
use crate::error::{Error, Result};
use crate::evaluation::{
    calibrate, calibration_set_from_validation, classify, evaluate_ranking_with,
    parse_labelled_facts, ranking_summary, write_classification_tsv, write_metrics_tsv,
    write_ranking_report_tsv, RankMode,
};
use crate::fixture;
use crate::ingest::{
    load_mapping_rules, map_tabular, parse_table_tsv, parse_triples_tsv, parse_user_records,
    write_triples_tsv,
};
use crate::kg::{KnowledgeGraph, SplitTag};
use crate::models::{load_checkpoint, save_checkpoint, verify_dictionaries, ModelKind, Norm};
use crate::training::{
    random_search, train, write_trial_log, LossKind, OptimizerKind, RegularizerKind, SearchSpace,
    TrainingConfig,
};

#[derive(Parser)]
#[command(
    name = "kge",
    version,
    about = "Knowledge graph embedding pipeline: ingest, credibility-filter, split, train, evaluate, classify, cluster, project"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate the synthetic politics fixture (graph, users, side files).
    Fixture {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Build a dictionary-encoded store from a label-triple TSV.
    Ingest {
        #[arg(long)]
        triples: PathBuf,
        /// Store directory to create.
        #[arg(long)]
        out: PathBuf,
    },
    /// Map a tabular TSV to label triples through a mapping-rules file.
    Map {
        #[arg(long)]
        table: PathBuf,
        /// JSON array of mapping rules.
        #[arg(long)]
        rules: PathBuf,
        /// Output triples TSV.
        #[arg(long)]
        out: PathBuf,
    },
    /// Score user credibility per domain and rank users.
    CredScore {
        #[arg(long)]
        users: PathBuf,
        /// Credibility config JSON (domains, weights, thresholds).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Spam policy override: minimum DF/n domain breadth.
        #[arg(long)]
        breadth_threshold: Option<f64>,
        /// Spam policy override: minimum distinct-word ratio.
        #[arg(long)]
        repetition_threshold: Option<f64>,
        /// Output credibility.tsv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Drop spam-flagged users' facts before graph assembly.
    CredFilter {
        #[arg(long)]
        users: PathBuf,
        #[arg(long)]
        triples: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Spam policy override: minimum DF/n domain breadth.
        #[arg(long)]
        breadth_threshold: Option<f64>,
        /// Spam policy override: minimum distinct-word ratio.
        #[arg(long)]
        repetition_threshold: Option<f64>,
        /// Output directory (kept triples.tsv + credibility.tsv).
        #[arg(long)]
        out: PathBuf,
    },
    /// Tag the store's triples train/valid/test.
    Split {
        #[arg(long)]
        store: PathBuf,
        /// Comma-separated fractions, e.g. 0.8,0.1,0.1.
        #[arg(long, default_value = "0.8,0.1,0.1")]
        ratios: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Train one embedding model on the train split.
    Train(TrainArgs),
    /// Random hyperparameter search scored by validation MRR.
    Tune {
        #[arg(long)]
        store: PathBuf,
        #[arg(long, value_parser = ModelKind::from_str)]
        model: ModelKind,
        /// Search space JSON; defaults to the built-in space.
        #[arg(long)]
        space: Option<PathBuf>,
        /// Trial budget; defaults to the space's `trials` field.
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (trials.tsv + best-config.json).
        #[arg(long)]
        out: PathBuf,
    },
    /// Rank the test split and report MRR / MR / Hits@N.
    Eval {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Filtered protocol (default).
        #[arg(long, conflicts_with = "raw")]
        filtered: bool,
        /// Raw protocol.
        #[arg(long)]
        raw: bool,
        /// Rank test triples in parallel on this many threads.
        #[arg(long)]
        threads: Option<usize>,
        /// Output directory (report.tsv + metrics.tsv).
        #[arg(long)]
        out: PathBuf,
    },
    /// Calibrated triple classification over a labelled facts file.
    Classify {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Labelled facts TSV: subject, predicate, object, true|false.
        #[arg(long)]
        facts: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output directory (classification.tsv).
        #[arg(long)]
        out: PathBuf,
    },
    /// K-means over entity embeddings.
    Cluster {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 4)]
        clusters: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 300)]
        max_iter: usize,
        /// Cluster only entities whose label starts with this prefix.
        #[arg(long, conflicts_with = "ids")]
        prefix: Option<String>,
        /// Cluster only entities listed (one label per line) in this file.
        #[arg(long)]
        ids: Option<PathBuf>,
        /// Output clusters.tsv.
        #[arg(long)]
        out: PathBuf,
    },
    /// PCA-project entity embeddings to 2-D or 3-D.
    Project {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        #[arg(long, default_value_t = 2)]
        dims: usize,
        /// Output projection.tsv.
        #[arg(long)]
        out: PathBuf,
    },
    /// Export embeddings.tsv + metadata.tsv for projector tools.
    ExportProjector {
        #[arg(long)]
        store: PathBuf,
        #[arg(long)]
        checkpoint: PathBuf,
        /// Output directory.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    store: PathBuf,
    #[arg(long, value_parser = ModelKind::from_str)]
    model: ModelKind,
    /// Training config JSON; explicit flags below override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Checkpoint output directory.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    eta: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batches: Option<usize>,
    #[arg(long, value_parser = LossKind::from_str)]
    loss: Option<LossKind>,
    #[arg(long)]
    margin: Option<f64>,
    /// Optimizer name: sgd, adagrad or adam.
    #[arg(long)]
    optimizer: Option<String>,
    #[arg(long)]
    lr: Option<f64>,
    /// Regularizer name: none or lp.
    #[arg(long)]
    regularizer: Option<String>,
    /// LP regularizer strength.
    #[arg(long)]
    lambda: Option<f64>,
    /// LP regularizer exponent (1, 2 or 3).
    #[arg(long)]
    p: Option<u32>,
    /// TransE norm: l1 or l2.
    #[arg(long, value_parser = Norm::from_str)]
    norm: Option<Norm>,
    /// ConvKB filter count.
    #[arg(long)]
    filters: Option<usize>,
    #[arg(long)]
    verbose: bool,
}

impl TrainArgs {
    fn build_config(&self) -> Result<TrainingConfig> {
        let mut config = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
                serde_json::from_str(&text).map_err(|e| Error::Json {
                    path: path.clone(),
                    source: e,
                })?
            }
            None => TrainingConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(k) = self.k {
            config.k = k;
        }
        if let Some(eta) = self.eta {
            config.eta = eta;
        }
        if let Some(epochs) = self.epochs {
            config.epochs = epochs;
        }
        if let Some(batches) = self.batches {
            config.batches_count = batches;
        }
        if let Some(loss) = self.loss {
            config.loss = loss;
        }
        if let Some(margin) = self.margin {
            config.margin = margin;
        }
        if self.optimizer.is_some() || self.lr.is_some() {
            let name = self
                .optimizer
                .clone()
                .unwrap_or_else(|| config.optimizer.name().to_string());
            let lr = self.lr.unwrap_or_else(|| config.optimizer.lr());
            config.optimizer = OptimizerKind::from_name(&name, lr)?;
        }
        if self.regularizer.is_some() || self.lambda.is_some() || self.p.is_some() {
            let name = match &self.regularizer {
                Some(name) => name.clone(),
                None => match config.regularizer {
                    RegularizerKind::None => "lp".to_string(),
                    RegularizerKind::Lp { .. } => "lp".to_string(),
                },
            };
            config.regularizer = match name.as_str() {
                "none" => RegularizerKind::None,
                "lp" => {
                    let (mut lambda, mut p) = match config.regularizer {
                        RegularizerKind::Lp { lambda, p } => (lambda, p),
                        RegularizerKind::None => (1e-5, 2),
                    };
                    if let Some(l) = self.lambda {
                        lambda = l;
                    }
                    if let Some(pp) = self.p {
                        p = pp;
                    }
                    RegularizerKind::Lp { lambda, p }
                }
                other => {
                    return Err(Error::UnknownLabel {
                        kind: "regularizer",
                        label: other.to_string(),
                    })
                }
            };
        }
        if let Some(norm) = self.norm {
            config.transe_norm = norm;
        }
        if let Some(filters) = self.filters {
            config.num_filters = filters;
        }
        if self.verbose {
            config.verbose = true;
        }
        Ok(config)
    }
}

/// Parse and run; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    print!("{e}");
                    0
                }
                _ => {
                    eprint!("{e}");
                    1
                }
            };
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

fn load_store(dir: &Path) -> Result<KnowledgeGraph> {
    KnowledgeGraph::load(dir)
}

fn load_checkpoint_for(
    store: &Path,
    checkpoint: &Path,
) -> Result<(KnowledgeGraph, crate::models::ModelParameters)> {
    let kg = load_store(store)?;
    let (params, manifest) = load_checkpoint(checkpoint)?;
    verify_dictionaries(&manifest, &kg)?;
    Ok((kg, params))
}

fn cred_config(
    path: &Option<PathBuf>,
    breadth_threshold: Option<f64>,
    repetition_threshold: Option<f64>,
) -> Result<CredibilityConfig> {
    let mut config = match path {
        Some(p) => CredibilityConfig::load(p)?,
        None => CredibilityConfig::default(),
    };
    if let Some(breadth) = breadth_threshold {
        config.breadth_threshold = breadth;
    }
    if let Some(repetition) = repetition_threshold {
        config.repetition_threshold = repetition;
    }
    Ok(config)
}

fn parse_ratios(text: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 3 {
        return Err(Error::invalid(format!(
            "ratios must be three comma-separated fractions, got {text:?}"
        )));
    }
    let mut values = [0.0; 3];
    for (v, p) in values.iter_mut().zip(&parts) {
        *v = p
            .trim()
            .parse()
            .map_err(|_| Error::invalid(format!("invalid ratio {p:?}")))?;
    }
    Ok((values[0], values[1], values[2]))
}

fn entity_vectors(params: &crate::models::ModelParameters) -> Vec<Vec<f64>> {
    (0..params.num_entities())
        .map(|i| params.entities.row(i).to_vec())
        .collect()
}

fn execute(command: Command) -> Result<()> {
    match command {
        Command::Fixture { seed, out } => {
            let summary = fixture::generate(seed, &out)?;
            println!(
                "fixture: {} triples, {} user records, {} labelled facts -> {}",
                summary.triples,
                summary.users,
                summary.labelled,
                out.display()
            );
            Ok(())
        }
        Command::Ingest { triples, out } => {
            let parsed = parse_triples_tsv(&triples)?;
            let mut kg = KnowledgeGraph::new();
            let mut duplicates = 0usize;
            for (s, p, o) in &parsed {
                if kg.add_triple(s, p, o)?.duplicate {
                    duplicates += 1;
                }
            }
            kg.save(&out)?;
            println!(
                "ingested {} triples ({} duplicates collapsed), {} entities, {} relations -> {}",
                kg.len(),
                duplicates,
                kg.entities().len(),
                kg.relations().len(),
                out.display()
            );
            Ok(())
        }
        Command::Map { table, rules, out } => {
            let (header, rows) = parse_table_tsv(&table)?;
            let rules = load_mapping_rules(&rules)?;
            let triples = map_tabular(&header, &rows, &rules)?;
            write_triples_tsv(&out, &triples)?;
            println!(
                "mapped {} rows through {} rules into {} triples",
                rows.len(),
                rules.len(),
                triples.len()
            );
            Ok(())
        }
        Command::CredScore {
            users,
            config,
            breadth_threshold,
            repetition_threshold,
            out,
        } => {
            let config = cred_config(&config, breadth_threshold, repetition_threshold)?;
            let records = parse_user_records(&users)?;
            let features = records
                .iter()
                .map(|r| compute_features(r, &config))
                .collect::<Result<Vec<_>>>()?;
            let report = credibility_rank(&features, &config);
            write_credibility_tsv(&report, &out)?;
            let flagged = report.records.iter().filter(|r| r.spam).count();
            println!(
                "scored {} users over {} domains; {} flagged as spam -> {}",
                report.records.len(),
                report.domains.len(),
                flagged,
                out.display()
            );
            Ok(())
        }
        Command::CredFilter {
            users,
            triples,
            config,
            breadth_threshold,
            repetition_threshold,
            out,
        } => {
            let config = cred_config(&config, breadth_threshold, repetition_threshold)?;
            let records = parse_user_records(&users)?;
            let features = records
                .iter()
                .map(|r| compute_features(r, &config))
                .collect::<Result<Vec<_>>>()?;
            let spam = flagged_handles(&features, &config);
            let parsed = parse_triples_tsv(&triples)?;
            let (kept, dropped): (Vec<_>, Vec<_>) =
                parsed.into_iter().partition(|(s, _, _)| !spam.contains(s));
            fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            write_triples_tsv(&out.join("triples.tsv"), &kept)?;
            let report = credibility_rank(&features, &config);
            write_credibility_tsv(&report, &out.join("credibility.tsv"))?;
            println!(
                "kept {} triples, dropped {} from {} flagged users -> {}",
                kept.len(),
                dropped.len(),
                spam.len(),
                out.display()
            );
            Ok(())
        }
        Command::Split {
            store,
            ratios,
            seed,
        } => {
            let mut kg = load_store(&store)?;
            let ratios = parse_ratios(&ratios)?;
            kg.split(ratios, seed)?;
            kg.save(&store)?;
            let count = |tag| kg.split_triples(tag).len();
            println!(
                "split {} triples into train {} / valid {} / test {}",
                kg.len(),
                count(SplitTag::Train),
                count(SplitTag::Valid),
                count(SplitTag::Test)
            );
            Ok(())
        }
        Command::Train(args) => {
            let kg = load_store(&args.store)?;
            let config = args.build_config()?;
            let started = Instant::now();
            let outcome = train(&kg, args.model, &config)?;
            save_checkpoint(&outcome.params, &kg, config.seed, &args.out)?;
            println!(
                "trained {} (k={}, epochs={}) in {:.1}s; final mean loss {:.6} -> {}",
                args.model,
                config.k,
                config.epochs,
                started.elapsed().as_secs_f64(),
                outcome.loss_trace.last().copied().unwrap_or(f64::NAN),
                args.out.display()
            );
            Ok(())
        }
        Command::Tune {
            store,
            model,
            space,
            trials,
            seed,
            out,
        } => {
            let kg = load_store(&store)?;
            let space = match space {
                Some(path) => SearchSpace::load(&path)?,
                None => SearchSpace::default(),
            };
            let trials = trials.unwrap_or(space.trials);
            let outcome = random_search(&kg, model, &space, trials, seed)?;
            fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            write_trial_log(&outcome, &out.join("trials.tsv"))?;
            let best_path = out.join("best-config.json");
            let text =
                serde_json::to_string_pretty(&outcome.best_config).expect("config serializes");
            fs::write(&best_path, text).map_err(|e| Error::io(&best_path, e))?;
            println!(
                "best trial {} of {}: valid MRR {:.4} -> {}",
                outcome.best_trial,
                trials,
                outcome.best_mrr,
                out.display()
            );
            Ok(())
        }
        Command::Eval {
            store,
            checkpoint,
            filtered: _,
            raw,
            threads,
            out,
        } => {
            let (kg, params) = load_checkpoint_for(&store, &checkpoint)?;
            let test = kg.split_triples(SplitTag::Test);
            if test.is_empty() {
                return Err(Error::invalid(
                    "store has no test split; run `kge split` first",
                ));
            }
            let mode = if raw {
                RankMode::Raw
            } else {
                RankMode::Filtered
            };
            let report = match threads {
                Some(n) if n > 1 => {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(n)
                        .build()
                        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
                    pool.install(|| evaluate_ranking_with(&params, &kg, &test, mode, true))?
                }
                _ => evaluate_ranking_with(&params, &kg, &test, mode, false)?,
            };
            fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            write_ranking_report_tsv(&report, &kg, &test, &out.join("report.tsv"))?;
            write_metrics_tsv(&report, &out.join("metrics.tsv"))?;
            println!("{}", ranking_summary(&report));
            Ok(())
        }
        Command::Classify {
            store,
            checkpoint,
            facts,
            seed,
            out,
        } => {
            let (kg, params) = load_checkpoint_for(&store, &checkpoint)?;
            let facts = parse_labelled_facts(&facts, &kg)?;
            let (scores, labels) = calibration_set_from_validation(&params, &kg, seed)?;
            let calibration = calibrate(&scores, &labels)?;
            let (cm, metrics) = classify(&params, &calibration, &facts);
            fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            write_classification_tsv(&cm, &metrics, &out.join("classification.tsv"))?;
            println!(
                "classified {} facts: accuracy {:.3}, precision {:.3}, recall {:.3}, f-score {:.3} (tpos {}, fpos {}, tneg {}, fneg {})",
                cm.total(),
                metrics.accuracy,
                metrics.precision,
                metrics.recall,
                metrics.f_score,
                cm.tpos,
                cm.fpos,
                cm.tneg,
                cm.fneg
            );
            Ok(())
        }
        Command::Cluster {
            store,
            checkpoint,
            clusters,
            seed,
            max_iter,
            prefix,
            ids,
            out,
        } => {
            let (kg, params) = load_checkpoint_for(&store, &checkpoint)?;
            let labels = kg.entities().labels();
            let selected: Vec<usize> =
                if let Some(prefix) = &prefix {
                    (0..labels.len())
                        .filter(|i| labels[*i].starts_with(prefix.as_str()))
                        .collect()
                } else if let Some(ids_path) = &ids {
                    let text = fs::read_to_string(ids_path).map_err(|e| Error::io(ids_path, e))?;
                    let mut selected = Vec::new();
                    for line in text.lines() {
                        let label = line.trim();
                        if label.is_empty() {
                            continue;
                        }
                        selected.push(kg.entities().get(label).ok_or_else(|| {
                            Error::UnknownLabel {
                                kind: "entity",
                                label: label.to_string(),
                            }
                        })?);
                    }
                    selected
                } else {
                    (0..labels.len()).collect()
                };
            let vectors: Vec<Vec<f64>> = selected
                .iter()
                .map(|&i| params.entities.row(i).to_vec())
                .collect();
            let result = crate::analytics::kmeans(&vectors, clusters, seed, max_iter)?;
            let selected_labels: Vec<String> =
                selected.iter().map(|&i| labels[i].clone()).collect();
            crate::analytics::write_clusters_tsv(&selected_labels, &result, &out)?;
            println!(
                "clustered {} entities into {} clusters in {} iterations (inertia {:.3}) -> {}",
                selected.len(),
                clusters,
                result.iterations,
                result.inertia,
                out.display()
            );
            Ok(())
        }
        Command::Project {
            store,
            checkpoint,
            dims,
            out,
        } => {
            let (kg, params) = load_checkpoint_for(&store, &checkpoint)?;
            let vectors = entity_vectors(&params);
            let projection = crate::analytics::pca_project(&vectors, dims)?;
            crate::analytics::write_projection_tsv(kg.entities().labels(), &projection, &out)?;
            let explained: f64 = projection.explained_variance.iter().sum();
            println!(
                "projected {} entities to {dims}-D; explained variance {:.4}{} -> {}",
                vectors.len(),
                explained,
                if projection.degenerate {
                    " (degenerate: zero variance)"
                } else {
                    ""
                },
                out.display()
            );
            Ok(())
        }
        Command::ExportProjector {
            store,
            checkpoint,
            out,
        } => {
            let (kg, params) = load_checkpoint_for(&store, &checkpoint)?;
            let vectors = entity_vectors(&params);
            crate::analytics::export_projector(&vectors, kg.entities().labels(), &out)?;
            println!(
                "exported {} vectors (width {}) -> {}",
                vectors.len(),
                params.entities.cols(),
                out.display()
            );
            Ok(())
        }
    }
}
