//! Ranking evaluation under the corruption protocol (raw and filtered) and
//! calibrated triple classification.
//!
//! Ranking a test set is embarrassingly parallel over immutable parameters;
//! the parallel path collects per-triple ranks in input order and reduces
//! sequentially, so its reports are identical to the sequential ones.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kg::{KnowledgeGraph, SplitTag, Triple};
use crate::models::ModelParameters;
use crate::training::sigmoid;

/// Whether corruptions that are themselves known positives are removed
/// before ranking.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RankMode {
    Raw,
    Filtered,
}

impl std::fmt::Display for RankMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            RankMode::Raw => write!(f, "raw"),
            RankMode::Filtered => write!(f, "filtered"),
        }
    }
}

/// Which slot of the test triple gets corrupted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Subject,
    Object,
}

/// Rank of the test triple against all corruptions on one side.
///
/// Every entity replaces the chosen slot once; the test triple itself is
/// always retained. Filtered mode drops corruptions present anywhere in the
/// graph (train, valid or test). Ties are pessimistic: corruptions scoring
/// equal to the test triple count against it, so a constant-score model
/// ranks at the full candidate-set size.
pub fn rank_triple(
    params: &ModelParameters,
    kg: &KnowledgeGraph,
    test: Triple,
    side: Side,
    mode: RankMode,
) -> usize {
    let f_test = params.score(test);
    let original = match side {
        Side::Subject => test.subject,
        Side::Object => test.object,
    };
    let mut rank = 1;
    for e in 0..kg.entities().len() {
        if e == original {
            continue;
        }
        let corrupted = match side {
            Side::Subject => Triple::new(e, test.predicate, test.object),
            Side::Object => Triple::new(test.subject, test.predicate, e),
        };
        if mode == RankMode::Filtered && kg.contains_triple(corrupted) {
            continue;
        }
        if params.score(corrupted) >= f_test {
            rank += 1;
        }
    }
    rank
}

/// Aggregate ranking report over both corruption sides of a test set.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingReport {
    pub mode: RankMode,
    pub test_size: usize,
    /// (subject-side rank, object-side rank) per test triple, input order.
    pub ranks: Vec<(usize, usize)>,
    pub mrr: f64,
    pub mr: f64,
    pub hits1: f64,
    pub hits3: f64,
    pub hits10: f64,
}

impl RankingReport {
    fn from_ranks(mode: RankMode, ranks: Vec<(usize, usize)>) -> Self {
        let side_ranks: Vec<usize> = ranks.iter().flat_map(|(s, o)| [*s, *o]).collect();
        let n = side_ranks.len() as f64;
        let mrr = side_ranks.iter().map(|r| 1.0 / *r as f64).sum::<f64>() / n;
        let mr = side_ranks.iter().map(|r| *r as f64).sum::<f64>() / n;
        let hits = |k: usize| side_ranks.iter().filter(|r| **r <= k).count() as f64 / n;
        RankingReport {
            mode,
            test_size: ranks.len(),
            hits1: hits(1),
            hits3: hits(3),
            hits10: hits(10),
            ranks,
            mrr,
            mr,
        }
    }
}

/// Rank every test triple on both sides and aggregate MRR, MR and Hits@N
/// over the 2|T| side-ranks.
pub fn evaluate_ranking(
    params: &ModelParameters,
    kg: &KnowledgeGraph,
    test: &[Triple],
    mode: RankMode,
) -> Result<RankingReport> {
    evaluate_ranking_with(params, kg, test, mode, false)
}

/// As [`evaluate_ranking`], optionally ranking test triples in parallel.
/// Parallel evaluation produces a report identical to the sequential one.
pub fn evaluate_ranking_with(
    params: &ModelParameters,
    kg: &KnowledgeGraph,
    test: &[Triple],
    mode: RankMode,
    parallel: bool,
) -> Result<RankingReport> {
    if test.is_empty() {
        return Err(Error::invalid("cannot evaluate an empty test split"));
    }
    let rank_both = |t: &Triple| {
        (
            rank_triple(params, kg, *t, Side::Subject, mode),
            rank_triple(params, kg, *t, Side::Object, mode),
        )
    };
    let ranks: Vec<(usize, usize)> = if parallel {
        test.par_iter().map(rank_both).collect()
    } else {
        test.iter().map(rank_both).collect()
    };
    Ok(RankingReport::from_ranks(mode, ranks))
}

/// Per-triple ranks as TSV: labels, then subject- and object-side rank.
pub fn write_ranking_report_tsv(
    report: &RankingReport,
    kg: &KnowledgeGraph,
    test: &[Triple],
    path: &Path,
) -> Result<()> {
    let mut out = String::from("subject\tpredicate\tobject\tsubject_rank\tobject_rank\n");
    for (triple, (sr, or)) in test.iter().zip(&report.ranks) {
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\n",
            kg.entities().label(triple.subject).unwrap_or("?"),
            kg.relations().label(triple.predicate).unwrap_or("?"),
            kg.entities().label(triple.object).unwrap_or("?"),
            sr,
            or
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// Aggregate metrics as metric TAB value rows.
pub fn write_metrics_tsv(report: &RankingReport, path: &Path) -> Result<()> {
    let out = format!(
        "metric\tvalue\nmode\t{}\ntest_size\t{}\nmrr\t{:.6}\nmr\t{:.6}\nhits@1\t{:.6}\nhits@3\t{:.6}\nhits@10\t{:.6}\n",
        report.mode, report.test_size, report.mrr, report.mr, report.hits1, report.hits3, report.hits10
    );
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

/// One-paragraph human-readable summary.
pub fn ranking_summary(report: &RankingReport) -> String {
    format!(
        "{} ranking over {} test triples ({} side-ranks): MRR {:.4}, MR {:.2}, Hits@1 {:.4}, Hits@3 {:.4}, Hits@10 {:.4}",
        report.mode,
        report.test_size,
        report.test_size * 2,
        report.mrr,
        report.mr,
        report.hits1,
        report.hits3,
        report.hits10
    )
}

/// Logistic calibration mapping a raw score to P(true) = sigmoid(a f + b).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub slope: f64,
    pub intercept: f64,
}

impl Calibration {
    pub fn probability(&self, score: f64) -> f64 {
        sigmoid(self.slope * score + self.intercept)
    }
}

/// Fit the two calibration parameters by Newton iterations on the logistic
/// likelihood (at most 100 iterations, tolerance 1e-8). Requires both
/// classes to be present.
pub fn calibrate(scores: &[f64], labels: &[bool]) -> Result<Calibration> {
    if scores.len() != labels.len() {
        return Err(Error::invalid("scores and labels differ in length"));
    }
    let positives = labels.iter().filter(|l| **l).count();
    if positives == 0 {
        return Err(Error::SingleClass("negatives"));
    }
    if positives == labels.len() {
        return Err(Error::SingleClass("positives"));
    }

    let mut a = 0.0;
    let mut b = 0.0;
    for _ in 0..100 {
        let mut g0 = 0.0;
        let mut g1 = 0.0;
        let mut h00 = 0.0;
        let mut h01 = 0.0;
        let mut h11 = 0.0;
        for (f, y) in scores.iter().zip(labels) {
            let p = sigmoid(a * f + b);
            let err = p - f64::from(*y);
            g0 += err * f;
            g1 += err;
            let w = p * (1.0 - p);
            h00 += w * f * f;
            h01 += w * f;
            h11 += w;
        }
        // Tiny ridge keeps the 2x2 solve well-posed for degenerate inputs
        // (constant scores, perfectly separated data).
        h00 += 1e-12;
        h11 += 1e-12;
        let det = h00 * h11 - h01 * h01;
        if det.abs() < 1e-300 {
            break;
        }
        let da = (h11 * g0 - h01 * g1) / det;
        let db = (h00 * g1 - h01 * g0) / det;
        a -= da;
        b -= db;
        if da.abs() + db.abs() < 1e-8 {
            break;
        }
    }
    if !a.is_finite() || !b.is_finite() {
        return Err(Error::invalid("calibration diverged"));
    }
    Ok(Calibration {
        slope: a,
        intercept: b,
    })
}

/// Counts of the four classification outcomes.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    pub tpos: usize,
    pub fpos: usize,
    pub tneg: usize,
    pub fneg: usize,
}

impl ConfusionMatrix {
    pub fn total(&self) -> usize {
        self.tpos + self.fpos + self.tneg + self.fneg
    }
}

/// Accuracy, precision, recall and F-score with degenerate-denominator
/// flags: a metric with a zero denominator reports 0 and sets its flag.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationMetrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_score: f64,
    pub accuracy_degenerate: bool,
    pub precision_degenerate: bool,
    pub recall_degenerate: bool,
    pub f_score_degenerate: bool,
}

/// Derive the four metrics from a confusion matrix. The F-score is the
/// standard harmonic mean 2PR / (P + R).
pub fn confusion_metrics(cm: &ConfusionMatrix) -> ClassificationMetrics {
    let ratio = |num: usize, den: usize| -> (f64, bool) {
        if den == 0 {
            (0.0, true)
        } else {
            (num as f64 / den as f64, false)
        }
    };
    let (accuracy, accuracy_degenerate) = ratio(cm.tpos + cm.tneg, cm.total());
    let (precision, precision_degenerate) = ratio(cm.tpos, cm.tpos + cm.fpos);
    let (recall, recall_degenerate) = ratio(cm.tpos, cm.tpos + cm.fneg);
    let (f_score, f_score_degenerate) = if precision + recall > 0.0 {
        (2.0 * precision * recall / (precision + recall), false)
    } else {
        (0.0, true)
    };
    ClassificationMetrics {
        accuracy,
        precision,
        recall,
        f_score,
        accuracy_degenerate,
        precision_degenerate,
        recall_degenerate,
        f_score_degenerate,
    }
}

/// Classify labelled facts: predicted true iff the calibrated probability
/// reaches 1/2.
pub fn classify(
    params: &ModelParameters,
    calibration: &Calibration,
    facts: &[(Triple, bool)],
) -> (ConfusionMatrix, ClassificationMetrics) {
    let mut cm = ConfusionMatrix::default();
    for (triple, actual) in facts {
        let predicted = calibration.probability(params.score(*triple)) >= 0.5;
        match (*actual, predicted) {
            (true, true) => cm.tpos += 1,
            (true, false) => cm.fneg += 1,
            (false, true) => cm.fpos += 1,
            (false, false) => cm.tneg += 1,
        }
    }
    let metrics = confusion_metrics(&cm);
    (cm, metrics)
}

/// Parse a labelled facts file: subject TAB predicate TAB object TAB
/// label with label in {true, false}. Labels must resolve in the graph's
/// dictionaries.
pub fn parse_labelled_facts(path: &Path, kg: &KnowledgeGraph) -> Result<Vec<(Triple, bool)>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut facts = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split('\t').map(str::trim).collect();
        if cols.len() != 4 {
            return Err(Error::MalformedLine {
                path: path.to_path_buf(),
                line: lineno + 1,
                expected: 4,
                found: cols.len(),
            });
        }
        let entity = |label: &str| {
            kg.entities().get(label).ok_or_else(|| Error::UnknownLabel {
                kind: "entity",
                label: label.to_string(),
            })
        };
        let predicate = kg
            .relations()
            .get(cols[1])
            .ok_or_else(|| Error::UnknownLabel {
                kind: "relation",
                label: cols[1].to_string(),
            })?;
        let label = match cols[3] {
            "true" => true,
            "false" => false,
            other => {
                return Err(Error::InvalidRecord {
                    path: path.to_path_buf(),
                    line: lineno + 1,
                    message: format!("label must be true or false, got {other:?}"),
                })
            }
        };
        facts.push((
            Triple::new(entity(cols[0])?, predicate, entity(cols[2])?),
            label,
        ));
    }
    Ok(facts)
}

/// Build a calibration set from the validation split: its positives labelled
/// true, plus one synthesized corruption per positive (filtered against all
/// known triples) labelled false.
pub fn calibration_set_from_validation(
    params: &ModelParameters,
    kg: &KnowledgeGraph,
    seed: u64,
) -> Result<(Vec<f64>, Vec<bool>)> {
    let positives = kg.split_triples(SplitTag::Valid);
    if positives.is_empty() {
        return Err(Error::invalid(
            "calibration needs a non-empty validation split",
        ));
    }
    let n = kg.entities().len();
    if n < 2 {
        return Err(Error::invalid("calibration needs at least 2 entities"));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(4);

    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for positive in &positives {
        scores.push(params.score(*positive));
        labels.push(true);
        // Rejection-sample a corruption that is not a known positive.
        for _ in 0..200 {
            let corrupt_head = rng.random_range(0..2u8) == 0;
            let original = if corrupt_head {
                positive.subject
            } else {
                positive.object
            };
            let mut replacement = rng.random_range(0..n - 1);
            if replacement >= original {
                replacement += 1;
            }
            let negative = if corrupt_head {
                Triple::new(replacement, positive.predicate, positive.object)
            } else {
                Triple::new(positive.subject, positive.predicate, replacement)
            };
            if !kg.contains_triple(negative) {
                scores.push(params.score(negative));
                labels.push(false);
                break;
            }
        }
    }
    Ok((scores, labels))
}

/// Write the confusion matrix and derived metrics as TSV rows.
pub fn write_classification_tsv(
    cm: &ConfusionMatrix,
    metrics: &ClassificationMetrics,
    path: &Path,
) -> Result<()> {
    let flag = |d: bool| if d { " (degenerate)" } else { "" };
    let out = format!(
        "metric\tvalue\ntpos\t{}\nfpos\t{}\ntneg\t{}\nfneg\t{}\naccuracy\t{:.6}{}\nprecision\t{:.6}{}\nrecall\t{:.6}{}\nf_score\t{:.6}{}\n",
        cm.tpos,
        cm.fpos,
        cm.tneg,
        cm.fneg,
        metrics.accuracy,
        flag(metrics.accuracy_degenerate),
        metrics.precision,
        flag(metrics.precision_degenerate),
        metrics.recall,
        flag(metrics.recall_degenerate),
        metrics.f_score,
        flag(metrics.f_score_degenerate),
    );
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

impl FromStr for RankMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "raw" => Ok(RankMode::Raw),
            "filtered" => Ok(RankMode::Filtered),
            other => Err(Error::UnknownLabel {
                kind: "rank mode",
                label: other.to_string(),
            }),
        }
    }
}
