//! Domain-based user credibility: per-user, per-domain feature extraction,
//! max-normalization against the cohort, weighted ranking, and spam
//! filtering, so that only trusted users' facts enter the graph.
//!
//! Feature computation is embarrassingly parallel per user; normalization and
//! ranking are a sequential reduce over the cohort. A finished
//! [`CredibilityReport`] is immutable and safe to read from any thread.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::UserRecord;

/// The canonical taxonomy the domain-score provider classifies against.
pub const DEFAULT_DOMAINS: [&str; 23] = [
    "art and entertainment",
    "automotive and vehicles",
    "business and industrial",
    "careers",
    "education",
    "family and parenting",
    "finance",
    "food and drink",
    "health and fitness",
    "hobbies and interests",
    "home and garden",
    "law, govt and politics",
    "news",
    "pets",
    "real estate",
    "religion and spirituality",
    "science",
    "shopping",
    "society",
    "sports",
    "style and fashion",
    "technology and computing",
    "travel",
];

/// Weights for the per-domain credibility aggregate. They are normalized to
/// sum to one before use, so the credibility value stays in [0, 1].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureWeights {
    pub weight: f64,
    pub retweets: f64,
    pub likes: f64,
    pub replies: f64,
    pub sentiment: f64,
    pub ff_ratio: f64,
}

impl Default for FeatureWeights {
    fn default() -> Self {
        FeatureWeights {
            weight: 1.0,
            retweets: 1.0,
            likes: 1.0,
            replies: 1.0,
            sentiment: 1.0,
            ff_ratio: 1.0,
        }
    }
}

impl FeatureWeights {
    fn normalized(&self) -> [f64; 6] {
        let raw = [
            self.weight,
            self.retweets,
            self.likes,
            self.replies,
            self.sentiment,
            self.ff_ratio,
        ];
        let sum: f64 = raw.iter().sum();
        if sum <= 0.0 {
            return [1.0 / 6.0; 6];
        }
        raw.map(|w| w / sum)
    }
}

/// Domain list, aggregation weights and the spam policy thresholds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CredibilityConfig {
    pub domains: Vec<String>,
    pub weights: FeatureWeights,
    /// Flag when the user shows interest in at least this fraction of all
    /// domains (DF/n).
    pub breadth_threshold: f64,
    /// ... and their distinct-word ratio is at least this high.
    pub repetition_threshold: f64,
}

impl Default for CredibilityConfig {
    fn default() -> Self {
        CredibilityConfig {
            domains: DEFAULT_DOMAINS.iter().map(|d| d.to_string()).collect(),
            weights: FeatureWeights::default(),
            breadth_threshold: 0.95,
            repetition_threshold: 0.5,
        }
    }
}

impl CredibilityConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Json {
            path: path.to_path_buf(),
            source: e,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).expect("config serializes");
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }
}

/// Why a record was flagged or excluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FlagReason {
    /// Interest in nearly all domains combined with highly non-repetitive
    /// wording: the spam signature. Either signal alone is not enough.
    BreadthRepetition,
    /// No positive combined score in any domain; IDF is undefined, so the
    /// record cannot be ranked.
    NoDomainSignal,
}

impl fmt::Display for FlagReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FlagReason::BreadthRepetition => write!(f, "breadth_repetition"),
            FlagReason::NoDomainSignal => write!(f, "no_domain_signal"),
        }
    }
}

/// Raw per-record feature values, one slot per configured domain.
#[derive(Debug, Clone, PartialEq)]
pub struct UserFeatures {
    pub user_id: String,
    pub handle: String,
    pub chunk: Option<String>,
    /// Distinct-word to total-word ratio over all tweets.
    pub twt_sim: f64,
    /// Set when the user had no tokenizable words; twt_sim defaults to 1.
    pub empty_content: bool,
    /// 0.5 * ((#distinct URLs + #distinct hosts) / #URLs).
    pub url_sim: f64,
    /// Set when the user posted no URLs; url_sim defaults to 1 (no penalty).
    pub no_urls: bool,
    pub sum_cnt_scr: Vec<f64>,
    pub sum_url_scr: Vec<f64>,
    /// Combined score: twt_sim * sum_cnt_scr + url_sim * sum_url_scr.
    pub sc: Vec<f64>,
    /// Number of domains with sc > 0.
    pub df: usize,
    /// log10(n / df); `None` when df = 0.
    pub idf: Option<f64>,
    /// sc * idf (zero when idf is undefined).
    pub weight: Vec<f64>,
    pub retweets: Vec<f64>,
    pub likes: Vec<f64>,
    pub replies: Vec<f64>,
    pub sp: Vec<f64>,
    pub sn: Vec<f64>,
    /// sp - sn (sn is a sum of negative scores, so this is non-negative).
    pub sentiment: Vec<f64>,
    pub followers: i64,
    pub friends: i64,
    pub age_years: f64,
    pub ff_ratio: f64,
}

/// Lowercased tokens with non-alphanumeric characters stripped from both
/// edges; empty tokens are dropped and do not count as words. This exact rule
/// is fixed so that word counts are reproducible.
pub fn tokenize(text: &str) -> impl Iterator<Item = String> + '_ {
    text.split_whitespace().filter_map(|raw| {
        let token = raw
            .trim_matches(|c: char| !c.is_alphanumeric())
            .to_lowercase();
        (!token.is_empty()).then_some(token)
    })
}

/// Host part of a URL, lowercased. Falls back to the text between the scheme
/// marker and the first separator when the URL does not parse.
fn url_host(raw: &str) -> String {
    if let Ok(parsed) = url::Url::parse(raw) {
        if let Some(host) = parsed.host_str() {
            return host.to_lowercase();
        }
    }
    let rest = raw.split_once("://").map_or(raw, |(_, r)| r);
    rest.split(['/', '?', '#'])
        .next()
        .unwrap_or(rest)
        .to_lowercase()
}

/// Distinct-word ratio over the user's tweets. Returns the ratio and an
/// empty-content flag; with zero words the ratio defaults to 1.
pub fn tweet_similarity(record: &UserRecord) -> (f64, bool) {
    let mut total = 0usize;
    let mut distinct = HashSet::new();
    for tweet in &record.tweets {
        for token in tokenize(&tweet.text) {
            total += 1;
            distinct.insert(token);
        }
    }
    if total == 0 {
        (1.0, true)
    } else {
        (distinct.len() as f64 / total as f64, false)
    }
}

/// Non-redundancy of the user's URLs. Returns the ratio and a no-URLs flag;
/// with zero URLs the ratio defaults to 1 (no penalty applicable).
pub fn url_similarity(record: &UserRecord) -> (f64, bool) {
    let mut total = 0usize;
    let mut distinct_urls = HashSet::new();
    let mut distinct_hosts = HashSet::new();
    for tweet in &record.tweets {
        for raw in &tweet.urls {
            let url = raw.trim();
            if url.is_empty() {
                continue;
            }
            total += 1;
            distinct_hosts.insert(url_host(url));
            distinct_urls.insert(url.to_string());
        }
    }
    if total == 0 {
        (1.0, true)
    } else {
        let ratio = (distinct_urls.len() + distinct_hosts.len()) as f64 / total as f64;
        (0.5 * ratio, false)
    }
}

/// Combined domain score from the similarity penalties and the per-domain
/// score sums.
pub fn combined_domain_score(
    twt_sim: f64,
    sum_cnt_scr: f64,
    url_sim: f64,
    sum_url_scr: f64,
) -> f64 {
    twt_sim * sum_cnt_scr + url_sim * sum_url_scr
}

/// Inverse domain frequency, log10(n / df). Undefined for df = 0.
pub fn idf(df: usize, n_domains: usize) -> Option<f64> {
    (df > 0).then(|| (n_domains as f64 / df as f64).log10())
}

/// Followers-friends ratio over profile age. Equal counts fall back to
/// 1 / age so the feature never collapses to zero.
pub fn ff_ratio(followers: i64, friends: i64, age_years: f64) -> Result<f64> {
    if age_years.is_nan() || age_years <= 0.0 {
        return Err(Error::invalid(format!(
            "profile age must be > 0 years, got {age_years}"
        )));
    }
    if followers == friends {
        Ok(1.0 / age_years)
    } else {
        Ok((followers - friends) as f64 / age_years)
    }
}

/// Compute every raw feature for one user record.
///
/// A tweet is assigned to each domain its `domain_scores` list scores above
/// zero; retweets, likes, reply counts and reply sentiments accumulate into
/// every domain the tweet is assigned to.
pub fn compute_features(record: &UserRecord, config: &CredibilityConfig) -> Result<UserFeatures> {
    let n = config.domains.len();
    let domain_index: HashMap<&str, usize> = config
        .domains
        .iter()
        .enumerate()
        .map(|(i, d)| (d.as_str(), i))
        .collect();
    let lookup = |label: &str| -> Result<usize> {
        domain_index
            .get(label)
            .copied()
            .ok_or_else(|| Error::UnknownDomain {
                user: record.user_id.clone(),
                domain: label.to_string(),
            })
    };

    let (twt_sim, empty_content) = tweet_similarity(record);
    let (url_sim, no_urls) = url_similarity(record);
    let ff_ratio = ff_ratio(record.followers, record.friends, record.age_years).map_err(|e| {
        Error::InvalidUserRecord {
            user: record.user_id.clone(),
            message: e.to_string(),
        }
    })?;

    let mut sum_cnt_scr = vec![0.0; n];
    let mut sum_url_scr = vec![0.0; n];
    let mut retweets = vec![0.0; n];
    let mut likes = vec![0.0; n];
    let mut replies = vec![0.0; n];
    let mut sp = vec![0.0; n];
    let mut sn = vec![0.0; n];

    for tweet in &record.tweets {
        let mut assigned = Vec::new();
        for ds in &tweet.domain_scores {
            let d = lookup(&ds.domain)?;
            sum_cnt_scr[d] += ds.score;
            if ds.score > 0.0 {
                assigned.push(d);
            }
        }
        for ds in &tweet.url_domain_scores {
            let d = lookup(&ds.domain)?;
            sum_url_scr[d] += ds.score;
        }
        assigned.sort_unstable();
        assigned.dedup();
        for &d in &assigned {
            retweets[d] += tweet.retweets as f64;
            likes[d] += tweet.likes as f64;
            replies[d] += tweet.replies.len() as f64;
            for reply in &tweet.replies {
                if reply.sentiment > 0.0 {
                    sp[d] += reply.sentiment;
                } else if reply.sentiment < 0.0 {
                    sn[d] += reply.sentiment;
                }
            }
        }
    }

    let sc: Vec<f64> = (0..n)
        .map(|d| combined_domain_score(twt_sim, sum_cnt_scr[d], url_sim, sum_url_scr[d]))
        .collect();
    let df = sc.iter().filter(|&&v| v > 0.0).count();
    let idf = idf(df, n);
    let weight: Vec<f64> = sc.iter().map(|v| v * idf.unwrap_or(0.0)).collect();
    let sentiment: Vec<f64> = sp.iter().zip(&sn).map(|(p, m)| p - m).collect();

    Ok(UserFeatures {
        user_id: record.user_id.clone(),
        handle: record.handle.clone(),
        chunk: record.chunk.clone(),
        twt_sim,
        empty_content,
        url_sim,
        no_urls,
        sum_cnt_scr,
        sum_url_scr,
        sc,
        df,
        idf,
        weight,
        retweets,
        likes,
        replies,
        sp,
        sn,
        sentiment,
        followers: record.followers,
        friends: record.friends,
        age_years: record.age_years,
        ff_ratio,
    })
}

/// The rankable feature columns of a cohort, one row per record.
///
/// The five domain features normalize per domain by the cohort maximum;
/// the domain-independent (and possibly negative) followers-friends ratio is
/// min-max scaled to [0, 1]. Normalization is idempotent, and positive
/// rescaling of any single raw column cancels out.
#[derive(Debug, Clone, PartialEq)]
pub struct CredFeatureSet {
    pub users: Vec<String>,
    pub n_domains: usize,
    pub weight: Vec<Vec<f64>>,
    pub retweets: Vec<Vec<f64>>,
    pub likes: Vec<Vec<f64>>,
    pub replies: Vec<Vec<f64>>,
    pub sentiment: Vec<Vec<f64>>,
    pub ff_ratio: Vec<f64>,
}

impl CredFeatureSet {
    pub fn from_features(features: &[&UserFeatures]) -> Self {
        let n_domains = features.first().map_or(0, |f| f.sc.len());
        CredFeatureSet {
            users: features.iter().map(|f| f.user_id.clone()).collect(),
            n_domains,
            weight: features.iter().map(|f| f.weight.clone()).collect(),
            retweets: features.iter().map(|f| f.retweets.clone()).collect(),
            likes: features.iter().map(|f| f.likes.clone()).collect(),
            replies: features.iter().map(|f| f.replies.clone()).collect(),
            sentiment: features.iter().map(|f| f.sentiment.clone()).collect(),
            ff_ratio: features.iter().map(|f| f.ff_ratio).collect(),
        }
    }

    /// Per-domain max-normalization (all-zero columns stay zero) plus min-max
    /// scaling of the ff ratio (a constant column maps to 1).
    pub fn normalized(&self) -> Self {
        let mut out = self.clone();
        for matrix in [
            &mut out.weight,
            &mut out.retweets,
            &mut out.likes,
            &mut out.replies,
            &mut out.sentiment,
        ] {
            for d in 0..self.n_domains {
                let max = matrix.iter().map(|row| row[d]).fold(0.0_f64, f64::max);
                if max > 0.0 {
                    for row in matrix.iter_mut() {
                        row[d] /= max;
                    }
                }
            }
        }
        if !out.ff_ratio.is_empty() {
            let min = out.ff_ratio.iter().copied().fold(f64::INFINITY, f64::min);
            let max = out
                .ff_ratio
                .iter()
                .copied()
                .fold(f64::NEG_INFINITY, f64::max);
            for v in &mut out.ff_ratio {
                *v = if max > min {
                    (*v - min) / (max - min)
                } else {
                    1.0
                };
            }
        }
        out
    }

    /// Weighted sum of the (already normalized) features, per row per domain.
    pub fn credibility(&self, weights: &FeatureWeights) -> Vec<Vec<f64>> {
        let w = weights.normalized();
        (0..self.users.len())
            .map(|u| {
                (0..self.n_domains)
                    .map(|d| {
                        w[0] * self.weight[u][d]
                            + w[1] * self.retweets[u][d]
                            + w[2] * self.likes[u][d]
                            + w[3] * self.replies[u][d]
                            + w[4] * self.sentiment[u][d]
                            + w[5] * self.ff_ratio[u]
                    })
                    .collect()
            })
            .collect()
    }

    /// Normalized feature vectors [weight, retweets, likes, replies,
    /// sentiment, ff_ratio] per row per domain.
    fn feature_vectors(&self) -> Vec<Vec<[f64; 6]>> {
        (0..self.users.len())
            .map(|u| {
                (0..self.n_domains)
                    .map(|d| {
                        [
                            self.weight[u][d],
                            self.retweets[u][d],
                            self.likes[u][d],
                            self.replies[u][d],
                            self.sentiment[u][d],
                            self.ff_ratio[u],
                        ]
                    })
                    .collect()
            })
            .collect()
    }
}

/// One user's final credibility row.
#[derive(Debug, Clone, PartialEq)]
pub struct CredibilityRecord {
    pub user_id: String,
    pub handle: String,
    /// Credibility value per domain, in [0, 1]. Empty for excluded users.
    pub credibility: Vec<f64>,
    /// Normalized feature vector per domain (chunk-averaged when chunked).
    pub features: Vec<[f64; 6]>,
    pub spam: bool,
    pub reason: Option<FlagReason>,
}

/// Ranked credibility output for a cohort.
#[derive(Debug, Clone, PartialEq)]
pub struct CredibilityReport {
    pub domains: Vec<String>,
    pub records: Vec<CredibilityRecord>,
    /// Per domain: record indices in descending credibility order (ties break
    /// by ascending user id). Excluded users do not appear.
    pub ranking: Vec<Vec<usize>>,
}

/// Does this record match the spam signature? Both signals must fire: broad
/// domain interest alone is not enough.
pub fn is_spam(features: &UserFeatures, config: &CredibilityConfig) -> bool {
    let n = config.domains.len().max(1);
    let breadth = features.df as f64 / n as f64;
    breadth >= config.breadth_threshold && features.twt_sim >= config.repetition_threshold
}

/// Partition records into kept and flagged (with reasons). Only the spam
/// signature flags a record here; DF = 0 exclusions are handled by ranking.
pub fn filter_spammers<'a>(
    features: &'a [UserFeatures],
    config: &CredibilityConfig,
) -> (Vec<&'a UserFeatures>, Vec<(&'a UserFeatures, FlagReason)>) {
    let mut kept = Vec::new();
    let mut flagged = Vec::new();
    for f in features {
        if is_spam(f, config) {
            flagged.push((f, FlagReason::BreadthRepetition));
        } else {
            kept.push(f);
        }
    }
    (kept, flagged)
}

/// Handles of all spam-flagged users; facts attributed to them are dropped
/// from graph assembly.
pub fn flagged_handles(features: &[UserFeatures], config: &CredibilityConfig) -> HashSet<String> {
    features
        .iter()
        .filter(|f| is_spam(f, config))
        .map(|f| f.handle.clone())
        .collect()
}

/// Rank a cohort of feature records per domain.
///
/// Records sharing a chunk id are normalized against each other; a user's
/// final credibility is the arithmetic mean over the chunks it appears in.
/// Records with no domain signal (DF = 0) are excluded from ranking and carry
/// a reason code instead.
pub fn credibility_rank(
    features: &[UserFeatures],
    config: &CredibilityConfig,
) -> CredibilityReport {
    let n_domains = config.domains.len();

    // First-seen user order determines report row order.
    let mut user_order: Vec<(String, String)> = Vec::new();
    let mut user_index: HashMap<String, usize> = HashMap::new();
    for f in features {
        if !user_index.contains_key(&f.user_id) {
            user_index.insert(f.user_id.clone(), user_order.len());
            user_order.push((f.user_id.clone(), f.handle.clone()));
        }
    }

    let mut chunks: BTreeMap<&str, Vec<&UserFeatures>> = BTreeMap::new();
    for f in features {
        chunks
            .entry(f.chunk.as_deref().unwrap_or(""))
            .or_default()
            .push(f);
    }

    let mut cred_sum = vec![vec![0.0; n_domains]; user_order.len()];
    let mut feat_sum = vec![vec![[0.0; 6]; n_domains]; user_order.len()];
    let mut seen_chunks = vec![0usize; user_order.len()];
    let mut spam = vec![false; user_order.len()];

    for members in chunks.values() {
        for f in members.iter() {
            if is_spam(f, config) {
                spam[user_index[&f.user_id]] = true;
            }
        }
        let included: Vec<&UserFeatures> = members.iter().copied().filter(|f| f.df > 0).collect();
        if included.is_empty() {
            continue;
        }
        let set = CredFeatureSet::from_features(&included).normalized();
        let cred = set.credibility(&config.weights);
        let vecs = set.feature_vectors();
        for (row, f) in included.iter().enumerate() {
            let u = user_index[&f.user_id];
            for d in 0..n_domains {
                cred_sum[u][d] += cred[row][d];
                for k in 0..6 {
                    feat_sum[u][d][k] += vecs[row][d][k];
                }
            }
            seen_chunks[u] += 1;
        }
    }

    let records: Vec<CredibilityRecord> = user_order
        .iter()
        .enumerate()
        .map(|(u, (user_id, handle))| {
            let chunks_seen = seen_chunks[u];
            if chunks_seen == 0 {
                return CredibilityRecord {
                    user_id: user_id.clone(),
                    handle: handle.clone(),
                    credibility: Vec::new(),
                    features: Vec::new(),
                    spam: spam[u],
                    reason: if spam[u] {
                        Some(FlagReason::BreadthRepetition)
                    } else {
                        Some(FlagReason::NoDomainSignal)
                    },
                };
            }
            let scale = 1.0 / chunks_seen as f64;
            CredibilityRecord {
                user_id: user_id.clone(),
                handle: handle.clone(),
                credibility: cred_sum[u].iter().map(|v| v * scale).collect(),
                features: feat_sum[u].iter().map(|fv| fv.map(|v| v * scale)).collect(),
                spam: spam[u],
                reason: spam[u].then_some(FlagReason::BreadthRepetition),
            }
        })
        .collect();

    let ranking: Vec<Vec<usize>> = (0..n_domains)
        .map(|d| {
            let mut order: Vec<usize> = records
                .iter()
                .enumerate()
                .filter(|(_, r)| !r.credibility.is_empty())
                .map(|(i, _)| i)
                .collect();
            order.sort_by(|&a, &b| {
                records[b].credibility[d]
                    .partial_cmp(&records[a].credibility[d])
                    .unwrap()
                    .then_with(|| records[a].user_id.cmp(&records[b].user_id))
            });
            order
        })
        .collect();

    CredibilityReport {
        domains: config.domains.clone(),
        records,
        ranking,
    }
}

/// Write `credibility.tsv`: user-id TAB domain TAB credibility TAB spam-flag
/// TAB reason, rows ordered by user then domain.
pub fn write_credibility_tsv(report: &CredibilityReport, path: &Path) -> Result<()> {
    let mut out = String::from("user_id\tdomain\tcredibility\tspam\treason\n");
    for record in &report.records {
        let reason = record
            .reason
            .map_or_else(|| "-".to_string(), |r| r.to_string());
        for (d, domain) in report.domains.iter().enumerate() {
            let value = record.credibility.get(d).copied().unwrap_or(0.0);
            out.push_str(&format!(
                "{}\t{}\t{:.6}\t{}\t{}\n",
                record.user_id, domain, value, record.spam, reason
            ));
        }
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{DomainScore, Reply, Tweet};
    use proptest::prelude::*;

    fn config() -> CredibilityConfig {
        CredibilityConfig::default()
    }

    fn record_with_tweets(tweets: Vec<Tweet>) -> UserRecord {
        UserRecord {
            user_id: "u1".into(),
            handle: "h1".into(),
            followers: 100,
            friends: 50,
            age_years: 5.0,
            tweets,
            chunk: None,
        }
    }

    fn tweet(text: &str) -> Tweet {
        Tweet {
            text: text.into(),
            urls: vec![],
            retweets: 0,
            likes: 0,
            replies: vec![],
            domain_scores: vec![],
            url_domain_scores: vec![],
        }
    }

    #[test]
    fn ff_ratio_matches_published_rows() {
        assert!((ff_ratio(5606, 1437, 7.0).unwrap() - 595.571).abs() < 0.001);
        assert!((ff_ratio(248, 120, 13.0).unwrap() - 9.846).abs() < 0.001);
        assert!((ff_ratio(7, 7, 4.0).unwrap() - 0.25).abs() < 1e-12);
        assert!(ff_ratio(1, 1, 0.0).is_err());
    }

    #[test]
    fn tweet_similarity_ratio() {
        // 10 tokens, 1 distinct.
        let record = record_with_tweets(vec![tweet(&"go ".repeat(10))]);
        let (sim, empty) = tweet_similarity(&record);
        assert!(!empty);
        assert!((sim - 0.1).abs() < 1e-12);

        let record = record_with_tweets(vec![tweet("all words here distinct")]);
        let (sim, _) = tweet_similarity(&record);
        assert!((sim - 1.0).abs() < 1e-12);

        let record = record_with_tweets(vec![]);
        let (sim, empty) = tweet_similarity(&record);
        assert!(empty);
        assert!((sim - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tokens_are_case_folded_and_edge_stripped() {
        let tokens: Vec<String> = tokenize("Hello, WORLD! (hello) world...").collect();
        assert_eq!(tokens, vec!["hello", "world", "hello", "world"]);
        // Pure punctuation does not count as a word.
        assert_eq!(tokenize("--- !!!").count(), 0);
    }

    #[test]
    fn url_similarity_formula() {
        let mut t = tweet("x");
        t.urls = vec!["http://a.com/page".into(); 10];
        let record = record_with_tweets(vec![t]);
        let (sim, _) = url_similarity(&record);
        // 1 distinct URL + 1 distinct host over 10 URLs.
        assert!((sim - 0.1).abs() < 1e-12);

        let mut t = tweet("x");
        t.urls = vec!["http://a.com/1".into(), "http://b.com/2".into()];
        let record = record_with_tweets(vec![t]);
        let (sim, _) = url_similarity(&record);
        assert!((sim - 1.0).abs() < 1e-12);

        let record = record_with_tweets(vec![]);
        let (sim, none) = url_similarity(&record);
        assert!(none);
        assert!((sim - 1.0).abs() < 1e-12);
    }

    #[test]
    fn combined_score_arithmetic() {
        assert!((combined_domain_score(0.5, 2.0, 0.2, 1.0) - 1.2).abs() < 1e-12);
        assert_eq!(combined_domain_score(0.5, 0.0, 0.3, 0.0), 0.0);
        assert!((combined_domain_score(0.5, 2.0, 0.0, 9.0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn idf_values() {
        assert_eq!(idf(23, 23), Some(0.0));
        assert!((idf(1, 23).unwrap() - 23f64.log10()).abs() < 1e-12);
        assert!((idf(1, 23).unwrap() - 1.3617).abs() < 1e-4);
        assert_eq!(idf(0, 23), None);
    }

    #[test]
    fn engagement_sums_per_domain() {
        let mut t = tweet("politics talk");
        t.retweets = 4;
        t.likes = 7;
        t.domain_scores = vec![DomainScore {
            domain: "law, govt and politics".into(),
            score: 0.9,
        }];
        t.replies = vec![
            Reply {
                text: "yes".into(),
                sentiment: 0.5,
            },
            Reply {
                text: "no".into(),
                sentiment: -0.3,
            },
            Reply {
                text: "meh".into(),
                sentiment: 0.0,
            },
        ];
        let record = record_with_tweets(vec![t]);
        let features = compute_features(&record, &config()).unwrap();
        let d = config()
            .domains
            .iter()
            .position(|x| x == "law, govt and politics")
            .unwrap();
        assert_eq!(features.retweets[d], 4.0);
        assert_eq!(features.likes[d], 7.0);
        assert_eq!(features.replies[d], 3.0);
        assert!((features.sp[d] - 0.5).abs() < 1e-12);
        assert!((features.sn[d] + 0.3).abs() < 1e-12);
        assert!((features.sentiment[d] - 0.8).abs() < 1e-12);
        assert_eq!(features.df, 1);
        // Weight is the combined score scaled by a single IDF.
        let idf = features.idf.unwrap();
        for (w, sc) in features.weight.iter().zip(&features.sc) {
            assert!((w - sc * idf).abs() < 1e-12);
        }
    }

    #[test]
    fn unknown_domain_is_an_error() {
        let mut t = tweet("x");
        t.domain_scores = vec![DomainScore {
            domain: "astrology".into(),
            score: 0.4,
        }];
        let record = record_with_tweets(vec![t]);
        assert!(matches!(
            compute_features(&record, &config()),
            Err(Error::UnknownDomain { .. })
        ));
    }

    fn simple_features(user: &str, w: Vec<f64>, ff: f64) -> UserFeatures {
        let n = w.len();
        UserFeatures {
            user_id: user.into(),
            handle: user.into(),
            chunk: None,
            twt_sim: 0.3,
            empty_content: false,
            url_sim: 0.3,
            no_urls: false,
            sum_cnt_scr: w.clone(),
            sum_url_scr: vec![0.0; n],
            sc: w.clone(),
            df: w.iter().filter(|&&v| v > 0.0).count(),
            idf: Some(0.5),
            weight: w.clone(),
            retweets: w.clone(),
            likes: w.clone(),
            replies: w.clone(),
            sp: vec![0.0; n],
            sn: vec![0.0; n],
            sentiment: w,
            followers: 10,
            friends: 5,
            age_years: 2.0,
            ff_ratio: ff,
        }
    }

    #[test]
    fn normalization_divides_by_max() {
        let a = simple_features("a", vec![2.0], 1.0);
        let b = simple_features("b", vec![4.0], 2.0);
        let c = simple_features("c", vec![8.0], 3.0);
        let set = CredFeatureSet::from_features(&[&a, &b, &c]).normalized();
        assert_eq!(
            set.weight.iter().map(|r| r[0]).collect::<Vec<_>>(),
            vec![0.25, 0.5, 1.0]
        );
        assert_eq!(set.ff_ratio, vec![0.0, 0.5, 1.0]);
    }

    #[test]
    fn all_zero_column_stays_zero() {
        let a = simple_features("a", vec![0.0], 1.0);
        let b = simple_features("b", vec![0.0], 1.0);
        let set = CredFeatureSet::from_features(&[&a, &b]).normalized();
        assert_eq!(set.weight[0][0], 0.0);
        assert_eq!(set.weight[1][0], 0.0);
        // Constant ff column maps to 1.
        assert_eq!(set.ff_ratio, vec![1.0, 1.0]);
    }

    #[test]
    fn single_user_normalizes_to_one() {
        let a = simple_features("a", vec![5.0, 0.0], 3.0);
        let set = CredFeatureSet::from_features(&[&a]).normalized();
        assert_eq!(set.weight[0][0], 1.0);
        assert_eq!(set.weight[0][1], 0.0);
        assert_eq!(set.ff_ratio[0], 1.0);
    }

    #[test]
    fn dominating_user_ranks_first_everywhere() {
        let a = simple_features("a", vec![9.0, 9.0], 9.0);
        let b = simple_features("b", vec![1.0, 2.0], 1.0);
        let report = credibility_rank(&[a, b], &config_n(2));
        for d in 0..2 {
            assert_eq!(report.ranking[d][0], 0);
        }
    }

    fn config_n(n: usize) -> CredibilityConfig {
        CredibilityConfig {
            domains: (0..n).map(|i| format!("d{i}")).collect(),
            ..CredibilityConfig::default()
        }
    }

    #[test]
    fn equal_weight_sum_of_halves_is_half() {
        let set = CredFeatureSet {
            users: vec!["a".into()],
            n_domains: 1,
            weight: vec![vec![0.5]],
            retweets: vec![vec![0.5]],
            likes: vec![vec![0.5]],
            replies: vec![vec![0.5]],
            sentiment: vec![vec![0.5]],
            ff_ratio: vec![0.5],
        };
        let cred = set.credibility(&FeatureWeights::default());
        assert!((cred[0][0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn spam_policy_is_conjunctive() {
        let mut cfg = config();
        let mut broad_and_repetitive = simple_features("spam", vec![1.0; 23], 1.0);
        broad_and_repetitive.df = 23;
        broad_and_repetitive.twt_sim = 0.502;
        assert!(is_spam(&broad_and_repetitive, &cfg));

        let mut focused = simple_features("joanne", vec![0.0; 23], 595.0);
        focused.sc[11] = 5.0;
        focused.df = 1;
        focused.twt_sim = 0.212;
        assert!(!is_spam(&focused, &cfg));

        let mut broad_only = simple_features("broad", vec![1.0; 23], 1.0);
        broad_only.df = 23;
        broad_only.twt_sim = 0.1;
        assert!(!is_spam(&broad_only, &cfg));

        cfg.breadth_threshold = 2.0;
        assert!(!is_spam(&broad_and_repetitive, &cfg));
    }

    #[test]
    fn df_zero_excluded_with_reason() {
        let mut silent = simple_features("silent", vec![0.0, 0.0], 1.0);
        silent.df = 0;
        silent.idf = None;
        let active = simple_features("active", vec![1.0, 0.0], 2.0);
        let report = credibility_rank(&[silent, active], &config_n(2));
        assert_eq!(report.records[0].reason, Some(FlagReason::NoDomainSignal));
        assert!(report.records[0].credibility.is_empty());
        assert!(!report.ranking[0].contains(&0));
        assert!(report.ranking[0].contains(&1));
    }

    #[test]
    fn chunked_credibility_is_chunk_mean() {
        let mut a1 = simple_features("a", vec![4.0], 1.0);
        a1.chunk = Some("c1".into());
        let mut b1 = simple_features("b", vec![2.0], 1.0);
        b1.chunk = Some("c1".into());
        let mut a2 = simple_features("a", vec![1.0], 1.0);
        a2.chunk = Some("c2".into());
        let mut b2 = simple_features("b", vec![4.0], 1.0);
        b2.chunk = Some("c2".into());

        let cfg = config_n(1);
        let chunked = credibility_rank(&[a1.clone(), b1.clone(), a2.clone(), b2.clone()], &cfg);

        a1.chunk = None;
        b1.chunk = None;
        let only_c1 = credibility_rank(&[a1, b1], &cfg);
        a2.chunk = None;
        b2.chunk = None;
        let only_c2 = credibility_rank(&[a2, b2], &cfg);

        let expect_a =
            0.5 * (only_c1.records[0].credibility[0] + only_c2.records[0].credibility[0]);
        assert!((chunked.records[0].credibility[0] - expect_a).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn normalization_is_idempotent(
            raw in proptest::collection::vec(
                (proptest::collection::vec(0.0f64..50.0, 3), -5.0f64..5.0),
                1..8,
            )
        ) {
            let features: Vec<UserFeatures> = raw
                .iter()
                .enumerate()
                .map(|(i, (w, ff))| simple_features(&format!("u{i}"), w.clone(), *ff))
                .collect();
            let refs: Vec<&UserFeatures> = features.iter().collect();
            let once = CredFeatureSet::from_features(&refs).normalized();
            let twice = once.normalized();
            for (a, b) in once.weight.iter().flatten().zip(twice.weight.iter().flatten()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            for (a, b) in once.ff_ratio.iter().zip(twice.ff_ratio.iter()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn rank_invariant_under_column_rescaling(
            raw in proptest::collection::vec(
                proptest::collection::vec(0.0f64..20.0, 2),
                2..7,
            ),
            scale in 0.1f64..40.0,
        ) {
            let features: Vec<UserFeatures> = raw
                .iter()
                .enumerate()
                .map(|(i, w)| simple_features(&format!("u{i}"), w.clone(), i as f64))
                .collect();
            let cfg = config_n(2);
            let base = credibility_rank(&features, &cfg);

            let mut scaled = features.clone();
            for f in &mut scaled {
                f.retweets[1] *= scale;
            }
            let rescored = credibility_rank(&scaled, &cfg);
            prop_assert_eq!(base.ranking, rescored.ranking);
        }

        #[test]
        fn doubling_engagement_never_lowers_rank(
            raw in proptest::collection::vec(
                proptest::collection::vec(0.0f64..20.0, 2),
                2..7,
            ),
            who in 0usize..7,
        ) {
            let features: Vec<UserFeatures> = raw
                .iter()
                .enumerate()
                .map(|(i, w)| simple_features(&format!("u{i}"), w.clone(), 1.0))
                .collect();
            let who = who % features.len();
            let cfg = config_n(2);
            let base = credibility_rank(&features, &cfg);

            let mut boosted = features.clone();
            for d in 0..2 {
                boosted[who].retweets[d] *= 2.0;
                boosted[who].likes[d] *= 2.0;
                boosted[who].replies[d] *= 2.0;
                boosted[who].sentiment[d] *= 2.0;
            }
            let rescored = credibility_rank(&boosted, &cfg);
            for d in 0..2 {
                let pos_before = base.ranking[d].iter().position(|&i| i == who).unwrap();
                let pos_after = rescored.ranking[d].iter().position(|&i| i == who).unwrap();
                prop_assert!(pos_after <= pos_before);
            }
        }
    }
}
