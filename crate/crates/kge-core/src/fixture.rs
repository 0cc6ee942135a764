//! Synthetic politics fixture: a small knowledge graph with party-consistent
//! structure, a cohort of user records including one planted spammer, plus
//! the side files the pipeline commands consume (labelled facts, a tabular
//! sample with mapping rules, a search space and a credibility config).
//!
//! Everything derives from one seed; the same seed writes identical files.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use crate::credibility::{CredibilityConfig, DEFAULT_DOMAINS};
use crate::error::{Error, Result};
use crate::ingest::{
    write_triples_tsv, write_user_records, DomainScore, LabelTriple, MappingRule, ObjectSource,
    Reply, Tweet, UserRecord,
};
use crate::training::SearchSpace;

const PARTIES: [&str; 3] = [
    "Australian Labor Party",
    "Liberal Party of Australia",
    "Australian Greens",
];

const FIRST_NAMES: [&str; 24] = [
    "Joanne", "Marcus", "Fiona", "Dale", "Priya", "Colin", "Ingrid", "Theo", "Nadia", "Stuart",
    "Helen", "Bram", "Carla", "Duncan", "Alice", "Rohan", "Meredith", "Owen", "Sandra", "Felix",
    "Tanya", "Gareth", "Lucia", "Nolan",
];

const LAST_NAMES: [&str; 30] = [
    "Ryan",
    "Whitfield",
    "Okafor",
    "Marsh",
    "Tran",
    "Bellamy",
    "Crane",
    "Sutton",
    "Ferris",
    "Hale",
    "Mitchell",
    "Drummond",
    "Vance",
    "Keating",
    "Lowe",
    "Archer",
    "Pemberton",
    "Shaw",
    "Calder",
    "Nguyen",
    "Forrest",
    "Ibanez",
    "Mercer",
    "Quill",
    "Radford",
    "Stone",
    "Tennant",
    "Underwood",
    "Voss",
    "Winter",
];

const ELECTORATES: [&str; 3] = ["Bellmore", "Carrington", "Dunmore"];

const HANDLES: [&str; 24] = [
    "lalor_watch",
    "canberra_notes",
    "policy_and_pies",
    "senate_sleuth",
    "ballotbox_bee",
    "greens_gal",
    "libwatch_au",
    "labor_lens",
    "crossbench_chat",
    "hansard_hawk",
    "preselection_pro",
    "swingseat_sam",
    "psephology_pete",
    "question_time_q",
    "electorate_echo",
    "division_bell",
    "teal_tracker",
    "caucus_corner",
    "gallery_gossip",
    "marginal_maths",
    "how_to_vote_hq",
    "everytopic_earl",
    "footy_and_forms",
    "dealstream_daily",
];

/// Index of the planted spammer in [`HANDLES`]: interest in every domain
/// plus a high distinct-word ratio.
const SPAMMER: usize = 23;
/// Index of the breadth-only user: every domain but repetitive wording, so
/// the conjunctive policy keeps it.
const BREADTH_ONLY: usize = 21;
/// Index of a casual sports-leaning user.
const CASUAL: usize = 22;

const POLITICS: &str = "law, govt and politics";

const POLITICS_WORDS: [&str; 40] = [
    "parliament",
    "question",
    "time",
    "budget",
    "amendment",
    "committee",
    "electorate",
    "votes",
    "preference",
    "policy",
    "senate",
    "division",
    "bill",
    "reading",
    "caucus",
    "minister",
    "shadow",
    "portfolio",
    "coalition",
    "crossbench",
    "debate",
    "motion",
    "speaker",
    "hansard",
    "preselection",
    "campaign",
    "doorstop",
    "presser",
    "funding",
    "infrastructure",
    "health",
    "education",
    "climate",
    "energy",
    "housing",
    "wages",
    "reform",
    "inquiry",
    "estimates",
    "transparency",
];

fn politician_name(i: usize) -> String {
    format!(
        "{} {} MP",
        FIRST_NAMES[i % FIRST_NAMES.len()],
        LAST_NAMES[(i / FIRST_NAMES.len()) % LAST_NAMES.len()]
    )
}

fn electorate_of(i: usize) -> &'static str {
    ELECTORATES[i % ELECTORATES.len()]
}

/// Party is constant within an electorate block, which keeps every relation
/// in the graph inferable from structure.
fn party_of(i: usize) -> &'static str {
    PARTIES[i % PARTIES.len()]
}

const NUM_POLITICIANS: usize = 150;
/// Every fiftieth politician also sits in the current parliament.
const PARLIAMENT_STRIDE: usize = 50;

fn build_triples() -> Vec<LabelTriple> {
    let mut triples: Vec<LabelTriple> = Vec::new();
    let mut push = |s: &str, p: &str, o: &str| {
        triples.push((s.to_string(), p.to_string(), o.to_string()));
    };

    for i in 0..NUM_POLITICIANS {
        let name = politician_name(i);
        push(&name, "memberOfParty", party_of(i));
        if i % PARLIAMENT_STRIDE == 0 {
            push(&name, "memberOfParliament", "Australian Parliament");
        }
        push(&name, "hasLocation", electorate_of(i));
        // Politicians support their own party, so supports parallels
        // memberOfParty over the same pairs.
        push(&name, "supports", party_of(i));
        // ... and they talk about their electorate.
        push(&name, "hasMentioned", electorate_of(i));
    }

    for (u, handle) in HANDLES.iter().enumerate() {
        let home = u % ELECTORATES.len();
        push(handle, "hasPoliticsInterest", "High");
        push(handle, "hasSubtype", "Twitterer");
        push(handle, "hasMentioned", PARTIES[home % PARTIES.len()]);
        // Users follow their home electorate: they mention each of its
        // sitting politicians.
        for i in 0..NUM_POLITICIANS {
            if i % ELECTORATES.len() == home {
                push(handle, "hasMentioned", &politician_name(i));
            }
        }
    }
    triples
}

fn words_from_pool<R: Rng>(pool: &[&str], count: usize, rng: &mut R) -> String {
    (0..count)
        .map(|_| pool[rng.random_range(0..pool.len())])
        .collect::<Vec<_>>()
        .join(" ")
}

fn politics_tweet<R: Rng>(rng: &mut R, mentions_url: bool) -> Tweet {
    let text = words_from_pool(&POLITICS_WORDS, rng.random_range(8..14), rng);
    let urls = if mentions_url {
        vec![format!(
            "https://auspol.example.org/story/{}",
            rng.random_range(0..40u32)
        )]
    } else {
        Vec::new()
    };
    let replies = (0..rng.random_range(0..3))
        .map(|_| Reply {
            text: words_from_pool(&POLITICS_WORDS, 3, rng),
            sentiment: (rng.random_range(-10..=10) as f64) / 10.0,
        })
        .collect();
    Tweet {
        text,
        urls,
        retweets: rng.random_range(0..40),
        likes: rng.random_range(0..120),
        replies,
        domain_scores: vec![DomainScore {
            domain: POLITICS.to_string(),
            score: 0.6 + (rng.random_range(0..35) as f64) / 100.0,
        }],
        url_domain_scores: if mentions_url {
            vec![DomainScore {
                domain: POLITICS.to_string(),
                score: 0.5 + (rng.random_range(0..40) as f64) / 100.0,
            }]
        } else {
            Vec::new()
        },
    }
}

/// Every domain scored, fresh vocabulary every tweet: breadth plus a high
/// distinct-word ratio, the signature the spam policy looks for.
fn spam_tweet<R: Rng>(rng: &mut R, serial: usize) -> Tweet {
    let text: String = (0..10)
        .map(|j| format!("promo{}x{}", serial * 10 + j, rng.random_range(0..1000u32)))
        .collect::<Vec<_>>()
        .join(" ");
    let domain_scores = DEFAULT_DOMAINS
        .iter()
        .map(|d| DomainScore {
            domain: d.to_string(),
            score: 0.3 + (rng.random_range(0..60) as f64) / 100.0,
        })
        .collect();
    Tweet {
        text,
        urls: vec![format!("https://bargain.example.com/x{serial}")],
        retweets: rng.random_range(0..3),
        likes: rng.random_range(0..3),
        replies: Vec::new(),
        domain_scores,
        url_domain_scores: Vec::new(),
    }
}

/// Every domain scored but wording drawn from a tiny pool: broad interest
/// with a low distinct-word ratio, which the conjunctive policy keeps.
fn breadth_only_tweet<R: Rng>(rng: &mut R) -> Tweet {
    let pool = ["roundup", "daily", "links", "thread", "today", "catchup"];
    let domain_scores = DEFAULT_DOMAINS
        .iter()
        .map(|d| DomainScore {
            domain: d.to_string(),
            score: 0.2 + (rng.random_range(0..30) as f64) / 100.0,
        })
        .collect();
    Tweet {
        text: words_from_pool(&pool, 12, rng),
        urls: Vec::new(),
        retweets: rng.random_range(0..8),
        likes: rng.random_range(0..20),
        replies: Vec::new(),
        domain_scores,
        url_domain_scores: Vec::new(),
    }
}

fn casual_tweet<R: Rng>(rng: &mut R) -> Tweet {
    let pool = [
        "footy", "weekend", "match", "team", "season", "tickets", "crowd",
    ];
    Tweet {
        text: words_from_pool(&pool, 9, rng),
        urls: Vec::new(),
        retweets: rng.random_range(0..5),
        likes: rng.random_range(0..15),
        replies: Vec::new(),
        domain_scores: vec![DomainScore {
            domain: "sports".to_string(),
            score: 0.5 + (rng.random_range(0..40) as f64) / 100.0,
        }],
        url_domain_scores: Vec::new(),
    }
}

fn build_user_records<R: Rng>(rng: &mut R) -> Vec<UserRecord> {
    HANDLES
        .iter()
        .enumerate()
        .map(|(u, handle)| {
            let tweets: Vec<Tweet> = if u == SPAMMER {
                (0..40).map(|i| spam_tweet(rng, i)).collect()
            } else if u == BREADTH_ONLY {
                (0..40).map(|_| breadth_only_tweet(rng)).collect()
            } else if u == CASUAL {
                (0..25).map(|_| casual_tweet(rng)).collect()
            } else {
                (0..40).map(|i| politics_tweet(rng, i % 3 == 0)).collect()
            };
            UserRecord {
                user_id: format!("u{u:03}"),
                handle: handle.to_string(),
                followers: rng.random_range(40..8000),
                friends: rng.random_range(30..2000),
                age_years: rng.random_range(1..=12) as f64,
                tweets,
                chunk: None,
            }
        })
        .collect()
}

fn build_labelled<R: Rng>(triples: &[LabelTriple], rng: &mut R) -> Vec<(LabelTriple, bool)> {
    // Politician-only facts so the labelled set survives spam filtering.
    let politician_facts: Vec<&LabelTriple> = triples
        .iter()
        .filter(|(_, p, _)| p == "memberOfParty" || p == "hasLocation")
        .collect();
    let mut labelled = Vec::new();
    for _ in 0..20 {
        let fact = politician_facts[rng.random_range(0..politician_facts.len())];
        labelled.push((fact.clone(), true));
    }
    for _ in 0..20 {
        // Corrupt the object within the same relation's range.
        let (s, p, _) = politician_facts[rng.random_range(0..politician_facts.len())].clone();
        loop {
            let o = if p == "memberOfParty" {
                PARTIES[rng.random_range(0..PARTIES.len())].to_string()
            } else {
                ELECTORATES[rng.random_range(0..ELECTORATES.len())].to_string()
            };
            let candidate = (s.clone(), p.clone(), o);
            if !triples.contains(&candidate) {
                labelled.push((candidate, false));
                break;
            }
        }
    }
    labelled
}

fn write_labelled(labelled: &[(LabelTriple, bool)], path: &Path) -> Result<()> {
    let mut out = String::new();
    for ((s, p, o), label) in labelled {
        out.push_str(&format!("{s}\t{p}\t{o}\t{label}\n"));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn write_tabular(path: &Path) -> Result<()> {
    let mut out = String::from("name\tparty\telectorate\n");
    for i in 0..12 {
        out.push_str(&format!(
            "{}\t{}\t{}\n",
            politician_name(i),
            party_of(i),
            electorate_of(i)
        ));
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn mapping_rules() -> Vec<MappingRule> {
    vec![
        MappingRule {
            subject_column: "name".into(),
            subject_prefix: None,
            predicate: "memberOfParty".into(),
            object: ObjectSource::Column("party".into()),
        },
        MappingRule {
            subject_column: "name".into(),
            subject_prefix: None,
            predicate: "hasLocation".into(),
            object: ObjectSource::Column("electorate".into()),
        },
        MappingRule {
            subject_column: "name".into(),
            subject_prefix: None,
            predicate: "hasSubtype".into(),
            object: ObjectSource::Constant("Politician".into()),
        },
    ]
}

/// What [`generate`] wrote.
#[derive(Debug, Clone, PartialEq)]
pub struct FixtureSummary {
    pub triples: usize,
    pub users: usize,
    pub labelled: usize,
}

/// Generate the fixture into `out_dir`: `triples.tsv`, `users.jsonl`,
/// `labelled.tsv`, `tabular.tsv`, `mapping.json`, `cred-config.json` and
/// `search-space.json`.
pub fn generate(seed: u64, out_dir: &Path) -> Result<FixtureSummary> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut rng = ChaCha20Rng::seed_from_u64(seed);

    let triples = build_triples();
    write_triples_tsv(&out_dir.join("triples.tsv"), &triples)?;

    let records = build_user_records(&mut rng);
    write_user_records(&out_dir.join("users.jsonl"), &records)?;

    let labelled = build_labelled(&triples, &mut rng);
    write_labelled(&labelled, &out_dir.join("labelled.tsv"))?;

    write_tabular(&out_dir.join("tabular.tsv"))?;
    let rules = mapping_rules();
    let rules_path = out_dir.join("mapping.json");
    let text = serde_json::to_string_pretty(&rules).expect("rules serialize");
    fs::write(&rules_path, text).map_err(|e| Error::io(&rules_path, e))?;

    CredibilityConfig::default().save(&out_dir.join("cred-config.json"))?;
    SearchSpace::default().save(&out_dir.join("search-space.json"))?;

    Ok(FixtureSummary {
        triples: triples.len(),
        users: records.len(),
        labelled: labelled.len(),
    })
}

/// Handle of the planted spammer (for tests and docs).
pub fn spammer_handle() -> &'static str {
    HANDLES[SPAMMER]
}

/// Handle of the planted politics-focused user.
pub fn politics_user_handle() -> &'static str {
    HANDLES[0]
}
