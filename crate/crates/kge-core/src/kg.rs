//! Dictionary-encoded triple store with membership queries and deterministic
//! train/valid/test splitting.
//!
//! Labels are interned on first sight and keep their id forever, so persisted
//! stores, checkpoints and exports line up across runs. Construction is
//! single-writer; once built, a [`KnowledgeGraph`] behind a shared reference
//! is safe to query from many threads.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result, TriplePosition};

/// A dictionary-encoded (subject, predicate, object) fact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Triple {
    pub subject: usize,
    pub predicate: usize,
    pub object: usize,
}

impl Triple {
    pub fn new(subject: usize, predicate: usize, object: usize) -> Self {
        Triple {
            subject,
            predicate,
            object,
        }
    }
}

/// Split tag for a triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SplitTag {
    Train,
    Valid,
    Test,
}

impl fmt::Display for SplitTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitTag::Train => write!(f, "train"),
            SplitTag::Valid => write!(f, "valid"),
            SplitTag::Test => write!(f, "test"),
        }
    }
}

impl FromStr for SplitTag {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitTag::Train),
            "valid" => Ok(SplitTag::Valid),
            "test" => Ok(SplitTag::Test),
            other => Err(Error::UnknownLabel {
                kind: "split tag",
                label: other.to_string(),
            }),
        }
    }
}

/// Bijective label <-> id map with dense, first-seen ids.
#[derive(Debug, Clone, Default)]
pub struct Dictionary {
    by_label: HashMap<String, usize>,
    labels: Vec<String>,
}

impl Dictionary {
    pub fn new() -> Self {
        Dictionary::default()
    }

    /// Intern a label, assigning the next dense id on first sight.
    pub fn intern(&mut self, label: &str) -> usize {
        if let Some(&id) = self.by_label.get(label) {
            return id;
        }
        let id = self.labels.len();
        self.labels.push(label.to_string());
        self.by_label.insert(label.to_string(), id);
        id
    }

    pub fn get(&self, label: &str) -> Option<usize> {
        self.by_label.get(label).copied()
    }

    pub fn label(&self, id: usize) -> Option<&str> {
        self.labels.get(id).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// SHA-256 over the id-ordered labels, newline-separated. Stored in
    /// checkpoint manifests so a checkpoint cannot silently be applied to a
    /// store it was not trained on.
    pub fn checksum(&self) -> String {
        let mut hasher = Sha256::new();
        for label in &self.labels {
            hasher.update(label.as_bytes());
            hasher.update(b"\n");
        }
        hex_string(&hasher.finalize())
    }
}

fn hex_string(bytes: &[u8]) -> String {
    let mut out = String::with_capacity(bytes.len() * 2);
    for b in bytes {
        out.push_str(&format!("{b:02x}"));
    }
    out
}

/// Outcome of [`KnowledgeGraph::add_triple`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AddOutcome {
    /// Index of the stored triple (the existing one when `duplicate`).
    pub index: usize,
    pub duplicate: bool,
}

/// Dictionary-encoded triple store. Duplicate facts collapse to one.
#[derive(Debug, Clone, Default)]
pub struct KnowledgeGraph {
    entities: Dictionary,
    relations: Dictionary,
    triples: Vec<Triple>,
    index: HashMap<Triple, usize>,
    tags: Option<Vec<SplitTag>>,
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        KnowledgeGraph::default()
    }

    pub fn entities(&self) -> &Dictionary {
        &self.entities
    }

    pub fn relations(&self) -> &Dictionary {
        &self.relations
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn tags(&self) -> Option<&[SplitTag]> {
        self.tags.as_deref()
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    fn check_label(label: &str, position: TriplePosition) -> Result<()> {
        if label.is_empty() {
            return Err(Error::EmptyLabel { position });
        }
        if label.contains(['\t', '\n', '\r']) {
            return Err(Error::UnstorableLabel { position });
        }
        Ok(())
    }

    /// Intern the labels and append the triple. Re-adding an existing fact is
    /// idempotent and reported through [`AddOutcome::duplicate`]. Adding after
    /// [`split`](Self::split) clears the tags.
    pub fn add_triple(
        &mut self,
        subject: &str,
        predicate: &str,
        object: &str,
    ) -> Result<AddOutcome> {
        Self::check_label(subject, TriplePosition::Subject)?;
        Self::check_label(predicate, TriplePosition::Predicate)?;
        Self::check_label(object, TriplePosition::Object)?;

        let triple = Triple {
            subject: self.entities.intern(subject),
            predicate: self.relations.intern(predicate),
            object: self.entities.intern(object),
        };
        if let Some(&index) = self.index.get(&triple) {
            return Ok(AddOutcome {
                index,
                duplicate: true,
            });
        }
        let index = self.triples.len();
        self.triples.push(triple);
        self.index.insert(triple, index);
        self.tags = None;
        Ok(AddOutcome {
            index,
            duplicate: false,
        })
    }

    /// True iff the triple exists in any split. O(1) expected.
    pub fn contains(&self, subject: usize, predicate: usize, object: usize) -> Result<bool> {
        if subject >= self.entities.len() {
            return Err(Error::IdOutOfRange {
                kind: "entity",
                id: subject,
                count: self.entities.len(),
            });
        }
        if object >= self.entities.len() {
            return Err(Error::IdOutOfRange {
                kind: "entity",
                id: object,
                count: self.entities.len(),
            });
        }
        if predicate >= self.relations.len() {
            return Err(Error::IdOutOfRange {
                kind: "relation",
                id: predicate,
                count: self.relations.len(),
            });
        }
        Ok(self.contains_triple(Triple::new(subject, predicate, object)))
    }

    /// Unchecked membership test for ids already known to be in range.
    pub fn contains_triple(&self, triple: Triple) -> bool {
        self.index.contains_key(&triple)
    }

    /// Triples carrying the given tag. Empty when the graph is untagged.
    pub fn split_triples(&self, tag: SplitTag) -> Vec<Triple> {
        match &self.tags {
            None => Vec::new(),
            Some(tags) => self
                .triples
                .iter()
                .zip(tags)
                .filter(|(_, t)| **t == tag)
                .map(|(tr, _)| *tr)
                .collect(),
        }
    }

    /// Tag every triple train/valid/test.
    ///
    /// Sizes follow the ratios to within one triple (largest-remainder
    /// apportioning), after which any valid/test triple whose entity or
    /// relation is unseen in train is reassigned to train so that ranking
    /// never meets an untrained id. A relation with a single triple therefore
    /// always stays in train. Same seed, same data: identical tags.
    pub fn split(&mut self, ratios: (f64, f64, f64), seed: u64) -> Result<()> {
        let (rt, rv, rs) = ratios;
        if !(rt > 0.0 && rv > 0.0 && rs > 0.0) || ((rt + rv + rs) - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSplitRatios { ratios });
        }
        let n = self.triples.len();
        if n == 0 {
            return Err(Error::invalid("cannot split an empty graph"));
        }

        let counts = apportion(n, [rt, rv, rs]);
        let mut order: Vec<usize> = (0..n).collect();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        order.shuffle(&mut rng);

        let mut tags = vec![SplitTag::Train; n];
        for (pos, &idx) in order.iter().enumerate() {
            tags[idx] = if pos < counts[0] {
                SplitTag::Train
            } else if pos < counts[0] + counts[1] {
                SplitTag::Valid
            } else {
                SplitTag::Test
            };
        }

        // Coverage pass: walk triples in index order, pulling into train any
        // valid/test triple that mentions an entity or relation train has not
        // seen yet. Pulled triples extend the coverage for later ones.
        let mut seen_entities = vec![false; self.entities.len()];
        let mut seen_relations = vec![false; self.relations.len()];
        for (triple, tag) in self.triples.iter().zip(&tags) {
            if *tag == SplitTag::Train {
                seen_entities[triple.subject] = true;
                seen_entities[triple.object] = true;
                seen_relations[triple.predicate] = true;
            }
        }
        for (triple, tag) in self.triples.iter().zip(tags.iter_mut()) {
            if *tag == SplitTag::Train {
                continue;
            }
            if !seen_entities[triple.subject]
                || !seen_entities[triple.object]
                || !seen_relations[triple.predicate]
            {
                *tag = SplitTag::Train;
                seen_entities[triple.subject] = true;
                seen_entities[triple.object] = true;
                seen_relations[triple.predicate] = true;
            }
        }

        self.tags = Some(tags);
        Ok(())
    }

    /// Persist as `entities.tsv`, `relations.tsv`, `triples.tsv` and, when
    /// tagged, `splits.tsv` (id TAB label / three id columns / index TAB tag).
    pub fn save(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        write_dictionary(&dir.join("entities.tsv"), &self.entities)?;
        write_dictionary(&dir.join("relations.tsv"), &self.relations)?;

        let path = dir.join("triples.tsv");
        let mut out = String::new();
        for t in &self.triples {
            out.push_str(&format!("{}\t{}\t{}\n", t.subject, t.predicate, t.object));
        }
        fs::write(&path, out).map_err(|e| Error::io(&path, e))?;

        if let Some(tags) = &self.tags {
            let path = dir.join("splits.tsv");
            let mut out = String::new();
            for (i, tag) in tags.iter().enumerate() {
                out.push_str(&format!("{i}\t{tag}\n"));
            }
            fs::write(&path, out).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    /// Load a store written by [`save`](Self::save).
    pub fn load(dir: &Path) -> Result<Self> {
        let entities = read_dictionary(&dir.join("entities.tsv"))?;
        let relations = read_dictionary(&dir.join("relations.tsv"))?;

        let path = dir.join("triples.tsv");
        let text = fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
        let mut triples = Vec::new();
        let mut index = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split('\t').collect();
            if cols.len() != 3 {
                return Err(Error::MalformedLine {
                    path: path.clone(),
                    line: lineno + 1,
                    expected: 3,
                    found: cols.len(),
                });
            }
            let parse = |s: &str, what: &str| -> Result<usize> {
                s.parse().map_err(|_| Error::InvalidRecord {
                    path: path.clone(),
                    line: lineno + 1,
                    message: format!("invalid {what} id {s:?}"),
                })
            };
            let triple = Triple {
                subject: parse(cols[0], "subject")?,
                predicate: parse(cols[1], "predicate")?,
                object: parse(cols[2], "object")?,
            };
            for (id, count, kind) in [
                (triple.subject, entities.len(), "entity"),
                (triple.object, entities.len(), "entity"),
                (triple.predicate, relations.len(), "relation"),
            ] {
                if id >= count {
                    return Err(Error::IdOutOfRange { kind, id, count });
                }
            }
            if index.contains_key(&triple) {
                return Err(Error::InvalidRecord {
                    path: path.clone(),
                    line: lineno + 1,
                    message: "duplicate triple".to_string(),
                });
            }
            index.insert(triple, triples.len());
            triples.push(triple);
        }

        let splits_path = dir.join("splits.tsv");
        let tags = if splits_path.exists() {
            let text = fs::read_to_string(&splits_path).map_err(|e| Error::io(&splits_path, e))?;
            let mut tags = vec![SplitTag::Train; triples.len()];
            let mut seen = vec![false; triples.len()];
            for (lineno, line) in text.lines().enumerate() {
                if line.is_empty() {
                    continue;
                }
                let cols: Vec<&str> = line.split('\t').collect();
                if cols.len() != 2 {
                    return Err(Error::MalformedLine {
                        path: splits_path.clone(),
                        line: lineno + 1,
                        expected: 2,
                        found: cols.len(),
                    });
                }
                let idx: usize = cols[0].parse().map_err(|_| Error::InvalidRecord {
                    path: splits_path.clone(),
                    line: lineno + 1,
                    message: format!("invalid triple index {:?}", cols[0]),
                })?;
                if idx >= triples.len() {
                    return Err(Error::IdOutOfRange {
                        kind: "triple",
                        id: idx,
                        count: triples.len(),
                    });
                }
                tags[idx] = cols[1].parse()?;
                seen[idx] = true;
            }
            if seen.iter().any(|s| !s) {
                return Err(Error::invalid(format!(
                    "{}: not every triple is tagged",
                    splits_path.display()
                )));
            }
            Some(tags)
        } else {
            None
        };

        Ok(KnowledgeGraph {
            entities,
            relations,
            triples,
            index,
            tags,
        })
    }
}

/// Largest-remainder apportioning of `n` items over the given fractions.
fn apportion(n: usize, fractions: [f64; 3]) -> [usize; 3] {
    let exact: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut counts: Vec<usize> = exact.iter().map(|e| e.floor() as usize).collect();
    let mut remainder = n - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        let fa = exact[a] - exact[a].floor();
        let fb = exact[b] - exact[b].floor();
        fb.partial_cmp(&fa).unwrap().then(a.cmp(&b))
    });
    for &i in &order {
        if remainder == 0 {
            break;
        }
        counts[i] += 1;
        remainder -= 1;
    }
    [counts[0], counts[1], counts[2]]
}

fn write_dictionary(path: &Path, dict: &Dictionary) -> Result<()> {
    let mut out = Vec::new();
    for (id, label) in dict.labels().iter().enumerate() {
        writeln!(out, "{id}\t{label}").map_err(|e| Error::io(path, e))?;
    }
    fs::write(path, out).map_err(|e| Error::io(path, e))
}

fn read_dictionary(path: &Path) -> Result<Dictionary> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut dict = Dictionary::new();
    for (lineno, line) in text.lines().enumerate() {
        if line.is_empty() {
            continue;
        }
        let (id, label) = line.split_once('\t').ok_or_else(|| Error::MalformedLine {
            path: path.to_path_buf(),
            line: lineno + 1,
            expected: 2,
            found: 1,
        })?;
        let id: usize = id.parse().map_err(|_| Error::InvalidRecord {
            path: path.to_path_buf(),
            line: lineno + 1,
            message: format!("invalid id {id:?}"),
        })?;
        if id != dict.len() || label.is_empty() {
            return Err(Error::InvalidRecord {
                path: path.to_path_buf(),
                line: lineno + 1,
                message: format!(
                    "ids must be dense and labels non-empty (id {id}, label {label:?})"
                ),
            });
        }
        dict.intern(label);
    }
    Ok(dict)
}

/// Entities and relations actually used by a set of triples.
pub fn used_ids(triples: &[Triple]) -> (HashSet<usize>, HashSet<usize>) {
    let mut entities = HashSet::new();
    let mut relations = HashSet::new();
    for t in triples {
        entities.insert(t.subject);
        entities.insert(t.object);
        relations.insert(t.predicate);
    }
    (entities, relations)
}
