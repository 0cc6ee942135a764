//! C ABI over the core toolkit: opaque handles for stores and checkpoints,
//! integer status codes, and a thread-local last-error message.
//!
//! Ownership rules: every `*_open` call that succeeds transfers ownership of
//! the returned handle to the caller, who must release it with the matching
//! `*_free`. Handles are immutable after opening and safe to share across
//! threads for concurrent scoring.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use kge_core::evaluation::{evaluate_ranking_with, RankMode};
use kge_core::kg::{KnowledgeGraph, SplitTag, Triple};
use kge_core::models::{load_checkpoint, verify_dictionaries, Manifest, ModelParameters};

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KgeStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    IoOrParse = 3,
    IdOutOfRange = 4,
    Mismatch = 5,
    InvalidArgument = 6,
    Panic = 7,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let owned = message.into();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(owned).ok();
    });
}

fn fail(status: KgeStatus, message: impl Into<String>) -> KgeStatus {
    set_error(message);
    status
}

/// Message for the most recent error on this thread, or NULL when the last
/// call succeeded. The pointer stays valid until the next failing call on
/// the same thread; do not free it.
#[no_mangle]
pub extern "C" fn kge_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(ptr::null(), |message| message.as_ptr())
    })
}

/// Opaque dictionary-encoded triple store.
pub struct KgeGraph {
    inner: KnowledgeGraph,
}

/// Opaque trained model checkpoint.
pub struct KgeModel {
    params: ModelParameters,
    manifest: Manifest,
}

/// Ranking metrics produced by `kge_evaluate_ranking`.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct KgeRankingMetrics {
    pub test_size: usize,
    pub mrr: f64,
    pub mean_rank: f64,
    pub hits_at_1: f64,
    pub hits_at_3: f64,
    pub hits_at_10: f64,
}

unsafe fn dir_from<'a>(path: *const c_char) -> Result<&'a Path, KgeStatus> {
    if path.is_null() {
        return Err(fail(KgeStatus::NullPointer, "path is NULL"));
    }
    match CStr::from_ptr(path).to_str() {
        Ok(s) => Ok(Path::new(s)),
        Err(_) => Err(fail(KgeStatus::InvalidUtf8, "path is not valid UTF-8")),
    }
}

/// Open a persisted store directory (entities.tsv / relations.tsv /
/// triples.tsv and optional splits.tsv).
///
/// # Safety
/// `dir` must be a NUL-terminated string and `out` a valid pointer; the
/// returned handle must be released with [`kge_graph_free`].
#[no_mangle]
pub unsafe extern "C" fn kge_graph_open(dir: *const c_char, out: *mut *mut KgeGraph) -> KgeStatus {
    if out.is_null() {
        return fail(KgeStatus::NullPointer, "out is NULL");
    }
    let dir = match dir_from(dir) {
        Ok(d) => d,
        Err(status) => return status,
    };
    let result = catch_unwind(AssertUnwindSafe(|| KnowledgeGraph::load(dir)));
    match result {
        Ok(Ok(inner)) => {
            *out = Box::into_raw(Box::new(KgeGraph { inner }));
            KgeStatus::Ok
        }
        Ok(Err(e)) => fail(KgeStatus::IoOrParse, e.to_string()),
        Err(_) => fail(KgeStatus::Panic, "panic while loading store"),
    }
}

/// # Safety
/// `graph` must be a handle from [`kge_graph_open`] (or NULL), not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kge_graph_free(graph: *mut KgeGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kge_graph_num_entities(graph: *const KgeGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.entities().len())
}

/// # Safety
/// `graph` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kge_graph_num_relations(graph: *const KgeGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.relations().len())
}

/// # Safety
/// `graph` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kge_graph_num_triples(graph: *const KgeGraph) -> usize {
    graph.as_ref().map_or(0, |g| g.inner.len())
}

/// Membership test over every split. Writes 1 or 0 into `out`.
///
/// # Safety
/// `graph` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kge_graph_contains(
    graph: *const KgeGraph,
    subject: usize,
    predicate: usize,
    object: usize,
    out: *mut i32,
) -> KgeStatus {
    let Some(graph) = graph.as_ref() else {
        return fail(KgeStatus::NullPointer, "graph is NULL");
    };
    if out.is_null() {
        return fail(KgeStatus::NullPointer, "out is NULL");
    }
    match graph.inner.contains(subject, predicate, object) {
        Ok(found) => {
            *out = i32::from(found);
            KgeStatus::Ok
        }
        Err(e) => fail(KgeStatus::IdOutOfRange, e.to_string()),
    }
}

/// Resolve an entity label to its id. Writes the id into `out`.
///
/// # Safety
/// `graph` must be a live handle, `label` NUL-terminated, `out` valid.
#[no_mangle]
pub unsafe extern "C" fn kge_graph_entity_id(
    graph: *const KgeGraph,
    label: *const c_char,
    out: *mut usize,
) -> KgeStatus {
    let Some(graph) = graph.as_ref() else {
        return fail(KgeStatus::NullPointer, "graph is NULL");
    };
    if label.is_null() || out.is_null() {
        return fail(KgeStatus::NullPointer, "label or out is NULL");
    }
    let Ok(label) = CStr::from_ptr(label).to_str() else {
        return fail(KgeStatus::InvalidUtf8, "label is not valid UTF-8");
    };
    match graph.inner.entities().get(label) {
        Some(id) => {
            *out = id;
            KgeStatus::Ok
        }
        None => fail(
            KgeStatus::InvalidArgument,
            format!("unknown entity {label:?}"),
        ),
    }
}

/// Open a checkpoint directory written by `kge train`.
///
/// # Safety
/// `dir` must be a NUL-terminated string and `out` a valid pointer; release
/// the handle with [`kge_model_free`].
#[no_mangle]
pub unsafe extern "C" fn kge_model_open(dir: *const c_char, out: *mut *mut KgeModel) -> KgeStatus {
    if out.is_null() {
        return fail(KgeStatus::NullPointer, "out is NULL");
    }
    let dir = match dir_from(dir) {
        Ok(d) => d,
        Err(status) => return status,
    };
    let result = catch_unwind(AssertUnwindSafe(|| load_checkpoint(dir)));
    match result {
        Ok(Ok((params, manifest))) => {
            *out = Box::into_raw(Box::new(KgeModel { params, manifest }));
            KgeStatus::Ok
        }
        Ok(Err(e)) => fail(KgeStatus::IoOrParse, e.to_string()),
        Err(_) => fail(KgeStatus::Panic, "panic while loading checkpoint"),
    }
}

/// # Safety
/// `model` must be a handle from [`kge_model_open`] (or NULL), not yet freed.
#[no_mangle]
pub unsafe extern "C" fn kge_model_free(model: *mut KgeModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kge_model_dimension(model: *const KgeModel) -> usize {
    model.as_ref().map_or(0, |m| m.params.k)
}

/// Model kind as a static NUL-terminated name (transe, distmult, complex,
/// hole, convkb).
///
/// # Safety
/// `model` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn kge_model_kind(model: *const KgeModel) -> *const c_char {
    use kge_core::models::ModelKind;
    let Some(model) = model.as_ref() else {
        return ptr::null();
    };
    let name: &'static [u8] = match model.params.kind {
        ModelKind::TransE => b"transe\0",
        ModelKind::DistMult => b"distmult\0",
        ModelKind::ComplEx => b"complex\0",
        ModelKind::HolE => b"hole\0",
        ModelKind::ConvKb => b"convkb\0",
    };
    name.as_ptr().cast()
}

/// Check that a checkpoint belongs to a store (dictionary checksums).
///
/// # Safety
/// Both handles must be live.
#[no_mangle]
pub unsafe extern "C" fn kge_model_matches_graph(
    model: *const KgeModel,
    graph: *const KgeGraph,
) -> KgeStatus {
    let (Some(model), Some(graph)) = (model.as_ref(), graph.as_ref()) else {
        return fail(KgeStatus::NullPointer, "model or graph is NULL");
    };
    match verify_dictionaries(&model.manifest, &graph.inner) {
        Ok(()) => KgeStatus::Ok,
        Err(e) => fail(KgeStatus::Mismatch, e.to_string()),
    }
}

/// Score one triple; higher is more plausible. Writes the score into `out`.
///
/// # Safety
/// `model` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kge_model_score(
    model: *const KgeModel,
    subject: usize,
    predicate: usize,
    object: usize,
    out: *mut f64,
) -> KgeStatus {
    let Some(model) = model.as_ref() else {
        return fail(KgeStatus::NullPointer, "model is NULL");
    };
    if out.is_null() {
        return fail(KgeStatus::NullPointer, "out is NULL");
    }
    if subject >= model.params.num_entities()
        || object >= model.params.num_entities()
        || predicate >= model.params.num_relations()
    {
        return fail(
            KgeStatus::IdOutOfRange,
            format!("triple ({subject}, {predicate}, {object}) is out of range"),
        );
    }
    *out = model.params.score(Triple::new(subject, predicate, object));
    KgeStatus::Ok
}

/// Evaluate the store's test split under the ranking protocol
/// (`filtered` != 0 removes known positives) and fill `out`.
///
/// # Safety
/// Both handles must be live and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn kge_evaluate_ranking(
    model: *const KgeModel,
    graph: *const KgeGraph,
    filtered: i32,
    out: *mut KgeRankingMetrics,
) -> KgeStatus {
    let (Some(model), Some(graph)) = (model.as_ref(), graph.as_ref()) else {
        return fail(KgeStatus::NullPointer, "model or graph is NULL");
    };
    if out.is_null() {
        return fail(KgeStatus::NullPointer, "out is NULL");
    }
    if let Err(e) = verify_dictionaries(&model.manifest, &graph.inner) {
        return fail(KgeStatus::Mismatch, e.to_string());
    }
    let test = graph.inner.split_triples(SplitTag::Test);
    if test.is_empty() {
        return fail(
            KgeStatus::InvalidArgument,
            "store has no test split; run kge split first",
        );
    }
    let mode = if filtered != 0 {
        RankMode::Filtered
    } else {
        RankMode::Raw
    };
    let result = catch_unwind(AssertUnwindSafe(|| {
        evaluate_ranking_with(&model.params, &graph.inner, &test, mode, false)
    }));
    match result {
        Ok(Ok(report)) => {
            *out = KgeRankingMetrics {
                test_size: report.test_size,
                mrr: report.mrr,
                mean_rank: report.mr,
                hits_at_1: report.hits1,
                hits_at_3: report.hits3,
                hits_at_10: report.hits10,
            };
            KgeStatus::Ok
        }
        Ok(Err(e)) => fail(KgeStatus::InvalidArgument, e.to_string()),
        Err(_) => fail(KgeStatus::Panic, "panic during evaluation"),
    }
}
