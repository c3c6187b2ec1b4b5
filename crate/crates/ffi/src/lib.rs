//! C ABI over the letalone toolkit.
//!
//! Every fallible function returns an [`LaStatus`] and writes its result
//! through an out-pointer. On failure a message is kept per thread and can be
//! read with [`la_last_error`]. Objects are opaque handles owned by the caller
//! and released with their `*_free` function. Strings and buffers returned by
//! the library are released with [`la_string_free`] and [`la_buffer_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use letalone::filter::{filter_bytes, FilterScenario, RemovalUnit, ScenarioName};
use letalone::lexicon::LexiconConfig;
use letalone::ngram::NGramModel;
use letalone::scoring::{delta_slor, item_correct_with, slor, TieRule};
use letalone::suite_io::{read_suite, write_suite};
use letalone::template::{generate_suite, ConditionLabel, Property, Suite};
use letalone::tokenize::TokenizerSpec;
use letalone::unigram::{build_unigram_from_str, SmoothingSpec, UnigramModel};
use letalone::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidArgument = 3,
    Io = 4,
    Parse = 5,
    NonFinite = 6,
    OutOfRange = 7,
    Panic = 99,
}

/// A generated or loaded test suite.
pub struct LaSuite {
    suite: Suite,
}

pub struct LaUnigram {
    model: UnigramModel,
}

pub struct LaNGram {
    model: NGramModel,
}

/// Bytes owned by the library.
#[repr(C)]
pub struct LaBuffer {
    pub data: *mut u8,
    pub len: usize,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = CString::new(msg.into().replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

struct Fail(LaStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        let status = match &e {
            Error::Io { .. } => LaStatus::Io,
            Error::InvalidUtf8 { .. } => LaStatus::InvalidUtf8,
            Error::Parse { .. } | Error::Json(_) => LaStatus::Parse,
            Error::NonFinite(_) => LaStatus::NonFinite,
            _ => LaStatus::InvalidArgument,
        };
        Fail(status, e.to_string())
    }
}

fn fail<T>(status: LaStatus, msg: impl Into<String>) -> Result<T, Fail> {
    Err(Fail(status, msg.into()))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> LaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LaStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            LaStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return fail(LaStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(p)
        .to_str()
        .or_else(|_| fail(LaStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().map_or_else(|| fail(LaStatus::NullPointer, format!("{what} is null")), Ok)
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().map_or_else(|| fail(LaStatus::NullPointer, "handle is null"), Ok)
}

fn into_c_string(s: String) -> Result<*mut c_char, Fail> {
    CString::new(s)
        .map(CString::into_raw)
        .or_else(|_| fail(LaStatus::InvalidArgument, "string contains a nul byte"))
}

/// Message for the most recent failure on this thread, or NULL. Valid until
/// the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn la_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static string.
#[no_mangle]
pub extern "C" fn la_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// # Safety
/// `s` must come from this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn la_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// # Safety
/// `buf` must have been filled by this library and not have been freed.
#[no_mangle]
pub unsafe extern "C" fn la_buffer_free(buf: LaBuffer) {
    if !buf.data.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(buf.data, buf.len)));
    }
}

/// Per-token log odds of a sentence against its unigram baseline.
///
/// # Safety
/// `unigram_logprobs` must point to `n` doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn la_slor(
    lm_logprob_total: f64,
    unigram_logprobs: *const f64,
    n: usize,
    out: *mut f64,
) -> LaStatus {
    guard(|| {
        if unigram_logprobs.is_null() && n > 0 {
            return fail(LaStatus::NullPointer, "unigram_logprobs is null");
        }
        let lps = if n == 0 { &[][..] } else { std::slice::from_raw_parts(unigram_logprobs, n) };
        *out_ptr(out)? = slor(lm_logprob_total, lps)?;
        Ok(())
    })
}

unsafe fn out_ptr<'a, T>(p: *mut T) -> Result<&'a mut T, Fail> {
    out(p, "out")
}

/// SLOR drop caused by the manipulation: `s_minus_manip - s_plus_manip`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn la_delta_slor(s_minus_manip: f64, s_plus_manip: f64, out: *mut f64) -> LaStatus {
    guard(|| {
        *out_ptr(out)? = delta_slor(s_minus_manip, s_plus_manip)?;
        Ok(())
    })
}

/// Item correctness; ties count as correct unless `strict`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn la_item_correct(delta_ltaln: f64, delta_and: f64, strict: bool, out: *mut bool) -> LaStatus {
    guard(|| {
        if !delta_ltaln.is_finite() || !delta_and.is_finite() {
            return fail(LaStatus::NonFinite, "deltas must be finite");
        }
        let rule = if strict { TieRule::Strict } else { TieRule::Inclusive };
        *out_ptr(out)? = item_correct_with(delta_ltaln, delta_and, rule);
        Ok(())
    })
}

/// Generates a suite. `lexicon_json` may be NULL for the bundled lexicon.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn la_suite_generate(
    property: *const c_char,
    lexicon_json: *const c_char,
    out: *mut *mut LaSuite,
) -> LaStatus {
    guard(|| {
        let property: Property = text(property, "property")?.parse()?;
        let lexicon = if lexicon_json.is_null() {
            if property.is_formal() {
                LexiconConfig::default_formal()
            } else {
                LexiconConfig::default_semantic()
            }
        } else {
            LexiconConfig::from_json(text(lexicon_json, "lexicon_json")?)?
        };
        let suite = generate_suite(&lexicon, property)?;
        *out_ptr(out)? = Box::into_raw(Box::new(LaSuite { suite }));
        Ok(())
    })
}

/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn la_suite_load(path: *const c_char, out: *mut *mut LaSuite) -> LaStatus {
    guard(|| {
        let suite = read_suite(Path::new(text(path, "path")?))?;
        *out_ptr(out)? = Box::into_raw(Box::new(LaSuite { suite }));
        Ok(())
    })
}

/// # Safety
/// `suite` must be a live handle; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn la_suite_save(suite: *const LaSuite, path: *const c_char) -> LaStatus {
    guard(|| {
        write_suite(&handle(suite)?.suite, Path::new(text(path, "path")?))?;
        Ok(())
    })
}

/// Number of items (both orders). Returns 0 for NULL.
///
/// # Safety
/// `suite` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn la_suite_len(suite: *const LaSuite) -> usize {
    suite.as_ref().map_or(0, |s| s.suite.k())
}

/// # Safety
/// `suite` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn la_suite_pairs(suite: *const LaSuite) -> usize {
    suite.as_ref().map_or(0, |s| s.suite.pairs())
}

/// Copies the sentence of item `index` under `condition` (`+m+l`, `-m+l`,
/// `+m-l` or `-m-l`). Free the result with [`la_string_free`].
///
/// # Safety
/// `suite` must be a live handle; `condition` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn la_suite_sentence(
    suite: *const LaSuite,
    index: usize,
    condition: *const c_char,
    out: *mut *mut c_char,
) -> LaStatus {
    guard(|| {
        let suite = &handle(suite)?.suite;
        let key = text(condition, "condition")?;
        let label = ConditionLabel::parse_key(key)
            .map_or_else(|| fail(LaStatus::InvalidArgument, format!("unknown condition `{key}`")), Ok)?;
        let item = suite
            .items
            .get(index)
            .map_or_else(|| fail(LaStatus::OutOfRange, format!("index {index} out of range")), Ok)?;
        *out_ptr(out)? = into_c_string(item.sentence(label).to_string())?;
        Ok(())
    })
}

/// # Safety
/// `suite` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn la_suite_free(suite: *mut LaSuite) {
    if !suite.is_null() {
        drop(Box::from_raw(suite));
    }
}

/// Builds a unigram model from corpus text. `tokenizer` is e.g.
/// `whitespace` or `whitespace+lower`; `smoothing` is e.g. `floor` or `add-k:1`.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn la_unigram_build(
    corpus: *const c_char,
    tokenizer: *const c_char,
    smoothing: *const c_char,
    out: *mut *mut LaUnigram,
) -> LaStatus {
    guard(|| {
        let tok = TokenizerSpec::parse_name(text(tokenizer, "tokenizer")?)?;
        let sm: SmoothingSpec = text(smoothing, "smoothing")?.parse()?;
        let model = build_unigram_from_str(text(corpus, "corpus")?, tok, sm)?;
        *out_ptr(out)? = Box::into_raw(Box::new(LaUnigram { model }));
        Ok(())
    })
}

/// # Safety
/// `path` must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn la_unigram_load(path: *const c_char, out: *mut *mut LaUnigram) -> LaStatus {
    guard(|| {
        let model = UnigramModel::load(Path::new(text(path, "path")?))?;
        *out_ptr(out)? = Box::into_raw(Box::new(LaUnigram { model }));
        Ok(())
    })
}

/// Natural-log probability of one token.
///
/// # Safety
/// `model` must be a live handle; `token` NUL-terminated; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn la_unigram_logprob(model: *const LaUnigram, token: *const c_char, out: *mut f64) -> LaStatus {
    guard(|| {
        *out_ptr(out)? = handle(model)?.model.logprob(text(token, "token")?)?;
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn la_unigram_free(model: *mut LaUnigram) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Trains the reference n-gram model on line-oriented corpus text.
///
/// # Safety
/// String arguments must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn la_ngram_train(
    corpus: *const c_char,
    order: usize,
    discount: f64,
    tokenizer: *const c_char,
    out: *mut *mut LaNGram,
) -> LaStatus {
    guard(|| {
        let tok = TokenizerSpec::parse_name(text(tokenizer, "tokenizer")?)?;
        let model = NGramModel::train_str(text(corpus, "corpus")?, order, discount, tok)?;
        *out_ptr(out)? = Box::into_raw(Box::new(LaNGram { model }));
        Ok(())
    })
}

/// Scores `target` after `context` and writes the summed natural-log
/// probability and the target token count.
///
/// # Safety
/// `model` must be a live handle; strings NUL-terminated; outputs writable.
#[no_mangle]
pub unsafe extern "C" fn la_ngram_score(
    model: *const LaNGram,
    context: *const c_char,
    target: *const c_char,
    out_logprob: *mut f64,
    out_tokens: *mut usize,
) -> LaStatus {
    guard(|| {
        let model = &handle(model)?.model;
        let (tokens, lps) = model.score_text(text(context, "context")?, text(target, "target")?)?;
        *out(out_logprob, "out_logprob")? = lps.iter().sum();
        *out(out_tokens, "out_tokens")? = tokens.len();
        Ok(())
    })
}

/// # Safety
/// `model` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn la_ngram_free(model: *mut LaNGram) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Filters `len` bytes of UTF-8 text under a scenario (`NoLet`, ...) with
/// `line` or `sentence` removal units. The kept text is written to `out`
/// (free with [`la_buffer_free`]) and the number of removed units to
/// `removed`.
///
/// # Safety
/// `data` must point to `len` readable bytes; `scenario` and `unit` must be
/// NUL-terminated; `out` and `removed` writable.
#[no_mangle]
pub unsafe extern "C" fn la_filter_text(
    data: *const u8,
    len: usize,
    scenario: *const c_char,
    unit: *const c_char,
    out: *mut LaBuffer,
    removed: *mut u64,
) -> LaStatus {
    guard(|| {
        if data.is_null() && len > 0 {
            return fail(LaStatus::NullPointer, "data is null");
        }
        let input = if len == 0 { &[][..] } else { std::slice::from_raw_parts(data, len) };
        let name: ScenarioName = text(scenario, "scenario")?.parse()?;
        let unit: RemovalUnit = text(unit, "unit")?.parse()?;
        let (kept, report) = filter_bytes(input, &FilterScenario::new(name).with_unit(unit))?;
        let out_buf = out_ptr(out)?;
        let removed = self::out(removed, "removed")?;
        let boxed = kept.into_boxed_slice();
        let len = boxed.len();
        *out_buf = LaBuffer {
            data: Box::into_raw(boxed).cast(),
            len,
        };
        *removed = report.units_removed;
        Ok(())
    })
}
