//! C ABI for the fedba simulator.
//!
//! Every function returns a [`FedbaStatus`]; on failure a description is
//! available from [`fedba_last_error`] on the same thread. Handles are
//! opaque and must be released with their matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use fedba::fl::{fedavg_weights, fedba_weights_from_distances, ClientUpdate, FedBaGuard};
use fedba::harness::{parse_config_text, run_experiment, write_metrics, Algorithm, ExperimentConfig, RoundRecord};
use fedba::nn::ParamVector;
use fedba::Error;

/// Result code of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FedbaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Shape = 3,
    Validation = 4,
    Domain = 5,
    Format = 6,
    Capacity = 7,
    NonFinite = 8,
    Client = 9,
    Config = 10,
    Io = 11,
    OutOfRange = 12,
    Panic = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FedbaAlgorithm {
    FedAvg = 0,
    FedBa = 1,
}

/// One evaluated round, as written to the metrics CSV.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct FedbaRecord {
    pub round: u64,
    pub algorithm: FedbaAlgorithm,
    pub seed: u64,
    pub test_accuracy: f64,
    pub test_loss: f64,
    pub global_train_loss: f64,
    pub min_weight: f64,
    pub max_weight: f64,
    pub weight_entropy: f64,
    pub mean_sq_distance: f64,
}

/// Opaque experiment configuration.
pub struct FedbaConfig(ExperimentConfig);

/// Opaque list of round records.
pub struct FedbaRecords(Vec<RoundRecord>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(msg));
}

fn status_of(err: &Error) -> FedbaStatus {
    match err {
        Error::Shape(_) => FedbaStatus::Shape,
        Error::Validation(_) => FedbaStatus::Validation,
        Error::Domain(_) => FedbaStatus::Domain,
        Error::Format { .. } => FedbaStatus::Format,
        Error::Capacity(_) => FedbaStatus::Capacity,
        Error::NonFinite { .. } => FedbaStatus::NonFinite,
        Error::Client { .. } => FedbaStatus::Client,
        Error::Config { .. } => FedbaStatus::Config,
        Error::Io { .. } => FedbaStatus::Io,
    }
}

struct Failure(FedbaStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(FedbaStatus::NullPointer, format!("`{what}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FedbaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FedbaStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".to_string());
            FedbaStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Failure(FedbaStatus::InvalidUtf8, format!("`{what}` is not valid UTF-8")))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], Failure> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null(what));
    }
    Ok(slice::from_raw_parts(p, len))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

/// Message of the last failed call on this thread, or null. The pointer is
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn fedba_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Creates a configuration holding the default hyperparameters.
///
/// # Safety
/// `out` must be a valid pointer to writable storage.
#[no_mangle]
pub unsafe extern "C" fn fedba_config_new(out: *mut *mut FedbaConfig) -> FedbaStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(FedbaConfig(ExperimentConfig::default())));
        Ok(())
    })
}

/// Creates a configuration from a named preset such as `mnist-paper`.
///
/// # Safety
/// `name` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fedba_config_preset(name: *const c_char, out: *mut *mut FedbaConfig) -> FedbaStatus {
    guard(|| {
        let name = str_arg(name, "name")?;
        let out = out_arg(out, "out")?;
        *out = Box::into_raw(Box::new(FedbaConfig(ExperimentConfig::preset(name)?)));
        Ok(())
    })
}

/// Sets one field by its config-file key.
///
/// # Safety
/// `cfg` must come from this library; `key` and `value` must be
/// NUL-terminated strings.
#[no_mangle]
pub unsafe extern "C" fn fedba_config_set(
    cfg: *mut FedbaConfig,
    key: *const c_char,
    value: *const c_char,
) -> FedbaStatus {
    guard(|| {
        let cfg = out_arg(cfg, "cfg")?;
        let key = str_arg(key, "key")?;
        let value = str_arg(value, "value")?;
        cfg.0.set(key, value)?;
        Ok(())
    })
}

/// Applies the `key=value` lines of a config file to `cfg`.
///
/// # Safety
/// `cfg` must come from this library; `text` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn fedba_config_apply_text(cfg: *mut FedbaConfig, text: *const c_char) -> FedbaStatus {
    guard(|| {
        let cfg = out_arg(cfg, "cfg")?;
        let text = str_arg(text, "text")?;
        let mut next = cfg.0.clone();
        for (k, v) in parse_config_text(text)? {
            next.set(&k, &v)?;
        }
        cfg.0 = next;
        Ok(())
    })
}

/// Checks every field's range.
///
/// # Safety
/// `cfg` must come from this library.
#[no_mangle]
pub unsafe extern "C" fn fedba_config_validate(cfg: *const FedbaConfig) -> FedbaStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        cfg.0.validate()?;
        Ok(())
    })
}

/// # Safety
/// `cfg` must come from this library (or be null) and not be used again.
#[no_mangle]
pub unsafe extern "C" fn fedba_config_free(cfg: *mut FedbaConfig) {
    if !cfg.is_null() {
        drop(Box::from_raw(cfg));
    }
}

/// Loads the configured dataset and runs the whole experiment.
///
/// # Safety
/// `cfg` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fedba_run_experiment(cfg: *const FedbaConfig, out: *mut *mut FedbaRecords) -> FedbaStatus {
    guard(|| {
        let cfg = cfg.as_ref().ok_or_else(|| null("cfg"))?;
        let out = out_arg(out, "out")?;
        let records = run_experiment(&cfg.0)?;
        *out = Box::into_raw(Box::new(FedbaRecords(records)));
        Ok(())
    })
}

/// Number of records, or 0 for a null handle.
///
/// # Safety
/// `records` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn fedba_records_len(records: *const FedbaRecords) -> usize {
    records.as_ref().map_or(0, |r| r.0.len())
}

/// Copies record `index` into `out`.
///
/// # Safety
/// `records` must come from this library; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fedba_records_get(
    records: *const FedbaRecords,
    index: usize,
    out: *mut FedbaRecord,
) -> FedbaStatus {
    guard(|| {
        let records = records.as_ref().ok_or_else(|| null("records"))?;
        let out = out_arg(out, "out")?;
        let r = records.0.get(index).ok_or_else(|| {
            Failure(
                FedbaStatus::OutOfRange,
                format!("index {index} out of range for {} records", records.0.len()),
            )
        })?;
        *out = FedbaRecord {
            round: r.round,
            algorithm: match r.algorithm {
                Algorithm::FedAvg => FedbaAlgorithm::FedAvg,
                Algorithm::FedBa => FedbaAlgorithm::FedBa,
            },
            seed: r.seed,
            test_accuracy: r.test_accuracy,
            test_loss: r.test_loss,
            global_train_loss: r.global_train_loss,
            min_weight: r.min_weight,
            max_weight: r.max_weight,
            weight_entropy: r.weight_entropy,
            mean_sq_distance: r.mean_sq_distance,
        };
        Ok(())
    })
}

/// Writes the metrics CSV to `path`.
///
/// # Safety
/// `records` must come from this library; `path` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn fedba_records_write_csv(records: *const FedbaRecords, path: *const c_char) -> FedbaStatus {
    guard(|| {
        let records = records.as_ref().ok_or_else(|| null("records"))?;
        let path = str_arg(path, "path")?;
        write_metrics(&records.0, path)?;
        Ok(())
    })
}

/// # Safety
/// `records` must come from this library (or be null) and not be used again.
#[no_mangle]
pub unsafe extern "C" fn fedba_records_free(records: *mut FedbaRecords) {
    if !records.is_null() {
        drop(Box::from_raw(records));
    }
}

/// Bounded distance map: `x` on `[0, 1]`, `atan(x)` above.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fedba_g(x: f64, out: *mut f64) -> FedbaStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = fedba::fl::g(x)?;
        Ok(())
    })
}

/// Log-score `ln(max(g(x), g_floor))`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fedba_distance_transform(x: f64, g_floor: f64, out: *mut f64) -> FedbaStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = fedba::fl::distance_transform(x, g_floor)?;
        Ok(())
    })
}

/// FedBA aggregation weights from squared model distances.
///
/// Writes `len` weights, in the order of `client_ids`, to `out_weights`.
///
/// # Safety
/// `client_ids` and `sq_distances` must point to `len` elements and
/// `out_weights` to `len` writable elements.
#[no_mangle]
pub unsafe extern "C" fn fedba_fedba_weights(
    client_ids: *const usize,
    sq_distances: *const f64,
    len: usize,
    epsilon: f64,
    g_floor: f64,
    out_weights: *mut f64,
) -> FedbaStatus {
    guard(|| {
        let ids = slice_arg(client_ids, len, "client_ids")?;
        let dists = slice_arg(sq_distances, len, "sq_distances")?;
        if out_weights.is_null() && len > 0 {
            return Err(null("out_weights"));
        }
        let report = fedba_weights_from_distances(ids, dists, FedBaGuard { epsilon, g_floor })?;
        write_weights(&report, out_weights);
        Ok(())
    })
}

/// FedAvg weights `n_k / sum(n)`, written in the order of `client_ids`.
///
/// # Safety
/// `client_ids` and `num_samples` must point to `len` elements and
/// `out_weights` to `len` writable elements.
#[no_mangle]
pub unsafe extern "C" fn fedba_fedavg_weights(
    client_ids: *const usize,
    num_samples: *const usize,
    len: usize,
    out_weights: *mut f64,
) -> FedbaStatus {
    guard(|| {
        let ids = slice_arg(client_ids, len, "client_ids")?;
        let counts = slice_arg(num_samples, len, "num_samples")?;
        if out_weights.is_null() && len > 0 {
            return Err(null("out_weights"));
        }
        let updates: Vec<ClientUpdate> = ids
            .iter()
            .zip(counts)
            .map(|(&client_id, &num_samples)| ClientUpdate {
                client_id,
                params: ParamVector::zeros(0),
                num_samples,
                mean_train_loss: 0.0,
            })
            .collect();
        let report = fedavg_weights(&updates)?;
        write_weights(&report, out_weights);
        Ok(())
    })
}

/// Entries come back in input order.
unsafe fn write_weights(report: &fedba::fl::WeightReport, out: *mut f64) {
    for (i, e) in report.entries.iter().enumerate() {
        *out.add(i) = e.weight;
    }
}
