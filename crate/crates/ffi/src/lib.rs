//! C interface.
//!
//! Every function returns a `DqgnnStatus`; results come back through out
//! pointers. On failure, `dqgnn_last_error_message` describes the most
//! recent error on the calling thread. Handles are opaque and must be
//! released with the matching `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use dqgnn::cli::{accuracy, train_classifier, TrainSettings};
use dqgnn::graphdata::{parse_tudataset, Dataset, Graph};
use dqgnn::model::{self, classify, count_parameters, graph_embedding, Checkpoint, Entanglement, ForwardConfig};

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DqgnnStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// An argument was out of range or not valid UTF-8.
    InvalidArgument = 2,
    /// Dataset or checkpoint missing, malformed or incompatible.
    DataError = 3,
    /// Training or evaluation failed.
    InternalError = 4,
    /// A Rust panic was caught at the boundary.
    Panic = 5,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DqgnnEntanglement {
    Full = 0,
    Ring = 1,
    Off = 2,
}

/// Training settings; start from `dqgnn_train_options_default`.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct DqgnnTrainOptions {
    pub layers: usize,
    pub capacity: usize,
    pub entanglement: DqgnnEntanglement,
    pub seed: u64,
    pub mapping_budget: usize,
    pub model_budget: usize,
}

/// A parsed graph dataset.
pub struct DqgnnDataset {
    inner: Dataset,
}

/// A trained classifier with its encoder and forward settings.
pub struct DqgnnModel {
    inner: Checkpoint,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(message: impl Into<String>) {
    let text = message.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(text).expect("nul bytes removed"));
}

struct Failure(DqgnnStatus, String);

type Outcome<T> = Result<T, Failure>;

fn fail<T>(status: DqgnnStatus, message: impl Into<String>) -> Outcome<T> {
    Err(Failure(status, message.into()))
}

/// Runs `body`, turning errors and panics into a status code.
fn guard(body: impl FnOnce() -> Outcome<()>) -> DqgnnStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => DqgnnStatus::Ok,
        Ok(Err(Failure(status, message))) => {
            set_error(message);
            status
        }
        Err(payload) => {
            let message = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {message}"));
            DqgnnStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(ptr: *const c_char, what: &str) -> Outcome<&'a str> {
    if ptr.is_null() {
        return fail(DqgnnStatus::NullPointer, format!("{what} is null"));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .or_else(|_| fail(DqgnnStatus::InvalidArgument, format!("{what} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(ptr: *const T, what: &str) -> Outcome<&'a T> {
    ptr.as_ref()
        .map_or_else(|| fail(DqgnnStatus::NullPointer, format!("{what} is null")), Ok)
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Outcome<()> {
    if out.is_null() {
        return fail(DqgnnStatus::NullPointer, "output pointer is null");
    }
    out.write(value);
    Ok(())
}

fn graph_at(ds: &DqgnnDataset, index: usize) -> Outcome<&Graph> {
    ds.inner.graphs.get(index).map_or_else(
        || {
            fail(
                DqgnnStatus::InvalidArgument,
                format!("graph index {index} out of range (dataset has {})", ds.inner.graphs.len()),
            )
        },
        Ok,
    )
}

fn check_dimension(model: &DqgnnModel, ds: &DqgnnDataset) -> Outcome<()> {
    let (expected, found) = (model.inner.params.mapping.dimension(), ds.inner.feature_dim());
    if expected != found {
        return fail(
            DqgnnStatus::DataError,
            format!("model encoder expects {expected} features, dataset has {found}"),
        );
    }
    Ok(())
}

fn internal(e: impl std::fmt::Display) -> Failure {
    Failure(DqgnnStatus::InternalError, e.to_string())
}

/// Message for the last failed call on this thread. Empty if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn dqgnn_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn dqgnn_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Parses `<dir>/<name>_*.txt` into a new dataset handle.
///
/// # Safety
/// `dir` and `name` must be NUL-terminated strings; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dqgnn_dataset_load(
    dir: *const c_char,
    name: *const c_char,
    out: *mut *mut DqgnnDataset,
) -> DqgnnStatus {
    guard(|| {
        let dir = PathBuf::from(str_arg(dir, "dir")?);
        let name = str_arg(name, "name")?;
        let inner = parse_tudataset(dir, name).map_err(|e| Failure(DqgnnStatus::DataError, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(DqgnnDataset { inner })))
    })
}

/// # Safety
/// `ds` must come from `dqgnn_dataset_load` and not be used afterwards.
/// Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dqgnn_dataset_free(ds: *mut DqgnnDataset) {
    if !ds.is_null() {
        drop(Box::from_raw(ds));
    }
}

/// # Safety
/// `ds` must be a live dataset handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dqgnn_dataset_len(ds: *const DqgnnDataset, out: *mut usize) -> DqgnnStatus {
    guard(|| write_out(out, ref_arg(ds, "dataset")?.inner.graphs.len()))
}

/// Length of each node feature vector.
///
/// # Safety
/// `ds` must be a live dataset handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dqgnn_dataset_feature_dim(ds: *const DqgnnDataset, out: *mut usize) -> DqgnnStatus {
    guard(|| write_out(out, ref_arg(ds, "dataset")?.inner.feature_dim()))
}

/// Class label (0 or 1) of graph `index`.
///
/// # Safety
/// `ds` must be a live dataset handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dqgnn_dataset_label(ds: *const DqgnnDataset, index: usize, out: *mut u8) -> DqgnnStatus {
    guard(|| write_out(out, graph_at(ref_arg(ds, "dataset")?, index)?.label()))
}

/// Default settings: 3 layers, capacity 8, full entanglement, seed 0,
/// budgets 500 (encoder) and 2000 (model).
#[no_mangle]
pub extern "C" fn dqgnn_train_options_default() -> DqgnnTrainOptions {
    DqgnnTrainOptions {
        layers: model::DEFAULT_LAYERS,
        capacity: model::DEFAULT_CAPACITY,
        entanglement: DqgnnEntanglement::Full,
        seed: 0,
        mapping_budget: 500,
        model_budget: 2000,
    }
}

/// Trains encoder and classifier on every graph of `ds`.
///
/// # Safety
/// `ds` must be a live dataset handle; `options` must point to valid
/// options; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dqgnn_model_train(
    ds: *const DqgnnDataset,
    options: *const DqgnnTrainOptions,
    out: *mut *mut DqgnnModel,
) -> DqgnnStatus {
    guard(|| {
        let ds = ref_arg(ds, "dataset")?;
        let o = *ref_arg(options, "options")?;
        if o.layers == 0 {
            return fail(DqgnnStatus::InvalidArgument, "layers must be at least 1");
        }
        if ds.inner.graphs.is_empty() {
            return fail(DqgnnStatus::DataError, "dataset has no graphs");
        }
        let entanglement = match o.entanglement {
            DqgnnEntanglement::Full => Entanglement::Full,
            DqgnnEntanglement::Ring => Entanglement::Ring,
            DqgnnEntanglement::Off => Entanglement::Off,
        };
        let forward = ForwardConfig::new(o.capacity, entanglement)
            .map_err(|e| Failure(DqgnnStatus::InvalidArgument, e.to_string()))?;
        let settings = TrainSettings {
            layers: o.layers,
            mapping_budget: o.mapping_budget,
            model_budget: o.model_budget,
            forward,
            seed: o.seed,
        };
        let graphs: Vec<&Graph> = ds.inner.graphs.iter().collect();
        let trained = train_classifier(&graphs, ds.inner.feature_dim(), &settings).map_err(internal)?;
        let inner = Checkpoint {
            params: trained.params,
            config: forward,
            seed: o.seed,
        };
        write_out(out, Box::into_raw(Box::new(DqgnnModel { inner })))
    })
}

/// # Safety
/// `model` must be a live model handle; `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn dqgnn_model_save(model: *const DqgnnModel, path: *const c_char) -> DqgnnStatus {
    guard(|| {
        let model = ref_arg(model, "model")?;
        let path = str_arg(path, "path")?;
        model
            .inner
            .save(path)
            .map_err(|e| Failure(DqgnnStatus::DataError, e.to_string()))
    })
}

/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dqgnn_model_load(path: *const c_char, out: *mut *mut DqgnnModel) -> DqgnnStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        let inner = Checkpoint::load(path).map_err(|e| Failure(DqgnnStatus::DataError, e.to_string()))?;
        write_out(out, Box::into_raw(Box::new(DqgnnModel { inner })))
    })
}

/// # Safety
/// `model` must come from `dqgnn_model_train` or `dqgnn_model_load` and not
/// be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn dqgnn_model_free(model: *mut DqgnnModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Layer angles plus centroids plus encoder angles.
///
/// # Safety
/// `model` must be a live model handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dqgnn_model_parameter_count(model: *const DqgnnModel, out: *mut usize) -> DqgnnStatus {
    guard(|| write_out(out, count_parameters(&ref_arg(model, "model")?.inner.params)))
}

/// Scalar embedding (sum of node entropies, in bits) of graph `index`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dqgnn_model_embed(
    model: *const DqgnnModel,
    ds: *const DqgnnDataset,
    index: usize,
    out: *mut f64,
) -> DqgnnStatus {
    guard(|| {
        let (model, ds) = (ref_arg(model, "model")?, ref_arg(ds, "dataset")?);
        check_dimension(model, ds)?;
        let h = graph_embedding(graph_at(ds, index)?, &model.inner.params, &model.inner.config).map_err(internal)?;
        write_out(out, h.value())
    })
}

/// Predicted label (0 or 1) of graph `index`.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dqgnn_model_classify(
    model: *const DqgnnModel,
    ds: *const DqgnnDataset,
    index: usize,
    out: *mut u8,
) -> DqgnnStatus {
    guard(|| {
        let (model, ds) = (ref_arg(model, "model")?, ref_arg(ds, "dataset")?);
        check_dimension(model, ds)?;
        let h = graph_embedding(graph_at(ds, index)?, &model.inner.params, &model.inner.config).map_err(internal)?;
        write_out(out, classify(h, &model.inner.params))
    })
}

/// Fraction of graphs in `ds` classified correctly.
///
/// # Safety
/// Handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn dqgnn_model_accuracy(
    model: *const DqgnnModel,
    ds: *const DqgnnDataset,
    out: *mut f64,
) -> DqgnnStatus {
    guard(|| {
        let (model, ds) = (ref_arg(model, "model")?, ref_arg(ds, "dataset")?);
        check_dimension(model, ds)?;
        if ds.inner.graphs.is_empty() {
            return fail(DqgnnStatus::DataError, "dataset has no graphs");
        }
        let graphs: Vec<&Graph> = ds.inner.graphs.iter().collect();
        write_out(out, accuracy(&graphs, &model.inner.params, &model.inner.config).map_err(internal)?)
    })
}
