//! C interface to the core crate.
//!
//! Grid functions and weight systems are exposed as opaque handles. Every
//! fallible call returns an [`MbStatus`]; on failure the message is available
//! through [`mb_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::panic::{catch_unwind, AssertUnwindSafe};

use morrey_bilinear::grid::{read_mgf, write_mgf, Grid, GridFunction};
use morrey_bilinear::norms::{lebesgue_norm, morrey_norm, CubeFamily};
use morrey_bilinear::operators::{b_alpha, i_alpha, KernelSpec};
use morrey_bilinear::weights::{CharParams, Characteristic, Variant, WeightSystem, DEFAULT_PAIR_BUDGET};
use morrey_bilinear::Error;

/// Opaque grid function.
pub struct MbFunction(GridFunction);

/// Opaque weight triple `(v, w1, w2)` on a common grid.
pub struct MbWeights(WeightSystem);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MbStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    Hypothesis = 3,
    LevelOutOfRange = 4,
    GridMismatch = 5,
    NonPositive = 6,
    ClippedCube = 7,
    Unresolvable = 8,
    Numerical = 9,
    Parse = 10,
    Io = 11,
    Panic = 12,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MbFamily {
    Dyadic = 0,
    AllAligned = 1,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(e: &Error) -> MbStatus {
    match e {
        Error::InvalidParameter(_) | Error::Json(_) => MbStatus::InvalidParameter,
        Error::Hypothesis(_) => MbStatus::Hypothesis,
        Error::LevelOutOfRange(_) => MbStatus::LevelOutOfRange,
        Error::GridMismatch(_) => MbStatus::GridMismatch,
        Error::NonPositive(_) => MbStatus::NonPositive,
        Error::ClippedCube(_) => MbStatus::ClippedCube,
        Error::Unresolvable(_) => MbStatus::Unresolvable,
        Error::Numerical(_) => MbStatus::Numerical,
        Error::Parse { .. } => MbStatus::Parse,
        Error::Io(_) | Error::Csv(_) => MbStatus::Io,
    }
}

enum Fail {
    Null,
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> MbStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            MbStatus::Ok
        }
        Ok(Err(Fail::Null)) => {
            set_error("null pointer argument".into());
            MbStatus::NullPointer
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(msg);
            MbStatus::Panic
        }
    }
}

unsafe fn deref<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or(Fail::Null)
}

unsafe fn path<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail::Null);
    }
    CStr::from_ptr(p).to_str().map_err(|_| Fail::Core(Error::InvalidParameter("path is not UTF-8".into())))
}

unsafe fn emit<T>(out: *mut *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null);
    }
    *out = Box::into_raw(Box::new(v));
    Ok(())
}

fn family(f: &GridFunction, kind: MbFamily) -> CubeFamily {
    match kind {
        MbFamily::Dyadic => CubeFamily::dyadic(f.grid().root()),
        MbFamily::AllAligned => CubeFamily::all_aligned(f.grid().root()),
    }
}

/// Builds a function on `[0,1)^dim` at `depth` from `2^(dim·depth)` row-major values.
///
/// # Safety
/// `values` must point to `len` readable doubles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mb_function_new(dim: usize, depth: u32, values: *const f64, len: usize, out: *mut *mut MbFunction) -> MbStatus {
    guard(|| {
        if values.is_null() {
            return Err(Fail::Null);
        }
        let grid = Grid::unit(dim, depth)?;
        if len != grid.cell_count() {
            return Err(Error::InvalidParameter(format!("expected {} values, got {len}", grid.cell_count())).into());
        }
        let v = std::slice::from_raw_parts(values, len).to_vec();
        emit(out, MbFunction(GridFunction::inferred(grid, v)?))
    })
}

/// # Safety
/// `file` must be a NUL-terminated path and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mb_function_read_mgf(file: *const c_char, out: *mut *mut MbFunction) -> MbStatus {
    guard(|| {
        let f = File::open(path(file)?).map_err(Error::from)?;
        emit(out, MbFunction(read_mgf(BufReader::new(f))?))
    })
}

/// # Safety
/// `f` must be a live handle and `file` a NUL-terminated path.
#[no_mangle]
pub unsafe extern "C" fn mb_function_write_mgf(f: *const MbFunction, file: *const c_char) -> MbStatus {
    guard(|| {
        let f = deref(f)?;
        let w = File::create(path(file)?).map_err(Error::from)?;
        Ok(write_mgf(&f.0, BufWriter::new(w))?)
    })
}

/// Number of cells, or 0 for a null handle.
///
/// # Safety
/// `f` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn mb_function_len(f: *const MbFunction) -> usize {
    f.as_ref().map_or(0, |f| f.0.values().len())
}

/// Copies the cell values into `buf`, which must hold exactly `len` doubles.
///
/// # Safety
/// `f` must be a live handle and `buf` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn mb_function_values(f: *const MbFunction, buf: *mut f64, len: usize) -> MbStatus {
    guard(|| {
        let f = deref(f)?;
        if buf.is_null() {
            return Err(Fail::Null);
        }
        let v = f.0.values();
        if len != v.len() {
            return Err(Error::InvalidParameter(format!("buffer holds {len} values, function has {}", v.len())).into());
        }
        std::slice::from_raw_parts_mut(buf, len).copy_from_slice(v);
        Ok(())
    })
}

/// # Safety
/// `f` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mb_function_free(f: *mut MbFunction) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// Bilinear fractional integral of `f` and `g`.
///
/// # Safety
/// `f`, `g` must be live handles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mb_b_alpha(f: *const MbFunction, g: *const MbFunction, alpha: f64, out: *mut *mut MbFunction) -> MbStatus {
    guard(|| {
        let (f, g) = (deref(f)?, deref(g)?);
        let k = KernelSpec::new(alpha, f.0.grid().dim())?;
        emit(out, MbFunction(b_alpha(&f.0, &g.0, &k)?.into_function()))
    })
}

/// Linear fractional integral of `f`.
///
/// # Safety
/// `f` must be a live handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mb_i_alpha(f: *const MbFunction, alpha: f64, out: *mut *mut MbFunction) -> MbStatus {
    guard(|| {
        let f = deref(f)?;
        let k = KernelSpec::new(alpha, f.0.grid().dim())?;
        emit(out, MbFunction(i_alpha(&f.0, &k)?.into_function()))
    })
}

/// # Safety
/// `f` must be a live handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mb_morrey_norm(f: *const MbFunction, p: f64, q: f64, fam: MbFamily, out: *mut f64) -> MbStatus {
    guard(|| {
        let f = deref(f)?;
        if out.is_null() {
            return Err(Fail::Null);
        }
        *out = morrey_norm(&f.0, p, q, &family(&f.0, fam))?.value;
        Ok(())
    })
}

/// Lebesgue norm over the root cube.
///
/// # Safety
/// `f` must be a live handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mb_lebesgue_norm(f: *const MbFunction, p: f64, out: *mut f64) -> MbStatus {
    guard(|| {
        let f = deref(f)?;
        if out.is_null() {
            return Err(Fail::Null);
        }
        *out = lebesgue_norm(&f.0, p, &f.0.grid().root_box())?;
        Ok(())
    })
}

/// Weight triple from three positive functions on the same grid. The inputs
/// are copied and stay owned by the caller.
///
/// # Safety
/// `v`, `w1`, `w2` must be live handles and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mb_weights_new(
    v: *const MbFunction,
    w1: *const MbFunction,
    w2: *const MbFunction,
    out: *mut *mut MbWeights,
) -> MbStatus {
    guard(|| {
        let ws = WeightSystem::new(deref(v)?.0.clone(), deref(w1)?.0.clone(), deref(w2)?.0.clone())?;
        emit(out, MbWeights(ws))
    })
}

/// # Safety
/// `w` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn mb_weights_free(w: *mut MbWeights) {
    if !w.is_null() {
        drop(Box::from_raw(w));
    }
}

/// Two-weight characteristic; the variant follows from `s`.
///
/// # Safety
/// `w` must be a live handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mb_char_two_weight(
    w: *const MbWeights,
    alpha: f64,
    q1: f64,
    q2: f64,
    p: f64,
    s: f64,
    t: f64,
    r: f64,
    a: f64,
    fam: MbFamily,
    out: *mut f64,
) -> MbStatus {
    guard(|| {
        let ws = &deref(w)?.0;
        if out.is_null() {
            return Err(Fail::Null);
        }
        let n = ws.grid().dim();
        let cp = CharParams::new(Variant::two_weight_for(s), alpha, n, q1, q2, p, s, t, r, a);
        let r = Characteristic::new(ws, cp)?.sup(&family(&ws.v, fam), DEFAULT_PAIR_BUDGET)?;
        if r.overflow {
            return Err(Error::Numerical(format!("characteristic overflows (log value {:e})", r.log_value)).into());
        }
        *out = r.value;
        Ok(())
    })
}

/// Copies the calling thread's last error message into `buf` (NUL-terminated,
/// truncated to `len − 1` bytes) and returns the full message length.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn mb_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = msg.len().min(len - 1);
            std::ptr::copy_nonoverlapping(msg.as_ptr().cast::<c_char>(), buf, n);
            *buf.add(n) = 0;
        }
        msg.len()
    })
}

/// Static name of a status code.
#[no_mangle]
pub extern "C" fn mb_status_name(s: MbStatus) -> *const c_char {
    let name: &'static [u8] = match s {
        MbStatus::Ok => b"ok\0",
        MbStatus::NullPointer => b"null pointer\0",
        MbStatus::InvalidParameter => b"invalid parameter\0",
        MbStatus::Hypothesis => b"hypothesis violated\0",
        MbStatus::LevelOutOfRange => b"level out of range\0",
        MbStatus::GridMismatch => b"grid mismatch\0",
        MbStatus::NonPositive => b"non-positive value\0",
        MbStatus::ClippedCube => b"clipped cube\0",
        MbStatus::Unresolvable => b"unresolvable\0",
        MbStatus::Numerical => b"numerical failure\0",
        MbStatus::Parse => b"parse error\0",
        MbStatus::Io => b"i/o error\0",
        MbStatus::Panic => b"panic\0",
    };
    name.as_ptr().cast()
}
