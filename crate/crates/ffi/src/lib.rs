//! C ABI for `ust3d`.
//!
//! Trees are passed as opaque `Ust3dTree` handles created by the sampling
//! or loading functions and released with [`ust3d_tree_free`]. Every
//! fallible function returns a [`Ust3dStatus`] and writes its result
//! through an out-pointer; on failure [`ust3d_last_error_message`] describes
//! the error. Panics are caught at the boundary and reported as
//! `UST3D_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ust3d::treewalk::heat_kernel_exact;
use ust3d::wilson::{sample_ball_ust, sample_window_ust, UstWindowConfig};
use ust3d::{Error, LatticePoint, RngConfig, SpanningTree};

/// Opaque tree handle.
pub struct Ust3dTree(SpanningTree);

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Ust3dPoint {
    pub x: i64,
    pub y: i64,
    pub z: i64,
}

impl From<Ust3dPoint> for LatticePoint {
    fn from(p: Ust3dPoint) -> Self {
        LatticePoint::new(p.x, p.y, p.z)
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Ust3dStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidInput = 2,
    VertexAbsent = 3,
    ClippedBall = 4,
    ThroughBoundary = 5,
    StepCapReached = 6,
    Numerical = 7,
    Parse = 8,
    Io = 9,
    Panic = 10,
}

impl From<&Error> for Ust3dStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidInput(_)
            | Error::EndpointMismatch { .. }
            | Error::NotAPath { .. }
            | Error::CoordinateOverflow
            | Error::Disconnected
            | Error::TerminalsOverlap => Ust3dStatus::InvalidInput,
            Error::VertexAbsent(_) => Ust3dStatus::VertexAbsent,
            Error::ClippedBall { .. } => Ust3dStatus::ClippedBall,
            Error::ThroughBoundary(..) => Ust3dStatus::ThroughBoundary,
            Error::StepCapReached { .. } => Ust3dStatus::StepCapReached,
            Error::DegenerateFit(_) | Error::NormalizationDrift { .. } => Ust3dStatus::Numerical,
            Error::Parse { .. } => Ust3dStatus::Parse,
            Error::Io(_) => Ust3dStatus::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_last_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn guard(f: impl FnOnce() -> Result<(), (Ust3dStatus, String)>) -> Ust3dStatus {
    clear_last_error();
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => Ust3dStatus::Ok,
        Ok(Err((status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_last_error(format!("panic: {msg}"));
            Ust3dStatus::Panic
        }
    }
}

fn lift(e: Error) -> (Ust3dStatus, String) {
    ((&e).into(), e.to_string())
}

fn null(what: &str) -> (Ust3dStatus, String) {
    (Ust3dStatus::NullPointer, format!("{what} is null"))
}

unsafe fn tree<'a>(t: *const Ust3dTree) -> Result<&'a SpanningTree, (Ust3dStatus, String)> {
    t.as_ref().map(|t| &t.0).ok_or_else(|| null("tree"))
}

unsafe fn write<T>(out: *mut T, value: T) -> Result<(), (Ust3dStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(value);
    Ok(())
}

unsafe fn path_arg(path: *const c_char) -> Result<String, (Ust3dStatus, String)> {
    if path.is_null() {
        return Err(null("path"));
    }
    CStr::from_ptr(path)
        .to_str()
        .map(str::to_owned)
        .map_err(|_| (Ust3dStatus::InvalidInput, "path is not valid UTF-8".into()))
}

unsafe fn hand_out(out: *mut *mut Ust3dTree, t: SpanningTree) -> Result<(), (Ust3dStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    out.write(Box::into_raw(Box::new(Ust3dTree(t))));
    Ok(())
}

/// Message for the last failed call on this thread, or null. The pointer
/// stays valid until the next `ust3d_*` call on the same thread.
#[no_mangle]
pub extern "C" fn ust3d_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Static, nul-terminated library version.
#[no_mangle]
pub extern "C" fn ust3d_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Samples the wired UST on the window of radius `radius` with truncation
/// factor `truncation`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ust3d_sample_window(radius: u64, truncation: u64, seed: u64, out: *mut *mut Ust3dTree) -> Ust3dStatus {
    guard(|| {
        let t = sample_window_ust(&UstWindowConfig::new(radius, truncation), &RngConfig::from_seed(seed)).map_err(lift)?;
        hand_out(out, t)
    })
}

/// Samples just enough of the window UST to know `B_U(0, r)`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ust3d_sample_ball(
    r: u64,
    radius: u64,
    truncation: u64,
    seed: u64,
    out: *mut *mut Ust3dTree,
) -> Ust3dStatus {
    guard(|| {
        let t = sample_ball_ust(r, &UstWindowConfig::new(radius, truncation), &RngConfig::from_seed(seed)).map_err(lift)?;
        hand_out(out, t)
    })
}

/// # Safety
/// `path` must be a nul-terminated string and `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ust3d_tree_load(path: *const c_char, out: *mut *mut Ust3dTree) -> Ust3dStatus {
    guard(|| {
        let p = path_arg(path)?;
        hand_out(out, SpanningTree::load(p).map_err(lift)?)
    })
}

/// # Safety
/// `tree` must come from this library; `path` must be nul-terminated.
#[no_mangle]
pub unsafe extern "C" fn ust3d_tree_save(tree: *const Ust3dTree, path: *const c_char) -> Ust3dStatus {
    guard(|| {
        let t = self::tree(tree)?;
        t.save(path_arg(path)?).map_err(lift)
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `tree` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ust3d_tree_free(tree: *mut Ust3dTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// Number of lattice vertices, excluding the wired boundary node.
///
/// # Safety
/// `tree` must come from this library and `out` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ust3d_tree_vertex_count(tree: *const Ust3dTree, out: *mut usize) -> Ust3dStatus {
    guard(|| write(out, self::tree(tree)?.vertex_count()))
}

/// `|B_U(center, r)|`; `clipped` reports whether the ball reaches the
/// unexplored part of the tree, in which case the volume is a lower bound.
///
/// # Safety
/// `tree` must come from this library; `volume` and `clipped` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ust3d_tree_ball_volume(
    tree: *const Ust3dTree,
    center: Ust3dPoint,
    r: u64,
    volume: *mut usize,
    clipped: *mut bool,
) -> Ust3dStatus {
    guard(|| {
        let ball = self::tree(tree)?.intrinsic_ball(&center.into(), r).map_err(lift)?;
        write(volume, ball.volume)?;
        write(clipped, ball.clipped)
    })
}

/// Intrinsic distance `d_U(x, y)`.
///
/// # Safety
/// `tree` must come from this library and `out` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ust3d_tree_distance(tree: *const Ust3dTree, x: Ust3dPoint, y: Ust3dPoint, out: *mut u64) -> Ust3dStatus {
    guard(|| write(out, self::tree(tree)?.distance(&x.into(), &y.into()).map_err(lift)?))
}

/// Exact return heat kernel `p_n(x, x)`.
///
/// # Safety
/// `tree` must come from this library and `out` be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ust3d_heat_kernel_exact(tree: *const Ust3dTree, x: Ust3dPoint, n: u64, out: *mut f64) -> Ust3dStatus {
    guard(|| write(out, heat_kernel_exact(self::tree(tree)?, &x.into(), n).map_err(lift)?.value))
}

/// Length of the loop erasure of a walk from the origin stopped on
/// leaving the Euclidean ball of radius `n`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ust3d_lerw_length(n: u64, seed: u64, out: *mut usize) -> Ust3dStatus {
    guard(|| write(out, ust3d::lerw::sample_m_n(n, &RngConfig::from_seed(seed)).map_err(lift)?))
}
