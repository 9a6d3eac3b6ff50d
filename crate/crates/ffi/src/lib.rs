//! C ABI for the eigenray diagram calculus.
//!
//! Conventions:
//!
//! - Diagrams travel through an opaque [`ErDiagram`] handle; every
//!   constructor hands ownership to the caller, who must release it with
//!   [`er_diagram_free`].
//! - All text is NUL-terminated UTF-8.  Strings returned through `out`
//!   parameters are allocated here and must be released with
//!   [`er_string_free`].
//! - Rational scalars cross the boundary as `"p/q"` strings, so no exactness
//!   is lost; points are passed as separate x and y strings.
//! - Every fallible call returns an error code: 0 success, 1 invalid
//!   argument (null pointer, bad UTF-8, or internal panic), 2 parse error,
//!   3 precondition failure, 4 I/O error.  On failure the thread-local
//!   message retrieved by [`er_last_error`] describes the problem and no
//!   `out` parameter is written.

use eigenray::affine::Vec2Q;
use eigenray::atlas::{ChartAtlas, Loop};
use eigenray::diagram::EigenrayDiagram;
use eigenray::exact::{parse_rat, Rat};
use eigenray::script::{exactness_to_json, map_to_json, seed_to_json};
use eigenray::Error;
use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Opaque diagram handle; only ever seen behind a pointer.
pub struct ErDiagram {
    inner: EigenrayDiagram,
}

pub const ER_OK: i32 = 0;
pub const ER_INVALID_ARGUMENT: i32 = 1;
pub const ER_PARSE_ERROR: i32 = 2;
pub const ER_PRECONDITION_FAILED: i32 = 3;
pub const ER_IO_ERROR: i32 = 4;

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(message: impl Into<String>) {
    LAST_ERROR.with(|slot| *slot.borrow_mut() = message.into());
}

fn clear_error() {
    LAST_ERROR.with(|slot| slot.borrow_mut().clear());
}

fn code_of(e: &Error) -> i32 {
    match e {
        Error::Parse(_) => ER_PARSE_ERROR,
        Error::Precondition(_) => ER_PRECONDITION_FAILED,
        Error::Io(_) => ER_IO_ERROR,
    }
}

/// Run `body` inside a panic guard, storing the outcome in the error slot.
fn guarded(body: impl FnOnce() -> Result<(), (i32, String)>) -> i32 {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            clear_error();
            ER_OK
        }
        Ok(Err((code, message))) => {
            set_error(message);
            code
        }
        Err(_) => {
            set_error("internal panic");
            ER_INVALID_ARGUMENT
        }
    }
}

fn invalid(message: impl Into<String>) -> (i32, String) {
    (ER_INVALID_ARGUMENT, message.into())
}

fn library_error(e: Error) -> (i32, String) {
    (code_of(&e), e.to_string())
}

/// # Safety
/// `ptr` must be NUL-terminated and valid for reads.
unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, (i32, String)> {
    if ptr.is_null() {
        return Err(invalid(format!("{what} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| invalid(format!("{what} is not valid UTF-8")))
}

fn read_rat(text: &str, what: &str) -> Result<Rat, (i32, String)> {
    parse_rat(text).map_err(|e| (ER_PARSE_ERROR, format!("{what}: {e}")))
}

unsafe fn read_point(
    x: *const c_char,
    y: *const c_char,
    what: &str,
) -> Result<Vec2Q, (i32, String)> {
    let x = read_rat(read_str(x, what)?, what)?;
    let y = read_rat(read_str(y, what)?, what)?;
    Ok(Vec2Q::new(x, y))
}

unsafe fn borrow_diagram<'a>(
    handle: *const ErDiagram,
) -> Result<&'a EigenrayDiagram, (i32, String)> {
    if handle.is_null() {
        return Err(invalid("diagram handle is null"));
    }
    Ok(&(*handle).inner)
}

unsafe fn write_diagram(
    out: *mut *mut ErDiagram,
    diagram: EigenrayDiagram,
) -> Result<(), (i32, String)> {
    if out.is_null() {
        return Err(invalid("out parameter is null"));
    }
    *out = Box::into_raw(Box::new(ErDiagram { inner: diagram }));
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, text: String) -> Result<(), (i32, String)> {
    if out.is_null() {
        return Err(invalid("out parameter is null"));
    }
    let c = CString::new(text)
        .map_err(|_| invalid("result contains an interior NUL byte"))?;
    *out = c.into_raw();
    Ok(())
}

/// Copy of the message from the most recent failing call on this thread, or
/// an empty string after a success.  Release with [`er_string_free`].
///
/// # Safety
/// The returned pointer is owned by the caller.
#[no_mangle]
pub unsafe extern "C" fn er_last_error() -> *mut c_char {
    let message = LAST_ERROR.with(|slot| slot.borrow().clone());
    CString::new(message).unwrap_or_default().into_raw()
}

/// Release a string returned by this library.  `s` may be null.
///
/// # Safety
/// `s` must have come from this library and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn er_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Release a diagram handle.  `d` may be null.
///
/// # Safety
/// `d` must have come from this library and not have been freed before.
#[no_mangle]
pub unsafe extern "C" fn er_diagram_free(d: *mut ErDiagram) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Parse a diagram from canonical JSON into a fresh handle.
///
/// # Safety
/// `json` must be NUL-terminated; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn er_diagram_parse_json(
    json: *const c_char,
    out: *mut *mut ErDiagram,
) -> i32 {
    guarded(|| {
        let text = read_str(json, "diagram JSON")?;
        let diagram = EigenrayDiagram::from_json_str(text).map_err(library_error)?;
        write_diagram(out, diagram)
    })
}

/// The standard two-node example diagram.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn er_diagram_five_charts(out: *mut *mut ErDiagram) -> i32 {
    guarded(|| write_diagram(out, EigenrayDiagram::five_charts()))
}

/// Serialize a diagram to canonical pretty-printed JSON.
///
/// # Safety
/// `d` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn er_diagram_to_json(
    d: *const ErDiagram,
    out: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        let diagram = borrow_diagram(d)?;
        write_string(out, diagram.to_json_string())
    })
}

/// Number of multiset elements (nodes) in the diagram.
///
/// # Safety
/// `d` must be a live handle; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn er_diagram_node_count(
    d: *const ErDiagram,
    out: *mut usize,
) -> i32 {
    guarded(|| {
        let diagram = borrow_diagram(d)?;
        if out.is_null() {
            return Err(invalid("out parameter is null"));
        }
        *out = diagram.elements().len();
        Ok(())
    })
}

/// Remove the node at `(x, y)`, producing a new diagram handle.
///
/// # Safety
/// Pointer arguments as in [`er_diagram_parse_json`].
#[no_mangle]
pub unsafe extern "C" fn er_diagram_node_removal(
    d: *const ErDiagram,
    x: *const c_char,
    y: *const c_char,
    out: *mut *mut ErDiagram,
) -> i32 {
    guarded(|| {
        let diagram = borrow_diagram(d)?;
        let node = read_point(x, y, "node")?;
        write_diagram(out, diagram.node_removal(&node).map_err(library_error)?)
    })
}

/// Slide the node at `(x, y)` to `(to_x, to_y)` along its eigenline.
///
/// # Safety
/// Pointer arguments as in [`er_diagram_parse_json`].
#[no_mangle]
pub unsafe extern "C" fn er_diagram_nodal_slide(
    d: *const ErDiagram,
    x: *const c_char,
    y: *const c_char,
    to_x: *const c_char,
    to_y: *const c_char,
    out: *mut *mut ErDiagram,
) -> i32 {
    guarded(|| {
        let diagram = borrow_diagram(d)?;
        let node = read_point(x, y, "node")?;
        let to = read_point(to_x, to_y, "target")?;
        write_diagram(out, diagram.nodal_slide(&node, &to).map_err(library_error)?)
    })
}

/// Apply the branch move (ray reversal) at the node `(x, y)`.
///
/// # Safety
/// Pointer arguments as in [`er_diagram_parse_json`].
#[no_mangle]
pub unsafe extern "C" fn er_diagram_branch_move(
    d: *const ErDiagram,
    x: *const c_char,
    y: *const c_char,
    out: *mut *mut ErDiagram,
) -> i32 {
    guarded(|| {
        let diagram = borrow_diagram(d)?;
        let node = read_point(x, y, "node")?;
        write_diagram(out, diagram.branch_move(&node).map_err(library_error)?)
    })
}

/// Exactness verdict as JSON `{"exact": bool, "base": [x, y] | null}`.
///
/// # Safety
/// Pointer arguments as in [`er_diagram_to_json`].
#[no_mangle]
pub unsafe extern "C" fn er_diagram_exactness_json(
    d: *const ErDiagram,
    out: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        let diagram = borrow_diagram(d)?;
        write_string(out, exactness_to_json(diagram).to_string())
    })
}

/// Seed data as JSON `[{"dir": [x, y], "flux": "p/q"}, ...]`.
///
/// # Safety
/// Pointer arguments as in [`er_diagram_to_json`].
#[no_mangle]
pub unsafe extern "C" fn er_diagram_seed_json(
    d: *const ErDiagram,
    out: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        let diagram = borrow_diagram(d)?;
        write_string(out, seed_to_json(diagram).to_string())
    })
}

/// Trace an affine geodesic and return the path as JSON.
///
/// `budget` is a positive rational length bound, as `"p/q"`.
///
/// # Safety
/// Pointer arguments as in [`er_diagram_parse_json`].
#[no_mangle]
pub unsafe extern "C" fn er_trace_geodesic_json(
    d: *const ErDiagram,
    start_x: *const c_char,
    start_y: *const c_char,
    dir_x: *const c_char,
    dir_y: *const c_char,
    budget: *const c_char,
    out: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        let diagram = borrow_diagram(d)?;
        let start = read_point(start_x, start_y, "start")?;
        let dir = read_point(dir_x, dir_y, "direction")?;
        let budget = read_rat(read_str(budget, "budget")?, "budget")?;
        let atlas = ChartAtlas::new(diagram.clone());
        let path = atlas.trace_geodesic(&start, &dir, &budget).map_err(library_error)?;
        write_string(out, path.to_json_string())
    })
}

/// Holonomy around a polygonal loop, returned as JSON
/// `{"linear": [[a, b], [c, d]], "translate": [x, y]}`.
///
/// `vertices_json` is a JSON array of `[x, y]` rational string pairs with at
/// least three entries.
///
/// # Safety
/// Pointer arguments as in [`er_diagram_parse_json`].
#[no_mangle]
pub unsafe extern "C" fn er_holonomy_json(
    d: *const ErDiagram,
    vertices_json: *const c_char,
    out: *mut *mut c_char,
) -> i32 {
    guarded(|| {
        let diagram = borrow_diagram(d)?;
        let text = read_str(vertices_json, "loop vertices")?;
        let wire: Vec<[String; 2]> = serde_json::from_str(text)
            .map_err(|e| (ER_PARSE_ERROR, format!("loop vertices: {e}")))?;
        let mut vertices = Vec::with_capacity(wire.len());
        for [x, y] in &wire {
            vertices.push(Vec2Q::new(
                read_rat(x, "loop vertex")?,
                read_rat(y, "loop vertex")?,
            ));
        }
        let atlas = ChartAtlas::new(diagram.clone());
        let map = atlas.holonomy(&Loop { vertices }).map_err(library_error)?;
        write_string(out, map_to_json(&map).to_string())
    })
}
