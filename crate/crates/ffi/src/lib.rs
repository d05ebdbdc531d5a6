//! C ABI over the stochgame solver.
//!
//! Every function returns an [`SgStatus`]. On failure the message is kept in
//! a thread-local slot readable with [`sg_last_error_message`]. Handles are
//! opaque, owned by the caller once created, and released with the matching
//! `*_free` function. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};

use stochgame::game::{history_count, load_game, Belief, GameSpec, Regret};
use stochgame::informed::{solve_informed, InformedSolution};
use stochgame::sim::simulate;
use stochgame::uninformed::{dual_value, solve_uninformed, UninformedSolution};
use stochgame::Error;

/// Result codes. `SG_STATUS_OK` is zero.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Validation = 5,
    IndexOutOfRange = 6,
    Strategy = 7,
    Numerical = 8,
    BufferTooSmall = 9,
    Panic = 10,
}

/// An immutable game loaded from JSON.
pub struct SgGame(GameSpec);

/// Informed player's security strategy with the game value.
pub struct SgInformed(InformedSolution);

/// Uninformed player's security strategy with value and initial regret.
pub struct SgUninformed(UninformedSolution);

/// Summary of a Monte Carlo run.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct SgSimReport {
    pub runs: u64,
    pub mean: f64,
    pub std_error: f64,
    /// Exact expected payoff of the strategy pair.
    pub game_value: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn status_of(err: &Error) -> SgStatus {
    match err {
        Error::Io(_) => SgStatus::Io,
        Error::Parse(_) => SgStatus::Parse,
        Error::Validation(_) => SgStatus::Validation,
        Error::IndexOutOfRange(_) => SgStatus::IndexOutOfRange,
        Error::Strategy(_) => SgStatus::Strategy,
        _ => SgStatus::Numerical,
    }
}

struct Fail(SgStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(SgStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error(String::new());
            SgStatus::Ok
        }
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            SgStatus::Panic
        }
    }
}

unsafe fn borrow<'a, T>(ptr: *const T, what: &str) -> Result<&'a T, Fail> {
    ptr.as_ref().ok_or_else(|| null(what))
}

unsafe fn read_str<'a>(ptr: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if ptr.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| Fail(SgStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn write_out<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

unsafe fn copy_to(src: &[f64], out: *mut f64, len: usize) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null("output buffer"));
    }
    if len < src.len() {
        return Err(Fail(
            SgStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    std::ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

fn out_of_range(msg: String) -> Fail {
    Fail(SgStatus::IndexOutOfRange, msg)
}

/// Copies the last error message of this thread into `buf` as a
/// NUL-terminated string, truncating to `len - 1` bytes. Returns the full
/// message length in bytes, excluding the terminator.
///
/// # Safety
/// `buf` must be null or point to `len` writable bytes.
#[no_mangle]
pub unsafe extern "C" fn sg_last_error_message(buf: *mut c_char, len: usize) -> usize {
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

/// Parses a game from a NUL-terminated JSON document.
///
/// # Safety
/// `json` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_game_from_json(json: *const c_char, out: *mut *mut SgGame) -> SgStatus {
    guard(|| {
        let text = read_str(json, "json")?;
        let game = GameSpec::from_json_str(text)?;
        write_out(out, Box::into_raw(Box::new(SgGame(game))), "out")
    })
}

/// Loads a game from a JSON file.
///
/// # Safety
/// `path` must be a valid C string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_game_load(path: *const c_char, out: *mut *mut SgGame) -> SgStatus {
    guard(|| {
        let path = read_str(path, "path")?;
        let game = load_game(path)?;
        write_out(out, Box::into_raw(Box::new(SgGame(game))), "out")
    })
}

/// Returns a copy of `game` with a different horizon.
///
/// # Safety
/// `game` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_game_with_horizon(game: *const SgGame, horizon: usize, out: *mut *mut SgGame) -> SgStatus {
    guard(|| {
        let g = borrow(game, "game")?;
        let next = g.0.with_horizon(horizon)?;
        write_out(out, Box::into_raw(Box::new(SgGame(next))), "out")
    })
}

/// Returns a copy of `game` with a different initial distribution.
///
/// # Safety
/// `game` must be a live handle; `probs` must point to `len` values.
#[no_mangle]
pub unsafe extern "C" fn sg_game_with_initial(
    game: *const SgGame,
    probs: *const f64,
    len: usize,
    out: *mut *mut SgGame,
) -> SgStatus {
    guard(|| {
        let g = borrow(game, "game")?;
        if probs.is_null() {
            return Err(null("probs"));
        }
        let p = std::slice::from_raw_parts(probs, len).to_vec();
        if p.len() != g.0.num_states() {
            return Err(Fail(
                SgStatus::Validation,
                format!("initial distribution has {} entries, game has {} states", p.len(), g.0.num_states()),
            ));
        }
        let next = g.0.with_initial(&Belief::new(p)?)?;
        write_out(out, Box::into_raw(Box::new(SgGame(next))), "out")
    })
}

/// Releases a game. Null is ignored.
///
/// # Safety
/// `game` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sg_game_free(game: *mut SgGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Writes the number of states, actions of each player and the horizon.
/// Any output pointer may be null.
///
/// # Safety
/// `game` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn sg_game_dims(
    game: *const SgGame,
    num_states: *mut usize,
    num_actions_p1: *mut usize,
    num_actions_p2: *mut usize,
    horizon: *mut usize,
) -> SgStatus {
    guard(|| {
        let g = &borrow(game, "game")?.0;
        for (ptr, v) in [
            (num_states, g.num_states()),
            (num_actions_p1, g.num_actions_p1()),
            (num_actions_p2, g.num_actions_p2()),
            (horizon, g.horizon()),
        ] {
            if !ptr.is_null() {
                ptr.write(v);
            }
        }
        Ok(())
    })
}

/// Solves the informed player's LP.
///
/// # Safety
/// `game` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_solve_informed(game: *const SgGame, out: *mut *mut SgInformed) -> SgStatus {
    guard(|| {
        let sol = solve_informed(&borrow(game, "game")?.0)?;
        write_out(out, Box::into_raw(Box::new(SgInformed(sol))), "out")
    })
}

/// # Safety
/// `sol` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_informed_value(sol: *const SgInformed, out: *mut f64) -> SgStatus {
    guard(|| write_out(out, borrow(sol, "solution")?.0.value, "out"))
}

/// Copies `sigma_stage(state, history)` into `out`. `stage` is 1-based and
/// `history` is the ordinal of the informed player's past actions.
///
/// # Safety
/// `sol` must be a live handle; `out` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn sg_informed_mix(
    sol: *const SgInformed,
    stage: usize,
    history: usize,
    state: usize,
    out: *mut f64,
    len: usize,
) -> SgStatus {
    guard(|| {
        let s = &borrow(sol, "solution")?.0.strategy;
        if stage == 0 || stage > s.horizon() {
            return Err(out_of_range(format!("stage {stage} outside 1..={}", s.horizon())));
        }
        if history >= history_count(s.num_actions(), stage) {
            return Err(out_of_range(format!("history {history} at stage {stage}")));
        }
        if state >= s.num_states() {
            return Err(out_of_range(format!("state {state}")));
        }
        copy_to(s.get(stage, history, state), out, len)
    })
}

/// Releases an informed solution. Null is ignored.
///
/// # Safety
/// `sol` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sg_informed_free(sol: *mut SgInformed) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Solves the uninformed player's LP.
///
/// # Safety
/// `game` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_solve_uninformed(game: *const SgGame, out: *mut *mut SgUninformed) -> SgStatus {
    guard(|| {
        let sol = solve_uninformed(&borrow(game, "game")?.0)?;
        write_out(out, Box::into_raw(Box::new(SgUninformed(sol))), "out")
    })
}

/// # Safety
/// `sol` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_uninformed_value(sol: *const SgUninformed, out: *mut f64) -> SgStatus {
    guard(|| write_out(out, borrow(sol, "solution")?.0.value, "out"))
}

/// Copies `tau_stage(history)` into `out`. `stage` is 1-based.
///
/// # Safety
/// `sol` must be a live handle; `out` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn sg_uninformed_mix(
    sol: *const SgUninformed,
    stage: usize,
    history: usize,
    out: *mut f64,
    len: usize,
) -> SgStatus {
    guard(|| {
        let s = &borrow(sol, "solution")?.0.strategy;
        if stage == 0 || stage > s.horizon() {
            return Err(out_of_range(format!("stage {stage} outside 1..={}", s.horizon())));
        }
        if history >= history_count(s.num_actions_p1(), stage) {
            return Err(out_of_range(format!("history {history} at stage {stage}")));
        }
        copy_to(s.get(stage, history), out, len)
    })
}

/// Copies the initial regret vector, one entry per state, into `out`.
///
/// # Safety
/// `sol` must be a live handle; `out` must point to `len` writable values.
#[no_mangle]
pub unsafe extern "C" fn sg_uninformed_initial_regret(sol: *const SgUninformed, out: *mut f64, len: usize) -> SgStatus {
    guard(|| copy_to(borrow(sol, "solution")?.0.initial_regret.values(), out, len))
}

/// Releases an uninformed solution. Null is ignored.
///
/// # Safety
/// `sol` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn sg_uninformed_free(sol: *mut SgUninformed) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// Value of the dual game with initial vector payoff `alpha` over
/// `horizon` stages.
///
/// # Safety
/// `game` must be a live handle; `alpha` must point to `len` values.
#[no_mangle]
pub unsafe extern "C" fn sg_dual_value(
    game: *const SgGame,
    horizon: usize,
    alpha: *const f64,
    len: usize,
    out: *mut f64,
) -> SgStatus {
    guard(|| {
        let g = &borrow(game, "game")?.0;
        if alpha.is_null() {
            return Err(null("alpha"));
        }
        if len != g.num_states() {
            return Err(Fail(
                SgStatus::Validation,
                format!("alpha has {len} entries, game has {} states", g.num_states()),
            ));
        }
        if horizon == 0 {
            return Err(Fail(SgStatus::Validation, "horizon must be at least 1".into()));
        }
        let a = Regret::new(std::slice::from_raw_parts(alpha, len).to_vec())?;
        write_out(out, dual_value(g, horizon, &a)?, "out")
    })
}

/// Plays `runs` independent games between the two solutions. Results are
/// a pure function of `(game, strategies, runs, seed)`.
///
/// # Safety
/// All handles must be live; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn sg_simulate(
    game: *const SgGame,
    informed: *const SgInformed,
    uninformed: *const SgUninformed,
    runs: u64,
    seed: u64,
    out: *mut SgSimReport,
) -> SgStatus {
    guard(|| {
        let g = &borrow(game, "game")?.0;
        let s = &borrow(informed, "informed")?.0.strategy;
        let u = &borrow(uninformed, "uninformed")?.0.strategy;
        let rep = simulate(g, s, u, runs, seed)?;
        let report = SgSimReport {
            runs: rep.runs,
            mean: rep.mean,
            std_error: rep.std_error,
            game_value: rep.game_value,
        };
        write_out(out, report, "out")
    })
}
