//! C interface: opaque handles for games and solvers, plus status codes.
//!
//! Every function returns an [`RfStatus`]. On failure a message is kept per
//! thread and can be read with [`rf_last_error`]. Handles returned through
//! `out` pointers must be released with the matching `*_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use regret_forge::agents::head2head;
use regret_forge::deep::{DeepSolver, DeepVariant, NetworkPolicy, RunConfig};
use regret_forge::exploitability::{exploitability_flat, Evaluator};
use regret_forge::game::Game;
use regret_forge::harness::{Contender, PolicyFile};
use regret_forge::tabular::{TabularSolver, Variant};
use regret_forge::Error;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Solver = 4,
    Panic = 5,
}

/// Exact tree sizes of a game.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RfGameStats {
    pub histories: u64,
    pub infosets: u64,
    pub terminals: u64,
    pub depth: u64,
    pub max_infoset_size: u64,
}

/// Mean normalized reward of the first player with its 95% half-width.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct RfMatchResult {
    pub mean: f64,
    pub half_width: f64,
    pub matches: u64,
}

pub struct RfGame(Game);

pub struct RfTabular(TabularSolver);

pub struct RfDeep(DeepSolver);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> RfStatus {
    match e {
        Error::UnknownGame(_)
        | Error::UnsupportedSize { .. }
        | Error::UnknownVariant(_)
        | Error::InvalidParameter(_)
        | Error::InvalidInfoSet(_)
        | Error::Config(_) => RfStatus::InvalidArgument,
        Error::Io { .. } => RfStatus::Io,
        Error::Run { source, .. } => status_of(source),
        _ => RfStatus::Solver,
    }
}

struct Fail(RfStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RfStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RfStatus::Panic
        }
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(RfStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(RfStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn get<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(|| Fail(RfStatus::NullPointer, format!("{what} is null")))
}

unsafe fn get_mut<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| Fail(RfStatus::NullPointer, format!("{what} is null")))
}

unsafe fn put<T>(out: *mut T, v: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail(RfStatus::NullPointer, "out is null".into()));
    }
    out.write(v);
    Ok(())
}

/// Message of the last failure on this thread, or an empty string. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rf_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Creates a game from its name, e.g. `"leduc"` or `"liars_dice:5"`.
///
/// # Safety
/// `name` must be a NUL-terminated string and `out` a writable pointer.
#[no_mangle]
pub unsafe extern "C" fn rf_game_new(name: *const c_char, out: *mut *mut RfGame) -> RfStatus {
    guard(|| {
        let game = Game::from_name(text(name, "name")?)?;
        put(out, Box::into_raw(Box::new(RfGame(game))))
    })
}

/// # Safety
/// `game` must come from [`rf_game_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rf_game_free(game: *mut RfGame) {
    if !game.is_null() {
        drop(Box::from_raw(game));
    }
}

/// Enumerates the whole tree. Slow for the largest games.
///
/// # Safety
/// `game` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_game_stats(game: *const RfGame, out: *mut RfGameStats) -> RfStatus {
    guard(|| {
        let s = get(game, "game")?.0.enumerate_stats();
        put(
            out,
            RfGameStats {
                histories: s.num_histories,
                infosets: s.num_infosets,
                terminals: s.num_terminals,
                depth: s.depth,
                max_infoset_size: s.max_infoset_size,
            },
        )
    })
}

/// Creates an exact solver, `algo` being one of `cfr`, `cfr+`, `linear`,
/// `dcfr`, `dcfr+`, `pcfr+`, `pdcfr+`.
///
/// # Safety
/// `game` must be a live handle, `algo` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_tabular_new(game: *const RfGame, algo: *const c_char, out: *mut *mut RfTabular) -> RfStatus {
    guard(|| {
        let game = get(game, "game")?;
        let variant: Variant = text(algo, "algo")?.parse()?;
        let solver = TabularSolver::new(&game.0, variant.rule())?;
        put(out, Box::into_raw(Box::new(RfTabular(solver))))
    })
}

/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rf_tabular_iterate(solver: *mut RfTabular, iterations: u64) -> RfStatus {
    guard(|| {
        let s = get_mut(solver, "solver")?;
        for _ in 0..iterations {
            s.0.iterate()?;
        }
        Ok(())
    })
}

/// Exploitability of the average strategy.
///
/// # Safety
/// `solver` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_tabular_exploitability(solver: *const RfTabular, out: *mut f64) -> RfStatus {
    guard(|| {
        let s = &get(solver, "solver")?.0;
        put(out, exploitability_flat(s.tree(), &s.average_strategy()))
    })
}

/// Writes the average strategy in the tabular text format.
///
/// # Safety
/// `solver` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn rf_tabular_save_policy(solver: *const RfTabular, path: *const c_char) -> RfStatus {
    guard(|| {
        let s = get(solver, "solver")?;
        let path = text(path, "path")?;
        s.0.average_policy()?.save(Path::new(path))?;
        Ok(())
    })
}

/// # Safety
/// `solver` must come from [`rf_tabular_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rf_tabular_free(solver: *mut RfTabular) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

/// Creates a neural solver. `config` is TOML hyperparameter text or null for
/// the defaults.
///
/// # Safety
/// `game` and `algo` must be NUL-terminated strings, `config` one or null,
/// and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_deep_new(
    game: *const c_char,
    algo: *const c_char,
    config: *const c_char,
    seed: u64,
    out: *mut *mut RfDeep,
) -> RfStatus {
    guard(|| {
        let game = text(game, "game")?.parse()?;
        let variant: DeepVariant = text(algo, "algo")?.parse()?;
        let config = if config.is_null() { "" } else { text(config, "config")? };
        let cfg = RunConfig::parse(game, variant, seed, config)?;
        put(out, Box::into_raw(Box::new(RfDeep(DeepSolver::new(&cfg)?))))
    })
}

/// # Safety
/// `solver` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn rf_deep_iterate(solver: *mut RfDeep, iterations: u64) -> RfStatus {
    guard(|| {
        let s = get_mut(solver, "solver")?;
        for _ in 0..iterations {
            s.0.iterate()?;
        }
        Ok(())
    })
}

/// Fits the average-strategy network on the samples so far and reports its
/// exploitability. Needs at least one completed iteration.
///
/// # Safety
/// `solver` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_deep_exploitability(solver: *const RfDeep, out: *mut f64) -> RfStatus {
    guard(|| {
        let s = &get(solver, "solver")?.0;
        if s.iteration() == 0 {
            return Err(Fail(RfStatus::InvalidArgument, "no iteration has run yet".into()));
        }
        let net = s.train_average(s.iteration())?;
        let e = Evaluator::new(s.game()).exploitability_of(&NetworkPolicy { game: s.game(), net: &net })?;
        put(out, e)
    })
}

/// # Safety
/// `solver` must come from [`rf_deep_new`] and not be used afterwards. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn rf_deep_free(solver: *mut RfDeep) {
    if !solver.is_null() {
        drop(Box::from_raw(solver));
    }
}

/// Exploitability of a saved tabular or network policy.
///
/// # Safety
/// `game` must be a live handle, `path` a NUL-terminated string, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_policy_exploitability(game: *const RfGame, path: *const c_char, out: *mut f64) -> RfStatus {
    guard(|| {
        let game = &get(game, "game")?.0;
        let file = PolicyFile::load(Path::new(text(path, "path")?))?;
        let e = Evaluator::new(game).exploitability_of(&*file.source(game))?;
        put(out, e)
    })
}

/// Plays `n` seat-alternating hands. Contenders are `policy:FILE`,
/// `rule:STYLE` or `uniform`.
///
/// # Safety
/// `game` must be a live handle, `a` and `b` NUL-terminated strings, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rf_head2head(
    game: *const RfGame,
    a: *const c_char,
    b: *const c_char,
    n: u64,
    seed: u64,
    out: *mut RfMatchResult,
) -> RfStatus {
    guard(|| {
        let game = &get(game, "game")?.0;
        let a = Contender::parse(text(a, "a")?)?;
        let b = Contender::parse(text(b, "b")?)?;
        let r = head2head(game, &*a.source(game), &*b.source(game), n, seed)?;
        put(
            out,
            RfMatchResult {
                mean: r.mean,
                half_width: r.half_width,
                matches: r.matches,
            },
        )
    })
}
