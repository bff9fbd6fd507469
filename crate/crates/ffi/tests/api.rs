use std::ffi::{CStr, CString};
use std::process::Command;
use std::ptr;

use regret_forge_ffi::*;

fn c(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    unsafe { CStr::from_ptr(rf_last_error()) }.to_string_lossy().into_owned()
}

fn game(name: &str) -> *mut RfGame {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { rf_game_new(c(name).as_ptr(), &mut g) }, RfStatus::Ok);
    g
}

#[test]
fn game_stats_through_the_handle() {
    let g = game("leduc");
    let mut s = RfGameStats::default();
    assert_eq!(unsafe { rf_game_stats(g, &mut s) }, RfStatus::Ok);
    assert_eq!(
        (s.histories, s.infosets, s.terminals, s.depth, s.max_infoset_size),
        (9457, 936, 5520, 12, 5)
    );
    unsafe { rf_game_free(g) };
}

#[test]
fn errors_carry_codes_and_messages() {
    let mut g = ptr::null_mut();
    assert_eq!(unsafe { rf_game_new(c("chess").as_ptr(), &mut g) }, RfStatus::InvalidArgument);
    assert!(g.is_null());
    assert!(last_error().contains("chess"), "{}", last_error());
    assert_eq!(unsafe { rf_game_new(ptr::null(), &mut g) }, RfStatus::NullPointer);
    assert_eq!(unsafe { rf_game_new(c("kuhn").as_ptr(), ptr::null_mut()) }, RfStatus::NullPointer);
    let g = game("kuhn");
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { rf_tabular_new(g, c("cfr++").as_ptr(), &mut s) }, RfStatus::InvalidArgument);
    let mut d = ptr::null_mut();
    let status = unsafe { rf_deep_new(c("kuhn").as_ptr(), c("vr_deep_cfr").as_ptr(), c("epsilon = 2.0").as_ptr(), 0, &mut d) };
    assert_eq!(status, RfStatus::InvalidArgument);
    assert!(last_error().contains("epsilon"));
    let mut e = 0.0;
    assert_eq!(unsafe { rf_policy_exploitability(g, c("/nonexistent/p").as_ptr(), &mut e) }, RfStatus::Io);
    unsafe {
        rf_game_free(g);
        rf_game_free(ptr::null_mut());
        rf_tabular_free(ptr::null_mut());
        rf_deep_free(ptr::null_mut());
    }
}

#[test]
fn tabular_solve_save_and_reload() {
    let g = game("kuhn");
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { rf_tabular_new(g, c("cfr+").as_ptr(), &mut s) }, RfStatus::Ok);
    assert_eq!(unsafe { rf_tabular_iterate(s, 500) }, RfStatus::Ok);
    let mut e = 1.0;
    assert_eq!(unsafe { rf_tabular_exploitability(s, &mut e) }, RfStatus::Ok);
    assert!(e < 1e-3, "{e}");
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("kuhn.policy");
    let cpath = c(path.to_str().unwrap());
    assert_eq!(unsafe { rf_tabular_save_policy(s, cpath.as_ptr()) }, RfStatus::Ok);
    let mut reloaded = 1.0;
    assert_eq!(unsafe { rf_policy_exploitability(g, cpath.as_ptr(), &mut reloaded) }, RfStatus::Ok);
    assert!((reloaded - e).abs() < 1e-12);
    unsafe {
        rf_tabular_free(s);
        rf_game_free(g);
    }
}

#[test]
fn deep_solver_runs_a_few_iterations() {
    let cfg = c("num_traversals = 50\nadvantage_network_train_steps = 10\nhistory_value_network_train_steps = 10\nave_policy_network_train_steps = 50\nnum_hiddens = 16");
    let mut d = ptr::null_mut();
    let status = unsafe { rf_deep_new(c("kuhn").as_ptr(), c("vr_deep_pdcfr_plus").as_ptr(), cfg.as_ptr(), 3, &mut d) };
    assert_eq!(status, RfStatus::Ok);
    let mut e = 0.0;
    assert_eq!(unsafe { rf_deep_exploitability(d, &mut e) }, RfStatus::InvalidArgument);
    assert_eq!(unsafe { rf_deep_iterate(d, 2) }, RfStatus::Ok);
    assert_eq!(unsafe { rf_deep_exploitability(d, &mut e) }, RfStatus::Ok);
    assert!(e.is_finite() && (0.0..=1.0).contains(&e), "{e}");
    unsafe { rf_deep_free(d) };
}

#[test]
fn head_to_head_against_rule_agents() {
    let g = game("leduc");
    let mut r = RfMatchResult::default();
    let status = unsafe { rf_head2head(g, c("uniform").as_ptr(), c("rule:tight_passive").as_ptr(), 2000, 1, &mut r) };
    assert_eq!(status, RfStatus::Ok);
    assert_eq!(r.matches, 2000);
    assert!(r.half_width > 0.0 && r.mean.is_finite());
    let status = unsafe { rf_head2head(g, c("uniform").as_ptr(), c("rule:shy").as_ptr(), 10, 1, &mut r) };
    assert_eq!(status, RfStatus::InvalidArgument);
    let status = unsafe { rf_head2head(g, c("uniform").as_ptr(), c("uniform").as_ptr(), 0, 1, &mut r) };
    assert_eq!(status, RfStatus::InvalidArgument);
    unsafe { rf_game_free(g) };
}

#[test]
fn header_declares_every_export_and_compiles() {
    let dir = std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let header = std::fs::read_to_string(dir.join("regret_forge.h")).unwrap();
    for f in [
        "rf_last_error",
        "rf_game_new",
        "rf_game_stats",
        "rf_game_free",
        "rf_tabular_new",
        "rf_tabular_iterate",
        "rf_tabular_exploitability",
        "rf_tabular_save_policy",
        "rf_tabular_free",
        "rf_deep_new",
        "rf_deep_iterate",
        "rf_deep_exploitability",
        "rf_deep_free",
        "rf_policy_exploitability",
        "rf_head2head",
    ] {
        assert!(header.contains(&format!("{f}(")), "{f} missing");
    }
    let src = tempfile::Builder::new().suffix(".c").tempfile().unwrap();
    std::fs::write(
        src.path(),
        "#include \"regret_forge.h\"\nint main(void) { RfGame *g = 0; return rf_game_new(\"kuhn\", &g) == RF_STATUS_OK ? 0 : 1; }\n",
    )
    .unwrap();
    match Command::new("cc").arg("-fsyntax-only").arg("-Wall").arg("-Werror").arg("-I").arg(&dir).arg(src.path()).output() {
        Ok(out) => assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr)),
        Err(_) => eprintln!("no C compiler found; skipped the compile check"),
    }
}
