use std::ffi::{CStr, CString};
use std::path::{Path, PathBuf};
use std::process::Command;
use std::ptr;

use apc_ffi::*;

const TWO_BY_TWO: &str = "APC 1\nn 2\ncosts\n1 10\n10 1\nconflicts 1\n0 0 1 1\n";

fn last_error() -> String {
    unsafe { CStr::from_ptr(apc_last_error_message()) }
        .to_string_lossy()
        .into_owned()
}

fn parse(text: &str) -> *mut ApcInstance {
    let c = CString::new(text).unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(unsafe { apc_instance_parse(c.as_ptr(), &mut inst) }, ApcErrorCode::Ok);
    inst
}

#[test]
fn parse_solve_and_inspect() {
    let inst = parse(TWO_BY_TWO);
    unsafe {
        assert_eq!(apc_instance_n(inst), 2);
        assert_eq!(apc_instance_conflict_count(inst), 1);

        let mut sol = ptr::null_mut();
        assert_eq!(apc_solve_exact(inst, 5.0, 0, ptr::null(), &mut sol), ApcErrorCode::Ok);
        assert_eq!(apc_solution_status(sol), ApcSolveStatus::Optimal);
        let mut v = 0;
        assert!(apc_solution_value(sol, &mut v));
        assert_eq!(v, 20);
        let mut lb = 0;
        assert!(apc_solution_lower_bound(sol, &mut lb));
        assert!(lb <= v);
        assert_eq!(apc_solution_assignment(sol, ptr::null_mut(), 0), 2);
        let mut a = [9usize; 2];
        assert_eq!(apc_solution_assignment(sol, a.as_mut_ptr(), 2), 2);
        assert_eq!(a, [1, 0]);
        assert!(apc_solution_sec_total(sol) >= apc_solution_sec_best(sol));
        assert!(apc_solution_nodes(sol) >= 1);

        let mut oracle = ptr::null_mut();
        assert_eq!(apc_solve_oracle(inst, &mut oracle), ApcErrorCode::Ok);
        let mut ov = 0;
        assert!(apc_solution_value(oracle, &mut ov));
        assert_eq!(ov, 20);

        let mut seeded = ptr::null_mut();
        assert_eq!(apc_solve_exact(inst, 5.0, 0, oracle, &mut seeded), ApcErrorCode::Ok);
        assert_eq!(apc_solution_status(seeded), ApcSolveStatus::Optimal);

        apc_solution_free(seeded);
        apc_solution_free(oracle);
        apc_solution_free(sol);
        apc_instance_free(inst);
    }
}

#[test]
fn parse_errors_set_message() {
    let c = CString::new("APC 1\nn 2\ncosts\n1 x\n").unwrap();
    let mut inst = ptr::null_mut();
    assert_eq!(
        unsafe { apc_instance_parse(c.as_ptr(), &mut inst) },
        ApcErrorCode::Parse
    );
    assert!(inst.is_null());
    assert!(last_error().contains('x'), "{}", last_error());
    assert_eq!(
        unsafe { apc_instance_parse(ptr::null(), &mut inst) },
        ApcErrorCode::NullPointer
    );
    let bad = [0xffu8, 0];
    assert_eq!(
        unsafe { apc_instance_parse(bad.as_ptr().cast(), &mut inst) },
        ApcErrorCode::InvalidUtf8
    );
}

#[test]
fn write_round_trips() {
    let mut inst = ptr::null_mut();
    unsafe {
        assert_eq!(apc_instance_generate(6, 25, 1, 100, 3, &mut inst), ApcErrorCode::Ok);
        let mut text = ptr::null_mut();
        assert_eq!(apc_instance_write(inst, &mut text), ApcErrorCode::Ok);
        let s = CStr::from_ptr(text).to_str().unwrap().to_owned();
        apc_string_free(text);
        let again = parse(&s);
        let mut text2 = ptr::null_mut();
        assert_eq!(apc_instance_write(again, &mut text2), ApcErrorCode::Ok);
        assert_eq!(CStr::from_ptr(text2).to_str().unwrap(), s);
        apc_string_free(text2);
        apc_instance_free(again);
        apc_instance_free(inst);
    }
}

#[test]
fn generate_rejects_too_many_conflicts() {
    let mut inst = ptr::null_mut();
    assert_eq!(
        unsafe { apc_instance_generate(2, 7, 1, 100, 0, &mut inst) },
        ApcErrorCode::InvalidArgument
    );
    assert!(inst.is_null());
}

#[test]
fn build_from_arrays() {
    let costs = [1i64, 10, 10, 1];
    let conflicts = [0usize, 0, 1, 1];
    let mut inst = ptr::null_mut();
    unsafe {
        assert_eq!(
            apc_instance_new(2, costs.as_ptr(), conflicts.as_ptr(), 1, &mut inst),
            ApcErrorCode::Ok
        );
        let mut v = 0;
        assert_eq!(apc_evaluate(inst, [0usize, 1].as_ptr(), 2, &mut v), ApcErrorCode::Ok);
        assert_eq!(v, 2);
        assert_eq!(
            apc_evaluate(inst, [0usize, 0].as_ptr(), 2, &mut v),
            ApcErrorCode::NotAPermutation
        );

        let mut ok = true;
        let mut viol = 0;
        assert_eq!(
            apc_check_feasible(inst, [0i64, 1].as_ptr(), 2, &mut ok, &mut viol),
            ApcErrorCode::Ok
        );
        assert!(!ok);
        assert_eq!(viol, 1);
        assert_eq!(
            apc_check_feasible(inst, [1i64, 0].as_ptr(), 2, &mut ok, &mut viol),
            ApcErrorCode::Ok
        );
        assert!(ok);
        assert_eq!(viol, 0);
        assert_eq!(
            apc_check_feasible(inst, [-1i64, 7].as_ptr(), 2, &mut ok, &mut viol),
            ApcErrorCode::Ok
        );
        assert!(!ok);
        apc_instance_free(inst);

        let degenerate = [0usize, 0, 0, 0];
        assert_eq!(
            apc_instance_new(2, costs.as_ptr(), degenerate.as_ptr(), 1, &mut inst),
            ApcErrorCode::InvalidArgument
        );
        let negative = [1i64, -1, 1, 1];
        assert_eq!(
            apc_instance_new(2, negative.as_ptr(), ptr::null(), 0, &mut inst),
            ApcErrorCode::InvalidArgument
        );
    }
}

#[test]
fn heuristic_and_limits() {
    let inst = parse(TWO_BY_TWO);
    unsafe {
        let mut sol = ptr::null_mut();
        assert_eq!(apc_solve_heuristic(inst, 3, 5.0, 1, &mut sol), ApcErrorCode::Ok);
        assert_eq!(apc_solution_status(sol), ApcSolveStatus::Feasible);
        apc_solution_free(sol);
        assert_eq!(
            apc_solve_heuristic(inst, 3, 0.0, 1, &mut sol),
            ApcErrorCode::InvalidArgument
        );
        assert_eq!(
            apc_solve_exact(inst, f64::NAN, 0, ptr::null(), &mut sol),
            ApcErrorCode::InvalidArgument
        );
        apc_instance_free(inst);

        // Every pair of edges in a 2x2 instance conflicts: no matching survives.
        let blocked = parse("APC 1\nn 2\ncosts\n1 1\n1 1\nconflicts 2\n0 0 1 1\n0 1 1 0\n");
        assert_eq!(
            apc_solve_heuristic(blocked, 3, 5.0, 1, &mut sol),
            ApcErrorCode::NotFound
        );
        assert_eq!(
            apc_solve_exact(blocked, 5.0, 0, ptr::null(), &mut sol),
            ApcErrorCode::Ok
        );
        assert_eq!(apc_solution_status(sol), ApcSolveStatus::Infeasible);
        let mut v = 0;
        assert!(!apc_solution_value(sol, &mut v));
        assert_eq!(apc_solution_assignment(sol, ptr::null_mut(), 0), 0);
        apc_solution_free(sol);
        apc_instance_free(blocked);

        let mut big = ptr::null_mut();
        assert_eq!(apc_instance_generate(11, 0, 1, 100, 0, &mut big), ApcErrorCode::Ok);
        assert_eq!(apc_solve_oracle(big, &mut sol), ApcErrorCode::TooLarge);
        apc_instance_free(big);
    }
}

#[test]
fn gap() {
    let mut g = 0.0;
    assert_eq!(unsafe { apc_gap_percent(110, 100, &mut g) }, ApcErrorCode::Ok);
    assert!((g - 10.0).abs() < 1e-12);
    assert_eq!(unsafe { apc_gap_percent(1, 0, &mut g) }, ApcErrorCode::InvalidArgument);
}

#[test]
fn null_handles_are_tolerated() {
    unsafe {
        apc_instance_free(ptr::null_mut());
        apc_solution_free(ptr::null_mut());
        apc_string_free(ptr::null_mut());
        assert_eq!(apc_instance_n(ptr::null()), 0);
        let mut out = ptr::null_mut();
        assert_eq!(apc_instance_write(ptr::null(), &mut out), ApcErrorCode::NullPointer);
        assert!(last_error().contains("instance"));
    }
}

#[test]
fn header_declares_every_entry_point() {
    let header = std::fs::read_to_string(Path::new(env!("CARGO_MANIFEST_DIR")).join("include/apc.h")).unwrap();
    for f in [
        "apc_last_error_message",
        "apc_string_free",
        "apc_instance_parse",
        "apc_instance_generate",
        "apc_instance_new",
        "apc_instance_free",
        "apc_instance_write",
        "apc_instance_export_lp",
        "apc_evaluate",
        "apc_check_feasible",
        "apc_solve_exact",
        "apc_solve_heuristic",
        "apc_solve_oracle",
        "apc_solution_status",
        "apc_solution_value",
        "apc_solution_assignment",
        "apc_solution_free",
        "apc_gap_percent",
    ] {
        assert!(header.contains(&format!("{f}(")), "missing {f}");
    }
    assert!(header.contains("typedef struct ApcInstance ApcInstance;"));
}

/// Directory holding `libapc_ffi.a`: the parent of the `deps/` directory
/// this test binary lives in.
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn c_smoke_test() {
    let lib = artifact_dir().join("libapc_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let manifest = Path::new(env!("CARGO_MANIFEST_DIR"));
    let out = tempfile::tempdir().unwrap();
    let exe = out.path().join("smoke");
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(manifest.join("tests/c/smoke.c"))
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&exe)
        .status()
        .unwrap();
    assert!(status.success(), "C compile failed");
    let run = Command::new(&exe).output().unwrap();
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert_eq!(String::from_utf8_lossy(&run.stdout).trim(), "ok");
}
