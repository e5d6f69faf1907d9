//! Compiles and runs a C program against the generated header and the
//! static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "lotdesign.h"

int main(void) {
    double rates[4] = {0.2, 0.5, 0.75, 0.3};
    double v = 0.0;
    if (ld_nsrd(rates, 4, &v) != LD_STATUS_OK) return 1;
    if (fabs(v - 0.242813) > 1e-6) return 2;
    if (ld_nsrd(rates, 1, &v) != LD_STATUS_UNDEFINED) return 3;
    if (ld_last_error() == NULL) return 4;
    LdWilcoxon w;
    double a[1] = {1.0}, b[1] = {2.0};
    if (ld_wilcoxon_left_tail(a, 1, b, 1, 0.05, &w) != LD_STATUS_OK) return 5;
    if (w.p_value != 0.5 || w.method != LD_METHOD_EXACT) return 6;
    LdModel *m = NULL;
    if (ld_model_from_toml("nonsense", &m) != LD_STATUS_CONFIG || m != NULL) return 7;
    printf("ok\n");
    return 0;
}
"#;

fn header_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

fn compiler() -> String {
    std::env::var("CC").unwrap_or_else(|_| "cc".into())
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(header_dir().join("lotdesign.h")).unwrap();
    for name in [
        "ld_last_error",
        "ld_nsrd",
        "ld_nsr",
        "ld_wilcoxon_left_tail",
        "ld_lot_type_count",
        "ld_model_from_toml",
        "ld_model_solve",
        "ld_solution_branch",
        "ld_solution_free",
        "typedef struct LdModel LdModel",
        "LD_STATUS_OK = 0",
    ] {
        assert!(h.contains(name), "header lacks {name}");
    }
}

/// `target/<profile>` of the running test binary.
fn profile_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_and_runs() {
    let lib = profile_dir().join("liblotdesign_ffi.a");
    assert!(lib.exists(), "static library not found at {}", lib.display());
    let dir = std::env::temp_dir().join(format!("lotdesign-ffi-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("smoke.c");
    let bin = dir.join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(compiler())
        .arg("-std=c11")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(header_dir())
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .expect("C compiler available");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    assert_eq!(String::from_utf8_lossy(&out.stdout), "ok\n");
    let _ = std::fs::remove_dir_all(&dir);
}
