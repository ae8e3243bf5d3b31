use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "gqfpe.h"

int main(void) {
    GqfpeCoefficients c;
    if (gqfpe_coefficient_at(0.1, 1.0, INFINITY, &c) != GQFPE_STATUS_OK) return 1;
    if (fabs(c.gamma - 1.25) > 1e-12) return 2;

    GqfpeTrack *track = NULL;
    if (gqfpe_track_new(0.1, 0.5, 5.0, 50, &track) != GQFPE_STATUS_OK) return 3;
    if (gqfpe_track_len(track) != 51) return 4;
    gqfpe_track_free(track);

    GqfpePropagatorParams p;
    gqfpe_propagator_params_default(&p);
    p.n_basis = 24;
    p.dt = 0.01;
    GqfpePropagator *prop = NULL;
    if (gqfpe_propagator_new(&p, &prop) != GQFPE_STATUS_OK) return 5;
    if (gqfpe_propagator_step(prop, 50) != GQFPE_STATUS_OK) return 6;
    GqfpeObservables o;
    gqfpe_propagator_observables(prop, true, &o);
    gqfpe_propagator_free(prop);
    if (fabs(o.trace - 1.0) > 1e-9) return 7;

    char msg[128];
    if (gqfpe_eta_e(0.1, -1.0, &c.gamma) != GQFPE_STATUS_DOMAIN) return 8;
    if (gqfpe_last_error_message(msg, sizeof msg) == 0) return 9;
    printf("%s|%.6f\n", msg, o.q_mean);
    return 0;
}
"#;

fn target_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

#[test]
fn c_program_links_against_the_shared_library() {
    let lib_dir = target_dir();
    assert!(lib_dir.join("libgqfpe_ffi.so").exists(), "missing shared library in {}", lib_dir.display());
    let include = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("smoke.c");
    let bin = dir.path().join("smoke");
    std::fs::write(&src, PROGRAM).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&bin)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg("-L")
        .arg(&lib_dir)
        .arg(format!("-Wl,-rpath,{}", lib_dir.display()))
        .args(["-lgqfpe_ffi", "-lm"])
        .status()
        .expect("C compiler");
    assert!(status.success());
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "exit {:?}", out.status.code());
    let text = String::from_utf8(out.stdout).unwrap();
    let (msg, q) = text.trim().split_once('|').unwrap();
    assert!(msg.contains("omega"));
    assert!(q.parse::<f64>().unwrap() > 0.0);
}
