//! Compiles and runs a C program against the generated header and the
//! static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "textrl.h"

int main(void) {
    TrlWorld *world = NULL;
    if (trl_world_load("fetch-quest-3", &world) != TRL_STATUS_OK) return 1;
    char *obs = NULL;
    if (trl_world_step_text(world, "look", &obs) != TRL_STATUS_OK) return 2;
    if (strstr(obs, "\"step\":1") == NULL) return 3;
    trl_string_free(obs);
    if (trl_world_step_text(world, "frobnicate", NULL) != TRL_STATUS_PARSE_ERROR) return 4;
    if (strlen(trl_last_error()) == 0) return 5;
    char *report = NULL;
    if (trl_evaluate_random(world, 10, 0, &report) != TRL_STATUS_OK) return 6;
    printf("%s\n", report);
    trl_string_free(report);
    trl_world_free(world);
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().unwrap().parent().unwrap();
    let lib = profile_dir.join("libtextrl_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());
    let tmp = tempfile::tempdir().unwrap();
    let src = tmp.path().join("main.c");
    let bin = tmp.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-I"])
        .arg(manifest.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .status()
        .unwrap_or_else(|e| panic!("cannot run C compiler {cc}: {e}"));
    assert!(status.success(), "C compile failed");
    let out = Command::new(&bin).output().unwrap();
    assert!(out.status.success(), "C program exited with {:?}", out.status.code());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["n_episodes"], 10);
}
