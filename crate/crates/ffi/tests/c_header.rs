//! Compiles and runs a small C program against the generated header and the
//! static library.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "topicirt.h"

int main(void) {
    double p = 0.0;
    if (tirt_prob_correct(1.0, 0.0, 0.0, &p) != TIRT_STATUS_OK || p != 0.5) return 1;
    if (tirt_prob_correct(1.0, 0.0, 0.0, NULL) != TIRT_STATUS_NULL_POINTER) return 2;
    if (tirt_last_error() == NULL) return 3;

    const int8_t cells[] = {1, 1, 0, 1, 0, 1, 1, 0, 0, 1, 1, 1, 1, 0, 0, 1, 1, 0};
    TirtMatrix *m = NULL;
    if (tirt_matrix_new(6, 3, cells, &m) != TIRT_STATUS_OK) return 4;
    TirtFitOptions opts = tirt_fit_options_default();
    TirtFit *fit = NULL;
    if (tirt_fit_2pl(m, &opts, &fit) != TIRT_STATUS_OK) return 5;
    if (tirt_fit_n_items(fit) != 3 || tirt_fit_n_models(fit) != 6) return 6;
    double a, b;
    TirtItemStatus s;
    if (tirt_fit_item(fit, 0, &a, &b, &s) != TIRT_STATUS_OK) return 7;
    if (s != TIRT_ITEM_STATUS_EXCLUDED_PERFECT_ACCURACY) return 8;

    char *json = NULL;
    if (tirt_fit_to_json(fit, &json) != TIRT_STATUS_OK || strstr(json, "abilities") == NULL) return 9;
    tirt_string_free(json);
    tirt_fit_free(fit);
    tirt_matrix_free(m);

    TirtAnswer kind;
    char letter;
    if (tirt_parse_answer("b", "ABCD", &kind, &letter) != TIRT_STATUS_OK) return 10;
    if (kind != TIRT_ANSWER_LETTER || letter != 'B') return 11;
    puts("ok");
    return 0;
}
"#;

#[test]
fn c_program_links_against_the_static_library() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    // target/<profile>/deps/<test binary>
    let profile_dir = std::env::current_exe().unwrap().parent().unwrap().parent().unwrap().to_path_buf();
    let lib = profile_dir.join("libtopicirt_ffi.a");
    assert!(lib.exists(), "static library missing at {}", lib.display());

    let work = tempfile::tempdir().unwrap();
    let src = work.path().join("main.c");
    let exe = work.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    let status = Command::new(&cc)
        .arg("-std=c99")
        .arg("-Wall")
        .arg("-Werror")
        .arg("-I")
        .arg(manifest.join("include"))
        .arg(&src)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .arg("-o")
        .arg(&exe)
        .status()
        .unwrap_or_else(|e| panic!("cannot run {cc}: {e}"));
    assert!(status.success(), "C compilation failed");
    let out = Command::new(&exe).output().unwrap();
    assert_eq!(out.status.code(), Some(0), "C program failed: {}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(String::from_utf8_lossy(&out.stdout).trim(), "ok");
}
