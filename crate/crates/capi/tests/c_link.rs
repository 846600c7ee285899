//! Compiles and runs a small C program against the generated header and the
//! cdylib, proving the ABI is usable from plain C.

use std::path::PathBuf;
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <string.h>
#include "gradform.h"

int main(void) {
    const char *json =
        "{\"dim\":3,\"coords\":[\"x\",\"y\",\"z\"],"
        "\"phi\":[[\"0\",\"0\",\"0\"],[\"0\",\"0\",\"0\"],[\"0\",\"-x\",\"1\"]]}";
    gradform_connection *conn = NULL;
    if (gradform_connection_parse(json, &conn) != GRADFORM_STATUS_OK) return 1;
    if (gradform_connection_rank(conn) != 1) return 2;

    char *text = NULL;
    if (gradform_connection_curvature(conn, &text) != GRADFORM_STATUS_OK) return 3;
    if (strcmp(text, "(1) x^y (*) d/z\n") != 0) return 4;
    gradform_string_free(text);

    size_t dims[1] = {3};
    char *report = NULL;
    if (gradform_verify("bianchi", dims, 1, 2, 7, &report) != GRADFORM_STATUS_OK) return 5;
    if (strstr(report, "PASS 2/2") == NULL) return 6;
    gradform_string_free(report);

    gradform_connection *bad = NULL;
    if (gradform_connection_parse("{", &bad) != GRADFORM_STATUS_PARSE) return 7;

    gradform_connection_free(conn);
    printf("c link ok\n");
    return 0;
}
"#;

#[test]
fn c_program_links_and_runs() {
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include = manifest.join("include");
    assert!(include.join("gradform.h").exists(), "header not generated");

    // the cdylib sits in the target profile directory two levels up
    let lib_dir = {
        let mut exe = std::env::current_exe().unwrap();
        exe.pop(); // test binary name
        exe.pop(); // deps/
        exe
    };
    let lib = lib_dir.join("libgradform_capi.so");
    assert!(lib.exists(), "cdylib missing at {}", lib.display());

    let dir = std::env::temp_dir().join("gradform-c-link");
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("main.c");
    let bin = dir.join("main");
    std::fs::write(&src, PROGRAM).unwrap();

    let compile = Command::new("cc")
        .arg(&src)
        .arg("-o")
        .arg(&bin)
        .arg(format!("-I{}", include.display()))
        .arg(format!("-L{}", lib_dir.display()))
        .arg("-lgradform_capi")
        .output()
        .expect("cc is available");
    assert!(
        compile.status.success(),
        "compile failed:\n{}",
        String::from_utf8_lossy(&compile.stderr)
    );

    let run = Command::new(&bin)
        .env("LD_LIBRARY_PATH", &lib_dir)
        .output()
        .expect("compiled program runs");
    assert!(
        run.status.success(),
        "exit: {:?}, stdout: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stdout)
    );
    assert_eq!(String::from_utf8_lossy(&run.stdout), "c link ok\n");
}
