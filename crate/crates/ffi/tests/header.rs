use std::path::PathBuf;
use std::process::Command;

fn header() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("include/fedba.h")
}

#[test]
fn header_declares_every_export() {
    let text = std::fs::read_to_string(header()).unwrap();
    for name in [
        "fedba_last_error",
        "fedba_config_new",
        "fedba_config_preset",
        "fedba_config_set",
        "fedba_config_apply_text",
        "fedba_config_validate",
        "fedba_config_free",
        "fedba_run_experiment",
        "fedba_records_len",
        "fedba_records_get",
        "fedba_records_write_csv",
        "fedba_records_free",
        "fedba_g",
        "fedba_distance_transform",
        "fedba_fedba_weights",
        "fedba_fedavg_weights",
    ] {
        assert!(text.contains(&format!("{name}(")), "{name} missing from header");
    }
    assert!(text.contains("typedef struct FedbaConfig FedbaConfig;"));
}

#[test]
fn header_compiles_as_c_and_cpp() {
    for (cc, lang) in [("cc", "c"), ("c++", "c++")] {
        let Ok(out) = Command::new(cc)
            .args(["-fsyntax-only", "-Wall", "-Werror", "-x", lang])
            .arg(header())
            .output()
        else {
            eprintln!("{cc} not available; skipping");
            continue;
        };
        assert!(out.status.success(), "{cc}: {}", String::from_utf8_lossy(&out.stderr));
    }
}

const C_PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "fedba.h"

int main(void) {
    double g = 0.0;
    if (fedba_g(2.0, &g) != FEDBA_STATUS_OK || fabs(g - atan(2.0)) > 1e-15) return 1;
    if (fedba_g(-1.0, &g) != FEDBA_STATUS_DOMAIN || fedba_last_error() == NULL) return 2;

    size_t ids[3] = {0, 1, 2};
    double d[3] = {0.5, 0.5, 0.5};
    double w[3];
    if (fedba_fedba_weights(ids, d, 3, 1e-8, 1e-12, w) != FEDBA_STATUS_OK) return 3;
    if (w[0] != 1.0 / 3.0 || w[2] != 1.0 / 3.0) return 4;

    FedbaConfig *cfg = NULL;
    if (fedba_config_preset("mnist-paper", &cfg) != FEDBA_STATUS_OK) return 5;
    if (fedba_config_set(cfg, "rounds", "0") != FEDBA_STATUS_OK) return 6;
    fedba_config_free(cfg);
    printf("ok\n");
    return 0;
}
"#;

#[test]
fn c_program_links_against_the_static_library() {
    // Integration tests run from <target>/<profile>/deps.
    let exe = std::env::current_exe().unwrap();
    let profile_dir = exe.parent().and_then(|p| p.parent()).unwrap();
    let lib = profile_dir.join("libfedba_ffi.a");
    if !lib.is_file() {
        eprintln!("{} not built; skipping", lib.display());
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let bin = dir.path().join("main");
    std::fs::write(&src, C_PROGRAM).unwrap();
    let Ok(out) = Command::new("cc")
        .arg(&src)
        .arg("-I")
        .arg(header().parent().unwrap())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
    else {
        eprintln!("cc not available; skipping");
        return;
    };
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let run = Command::new(&bin).output().unwrap();
    assert!(run.status.success(), "exit {:?}", run.status.code());
    assert_eq!(String::from_utf8_lossy(&run.stdout), "ok\n");
}
