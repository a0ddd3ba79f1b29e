//! Compiles and runs a small C program against the generated header and the
//! static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <stdio.h>
#include <math.h>
#include "netab.h"

int main(void) {
    NetabGraph *g = NULL;
    if (netab_graph_watts_strogatz(12, 4, 0.1, 42, &g) != NETAB_STATUS_OK) return 1;
    if (netab_graph_num_edges(g) != 24) return 2;

    NetabIsingParams p = {0.0, 0.2, 0.1, 0.1, 0.0};
    NetabAte ate;
    if (netab_graph_ate_exact(g, &p, &ate) != NETAB_STATUS_OK) return 3;
    if (!(ate.value > 0.0)) return 4;

    NetabDataset *d = NULL;
    if (netab_dataset_generate_ising(&p, 4, 20, 4, 0.1, 0.5, 7, &d) != NETAB_STATUS_OK) return 5;
    NetabBootstrapResult *r = NULL;
    if (netab_bootstrap_test(d, NETAB_STATISTIC_ALPHA_DIFF, 19, 3, &r) != NETAB_STATUS_OK) return 6;
    double pv = netab_bootstrap_p_value(r);
    if (!(pv >= 0.05 && pv <= 1.0)) return 7;

    if (netab_graph_watts_strogatz(3, 4, 0.1, 1, &g) != NETAB_STATUS_INVALID_PARAMETER) return 8;
    if (netab_last_error_message()[0] == '\0') return 9;

    printf("ate=%.6f p=%.4f\n", ate.value, pv);
    netab_bootstrap_free(r);
    netab_dataset_free(d);
    netab_graph_free(g);
    return 0;
}
"#;

/// Directory holding the library artifacts (`target/<profile>`).
fn artifact_dir() -> PathBuf {
    let exe = std::env::current_exe().unwrap();
    exe.parent().and_then(Path::parent).unwrap().to_path_buf()
}

#[test]
fn header_compiles_and_links() {
    let lib = artifact_dir().join("libnetab_ffi.a");
    let cc = std::env::var("CC").unwrap_or_else(|_| "cc".into());
    if !lib.exists() || Command::new(&cc).arg("--version").output().is_err() {
        eprintln!("skipping: no C compiler or static library at {}", lib.display());
        return;
    }
    let include = Path::new(env!("CARGO_MANIFEST_DIR")).join("include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("main.c");
    let exe = dir.path().join("main");
    std::fs::write(&src, PROGRAM).unwrap();
    let status = Command::new(&cc)
        .args(["-std=c99", "-Wall", "-Werror", "-o"])
        .arg(&exe)
        .arg(&src)
        .arg("-I")
        .arg(&include)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm"])
        .status()
        .unwrap();
    assert!(status.success(), "C program failed to build");
    let out = Command::new(&exe).output().unwrap();
    assert!(out.status.success(), "exit {:?}: {}", out.status.code(), String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("ate="));
}
