//! Builds and runs a C program against the generated header and static library.

use std::path::{Path, PathBuf};
use std::process::Command;

const PROGRAM: &str = r#"
#include <math.h>
#include <stdio.h>
#include "hestoncap.h"

int main(void) {
    HcMarketParams params = hc_market_params_base();
    HcMarket *market = NULL;
    if (hc_market_new(&params, &market) != HC_STATUS_OK) return 10;

    HcSolution *solution = NULL;
    if (hc_solve(market, 0.0, INFINITY, 0, &solution) != HC_STATUS_OK) {
        fprintf(stderr, "%s\n", hc_last_error());
        return 11;
    }
    double ratio = 0.0, weight = 0.0;
    hc_market_merton_ratio(market, &ratio);
    hc_solution_weight(solution, 0.5, &weight);
    hc_solution_free(solution);

    params.b = 0.0;
    HcMarket *bad = NULL;
    HcStatus status = hc_market_new(&params, &bad);
    printf("%.12f %.12f %d %s\n", ratio, weight, (int)status, hc_status_name(status));
    hc_market_free(market);
    return bad == NULL ? 0 : 12;
}
"#;

fn target_dir() -> PathBuf {
    // <target>/<profile>/deps/<test binary>
    let exe = std::env::current_exe().unwrap();
    exe.parent().unwrap().parent().unwrap().to_path_buf()
}

fn header_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("include")
}

fn compiler() -> String {
    std::env::var("CC").unwrap_or_else(|_| "cc".into())
}

#[test]
fn header_is_valid_c_and_cpp() {
    let header = header_dir().join("hestoncap.h");
    for (lang, std) in [("c", "-std=c99"), ("c++", "-std=c++11")] {
        let out = Command::new(compiler())
            .args(["-x", lang, std, "-fsyntax-only", "-Wall", "-Werror"])
            .arg(&header)
            .output()
            .expect("a C compiler is available");
        assert!(
            out.status.success(),
            "{lang}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn c_program_links_and_runs() {
    let lib = target_dir().join("libhestoncap_ffi.a");
    assert!(lib.exists(), "missing {}", lib.display());
    let tmp = PathBuf::from(env!("CARGO_TARGET_TMPDIR"));
    let source = tmp.join("hestoncap_smoke.c");
    let binary = tmp.join("hestoncap_smoke");
    std::fs::write(&source, PROGRAM).unwrap();
    let build = Command::new(compiler())
        .arg(&source)
        .arg("-I")
        .arg(header_dir())
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&binary)
        .output()
        .unwrap();
    assert!(
        build.status.success(),
        "{}",
        String::from_utf8_lossy(&build.stderr)
    );
    let run = Command::new(&binary).output().unwrap();
    assert!(
        run.status.success(),
        "exit {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stderr)
    );
    let stdout = String::from_utf8(run.stdout).unwrap();
    let fields: Vec<&str> = stdout.split_whitespace().collect();
    let ratio: f64 = fields[0].parse().unwrap();
    let weight: f64 = fields[1].parse().unwrap();
    assert!((ratio - 0.859171428571).abs() < 1e-9);
    assert!(weight >= ratio, "upper side is open, lower bound inactive");
    assert_eq!(&fields[2..], ["2", "invalid", "argument"]);
}
