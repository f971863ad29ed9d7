//! Compile and run a small C program against the generated header and
//! the staticlib, exercising the ABI the way an external consumer would.
//! Skipped silently when no C compiler is on PATH.

use std::path::PathBuf;
use std::process::Command;

const C_SOURCE: &str = r#"
#include <stdio.h>
#include <string.h>
#include "tropedwards.h"

int main(void) {
    if (strlen(te_version()) == 0) return 10;
    TeConfig *cfg = te_config_new();
    char *out = NULL;
    int code = te_classify_json(cfg, "1-3q", "-1+q", &out);
    if (code != TE_OK) return 11;
    if (!strstr(out, "\"kind\": \"square\"")) return 12;
    te_string_free(out);
    code = te_family_json(cfg, "1 + x", "1", &out);
    if (code != TE_ERR_PARSE) return 13;
    char *err = te_last_error();
    if (!err || !strstr(err, "parse error")) return 14;
    te_string_free(err);
    te_config_free(cfg);
    printf("c-smoke-ok\n");
    return 0;
}
"#;

fn cc_available() -> Option<String> {
    for cc in ["cc", "gcc", "clang"] {
        if Command::new(cc)
            .arg("--version")
            .output()
            .map(|o| o.status.success())
            .unwrap_or(false)
        {
            return Some(cc.to_string());
        }
    }
    None
}

#[test]
fn c_consumer_smoke() {
    let Some(cc) = cc_available() else {
        eprintln!("skipping: no C compiler found");
        return;
    };
    let manifest = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let include_dir = manifest.join("include");
    assert!(
        include_dir.join("tropedwards.h").exists(),
        "generated header missing; build.rs should have produced it"
    );
    // the staticlib lands next to this test's own artifacts
    let mut lib = None;
    for ancestor in PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .ancestors()
        .map(|a| a.join("target/debug/libtropedwards_ffi.a"))
    {
        if ancestor.exists() {
            lib = Some(ancestor);
            break;
        }
    }
    let Some(lib) = lib else {
        eprintln!("skipping: staticlib not found (cross-target build?)");
        return;
    };
    let dir = std::env::temp_dir().join("tropedwards_c_smoke");
    std::fs::create_dir_all(&dir).unwrap();
    let src = dir.join("smoke.c");
    let bin = dir.join("smoke");
    std::fs::write(&src, C_SOURCE).unwrap();
    let compile = Command::new(&cc)
        .arg(&src)
        .arg("-I")
        .arg(&include_dir)
        .arg(&lib)
        .args(["-lpthread", "-ldl", "-lm", "-o"])
        .arg(&bin)
        .output()
        .expect("compiler runs");
    assert!(
        compile.status.success(),
        "C compilation failed:\n{}",
        String::from_utf8_lossy(&compile.stderr)
    );
    let run = Command::new(&bin).output().expect("smoke binary runs");
    assert!(
        run.status.success(),
        "smoke binary exited {:?}: {}",
        run.status.code(),
        String::from_utf8_lossy(&run.stderr)
    );
    assert!(String::from_utf8_lossy(&run.stdout).contains("c-smoke-ok"));
}
