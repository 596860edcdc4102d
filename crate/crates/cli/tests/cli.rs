mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use common::{fixtures, jsonl, nbaudit, run};
use serde_json::Value;

fn corpus50() -> PathBuf {
    fixtures().join("corpus50")
}

fn audit(inputs: &[&Path], out: &Path, extra: &[&str]) -> std::process::Output {
    nbaudit().arg("audit").args(inputs).args(extra).arg("--out").arg(out).output().unwrap()
}

fn report_json(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

#[test]
fn fixture_corpus_reports_invalid_notebooks_with_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let o = audit(&[&corpus50()], tmp.path(), &["--themes", "light", "--jobs", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let r = report_json(tmp.path());
    assert_eq!(r["n_notebooks"], 50);
    assert_eq!(r["n_valid"], 47);
    let records = jsonl(&tmp.path().join("notebooks.jsonl"));
    let invalid: Vec<&str> = records
        .iter()
        .filter(|r| r["status"] == "invalid")
        .map(|r| r["path"].as_str().unwrap())
        .collect();
    assert_eq!(invalid.len(), 3);
    assert!(invalid.iter().all(|p| p.contains("malformed_")));
    // The three broken files do not suppress the other records.
    let ledger = nbaudit_core::synth::read_ledger(&corpus50()).unwrap();
    let by_name: BTreeMap<String, &Value> = records
        .iter()
        .map(|r| (Path::new(r["path"].as_str().unwrap()).file_name().unwrap().to_string_lossy().into_owned(), r))
        .collect();
    for t in &ledger {
        let m = &by_name[&t.file]["metrics"];
        assert_eq!(m["n_images"], t.n_images, "{}", t.file);
        assert_eq!(m["n_tables"], t.n_tables, "{}", t.file);
    }
}

#[test]
fn empty_directory_gives_a_zero_report() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("empty");
    std::fs::create_dir(&input).unwrap();
    let out = tmp.path().join("out");
    let o = audit(&[&input], &out, &[]);
    assert_eq!(o.status.code(), Some(0));
    let r = report_json(&out);
    assert_eq!(r["n_notebooks"], 0);
    assert_eq!(r["n_valid"], 0);
    assert!(out.join("report.html").exists());
}

#[test]
fn seeded_sampling_repeats() {
    let tmp = tempfile::tempdir().unwrap();
    let paths = |out: &str, seed: &str| -> Vec<String> {
        let out = tmp.path().join(out);
        audit(&[&corpus50()], &out, &["--themes", "light", "--sample", "10", "--seed", seed]);
        jsonl(&out.join("notebooks.jsonl")).iter().map(|r| r["path"].as_str().unwrap().to_string()).collect()
    };
    let a = paths("a", "7");
    assert_eq!(a.len(), 10);
    assert_eq!(a, paths("b", "7"));
    assert_ne!(a, paths("c", "8"));
}

#[test]
fn config_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let nb = corpus50().join("synth_000.ipynb");
    for extra in [
        &["--jobs", "0"][..],
        &["--themes", "no-such-theme"],
        &["--rules", "AXE-E99"],
        &["--sample", "5"],
        &["--formats", "pdf"],
        &["--size-thresholds", "10,5"],
    ] {
        let o = audit(&[&nb], &tmp.path().join("out"), extra);
        assert_eq!(o.status.code(), Some(1), "{extra:?}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!o.stderr.is_empty());
    }
    let o = audit(&[&tmp.path().join("missing")], &tmp.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn stdout_is_reserved_for_data() {
    let tmp = tempfile::tempdir().unwrap();
    let nb = corpus50().join("synth_001.ipynb");
    let quiet = audit(&[&nb], &tmp.path().join("q"), &["--themes", "light"]);
    assert!(quiet.stdout.is_empty());
    assert!(!quiet.stderr.is_empty());
    let loud = audit(&[&nb], &tmp.path().join("l"), &["--themes", "light", "--stdout"]);
    let printed: Value = serde_json::from_slice(&loud.stdout).unwrap();
    assert_eq!(printed, report_json(&tmp.path().join("l")));
}

#[test]
fn scan_of_exported_html_matches_audit_findings() {
    let tmp = tempfile::tempdir().unwrap();
    let nb = corpus50().join("synth_004.ipynb");
    let out = tmp.path().join("audit");
    audit(&[&nb], &out, &["--themes", "dark"]);
    let from_audit = jsonl(&out.join("findings.jsonl"));

    let exported = tmp.path().join("export");
    let o = nbaudit().args(["export", "--themes", "dark", "--out"]).arg(&exported).arg(&nb).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let html = exported.join("dark").join("synth_004.html");
    let o = nbaudit().args(["scan", "--theme", "dark", "--stdout", "--out"]).arg(tmp.path().join("scan")).arg(&html).output().unwrap();
    let from_scan: Vec<Value> = String::from_utf8(o.stdout).unwrap().lines().map(|l| serde_json::from_str(l).unwrap()).collect();

    let strip = |v: &[Value]| -> Vec<Value> {
        v.iter()
            .map(|f| {
                let mut f = f.clone();
                f.as_object_mut().unwrap().remove("document");
                f
            })
            .collect()
    };
    assert!(!from_audit.is_empty());
    assert_eq!(strip(&from_audit), strip(&from_scan));
}

#[test]
fn export_is_byte_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let nb = corpus50().join("synth_002.ipynb");
    let export = |dir: &str| {
        let out = tmp.path().join(dir);
        let o = nbaudit().args(["export", "--themes", "light,solarized", "--out"]).arg(&out).arg(&nb).output().unwrap();
        assert_eq!(o.status.code(), Some(0));
        ["light", "solarized"].map(|t| std::fs::read(out.join(t).join("synth_002.html")).unwrap())
    };
    assert_eq!(export("a"), export("b"));
}

#[test]
fn alt_embed_then_show() {
    let tmp = tempfile::tempdir().unwrap();
    let plain = tmp.path().join("plain.png");
    let mut bytes = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut bytes, 2, 2);
        enc.set_color(png::ColorType::Rgb);
        let mut w = enc.write_header().unwrap();
        w.write_image_data(&[7u8; 12]).unwrap();
    }
    std::fs::write(&plain, &bytes).unwrap();
    let tagged = tmp.path().join("tagged.png");
    let text = "Bar chart of sales in €, 2019 to 2023";
    let o = nbaudit().args(["alt", "embed"]).arg(&plain).args(["--text", text, "-o"]).arg(&tagged).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    let o = run(["alt".as_ref(), "show".as_ref(), tagged.as_os_str()]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(String::from_utf8(o.stdout).unwrap().trim_end(), text);
    let o = run(["alt".as_ref(), "show".as_ref(), plain.as_os_str()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_command_reproduces_the_audit_report() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("audit");
    audit(&[&corpus50()], &out, &["--themes", "light,dark"]);
    let again = tmp.path().join("again");
    let o = nbaudit().arg("report").arg(out.join("notebooks.jsonl")).arg("--out").arg(&again).output().unwrap();
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(std::fs::read(out.join("report.json")).unwrap(), std::fs::read(again.join("report.json")).unwrap());
}

#[test]
fn dumped_images_are_content_addressed() {
    let tmp = tempfile::tempdir().unwrap();
    audit(&[&corpus50()], tmp.path(), &["--themes", "light", "--dump-images", "--formats", "json"]);
    let dir = tmp.path().join("images");
    let files: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    assert!(!files.is_empty());
    for f in files {
        let bytes = std::fs::read(&f).unwrap();
        let stem = f.file_stem().unwrap().to_string_lossy().into_owned();
        assert_eq!(stem, nbaudit_core::htmlexport::sha1_hex(&bytes));
        assert_eq!(f.extension().unwrap(), "png");
    }
}

#[test]
fn analyze_writes_records_and_ranks() {
    let tmp = tempfile::tempdir().unwrap();
    let o = nbaudit().arg("analyze").arg(corpus50()).arg("--out").arg(tmp.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let lines = jsonl(&tmp.path().join("analysis.jsonl"));
    assert_eq!(lines.len(), 47);
    let ranks: Value = serde_json::from_str(&std::fs::read_to_string(tmp.path().join("ranks.json")).unwrap()).unwrap();
    let modules: Vec<&str> = ranks["modules"].as_array().unwrap().iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert!(modules.contains(&"numpy") || modules.contains(&"matplotlib"));
}
