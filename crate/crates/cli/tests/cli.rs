use std::collections::BTreeMap;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use inclab_cli::artifact;
use inclab_cli::pipeline::{kv_value, verify_digest};
use inclab_core::energy::{additive_energy, SumMultiplicityTable};
use inclab_core::hyperplanes::{DyadicHistogram, HyperplaneFamily};
use inclab_core::lattice::{build_point_set_with_bound, PointSet};

fn inclab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_inclab"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "stdout:\n{}\nstderr:\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

const FULL_STAGES: &str = "energy,family,histogram,select,k2t,dualize,invert,shear,sparsify,fit";

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("run.cfg");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn build_verb_writes_a_parsable_point_set() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let res = inclab(&["build", "--out", out.to_str().unwrap(), "--seed", "0"]);
    assert_ok(&res);

    let ps = PointSet::from_text(&read(&out, "points.txt")).unwrap();
    assert_eq!(ps.dimension(), 4);
    assert_eq!(ps.truncation(), 2);
    assert_eq!(ps.len(), 125);

    let kv = read(&out, "report.kv");
    assert_eq!(kv_value(&kv, "build.points"), Some("125"));
    verify_digest(&out, &kv, "points.txt").unwrap();
}

#[test]
fn verb_runs_exactly_its_dependency_closure() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("run");
    let res = inclab(&["select", "--out", out.to_str().unwrap()]);
    assert_ok(&res);

    let kv = read(&out, "report.kv");
    assert_eq!(kv_value(&kv, "config.stages"), Some("family,select"));
    assert!(kv_value(&kv, "select.k_prime").is_some());
    assert!(kv_value(&kv, "family.size").is_some());
    for absent in ["energy.energy", "k2t.t_max", "sparsify.accepted", "fit.slope"] {
        assert!(kv_value(&kv, absent).is_none(), "unexpected key {absent}");
    }
}

#[test]
fn energy_only_config_reports_exactly_the_energy_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "d=4\nb=1\nseed=0\nstages=energy\n");
    let out = tmp.path().join("run");
    let res = inclab(&["pipeline", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_ok(&res);

    let kv = read(&out, "report.kv");
    let oracle = additive_energy(&build_point_set_with_bound(4, 1).unwrap());
    assert_eq!(kv_value(&kv, "energy.energy"), Some(oracle.energy.to_string().as_str()));
    for absent in ["family.size", "select.k_prime", "k2t.t_max", "fit.slope"] {
        assert!(kv_value(&kv, absent).is_none(), "unexpected key {absent}");
    }
}

#[test]
fn select_before_family_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "d=4\nb=1\nstages=select,family\n");
    let out = tmp.path().join("run");
    let res = inclab(&["pipeline", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(!res.status.success());
    let stderr = String::from_utf8_lossy(&res.stderr);
    assert!(stderr.contains("select") && stderr.contains("family"), "{stderr}");
    assert!(!out.join("report.kv").exists());
}

fn run_full(dir: &Path, out_name: &str) -> std::path::PathBuf {
    let cfg = write_config(dir, &format!("d=4\nb=1\nseed=0\nstages={FULL_STAGES}\n"));
    let out = dir.join(out_name);
    let res = inclab(&["pipeline", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_ok(&res);
    out
}

#[test]
fn full_run_baseline_d4_b1() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_full(tmp.path(), "run");
    let kv = read(&out, "report.kv");

    for (key, want) in [
        ("build.points", "27"),
        ("energy.energy", "3735"),
        ("family.size", "200"),
        ("family.total_mu", "378"),
        ("select.k_prime", "2"),
        ("select.size", "34"),
        ("k2t.t_max", "4"),
        ("dualize.incidences_primal", "282"),
        ("dualize.incidences_dual", "282"),
        ("invert.incidences", "282"),
        ("shear.incidences_before", "282"),
        ("shear.incidences_after", "282"),
        ("sparsify.t", "9"),
        ("sparsify.retry_index", "0"),
        ("sparsify.accepted", "true"),
        ("fit.samples", "3"),
    ] {
        assert_eq!(kv_value(&kv, key), Some(want), "key {key}");
    }

    // Recorded digests match the files on disk.
    for line in kv.lines() {
        if let Some(rest) = line.strip_prefix("digest.") {
            let name = rest.split_once('=').unwrap().0;
            verify_digest(&out, &kv, name).unwrap();
        }
    }
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let a = run_full(tmp.path(), "a");
    let b = run_full(tmp.path(), "b");

    let list = |dir: &Path| -> BTreeMap<String, Vec<u8>> {
        fs::read_dir(dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().into_string().unwrap(), fs::read(e.path()).unwrap())
            })
            .collect()
    };
    let (files_a, files_b) = (list(&a), list(&b));
    let names: Vec<&String> = files_a.keys().collect();
    assert_eq!(names, files_b.keys().collect::<Vec<_>>());
    for (name, bytes) in &files_a {
        if name == "report.txt" {
            continue; // runtimes live here
        }
        assert_eq!(bytes, &files_b[name], "artifact {name} differs between reruns");
    }
}

#[test]
fn every_artifact_round_trips_bit_exactly() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run_full(tmp.path(), "run");

    let points = read(&out, "points.txt");
    assert_eq!(PointSet::from_text(&points).unwrap().to_text(), points);

    for name in ["family.txt", "selected.txt", "sparsified.txt"] {
        let text = read(&out, name);
        assert_eq!(HyperplaneFamily::from_text(&text).unwrap().to_text(), text, "{name}");
    }

    let sums = read(&out, "sums.txt");
    assert_eq!(SumMultiplicityTable::from_text(&sums).unwrap().to_text(), sums);

    let hist = read(&out, "histogram.txt");
    assert_eq!(DyadicHistogram::from_text(&hist).unwrap().to_text(), hist);

    for name in ["dual_points.txt", "inverted_points.txt", "sheared_points.txt"] {
        let text = read(&out, name);
        let (d, pts) = artifact::rat_points_from_text(&text).unwrap();
        assert_eq!(artifact::rat_points_to_text(d, &pts), text, "{name}");
    }

    let planes = read(&out, "dual_planes.txt");
    let (d, hs) = artifact::rat_planes_from_text(&planes).unwrap();
    assert_eq!(artifact::rat_planes_to_text(d, &hs), planes);

    let spheres = read(&out, "spheres.txt");
    let (d, ss) = artifact::spheres_from_text(&spheres).unwrap();
    assert_eq!(artifact::spheres_to_text(d, &ss), spheres);

    let surfaces = read(&out, "surfaces.txt");
    let (d, gs) = artifact::surfaces_from_text(&surfaces).unwrap();
    assert_eq!(artifact::surfaces_to_text(d, &gs, &gs[0].shear), surfaces);

    let k2t = read(&out, "k2t.txt");
    let (t_max, witness) = artifact::k2t_from_text(&k2t).unwrap();
    assert_eq!(artifact::k2t_to_text(t_max, witness), k2t);

    let cert = read(&out, "certificate.txt");
    assert_eq!(artifact::certificate_from_text(&cert).unwrap().to_text(), cert);

    let fit = read(&out, "fit.csv");
    assert_eq!(artifact::fit_csv_to_text(&artifact::fit_csv_from_text(&fit).unwrap()), fit);
}

#[test]
fn truncated_artifact_reports_its_line() {
    let text = "4 3\n1/2 0 0 1\n";
    let err = artifact::rat_points_from_text(text).unwrap_err().to_string();
    assert!(err.contains("promised 3"), "{err}");

    let err = PointSet::from_text("4 1 1\n0 0 0\n").unwrap_err().to_string();
    assert!(err.contains("line 2"), "{err}");
}
