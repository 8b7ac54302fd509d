use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use growcut::io;
use growcut_core::metrics::dice;
use growcut_core::phantom::{PhantomSpec, Shape};
use growcut_core::{BinaryMask, Dims, Spacing, Voxel};
use serde_json::Value;

fn growcut(args: &[&dyn AsRef<std::ffi::OsStr>]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_growcut"))
        .args(args.iter().map(|a| a.as_ref()))
        .output()
        .expect("binary runs")
}

fn ok_json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

struct Phantom {
    volume: PathBuf,
    truth: PathBuf,
    seeds: PathBuf,
}

fn make_phantom(dir: &Path, name: &str, spec: &PhantomSpec) -> Phantom {
    let spec_path = dir.join(format!("{name}.json"));
    std::fs::write(&spec_path, io::phantom_spec_to_json(spec)).unwrap();
    let p = Phantom {
        volume: dir.join(format!("{name}.nrrd")),
        truth: dir.join(format!("{name}_truth.nrrd")),
        seeds: dir.join(format!("{name}_seeds.json")),
    };
    ok_json(&growcut(&[
        &"phantom",
        &spec_path,
        &"--volume",
        &p.volume,
        &"--truth",
        &p.truth,
        &"--seeds",
        &p.seeds,
    ]));
    p
}

fn write_mask(dir: &Path, name: &str, mask: &BinaryMask) -> PathBuf {
    let p = dir.join(name);
    io::write_mask(&p, mask, Spacing::UNIT).unwrap();
    p
}

#[test]
fn segment_phantom_end_to_end() {
    let dir = tempfile::tempdir().unwrap();
    let p = make_phantom(dir.path(), "box", &PhantomSpec::desk_box(5.0, 1));
    let mut files = Vec::new();
    for threads in ["1", "8"] {
        let out = dir.path().join(format!("mask_{threads}.nrrd"));
        let job = ok_json(&growcut(&[
            &"segment",
            &p.volume,
            &p.seeds,
            &"-o",
            &out,
            &"--threads",
            &threads,
        ]));
        assert_eq!(job["converged"], true);
        assert!(job["iterations"].as_u64().unwrap() >= 1);
        assert!(job["segmentation_seconds"].as_f64().unwrap() >= 0.0);
        assert_eq!(job["warning"], Value::Null);
        files.push(std::fs::read(&out).unwrap());
        let (mask, _) = io::read_mask(&out).unwrap();
        let (truth, _) = io::read_mask(&p.truth).unwrap();
        assert!(dice(&mask, &truth).unwrap() >= 0.95);
    }
    assert_eq!(files[0], files[1]);

    let report = ok_json(&growcut(&[&"evaluate", &dir.path().join("mask_1.nrrd"), &p.truth]));
    assert!(report["dsc"].as_f64().unwrap() >= 0.95);
}

#[test]
fn non_convergence_warns_but_succeeds() {
    let dir = tempfile::tempdir().unwrap();
    let p = make_phantom(dir.path(), "box", &PhantomSpec::desk_box(0.0, 1));
    let out_path = dir.path().join("m.nrrd");
    let out = growcut(&[&"segment", &p.volume, &p.seeds, &"-o", &out_path, &"--max-iters", &"1"]);
    let job = ok_json(&out);
    assert_eq!(job["converged"], false);
    assert_eq!(job["iterations"], 1);
    assert!(job["warning"].as_str().unwrap().contains("did not converge"));
    assert!(stderr(&out).contains("warning"));
}

#[test]
fn segment_flags_do_not_change_the_mask() {
    let dir = tempfile::tempdir().unwrap();
    let p = make_phantom(dir.path(), "box", &PhantomSpec::desk_box(10.0, 3));
    let a = dir.path().join("a.nrrd");
    let b = dir.path().join("b.nrrd");
    ok_json(&growcut(&[&"segment", &p.volume, &p.seeds, &"-o", &a, &"--distance-cache", &"on"]));
    ok_json(&growcut(&[&"segment", &p.volume, &p.seeds, &"-o", &b, &"--distance-cache", &"off", &"--threads", &"3"]));
    assert_eq!(std::fs::read(a).unwrap(), std::fs::read(b).unwrap());
}

#[test]
fn missing_background_seeds_exit_with_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let p = make_phantom(dir.path(), "box", &PhantomSpec::desk_box(0.0, 1));
    let seeds = dir.path().join("fg_only.json");
    std::fs::write(&seeds, r#"{"seeds": [{"voxel": [32, 32, 32], "label": "foreground"}]}"#).unwrap();
    let out = growcut(&[&"segment", &p.volume, &seeds, &"-o", &dir.path().join("m.nrrd")]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("background"), "{}", stderr(&out));

    let seeds = dir.path().join("oob.json");
    std::fs::write(
        &seeds,
        r#"{"seeds": [{"voxel": [99, 0, 0], "label": "fg"}, {"voxel": [0, 0, 0], "label": "bg"}]}"#,
    )
    .unwrap();
    let out = growcut(&[&"segment", &p.volume, &seeds, &"-o", &dir.path().join("m.nrrd")]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exit_codes_separate_input_and_internal_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = growcut(&[&"segment", &dir.path().join("none.nrrd"), &"s.json", &"-o", &"m.nrrd"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(growcut(&[&"segment", &"--bogus"]).status.code(), Some(2));
    assert_eq!(growcut(&[&"--help"]).status.code(), Some(0));

    let p = make_phantom(dir.path(), "box", &PhantomSpec::desk_box(0.0, 1));
    let unwritable = dir.path().join("no_such_dir").join("m.nrrd");
    let out = growcut(&[&"segment", &p.volume, &p.seeds, &"-o", &unwritable]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn morph_commands() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let dims = Dims::new(12, 12, 12);
    let two = BinaryMask::from_fn(dims, |v| {
        (v.x < 3 && v.y < 3 && v.z < 3) || ((6..11).contains(&v.x) && (6..11).contains(&v.y) && (6..11).contains(&v.z))
    });
    let src = write_mask(d, "two.nrrd", &two);
    let out = d.join("out.nrrd");
    let res = ok_json(&growcut(&[&"morph", &src, &"-o", &out, &"--op", &"islands", &"--connectivity", &"6"]));
    assert_eq!(res["foreground_voxels"], 125);
    let (kept, _) = io::read_mask(&out).unwrap();
    assert!(kept.get(Voxel::new(8, 8, 8)) && !kept.get(Voxel::new(0, 0, 0)));

    let empty = write_mask(d, "empty.nrrd", &BinaryMask::empty(dims));
    ok_json(&growcut(&[&"morph", &empty, &"-o", &out, &"--op", &"dilate", &"--radius", &"3"]));
    assert!(io::read_mask(&out).unwrap().0.is_all_background());

    let mut single = BinaryMask::empty(dims);
    single.set(Voxel::new(5, 5, 5), true);
    let single = write_mask(d, "single.nrrd", &single);
    ok_json(&growcut(&[&"morph", &single, &"-o", &out, &"--op", &"erode"]));
    assert!(io::read_mask(&out).unwrap().0.is_all_background());

    ok_json(&growcut(&[&"morph", &single, &"-o", &out, &"--op", &"dilate", &"--connectivity", &"6"]));
    assert_eq!(io::read_mask(&out).unwrap().0.count(), 7);

    assert_eq!(
        growcut(&[&"morph", &single, &"-o", &out, &"--op", &"dilate", &"--connectivity", &"8"]).status.code(),
        Some(2)
    );
    assert_eq!(
        growcut(&[&"morph", &single, &"-o", &out, &"--op", &"erode", &"--radius", &"0"]).status.code(),
        Some(2)
    );
}

#[test]
fn evaluate_single_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let dims = Dims::new(8, 8, 8);
    let a = write_mask(d, "a.nrrd", &BinaryMask::from_fn(dims, |v| v.x < 3));
    let b = write_mask(d, "b.nrrd", &BinaryMask::from_fn(dims, |v| v.x > 5));
    let r = ok_json(&growcut(&[&"evaluate", &a, &a]));
    assert_eq!(r["dsc"], 1.0);
    assert_eq!(r["hausdorff_voxel"], 0.0);
    assert_eq!(r["volume_a_mm3"], 192.0);
    let r = ok_json(&growcut(&[&"evaluate", &a, &b, &"--spacing", &"2,1,1"]));
    assert_eq!(r["dsc"], 0.0);
    // Voxel x = 0 of A is 6 voxels from the nearest voxel of B.
    assert_eq!(r["hausdorff_voxel"], 6.0);
    assert_eq!(r["volume_b_mm3"], 256.0);
    let r = ok_json(&growcut(&[&"evaluate", &a, &b, &"--mode", &"boundary"]));
    assert_eq!(r["hausdorff_mode"], "boundary");

    let small = write_mask(d, "small.nrrd", &BinaryMask::full(Dims::new(4, 4, 4)));
    let out = growcut(&[&"evaluate", &a, &small]);
    assert_eq!(out.status.code(), Some(2));

    let report = d.join("report.json");
    let printed = ok_json(&growcut(&[&"evaluate", &a, &b, &"-o", &report]));
    let saved: Value = serde_json::from_str(&std::fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(printed, saved);
}

fn cases13() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/cases13.csv")
}

#[test]
fn evaluate_batch_over_case_table() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.csv");
    let json = dir.path().join("summary.json");
    let out = growcut(&[&"evaluate", &"--batch", &cases13(), &"--summary", &summary, &"-o", &json]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("dsc_percent: 82.99 ± 5.03"), "{text}");
    assert!(text.contains("hausdorff_voxel: 18.91 ± 7.20"), "{text}");
    assert!(text.contains("time_min: 5.77 ± 0.73"), "{text}");
    assert!(text.contains("volume_manual_cm3: 36.49 ± 7.15"), "{text}");
    assert!(text.contains("volume_tool_cm3: 44.61 ± 9.36"), "{text}");

    let csv = std::fs::read_to_string(summary).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(
        lines[0],
        "statistic,volume_manual_cm3,volume_tool_cm3,hausdorff_voxel,dsc_percent,time_min"
    );
    let row = |i: usize| -> Vec<f64> { lines[i].split(',').skip(1).map(|v| v.parse().unwrap()).collect() };
    let close = |a: &[f64], b: &[f64]| a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-9);
    assert_eq!(lines[1].split(',').next(), Some("minimum"));
    assert!(close(&row(1), &[20.8886, 27.2048, 10.7, 74.56, 5.0]), "{}", lines[1]);
    assert!(close(&row(2), &[49.3962, 59.2163, 32.3, 91.6, 7.0]), "{}", lines[2]);
    assert_eq!(lines[4].split(',').next(), Some("sample_std"));
    let doc: Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(doc["cases"], 13);
    assert_eq!(doc["summary"]["dsc_percent"]["n"], 13);
}

#[test]
fn evaluate_batch_over_mask_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let dims = Dims::new(6, 6, 6);
    write_mask(d, "a1.nrrd", &BinaryMask::from_fn(dims, |v| v.x < 3));
    write_mask(d, "r1.nrrd", &BinaryMask::from_fn(dims, |v| v.x < 2));
    write_mask(d, "a2.nrrd", &BinaryMask::from_fn(dims, |v| v.y < 4));
    write_mask(d, "r2.nrrd", &BinaryMask::from_fn(dims, |v| v.y < 4));
    let list = d.join("pairs.csv");
    std::fs::write(&list, "mask_a,mask_r,time_min\na1.nrrd,r1.nrrd,2\na2.nrrd,r2.nrrd,4\n").unwrap();
    let cases = d.join("cases.csv");
    let out = growcut(&[&"evaluate", &"--batch", &list, &"--cases", &cases]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = growcut::report::read_cases(std::fs::File::open(&cases).unwrap()).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].volume_manual_mm3, 72.0);
    assert_eq!(rows[0].volume_tool_mm3, 108.0);
    assert_eq!(rows[0].dsc_percent, 80.0);
    assert_eq!(rows[1].dsc_percent, 100.0);
    assert_eq!(rows[1].time_min, Some(4.0));

    std::fs::write(&list, "mask_a,mask_r\na1.nrrd,missing.nrrd\n").unwrap();
    assert_eq!(growcut(&[&"evaluate", &"--batch", &list]).status.code(), Some(2));
}

#[test]
fn phantom_command_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let spec = PhantomSpec::desk_box(10.0, 42);
    let a = make_phantom(d, "a", &spec);
    let b = make_phantom(d, "b", &spec);
    for (x, y) in [(&a.volume, &b.volume), (&a.truth, &b.truth), (&a.seeds, &b.seeds)] {
        assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
    }

    let clean = make_phantom(d, "clean", &PhantomSpec::desk_box(0.0, 42));
    let (vol, _) = io::read_volume(&clean.volume).unwrap();
    assert!(vol.data().iter().all(|&c| c == 50.0 || c == 150.0));

    let spec_path = d.join("a.json");
    let out = d.join("reseeded.nrrd");
    ok_json(&growcut(&[
        &"phantom",
        &spec_path,
        &"--volume",
        &out,
        &"--truth",
        &d.join("t.nrrd"),
        &"--seeds",
        &d.join("s.json"),
        &"--seed",
        &"43",
    ]));
    assert_ne!(std::fs::read(&out).unwrap(), std::fs::read(&a.volume).unwrap());
}

#[test]
fn phantom_ellipsoid_matches_membership_count() {
    let dir = tempfile::tempdir().unwrap();
    let spec = PhantomSpec {
        dims: Dims::new(32, 32, 32),
        body: Shape::Ellipsoid {
            center: [16.0, 16.0, 16.0],
            semi: [8.0, 6.0, 5.0],
        },
        ..PhantomSpec::desk_box(0.0, 0)
    };
    let p = make_phantom(dir.path(), "ell", &spec);
    let (truth, _) = io::read_mask(&p.truth).unwrap();
    let mut expected = 0;
    for z in -16i64..16 {
        for y in -16i64..16 {
            for x in -16i64..16 {
                if 225 * x * x + 400 * y * y + 576 * z * z <= 14400 {
                    expected += 1;
                }
            }
        }
    }
    assert_eq!(truth.count(), expected);

    let bad = dir.path().join("bad.json");
    std::fs::write(
        &bad,
        r#"{"dims": [8, 8, 8], "body": {"shape": "box", "center": [4, 4, 4], "semi_extents": [6, 1, 1]}, "fg_intensity": 1, "bg_intensity": 0}"#,
    )
    .unwrap();
    let out = growcut(&[&"phantom", &bad, &"--volume", &"v.nrrd", &"--truth", &"t.nrrd", &"--seeds", &"s.json"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn voxelize_command() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = d.join("m.nrrd");
    let square = d.join("square.json");
    std::fs::write(&square, r#"{"slices": [{"axis": "axial", "index": 1, "polygons": [[[2, 2], [6, 2], [6, 6], [2, 6]]]}]}"#)
        .unwrap();
    let res = ok_json(&growcut(&[&"voxelize", &square, &"--dims", &"10,10,3", &"-o", &out]));
    assert_eq!(res["foreground_voxels"], 25);
    let first = std::fs::read(&out).unwrap();

    let rotated = d.join("rotated.json");
    std::fs::write(&rotated, r#"{"slices": [{"axis": "axial", "index": 1, "polygons": [[[6, 6], [2, 6], [2, 2], [6, 2]]]}]}"#)
        .unwrap();
    ok_json(&growcut(&[&"voxelize", &rotated, &"--dims", &"10,10,3", &"-o", &out]));
    assert_eq!(std::fs::read(&out).unwrap(), first);

    let empty = d.join("empty.json");
    std::fs::write(&empty, r#"{"slices": []}"#).unwrap();
    let res = ok_json(&growcut(&[&"voxelize", &empty, &"--dims", &"4,4,4", &"-o", &out]));
    assert_eq!(res["foreground_voxels"], 0);

    let out2 = growcut(&[&"voxelize", &square, &"--dims", &"10,10,1", &"-o", &out]);
    assert_eq!(out2.status.code(), Some(2));
}
