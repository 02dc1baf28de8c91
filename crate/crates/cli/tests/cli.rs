use std::path::Path;
use std::process::{Command, Output};

use nalgebra::{DMatrix, SymmetricEigen};
use tensortrain::io::{self, Container};
use tensortrain::tensorize::StorageReport;
use tensortrain::TtMatrix;

fn ttk(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ttk"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn value<'a>(out: &'a str, key: &str) -> &'a str {
    out.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('=')))
        .unwrap_or_else(|| panic!("no {key} in {out}"))
}

fn laplacian_file(dir: &Path) -> DMatrix<f64> {
    let m = DMatrix::from_fn(64, 64, |i, j| match i.abs_diff(j) {
        0 => 2.0,
        1 => -1.0,
        _ => 0.0,
    });
    io::write_raw(dir.join("lap.bin"), &tensortrain::tensor::row_major(&m)).unwrap();
    let o = ttk(
        dir,
        &["quantize", "--input", "lap.bin", "--row-shape", "64", "--col-shape", "64", "--tol", "1e-14", "--out", "lap.ttk"],
    );
    assert!(o.status.success(), "{o:?}");
    m
}

#[test]
fn constant_vector_compresses_to_unit_ranks() {
    let d = tempfile::tempdir().unwrap();
    io::write_raw(d.path().join("c.bin"), &[1.25; 1024]).unwrap();
    let o = ttk(d.path(), &["compress", "--input", "c.bin", "--shape", "4,4,4,4,4", "--out", "c.ttk"]);
    assert!(o.status.success());
    assert_eq!(value(&stdout(&o), "ranks"), "1,1,1,1,1,1");
    let Container::Vector(x) = io::load::<f64>(&d.path().join("c.ttk")).unwrap() else {
        panic!("expected a vector");
    };
    assert!(x.ranks().iter().all(|&r| r == 1));
}

#[test]
fn compress_and_reconstruct_round_trip() {
    let d = tempfile::tempdir().unwrap();
    let data: Vec<f64> = (0..120).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
    io::write_raw(d.path().join("t.bin"), &data).unwrap();
    let o = ttk(d.path(), &["compress", "--input", "t.bin", "--shape", "2,3,4,5", "--tol", "1e-6", "--out", "t.ttk"]);
    assert!(o.status.success());
    let o = ttk(d.path(), &["reconstruct", "t.ttk", "--out", "back.bin"]);
    assert!(o.status.success());
    let back = io::read_raw(d.path().join("back.bin")).unwrap();
    let err: f64 = back.iter().zip(&data).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
    let norm: f64 = data.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert!(err <= 1e-6 * norm);
}

#[test]
fn ramp_quantizes_to_rank_two() {
    let d = tempfile::tempdir().unwrap();
    io::write_raw(d.path().join("r.bin"), &(0..1024).map(f64::from).collect::<Vec<_>>()).unwrap();
    let o = ttk(d.path(), &["quantize", "--input", "r.bin", "--tol", "1e-12", "--out", "r.ttk"]);
    assert!(o.status.success());
    assert!(value(&stdout(&o), "max_rank").parse::<usize>().unwrap() <= 2);
}

#[test]
fn matrix_quantization_round_trips() {
    let d = tempfile::tempdir().unwrap();
    let data: Vec<f64> = (0..8 * 16).map(|i| (i as f64 * 0.37).cos()).collect();
    io::write_raw(d.path().join("m.bin"), &data).unwrap();
    let o = ttk(
        d.path(),
        &["quantize", "--input", "m.bin", "--row-shape", "8", "--col-shape", "16", "--tol", "0", "--out", "m.ttk"],
    );
    assert!(o.status.success(), "{o:?}");
    assert!(ttk(d.path(), &["reconstruct", "m.ttk", "--out", "back.bin"]).status.success());
    let back = io::read_raw(d.path().join("back.bin")).unwrap();
    let err = back.iter().zip(&data).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-12);
}

#[test]
fn bad_shape_is_rejected() {
    let d = tempfile::tempdir().unwrap();
    io::write_raw(d.path().join("t.bin"), &[0.0; 10]).unwrap();
    let o = ttk(d.path(), &["compress", "--input", "t.bin", "--shape", "3,3", "--out", "t.ttk"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("shape"));
    assert!(!d.path().join("t.ttk").exists());
}

#[test]
fn strict_quantization_rejects_other_lengths() {
    let d = tempfile::tempdir().unwrap();
    io::write_raw(d.path().join("v.bin"), &[1.0; 12]).unwrap();
    let o = ttk(d.path(), &["quantize", "--input", "v.bin", "--out", "v.ttk"]);
    assert!(!o.status.success());
    let o = ttk(d.path(), &["quantize", "--input", "v.bin", "--mixed-radix", "--out", "v.ttk"]);
    assert!(o.status.success());
}

#[test]
fn info_reports_identity_operator() {
    let d = tempfile::tempdir().unwrap();
    let id = TtMatrix::<f64>::identity(&[2, 3, 4]).unwrap();
    io::save(d.path().join("id.ttk"), &Container::Matrix(id.clone())).unwrap();
    let o = ttk(d.path(), &["info", "id.ttk"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), StorageReport::for_matrix(&id).to_key_value());
    assert_eq!(value(&stdout(&o), "ranks"), "1,1,1,1");
}

#[test]
fn corrupt_files_are_rejected() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("bad.ttk"), b"TTK2\x01\x00\x00\x00\x00\x00").unwrap();
    let o = ttk(d.path(), &["info", "bad.ttk"]);
    assert!(!o.status.success());
    assert!(!String::from_utf8_lossy(&o.stderr).is_empty());
}

#[test]
fn laplacian_eigenvalues_match_dense() {
    let d = tempfile::tempdir().unwrap();
    let m = laplacian_file(d.path());
    let o = ttk(d.path(), &["eig", "lap.ttk", "--k", "3", "--rank", "12", "--out", "eig.ttk"]);
    assert!(o.status.success(), "{o:?}");
    let out = stdout(&o);
    let values: Vec<f64> = out
        .lines()
        .skip_while(|l| *l != "index,eigenvalue")
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    let mut exact: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    exact.sort_by(f64::total_cmp);
    assert_eq!(values.len(), 3);
    for k in 0..3 {
        assert!((values[k] - exact[k]).abs() < 1e-7);
    }
    assert!(d.path().join("eig.report.txt").exists());
    assert!(d.path().join("eig.trajectory.csv").exists());
    let Container::Block(b) = io::load::<f64>(&d.path().join("eig.ttk")).unwrap() else {
        panic!("expected a block train");
    };
    assert_eq!(b.block_count(), 3);
}

#[test]
fn fixed_seed_reruns_are_identical() {
    let d = tempfile::tempdir().unwrap();
    laplacian_file(d.path());
    let run = |name: &str| {
        let out = format!("{name}.ttk");
        let o = ttk(d.path(), &["eig", "lap.ttk", "--k", "2", "--seed", "11", "--out", &out]);
        assert!(o.status.success());
        let files = ["ttk", "report.txt", "trajectory.csv"].map(|s| std::fs::read(d.path().join(format!("{name}.{s}"))).unwrap());
        (o.stdout, files)
    };
    assert_eq!(run("a"), run("b"));
}

#[test]
fn solve_requires_a_right_hand_side() {
    let d = tempfile::tempdir().unwrap();
    laplacian_file(d.path());
    let o = ttk(d.path(), &["solve", "lap.ttk", "--out", "x.ttk"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--rhs"));
}

#[test]
fn non_convergence_has_its_own_exit_status() {
    let d = tempfile::tempdir().unwrap();
    laplacian_file(d.path());
    let args = ["eig", "lap.ttk", "--rank", "2", "--max-sweeps", "1", "--tol", "1e-14", "--out", "e.ttk"];
    assert_eq!(ttk(d.path(), &args).status.code(), Some(3));
    let mut relaxed = args.to_vec();
    relaxed.push("--allow-nonconverged");
    assert!(ttk(d.path(), &relaxed).status.success());
}
