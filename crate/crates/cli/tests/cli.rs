//! End-to-end checks of the command line driver: CSV shape, the documented
//! example behaviors, and error-path exit codes.

use std::path::PathBuf;
use std::process::Command;

use dskrylov::la::expm;
use dskrylov::problems::{
    augmented_exp_operator, grid_eval, laplacian_2d_neumann, GridFunction, GridSpec,
};
use dskrylov::solvers::{dsfom, SketchStrategy, SolverConfig};

const SWEEP_HEADER: &str = "m,s,abs_error_or_residual,rel_to_reference,sigma_min_sv,\
kappa_v,kappa_whitened,bound_low,bound_high,t_basis,t_select,t_solve,unreliable,error";
const DISTORTION_HEADER: &str =
    "m,strategy,s,sigma_min_sv,sigma_max_sv,kappa_v,kappa_whitened,lower,upper,error";

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_dskrylov"))
}

fn tmp_path(tag: &str) -> PathBuf {
    std::env::temp_dir().join(format!("dskrylov-cli-{}-{tag}.csv", std::process::id()))
}

struct Csv {
    header: String,
    rows: Vec<Vec<String>>,
}

fn run_to_csv(args: &[&str], tag: &str) -> (std::process::ExitStatus, Csv) {
    let out = tmp_path(tag);
    let status = bin().args(args).arg("--out").arg(&out).status().expect("spawn");
    let text = std::fs::read_to_string(&out).expect("output file");
    let _ = std::fs::remove_file(&out);
    let mut lines = text.lines();
    let header = lines.next().expect("header").to_string();
    let rows = lines.map(|l| l.split(',').map(str::to_string).collect()).collect();
    (status, Csv { header, rows })
}

fn field(row: &[String], idx: usize) -> f64 {
    row[idx].parse().unwrap_or_else(|_| panic!("field {idx} not numeric: {row:?}"))
}

/// The documented d = 8 example: two rows, decreasing error, and the
/// abs_error column agrees with an independent dense-exponential oracle.
#[test]
fn sweep_example_matches_dense_oracle() {
    let (status, csv) = run_to_csv(
        &[
            "sweep", "--problem", "laplacian2d", "--solver", "dsfom", "--strategy", "deim",
            "--d", "8", "--m", "4,8", "--k", "2",
        ],
        "sweep-d8",
    );
    assert!(status.success());
    assert_eq!(csv.header, SWEEP_HEADER);
    assert_eq!(csv.rows.len(), 2);
    let e4 = field(&csv.rows[0], 2);
    let e8 = field(&csv.rows[1], 2);
    assert!(e8 < e4, "error should drop from m=4 ({e4:.3e}) to m=8 ({e8:.3e})");

    // Rebuild the problem and compare against exp(A) b computed densely.
    let grid = GridSpec::new(8, -1.0f64, 1.0).unwrap();
    let u0 = grid_eval(&grid, GridFunction::GaussianBump);
    let g: Vec<f64> = u0.iter().map(|&x| 0.25 * x * (1.0 - x)).collect();
    let mut l = laplacian_2d_neumann(&grid);
    l.scale(1.0 / 40.0);
    let a = augmented_exp_operator(&l, &g).unwrap();
    let mut b = u0;
    b.push(1.0);
    let truth = expm(&a.to_dense()).unwrap().matvec(&b);

    for (row, m) in csv.rows.iter().zip([4usize, 8]) {
        let mut cfg = SolverConfig::new(m, SketchStrategy::Deim);
        cfg.k = 2;
        let rep = dsfom(&a, &b, &cfg, |h| expm(h)).unwrap();
        let err: f64 = rep
            .vector()
            .unwrap()
            .iter()
            .zip(&truth)
            .map(|(x, t)| (x - t) * (x - t))
            .sum::<f64>()
            .sqrt();
        let csv_err = field(row, 2);
        // The CLI measures against a spectral oracle for this problem; the
        // two oracles agree to roundoff, far inside this tolerance.
        assert!(
            (csv_err - err).abs() <= 1e-11 + 1e-9 * err,
            "m = {m}: csv {csv_err:.6e} vs dense oracle {err:.6e}"
        );
        assert!(row.last().unwrap().is_empty(), "unexpected error annotation");
    }
}

/// Identity sketching is a no-op after whitening, so the relative-error
/// column sits at 1.
#[test]
fn sweep_identity_strategy_tracks_reference() {
    let (status, csv) = run_to_csv(
        &[
            "sweep", "--problem", "laplacian2d", "--solver", "dsfom", "--strategy",
            "identity", "--d", "12", "--m", "6,12",
        ],
        "sweep-identity",
    );
    assert!(status.success());
    assert_eq!(csv.rows.len(), 2);
    for row in &csv.rows {
        let rel = field(row, 3);
        assert!((rel - 1.0).abs() <= 1e-3, "rel_to_reference = {rel} should be ~1");
    }
}

/// DEIM pins s = m; an explicit multiplier that disagrees is rejected and
/// the failure lands in the row annotation and the exit code.
#[test]
fn sweep_deim_with_mismatched_s_fails() {
    let (status, csv) = run_to_csv(
        &[
            "sweep", "--problem", "laplacian2d", "--solver", "dsfom", "--strategy", "deim",
            "--d", "8", "--m", "4", "--k", "2", "--s", "2x",
        ],
        "sweep-bad-s",
    );
    assert!(!status.success());
    assert_eq!(csv.rows.len(), 1);
    assert!(!csv.rows[0].last().unwrap().is_empty(), "error column should be set");
}

/// Timing columns are zeroed by default so reruns are byte-identical; the
/// opt-in flag fills them.
#[test]
fn sweep_timings_are_opt_in() {
    let args = [
        "sweep", "--problem", "laplacian2d", "--solver", "dsfom", "--strategy", "gpode",
        "--d", "8", "--m", "8", "--k", "2",
    ];
    let (status, csv) = run_to_csv(&args, "sweep-notimings");
    assert!(status.success());
    for idx in 9..=11 {
        assert_eq!(field(&csv.rows[0], idx), 0.0, "timing column {idx} should be zero");
    }
    let mut with = args.to_vec();
    with.push("--timings");
    let (status, csv) = run_to_csv(&with, "sweep-timings");
    assert!(status.success());
    assert!((9..=11).any(|idx| field(&csv.rows[0], idx) > 0.0), "no timing recorded");
}

/// Identity sketching leaves the whitened basis orthonormal.
#[test]
fn distortion_identity_is_perfectly_conditioned() {
    let (status, csv) = run_to_csv(
        &[
            "distortion", "--problem", "laplacian2d", "--d", "12", "--m", "6,12",
            "--strategy", "identity",
        ],
        "dist-identity",
    );
    assert!(status.success());
    assert_eq!(csv.header, DISTORTION_HEADER);
    assert_eq!(csv.rows.len(), 2);
    for row in &csv.rows {
        let kw = field(row, 6);
        assert!((kw - 1.0).abs() <= 1e-6, "kappa_whitened = {kw} should be ~1");
    }
}

/// The documented d = 16 contrast: plain pivoted-QR selection conditions
/// the whitened basis markedly worse than its one-extra-row refinement.
#[test]
fn distortion_qdeim_conditions_worse_than_gpode() {
    let (status, csv) = run_to_csv(
        &[
            "distortion", "--problem", "laplacian2d", "--d", "16", "--m", "10,20,30,40",
            "--k", "2", "--strategy", "qdeim,gpode",
        ],
        "dist-qg",
    );
    assert!(status.success());
    assert_eq!(csv.rows.len(), 8);
    let mut worst_ratio: f64 = 0.0;
    for pair in csv.rows.chunks(2) {
        assert_eq!(pair[0][1], "qdeim");
        assert_eq!(pair[1][1], "gpode");
        worst_ratio = worst_ratio.max(field(&pair[0], 6) / field(&pair[1], 6));
    }
    assert!(worst_ratio > 5.0, "qdeim/gpode kappa ratio only reached {worst_ratio:.2}");
}

/// Oversampling on top of the interpolatory start can only raise the
/// smallest sketched singular value.
#[test]
fn distortion_mpe_sigma_min_dominates_deim() {
    let (status, csv) = run_to_csv(
        &[
            "distortion", "--problem", "laplacian2d", "--d", "16", "--m", "10,20,30",
            "--k", "2", "--strategy", "deim,mpe",
        ],
        "dist-dm",
    );
    assert!(status.success());
    assert_eq!(csv.rows.len(), 6);
    for pair in csv.rows.chunks(2) {
        assert_eq!(pair[0][1], "deim");
        assert_eq!(pair[1][1], "mpe");
        let (d, m) = (field(&pair[0], 3), field(&pair[1], 3));
        assert!(m >= d, "sigma_min_sv mpe {m:.6e} < deim {d:.6e} at m = {}", pair[0][0]);
    }
}

/// Edge-list input: comment lines are ignored, and the run succeeds on a
/// graph whose trimmed in-Laplacian keeps every node.
#[test]
fn graph_edge_list_input_accepted() {
    let path = std::env::temp_dir().join(format!("dskrylov-cli-{}.edges", std::process::id()));
    let mut text = String::from("# directed 10-cycle with chords\n\n");
    for i in 0..10 {
        text.push_str(&format!("{} {}\n", i, (i + 1) % 10));
        text.push_str(&format!("{} {}\n", i, (i + 3) % 10));
    }
    std::fs::write(&path, text).unwrap();
    let (status, csv) = run_to_csv(
        &[
            "sweep", "--problem", "graph", "--graph-path", path.to_str().unwrap(),
            "--solver", "dsrr", "--strategy", "gpode", "--m", "3", "--seed", "5",
        ],
        "graph-ok",
    );
    let _ = std::fs::remove_file(&path);
    assert!(status.success());
    assert_eq!(csv.rows.len(), 1);
    assert!(csv.rows[0].last().unwrap().is_empty());
}

/// A malformed edge list aborts the run with a parse diagnostic naming the
/// offending line.
#[test]
fn graph_edge_list_malformed_fails() {
    let path =
        std::env::temp_dir().join(format!("dskrylov-cli-{}-bad.edges", std::process::id()));
    std::fs::write(&path, "0 1\n1 two\n").unwrap();
    let out = tmp_path("graph-bad");
    let output = bin()
        .args([
            "sweep", "--problem", "graph", "--graph-path", path.to_str().unwrap(),
            "--solver", "dsrr", "--strategy", "gpode", "--m", "3",
        ])
        .arg("--out")
        .arg(&out)
        .output()
        .expect("spawn");
    let _ = std::fs::remove_file(&path);
    let _ = std::fs::remove_file(&out);
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("line 2"), "stderr should name the bad line: {stderr}");
}

/// m lists must be strictly increasing; a bad list is rejected up front.
#[test]
fn non_increasing_m_list_rejected() {
    let out = tmp_path("bad-mlist");
    let output = bin()
        .args([
            "sweep", "--problem", "laplacian2d", "--solver", "dsfom", "--strategy", "deim",
            "--d", "8", "--m", "8,8",
        ])
        .arg("--out")
        .arg(&out)
        .output()
        .expect("spawn");
    let _ = std::fs::remove_file(&out);
    assert!(!output.status.success());
    let stderr = String::from_utf8_lossy(&output.stderr);
    assert!(stderr.contains("increasing"), "stderr: {stderr}");
}
