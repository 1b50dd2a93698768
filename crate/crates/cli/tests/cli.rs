use std::path::Path;
use std::process::{Command, Output};

fn hmix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hmix")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = hmix(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

struct Csv {
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Csv {
    fn parse(text: &str) -> Self {
        let mut lines = text.lines().filter(|l| !l.starts_with('#'));
        let columns = lines.next().unwrap().split(',').map(String::from).collect();
        let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
        Self { columns, rows }
    }

    fn read(path: &Path) -> Self {
        Self::parse(&std::fs::read_to_string(path).unwrap())
    }

    fn col(&self, name: &str) -> usize {
        self.columns.iter().position(|c| c == name).unwrap_or_else(|| panic!("no column {name}"))
    }

    fn num(&self, row: usize, name: &str) -> f64 {
        self.rows[row][self.col(name)].parse().unwrap()
    }

    fn nums(&self, name: &str) -> Vec<f64> {
        (0..self.rows.len()).map(|r| self.num(r, name)).collect()
    }
}

#[test]
fn linear_spectrum_has_two_complete_branches() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("s.csv");
    ok(&["spectrum", "--A-over-omega", "0:4:0.02", "--phi", "pi/2", "--chi", "0", "--out", path.to_str().unwrap()]);
    let csv = Csv::read(&path);
    let ids = csv.nums("branch");
    assert_eq!(ids.iter().filter(|&&b| b == 0.0).count(), 201);
    assert_eq!(ids.iter().filter(|&&b| b == 1.0).count(), 201);
    assert_eq!(csv.rows.len(), 402);
    for r in 0..csv.rows.len() {
        assert!(csv.num(r, "residual") < 1e-9);
    }
}

#[test]
fn antisymmetric_drive_gives_degenerate_localized_pair() {
    let csv = Csv::parse(&ok(&["spectrum", "--paper", "--A-over-omega", "2.35:2.45:0.05", "--phi", "0"]));
    let at: Vec<usize> = (0..csv.rows.len()).filter(|&r| (csv.num(r, "A_over_omega") - 2.4).abs() < 1e-9).collect();
    let found = at.iter().any(|&i| {
        at.iter().any(|&j| {
            let (pi, pj) = (csv.num(i, "imbalance"), csv.num(j, "imbalance"));
            (csv.num(i, "quasienergy") - csv.num(j, "quasienergy")).abs() <= 1e-5
                && pi.abs() >= 0.5
                && (pi + pj).abs() <= 1e-6
        })
    });
    assert!(found);
}

#[test]
fn config_errors_exit_with_one() {
    assert_eq!(hmix(&["spectrum", "--A-over-omega", "2:1:0.1"]).status.code(), Some(1));
    assert_eq!(hmix(&["spectrum", "--phi", "0:1:0.1"]).status.code(), Some(1));
    assert_eq!(hmix(&["ramp", "--chi", "-1"]).status.code(), Some(1));
    assert_eq!(hmix(&["perturb", "--bogus"]).status.code(), Some(1));
    assert_eq!(hmix(&["perturb", "--config", "/nonexistent/run.cfg"]).status.code(), Some(1));
}

#[test]
fn unwritable_output_exits_with_two() {
    assert_eq!(hmix(&["perturb", "--out", "/nonexistent/dir/p.csv"]).status.code(), Some(2));
}

#[test]
fn solver_failure_exits_with_three() {
    let out = hmix(&["spectrum", "--tol", "1e-300", "--max-iter", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty());
}

#[test]
fn coupling_is_real_for_symmetric_phase_with_zeros_near_known_points() {
    let csv = Csv::parse(&ok(&["perturb", "--A-over-omega", "0:9:0.01", "--phi", "pi/2"]));
    assert!(csv.nums("im_fbar").iter().all(|v| v.abs() <= 1e-12));
    let xs = csv.nums("A_over_omega");
    let re = csv.nums("re_fbar");
    let zeros: Vec<f64> = (1..re.len()).filter(|&k| (re[k] > 0.0) != (re[k - 1] > 0.0)).map(|k| xs[k]).collect();
    assert_eq!(zeros.len(), 3);
    for (z, want) in zeros.iter().zip([2.4, 5.4, 8.4]) {
        assert!((z - want).abs() < 0.05, "{z}");
    }
}

#[test]
fn coupling_is_complex_for_antisymmetric_phase() {
    let csv = Csv::parse(&ok(&["perturb", "--A-over-omega", "0.5:4:0.5", "--phi", "0"]));
    assert!(csv.nums("im_fbar").iter().all(|v| v.abs() > 1e-6));
}

#[test]
fn bias_is_odd_in_phase() {
    let csv = Csv::parse(&ok(&["perturb", "--phi", "-pi:pi:pi/16"]));
    let phi = csv.nums("phi");
    let delta = csv.nums("delta");
    for (k, p) in phi.iter().enumerate() {
        if let Some(j) = phi.iter().position(|q| (q + p).abs() < 1e-12) {
            assert!((delta[k] + delta[j]).abs() < 1e-12);
        }
    }
    assert!(delta.iter().any(|d| d.abs() > 1e-3));
}

#[test]
fn validate_flag_adds_matching_quadrature_columns() {
    let csv = Csv::parse(&ok(&["perturb", "--A-over-omega", "0:6:0.5", "--phi", "0.3", "--validate"]));
    for r in 0..csv.rows.len() {
        assert!((csv.num(r, "re_fbar") - csv.num(r, "re_fbar_quad")).abs() < 1e-12);
        assert!((csv.num(r, "im_fbar") - csv.num(r, "im_fbar_quad")).abs() < 1e-12);
        assert!((csv.num(r, "delta") - csv.num(r, "delta_quad")).abs() < 1e-12);
    }
}

#[test]
fn ramp_selects_site_by_phase_sign() {
    let csv = Csv::parse(&ok(&["ramp", "--paper", "--phi", "-pi/4:pi/4:pi/2"]));
    assert_eq!(csv.rows.len(), 2);
    assert!(csv.num(0, "pop1_final") < 0.1);
    assert!(csv.num(1, "pop1_final") > 0.9);
}

#[test]
fn ramp_without_drive_stays_balanced() {
    let csv = Csv::parse(&ok(&["ramp", "--paper", "--alpha", "0", "--tf", "100", "--dt-avg", "100"]));
    let p = csv.num(0, "pop1_final");
    assert!((0.45..=0.55).contains(&p), "{p}");
}

#[test]
fn dynamics_conserves_norm() {
    let csv = Csv::parse(&ok(&["dynamics", "--paper", "--phi", "pi/4", "--t-end", "50"]));
    assert!(csv.rows.len() > 100);
    assert_eq!(csv.num(0, "pop1"), 1.0);
    assert!(csv.nums("norm_drift").iter().all(|d| d.abs() < 1e-10));
}

#[test]
fn symmetry_table() {
    let csv = Csv::parse(&ok(&["symmetry", "--phi", "-pi/2:pi/2:pi/4"]));
    let flag = |r: usize, c: &str| csv.rows[r][csv.col(c)] == "true";
    assert!(flag(0, "time_reversal_symmetric") && flag(4, "time_reversal_symmetric"));
    assert!(flag(2, "antisymmetric") && !flag(2, "time_reversal_symmetric"));
    assert!(!flag(1, "antisymmetric") && !flag(1, "time_reversal_symmetric"));
}

#[test]
fn monodromy_validation_passes() {
    let csv = Csv::parse(&ok(&["validate", "--A-over-omega", "0:4:1", "--phi", "0:pi:pi/2"]));
    assert_eq!(csv.rows.len(), 15);
    assert!(csv.nums("abs_diff").iter().all(|d| *d <= 1e-8));
}

#[test]
fn reruns_are_byte_identical_and_json_mirrors_csv() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for p in [&a, &b] {
        ok(&["spectrum", "--paper", "--A-over-omega", "2.3:2.5:0.1", "--phi", "pi/4", "--json", "--out", p.to_str().unwrap()]);
    }
    let ta = std::fs::read_to_string(&a).unwrap();
    let tb = std::fs::read_to_string(&b).unwrap();
    // headers differ only in the output path
    let body = |t: &str| t.lines().filter(|l| !l.starts_with("# out")).collect::<Vec<_>>().join("\n");
    assert_eq!(body(&ta), body(&tb));

    let json: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(a.with_extension("json")).unwrap()).unwrap();
    let csv = Csv::parse(&ta);
    assert_eq!(json["rows"].as_array().unwrap().len(), csv.rows.len());
    assert_eq!(json["config"]["chi"], "0.4");
    let q = csv.col("quasienergy");
    for (r, row) in csv.rows.iter().enumerate() {
        assert_eq!(json["rows"][r][q].as_f64().unwrap(), row[q].parse::<f64>().unwrap());
    }
}

#[test]
fn flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# sweep\nphi = pi/2\nA-over-omega = 1:2:0.5\nchi = 0.2\n").unwrap();
    let text = ok(&["perturb", "--config", cfg.to_str().unwrap(), "--chi", "0.3"]);
    assert!(text.contains("# chi = 0.3\n"));
    assert!(text.contains("# A-over-omega = 1.0:2.0:0.5\n"));
    assert_eq!(Csv::parse(&text).rows.len(), 3);
}

#[test]
fn csv_header_round_trips_as_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let first = ok(&["perturb", "--A-over-omega", "0:1:0.25", "--phi", "0.7", "--chi", "0.125"]);
    let cfg = dir.path().join("again.cfg");
    let header: String = first.lines().skip(1).take_while(|l| l.starts_with('#')).map(|l| format!("{}\n", &l[2..])).collect();
    std::fs::write(&cfg, header).unwrap();
    let second = ok(&["perturb", "--config", cfg.to_str().unwrap()]);
    assert_eq!(first, second);
}
