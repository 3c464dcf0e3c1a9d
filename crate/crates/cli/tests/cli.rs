use std::path::{Path, PathBuf};
use std::process::Command;

use maser_cli::config::{Axis, Mode};
use maser_cli::{parse_config, run_grid, run_sweep, Table};
use tempfile::TempDir;

const FIG4: &str = r#"{"scheme": {"kind": "resonant", "gamma": 2.0},
    "omega20": 2.5, "lambda": 0.5, "beta_c": 5.0, "beta_h": 1.0}"#;

struct Run {
    code: i32,
    stderr: String,
    csv: Vec<Vec<String>>,
    dir: TempDir,
}

impl Run {
    fn column(&self, name: &str) -> Vec<String> {
        let k = self.csv[0].iter().position(|h| h == name).expect(name);
        self.csv[1..].iter().map(|r| r[k].clone()).collect()
    }

    fn numbers(&self, name: &str) -> Vec<f64> {
        self.column(name)
            .iter()
            .map(|s| s.parse().unwrap())
            .collect()
    }

    fn out(&self) -> PathBuf {
        self.dir.path().join("out.csv")
    }
}

fn maser(mode: &str, config: &str, extra: &[&str]) -> Run {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, config).unwrap();
    let out = dir.path().join("out.csv");
    let res = Command::new(env!("CARGO_BIN_EXE_maser"))
        .arg(mode)
        .arg("--config")
        .arg(&cfg)
        .arg("--out")
        .arg(&out)
        .args(extra)
        .output()
        .unwrap();
    let csv = read_csv(&out);
    Run {
        code: res.status.code().unwrap(),
        stderr: String::from_utf8_lossy(&res.stderr).into_owned(),
        csv,
        dir,
    }
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    let Ok(mut r) = csv::ReaderBuilder::new().has_headers(false).from_path(path) else {
        return Vec::new();
    };
    r.records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect()
}

fn with(base: &str, extra: &str) -> String {
    base.replacen('{', &format!("{{ {extra},"), 1)
}

#[test]
fn resonant_point_runs_at_the_ssd_efficiency() {
    let r = maser("stationary", FIG4, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.csv.len(), 2);
    let eta = r.numbers("eta")[0];
    let ssd = 1.0 - r.numbers("eps10_over_omega10")[0] / r.numbers("eps20_over_omega10")[0];
    assert!((eta - ssd).abs() < 1e-12);
    assert_eq!(r.column("domain_flag")[0], "in");
    assert_eq!(
        r.numbers("omega_over_omega10"),
        r.numbers("omega_star_over_omega10")
    );
}

#[test]
fn undriven_point_has_zero_power() {
    let r = maser("stationary", &FIG4.replace("0.5", "0.0"), &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.numbers("P_over_omega10sq")[0], 0.0);
    assert_eq!(r.column("domain_flag")[0], "out: P<=0");
    assert_eq!(r.column("eta")[0], "NA");
    assert_eq!(r.column("U")[0], "NA");
}

#[test]
fn equal_temperatures_produce_no_entropy_without_drive() {
    let cfg = FIG4.replace("0.5", "0.0").replace("5.0", "1.0");
    let r = maser("stationary", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert_eq!(r.numbers("sigma_dot_over_omega10")[0], 0.0);
    assert_eq!(r.numbers("P0_over_omega10sq")[0], 0.0);
    assert!(r.column("domain_flag")[0].starts_with("out"));

    let driven = maser("stationary", &FIG4.replace("5.0", "1.0"), &[]);
    assert!(driven.column("domain_flag")[0].starts_with("out"));
}

#[test]
fn sweep_is_independent_of_worker_count() {
    let a = maser("sweep", FIG4, &["--workers", "1"]);
    let b = maser("sweep", FIG4, &["--workers", "8"]);
    assert_eq!(a.code, 0, "{}", a.stderr);
    assert_eq!(a.csv.len(), 101 * 101 + 1);
    let bytes = |r: &Run| std::fs::read(r.out()).unwrap();
    assert_eq!(bytes(&a), bytes(&b));
}

#[test]
fn sidecar_echoes_the_resolved_config() {
    let r = maser("sweep", FIG4, &["--workers", "2"]);
    let meta: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(r.dir.path().join("out.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["mode"], "sweep");
    assert_eq!(meta["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(meta["rows"], 10201);
    assert_eq!(meta["config"]["grid"][0]["axis"], "omega20");
    assert_eq!(meta["config"]["grid"][1]["count"], 101);
    assert_eq!(meta["config"]["frequency"], "optimal");
    assert_eq!(meta["columns"].as_array().unwrap().len(), r.csv[0].len());
}

#[test]
fn headers_carry_units_and_rows_are_rectangular() {
    let r = maser("sweep", FIG4, &[]);
    for h in [
        "P_over_omega10sq",
        "sigma_dot_over_omega10",
        "varP_over_omega10cu",
        "eta_nd",
        "U",
    ] {
        assert!(r.csv[0].iter().any(|c| c == h), "{h}");
    }
    assert!(r.csv.iter().all(|row| row.len() == r.csv[0].len()));
    let flags = r.column("domain_flag");
    let etas = r.column("eta");
    for (f, e) in flags.iter().zip(&etas) {
        assert_eq!(f == "in", e != "NA", "{f} {e}");
    }
}

/// Sweep cells as a grid, `None` outside the engine domain.
fn grid(table: &Table, name: &str, n: usize) -> Vec<Vec<Option<f64>>> {
    let k = table.column(name).unwrap();
    let flag = table.column("domain_flag").unwrap();
    table
        .rows
        .chunks(n)
        .map(|row| {
            row.iter()
                .map(|cells| {
                    (cells[flag].render() == "in").then(|| cells[k].render().parse().unwrap())
                })
                .collect()
        })
        .collect()
}

/// Position of the extreme in-domain value and whether it touches a point
/// outside the domain.
fn extreme_touches_boundary(g: &[Vec<Option<f64>>], largest: bool) -> bool {
    let mut best = (0, 0, if largest { f64::MIN } else { f64::MAX });
    for (i, row) in g.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            if let Some(v) = *v {
                if (largest && v > best.2) || (!largest && v < best.2) {
                    best = (i, j, v);
                }
            }
        }
    }
    let (i, j, _) = best;
    let neighbours = [
        (i.wrapping_sub(1), j),
        (i + 1, j),
        (i, j.wrapping_sub(1)),
        (i, j + 1),
    ];
    neighbours
        .iter()
        .any(|&(a, b)| g.get(a).and_then(|r| r.get(b)).is_some_and(|v| v.is_none()))
}

fn fig_sweep(scheme: &str) -> Table {
    let cfg = parse_config(&format!(
        r#"{{"scheme": {scheme}, "beta_c": 5.0, "beta_h": 1.0}}"#
    ))
    .unwrap()
    .resolve(Mode::Sweep)
    .unwrap();
    run_sweep(&cfg, 4).unwrap()
}

#[test]
fn resonant_efficiency_peaks_where_the_power_vanishes() {
    let t = fig_sweep(r#"{"kind": "resonant", "gamma": 2.0}"#);
    assert!(extreme_touches_boundary(&grid(&t, "eta", 101), true));
}

#[test]
fn uniform_efficiency_is_lowest_at_the_boundary() {
    let t = fig_sweep(r#"{"kind": "uniform", "gamma": 2.0}"#);
    assert!(extreme_touches_boundary(&grid(&t, "eta", 101), false));
}

#[test]
fn scatter_statistics_are_reproducible() {
    let cfg = parse_config(&with(FIG4, r#""frequency": "optimal""#))
        .unwrap()
        .resolve(Mode::Sweep)
        .unwrap();
    let stats = |t: &Table| {
        let g = grid(t, "P_over_omega10sq", 101);
        let e = grid(t, "eta", 101);
        let ps: Vec<f64> = g.iter().flatten().flatten().copied().collect();
        let es: Vec<f64> = e.iter().flatten().flatten().copied().collect();
        (
            ps.len(),
            ps.iter().copied().fold(f64::MIN, f64::max),
            es.iter().copied().fold(f64::MIN, f64::max),
            ps.iter().sum::<f64>(),
        )
    };
    let a = stats(&run_sweep(&cfg, 1).unwrap());
    let b = stats(&run_sweep(&cfg, 3).unwrap());
    assert_eq!(a, b);
    assert!(a.0 > 5000 && a.2 <= 0.8);
}

#[test]
fn resonant_flows_stay_below_unit_inverse_efficiency() {
    let cfg = r#"{"scheme": {"kind": "resonant", "gamma": 2.0}, "omega20": 2.6,
        "beta_c": 5.0, "beta_h": 1.0,
        "grid": [{"axis": "lambda", "min": 0.02, "max": 0.8, "count": 40}]}"#;
    let r = maser("flows", cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let inv: Vec<f64> = r
        .column("inv_eta_nd")
        .iter()
        .filter(|s| *s != "NA")
        .map(|s| s.parse().unwrap())
        .collect();
    assert!(inv.len() > 20);
    assert!(inv.iter().all(|x| *x < 1.0));
}

#[test]
fn tur_scan_finds_a_violation_at_high_temperature() {
    let cfg = r#"{"scheme": {"kind": "resonant", "gamma": 2.0}, "omega20": 2.6,
        "beta_c": 1.0, "beta_h": 0.2, "frequency": {"fixed": 1.0},
        "grid": [{"axis": "lambda", "min": 0.015, "max": 0.9, "count": 60},
                 {"axis": "omega", "min": 0.05, "max": 100, "count": 300, "spacing": "log"}]}"#;
    let r = maser("tur-scan", cfg, &["--workers", "4"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let u = r
        .column("U")
        .iter()
        .filter(|s| *s != "NA")
        .map(|s| s.parse::<f64>().unwrap())
        .fold(f64::INFINITY, f64::min);
    assert!(u < 2.0, "{u}");
}

#[test]
fn fcs_scan_reports_all_variance_parts() {
    let cfg = r#"{"scheme": {"kind": "uniform", "gamma": 2.0}, "omega20": 2.5,
        "beta_c": 5.0, "beta_h": 1.0,
        "grid": [{"axis": "lambda", "min": 0.05, "max": 0.6, "count": 12}]}"#;
    let r = maser("fcs", cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let total = r.numbers("varP_over_omega10cu");
    let parts: Vec<f64> = (0..total.len())
        .map(|i| {
            ["var1", "var2", "var3", "var4"]
                .iter()
                .map(|v| r.numbers(&format!("{v}_over_omega10cu"))[i])
                .sum()
        })
        .collect();
    for (t, p) in total.iter().zip(&parts) {
        assert!((t - p).abs() <= 1e-14 * t.abs());
    }
}

#[test]
fn dynamics_from_the_ground_state_keeps_unit_trace() {
    let cfg = with(FIG4, r#""dynamics": {"t_end": 10.0, "stride": 20}"#);
    let r = maser("dynamics", &cfg, &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let trace = r.numbers("trace");
    assert!(trace.len() > 5);
    assert!(trace.iter().all(|t| (t - 1.0).abs() < 1e-12));
    assert_eq!(r.numbers("t_times_omega10").last(), Some(&10.0));
}

#[test]
fn config_errors_exit_with_code_two() {
    let cases = [
        FIG4.replace("0.5", "\"half\""),
        with(
            FIG4,
            r#""grid": [{"axis": "lambda", "min": 0.1, "max": 0.5, "count": 1}]"#,
        ),
        with(
            FIG4,
            r#""grid": [{"axis": "omega", "min": 0.1, "max": 5.0, "count": 9}]"#,
        ),
        with(FIG4, r#""unknown_key": 1"#),
        FIG4.replace("0.5", "3.0"),
        "{ not json".to_owned(),
    ];
    for (i, cfg) in cases.iter().enumerate() {
        let mode = if i == 2 { "tur-scan" } else { "stationary" };
        let r = maser(mode, cfg, &[]);
        assert_eq!(r.code, 2, "case {i}: {}", r.stderr);
        assert!(r.stderr.contains("config error"), "case {i}: {}", r.stderr);
    }
    let r = maser("stationary", &FIG4.replace("0.5", "\"half\""), &[]);
    assert!(
        r.stderr.contains("lambda") && r.stderr.contains("line"),
        "{}",
        r.stderr
    );
    let r = maser(
        "dynamics",
        &with(FIG4, r#""dynamics": {"t_end": 1.0, "dt": 10.0}"#),
        &[],
    );
    assert_eq!(r.code, 2, "{}", r.stderr);
}

#[test]
fn grid_rows_are_outer_axis_first() {
    let cfg = parse_config(&with(
        FIG4,
        r#""grid": [{"axis": "omega20", "min": 2.0, "max": 3.0, "count": 2},
                    {"axis": "lambda", "min": 0.1, "max": 0.3, "count": 3}]"#,
    ))
    .unwrap()
    .resolve(Mode::Sweep)
    .unwrap();
    assert_eq!(cfg.grid[0].axis, Axis::Omega20);
    let t = run_grid(&cfg, Mode::Sweep, 2).unwrap();
    let pairs: Vec<(String, String)> = t
        .rows
        .iter()
        .map(|r| (r[0].render(), r[1].render()))
        .collect();
    let expect = [
        ("2.0", "0.1"),
        ("2.0", "0.2"),
        ("2.0", "0.3"),
        ("3.0", "0.1"),
        ("3.0", "0.2"),
        ("3.0", "0.3"),
    ];
    for (p, e) in pairs.iter().zip(expect) {
        assert_eq!((p.0.as_str(), p.1.as_str()), e);
    }
}
