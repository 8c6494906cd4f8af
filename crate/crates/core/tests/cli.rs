//! End-to-end runs of the `pdcorr` binary.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pdcorr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdcorr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stderr_line(o: &Output) -> String {
    let s = String::from_utf8(o.stderr.clone()).unwrap();
    assert_eq!(
        s.lines().count(),
        1,
        "expected one diagnostic line, got {s:?}"
    );
    s.trim_end().to_string()
}

fn out_arg(dir: &Path) -> String {
    dir.to_str().unwrap().to_string()
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let runs: [&[&str]; 3] = [
        &[
            "dispersion",
            "--formulation",
            "ba-gmls",
            "--grid",
            "perturbed",
            "--seed",
            "5",
        ],
        &[
            "manufactured",
            "--formulation",
            "ba-rk",
            "--grid",
            "perturbed",
            "--levels",
            "2",
            "--fields",
            "true",
        ],
        &[
            "dump-weights",
            "--formulation",
            "gmls",
            "--grid",
            "perturbed",
            "--neighborhood",
            "stress",
        ],
    ];
    for (i, args) in runs.iter().enumerate() {
        let mut outputs = Vec::new();
        for rep in 0..2 {
            let out = dir.path().join(format!("{i}-{rep}"));
            let mut a = args.to_vec();
            let o = out_arg(&out);
            a.extend(["--out", &o]);
            if rep == 1 {
                a.extend(["--threads", "3"]);
            }
            let r = pdcorr(&a);
            assert!(
                r.status.success(),
                "{args:?}: {}",
                String::from_utf8_lossy(&r.stderr)
            );
            let mut files: Vec<_> = fs::read_dir(&out)
                .unwrap()
                .map(|e| e.unwrap().path())
                .collect();
            files.sort();
            outputs.push(
                files
                    .iter()
                    .map(|f| fs::read(f).unwrap())
                    .collect::<Vec<_>>(),
            );
        }
        assert!(!outputs[0].is_empty());
        assert_eq!(outputs[0], outputs[1], "{args:?}");
    }
}

#[test]
fn different_seeds_differ() {
    let dir = tempfile::tempdir().unwrap();
    let mut csvs = Vec::new();
    for seed in ["1", "2"] {
        let out = dir.path().join(seed);
        let o = out_arg(&out);
        let r = pdcorr(&[
            "dispersion",
            "--formulation",
            "rk",
            "--grid",
            "perturbed",
            "--seed",
            seed,
            "--out",
            &o,
        ]);
        assert!(r.status.success());
        csvs.push(fs::read_to_string(out.join("dispersion.csv")).unwrap());
    }
    assert_ne!(csvs[0], csvs[1]);
}

#[test]
fn output_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let o = out_arg(dir.path());
    let r = pdcorr(&[
        "manufactured",
        "--formulation",
        "ba-rk",
        "--levels",
        "2",
        "--plot",
        "true",
        "--out",
        &o,
    ]);
    assert!(r.status.success());
    let text = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "level,h,n,formulation,rms_u,rms_stress,rate");
    assert_eq!(lines.len(), 3);
    assert!(
        lines[1].ends_with(','),
        "no rate on the first level: {}",
        lines[1]
    );
    let rate: f64 = lines[2].rsplit(',').next().unwrap().parse().unwrap();
    assert!(rate > 1.5, "{rate}");
    // 17 significant digits
    let h = lines[1].split(',').nth(1).unwrap();
    assert_eq!(h.split('e').next().unwrap().len(), 18, "{h}");
    let svg = fs::read_to_string(dir.path().join("convergence.svg")).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));

    let r = pdcorr(&[
        "dispersion",
        "--formulation",
        "ba-rk",
        "--points",
        "10",
        "--out",
        &o,
    ]);
    assert!(r.status.success());
    let text = fs::read_to_string(dir.path().join("dispersion.csv")).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "k_norm,re_omega_norm,im_omega_norm,formulation,delta_over_h,grid"
    );
    assert_eq!(text.lines().count(), 11);

    let r = pdcorr(&[
        "patch-test",
        "--formulation",
        "ba-gmls",
        "--order",
        "2",
        "--out",
        &o,
    ]);
    assert!(r.status.success());
    let text = fs::read_to_string(dir.path().join("patch.csv")).unwrap();
    assert_eq!(text.lines().count(), 2);
    assert!(text.lines().nth(1).unwrap().ends_with(",true"));
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    let out_file = dir.path().join("from-file");
    let out_flag = dir.path().join("from-flag");
    fs::write(
        &cfg,
        format!(
            "# dispersion run\nformulation = gmls\nhorizon = 4\npoints = 20\nout = {}\n",
            out_file.display()
        ),
    )
    .unwrap();
    let c = cfg.to_str().unwrap();
    let o = out_arg(&out_flag);
    let r = pdcorr(&["dispersion", "--config", c, "--out", &o, "--points", "5"]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    assert!(!out_file.exists());
    let text = fs::read_to_string(out_flag.join("dispersion.csv")).unwrap();
    assert_eq!(text.lines().count(), 6);
    assert!(text
        .lines()
        .nth(1)
        .unwrap()
        .contains(",gmls,4.0000000000000000e0,uniform"));
}

#[test]
fn validation_errors_exit_one_with_the_key() {
    let dir = tempfile::tempdir().unwrap();
    let o = out_arg(dir.path());
    let cases: [(&[&str], &str); 6] = [
        (
            &["dispersion", "--formulation", "rk", "--order", "4"],
            "key=order",
        ),
        (
            &["dispersion", "--formulation", "rk", "--horizon", "1.5"],
            "key=horizon",
        ),
        (&["manufactured", "--levels", "2"], "key=formulation"),
        (
            &["plate-hole", "--formulation", "rk", "--poisson", "0.7"],
            "key=poisson",
        ),
        (&["dispersion", "--formulation", "fem"], "key=formulation"),
        (
            &[
                "dispersion",
                "--formulation",
                "rk",
                "--config",
                "/nonexistent/x.cfg",
            ],
            "key=config",
        ),
    ];
    for (args, key) in cases {
        let mut a = args.to_vec();
        a.extend(["--out", &o]);
        let r = pdcorr(&a);
        assert_eq!(r.status.code(), Some(1), "{args:?}");
        let line = stderr_line(&r);
        assert!(line.starts_with("error kind=config exit=1 "), "{line}");
        assert!(line.contains(key), "{line}");
    }
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "formulation = rk\nlevels = 2\n").unwrap();
    let r = pdcorr(&["dispersion", "--config", cfg.to_str().unwrap(), "--out", &o]);
    assert_eq!(r.status.code(), Some(1));
    assert!(stderr_line(&r).contains("key=levels"));

    let r = pdcorr(&["frobnicate"]);
    assert_eq!(r.status.code(), Some(1));
    assert!(stderr_line(&r).starts_with("error kind=usage exit=1 msg="));

    let bad_cloud = dir.path().join("bad.txt");
    fs::write(&bad_cloud, "0 0.0 1.0 bulk\n1 oops 1.0 bulk\n").unwrap();
    let r = pdcorr(&[
        "dump-weights",
        "--formulation",
        "rk",
        "--cloud",
        bad_cloud.to_str().unwrap(),
        "--out",
        &o,
    ]);
    assert_eq!(r.status.code(), Some(1));
    assert!(stderr_line(&r).starts_with("error kind=parse exit=1"));
}

#[test]
fn numerical_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = out_arg(dir.path());
    // unit volumes but nodes ten spacings apart: no bonds within the horizon
    let cloud = dir.path().join("sparse.txt");
    fs::write(
        &cloud,
        "0 0.0 1.0 bulk\n1 10.0 1.0 bulk\n2 20.0 1.0 bulk\n3 30.0 1.0 bulk\n",
    )
    .unwrap();
    let r = pdcorr(&[
        "dump-weights",
        "--formulation",
        "rk",
        "--order",
        "3",
        "--horizon",
        "3.5",
        "--cloud",
        cloud.to_str().unwrap(),
        "--out",
        &o,
    ]);
    assert_eq!(r.status.code(), Some(2));
    assert!(stderr_line(&r).starts_with("error kind=unisolvency exit=2 msg="));
}

#[test]
fn one_dimensional_weights_have_one_component() {
    let dir = tempfile::tempdir().unwrap();
    let cloud = dir.path().join("bar.txt");
    let text: String = (0..9).map(|i| format!("{i} {}.0 1.0 bulk\n", i)).collect();
    fs::write(&cloud, text).unwrap();
    let o = out_arg(dir.path());
    let r = pdcorr(&[
        "dump-weights",
        "--formulation",
        "gmls",
        "--order",
        "1",
        "--horizon",
        "2",
        "--cloud",
        cloud.to_str().unwrap(),
        "--out",
        &o,
    ]);
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let text = fs::read_to_string(dir.path().join("weights.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "node_id,neighbor_id,gamma_x");
    // interior node 4 has neighbors 2, 3, 5, 6 and its weights sum to zero
    let row: Vec<f64> = text
        .lines()
        .skip(1)
        .filter(|l| l.starts_with("4,"))
        .map(|l| l.rsplit(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(row.len(), 4);
    assert!(row.iter().sum::<f64>().abs() < 1e-14);
}
