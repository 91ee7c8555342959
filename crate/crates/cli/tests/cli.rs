use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

const SMALL: [&str; 4] = ["--set", "n_per_axis=32", "--set", "epsilon_list=0.7,0.6"];

fn sbpp(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sbpp"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn sweep_is_reproducible_across_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut args = vec!["sweep", "--threads", "1"];
    args.extend(SMALL);
    assert_eq!(code(&sbpp(&args, a.path())), 0);
    args[2] = "3";
    assert_eq!(code(&sbpp(&args, b.path())), 0);
    for f in ["sweep.csv", "sweep.json", "fields/eps0.6_seed2.sbpf", "profile.txt"] {
        let x = std::fs::read(a.path().join(f)).unwrap();
        let y = std::fs::read(b.path().join(f)).unwrap();
        assert!(x == y, "{f} differs");
    }
    let mut rdr = csv::Reader::from_path(a.path().join("sweep.csv")).unwrap();
    let headers: Vec<String> = rdr.headers().unwrap().iter().map(String::from).collect();
    let expected = [
        "epsilon", "seed_index", "status", "t_W", "energy", "m_eps_estimate", "concentration_ratio",
        "profile_error", "phi_c2", "n_local_maxima", "barycenter_x", "barycenter_y", "barycenter_z",
    ];
    assert_eq!(&headers[..expected.len()], &expected);
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 8);
    assert_eq!(&rows[0][0], "0.7");
    assert_eq!(&rows[7][0], "0.6");
}

#[test]
fn random_seed_points_follow_the_seed_flag() {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (d, seed) in dirs.iter().zip(["5", "5", "6"]) {
        let mut args = vec!["sweep", "--seed", seed, "--set", "seed_count=2", "--set", "epsilon_list=0.7"];
        args.extend(["--set", "n_per_axis=32"]);
        assert_eq!(code(&sbpp(&args, d.path())), 0);
    }
    let read = |i: usize| std::fs::read(dirs[i].path().join("sweep.csv")).unwrap();
    assert_eq!(read(0), read(1));
    assert_ne!(read(0), read(2));
}

#[test]
fn validation_failures_exit_with_two() {
    let d = tempfile::tempdir().unwrap();
    for set in [
        "p=3",
        "epsilon_list=",
        "epsilon_list=0.3,0.4",
        "epsilon_list=0.05",
        "a=0.6",
        "no_such_key=1",
    ] {
        let o = sbpp(&["sweep", "--set", set], d.path());
        assert_eq!(code(&o), 2, "{set}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = sbpp(&["ground-state", "--set", "p=3"], d.path());
    assert_eq!(code(&o), 2);
    let o = sbpp(&["constant-branch", "--set", "p=6.5"], d.path());
    assert_eq!(code(&o), 2);
    let o = sbpp(&["profile-check", "/nonexistent.sbpf"], d.path());
    assert_eq!(code(&o), 2);
    std::fs::write(d.path().join("junk.sbpf"), b"not a dump").unwrap();
    let junk = d.path().join("junk.sbpf");
    let o = sbpp(&["profile-check", junk.to_str().unwrap()], d.path());
    assert_eq!(code(&o), 2);
}

#[test]
fn unconverged_solve_exits_with_three() {
    let d = tempfile::tempdir().unwrap();
    let mut args = vec!["solve", "--set", "max_iters=1"];
    args.extend(SMALL);
    let o = sbpp(&args, d.path());
    assert_eq!(code(&o), 3, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(json(&d.path().join("solve.json"))["converged"], Value::Bool(false));
}

#[test]
fn dump_round_trip_reproduces_energy() {
    let d = tempfile::tempdir().unwrap();
    let mut args = vec!["sweep"];
    args.extend(SMALL);
    assert_eq!(code(&sbpp(&args, d.path())), 0);
    let mut rdr = csv::Reader::from_path(d.path().join("sweep.csv")).unwrap();
    let row = rdr.records().map(Result::unwrap).find(|r| &r[0] == "0.6" && &r[1] == "1").unwrap();
    let energy: f64 = row[4].parse().unwrap();

    let dump = d.path().join("fields/eps0.6_seed1.sbpf");
    let check_dir = d.path().join("check");
    let o = sbpp(&["profile-check", dump.to_str().unwrap()], &check_dir);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&check_dir.join("profile_check.json"));
    let e = v["energy"].as_f64().unwrap();
    assert!((e - energy).abs() <= 1e-9 * energy.abs(), "{e} vs {energy}");
    assert_eq!(v["epsilon"].as_f64(), Some(0.6));
    assert_eq!(v["diagnostics"]["n_local_maxima"].as_u64(), Some(1));

    // Restarting from a converged dump is already stationary.
    let solve_dir = d.path().join("restart");
    let o = sbpp(&["solve", "--init", dump.to_str().unwrap(), "--set", "n_per_axis=32"], &solve_dir);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&solve_dir.join("solve.json"));
    assert!(v["iterations"].as_u64().unwrap() <= 2);
    assert!((v["energy"].as_f64().unwrap() - energy).abs() <= 1e-8 * energy);
}

#[test]
fn ground_state_and_constant_branch_outputs() {
    let d = tempfile::tempdir().unwrap();
    assert_eq!(code(&sbpp(&["ground-state"], d.path())), 0);
    let v = json(&d.path().join("ground_state.json"));
    assert!((v["u0"].as_f64().unwrap() - 5.223878560730).abs() < 1e-8);
    assert!((v["m_infinity"].as_f64().unwrap() - 9.582590090843).abs() < 1e-8);
    assert!(v["nehari_identity_error"].as_f64().unwrap() < 1e-6);
    let again = tempfile::tempdir().unwrap();
    assert_eq!(code(&sbpp(&["ground-state"], again.path())), 0);
    for f in ["ground_state.json", "profile.txt"] {
        assert_eq!(std::fs::read(d.path().join(f)).unwrap(), std::fs::read(again.path().join(f)).unwrap());
    }

    let mut args = vec!["constant-branch"];
    args.extend(SMALL);
    assert_eq!(code(&sbpp(&args, d.path())), 0);
    let v = json(&d.path().join("constant_branch.json"));
    assert!((v["c_star"].as_f64().unwrap() - 12.5727).abs() < 1e-4);
    assert!(v["scaled_energy_spread"].as_f64().unwrap() <= 1e-12);
    for level in v["levels"].as_array().unwrap() {
        assert_eq!(level["stays_constant"], Value::Bool(true));
        assert!(level["relative_energy_error"].as_f64().unwrap() < 1e-10);
    }
}

#[test]
fn verbose_sweep_writes_iteration_log() {
    let d = tempfile::tempdir().unwrap();
    let mut args = vec!["sweep", "--set", "verbose=true", "--set", "epsilon_list=0.7"];
    args.extend(["--set", "n_per_axis=32"]);
    assert_eq!(code(&sbpp(&args, d.path())), 0);
    let text = std::fs::read_to_string(d.path().join("iterations.jsonl")).unwrap();
    let lines: Vec<Value> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert!(!lines.is_empty());
    for seed in 0..4u64 {
        let energies: Vec<f64> = lines
            .iter()
            .filter(|l| l["seed_index"].as_u64() == Some(seed))
            .map(|l| l["energy"].as_f64().unwrap())
            .collect();
        assert!(energies.windows(2).all(|w| w[1] <= w[0]));
    }
}

#[test]
fn config_file_is_read() {
    let d = tempfile::tempdir().unwrap();
    let cfg = d.path().join("run.cfg");
    std::fs::write(&cfg, "# small run\nn_per_axis = 32\nepsilon_list = 0.7\nseed_points = 1,1,1\n").unwrap();
    let o = sbpp(&["sweep", "--config", cfg.to_str().unwrap()], d.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let mut rdr = csv::Reader::from_path(d.path().join("sweep.csv")).unwrap();
    assert_eq!(rdr.records().count(), 1);
    let o = sbpp(&["sweep", "--config", "/nonexistent.cfg"], d.path());
    assert_eq!(code(&o), 2);
}
