use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use framedec::cli::csv::read_vector;

fn framedec(args: &[&str], cache: Option<&Path>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_framedec"));
    cmd.args(args);
    match cache {
        Some(c) => cmd.env("FRAMEDEC_CACHE_DIR", c),
        None => cmd.env_remove("FRAMEDEC_CACHE_DIR"),
    };
    cmd.output().expect("spawn framedec")
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn certify_mercedes_frame() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "m.toml",
        "problem = \"frame\"\n[frame]\nvectors = [[1.0, 0.0], [-0.5, 0.8660254037844386], [-0.5, -0.8660254037844386]]\n",
    );
    let o = framedec(&["certify", "--config", cfg.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("B1 = 1.5, B2 = 1.5"), "{}", stdout(&o));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out = out.to_str().unwrap();

    let cfg = write_config(dir.path(), "bad.toml", "problem = \"convolution\"\nsmoothing = 1\n");
    assert_eq!(framedec(&["run", "--config", cfg.to_str().unwrap(), "--out", out], None).status.code(), Some(2));
    let missing = dir.path().join("nope.toml");
    assert_eq!(framedec(&["run", "--config", missing.to_str().unwrap()], None).status.code(), Some(2));

    let cfg = write_config(
        dir.path(),
        "torus.toml",
        "problem = \"tomography\"\n[tomography]\ngrid = 8\ncutoff = 2\nhalf_width = 5.0\n",
    );
    let o = framedec(&["run", "--config", cfg.to_str().unwrap(), "--out", out], None);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("aperture escapes torus"), "{}", stderr(&o));

    let cfg = write_config(dir.path(), "radon.toml", "problem = \"radon\"\n[radon]\ndetectors = 12\n");
    assert_eq!(framedec(&["certify", "--config", cfg.to_str().unwrap(), "--out", out], None).status.code(), Some(2));

    let cfg = write_config(dir.path(), "flat.toml", "problem = \"frame\"\n[frame]\nvectors = [[1.0, 0.0], [2.0, 0.0]]\n");
    assert_eq!(framedec(&["certify", "--config", cfg.to_str().unwrap(), "--out", out], None).status.code(), Some(3));
}

#[test]
fn clean_convolution_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "c.toml", "problem = \"convolution\"\nplots = false\n");
    let out = dir.path().join("out");
    let o = framedec(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", stderr(&o));
    let report = std::fs::read_to_string(out.join("report.csv")).unwrap();
    let mut lines = report.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "relative_residual").unwrap();
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert!(row[col].parse::<f64>().unwrap() <= 1e-8);
    assert!(std::fs::read_to_string(out.join("picard.csv")).unwrap().starts_with("k,partial_sum\n"));
}

#[test]
fn picard_on_divergent_testbed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "h.toml",
        "problem = \"convolution\"\n[convolution]\nsymbol = \"heat\"\ntime = 0.01\n[noise]\nlevels = [0.01]\n",
    );
    let out = dir.path().join("out");
    let o = framedec(&["picard", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], None);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("verdict diverging"), "{}", stdout(&o));
}

#[test]
fn dual_cache_round_trip() {
    for method in ["exact", "neumann"] {
        let dir = tempfile::tempdir().unwrap();
        let out = dir.path().join("out");
        let cache = dir.path().join("cache");
        let cfg = write_config(
            dir.path(),
            "d.toml",
            &format!(
                "problem = \"dense_svd\"\nseed = 4\nplots = false\n[dual]\nmethod = \"{method}\"\n[dense_svd]\nrows = 7\ncols = 5\nrank = 3\n[solve]\ndata = \"out/data.csv\"\n"
            ),
        );
        let c = cfg.to_str().unwrap();
        let o = out.to_str().unwrap();
        assert!(framedec(&["run", "--config", c, "--out", o], Some(&cache)).status.success());

        let miss = framedec(&["solve", "--config", c, "--out", o, "--use-cache"], Some(&cache));
        assert_eq!(miss.status.code(), Some(4), "{}", stderr(&miss));

        let first = framedec(&["dual", "--config", c, "--out", o], Some(&cache));
        assert!(first.status.success(), "{}", stderr(&first));
        assert!(stdout(&first).contains("cache written"));
        let second = framedec(&["dual", "--config", c, "--out", o], Some(&cache));
        assert!(stdout(&second).contains("cache hit"));
        let checksum = |s: String| s.split("checksum ").nth(1).unwrap().trim().to_string();
        assert_eq!(checksum(stdout(&first)), checksum(stdout(&second)));

        assert!(framedec(&["solve", "--config", c, "--out", o], Some(&cache)).status.success());
        let plain = read_vector(&out.join("solution.csv")).unwrap();
        let cached = framedec(&["solve", "--config", c, "--out", o, "--use-cache"], Some(&cache));
        assert!(cached.status.success(), "{}", stderr(&cached));
        let from_cache = read_vector(&out.join("solution.csv")).unwrap();
        assert!((plain.flatten() - from_cache.flatten()).norm() <= 1e-12 * plain.flatten().norm());
        let truth = read_vector(&out.join("truth.csv")).unwrap();
        assert!((plain.flatten() - truth.flatten()).norm() <= 1e-8 * truth.flatten().norm());
    }
}

#[test]
fn corrupted_cache_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path().join("cache");
    let cfg = write_config(
        dir.path(),
        "d.toml",
        "problem = \"dense_svd\"\nplots = false\n[solve]\ndata = \"out/data.csv\"\n",
    );
    let (c, o) = (cfg.to_str().unwrap(), dir.path().join("out"));
    let o = o.to_str().unwrap();
    assert!(framedec(&["run", "--config", c, "--out", o], Some(&cache)).status.success());
    assert!(framedec(&["dual", "--config", c, "--out", o], Some(&cache)).status.success());
    let file = std::fs::read_dir(&cache).unwrap().next().unwrap().unwrap().path();
    let mut bytes = std::fs::read(&file).unwrap();
    let last = bytes.len() - 1;
    bytes[last] ^= 0xff;
    std::fs::write(&file, bytes).unwrap();
    let r = framedec(&["solve", "--config", c, "--out", o, "--use-cache"], Some(&cache));
    assert_eq!(r.status.code(), Some(3));
    assert!(stderr(&r).contains("checksum"));
}
