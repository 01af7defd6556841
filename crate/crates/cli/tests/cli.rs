use std::fs;
use std::path::{Path, PathBuf};
use std::sync::OnceLock;

use cantorcert::fractal::Grid1D;
use cantorcert::rignum::{DyInterval, Dyadic, IMatrix};
use cantorcert_cli::files::{CertificateFile, Coord, PairFile, SideFile};
use cantorcert_cli::json::{canonical, pretty};
use cantorcert_cli::run_args;
use serde_json::Value;
use tempfile::TempDir;

fn cli(args: &[&str]) -> i32 {
    let mut v = vec!["cantorcert"];
    v.extend_from_slice(args);
    run_args(v)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read(p: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(p).unwrap()).unwrap()
}

/// The worked pair, constructed once.
fn worked() -> &'static PathBuf {
    static D: OnceLock<(TempDir, PathBuf)> = OnceLock::new();
    &D.get_or_init(|| {
        let t = TempDir::new().unwrap();
        let out = t.path().join("worked");
        assert_eq!(cli(&["construct", "--gamma", "1/2", "--c", "2", "--eps", "1/10", "--out", s(&out)]), 0);
        (t, out)
    })
    .1
}

#[test]
fn construct_writes_all_files() {
    let d = worked();
    for f in ["pair.json", "region.json", "certificate.json", "report.txt"] {
        assert!(d.join(f).exists(), "{f}");
    }
    let report = fs::read_to_string(d.join("report.txt")).unwrap();
    assert!(report.contains("dim K₁ ∈"));
    assert!(!report.contains("FAILED"));
}

#[test]
fn files_round_trip() {
    let d = worked();
    let pair = read(&d.join("pair.json"));
    assert_eq!(PairFile::from_json(&pair).unwrap().to_json(), pair);
    let cert = read(&d.join("certificate.json"));
    assert_eq!(CertificateFile::from_json(&cert).unwrap().to_json().unwrap(), cert);
}

#[test]
fn construction_is_deterministic() {
    let t = TempDir::new().unwrap();
    let out = t.path().join("again");
    assert_eq!(cli(&["construct", "--gamma", "1/2", "--c", "2", "--eps", "1/10", "--out", s(&out)]), 0);
    for f in ["pair.json", "region.json", "certificate.json", "report.txt"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(worked().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn replay_certifies() {
    let d = worked();
    assert_eq!(cli(&["verify", s(&d.join("pair.json")), s(&d.join("region.json")), s(&d.join("certificate.json"))]), 0);
}

#[test]
fn corrupted_operator_is_refuted() {
    let d = worked();
    let mut cert = read(&d.join("certificate.json"));
    let op = &mut cert["coordinates"][0]["stages"][1]["runs"][0]["op"];
    let k: u64 = op.as_str().unwrap().parse().unwrap();
    *op = Value::String((k + 1).to_string());
    let t = TempDir::new().unwrap();
    let bad = t.path().join("certificate.json");
    fs::write(&bad, pretty(&cert)).unwrap();
    assert_eq!(cli(&["verify", s(&d.join("pair.json")), s(&d.join("region.json")), s(&bad)]), 2);
}

#[test]
fn changed_inputs_break_the_digest() {
    let d = worked();
    let mut region = read(&d.join("region.json"));
    region["extent"]["fibers"][0]["inflation"] = Value::String("0x3p0".into());
    let t = TempDir::new().unwrap();
    let r = t.path().join("region.json");
    fs::write(&r, pretty(&region)).unwrap();
    assert_eq!(cli(&["verify", s(&d.join("pair.json")), s(&r), s(&d.join("certificate.json"))]), 2);
}

#[test]
fn perturbed_translations_certify_at_half_delta() {
    let d = worked();
    let cert = CertificateFile::from_json(&read(&d.join("certificate.json"))).unwrap();
    let ds = cert.product.delta.clone();
    let mut pair = PairFile::from_json(&read(&d.join("pair.json"))).unwrap();
    let maps = pair.right.maps.as_mut().unwrap();
    for (j, t) in maps.iter_mut().enumerate() {
        // alternating shifts of 3δ*/16
        let e = (&ds * &Dyadic::from_i64(if j % 2 == 0 { 3 } else { -3 })).shl(-4);
        *t = &*t + &DyInterval::point(e, t.prec());
    }
    let t = TempDir::new().unwrap();
    let p = t.path().join("pair.json");
    fs::write(&p, pretty(&pair.to_json())).unwrap();
    let half = ds.shl(-1).to_hex();
    assert_eq!(cli(&["verify", s(&p), s(&d.join("region.json")), "--delta", &half]), 0);
    // the original certificate speaks about other inputs
    assert_eq!(cli(&["verify", s(&p), s(&d.join("region.json")), s(&d.join("certificate.json"))]), 2);
}

#[test]
fn bad_flags_exit_one() {
    let t = TempDir::new().unwrap();
    let out = t.path().join("x");
    assert_eq!(cli(&["construct", "--gamma", "2", "--c", "2", "--eps", "1/10", "--out", s(&out)]), 1);
    assert_eq!(cli(&["construct", "--gamma", "one half", "--c", "2", "--eps", "1/10"]), 1);
    assert_eq!(cli(&["construct", "--c", "2"]), 1);
    assert_eq!(cli(&["verify", "missing.json", "missing.json"]), 1);
}

#[test]
fn precision_cap_is_a_limit() {
    let t = TempDir::new().unwrap();
    let status = std::process::Command::new(env!("CARGO_BIN_EXE_cantorcert"))
        .args(["construct", "--gamma", "1/2", "--c", "2", "--eps", "1/10", "--out", s(&t.path().join("x"))])
        .env("CANTORCERT_MAX_PRECISION", "64")
        .output()
        .unwrap()
        .status;
    assert_eq!(status.code(), Some(3));
}

fn middle_thirds(dir: &Path) -> PathBuf {
    let third = DyInterval::from_ratio(1, 3, 128);
    let grid = Grid1D::arithmetic(DyInterval::zero(128), 2, DyInterval::from_ratio(2, 3, 128));
    let side = SideFile::homogeneous(third.clone(), IMatrix::identity(1, 128), vec![Coord { scale: third, grid }]);
    let pair = PairFile { left: side.clone(), right: side };
    let p = dir.join("thirds.json");
    fs::write(&p, pretty(&pair.to_json())).unwrap();
    p
}

fn rects(svg: &Path) -> usize {
    fs::read_to_string(svg).unwrap().matches("<rect").count()
}

#[test]
fn middle_thirds_depth_three_has_eight_bars() {
    let t = TempDir::new().unwrap();
    let p = middle_thirds(t.path());
    let out = t.path().join("k.svg");
    assert_eq!(cli(&["render", s(&p), "--depth", "3", "--side", "left", "--out", s(&out)]), 0);
    assert_eq!(rects(&out), 8);
}

#[test]
fn worked_pair_depth_one_bars_lie_in_the_unit_interval() {
    let t = TempDir::new().unwrap();
    let out = t.path().join("k1.svg");
    assert_eq!(cli(&["render", s(&worked().join("pair.json")), "--depth", "1", "--side", "left", "--out", s(&out)]), 0);
    assert_eq!(rects(&out), 1296);
    let text = fs::read_to_string(&out).unwrap();
    for line in text.lines().filter(|l| l.starts_with("<rect")) {
        let x: f64 = line.split("x=\"").nth(1).unwrap().split('"').next().unwrap().parse().unwrap();
        let w: f64 = line.split("width=\"").nth(1).unwrap().split('"').next().unwrap().parse().unwrap();
        assert!(x >= 0.0 && x + w <= 1000.0 + 1e-6);
    }
}

#[test]
fn rendering_is_deterministic_and_capped() {
    let t = TempDir::new().unwrap();
    let p = middle_thirds(t.path());
    let (a, b) = (t.path().join("a.svg"), t.path().join("b.svg"));
    assert_eq!(cli(&["render", s(&p), "--depth", "4", "--out", s(&a)]), 0);
    assert_eq!(cli(&["render", s(&p), "--depth", "4", "--out", s(&b)]), 0);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(cli(&["render", s(&p), "--depth", "4", "--max-boxes", "31", "--out", s(&a)]), 3);
}

#[test]
fn liecover_on_the_line() {
    let t = TempDir::new().unwrap();
    assert_eq!(cli(&["liecover", "--dim", "1", "--kappa", "1", "--out", s(t.path())]), 0);
    let v = read(&t.path().join("lattice.json"));
    assert!(v["size"].as_u64().unwrap() <= 2);
    assert_eq!(v["dim_bound"], Value::Bool(true));
    assert_eq!(v["binomial_matches"], Value::Bool(true));
}

#[test]
fn liecover_plane_lattice_has_330_points() {
    let t = TempDir::new().unwrap();
    assert_eq!(cli(&["liecover", "--dim", "2", "--kappa", "2", "--out", s(t.path())]), 0);
    let v = read(&t.path().join("lattice.json"));
    assert_eq!(v["size"].as_u64(), Some(330));
    assert_eq!(v["binomial"].as_str(), Some("330"));
    assert_eq!(v["exponential_bound"], Value::Bool(true));
}

#[test]
fn liecover_refuses_large_groups() {
    assert_eq!(cli(&["liecover", "--dim", "3", "--kappa", "1"]), 3);
}

#[test]
fn plane_pair_replays_and_refuses_dense_rendering() {
    let t = TempDir::new().unwrap();
    let out = t.path().join("plane");
    assert_eq!(cli(&["construct", "--gamma", "1/2", "--c", "2", "--eps", "1/10", "--dim", "2", "--out", s(&out)]), 0);
    let (p, r, c) = (out.join("pair.json"), out.join("region.json"), out.join("certificate.json"));
    assert_eq!(read(&r)["chart"], Value::String("glchart".into()));
    assert_eq!(cli(&["verify", s(&p), s(&r), s(&c)]), 0);
    let mut cert = read(&c);
    cert["cross"] = Value::String("0x1p-200".into());
    fs::write(&c, canonical(&cert)).unwrap();
    assert_eq!(cli(&["verify", s(&p), s(&r), s(&c)]), 2);
    assert_eq!(cli(&["render", s(&p), "--depth", "1", "--out", s(&out.join("k.svg"))]), 3);
}
