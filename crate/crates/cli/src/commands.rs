//! Bodies of the subcommands.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use cantorcert::construct::{
    assemble_theorem1, assemble_theorem2, replay_plane, thin_variant, Assembly, AssemblyConfig, Lemma51Params, Pair1D, PlaneGroup,
    ProductCertificate, ThinPair,
};
use cantorcert::cover::{replay_factored, verify_factored, SweepConfig};
use cantorcert::fractal::{Grid1D, Translations};
use cantorcert::liecover::{build_simplex, choose_r, enumerate_lattice, verify_algebra_covering, verify_proposition_region, Algebra, CellConfig, QMat};
use cantorcert::rignum::{DyInterval, Dyadic, IMatrix, PowProduct, Round};
use cantorcert::Error;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde_json::{json, Value};

use crate::files::{input_digest, CertificateFile, Coord, FiberFile, PairFile, RegionFile, SideFile, PREC};
use crate::json::{dy, iv, parse_rat, pretty, rat};
use crate::render::{svg, Which};
use crate::{max_precision, CliError, EXIT_OK, EXIT_REFUTED};

/// Working precision of constructions.
pub const WORK_PREC: u32 = 128;
/// Lattice points kept by `liecover`.
const LATTICE_CAP: usize = 100_000;
/// Seeded spot checks of a plane certificate recorded in the report.
const SPOT_SAMPLES: usize = 20;

#[derive(Clone, Debug)]
pub struct ConstructArgs {
    pub gamma: String,
    pub c: u64,
    pub eps: String,
    pub dim: usize,
    pub matrix: Option<PathBuf>,
    pub kappa: Option<String>,
    pub thin: Option<u64>,
    pub out: PathBuf,
}

fn io(path: &Path, e: std::io::Error) -> CliError {
    CliError::Io(format!("{}: {e}", path.display()))
}

fn read_json(path: &Path) -> Result<Value, CliError> {
    let s = fs::read_to_string(path).map_err(|e| io(path, e))?;
    serde_json::from_str(&s).map_err(|e| CliError::Schema(format!("{}: {e}", path.display())))
}

fn write(path: &Path, s: &str) -> Result<(), CliError> {
    fs::write(path, s).map_err(|e| io(path, e))
}

fn check_precision(bits: u32) -> Result<(), CliError> {
    let max = max_precision()?;
    if bits > max {
        return Err(Error::ResourceLimit(format!("{bits}-bit arithmetic exceeds the {max}-bit cap")).into());
    }
    Ok(())
}

/// Rows of rationals separated by whitespace, one row per line.
pub fn parse_matrix_text(s: &str) -> Result<QMat, CliError> {
    let rows: Vec<Vec<BigRational>> = s
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| l.split_whitespace().map(parse_rat).collect::<Result<Vec<_>, _>>())
        .collect::<Result<_, _>>()?;
    if rows.is_empty() || rows.iter().any(|r| r.len() != rows.len()) {
        return Err(CliError::Usage("the matrix must be square".into()));
    }
    Ok(rows)
}

fn pow_text(p: &PowProduct) -> String {
    if let Some(q) = p.to_rational() {
        return q.to_string();
    }
    let parts: Vec<String> = p.factors().map(|(b, e)| format!("{b}^({e})")).collect();
    parts.join("·")
}

fn approx(x: &DyInterval) -> String {
    format!("{x} (width {:.3e})", x.width().to_f64())
}

fn grid_of(t: &Translations, k: usize) -> Grid1D {
    match t {
        Translations::Product(g) => g[k].clone(),
        Translations::Explicit(_) => unreachable!("constructions use product grids"),
    }
}

fn line_side(pair_ell: &DyInterval, grid: Grid1D) -> SideFile {
    SideFile::homogeneous(pair_ell.clone(), IMatrix::identity(1, PREC), vec![Coord { scale: pair_ell.clone(), grid }])
}

fn fiber_file(p: &Pair1D) -> FiberFile {
    FiberFile {
        scale: p.params.a.clone(),
        interval: p.params.interval_i(),
        mid: p.fiber.mid_core.clone(),
        inflation: p.fiber.mid_inflation.clone(),
    }
}

fn line_files(p: &Pair1D) -> (PairFile, RegionFile) {
    let pair = PairFile {
        left: line_side(&p.params.ell, grid_of(&p.k1.trans, 0)),
        right: line_side(&p.params.ell, grid_of(&p.k1_prime.trans, 0)),
    };
    (pair, RegionFile { fibers: vec![fiber_file(p)], group: None })
}

fn plane_files(a: &Assembly) -> (PairFile, RegionFile) {
    let coords = |t: &Translations| -> Vec<Coord> {
        a.pairs.iter().enumerate().map(|(k, p)| Coord { scale: p.params.ell.clone(), grid: grid_of(t, k) }).collect()
    };
    let left = SideFile::homogeneous(a.lambda.clone(), a.k.a.clone(), coords(&a.k.trans));
    let mut right = SideFile::homogeneous(a.lambda.clone(), IMatrix::identity(2, PREC), coords(&a.k_prime.trans));
    if let cantorcert::fractal::LinearRule::ByClass { class_axis, matrices } = &a.k_prime.linear {
        right.classes = Some((class_axis.clone(), matrices.clone()));
    }
    let region = RegionFile { fibers: a.pairs.iter().map(fiber_file).collect(), group: PlaneGroup::of(a) };
    (PairFile { left, right }, region)
}

fn params_value(p: &Lemma51Params) -> Value {
    json!({
        "gamma": rat(&p.gamma), "c": p.c, "eps": rat(&p.eps), "eps_prime": rat(&p.eps_prime),
        "n": p.n, "n_prime": p.n_prime, "n_dprime": p.n_dprime,
        "ell": pow_text(&p.ell_exact), "a": pow_text(&p.a_exact),
        "len_i": pow_text(&p.len_i_exact), "len_j": pow_text(&p.len_j_exact),
        "delta_interval": iv(&p.delta),
    })
}

fn params_report(out: &mut String, k: usize, p: &Lemma51Params) {
    let _ = writeln!(out, "coordinate {k}: ε′ = {}, n = {}, n′ = {}, n″ = {}", p.eps_prime, p.n, p.n_prime, p.n_dprime);
    let _ = writeln!(out, "  ℓ = {}, a = {}, |I| = {}, |J| = {}", pow_text(&p.ell_exact), pow_text(&p.a_exact), pow_text(&p.len_i_exact), pow_text(&p.len_j_exact));
    let _ = writeln!(out, "constraint ledger (coordinate {k}):");
    for c in &p.ledger {
        let _ = writeln!(out, "  {}", c.to_string().replace('\n', "\n  "));
    }
}

struct Built {
    pair: PairFile,
    region: RegionFile,
    kind: String,
    parameters: Value,
    product: ProductCertificate,
    report: String,
}

fn line_report(out: &mut String, p: &Pair1D) -> Result<(), CliError> {
    params_report(out, 0, &p.params);
    let (d, dp) = p.dims()?;
    let (t, tp) = p.thickness()?;
    let _ = writeln!(out, "validity: K₁ {:?}, K₁′ {:?}", p.validity.0.overall, p.validity.1.overall);
    let _ = writeln!(out, "dim K₁ ∈ {}", approx(&d));
    let _ = writeln!(out, "dim K₁′ ∈ {}", approx(&dp));
    let _ = writeln!(out, "τ(K₁) ∈ {t}");
    let _ = writeln!(out, "τ(K₁′) ∈ {tp}");
    Ok(())
}

fn certificate_report(out: &mut String, cert: &ProductCertificate) {
    let _ = writeln!(out, "δ* = {} ≈ {:.6e}", cert.delta, cert.delta.to_f64());
    for (k, c) in cert.coords.iter().enumerate() {
        let _ = writeln!(
            out,
            "coordinate {k} covering: δ_in = {:.6e}, δ_out = {:.6e}, classes = {}, cells = {}, runs = {}",
            c.delta.to_f64(),
            c.delta_out.to_f64(),
            c.classes,
            c.meta.cells,
            c.meta.records
        );
    }
    let _ = writeln!(out, "cells = {}", cert.cells());
}

fn build_line(gamma: &BigRational, c: u64, eps: &BigRational) -> Result<Built, CliError> {
    let a = assemble_theorem1(1, gamma, c, eps, &AssemblyConfig::default())?;
    let p = &a.pairs[0];
    let (pair, region) = line_files(p);
    let mut report = format!("kind: {}\n", a.kind);
    line_report(&mut report, p)?;
    Ok(Built { pair, region, kind: a.kind.clone(), parameters: json!({"coordinates": [params_value(&p.params)]}), product: a.certificate.clone(), report })
}

fn build_thin(gamma: &BigRational, c: u64, eps: &BigRational, n: u64) -> Result<Built, CliError> {
    let t: ThinPair = thin_variant(gamma, c, eps, n, WORK_PREC, &SweepConfig::default())?;
    let p = &t.pair;
    let (pair, region) = line_files(p);
    let kind = format!("self-similar on the line, thinned by N = {n}");
    let mut report = format!("kind: {kind}\n");
    line_report(&mut report, p)?;
    let _ = writeln!(report, "gap floor (N−1)ℓ = {}", t.gap_floor);
    let _ = writeln!(report, "first gaps of K₁′ ∈ [{:.6e}, {:.6e}]", t.min_gap.lo().to_f64(), t.max_gap.hi().to_f64());
    let _ = writeln!(report, "τ(K₁′) ≤ 1/N certified: {}", t.tau_prime_ok);
    let _ = writeln!(report, "τ(K₁) < 2nℓ certified: {}", t.tau_ok);
    let product = ProductCertificate {
        delta: p.certificate.delta.clone(),
        exp_offset: Dyadic::zero(),
        cross: Dyadic::zero(),
        algebra_cells: 0,
        coords: vec![p.certificate.clone()],
    };
    let mut params = params_value(&p.params);
    params["thin"] = json!(n);
    Ok(Built { pair, region, kind, parameters: json!({"coordinates": [params]}), product, report })
}

fn build_plane(a: Assembly) -> Result<Built, CliError> {
    let (pair, region) = plane_files(&a);
    let mut report = format!("kind: {}\nc = {} (classes per coordinate), |F| = {}\n", a.kind, a.c, a.group.as_ref().map_or(0, |g| g.lattice.len()));
    let _ = writeln!(report, "A = diag({}), λ = {}", a.a_diag.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", "), pow_text(&a.lambda_exact));
    for (k, p) in a.pairs.iter().enumerate() {
        params_report(&mut report, k, &p.params);
    }
    let (dk, dkp) = a.dims()?;
    let _ = writeln!(report, "validity: K {:?}, K′ {:?}", a.validity.0.overall, a.validity.1.overall);
    let _ = writeln!(report, "dim K ∈ {}", approx(&dk));
    let _ = writeln!(report, "dim K′ ∈ {}", approx(&dkp));
    if let Some(g) = &a.group {
        let _ = writeln!(report, "r = {} ≈ {:.6e}, margin c = {}, scale 1 + s = {:.9}", g.cover.r, g.cover.r.to_f64(), g.cover.c, g.scale.to_f64().unwrap_or(f64::NAN));
    }
    let cert = &a.certificate;
    let _ = writeln!(report, "‖exp(y) − I‖ ≤ {:.6e}, cross term ≤ {:.6e}, algebra cells = {}", cert.exp_offset.to_f64(), cert.cross.to_f64(), cert.algebra_cells);
    let spot = a.spot_check(SPOT_SAMPLES, 0)?;
    let _ = writeln!(report, "spot checks: {}/{}", spot.passed, spot.samples);
    let coords: Vec<Value> = a.pairs.iter().map(|p| params_value(&p.params)).collect();
    let parameters = json!({"coordinates": coords, "c": a.c, "a_diag": a.a_diag.iter().map(rat).collect::<Vec<_>>(), "lambda": pow_text(&a.lambda_exact)});
    Ok(Built { pair, region, kind: a.kind.clone(), parameters, product: a.certificate.clone(), report })
}

pub fn construct(args: &ConstructArgs) -> Result<i32, CliError> {
    let gamma = parse_rat(&args.gamma)?;
    let eps = parse_rat(&args.eps)?;
    check_precision(WORK_PREC)?;
    let built = match (&args.matrix, args.thin, args.dim) {
        (Some(_), Some(_), _) => return Err(CliError::Usage("--thin applies to pairs on the line".into())),
        (Some(path), None, d) => {
            if d != 2 && d != 1 {
                return Err(CliError::Usage("--matrix needs --dim 2".into()));
            }
            let a = parse_matrix_text(&fs::read_to_string(path).map_err(|e| io(path, e))?)?;
            let kappa = parse_rat(args.kappa.as_deref().unwrap_or("2"))?;
            build_plane(assemble_theorem2(&a, &kappa, &gamma, &eps, &AssemblyConfig::default())?)?
        }
        (None, Some(n), 1) => build_thin(&gamma, args.c, &eps, n)?,
        (None, Some(_), _) => return Err(CliError::Usage("--thin applies to pairs on the line".into())),
        (None, None, 1) => build_line(&gamma, args.c, &eps)?,
        (None, None, d) => build_plane(assemble_theorem1(d, &gamma, args.c, &eps, &AssemblyConfig::default())?)?,
    };
    let mut report = built.report;
    certificate_report(&mut report, &built.product);
    fs::create_dir_all(&args.out).map_err(|e| io(&args.out, e))?;
    let pair = built.pair.to_json();
    let region = built.region.to_json();
    let cert = CertificateFile { digest: input_digest(&pair, &region), kind: built.kind, parameters: built.parameters, product: built.product };
    write(&args.out.join("pair.json"), &pretty(&pair))?;
    write(&args.out.join("region.json"), &pretty(&region))?;
    write(&args.out.join("certificate.json"), &pretty(&cert.to_json()?))?;
    write(&args.out.join("report.txt"), &report)?;
    print!("{report}");
    Ok(EXIT_OK)
}

fn parse_delta(s: &str) -> Result<Dyadic, CliError> {
    if let Some(d) = Dyadic::from_hex(s) {
        return Ok(d);
    }
    let q = parse_rat(s)?;
    Ok(Dyadic::from_rational(&q, 64, Round::Down))
}

fn verdict(mode: &str, r: Result<Value, CliError>) -> Result<i32, CliError> {
    match r {
        Ok(mut v) => {
            v["verdict"] = json!("certified");
            v["mode"] = json!(mode);
            println!("{}", crate::json::canonical(&v));
            Ok(EXIT_OK)
        }
        Err(e) => {
            let code = e.exit_code();
            let (kind, witness) = match &e {
                CliError::Core(Error::CoverageFailure { witness, .. }) => ("refuted", witness.clone()),
                CliError::Core(Error::Inconclusive(_)) => ("inconclusive", String::new()),
                _ if code == EXIT_REFUTED => ("refuted", String::new()),
                _ => return Err(e),
            };
            println!("{}", crate::json::canonical(&json!({"verdict": kind, "mode": mode, "reason": e.to_string(), "witness": witness})));
            eprintln!("error: {e}");
            Ok(code)
        }
    }
}

/// A certificate naming operators or cells the inputs do not have is refuted, not malformed.
fn foreign(e: Error) -> Error {
    match e {
        Error::Domain(m) => Error::coverage("certificate does not match the inputs", m),
        other => other,
    }
}

pub fn verify(pair: &Path, region: &Path, certificate: Option<&Path>, delta: Option<&str>) -> Result<i32, CliError> {
    let pair_v = read_json(pair)?;
    let region_v = read_json(region)?;
    let p = PairFile::from_json(&pair_v)?;
    let reg = RegionFile::from_json(&region_v)?;
    if reg.fibers.len() != p.dim() {
        return Err(CliError::Schema("region and pair dimensions differ".into()));
    }
    let fibers = |p: &PairFile| reg.fibers.iter().enumerate().map(|(k, f)| p.fiber(k, f)).collect::<Result<Vec<_>, _>>();
    if let Some(d) = delta {
        let d = parse_delta(d)?;
        if reg.group.is_some() {
            return Err(CliError::Usage("certifying at a given δ is supported for scale1d regions".into()));
        }
        let r = fibers(&p).and_then(|fs| {
            let c = verify_factored(&fs[0], &d, &d, &SweepConfig::default())?;
            Ok(json!({"delta": dy(&d), "cells": c.meta.cells}))
        });
        return verdict("certify", r);
    }
    let Some(cpath) = certificate else {
        return Err(CliError::Usage("give a certificate to replay or --delta to certify".into()));
    };
    let cert = CertificateFile::from_json(&read_json(cpath)?)?;
    check_precision(cert.precision())?;
    let r = (|| {
        if cert.digest != input_digest(&pair_v, &region_v) {
            return Err(Error::coverage("certificate digest differs from the inputs", cert.digest.clone()).into());
        }
        let fs = fibers(&p)?;
        let prod = &cert.product;
        match &reg.group {
            None => {
                if prod.coords.len() != 1 {
                    return Err(CliError::Schema("a scale1d certificate has one coordinate".into()));
                }
                replay_factored(&prod.coords[0], &fs[0]).map_err(foreign)?;
                if prod.delta > prod.coords[0].delta {
                    return Err(Error::coverage("claimed δ exceeds the certified δ", String::new()).into());
                }
            }
            Some(g) => replay_plane(g, prod, &fs, &AssemblyConfig::default()).map_err(foreign)?,
        }
        Ok(json!({"delta": dy(&prod.delta), "cells": prod.cells(), "kind": cert.kind}))
    })();
    verdict("replay", r)
}

pub fn render(pair: &Path, depth: u32, out: &Path, cap: u128, which: Which) -> Result<i32, CliError> {
    let p = PairFile::from_json(&read_json(pair)?)?;
    let (l, r) = (p.left.ifs()?, p.right.ifs()?);
    let systems: Vec<(&str, &cantorcert::fractal::AffineIFS)> = match which {
        Which::Left => vec![("left", &l)],
        Which::Right => vec![("right", &r)],
        Which::Both => vec![("left", &l), ("right", &r)],
    };
    let (s, n) = svg(&systems, depth, cap)?;
    write(out, &s)?;
    println!("{n} boxes written to {}", out.display());
    Ok(EXIT_OK)
}

pub fn liecover(dim: usize, kappa: &str, samples: usize, seed: u64, out: &Path) -> Result<i32, CliError> {
    let kappa = parse_rat(kappa)?;
    if dim == 0 {
        return Err(CliError::Usage("--dim must be positive".into()));
    }
    if dim > 2 {
        return Err(Error::ResourceLimit(format!("GL({dim}) exceeds the d ≤ 2 cap")).into());
    }
    if kappa < BigRational::from_integer(1.into()) {
        return Err(CliError::Usage("κ must be at least 1".into()));
    }
    let k = kappa.ceil().to_integer().to_u64().ok_or_else(|| CliError::Usage("κ is too large".into()))?;
    let g = dim * dim;
    let cfg = CellConfig::default();
    let mut lat = enumerate_lattice(g + 1, k, build_simplex(g)?, LATTICE_CAP)?;
    let margin = verify_algebra_covering(&mut lat, &cfg, 3)?;
    let gc = choose_r(&lat, Algebra::Gl(dim))?;
    let closed = lat.closed_form();
    let mut v = json!({
        "group": format!("GL({dim})"),
        "dim_group": g,
        "kappa": rat(&kappa),
        "k": k,
        "vertices": lat.simplex.vertices.iter().map(|x| x.iter().map(rat).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "lattice": (0..lat.len()).map(|i| lat.point(i).iter().map(rat).collect::<Vec<_>>()).collect::<Vec<_>>(),
        "size": lat.len(),
        "binomial": closed.to_string(),
        "binomial_matches": closed == lat.len().into(),
        "exponential_bound": lat.bound_certified(),
        "dim_bound": k != 1 || lat.len() <= g + 1,
        "margin": rat(&margin),
        "r": dy(&gc.r),
        "deviation": {"left": dy(&gc.deviation_left), "right": dy(&gc.deviation_right)},
    });
    let mut code = EXIT_OK;
    if samples > 0 {
        match verify_proposition_region(&lat, &gc, &kappa, samples, seed, &cfg) {
            Ok(rep) => v["samples"] = json!({"requested": rep.samples, "passed": rep.passed, "cells": rep.cells}),
            Err(e) => {
                let e = CliError::from(e);
                code = e.exit_code();
                eprintln!("error: {e}");
                v["samples"] = json!({"requested": samples, "failure": e.to_string()});
            }
        }
    }
    fs::create_dir_all(out).map_err(|e| io(out, e))?;
    write(&out.join("lattice.json"), &pretty(&v))?;
    println!(
        "|M| = {} (binomial {}, match {}), e-bound {}, c = {}, r = {:.6e}",
        lat.len(),
        closed,
        v["binomial_matches"],
        v["exponential_bound"],
        margin,
        gc.r.to_f64()
    );
    if let Some(s) = v.get("samples") {
        println!("samples: {s}");
    }
    Ok(code)
}
