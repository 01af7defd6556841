//! `pair.json`, `region.json` and `certificate.json`.

use cantorcert::construct::pair::homogeneous_1d;
use cantorcert::construct::{PlaneGroup, ProductCertificate};
use cantorcert::cover::{CellRun, CertMeta, CoveringCertificate, FiberPair, Stage, StageCells};
use cantorcert::fractal::{AffineIFS, Grid1D, GridAxis, HomogeneousIFS, LinearRule, Translations};
use cantorcert::renorm::{build_renorm_family, AffChart};
use cantorcert::rignum::{DyInterval, Dyadic, IMatrix};
use serde_json::{json, Map, Value};

use crate::json::*;
use crate::CliError;

pub const SCHEMA: u64 = 1;
/// Explicit maps are written out only for systems at most this large.
pub const MAP_CAP: u128 = 4096;
/// Working precision of parsed enclosures.
pub const PREC: u32 = 128;

/// One coordinate of a product system: ratio and translation grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coord {
    pub scale: DyInterval,
    pub grid: Grid1D,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SideFile {
    pub lambda: DyInterval,
    pub matrix: IMatrix,
    pub coords: Vec<Coord>,
    /// Class axes and linear parts of a system whose linear part depends on the map.
    pub classes: Option<(Vec<usize>, Vec<IMatrix>)>,
    /// Explicit translations (one-dimensional systems only), possibly off the grid.
    pub maps: Option<Vec<DyInterval>>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairFile {
    pub left: SideFile,
    pub right: SideFile,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiberFile {
    pub scale: DyInterval,
    pub interval: DyInterval,
    pub mid: DyInterval,
    pub inflation: Dyadic,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RegionFile {
    pub fibers: Vec<FiberFile>,
    pub group: Option<PlaneGroup>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateFile {
    pub digest: String,
    pub kind: String,
    pub parameters: Value,
    pub product: ProductCertificate,
}

fn unit(prec: u32) -> DyInterval {
    DyInterval::new(Dyadic::zero(), Dyadic::one(), prec).expect("unit interval")
}

fn matrix_value(m: &IMatrix) -> Value {
    let d = m.dim();
    Value::Array((0..d).map(|i| Value::Array((0..d).map(|j| iv(m.get(i, j))).collect())).collect())
}

fn parse_matrix(v: &Value, what: &str) -> Result<IMatrix, CliError> {
    let rows = array(v, what)?.iter().map(|r| parse_ivs(r, what, PREC)).collect::<Result<Vec<_>, _>>()?;
    IMatrix::from_rows(rows).map_err(|_| CliError::Schema(format!("`{what}` must be square")))
}

fn grid_value(g: &Grid1D) -> Value {
    let axes: Vec<Value> = g.axes.iter().map(|a| json!({"count": a.count, "step": iv(&a.step)})).collect();
    json!({"origin": iv(&g.origin), "axes": axes})
}

fn parse_grid(v: &Value) -> Result<Grid1D, CliError> {
    let origin = parse_iv(field(v, "origin")?, "origin", PREC)?;
    let axes = array(field(v, "axes")?, "axes")?
        .iter()
        .map(|a| Ok(GridAxis { count: uint(field(a, "count")?, "count")?, step: parse_iv(field(a, "step")?, "step", PREC)? }))
        .collect::<Result<Vec<_>, CliError>>()?;
    if axes.is_empty() || axes.iter().any(|a| a.count == 0) {
        return Err(CliError::Schema("grids need at least one nonempty axis".into()));
    }
    Ok(Grid1D { origin, axes })
}

impl SideFile {
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn len(&self) -> u128 {
        self.coords.iter().map(|c| c.grid.len() as u128).product()
    }

    /// A side built from homogeneous data; explicit maps are attached when the system is small.
    pub fn homogeneous(lambda: DyInterval, matrix: IMatrix, coords: Vec<Coord>) -> SideFile {
        let mut s = SideFile { lambda, matrix, coords, classes: None, maps: None };
        if s.dim() == 1 && s.len() <= MAP_CAP {
            let g = &s.coords[0].grid;
            s.maps = Some((0..g.len()).map(|j| g.value(j)).collect());
        }
        s
    }

    /// Largest distance between an explicit translation and its grid value.
    pub fn spread(&self) -> Result<Dyadic, CliError> {
        let Some(maps) = &self.maps else { return Ok(Dyadic::zero()) };
        let g = &self.coords[0].grid;
        if maps.len() as u64 != g.len() {
            return Err(CliError::Schema("map count differs from the grid".into()));
        }
        let mut worst = Dyadic::zero();
        for (j, t) in maps.iter().enumerate() {
            let d = (t - &g.value(j as u64)).mag();
            if d > worst {
                worst = d;
            }
        }
        Ok(worst)
    }

    /// The grid of coordinate `k`, widened to contain every explicit translation.
    pub fn coord_grid(&self, k: usize) -> Result<Grid1D, CliError> {
        let mut g = self.coords[k].grid.clone();
        let s = self.spread()?;
        if s.signum() > 0 {
            g.origin = g.origin.inflate(&s);
        }
        Ok(g)
    }

    pub fn coord_ifs(&self, k: usize) -> Result<HomogeneousIFS, CliError> {
        Ok(homogeneous_1d(&self.coords[k].scale, None, self.coord_grid(k)?))
    }

    /// The whole system.
    pub fn ifs(&self) -> Result<AffineIFS, CliError> {
        if self.dim() == 1 {
            return Ok(self.coord_ifs(0)?.to_affine());
        }
        let grids = (0..self.dim()).map(|k| self.coord_grid(k)).collect::<Result<Vec<_>, _>>()?;
        let domain = vec![unit(PREC); self.dim()];
        Ok(match &self.classes {
            Some((axes, matrices)) => AffineIFS {
                dim: self.dim(),
                trans: Translations::Product(grids),
                linear: LinearRule::ByClass { class_axis: axes.clone(), matrices: matrices.clone() },
                domain,
                exact: None,
            },
            None => HomogeneousIFS {
                dim: self.dim(),
                lambda: self.lambda.clone(),
                a: self.matrix.clone(),
                trans: Translations::Product(grids),
                domain,
                lambda_exact: None,
                trans_exact: None,
            }
            .to_affine(),
        })
    }

    pub fn to_json(&self) -> Value {
        let coords: Vec<Value> = self.coords.iter().map(|c| json!({"scale": iv(&c.scale), "grid": grid_value(&c.grid)})).collect();
        let mut m = Map::new();
        m.insert("dim".into(), json!(self.dim()));
        m.insert("lambda".into(), iv(&self.lambda));
        m.insert("matrix".into(), matrix_value(&self.matrix));
        m.insert("coordinates".into(), Value::Array(coords));
        m.insert("domain".into(), Value::Array(vec![iv(&unit(PREC)); self.dim()]));
        if let Some((axes, mats)) = &self.classes {
            m.insert("linear".into(), json!({"class_axis": axes, "matrices": mats.iter().map(matrix_value).collect::<Vec<_>>()}));
        }
        if let Some(maps) = &self.maps {
            let s = &self.coords[0].scale;
            let v: Vec<Value> = maps.iter().map(|t| json!({"linear": [[iv(s)]], "trans": [iv(t)]})).collect();
            m.insert("maps".into(), Value::Array(v));
        }
        Value::Object(m)
    }

    pub fn from_json(v: &Value) -> Result<SideFile, CliError> {
        let dim = uint(field(v, "dim")?, "dim")? as usize;
        let lambda = parse_iv(field(v, "lambda")?, "lambda", PREC)?;
        let matrix = parse_matrix(field(v, "matrix")?, "matrix")?;
        let coords = array(field(v, "coordinates")?, "coordinates")?
            .iter()
            .map(|c| Ok(Coord { scale: parse_iv(field(c, "scale")?, "scale", PREC)?, grid: parse_grid(field(c, "grid")?)? }))
            .collect::<Result<Vec<_>, CliError>>()?;
        if dim == 0 || coords.len() != dim || matrix.dim() != dim {
            return Err(CliError::Schema("dim, matrix and coordinates disagree".into()));
        }
        let domain = parse_ivs(field(v, "domain")?, "domain", PREC)?;
        if domain.len() != dim || domain.iter().any(|d| d != &unit(PREC)) {
            return Err(CliError::Schema("the domain must be the unit cube".into()));
        }
        let classes = match v.get("linear") {
            None => None,
            Some(l) => {
                let axes = array(field(l, "class_axis")?, "class_axis")?.iter().map(|a| uint(a, "class_axis").map(|x| x as usize)).collect::<Result<Vec<_>, _>>()?;
                let mats = array(field(l, "matrices")?, "matrices")?.iter().map(|m| parse_matrix(m, "matrices")).collect::<Result<Vec<_>, _>>()?;
                if axes.len() != dim || mats.is_empty() || mats.iter().any(|m| m.dim() != dim) {
                    return Err(CliError::Schema("class data disagrees with the dimension".into()));
                }
                Some((axes, mats))
            }
        };
        let maps = match v.get("maps") {
            None => None,
            Some(ms) => {
                if dim != 1 {
                    return Err(CliError::Schema("explicit maps are supported on the line only".into()));
                }
                let mut t = Vec::new();
                for m in array(ms, "maps")? {
                    let lin = parse_matrix(field(m, "linear")?, "linear")?;
                    if lin.get(0, 0) != &coords[0].scale {
                        return Err(CliError::Schema("every map must share the coordinate ratio".into()));
                    }
                    let tr = parse_ivs(field(m, "trans")?, "trans", PREC)?;
                    if tr.len() != 1 {
                        return Err(CliError::Schema("translations must be one-dimensional".into()));
                    }
                    t.push(tr[0].clone());
                }
                Some(t)
            }
        };
        let s = SideFile { lambda, matrix, coords, classes, maps };
        s.spread()?;
        Ok(s)
    }
}

impl PairFile {
    pub fn to_json(&self) -> Value {
        json!({"schema": SCHEMA, "left": self.left.to_json(), "right": self.right.to_json()})
    }

    pub fn from_json(v: &Value) -> Result<PairFile, CliError> {
        check_schema(v)?;
        let p = PairFile { left: SideFile::from_json(field(v, "left")?)?, right: SideFile::from_json(field(v, "right")?)? };
        if p.left.dim() != p.right.dim() {
            return Err(CliError::Schema("the two systems act on different dimensions".into()));
        }
        Ok(p)
    }

    pub fn dim(&self) -> usize {
        self.left.dim()
    }

    /// The fiber pair of coordinate `k` over the given fiber of the region.
    pub fn fiber(&self, k: usize, f: &FiberFile) -> Result<FiberPair, CliError> {
        let l = self.left.coord_ifs(k)?.to_affine();
        let r = self.right.coord_ifs(k)?;
        let class_axis = (r.trans_grid_axes() > 1).then_some(1);
        let fam = build_renorm_family(&l, &r.to_affine(), AffChart::Scale1D)?;
        Ok(FiberPair::from_family(&fam, &f.scale, f.interval.clone(), f.mid.clone(), f.inflation.clone(), class_axis)?)
    }
}

trait GridAxes {
    fn trans_grid_axes(&self) -> usize;
}

impl GridAxes for HomogeneousIFS {
    fn trans_grid_axes(&self) -> usize {
        match &self.trans {
            Translations::Product(g) => g[0].axes.len(),
            Translations::Explicit(_) => 1,
        }
    }
}

fn check_schema(v: &Value) -> Result<(), CliError> {
    match v.get("schema").and_then(Value::as_u64) {
        Some(SCHEMA) => Ok(()),
        _ => Err(CliError::Schema(format!("expected schema version {SCHEMA}"))),
    }
}

impl RegionFile {
    pub fn chart(&self) -> &'static str {
        if self.group.is_some() {
            "glchart"
        } else {
            "scale1d"
        }
    }

    pub fn to_json(&self) -> Value {
        let fibers: Vec<Value> = self
            .fibers
            .iter()
            .map(|f| json!({"scale": iv(&f.scale), "interval": iv(&f.interval), "mid": iv(&f.mid), "inflation": dy(&f.inflation)}))
            .collect();
        let mut extent = Map::new();
        extent.insert("fibers".into(), Value::Array(fibers));
        if let Some(g) = &self.group {
            extent.insert(
                "group".into(),
                json!({"k": g.k, "r": dy(&g.r), "a_diag": g.a_diag.iter().map(rat).collect::<Vec<_>>(), "scale": rat(&g.scale)}),
            );
        }
        json!({"schema": SCHEMA, "chart": self.chart(), "extent": extent})
    }

    pub fn from_json(v: &Value) -> Result<RegionFile, CliError> {
        check_schema(v)?;
        let chart = string(field(v, "chart")?, "chart")?;
        let extent = field(v, "extent")?;
        let fibers = array(field(extent, "fibers")?, "fibers")?
            .iter()
            .map(|f| {
                Ok(FiberFile {
                    scale: parse_iv(field(f, "scale")?, "scale", PREC)?,
                    interval: parse_iv(field(f, "interval")?, "interval", PREC)?,
                    mid: parse_iv(field(f, "mid")?, "mid", PREC)?,
                    inflation: parse_dy(field(f, "inflation")?, "inflation")?,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()?;
        let group = match (chart, extent.get("group")) {
            ("scale1d", None) if fibers.len() == 1 => None,
            ("glchart", Some(g)) if fibers.len() == 2 => Some(PlaneGroup {
                k: uint(field(g, "k")?, "k")?,
                r: parse_dy(field(g, "r")?, "r")?,
                a_diag: array(field(g, "a_diag")?, "a_diag")?.iter().map(|x| parse_rat_value(x, "a_diag")).collect::<Result<Vec<_>, _>>()?,
                scale: parse_rat_value(field(g, "scale")?, "scale")?,
            }),
            _ => return Err(CliError::Schema(format!("chart `{chart}` does not match its extent"))),
        };
        Ok(RegionFile { fibers, group })
    }
}

fn run_value(r: &CellRun) -> Value {
    json!({
        "lo": dy(&r.lo), "hi": dy(&r.hi), "step": dy(&r.step), "count": r.count,
        "op": r.op.to_string(), "op_step": r.op_step.to_string(), "image": iv(&r.image),
    })
}

fn parse_run(v: &Value) -> Result<CellRun, CliError> {
    let num = |k: &str| -> Result<String, CliError> { Ok(string(field(v, k)?, k)?.to_string()) };
    let bad = |k: &str| CliError::Schema(format!("`{k}` is not an integer"));
    Ok(CellRun {
        lo: parse_dy(field(v, "lo")?, "lo")?,
        hi: parse_dy(field(v, "hi")?, "hi")?,
        step: parse_dy(field(v, "step")?, "step")?,
        count: uint(field(v, "count")?, "count")?,
        op: num("op")?.parse().map_err(|_| bad("op"))?,
        op_step: num("op_step")?.parse().map_err(|_| bad("op_step"))?,
        image: parse_iv(field(v, "image")?, "image", PREC)?,
    })
}

pub fn covering_value(c: &CoveringCertificate) -> Result<Value, CliError> {
    let mut stages = Vec::new();
    for s in &c.stages {
        let StageCells::Runs(runs) = &s.cells else {
            return Err(CliError::Schema("only run-compressed stages are serialized".into()));
        };
        stages.push(json!({
            "name": s.name, "class": s.class, "source": ivs(&s.source), "target": ivs(&s.target),
            "runs": runs.iter().map(run_value).collect::<Vec<_>>(),
        }));
    }
    let m = &c.meta;
    Ok(json!({
        "delta": dy(&c.delta), "delta_out": dy(&c.delta_out), "classes": c.classes, "stages": stages,
        "meta": {"precision": m.precision, "max_depth": m.max_depth, "cells": m.cells, "records": m.records},
    }))
}

pub fn parse_covering(v: &Value) -> Result<CoveringCertificate, CliError> {
    let meta = field(v, "meta")?;
    let stages = array(field(v, "stages")?, "stages")?
        .iter()
        .map(|s| {
            Ok(Stage {
                name: string(field(s, "name")?, "name")?.to_string(),
                class: match field(s, "class")? {
                    Value::Null => None,
                    c => Some(uint(c, "class")?),
                },
                source: parse_ivs(field(s, "source")?, "source", PREC)?,
                target: parse_ivs(field(s, "target")?, "target", PREC)?,
                cells: StageCells::Runs(array(field(s, "runs")?, "runs")?.iter().map(parse_run).collect::<Result<Vec<_>, _>>()?),
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(CoveringCertificate {
        delta: parse_dy(field(v, "delta")?, "delta")?,
        delta_out: parse_dy(field(v, "delta_out")?, "delta_out")?,
        classes: uint(field(v, "classes")?, "classes")?,
        stages,
        meta: CertMeta {
            precision: uint(field(meta, "precision")?, "precision")? as u32,
            max_depth: uint(field(meta, "max_depth")?, "max_depth")? as u32,
            cells: uint(field(meta, "cells")?, "cells")?,
            records: uint(field(meta, "records")?, "records")?,
        },
    })
}

impl CertificateFile {
    pub fn precision(&self) -> u32 {
        self.product.coords.iter().map(|c| c.meta.precision).max().unwrap_or(PREC)
    }

    pub fn to_json(&self) -> Result<Value, CliError> {
        let p = &self.product;
        let coords = p.coords.iter().map(covering_value).collect::<Result<Vec<_>, _>>()?;
        Ok(json!({
            "schema": SCHEMA,
            "input_digest": self.digest,
            "kind": self.kind,
            "parameters": self.parameters,
            "delta": dy(&p.delta),
            "exp_offset": dy(&p.exp_offset),
            "cross": dy(&p.cross),
            "algebra_cells": p.algebra_cells,
            "cells": p.cells(),
            "precision": self.precision(),
            "coordinates": coords,
        }))
    }

    pub fn from_json(v: &Value) -> Result<CertificateFile, CliError> {
        check_schema(v)?;
        let coords = array(field(v, "coordinates")?, "coordinates")?.iter().map(parse_covering).collect::<Result<Vec<_>, _>>()?;
        Ok(CertificateFile {
            digest: string(field(v, "input_digest")?, "input_digest")?.to_string(),
            kind: string(field(v, "kind")?, "kind")?.to_string(),
            parameters: field(v, "parameters")?.clone(),
            product: ProductCertificate {
                delta: parse_dy(field(v, "delta")?, "delta")?,
                exp_offset: parse_dy(field(v, "exp_offset")?, "exp_offset")?,
                cross: parse_dy(field(v, "cross")?, "cross")?,
                algebra_cells: uint(field(v, "algebra_cells")?, "algebra_cells")? as usize,
                coords,
            },
        })
    }
}

/// Digest of the inputs a certificate speaks about.
pub fn input_digest(pair: &Value, region: &Value) -> String {
    sha256(&[pair, region])
}
