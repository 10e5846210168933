//! File formats: domain and profile specs (JSON), height-function and
//! surface-tension tables (CSV), the checksummed table cache, and run
//! manifests. Rationals serialize as "p/q" strings so every artifact
//! round-trips exactly.

use std::collections::BTreeMap;
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::enumeration::{SurfaceTensionModel, TableRow};
use crate::error::{Error, Result};
use crate::height::{AffineSpec, HeightFunction, LipschitzProfile};
use crate::lattice::{ContinuumDomain, DiscreteDomain, LatticePoint};
use crate::rat::{self, Rat};
use crate::simplicial::{PwaProfile, SimplexDomain, SimplexId};

pub const FORMAT_VERSION: &str = "heightlab/1";

pub fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    format!("{:x}", hasher.finalize())
}

/// The `# heightlab/1 run=<id>` comment line that opens every artifact.
pub fn artifact_header(run_id: &str) -> String {
    format!("# {FORMAT_VERSION} run={run_id}")
}

// ---------------------------------------------------------------- domains

pub fn domain_from_json(text: &str) -> Result<ContinuumDomain> {
    let d: ContinuumDomain = serde_json::from_str(text)?;
    match &d.shape {
        crate::lattice::Shape::Box { lo, hi } => {
            if lo.len() != d.dim || hi.len() != d.dim {
                return Err(Error::InvalidInput("box bounds/dim mismatch".into()));
            }
            if lo.iter().zip(hi).any(|(l, h)| l >= h) {
                return Err(Error::InvalidInput("box must have positive extent".into()));
            }
        }
        crate::lattice::Shape::Polytope { halfspaces } => {
            if halfspaces.iter().any(|h| h.a.len() != d.dim) {
                return Err(Error::InvalidInput("half-space/dim mismatch".into()));
            }
        }
        crate::lattice::Shape::SimplexUnion { simplices, .. } => {
            if simplices.iter().any(|s| s.dim() != d.dim) {
                return Err(Error::InvalidInput("simplex/dim mismatch".into()));
            }
        }
    }
    Ok(d)
}

pub fn domain_to_json(d: &ContinuumDomain) -> String {
    serde_json::to_string_pretty(d).expect("domain serialization")
}

// ---------------------------------------------------------------- profiles

/// Profile spec JSON:
///   {"type":"affine","s":["1/2"],"b":"1/2"}
///   {"type":"tent","a":"1/2"}
///   {"type":"min"}
///   {"type":"quadratic","c":"1/4"}
///   {"type":"piecewise","mesh":{...},"values":[{"x":["0","0"],"v":"0"},...]}
pub fn profile_from_json(text: &str) -> Result<LipschitzProfile> {
    let v: Value = serde_json::from_str(text)?;
    profile_from_value(&v)
}

pub fn profile_from_value(v: &Value) -> Result<LipschitzProfile> {
    let kind = v
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::InvalidInput("profile spec missing \"type\"".into()))?;
    match kind {
        "affine" => {
            let s = rat_vec_field(v, "s")?;
            let b = rat_field(v, "b")?;
            LipschitzProfile::affine(s, b)
        }
        "tent" => LipschitzProfile::tent(rat_field(v, "a")?),
        "min" => Ok(LipschitzProfile::min_coords()),
        "quadratic" => LipschitzProfile::quadratic(rat_field(v, "c")?),
        "piecewise" => {
            let mesh_v = v
                .get("mesh")
                .ok_or_else(|| Error::InvalidInput("piecewise profile missing mesh".into()))?;
            let mesh = mesh_from_value(mesh_v)?;
            let entries = v
                .get("values")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::InvalidInput("piecewise profile missing values".into()))?;
            let mut values = BTreeMap::new();
            for e in entries {
                let x = e
                    .get("x")
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::InvalidInput("vertex entry missing x".into()))?;
                let coords: Vec<Rat> = x
                    .iter()
                    .map(rat::value_to_rat)
                    .collect::<std::result::Result<_, _>>()?;
                // vertex coordinates are scale * integer units
                let unit: Vec<i64> = coords
                    .iter()
                    .map(|c| {
                        let u = *c / mesh.scale();
                        if u.is_integer() {
                            Ok(u.to_integer())
                        } else {
                            Err(Error::InvalidInput(format!(
                                "vertex {} is not on the scale-{} grid",
                                rat::fmt_rat(c),
                                rat::fmt_rat(&mesh.scale())
                            )))
                        }
                    })
                    .collect::<Result<_>>()?;
                let val = rat::value_to_rat(
                    e.get("v")
                        .ok_or_else(|| Error::InvalidInput("vertex entry missing v".into()))?,
                )?;
                values.insert(unit, val);
            }
            Ok(LipschitzProfile::PiecewiseAffine(PwaProfile::new(
                mesh, values,
            )?))
        }
        other => Err(Error::InvalidInput(format!("unknown profile type {other:?}"))),
    }
}

pub fn profile_to_json(p: &LipschitzProfile) -> Value {
    match p {
        LipschitzProfile::Affine(AffineSpec { s, b }) => serde_json::json!({
            "type": "affine",
            "s": s.iter().map(rat::fmt_rat).collect::<Vec<_>>(),
            "b": rat::fmt_rat(b),
        }),
        LipschitzProfile::Builtin(b) => match b {
            crate::height::BuiltinProfile::Tent { amplitude } => {
                serde_json::json!({"type": "tent", "a": rat::fmt_rat(amplitude)})
            }
            crate::height::BuiltinProfile::MinCoords => serde_json::json!({"type": "min"}),
            crate::height::BuiltinProfile::ScaledQuadratic { coeff } => {
                serde_json::json!({"type": "quadratic", "c": rat::fmt_rat(coeff)})
            }
        },
        LipschitzProfile::PiecewiseAffine(pwa) => {
            let mesh = mesh_to_value(pwa.domain());
            let values: Vec<Value> = pwa
                .vertex_values()
                .iter()
                .map(|(unit, v)| {
                    let coords: Vec<String> = pwa
                        .domain()
                        .vertex_coords(unit)
                        .iter()
                        .map(rat::fmt_rat)
                        .collect();
                    serde_json::json!({"x": coords, "v": rat::fmt_rat(v)})
                })
                .collect();
            serde_json::json!({"type": "piecewise", "mesh": mesh, "values": values})
        }
    }
}

// ---------------------------------------------------------------- meshes

/// SimplexDomain JSON: {"scale":"1/2","simplices":[{"v":[0,0],"perm":[2,1]},...]}
pub fn mesh_from_value(v: &Value) -> Result<SimplexDomain> {
    let scale = rat_field(v, "scale")?;
    let ids: Vec<SimplexId> = serde_json::from_value(
        v.get("simplices")
            .cloned()
            .ok_or_else(|| Error::InvalidInput("mesh missing simplices".into()))?,
    )?;
    SimplexDomain::new(scale, ids)
}

pub fn mesh_to_value(k: &SimplexDomain) -> Value {
    serde_json::json!({
        "scale": rat::fmt_rat(&k.scale()),
        "simplices": k.simplices(),
    })
}

// ---------------------------------------------------------------- CSV

/// Pins CSV: `z1,...,zm,h` rows (comment lines with # skipped).
pub fn pins_from_csv(text: &str, dim: usize) -> Result<Vec<(LatticePoint, i64)>> {
    let mut out = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields[0].chars().next().is_some_and(|c| c.is_alphabetic()) {
            continue; // header row
        }
        if fields.len() != dim + 1 {
            return Err(Error::InvalidInput(format!(
                "expected {} columns, got {}: {line:?}",
                dim + 1,
                fields.len()
            )));
        }
        let coords: Vec<i64> = fields[..dim]
            .iter()
            .map(|f| {
                f.parse::<i64>()
                    .map_err(|_| Error::InvalidInput(format!("bad coordinate {f:?}")))
            })
            .collect::<Result<_>>()?;
        let h: i64 = fields[dim]
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad height {:?}", fields[dim])))?;
        out.push((LatticePoint(coords), h));
    }
    if out.is_empty() {
        return Err(Error::InvalidInput("no pins in CSV".into()));
    }
    Ok(out)
}

pub fn height_from_csv(text: &str, domain: &Arc<DiscreteDomain>) -> Result<HeightFunction> {
    let pins = pins_from_csv(text, domain.dim())?;
    if pins.len() != domain.site_count() {
        return Err(Error::InvalidInput(format!(
            "CSV has {} sites, domain has {}",
            pins.len(),
            domain.site_count()
        )));
    }
    let mut values = vec![0i64; domain.site_count()];
    for (p, h) in pins {
        let idx = domain
            .position(p.coords())
            .ok_or_else(|| Error::PointOutsideDomain(p.0.clone()))?;
        values[idx] = h;
    }
    HeightFunction::new(domain.clone(), values)
}

/// Surface-tension table CSV: `m,s1,...,sm,n,ent_n` rows plus one summary row
/// per slope with n = "inf" and the extrapolated value.
pub fn table_to_csv(model: &SurfaceTensionModel, header_comment: &str) -> Result<String> {
    let SurfaceTensionModel::Table { m, n_list, rows, .. } = model else {
        return Err(Error::InvalidInput(
            "closed-form model has no table to export".into(),
        ));
    };
    let mut out = String::new();
    if !header_comment.is_empty() {
        out.push_str(header_comment);
        out.push('\n');
    }
    out.push_str("m,");
    for i in 1..=*m {
        out.push_str(&format!("s{i},"));
    }
    out.push_str("n,ent\n");
    for row in rows {
        let s_cols: Vec<String> = row.s.iter().map(rat::fmt_rat).collect();
        for (n, val) in n_list.iter().zip(&row.per_n) {
            out.push_str(&format!("{m},{},{n},{val:.17e}\n", s_cols.join(",")));
        }
        out.push_str(&format!(
            "{m},{},inf,{:.17e}\n",
            s_cols.join(","),
            row.extrapolated
        ));
    }
    Ok(out)
}

// ---------------------------------------------------------------- table cache

#[derive(Serialize, Deserialize)]
struct TableRowWire {
    s: Vec<String>,
    per_n: Vec<f64>,
    extrapolated: f64,
}

#[derive(Serialize, Deserialize)]
struct TableWire {
    m: usize,
    axis: Vec<String>,
    n_list: Vec<u32>,
    rows: Vec<TableRowWire>,
}

#[derive(Serialize, Deserialize)]
struct CacheFile {
    version: String,
    payload: TableWire,
    checksum: String,
}

fn table_wire(model: &SurfaceTensionModel) -> Result<TableWire> {
    let SurfaceTensionModel::Table { m, axis, n_list, rows } = model else {
        return Err(Error::InvalidInput("only table models are cacheable".into()));
    };
    Ok(TableWire {
        m: *m,
        axis: axis.iter().map(rat::fmt_rat).collect(),
        n_list: n_list.clone(),
        rows: rows
            .iter()
            .map(|r| TableRowWire {
                s: r.s.iter().map(rat::fmt_rat).collect(),
                per_n: r.per_n.clone(),
                extrapolated: r.extrapolated,
            })
            .collect(),
    })
}

fn payload_checksum(payload: &TableWire) -> String {
    sha256_hex(serde_json::to_string(payload).expect("payload json").as_bytes())
}

/// Writes the model with an embedded checksum; `load_table` round-trips
/// bit-exactly (rationals as strings, floats at full precision).
pub fn cache_table(model: &SurfaceTensionModel, path: &Path) -> Result<()> {
    let payload = table_wire(model)?;
    let checksum = payload_checksum(&payload);
    let file = CacheFile {
        version: FORMAT_VERSION.to_string(),
        payload,
        checksum,
    };
    std::fs::write(path, serde_json::to_string_pretty(&file)?)?;
    Ok(())
}

pub fn load_table(path: &Path) -> Result<SurfaceTensionModel> {
    let text = std::fs::read_to_string(path)?;
    let file: CacheFile =
        serde_json::from_str(&text).map_err(|e| Error::CorruptTable(e.to_string()))?;
    if file.version != FORMAT_VERSION {
        return Err(Error::CorruptTable(format!(
            "version {:?}, expected {:?}",
            file.version, FORMAT_VERSION
        )));
    }
    if payload_checksum(&file.payload) != file.checksum {
        return Err(Error::CorruptTable("checksum mismatch".into()));
    }
    let axis: Vec<Rat> = file
        .payload
        .axis
        .iter()
        .map(|s| rat::parse_rat(s))
        .collect::<Result<_>>()?;
    let rows: Vec<TableRow> = file
        .payload
        .rows
        .iter()
        .map(|r| {
            Ok(TableRow {
                s: r.s.iter().map(|s| rat::parse_rat(s)).collect::<Result<_>>()?,
                per_n: r.per_n.clone(),
                extrapolated: r.extrapolated,
            })
        })
        .collect::<Result<_>>()?;
    Ok(SurfaceTensionModel::Table {
        m: file.payload.m,
        axis,
        n_list: file.payload.n_list,
        rows,
    })
}

// ---------------------------------------------------------------- manifest

/// Record of one CLI run: resolved configuration, input/output hashes, seed.
/// Exact-arithmetic runs reproduce byte-identically from the same manifest.
#[derive(Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub subcommand: String,
    pub config: Value,
    pub seed: Option<u64>,
    pub run_id: String,
    pub inputs: BTreeMap<String, String>,
    pub outputs: BTreeMap<String, String>,
    pub rng_algorithm: Option<String>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: Value, seed: Option<u64>) -> Self {
        let run_id = sha256_hex(
            format!(
                "{FORMAT_VERSION}:{subcommand}:{}:{}",
                config,
                seed.map_or_else(|| "-".into(), |s| s.to_string())
            )
            .as_bytes(),
        );
        RunManifest {
            version: FORMAT_VERSION.to_string(),
            subcommand: subcommand.to_string(),
            config,
            seed,
            run_id,
            inputs: BTreeMap::new(),
            outputs: BTreeMap::new(),
            rng_algorithm: None,
        }
    }

    pub fn record_input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs
            .insert(path.display().to_string(), sha256_hex(bytes));
    }

    pub fn record_output(&mut self, path: &Path, bytes: &[u8]) {
        self.outputs
            .insert(path.display().to_string(), sha256_hex(bytes));
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?)?;
        Ok(())
    }
}

fn rat_field(v: &Value, key: &str) -> Result<Rat> {
    rat::value_to_rat(
        v.get(key)
            .ok_or_else(|| Error::InvalidInput(format!("missing field {key:?}")))?,
    )
}

fn rat_vec_field(v: &Value, key: &str) -> Result<Vec<Rat>> {
    v.get(key)
        .and_then(Value::as_array)
        .ok_or_else(|| Error::InvalidInput(format!("missing array field {key:?}")))?
        .iter()
        .map(rat::value_to_rat)
        .collect()
}
