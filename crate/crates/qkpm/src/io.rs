//! On-disk formats. Every CSV starts with `# key = value` metadata lines
//! followed by a header row; JSON mirrors the same content.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use qkpm_core::hamiltonian::RescaleParams;
use qkpm_core::kpm::{DosCurve, Grid, GridKind, Kernel, MomentSet, Provenance, ThermoTable};
use serde::{Deserialize, Serialize};

use crate::oracle::SpectrumRecord;
use crate::CliError;

pub type Meta = BTreeMap<String, String>;

fn parse_err(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::Parse(format!("{}: {msg}", path.display()))
}

/// Splits `# key = value` lines from the CSV body.
fn split_header(text: &str) -> (Meta, String) {
    let mut meta = Meta::new();
    let mut body = String::new();
    for line in text.lines() {
        match line.strip_prefix('#') {
            Some(c) => {
                if let Some((k, v)) = c.split_once('=') {
                    meta.insert(k.trim().to_string(), v.trim().to_string());
                }
            }
            None => {
                body.push_str(line);
                body.push('\n');
            }
        }
    }
    (meta, body)
}

fn write_csv(path: &Path, meta: &Meta, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    let mut out = String::new();
    for (k, v) in meta {
        out.push_str(&format!("# {k} = {v}\n"));
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).map_err(|e| CliError::Io(e.to_string()))?;
    for r in rows {
        w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    out.push_str(&String::from_utf8_lossy(&bytes));
    write_text(path, &out)
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn read_csv(path: &Path) -> Result<(Meta, Vec<String>, Vec<Vec<String>>), CliError> {
    let (meta, body) = split_header(&read_text(path)?);
    let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(body.as_bytes());
    let header = r.headers().map_err(|e| parse_err(path, e))?.iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.map(|rec| rec.iter().map(String::from).collect()).map_err(|e| parse_err(path, e)))
        .collect::<Result<_, _>>()?;
    Ok((meta, header, rows))
}

fn column(path: &Path, header: &[String], name: &str) -> Result<usize, CliError> {
    header.iter().position(|h| h == name).ok_or_else(|| parse_err(path, format!("missing column {name:?}")))
}

fn num(path: &Path, s: &str) -> Result<f64, CliError> {
    s.parse::<f64>().map_err(|_| parse_err(path, format!("not a number: {s:?}")))
}

fn meta_num<T: std::str::FromStr>(path: &Path, meta: &Meta, key: &str) -> Result<Option<T>, CliError> {
    meta.get(key)
        .map(|v| v.parse::<T>().map_err(|_| parse_err(path, format!("bad value for {key}: {v:?}"))))
        .transpose()
}

fn rescale_meta(meta: &mut Meta, p: &Option<RescaleParams>) {
    if let Some(p) = p {
        meta.insert("rescale_a".into(), p.a.to_string());
        meta.insert("rescale_b".into(), p.b.to_string());
        meta.insert("epsilon".into(), p.epsilon.to_string());
        meta.insert("beta_id".into(), p.beta_id.to_string());
    }
}

fn rescale_from_meta(path: &Path, meta: &Meta) -> Result<Option<RescaleParams>, CliError> {
    let (Some(a), Some(b)) = (meta_num::<f64>(path, meta, "rescale_a")?, meta_num::<f64>(path, meta, "rescale_b")?) else {
        return Ok(None);
    };
    Ok(Some(RescaleParams {
        a,
        b,
        epsilon: meta_num(path, meta, "epsilon")?.unwrap_or(0.0),
        beta_id: meta_num(path, meta, "beta_id")?.unwrap_or(-a / b),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaleJson {
    pub a: f64,
    pub b: f64,
    pub epsilon: f64,
    pub beta_id: f64,
}

impl From<RescaleParams> for RescaleJson {
    fn from(p: RescaleParams) -> Self {
        Self { a: p.a, b: p.b, epsilon: p.epsilon, beta_id: p.beta_id }
    }
}

impl From<RescaleJson> for RescaleParams {
    fn from(p: RescaleJson) -> Self {
        Self { a: p.a, b: p.b, epsilon: p.epsilon, beta_id: p.beta_id }
    }
}

/// JSON form of a [`MomentSet`] plus run metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentsJson {
    pub provenance: String,
    pub order: usize,
    pub replicas: usize,
    pub shots: u64,
    pub rescale: Option<RescaleJson>,
    pub values: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub replica_scatter: Option<Vec<f64>>,
    pub zero_flags: Vec<bool>,
    pub meta: Meta,
}

impl MomentsJson {
    pub fn new(m: &MomentSet, meta: Meta) -> Self {
        Self {
            provenance: m.provenance.to_string(),
            order: m.order(),
            replicas: m.replicas,
            shots: m.shots,
            rescale: m.rescale.map(Into::into),
            values: m.values.clone(),
            std_errors: m.std_errors.clone(),
            replica_scatter: m.replica_scatter.clone(),
            zero_flags: qkpm_core::estimator::zero_flags(m),
            meta,
        }
    }

    pub fn to_moment_set(&self) -> Result<MomentSet, CliError> {
        let provenance: Provenance = self.provenance.parse()?;
        let mut m = MomentSet::exact(self.values.clone(), provenance);
        if self.std_errors.len() != self.values.len() {
            return Err(CliError::Parse("std_errors and values differ in length".into()));
        }
        m.std_errors = self.std_errors.clone();
        m.replica_scatter = self.replica_scatter.clone();
        m.replicas = self.replicas;
        m.shots = self.shots;
        m.rescale = self.rescale.map(Into::into);
        Ok(m)
    }
}

pub fn write_moments_csv(path: &Path, m: &MomentSet, extra: &Meta) -> Result<(), CliError> {
    let mut meta = extra.clone();
    meta.insert("provenance".into(), m.provenance.to_string());
    meta.insert("order".into(), m.order().to_string());
    meta.insert("replicas".into(), m.replicas.to_string());
    meta.insert("shots".into(), m.shots.to_string());
    rescale_meta(&mut meta, &m.rescale);
    let flags = qkpm_core::estimator::zero_flags(m);
    let rows = (0..m.len())
        .map(|n| {
            vec![
                n.to_string(),
                m.values[n].to_string(),
                m.std_errors[n].to_string(),
                u8::from(flags[n]).to_string(),
                m.replica_scatter.as_ref().map_or(String::new(), |s| s[n].to_string()),
            ]
        })
        .collect::<Vec<_>>();
    write_csv(path, &meta, &["n", "value", "std_error", "zero_flag", "replica_scatter"], &rows)
}

/// Reads moments and their metadata from `.json` or the CSV form.
pub fn read_moments(path: &Path) -> Result<(MomentSet, Meta), CliError> {
    if path.extension().is_some_and(|e| e == "json") {
        let j: MomentsJson = serde_json::from_str(&read_text(path)?).map_err(|e| parse_err(path, e))?;
        return Ok((j.to_moment_set()?, j.meta));
    }
    let (meta, header, rows) = read_csv(path)?;
    let (cn, cv, ce) = (column(path, &header, "n")?, column(path, &header, "value")?, column(path, &header, "std_error")?);
    let cs = header.iter().position(|h| h == "replica_scatter");
    let mut values = Vec::with_capacity(rows.len());
    let mut errors = Vec::with_capacity(rows.len());
    let mut scatter = Vec::new();
    for (i, r) in rows.iter().enumerate() {
        if r.len() <= cn.max(cv).max(ce) {
            return Err(parse_err(path, format!("row {} is short", i + 1)));
        }
        if r[cn] != i.to_string() {
            return Err(parse_err(path, format!("expected moment index {i}, found {:?}", r[cn])));
        }
        values.push(num(path, &r[cv])?);
        errors.push(num(path, &r[ce])?);
        if let Some(s) = cs.and_then(|c| r.get(c)).filter(|s| !s.is_empty()) {
            scatter.push(num(path, s)?);
        }
    }
    if values.is_empty() {
        return Err(parse_err(path, "no moments"));
    }
    let provenance: Provenance = meta.get("provenance").map_or("ED", |s| s.as_str()).parse()?;
    let mut m = MomentSet::exact(values, provenance);
    m.std_errors = errors;
    m.replica_scatter = (scatter.len() == m.len()).then_some(scatter);
    m.replicas = meta_num(path, &meta, "replicas")?.unwrap_or(1);
    m.shots = meta_num(path, &meta, "shots")?.unwrap_or(0);
    m.rescale = rescale_from_meta(path, &meta)?;
    Ok((m, meta))
}

fn grid_kind_name(k: GridKind) -> &'static str {
    match k {
        GridKind::Chebyshev => "chebyshev",
        GridKind::Custom => "custom",
        GridKind::Histogram => "histogram",
    }
}

pub fn write_dos_csv(path: &Path, dos: &DosCurve, extra: &Meta) -> Result<(), CliError> {
    let mut meta = extra.clone();
    meta.insert("order".into(), dos.order.to_string());
    meta.insert("grid".into(), grid_kind_name(dos.grid.kind).into());
    meta.insert("points".into(), dos.grid.len().to_string());
    if let Some(k) = dos.kernel {
        meta.insert("kernel".into(), k.to_string());
    }
    if let Some(p) = dos.provenance {
        meta.insert("provenance".into(), p.to_string());
    }
    rescale_meta(&mut meta, &dos.rescale);
    let pe = dos.physical_energies();
    let pv = dos.physical_values();
    let rows = (0..dos.grid.len())
        .map(|i| {
            let mut r = vec![dos.grid.points[i].to_string(), dos.grid.weights[i].to_string(), dos.values[i].to_string()];
            if let (Some(e), Some(v)) = (&pe, &pv) {
                r.push(e[i].to_string());
                r.push(v[i].to_string());
            }
            r
        })
        .collect::<Vec<_>>();
    let header: &[&str] = if pe.is_some() {
        &["x", "weight", "dos", "energy", "dos_physical"]
    } else {
        &["x", "weight", "dos"]
    };
    write_csv(path, &meta, header, &rows)
}

pub fn read_dos(path: &Path) -> Result<(DosCurve, Meta), CliError> {
    let (meta, header, rows) = read_csv(path)?;
    let (cx, cw, cd) = (column(path, &header, "x")?, column(path, &header, "weight")?, column(path, &header, "dos")?);
    let mut points = Vec::new();
    let mut weights = Vec::new();
    let mut values = Vec::new();
    for r in &rows {
        if r.len() <= cx.max(cw).max(cd) {
            return Err(parse_err(path, "short row"));
        }
        points.push(num(path, &r[cx])?);
        weights.push(num(path, &r[cw])?);
        values.push(num(path, &r[cd])?);
    }
    if points.len() < 2 || points.windows(2).any(|w| w[1] <= w[0]) {
        return Err(parse_err(path, "grid must have at least two strictly increasing points"));
    }
    let kind = match meta.get("grid").map(String::as_str) {
        Some("chebyshev") => GridKind::Chebyshev,
        Some("histogram") => GridKind::Histogram,
        _ => GridKind::Custom,
    };
    let kernel = meta.get("kernel").map(|k| k.parse::<Kernel>()).transpose()?;
    let provenance = meta.get("provenance").map(|p| p.parse::<Provenance>()).transpose()?;
    let dos = DosCurve {
        grid: Grid { points, weights, kind },
        values,
        order: meta_num(path, &meta, "order")?.unwrap_or(0),
        kernel,
        provenance,
        rescale: rescale_from_meta(path, &meta)?,
    };
    Ok((dos, meta))
}

pub fn write_spectrum_csv(path: &Path, s: &SpectrumRecord, rescale: &Option<RescaleParams>) -> Result<(), CliError> {
    let mut meta = Meta::new();
    meta.insert("n_qubits".into(), s.n_qubits.to_string());
    meta.insert("dim".into(), s.eigenvalues.len().to_string());
    if let Some([jx, jy, jz, l]) = s.couplings {
        meta.insert("jx".into(), jx.to_string());
        meta.insert("jy".into(), jy.to_string());
        meta.insert("jz".into(), jz.to_string());
        meta.insert("lambda".into(), l.to_string());
    }
    rescale_meta(&mut meta, rescale);
    let rows = s
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, e)| {
            let x = s.rescaled.as_ref().map_or(String::new(), |r| r[k].to_string());
            vec![k.to_string(), e.to_string(), x]
        })
        .collect::<Vec<_>>();
    write_csv(path, &meta, &["k", "energy", "rescaled"], &rows)
}

pub fn read_spectrum(path: &Path) -> Result<SpectrumRecord, CliError> {
    let (meta, header, rows) = read_csv(path)?;
    let ce = column(path, &header, "energy")?;
    let cr = header.iter().position(|h| h == "rescaled");
    let mut eigenvalues = Vec::new();
    let mut rescaled = Vec::new();
    for r in &rows {
        eigenvalues.push(num(path, r.get(ce).ok_or_else(|| parse_err(path, "short row"))?)?);
        if let Some(s) = cr.and_then(|c| r.get(c)).filter(|s| !s.is_empty()) {
            rescaled.push(num(path, s)?);
        }
    }
    if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
        return Err(parse_err(path, "eigenvalues must be ascending"));
    }
    let n_qubits = meta_num(path, &meta, "n_qubits")?.unwrap_or_else(|| eigenvalues.len().trailing_zeros() as usize);
    let mut s = SpectrumRecord { n_qubits, rescaled: None, couplings: None, eigenvalues };
    if rescaled.len() == s.eigenvalues.len() {
        s.rescaled = Some(rescaled);
    } else if let Some(p) = rescale_from_meta(path, &meta)? {
        s.apply_rescale(&p);
    }
    Ok(s)
}

/// Rescaled and (optional) physical thermodynamics side by side.
pub fn write_thermo_csv(
    path: &Path,
    rescaled: &ThermoTable,
    physical: Option<&ThermoTable>,
    extra: &Meta,
) -> Result<(), CliError> {
    let mut meta = extra.clone();
    meta.insert("clipped_points".into(), rescaled.clipped_points.to_string());
    let monotone = energy_monotone(rescaled);
    meta.insert("energy_monotone".into(), monotone.to_string());
    let mut header = vec!["beta", "z", "log_z", "free_energy", "energy", "entropy", "energy_monotone"];
    if physical.is_some() {
        header.extend(["z_phys", "log_z_phys", "free_energy_phys", "energy_phys", "entropy_phys"]);
    }
    let rows = rescaled
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let ok = i == 0 || rescaled.rows[i - 1].energy >= r.energy - 1e-12 * r.energy.abs().max(1.0);
            let mut v = vec![
                r.beta.to_string(),
                r.z.to_string(),
                r.log_z.to_string(),
                r.free_energy.to_string(),
                r.energy.to_string(),
                r.entropy.to_string(),
                u8::from(ok).to_string(),
            ];
            if let Some(p) = physical {
                let q = &p.rows[i];
                v.extend([q.z, q.log_z, q.free_energy, q.energy, q.entropy].map(|x| x.to_string()));
            }
            v
        })
        .collect::<Vec<_>>();
    write_csv(path, &meta, &header, &rows)
}

/// `E(β)` non-increasing along an ascending β grid.
pub fn energy_monotone(t: &ThermoTable) -> bool {
    t.rows
        .windows(2)
        .all(|w| w[1].beta < w[0].beta || w[0].energy >= w[1].energy - 1e-12 * w[1].energy.abs().max(1.0))
}

/// Generic CSV table with metadata header.
pub fn write_table(path: &Path, meta: &Meta, header: &[&str], rows: &[Vec<String>]) -> Result<(), CliError> {
    write_csv(path, meta, header, rows)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    write_text(path, &s)
}
