//! High-level runs shared by the CLI and the integration tests. Replicas
//! run in parallel and are collected in index order, so results do not
//! depend on the thread count.

use qkpm_core::estimator::{
    arccos_moments_from_spectrum, build_moment_circuit, circuit_expectations, hamiltonian_for_order, hqc_cost,
    aggregate_shot_moments, replica_moments_exact, sample_replica_moments, st_replica_moments, CostReport,
    MomentCircuitPlan,
};
use qkpm_core::hamiltonian::{arccos_coefficients, build_xyz_staggered, HamiltonianSpec, RescaleParams};
use qkpm_core::kpm::{
    dos_histogram_from_ed, histogram_bins_for_order, kpm_reconstruct, moments_by_ed, moments_by_recursion,
    thermodynamics, DosCurve, EnergyUnits, Grid, MomentSet, Provenance, ThermoTable,
};
use qkpm_core::random::{
    entropy_benchmark, page_value, prepare_random_state, stochastic_trace, BenchmarkPoint, RandomCircuitSpec, Scheme,
    TraceMode,
};
use qkpm_core::statevector::{Basis, Circuit};
use rayon::prelude::*;

use crate::config::{KpmConfig, Method, RunConfig, ThermoConfig};
use crate::io::Meta;
use crate::oracle::{self, rescale_model, DosComparison, SpectrumRecord};
use crate::CliError;

/// Runs `f` on a pool of `threads` workers (0 = all cores).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// The model at every stage of preparation.
#[derive(Debug, Clone)]
pub struct Model {
    pub h: HamiltonianSpec,
    pub h_tilde: HamiltonianSpec,
    pub params: RescaleParams,
    /// Present when the bounds were exact.
    pub spectrum: Option<SpectrumRecord>,
    /// Operator the circuits evolve under, per the arc-cosine order.
    pub h_k: HamiltonianSpec,
}

impl Model {
    pub fn build(cfg: &RunConfig) -> Result<Self, CliError> {
        let m = &cfg.model;
        let h = build_xyz_staggered(m.l, m.jx, m.jy, m.jz, m.lambda)?;
        let (h_tilde, params, spectrum) = rescale_model(&h, m.bounds_method, m.epsilon)?;
        let h_k = hamiltonian_for_order(&h_tilde, &params, cfg.estimator.k)?;
        Ok(Self { h, h_tilde, params, spectrum, h_k })
    }

    /// The spectrum, diagonalising now if the bounds did not need it.
    pub fn spectrum(&mut self) -> Result<&SpectrumRecord, CliError> {
        if self.spectrum.is_none() {
            let mut s = oracle::exact_diagonalize(&self.h)?;
            s.apply_rescale(&self.params);
            self.spectrum = Some(s);
        }
        Ok(self.spectrum.as_ref().expect("set above"))
    }

    pub fn meta(&self) -> Meta {
        let mut meta = Meta::new();
        meta.insert("n_qubits".into(), self.h.n_qubits().to_string());
        if let Some(c) = self.h.couplings {
            meta.insert("jx".into(), c.jx.to_string());
            meta.insert("jy".into(), c.jy.to_string());
            meta.insert("jz".into(), c.jz.to_string());
            meta.insert("lambda".into(), c.lambda.to_string());
        }
        meta
    }
}

pub fn random_spec(cfg: &RunConfig) -> RandomCircuitSpec {
    let r = &cfg.random;
    let mut spec = RandomCircuitSpec::new(cfg.model.l, r.scheme, r.layers, r.seed);
    spec.s = (r.s > 0).then_some(r.s);
    spec
}

fn per_replica<T: Send>(replicas: usize, f: impl Fn(u64) -> qkpm_core::Result<T> + Sync + Send) -> Result<Vec<T>, CliError> {
    Ok((0..replicas as u64).into_par_iter().map(f).collect::<qkpm_core::Result<Vec<T>>>()?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CostRow {
    pub replica: u64,
    pub n: usize,
    pub basis: Basis,
    pub report: CostReport,
}

#[derive(Debug, Clone)]
pub struct MomentsRun {
    pub moments: MomentSet,
    pub costs: Vec<CostRow>,
    /// `(file stem, circuit)` when circuit dumps were requested.
    pub circuits: Vec<(String, Circuit)>,
    pub model: Model,
}

/// Eigenvalues of the truncated arc-cosine series applied to the rescaled spectrum.
fn arccos_series_spectrum(rescaled: &[f64], k: usize) -> Vec<f64> {
    let c = arccos_coefficients(k);
    rescaled
        .iter()
        .map(|&x| c.iter().enumerate().map(|(j, c)| c * x.powi(2 * j as i32 + 1)).sum())
        .collect()
}

pub fn compute_moments(cfg: &RunConfig, keep_circuits: bool) -> Result<MomentsRun, CliError> {
    cfg.validate()?;
    let mut model = Model::build(cfg)?;
    let est = &cfg.estimator;
    let (m_max, steps, replicas) = (est.m, est.steps, cfg.random.replicas);
    let spec = random_spec(cfg);
    let circuit_method = matches!(est.method, Method::Recursion | Method::St | Method::Circuit | Method::CircuitShots);
    if circuit_method {
        spec.validate()?;
    }
    let mut moments = match est.method {
        Method::Ed => moments_by_ed(model.spectrum()?.rescaled.as_ref().expect("rescaled"), m_max)?,
        Method::Arccos => {
            let x = arccos_series_spectrum(model.spectrum()?.rescaled.as_ref().expect("rescaled"), est.k);
            arccos_moments_from_spectrum(&x, m_max)?
        }
        Method::Recursion => {
            let h = &model.h_tilde;
            let sets = per_replica(replicas, |r| moments_by_recursion(h, &prepare_random_state(&spec.with_replica(r))?, m_max))?;
            MomentSet::average(&sets, Provenance::Recursion)?
        }
        Method::St => {
            let h = &model.h_k;
            let sets = per_replica(replicas, |r| {
                let psi = prepare_random_state(&spec.with_replica(r))?;
                Ok(MomentSet::exact(st_replica_moments(h, &psi, m_max, steps)?, Provenance::St))
            })?;
            MomentSet::average(&sets, Provenance::St)?
        }
        Method::Circuit => {
            let h = &model.h_k;
            let sets = per_replica(replicas, |r| {
                let psi = prepare_random_state(&spec.with_replica(r))?;
                Ok(MomentSet::exact(replica_moments_exact(h, &psi, m_max, steps)?, Provenance::CircuitExact))
            })?;
            MomentSet::average(&sets, Provenance::CircuitExact)?
        }
        Method::CircuitShots => {
            let h = &model.h_k;
            let seed = cfg.random.seed;
            let per = per_replica(replicas, |r| {
                let psi = prepare_random_state(&spec.with_replica(r))?;
                let e = circuit_expectations(h, &psi, m_max, steps)?;
                sample_replica_moments(&e, est.shots, seed, r as u32)
            })?;
            aggregate_shot_moments(&per, est.shots)?
        }
    };
    moments.rescale = Some(model.params);
    if !circuit_method {
        moments.replicas = 0;
    }

    // Billing for the circuits the hardware run would need: one per
    // replica and moment, μ_0 excluded.
    let plans: Vec<MomentCircuitPlan> = (0..replicas as u64)
        .flat_map(|r| {
            let spec = spec.with_replica(r);
            (1..=m_max).map(move |n| MomentCircuitPlan::new(n, est.k, steps, spec, model.params.beta_id))
        })
        .collect();
    let h_k = &model.h_k;
    let built: Vec<(CostRow, Option<(String, Circuit)>)> = plans
        .par_iter()
        .map(|p| {
            let c = build_moment_circuit(p, h_k)?;
            let row = CostRow { replica: p.random.replica, n: p.n, basis: p.basis, report: hqc_cost(&c, est.shots) };
            let dump = keep_circuits.then(|| (format!("r{:02}_n{:02}", p.random.replica, p.n), c));
            Ok((row, dump))
        })
        .collect::<qkpm_core::Result<_>>()?;
    let (costs, circuits): (Vec<_>, Vec<_>) = built.into_iter().unzip();
    Ok(MomentsRun { moments, costs, circuits: circuits.into_iter().flatten().collect(), model })
}

/// Expansion order actually used and the curve.
pub fn reconstruct(m: &MomentSet, kpm: &KpmConfig) -> Result<(DosCurve, Meta), CliError> {
    let order = if kpm.order == 0 { m.order() } else { kpm.order };
    // Padding with zeros is only allowed when everything past `keep` is zeroed anyway.
    let padded = kpm.keep > 0 && kpm.keep <= m.order();
    if order > m.order() && !padded {
        return Err(CliError::Config(format!(
            "kpm.order {order} exceeds the {} moments available; set kpm.keep to zero-pad",
            m.order()
        )));
    }
    let mut used = m.resized(order);
    if kpm.keep > 0 && kpm.keep < order {
        used = used.truncated(kpm.keep);
    }
    let dos = kpm_reconstruct(&used, &kpm.kernel.coefficients(order), &Grid::chebyshev(kpm.grid_points)?)?;
    let mut meta = Meta::new();
    meta.insert("moments_available".into(), m.order().to_string());
    meta.insert("order_used".into(), order.to_string());
    meta.insert("kept_through".into(), if kpm.keep > 0 && kpm.keep < order { kpm.keep } else { order }.to_string());
    meta.insert("integral".into(), dos.integral().to_string());
    Ok((dos, meta))
}

/// KPM curve against the histogram of a rescaled spectrum, bins matched to the order.
pub fn compare_with_spectrum(dos: &DosCurve, rescaled: &[f64]) -> Result<DosComparison, CliError> {
    let h = dos_histogram_from_ed(rescaled, histogram_bins_for_order(dos.order))?;
    Ok(oracle::dos_compare_table(dos, &h)?)
}

/// Rescaled table, and the physical one when rescale parameters and a size are known.
pub fn thermo(dos: &DosCurve, n_qubits: Option<usize>, cfg: &ThermoConfig) -> Result<(ThermoTable, Option<ThermoTable>), CliError> {
    let betas = cfg.betas();
    let rescaled = thermodynamics(dos, &betas, EnergyUnits::Rescaled, None)?;
    let physical = match (dos.rescale, n_qubits) {
        (Some(p), Some(n)) => Some(thermodynamics(dos, &betas, EnergyUnits::Physical { a: p.a, b: p.b, n_qubits: n }, None)?),
        _ => None,
    };
    Ok((rescaled, physical))
}

#[derive(Debug, Clone)]
pub struct EntropySeries {
    pub scheme: Scheme,
    pub l: usize,
    pub page: f64,
    pub points: Vec<BenchmarkPoint>,
}

pub fn entropy_bench(cfg: &RunConfig) -> Result<Vec<EntropySeries>, CliError> {
    let b = &cfg.bench;
    let s = (cfg.random.s > 0).then_some(cfg.random.s);
    let jobs: Vec<(Scheme, usize)> = b.schemes.iter().flat_map(|&sc| b.entropy_sizes.iter().map(move |&l| (sc, l))).collect();
    Ok(jobs
        .par_iter()
        .map(|&(scheme, l)| {
            Ok(EntropySeries {
                scheme,
                l,
                page: page_value(l)?,
                points: entropy_benchmark(scheme, l, s, cfg.random.seed, b.states, b.max_layers)?,
            })
        })
        .collect::<qkpm_core::Result<_>>()?)
}

/// Relative trace errors `|Θ − tr H/D| / √(tr H²/D)` for one (scheme, L, depth).
#[derive(Debug, Clone, PartialEq)]
pub struct TracePoint {
    pub scheme: Scheme,
    pub l: usize,
    pub depth: usize,
    pub replicas: usize,
    pub errors: Vec<f64>,
}

impl TracePoint {
    pub fn mean(&self) -> f64 {
        self.errors.iter().sum::<f64>() / self.errors.len() as f64
    }
}

/// `√(tr H²/D)` from the Pauli coefficients.
pub fn rms_scale(h: &HamiltonianSpec) -> f64 {
    let id = h.identity_coefficient();
    (h.pauli_terms().map(|t| t.coefficient * t.coefficient).sum::<f64>() + id * id).sqrt()
}

/// One trace-error sample per state: state `i` uses master seed `seed + i`
/// and replicas `0..R` under it.
pub fn trace_errors(h: &HamiltonianSpec, spec: &RandomCircuitSpec, states: usize, replicas: usize) -> Result<Vec<f64>, CliError> {
    let (tau, scale) = (h.normalized_trace(), rms_scale(h));
    Ok((0..states as u64)
        .into_par_iter()
        .map(|i| {
            let spec = RandomCircuitSpec { seed: spec.seed.wrapping_add(i), ..*spec };
            let t = stochastic_trace(|psi| h.apply(psi), &spec, replicas, TraceMode::Normalized)?;
            Ok((t.mean - tau).norm() / scale)
        })
        .collect::<qkpm_core::Result<_>>()?)
}

pub fn trace_bench(cfg: &RunConfig) -> Result<Vec<TracePoint>, CliError> {
    let (b, m) = (&cfg.bench, &cfg.model);
    let mut out = Vec::new();
    for &scheme in &b.schemes {
        for &l in &b.trace_sizes {
            let h = build_xyz_staggered(l, m.jx, m.jy, m.jz, m.lambda)?;
            for depth in 1..=b.max_layers {
                let mut spec = RandomCircuitSpec::new(l, scheme, depth, cfg.random.seed);
                spec.s = (cfg.random.s > 0).then_some(cfg.random.s);
                let errors = trace_errors(&h, &spec, b.states, cfg.random.replicas)?;
                out.push(TracePoint { scheme, l, depth, replicas: cfg.random.replicas, errors });
            }
        }
    }
    Ok(out)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_power_law() {
        let x = [64.0, 256.0, 1024.0, 4096.0];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(-0.5)).collect();
        assert!((log_log_slope(&x, &y) + 0.5).abs() < 1e-12);
    }

    #[test]
    fn ed_dispatch_at_l8() {
        let mut cfg = RunConfig::default();
        cfg.model.l = 8;
        cfg.estimator.m = 10;
        cfg.random.replicas = 1;
        let run = compute_moments(&cfg, false).unwrap();
        assert_eq!(run.moments.provenance, Provenance::Ed);
        assert!((run.moments.values[0] - 1.0).abs() < 1e-12);
        assert_eq!(run.costs.len(), 10);
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let mut cfg = RunConfig::default();
        cfg.model.l = 6;
        cfg.estimator.m = 6;
        cfg.estimator.method = Method::CircuitShots;
        cfg.random.replicas = 3;
        let a = with_threads(1, || compute_moments(&cfg, false)).unwrap().unwrap();
        let b = with_threads(3, || compute_moments(&cfg, false)).unwrap().unwrap();
        assert_eq!(a.moments, b.moments);
        assert_eq!(a.costs, b.costs);
    }
}
