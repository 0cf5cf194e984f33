//! Monte Carlo sweeps over random geometric topologies.
//!
//! For every `(N, radius)` cell the harness draws `samples_per_cell`
//! connected topologies and runs all three schemes on each one for every
//! packet error rate. Samples are grouped by their measured average degree
//! and reduced to:
//!
//! - `mean_slots`: mean slots to synchronize over converged runs,
//! - `mean_rpg`: mean over samples of `U_DBS slots / coded slots`, paired on
//!   the same topology,
//! - `mean_ops`: mean operation count over converged runs.
//!
//! Every random stream is derived from `root_seed` and the work item's
//! coordinates, and aggregation runs sequentially over a stably ordered
//! result list, so output bytes do not depend on the worker count.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coding::{BlockStore, DEFAULT_PAYLOAD_LEN};
use crate::error::{Error, Result};
use crate::rng;
use crate::sim::{self, LossModel, Scheme, SimConfig};
use crate::topology::{Topology, DEFAULT_MAX_REJECTIONS};

const TOPOLOGY_STREAM: u64 = 0x746f_706f;
const STORE_STREAM: u64 = 0x7374_6f72;
const SIM_STREAM: u64 = 0x7369_6d75;

fn default_bucket_width() -> f64 {
    0.5
}

fn default_payload_len() -> usize {
    DEFAULT_PAYLOAD_LEN
}

fn default_max_rejections() -> u32 {
    DEFAULT_MAX_REJECTIONS
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub node_sizes: Vec<usize>,
    pub pe_values: Vec<f64>,
    pub radius_grid: Vec<f64>,
    pub samples_per_cell: usize,
    pub root_seed: u64,
    #[serde(default = "default_bucket_width")]
    pub degree_bucket_width: f64,
    #[serde(default = "default_payload_len")]
    pub payload_len: usize,
    #[serde(default = "default_max_rejections")]
    pub max_rejections: u32,
    #[serde(default)]
    pub loss_model: LossModel,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        if self.node_sizes.is_empty() {
            return Err(Error::param("node_sizes", "empty"));
        }
        if self.pe_values.is_empty() {
            return Err(Error::param("pe_values", "empty"));
        }
        if self.radius_grid.is_empty() {
            return Err(Error::param("radius_grid", "empty"));
        }
        if self.samples_per_cell == 0 {
            return Err(Error::param("samples_per_cell", "must be at least 1"));
        }
        if let Some(pe) = self.pe_values.iter().find(|pe| !(0.0..=1.0).contains(*pe)) {
            return Err(Error::param("pe_values", format!("{pe} outside [0, 1]")));
        }
        if !(self.degree_bucket_width > 0.0 && self.degree_bucket_width.is_finite()) {
            return Err(Error::param("degree_bucket_width", "must be positive"));
        }
        self.bucket_width()?;
        Ok(())
    }

    /// Reads TOML, or JSON when the file ends in `.json`.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let parsed = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| e.to_string())
        } else {
            toml::from_str(&text).map_err(|e| e.to_string())
        };
        let cfg: SweepConfig = parsed.map_err(|message| Error::Parse {
            path: path.to_owned(),
            message,
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn bucket_width(&self) -> Result<Ratio<u64>> {
        let w = Ratio::<i64>::approximate_float(self.degree_bucket_width)
            .filter(|w| *w.numer() > 0)
            .ok_or_else(|| Error::param("degree_bucket_width", "not representable"))?;
        Ok(Ratio::new(*w.numer() as u64, *w.denom() as u64))
    }
}

/// Index of the degree bucket containing `avg`: `floor(avg / width)`.
pub fn bucket_index(avg: Ratio<u64>, width: Ratio<u64>) -> u64 {
    (avg / width).to_integer()
}

fn bucket_value(index: u64, width: Ratio<u64>) -> f64 {
    (index * width.numer()) as f64 / *width.denom() as f64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct RunSummary {
    pub slots: u32,
    pub converged: bool,
    pub ops: u64,
    pub skipped_turns: u32,
}

/// All runs on one topology sample.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SampleRun {
    pub n: usize,
    pub radius_index: usize,
    pub sample_index: usize,
    pub edge_count: usize,
    /// Indexed by pe position in the config, then by `Scheme::ALL` order.
    pub runs: Vec<[RunSummary; 3]>,
}

impl SampleRun {
    pub fn average_degree(&self) -> Ratio<u64> {
        Ratio::new(2 * self.edge_count as u64, self.n as u64)
    }

    pub fn run(&self, pe_index: usize, scheme: Scheme) -> RunSummary {
        self.runs[pe_index][scheme_index(scheme)]
    }
}

fn scheme_index(s: Scheme) -> usize {
    Scheme::ALL
        .iter()
        .position(|&x| x == s)
        .expect("scheme listed")
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentRecord {
    pub scheme: Scheme,
    pub n: usize,
    pub pe: f64,
    pub degree_bucket: f64,
    /// Converged runs contributing to the means.
    pub n_samples: usize,
    pub mean_slots: f64,
    pub mean_rpg: Option<f64>,
    pub mean_ops: f64,
    pub convergence_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepReport {
    pub records: Vec<ExperimentRecord>,
    pub samples: Vec<SampleRun>,
    /// `(n, radius)` cells where at least one sample hit the rejection cap.
    pub empty_cells: Vec<(usize, f64)>,
}

/// Mean slots to synchronize.
pub fn compute_sd(slots: &[u32]) -> Result<f64> {
    if slots.is_empty() {
        return Err(Error::EmptySamples);
    }
    Ok(slots.iter().map(|&s| s as f64).sum::<f64>() / slots.len() as f64)
}

/// Mean of per-sample ratios `uncoded / coded`.
pub fn compute_gd(pairs: &[(u32, u32)]) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::EmptySamples);
    }
    if pairs.iter().any(|&(_, coded)| coded == 0) {
        return Err(Error::param("pairs", "coded slot count of zero"));
    }
    Ok(pairs.iter().map(|&(u, c)| u as f64 / c as f64).sum::<f64>() / pairs.len() as f64)
}

fn run_sample(
    cfg: &SweepConfig,
    n: usize,
    radius_index: usize,
    sample_index: usize,
) -> Result<Option<SampleRun>> {
    let coords = [n as u64, radius_index as u64, sample_index as u64];
    let radius = cfg.radius_grid[radius_index];
    let mut topo_rng = rng::stream(
        cfg.root_seed,
        &[TOPOLOGY_STREAM, coords[0], coords[1], coords[2]],
    );
    let t = match Topology::sample_connected(n, radius, cfg.max_rejections, &mut topo_rng) {
        Ok(t) => t,
        Err(Error::RejectionCapExceeded { .. }) => return Ok(None),
        Err(e) => return Err(e),
    };
    run_topology(cfg, &t, radius_index, sample_index).map(Some)
}

/// Runs all three schemes at every configured error rate on one topology.
/// `radius_index` and `sample_index` only key the random streams.
pub fn run_topology(
    cfg: &SweepConfig,
    t: &Topology,
    radius_index: usize,
    sample_index: usize,
) -> Result<SampleRun> {
    let n = t.node_count();
    let coords = [n as u64, radius_index as u64, sample_index as u64];
    let mut store_rng = rng::stream(
        cfg.root_seed,
        &[STORE_STREAM, coords[0], coords[1], coords[2]],
    );
    let store = BlockStore::random(n, cfg.payload_len, &mut store_rng)?;
    let runs = cfg
        .pe_values
        .iter()
        .map(|&pe| {
            let mut out = [RunSummary {
                slots: 0,
                converged: false,
                ops: 0,
                skipped_turns: 0,
            }; 3];
            for (slot, scheme) in out.iter_mut().zip(Scheme::ALL) {
                let seed = rng::derive_seed(
                    cfg.root_seed,
                    &[
                        SIM_STREAM,
                        coords[0],
                        coords[1],
                        coords[2],
                        scheme.stream_tag(),
                    ],
                );
                let mut sc = SimConfig::new(scheme, n, pe, seed);
                sc.payload_len = cfg.payload_len;
                sc.loss = cfg.loss_model;
                let r = sim::run(t, sc, &store)?;
                *slot = RunSummary {
                    slots: r.slots,
                    converged: r.converged,
                    ops: r.op_count,
                    skipped_turns: r.skipped_turns,
                };
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SampleRun {
        n,
        radius_index,
        sample_index,
        edge_count: t.edge_count(),
        runs,
    })
}

/// Runs every sample of the sweep and aggregates. `threads` bounds the worker
/// pool; `None` uses every available core.
pub fn run_sweep(cfg: &SweepConfig, threads: Option<usize>) -> Result<SweepReport> {
    cfg.validate()?;
    let work: Vec<(usize, usize, usize)> = cfg
        .node_sizes
        .iter()
        .flat_map(|&n| {
            (0..cfg.radius_grid.len())
                .flat_map(move |r| (0..cfg.samples_per_cell).map(move |s| (n, r, s)))
        })
        .collect();
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t.max(1));
    }
    let pool = builder
        .build()
        .map_err(|e| Error::param("threads", e.to_string()))?;
    let results: Vec<Result<Option<SampleRun>>> = pool.install(|| {
        work.par_iter()
            .map(|&(n, r, s)| run_sample(cfg, n, r, s))
            .collect()
    });

    let mut samples = Vec::with_capacity(results.len());
    let mut empty_cells = Vec::new();
    for (&(n, r, _), res) in work.iter().zip(results) {
        match res? {
            Some(s) => samples.push(s),
            None => {
                let cell = (n, cfg.radius_grid[r]);
                if empty_cells.last() != Some(&cell) {
                    empty_cells.push(cell);
                }
            }
        }
    }
    let records = aggregate(cfg, &samples)?;
    Ok(SweepReport {
        records,
        samples,
        empty_cells,
    })
}

/// Reduces samples to one record per `(scheme, N, pe, degree bucket)`.
pub fn aggregate(cfg: &SweepConfig, samples: &[SampleRun]) -> Result<Vec<ExperimentRecord>> {
    let width = cfg.bucket_width()?;
    let mut pe_order: Vec<usize> = (0..cfg.pe_values.len()).collect();
    pe_order.sort_by(|&a, &b| cfg.pe_values[a].total_cmp(&cfg.pe_values[b]));

    let mut cells: BTreeMap<(usize, u64), Vec<&SampleRun>> = BTreeMap::new();
    for s in samples {
        cells
            .entry((s.n, bucket_index(s.average_degree(), width)))
            .or_default()
            .push(s);
    }

    let mut records = Vec::new();
    for scheme in Scheme::ALL {
        let mut sizes: Vec<usize> = cfg.node_sizes.clone();
        sizes.sort_unstable();
        sizes.dedup();
        for n in sizes {
            for &pe_index in &pe_order {
                for (_, bucket) in cells.range((n, 0)..=(n, u64::MAX)) {
                    if let Some(rec) =
                        record_for(scheme, pe_index, cfg.pe_values[pe_index], bucket, width)?
                    {
                        records.push(rec);
                    }
                }
            }
        }
    }
    Ok(records)
}

fn record_for(
    scheme: Scheme,
    pe_index: usize,
    pe: f64,
    bucket: &[&SampleRun],
    width: Ratio<u64>,
) -> Result<Option<ExperimentRecord>> {
    let first = bucket[0];
    let converged: Vec<RunSummary> = bucket
        .iter()
        .map(|s| s.run(pe_index, scheme))
        .filter(|r| r.converged)
        .collect();
    if converged.is_empty() {
        return Ok(None);
    }
    let slots: Vec<u32> = converged.iter().map(|r| r.slots).collect();
    let mean_ops = converged.iter().map(|r| r.ops as f64).sum::<f64>() / converged.len() as f64;
    let mean_rpg = if scheme.is_coded() {
        let pairs: Vec<(u32, u32)> = bucket
            .iter()
            .map(|s| (s.run(pe_index, Scheme::UDbs), s.run(pe_index, scheme)))
            .filter(|(u, c)| u.converged && c.converged)
            .map(|(u, c)| (u.slots, c.slots))
            .collect();
        if pairs.is_empty() {
            None
        } else {
            Some(compute_gd(&pairs)?)
        }
    } else {
        None
    };
    Ok(Some(ExperimentRecord {
        scheme,
        n: first.n,
        pe,
        degree_bucket: bucket_value(bucket_index(first.average_degree(), width), width),
        n_samples: converged.len(),
        mean_slots: compute_sd(&slots)?,
        mean_rpg,
        mean_ops,
        convergence_rate: converged.len() as f64 / bucket.len() as f64,
    }))
}

pub const CSV_HEADER: &str =
    "scheme,n,pe,degree_bucket,n_samples,mean_slots,mean_rpg,mean_ops,convergence_rate";

pub fn write_csv_to<W: Write>(records: &[ExperimentRecord], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        let rpg = r.mean_rpg.map(|g| format!("{g:.6}")).unwrap_or_default();
        writeln!(
            w,
            "{},{},{},{:?},{},{:.6},{},{:.6},{:.6}",
            r.scheme.tag(),
            r.n,
            r.pe,
            r.degree_bucket,
            r.n_samples,
            r.mean_slots,
            rpg,
            r.mean_ops,
            r.convergence_rate
        )?;
    }
    Ok(())
}

pub fn to_csv_string(records: &[ExperimentRecord]) -> String {
    let mut buf = Vec::new();
    write_csv_to(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is ascii")
}

pub fn write_csv(records: &[ExperimentRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, to_csv_string(records)).map_err(|e| Error::io(path, e))
}

pub fn write_json(records: &[ExperimentRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(records)?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}
