//! Reproducible runs: configuration headers, randomized gap-search
//! campaigns, CSV output and the command-line front end.

pub mod cli;

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::duality::{
    check_prop2_transport, g_subadditivity_gap, reduction_candidates, strong_superadditivity_gap,
    AdditivityGap, ReductionMode,
};
use crate::error::{Error, Result};
use crate::optim::SearchOptions;
use crate::purity::{
    multiplicativity_gap, werner_holevo_channel, FilterOp, KrausChannel, SweepRow,
};
use crate::roof::RoofOptions;
use crate::spectra::json::{
    density_from_json, density_to_json, operator_from_json, operator_to_json,
};
use crate::spectra::{sample, BipartiteDims, CVec};

/// Every artifact starts with the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: String,
    pub seed: u64,
    pub restarts: usize,
    pub tol: Option<f64>,
    pub dims: BipartiteDims,
    pub input: Option<String>,
    pub output: Option<String>,
    /// Subcommand-specific parameters.
    pub params: Map<String, Value>,
}

impl RunConfig {
    pub fn search(&self) -> SearchOptions {
        SearchOptions::default()
            .with_restarts(self.restarts)
            .with_seed(self.seed)
    }

    pub fn roof(&self) -> RoofOptions {
        RoofOptions::default()
            .with_restarts(self.restarts)
            .with_seed(self.seed)
    }
}

/// `{"config": …, "result": …}` as pretty JSON with a trailing newline.
pub fn artifact(config: &RunConfig, result: Value) -> String {
    let mut s = serde_json::to_string_pretty(&json!({ "config": config, "result": result }))
        .expect("artifact serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapKind {
    GSubadd,
    StrongSuperadd,
    NuMult,
}

impl GapKind {
    pub fn default_tol(&self) -> f64 {
        match self {
            GapKind::GSubadd | GapKind::StrongSuperadd => 1e-4,
            GapKind::NuMult => 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignConfig {
    pub kind: GapKind,
    pub trials: usize,
    pub dims: BipartiteDims,
    pub seed: u64,
    pub restarts: usize,
    pub tol: f64,
    /// Schatten index for `nu_mult`.
    pub q: f64,
    /// Use the Werner–Holevo channel of this dimension for `nu_mult`
    /// instead of random filter channels.
    pub werner_holevo: Option<usize>,
    pub timings: bool,
}

impl CampaignConfig {
    pub fn new(kind: GapKind, trials: usize, dims: BipartiteDims, seed: u64) -> Self {
        Self {
            kind,
            trials,
            dims,
            seed,
            restarts: 16,
            tol: kind.default_tol(),
            q: 2.0,
            werner_holevo: None,
            timings: false,
        }
    }

    /// Sampling distribution, recorded alongside results.
    pub fn sampler(&self) -> String {
        match self.kind {
            GapKind::GSubadd => "M = (H/||H|| + 1)/2 for GUE H, clipped to [1e-6, 1]".into(),
            GapKind::StrongSuperadd => "two-copy Ginibre-induced state of rank 2".into(),
            GapKind::NuMult => match self.werner_holevo {
                Some(d) => format!("Werner-Holevo channel, d = {d}"),
                None => "filter channels of sampled M with p = 1 - 1/q".into(),
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignRecord {
    pub trial: usize,
    /// Seed of the searches in this trial.
    pub search_seed: u64,
    /// Everything needed to replay the trial.
    pub input: Value,
    pub gap: AdditivityGapRecord,
    pub violation: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub transport: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub wall_time_ms: Option<f64>,
}

/// Serializable mirror of [`AdditivityGap`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdditivityGapRecord {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub direction: String,
    pub estimated: bool,
}

impl From<AdditivityGap> for AdditivityGapRecord {
    fn from(g: AdditivityGap) -> Self {
        let direction = serde_json::to_value(g.direction)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        Self {
            lhs: g.lhs,
            rhs: g.rhs,
            gap: g.gap,
            direction,
            estimated: g.estimated,
        }
    }
}

fn check_campaign(cfg: &CampaignConfig) -> Result<()> {
    match cfg.kind {
        GapKind::StrongSuperadd if cfg.dims.dim_a != 2 || cfg.dims.dim_b != 2 => {
            Err(Error::Unsupported(format!(
                "strong_superadd campaigns need 2x2 copies, got {}x{}",
                cfg.dims.dim_a, cfg.dims.dim_b
            )))
        }
        GapKind::NuMult if cfg.werner_holevo.is_none() && !(cfg.q > 1.0) => Err(Error::param(
            format!("nu_mult with filter channels needs q > 1, got {}", cfg.q),
        )),
        _ => Ok(()),
    }
}

fn sample_input(cfg: &CampaignConfig, trial: usize) -> (u64, Value) {
    let mut rng = sample::rng_for(cfg.seed, trial as u64);
    let search_seed: u64 = rng.random();
    let single = BipartiteDims::single(cfg.dims.dim_a, cfg.dims.dim_b);
    let input = match cfg.kind {
        GapKind::GSubadd => json!({
            "m1": operator_to_json(&sample::filter_m(&mut rng, single)),
            "m2": operator_to_json(&sample::filter_m(&mut rng, single)),
        }),
        GapKind::StrongSuperadd => {
            let two = BipartiteDims::new(single.dim_a, single.dim_b, 2).expect("valid dims");
            json!({ "rho": density_to_json(&sample::ginibre_density_rank(&mut rng, two, 2)) })
        }
        GapKind::NuMult => {
            let (l1, l2) = match cfg.werner_holevo {
                Some(d) => {
                    let wh = werner_holevo_channel(d).expect("d validated");
                    (wh.clone(), wh)
                }
                None => {
                    let p = 1.0 - 1.0 / cfg.q;
                    let mk = |rng: &mut rand_chacha::ChaCha8Rng| {
                        FilterOp::new(sample::filter_m(rng, single), p)
                            .and_then(|f| f.channel())
                            .expect("sampled filter is valid")
                    };
                    (mk(&mut rng), mk(&mut rng))
                }
            };
            json!({ "l1": l1.to_json(), "l2": l2.to_json(), "q": cfg.q })
        }
    };
    (search_seed, input)
}

fn field<'a>(input: &'a Value, name: &str) -> Result<&'a Value> {
    input
        .get(name)
        .ok_or_else(|| Error::schema(name, "missing from campaign input"))
}

/// Recomputes the gap of one trial from its recorded input.
pub fn evaluate_trial(
    cfg: &CampaignConfig,
    search_seed: u64,
    input: &Value,
) -> Result<(AdditivityGap, Option<Value>)> {
    let opts = SearchOptions::default()
        .with_restarts(cfg.restarts)
        .with_seed(search_seed);
    match cfg.kind {
        GapKind::GSubadd => {
            let m1 = operator_from_json(&field(input, "m1")?.to_string())?;
            let m2 = operator_from_json(&field(input, "m2")?.to_string())?;
            Ok((g_subadditivity_gap(&m1, &m2, &opts)?.gap, None))
        }
        GapKind::StrongSuperadd => {
            let rho = density_from_json(&field(input, "rho")?.to_string())?;
            let roof = RoofOptions::default()
                .with_restarts(cfg.restarts)
                .with_seed(search_seed);
            let report = strong_superadditivity_gap(&rho, ReductionMode::Exact, &roof)?;
            let transport = if report.gap.violated(cfg.tol) {
                let [m1, m2] = reduction_candidates(&rho, 10.0, &opts)?;
                let t = check_prop2_transport(
                    &rho,
                    &m1,
                    &m2,
                    cfg.tol,
                    ReductionMode::Exact,
                    &roof,
                    &opts,
                )?;
                Some(json!({
                    "ssa_gap": t.ssa.gap,
                    "g_gap": t.g.gap,
                    "ssa_violated": t.ssa_violated,
                    "g_violated": t.g_violated,
                    "transport_holds": t.transport_holds,
                    "m1": operator_to_json(&m1),
                    "m2": operator_to_json(&m2),
                }))
            } else {
                None
            };
            Ok((report.gap, transport))
        }
        GapKind::NuMult => {
            let l1 = KrausChannel::from_json(&field(input, "l1")?.to_string())?;
            let l2 = KrausChannel::from_json(&field(input, "l2")?.to_string())?;
            let q = field(input, "q")?
                .as_f64()
                .ok_or_else(|| Error::schema("q", "expected a number"))?;
            let r = multiplicativity_gap(&l1, &l2, q, &opts)?;
            let witness = vector_to_json(&r.joint.witness);
            Ok((r.gap, Some(json!({ "witness": witness }))))
        }
    }
}

/// Runs `cfg.trials` independent trials; records come back in trial order.
pub fn gap_search(cfg: &CampaignConfig) -> Result<Vec<CampaignRecord>> {
    check_campaign(cfg)?;
    if let Some(d) = cfg.werner_holevo {
        werner_holevo_channel(d)?;
    }
    (0..cfg.trials)
        .into_par_iter()
        .map(|trial| {
            let start = Instant::now();
            let (search_seed, input) = sample_input(cfg, trial);
            let (gap, transport) = evaluate_trial(cfg, search_seed, &input)?;
            Ok(CampaignRecord {
                trial,
                search_seed,
                input,
                violation: gap.violated(cfg.tol),
                gap: gap.into(),
                transport,
                wall_time_ms: cfg.timings.then(|| start.elapsed().as_secs_f64() * 1e3),
            })
        })
        .collect()
}

/// Gap of a recorded trial, recomputed from its stored input.
pub fn replay(cfg: &CampaignConfig, record: &CampaignRecord) -> Result<f64> {
    Ok(evaluate_trial(cfg, record.search_seed, &record.input)?
        .0
        .gap)
}

pub fn vector_to_json(v: &CVec) -> Value {
    Value::Array(v.iter().map(|z| json!([z.re, z.im])).collect())
}

pub const SWEEP_HEADER: &str = "p,h_p,h_p_pow_inv,exp_g,gap";

fn sig12(x: f64) -> String {
    format!("{x:.11e}")
}

/// Sweep rows as CSV with 12 significant digits and LF line endings.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(SWEEP_HEADER);
    out.push('\n');
    for r in rows {
        let cells = [r.p, r.h_p, r.h_p_pow_inv, r.exp_g, r.gap].map(sig12);
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

pub fn emit_sweep_csv(rows: &[SweepRow], path: &Path) -> Result<()> {
    let mut f = std::fs::File::create(path)?;
    f.write_all(sweep_csv(rows).as_bytes())?;
    Ok(())
}

pub fn read_sweep_csv(path: &Path) -> Result<Vec<SweepRow>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines();
    if lines.next() != Some(SWEEP_HEADER) {
        return Err(Error::schema(
            "header",
            format!("expected `{SWEEP_HEADER}`"),
        ));
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let cells: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::schema(format!("row[{i}]"), e.to_string()))?;
            if cells.len() != 5 {
                return Err(Error::schema(format!("row[{i}]"), "expected 5 columns"));
            }
            Ok(SweepRow {
                p: cells[0],
                h_p: cells[1],
                h_p_pow_inv: cells[2],
                exp_g: cells[3],
                gap: cells[4],
            })
        })
        .collect()
}

#[cfg(test)]
mod tests;
