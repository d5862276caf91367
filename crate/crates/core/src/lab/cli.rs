//! `eofkit` command line. Exit codes: 0 success, 1 error, 2 a campaign found
//! a violation or a check failed.

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use super::{
    artifact, emit_sweep_csv, gap_search, vector_to_json, CampaignConfig, GapKind, RunConfig,
};
use crate::duality::{
    check_prop1_ensemble, check_prop2_transport, conjugate_e, dual_lower_bound, fhat_dual_estimate,
    g_direct, g_eigen, reduction_candidates, GEvalResult, ReductionMode,
};
use crate::error::{Error, Result};
use crate::purity::{
    multiplicativity_gap, nu_q, trotter_sweep, werner_holevo_channel, KrausChannel, DEFAULT_P_GRID,
};
use crate::roof::{eof_roof, wootters_eof, Ensemble};
use crate::spectra::json::{
    density_from_json, density_to_json, operator_from_json, rows_from_matrix,
};
use crate::spectra::{regroup_state, sample, BipartiteDims, DensityMatrix, HermitianOperator};

#[derive(Debug, Parser)]
#[command(
    name = "eofkit",
    version,
    about = "Entanglement of formation and its convex dual"
)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Global {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 16)]
    restarts: usize,
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Local dimensions dA dB.
    #[arg(long, global = true, num_args = 2, value_names = ["DA", "DB"])]
    dims: Option<Vec<usize>>,
    #[arg(long, global = true, default_value_t = 1)]
    copies: usize,
    #[arg(long = "in", global = true)]
    input: Option<PathBuf>,
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, default_value_t = 20)]
    trials: usize,
    #[arg(long, global = true)]
    q: Option<f64>,
    #[arg(long = "p-grid", global = true, value_delimiter = ',')]
    p_grid: Option<Vec<f64>>,
    /// Include wall-clock times (makes outputs run-dependent).
    #[arg(long, global = true)]
    timings: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GForm {
    Direct,
    Eigen,
    Both,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
#[value(rename_all = "snake_case")]
enum Kind {
    GSubadd,
    StrongSuperadd,
    NuMult,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Entanglement of formation of a state.
    Eof {
        /// Closed form (2x2 only) instead of the roof search.
        #[arg(long)]
        wootters: bool,
    },
    /// Conjugate functional E*(X) of an operator.
    Conjugate,
    /// g(M) in direct and/or max-eigenvalue form.
    G {
        #[arg(long, value_enum, default_value_t = GForm::Both)]
        method: GForm,
    },
    /// h_p^{1/p} against exp g(M) along a p grid.
    HpSweep {
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Maximal output purity of a channel.
    NuQ,
    /// Dual estimate of E_F against closed form and weak duality.
    CheckDuality {
        #[arg(long, default_value_t = 20.0)]
        cap: f64,
    },
    /// Direct against max-eigenvalue form of g on random operators.
    CheckLemma2,
    /// Optimal-ensemble (1) or violation-transport (2) pipelines.
    CheckProp {
        #[arg(long, default_value_t = 2)]
        prop: u8,
        #[arg(long, default_value_t = 20.0)]
        cap: f64,
    },
    /// Randomized search for additivity violations.
    GapSearch {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Werner-Holevo dimension for nu_mult.
        #[arg(long)]
        d: Option<usize>,
    },
    /// Werner-Holevo multiplicativity demonstration.
    WhDemo {
        #[arg(long, default_value_t = 3)]
        d: usize,
    },
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Eof { .. } => "eof",
            Command::Conjugate => "conjugate",
            Command::G { .. } => "g",
            Command::HpSweep { .. } => "hp-sweep",
            Command::NuQ => "nu-q",
            Command::CheckDuality { .. } => "check-duality",
            Command::CheckLemma2 => "check-lemma2",
            Command::CheckProp { .. } => "check-prop",
            Command::GapSearch { .. } => "gap-search",
            Command::WhDemo { .. } => "wh-demo",
        }
    }
}

/// Outcome of a subcommand: its JSON result and whether it found a
/// violation or failed a check.
struct Outcome {
    result: Value,
    flagged: bool,
}

impl Outcome {
    fn ok(result: Value) -> Self {
        Self {
            result,
            flagged: false,
        }
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(flagged) => {
            if flagged {
                2
            } else {
                0
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn execute(cli: &Cli) -> Result<bool> {
    let g = &cli.global;
    let dims = match &g.dims {
        Some(d) => BipartiteDims::new(d[0], d[1], g.copies)?,
        None => BipartiteDims::new(2, 2, g.copies)?,
    };
    let mut config = RunConfig {
        command: cli.command.name().to_owned(),
        seed: g.seed,
        restarts: g.restarts,
        tol: g.tol,
        dims,
        input: g.input.as_ref().map(|p| p.display().to_string()),
        output: g.out.as_ref().map(|p| p.display().to_string()),
        params: Map::new(),
    };
    let outcome = dispatch(cli, &mut config)?;
    let text = artifact(&config, outcome.result);
    match &g.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(outcome.flagged)
}

fn read_input(g: &Global) -> Result<String> {
    let path = g
        .input
        .as_ref()
        .ok_or_else(|| Error::param("this subcommand needs --in <file.json>"))?;
    Ok(std::fs::read_to_string(path)?)
}

fn g_json(r: &GEvalResult) -> Value {
    json!({
        "value": r.value,
        "method": r.method,
        "boundary": r.boundary,
        "argmax_tau": r.argmax_tau.as_ref().map(|t| rows_from_matrix(t.matrix())),
        "argmax_state": r.argmax_state.as_ref().map(|s| vector_to_json(s.amplitudes())),
    })
}

fn ensemble_json(e: &Ensemble) -> Value {
    Value::Array(
        e.members()
            .iter()
            .map(|(p, s)| json!({ "weight": p, "state": vector_to_json(s.amplitudes()) }))
            .collect(),
    )
}

fn timed<T>(enabled: bool, f: impl FnOnce() -> Result<T>) -> Result<(T, Option<f64>)> {
    let start = Instant::now();
    let out = f()?;
    Ok((out, enabled.then(|| start.elapsed().as_secs_f64() * 1e3)))
}

fn with_time(mut v: Value, ms: Option<f64>) -> Value {
    if let (Some(ms), Some(obj)) = (ms, v.as_object_mut()) {
        obj.insert("wall_time_ms".into(), json!(ms));
    }
    v
}

fn random_operator(kind: sample::SampleKind, dims: BipartiteDims, seed: u64) -> HermitianOperator {
    match sample::sample(kind, dims, seed) {
        sample::Sample::Operator(h) => h,
        _ => unreachable!("operator sampler"),
    }
}

fn random_density(dims: BipartiteDims, seed: u64) -> DensityMatrix {
    match sample::sample(sample::SampleKind::GinibreDensity, dims, seed) {
        sample::Sample::Density(d) => d,
        _ => unreachable!("density sampler"),
    }
}

fn dispatch(cli: &Cli, config: &mut RunConfig) -> Result<Outcome> {
    let g = &cli.global;
    let search = config.search();
    let roof = config.roof();
    match &cli.command {
        Command::Eof { wootters } => {
            config.params.insert("wootters".into(), json!(wootters));
            let rho = density_from_json(&read_input(g)?)?;
            if *wootters {
                return Ok(Outcome::ok(json!({
                    "value": wootters_eof(&rho)?,
                    "method": "wootters",
                })));
            }
            let (rho, cut) = if rho.dims().copies == 2 {
                (regroup_state(&rho)?, "grouped")
            } else {
                (rho, "single")
            };
            let (r, ms) = timed(g.timings, || eof_roof(&rho, &roof))?;
            Ok(Outcome::ok(with_time(
                json!({
                    "value": r.value,
                    "method": "roof",
                    "cut": cut,
                    "converged": r.converged,
                    "ensemble": ensemble_json(&r.ensemble),
                }),
                ms,
            )))
        }
        Command::Conjugate => {
            let x = operator_from_json(&read_input(g)?)?;
            let r = conjugate_e(&x, &search)?;
            Ok(Outcome::ok(json!({
                "value": r.value,
                "argmax_state": vector_to_json(r.argmax_state.amplitudes()),
            })))
        }
        Command::G { method } => {
            config
                .params
                .insert("method".into(), json!(format!("{method:?}").to_lowercase()));
            let m = operator_from_json(&read_input(g)?)?;
            let mut out = Map::new();
            let mut values = Vec::new();
            if matches!(method, GForm::Direct | GForm::Both) {
                let r = g_direct(&m, &search)?;
                values.push(r.value.to_f64());
                out.insert("direct".into(), g_json(&r));
            }
            if matches!(method, GForm::Eigen | GForm::Both) {
                let r = g_eigen(&m, &search)?;
                values.push(r.value.to_f64());
                out.insert("eigen".into(), g_json(&r));
            }
            if let [a, b] = values[..] {
                if a.is_finite() && b.is_finite() {
                    out.insert("difference".into(), json!(a - b));
                }
            }
            Ok(Outcome::ok(Value::Object(out)))
        }
        Command::HpSweep { csv } => {
            let grid = g.p_grid.clone().unwrap_or_else(|| DEFAULT_P_GRID.to_vec());
            config.params.insert("p_grid".into(), json!(grid));
            config.params.insert(
                "csv".into(),
                json!(csv.as_ref().map(|p| p.display().to_string())),
            );
            let m = operator_from_json(&read_input(g)?)?;
            let sweep = trotter_sweep(&m, &grid, &search)?;
            if let Some(path) = csv {
                emit_sweep_csv(&sweep.rows, path)?;
            }
            Ok(Outcome::ok(serde_json::to_value(&sweep)?))
        }
        Command::NuQ => {
            let q = g.q.ok_or_else(|| Error::param("nu-q needs --q"))?;
            config.params.insert("q".into(), json!(q));
            let ch = KrausChannel::from_json(&read_input(g)?)?;
            let r = nu_q(&ch, q, &search)?;
            Ok(Outcome::ok(json!({
                "value": r.value,
                "witness": vector_to_json(&r.witness),
            })))
        }
        Command::CheckDuality { cap } => check_duality(g, config, *cap),
        Command::CheckLemma2 => {
            let tol = g.tol.unwrap_or(1e-6);
            config.params.insert("trials".into(), json!(g.trials));
            let dims = config.dims;
            dims.require_single("check-lemma2")?;
            let rows: Vec<(f64, f64)> = (0..g.trials)
                .map(|t| {
                    let m = random_operator(
                        sample::SampleKind::FilterM,
                        dims,
                        g.seed.wrapping_add(t as u64),
                    );
                    let d = g_direct(&m, &search)?.value.to_f64();
                    let e = g_eigen(&m, &search)?.value.to_f64();
                    Ok((d, e))
                })
                .collect::<Result<_>>()?;
            let max_diff = rows.iter().map(|(d, e)| (d - e).abs()).fold(0.0, f64::max);
            Ok(Outcome {
                result: json!({
                    "max_abs_difference": max_diff,
                    "tol": tol,
                    "pass": max_diff <= tol,
                    "trials": rows.iter().map(|(d, e)| json!({"direct": d, "eigen": e})).collect::<Vec<_>>(),
                }),
                flagged: max_diff > tol,
            })
        }
        Command::CheckProp { prop, cap } => check_prop(g, config, *prop, *cap),
        Command::GapSearch { kind, d } => {
            let kind = match kind {
                Kind::GSubadd => GapKind::GSubadd,
                Kind::StrongSuperadd => GapKind::StrongSuperadd,
                Kind::NuMult => GapKind::NuMult,
            };
            let mut cfg = CampaignConfig::new(kind, g.trials, config.dims, g.seed);
            cfg.restarts = g.restarts;
            if let Some(t) = g.tol {
                cfg.tol = t;
            }
            if let Some(q) = g.q {
                cfg.q = q;
            }
            cfg.werner_holevo = *d;
            cfg.timings = g.timings;
            config
                .params
                .insert("campaign".into(), serde_json::to_value(&cfg)?);
            config.params.insert("sampler".into(), json!(cfg.sampler()));
            let records = gap_search(&cfg)?;
            let violations = records.iter().filter(|r| r.violation).count();
            let min_gap = records
                .iter()
                .map(|r| r.gap.gap)
                .fold(f64::INFINITY, f64::min);
            Ok(Outcome {
                result: json!({
                    "violations": violations,
                    "min_gap": if records.is_empty() { Value::Null } else { json!(min_gap) },
                    "records": records,
                }),
                flagged: violations > 0,
            })
        }
        Command::WhDemo { d } => {
            let q = g.q.unwrap_or(5.0);
            let tol = g.tol.unwrap_or(GapKind::NuMult.default_tol());
            config.params.insert("d".into(), json!(d));
            config.params.insert("q".into(), json!(q));
            let wh = werner_holevo_channel(*d)?;
            let r = multiplicativity_gap(&wh, &wh, q, &search)?;
            Ok(Outcome::ok(json!({
                "channel": wh.to_json(),
                "q": q,
                "nu_single": r.single[0].value,
                "nu_joint": r.joint.value,
                "gap": r.gap,
                "violation": r.gap.violated(tol),
                "witness": vector_to_json(&r.joint.witness),
            })))
        }
    }
}

fn check_duality(g: &Global, config: &mut RunConfig, cap: f64) -> Result<Outcome> {
    let tol = g.tol.unwrap_or(5e-3);
    config.params.insert("cap".into(), json!(cap));
    let search = config.search();
    let states: Vec<DensityMatrix> = match &g.input {
        Some(_) => vec![density_from_json(&read_input(g)?)?],
        None => (0..g.trials)
            .map(|t| random_density(config.dims, g.seed.wrapping_add(t as u64)))
            .collect(),
    };
    config.params.insert("trials".into(), json!(states.len()));
    let mut flagged = false;
    let mut rows = Vec::new();
    for (t, rho) in states.iter().enumerate() {
        rho.dims().require_single("check-duality")?;
        let est = fhat_dual_estimate(rho, cap, &search)?;
        let reference = if rho.dims().dim_a == 2 && rho.dims().dim_b == 2 {
            wootters_eof(rho)?
        } else {
            eof_roof(rho, &config.roof())?.value
        };
        let x = random_operator(
            sample::SampleKind::Hermitian,
            rho.dims(),
            g.seed.wrapping_add(1_000_000 + t as u64),
        );
        let random_bound = dual_lower_bound(rho, &x, &search)?;
        let ok = est.value <= reference + 1e-6
            && reference - est.value <= tol
            && random_bound <= reference + 1e-6;
        flagged |= !ok;
        rows.push(json!({
            "state": density_to_json(rho),
            "estimate": est.value,
            "reference": reference,
            "random_x_bound": random_bound,
            "pass": ok,
        }));
    }
    Ok(Outcome {
        result: json!({ "tol": tol, "rows": rows }),
        flagged,
    })
}

fn check_prop(g: &Global, config: &mut RunConfig, prop: u8, cap: f64) -> Result<Outcome> {
    let tol = g.tol.unwrap_or(1e-3);
    config.params.insert("prop".into(), json!(prop));
    config.params.insert("cap".into(), json!(cap));
    let search = config.search();
    let roof = config.roof();
    match prop {
        1 => {
            let tau = density_from_json(&read_input(g)?)?;
            let est = fhat_dual_estimate(&tau, cap, &search)?;
            let ens = eof_roof(&tau, &roof)?.ensemble;
            let report = check_prop1_ensemble(&tau, &est.x, &ens, tol, &search)?;
            Ok(Outcome {
                flagged: !report.members_optimal,
                result: serde_json::to_value(&report)?,
            })
        }
        2 => {
            let states: Vec<DensityMatrix> = match &g.input {
                Some(_) => vec![density_from_json(&read_input(g)?)?],
                None => {
                    let two = config.dims.with_copies(2)?;
                    (0..g.trials)
                        .map(|t| {
                            let mut rng = sample::rng_for(g.seed, t as u64);
                            sample::ginibre_density_rank(&mut rng, two, 2)
                        })
                        .collect()
                }
            };
            let mut flagged = false;
            let mut rows = Vec::new();
            for rho in &states {
                let [m1, m2] = reduction_candidates(rho, 10.0, &search)?;
                let r = check_prop2_transport(
                    rho,
                    &m1,
                    &m2,
                    tol,
                    ReductionMode::Exact,
                    &roof,
                    &search,
                )?;
                flagged |= !r.transport_holds;
                rows.push(json!({
                    "ssa": r.ssa,
                    "g": r.g,
                    "ssa_violated": r.ssa_violated,
                    "g_violated": r.g_violated,
                    "transport_holds": r.transport_holds,
                    "signs_agree": r.signs_agree,
                }));
            }
            Ok(Outcome {
                result: json!({ "tol": tol, "rows": rows }),
                flagged,
            })
        }
        other => Err(Error::param(format!("--prop must be 1 or 2, got {other}"))),
    }
}
