use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use pdhmc::sampler::ConfigEcho;
use pdhmc::spectral::{band_stat, credible_intervals, dft, ev_ed, squared_coherence};
use pdhmc::stats::{mean, quantile_sorted, sorted};
use pdhmc::trace::write_trace;
use pdhmc::{
    run_chains, ChainTrace, Execution, Field, FrequencyBand, GaussianSuffStat, Init, PdMatrix, PosteriorModel,
    PriorSpec, SamplerConfig, Scalar, TimeSeriesFrame,
};
use serde::Serialize;

use super::upper_pairs;
use crate::io::{ensure_dir, read_series, write_json};
use crate::meta::{RunClock, RunMetadata};
use crate::{usage, FitArgs, InitKind, PriorKind};

#[derive(Serialize)]
struct CoherenceInterval {
    i: usize,
    j: usize,
    lo: f64,
    hi: f64,
    median: f64,
}

#[derive(Serialize)]
struct ScalarSummary {
    lo: f64,
    hi: f64,
    median: f64,
    mean: f64,
}

impl ScalarSummary {
    fn of(xs: &[f64], level: f64) -> Self {
        let s = sorted(xs);
        let tail = 0.5 * (1.0 - level);
        ScalarSummary {
            lo: quantile_sorted(&s, tail),
            hi: quantile_sorted(&s, 1.0 - tail),
            median: quantile_sorted(&s, 0.5),
            mean: mean(xs),
        }
    }
}

#[derive(Serialize)]
struct PriorEcho {
    name: &'static str,
    scale: Option<f64>,
    dof: Option<f64>,
}

#[derive(Serialize)]
struct ChainSummary {
    chain: usize,
    draws: usize,
    acceptance_rate: f64,
    failures: usize,
    step_size: f64,
}

#[derive(Serialize)]
struct FitSummary {
    metadata: RunMetadata,
    input: PathBuf,
    field: Field,
    dim: usize,
    band: Option<FrequencyBand>,
    /// In-band frequencies (spectral fit) or observations (covariance fit).
    #[serde(rename = "N")]
    n: usize,
    demeaned: bool,
    prior: PriorEcho,
    sampler: ConfigEcho,
    chains: Vec<ChainSummary>,
    stored_draws: usize,
    level: f64,
    coherence_intervals: Vec<CoherenceInterval>,
    ev: ScalarSummary,
    ed: ScalarSummary,
}

fn check(args: &FitArgs) -> Result<()> {
    if args.chains == 0 {
        return Err(usage("--chains must be at least 1"));
    }
    if !(args.level > 0.0 && args.level < 1.0) {
        return Err(usage("--level must lie in (0, 1)"));
    }
    if !(args.prior_scale > 0.0 && args.prior_scale.is_finite()) {
        return Err(usage("--prior-scale must be positive"));
    }
    if args.prior != PriorKind::Invwishart && (args.prior_dof.is_some() || args.prior_scale != 1.0) {
        return Err(usage("--prior-scale and --prior-dof only apply to --prior invwishart"));
    }
    if let Some(band) = args.band {
        if band.hi_hz > args.fs / 2.0 {
            return Err(usage(format!("--band {band} extends past the Nyquist frequency {} Hz", args.fs / 2.0)));
        }
    }
    Ok(())
}

pub fn run(args: &FitArgs) -> Result<u8> {
    check(args)?;
    let clock = RunClock::start("fit", args.seed);
    let values = read_series(&args.input)?;
    let frame = TimeSeriesFrame::new(values, args.fs).with_context(|| format!("{}", args.input.display()))?;
    let frame = if args.no_demean { frame } else { frame.demeaned() };
    match args.band {
        Some(band) => {
            let stat = band_stat(&dft(&frame), &band)?;
            fit(stat, Some(band), args, &clock)
        }
        None => fit(GaussianSuffStat::<f64>::from_rows(frame.values())?, None, args, &clock),
    }
}

fn fit<T: Scalar>(stat: GaussianSuffStat<T>, band: Option<FrequencyBand>, args: &FitArgs, clock: &RunClock) -> Result<u8> {
    let d = stat.dim();
    let n = stat.count();
    let (prior, echo) = match args.prior {
        PriorKind::Invwishart => {
            let dof = args.prior_dof.unwrap_or(d as f64 + 2.0);
            let scale = PdMatrix::<T>::identity(d).scaled(args.prior_scale)?;
            (PriorSpec::inverse_wishart(scale, dof)?, PriorEcho { name: "inverse-wishart", scale: Some(args.prior_scale), dof: Some(dof) })
        }
        PriorKind::Reference => (PriorSpec::Reference, PriorEcho { name: "reference", scale: None, dof: None }),
        PriorKind::Flat => (PriorSpec::Flat, PriorEcho { name: "flat", scale: None, dof: None }),
    };
    let init = match args.init {
        InitKind::Identity => Init::Identity,
        InitKind::Data => Init::Matrix(stat.mle().context("--init data needs a positive-definite S / N")?),
    };
    let defaults = SamplerConfig::<T>::default_for(d);
    let config = SamplerConfig {
        step_size: args.step_size.unwrap_or(defaults.step_size),
        leapfrog_steps: args.leapfrog,
        iterations: args.iters,
        warmup: args.warmup,
        thin: args.thin,
        seed: args.seed,
        init,
        adapt_step_size: !args.no_adapt,
        step_jitter: args.step_jitter,
    };
    config.validate()?;
    let model = PosteriorModel::new(stat, prior)?;
    let traces = run_chains(&model, &config, args.chains, Execution::Parallel)?;

    ensure_dir(&args.out)?;
    let label = |c: usize| (args.chains > 1).then_some(c);
    let trace_path = args.out.join("trace.jsonl");
    let mut out = BufWriter::new(File::create(&trace_path).with_context(|| format!("cannot create {}", trace_path.display()))?);
    for (c, trace) in traces.iter().enumerate() {
        write_trace(&mut out, trace, label(c))?;
    }
    out.flush()?;

    let draws: Vec<PdMatrix<T>> = traces.iter().flat_map(|t| t.draws.iter().cloned()).collect();
    write_coherence_draws(&args.out.join("coherence_draws.csv"), &traces)?;
    let intervals = credible_intervals(&draws, squared_coherence, args.level)?;
    let (ev, ed): (Vec<f64>, Vec<f64>) = draws.iter().map(ev_ed).unzip();
    let summary = FitSummary {
        metadata: clock.metadata(),
        input: args.input.clone(),
        field: T::FIELD,
        dim: d,
        band,
        n,
        demeaned: !args.no_demean,
        prior: echo,
        sampler: config.echo(),
        chains: traces
            .iter()
            .enumerate()
            .map(|(c, t)| ChainSummary {
                chain: c,
                draws: t.len(),
                acceptance_rate: t.acceptance_rate(),
                failures: t.failures,
                step_size: t.step_size,
            })
            .collect(),
        stored_draws: draws.len(),
        level: args.level,
        coherence_intervals: upper_pairs(d)
            .map(|(i, j)| {
                let iv = intervals[(i, j)];
                CoherenceInterval { i, j, lo: iv.lo, hi: iv.hi, median: iv.median }
            })
            .collect(),
        ev: ScalarSummary::of(&ev, args.level),
        ed: ScalarSummary::of(&ed, args.level),
    };
    write_json(&args.out.join("summary.json"), &summary)?;
    eprintln!(
        "{} draws, acceptance {:.3}; wrote {}",
        draws.len(),
        traces.iter().map(|t| t.acceptance_rate()).sum::<f64>() / traces.len() as f64,
        args.out.display()
    );
    Ok(0)
}

/// One row per draw: chain, index, iteration, each squared coherence, EV, ED.
fn write_coherence_draws<T: Scalar>(path: &std::path::Path, traces: &[ChainTrace<T>]) -> Result<()> {
    let d = traces.first().and_then(|t| t.draws.first()).map_or(0, |s| s.dim());
    let mut w = csv::Writer::from_path(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut header = vec!["chain".to_string(), "index".into(), "iteration".into()];
    header.extend(upper_pairs(d).map(|(i, j)| format!("coh_{i}_{j}")));
    header.extend(["ev".to_string(), "ed".into()]);
    w.write_record(&header)?;
    for (c, trace) in traces.iter().enumerate() {
        for (k, s) in trace.draws.iter().enumerate() {
            let coh = squared_coherence(s);
            let (ev, ed) = ev_ed(s);
            let mut row = vec![c.to_string(), k.to_string(), trace.iterations[k].to_string()];
            row.extend(upper_pairs(d).map(|(i, j)| format!("{:e}", coh[(i, j)])));
            row.extend([format!("{ev:e}"), format!("{ed:e}")]);
            w.write_record(&row)?;
        }
    }
    w.flush()?;
    Ok(())
}
