use anyhow::Result;
use num_complex::Complex64;
use pdhmc::oracle::{compare_entries, compare_means, conjugate_posterior_draws, qq_table, simulate_gaussian_stat, MeanComparison};
use pdhmc::random::random_pd;
use pdhmc::sampler::ConfigEcho;
use pdhmc::spectral::ev_ed;
use pdhmc::{run_chain, stream_rng, Execution, Field, PdMatrix, PosteriorModel, PriorSpec, SamplerConfig, Scalar};
use serde::Serialize;

use crate::io::{ensure_dir, write_json, write_rows};
use crate::meta::{RunClock, RunMetadata};
use crate::{usage, ValidateArgs};

/// Stream of the run seed reserved for the synthetic problem.
const PROBLEM_STREAM: u64 = 1 << 32;

#[derive(Serialize)]
struct KsRow {
    entry: String,
    i: usize,
    j: usize,
    kind: &'static str,
    #[serde(rename = "D")]
    d: f64,
    threshold: f64,
    pass: bool,
}

#[derive(Serialize)]
struct QqRow<'a> {
    entry: &'a str,
    p: f64,
    pdhmc: f64,
    exact: f64,
}

#[derive(Serialize)]
struct EvEdRow {
    index: usize,
    ev_pdhmc: f64,
    ed_pdhmc: f64,
    ev_exact: f64,
    ed_exact: f64,
}

#[derive(Serialize)]
struct Report {
    metadata: RunMetadata,
    field: Field,
    dim: usize,
    n_data: usize,
    prior: &'static str,
    prior_dof: f64,
    sampler: ConfigEcho,
    acceptance_rate: f64,
    step_size: f64,
    pdhmc_draws: usize,
    exact_draws: usize,
    alpha: f64,
    ks: Vec<KsRow>,
    ks_passed: usize,
    ks_total: usize,
    ev: MeanComparison,
    ed: MeanComparison,
    all_pass: bool,
}

fn check(args: &ValidateArgs) -> Result<()> {
    if args.dim == 0 {
        return Err(usage("--dim must be at least 1"));
    }
    if !(args.alpha > 0.0 && args.alpha < 1.0) {
        return Err(usage("--alpha must lie in (0, 1)"));
    }
    if args.qq_grid == 0 {
        return Err(usage("--qq-grid must be at least 1"));
    }
    Ok(())
}

pub fn run(args: &ValidateArgs) -> Result<u8> {
    check(args)?;
    match args.field {
        Field::Real => validate::<f64>(args),
        Field::Complex => validate::<Complex64>(args),
    }
}

fn validate<T: Scalar>(args: &ValidateArgs) -> Result<u8> {
    let clock = RunClock::start("validate-conjugate", args.seed);
    let d = args.dim;
    let config = SamplerConfig::<T> {
        iterations: args.draws,
        warmup: args.warmup,
        thin: args.thin,
        leapfrog_steps: args.leapfrog,
        step_jitter: args.step_jitter,
        seed: args.seed,
        ..SamplerConfig::default_for(d)
    };
    config.validate()?;

    let mut rng = stream_rng(args.seed, PROBLEM_STREAM);
    let truth = random_pd::<T, _>(d, &mut rng);
    let stat = simulate_gaussian_stat(&truth, args.n_data, &mut rng)?;
    let dof = d as f64 + 2.0;
    let prior = PriorSpec::inverse_wishart(PdMatrix::identity(d), dof)?;
    let model = PosteriorModel::new(stat.clone(), prior.clone())?;

    let trace = run_chain(&model, &config)?;
    if trace.is_empty() {
        return Err(usage("the chain keeps no draws; raise --draws or lower --warmup / --thin"));
    }
    let exact = conjugate_posterior_draws(&prior, &stat, trace.len(), args.seed.wrapping_add(1), Execution::Parallel)?;

    let cmp = compare_entries(&trace.draws, &exact, args.alpha, Execution::Parallel);
    let ks: Vec<KsRow> = cmp
        .iter()
        .map(|c| KsRow {
            entry: c.label.clone(),
            i: c.entry.i,
            j: c.entry.j,
            kind: match c.entry.kind {
                pdhmc::oracle::EntryKind::Diagonal => "diagonal",
                pdhmc::oracle::EntryKind::Real => "real",
                pdhmc::oracle::EntryKind::Imaginary => "imaginary",
            },
            d: c.ks.statistic,
            threshold: c.ks.threshold,
            pass: c.ks.pass,
        })
        .collect();

    ensure_dir(&args.out)?;
    let mut qq = Vec::new();
    for c in &cmp {
        let a: Vec<f64> = trace.draws.iter().map(|s| c.entry.extract(s)).collect();
        let b: Vec<f64> = exact.iter().map(|s| c.entry.extract(s)).collect();
        qq.extend(qq_table(&a, &b, args.qq_grid).into_iter().map(|q| (c.label.clone(), q)));
    }
    write_rows(&args.out.join("qq.csv"), qq.iter().map(|(e, q)| QqRow { entry: e, p: q.p, pdhmc: q.a, exact: q.b }))?;

    let (ev_a, ed_a): (Vec<f64>, Vec<f64>) = trace.draws.iter().map(ev_ed).unzip();
    let (ev_b, ed_b): (Vec<f64>, Vec<f64>) = exact.iter().map(ev_ed).unzip();
    write_rows(
        &args.out.join("ev_ed_draws.csv"),
        (0..ev_a.len()).map(|k| EvEdRow { index: k, ev_pdhmc: ev_a[k], ed_pdhmc: ed_a[k], ev_exact: ev_b[k], ed_exact: ed_b[k] }),
    )?;
    let ks_passed = ks.iter().filter(|r| r.pass).count();
    let report = Report {
        metadata: clock.metadata(),
        field: T::FIELD,
        dim: d,
        n_data: args.n_data,
        prior: "inverse-wishart(I)",
        prior_dof: dof,
        sampler: config.echo(),
        acceptance_rate: trace.acceptance_rate(),
        step_size: trace.step_size,
        pdhmc_draws: trace.len(),
        exact_draws: exact.len(),
        alpha: args.alpha,
        ks_total: ks.len(),
        ks_passed,
        all_pass: ks_passed == ks.len(),
        ev: compare_means(&ev_a, &ev_b, 2.0),
        ed: compare_means(&ed_a, &ed_b, 2.0),
        ks,
    };
    write_rows(&args.out.join("ks.csv"), &report.ks)?;
    write_json(&args.out.join("report.json"), &report)?;
    eprintln!(
        "{}/{} entries pass KS at {}; EV z = {:.2}, ED z = {:.2}; acceptance {:.3}",
        ks_passed,
        report.ks_total,
        args.alpha,
        report.ev.z,
        report.ed.z,
        report.acceptance_rate
    );
    Ok(if report.all_pass { 0 } else { 1 })
}
