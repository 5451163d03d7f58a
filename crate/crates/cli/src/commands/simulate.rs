use anyhow::Result;
use nalgebra::DMatrix;
use pdhmc::spectral::squared_coherence;
use pdhmc::spectral::var1::{band_spectral_density, random_transition, spectral_radius, var1_simulate, Var1Spec};
use pdhmc::{stream_rng, FrequencyBand, PdMatrix};
use serde::Serialize;

use super::{pair_values, PairValue};
use crate::io::{real_rows, write_json, write_series};
use crate::meta::{RunClock, RunMetadata};
use crate::{usage, SimulateArgs};

#[derive(Serialize)]
struct Sidecar {
    metadata: RunMetadata,
    dim: usize,
    blocks: Vec<usize>,
    length: usize,
    burn: usize,
    rows: usize,
    sample_rate_hz: f64,
    transition: Vec<Vec<f64>>,
    noise_cov: Vec<Vec<f64>>,
    spectral_radius: f64,
    band: FrequencyBand,
    band_frequencies: usize,
    /// Squared coherence of the spectral matrix averaged over the in-band grid.
    true_coherence: Vec<Vec<f64>>,
    coherences: Vec<PairValue>,
}

fn check(args: &SimulateArgs) -> Result<()> {
    if args.dim == 0 {
        return Err(usage("--dim must be at least 1"));
    }
    if !args.block.is_empty() && (args.block.iter().sum::<usize>() != args.dim || args.block.contains(&0)) {
        return Err(usage(format!("--block sizes {:?} must be positive and sum to --dim {}", args.block, args.dim)));
    }
    if args.out.extension().is_some_and(|e| e == "json") {
        return Err(usage("--out names the series CSV; the JSON sidecar is derived from it"));
    }
    if args.burn >= args.length {
        return Err(usage(format!("--burn {} must be below --length {}", args.burn, args.length)));
    }
    if !(args.fs > 0.0 && args.fs.is_finite()) {
        return Err(usage("--fs must be positive"));
    }
    if args.band.hi_hz > args.fs / 2.0 {
        return Err(usage(format!("--band {} extends past the Nyquist frequency {} Hz", args.band, args.fs / 2.0)));
    }
    if args.band.count(args.length - args.burn, args.fs) == 0 {
        return Err(usage(format!("--band {} contains no DFT frequencies", args.band)));
    }
    Ok(())
}

pub fn run(args: &SimulateArgs) -> Result<u8> {
    check(args)?;
    let clock = RunClock::start("simulate-var1", args.seed);
    let mut rng = stream_rng(args.seed, 0);
    let phi = random_transition(args.dim, &args.block, &mut rng)?;
    let spec = Var1Spec::new(phi, PdMatrix::identity(args.dim))?;
    let series = var1_simulate(&spec, args.length, args.burn, &mut rng)?;
    let rows = series.nrows();
    let density = band_spectral_density(&spec, &args.band, rows, args.fs)?;
    let coherence = squared_coherence(&density);

    write_series(&args.out, &series)?;
    let sidecar = Sidecar {
        metadata: clock.metadata(),
        dim: args.dim,
        blocks: if args.block.is_empty() { vec![args.dim] } else { args.block.clone() },
        length: args.length,
        burn: args.burn,
        rows,
        sample_rate_hz: args.fs,
        transition: real_rows(spec.transition()),
        noise_cov: real_rows(&DMatrix::identity(args.dim, args.dim)),
        spectral_radius: spectral_radius(spec.transition()),
        band: args.band,
        band_frequencies: args.band.count(rows, args.fs),
        true_coherence: real_rows(&coherence),
        coherences: pair_values(&coherence),
    };
    write_json(&args.out.with_extension("json"), &sidecar)?;
    eprintln!("wrote {} rows to {}", rows, args.out.display());
    Ok(0)
}
