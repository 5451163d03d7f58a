use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;

pub const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), " (", env!("PDHMC_GIT_REV"), ")");

/// Echoed into every JSON output so a run can be reproduced from its files.
#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub command: &'static str,
    pub args: Vec<String>,
    pub seed: u64,
    pub version: &'static str,
    pub started_unix_s: u64,
    pub wall_time_s: f64,
}

pub struct RunClock {
    command: &'static str,
    seed: u64,
    started: Instant,
    started_unix_s: u64,
}

impl RunClock {
    pub fn start(command: &'static str, seed: u64) -> Self {
        let started_unix_s = SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        RunClock { command, seed, started: Instant::now(), started_unix_s }
    }

    pub fn metadata(&self) -> RunMetadata {
        RunMetadata {
            command: self.command,
            args: std::env::args().skip(1).collect(),
            seed: self.seed,
            version: VERSION,
            started_unix_s: self.started_unix_s,
            wall_time_s: self.started.elapsed().as_secs_f64(),
        }
    }
}
