//! Named experiments with fixed instance sizes, each producing CSV.

use std::fmt;
use std::io::Write;
use std::ops::RangeInclusive;
use std::str::FromStr;

use serde::Serialize;

use super::analysis::{run_error_analysis, Decomposer, ErrorRow};
use super::experiments::{
    isl_convergence, odeco_sweep, rank1_sweep, sig17, worst_direction, write_csv,
};
use super::fixtures::positive_example;
use super::random::{gen_random_factors, seeded_rng, SampleKind};
use super::sequences::{DeSilvaLim, IllConditioned, Paatero, Sequence};
use crate::decomp::GevdOptions;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Experiment {
    IslConvergence,
    WorstDirection,
    Rank1Sweep,
    OdecoSweep,
    IllConditioned,
    DeSilvaLim,
    Paatero,
}

impl Experiment {
    pub const ALL: [Experiment; 7] = [
        Experiment::IslConvergence,
        Experiment::WorstDirection,
        Experiment::Rank1Sweep,
        Experiment::OdecoSweep,
        Experiment::IllConditioned,
        Experiment::DeSilvaLim,
        Experiment::Paatero,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::IslConvergence => "isl-convergence",
            Experiment::WorstDirection => "worst-direction",
            Experiment::Rank1Sweep => "rank1-sweep",
            Experiment::OdecoSweep => "odeco-sweep",
            Experiment::IllConditioned => "ill-conditioned",
            Experiment::DeSilvaLim => "desilva-lim",
            Experiment::Paatero => "paatero",
        }
    }

    /// The swept index range used when none is given. For `rank1-sweep` it
    /// is the tensor order, for `isl-convergence` the exponent `q`.
    pub fn default_range(self) -> RangeInclusive<u32> {
        match self {
            Experiment::IslConvergence => 1..=5,
            Experiment::WorstDirection => 0..=0,
            Experiment::Rank1Sweep => 3..=10,
            Experiment::OdecoSweep => 0..=15,
            Experiment::IllConditioned => 1..=45,
            Experiment::DeSilvaLim => 5..=100,
            Experiment::Paatero => 20..=100,
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown experiment `{s}`")))
    }
}

#[derive(Clone, Debug, Serialize)]
struct WorstDirectionRow {
    instance: &'static str,
    #[serde(serialize_with = "sig17")]
    kappa: f64,
    #[serde(serialize_with = "sig17")]
    estimate: f64,
    #[serde(serialize_with = "sig17")]
    rel_diff: f64,
}

const WORST_DIRECTION_EPS: f64 = 1e-8;

/// Rows of the sequence experiments, for callers that want the numbers
/// rather than CSV.
pub fn sequence_rows(
    experiment: Experiment,
    seed: u64,
    range: RangeInclusive<u32>,
) -> Result<Vec<ErrorRow>> {
    let mut rng = seeded_rng(seed);
    let seq: Box<dyn Sequence> = match experiment {
        Experiment::IllConditioned => Box::new(IllConditioned::sample(&mut rng, [13, 11, 7])),
        Experiment::DeSilvaLim => Box::new(DeSilvaLim::sample(&mut rng, [5, 4, 3])),
        Experiment::Paatero => Box::new(Paatero::sample(&mut rng, [5, 4, 3])),
        other => {
            return Err(Error::InvalidArgument(format!(
                "`{other}` is not a sequence experiment"
            )))
        }
    };
    let s: Vec<u32> = range.collect();
    run_error_analysis(seq.as_ref(), &s, &Decomposer::Gevd(GevdOptions::default()))
}

/// Runs `experiment` and writes its CSV to `out`. The output depends only
/// on the arguments.
pub fn run_experiment<W: Write>(
    experiment: Experiment,
    seed: u64,
    range: Option<RangeInclusive<u32>>,
    out: W,
) -> Result<()> {
    let range = range.unwrap_or_else(|| experiment.default_range());
    if range.is_empty() {
        return Err(Error::InvalidArgument("empty index range".into()));
    }
    match experiment {
        Experiment::IslConvergence => {
            if *range.start() != 1 {
                return Err(Error::InvalidArgument("isl-convergence starts at q = 1".into()));
            }
            write_csv(&isl_convergence(seed, *range.end())?, out)
        }
        Experiment::WorstDirection => {
            let mut rng = seeded_rng(seed);
            let random = gen_random_factors(&mut rng, &[3, 3, 2], 2, SampleKind::Uniform)?;
            let mut rows = Vec::new();
            for (instance, p) in [("positive_fixture", positive_example()), ("uniform_random", random)] {
                let w = worst_direction(&p, WORST_DIRECTION_EPS)?;
                rows.push(WorstDirectionRow {
                    instance,
                    kappa: w.kappa,
                    estimate: w.estimate,
                    rel_diff: w.rel_diff,
                });
            }
            write_csv(&rows, out)
        }
        Experiment::Rank1Sweep => {
            if *range.start() != 3 {
                return Err(Error::InvalidArgument("rank1-sweep starts at order 3".into()));
            }
            write_csv(&rank1_sweep(seed, *range.end() as usize)?, out)
        }
        Experiment::OdecoSweep => {
            if *range.start() != 0 {
                return Err(Error::InvalidArgument("odeco-sweep starts at s = 0".into()));
            }
            write_csv(&odeco_sweep(seed, *range.end())?, out)
        }
        seq => write_csv(&sequence_rows(seq, seed, range)?, out),
    }
}
