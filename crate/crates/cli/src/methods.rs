use clap::ValueEnum;
use rdfalign_core::edit::{align_sigma, sigma_edit, EditConfig, EditError};
use rdfalign_core::overlap::{overlap_partition, LiteralTokens, MatchConfig, OverlapConfig, PrefixMode};
use rdfalign_core::partition::trivial_partition;
use rdfalign_core::weighted::align_theta;
use rdfalign_core::{align, bisim_partition, deblank_partition, hybrid_partition, ColorInterner, NodeId, TripleGraph};

use crate::Failure;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Trivial,
    Deblank,
    Hybrid,
    Bisim,
    Overlap,
    EditOracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Prefix {
    Paper,
    Safe,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Tokens {
    Words,
    Chars,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub method: Method,
    pub theta: f64,
    pub epsilon: f64,
    pub prefix: Prefix,
    pub max_rounds: usize,
    pub tokens: Tokens,
}

impl RunConfig {
    pub fn check(&self) -> Result<(), Failure> {
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Failure::config(format!("--theta must lie in [0, 1], got {}", self.theta)));
        }
        if !(self.epsilon > 0.0) {
            return Err(Failure::config(format!("--epsilon must be positive, got {}", self.epsilon)));
        }
        Ok(())
    }

    pub fn overlap(&self) -> OverlapConfig {
        OverlapConfig {
            matching: MatchConfig {
                theta: self.theta,
                similarity: self.theta,
                prefix: match self.prefix {
                    Prefix::Paper => PrefixMode::Paper,
                    Prefix::Safe => PrefixMode::Safe,
                },
            },
            epsilon: self.epsilon,
            tokens: match self.tokens {
                Tokens::Words => LiteralTokens::Words,
                Tokens::Chars => LiteralTokens::Chars,
            },
            max_rounds: self.max_rounds,
            ..OverlapConfig::default()
        }
    }
}

pub struct MethodResult {
    /// `(source, target, distance)` triples.
    pub pairs: Vec<(NodeId, NodeId, f64)>,
    pub rounds: usize,
    pub hit_round_cap: bool,
}

fn exact(pairs: Vec<(NodeId, NodeId)>) -> MethodResult {
    MethodResult { pairs: pairs.into_iter().map(|(a, b)| (a, b, 0.0)).collect(), rounds: 0, hit_round_cap: false }
}

pub fn run(g: &TripleGraph, cfg: &RunConfig) -> Result<MethodResult, Failure> {
    let i = ColorInterner::new();
    Ok(match cfg.method {
        Method::Trivial => exact(align(&trivial_partition(g, &i), g)),
        Method::Deblank => exact(align(&deblank_partition(g, &i), g)),
        Method::Hybrid => exact(align(&hybrid_partition(g, &i), g)),
        Method::Bisim => exact(align(&bisim_partition(g, &i), g)),
        Method::Overlap => {
            let out = overlap_partition(g, &cfg.overlap(), &i).map_err(|e| Failure::config(e.to_string()))?;
            MethodResult {
                pairs: align_theta(&out.xi, g, cfg.theta).into_iter().map(|(a, b, w)| (a, b, w.get())).collect(),
                rounds: out.rounds,
                hit_round_cap: out.hit_round_cap,
            }
        }
        Method::EditOracle => {
            let ecfg = EditConfig { epsilon: cfg.epsilon.min(EditConfig::default().epsilon), ..EditConfig::default() };
            let d = sigma_edit(g, &ecfg, &i).map_err(|e| match e {
                EditError::Budget { .. } => Failure::budget(e.to_string()),
                other => Failure::other(other.to_string()),
            })?;
            MethodResult { pairs: align_sigma(&d, cfg.theta), rounds: d.rounds, hit_round_cap: false }
        }
    })
}
