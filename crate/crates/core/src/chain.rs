//! Shared Markov-chain configuration.

use crate::error::{Error, Result};

/// Burn-in, thinning, proposal scale, and number of emitted samples for the
/// Metropolis chains. The proposal scale is the starting point; chains tune
/// it during burn-in toward their target acceptance band.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainConfig {
    pub burn_in: usize,
    pub thin: usize,
    pub proposal_scale: f64,
    pub length: usize,
}

impl Default for ChainConfig {
    fn default() -> Self {
        Self {
            burn_in: 10_000,
            thin: 10,
            proposal_scale: 0.5,
            length: 1_000,
        }
    }
}

impl ChainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.thin == 0 {
            return Err(Error::ChainConfig("thinning must be >= 1".into()));
        }
        if !(self.proposal_scale > 0.0) {
            return Err(Error::ChainConfig(format!(
                "proposal scale must be positive, got {}",
                self.proposal_scale
            )));
        }
        if self.length == 0 {
            return Err(Error::ChainConfig("chain length must be >= 1".into()));
        }
        Ok(())
    }
}

/// Step-size tuner targeting an acceptance band. Adjusts every `window`
/// proposals during burn-in only.
#[derive(Debug, Clone)]
pub(crate) struct StepTuner {
    pub scale: f64,
    lo: f64,
    hi: f64,
    window: usize,
    accepted: usize,
    seen: usize,
}

impl StepTuner {
    pub fn new(scale: f64, lo: f64, hi: f64) -> Self {
        Self {
            scale,
            lo,
            hi,
            window: 200,
            accepted: 0,
            seen: 0,
        }
    }

    pub fn record(&mut self, accepted: bool) {
        self.seen += 1;
        if accepted {
            self.accepted += 1;
        }
        if self.seen == self.window {
            let rate = self.accepted as f64 / self.seen as f64;
            if rate < self.lo {
                self.scale *= 0.8;
            } else if rate > self.hi {
                self.scale *= 1.25;
            }
            self.accepted = 0;
            self.seen = 0;
        }
    }
}
