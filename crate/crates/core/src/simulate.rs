//! Monte Carlo simulation of the one-way communication protocol for
//! one-way-no-signaling distributions.
//!
//! Per sample: the sending party draws its outcome from its setting's
//! marginal (the pre-shared randomness), announces its setting in
//! `ceil(log2 M)` bits, and the receiver draws from the conditional
//! distribution of the announced context. Both stages sample integer
//! weights over a common denominator, so each branch is hit with exactly
//! its rational probability and the expected empirical distribution
//! equals the target.

use num::bigint::BigInt;
use num::Integer;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::model::{
    one_way_no_signaling, validate_prob_table, Direction, ModelError, ProbTable, SignalingReport,
};
use crate::rational::Rat;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error("target signals in the simulated direction ({} witnesses)", report.witnesses.len())]
    Signaling { report: SignalingReport },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("common denominator of the target entries does not fit in 64 bits")]
    DenominatorOverflow,
}

/// Bits needed to announce one of `m` settings: `ceil(log2 m)`.
pub fn message_bits(m: usize) -> u32 {
    (m.max(1) as u64).next_power_of_two().trailing_zeros()
}

/// Fixed-width big-endian encoding of a setting index.
pub fn encode_setting(setting: usize, bits: u32) -> Vec<bool> {
    (0..bits)
        .rev()
        .map(|k| (setting >> k) & 1 == 1)
        .collect()
}

/// Inverse of [`encode_setting`].
pub fn decode_setting(message: &[bool]) -> usize {
    message.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
}

/// One stage of sampling: outcomes weighted by integers over a common
/// denominator, drawn exactly with an unbiased integer draw.
#[derive(Debug, Clone)]
struct WeightedDraw {
    weights: Vec<u64>,
    total: u64,
    /// The exact probabilities the weights encode.
    probs: Vec<Rat>,
}

impl WeightedDraw {
    fn new(probs: Vec<Rat>) -> Result<Self, SimError> {
        let mut lcm = BigInt::from(1);
        for p in &probs {
            lcm = lcm.lcm(p.denom());
        }
        let weights: Vec<u64> = probs
            .iter()
            .map(|p| {
                let w = p.numer() * (&lcm / p.denom());
                w.to_u64().ok_or(SimError::DenominatorOverflow)
            })
            .collect::<Result<_, _>>()?;
        let total: u64 = weights.iter().sum();
        Ok(WeightedDraw {
            weights,
            total,
            probs,
        })
    }

    fn sample(&self, rng: &mut impl Rng) -> usize {
        debug_assert!(self.total > 0);
        let mut roll = rng.gen_range(0..self.total);
        for (idx, &w) in self.weights.iter().enumerate() {
            if roll < w {
                if w == 0 {
                    // zero-probability branches cannot be rolled
                    unreachable!("sampled a zero-weight outcome");
                }
                return idx;
            }
            roll -= w;
        }
        unreachable!("weights sum to the draw range");
    }
}

/// The protocol's two sampling stages for one context, plus exact branch
/// probabilities. `first` indexes the sender's outcome, the inner draw
/// the receiver's.
#[derive(Debug, Clone)]
struct TwoStage {
    sender_marginal: WeightedDraw,
    /// One conditional per sender outcome; empty draws for zero-marginal
    /// outcomes, which are never reached.
    receiver_conditional: Vec<Option<WeightedDraw>>,
}

impl TwoStage {
    /// Builds the stages for context `(i, j)`. The sender's marginal is
    /// the setting's marginal distribution (independent of the other
    /// party's setting by precondition, read off at its first context).
    fn build(target: &ProbTable, direction: Direction, i: usize, j: usize) -> Result<Self, SimError> {
        let k = target.scenario().k();
        let marginal: Vec<Rat> = (0..k)
            .map(|first| match direction {
                Direction::AtoB => target.marginal_a(first, i, 0),
                Direction::BtoA => target.marginal_b(first, 0, j),
            })
            .collect();
        let receiver_conditional = marginal
            .iter()
            .enumerate()
            .map(|(first, m)| {
                if m.is_zero() {
                    return Ok(None);
                }
                let cond: Vec<Rat> = (0..k)
                    .map(|second| {
                        let joint = match direction {
                            Direction::AtoB => target.entry(first, second, i, j),
                            Direction::BtoA => target.entry(second, first, i, j),
                        };
                        joint / m
                    })
                    .collect();
                WeightedDraw::new(cond).map(Some)
            })
            .collect::<Result<_, SimError>>()?;
        Ok(TwoStage {
            sender_marginal: WeightedDraw::new(marginal)?,
            receiver_conditional,
        })
    }

    /// Exact probability that the two stages produce `(first, second)`.
    fn branch_probability(&self, first: usize, second: usize) -> Rat {
        let m = &self.sender_marginal.probs[first];
        if m.is_zero() {
            return Rat::zero();
        }
        let cond = self.receiver_conditional[first]
            .as_ref()
            .expect("nonzero marginal has a conditional");
        m * &cond.probs[second]
    }

    fn sample(&self, rng: &mut impl Rng) -> (usize, usize) {
        let first = self.sender_marginal.sample(rng);
        let cond = match &self.receiver_conditional[first] {
            Some(c) => c,
            // the marginal weight of such an outcome is zero
            None => unreachable!("drew a zero-marginal sender outcome"),
        };
        (first, cond.sample(rng))
    }
}

/// Exact probability that one simulated sample of context `(i, j)`
/// produces outcomes `(a, b)`, mirroring the sampler's branch structure.
pub fn branch_probability(
    target: &ProbTable,
    direction: Direction,
    i: usize,
    j: usize,
    a: usize,
    b: usize,
) -> Result<Rat, SimError> {
    let stage = TwoStage::build(target, direction, i, j)?;
    Ok(match direction {
        Direction::AtoB => stage.branch_probability(a, b),
        Direction::BtoA => stage.branch_probability(b, a),
    })
}

/// Tally of a finished simulation.
#[derive(Debug, Clone, Serialize)]
pub struct SimulationRun {
    pub target: ProbTable,
    pub direction: Direction,
    pub samples_per_context: u64,
    pub seed: u64,
    /// Flat counts indexed like the table entries.
    counts: Vec<u64>,
    /// Bits sent per sample: `ceil(log2 M)`.
    pub message_bits: u32,
}

impl SimulationRun {
    pub fn count(&self, a: usize, b: usize, i: usize, j: usize) -> u64 {
        let (m, k) = (self.target.scenario().m(), self.target.scenario().k());
        self.counts[((i * m + j) * k + a) * k + b]
    }
}

fn derive_seed(base: u64, index: u64) -> u64 {
    // splitmix64 step on a per-context offset
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs the protocol `samples_per_context` times per context.
///
/// The target must be valid and one-way no-signaling in the simulated
/// direction; a signaling target is rejected with its witness list.
pub fn simulate(
    target: &ProbTable,
    direction: Direction,
    samples_per_context: u64,
    seed: u64,
) -> Result<SimulationRun, SimError> {
    let validation = validate_prob_table(target);
    if !validation.is_valid() {
        return Err(SimError::Model(ModelError::InvalidTable(format!(
            "{} negative entries, {} bad context sums",
            validation.negative_entries.len(),
            validation.bad_context_sums.len()
        ))));
    }
    let signaling = one_way_no_signaling(target, direction)?;
    if !signaling.holds {
        return Err(SimError::Signaling { report: signaling });
    }

    let s = *target.scenario();
    let (m, k) = (s.m(), s.k());
    let bits = message_bits(m);
    let mut counts = vec![0u64; m * m * k * k];
    for (i, j) in s.contexts() {
        let stage = TwoStage::build(target, direction, i, j)?;
        let ctx = (i * m + j) as u64;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, ctx));
        // the announced setting is fixed within a context block
        let sender_setting = match direction {
            Direction::AtoB => i,
            Direction::BtoA => j,
        };
        let message = encode_setting(sender_setting, bits);
        debug_assert_eq!(message.len(), bits as usize);
        let announced = decode_setting(&message);
        let (ri, rj) = match direction {
            Direction::AtoB => (announced, j),
            Direction::BtoA => (i, announced),
        };
        debug_assert_eq!((ri, rj), (i, j));
        for _ in 0..samples_per_context {
            let (first, second) = stage.sample(&mut rng);
            let (a, b) = match direction {
                Direction::AtoB => (first, second),
                Direction::BtoA => (second, first),
            };
            counts[((ri * m + rj) * k + a) * k + b] += 1;
        }
    }
    Ok(SimulationRun {
        target: target.clone(),
        direction,
        samples_per_context,
        seed,
        counts,
        message_bits: bits,
    })
}

/// Largest per-context total variation distance between the empirical
/// counts and the target.
pub fn tv_distance(run: &SimulationRun) -> f64 {
    let s = *run.target.scenario();
    let n = run.samples_per_context as f64;
    let mut worst: f64 = 0.0;
    for (i, j) in s.contexts() {
        let mut sum = 0.0;
        for (a, b) in s.outcome_pairs() {
            let empirical = if n > 0.0 {
                run.count(a, b, i, j) as f64 / n
            } else {
                0.0
            };
            sum += (empirical - run.target.entry(a, b, i, j).to_f64()).abs();
        }
        worst = worst.max(sum / 2.0);
    }
    worst
}

/// A two-way no-signaling rational approximation of maximally violating
/// binary correlations: `p(a,b|i,j) = (1 + (-1)^(a+b) c(i,j)) / 4` with
/// `c = 7/10` except `c(1,1) = -7/10`.
pub fn near_singlet_table() -> ProbTable {
    let s = crate::model::Scenario::new(2, 2, 1).expect("valid scenario");
    ProbTable::from_fn(s, |a, b, i, j| {
        let c = if i == 1 && j == 1 {
            Rat::new(-7, 10)
        } else {
            Rat::new(7, 10)
        };
        let sign = if (a + b) % 2 == 0 { c } else { -c };
        (Rat::one() + sign) / Rat::int(4)
    })
}
