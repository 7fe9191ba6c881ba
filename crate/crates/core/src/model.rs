//! Domain types for bipartite measurement scenarios: exact probability
//! tables, their vector parametrization, joint-correlation matrices,
//! deterministic protocols, and linear inequalities.
//!
//! A scenario has two parties choosing among `M` settings with `K`
//! outcomes each, plus a classical communication budget of `r` bits.
//! Probability tables live in dimension `D = M^2 (K^2 - 1)` once the
//! per-context normalization is used to drop one coordinate.

use std::collections::BTreeMap;
use std::fmt;

use num::bigint::BigInt;
use num::Integer;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::rational::{dot, Rat};

/// Communication model implied by the budget `r`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CommModel {
    /// No communication (`r = 0`): local deterministic protocols only.
    Local,
    /// A single one-bit message in either direction (`r = 1`).
    OneBit,
    /// Budget large enough to exchange both settings (`r >= 2 log2 M`):
    /// any output pair function is realizable.
    Unrestricted,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("communication budget r={r} with M={m} is not modeled (only r=0, r=1, and r >= 2 log2 M)")]
    UnsupportedComm { m: u32, r: u32 },
    #[error("invalid probability table: {0}")]
    InvalidTable(String),
    #[error("correlation projection requires K=2, got K={0}")]
    OutcomesNotBinary(u32),
    #[error("coordinate length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("protocol is malformed: {0}")]
    MalformedProtocol(String),
    #[error("protocol pattern {pattern} not allowed under {model:?}")]
    PatternNotAllowed { pattern: String, model: CommModel },
}

/// Measurement-scenario parameters `(M, K, r)`.
///
/// Construction validates `M >= 1`, `K >= 2` and that `r` falls in one of
/// the modeled communication regimes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scenario {
    m: u32,
    k: u32,
    r: u32,
}

impl Scenario {
    pub fn new(m: u32, k: u32, r: u32) -> Result<Self, ModelError> {
        if m < 1 {
            return Err(ModelError::InvalidScenario("M must be >= 1".into()));
        }
        if k < 2 {
            return Err(ModelError::InvalidScenario("K must be >= 2".into()));
        }
        let s = Scenario { m, k, r };
        s.comm_model()?;
        Ok(s)
    }

    pub fn m(&self) -> usize {
        self.m as usize
    }

    pub fn k(&self) -> usize {
        self.k as usize
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// Smallest integer budget at which both parties can announce their
    /// settings: the least `r` with `2^r >= M^2`.
    pub fn unrestricted_threshold(m: u32) -> u32 {
        let target = u64::from(m) * u64::from(m);
        let mut r = 0;
        while (1u64 << r) < target {
            r += 1;
        }
        r
    }

    pub fn comm_model(&self) -> Result<CommModel, ModelError> {
        match self.r {
            0 => Ok(CommModel::Local),
            1 => Ok(CommModel::OneBit),
            r if r >= Self::unrestricted_threshold(self.m) => Ok(CommModel::Unrestricted),
            _ => Err(ModelError::UnsupportedComm { m: self.m, r: self.r }),
        }
    }

    /// Ambient dimension of the probability-vector picture, `M^2 (K^2 - 1)`.
    pub fn prob_dim(&self) -> usize {
        self.m() * self.m() * (self.k() * self.k() - 1)
    }

    /// Ambient dimension of the correlation picture, `M^2`.
    pub fn corr_dim(&self) -> usize {
        self.m() * self.m()
    }

    /// All measurement contexts `(i, j)` in lexicographic order.
    pub fn contexts(&self) -> impl Iterator<Item = (usize, usize)> {
        let m = self.m();
        (0..m).flat_map(move |i| (0..m).map(move |j| (i, j)))
    }

    /// All outcome pairs `(a, b)` in lexicographic order.
    pub fn outcome_pairs(&self) -> impl Iterator<Item = (usize, usize)> {
        let k = self.k();
        (0..k).flat_map(move |a| (0..k).map(move |b| (a, b)))
    }
}

#[derive(Serialize, Deserialize)]
struct ScenarioRepr {
    #[serde(rename = "M")]
    m: u32,
    #[serde(rename = "K")]
    k: u32,
    r: u32,
}

impl Serialize for Scenario {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        ScenarioRepr {
            m: self.m,
            k: self.k,
            r: self.r,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Scenario {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = ScenarioRepr::deserialize(deserializer)?;
        Scenario::new(repr.m, repr.k, repr.r).map_err(de::Error::custom)
    }
}

/// Which picture a point or inequality lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Picture {
    Probability,
    Correlation,
}

impl fmt::Display for Picture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Picture::Probability => write!(f, "probability"),
            Picture::Correlation => write!(f, "correlation"),
        }
    }
}

/// Direction of a one-way message (or of a signaling check).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    AtoB,
    BtoA,
}

impl Direction {
    pub fn flipped(self) -> Self {
        match self {
            Direction::AtoB => Direction::BtoA,
            Direction::BtoA => Direction::AtoB,
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Direction::AtoB => write!(f, "AtoB"),
            Direction::BtoA => write!(f, "BtoA"),
        }
    }
}

/// Exact joint probability distribution `p(a, b | i, j)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ProbTable {
    scenario: Scenario,
    /// Flat storage indexed by `((i * M + j) * K + a) * K + b`.
    p: Vec<Rat>,
}

impl ProbTable {
    pub fn from_fn(scenario: Scenario, mut f: impl FnMut(usize, usize, usize, usize) -> Rat) -> Self {
        let (m, k) = (scenario.m(), scenario.k());
        let mut p = Vec::with_capacity(m * m * k * k);
        for i in 0..m {
            for j in 0..m {
                for a in 0..k {
                    for b in 0..k {
                        p.push(f(a, b, i, j));
                    }
                }
            }
        }
        ProbTable { scenario, p }
    }

    /// The table with `p = 1/K^2` everywhere.
    pub fn uniform(scenario: Scenario) -> Self {
        let k2 = (scenario.k() * scenario.k()) as i64;
        Self::from_fn(scenario, |_, _, _, _| Rat::new(1, k2))
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    fn index(&self, a: usize, b: usize, i: usize, j: usize) -> usize {
        let (m, k) = (self.scenario.m(), self.scenario.k());
        debug_assert!(a < k && b < k && i < m && j < m);
        ((i * m + j) * k + a) * k + b
    }

    pub fn entry(&self, a: usize, b: usize, i: usize, j: usize) -> &Rat {
        &self.p[self.index(a, b, i, j)]
    }

    pub fn set_entry(&mut self, a: usize, b: usize, i: usize, j: usize, value: Rat) {
        let idx = self.index(a, b, i, j);
        self.p[idx] = value;
    }

    /// Marginal of party A's outcome in context `(i, j)`: `sum_b p(a,b|i,j)`.
    pub fn marginal_a(&self, a: usize, i: usize, j: usize) -> Rat {
        (0..self.scenario.k()).map(|b| self.entry(a, b, i, j)).sum()
    }

    /// Marginal of party B's outcome in context `(i, j)`: `sum_a p(a,b|i,j)`.
    pub fn marginal_b(&self, b: usize, i: usize, j: usize) -> Rat {
        (0..self.scenario.k()).map(|a| self.entry(a, b, i, j)).sum()
    }

    /// Convex mixture `lambda * self + (1 - lambda) * other`.
    pub fn mix(&self, other: &ProbTable, lambda: &Rat) -> ProbTable {
        assert_eq!(self.scenario, other.scenario);
        let mu = Rat::one() - lambda;
        let p = self
            .p
            .iter()
            .zip(&other.p)
            .map(|(x, y)| lambda * x + &mu * y)
            .collect();
        ProbTable {
            scenario: self.scenario,
            p,
        }
    }
}

/// Outcome of [`validate_prob_table`]: every negativity and every context
/// whose entries do not sum to one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub negative_entries: Vec<NegativeEntry>,
    pub bad_context_sums: Vec<BadContextSum>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NegativeEntry {
    pub a: usize,
    pub b: usize,
    pub i: usize,
    pub j: usize,
    pub value: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BadContextSum {
    pub i: usize,
    pub j: usize,
    pub sum: Rat,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.negative_entries.is_empty() && self.bad_context_sums.is_empty()
    }
}

/// Reports every negative entry and every context whose sum differs from 1.
pub fn validate_prob_table(t: &ProbTable) -> ValidationReport {
    let s = t.scenario();
    let mut negative_entries = Vec::new();
    let mut bad_context_sums = Vec::new();
    for (i, j) in s.contexts() {
        let mut sum = Rat::zero();
        for (a, b) in s.outcome_pairs() {
            let v = t.entry(a, b, i, j);
            if v.is_negative() {
                negative_entries.push(NegativeEntry {
                    a,
                    b,
                    i,
                    j,
                    value: v.clone(),
                });
            }
            sum += v;
        }
        if sum != Rat::one() {
            bad_context_sums.push(BadContextSum { i, j, sum });
        }
    }
    ValidationReport {
        negative_entries,
        bad_context_sums,
    }
}

fn require_valid(t: &ProbTable) -> Result<(), ModelError> {
    let report = validate_prob_table(t);
    if report.is_valid() {
        Ok(())
    } else {
        Err(ModelError::InvalidTable(format!(
            "{} negative entries, {} bad context sums",
            report.negative_entries.len(),
            report.bad_context_sums.len()
        )))
    }
}

/// A witness that one party's marginal depends on the other's setting.
///
/// For direction `AtoB` the fields read: A's outcome `outcome` under her
/// setting `own_setting` has different marginals when B measures
/// `other_setting` versus `other_setting_alt`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignalingWitness {
    pub outcome: usize,
    pub own_setting: usize,
    pub other_setting: usize,
    pub other_setting_alt: usize,
    pub marginal: Rat,
    pub marginal_alt: Rat,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignalingReport {
    pub direction: Direction,
    pub holds: bool,
    pub witnesses: Vec<SignalingWitness>,
}

/// Checks the no-one-way-signaling condition in the given direction.
///
/// `AtoB` holds iff A's marginal `sum_b p(a,b|i,j)` is independent of `j`
/// for every `(a, i)`; `BtoA` is the mirror check on B's marginals.
pub fn one_way_no_signaling(t: &ProbTable, direction: Direction) -> Result<SignalingReport, ModelError> {
    require_valid(t)?;
    let s = t.scenario();
    let (m, k) = (s.m(), s.k());
    let mut witnesses = Vec::new();
    for own in 0..m {
        for outcome in 0..k {
            let baseline = match direction {
                Direction::AtoB => t.marginal_a(outcome, own, 0),
                Direction::BtoA => t.marginal_b(outcome, 0, own),
            };
            for other in 1..m {
                let probe = match direction {
                    Direction::AtoB => t.marginal_a(outcome, own, other),
                    Direction::BtoA => t.marginal_b(outcome, other, own),
                };
                if probe != baseline {
                    witnesses.push(SignalingWitness {
                        outcome,
                        own_setting: own,
                        other_setting: 0,
                        other_setting_alt: other,
                        marginal: baseline.clone(),
                        marginal_alt: probe,
                    });
                }
            }
        }
    }
    Ok(SignalingReport {
        direction,
        holds: witnesses.is_empty(),
        witnesses,
    })
}

/// Joint correlation observable `c(i, j)` for binary outcomes valued
/// `outcome 0 -> +1`, `outcome 1 -> -1`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CorrMatrix {
    scenario: Scenario,
    /// Row-major `M x M`.
    c: Vec<Rat>,
}

impl CorrMatrix {
    pub fn from_entries(scenario: Scenario, c: Vec<Rat>) -> Result<Self, ModelError> {
        let expected = scenario.corr_dim();
        if c.len() != expected {
            return Err(ModelError::LengthMismatch {
                expected,
                got: c.len(),
            });
        }
        Ok(CorrMatrix { scenario, c })
    }

    pub fn from_fn(scenario: Scenario, mut f: impl FnMut(usize, usize) -> Rat) -> Self {
        let m = scenario.m();
        let mut c = Vec::with_capacity(m * m);
        for i in 0..m {
            for j in 0..m {
                c.push(f(i, j));
            }
        }
        CorrMatrix { scenario, c }
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn entry(&self, i: usize, j: usize) -> &Rat {
        &self.c[i * self.scenario.m() + j]
    }

    /// The matrix flattened row-major, which is also its point coordinate
    /// vector in the correlation picture.
    pub fn coords(&self) -> &[Rat] {
        &self.c
    }
}

/// Sign value carried by a binary outcome: `0 -> +1`, `1 -> -1`.
pub fn outcome_sign(outcome: usize) -> i64 {
    if outcome == 0 {
        1
    } else {
        -1
    }
}

/// Projects a valid binary-outcome table to its joint correlation matrix,
/// `c(i,j) = sum_{a,b} v(a) v(b) p(a,b|i,j)`.
pub fn to_correlation(t: &ProbTable) -> Result<CorrMatrix, ModelError> {
    let s = *t.scenario();
    if s.k() != 2 {
        return Err(ModelError::OutcomesNotBinary(s.k() as u32));
    }
    require_valid(t)?;
    Ok(CorrMatrix::from_fn(s, |i, j| {
        let mut acc = Rat::zero();
        for (a, b) in s.outcome_pairs() {
            let sign = outcome_sign(a) * outcome_sign(b);
            let term = t.entry(a, b, i, j);
            if sign > 0 {
                acc += term;
            } else {
                acc -= term;
            }
        }
        acc
    }))
}

/// Communication pattern and output functions of a deterministic protocol.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "pattern")]
pub enum ProtocolPattern {
    /// No message: `a = alpha(i)`, `b = beta(j)`.
    NoComm { alpha: Vec<u8>, beta: Vec<u8> },
    /// A sends one bit `msg(i)`; `a = alpha(i)`, `b = beta_recv(msg, j)`.
    AtoB {
        alpha: Vec<u8>,
        msg: Vec<u8>,
        beta_recv: Vec<u8>,
    },
    /// Mirror image: B sends one bit `msg(j)`; `b = beta(j)`,
    /// `a = alpha_recv(msg, i)`.
    BtoA {
        beta: Vec<u8>,
        msg: Vec<u8>,
        alpha_recv: Vec<u8>,
    },
    /// Unrestricted budget: both outputs may depend on both settings.
    Full { alpha: Vec<u8>, beta: Vec<u8> },
}

impl ProtocolPattern {
    pub fn name(&self) -> &'static str {
        match self {
            ProtocolPattern::NoComm { .. } => "NoComm",
            ProtocolPattern::AtoB { .. } => "AtoB",
            ProtocolPattern::BtoA { .. } => "BtoA",
            ProtocolPattern::Full { .. } => "Full",
        }
    }
}

/// A deterministic protocol for a scenario.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct DetProtocol {
    scenario: Scenario,
    pattern: ProtocolPattern,
}

impl<'de> Deserialize<'de> for DetProtocol {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            scenario: Scenario,
            pattern: ProtocolPattern,
        }
        let repr = Repr::deserialize(deserializer)?;
        DetProtocol::new(repr.scenario, repr.pattern).map_err(de::Error::custom)
    }
}

impl DetProtocol {
    pub fn new(scenario: Scenario, pattern: ProtocolPattern) -> Result<Self, ModelError> {
        let (m, k) = (scenario.m(), scenario.k());
        let check_outputs = |f: &[u8], len: usize, what: &str| -> Result<(), ModelError> {
            if f.len() != len {
                return Err(ModelError::MalformedProtocol(format!(
                    "{what} has {} entries, expected {len}",
                    f.len()
                )));
            }
            if f.iter().any(|&v| (v as usize) >= k) {
                return Err(ModelError::MalformedProtocol(format!(
                    "{what} has an output >= K"
                )));
            }
            Ok(())
        };
        match &pattern {
            ProtocolPattern::NoComm { alpha, beta } => {
                check_outputs(alpha, m, "alpha")?;
                check_outputs(beta, m, "beta")?;
            }
            ProtocolPattern::AtoB { alpha, msg, beta_recv } => {
                check_outputs(alpha, m, "alpha")?;
                check_outputs(beta_recv, 2 * m, "beta_recv")?;
                if msg.len() != m || msg.iter().any(|&v| v > 1) {
                    return Err(ModelError::MalformedProtocol("msg must map settings to bits".into()));
                }
            }
            ProtocolPattern::BtoA { beta, msg, alpha_recv } => {
                check_outputs(beta, m, "beta")?;
                check_outputs(alpha_recv, 2 * m, "alpha_recv")?;
                if msg.len() != m || msg.iter().any(|&v| v > 1) {
                    return Err(ModelError::MalformedProtocol("msg must map settings to bits".into()));
                }
            }
            ProtocolPattern::Full { alpha, beta } => {
                check_outputs(alpha, m * m, "alpha")?;
                check_outputs(beta, m * m, "beta")?;
            }
        }
        let model = scenario.comm_model()?;
        let allowed = matches!(
            (&pattern, model),
            (ProtocolPattern::NoComm { .. }, _)
                | (
                    ProtocolPattern::AtoB { .. } | ProtocolPattern::BtoA { .. },
                    CommModel::OneBit | CommModel::Unrestricted,
                )
                | (ProtocolPattern::Full { .. }, CommModel::Unrestricted)
        );
        if !allowed {
            return Err(ModelError::PatternNotAllowed {
                pattern: pattern.name().to_string(),
                model,
            });
        }
        Ok(DetProtocol { scenario, pattern })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn pattern(&self) -> &ProtocolPattern {
        &self.pattern
    }

    /// A's output under settings `(i, j)`.
    pub fn output_a(&self, i: usize, j: usize) -> usize {
        let m = self.scenario.m();
        match &self.pattern {
            ProtocolPattern::NoComm { alpha, .. } => alpha[i] as usize,
            ProtocolPattern::AtoB { alpha, .. } => alpha[i] as usize,
            ProtocolPattern::BtoA { msg, alpha_recv, .. } => {
                let bit = msg[j] as usize;
                alpha_recv[bit * m + i] as usize
            }
            ProtocolPattern::Full { alpha, .. } => alpha[i * m + j] as usize,
        }
    }

    /// B's output under settings `(i, j)`.
    pub fn output_b(&self, i: usize, j: usize) -> usize {
        let m = self.scenario.m();
        match &self.pattern {
            ProtocolPattern::NoComm { beta, .. } => beta[j] as usize,
            ProtocolPattern::AtoB { msg, beta_recv, .. } => {
                let bit = msg[i] as usize;
                beta_recv[bit * m + j] as usize
            }
            ProtocolPattern::BtoA { beta, .. } => beta[j] as usize,
            ProtocolPattern::Full { beta, .. } => beta[i * m + j] as usize,
        }
    }
}

/// The deterministic table `p(a,b|i,j) = [a = alpha(i,j)] [b = beta(i,j)]`.
pub fn protocol_table(d: &DetProtocol) -> ProbTable {
    ProbTable::from_fn(*d.scenario(), |a, b, i, j| {
        if a == d.output_a(i, j) && b == d.output_b(i, j) {
            Rat::one()
        } else {
            Rat::zero()
        }
    })
}

/// Point in the probability-vector picture.
///
/// Coordinates run lexicographically over `(i, j, a, b)` with the pair
/// `(a, b) = (K-1, K-1)` dropped from each context; the dropped entry is
/// recovered from normalization.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct ProbVector {
    scenario: Scenario,
    coords: Vec<Rat>,
}

impl<'de> Deserialize<'de> for ProbVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            scenario: Scenario,
            coords: Vec<Rat>,
        }
        let repr = Repr::deserialize(deserializer)?;
        ProbVector::from_coords(repr.scenario, repr.coords).map_err(de::Error::custom)
    }
}

impl ProbVector {
    pub fn from_coords(scenario: Scenario, coords: Vec<Rat>) -> Result<Self, ModelError> {
        let expected = scenario.prob_dim();
        if coords.len() != expected {
            return Err(ModelError::LengthMismatch {
                expected,
                got: coords.len(),
            });
        }
        Ok(ProbVector { scenario, coords })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn coords(&self) -> &[Rat] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<Rat> {
        self.coords
    }
}

/// Flattens a valid-shape table into its `D = M^2 (K^2-1)` coordinates.
pub fn table_to_vector(t: &ProbTable) -> ProbVector {
    let s = *t.scenario();
    let k = s.k();
    let mut coords = Vec::with_capacity(s.prob_dim());
    for (i, j) in s.contexts() {
        for (a, b) in s.outcome_pairs() {
            if a == k - 1 && b == k - 1 {
                continue;
            }
            coords.push(t.entry(a, b, i, j).clone());
        }
    }
    ProbVector { scenario: s, coords }
}

/// Reconstructs the table from vector coordinates, restoring each context's
/// dropped entry as `1 - (sum of the kept entries)`.
pub fn vector_to_table(v: &ProbVector) -> ProbTable {
    let s = *v.scenario();
    let k = s.k();
    let per_context = k * k - 1;
    ProbTable::from_fn(s, |a, b, i, j| {
        let ctx = i * s.m() + j;
        if a == k - 1 && b == k - 1 {
            let kept: Rat = v.coords[ctx * per_context..(ctx + 1) * per_context].iter().sum();
            Rat::one() - kept
        } else {
            v.coords[ctx * per_context + a * k + b].clone()
        }
    })
}

/// One linear inequality `coeffs . x <= bound` over picture coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct LinearInequality {
    pub picture: Picture,
    pub coeffs: Vec<Rat>,
    pub bound: Rat,
}

impl LinearInequality {
    pub fn new(picture: Picture, coeffs: Vec<Rat>, bound: Rat) -> Self {
        LinearInequality {
            picture,
            coeffs,
            bound,
        }
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    /// Exact value of the left-hand side at a point.
    pub fn eval(&self, point: &[Rat]) -> Rat {
        dot(&self.coeffs, point)
    }

    /// `eval(point) - bound`; positive means violated.
    pub fn margin(&self, point: &[Rat]) -> Rat {
        self.eval(point) - &self.bound
    }

    pub fn is_satisfied_by(&self, point: &[Rat]) -> bool {
        !self.margin(point).is_positive()
    }

    pub fn is_tight_at(&self, point: &[Rat]) -> bool {
        self.margin(point).is_zero()
    }

    /// Canonical form: scaled by the positive rational making every
    /// coefficient and the bound integers with overall gcd 1.
    pub fn canonicalized(&self) -> Self {
        let mut scaled = self.clone();
        canonical_scale(&mut scaled.coeffs, &mut scaled.bound);
        scaled
    }

    /// Deterministic ordering key: `(bound, coefficient list)`.
    pub fn sort_key(&self) -> (Rat, Vec<Rat>) {
        (self.bound.clone(), self.coeffs.clone())
    }
}

/// Scales the entries (coefficients plus bound) so all are integers with
/// gcd 1; the scale factor is positive, preserving the inequality side.
fn canonical_scale(coeffs: &mut [Rat], bound: &mut Rat) {
    let mut lcm = BigInt::from(1);
    for r in coeffs.iter().chain(std::iter::once(&*bound)) {
        lcm = lcm.lcm(r.denom());
    }
    let lcm_rat = Rat::from_bigint(lcm);
    for c in coeffs.iter_mut() {
        *c *= &lcm_rat;
    }
    *bound *= &lcm_rat;
    let mut gcd = BigInt::from(0);
    for r in coeffs.iter().chain(std::iter::once(&*bound)) {
        gcd = gcd.gcd(r.numer());
    }
    if gcd > BigInt::from(1) {
        let g = Rat::from_bigint(gcd);
        for c in coeffs.iter_mut() {
            *c /= &g;
        }
        *bound /= &g;
    }
}

/// Canonicalizes a homogeneous coordinate vector in place: primitive
/// integers. The sign is preserved.
pub fn canonical_scale_vector(coords: &mut [Rat]) {
    let mut lcm = BigInt::from(1);
    for r in coords.iter() {
        lcm = lcm.lcm(r.denom());
    }
    let lcm_rat = Rat::from_bigint(lcm);
    for c in coords.iter_mut() {
        *c *= &lcm_rat;
    }
    let mut gcd = BigInt::from(0);
    for r in coords.iter() {
        gcd = gcd.gcd(r.numer());
    }
    if gcd > BigInt::from(1) {
        let g = Rat::from_bigint(gcd);
        for c in coords.iter_mut() {
            *c /= &g;
        }
    }
}

/// A deduplicated, canonically sorted list of points in one picture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PointList {
    pub picture: Picture,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scenario: Option<Scenario>,
    pub points: Vec<Vec<Rat>>,
}

impl PointList {
    pub fn new(picture: Picture, scenario: Option<Scenario>, points: Vec<Vec<Rat>>) -> Self {
        let mut list = PointList {
            picture,
            scenario,
            points,
        };
        list.canonicalize();
        list
    }

    /// Sorts lexicographically and removes exact duplicates.
    pub fn canonicalize(&mut self) {
        self.points.sort();
        self.points.dedup();
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> Option<usize> {
        self.points.first().map(|p| p.len())
    }
}

/// A deduplicated, canonically sorted list of inequalities in one picture.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FacetList {
    pub picture: Picture,
    pub facets: Vec<LinearInequality>,
}

impl FacetList {
    pub fn new(picture: Picture, facets: Vec<LinearInequality>) -> Self {
        let mut list = FacetList { picture, facets };
        list.canonicalize();
        list
    }

    /// Canonical form per entry, then sort by `(bound, coeffs)`, then dedup.
    pub fn canonicalize(&mut self) {
        for f in &mut self.facets {
            *f = f.canonicalized();
        }
        self.facets.sort_by_key(|x| x.sort_key());
        self.facets.dedup();
    }

    pub fn len(&self) -> usize {
        self.facets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.facets.is_empty()
    }
}

/// Inequality-side description of a polytope: irredundant facets plus the
/// affine-hull equations when the polytope is not full-dimensional.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HRepresentation {
    pub picture: Picture,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub scenario: Option<Scenario>,
    pub facets: Vec<LinearInequality>,
    /// Entries are `coeffs . x = bound`, with linearly independent rows.
    pub equations: Vec<LinearInequality>,
}

/// Serde shape for [`ProbTable`]: contexts keyed as `"i,j"`, each holding
/// a `K x K` array indexed `[a][b]`.
#[derive(Serialize, Deserialize)]
struct ProbTableRepr {
    scenario: Scenario,
    p: BTreeMap<String, Vec<Vec<Rat>>>,
}

impl Serialize for ProbTable {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let s = self.scenario;
        let k = s.k();
        let mut p = BTreeMap::new();
        for (i, j) in s.contexts() {
            let rows: Vec<Vec<Rat>> = (0..k)
                .map(|a| (0..k).map(|b| self.entry(a, b, i, j).clone()).collect())
                .collect();
            p.insert(format!("{i},{j}"), rows);
        }
        ProbTableRepr { scenario: s, p }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ProbTable {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = ProbTableRepr::deserialize(deserializer)?;
        let s = repr.scenario;
        let (m, k) = (s.m(), s.k());
        let mut table = ProbTable::from_fn(s, |_, _, _, _| Rat::zero());
        let mut seen = 0usize;
        for (key, rows) in &repr.p {
            let (i, j) = key
                .split_once(',')
                .and_then(|(i, j)| Some((i.trim().parse::<usize>().ok()?, j.trim().parse::<usize>().ok()?)))
                .ok_or_else(|| de::Error::custom(format!("bad context key {key:?}")))?;
            if i >= m || j >= m {
                return Err(de::Error::custom(format!("context {key:?} out of range for M={m}")));
            }
            if rows.len() != k || rows.iter().any(|r| r.len() != k) {
                return Err(de::Error::custom(format!("context {key:?} is not a {k}x{k} array")));
            }
            for (a, row) in rows.iter().enumerate() {
                for (b, v) in row.iter().enumerate() {
                    table.set_entry(a, b, i, j, v.clone());
                }
            }
            seen += 1;
        }
        if seen != m * m {
            return Err(de::Error::custom(format!(
                "table has {seen} contexts, expected {}",
                m * m
            )));
        }
        Ok(table)
    }
}

#[derive(Serialize, Deserialize)]
struct CorrMatrixRepr {
    scenario: Scenario,
    c: Vec<Vec<Rat>>,
}

impl Serialize for CorrMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let m = self.scenario.m();
        let c = (0..m)
            .map(|i| (0..m).map(|j| self.entry(i, j).clone()).collect())
            .collect();
        CorrMatrixRepr {
            scenario: self.scenario,
            c,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for CorrMatrix {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = CorrMatrixRepr::deserialize(deserializer)?;
        let m = repr.scenario.m();
        if repr.c.len() != m || repr.c.iter().any(|row| row.len() != m) {
            return Err(de::Error::custom(format!("correlation matrix is not {m}x{m}")));
        }
        let flat = repr.c.into_iter().flatten().collect();
        CorrMatrix::from_entries(repr.scenario, flat).map_err(de::Error::custom)
    }
}
