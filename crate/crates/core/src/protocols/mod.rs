//! Two-way QKD pipelines: Ping-Pong with phase-flip or bit-flip encoding, and
//! LM05 with nonorthogonal single-photon preparations.
//!
//! Every pipeline enumerates the classical randomness exactly (Alice's bit,
//! Bob's preparation) and weights each pure branch by its probability, so the
//! resulting distributions carry no sampling noise.

mod info;
mod lm05;
mod pingpong;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::qsim::{Operator, QsimError};

pub use info::{binary_entropy, mutual_information, mutual_information_of, SUM_TOL};
pub use lm05::{run_lm05_control, run_lm05_message};
pub use pingpong::{run_pp_control, run_pp_message};

/// Tolerance for consistency checks between derived statistics.
pub const STATS_TOL: f64 = 1e-10;
/// Slack on the entropy bounds of information quantities.
const BOUND_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error("attack acts on a travel subsystem of dimension {0}; expected 2 or 3")]
    UnsupportedTravelDim(usize),
    #[error("empty distribution")]
    EmptyDistribution,
    #[error("invalid probability {0}")]
    InvalidProbability(f64),
    #[error("probabilities sum to {0}, not 1")]
    NotNormalized(f64),
    #[error("Alice's bit is biased: P(a=0) = {0}")]
    BiasedAlice(f64),
    #[error("invalid statistics: {0}")]
    InvalidStats(String),
}

/// Which two-way protocol is being run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Protocol {
    #[serde(rename = "pp")]
    PingPong,
    #[serde(rename = "lm05")]
    Lm05,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::PingPong => "pp",
            Protocol::Lm05 => "lm05",
        }
    }

    /// Entangled pairs consumed per transmitted bit.
    pub fn entangled_states(self) -> u32 {
        match self {
            Protocol::PingPong => 1,
            Protocol::Lm05 => 0,
        }
    }
}

impl fmt::Display for Protocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Protocol {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "pp" | "ppp" | "ping-pong" => Ok(Protocol::PingPong),
            "lm05" => Ok(Protocol::Lm05),
            _ => Err(format!("unknown protocol '{s}' (expected pp or lm05)")),
        }
    }
}

/// Alice's Ping-Pong encoding strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Encoding {
    /// Phase flip: 0 → I, 1 → σz.
    A1,
    /// Bit flip: 0 → I, 1 → σx.
    A2,
}

impl Encoding {
    pub const ALL: [Encoding; 2] = [Encoding::A1, Encoding::A2];

    pub fn op_for_bit(self, bit: u8) -> Operator {
        match (self, bit) {
            (_, 0) => Operator::identity(crate::qsim::Dims::qubits(1)),
            (Encoding::A1, _) => Operator::pauli_z(),
            (Encoding::A2, _) => Operator::pauli_x(),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Encoding::A1 => "A1",
            Encoding::A2 => "A2",
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Encoding {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "A1" => Ok(Encoding::A1),
            "A2" => Ok(Encoding::A2),
            _ => Err(format!("unknown encoding '{s}' (expected A1 or A2)")),
        }
    }
}

/// What Bob decodes from one message-mode round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BobSymbol {
    Bit(u8),
    /// A measurement outcome outside the image of the encoding.
    Err,
    /// The travel photon came back as vacuum.
    Loss,
}

impl BobSymbol {
    pub fn is_conclusive(self) -> bool {
        matches!(self, BobSymbol::Bit(_))
    }
}

/// One cell of the joint distribution over Alice's bit, Bob's decoded
/// symbol and Eve's measurement record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointRecord {
    pub alice: u8,
    pub bob: BobSymbol,
    /// Index of Eve's outcome in her measurement basis.
    pub eve: usize,
    pub probability: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct JointRecordDistribution {
    entries: Vec<JointRecord>,
}

impl JointRecordDistribution {
    /// Validates the entries: nonnegative, summing to one, with an unbiased
    /// marginal for Alice's bit.
    pub fn new(entries: Vec<JointRecord>) -> Result<Self, ProtocolError> {
        let mut dist = Self::default();
        for e in entries {
            dist.add(e.alice, e.bob, e.eve, e.probability)?;
        }
        dist.validate()?;
        Ok(dist)
    }

    fn add(&mut self, alice: u8, bob: BobSymbol, eve: usize, probability: f64) -> Result<(), ProtocolError> {
        if !(probability >= 0.0) || !probability.is_finite() || alice > 1 {
            return Err(ProtocolError::InvalidProbability(probability));
        }
        match self.entries.iter_mut().find(|e| e.alice == alice && e.bob == bob && e.eve == eve) {
            Some(e) => e.probability += probability,
            None => self.entries.push(JointRecord { alice, bob, eve, probability }),
        }
        Ok(())
    }

    fn validate(&self) -> Result<(), ProtocolError> {
        if self.entries.is_empty() {
            return Err(ProtocolError::EmptyDistribution);
        }
        let total: f64 = self.entries.iter().map(|e| e.probability).sum();
        if (total - 1.0).abs() > SUM_TOL {
            return Err(ProtocolError::NotNormalized(total));
        }
        let p0 = self.alice_marginal(0);
        if (p0 - 0.5).abs() > SUM_TOL {
            return Err(ProtocolError::BiasedAlice(p0));
        }
        Ok(())
    }

    fn sorted(mut self) -> Self {
        self.entries.sort_by_key(|a| (a.alice, a.bob, a.eve));
        self
    }

    pub fn entries(&self) -> &[JointRecord] {
        &self.entries
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|e| e.probability).sum()
    }

    pub fn alice_marginal(&self, bit: u8) -> f64 {
        self.entries.iter().filter(|e| e.alice == bit).map(|e| e.probability).sum()
    }

    /// Probability that Bob decodes `a` exactly.
    pub fn agreement(&self) -> f64 {
        self.entries.iter().filter(|e| e.bob == BobSymbol::Bit(e.alice)).map(|e| e.probability).sum()
    }

    /// Probability that Eve's record equals Alice's bit.
    pub fn eve_matches_alice(&self) -> f64 {
        self.entries.iter().filter(|e| e.eve == usize::from(e.alice)).map(|e| e.probability).sum()
    }

    pub fn inconclusive(&self) -> f64 {
        self.entries.iter().filter(|e| !e.bob.is_conclusive()).fold(0.0, |acc, e| acc + e.probability)
    }

    /// Error rate over conclusive rounds; zero when no round is conclusive.
    pub fn qber(&self) -> f64 {
        let conclusive: f64 = 1.0 - self.inconclusive();
        if conclusive <= 0.0 {
            return 0.0;
        }
        let errors: f64 = self
            .entries
            .iter()
            .filter(|e| matches!(e.bob, BobSymbol::Bit(b) if b != e.alice))
            .fold(0.0, |acc, e| acc + e.probability);
        (errors / conclusive).clamp(0.0, 1.0)
    }

    pub fn i_ab(&self) -> Result<f64, ProtocolError> {
        mutual_information_of(self.entries.iter().map(|e| (e.alice, e.bob, e.probability)))
    }

    pub fn i_ae(&self) -> Result<f64, ProtocolError> {
        mutual_information_of(self.entries.iter().map(|e| (e.alice, e.eve, e.probability)))
    }

    pub fn i_be(&self) -> Result<f64, ProtocolError> {
        mutual_information_of(self.entries.iter().map(|e| (e.bob, e.eve, e.probability)))
    }
}

/// Resource counts charged to an attack: two-qubit gates, single-qubit gates
/// and beam splitters. Fractional values are allowed.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct GateCosts {
    pub n1: f64,
    pub n2: f64,
    pub n3: f64,
}

impl GateCosts {
    pub const NONE: GateCosts = GateCosts { n1: 0.0, n2: 0.0, n3: 0.0 };

    pub fn new(n1: f64, n2: f64, n3: f64) -> Self {
        Self { n1, n2, n3 }
    }

    pub fn is_valid(&self) -> bool {
        [self.n1, self.n2, self.n3].iter().all(|c| c.is_finite() && *c >= 0.0)
    }
}

/// Everything the game layer needs to know about one (protocol, encoding,
/// attack) combination.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProtocolStats {
    pub i_ab: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_ae: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_be: Option<f64>,
    pub i_e_sum: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qber: Option<f64>,
    /// `(p_d + qber) / 2`, or a directly supplied value when the split is unknown.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection_cost: Option<f64>,
    /// Message-mode mass where Bob got an error symbol or a lost photon.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub inconclusive: Option<f64>,
    pub n_entangled: u32,
    pub gate_costs: GateCosts,
}

impl ProtocolStats {
    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |msg: String| Err(ProtocolError::InvalidStats(msg));
        let in_range = |v: f64, hi: f64| v.is_finite() && v >= -BOUND_TOL && v <= hi + BOUND_TOL;
        for (name, v) in [("i_ab", Some(self.i_ab)), ("i_ae", self.i_ae), ("i_be", self.i_be)] {
            if let Some(v) = v {
                if !in_range(v, 1.0) {
                    return bad(format!("{name} = {v} outside [0, 1] bits"));
                }
            }
        }
        if !in_range(self.i_e_sum, 2.0) {
            return bad(format!("i_e_sum = {} outside [0, 2] bits", self.i_e_sum));
        }
        if let (Some(ae), Some(be)) = (self.i_ae, self.i_be) {
            if (ae + be - self.i_e_sum).abs() > STATS_TOL {
                return bad(format!("i_e_sum = {} but i_ae + i_be = {}", self.i_e_sum, ae + be));
            }
        }
        for (name, v) in [
            ("p_d", self.p_d),
            ("qber", self.qber),
            ("detection_cost", self.detection_cost),
            ("inconclusive", self.inconclusive),
        ] {
            if let Some(v) = v {
                if !(v.is_finite() && (0.0..=1.0).contains(&v)) {
                    return bad(format!("{name} = {v} outside [0, 1]"));
                }
            }
        }
        if let (Some(p_d), Some(qber), Some(cost)) = (self.p_d, self.qber, self.detection_cost) {
            if ((p_d + qber) / 2.0 - cost).abs() > STATS_TOL {
                return bad(format!("detection_cost = {cost} but (p_d + qber)/2 = {}", (p_d + qber) / 2.0));
            }
        }
        if !self.gate_costs.is_valid() {
            return bad(format!("gate costs must be nonnegative, got {:?}", self.gate_costs));
        }
        Ok(())
    }

    /// Fills in `detection_cost` from `p_d` and `qber` when both are known.
    pub fn with_derived_detection_cost(mut self) -> Self {
        if self.detection_cost.is_none() {
            if let (Some(p_d), Some(qber)) = (self.p_d, self.qber) {
                self.detection_cost = Some((p_d + qber) / 2.0);
            }
        }
        self
    }
}

/// Builds [`ProtocolStats`] from a simulated message-mode distribution and
/// control-mode detection probability.
pub fn stats_from(
    dist: &JointRecordDistribution,
    p_d: f64,
    gate_costs: GateCosts,
    n_entangled: u32,
) -> Result<ProtocolStats, ProtocolError> {
    if dist.entries().is_empty() {
        return Err(ProtocolError::EmptyDistribution);
    }
    if !(0.0..=1.0).contains(&p_d) {
        return Err(ProtocolError::InvalidProbability(p_d));
    }
    let i_ae = dist.i_ae()?;
    let i_be = dist.i_be()?;
    let qber = dist.qber();
    let stats = ProtocolStats {
        i_ab: dist.i_ab()?,
        i_ae: Some(i_ae),
        i_be: Some(i_be),
        i_e_sum: i_ae + i_be,
        p_d: Some(p_d),
        qber: Some(qber),
        detection_cost: Some((p_d + qber) / 2.0),
        inconclusive: Some(dist.inconclusive()),
        n_entangled,
        gate_costs,
    };
    stats.validate()?;
    Ok(stats)
}

/// Checks that an attack's legs act on a travel subsystem the pipelines
/// understand: a qubit, or a qubit with a vacuum level.
pub(crate) fn travel_dim_of(attack: &crate::attacks::CircuitAttack) -> Result<usize, ProtocolError> {
    match attack.travel_dim() {
        d @ (2 | 3) => Ok(d),
        d => Err(ProtocolError::UnsupportedTravelDim(d)),
    }
}

/// An attack's legs and Eve's measurement, lifted onto a protocol's full
/// register `[travel, <protocol subsystems>..., <ancilla>...]`.
pub(crate) struct AttackLayout<'a> {
    pub dims: crate::qsim::Dims,
    pub ancilla_targets: Vec<usize>,
    pub leg1: Operator,
    pub leg2: Operator,
    pub attack: &'a crate::attacks::CircuitAttack,
}

impl<'a> AttackLayout<'a> {
    /// `protocol_dims` lists the protocol's own subsystems, travel first.
    pub fn new(attack: &'a crate::attacks::CircuitAttack, protocol_dims: &[usize]) -> Result<Self, ProtocolError> {
        let prefix = crate::qsim::Dims::new(protocol_dims.to_vec())?;
        let dims = prefix.concat(attack.ancilla_dims());
        let first_ancilla = protocol_dims.len();
        let ancilla_targets: Vec<usize> = (first_ancilla..dims.len()).collect();
        let mut leg_targets = vec![0];
        leg_targets.extend(&ancilla_targets);
        let leg1 = crate::qsim::embed(attack.leg1(), &leg_targets, &dims)?;
        let leg2 = crate::qsim::embed(attack.leg2(), &leg_targets, &dims)?;
        Ok(Self { dims, ancilla_targets, leg1, leg2, attack })
    }

    /// Eve's measurement on her ancilla, as `(record, probability)` pairs.
    pub fn eve_records(&self, state: &crate::qsim::Ket) -> Result<Vec<(usize, f64)>, ProtocolError> {
        let dist = crate::qsim::measure(state, &self.ancilla_targets, self.attack.eve_basis())?;
        Ok(dist.outcomes.iter().map(|o| (o.index, o.probability)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn dist(entries: &[(u8, BobSymbol, usize, f64)]) -> JointRecordDistribution {
        JointRecordDistribution::new(
            entries
                .iter()
                .map(|&(alice, bob, eve, probability)| JointRecord { alice, bob, eve, probability })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn perfect_copy_with_blind_eve() {
        let d = dist(&[(0, BobSymbol::Bit(0), 0, 0.5), (1, BobSymbol::Bit(1), 0, 0.5)]);
        let s = stats_from(&d, 0.0, GateCosts::NONE, 1).unwrap();
        assert_abs_diff_eq!(s.i_ab, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.i_e_sum, 0.0, epsilon = 1e-15);
        assert_eq!(s.qber, Some(0.0));
    }

    #[test]
    fn binary_symmetric_channel_with_quarter_flips() {
        let d = dist(&[
            (0, BobSymbol::Bit(0), 0, 0.375),
            (0, BobSymbol::Bit(1), 0, 0.125),
            (1, BobSymbol::Bit(1), 0, 0.375),
            (1, BobSymbol::Bit(0), 0, 0.125),
        ]);
        let s = stats_from(&d, 0.0, GateCosts::NONE, 0).unwrap();
        // 1 + (1/4)log2(1/4) + (3/4)log2(3/4)
        let expected = 1.0 + 0.25 * 0.25f64.log2() + 0.75 * 0.75f64.log2();
        assert_abs_diff_eq!(s.i_ab, expected, epsilon = 1e-12);
        assert_abs_diff_eq!(s.i_ab, 0.18872, epsilon = 1e-5);
        assert_abs_diff_eq!(s.qber.unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(s.detection_cost.unwrap(), 0.125, epsilon = 1e-15);
    }

    #[test]
    fn fully_correlated_triple() {
        let d = dist(&[(0, BobSymbol::Bit(0), 0, 0.5), (1, BobSymbol::Bit(1), 1, 0.5)]);
        let s = stats_from(&d, 0.0, GateCosts::NONE, 1).unwrap();
        assert_abs_diff_eq!(s.i_ab, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.i_ae.unwrap(), 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.i_be.unwrap(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn qber_ignores_inconclusive_mass() {
        let d = dist(&[
            (0, BobSymbol::Bit(0), 0, 0.25),
            (0, BobSymbol::Err, 0, 0.25),
            (1, BobSymbol::Bit(0), 0, 0.25),
            (1, BobSymbol::Loss, 0, 0.25),
        ]);
        assert_abs_diff_eq!(d.inconclusive(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(d.qber(), 0.5, epsilon = 1e-15);
    }

    #[test]
    fn distribution_validation() {
        let bad = JointRecordDistribution::new(vec![JointRecord {
            alice: 0,
            bob: BobSymbol::Bit(0),
            eve: 0,
            probability: 1.0,
        }]);
        assert!(matches!(bad, Err(ProtocolError::BiasedAlice(_))));
        assert!(matches!(JointRecordDistribution::new(vec![]), Err(ProtocolError::EmptyDistribution)));
        let unnormalized = JointRecordDistribution::new(vec![
            JointRecord { alice: 0, bob: BobSymbol::Bit(0), eve: 0, probability: 0.5 },
            JointRecord { alice: 1, bob: BobSymbol::Bit(0), eve: 0, probability: 0.4 },
        ]);
        assert!(matches!(unnormalized, Err(ProtocolError::NotNormalized(_))));
        assert!(stats_from(&JointRecordDistribution::default(), 0.0, GateCosts::NONE, 0).is_err());
    }

    #[test]
    fn stats_validation_catches_inconsistency() {
        let mut s = ProtocolStats {
            i_ab: 0.311,
            i_ae: None,
            i_be: None,
            i_e_sum: 0.385,
            p_d: Some(0.5),
            qber: Some(0.25),
            detection_cost: None,
            inconclusive: None,
            n_entangled: 1,
            gate_costs: GateCosts::new(10.0, 4.0, 2.0),
        }
        .with_derived_detection_cost();
        assert_eq!(s.detection_cost, Some(0.375));
        s.validate().unwrap();
        s.detection_cost = Some(0.4);
        assert!(s.validate().is_err());
        s.detection_cost = Some(0.375);
        s.i_e_sum = 2.5;
        assert!(s.validate().is_err());
        s.i_e_sum = 0.385;
        s.gate_costs.n2 = -1.0;
        assert!(s.validate().is_err());
    }

    #[test]
    fn parse_names() {
        assert_eq!("PPP".parse::<Protocol>().unwrap(), Protocol::PingPong);
        assert_eq!("lm05".parse::<Protocol>().unwrap(), Protocol::Lm05);
        assert!("bb84".parse::<Protocol>().is_err());
        assert_eq!("a2".parse::<Encoding>().unwrap(), Encoding::A2);
    }
}
