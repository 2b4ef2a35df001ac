//! Eve's strategies.
//!
//! An attack is either a two-leg circuit that the protocol pipelines simulate
//! directly, or a table of published statistics for attacks whose circuits
//! are defined elsewhere. Both forms carry the gate costs charged to Eve.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::Array2;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocols::{
    run_lm05_control, run_lm05_message, run_pp_control, run_pp_message, stats_from, Encoding, GateCosts,
    Protocol, ProtocolError, ProtocolStats,
};
use crate::qsim::{computational_basis, validate_basis, Dims, Ket, Operator, QsimError, C64};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error("unknown attack '{0}'")]
    Unknown(String),
    #[error("an attack named '{0}' is already registered")]
    DuplicateName(String),
    #[error("attack '{0}' is table-form and has no circuit to simulate")]
    TableForm(String),
    #[error("attack '{attack}' has no statistics for {key}")]
    MissingKey { attack: String, key: StatsKey },
    #[error("{protocol} requires an encoding")]
    MissingEncoding { protocol: Protocol },
    #[error("malformed attack file: {0}")]
    Parse(String),
    #[error("invalid attack '{attack}': {reason}")]
    Invalid { attack: String, reason: String },
    #[error(transparent)]
    Qsim(#[from] QsimError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
}

/// A two-leg quantum channel: Eve's ancilla starts in `ancilla_init`, the
/// first leg acts on (travel ⊗ ancilla) on the way to Alice, the second on the
/// way back, and Eve finally measures the ancilla in `eve_basis`.
#[derive(Debug, Clone, PartialEq)]
pub struct CircuitAttack {
    ancilla_init: Ket,
    leg1: Operator,
    leg2: Operator,
    eve_basis: Vec<Ket>,
}

impl CircuitAttack {
    pub fn new(ancilla_init: Ket, leg1: Operator, leg2: Operator, eve_basis: Vec<Ket>) -> Result<Self, AttackError> {
        let invalid = |reason: String| AttackError::Invalid { attack: "<circuit>".into(), reason };
        let ancilla_dims = ancilla_init.dims().clone();
        let ancilla_total = ancilla_dims.total();
        for (name, leg) in [("leg1", &leg1), ("leg2", &leg2)] {
            if !leg.is_unitary() {
                return Err(invalid(format!("{name} is not flagged unitary")));
            }
            let n = leg.dims().total();
            let expected_tail = &leg.dims().as_slice()[1..];
            if n % ancilla_total != 0 || expected_tail != ancilla_dims.as_slice() {
                return Err(invalid(format!(
                    "{name} acts on {} but the ancilla has dims {}",
                    leg.dims(),
                    ancilla_dims
                )));
            }
        }
        if leg1.dims() != leg2.dims() {
            return Err(invalid(format!("legs act on different spaces: {} vs {}", leg1.dims(), leg2.dims())));
        }
        let travel_dim = leg1.dims().as_slice()[0];
        if !(2..=3).contains(&travel_dim) {
            return Err(invalid(format!("travel subsystem has dimension {travel_dim}; expected 2 or 3")));
        }
        validate_basis(&eve_basis, ancilla_total)?;
        let eve_basis = eve_basis
            .into_iter()
            .map(|k| Ket::new(ancilla_dims.clone(), k.amplitudes().to_vec()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { ancilla_init, leg1, leg2, eve_basis })
    }

    /// No attack: identity on both legs with a trivial one-level ancilla.
    pub fn identity() -> Self {
        let ancilla = Ket::basis(Dims::single(1).expect("dim 1"), 0).expect("index 0");
        let id = Operator::identity(Dims::new(vec![2, 1]).expect("dims"));
        Self::new(ancilla, id.clone(), id, computational_basis(1)).expect("identity attack is valid")
    }

    /// CNOT from the travel photon onto a `|0⟩` ancilla on both legs, with
    /// Eve reading the ancilla in the computational basis.
    pub fn double_cnot() -> Self {
        let cnot = Operator::cnot();
        Self::new(Ket::qubit(0), cnot.clone(), cnot, computational_basis(2)).expect("double CNOT is valid")
    }

    /// Eve swaps the photon into a vacuum ancilla mode and forwards vacuum.
    #[cfg(test)]
    pub(crate) fn photon_swap() -> Result<Self, AttackError> {
        let dims = Dims::new(vec![3, 3])?;
        let mut m = Array2::from_elem((9, 9), C64::new(0.0, 0.0));
        for t in 0..3 {
            for a in 0..3 {
                m[[a * 3 + t, t * 3 + a]] = C64::new(1.0, 0.0);
            }
        }
        let swap = Operator::unitary(dims, m)?;
        let vacuum = Ket::basis(Dims::single(3)?, 2)?;
        let id = Operator::identity(Dims::new(vec![3, 3])?);
        Self::new(vacuum, swap, id, computational_basis(3))
    }

    pub fn travel_dim(&self) -> usize {
        self.leg1.dims().as_slice()[0]
    }

    pub fn ancilla_dims(&self) -> &Dims {
        self.ancilla_init.dims()
    }

    pub fn ancilla_init(&self) -> &Ket {
        &self.ancilla_init
    }

    pub fn leg1(&self) -> &Operator {
        &self.leg1
    }

    pub fn leg2(&self) -> &Operator {
        &self.leg2
    }

    pub fn eve_basis(&self) -> &[Ket] {
        &self.eve_basis
    }
}

/// Key of a table-form entry: `pp/A1`, `pp/A2` or `lm05`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StatsKey {
    pub protocol: Protocol,
    /// Always `None` for LM05, which has a single encoding.
    pub encoding: Option<Encoding>,
}

impl StatsKey {
    pub fn new(protocol: Protocol, encoding: Option<Encoding>) -> Self {
        let encoding = match protocol {
            Protocol::PingPong => encoding,
            Protocol::Lm05 => None,
        };
        Self { protocol, encoding }
    }

    pub fn pp(encoding: Encoding) -> Self {
        Self::new(Protocol::PingPong, Some(encoding))
    }

    pub fn lm05() -> Self {
        Self::new(Protocol::Lm05, None)
    }
}

impl fmt::Display for StatsKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.encoding {
            Some(e) => write!(f, "{}/{}", self.protocol, e),
            None => write!(f, "{}", self.protocol),
        }
    }
}

impl FromStr for StatsKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (protocol, encoding) = match s.split_once('/') {
            Some((p, e)) => (p, Some(e)),
            None => (s, None),
        };
        let protocol: Protocol = protocol.parse()?;
        let encoding = match (protocol, encoding) {
            (Protocol::PingPong, Some(e)) => Some(e.parse::<Encoding>()?),
            (Protocol::PingPong, None) => return Err(format!("key '{s}' needs an encoding, e.g. pp/A1")),
            (Protocol::Lm05, None | Some("" | "-")) => None,
            (Protocol::Lm05, Some(e)) => return Err(format!("lm05 takes no encoding, got '{e}'")),
        };
        Ok(Self::new(protocol, encoding))
    }
}

/// Published statistics for one table entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TableStats {
    pub i_ab: f64,
    pub i_e_sum: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_ae: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub i_be: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qber: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detection_cost: Option<f64>,
}

impl TableStats {
    fn into_stats(self, key: StatsKey, costs: GateCosts) -> ProtocolStats {
        ProtocolStats {
            i_ab: self.i_ab,
            i_ae: self.i_ae,
            i_be: self.i_be,
            i_e_sum: self.i_e_sum,
            p_d: self.p_d,
            qber: self.qber,
            detection_cost: self.detection_cost,
            inconclusive: None,
            n_entangled: key.protocol.entangled_states(),
            gate_costs: costs,
        }
        .with_derived_detection_cost()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum AttackForm {
    Circuit(CircuitAttack),
    Table(BTreeMap<StatsKey, TableStats>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AttackSpec {
    pub name: String,
    pub form: AttackForm,
    pub costs: GateCosts,
    pub notes: String,
}

impl AttackSpec {
    pub fn circuit(&self) -> Result<&CircuitAttack, AttackError> {
        match &self.form {
            AttackForm::Circuit(c) => Ok(c),
            AttackForm::Table(_) => Err(AttackError::TableForm(self.name.clone())),
        }
    }

    pub fn is_circuit(&self) -> bool {
        matches!(self.form, AttackForm::Circuit(_))
    }

    fn validate(&self) -> Result<(), AttackError> {
        let invalid = |reason: String| AttackError::Invalid { attack: self.name.clone(), reason };
        if self.name.trim().is_empty() {
            return Err(invalid("empty name".into()));
        }
        if !self.costs.is_valid() {
            return Err(invalid(format!("gate costs must be finite and nonnegative, got {:?}", self.costs)));
        }
        if let AttackForm::Table(table) = &self.form {
            if table.is_empty() {
                return Err(invalid("table has no entries".into()));
            }
            for (key, entry) in table {
                let stats = entry.clone().into_stats(*key, self.costs);
                stats.validate().map_err(|e| invalid(format!("{key}: {e}")))?;
                if stats.p_d.is_none() && stats.detection_cost.is_none() {
                    return Err(invalid(format!("{key}: needs p_d or detection_cost")));
                }
            }
        }
        Ok(())
    }

    /// Serializes the attack in the attack-file format.
    pub fn to_file_json(&self) -> String {
        serde_json::to_string_pretty(&AttackFile::from(self)).expect("attack file serializes")
    }
}

/// Statistics for one (attack, protocol, encoding) combination. Circuit
/// attacks are simulated on every call.
pub fn stats_for(attack: &AttackSpec, protocol: Protocol, encoding: Option<Encoding>) -> Result<ProtocolStats, AttackError> {
    let key = StatsKey::new(protocol, encoding);
    match &attack.form {
        AttackForm::Table(table) => {
            let entry = table
                .get(&key)
                .ok_or_else(|| AttackError::MissingKey { attack: attack.name.clone(), key })?;
            Ok(entry.clone().into_stats(key, attack.costs))
        }
        AttackForm::Circuit(circuit) => {
            let (dist, p_d) = match protocol {
                Protocol::PingPong => {
                    let encoding = encoding.ok_or(AttackError::MissingEncoding { protocol })?;
                    (run_pp_message(encoding, circuit)?, run_pp_control(circuit)?)
                }
                Protocol::Lm05 => (run_lm05_message(circuit)?, run_lm05_control(circuit)?),
            };
            Ok(stats_from(&dist, p_d, attack.costs, protocol.entangled_states())?)
        }
    }
}

fn table(entries: &[(StatsKey, TableStats)]) -> AttackForm {
    AttackForm::Table(entries.iter().cloned().collect())
}

fn published(i_ab: f64, i_e_sum: f64, p_d: Option<f64>, qber: Option<f64>, detection_cost: Option<f64>) -> TableStats {
    TableStats { i_ab, i_e_sum, i_ae: None, i_be: None, p_d, qber, detection_cost }
}

pub const BUILTIN_NAMES: [&str; 6] = ["E1", "E2", "E3", "E4", "IR", "DCNOT"];

/// The built-in attack called `name`.
pub fn builtin(name: &str) -> Result<AttackSpec, AttackError> {
    let spec = match name {
        "E1" => AttackSpec {
            name: name.into(),
            form: table(&[
                (StatsKey::pp(Encoding::A1), published(0.311, 0.385, Some(0.5), Some(0.25), None)),
                (StatsKey::pp(Encoding::A2), published(0.311, 0.86, Some(0.5), None, None)),
                (StatsKey::lm05(), published(0.5488, 1.096, None, None, Some(0.375))),
            ]),
            costs: GateCosts::new(10.0, 4.0, 2.0),
            notes: "Wojcik's vacuum-ancilla attack; published statistics".into(),
        },
        "E2" => AttackSpec {
            name: name.into(),
            form: table(&[
                (StatsKey::pp(Encoding::A1), published(0.188, 0.377, Some(0.5), None, None)),
                (StatsKey::pp(Encoding::A2), published(0.423, 0.768, Some(0.5), None, None)),
            ]),
            costs: GateCosts::new(10.5, 5.5, 2.0),
            notes: "symmetrized Wojcik attack; published statistics".into(),
        },
        "E3" => AttackSpec {
            name: name.into(),
            form: AttackForm::Circuit(CircuitAttack::double_cnot()),
            costs: GateCosts::new(8.0, 4.0, 2.0),
            notes: "Pavicic's attack, realized as a double CNOT".into(),
        },
        "E4" => AttackSpec {
            name: name.into(),
            form: AttackForm::Circuit(CircuitAttack::identity()),
            costs: GateCosts::NONE,
            notes: "no attack".into(),
        },
        "IR" => AttackSpec {
            name: name.into(),
            form: table(&[
                (StatsKey::pp(Encoding::A1), published(0.1887, 1.1887, None, None, Some(0.125))),
                (StatsKey::lm05(), published(0.1887, 1.1887, None, None, Some(0.125))),
            ]),
            costs: GateCosts::NONE,
            notes: "intercept and resend on both legs; published statistics".into(),
        },
        "DCNOT" => AttackSpec {
            name: name.into(),
            form: AttackForm::Circuit(CircuitAttack::double_cnot()),
            costs: GateCosts::NONE,
            notes: "double CNOT attack".into(),
        },
        _ => return Err(AttackError::Unknown(name.into())),
    };
    Ok(spec)
}

/// Built-in attacks plus any attacks loaded at startup.
#[derive(Debug, Clone)]
pub struct AttackRegistry {
    entries: BTreeMap<String, AttackSpec>,
}

impl AttackRegistry {
    pub fn builtin() -> Self {
        let entries = BUILTIN_NAMES
            .iter()
            .map(|n| (n.to_string(), builtin(n).expect("built-in attack")))
            .collect();
        Self { entries }
    }

    pub fn get(&self, name: &str) -> Result<&AttackSpec, AttackError> {
        self.entries.get(name).ok_or_else(|| AttackError::Unknown(name.into()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn register(&mut self, spec: AttackSpec) -> Result<(), AttackError> {
        spec.validate()?;
        if self.entries.contains_key(&spec.name) {
            return Err(AttackError::DuplicateName(spec.name));
        }
        self.entries.insert(spec.name.clone(), spec);
        Ok(())
    }

    /// A copy of this registry with the entry of the same name swapped out.
    pub fn with_replacement(&self, spec: AttackSpec) -> Result<Self, AttackError> {
        spec.validate()?;
        if !self.entries.contains_key(&spec.name) {
            return Err(AttackError::Unknown(spec.name));
        }
        let mut entries = self.entries.clone();
        entries.insert(spec.name.clone(), spec);
        Ok(Self { entries })
    }

    pub fn stats_for(&self, name: &str, protocol: Protocol, encoding: Option<Encoding>) -> Result<ProtocolStats, AttackError> {
        stats_for(self.get(name)?, protocol, encoding)
    }
}

impl Default for AttackRegistry {
    fn default() -> Self {
        Self::builtin()
    }
}

// On-disk representation.

type ComplexPair = [f64; 2];

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AttackFile {
    name: String,
    form: FormTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    circuit: Option<CircuitFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    table: Option<BTreeMap<String, TableStats>>,
    costs: CostsFile,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    notes: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
enum FormTag {
    Circuit,
    Table,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitFile {
    ancilla_dims: Vec<usize>,
    ancilla_init: Vec<ComplexPair>,
    leg1: Vec<Vec<ComplexPair>>,
    leg2: Vec<Vec<ComplexPair>>,
    eve_basis: Vec<Vec<ComplexPair>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CostsFile {
    n1: f64,
    n2: f64,
    n3: f64,
}

fn to_complex(values: &[ComplexPair]) -> Vec<C64> {
    values.iter().map(|[re, im]| C64::new(*re, *im)).collect()
}

fn to_pairs(values: impl IntoIterator<Item = C64>) -> Vec<ComplexPair> {
    values.into_iter().map(|z| [z.re, z.im]).collect()
}

fn matrix_rows(op: &Operator) -> Vec<Vec<ComplexPair>> {
    op.matrix().rows().into_iter().map(|r| to_pairs(r.iter().copied())).collect()
}

impl From<&AttackSpec> for AttackFile {
    fn from(spec: &AttackSpec) -> Self {
        let (form, circuit, table) = match &spec.form {
            AttackForm::Circuit(c) => (
                FormTag::Circuit,
                Some(CircuitFile {
                    ancilla_dims: c.ancilla_dims().as_slice().to_vec(),
                    ancilla_init: to_pairs(c.ancilla_init().amplitudes().iter().copied()),
                    leg1: matrix_rows(c.leg1()),
                    leg2: matrix_rows(c.leg2()),
                    eve_basis: c.eve_basis().iter().map(|k| to_pairs(k.amplitudes().iter().copied())).collect(),
                }),
                None,
            ),
            AttackForm::Table(t) => (
                FormTag::Table,
                None,
                Some(t.iter().map(|(k, v)| (k.to_string(), v.clone())).collect()),
            ),
        };
        AttackFile {
            name: spec.name.clone(),
            form,
            circuit,
            table,
            costs: CostsFile { n1: spec.costs.n1, n2: spec.costs.n2, n3: spec.costs.n3 },
            notes: spec.notes.clone(),
        }
    }
}

fn leg_from_rows(name: &str, rows: &[Vec<ComplexPair>], ancilla_dims: &Dims) -> Result<Operator, AttackError> {
    let n = rows.len();
    let ancilla_total = ancilla_dims.total();
    if n == 0 || !n.is_multiple_of(ancilla_total) {
        return Err(AttackError::Parse(format!(
            "{name} has {n} rows, not a multiple of the ancilla dimension {ancilla_total}"
        )));
    }
    if let Some(row) = rows.iter().find(|r| r.len() != n) {
        return Err(AttackError::Parse(format!("{name} is not square: row of length {}", row.len())));
    }
    let dims = Dims::single(n / ancilla_total)?.concat(ancilla_dims);
    let matrix = Array2::from_shape_fn((n, n), |(r, c)| C64::new(rows[r][c][0], rows[r][c][1]));
    Operator::unitary(dims, matrix).map_err(|e| match e {
        QsimError::NotUnitary(dev) => AttackError::Invalid {
            attack: String::new(),
            reason: format!("{name} is not unitary (max |U†U - I| = {dev:.3e})"),
        },
        other => other.into(),
    })
}

/// Parses and validates an attack file.
pub fn load_attack(contents: &str) -> Result<AttackSpec, AttackError> {
    let file: AttackFile = serde_json::from_str(contents).map_err(|e| AttackError::Parse(e.to_string()))?;
    let name = file.name.clone();
    let with_name = |e: AttackError| match e {
        AttackError::Invalid { reason, .. } => AttackError::Invalid { attack: name.clone(), reason },
        other => other,
    };
    let form = match (file.form, file.circuit, file.table) {
        (FormTag::Circuit, Some(c), None) => {
            let ancilla_dims = Dims::new(c.ancilla_dims.clone())?;
            if c.ancilla_init.len() != ancilla_dims.total() {
                return Err(AttackError::Parse(format!(
                    "ancilla_init has {} amplitudes, ancilla dimension is {}",
                    c.ancilla_init.len(),
                    ancilla_dims.total()
                )));
            }
            let init = Ket::new(ancilla_dims.clone(), to_complex(&c.ancilla_init))?;
            let leg1 = leg_from_rows("leg1", &c.leg1, &ancilla_dims).map_err(with_name)?;
            let leg2 = leg_from_rows("leg2", &c.leg2, &ancilla_dims).map_err(with_name)?;
            let basis = c
                .eve_basis
                .iter()
                .map(|k| Ket::new(ancilla_dims.clone(), to_complex(k)))
                .collect::<Result<Vec<_>, _>>()?;
            AttackForm::Circuit(CircuitAttack::new(init, leg1, leg2, basis).map_err(with_name)?)
        }
        (FormTag::Table, None, Some(t)) => {
            let mut entries = BTreeMap::new();
            for (key, stats) in t {
                let key: StatsKey = key.parse().map_err(AttackError::Parse)?;
                if entries.insert(key, stats).is_some() {
                    return Err(AttackError::Parse(format!("duplicate table key {key}")));
                }
            }
            AttackForm::Table(entries)
        }
        (tag, _, _) => {
            return Err(AttackError::Parse(format!(
                "form {:?} requires exactly one '{}' block",
                tag,
                if tag == FormTag::Circuit { "circuit" } else { "table" }
            )))
        }
    };
    let spec = AttackSpec {
        name,
        form,
        costs: GateCosts::new(file.costs.n1, file.costs.n2, file.costs.n3),
        notes: file.notes,
    };
    spec.validate()?;
    Ok(spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn assert_core_stats(s: &ProtocolStats, i_ab: f64, i_e_sum: f64, p_d: f64, qber: f64) {
        assert_abs_diff_eq!(s.i_ab, i_ab, epsilon = 1e-12);
        assert_abs_diff_eq!(s.i_e_sum, i_e_sum, epsilon = 1e-12);
        assert_abs_diff_eq!(s.p_d.unwrap(), p_d, epsilon = 1e-12);
        assert_abs_diff_eq!(s.qber.unwrap(), qber, epsilon = 1e-12);
    }

    #[test]
    fn registry_covers_builtins_and_rejects_others() {
        let reg = AttackRegistry::builtin();
        for name in BUILTIN_NAMES {
            assert_eq!(reg.get(name).unwrap().name, name);
        }
        assert!(matches!(reg.get("E5"), Err(AttackError::Unknown(_))));
        assert_eq!(reg.names().count(), 6);
    }

    #[test]
    fn no_attack_baseline() {
        for encoding in Encoding::ALL {
            let s = stats_for(&builtin("E4").unwrap(), Protocol::PingPong, Some(encoding)).unwrap();
            assert_core_stats(&s, 1.0, 0.0, 0.0, 0.0);
            assert_eq!(s.gate_costs, GateCosts::NONE);
        }
    }

    #[test]
    fn pavicic_row_from_simulation() {
        let e3 = builtin("E3").unwrap();
        let s = stats_for(&e3, Protocol::PingPong, Some(Encoding::A2)).unwrap();
        assert_core_stats(&s, 1.0, 2.0, 0.0, 0.0);
        assert_eq!(s.gate_costs, GateCosts::new(8.0, 4.0, 2.0));
        assert_eq!(s.n_entangled, 1);
    }

    #[test]
    fn table_lookups() {
        let reg = AttackRegistry::builtin();
        let s = reg.stats_for("E1", Protocol::PingPong, Some(Encoding::A2)).unwrap();
        assert_eq!((s.i_ab, s.i_e_sum, s.p_d), (0.311, 0.86, Some(0.5)));
        let s = reg.stats_for("E1", Protocol::PingPong, Some(Encoding::A1)).unwrap();
        assert_eq!(s.detection_cost, Some(0.375));
        let s = reg.stats_for("E2", Protocol::PingPong, Some(Encoding::A2)).unwrap();
        assert_eq!((s.i_ab, s.i_e_sum, s.p_d), (0.423, 0.768, Some(0.5)));
        let s = reg.stats_for("IR", Protocol::Lm05, None).unwrap();
        assert_eq!((s.i_ab, s.i_e_sum, s.detection_cost), (0.1887, 1.1887, Some(0.125)));
        assert_eq!(s.n_entangled, 0);
        let s = reg.stats_for("E1", Protocol::Lm05, Some(Encoding::A2)).unwrap();
        assert_eq!((s.i_ab, s.i_e_sum, s.detection_cost), (0.5488, 1.096, Some(0.375)));
        assert!(matches!(
            reg.stats_for("IR", Protocol::PingPong, Some(Encoding::A2)),
            Err(AttackError::MissingKey { .. })
        ));
        assert!(matches!(
            reg.stats_for("E3", Protocol::PingPong, None),
            Err(AttackError::MissingEncoding { .. })
        ));
    }

    #[test]
    fn builtin_tables_pass_validation() {
        for name in BUILTIN_NAMES {
            builtin(name).unwrap().validate().unwrap();
        }
    }

    #[test]
    fn circuit_accessor_rejects_tables() {
        assert!(matches!(builtin("IR").unwrap().circuit(), Err(AttackError::TableForm(_))));
        assert!(builtin("DCNOT").unwrap().circuit().is_ok());
    }

    #[test]
    fn file_round_trip_matches_simulation() {
        let e3 = builtin("E3").unwrap();
        let mut loaded = load_attack(&e3.to_file_json()).unwrap();
        loaded.name = "dcnot-file".into();
        for encoding in Encoding::ALL {
            let a = stats_for(&e3, Protocol::PingPong, Some(encoding)).unwrap();
            let b = stats_for(&loaded, Protocol::PingPong, Some(encoding)).unwrap();
            assert_abs_diff_eq!(a.i_ab, b.i_ab, epsilon = 1e-12);
            assert_abs_diff_eq!(a.i_e_sum, b.i_e_sum, epsilon = 1e-12);
            assert_abs_diff_eq!(a.p_d.unwrap(), b.p_d.unwrap(), epsilon = 1e-12);
        }
        let ir = builtin("IR").unwrap();
        assert_eq!(load_attack(&ir.to_file_json()).unwrap(), ir);
    }

    #[test]
    fn identity_file_behaves_like_no_attack() {
        let text = r#"{
            "name": "id2",
            "form": "circuit",
            "circuit": {
                "ancilla_dims": [2],
                "ancilla_init": [[1,0],[0,0]],
                "leg1": [[[1,0],[0,0],[0,0],[0,0]],[[0,0],[1,0],[0,0],[0,0]],[[0,0],[0,0],[1,0],[0,0]],[[0,0],[0,0],[0,0],[1,0]]],
                "leg2": [[[1,0],[0,0],[0,0],[0,0]],[[0,0],[1,0],[0,0],[0,0]],[[0,0],[0,0],[1,0],[0,0]],[[0,0],[0,0],[0,0],[1,0]]],
                "eve_basis": [[[1,0],[0,0]],[[0,0],[1,0]]]
            },
            "costs": {"n1": 0, "n2": 0, "n3": 0}
        }"#;
        let spec = load_attack(text).unwrap();
        let e4 = builtin("E4").unwrap();
        for (protocol, encoding) in [
            (Protocol::PingPong, Some(Encoding::A1)),
            (Protocol::PingPong, Some(Encoding::A2)),
            (Protocol::Lm05, None),
        ] {
            assert_eq!(
                stats_for(&spec, protocol, encoding).unwrap(),
                stats_for(&e4, protocol, encoding).unwrap()
            );
        }
    }

    #[test]
    fn non_unitary_leg_is_rejected() {
        let text = r#"{
            "name": "bad",
            "form": "circuit",
            "circuit": {
                "ancilla_dims": [1],
                "ancilla_init": [[1,0]],
                "leg1": [[[1.001,0],[0,0]],[[0,0],[1,0]]],
                "leg2": [[[1,0],[0,0]],[[0,0],[1,0]]],
                "eve_basis": [[[1,0]]]
            },
            "costs": {"n1": 0, "n2": 0, "n3": 0}
        }"#;
        let err = load_attack(text).unwrap_err();
        assert!(err.to_string().contains("not unitary"), "{err}");
    }

    #[test]
    fn malformed_files_are_rejected() {
        assert!(matches!(load_attack("{"), Err(AttackError::Parse(_))));
        let wrong_block = r#"{"name":"x","form":"table","circuit":null,"costs":{"n1":0,"n2":0,"n3":0}}"#;
        assert!(matches!(load_attack(wrong_block), Err(AttackError::Parse(_))));
        let bad_key = r#"{"name":"x","form":"table","table":{"bb84":{"i_ab":1,"i_e_sum":0,"p_d":0}},"costs":{"n1":0,"n2":0,"n3":0}}"#;
        assert!(matches!(load_attack(bad_key), Err(AttackError::Parse(_))));
        let out_of_range = r#"{"name":"x","form":"table","table":{"lm05":{"i_ab":1.5,"i_e_sum":0,"p_d":0}},"costs":{"n1":0,"n2":0,"n3":0}}"#;
        assert!(matches!(load_attack(out_of_range), Err(AttackError::Invalid { .. })));
        let negative_cost = r#"{"name":"x","form":"table","table":{"lm05":{"i_ab":1,"i_e_sum":0,"p_d":0}},"costs":{"n1":-1,"n2":0,"n3":0}}"#;
        assert!(matches!(load_attack(negative_cost), Err(AttackError::Invalid { .. })));
    }

    #[test]
    fn duplicate_registration_fails() {
        let mut reg = AttackRegistry::builtin();
        assert!(matches!(reg.register(builtin("E1").unwrap()), Err(AttackError::DuplicateName(_))));
        let mut custom = builtin("IR").unwrap();
        custom.name = "IR-copy".into();
        reg.register(custom).unwrap();
        assert!(reg.get("IR-copy").is_ok());
    }

    #[test]
    fn replacement_leaves_original_untouched() {
        let reg = AttackRegistry::builtin();
        let mut tampered = builtin("E1").unwrap();
        if let AttackForm::Table(t) = &mut tampered.form {
            t.get_mut(&StatsKey::pp(Encoding::A1)).unwrap().i_ab = 0.5;
        }
        let swapped = reg.with_replacement(tampered).unwrap();
        assert_eq!(swapped.stats_for("E1", Protocol::PingPong, Some(Encoding::A1)).unwrap().i_ab, 0.5);
        assert_eq!(reg.stats_for("E1", Protocol::PingPong, Some(Encoding::A1)).unwrap().i_ab, 0.311);
    }

    #[test]
    fn stats_keys_parse() {
        assert_eq!("pp/A1".parse::<StatsKey>().unwrap(), StatsKey::pp(Encoding::A1));
        assert_eq!("lm05".parse::<StatsKey>().unwrap(), StatsKey::lm05());
        assert!("pp".parse::<StatsKey>().is_err());
        assert!("lm05/A1".parse::<StatsKey>().is_err());
    }
}
