//! Payoff weight symbols and numeric assignments to them.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::GameError;

/// A weight symbol. Declaration order is display order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Weight {
    A,
    B,
    C,
    D,
    E,
    F,
    /// Common weight of every information term under equal weights.
    Info,
    /// Common weight of every probability term under equal weights.
    Prob,
    One,
    Two,
    Three,
    G,
    H,
    I,
    J,
    K,
    L,
    M,
}

impl Weight {
    pub const COUNT: usize = 18;

    pub const ALL: [Weight; Weight::COUNT] = [
        Weight::A,
        Weight::B,
        Weight::C,
        Weight::D,
        Weight::E,
        Weight::F,
        Weight::Info,
        Weight::Prob,
        Weight::One,
        Weight::Two,
        Weight::Three,
        Weight::G,
        Weight::H,
        Weight::I,
        Weight::J,
        Weight::K,
        Weight::L,
        Weight::M,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    /// Subscript as written after `w_`.
    pub fn subscript(self) -> &'static str {
        match self {
            Weight::A => "a",
            Weight::B => "b",
            Weight::C => "c",
            Weight::D => "d",
            Weight::E => "e",
            Weight::F => "f",
            Weight::Info => "I",
            Weight::Prob => "P",
            Weight::One => "1",
            Weight::Two => "2",
            Weight::Three => "3",
            Weight::G => "g",
            Weight::H => "h",
            Weight::I => "i",
            Weight::J => "j",
            Weight::K => "k",
            Weight::L => "l",
            Weight::M => "m",
        }
    }

    pub fn name(self) -> String {
        format!("w_{}", self.subscript())
    }

    fn from_subscript(s: &str) -> Option<Weight> {
        Weight::ALL.into_iter().find(|w| w.subscript() == s)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "w_{}", self.subscript())
    }
}

impl FromStr for Weight {
    type Err = GameError;

    /// Accepts `w_a`, `w_{a}` and `wa`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let rest = s.trim().strip_prefix('w').ok_or_else(|| GameError::UnknownWeight(s.into()))?;
        let rest = rest.strip_prefix('_').unwrap_or(rest);
        let sub = rest.strip_prefix('{').and_then(|r| r.strip_suffix('}')).unwrap_or(rest);
        Weight::from_subscript(sub).ok_or_else(|| GameError::UnknownWeight(s.into()))
    }
}

impl TryFrom<String> for Weight {
    type Error = GameError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<Weight> for String {
    fn from(w: Weight) -> Self {
        w.name()
    }
}

/// Which set of weights a game is written over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// Ping-Pong game: `w_a`..`w_f`, `w_1`..`w_3`.
    Pp,
    /// Ping-Pong game with equal information and probability weights.
    PpEqual,
    /// Two-way protocol game: `w_g`..`w_m`.
    TwoWay,
}

impl Family {
    pub fn symbols(self) -> &'static [Weight] {
        use Weight::*;
        match self {
            Family::Pp => &[A, B, C, D, E, F, One, Two, Three],
            Family::PpEqual => &[Info, Prob, One, Two, Three],
            Family::TwoWay => &[G, H, I, J, K, L, M],
        }
    }

    pub fn contains(self, w: Weight) -> bool {
        self.symbols().contains(&w)
    }
}

/// Values for a fixed set of weight symbols. Values are finite and
/// nonnegative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightAssignment {
    values: [f64; Weight::COUNT],
    present: [bool; Weight::COUNT],
}

impl WeightAssignment {
    pub fn new(values: impl IntoIterator<Item = (Weight, f64)>) -> Result<Self, GameError> {
        let mut out = Self { values: [0.0; Weight::COUNT], present: [false; Weight::COUNT] };
        for (w, v) in values {
            if !v.is_finite() || v < 0.0 {
                return Err(GameError::InvalidWeight { weight: w, value: v });
            }
            if out.present[w.index()] {
                return Err(GameError::DuplicateWeight(w));
            }
            out.values[w.index()] = v;
            out.present[w.index()] = true;
        }
        Ok(out)
    }

    /// An assignment that covers exactly `symbols`, in that order.
    pub fn from_values(symbols: &[Weight], values: &[f64]) -> Result<Self, GameError> {
        if symbols.len() != values.len() {
            return Err(GameError::Parse(format!("{} symbols but {} values", symbols.len(), values.len())));
        }
        Self::new(symbols.iter().copied().zip(values.iter().copied()))
    }

    /// Parses a flat object such as `{"w_a": 1.0, "w_b": 0.5}`.
    pub fn from_json(text: &str) -> Result<Self, GameError> {
        let raw: BTreeMap<String, f64> = serde_json::from_str(text).map_err(|e| GameError::Parse(e.to_string()))?;
        let parsed = raw
            .into_iter()
            .map(|(k, v)| Ok((k.parse::<Weight>()?, v)))
            .collect::<Result<Vec<_>, GameError>>()?;
        Self::new(parsed)
    }

    pub fn to_json(&self) -> String {
        let map: BTreeMap<String, f64> = self.iter().map(|(w, v)| (w.name(), v)).collect();
        serde_json::to_string(&map).expect("weights serialize")
    }

    pub fn get(&self, w: Weight) -> Result<f64, GameError> {
        if self.present[w.index()] {
            Ok(self.values[w.index()])
        } else {
            Err(GameError::MissingWeight(w))
        }
    }

    pub fn contains(&self, w: Weight) -> bool {
        self.present[w.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (Weight, f64)> + '_ {
        Weight::ALL.into_iter().filter(|w| self.present[w.index()]).map(|w| (w, self.values[w.index()]))
    }

    /// Every covered weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self, GameError> {
        Self::new(self.iter().map(|(w, v)| (w, v * factor)))
    }

    /// Fails unless the assignment covers exactly `symbols`.
    pub fn require_exactly(&self, symbols: &[Weight], context: &str) -> Result<(), GameError> {
        if let Some(missing) = symbols.iter().find(|w| !self.contains(**w)) {
            return Err(GameError::MissingWeight(*missing));
        }
        if let Some((extra, _)) = self.iter().find(|(w, _)| !symbols.contains(w)) {
            return Err(GameError::UnexpectedWeight { weight: extra, context: context.into() });
        }
        Ok(())
    }

    /// Dense values indexed by [`Weight::index`]; absent weights read as zero.
    #[cfg(test)]
    pub(crate) fn dense(&self) -> &[f64; Weight::COUNT] {
        &self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_names_round_trip() {
        for w in Weight::ALL {
            assert_eq!(w.name().parse::<Weight>().unwrap(), w);
            assert_eq!(format!("w_{{{}}}", w.subscript()).parse::<Weight>().unwrap(), w);
        }
        assert!("w_z".parse::<Weight>().is_err());
        assert!("x_a".parse::<Weight>().is_err());
    }

    #[test]
    fn families_partition_the_original_symbols() {
        let pp = Family::Pp.symbols();
        let tw = Family::TwoWay.symbols();
        assert_eq!(pp.len() + tw.len(), 16);
        assert!(pp.iter().all(|w| !tw.contains(w)));
    }

    #[test]
    fn json_weights() {
        let w = WeightAssignment::from_json(r#"{"w_I": 0.6, "w_P": 1, "w_1": 0.1, "w_2": 0.1, "w_3": 0.1}"#).unwrap();
        assert_eq!(w.get(Weight::Info).unwrap(), 0.6);
        w.require_exactly(Family::PpEqual.symbols(), "test").unwrap();
        assert!(matches!(w.require_exactly(Family::Pp.symbols(), "test"), Err(GameError::MissingWeight(_))));
        assert!(WeightAssignment::from_json(r#"{"w_a": -1}"#).is_err());
        assert!(WeightAssignment::from_json(r#"{"w_q": 1}"#).is_err());
        assert!(WeightAssignment::from_json(r#"{"w_a": "one"}"#).is_err());
        let back = WeightAssignment::from_json(&w.to_json()).unwrap();
        assert_eq!(back, w);
    }

    #[test]
    fn extra_weights_are_reported() {
        let w = WeightAssignment::new([(Weight::A, 1.0), (Weight::G, 1.0)]).unwrap();
        assert!(matches!(
            w.require_exactly(&[Weight::A], "pp"),
            Err(GameError::UnexpectedWeight { weight: Weight::G, .. })
        ));
    }
}
