//! Weight restrictions that specialize the Ping-Pong game.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use super::bimatrix::BimatrixGame;
use super::expr::LinearExpr;
use super::weights::{Family, Weight};
use super::GameError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    /// No restriction.
    Generic,
    /// `w_a = w_b = w_d = w_e = w_I` and `w_c = w_f = w_P`.
    EqualWeights,
    /// Eavesdropping without denial of service: `w_b = w_e = 0`.
    NoDos,
    /// Eve pays nothing for gates: `w_1 = w_2 = w_3 = 0`.
    UnlimitedEve,
}

impl Scenario {
    pub const ALL: [Scenario; 4] = [Scenario::Generic, Scenario::EqualWeights, Scenario::NoDos, Scenario::UnlimitedEve];

    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::Generic => "generic",
            Scenario::EqualWeights => "equal-weights",
            Scenario::NoDos => "no-dos",
            Scenario::UnlimitedEve => "unlimited-eve",
        }
    }

    /// Symbol replacements this scenario imposes.
    pub fn substitution(self) -> BTreeMap<Weight, LinearExpr> {
        use Weight::*;
        let to = |syms: &[Weight], e: LinearExpr| syms.iter().map(|s| (*s, e.clone())).collect::<Vec<_>>();
        match self {
            Scenario::Generic => BTreeMap::new(),
            Scenario::EqualWeights => to(&[A, B, D, E], LinearExpr::symbol(Info))
                .into_iter()
                .chain(to(&[C, F], LinearExpr::symbol(Prob)))
                .collect(),
            Scenario::NoDos => to(&[B, E], LinearExpr::zero()).into_iter().collect(),
            Scenario::UnlimitedEve => to(&[One, Two, Three], LinearExpr::zero()).into_iter().collect(),
        }
    }

    /// Family and free symbols of a game after the restriction.
    pub fn symbols(self) -> (Family, Vec<Weight>) {
        match self {
            Scenario::EqualWeights => (Family::PpEqual, Family::PpEqual.symbols().to_vec()),
            _ => {
                let pinned = self.substitution();
                let free = Family::Pp.symbols().iter().copied().filter(|w| !pinned.contains_key(w)).collect();
                (Family::Pp, free)
            }
        }
    }

    /// Restricts a Ping-Pong game. Two-way games only accept `Generic`.
    pub fn apply(self, game: &BimatrixGame) -> Result<BimatrixGame, GameError> {
        if self == Scenario::Generic {
            return Ok(game.clone());
        }
        if game.family() != Family::Pp {
            return Err(GameError::UnsupportedScenario { scenario: self, family: game.family() });
        }
        let map = self.substitution();
        let (family, symbols) = self.symbols();
        game.map_payoffs(family, symbols, |e| e.substitute(&map))
    }
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Scenario {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Scenario::ALL
            .into_iter()
            .find(|sc| sc.as_str().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| GameError::UnknownScenario(s.into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::AttackRegistry;
    use crate::game::{pp_game, twoway_game, Profile};

    fn e(s: &str) -> LinearExpr {
        s.parse().unwrap()
    }

    #[test]
    fn equal_weight_cells() {
        let g = Scenario::EqualWeights.apply(&pp_game(&AttackRegistry::builtin()).unwrap()).unwrap();
        assert_eq!(g.family(), Family::PpEqual);
        let c = g.cell(Profile::new(0, 1));
        assert!(c.row_payoff.max_abs_diff(&e("-0.189w_I+0.5w_P")) < 1e-9);
        let c = g.cell(Profile::new(1, 0));
        assert!(c.col_payoff.max_abs_diff(&e("0.549w_I+0.5w_P-10w_1-4w_2-2w_3")) < 1e-9);
    }

    #[test]
    fn pinned_symbols_disappear() {
        let g = Scenario::NoDos.apply(&pp_game(&AttackRegistry::builtin()).unwrap()).unwrap();
        assert!(!g.symbols().contains(&Weight::B));
        let c = g.cell(Profile::new(1, 2));
        assert!(c.col_payoff.max_abs_diff(&e("2w_d+w_f-8w_1-4w_2-2w_3")) < 1e-12);
        let g = Scenario::UnlimitedEve.apply(&pp_game(&AttackRegistry::builtin()).unwrap()).unwrap();
        assert_eq!(g.symbols().len(), 6);
    }

    #[test]
    fn names() {
        for s in Scenario::ALL {
            assert_eq!(s.as_str().parse::<Scenario>().unwrap(), s);
        }
        assert!("nope".parse::<Scenario>().is_err());
    }

    #[test]
    fn two_way_game_rejects_restrictions() {
        let g = twoway_game(&AttackRegistry::builtin()).unwrap();
        assert!(Scenario::Generic.apply(&g).is_ok());
        assert!(matches!(Scenario::NoDos.apply(&g), Err(GameError::UnsupportedScenario { .. })));
    }
}
