//! Protocol statistics as weighted two-player games.
//!
//! Payoffs are linear in nonnegative weights, so every cell is a
//! [`LinearExpr`]. Numeric analysis substitutes a [`WeightAssignment`];
//! symbolic analysis derives the inequalities on the weights under which a
//! profile is an equilibrium.

mod assemble;
mod bimatrix;
mod expr;
mod pareto;
pub mod reference;
mod region;
mod scenario;
mod verify;
mod weights;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::attacks::{AttackError, AttackRegistry};

pub use assemble::{
    assemble_pp_game, assemble_twoway_game, pp_game, pp_stats, twoway_game, twoway_stats, PpStats, TwoWayStats,
    PP_ATTACKS, TWOWAY_ATTACKS, TWOWAY_PROTOCOLS,
};
pub use bimatrix::{pareto_front, pure_nash, BimatrixGame, Cell, EquilibriumReport, NumericGame, Player, Profile, DEFAULT_EPS};
pub use expr::{format_coefficient, Inequality, LinearExpr};
pub use pareto::{
    near_boundary, pareto_nash_condition, pareto_nash_condition_no_attack, table_maximum_condition, DominanceClause,
    ParetoNashCondition,
};
pub use region::{check_region, nash_region, Comparison, InequalitySystem, Redundancy, RegionEntry, REGION_TOL};
pub use scenario::Scenario;
pub use verify::{
    check_pareto_bound, derived_constants, verify_tables, CellCheck, ConditionCheck, ConstantCheck, ParetoCheck,
    ParetoMismatch, RowCheck, Sample, VerificationReport, VerifyConfig,
};
pub use weights::{Family, Weight, WeightAssignment};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GameError {
    #[error("unknown weight symbol '{0}'")]
    UnknownWeight(String),
    #[error("no value for {0}")]
    MissingWeight(Weight),
    #[error("{weight} is not a free symbol of the {context}")]
    UnexpectedWeight { weight: Weight, context: String },
    #[error("{0} given twice")]
    DuplicateWeight(Weight),
    #[error("{weight} must be finite and nonnegative, got {value}")]
    InvalidWeight { weight: Weight, value: f64 },
    #[error("unknown profile '{0}'")]
    UnknownProfile(String),
    #[error("unknown scenario '{0}'; expected generic, equal-weights, no-dos or unlimited-eve")]
    UnknownScenario(String),
    #[error("scenario {scenario} does not apply to the {family:?} game")]
    UnsupportedScenario { scenario: Scenario, family: Family },
    #[error("unknown game '{0}'; expected pp or twoway")]
    UnknownGame(String),
    #[error("no statistics for {0}")]
    MissingStats(String),
    #[error("statistics for {key} lack {quantity}")]
    MissingQuantity { quantity: String, key: String },
    #[error("invalid game: {0}")]
    InvalidGame(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Attack(#[from] AttackError),
}

/// Which game to build.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum GameKind {
    /// Ping-Pong protocol: encodings A1/A2 against attacks E1..E4.
    Pp,
    /// Protocol choice PPP/LM05 against IR, DCNOT and Wojcik's attack.
    TwoWay,
}

impl GameKind {
    pub fn as_str(self) -> &'static str {
        match self {
            GameKind::Pp => "pp",
            GameKind::TwoWay => "twoway",
        }
    }
}

impl fmt::Display for GameKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for GameKind {
    type Err = GameError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pp" | "ping-pong" => Ok(GameKind::Pp),
            "twoway" | "two-way" => Ok(GameKind::TwoWay),
            _ => Err(GameError::UnknownGame(s.into())),
        }
    }
}

/// Assembles a game from the registry and applies a scenario.
pub fn build_game(kind: GameKind, scenario: Scenario, registry: &AttackRegistry) -> Result<BimatrixGame, GameError> {
    let game = match kind {
        GameKind::Pp => pp_game(registry)?,
        GameKind::TwoWay => twoway_game(registry)?,
    };
    scenario.apply(&game)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn equal_point() -> WeightAssignment {
        use Weight::*;
        WeightAssignment::new([(Info, 0.6), (Prob, 1.0), (One, 0.1), (Two, 0.1), (Three, 0.1)]).unwrap()
    }

    #[test]
    fn equal_weight_point_payoffs_and_equilibria() {
        let g = build_game(GameKind::Pp, Scenario::EqualWeights, &AttackRegistry::builtin()).unwrap();
        let n = g.evaluate(&equal_point()).unwrap();
        assert!((n.at(Profile::new(0, 0)).0 - 0.4556).abs() < 1e-3);
        assert!((n.at(Profile::new(0, 3)).1 - 0.4).abs() < 1e-12);
        let report = EquilibriumReport::analyze(n, DEFAULT_EPS);
        let e4 = vec![Profile::new(0, 3), Profile::new(1, 3)];
        assert_eq!(report.nash, e4);
        assert_eq!(report.pareto_nash, e4);
        assert!(report.pareto.contains(&Profile::new(0, 3)));
    }

    #[test]
    fn zero_weights_make_every_profile_nash() {
        let g = build_game(GameKind::Pp, Scenario::Generic, &AttackRegistry::builtin()).unwrap();
        let w = WeightAssignment::new(Family::Pp.symbols().iter().map(|s| (*s, 0.0))).unwrap();
        let n = g.evaluate(&w).unwrap();
        assert!(n.payoffs.iter().flatten().all(|(a, b)| *a == 0.0 && *b == 0.0));
        assert_eq!(pure_nash(&n, DEFAULT_EPS).len(), 8);
    }

    #[test]
    fn no_dos_large_w_d_supports_pavicic() {
        use Weight::*;
        let g = build_game(GameKind::Pp, Scenario::NoDos, &AttackRegistry::builtin()).unwrap();
        let w = WeightAssignment::new([(A, 1.0), (C, 1.0), (D, 10.0), (F, 1.0), (One, 0.1), (Two, 0.1), (Three, 0.1)])
            .unwrap();
        assert!(pure_nash(&g.evaluate(&w).unwrap(), DEFAULT_EPS).contains(&Profile::new(1, 2)));
    }

    #[test]
    fn twoway_lm05_ir_point() {
        use Weight::*;
        let g = build_game(GameKind::TwoWay, Scenario::Generic, &AttackRegistry::builtin()).unwrap();
        let w = WeightAssignment::new([(G, 1.0), (H, 1.0), (I, 1.0), (J, 0.5), (K, 0.2), (L, 1.0), (M, 1.0)]).unwrap();
        let nash = pure_nash(&g.evaluate(&w).unwrap(), DEFAULT_EPS);
        assert!(nash.contains(&g.profile("LM05,IR").unwrap()));
    }

    #[test]
    fn evaluation_requires_exact_coverage() {
        let g = build_game(GameKind::Pp, Scenario::Generic, &AttackRegistry::builtin()).unwrap();
        assert!(matches!(g.evaluate(&equal_point()), Err(GameError::MissingWeight(_))));
    }
}
