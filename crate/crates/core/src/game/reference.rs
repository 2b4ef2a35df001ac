//! Published payoff tables and equilibrium conditions used as regression
//! targets. Coefficients carry three or four significant decimals.

use super::bimatrix::{BimatrixGame, Player};
use super::expr::{Inequality, LinearExpr};
use super::region::{Comparison, InequalitySystem};
use super::scenario::Scenario;
use super::{GameError, GameKind};

/// A published grid of payoffs for one player.
#[derive(Debug, Clone, Copy)]
pub struct PayoffTable {
    pub name: &'static str,
    pub game: GameKind,
    pub scenario: Scenario,
    pub player: Player,
    pub cells: &'static [&'static [&'static str]],
}

pub const PAYOFF_TABLES: [PayoffTable; 6] = [
    PayoffTable {
        name: "pp-alice",
        game: GameKind::Pp,
        scenario: Scenario::Generic,
        player: Player::Row,
        cells: &[
            &["0.311w_a-0.385w_b+0.5w_c", "0.188w_a-0.377w_b+0.5w_c", "w_a", "w_a"],
            &["0.311w_a-0.86w_b+0.5w_c", "0.423w_a-0.768w_b+0.5w_c", "w_a-2w_b", "w_a"],
        ],
    },
    PayoffTable {
        name: "pp-eve",
        game: GameKind::Pp,
        scenario: Scenario::Generic,
        player: Player::Col,
        cells: &[
            &[
                "0.385w_d-0.311w_e+0.5w_f-10w_1-4w_2-2w_3",
                "0.377w_d-0.188w_e+0.5w_f-10.5w_1-5.5w_2-2w_3",
                "-w_e+w_f-8w_1-4w_2-2w_3",
                "-w_e+w_f",
            ],
            &[
                "0.86w_d-0.311w_e+0.5w_f-10w_1-4w_2-2w_3",
                "0.768w_d-0.423w_e+0.5w_f-10.5w_1-5.5w_2-2w_3",
                "2w_d-w_e+w_f-8w_1-4w_2-2w_3",
                "-w_e+w_f",
            ],
        ],
    },
    PayoffTable {
        name: "equal-weights-alice",
        game: GameKind::Pp,
        scenario: Scenario::EqualWeights,
        player: Player::Row,
        cells: &[
            &["-0.074w_I+0.5w_P", "-0.189w_I+0.5w_P", "w_I", "w_I"],
            &["-0.549w_I+0.5w_P", "-0.345w_I+0.5w_P", "-w_I", "w_I"],
        ],
    },
    PayoffTable {
        name: "equal-weights-eve",
        game: GameKind::Pp,
        scenario: Scenario::EqualWeights,
        player: Player::Col,
        cells: &[
            &[
                "0.074w_I+0.5w_P-10w_1-4w_2-2w_3",
                "0.189w_I+0.5w_P-10.5w_1-5.5w_2-2w_3",
                "-w_I+w_P-8w_1-4w_2-2w_3",
                "-w_I+w_P",
            ],
            &[
                "0.549w_I+0.5w_P-10w_1-4w_2-2w_3",
                "0.345w_I+0.5w_P-10.5w_1-5.5w_2-2w_3",
                "w_I+w_P-8w_1-4w_2-2w_3",
                "-w_I+w_P",
            ],
        ],
    },
    PayoffTable {
        name: "twoway-alice",
        game: GameKind::TwoWay,
        scenario: Scenario::Generic,
        player: Player::Row,
        cells: &[
            &["0.1887w_g-1.1887w_h+0.125w_i-w_j", "w_g-w_j", "0.311w_g-0.385w_h+0.375w_i-w_j"],
            &["0.1887w_g-1.1887w_h+0.125w_i", "w_g-2w_h+0.125w_i", "0.5488w_g-1.096w_h+0.375w_i"],
        ],
    },
    PayoffTable {
        name: "twoway-eve",
        game: GameKind::TwoWay,
        scenario: Scenario::Generic,
        player: Player::Col,
        cells: &[
            &["1.1887w_k-0.1887w_l+0.875w_m", "-w_l+w_m", "0.385w_k-0.311w_l+0.625w_m"],
            &["1.1887w_k-0.1887w_l+0.875w_m", "2w_k-w_l+0.875w_m", "1.096w_k-0.5488w_l+0.625w_m"],
        ],
    },
];

impl PayoffTable {
    pub fn cell(&self, row: usize, col: usize) -> LinearExpr {
        self.cells[row][col].parse().expect("reference cell parses")
    }
}

/// One published condition and the best-response comparison it encodes:
/// (text, player, opponent strategy, preferred, other).
pub type ConditionSpec = (&'static str, Player, &'static str, &'static str, &'static str);

#[derive(Debug, Clone, Copy)]
pub struct RegionRow {
    pub profile: &'static str,
    pub conditions: &'static [ConditionSpec],
}

/// A published list of equilibrium profiles with their weight conditions.
#[derive(Debug, Clone, Copy)]
pub struct RegionTable {
    pub name: &'static str,
    pub game: GameKind,
    pub scenario: Scenario,
    pub rows: &'static [RegionRow],
}

use Player::{Col as EVE, Row as ALICE};

const GENERIC_E1_OVER_E2: ConditionSpec = ("0.123w_e-0.008w_d <= 0.5w_1+1.5w_2", EVE, "A1", "E1", "E2");

pub const REGION_TABLES: [RegionTable; 4] = [
    RegionTable {
        name: "pp-generic",
        game: GameKind::Pp,
        scenario: Scenario::Generic,
        rows: &[
            RegionRow {
                profile: "A1,E1",
                conditions: &[
                    GENERIC_E1_OVER_E2,
                    ("0.385w_d+0.689w_e >= 0.5w_f+10w_1+4w_2+2w_3", EVE, "A1", "E1", "E4"),
                ],
            },
            RegionRow {
                profile: "A1,E2",
                conditions: &[
                    ("w_b >= 0.601w_a", ALICE, "E2", "A1", "A2"),
                    ("0.123w_e-0.008w_d >= 0.5w_1+1.5w_2", EVE, "A1", "E2", "E1"),
                    ("0.377w_d+0.812w_e >= 0.5w_f+10.5w_1+5.5w_2+2w_3", EVE, "A1", "E2", "E4"),
                ],
            },
            RegionRow {
                profile: "A1,E4",
                conditions: &[
                    GENERIC_E1_OVER_E2,
                    ("0.385w_d+0.689w_e <= 0.5w_f+10w_1+4w_2+2w_3", EVE, "A1", "E4", "E1"),
                ],
            },
            RegionRow {
                profile: "A2,E4",
                conditions: &[
                    ("w_d <= 4w_1+2w_2+w_3", EVE, "A2", "E4", "E3"),
                    ("0.86w_d+0.689w_e <= 0.5w_f+10w_1+4w_2+2w_3", EVE, "A2", "E4", "E1"),
                ],
            },
        ],
    },
    RegionTable {
        name: "pp-no-dos",
        game: GameKind::Pp,
        scenario: Scenario::NoDos,
        rows: &[
            RegionRow {
                profile: "A1,E1",
                conditions: &[("w_d >= 1.2987w_f+25.974w_1+10.3896w_2+5.1948w_3", EVE, "A1", "E1", "E4")],
            },
            RegionRow {
                profile: "A1,E4",
                conditions: &[("w_d <= 1.2987w_f+25.974w_1+10.3896w_2+5.1948w_3", EVE, "A1", "E4", "E1")],
            },
            RegionRow {
                profile: "A2,E3",
                conditions: &[("w_d >= 4w_1+2w_2+w_3", EVE, "A2", "E3", "E4")],
            },
            RegionRow {
                profile: "A2,E4",
                conditions: &[("w_d <= 4w_1+2w_2+w_3", EVE, "A2", "E4", "E3")],
            },
        ],
    },
    RegionTable {
        name: "pp-unlimited-eve",
        game: GameKind::Pp,
        scenario: Scenario::UnlimitedEve,
        rows: &[
            RegionRow {
                profile: "A1,E1",
                conditions: &[
                    ("w_d >= 15.375w_e", EVE, "A1", "E1", "E2"),
                    ("0.385w_d+0.689w_e >= 0.5w_f", EVE, "A1", "E1", "E4"),
                ],
            },
            RegionRow {
                profile: "A1,E2",
                conditions: &[
                    ("w_d <= 15.375w_e", EVE, "A1", "E2", "E1"),
                    ("0.377w_d+0.812w_e >= 0.5w_f", EVE, "A1", "E2", "E4"),
                    ("w_b >= 0.601w_a", ALICE, "E2", "A1", "A2"),
                ],
            },
            RegionRow {
                profile: "A1,E3",
                conditions: &[
                    ("0.385w_d+0.689w_e <= 0.5w_f", EVE, "A1", "E3", "E1"),
                    ("0.377w_d+0.812w_e <= 0.5w_f", EVE, "A1", "E3", "E2"),
                ],
            },
            RegionRow {
                profile: "A1,E4",
                conditions: &[
                    ("0.385w_d+0.689w_e <= 0.5w_f", EVE, "A1", "E4", "E1"),
                    ("0.377w_d+0.812w_e <= 0.5w_f", EVE, "A1", "E4", "E2"),
                ],
            },
        ],
    },
    RegionTable {
        name: "twoway",
        game: GameKind::TwoWay,
        scenario: Scenario::Generic,
        rows: &[
            RegionRow { profile: "LM05,IR", conditions: &[("w_k <= w_l", EVE, "LM05", "IR", "DCNOT")] },
            RegionRow {
                profile: "PPP,DCNOT",
                conditions: &[
                    ("2w_h-w_j >= 0.125w_i", ALICE, "DCNOT", "PPP", "LM05"),
                    ("w_m >= 9.5096w_k+6.4904w_l", EVE, "PPP", "DCNOT", "IR"),
                ],
            },
            RegionRow {
                profile: "LM05,DCNOT",
                conditions: &[
                    ("2w_h-w_j <= 0.125w_i", ALICE, "DCNOT", "LM05", "PPP"),
                    ("w_k >= w_l", EVE, "LM05", "DCNOT", "IR"),
                    ("w_m >= 1.8048w_l-3.616w_k", EVE, "LM05", "DCNOT", "Wojcik"),
                ],
            },
        ],
    },
];

impl RegionRow {
    /// The published conditions as a system, each tagged with its
    /// comparison resolved against `game`.
    pub fn system(&self, game: &BimatrixGame) -> Result<InequalitySystem, GameError> {
        let mut system = InequalitySystem::new();
        for &(text, player, given, preferred, other) in self.conditions {
            let inequality: Inequality = text.parse()?;
            let (given, preferred, other) = match player {
                Player::Row => (game.col_index(given)?, game.row_index(preferred)?, game.row_index(other)?),
                Player::Col => (game.row_index(given)?, game.col_index(preferred)?, game.col_index(other)?),
            };
            system.push(inequality, Some(Comparison { player, given, preferred, other }));
        }
        Ok(system)
    }
}

/// The published two-sided bound for both "Eve does nothing" profiles of the
/// equal-weight game to be Pareto-optimal Nash equilibria.
pub const PARETO_BOUND: [&str; 2] = ["0.4655w_P <= w_I", "w_I <= 4w_1+2w_2+w_3"];

pub fn pareto_bound() -> InequalitySystem {
    let mut system = InequalitySystem::new();
    for text in PARETO_BOUND {
        system.push(text.parse().expect("bound parses"), None);
    }
    system
}
