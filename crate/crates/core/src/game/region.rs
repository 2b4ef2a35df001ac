//! Weight regions in which a profile is a pure Nash equilibrium.

use std::fmt;

use serde::Serialize;

use super::bimatrix::{BimatrixGame, NumericGame, Player, Profile};
use super::expr::{Inequality, LinearExpr};
use super::weights::WeightAssignment;
use super::GameError;

/// Slack granted to non-strict inequalities when checking a point.
pub const REGION_TOL: f64 = 1e-9;

/// "`player` weakly prefers `preferred` over `other` while the opponent
/// plays `given`." Indices are rows for Alice and columns for Eve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Comparison {
    pub player: Player,
    pub given: usize,
    pub preferred: usize,
    pub other: usize,
}

impl Comparison {
    /// The comparison that keeps `profile` stable against one deviation.
    pub fn deviation(profile: Profile, player: Player, to: usize) -> Self {
        match player {
            Player::Row => Self { player, given: profile.col, preferred: profile.row, other: to },
            Player::Col => Self { player, given: profile.row, preferred: profile.col, other: to },
        }
    }

    fn profile_of(&self, own: usize) -> Profile {
        match self.player {
            Player::Row => Profile::new(own, self.given),
            Player::Col => Profile::new(self.given, own),
        }
    }

    /// `payoff(preferred) − payoff(other)` for the comparing player.
    pub fn difference(&self, game: &BimatrixGame) -> LinearExpr {
        game.payoff(self.profile_of(self.preferred), self.player).clone()
            - game.payoff(self.profile_of(self.other), self.player).clone()
    }

    pub fn numeric_difference(&self, game: &NumericGame) -> f64 {
        let pick = |p: Profile| {
            let (a, b) = game.at(p);
            match self.player {
                Player::Row => a,
                Player::Col => b,
            }
        };
        pick(self.profile_of(self.preferred)) - pick(self.profile_of(self.other))
    }

    /// Whether the comparison holds at a numeric point, up to `eps`.
    pub fn holds(&self, game: &NumericGame, eps: f64) -> bool {
        self.numeric_difference(game) >= -eps
    }

    pub fn describe(&self, rows: &[String], cols: &[String]) -> String {
        let (who, given, own) = match self.player {
            Player::Row => ("Alice", &cols[self.given], rows),
            Player::Col => ("Eve", &rows[self.given], cols),
        };
        format!("{who} vs {given}: {} over {}", own[self.preferred], own[self.other])
    }
}

/// Why an inequality can be ignored.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "of")]
pub enum Redundancy {
    /// Holds for every nonnegative weight assignment.
    AlwaysTrue,
    /// A positive multiple of the entry at this index.
    Duplicate(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegionEntry {
    pub inequality: Inequality,
    /// Best-response comparison the inequality encodes, when known.
    pub comparison: Option<Comparison>,
    pub redundant: Option<Redundancy>,
}

/// A conjunction of linear inequalities over the weights.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InequalitySystem {
    entries: Vec<RegionEntry>,
}

impl InequalitySystem {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends an inequality, tagging it redundant when it is always true or
    /// repeats an earlier active entry.
    pub fn push(&mut self, inequality: Inequality, comparison: Option<Comparison>) {
        let redundant = if inequality.expr.is_nonnegative_everywhere() && !inequality.strict {
            Some(Redundancy::AlwaysTrue)
        } else {
            self.entries
                .iter()
                .position(|e| {
                    e.redundant.is_none()
                        && e.inequality.strict == inequality.strict
                        && inequality.expr.is_positive_multiple_of(&e.inequality.expr, 1e-9)
                })
                .map(Redundancy::Duplicate)
        };
        self.entries.push(RegionEntry { inequality, comparison, redundant });
    }

    pub fn entries(&self) -> &[RegionEntry] {
        &self.entries
    }

    /// Entries not tagged redundant.
    pub fn active(&self) -> impl Iterator<Item = &RegionEntry> {
        self.entries.iter().filter(|e| e.redundant.is_none())
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

impl fmt::Display for InequalitySystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in self.active() {
            writeln!(f, "{}", e.inequality.threshold_form())?;
        }
        Ok(())
    }
}

/// The raw best-response inequalities of `profile`: every unilateral
/// deviation must not pay.
pub fn nash_region(game: &BimatrixGame, profile: Profile) -> Result<InequalitySystem, GameError> {
    if profile.row >= game.n_rows() || profile.col >= game.n_cols() {
        return Err(GameError::UnknownProfile(profile.to_string()));
    }
    let mut system = InequalitySystem::new();
    let deviations = (0..game.n_rows())
        .filter(|r| *r != profile.row)
        .map(|r| (Player::Row, r))
        .chain((0..game.n_cols()).filter(|c| *c != profile.col).map(|c| (Player::Col, c)));
    for (player, to) in deviations {
        let comparison = Comparison::deviation(profile, player, to);
        system.push(Inequality::non_strict(comparison.difference(game)), Some(comparison));
    }
    Ok(system)
}

/// Whether every active inequality holds at `w`: strictly (`> 0`) when
/// `strict`, else with [`REGION_TOL`] slack. The empty system holds
/// everywhere.
pub fn check_region(system: &InequalitySystem, w: &WeightAssignment, strict: bool) -> Result<bool, GameError> {
    for entry in system.active() {
        if !entry.inequality.holds(w, strict, REGION_TOL)? {
            return Ok(false);
        }
    }
    Ok(true)
}
