//! Symbolic conditions for profiles to be Pareto-optimal Nash equilibria.

use std::fmt;

use super::bimatrix::{BimatrixGame, Player, Profile};
use super::expr::{Inequality, LinearExpr};
use super::region::{check_region, nash_region, InequalitySystem};
use super::weights::{Family, WeightAssignment};
use super::GameError;

/// `rival` must not dominate `target`: one of the margins
/// `payoff(target) − payoff(rival)` is positive, or both vanish.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceClause {
    pub target: Profile,
    pub rival: Profile,
    pub alice_margin: LinearExpr,
    pub eve_margin: LinearExpr,
}

impl DominanceClause {
    /// Mirrors [`super::pareto_front`] with tie tolerance `eps`.
    pub fn holds(&self, w: &WeightAssignment, eps: f64) -> Result<bool, GameError> {
        let a = self.alice_margin.eval(w)?;
        let e = self.eve_margin.eval(w)?;
        Ok(a > eps || e > eps || (a.abs() <= eps && e.abs() <= eps))
    }
}

impl fmt::Display for DominanceClause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = Inequality { expr: self.alice_margin.clone(), strict: true };
        let e = Inequality { expr: self.eve_margin.clone(), strict: true };
        write!(f, "{} or {}", a.threshold_form(), e.threshold_form())
    }
}

/// Nash conditions for every target plus non-domination by every other
/// profile.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoNashCondition {
    pub targets: Vec<Profile>,
    pub nash: InequalitySystem,
    pub non_domination: Vec<DominanceClause>,
}

impl ParetoNashCondition {
    /// Whether all targets are Pareto-optimal Nash equilibria at `w`.
    pub fn holds(&self, w: &WeightAssignment, eps: f64) -> Result<bool, GameError> {
        if !check_region(&self.nash, w, false)? {
            return Ok(false);
        }
        for clause in &self.non_domination {
            if !clause.holds(w, eps)? {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// Condition under which every profile in `targets` is simultaneously a pure
/// Nash equilibrium and Pareto optimal.
pub fn pareto_nash_condition(game: &BimatrixGame, targets: &[Profile]) -> Result<ParetoNashCondition, GameError> {
    let mut nash = InequalitySystem::new();
    let mut non_domination = Vec::new();
    for &target in targets {
        for entry in nash_region(game, target)?.entries() {
            nash.push(entry.inequality.clone(), entry.comparison);
        }
        for rival in game.profiles().filter(|q| *q != target) {
            let alice_margin = game.payoff(target, Player::Row).clone() - game.payoff(rival, Player::Row).clone();
            let eve_margin = game.payoff(target, Player::Col).clone() - game.payoff(rival, Player::Col).clone();
            if alice_margin.is_zero() && eve_margin.is_zero() {
                continue;
            }
            non_domination.push(DominanceClause { target, rival, alice_margin, eve_margin });
        }
    }
    Ok(ParetoNashCondition { targets: targets.to_vec(), nash, non_domination })
}

/// Condition for both "Eve does nothing" profiles of the equal-weight game.
pub fn pareto_nash_condition_no_attack(game: &BimatrixGame) -> Result<ParetoNashCondition, GameError> {
    if game.family() != Family::PpEqual {
        return Err(GameError::InvalidGame("expected the equal-weight Ping-Pong game".into()));
    }
    let targets = [game.profile("A1,E4")?, game.profile("A2,E4")?];
    pareto_nash_condition(game, &targets)
}

/// The stronger condition that each target gives both players their
/// largest payoff anywhere in the table.
pub fn table_maximum_condition(game: &BimatrixGame, targets: &[Profile]) -> InequalitySystem {
    let mut system = InequalitySystem::new();
    for &target in targets {
        for other in game.profiles().filter(|q| *q != target) {
            for player in [Player::Row, Player::Col] {
                let diff = game.payoff(target, player).clone() - game.payoff(other, player).clone();
                system.push(Inequality::non_strict(diff), None);
            }
        }
    }
    system
}

/// Whether `w` lies within `margin` of any non-constant margin in the
/// condition, where Pareto and Nash membership may flip under rounding.
pub fn near_boundary(cond: &ParetoNashCondition, w: &WeightAssignment, margin: f64) -> Result<bool, GameError> {
    for e in cond.nash.active() {
        if e.inequality.expr.eval(w)?.abs() < margin {
            return Ok(true);
        }
    }
    for c in &cond.non_domination {
        for m in [&c.alice_margin, &c.eve_margin] {
            if !m.is_zero() && m.eval(w)?.abs() < margin {
                return Ok(true);
            }
        }
    }
    Ok(false)
}
