//! Symbolic and numeric two-player games with pure-strategy analysis.

use std::fmt;

use serde::Serialize;

use super::expr::LinearExpr;
use super::weights::{Family, Weight, WeightAssignment};
use super::GameError;

/// Default tie tolerance for equilibrium and dominance checks.
pub const DEFAULT_EPS: f64 = 1e-9;

/// A (row, column) strategy pair, by index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Profile {
    pub row: usize,
    pub col: usize,
}

impl Profile {
    pub fn new(row: usize, col: usize) -> Self {
        Self { row, col }
    }
}

/// Which side of the game.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Player {
    /// Alice, choosing rows.
    Row,
    /// Eve, choosing columns.
    Col,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub row_payoff: LinearExpr,
    pub col_payoff: LinearExpr,
}

/// Payoffs linear in a family of weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BimatrixGame {
    family: Family,
    symbols: Vec<Weight>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    cells: Vec<Vec<Cell>>,
}

impl BimatrixGame {
    /// Builds a game over the free `symbols` of `family`.
    pub fn new(
        family: Family,
        symbols: Vec<Weight>,
        row_labels: Vec<String>,
        col_labels: Vec<String>,
        cells: Vec<Vec<Cell>>,
    ) -> Result<Self, GameError> {
        let invalid = |m: String| Err(GameError::InvalidGame(m));
        if row_labels.is_empty() || col_labels.is_empty() {
            return invalid("a game needs at least one strategy per player".into());
        }
        if cells.len() != row_labels.len() || cells.iter().any(|r| r.len() != col_labels.len()) {
            return invalid(format!("grid is not {}x{}", row_labels.len(), col_labels.len()));
        }
        if let Some(w) = symbols.iter().find(|w| !family.contains(**w)) {
            return invalid(format!("{w} is not a {family:?} symbol"));
        }
        for cell in cells.iter().flatten() {
            for e in [&cell.row_payoff, &cell.col_payoff] {
                if let Some(w) = e.symbols().find(|w| !symbols.contains(w)) {
                    return invalid(format!("cell uses {w}, which is not a free symbol of the game"));
                }
            }
        }
        Ok(Self { family, symbols, row_labels, col_labels, cells })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Symbols a weight assignment must cover.
    pub fn symbols(&self) -> &[Weight] {
        &self.symbols
    }

    pub fn row_labels(&self) -> &[String] {
        &self.row_labels
    }

    pub fn col_labels(&self) -> &[String] {
        &self.col_labels
    }

    pub fn n_rows(&self) -> usize {
        self.row_labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.col_labels.len()
    }

    pub fn cell(&self, p: Profile) -> &Cell {
        &self.cells[p.row][p.col]
    }

    pub fn payoff(&self, p: Profile, player: Player) -> &LinearExpr {
        match player {
            Player::Row => &self.cell(p).row_payoff,
            Player::Col => &self.cell(p).col_payoff,
        }
    }

    pub fn profiles(&self) -> impl Iterator<Item = Profile> {
        let cols = self.n_cols();
        (0..self.n_rows()).flat_map(move |r| (0..cols).map(move |c| Profile::new(r, c)))
    }

    pub fn row_index(&self, label: &str) -> Result<usize, GameError> {
        find_label(&self.row_labels, label)
    }

    pub fn col_index(&self, label: &str) -> Result<usize, GameError> {
        find_label(&self.col_labels, label)
    }

    /// Parses `A2,E4` or `(A2,E4)`; labels match case-insensitively.
    pub fn profile(&self, text: &str) -> Result<Profile, GameError> {
        let unknown = || GameError::UnknownProfile(text.into());
        let inner = text.trim().trim_start_matches('(').trim_end_matches(')');
        let (r, c) = inner.split_once(',').ok_or_else(unknown)?;
        let row = self.row_index(r.trim()).map_err(|_| unknown())?;
        let col = self.col_index(c.trim()).map_err(|_| unknown())?;
        Ok(Profile::new(row, col))
    }

    pub fn profile_label(&self, p: Profile) -> String {
        format!("({},{})", self.row_labels[p.row], self.col_labels[p.col])
    }

    /// Same game with every payoff mapped through `f`.
    pub(crate) fn map_payoffs(
        &self,
        family: Family,
        symbols: Vec<Weight>,
        f: impl Fn(&LinearExpr) -> LinearExpr,
    ) -> Result<Self, GameError> {
        let cells = self
            .cells
            .iter()
            .map(|row| {
                row.iter()
                    .map(|c| Cell { row_payoff: f(&c.row_payoff), col_payoff: f(&c.col_payoff) })
                    .collect()
            })
            .collect();
        Self::new(family, symbols, self.row_labels.clone(), self.col_labels.clone(), cells)
    }

    /// Substitutes `w` into every payoff. The assignment must cover exactly
    /// the game's free symbols.
    pub fn evaluate(&self, w: &WeightAssignment) -> Result<NumericGame, GameError> {
        w.require_exactly(&self.symbols, &format!("{:?} game", self.family))?;
        let payoffs = self
            .cells
            .iter()
            .map(|row| row.iter().map(|c| Ok((c.row_payoff.eval(w)?, c.col_payoff.eval(w)?))).collect())
            .collect::<Result<Vec<Vec<_>>, GameError>>()?;
        Ok(NumericGame { row_labels: self.row_labels.clone(), col_labels: self.col_labels.clone(), payoffs })
    }
}

fn find_label(labels: &[String], label: &str) -> Result<usize, GameError> {
    labels
        .iter()
        .position(|l| l.eq_ignore_ascii_case(label))
        .ok_or_else(|| GameError::UnknownProfile(label.into()))
}

/// A bimatrix game with numeric payoffs `(row player, column player)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericGame {
    pub row_labels: Vec<String>,
    pub col_labels: Vec<String>,
    pub payoffs: Vec<Vec<(f64, f64)>>,
}

impl NumericGame {
    pub fn new(payoffs: Vec<Vec<(f64, f64)>>) -> Self {
        let rows = payoffs.len();
        let cols = payoffs.first().map_or(0, Vec::len);
        Self {
            row_labels: (1..=rows).map(|i| format!("R{i}")).collect(),
            col_labels: (1..=cols).map(|i| format!("C{i}")).collect(),
            payoffs,
        }
    }

    pub fn n_rows(&self) -> usize {
        self.payoffs.len()
    }

    pub fn n_cols(&self) -> usize {
        self.payoffs.first().map_or(0, Vec::len)
    }

    pub fn at(&self, p: Profile) -> (f64, f64) {
        self.payoffs[p.row][p.col]
    }

    pub fn profiles(&self) -> impl Iterator<Item = Profile> {
        let cols = self.n_cols();
        (0..self.n_rows()).flat_map(move |r| (0..cols).map(move |c| Profile::new(r, c)))
    }

    pub fn profile_label(&self, p: Profile) -> String {
        format!("({},{})", self.row_labels[p.row], self.col_labels[p.col])
    }

    /// Whether neither player can gain more than `eps` by deviating alone.
    pub fn is_nash(&self, p: Profile, eps: f64) -> bool {
        let (a, b) = self.at(p);
        (0..self.n_rows()).all(|r| self.payoffs[r][p.col].0 <= a + eps)
            && (0..self.n_cols()).all(|c| self.payoffs[p.row][c].1 <= b + eps)
    }

    /// Whether `q` is at least as good as `p` for both players and better
    /// for one, beyond `eps`.
    pub fn dominates(&self, q: Profile, p: Profile, eps: f64) -> bool {
        let (qa, qb) = self.at(q);
        let (pa, pb) = self.at(p);
        qa >= pa - eps && qb >= pb - eps && (qa > pa + eps || qb > pb + eps)
    }
}

/// Pure-strategy Nash profiles, weak equilibria included, in row-major order.
pub fn pure_nash(game: &NumericGame, eps: f64) -> Vec<Profile> {
    game.profiles().filter(|p| game.is_nash(*p, eps)).collect()
}

/// Profiles not dominated by any other profile, in row-major order.
pub fn pareto_front(game: &NumericGame, eps: f64) -> Vec<Profile> {
    game.profiles()
        .filter(|p| !game.profiles().any(|q| game.dominates(q, *p, eps)))
        .collect()
}

/// Equilibrium sets of a numeric game.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquilibriumReport {
    pub eps: f64,
    pub nash: Vec<Profile>,
    pub pareto: Vec<Profile>,
    pub pareto_nash: Vec<Profile>,
    pub payoffs: NumericGame,
}

impl EquilibriumReport {
    pub fn analyze(game: NumericGame, eps: f64) -> Self {
        let nash = pure_nash(&game, eps);
        let pareto = pareto_front(&game, eps);
        let pareto_nash = nash.iter().copied().filter(|p| pareto.contains(p)).collect();
        Self { eps, nash, pareto, pareto_nash, payoffs: game }
    }

    pub fn labels(&self, set: &[Profile]) -> Vec<String> {
        set.iter().map(|p| self.payoffs.profile_label(*p)).collect()
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.row, self.col)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn prisoners_dilemma() -> NumericGame {
        NumericGame::new(vec![vec![(3.0, 3.0), (0.0, 5.0)], vec![(5.0, 0.0), (1.0, 1.0)]])
    }

    #[test]
    fn prisoners_dilemma_equilibrium_is_not_pareto() {
        let g = prisoners_dilemma();
        assert_eq!(pure_nash(&g, DEFAULT_EPS), vec![Profile::new(1, 1)]);
        assert_eq!(pareto_front(&g, DEFAULT_EPS), vec![Profile::new(0, 0), Profile::new(0, 1), Profile::new(1, 0)]);
        assert!(EquilibriumReport::analyze(g, DEFAULT_EPS).pareto_nash.is_empty());
    }

    #[test]
    fn single_cell_game() {
        let g = NumericGame::new(vec![vec![(-4.0, 7.0)]]);
        assert_eq!(pure_nash(&g, DEFAULT_EPS), vec![Profile::new(0, 0)]);
        assert_eq!(pareto_front(&g, DEFAULT_EPS), vec![Profile::new(0, 0)]);
    }

    #[test]
    fn strict_dominator_is_the_whole_front() {
        let g = NumericGame::new(vec![vec![(1.0, 1.0), (0.0, 0.5)], vec![(0.2, 0.9), (2.0, 2.0)]]);
        assert_eq!(pareto_front(&g, DEFAULT_EPS), vec![Profile::new(1, 1)]);
    }

    #[test]
    fn constant_game_everything_survives() {
        let g = NumericGame::new(vec![vec![(0.0, 0.0); 3]; 2]);
        assert_eq!(pure_nash(&g, DEFAULT_EPS).len(), 6);
        assert_eq!(pareto_front(&g, DEFAULT_EPS).len(), 6);
    }

    #[test]
    fn matching_pennies_has_no_pure_equilibrium() {
        let g = NumericGame::new(vec![vec![(1.0, -1.0), (-1.0, 1.0)], vec![(-1.0, 1.0), (1.0, -1.0)]]);
        assert!(pure_nash(&g, DEFAULT_EPS).is_empty());
    }

    fn game_strategy() -> impl Strategy<Value = NumericGame> {
        (1usize..4, 1usize..5).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec((-3i32..4, -3i32..4), c), r).prop_map(|rows| {
                NumericGame::new(rows.into_iter().map(|row| row.into_iter().map(|(a, b)| (a as f64, b as f64)).collect()).collect())
            })
        })
    }

    proptest! {
        #[test]
        fn nash_output_has_no_profitable_deviation(g in game_strategy()) {
            for p in pure_nash(&g, DEFAULT_EPS) {
                let (a, b) = g.at(p);
                for r in 0..g.n_rows() {
                    prop_assert!(g.payoffs[r][p.col].0 <= a + DEFAULT_EPS);
                }
                for c in 0..g.n_cols() {
                    prop_assert!(g.payoffs[p.row][c].1 <= b + DEFAULT_EPS);
                }
            }
        }

        #[test]
        fn pareto_front_is_nonempty_and_undominated(g in game_strategy()) {
            let front = pareto_front(&g, DEFAULT_EPS);
            prop_assert!(!front.is_empty());
            for p in &front {
                prop_assert!(g.profiles().all(|q| !g.dominates(q, *p, DEFAULT_EPS)));
            }
        }
    }
}
