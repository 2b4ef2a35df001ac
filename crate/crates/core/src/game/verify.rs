//! Regression of the assembled games against the published tables.
//!
//! Cells are compared coefficient by coefficient. Equilibrium conditions are
//! checked by seeded rejection sampling on `[0,1]^k`: points inside a row's
//! region must make its profile a pure Nash equilibrium, and points that
//! violate one condition must break the best-response comparison that
//! condition encodes.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::bimatrix::{BimatrixGame, NumericGame, Player, Profile};
use super::expr::DenseExpr;
use super::pareto::{near_boundary, pareto_nash_condition_no_attack, table_maximum_condition};
use super::reference::{pareto_bound, PAYOFF_TABLES, REGION_TABLES};
use super::region::{check_region, nash_region, Comparison, InequalitySystem};
use super::weights::{Weight, WeightAssignment};
use super::{build_game, pareto_front, pure_nash, GameError, GameKind, Scenario};
use crate::attacks::AttackRegistry;
use crate::protocols::binary_entropy;

/// Sampling and tolerance settings.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    pub interior_samples: usize,
    pub violating_samples: usize,
    /// Minimum distance of a sample from the published boundary.
    pub margin: f64,
    /// Samples with any best-response difference this close to zero are
    /// skipped.
    pub boundary: f64,
    pub max_draws: u64,
    pub pareto_points: usize,
    pub cell_tol: f64,
    pub eps: f64,
}

impl VerifyConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            interior_samples: 100,
            violating_samples: 100,
            margin: 1e-3,
            boundary: 1e-6,
            max_draws: 10_000_000,
            pareto_points: 2000,
            cell_tol: 1e-3,
            eps: super::DEFAULT_EPS,
        }
    }
}

/// A weight assignment rendered for reports.
pub type Sample = BTreeMap<String, f64>;

#[derive(Debug, Clone, Serialize)]
pub struct CellCheck {
    pub table: String,
    pub profile: String,
    pub published: String,
    pub assembled: String,
    pub max_diff: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConstantCheck {
    pub name: String,
    pub published: f64,
    pub computed: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConditionCheck {
    pub condition: String,
    pub comparison: String,
    pub samples: usize,
    pub draws: u64,
    /// Violating samples where the comparison still held.
    pub failures: Vec<Sample>,
    /// Violating samples where the profile stayed a Nash equilibrium
    /// anyway: the condition is sufficient but not necessary there.
    pub not_necessary: usize,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RowCheck {
    pub table: String,
    pub profile: String,
    pub interior_samples: usize,
    pub interior_draws: u64,
    /// Interior samples where the profile was not a Nash equilibrium.
    pub interior_failures: Vec<Sample>,
    pub conditions: Vec<ConditionCheck>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParetoMismatch {
    pub weights: Sample,
    pub published_bound: bool,
    pub enumeration: bool,
}

/// Agreement of the published Pareto-Nash bound with enumeration on
/// the equal-weight game.
#[derive(Debug, Clone, Serialize)]
pub struct ParetoCheck {
    pub points: usize,
    pub boundary_excluded: usize,
    pub compared: usize,
    /// Points where the bound and enumeration disagree.
    pub bound_disagreements: usize,
    pub examples: Vec<ParetoMismatch>,
    /// Points where the derived symbolic condition and enumeration
    /// disagree; must be zero.
    pub derived_disagreements: usize,
    /// Points where the bound disagrees with "each player gets their
    /// table maximum".
    pub table_maximum_disagreements: usize,
    pub bound_agrees: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub config: VerifyConfig,
    pub cells: Vec<CellCheck>,
    pub constants: Vec<ConstantCheck>,
    pub regions: Vec<RowCheck>,
    /// Reported but not part of the pass/fail decision.
    pub pareto: ParetoCheck,
    pub passed: bool,
}

impl VerificationReport {
    pub fn failures(&self) -> Vec<String> {
        let mut out = Vec::new();
        for c in self.cells.iter().filter(|c| !c.pass) {
            out.push(format!(
                "cell {} {}: published {} assembled {} (diff {:.3e})",
                c.table, c.profile, c.published, c.assembled, c.max_diff
            ));
        }
        for c in self.constants.iter().filter(|c| !c.pass) {
            out.push(format!("constant {}: published {} computed {:.6}", c.name, c.published, c.computed));
        }
        for r in self.regions.iter().filter(|r| !r.pass) {
            out.push(format!(
                "region {} {}: {} interior failures over {} samples",
                r.table,
                r.profile,
                r.interior_failures.len(),
                r.interior_samples
            ));
            for c in r.conditions.iter().filter(|c| !c.pass) {
                out.push(format!(
                    "region {} {} condition {}: {} violating samples, {} kept the comparison",
                    r.table,
                    r.profile,
                    c.condition,
                    c.samples,
                    c.failures.len()
                ));
            }
        }
        if self.pareto.derived_disagreements > 0 {
            out.push(format!("pareto: derived condition disagrees at {} points", self.pareto.derived_disagreements));
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_markdown(&self) -> String {
        let mark = |b: bool| if b { "pass" } else { "FAIL" };
        let mut s = String::new();
        s.push_str(&format!("# Reproduction report\n\nseed: {}\n\nresult: {}\n\n", self.seed, mark(self.passed)));
        s.push_str(&format!("## Payoff cells (tolerance {})\n\n", self.config.cell_tol));
        s.push_str("| table | profile | published | assembled | max diff | result |\n|---|---|---|---|---|---|\n");
        for c in &self.cells {
            s.push_str(&format!(
                "| {} | {} | {} | {} | {:.2e} | {} |\n",
                c.table,
                c.profile,
                c.published,
                c.assembled,
                c.max_diff,
                mark(c.pass)
            ));
        }
        s.push_str(&format!("\n## Derived constants (tolerance {})\n\n", self.config.cell_tol));
        s.push_str("| constant | published | computed | result |\n|---|---|---|---|\n");
        for c in &self.constants {
            s.push_str(&format!("| {} | {} | {:.6} | {} |\n", c.name, c.published, c.computed, mark(c.pass)));
        }
        s.push_str(&format!(
            "\n## Equilibrium regions (margin {}, boundary {})\n\n",
            self.config.margin, self.config.boundary
        ));
        s.push_str("| table | profile | check | samples | draws | failures | not necessary | result |\n|---|---|---|---|---|---|---|---|\n");
        for r in &self.regions {
            s.push_str(&format!(
                "| {} | {} | interior | {} | {} | {} | | {} |\n",
                r.table,
                r.profile,
                r.interior_samples,
                r.interior_draws,
                r.interior_failures.len(),
                mark(r.interior_failures.is_empty() && r.interior_samples >= self.config.interior_samples)
            ));
            for c in &r.conditions {
                s.push_str(&format!(
                    "| {} | {} | violate `{}` ({}) | {} | {} | {} | {} | {} |\n",
                    r.table,
                    r.profile,
                    c.condition,
                    c.comparison,
                    c.samples,
                    c.draws,
                    c.failures.len(),
                    c.not_necessary,
                    mark(c.pass)
                ));
            }
        }
        let p = &self.pareto;
        s.push_str("\n## Pareto-optimal Nash bound (informational)\n\n");
        s.push_str(&format!(
            "points {}, boundary excluded {}, compared {}\n\nbound vs enumeration disagreements: {}\n\nderived condition vs enumeration disagreements: {}\n\nbound vs table-maximum condition disagreements: {}\n",
            p.points, p.boundary_excluded, p.compared, p.bound_disagreements, p.derived_disagreements, p.table_maximum_disagreements
        ));
        for m in &p.examples {
            s.push_str(&format!(
                "\n- {:?}: bound {}, enumeration {}",
                m.weights, m.published_bound, m.enumeration
            ));
        }
        s.push('\n');
        s
    }
}

/// FNV-1a, used to derive stable per-check RNG streams from the seed.
fn stream_seed(seed: u64, parts: &[&str]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325 ^ seed;
    for part in parts {
        for b in part.bytes().chain(std::iter::once(0xff)) {
            h ^= u64::from(b);
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
    }
    h
}

/// Payoffs compiled for fast repeated evaluation.
struct CompiledGame {
    symbols: Vec<Weight>,
    row_labels: Vec<String>,
    col_labels: Vec<String>,
    cells: Vec<Vec<(DenseExpr, DenseExpr)>>,
}

impl CompiledGame {
    fn new(game: &BimatrixGame) -> Self {
        let cells = (0..game.n_rows())
            .map(|r| {
                (0..game.n_cols())
                    .map(|c| {
                        let cell = game.cell(Profile::new(r, c));
                        (cell.row_payoff.dense(), cell.col_payoff.dense())
                    })
                    .collect()
            })
            .collect();
        Self {
            symbols: game.symbols().to_vec(),
            row_labels: game.row_labels().to_vec(),
            col_labels: game.col_labels().to_vec(),
            cells,
        }
    }

    fn evaluate(&self, values: &[f64; Weight::COUNT]) -> NumericGame {
        NumericGame {
            row_labels: self.row_labels.clone(),
            col_labels: self.col_labels.clone(),
            payoffs: self
                .cells
                .iter()
                .map(|row| row.iter().map(|(a, b)| (a.eval(values), b.eval(values))).collect())
                .collect(),
        }
    }

    /// Each weight is uniform on `[0,1]` or, with equal odds, log-uniform
    /// on `[1e-4, 1]`, so thin cones that need some weights much smaller
    /// than others are still reached.
    fn draw(&self, rng: &mut ChaCha8Rng) -> [f64; Weight::COUNT] {
        let mut v = [0.0; Weight::COUNT];
        for w in &self.symbols {
            let u = rng.random::<f64>();
            v[w.index()] = if rng.random::<bool>() { u } else { 10f64.powf(-4.0 * u) };
        }
        v
    }

    fn sample(&self, values: &[f64; Weight::COUNT]) -> Sample {
        self.symbols.iter().map(|w| (w.name(), values[w.index()])).collect()
    }
}

const MAX_EXAMPLES: usize = 5;

fn check_cells(registry: &AttackRegistry, tol: f64) -> Result<Vec<CellCheck>, GameError> {
    let mut out = Vec::new();
    for table in PAYOFF_TABLES {
        let game = build_game(table.game, table.scenario, registry)?;
        for (r, row) in table.cells.iter().enumerate() {
            for c in 0..row.len() {
                let p = Profile::new(r, c);
                let published = table.cell(r, c);
                let assembled = game.payoff(p, table.player);
                let max_diff = published.max_abs_diff(assembled);
                out.push(CellCheck {
                    table: table.name.into(),
                    profile: game.profile_label(p),
                    published: published.to_string(),
                    assembled: assembled.to_string(),
                    max_diff,
                    pass: max_diff <= tol,
                });
            }
        }
    }
    Ok(out)
}

/// Constants the published conditions are built from, recomputed from the
/// assembled games: (name, published value, recomputed value).
pub fn derived_constants(registry: &AttackRegistry) -> Result<Vec<(String, f64, f64)>, GameError> {
    use Weight::*;
    let pp = build_game(GameKind::Pp, Scenario::Generic, registry)?;
    let no_dos = build_game(GameKind::Pp, Scenario::NoDos, registry)?;
    let unlimited = build_game(GameKind::Pp, Scenario::UnlimitedEve, registry)?;
    let twoway = build_game(GameKind::TwoWay, Scenario::Generic, registry)?;
    let cmp = |g: &BimatrixGame, player, given: &str, preferred: &str, other: &str| -> Result<_, GameError> {
        let idx = |label: &str, own: bool| match (player, own) {
            (Player::Row, true) | (Player::Col, false) => g.row_index(label),
            _ => g.col_index(label),
        };
        let c = Comparison { player, given: idx(given, false)?, preferred: idx(preferred, true)?, other: idx(other, true)? };
        Ok(c.difference(g))
    };
    let alice_e2 = cmp(&pp, Player::Row, "E2", "A1", "A2")?;
    let e1_e2 = cmp(&unlimited, Player::Col, "A1", "E1", "E2")?;
    let e1_e4 = cmp(&no_dos, Player::Col, "A1", "E1", "E4")?;
    let dcnot_ir = cmp(&twoway, Player::Col, "LM05", "DCNOT", "IR")?;
    let ratio = |e: &super::LinearExpr, num: Weight, den: Weight| -e.coefficient(num) / e.coefficient(den);
    Ok(vec![
        ("alice-a1-over-a2-against-e2".into(), 0.601, ratio(&alice_e2, A, B)),
        ("unlimited-eve-e1-over-e2".into(), 15.375, ratio(&e1_e2, E, D)),
        ("no-dos-e1-over-e4-w_f".into(), 1.2987, ratio(&e1_e4, F, D)),
        ("no-dos-e1-over-e4-w_1".into(), 25.974, ratio(&e1_e4, One, D)),
        ("no-dos-e1-over-e4-w_2".into(), 10.3896, ratio(&e1_e4, Two, D)),
        ("no-dos-e1-over-e4-w_3".into(), 5.1948, ratio(&e1_e4, Three, D)),
        ("lm05-dcnot-over-ir-w_k".into(), 0.8113, dcnot_ir.coefficient(K)),
        ("ir-mutual-information".into(), 0.1887, 1.0 - binary_entropy(0.25).expect("valid probability")),
    ])
}

/// Best-response differences of `profile` that are not identically zero.
fn boundary_exprs(game: &BimatrixGame, profile: Profile) -> Result<Vec<DenseExpr>, GameError> {
    Ok(nash_region(game, profile)?
        .entries()
        .iter()
        .filter(|e| !e.inequality.expr.is_zero())
        .map(|e| e.inequality.expr.dense())
        .collect())
}

fn near(exprs: &[DenseExpr], v: &[f64; Weight::COUNT], tol: f64) -> bool {
    exprs.iter().any(|e| e.eval(v).abs() < tol)
}

fn check_row(
    table: &str,
    game: &BimatrixGame,
    compiled: &CompiledGame,
    profile_text: &str,
    published: &InequalitySystem,
    cfg: &VerifyConfig,
) -> Result<RowCheck, GameError> {
    let profile = game.profile(profile_text)?;
    let label = game.profile_label(profile);
    let boundary = boundary_exprs(game, profile)?;
    let conditions: Vec<DenseExpr> = published.entries().iter().map(|e| e.inequality.expr.dense()).collect();

    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, &[table, &label, "interior"]));
    let mut interior_samples = 0;
    let mut interior_draws = 0;
    let mut interior_failures = Vec::new();
    while interior_samples < cfg.interior_samples && interior_draws < cfg.max_draws {
        interior_draws += 1;
        let v = compiled.draw(&mut rng);
        if conditions.iter().any(|c| c.eval(&v) < cfg.margin) || near(&boundary, &v, cfg.boundary) {
            continue;
        }
        interior_samples += 1;
        if !compiled.evaluate(&v).is_nash(profile, cfg.eps) && interior_failures.len() < MAX_EXAMPLES {
            interior_failures.push(compiled.sample(&v));
        }
    }

    let mut checks = Vec::new();
    for (i, entry) in published.entries().iter().enumerate() {
        let comparison = entry.comparison.expect("published conditions carry a comparison");
        let text = entry.inequality.threshold_form();
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, &[table, &label, &i.to_string()]));
        let (mut samples, mut draws, mut not_necessary) = (0, 0, 0);
        let mut failures = Vec::new();
        while samples < cfg.violating_samples && draws < cfg.max_draws {
            draws += 1;
            let v = compiled.draw(&mut rng);
            if conditions[i].eval(&v) > -cfg.margin || near(&boundary, &v, cfg.boundary) {
                continue;
            }
            samples += 1;
            let numeric = compiled.evaluate(&v);
            if comparison.holds(&numeric, cfg.eps) && failures.len() < MAX_EXAMPLES {
                failures.push(compiled.sample(&v));
            }
            if numeric.is_nash(profile, cfg.eps) {
                not_necessary += 1;
            }
        }
        checks.push(ConditionCheck {
            condition: text,
            comparison: comparison.describe(game.row_labels(), game.col_labels()),
            samples,
            draws,
            pass: failures.is_empty() && samples >= cfg.violating_samples,
            failures,
            not_necessary,
        });
    }
    let pass = interior_failures.is_empty()
        && interior_samples >= cfg.interior_samples
        && checks.iter().all(|c| c.pass);
    Ok(RowCheck {
        table: table.into(),
        profile: label,
        interior_samples,
        interior_draws,
        interior_failures,
        conditions: checks,
        pass,
    })
}

/// Compares the published Pareto-Nash bound, the derived condition and
/// enumeration on random equal-weight points.
pub fn check_pareto_bound(registry: &AttackRegistry, cfg: &VerifyConfig) -> Result<ParetoCheck, GameError> {
    let game = build_game(GameKind::Pp, Scenario::EqualWeights, registry)?;
    let derived = pareto_nash_condition_no_attack(&game)?;
    let bound = pareto_bound();
    let maximum = table_maximum_condition(&game, &derived.targets);
    let compiled = CompiledGame::new(&game);
    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(cfg.seed, &["pareto-bound"]));
    let mut out = ParetoCheck {
        points: cfg.pareto_points,
        boundary_excluded: 0,
        compared: 0,
        bound_disagreements: 0,
        examples: Vec::new(),
        derived_disagreements: 0,
        table_maximum_disagreements: 0,
        bound_agrees: true,
    };
    for _ in 0..cfg.pareto_points {
        let v = compiled.draw(&mut rng);
        let w = WeightAssignment::new(compiled.symbols.iter().map(|s| (*s, v[s.index()])))?;
        let on_bound = bound.active().any(|e| e.inequality.expr.dense().eval(&v).abs() < cfg.margin);
        if on_bound || near_boundary(&derived, &w, cfg.margin)? {
            out.boundary_excluded += 1;
            continue;
        }
        out.compared += 1;
        let numeric = compiled.evaluate(&v);
        let nash = pure_nash(&numeric, cfg.eps);
        let front = pareto_front(&numeric, cfg.eps);
        let enumeration = derived.targets.iter().all(|p| nash.contains(p) && front.contains(p));
        let published = check_region(&bound, &w, false)?;
        if derived.holds(&w, cfg.eps)? != enumeration {
            out.derived_disagreements += 1;
        }
        if check_region(&maximum, &w, false)? != published {
            out.table_maximum_disagreements += 1;
        }
        if published != enumeration {
            out.bound_disagreements += 1;
            if out.examples.len() < MAX_EXAMPLES {
                out.examples.push(ParetoMismatch { weights: compiled.sample(&v), published_bound: published, enumeration });
            }
        }
    }
    out.bound_agrees = out.bound_disagreements == 0;
    Ok(out)
}

/// Runs every check against `registry`.
pub fn verify_tables(registry: &AttackRegistry, cfg: &VerifyConfig) -> Result<VerificationReport, GameError> {
    let cells = check_cells(registry, cfg.cell_tol)?;
    let constants = derived_constants(registry)?
        .into_iter()
        .map(|(name, published, computed)| ConstantCheck {
            pass: (published - computed).abs() <= cfg.cell_tol,
            name,
            published,
            computed,
        })
        .collect::<Vec<_>>();
    let mut regions = Vec::new();
    for table in REGION_TABLES {
        let game = build_game(table.game, table.scenario, registry)?;
        let compiled = CompiledGame::new(&game);
        for row in table.rows {
            let published = row.system(&game)?;
            regions.push(check_row(table.name, &game, &compiled, row.profile, &published, cfg)?);
        }
    }
    let pareto = check_pareto_bound(registry, cfg)?;
    let passed = cells.iter().all(|c| c.pass)
        && constants.iter().all(|c| c.pass)
        && regions.iter().all(|r| r.pass)
        && pareto.derived_disagreements == 0;
    Ok(VerificationReport { seed: cfg.seed, config: *cfg, cells, constants, regions, pareto, passed })
}
