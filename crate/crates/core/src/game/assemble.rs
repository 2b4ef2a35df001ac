//! Payoff assembly from protocol statistics.

use std::collections::BTreeMap;

use super::bimatrix::{BimatrixGame, Cell};
use super::expr::LinearExpr;
use super::weights::{Family, Weight};
use super::GameError;
use crate::attacks::AttackRegistry;
use crate::protocols::{Encoding, Protocol, ProtocolStats};

/// Eve's strategies in the Ping-Pong game, by registry name.
pub const PP_ATTACKS: [&str; 4] = ["E1", "E2", "E3", "E4"];

/// Eve's strategies in the two-way game: (column label, registry name).
pub const TWOWAY_ATTACKS: [(&str, &str); 3] = [("IR", "IR"), ("DCNOT", "DCNOT"), ("Wojcik", "E1")];

/// Alice's protocols in the two-way game: (row label, protocol, encoding).
pub const TWOWAY_PROTOCOLS: [(&str, Protocol, Encoding); 2] =
    [("PPP", Protocol::PingPong, Encoding::A1), ("LM05", Protocol::Lm05, Encoding::A1)];

pub type PpStats = BTreeMap<(Encoding, String), ProtocolStats>;
pub type TwoWayStats = BTreeMap<(Protocol, String), ProtocolStats>;

fn w(s: Weight, c: f64) -> LinearExpr {
    LinearExpr::term(s, c)
}

fn required(value: Option<f64>, what: &str, key: &str) -> Result<f64, GameError> {
    value.ok_or_else(|| GameError::MissingQuantity { quantity: what.into(), key: key.into() })
}

/// Ping-Pong game over `{A1, A2} × {E1..E4}`.
///
/// Alice: `w_a·I(A:B) − w_b·[I(A:E)+I(B:E)] + w_c·p_d`.
/// Eve: `w_d·[I(A:E)+I(B:E)] − w_e·I(A:B) + w_f·(1−p_d) − w_1n_1 − w_2n_2 − w_3n_3`.
pub fn assemble_pp_game(stats: &PpStats) -> Result<BimatrixGame, GameError> {
    use Weight::*;
    let mut cells = Vec::new();
    for encoding in Encoding::ALL {
        let mut row = Vec::new();
        for attack in PP_ATTACKS {
            let key = format!("{attack}/pp/{encoding}");
            let s = stats
                .get(&(encoding, attack.to_string()))
                .ok_or_else(|| GameError::MissingStats(key.clone()))?;
            let p_d = required(s.p_d, "p_d", &key)?;
            let costs = s.gate_costs;
            let alice = w(A, s.i_ab) + w(B, -s.i_e_sum) + w(C, p_d);
            let eve = w(D, s.i_e_sum)
                + w(E, -s.i_ab)
                + w(F, 1.0 - p_d)
                + w(One, -costs.n1)
                + w(Two, -costs.n2)
                + w(Three, -costs.n3);
            row.push(Cell { row_payoff: alice, col_payoff: eve });
        }
        cells.push(row);
    }
    BimatrixGame::new(
        Family::Pp,
        Family::Pp.symbols().to_vec(),
        Encoding::ALL.iter().map(|e| e.to_string()).collect(),
        PP_ATTACKS.iter().map(|s| s.to_string()).collect(),
        cells,
    )
}

/// Two-way game over `{PPP, LM05} × {IR, DCNOT, Wojcik}`, with
/// `c = (p_d + QBER)/2` the detection cost and `n` the entangled pairs used.
///
/// Alice: `w_g·I(A:B) − w_h·[I(A:E)+I(B:E)] + w_i·c − w_j·n`.
/// Eve: `w_k·[I(A:E)+I(B:E)] − w_l·I(A:B) + w_m·(1 − c)`.
pub fn assemble_twoway_game(stats: &TwoWayStats) -> Result<BimatrixGame, GameError> {
    use Weight::*;
    let mut cells = Vec::new();
    for (_, protocol, _) in TWOWAY_PROTOCOLS {
        let mut row = Vec::new();
        for (label, _) in TWOWAY_ATTACKS {
            let key = format!("{label}/{protocol}");
            let s = stats
                .get(&(protocol, label.to_string()))
                .ok_or_else(|| GameError::MissingStats(key.clone()))?;
            let cost = required(s.detection_cost, "detection_cost", &key)?;
            let alice = w(G, s.i_ab) + w(H, -s.i_e_sum) + w(I, cost) + w(J, -f64::from(s.n_entangled));
            let eve = w(K, s.i_e_sum) + w(L, -s.i_ab) + w(M, 1.0 - cost);
            row.push(Cell { row_payoff: alice, col_payoff: eve });
        }
        cells.push(row);
    }
    BimatrixGame::new(
        Family::TwoWay,
        Family::TwoWay.symbols().to_vec(),
        TWOWAY_PROTOCOLS.iter().map(|(l, _, _)| l.to_string()).collect(),
        TWOWAY_ATTACKS.iter().map(|(l, _)| l.to_string()).collect(),
        cells,
    )
}

/// Statistics for every Ping-Pong cell, simulating circuit attacks.
pub fn pp_stats(registry: &AttackRegistry) -> Result<PpStats, GameError> {
    let mut out = PpStats::new();
    for encoding in Encoding::ALL {
        for attack in PP_ATTACKS {
            let s = registry.stats_for(attack, Protocol::PingPong, Some(encoding))?;
            out.insert((encoding, attack.to_string()), s);
        }
    }
    Ok(out)
}

/// Statistics for every two-way cell, keyed by column label.
pub fn twoway_stats(registry: &AttackRegistry) -> Result<TwoWayStats, GameError> {
    let mut out = TwoWayStats::new();
    for (_, protocol, encoding) in TWOWAY_PROTOCOLS {
        for (label, name) in TWOWAY_ATTACKS {
            let s = registry.stats_for(name, protocol, Some(encoding))?;
            out.insert((protocol, label.to_string()), s);
        }
    }
    Ok(out)
}

pub fn pp_game(registry: &AttackRegistry) -> Result<BimatrixGame, GameError> {
    assemble_pp_game(&pp_stats(registry)?)
}

pub fn twoway_game(registry: &AttackRegistry) -> Result<BimatrixGame, GameError> {
    assemble_twoway_game(&twoway_stats(registry)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::Profile;

    fn e(s: &str) -> LinearExpr {
        s.parse().unwrap()
    }

    #[test]
    fn pp_cells() {
        let g = pp_game(&AttackRegistry::builtin()).unwrap();
        let alice = |r, c| g.cell(Profile::new(r, c)).row_payoff.clone();
        let eve = |r, c| g.cell(Profile::new(r, c)).col_payoff.clone();
        assert!(alice(0, 0).max_abs_diff(&e("0.311w_a-0.385w_b+0.5w_c")) < 1e-12);
        assert!(eve(0, 3).max_abs_diff(&e("-w_e+w_f")) < 1e-12);
        assert!(eve(1, 2).max_abs_diff(&e("2w_d-w_e+w_f-8w_1-4w_2-2w_3")) < 1e-12);
        assert!(alice(1, 2).max_abs_diff(&e("w_a-2w_b")) < 1e-12);
    }

    #[test]
    fn twoway_cells() {
        let g = twoway_game(&AttackRegistry::builtin()).unwrap();
        let alice = |r, c| g.cell(Profile::new(r, c)).row_payoff.clone();
        let eve = |r, c| g.cell(Profile::new(r, c)).col_payoff.clone();
        assert!(alice(0, 1).max_abs_diff(&e("w_g-w_j")) < 1e-12);
        assert!(eve(1, 1).max_abs_diff(&e("2w_k-w_l+0.875w_m")) < 1e-12);
        assert!(alice(1, 2).max_abs_diff(&e("0.5488w_g-1.096w_h+0.375w_i")) < 1e-12);
        assert!(alice(0, 2).max_abs_diff(&e("0.311w_g-0.385w_h+0.375w_i-w_j")) < 1e-12);
    }

    #[test]
    fn missing_stats_are_reported() {
        let mut stats = pp_stats(&AttackRegistry::builtin()).unwrap();
        stats.remove(&(Encoding::A2, "E3".to_string()));
        assert!(matches!(assemble_pp_game(&stats), Err(GameError::MissingStats(k)) if k == "E3/pp/A2"));
        let mut stats = twoway_stats(&AttackRegistry::builtin()).unwrap();
        stats.get_mut(&(Protocol::Lm05, "IR".to_string())).unwrap().detection_cost = None;
        assert!(matches!(assemble_twoway_game(&stats), Err(GameError::MissingQuantity { .. })));
    }
}
