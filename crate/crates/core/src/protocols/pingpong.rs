use ndarray::Array1;

use super::{travel_dim_of, AttackLayout, BobSymbol, Encoding, JointRecordDistribution, ProtocolError};
use crate::attacks::CircuitAttack;
use crate::qsim::{bell_basis, computational_basis, embed, measure, tensor, Dims, Ket, C64};

/// Subsystem order: travel, home, then Eve's ancilla.
const TRAVEL: usize = 0;
const HOME: usize = 1;
const VACUUM: usize = 2;

/// `ψ+` on (travel, home), with the travel photon padded to `travel_dim` levels.
fn bell_pair(travel_dim: usize) -> Result<Ket, ProtocolError> {
    pad_pair(&bell_basis()[0], travel_dim)
}

/// Re-expresses a two-qubit ket on a `[travel_dim, 2]` register.
fn pad_pair(ket: &Ket, travel_dim: usize) -> Result<Ket, ProtocolError> {
    let mut amps = Array1::from_elem(travel_dim * 2, C64::new(0.0, 0.0));
    for (i, a) in ket.amplitudes().iter().enumerate() {
        amps[i] = *a;
    }
    Ok(Ket::new(Dims::new(vec![travel_dim, 2])?, amps.to_vec())?)
}

/// Bob's Bell measurement, completed with the two vacuum states when the
/// travel photon can be lost.
fn bob_basis(travel_dim: usize) -> Result<Vec<Ket>, ProtocolError> {
    let mut basis = bell_basis()
        .iter()
        .map(|b| pad_pair(b, travel_dim))
        .collect::<Result<Vec<_>, _>>()?;
    let dims = Dims::new(vec![travel_dim, 2])?;
    for home in 0..2 {
        if travel_dim > 2 {
            basis.push(Ket::basis(dims.clone(), VACUUM * 2 + home)?);
        }
    }
    Ok(basis)
}

/// Bell outcome index (ψ+, ψ−, φ+, φ−, then vacuum) to Bob's symbol.
fn decode(encoding: Encoding, outcome: usize) -> BobSymbol {
    match (encoding, outcome) {
        (_, 0) => BobSymbol::Bit(0),
        (Encoding::A1, 1) | (Encoding::A2, 2) => BobSymbol::Bit(1),
        (_, 4..) => BobSymbol::Loss,
        _ => BobSymbol::Err,
    }
}

/// Message mode of the Ping-Pong protocol under a circuit attack.
///
/// Bob prepares `ψ+`, Eve applies her first leg to the outbound travel
/// photon, Alice encodes her bit, Eve applies her second leg, Bob performs a
/// Bell measurement and Eve measures her ancilla.
pub fn run_pp_message(encoding: Encoding, attack: &CircuitAttack) -> Result<JointRecordDistribution, ProtocolError> {
    let travel_dim = travel_dim_of(attack)?;
    let layout = AttackLayout::new(attack, &[travel_dim, 2])?;
    let initial = tensor(&[bell_pair(travel_dim)?, attack.ancilla_init().clone()])?;
    let outbound = layout.leg1.apply(&initial)?;
    let basis = bob_basis(travel_dim)?;

    let mut dist = JointRecordDistribution::default();
    for bit in 0..2u8 {
        let encode = embed(&encoding.op_for_bit(bit).lift(travel_dim)?, &[TRAVEL], &layout.dims)?;
        let returned = layout.leg2.apply(&encode.apply(&outbound)?)?;
        let bob = measure(&returned, &[TRAVEL, HOME], &basis)?;
        for outcome in &bob.outcomes {
            let Some(post) = &outcome.post_state else { continue };
            let symbol = decode(encoding, outcome.index);
            for (record, p_eve) in layout.eve_records(post)? {
                dist.add(bit, symbol, record, 0.5 * outcome.probability * p_eve)?;
            }
        }
    }
    dist.validate()?;
    Ok(dist.sorted())
}

/// Control mode of the Ping-Pong protocol: probability that Alice's and
/// Bob's computational-basis outcomes reveal the attack.
///
/// Only the first leg acts. A vacuum outcome on the travel photon, or equal
/// bits on travel and home photons, counts as a detection.
pub fn run_pp_control(attack: &CircuitAttack) -> Result<f64, ProtocolError> {
    let travel_dim = travel_dim_of(attack)?;
    let layout = AttackLayout::new(attack, &[travel_dim, 2])?;
    let initial = tensor(&[bell_pair(travel_dim)?, attack.ancilla_init().clone()])?;
    let outbound = layout.leg1.apply(&initial)?;
    let dist = measure(&outbound, &[TRAVEL, HOME], &computational_basis(travel_dim * 2))?;
    let detected = dist
        .outcomes
        .iter()
        .filter(|o| {
            let (travel, home) = (o.index / 2, o.index % 2);
            travel == VACUUM || travel == home
        })
        .map(|o| o.probability)
        .sum::<f64>();
    Ok(detected.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::attacks::CircuitAttack;
    use crate::protocols::{stats_from, GateCosts};
    use approx::assert_abs_diff_eq;

    #[test]
    fn identity_attack_leaves_the_channel_perfect() {
        for encoding in Encoding::ALL {
            let dist = run_pp_message(encoding, &CircuitAttack::identity()).unwrap();
            assert_abs_diff_eq!(dist.agreement(), 1.0, epsilon = 1e-12);
            assert!(dist.entries().iter().all(|e| e.eve == 0));
        }
        assert_abs_diff_eq!(run_pp_control(&CircuitAttack::identity()).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn double_cnot_against_phase_flip_learns_nothing() {
        let dist = run_pp_message(Encoding::A1, &CircuitAttack::double_cnot()).unwrap();
        assert_abs_diff_eq!(dist.agreement(), 1.0, epsilon = 1e-12);
        assert!(dist.entries().iter().all(|e| e.eve == 0 || e.probability < 1e-12));
    }

    #[test]
    fn double_cnot_against_bit_flip_copies_the_bit() {
        let dist = run_pp_message(Encoding::A2, &CircuitAttack::double_cnot()).unwrap();
        assert_abs_diff_eq!(dist.agreement(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dist.eve_matches_alice(), 1.0, epsilon = 1e-12);
        let s = stats_from(&dist, 0.0, GateCosts::NONE, 1).unwrap();
        assert_abs_diff_eq!(s.i_e_sum, 2.0, epsilon = 1e-12);
    }

    #[test]
    fn double_cnot_is_invisible_in_control_mode() {
        assert_abs_diff_eq!(run_pp_control(&CircuitAttack::double_cnot()).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn qutrit_travel_register_counts_vacuum_as_detection() {
        // Eve swaps the photon into her ancilla mode and forwards vacuum.
        let swap_out = CircuitAttack::photon_swap().unwrap();
        assert_abs_diff_eq!(run_pp_control(&swap_out).unwrap(), 1.0, epsilon = 1e-12);
        let dist = run_pp_message(Encoding::A1, &swap_out).unwrap();
        assert_abs_diff_eq!(dist.inconclusive(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dist.total(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn decoding_table() {
        assert_eq!(decode(Encoding::A1, 1), BobSymbol::Bit(1));
        assert_eq!(decode(Encoding::A1, 2), BobSymbol::Err);
        assert_eq!(decode(Encoding::A2, 2), BobSymbol::Bit(1));
        assert_eq!(decode(Encoding::A2, 1), BobSymbol::Err);
        assert_eq!(decode(Encoding::A2, 5), BobSymbol::Loss);
    }
}
