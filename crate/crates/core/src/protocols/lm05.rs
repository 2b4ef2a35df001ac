use super::{travel_dim_of, AttackLayout, BobSymbol, JointRecordDistribution, ProtocolError};
use crate::attacks::CircuitAttack;
use crate::qsim::{embed, measure, tensor, Dims, Ket, Operator};

const TRAVEL: usize = 0;

/// One of Bob's four preparations: a basis and a position within it.
#[derive(Debug, Clone, Copy)]
struct Preparation {
    x_basis: bool,
    index: usize,
}

const PREPARATIONS: [Preparation; 4] = [
    Preparation { x_basis: false, index: 0 },
    Preparation { x_basis: false, index: 1 },
    Preparation { x_basis: true, index: 0 },
    Preparation { x_basis: true, index: 1 },
];

impl Preparation {
    /// Measurement basis for this preparation, with the vacuum level appended
    /// when the register has one.
    fn basis(self, travel_dim: usize) -> Result<Vec<Ket>, ProtocolError> {
        let pair = if self.x_basis { [Ket::plus(), Ket::minus()] } else { [Ket::qubit(0), Ket::qubit(1)] };
        let mut basis = pair.iter().map(|k| k.lift(travel_dim)).collect::<Result<Vec<_>, _>>()?;
        for level in 2..travel_dim {
            basis.push(Ket::basis(Dims::single(travel_dim)?, level)?);
        }
        Ok(basis)
    }

    fn state(self, travel_dim: usize) -> Result<Ket, ProtocolError> {
        Ok(self.basis(travel_dim)?.swap_remove(self.index))
    }
}

/// Message mode of LM05 under a circuit attack.
///
/// Bob sends one of `|0⟩, |1⟩, |+⟩, |−⟩`; Alice returns it unchanged (bit 0)
/// or applies `iσy` (bit 1); Bob measures in the preparation basis and reads
/// bit 1 when he finds the orthogonal partner.
pub fn run_lm05_message(attack: &CircuitAttack) -> Result<JointRecordDistribution, ProtocolError> {
    let travel_dim = travel_dim_of(attack)?;
    let layout = AttackLayout::new(attack, &[travel_dim])?;
    let flip = Operator::i_sigma_y().lift(travel_dim)?;
    let encoders = [
        embed(&Operator::identity(Dims::single(travel_dim)?), &[TRAVEL], &layout.dims)?,
        embed(&flip, &[TRAVEL], &layout.dims)?,
    ];

    let mut dist = JointRecordDistribution::default();
    for prep in PREPARATIONS {
        let basis = prep.basis(travel_dim)?;
        let initial = tensor(&[prep.state(travel_dim)?, attack.ancilla_init().clone()])?;
        let outbound = layout.leg1.apply(&initial)?;
        for (bit, encoder) in (0u8..).zip(&encoders) {
            let returned = layout.leg2.apply(&encoder.apply(&outbound)?)?;
            let bob = measure(&returned, &[TRAVEL], &basis)?;
            for outcome in &bob.outcomes {
                let Some(post) = &outcome.post_state else { continue };
                let symbol = match outcome.index {
                    i if i == prep.index => BobSymbol::Bit(0),
                    i if i < 2 => BobSymbol::Bit(1),
                    _ => BobSymbol::Loss,
                };
                for (record, p_eve) in layout.eve_records(post)? {
                    dist.add(bit, symbol, record, 0.125 * outcome.probability * p_eve)?;
                }
            }
        }
    }
    dist.validate()?;
    Ok(dist.sorted())
}

/// Control mode of LM05: Alice measures the outbound photon in the
/// preparation basis (the sifted case) and any outcome other than the
/// prepared state, vacuum included, reveals the attack.
pub fn run_lm05_control(attack: &CircuitAttack) -> Result<f64, ProtocolError> {
    let travel_dim = travel_dim_of(attack)?;
    let layout = AttackLayout::new(attack, &[travel_dim])?;
    let mut detected = 0.0;
    for prep in PREPARATIONS {
        let initial = tensor(&[prep.state(travel_dim)?, attack.ancilla_init().clone()])?;
        let outbound = layout.leg1.apply(&initial)?;
        let dist = measure(&outbound, &[TRAVEL], &prep.basis(travel_dim)?)?;
        detected += 0.25 * (1.0 - dist.probability(prep.index));
    }
    Ok(detected.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocols::{stats_from, GateCosts};
    use crate::qsim::{C64, Dims};
    use approx::assert_abs_diff_eq;
    use ndarray::Array2;

    #[test]
    fn preparations_are_the_four_bb84_states() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let minus = PREPARATIONS[3].state(2).unwrap();
        assert_abs_diff_eq!(minus.amplitude(0).re, h, epsilon = 1e-15);
        assert_abs_diff_eq!(minus.amplitude(1).re, -h, epsilon = 1e-15);
        assert_eq!(PREPARATIONS[1].basis(3).unwrap().len(), 3);
    }

    #[test]
    fn identity_attack() {
        let dist = run_lm05_message(&CircuitAttack::identity()).unwrap();
        assert_abs_diff_eq!(dist.agreement(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(run_lm05_control(&CircuitAttack::identity()).unwrap(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn double_cnot_reads_every_bit() {
        let attack = CircuitAttack::double_cnot();
        let dist = run_lm05_message(&attack).unwrap();
        assert_abs_diff_eq!(dist.agreement(), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(dist.eve_matches_alice(), 1.0, epsilon = 1e-12);
        let p_d = run_lm05_control(&attack).unwrap();
        assert_abs_diff_eq!(p_d, 0.25, epsilon = 1e-12);
        let s = stats_from(&dist, p_d, GateCosts::NONE, 0).unwrap();
        assert_abs_diff_eq!(s.qber.unwrap(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.detection_cost.unwrap(), 0.125, epsilon = 1e-12);
    }

    #[test]
    fn controlled_phase_on_empty_ancilla_is_undetected() {
        // A controlled phase between travel and ancilla |0⟩ acts trivially:
        // the ancilla never holds |1⟩, so neither basis is disturbed.
        let mut m = Array2::eye(4);
        m[[3, 3]] = C64::new(-1.0, 0.0);
        let cz = crate::qsim::Operator::unitary(Dims::qubits(2), m).unwrap();
        let attack = CircuitAttack::new(Ket::qubit(0), cz.clone(), cz, crate::qsim::computational_basis(2)).unwrap();
        assert_abs_diff_eq!(run_lm05_control(&attack).unwrap(), 0.0, epsilon = 1e-12);
    }
}
