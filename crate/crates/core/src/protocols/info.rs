//! Shannon quantities in bits.

use std::collections::BTreeMap;

use super::ProtocolError;

/// Slack allowed when checking that a distribution sums to one.
pub const SUM_TOL: f64 = 1e-10;

fn plogp(p: f64) -> f64 {
    if p > 0.0 {
        p * p.log2()
    } else {
        0.0
    }
}

/// `h(p) = -p log2 p - (1-p) log2 (1-p)`, with `0 log 0 = 0`.
pub fn binary_entropy(p: f64) -> Result<f64, ProtocolError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ProtocolError::InvalidProbability(p));
    }
    Ok(-plogp(p) - plogp(1.0 - p))
}

/// Mutual information of a joint probability table indexed `[x][y]`.
pub fn mutual_information(joint: &[Vec<f64>]) -> Result<f64, ProtocolError> {
    let cells = joint
        .iter()
        .enumerate()
        .flat_map(|(x, row)| row.iter().enumerate().map(move |(y, &p)| (x, y, p)));
    mutual_information_of(cells)
}

/// Mutual information of a sparse joint distribution given as `(x, y, p)`
/// triples. Repeated `(x, y)` pairs are summed.
pub fn mutual_information_of<X, Y, I>(cells: I) -> Result<f64, ProtocolError>
where
    X: Ord + Clone,
    Y: Ord + Clone,
    I: IntoIterator<Item = (X, Y, f64)>,
{
    let mut joint: BTreeMap<(X, Y), f64> = BTreeMap::new();
    let mut px: BTreeMap<X, f64> = BTreeMap::new();
    let mut py: BTreeMap<Y, f64> = BTreeMap::new();
    let mut total = 0.0;
    for (x, y, p) in cells {
        if !(p >= 0.0) || !p.is_finite() {
            return Err(ProtocolError::InvalidProbability(p));
        }
        *joint.entry((x.clone(), y.clone())).or_default() += p;
        *px.entry(x).or_default() += p;
        *py.entry(y).or_default() += p;
        total += p;
    }
    if joint.is_empty() {
        return Err(ProtocolError::EmptyDistribution);
    }
    if (total - 1.0).abs() > SUM_TOL {
        return Err(ProtocolError::NotNormalized(total));
    }
    // I = H(X) + H(Y) - H(X,Y)
    let h = |values: &mut dyn Iterator<Item = f64>| -> f64 { -values.map(plogp).sum::<f64>() };
    let hx = h(&mut px.values().copied());
    let hy = h(&mut py.values().copied());
    let hxy = h(&mut joint.values().copied());
    Ok((hx + hy - hxy).max(0.0))
}
