//! Brute-force reference implementations for checking the analysis code.
//!
//! Everything here is deliberately naive: pixels are read one at a time with
//! [`FixationMap::get`], neighborhoods are enumerated with nested loops, and joint tables are
//! counted by linear search over the distinct values seen. Nothing is shared with the
//! histogram or analysis modules.

use num_rational::Ratio;

use super::SynthError;
use crate::correlation::NeighborhoodSpec;
use crate::map::FixationMap;

const MAX_SIDE: usize = 64;

/// Aggregate symbol used by the oracle: the raw sum, or the exact mean.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleAggregate {
    Sum,
    Mean,
}

#[derive(Debug, Clone, PartialEq)]
enum Agg {
    Sum(u64),
    Mean(Ratio<u64>),
}

fn make_agg(sum: u64, members: u64, mode: OracleAggregate) -> Agg {
    match mode {
        OracleAggregate::Sum => Agg::Sum(sum),
        OracleAggregate::Mean => Agg::Mean(Ratio::new(sum, members)),
    }
}

fn guard(map: &FixationMap) -> Result<(), SynthError> {
    if map.rows() > MAX_SIDE || map.cols() > MAX_SIDE || map.frames() > MAX_SIDE {
        return Err(SynthError::TooLargeForOracle { rows: map.rows(), cols: map.cols(), frames: map.frames() });
    }
    Ok(())
}

/// Exact counts of the pairs `(xs[i], zs[i])`, with separate distinct-value lists.
struct NaiveTable<X, Z> {
    xs: Vec<X>,
    zs: Vec<Z>,
    counts: Vec<Vec<u64>>,
    total: u64,
}

fn position_or_push<V: PartialEq + Clone>(values: &mut Vec<V>, v: &V) -> usize {
    for (i, existing) in values.iter().enumerate() {
        if existing == v {
            return i;
        }
    }
    values.push(v.clone());
    values.len() - 1
}

impl<X: PartialEq + Clone, Z: PartialEq + Clone> NaiveTable<X, Z> {
    fn count(pairs: &[(X, Z)]) -> Self {
        let mut xs = Vec::new();
        let mut zs = Vec::new();
        for (x, z) in pairs {
            position_or_push(&mut xs, x);
            position_or_push(&mut zs, z);
        }
        let mut counts = vec![vec![0u64; zs.len()]; xs.len()];
        for (x, z) in pairs {
            let i = xs.iter().position(|v| v == x).unwrap();
            let j = zs.iter().position(|v| v == z).unwrap();
            counts[i][j] += 1;
        }
        Self { xs, zs, counts, total: pairs.len() as u64 }
    }

    fn p(&self, i: usize, j: usize) -> f64 {
        self.counts[i][j] as f64 / self.total as f64
    }

    fn px(&self, i: usize) -> f64 {
        self.counts[i].iter().sum::<u64>() as f64 / self.total as f64
    }

    fn pz(&self, j: usize) -> f64 {
        self.counts.iter().map(|row| row[j]).sum::<u64>() as f64 / self.total as f64
    }

    /// sum p(x,z) log2(p(z) / p(x,z))
    fn conditional_entropy(&self) -> f64 {
        let mut h = 0.0;
        for i in 0..self.xs.len() {
            for j in 0..self.zs.len() {
                if self.counts[i][j] > 0 {
                    let p = self.p(i, j);
                    h += p * (self.pz(j) / p).log2();
                }
            }
        }
        h
    }

    fn mutual_information(&self) -> f64 {
        let mut mi = 0.0;
        for i in 0..self.xs.len() {
            for j in 0..self.zs.len() {
                if self.counts[i][j] > 0 {
                    let p = self.p(i, j);
                    mi += p * (p / (self.px(i) * self.pz(j))).log2();
                }
            }
        }
        mi
    }

    fn entropy_x(&self) -> f64 {
        let mut h = 0.0;
        for i in 0..self.xs.len() {
            let p = self.px(i);
            h -= p * p.log2();
        }
        h
    }
}

fn neighborhood_pairs(map: &FixationMap, spec: &NeighborhoodSpec, mode: OracleAggregate) -> Vec<(u16, Agg)> {
    let members = spec.len() as u64;
    let mut pairs = Vec::new();
    for k in 0..map.frames() as i64 {
        for m in 0..map.rows() as i64 {
            for n in 0..map.cols() as i64 {
                let mut sum = 0u64;
                let mut complete = true;
                for o in spec.offsets() {
                    let (mm, nn, kk) = (m + o.dm as i64, n + o.dn as i64, k + o.dk as i64);
                    if mm < 0 || nn < 0 || kk < 0 || mm >= map.rows() as i64 || nn >= map.cols() as i64 || kk >= map.frames() as i64 {
                        complete = false;
                        break;
                    }
                    sum += map.get(mm as usize, nn as usize, kk as usize) as u64;
                }
                if complete {
                    pairs.push((map.get(m as usize, n as usize, k as usize), make_agg(sum, members, mode)));
                }
            }
        }
    }
    pairs
}

/// `H(X | Z)` for interior pixels against their neighbor sum, by dense enumeration.
pub fn oracle_conditional_entropy(map: &FixationMap, spec: &NeighborhoodSpec) -> Result<f64, SynthError> {
    oracle_conditional_entropy_with(map, spec, OracleAggregate::Sum)
}

pub fn oracle_conditional_entropy_with(
    map: &FixationMap,
    spec: &NeighborhoodSpec,
    mode: OracleAggregate,
) -> Result<f64, SynthError> {
    guard(map)?;
    let pairs = neighborhood_pairs(map, spec, mode);
    if pairs.is_empty() {
        return Ok(0.0);
    }
    Ok(NaiveTable::count(&pairs).conditional_entropy())
}

/// `(H(X), H(X|Z), I(X;Z))` for the same interior-pixel sample.
pub fn oracle_neighbor_functionals(
    map: &FixationMap,
    spec: &NeighborhoodSpec,
    mode: OracleAggregate,
) -> Result<(f64, f64, f64), SynthError> {
    guard(map)?;
    let table = NaiveTable::count(&neighborhood_pairs(map, spec, mode));
    Ok((table.entropy_x(), table.conditional_entropy(), table.mutual_information()))
}

/// `I(X; Y)` for two aligned integer streams.
pub fn oracle_mutual_information(xs: &[i64], ys: &[i64]) -> f64 {
    assert_eq!(xs.len(), ys.len(), "streams must be aligned");
    if xs.is_empty() {
        return 0.0;
    }
    let pairs: Vec<(i64, i64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    NaiveTable::count(&pairs).mutual_information()
}

fn oracle_mi_agg(xs: &[u16], zs: &[u64], members: u64, mode: OracleAggregate) -> f64 {
    let pairs: Vec<(u16, Agg)> = xs.iter().zip(zs).map(|(&x, &z)| (x, make_agg(z, members, mode))).collect();
    NaiveTable::count(&pairs).mutual_information()
}

/// Spatial mutual information per location; `None` on the one-pixel border.
pub fn oracle_spatial_mi(map: &FixationMap, mode: OracleAggregate) -> Result<Vec<Option<f64>>, SynthError> {
    guard(map)?;
    let mut out = Vec::new();
    for m in 0..map.rows() {
        for n in 0..map.cols() {
            if m == 0 || n == 0 || m + 1 == map.rows() || n + 1 == map.cols() {
                out.push(None);
                continue;
            }
            let mut xs = Vec::new();
            let mut qs = Vec::new();
            for k in 0..map.frames() {
                let mut q = 0u64;
                for dm in [-1i64, 0, 1] {
                    for dn in [-1i64, 0, 1] {
                        if dm != 0 || dn != 0 {
                            q += map.get((m as i64 + dm) as usize, (n as i64 + dn) as usize, k) as u64;
                        }
                    }
                }
                xs.push(map.get(m, n, k));
                qs.push(q);
            }
            out.push(Some(oracle_mi_agg(&xs, &qs, 8, mode)));
        }
    }
    Ok(out)
}

fn frame_vs_frames(map: &FixationMap, k: usize, others: &[usize], mode: OracleAggregate) -> f64 {
    let mut xs = Vec::new();
    let mut ws = Vec::new();
    for m in 0..map.rows() {
        for n in 0..map.cols() {
            xs.push(map.get(m, n, k));
            ws.push(others.iter().map(|&j| map.get(m, n, j) as u64).sum());
        }
    }
    oracle_mi_agg(&xs, &ws, others.len() as u64, mode)
}

/// Mean over valid frames of the MI between frame `k` and frames `k - d`, `k + d`.
pub fn oracle_temporal_pair(map: &FixationMap, d: usize, mode: OracleAggregate) -> Result<f64, SynthError> {
    guard(map)?;
    let mut total = 0.0;
    let mut count = 0;
    for k in d..map.frames().saturating_sub(d) {
        total += frame_vs_frames(map, k, &[k - d, k + d], mode);
        count += 1;
    }
    Ok(total / count as f64)
}

/// Mean over valid frames of the MI between frame `k` and all frames within distance `window`.
pub fn oracle_temporal_window(map: &FixationMap, window: usize, mode: OracleAggregate) -> Result<f64, SynthError> {
    guard(map)?;
    let mut total = 0.0;
    let mut count = 0;
    for k in window..map.frames().saturating_sub(window) {
        let mut others = Vec::new();
        for j in 1..=window {
            others.push(k - j);
            others.push(k + j);
        }
        total += frame_vs_frames(map, k, &others, mode);
        count += 1;
    }
    Ok(total / count as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mi_examples() {
        assert!((oracle_mutual_information(&[0, 1, 0, 1], &[0, 1, 0, 1]) - 1.0).abs() < 1e-12);
        // product construction: every pair of a 2x3 grid once
        let xs = [0, 0, 0, 1, 1, 1];
        let ys = [0, 1, 2, 0, 1, 2];
        assert!(oracle_mutual_information(&xs, &ys).abs() < 1e-15);
        assert_eq!(oracle_mutual_information(&[0, 0, 1, 1], &[0, 1, 0, 1]), 0.0);
    }

    #[test]
    fn conditional_entropy_examples() {
        let zero = FixationMap::zeros(5, 5, 5).unwrap();
        assert_eq!(oracle_conditional_entropy(&zero, &NeighborhoodSpec::all26()).unwrap(), 0.0);

        let single = FixationMap::from_fn(3, 3, 3, |m, n, k| ((m, n, k) == (1, 1, 1)) as u16).unwrap();
        assert_eq!(oracle_conditional_entropy(&single, &NeighborhoodSpec::all26()).unwrap(), 0.0);
    }

    #[test]
    fn size_guard() {
        let big = FixationMap::zeros(65, 3, 3).unwrap();
        assert!(matches!(
            oracle_conditional_entropy(&big, &NeighborhoodSpec::all26()),
            Err(SynthError::TooLargeForOracle { .. })
        ));
    }
}
