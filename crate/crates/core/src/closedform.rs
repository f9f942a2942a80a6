//! Exact formulas for the two networks that admit them: the series path
//! and the staged parallel-series network.
//!
//! On the parallel-series network the resistance decomposes into a sum of
//! independent stage contributions `Y_i = 1 / (sum_k 1/r_{i,k})`, so exact
//! means and variances reduce to binomial sums over the number of edges at
//! the high value. Stage weights are computed from exact integer binomials
//! while they fit, and from binomial log-weights above that; all sums are
//! compensated.

use alloc::vec::Vec;

use crate::env::Environment;
use crate::error::{Error, Result};
use crate::math::{self, Kahan};

/// Exact mean and variance of one parallel stage.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StageMoments {
    pub stage: usize,
    pub mean: f64,
    pub variance: f64,
}

/// Exact mean and variance of a full network.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

fn check_pair(a: f64, b: f64) -> Result<()> {
    if !(a.is_finite() && b.is_finite() && a > 0.0 && b > 0.0) {
        return Err(Error::NonPositiveParameter);
    }
    if a > b {
        return Err(Error::ReversedBounds);
    }
    Ok(())
}

/// Resistance of a parallel-series environment: stage `i` holds edges
/// `i^2 .. (i+1)^2`, and the total is the sum of stage reciprocals.
pub fn ps_resistance(env: &Environment) -> Result<f64> {
    let edges = env.len();
    let n = integer_sqrt(edges);
    if n * n != edges || n == 0 {
        return Err(Error::EdgeCountNotSquare { edges });
    }
    let mut total = Kahan::default();
    for i in 0..n {
        let mut stage_conductance = Kahan::default();
        for e in i * i..(i + 1) * (i + 1) {
            stage_conductance.add(1.0 / env.resistance(e));
        }
        total.add(1.0 / stage_conductance.value());
    }
    Ok(total.value())
}

/// Exact two-point moments of stage `i`: the stage has `2i+1` edges, and
/// with `j` of them at `b` its conductance is `(2i+1-j)/a + j/b`.
pub fn ps_stage_moments(i: usize, a: f64, b: f64) -> Result<StageMoments> {
    check_pair(a, b)?;
    let m = 2 * i + 1;
    let weights = binomial_weights(m);
    let y = |j: usize| 1.0 / ((m - j) as f64 / a + j as f64 / b);

    let mut mean_acc = Kahan::default();
    for (j, &w) in weights.iter().enumerate() {
        mean_acc.add(w * y(j));
    }
    let mean = mean_acc.value();

    let mut var_acc = Kahan::default();
    for (j, &w) in weights.iter().enumerate() {
        let d = y(j) - mean;
        var_acc.add(w * d * d);
    }

    Ok(StageMoments { stage: i, mean, variance: var_acc.value().max(0.0) })
}

/// Exact moments of the parallel-series resistance on `n` stages: stage
/// contributions are independent, so means and variances both add.
pub fn ps_exact_moments(n: usize, a: f64, b: f64) -> Result<Moments> {
    check_pair(a, b)?;
    if n == 0 {
        return Err(Error::ZeroStages);
    }
    let mut mean = Kahan::default();
    let mut variance = Kahan::default();
    for i in 0..n {
        let s = ps_stage_moments(i, a, b)?;
        mean.add(s.mean);
        variance.add(s.variance);
    }
    Ok(Moments { mean: mean.value(), variance: variance.value() })
}

/// Exact moments of the series path of `n` edges: the resistance is a sum
/// of `n` independent two-point values, so the mean is `n(a+b)/2` and the
/// variance `n(b-a)^2/4`.
pub fn d1_moments(n: usize, a: f64, b: f64) -> Result<Moments> {
    check_pair(a, b)?;
    if n == 0 {
        return Err(Error::ZeroStages);
    }
    let gap = b - a;
    Ok(Moments { mean: n as f64 * (a + b) / 2.0, variance: n as f64 * gap * gap / 4.0 })
}

/// Symmetric binomial weights `C(m, j) / 2^m` for `j = 0..=m`: exact
/// integers while they fit in 128 bits, log-weights beyond.
fn binomial_weights(m: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(m + 1);
    if m <= 64 {
        let scale = 1.0 / (1u128 << m) as f64;
        let mut c: u128 = 1;
        for j in 0..=m {
            w.push(c as f64 * scale);
            if j < m {
                c = c * (m - j) as u128 / (j + 1) as u128;
            }
        }
    } else {
        let ln2 = core::f64::consts::LN_2;
        let mut lw = -(m as f64) * ln2;
        for j in 0..=m {
            w.push(math::exp(lw));
            if j < m {
                lw += math::ln((m - j) as f64) - math::ln((j + 1) as f64);
            }
        }
    }
    w
}

fn integer_sqrt(x: usize) -> usize {
    if x == 0 {
        return 0;
    }
    let mut r = math::sqrt(x as f64) as usize;
    while r * r > x {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= x {
        r += 1;
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::{Distribution, SeedSpec};
    use crate::graph::{Network, TerminalPair};
    use crate::linear::effective_resistance;

    #[test]
    fn ps_resistance_trivial_layouts() {
        // one stage: the resistance is the single edge
        let env = Environment::new(alloc::vec![3.5]).unwrap();
        assert_eq!(ps_resistance(&env).unwrap(), 3.5);

        // two stages, second all equal: r0 + c/3
        let env = Environment::new(alloc::vec![2.0, 0.6, 0.6, 0.6]).unwrap();
        assert!((ps_resistance(&env).unwrap() - 2.2).abs() < 1e-15);

        // non-square edge count
        let env = Environment::new(alloc::vec![1.0, 1.0]).unwrap();
        assert!(matches!(ps_resistance(&env), Err(Error::EdgeCountNotSquare { edges: 2 })));
    }

    #[test]
    fn ps_resistance_matches_linear_engine() {
        // cross-engine oracle on the real multigraph; n = 10 stresses the
        // 19-fold parallel merge in the last stage
        for n in [1usize, 2, 3, 4, 5, 10] {
            let net = Network::parallel_series(n).unwrap();
            let dist = Distribution::bernoulli(0.5, 2.0).unwrap();
            let env = Environment::sample(&net, dist, SeedSpec::new(31, n as u64));
            let closed = ps_resistance(&env).unwrap();
            let t = TerminalPair::singleton(0, n).unwrap();
            let solved = effective_resistance(&net, &env, &t, 1e-10).unwrap().value;
            assert!((closed - solved).abs() <= 1e-9 * closed, "n {n}: {closed} vs {solved}");
        }
    }

    #[test]
    fn stage_zero_is_a_two_point_edge() {
        let s = ps_stage_moments(0, 0.5, 1.0).unwrap();
        assert!((s.mean - 0.75).abs() < 1e-15);
        assert!((s.variance - 0.0625).abs() < 1e-15);
    }

    #[test]
    fn stage_one_matches_four_term_sum() {
        // conductances 6 - j over j in 0..=3, weights (1,3,3,1)/8:
        // mean = 111/480
        let s = ps_stage_moments(1, 0.5, 1.0).unwrap();
        assert!((s.mean - 111.0 / 480.0).abs() < 1e-15, "mean {}", s.mean);

        // degenerate a = b: deterministic 1/3, variance 0
        let s = ps_stage_moments(1, 1.0, 1.0).unwrap();
        assert!((s.mean - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.variance, 0.0);
    }

    #[test]
    fn stage_mean_stays_in_parallel_bracket() {
        let (a, b) = (0.5, 3.0);
        for i in [0usize, 1, 2, 5, 40, 100] {
            let m = (2 * i + 1) as f64;
            let s = ps_stage_moments(i, a, b).unwrap();
            assert!(s.mean >= a / m - 1e-15 && s.mean <= b / m + 1e-15);
            assert!(s.variance >= 0.0);
        }
    }

    #[test]
    fn weights_cross_the_exact_integer_boundary_smoothly() {
        // m = 64 uses exact integers, m = 65 log-weights; both must sum to 1
        for m in [64usize, 65, 129] {
            let w = binomial_weights(m);
            let total: f64 = w.iter().sum();
            assert!((total - 1.0).abs() < 1e-11, "m {m}: sum {total}");
            // symmetry of the binomial
            assert!((w[0] - w[m]).abs() <= 1e-12 * w[0].max(f64::MIN_POSITIVE));
        }
    }

    #[test]
    fn exact_moments_single_stage_and_growth() {
        let m1 = ps_exact_moments(1, 0.5, 1.0).unwrap();
        let s0 = ps_stage_moments(0, 0.5, 1.0).unwrap();
        assert_eq!(m1.mean, s0.mean);
        assert_eq!(m1.variance, s0.variance);

        // mean / log n stays in a fixed bracket across two decades
        for n in [100usize, 1000, 10_000] {
            let m = ps_exact_moments(n, 0.5, 1.0).unwrap();
            let ratio = m.mean / math::ln(n as f64);
            assert!((0.2..=0.5).contains(&ratio), "n {n}: ratio {ratio}");
        }
    }

    #[test]
    fn variance_tail_is_summable() {
        let a = ps_exact_moments(1000, 0.5, 1.0).unwrap();
        let b = ps_exact_moments(2000, 0.5, 1.0).unwrap();
        assert!(b.variance >= a.variance);
        assert!(b.variance - a.variance <= 1e-5);
    }

    #[test]
    fn scaled_stage_variance_converges() {
        // (i + 1/2)^3 Var(Y_i) settles to a positive constant; the
        // second-order (delta method) expansion of 1/(m + B) puts it at
        // 4 / (81 * 8) = 1/162 for a = 1/2, b = 1.
        let g = |i: usize| {
            let s = ps_stage_moments(i, 0.5, 1.0).unwrap();
            let x = i as f64 + 0.5;
            x * x * x * s.variance
        };
        let (g300, g600) = (g(300), g(600));
        assert!((g600 - g300).abs() <= 0.02 * g300, "not settling: {g300} vs {g600}");
        assert!(g600 > 0.0);
        assert!((g600 * 162.0 - 1.0).abs() <= 0.02, "scaled limit {}", g600 * 162.0);
    }

    #[test]
    fn d1_closed_form() {
        let m = d1_moments(4, 1.0, 2.0).unwrap();
        assert_eq!(m.mean, 6.0);
        assert_eq!(m.variance, 1.0);

        let m = d1_moments(7, 1.5, 1.5).unwrap();
        assert_eq!(m.variance, 0.0);
    }

    #[test]
    fn d1_matches_exhaustive_on_the_path() {
        use crate::influence::{exhaustive_analysis, Observable};
        let n = 6usize;
        let net = Network::box_lattice(1, n).unwrap();
        let (a, b) = (1.0, 2.0);
        let obs = Observable::PointToPoint { source: 0, sink: n };
        let report = exhaustive_analysis(&net, &obs, a, b, 1e-10).unwrap();
        let exact = d1_moments(n, a, b).unwrap();
        assert!((report.mean - exact.mean).abs() < 1e-10);
        assert!((report.variance - exact.variance).abs() < 1e-10);
    }

    #[test]
    fn ps_exact_matches_exhaustive_small() {
        use crate::influence::{exhaustive_analysis, Observable};
        let n = 2usize;
        let net = Network::parallel_series(n).unwrap();
        let (a, b) = (1.0, 2.0);
        let obs = Observable::PointToPoint { source: 0, sink: n };
        let report = exhaustive_analysis(&net, &obs, a, b, 1e-10).unwrap();
        let exact = ps_exact_moments(n, a, b).unwrap();
        assert!((report.mean - exact.mean).abs() < 1e-12);
        assert!((report.variance - exact.variance).abs() < 1e-12);
    }
}
