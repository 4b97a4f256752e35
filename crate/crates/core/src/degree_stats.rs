// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Degree statistics: rank-size curves and discrete power-law fitting.
//!
//! The power-law exponent uses the continuous approximation to the discrete
//! maximum-likelihood estimator,
//!
//! ```text
//! alpha = 1 + n / Σ ln(x_i / (x_min - 1/2))      over x_i >= x_min
//! ```
//!
//! and the fitted model's survival function is approximated consistently as
//! `P(X >= x) = ((x - 1/2) / (x_min - 1/2))^(1 - alpha)`. When no `x_min` is
//! given, every distinct observed value whose tail still holds at least two
//! distinct values is tried, and the one minimizing the Kolmogorov-Smirnov
//! distance wins (smallest value on ties). A single-valued tail matches any
//! model at distance 0 and would otherwise always win. The estimator
//! is noticeably biased low for `x_min` of 1 or 2.

use std::io::Write;

use rand::Rng;
use serde::Serialize;

use crate::error::FitError;
use crate::graph::{BipartiteGraph, Mode};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RankSizeEntry {
    pub rank: usize,
    pub degree: usize,
    pub node_id: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RankSizeDistribution {
    pub mode: Mode,
    pub entries: Vec<RankSizeEntry>,
}

impl RankSizeDistribution {
    /// Sorts by descending degree, ties by ascending id, and assigns ranks
    /// from 1.
    pub fn from_degrees<I, S>(mode: Mode, degrees: I) -> Self
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let mut pairs: Vec<(String, usize)> =
            degrees.into_iter().map(|(id, d)| (id.into(), d)).collect();
        pairs.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
        let entries = pairs
            .into_iter()
            .enumerate()
            .map(|(i, (node_id, degree))| RankSizeEntry {
                rank: i + 1,
                degree,
                node_id,
            })
            .collect();
        RankSizeDistribution { mode, entries }
    }

    pub fn degrees(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.degree).collect()
    }

    /// Writes `rank,degree,node_id` rows with LF endings.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(["rank", "degree", "node_id"])?;
        for e in &self.entries {
            w.write_record([e.rank.to_string(), e.degree.to_string(), e.node_id.clone()])?;
        }
        w.flush()
    }
}

pub fn rank_size(graph: &BipartiteGraph, mode: Mode) -> RankSizeDistribution {
    RankSizeDistribution::from_degrees(
        mode,
        graph
            .degree_sequence(mode)
            .into_iter()
            .map(|(node, d)| (node.id, d)),
    )
}

/// `(log10 rank, log10 degree)` for every entry with a positive degree.
pub fn log_log_points(dist: &RankSizeDistribution) -> Vec<(f64, f64)> {
    dist.entries
        .iter()
        .filter(|e| e.degree > 0)
        .map(|e| ((e.rank as f64).log10(), (e.degree as f64).log10()))
        .collect()
}

/// Ordinary least-squares line through a point cloud.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Returns `None` with fewer than two points or no spread in x.
pub fn least_squares(points: &[(f64, f64)]) -> Option<LineFit> {
    let n = points.len() as f64;
    if points.len() < 2 {
        return None;
    }
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for &(x, y) in points {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawFit {
    pub alpha: f64,
    pub x_min: u64,
    pub ks_distance: f64,
    pub n_tail: usize,
}

/// Exponent estimate for the observations `>= x_min`.
fn mle_alpha(tail: &[u64], x_min: u64) -> f64 {
    let shift = x_min as f64 - 0.5;
    let log_sum: f64 = tail.iter().map(|&x| (x as f64 / shift).ln()).sum();
    1.0 + tail.len() as f64 / log_sum
}

/// Model survival function `P(X >= x)`.
pub fn power_law_ccdf(x: u64, alpha: f64, x_min: u64) -> f64 {
    ((x as f64 - 0.5) / (x_min as f64 - 0.5)).powf(1.0 - alpha)
}

/// KS distance between the empirical survival function of a sorted tail and
/// the model, evaluated at each distinct observed value.
fn ks_distance(sorted_tail: &[u64], alpha: f64, x_min: u64) -> f64 {
    let n = sorted_tail.len() as f64;
    let mut worst: f64 = 0.0;
    let mut i = 0;
    while i < sorted_tail.len() {
        let v = sorted_tail[i];
        let empirical = (sorted_tail.len() - i) as f64 / n;
        worst = worst.max((empirical - power_law_ccdf(v, alpha, x_min)).abs());
        while i < sorted_tail.len() && sorted_tail[i] == v {
            i += 1;
        }
    }
    worst
}

fn fit_sorted(sorted: &[u64], x_min: u64) -> Result<PowerLawFit, FitError> {
    let tail = &sorted[sorted.partition_point(|&x| x < x_min)..];
    if tail.len() < 2 {
        return Err(FitError::InsufficientData);
    }
    let alpha = mle_alpha(tail, x_min);
    Ok(PowerLawFit {
        alpha,
        x_min,
        ks_distance: ks_distance(tail, alpha, x_min),
        n_tail: tail.len(),
    })
}

pub fn fit_power_law(degrees: &[u64], x_min: Option<u64>) -> Result<PowerLawFit, FitError> {
    let mut sorted = degrees.to_vec();
    sorted.sort_unstable();
    match x_min {
        Some(0) => Err(FitError::InvalidXMin),
        Some(x) => fit_sorted(&sorted, x),
        None => {
            let mut candidates = sorted.clone();
            candidates.retain(|&x| x >= 1);
            candidates.dedup();
            let largest = candidates.pop();
            let mut best: Option<PowerLawFit> = None;
            for x in candidates {
                let Ok(fit) = fit_sorted(&sorted, x) else {
                    break;
                };
                if best.map_or(true, |b| fit.ks_distance < b.ks_distance) {
                    best = Some(fit);
                }
            }
            match (best, largest) {
                (Some(fit), _) => Ok(fit),
                // every observation equal: fall back to the only candidate
                (None, Some(x)) => fit_sorted(&sorted, x),
                (None, None) => Err(FitError::InsufficientData),
            }
        }
    }
}

/// Draws one value whose survival function is exactly [`power_law_ccdf`].
pub fn sample_power_law<R: Rng + ?Sized>(rng: &mut R, alpha: f64, x_min: u64) -> u64 {
    let u: f64 = 1.0 - rng.gen::<f64>();
    let y = (x_min as f64 - 0.5) * u.powf(-1.0 / (alpha - 1.0));
    (y + 0.5).floor() as u64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ModeSummary {
    pub firm_count: usize,
    pub org_count: usize,
    pub edge_count: usize,
    pub max_firm_degree: usize,
    pub max_org_degree: usize,
}

pub fn mode_summary(graph: &BipartiteGraph) -> ModeSummary {
    let max_deg = |mode| graph.adjacency(mode).iter().map(Vec::len).max().unwrap_or(0);
    ModeSummary {
        firm_count: graph.node_count(Mode::Firm),
        org_count: graph.node_count(Mode::ResearchOrg),
        edge_count: graph.edge_count(),
        max_firm_degree: max_deg(Mode::Firm),
        max_org_degree: max_deg(Mode::ResearchOrg),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn ranked(dist: &RankSizeDistribution) -> Vec<(usize, usize, &str)> {
        dist.entries
            .iter()
            .map(|e| (e.rank, e.degree, e.node_id.as_str()))
            .collect()
    }

    #[test]
    fn rank_size_orders_and_breaks_ties() {
        let d = RankSizeDistribution::from_degrees(
            Mode::Firm,
            [("d", 1), ("c", 3), ("a", 5), ("b", 3)],
        );
        assert_eq!(ranked(&d), vec![(1, 5, "a"), (2, 3, "b"), (3, 3, "c"), (4, 1, "d")]);

        let d = RankSizeDistribution::from_degrees(Mode::Firm, [("c", 2), ("b", 2), ("a", 2)]);
        assert_eq!(ranked(&d), vec![(1, 2, "a"), (2, 2, "b"), (3, 2, "c")]);
    }

    #[test]
    fn log_log_examples() {
        let d = RankSizeDistribution::from_degrees(Mode::Firm, [("a", 10), ("b", 1)]);
        let pts = log_log_points(&d);
        assert_eq!(pts[0], (0.0, 1.0));
        assert!((pts[1].0 - 0.30103).abs() < 1e-5);
        assert_eq!(pts[1].1, 0.0);

        let d = RankSizeDistribution::from_degrees(
            Mode::Firm,
            [("a", 4), ("b", 2), ("c", 1), ("d", 0)],
        );
        assert_eq!(log_log_points(&d).len(), 3);
    }

    #[test]
    fn mle_on_unit_observations() {
        let fit = fit_power_law(&[1, 1, 1, 1], Some(1)).unwrap();
        let expected = 1.0 + 4.0 / (4.0 * 2f64.ln());
        assert!((fit.alpha - expected).abs() < 1e-12);
        assert!((fit.alpha - 2.442695).abs() < 1e-6);
        assert_eq!(fit.n_tail, 4);
        assert_eq!(fit.ks_distance, 0.0);
    }

    #[test]
    fn fit_errors() {
        assert_eq!(fit_power_law(&[1, 2], Some(5)), Err(FitError::InsufficientData));
        assert_eq!(fit_power_law(&[7], None), Err(FitError::InsufficientData));
        assert_eq!(fit_power_law(&[], None), Err(FitError::InsufficientData));
        assert_eq!(fit_power_law(&[1, 2, 3], Some(0)), Err(FitError::InvalidXMin));
    }

    #[test]
    fn ks_against_hand_values() {
        // tail [1, 2], x_min 1: alpha = 1 + 2 / (ln 2 + ln 4) = 1 + 2 / (3 ln 2)
        let fit = fit_power_law(&[1, 2], Some(1)).unwrap();
        let alpha = 1.0 + 2.0 / (3.0 * 2f64.ln());
        assert!((fit.alpha - alpha).abs() < 1e-12);
        // at x = 2: empirical 1/2, model 3^(1 - alpha)
        let model = 3f64.powf(1.0 - alpha);
        assert!((fit.ks_distance - (0.5 - model).abs()).abs() < 1e-12);
    }

    #[test]
    fn auto_x_min_picks_smallest_ks() {
        let degrees = [1, 1, 1, 1, 1, 1, 2, 3, 5, 8, 13, 21, 34];
        let auto = fit_power_law(&degrees, None).unwrap();
        let mut values = degrees.to_vec();
        values.dedup();
        for x in values {
            if let Ok(f) = fit_power_law(&degrees, Some(x)) {
                assert!(auto.ks_distance <= f.ks_distance);
            }
        }
    }

    #[test]
    fn auto_x_min_skips_single_valued_tails() {
        let fit = fit_power_law(&[1, 1, 2, 2, 3, 5, 9, 9], None).unwrap();
        assert!(fit.x_min < 9);
        let flat = fit_power_law(&[4, 4, 4], None).unwrap();
        assert_eq!((flat.x_min, flat.n_tail), (4, 3));
    }

    #[test]
    fn fit_json_keys() {
        let fit = PowerLawFit {
            alpha: 2.5,
            x_min: 3,
            ks_distance: 0.125,
            n_tail: 40,
        };
        assert_eq!(
            serde_json::to_string(&fit).unwrap(),
            r#"{"alpha":2.5,"x_min":3,"ks_distance":0.125,"n_tail":40}"#
        );
    }

    #[test]
    fn sampler_matches_model_survival() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(5);
        let n = 200_000;
        let xs: Vec<u64> = (0..n).map(|_| sample_power_law(&mut rng, 2.5, 4)).collect();
        assert!(xs.iter().all(|&x| x >= 4));
        for x in [4, 5, 8, 20] {
            let emp = xs.iter().filter(|&&v| v >= x).count() as f64 / n as f64;
            assert!((emp - power_law_ccdf(x, 2.5, 4)).abs() < 0.005, "x = {x}");
        }
    }

    #[test]
    fn summary_counts() {
        let g = BipartiteGraph::from_pairs([
            ("a", "x"),
            ("a", "y"),
            ("a", "z"),
            ("b", "x"),
            ("b", "y"),
            ("b", "z"),
        ])
        .unwrap();
        assert_eq!(
            mode_summary(&g),
            ModeSummary {
                firm_count: 2,
                org_count: 3,
                edge_count: 6,
                max_firm_degree: 3,
                max_org_degree: 2
            }
        );
        let empty = mode_summary(&BipartiteGraph::default());
        assert_eq!(empty.firm_count + empty.org_count + empty.edge_count, 0);
        assert_eq!(empty.max_firm_degree + empty.max_org_degree, 0);
    }

    #[test]
    fn rank_size_csv() {
        let d = RankSizeDistribution::from_degrees(Mode::Firm, [("a", 2), ("b", 1)]);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "rank,degree,node_id\n1,2,a\n2,1,b\n");
    }

    proptest! {
        #[test]
        fn rank_size_permutes_degree_sequence(edges in prop::collection::vec((0u8..12, 0u8..6), 0..60)) {
            let names: Vec<(String, String)> =
                edges.iter().map(|(f, o)| (format!("f{f}"), format!("o{o}"))).collect();
            let g = BipartiteGraph::from_pairs(names.iter().map(|(f, o)| (f.as_str(), o.as_str()))).unwrap();
            for mode in [Mode::Firm, Mode::ResearchOrg] {
                let dist = rank_size(&g, mode);
                let mut a = dist.degrees();
                let mut b: Vec<usize> = g.degree_sequence(mode).into_iter().map(|(_, d)| d).collect();
                prop_assert!(a.windows(2).all(|w| w[0] >= w[1]));
                a.sort_unstable();
                b.sort_unstable();
                prop_assert_eq!(a, b);
            }
        }

        #[test]
        fn values_below_fixed_x_min_do_not_move_alpha(
            tail in prop::collection::vec(5u64..500, 2..50),
            low in prop::collection::vec(1u64..5, 0..50),
        ) {
            let base = fit_power_law(&tail, Some(5)).unwrap();
            let mut all = tail.clone();
            all.extend(low);
            let more = fit_power_law(&all, Some(5)).unwrap();
            prop_assert_eq!(base.alpha, more.alpha);
            prop_assert_eq!(base.n_tail, more.n_tail);
        }

        #[test]
        fn geometric_rank_size_slope(c in 1.0e4f64..1.0e6, b in 0.3f64..1.2) {
            let degrees = (1..=200).map(|r| (format!("n{r:04}"), (c * (r as f64).powf(-b)).round() as usize));
            let dist = RankSizeDistribution::from_degrees(Mode::Firm, degrees);
            let line = least_squares(&log_log_points(&dist)).unwrap();
            prop_assert!((line.slope + b).abs() <= 0.05, "slope {} vs -{}", line.slope, b);
        }
    }
}
