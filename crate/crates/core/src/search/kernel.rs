//! Gaussian kernel regression of action values over expanded siblings.

/// Action embedded for distance computations. Actions in different groups are infinitely far apart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActionKey {
    pub group: Option<(usize, usize)>,
    pub coords: [f64; 3],
}

impl ActionKey {
    pub fn point(coords: [f64; 3]) -> Self {
        Self { group: None, coords }
    }

    pub fn distance_squared(&self, other: &ActionKey) -> f64 {
        if self.group != other.group {
            return f64::INFINITY;
        }
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

/// Kernel-smoothed statistics at a query action.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum KrEstimate {
    Estimate { value: f64, visits: f64 },
    /// No expanded action shares the query's group.
    NoInformation,
}

/// Estimates `(Q̂, n̂)` at `query` from expanded `(key, visits, value)` triples.
///
/// `Q̂ = Σ K·n·Q / Σ K·n` and `n̂ = Σ K·n / Σ K` with `K = exp(−‖a − a′‖² / 2σ²)`. Both are ratios,
/// so kernel weights are shifted by the nearest distance to stay finite for tiny bandwidths.
/// A non-positive bandwidth returns the nearest action's statistics.
pub fn kr_estimate<'a>(
    query: &ActionKey,
    expanded: impl IntoIterator<Item = (&'a ActionKey, f64, f64)>,
    bandwidth: f64,
) -> KrEstimate {
    let points: Vec<(f64, f64, f64)> = expanded
        .into_iter()
        .map(|(key, n, q)| (query.distance_squared(key), n, q))
        .filter(|(d2, _, _)| d2.is_finite())
        .collect();
    let Some(nearest) = points
        .iter()
        .copied()
        .reduce(|best, p| if p.0 < best.0 { p } else { best })
    else {
        return KrEstimate::NoInformation;
    };
    let fallback = KrEstimate::Estimate {
        value: nearest.2,
        visits: nearest.1,
    };
    if bandwidth <= 0.0 {
        return fallback;
    }
    let scale = 2.0 * bandwidth * bandwidth;
    let (mut wnq, mut wn, mut w) = (0.0, 0.0, 0.0);
    for &(d2, n, q) in &points {
        let k = (-(d2 - nearest.0) / scale).exp();
        wnq += k * n * q;
        wn += k * n;
        w += k;
    }
    if wn > 0.0 && w > 0.0 {
        KrEstimate::Estimate {
            value: wnq / wn,
            visits: wn / w,
        }
    } else {
        fallback
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn estimate(e: KrEstimate) -> (f64, f64) {
        match e {
            KrEstimate::Estimate { value, visits } => (value, visits),
            KrEstimate::NoInformation => panic!("expected an estimate"),
        }
    }

    #[test]
    fn single_action_value_everywhere() {
        let a = ActionKey::point([0.2, 0.3, 0.0]);
        for q in [[0.0; 3], [0.9, 0.1, 0.0], [5.0, 5.0, 0.0]] {
            let (v, n) = estimate(kr_estimate(&ActionKey::point(q), [(&a, 7.0, 0.42)], 0.1));
            assert!((v - 0.42).abs() < 1e-12);
            assert!((n - 7.0).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_pair_averages() {
        let a = ActionKey::point([0.0; 3]);
        let b = ActionKey::point([1.0, 0.0, 0.0]);
        let q = ActionKey::point([0.5, 0.0, 0.0]);
        let (v, _) = estimate(kr_estimate(&q, [(&a, 3.0, 0.0), (&b, 3.0, 1.0)], 0.1));
        assert!((v - 0.5).abs() < 1e-12);
    }

    #[test]
    fn shrinking_bandwidth_recovers_exact_value() {
        let a = ActionKey::point([0.3, 0.0, 0.0]);
        let b = ActionKey::point([0.35, 0.0, 0.0]);
        let expanded = [(&a, 2.0, 1.5), (&b, 9.0, -0.5)];
        let mut last_err = f64::INFINITY;
        for bw in [0.1, 0.03, 0.01, 0.003, 1e-4, 1e-8] {
            let (v, _) = estimate(kr_estimate(&a, expanded, bw));
            let err = (v - 1.5).abs();
            assert!(err <= last_err + 1e-15);
            last_err = err;
        }
        assert!(last_err < 1e-12);
        let (v, n) = estimate(kr_estimate(&a, expanded, 0.0));
        assert_eq!((v, n), (1.5, 2.0));
    }

    #[test]
    fn other_groups_carry_no_information() {
        let a = ActionKey {
            group: Some((0, 1)),
            coords: [0.5, 0.0, 0.0],
        };
        let q = ActionKey {
            group: Some((0, 2)),
            coords: [0.5, 0.0, 0.0],
        };
        assert_eq!(kr_estimate(&q, [(&a, 1.0, 1.0)], 0.1), KrEstimate::NoInformation);
    }

    #[test]
    fn far_queries_stay_finite() {
        let a = ActionKey::point([0.0; 3]);
        let b = ActionKey::point([0.1, 0.0, 0.0]);
        let q = ActionKey::point([100.0, 0.0, 0.0]);
        let (v, n) = estimate(kr_estimate(&q, [(&a, 4.0, 2.0), (&b, 1.0, -1.0)], 0.01));
        assert!(v.is_finite() && n.is_finite());
        assert!((v + 1.0).abs() < 1e-9, "nearest action dominates: {v}");
    }
}
