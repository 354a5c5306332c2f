//! Base-station layout along a straight road and the path-loss map.

/// Straight-road deployment: the road runs along the x axis starting at the
/// origin; base stations sit at a fixed perpendicular offset, evenly spaced,
/// with BS `n` centered over the interval `[n·spacing, (n+1)·spacing)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub bs_spacing_m: f64,
    pub road_offset_m: f64,
    pub bs_count: usize,
}

impl Geometry {
    pub fn new(bs_spacing_m: f64, road_offset_m: f64, bs_count: usize) -> Self {
        assert!(bs_spacing_m > 0.0, "bs_spacing must be positive");
        assert!(road_offset_m > 0.0, "road_offset must be positive");
        assert!(bs_count >= 1, "need at least one base station");
        Self {
            bs_spacing_m,
            road_offset_m,
            bs_count,
        }
    }

    /// Position of the `n`th base station.
    pub fn bs_position(&self, n: usize) -> (f64, f64) {
        (self.bs_spacing_m * (n as f64 + 0.5), self.road_offset_m)
    }

    pub fn road_length_m(&self) -> f64 {
        self.bs_spacing_m * self.bs_count as f64
    }

    /// Distance from a road position `x` to BS `n`.
    pub fn distance_to_bs(&self, x: f64, n: usize) -> f64 {
        let (bx, by) = self.bs_position(n);
        ((x - bx).powi(2) + by * by).sqrt()
    }

    /// Index of the nearest BS (equivalently the one with the highest
    /// large-scale gain on this symmetric layout); ties break to the lower
    /// index.
    pub fn nearest_bs(&self, x: f64) -> usize {
        let mut best = 0usize;
        let mut best_d = self.distance_to_bs(x, 0);
        for n in 1..self.bs_count {
            let d = self.distance_to_bs(x, n);
            if d < best_d {
                best_d = d;
                best = n;
            }
        }
        best
    }

    /// Linear large-scale gain from road position `x` to BS `n`.
    pub fn gain_to_bs(&self, x: f64, n: usize) -> f64 {
        let d = self.distance_to_bs(x, n);
        10f64.powf(-pathloss_db(d) / 10.0)
    }

    /// Gain at the cell edge (distance = half the BS spacing), used by the
    /// worst-case planning baseline.
    pub fn cell_edge_gain(&self) -> f64 {
        10f64.powf(-pathloss_db(self.bs_spacing_m / 2.0) / 10.0)
    }
}

/// Path loss `35.3 + 37.6·log10(D)` dB with the distance clamped to 1 m,
/// where the formula would otherwise diverge.
pub fn pathloss_db(distance_m: f64) -> f64 {
    35.3 + 37.6 * distance_m.max(1.0).log10()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pathloss_reference_points() {
        assert!((pathloss_db(100.0) - 110.5).abs() < 1e-12);
        assert!((pathloss_db(1000.0) - 148.1).abs() < 1e-12);
        assert!((pathloss_db(1.0) - 35.3).abs() < 1e-12);
    }

    #[test]
    fn pathloss_clamps_below_one_meter() {
        assert_eq!(pathloss_db(0.0), pathloss_db(1.0));
        assert_eq!(pathloss_db(0.5), pathloss_db(1.0));
    }

    #[test]
    fn nearest_bs_follows_cell_intervals() {
        let g = Geometry::new(500.0, 100.0, 3);
        assert_eq!(g.nearest_bs(10.0), 0);
        assert_eq!(g.nearest_bs(499.0), 0);
        assert_eq!(g.nearest_bs(501.0), 1);
        assert_eq!(g.nearest_bs(1400.0), 2);
    }

    #[test]
    fn equidistant_midpoint_breaks_tie_to_lower_index() {
        let g = Geometry::new(500.0, 100.0, 2);
        // x = 500 is equidistant from BSs at 250 and 750.
        assert_eq!(g.nearest_bs(500.0), 0);
    }

    #[test]
    fn minimum_distance_gain_matches_pathloss_example() {
        let g = Geometry::new(500.0, 100.0, 1);
        // Directly under the BS: distance 100 m, alpha = 10^(-110.5/10).
        let alpha = g.gain_to_bs(250.0, 0);
        let expected = 10f64.powf(-11.05);
        assert!((alpha - expected).abs() / expected < 1e-12);
    }
}
