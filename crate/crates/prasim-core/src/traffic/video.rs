//! Scalable-video segment traces: one base layer plus five enhancement
//! layers per segment, with per-segment size jitter.
//!
//! The cited trace dataset is not redistributable, so a synthetic generator
//! produces layer sizes calibrated to a configurable full-quality streaming
//! rate (2 Mbit/s by default: base ≈ 800 kbit/s, each enhancement layer
//! ≈ 240 kbit/s). Traces can also be loaded from a delimited text file with
//! the same layer structure.

use std::io::{BufRead, Write};

use rand::Rng;

use crate::traffic::TrafficError;

pub const ENHANCEMENT_LAYERS: usize = 5;

/// Per-segment layer sizes in bits for one user's video.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoTrace {
    /// `layers[s][0]` is the base layer of segment `s`; `layers[s][1..=5]`
    /// the enhancement layers.
    pub layers: Vec<[f64; ENHANCEMENT_LAYERS + 1]>,
}

impl VideoTrace {
    pub fn n_segments(&self) -> usize {
        self.layers.len()
    }

    /// Size of segment `s` at quality `level` (base + first `level`
    /// enhancement layers).
    pub fn segment_bits(&self, s: usize, level: usize) -> f64 {
        assert!(level <= ENHANCEMENT_LAYERS, "quality level out of range");
        self.layers[s][..=level].iter().sum()
    }

    /// All segment sizes at a quality level.
    pub fn sizes_at(&self, level: usize) -> Vec<f64> {
        (0..self.n_segments()).map(|s| self.segment_bits(s, level)).collect()
    }
}

/// Generator parameters for synthetic traces.
#[derive(Debug, Clone, PartialEq)]
pub struct VideoGenerator {
    /// Base-layer rate at full segment duration (bit/s equivalent).
    pub base_rate_bps: f64,
    /// Rate of each enhancement layer (bit/s equivalent).
    pub enh_rate_bps: f64,
    /// Uniform per-layer jitter half-width as a fraction (0.2 = ±20 %).
    pub jitter: f64,
    /// Segment duration in seconds (equals the frame duration).
    pub segment_s: f64,
}

impl VideoGenerator {
    pub fn generate<R: Rng>(&self, n_segments: usize, rng: &mut R) -> VideoTrace {
        let mut layers = Vec::with_capacity(n_segments);
        for _ in 0..n_segments {
            let mut seg = [0.0; ENHANCEMENT_LAYERS + 1];
            let j = |rng: &mut R| 1.0 + self.jitter * (2.0 * rng.gen::<f64>() - 1.0);
            seg[0] = self.base_rate_bps * self.segment_s * j(rng);
            for l in 1..=ENHANCEMENT_LAYERS {
                seg[l] = self.enh_rate_bps * self.segment_s * j(rng);
            }
            layers.push(seg);
        }
        VideoTrace { layers }
    }
}

/// Recompute a trace restricted to `level` enhancement layers: layers above
/// the level are zeroed so the segment sizes become base + first `level`
/// layers. Layer additivity below the level is untouched.
pub fn reduce_quality(trace: &VideoTrace, level: usize) -> VideoTrace {
    assert!(level <= ENHANCEMENT_LAYERS, "quality level out of range");
    let mut out = trace.clone();
    for seg in &mut out.layers {
        for l in level + 1..=ENHANCEMENT_LAYERS {
            seg[l] = 0.0;
        }
    }
    out
}

/// Write a trace as `segment_index<TAB>base_bits<TAB>enh1..enh5`.
pub fn export_video_trace<W: Write>(out: &mut W, trace: &VideoTrace) -> std::io::Result<()> {
    writeln!(out, "segment_index\tbase_bits\tenh1\tenh2\tenh3\tenh4\tenh5")?;
    for (s, layers) in trace.layers.iter().enumerate() {
        write!(out, "{s}")?;
        for v in layers {
            write!(out, "\t{v:.3}")?;
        }
        writeln!(out)?;
    }
    Ok(())
}

/// Read a trace written by [`export_video_trace`].
pub fn import_video_trace<R: BufRead>(input: R) -> Result<VideoTrace, TrafficError> {
    let mut layers = Vec::new();
    for (lineno, line) in input.lines().enumerate() {
        let line = line.map_err(|e| TrafficError::TraceFormat(format!("line {}: {e}", lineno + 1)))?;
        if lineno == 0 && line.starts_with("segment_index") {
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != ENHANCEMENT_LAYERS + 2 {
            return Err(TrafficError::TraceFormat(format!(
                "line {}: expected {} fields, got {}",
                lineno + 1,
                ENHANCEMENT_LAYERS + 2,
                fields.len()
            )));
        }
        let mut seg = [0.0; ENHANCEMENT_LAYERS + 1];
        for (k, f) in fields[1..].iter().enumerate() {
            seg[k] = f.parse().map_err(|_| {
                TrafficError::TraceFormat(format!("line {}: bad size '{f}'", lineno + 1))
            })?;
            if seg[k] < 0.0 {
                return Err(TrafficError::TraceFormat(format!(
                    "line {}: negative layer size",
                    lineno + 1
                )));
            }
        }
        layers.push(seg);
    }
    Ok(VideoTrace { layers })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn gen() -> VideoGenerator {
        VideoGenerator {
            base_rate_bps: 800e3,
            enh_rate_bps: 240e3,
            jitter: 0.2,
            segment_s: 1.0,
        }
    }

    #[test]
    fn full_quality_averages_near_two_megabit() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let t = gen().generate(4000, &mut rng);
        let mean: f64 = t.sizes_at(5).iter().sum::<f64>() / t.n_segments() as f64;
        assert!((mean / 2e6 - 1.0).abs() < 0.02, "mean rate {mean}");
    }

    #[test]
    fn sizes_strictly_increase_with_level() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = gen().generate(20, &mut rng);
        for s in 0..t.n_segments() {
            for l in 1..=ENHANCEMENT_LAYERS {
                assert!(t.segment_bits(s, l) > t.segment_bits(s, l - 1));
            }
        }
    }

    #[test]
    fn reduce_quality_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let t = gen().generate(10, &mut rng);
        assert_eq!(reduce_quality(&t, 5), t);
        let base_only = reduce_quality(&t, 0);
        for s in 0..10 {
            assert_eq!(base_only.segment_bits(s, 5), t.segment_bits(s, 0));
        }
        // Monotone in level, and additivity: R(L) - R(L-1) = layer L size.
        for l in 1..=5 {
            for s in 0..10 {
                let diff = t.segment_bits(s, l) - t.segment_bits(s, l - 1);
                assert!((diff - t.layers[s][l]).abs() < 1e-9);
                assert!(diff >= 0.0);
            }
        }
    }

    #[test]
    fn video_trace_file_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let t = gen().generate(6, &mut rng);
        let mut buf = Vec::new();
        export_video_trace(&mut buf, &t).unwrap();
        let r = import_video_trace(&buf[..]).unwrap();
        assert_eq!(r.n_segments(), 6);
        for s in 0..6 {
            assert!((r.segment_bits(s, 5) - t.segment_bits(s, 5)).abs() < 1e-2);
        }
    }
}
