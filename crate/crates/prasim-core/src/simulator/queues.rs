//! Queueing state: the VoD playout buffer with stall tracking and the
//! per-user FIFO at the BS with exact per-bit delay accounting.

use std::collections::VecDeque;

use crate::traffic::VideoTrace;

/// Playout buffer of one VoD user over a window of `n_segments` segments
/// (the window's frames plus the first segment of the next window).
///
/// Segment 1 is pre-delivered before the window starts; delivery during the
/// window fills segments 2.. in order. Playback consumes one segment per
/// frame and pauses (a stall) whenever the segment due next is incomplete.
#[derive(Debug, Clone)]
pub struct VoDQueue {
    /// Target size per segment (1-based; index s-1) at its locked level.
    seg_bits: Vec<f64>,
    /// Whether the segment's quality level is locked (scheduled or played).
    locked: Vec<bool>,
    level: Vec<usize>,
    /// Cumulative bits delivered this window (segments 2..).
    delivered: f64,
    /// Playback position: segment being played (1-based) and progress (s).
    play_seg: usize,
    play_progress_s: f64,
    frame_s: f64,
    pub q_max_bits: Option<f64>,
    pub stalls: u64,
    pub stall_time_s: f64,
    /// Set while playback is blocked waiting for the current `play_seg`.
    stalled: bool,
}

impl VoDQueue {
    /// Build a queue from a video trace, locking every segment at
    /// `base_level`. Per-frame policies may re-lock future segments at lower
    /// levels before any of their bits are delivered.
    pub fn new(video: &VideoTrace, base_level: usize, frame_s: f64, q_max_bits: Option<f64>) -> Self {
        let n = video.n_segments();
        let seg_bits = (0..n).map(|s| video.segment_bits(s, base_level)).collect();
        Self {
            seg_bits,
            locked: {
                let mut l = vec![false; n];
                if n > 0 {
                    l[0] = true;
                }
                l
            },
            level: vec![base_level; n],
            delivered: 0.0,
            play_seg: 1,
            play_progress_s: 0.0,
            frame_s,
            q_max_bits,
            stalls: 0,
            stall_time_s: 0.0,
            stalled: false,
        }
    }

    pub fn n_segments(&self) -> usize {
        self.seg_bits.len()
    }

    pub fn delivered_bits(&self) -> f64 {
        self.delivered
    }

    pub fn segment_target_bits(&self, seg: usize) -> Option<f64> {
        self.seg_bits.get(seg - 1).copied()
    }

    pub fn segment_level(&self, seg: usize) -> Option<usize> {
        self.level.get(seg - 1).copied()
    }

    pub fn is_locked(&self, seg: usize) -> bool {
        self.locked.get(seg - 1).copied().unwrap_or(false)
    }

    /// Cumulative delivery target for segments 2..=seg.
    fn cum_target(&self, seg: usize) -> f64 {
        self.seg_bits.iter().take(seg).skip(1).sum()
    }

    /// Total bits deliverable this window (segments 2..).
    pub fn total_target(&self) -> f64 {
        self.cum_target(self.n_segments())
    }

    /// Last fully delivered segment (>= 1, since segment 1 is pre-delivered).
    pub fn last_complete_segment(&self) -> usize {
        let mut cum = 0.0;
        let mut last = 1;
        for s in 2..=self.n_segments() {
            cum += self.seg_bits[s - 1];
            if self.delivered + 1e-9 >= cum {
                last = s;
            } else {
                break;
            }
        }
        last
    }

    /// Undelivered bits of a segment at its current (locked or provisional)
    /// target.
    pub fn remaining_bits(&self, seg: usize) -> f64 {
        if seg < 2 || seg > self.n_segments() {
            return 0.0;
        }
        let before = self.cum_target(seg - 1);
        let target = self.seg_bits[seg - 1];
        (before + target - self.delivered).clamp(0.0, target)
    }

    /// Lock a not-yet-started segment at a quality level, re-sizing its
    /// target. Locked or partially delivered segments keep their level.
    pub fn lock_level(&mut self, video: &VideoTrace, seg: usize, level: usize) {
        if seg < 1 || seg > self.n_segments() || self.locked[seg - 1] {
            return;
        }
        if self.delivered > self.cum_target(seg - 1) + 1e-9 {
            // Bits already flowed into this segment; keep its size.
            self.locked[seg - 1] = true;
            return;
        }
        self.seg_bits[seg - 1] = video.segment_bits(seg - 1, level);
        self.level[seg - 1] = level;
        self.locked[seg - 1] = true;
    }

    /// Buffer occupancy: delivered-but-unplayed bits (segment 1 included).
    pub fn buffer_bits(&self) -> f64 {
        let played = self.played_bits();
        (self.seg_bits[0] + self.delivered - played).max(0.0)
    }

    fn played_bits(&self) -> f64 {
        let mut full: f64 = self.seg_bits.iter().take(self.play_seg - 1).sum();
        if self.play_seg <= self.n_segments() {
            full += self.seg_bits[self.play_seg - 1] * (self.play_progress_s / self.frame_s);
        }
        full
    }

    /// Bits the sender may push this instant, honoring the delivery ceiling
    /// (never beyond segment `cap_seg`) and the buffer bound when present.
    pub fn deliverable_now(&self, cap_seg: usize) -> f64 {
        let cap = self.cum_target(cap_seg.min(self.n_segments()));
        let mut room = (cap - self.delivered).max(0.0);
        if let Some(q_max) = self.q_max_bits {
            room = room.min((q_max - self.buffer_bits()).max(0.0));
        }
        room
    }

    /// Push delivered bits (already clamped by `deliverable_now`).
    pub fn deliver(&mut self, bits: f64) {
        self.delivered += bits;
    }

    /// Advance playback by one slot. While stalled, playback waits for the
    /// current segment to complete and stall time accrues.
    pub fn advance_playback(&mut self, slot_s: f64) {
        if self.play_seg > self.n_segments() {
            return;
        }
        if self.stalled {
            if self.segment_complete(self.play_seg) {
                self.stalled = false;
            } else {
                self.stall_time_s += slot_s;
                return;
            }
        }
        self.play_progress_s += slot_s;
        if self.play_progress_s >= self.frame_s - 1e-9 {
            self.play_progress_s = 0.0;
            self.play_seg += 1;
            if self.play_seg <= self.n_segments() && !self.segment_complete(self.play_seg) {
                self.stalls += 1;
                self.stalled = true;
            }
        }
    }

    pub fn segment_complete(&self, seg: usize) -> bool {
        seg <= 1 || self.delivered + 1e-9 >= self.cum_target(seg)
    }

    pub fn is_stalled(&self) -> bool {
        self.stalled
    }

    /// Mean delivered quality level over the window's segments (2..), using
    /// each segment's locked level.
    pub fn mean_level(&self) -> f64 {
        if self.n_segments() < 2 {
            return 0.0;
        }
        let sum: usize = self.level.iter().skip(1).sum();
        sum as f64 / (self.n_segments() - 1) as f64
    }
}

#[derive(Debug, Clone, Copy)]
struct Packet {
    arrival_s: f64,
    remaining_bits: f64,
}

/// FIFO queue of one RT user at the BS, served as a fluid within packets.
///
/// Delay is tracked per bit exactly: a packet chunk served at constant rate
/// from `t0` has bit `x` departing at `t0 + x/rate`, so the bits violating
/// the delay bound inside each chunk follow in closed form.
#[derive(Debug, Clone, Default)]
pub struct RTQueue {
    fifo: VecDeque<Packet>,
    pub arrived_bits: f64,
    pub departed_bits: f64,
    pub violating_bits: f64,
    pub backlog_bits: f64,
}

impl RTQueue {
    pub fn new() -> Self {
        Self::default()
    }

    /// Enqueue packets arriving within a slot (absolute arrival times).
    pub fn push_arrivals(&mut self, packets: &[(f64, f64)]) {
        for &(arrival_s, bits) in packets {
            self.fifo.push_back(Packet {
                arrival_s,
                remaining_bits: bits,
            });
            self.arrived_bits += bits;
            self.backlog_bits += bits;
        }
    }

    /// Serve the queue at `rate_bps` over `[slot_start, slot_start+slot_s)`.
    ///
    /// Returns `(served_bits, busy_s)`; `busy_s` is the time actually spent
    /// transmitting (the BS is silent while the queue is empty).
    pub fn serve(&mut self, rate_bps: f64, slot_start_s: f64, slot_s: f64, d_max_s: f64) -> (f64, f64) {
        if rate_bps <= 0.0 {
            return (0.0, 0.0);
        }
        let slot_end = slot_start_s + slot_s;
        let mut t = slot_start_s;
        let mut served = 0.0;
        let mut busy = 0.0;
        while let Some(head) = self.fifo.front_mut() {
            // Packets cannot be served before they arrive.
            let start = t.max(head.arrival_s);
            if start >= slot_end {
                break;
            }
            let max_time = slot_end - start;
            let need_time = head.remaining_bits / rate_bps;
            let dt = need_time.min(max_time);
            let chunk = rate_bps * dt;

            // Bits of this chunk with delay > d_max: bit x departs at
            // start + x/rate, so x > rate·(d_max + arrival - start) violates.
            let x_ok = rate_bps * (d_max_s + head.arrival_s - start);
            let violating = (chunk - x_ok.max(0.0)).clamp(0.0, chunk);
            self.violating_bits += violating;

            head.remaining_bits -= chunk;
            served += chunk;
            busy += dt;
            t = start + dt;
            if head.remaining_bits <= 1e-9 {
                self.fifo.pop_front();
            } else {
                break; // slot exhausted mid-packet
            }
            if t >= slot_end - 1e-15 {
                break;
            }
        }
        self.departed_bits += served;
        self.backlog_bits -= served;
        (served, busy)
    }

    pub fn violation_fraction(&self) -> f64 {
        if self.departed_bits <= 0.0 {
            0.0
        } else {
            self.violating_bits / self.departed_bits
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::VideoGenerator;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn video(n: usize) -> VideoTrace {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        VideoGenerator {
            base_rate_bps: 800e3,
            enh_rate_bps: 240e3,
            jitter: 0.0,
            segment_s: 1.0,
        }
        .generate(n, &mut rng)
    }

    #[test]
    fn vod_queue_tracks_completion_and_buffer() {
        let v = video(5);
        let mut q = VoDQueue::new(&v, 5, 1.0, None);
        assert_eq!(q.last_complete_segment(), 1);
        let seg2 = q.segment_target_bits(2).unwrap();
        q.deliver(seg2);
        assert_eq!(q.last_complete_segment(), 2);
        assert!((q.buffer_bits() - (v.segment_bits(0, 5) + seg2)).abs() < 1e-6);
        assert!((q.remaining_bits(3) - q.segment_target_bits(3).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn playback_without_delivery_stalls_at_second_boundary() {
        let v = video(4);
        let mut q = VoDQueue::new(&v, 5, 1.0, None);
        // Play a whole frame (segment 1 is pre-delivered)…
        for _ in 0..200 {
            q.advance_playback(0.005);
        }
        // …then segment 2 is missing.
        assert_eq!(q.stalls, 1);
        assert!(q.is_stalled());
        for _ in 0..100 {
            q.advance_playback(0.005);
        }
        assert!((q.stall_time_s - 0.5).abs() < 0.011, "stall time {}", q.stall_time_s);
        // Delivery of segment 2 releases playback.
        q.deliver(q.segment_target_bits(2).unwrap());
        q.advance_playback(0.005);
        assert!(!q.is_stalled());
    }

    #[test]
    fn steady_delivery_never_stalls() {
        let v = video(6);
        let mut q = VoDQueue::new(&v, 5, 1.0, None);
        let total = q.total_target();
        let per_slot = total / (5.0 * 200.0);
        for _ in 0..5 * 200 {
            let d = q.deliverable_now(6).min(per_slot * 1.2);
            q.deliver(d);
            q.advance_playback(0.005);
        }
        assert_eq!(q.stalls, 0);
        assert!((q.delivered_bits() - total).abs() < 1.0);
    }

    #[test]
    fn buffer_cap_limits_delivery() {
        let v = video(8);
        let q_max = v.segment_bits(0, 5) * 1.5;
        let q = VoDQueue::new(&v, 5, 1.0, Some(q_max));
        // Segment 1 sits in the buffer; only half a segment of room remains.
        let room = q.deliverable_now(8);
        assert!(room <= q_max - v.segment_bits(0, 5) + 1e-6);
    }

    #[test]
    fn lock_level_resizes_future_segments_only() {
        let v = video(4);
        let mut q = VoDQueue::new(&v, 5, 1.0, None);
        let full = q.segment_target_bits(3).unwrap();
        q.lock_level(&v, 3, 0);
        let reduced = q.segment_target_bits(3).unwrap();
        assert!(reduced < full);
        assert_eq!(q.segment_level(3), Some(0));
        // Partially delivered segments keep their size.
        q.deliver(q.segment_target_bits(2).unwrap() * 0.5);
        q.lock_level(&v, 2, 0);
        assert_eq!(q.segment_level(2), Some(5));
    }

    #[test]
    fn rt_queue_conserves_bits() {
        let mut q = RTQueue::new();
        q.push_arrivals(&[(0.001, 4000.0), (0.002, 2000.0)]);
        let (served, busy) = q.serve(1e6, 0.0, 0.005, 0.05);
        assert!(served <= 6000.0 + 1e-9);
        assert!(busy > 0.0 && busy <= 0.005);
        let delta = q.arrived_bits - q.departed_bits;
        assert!((delta - q.backlog_bits).abs() < 1e-9, "conservation broke");
    }

    #[test]
    fn rt_delay_violation_detected_exactly() {
        let mut q = RTQueue::new();
        // One packet at t = 0; serving starts at t = 0.1 at 1e5 b/s.
        q.push_arrivals(&[(0.0, 1000.0)]);
        let (_, _) = q.serve(0.0, 0.0, 0.1, 0.05); // no service for 100 ms
        let (served, _) = q.serve(1e5, 0.1, 1.0, 0.05);
        assert!((served - 1000.0).abs() < 1e-9);
        // Every bit departed later than 100 ms > 50 ms after arrival.
        assert!((q.violating_bits - 1000.0).abs() < 1e-9);
        // A fresh packet served immediately violates nothing.
        let mut q2 = RTQueue::new();
        q2.push_arrivals(&[(5.0, 1000.0)]);
        q2.serve(1e6, 5.0, 0.005, 0.05);
        assert_eq!(q2.violating_bits, 0.0);
    }

    #[test]
    fn rt_partial_violation_splits_within_packet() {
        let mut q = RTQueue::new();
        // 1000 bits at t = 0, rate 1e4 b/s -> service spans 0.1 s.
        // Bits after x* = 1e4·0.05 = 500 violate the 50 ms bound.
        q.push_arrivals(&[(0.0, 1000.0)]);
        let (served, busy) = q.serve(1e4, 0.0, 0.2, 0.05);
        assert!((served - 1000.0).abs() < 1e-9);
        assert!((busy - 0.1).abs() < 1e-9);
        assert!((q.violating_bits - 500.0).abs() < 1e-6, "violating {}", q.violating_bits);
    }

    #[test]
    fn rt_server_waits_for_mid_slot_arrival() {
        let mut q = RTQueue::new();
        q.push_arrivals(&[(0.003, 1000.0)]);
        let (served, busy) = q.serve(1e6, 0.0, 0.005, 0.05);
        assert!((served - 1000.0).abs() < 1e-9);
        // Service could only start at 3 ms.
        assert!((busy - 0.001).abs() < 1e-6, "busy {busy}");
    }
}
