//! Peak structure of the combined H+V HBT histogram. Around k·T (k ≥ 1) the
//! H-H and V-V pairs of periods k apart share the central peak, while the
//! outer peaks at k·T ∓ pair_delay each hold one H-V ordering: 1:2:1.
//!
//! Every peak is a product of per-slot singles, and routing noise in those
//! singles is shared by all peaks. Comparisons are therefore conditioned on
//! the measured singles instead of assuming independent Poisson areas.

use proptest::prelude::*;

use qdemux_core::experiment::{simulate, CH_OUT1, CH_OUT2};
use qdemux_core::units::seconds_to_ps;
use qdemux_core::{cross_correlate, CoincidenceHistogram, Experiment, HistogramGrid, Scenario, TimeTagStream};

struct Run {
    s: Scenario,
    h: CoincidenceHistogram,
    /// Singles of (out1, out2) in the (first, second) slot of each period.
    first: (f64, f64),
    second: (f64, f64),
}

/// Singles in the first and second pulse-pair slot. The slot boundary is
/// moved early by pair_delay/8 so jittered detections stay in their slot.
fn slot_singles(stream: &TimeTagStream, s: &Scenario) -> (f64, f64) {
    let rep = seconds_to_ps(s.sequence.rep_period);
    let pd = seconds_to_ps(s.sequence.pair_delay);
    let guard = pd / 8;
    let second = stream
        .tags
        .iter()
        .filter(|&&t| (pd..rep).contains(&((t + guard).rem_euclid(rep))))
        .count();
    ((stream.tags.len() - second) as f64, second as f64)
}

fn combined(seed: u64, n_periods: u64, reexcitation: f64) -> Run {
    let mut s = Scenario {
        experiment: Experiment::HbtCombined,
        seed,
        ..Default::default()
    };
    s.sequence.n_periods = n_periods;
    s.qd.reexcitation_prob = reexcitation;
    let out = simulate(&s).unwrap();
    let (a, b) = (out.channel(CH_OUT1).unwrap(), out.channel(CH_OUT2).unwrap());
    let grid = HistogramGrid::symmetric(50e-12, 30e-9).unwrap();
    let h = cross_correlate(a, b, &grid).unwrap();
    let (a1, a2) = slot_singles(a, &s);
    let (b1, b2) = slot_singles(b, &s);
    Run {
        s,
        h,
        first: (a1, b1),
        second: (a2, b2),
    }
}

impl Run {
    fn area(&self, centre: f64) -> f64 {
        self.h.area(centre, self.s.analysis.window).unwrap() as f64
    }

    /// Expected share of the k·T − pair_delay peak among the two outer peaks:
    /// out1 second slot with out2 first slot, against the reverse ordering.
    fn early_share(&self) -> f64 {
        let early = self.second.0 * self.first.1;
        let late = self.first.0 * self.second.1;
        early / (early + late)
    }

    /// Expected central-to-outer ratio, 1 for balanced slots.
    fn centre_ratio(&self) -> f64 {
        let same = self.first.0 * self.first.1 + self.second.0 * self.second.1;
        let cross = self.second.0 * self.first.1 + self.first.0 * self.second.1;
        same / cross
    }
}

/// `x` out of `n` within `k` binomial standard deviations of share `p`.
fn binomial_close(x: f64, n: f64, p: f64, k: f64) -> bool {
    (x - p * n).abs() <= k * (n * p * (1.0 - p)).sqrt()
}

/// `a` within `k` standard deviations of `e·b`, both Poisson.
fn ratio_close(a: f64, b: f64, e: f64, k: f64) -> bool {
    (a - e * b).abs() <= k * (a + e * e * b).sqrt()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn triplets_are_one_two_one(seed in any::<u64>(), reexcitation in 0.0f64..0.03) {
        let r = combined(seed, 100_000, reexcitation);
        let (t, d) = (r.s.sequence.rep_period, r.s.sequence.pair_delay);
        let (p, e) = (r.early_share(), r.centre_ratio());
        prop_assert!((p - 0.5).abs() < 0.02 && (e - 1.0).abs() < 0.05, "p={p} e={e}");
        for k in [1.0, 2.0] {
            for sign in [-1.0, 1.0] {
                let centre = sign * k * t;
                let (lo, mid, hi) = (r.area(centre - d), r.area(centre), r.area(centre + d));
                prop_assert!(binomial_close(lo, lo + hi, p, 4.0), "k={k}: {lo} vs {hi}, p={p}");
                prop_assert!(ratio_close(mid, lo + hi, e, 4.0), "k={k}: {mid} vs {lo} + {hi}, e={e}");
            }
        }
    }

    #[test]
    fn zero_delay_holds_two_peaks(seed in any::<u64>()) {
        let r = combined(seed, 100_000, 0.0);
        let (t, d) = (r.s.sequence.rep_period, r.s.sequence.pair_delay);
        let (zero, minus, plus) = (r.area(0.0), r.area(-d), r.area(d));
        prop_assert!(zero < 0.05 * minus.min(plus));
        prop_assert!(binomial_close(minus, minus + plus, r.early_share(), 4.0));
        // Each ±pair_delay peak is one H-V ordering, as large as a triplet side.
        let side = r.area(t + d);
        prop_assert!(ratio_close(plus, side, 1.0, 4.0), "{plus} vs {side}");
    }
}
