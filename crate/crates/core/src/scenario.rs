//! Seed-deterministic synthetic behavioral streams: labeled landmark frames
//! with blinks, long eye closures, yawns, nod bursts, and the distractors
//! (talking, smiling) that make classification non-trivial.
//!
//! Fatigue arrives in bouts: stretches where long closures, yawns, and nod
//! bursts chain with short gaps, separated by normal driving with ordinary
//! blinks and occasional distractors. Frames covered by a fatigue event are
//! labeled fatigue; everything else, including distractor frames, is normal.
//! Windows that straddle bout edges land near the labeling threshold, which
//! is what makes the downstream classification task interesting.
//!
//! Rendering deforms one canonical 68-point face (interocular distance
//! 100 px): blinks and closures collapse the eye-contour gaps, yawns open
//! the inner mouth, nods swing pitch through negative dips, talking adds a
//! small fast mouth oscillation, smiling widens the mouth without opening
//! it. Gaussian landmark jitter keeps feature thresholds honest without
//! flipping template states.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::feature::{build_feature_vector, LandmarkFrame};
use crate::fmath;
use crate::window::{slide_dataset, SequenceSample};
use crate::{Label, Landmarks, Point, PoseAngles};

const PI: f64 = core::f64::consts::PI;

/// Inner-mouth width of the neutral template in pixels.
const MOUTH_WIDTH: f64 = 40.0;

/// Neutral inner-lip gap: mouth opening degree 0.05.
const NEUTRAL_GAP: f64 = 0.05 * MOUTH_WIDTH;

/// Half of the open-eye vertical contour gap (EAR 0.3 on a 35 px eye).
const EYE_HALF_GAP: f64 = 5.25;

/// Generator knobs. Durations are seconds, rates are events per minute,
/// ranges are sampled uniformly.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub duration_s: f64,
    pub fps: u32,
    /// Target fraction of fatigue-labeled time. The default lands the
    /// windowed class balance near 1 fatigue : 3 normal.
    pub fatigue_prior: f64,
    pub seed: u64,
    pub blink_rate_alert_per_min: f64,
    pub blink_rate_fatigued_per_min: f64,
    pub blink_duration_s: (f64, f64),
    /// Blink duration near fatigue bouts: drowsy blinks linger, which makes
    /// them easy to confuse with short closures at coarse skip intervals.
    pub drowsy_blink_duration_s: (f64, f64),
    /// How far around a fatigue bout the drowsy blink behavior extends.
    pub drowsy_blink_margin_s: f64,
    /// Probability that a drowsy blink becomes an eyelid flutter: a burst
    /// of rapid half-closed blinks that coarse subsampling misreads as a
    /// sustained closure.
    pub flutter_prob: f64,
    pub closure_duration_s: (f64, f64),
    pub yawn_duration_s: (f64, f64),
    /// Mouth opening degree reached at the yawn peak.
    pub yawn_peak_degree: (f64, f64),
    pub nod_amplitude_deg: f64,
    pub nod_period_s: f64,
    /// Oscillations per nod burst; bursts shorter than this are not
    /// generated because single dips do not count as fatigue.
    pub nod_min_cycles: u32,
    /// Length of a fatigue bout (chained events with short gaps).
    pub bout_duration_s: (f64, f64),
    /// Gap between consecutive events inside a bout.
    pub bout_gap_s: (f64, f64),
    /// Fraction of fatigue episodes that are one isolated event instead of
    /// a full bout.
    pub isolated_bout_prob: f64,
    pub talk_rate_per_min: f64,
    pub talk_duration_s: (f64, f64),
    pub talk_peak_degree: (f64, f64),
    pub smile_rate_per_min: f64,
    pub smile_duration_s: (f64, f64),
    pub jitter_px: f64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            duration_s: 600.0,
            fps: 30,
            fatigue_prior: 0.33,
            seed: 0,
            blink_rate_alert_per_min: 8.0,
            blink_rate_fatigued_per_min: 34.0,
            blink_duration_s: (0.1, 0.24),
            drowsy_blink_duration_s: (0.2, 0.32),
            drowsy_blink_margin_s: 12.0,
            flutter_prob: 0.45,
            closure_duration_s: (0.9, 3.0),
            yawn_duration_s: (3.0, 5.0),
            yawn_peak_degree: (0.65, 0.85),
            nod_amplitude_deg: 25.0,
            nod_period_s: 1.4,
            nod_min_cycles: 3,
            bout_duration_s: (8.0, 25.0),
            bout_gap_s: (0.15, 0.95),
            isolated_bout_prob: 0.25,
            talk_rate_per_min: 1.2,
            talk_duration_s: (1.5, 4.0),
            talk_peak_degree: (0.10, 0.25),
            smile_rate_per_min: 0.8,
            smile_duration_s: (1.0, 3.0),
            jitter_px: 0.5,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        let op = "scenario_config";
        if !(self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::InvalidValue {
                op,
                what: "duration_s",
                value: self.duration_s,
            });
        }
        if self.fps == 0 {
            return Err(Error::InvalidValue {
                op,
                what: "fps",
                value: 0.0,
            });
        }
        if !(0.0..1.0).contains(&self.fatigue_prior) {
            return Err(Error::InvalidValue {
                op,
                what: "fatigue_prior",
                value: self.fatigue_prior,
            });
        }
        for (what, r) in [
            ("blink_duration_s", self.blink_duration_s),
            ("drowsy_blink_duration_s", self.drowsy_blink_duration_s),
            ("closure_duration_s", self.closure_duration_s),
            ("yawn_duration_s", self.yawn_duration_s),
            ("yawn_peak_degree", self.yawn_peak_degree),
            ("bout_duration_s", self.bout_duration_s),
            ("bout_gap_s", self.bout_gap_s),
            ("talk_duration_s", self.talk_duration_s),
            ("talk_peak_degree", self.talk_peak_degree),
            ("smile_duration_s", self.smile_duration_s),
        ] {
            if !(r.0.is_finite() && r.1.is_finite() && r.0 >= 0.0 && r.0 <= r.1) {
                return Err(Error::InvalidValue {
                    op,
                    what,
                    value: r.0,
                });
            }
        }
        for (what, v) in [
            ("blink_rate_alert_per_min", self.blink_rate_alert_per_min),
            (
                "blink_rate_fatigued_per_min",
                self.blink_rate_fatigued_per_min,
            ),
            ("talk_rate_per_min", self.talk_rate_per_min),
            ("smile_rate_per_min", self.smile_rate_per_min),
            ("nod_amplitude_deg", self.nod_amplitude_deg),
            ("nod_period_s", self.nod_period_s),
            ("jitter_px", self.jitter_px),
            ("drowsy_blink_margin_s", self.drowsy_blink_margin_s),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidValue { op, what, value: v });
            }
        }
        if self.nod_min_cycles < 3 {
            // a burst needs at least three oscillations to count as fatigue
            return Err(Error::InvalidValue {
                op,
                what: "nod_min_cycles",
                value: self.nod_min_cycles as f64,
            });
        }
        if self.nod_min_cycles as f64 * self.nod_period_s > 5.0 {
            return Err(Error::InvalidValue {
                op,
                what: "nod burst length (cycles * period must fit in 5 s)",
                value: self.nod_min_cycles as f64 * self.nod_period_s,
            });
        }
        if !(0.0..=1.0).contains(&self.isolated_bout_prob) {
            return Err(Error::InvalidValue {
                op,
                what: "isolated_bout_prob",
                value: self.isolated_bout_prob,
            });
        }
        if !(0.0..=1.0).contains(&self.flutter_prob) {
            return Err(Error::InvalidValue {
                op,
                what: "flutter_prob",
                value: self.flutter_prob,
            });
        }
        Ok(())
    }

    pub fn total_frames(&self) -> usize {
        fmath::round(self.duration_s * self.fps as f64) as usize
    }
}

/// Behavioral event kinds. Long closures, yawns, and nod bursts are fatigue;
/// blinks, talking, and smiling are normal behavior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Blink,
    LongClosure,
    Yawn,
    Nod,
    Talk,
    Smile,
}

impl EventKind {
    pub fn is_fatigue(self) -> bool {
        matches!(self, EventKind::LongClosure | EventKind::Yawn | EventKind::Nod)
    }
}

/// One timed event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    pub kind: EventKind,
    pub start_s: f64,
    pub duration_s: f64,
}

impl Event {
    pub fn end_s(&self) -> f64 {
        self.start_s + self.duration_s
    }

    fn contains(&self, t: f64) -> bool {
        t >= self.start_s && t < self.end_s()
    }
}

/// Ordered events plus the per-frame label track they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct EventTimeline {
    pub duration_s: f64,
    pub fps: u32,
    pub events: Vec<Event>,
    pub labels: Vec<Label>,
}

impl EventTimeline {
    /// Events of one kind, in temporal order.
    pub fn events_of(&self, kind: EventKind) -> impl Iterator<Item = &Event> {
        self.events.iter().filter(move |e| e.kind == kind)
    }

    /// True when the frame midpoint at `t` lies inside an event of `kind`.
    pub fn active_at(&self, kind: EventKind, t: f64) -> bool {
        self.events
            .iter()
            .any(|e| e.kind == kind && e.contains(t))
    }
}

fn uniform_in<R: Rng>(rng: &mut R, range: (f64, f64)) -> f64 {
    if range.0 == range.1 {
        range.0
    } else {
        rng.random_range(range.0..range.1)
    }
}

/// Exponential inter-arrival gap for a per-minute rate, floored to keep
/// same-kind events separated.
fn arrival_gap<R: Rng>(rng: &mut R, rate_per_min: f64, floor_s: f64) -> f64 {
    let mean_s = 60.0 / rate_per_min;
    let u: f64 = rng.random();
    (-fmath::ln(1.0 - u) * mean_s).max(floor_s)
}

/// Builds the stochastic but seed-deterministic event timeline: fatigue
/// bouts paced to hit the configured prior, blinks at state-dependent rates,
/// and distractors in the normal stretches.
pub fn generate_timeline(config: &ScenarioConfig) -> Result<EventTimeline> {
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed);
    let d = config.duration_s;
    let mut events: Vec<Event> = Vec::new();
    // spans of fatigue episodes (bout or isolated event), used to pace
    // blinks and to keep distractors in normal time
    let mut fatigue_spans: Vec<(f64, f64)> = Vec::new();

    if config.fatigue_prior > 0.0 {
        let mean = |r: (f64, f64)| 0.5 * (r.0 + r.1);
        let nod_len = config.nod_min_cycles as f64 * config.nod_period_s;
        // eye closures carry most of the fatigue signal; yawns and nod
        // bursts are rarer
        let mean_event = (4.0 * mean(config.closure_duration_s)
            + mean(config.yawn_duration_s)
            + nod_len)
            / 6.0;
        let in_bout_coverage = mean_event / (mean_event + mean(config.bout_gap_s));
        let mean_bout = mean(config.bout_duration_s);
        let p_iso = config.isolated_bout_prob;
        let span_mean = (1.0 - p_iso) * mean_bout + p_iso * mean_event;
        let labeled_mean = (1.0 - p_iso) * mean_bout * in_bout_coverage + p_iso * mean_event;
        let gap_mean = (labeled_mean / config.fatigue_prior - span_mean).max(2.0);

        let mut t = rng.random_range(0.2 * gap_mean..gap_mean);
        while t < d {
            let isolated = rng.random::<f64>() < p_iso;
            let bout_end = if isolated {
                t
            } else {
                t + uniform_in(&mut rng, config.bout_duration_s)
            };
            let span_start = t;
            let mut cursor = t;
            loop {
                let (kind, dur) = match rng.random_range(0..6u32) {
                    0..=3 => (
                        EventKind::LongClosure,
                        uniform_in(&mut rng, config.closure_duration_s),
                    ),
                    4 => (EventKind::Yawn, uniform_in(&mut rng, config.yawn_duration_s)),
                    _ => {
                        // period jitter, burst kept within five seconds
                        let max_period = 5.0 / config.nod_min_cycles as f64;
                        let period = (config.nod_period_s * rng.random_range(0.88..1.12))
                            .min(max_period);
                        (EventKind::Nod, config.nod_min_cycles as f64 * period)
                    }
                };
                if cursor + dur > d {
                    break;
                }
                events.push(Event {
                    kind,
                    start_s: cursor,
                    duration_s: dur,
                });
                cursor += dur;
                if isolated || cursor >= bout_end {
                    break;
                }
                cursor += uniform_in(&mut rng, config.bout_gap_s);
                if cursor >= bout_end {
                    break;
                }
            }
            if cursor > span_start {
                fatigue_spans.push((span_start, cursor));
            }
            t = cursor.max(span_start + 0.1) + rng.random_range(0.4 * gap_mean..1.6 * gap_mean);
        }
    }

    // blinks run over the whole stream; the rate climbs toward each fatigue
    // bout, peaks inside it, and relaxes afterwards
    if config.blink_rate_alert_per_min > 0.0 || config.blink_rate_fatigued_per_min > 0.0 {
        let margin = config.drowsy_blink_margin_s.max(1e-9);
        let drowsiness = |t: f64, spans: &[(f64, f64)]| -> f64 {
            let mut level: f64 = 0.0;
            for (a, b) in spans {
                let x = if t < *a {
                    1.0 - (a - t) / margin
                } else if t <= *b {
                    1.0
                } else {
                    1.0 - (t - b) / (0.6 * margin)
                };
                level = level.max(x);
            }
            level.clamp(0.0, 1.0)
        };
        let mut t = rng.random_range(0.2..3.0);
        loop {
            let level = drowsiness(t, &fatigue_spans);
            let rate = config.blink_rate_alert_per_min
                + (config.blink_rate_fatigued_per_min - config.blink_rate_alert_per_min)
                    * level;
            if rate <= 0.0 {
                t += 1.0;
                if t >= d {
                    break;
                }
                continue;
            }
            let drowsy = level > 0.6;
            if drowsy && rng.random::<f64>() < config.flutter_prob {
                // eyelid flutter: a run of rapid half-closed blinks
                let cycles = rng.random_range(3..=6u32);
                for _ in 0..cycles {
                    let dur = uniform_in(&mut rng, config.drowsy_blink_duration_s);
                    if t + dur >= d {
                        break;
                    }
                    events.push(Event {
                        kind: EventKind::Blink,
                        start_s: t,
                        duration_s: dur,
                    });
                    t += dur + rng.random_range(0.1..0.16);
                }
                t += arrival_gap(&mut rng, rate, 0.45);
                if t >= d {
                    break;
                }
                continue;
            }
            let dur = uniform_in(
                &mut rng,
                if drowsy {
                    config.drowsy_blink_duration_s
                } else {
                    config.blink_duration_s
                },
            );
            if t + dur >= d {
                break;
            }
            events.push(Event {
                kind: EventKind::Blink,
                start_s: t,
                duration_s: dur,
            });
            t += dur + arrival_gap(&mut rng, rate, 0.45);
        }
    }

    // distractors stay in normal stretches; frames under them are normal by
    // construction either way
    place_distractors(
        EventKind::Talk,
        config.talk_rate_per_min,
        config.talk_duration_s,
        d,
        &fatigue_spans,
        &mut rng,
        &mut events,
    );
    place_distractors(
        EventKind::Smile,
        config.smile_rate_per_min,
        config.smile_duration_s,
        d,
        &fatigue_spans,
        &mut rng,
        &mut events,
    );

    events.sort_by(|a, b| {
        a.start_s
            .partial_cmp(&b.start_s)
            .unwrap()
            .then_with(|| (a.kind as u8).cmp(&(b.kind as u8)))
    });

    // label track: a frame is fatigue when its midpoint falls inside a
    // fatigue event
    let total_frames = config.total_frames();
    let fps = config.fps as f64;
    let mut labels = vec![Label::Normal; total_frames];
    for e in events.iter().filter(|e| e.kind.is_fatigue()) {
        let first = (e.start_s * fps - 0.5).max(0.0) as usize;
        let last = ((e.end_s() * fps + 0.5) as usize).min(total_frames);
        for (i, label) in labels.iter_mut().enumerate().take(last).skip(first) {
            let midpoint = (i as f64 + 0.5) / fps;
            if e.contains(midpoint) {
                *label = Label::Fatigue;
            }
        }
    }

    Ok(EventTimeline {
        duration_s: d,
        fps: config.fps,
        events,
        labels,
    })
}

#[allow(clippy::too_many_arguments)]
fn place_distractors<R: Rng>(
    kind: EventKind,
    rate_per_min: f64,
    duration_range: (f64, f64),
    total_s: f64,
    avoid: &[(f64, f64)],
    rng: &mut R,
    events: &mut Vec<Event>,
) {
    if rate_per_min <= 0.0 {
        return;
    }
    let mut t = arrival_gap(rng, rate_per_min, 1.0);
    loop {
        let dur = uniform_in(rng, duration_range);
        if t + dur >= total_s {
            break;
        }
        if let Some((_, end)) = avoid
            .iter()
            .find(|(a, b)| t < b + 0.3 && t + dur > a - 0.3)
        {
            t = end + 0.5;
            continue;
        }
        events.push(Event {
            kind,
            start_s: t,
            duration_s: dur,
        });
        t += dur + arrival_gap(rng, rate_per_min, 1.0);
    }
}

/// The canonical neutral 68-point face: interocular distance 100 px, eye
/// aspect ratio 0.3, mouth opening degree 0.05.
pub fn neutral_face() -> Landmarks {
    let mut p = [Point::new(0.0, 0.0); crate::NUM_LANDMARKS];
    // jaw 0..=16
    for (i, pt) in p.iter_mut().enumerate().take(17) {
        let phi = PI * i as f64 / 16.0;
        *pt = Point::new(320.0 - 75.0 * fmath::cos(phi), 230.0 + 135.0 * fmath::sin(phi));
    }
    // brows 17..=26
    let brow_arc = [0.0, 3.0, 4.0, 3.0, 0.0];
    for i in 0..5 {
        p[17 + i] = Point::new(262.0 + 10.0 * i as f64, 200.0 - brow_arc[i]);
        p[22 + i] = Point::new(338.0 + 10.0 * i as f64, 200.0 - brow_arc[i]);
    }
    // nose bridge 27..=30 and nostril line 31..=35
    for i in 0..4 {
        p[27 + i] = Point::new(320.0, 225.0 + 15.0 * i as f64);
    }
    for i in 0..5 {
        p[31 + i] = Point::new(304.0 + 8.0 * i as f64, 278.0);
    }
    // eyes: 35 px wide, half-gap 5.25 -> EAR (10.5 + 10.5) / 70 = 0.3
    p[36] = Point::new(270.0, 220.0);
    p[37] = Point::new(280.5, 220.0 - EYE_HALF_GAP);
    p[38] = Point::new(294.5, 220.0 - EYE_HALF_GAP);
    p[39] = Point::new(305.0, 220.0);
    p[40] = Point::new(294.5, 220.0 + EYE_HALF_GAP);
    p[41] = Point::new(280.5, 220.0 + EYE_HALF_GAP);
    p[42] = Point::new(335.0, 220.0);
    p[43] = Point::new(345.5, 220.0 - EYE_HALF_GAP);
    p[44] = Point::new(359.5, 220.0 - EYE_HALF_GAP);
    p[45] = Point::new(370.0, 220.0);
    p[46] = Point::new(359.5, 220.0 + EYE_HALF_GAP);
    p[47] = Point::new(345.5, 220.0 + EYE_HALF_GAP);
    // outer mouth 48..=59
    p[48] = Point::new(292.0, 300.0);
    p[49] = Point::new(301.0, 294.0);
    p[50] = Point::new(311.0, 291.0);
    p[51] = Point::new(320.0, 290.0);
    p[52] = Point::new(329.0, 291.0);
    p[53] = Point::new(339.0, 294.0);
    p[54] = Point::new(348.0, 300.0);
    p[55] = Point::new(339.0, 308.0);
    p[56] = Point::new(329.0, 312.0);
    p[57] = Point::new(320.0, 313.0);
    p[58] = Point::new(311.0, 312.0);
    p[59] = Point::new(301.0, 308.0);
    // inner mouth 60..=67: width 40, gap 2 -> degree 0.05
    p[60] = Point::new(300.0, 300.0);
    p[61] = Point::new(310.0, 299.0);
    p[62] = Point::new(320.0, 299.0);
    p[63] = Point::new(330.0, 299.0);
    p[64] = Point::new(340.0, 300.0);
    p[65] = Point::new(330.0, 301.0);
    p[66] = Point::new(320.0, 301.0);
    p[67] = Point::new(310.0, 301.0);
    p
}

/// Per-event rendering parameters, drawn deterministically per event.
#[derive(Debug, Clone, Copy)]
struct RenderParams {
    // blink/closure: smallest eye aperture; yawn/talk: peak mouth degree;
    // nod: pitch amplitude; smile: width gain
    magnitude: f64,
    // talk oscillation frequency (Hz)
    frequency: f64,
}

fn draw_render_params<R: Rng>(e: &Event, config: &ScenarioConfig, rng: &mut R) -> RenderParams {
    match e.kind {
        EventKind::Blink => RenderParams {
            magnitude: rng.random_range(0.0..0.1),
            frequency: 0.0,
        },
        EventKind::LongClosure => RenderParams {
            magnitude: rng.random_range(0.02..0.08),
            frequency: 0.0,
        },
        EventKind::Yawn => RenderParams {
            magnitude: uniform_in(rng, config.yawn_peak_degree),
            frequency: 0.0,
        },
        EventKind::Nod => RenderParams {
            magnitude: config.nod_amplitude_deg * rng.random_range(0.85..1.15),
            frequency: 0.0,
        },
        EventKind::Talk => RenderParams {
            magnitude: uniform_in(rng, config.talk_peak_degree),
            frequency: rng.random_range(2.5..4.0),
        },
        EventKind::Smile => RenderParams {
            magnitude: rng.random_range(0.10..0.20),
            frequency: 0.0,
        },
    }
}

/// Renders the timeline into landmark frames by deforming the canonical
/// face, one frame per 1/fps step, with additive Gaussian landmark jitter.
pub fn render_frames(timeline: &EventTimeline, config: &ScenarioConfig) -> Result<Vec<LandmarkFrame>> {
    config.validate()?;
    let mut rng = ChaCha12Rng::seed_from_u64(config.seed ^ 0x52454e44); // render stream
    let phases: [f64; 4] = core::array::from_fn(|_| rng.random_range(0.0..2.0 * PI));
    let params: Vec<RenderParams> = timeline
        .events
        .iter()
        .map(|e| draw_render_params(e, config, &mut rng))
        .collect();
    let jitter = Normal::new(0.0, config.jitter_px.max(1e-12)).expect("valid sigma");

    let template = neutral_face();
    let fps = config.fps as f64;
    let total = timeline.labels.len();
    let mut frames = Vec::with_capacity(total);

    for i in 0..total {
        let t = i as f64 / fps;
        let midpoint = t + 0.5 / fps;

        // compose active events; aperture takes the min, mouth the max
        let mut aperture: f64 = 1.0;
        let mut mouth_degree = NEUTRAL_GAP / MOUTH_WIDTH;
        let mut widen: f64 = 0.0;
        let mut nod_pitch = 0.0;
        for (e, p) in timeline.events.iter().zip(&params) {
            if !e.contains(midpoint) {
                continue;
            }
            let rel = (midpoint - e.start_s) / e.duration_s;
            match e.kind {
                EventKind::Blink => {
                    // trapezoid: closed plateau across the middle ~55%
                    let x = (2.0 * rel - 1.0).abs();
                    let shape = ((x - 0.55) / 0.45).max(0.0);
                    aperture = aperture.min(p.magnitude + (1.0 - p.magnitude) * shape);
                }
                EventKind::LongClosure => {
                    aperture = aperture.min(p.magnitude);
                }
                EventKind::Yawn => {
                    let bump = 0.5 * (1.0 - fmath::cos(2.0 * PI * rel));
                    mouth_degree = mouth_degree.max(p.magnitude * bump);
                }
                EventKind::Nod => {
                    let cycles = config.nod_min_cycles as f64;
                    let dip = 0.5 * (1.0 - fmath::cos(2.0 * PI * cycles * rel));
                    nod_pitch -= p.magnitude * dip;
                }
                EventKind::Talk => {
                    let envelope = fmath::sin(PI * rel);
                    let osc = 0.5
                        * (1.0
                            - fmath::cos(2.0 * PI * p.frequency * (midpoint - e.start_s)));
                    mouth_degree = mouth_degree.max(p.magnitude * envelope * osc);
                }
                EventKind::Smile => {
                    let bump = 0.5 * (1.0 - fmath::cos(2.0 * PI * rel));
                    widen = widen.max(p.magnitude * bump);
                }
            }
        }

        // slow pose wander plus the nod contribution
        let pitch = 2.2 * fmath::sin(2.0 * PI * t / 37.0 + phases[0])
            + 1.3 * fmath::sin(2.0 * PI * t / 11.0 + phases[1])
            + nod_pitch;
        let yaw = 3.5 * fmath::sin(2.0 * PI * t / 29.0 + phases[2]);
        let roll = 2.0 * fmath::sin(2.0 * PI * t / 41.0 + phases[3]);

        let mut points = template;
        // eyes: scale the vertical contour gaps
        for (top, bottom) in [(37, 41), (38, 40), (43, 47), (44, 46)] {
            points[top].y = 220.0 - EYE_HALF_GAP * aperture;
            points[bottom].y = 220.0 + EYE_HALF_GAP * aperture;
        }
        // mouth: open the inner contour to the target degree
        let gap = mouth_degree * MOUTH_WIDTH;
        for (idx, weight) in [(61, 0.8), (62, 1.0), (63, 0.8)] {
            points[idx].y = 300.0 - gap * weight / 2.0;
        }
        for (idx, weight) in [(67, 0.8), (66, 1.0), (65, 0.8)] {
            points[idx].y = 300.0 + gap * weight / 2.0;
        }
        // outer lips and chin follow the jaw drop
        for idx in 49..=53 {
            points[idx].y -= gap * 0.3;
        }
        for idx in 55..=59 {
            points[idx].y += gap * 0.45;
        }
        for idx in 7..=9 {
            points[idx].y += gap * 0.3;
        }
        if widen > 0.0 {
            for idx in 48..68 {
                points[idx].x = 320.0 + (points[idx].x - 320.0) * (1.0 + widen);
            }
            // smile lifts the corners slightly
            points[48].y -= widen * 12.0;
            points[54].y -= widen * 12.0;
        }
        // nodding bobs the whole head down a little
        if nod_pitch < 0.0 {
            let bob = -nod_pitch * 0.25;
            for pt in points.iter_mut() {
                pt.y += bob;
            }
        }
        for pt in points.iter_mut() {
            pt.x += jitter.sample(&mut rng);
            pt.y += jitter.sample(&mut rng);
        }

        frames.push(LandmarkFrame {
            timestamp: t,
            points,
            pose: PoseAngles::new(pitch.clamp(-85.0, 85.0), yaw, roll)?,
            label: Some(timeline.labels[i]),
        });
    }
    Ok(frames)
}

/// A rendered scenario with its windowed dataset.
#[derive(Debug, Clone)]
pub struct GeneratedDataset {
    pub timeline: EventTimeline,
    pub frames: Vec<LandmarkFrame>,
    pub samples: Vec<SequenceSample>,
    pub fatigue_windows: usize,
    pub normal_windows: usize,
}

impl GeneratedDataset {
    /// Fatigue-to-normal window ratio (fatigue / normal).
    pub fn class_ratio(&self) -> f64 {
        self.fatigue_windows as f64 / self.normal_windows.max(1) as f64
    }
}

/// Full pipeline for one scenario: timeline, frames, per-frame features,
/// and the sliding-window dataset at window length `n`, skip `k`, and the
/// given stride.
pub fn generate_dataset(
    config: &ScenarioConfig,
    n: usize,
    k: usize,
    stride: usize,
) -> Result<GeneratedDataset> {
    let timeline = generate_timeline(config)?;
    let frames = render_frames(&timeline, config)?;
    let mut features = Vec::with_capacity(frames.len());
    let mut labels = Vec::with_capacity(frames.len());
    for frame in &frames {
        features.push(build_feature_vector(frame)?);
        labels.push(frame.label.expect("generated frames are labeled"));
    }
    let samples = slide_dataset(&features, &labels, n, k, stride)?;
    let fatigue_windows = samples.iter().filter(|s| s.label.is_fatigue()).count();
    let normal_windows = samples.len() - fatigue_windows;
    Ok(GeneratedDataset {
        timeline,
        frames,
        samples,
        fatigue_windows,
        normal_windows,
    })
}
