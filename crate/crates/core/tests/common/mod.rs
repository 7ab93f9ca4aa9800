//! Random valid gestural scores shared by the property tests.

use articulodyn::score::{Degree, Gesture, GestureScore, Location, TargetSet, Tier};
use proptest::prelude::*;

fn targets(tier: Tier) -> BoxedStrategy<TargetSet> {
    let unit = 0.0..=1.0f64;
    match tier {
        Tier::Vocalic => (-1.0..=1.0f64, -1.0..=1.0f64, unit)
            .prop_map(|(h, f, r)| TargetSet::Vocalic {
                vocalic_height: h,
                vocalic_fronting: f,
                lip_rounding: r,
            })
            .boxed(),
        Tier::Consonantal => (
            prop::sample::select(vec![Location::Labial, Location::Apical, Location::Dorsal]),
            prop::sample::select(vec![
                Degree::FullClosure,
                Degree::Fricative,
                Degree::Lateral,
                Degree::Approximant,
                Degree::Vibrant,
            ]),
            unit,
        )
            .prop_map(|(location, degree, strength)| TargetSet::Consonantal {
                location,
                degree,
                strength,
            })
            .boxed(),
        Tier::Velopharyngeal => unit
            .prop_map(|aperture| TargetSet::Velopharyngeal { aperture })
            .boxed(),
        Tier::Glottal => unit
            .prop_map(|aperture| TargetSet::Glottal { aperture })
            .boxed(),
        Tier::Pulmonary => unit
            .prop_map(|subglottal_pressure| TargetSet::Pulmonary {
                subglottal_pressure,
            })
            .boxed(),
    }
}

/// Up to three sequential gestures on one tier, each inside its own slot of
/// `[0, duration]`.
pub fn tier_gestures(tier: Tier, duration: f64) -> BoxedStrategy<Vec<Gesture>> {
    (0usize..=3)
        .prop_flat_map(move |n| {
            prop::collection::vec(
                (
                    0.0..0.9f64,
                    0.05..=1.0f64,
                    0.0..=1.0f64,
                    1.0..50.0f64,
                    targets(tier),
                ),
                n,
            )
        })
        .prop_map(move |parts| {
            let slot = duration / parts.len().max(1) as f64;
            parts
                .into_iter()
                .enumerate()
                .map(|(i, (a, b, r, tau, targets))| {
                    let start = i as f64 * slot;
                    let onset = start + a * slot;
                    let offset = (onset + b * (start + slot - onset)).min(duration);
                    Gesture {
                        onset_ms: onset,
                        offset_ms: offset,
                        ramp_ms: r * (offset - onset) / 2.0,
                        time_constant_ms: tau,
                        targets,
                    }
                })
                .collect()
        })
        .boxed()
}

pub fn scores() -> impl Strategy<Value = GestureScore> {
    (50.0..2000.0f64, "[a-z/ ]{0,8}")
        .prop_flat_map(|(duration, label)| {
            let tiers: Vec<_> = Tier::ALL
                .iter()
                .map(|&t| tier_gestures(t, duration))
                .collect();
            (Just(duration), Just(label), tiers)
        })
        .prop_map(|(duration, label, tiers)| {
            let gestures = tiers.into_iter().flatten().collect();
            GestureScore::new(label, duration, gestures).expect("generator builds valid scores")
        })
}
