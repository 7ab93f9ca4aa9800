//! Gestural scores: the tiered timeline of gestures that specifies an utterance.
//!
//! A score holds gestures on five parallel tiers (vocalic, consonantal,
//! velopharyngeal, glottal, pulmonary). Each gesture has an activation
//! interval with symmetric ramps, a first-order time constant and a set of
//! task-space targets whose shape depends on the tier.
//!
//! Scores are exchanged as JSON:
//!
//! ```json
//! {"label": "/pa/", "duration_ms": 300.0, "gestures": [
//!   {"tier": "consonantal", "onset_ms": 60.0, "offset_ms": 140.0, "ramp_ms": 20.0,
//!    "time_constant_ms": 8.0,
//!    "targets": {"location": "labial", "degree": "full_closure", "strength": 1.0}}]}
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ScoreError {
    #[error("schema error at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("validation error at {path}: {message}")]
    Validation { path: String, message: String },
}

impl ScoreError {
    fn schema(path: impl Into<String>, message: impl fmt::Display) -> Self {
        ScoreError::Schema {
            path: path.into(),
            message: message.to_string(),
        }
    }

    fn validation(path: impl Into<String>, message: impl fmt::Display) -> Self {
        ScoreError::Validation {
            path: path.into(),
            message: message.to_string(),
        }
    }

    pub fn path(&self) -> &str {
        match self {
            ScoreError::Schema { path, .. } | ScoreError::Validation { path, .. } => path,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Vocalic,
    Consonantal,
    Velopharyngeal,
    Glottal,
    Pulmonary,
}

impl Tier {
    pub const ALL: [Tier; 5] = [
        Tier::Vocalic,
        Tier::Consonantal,
        Tier::Velopharyngeal,
        Tier::Glottal,
        Tier::Pulmonary,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Tier::Vocalic => "vocalic",
            Tier::Consonantal => "consonantal",
            Tier::Velopharyngeal => "velopharyngeal",
            Tier::Glottal => "glottal",
            Tier::Pulmonary => "pulmonary",
        }
    }
}

impl fmt::Display for Tier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Place of a consonantal constriction, i.e. which superior articulator forms it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Labial,
    Apical,
    Dorsal,
}

impl Location {
    pub const ALL: [Location; 3] = [Location::Labial, Location::Apical, Location::Dorsal];

    pub fn name(self) -> &'static str {
        match self {
            Location::Labial => "labial",
            Location::Apical => "apical",
            Location::Dorsal => "dorsal",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degree {
    FullClosure,
    Fricative,
    Lateral,
    Approximant,
    Vibrant,
}

/// Tier-dependent gesture targets. All values are normalized.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetSet {
    Vocalic {
        vocalic_height: f64,
        vocalic_fronting: f64,
        lip_rounding: f64,
    },
    Consonantal {
        location: Location,
        degree: Degree,
        strength: f64,
    },
    Velopharyngeal {
        aperture: f64,
    },
    Glottal {
        aperture: f64,
    },
    Pulmonary {
        subglottal_pressure: f64,
    },
}

impl TargetSet {
    pub fn tier(&self) -> Tier {
        match self {
            TargetSet::Vocalic { .. } => Tier::Vocalic,
            TargetSet::Consonantal { .. } => Tier::Consonantal,
            TargetSet::Velopharyngeal { .. } => Tier::Velopharyngeal,
            TargetSet::Glottal { .. } => Tier::Glottal,
            TargetSet::Pulmonary { .. } => Tier::Pulmonary,
        }
    }

    /// (name, value, lower bound, upper bound) for every numeric target.
    fn ranged_values(&self) -> Vec<(&'static str, f64, f64, f64)> {
        match *self {
            TargetSet::Vocalic {
                vocalic_height,
                vocalic_fronting,
                lip_rounding,
            } => vec![
                ("vocalic_height", vocalic_height, -1.0, 1.0),
                ("vocalic_fronting", vocalic_fronting, -1.0, 1.0),
                ("lip_rounding", lip_rounding, 0.0, 1.0),
            ],
            TargetSet::Consonantal { strength, .. } => vec![("strength", strength, 0.0, 1.0)],
            TargetSet::Velopharyngeal { aperture } | TargetSet::Glottal { aperture } => {
                vec![("aperture", aperture, 0.0, 1.0)]
            }
            TargetSet::Pulmonary {
                subglottal_pressure,
            } => vec![("subglottal_pressure", subglottal_pressure, 0.0, 1.0)],
        }
    }

    fn to_json(self) -> Map<String, Value> {
        let value = match self {
            TargetSet::Vocalic {
                vocalic_height,
                vocalic_fronting,
                lip_rounding,
            } => serde_json::to_value(VocalicDoc {
                vocalic_height,
                vocalic_fronting,
                lip_rounding,
            }),
            TargetSet::Consonantal {
                location,
                degree,
                strength,
            } => serde_json::to_value(ConsonantalDoc {
                location,
                degree,
                strength,
            }),
            TargetSet::Velopharyngeal { aperture } | TargetSet::Glottal { aperture } => {
                serde_json::to_value(ApertureDoc { aperture })
            }
            TargetSet::Pulmonary {
                subglottal_pressure,
            } => serde_json::to_value(PulmonaryDoc {
                subglottal_pressure,
            }),
        };
        match value {
            Ok(Value::Object(map)) => map,
            _ => unreachable!("target documents serialize to objects"),
        }
    }

    fn from_json(tier: Tier, targets: Value, path: &str) -> Result<Self, ScoreError> {
        fn de<T: serde::de::DeserializeOwned>(v: Value, path: &str) -> Result<T, ScoreError> {
            serde_json::from_value(v).map_err(|e| ScoreError::schema(path, e))
        }
        Ok(match tier {
            Tier::Vocalic => {
                let d: VocalicDoc = de(targets, path)?;
                TargetSet::Vocalic {
                    vocalic_height: d.vocalic_height,
                    vocalic_fronting: d.vocalic_fronting,
                    lip_rounding: d.lip_rounding,
                }
            }
            Tier::Consonantal => {
                let d: ConsonantalDoc = de(targets, path)?;
                TargetSet::Consonantal {
                    location: d.location,
                    degree: d.degree,
                    strength: d.strength,
                }
            }
            Tier::Velopharyngeal => TargetSet::Velopharyngeal {
                aperture: de::<ApertureDoc>(targets, path)?.aperture,
            },
            Tier::Glottal => TargetSet::Glottal {
                aperture: de::<ApertureDoc>(targets, path)?.aperture,
            },
            Tier::Pulmonary => TargetSet::Pulmonary {
                subglottal_pressure: de::<PulmonaryDoc>(targets, path)?.subglottal_pressure,
            },
        })
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct VocalicDoc {
    vocalic_height: f64,
    vocalic_fronting: f64,
    lip_rounding: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConsonantalDoc {
    location: Location,
    degree: Degree,
    strength: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ApertureDoc {
    aperture: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PulmonaryDoc {
    subglottal_pressure: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gesture {
    pub onset_ms: f64,
    pub offset_ms: f64,
    /// Duration of the cosine rise and of the cosine fall.
    pub ramp_ms: f64,
    /// Lag of the first-order task trajectory.
    pub time_constant_ms: f64,
    pub targets: TargetSet,
}

impl Gesture {
    pub fn tier(&self) -> Tier {
        self.targets.tier()
    }

    fn validate(&self, path: &str, duration_ms: f64) -> Result<(), ScoreError> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(ScoreError::validation(
                    format!("{path}.{name}"),
                    "must be finite",
                ))
            }
        };
        finite("onset_ms", self.onset_ms)?;
        finite("offset_ms", self.offset_ms)?;
        finite("ramp_ms", self.ramp_ms)?;
        finite("time_constant_ms", self.time_constant_ms)?;
        if self.onset_ms < 0.0 {
            return Err(ScoreError::validation(
                format!("{path}.onset_ms"),
                format!("{} must be >= 0", self.onset_ms),
            ));
        }
        if self.offset_ms <= self.onset_ms {
            return Err(ScoreError::validation(
                format!("{path}.offset_ms"),
                format!(
                    "{} must be greater than onset_ms {}",
                    self.offset_ms, self.onset_ms
                ),
            ));
        }
        if self.offset_ms > duration_ms {
            return Err(ScoreError::validation(
                format!("{path}.offset_ms"),
                format!("{} exceeds score duration {}", self.offset_ms, duration_ms),
            ));
        }
        if self.ramp_ms < 0.0 || self.ramp_ms > (self.offset_ms - self.onset_ms) / 2.0 {
            return Err(ScoreError::validation(
                format!("{path}.ramp_ms"),
                format!(
                    "{} must lie in [0, {}]",
                    self.ramp_ms,
                    (self.offset_ms - self.onset_ms) / 2.0
                ),
            ));
        }
        if self.time_constant_ms <= 0.0 {
            return Err(ScoreError::validation(
                format!("{path}.time_constant_ms"),
                format!("{} must be > 0", self.time_constant_ms),
            ));
        }
        for (name, v, lo, hi) in self.targets.ranged_values() {
            if !(lo..=hi).contains(&v) {
                return Err(ScoreError::validation(
                    format!("{path}.targets.{name}"),
                    format!("{v} outside [{lo}, {hi}]"),
                ));
            }
        }
        Ok(())
    }
}

/// A validated gestural score. Construct through [`GestureScore::new`] or
/// [`parse_score`]; the fields are read-only afterwards.
#[derive(Debug, Clone, PartialEq)]
pub struct GestureScore {
    label: String,
    duration_ms: f64,
    gestures: Vec<Gesture>,
}

impl GestureScore {
    pub fn new(
        label: impl Into<String>,
        duration_ms: f64,
        gestures: Vec<Gesture>,
    ) -> Result<Self, ScoreError> {
        let score = GestureScore {
            label: label.into(),
            duration_ms,
            gestures,
        };
        score.validate()?;
        Ok(score)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn duration_ms(&self) -> f64 {
        self.duration_ms
    }

    pub fn gestures(&self) -> &[Gesture] {
        &self.gestures
    }

    pub fn gestures_on(&self, tier: Tier) -> impl Iterator<Item = &Gesture> {
        self.gestures.iter().filter(move |g| g.tier() == tier)
    }

    /// Activation interval of the first consonantal gesture, if any.
    pub fn closure_interval(&self) -> Option<(f64, f64)> {
        self.gestures_on(Tier::Consonantal)
            .map(|g| (g.onset_ms, g.offset_ms))
            .next()
    }

    fn validate(&self) -> Result<(), ScoreError> {
        if !(self.duration_ms.is_finite() && self.duration_ms > 0.0) {
            return Err(ScoreError::validation(
                "duration_ms",
                format!("{} must be a positive finite number", self.duration_ms),
            ));
        }
        for (i, g) in self.gestures.iter().enumerate() {
            g.validate(&format!("gestures[{i}]"), self.duration_ms)?;
        }
        // Same-tier gestures are sequential. Intervals are treated as
        // half-open so that one gesture may start exactly where the previous ends.
        for (i, a) in self.gestures.iter().enumerate() {
            for (j, b) in self.gestures.iter().enumerate().skip(i + 1) {
                if a.tier() == b.tier() && a.onset_ms < b.offset_ms && b.onset_ms < a.offset_ms {
                    return Err(ScoreError::validation(
                        format!("gestures[{j}]"),
                        format!(
                            "overlaps gestures[{i}] on the {} tier ({}-{} ms vs {}-{} ms)",
                            a.tier(),
                            a.onset_ms,
                            a.offset_ms,
                            b.onset_ms,
                            b.offset_ms
                        ),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScoreDoc {
    label: String,
    duration_ms: f64,
    gestures: Vec<GestureDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GestureDoc {
    tier: Tier,
    onset_ms: f64,
    offset_ms: f64,
    ramp_ms: f64,
    time_constant_ms: f64,
    targets: Value,
}

pub fn parse_score(document: &str) -> Result<GestureScore, ScoreError> {
    let doc: ScoreDoc = serde_json::from_str(document).map_err(|e| ScoreError::schema("$", e))?;
    let mut gestures = Vec::with_capacity(doc.gestures.len());
    for (i, g) in doc.gestures.into_iter().enumerate() {
        let path = format!("gestures[{i}].targets");
        if !g.targets.is_object() {
            return Err(ScoreError::schema(path, "targets must be an object"));
        }
        let targets = TargetSet::from_json(g.tier, g.targets, &path)?;
        gestures.push(Gesture {
            onset_ms: g.onset_ms,
            offset_ms: g.offset_ms,
            ramp_ms: g.ramp_ms,
            time_constant_ms: g.time_constant_ms,
            targets,
        });
    }
    GestureScore::new(doc.label, doc.duration_ms, gestures)
}

/// Canonical pretty-printed JSON. Field order is fixed, so the output is
/// byte-stable for a given score.
pub fn serialize_score(score: &GestureScore) -> String {
    let doc = ScoreDoc {
        label: score.label.clone(),
        duration_ms: score.duration_ms,
        gestures: score
            .gestures
            .iter()
            .map(|g| GestureDoc {
                tier: g.tier(),
                onset_ms: g.onset_ms,
                offset_ms: g.offset_ms,
                ramp_ms: g.ramp_ms,
                time_constant_ms: g.time_constant_ms,
                targets: Value::Object(g.targets.to_json()),
            })
            .collect(),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("score documents always serialize");
    out.push('\n');
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Consonant {
    P,
    T,
    K,
}

impl Consonant {
    pub const ALL: [Consonant; 3] = [Consonant::P, Consonant::T, Consonant::K];

    pub fn location(self) -> Location {
        match self {
            Consonant::P => Location::Labial,
            Consonant::T => Location::Apical,
            Consonant::K => Location::Dorsal,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Consonant::P => 'p',
            Consonant::T => 't',
            Consonant::K => 'k',
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Vowel {
    A,
    I,
    U,
}

/// Task-space coordinates of a vowel: (height, fronting, rounding).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VowelTargets {
    pub height: f64,
    pub fronting: f64,
    pub rounding: f64,
}

impl Vowel {
    pub const ALL: [Vowel; 3] = [Vowel::A, Vowel::I, Vowel::U];

    pub fn symbol(self) -> char {
        match self {
            Vowel::A => 'a',
            Vowel::I => 'i',
            Vowel::U => 'u',
        }
    }

    /// Edge-vowel corners of the vocalic task space. /a/ is open and central,
    /// /i/ closed and front, /u/ closed, back and rounded.
    pub fn targets(self) -> VowelTargets {
        match self {
            Vowel::A => VowelTargets {
                height: -1.0,
                fronting: 0.0,
                rounding: 0.0,
            },
            Vowel::I => VowelTargets {
                height: 1.0,
                fronting: 1.0,
                rounding: 0.0,
            },
            Vowel::U => VowelTargets {
                height: 1.0,
                fronting: -1.0,
                rounding: 1.0,
            },
        }
    }
}

/// A plosive-vowel syllable such as /pa/.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Syllable {
    pub consonant: Consonant,
    pub vowel: Vowel,
}

impl Syllable {
    pub fn new(consonant: Consonant, vowel: Vowel) -> Self {
        Syllable { consonant, vowel }
    }

    /// The nine plosive-vowel combinations, row-major by consonant.
    pub fn all() -> impl Iterator<Item = Syllable> {
        Consonant::ALL
            .into_iter()
            .flat_map(|c| Vowel::ALL.into_iter().map(move |v| Syllable::new(c, v)))
    }
}

impl fmt::Display for Syllable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.consonant.symbol(), self.vowel.symbol())
    }
}

impl FromStr for Syllable {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim().trim_matches('/');
        let mut chars = s.chars();
        let (Some(c), Some(v), None) = (chars.next(), chars.next(), chars.next()) else {
            return Err(format!("expected a CV syllable like 'pa', got '{s}'"));
        };
        let consonant = match c.to_ascii_lowercase() {
            'p' => Consonant::P,
            't' => Consonant::T,
            'k' => Consonant::K,
            _ => return Err(format!("unknown consonant '{c}' (expected p, t or k)")),
        };
        let vowel = match v.to_ascii_lowercase() {
            'a' => Vowel::A,
            'i' => Vowel::I,
            'u' => Vowel::U,
            _ => return Err(format!("unknown vowel '{v}' (expected a, i or u)")),
        };
        Ok(Syllable::new(consonant, vowel))
    }
}

pub const CV_DURATION_MS: f64 = 300.0;
pub const CV_CLOSURE_ONSET_MS: f64 = 60.0;
pub const CV_CLOSURE_OFFSET_MS: f64 = 140.0;
pub const CV_CLOSURE_RAMP_MS: f64 = 20.0;
pub const CV_CLOSURE_TIME_CONSTANT_MS: f64 = 8.0;
pub const CV_VOCALIC_RAMP_MS: f64 = 20.0;
pub const CV_VOCALIC_TIME_CONSTANT_MS: f64 = 40.0;
pub const CV_PHONATION_ONSET_MS: f64 = 80.0;

/// Builds the default score for a plosive-vowel syllable.
pub fn make_cv_score(consonant: Consonant, vowel: Vowel) -> GestureScore {
    let v = vowel.targets();
    let gestures = vec![
        Gesture {
            onset_ms: 0.0,
            offset_ms: CV_DURATION_MS,
            ramp_ms: CV_VOCALIC_RAMP_MS,
            time_constant_ms: CV_VOCALIC_TIME_CONSTANT_MS,
            targets: TargetSet::Vocalic {
                vocalic_height: v.height,
                vocalic_fronting: v.fronting,
                lip_rounding: v.rounding,
            },
        },
        Gesture {
            onset_ms: CV_CLOSURE_ONSET_MS,
            offset_ms: CV_CLOSURE_OFFSET_MS,
            ramp_ms: CV_CLOSURE_RAMP_MS,
            time_constant_ms: CV_CLOSURE_TIME_CONSTANT_MS,
            targets: TargetSet::Consonantal {
                location: consonant.location(),
                degree: Degree::FullClosure,
                strength: 1.0,
            },
        },
        Gesture {
            onset_ms: 0.0,
            offset_ms: CV_DURATION_MS,
            ramp_ms: 0.0,
            time_constant_ms: 10.0,
            targets: TargetSet::Velopharyngeal { aperture: 0.0 },
        },
        Gesture {
            onset_ms: CV_PHONATION_ONSET_MS,
            offset_ms: CV_DURATION_MS,
            ramp_ms: 10.0,
            time_constant_ms: 10.0,
            targets: TargetSet::Glottal { aperture: 0.15 },
        },
        Gesture {
            onset_ms: 0.0,
            offset_ms: CV_DURATION_MS,
            ramp_ms: 20.0,
            time_constant_ms: 20.0,
            targets: TargetSet::Pulmonary {
                subglottal_pressure: 0.8,
            },
        },
    ];
    let label = format!("/{}/", Syllable::new(consonant, vowel));
    GestureScore::new(label, CV_DURATION_MS, gestures).expect("built-in CV scores are valid")
}
