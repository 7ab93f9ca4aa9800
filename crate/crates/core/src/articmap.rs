//! Mapping of task trajectories onto articulator positions.
//!
//! Articulators follow the task trajectories directly; no equations of
//! motion are solved. Load sharing between the lower jaw and the superior
//! articulators is composed per frame in a fixed order:
//!
//! 1. The jaw starts at its vocalic value, interpolated from the vowel jaw
//!    table over the vocalic task state. Under consonantal overlap it is
//!    blended toward the consonant's isolated jaw height by the consonantal
//!    activation.
//! 2. The lower lip, tongue tip and tongue dorsum ride on the jaw: each
//!    moves by `coupling` per unit of jaw movement.
//! 3. The primary articulator of an active constriction covers the distance
//!    to contact left over once the jaw reaches its consonantal target. For
//!    apical closures the dorsum co-elevates and takes the same amount off
//!    the jaw's share.
//! 4. Jaw displacement away from its vocalic value deforms the anterior
//!    dorsum.
//! 5. Lip contact saturates: aperture clamps at zero and the excess becomes
//!    compression.
//!
//! Every flesh point is a scalar vertical coordinate in model units,
//! positive upwards.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::score::{Degree, GestureScore, Location, TargetSet, Vowel};
use crate::taskgen::{TaskSnapshot, TaskTrajectorySet, TaskVariableId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ArticMapError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("configuration error: {0}")]
    Config(String),
}

/// Rest height of the upper lip.
pub const UPPER_LIP_REST: f64 = 1.0;
/// Lower lip height with the jaw at zero.
pub const LOWER_LIP_REST: f64 = 0.0;
pub const TONGUE_TIP_REST: f64 = 0.3;
pub const TONGUE_DORSUM_REST: f64 = 0.4;
/// Height the tongue tip reaches at alveolar contact.
pub const ALVEOLAR_CONTACT: f64 = 1.3;
/// Height the dorsum flesh point reaches at palatal/velar contact.
pub const VELAR_CONTACT: f64 = 1.4;
/// Lip approach per unit rounding, applied to each lip.
pub const ROUNDING_APPROACH: f64 = 0.1;
/// Overshoot of the lower-lip target past contact at full labial strength.
pub const LABIAL_OVERSHOOT: f64 = 0.3;

/// Which tier drives the labial primary action.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LipClosureSource {
    /// The consonantal labial constriction variable.
    #[default]
    Consonantal,
    /// The vocalic lip parameter (`lip_rounding`) read as a lip-closing demand.
    Vocalic,
}

/// Load-sharing parameters. Loaded from JSON with exactly these field names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynergyConfig {
    /// Jaw height each consonant would use in isolation.
    pub jaw_cons_table: BTreeMap<Location, f64>,
    pub jaw_to_lip_coupling: f64,
    pub jaw_to_tongue_coupling: f64,
    /// Dorsum co-elevation under apical closure (scaled by palatal proximity).
    pub dorsum_support_gain: f64,
    /// Anterior-dorsum deformation per unit of jaw displacement.
    pub dorsum_deform_gain: f64,
    /// Vocalic jaw height of each edge vowel.
    pub vowel_jaw_table: BTreeMap<Vowel, f64>,
    #[serde(default)]
    pub lip_closure_source: LipClosureSource,
}

/// The shipped calibration.
pub const DEFAULT_CONFIG_JSON: &str = include_str!("../config/synergy_default.v1.json");

impl Default for SynergyConfig {
    fn default() -> Self {
        SynergyConfig {
            jaw_cons_table: BTreeMap::from([
                (Location::Labial, 0.5),
                (Location::Apical, 0.8),
                (Location::Dorsal, 0.6),
            ]),
            jaw_to_lip_coupling: 0.5,
            jaw_to_tongue_coupling: 0.5,
            dorsum_support_gain: 0.4,
            dorsum_deform_gain: 0.3,
            vowel_jaw_table: BTreeMap::from([(Vowel::A, -2.0), (Vowel::I, -0.5), (Vowel::U, -0.8)]),
            lip_closure_source: LipClosureSource::Consonantal,
        }
    }
}

impl SynergyConfig {
    pub fn from_json(text: &str) -> Result<Self, ArticMapError> {
        let cfg: SynergyConfig = serde_json::from_str(text)
            .map_err(|e| ArticMapError::Config(format!("invalid synergy config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config always serializes");
        s.push('\n');
        s
    }

    pub fn validate(&self) -> Result<(), ArticMapError> {
        for (name, v) in [
            ("jaw_to_lip_coupling", self.jaw_to_lip_coupling),
            ("jaw_to_tongue_coupling", self.jaw_to_tongue_coupling),
            ("dorsum_support_gain", self.dorsum_support_gain),
            ("dorsum_deform_gain", self.dorsum_deform_gain),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(ArticMapError::Config(format!(
                    "{name} = {v} outside [0, 1]"
                )));
            }
        }
        let mut highest_vowel = f64::NEG_INFINITY;
        for vowel in Vowel::ALL {
            let v = self.vowel_jaw(vowel)?;
            if !v.is_finite() {
                return Err(ArticMapError::Config(format!(
                    "vowel_jaw_table.{} is not finite",
                    vowel.symbol()
                )));
            }
            highest_vowel = highest_vowel.max(v);
        }
        for loc in Location::ALL {
            let c = self.jaw_cons(loc)?;
            if !(c.is_finite() && c >= highest_vowel) {
                return Err(ArticMapError::Config(format!(
                    "jaw_cons_table.{} = {c} must be at least the highest vocalic jaw {highest_vowel}",
                    loc.name()
                )));
            }
        }
        Ok(())
    }

    fn jaw_cons(&self, loc: Location) -> Result<f64, ArticMapError> {
        self.jaw_cons_table.get(&loc).copied().ok_or_else(|| {
            ArticMapError::Config(format!("no jaw_cons_table entry for {}", loc.name()))
        })
    }

    fn vowel_jaw(&self, vowel: Vowel) -> Result<f64, ArticMapError> {
        self.vowel_jaw_table.get(&vowel).copied().ok_or_else(|| {
            ArticMapError::Config(format!("no vowel_jaw_table entry for {}", vowel.symbol()))
        })
    }

    /// Vocalic jaw height for a point of the (height, fronting) plane.
    ///
    /// The affine function through the three edge vowels, clamped to the
    /// range spanned by the table.
    pub fn vocalic_jaw(&self, height: f64, fronting: f64) -> Result<f64, ArticMapError> {
        let pts = Vowel::ALL.map(|v| (v.targets(), v));
        let mut rows = [[0.0; 3]; 3];
        let mut rhs = [0.0; 3];
        for (i, (t, v)) in pts.iter().enumerate() {
            rows[i] = [1.0, t.height, t.fronting];
            rhs[i] = self.vowel_jaw(*v)?;
        }
        let [c0, c1, c2] = solve3(rows, rhs);
        let (lo, hi) = rhs
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        Ok((c0 + c1 * height + c2 * fronting).clamp(lo, hi))
    }
}

/// Cramer's rule; the vowel corners are fixed and non-collinear.
fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> [f64; 3] {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    std::array::from_fn(|col| {
        let mut m = a;
        for row in 0..3 {
            m[row][col] = b[row];
        }
        det(m) / d
    })
}

/// How close the tongue body sits to the front palate, in [0, 1]: one for
/// /i/, zero for open or fully back positions.
pub fn palatal_proximity(height: f64, fronting: f64) -> f64 {
    (((height + 1.0) / 2.0).clamp(0.0, 1.0)) * (((fronting + 1.0) / 2.0).clamp(0.0, 1.0))
}

/// Articulator state at one time step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArticulatorFrame {
    pub t_ms: f64,
    pub jaw_y: f64,
    /// Jaw height the vowel alone would demand.
    pub jaw_vocalic_y: f64,
    pub lower_lip_y: f64,
    pub upper_lip_y: f64,
    pub tongue_tip_y: f64,
    pub tongue_dorsum_y: f64,
    pub lip_aperture: f64,
    pub lip_compression: f64,
    pub velum_aperture: f64,
    pub glottal_aperture: f64,
    /// Own-action components, excluding what is carried by the jaw.
    pub lower_lip_active: f64,
    pub tongue_tip_active: f64,
    pub tongue_dorsum_active: f64,
}

pub fn jaw_blend(jaw_vocalic: f64, jaw_consonantal: f64, w: f64) -> Result<f64, ArticMapError> {
    if !(0.0..=1.0).contains(&w) {
        return Err(ArticMapError::Domain(format!(
            "blend weight {w} outside [0, 1]"
        )));
    }
    let out = (1.0 - w) * jaw_vocalic + w * jaw_consonantal;
    // Rounding can push the sum one ulp past an endpoint.
    Ok(out.clamp(
        jaw_vocalic.min(jaw_consonantal),
        jaw_vocalic.max(jaw_consonantal),
    ))
}

/// Returns `(lip_aperture, lip_compression)`.
pub fn saturate_lips(upper_lip_y: f64, lower_lip_virtual_y: f64) -> (f64, f64) {
    let gap = upper_lip_y - lower_lip_virtual_y;
    if gap > 0.0 {
        (gap, 0.0)
    } else {
        (0.0, -gap)
    }
}

/// The consonantal location with the largest activation, if any is active.
fn dominant_constriction(task: &TaskSnapshot) -> Option<(Location, f64)> {
    Location::ALL
        .into_iter()
        .map(|loc| (loc, task.activation(TaskVariableId::consonantal(loc))))
        .filter(|&(_, w)| w > 0.0)
        .fold(None, |best: Option<(Location, f64)>, cur| match best {
            Some(b) if b.1 >= cur.1 => Some(b),
            _ => Some(cur),
        })
}

pub fn map_frame(
    t_ms: f64,
    task: &TaskSnapshot,
    cfg: &SynergyConfig,
) -> Result<ArticulatorFrame, ArticMapError> {
    let height = task.value(TaskVariableId::VocalicHeight);
    let fronting = task.value(TaskVariableId::VocalicFronting);
    let rounding = task.value(TaskVariableId::LipRounding);
    let proximity = palatal_proximity(height, fronting);

    // 1. jaw
    let jaw_vocalic = cfg.vocalic_jaw(height, fronting)?;
    let apical_w = task.activation(TaskVariableId::ConsonantalApical);
    let support = cfg.dorsum_support_gain * proximity;
    // the jaw position each primary articulator plans against: the target of
    // the dominant constriction, not the instantaneous jaw
    let (jaw, jaw_planned) = match dominant_constriction(task) {
        None => (jaw_vocalic, jaw_vocalic),
        Some((loc, w)) => {
            let mut target = cfg.jaw_cons(loc)?;
            if loc == Location::Apical {
                target -= support;
            }
            (jaw_blend(jaw_vocalic, target, w)?, target)
        }
    };
    let jaw_shift = jaw - jaw_vocalic;

    // 2. passive co-movement
    let k_lip = cfg.jaw_to_lip_coupling;
    let k_tongue = cfg.jaw_to_tongue_coupling;
    let upper_lip = UPPER_LIP_REST - ROUNDING_APPROACH * rounding;
    let lower_lip_at = |j: f64| LOWER_LIP_REST + k_lip * j + ROUNDING_APPROACH * rounding;
    let tongue_tip_at = |j: f64| TONGUE_TIP_REST + k_tongue * j + 0.3 * height + 0.2 * fronting;
    let tongue_dorsum_at =
        |j: f64| TONGUE_DORSUM_REST + k_tongue * j + 0.5 * height + 0.1 * fronting;
    let lower_lip = lower_lip_at(jaw);
    let tongue_tip = tongue_tip_at(jaw);
    let tongue_dorsum = tongue_dorsum_at(jaw);

    // 3. primary articulators cover what the planned co-movement leaves open
    let labial = match cfg.lip_closure_source {
        LipClosureSource::Consonantal => task.value(TaskVariableId::ConsonantalLabial),
        LipClosureSource::Vocalic => rounding,
    };
    let lip_goal = upper_lip + LABIAL_OVERSHOOT * labial;
    let lower_lip_active = labial * (lip_goal - lower_lip_at(jaw_planned));

    let apical = task.value(TaskVariableId::ConsonantalApical);
    let tongue_tip_active = apical * (ALVEOLAR_CONTACT - tongue_tip_at(jaw_planned));
    let mut tongue_dorsum_active = support * apical_w;

    let dorsal = task.value(TaskVariableId::ConsonantalDorsal);
    tongue_dorsum_active +=
        dorsal * (VELAR_CONTACT - (tongue_dorsum_at(jaw_planned) + tongue_dorsum_active));

    // 4. anterior dorsum deformation
    tongue_dorsum_active += cfg.dorsum_deform_gain * jaw_shift;

    // 5. saturation
    let lower_lip_virtual = lower_lip + lower_lip_active;
    let (lip_aperture, lip_compression) = saturate_lips(upper_lip, lower_lip_virtual);

    Ok(ArticulatorFrame {
        t_ms,
        jaw_y: jaw,
        jaw_vocalic_y: jaw_vocalic,
        lower_lip_y: lower_lip_virtual,
        upper_lip_y: upper_lip,
        tongue_tip_y: tongue_tip + tongue_tip_active,
        tongue_dorsum_y: tongue_dorsum + tongue_dorsum_active,
        lip_aperture,
        lip_compression,
        velum_aperture: task.value(TaskVariableId::VelopharyngealAperture),
        glottal_aperture: task.value(TaskVariableId::GlottalAperture),
        lower_lip_active,
        tongue_tip_active,
        tongue_dorsum_active,
    })
}

pub fn map_trajectories(
    tasks: &TaskTrajectorySet,
    cfg: &SynergyConfig,
) -> Result<Vec<ArticulatorFrame>, ArticMapError> {
    (0..tasks.n_steps)
        .map(|k| map_frame(tasks.time_ms(k), &tasks.snapshot(k), cfg))
        .collect()
}

/// Rejects scores using constriction degrees the articulator model cannot
/// shape yet. Only full closures are supported.
pub fn check_supported(score: &GestureScore) -> Result<(), ArticMapError> {
    for (i, g) in score.gestures().iter().enumerate() {
        if let TargetSet::Consonantal { degree, .. } = g.targets {
            if degree != Degree::FullClosure {
                return Err(ArticMapError::Config(format!(
                    "gestures[{i}]: constriction degree {degree:?} has no articulator mapping (only full closures)"
                )));
            }
        }
    }
    Ok(())
}
