//! Fixed joint layouts: the 13-part 2D detection tree and the 20-joint 3D
//! skeleton produced by the motion generator.

/// Number of detected 2D parts; the 2D pose vector has `2 * NUM_PARTS` entries.
pub const NUM_PARTS: usize = 13;
/// Number of 3D joints; the 3D pose vector has `3 * NUM_JOINTS_3D` entries.
pub const NUM_JOINTS_3D: usize = 20;
pub const POSE2D_LEN: usize = 2 * NUM_PARTS;
pub const POSE3D_LEN: usize = 3 * NUM_JOINTS_3D;

pub const HEAD: usize = 0;
pub const NECK: usize = 1;
pub const L_SHOULDER: usize = 2;
pub const R_SHOULDER: usize = 3;
pub const L_ELBOW: usize = 4;
pub const R_ELBOW: usize = 5;
pub const L_WRIST: usize = 6;
pub const R_WRIST: usize = 7;
pub const PELVIS: usize = 8;
pub const L_KNEE: usize = 9;
pub const R_KNEE: usize = 10;
pub const L_ANKLE: usize = 11;
pub const R_ANKLE: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PartDef {
    pub name: &'static str,
    pub parent: Option<usize>,
    pub n_types: usize,
    /// Index of the 3D joint this part is the projection of.
    pub joint3d: usize,
}

const fn part(name: &'static str, parent: Option<usize>, n_types: usize, joint3d: usize) -> PartDef {
    PartDef {
        name,
        parent,
        n_types,
        joint3d,
    }
}

/// Topologically ordered, rooted at the head.
pub const PARTS: [PartDef; NUM_PARTS] = [
    part("head", None, 5, J_HEAD),
    part("neck", Some(HEAD), 5, J_NECK),
    part("left_shoulder", Some(NECK), 5, J_L_SHOULDER),
    part("right_shoulder", Some(NECK), 5, J_R_SHOULDER),
    part("left_elbow", Some(L_SHOULDER), 6, J_L_ELBOW),
    part("right_elbow", Some(R_SHOULDER), 6, J_R_ELBOW),
    part("left_wrist", Some(L_ELBOW), 6, J_L_WRIST),
    part("right_wrist", Some(R_ELBOW), 6, J_R_WRIST),
    part("pelvis", Some(NECK), 5, J_PELVIS),
    part("left_knee", Some(PELVIS), 6, J_L_KNEE),
    part("right_knee", Some(PELVIS), 6, J_R_KNEE),
    part("left_ankle", Some(L_KNEE), 6, J_L_ANKLE),
    part("right_ankle", Some(R_KNEE), 6, J_R_ANKLE),
];

/// Left/right parts prone to double counting: elbows, wrists, knees, ankles.
pub const SIBLING_PAIRS: [(usize, usize); 4] = [
    (L_ELBOW, R_ELBOW),
    (L_WRIST, R_WRIST),
    (L_KNEE, R_KNEE),
    (L_ANKLE, R_ANKLE),
];

pub const J_PELVIS: usize = 0;
pub const J_L_HIP: usize = 1;
pub const J_R_HIP: usize = 2;
pub const J_SPINE: usize = 3;
pub const J_NECK: usize = 4;
pub const J_HEAD: usize = 5;
pub const J_L_SHOULDER: usize = 6;
pub const J_L_ELBOW: usize = 7;
pub const J_L_WRIST: usize = 8;
pub const J_L_HAND: usize = 9;
pub const J_R_SHOULDER: usize = 10;
pub const J_R_ELBOW: usize = 11;
pub const J_R_WRIST: usize = 12;
pub const J_R_HAND: usize = 13;
pub const J_L_KNEE: usize = 14;
pub const J_L_ANKLE: usize = 15;
pub const J_L_TOE: usize = 16;
pub const J_R_KNEE: usize = 17;
pub const J_R_ANKLE: usize = 18;
pub const J_R_TOE: usize = 19;

pub const JOINT_NAMES_3D: [&str; NUM_JOINTS_3D] = [
    "pelvis",
    "left_hip",
    "right_hip",
    "spine",
    "neck",
    "head",
    "left_shoulder",
    "left_elbow",
    "left_wrist",
    "left_hand",
    "right_shoulder",
    "right_elbow",
    "right_wrist",
    "right_hand",
    "left_knee",
    "left_ankle",
    "left_toe",
    "right_knee",
    "right_ankle",
    "right_toe",
];

pub fn part_names() -> Vec<&'static str> {
    PARTS.iter().map(|p| p.name).collect()
}

pub fn part_index(name: &str) -> Option<usize> {
    PARTS.iter().position(|p| p.name == name)
}

pub fn joint3d_index(name: &str) -> Option<usize> {
    JOINT_NAMES_3D.iter().position(|&n| n == name)
}

/// Label used for a sibling pair in flags and reports, e.g. `left_elbow/right_elbow`.
pub fn pair_label(names: &[impl AsRef<str>], pair: (usize, usize)) -> String {
    format!("{}/{}", names[pair.0].as_ref(), names[pair.1].as_ref())
}
