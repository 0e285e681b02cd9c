//! Synthetic articulated stick-figure scenes with exact 2D/3D ground truth.
//!
//! Poses come from parametric walking and boxing cycles over a 20-joint
//! skeleton (millimetres, y up, z forward, x towards the actor's left). A
//! fixed orthographic camera rotates the skeleton about the vertical axis,
//! drops depth, and maps millimetres to pixels with a uniform scale.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::{BlobMask, ImageGrid};
use crate::error::{Error, Result};
use crate::skeleton::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Action {
    Walk,
    Box,
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Action::Walk => "walk",
            Action::Box => "box",
        })
    }
}

impl FromStr for Action {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "walk" | "walking" => Ok(Action::Walk),
            "box" | "boxing" => Ok(Action::Box),
            other => Err(Error::config(format!("unknown action {other:?}"))),
        }
    }
}

/// Body proportions, gait amplitudes and camera placement for one actor.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorStyle {
    pub name: String,
    pub thigh: f64,
    pub shin: f64,
    pub ankle_height: f64,
    pub foot: f64,
    pub pelvis_to_spine: f64,
    pub spine_to_neck: f64,
    pub neck_to_head: f64,
    pub shoulder_drop: f64,
    pub shoulder_half_width: f64,
    pub hip_half_width: f64,
    pub upper_arm: f64,
    pub forearm: f64,
    pub hand: f64,
    /// Degrees.
    pub hip_swing: f64,
    pub knee_flex: f64,
    pub arm_swing: f64,
    pub elbow_flex_min: f64,
    pub elbow_flex_range: f64,
    pub torso_lean: f64,
    /// Camera rotation about the vertical axis; 90° is a pure side view in
    /// which left and right limbs share one image plane.
    pub yaw: f64,
    pub mm_to_px: f64,
}

impl ActorStyle {
    /// Side view with mirror-symmetric limbs: the double-counting stress case.
    pub fn s1() -> Self {
        Self {
            name: "S1".into(),
            thigh: 440.0,
            shin: 420.0,
            ankle_height: 80.0,
            foot: 150.0,
            pelvis_to_spine: 230.0,
            spine_to_neck: 250.0,
            neck_to_head: 170.0,
            shoulder_drop: 40.0,
            shoulder_half_width: 170.0,
            hip_half_width: 95.0,
            upper_arm: 290.0,
            forearm: 260.0,
            hand: 80.0,
            hip_swing: 26.0,
            knee_flex: 45.0,
            arm_swing: 32.0,
            elbow_flex_min: 12.0,
            elbow_flex_range: 38.0,
            torso_lean: 4.0,
            yaw: 90.0,
            mm_to_px: 0.13,
        }
    }

    pub fn s2() -> Self {
        Self {
            name: "S2".into(),
            thigh: 460.0,
            shin: 440.0,
            upper_arm: 300.0,
            forearm: 270.0,
            hip_swing: 22.0,
            arm_swing: 26.0,
            yaw: 75.0,
            mm_to_px: 0.125,
            ..Self::s1()
        }
    }

    pub fn s3() -> Self {
        Self {
            name: "S3".into(),
            thigh: 420.0,
            shin: 400.0,
            pelvis_to_spine: 215.0,
            spine_to_neck: 235.0,
            hip_swing: 28.0,
            knee_flex: 50.0,
            arm_swing: 36.0,
            torso_lean: 7.0,
            yaw: 65.0,
            mm_to_px: 0.135,
            ..Self::s1()
        }
    }

    pub fn from_id(id: &str) -> Result<Self> {
        match id {
            "S1" | "s1" => Ok(Self::s1()),
            "S2" | "s2" => Ok(Self::s2()),
            "S3" | "s3" => Ok(Self::s3()),
            other => Err(Error::config(format!("unknown actor style {other:?}"))),
        }
    }
}

/// Motion state: which cycle, where in it, and who performs it.
#[derive(Debug, Clone, PartialEq)]
pub struct PoseParams {
    pub action: Action,
    /// Cycle phase; the generator has period 1.
    pub phase: f64,
    pub actor: ActorStyle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Canvas {
    pub width: usize,
    pub height: usize,
}

impl Default for Canvas {
    fn default() -> Self {
        Self {
            width: 192,
            height: 256,
        }
    }
}

/// Stroke radii (pixels) and intensities used by the renderer.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderStyle {
    pub torso_radius: f64,
    pub head_radius: f64,
    pub neck_radius: f64,
    pub shoulder_radius: f64,
    pub hip_radius: f64,
    pub upper_arm_radius: f64,
    pub forearm_radius: f64,
    pub hand_radius: f64,
    pub thigh_radius: f64,
    pub shin_radius: f64,
    pub foot_radius: f64,
    pub torso_intensity: f64,
    pub head_intensity: f64,
    pub near_limb_intensity: f64,
    pub far_limb_intensity: f64,
    pub background_level: f64,
    pub texture_amplitude: f64,
    pub noise_sigma: f64,
    /// Pixels between the canvas bottom and the floor plane.
    pub floor_margin: f64,
}

impl Default for RenderStyle {
    fn default() -> Self {
        Self {
            torso_radius: 10.0,
            head_radius: 14.0,
            neck_radius: 6.0,
            shoulder_radius: 7.0,
            hip_radius: 8.0,
            upper_arm_radius: 7.0,
            forearm_radius: 6.0,
            hand_radius: 7.0,
            thigh_radius: 9.0,
            shin_radius: 7.0,
            foot_radius: 5.0,
            torso_intensity: 150.0,
            head_intensity: 185.0,
            near_limb_intensity: 225.0,
            far_limb_intensity: 225.0,
            background_level: 60.0,
            texture_amplitude: 8.0,
            noise_sigma: 4.0,
            floor_margin: 14.0,
        }
    }
}

impl RenderStyle {
    /// Black background, white body, no texture or noise.
    pub fn binary() -> Self {
        Self {
            torso_intensity: 255.0,
            head_intensity: 255.0,
            near_limb_intensity: 255.0,
            far_limb_intensity: 255.0,
            background_level: 0.0,
            texture_amplitude: 0.0,
            noise_sigma: 0.0,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticScene {
    pub index: usize,
    pub action: Action,
    pub phase: f64,
    /// 20 joints × (x, y, z), millimetres.
    pub pose3d: Vec<f64>,
    /// 13 joints × (x, y), pixels.
    pub pose2d: Vec<f64>,
    pub frame: ImageGrid,
    pub true_mask: BlobMask,
    pub rng_seed: u64,
}

impl SyntheticScene {
    pub fn joint2d(&self, part: usize) -> [f64; 2] {
        [self.pose2d[2 * part], self.pose2d[2 * part + 1]]
    }
}

/// How frames of a sequence are placed on the cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sampling {
    /// Phases `k / n`: consecutive frames spanning one cycle.
    Train,
    /// Phases `(k + 1/3) / n`: equal steps over the cycle, never landing on a
    /// training phase when the training count is not a multiple of 3.
    Test,
}

impl Sampling {
    pub fn phase(self, k: usize, n: usize) -> f64 {
        match self {
            Sampling::Train => k as f64 / n as f64,
            Sampling::Test => (3 * k + 1) as f64 / (3 * n) as f64,
        }
    }

    fn tag(self) -> u64 {
        match self {
            Sampling::Train => 0x7472_6169_6e00_0000,
            Sampling::Test => 0x7465_7374_0000_0000,
        }
    }
}

fn deg(v: f64) -> f64 {
    v * PI / 180.0
}

/// Unit vector in the sagittal plane at `angle` from straight down, positive forward.
fn sagittal(angle: f64) -> [f64; 3] {
    [0.0, -angle.cos(), angle.sin()]
}

fn add(a: [f64; 3], b: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] + s * b[0], a[1] + s * b[1], a[2] + s * b[2]]
}

struct LimbAngles {
    hip: [f64; 2],
    knee: [f64; 2],
    shoulder: [f64; 2],
    elbow: [f64; 2],
    lean: f64,
}

fn limb_angles(action: Action, phase: f64, a: &ActorStyle) -> LimbAngles {
    let th = 2.0 * PI * phase.rem_euclid(1.0);
    let (s, c) = th.sin_cos();
    match action {
        Action::Walk => {
            let knee = |cc: f64| deg(5.0 + a.knee_flex * (0.5 + 0.5 * cc).powi(2));
            LimbAngles {
                hip: [deg(a.hip_swing) * s, -deg(a.hip_swing) * s],
                knee: [knee(c), knee(-c)],
                shoulder: [-deg(a.arm_swing) * s, deg(a.arm_swing) * s],
                elbow: [
                    deg(a.elbow_flex_min + a.elbow_flex_range * (0.5 - 0.5 * s)),
                    deg(a.elbow_flex_min + a.elbow_flex_range * (0.5 + 0.5 * s)),
                ],
                lean: deg(a.torso_lean),
            }
        }
        Action::Box => {
            let punch = [0.5 + 0.5 * s, 0.5 - 0.5 * s];
            LimbAngles {
                hip: [deg(10.0), deg(-10.0)],
                knee: [deg(15.0), deg(15.0)],
                shoulder: punch.map(|p| deg(50.0 + 25.0 * p)),
                elbow: punch.map(|p| deg(110.0 - 70.0 * p)),
                lean: deg(a.torso_lean + 4.0),
            }
        }
    }
}

/// 3D joint positions (millimetres) for a motion state; 60 values.
pub fn pose3d(params: &PoseParams) -> Vec<f64> {
    let a = &params.actor;
    let ang = limb_angles(params.action, params.phase, a);
    let leg_drop = |side: usize| {
        a.thigh * ang.hip[side].cos() + a.shin * (ang.hip[side] - ang.knee[side]).cos()
    };
    let pelvis = [0.0, a.ankle_height + leg_drop(0).max(leg_drop(1)), 0.0];
    let up = [0.0, ang.lean.cos(), ang.lean.sin()];
    let spine = add(pelvis, up, a.pelvis_to_spine);
    let neck = add(spine, up, a.spine_to_neck);
    let head = add(neck, [0.0, 1.0, 0.06], a.neck_to_head);
    let thorax = add(neck, [0.0, -1.0, 0.0], a.shoulder_drop);

    let mut j = [[0.0; 3]; NUM_JOINTS_3D];
    j[J_PELVIS] = pelvis;
    j[J_SPINE] = spine;
    j[J_NECK] = neck;
    j[J_HEAD] = head;
    let sides = [
        (1.0, J_L_HIP, J_L_KNEE, J_L_ANKLE, J_L_TOE, J_L_SHOULDER, J_L_ELBOW, J_L_WRIST, J_L_HAND),
        (-1.0, J_R_HIP, J_R_KNEE, J_R_ANKLE, J_R_TOE, J_R_SHOULDER, J_R_ELBOW, J_R_WRIST, J_R_HAND),
    ];
    for (side, &(sign, hip, knee, ankle, toe, sh, el, wr, hand)) in sides.iter().enumerate() {
        j[hip] = add(pelvis, [1.0, 0.0, 0.0], sign * a.hip_half_width);
        j[knee] = add(j[hip], sagittal(ang.hip[side]), a.thigh);
        j[ankle] = add(j[knee], sagittal(ang.hip[side] - ang.knee[side]), a.shin);
        j[toe] = add(j[ankle], [0.0, -0.2, 0.98], a.foot);
        j[sh] = add(thorax, [1.0, 0.0, 0.0], sign * a.shoulder_half_width);
        j[el] = add(j[sh], sagittal(ang.shoulder[side]), a.upper_arm);
        let fore = sagittal(ang.shoulder[side] + ang.elbow[side]);
        j[wr] = add(j[el], fore, a.forearm);
        j[hand] = add(j[wr], fore, a.hand);
    }
    j.iter().flat_map(|p| p.iter().copied()).collect()
}

/// Image-plane position `(x, y)` in pixels and depth (mm, larger is farther)
/// for every 3D joint.
pub fn project(pose3d: &[f64], actor: &ActorStyle, canvas: Canvas, style: &RenderStyle) -> Vec<([f64; 2], f64)> {
    let (sy, cy) = deg(actor.yaw).sin_cos();
    pose3d
        .chunks_exact(3)
        .map(|p| {
            let u = p[0] * cy + p[2] * sy;
            let depth = -p[0] * sy + p[2] * cy;
            let px = canvas.width as f64 / 2.0 + actor.mm_to_px * u;
            let py = canvas.height as f64 - style.floor_margin - actor.mm_to_px * p[1];
            ([px, py], depth)
        })
        .collect()
}

/// The 26-value 2D pose (part order of [`PARTS`]) from all projected joints.
fn pose2d_from_projection(proj: &[([f64; 2], f64)]) -> Vec<f64> {
    PARTS.iter().flat_map(|p| proj[p.joint3d].0).collect()
}

const SS: usize = 4;

struct Capsule {
    a: [f64; 2],
    b: [f64; 2],
    r: f64,
    intensity: f64,
}

/// Supersampled painter's-algorithm raster.
struct Raster {
    w: usize,
    h: usize,
    value: Vec<f32>,
    covered: Vec<bool>,
}

impl Raster {
    fn new(canvas: Canvas, background: impl Fn(usize, usize) -> f64) -> Self {
        let (w, h) = (canvas.width * SS, canvas.height * SS);
        let mut value = vec![0.0f32; w * h];
        for j in 0..h {
            for i in 0..w {
                value[j * w + i] = background(i / SS, j / SS) as f32;
            }
        }
        Self {
            w,
            h,
            value,
            covered: vec![false; w * h],
        }
    }

    fn draw(&mut self, c: &Capsule) {
        let s = SS as f64;
        let lo_x = ((c.a[0].min(c.b[0]) - c.r) * s).floor().max(0.0) as usize;
        let hi_x = (((c.a[0].max(c.b[0]) + c.r) * s).ceil().max(0.0) as usize).min(self.w);
        let lo_y = ((c.a[1].min(c.b[1]) - c.r) * s).floor().max(0.0) as usize;
        let hi_y = (((c.a[1].max(c.b[1]) + c.r) * s).ceil().max(0.0) as usize).min(self.h);
        let (dx, dy) = (c.b[0] - c.a[0], c.b[1] - c.a[1]);
        let len2 = dx * dx + dy * dy;
        let r2 = c.r * c.r;
        for j in lo_y..hi_y {
            let py = (j as f64 + 0.5) / s;
            for i in lo_x..hi_x {
                let px = (i as f64 + 0.5) / s;
                let t = if len2 > 0.0 {
                    (((px - c.a[0]) * dx + (py - c.a[1]) * dy) / len2).clamp(0.0, 1.0)
                } else {
                    0.0
                };
                let ex = px - (c.a[0] + t * dx);
                let ey = py - (c.a[1] + t * dy);
                if ex * ex + ey * ey <= r2 {
                    let k = j * self.w + i;
                    self.value[k] = c.intensity as f32;
                    self.covered[k] = true;
                }
            }
        }
    }

    /// Pixel means and the majority-coverage silhouette.
    fn resolve(&self, canvas: Canvas) -> (Vec<f64>, Vec<bool>) {
        let n = canvas.width * canvas.height;
        let mut sum = vec![0.0f64; n];
        let mut hits = vec![0usize; n];
        for j in 0..self.h {
            for i in 0..self.w {
                let p = (j / SS) * canvas.width + i / SS;
                let k = j * self.w + i;
                sum[p] += self.value[k] as f64;
                hits[p] += self.covered[k] as usize;
            }
        }
        let samples = (SS * SS) as f64;
        let half = SS * SS / 2;
        (
            sum.into_iter().map(|s| s / samples).collect(),
            hits.into_iter().map(|c| c > half).collect(),
        )
    }
}

/// Fixed low-amplitude background pattern (independent of the seed).
pub fn background_texture(x: usize, y: usize, style: &RenderStyle) -> f64 {
    let (fx, fy) = (x as f64, y as f64);
    style.background_level
        + style.texture_amplitude * (2.0 * PI * fx / 23.0).sin() * (2.0 * PI * fy / 17.0).cos()
}

fn finish_frame(canvas: Canvas, mut pixels: Vec<f64>, style: &RenderStyle, seed: u64) -> Result<ImageGrid> {
    if style.noise_sigma > 0.0 {
        let normal = Normal::new(0.0, style.noise_sigma)
            .map_err(|e| Error::config(format!("noise sigma: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for p in pixels.iter_mut() {
            *p += normal.sample(&mut rng);
        }
    }
    for p in pixels.iter_mut() {
        *p = p.round().clamp(0.0, 255.0);
    }
    ImageGrid::new(canvas.width, canvas.height, pixels)
}

fn check_canvas(canvas: Canvas) -> Result<()> {
    if canvas.width < 64 || canvas.height < 64 {
        return Err(Error::config(format!(
            "canvas must be at least 64x64, got {}x{}",
            canvas.width, canvas.height
        )));
    }
    Ok(())
}

/// An empty frame: background texture plus seeded noise.
pub fn render_background(canvas: Canvas, style: &RenderStyle, seed: u64) -> Result<ImageGrid> {
    check_canvas(canvas)?;
    let pixels = (0..canvas.height)
        .flat_map(|y| (0..canvas.width).map(move |x| (x, y)))
        .map(|(x, y)| background_texture(x, y, style))
        .collect();
    finish_frame(canvas, pixels, style, seed)
}

/// Renders one stick-figure frame. Only the additive noise depends on `seed`.
pub fn render_scene(params: &PoseParams, canvas: Canvas, style: &RenderStyle, seed: u64) -> Result<SyntheticScene> {
    check_canvas(canvas)?;
    let pose3d = pose3d(params);
    let proj = project(&pose3d, &params.actor, canvas, style);
    let pose2d = pose2d_from_projection(&proj);
    for (joint, xy) in pose2d.chunks_exact(2).enumerate() {
        let (x, y) = (xy[0], xy[1]);
        if !(x >= 0.0 && y >= 0.0 && x < canvas.width as f64 && y < canvas.height as f64) {
            return Err(Error::OutOfFrame {
                joint,
                x,
                y,
                width: canvas.width,
                height: canvas.height,
            });
        }
    }

    let at = |j: usize| proj[j].0;
    let cap = |a: usize, b: usize, r: f64, intensity: f64| Capsule {
        a: at(a),
        b: at(b),
        r,
        intensity,
    };
    let s = style;
    let mut capsules = vec![
        cap(J_PELVIS, J_L_HIP, s.hip_radius, s.torso_intensity),
        cap(J_PELVIS, J_R_HIP, s.hip_radius, s.torso_intensity),
        cap(J_PELVIS, J_SPINE, s.torso_radius, s.torso_intensity),
        cap(J_SPINE, J_NECK, s.torso_radius, s.torso_intensity),
        cap(J_NECK, J_L_SHOULDER, s.shoulder_radius, s.torso_intensity),
        cap(J_NECK, J_R_SHOULDER, s.shoulder_radius, s.torso_intensity),
        cap(J_NECK, J_HEAD, s.neck_radius, s.torso_intensity),
        cap(J_HEAD, J_HEAD, s.head_radius, s.head_intensity),
    ];
    let limbs = |hip, knee, ankle, toe, sh, el, wr, hand, intensity| {
        vec![
            cap(hip, knee, s.thigh_radius, intensity),
            cap(knee, ankle, s.shin_radius, intensity),
            cap(ankle, toe, s.foot_radius, intensity),
            cap(sh, el, s.upper_arm_radius, intensity),
            cap(el, wr, s.forearm_radius, intensity),
            cap(wr, hand, s.hand_radius, intensity),
        ]
    };
    // Farther side first so the nearer limbs paint over it.
    let left_far = proj[J_L_HIP].1 > proj[J_R_HIP].1;
    let left = |i| limbs(J_L_HIP, J_L_KNEE, J_L_ANKLE, J_L_TOE, J_L_SHOULDER, J_L_ELBOW, J_L_WRIST, J_L_HAND, i);
    let right = |i| limbs(J_R_HIP, J_R_KNEE, J_R_ANKLE, J_R_TOE, J_R_SHOULDER, J_R_ELBOW, J_R_WRIST, J_R_HAND, i);
    if left_far {
        capsules.extend(left(s.far_limb_intensity));
        capsules.extend(right(s.near_limb_intensity));
    } else {
        capsules.extend(right(s.far_limb_intensity));
        capsules.extend(left(s.near_limb_intensity));
    }

    let mut raster = Raster::new(canvas, |x, y| background_texture(x, y, style));
    for c in &capsules {
        raster.draw(c);
    }
    let (pixels, silhouette) = raster.resolve(canvas);
    let frame = finish_frame(canvas, pixels, style, seed)?;
    Ok(SyntheticScene {
        index: 0,
        action: params.action,
        phase: params.phase,
        pose3d,
        pose2d,
        frame,
        true_mask: BlobMask::new(canvas.width, canvas.height, silhouette)?,
        rng_seed: seed,
    })
}

/// Per-frame noise seed derived from the sequence seed, split and index.
pub fn frame_seed(seed: u64, sampling: Sampling, index: usize) -> u64 {
    // splitmix64 finaliser
    let mut z = seed ^ sampling.tag() ^ (index as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `n_frames` scenes placed on the action cycle according to `sampling`.
pub fn synth_sequence(
    n_frames: usize,
    action: Action,
    actor: &ActorStyle,
    canvas: Canvas,
    style: &RenderStyle,
    sampling: Sampling,
    seed: u64,
) -> Result<Vec<SyntheticScene>> {
    if n_frames == 0 {
        return Err(Error::config("sequence needs at least one frame"));
    }
    (0..n_frames)
        .map(|k| {
            let params = PoseParams {
                action,
                phase: sampling.phase(k, n_frames),
                actor: actor.clone(),
            };
            let mut scene = render_scene(&params, canvas, style, frame_seed(seed, sampling, k))?;
            scene.index = k;
            Ok(scene)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::{clean_mask, BackgroundModel};

    fn walk(phase: f64) -> PoseParams {
        PoseParams {
            action: Action::Walk,
            phase,
            actor: ActorStyle::s1(),
        }
    }

    #[test]
    fn same_inputs_render_identically() {
        let style = RenderStyle::default();
        let a = render_scene(&walk(0.3), Canvas::default(), &style, 11).unwrap();
        let b = render_scene(&walk(0.3), Canvas::default(), &style, 11).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn binary_render_matches_silhouette_after_subtraction() {
        let style = RenderStyle::binary();
        let canvas = Canvas::default();
        for phase in [0.0, 0.17, 0.5, 0.81] {
            let scene = render_scene(&walk(phase), canvas, &style, 3).unwrap();
            let bg = BackgroundModel::new(ImageGrid::filled(canvas.width, canvas.height, 0.0), 0.05, 128.0).unwrap();
            let mask = bg.subtract(&scene.frame).unwrap();
            assert_eq!(mask, scene.true_mask, "phase {phase}");
            assert_eq!(clean_mask(&mask, 1), scene.true_mask);
        }
    }

    #[test]
    fn walking_cycle_has_period_one() {
        for phase in [0.0, 0.125, 0.4, 0.9] {
            let a = pose3d(&walk(phase));
            let b = pose3d(&walk(phase + 1.0));
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn pose2d_is_the_projection_of_pose3d() {
        let style = RenderStyle::default();
        let params = PoseParams {
            action: Action::Box,
            phase: 0.37,
            actor: ActorStyle::s2(),
        };
        let scene = render_scene(&params, Canvas::default(), &style, 1).unwrap();
        let proj = project(&scene.pose3d, &params.actor, Canvas::default(), &style);
        for (i, p) in PARTS.iter().enumerate() {
            assert_eq!(scene.joint2d(i), proj[p.joint3d].0);
        }
        assert_eq!(scene.pose2d.len(), POSE2D_LEN);
        assert_eq!(scene.pose3d.len(), POSE3D_LEN);
    }

    #[test]
    fn side_view_stands_on_the_floor() {
        let a = ActorStyle::s1();
        for k in 0..20 {
            let p = pose3d(&walk(k as f64 / 20.0));
            let lowest = p[3 * J_L_ANKLE + 1].min(p[3 * J_R_ANKLE + 1]);
            assert!((lowest - a.ankle_height).abs() < 1e-9);
        }
    }

    #[test]
    fn small_canvas_is_rejected() {
        let err = render_scene(&walk(0.0), Canvas { width: 63, height: 200 }, &RenderStyle::default(), 0);
        assert!(matches!(err, Err(Error::Config(_))));
    }

    #[test]
    fn figure_outside_canvas_is_rejected() {
        let err = render_scene(&walk(0.0), Canvas { width: 64, height: 64 }, &RenderStyle::default(), 0);
        assert!(matches!(err, Err(Error::OutOfFrame { .. })));
    }

    #[test]
    fn train_sequence_has_increasing_phase() {
        let style = RenderStyle::default();
        let seq = synth_sequence(200, Action::Walk, &ActorStyle::s1(), Canvas::default(), &style, Sampling::Train, 5).unwrap();
        assert_eq!(seq.len(), 200);
        assert!(seq.windows(2).all(|w| w[1].phase > w[0].phase));
        assert!(seq.iter().enumerate().all(|(i, s)| s.index == i));
    }

    #[test]
    fn test_sequence_covers_the_cycle_off_the_training_grid() {
        let style = RenderStyle::default();
        let seq = synth_sequence(21, Action::Walk, &ActorStyle::s1(), Canvas::default(), &style, Sampling::Test, 5).unwrap();
        assert_eq!(seq.len(), 21);
        assert!(seq[0].phase < 1.0 / 21.0 && seq[20].phase > 20.0 / 21.0);
        for s in &seq {
            let k = s.phase * 200.0;
            assert!((k - k.round()).abs() > 1e-6, "phase {} hits the training grid", s.phase);
        }
    }

    #[test]
    fn seeds_change_noise_but_not_pose() {
        let style = RenderStyle::default();
        let a = synth_sequence(3, Action::Box, &ActorStyle::s1(), Canvas::default(), &style, Sampling::Train, 1).unwrap();
        let b = synth_sequence(3, Action::Box, &ActorStyle::s1(), Canvas::default(), &style, Sampling::Train, 2).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.pose3d, y.pose3d);
            assert_eq!(x.true_mask, y.true_mask);
            assert_ne!(x.frame, y.frame);
        }
    }

    #[test]
    fn every_preset_fits_the_default_canvas() {
        let style = RenderStyle::default();
        for actor in [ActorStyle::s1(), ActorStyle::s2(), ActorStyle::s3()] {
            for action in [Action::Walk, Action::Box] {
                synth_sequence(40, action, &actor, Canvas::default(), &style, Sampling::Train, 0).unwrap();
            }
        }
    }
}
