//! Noise synthesizers and k-space artifact simulators.
//!
//! Four intensity-domain noise models (additive Gaussian, Rician magnitude,
//! multiplicative speckle, salt and pepper) and four spectral artifacts
//! (Gibbs truncation, rigid motion with k-space slab interleaving, ghosting
//! by periodic plane attenuation, spike noise). Every randomized operation
//! draws from its own tagged ChaCha stream, so the same seed always
//! reproduces the same corruption bit for bit, and composing operations
//! under one seed keeps their streams independent.
//!
//! Artifacts edit the spectrum and return via inverse transform plus
//! magnitude extraction, mirroring how scanner pipelines hand back magnitude
//! images; asymmetric spectral edits are therefore legal here.
//!
//! Severity conventions: Gibbs `alpha` is the fraction of the spectral
//! radius removed (0 keeps everything), ghosting attenuates every g-th plane
//! by `1 - s`, spike coefficients are written at `intensity * |DC|`.

use crate::error::{Error, Result};
use crate::kspace::{fft3, ifft3_magnitude, KSpace};
use crate::rng::stream;
use crate::volume::Volume;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;

/// Additive zero-mean Gaussian noise. No clipping: values may leave [0, 1].
pub fn add_gaussian(v: &Volume, sigma: f64, seed: u64) -> Volume {
    let mut rng = stream(seed, "gaussian");
    let normal = StandardNormal;
    v.map(|x| {
        let n: f64 = normal.sample(&mut rng);
        x + sigma * n
    })
}

/// Rician magnitude noise: sqrt((v + n1)^2 + n2^2), the distribution of a
/// magnitude image acquired with complex Gaussian channel noise.
pub fn add_rician(v: &Volume, sigma: f64, seed: u64) -> Volume {
    let mut rng = stream(seed, "rician");
    let normal = StandardNormal;
    v.map(|x| {
        let n1: f64 = normal.sample(&mut rng);
        let n2: f64 = normal.sample(&mut rng);
        let a = x + sigma * n1;
        let b = sigma * n2;
        (a * a + b * b).sqrt()
    })
}

/// Multiplicative speckle: v * (1 + n), n ~ N(0, sigma^2).
pub fn add_speckle(v: &Volume, sigma: f64, seed: u64) -> Volume {
    let mut rng = stream(seed, "speckle");
    let normal = StandardNormal;
    v.map(|x| {
        let n: f64 = normal.sample(&mut rng);
        x * (1.0 + sigma * n)
    })
}

/// Salt and pepper: each voxel is replaced by 1 with probability density/2
/// and by 0 with probability density/2.
pub fn add_salt_pepper(v: &Volume, density: f64, seed: u64) -> Volume {
    let mut rng = stream(seed, "saltpepper");
    v.map(|x| {
        let u: f64 = rng.random();
        if u < density / 2.0 {
            1.0
        } else if u < density {
            0.0
        } else {
            x
        }
    })
}

/// Zeroes every coefficient whose centered normalized radius exceeds
/// `(1 - alpha) * sqrt(3)` (the corner of the [-1,1]^3 frequency cube).
/// DC always survives, so the pre-magnitude mean is untouched.
pub fn gibbs_filter_kspace(k: &mut KSpace, alpha: f64) {
    let cutoff = (1.0 - alpha) * 3.0_f64.sqrt();
    let [l, w, h] = k.dims();
    for kk in 0..h {
        for jj in 0..w {
            for ii in 0..l {
                if k.normalized_radius(ii, jj, kk) > cutoff {
                    k.set(ii, jj, kk, Complex::new(0.0, 0.0));
                }
            }
        }
    }
}

/// Gibbs truncation artifact: radial low-pass in k-space, magnitude
/// recovery. `alpha = 0` is the identity (up to transform round-off).
pub fn apply_gibbs(v: &Volume, alpha: f64) -> Result<Volume> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::BadSpecText {
            text: format!("gibbs:{alpha}"),
            reason: "alpha must lie in [0, 1)".to_string(),
        });
    }
    let mut k = fft3(v);
    gibbs_filter_kspace(&mut k, alpha);
    Ok(ifft3_magnitude(&k))
}

/// Rigid-motion corruption parameters. Magnitudes are drawn uniformly from
/// the inclusive ranges with independent random signs per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct MotionParams {
    /// Rotation magnitude range per axis, degrees.
    pub rot_deg: (f64, f64),
    /// Translation magnitude range per axis, mm (converted via spacing).
    pub trans_mm: (f64, f64),
    /// Number of displaced positions interleaved into k-space.
    pub num_transforms: usize,
}

impl Default for MotionParams {
    fn default() -> Self {
        MotionParams {
            rot_deg: (5.0, 8.0),
            trans_mm: (3.0, 5.0),
            num_transforms: 4,
        }
    }
}

/// Ghosting parameters: every `g`-th k-space plane perpendicular to `axis`
/// (never the DC plane) is attenuated by `1 - s`.
#[derive(Clone, Debug, PartialEq)]
pub struct GhostingParams {
    /// Inclusive range for the plane period g.
    pub num_ghosts: (u32, u32),
    /// Inclusive range for the attenuation strength s in [0, 1].
    pub intensity: (f64, f64),
    /// Axis perpendicular to the attenuated planes.
    pub axis: usize,
}

impl Default for GhostingParams {
    fn default() -> Self {
        GhostingParams {
            num_ghosts: (4, 10),
            intensity: (0.5, 1.0),
            axis: 1,
        }
    }
}

/// Spike (herringbone) parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SpikeParams {
    pub num_spikes: usize,
    /// Spike magnitude as a fraction of |DC|.
    pub intensity: f64,
}

impl Default for SpikeParams {
    fn default() -> Self {
        SpikeParams { num_spikes: 1, intensity: 0.5 }
    }
}

fn rotation_matrix(deg: [f64; 3]) -> [[f64; 3]; 3] {
    let (sx, cx) = deg[0].to_radians().sin_cos();
    let (sy, cy) = deg[1].to_radians().sin_cos();
    let (sz, cz) = deg[2].to_radians().sin_cos();
    // R = Rz * Ry * Rx
    [
        [cz * cy, cz * sy * sx - sz * cx, cz * sy * cx + sz * sx],
        [sz * cy, sz * sy * sx + cz * cx, sz * sy * cx - cz * sx],
        [-sy, cy * sx, cy * cx],
    ]
}

/// Resamples `v` under a rigid transform (rotation about the volume center
/// in voxel coordinates, then translation in voxels), trilinear
/// interpolation, zero fill outside.
fn apply_rigid(v: &Volume, rot_deg: [f64; 3], trans_vox: [f64; 3]) -> Volume {
    let r = rotation_matrix(rot_deg);
    let [l, w, h] = v.dims();
    let c = [
        (l as f64 - 1.0) / 2.0,
        (w as f64 - 1.0) / 2.0,
        (h as f64 - 1.0) / 2.0,
    ];
    Volume::from_fn([l, w, h], |i, j, k| {
        // inverse map: undo the translation, then rotate by R^T
        let p = [
            i as f64 - c[0] - trans_vox[0],
            j as f64 - c[1] - trans_vox[1],
            k as f64 - c[2] - trans_vox[2],
        ];
        let q = [
            r[0][0] * p[0] + r[1][0] * p[1] + r[2][0] * p[2] + c[0],
            r[0][1] * p[0] + r[1][1] * p[1] + r[2][1] * p[2] + c[1],
            r[0][2] * p[0] + r[1][2] * p[1] + r[2][2] * p[2] + c[2],
        ];
        trilinear(v, q)
    })
    .with_spacing(v.spacing())
    .expect("source spacing is valid")
}

fn trilinear(v: &Volume, q: [f64; 3]) -> f64 {
    let [l, w, h] = v.dims();
    let dims = [l as isize, w as isize, h as isize];
    let f = [q[0].floor(), q[1].floor(), q[2].floor()];
    let t = [q[0] - f[0], q[1] - f[1], q[2] - f[2]];
    let base = [f[0] as isize, f[1] as isize, f[2] as isize];
    let mut acc = 0.0;
    for corner in 0..8usize {
        let off = [corner & 1, (corner >> 1) & 1, (corner >> 2) & 1];
        let mut wgt = 1.0;
        let mut pos = [0isize; 3];
        let mut inside = true;
        for a in 0..3 {
            pos[a] = base[a] + off[a] as isize;
            wgt *= if off[a] == 1 { t[a] } else { 1.0 - t[a] };
            if pos[a] < 0 || pos[a] >= dims[a] {
                inside = false;
            }
        }
        if inside && wgt != 0.0 {
            acc += wgt * v.get(pos[0] as usize, pos[1] as usize, pos[2] as usize);
        }
    }
    acc
}

/// Rigid motion artifact: the spectrum is assembled from contiguous slabs
/// along the slowest axis, slab 0 (which contains DC) from the untransformed
/// volume and slab t from the volume under transform t. Magnitude recovery.
///
/// `num_transforms = 0` degenerates to a plain transform round trip.
pub fn apply_motion(v: &Volume, params: &MotionParams, seed: u64) -> Volume {
    let mut rng = stream(seed, "motion");
    let t_count = params.num_transforms;
    let mut spectra = Vec::with_capacity(t_count + 1);
    spectra.push(fft3(v));
    for _ in 0..t_count {
        let mut rot = [0.0; 3];
        for r in &mut rot {
            let mag = rng.random_range(params.rot_deg.0..=params.rot_deg.1);
            let sign = if rng.random_range(0..2u32) == 0 { 1.0 } else { -1.0 };
            *r = sign * mag;
        }
        let mut trans = [0.0; 3];
        let spacing = v.spacing();
        for (a, t) in trans.iter_mut().enumerate() {
            let mag = rng.random_range(params.trans_mm.0..=params.trans_mm.1);
            let sign = if rng.random_range(0..2u32) == 0 { 1.0 } else { -1.0 };
            *t = sign * mag / spacing[a];
        }
        spectra.push(fft3(&apply_rigid(v, rot, trans)));
    }
    let mut merged = spectra[0].clone();
    let [l, w, h] = v.dims();
    let slabs = t_count + 1;
    for t in 1..slabs {
        let z0 = t * h / slabs;
        let z1 = (t + 1) * h / slabs;
        for kk in z0..z1 {
            for jj in 0..w {
                for ii in 0..l {
                    merged.set(ii, jj, kk, spectra[t].get(ii, jj, kk));
                }
            }
        }
    }
    ifft3_magnitude(&merged)
}

/// Attenuates every g-th plane perpendicular to `axis` (indices g, 2g, ...;
/// the DC plane at index 0 is excluded) by `1 - s`.
pub fn ghosting_filter_kspace(k: &mut KSpace, g: u32, s: f64, axis: usize) {
    assert!(axis < 3, "ghost axis must be 0, 1 or 2");
    assert!(g >= 1, "ghost period must be >= 1");
    let [l, w, h] = k.dims();
    let factor = 1.0 - s;
    for kk in 0..h {
        for jj in 0..w {
            for ii in 0..l {
                let plane = [ii, jj, kk][axis];
                if plane != 0 && plane % g as usize == 0 {
                    let c = k.get(ii, jj, kk);
                    k.set(ii, jj, kk, c * factor);
                }
            }
        }
    }
}

/// Ghosting artifact: periodic plane attenuation producing displaced
/// replicas at spacing N/g along the axis. Magnitude recovery.
pub fn apply_ghosting(v: &Volume, params: &GhostingParams, seed: u64) -> Volume {
    let mut rng = stream(seed, "ghosting");
    let g = rng.random_range(params.num_ghosts.0..=params.num_ghosts.1);
    let s = rng.random_range(params.intensity.0..=params.intensity.1);
    let mut k = fft3(v);
    ghosting_filter_kspace(&mut k, g, s, params.axis);
    ifft3_magnitude(&k)
}

/// Writes `num_spikes` spikes at random non-DC locations: each chosen
/// coefficient becomes `intensity * |DC| * exp(i * phase)` with a uniformly
/// random phase, and its Hermitian mirror gets the conjugate so the
/// pre-magnitude image stays real (a pure cosine stripe, the classic
/// appearance). Self-conjugate locations (Nyquist corners) are written as
/// real values of the same magnitude. Returns the chosen locations.
pub fn spike_kspace(
    k: &mut KSpace,
    num_spikes: usize,
    intensity: f64,
    seed: u64,
) -> Vec<[usize; 3]> {
    let mut rng = stream(seed, "spike");
    let [l, w, h] = k.dims();
    let dc_mag = k.dc().norm();
    let mut locations = Vec::with_capacity(num_spikes);
    for _ in 0..num_spikes {
        let loc = loop {
            let cand = [
                rng.random_range(0..l),
                rng.random_range(0..w),
                rng.random_range(0..h),
            ];
            if cand != [0, 0, 0] {
                break cand;
            }
        };
        let phase = rng.random_range(0.0..std::f64::consts::TAU);
        let mirror = [(l - loc[0]) % l, (w - loc[1]) % w, (h - loc[2]) % h];
        let magnitude = intensity * dc_mag;
        if mirror == loc {
            let sign = if phase < std::f64::consts::PI { 1.0 } else { -1.0 };
            k.set(loc[0], loc[1], loc[2], Complex::new(sign * magnitude, 0.0));
        } else {
            let value = Complex::from_polar(magnitude, phase);
            k.set(loc[0], loc[1], loc[2], value);
            k.set(mirror[0], mirror[1], mirror[2], value.conj());
        }
        locations.push(loc);
    }
    locations
}

/// Spike (herringbone) artifact: bright rogue k-space samples that imprint
/// a raised stripe pattern across the whole volume. Magnitude recovery.
pub fn apply_spike(v: &Volume, params: &SpikeParams, seed: u64) -> Volume {
    let mut k = fft3(v);
    spike_kspace(&mut k, params.num_spikes, params.intensity, seed);
    ifft3_magnitude(&k)
}

/// Noise model selector.
#[derive(Clone, Debug, PartialEq)]
pub enum NoiseKind {
    Gaussian { sigma: f64 },
    Rician { sigma: f64 },
    Speckle { sigma: f64 },
    SaltPepper { density: f64 },
}

/// A parsed noise directive plus the seed that keys its random stream.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSpec {
    pub kind: NoiseKind,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn gaussian(sigma: f64) -> Self {
        NoiseSpec { kind: NoiseKind::Gaussian { sigma }, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Parses the `kind:param` text form, e.g. `gaussian:0.10`,
    /// `rician:0.05`, `speckle:0.2`, `saltpepper:0.1`. Seed defaults to 0.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |reason: &str| Error::BadSpecText {
            text: text.to_string(),
            reason: reason.to_string(),
        };
        let (name, arg) = match text.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (text, None),
        };
        let value = |what: &str| -> Result<f64> {
            let raw = arg.ok_or_else(|| bad(&format!("missing {what}")))?;
            let x: f64 = raw
                .parse()
                .map_err(|_| bad(&format!("{what} `{raw}` is not a number")))?;
            if !x.is_finite() {
                return Err(bad(&format!("{what} must be finite")));
            }
            Ok(x)
        };
        let kind = match name {
            "gaussian" => {
                let sigma = value("sigma")?;
                if sigma < 0.0 {
                    return Err(bad("sigma must be >= 0"));
                }
                NoiseKind::Gaussian { sigma }
            }
            "rician" => {
                let sigma = value("sigma")?;
                if sigma < 0.0 {
                    return Err(bad("sigma must be >= 0"));
                }
                NoiseKind::Rician { sigma }
            }
            "speckle" => {
                let sigma = value("sigma")?;
                if sigma < 0.0 {
                    return Err(bad("sigma must be >= 0"));
                }
                NoiseKind::Speckle { sigma }
            }
            "saltpepper" => {
                let density = value("density")?;
                if !(0.0..=1.0).contains(&density) {
                    return Err(bad("density must lie in [0, 1]"));
                }
                NoiseKind::SaltPepper { density }
            }
            other => return Err(bad(&format!("unknown noise kind `{other}`"))),
        };
        Ok(NoiseSpec { kind, seed: 0 })
    }

    /// Applies this noise model with the spec's seed.
    pub fn apply(&self, v: &Volume) -> Volume {
        match self.kind {
            NoiseKind::Gaussian { sigma } => add_gaussian(v, sigma, self.seed),
            NoiseKind::Rician { sigma } => add_rician(v, sigma, self.seed),
            NoiseKind::Speckle { sigma } => add_speckle(v, sigma, self.seed),
            NoiseKind::SaltPepper { density } => add_salt_pepper(v, density, self.seed),
        }
    }
}

impl std::fmt::Display for NoiseSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            NoiseKind::Gaussian { sigma } => write!(f, "gaussian:{sigma}"),
            NoiseKind::Rician { sigma } => write!(f, "rician:{sigma}"),
            NoiseKind::Speckle { sigma } => write!(f, "speckle:{sigma}"),
            NoiseKind::SaltPepper { density } => write!(f, "saltpepper:{density}"),
        }
    }
}

/// Artifact model selector.
#[derive(Clone, Debug, PartialEq)]
pub enum ArtifactKind {
    None,
    Gibbs { alpha: f64 },
    Motion(MotionParams),
    Ghosting(GhostingParams),
    Spike(SpikeParams),
}

/// A parsed artifact directive plus the seed that keys its random stream.
#[derive(Clone, Debug, PartialEq)]
pub struct ArtifactSpec {
    pub kind: ArtifactKind,
    pub seed: u64,
}

impl ArtifactSpec {
    pub fn none() -> Self {
        ArtifactSpec { kind: ArtifactKind::None, seed: 0 }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Parses the artifact text forms: `none`, `gibbs:0.7`,
    /// `motion[:default]`, `ghosting[:g,s,axis]`, `spike[:n,intensity]`.
    /// Bare `ghosting`/`spike` keep their default parameter ranges; the
    /// comma forms pin exact values. Seed defaults to 0.
    pub fn parse(text: &str) -> Result<Self> {
        let bad = |reason: String| Error::BadSpecText {
            text: text.to_string(),
            reason,
        };
        let (name, arg) = match text.split_once(':') {
            Some((n, a)) => (n, Some(a)),
            None => (text, None),
        };
        let kind = match (name, arg) {
            ("none", None) => ArtifactKind::None,
            ("gibbs", Some(a)) => {
                let alpha: f64 = a
                    .parse()
                    .map_err(|_| bad(format!("alpha `{a}` is not a number")))?;
                if !(0.0..1.0).contains(&alpha) {
                    return Err(bad("alpha must lie in [0, 1)".to_string()));
                }
                ArtifactKind::Gibbs { alpha }
            }
            ("gibbs", None) => return Err(bad("gibbs needs `:alpha`".to_string())),
            ("motion", None) | ("motion", Some("default")) => {
                ArtifactKind::Motion(MotionParams::default())
            }
            ("motion", Some(other)) => {
                return Err(bad(format!("unknown motion form `{other}`")))
            }
            ("ghosting", None) => ArtifactKind::Ghosting(GhostingParams::default()),
            ("ghosting", Some(a)) => {
                let parts: Vec<&str> = a.split(',').collect();
                if parts.len() != 3 {
                    return Err(bad("ghosting takes `g,s,axis`".to_string()));
                }
                let g: u32 = parts[0]
                    .parse()
                    .map_err(|_| bad(format!("ghost period `{}` is not an integer", parts[0])))?;
                if g == 0 {
                    return Err(bad("ghost period must be >= 1".to_string()));
                }
                let s: f64 = parts[1]
                    .parse()
                    .map_err(|_| bad(format!("intensity `{}` is not a number", parts[1])))?;
                if !(0.0..=1.0).contains(&s) {
                    return Err(bad("intensity must lie in [0, 1]".to_string()));
                }
                let axis: usize = parts[2]
                    .parse()
                    .map_err(|_| bad(format!("axis `{}` is not an integer", parts[2])))?;
                if axis > 2 {
                    return Err(bad("axis must be 0, 1 or 2".to_string()));
                }
                ArtifactKind::Ghosting(GhostingParams {
                    num_ghosts: (g, g),
                    intensity: (s, s),
                    axis,
                })
            }
            ("spike", None) => ArtifactKind::Spike(SpikeParams::default()),
            ("spike", Some(a)) => {
                let parts: Vec<&str> = a.split(',').collect();
                if parts.len() != 2 {
                    return Err(bad("spike takes `n,intensity`".to_string()));
                }
                let n: usize = parts[0]
                    .parse()
                    .map_err(|_| bad(format!("spike count `{}` is not an integer", parts[0])))?;
                if n == 0 {
                    return Err(bad("spike count must be >= 1".to_string()));
                }
                let intensity: f64 = parts[1]
                    .parse()
                    .map_err(|_| bad(format!("intensity `{}` is not a number", parts[1])))?;
                if !(intensity > 0.0) || !intensity.is_finite() {
                    return Err(bad("intensity must be positive".to_string()));
                }
                ArtifactKind::Spike(SpikeParams { num_spikes: n, intensity })
            }
            (other, _) => return Err(bad(format!("unknown artifact kind `{other}`"))),
        };
        Ok(ArtifactSpec { kind, seed: 0 })
    }

    /// Applies this artifact with the spec's seed.
    pub fn apply(&self, v: &Volume) -> Result<Volume> {
        match &self.kind {
            ArtifactKind::None => Ok(v.clone()),
            ArtifactKind::Gibbs { alpha } => apply_gibbs(v, *alpha),
            ArtifactKind::Motion(p) => Ok(apply_motion(v, p, self.seed)),
            ArtifactKind::Ghosting(p) => Ok(apply_ghosting(v, p, self.seed)),
            ArtifactKind::Spike(p) => Ok(apply_spike(v, p, self.seed)),
        }
    }
}

impl std::fmt::Display for ArtifactSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.kind {
            ArtifactKind::None => write!(f, "none"),
            ArtifactKind::Gibbs { alpha } => write!(f, "gibbs:{alpha}"),
            ArtifactKind::Motion(_) => write!(f, "motion:default"),
            ArtifactKind::Ghosting(p) => {
                if p.num_ghosts.0 == p.num_ghosts.1 && p.intensity.0 == p.intensity.1 {
                    write!(f, "ghosting:{},{},{}", p.num_ghosts.0, p.intensity.0, p.axis)
                } else {
                    write!(f, "ghosting")
                }
            }
            ArtifactKind::Spike(p) => write!(f, "spike:{},{}", p.num_spikes, p.intensity),
        }
    }
}

/// Artifact first, then noise, each from its own seeded stream. The
/// composition is bit-identical to calling the two stages by hand with the
/// same seeds.
pub fn corrupt(v: &Volume, artifact: &ArtifactSpec, noise: &NoiseSpec) -> Result<Volume> {
    let staged = artifact.apply(v)?;
    Ok(noise.apply(&staged))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phantom::{make_phantom, PhantomKind};
    use crate::volume::stats;

    fn phantom64(seed: u64) -> Volume {
        make_phantom([64, 64, 64], PhantomKind::Ellipsoids, seed).unwrap()
    }

    #[test]
    fn gaussian_moments_and_zero_sigma() {
        let z = Volume::zeros([64, 64, 64]);
        let n = add_gaussian(&z, 0.1, 3);
        let s = stats(&n);
        assert!(s.mean.abs() < 0.002, "mean {}", s.mean);
        assert!((s.std - 0.1).abs() < 0.002, "std {}", s.std);
        let v = phantom64(0);
        let same = add_gaussian(&v, 0.0, 3);
        assert_eq!(same.data(), v.data());
    }

    #[test]
    fn rician_rayleigh_floor_and_bias() {
        // zero signal: Rayleigh mean sigma * sqrt(pi/2)
        let z = Volume::zeros([64, 64, 64]);
        let r = add_rician(&z, 0.1, 5);
        let s = stats(&r);
        assert!((s.mean - 0.1253).abs() < 0.003, "rayleigh mean {}", s.mean);
        assert!(s.min >= 0.0);
        // bright signal: mean approaches v + sigma^2 / (2 v)
        let c = Volume::filled([64, 64, 64], 0.8);
        let r = add_rician(&c, 0.05, 5);
        let s = stats(&r);
        assert!((s.mean - 0.8016).abs() < 0.002, "rician mean {}", s.mean);
    }

    #[test]
    fn speckle_scales_with_signal() {
        let c = Volume::filled([64, 64, 64], 0.5);
        let n = add_speckle(&c, 0.2, 7);
        let s = stats(&n);
        assert!((s.std - 0.1).abs() < 0.003, "std {}", s.std);
        let z = Volume::zeros([16, 16, 16]);
        let n = add_speckle(&z, 0.5, 7);
        assert_eq!(n.max_abs(), 0.0);
    }

    #[test]
    fn salt_pepper_replacement_fractions() {
        let c = Volume::filled([64, 64, 64], 0.5);
        let full = add_salt_pepper(&c, 1.0, 9);
        let ones = full.data().iter().filter(|&&x| x == 1.0).count();
        let zeros = full.data().iter().filter(|&&x| x == 0.0).count();
        assert_eq!(ones + zeros, full.len());
        let frac = ones as f64 / full.len() as f64;
        assert!((frac - 0.5).abs() < 0.01, "ones fraction {frac}");

        let light = add_salt_pepper(&c, 0.1, 9);
        let changed = light.data().iter().filter(|&&x| x != 0.5).count();
        let frac = changed as f64 / light.len() as f64;
        assert!((frac - 0.1).abs() < 0.005, "changed fraction {frac}");

        let none = add_salt_pepper(&c, 0.0, 9);
        assert_eq!(none.data(), c.data());
    }

    #[test]
    fn all_simulators_are_seed_reproducible() {
        let v = phantom64(1);
        let pairs: Vec<(Volume, Volume)> = vec![
            (add_gaussian(&v, 0.1, 42), add_gaussian(&v, 0.1, 42)),
            (add_rician(&v, 0.1, 42), add_rician(&v, 0.1, 42)),
            (add_speckle(&v, 0.2, 42), add_speckle(&v, 0.2, 42)),
            (add_salt_pepper(&v, 0.1, 42), add_salt_pepper(&v, 0.1, 42)),
            (
                apply_motion(&v, &MotionParams::default(), 42),
                apply_motion(&v, &MotionParams::default(), 42),
            ),
            (
                apply_ghosting(&v, &GhostingParams::default(), 42),
                apply_ghosting(&v, &GhostingParams::default(), 42),
            ),
            (
                apply_spike(&v, &SpikeParams::default(), 42),
                apply_spike(&v, &SpikeParams::default(), 42),
            ),
            (
                apply_gibbs(&v, 0.6).unwrap(),
                apply_gibbs(&v, 0.6).unwrap(),
            ),
        ];
        for (i, (a, b)) in pairs.iter().enumerate() {
            assert_eq!(a.data(), b.data(), "simulator {i} not reproducible");
        }
        // different seeds move the randomized ones
        assert_ne!(
            add_gaussian(&v, 0.1, 1).data(),
            add_gaussian(&v, 0.1, 2).data()
        );
    }

    #[test]
    fn gibbs_identity_dc_and_cutoff() {
        let v = phantom64(2);
        let same = apply_gibbs(&v, 0.0).unwrap();
        let err = same.sub(&v).unwrap().max_abs();
        assert!(err < 1e-6, "alpha 0 error {err}");

        let mut k = fft3(&v);
        let dc_before = k.dc();
        gibbs_filter_kspace(&mut k, 0.7);
        assert_eq!(k.dc(), dc_before);
        let cutoff = 0.3 * 3.0_f64.sqrt();
        let [l, w, h] = k.dims();
        for kk in 0..h {
            for jj in 0..w {
                for ii in 0..l {
                    if k.normalized_radius(ii, jj, kk) > cutoff {
                        assert_eq!(k.get(ii, jj, kk).norm(), 0.0);
                    }
                }
            }
        }
        // mean preserved before magnitude extraction
        let blurred = apply_gibbs(&v, 0.7).unwrap();
        assert!(blurred.sub(&v).unwrap().max_abs() > 0.01, "filter did nothing");
    }

    #[test]
    fn gibbs_step_edge_overshoot() {
        // sharp box: truncation must ring with visible overshoot
        let v = Volume::from_fn([48, 48, 48], |i, j, k| {
            if (12..36).contains(&i) && (12..36).contains(&j) && (12..36).contains(&k) {
                0.8
            } else {
                0.0
            }
        });
        let ringed = apply_gibbs(&v, 0.7).unwrap();
        let overshoot = stats(&ringed).max - 0.8;
        assert!(overshoot > 0.02, "overshoot {overshoot}");
    }

    #[test]
    fn motion_zero_transforms_is_identity() {
        let v = phantom64(3);
        let p = MotionParams { num_transforms: 0, ..MotionParams::default() };
        let out = apply_motion(&v, &p, 11);
        let err = out.sub(&v).unwrap().max_abs();
        assert!(err < 1e-6, "degenerate motion error {err}");
    }

    #[test]
    fn motion_default_corrupts_but_keeps_scale() {
        let v = phantom64(3);
        let out = apply_motion(&v, &MotionParams::default(), 11);
        assert!(out.sub(&v).unwrap().max_abs() > 0.01);
        // DC comes from the untransformed slab, so the pre-magnitude mean is
        // exactly the clean mean; |z| >= Re(z) means rectification can only
        // raise it, and ghost energy should not multiply it out of scale.
        let (sc, so) = (stats(&v), stats(&out));
        assert!(so.mean >= sc.mean - 1e-9, "mean dropped: {} -> {}", sc.mean, so.mean);
        assert!(so.mean <= 3.0 * sc.mean, "mean exploded: {} -> {}", sc.mean, so.mean);
    }

    #[test]
    fn ghosting_replicas_at_expected_lag() {
        let v = phantom64(4);
        let p = GhostingParams { num_ghosts: (4, 4), intensity: (1.0, 1.0), axis: 1 };
        let out = apply_ghosting(&v, &p, 13);
        // circular autocorrelation along y of the mean-removed volume
        let m = stats(&out).mean;
        let [l, w, h] = out.dims();
        let corr = |lag: usize| -> f64 {
            let mut acc = 0.0;
            for k in 0..h {
                for j in 0..w {
                    for i in 0..l {
                        let a = out.get(i, j, k) - m;
                        let b = out.get(i, (j + lag) % w, k) - m;
                        acc += a * b;
                    }
                }
            }
            acc
        };
        let r0 = corr(0);
        let r = corr(w / 4);
        assert!(r / r0 > 0.1, "replica correlation {}", r / r0);
        // zero intensity leaves the volume alone
        let p0 = GhostingParams { num_ghosts: (4, 4), intensity: (0.0, 0.0), axis: 1 };
        let same = apply_ghosting(&v, &p0, 13);
        assert!(same.sub(&v).unwrap().max_abs() < 1e-6);
    }

    #[test]
    fn spike_magnitude_contract_and_stripes() {
        let v = phantom64(5);
        let mut k = fft3(&v);
        let dc = k.dc().norm();
        let locs = spike_kspace(&mut k, 1, 0.5, 17);
        assert_eq!(locs.len(), 1);
        let [i, j, kk] = locs[0];
        assert_ne!(locs[0], [0, 0, 0]);
        let got = k.get(i, j, kk).norm();
        assert!((got - 0.5 * dc).abs() < 1e-9 * dc, "spike magnitude {got}");
        // the mirror carries the conjugate, keeping the image real
        let [l, w, h] = k.dims();
        let mirror = k.get((l - i) % l, (w - j) % w, (h - kk) % h);
        let diff = (mirror - k.get(i, j, kk).conj()).norm();
        assert!(diff < 1e-9 * dc, "mirror asymmetry {diff}");

        // raised cosine stripe on a flat volume: mean exactly preserved
        // (the spike is orthogonal to DC), strong spatial modulation
        let c = Volume::filled([32, 32, 32], 0.5);
        let out = apply_spike(&c, &SpikeParams { num_spikes: 1, intensity: 0.5 }, 17);
        let s = stats(&out);
        assert!((s.mean - 0.5).abs() < 1e-9, "mean {}", s.mean);
        assert!(s.std > 0.1, "stripe std {}", s.std);
        assert!(s.min >= -1e-9, "raised cosine dips negative: {}", s.min);
    }

    #[test]
    fn corrupt_composes_bit_exactly() {
        let v = phantom64(6);
        let artifact = ArtifactSpec::parse("gibbs:0.7").unwrap().with_seed(21);
        let noise = NoiseSpec::parse("gaussian:0.1").unwrap().with_seed(21);
        let combined = corrupt(&v, &artifact, &noise).unwrap();
        let manual = add_gaussian(&apply_gibbs(&v, 0.7).unwrap(), 0.1, 21);
        assert_eq!(combined.data(), manual.data());

        let id = corrupt(
            &v,
            &ArtifactSpec::none(),
            &NoiseSpec::gaussian(0.0),
        )
        .unwrap();
        assert_eq!(id.data(), v.data());
    }

    #[test]
    fn spec_parsing_round_trips_and_rejects() {
        for text in ["gaussian:0.1", "rician:0.05", "speckle:0.2", "saltpepper:0.1"] {
            let spec = NoiseSpec::parse(text).unwrap();
            assert_eq!(spec.to_string(), text);
        }
        for text in [
            "none",
            "gibbs:0.7",
            "motion:default",
            "ghosting:4,0.8,1",
            "spike:1,0.5",
        ] {
            let spec = ArtifactSpec::parse(text).unwrap();
            let rendered = spec.to_string();
            assert_eq!(ArtifactSpec::parse(&rendered).unwrap().kind, spec.kind);
        }
        assert!(NoiseSpec::parse("gaussian").is_err());
        assert!(NoiseSpec::parse("gaussian:-0.1").is_err());
        assert!(NoiseSpec::parse("poisson:0.1").is_err());
        assert!(NoiseSpec::parse("saltpepper:1.5").is_err());
        assert!(ArtifactSpec::parse("gibbs:1.0").is_err());
        assert!(ArtifactSpec::parse("ghosting:0,0.5,1").is_err());
        assert!(ArtifactSpec::parse("ghosting:4,0.5,3").is_err());
        assert!(ArtifactSpec::parse("spike:0,0.5").is_err());
        assert!(ArtifactSpec::parse("wobble:1").is_err());
    }
}
