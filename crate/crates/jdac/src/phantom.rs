//! Synthetic piecewise-smooth test volumes.
//!
//! Three families: random nested ellipsoids (MR-ish anatomy stand-in), a
//! smoothed checkerboard embedded in a zero background, and a fixed
//! Shepp-Logan style head. All are deterministic in (dims, kind, seed),
//! keep intensities in [0, 1], and leave the outer background at exactly 0
//! so spectral simulators see a compactly supported object.
//!
//! Boundaries get one fixed light Gaussian smoothing pass; edges stay sharp
//! on the voxel scale while the clean-volume gradient std stays well below
//! the restoration engine's stop threshold.

use crate::error::{Error, Result};
use crate::rng::stream;
use crate::volume::{gaussian_smooth, Volume};
use rand::Rng;

/// Edge-softening std in voxels applied to every phantom.
const EDGE_SMOOTH_SIGMA: f64 = 1.2;

/// Phantom families understood by [`make_phantom`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PhantomKind {
    Ellipsoids,
    CheckerSmooth,
    SheppLoganLike,
}

impl std::str::FromStr for PhantomKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ellipsoids" => Ok(PhantomKind::Ellipsoids),
            "checker-smooth" => Ok(PhantomKind::CheckerSmooth),
            "shepp-logan-like" => Ok(PhantomKind::SheppLoganLike),
            other => Err(Error::UnknownPhantomKind(other.to_string())),
        }
    }
}

impl std::fmt::Display for PhantomKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            PhantomKind::Ellipsoids => "ellipsoids",
            PhantomKind::CheckerSmooth => "checker-smooth",
            PhantomKind::SheppLoganLike => "shepp-logan-like",
        };
        f.write_str(name)
    }
}

/// Deterministic phantom volume. Requires dims >= 32 per axis; the
/// structured kinds need room for interior features plus a zero margin.
pub fn make_phantom(dims: [usize; 3], kind: PhantomKind, seed: u64) -> Result<Volume> {
    if dims.iter().any(|&d| d < 32) {
        return Err(Error::DimensionTooSmall(format!(
            "phantoms need dims >= 32 per axis, got {dims:?}"
        )));
    }
    let v = match kind {
        PhantomKind::Ellipsoids => ellipsoids(dims, seed),
        PhantomKind::CheckerSmooth => checker_smooth(dims, seed),
        PhantomKind::SheppLoganLike => shepp_logan_like(dims),
    };
    Ok(gaussian_smooth(&v.clamped(0.0, 1.0), EDGE_SMOOTH_SIGMA))
}

struct Ellipsoid {
    center: [f64; 3],
    semi: [f64; 3],
    delta: f64,
}

impl Ellipsoid {
    fn contains(&self, p: [f64; 3]) -> bool {
        let mut q = 0.0;
        for a in 0..3 {
            let t = (p[a] - self.center[a]) / self.semi[a];
            q += t * t;
        }
        q <= 1.0
    }
}

fn ellipsoids(dims: [usize; 3], seed: u64) -> Volume {
    let mut rng = stream(seed, "phantom:ellipsoids");
    let nd = [dims[0] as f64, dims[1] as f64, dims[2] as f64];
    let mut center = [0.0; 3];
    for a in 0..3 {
        center[a] = 0.5 * (nd[a] - 1.0) + rng.random_range(-1.0..1.0) * nd[a] / 16.0;
    }
    let mut semi = [0.0; 3];
    for a in 0..3 {
        semi[a] = rng.random_range(0.20..0.28) * nd[a];
    }
    let base = rng.random_range(0.35..0.50);
    let mut shapes = vec![Ellipsoid { center, semi, delta: base }];
    let inner_count = rng.random_range(3..=5usize);
    for _ in 0..inner_count {
        let mut c = [0.0; 3];
        for a in 0..3 {
            c[a] = center[a] + rng.random_range(-0.55..0.55) * semi[a];
        }
        let mut s = [0.0; 3];
        for a in 0..3 {
            s[a] = rng.random_range(0.06..0.14) * nd[a];
        }
        let mag = rng.random_range(0.08..0.18);
        let sign = if rng.random_range(0..2) == 0 { 1.0 } else { -1.0 };
        shapes.push(Ellipsoid { center: c, semi: s, delta: sign * mag });
    }
    Volume::from_fn(dims, |i, j, k| {
        let p = [i as f64, j as f64, k as f64];
        let mut val = 0.0;
        for e in &shapes {
            if e.contains(p) {
                val += e.delta;
            }
        }
        val
    })
}

fn checker_smooth(dims: [usize; 3], seed: u64) -> Volume {
    let mut rng = stream(seed, "phantom:checker-smooth");
    let lo = 0.35 + rng.random_range(-0.05..0.05);
    let hi = 0.75 + rng.random_range(-0.05..0.05);
    let mut cell = [0usize; 3];
    let mut phase = [0usize; 3];
    for a in 0..3 {
        cell[a] = (dims[a] / 4).max(8);
        phase[a] = rng.random_range(0..cell[a]);
    }
    // pattern lives inside an 8-voxel zero margin
    let margin = 8usize;
    Volume::from_fn(dims, |i, j, k| {
        let p = [i, j, k];
        for a in 0..3 {
            if p[a] < margin || p[a] + margin >= dims[a] {
                return 0.0;
            }
        }
        let mut parity = 0usize;
        for a in 0..3 {
            parity += (p[a] + phase[a]) / cell[a];
        }
        if parity % 2 == 0 {
            lo
        } else {
            hi
        }
    })
}

/// (delta, semi-axes abc, center xyz, rotation about z in degrees), in a
/// [-1, 1]^3 box. Classic ten-ellipsoid head layout with MR-friendly
/// contrast steps; geometry shrunk so smoothing cannot reach the faces.
const SHEPP_ELLIPSOIDS: [([f64; 8], f64); 10] = [
    ([0.6900, 0.9200, 0.810, 0.00, 0.000, 0.00, 0.0, 0.0], 1.0),
    ([0.6624, 0.8740, 0.780, 0.00, -0.0184, 0.00, 0.0, 0.0], -0.8),
    ([0.1100, 0.3100, 0.220, 0.22, 0.000, 0.00, -18.0, 0.0], -0.2),
    ([0.1600, 0.4100, 0.280, -0.22, 0.000, 0.00, 18.0, 0.0], -0.2),
    ([0.2100, 0.2500, 0.410, 0.00, 0.350, -0.15, 0.0, 0.0], 0.1),
    ([0.0460, 0.0460, 0.050, 0.00, 0.100, 0.25, 0.0, 0.0], 0.1),
    ([0.0460, 0.0460, 0.050, 0.00, -0.100, 0.25, 0.0, 0.0], 0.1),
    ([0.0460, 0.0230, 0.050, -0.08, -0.605, 0.00, 0.0, 0.0], 0.1),
    ([0.0230, 0.0230, 0.020, 0.00, -0.606, 0.00, 0.0, 0.0], 0.1),
    ([0.0230, 0.0460, 0.020, 0.06, -0.605, 0.00, 0.0, 0.0], 0.1),
];

const SHEPP_SCALE: f64 = 0.85;

fn shepp_logan_like(dims: [usize; 3]) -> Volume {
    // seed-independent anatomy; determinism in (dims, kind) alone
    let half = [
        0.5 * (dims[0] as f64 - 1.0),
        0.5 * (dims[1] as f64 - 1.0),
        0.5 * (dims[2] as f64 - 1.0),
    ];
    Volume::from_fn(dims, |i, j, k| {
        let x = (i as f64 - half[0]) / (half[0] * SHEPP_SCALE);
        let y = (j as f64 - half[1]) / (half[1] * SHEPP_SCALE);
        let z = (k as f64 - half[2]) / (half[2] * SHEPP_SCALE);
        let mut val = 0.0;
        for (p, delta) in &SHEPP_ELLIPSOIDS {
            let [a, b, c, x0, y0, z0, phi_deg, _] = *p;
            let phi = phi_deg.to_radians();
            let (dx, dy, dz) = (x - x0, y - y0, z - z0);
            let rx = phi.cos() * dx + phi.sin() * dy;
            let ry = -phi.sin() * dx + phi.cos() * dy;
            let q = (rx / a).powi(2) + (ry / b).powi(2) + (dz / c).powi(2);
            if q <= 1.0 {
                val += delta;
            }
        }
        val
    })
}
