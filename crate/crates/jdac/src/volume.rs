//! Dense volumetric scalar fields and their finite-difference machinery.
//!
//! A [`Volume`] is an L x W x H grid of f64 intensities stored x-fastest:
//! linear index `i + L*(j + W*k)`. Volumes carry voxel spacing in mm (used by
//! physically parameterized simulators) and a `residual` flag distinguishing
//! signed residual/noise fields from images.
//!
//! The gradient operator here is the estimation workhorse: central
//! differences halve the variance of i.i.d. noise, so
//! `pooled_std(gradient(noise_sigma)) -> sigma / sqrt(2)` as the grid grows.
//! Boundary voxels use one-sided differences scaled by the same 1/2 factor
//! (equivalently, central differences with clamped indexing), which keeps the
//! noise response exactly sigma^2/2 at every voxel instead of only in the
//! interior. Downstream calibration relies on that constant being exact.

use crate::error::{Error, Result};

/// Dense 3D scalar field, x-fastest layout.
#[derive(Clone, Debug, PartialEq)]
pub struct Volume {
    dims: [usize; 3],
    spacing: [f64; 3],
    residual: bool,
    data: Vec<f64>,
}

impl Volume {
    /// Builds a volume from raw data; fails if the payload length does not
    /// match `dims` or the metadata is degenerate.
    pub fn new(dims: [usize; 3], spacing: [f64; 3], data: Vec<f64>) -> Result<Self> {
        if dims.iter().any(|&d| d == 0) {
            return Err(Error::InvalidVolume(format!("zero extent in dims {dims:?}")));
        }
        if spacing.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidVolume(format!("non-positive spacing {spacing:?}")));
        }
        let n = dims[0] * dims[1] * dims[2];
        if data.len() != n {
            return Err(Error::InvalidVolume(format!(
                "payload length {} does not match dims {:?} ({} voxels)",
                data.len(),
                dims,
                n
            )));
        }
        Ok(Volume { dims, spacing, residual: false, data })
    }

    /// All-zero volume with unit spacing.
    pub fn zeros(dims: [usize; 3]) -> Self {
        Volume::filled(dims, 0.0)
    }

    /// Constant volume with unit spacing.
    pub fn filled(dims: [usize; 3], value: f64) -> Self {
        let n = dims[0].max(1) * dims[1].max(1) * dims[2].max(1);
        Volume {
            dims,
            spacing: [1.0; 3],
            residual: false,
            data: vec![value; n],
        }
    }

    /// Builds a volume by evaluating `f(i, j, k)` at every voxel.
    pub fn from_fn(dims: [usize; 3], mut f: impl FnMut(usize, usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(dims[0] * dims[1] * dims[2]);
        for k in 0..dims[2] {
            for j in 0..dims[1] {
                for i in 0..dims[0] {
                    data.push(f(i, j, k));
                }
            }
        }
        Volume { dims, spacing: [1.0; 3], residual: false, data }
    }

    pub fn dims(&self) -> [usize; 3] {
        self.dims
    }

    /// Voxel spacing in mm per axis.
    pub fn spacing(&self) -> [f64; 3] {
        self.spacing
    }

    pub fn with_spacing(mut self, spacing: [f64; 3]) -> Result<Self> {
        if spacing.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidVolume(format!("non-positive spacing {spacing:?}")));
        }
        self.spacing = spacing;
        Ok(self)
    }

    /// True for signed residual/noise fields (gradients, noise predictions).
    pub fn residual(&self) -> bool {
        self.residual
    }

    pub fn with_residual(mut self, residual: bool) -> Self {
        self.residual = residual;
        self
    }

    pub fn set_residual(&mut self, residual: bool) {
        self.residual = residual;
    }

    /// Number of voxels.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Linear index of voxel (i, j, k), x-fastest.
    #[inline]
    pub fn idx(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.dims[0] * (j + self.dims[1] * k)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.data[self.idx(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, value: f64) {
        let idx = self.idx(i, j, k);
        self.data[idx] = value;
    }

    pub fn same_shape(&self, other: &Volume) -> bool {
        self.dims == other.dims
    }

    fn shape_check(&self, other: &Volume, what: &str) -> Result<()> {
        if !self.same_shape(other) {
            return Err(Error::DimMismatch(format!(
                "{what}: {:?} vs {:?}",
                self.dims, other.dims
            )));
        }
        Ok(())
    }

    /// New volume with `f` applied voxelwise; metadata is preserved.
    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Volume {
        Volume {
            dims: self.dims,
            spacing: self.spacing,
            residual: self.residual,
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Voxelwise combination of two same-shape volumes.
    pub fn zip_map(&self, other: &Volume, f: impl Fn(f64, f64) -> f64) -> Result<Volume> {
        self.shape_check(other, "zip_map")?;
        Ok(Volume {
            dims: self.dims,
            spacing: self.spacing,
            residual: self.residual,
            data: self
                .data
                .iter()
                .zip(other.data.iter())
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Volume) -> Result<Volume> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Volume) -> Result<Volume> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Volume {
        self.map(|v| c * v)
    }

    /// Convex blend `self*(1-t) + other*t`.
    pub fn blend(&self, other: &Volume, t: f64) -> Result<Volume> {
        self.zip_map(other, |a, b| a * (1.0 - t) + b * t)
    }

    pub fn clamped(&self, lo: f64, hi: f64) -> Volume {
        self.map(|v| v.clamp(lo, hi))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |m, &v| m.max(v.abs()))
    }
}

/// Summary statistics of a volume.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VolumeStats {
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
}

/// Min / max / mean / population std over all voxels.
pub fn stats(v: &Volume) -> VolumeStats {
    let n = v.len() as f64;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for &x in v.data() {
        min = min.min(x);
        max = max.max(x);
        sum += x;
        sum_sq += x * x;
    }
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    VolumeStats { min, max, mean, std: var.sqrt() }
}

/// Per-axis finite-difference field of a volume.
///
/// Components share the parent's dims and spacing and are flagged residual.
/// Differences are in intensity units per voxel; spacing is not divided out.
#[derive(Clone, Debug)]
pub struct GradientField {
    pub dx: Volume,
    pub dy: Volume,
    pub dz: Volume,
}

impl GradientField {
    pub fn components(&self) -> [&Volume; 3] {
        [&self.dx, &self.dy, &self.dz]
    }

    /// Per-voxel Euclidean norm of the three components.
    pub fn magnitude(&self) -> Volume {
        let mut out = self.dx.clone();
        for (m, (&a, &b)) in out
            .data_mut()
            .iter_mut()
            .zip(self.dy.data().iter().zip(self.dz.data().iter()))
        {
            *m = (*m * *m + a * a + b * b).sqrt();
        }
        out.set_residual(false);
        out
    }
}

/// Central differences along each axis, halved one-sided at the faces.
///
/// Interior: `(v[i+1] - v[i-1]) / 2`. Faces clamp the out-of-range neighbor,
/// so the low face is `(v[1] - v[0]) / 2` and the high face
/// `(v[n-1] - v[n-2]) / 2`. On a linear ramp every interior voxel reports the
/// exact slope; on i.i.d. noise every voxel (faces included) responds with
/// variance sigma^2 / 2.
pub fn gradient(v: &Volume) -> Result<GradientField> {
    let [l, w, h] = v.dims();
    if l < 3 || w < 3 || h < 3 {
        return Err(Error::DimensionTooSmall(format!(
            "gradient needs dims >= 3 per axis, got {:?}",
            v.dims()
        )));
    }
    let make = || {
        let mut g = Volume::zeros(v.dims());
        g = g.with_spacing(v.spacing()).expect("valid spacing");
        g.set_residual(true);
        g
    };
    let mut dx = make();
    let mut dy = make();
    let mut dz = make();
    for k in 0..h {
        for j in 0..w {
            for i in 0..l {
                let ip = (i + 1).min(l - 1);
                let im = i.saturating_sub(1);
                let jp = (j + 1).min(w - 1);
                let jm = j.saturating_sub(1);
                let kp = (k + 1).min(h - 1);
                let km = k.saturating_sub(1);
                dx.set(i, j, k, (v.get(ip, j, k) - v.get(im, j, k)) * 0.5);
                dy.set(i, j, k, (v.get(i, jp, k) - v.get(i, jm, k)) * 0.5);
                dz.set(i, j, k, (v.get(i, j, kp) - v.get(i, j, km)) * 0.5);
            }
        }
    }
    Ok(GradientField { dx, dy, dz })
}

/// Population std over the concatenation of all three gradient components.
pub fn pooled_std(g: &GradientField) -> f64 {
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    let mut n = 0usize;
    for comp in g.components() {
        for &x in comp.data() {
            sum += x;
            sum_sq += x * x;
        }
        n += comp.len();
    }
    let n = n as f64;
    let mean = sum / n;
    (sum_sq / n - mean * mean).max(0.0).sqrt()
}

/// Separable Gaussian smoothing with kernel std `sigma_voxels`, truncated at
/// three stds. Boundaries renormalize the in-bounds kernel mass, so constants
/// pass through unchanged. `sigma_voxels` small enough that the truncation
/// radius is zero yields a copy.
pub fn gaussian_smooth(v: &Volume, sigma_voxels: f64) -> Volume {
    let radius = (3.0 * sigma_voxels).floor() as usize;
    if radius == 0 || sigma_voxels <= 0.0 {
        return v.clone();
    }
    let kernel = gaussian_kernel(radius, sigma_voxels);
    let data = separable_normalized(v.data(), v.dims(), &kernel);
    let mut out = Volume::new(v.dims(), v.spacing(), data).expect("shape preserved");
    out.set_residual(v.residual());
    out
}

/// Symmetric Gaussian taps for offsets -radius..=radius, normalized to sum 1.
pub(crate) fn gaussian_kernel(radius: usize, sigma: f64) -> Vec<f64> {
    let mut k: Vec<f64> = (-(radius as isize)..=radius as isize)
        .map(|d| (-((d * d) as f64) / (2.0 * sigma * sigma)).exp())
        .collect();
    let s: f64 = k.iter().sum();
    for w in &mut k {
        *w /= s;
    }
    k
}

/// Applies an odd-length kernel along each axis in turn, renormalizing by the
/// in-bounds weight sum at every position. Equivalent to correlating with the
/// 3D product kernel cropped to the grid and renormalized per voxel.
pub(crate) fn separable_normalized(data: &[f64], dims: [usize; 3], kernel: &[f64]) -> Vec<f64> {
    assert!(kernel.len() % 2 == 1, "kernel length must be odd");
    let radius = (kernel.len() / 2) as isize;
    let [l, w, h] = dims;
    let strides = [1usize, l, l * w];
    let lens = [l, w, h];
    let mut cur = data.to_vec();
    let mut next = vec![0.0; cur.len()];
    for axis in 0..3 {
        let n = lens[axis] as isize;
        let stride = strides[axis];
        // all lines along `axis`: iterate the other two axes
        let (a, b) = match axis {
            0 => (1, 2),
            1 => (0, 2),
            _ => (0, 1),
        };
        for vb in 0..lens[b] {
            for va in 0..lens[a] {
                let base = va * strides[a] + vb * strides[b];
                for p in 0..n {
                    let mut acc = 0.0;
                    let mut wsum = 0.0;
                    for (t, &kw) in kernel.iter().enumerate() {
                        let q = p + (t as isize - radius);
                        if q < 0 || q >= n {
                            continue;
                        }
                        acc += kw * cur[base + q as usize * stride];
                        wsum += kw;
                    }
                    next[base + p as usize * stride] = acc / wsum;
                }
            }
        }
        std::mem::swap(&mut cur, &mut next);
    }
    cur
}
