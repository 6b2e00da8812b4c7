//! Heisenberg group structure: group law, Korányi norm, dilations, sampling
//! grids with their quadrature, the Korányi polar decomposition and a
//! finite-difference sublaplacian.
//!
//! Points of `Hⁿ = Cⁿ × R` are `(z, t)` with the group law
//! `(z,t)(w,s) = (z + w, t + s + ½ Im(z·w̄))`.
//!
//! Grids are tensor grids of cell-centred nodes. Every axis `[-L, L]` is
//! split into `N` equal cells and sampled at the cell midpoints, so the
//! quadrature is the midpoint rule (the periodic trapezoid rule). All nodes
//! of a grid therefore carry the same weight.

use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::CompositeRule;
use crate::specfun;

/// A point `(z, t)` of the Heisenberg group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    pub z: Vec<Complex64>,
    pub t: f64,
}

impl HPoint {
    pub fn new(z: Vec<Complex64>, t: f64) -> Self {
        Self { z, t }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            z: vec![Complex64::new(0.0, 0.0); n],
            t: 0.0,
        }
    }

    pub fn dim(&self) -> usize {
        self.z.len()
    }

    /// Squared Euclidean norm of the `Cⁿ` part.
    pub fn z_norm_sqr(&self) -> f64 {
        self.z.iter().map(|c| c.norm_sqr()).sum()
    }
}

/// `Im(Σ_j z_j · conj(w_j))`.
pub fn symplectic(z: &[Complex64], w: &[Complex64]) -> f64 {
    z.iter().zip(w).map(|(a, b)| (a * b.conj()).im).sum()
}

pub fn group_mul(p: &HPoint, q: &HPoint) -> Result<HPoint> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let z = p.z.iter().zip(&q.z).map(|(a, b)| a + b).collect();
    let t = p.t + q.t + 0.5 * symplectic(&p.z, &q.z);
    Ok(HPoint { z, t })
}

pub fn group_inv(p: &HPoint) -> HPoint {
    HPoint {
        z: p.z.iter().map(|c| -c).collect(),
        t: -p.t,
    }
}

/// `(|z|⁴ + t²)^{1/4}`.
pub fn koranyi_norm(p: &HPoint) -> f64 {
    let r2 = p.z_norm_sqr();
    (r2 * r2 + p.t * p.t).sqrt().sqrt()
}

/// `δ_r(z, t) = (r z, r² t)`.
pub fn dilate(r: f64, p: &HPoint) -> Result<HPoint> {
    if !(r > 0.0) || !r.is_finite() {
        return invalid(format!("dilation factor must be positive, got {r}"));
    }
    Ok(HPoint {
        z: p.z.iter().map(|c| c * r).collect(),
        t: r * r * p.t,
    })
}

/// Homogeneous dimension `Q = 2n + 2`.
pub fn homogeneous_dim(n: usize) -> usize {
    2 * n + 2
}

/// Uniform cell-centred axis on `[-extent, extent]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub extent: f64,
    pub count: usize,
}

impl Axis {
    pub fn new(extent: f64, count: usize) -> Result<Self> {
        if !(extent > 0.0) || !extent.is_finite() {
            return invalid(format!("axis extent must be positive, got {extent}"));
        }
        if count == 0 {
            return invalid("axis needs at least one node");
        }
        Ok(Self { extent, count })
    }

    pub fn step(&self) -> f64 {
        2.0 * self.extent / self.count as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.extent + (i as f64 + 0.5) * self.step()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.node(i)).collect()
    }
}

/// Tensor grid over `Cⁿ ≅ R^{2n}`; coordinate `2j` is `Re z_j`, `2j+1` is `Im z_j`.
/// The last coordinate varies fastest in the flat node index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CGrid {
    pub n: usize,
    pub axis: Axis,
}

impl CGrid {
    pub fn new(n: usize, extent: f64, count: usize) -> Result<Self> {
        if n == 0 {
            return invalid("dimension n must be at least 1");
        }
        Ok(Self {
            n,
            axis: Axis::new(extent, count)?,
        })
    }

    pub fn real_dim(&self) -> usize {
        2 * self.n
    }

    pub fn len(&self) -> usize {
        self.axis.count.pow(self.real_dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Quadrature weight of every node.
    pub fn weight(&self) -> f64 {
        self.axis.step().powi(self.real_dim() as i32)
    }

    /// Per-coordinate axis indices of a flat node index.
    pub fn multi_index(&self, mut idx: usize, out: &mut [usize]) {
        let m = self.axis.count;
        for slot in out.iter_mut().rev() {
            *slot = idx % m;
            idx /= m;
        }
    }

    pub fn coords(&self, idx: usize, out: &mut [f64]) {
        let mut mi = vec![0usize; self.real_dim()];
        self.multi_index(idx, &mut mi);
        for (o, i) in out.iter_mut().zip(mi) {
            *o = self.axis.node(i);
        }
    }

    pub fn node(&self, idx: usize) -> Vec<Complex64> {
        let mut c = vec![0.0; self.real_dim()];
        self.coords(idx, &mut c);
        c.chunks(2).map(|p| Complex64::new(p[0], p[1])).collect()
    }

    /// All node coordinates, flattened `len × 2n`.
    pub fn coordinate_table(&self) -> Vec<f64> {
        let d = self.real_dim();
        let mut out = vec![0.0; self.len() * d];
        for (i, chunk) in out.chunks_mut(d).enumerate() {
            self.coords(i, chunk);
        }
        out
    }
}

/// Grid profile as stored in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridProfile {
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "T")]
    pub t: f64,
    #[serde(rename = "N_s")]
    pub n_s: usize,
    #[serde(rename = "N_t")]
    pub n_t: usize,
}

/// Tensor grid over `Hⁿ`: the `Cⁿ` grid times a `t` axis. The `t` index varies
/// fastest, so `f(z, ·)` is contiguous in a [`SampledField`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HGrid {
    pub z: CGrid,
    pub t: Axis,
}

impl HGrid {
    pub fn new(n: usize, l: f64, t_extent: f64, n_s: usize, n_t: usize) -> Result<Self> {
        Ok(Self {
            z: CGrid::new(n, l, n_s)?,
            t: Axis::new(t_extent, n_t)?,
        })
    }

    pub fn from_profile(p: &GridProfile) -> Result<Self> {
        Self::new(p.n, p.l, p.t, p.n_s, p.n_t)
    }

    pub fn profile(&self) -> GridProfile {
        GridProfile {
            n: self.z.n,
            l: self.z.axis.extent,
            t: self.t.extent,
            n_s: self.z.axis.count,
            n_t: self.t.count,
        }
    }

    pub fn n(&self) -> usize {
        self.z.n
    }

    pub fn homogeneous_dim(&self) -> usize {
        homogeneous_dim(self.z.n)
    }

    pub fn len(&self) -> usize {
        self.z.len() * self.t.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn weight(&self) -> f64 {
        self.z.weight() * self.t.step()
    }

    /// Total quadrature mass `(2L)^{2n} · 2T`.
    pub fn volume(&self) -> f64 {
        self.weight() * self.len() as f64
    }

    pub fn index(&self, iz: usize, it: usize) -> usize {
        iz * self.t.count + it
    }

    pub fn node(&self, idx: usize) -> HPoint {
        let iz = idx / self.t.count;
        let it = idx % self.t.count;
        HPoint::new(self.z.node(iz), self.t.node(it))
    }

    /// Largest `|λ|` a `t` quadrature on this grid can resolve (Nyquist).
    pub fn lambda_band(&self) -> f64 {
        std::f64::consts::PI / self.t.step()
    }

    /// The same grid with every axis refined by `factor` (extents fixed).
    pub fn refined(&self, factor: usize) -> Self {
        let mut g = *self;
        g.z.axis.count *= factor;
        g.t.count *= factor;
        g
    }
}

/// Complex samples of a function on an [`HGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledField {
    pub grid: HGrid,
    pub values: Vec<Complex64>,
}

impl SampledField {
    pub fn new(grid: HGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: HGrid) -> Self {
        Self {
            grid,
            values: vec![Complex64::new(0.0, 0.0); grid.len()],
        }
    }

    /// Samples `f(z, t)` at every node.
    pub fn from_fn(grid: HGrid, f: impl Fn(&[Complex64], f64) -> Complex64) -> Self {
        let ts = grid.t.nodes();
        let mut values = Vec::with_capacity(grid.len());
        for iz in 0..grid.z.len() {
            let z = grid.z.node(iz);
            values.extend(ts.iter().map(|&t| f(&z, t)));
        }
        Self { grid, values }
    }

    pub fn map_nodes(&self, f: impl Fn(&HPoint, Complex64) -> Complex64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(i, &v)| f(&self.grid.node(i), v))
            .collect();
        Self {
            grid: self.grid,
            values,
        }
    }

    fn check_same_grid(&self, other: &Self) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("fields live on different grids".into()));
        }
        Ok(())
    }

    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.check_same_grid(other)?;
        let s: Complex64 = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b.conj())
            .sum();
        Ok(s * self.grid.weight())
    }

    pub fn norm_sqr(&self) -> f64 {
        self.values.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.grid.weight()
    }

    pub fn l2_norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn l1_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).sum::<f64>() * self.grid.weight()
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        let s: f64 = self.values.iter().map(|v| v.norm().powf(p)).sum();
        (s * self.grid.weight()).powf(1.0 / p)
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    pub fn scale(&self, a: Complex64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v * a).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same_grid(other)?;
        Ok(Self {
            grid: self.grid,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        })
    }

    /// `‖ |x|^α f ‖₂` with `|x|` the Korányi norm.
    pub fn weighted_l2_norm(&self, alpha: f64) -> f64 {
        let s: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(i, v)| {
                let w = koranyi_norm(&self.grid.node(i)).powf(alpha);
                (w * v.norm()).powi(2)
            })
            .sum();
        (s * self.grid.weight()).sqrt()
    }

    /// CSV with one row per node: `re_z1, im_z1, …, t, re, im`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let mut header: Vec<String> = Vec::new();
        for j in 1..=self.grid.n() {
            header.push(format!("re_z{j}"));
            header.push(format!("im_z{j}"));
        }
        header.extend(["t".into(), "re".into(), "im".into()]);
        wtr.write_record(&header)?;
        for (i, v) in self.values.iter().enumerate() {
            let p = self.grid.node(i);
            let mut row: Vec<String> = Vec::with_capacity(header.len());
            for c in &p.z {
                row.push(format!("{:e}", c.re));
                row.push(format!("{:e}", c.im));
            }
            row.push(format!("{:e}", p.t));
            row.push(format!("{:e}", v.re));
            row.push(format!("{:e}", v.im));
            wtr.write_record(&row)?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads a CSV written by [`SampledField::write_csv`]; node coordinates must
    /// match `grid` to 1e-9.
    pub fn read_csv<R: Read>(grid: HGrid, reader: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(reader);
        let d = grid.z.real_dim();
        let mut values = Vec::with_capacity(grid.len());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != d + 3 {
                return Err(Error::GridMismatch(format!(
                    "row {i} has {} columns, expected {}",
                    rec.len(),
                    d + 3
                )));
            }
            let nums: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidParameter(format!("row {i}: {e}")))?;
            if i >= grid.len() {
                return Err(Error::GridMismatch("more rows than grid nodes".into()));
            }
            let p = grid.node(i);
            let mut expect: Vec<f64> = p.z.iter().flat_map(|c| [c.re, c.im]).collect();
            expect.push(p.t);
            if expect.iter().zip(&nums).any(|(a, b)| (a - b).abs() > 1e-9) {
                return Err(Error::GridMismatch(format!("row {i} coordinates do not match the grid")));
            }
            values.push(Complex64::new(nums[d + 1], nums[d + 2]));
        }
        Self::new(grid, values)
    }
}

/// Quadrature `Σ w_i f_i` over the grid.
pub fn integrate(f: &SampledField) -> Complex64 {
    f.values.iter().sum::<Complex64>() * f.grid.weight()
}

/// Mass of the Korányi unit sphere in the polar decomposition
/// `∫ f = ∫₀^∞ ∫_{S_K} f(δ_r y) dσ(y) r^{Q-1} dr`.
///
/// Equal to `Q · |B_K|` where `|B_K| = σ(S^{2n-1}) · ½ B(n/2, 3/2)` is the volume
/// of the Korányi unit ball.
pub fn koranyi_sphere_mass(n: usize) -> f64 {
    let q = homogeneous_dim(n) as f64;
    let nf = n as f64;
    let beta = specfun::gamma(nf / 2.0) * specfun::gamma(1.5) / specfun::gamma(nf / 2.0 + 1.5);
    q * specfun::sphere_area(n) * 0.5 * beta
}

/// `σ(S_K) ∫₀^{r_max} g(r) r^{Q-1} dr`.
pub fn polar_integrate(g: impl Fn(f64) -> f64, r_max: f64, n: usize) -> Result<f64> {
    if !(r_max > 0.0) || !r_max.is_finite() {
        return invalid(format!("r_max must be positive and finite, got {r_max}"));
    }
    let q = homogeneous_dim(n) as i32;
    let rule = CompositeRule::new(0.0, r_max, 256, 8);
    Ok(koranyi_sphere_mass(n) * rule.integrate(|r| g(r) * r.powi(q - 1)))
}

/// Output of [`sublaplacian_apply`]: values are meaningful where `valid` is set.
#[derive(Debug, Clone)]
pub struct MaskedField {
    pub field: SampledField,
    pub valid: Vec<bool>,
}

/// Central second-order finite differences for
/// `L f = −Δ_{Cⁿ} f − ¼|z|² ∂_t² f + N ∂_t f`, `N = Σ_j (x_j ∂_{y_j} − y_j ∂_{x_j})`.
/// A two-node ring at every face is marked invalid.
pub fn sublaplacian_apply(f: &SampledField) -> Result<MaskedField> {
    let grid = f.grid;
    let ms = grid.z.axis.count;
    let mt = grid.t.count;
    if ms < 5 || mt < 5 {
        return invalid(format!(
            "finite differences need at least 5 nodes per axis, got N_s = {ms}, N_t = {mt}"
        ));
    }
    let d = grid.z.real_dim();
    let hs = grid.z.axis.step();
    let ht = grid.t.step();
    // flat-index stride of each spatial coordinate (in z-node units)
    let strides: Vec<usize> = (0..d).map(|a| ms.pow((d - 1 - a) as u32)).collect();
    let v = &f.values;
    let at = |iz: usize, it: usize| v[iz * mt + it];

    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut valid = vec![false; grid.len()];
    let mut mi = vec![0usize; d];
    let mut x = vec![0.0; d];
    for iz in 0..grid.z.len() {
        grid.z.multi_index(iz, &mut mi);
        if mi.iter().any(|&i| i < 2 || i + 2 >= ms) {
            continue;
        }
        grid.z.coords(iz, &mut x);
        let r2: f64 = x.iter().map(|c| c * c).sum();
        for it in 2..mt - 2 {
            let c = at(iz, it);
            let mut lap = Complex64::new(0.0, 0.0);
            for &s in &strides {
                lap += (at(iz + s, it) - 2.0 * c + at(iz - s, it)) / (hs * hs);
            }
            let dtt = (at(iz, it + 1) - 2.0 * c + at(iz, it - 1)) / (ht * ht);
            // mixed derivative ∂_a ∂_t
            let mixed = |s: usize| {
                (at(iz + s, it + 1) - at(iz + s, it - 1) - at(iz - s, it + 1) + at(iz - s, it - 1))
                    / (4.0 * hs * ht)
            };
            let mut rot = Complex64::new(0.0, 0.0);
            for j in 0..grid.n() {
                let (ax, ay) = (2 * j, 2 * j + 1);
                rot += x[ax] * mixed(strides[ay]) - x[ay] * mixed(strides[ax]);
            }
            let idx = iz * mt + it;
            out[idx] = -lap - 0.25 * r2 * dtt + rot;
            valid[idx] = true;
        }
    }
    Ok(MaskedField {
        field: SampledField { grid, values: out },
        valid,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn group_law_examples() {
        let p = HPoint::new(vec![c(1.0, 0.0)], 0.0);
        let q = HPoint::new(vec![c(0.0, 1.0)], 0.0);
        let pq = group_mul(&p, &q).unwrap();
        assert_eq!(pq.z[0], c(1.0, 1.0));
        assert_eq!(pq.t, -0.5);

        let p = HPoint::new(vec![c(0.3, -1.2)], 2.5);
        assert_eq!(group_mul(&p, &HPoint::identity(1)).unwrap(), p);
        let e = group_mul(&p, &group_inv(&p)).unwrap();
        assert_eq!(e, HPoint::identity(1));
    }

    #[test]
    fn group_mul_rejects_mixed_dimensions() {
        let p = HPoint::identity(1);
        let q = HPoint::identity(2);
        assert!(matches!(
            group_mul(&p, &q),
            Err(Error::DimensionMismatch { expected: 1, found: 2 })
        ));
    }

    #[test]
    fn koranyi_examples() {
        let p = HPoint::new(vec![c(1.0, 1.0)], 0.0);
        assert_relative_eq!(koranyi_norm(&p), 2f64.sqrt(), epsilon = 1e-15);
        let p = HPoint::new(vec![c(0.0, 0.0)], 16.0);
        assert_relative_eq!(koranyi_norm(&p), 4.0, epsilon = 1e-15);
        let p = HPoint::new(vec![c(0.0, 0.0)], 4.0);
        assert_relative_eq!(koranyi_norm(&p), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn dilation_examples() {
        let p = HPoint::new(vec![c(1.0, 0.0)], 1.0);
        let d = dilate(2.0, &p).unwrap();
        assert_eq!(d, HPoint::new(vec![c(2.0, 0.0)], 4.0));
        assert_eq!(dilate(1.0, &p).unwrap(), p);
        let p = HPoint::new(vec![c(0.7, -0.2), c(1.5, 0.1)], -3.0);
        let a = dilate(0.5, &dilate(4.0, &p).unwrap()).unwrap();
        let b = dilate(2.0, &p).unwrap();
        for (x, y) in a.z.iter().zip(&b.z) {
            assert_relative_eq!(x.re, y.re, epsilon = 1e-14);
            assert_relative_eq!(x.im, y.im, epsilon = 1e-14);
        }
        assert_relative_eq!(a.t, b.t, epsilon = 1e-14);
        assert!(dilate(0.0, &p).is_err());
        assert!(dilate(-1.0, &p).is_err());
    }

    fn arb_point(n: usize) -> impl Strategy<Value = HPoint> {
        (
            proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0), n),
            -10.0f64..10.0,
        )
            .prop_map(|(z, t)| HPoint::new(z.into_iter().map(|(a, b)| c(a, b)).collect(), t))
    }

    proptest! {
        #[test]
        fn group_law_is_associative(p in arb_point(2), q in arb_point(2), r in arb_point(2)) {
            let a = group_mul(&group_mul(&p, &q).unwrap(), &r).unwrap();
            let b = group_mul(&p, &group_mul(&q, &r).unwrap()).unwrap();
            let scale = 1.0 + a.t.abs();
            prop_assert!((a.t - b.t).abs() <= 1e-14 * scale * 100.0);
            for (x, y) in a.z.iter().zip(&b.z) {
                prop_assert!((x - y).norm() <= 1e-13);
            }
        }

        #[test]
        fn koranyi_norm_is_homogeneous(p in arb_point(1), ri in 0usize..3) {
            let r = [0.1, 1.0, 7.0][ri];
            let lhs = koranyi_norm(&dilate(r, &p).unwrap());
            let rhs = r * koranyi_norm(&p);
            prop_assert!((lhs - rhs).abs() <= 1e-14 * rhs.max(1e-300) * 4.0);
        }
    }

    #[test]
    fn grid_weights_sum_to_volume() {
        for n in [1, 2] {
            let g = HGrid::new(n, 1.5, 2.5, 7, 9).unwrap();
            let total = g.weight() * g.len() as f64;
            let expect = (3.0f64).powi(2 * n as i32) * 5.0;
            assert_relative_eq!(total, expect, max_relative = 1e-12);
            assert_eq!(g.len(), 7usize.pow(2 * n as u32) * 9);
            assert!(g.weight() > 0.0);
        }
    }

    #[test]
    fn integrate_constant_and_odd() {
        let g = HGrid::new(1, 1.0, 1.0, 8, 8).unwrap();
        let one = SampledField::from_fn(g, |_, _| c(1.0, 0.0));
        assert_relative_eq!(integrate(&one).re, 8.0, epsilon = 1e-10);

        let g = HGrid::new(1, 6.0, 6.0, 33, 33).unwrap();
        let odd = SampledField::from_fn(g, |z, t| c(t * (-z[0].norm_sqr() - t * t).exp(), 0.0));
        assert!(integrate(&odd).norm() < 1e-12);
    }

    #[test]
    fn integrate_gaussian_against_closed_form() {
        let g = HGrid::new(1, 6.0, 6.0, 129, 129).unwrap();
        let f = SampledField::from_fn(g, |z, t| c((-z[0].norm_sqr() - t * t).exp(), 0.0));
        assert_relative_eq!(integrate(&f).re, PI.powf(1.5), max_relative = 1e-6);
    }

    #[test]
    fn integrate_is_exact_for_multilinear_polynomials() {
        let g = HGrid::new(1, 2.0, 3.0, 6, 5).unwrap();
        let f = SampledField::from_fn(g, |z, t| {
            let (x, y) = (z[0].re, z[0].im);
            c(1.0 + 2.0 * x - y + 0.5 * t + 3.0 * x * y * t + x * t, 0.0)
        });
        assert_relative_eq!(integrate(&f).re, 16.0 * 6.0, max_relative = 1e-12);
    }

    #[test]
    fn polar_integrate_examples() {
        for n in [1, 2] {
            let q = homogeneous_dim(n) as f64;
            let sigma = koranyi_sphere_mass(n);
            assert_relative_eq!(
                polar_integrate(|_| 1.0, 1.0, n).unwrap(),
                sigma / q,
                max_relative = 1e-12
            );
        }
        let sigma = koranyi_sphere_mass(1);
        let v = polar_integrate(|r| (-r.powi(4)).exp(), 6.0, 1).unwrap();
        assert_relative_eq!(v, sigma / 4.0, max_relative = 1e-10);
        assert!(polar_integrate(|_| 1.0, 0.0, 1).is_err());
        // n = 1: the Korányi ball has volume π²/2
        assert_relative_eq!(sigma, 4.0 * PI * PI / 2.0, max_relative = 1e-12);
    }

    #[test]
    fn polar_ball_volume_matches_grid_indicator() {
        let g = HGrid::new(1, 1.05, 1.05, 120, 120).unwrap();
        let ball = SampledField::from_fn(g, |z, t| {
            let p = HPoint::new(z.to_vec(), t);
            c(if koranyi_norm(&p) <= 1.0 { 1.0 } else { 0.0 }, 0.0)
        });
        let grid_vol = integrate(&ball).re;
        let polar = polar_integrate(|r| if r <= 1.0 { 1.0 } else { 0.0 }, 1.0, 1).unwrap();
        assert_relative_eq!(grid_vol, polar, max_relative = 1e-2);
    }

    #[test]
    fn sublaplacian_kills_constants() {
        let g = HGrid::new(1, 2.0, 2.0, 9, 9).unwrap();
        let f = SampledField::from_fn(g, |_, _| c(3.0, -1.0));
        let lf = sublaplacian_apply(&f).unwrap();
        for (v, ok) in lf.field.values.iter().zip(&lf.valid) {
            if *ok {
                assert!(v.norm() < 1e-10);
            }
        }
        assert!(lf.valid.iter().any(|&b| b));
    }

    #[test]
    fn sublaplacian_rejects_tiny_grids() {
        let g = HGrid::new(1, 2.0, 2.0, 4, 9).unwrap();
        assert!(sublaplacian_apply(&SampledField::zeros(g)).is_err());
    }

    #[test]
    fn sampled_field_csv_round_trip() {
        let g = HGrid::new(1, 1.0, 1.0, 3, 2).unwrap();
        let f = SampledField::from_fn(g, |z, t| c(z[0].re + t, z[0].im));
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = SampledField::read_csv(g, buf.as_slice()).unwrap();
        for (a, b) in f.values.iter().zip(&back.values) {
            assert!((a - b).norm() < 1e-12);
        }
        let other = HGrid::new(1, 2.0, 1.0, 3, 2).unwrap();
        assert!(SampledField::read_csv(other, buf.as_slice()).is_err());
    }
}
