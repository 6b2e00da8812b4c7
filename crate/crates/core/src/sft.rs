//! The Strichartz Fourier transform
//!
//! `F(f)(a, w) = c_{n,k} ∫ f(z,t) e_a((z,t)^{−1}(w,0)) dz dt`,
//!
//! its inverse `f(z,t) = ∫ c_{n,k} F(f)(a,w) e_a((−w,0)(z,t)) dw dν₂(a)`, twisted
//! convolution, the reproducing condition of `L²₀`, and dilation covariance.
//!
//! Forward, inverse and twisted convolution all reduce to the pair kernel
//! `K_k(o, i) = φ_{k,λ}(o − i) e^{−iλ/2 Im(i·ō)}` summed over inner points `i` on
//! a tensor grid. Its Gaussian and phase factors split over coordinate axes,
//! so the kernel for one outer point is built by tensor expansion and the
//! Laguerre recurrence then produces every `k ≤ K_max` in a single pass.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fan::{FanGrid, FanNode, FanPoint};
use crate::hgroup::{CGrid, HGrid, SampledField};
use crate::specfun::{bessel_kernel_s, norm_const};

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Largest `s = ½|λ||o−i|²` at which `L_k(s) e^{−s/2}` still exceeds 1e-17
/// for some `k ≤ k_max`, `δ = n − 1`.
fn kernel_cutoff(k_max: usize, delta: f64) -> f64 {
    let k = k_max as f64;
    let ln_fact: f64 = (1..=k_max).map(|j| (j as f64).ln()).sum();
    let log_mag = |x: f64| -0.5 * x + (k + delta) * x.ln() - ln_fact;
    let mut x = 4.0 * k + 2.0 * delta + 40.0;
    while log_mag(x) > -40.0 {
        x *= 1.25;
    }
    x
}

/// Kernel engine for one `λ` and a fixed inner grid.
struct PairKernel<'a> {
    lambda: f64,
    k_max: usize,
    delta: f64,
    cutoff: f64,
    inner: &'a CGrid,
    axis_nodes: Vec<f64>,
    base: Vec<Complex64>,
    s: Vec<f64>,
    // recurrence coefficients (2k+1+δ, k+δ, 1/(k+1)) for k = 1..k_max-1
    rec: Vec<(f64, f64, f64)>,
    // per-axis scratch
    ax_base: Vec<Complex64>,
    ax_s: Vec<f64>,
}

impl<'a> PairKernel<'a> {
    fn new(lambda: f64, k_max: usize, inner: &'a CGrid) -> Self {
        let delta = (inner.n - 1) as f64;
        let m = inner.len();
        let rec = (1..k_max.max(1))
            .map(|k| {
                let kf = k as f64;
                (2.0 * kf + 1.0 + delta, kf + delta, 1.0 / (kf + 1.0))
            })
            .collect();
        Self {
            lambda,
            k_max,
            delta,
            cutoff: kernel_cutoff(k_max, delta),
            inner,
            axis_nodes: inner.axis.nodes(),
            base: vec![ZERO; m],
            s: vec![0.0; m],
            rec,
            ax_base: vec![ZERO; inner.axis.count],
            ax_s: vec![0.0; inner.axis.count],
        }
    }

    /// Fills `base[i] = e^{−s_i/2} e^{−iλ/2 Im(i·ō)}` and `s[i]` for outer point `o`
    /// (real coordinates, length 2n).
    fn prepare(&mut self, outer: &[f64]) {
        let half_abs = 0.5 * self.lambda.abs();
        let m = self.inner.axis.count;
        let d = outer.len();
        let mut len = 1;
        self.base[0] = Complex64::new(1.0, 0.0);
        self.s[0] = 0.0;
        for a in 0..d {
            let coef = if a % 2 == 0 { -outer[a + 1] } else { outer[a - 1] };
            let ph = -0.5 * self.lambda * coef;
            for (i, &x) in self.axis_nodes.iter().enumerate() {
                let dx = outer[a] - x;
                let s = half_abs * dx * dx;
                self.ax_s[i] = s;
                self.ax_base[i] = Complex64::from_polar((-0.5 * s).exp(), ph * x);
            }
            // expand in place from the back so the new axis varies fastest
            for j in (0..len).rev() {
                let b = self.base[j];
                let s0 = self.s[j];
                for i in (0..m).rev() {
                    self.base[j * m + i] = b * self.ax_base[i];
                    self.s[j * m + i] = s0 + self.ax_s[i];
                }
            }
            len *= m;
        }
    }

    /// `acc[k] += Σ_i v[i] K_k(o, i)` for a shared inner vector.
    fn accumulate_shared(&self, v: &[Complex64], acc: &mut [Complex64]) {
        let km = self.k_max;
        for i in 0..v.len() {
            let x = self.s[i];
            if x > self.cutoff {
                continue;
            }
            let g = v[i] * self.base[i];
            acc[0] += g;
            if km == 0 {
                continue;
            }
            let mut l0 = 1.0;
            let mut l1 = 1.0 + self.delta - x;
            acc[1] += g * l1;
            for (k, &(a, b, inv)) in self.rec.iter().enumerate() {
                let l2 = ((a - x) * l1 - b * l0) * inv;
                acc[k + 2] += g * l2;
                l0 = l1;
                l1 = l2;
            }
        }
    }

    /// `Σ_k Σ_i v[k][i] K_k(o, i)`, inner vectors stored `k`-major.
    fn accumulate_summed(&self, v: &[Complex64], n_inner: usize, active: &[bool]) -> Complex64 {
        let km = self.k_max;
        let mut acc = ZERO;
        for i in 0..n_inner {
            let x = self.s[i];
            if x > self.cutoff {
                continue;
            }
            let mut sum = if active[0] { v[i] } else { ZERO };
            if km > 0 {
                let mut l0 = 1.0;
                let mut l1 = 1.0 + self.delta - x;
                if active[1] {
                    sum += v[n_inner + i] * l1;
                }
                for (k, &(a, b, inv)) in self.rec.iter().enumerate() {
                    let l2 = ((a - x) * l1 - b * l0) * inv;
                    if active[k + 2] {
                        sum += v[(k + 2) * n_inner + i] * l2;
                    }
                    l0 = l1;
                    l1 = l2;
                }
            }
            acc += sum * self.base[i];
        }
        acc
    }

    /// `acc[k] += Σ_i v[k][i] K_k(o, i)`, inner vectors stored `k`-major.
    fn accumulate_per_k(&self, v: &[Complex64], n_inner: usize, acc: &mut [Complex64]) {
        let km = self.k_max;
        for i in 0..n_inner {
            let x = self.s[i];
            if x > self.cutoff {
                continue;
            }
            let b = self.base[i];
            acc[0] += v[i] * b;
            if km == 0 {
                continue;
            }
            let mut l0 = 1.0;
            let mut l1 = 1.0 + self.delta - x;
            acc[1] += v[n_inner + i] * b * l1;
            for (k, &(a, bb, inv)) in self.rec.iter().enumerate() {
                let l2 = ((a - x) * l1 - bb * l0) * inv;
                acc[k + 2] += v[(k + 2) * n_inner + i] * b * l2;
                l0 = l1;
                l1 = l2;
            }
        }
    }
}

fn coords_of(z: &[Complex64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

fn check_band(grid: &HGrid, lambda: f64) -> Result<()> {
    let limit = grid.lambda_band();
    if lambda.abs() > limit * (1.0 + 1e-12) {
        return Err(Error::BandViolation { lambda, limit });
    }
    Ok(())
}

/// `f^{−λ}(z) = ∫ f(z,t) e^{−iλt} dt` at every `z` node, times the `z` weight.
fn partial_ft_weighted(f: &SampledField, lambda: f64) -> Vec<Complex64> {
    let g = &f.grid;
    let nt = g.t.count;
    let phases: Vec<Complex64> = g
        .t
        .nodes()
        .iter()
        .map(|&t| Complex64::from_polar(g.weight(), -lambda * t))
        .collect();
    f.values
        .chunks(nt)
        .map(|row| row.iter().zip(&phases).map(|(v, p)| v * p).sum())
        .collect()
}

/// Normalized transform `F(f)(a, w)` at one fan point.
pub fn forward(f: &SampledField, a: &FanPoint, w: &[Complex64]) -> Result<Complex64> {
    let grid = &f.grid;
    let n = grid.n();
    if w.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: w.len() });
    }
    match *a {
        FanPoint::Finite { lambda, k } => {
            if lambda == 0.0 {
                return Err(Error::DegenerateRay);
            }
            check_band(grid, lambda)?;
            let fml = partial_ft_weighted(f, lambda);
            let mut ker = PairKernel::new(lambda, k, &grid.z);
            ker.prepare(&coords_of(w));
            let mut acc = vec![ZERO; k + 1];
            ker.accumulate_shared(&fml, &mut acc);
            Ok(norm_const(n, k) * acc[k])
        }
        FanPoint::Degenerate { tau } => {
            let sq = tau.max(0.0).sqrt();
            let wc = coords_of(w);
            let mut zc = vec![0.0; 2 * n];
            let nt = grid.t.count;
            let mut acc = ZERO;
            for iz in 0..grid.z.len() {
                grid.z.coords(iz, &mut zc);
                let r = zc.iter().zip(&wc).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
                let row: Complex64 = f.values[iz * nt..(iz + 1) * nt].iter().sum();
                acc += row * bessel_kernel_s(n, sq * r);
            }
            Ok(acc * grid.weight())
        }
    }
}

/// Transform samples on a fan grid times a `w` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralTable {
    pub fan: FanGrid,
    pub wgrid: CGrid,
    /// `values[node · |w grid| + w index]`.
    pub values: Vec<Complex64>,
    /// `true` for `F(f) = c_{n,k} f̂`, `false` for raw `f̂`.
    pub normalized: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct TableSidecar {
    n: usize,
    fan: FanGrid,
    wgrid: CGrid,
    normalized: bool,
    nodes: usize,
    w_nodes: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    l1_envelope: Option<f64>,
}

impl SpectralTable {
    pub fn zeros(fan: FanGrid, wgrid: CGrid) -> Self {
        let len = fan.len() * wgrid.len();
        Self {
            fan,
            wgrid,
            values: vec![ZERO; len],
            normalized: true,
        }
    }

    pub fn node_values(&self, node: usize) -> &[Complex64] {
        let m = self.wgrid.len();
        &self.values[node * m..(node + 1) * m]
    }

    pub fn node_values_mut(&mut self, node: usize) -> &mut [Complex64] {
        let m = self.wgrid.len();
        &mut self.values[node * m..(node + 1) * m]
    }

    pub fn to_raw(&self) -> Self {
        if !self.normalized {
            return self.clone();
        }
        self.rescale(|k| 1.0 / norm_const(self.fan.n, k), false)
    }

    pub fn to_normalized(&self) -> Self {
        if self.normalized {
            return self.clone();
        }
        self.rescale(|k| norm_const(self.fan.n, k), true)
    }

    fn rescale(&self, factor: impl Fn(usize) -> f64, normalized: bool) -> Self {
        let m = self.wgrid.len();
        let mut values = self.values.clone();
        for (node, chunk) in self.fan.nodes.iter().zip(values.chunks_mut(m)) {
            let c = factor(node.k);
            chunk.iter_mut().for_each(|v| *v *= c);
        }
        Self {
            fan: self.fan.clone(),
            wgrid: self.wgrid,
            values,
            normalized,
        }
    }

    /// `∫ |F|² dw dν₂` by quadrature.
    pub fn weighted_norm_sqr(&self) -> f64 {
        let ww = self.wgrid.weight();
        self.fan
            .nodes
            .iter()
            .enumerate()
            .map(|(i, nd)| {
                let s: f64 = self.node_values(i).iter().map(|v| v.norm_sqr()).sum();
                self.fan.weight(nd) * s * ww
            })
            .sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// CSV rows `lambda, k, re_w1, im_w1, …, re, im`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        let n = self.wgrid.n;
        let mut header = vec!["lambda".to_string(), "k".to_string()];
        for j in 1..=n {
            header.push(format!("re_w{j}"));
            header.push(format!("im_w{j}"));
        }
        header.extend(["re".into(), "im".into()]);
        wtr.write_record(&header)?;
        let coords = self.wgrid.coordinate_table();
        let d = self.wgrid.real_dim();
        let m = self.wgrid.len();
        for (ni, nd) in self.fan.nodes.iter().enumerate() {
            for wi in 0..m {
                let v = self.values[ni * m + wi];
                let mut row = vec![format!("{:e}", nd.lambda), nd.k.to_string()];
                row.extend(coords[wi * d..(wi + 1) * d].iter().map(|c| format!("{c:e}")));
                row.push(format!("{:e}", v.re));
                row.push(format!("{:e}", v.im));
                wtr.write_record(&row)?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn write_sidecar<W: Write>(&self, writer: W, l1_envelope: Option<f64>) -> Result<()> {
        let side = TableSidecar {
            n: self.fan.n,
            fan: self.fan.clone(),
            wgrid: self.wgrid,
            normalized: self.normalized,
            nodes: self.fan.len(),
            w_nodes: self.wgrid.len(),
            l1_envelope,
        };
        serde_json::to_writer_pretty(writer, &side)?;
        Ok(())
    }

    /// Reads a table written by [`SpectralTable::write_csv`] and
    /// [`SpectralTable::write_sidecar`].
    pub fn read<R1: Read, R2: Read>(csv_reader: R1, sidecar: R2) -> Result<Self> {
        let side: TableSidecar = serde_json::from_reader(sidecar)?;
        let mut table = SpectralTable::zeros(side.fan, side.wgrid);
        table.normalized = side.normalized;
        let d = table.wgrid.real_dim();
        let mut rdr = csv::Reader::from_reader(csv_reader);
        let mut count = 0;
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != d + 4 || i >= table.values.len() {
                return Err(Error::GridMismatch(format!("table row {i} does not fit the sidecar grids")));
            }
            let parse = |j: usize| {
                rec[j]
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::InvalidParameter(format!("row {i}: {e}")))
            };
            table.values[i] = Complex64::new(parse(d + 2)?, parse(d + 3)?);
            count += 1;
        }
        if count != table.values.len() {
            return Err(Error::GridMismatch(format!(
                "{count} rows for a table of {} values",
                table.values.len()
            )));
        }
        Ok(table)
    }
}

/// Normalized transform on every node of `fan × wgrid`.
pub fn forward_table(f: &SampledField, fan: &FanGrid, wgrid: &CGrid) -> Result<SpectralTable> {
    let grid = &f.grid;
    let n = grid.n();
    if fan.n != n || wgrid.n != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: if fan.n != n { fan.n } else { wgrid.n },
        });
    }
    for (lambda, _) in fan.lambda_groups() {
        check_band(grid, lambda)?;
    }
    let m = wgrid.len();
    let wcoords = wgrid.coordinate_table();
    let d = wgrid.real_dim();
    let groups = fan.lambda_groups();
    let blocks: Vec<Vec<Complex64>> = groups
        .par_iter()
        .map(|(lambda, range)| {
            let nodes = &fan.nodes[range.clone()];
            let k_max = nodes.iter().map(|nd| nd.k).max().unwrap_or(0);
            let fml = partial_ft_weighted(f, *lambda);
            let mut out = vec![ZERO; nodes.len() * m];
            if fml.iter().all(|v| *v == ZERO) {
                return out;
            }
            let mut ker = PairKernel::new(*lambda, k_max, &grid.z);
            let mut acc = vec![ZERO; k_max + 1];
            for wi in 0..m {
                ker.prepare(&wcoords[wi * d..(wi + 1) * d]);
                acc.iter_mut().for_each(|a| *a = ZERO);
                ker.accumulate_shared(&fml, &mut acc);
                for (j, nd) in nodes.iter().enumerate() {
                    out[j * m + wi] = norm_const(n, nd.k) * acc[nd.k];
                }
            }
            out
        })
        .collect();
    let mut table = SpectralTable::zeros(fan.clone(), *wgrid);
    table.values = blocks.concat();
    Ok(table)
}

/// Inner vectors `ν₂(a) c_{n,k} F(a, w) dw`, `k`-major over `0..=k_max`.
fn inverse_weights(table: &SpectralTable, nodes: &[FanNode], start: usize, k_max: usize) -> (Vec<Complex64>, Vec<bool>) {
    let m = table.wgrid.len();
    let ww = table.wgrid.weight();
    let mut v = vec![ZERO; (k_max + 1) * m];
    let mut active = vec![false; k_max + 1];
    for (j, nd) in nodes.iter().enumerate() {
        let scale = table.fan.weight(nd) * norm_const(table.fan.n, nd.k) * ww;
        let src = table.node_values(start + j);
        let dst = &mut v[nd.k * m..(nd.k + 1) * m];
        for (d, s) in dst.iter_mut().zip(src) {
            *d += s * scale;
        }
        active[nd.k] = true;
    }
    (v, active)
}

fn require_normalized(table: &SpectralTable) -> Result<()> {
    if !table.normalized {
        return Err(Error::RawTable);
    }
    Ok(())
}

/// Inversion formula at one point.
pub fn inverse(table: &SpectralTable, z: &[Complex64], t: f64) -> Result<Complex64> {
    require_normalized(table)?;
    let n = table.fan.n;
    if z.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: z.len() });
    }
    let zc = coords_of(z);
    let m = table.wgrid.len();
    let mut total = ZERO;
    for (lambda, range) in table.fan.lambda_groups() {
        let nodes = &table.fan.nodes[range.clone()];
        let k_max = nodes.iter().map(|nd| nd.k).max().unwrap_or(0);
        let (v, active) = inverse_weights(table, nodes, range.start, k_max);
        let mut ker = PairKernel::new(lambda, k_max, &table.wgrid);
        ker.prepare(&zc);
        total += ker.accumulate_summed(&v, m, &active) * Complex64::from_polar(1.0, lambda * t);
    }
    Ok(total)
}

/// Inversion formula on every node of `grid`.
pub fn inverse_on_grid(table: &SpectralTable, grid: &HGrid) -> Result<SampledField> {
    require_normalized(table)?;
    let n = table.fan.n;
    if grid.n() != n {
        return Err(Error::DimensionMismatch { expected: n, found: grid.n() });
    }
    let m = table.wgrid.len();
    let nz = grid.z.len();
    let d = grid.z.real_dim();
    let zcoords = grid.z.coordinate_table();
    let ts = grid.t.nodes();
    let groups = table.fan.lambda_groups();
    let parts: Vec<(f64, Vec<Complex64>)> = groups
        .par_iter()
        .map(|(lambda, range)| {
            let nodes = &table.fan.nodes[range.clone()];
            let k_max = nodes.iter().map(|nd| nd.k).max().unwrap_or(0);
            let (v, active) = inverse_weights(table, nodes, range.start, k_max);
            let mut g = vec![ZERO; nz];
            if v.iter().all(|x| *x == ZERO) {
                return (*lambda, g);
            }
            let mut ker = PairKernel::new(*lambda, k_max, &table.wgrid);
            for (iz, gz) in g.iter_mut().enumerate() {
                ker.prepare(&zcoords[iz * d..(iz + 1) * d]);
                *gz = ker.accumulate_summed(&v, m, &active);
            }
            (*lambda, g)
        })
        .collect();
    let nt = grid.t.count;
    let mut out = SampledField::zeros(*grid);
    for (lambda, g) in parts {
        let ph: Vec<Complex64> = ts.iter().map(|&t| Complex64::from_polar(1.0, lambda * t)).collect();
        for (iz, gz) in g.iter().enumerate() {
            if *gz == ZERO {
                continue;
            }
            for (o, p) in out.values[iz * nt..(iz + 1) * nt].iter_mut().zip(&ph) {
                *o += gz * p;
            }
        }
    }
    Ok(out)
}

/// `(g *_λ h)(z) = ∫ g(z − w) h(w) e^{iλ/2 Im(z·w̄)} dw` at every node of `grid`,
/// with `h` sampled on the same grid.
pub fn twisted_convolution(
    g: impl Fn(&[Complex64]) -> Complex64 + Sync,
    h: &[Complex64],
    lambda: f64,
    grid: &CGrid,
) -> Result<Vec<Complex64>> {
    if h.len() != grid.len() {
        return Err(Error::GridMismatch(format!(
            "{} samples for a grid of {} nodes",
            h.len(),
            grid.len()
        )));
    }
    let weight = grid.weight();
    let nodes: Vec<Vec<Complex64>> = (0..grid.len()).map(|i| grid.node(i)).collect();
    Ok(nodes
        .par_iter()
        .map(|z| {
            let mut acc = ZERO;
            let mut diff = vec![ZERO; z.len()];
            for (w, hv) in nodes.iter().zip(h) {
                if *hv == ZERO {
                    continue;
                }
                for ((d, a), b) in diff.iter_mut().zip(z).zip(w) {
                    *d = a - b;
                }
                let im: f64 = crate::hgroup::symplectic(z, w);
                acc += g(&diff) * hv * Complex64::from_polar(1.0, 0.5 * lambda * im);
            }
            acc * weight
        })
        .collect())
}

/// Fraction of the largest per-node `L²(w)` norm below which a fan node is
/// left out of the reproducing-condition residual.
pub const SUBSPACE_SIGNIFICANCE: f64 = 1e-2;

/// Largest relative `L²(w)` deviation of `(2π)^{−n}|λ|ⁿ (φ_{k,λ} *_λ F(a,·))` from
/// `F(a,·)` over fan nodes whose norm is at least [`SUBSPACE_SIGNIFICANCE`] of the
/// largest.
pub fn subspace_residual(table: &SpectralTable) -> Result<f64> {
    require_normalized(table)?;
    let n = table.fan.n;
    let m = table.wgrid.len();
    let ww = table.wgrid.weight();
    let norms: Vec<f64> = (0..table.fan.len())
        .map(|i| (table.node_values(i).iter().map(|v| v.norm_sqr()).sum::<f64>() * ww).sqrt())
        .collect();
    let max_norm = norms.iter().cloned().fold(0.0, f64::max);
    if max_norm == 0.0 {
        return Ok(0.0);
    }
    let wcoords = table.wgrid.coordinate_table();
    let d = table.wgrid.real_dim();
    let groups = table.fan.lambda_groups();
    let worst: Vec<f64> = groups
        .par_iter()
        .map(|(lambda, range)| {
            let nodes = &table.fan.nodes[range.clone()];
            let significant: Vec<bool> = range
                .clone()
                .map(|i| norms[i] >= SUBSPACE_SIGNIFICANCE * max_norm)
                .collect();
            if !significant.iter().any(|&b| b) {
                return 0.0;
            }
            let k_max = nodes.iter().map(|nd| nd.k).max().unwrap_or(0);
            let mut v = vec![ZERO; (k_max + 1) * m];
            for (j, nd) in nodes.iter().enumerate() {
                for (dst, src) in v[nd.k * m..(nd.k + 1) * m].iter_mut().zip(table.node_values(range.start + j)) {
                    *dst = src * ww;
                }
            }
            let scale = (2.0 * PI).powi(-(n as i32)) * lambda.abs().powi(n as i32);
            let mut ker = PairKernel::new(*lambda, k_max, &table.wgrid);
            let mut acc = vec![ZERO; k_max + 1];
            let mut err = vec![0.0; nodes.len()];
            for wi in 0..m {
                ker.prepare(&wcoords[wi * d..(wi + 1) * d]);
                acc.iter_mut().for_each(|a| *a = ZERO);
                ker.accumulate_per_k(&v, m, &mut acc);
                for (j, nd) in nodes.iter().enumerate() {
                    let f = table.node_values(range.start + j)[wi];
                    err[j] += (acc[nd.k] * scale - f).norm_sqr();
                }
            }
            err.iter()
                .zip(range.clone())
                .zip(&significant)
                .filter(|(_, &s)| s)
                .map(|((e, i), _)| (e * ww).sqrt() / norms[i])
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(worst.into_iter().fold(0.0, f64::max))
}

/// Plancherel ratio `∫|F|² dw dν₂ / ‖f‖₂²`.
pub fn plancherel_ratio(f: &SampledField, table: &SpectralTable) -> Result<f64> {
    let nf = f.norm_sqr();
    if nf == 0.0 {
        return Err(Error::ZeroFunction);
    }
    Ok(table.weighted_norm_sqr() / nf)
}

/// Relative `L²` error of `inverse(forward(f))` against `f` on the grid of `f`.
pub fn inversion_error(f: &SampledField, table: &SpectralTable) -> Result<f64> {
    let nf = f.l2_norm();
    if nf == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let back = inverse_on_grid(table, &f.grid)?;
    Ok(back.sub(f)?.l2_norm() / nf)
}

/// A probe `(λ', k, w')` for the dilation check: the right-hand side is read at
/// `(λ', k, w')` and the left-hand side at `(r²λ', k, w'/r)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DilationProbe {
    pub lambda: f64,
    pub k: usize,
    pub w: Vec<Complex64>,
}

/// `max |F(f∘δ_r)(r²λ', k, w'/r) − r^{−Q} F(f)(λ', k, w')|` over the probes, relative to
/// the largest right-hand value. Both sides are evaluated directly at the probe
/// points; `f` is sampled on `grid` both undilated and dilated.
pub fn dilation_covariance_residual(
    f: impl Fn(&[Complex64], f64) -> Complex64 + Sync,
    grid: &HGrid,
    r: f64,
    probes: &[DilationProbe],
) -> Result<f64> {
    if !(0.5..=2.0).contains(&r) {
        return crate::error::invalid(format!("dilation factor must lie in [0.5, 2], got {r}"));
    }
    let q = grid.homogeneous_dim() as i32;
    let plain = SampledField::from_fn(*grid, &f);
    let dilated = if r == 1.0 {
        plain.clone()
    } else {
        SampledField::from_fn(*grid, |z, t| {
            let zr: Vec<Complex64> = z.iter().map(|c| c * r).collect();
            f(&zr, r * r * t)
        })
    };
    let pairs: Vec<(Complex64, Complex64)> = probes
        .par_iter()
        .map(|p| {
            let rhs = forward(&plain, &FanPoint::finite(p.lambda, p.k)?, &p.w)? * r.powi(-q);
            let wl: Vec<Complex64> = p.w.iter().map(|c| c / r).collect();
            let lhs = forward(&dilated, &FanPoint::finite(r * r * p.lambda, p.k)?, &wl)?;
            Ok((lhs, rhs))
        })
        .collect::<Result<_>>()?;
    let scale = pairs.iter().map(|(_, b)| b.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Ok(0.0);
    }
    Ok(pairs.iter().map(|(a, b)| (a - b).norm()).fold(0.0, f64::max) / scale)
}

/// `max |F(f)(a, w)| / ‖f‖₁` over a table.
pub fn l1_envelope(f: &SampledField, table: &SpectralTable) -> Result<f64> {
    let l1 = f.l1_norm();
    if l1 == 0.0 {
        return Err(Error::ZeroFunction);
    }
    Ok(table.max_abs() / l1)
}
