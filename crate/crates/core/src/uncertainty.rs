//! Space and spectrum projections, Hilbert-Schmidt and operator norms of
//! `P_W P_V`, and the uncertainty inequalities built on them: the annihilating
//! pair bound, Donoho-Stark, the Nazarov-type inequality, Price's local
//! inequalities and linear independence of dilates.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fan::{kappa, nu2_measure, FanBox, FanGrid, FanProfile, FanSet, Sign};
use crate::hgroup::{homogeneous_dim, koranyi_sphere_mass, symplectic, CGrid, HGrid, HPoint, SampledField};
use crate::quad::CompositeRule;
use crate::sft::{forward_table, inverse_on_grid};
use crate::specfun::laguerre_into;
use crate::suite::Resolution;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Axis-aligned box in `(Re z₁, Im z₁, …, Re zₙ, Im zₙ, t)` coordinates, or in the
/// first `2n` of them for a window in `Cⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpatialBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl SpatialBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return invalid("box corners must have the same nonzero length");
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return invalid(format!("box needs finite lo < hi on every axis, got {lo:?} .. {hi:?}"));
        }
        Ok(Self { lo, hi })
    }

    /// `[−a, a]^d`.
    pub fn cube(d: usize, a: f64) -> Result<Self> {
        Self::new(vec![-a; d], vec![a; d])
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn volume(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a).product()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    fn overlaps(&self, o: &Self) -> bool {
        (0..self.dim()).all(|i| self.lo[i] < o.hi[i] && o.lo[i] < self.hi[i])
    }

    /// `self \ o` as disjoint boxes.
    fn minus(&self, o: &Self) -> Vec<Self> {
        if !self.overlaps(o) {
            return vec![self.clone()];
        }
        let mut out = Vec::new();
        let mut core = self.clone();
        for i in 0..self.dim() {
            if core.lo[i] < o.lo[i] {
                let mut piece = core.clone();
                piece.hi[i] = o.lo[i];
                out.push(piece);
                core.lo[i] = o.lo[i];
            }
            if core.hi[i] > o.hi[i] {
                let mut piece = core.clone();
                piece.lo[i] = o.hi[i];
                out.push(piece);
                core.hi[i] = o.hi[i];
            }
        }
        out
    }

    /// Fraction of the cell `Π [cᵢ − hᵢ/2, cᵢ + hᵢ/2]` inside the box.
    fn cell_fraction(&self, centre: &[f64], h: &[f64]) -> f64 {
        let mut f = 1.0;
        for i in 0..self.dim() {
            let a = (centre[i] - 0.5 * h[i]).max(self.lo[i]);
            let b = (centre[i] + 0.5 * h[i]).min(self.hi[i]);
            if b <= a {
                return 0.0;
            }
            f *= (b - a) / h[i];
        }
        f
    }
}

/// A finite union of boxes, stored as disjoint pieces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpatialSet {
    pub dim: usize,
    boxes: Vec<SpatialBox>,
}

impl SpatialSet {
    pub fn empty(dim: usize) -> Self {
        Self { dim, boxes: Vec::new() }
    }

    pub fn new(dim: usize, boxes: Vec<SpatialBox>) -> Result<Self> {
        if dim == 0 {
            return invalid("spatial sets need at least one coordinate");
        }
        let mut pieces: Vec<SpatialBox> = Vec::new();
        for b in boxes {
            if b.dim() != dim {
                return invalid(format!("box of dimension {} in a set of dimension {dim}", b.dim()));
            }
            let mut fresh = vec![b];
            for p in &pieces {
                fresh = fresh.into_iter().flat_map(|f| f.minus(p)).collect();
            }
            pieces.extend(fresh);
        }
        Ok(Self { dim, boxes: pieces })
    }

    /// A set in `Hⁿ` (`2n + 1` coordinates).
    pub fn in_group(n: usize, boxes: Vec<SpatialBox>) -> Result<Self> {
        Self::new(2 * n + 1, boxes)
    }

    pub fn boxes(&self) -> &[SpatialBox] {
        &self.boxes
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    pub fn volume(&self) -> f64 {
        self.boxes.iter().map(SpatialBox::volume).sum()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.boxes.iter().any(|b| b.contains(x))
    }

    pub fn contains_point(&self, p: &HPoint) -> bool {
        self.contains(&point_coords(p))
    }

    /// Fraction of the grid cell around `centre` (steps `h`) covered by the set.
    pub fn cell_fraction(&self, centre: &[f64], h: &[f64]) -> f64 {
        self.boxes.iter().map(|b| b.cell_fraction(centre, h)).sum()
    }
}

impl<'de> Deserialize<'de> for SpatialSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            dim: usize,
            boxes: Vec<SpatialBox>,
        }
        let raw = Raw::deserialize(d)?;
        SpatialSet::new(raw.dim, raw.boxes).map_err(serde::de::Error::custom)
    }
}

fn point_coords(p: &HPoint) -> Vec<f64> {
    let mut x: Vec<f64> = p.z.iter().flat_map(|c| [c.re, c.im]).collect();
    x.push(p.t);
    x
}

fn check_group_set(v: &SpatialSet, n: usize) -> Result<()> {
    if v.dim != 2 * n + 1 {
        return Err(Error::DimensionMismatch { expected: n, found: (v.dim.saturating_sub(1)) / 2 });
    }
    Ok(())
}

/// `P_V f = χ_V f`, with `χ_V` evaluated at the nodes.
pub fn project_spatial(f: &SampledField, v: &SpatialSet) -> Result<SampledField> {
    check_group_set(v, f.grid.n())?;
    Ok(f.map_nodes(|p, x| if v.contains_point(p) { x } else { ZERO }))
}

/// `P_{V^c} f = f − P_V f`.
pub fn project_spatial_complement(f: &SampledField, v: &SpatialSet) -> Result<SampledField> {
    check_group_set(v, f.grid.n())?;
    Ok(f.map_nodes(|p, x| if v.contains_point(p) { ZERO } else { x }))
}

/// Discretization shared by every spectral projection: the fan grid and the `w` grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralContext {
    pub fan: FanGrid,
    pub wgrid: CGrid,
}

impl SpectralContext {
    pub fn new(fan: FanGrid, wgrid: CGrid) -> Result<Self> {
        if fan.n != wgrid.n {
            return Err(Error::DimensionMismatch { expected: fan.n, found: wgrid.n });
        }
        Ok(Self { fan, wgrid })
    }

    pub fn from_resolution(r: &Resolution) -> Result<Self> {
        Self::new(r.fan_grid()?, r.wgrid()?)
    }

    /// Fan nodes covering `W`; every box must lie inside the grid's range.
    pub fn restrict(&self, w: &FanSet) -> Result<FanGrid> {
        let half = self.fan.nodes.first().map_or(0.0, |nd| 0.5 * nd.dlambda);
        let top = self.fan.max_abs_lambda() + half;
        let bottom = self
            .fan
            .nodes
            .iter()
            .map(|nd| nd.lambda.abs())
            .fold(f64::INFINITY, f64::min)
            - half;
        let k_top = self.fan.max_k();
        for b in w.boxes() {
            if b.hi > top * (1.0 + 1e-12) {
                return Err(Error::BandViolation { lambda: b.hi, limit: top });
            }
            if b.lo < bottom * (1.0 - 1e-12) {
                return invalid(format!("fan box reaches |lambda| = {} inside the unresolved gap {bottom}", b.lo));
            }
            if b.k > k_top {
                return invalid(format!("fan box on ray k = {} beyond the grid's k_max = {k_top}", b.k));
            }
        }
        self.fan.restrict(w)
    }
}

/// `P_W f = F^{−1}(χ_{W×Cⁿ} F f)` through the fan nodes covering `W`.
pub fn project_spectral(f: &SampledField, w: &FanSet, ctx: &SpectralContext) -> Result<SampledField> {
    if w.n != f.grid.n() {
        return Err(Error::DimensionMismatch { expected: f.grid.n(), found: w.n });
    }
    let fan = ctx.restrict(w)?;
    if fan.is_empty() {
        return Ok(SampledField::zeros(f.grid));
    }
    let table = forward_table(f, &fan, &ctx.wgrid)?;
    inverse_on_grid(&table, &f.grid)
}

/// `P_{W^c} f = f − P_W f`.
pub fn project_spectral_complement(f: &SampledField, w: &FanSet, ctx: &SpectralContext) -> Result<SampledField> {
    f.sub(&project_spectral(f, w, ctx)?)
}

/// Kernel `N(x', x)` of `P_W P_V`:
/// `χ_V(x') (2π)^{−n−1} Σ_k ∫_W |λ|ⁿ e^{iλ(t−t')} e^{iλ/2 Im(z·z̄')} φ_{k,λ}(z−z') dλ`,
/// with the `λ` integral done by composite Gauss-Legendre quadrature.
pub fn composed_kernel(v: &SpatialSet, w: &FanSet, xp: &HPoint, x: &HPoint) -> Result<Complex64> {
    let n = w.n;
    if xp.dim() != n || x.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: if xp.dim() != n { xp.dim() } else { x.dim() } });
    }
    check_group_set(v, n)?;
    if !v.contains_point(xp) {
        return Ok(ZERO);
    }
    let dt = x.t - xp.t;
    let sym = symplectic(&x.z, &xp.z);
    let r2: f64 = x.z.iter().zip(&xp.z).map(|(a, b)| (a - b).norm_sqr()).sum();
    let delta = (n - 1) as f64;
    let mut total = ZERO;
    for b in w.boxes() {
        let rate = dt.abs() + 0.5 * sym.abs() + 0.25 * r2 * (b.k as f64 + 1.0);
        let panels = ((b.hi - b.lo) * (1.0 + rate)).ceil().max(4.0) as usize;
        let rule = CompositeRule::new(b.lo, b.hi, panels, 8);
        let mut buf = vec![0.0; b.k + 1];
        for (&u, &wt) in rule.nodes.iter().zip(&rule.weights) {
            let lambda = b.sign.factor() * u;
            let s = 0.5 * u * r2;
            let phi = laguerre_into(b.k, delta, s, &mut buf)[b.k] * (-0.5 * s).exp();
            total += Complex64::from_polar(wt * u.powi(n as i32) * phi, lambda * dt + 0.5 * lambda * sym);
        }
    }
    Ok(total * (2.0 * PI).powi(-(n as i32) - 1))
}

/// `‖P_W P_V‖_HS = (|V| κ(W))^{1/2}`.
pub fn hs_norm_exact(v: &SpatialSet, w: &FanSet) -> f64 {
    (v.volume() * kappa(w)).sqrt()
}

/// Right side of the Hilbert-Schmidt bound `‖P_W P_V‖²_HS ≤ (2π)ⁿ M^{−n} |V| ν₂(W)`.
pub fn hs_bound_sq(v: &SpatialSet, w: &FanSet) -> f64 {
    if w.is_empty() || v.is_empty() {
        return 0.0;
    }
    let n = w.n as i32;
    (2.0 * PI).powi(n) * w.gap().powi(-n) * v.volume() * nu2_measure(w)
}

/// `(∬_{V×grid} |N(x', x)|² dx dx')^{1/2}` on `grid`, with `x'` weighted by the
/// fraction of its cell inside `V` and the `λ` integral taken on the fan nodes
/// covering `W`. The sum over `t` runs over the periodic grid.
pub fn hs_norm_quadrature(v: &SpatialSet, w: &FanSet, grid: &HGrid, fan: &FanGrid) -> Result<f64> {
    let n = grid.n();
    check_group_set(v, n)?;
    let nodes = fan.restrict(w)?.nodes;
    if nodes.is_empty() || v.is_empty() {
        return Ok(0.0);
    }
    let d = grid.z.real_dim();
    let zc = grid.z.coordinate_table();
    let ts = grid.t.nodes();
    let mut h = vec![grid.z.axis.step(); d];
    h.push(grid.t.step());
    let delta = (n - 1) as f64;
    let k_max = nodes.iter().map(|nd| nd.k).max().unwrap_or(0);
    let mut lambdas: Vec<f64> = nodes.iter().map(|nd| nd.lambda).collect();
    lambdas.dedup();
    let scale = (2.0 * PI).powi(-(n as i32) - 1);

    let mut sources = Vec::new();
    for iz in 0..grid.z.len() {
        for (it, &t) in ts.iter().enumerate() {
            let mut c = zc[iz * d..(iz + 1) * d].to_vec();
            c.push(t);
            let frac = v.cell_fraction(&c, &h);
            if frac > 0.0 {
                sources.push((iz, it, frac));
            }
        }
    }
    use rayon::prelude::*;
    let total: f64 = sources
        .par_iter()
        .map(|&(pz, pt, frac)| {
            let zp = &zc[pz * d..(pz + 1) * d];
            let tp = ts[pt];
            let mut buf = vec![0.0; k_max + 1];
            // a[λ][z] = Σ_k dλ |λ|ⁿ φ_{k,λ}(z − z') e^{iλ/2 Im(z·z̄')}
            let mut a = vec![ZERO; lambdas.len() * grid.z.len()];
            for iz in 0..grid.z.len() {
                let z = &zc[iz * d..(iz + 1) * d];
                let r2: f64 = z.iter().zip(zp).map(|(p, q)| (p - q) * (p - q)).sum();
                let sym: f64 = (0..n).map(|j| z[2 * j + 1] * zp[2 * j] - z[2 * j] * zp[2 * j + 1]).sum();
                let mut li = 0;
                for (j, &lam) in lambdas.iter().enumerate() {
                    let s = 0.5 * lam.abs() * r2;
                    laguerre_into(k_max, delta, s, &mut buf);
                    let mut acc = 0.0;
                    while li < nodes.len() && nodes[li].lambda == lam {
                        acc += nodes[li].dlambda * buf[nodes[li].k];
                        li += 1;
                    }
                    let m = acc * lam.abs().powi(n as i32) * (-0.5 * s).exp();
                    a[j * grid.z.len() + iz] = Complex64::from_polar(m, 0.5 * lam * sym);
                }
            }
            let mut s = 0.0;
            for iz in 0..grid.z.len() {
                for &t in &ts {
                    let v: Complex64 = lambdas
                        .iter()
                        .enumerate()
                        .map(|(j, &lam)| a[j * grid.z.len() + iz] * Complex64::from_polar(1.0, lam * (t - tp)))
                        .sum();
                    s += v.norm_sqr();
                }
            }
            frac * s
        })
        .sum();
    Ok((total * grid.weight() * grid.weight()).sqrt() * scale)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpNormReport {
    pub value: f64,
    pub converged: bool,
    /// Iterations of the restart that produced `value`.
    pub iterations: usize,
    /// Estimate from each restart.
    pub restarts: Vec<f64>,
    pub seed: u64,
}

pub const OP_NORM_RESTARTS: usize = 3;
pub const OP_NORM_TOL: f64 = 1e-8;

/// `‖P_W P_V‖` as the square root of the top eigenvalue of `P_V P_W P_V`, by power
/// iteration from [`OP_NORM_RESTARTS`] seeded random starts. A restart has converged
/// once successive Rayleigh quotients differ by at most [`OP_NORM_TOL`] relative.
pub fn op_norm(
    v: &SpatialSet,
    w: &FanSet,
    grid: &HGrid,
    ctx: &SpectralContext,
    max_iterations: usize,
    seed: u64,
) -> Result<OpNormReport> {
    Ok(power_iteration(v, w, grid, ctx, max_iterations, seed)?.0)
}

fn power_iteration(
    v: &SpatialSet,
    w: &FanSet,
    grid: &HGrid,
    ctx: &SpectralContext,
    max_iterations: usize,
    seed: u64,
) -> Result<(OpNormReport, SampledField)> {
    if max_iterations < 8 {
        return invalid(format!("power iteration needs at least 8 iterations, got {max_iterations}"));
    }
    check_group_set(v, grid.n())?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, bool, usize, SampledField)> = None;
    let mut restarts = Vec::with_capacity(OP_NORM_RESTARTS);
    for _ in 0..OP_NORM_RESTARTS {
        let start = SampledField::new(
            *grid,
            (0..grid.len())
                .map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
                .collect(),
        )?;
        let mut x = project_spatial(&start, v)?;
        let mut mu = 0.0;
        let mut converged = false;
        let mut iters = 0;
        for it in 1..=max_iterations {
            iters = it;
            let nx = x.l2_norm();
            if nx == 0.0 {
                mu = 0.0;
                converged = true;
                break;
            }
            x = x.scale(Complex64::new(1.0 / nx, 0.0));
            let y = project_spatial(&project_spectral(&x, w, ctx)?, v)?;
            let next = x.inner(&y)?.re;
            x = y;
            if it > 1 && (next - mu).abs() <= OP_NORM_TOL * next.abs() {
                mu = next;
                converged = true;
                break;
            }
            mu = next;
        }
        let est = mu.max(0.0).sqrt();
        restarts.push(est);
        if best.as_ref().map_or(true, |b| est > b.0) {
            best = Some((est, converged, iters, x));
        }
    }
    let (value, converged, iterations, field) = best.expect("at least one restart");
    Ok((OpNormReport { value, converged, iterations, restarts, seed }, field))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub eps_v: f64,
    pub eps_w: f64,
    pub norm_f: f64,
    pub norm_v_complement: f64,
    pub norm_w_complement: f64,
}

/// `ε_V = ‖P_{V^c} f‖ / ‖f‖`.
pub fn time_concentration(f: &SampledField, v: &SpatialSet) -> Result<f64> {
    let nf = f.l2_norm();
    if nf == 0.0 {
        return Err(Error::ZeroFunction);
    }
    Ok(project_spatial_complement(f, v)?.l2_norm() / nf)
}

pub fn concentration(f: &SampledField, v: &SpatialSet, w: &FanSet, ctx: &SpectralContext) -> Result<ConcentrationReport> {
    let nf = f.l2_norm();
    if nf == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let nv = project_spatial_complement(f, v)?.l2_norm();
    let nw = project_spectral_complement(f, w, ctx)?.l2_norm();
    Ok(ConcentrationReport {
        eps_v: (nv / nf).min(1.0),
        eps_w: (nw / nf).min(1.0),
        norm_f: nf,
        norm_v_complement: nv,
        norm_w_complement: nw,
    })
}

/// Relative tolerance on the Donoho-Stark comparison.
pub const DONOHO_STARK_TOL: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DonohoStarkReport {
    /// `|V| ν₂(W)`
    pub lhs: f64,
    /// `(2π)^{−n} Mⁿ (1 − (ε_V² + ε_W²)^{1/2})²`
    pub rhs: f64,
    pub eps_v: f64,
    pub eps_w: f64,
    pub vacuous: bool,
    pub pass: bool,
    pub note: Option<String>,
}

/// `|V||W| ≥ (2π)^{−n} Mⁿ (1 − (ε_V² + ε_W²)^{1/2})²` with `|W| = ν₂(W)`; vacuous
/// when `ε_V² + ε_W² ≥ 1`.
pub fn donoho_stark_from(n: usize, v: &SpatialSet, w: &FanSet, c: &ConcentrationReport) -> DonohoStarkReport {
    let lhs = v.volume() * nu2_measure(w);
    let e2 = c.eps_v * c.eps_v + c.eps_w * c.eps_w;
    let m = if w.is_empty() { 0.0 } else { w.gap() };
    let rhs = (2.0 * PI).powi(-(n as i32)) * m.powi(n as i32) * (1.0 - e2.sqrt().min(1.0)).powi(2);
    let vacuous = e2 >= 1.0;
    DonohoStarkReport {
        lhs,
        rhs,
        eps_v: c.eps_v,
        eps_w: c.eps_w,
        vacuous,
        pass: vacuous || lhs >= rhs * (1.0 - DONOHO_STARK_TOL),
        note: vacuous.then(|| format!("hypothesis unmet: eps_V^2 + eps_W^2 = {e2:.6} >= 1")),
    }
}

pub fn donoho_stark_check(f: &SampledField, v: &SpatialSet, w: &FanSet, ctx: &SpectralContext) -> Result<DonohoStarkReport> {
    let c = concentration(f, v, w, ctx)?;
    Ok(donoho_stark_from(f.grid.n(), v, w, &c))
}

/// Slack allowed on `‖f − P_W P_V f‖ ≤ (‖P_{V^c} f‖² + ‖P_{W^c} f‖²)^{1/2}`.
pub const CHAIN_SLACK: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    /// `‖f − P_W P_V f‖`
    pub lhs: f64,
    /// `(‖P_{V^c} f‖² + ‖P_{W^c} f‖²)^{1/2}`
    pub rhs: f64,
    pub ratio: f64,
    /// `(|2 Re⟨P_{W^c} f, P_W P_{V^c} f⟩| + (‖P_W P_{V^c} f‖² − ‖P_{V^c} f‖²)₊) / ‖f‖²`:
    /// the amount by which the discrete projections miss the two exact steps of the chain.
    pub slack: f64,
    pub pass: bool,
}

/// Both steps of `‖f − P_W P_V f‖² = ‖P_{W^c} f‖² + ‖P_W P_{V^c} f‖² ≤ ‖P_{W^c} f‖² + ‖P_{V^c} f‖²`.
pub fn chain_check(f: &SampledField, v: &SpatialSet, w: &FanSet, ctx: &SpectralContext) -> Result<ChainReport> {
    let nf2 = f.norm_sqr();
    if nf2 == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let pv = project_spatial(f, v)?;
    let pvc = f.sub(&pv)?;
    let pwc = project_spectral_complement(f, w, ctx)?;
    let pw_pvc = project_spectral(&pvc, w, ctx)?;
    let pw_pv = project_spectral(&pv, w, ctx)?;
    let lhs = f.sub(&pw_pv)?.l2_norm();
    let rhs = (pvc.norm_sqr() + pwc.norm_sqr()).sqrt();
    let cross = 2.0 * pwc.inner(&pw_pvc)?.re;
    let excess = (pw_pvc.norm_sqr() - pvc.norm_sqr()).max(0.0);
    let ratio = if rhs == 0.0 { if lhs == 0.0 { 0.0 } else { f64::INFINITY } } else { lhs / rhs };
    Ok(ChainReport {
        lhs,
        rhs,
        ratio,
        slack: (cross.abs() + excess) / nf2,
        pass: ratio <= 1.0 + CHAIN_SLACK,
    })
}

/// Relative slack on the Nazarov-type inequality.
pub const NAZAROV_SLACK: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NazarovReport {
    pub op_norm: OpNormReport,
    /// `C = (1 − ‖P_W P_V‖)^{−2}`
    pub c: f64,
    pub trials: usize,
    /// Largest `‖f‖² / (‖P_{V^c} f‖² + ‖P_{W^c} f‖²)` over the random fields.
    pub max_ratio: f64,
    pub violations: usize,
    /// The same ratio for the alternating-projection field.
    pub adversarial_ratio: f64,
    pub pass: bool,
}

fn nazarov_ratio(f: &SampledField, v: &SpatialSet, w: &FanSet, ctx: &SpectralContext) -> Result<f64> {
    let den = project_spatial_complement(f, v)?.norm_sqr() + project_spectral_complement(f, w, ctx)?.norm_sqr();
    Ok(if den == 0.0 { f64::INFINITY } else { f.norm_sqr() / den })
}

/// `‖f‖² ≤ C (‖P_{V^c} f‖² + ‖P_{W^c} f‖²)` with the constructive constant, over
/// `trials` seeded random smooth fields and one field from alternating projections
/// onto the ranges of `P_V` and `P_W`.
pub fn nazarov_check(
    v: &SpatialSet,
    w: &FanSet,
    grid: &HGrid,
    ctx: &SpectralContext,
    trials: usize,
    seed: u64,
) -> Result<NazarovReport> {
    let (norm, top) = power_iteration(v, w, grid, ctx, 400, seed)?;
    if norm.value >= 1.0 {
        return Err(Error::Inapplicable(format!("measured ||P_W P_V|| = {} is not below 1", norm.value)));
    }
    let c = (1.0 - norm.value).powi(-2);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let mut max_ratio: f64 = 0.0;
    let mut violations = 0;
    for _ in 0..trials {
        let f = random_smooth_field(grid, &mut rng);
        let r = nazarov_ratio(&f, v, w, ctx)?;
        max_ratio = max_ratio.max(r);
        if r > c * (1.0 + NAZAROV_SLACK) {
            violations += 1;
        }
    }
    let adversarial_ratio = if top.l2_norm() == 0.0 { 0.0 } else { nazarov_ratio(&top, v, w, ctx)? };
    let adv_violation = adversarial_ratio > c * (1.0 + NAZAROV_SLACK);
    Ok(NazarovReport {
        op_norm: norm,
        c,
        trials,
        max_ratio,
        violations,
        adversarial_ratio,
        pass: violations == 0 && !adv_violation,
    })
}

/// A sum of one to three modulated Gaussian bumps with random centres, widths and
/// amplitudes, kept well inside the grid.
pub fn random_smooth_field(grid: &HGrid, rng: &mut impl Rng) -> SampledField {
    let n = grid.n();
    let lz = grid.z.axis.extent;
    let lt = grid.t.extent;
    let bumps: Vec<(Vec<Complex64>, f64, f64, f64, f64, Complex64)> = (0..rng.gen_range(1..=3))
        .map(|_| {
            let z0 = (0..n)
                .map(|_| Complex64::new(rng.gen_range(-0.4..0.4) * lz, rng.gen_range(-0.4..0.4) * lz))
                .collect();
            let t0 = rng.gen_range(-0.3..0.3) * lt;
            let a = rng.gen_range(0.5..2.0);
            let b = rng.gen_range(0.05..0.5);
            let omega = rng.gen_range(-5.0..5.0);
            let amp = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            (z0, t0, a, b, omega, amp)
        })
        .collect();
    SampledField::from_fn(*grid, |z, t| {
        bumps
            .iter()
            .map(|(z0, t0, a, b, om, amp)| {
                let d2: f64 = z.iter().zip(z0).map(|(p, q)| (p - q).norm_sqr()).sum();
                amp * Complex64::from_polar((-a * d2 - b * (t - t0) * (t - t0)).exp(), om * t)
            })
            .sum()
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriceRegime {
    /// `α > Q/2`
    Above,
    /// `0 < α < Q/2`
    Below,
}

/// `E = W × B` with `B` a box window in `Cⁿ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceWindow {
    pub w: FanSet,
    pub b: SpatialBox,
}

impl PriceWindow {
    /// `|E| = ν₂(W) · |B|`.
    pub fn measure(&self) -> f64 {
        nu2_measure(&self.w) * self.b.volume()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceReport {
    pub alpha: f64,
    pub regime: PriceRegime,
    /// `∬_E |F f|² dν₂ dw`
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    /// Constructive constant the ratio cannot exceed, see [`price_constant`].
    pub bound: f64,
    pub measure_e: f64,
}

/// Explicit constants for the two local inequalities.
///
/// For `α > Q/2`, with `θ = Q/(2α)`: `|F f| ≤ ‖f‖₁` and, from the Hölder step with
/// weight `λ + μρ^{2α}` optimized at `μ/λ = θ‖f‖²/((1−θ)‖ρ^α f‖²)`,
/// `‖f‖₁² ≤ σ_K J θ^{−θ}(1−θ)^{θ−1} ‖f‖^{2(1−θ)} ‖ρ^α f‖^{2θ}`, `J = π / (2α sin πθ)`.
///
/// For `α < Q/2`, splitting `f` at `ρ = r`, bounding the inner part through
/// `‖·‖₁` and the outer part by Plancherel, and optimizing `r`:
/// `2Q/(Q−2α) · (σ_K/(2α))^{2α/Q}`.
pub fn price_constant(n: usize, alpha: f64) -> Result<f64> {
    let q = homogeneous_dim(n) as f64;
    let sigma = koranyi_sphere_mass(n);
    if !(alpha > 0.0) || (alpha - 0.5 * q).abs() < 1e-12 {
        return invalid(format!("alpha must be positive and differ from Q/2 = {}, got {alpha}", 0.5 * q));
    }
    if alpha > 0.5 * q {
        let th = q / (2.0 * alpha);
        let j = PI / (2.0 * alpha * (PI * th).sin());
        Ok(sigma * j * th.powf(-th) * (1.0 - th).powf(th - 1.0))
    } else {
        Ok(2.0 * q / (q - 2.0 * alpha) * (sigma / (2.0 * alpha)).powf(2.0 * alpha / q))
    }
}

/// Local concentration of `F f` on `E` against the Price bound for the regime of `α`.
pub fn price_ratio(f: &SampledField, e: &PriceWindow, alpha: f64, ctx: &SpectralContext) -> Result<PriceReport> {
    let n = f.grid.n();
    let q = homogeneous_dim(n) as f64;
    let bound = price_constant(n, alpha)?;
    if e.b.dim() != 2 * n {
        return invalid(format!("window B must have {} coordinates", 2 * n));
    }
    let fan = ctx.restrict(&e.w)?;
    let hw = ctx.wgrid.axis.step();
    let hs = vec![hw; 2 * n];
    let wc = ctx.wgrid.coordinate_table();
    let frac: Vec<f64> = (0..ctx.wgrid.len())
        .map(|i| e.b.cell_fraction(&wc[i * 2 * n..(i + 1) * 2 * n], &hs))
        .collect();
    let lhs = if fan.is_empty() || f.norm_sqr() == 0.0 {
        0.0
    } else {
        let table = forward_table(f, &fan, &ctx.wgrid)?;
        let ww = ctx.wgrid.weight();
        fan.nodes
            .iter()
            .enumerate()
            .map(|(i, nd)| {
                let s: f64 = table.node_values(i).iter().zip(&frac).map(|(v, fr)| fr * v.norm_sqr()).sum();
                fan.weight(nd) * s * ww
            })
            .sum()
    };
    let me = e.measure();
    let (regime, rhs) = if alpha > 0.5 * q {
        let p = q / alpha;
        (PriceRegime::Above, me * f.l2_norm().powf(2.0 - p) * f.weighted_l2_norm(alpha).powf(p))
    } else {
        (PriceRegime::Below, me.powf(2.0 * alpha / q) * f.weighted_l2_norm(alpha).powi(2))
    };
    let ratio = if lhs == 0.0 { 0.0 } else { lhs / rhs };
    Ok(PriceReport { alpha, regime, lhs, rhs, ratio, bound, measure_e: me })
}

/// `‖f‖₁ / (‖f‖₂^{1−θ} ‖ρ^α f‖₂^θ)`, `θ = Q/(2α)`, `α > Q/2`.
pub fn l1_interp_ratio(f: &SampledField, alpha: f64) -> Result<f64> {
    let q = f.grid.homogeneous_dim() as f64;
    if !(alpha > 0.5 * q) {
        return invalid(format!("alpha must exceed Q/2 = {}, got {alpha}", 0.5 * q));
    }
    let l2 = f.l2_norm();
    if l2 == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let th = q / (2.0 * alpha);
    Ok(f.l1_norm() / (l2.powf(1.0 - th) * f.weighted_l2_norm(alpha).powf(th)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GramReport {
    pub r_list: Vec<f64>,
    /// Row-major `G_{ij} = ⟨f∘δ_{r_i}, f∘δ_{r_j}⟩`.
    pub gram: Vec<Vec<Complex64>>,
    pub min_singular_value: f64,
    pub norm_sq: f64,
}

/// Gram matrix of the dilates `f∘δ_r` sampled on `grid`, and its smallest singular value.
pub fn dilate_gram(
    f: impl Fn(&[Complex64], f64) -> Complex64 + Sync,
    grid: &HGrid,
    r_list: &[f64],
) -> Result<GramReport> {
    if r_list.is_empty() {
        return invalid("need at least one dilation factor");
    }
    for (i, r) in r_list.iter().enumerate() {
        if !(0.6..=1.6).contains(r) {
            return invalid(format!("dilation factors must lie in [0.6, 1.6], got {r}"));
        }
        if r_list[..i].iter().any(|s| s == r) {
            return invalid(format!("duplicate dilation factor {r}"));
        }
    }
    let base = SampledField::from_fn(*grid, &f);
    let norm_sq = base.norm_sqr();
    if norm_sq == 0.0 {
        return Err(Error::ZeroFunction);
    }
    let fields: Vec<SampledField> = r_list
        .iter()
        .map(|&r| {
            SampledField::from_fn(*grid, |z, t| {
                let zr: Vec<Complex64> = z.iter().map(|c| c * r).collect();
                f(&zr, r * r * t)
            })
        })
        .collect();
    let m = fields.len();
    let mut gram = vec![vec![ZERO; m]; m];
    for i in 0..m {
        for j in i..m {
            let g = fields[i].inner(&fields[j])?;
            gram[i][j] = g;
            gram[j][i] = g.conj();
        }
    }
    let mat = DMatrix::from_fn(m, m, |i, j| gram[i][j]);
    let min_singular_value = mat.singular_values().iter().cloned().fold(f64::INFINITY, f64::min);
    Ok(GramReport { r_list: r_list.to_vec(), gram, min_singular_value, norm_sq })
}

/// Ranges for seeded random spatial and fan sets; logged with sweep output.
///
/// A spatial set is a union of up to `max_boxes` boxes. A fan set is one interval
/// `sign·λ ∈ [lo, lo + width]` repeated on every ray `k ≤ k_top`, `k_top ≤ k_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SetSampler {
    pub max_boxes: usize,
    /// Box centres in `z` lie in `[−z_centre, z_centre]` per coordinate.
    pub z_centre: f64,
    pub z_half: (f64, f64),
    pub t_centre: f64,
    pub t_half: (f64, f64),
    pub k_max: usize,
    pub lambda_lo: (f64, f64),
    pub lambda_width: (f64, f64),
}

impl Default for SetSampler {
    fn default() -> Self {
        Self {
            max_boxes: 2,
            z_centre: 0.5,
            z_half: (0.75, 2.5),
            t_centre: 1.0,
            t_half: (2.0, 8.0),
            k_max: 3,
            lambda_lo: (0.75, 3.0),
            lambda_width: (1.0, 3.0),
        }
    }
}

impl SetSampler {
    pub fn spatial(&self, n: usize, rng: &mut impl Rng) -> Result<SpatialSet> {
        let boxes = (0..rng.gen_range(1..=self.max_boxes.max(1)))
            .map(|_| {
                let mut lo = Vec::with_capacity(2 * n + 1);
                let mut hi = Vec::with_capacity(2 * n + 1);
                for _ in 0..2 * n {
                    let c = rng.gen_range(-self.z_centre..=self.z_centre);
                    let h = rng.gen_range(self.z_half.0..=self.z_half.1);
                    lo.push(c - h);
                    hi.push(c + h);
                }
                let c = rng.gen_range(-self.t_centre..=self.t_centre);
                let h = rng.gen_range(self.t_half.0..=self.t_half.1);
                lo.push(c - h);
                hi.push(c + h);
                SpatialBox::new(lo, hi)
            })
            .collect::<Result<Vec<_>>>()?;
        SpatialSet::in_group(n, boxes)
    }

    /// Ranges narrowed so that every sampled fan set lies inside the band of `p`.
    pub fn fitted(&self, p: &FanProfile) -> Self {
        let mut s = *self;
        s.k_max = s.k_max.min(p.k_max);
        let hi = (s.lambda_lo.1).min(p.lambda_max - s.lambda_width.0);
        s.lambda_lo = (s.lambda_lo.0.max(p.gap).min(hi), hi);
        let w1 = s.lambda_width.1.min(p.lambda_max - hi);
        s.lambda_width = (s.lambda_width.0.min(w1), w1);
        s
    }

    pub fn fan(&self, n: usize, rng: &mut impl Rng) -> Result<FanSet> {
        let k_top = rng.gen_range(0..=self.k_max);
        let lo = rng.gen_range(self.lambda_lo.0..=self.lambda_lo.1);
        let width = rng.gen_range(self.lambda_width.0..=self.lambda_width.1);
        let sign = [Sign::Plus, Sign::Minus, Sign::Both, Sign::Both][rng.gen_range(0..4)];
        let boxes = (0..=k_top)
            .map(|k| FanBox::new(k, lo, lo + width, sign))
            .collect::<Result<Vec<_>>>()?;
        FanSet::new(n, boxes)
    }
}
