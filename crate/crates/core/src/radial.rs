//! Radial functions `f(z,t) = f₀(|z|,t)`: partial Fourier transform in `t`,
//! Laguerre coefficients, the product form of the transform, the `f^{−λ}`
//! Parseval identity and the Beurling hypothesis integral.

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fan::FanPoint;
use crate::hgroup::{Axis, HGrid};
use crate::quad::CompositeRule;
use crate::specfun::{laguerre_into, norm_const, sphere_area};
use crate::suite::TestFunction;

/// Largest `k` the Parseval tail rule may reach.
pub const PARSEVAL_K_CAP: usize = 100;

/// Relative size of the last three Parseval terms at which the sum stops.
pub const PARSEVAL_TAIL: f64 = 1e-6;

/// Final log-log slope of `I(R)` above which the Beurling integral is judged divergent.
pub const DIVERGENCE_SLOPE: f64 = 1.0;

/// Composite Gauss-Legendre rule in `y ∈ [0, Y]` times a cell-centred `t` axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub n: usize,
    pub y_extent: f64,
    pub y_panels: usize,
    pub y_order: usize,
    pub t: Axis,
}

impl RadialGrid {
    pub fn new(n: usize, y_extent: f64, y_panels: usize, y_order: usize, t: Axis) -> Result<Self> {
        if n == 0 {
            return invalid("dimension n must be at least 1");
        }
        if !(y_extent > 0.0) || !y_extent.is_finite() {
            return invalid(format!("y extent must be positive, got {y_extent}"));
        }
        if y_panels == 0 || y_order == 0 {
            return invalid("y rule needs at least one panel and one node per panel");
        }
        Ok(Self { n, y_extent, y_panels, y_order, t })
    }

    /// Same `t` axis as `grid`, `y ∈ [0, L]` with 24 panels of order 8.
    pub fn matching(grid: &HGrid) -> Result<Self> {
        Self::new(grid.n(), grid.z.axis.extent, 24, 8, grid.t)
    }

    pub fn rule(&self) -> CompositeRule {
        CompositeRule::new(0.0, self.y_extent, self.y_panels, self.y_order)
    }

    pub fn n_y(&self) -> usize {
        self.y_panels * self.y_order
    }

    pub fn len(&self) -> usize {
        self.n_y() * self.t.count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lambda_band(&self) -> f64 {
        PI / self.t.step()
    }
}

/// Samples of `f₀` on a [`RadialGrid`], `y`-major with `t` fastest.
#[derive(Debug, Clone)]
pub struct RadialField {
    pub grid: RadialGrid,
    pub values: Vec<Complex64>,
    y: Vec<f64>,
    // rule weight times the polar Jacobian y^{2n−1}
    wy: Vec<f64>,
}

impl RadialField {
    pub fn new(grid: RadialGrid, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a radial grid of {} nodes",
                values.len(),
                grid.len()
            )));
        }
        let rule = grid.rule();
        let p = 2 * grid.n as i32 - 1;
        let wy = rule.nodes.iter().zip(&rule.weights).map(|(y, w)| w * y.powi(p)).collect();
        Ok(Self { grid, values, y: rule.nodes, wy })
    }

    pub fn from_fn(grid: RadialGrid, f0: impl Fn(f64, f64) -> Complex64) -> Self {
        let ts = grid.t.nodes();
        let values = grid
            .rule()
            .nodes
            .iter()
            .flat_map(|&y| ts.iter().map(move |&t| (y, t)))
            .map(|(y, t)| f0(y, t))
            .collect();
        Self::new(grid, values).expect("sizes agree by construction")
    }

    pub fn from_test_function(grid: RadialGrid, f: TestFunction) -> Result<Self> {
        if !f.is_radial() {
            return Err(Error::Inapplicable(format!("'{}' is not radial", f.name())));
        }
        let n = grid.n;
        Ok(Self::from_fn(grid, |y, t| {
            let mut z = vec![Complex64::new(0.0, 0.0); n];
            z[0] = Complex64::new(y, 0.0);
            f.eval(&z, t)
        }))
    }

    pub fn y_nodes(&self) -> &[f64] {
        &self.y
    }

    fn row(&self, iy: usize) -> &[Complex64] {
        let nt = self.grid.t.count;
        &self.values[iy * nt..(iy + 1) * nt]
    }

    /// `∫₀^Y g(y) y^{2n−1} dy` for samples at the `y` nodes.
    fn y_integral(&self, g: impl Fn(usize) -> f64) -> f64 {
        self.wy.iter().enumerate().map(|(i, w)| w * g(i)).sum()
    }

    /// `∫₀^Y |f₀(x, t_j)|² x^{2n−1} dx` at every `t` node.
    fn spatial_mass(&self) -> Vec<f64> {
        (0..self.grid.t.count)
            .map(|j| self.y_integral(|i| self.row(i)[j].norm_sqr()))
            .collect()
    }

    /// CSV with columns `y, t, re, im`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(writer);
        wtr.write_record(["y", "t", "re", "im"])?;
        let ts = self.grid.t.nodes();
        for (iy, y) in self.y.iter().enumerate() {
            for (t, v) in ts.iter().zip(self.row(iy)) {
                wtr.write_record([y, t, &v.re, &v.im].map(|x| format!("{x:e}")))?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Reads rows `y, t, value` or `y, t, re, im` in the node order of `grid`;
    /// coordinates must match to 1e-9.
    pub fn read_csv<R: Read>(grid: RadialGrid, reader: R) -> Result<Self> {
        let ys = grid.rule().nodes;
        let ts = grid.t.nodes();
        let mut rdr = csv::Reader::from_reader(reader);
        let mut values = Vec::with_capacity(grid.len());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            if rec.len() != 3 && rec.len() != 4 {
                return Err(Error::GridMismatch(format!("row {i} has {} columns, expected 3 or 4", rec.len())));
            }
            let nums: Vec<f64> = rec
                .iter()
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::InvalidParameter(format!("row {i}: {e}")))?;
            if i >= grid.len() {
                return Err(Error::GridMismatch("more rows than grid nodes".into()));
            }
            let (y, t) = (ys[i / ts.len()], ts[i % ts.len()]);
            if (nums[0] - y).abs() > 1e-9 || (nums[1] - t).abs() > 1e-9 {
                return Err(Error::GridMismatch(format!("row {i} coordinates do not match the grid")));
            }
            values.push(Complex64::new(nums[2], nums.get(3).copied().unwrap_or(0.0)));
        }
        Self::new(grid, values)
    }
}

fn check_band(f: &RadialField, lambda: f64) -> Result<()> {
    let limit = f.grid.lambda_band();
    if !lambda.is_finite() || lambda.abs() > limit * (1.0 + 1e-12) {
        return Err(Error::BandViolation { lambda, limit });
    }
    Ok(())
}

/// `f^λ(y) = ∫ f₀(y,t) e^{iλt} dt` at every `y` node.
pub fn partial_ft_t(f: &RadialField, lambda: f64) -> Result<Vec<Complex64>> {
    check_band(f, lambda)?;
    let h = f.grid.t.step();
    let phases: Vec<Complex64> = f.grid.t.nodes().iter().map(|&t| Complex64::from_polar(h, lambda * t)).collect();
    Ok((0..f.y.len())
        .map(|i| f.row(i).iter().zip(&phases).map(|(v, p)| v * p).sum())
        .collect())
}

/// `R_k(λ, f) = c_{n,k} σ(S^{2n−1}) ∫₀^Y f^λ(y) φ_{k,λ}(y) y^{2n−1} dy` for `k = 0..=k_max`.
pub fn laguerre_coeffs(f: &RadialField, lambda: f64, k_max: usize) -> Result<Vec<Complex64>> {
    if lambda == 0.0 {
        return Err(Error::DegenerateRay);
    }
    let fl = partial_ft_t(f, lambda)?;
    let n = f.grid.n;
    let delta = (n - 1) as f64;
    let mut acc = vec![Complex64::new(0.0, 0.0); k_max + 1];
    let mut buf = vec![0.0; k_max + 1];
    for (i, &y) in f.y.iter().enumerate() {
        let s = 0.5 * lambda.abs() * y * y;
        let g = fl[i] * f.wy[i] * (-0.5 * s).exp();
        for (a, l) in acc.iter_mut().zip(laguerre_into(k_max, delta, s, &mut buf)) {
            *a += g * *l;
        }
    }
    let sigma = sphere_area(n);
    Ok(acc.into_iter().enumerate().map(|(k, a)| a * norm_const(n, k) * sigma).collect())
}

pub fn laguerre_coeff(f: &RadialField, lambda: f64, k: usize) -> Result<Complex64> {
    Ok(laguerre_coeffs(f, lambda, k)?[k])
}

/// `F(f)(a, w) = c_{n,k} R_k(−λ, f) φ_{k,λ}(w)`.
pub fn radial_forward(f: &RadialField, a: &FanPoint, w: &[Complex64]) -> Result<Complex64> {
    let n = f.grid.n;
    if w.len() != n {
        return Err(Error::DimensionMismatch { expected: n, found: w.len() });
    }
    let (lambda, k) = match *a {
        FanPoint::Finite { lambda, k } => (lambda, k),
        FanPoint::Degenerate { .. } => {
            return Err(Error::Inapplicable("the radial product form covers finite rays only".into()));
        }
    };
    let r = laguerre_coeff(f, -lambda, k)?;
    let r2: f64 = w.iter().map(|c| c.norm_sqr()).sum();
    Ok(r * norm_const(n, k) * phi_r2(n, k, lambda, r2))
}

fn phi_r2(n: usize, k: usize, lambda: f64, r2: f64) -> f64 {
    let s = 0.5 * lambda.abs() * r2;
    let mut buf = vec![0.0; k + 1];
    laguerre_into(k, (n - 1) as f64, s, &mut buf)[k] * (-0.5 * s).exp()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParsevalReport {
    pub lambda: f64,
    /// `∫₀^Y |f^{−λ}(y)|² y^{2n−1} dy`
    pub lhs: f64,
    /// Truncated coefficient sum at `k_used`.
    pub rhs: f64,
    pub residual: f64,
    pub k_used: usize,
    pub tail_converged: bool,
    /// Relative gap after each partial sum `k = 0..=k_used`.
    pub partial_residuals: Vec<f64>,
}

/// Compares `∫|f^{−λ}|² y^{2n−1} dy` with
/// `2σ^{−2}(|λ|/2)ⁿ Σ_k c_{n,k}^{−2} (k!/Γ(k+n)) |F(f)((λ,k),0)|²`.
///
/// The sum stops at the first `k ≥ 2` whose last three terms add up to less than
/// [`PARSEVAL_TAIL`] of the running sum, or at [`PARSEVAL_K_CAP`].
pub fn radial_parseval_residual(f: &RadialField, lambda: f64) -> Result<ParsevalReport> {
    if lambda == 0.0 {
        return Err(Error::DegenerateRay);
    }
    let n = f.grid.n;
    let fl = partial_ft_t(f, -lambda)?;
    let lhs = f.y_integral(|i| fl[i].norm_sqr());
    let coeffs = laguerre_coeffs(f, -lambda, PARSEVAL_K_CAP)?;
    let sigma = sphere_area(n);
    let fact_n1: f64 = (1..n).map(|j| j as f64).product();
    let pre = 2.0 / (sigma * sigma) * (0.5 * lambda.abs()).powi(n as i32);
    let terms: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let c = norm_const(n, k);
            // F((λ,k),0) = c R_k(−λ) φ_k(0) and k!/Γ(k+n) = c/(n−1)!
            let fk = r * c * phi_r2(n, k, lambda, 0.0);
            pre * fk.norm_sqr() / (c * fact_n1)
        })
        .collect();
    let rel = |s: f64| if lhs == 0.0 { 0.0 } else { (lhs - s).abs() / lhs };
    let mut sum = 0.0;
    let mut partial = Vec::new();
    let mut k_used = PARSEVAL_K_CAP;
    let mut tail_converged = false;
    for (k, t) in terms.iter().enumerate() {
        sum += t;
        partial.push(rel(sum));
        if k >= 2 && terms[k - 2..=k].iter().sum::<f64>() <= PARSEVAL_TAIL * sum {
            k_used = k;
            tail_converged = true;
            break;
        }
    }
    Ok(ParsevalReport {
        lambda,
        lhs,
        rhs: sum,
        residual: rel(sum),
        k_used,
        tail_converged,
        partial_residuals: partial,
    })
}

/// `e^{3|t||λ|} / (1+|t|+|λ|)^N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BeurlingWeight {
    #[serde(rename = "N")]
    pub n_exp: f64,
}

impl BeurlingWeight {
    pub fn new(n_exp: f64) -> Result<Self> {
        if !(n_exp >= 0.0) || !n_exp.is_finite() {
            return invalid(format!("Beurling exponent N must be nonnegative, got {n_exp}"));
        }
        Ok(Self { n_exp })
    }

    pub fn eval(&self, t: f64, lambda: f64) -> f64 {
        let (t, l) = (t.abs(), lambda.abs());
        (3.0 * t * l).exp() / (1.0 + t + l).powf(self.n_exp)
    }
}

/// `G(t,λ) = (∫₀^Y |f₀(x,t)|² x^{2n−1} dx)(∫₀^Y |f^{−λ}(y)|² y^{2n−1} dy)`.
///
/// The first factor is linear between `t` nodes, constant beyond the outermost
/// node and zero outside the window.
pub fn beurling_g(f: &RadialField, t: f64, lambda: f64) -> Result<f64> {
    let fl = partial_ft_t(f, -lambda)?;
    let spec = f.y_integral(|i| fl[i].norm_sqr());
    Ok(interp_mass(&f.spatial_mass(), &f.grid.t, t) * spec)
}

fn interp_mass(mass: &[f64], axis: &Axis, t: f64) -> f64 {
    if t.abs() > axis.extent {
        return 0.0;
    }
    let x = (t + axis.extent) / axis.step() - 0.5;
    let last = axis.count - 1;
    if x <= 0.0 {
        return mass[0];
    }
    if x >= last as f64 {
        return mass[last];
    }
    let j = x.floor() as usize;
    let u = x - j as f64;
    (1.0 - u) * mass[j] + u * mass[j + 1]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Convergent,
    Divergent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeurlingPoint {
    #[serde(rename = "R")]
    pub r: f64,
    #[serde(rename = "I")]
    pub integral: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeurlingReport {
    pub weight: BeurlingWeight,
    pub points: Vec<BeurlingPoint>,
    /// `d ln I / d ln R` between the last two radii.
    pub slope: f64,
    pub verdict: Verdict,
}

/// Truncated hypothesis integrals
/// `I(R) = ∬_{|t|,|λ| ≤ R} G(t,λ) e^{3|t||λ|} (1+|t|+|λ|)^{−N} dt dλ`
/// and a divergence verdict from the final log-log slope.
pub fn beurling_diagnostic(f: &RadialField, n_exp: f64, radii: &[f64]) -> Result<BeurlingReport> {
    let weight = BeurlingWeight::new(n_exp)?;
    if radii.len() < 2 {
        return invalid("need at least two radii");
    }
    if radii[0] <= 0.0 || radii.windows(2).any(|p| p[1] <= p[0]) {
        return invalid("radii must be positive and strictly increasing");
    }
    let r_top = radii[radii.len() - 1];
    if r_top > f.grid.t.extent {
        return invalid(format!("radius {r_top} exceeds the t window {}", f.grid.t.extent));
    }
    check_band(f, r_top)?;

    let mass = f.spatial_mass();
    let axis = f.grid.t;
    let h = axis.step();
    let ts = axis.nodes();
    let points = radii
        .iter()
        .map(|&r| {
            let rule = CompositeRule::new(-r, r, (8.0 * r).ceil() as usize, 8);
            let spec: Vec<f64> = rule
                .nodes
                .par_iter()
                .map(|&l| {
                    let fl = partial_ft_t(f, -l)?;
                    Ok(f.y_integral(|i| fl[i].norm_sqr()))
                })
                .collect::<Result<_>>()?;
            let mut total = 0.0;
            for (j, &t) in ts.iter().enumerate() {
                let frac = ((t + 0.5 * h).min(r) - (t - 0.5 * h).max(-r)).max(0.0) / h;
                if frac == 0.0 || mass[j] == 0.0 {
                    continue;
                }
                let inner: f64 = rule
                    .nodes
                    .iter()
                    .zip(&rule.weights)
                    .zip(&spec)
                    .map(|((&l, &wl), &s)| wl * s * weight.eval(t, l))
                    .sum();
                total += h * frac * mass[j] * inner;
            }
            Ok(BeurlingPoint { r, integral: total })
        })
        .collect::<Result<Vec<_>>>()?;

    let (a, b) = (&points[points.len() - 2], &points[points.len() - 1]);
    let slope = if b.integral == 0.0 {
        0.0
    } else if a.integral == 0.0 {
        f64::INFINITY
    } else {
        (b.integral / a.integral).ln() / (b.r / a.r).ln()
    };
    let verdict = if slope > DIVERGENCE_SLOPE { Verdict::Divergent } else { Verdict::Convergent };
    Ok(BeurlingReport { weight, points, slope, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specfun::{laguerre_fn_r2, EigenParams};

    fn grid() -> RadialGrid {
        RadialGrid::new(1, 6.0, 24, 8, Axis::new(4.0 * PI, 64).unwrap()).unwrap()
    }

    fn gauss(g: RadialGrid) -> RadialField {
        RadialField::from_fn(g, |y, t| Complex64::new((-y * y - t * t).exp(), 0.0))
    }

    #[test]
    fn partial_ft_of_gaussian() {
        let f = gauss(grid());
        for lambda in [0.0, 1.0, -2.5, 6.0] {
            let fl = partial_ft_t(&f, lambda).unwrap();
            for (y, v) in f.y_nodes().iter().zip(&fl) {
                let want = PI.sqrt() * (-0.25 * lambda * lambda - y * y).exp();
                assert!((v - want).norm() < 1e-6, "λ={lambda} y={y}");
            }
        }
    }

    #[test]
    fn even_real_profile_has_real_symmetric_transform() {
        let f = gauss(grid());
        let a = partial_ft_t(&f, 1.3).unwrap();
        let b = partial_ft_t(&f, -1.3).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!(x.im.abs() < 1e-14 && (x - y).norm() < 1e-14);
        }
    }

    #[test]
    fn band_is_enforced() {
        let f = gauss(grid());
        let band = f.grid.lambda_band();
        assert!(matches!(partial_ft_t(&f, band * 1.01), Err(Error::BandViolation { .. })));
        assert!(matches!(laguerre_coeff(&f, 0.0, 1), Err(Error::DegenerateRay)));
    }

    #[test]
    fn laguerre_coeff_against_direct_quadrature() {
        // independent route: Simpson in y with the eigenfunction helper
        let f = gauss(grid());
        let (lambda, k) = (2.0, 3);
        let p = EigenParams::new(1, k, lambda).unwrap();
        let m = 4000;
        let h = 6.0 / m as f64;
        let mut s = 0.0;
        for i in 0..=m {
            let y = i as f64 * h;
            let c = if i == 0 || i == m { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            s += c * (-y * y).exp() * laguerre_fn_r2(&p, y * y) * y;
        }
        let want = 2.0 * PI * PI.sqrt() * (-1.0f64).exp() * s * h / 3.0;
        let got = laguerre_coeff(&f, lambda, k).unwrap();
        assert!((got.re - want).abs() < 1e-9 * want.abs().max(1e-3), "{got} vs {want}");
        assert!(got.im.abs() < 1e-12);
    }

    #[test]
    fn radial_forward_vanishes_on_nodes_of_phi() {
        let f = gauss(grid());
        // L_1(s) = 1 − s vanishes at s = 1, i.e. |w|² = 2/|λ|
        let w = [Complex64::new(1.0, 0.0)];
        let v = radial_forward(&f, &FanPoint::finite(2.0, 1).unwrap(), &w).unwrap();
        assert!(v.norm() < 1e-14);
        let zero = RadialField::from_fn(grid(), |_, _| Complex64::new(0.0, 0.0));
        assert_eq!(radial_forward(&zero, &FanPoint::finite(1.0, 0).unwrap(), &w).unwrap().norm(), 0.0);
        assert!(radial_forward(&f, &FanPoint::degenerate(1.0).unwrap(), &w).is_err());
    }

    #[test]
    fn parseval_for_gaussian() {
        let f = gauss(grid());
        let rep = radial_parseval_residual(&f, 1.0).unwrap();
        assert!(rep.tail_converged);
        let at12 = rep.partial_residuals[12.min(rep.k_used)];
        assert!(at12 < 1e-2, "{at12}");
        assert!(rep.residual < 1e-5);
        for p in rep.partial_residuals.windows(2) {
            assert!(p[1] <= p[0] + 1e-15);
        }
        let zero = RadialField::from_fn(grid(), |_, _| Complex64::new(0.0, 0.0));
        assert_eq!(radial_parseval_residual(&zero, 1.0).unwrap().residual, 0.0);
    }

    #[test]
    fn parseval_in_two_dimensions() {
        let g = RadialGrid::new(2, 6.0, 24, 8, Axis::new(4.0 * PI, 64).unwrap()).unwrap();
        let f = RadialField::from_fn(g, |y, t| Complex64::from_polar((-y * y - 0.125 * t * t).exp(), 3.0 * t));
        let rep = radial_parseval_residual(&f, -2.5).unwrap();
        assert!(rep.residual < 1e-5, "{}", rep.residual);
    }

    #[test]
    fn beurling_g_closed_form() {
        let f = gauss(grid());
        let ts = f.grid.t.nodes();
        for &t in &ts[28..36] {
            for lambda in [0.0f64, 1.0, -3.0] {
                let want = 0.25 * (-2.0 * t * t).exp() * 0.25 * PI * (-0.5 * lambda * lambda).exp();
                let got = beurling_g(&f, t, lambda).unwrap();
                assert!((got - want).abs() < 1e-6 * want.max(1e-3), "t={t} λ={lambda}");
                assert!((beurling_g(&f, -t, lambda).unwrap() - got).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn beurling_verdicts() {
        let f = gauss(grid());
        let rep = beurling_diagnostic(&f, 2.0, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(rep.verdict, Verdict::Divergent);
        assert!(rep.slope > 0.0);
        for p in rep.points.windows(2) {
            assert!(p[1].integral >= p[0].integral);
        }
        let zero = RadialField::from_fn(grid(), |_, _| Complex64::new(0.0, 0.0));
        let rep = beurling_diagnostic(&zero, 2.0, &[1.0, 2.0]).unwrap();
        assert_eq!(rep.verdict, Verdict::Convergent);
        assert!(rep.points.iter().all(|p| p.integral == 0.0));
        assert!(beurling_diagnostic(&f, -1.0, &[1.0, 2.0]).is_err());
        assert!(beurling_diagnostic(&f, 1.0, &[2.0, 1.0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let g = RadialGrid::new(1, 4.0, 2, 3, Axis::new(2.0, 5).unwrap()).unwrap();
        let f = RadialField::from_fn(g, |y, t| Complex64::new(y - t, y * t));
        let mut buf = Vec::new();
        f.write_csv(&mut buf).unwrap();
        let back = RadialField::read_csv(g, buf.as_slice()).unwrap();
        assert_eq!(back.values, f.values);
        let other = RadialGrid::new(1, 4.0, 2, 3, Axis::new(2.5, 5).unwrap()).unwrap();
        assert!(RadialField::read_csv(other, buf.as_slice()).is_err());
    }

    #[test]
    fn non_radial_functions_are_rejected() {
        assert!(RadialField::from_test_function(grid(), TestFunction::Shifted).is_err());
        assert!(RadialField::from_test_function(grid(), TestFunction::Gauss).is_ok());
    }
}
