//! Smooth test functions and default resolution profiles.
//!
//! Every suite member oscillates in `t` at a frequency near 3, so its
//! `λ`-content sits well inside the default fan band `[0.25, 6.25]`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fan::{FanGrid, FanProfile};
use crate::hgroup::{CGrid, GridProfile, HGrid, SampledField};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TestFunction {
    /// `e^{−|z|²} e^{−t²/8} e^{3it}`
    Gauss,
    /// `e^{−0.7|z|²} e^{−t²/8} e^{−3it}`
    GaussWide,
    /// `e^{−|z−z₀|²} e^{−(t−½)²/8} e^{11it/4}`, `z₀ = (½ + 0.3i, 0, …)`
    Shifted,
    /// `(1 + |z|²) e^{−|z|²} e^{−t²/8} e^{−3it}`
    PolyGauss,
    /// `e^{−|z|²} e^{−t²/8} cos 3t` (real valued)
    RealCos,
    /// `e^{−|z|⁴/2} e^{−t²/8} e^{13it/4}`
    QuarticGauss,
    /// `e^{−|z|²−t²}`, no modulation
    PlainGauss,
    /// `f ≡ 0`
    Zero,
    /// Indicator of `[−1, 1]^{2n+1}`
    Box,
}

impl TestFunction {
    pub const SUITE: [TestFunction; 6] = [
        TestFunction::Gauss,
        TestFunction::GaussWide,
        TestFunction::Shifted,
        TestFunction::PolyGauss,
        TestFunction::RealCos,
        TestFunction::QuarticGauss,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Self::Gauss => "gauss",
            Self::GaussWide => "gauss_wide",
            Self::Shifted => "shifted",
            Self::PolyGauss => "poly_gauss",
            Self::RealCos => "real_cos",
            Self::QuarticGauss => "quartic_gauss",
            Self::PlainGauss => "plain_gauss",
            Self::Zero => "zero",
            Self::Box => "box",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        [
            Self::Gauss,
            Self::GaussWide,
            Self::Shifted,
            Self::PolyGauss,
            Self::RealCos,
            Self::QuarticGauss,
            Self::PlainGauss,
            Self::Zero,
            Self::Box,
        ]
        .into_iter()
        .find(|f| f.name() == name)
        .map_or_else(|| invalid(format!("unknown test function '{name}'")), Ok)
    }

    /// Depends on `z` only through `|z|`.
    pub fn is_radial(&self) -> bool {
        !matches!(self, Self::Shifted | Self::Box)
    }

    /// `|f|` is smooth, so grid `L¹` and weighted norms converge spectrally.
    pub fn smooth_modulus(&self) -> bool {
        !matches!(self, Self::RealCos | Self::Box)
    }

    pub fn eval(&self, z: &[Complex64], t: f64) -> Complex64 {
        let r2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        match self {
            Self::Gauss => Complex64::from_polar((-r2 - 0.125 * t * t).exp(), 3.0 * t),
            Self::GaussWide => Complex64::from_polar((-0.7 * r2 - 0.125 * t * t).exp(), -3.0 * t),
            Self::Shifted => {
                let z0 = Complex64::new(0.5, 0.3);
                let d2 = r2 - z[0].norm_sqr() + (z[0] - z0).norm_sqr();
                let tt = t - 0.5;
                Complex64::from_polar((-d2 - 0.125 * tt * tt).exp(), 2.75 * t)
            }
            Self::PolyGauss => Complex64::from_polar((1.0 + r2) * (-r2 - 0.125 * t * t).exp(), -3.0 * t),
            Self::RealCos => Complex64::new((-r2 - 0.125 * t * t).exp() * (3.0 * t).cos(), 0.0),
            Self::QuarticGauss => Complex64::from_polar((-0.5 * r2 * r2 - 0.125 * t * t).exp(), 3.25 * t),
            Self::PlainGauss => Complex64::new((-r2 - t * t).exp(), 0.0),
            Self::Zero => Complex64::new(0.0, 0.0),
            Self::Box => {
                let inside = t.abs() <= 1.0 && z.iter().all(|c| c.re.abs() <= 1.0 && c.im.abs() <= 1.0);
                Complex64::new(if inside { 1.0 } else { 0.0 }, 0.0)
            }
        }
    }

    /// Radial profile `f₀(y, t)` with `f(z, t) = f₀(|z|, t)`.
    pub fn radial_profile(&self, y: f64, t: f64) -> Option<Complex64> {
        if !self.is_radial() {
            return None;
        }
        Some(self.eval(&[Complex64::new(y, 0.0)], t))
    }

    pub fn sample(&self, grid: HGrid) -> SampledField {
        SampledField::from_fn(grid, |z, t| self.eval(z, t))
    }
}

/// A matched set of spatial grid, fan grid and `w` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Resolution {
    pub grid: GridProfile,
    pub fan: FanProfile,
    #[serde(rename = "L_w")]
    pub l_w: f64,
    #[serde(rename = "N_w")]
    pub n_w: usize,
}

impl Resolution {
    /// Default `n = 1` profile. The `t` window `T = 4π` makes the fan step
    /// `π/T = 0.25` commensurate with the periodic `t` quadrature, and the
    /// band `π/h_t ≈ 8` covers `λ_max = 6.25`.
    pub fn default_n1() -> Self {
        Self {
            grid: GridProfile {
                n: 1,
                l: 4.0,
                t: 4.0 * std::f64::consts::PI,
                n_s: 25,
                n_t: 64,
            },
            fan: FanProfile {
                lambda_max: 6.25,
                gap: 0.25,
                n_lambda: 24,
                k_max: 12,
            },
            l_w: 6.0,
            n_w: 33,
        }
    }

    /// Reduced `n = 2` profile for smoke runs.
    pub fn reduced_n2() -> Self {
        Self {
            grid: GridProfile {
                n: 2,
                l: 3.5,
                t: 4.0 * std::f64::consts::PI,
                n_s: 11,
                n_t: 48,
            },
            fan: FanProfile {
                lambda_max: 5.25,
                gap: 0.25,
                n_lambda: 20,
                k_max: 6,
            },
            l_w: 3.5,
            n_w: 11,
        }
    }

    pub fn hgrid(&self) -> Result<HGrid> {
        HGrid::from_profile(&self.grid)
    }

    pub fn fan_grid(&self) -> Result<FanGrid> {
        FanGrid::from_profile(self.grid.n, &self.fan)
    }

    pub fn wgrid(&self) -> Result<CGrid> {
        CGrid::new(self.grid.n, self.l_w, self.n_w)
    }

    /// Coarsening ladder ending at `self`: level 2 is `self`, levels 1 and 0 scale
    /// `N_s − 1`, `N_w − 1` and `K` by `2/3` and `1/2`.
    pub fn ladder(&self, level: usize) -> Result<Self> {
        let s = match level {
            0 => 0.5,
            1 => 2.0 / 3.0,
            2 => return Ok(*self),
            _ => return invalid(format!("ladder level must be 0, 1 or 2, got {level}")),
        };
        let scale = |m: usize| ((m - 1) as f64 * s).round() as usize + 1;
        let mut r = *self;
        r.grid.n_s = scale(self.grid.n_s);
        r.n_w = scale(self.n_w);
        r.fan.k_max = ((self.fan.k_max as f64) * s).round() as usize;
        Ok(r)
    }

    /// `T`, `N_t` and `N_λ` doubled: `h_t` is kept and the fan step `Δλ` halves.
    pub fn lambda_refined(&self) -> Self {
        let mut r = *self;
        r.grid.t *= 2.0;
        r.grid.n_t *= 2;
        r.fan.n_lambda *= 2;
        r
    }
}
