//! Quantitative checks behind the `hsft verify` subcommands and the acceptance
//! harness.
//!
//! Every check returns a [`CheckReport`]. `lhs` is the headline statistic and `rhs`
//! the bound it is held to; which way the comparison goes is part of each check's
//! definition and is spelled out on the function. Side conditions such as
//! convergence orders live in `details` and feed `pass` as well.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{invalid, Error, Result};
use crate::fan::{FanBox, FanPoint, FanSet, Sign};
use crate::hgroup::{homogeneous_dim, sublaplacian_apply, CGrid, GridProfile, HGrid, SampledField};
use crate::radial::{
    beurling_diagnostic, radial_forward, radial_parseval_residual, RadialField, RadialGrid, Verdict,
    DIVERGENCE_SLOPE,
};
use crate::sft::{
    dilation_covariance_residual, forward, forward_table, inversion_error, plancherel_ratio, subspace_residual,
    twisted_convolution, DilationProbe,
};
use crate::specfun::{eigenfunction, laguerre_fn_r2, EigenParams};
use crate::suite::{Resolution, TestFunction};
use crate::uncertainty::{
    concentration, donoho_stark_from, hs_bound_sq, hs_norm_exact, hs_norm_quadrature, chain_check,
    l1_interp_ratio, nazarov_check, price_ratio, PriceWindow, SetSampler, SpatialBox, SpatialSet,
    SpectralContext, DONOHO_STARK_TOL,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Check {
    Plancherel,
    Inversion,
    Dilation,
    Subspace,
    Hs,
    Donoho,
    Chain,
    Nazarov,
    Price,
    Radial,
    Sublaplacian,
    Gram,
    Beurling,
}

impl Check {
    pub const ALL: [Check; 13] = [
        Check::Plancherel,
        Check::Inversion,
        Check::Dilation,
        Check::Subspace,
        Check::Hs,
        Check::Donoho,
        Check::Chain,
        Check::Nazarov,
        Check::Price,
        Check::Radial,
        Check::Sublaplacian,
        Check::Gram,
        Check::Beurling,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Check::Plancherel => "plancherel",
            Check::Inversion => "inversion",
            Check::Dilation => "dilation",
            Check::Subspace => "subspace",
            Check::Hs => "hs",
            Check::Donoho => "donoho",
            Check::Chain => "chain",
            Check::Nazarov => "nazarov",
            Check::Price => "price",
            Check::Radial => "radial",
            Check::Sublaplacian => "sublaplacian",
            Check::Gram => "gram",
            Check::Beurling => "beurling",
        }
    }

    pub fn from_name(name: &str) -> Result<Self> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == name)
            .map_or_else(|| invalid(format!("unknown check '{name}'")), Ok)
    }
}

/// Pass thresholds. All must be positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// `|ratio − 1|` at the finest ladder level.
    pub plancherel: f64,
    /// Smallest observed convergence order, Plancherel and sublaplacian.
    pub min_order: f64,
    pub inversion: f64,
    pub dilation: f64,
    pub dilation_identity: f64,
    pub reproducing: f64,
    /// Subspace residual of full spectral tables.
    pub subspace: f64,
    pub hs: f64,
    /// Multiplicative slack on the chain inequality.
    pub chain_slack: f64,
    /// Allowed relative spread of the slack ratio around `½` under refinement.
    pub halving_band: f64,
    pub nazarov_norm: f64,
    pub l1_interp: f64,
    pub radial: f64,
    pub parseval: f64,
    pub eigenvalue: f64,
    pub gram: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            plancherel: 5e-3,
            min_order: 1.8,
            inversion: 1e-2,
            dilation: 1e-3,
            dilation_identity: 1e-12,
            reproducing: 1e-3,
            subspace: 2e-2,
            hs: 0.05,
            chain_slack: 0.02,
            halving_band: 0.3,
            nazarov_norm: 0.8,
            l1_interp: 1e-3,
            radial: 1e-3,
            parseval: 1e-2,
            eigenvalue: 1e-2,
            gram: 1e-3,
        }
    }
}

impl Tolerances {
    fn entries(&self) -> [(&'static str, f64); 16] {
        [
            ("plancherel", self.plancherel),
            ("min_order", self.min_order),
            ("inversion", self.inversion),
            ("dilation", self.dilation),
            ("dilation_identity", self.dilation_identity),
            ("reproducing", self.reproducing),
            ("subspace", self.subspace),
            ("hs", self.hs),
            ("chain_slack", self.chain_slack),
            ("halving_band", self.halving_band),
            ("nazarov_norm", self.nazarov_norm),
            ("l1_interp", self.l1_interp),
            ("radial", self.radial),
            ("parseval", self.parseval),
            ("eigenvalue", self.eigenvalue),
            ("gram", self.gram),
        ]
    }
}

/// Window `[−l, l]^{2n}` with `count` nodes per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowProfile {
    pub n: usize,
    #[serde(rename = "L")]
    pub l: f64,
    pub count: usize,
}

/// Dedicated grids for checks that need more room or resolution than the main profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CheckGrids {
    pub dilation: GridProfile,
    pub l1_interp: GridProfile,
    pub gram: GridProfile,
    /// Coarsest level; the next two double `N_s` and `N_t`.
    pub sublaplacian: GridProfile,
    pub reproducing: WindowProfile,
}

impl Default for CheckGrids {
    fn default() -> Self {
        Self {
            dilation: GridProfile { n: 1, l: 8.0, t: 40.0, n_s: 81, n_t: 481 },
            l1_interp: GridProfile { n: 1, l: 10.0, t: 48.0, n_s: 101, n_t: 321 },
            gram: GridProfile { n: 1, l: 2.0, t: 2.0, n_s: 64, n_t: 64 },
            sublaplacian: GridProfile { n: 1, l: 6.0, t: 0.5 * PI, n_s: 30, n_t: 5 },
            reproducing: WindowProfile { n: 1, l: 8.0, count: 81 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckConfig {
    pub resolution: Resolution,
    pub suite: Vec<TestFunction>,
    pub seed: u64,
    /// Set pairs per sweep.
    pub pairs: usize,
    /// Random fields for the Nazarov check and random pairs for the HS bound.
    pub trials: usize,
    pub sampler: SetSampler,
    pub tolerances: Tolerances,
    pub grids: CheckGrids,
}

impl Default for CheckConfig {
    fn default() -> Self {
        Self {
            resolution: Resolution::default_n1(),
            suite: TestFunction::SUITE.to_vec(),
            seed: 1,
            pairs: 20,
            trials: 100,
            sampler: SetSampler::default(),
            tolerances: Tolerances::default(),
            grids: CheckGrids::default(),
        }
    }
}

impl CheckConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in self.tolerances.entries() {
            if !(v.is_finite() && v > 0.0) {
                return invalid(format!("tolerance '{name}' must be positive and finite, got {v}"));
            }
        }
        if self.suite.is_empty() {
            return invalid("suite must name at least one function");
        }
        if let Some(f) = self.suite.iter().find(|f| matches!(f, TestFunction::Zero)) {
            return invalid(format!("suite function '{}' has zero norm", f.name()));
        }
        if self.pairs == 0 || self.trials == 0 {
            return invalid("pairs and trials must be positive");
        }
        let g = self.resolution.hgrid()?;
        let fan = self.resolution.fan_grid()?;
        self.resolution.wgrid()?;
        if fan.max_abs_lambda() > g.lambda_band() {
            return Err(Error::BandViolation {
                lambda: fan.max_abs_lambda(),
                limit: g.lambda_band(),
            });
        }
        for p in [self.grids.dilation, self.grids.l1_interp, self.grids.gram, self.grids.sublaplacian] {
            HGrid::from_profile(&p)?;
        }
        let r = self.grids.reproducing;
        CGrid::new(r.n, r.l, r.count)?;
        Ok(())
    }

    fn n(&self) -> usize {
        self.resolution.grid.n
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: Check,
    pub inputs: Value,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub pass: bool,
    pub details: Value,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Runs one check from scratch.
pub fn run(check: Check, cfg: &CheckConfig) -> Result<CheckReport> {
    cfg.validate()?;
    match check {
        Check::Plancherel => Ok(plancherel_report(cfg, &ladder_stats(cfg)?)),
        Check::Inversion => Ok(inversion_report(cfg, &ladder_stats(cfg)?)),
        Check::Dilation => dilation(cfg),
        Check::Subspace => subspace(cfg),
        Check::Hs => hs(cfg),
        Check::Donoho => Ok(donoho_report(cfg, &sweep(cfg, &cfg.resolution)?)),
        Check::Chain => {
            let base = sweep(cfg, &cfg.resolution)?;
            let fine = sweep(cfg, &cfg.resolution.lambda_refined())?;
            Ok(chain_report(cfg, &base, &fine))
        }
        Check::Nazarov => nazarov(cfg),
        Check::Price => price(cfg),
        Check::Radial => radial(cfg),
        Check::Sublaplacian => sublaplacian(cfg),
        Check::Gram => gram(cfg),
        Check::Beurling => beurling(cfg),
    }
}

fn names(fs: &[TestFunction]) -> Vec<&'static str> {
    fs.iter().map(|f| f.name()).collect()
}

fn fmax(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

/// Observed order `ln(e₀/e₁) / ln(h₀/h₁)`; `None` once the finer error sits at
/// roundoff.
fn order(e0: f64, e1: f64, h0: f64, h1: f64) -> Option<f64> {
    const FLOOR: f64 = 1e-12;
    (e1 > FLOOR).then(|| (e0 / e1).ln() / (h0 / h1).ln())
}

// ---- Plancherel and inversion ----

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub function: TestFunction,
    pub level: usize,
    pub h: f64,
    pub plancherel_ratio: f64,
    pub inversion_error: f64,
}

/// Plancherel ratio and inversion error for every suite function on the three
/// ladder levels of the configured resolution.
pub fn ladder_stats(cfg: &CheckConfig) -> Result<Vec<LadderRow>> {
    let mut rows = Vec::new();
    for level in 0..3 {
        let r = cfg.resolution.ladder(level)?;
        let grid = r.hgrid()?;
        let fan = r.fan_grid()?;
        let wgrid = r.wgrid()?;
        for &f in &cfg.suite {
            let fs = f.sample(grid);
            let table = forward_table(&fs, &fan, &wgrid)?;
            rows.push(LadderRow {
                function: f,
                level,
                h: grid.z.axis.step(),
                plancherel_ratio: plancherel_ratio(&fs, &table)?,
                inversion_error: inversion_error(&fs, &table)?,
            });
        }
    }
    Ok(rows)
}

fn by_function<'a>(rows: &'a [LadderRow], f: TestFunction) -> Vec<&'a LadderRow> {
    let mut v: Vec<_> = rows.iter().filter(|r| r.function == f).collect();
    v.sort_by_key(|r| r.level);
    v
}

/// `lhs = max |ratio − 1|` at the finest level, `≤ rhs`; every observed order `≥ min_order`.
pub fn plancherel_report(cfg: &CheckConfig, rows: &[LadderRow]) -> CheckReport {
    let tol = &cfg.tolerances;
    let mut per = Vec::new();
    let mut worst: f64 = 0.0;
    let mut min_order = f64::INFINITY;
    for &f in &cfg.suite {
        let r = by_function(rows, f);
        let errs: Vec<f64> = r.iter().map(|x| (x.plancherel_ratio - 1.0).abs()).collect();
        let orders: Vec<Option<f64>> = errs
            .windows(2)
            .zip(r.windows(2))
            .map(|(e, x)| order(e[0], e[1], x[0].h, x[1].h))
            .collect();
        for o in orders.iter().flatten() {
            min_order = min_order.min(*o);
        }
        worst = worst.max(*errs.last().unwrap_or(&f64::INFINITY));
        per.push(json!({
            "function": f.name(),
            "ratios": r.iter().map(|x| x.plancherel_ratio).collect::<Vec<_>>(),
            "orders": orders,
        }));
    }
    let order_ok = min_order >= tol.min_order;
    CheckReport {
        check: Check::Plancherel,
        inputs: json!({"resolution": cfg.resolution, "suite": names(&cfg.suite), "levels": 3}),
        lhs: worst,
        rhs: tol.plancherel,
        slack: 0.0,
        pass: worst <= tol.plancherel && order_ok,
        details: json!({"per_function": per, "min_order": min_order.is_finite().then_some(min_order), "min_order_required": tol.min_order}),
        note: None,
    }
}

/// `lhs` = largest relative error at the finest level, `≤ rhs`; errors strictly
/// decrease along the ladder for every function.
pub fn inversion_report(cfg: &CheckConfig, rows: &[LadderRow]) -> CheckReport {
    let tol = cfg.tolerances.inversion;
    let mut per = Vec::new();
    let mut worst: f64 = 0.0;
    let mut decreasing = true;
    for &f in &cfg.suite {
        let e: Vec<f64> = by_function(rows, f).iter().map(|x| x.inversion_error).collect();
        let dec = e.windows(2).all(|p| p[1] < p[0]);
        decreasing &= dec;
        worst = worst.max(*e.last().unwrap_or(&f64::INFINITY));
        per.push(json!({"function": f.name(), "errors": e, "strictly_decreasing": dec}));
    }
    CheckReport {
        check: Check::Inversion,
        inputs: json!({"resolution": cfg.resolution, "suite": names(&cfg.suite), "levels": 3}),
        lhs: worst,
        rhs: tol,
        slack: 0.0,
        pass: worst <= tol && decreasing,
        details: json!({"per_function": per}),
        note: None,
    }
}

// ---- Dilation ----

/// Seeded probes with `|λ'| ∈ [1.5, 3.5]` of either sign, `k ≤ 3`, `|w'| ≤ 1.5`.
pub fn dilation_probes(n: usize, count: usize, seed: u64) -> Vec<DilationProbe> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c = 1.5 / ((2 * n) as f64).sqrt();
    (0..count)
        .map(|_| {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            DilationProbe {
                lambda: sign * rng.gen_range(1.5..=3.5),
                k: rng.gen_range(0..=3),
                w: (0..n)
                    .map(|_| Complex64::new(rng.gen_range(-c..=c), rng.gen_range(-c..=c)))
                    .collect(),
            }
        })
        .collect()
}

/// `lhs` = largest probe residual over `r ∈ {0.5, 2}`, `≤ rhs`; the `r = 1` residual
/// stays within `dilation_identity`.
fn dilation(cfg: &CheckConfig) -> Result<CheckReport> {
    let grid = HGrid::from_profile(&cfg.grids.dilation)?;
    let probes = dilation_probes(grid.n(), 16, cfg.seed);
    let mut per = Vec::new();
    let (mut worst, mut identity): (f64, f64) = (0.0, 0.0);
    for &f in &cfg.suite {
        let res: Vec<f64> = [0.5, 2.0, 1.0]
            .iter()
            .map(|&r| dilation_covariance_residual(|z, t| f.eval(z, t), &grid, r, &probes))
            .collect::<Result<_>>()?;
        worst = worst.max(res[0]).max(res[1]);
        identity = identity.max(res[2]);
        per.push(json!({"function": f.name(), "r_0.5": res[0], "r_2": res[1], "r_1": res[2]}));
    }
    let tol = &cfg.tolerances;
    Ok(CheckReport {
        check: Check::Dilation,
        inputs: json!({"grid": cfg.grids.dilation, "suite": names(&cfg.suite), "probes": 16, "seed": cfg.seed}),
        lhs: worst,
        rhs: tol.dilation,
        slack: 0.0,
        pass: worst <= tol.dilation && identity <= tol.dilation_identity,
        details: json!({"per_function": per, "identity_residual": identity}),
        note: None,
    })
}

// ---- Reproducing identity and subspace residual ----

/// Interior relative `L²` error of `(2π)^{−n}|λ|ⁿ (φ_{k,λ} *_λ φ_{k,λ})` against
/// `φ_{k,λ}` on `|w| ≤ L/2`.
pub fn reproducing_error(grid: &CGrid, k: usize, lambda: f64) -> Result<f64> {
    let n = grid.n;
    let p = EigenParams::new(n, k, lambda)?;
    let phi = |z: &[Complex64]| {
        let r2: f64 = z.iter().map(|c| c.norm_sqr()).sum();
        Complex64::new(laguerre_fn_r2(&p, r2), 0.0)
    };
    let samples: Vec<Complex64> = (0..grid.len()).map(|i| phi(&grid.node(i))).collect();
    let conv = twisted_convolution(phi, &samples, lambda, grid)?;
    let scale = (2.0 * PI).powi(-(n as i32)) * lambda.abs().powi(n as i32);
    let r_in = 0.5 * grid.axis.extent;
    let (mut err, mut norm) = (0.0, 0.0);
    for i in 0..grid.len() {
        let r2: f64 = grid.node(i).iter().map(|c| c.norm_sqr()).sum();
        if r2 <= r_in * r_in {
            err += (conv[i] * scale - samples[i]).norm_sqr();
            norm += samples[i].norm_sqr();
        }
    }
    Ok((err / norm).sqrt())
}

/// `lhs` = worst reproducing error for `k ≤ 2`, `λ ∈ {1, −2}`, `≤ rhs`; the subspace
/// residual of every suite table stays within `subspace`.
fn subspace(cfg: &CheckConfig) -> Result<CheckReport> {
    let w = cfg.grids.reproducing;
    let cg = CGrid::new(w.n, w.l, w.count)?;
    let mut repro = Vec::new();
    for lambda in [1.0, -2.0] {
        for k in 0..=2 {
            repro.push(json!({"k": k, "lambda": lambda, "error": reproducing_error(&cg, k, lambda)?}));
        }
    }
    let worst = fmax(repro.iter().map(|v| v["error"].as_f64().unwrap_or(f64::INFINITY)));
    let grid = cfg.resolution.hgrid()?;
    let fan = cfg.resolution.fan_grid()?;
    let wgrid = cfg.resolution.wgrid()?;
    let mut tables = Vec::new();
    for &f in &cfg.suite {
        let t = forward_table(&f.sample(grid), &fan, &wgrid)?;
        tables.push(json!({"function": f.name(), "residual": subspace_residual(&t)?}));
    }
    let table_worst = fmax(tables.iter().map(|v| v["residual"].as_f64().unwrap_or(f64::INFINITY)));
    let tol = &cfg.tolerances;
    Ok(CheckReport {
        check: Check::Subspace,
        inputs: json!({"window": w, "resolution": cfg.resolution, "suite": names(&cfg.suite)}),
        lhs: worst,
        rhs: tol.reproducing,
        slack: 0.0,
        pass: worst <= tol.reproducing && table_worst <= tol.subspace,
        details: json!({"reproducing": repro, "tables": tables, "table_worst": table_worst, "table_tolerance": tol.subspace}),
        note: None,
    })
}

// ---- Hilbert-Schmidt ----

fn zbox(n: usize, re: (f64, f64), im: (f64, f64), t: (f64, f64)) -> Result<SpatialBox> {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for _ in 0..n {
        lo.extend([re.0, im.0]);
        hi.extend([re.1, im.1]);
    }
    lo.push(t.0);
    hi.push(t.1);
    SpatialBox::new(lo, hi)
}

fn rays(n: usize, ks: std::ops::RangeInclusive<usize>, lo: f64, hi: f64, sign: Sign) -> Result<FanSet> {
    FanSet::new(n, ks.map(|k| FanBox::new(k, lo, hi, sign)).collect::<Result<_>>()?)
}

/// Compact pairs for the kernel quadrature comparison.
pub fn hs_pairs(n: usize) -> Result<Vec<(SpatialSet, FanSet)>> {
    Ok(vec![
        (
            SpatialSet::in_group(n, vec![SpatialBox::cube(2 * n + 1, 1.0)?])?,
            rays(n, 0..=0, 1.0, 2.0, Sign::Plus)?,
        ),
        (
            SpatialSet::in_group(n, vec![zbox(n, (-0.5, 1.0), (-1.0, 0.5), (-2.0, 2.0))?])?,
            rays(n, 0..=1, 2.0, 3.0, Sign::Both)?,
        ),
        (
            SpatialSet::in_group(
                n,
                vec![zbox(n, (-1.0, 0.0), (-1.0, 0.0), (-1.0, 1.0))?, zbox(n, (0.0, 1.0), (-0.5, 1.0), (0.0, 3.0))?],
            )?,
            rays(n, 2..=2, 1.0, 3.0, Sign::Minus)?,
        ),
        (
            SpatialSet::in_group(n, vec![zbox(n, (-1.5, 1.5), (-1.5, 1.5), (-3.0, 3.0))?])?,
            rays(n, 0..=3, 1.5, 4.0, Sign::Plus)?,
        ),
    ])
}

/// `lhs` = largest `|HS_quad / HS_exact − 1|` over [`hs_pairs`], `≤ rhs`; the
/// closed-form bound holds strictly on `trials` seeded random pairs.
fn hs(cfg: &CheckConfig) -> Result<CheckReport> {
    let n = cfg.n();
    let grid = cfg.resolution.hgrid()?;
    let fan = cfg.resolution.fan_grid()?;
    let mut quad = Vec::new();
    for (v, w) in hs_pairs(n)? {
        let exact = hs_norm_exact(&v, &w);
        let q = hs_norm_quadrature(&v, &w, &grid, &fan)?;
        quad.push(json!({"exact": exact, "quadrature": q, "rel": (q / exact - 1.0).abs()}));
    }
    let worst = fmax(quad.iter().map(|v| v["rel"].as_f64().unwrap_or(f64::INFINITY)));
    let sampler = cfg.sampler.fitted(&cfg.resolution.fan);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut violations = 0;
    let mut max_fraction: f64 = 0.0;
    for _ in 0..cfg.trials {
        let v = sampler.spatial(n, &mut rng)?;
        let w = sampler.fan(n, &mut rng)?;
        let lhs = hs_norm_exact(&v, &w).powi(2);
        let bound = hs_bound_sq(&v, &w);
        if lhs >= bound {
            violations += 1;
        }
        max_fraction = max_fraction.max(lhs / bound);
    }
    let tol = cfg.tolerances.hs;
    Ok(CheckReport {
        check: Check::Hs,
        inputs: json!({"resolution": cfg.resolution, "seed": cfg.seed, "random_pairs": cfg.trials, "sampler": sampler}),
        lhs: worst,
        rhs: tol,
        slack: 0.0,
        pass: worst <= tol && violations == 0,
        details: json!({"quadrature": quad, "bound_violations": violations, "max_hs2_over_bound": max_fraction}),
        note: None,
    })
}

// ---- Donoho-Stark and chain sweep ----

/// One `(f, V, W)` case of a sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub function: String,
    pub pair: usize,
    pub eps_v: f64,
    pub eps_w: f64,
    pub ds_lhs: f64,
    pub ds_rhs: f64,
    pub ds_vacuous: bool,
    pub ds_pass: bool,
    pub chain_lhs: f64,
    pub chain_rhs: f64,
    pub chain_ratio: f64,
    pub chain_slack: f64,
    pub chain_pass: bool,
}

/// The seeded set pairs of a sweep, drawn from the sampler fitted to the fan band.
pub fn sweep_pairs(cfg: &CheckConfig) -> Result<Vec<(SpatialSet, FanSet)>> {
    let n = cfg.n();
    let sampler = cfg.sampler.fitted(&cfg.resolution.fan);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    (0..cfg.pairs)
        .map(|_| Ok((sampler.spatial(n, &mut rng)?, sampler.fan(n, &mut rng)?)))
        .collect()
}

/// Donoho-Stark and chain quantities for every suite function against every pair,
/// at resolution `res`. Pairs come from `cfg`, so two resolutions see the same sets.
pub fn sweep(cfg: &CheckConfig, res: &Resolution) -> Result<Vec<SweepRecord>> {
    let pairs = sweep_pairs(cfg)?;
    let grid = res.hgrid()?;
    let ctx = SpectralContext::from_resolution(res)?;
    let fields: Vec<(TestFunction, SampledField)> = cfg.suite.iter().map(|&f| (f, f.sample(grid))).collect();
    let cases: Vec<(usize, usize)> = (0..fields.len()).flat_map(|i| (0..pairs.len()).map(move |j| (i, j))).collect();
    cases
        .par_iter()
        .map(|&(i, j)| {
            let (f, fs) = &fields[i];
            let (v, w) = &pairs[j];
            let c = concentration(fs, v, w, &ctx)?;
            let ds = donoho_stark_from(grid.n(), v, w, &c);
            let ch = chain_check(fs, v, w, &ctx)?;
            Ok(SweepRecord {
                function: f.name().to_string(),
                pair: j,
                eps_v: ds.eps_v,
                eps_w: ds.eps_w,
                ds_lhs: ds.lhs,
                ds_rhs: ds.rhs,
                ds_vacuous: ds.vacuous,
                ds_pass: ds.pass,
                chain_lhs: ch.lhs,
                chain_rhs: ch.rhs,
                chain_ratio: ch.ratio,
                chain_slack: ch.slack,
                chain_pass: ch.ratio <= 1.0 + cfg.tolerances.chain_slack,
            })
        })
        .collect()
}

/// `lhs` = largest `rhs/lhs` of the inequality over non-vacuous cases, `≤ 1` up to
/// the Donoho-Stark tolerance.
pub fn donoho_report(cfg: &CheckConfig, records: &[SweepRecord]) -> CheckReport {
    let live: Vec<&SweepRecord> = records.iter().filter(|r| !r.ds_vacuous).collect();
    let violations = records.iter().filter(|r| !r.ds_pass).count();
    let worst = fmax(live.iter().map(|r| if r.ds_lhs > 0.0 { r.ds_rhs / r.ds_lhs } else { f64::INFINITY }));
    let note = live
        .is_empty()
        .then(|| "every case is vacuous: eps_V^2 + eps_W^2 >= 1 throughout".to_string());
    CheckReport {
        check: Check::Donoho,
        inputs: sweep_inputs(cfg),
        lhs: worst,
        rhs: 1.0,
        slack: DONOHO_STARK_TOL,
        pass: violations == 0,
        details: json!({"cases": records.len(), "non_vacuous": live.len(), "violations": violations}),
        note,
    }
}

fn mean_slack(records: &[SweepRecord]) -> f64 {
    if records.is_empty() {
        return 0.0;
    }
    records.iter().map(|r| r.chain_slack).sum::<f64>() / records.len() as f64
}

/// `lhs` = largest chain ratio, `≤ rhs·(1 + slack)`; the mean discretization slack
/// shrinks by `½ (1 ± halving_band)` when the fan step is halved.
pub fn chain_report(cfg: &CheckConfig, base: &[SweepRecord], refined: &[SweepRecord]) -> CheckReport {
    let tol = &cfg.tolerances;
    let worst = fmax(base.iter().map(|r| r.chain_ratio));
    let (s0, s1) = (mean_slack(base), mean_slack(refined));
    let ratio = if s0 > 0.0 { s1 / s0 } else { 0.0 };
    let band = (0.5 * (1.0 - tol.halving_band), 0.5 * (1.0 + tol.halving_band));
    let halves = s0 == 0.0 || (band.0..=band.1).contains(&ratio);
    let fine_worst = fmax(refined.iter().map(|r| r.chain_ratio));
    CheckReport {
        check: Check::Chain,
        inputs: json!({"sweep": sweep_inputs(cfg), "refined_resolution": cfg.resolution.lambda_refined()}),
        lhs: worst,
        rhs: 1.0,
        slack: tol.chain_slack,
        pass: worst <= 1.0 + tol.chain_slack && fine_worst <= 1.0 + tol.chain_slack && halves,
        details: json!({
            "cases": base.len(),
            "mean_slack": s0,
            "mean_slack_refined": s1,
            "slack_ratio": ratio,
            "ratio_band": [band.0, band.1],
            "max_slack": fmax(base.iter().map(|r| r.chain_slack)),
            "max_slack_refined": fmax(refined.iter().map(|r| r.chain_slack)),
            "max_ratio_refined": fine_worst,
        }),
        note: None,
    }
}

/// Everything needed to reproduce a sweep: the fitted sampler, seed and resulting sets.
pub fn sweep_inputs(cfg: &CheckConfig) -> Value {
    let pairs = sweep_pairs(cfg).unwrap_or_default();
    json!({
        "resolution": cfg.resolution,
        "suite": names(&cfg.suite),
        "seed": cfg.seed,
        "pairs": cfg.pairs,
        "sampler": cfg.sampler.fitted(&cfg.resolution.fan),
        "sets": pairs.iter().map(|(v, w)| json!({"V": v, "W": w})).collect::<Vec<_>>(),
    })
}

// ---- Nazarov ----

/// Fixed pair `V = [−1, 1]^{2n+1}`, `W = {k = 0, λ ∈ [1, 2]}`; `lhs` = `‖P_W P_V‖`,
/// `≤ rhs = nazarov_norm`, and no random or adversarial field breaks the inequality.
fn nazarov(cfg: &CheckConfig) -> Result<CheckReport> {
    let n = cfg.n();
    let v = SpatialSet::in_group(n, vec![SpatialBox::cube(2 * n + 1, 1.0)?])?;
    let w = rays(n, 0..=0, 1.0, 2.0, Sign::Plus)?;
    let grid = cfg.resolution.hgrid()?;
    let ctx = SpectralContext::from_resolution(&cfg.resolution)?;
    let rep = nazarov_check(&v, &w, &grid, &ctx, cfg.trials, cfg.seed)?;
    let tol = cfg.tolerances.nazarov_norm;
    Ok(CheckReport {
        check: Check::Nazarov,
        inputs: json!({"resolution": cfg.resolution, "V": v, "W": w, "trials": cfg.trials, "seed": cfg.seed}),
        lhs: rep.op_norm.value,
        rhs: tol,
        slack: crate::uncertainty::NAZAROV_SLACK,
        pass: rep.op_norm.value <= tol && rep.pass,
        details: serde_json::to_value(&rep).unwrap_or(Value::Null),
        note: Some("box windows only; general finite-measure sets are not exercised".into()),
    })
}

// ---- Price ----

/// Five fixed windows `E = W × B`.
pub fn price_windows(n: usize) -> Result<Vec<PriceWindow>> {
    let mk = |w: FanSet, a: f64| -> Result<PriceWindow> { Ok(PriceWindow { w, b: SpatialBox::cube(2 * n, a)? }) };
    Ok(vec![
        mk(rays(n, 0..=0, 2.0, 4.0, Sign::Plus)?, 1.0)?,
        mk(rays(n, 0..=2, 0.5, 5.0, Sign::Both)?, 2.0)?,
        mk(rays(n, 1..=1, 2.5, 3.5, Sign::Minus)?, 0.5)?,
        mk(rays(n, 0..=3, 1.0, 5.0, Sign::Plus)?, 3.0)?,
        mk(rays(n, 5..=5, 0.25, 5.0, Sign::Both)?, 1.5)?,
    ])
}

/// The two exponents: one above `Q/2` and `0.8·Q/2` below it.
pub fn price_alphas(n: usize) -> [f64; 2] {
    let q = homogeneous_dim(n) as f64;
    [3f64.max(0.5 * q + 1.0), 0.4 * q]
}

/// `lhs` = largest ratio divided by its constructive constant, `≤ 1`; the
/// `L¹`-interpolation ratio moves by at most `l1_interp` under `r ∈ {0.5, 2}` for
/// suite functions with smooth modulus.
fn price(cfg: &CheckConfig) -> Result<CheckReport> {
    let n = cfg.n();
    let grid = cfg.resolution.hgrid()?;
    let ctx = SpectralContext::from_resolution(&cfg.resolution)?;
    let windows = price_windows(n)?;
    let mut ratios = Vec::new();
    let mut worst: f64 = 0.0;
    for alpha in price_alphas(n) {
        for &f in &cfg.suite {
            let fs = f.sample(grid);
            for (i, e) in windows.iter().enumerate() {
                let rep = price_ratio(&fs, e, alpha, &ctx)?;
                worst = worst.max(rep.ratio / rep.bound);
                ratios.push(json!({"alpha": alpha, "function": f.name(), "window": i, "ratio": rep.ratio, "bound": rep.bound}));
            }
        }
    }
    let lg = HGrid::from_profile(&cfg.grids.l1_interp)?;
    let alpha = price_alphas(lg.n())[0];
    let mut interp = Vec::new();
    let mut skipped = Vec::new();
    let mut dev: f64 = 0.0;
    for &f in &cfg.suite {
        if !f.smooth_modulus() {
            skipped.push(f.name());
            continue;
        }
        let base = l1_interp_ratio(&f.sample(lg), alpha)?;
        for r in [0.5, 2.0] {
            let d = SampledField::from_fn(lg, |z, t| {
                let zr: Vec<Complex64> = z.iter().map(|c| c * r).collect();
                f.eval(&zr, r * r * t)
            });
            let rel = (l1_interp_ratio(&d, alpha)? / base - 1.0).abs();
            dev = dev.max(rel);
            interp.push(json!({"function": f.name(), "r": r, "ratio": base, "rel_change": rel}));
        }
    }
    let tol = cfg.tolerances.l1_interp;
    Ok(CheckReport {
        check: Check::Price,
        inputs: json!({
            "resolution": cfg.resolution,
            "suite": names(&cfg.suite),
            "alphas": price_alphas(n),
            "windows": windows,
            "l1_interp_grid": cfg.grids.l1_interp,
            "l1_interp_alpha": alpha,
        }),
        lhs: worst,
        rhs: 1.0,
        slack: 0.0,
        pass: worst <= 1.0 && dev <= tol,
        details: json!({"ratios": ratios, "l1_interp": interp, "l1_interp_max_change": dev, "l1_interp_tolerance": tol}),
        note: (!skipped.is_empty()).then(|| format!("dilation invariance skipped for non-smooth |f|: {}", skipped.join(", "))),
    })
}

// ---- Radial ----

/// `lhs` = largest product-form deviation from the full transform relative to the
/// largest transform value, `≤ rhs`; the Parseval residual after `k ≤ 12` stays
/// within `parseval`.
fn radial(cfg: &CheckConfig) -> Result<CheckReport> {
    const K_PARSEVAL: usize = 12;
    let grid = cfg.resolution.hgrid()?;
    let rgrid = RadialGrid::matching(&grid)?;
    let radial_fns: Vec<TestFunction> = cfg.suite.iter().copied().filter(|f| f.is_radial()).collect();
    if radial_fns.is_empty() {
        return Err(Error::Inapplicable("suite has no radial function".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let n = grid.n();
    let c = 1.0 / (n as f64).sqrt();
    let mut per = Vec::new();
    let (mut worst, mut pworst): (f64, f64) = (0.0, 0.0);
    for &f in &radial_fns {
        let full = f.sample(grid);
        let rad = RadialField::from_test_function(rgrid, f)?;
        let (mut scale, mut dev): (f64, f64) = (0.0, 0.0);
        for _ in 0..20 {
            let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let a = FanPoint::finite(sign * rng.gen_range(2.0..=4.0), rng.gen_range(0..=4))?;
            let w: Vec<Complex64> = (0..n).map(|_| Complex64::new(rng.gen_range(-c..=c), rng.gen_range(-c..=c))).collect();
            let x = forward(&full, &a, &w)?;
            let y = radial_forward(&rad, &a, &w)?;
            scale = scale.max(x.norm());
            dev = dev.max((x - y).norm());
        }
        let rel = if scale > 0.0 { dev / scale } else { dev };
        worst = worst.max(rel);
        let mut pars = Vec::new();
        for lambda in [-4.0, -3.0, -1.0, 1.0, 3.0, 4.0] {
            let p = radial_parseval_residual(&rad, lambda)?;
            let k = K_PARSEVAL.min(p.partial_residuals.len() - 1);
            let r = p.partial_residuals[k];
            pworst = pworst.max(r);
            pars.push(json!({"lambda": lambda, "residual_k12": r, "k_converged": p.k_used, "residual": p.residual}));
        }
        per.push(json!({"function": f.name(), "product_form_rel": rel, "parseval": pars}));
    }
    let tol = &cfg.tolerances;
    Ok(CheckReport {
        check: Check::Radial,
        inputs: json!({"resolution": cfg.resolution, "radial_grid": rgrid, "suite": names(&radial_fns), "seed": cfg.seed}),
        lhs: worst,
        rhs: tol.radial,
        slack: 0.0,
        pass: worst <= tol.radial && pworst <= tol.parseval,
        details: json!({"per_function": per, "parseval_worst": pworst, "parseval_tolerance": tol.parseval}),
        note: None,
    })
}

// ---- Sublaplacian ----

/// Finite-difference residual and Rayleigh quotient of `L e_{k,λ}` against
/// `(2k+n)|λ| e_{k,λ}` over the valid interior.
pub fn eigen_residual(grid: HGrid, k: usize, lambda: f64) -> Result<(f64, f64)> {
    let p = EigenParams::new(grid.n(), k, lambda)?;
    let f = SampledField::from_fn(grid, |z, t| eigenfunction(&p, z, t).unwrap_or_default());
    let m = sublaplacian_apply(&f)?;
    let ev = (2 * k + grid.n()) as f64 * lambda.abs();
    let (mut err, mut norm, mut num) = (0.0, 0.0, 0.0);
    for (i, fv) in f.values.iter().enumerate() {
        if m.valid[i] {
            let lf = m.field.values[i];
            err += (lf - ev * fv).norm_sqr();
            norm += fv.norm_sqr();
            num += (lf * fv.conj()).re;
        }
    }
    if norm == 0.0 {
        return Err(Error::ZeroFunction);
    }
    Ok(((err / norm).sqrt(), num / norm))
}

/// `lhs` = largest relative eigenvalue error at the finest level, `≤ rhs`; residual
/// orders across the two refinements reach `min_order`.
fn sublaplacian(cfg: &CheckConfig) -> Result<CheckReport> {
    let base = cfg.grids.sublaplacian;
    let n = base.n;
    let levels: Vec<HGrid> = [1, 2, 4]
        .iter()
        .map(|&m| HGrid::from_profile(&GridProfile { n_s: m * base.n_s, n_t: m * base.n_t, ..base }))
        .collect::<Result<_>>()?;
    let mut per = Vec::new();
    let (mut worst, mut min_order): (f64, f64) = (0.0, f64::INFINITY);
    for k in 0..=1 {
        for lambda in [1.0, -1.0] {
            let res: Vec<(f64, f64)> = levels.iter().map(|g| eigen_residual(*g, k, lambda)).collect::<Result<_>>()?;
            let orders: Vec<Option<f64>> = res
                .windows(2)
                .zip(levels.windows(2))
                .map(|(r, g)| order(r[0].0, r[1].0, g[0].z.axis.step(), g[1].z.axis.step()))
                .collect();
            for o in orders.iter().flatten() {
                min_order = min_order.min(*o);
            }
            let ev = (2 * k + n) as f64 * lambda.abs();
            let rel = (res[2].1 - ev).abs() / ev;
            worst = worst.max(rel);
            per.push(json!({
                "k": k, "lambda": lambda, "eigenvalue": ev,
                "residuals": res.iter().map(|r| r.0).collect::<Vec<_>>(),
                "rayleigh": res.iter().map(|r| r.1).collect::<Vec<_>>(),
                "orders": orders,
            }));
        }
    }
    let tol = &cfg.tolerances;
    Ok(CheckReport {
        check: Check::Sublaplacian,
        inputs: json!({"grid": base, "refinements": [1, 2, 4]}),
        lhs: worst,
        rhs: tol.eigenvalue,
        slack: 0.0,
        pass: worst <= tol.eigenvalue && min_order >= tol.min_order,
        details: json!({"per_eigenfunction": per, "min_order": min_order.is_finite().then_some(min_order)}),
        note: None,
    })
}

// ---- Gram ----

fn min_singular(m: &DMatrix<Complex64>) -> f64 {
    m.singular_values().iter().cloned().fold(f64::INFINITY, f64::min)
}

/// Box preset dilated by `{0.8, 1, 1.25}`; `lhs = σ_min / ‖f‖²`, which must exceed `rhs`.
fn gram(cfg: &CheckConfig) -> Result<CheckReport> {
    let grid = HGrid::from_profile(&cfg.grids.gram)?;
    let r_list = [0.8, 1.0, 1.25];
    let f = TestFunction::Box;
    let rep = crate::uncertainty::dilate_gram(|z, t| f.eval(z, t), &grid, &r_list)?;
    let q = grid.homogeneous_dim() as i32;
    let vol = 2f64.powi(2 * grid.n() as i32 + 1);
    let closed = DMatrix::from_fn(3, 3, |i, j| Complex64::new(vol / r_list[i].max(r_list[j]).powi(q), 0.0));
    let lhs = rep.min_singular_value / rep.norm_sq;
    let closed_lhs = min_singular(&closed) / vol;
    let tol = cfg.tolerances.gram;
    Ok(CheckReport {
        check: Check::Gram,
        inputs: json!({"grid": cfg.grids.gram, "function": f.name(), "r_list": r_list}),
        lhs,
        rhs: tol,
        slack: 0.0,
        pass: lhs > tol,
        details: json!({"gram": rep.gram, "norm_sq": rep.norm_sq, "closed_form_ratio": closed_lhs}),
        note: None,
    })
}

// ---- Beurling ----

/// Plain Gaussian must come out divergent with `lhs` = log-slope `≥ rhs`, the zero
/// function convergent.
fn beurling(cfg: &CheckConfig) -> Result<CheckReport> {
    const N_EXP: f64 = 2.0;
    const RADII: [f64; 4] = [1.0, 2.0, 3.0, 4.0];
    let grid = cfg.resolution.hgrid()?;
    let rgrid = RadialGrid::matching(&grid)?;
    let g = beurling_diagnostic(&RadialField::from_test_function(rgrid, TestFunction::PlainGauss)?, N_EXP, &RADII)?;
    let z = beurling_diagnostic(&RadialField::from_test_function(rgrid, TestFunction::Zero)?, N_EXP, &RADII)?;
    Ok(CheckReport {
        check: Check::Beurling,
        inputs: json!({"radial_grid": rgrid, "N": N_EXP, "radii": RADII}),
        lhs: g.slope,
        rhs: DIVERGENCE_SLOPE,
        slack: 0.0,
        pass: g.verdict == Verdict::Divergent && g.slope > 0.0 && z.verdict == Verdict::Convergent,
        details: json!({"plain_gauss": g, "zero": z}),
        note: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for c in Check::ALL {
            assert_eq!(Check::from_name(c.name()).unwrap(), c);
            assert_eq!(serde_json::to_value(c).unwrap(), json!(c.name()));
        }
        assert!(Check::from_name("everything").is_err());
    }

    #[test]
    fn validation_rejects_bad_configs() {
        assert!(CheckConfig::default().validate().is_ok());
        let mut c = CheckConfig::default();
        c.tolerances.hs = 0.0;
        assert!(c.validate().unwrap_err().to_string().contains("'hs'"));
        let mut c = CheckConfig::default();
        c.suite = vec![TestFunction::Zero];
        assert!(c.validate().is_err());
        let mut c = CheckConfig::default();
        c.resolution.fan.lambda_max = 9.0;
        assert!(matches!(c.validate(), Err(Error::BandViolation { .. })));
    }

    #[test]
    fn observed_order() {
        assert!((order(4e-2, 1e-2, 0.2, 0.1).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(order(1e-3, 1e-14, 0.2, 0.1), None);
    }

    #[test]
    fn probes_are_seeded_and_in_range() {
        let a = dilation_probes(2, 30, 4);
        assert_eq!(a, dilation_probes(2, 30, 4));
        assert_ne!(a, dilation_probes(2, 30, 5));
        for p in &a {
            assert!((1.5..=3.5).contains(&p.lambda.abs()) && p.k <= 3);
            assert!(p.w.iter().map(|c| c.norm_sqr()).sum::<f64>() <= 1.5 * 1.5 + 1e-12);
        }
    }

    #[test]
    fn hs_pairs_satisfy_closed_form_bound() {
        for n in [1, 2] {
            for (v, w) in hs_pairs(n).unwrap() {
                assert!(hs_norm_exact(&v, &w).powi(2) < hs_bound_sq(&v, &w));
            }
        }
    }

    #[test]
    fn price_windows_fit_reduced_band() {
        let lmax = Resolution::reduced_n2().fan.lambda_max;
        for e in price_windows(2).unwrap() {
            assert!(e.w.max_lambda() <= lmax);
        }
        assert_eq!(price_alphas(1), [3.0, 1.6]);
    }

    #[test]
    fn eigen_residual_decreases() {
        let g = |m: usize| HGrid::new(1, 6.0, 0.5 * PI, 30 * m, 5 * m).unwrap();
        let (r1, _) = eigen_residual(g(1), 1, 1.0).unwrap();
        let (r2, ray) = eigen_residual(g(2), 1, 1.0).unwrap();
        assert!(r2 < 0.3 * r1);
        assert!((ray - 3.0).abs() < 0.05);
    }

    #[test]
    fn gram_check_on_small_grid() {
        let mut cfg = CheckConfig::default();
        cfg.grids.gram = GridProfile { n: 1, l: 2.0, t: 2.0, n_s: 32, n_t: 32 };
        let rep = gram(&cfg).unwrap();
        assert!(rep.pass);
        let closed = rep.details["closed_form_ratio"].as_f64().unwrap();
        assert!((rep.lhs - closed).abs() < 0.1 * closed);
    }
}
