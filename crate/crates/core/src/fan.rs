//! The Heisenberg fan `Ω`: fan points, box-shaped fan sets with a spectral gap,
//! the Plancherel measure `ν₂`, the constant `κ(W)`, dilations `D_r` and the
//! discrete fan grids used for spectral quadrature.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::specfun::norm_const;

/// A point of `Ω`: `(λ, k)` on the ray `R_k`, or `(0, τ)` on `R_∞`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "ray", rename_all = "lowercase")]
pub enum FanPoint {
    Finite { lambda: f64, k: usize },
    Degenerate { tau: f64 },
}

impl FanPoint {
    pub fn finite(lambda: f64, k: usize) -> Result<Self> {
        if lambda == 0.0 || !lambda.is_finite() {
            return Err(Error::DegenerateRay);
        }
        Ok(Self::Finite { lambda, k })
    }

    pub fn degenerate(tau: f64) -> Result<Self> {
        if !(tau >= 0.0) || !tau.is_finite() {
            return invalid(format!("tau must be nonnegative, got {tau}"));
        }
        Ok(Self::Degenerate { tau })
    }

    /// `(2k + n)|λ|` on `R_k`, `τ` on `R_∞`.
    pub fn energy(&self, n: usize) -> f64 {
        match *self {
            Self::Finite { lambda, k } => (2 * k + n) as f64 * lambda.abs(),
            Self::Degenerate { tau } => tau,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "-")]
    Minus,
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "both", alias = "±")]
    Both,
}

impl Sign {
    /// `−1` for `Minus`, `+1` otherwise.
    pub fn factor(self) -> f64 {
        match self {
            Sign::Minus => -1.0,
            _ => 1.0,
        }
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Minus => "-",
            Sign::Plus => "+",
            Sign::Both => "both",
        })
    }
}

/// `{(λ, k) : sign·λ ∈ [lo, hi]}` with `0 < lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanBox {
    pub k: usize,
    pub lo: f64,
    pub hi: f64,
    pub sign: Sign,
}

impl FanBox {
    pub fn new(k: usize, lo: f64, hi: f64, sign: Sign) -> Result<Self> {
        if !(lo > 0.0 && hi > lo && hi.is_finite()) {
            return invalid(format!("fan box needs 0 < lo < hi, got [{lo}, {hi}]"));
        }
        Ok(Self { k, lo, hi, sign })
    }

    fn validate(&self) -> Result<()> {
        Self::new(self.k, self.lo, self.hi, self.sign).map(|_| ())
    }
}

/// A finite union of fan boxes, canonicalized: `Both` boxes are split, and
/// overlapping intervals on the same ray and sign are merged.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FanSet {
    pub n: usize,
    boxes: Vec<FanBox>,
}

impl FanSet {
    pub fn empty(n: usize) -> Self {
        Self { n, boxes: Vec::new() }
    }

    pub fn new(n: usize, boxes: Vec<FanBox>) -> Result<Self> {
        if n == 0 {
            return invalid("dimension n must be at least 1");
        }
        let mut split = Vec::with_capacity(boxes.len() * 2);
        for b in boxes {
            b.validate()?;
            match b.sign {
                Sign::Both => {
                    split.push(FanBox { sign: Sign::Plus, ..b });
                    split.push(FanBox { sign: Sign::Minus, ..b });
                }
                _ => split.push(b),
            }
        }
        split.sort_by(|a, b| {
            (a.sign, a.k)
                .cmp(&(b.sign, b.k))
                .then(a.lo.total_cmp(&b.lo))
        });
        let mut merged: Vec<FanBox> = Vec::with_capacity(split.len());
        for b in split {
            match merged.last_mut() {
                Some(last) if last.sign == b.sign && last.k == b.k && b.lo <= last.hi => {
                    last.hi = last.hi.max(b.hi);
                }
                _ => merged.push(b),
            }
        }
        Ok(Self { n, boxes: merged })
    }

    /// Parses a JSON array such as `[{"k":0,"lo":1.0,"hi":2.0,"sign":"+"}]`.
    pub fn from_json(n: usize, json: &str) -> Result<Self> {
        let boxes: Vec<FanBox> = serde_json::from_str(json)?;
        Self::new(n, boxes)
    }

    pub fn boxes(&self) -> &[FanBox] {
        &self.boxes
    }

    pub fn is_empty(&self) -> bool {
        self.boxes.is_empty()
    }

    /// Spectral gap `M = inf |λ|`; infinite for the empty set.
    pub fn gap(&self) -> f64 {
        self.boxes.iter().map(|b| b.lo).fold(f64::INFINITY, f64::min)
    }

    pub fn max_k(&self) -> Option<usize> {
        self.boxes.iter().map(|b| b.k).max()
    }

    pub fn max_lambda(&self) -> f64 {
        self.boxes.iter().map(|b| b.hi).fold(0.0, f64::max)
    }

    pub fn contains(&self, a: &FanPoint) -> bool {
        match *a {
            FanPoint::Degenerate { .. } => false,
            FanPoint::Finite { lambda, k } => self.boxes.iter().any(|b| {
                let l = b.sign.factor() * lambda;
                b.k == k && l >= b.lo && l <= b.hi
            }),
        }
    }

    /// Length of `{sign·λ ∈ [lo, hi]}` on ray `k` covered by the set.
    pub fn overlap(&self, k: usize, lo: f64, hi: f64) -> f64 {
        let sign = if lo >= 0.0 { Sign::Plus } else { Sign::Minus };
        let (a, b) = if sign == Sign::Plus { (lo, hi) } else { (-hi, -lo) };
        self.boxes
            .iter()
            .filter(|bx| bx.k == k && bx.sign == sign)
            .map(|bx| (b.min(bx.hi) - a.max(bx.lo)).max(0.0))
            .sum()
    }

    fn moment_sum(&self, power: i32, coeff: impl Fn(usize) -> f64) -> f64 {
        let p = power as f64 + 1.0;
        self.boxes
            .iter()
            .map(|b| coeff(b.k) * (b.hi.powf(p) - b.lo.powf(p)) / p)
            .sum()
    }
}

impl<'de> Deserialize<'de> for FanSet {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            n: usize,
            boxes: Vec<FanBox>,
        }
        let raw = Raw::deserialize(d)?;
        FanSet::new(raw.n, raw.boxes).map_err(serde::de::Error::custom)
    }
}

/// `ν₂(W) = (2π)^{−2n−1} Σ_boxes c_{n,k}^{−2} ∫ |λ|^{2n} dλ`.
pub fn nu2_measure(w: &FanSet) -> f64 {
    let n = w.n;
    (2.0 * PI).powi(-(2 * n as i32) - 1)
        * w.moment_sum(2 * n as i32, |k| norm_const(n, k).powi(-2))
}

/// `κ(W) = (2π)^{−n−1} Σ_boxes c_{n,k}^{−1} ∫ |λ|^n dλ`, the squared `L²` norm of
/// the function `h_{(z',t')}` and hence `HS(P_W P_V)² / |V|`.
pub fn kappa(w: &FanSet) -> f64 {
    let n = w.n;
    (2.0 * PI).powi(-(n as i32) - 1) * w.moment_sum(n as i32, |k| 1.0 / norm_const(n, k))
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 0.0) || !r.is_finite() {
        return invalid(format!("dilation factor must be positive, got {r}"));
    }
    Ok(())
}

/// `D_r`: `(λ, k) ↦ (r²λ, k)`, `(0, τ) ↦ (0, r²τ)`.
pub fn fan_dilate_point(r: f64, a: &FanPoint) -> Result<FanPoint> {
    check_r(r)?;
    Ok(match *a {
        FanPoint::Finite { lambda, k } => FanPoint::Finite {
            lambda: r * r * lambda,
            k,
        },
        FanPoint::Degenerate { tau } => FanPoint::Degenerate { tau: r * r * tau },
    })
}

/// `D_r` applied to every box of a fan set.
pub fn fan_dilate_set(r: f64, w: &FanSet) -> Result<FanSet> {
    check_r(r)?;
    let r2 = r * r;
    FanSet::new(
        w.n,
        w.boxes
            .iter()
            .map(|b| FanBox {
                lo: b.lo * r2,
                hi: b.hi * r2,
                ..*b
            })
            .collect(),
    )
}

/// One quadrature node of a fan grid: the cell `[λ − dλ/2, λ + dλ/2]` on ray `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanNode {
    pub lambda: f64,
    pub k: usize,
    pub dlambda: f64,
}

/// Fan quadrature for `ν₂`. Nodes are sorted by `λ`, then `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FanGrid {
    pub n: usize,
    pub nodes: Vec<FanNode>,
}

/// Parameters of [`make_fan_grid`] as stored in configuration files.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FanProfile {
    pub lambda_max: f64,
    pub gap: f64,
    pub n_lambda: usize,
    pub k_max: usize,
}

impl FanGrid {
    pub fn from_profile(n: usize, p: &FanProfile) -> Result<Self> {
        make_fan_grid(p.lambda_max, p.gap, p.n_lambda, p.k_max, n)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `ν₂` weight `(2π)^{−2n−1} c_{n,k}^{−2} |λ|^{2n} dλ`.
    pub fn weight(&self, node: &FanNode) -> f64 {
        let n = self.n as i32;
        (2.0 * PI).powi(-2 * n - 1)
            * norm_const(self.n, node.k).powi(-2)
            * node.lambda.abs().powi(2 * n)
            * node.dlambda
    }

    /// `ν` weight `(2π)^{−n−1} |λ|^n dλ` (alternate mode).
    pub fn nu_weight(&self, node: &FanNode) -> f64 {
        let n = self.n as i32;
        (2.0 * PI).powi(-n - 1) * node.lambda.abs().powi(n) * node.dlambda
    }

    pub fn total_weight(&self) -> f64 {
        self.nodes.iter().map(|nd| self.weight(nd)).sum()
    }

    pub fn max_abs_lambda(&self) -> f64 {
        self.nodes.iter().map(|nd| nd.lambda.abs()).fold(0.0, f64::max)
    }

    pub fn max_k(&self) -> usize {
        self.nodes.iter().map(|nd| nd.k).max().unwrap_or(0)
    }

    /// Runs of consecutive nodes sharing one `λ`, as `(λ, index range)`.
    pub fn lambda_groups(&self) -> Vec<(f64, std::ops::Range<usize>)> {
        let mut out: Vec<(f64, std::ops::Range<usize>)> = Vec::new();
        for (i, nd) in self.nodes.iter().enumerate() {
            match out.last_mut() {
                Some((l, r)) if *l == nd.lambda => r.end = i + 1,
                _ => out.push((nd.lambda, i..i + 1)),
            }
        }
        out
    }

    /// Nodes whose cell meets `W`, with `dλ` scaled by the covered fraction of the cell.
    pub fn restrict(&self, w: &FanSet) -> Result<FanGrid> {
        if w.n != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: w.n,
            });
        }
        let nodes = self
            .nodes
            .iter()
            .filter_map(|nd| {
                let half = 0.5 * nd.dlambda;
                let cov = w.overlap(nd.k, nd.lambda - half, nd.lambda + half);
                (cov > 1e-12 * nd.dlambda).then_some(FanNode { dlambda: cov, ..*nd })
            })
            .collect();
        Ok(FanGrid { n: self.n, nodes })
    }

    /// Nodes whose cell is not fully covered by `W`, weighted by the uncovered fraction.
    pub fn restrict_complement(&self, w: &FanSet) -> Result<FanGrid> {
        let inside = self.restrict(w)?;
        let mut j = 0;
        let mut nodes = Vec::with_capacity(self.nodes.len());
        for nd in &self.nodes {
            let mut d = nd.dlambda;
            if j < inside.nodes.len() && inside.nodes[j].lambda == nd.lambda && inside.nodes[j].k == nd.k {
                d -= inside.nodes[j].dlambda;
                j += 1;
            }
            if d > 1e-12 * nd.dlambda {
                nodes.push(FanNode { dlambda: d, ..*nd });
            }
        }
        Ok(FanGrid { n: self.n, nodes })
    }
}

/// Cell-centred fan grid: per sign, `N_λ` cells of width `(λ_max − gap)/N_λ`
/// covering `[gap, λ_max]`, on every ray `k ≤ K_max`.
pub fn make_fan_grid(lambda_max: f64, gap: f64, n_lambda: usize, k_max: usize, n: usize) -> Result<FanGrid> {
    if n == 0 {
        return invalid("dimension n must be at least 1");
    }
    if !(gap > 0.0 && gap < lambda_max && lambda_max.is_finite()) {
        return invalid(format!("fan grid needs 0 < gap < lambda_max, got gap = {gap}, lambda_max = {lambda_max}"));
    }
    if n_lambda < 2 {
        return invalid(format!("fan grid needs N_lambda >= 2, got {n_lambda}"));
    }
    let dl = (lambda_max - gap) / n_lambda as f64;
    let mut lams: Vec<f64> = (0..n_lambda).map(|j| gap + (j as f64 + 0.5) * dl).collect();
    let neg: Vec<f64> = lams.iter().rev().map(|l| -l).collect();
    lams.splice(0..0, neg);
    let nodes = lams
        .into_iter()
        .flat_map(|lambda| (0..=k_max).map(move |k| FanNode { lambda, k, dlambda: dl }))
        .collect();
    Ok(FanGrid { n, nodes })
}
