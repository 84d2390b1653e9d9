//! Atom-array geometry, the dipolar exchange law and coupling matrices.
//!
//! Couplings are frequencies in MHz, lengths in μm, and the in-plane
//! quantization axis is given by its angle to the x axis.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Angle at which the dipolar angular factor `3cos²θ − 1` vanishes.
pub fn magic_angle() -> f64 {
    (1.0 / 3.0_f64.sqrt()).acos()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

impl Sublattice {
    /// A for odd 1-based sites, B for even ones.
    pub fn of_index(i: usize) -> Self {
        if i.is_multiple_of(2) {
            Sublattice::A
        } else {
            Sublattice::B
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
    fn sub(self, o: Point) -> Point {
        Point::new(self.x - o.x, self.y - o.y)
    }
    fn add(self, o: Point) -> Point {
        Point::new(self.x + o.x, self.y + o.y)
    }
    fn scale(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
    fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }
    fn polar(r: f64, angle: f64) -> Point {
        Point::new(r * angle.cos(), r * angle.sin())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Site {
    pub x_um: f64,
    pub y_um: f64,
    pub sublattice: Sublattice,
}

impl Site {
    pub fn position(&self) -> Point {
        Point::new(self.x_um, self.y_um)
    }
}

/// Atom positions plus the quantization axis and dipolar strength.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainGeometry {
    pub sites: Vec<Site>,
    /// Stored in degrees so that file round trips are bit-exact.
    pub axis_deg: f64,
    /// d²/h in MHz·μm³.
    pub d2: f64,
}

/// `d2 (3cos²θ − 1) / R³` with θ the angle between `r_j − r_i` and the axis.
pub fn dipolar_coupling(r_i: Point, r_j: Point, axis_angle: f64, d2: f64) -> Result<f64> {
    let d = r_j.sub(r_i);
    let r = d.norm();
    if r == 0.0 || !r.is_finite() {
        return Err(Error::Domain(format!(
            "coincident or non-finite points ({}, {}) and ({}, {})",
            r_i.x, r_i.y, r_j.x, r_j.y
        )));
    }
    let cos = (d.x * axis_angle.cos() + d.y * axis_angle.sin()) / r;
    Ok(d2 * (3.0 * cos * cos - 1.0) / (r * r * r))
}

impl ChainGeometry {
    pub fn new(points: &[Point], axis_deg: f64, d2: f64) -> Result<Self> {
        let sites = points
            .iter()
            .enumerate()
            .map(|(i, p)| Site {
                x_um: p.x,
                y_um: p.y,
                sublattice: Sublattice::of_index(i),
            })
            .collect();
        let g = Self {
            sites,
            axis_deg,
            d2,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn axis_angle(&self) -> f64 {
        self.axis_deg.to_radians()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.sites.len();
        if n < 2 {
            return Err(Error::Construction(format!(
                "need at least 2 sites, got {n}"
            )));
        }
        if !(self.d2 > 0.0 && self.d2.is_finite()) {
            return Err(Error::Construction(format!(
                "d2 must be positive, got {}",
                self.d2
            )));
        }
        for (i, s) in self.sites.iter().enumerate() {
            if s.sublattice != Sublattice::of_index(i) {
                return Err(Error::Construction(format!(
                    "site {} has sublattice {:?}, expected {:?}",
                    i + 1,
                    s.sublattice,
                    Sublattice::of_index(i)
                )));
            }
            for (j, t) in self.sites.iter().enumerate().skip(i + 1) {
                if s.position().sub(t.position()).norm() == 0.0 {
                    return Err(Error::Construction(format!(
                        "sites {} and {} coincide",
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn coupling(&self, i: usize, j: usize) -> Result<f64> {
        dipolar_coupling(
            self.sites[i].position(),
            self.sites[j].position(),
            self.axis_angle(),
            self.d2,
        )
    }

    /// JSON with 17 significant digits per float.
    pub fn to_json(&self) -> String {
        let f = |x: f64| format!("{x:.16e}");
        let sites: Vec<String> = self
            .sites
            .iter()
            .map(|s| {
                format!(
                    "    {{\"x_um\": {}, \"y_um\": {}, \"sublattice\": \"{:?}\"}}",
                    f(s.x_um),
                    f(s.y_um),
                    s.sublattice
                )
            })
            .collect();
        format!(
            "{{\n  \"sites\": [\n{}\n  ],\n  \"axis_deg\": {},\n  \"d2_MHz_um3\": {}\n}}\n",
            sites.join(",\n"),
            f(self.axis_deg),
            f(self.d2)
        )
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: GeometryFile = serde_json::from_str(text)
            .map_err(|e| Error::Construction(format!("geometry file: {e}")))?;
        let g = Self {
            sites: file
                .sites
                .into_iter()
                .map(|s| Site {
                    x_um: s.x_um,
                    y_um: s.y_um,
                    sublattice: s.sublattice,
                })
                .collect(),
            axis_deg: file.axis_deg,
            d2: file.d2_mhz_um3,
        };
        g.validate()?;
        Ok(g)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryFile {
    sites: Vec<SiteFile>,
    axis_deg: f64,
    #[serde(rename = "d2_MHz_um3")]
    d2_mhz_um3: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SiteFile {
    x_um: f64,
    y_um: f64,
    sublattice: Sublattice,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChainConfig {
    /// Weak links at both ends.
    Topological,
    /// Strong links at both ends.
    Trivial,
}

/// Free parameters of the zig-zag layout that the couplings do not fix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MagicLayout {
    pub strong_length_um: f64,
    /// Angle between the strong link and the quantization axis.
    pub strong_angle_rad: f64,
    pub axis_deg: f64,
}

impl Default for MagicLayout {
    fn default() -> Self {
        Self {
            strong_length_um: 10.0,
            strong_angle_rad: 0.10,
            axis_deg: 0.0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct MagicChain {
    pub geometry: ChainGeometry,
    /// Set when (J, J′) lie outside |J| > |J′| > 0 with opposite signs.
    pub regime_warning: Option<String>,
    pub weak_length_um: f64,
    pub strong_angle_rad: f64,
}

/// Period range, in units of the strong-link length, searched for the weak link.
const PERIOD_BRACKET: (f64, f64) = (0.1, 6.0);
const PERIOD_SAMPLES: usize = 6000;

/// Zig-zag SSH chain whose same-sublattice rows run along the magic angle.
///
/// The strong link has fixed length and angle; `d2` follows from `J`. The
/// unit-cell period `P` along the magic direction is solved from `J′`. Among
/// roots, the shortest weak link that is at least as long as the strong link
/// is taken; if none is, the longest weak link.
pub fn build_magic_chain(
    n_sites: usize,
    j: f64,
    j_prime: f64,
    config: ChainConfig,
) -> Result<MagicChain> {
    build_magic_chain_with(n_sites, j, j_prime, config, &MagicLayout::default())
}

///
/// If the configured strong-link angle admits no solution, the nearest angle
/// on a grid of [`ANGLE_STEP`] over `[0, θm)` that does is used instead.
pub fn build_magic_chain_with(
    n_sites: usize,
    j: f64,
    j_prime: f64,
    config: ChainConfig,
    layout: &MagicLayout,
) -> Result<MagicChain> {
    if n_sites < 2 || !n_sites.is_multiple_of(2) {
        return Err(Error::Construction(format!(
            "n_sites must be even and ≥ 2, got {n_sites}"
        )));
    }
    let first = build_at_angle(n_sites, j, j_prime, config, layout);
    if first.is_ok() {
        return first;
    }
    let n_steps = (magic_angle() / ANGLE_STEP) as i64;
    let mut candidates: Vec<f64> = (0..n_steps).map(|k| k as f64 * ANGLE_STEP).collect();
    candidates.sort_by(|a, b| {
        (a - layout.strong_angle_rad)
            .abs()
            .total_cmp(&(b - layout.strong_angle_rad).abs())
    });
    for alpha in candidates {
        let trial = MagicLayout {
            strong_angle_rad: alpha,
            ..*layout
        };
        if let Ok(c) = build_at_angle(n_sites, j, j_prime, config, &trial) {
            return Ok(c);
        }
    }
    Err(match first {
        Err(Error::Construction(msg)) => Error::Construction(format!(
            "{msg}; no strong-link angle in [0, θm) on a {ANGLE_STEP}-rad grid works either"
        )),
        Err(e) => e,
        Ok(_) => unreachable!(),
    })
}

/// Grid spacing of the fallback strong-link angle search (rad).
pub const ANGLE_STEP: f64 = 0.01;

fn build_at_angle(
    n_sites: usize,
    j: f64,
    j_prime: f64,
    config: ChainConfig,
    layout: &MagicLayout,
) -> Result<MagicChain> {
    let regime_warning = if !(j.abs() > j_prime.abs()
        && j_prime != 0.0
        && j.signum() != j_prime.signum())
    {
        Some(format!(
            "(J, J′) = ({j}, {j_prime}) outside the physical regime |J| > |J′| > 0 with opposite signs"
        ))
    } else {
        None
    };
    let rs = layout.strong_length_um;
    let alpha = layout.strong_angle_rad;
    let axis = layout.axis_deg.to_radians();
    let factor = 3.0 * alpha.cos().powi(2) - 1.0;
    let d2 = j * rs.powi(3) / factor;
    if !(d2 > 0.0 && d2.is_finite()) {
        return Err(Error::Construction(format!(
            "strong-link angle bracket violated: 3cos²({alpha}) − 1 = {factor} must share the sign of J = {j}"
        )));
    }
    let strong = Point::polar(rs, axis + alpha);
    let mut roots: Vec<(f64, Point, f64)> = Vec::new();
    for sgn in [1.0, -1.0] {
        let u = Point::polar(1.0, axis + sgn * magic_angle());
        let f = |p: f64| {
            dipolar_coupling(Point::new(0.0, 0.0), u.scale(p).sub(strong), axis, d2)
                .map(|x| x - j_prime)
        };
        let (lo, hi) = (PERIOD_BRACKET.0 * rs, PERIOD_BRACKET.1 * rs);
        for root in bracketed_roots(f, lo, hi, PERIOD_SAMPLES) {
            roots.push((u.scale(root).sub(strong).norm(), u, root));
        }
    }
    let long = roots
        .iter()
        .filter(|r| r.0 + 1e-12 >= rs)
        .min_by(|a, b| a.0.total_cmp(&b.0));
    let best = long
        .or_else(|| roots.iter().max_by(|a, b| a.0.total_cmp(&b.0)))
        .copied();
    let Some((weak_len, u, period)) = best else {
        return Err(Error::Construction(format!(
            "no weak-link solution for J′ = {j_prime} MHz with period in [{}, {}] μm along ±θm",
            PERIOD_BRACKET.0 * rs,
            PERIOD_BRACKET.1 * rs
        )));
    };
    let cell = u.scale(period);
    let weak = cell.sub(strong);
    let first = match config {
        ChainConfig::Topological => weak,
        ChainConfig::Trivial => strong,
    };
    let mut pts = Vec::with_capacity(n_sites);
    for k in 0..n_sites / 2 {
        let a = cell.scale(k as f64);
        pts.push(a);
        pts.push(a.add(first));
    }
    Ok(MagicChain {
        geometry: ChainGeometry::new(&pts, layout.axis_deg, d2)?,
        regime_warning,
        weak_length_um: weak_len,
        strong_angle_rad: alpha,
    })
}

/// Roots of `f` on `[lo, hi]` located by a uniform sign scan and bisection.
fn bracketed_roots<F>(f: F, lo: f64, hi: f64, samples: usize) -> Vec<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let xs: Vec<f64> = (0..=samples)
        .map(|k| lo + (hi - lo) * k as f64 / samples as f64)
        .collect();
    let vals: Vec<Option<f64>> = xs
        .iter()
        .map(|&x| f(x).ok().filter(|v| v.is_finite()))
        .collect();
    let mut roots = Vec::new();
    for k in 0..samples {
        let (Some(fa), Some(fb)) = (vals[k], vals[k + 1]) else {
            continue;
        };
        if fa == 0.0 {
            roots.push(xs[k]);
        } else if fa.signum() != fb.signum() && fb != 0.0 {
            if let Some(r) = bisect(&f, xs[k], xs[k + 1], fa) {
                roots.push(r);
            }
        }
    }
    roots
}

fn bisect<F>(f: &F, mut a: f64, mut b: f64, mut fa: f64) -> Option<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if m <= a || m >= b {
            break;
        }
        let fm = f(m).ok()?;
        if fm == 0.0 {
            return Some(m);
        }
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    Some(0.5 * (a + b))
}

#[derive(Debug, Clone)]
pub struct EdgePerturbation {
    pub geometry: ChainGeometry,
    /// Signed displacement of site N perpendicular to its sublattice row (μm).
    pub displacement_um: f64,
    /// Couplings of site N to sites N−1 and N−3 before and after the move.
    pub j_last_link: (f64, f64),
    pub j_third_neighbor: (f64, f64),
}

/// Largest displacement searched, as a fraction of the nearest-neighbour distance.
const DISPLACEMENT_BRACKET: f64 = 0.5;
const DISPLACEMENT_SAMPLES: usize = 4000;
/// Targets this close to the present coupling leave the geometry untouched.
const ZERO_SHIFT_TOL: f64 = 1e-12;

/// Move the last site perpendicular to its sublattice row so that its
/// coupling to site N−2 equals `target_jpp`. The smallest displacement wins.
pub fn perturb_edge(geom: &ChainGeometry, target_jpp: f64) -> Result<EdgePerturbation> {
    let n = geom.n_sites();
    if n < 4 {
        return Err(Error::Construction(format!(
            "perturb_edge needs at least 4 sites, got {n}"
        )));
    }
    let last = geom.sites[n - 1].position();
    let partner = geom.sites[n - 3].position();
    let row = last.sub(partner);
    let row_len = row.norm();
    let normal = Point::new(-row.y / row_len, row.x / row_len);
    let axis = geom.axis_angle();
    let moved = |h: f64| last.add(normal.scale(h));
    let coupling_to =
        |p: Point, k: usize| dipolar_coupling(geom.sites[k].position(), p, axis, geom.d2);
    let before_link = geom.coupling(n - 2, n - 1)?;
    let before_third = if n >= 4 {
        geom.coupling(n - 4, n - 1)?
    } else {
        0.0
    };
    let current = geom.coupling(n - 3, n - 1)?;
    let h = if (target_jpp - current).abs() <= ZERO_SHIFT_TOL {
        0.0
    } else {
        let reach = DISPLACEMENT_BRACKET * geom.coupling_distance(n - 2, n - 1);
        let roots = bracketed_roots(
            |h| coupling_to(moved(h), n - 3).map(|x| x - target_jpp),
            -reach,
            reach,
            DISPLACEMENT_SAMPLES,
        );
        roots
            .into_iter()
            .min_by(|a, b| a.abs().total_cmp(&b.abs()))
            .ok_or_else(|| {
                Error::Construction(format!(
                    "J″ = {target_jpp} MHz unreachable with |displacement| ≤ {reach} μm perpendicular to the row"
                ))
            })?
    };
    let mut out = geom.clone();
    let p = moved(h);
    out.sites[n - 1].x_um = p.x;
    out.sites[n - 1].y_um = p.y;
    out.validate()?;
    Ok(EdgePerturbation {
        j_last_link: (before_link, out.coupling(n - 2, n - 1)?),
        j_third_neighbor: (before_third, out.coupling(n - 4, n - 1)?),
        geometry: out,
        displacement_um: h,
    })
}

impl ChainGeometry {
    fn coupling_distance(&self, i: usize, j: usize) -> f64 {
        self.sites[i]
            .position()
            .sub(self.sites[j].position())
            .norm()
    }
}

/// Symmetric real hopping table in MHz with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct CouplingMatrix {
    n: usize,
    values: Vec<f64>,
    sublattice: Vec<Sublattice>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CouplingRange {
    Full,
    NearestNeighbor,
}

/// Evaluate every pair through the dipolar law. Entries below `cutoff` in
/// magnitude are zeroed.
pub fn coupling_matrix(geom: &ChainGeometry, cutoff: Option<f64>) -> Result<CouplingMatrix> {
    let n = geom.n_sites();
    let mut m = CouplingMatrix::zeros(n);
    for i in 0..n {
        for j in i + 1..n {
            let v = geom.coupling(i, j)?;
            if cutoff.is_none_or(|c| v.abs() >= c) {
                m.set(i, j, v);
            }
        }
    }
    Ok(m)
}

pub fn coupling_matrix_with(
    geom: &ChainGeometry,
    cutoff: Option<f64>,
    range: CouplingRange,
) -> Result<CouplingMatrix> {
    let m = coupling_matrix(geom, cutoff)?;
    Ok(match range {
        CouplingRange::Full => m,
        CouplingRange::NearestNeighbor => m.nearest_neighbor_only(),
    })
}

impl CouplingMatrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            values: vec![0.0; n * n],
            sublattice: (0..n).map(Sublattice::of_index).collect(),
        }
    }

    /// Open chain with `links[k]` on the bond between sites k+1 and k+2.
    pub fn from_links(links: &[f64]) -> Self {
        let mut m = Self::zeros(links.len() + 1);
        for (k, &v) in links.iter().enumerate() {
            m.set(k, k + 1, v);
        }
        m
    }

    /// Nearest-neighbour SSH chain: `J′` on odd 1-based bonds (1-2, 3-4, …),
    /// `J` on even ones, as in the topological configuration.
    pub fn ssh(n: usize, j: f64, j_prime: f64) -> Self {
        let links: Vec<f64> = (0..n.saturating_sub(1))
            .map(|k| if k % 2 == 0 { j_prime } else { j })
            .collect();
        Self::from_links(&links)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    /// Set both `(i, j)` and `(j, i)`. Diagonal writes are ignored.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        if i != j {
            self.values[i * self.n + j] = v;
            self.values[j * self.n + i] = v;
        }
    }

    pub fn sublattice(&self) -> &[Sublattice] {
        &self.sublattice
    }

    pub fn nearest_neighbor_only(&self) -> Self {
        let mut m = Self::zeros(self.n);
        for i in 0..self.n.saturating_sub(1) {
            m.set(i, i + 1, self.get(i, i + 1));
        }
        m
    }

    /// Overwrite one entry, e.g. to inject a same-sublattice coupling.
    pub fn with_entry(&self, i: usize, j: usize, v: f64) -> Self {
        let mut m = self.clone();
        m.set(i, j, v);
        m
    }

    /// Restriction to the listed sites, in the given order.
    pub fn submatrix(&self, sites: &[usize]) -> Self {
        let mut m = Self::zeros(sites.len());
        for (a, &i) in sites.iter().enumerate() {
            for (b, &j) in sites.iter().enumerate().skip(a + 1) {
                m.set(a, b, self.get(i, j));
            }
        }
        m.sublattice = sites.iter().map(|&i| self.sublattice[i]).collect();
        m
    }

    /// Nonzero pairs `(i, j, J_ij)` with `i < j`.
    pub fn pairs(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.n {
            for j in i + 1..self.n {
                let v = self.get(i, j);
                if v != 0.0 {
                    out.push((i, j, v));
                }
            }
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |a, &b| a.max(b.abs()))
    }
}

/// Angle in `[0, π]` sampled uniformly, used to tabulate the angular law.
pub fn angular_curve(samples: usize, r_um: f64, d2: f64) -> Vec<(f64, f64)> {
    (0..samples)
        .map(|k| {
            let theta = PI * k as f64 / (samples.max(2) - 1) as f64;
            let j = dipolar_coupling(Point::new(0.0, 0.0), Point::polar(r_um, theta), 0.0, d2)
                .unwrap_or(0.0);
            (theta, j)
        })
        .collect()
}
