//! Discretized cylinder domains aligned with a direction `e`, nodal
//! configurations, and the localized energy.
//!
//! A domain is the box `A (+)_e (-h, h)` in frame coordinates: `d - 1` cross
//! axes spanning a cube of side `R` and one axial coordinate along `e`. Nodes
//! live on a uniform lattice in the frame; world positions are obtained
//! through the orthonormal frame map, so frame gradient magnitudes equal
//! world gradient magnitudes.
//!
//! The energy uses midpoint quadrature with d-linear corner-difference
//! gradients: one norm evaluation per cell, at the cell center.

use crate::medium::{add, norm, scale, FinslerMedium, MetricTensor, Point, MAX_DIM};
use crate::potential::{DoubleWell, TransitionProfile};
use crate::{AhcError, Result};
use std::io::Write;
use std::path::Path;
use std::sync::Arc;

fn dot(a: Point, b: Point) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: Point, b: Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// Deterministic orthonormal basis of the hyperplane orthogonal to `e`.
pub fn default_frame(dim: usize, e: Point) -> [Point; 2] {
    let mut frame = [[0.0; MAX_DIM]; 2];
    match dim {
        1 => {}
        2 => {
            frame[0] = [-e[1], e[0], 0.0];
        }
        _ => {
            let k = (0..3)
                .min_by(|&a, &b| e[a].abs().partial_cmp(&e[b].abs()).unwrap())
                .unwrap();
            let mut v = [0.0; MAX_DIM];
            v[k] = 1.0;
            let proj = dot(v, e);
            let mut f1 = [v[0] - proj * e[0], v[1] - proj * e[1], v[2] - proj * e[2]];
            let n = norm(f1);
            f1 = scale(f1, 1.0 / n);
            frame[0] = f1;
            frame[1] = cross(e, f1);
        }
    }
    frame
}

/// Rotate a d=3 frame by `angle` within the plane orthogonal to `e`.
pub fn rotate_frame(frame: [Point; 2], angle: f64) -> [Point; 2] {
    let (s, c) = angle.sin_cos();
    let f0 = add(scale(frame[0], c), scale(frame[1], s));
    let f1 = add(scale(frame[0], -s), scale(frame[1], c));
    [f0, f1]
}

/// An e-aligned cylinder `A (+)_e (-h, h)` with a uniform nodal lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderDomain {
    dim: usize,
    direction: Point,
    frame: [Point; 2],
    cross_center: [f64; 2],
    cross_side: f64,
    half_height: f64,
    anchor: Point,
    shape: [usize; MAX_DIM],
    spacings: [f64; MAX_DIM],
}

impl CylinderDomain {
    /// Build the lattice. Axis order: cross axes first, the axial (e)
    /// coordinate last. Node count per axis is `round(extent / spacing) + 1`.
    pub fn build(
        dim: usize,
        direction: Point,
        frame: Option<[Point; 2]>,
        cross_center: [f64; 2],
        cross_side: f64,
        half_height: f64,
        spacing: f64,
        anchor: Point,
    ) -> Result<Arc<Self>> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(AhcError::InvalidParameter(format!("dim {dim} not in 1..=3")));
        }
        let n = norm(direction);
        if !((n - 1.0).abs() <= 1e-9) {
            return Err(AhcError::InvalidParameter("direction must be a unit vector".into()));
        }
        let e = scale(direction, 1.0 / n);
        let frame = frame.unwrap_or_else(|| default_frame(dim, e));
        for k in 0..dim - 1 {
            if (norm(frame[k]) - 1.0).abs() > 1e-12 || dot(frame[k], e).abs() > 1e-12 {
                return Err(AhcError::InvalidParameter("frame must be orthonormal to e".into()));
            }
        }
        if dim == 3 && dot(frame[0], frame[1]).abs() > 1e-12 {
            return Err(AhcError::InvalidParameter("frame columns must be orthogonal".into()));
        }
        if !(half_height > 0.0 && spacing > 0.0) || (dim > 1 && !(cross_side > 0.0)) {
            return Err(AhcError::InvalidParameter("extents and spacing must be positive".into()));
        }
        let min_extent = if dim > 1 { cross_side.min(2.0 * half_height) } else { 2.0 * half_height };
        if spacing > min_extent / 4.0 + 1e-12 {
            return Err(AhcError::InvalidParameter(format!(
                "spacing {spacing} too coarse for extents (needs <= {})",
                min_extent / 4.0
            )));
        }
        let mut shape = [1usize; MAX_DIM];
        let mut spacings = [1.0; MAX_DIM];
        for k in 0..dim {
            let extent = if k + 1 == dim { 2.0 * half_height } else { cross_side };
            let nodes = (extent / spacing).round() as usize + 1;
            if nodes < 3 {
                return Err(AhcError::InvalidParameter("degenerate extent".into()));
            }
            shape[k] = nodes;
            spacings[k] = extent / (nodes - 1) as f64;
        }
        Ok(Arc::new(CylinderDomain {
            dim,
            direction: e,
            frame,
            cross_center,
            cross_side,
            half_height,
            anchor,
            shape,
            spacings,
        }))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn direction(&self) -> Point {
        self.direction
    }

    pub fn frame(&self) -> [Point; 2] {
        self.frame
    }

    pub fn anchor(&self) -> Point {
        self.anchor
    }

    pub fn cross_side(&self) -> f64 {
        self.cross_side
    }

    pub fn half_height(&self) -> f64 {
        self.half_height
    }

    pub fn cross_center(&self) -> [f64; 2] {
        self.cross_center
    }

    pub fn shape(&self) -> [usize; MAX_DIM] {
        self.shape
    }

    pub fn spacings(&self) -> [f64; MAX_DIM] {
        self.spacings
    }

    /// Representative nodal spacing (the requested one up to rounding).
    pub fn spacing(&self) -> f64 {
        self.spacings[0].min(self.spacings[self.dim - 1])
    }

    pub fn node_count(&self) -> usize {
        (0..self.dim).map(|k| self.shape[k]).product()
    }

    pub fn cell_count(&self) -> usize {
        (0..self.dim).map(|k| self.shape[k] - 1).product()
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim).map(|k| self.spacings[k]).product()
    }

    /// Axis direction vectors in world coordinates (frame columns, then e).
    pub fn axis_vectors(&self) -> [Point; MAX_DIM] {
        let mut a = [[0.0; MAX_DIM]; MAX_DIM];
        for k in 0..self.dim - 1 {
            a[k] = self.frame[k];
        }
        a[self.dim - 1] = self.direction;
        a
    }

    #[inline]
    pub fn node_strides(&self) -> [usize; MAX_DIM] {
        let mut s = [1usize; MAX_DIM];
        for k in (0..self.dim.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.shape[k + 1];
        }
        s
    }

    #[inline]
    pub fn cell_strides(&self) -> [usize; MAX_DIM] {
        let mut s = [1usize; MAX_DIM];
        for k in (0..self.dim.saturating_sub(1)).rev() {
            s[k] = s[k + 1] * (self.shape[k + 1] - 1);
        }
        s
    }

    #[inline]
    pub fn node_multi(&self, idx: usize) -> [usize; MAX_DIM] {
        let strides = self.node_strides();
        let mut m = [0usize; MAX_DIM];
        let mut r = idx;
        for k in 0..self.dim {
            m[k] = r / strides[k];
            r %= strides[k];
        }
        m
    }

    #[inline]
    pub fn cell_multi(&self, idx: usize) -> [usize; MAX_DIM] {
        let strides = self.cell_strides();
        let mut m = [0usize; MAX_DIM];
        let mut r = idx;
        for k in 0..self.dim {
            m[k] = r / strides[k];
            r %= strides[k];
        }
        m
    }

    /// Frame coordinates of a node: cross coordinates then the axial one.
    pub fn node_frame(&self, multi: [usize; MAX_DIM]) -> [f64; MAX_DIM] {
        let mut f = [0.0; MAX_DIM];
        for k in 0..self.dim - 1 {
            f[k] = self.cross_center[k] - 0.5 * self.cross_side + multi[k] as f64 * self.spacings[k];
        }
        f[self.dim - 1] = -self.half_height + multi[self.dim - 1] as f64 * self.spacings[self.dim - 1];
        f
    }

    pub fn node_world(&self, multi: [usize; MAX_DIM]) -> Point {
        let f = self.node_frame(multi);
        self.frame_to_world(f)
    }

    pub fn frame_to_world(&self, f: [f64; MAX_DIM]) -> Point {
        let mut x = self.anchor;
        for k in 0..self.dim - 1 {
            x = add(x, scale(self.frame[k], f[k]));
        }
        add(x, scale(self.direction, f[self.dim - 1]))
    }

    /// World position of a cell center.
    pub fn cell_center_world(&self, cell: [usize; MAX_DIM]) -> Point {
        let mut f = [0.0; MAX_DIM];
        for k in 0..self.dim - 1 {
            f[k] = self.cross_center[k] - 0.5 * self.cross_side
                + (cell[k] as f64 + 0.5) * self.spacings[k];
        }
        f[self.dim - 1] =
            -self.half_height + (cell[self.dim - 1] as f64 + 0.5) * self.spacings[self.dim - 1];
        self.frame_to_world(f)
    }

    /// Frame coordinates of a cell center (cross..., axial).
    pub fn cell_center_frame(&self, cell: [usize; MAX_DIM]) -> [f64; MAX_DIM] {
        let mut f = [0.0; MAX_DIM];
        for k in 0..self.dim - 1 {
            f[k] = self.cross_center[k] - 0.5 * self.cross_side
                + (cell[k] as f64 + 0.5) * self.spacings[k];
        }
        f[self.dim - 1] =
            -self.half_height + (cell[self.dim - 1] as f64 + 0.5) * self.spacings[self.dim - 1];
        f
    }

    pub fn is_boundary(&self, multi: [usize; MAX_DIM]) -> bool {
        (0..self.dim).any(|k| multi[k] == 0 || multi[k] + 1 == self.shape[k])
    }

    /// Node indices of the `2^d` corners of a cell, low corner first,
    /// ordered by corner bit pattern (bit k set = high side of axis k).
    #[inline]
    pub fn cell_corners(&self, cell: [usize; MAX_DIM]) -> ([usize; 8], usize) {
        let strides = self.node_strides();
        let mut base = 0usize;
        for k in 0..self.dim {
            base += cell[k] * strides[k];
        }
        let n = 1usize << self.dim;
        let mut out = [0usize; 8];
        for (bits, slot) in out.iter_mut().enumerate().take(n) {
            let mut idx = base;
            for k in 0..self.dim {
                if bits >> k & 1 == 1 {
                    idx += strides[k];
                }
            }
            *slot = idx;
        }
        (out, n)
    }
}

/// Nodal values in `[-1, 1]` with a Dirichlet mask over a shared domain.
#[derive(Debug, Clone)]
pub struct Configuration {
    pub domain: Arc<CylinderDomain>,
    pub values: Vec<f64>,
    pub pinned: Vec<bool>,
}

impl Configuration {
    /// Planar data `q(<x - x0, e>)` with the full boundary pinned.
    pub fn planar(domain: &Arc<CylinderDomain>, x0: Point, q: &TransitionProfile) -> Self {
        let n = domain.node_count();
        let mut values = Vec::with_capacity(n);
        let mut pinned = Vec::with_capacity(n);
        for idx in 0..n {
            let multi = domain.node_multi(idx);
            let x = domain.node_world(multi);
            let s = dot([x[0] - x0[0], x[1] - x0[1], x[2] - x0[2]], domain.direction());
            values.push(q.eval(s).clamp(-1.0, 1.0));
            pinned.push(domain.is_boundary(multi));
        }
        Configuration { domain: Arc::clone(domain), values, pinned }
    }

    /// Constant data (pinned boundary), mostly for tests.
    pub fn constant(domain: &Arc<CylinderDomain>, value: f64) -> Self {
        let n = domain.node_count();
        let values = vec![value.clamp(-1.0, 1.0); n];
        let pinned = (0..n).map(|i| domain.is_boundary(domain.node_multi(i))).collect();
        Configuration { domain: Arc::clone(domain), values, pinned }
    }

    /// Overwrite unpinned nodes with multilinear interpolation of `old`
    /// wherever the node falls inside `old`'s lattice; used for warm starts.
    /// Both configurations must share direction, frame, and anchor.
    pub fn absorb(&mut self, old: &Configuration) {
        let dnew = &*self.domain;
        let dold = &*old.domain;
        debug_assert!(norm(add(dnew.direction(), scale(dold.direction(), -1.0))) < 1e-12);
        debug_assert!(norm(add(dnew.anchor(), scale(dold.anchor(), -1.0))) < 1e-12);
        let dim = dnew.dim();
        for idx in 0..dnew.node_count() {
            if self.pinned[idx] {
                continue;
            }
            let f = dnew.node_frame(dnew.node_multi(idx));
            // fractional lattice coordinates in the old domain
            let mut frac = [0.0f64; MAX_DIM];
            let mut inside = true;
            for k in 0..dim {
                let origin = if k + 1 == dim {
                    -dold.half_height()
                } else {
                    dold.cross_center()[k] - 0.5 * dold.cross_side()
                };
                let t = (f[k] - origin) / dold.spacings()[k];
                if t < 0.0 || t > (dold.shape()[k] - 1) as f64 {
                    inside = false;
                    break;
                }
                frac[k] = t;
            }
            if !inside {
                continue;
            }
            let mut cell = [0usize; MAX_DIM];
            let mut w = [0.0f64; MAX_DIM];
            for k in 0..dim {
                let i = (frac[k].floor() as usize).min(dold.shape()[k] - 2);
                cell[k] = i;
                w[k] = frac[k] - i as f64;
            }
            let (corners, ncorners) = dold.cell_corners(cell);
            let mut v = 0.0;
            for bits in 0..ncorners {
                let mut weight = 1.0;
                for k in 0..dim {
                    weight *= if bits >> k & 1 == 1 { w[k] } else { 1.0 - w[k] };
                }
                v += weight * old.values[corners[bits]];
            }
            self.values[idx] = v.clamp(-1.0, 1.0);
        }
    }

    /// Raw little-endian dump plus a human-readable metadata sidecar.
    pub fn dump(&self, base: &Path) -> Result<()> {
        let d = &*self.domain;
        let raw = base.with_extension("f64le");
        let mut buf = Vec::with_capacity(self.values.len() * 8);
        for v in &self.values {
            buf.extend_from_slice(&v.to_le_bytes());
        }
        std::fs::write(raw, buf)?;
        let meta = base.with_extension("meta.toml");
        let mut out = Vec::new();
        let fmt = |x: f64| format!("{x:.16e}");
        let list = |xs: &[f64]| xs.iter().map(|&x| fmt(x)).collect::<Vec<_>>().join(", ");
        writeln!(out, "dim = {}", d.dim())?;
        writeln!(out, "shape = [{}]", (0..d.dim()).map(|k| d.shape()[k].to_string()).collect::<Vec<_>>().join(", "))?;
        writeln!(out, "spacing = [{}]", list(&d.spacings()[..d.dim()]))?;
        writeln!(out, "direction = [{}]", list(&d.direction()[..d.dim()]))?;
        for k in 0..d.dim() - 1 {
            writeln!(out, "frame_{k} = [{}]", list(&d.frame()[k][..d.dim()]))?;
        }
        writeln!(out, "cross_center = [{}]", list(&d.cross_center()[..d.dim().saturating_sub(1)]))?;
        writeln!(out, "cross_side = {}", fmt(d.cross_side()))?;
        writeln!(out, "half_height = {}", fmt(d.half_height()))?;
        writeln!(out, "anchor = [{}]", list(&d.anchor()[..d.dim()]))?;
        std::fs::write(meta, out)?;
        Ok(())
    }
}

/// Read back a raw dump written by [`Configuration::dump`].
pub fn read_f64le(path: &Path) -> Result<Vec<f64>> {
    let bytes = std::fs::read(path)?;
    if bytes.len() % 8 != 0 {
        return Err(AhcError::InvalidParameter("raw dump length not a multiple of 8".into()));
    }
    Ok(bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect())
}

/// Per-cell quantities entering the integrand.
pub(crate) struct CellFields {
    pub u_mean: f64,
    pub p_world: Point,
}

#[inline]
pub(crate) fn cell_fields(dom: &CylinderDomain, values: &[f64], cell: [usize; MAX_DIM]) -> CellFields {
    let dim = dom.dim();
    let (corners, n) = dom.cell_corners(cell);
    let spacings = dom.spacings();
    let mut sum = 0.0;
    let mut axis_diff = [0.0f64; MAX_DIM];
    for bits in 0..n {
        let u = values[corners[bits]];
        sum += u;
        for k in 0..dim {
            if bits >> k & 1 == 1 {
                axis_diff[k] += u;
            } else {
                axis_diff[k] -= u;
            }
        }
    }
    let pairs = (n / 2) as f64;
    let axes = dom.axis_vectors();
    let mut p = [0.0; MAX_DIM];
    for k in 0..dim {
        p = add(p, scale(axes[k], axis_diff[k] / (pairs * spacings[k])));
    }
    CellFields { u_mean: sum / n as f64, p_world: p }
}

/// Energy density of one cell given its quadratic form (times cell volume).
#[inline]
pub(crate) fn cell_energy_with(
    dom: &CylinderDomain,
    tensor: &MetricTensor,
    w: &DoubleWell,
    values: &[f64],
    eps: f64,
    cell: [usize; MAX_DIM],
) -> f64 {
    let f = cell_fields(dom, values, cell);
    dom.cell_volume()
        * (0.5 * eps * tensor.quadratic(f.p_world) + w.eval_unchecked(f.u_mean) / eps)
}

/// Energy of a single cell, evaluating the medium at the cell center
/// (divided by `eps` for the rescaled functional).
pub fn cell_energy(
    m: &FinslerMedium,
    w: &DoubleWell,
    u: &Configuration,
    eps: f64,
    cell_idx: usize,
) -> f64 {
    let dom = &*u.domain;
    let cell = dom.cell_multi(cell_idx);
    let xc = scale(dom.cell_center_world(cell), 1.0 / eps);
    cell_energy_with(dom, &m.metric_at(xc), w, &u.values, eps, cell)
}

/// Streaming pairwise (binary-counter) summation; deterministic for a fixed
/// push order and accurate to O(log n) rounding.
pub struct PairwiseSum {
    levels: [f64; 64],
    count: u64,
}

impl Default for PairwiseSum {
    fn default() -> Self {
        PairwiseSum { levels: [0.0; 64], count: 0 }
    }
}

impl PairwiseSum {
    pub fn push(&mut self, mut v: f64) {
        let mut c = self.count;
        let mut lvl = 0;
        while c & 1 == 1 {
            v += self.levels[lvl];
            self.levels[lvl] = 0.0;
            c >>= 1;
            lvl += 1;
        }
        self.levels[lvl] = v;
        self.count += 1;
    }

    pub fn total(&self) -> f64 {
        let mut t = 0.0;
        for lvl in 0..64 {
            t += self.levels[lvl];
        }
        t
    }
}

/// Localized energy `F_eps(u; A)`: midpoint quadrature over all cells. With
/// `eps = 1` this is the microscopic functional.
pub fn energy(m: &FinslerMedium, w: &DoubleWell, u: &Configuration, eps: f64) -> Result<f64> {
    if m.dim() != u.domain.dim() {
        return Err(AhcError::DimensionMismatch(format!(
            "medium dim {} vs domain dim {}",
            m.dim(),
            u.domain.dim()
        )));
    }
    assert!(eps > 0.0, "eps must be positive");
    let mut acc = PairwiseSum::default();
    for c in 0..u.domain.cell_count() {
        acc.push(cell_energy(m, w, u, eps, c));
    }
    Ok(acc.total())
}

/// Energy restricted to the cells selected by `keep` (indices in
/// lexicographic cell order).
pub fn energy_on_cells(
    m: &FinslerMedium,
    w: &DoubleWell,
    u: &Configuration,
    eps: f64,
    keep: &dyn Fn(usize) -> bool,
) -> f64 {
    let mut acc = PairwiseSum::default();
    for c in 0..u.domain.cell_count() {
        if keep(c) {
            acc.push(cell_energy(m, w, u, eps, c));
        }
    }
    acc.total()
}
