//! Double-well potentials, boundary transition profiles, and the scalar
//! functionals derived from them.
//!
//! `c_w = int sqrt(W)`, the one-dimensional optimal-profile value
//! `sigma_1d(W, c) = c * int sqrt(2 W)`, the profile tail energy
//! `e(h) = int_{|s|>h} (Lambda q'^2 / 2 + W(q))`, and `C_Lambda = e(0)`.
//! All integrals use adaptive Simpson quadrature with absolute tolerance
//! 1e-10; infinite tails are truncated where the integrand drops below 1e-14.

use crate::{AhcError, Result};

pub const QUAD_TOL: f64 = 1e-10;
const TAIL_CUTOFF: f64 = 1e-14;

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson(fa: f64, fm: f64, fb: f64, a: f64, b: f64) -> f64 {
        (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = simpson(fa, flm, fm, a, m);
        let right = simpson(fm, frm, fb, m, b);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
                + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
        }
    }
    if a == b {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    recurse(f, a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, 48)
}

/// The double-well potential `W`, vanishing exactly at -1 and 1.
#[derive(Debug, Clone, PartialEq)]
pub enum DoubleWell {
    /// `W(u) = (1 - u^2)^2`.
    Quartic,
    /// Piecewise-linear table on strictly increasing nodes spanning [-1, 1].
    Tabulated { us: Vec<f64>, ws: Vec<f64> },
}

impl DoubleWell {
    pub fn tabulated(us: Vec<f64>, ws: Vec<f64>) -> Result<Self> {
        if us.len() != ws.len() || us.len() < 3 {
            return Err(AhcError::InvalidParameter("potential table needs >= 3 nodes".into()));
        }
        if us[0] != -1.0 || *us.last().unwrap() != 1.0 {
            return Err(AhcError::InvalidParameter("potential table must span [-1, 1]".into()));
        }
        if us.windows(2).any(|w| w[1] <= w[0]) {
            return Err(AhcError::InvalidParameter("potential nodes must increase".into()));
        }
        if ws[0] != 0.0 || *ws.last().unwrap() != 0.0 {
            return Err(AhcError::InvalidParameter("W must vanish at -1 and 1".into()));
        }
        if ws[1..ws.len() - 1].iter().any(|&w| w <= 0.0) {
            return Err(AhcError::InvalidParameter("W must be positive inside (-1, 1)".into()));
        }
        Ok(DoubleWell::Tabulated { us, ws })
    }

    /// `W(u)` for `u` in `[-1, 1]`; out-of-range arguments are rejected.
    pub fn eval(&self, u: f64) -> Result<f64> {
        if !(-1.0 - 1e-12..=1.0 + 1e-12).contains(&u) {
            return Err(AhcError::InvalidParameter(format!("u = {u} outside [-1, 1]")));
        }
        Ok(self.eval_unchecked(u.clamp(-1.0, 1.0)))
    }

    /// `W(u)` with the argument clamped to `[-1, 1]`; hot path for the energy.
    #[inline]
    pub fn eval_unchecked(&self, u: f64) -> f64 {
        match self {
            DoubleWell::Quartic => {
                let t = 1.0 - u * u;
                t * t
            }
            DoubleWell::Tabulated { us, ws } => {
                let u = u.clamp(-1.0, 1.0);
                let i = match us.binary_search_by(|x| x.partial_cmp(&u).unwrap()) {
                    Ok(i) => i.min(us.len() - 2),
                    Err(i) => i.saturating_sub(1).min(us.len() - 2),
                };
                let t = (u - us[i]) / (us[i + 1] - us[i]);
                ws[i] + t * (ws[i + 1] - ws[i])
            }
        }
    }

    /// `W'(u)`, used by the solver (segment slope for tabulated forms).
    #[inline]
    pub fn deriv(&self, u: f64) -> f64 {
        match self {
            DoubleWell::Quartic => -4.0 * u * (1.0 - u * u),
            DoubleWell::Tabulated { us, ws } => {
                let u = u.clamp(-1.0, 1.0);
                let i = match us.binary_search_by(|x| x.partial_cmp(&u).unwrap()) {
                    Ok(i) => i.min(us.len() - 2),
                    Err(i) => i.saturating_sub(1).min(us.len() - 2),
                };
                (ws[i + 1] - ws[i]) / (us[i + 1] - us[i])
            }
        }
    }

    /// Sup of `W` on `[-1, 1]`.
    pub fn sup(&self) -> f64 {
        match self {
            DoubleWell::Quartic => 1.0,
            DoubleWell::Tabulated { ws, .. } => ws.iter().copied().fold(0.0, f64::max),
        }
    }
}

/// The boundary transition profile `q`, absolutely continuous with
/// `q(s) -> +-1` as `s -> +-infinity`.
#[derive(Debug, Clone, PartialEq)]
pub enum TransitionProfile {
    Tanh,
    /// Uniform table on `[s0, s0 + (n-1) ds]`; `q = -1` left of the table and
    /// `q = +1` right of it, so the tail energy vanishes beyond the support.
    Tabulated { s0: f64, ds: f64, values: Vec<f64> },
}

impl TransitionProfile {
    pub fn tabulated(s0: f64, ds: f64, values: Vec<f64>) -> Result<Self> {
        if values.len() < 2 || !(ds > 0.0) {
            return Err(AhcError::InvalidParameter("profile table needs >= 2 nodes, ds > 0".into()));
        }
        if values[0] != -1.0 || *values.last().unwrap() != 1.0 {
            return Err(AhcError::InvalidParameter("profile must run from -1 to 1".into()));
        }
        if values.iter().any(|v| !(-1.0..=1.0).contains(v)) {
            return Err(AhcError::InvalidParameter("profile values must lie in [-1, 1]".into()));
        }
        Ok(TransitionProfile::Tabulated { s0, ds, values })
    }

    #[inline]
    pub fn eval(&self, s: f64) -> f64 {
        match self {
            TransitionProfile::Tanh => s.tanh(),
            TransitionProfile::Tabulated { s0, ds, values } => {
                let t = (s - s0) / ds;
                if t <= 0.0 {
                    return values[0];
                }
                let n = values.len();
                if t >= (n - 1) as f64 {
                    return values[n - 1];
                }
                let i = t.floor() as usize;
                let frac = t - i as f64;
                values[i] + frac * (values[i + 1] - values[i])
            }
        }
    }

    #[inline]
    pub fn deriv(&self, s: f64) -> f64 {
        match self {
            TransitionProfile::Tanh => {
                let c = s.cosh();
                1.0 / (c * c)
            }
            TransitionProfile::Tabulated { s0, ds, values } => {
                let t = (s - s0) / ds;
                let n = values.len();
                if t <= 0.0 || t >= (n - 1) as f64 {
                    return 0.0;
                }
                let i = t.floor() as usize;
                (values[i + 1] - values[i]) / ds
            }
        }
    }
}

/// Normalization constant `c_W = int_{-1}^{1} sqrt(W)`.
pub fn c_w(w: &DoubleWell) -> f64 {
    adaptive_simpson(&|u| w.eval_unchecked(u).max(0.0).sqrt(), -1.0, 1.0, QUAD_TOL)
}

/// Optimal planar transition energy in a homogeneous medium with norm value
/// `phi_value`: `phi_value * int_{-1}^{1} sqrt(2 W)`.
pub fn sigma_1d(w: &DoubleWell, phi_value: f64) -> f64 {
    phi_value * adaptive_simpson(&|u| (2.0 * w.eval_unchecked(u)).max(0.0).sqrt(), -1.0, 1.0, QUAD_TOL)
}

fn profile_integrand(q: &TransitionProfile, w: &DoubleWell, lambda_cap: f64, s: f64) -> f64 {
    let dq = q.deriv(s);
    0.5 * lambda_cap * dq * dq + w.eval_unchecked(q.eval(s))
}

/// Truncation point beyond which the profile energy density is below cutoff
/// on both tails.
fn truncation(q: &TransitionProfile, w: &DoubleWell, lambda_cap: f64, h: f64) -> f64 {
    let mut s = h.max(1.0);
    for _ in 0..64 {
        s += 1.0;
        if profile_integrand(q, w, lambda_cap, s) < TAIL_CUTOFF
            && profile_integrand(q, w, lambda_cap, -s) < TAIL_CUTOFF
        {
            return s;
        }
    }
    s
}

/// Tail energy `e(h) = int_{|s| > h} (Lambda q'^2 / 2 + W(q)) ds`.
pub fn tail_e(q: &TransitionProfile, w: &DoubleWell, lambda_cap: f64, h: f64) -> f64 {
    assert!(h >= 0.0, "tail_e wants h >= 0");
    let s_max = truncation(q, w, lambda_cap, h);
    let f = |s: f64| profile_integrand(q, w, lambda_cap, s);
    adaptive_simpson(&f, h, s_max, 0.5 * QUAD_TOL)
        + adaptive_simpson(&f, -s_max, -h, 0.5 * QUAD_TOL)
}

/// `C_Lambda = int (Lambda q'^2 / 2 + W(q)) ds`, the planar candidate energy
/// per unit cross-section.
pub fn c_lambda(q: &TransitionProfile, w: &DoubleWell, lambda_cap: f64) -> f64 {
    tail_e(q, w, lambda_cap, 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    /// Closed form of `e(h)` for q = tanh, W quartic:
    /// integrand is `(Lambda/2 + 1) sech^4`, with antiderivative
    /// `tanh - tanh^3/3`.
    fn tanh_quartic_tail(lambda_cap: f64, h: f64) -> f64 {
        let t = h.tanh();
        (0.5 * lambda_cap + 1.0) * 2.0 * (2.0 / 3.0 - t + t * t * t / 3.0)
    }

    fn quartic_table(n: usize, scale: f64) -> DoubleWell {
        let us: Vec<f64> = (0..n).map(|i| -1.0 + 2.0 * i as f64 / (n - 1) as f64).collect();
        let mut us = us;
        *us.last_mut().unwrap() = 1.0;
        let ws: Vec<f64> = us
            .iter()
            .map(|&u| {
                let t = 1.0 - u * u;
                scale * t * t
            })
            .collect();
        DoubleWell::tabulated(us, ws).unwrap()
    }

    #[test]
    fn quartic_point_values() {
        let w = DoubleWell::Quartic;
        assert_eq!(w.eval(1.0).unwrap(), 0.0);
        assert_eq!(w.eval(-1.0).unwrap(), 0.0);
        assert_eq!(w.eval(0.0).unwrap(), 1.0);
        assert_eq!(w.eval(0.5).unwrap(), 0.5625);
        assert!(w.eval(1.5).is_err());
        assert!(w.eval(-1.0000001).is_err());
    }

    #[test]
    fn c_w_of_quartic_is_four_thirds() {
        assert!((c_w(&DoubleWell::Quartic) - 4.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn c_w_scales_like_sqrt_of_the_potential() {
        let w4 = quartic_table(100_001, 4.0);
        assert!((c_w(&w4) - 2.0 * 4.0 / 3.0).abs() < 1e-7);
    }

    #[test]
    fn tabulated_quartic_matches_quartic() {
        let wt = quartic_table(100_001, 1.0);
        assert!((c_w(&wt) - c_w(&DoubleWell::Quartic)).abs() < 1e-8);
        assert!((wt.eval(0.3).unwrap() - DoubleWell::Quartic.eval(0.3).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn sigma_1d_quartic_values() {
        let w = DoubleWell::Quartic;
        let base = 4.0 * 2.0f64.sqrt() / 3.0;
        assert!((sigma_1d(&w, 1.0) - base).abs() < 1e-9);
        assert!((sigma_1d(&w, 2.0) - 2.0 * base).abs() < 1e-9);
        // phi = sqrt(2): sqrt(2) * 4 sqrt(2) / 3 = 8/3
        assert!((sigma_1d(&w, 2.0f64.sqrt()) - 8.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn tail_matches_closed_form() {
        let q = TransitionProfile::Tanh;
        let w = DoubleWell::Quartic;
        for h in [0.0, 0.25, 1.0, 2.0, 3.0, 5.0] {
            let got = tail_e(&q, &w, 2.0, h);
            let want = tanh_quartic_tail(2.0, h);
            assert!((got - want).abs() < 1e-9, "h = {h}: {got} vs {want}");
        }
        // C_Lambda at Lambda = 2 is 8/3
        assert!((c_lambda(&q, &w, 2.0) - 8.0 / 3.0).abs() < 1e-9);
        // Lambda = 0 leaves only the W term: int sech^4 = 4/3
        assert!((c_lambda(&q, &w, 0.0) - 4.0 / 3.0).abs() < 1e-9);
        // deep tail is tiny
        assert!(tail_e(&q, &w, 2.0, 20.0) < 1e-12);
    }

    #[test]
    fn c_lambda_dominates_the_minimized_planar_energy() {
        let q = TransitionProfile::Tanh;
        let w = DoubleWell::Quartic;
        let lam = 2.0;
        // min over profiles <= the tanh candidate (equality at Lambda = 2)
        assert!(c_lambda(&q, &w, lam) >= sigma_1d(&w, lam.sqrt()) - 1e-9);
        assert!(c_lambda(&q, &w, 4.0) >= sigma_1d(&w, 2.0) - 1e-9);
    }

    #[test]
    fn quadrature_is_converged_at_tighter_tolerance() {
        let q = TransitionProfile::Tanh;
        let w = DoubleWell::Quartic;
        let f = |s: f64| profile_integrand(&q, &w, 2.0, s);
        let coarse = adaptive_simpson(&f, 0.0, 12.0, QUAD_TOL);
        let fine = adaptive_simpson(&f, 0.0, 12.0, QUAD_TOL / 16.0);
        assert!((coarse - fine).abs() < 1e-8);
    }

    #[test]
    fn tabulated_profile_has_compact_tail() {
        let n = 4001;
        let values: Vec<f64> = (0..n)
            .map(|i| {
                let s = -4.0 + 8.0 * i as f64 / (n - 1) as f64;
                (s * 1.5).tanh() / (6.0f64).tanh()
            })
            .map(|v| v.clamp(-1.0, 1.0))
            .collect();
        let mut values = values;
        values[0] = -1.0;
        *values.last_mut().unwrap() = 1.0;
        let q = TransitionProfile::tabulated(-4.0, 8.0 / (n - 1) as f64, values).unwrap();
        let w = DoubleWell::Quartic;
        assert_eq!(tail_e(&q, &w, 2.0, 4.5), 0.0);
        assert!(c_lambda(&q, &w, 2.0) > 0.0);
    }

    #[test]
    fn rejects_malformed_tables() {
        assert!(DoubleWell::tabulated(vec![-1.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(DoubleWell::tabulated(vec![-1.0, 0.0, 0.9], vec![0.0, 1.0, 0.0]).is_err());
        assert!(DoubleWell::tabulated(vec![-1.0, 0.0, 1.0], vec![0.0, -0.5, 0.0]).is_err());
        assert!(TransitionProfile::tabulated(0.0, 0.0, vec![-1.0, 1.0]).is_err());
        assert!(TransitionProfile::tabulated(0.0, 0.1, vec![-1.0, 0.5]).is_err());
    }

    proptest! {
        #[test]
        fn tail_is_monotone_decreasing(h1 in 0.0f64..6.0, h2 in 0.0f64..6.0) {
            let (lo, hi) = if h1 <= h2 { (h1, h2) } else { (h2, h1) };
            let q = TransitionProfile::Tanh;
            let w = DoubleWell::Quartic;
            let a = tail_e(&q, &w, 2.0, lo);
            let b = tail_e(&q, &w, 2.0, hi);
            prop_assert!(a >= b - 1e-12);
        }

        #[test]
        fn sigma_1d_is_linear_in_phi(phi in 0.01f64..10.0) {
            let w = DoubleWell::Quartic;
            let a = sigma_1d(&w, phi);
            let b = phi * sigma_1d(&w, 1.0);
            prop_assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()));
        }
    }
}
