//! Finite-difference verification that the correspondences are canonical
//! transformations.
//!
//! Everything here runs in `f64`.  The sphere and cylinder factors are
//! put in coordinates with stereographic charts chosen per sample point
//! (pole opposite the largest coordinate, so a step of `h` never leaves
//! the chart), which avoids trigonometric branch cuts and keeps the
//! formulas dimension-generic.  In chart coordinates `(q, p)` the
//! canonical one-form is `Σ pᵢ dqᵢ` on the nose, so two residuals make
//! sense directly:
//!
//! * **form residual** — `max |ω(Jₐ, J_b) − ω(eₐ, e_b)|` over Jacobian
//!   columns from centered differences; zero (to `O(h²)`) iff the map is
//!   a symplectomorphism.
//! * **Liouville residual** — `|p(F(z))·(dF v)_q − p(z)·v_q|`; the maps
//!   here preserve the tautological one-form exactly, which is stronger
//!   than preserving `ω`.
//!
//! A third **cosphere residual** measures strict contact invariance of
//! the fiber-normalizing maps restricted to unit covectors, computed on
//! ambient representatives with constraint-projected tangents.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{
    chi, chi_minus, chi_minus_homog, chi_plus, chi_plus_homog, ContactError, CotPoint,
    CylCotPoint, MapId, SphCotPoint,
};
use crate::scalar::{add, dot, scale, sub};

/// Residual summary from [`symplectic_check`].
#[derive(Clone, Debug, serde::Serialize)]
pub struct SympReport {
    pub map: String,
    pub n: usize,
    pub samples: usize,
    pub h: f64,
    pub max_form_residual: f64,
    pub max_liouville_residual: f64,
    pub max_cosphere_residual: f64,
}

impl SympReport {
    pub fn pass(&self, tol: f64) -> bool {
        self.max_form_residual <= tol
            && self.max_liouville_residual <= tol
            && self.max_cosphere_residual <= tol
    }
}

/// Standard symplectic pairing on `[q…, p…]` coordinates.
fn omega(u: &[f64], v: &[f64]) -> f64 {
    let m = u.len() / 2;
    (0..m).map(|i| u[m + i] * v[i] - u[i] * v[m + i]).sum()
}

/// Largest defect of `JᵀΩJ = Ω` for the centered-difference Jacobian of
/// `f` at `z`.
fn form_residual<F: FnMut(&[f64]) -> Vec<f64>>(f: &mut F, z: &[f64], h: f64) -> f64 {
    let d = z.len();
    let cols: Vec<Vec<f64>> = (0..d)
        .map(|a| {
            let mut zp = z.to_vec();
            zp[a] += h;
            let mut zm = z.to_vec();
            zm[a] -= h;
            let (fp, fm) = (f(&zp), f(&zm));
            fp.iter().zip(&fm).map(|(p, m)| (p - m) / (2.0 * h)).collect()
        })
        .collect();
    let mut worst = 0.0f64;
    for a in 0..d {
        for b in (a + 1)..d {
            let mut ea = vec![0.0; d];
            ea[a] = 1.0;
            let mut eb = vec![0.0; d];
            eb[b] = 1.0;
            worst = worst.max((omega(&cols[a], &cols[b]) - omega(&ea, &eb)).abs());
        }
    }
    worst
}

/// Defect of the tautological one-form pullback along direction `v`.
fn liouville_residual<F: FnMut(&[f64]) -> Vec<f64>>(
    f: &mut F,
    z: &[f64],
    v: &[f64],
    h: f64,
) -> f64 {
    let m = z.len() / 2;
    let zp: Vec<f64> = z.iter().zip(v).map(|(a, b)| a + h * b).collect();
    let zm: Vec<f64> = z.iter().zip(v).map(|(a, b)| a - h * b).collect();
    let (fp, fm) = (f(&zp), f(&zm));
    let fz = f(z);
    let dfv: Vec<f64> = fp.iter().zip(&fm).map(|(p, q)| (p - q) / (2.0 * h)).collect();
    let pushed: f64 = (0..m).map(|i| fz[m + i] * dfv[i]).sum();
    let straight: f64 = (0..m).map(|i| z[m + i] * v[i]).sum();
    (pushed - straight).abs()
}

/// Stereographic chart of the unit sphere in `ℝⁿ` with pole `−σ e_k`;
/// valid wherever `σ x_k > −1`, in particular on a neighbourhood of any
/// point with `|x_k| = max_i |x_i|`.
struct SphereChart {
    k: usize,
    sigma: f64,
}

impl SphereChart {
    fn at(point: &[f64]) -> SphereChart {
        let mut k = 0;
        for (i, c) in point.iter().enumerate() {
            if c.abs() > point[k].abs() {
                k = i;
            }
        }
        SphereChart {
            k,
            sigma: if point[k] >= 0.0 { 1.0 } else { -1.0 },
        }
    }

    fn coords(&self, x: &[f64]) -> Vec<f64> {
        let den = 1.0 + self.sigma * x[self.k];
        x.iter()
            .enumerate()
            .filter(|(i, _)| *i != self.k)
            .map(|(_, c)| c / den)
            .collect()
    }

    fn embed(&self, w: &[f64]) -> Vec<f64> {
        let w2 = dot(w, w);
        let d = 1.0 + w2;
        let mut out = Vec::with_capacity(w.len() + 1);
        let mut rest = w.iter();
        for slot in 0..=w.len() {
            if slot == self.k {
                out.push(self.sigma * (1.0 - w2) / d);
            } else {
                out.push(2.0 * rest.next().unwrap() / d);
            }
        }
        out
    }

    /// Ambient coordinate tangent vectors `∂x/∂wᵢ`.
    fn tangent_basis(&self, w: &[f64]) -> Vec<Vec<f64>> {
        let d = 1.0 + dot(w, w);
        (0..w.len())
            .map(|i| {
                let mut col = Vec::with_capacity(w.len() + 1);
                let mut j = 0;
                for slot in 0..=w.len() {
                    if slot == self.k {
                        col.push(-4.0 * self.sigma * w[i] / (d * d));
                    } else {
                        let delta = if j == i { 2.0 / d } else { 0.0 };
                        col.push(delta - 4.0 * w[i] * w[j] / (d * d));
                        j += 1;
                    }
                }
                col
            })
            .collect()
    }

    /// Chart components of an ambient covector: `pᵢ = η·∂x/∂wᵢ`.
    fn fiber_coords(&self, w: &[f64], eta: &[f64]) -> Vec<f64> {
        self.tangent_basis(w).iter().map(|b| dot(b, eta)).collect()
    }

    /// Tangential ambient representative with prescribed chart
    /// components.  Stereographic charts are conformal — the Gram matrix
    /// of the coordinate basis is `(4/D²)·I` (asserted in tests) — so
    /// inverting it is a scalar multiplication.
    fn lift_covector(&self, w: &[f64], p: &[f64]) -> Vec<f64> {
        let d = 1.0 + dot(w, w);
        let s = d * d / 4.0;
        let basis = self.tangent_basis(w);
        let mut eta = vec![0.0; w.len() + 1];
        for (pi, b) in p.iter().zip(&basis) {
            for (e, bj) in eta.iter_mut().zip(b) {
                *e += s * pi * bj;
            }
        }
        eta
    }
}

/// Chart coordinates `[w…, r, p…, η_r]` of a cylinder cotangent point:
/// positions `(w, r)`, momenta `(p, η_r)`.
fn cyl_coords(chart: &SphereChart, c: &CylCotPoint<f64>) -> Vec<f64> {
    let w = chart.coords(&c.nhat);
    let p = chart.fiber_coords(&w, &c.eta);
    let mut out = w;
    out.push(c.r);
    out.extend(p);
    out.push(c.etar);
    out
}

fn unit_dir(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let n2 = dot(&v, &v);
        if n2 > 0.1 {
            return scale(&v, &(1.0 / n2.sqrt()));
        }
    }
}

/// Form, Liouville, and cosphere residuals at one random point of
/// `Ṫ*ℝⁿ`, with the target cylinder in the chart of the sample's own
/// image.
fn chi_sample(rng: &mut ChaCha8Rng, n: usize, h: f64) -> (f64, f64, f64) {
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let xi: Vec<f64> = loop {
        let c: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let n2 = dot(&c, &c);
        if n2 > 0.25 && n2 < 9.0 {
            break c;
        }
    };
    let z0: Vec<f64> = x.iter().chain(&xi).cloned().collect();
    let center = chi(&CotPoint {
        x: x.clone(),
        xi: xi.clone(),
    })
    .expect("float norms always exist");
    let tgt = SphereChart::at(&center.nhat);
    let mut f = |z: &[f64]| {
        let (zx, zxi) = z.split_at(n);
        let c = chi(&CotPoint {
            x: zx.to_vec(),
            xi: zxi.to_vec(),
        })
        .expect("float norms always exist");
        cyl_coords(&tgt, &c)
    };
    let fr = form_residual(&mut f, &z0, h);
    let mut lr = 0.0f64;
    for _ in 0..4 {
        let v: Vec<f64> = (0..2 * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        lr = lr.max(liouville_residual(&mut f, &z0, &v, h));
    }
    let cr = chi_cosphere_residual(rng, n, h);
    (fr, lr, cr)
}

/// Strict contact residual of the correspondence on the unit cosphere:
/// along tangents with `ξ·vξ = 0`, the pullback of `η·dn̂ + η_r dr` must
/// equal `ξ·dx`.  Computed on ambient representatives.
fn chi_cosphere_residual(rng: &mut ChaCha8Rng, n: usize, h: f64) -> f64 {
    let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let xi = unit_dir(rng, n);
    let c0 = chi(&CotPoint {
        x: x.clone(),
        xi: xi.clone(),
    })
    .expect("float norms always exist");
    let vx: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let vxi = sub(&raw, &scale(&xi, &dot(&raw, &xi)));
    let at = |s: f64| {
        chi(&CotPoint {
            x: add(&x, &scale(&vx, &s)),
            xi: add(&xi, &scale(&vxi, &s)),
        })
        .expect("float norms always exist")
    };
    let (plus, minus) = (at(h), at(-h));
    let inv2h = 1.0 / (2.0 * h);
    let dn: Vec<f64> = plus
        .nhat
        .iter()
        .zip(&minus.nhat)
        .map(|(p, q)| (p - q) * inv2h)
        .collect();
    let dr = (plus.r - minus.r) * inv2h;
    let alpha_t = dot(&c0.eta, &dn) + c0.etar * dr;
    let alpha_s = dot(&xi, &vx);
    (alpha_t - alpha_s).abs()
}

/// Residuals of a sphere duality at one random cotangent point.  The
/// form and Liouville residuals drive the degree-one representative in
/// source and target stereographic charts; the cosphere residual drives
/// the fiber-normalizing map itself on unit covectors.
fn sphere_sample(rng: &mut ChaCha8Rng, map: MapId, ambient: usize, h: f64) -> (f64, f64, f64) {
    let m = ambient - 1;
    let x = unit_dir(rng, ambient);
    let eta: Vec<f64> = loop {
        let raw: Vec<f64> = (0..ambient).map(|_| rng.gen_range(-1.5..1.5)).collect();
        let t = sub(&raw, &scale(&x, &dot(&raw, &x)));
        let n2 = dot(&t, &t);
        if n2 > 0.25 && n2 < 4.0 {
            break t;
        }
    };
    let fwd = |pt: &SphCotPoint<f64>| match map {
        MapId::ChiPlus => chi_plus_homog(pt).expect("float norms always exist"),
        _ => chi_minus_homog(pt).expect("float norms always exist"),
    };
    let src = SphereChart::at(&x);
    let w0 = src.coords(&x);
    let p0 = src.fiber_coords(&w0, &eta);
    let z0: Vec<f64> = w0.iter().chain(&p0).cloned().collect();
    let center = fwd(&SphCotPoint {
        x: x.clone(),
        xi: eta.clone(),
    });
    let tgt = SphereChart::at(&center.x);
    let mut f = |z: &[f64]| {
        let (w, p) = z.split_at(m);
        let out = fwd(&SphCotPoint {
            x: src.embed(w),
            xi: src.lift_covector(w, p),
        });
        let wt = tgt.coords(&out.x);
        let pt = tgt.fiber_coords(&wt, &out.xi);
        wt.into_iter().chain(pt).collect()
    };
    let fr = form_residual(&mut f, &z0, h);
    let mut lr = 0.0f64;
    for _ in 0..4 {
        let v: Vec<f64> = (0..2 * m).map(|_| rng.gen_range(-1.0..1.0)).collect();
        lr = lr.max(liouville_residual(&mut f, &z0, &v, h));
    }
    let cr = sphere_cosphere_residual(rng, map, ambient, h);
    (fr, lr, cr)
}

/// Strict contact residual of a fiber-normalizing duality on the unit
/// cosphere bundle: tangents are projected against the gradients of the
/// three constraints `‖x‖ = 1`, `x·ξ = 0`, `‖ξ‖ = 1` (mutually
/// orthogonal at any valid point), and the pullback of `η·dy` must equal
/// `ξ·dx`.
fn sphere_cosphere_residual(rng: &mut ChaCha8Rng, map: MapId, ambient: usize, h: f64) -> f64 {
    let x = unit_dir(rng, ambient);
    let xi: Vec<f64> = loop {
        let raw: Vec<f64> = (0..ambient).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let t = sub(&raw, &scale(&x, &dot(&raw, &x)));
        let n2 = dot(&t, &t);
        if n2 > 0.1 {
            break scale(&t, &(1.0 / n2.sqrt()));
        }
    };
    let verb = |pt: &SphCotPoint<f64>| match map {
        MapId::ChiPlus => chi_plus(pt).expect("float norms always exist"),
        _ => chi_minus(pt).expect("float norms always exist"),
    };
    let out0 = verb(&SphCotPoint {
        x: x.clone(),
        xi: xi.clone(),
    });
    let mut vx: Vec<f64> = (0..ambient).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut vxi: Vec<f64> = (0..ambient).map(|_| rng.gen_range(-1.0..1.0)).collect();
    vx = sub(&vx, &scale(&x, &dot(&vx, &x)));
    vxi = sub(&vxi, &scale(&xi, &dot(&vxi, &xi)));
    let b = (dot(&vx, &xi) + dot(&vxi, &x)) / 2.0;
    vx = sub(&vx, &scale(&xi, &b));
    vxi = sub(&vxi, &scale(&x, &b));
    let at = |s: f64| {
        verb(&SphCotPoint {
            x: add(&x, &scale(&vx, &s)),
            xi: add(&xi, &scale(&vxi, &s)),
        })
    };
    let (plus, minus) = (at(h), at(-h));
    let inv2h = 1.0 / (2.0 * h);
    let dy: Vec<f64> = plus
        .x
        .iter()
        .zip(&minus.x)
        .map(|(p, q)| (p - q) * inv2h)
        .collect();
    let alpha_t = dot(&out0.xi, &dy);
    let alpha_s = dot(&xi, &vx);
    (alpha_t - alpha_s).abs()
}

/// Seeded finite-difference residual scan for one map.
///
/// `n` is the base dimension for the line-to-cylinder correspondence and
/// the ambient dimension for the sphere dualities; the chart machinery
/// needs `n ≥ 2`.  The identity map exercises the harness itself and
/// must come out at the rounding floor.
pub fn symplectic_check(
    map: MapId,
    n: usize,
    samples: usize,
    seed: u64,
    h: f64,
) -> Result<SympReport, ContactError> {
    if map != MapId::Identity && n < 2 {
        return Err(ContactError::DimMismatch(
            "chart-based residuals need n ≥ 2".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = SympReport {
        map: map.name().into(),
        n,
        samples,
        h,
        max_form_residual: 0.0,
        max_liouville_residual: 0.0,
        max_cosphere_residual: 0.0,
    };
    for _ in 0..samples {
        let (fr, lr, cr) = match map {
            MapId::Chi => chi_sample(&mut rng, n, h),
            MapId::ChiPlus | MapId::ChiMinus => sphere_sample(&mut rng, map, n, h),
            MapId::Identity => {
                let d = 2 * n.max(1);
                let z: Vec<f64> = (0..d)
                    .map(|_| rng.gen_range(-1024i32..1024) as f64 / 1024.0)
                    .collect();
                let mut f = |y: &[f64]| y.to_vec();
                let fr = form_residual(&mut f, &z, h);
                let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
                (fr, liouville_residual(&mut f, &z, &v, h), 0.0)
            }
        };
        rep.max_form_residual = rep.max_form_residual.max(fr);
        rep.max_liouville_residual = rep.max_liouville_residual.max(lr);
        rep.max_cosphere_residual = rep.max_cosphere_residual.max(cr);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_jacobian_is_exactly_symplectic() {
        // Dyadic center and step make every centered difference exact, so
        // the residual is 0.0 on the nose, not merely small.
        let z = [0.5, -0.25, 1.0, 0.75];
        let h = 2f64.powi(-17);
        let mut f = |y: &[f64]| y.to_vec();
        assert_eq!(form_residual(&mut f, &z, h), 0.0);
        let v = [0.5, -0.5, 0.25, 1.0];
        assert_eq!(liouville_residual(&mut f, &z, &v, h), 0.0);
    }

    #[test]
    fn stereographic_charts_roundtrip_and_are_conformal() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in [2usize, 3, 4] {
            for _ in 0..40 {
                let x = unit_dir(&mut rng, n);
                let chart = SphereChart::at(&x);
                let w = chart.coords(&x);
                let back = chart.embed(&w);
                for (a, b) in x.iter().zip(&back) {
                    assert!((a - b).abs() < 1e-12);
                }
                let basis = chart.tangent_basis(&w);
                let d = 1.0 + dot(&w, &w);
                for i in 0..basis.len() {
                    assert!(dot(&basis[i], &back).abs() < 1e-12);
                    for j in 0..basis.len() {
                        let g = dot(&basis[i], &basis[j]);
                        let expect = if i == j { 4.0 / (d * d) } else { 0.0 };
                        assert!((g - expect).abs() < 1e-12);
                    }
                }
                let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect();
                let eta = sub(&raw, &scale(&x, &dot(&raw, &x)));
                let lifted = chart.lift_covector(&w, &chart.fiber_coords(&w, &eta));
                for (a, b) in eta.iter().zip(&lifted) {
                    assert!((a - b).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn chi_float_residuals_stay_small() {
        for n in [2usize, 3] {
            let rep = symplectic_check(MapId::Chi, n, 12, 7, 1e-5).unwrap();
            assert!(rep.pass(1e-8), "n = {n}: {rep:?}");
        }
    }

    #[test]
    fn sphere_duality_float_residuals_stay_small() {
        for n in [2usize, 3] {
            for map in [MapId::ChiPlus, MapId::ChiMinus] {
                let rep = symplectic_check(map, n, 12, 5, 1e-5).unwrap();
                assert!(rep.pass(1e-8), "{} ambient {n}: {rep:?}", rep.map);
            }
        }
    }

    #[test]
    fn identity_check_api() {
        let rep = symplectic_check(MapId::Identity, 3, 5, 1, 1e-5).unwrap();
        assert!(rep.pass(1e-8), "{rep:?}");
        assert!(symplectic_check(MapId::Chi, 1, 5, 1, 1e-5).is_err());
    }
}
