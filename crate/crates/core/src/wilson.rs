//! Circumcentric Hodge stars, the harmonic Wilson 1-form on an annulus and the
//! regularized Wilson line `∫ a ∧ Ω_n`.

use serde::Serialize;

use crate::complex::{cup_product, distance, integrate, Cochain, MeshKind, SimplicialComplex};
use crate::error::{Error, Result};

/// Diagonal Hodge stars, one weight per simplex and degree.
#[derive(Debug, Clone, PartialEq)]
pub struct HodgeStructure {
    pub star: Vec<Vec<f64>>,
}

fn sub(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: &[f64; 3], b: &[f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn norm(a: &[f64; 3]) -> f64 {
    dot(a, a).sqrt()
}

/// Cotangent of the angle at `p` in the triangle `p, q, r`.
fn cot_at(p: &[f64; 3], q: &[f64; 3], r: &[f64; 3]) -> f64 {
    let (u, v) = (sub(q, p), sub(r, p));
    dot(&u, &v) / norm(&cross(&u, &v))
}

pub fn triangle_area(cx: &SimplicialComplex, t: usize) -> f64 {
    let s = cx.simplex(2, t);
    let c = cx.coords();
    0.5 * norm(&cross(&sub(&c[s[1]], &c[s[0]]), &sub(&c[s[2]], &c[s[0]])))
}

/// Circumcentric stars: dual volume over primal volume.
pub fn build_hodge(cx: &SimplicialComplex) -> Result<HodgeStructure> {
    let c = cx.coords();
    let edge_len: Vec<f64> = cx.simplices(1).iter().map(|e| distance(&c[e[0]], &c[e[1]])).collect();
    if let Some(e) = edge_len.iter().position(|&l| !(l > 1e-14)) {
        return Err(Error::DegenerateMesh(format!("edge {e} {:?} has zero length", cx.simplex(1, e))));
    }
    match cx.dim() {
        1 => {
            let mut star0 = vec![0.0; cx.len(0)];
            for (e, s) in cx.simplices(1).iter().enumerate() {
                star0[s[0]] += 0.5 * edge_len[e];
                star0[s[1]] += 0.5 * edge_len[e];
            }
            let star1 = edge_len.iter().map(|l| 1.0 / l).collect();
            Ok(HodgeStructure { star: vec![star0, star1] })
        }
        2 => {
            let mut star0 = vec![0.0; cx.len(0)];
            let mut dual = vec![0.0; cx.len(1)];
            let mut star2 = Vec::with_capacity(cx.len(2));
            for t in 0..cx.len(2) {
                let area = triangle_area(cx, t);
                if !(area > 1e-14) {
                    return Err(Error::DegenerateMesh(format!("triangle {t} {:?} is degenerate", cx.simplex(2, t))));
                }
                star2.push(1.0 / area);
                let s = cx.simplex(2, t);
                for j in 0..3 {
                    let (a, b, o) = (s[(j + 1) % 3], s[(j + 2) % 3], s[j]);
                    let cot = cot_at(&c[o], &c[a], &c[b]);
                    let e = cx.find(&[a.min(b), a.max(b)]).expect("triangle edge");
                    dual[e] += 0.5 * cot;
                    let piece = 0.125 * edge_len[e] * edge_len[e] * cot;
                    star0[a] += piece;
                    star0[b] += piece;
                }
            }
            let bad: Vec<usize> = (0..cx.len(1)).filter(|&e| !(dual[e] > 0.0)).collect();
            if !bad.is_empty() {
                return Err(Error::DegenerateMesh(format!(
                    "non-positive circumcentric dual weight on edges {:?}",
                    bad.iter().take(8).map(|&e| cx.simplex(1, e).to_vec()).collect::<Vec<_>>()
                )));
            }
            let bad: Vec<usize> = (0..cx.len(0)).filter(|&v| !(star0[v] > 0.0)).collect();
            if !bad.is_empty() {
                return Err(Error::DegenerateMesh(format!("non-positive dual cell area at vertices {bad:?}")));
            }
            Ok(HodgeStructure { star: vec![star0, dual, star2] })
        }
        d => Err(Error::InvalidParameter(format!("Hodge stars are built for curves and surfaces, got dimension {d}"))),
    }
}

impl HodgeStructure {
    fn check(&self, c: &Cochain<f64>) -> Result<()> {
        match self.star.get(c.degree) {
            Some(s) if s.len() == c.len() => Ok(()),
            _ => Err(Error::Shape(format!("{}-cochain does not match the Hodge structure", c.degree))),
        }
    }

    /// `⟨a, b⟩ = Σ ⋆_p a b`.
    pub fn inner(&self, a: &Cochain<f64>, b: &Cochain<f64>) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(self.star[a.degree].iter().zip(a.values.iter().zip(&b.values)).map(|(s, (x, y))| s * x * y).sum())
    }

    pub fn norm(&self, a: &Cochain<f64>) -> Result<f64> {
        Ok(self.inner(a, a)?.sqrt())
    }

    /// Adjoint of the coboundary, `⋆⁻¹ dᵀ ⋆`, from degree `p` to `p - 1`.
    pub fn codifferential(&self, cx: &SimplicialComplex, c: &Cochain<f64>) -> Result<Cochain<f64>> {
        self.check(c)?;
        if c.degree == 0 {
            return Err(Error::DegreeMismatch { expected: 1, found: 0 });
        }
        let p = c.degree;
        let mut out = vec![0.0; cx.len(p - 1)];
        for (row, col, s) in cx.boundary_entries(p) {
            out[row] += s as f64 * self.star[p][col] * c.values[col];
        }
        for (v, w) in out.iter_mut().zip(&self.star[p - 1]) {
            *v /= w;
        }
        Ok(Cochain::new(p - 1, out))
    }

    /// `δ d f`, the positive Laplacian on functions.
    pub fn laplacian(&self, cx: &SimplicialComplex, f: &Cochain<f64>) -> Result<Cochain<f64>> {
        self.codifferential(cx, &cx.full().coboundary(f)?)
    }
}

/// Rounds to a fixed binary grid so that sums of a few grid values are exact in `f64`.
fn to_grid(x: f64) -> f64 {
    const SCALE: f64 = (1u64 << 40) as f64;
    (x * SCALE).round() / SCALE
}

/// Solves `dᵀ⋆₁d ψ = b` with zero-mean `ψ` by Jacobi-preconditioned conjugate gradients.
fn solve_neumann(cx: &SimplicialComplex, star1: &[f64], b: &[f64], tol: f64) -> Result<Vec<f64>> {
    let n = cx.len(0);
    let edges = cx.simplices(1);
    let apply = |x: &[f64]| -> Vec<f64> {
        let mut y = vec![0.0; n];
        for (e, s) in edges.iter().enumerate() {
            let flux = star1[e] * (x[s[1]] - x[s[0]]);
            y[s[1]] += flux;
            y[s[0]] -= flux;
        }
        y
    };
    let mut diag = vec![0.0; n];
    for (e, s) in edges.iter().enumerate() {
        diag[s[0]] += star1[e];
        diag[s[1]] += star1[e];
    }
    let project = |v: &mut Vec<f64>| {
        let mean = v.iter().sum::<f64>() / n as f64;
        v.iter_mut().for_each(|x| *x -= mean);
    };
    let dotv = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut rhs = b.to_vec();
    project(&mut rhs);
    let bnorm = dotv(&rhs, &rhs).sqrt();
    let mut x = vec![0.0; n];
    if bnorm == 0.0 {
        return Ok(x);
    }
    let mut r = rhs.clone();
    let mut z: Vec<f64> = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
    project(&mut z);
    let mut p = z.clone();
    let mut rz = dotv(&r, &z);
    let max_iter = 20 * n + 100;
    for _ in 0..max_iter {
        let ap = apply(&p);
        let alpha = rz / dotv(&p, &ap);
        x.iter_mut().zip(&p).for_each(|(x, p)| *x += alpha * p);
        r.iter_mut().zip(&ap).for_each(|(r, a)| *r -= alpha * a);
        let res = dotv(&r, &r).sqrt();
        if res <= tol * bnorm {
            project(&mut x);
            return Ok(x);
        }
        z = r.iter().zip(&diag).map(|(r, d)| r / d).collect();
        project(&mut z);
        let rz_new = dotv(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p = z.iter().zip(&p).map(|(z, p)| z + beta * p).collect();
    }
    let res = dotv(&r, &r).sqrt() / bnorm;
    Err(Error::NoConvergence { iterations: max_iter, residual: res })
}

/// Closed, co-closed, boundary-tangential 1-form with period `2πn` around the hole.
#[derive(Debug, Clone, PartialEq)]
pub struct WilsonForm {
    pub form: Cochain<f64>,
    pub n: i64,
    pub diagnostics: WilsonDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WilsonDiagnostics {
    pub n: i64,
    pub h: f64,
    /// Largest `|dΩ|`; zero by construction.
    pub closure: f64,
    /// RMS jump of the normal component of the reconstructed field across interior
    /// edges, relative to the RMS field strength.
    pub coclosure: f64,
    /// RMS normal component on the boundary, relative to the RMS field strength.
    pub tangentiality: f64,
    /// RMS radial component, relative to the RMS field strength.
    pub radial: f64,
    pub period_inner: f64,
    pub period_outer: f64,
}

/// Annulus ring `j` traversed counterclockwise, as `(edge, sign)` pairs.
fn ring(cx: &SimplicialComplex, n_theta: usize, j: usize) -> Vec<(usize, f64)> {
    (0..n_theta)
        .map(|i| {
            let (a, b) = (j * n_theta + i, j * n_theta + (i + 1) % n_theta);
            let e = cx.find(&[a.min(b), a.max(b)]).expect("ring edge");
            (e, if a < b { 1.0 } else { -1.0 })
        })
        .collect()
}

/// Constant vector field on each triangle reproducing the three edge values.
pub fn whitney_field(cx: &SimplicialComplex, form: &Cochain<f64>) -> Vec<[f64; 2]> {
    let c = cx.coords();
    cx.simplices(2)
        .iter()
        .map(|s| {
            let val = |a: usize, b: usize| {
                let e = cx.find(&[a.min(b), a.max(b)]).expect("triangle edge");
                if a < b {
                    form.values[e]
                } else {
                    -form.values[e]
                }
            };
            let (u, v) = (sub(&c[s[1]], &c[s[0]]), sub(&c[s[2]], &c[s[0]]));
            let (fu, fv) = (val(s[0], s[1]), val(s[0], s[2]));
            let det = u[0] * v[1] - u[1] * v[0];
            [(fu * v[1] - fv * u[1]) / det, (u[0] * fv - v[0] * fu) / det]
        })
        .collect()
}

fn diagnostics(cx: &SimplicialComplex, form: &Cochain<f64>, n: i64, n_theta: usize, n_r: usize) -> Result<WilsonDiagnostics> {
    let c = cx.coords();
    let closure = cx.full().coboundary(form)?.max_abs();
    let field = whitney_field(cx, form);
    let mut l2 = 0.0;
    let mut area_total = 0.0;
    let mut radial = 0.0;
    let mut sides: Vec<Vec<usize>> = vec![Vec::new(); cx.len(1)];
    for (t, s) in cx.simplices(2).iter().enumerate() {
        let v = field[t];
        let area = triangle_area(cx, t);
        let centroid = [(c[s[0]][0] + c[s[1]][0] + c[s[2]][0]) / 3.0, (c[s[0]][1] + c[s[1]][1] + c[s[2]][1]) / 3.0];
        let r = centroid[0].hypot(centroid[1]);
        let vr = (v[0] * centroid[0] + v[1] * centroid[1]) / r;
        l2 += (v[0] * v[0] + v[1] * v[1]) * area;
        radial += vr * vr * area;
        area_total += area;
        for j in 0..3 {
            let (a, b) = (s[j].min(s[(j + 1) % 3]), s[j].max(s[(j + 1) % 3]));
            sides[cx.find(&[a, b]).expect("edge")].push(t);
        }
    }
    let rms = (l2 / area_total).sqrt();
    let normal_of = |e: usize| {
        let s = cx.simplex(1, e);
        let d = sub(&c[s[1]], &c[s[0]]);
        let len = d[0].hypot(d[1]);
        ([d[1] / len, -d[0] / len], len)
    };
    // interior edges: jump of the normal component (the distributional divergence);
    // boundary edges: the normal component itself
    let (mut jump, mut interior_len, mut normal, mut boundary_len) = (0.0, 0.0, 0.0, 0.0);
    for (e, ts) in sides.iter().enumerate() {
        let (nrm, len) = normal_of(e);
        let vn = |t: usize| field[t][0] * nrm[0] + field[t][1] * nrm[1];
        match ts.as_slice() {
            [t] => {
                normal += vn(*t).powi(2) * len;
                boundary_len += len;
            }
            [t, u] => {
                jump += (vn(*t) - vn(*u)).powi(2) * len;
                interior_len += len;
            }
            _ => return Err(Error::DegenerateMesh(format!("edge {:?} is not a surface edge", cx.simplex(1, e)))),
        }
    }
    let period = |j: usize| ring(cx, n_theta, j).iter().map(|&(e, s)| s * form.values[e]).sum::<f64>();
    let rel = |x: f64| if rms > 0.0 { x / rms } else { x };
    Ok(WilsonDiagnostics {
        n,
        h: cx.max_edge_length(),
        closure,
        coclosure: rel((jump / interior_len).sqrt()),
        tangentiality: rel((normal / boundary_len).sqrt()),
        radial: rel((radial / area_total).sqrt()),
        period_inner: period(0),
        period_outer: period(n_r),
    })
}

/// The harmonic Wilson form of winding `n` on an annulus.
///
/// Starts from the sampled angle form and removes its co-exact part by a Neumann solve,
/// which minimizes `‖Ω‖` in the class of period `2πn` and imposes zero normal flux at the
/// boundary. Values are kept on a binary grid so that `dΩ = 0` holds exactly.
pub fn solve_harmonic_form(cx: &SimplicialComplex, n: i64) -> Result<WilsonForm> {
    let MeshKind::Annulus { n_r, n_theta, .. } = *cx.kind() else {
        return Err(Error::WrongStratum("the Wilson form is built on an annulus".into()));
    };
    let hodge = build_hodge(cx)?;
    let two_pi = to_grid(std::f64::consts::TAU);
    let theta: Vec<f64> = cx.coords().iter().map(|p| to_grid(p[1].atan2(p[0]).rem_euclid(std::f64::consts::TAU))).collect();
    let base = Cochain::new(
        1,
        cx.simplices(1)
            .iter()
            .map(|e| {
                let d = theta[e[1]] - theta[e[0]];
                if d > std::f64::consts::PI {
                    d - two_pi
                } else if d < -std::f64::consts::PI {
                    d + two_pi
                } else {
                    d
                }
            })
            .collect(),
    );
    let mut rhs = vec![0.0; cx.len(0)];
    for (e, s) in cx.simplices(1).iter().enumerate() {
        let flux = hodge.star[1][e] * base.values[e];
        rhs[s[1]] -= flux;
        rhs[s[0]] += flux;
    }
    let psi: Vec<f64> = solve_neumann(cx, &hodge.star[1], &rhs, 1e-13)?.into_iter().map(to_grid).collect();
    let unit = Cochain::new(
        1,
        cx.simplices(1).iter().enumerate().map(|(e, s)| base.values[e] + (psi[s[1]] - psi[s[0]])).collect(),
    );
    let form = unit.map(|v| v * n as f64);
    let diagnostics = diagnostics(cx, &form, n, n_theta, n_r)?;
    Ok(WilsonForm { form, n, diagnostics })
}

/// `∫ a ∧ b` of two 1-cochains on an oriented surface, by cup product.
pub fn wedge_integral(cx: &SimplicialComplex, a: &Cochain<f64>, b: &Cochain<f64>) -> Result<f64> {
    if a.degree + b.degree != cx.dim() {
        return Err(Error::DegreeMismatch { expected: cx.dim() as i64, found: (a.degree + b.degree) as i64 });
    }
    integrate(&cup_product(cx, a, b)?, &cx.fundamental_class())
}

/// The regularized Wilson line `∫ a ∧ Ω_n`.
pub fn wilson_line_value(cx: &SimplicialComplex, a: &Cochain<f64>, omega: &WilsonForm) -> Result<f64> {
    if a.degree != 1 {
        return Err(Error::DegreeMismatch { expected: 1, found: a.degree as i64 });
    }
    if a.len() != cx.len(1) || omega.form.len() != cx.len(1) {
        return Err(Error::Shape("cochains live on different complexes".into()));
    }
    wedge_integral(cx, a, &omega.form)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::build_complex;
    use crate::quadrature::adaptive_simpson;
    use std::f64::consts::{PI, TAU};

    fn annulus(n_theta: usize) -> SimplicialComplex {
        jittered(n_theta, 0.0)
    }

    fn jittered(n_theta: usize, jitter: f64) -> SimplicialComplex {
        // ring count keeping triangles near equilateral
        let n_r = ((2f64.ln()) / (0.5 * 3f64.sqrt() * TAU / n_theta as f64)).round() as usize;
        build_complex(&MeshKind::Annulus { n_r, n_theta, r_in: 1.0, r_out: 2.0, jitter }).unwrap()
    }

    #[test]
    fn circle_stars_are_uniform() {
        let cx = build_complex(&MeshKind::Circle { n: 16 }).unwrap();
        let h = build_hodge(&cx).unwrap();
        let len = 2.0 * (PI / 16.0).sin();
        assert!(h.star[0].iter().all(|w| (w - len).abs() < 1e-14));
        assert!(h.star[1].iter().all(|w| (w - 1.0 / len).abs() < 1e-12));
    }

    #[test]
    fn edge_weights_match_circumcenters() {
        let cx = annulus(24);
        let h = build_hodge(&cx).unwrap();
        let c = cx.coords();
        let mut dual = vec![0.0; cx.len(1)];
        for s in cx.simplices(2) {
            let (a, b, d) = (c[s[0]], c[s[1]], c[s[2]]);
            let den = 2.0 * (a[0] * (b[1] - d[1]) + b[0] * (d[1] - a[1]) + d[0] * (a[1] - b[1]));
            let sq = |p: [f64; 3]| p[0] * p[0] + p[1] * p[1];
            let ux = (sq(a) * (b[1] - d[1]) + sq(b) * (d[1] - a[1]) + sq(d) * (a[1] - b[1])) / den;
            let uy = (sq(a) * (d[0] - b[0]) + sq(b) * (a[0] - d[0]) + sq(d) * (b[0] - a[0])) / den;
            for j in 0..3 {
                let (p, q, o) = (s[j], s[(j + 1) % 3], s[(j + 2) % 3]);
                let e = cx.find(&[p.min(q), p.max(q)]).unwrap();
                let mid = [0.5 * (c[p][0] + c[q][0]), 0.5 * (c[p][1] + c[q][1])];
                let dist = (ux - mid[0]).hypot(uy - mid[1]);
                // signed: positive when the circumcenter lies on the same side as the opposite vertex
                let side = ((c[q][0] - c[p][0]) * (uy - c[p][1]) - (c[q][1] - c[p][1]) * (ux - c[p][0]))
                    * ((c[q][0] - c[p][0]) * (c[o][1] - c[p][1]) - (c[q][1] - c[p][1]) * (c[o][0] - c[p][0]));
                dual[e] += if side >= 0.0 { dist } else { -dist };
            }
        }
        for (e, s) in cx.simplices(1).iter().enumerate() {
            let ratio = dual[e] / distance(&c[s[0]], &c[s[1]]);
            assert!((ratio - h.star[1][e]).abs() < 1e-12, "edge {e}: {ratio} vs {}", h.star[1][e]);
        }
        let total: f64 = h.star[0].iter().sum();
        let area: f64 = (0..cx.len(2)).map(|t| triangle_area(&cx, t)).sum();
        assert!((total - area).abs() < 1e-10);
    }

    #[test]
    fn laplacian_of_harmonic_quadratic_converges_at_second_order() {
        let mut errs = Vec::new();
        for n in [48, 96, 192] {
            let cx = annulus(n);
            let h = build_hodge(&cx).unwrap();
            let f = Cochain::new(0, cx.coords().iter().map(|p| p[0] * p[0] - p[1] * p[1]).collect());
            let lap = h.laplacian(&cx, &f).unwrap();
            let MeshKind::Annulus { n_r, n_theta, .. } = *cx.kind() else { unreachable!() };
            let interior = n_theta..n_r * n_theta;
            errs.push(interior.map(|v| lap.values[v].abs()).fold(0.0, f64::max));
        }
        let order = (errs[1] / errs[2]).log2();
        assert!(order > 1.8, "{errs:?}");
    }

    #[test]
    fn codifferential_squares_to_zero() {
        let cx = annulus(24);
        let h = build_hodge(&cx).unwrap();
        let c = Cochain::new(2, (0..cx.len(2)).map(|t| ((t * 37 % 11) as f64 - 5.0) * 0.01).collect());
        let dd = h.codifferential(&cx, &h.codifferential(&cx, &c).unwrap()).unwrap();
        assert!(dd.max_abs() < 1e-12 * h.star[2].iter().fold(0.0f64, |a, b| a.max(*b)));
    }

    #[test]
    fn rejects_obtuse_meshes() {
        let coords = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.5, 0.05, 0.0], [0.5, -0.05, 0.0]];
        let cx = SimplicialComplex::from_oriented(MeshKind::Disk { n: 1 }, vec![vec![0, 1, 2], vec![1, 0, 3]], coords).unwrap();
        let err = build_hodge(&cx).unwrap_err();
        assert!(matches!(err, Error::DegenerateMesh(ref m) if m.contains("[0, 1]")), "{err}");
    }

    #[test]
    fn wilson_form_properties() {
        let cx = annulus(48);
        let one = solve_harmonic_form(&cx, 1).unwrap();
        assert_eq!(one.diagnostics.closure, 0.0);
        assert!((one.diagnostics.period_inner - TAU).abs() < 1e-8);
        assert!((one.diagnostics.period_outer - TAU).abs() < 1e-8);
        let three = solve_harmonic_form(&cx, 3).unwrap();
        for (a, b) in three.form.values.iter().zip(&one.form.values) {
            assert!((a - 3.0 * b).abs() < 1e-10);
        }
        assert!(solve_harmonic_form(&cx, 0).unwrap().form.is_zero());
        let sphere = build_complex(&MeshKind::Sphere { subdivision: 1 }).unwrap();
        assert!(solve_harmonic_form(&sphere, 1).is_err());
    }

    #[test]
    fn residuals_shrink_under_refinement() {
        let d: Vec<WilsonDiagnostics> = [24, 48, 96, 192].iter().map(|&n| solve_harmonic_form(&jittered(n, 0.1), 1).unwrap().diagnostics).collect();
        for w in d.windows(2) {
            assert!(w[1].coclosure < 0.7 * w[0].coclosure, "{d:#?}");
            assert!(w[1].tangentiality < 0.7 * w[0].tangentiality, "{d:#?}");
            assert!(w[1].radial < 0.7 * w[0].radial, "{d:#?}");
        }
        // the symmetric mesh is exactly rotation invariant
        let sym = solve_harmonic_form(&annulus(48), 1).unwrap().diagnostics;
        assert!(sym.tangentiality < 1e-9 && sym.radial < 1e-9, "{sym:#?}");
    }

    fn radial_form(cx: &SimplicialComplex, f: impl Fn(f64) -> f64) -> Cochain<f64> {
        let c = cx.coords();
        // the exact primitive F(r) = ∫ f dr evaluated along each edge
        let prim = |r: f64| adaptive_simpson(&f, 1.0, r, 1e-13);
        Cochain::new(
            1,
            cx.simplices(1)
                .iter()
                .map(|e| {
                    let r = |v: usize| c[v][0].hypot(c[v][1]);
                    prim(r(e[1])) - prim(r(e[0]))
                })
                .collect(),
        )
    }

    #[test]
    fn wilson_line_against_separable_quadrature() {
        let f = |r: f64| r * r - 0.5 * r;
        let exact = TAU * adaptive_simpson(f, 1.0, 2.0, 1e-12);
        let cx = annulus(48);
        let omega = solve_harmonic_form(&cx, 1).unwrap();
        let a = radial_form(&cx, f);
        assert!((wilson_line_value(&cx, &a, &omega).unwrap() - exact).abs() < 1e-9 * exact.abs());
        assert_eq!(wilson_line_value(&cx, &cx.full().zero(1), &omega).unwrap(), 0.0);
        let mut errs = Vec::new();
        for n in [24, 48, 96, 192] {
            let cx = jittered(n, 0.1);
            let omega = solve_harmonic_form(&cx, 1).unwrap();
            errs.push((wilson_line_value(&cx, &radial_form(&cx, f), &omega).unwrap() - exact).abs());
        }
        assert!(errs[3] < 1e-3 * exact.abs(), "{errs:?}");
    }

    #[test]
    fn self_wedge_vanishes_under_refinement() {
        let vals: Vec<f64> = [24, 48, 96, 192]
            .iter()
            .map(|&n| {
                let cx = jittered(n, 0.1);
                let omega = solve_harmonic_form(&cx, 1).unwrap();
                wilson_line_value(&cx, &omega.form.map(|v| 0.7 * v), &omega).unwrap().abs()
            })
            .collect();
        assert!(vals.windows(2).all(|w| w[1] < w[0]), "{vals:?}");
    }
}
