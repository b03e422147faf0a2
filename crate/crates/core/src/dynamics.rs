//! Equations of motion, the quantization constraint, the presymplectic potential and the
//! boundary charges of the dressed Maxwell theory with dual edge modes.
//!
//! All quantities live on a [`BoundarySlice`]: the annulus stands for the slice `Δ∩Σ`
//! and its outer circle for the corner `∂Δ∩Σ`. Circle integrals run counter-clockwise.
//! The annulus carries the orientation [`SLICE_ORIENTATION`] relative to the plane, so
//! that its induced boundary runs opposite to the corner circle.

use std::f64::consts::TAU;

use serde::Serialize;

use crate::cohomology::integrate_top;
use crate::complex::{cup_product, Cochain, GoodCover, MeshKind, SimplicialComplex};
use crate::db::DbCochain;
use crate::error::{Error, Result};
use crate::fields::{apply_morphism, dress_global, glue, winding_number, BoundarySlice, ExtendedField, FieldVariation, MinusOneGerbeConnection, U1Connection};
use crate::scalar::Rational;
use crate::wilson::{build_hodge, solve_harmonic_form, WilsonForm};

/// Orientation of the annulus slice relative to the counter-clockwise plane orientation.
pub const SLICE_ORIENTATION: f64 = -1.0;

/// Tolerance under which equations of motion count as satisfied.
pub const ON_SHELL_TOLERANCE: f64 = 1e-8;

/// Outcome of the integrality condition `k w = p n`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Quantization {
    pub k: i64,
    pub p: i64,
    pub n: i64,
    pub feasible: bool,
    /// `w = pn/k` when it is an integer.
    pub winding: Option<i64>,
    /// `pn/k` in lowest terms, as `"num/den"`.
    pub required_winding: String,
}

pub fn quantization_check(k: i64, p: i64, n: i64) -> Result<Quantization> {
    if k == 0 {
        return Err(Error::InvalidParameter("the level k must be nonzero".into()));
    }
    let pn = p * n;
    let r = Rational::new(pn, k);
    let feasible = pn % k == 0;
    Ok(Quantization {
        k,
        p,
        n,
        feasible,
        winding: feasible.then(|| pn / k),
        required_winding: if r.is_integer() { r.to_integer().to_string() } else { format!("{}/{}", r.numer(), r.denom()) },
    })
}

/// Solution of the corner equation of motion `k ã = p Ω`.
#[derive(Debug, Clone)]
pub struct DualEdgeMode {
    pub edge_mode: MinusOneGerbeConnection<f64>,
    pub connection: U1Connection<f64>,
    pub winding: i64,
}

/// Circle edge from vertex `v` to `v + 1` and its sign relative to the stored orientation.
fn loop_edge(cx: &SimplicialComplex, v: usize) -> (usize, f64) {
    let n = cx.len(0);
    let w = (v + 1) % n;
    let e = cx.find(&[v.min(w), v.max(w)]).expect("circle edge");
    (e, if v < w { 1.0 } else { -1.0 })
}

/// Chart functions on the circle whose differentials are the loop increments `step`.
///
/// Each chart is walked counter-clockwise from its first vertex. Values are a shared
/// potential plus `2πw` after passing vertex 0, so overlaps differ by exact multiples of 2π.
pub fn chart_functions(cx: &SimplicialComplex, cover: &GoodCover, step: &[f64], w: i64) -> Result<DbCochain<f64>> {
    let n = cx.len(0);
    let mut potential = vec![0.0; n];
    for v in 1..n {
        potential[v] = potential[v - 1] + step[v - 1];
    }
    let mut x = DbCochain::zero(cover, 0, 0)?;
    let forms = x.forms_mut(0).expect("function layer");
    for (i, f) in forms.iter_mut().enumerate() {
        let chart = cover.chart(i);
        let inside = |v: usize| chart.local(0, v).is_some();
        let start = (0..n)
            .find(|&v| inside(v) && !inside((v + n - 1) % n))
            .ok_or_else(|| Error::NoGoodCover(format!("chart {i} is not an arc")))?;
        let mut v = start;
        let mut wrapped = false;
        loop {
            f.values[chart.local(0, v).expect("chart vertex")] = if wrapped { potential[v] + TAU * w as f64 } else { potential[v] };
            let next = (v + 1) % n;
            if !inside(next) || next == start {
                break;
            }
            wrapped |= next == 0;
            v = next;
        }
    }
    let jumps = cover
        .nerve()
        .simplices(1)
        .iter()
        .map(|pair| {
            let (a, b) = (cover.chart(pair[0]), cover.chart(pair[1]));
            let v = a.simplices(0).iter().copied().find(|&v| b.local(0, v).is_some()).expect("overlap vertex");
            let diff = x.forms(0)[pair[1]].values[b.local(0, v).unwrap()] - x.forms(0)[pair[0]].values[a.local(0, v).unwrap()];
            (diff / TAU).round() as i64
        })
        .collect();
    *x.integers_mut() = jumps;
    Ok(x)
}

/// Solves `(k/2π) ã = (p/2π) Ω` on the corner circle for `Ã = 0` and an edge mode over a
/// (-1)-gerbe of winding `w = pn/k`.
///
/// The increments of `φ̃` are `(p/k)Ω` plus a uniform correction that makes the loop sum
/// exactly `2πw`; the correction is the rounding defect of the numerical period.
pub fn solve_dual_edge_mode(k: i64, p: i64, n: i64, omega: &WilsonForm, slice: &BoundarySlice) -> Result<DualEdgeMode> {
    let q = quantization_check(k, p, n)?;
    let w = q.winding.ok_or(Error::QuantizationObstruction { k, pn: p * n })?;
    if omega.n != n {
        return Err(Error::InvalidParameter(format!("Wilson form has level {}, expected {n}", omega.n)));
    }
    let cx = &slice.edge;
    let on_circle = slice.trace(&omega.form)?;
    let ratio = p as f64 / k as f64;
    let raw: Vec<f64> = (0..cx.len(0))
        .map(|v| {
            let (e, s) = loop_edge(cx, v);
            ratio * s * on_circle.values[e]
        })
        .collect();
    let defect = (TAU * w as f64 - raw.iter().sum::<f64>()) / raw.len() as f64;
    let step: Vec<f64> = raw.iter().map(|x| x + defect).collect();
    let x = chart_functions(cx, &slice.edge_cover, &step, w)?;
    let edge_mode = MinusOneGerbeConnection::new(&slice.edge_cover, x, 1e-9)?;
    let winding = winding_number(&slice.edge_cover, &edge_mode)?;
    let connection = U1Connection::global(&slice.bulk, &slice.bulk_cover, &slice.bulk.full().zero(1))?;
    Ok(DualEdgeMode { edge_mode, connection, winding })
}

/// Field content on the slice: potential and edge mode on the annulus, dual connection on
/// the annulus, dual edge mode on the corner, optional bulk data and the Wilson form.
#[derive(Debug, Clone)]
pub struct BoundaryState {
    pub slice: BoundarySlice,
    pub potential: Cochain<f64>,
    pub edge_mode: Cochain<f64>,
    pub dual_connection: U1Connection<f64>,
    pub dual_edge_mode: MinusOneGerbeConnection<f64>,
    /// Restriction `⋆F|_Δ` of the bulk field strength, a 2-cochain on the annulus.
    pub bulk_star_f: Option<Cochain<f64>>,
    pub omega: WilsonForm,
    pub k: i64,
    pub p: i64,
    pub e2: f64,
}

impl BoundaryState {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        slice: BoundarySlice,
        potential: Cochain<f64>,
        edge_mode: Cochain<f64>,
        dual_connection: U1Connection<f64>,
        dual_edge_mode: MinusOneGerbeConnection<f64>,
        bulk_star_f: Option<Cochain<f64>>,
        omega: WilsonForm,
        k: i64,
        p: i64,
        e2: f64,
    ) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidParameter("the level k must be nonzero".into()));
        }
        if !(e2 > 0.0) {
            return Err(Error::InvalidParameter(format!("e² must be positive, got {e2}")));
        }
        let bulk = &slice.bulk;
        let shape = |c: &Cochain<f64>, d: usize, what: &str| {
            if c.degree != d || c.len() != bulk.len(d) {
                Err(Error::Shape(format!("{what} must be a {d}-cochain on the annulus")))
            } else {
                Ok(())
            }
        };
        shape(&potential, 1, "A")?;
        shape(&edge_mode, 0, "φ")?;
        shape(&omega.form, 1, "Ω")?;
        if let Some(f) = &bulk_star_f {
            shape(f, 2, "⋆F")?;
        }
        dual_connection.cochain().validate(&slice.bulk_cover)?;
        dual_edge_mode.cochain().validate(&slice.edge_cover)?;
        Ok(BoundaryState { slice, potential, edge_mode, dual_connection, dual_edge_mode, bulk_star_f, omega, k, p, e2 })
    }

    /// The on-shell vacuum: `A = 0`, `φ = 0`, the dual edge mode solving the corner
    /// equation and matching bulk data `⋆F = 0`.
    pub fn vacuum(slice: BoundarySlice, k: i64, p: i64, n: i64) -> Result<Self> {
        let omega = solve_harmonic_form(&slice.bulk, n)?;
        let dual = solve_dual_edge_mode(k, p, n, &omega, &slice)?;
        let potential = slice.bulk.full().zero(1);
        let edge_mode = slice.bulk.full().zero(0);
        let bulk = Some(slice.bulk.full().zero(2));
        Self::new(slice, potential, edge_mode, dual.connection, dual.edge_mode, bulk, omega, k, p, 1.0)
    }

    pub fn n(&self) -> i64 {
        self.omega.n
    }

    fn level(&self) -> f64 {
        self.k as f64 / TAU
    }

    /// `Ã` as one global 1-form; transition data may only carry rounding noise.
    pub fn dual_potential(&self) -> Result<Cochain<f64>> {
        let c = self.dual_connection.cochain();
        if c.integers().iter().any(|&n| n != 0) || c.forms(1).iter().any(|f| f.max_abs() > 1e-9) {
            return Err(Error::NotGlobal("the dual connection has transition data".into()));
        }
        glue(&self.slice.bulk, &self.slice.bulk_cover, c.forms(0), 1e-9)
    }

    /// `a = dφ - A` on the annulus.
    pub fn dressed(&self) -> Result<Cochain<f64>> {
        dress_global(&self.slice.bulk, &self.potential, &self.edge_mode)
    }

    /// `ã = dφ̃ - Ã` on the corner circle.
    pub fn dual_dressed(&self) -> Result<Cochain<f64>> {
        let dphi = self.dual_edge_mode.differential(&self.slice.edge, &self.slice.edge_cover, 1e-9)?;
        dphi.sub(&self.slice.trace(&self.dual_potential()?)?)
    }

    /// Sets the bulk data to the value demanded by the duality equation.
    pub fn with_matching_bulk(mut self) -> Result<Self> {
        let f = self.slice.bulk.full().coboundary(&self.dual_potential()?)?;
        self.bulk_star_f = Some(f.scale(&(self.e2 * self.level())));
        Ok(self)
    }

    /// `(A, φ) → (A + dε, φ + ε)`.
    pub fn gauge_transform(&self, eps: &Cochain<f64>) -> Result<Self> {
        let src = ExtendedField::trivial(&self.slice, self.potential.clone(), self.edge_mode.clone())?;
        let lifted = crate::fields::gauge_parameter(&self.slice, eps, &vec![0; self.slice.bulk_cover.n_charts()])?;
        let ExtendedField::Trivial { potential, edge_mode } = apply_morphism(&self.slice, &src, &lifted)? else { unreachable!() };
        Ok(BoundaryState { potential, edge_mode, ..self.clone() })
    }

    /// `(Ã, φ̃) → (Ã + Dε̃, φ̃ + ε̃|)` for a DB 0-cocycle `ε̃` on the annulus cover.
    pub fn dual_gauge_transform(&self, eps: &DbCochain<f64>) -> Result<Self> {
        let src = ExtendedField::gerbe(&self.slice, self.dual_connection.clone(), self.dual_edge_mode.clone())?;
        let ExtendedField::Gerbe { connection, edge_mode } = apply_morphism(&self.slice, &src, eps)? else { unreachable!() };
        let edge_mode = MinusOneGerbeConnection::new(&self.slice.edge_cover, edge_mode.cochain().clone(), 1e-9)?;
        Ok(BoundaryState { dual_connection: connection, dual_edge_mode: edge_mode, ..self.clone() })
    }
}

/// Residual norms of the equations of motion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EomReport {
    /// `‖⋆F - e²(k/2π)dÃ‖` on the annulus; `None` without bulk data.
    pub duality: Option<f64>,
    /// `‖(k/2π)ã - (p/2π)Ω‖` on the corner circle.
    pub corner: f64,
    /// `‖dA‖` on the annulus.
    pub flatness: f64,
    /// Bulk Maxwell equation; never evaluated, the bulk is only seen through `⋆F|_Δ`.
    pub maxwell: Option<f64>,
    pub feasible: bool,
    pub winding: i64,
}

impl EomReport {
    pub fn max_residual(&self) -> f64 {
        self.duality.unwrap_or(0.0).max(self.corner).max(self.flatness)
    }

    pub fn on_shell(&self, tol: f64) -> bool {
        self.max_residual() <= tol
    }
}

pub fn eom_residuals(state: &BoundaryState) -> Result<EomReport> {
    let s = &state.slice;
    let bulk_hodge = build_hodge(&s.bulk)?;
    let edge_hodge = build_hodge(&s.edge)?;
    let dual = state.dual_potential()?;
    let duality = match &state.bulk_star_f {
        Some(f) => {
            let rhs = s.bulk.full().coboundary(&dual)?.scale(&(state.e2 * state.level()));
            Some(bulk_hodge.norm(&f.sub(&rhs)?)?)
        }
        None => None,
    };
    let corner = state
        .dual_dressed()?
        .scale(&state.level())
        .sub(&s.trace(&state.omega.form)?.scale(&(state.p as f64 / TAU)))?;
    let flatness = bulk_hodge.norm(&s.bulk.full().coboundary(&state.potential)?)?;
    Ok(EomReport {
        duality,
        corner: edge_hodge.norm(&corner)?,
        flatness,
        maxwell: None,
        feasible: quantization_check(state.k, state.p, state.n())?.feasible,
        winding: winding_number(&s.edge_cover, &state.dual_edge_mode)?,
    })
}

/// `∫_{Δ∩Σ}` of a 2-cochain with the slice orientation.
fn slice_integral(cx: &SimplicialComplex, c: &Cochain<f64>) -> Result<f64> {
    Ok(SLICE_ORIENTATION * integrate_top(cx, c)?)
}

/// `∮_{∂Δ∩Σ}` of a 1-cochain, counter-clockwise.
fn corner_integral(cx: &SimplicialComplex, c: &Cochain<f64>) -> Result<f64> {
    integrate_top(cx, c)
}

/// The terms of the presymplectic potential evaluated on one variation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PresymplecticPotential {
    /// The on-shell expression when the state is on shell, the full one otherwise.
    pub value: f64,
    pub on_shell: bool,
    /// `(k/2π)∫ δφ ∧ dÃ`.
    pub edge_mode_term: f64,
    /// `-(k/2π)∫ a ∧ δÃ`.
    pub dual_potential_term: f64,
    /// `(k/2π)∮ a ∧ δφ̃`.
    pub dual_edge_mode_term: f64,
    /// `-(k/2π)∮ δφ ∧ ã + (p/2π)∮ δφ ∧ Ω`, which vanishes on shell.
    pub corner_term: f64,
}

pub fn presymplectic_potential(state: &BoundaryState, var: &FieldVariation<f64>) -> Result<PresymplecticPotential> {
    let s = &state.slice;
    // re-validates strata of a hand-built variation
    let var = FieldVariation::new(s, var.potential.clone(), var.edge_mode.clone(), var.dual_potential.clone(), var.dual_edge_mode.clone())?;
    let level = state.level();
    let a = state.dressed()?;
    let mut edge_mode_term = 0.0;
    let mut corner_term = 0.0;
    if let Some(dphi) = &var.edge_mode {
        let curv = s.bulk.full().coboundary(&state.dual_potential()?)?;
        edge_mode_term = level * slice_integral(&s.bulk, &cup_product(&s.bulk, dphi, &curv)?)?;
        let on_corner = s.trace(dphi)?;
        corner_term = -level * corner_integral(&s.edge, &cup_product(&s.edge, &on_corner, &state.dual_dressed()?)?)?
            + state.p as f64 / TAU * corner_integral(&s.edge, &cup_product(&s.edge, &on_corner, &s.trace(&state.omega.form)?)?)?;
    }
    let dual_potential_term = match &var.dual_potential {
        Some(da) => -level * slice_integral(&s.bulk, &cup_product(&s.bulk, &a, da)?)?,
        None => 0.0,
    };
    let dual_edge_mode_term = match &var.dual_edge_mode {
        Some(dp) => level * corner_integral(&s.edge, &cup_product(&s.edge, &s.trace(&a)?, dp)?)?,
        None => 0.0,
    };
    let on_shell = eom_residuals(state)?.on_shell(ON_SHELL_TOLERANCE);
    let mut value = edge_mode_term + dual_potential_term + dual_edge_mode_term;
    if !on_shell {
        value += corner_term;
    }
    Ok(PresymplecticPotential { value, on_shell, edge_mode_term, dual_potential_term, dual_edge_mode_term, corner_term })
}

/// Boundary reduction of the bulk term `(1/e²)∫_Σ dη ∧ ⋆F` for a gauge direction `η`,
/// valid when the Maxwell equation holds: `-(1/e²)∫_{Δ∩Σ} η ⋆F`.
pub fn bulk_boundary_term(state: &BoundaryState, eta: &Cochain<f64>) -> Result<f64> {
    let f = state
        .bulk_star_f
        .as_ref()
        .ok_or_else(|| Error::InvalidParameter("the bulk term needs supplied bulk data".into()))?;
    Ok(-slice_integral(&state.slice.bulk, &cup_product(&state.slice.bulk, eta, f)?)? / state.e2)
}

/// `Q^E = (k/2π)∫_{Δ∩Σ} α ∧ dÃ`.
pub fn electric_charge(slice: &BoundarySlice, alpha: &Cochain<f64>, dual: &U1Connection<f64>, k: i64) -> Result<f64> {
    if alpha.degree != 0 {
        return Err(Error::DegreeMismatch { expected: 0, found: alpha.degree as i64 });
    }
    let curv = dual.curvature(&slice.bulk, &slice.bulk_cover)?;
    Ok(k as f64 / TAU * slice_integral(&slice.bulk, &cup_product(&slice.bulk, alpha, &curv)?)?)
}

/// Partition of unity on the corner circle: `ρ_i(v) = 1/#{charts containing v}` on chart `i`.
pub fn partition_of_unity(cx: &SimplicialComplex, cover: &GoodCover) -> Vec<Cochain<f64>> {
    let mut count = vec![0usize; cx.len(0)];
    for i in 0..cover.n_charts() {
        for &v in cover.chart(i).simplices(0) {
            count[v] += 1;
        }
    }
    (0..cover.n_charts())
        .map(|i| {
            let mut rho = cx.full().zero(0);
            for &v in cover.chart(i).simplices(0) {
                rho.values[v] = 1.0 / count[v] as f64;
            }
            rho
        })
        .collect()
}

/// `ρ_i α̃_i` extended by zero to the whole circle.
pub fn weighted_chart_function(slice: &BoundarySlice, i: usize, f: &Cochain<f64>) -> Result<Cochain<f64>> {
    let rho = &partition_of_unity(&slice.edge, &slice.edge_cover)[i];
    let full = slice.edge.full().extend(f, slice.edge_cover.chart(i))?;
    Ok(Cochain::new(0, full.values.iter().zip(&rho.values).map(|(x, r)| x * r).collect()))
}

/// Per-chart magnetic charges `Q^M_i = (k/2π)∮ a ∧ ρ_i α̃_i`.
pub fn magnetic_charges(slice: &BoundarySlice, a: &Cochain<f64>, alpha: &[Cochain<f64>], k: i64) -> Result<Vec<f64>> {
    if a.degree != 1 || a.len() != slice.edge.len(1) {
        return Err(Error::WrongStratum("the dressed field must be a 1-cochain on the corner circle".into()));
    }
    if alpha.len() != slice.edge_cover.n_charts() {
        return Err(Error::Shape(format!("expected {} chart functions, found {}", slice.edge_cover.n_charts(), alpha.len())));
    }
    alpha
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let g = weighted_chart_function(slice, i, f)?;
            Ok(k as f64 / TAU * corner_integral(&slice.edge, &cup_product(&slice.edge, a, &g)?)?)
        })
        .collect()
}

/// `{Q^E, Q^M} = -(k/2π)∮ α ∧ dα̃` with `dα̃_i` glued into one global 1-form.
pub fn charge_bracket(cx: &SimplicialComplex, cover: &GoodCover, alpha: &Cochain<f64>, dual: &[Cochain<f64>], k: i64) -> Result<f64> {
    if !matches!(cx.kind(), MeshKind::Circle { .. }) {
        return Err(Error::WrongStratum("the bracket is a corner-circle integral".into()));
    }
    if alpha.degree != 0 || alpha.len() != cx.len(0) {
        return Err(Error::DegreeMismatch { expected: 0, found: alpha.degree as i64 });
    }
    if dual.len() != cover.n_charts() {
        return Err(Error::Shape(format!("expected {} chart functions, found {}", cover.n_charts(), dual.len())));
    }
    let family = dual.iter().enumerate().map(|(i, f)| cover.chart(i).coboundary(f)).collect::<Result<Vec<_>>>()?;
    let d = glue(cx, cover, &family, 1e-9).map_err(|_| Error::NotGlobal("chart functions jump by non-constant amounts".into()))?;
    Ok(-(k as f64) / TAU * corner_integral(cx, &cup_product(cx, alpha, &d)?)?)
}

/// Edge-mode charge of the scalar/2-form duality on a sphere, `∫ α ∧ dψ`.
pub fn scalar_two_form_charge(cx: &SimplicialComplex, alpha: &Cochain<f64>, psi: &Cochain<f64>) -> Result<f64> {
    if !matches!(cx.kind(), MeshKind::Sphere { .. }) {
        return Err(Error::WrongStratum("the scalar/2-form charge lives on a sphere".into()));
    }
    if alpha.degree != 1 {
        return Err(Error::DegreeMismatch { expected: 1, found: alpha.degree as i64 });
    }
    if psi.degree != 0 {
        return Err(Error::DegreeMismatch { expected: 0, found: psi.degree as i64 });
    }
    integrate_top(cx, &cup_product(cx, alpha, &cx.full().coboundary(psi)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_complex, build_cover};
    use crate::fields::gauge_parameter;
    use crate::quadrature::adaptive_simpson;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn slice() -> BoundarySlice {
        BoundarySlice::annulus(4, 32, 1.0, 2.0, 4).unwrap()
    }

    fn random(n: usize, degree: usize, rng: &mut ChaCha8Rng) -> Cochain<f64> {
        Cochain::new(degree, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect())
    }

    fn circle(n: usize) -> (SimplicialComplex, GoodCover) {
        let cx = build_complex(&MeshKind::Circle { n }).unwrap();
        let cover = build_cover(&cx, 4).unwrap();
        (cx, cover)
    }

    fn sample(cx: &SimplicialComplex, f: impl Fn(f64) -> f64) -> Cochain<f64> {
        Cochain::new(0, cx.coords().iter().map(|p| f(p[1].atan2(p[0]))).collect())
    }

    fn charts_of(cx: &SimplicialComplex, cover: &GoodCover, g: &Cochain<f64>) -> Vec<Cochain<f64>> {
        (0..cover.n_charts()).map(|i| cx.full().restrict(g, cover.chart(i)).unwrap()).collect()
    }

    /// Chart-wise angle functions of winding `w` on the circle.
    fn winding_charts(cx: &SimplicialComplex, cover: &GoodCover, w: i64) -> Vec<Cochain<f64>> {
        let n = cx.len(0);
        let step = vec![TAU * w as f64 / n as f64; n];
        chart_functions(cx, cover, &step, w).unwrap().forms(0).to_vec()
    }

    #[test]
    fn quantization_examples() {
        let q = quantization_check(2, 3, 4).unwrap();
        assert!(q.feasible);
        assert_eq!(q.winding, Some(6));
        let q = quantization_check(2, 1, 1).unwrap();
        assert!(!q.feasible);
        assert_eq!(q.required_winding, "1/2");
        assert_eq!(quantization_check(1, 0, 0).unwrap().winding, Some(0));
        assert_eq!(quantization_check(-3, 2, 3).unwrap().winding, Some(-2));
        assert!(quantization_check(0, 1, 1).is_err());
    }

    #[test]
    fn dual_edge_mode_solutions() {
        let s = slice();
        for (k, p, n, w) in [(1, 1, 1, 1), (3, 2, 3, 2), (1, 0, 0, 0), (-2, 3, 2, -3)] {
            let state = BoundaryState::vacuum(s.clone(), k, p, n).unwrap();
            let report = eom_residuals(&state).unwrap();
            assert_eq!(report.winding, w);
            assert!(report.corner < 1e-8, "{report:?}");
            assert!(state.dual_potential().unwrap().is_zero());
            assert_eq!(state.dual_edge_mode.cochain().integers().iter().any(|&m| m != 0), w != 0);
        }
        let trivial = BoundaryState::vacuum(s.clone(), 1, 0, 0).unwrap();
        assert!(trivial.dual_edge_mode.locals().iter().all(|f| f.is_zero()));
        let omega = solve_harmonic_form(&s.bulk, 1).unwrap();
        let err = solve_dual_edge_mode(2, 1, 1, &omega, &s).unwrap_err();
        assert!(matches!(err, Error::QuantizationObstruction { k: 2, pn: 1 }));
    }

    #[test]
    fn residuals_of_vacuum_and_perturbations() {
        let s = slice();
        let zero = BoundaryState::vacuum(s.clone(), 1, 1, 0).unwrap();
        let r = eom_residuals(&zero).unwrap();
        assert_eq!((r.duality, r.corner, r.flatness), (Some(0.0), 0.0, 0.0));

        let state = BoundaryState::vacuum(s.clone(), 2, 1, 2).unwrap();
        assert!(eom_residuals(&state).unwrap().on_shell(1e-8));
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let delta = random(s.bulk.len(1), 1, &mut rng);
        let hodge = build_hodge(&s.bulk).unwrap();
        let delta = delta.scale(&(1.0 / hodge.norm(&delta).unwrap()));
        let moved = U1Connection::global(&s.bulk, &s.bulk_cover, &delta).unwrap();
        let perturbed = BoundaryState { dual_connection: moved, ..state.clone() };
        let expected = state.e2 * 2.0 / TAU * hodge.norm(&s.bulk.full().coboundary(&delta).unwrap()).unwrap();
        let got = eom_residuals(&perturbed).unwrap().duality.unwrap();
        assert!((got - expected).abs() < 0.1 * expected, "{got} vs {expected}");

        let no_bulk = BoundaryState { bulk_star_f: None, ..state };
        assert_eq!(eom_residuals(&no_bulk).unwrap().duality, None);
    }

    /// An on-shell state with nontrivial `dÃ`: `Ã` is supported away from the corner.
    fn excited(s: &BoundarySlice, rng: &mut ChaCha8Rng) -> BoundaryState {
        let vacuum = BoundaryState::vacuum(s.clone(), 1, 1, 1).unwrap();
        let mut interior = random(s.bulk.len(1), 1, rng);
        let outer: Vec<usize> = s.vertex_trace().to_vec();
        for (e, v) in s.bulk.simplices(1).iter().enumerate() {
            if outer.contains(&v[0]) && outer.contains(&v[1]) {
                interior.values[e] = 0.0;
            }
        }
        let chi = random(s.bulk.len(0), 0, rng);
        let potential = s.bulk.full().coboundary(&chi).unwrap();
        let edge_mode = random(s.bulk.len(0), 0, rng);
        BoundaryState {
            potential,
            edge_mode,
            dual_connection: U1Connection::global(&s.bulk, &s.bulk_cover, &interior).unwrap(),
            ..vacuum
        }
        .with_matching_bulk()
        .unwrap()
    }

    #[test]
    fn potential_reproduces_the_charges() {
        let s = slice();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let state = excited(&s, &mut rng);
        assert!(eom_residuals(&state).unwrap().on_shell(1e-8));
        let zero = presymplectic_potential(&state, &FieldVariation::default()).unwrap();
        assert_eq!(zero.value, 0.0);
        assert!(zero.on_shell);

        let alpha = random(s.bulk.len(0), 0, &mut rng);
        let var = FieldVariation { edge_mode: Some(alpha.clone()), ..Default::default() };
        let theta = presymplectic_potential(&state, &var).unwrap().value;
        let qe = electric_charge(&s, &alpha, &state.dual_connection, state.k).unwrap();
        assert!(qe.abs() > 1e-3);
        assert!((theta - qe).abs() < 1e-12 * qe.abs().max(1.0));

        let dual = random(s.edge.len(0), 0, &mut rng);
        let charts = charts_of(&s.edge, &s.edge_cover, &dual);
        let qm = magnetic_charges(&s, &s.trace(&state.dressed().unwrap()).unwrap(), &charts, state.k).unwrap();
        for (i, f) in charts.iter().enumerate() {
            let var = FieldVariation { dual_edge_mode: Some(weighted_chart_function(&s, i, f).unwrap()), ..Default::default() };
            let theta = presymplectic_potential(&state, &var).unwrap().value;
            assert!((theta - qm[i]).abs() < 1e-12, "{theta} vs {}", qm[i]);
        }
        let total = FieldVariation { dual_edge_mode: Some(dual), ..Default::default() };
        let sum: f64 = qm.iter().sum();
        assert!((presymplectic_potential(&state, &total).unwrap().value - sum).abs() < 1e-12);
        let wrong = FieldVariation { dual_edge_mode: Some(alpha), ..Default::default() };
        assert!(matches!(presymplectic_potential(&state, &wrong), Err(Error::WrongStratum(_))));
    }

    #[test]
    fn potential_is_linear() {
        let s = slice();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let state = excited(&s, &mut rng);
        let mut var = || FieldVariation {
            potential: None,
            edge_mode: Some(random(s.bulk.len(0), 0, &mut rng)),
            dual_potential: Some(random(s.bulk.len(1), 1, &mut rng)),
            dual_edge_mode: Some(random(s.edge.len(0), 0, &mut rng)),
        };
        let (u, v) = (var(), var());
        let both = |f: fn(&Cochain<f64>, &Cochain<f64>) -> Cochain<f64>, a: &Option<Cochain<f64>>, b: &Option<Cochain<f64>>| Some(f(a.as_ref().unwrap(), b.as_ref().unwrap()));
        let add = |a: &Cochain<f64>, b: &Cochain<f64>| a.add(b).unwrap();
        let sum = FieldVariation {
            potential: None,
            edge_mode: both(add, &u.edge_mode, &v.edge_mode),
            dual_potential: both(add, &u.dual_potential, &v.dual_potential),
            dual_edge_mode: both(add, &u.dual_edge_mode, &v.dual_edge_mode),
        };
        let t = |x: &FieldVariation<f64>| presymplectic_potential(&state, x).unwrap().value;
        assert!((t(&sum) - t(&u) - t(&v)).abs() < 1e-12);
    }

    #[test]
    fn off_shell_states_use_the_full_potential() {
        let s = slice();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let state = excited(&s, &mut rng);
        let off = BoundaryState { p: 2, ..state };
        let var = FieldVariation { edge_mode: Some(random(s.bulk.len(0), 0, &mut rng)), ..Default::default() };
        let theta = presymplectic_potential(&off, &var).unwrap();
        assert!(!theta.on_shell);
        assert!(theta.corner_term.abs() > 1e-6);
        assert!((theta.value - theta.edge_mode_term - theta.corner_term).abs() < 1e-12);
    }

    #[test]
    fn electric_charge_examples() {
        let s = slice();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let flat = U1Connection::global(&s.bulk, &s.bulk_cover, &s.bulk.full().coboundary(&random(s.bulk.len(0), 0, &mut rng)).unwrap()).unwrap();
        let alpha = random(s.bulk.len(0), 0, &mut rng);
        assert!(electric_charge(&s, &alpha, &flat, 3).unwrap().abs() < 1e-12);

        // Ã = (r²/2) dθ has dÃ = r dr∧dθ, flux 3π over 1 ≤ r ≤ 2
        let theta: Vec<f64> = s.bulk.coords().iter().map(|p| p[1].atan2(p[0])).collect();
        let r2: Vec<f64> = s.bulk.coords().iter().map(|p| p[0] * p[0] + p[1] * p[1]).collect();
        let form = Cochain::new(
            1,
            s.bulk.simplices(1).iter().map(|e| 0.25 * (r2[e[0]] + r2[e[1]]) * (theta[e[1]] - theta[e[0]] + PI).rem_euclid(TAU) - 0.25 * (r2[e[0]] + r2[e[1]]) * PI).collect(),
        );
        let dual = U1Connection::global(&s.bulk, &s.bulk_cover, &form).unwrap();
        let flux = slice_integral(&s.bulk, &dual.curvature(&s.bulk, &s.bulk_cover).unwrap()).unwrap();
        let c = s.bulk.full().constant(0.75);
        let q = electric_charge(&s, &c, &dual, 2).unwrap();
        assert!((q - 2.0 / TAU * 0.75 * flux).abs() < 1e-12);
        assert!((flux.abs() - 3.0 * PI).abs() < 0.05 * 3.0 * PI, "{flux}");

        let beta = random(s.bulk.len(0), 0, &mut rng);
        let lhs = electric_charge(&s, &alpha.add(&beta).unwrap(), &dual, 2).unwrap();
        let rhs = electric_charge(&s, &alpha, &dual, 2).unwrap() + electric_charge(&s, &beta, &dual, 2).unwrap();
        assert!((lhs - rhs).abs() < 1e-12);
        assert!(electric_charge(&s, &form, &dual, 2).is_err());
    }

    #[test]
    fn magnetic_charge_examples() {
        let s = slice();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let charts = charts_of(&s.edge, &s.edge_cover, &random(s.edge.len(0), 0, &mut rng));
        let zero = magnetic_charges(&s, &s.edge.full().zero(1), &charts, 1).unwrap();
        assert!(zero.iter().all(|&q| q == 0.0));

        let angle = winding_charts(&s.edge, &s.edge_cover, 2);
        let a = MinusOneGerbeConnection::new(&s.edge_cover, {
            let mut x = DbCochain::zero(&s.edge_cover, 0, 0).unwrap();
            *x.forms_mut(0).unwrap() = angle;
            *x.integers_mut() = chart_functions(&s.edge, &s.edge_cover, &vec![TAU * 2.0 / 32.0; 32], 2).unwrap().integers().to_vec();
            x
        }, 1e-9)
        .unwrap()
        .differential(&s.edge, &s.edge_cover, 1e-9)
        .unwrap();
        let c = charts_of(&s.edge, &s.edge_cover, &s.edge.full().constant(0.3));
        let total: f64 = magnetic_charges(&s, &a, &c, 3).unwrap().iter().sum();
        assert!((total - 3.0 * 0.3 * 2.0).abs() < 1e-12, "{total}");

        let q = magnetic_charges(&s, &a, &charts, 3).unwrap();
        let doubled: Vec<Cochain<f64>> = charts.iter().map(|f| f.scale(&2.0)).collect();
        let q2 = magnetic_charges(&s, &a, &doubled, 3).unwrap();
        assert!(q.iter().zip(&q2).all(|(x, y)| 2.0 * x == *y));
    }

    #[test]
    fn bracket_of_cosine_and_sine() {
        let mut errs = Vec::new();
        let mut hs = Vec::new();
        for n in [64, 128, 256] {
            let (cx, cover) = circle(n);
            let alpha = sample(&cx, f64::cos);
            let dual = charts_of(&cx, &cover, &sample(&cx, f64::sin));
            let b = charge_bracket(&cx, &cover, &alpha, &dual, 1).unwrap();
            let exact = -adaptive_simpson(|t| t.cos().powi(2), 0.0, TAU, 1e-12) / TAU;
            errs.push((b - exact).abs());
            hs.push(TAU / n as f64);
            if n == 256 {
                assert!((b + 0.5).abs() < 0.005, "{b}");
            }
        }
        let order = (errs[0] / errs[2]).ln() / (hs[0] / hs[2]).ln();
        assert!((order - 2.0).abs() < 0.2, "{errs:?}");
    }

    #[test]
    fn bracket_properties() {
        let (cx, cover) = circle(96);
        let c = cx.full().constant(0.6);
        let global = charts_of(&cx, &cover, &sample(&cx, |t| (2.0 * t).sin() + 0.3 * t.cos()));
        assert!(charge_bracket(&cx, &cover, &c, &global, 2).unwrap().abs() < 1e-12);

        for w in [-2, 1, 3] {
            let b = charge_bracket(&cx, &cover, &c, &winding_charts(&cx, &cover, w), 2).unwrap();
            assert!((b + 2.0 * 0.6 * w as f64).abs() < 1e-9, "{b}");
        }

        let alpha = sample(&cx, |t| t.sin() + 0.2 * (3.0 * t).cos());
        let dual = winding_charts(&cx, &cover, 1);
        let base = charge_bracket(&cx, &cover, &alpha, &dual, 1).unwrap();
        let shifted: Vec<Cochain<f64>> = dual.iter().enumerate().map(|(i, f)| f.map(|v| v + 0.37 * i as f64 - 1.1)).collect();
        assert!((charge_bracket(&cx, &cover, &alpha, &shifted, 1).unwrap() - base).abs() < 1e-12);

        let mut broken = dual.clone();
        broken[1].values[0] += 0.5;
        assert!(matches!(charge_bracket(&cx, &cover, &alpha, &broken, 1), Err(Error::NotGlobal(_))));

        let f = sample(&cx, |t| t.cos() + 0.5 * (2.0 * t).sin());
        let g = sample(&cx, |t| t.sin() - 0.25 * t.cos());
        let fg = charge_bracket(&cx, &cover, &f, &charts_of(&cx, &cover, &g), 1).unwrap();
        let gf = charge_bracket(&cx, &cover, &g, &charts_of(&cx, &cover, &f), 1).unwrap();
        assert!((fg + gf).abs() < 0.05 * fg.abs(), "{fg} {gf}");
    }

    /// `∫ (1 - cos ϑ) dφ` along each edge, projected radially onto the sphere.
    fn monopole(cx: &SimplicialComplex) -> Cochain<f64> {
        let c = cx.coords();
        Cochain::new(
            1,
            cx.simplices(1)
                .iter()
                .map(|e| {
                    let (p, q) = (c[e[0]], c[e[1]]);
                    let at = |t: f64| {
                        let x = [p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]), p[2] + t * (q[2] - p[2])];
                        let r = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                        let rho2 = x[0] * x[0] + x[1] * x[1];
                        // dφ/dt = (x ẏ - y ẋ) / ρ²
                        let dphi = (x[0] * (q[1] - p[1]) - x[1] * (q[0] - p[0])) / rho2;
                        (1.0 - x[2] / r) * dphi
                    };
                    adaptive_simpson(at, 0.0, 1.0, 1e-12)
                })
                .collect(),
        )
    }

    #[test]
    fn sphere_charge_examples() {
        let exact = -TAU * adaptive_simpson(|t: f64| (1.0 - t.cos()) * 1.0, 0.0, PI, 1e-12);
        let mut errs = Vec::new();
        for sub in [3, 4, 5, 6] {
            let cx = build_complex(&MeshKind::Sphere { subdivision: sub }).unwrap();
            let alpha = monopole(&cx);
            assert_eq!(scalar_two_form_charge(&cx, &alpha, &cx.full().constant(1.3)).unwrap(), 0.0);
            let psi = Cochain::new(0, cx.coords().iter().map(|p| p[2].clamp(-1.0, 1.0).acos()).collect());
            let q = scalar_two_form_charge(&cx, &alpha, &psi).unwrap();
            errs.push((q - exact).abs() / exact.abs());
            let g = Cochain::new(0, cx.coords().iter().map(|p| p[0] * p[1] + p[2]).collect());
            let closed = cx.full().coboundary(&g).unwrap();
            assert!(scalar_two_form_charge(&cx, &closed, &psi).unwrap().abs() < 1e-10);
        }
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
        assert!(errs[3] < 0.01, "{errs:?}");
        let circle = build_complex(&MeshKind::Circle { n: 8 }).unwrap();
        assert!(scalar_two_form_charge(&circle, &circle.full().zero(1), &circle.full().zero(0)).is_err());
    }

    #[test]
    fn potential_is_gauge_invariant_on_shell() {
        let s = slice();
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let state = excited(&s, &mut rng);
        let var = FieldVariation {
            potential: None,
            edge_mode: Some(random(s.bulk.len(0), 0, &mut rng)),
            dual_potential: Some(random(s.bulk.len(1), 1, &mut rng)),
            dual_edge_mode: Some(random(s.edge.len(0), 0, &mut rng)),
        };
        let theta = presymplectic_potential(&state, &var).unwrap().value;
        for _ in 0..5 {
            let eps = random(s.bulk.len(0), 0, &mut rng);
            let moved = state.gauge_transform(&eps).unwrap();
            assert!((presymplectic_potential(&moved, &var).unwrap().value - theta).abs() < 1e-10);
            let nu: Vec<i64> = (0..s.bulk_cover.n_charts()).map(|_| rng.gen_range(-3..=3)).collect();
            let dual = gauge_parameter(&s, &random(s.bulk.len(0), 0, &mut rng), &nu).unwrap();
            let moved = state.dual_gauge_transform(&dual).unwrap();
            assert!(eom_residuals(&moved).unwrap().on_shell(1e-8));
            assert!((presymplectic_potential(&moved, &var).unwrap().value - theta).abs() < 1e-10);
        }
    }

    #[test]
    fn pure_gauge_directions_carry_no_potential() {
        let s = slice();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let state = excited(&s, &mut rng);
        let eta = random(s.bulk.len(0), 0, &mut rng);
        let var = FieldVariation { potential: Some(s.bulk.full().coboundary(&eta).unwrap()), edge_mode: Some(eta.clone()), ..Default::default() };
        let theta = presymplectic_potential(&state, &var).unwrap();
        let full = theta.edge_mode_term + theta.corner_term + bulk_boundary_term(&state, &eta).unwrap();
        assert!(theta.edge_mode_term.abs() > 1e-3);
        assert!(full.abs() < 1e-10, "{full}");

        // dual directions are constant on the inner ring, where the slice closes up into a disk
        let mut eta = random(s.bulk.len(0), 0, &mut rng);
        let MeshKind::Annulus { n_theta, .. } = *s.bulk.kind() else { unreachable!() };
        for v in 0..n_theta {
            eta.values[v] = 0.4;
        }
        let var = FieldVariation {
            dual_potential: Some(s.bulk.full().coboundary(&eta).unwrap()),
            dual_edge_mode: Some(s.trace(&eta).unwrap()),
            ..Default::default()
        };
        let theta = presymplectic_potential(&state, &var).unwrap();
        assert!(theta.dual_potential_term.abs() > 1e-3);
        assert!(theta.value.abs() < 1e-10, "{theta:?}");
    }
}
