//! Deciding whether a U(1) connection cocycle is gauge trivial, and building
//! connections with prescribed characteristic class.

use std::collections::VecDeque;

use serde::Serialize;

use super::{CechCohomology, CohomologyClass, IntegerMatrix};
use crate::complex::{Cochain, GoodCover, Region, SimplicialComplex};
use crate::db::{db_differential, is_cocycle, DbCochain};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Why a connection cocycle is not of the form `D q`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Obstruction {
    /// The integer layer has a nonzero Čech class.
    CharacteristicClass(CohomologyClass),
    /// The glued curvature is not zero.
    Curvature { residual: f64 },
    /// Flat, but a holonomy around a nerve loop is not a multiple of 2π.
    Holonomy { charts: (usize, usize), turns: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaugeSolution<S> {
    /// Parameter `q` with `x = D[1,0] q`.
    pub parameter: DbCochain<S>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Triviality<S> {
    Trivial(GaugeSolution<S>),
    Obstructed(Obstruction),
}

impl<S> Triviality<S> {
    pub fn is_trivial(&self) -> bool {
        matches!(self, Triviality::Trivial(_))
    }
}

/// Charts containing each vertex, in increasing order.
pub(crate) fn charts_of_vertices(cx: &SimplicialComplex, cover: &GoodCover) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new(); cx.len(0)];
    for i in 0..cover.n_charts() {
        for &g in cover.chart(i).simplices(0) {
            out[g].push(i);
        }
    }
    out
}

/// Value of a function on nerve edges at `(a, b)`, antisymmetrically extended; zero when `a == b`.
fn edge_value<S: Scalar>(cover: &GoodCover, family: &[Cochain<S>], a: usize, b: usize, vertex: usize) -> S {
    if a == b {
        return S::zero();
    }
    let (lo, hi, sign) = if a < b { (a, b, true) } else { (b, a, false) };
    let e = cover.nerve().find(&[lo, hi]).expect("charts sharing a vertex overlap");
    let local = cover.region(1, e).local(0, vertex).expect("vertex lies in the overlap");
    let v = family[e].values[local].clone();
    if sign {
        v
    } else {
        -v
    }
}

/// Primitive of a closed 1-cochain on a connected region, zero at the region's first vertex.
pub(crate) fn tree_primitive<S: Scalar>(region: &Region, form: &Cochain<S>) -> Cochain<S> {
    let nv = region.len(0);
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    for e in 0..region.len(1) {
        let f = region.faces(1, e);
        // faces of a sorted edge (v0, v1): (v1, +1), (v0, -1)
        let (hi, lo) = (f[0].0, f[1].0);
        adj[lo].push((hi, e));
        adj[hi].push((lo, e));
    }
    let mut value: Vec<Option<S>> = vec![None; nv];
    for root in 0..nv {
        if value[root].is_some() {
            continue;
        }
        value[root] = Some(S::zero());
        let mut queue = VecDeque::from([root]);
        while let Some(a) = queue.pop_front() {
            let fa = value[a].clone().expect("visited");
            for &(b, e) in &adj[a] {
                if value[b].is_none() {
                    let head = region.faces(1, e)[0].0;
                    let step = form.values[e].clone();
                    value[b] = Some(if b == head { fa.clone() + step } else { fa.clone() - step });
                    queue.push_back(b);
                }
            }
        }
    }
    Cochain::new(0, value.into_iter().map(|v| v.expect("visited")).collect())
}

fn require_connection<S: Scalar>(cover: &GoodCover, x: &DbCochain<S>, tol: f64) -> Result<()> {
    if (x.truncation(), x.diagonal()) != (1, 1) {
        return Err(Error::Shape("expected a U(1) connection cochain (k=1, l=1)".into()));
    }
    let c = is_cocycle(cover, x, tol)?;
    if !c.holds {
        return Err(Error::NotCocycle(format!("connection residual {:e}", c.residual)));
    }
    Ok(())
}

/// Subtracts a gauge transformation so that the transition layers vanish, leaving the
/// restrictions of one global 1-form. Fails with the characteristic class when the
/// integer layer is not a Čech coboundary.
pub fn split_global_form<S: Scalar>(
    cx: &SimplicialComplex,
    cover: &GoodCover,
    x: &DbCochain<S>,
    tol: f64,
) -> Result<std::result::Result<(DbCochain<S>, Cochain<S>), Obstruction>> {
    require_connection(cover, x, tol)?;
    let nerve = cover.nerve();
    let delta1 = IntegerMatrix::from_rows(&nerve.coboundary_matrix(1), nerve.len(1));
    let Some(m0) = super::solve_integer(&delta1, x.integers()) else {
        let class = CechCohomology::new(nerve, 2).class_of(x.integers())?;
        return Ok(Err(Obstruction::CharacteristicClass(class)));
    };
    let mut q = DbCochain::zero(cover, 1, 0)?;
    *q.integers_mut() = m0;
    let x1 = x.sub(&db_differential(cover, 1, 0, &q)?)?;

    let charts = charts_of_vertices(cx, cover);
    let lam = x1.forms(1);
    let mut q2 = DbCochain::zero(cover, 1, 0)?;
    for (i, f) in q2.forms_mut(0).expect("function layer").iter_mut().enumerate() {
        for (local, &g) in cover.chart(i).simplices(0).iter().enumerate() {
            let i0 = charts[g][0];
            f.values[local] = -edge_value(cover, lam, i0, i, g);
        }
    }
    let x2 = x1.sub(&db_differential(cover, 1, 0, &q2)?)?;
    let q = q.add(&q2)?;

    let mut omega = cx.full().zero::<S>(1);
    let mut set = vec![false; cx.len(1)];
    for (i, a) in x2.forms(0).iter().enumerate() {
        for (local, &g) in cover.chart(i).simplices(1).iter().enumerate() {
            if !set[g] {
                omega.values[g] = a.values[local].clone();
                set[g] = true;
            }
        }
    }
    Ok(Ok((q, omega)))
}

/// Solves `x = D[1,0] q` for a U(1) connection cocycle, or explains why no `q` exists.
pub fn trivialize<S: Scalar>(cx: &SimplicialComplex, cover: &GoodCover, x: &DbCochain<S>, tol: f64) -> Result<Triviality<S>> {
    let (q, omega) = match split_global_form(cx, cover, x, tol)? {
        Ok(v) => v,
        Err(o) => return Ok(Triviality::Obstructed(o)),
    };
    let curvature = cx.full().coboundary(&omega)?;
    if (S::EXACT && !curvature.is_zero()) || curvature.max_abs() > tol {
        return Ok(Triviality::Obstructed(Obstruction::Curvature { residual: curvature.max_abs() }));
    }
    let nerve = cover.nerve();
    let prims: Vec<Cochain<S>> = (0..cover.n_charts())
        .map(|i| Ok(tree_primitive(cover.chart(i), &cx.full().restrict(&omega, cover.chart(i))?)))
        .collect::<Result<_>>()?;
    // differences of primitives are constant on each (connected) overlap
    let diff: Vec<S> = (0..nerve.len(1))
        .map(|e| {
            let s = nerve.simplex(1, e);
            let r = cover.region(1, e);
            let g = r.simplices(0)[0];
            let vi = prims[s[0]].values[cover.chart(s[0]).local(0, g).expect("overlap")].clone();
            let vj = prims[s[1]].values[cover.chart(s[1]).local(0, g).expect("overlap")].clone();
            vi - vj
        })
        .collect();
    let mut shift: Vec<Option<S>> = vec![None; cover.n_charts()];
    for root in 0..cover.n_charts() {
        if shift[root].is_some() {
            continue;
        }
        shift[root] = Some(S::zero());
        let mut queue = VecDeque::from([root]);
        while let Some(a) = queue.pop_front() {
            for e in 0..nerve.len(1) {
                let s = nerve.simplex(1, e);
                let (b, c) = if s[0] == a {
                    (s[1], diff[e].clone())
                } else if s[1] == a {
                    (s[0], -diff[e].clone())
                } else {
                    continue;
                };
                if shift[b].is_none() {
                    // c_ab + t_a - t_b = 0 on tree edges
                    shift[b] = Some(c + shift[a].clone().expect("visited"));
                    queue.push_back(b);
                }
            }
        }
    }
    let shift: Vec<S> = shift.into_iter().map(|s| s.expect("visited")).collect();
    let mut q3 = DbCochain::zero(cover, 1, 0)?;
    let mut jumps = Vec::with_capacity(nerve.len(1));
    for e in 0..nerve.len(1) {
        let s = nerve.simplex(1, e);
        let v = diff[e].clone() + shift[s[0]].clone() - shift[s[1]].clone();
        match v.as_winding(tol) {
            Some(w) => jumps.push(-w),
            None => {
                return Ok(Triviality::Obstructed(Obstruction::Holonomy {
                    charts: (s[0], s[1]),
                    turns: v.to_real() / std::f64::consts::TAU,
                }))
            }
        }
    }
    for (i, f) in q3.forms_mut(0).expect("function layer").iter_mut().enumerate() {
        *f = prims[i].map(|v| v.clone() + shift[i].clone());
    }
    *q3.integers_mut() = jumps;
    let parameter = q.add(&q3)?;
    let residual = x.sub(&db_differential(cover, 1, 0, &parameter)?)?;
    if (S::EXACT && !residual.is_zero()) || residual.max_abs() > tol.max(1e-9) {
        return Err(Error::NotCocycle(format!("gauge solution misses by {:e}", residual.max_abs())));
    }
    Ok(Triviality::Trivial(GaugeSolution { parameter }))
}

/// Holonomy of a connection around a circle stratum, reduced modulo one full turn.
///
/// `Σ_i ∫_{arc_i} A_i − Σ_i ε_i Λ_{σ_i}(P_{i+1})`, where `σ_i` is the overlap of charts
/// `i, i+1` and `ε_i = -1` on the wrap-around pair.
pub fn circle_holonomy<S: Scalar>(cx: &SimplicialComplex, cover: &GoodCover, x: &DbCochain<S>) -> Result<S> {
    let arcs = cover
        .arcs()
        .ok_or_else(|| Error::WrongStratum("holonomy needs a circle cover with arcs".into()))?;
    if (x.truncation(), x.diagonal()) != (1, 1) {
        return Err(Error::Shape("expected a U(1) connection cochain (k=1, l=1)".into()));
    }
    let m = cover.n_charts();
    let mut total = S::zero();
    for i in 0..m {
        let chain = arcs.arc_chain(cx, cover.chart(i), i)?;
        total += crate::complex::integrate(&x.forms(0)[i], &chain)?;
    }
    for (i, (e, eps)) in arcs.loop_pairs(cover.nerve()).into_iter().enumerate() {
        let p = arcs.points[(i + 1) % m];
        let local = cover.region(1, e).local(0, p).expect("arc endpoint lies in the overlap");
        let v = x.forms(1)[e].values[local].clone();
        if eps > 0 {
            total -= v;
        } else {
            total += v;
        }
    }
    Ok(total.frac_winding())
}

/// A U(1) connection whose integer layer is the given Čech 2-cocycle.
///
/// Transition functions come from coning the cocycle at the lowest chart through each
/// vertex; local potentials from coning `dΛ` at the lowest chart through each edge.
pub fn connection_with_class<S: Scalar>(cx: &SimplicialComplex, cover: &GoodCover, n: &[i64]) -> Result<DbCochain<S>> {
    let nerve = cover.nerve();
    let check = crate::complex::cech_coboundary_int(nerve, 2, n)?;
    if check.iter().any(|&v| v != 0) {
        return Err(Error::NotCocycle("integer layer is not a Čech cocycle".into()));
    }
    let n_at = |a: usize, b: usize, c: usize| -> i64 {
        if a == b || b == c || a == c {
            return 0;
        }
        let mut t = [a, b, c];
        let mut sign = 1;
        for i in 0..3 {
            for j in 0..2 - i {
                if t[j] > t[j + 1] {
                    t.swap(j, j + 1);
                    sign = -sign;
                }
            }
        }
        sign * n[nerve.find(&t).expect("charts through a common vertex form a nerve simplex")]
    };
    let charts = charts_of_vertices(cx, cover);
    let mut x = DbCochain::zero(cover, 1, 1)?;
    {
        let lam = x.forms_mut(1).expect("transition layer");
        for (e, f) in lam.iter_mut().enumerate() {
            let s = nerve.simplex(1, e);
            for (local, &g) in cover.region(1, e).simplices(0).iter().enumerate() {
                f.values[local] = S::from_winding(n_at(charts[g][0], s[0], s[1]));
            }
        }
    }
    let lam = x.forms(1).to_vec();
    let dlam: Vec<Cochain<S>> = lam
        .iter()
        .zip(cover.regions(1))
        .map(|(c, r)| r.coboundary(c))
        .collect::<Result<_>>()?;
    let first_chart_of_edge = |g: usize| -> usize {
        let s = cx.simplex(1, g);
        charts[s[0]].iter().copied().find(|c| charts[s[1]].contains(c)).expect("edge lies in a chart")
    };
    {
        let a = x.forms_mut(0).expect("potential layer");
        for (i, f) in a.iter_mut().enumerate() {
            for (local, &g) in cover.chart(i).simplices(1).iter().enumerate() {
                let i0 = first_chart_of_edge(g);
                if i0 == i {
                    continue;
                }
                let e = nerve.find(&[i0, i]).expect("overlap");
                let l = cover.region(1, e).local(1, g).expect("edge in overlap");
                f.values[local] = -dlam[e].values[l].clone();
            }
        }
    }
    *x.integers_mut() = n.to_vec();
    Ok(x)
}
