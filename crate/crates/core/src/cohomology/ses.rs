//! The maps of the two short exact sequences
//! `0 → Ω¹/Ω¹_Z → H¹_DB → H²(Z) → 0` and `0 → H¹(R/Z) → H¹_DB → Ω²_Z → 0`,
//! and constructive checks of their exactness.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use serde::Serialize;

use super::gauge::{split_global_form, tree_primitive};
use super::{connection_with_class, has_integral_periods, trivialize, CechCohomology, CohomologyClass};
use crate::complex::{cech_coboundary_int, Cochain, GoodCover, SimplicialComplex};
use crate::db::{db_differential, is_cocycle, random_cochain, DbCochain};
use crate::error::{Error, Result};
use crate::scalar::{Rational, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SesMap {
    /// Global 1-form to the connection with that potential and no transition data.
    DeltaCheck,
    /// Connection to the Čech class of its integer layer.
    U,
    /// Flat `R/Z` Čech cocycle to a flat connection.
    V,
    /// Connection to its glued curvature.
    D,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SesInput<S> {
    Form(Cochain<S>),
    Connection(DbCochain<S>),
    /// One real value per nerve edge whose Čech coboundary is integral.
    Flat(Vec<S>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum SesOutput<S> {
    Connection(DbCochain<S>),
    Class { cocycle: Vec<i64>, class: CohomologyClass },
    Curvature(Cochain<S>),
}

pub fn apply_ses_map<S: Scalar>(
    cx: &SimplicialComplex,
    cover: &GoodCover,
    map: SesMap,
    input: &SesInput<S>,
    tol: f64,
) -> Result<SesOutput<S>> {
    match (map, input) {
        (SesMap::DeltaCheck, SesInput::Form(w)) => Ok(SesOutput::Connection(lift_form(cx, cover, w)?)),
        (SesMap::U, SesInput::Connection(x)) => {
            require_cocycle(cover, x, tol)?;
            let class = CechCohomology::new(cover.nerve(), 2).class_of(x.integers())?;
            Ok(SesOutput::Class { cocycle: x.integers().to_vec(), class })
        }
        (SesMap::V, SesInput::Flat(m)) => Ok(SesOutput::Connection(flat_connection(cover, m, tol)?)),
        (SesMap::D, SesInput::Connection(x)) => {
            require_cocycle(cover, x, tol)?;
            Ok(SesOutput::Curvature(curvature(cx, cover, x)?))
        }
        _ => Err(Error::InvalidParameter(format!("input does not belong to the domain of {map:?}"))),
    }
}

fn require_cocycle<S: Scalar>(cover: &GoodCover, x: &DbCochain<S>, tol: f64) -> Result<()> {
    if (x.truncation(), x.diagonal()) != (1, 1) {
        return Err(Error::Shape("expected a U(1) connection cochain (k=1, l=1)".into()));
    }
    let c = is_cocycle(cover, x, tol)?;
    if !c.holds {
        return Err(Error::NotCocycle(format!("connection residual {:e}", c.residual)));
    }
    Ok(())
}

fn lift_form<S: Scalar>(cx: &SimplicialComplex, cover: &GoodCover, w: &Cochain<S>) -> Result<DbCochain<S>> {
    if w.degree != 1 {
        return Err(Error::DegreeMismatch { expected: 1, found: w.degree as i64 });
    }
    let mut x = DbCochain::zero(cover, 1, 1)?;
    for (i, f) in x.forms_mut(0).expect("potential layer").iter_mut().enumerate() {
        *f = cx.full().restrict(w, cover.chart(i))?;
    }
    Ok(x)
}

fn flat_connection<S: Scalar>(cover: &GoodCover, m: &[S], tol: f64) -> Result<DbCochain<S>> {
    let nerve = cover.nerve();
    if m.len() != nerve.len(1) {
        return Err(Error::Shape(format!("expected {} values, found {}", nerve.len(1), m.len())));
    }
    let mut jumps = Vec::with_capacity(nerve.len(2));
    for t in 0..nerve.len(2) {
        let mut acc = S::zero();
        for (e, s) in nerve.cech_faces(2, t) {
            acc += if s > 0 { m[e].clone() } else { -m[e].clone() };
        }
        jumps.push(acc.as_winding(tol).ok_or_else(|| Error::NotCocycle("flat family is not closed modulo 2π".into()))?);
    }
    let mut x = DbCochain::zero(cover, 1, 1)?;
    for (e, f) in x.forms_mut(1).expect("transition layer").iter_mut().enumerate() {
        *f = cover.region(1, e).constant(m[e].clone());
    }
    *x.integers_mut() = jumps;
    Ok(x)
}

/// Glued curvature `(dA_i)` of a connection as a global 2-cochain.
pub fn curvature<S: Scalar>(cx: &SimplicialComplex, cover: &GoodCover, x: &DbCochain<S>) -> Result<Cochain<S>> {
    let mut out = cx.full().zero::<S>(2);
    let mut set = vec![false; out.len()];
    for (i, a) in x.forms(0).iter().enumerate() {
        let region = cover.chart(i);
        let da = region.coboundary(a)?;
        for (local, &g) in region.simplices(2).iter().enumerate() {
            if !set[g] {
                out.values[g] = da.values[local].clone();
                set[g] = true;
            }
        }
    }
    Ok(out)
}

/// A 1-cochain `β` with `dβ = h` on a surface, built along a spanning tree of the dual graph.
///
/// Triangles with a boundary edge hang off a virtual root, so on surfaces with boundary
/// every `h` is solvable; on closed surfaces the total of `h` must vanish.
pub fn solve_top_exact<S: Scalar>(cx: &SimplicialComplex, h: &Cochain<S>, tol: f64) -> Result<Cochain<S>> {
    if cx.dim() != 2 || h.degree != 2 {
        return Err(Error::DegreeMismatch { expected: 2, found: h.degree as i64 });
    }
    let region = cx.full();
    let nt = cx.len(2);
    let mut cof: Vec<Vec<usize>> = vec![Vec::new(); cx.len(1)];
    for t in 0..nt {
        for &(e, _) in region.faces(2, t) {
            cof[e].push(t);
        }
    }
    let mut parent: Vec<Option<usize>> = vec![None; nt];
    let mut seen = vec![false; nt];
    let mut order = Vec::with_capacity(nt);
    let mut queue = VecDeque::new();
    for (e, c) in cof.iter().enumerate() {
        if c.len() == 1 && !seen[c[0]] {
            seen[c[0]] = true;
            parent[c[0]] = Some(e);
            queue.push_back(c[0]);
        }
    }
    let mut closed_root = None;
    if queue.is_empty() && nt > 0 {
        seen[0] = true;
        closed_root = Some(0);
        queue.push_back(0);
    }
    while let Some(t) = queue.pop_front() {
        order.push(t);
        for &(e, _) in region.faces(2, t) {
            for &u in &cof[e] {
                if !seen[u] {
                    seen[u] = true;
                    parent[u] = Some(e);
                    queue.push_back(u);
                }
            }
        }
    }
    let mut beta = region.zero::<S>(1);
    for &t in order.iter().rev() {
        let Some(pe) = parent[t] else { continue };
        let mut rest = h.values[t].clone();
        let mut sign = 0;
        for &(e, s) in region.faces(2, t) {
            if e == pe {
                sign = s;
            } else if s > 0 {
                rest -= beta.values[e].clone();
            } else {
                rest += beta.values[e].clone();
            }
        }
        beta.values[pe] = if sign > 0 { rest } else { -rest };
    }
    if let Some(r) = closed_root {
        let got = region.coboundary(&beta)?.values[r].clone();
        if !got.near(&h.values[r], tol) {
            return Err(Error::NotCocycle("2-form has nonzero total and is not exact".into()));
        }
    }
    Ok(beta)
}

/// Whether `m` pairs integrally with every fundamental cycle of the nerve graph,
/// i.e. whether its class in `H¹(R/Z)` vanishes.
fn flat_class_vanishes<S: Scalar>(cover: &GoodCover, m: &[S], tol: f64) -> bool {
    let nerve = cover.nerve();
    let nc = nerve.len(0);
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nc];
    let mut seen = vec![false; nc];
    let mut tree = vec![false; nerve.len(1)];
    for root in 0..nc {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(a) = queue.pop_front() {
            for e in 0..nerve.len(1) {
                let s = nerve.simplex(1, e);
                let b = if s[0] == a { s[1] } else if s[1] == a { s[0] } else { continue };
                if !seen[b] {
                    seen[b] = true;
                    parent[b] = Some((a, e));
                    tree[e] = true;
                    queue.push_back(b);
                }
            }
        }
    }
    // potential along the tree: t_b = t_a + m(a→b)
    let value = |e: usize, from: usize| -> S {
        if nerve.simplex(1, e)[0] == from {
            m[e].clone()
        } else {
            -m[e].clone()
        }
    };
    let potential = |mut v: usize| -> S {
        let mut acc = S::zero();
        while let Some((p, e)) = parent[v] {
            acc += value(e, p);
            v = p;
        }
        acc
    };
    (0..nerve.len(1)).filter(|&e| !tree[e]).all(|e| {
        let s = nerve.simplex(1, e);
        let loop_sum = potential(s[0]) + m[e].clone() - potential(s[1]);
        loop_sum.as_winding(tol).is_some()
    })
}

/// Writes a flat connection as `v(m) + D q`.
fn flat_to_cech<S: Scalar>(cover: &GoodCover, x: &DbCochain<S>) -> Result<(DbCochain<S>, Vec<S>)> {
    let mut q = DbCochain::zero(cover, 1, 0)?;
    for (i, f) in q.forms_mut(0).expect("function layer").iter_mut().enumerate() {
        *f = tree_primitive(cover.chart(i), &x.forms(0)[i]);
    }
    let rest = x.sub(&db_differential(cover, 1, 0, &q)?)?;
    let m = rest.forms(1).iter().map(|c| c.values[0].clone()).collect();
    Ok((q, m))
}

/// Outcome of checking exactness at one node of one sequence.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NodeCheck {
    pub sequence: u8,
    pub node: String,
    pub samples: usize,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExactnessReport {
    pub nodes: Vec<NodeCheck>,
}

impl ExactnessReport {
    pub fn all_exact(&self) -> bool {
        self.nodes.iter().all(|n| n.exact)
    }
}

fn random_form<R: Rng>(cx: &SimplicialComplex, degree: usize, rng: &mut R) -> Cochain<Rational> {
    Cochain::new(degree, (0..cx.len(degree)).map(|_| Rational::new(rng.gen_range(-12..=12), rng.gen_range(1..=6))).collect())
}

/// Checks exactness of both sequences at every node on the given cover, with exact
/// arithmetic and randomly drawn elements.
pub fn verify_exactness(cx: &SimplicialComplex, cover: &GoodCover, seed: u64) -> Result<ExactnessReport> {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let nerve = cover.nerve();
    let h2 = CechCohomology::new(nerve, 2);
    let d = |x: &DbCochain<Rational>| curvature(cx, cover, x);
    let mut nodes = Vec::new();

    // test 1-forms: exact, arbitrary, and (on a circle) fractional multiples of the generator
    let mut forms = Vec::new();
    for _ in 0..4 {
        forms.push(cx.full().coboundary(&random_form(cx, 0, &mut rng))?);
        forms.push(random_form(cx, 1, &mut rng));
    }
    if cx.dim() == 1 {
        let n = cx.len(1) as i64;
        for t in [Rational::from_integer(1), Rational::new(1, 2), Rational::from_integer(-3), Rational::new(2, 3)] {
            let g = Cochain::new(1, (0..cx.len(1)).map(|e| Rational::new(cx.orientation(e), n) * t).collect());
            forms.push(g.add(&cx.full().coboundary(&random_form(cx, 0, &mut rng))?)?);
        }
    }
    let mut ok = true;
    for w in &forms {
        let x = lift_form(cx, cover, w)?;
        ok &= trivialize(cx, cover, &x, 0.0)?.is_trivial() == has_integral_periods(cx, w, 0.0)?.integral;
    }
    nodes.push(NodeCheck { sequence: 1, node: "forms modulo integral forms".into(), samples: forms.len(), exact: ok });

    let mut ok = true;
    for w in &forms {
        ok &= h2.class_of(lift_form(cx, cover, w)?.integers())?.is_trivial();
    }
    let mut samples = forms.len();
    for _ in 0..6 {
        let m: Vec<i64> = (0..nerve.len(1)).map(|_| rng.gen_range(-3..=3)).collect();
        let n = cech_coboundary_int(nerve, 1, &m)?;
        let x = connection_with_class::<Rational>(cx, cover, &n)?
            .add(&lift_form(cx, cover, &random_form(cx, 1, &mut rng))?)?
            .add(&db_differential(cover, 1, 0, &random_cochain(cover, 1, 0, &mut rng)?)?)?;
        ok &= h2.class_of(x.integers())?.is_trivial();
        match split_global_form(cx, cover, &x, 0.0)? {
            Ok((q, w)) => ok &= x.sub(&db_differential(cover, 1, 0, &q)?)? == lift_form(cx, cover, &w)?,
            Err(_) => ok = false,
        }
        samples += 1;
    }
    nodes.push(NodeCheck { sequence: 1, node: "connections (image of lift = kernel of u)".into(), samples, exact: ok });

    let mut ok = true;
    let rank = h2.group().free_rank;
    for k in 0..rank {
        let mut e = vec![0; rank];
        e[k] = 1;
        let x = connection_with_class::<Rational>(cx, cover, &h2.representative(&e)?)?;
        ok &= is_cocycle(cover, &x, 0.0)?.holds && h2.class_of(x.integers())?.free == e;
    }
    ok &= h2.group().torsion.is_empty();
    nodes.push(NodeCheck { sequence: 1, node: "degree-2 integer classes (u onto)".into(), samples: rank, exact: ok });

    // flat classes
    let mut flats: Vec<Vec<Rational>> = Vec::new();
    for _ in 0..6 {
        let t: Vec<Rational> = (0..nerve.len(0)).map(|_| Rational::new(rng.gen_range(-9..=9), rng.gen_range(1..=5))).collect();
        let mut m: Vec<Rational> = (0..nerve.len(1))
            .map(|e| {
                let s = nerve.simplex(1, e);
                t[s[0]] - t[s[1]] + Rational::from_integer(rng.gen_range(-2..=2))
            })
            .collect();
        if cx.dim() == 1 {
            m[0] += Rational::new(rng.gen_range(0..4), 4);
        }
        flats.push(m);
    }
    let mut ok = true;
    for m in &flats {
        let x = flat_connection(cover, m, 0.0)?;
        ok &= trivialize(cx, cover, &x, 0.0)?.is_trivial() == flat_class_vanishes(cover, m, 0.0);
    }
    nodes.push(NodeCheck { sequence: 2, node: "flat classes (v injective)".into(), samples: flats.len(), exact: ok });

    let mut ok = true;
    for m in &flats {
        let x = flat_connection(cover, m, 0.0)?;
        ok &= d(&x)?.is_zero();
        let y = x.add(&db_differential(cover, 1, 0, &random_cochain(cover, 1, 0, &mut rng)?)?)?;
        let (q, m2) = flat_to_cech(cover, &y)?;
        ok &= y.sub(&db_differential(cover, 1, 0, &q)?)? == flat_connection(cover, &m2, 0.0)?;
    }
    nodes.push(NodeCheck { sequence: 2, node: "connections (image of v = kernel of d)".into(), samples: flats.len(), exact: ok });

    let mut ok = true;
    let mut samples = 0;
    if cx.dim() == 2 && rank == 1 {
        let gen = connection_with_class::<Rational>(cx, cover, &h2.representative(&[1])?)?;
        let unit = super::integrate_top(cx, &d(&gen)?)?;
        for c in [-1i64, 0, 2] {
            let g = d(&connection_with_class::<Rational>(cx, cover, &h2.representative(&[c])?)?)?
                .add(&cx.full().coboundary(&random_form(cx, 1, &mut rng))?)?;
            let period = super::integrate_top(cx, &g)?;
            ok &= has_integral_periods(cx, &g, 0.0)?.integral;
            let k = period / unit;
            ok &= k.is_integer();
            let x = connection_with_class::<Rational>(cx, cover, &h2.representative(&[k.to_integer()])?)?;
            let beta = solve_top_exact(cx, &g.sub(&d(&x)?)?, 0.0)?;
            let x = x.add(&lift_form(cx, cover, &beta)?)?;
            ok &= d(&x)? == g;
            samples += 1;
        }
    } else {
        ok &= cx.len(2) == 0 || rank == 0;
    }
    for _ in 0..3 {
        let m: Vec<i64> = (0..nerve.len(1)).map(|_| rng.gen_range(-3..=3)).collect();
        let x = connection_with_class::<Rational>(cx, cover, &cech_coboundary_int(nerve, 1, &m)?)?
            .add(&lift_form(cx, cover, &random_form(cx, 1, &mut rng))?)?;
        ok &= has_integral_periods(cx, &d(&x)?, 0.0)?.integral;
        samples += 1;
    }
    nodes.push(NodeCheck { sequence: 2, node: "closed integral 2-forms (d onto)".into(), samples, exact: ok });

    Ok(ExactnessReport { nodes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::{build_complex, build_cover, MeshKind};

    #[test]
    fn sequences_are_exact_on_circle_and_sphere() {
        for (kind, m) in [(MeshKind::Circle { n: 12 }, 3), (MeshKind::Sphere { subdivision: 2 }, 12)] {
            let cx = build_complex(&kind).unwrap();
            let cover = build_cover(&cx, m).unwrap();
            let report = verify_exactness(&cx, &cover, 5).unwrap();
            assert!(report.all_exact(), "{kind:?}: {report:?}");
        }
    }

    #[test]
    fn u_vanishes_on_the_circle_and_d_kills_v() {
        let cx = build_complex(&MeshKind::Circle { n: 12 }).unwrap();
        let cover = build_cover(&cx, 3).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let x = lift_form(&cx, &cover, &random_form(&cx, 1, &mut rng)).unwrap();
        match apply_ses_map(&cx, &cover, SesMap::U, &SesInput::Connection(x), 0.0).unwrap() {
            SesOutput::Class { class, .. } => assert!(class.is_trivial()),
            _ => unreachable!(),
        }
        let flat = SesInput::Flat(vec![Rational::new(1, 3), Rational::new(-2, 5), Rational::new(7, 2)]);
        let SesOutput::Connection(v) = apply_ses_map(&cx, &cover, SesMap::V, &flat, 0.0).unwrap() else { unreachable!() };
        let SesOutput::Curvature(f) = apply_ses_map(&cx, &cover, SesMap::D, &SesInput::Connection(v), 0.0).unwrap() else {
            unreachable!()
        };
        assert!(f.is_zero());
    }

    #[test]
    fn monopole_flux_matches_class() {
        let cx = build_complex(&MeshKind::Sphere { subdivision: 2 }).unwrap();
        let cover = build_cover(&cx, 12).unwrap();
        let h2 = CechCohomology::new(cover.nerve(), 2);
        let unit = {
            let g: DbCochain<f64> = connection_with_class(&cx, &cover, &h2.representative(&[1]).unwrap()).unwrap();
            super::super::integrate_top(&cx, &curvature(&cx, &cover, &g).unwrap()).unwrap()
        };
        assert!((unit.abs() - std::f64::consts::TAU).abs() < 1e-9);
        for c in [-2i64, 3] {
            let x: DbCochain<f64> = connection_with_class(&cx, &cover, &h2.representative(&[c]).unwrap()).unwrap();
            let SesOutput::Curvature(f) = apply_ses_map(&cx, &cover, SesMap::D, &SesInput::Connection(x.clone()), 1e-12).unwrap() else {
                unreachable!()
            };
            let flux = super::super::integrate_top(&cx, &f).unwrap();
            let SesOutput::Class { class, .. } = apply_ses_map(&cx, &cover, SesMap::U, &SesInput::Connection(x), 1e-12).unwrap() else {
                unreachable!()
            };
            assert!((flux - unit * class.free[0] as f64).abs() < 1e-9);
        }
    }

    #[test]
    fn rejects_wrong_domain() {
        let cx = build_complex(&MeshKind::Circle { n: 12 }).unwrap();
        let cover = build_cover(&cx, 3).unwrap();
        let bad: DbCochain<Rational> = {
            let mut x = DbCochain::zero(&cover, 1, 1).unwrap();
            x.forms_mut(1).unwrap()[0].values[0] = Rational::new(1, 2);
            x
        };
        assert!(apply_ses_map(&cx, &cover, SesMap::U, &SesInput::Connection(bad), 0.0).is_err());
        let w: Cochain<Rational> = cx.full().zero(1);
        assert!(apply_ses_map(&cx, &cover, SesMap::U, &SesInput::Form(w), 0.0).is_err());
    }
}
