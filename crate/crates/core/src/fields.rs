//! Boundary field content: U(1) connections, edge modes over (-1)-gerbes, the dressed
//! field, covariant derivatives, winding numbers and morphisms of the extended field
//! groupoid.
//!
//! Fields live on an equal-time slice: a planar annulus standing in for the slice of the
//! boundary region, and the circle formed by its outer ring standing in for the slice of
//! the corner. Both carry covers by the same angular sectors, so their nerves coincide.

use crate::cohomology::{curvature, CechCohomology, CohomologyClass};
use crate::complex::{build_cover, Cochain, GoodCover, MeshKind, Region, SimplicialComplex};
use crate::db::{db_differential, is_cocycle, DbCochain, Layer, LayerData};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// An annulus slice together with its outer boundary circle.
#[derive(Debug, Clone)]
pub struct BoundarySlice {
    pub bulk: SimplicialComplex,
    pub bulk_cover: GoodCover,
    pub edge: SimplicialComplex,
    pub edge_cover: GoodCover,
    vertex_trace: Vec<usize>,
    edge_trace: Vec<usize>,
}

impl BoundarySlice {
    pub fn annulus(n_r: usize, n_theta: usize, r_in: f64, r_out: f64, charts: usize) -> Result<Self> {
        let bulk = crate::complex::build_complex(&MeshKind::Annulus { n_r, n_theta, r_in, r_out, jitter: 0.0 })?;
        let base = n_r * n_theta;
        let coords = bulk.coords()[base..base + n_theta].to_vec();
        let edges = (0..n_theta).map(|i| vec![i, (i + 1) % n_theta]).collect();
        let edge = SimplicialComplex::from_oriented(MeshKind::Circle { n: n_theta }, edges, coords)?;
        let vertex_trace: Vec<usize> = (0..n_theta).map(|i| base + i).collect();
        let edge_trace = (0..edge.len(1))
            .map(|e| {
                let s = edge.simplex(1, e);
                bulk.find(&[vertex_trace[s[0]], vertex_trace[s[1]]])
                    .ok_or_else(|| Error::Shape("outer ring edge is missing from the annulus".into()))
            })
            .collect::<Result<_>>()?;
        let bulk_cover = build_cover(&bulk, charts)?;
        let edge_cover = build_cover(&edge, charts)?;
        for q in 0..=bulk_cover.nerve().dim().max(edge_cover.nerve().dim()) {
            if bulk_cover.nerve().len(q) != edge_cover.nerve().len(q)
                || (0..bulk_cover.nerve().len(q)).any(|i| bulk_cover.nerve().simplex(q, i) != edge_cover.nerve().simplex(q, i))
            {
                return Err(Error::NoGoodCover("annulus and boundary covers have different nerves".into()));
            }
        }
        Ok(BoundarySlice { bulk, bulk_cover, edge, edge_cover, vertex_trace, edge_trace })
    }

    /// Annulus vertex under each circle vertex.
    pub fn vertex_trace(&self) -> &[usize] {
        &self.vertex_trace
    }

    /// Pullback of a global 0- or 1-cochain on the annulus to the boundary circle.
    pub fn trace<S: Scalar>(&self, c: &Cochain<S>) -> Result<Cochain<S>> {
        let map = match c.degree {
            0 => &self.vertex_trace,
            1 => &self.edge_trace,
            d => return Err(Error::DegreeMismatch { expected: 1, found: d as i64 }),
        };
        if c.len() != self.bulk.len(c.degree) {
            return Err(Error::Shape("cochain does not live on the annulus".into()));
        }
        Ok(Cochain::new(c.degree, map.iter().map(|&g| c.values[g].clone()).collect()))
    }

    fn trace_local<S: Scalar>(&self, c: &Cochain<S>, from: &Region, to: &Region) -> Result<Cochain<S>> {
        let global = self.bulk.full().extend(c, from)?;
        self.edge.full().restrict(&self.trace(&global)?, to)
    }

    /// Restriction of a DB cochain on the annulus cover to the boundary cover.
    pub fn trace_db<S: Scalar>(&self, x: &DbCochain<S>) -> Result<DbCochain<S>> {
        x.validate(&self.bulk_cover)?;
        let mut layers = Vec::new();
        for layer in x.layers() {
            let q = layer.cech_degree;
            let data = match &layer.data {
                LayerData::Integers(n) => LayerData::Integers(n.clone()),
                LayerData::Forms(f) if layer.form_degree > 1 => {
                    LayerData::Forms(self.edge_cover.regions(q).iter().map(|r| r.zero(layer.form_degree as usize)).collect())
                }
                LayerData::Forms(f) => LayerData::Forms(
                    f.iter()
                        .enumerate()
                        .map(|(i, c)| self.trace_local(c, self.bulk_cover.region(q, i), self.edge_cover.region(q, i)))
                        .collect::<Result<_>>()?,
                ),
            };
            layers.push(Layer { cech_degree: q, form_degree: layer.form_degree, data });
        }
        DbCochain::from_layers(&self.edge_cover, x.truncation(), x.diagonal(), layers)
    }
}

/// Glues a family of chart-local cochains that agree on overlaps into one global cochain.
pub fn glue<S: Scalar>(cx: &SimplicialComplex, cover: &GoodCover, family: &[Cochain<S>], tol: f64) -> Result<Cochain<S>> {
    let degree = family.first().map_or(0, |c| c.degree);
    let mut out = cx.full().zero::<S>(degree);
    let mut set = vec![false; out.len()];
    for (i, c) in family.iter().enumerate() {
        let region = cover.chart(i);
        for (local, &g) in region.simplices(degree).iter().enumerate() {
            if set[g] {
                if !out.values[g].near(&c.values[local], tol) {
                    return Err(Error::NotGlobal(format!("chart {i} disagrees with its neighbours on a {degree}-simplex")));
                }
            } else {
                out.values[g] = c.values[local].clone();
                set[g] = true;
            }
        }
    }
    Ok(out)
}

fn lift<S: Scalar>(cx: &SimplicialComplex, cover: &GoodCover, c: &Cochain<S>, k: usize, l: i64) -> Result<DbCochain<S>> {
    let mut x = DbCochain::zero(cover, k, l)?;
    let f = x.forms_mut(0).ok_or_else(|| Error::Shape("cochain has no chart layer".into()))?;
    for (i, slot) in f.iter_mut().enumerate() {
        *slot = cx.full().restrict(c, cover.chart(i))?;
    }
    Ok(x)
}

/// A DB 1-cocycle `(A_i, Λ_ij, n_ijk)`.
#[derive(Debug, Clone, PartialEq)]
pub struct U1Connection<S> {
    cochain: DbCochain<S>,
    global: bool,
}

impl<S: Scalar> U1Connection<S> {
    pub fn new(cover: &GoodCover, x: DbCochain<S>, tol: f64) -> Result<Self> {
        if (x.truncation(), x.diagonal()) != (1, 1) {
            return Err(Error::Shape("a U(1) connection has k=1, l=1".into()));
        }
        let check = is_cocycle(cover, &x, tol)?;
        if !check.holds {
            return Err(Error::NotCocycle(format!("descent equations fail by {:e}", check.residual)));
        }
        let global = x.forms(1).iter().all(Cochain::is_zero) && x.integers().iter().all(|&n| n == 0);
        Ok(U1Connection { cochain: x, global })
    }

    /// Connection given by one global 1-form.
    pub fn global(cx: &SimplicialComplex, cover: &GoodCover, a: &Cochain<S>) -> Result<Self> {
        if a.degree != 1 {
            return Err(Error::DegreeMismatch { expected: 1, found: a.degree as i64 });
        }
        Ok(U1Connection { cochain: lift(cx, cover, a, 1, 1)?, global: true })
    }

    pub fn cochain(&self) -> &DbCochain<S> {
        &self.cochain
    }

    pub fn is_global(&self) -> bool {
        self.global
    }

    /// The global 1-form, when transition data vanish.
    pub fn global_form(&self, cx: &SimplicialComplex, cover: &GoodCover) -> Result<Cochain<S>> {
        if !self.global {
            return Err(Error::NotGlobal("connection has nonzero transition data".into()));
        }
        glue(cx, cover, self.cochain.forms(0), 0.0)
    }

    pub fn curvature(&self, cx: &SimplicialComplex, cover: &GoodCover) -> Result<Cochain<S>> {
        curvature(cx, cover, &self.cochain)
    }
}

/// A DB 0-cocycle `(φ_i, m_ij)` with `φ_i - φ_j = -2π m_ij` on overlaps.
#[derive(Debug, Clone, PartialEq)]
pub struct MinusOneGerbeConnection<S> {
    cochain: DbCochain<S>,
}

impl<S: Scalar> MinusOneGerbeConnection<S> {
    pub fn new(cover: &GoodCover, x: DbCochain<S>, tol: f64) -> Result<Self> {
        if (x.truncation(), x.diagonal()) != (0, 0) {
            return Err(Error::Shape("a (-1)-gerbe connection has k=0, l=0".into()));
        }
        let check = is_cocycle(cover, &x, tol)?;
        if !check.holds {
            return Err(Error::NotCocycle(format!("edge-mode descent fails by {:e}", check.residual)));
        }
        Ok(MinusOneGerbeConnection { cochain: x })
    }

    /// A global function viewed as a connection with vanishing jumps.
    pub fn global(cx: &SimplicialComplex, cover: &GoodCover, phi: &Cochain<S>) -> Result<Self> {
        if phi.degree != 0 {
            return Err(Error::DegreeMismatch { expected: 0, found: phi.degree as i64 });
        }
        Ok(MinusOneGerbeConnection { cochain: lift(cx, cover, phi, 0, 0)? })
    }

    /// `φ_i(v) = g(v) + 2π m_{i0(v) i}` with `i0(v)` the lowest chart through `v`; a
    /// cocycle whenever `m` is a Čech cocycle.
    pub fn from_jumps(cx: &SimplicialComplex, cover: &GoodCover, m: &[i64], g: &Cochain<S>) -> Result<Self> {
        let nerve = cover.nerve();
        if m.len() != nerve.len(1) {
            return Err(Error::Shape(format!("expected {} jumps, found {}", nerve.len(1), m.len())));
        }
        let mut lowest = vec![usize::MAX; cx.len(0)];
        for i in (0..cover.n_charts()).rev() {
            for &v in cover.chart(i).simplices(0) {
                lowest[v] = i;
            }
        }
        let jump = |a: usize, b: usize| -> i64 {
            match a.cmp(&b) {
                std::cmp::Ordering::Equal => 0,
                std::cmp::Ordering::Less => m[nerve.find(&[a, b]).expect("overlap")],
                std::cmp::Ordering::Greater => -m[nerve.find(&[b, a]).expect("overlap")],
            }
        };
        let mut x = DbCochain::zero(cover, 0, 0)?;
        for (i, f) in x.forms_mut(0).expect("function layer").iter_mut().enumerate() {
            for (local, &v) in cover.chart(i).simplices(0).iter().enumerate() {
                f.values[local] = g.values[v].clone() + S::from_winding(jump(lowest[v], i));
            }
        }
        *x.integers_mut() = m.to_vec();
        Self::new(cover, x, 1e-9)
    }

    pub fn cochain(&self) -> &DbCochain<S> {
        &self.cochain
    }

    pub fn locals(&self) -> &[Cochain<S>] {
        self.cochain.forms(0)
    }

    /// Jumps `m_ij` in units of 2π.
    pub fn jumps(&self) -> &[i64] {
        self.cochain.integers()
    }

    /// Gauge transformation by integers per chart: `φ_i → φ_i - 2πn_i`, `m_ij → m_ij + n_i - n_j`.
    pub fn gauge_transform(&self, cover: &GoodCover, n: &[i64]) -> Result<Self> {
        if n.len() != cover.n_charts() {
            return Err(Error::Shape(format!("expected {} chart integers, found {}", cover.n_charts(), n.len())));
        }
        let mut q = DbCochain::zero(cover, 0, -1)?;
        *q.integers_mut() = n.to_vec();
        let cochain = crate::db::gauge_transform(cover, &self.cochain, &q)?;
        Ok(MinusOneGerbeConnection { cochain })
    }

    /// `dφ_i`, glued into one global 1-form.
    pub fn differential(&self, cx: &SimplicialComplex, cover: &GoodCover, tol: f64) -> Result<Cochain<S>> {
        let family = self
            .locals()
            .iter()
            .enumerate()
            .map(|(i, f)| cover.chart(i).coboundary(f))
            .collect::<Result<Vec<_>>>()?;
        glue(cx, cover, &family, tol)
    }
}

/// An object of the extended field groupoid.
#[derive(Debug, Clone, PartialEq)]
pub enum ExtendedField<S> {
    /// Global potential and global edge mode, both on the annulus slice.
    Trivial { potential: Cochain<S>, edge_mode: Cochain<S> },
    /// Connection on the annulus and edge mode over a (-1)-gerbe on its boundary circle.
    Gerbe { connection: U1Connection<S>, edge_mode: MinusOneGerbeConnection<S> },
}

impl<S: Scalar> ExtendedField<S> {
    pub fn trivial(slice: &BoundarySlice, potential: Cochain<S>, edge_mode: Cochain<S>) -> Result<Self> {
        if potential.degree != 1 || potential.len() != slice.bulk.len(1) {
            return Err(Error::Shape("potential must be a 1-cochain on the annulus".into()));
        }
        if edge_mode.degree != 0 || edge_mode.len() != slice.bulk.len(0) {
            return Err(Error::Shape("edge mode must be a 0-cochain on the annulus".into()));
        }
        Ok(ExtendedField::Trivial { potential, edge_mode })
    }

    pub fn gerbe(slice: &BoundarySlice, connection: U1Connection<S>, edge_mode: MinusOneGerbeConnection<S>) -> Result<Self> {
        connection.cochain().validate(&slice.bulk_cover)?;
        edge_mode.cochain().validate(&slice.edge_cover)?;
        Ok(ExtendedField::Gerbe { connection, edge_mode })
    }
}

/// A tangent direction in field space. Every component is globally defined; in particular
/// the integer jumps of an edge mode never vary.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FieldVariation<S> {
    /// `δA`, a 1-cochain on the annulus.
    pub potential: Option<Cochain<S>>,
    /// `δφ`, a 0-cochain on the annulus.
    pub edge_mode: Option<Cochain<S>>,
    /// `δÃ`, a 1-cochain on the annulus.
    pub dual_potential: Option<Cochain<S>>,
    /// `δφ̃`, a 0-cochain on the boundary circle.
    pub dual_edge_mode: Option<Cochain<S>>,
}

impl<S: Scalar> FieldVariation<S> {
    pub fn new(
        slice: &BoundarySlice,
        potential: Option<Cochain<S>>,
        edge_mode: Option<Cochain<S>>,
        dual_potential: Option<Cochain<S>>,
        dual_edge_mode: Option<Cochain<S>>,
    ) -> Result<Self> {
        let check = |c: &Option<Cochain<S>>, cx: &SimplicialComplex, degree: usize, what: &str| -> Result<()> {
            match c {
                Some(c) if c.degree != degree || c.len() != cx.len(degree) => {
                    Err(Error::WrongStratum(format!("{what} must be a {degree}-cochain on its stratum")))
                }
                _ => Ok(()),
            }
        };
        check(&potential, &slice.bulk, 1, "δA")?;
        check(&edge_mode, &slice.bulk, 0, "δφ")?;
        check(&dual_potential, &slice.bulk, 1, "δÃ")?;
        check(&dual_edge_mode, &slice.edge, 0, "δφ̃")?;
        Ok(FieldVariation { potential, edge_mode, dual_potential, dual_edge_mode })
    }

    /// Variation of the dual edge mode given chart-wise. Rejects any change of the jumps
    /// and any chart family that does not glue.
    pub fn from_edge_mode_variation(slice: &BoundarySlice, delta: &DbCochain<S>, tol: f64) -> Result<Self> {
        if (delta.truncation(), delta.diagonal()) != (0, 0) {
            return Err(Error::Shape("edge-mode variation has k=0, l=0".into()));
        }
        if delta.integers().iter().any(|&n| n != 0) {
            return Err(Error::InvalidParameter("variations cannot change the integer jumps".into()));
        }
        let glued = glue(&slice.edge, &slice.edge_cover, delta.forms(0), tol)?;
        Self::new(slice, None, None, None, Some(glued))
    }
}

/// The dressed field `a = dφ - A`.
pub fn dress<S: Scalar>(cx: &SimplicialComplex, cover: &GoodCover, a: &U1Connection<S>, phi: &Cochain<S>) -> Result<Cochain<S>> {
    let potential = a.global_form(cx, cover)?;
    dress_global(cx, &potential, phi)
}

pub(crate) fn dress_global<S: Scalar>(cx: &SimplicialComplex, potential: &Cochain<S>, phi: &Cochain<S>) -> Result<Cochain<S>> {
    cx.full().coboundary(phi)?.sub(potential)
}

/// `D φ̃ - Ã = (dφ̃_i - Ã_i, -Λ̃_ij, -ñ_ijk)` on a shared cover.
pub fn covariant_derivative<S: Scalar>(
    cover: &GoodCover,
    phi: &MinusOneGerbeConnection<S>,
    a: &U1Connection<S>,
) -> Result<DbCochain<S>> {
    phi.cochain().validate(cover)?;
    a.cochain().validate(cover)?;
    let as_k1 = DbCochain::from_layers(cover, 1, 0, phi.cochain().layers().to_vec())?;
    db_differential(cover, 1, 0, &as_k1)?.sub(a.cochain())
}

/// Winding `w` with `2πw = ∫ dφ̃ = -Σ m̃_{i,i+1}` around the circle, in loop order.
pub fn winding_number<S: Scalar>(cover: &GoodCover, phi: &MinusOneGerbeConnection<S>) -> Result<i64> {
    let arcs = cover
        .arcs()
        .ok_or_else(|| Error::WrongStratum("winding numbers need a circle stratum".into()))?;
    if cover.nerve().dim() != 1 || cover.chart(0).dim() != 1 {
        return Err(Error::WrongStratum("winding numbers need a circle stratum".into()));
    }
    phi.cochain().validate(cover)?;
    let m = phi.jumps();
    Ok(-arcs.loop_pairs(cover.nerve()).iter().map(|&(e, eps)| eps * m[e]).sum::<i64>())
}

/// `Σ_i ∫_{arc_i} dφ̃_i`, summed over the arc decomposition of the circle.
pub fn arc_integral<S: Scalar>(cx: &SimplicialComplex, cover: &GoodCover, phi: &MinusOneGerbeConnection<S>) -> Result<S> {
    let arcs = cover
        .arcs()
        .ok_or_else(|| Error::WrongStratum("arc integrals need a circle stratum".into()))?;
    let mut total = S::zero();
    for (i, f) in phi.locals().iter().enumerate() {
        let chain = arcs.arc_chain(cx, cover.chart(i), i)?;
        total += crate::complex::integrate(&cover.chart(i).coboundary(f)?, &chain)?;
    }
    Ok(total)
}

/// Čech class of the jumps in `H¹(Z)`. On a circle the generator is oriented so that the
/// class coordinate equals the winding number.
pub fn gerbe_class<S: Scalar>(cover: &GoodCover, phi: &MinusOneGerbeConnection<S>) -> Result<CohomologyClass> {
    let h1 = CechCohomology::new(cover.nerve(), 1);
    let mut class = h1.class_of(phi.jumps())?;
    if let (Some(arcs), 1) = (cover.arcs(), h1.group().free_rank) {
        let g = h1.representative(&[1])?;
        let w: i64 = -arcs.loop_pairs(cover.nerve()).iter().map(|&(e, eps)| eps * g[e]).sum::<i64>();
        if w < 0 {
            class.free[0] = -class.free[0];
        }
    }
    Ok(class)
}

/// Whether `eps` is a morphism `src → dst` of the extended field groupoid.
///
/// For the gerbe form, `eps` is a DB 0-cocycle on the annulus and the morphism is
/// `(Ã, φ̃) → (Ã + D eps, φ̃ + eps|)`. For the trivial form, `eps` must have no jumps and
/// glue to a global function `ε` with `(A, φ) → (A + dε, φ + ε)`.
pub fn is_morphism<S: Scalar>(
    slice: &BoundarySlice,
    src: &ExtendedField<S>,
    dst: &ExtendedField<S>,
    eps: &DbCochain<S>,
    tol: f64,
) -> Result<bool> {
    if (eps.truncation(), eps.diagonal()) != (0, 0) || eps.validate(&slice.bulk_cover).is_err() {
        return Ok(false);
    }
    if !is_cocycle(&slice.bulk_cover, eps, tol)?.holds {
        return Ok(false);
    }
    let close = |a: &Cochain<S>, b: &Cochain<S>| a.sub(b).map(|d| d.max_abs() <= tol && (!S::EXACT || d.is_zero()));
    match (src, dst) {
        (
            ExtendedField::Trivial { potential: a0, edge_mode: p0 },
            ExtendedField::Trivial { potential: a1, edge_mode: p1 },
        ) => {
            if eps.integers().iter().any(|&n| n != 0) {
                return Ok(false);
            }
            let Ok(e) = glue(&slice.bulk, &slice.bulk_cover, eps.forms(0), tol) else { return Ok(false) };
            Ok(close(&a0.add(&slice.bulk.full().coboundary(&e)?)?, a1)? && close(&p0.add(&e)?, p1)?)
        }
        (
            ExtendedField::Gerbe { connection: c0, edge_mode: f0 },
            ExtendedField::Gerbe { connection: c1, edge_mode: f1 },
        ) => {
            let as_k1 = DbCochain::from_layers(&slice.bulk_cover, 1, 0, eps.layers().to_vec())?;
            let moved = c0.cochain().add(&db_differential(&slice.bulk_cover, 1, 0, &as_k1)?)?;
            let conn_ok = moved.sub(c1.cochain())?.max_abs() <= tol && (!S::EXACT || moved == *c1.cochain());
            let shifted = f0.cochain().add(&slice.trace_db(eps)?)?;
            let edge_ok = shifted.sub(f1.cochain())?.max_abs() <= tol && (!S::EXACT || shifted == *f1.cochain());
            Ok(conn_ok && edge_ok)
        }
        _ => Ok(false),
    }
}

/// Applies a morphism to an extended field (no validity check).
pub fn apply_morphism<S: Scalar>(slice: &BoundarySlice, src: &ExtendedField<S>, eps: &DbCochain<S>) -> Result<ExtendedField<S>> {
    match src {
        ExtendedField::Trivial { potential, edge_mode } => {
            let e = glue(&slice.bulk, &slice.bulk_cover, eps.forms(0), f64::INFINITY)?;
            Ok(ExtendedField::Trivial {
                potential: potential.add(&slice.bulk.full().coboundary(&e)?)?,
                edge_mode: edge_mode.add(&e)?,
            })
        }
        ExtendedField::Gerbe { connection, edge_mode } => {
            let as_k1 = DbCochain::from_layers(&slice.bulk_cover, 1, 0, eps.layers().to_vec())?;
            let moved = connection.cochain().add(&db_differential(&slice.bulk_cover, 1, 0, &as_k1)?)?;
            let global = connection.is_global() && moved.forms(1).iter().all(Cochain::is_zero);
            Ok(ExtendedField::Gerbe {
                connection: U1Connection { cochain: moved, global },
                edge_mode: MinusOneGerbeConnection { cochain: edge_mode.cochain().add(&slice.trace_db(eps)?)? },
            })
        }
    }
}

/// A morphism-valid gauge parameter on the annulus: a global function plus integer shifts
/// per chart, `ε_i = ε - 2πν_i`, `n_ij = ν_i - ν_j`.
pub fn gauge_parameter<S: Scalar>(slice: &BoundarySlice, eps: &Cochain<S>, nu: &[i64]) -> Result<DbCochain<S>> {
    let cover = &slice.bulk_cover;
    if nu.len() != cover.n_charts() {
        return Err(Error::Shape(format!("expected {} chart integers, found {}", cover.n_charts(), nu.len())));
    }
    let mut q = DbCochain::zero(cover, 0, -1)?;
    *q.integers_mut() = nu.to_vec();
    lift(&slice.bulk, cover, eps, 0, 0)?.add(&db_differential(cover, 0, -1, &q)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::db::random_cochain;
    use crate::scalar::Rational;
    use rand::{Rng, SeedableRng};

    fn slice() -> BoundarySlice {
        BoundarySlice::annulus(3, 18, 1.0, 2.0, 4).unwrap()
    }

    fn random<R: Rng>(n: usize, degree: usize, rng: &mut R) -> Cochain<Rational> {
        Cochain::new(degree, (0..n).map(|_| Rational::new(rng.gen_range(-30..=30), rng.gen_range(1..=7))).collect())
    }

    #[test]
    fn dress_is_gauge_invariant_exactly() {
        let s = slice();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let a = random(s.bulk.len(1), 1, &mut rng);
        let phi = random(s.bulk.len(0), 0, &mut rng);
        let eps = random(s.bulk.len(0), 0, &mut rng);
        let conn = U1Connection::global(&s.bulk, &s.bulk_cover, &a).unwrap();
        let moved = U1Connection::global(&s.bulk, &s.bulk_cover, &a.add(&s.bulk.full().coboundary(&eps).unwrap()).unwrap()).unwrap();
        let d0 = dress(&s.bulk, &s.bulk_cover, &conn, &phi).unwrap();
        let d1 = dress(&s.bulk, &s.bulk_cover, &moved, &phi.add(&eps).unwrap()).unwrap();
        assert_eq!(d0, d1);
        let zero = U1Connection::global(&s.bulk, &s.bulk_cover, &s.bulk.full().zero(1)).unwrap();
        assert_eq!(dress(&s.bulk, &s.bulk_cover, &zero, &phi).unwrap(), s.bulk.full().coboundary(&phi).unwrap());
        let pure = U1Connection::global(&s.bulk, &s.bulk_cover, &s.bulk.full().coboundary(&phi).unwrap()).unwrap();
        assert!(dress(&s.bulk, &s.bulk_cover, &pure, &phi).unwrap().is_zero());
    }

    #[test]
    fn dress_rejects_non_global_connection() {
        let s = slice();
        let mut x: DbCochain<Rational> = DbCochain::zero(&s.bulk_cover, 1, 1).unwrap();
        for f in x.forms_mut(1).unwrap() {
            *f = f.map(|_| Rational::from_integer(1));
        }
        // constant transition functions 1 turn with integer layer δ̌ of them: a cocycle
        let n = crate::complex::cech_coboundary_int(s.bulk_cover.nerve(), 1, &vec![1; s.bulk_cover.nerve().len(1)]).unwrap();
        *x.integers_mut() = n.iter().map(|v| -v).collect();
        let conn = U1Connection::new(&s.bulk_cover, x, 0.0).unwrap();
        assert!(!conn.is_global());
        let phi = s.bulk.full().zero(0);
        assert!(matches!(dress(&s.bulk, &s.bulk_cover, &conn, &phi), Err(Error::NotGlobal(_))));
    }

    #[test]
    fn winding_sign_convention() {
        let cx = crate::complex::build_complex(&MeshKind::Circle { n: 12 }).unwrap();
        let cover = build_cover(&cx, 3).unwrap();
        // loop-ordered jumps (1, 1, 1): pairs (0,1), (1,2), (2,0) -> sorted storage m_02 = -1
        let mut m = vec![0; 3];
        for (e, eps) in cover.arcs().unwrap().loop_pairs(cover.nerve()) {
            m[e] = eps;
        }
        let g: Cochain<Rational> = cx.full().zero(0);
        let phi = MinusOneGerbeConnection::from_jumps(&cx, &cover, &m, &g).unwrap();
        assert_eq!(winding_number(&cover, &phi).unwrap(), -3);
        assert_eq!(arc_integral(&cx, &cover, &phi).unwrap(), Rational::from_integer(-3));
        assert_eq!(gerbe_class(&cover, &phi).unwrap().free, vec![-3]);
        let global = MinusOneGerbeConnection::global(&cx, &cover, &g).unwrap();
        assert_eq!(winding_number(&cover, &global).unwrap(), 0);
        assert!(gerbe_class(&cover, &global).unwrap().is_trivial());
    }

    #[test]
    fn winding_is_gauge_invariant_and_telescopes() {
        let cx = crate::complex::build_complex(&MeshKind::Circle { n: 20 }).unwrap();
        let cover = build_cover(&cx, 5).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let m: Vec<i64> = (0..cover.nerve().len(1)).map(|_| rng.gen_range(-4..=4)).collect();
            let g = random(cx.len(0), 0, &mut rng);
            let phi = MinusOneGerbeConnection::from_jumps(&cx, &cover, &m, &g).unwrap();
            let w = winding_number(&cover, &phi).unwrap();
            assert_eq!(arc_integral(&cx, &cover, &phi).unwrap(), Rational::from_integer(w));
            assert_eq!(gerbe_class(&cover, &phi).unwrap().free, vec![w]);
            let n: Vec<i64> = (0..5).map(|_| rng.gen_range(-9..=9)).collect();
            let moved = phi.gauge_transform(&cover, &n).unwrap();
            assert_eq!(winding_number(&cover, &moved).unwrap(), w);
            assert_eq!(gerbe_class(&cover, &moved).unwrap().free, vec![w]);
        }
    }

    #[test]
    fn non_circle_strata_are_rejected() {
        let s = slice();
        let g: Cochain<Rational> = s.bulk.full().zero(0);
        let phi = MinusOneGerbeConnection::global(&s.bulk, &s.bulk_cover, &g).unwrap();
        assert!(matches!(winding_number(&s.bulk_cover, &phi), Err(Error::WrongStratum(_))));
    }

    #[test]
    fn covariant_derivative_layers() {
        let s = slice();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
        let cover = &s.edge_cover;
        let m: Vec<i64> = (0..cover.nerve().len(1)).map(|_| rng.gen_range(-3..=3)).collect();
        let phi = MinusOneGerbeConnection::from_jumps(&s.edge, cover, &m, &random(s.edge.len(0), 0, &mut rng)).unwrap();
        let zero = U1Connection::global(&s.edge, cover, &s.edge.full().zero(1)).unwrap();
        let d0 = covariant_derivative(cover, &phi, &zero).unwrap();
        for (i, f) in phi.locals().iter().enumerate() {
            assert_eq!(d0.forms(0)[i], cover.chart(i).coboundary(f).unwrap());
        }
        assert!(d0.forms(1).iter().all(Cochain::is_zero));
        // random cocycle connection: layers are (dφ_i - A_i, -Λ_ij, -n_ijk)
        let x = random_cochain(cover, 1, 0, &mut rng).unwrap();
        let a = U1Connection::new(cover, db_differential(cover, 1, 0, &x).unwrap(), 0.0).unwrap();
        let d = covariant_derivative(cover, &phi, &a).unwrap();
        for (i, f) in phi.locals().iter().enumerate() {
            assert_eq!(d.forms(0)[i], cover.chart(i).coboundary(f).unwrap().sub(&a.cochain().forms(0)[i]).unwrap());
        }
        for (e, l) in a.cochain().forms(1).iter().enumerate() {
            assert_eq!(d.forms(1)[e], l.neg());
        }
        // top layer glues to dφ̃ - Ã for a global Ã
        let at = random(s.edge.len(1), 1, &mut rng);
        let ga = U1Connection::global(&s.edge, cover, &at).unwrap();
        let d = covariant_derivative(cover, &phi, &ga).unwrap();
        let glued = glue(&s.edge, cover, d.forms(0), 0.0).unwrap();
        assert_eq!(glued, phi.differential(&s.edge, cover, 0.0).unwrap().sub(&at).unwrap());
    }

    #[test]
    fn morphisms_of_the_extended_groupoid() {
        let s = slice();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(8);
        let at = random(s.bulk.len(1), 1, &mut rng);
        let conn = U1Connection::global(&s.bulk, &s.bulk_cover, &at).unwrap();
        let m: Vec<i64> = (0..s.edge_cover.nerve().len(1)).map(|_| rng.gen_range(-3..=3)).collect();
        let phi = MinusOneGerbeConnection::from_jumps(&s.edge, &s.edge_cover, &m, &random(s.edge.len(0), 0, &mut rng)).unwrap();
        let src = ExtendedField::gerbe(&s, conn, phi).unwrap();
        let zero = DbCochain::zero(&s.bulk_cover, 0, 0).unwrap();
        assert!(is_morphism(&s, &src, &src, &zero, 0.0).unwrap());
        let nu: Vec<i64> = (0..s.bulk_cover.n_charts()).map(|_| rng.gen_range(-5..=5)).collect();
        let eps = gauge_parameter(&s, &random(s.bulk.len(0), 0, &mut rng), &nu).unwrap();
        let dst = apply_morphism(&s, &src, &eps).unwrap();
        assert!(is_morphism(&s, &src, &dst, &eps, 0.0).unwrap());
        let ExtendedField::Gerbe { connection, edge_mode } = &dst else { unreachable!() };
        assert_eq!(winding_number(&s.edge_cover, edge_mode).unwrap(), winding_number(&s.edge_cover, match &src {
            ExtendedField::Gerbe { edge_mode, .. } => edge_mode,
            _ => unreachable!(),
        }).unwrap());
        let mut bent = edge_mode.cochain().clone();
        bent.forms_mut(0).unwrap()[0].values[0] += Rational::new(1, 3);
        let off = ExtendedField::Gerbe {
            connection: connection.clone(),
            edge_mode: MinusOneGerbeConnection { cochain: bent },
        };
        assert!(!is_morphism(&s, &src, &off, &eps, 0.0).unwrap());

        let pot = random(s.bulk.len(1), 1, &mut rng);
        let em = random(s.bulk.len(0), 0, &mut rng);
        let triv = ExtendedField::trivial(&s, pot, em).unwrap();
        let e = gauge_parameter(&s, &random(s.bulk.len(0), 0, &mut rng), &vec![0; s.bulk_cover.n_charts()]).unwrap();
        let moved = apply_morphism(&s, &triv, &e).unwrap();
        assert!(is_morphism(&s, &triv, &moved, &e, 0.0).unwrap());
        assert!(!is_morphism(&s, &triv, &moved, &zero, 0.0).unwrap());
    }

    #[test]
    fn variations_never_move_jumps() {
        let s = slice();
        let mut delta: DbCochain<Rational> = DbCochain::zero(&s.edge_cover, 0, 0).unwrap();
        delta.integers_mut()[0] = 1;
        assert!(FieldVariation::from_edge_mode_variation(&s, &delta, 0.0).is_err());
        let g: Cochain<Rational> = s.edge.full().constant(Rational::new(2, 3));
        let ok = MinusOneGerbeConnection::global(&s.edge, &s.edge_cover, &g).unwrap();
        let v = FieldVariation::from_edge_mode_variation(&s, ok.cochain(), 0.0).unwrap();
        assert_eq!(v.dual_edge_mode, Some(g));
        let mut bad = ok.cochain().clone();
        bad.forms_mut(0).unwrap()[1].values[0] += Rational::from_integer(1);
        assert!(FieldVariation::from_edge_mode_variation(&s, &bad, 0.0).is_err());
    }

    #[test]
    fn trace_matches_outer_ring() {
        let s = slice();
        let f: Cochain<f64> = Cochain::new(0, s.bulk.coords().iter().map(|p| p[0] + 2.0 * p[1]).collect());
        let t = s.trace(&f).unwrap();
        for (i, p) in s.edge.coords().iter().enumerate() {
            assert_eq!(t.values[i], p[0] + 2.0 * p[1]);
        }
        let df = s.trace(&s.bulk.full().coboundary(&f).unwrap()).unwrap();
        assert_eq!(df, s.edge.full().coboundary(&t).unwrap());
    }
}
