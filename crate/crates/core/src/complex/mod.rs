//! Simplicial complexes, chart subcomplexes and exact cochain calculus.
//!
//! Simplices are stored as sorted vertex tuples. The sorted order is the simplex's
//! orientation for every dimension except the top one, where [`SimplicialComplex::orientation`]
//! records the sign relating the sorted order to the orientation of the underlying
//! manifold.

mod cover;
mod mesh;

use std::collections::HashMap;

pub use cover::{build_cover, cech_coboundary, cech_coboundary_int, ArcDecomposition, GoodCover, Nerve};
pub use mesh::{build_complex, MeshKind};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A finite oriented simplicial complex of dimension at most 2.
#[derive(Debug, Clone)]
pub struct SimplicialComplex {
    kind: MeshKind,
    simplices: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
    orientation: Vec<i64>,
    coords: Vec<[f64; 3]>,
    coarse_weights: Option<CoarseWeights>,
    full: Region,
}

/// Integer barycentric weights of every vertex with respect to a coarse parent mesh.
#[derive(Debug, Clone)]
pub(crate) struct CoarseWeights {
    pub weights: Vec<Vec<(usize, u64)>>,
}

fn permutation_sign(v: &[usize]) -> i64 {
    let mut sign = 1;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if v[i] > v[j] {
                sign = -sign;
            }
        }
    }
    sign
}

impl SimplicialComplex {
    /// Builds the complex generated by a list of oriented top-dimensional simplices.
    ///
    /// Every face is added; the orientation sign of a top simplex is the parity of the
    /// permutation sorting its vertex list.
    pub fn from_oriented(kind: MeshKind, top: Vec<Vec<usize>>, coords: Vec<[f64; 3]>) -> Result<Self> {
        let dim = top
            .first()
            .map(|s| s.len().saturating_sub(1))
            .ok_or_else(|| Error::InvalidParameter("complex has no simplices".into()))?;
        if top.iter().any(|s| s.len() != dim + 1) {
            return Err(Error::InvalidParameter("top simplices have mixed dimensions".into()));
        }
        let mut sets: Vec<std::collections::BTreeMap<Vec<usize>, i64>> = vec![Default::default(); dim + 1];
        for s in &top {
            let mut sorted = s.clone();
            sorted.sort_unstable();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParameter(format!("degenerate simplex {s:?}")));
            }
            if sorted.iter().any(|&v| v >= coords.len()) {
                return Err(Error::InvalidParameter(format!("simplex {s:?} references a missing vertex")));
            }
            if sets[dim].insert(sorted.clone(), permutation_sign(s)).is_some() {
                return Err(Error::InvalidParameter(format!("duplicate simplex {s:?}")));
            }
            for d in 0..dim {
                for face in subsets(&sorted, d + 1) {
                    sets[d].entry(face).or_insert(1);
                }
            }
        }
        let orientation = sets[dim].values().copied().collect();
        let simplices: Vec<Vec<Vec<usize>>> = sets.into_iter().map(|m| m.into_keys().collect()).collect();
        let index = simplices
            .iter()
            .map(|list| list.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        let mut cx = SimplicialComplex {
            kind,
            simplices,
            index,
            orientation,
            coords,
            coarse_weights: None,
            full: Region::default(),
        };
        cx.full = Region::from_sets(&cx, (0..=dim).map(|d| (0..cx.len(d)).collect()).collect());
        Ok(cx)
    }

    pub fn kind(&self) -> &MeshKind {
        &self.kind
    }

    pub fn dim(&self) -> usize {
        self.simplices.len() - 1
    }

    /// Number of `d`-simplices (zero above the top dimension).
    pub fn len(&self, d: usize) -> usize {
        self.simplices.get(d).map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.simplices[0].is_empty()
    }

    pub fn simplex(&self, d: usize, i: usize) -> &[usize] {
        &self.simplices[d][i]
    }

    pub fn simplices(&self, d: usize) -> &[Vec<usize>] {
        self.simplices.get(d).map_or(&[], Vec::as_slice)
    }

    /// Index of a simplex given by its (unsorted) vertex list.
    pub fn find(&self, vertices: &[usize]) -> Option<usize> {
        let mut key = vertices.to_vec();
        key.sort_unstable();
        self.index.get(key.len().checked_sub(1)?)?.get(&key).copied()
    }

    /// Orientation sign of a top-dimensional simplex.
    pub fn orientation(&self, i: usize) -> i64 {
        self.orientation[i]
    }

    pub fn coords(&self) -> &[[f64; 3]] {
        &self.coords
    }

    pub(crate) fn coarse_weights(&self) -> Option<&CoarseWeights> {
        self.coarse_weights.as_ref()
    }

    pub(crate) fn set_coarse_weights(&mut self, w: CoarseWeights) {
        self.coarse_weights = Some(w);
    }

    /// The whole complex viewed as a region.
    pub fn full(&self) -> &Region {
        &self.full
    }

    pub fn euler_characteristic(&self) -> i64 {
        (0..=self.dim()).map(|d| if d % 2 == 0 { 1 } else { -1 } * self.len(d) as i64).sum()
    }

    /// Signed faces of a `d`-simplex: `(face index, (-1)^j)` for the face omitting vertex `j`.
    pub fn faces(&self, d: usize, i: usize) -> Vec<(usize, i64)> {
        self.full.faces[d][i].clone()
    }

    /// Sparse boundary matrix `∂_d` as `(row = (d-1)-simplex, col = d-simplex, sign)`.
    pub fn boundary_entries(&self, d: usize) -> Vec<(usize, usize, i64)> {
        if d == 0 || d > self.dim() {
            return Vec::new();
        }
        let mut out = Vec::new();
        for (col, faces) in self.full.faces[d].iter().enumerate() {
            out.extend(faces.iter().map(|&(row, s)| (row, col, s)));
        }
        out
    }

    /// Fundamental chain: top simplices weighted by their orientation.
    pub fn fundamental_class<S: Scalar>(&self) -> Chain<S> {
        Chain {
            degree: self.dim(),
            coeffs: self.orientation.iter().map(|&o| S::from_i64(o)).collect(),
        }
    }

    pub fn boundary<S: Scalar>(&self, c: &Chain<S>) -> Result<Chain<S>> {
        self.full.boundary(c)
    }

    /// Length of the longest edge.
    pub fn max_edge_length(&self) -> f64 {
        self.simplices(1)
            .iter()
            .map(|e| distance(&self.coords[e[0]], &self.coords[e[1]]))
            .fold(0.0, f64::max)
    }
}

pub fn distance(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn subsets(v: &[usize], size: usize) -> Vec<Vec<usize>> {
    fn go(v: &[usize], size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..v.len() {
            cur.push(v[i]);
            go(v, size, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(v, size, 0, &mut Vec::new(), &mut out);
    out
}

/// A subcomplex, given by sorted global simplex indices per dimension.
///
/// Cochains on a region are indexed by the position of each simplex in these lists.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Region {
    simplices: Vec<Vec<usize>>,
    faces: Vec<Vec<Vec<(usize, i64)>>>,
}

impl Region {
    fn from_sets(cx: &SimplicialComplex, simplices: Vec<Vec<usize>>) -> Self {
        let mut faces = vec![Vec::new()];
        for d in 1..simplices.len() {
            let lower = &simplices[d - 1];
            let list = simplices[d]
                .iter()
                .map(|&g| {
                    let s = &cx.simplices[d][g];
                    (0..s.len())
                        .map(|j| {
                            let mut f = s.clone();
                            f.remove(j);
                            let gf = cx.index[d - 1][&f];
                            let local = lower.binary_search(&gf).expect("region is closed under faces");
                            (local, if j % 2 == 0 { 1 } else { -1 })
                        })
                        .collect()
                })
                .collect();
            faces.push(list);
        }
        Region { simplices, faces }
    }

    /// Induced subcomplex on a vertex set: every simplex whose vertices all lie in the set.
    pub fn induced(cx: &SimplicialComplex, vertices: &[bool]) -> Self {
        let sets = (0..=cx.dim())
            .map(|d| {
                (0..cx.len(d))
                    .filter(|&i| cx.simplices[d][i].iter().all(|&v| vertices[v]))
                    .collect()
            })
            .collect();
        Region::from_sets(cx, sets)
    }

    /// Intersection of two regions of the same complex.
    pub fn intersect(&self, cx: &SimplicialComplex, other: &Region) -> Self {
        let sets = self
            .simplices
            .iter()
            .zip(&other.simplices)
            .map(|(a, b)| {
                let mut out = Vec::new();
                let (mut i, mut j) = (0, 0);
                while i < a.len() && j < b.len() {
                    match a[i].cmp(&b[j]) {
                        std::cmp::Ordering::Less => i += 1,
                        std::cmp::Ordering::Greater => j += 1,
                        std::cmp::Ordering::Equal => {
                            out.push(a[i]);
                            i += 1;
                            j += 1;
                        }
                    }
                }
                out
            })
            .collect();
        Region::from_sets(cx, sets)
    }

    pub fn dim(&self) -> usize {
        self.simplices.len().saturating_sub(1)
    }

    pub fn len(&self, d: usize) -> usize {
        self.simplices.get(d).map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len(0) == 0
    }

    /// Global indices of the region's `d`-simplices.
    pub fn simplices(&self, d: usize) -> &[usize] {
        self.simplices.get(d).map_or(&[], Vec::as_slice)
    }

    /// Local position of a global simplex index.
    pub fn local(&self, d: usize, global: usize) -> Option<usize> {
        self.simplices.get(d)?.binary_search(&global).ok()
    }

    /// Local signed faces of a local `d`-simplex.
    pub fn faces(&self, d: usize, i: usize) -> &[(usize, i64)] {
        &self.faces[d][i]
    }

    pub fn contains(&self, other: &Region) -> bool {
        (0..self.simplices.len()).all(|d| other.simplices(d).iter().all(|&g| self.local(d, g).is_some()))
    }

    pub fn zero<S: Scalar>(&self, degree: usize) -> Cochain<S> {
        Cochain::zero(degree, self.len(degree))
    }

    pub fn constant<S: Scalar>(&self, value: S) -> Cochain<S> {
        Cochain { degree: 0, values: vec![value; self.len(0)] }
    }

    fn check<S>(&self, c: &Cochain<S>) -> Result<()> {
        if c.values.len() != self.len(c.degree) {
            return Err(Error::Shape(format!(
                "degree-{} cochain has {} values, region has {} simplices",
                c.degree,
                c.values.len(),
                self.len(c.degree)
            )));
        }
        Ok(())
    }

    /// Exterior coboundary. Above the top dimension the result is the empty cochain.
    pub fn coboundary<S: Scalar>(&self, c: &Cochain<S>) -> Result<Cochain<S>> {
        self.check(c)?;
        let p = c.degree;
        if p >= self.dim() {
            return Ok(Cochain::zero(p + 1, 0));
        }
        let values = self.faces[p + 1]
            .iter()
            .map(|faces| {
                let mut acc = S::zero();
                for &(f, s) in faces {
                    if s > 0 {
                        acc += c.values[f].clone();
                    } else {
                        acc -= c.values[f].clone();
                    }
                }
                acc
            })
            .collect();
        Ok(Cochain { degree: p + 1, values })
    }

    pub fn boundary<S: Scalar>(&self, c: &Chain<S>) -> Result<Chain<S>> {
        if c.coeffs.len() != self.len(c.degree) {
            return Err(Error::Shape("chain length does not match the region".into()));
        }
        if c.degree == 0 {
            return Err(Error::InvalidParameter("boundary of a 0-chain".into()));
        }
        let mut out = vec![S::zero(); self.len(c.degree - 1)];
        for (i, coeff) in c.coeffs.iter().enumerate() {
            for &(f, s) in &self.faces[c.degree][i] {
                if s > 0 {
                    out[f] += coeff.clone();
                } else {
                    out[f] -= coeff.clone();
                }
            }
        }
        Ok(Chain { degree: c.degree - 1, coeffs: out })
    }

    /// Restriction to a subregion by coefficient selection.
    pub fn restrict<S: Scalar>(&self, c: &Cochain<S>, sub: &Region) -> Result<Cochain<S>> {
        self.check(c)?;
        let values = sub
            .simplices(c.degree)
            .iter()
            .map(|&g| {
                self.local(c.degree, g)
                    .map(|i| c.values[i].clone())
                    .ok_or_else(|| Error::Shape("restriction target is not a subregion".into()))
            })
            .collect::<Result<_>>()?;
        Ok(Cochain { degree: c.degree, values })
    }

    /// Extends a cochain on a subregion by zero.
    pub fn extend<S: Scalar>(&self, c: &Cochain<S>, sub: &Region) -> Result<Cochain<S>> {
        sub.check(c)?;
        let mut out = self.zero(c.degree);
        for (i, &g) in sub.simplices(c.degree).iter().enumerate() {
            let j = self
                .local(c.degree, g)
                .ok_or_else(|| Error::Shape("extension source is not a subregion".into()))?;
            out.values[j] = c.values[i].clone();
        }
        Ok(out)
    }

    /// Simplicial cup product with the front-face/back-face rule.
    pub fn cup<S: Scalar>(&self, cx: &SimplicialComplex, a: &Cochain<S>, b: &Cochain<S>) -> Result<Cochain<S>> {
        self.check(a)?;
        self.check(b)?;
        let (p, q) = (a.degree, b.degree);
        if p + q > self.dim() {
            return Err(Error::DegreeMismatch { expected: self.dim() as i64, found: (p + q) as i64 });
        }
        let lookup = |d: usize, verts: &[usize]| -> usize {
            let g = cx.index[d][verts];
            self.local(d, g).expect("region is closed under faces")
        };
        let values = self.simplices[p + q]
            .iter()
            .map(|&g| {
                let s = &cx.simplices[p + q][g];
                a.values[lookup(p, &s[..=p])].clone() * b.values[lookup(q, &s[p..])].clone()
            })
            .collect();
        Ok(Cochain { degree: p + q, values })
    }

    /// Fundamental chain of the region's top-dimensional simplices (global orientation).
    pub fn fundamental_class<S: Scalar>(&self, cx: &SimplicialComplex) -> Chain<S> {
        let top = cx.dim();
        Chain {
            degree: top,
            coeffs: self.simplices(top).iter().map(|&g| S::from_i64(cx.orientation(g))).collect(),
        }
    }
}

/// Coefficients on the `degree`-simplices of a complex or region.
#[derive(Debug, Clone, PartialEq)]
pub struct Cochain<S> {
    pub degree: usize,
    pub values: Vec<S>,
}

impl<S: Scalar> Cochain<S> {
    pub fn zero(degree: usize, len: usize) -> Self {
        Cochain { degree, values: vec![S::zero(); len] }
    }

    pub fn new(degree: usize, values: Vec<S>) -> Self {
        Cochain { degree, values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Zero::is_zero)
    }

    fn same_shape(&self, o: &Self) -> Result<()> {
        if self.degree != o.degree || self.values.len() != o.values.len() {
            return Err(Error::Shape(format!(
                "cochain shapes differ: degree {} len {} vs degree {} len {}",
                self.degree,
                self.values.len(),
                o.degree,
                o.values.len()
            )));
        }
        Ok(())
    }

    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        Ok(self.zip(o, |a, b| a.clone() + b.clone()))
    }

    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        Ok(self.zip(o, |a, b| a.clone() - b.clone()))
    }

    fn zip(&self, o: &Self, f: impl Fn(&S, &S) -> S) -> Self {
        Cochain { degree: self.degree, values: self.values.iter().zip(&o.values).map(|(a, b)| f(a, b)).collect() }
    }

    pub fn scale(&self, s: &S) -> Self {
        self.map(|v| v.clone() * s.clone())
    }

    pub fn neg(&self) -> Self {
        self.map(|v| -v.clone())
    }

    pub fn map(&self, f: impl Fn(&S) -> S) -> Self {
        Cochain { degree: self.degree, values: self.values.iter().map(f).collect() }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(Scalar::magnitude).fold(0.0, f64::max)
    }
}

use num_traits::Zero;

/// Formal combination of `degree`-simplices.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain<S> {
    pub degree: usize,
    pub coeffs: Vec<S>,
}

impl<S: Scalar> Chain<S> {
    pub fn from_ints(degree: usize, coeffs: &[i64]) -> Self {
        Chain { degree, coeffs: coeffs.iter().map(|&c| S::from_i64(c)).collect() }
    }

    /// A chain supported on a single simplex.
    pub fn simplex(degree: usize, len: usize, i: usize, sign: i64) -> Self {
        let mut coeffs = vec![S::zero(); len];
        coeffs[i] = S::from_i64(sign);
        Chain { degree, coeffs }
    }
}

/// Coboundary on the whole complex.
pub fn coboundary<S: Scalar>(cx: &SimplicialComplex, c: &Cochain<S>) -> Result<Cochain<S>> {
    cx.full().coboundary(c)
}

/// Pairing of a cochain with a chain.
pub fn integrate<S: Scalar>(c: &Cochain<S>, region: &Chain<S>) -> Result<S> {
    if c.degree != region.degree {
        return Err(Error::DegreeMismatch { expected: region.degree as i64, found: c.degree as i64 });
    }
    if c.values.len() != region.coeffs.len() {
        return Err(Error::Shape("cochain and chain live on different complexes".into()));
    }
    let mut acc = S::zero();
    for (v, w) in c.values.iter().zip(&region.coeffs) {
        if !w.is_zero() {
            acc += v.clone() * w.clone();
        }
    }
    Ok(acc)
}

/// Cup product on the whole complex.
pub fn cup_product<S: Scalar>(cx: &SimplicialComplex, a: &Cochain<S>, b: &Cochain<S>) -> Result<Cochain<S>> {
    cx.full().cup(cx, a, b)
}

/// Integral of a top-degree cochain over the fundamental class of a region.
pub fn integrate_region<S: Scalar>(cx: &SimplicialComplex, region: &Region, c: &Cochain<S>) -> Result<S> {
    integrate(c, &region.fundamental_class(cx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Rational;
    use proptest::prelude::*;

    fn circle(n: usize) -> SimplicialComplex {
        build_complex(&MeshKind::Circle { n }).unwrap()
    }

    #[test]
    fn circle_coboundary_of_indicator() {
        let cx = circle(4);
        let f = Cochain::new(0, vec![Rational::from_integer(1), 0.into(), 0.into(), 0.into()]);
        let df = coboundary(&cx, &f).unwrap();
        // edges sorted: (0,1) (0,3) (1,2) (2,3)
        assert_eq!(df.values, vec![(-1).into(), (-1).into(), 0.into(), 0.into()]);
        let total = integrate(&df, &cx.fundamental_class()).unwrap();
        assert_eq!(total, Rational::from_integer(0));
    }

    #[test]
    fn constant_has_zero_coboundary() {
        let cx = build_complex(&MeshKind::Annulus { n_r: 2, n_theta: 8, r_in: 1.0, r_out: 2.0, jitter: 0.0 }).unwrap();
        let c = cx.full().constant(Rational::new(3, 7));
        assert!(coboundary(&cx, &c).unwrap().is_zero());
    }

    #[test]
    fn top_degree_coboundary_is_empty() {
        let cx = circle(5);
        let c: Cochain<Rational> = Cochain::zero(1, 5);
        let dc = coboundary(&cx, &c).unwrap();
        assert_eq!((dc.degree, dc.len()), (2, 0));
    }

    #[test]
    fn uniform_edge_cochain_integrates_to_full_turn() {
        let n = 17;
        let cx = circle(n);
        let c = Cochain::new(1, vec![std::f64::consts::TAU / n as f64; n]);
        let oriented = cx.fundamental_class::<f64>();
        // the sorted wrap edge runs against the circle; its sampled value is reversed too
        let c = Cochain::new(1, c.values.iter().zip(&oriented.coeffs).map(|(v, o)| v * o).collect());
        let total = integrate(&c, &oriented).unwrap();
        assert!((total - std::f64::consts::TAU).abs() < 1e-12);
    }

    #[test]
    fn integrate_rejects_degree_mismatch() {
        let cx = circle(4);
        let c: Cochain<f64> = Cochain::zero(0, 4);
        assert!(matches!(integrate(&c, &cx.fundamental_class()), Err(Error::DegreeMismatch { .. })));
    }

    #[test]
    fn cup_of_functions_is_pointwise() {
        let cx = circle(4);
        let a = Cochain::new(0, vec![1.0, 2.0, 3.0, 4.0]);
        let b = Cochain::new(0, vec![2.0, 2.0, 0.5, -1.0]);
        assert_eq!(cup_product(&cx, &a, &b).unwrap().values, vec![2.0, 4.0, 1.5, -4.0]);
        let e: Cochain<f64> = Cochain::zero(1, 4);
        assert!(cup_product(&cx, &e, &e).is_err());
    }

    #[test]
    fn cup_of_coordinate_differentials_gives_area() {
        for n in [4, 8, 16] {
            let cx = build_complex(&MeshKind::Disk { n }).unwrap();
            let x = Cochain::new(0, cx.coords().iter().map(|p| p[0]).collect());
            let y = Cochain::new(0, cx.coords().iter().map(|p| p[1]).collect());
            let (dx, dy) = (coboundary(&cx, &x).unwrap(), coboundary(&cx, &y).unwrap());
            let area = integrate(&cup_product(&cx, &dx, &dy).unwrap(), &cx.fundamental_class()).unwrap();
            assert!((area - 1.0).abs() < 1e-12, "n={n}: {area}");
        }
    }

    #[test]
    fn radial_edge_integral_matches_quadrature() {
        let f = |r: f64| r.sin() * r;
        let exact = crate::quadrature::adaptive_simpson(f, 1.0, 2.0, 1e-13);
        let mut errs = Vec::new();
        for (n_r, n_t) in [(3, 24), (6, 48), (12, 96)] {
            let cx = build_complex(&MeshKind::Annulus { n_r, n_theta: n_t, r_in: 1.0, r_out: 2.0, jitter: 0.0 }).unwrap();
            // radial zig-zag path through the staggered rings; sample f(r) dr by the midpoint rule
            let mut coeffs = vec![0.0; cx.len(1)];
            let mut vals = vec![0.0; cx.len(1)];
            let mut v = 0;
            for j in 0..n_r {
                let next = (j + 1) * n_t;
                let e = cx.find(&[v, next]).unwrap();
                let (p, q) = (cx.coords()[v], cx.coords()[next]);
                let (r0, r1) = (p[0].hypot(p[1]), q[0].hypot(q[1]));
                coeffs[e] = if v < next { 1.0 } else { -1.0 };
                vals[e] = f(0.5 * (r0 + r1)) * (r1 - r0) * coeffs[e];
                v = next;
            }
            let total = integrate(&Cochain::new(1, vals), &Chain { degree: 1, coeffs }).unwrap();
            errs.push((total - exact).abs());
        }
        assert!(errs[2] < errs[1] && errs[1] < errs[0]);
        assert!(errs[1] / errs[2] > 3.0, "{errs:?}");
    }

    #[test]
    fn cup_converges_to_wedge_at_first_order() {
        // y^2 dx ∪ x dy against the wedge integral 1/6 over the unit square
        let mut ratios = Vec::new();
        let mut errs = Vec::new();
        for n in [4, 8, 16, 32] {
            let cx = build_complex(&MeshKind::Disk { n }).unwrap();
            let sample = |w: &dyn Fn([f64; 3], [f64; 3]) -> f64| {
                Cochain::new(1, (0..cx.len(1)).map(|e| {
                    let s = cx.simplex(1, e);
                    w(cx.coords()[s[0]], cx.coords()[s[1]])
                }).collect())
            };
            let a = sample(&|p, q| {
                let dy = q[1] - p[1];
                (q[0] - p[0]) * (p[1] * p[1] + p[1] * dy + dy * dy / 3.0)
            });
            let b = sample(&|p, q| (q[1] - p[1]) * 0.5 * (p[0] + q[0]));
            let total = integrate(&cup_product(&cx, &a, &b).unwrap(), &cx.fundamental_class()).unwrap();
            let err = (total - 1.0 / 6.0).abs();
            ratios.push(err / cx.max_edge_length());
            errs.push(err);
        }
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
        assert!(ratios[3] <= 1.5 * ratios[0], "{ratios:?}");
    }

    fn rational() -> impl Strategy<Value = Rational> {
        (-50i64..50, 1i64..9).prop_map(|(n, d)| Rational::new(n, d))
    }

    proptest! {
        #[test]
        fn coboundary_squares_to_zero(vals in prop::collection::vec(rational(), 42)) {
            let cx = build_complex(&MeshKind::Annulus { n_r: 2, n_theta: 7, r_in: 1.0, r_out: 2.0, jitter: 0.0 }).unwrap();
            let f = Cochain::new(0, vals[..cx.len(0)].to_vec());
            let ddf = coboundary(&cx, &coboundary(&cx, &f).unwrap()).unwrap();
            prop_assert!(ddf.is_zero());
        }

        #[test]
        fn boundary_squares_to_zero(vals in prop::collection::vec(rational(), 64)) {
            let cx = build_complex(&MeshKind::Disk { n: 3 }).unwrap();
            let c = Chain { degree: 2, coeffs: vals[..cx.len(2)].to_vec() };
            let bb = cx.boundary(&cx.boundary(&c).unwrap()).unwrap();
            prop_assert!(bb.coeffs.iter().all(|v| v.is_zero()));
        }

        #[test]
        fn discrete_stokes(fv in prop::collection::vec(rational(), 64), cv in prop::collection::vec(rational(), 64)) {
            let cx = build_complex(&MeshKind::Disk { n: 3 }).unwrap();
            let a = Cochain::new(1, fv[..cx.len(1)].to_vec());
            let r = Chain { degree: 2, coeffs: cv[..cx.len(2)].to_vec() };
            let lhs = integrate(&coboundary(&cx, &a).unwrap(), &r).unwrap();
            let rhs = integrate(&a, &cx.boundary(&r).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
