//! Integer cohomology of nerves and complexes, DB class invariants and the two
//! short exact sequences of differential cohomology.

mod gauge;
mod ses;
pub mod snf;

use std::collections::VecDeque;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

pub use gauge::{
    circle_holonomy, connection_with_class, split_global_form, trivialize, GaugeSolution, Obstruction, Triviality,
};
pub use ses::{
    apply_ses_map, curvature, solve_top_exact, verify_exactness, ExactnessReport, NodeCheck, SesInput, SesMap,
    SesOutput,
};
pub use snf::{determinant, smith_normal_form, solve_integer, IntegerMatrix, SnfResult};

use crate::complex::{Chain, Cochain, Nerve, Region, SimplicialComplex};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A finitely generated abelian group `Z^free_rank ⊕ ⊕ Z/t`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CohomologyGroup {
    pub free_rank: usize,
    pub torsion: Vec<i64>,
}

impl CohomologyGroup {
    pub fn zero() -> Self {
        CohomologyGroup { free_rank: 0, torsion: Vec::new() }
    }

    pub fn integers() -> Self {
        CohomologyGroup { free_rank: 1, torsion: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

impl std::fmt::Display for CohomologyGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut parts: Vec<String> = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".into()),
            r => parts.push(format!("Z^{r}")),
        }
        parts.extend(self.torsion.iter().map(|t| format!("Z/{t}")));
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Coordinates of a cohomology class: free part in a fixed basis, torsion residues.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CohomologyClass {
    pub free: Vec<i64>,
    pub torsion: Vec<i64>,
}

impl CohomologyClass {
    pub fn is_trivial(&self) -> bool {
        self.free.iter().chain(&self.torsion).all(|&v| v == 0)
    }
}

fn big_to_i64(v: &BigInt) -> Result<i64> {
    v.to_i64().ok_or_else(|| Error::InvalidParameter("integer coordinate overflows i64".into()))
}

fn mat_vec(m: &[Vec<BigInt>], x: &[BigInt]) -> Vec<BigInt> {
    m.iter().map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum()).collect()
}

/// Integer Čech cohomology of a nerve in one degree, with class coordinates.
#[derive(Debug, Clone)]
pub struct CechCohomology {
    degree: usize,
    group: CohomologyGroup,
    cocycle: IntegerMatrix,
    left: Vec<Vec<BigInt>>,
    left_inv: Vec<Vec<BigInt>>,
    factors: Vec<BigInt>,
    kernel_right: Vec<Vec<BigInt>>,
    kernel_right_inv: Vec<Vec<BigInt>>,
    kernel_rank: usize,
}

fn coboundary_matrix(nerve: &Nerve, q: usize) -> IntegerMatrix {
    IntegerMatrix::from_rows(&nerve.coboundary_matrix(q), nerve.len(q))
}

impl CechCohomology {
    pub fn new(nerve: &Nerve, q: usize) -> Self {
        let n = nerve.len(q);
        let before = if q == 0 { IntegerMatrix::zeros(n, 0) } else { coboundary_matrix(nerve, q - 1) };
        let after = coboundary_matrix(nerve, q);
        let b = smith_normal_form(&before, true);
        let t = b.transforms.expect("tracked");
        let r = b.factors.len();
        // δ^q restricted to the complement of im δ^(q-1) in the adapted basis
        let tail: Vec<Vec<BigInt>> = t.left_inv.iter().map(|row| row[r..].to_vec()).collect();
        let after_big = snf::to_big_matrix(&after);
        let k = snf::big_matmul(&after_big, &tail, n, n - r);
        let k_int: Vec<Vec<i64>> = k.iter().map(|row| row.iter().map(|v| v.to_i64().expect("small")).collect()).collect();
        let ks = smith_normal_form(&IntegerMatrix::from_rows(&k_int, n - r), true);
        let kt = ks.transforms.expect("tracked");
        let kernel_rank = ks.factors.len();
        let group = CohomologyGroup {
            free_rank: n - r - kernel_rank,
            torsion: b.factors.iter().filter(|d| !d.is_one()).map(|d| d.to_i64().expect("small")).collect(),
        };
        CechCohomology {
            degree: q,
            group,
            cocycle: after,
            left: t.left,
            left_inv: t.left_inv,
            factors: b.factors,
            kernel_right: kt.right,
            kernel_right_inv: kt.right_inv,
            kernel_rank,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn group(&self) -> &CohomologyGroup {
        &self.group
    }

    /// Class of an integer cocycle; errors if `z` is not a cocycle.
    pub fn class_of(&self, z: &[i64]) -> Result<CohomologyClass> {
        if z.len() != self.cocycle.cols() {
            return Err(Error::Shape(format!("expected {} entries, found {}", self.cocycle.cols(), z.len())));
        }
        if self.cocycle.mul_vec(z).iter().any(|&v| v != 0) {
            return Err(Error::NotCocycle(format!("integer family in degree {} is not closed", self.degree)));
        }
        let zb: Vec<BigInt> = z.iter().map(|&v| BigInt::from(v)).collect();
        let y = mat_vec(&self.left, &zb);
        let r = self.factors.len();
        let torsion = self
            .factors
            .iter()
            .zip(&y)
            .filter(|(d, _)| !d.is_one())
            .map(|(d, v)| big_to_i64(&v.mod_floor(d)))
            .collect::<Result<_>>()?;
        let c = mat_vec(&self.kernel_right_inv, &y[r..]);
        debug_assert!(c[..self.kernel_rank].iter().all(Zero::is_zero));
        let free = c[self.kernel_rank..].iter().map(big_to_i64).collect::<Result<_>>()?;
        Ok(CohomologyClass { free, torsion })
    }

    /// A cocycle whose class has the given free coordinates and zero torsion part.
    pub fn representative(&self, free: &[i64]) -> Result<Vec<i64>> {
        if free.len() != self.group.free_rank {
            return Err(Error::Shape(format!("class has {} free coordinates, expected {}", free.len(), self.group.free_rank)));
        }
        let m = self.kernel_right.len();
        let mut c = vec![BigInt::zero(); m];
        for (i, &f) in free.iter().enumerate() {
            c[self.kernel_rank + i] = BigInt::from(f);
        }
        let y_tail = mat_vec(&self.kernel_right, &c);
        let r = self.factors.len();
        let tail: Vec<Vec<BigInt>> = self.left_inv.iter().map(|row| row[r..].to_vec()).collect();
        mat_vec(&tail, &y_tail).iter().map(big_to_i64).collect()
    }
}

/// `H^q` of a nerve with integer coefficients.
pub fn integral_cohomology(nerve: &Nerve, q: usize) -> CohomologyGroup {
    CechCohomology::new(nerve, q).group
}

/// Local ids of the simplices that survive elementary collapses of a region.
fn collapse(region: &Region, alive: &mut [Vec<bool>]) {
    let dim = alive.len() - 1;
    let mut cofaces: Vec<Vec<Vec<usize>>> = (0..=dim).map(|d| vec![Vec::new(); region.len(d)]).collect();
    for d in 1..=dim {
        for s in 0..region.len(d) {
            for &(f, _) in region.faces(d, s) {
                cofaces[d - 1][f].push(s);
            }
        }
    }
    let live_cofaces = |alive: &[Vec<bool>], d: usize, t: usize| -> Vec<usize> {
        cofaces[d][t].iter().copied().filter(|&s| alive[d + 1][s]).collect()
    };
    let mut queue: VecDeque<(usize, usize)> = (0..dim).flat_map(|d| (0..region.len(d)).map(move |t| (d, t))).collect();
    while let Some((d, t)) = queue.pop_front() {
        if !alive[d][t] {
            continue;
        }
        let co = live_cofaces(alive, d, t);
        if co.len() != 1 {
            continue;
        }
        let s = co[0];
        alive[d][t] = false;
        alive[d + 1][s] = false;
        for &(f, _) in region.faces(d + 1, s) {
            if f != t && alive[d][f] {
                queue.push_back((d, f));
            }
        }
        if d > 0 {
            for &(f, _) in region.faces(d, t) {
                if alive[d - 1][f] {
                    queue.push_back((d - 1, f));
                }
            }
        }
    }
}

struct Reduced {
    counts: Vec<usize>,
    boundary: Vec<IntegerMatrix>,
}

fn reduced(region: &Region, alive: &[Vec<bool>]) -> Reduced {
    let dim = alive.len() - 1;
    let ids: Vec<Vec<usize>> = alive.iter().map(|a| (0..a.len()).filter(|&i| a[i]).collect()).collect();
    let counts = ids.iter().map(Vec::len).collect();
    let mut boundary = vec![IntegerMatrix::zeros(0, 0)];
    for d in 1..=dim {
        let mut m = IntegerMatrix::zeros(ids[d - 1].len(), ids[d].len());
        for (c, &s) in ids[d].iter().enumerate() {
            for &(f, sign) in region.faces(d, s) {
                if let Ok(r) = ids[d - 1].binary_search(&f) {
                    m.set(r, c, sign);
                }
            }
        }
        boundary.push(m);
    }
    Reduced { counts, boundary }
}

/// Betti numbers and torsion of integer homology `H_d` for every `d`.
fn homology(red: &Reduced) -> Vec<CohomologyGroup> {
    let dim = red.counts.len() - 1;
    let snfs: Vec<SnfResult> = red.boundary.iter().map(|m| smith_normal_form(m, false)).collect();
    let rank = |d: usize| if d == 0 || d > dim { 0 } else { snfs[d].rank() };
    (0..=dim)
        .map(|d| CohomologyGroup {
            free_rank: red.counts[d] - rank(d) - rank(d + 1),
            torsion: if d < dim { snfs[d + 1].torsion().iter().map(|t| t.to_i64().unwrap_or(i64::MAX)).collect() } else { Vec::new() },
        })
        .collect()
}

/// Whether a region has the homology of a point.
///
/// Elementary collapses shrink the region first; the leftover is checked by Smith normal form.
pub fn is_acyclic(cx: &SimplicialComplex, region: &Region) -> bool {
    if region.is_empty() {
        return false;
    }
    let mut alive: Vec<Vec<bool>> = (0..=cx.dim()).map(|d| vec![true; region.len(d)]).collect();
    collapse(region, &mut alive);
    let h = homology(&reduced(region, &alive));
    h.iter().enumerate().all(|(d, g)| g.torsion.is_empty() && g.free_rank == usize::from(d == 0))
}

/// Simplicial cohomology `H^q(K; Z)` of a whole complex.
pub fn simplicial_cohomology(cx: &SimplicialComplex, q: usize) -> CohomologyGroup {
    if q > cx.dim() {
        return CohomologyGroup::zero();
    }
    let region = cx.full();
    let mut alive: Vec<Vec<bool>> = (0..=cx.dim()).map(|d| vec![true; region.len(d)]).collect();
    collapse(region, &mut alive);
    let h = homology(&reduced(region, &alive));
    CohomologyGroup {
        free_rank: h[q].free_rank,
        torsion: if q == 0 { Vec::new() } else { h[q - 1].torsion.clone() },
    }
}

/// Cycles generating the free part of `H_d(K; Z)` for `d ∈ {1, 2}`, as chains on the complex.
pub fn homology_basis(cx: &SimplicialComplex, d: usize) -> Result<Vec<Chain<i64>>> {
    let region = cx.full();
    match d {
        2 if cx.dim() == 2 => {
            let fc = cx.fundamental_class::<crate::scalar::Rational>();
            let closed = cx.boundary(&fc)?.coeffs.iter().all(Zero::is_zero);
            Ok(if closed { vec![Chain { degree: 2, coeffs: (0..cx.len(2)).map(|t| cx.orientation(t)).collect() }] } else { Vec::new() })
        }
        1 => {
            let mut alive: Vec<Vec<bool>> = (0..=cx.dim()).map(|k| vec![true; region.len(k)]).collect();
            collapse(region, &mut alive);
            while cx.dim() == 2 && alive[2].iter().any(|&a| a) {
                // the remaining triangles must carry a 2-cycle for the removal to keep H_1
                let mut bd = vec![0i64; cx.len(1)];
                for t in (0..cx.len(2)).filter(|&t| alive[2][t]) {
                    for &(e, s) in region.faces(2, t) {
                        bd[e] += s * cx.orientation(t);
                    }
                }
                if bd.iter().any(|&v| v != 0) {
                    return Err(Error::InvalidParameter("complex does not collapse onto a graph".into()));
                }
                let t = alive[2].iter().position(|&a| a).expect("checked");
                alive[2][t] = false;
                collapse(region, &mut alive);
            }
            Ok(graph_cycles(cx, &alive))
        }
        _ => Ok(Vec::new()),
    }
}

fn graph_cycles(cx: &SimplicialComplex, alive: &[Vec<bool>]) -> Vec<Chain<i64>> {
    let nv = cx.len(0);
    let mut adj: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nv];
    for e in (0..cx.len(1)).filter(|&e| alive[1][e]) {
        let s = cx.simplex(1, e);
        adj[s[0]].push((s[1], e));
        adj[s[1]].push((s[0], e));
    }
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nv];
    let mut seen = vec![false; nv];
    let mut tree = vec![false; cx.len(1)];
    for root in (0..nv).filter(|&v| alive[0][v]) {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let mut queue = VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &(w, e) in &adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    parent[w] = Some((v, e));
                    tree[e] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    let path_to_root = |mut v: usize, coeffs: &mut Vec<i64>, sign: i64| {
        while let Some((p, e)) = parent[v] {
            // traverse v -> p
            coeffs[e] += sign * if v < p { 1 } else { -1 };
            v = p;
        }
    };
    (0..cx.len(1))
        .filter(|&e| alive[1][e] && !tree[e])
        .map(|e| {
            let s = cx.simplex(1, e);
            let mut coeffs = vec![0i64; cx.len(1)];
            coeffs[e] += 1;
            // a -> b along e, then b -> root, then root -> a
            path_to_root(s[1], &mut coeffs, 1);
            path_to_root(s[0], &mut coeffs, -1);
            Chain { degree: 1, coeffs }
        })
        .collect()
}

/// Integral of a top-degree cochain over the oriented complex.
pub fn integrate_top<S: Scalar>(cx: &SimplicialComplex, c: &Cochain<S>) -> Result<S> {
    crate::complex::integrate(c, &cx.fundamental_class())
}

/// Result of testing a closed form for integral periods.
#[derive(Debug, Clone, PartialEq)]
pub struct PeriodCheck {
    pub closed: bool,
    /// Periods in winding units (`period / 2π`).
    pub periods: Vec<f64>,
    pub integral: bool,
}

/// Whether a global `d`-form is closed with periods in `2πZ` (numerical for reals, exact otherwise).
pub fn has_integral_periods<S: Scalar>(cx: &SimplicialComplex, form: &Cochain<S>, tol: f64) -> Result<PeriodCheck> {
    let dw = cx.full().coboundary(form)?;
    let closed = if S::EXACT { dw.is_zero() } else { dw.max_abs() <= tol };
    let mut periods = Vec::new();
    let mut integral = closed;
    for cycle in homology_basis(cx, form.degree)? {
        let chain = Chain { degree: cycle.degree, coeffs: cycle.coeffs.iter().map(|&c| S::from_i64(c)).collect() };
        let p = crate::complex::integrate(form, &chain)?;
        integral &= p.as_winding(tol).is_some();
        periods.push(p.to_real() / std::f64::consts::TAU);
    }
    Ok(PeriodCheck { closed, periods, integral })
}
