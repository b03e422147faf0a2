use std::collections::HashMap;

use super::{Chain, Cochain, MeshKind, Region, SimplicialComplex};
use crate::cohomology::is_acyclic;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Abstract simplicial complex on chart indices.
#[derive(Debug, Clone, Default)]
pub struct Nerve {
    simplices: Vec<Vec<Vec<usize>>>,
    index: Vec<HashMap<Vec<usize>, usize>>,
}

impl Nerve {
    pub fn from_simplices(simplices: Vec<Vec<Vec<usize>>>) -> Self {
        let index = simplices
            .iter()
            .map(|l| l.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect())
            .collect();
        Nerve { simplices, index }
    }

    /// Number of `q`-simplices.
    pub fn len(&self, q: usize) -> usize {
        self.simplices.get(q).map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len(0) == 0
    }

    pub fn dim(&self) -> usize {
        self.simplices.len().saturating_sub(1)
    }

    pub fn simplex(&self, q: usize, i: usize) -> &[usize] {
        &self.simplices[q][i]
    }

    pub fn simplices(&self, q: usize) -> &[Vec<usize>] {
        self.simplices.get(q).map_or(&[], Vec::as_slice)
    }

    pub fn find(&self, charts: &[usize]) -> Option<usize> {
        self.index.get(charts.len().checked_sub(1)?)?.get(charts).copied()
    }

    /// Counts of simplices per dimension.
    pub fn f_vector(&self) -> Vec<usize> {
        self.simplices.iter().map(Vec::len).collect()
    }

    /// Signed faces of a (q+1)-simplex: `(index of the q-face omitting position j, (-1)^(q+1-j))`.
    pub fn cech_faces(&self, q1: usize, i: usize) -> Vec<(usize, i64)> {
        let s = &self.simplices[q1][i];
        (0..s.len())
            .map(|j| {
                let mut f = s.clone();
                f.remove(j);
                (self.index[q1 - 1][&f], if (q1 - j) % 2 == 0 { 1 } else { -1 })
            })
            .collect()
    }

    /// Integer Čech coboundary `δ^q` as a dense `len(q+1) x len(q)` matrix.
    pub fn coboundary_matrix(&self, q: usize) -> Vec<Vec<i64>> {
        let mut m = vec![vec![0; self.len(q)]; self.len(q + 1)];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, s) in self.cech_faces(q + 1, r) {
                row[c] += s;
            }
        }
        m
    }
}

/// Oriented arcs of a circle (or of the inner ring of an annulus), one per chart.
///
/// Arc `i` runs from the point `points[i]` to `points[i+1]` inside chart `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArcDecomposition {
    pub points: Vec<usize>,
    pub arcs: Vec<Vec<[usize; 2]>>,
}

impl ArcDecomposition {
    /// Arc `i` as an edge chain on `region` (which must contain it).
    pub fn arc_chain<S: Scalar>(&self, cx: &SimplicialComplex, region: &Region, i: usize) -> Result<Chain<S>> {
        let mut coeffs = vec![S::zero(); region.len(1)];
        for &[a, b] in &self.arcs[i] {
            let g = cx.find(&[a, b]).ok_or_else(|| Error::Shape(format!("edge ({a},{b}) is missing")))?;
            let l = region
                .local(1, g)
                .ok_or_else(|| Error::Shape(format!("edge ({a},{b}) lies outside the region")))?;
            coeffs[l] += S::from_i64(if a < b { 1 } else { -1 });
        }
        Ok(Chain { degree: 1, coeffs })
    }

    /// Loop-order pairs `(i, i+1)` as `(nerve edge index, ε)` with `ε = -1` on the wrap pair.
    pub fn loop_pairs(&self, nerve: &Nerve) -> Vec<(usize, i64)> {
        let m = self.points.len();
        (0..m)
            .map(|i| {
                let j = (i + 1) % m;
                let (a, b, e) = if i < j { (i, j, 1) } else { (j, i, -1) };
                (nerve.find(&[a, b]).expect("consecutive charts overlap"), e)
            })
            .collect()
    }
}

/// A good cover of a complex by chart subcomplexes, with every nonempty intersection.
#[derive(Debug, Clone)]
pub struct GoodCover {
    nerve: Nerve,
    regions: Vec<Vec<Region>>,
    certificates: Vec<Vec<bool>>,
    arcs: Option<ArcDecomposition>,
}

impl GoodCover {
    /// Builds the cover from chart vertex sets. Fails if the charts miss a simplex or an
    /// intersection is not acyclic.
    pub fn from_vertex_sets(cx: &SimplicialComplex, charts: &[Vec<bool>], arcs: Option<ArcDecomposition>) -> Result<Self> {
        let base: Vec<Region> = charts.iter().map(|v| Region::induced(cx, v)).collect();
        for d in 0..=cx.dim() {
            for g in 0..cx.len(d) {
                if !base.iter().any(|r| r.local(d, g).is_some()) {
                    return Err(Error::NoGoodCover(format!("simplex {:?} lies in no chart", cx.simplex(d, g))));
                }
            }
        }
        if let Some(i) = base.iter().position(Region::is_empty) {
            return Err(Error::NoGoodCover(format!("chart {i} is empty")));
        }
        let mut simplices: Vec<Vec<Vec<usize>>> = vec![(0..base.len()).map(|i| vec![i]).collect()];
        let mut regions = vec![base.clone()];
        loop {
            let q = simplices.len() - 1;
            let mut next_s = Vec::new();
            let mut next_r = Vec::new();
            for (s, r) in simplices[q].iter().zip(&regions[q]) {
                for j in s[s.len() - 1] + 1..base.len() {
                    let inter = r.intersect(cx, &base[j]);
                    if !inter.is_empty() {
                        let mut t = s.clone();
                        t.push(j);
                        next_s.push(t);
                        next_r.push(inter);
                    }
                }
            }
            if next_s.is_empty() {
                break;
            }
            simplices.push(next_s);
            regions.push(next_r);
        }
        let certificates: Vec<Vec<bool>> = regions.iter().map(|l| l.iter().map(|r| is_acyclic(cx, r)).collect()).collect();
        for (q, list) in certificates.iter().enumerate() {
            if let Some(i) = list.iter().position(|c| !c) {
                return Err(Error::NoGoodCover(format!(
                    "intersection {:?} has nonvanishing reduced homology",
                    simplices[q][i]
                )));
            }
        }
        Ok(GoodCover { nerve: Nerve::from_simplices(simplices), regions, certificates, arcs })
    }

    pub fn nerve(&self) -> &Nerve {
        &self.nerve
    }

    pub fn n_charts(&self) -> usize {
        self.nerve.len(0)
    }

    pub fn chart(&self, i: usize) -> &Region {
        &self.regions[0][i]
    }

    /// Region of the intersection indexed by nerve simplex `(q, i)`.
    pub fn region(&self, q: usize, i: usize) -> &Region {
        &self.regions[q][i]
    }

    pub fn regions(&self, q: usize) -> &[Region] {
        self.regions.get(q).map_or(&[], Vec::as_slice)
    }

    pub fn certificates(&self) -> &[Vec<bool>] {
        &self.certificates
    }

    pub fn arcs(&self) -> Option<&ArcDecomposition> {
        self.arcs.as_ref()
    }
}

/// Čech coboundary of a family of cochains indexed by nerve `q`-simplices.
///
/// `(δ̌c)_{i0..i(q+1)} = Σ_j (-1)^(q+1-j) c_{i0..îj..i(q+1)}` restricted to the intersection.
pub fn cech_coboundary<S: Scalar>(cover: &GoodCover, q: usize, family: &[Cochain<S>]) -> Result<Vec<Cochain<S>>> {
    let nerve = cover.nerve();
    if family.len() != nerve.len(q) {
        return Err(Error::Shape(format!(
            "family has {} members but the nerve has {} simplices of degree {q}",
            family.len(),
            nerve.len(q)
        )));
    }
    let degree = family.first().map(|c| c.degree);
    if family.iter().any(|c| Some(c.degree) != degree) {
        return Err(Error::Shape("family members have different form degrees".into()));
    }
    let p = degree.unwrap_or(0);
    (0..nerve.len(q + 1))
        .map(|i| {
            let target = cover.region(q + 1, i);
            let mut acc = target.zero::<S>(p);
            for (f, s) in nerve.cech_faces(q + 1, i) {
                let r = cover.region(q, f).restrict(&family[f], target)?;
                acc = if s > 0 { acc.add(&r)? } else { acc.sub(&r)? };
            }
            Ok(acc)
        })
        .collect()
}

/// Čech coboundary of an integer family.
pub fn cech_coboundary_int(nerve: &Nerve, q: usize, family: &[i64]) -> Result<Vec<i64>> {
    if family.len() != nerve.len(q) {
        return Err(Error::Shape(format!(
            "integer family has {} entries, expected {}",
            family.len(),
            nerve.len(q)
        )));
    }
    Ok((0..nerve.len(q + 1))
        .map(|i| nerve.cech_faces(q + 1, i).iter().map(|&(f, s)| s * family[f]).sum())
        .collect())
}

/// Builds the standard good cover of a mesh with `n_charts` charts.
///
/// * circle / annulus: consecutive angular windows; neighbouring windows share two
///   vertex columns so that triple intersections are empty.
/// * sphere: one chart per coarse icosahedron vertex (exactly 12), given by a threshold
///   on the coarse barycentric weight; needs `subdivision >= 2`.
/// * disk: 4 to 7 overlapping rectangles that all contain the central cell.
pub fn build_cover(cx: &SimplicialComplex, n_charts: usize) -> Result<GoodCover> {
    match *cx.kind() {
        MeshKind::Circle { n } => cyclic(cx, n, 1, n_charts),
        MeshKind::Annulus { n_r, n_theta, .. } => cyclic(cx, n_theta, n_r + 1, n_charts),
        MeshKind::Sphere { subdivision } => sphere(cx, subdivision, n_charts),
        MeshKind::Disk { n } => disk(cx, n, n_charts),
    }
}

fn cyclic(cx: &SimplicialComplex, n: usize, rings: usize, m: usize) -> Result<GoodCover> {
    if m < 3 {
        return Err(Error::NoGoodCover(format!("a circle needs at least 3 charts, got {m}")));
    }
    if n < 2 * m {
        return Err(Error::NoGoodCover(format!("{n} angular vertices are too few for {m} charts")));
    }
    let start: Vec<usize> = (0..=m).map(|i| i * n / m).collect();
    let charts: Vec<Vec<bool>> = (0..m)
        .map(|i| {
            let mut v = vec![false; cx.len(0)];
            for a in start[i]..=start[i + 1] + 1 {
                for j in 0..rings {
                    v[j * n + a % n] = true;
                }
            }
            v
        })
        .collect();
    let arcs = ArcDecomposition {
        points: start[..m].to_vec(),
        arcs: (0..m).map(|i| (start[i]..start[i + 1]).map(|a| [a, (a + 1) % n]).collect()).collect(),
    };
    GoodCover::from_vertex_sets(cx, &charts, Some(arcs))
}

fn sphere(cx: &SimplicialComplex, subdivision: usize, m: usize) -> Result<GoodCover> {
    if m != 12 {
        return Err(Error::NoGoodCover(format!("the sphere cover has one chart per icosahedron vertex (12), got {m}")));
    }
    if subdivision < 2 {
        return Err(Error::NoGoodCover("the sphere cover needs subdivision >= 2".into()));
    }
    let w = cx.coarse_weights().ok_or_else(|| Error::NoGoodCover("sphere mesh lacks coarse weights".into()))?;
    let weight = |v: usize, c: usize| w.weights[v].iter().find(|x| x.0 == c).map_or(0, |x| x.1);
    // largest threshold such that every triangle keeps all its vertices above it for some chart
    let threshold = cx
        .simplices(2)
        .iter()
        .map(|t| (0..12).map(|c| t.iter().map(|&v| weight(v, c)).min().unwrap_or(0)).max().unwrap_or(0))
        .min()
        .unwrap_or(0);
    if threshold == 0 {
        return Err(Error::NoGoodCover("sphere mesh is too coarse for a vertex-star cover".into()));
    }
    let charts: Vec<Vec<bool>> = (0..12).map(|c| (0..cx.len(0)).map(|v| weight(v, c) >= threshold).collect()).collect();
    GoodCover::from_vertex_sets(cx, &charts, None)
}

fn disk(cx: &SimplicialComplex, n: usize, m: usize) -> Result<GoodCover> {
    if !(4..=7).contains(&m) {
        return Err(Error::NoGoodCover(format!("the disk cover supports 4 to 7 charts, got {m}")));
    }
    if n < 4 {
        return Err(Error::NoGoodCover("the disk cover needs at least 4 cells per side".into()));
    }
    let c = n / 2;
    let (lo, hi) = ((0, c + 1), (c - 1, n));
    let rects = [
        (lo, lo),
        (hi, lo),
        (lo, hi),
        (hi, hi),
        ((c - 1, c + 1), (0, n)),
        ((0, n), (c - 1, c + 1)),
        ((1, n - 1), (1, n - 1)),
    ];
    let charts: Vec<Vec<bool>> = rects[..m]
        .iter()
        .map(|&((x0, x1), (y0, y1))| {
            (0..cx.len(0))
                .map(|v| {
                    let (i, j) = (v % (n + 1), v / (n + 1));
                    (x0..=x1).contains(&i) && (y0..=y1).contains(&j)
                })
                .collect()
        })
        .collect();
    GoodCover::from_vertex_sets(cx, &charts, None)
}
