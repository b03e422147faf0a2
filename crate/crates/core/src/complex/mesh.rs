use std::collections::HashMap;
use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::{CoarseWeights, SimplicialComplex};
use crate::error::{Error, Result};

/// Mesh families supported by [`build_complex`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MeshKind {
    /// Unit circle with `n` equally spaced vertices.
    Circle { n: usize },
    /// Flat annulus `r_in <= r <= r_out` with `n_r + 1` staggered rings of `n_theta` vertices.
    /// A nonzero `jitter` (fraction of the local spacing) displaces vertices
    /// pseudo-randomly, breaking the rotational symmetry of the mesh.
    Annulus {
        n_r: usize,
        n_theta: usize,
        r_in: f64,
        r_out: f64,
        #[serde(default)]
        jitter: f64,
    },
    /// Unit square `[0,1]^2` cut into `n x n` cells, two triangles each.
    Disk { n: usize },
    /// Unit sphere from a rotated icosahedron, midpoint-subdivided `subdivision` times.
    Sphere { subdivision: usize },
}

pub fn build_complex(kind: &MeshKind) -> Result<SimplicialComplex> {
    match *kind {
        MeshKind::Circle { n } => circle(n),
        MeshKind::Annulus { n_r, n_theta, r_in, r_out, jitter } => annulus(n_r, n_theta, r_in, r_out, jitter),
        MeshKind::Disk { n } => disk(n),
        MeshKind::Sphere { subdivision } => sphere(subdivision),
    }
}

fn circle(n: usize) -> Result<SimplicialComplex> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("circle needs at least 3 vertices, got {n}")));
    }
    let coords = (0..n)
        .map(|i| {
            let t = TAU * i as f64 / n as f64;
            [t.cos(), t.sin(), 0.0]
        })
        .collect();
    let edges = (0..n).map(|i| vec![i, (i + 1) % n]).collect();
    SimplicialComplex::from_oriented(MeshKind::Circle { n }, edges, coords)
}

/// Geometric ring radii keep the triangles close to equilateral when
/// `n_r ≈ ln(r_out/r_in) / ((√3/2)·2π/n_theta)`.
fn annulus(n_r: usize, n_theta: usize, r_in: f64, r_out: f64, jitter: f64) -> Result<SimplicialComplex> {
    if n_theta < 3 || n_r < 1 {
        return Err(Error::InvalidParameter(format!(
            "annulus needs n_theta >= 3 and n_r >= 1, got n_r={n_r}, n_theta={n_theta}"
        )));
    }
    if !(r_in > 0.0 && r_out > r_in && r_out.is_finite()) {
        return Err(Error::InvalidParameter(format!("annulus radii must satisfy 0 < r_in < r_out, got {r_in}, {r_out}")));
    }
    if !(0.0..=0.25).contains(&jitter) {
        return Err(Error::InvalidParameter(format!("annulus jitter must lie in [0, 0.25], got {jitter}")));
    }
    let ratio = (r_out / r_in).powf(1.0 / n_r as f64);
    let mut coords = Vec::with_capacity((n_r + 1) * n_theta);
    for j in 0..=n_r {
        let r0 = r_in * (r_out / r_in).powf(j as f64 / n_r as f64);
        let shift = 0.5 * (j % 2) as f64;
        for i in 0..n_theta {
            let (u, v) = hash_pair((j * n_theta + i) as u64);
            let r = if j == 0 || j == n_r { r0 } else { r0 * (1.0 + jitter * (ratio - 1.0) * u) };
            let t = TAU * (i as f64 + shift + jitter * v) / n_theta as f64;
            coords.push([r * t.cos(), r * t.sin(), 0.0]);
        }
    }
    let id = |j: usize, i: usize| j * n_theta + i % n_theta;
    let mut tris = Vec::with_capacity(2 * n_r * n_theta);
    for j in 0..n_r {
        for i in 0..n_theta {
            let (a, b, c, d) = (id(j, i), id(j, i + 1), id(j + 1, i), id(j + 1, i + 1));
            if j % 2 == 0 {
                tris.push(vec![a, b, c]);
                tris.push(vec![b, d, c]);
            } else {
                tris.push(vec![c, d, a]);
                tris.push(vec![a, b, d]);
            }
        }
    }
    let tris = tris.into_iter().map(|t| ccw(&coords, t)).collect();
    SimplicialComplex::from_oriented(MeshKind::Annulus { n_r, n_theta, r_in, r_out, jitter }, tris, coords)
}

/// Two deterministic pseudo-random numbers in `[-1/2, 1/2)` (splitmix64).
fn hash_pair(seed: u64) -> (f64, f64) {
    let mix = |mut z: u64| {
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^ (z >> 31)
    };
    let a = mix(seed.wrapping_mul(2).wrapping_add(0x9e3779b97f4a7c15));
    let b = mix(seed.wrapping_mul(2).wrapping_add(1).wrapping_add(0x9e3779b97f4a7c15));
    let unit = |x: u64| (x >> 11) as f64 / (1u64 << 53) as f64 - 0.5;
    (unit(a), unit(b))
}

fn ccw(coords: &[[f64; 3]], mut t: Vec<usize>) -> Vec<usize> {
    let (p, q, r) = (coords[t[0]], coords[t[1]], coords[t[2]]);
    let area = (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0]);
    if area < 0.0 {
        t.swap(1, 2);
    }
    t
}

fn disk(n: usize) -> Result<SimplicialComplex> {
    if n < 1 {
        return Err(Error::InvalidParameter("disk needs at least one cell".into()));
    }
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let mut coords = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            coords.push([i as f64 / n as f64, j as f64 / n as f64, 0.0]);
        }
    }
    let mut tris = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            tris.push(vec![id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            tris.push(vec![id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    SimplicialComplex::from_oriented(MeshKind::Disk { n }, tris, coords)
}

fn normalize(p: [f64; 3]) -> [f64; 3] {
    let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
    [p[0] / r, p[1] / r, p[2] / r]
}

fn det3(a: [f64; 3], b: [f64; 3], c: [f64; 3]) -> f64 {
    a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0]) + a[2] * (b[0] * c[1] - b[1] * c[0])
}

/// A fixed generic rotation keeps icosahedron vertices off the coordinate axes.
fn rotate(p: [f64; 3]) -> [f64; 3] {
    let (a, b, c) = (0.31_f64, 0.73_f64, 0.17_f64);
    let rz = |p: [f64; 3], t: f64| [t.cos() * p[0] - t.sin() * p[1], t.sin() * p[0] + t.cos() * p[1], p[2]];
    let ry = |p: [f64; 3], t: f64| [t.cos() * p[0] + t.sin() * p[2], p[1], -t.sin() * p[0] + t.cos() * p[2]];
    let rx = |p: [f64; 3], t: f64| [p[0], t.cos() * p[1] - t.sin() * p[2], t.sin() * p[1] + t.cos() * p[2]];
    rz(ry(rx(p, a), b), c)
}

fn icosahedron() -> (Vec<[f64; 3]>, Vec<[usize; 3]>) {
    let g = (1.0 + 5f64.sqrt()) / 2.0;
    let mut v = Vec::new();
    for &(s, t) in &[(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
        v.push([0.0, s, t * g]);
        v.push([s, t * g, 0.0]);
        v.push([t * g, 0.0, s]);
    }
    let v: Vec<[f64; 3]> = v.into_iter().map(|p| rotate(normalize(p))).collect();
    let edge = super::distance(&v[0], &v[1]).min(super::distance(&v[0], &v[2]));
    let near = |a: usize, b: usize| (super::distance(&v[a], &v[b]) - edge).abs() < 1e-9 * edge.max(1.0) + 1e-6;
    let mut faces = Vec::new();
    for a in 0..12 {
        for b in a + 1..12 {
            for c in b + 1..12 {
                if near(a, b) && near(b, c) && near(a, c) {
                    faces.push(if det3(v[a], v[b], v[c]) > 0.0 { [a, b, c] } else { [a, c, b] });
                }
            }
        }
    }
    (v, faces)
}

fn sphere(subdivision: usize) -> Result<SimplicialComplex> {
    if subdivision > 7 {
        return Err(Error::InvalidParameter(format!("sphere subdivision {subdivision} is too fine")));
    }
    let (mut coords, mut faces) = icosahedron();
    debug_assert_eq!(faces.len(), 20);
    let mut weights: Vec<Vec<(usize, u64)>> = (0..12).map(|i| vec![(i, 1)]).collect();
    for _ in 0..subdivision {
        for w in &mut weights {
            w.iter_mut().for_each(|(_, x)| *x *= 2);
        }
        let mut mid: HashMap<(usize, usize), usize> = HashMap::new();
        let mut midpoint = |a: usize, b: usize, coords: &mut Vec<[f64; 3]>, weights: &mut Vec<Vec<(usize, u64)>>| {
            *mid.entry((a.min(b), a.max(b))).or_insert_with(|| {
                let (p, q) = (coords[a], coords[b]);
                coords.push(normalize([p[0] + q[0], p[1] + q[1], p[2] + q[2]]));
                let mut w: Vec<(usize, u64)> = Vec::new();
                for &(c, x) in weights[a].iter().chain(&weights[b]) {
                    match w.iter_mut().find(|(d, _)| *d == c) {
                        Some(e) => e.1 += x / 2,
                        None => w.push((c, x / 2)),
                    }
                }
                w.sort_unstable();
                weights.push(w);
                coords.len() - 1
            })
        };
        let mut next = Vec::with_capacity(faces.len() * 4);
        for &[a, b, c] in &faces {
            let ab = midpoint(a, b, &mut coords, &mut weights);
            let bc = midpoint(b, c, &mut coords, &mut weights);
            let ca = midpoint(c, a, &mut coords, &mut weights);
            next.extend([[a, ab, ca], [ab, b, bc], [ca, bc, c], [ab, bc, ca]]);
        }
        faces = next;
    }
    let tris = faces.iter().map(|f| f.to_vec()).collect();
    let mut cx = SimplicialComplex::from_oriented(MeshKind::Sphere { subdivision }, tris, coords)?;
    cx.set_coarse_weights(CoarseWeights { weights });
    Ok(cx)
}
