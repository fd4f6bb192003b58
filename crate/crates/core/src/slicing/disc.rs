use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::geometry::{dot, euclid, Functional};

/// Boundary samples of the radius-`r` disc in `ker u`.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelDisc {
    pub points: Vec<Vec<f64>>,
    /// Estimated largest distance from a boundary point to the nearest
    /// sample; 0 when the samples are exact (kernel of dimension <= 1).
    pub mesh: f64,
}

fn kernel_basis(u: &Functional) -> Vec<Vec<f64>> {
    let d = u.len();
    let unit: Vec<f64> = u.iter().map(|c| c / u.norm()).collect();
    let mut basis: Vec<Vec<f64>> = vec![unit];
    for k in 0..d {
        if basis.len() == d {
            break;
        }
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        for b in &basis {
            let c = dot(&e, b);
            for (ek, bk) in e.iter_mut().zip(b) {
                *ek -= c * bk;
            }
        }
        let n = dot(&e, &e).sqrt();
        if n > 1e-6 {
            basis.push(e.into_iter().map(|c| c / n).collect());
        }
    }
    basis.remove(0);
    basis
}

/// Samples the disc by its boundary (enough for convex hulls): exactly in
/// `d <= 2`; otherwise the axes and pairwise diagonals of an orthonormal
/// kernel basis plus 64 seeded random directions.
pub fn kernel_disc(u: &Functional, r: f64, seed: u64) -> KernelDisc {
    let d = u.len();
    let basis = kernel_basis(u);
    if basis.is_empty() {
        return KernelDisc { points: vec![vec![0.0; d]], mesh: 0.0 };
    }
    let combine = |coef: &[f64]| -> Vec<f64> {
        let mut v = vec![0.0; d];
        for (c, b) in coef.iter().zip(&basis) {
            for (vk, bk) in v.iter_mut().zip(b) {
                *vk += r * c * bk;
            }
        }
        v
    };
    let k = basis.len();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..k {
        for s in [1.0, -1.0] {
            let mut c = vec![0.0; k];
            c[i] = s;
            dirs.push(c);
        }
    }
    if k == 1 {
        return KernelDisc { points: dirs.iter().map(|c| combine(c)).collect(), mesh: 0.0 };
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..k {
        for j in i + 1..k {
            for (si, sj) in [(h, h), (h, -h), (-h, h), (-h, -h)] {
                let mut c = vec![0.0; k];
                c[i] = si;
                c[j] = sj;
                dirs.push(c);
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let random_dir = |rng: &mut ChaCha8Rng| loop {
        let c: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
        let n = dot(&c, &c).sqrt();
        if n > 1e-12 {
            break c.into_iter().map(|x| x / n).collect::<Vec<f64>>();
        }
    };
    for _ in 0..64 {
        dirs.push(random_dir(&mut rng));
    }
    let mut probes = ChaCha8Rng::seed_from_u64(seed);
    probes.set_stream(1);
    let mut mesh = 0.0f64;
    for _ in 0..256 {
        let p = random_dir(&mut probes);
        let nearest = dirs.iter().map(|q| euclid(&p, q)).fold(f64::INFINITY, f64::min);
        mesh = mesh.max(r * nearest);
    }
    KernelDisc { points: dirs.iter().map(|c| combine(c)).collect(), mesh }
}

/// Vertices of the convex hull of planar points (monotone chain).
pub(crate) fn plane_hull(mut pts: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let cross = |o: &[f64], a: &[f64], b: &[f64]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut lower: Vec<Vec<f64>> = Vec::new();
    for p in &pts {
        while lower.len() >= 2 && cross(&lower[lower.len() - 2], &lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p.clone());
    }
    let mut upper: Vec<Vec<f64>> = Vec::new();
    for p in pts.iter().rev() {
        while upper.len() >= 2 && cross(&upper[upper.len() - 2], &upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p.clone());
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}
