//! Local dimension counts for the moduli of modules, by numerical rank of
//! analytic real differentials, and a distance between unitary orbits.
//!
//! Every rank is accepted only when the smallest retained singular value
//! exceeds the largest discarded one by at least [`MIN_GAP`]; otherwise the
//! answer is `Indeterminate`.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::linalg::{c, haar_unitary, singular_values};
use crate::pmodule::{shift_pair, PModule, PhaseDiagonal};
use crate::words::{self, BinaryWord};
use crate::{CMatrix, Error, Result, C64};

/// Relative singular-value threshold, scaled by `σ_max`.
pub const RANK_REL: f64 = 1e-8;
/// Required ratio between retained and discarded singular values.
pub const MIN_GAP: f64 = 10.0;

pub const MULTISTARTS: usize = 16;
pub const MAX_ITERATIONS: usize = 500;
pub const GRADIENT_TOL: f64 = 1e-10;

#[derive(Clone, Debug, Serialize)]
pub struct RankReport {
    pub rank: usize,
    /// `σ_rank / σ_{rank+1}`; `inf` when nothing is discarded.
    pub gap: f64,
    pub singular_values: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TangentReport {
    pub point: PModule,
    pub ambient_real_dim: usize,
    pub constraint_rank: usize,
    pub tangent_dim: usize,
    pub orbit_tangent_dim: usize,
    pub quotient_dim: usize,
    /// Smallest singular-value gap among the rank decisions made.
    pub min_gap: f64,
}

/// Real coordinates of a list of complex matrices (real parts, then
/// imaginary parts, column-major).
fn realify(blocks: &[CMatrix]) -> Vec<f64> {
    let mut out = Vec::new();
    for m in blocks {
        out.extend(m.iter().map(|z| z.re));
    }
    for m in blocks {
        out.extend(m.iter().map(|z| z.im));
    }
    out
}

/// Rank of the real matrix whose columns are the given real vectors.
fn rank_of_columns(columns: &[Vec<f64>], what: &str) -> Result<RankReport> {
    let rows = columns.first().map_or(0, |c| c.len());
    let m = CMatrix::from_fn(rows, columns.len(), |i, j| c(columns[j][i], 0.0));
    let sv = singular_values(&m);
    let smax = sv.first().copied().unwrap_or(0.0);
    let rank = sv.iter().filter(|&&s| s > RANK_REL * smax).count();
    let gap = if rank == 0 || rank == sv.len() || sv[rank] <= 0.0 {
        f64::INFINITY
    } else {
        sv[rank - 1] / sv[rank]
    };
    if gap < MIN_GAP {
        return Err(Error::Indeterminate(format!(
            "{what}: rank {rank} has singular-value gap {gap:.3e} below {MIN_GAP}"
        )));
    }
    Ok(RankReport {
        rank,
        gap,
        singular_values: sv,
    })
}

/// Real basis of `M_{r,c}(C)`: `E_ij` and `i E_ij`.
fn complex_basis(r: usize, cols: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(2 * r * cols);
    for unit in [c(1.0, 0.0), c(0.0, 1.0)] {
        for j in 0..cols {
            for i in 0..r {
                let mut e = CMatrix::zeros(r, cols);
                e[(i, j)] = unit;
                out.push(e);
            }
        }
    }
    out
}

/// Orthonormal real basis of the anti-Hermitian `d × d` matrices, traceless
/// ones first; the last element is `iI/√d`.
pub fn anti_hermitian_basis(d: usize) -> Vec<CMatrix> {
    let mut out = Vec::with_capacity(d * d);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for i in 0..j {
            let mut x = CMatrix::zeros(d, d);
            x[(i, j)] = c(h, 0.0);
            x[(j, i)] = c(-h, 0.0);
            out.push(x);
            let mut y = CMatrix::zeros(d, d);
            y[(i, j)] = c(0.0, h);
            y[(j, i)] = c(0.0, h);
            out.push(y);
        }
    }
    // generalized Gell-Mann diagonals
    for k in 1..d {
        let s = 1.0 / ((k * (k + 1)) as f64).sqrt();
        let mut x = CMatrix::zeros(d, d);
        for i in 0..k {
            x[(i, i)] = c(0.0, s);
        }
        x[(k, k)] = c(0.0, -(k as f64) * s);
        out.push(x);
    }
    out.push(CMatrix::identity(d, d) * c(0.0, 1.0 / (d as f64).sqrt()));
    out
}

/// Rank of `H ↦ H*R + R*H` on `M_{2d,d}(C)` at `R = [A; B]`.
pub fn constraint_rank(m: &PModule) -> Result<RankReport> {
    let r = m.isometry();
    let d = m.dim();
    let columns: Vec<Vec<f64>> = complex_basis(2 * d, d)
        .iter()
        .map(|h| realify(&[h.adjoint() * &r + r.adjoint() * h]))
        .collect();
    rank_of_columns(&columns, "constraint differential")
}

fn commutator(x: &CMatrix, a: &CMatrix) -> CMatrix {
    x * a - a * x
}

/// Rank of `X ↦ ([X, A], [X, B])` on traceless anti-Hermitian `X`.
pub fn orbit_rank(m: &PModule) -> Result<RankReport> {
    let d = m.dim();
    let mut basis = anti_hermitian_basis(d);
    basis.pop();
    if basis.is_empty() {
        return Ok(RankReport {
            rank: 0,
            gap: f64::INFINITY,
            singular_values: Vec::new(),
        });
    }
    let columns: Vec<Vec<f64>> = basis
        .iter()
        .map(|x| realify(&[commutator(x, m.a()), commutator(x, m.b())]))
        .collect();
    rank_of_columns(&columns, "orbit differential")
}

/// Dimension of the orbit of `m` under simultaneous unitary conjugation.
pub fn orbit_tangent_dimension(m: &PModule) -> Result<usize> {
    Ok(orbit_rank(m)?.rank)
}

/// Tangent space of the isometry manifold at `m`, and of the orbit through it.
pub fn tangent_dimension(m: &PModule) -> Result<TangentReport> {
    let d = m.dim();
    let ambient = 4 * d * d;
    let cons = constraint_rank(m)?;
    let orbit = orbit_rank(m)?;
    let tangent = ambient - cons.rank;
    Ok(TangentReport {
        point: m.clone(),
        ambient_real_dim: ambient,
        constraint_rank: cons.rank,
        tangent_dim: tangent,
        orbit_tangent_dim: orbit.rank,
        quotient_dim: tangent.saturating_sub(orbit.rank),
        min_gap: cons.gap.min(orbit.gap),
    })
}

/// Rank of the differential of `(Z, U) ↦ U (A_w Z, B_w Z) U*` at `(z, u)`,
/// over the `d` phase angles and the `d²` anti-Hermitian directions `U e^{tX}`.
pub fn atomic_stratum_rank(w: &BinaryWord, z: &PhaseDiagonal, u: &CMatrix) -> Result<RankReport> {
    if !words::is_prime(w)? {
        return Err(Error::invalid(format!("word {w} is not prime")));
    }
    let d = w.len();
    if z.dim() != d || u.nrows() != d || u.ncols() != d {
        return Err(Error::invalid("phase diagonal and unitary must match the word length"));
    }
    let (aw, bw) = shift_pair(w);
    let zm = z.matrix();
    let a0 = &aw * &zm;
    let b0 = &bw * &zm;
    let conj = |x: &CMatrix| u * x * u.adjoint();
    let mut columns = Vec::with_capacity(d + d * d);
    for k in 0..d {
        let mut dz = CMatrix::zeros(d, d);
        dz[(k, k)] = zm[(k, k)] * c(0.0, 1.0);
        columns.push(realify(&[conj(&(&aw * &dz)), conj(&(&bw * &dz))]));
    }
    for x in anti_hermitian_basis(d) {
        columns.push(realify(&[conj(&commutator(&x, &a0)), conj(&commutator(&x, &b0))]));
    }
    rank_of_columns(&columns, "atomic parametrization differential")
}

pub fn atomic_stratum_dimension(w: &BinaryWord, z: &PhaseDiagonal, u: &CMatrix) -> Result<usize> {
    Ok(atomic_stratum_rank(w, z, u)?.rank)
}

#[derive(Clone, Debug, Serialize)]
pub struct OrbitDistance {
    /// Best value found; an upper bound on the true distance.
    pub distance: f64,
    /// Unitary achieving `distance`.
    #[serde(serialize_with = "crate::json::serialize_matrix")]
    pub unitary: CMatrix,
    /// Index of the winning start.
    pub start: usize,
    pub iterations: usize,
}

fn objective(m1: &PModule, m2: &PModule, u: &CMatrix) -> f64 {
    let ua = u * m1.a() * u.adjoint() - m2.a();
    let ub = u * m1.b() * u.adjoint() - m2.b();
    ua.norm_squared() + ub.norm_squared()
}

/// Riemannian gradient at `u` in the Lie algebra: the derivative along
/// `u e^{tX}` is `Re tr(Ω* X)`.
fn gradient(m1: &PModule, m2: &PModule, u: &CMatrix) -> CMatrix {
    let mut cm = CMatrix::zeros(m1.dim(), m1.dim());
    for (l1, l2) in [(m1.a(), m2.a()), (m1.b(), m2.b())] {
        let e = u.adjoint() * (u * l1 * u.adjoint() - l2) * u;
        let ea = e.adjoint();
        cm += l1 * &ea - &ea * l1;
    }
    cm.adjoint() - cm
}

/// Cayley retraction `(I − Y/2)^{-1}(I + Y/2)` of an anti-Hermitian `Y`.
fn cayley(y: &CMatrix) -> CMatrix {
    let d = y.nrows();
    let half = y * c(0.5, 0.0);
    let lhs = CMatrix::identity(d, d) - &half;
    let rhs = CMatrix::identity(d, d) + &half;
    lhs.lu().solve(&rhs).expect("I − Y/2 is invertible for anti-Hermitian Y")
}

/// Armijo descent with Barzilai–Borwein trial steps from `u0`.
fn descend(m1: &PModule, m2: &PModule, u0: CMatrix) -> (f64, CMatrix, usize) {
    let mut u = u0;
    let mut f = objective(m1, m2, &u);
    let mut g = gradient(m1, m2, &u);
    let mut step = 0.5;
    for it in 0..MAX_ITERATIONS {
        let gn2 = g.norm_squared();
        if gn2.sqrt() < GRADIENT_TOL {
            return (f, u, it);
        }
        let mut t = step;
        let (un, fnew) = loop {
            let cand = &u * cayley(&(&g * c(-t, 0.0)));
            let fc = objective(m1, m2, &cand);
            if fc <= f - 1e-4 * t * gn2 || t < 1e-16 {
                break (cand, fc);
            }
            t *= 0.5;
        };
        if fnew >= f {
            return (f, u, it);
        }
        let gnew = gradient(m1, m2, &un);
        // BB step in the Lie algebra, transported trivially
        let s = &g * c(-t, 0.0);
        let y = &gnew - &g;
        let sy: f64 = s.iter().zip(y.iter()).map(|(a, b)| (a.conj() * b).re).sum();
        step = if sy > 0.0 {
            (s.norm_squared() / sy).clamp(1e-6, 1e3)
        } else {
            2.0 * t
        };
        u = un;
        f = fnew;
        g = gnew;
    }
    (f, u, MAX_ITERATIONS)
}

/// `min_U √(‖UA₁U* − A₂‖²_F + ‖UB₁U* − B₂‖²_F)` by multistart descent over
/// `U(d)`. Start 0 is the identity, the rest are Haar-random from `seed`.
pub fn orbit_distance(m1: &PModule, m2: &PModule, seed: u64) -> Result<OrbitDistance> {
    if m1.dim() != m2.dim() {
        return Err(Error::invalid("modules have different dimensions"));
    }
    let d = m1.dim();
    let runs: Vec<(f64, CMatrix, usize)> = (0..MULTISTARTS)
        .into_par_iter()
        .map(|i| {
            let u0 = if i == 0 {
                CMatrix::identity(d, d)
            } else {
                let mut rng = ChaCha20Rng::seed_from_u64(seed.wrapping_add(i as u64));
                haar_unitary(d, &mut rng)
            };
            descend(m1, m2, u0)
        })
        .collect();
    let (start, (f, u, iterations)) = runs
        .into_iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| a.0.total_cmp(&b.0).then(i.cmp(j)))
        .expect("at least one start");
    Ok(OrbitDistance {
        distance: f.max(0.0).sqrt(),
        unitary: u,
        start,
        iterations,
    })
}

/// Phase diagonal from angles, for parameter sweeps.
pub fn phases_from_angles(theta: &[f64]) -> Result<PhaseDiagonal> {
    PhaseDiagonal::new(theta.iter().map(|&t| C64::from_polar(1.0, t)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::fingerprint;
    use crate::linalg::{q_factor, unitarity_residual};
    use crate::pmodule::{atomic_module, random_module};
    use rand::Rng;

    fn w(s: &str) -> BinaryWord {
        s.parse().unwrap()
    }

    #[test]
    fn basis_is_orthonormal() {
        for d in 1..5 {
            let b = anti_hermitian_basis(d);
            assert_eq!(b.len(), d * d);
            for (i, x) in b.iter().enumerate() {
                assert!((x + x.adjoint()).norm() < 1e-15);
                for (j, y) in b.iter().enumerate() {
                    let ip = (x.adjoint() * y).trace().re;
                    assert!((ip - if i == j { 1.0 } else { 0.0 }).abs() < 1e-14);
                }
            }
            assert!(b[..d * d - 1].iter().all(|x| x.trace().norm() < 1e-14));
        }
    }

    #[test]
    fn tangent_examples() {
        for (d, seed) in [(1, 1), (2, 2), (3, 3)] {
            let m = random_module(d, seed).unwrap();
            let r = tangent_dimension(&m).unwrap();
            assert_eq!(r.tangent_dim, 3 * d * d);
            assert_eq!(r.constraint_rank, d * d);
            assert_eq!(r.orbit_tangent_dim, d * d - 1);
            assert_eq!(r.quotient_dim, 2 * d * d + 1);
            assert!(r.min_gap >= MIN_GAP);
        }
    }

    #[test]
    fn reducible_orbit_is_smaller() {
        let m = random_module(2, 5).unwrap().direct_sum(&random_module(1, 6).unwrap());
        assert!(orbit_tangent_dimension(&m).unwrap() < 8);
    }

    #[test]
    fn atomic_differential_matches_finite_differences() {
        let mut rng = ChaCha20Rng::seed_from_u64(17);
        let h = 1e-5;
        for word in ["0", "01", "001", "0111"] {
            let wd = w(word);
            let d = wd.len();
            let theta: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..std::f64::consts::TAU)).collect();
            let z = phases_from_angles(&theta).unwrap();
            let u = haar_unitary(d, &mut rng);
            let point = |theta: &[f64], u: &CMatrix| {
                let m = atomic_module(&wd, &phases_from_angles(theta).unwrap()).unwrap();
                let c = m.conjugate(u).unwrap();
                realify(&[c.a().clone(), c.b().clone()])
            };
            let diff = |p: Vec<f64>, q: Vec<f64>| -> Vec<f64> {
                p.iter().zip(&q).map(|(a, b)| (a - b) / (2.0 * h)).collect()
            };
            let mut fd = Vec::new();
            for k in 0..d {
                let mut tp = theta.clone();
                let mut tm = theta.clone();
                tp[k] += h;
                tm[k] -= h;
                fd.push(diff(point(&tp, &u), point(&tm, &u)));
            }
            for x in anti_hermitian_basis(d) {
                let up = q_factor(&(&u * (&x * c(h, 0.0)).exp()));
                let um = q_factor(&(&u * (&x * c(-h, 0.0)).exp()));
                fd.push(diff(point(&theta, &up), point(&theta, &um)));
            }
            let (aw, bw) = shift_pair(&wd);
            let zm = z.matrix();
            let a0 = &aw * &zm;
            let b0 = &bw * &zm;
            let conj = |x: &CMatrix| &u * x * u.adjoint();
            let mut exact = Vec::new();
            for k in 0..d {
                let mut dz = CMatrix::zeros(d, d);
                dz[(k, k)] = zm[(k, k)] * c(0.0, 1.0);
                exact.push(realify(&[conj(&(&aw * &dz)), conj(&(&bw * &dz))]));
            }
            for x in anti_hermitian_basis(d) {
                exact.push(realify(&[conj(&commutator(&x, &a0)), conj(&commutator(&x, &b0))]));
            }
            for (e, f) in exact.iter().zip(&fd) {
                assert!(e.iter().zip(f).all(|(a, b)| (a - b).abs() < 1e-7), "word {word}");
            }
            let analytic = atomic_stratum_rank(&wd, &z, &u).unwrap();
            assert_eq!(rank_of_columns(&exact, "exact").unwrap().rank, analytic.rank);
        }
    }

    #[test]
    fn atomic_circle() {
        let z = phases_from_angles(&[0.3]).unwrap();
        let u = CMatrix::identity(1, 1);
        assert_eq!(atomic_stratum_dimension(&w("0"), &z, &u).unwrap(), 1);
        let z2 = phases_from_angles(&[0.0, 0.0]).unwrap();
        assert!(atomic_stratum_dimension(&w("00"), &z2, &CMatrix::identity(2, 2)).is_err());
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let m1 = random_module(3, 1).unwrap();
        let m2 = random_module(3, 2).unwrap();
        let u = haar_unitary(3, &mut rng);
        let g = gradient(&m1, &m2, &u);
        for x in anti_hermitian_basis(3) {
            let h = 1e-6;
            let fp = objective(&m1, &m2, &(&u * (&x * c(h, 0.0)).exp()));
            let fm = objective(&m1, &m2, &(&u * (&x * c(-h, 0.0)).exp()));
            let fd = (fp - fm) / (2.0 * h);
            let exact = (g.adjoint() * &x).trace().re;
            assert!((fd - exact).abs() < 1e-6, "{fd} vs {exact}");
        }
        assert!(unitarity_residual(&cayley(&(&g * c(0.3, 0.0)))) < 1e-12);
    }

    #[test]
    fn orbit_distance_vanishes_on_orbits() {
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        for d in 1..=3 {
            let m = random_module(d, 40 + d as u64).unwrap();
            let u = haar_unitary(d, &mut rng);
            let r = orbit_distance(&m, &m.conjugate(&u).unwrap(), 9).unwrap();
            assert!(r.distance <= 1e-6, "d={d}: {}", r.distance);
            assert!(unitarity_residual(&r.unitary) < 1e-10);
        }
    }

    /// `|tr W(m1) − tr W(m2)| ≤ |W| · √d · dist` for words in the four
    /// letters, since every letter has operator norm at most one.
    #[test]
    fn orbit_distance_respects_trace_bound() {
        let d = 2;
        for seed in 0..4 {
            let m1 = random_module(d, 100 + seed).unwrap();
            let m2 = random_module(d, 200 + seed).unwrap();
            let f1 = fingerprint(&m1, 4).unwrap();
            let f2 = fingerprint(&m2, 4).unwrap();
            let mut lower: f64 = 0.0;
            for (pw, t1) in f1.words.iter().zip(&f1.traces) {
                let letters = pw.letters();
                if letters.is_empty() {
                    continue;
                }
                let t2 = f2.trace_of(&letters).unwrap();
                lower = lower.max((t1 - t2).norm() / (letters.len() as f64 * (d as f64).sqrt()));
            }
            let fwd = orbit_distance(&m1, &m2, 1).unwrap().distance;
            let bwd = orbit_distance(&m2, &m1, 1).unwrap().distance;
            assert!(lower > 0.0);
            assert!(fwd >= lower - 1e-12, "{fwd} < {lower}");
            assert!((fwd - bwd).abs() <= 1e-4, "{fwd} vs {bwd}");
        }
    }
}
