use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex;

use crate::algebra::GroupKind;
use crate::error::{Error, Result};
use crate::lattice::basis::ncomp;
use crate::lattice::{Form, Torus4};

use super::Connection;

/// Points per axis of the fixed sampling used to normalise amplitudes, so
/// a given seed describes the same continuum field on every grid.
const REFERENCE_N: usize = 12;

struct Mode {
    k: [i32; 4],
    /// `[comp][gen] -> (cos coefficient, sin coefficient)`.
    coeffs: Vec<(f64, f64)>,
}

fn modes(seed: u64, cutoff: f64, width: usize) -> Vec<Mode> {
    let kmax = cutoff.floor() as i32;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for k0 in -kmax..=kmax {
        for k1 in -kmax..=kmax {
            for k2 in -kmax..=kmax {
                for k3 in -kmax..=kmax {
                    let k = [k0, k1, k2, k3];
                    let k2sum: i32 = k.iter().map(|v| v * v).sum();
                    if k2sum as f64 > cutoff * cutoff {
                        continue;
                    }
                    // One representative of each +-k pair.
                    if let Some(&first) = k.iter().find(|&&v| v != 0) {
                        if first < 0 {
                            continue;
                        }
                    }
                    let w = 1.0 / (1.0 + k2sum as f64);
                    let coeffs = (0..width)
                        .map(|_| {
                            let a = rng.gen_range(-1.0..1.0);
                            let b = rng.gen_range(-1.0..1.0);
                            (w * a, if k2sum == 0 { 0.0 } else { w * b })
                        })
                        .collect();
                    out.push(Mode { k, coeffs });
                }
            }
        }
    }
    out
}

#[cfg(test)]
fn evaluate(modes: &[Mode], x: [f64; 4], out: &mut [f64]) {
    out.fill(0.0);
    for m in modes {
        let phase = TAU * (0..4).map(|mu| m.k[mu] as f64 * x[mu]).sum::<f64>();
        let (s, c) = phase.sin_cos();
        for (o, &(a, b)) in out.iter_mut().zip(&m.coeffs) {
            *o += a * c + b * s;
        }
    }
}

/// Values of the mode sum on the `n^4` grid, laid out `[site][width]`.
/// Separable: one small DFT per axis, so the cost is linear in the modes
/// along an axis instead of in all of them.
fn synthesize(modes: &[Mode], kmax: i32, n: usize, width: usize) -> Vec<f64> {
    let m = (2 * kmax + 1) as usize;
    let twiddle: Vec<Complex<f64>> = (0..m * n)
        .map(|idx| {
            let k = (idx / n) as i64 - kmax as i64;
            let j = (idx % n) as i64;
            Complex::from_polar(1.0, TAU * (k * j).rem_euclid(n as i64) as f64 / n as f64)
        })
        .collect();
    let mut data = vec![Complex::new(0.0, 0.0); m.pow(4) * width];
    for mode in modes {
        let at = mode.k.iter().fold(0, |acc, &k| acc * m + (k + kmax) as usize) * width;
        for (d, &(a, b)) in data[at..at + width].iter_mut().zip(&mode.coeffs) {
            *d += Complex::new(a, -b);
        }
    }
    let mut shape = [m; 4];
    for axis in 0..4 {
        let outer: usize = shape[..axis].iter().product();
        let inner: usize = shape[axis + 1..].iter().product::<usize>() * width;
        let mut next = vec![Complex::new(0.0, 0.0); outer * n * inner];
        for o in 0..outer {
            for k in 0..m {
                let src = &data[(o * m + k) * inner..(o * m + k + 1) * inner];
                for j in 0..n {
                    let e = twiddle[k * n + j];
                    let dst = &mut next[(o * n + j) * inner..(o * n + j + 1) * inner];
                    dst.iter_mut().zip(src).for_each(|(d, s)| *d += s * e);
                }
            }
        }
        data = next;
        shape[axis] = n;
    }
    data.into_iter().map(|c| c.re).collect()
}

/// Band-limited random k-form: Fourier modes with `|k| <= cutoff`, weights
/// `1/(1+|k|^2)`, scaled so that the largest pointwise norm on a fixed
/// reference sampling equals `amplitude`.
pub fn random_field(
    grid: Torus4,
    group: GroupKind,
    degree: usize,
    seed: u64,
    amplitude: f64,
    cutoff: f64,
) -> Result<Form> {
    if !(amplitude >= 0.0) || !amplitude.is_finite() {
        return Err(Error::InvalidArgument(format!("amplitude must be >= 0, got {amplitude}")));
    }
    if !(cutoff >= 0.0) || cutoff > 16.0 {
        return Err(Error::InvalidArgument(format!("mode cutoff must lie in [0, 16], got {cutoff}")));
    }
    if degree > 4 {
        return Err(Error::Degree { op: "random_field", degree });
    }
    let width = ncomp(degree) * group.dim();
    let kmax = cutoff.floor() as i32;
    let modes = modes(seed, cutoff, width);
    let peak = synthesize(&modes, kmax, REFERENCE_N, width)
        .chunks(width)
        .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let scale = if peak > 0.0 { amplitude / peak } else { 0.0 };
    let mut out = Form::zeros(grid, group, degree);
    out.data_mut()
        .iter_mut()
        .zip(synthesize(&modes, kmax, grid.n(), width))
        .for_each(|(o, v)| *o = scale * v);
    Ok(out)
}

pub fn random_connection(
    grid: Torus4,
    group: GroupKind,
    seed: u64,
    amplitude: f64,
    cutoff: f64,
) -> Result<Connection> {
    Connection::new(random_field(grid, group, 1, seed, amplitude, cutoff)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_amplitude_and_determinism() {
        let g = Torus4::new(3).unwrap();
        let z = random_connection(g, GroupKind::Su2, 1, 0.0, 2.0).unwrap();
        assert_eq!(z.form().max_abs(), 0.0);
        let a = random_connection(g, GroupKind::Su2, 7, 0.3, 2.0).unwrap();
        let b = random_connection(g, GroupKind::Su2, 7, 0.3, 2.0).unwrap();
        assert_eq!(a, b);
        assert!(random_connection(g, GroupKind::Su2, 7, -0.1, 2.0).is_err());
    }

    #[test]
    fn amplitude_is_resolution_independent() {
        // On the reference grid the peak is exactly the amplitude; other
        // grids sample the same continuum field.
        let g = Torus4::new(REFERENCE_N).unwrap();
        let a = random_field(g, GroupKind::Su2, 1, 3, 0.5, 1.5).unwrap();
        let peak = (0..g.sites()).map(|s| a.pointwise_norm(s)).fold(0.0, f64::max);
        assert!((peak - 0.5).abs() < 1e-12);
        let g6 = Torus4::new(6).unwrap();
        let b = random_field(g6, GroupKind::Su2, 1, 3, 0.5, 1.5).unwrap();
        // x = (1/6, 0, 0, 0) is site (2,0,0,0) on the reference grid.
        let s6 = g6.site([1, 0, 0, 0]);
        let s12 = g.site([2, 0, 0, 0]);
        for (x, y) in b.site(s6).iter().zip(a.site(s12)) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn separable_synthesis_matches_direct_sum() {
        let g = Torus4::new(5).unwrap();
        let modes = modes(11, 2.5, 6);
        let fast = synthesize(&modes, 2, 5, 6);
        let mut buf = vec![0.0; 6];
        for site in 0..g.sites() {
            evaluate(&modes, g.position(site), &mut buf);
            for (x, y) in fast[site * 6..(site + 1) * 6].iter().zip(&buf) {
                assert!((x - y).abs() < 1e-12, "site {site}: {x} vs {y}");
            }
        }
    }
}
