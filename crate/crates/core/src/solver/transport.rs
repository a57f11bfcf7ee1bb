use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::spectral::{
    dealias_in_place, inverse_many, leray_in_place, transform_many, Fft3, SpectralVectorField,
};
use crate::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transport {
    Enabled,
    /// Damped Stokes: the nonlinearity is dropped.
    Disabled,
}

/// `P` of the dealiased skew-symmetric transport `½[(v·∇)u + ∇·(v⊗u)]` with
/// `v` the Gaussian mollification of `u` at width `delta`.
pub fn transport_term<T: Real>(
    u: &SpectralVectorField<T>,
    delta: T,
    fft: &Fft3<T>,
) -> SpectralVectorField<T> {
    let mollifier = (delta > T::zero()).then(|| {
        let d2 = delta * delta;
        u.grid()
            .k_squared()
            .iter()
            .map(|&q| (-d2 * q).exp())
            .collect::<Vec<T>>()
    });
    evaluate(u, mollifier.as_deref(), fft).0
}

/// Per-axis wavenumbers with the Nyquist entry zeroed.
fn derivative_wavenumbers<T: Real>(u: &SpectralVectorField<T>) -> Vec<T> {
    let grid = u.grid();
    let mut k = grid.wavenumbers();
    k[grid.n() / 2] = T::zero();
    k
}

fn scaled_by<T: Real>(c: &[Complex<T>], s: &[T]) -> Vec<Complex<T>> {
    c.iter().zip(s).map(|(z, &m)| z.scale(m)).collect()
}

/// `i k_j c` for each `j`.
fn derivatives<T: Real>(c: &[Complex<T>], k: &[T], n: usize) -> [Vec<Complex<T>>; 3] {
    let mut out = [
        vec![Complex::default(); c.len()],
        vec![Complex::default(); c.len()],
        vec![Complex::default(); c.len()],
    ];
    let mut idx = 0;
    for i0 in 0..n {
        for i1 in 0..n {
            for i2 in 0..n {
                let z = c[idx];
                let iz = Complex::new(-z.im, z.re);
                out[0][idx] = iz.scale(k[i0]);
                out[1][idx] = iz.scale(k[i1]);
                out[2][idx] = iz.scale(k[i2]);
                idx += 1;
            }
        }
    }
    out
}

pub(crate) fn max_speed<T: Real>(u: &SpectralVectorField<T>, fft: &Fft3<T>) -> T {
    let phys = inverse_many(u.components(), fft, u.grid());
    speed_of(&phys)
}

fn speed_of<T: Real>(phys: &[Vec<T>]) -> T {
    (0..phys[0].len())
        .map(|x| {
            (phys[0][x] * phys[0][x] + phys[1][x] * phys[1][x] + phys[2][x] * phys[2][x]).sqrt()
        })
        .fold(T::zero(), T::max)
}

/// Transport term and `max|u|` on the grid.
pub(crate) fn evaluate<T: Real>(
    u: &SpectralVectorField<T>,
    mollifier: Option<&[T]>,
    fft: &Fft3<T>,
) -> (SpectralVectorField<T>, T) {
    let grid = u.grid().clone();
    let n = grid.n();
    let k = derivative_wavenumbers(u);

    let mut spectral: Vec<Vec<Complex<T>>> = Vec::with_capacity(15);
    for c in 0..3 {
        spectral.push(match mollifier {
            Some(m) => scaled_by(u.component(c), m),
            None => u.component(c).to_vec(),
        });
    }
    if mollifier.is_some() {
        for c in 0..3 {
            spectral.push(u.component(c).to_vec());
        }
    }
    for c in 0..3 {
        spectral.extend(derivatives(u.component(c), &k, n));
    }
    let phys = inverse_many(&spectral, fft, &grid);
    let v = &phys[0..3];
    let (uu, grads) = if mollifier.is_some() {
        (&phys[3..6], &phys[6..15])
    } else {
        (&phys[0..3], &phys[3..12])
    };
    let len = grid.len();

    // (v·∇)u_i and the products v_j u_i.
    let mut products: Vec<Vec<T>> = Vec::with_capacity(12);
    for i in 0..3 {
        let g = &grads[3 * i..3 * i + 3];
        products.push(
            (0..len)
                .map(|x| v[0][x] * g[0][x] + v[1][x] * g[1][x] + v[2][x] * g[2][x])
                .collect(),
        );
    }
    let symmetric = mollifier.is_none();
    for i in 0..3 {
        for j in 0..3 {
            if symmetric && j < i {
                continue;
            }
            products.push((0..len).map(|x| v[j][x] * uu[i][x]).collect());
        }
    }
    let hat = transform_many(&products, fft, &grid);
    // Index of the transformed v_j u_i.
    let pair = |i: usize, j: usize| -> usize {
        if symmetric {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            3 + a * 3 - a * (a + 1) / 2 + b
        } else {
            3 + 3 * i + j
        }
    };

    let half = T::lit(0.5);
    let mut out = SpectralVectorField::zeros(grid.clone());
    for i in 0..3 {
        let p = [&hat[pair(i, 0)], &hat[pair(i, 1)], &hat[pair(i, 2)]];
        let adv = &hat[i];
        let dst = out.component_mut(i);
        let mut idx = 0;
        for i0 in 0..n {
            for i1 in 0..n {
                for i2 in 0..n {
                    let div =
                        p[0][idx].scale(k[i0]) + p[1][idx].scale(k[i1]) + p[2][idx].scale(k[i2]);
                    let idiv = Complex::new(-div.im, div.re);
                    dst[idx] = (adv[idx] + idiv).scale(half);
                    idx += 1;
                }
            }
        }
    }
    dealias_in_place(&mut out);
    out.enforce_invariants();
    leray_in_place(&mut out);
    (out, speed_of(uu))
}
