//! Shared generators for the integration and acceptance ensembles.
#![allow(dead_code)] // not every test target uses every generator

use nalgebra::DMatrix;
use rand::Rng;

use genie_mac_core::ensemble;
use genie_mac_core::GenieMacInstance;

/// A random feasible genie-MAC instance for `h_s` with noise bound `n`,
/// built by the elimination construction: pick `T` with quadratic forms
/// `t_i' Sigma t_i` strictly inside the bound, a random strictly-lower
/// slack `L`, and solve `T' G = upper(h_s) + L`.
///
/// Column directions come from a random orthogonal matrix, so `T` stays
/// well conditioned and the instance is numerically representative.
pub fn sample_feasible<R: Rng>(
    rng: &mut R,
    h_s: &DMatrix<f64>,
    n: f64,
    whitened: bool,
) -> GenieMacInstance {
    let k = h_s.nrows();
    let sigma = if whitened {
        DMatrix::identity(k, k)
    } else {
        ensemble::sample_spd(rng, k)
    };
    let raw = DMatrix::from_fn(k, k, |_, _| rng.gen_range(-1.0..=1.0));
    let mut t = raw.qr().q();
    for j in 0..k {
        let col = t.column(j).into_owned();
        let quad = (&sigma * &col).dot(&col);
        let target = rng.gen_range(0.5..=1.0_f64).powi(2) * n;
        let scaled = col * (target / quad).sqrt();
        t.set_column(j, &scaled);
    }
    let scale = h_s.iter().fold(0.0_f64, |m, &x| m.max(x.abs())).max(1e-3);
    let mut rhs = DMatrix::from_fn(k, k, |i, j| if i <= j { h_s[(i, j)] } else { 0.0 });
    for j in 0..k {
        for i in (j + 1)..k {
            rhs[(i, j)] = rng.gen_range(-1.0..=1.0) * scale;
        }
    }
    let g = t
        .transpose()
        .lu()
        .solve(&rhs)
        .expect("conditioned T is invertible");
    GenieMacInstance::new(g, sigma, t).expect("construction is valid")
}

/// Random degraded channel matching the acceptance ensemble: K users, gains
/// in [0, 4], deliberate adjacent ties in 10% of draws.
pub fn acceptance_degraded<R: Rng>(rng: &mut R, k: usize, p: f64, n: f64) -> genie_mac_core::DegradedChannel {
    ensemble::sample_degraded(rng, k, 4.0, 0.1, p, n)
}
