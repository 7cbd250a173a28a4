//! Seeded random generation of the objects the test machinery consumes.
//!
//! Every generator takes an explicit RNG so callers control determinism.
//! `rng(seed, stream)` builds independent deterministic streams from one
//! seed, which lets batched trials draw per-index randomness without
//! sharing mutable state across threads.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::matrix::ComplexMatrix;
use crate::measurement::Effect;
use crate::state::{bloch_to_density, BlochVector, DensityMatrix, EnsembleDecomposition};
use crate::temporal::Channel;

/// Deterministic RNG: one seed, many independent streams.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// Uniform direction on the unit sphere.
pub fn random_unit_bloch(r: &mut impl Rng) -> BlochVector {
    let z: f64 = r.gen_range(-1.0..=1.0);
    let phi: f64 = r.gen_range(0.0..std::f64::consts::TAU);
    let s = (1.0 - z * z).max(0.0).sqrt();
    BlochVector::new(s * phi.cos(), s * phi.sin(), z).expect("unit vector is in the ball")
}

/// Uniform direction scaled by a uniform weight: a random pure state mixed
/// with I/2. Covers the whole ball, surface included at weight 1.
pub fn random_bloch_in_ball(r: &mut impl Rng) -> BlochVector {
    let w: f64 = r.gen_range(0.0..=1.0);
    random_unit_bloch(r).scale(w)
}

pub fn random_pure(r: &mut impl Rng) -> DensityMatrix {
    bloch_to_density(&random_unit_bloch(r))
}

pub fn random_mixed(r: &mut impl Rng) -> DensityMatrix {
    bloch_to_density(&random_bloch_in_ball(r))
}

/// Flat random weights: normalized exponentials.
pub fn random_weights(r: &mut impl Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| -r.gen_range(f64::MIN_POSITIVE..1.0_f64).ln()).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / total).collect()
}

/// Ensemble of 2 to 4 random mixed states with random weights.
pub fn random_ensemble(r: &mut impl Rng) -> EnsembleDecomposition {
    let n = r.gen_range(2..=4);
    let weights = random_weights(r, n);
    let members = weights
        .into_iter()
        .map(|w| (w, random_mixed(r)))
        .collect();
    EnsembleDecomposition::new(members).expect("weights normalized by construction")
}

/// Two different two-member decompositions of the same average state.
/// Each splits the common center v as p(v + (1-p)s u) + (1-p)(v - p s u)
/// with s small enough that both endpoints stay inside the ball.
pub fn random_equal_mix_pair(
    r: &mut impl Rng,
) -> (EnsembleDecomposition, EnsembleDecomposition) {
    fn split(r: &mut impl Rng, center: &BlochVector) -> EnsembleDecomposition {
        let p: f64 = r.gen_range(0.2..=0.8);
        let u = random_unit_bloch(r);
        let headroom = (1.0 - center.radius()).max(0.0) / p.max(1.0 - p);
        let s: f64 = r.gen_range(0.0..=headroom);
        let plus = BlochVector::new(
            center.x() + (1.0 - p) * s * u.x(),
            center.y() + (1.0 - p) * s * u.y(),
            center.z() + (1.0 - p) * s * u.z(),
        )
        .expect("headroom keeps the endpoint inside the ball");
        let minus = BlochVector::new(
            center.x() - p * s * u.x(),
            center.y() - p * s * u.y(),
            center.z() - p * s * u.z(),
        )
        .expect("headroom keeps the endpoint inside the ball");
        EnsembleDecomposition::new(vec![
            (p, bloch_to_density(&plus)),
            (1.0 - p, bloch_to_density(&minus)),
        ])
        .expect("weights p and 1-p sum to 1")
    }
    let center = random_bloch_in_ball(r);
    (split(r, &center), split(r, &center))
}

/// Haar-like qubit unitary from a uniform axis and angle.
pub fn random_unitary(r: &mut impl Rng) -> ComplexMatrix {
    let axis = random_unit_bloch(r);
    let theta: f64 = r.gen_range(0.0..std::f64::consts::TAU);
    let (sin, cos) = (theta / 2.0).sin_cos();
    let mut u = ComplexMatrix::identity(2).scale(cos);
    for (k, component) in [axis.x(), axis.y(), axis.z()].into_iter().enumerate() {
        let sigma = ComplexMatrix::pauli(k + 1).expect("index in range");
        u = u + sigma.scale_complex(Complex64::new(0.0, -sin * component));
    }
    u
}

/// Random qubit effect: uniform eigenvalues in [0, 1] conjugated by a
/// random unitary.
pub fn random_effect(r: &mut impl Rng) -> Effect {
    let d = ComplexMatrix::from_real_diagonal(&[r.gen_range(0.0..=1.0), r.gen_range(0.0..=1.0)])
        .expect("diagonal is finite");
    let u = random_unitary(r);
    Effect::new(&u * d * u.adjoint()).expect("conjugated diagonal stays within bounds")
}

/// Random qubit channel: a unitary, a depolarization, or one after the other.
pub fn random_channel(r: &mut impl Rng) -> Channel {
    match r.gen_range(0..3) {
        0 => Channel::unitary(random_unitary(r)).expect("construction is unitary"),
        1 => Channel::depolarizing(r.gen_range(0.0..=1.0)).expect("strength in range"),
        _ => {
            let u = random_unitary(r);
            let base = Channel::depolarizing(r.gen_range(0.0..=1.0)).expect("strength in range");
            let kraus = base.kraus().iter().map(|k| &u * k).collect();
            Channel::new(kraus).expect("unitary composition preserves completeness")
        }
    }
}
