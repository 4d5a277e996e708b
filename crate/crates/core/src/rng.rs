use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// An independent random stream identified by `(seed, stream)`.
pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-trial seed: a function of the master seed and the trial index only.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    stream(master, trial).next_u64()
}

/// Exponential variate with the given rate; infinite when the rate is zero.
pub fn exp(rng: &mut SimRng, rate: f64) -> f64 {
    if rate <= 0.0 {
        return f64::INFINITY;
    }
    use rand_distr::{Distribution, Exp};
    Exp::new(rate).expect("positive rate").sample(rng)
}
