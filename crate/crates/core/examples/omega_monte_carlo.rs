// Closed-form probabilities against direct simulation of the same draws.

use gbda::oracle::{mc_omega, random_query};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for i in 0..10 {
        let q = random_query(&mut rng, i, 8, 4, if i % 2 == 0 { 4 } else { 60 });
        let closed = q.closed_form().unwrap();
        let mc = mc_omega(q, 100_000, i as u64);
        println!("{q:?}\n    closed {closed:.5} simulated {:.5} z {:+.2}", mc.estimate, mc.z_score(closed));
    }
}
