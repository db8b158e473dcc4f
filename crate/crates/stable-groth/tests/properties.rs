use num_traits::{One, Zero};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use stable_groth::fivevertex::path_to_config;
use stable_groth::graph::{dim, sample_conditioned_path, GraphPath};
use stable_groth::grothendieck::{G_eval, GrothendieckParams};
use stable_groth::partitions::Partition;
use stable_groth::scalar::q;
use stable_groth::tasep::{trajectory, JumpLaw};
use stable_groth::Rational;

fn partition(max_len: usize, max_part: usize) -> impl Strategy<Value = Partition> {
    prop::collection::vec(0..=max_part, 0..=max_len).prop_map(|mut v| {
        v.sort_unstable_by(|a, b| b.cmp(a));
        Partition::new(v).unwrap()
    })
}

fn small_rational() -> impl Strategy<Value = Rational> {
    (-6i64..=6, 2i64..=9).prop_map(|(n, d)| q(n, d))
}

fn points(k: usize) -> impl Strategy<Value = Vec<Rational>> {
    prop::collection::vec((-5i64..=5, 6i64..=13).prop_map(|(n, d)| q(n, d)), 1..=k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn grothendieck_symmetric_and_stable(lam in partition(3, 3), xs in points(3), a in small_rational(), b in small_rational(), shift in 0usize..3) {
        // G has a pole where 1 − a·x vanishes
        prop_assume!(xs.iter().all(|x| a.clone() * x != Rational::one()));
        let par = GrothendieckParams::new(a, b);
        let v = G_eval(&lam, &xs, &par).unwrap();
        let mut rot = xs.clone();
        rot.rotate_left(shift % xs.len());
        prop_assert_eq!(&v, &G_eval(&lam, &rot, &par).unwrap());
        let mut padded = xs.clone();
        padded.push(Rational::zero());
        prop_assert_eq!(&v, &G_eval(&lam, &padded, &par).unwrap());
    }

    /// A path of the graded graph and its five-vertex picture carry the same
    /// weight up to (1−p)^N p^{|λ|}.
    #[test]
    fn path_weight_matches_configuration(lam in partition(3, 4), extra in 0usize..3, seed in any::<u64>()) {
        let pp = q(2, 7);
        let n = lam.len().max(1) + extra;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let path = sample_conditioned_path(&lam, n, &pp, &mut rng).unwrap();
        prop_assert_eq!(path.last(), &lam);
        let cfg = path_to_config(&path, lam.first() + n + 1).unwrap();
        prop_assert!(cfg.is_valid() && cfg.is_domain_wall());
        let top: Vec<usize> = (1..=n).map(|i| lam.part(i) + n + 1 - i).rev().collect();
        prop_assert_eq!(cfg.filled_above(n), top);
        let factor = num_traits::pow(Rational::one() - &pp, n) * num_traits::pow(pp.clone(), lam.size());
        prop_assert_eq!(cfg.weight(&pp).unwrap(), factor * path.weight(&pp));
    }

    #[test]
    fn conditioned_paths_have_positive_weight(lam in partition(2, 3), seed in any::<u64>()) {
        let pp = q(1, 3);
        let n = lam.len().max(1) + 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let path: GraphPath = sample_conditioned_path(&lam, n, &pp, &mut rng).unwrap();
        let w = path.weight(&pp);
        prop_assert!(w > Rational::zero() && w <= dim(&lam, n, &pp));
    }

    #[test]
    fn tasep_keeps_exclusion(seed in any::<u64>(), steps in 1usize..40) {
        let law = JumpLaw::new(q(3, 5), q(1, 5)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for c in trajectory(steps, &law, &mut rng) {
            let y = c.positions(c.lambda.len() + 1);
            prop_assert!(y.windows(2).all(|w| w[0] > w[1]));
            prop_assert!(c.lambda.len() <= c.t);
        }
    }
}
