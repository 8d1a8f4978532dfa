mod common;

use archopt::{load_architecture, parse_architecture, save_architecture};
use archopt_core::solve;
use common::random_architecture;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn save_then_load_is_identity(seed in any::<u64>()) {
        let arch = random_architecture(&mut ChaCha8Rng::seed_from_u64(seed));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        save_architecture(&arch, &path).unwrap();
        let back = load_architecture(&path).unwrap();
        prop_assert_eq!(&back, &arch);
        prop_assert_eq!(solve(&back), solve(&arch));
    }

    #[test]
    fn serialized_text_is_stable(seed in any::<u64>()) {
        let arch = random_architecture(&mut ChaCha8Rng::seed_from_u64(seed));
        let text = archopt::io::to_json(&arch);
        prop_assert_eq!(archopt::io::to_json(&parse_architecture(&text).unwrap()), text);
    }
}
