use cryochain::scenario::MAX_SEED;
use cryochain::{parse_scenario, to_toml, Scenario, Strictness};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn serialized_scenarios_parse_back_equal(
        seed in 0..=MAX_SEED,
        name in "[a-z][a-z0-9_]{0,12}",
        lower in 0.005..0.03f64,
        gap in 0.001..0.05f64,
        gain in 5.0..25.0f64,
        stages in 1usize..5,
        mu in 0.1..8.0f64,
        pixels in 0u32..5,
        rate in 0.0..1e7f64,
        output in proptest::option::of("[a-z]{1,8}"),
    ) {
        let mut s = Scenario { seed, name, output, ..Scenario::default() };
        s.trigger.lower.threshold = lower;
        s.trigger.upper.threshold = lower + gap;
        let mut chain = s.chain.stages().to_vec();
        chain.truncate(1);
        chain[0].gain_db = gain;
        while chain.len() < stages {
            chain.push(chain[0].clone());
        }
        s.chain = cryochain_core::analog::Chain::new(chain).unwrap();
        s.sweep.mean_photon_number = mu;
        s.simulate.pixel_count = pixels;
        s.heat.switching_rate = rate;
        let text = to_toml(&s).unwrap();
        let back = parse_scenario(&text, Strictness::Strict).unwrap();
        prop_assert!(back.warnings.is_empty());
        prop_assert_eq!(back.scenario, s);
    }
}
