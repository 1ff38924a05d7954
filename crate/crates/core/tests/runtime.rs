use proptest::prelude::*;
use rand_pcg::rand_core::Rng;
use tortuga::gen::{GenConfig, ProgramGenerator};
use tortuga::runtime::{rng::WORLD_STREAM, BASE_COLORS};
use tortuga::{execute, new_world, parse_source, PrimitiveRegistry, WorldBounds};

/// Replays the documented draw procedures on top of an independent PCG32.
struct Oracle(rand_pcg::Pcg32);

impl Oracle {
    fn new(seed: u64) -> Self {
        Oracle(rand_pcg::Pcg32::new(seed, WORLD_STREAM))
    }

    fn below(&mut self, n: u32) -> u32 {
        let threshold = (u32::MAX - n + 1) % n;
        loop {
            let r = self.0.next_u32();
            if r >= threshold {
                return r % n;
            }
        }
    }

    fn unit(&mut self) -> f64 {
        let a = self.0.next_u32() >> 5;
        let b = self.0.next_u32() >> 6;
        (f64::from(a) * 67_108_864.0 + f64::from(b)) / 9_007_199_254_740_992.0
    }
}

#[test]
fn scattered_turtles_match_replayed_stream() {
    let reg = PrimitiveRegistry::builtin();
    let mut world = new_world(WorldBounds::square(16), 42).unwrap();
    let ast = parse_source("create-turtles 10 [ setxy random-xcor random-ycor ]", reg).unwrap();
    assert!(execute(&ast, &mut world, reg).is_success());

    let mut oracle = Oracle::new(42);
    let mut expected = Vec::new();
    for _ in 0..10 {
        let color = BASE_COLORS[oracle.below(14) as usize];
        let heading = f64::from(oracle.below(360));
        expected.push((color, heading));
    }
    let turtles: Vec<_> = world.turtles().collect();
    assert_eq!(turtles.len(), 10);
    for (t, (color, heading)) in turtles.iter().zip(expected) {
        let x = -16.5 + oracle.unit() * 33.0;
        let y = -16.5 + oracle.unit() * 33.0;
        assert_eq!((t.color, t.heading), (color, heading), "turtle {}", t.id);
        assert_eq!((t.xcor, t.ycor), (x, y), "turtle {}", t.id);
    }
}

#[test]
fn random_matches_replayed_stream() {
    let reg = PrimitiveRegistry::builtin();
    let mut world = new_world(WorldBounds::square(16), 7).unwrap();
    let ast = parse_source("print random 10 print random 0 print random 3.9", reg).unwrap();
    let out = execute(&ast, &mut world, reg);
    let mut oracle = Oracle::new(7);
    let first = oracle.below(10).to_string();
    let third = oracle.below(3).to_string();
    assert_eq!(out.output_lines, [first, "0".to_owned(), third]);
}

#[test]
fn identical_seeds_give_identical_snapshots() {
    let reg = PrimitiveRegistry::builtin();
    let mut gen = ProgramGenerator::new(3, reg, GenConfig::default());
    for _ in 0..100 {
        let ast = gen.program();
        let mut a = new_world(WorldBounds::square(4), 11).unwrap();
        let mut b = new_world(WorldBounds::square(4), 11).unwrap();
        let oa = execute(&ast, &mut a, reg);
        let ob = execute(&ast, &mut b, reg);
        assert_eq!(oa, ob);
        assert_eq!(
            serde_json::to_string(&a.snapshot()).unwrap(),
            serde_json::to_string(&b.snapshot()).unwrap()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn headings_stay_normalized(seed in any::<u64>(), gen_seed in any::<u64>()) {
        let reg = PrimitiveRegistry::builtin();
        let mut gen = ProgramGenerator::new(gen_seed, reg, GenConfig::default());
        let mut world = new_world(WorldBounds::square(3), seed).unwrap();
        let mut printed = 0;
        for _ in 0..5 {
            let out = execute(&gen.program(), &mut world, reg);
            printed += out.output_lines.len();
            prop_assert_eq!(world.output().len(), printed);
            for t in world.turtles() {
                prop_assert!((0.0..360.0).contains(&t.heading));
                prop_assert!((0.0..140.0).contains(&t.color));
                prop_assert!(world.bounds().contains_point(t.xcor, t.ycor));
            }
        }
    }

    #[test]
    fn delta_reconstructs_target(seed in any::<u64>(), gen_seed in any::<u64>()) {
        let reg = PrimitiveRegistry::builtin();
        let mut gen = ProgramGenerator::new(gen_seed, reg, GenConfig::default());
        let mut world = new_world(WorldBounds::square(3), seed).unwrap();
        let mut view = world.snapshot();
        for _ in 0..4 {
            execute(&gen.program(), &mut world, reg);
            let next = world.snapshot();
            let delta = view.diff(&next);
            view.apply(&delta);
            prop_assert_eq!(&view, &next);
        }
    }
}
