use proptest::prelude::*;
use rand::Rng;
use slb_synth::config::GeneratorConfig;
use slb_synth::dataset::{decode_slb, encode_slb, quantize_depth, DEPTH_SCALE};
use slb_synth::seed::{frame_seed, stage_rng};

proptest! {
    #[test]
    fn slb_round_trip_is_bit_exact(w in 1u32..12, h in 1u32..12, bits in prop::collection::vec(any::<u32>(), 432)) {
        let data: Vec<[f32; 3]> =
            (0..(w * h) as usize).map(|i| [0, 1, 2].map(|c| f32::from_bits(bits[(3 * i + c) % bits.len()]))).collect();
        let bytes = encode_slb(3, w, h, &data);
        prop_assert_eq!(bytes.len(), 16 + 12 * data.len());
        let (dw, dh, back) = decode_slb(&bytes).unwrap();
        prop_assert_eq!((dw, dh), (w, h));
        for (a, b) in data.iter().zip(&back) {
            prop_assert_eq!(a.map(f32::to_bits), b.map(f32::to_bits));
        }
        prop_assert!(decode_slb(&bytes[..bytes.len() - 1]).is_err());
    }

    #[test]
    fn depth_quantization_error_is_bounded(d in 1e-5f32..6.5535) {
        let q = quantize_depth(d);
        prop_assert!(q >= 1);
        let err = (q as f64 / DEPTH_SCALE - d as f64).abs();
        // Half a step, or the distance up to the smallest code for tiny depths.
        prop_assert!(err <= 0.5e-4 + 1e-12 || (q == 1 && (d as f64) < 1e-4), "depth {} -> {} ({} m)", d, q, err);
    }

    #[test]
    fn depth_beyond_range_saturates(d in 6.55355f32..100.0) {
        prop_assert_eq!(quantize_depth(d), u16::MAX);
    }

    #[test]
    fn frame_seeds_depend_on_master_and_index(master in any::<u64>(), index in 0u64..1_000_000) {
        let s = frame_seed(master, index);
        prop_assert_eq!(s, frame_seed(master, index));
        prop_assert_ne!(s, frame_seed(master, index + 1));
        prop_assert_ne!(s, frame_seed(master.wrapping_add(1), index));
    }

    #[test]
    fn stage_streams_are_independent(seed in any::<u64>()) {
        let a: u64 = stage_rng(seed, "plane").random();
        let b: u64 = stage_rng(seed, "select").random();
        prop_assert_ne!(a, b);
        prop_assert_eq!(a, stage_rng(seed, "plane").random::<u64>());
    }

    #[test]
    fn config_toml_round_trip(
        seed in any::<u64>(),
        count in 0u32..4,
        p in 0.0f64..=1.0,
        ssao in any::<bool>(),
        width in 16u32..2000,
    ) {
        let mut cfg: GeneratorConfig = GeneratorConfig::from_toml(
            "seed = 1\nobject_count = 2\n[[meshes]]\nid = \"a\"\npath = \"a.obj\"\nclass_id = 1\n[[meshes]]\nid = \"b\"\npath = \"b.obj\"\nclass_id = 2\n[[meshes]]\nid = \"c\"\npath = \"c.obj\"\nclass_id = 2\nclass_name = \"b\"\n",
            std::path::Path::new("inline.toml"),
        )
        .unwrap();
        cfg.seed = seed;
        cfg.object_count = count;
        cfg.fallback_probability = p;
        cfg.render.ssao = ssao;
        cfg.camera = cfg.camera.resized(width, width * 3 / 4);
        cfg.validate().unwrap();
        let back = GeneratorConfig::from_toml(&cfg.to_toml(), std::path::Path::new("inline.toml")).unwrap();
        prop_assert_eq!(&back, &cfg);
        prop_assert_eq!(back.content_hash(), cfg.content_hash());
    }
}
