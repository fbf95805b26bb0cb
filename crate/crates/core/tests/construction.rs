use std::sync::OnceLock;

use betaprod::cantor::{path_structure, verify_orbit, Construction, ConstructionSpec, SamplePath};
use betaprod::numerics::expand;
use betaprod::words::is_admissible;
use proptest::prelude::*;

fn two_levels() -> &'static Construction {
    static C: OnceLock<Construction> = OnceLock::new();
    C.get_or_init(|| Construction::plan(&ConstructionSpec::reference(2, 0, 1)).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sampled_descents_are_sound(seed in any::<u64>(), index in 0u64..1_000_000) {
        let c = two_levels();
        let p = SamplePath::new(c, seed, index);
        prop_assert!(path_structure(c, &p).unwrap());
        for j in 0..2 {
            let depth = c.levels[1].depth[j];
            let w = p.prefix(j, depth).unwrap();
            prop_assert!(is_admissible(w.digits(), &c.betas[j]));
            // the exact orbit sees the first hit and no approximation better than (1−δ)ψ
            prop_assert!(verify_orbit(c, &p, j, 1).unwrap().is_empty());
            // the level-1 corner re-expands to the level-1 word
            let corner = p.exact_corner(j, 1).unwrap();
            let n1 = c.levels[0].depth[j] as usize;
            prop_assert_eq!(expand(&corner, &c.betas[j], n1).unwrap(), p.prefix(j, n1 as u64).unwrap());
        }
        let x = p.point().unwrap();
        for (j, v) in x.iter().enumerate() {
            let lo = p.exact_corner(j, 1).unwrap().to_f64();
            // the level-1 side is far below one ulp
            prop_assert!((v - lo).abs() <= 4.0 * f64::EPSILON * lo, "{v} vs {lo}");
        }
    }
}

#[test]
fn reference_levels_are_nested() {
    let c = two_levels();
    for l in &c.levels {
        for j in 0..2 {
            assert_eq!(l.start[j] + l.added[j], l.depth[j]);
        }
    }
    assert_eq!(c.levels[1].start, c.levels[0].depth);
}
