//! Wide seeded scan of the thicken-then-glue roundtrip: every generated
//! structure (including empty and degenerate carriers) must certify both
//! displayed equivalences with exactly carried structures.

use ccx_core::fixtures::*;
use ccx_core::rat::rat;
use ccx_core::ring::Ring;

#[test]
fn roundtrip_certifies_across_two_hundred_structures() {
    let params = FixtureParams {
        ring: Ring::Int,
        space_points: 4,
        max_rank: 2,
        max_degree: 2,
        coeff_bound: 2,
    };
    let mut exercised = 0;
    for guard in 0..200u64 {
        let mut r = Rng::new(0xA11CE ^ 1).fork(guard);
        let sp = random_space(&mut r, &params);
        let c = random_complex(&mut r, &params, &sp, &rat(1));
        let n = 1 + r.range(0, 1) as i64;
        let Some(q) = random_structure(&mut r, &c, n, &rat(1), 2) else {
            continue;
        };
        let rt = ccx_core::boundary::thicken_thom_roundtrip(&q)
            .unwrap_or_else(|e| panic!("seed {guard}: {e}"));
        assert!(ccx_core::homotopy::replay_equivalence(&rt.f, &rt.f_cert).is_ok());
        assert!(
            ccx_core::homotopy::replay_equivalence(&rt.f_prime, &rt.f_prime_cert).is_ok()
        );
        exercised += 1;
    }
    assert!(exercised > 150, "only {exercised} structures exercised");
}
