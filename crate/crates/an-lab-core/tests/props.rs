use an_lab_core::design::{
    optimize_two_point_instantaneous, optimize_two_point_statistical, TwoPointPowerLaw,
};
use an_lab_core::qam::{
    half_distance_from_energy, ChannelRealization, Constellation, NoiseModel,
};
use an_lab_core::ser::{
    aser_fixed_an_power, ser_best_phase, ser_gaussian_an, ser_phase_amp, ChannelStats,
    InstantaneousContext, StatisticalContext,
};
use num_complex::Complex;
use proptest::prelude::*;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ORDERS: [u32; 3] = [4, 16, 64];

fn ctx(order: u32, a: f64, h: f64, g: f64, sigma: f64) -> InstantaneousContext<f64> {
    InstantaneousContext {
        constellation: Constellation::new(order, a, 1.0).unwrap(),
        channel: ChannelRealization {
            h: Complex::new(h, 0.0),
            g: Complex::new(g, 0.0),
        },
        noise: NoiseModel::from_n0(2.0 * sigma * sigma, 1.0).unwrap(),
    }
}

fn stat_ctx(order: u32, em: f64, sigma_h_sq: f64, sigma_g_sq: f64) -> StatisticalContext<f64> {
    let a = half_distance_from_energy(em, 1.0, order).unwrap();
    StatisticalContext::new(
        Constellation::new(order, a, 1.0).unwrap(),
        ChannelStats {
            sigma_h_sq,
            sigma_g_sq,
        },
        NoiseModel::from_n0(1.0, 1.0).unwrap(),
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    // Every closed form stays inside [0, (M-1)/M] up to numerical noise.
    #[test]
    fn probabilities_respect_non_informative_bound(
        a in 0.05f64..8.0,
        theta in 0.0f64..std::f64::consts::TAU,
        z_amp in 0.0f64..40.0,
        g in 0.1f64..3.0,
        m_idx in 0usize..3,
    ) {
        let order = ORDERS[m_idx];
        let bound = (f64::from(order) - 1.0) / f64::from(order) + 1e-9;
        let ctx = ctx(order, a, 1.0, g, 1.0);

        let s = ser_phase_amp(&ctx, z_amp, theta);
        prop_assert!((0.0..=bound).contains(&s), "ser_phase_amp = {s}");

        let (best, _) = ser_best_phase(&ctx, z_amp);
        prop_assert!((0.0..=bound).contains(&best), "ser_best_phase = {best}");

        let gauss = ser_gaussian_an(&ctx, z_amp * z_amp).unwrap();
        prop_assert!((0.0..=bound).contains(&gauss), "ser_gaussian_an = {gauss}");

        let sctx = stat_ctx(order, 1.0 + a, 1.0, g);
        let aser = aser_fixed_an_power(&sctx, z_amp * z_amp).unwrap();
        prop_assert!((0.0..=bound).contains(&aser), "aser = {aser}");
    }

    // Rotating the equalized AN phase by a quadrant, or reflecting it about
    // pi/4, leaves the SER unchanged.
    #[test]
    fn phase_periodicity_and_symmetry(
        a in 0.3f64..8.0,
        theta in 0.0f64..std::f64::consts::TAU,
        z_amp in 0.0f64..30.0,
        m_idx in 0usize..3,
    ) {
        let ctx = ctx(ORDERS[m_idx], a, 1.0, 1.0, 1.0);
        let base = ser_phase_amp(&ctx, z_amp, theta);
        let quarter_turn = ser_phase_amp(&ctx, z_amp, theta + std::f64::consts::FRAC_PI_2);
        let mirrored = ser_phase_amp(&ctx, z_amp, std::f64::consts::FRAC_PI_2 - theta);
        prop_assert!((base - quarter_turn).abs() < 1e-12);
        prop_assert!((base - mirrored).abs() < 1e-12);
    }

    // Every constructible law satisfies the budget identity.
    #[test]
    fn power_law_budget_identity(
        p_bar in 1e-3f64..100.0,
        f1 in 0.0f64..1.0,
        spread in 0.0f64..10.0,
    ) {
        let x1 = p_bar * f1;
        let x2 = p_bar * (1.0 + spread);
        let law = TwoPointPowerLaw::from_support(p_bar, x1, x2, None, None).unwrap();
        prop_assert!((0.0..=1.0).contains(&law.p), "p = {}", law.p);
        prop_assert!((law.expected_power() - p_bar).abs() < 1e-12);
    }
}

#[test]
fn ser_monotone_in_source_gain() {
    // Stronger source link, lower SER, at both candidate phases.
    for theta in [0.0, std::f64::consts::FRAC_PI_4] {
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            let h = 0.05 + 4.95 * (k as f64) / 199.0;
            let c = ctx(16, 10f64.sqrt(), h, 1.0, 0.5f64.sqrt());
            let s = ser_phase_amp(&c, 2.0, theta);
            assert!(s <= prev + 1e-15, "theta = {theta}, |h| = {h}");
            prev = s;
        }
    }
}

#[test]
fn ser_monotone_in_jammer_gain() {
    for theta in [0.0, std::f64::consts::FRAC_PI_4] {
        let mut prev = -1.0;
        for k in 0..200 {
            let g = 0.05 + 4.95 * (k as f64) / 199.0;
            let c = ctx(16, 10f64.sqrt(), 1.0, g, 0.5f64.sqrt());
            let s = ser_phase_amp(&c, 2.0, theta);
            assert!(s >= prev - 1e-15, "theta = {theta}, |g| = {g}");
            prev = s;
        }
    }
}

#[test]
fn ser_monotone_in_an_amplitude() {
    for theta in [0.0, std::f64::consts::FRAC_PI_8, std::f64::consts::FRAC_PI_4] {
        let c = ctx(16, 10f64.sqrt(), 1.0, 1.0, 0.5f64.sqrt());
        let mut prev = -1.0;
        for k in 0..200 {
            let z = 12.0 * (k as f64) / 199.0;
            let s = ser_phase_amp(&c, z, theta);
            assert!(s >= prev - 1e-15, "theta = {theta}, z = {z}");
            prev = s;
        }
    }
}

#[test]
fn aser_monotone_in_channel_variances() {
    // Average SER falls with the source-link variance and rises with the
    // jammer-link variance.
    let mut prev = f64::INFINITY;
    for k in 0..200 {
        let sh = 0.2 + 4.8 * (k as f64) / 199.0;
        let sctx = stat_ctx(16, 10.0, sh, 1.0);
        let v = aser_fixed_an_power(&sctx, 3.0).unwrap();
        assert!(v <= prev + 1e-15, "sigma_h_sq = {sh}");
        prev = v;
    }
    let mut prev = -1.0;
    for k in 0..200 {
        let sg = 0.2 + 4.8 * (k as f64) / 199.0;
        let sctx = stat_ctx(16, 10.0, 1.0, sg);
        let v = aser_fixed_an_power(&sctx, 3.0).unwrap();
        assert!(v >= prev - 1e-15, "sigma_g_sq = {sg}");
        prev = v;
    }
}

/// Audits the quasi-concavity assumption behind the two-candidate phase
/// rule: on a 65-point grid over [0, pi/4], no interior phase may beat both
/// endpoint phases by more than 1e-9.
#[test]
fn endpoint_phases_dominate_interior() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for case in 0..50 {
        let order = ORDERS[rng.random_range(0..3)];
        let a: f64 = rng.random_range(0.5..8.0);
        let z: f64 = rng.random_range(0.1..30.0);
        let g: f64 = rng.random_range(0.3..3.0);
        let c = ctx(order, a, 1.0, g, 1.0);

        let ser_at = |theta: f64| ser_phase_amp(&c, z, theta);
        let endpoint_max = ser_at(0.0).max(ser_at(std::f64::consts::FRAC_PI_4));
        for k in 1..64 {
            let theta = std::f64::consts::FRAC_PI_4 * (k as f64) / 64.0;
            let interior = ser_at(theta);
            assert!(
                interior <= endpoint_max + 1e-9,
                "case {case}: theta = {theta} beats both endpoints \
                 ({interior} > {endpoint_max})"
            );
        }
    }
}

#[test]
fn optimizer_dominates_deterministic_power() {
    // The deterministic law is feasible, so the optimum cannot fall below it.
    let c = ctx(16, 10f64.sqrt(), 1.0, 1.0, 0.5f64.sqrt());
    for p_bar in [0.5f64, 3.9811, 50.0] {
        let report = optimize_two_point_instantaneous(p_bar, &c).unwrap();
        let deterministic = ser_best_phase(&c, p_bar.sqrt()).0;
        assert!(report.achieved_ser >= deterministic - 1e-9, "p_bar = {p_bar}");
    }
    let sctx = stat_ctx(16, 10.0, 1.0, 1.0);
    for p_bar in [0.5f64, 10.0, 100.0] {
        let report = optimize_two_point_statistical(p_bar, &sctx).unwrap();
        let deterministic = aser_fixed_an_power(&sctx, p_bar).unwrap();
        assert!(report.achieved_ser >= deterministic - 1e-9, "p_bar = {p_bar}");
    }
}

#[test]
fn optimized_objective_monotone_in_gains() {
    // A stronger jammer link never hurts the optimal design; a stronger
    // source link never helps it.
    let p_bar = 3.9811f64;
    let mut prev = -1.0;
    for g in [0.5f64, 0.75, 1.0, 1.25, 1.5] {
        let c = ctx(16, 10f64.sqrt(), 1.0, g, 0.5f64.sqrt());
        let v = optimize_two_point_instantaneous(p_bar, &c).unwrap().achieved_ser;
        assert!(v >= prev - 1e-6, "|g| = {g}");
        prev = v;
    }
    let mut prev = f64::INFINITY;
    for h in [0.5f64, 0.75, 1.0, 1.25, 1.5] {
        let c = ctx(16, 10f64.sqrt(), h, 1.0, 0.5f64.sqrt());
        let v = optimize_two_point_instantaneous(p_bar, &c).unwrap().achieved_ser;
        assert!(v <= prev + 1e-6, "|h| = {h}");
        prev = v;
    }
    let mut prev = -1.0;
    for sg in [0.5f64, 1.0, 2.0] {
        let sctx = stat_ctx(16, 10.0, 1.0, sg);
        let v = optimize_two_point_statistical(10.0, &sctx).unwrap().achieved_ser;
        assert!(v >= prev - 1e-6, "sigma_g_sq = {sg}");
        prev = v;
    }
}
