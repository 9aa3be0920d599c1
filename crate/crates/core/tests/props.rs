//! Property tests for the structural invariants: exact inverses, conservation
//! under thinning/superposition, design monotonicity, error-sampler support.

use nonreg::equivalence::{
    localize, merge_halves, split_sample, superpose, thin_ppp, BlockPartition,
};
use nonreg::estimators::PilotEstimate;
use nonreg::model::{
    design_points, DesignSpec, ErrorDensity, ErrorFamily, ExperimentSpec, ParamFamily,
    ParameterFunction,
};
use nonreg::numeric::{compensated_add, two_sum};
use nonreg::samplers::{sample_ppp, sample_regression, Domain, IntensityFunction};
use proptest::prelude::*;

proptest! {
    #[test]
    fn two_sum_reconstruction_is_exact(y in -1e12f64..1e12, c in -1e12f64..1e12) {
        let (z, e) = two_sum(y, -c);
        prop_assert_eq!(compensated_add(z, c, e), y);
    }

    #[test]
    fn two_sum_reconstruction_small_scales(y in -2.0f64..2.0, c in -2.0f64..2.0) {
        let (z, e) = two_sum(y, -c);
        prop_assert_eq!(compensated_add(z, c, e), y);
    }

    #[test]
    fn design_points_monotone(slope in -0.9f64..3.0, n in 2usize..200) {
        let design = DesignSpec::linear(slope).unwrap();
        let xs = design_points(n, &design).unwrap();
        prop_assert_eq!(xs[0], 0.0);
        prop_assert!((xs[n - 1] - 1.0).abs() < 1e-12);
        for w in xs.windows(2) {
            prop_assert!(w[1] >= w[0]);
        }
        // gap bounds with the declared constant
        let d = design.gap_const();
        for w in xs.windows(2) {
            let g = (w[1] - w[0]) * n as f64;
            prop_assert!(g <= d + 1e-9 && g >= 1.0 / d - 1e-9, "gap·n = {}", g);
        }
    }

    #[test]
    fn inverse_cdf_stays_in_support(u in 0.0f64..1.0, tilt in -0.9f64..0.9) {
        let e = ErrorDensity::new(ErrorFamily::LinearTilt { tilt });
        let t = e.inv_cdf(u);
        prop_assert!((-1.0..=1.0).contains(&t));
    }

    #[test]
    fn thinning_conserves_points(p in 0.0f64..1.0, seed in 0u64..1000) {
        let spec = ExperimentSpec::new(50, 1.0, 1.0, DesignSpec::uniform(), ErrorDensity::uniform()).unwrap();
        let theta = ParameterFunction::zero(1.0, 1.0);
        let lam = IntensityFunction::boundary_lower(theta, spec.design, 30.0, Domain::for_spec(&spec));
        let x = sample_ppp(&lam, seed).unwrap();
        let (a, b) = thin_ppp(&x, p, seed ^ 0xabcd).unwrap();
        prop_assert_eq!(a.len() + b.len(), x.len());
        let merged = superpose(&a, &b).unwrap();
        let mut lhs = merged.points;
        let mut rhs = x.points.clone();
        lhs.sort_by(|u, v| u.partial_cmp(v).unwrap());
        rhs.sort_by(|u, v| u.partial_cmp(v).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn split_merge_round_trip(seed in 0u64..500, half in 2usize..60) {
        let n = 2 * half;
        let spec = ExperimentSpec::new(n, 1.0, 1.0, DesignSpec::linear(0.5).unwrap(), ErrorDensity::uniform()).unwrap();
        let theta = ParameterFunction::zero(1.0, 1.0);
        let s = sample_regression(&theta, &spec, seed).unwrap();
        let (a, b) = split_sample(&s).unwrap();
        let back = merge_halves(&a, &b);
        prop_assert_eq!(back.xs, s.xs);
        prop_assert_eq!(back.ys, s.ys);
    }

    #[test]
    fn localization_round_trip_bitwise(seed in 0u64..300) {
        let spec = ExperimentSpec::new(120, 2.0, 1.0, DesignSpec::uniform(), ErrorDensity::uniform()).unwrap();
        let theta = ParameterFunction::new(
            ParamFamily::Polynomial { coeffs: vec![0.37, -0.21, 0.4] },
            2.0,
            1.0,
        ).unwrap();
        let s = sample_regression(&theta, &spec, seed).unwrap();
        let (a, _) = split_sample(&s).unwrap();
        let part = BlockPartition::new(6, &a.xs).unwrap();
        let pilot = PilotEstimate::from_oracle(&theta, &part.centers());
        let z = localize(&a, &pilot, &part).unwrap();
        let back = nonreg::equivalence::undo_localize(&z, &pilot, &part);
        prop_assert_eq!(back, a.ys);
    }
}
