use monoreg_core::{
    build_cubic, build_diagonal, build_fredholm, build_rank_one, oracle_alpha, residual_norm,
    CubicMatrix, Decay, Operator, Problem, SolutionSpec, SuiteProblem,
};
use proptest::prelude::*;

fn problem(which: usize) -> Problem {
    match which {
        0 => build_diagonal(40, Decay::Poly(2.0), &SolutionSpec::Harmonic(1.0))
            .unwrap()
            .into(),
        1 => build_diagonal(25, Decay::Exp(1.0), &SolutionSpec::Sine(2.0))
            .unwrap()
            .into(),
        2 => build_fredholm(64).unwrap().into(),
        3 => build_cubic(15, &CubicMatrix::InverseIndex, &SolutionSpec::Harmonic(0.5))
            .unwrap()
            .into(),
        4 => build_cubic(
            8,
            &CubicMatrix::Diagonal(vec![0.0; 8]),
            &SolutionSpec::Constant(2.0),
        )
        .unwrap()
        .into(),
        _ => build_rank_one(4).unwrap().into(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn oracle_residual_is_at_reference_precision(
        which in 0usize..6,
        log_a in -6.0f64..3.0,
        log_delta in -6.0f64..0.0,
        seed in any::<u64>(),
    ) {
        let p = problem(which);
        let a = 10f64.powf(log_a);
        let f_delta = p.noisy_data(10f64.powf(log_delta), seed).unwrap();
        let v = p.oracle_solution(a, &f_delta).unwrap();
        let r = residual_norm(&p, &v, a, &f_delta).unwrap();
        prop_assert!(r <= 1e-10 * (1.0 + f_delta.norm()), "{}: residual {r}", p.name());
    }

    #[test]
    fn exact_data_is_the_image_of_the_solution(which in 0usize..6) {
        let p = problem(which);
        let f = p.apply(p.solution());
        prop_assert!(f.distance(p.exact_data()) <= 1e-14 * (1.0 + f.norm()));
    }

    #[test]
    fn rank_one_parameter_hits_the_target(
        c_target in 1.01f64..5.0,
        log_delta in -6.0f64..-1.5,
    ) {
        let rank_one = build_rank_one(2).unwrap();
        let delta = 10f64.powf(log_delta);
        prop_assume!((c_target * c_target - 1.0).sqrt() * delta < 0.5);
        let a = oracle_alpha(&rank_one, delta, c_target).unwrap();
        let v = rank_one.closed_form_solution(a, delta);
        let f_delta = rank_one.noisy_data(delta, 0).unwrap();
        let phi = rank_one.apply(&v).distance(&f_delta);
        prop_assert!((phi - c_target * delta).abs() <= 1e-10 * c_target * delta);
    }
}
