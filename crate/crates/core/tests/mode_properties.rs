use dtn_afem::params::{select_truncation, theta_bound, Mode, PhysicalParams};
use proptest::prelude::*;

fn admissible() -> impl Strategy<Value = PhysicalParams> {
    (0.3f64..3.0, 0.3f64..3.0, -1.3f64..1.3, 0.2f64..3.0, 0.0f64..5.0, 0.2f64..5.0, 0.3f64..3.0, 0.5f64..8.0).prop_map(
        |(omega, kappa, theta, rho_f, lambda, mu, rho, period)| PhysicalParams { omega, kappa, theta, rho_f, lambda, mu, rho, period },
    )
}

/// First index past which every mode is evanescent for the fluid and both elastic waves.
fn evanescent_start(p: &PhysicalParams) -> i64 {
    let kmax = p.kappa.max(p.kappa2());
    (0..)
        .find(|&m: &i64| (m..m + 1000).all(|k| p.alpha_n(k).abs() > kmax && p.alpha_n(-k).abs() > kmax))
        .unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 100, ..ProptestConfig::default() })]

    #[test]
    fn chi_lies_between_squared_wavenumbers(p in admissible()) {
        let (k1, k2) = (p.kappa1(), p.kappa2());
        for n in -500..=500 {
            let chi = Mode::new(&p, n).chi.norm();
            prop_assert!(k1 * k1 < chi && chi < k2 * k2, "n={} chi={} bounds=({}, {})", n, chi, k1 * k1, k2 * k2);
        }
    }

    #[test]
    fn elastic_multiplier_stays_definite_past_onset(p in admissible()) {
        let definite = |n: i64| {
            let (a, b, c) = Mode::new(&p, n).negative_hermitian_part();
            a > 0.0 && a * c - b.norm_sqr() > 0.0
        };
        let onset = (evanescent_start(&p).max(1)..=500).find(|&m| definite(m) && definite(-m));
        prop_assert!(onset.is_some(), "no onset of definiteness below 500");
        for m in onset.unwrap()..=500 {
            prop_assert!(definite(m) && definite(-m), "definiteness lost at |n|={} after onset {:?}", m, onset);
        }
    }

    #[test]
    fn truncation_bound_decreases_and_selection_is_minimal(p in admissible(), gap in 0.3f64..2.0, norm in 0.5f64..6.0) {
        let start = evanescent_start(&p).max(1) as usize;
        let mut last = f64::INFINITY;
        for n in start..start + 40 {
            let t = theta_bound(&p, gap, n).unwrap();
            prop_assert!(t.evanescent);
            prop_assert!(t.theta <= last, "n={} theta={} previous={}", n, t.theta, last);
            // a plateau only while the supremum sits further out than the next index
            let next = theta_bound(&p, gap, n + 1).unwrap();
            if next.theta == t.theta {
                prop_assert!(t.argmax.unwrap().unsigned_abs() as usize > n + 1);
            }
            last = t.theta;
        }
        let n = select_truncation(&p, gap, norm, 1e-8).unwrap();
        let t = theta_bound(&p, gap, n).unwrap();
        prop_assert!(t.evanescent && t.theta * norm <= 1e-8);
        if n > 1 {
            let prev = theta_bound(&p, gap, n - 1).unwrap();
            prop_assert!(!prev.evanescent || prev.theta * norm > 1e-8);
        }
    }
}
