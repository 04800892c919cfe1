//! Numerical integration checks of the pulse pair.

use ftnsim::pulse::PulseSpec;

const STEPS_PER_T0: usize = 64;
const HALF_SPAN_T0: f64 = 40.0;

fn grid() -> Vec<f64> {
    let m = (HALF_SPAN_T0 * STEPS_PER_T0 as f64) as i64;
    (-m..=m).map(|k| k as f64 / STEPS_PER_T0 as f64).collect()
}

#[test]
fn impulse_has_unit_energy() {
    for beta in [0.25, 0.5, 1.0] {
        let p = PulseSpec::new(beta, 1.0, 10).unwrap();
        let dt = 1.0 / STEPS_PER_T0 as f64;
        let e: f64 = grid().iter().map(|&t| p.rrc_impulse(t).powi(2)).sum::<f64>() * dt;
        assert!((e - 1.0).abs() < 1e-6, "beta={beta}: energy {e}");
    }
}

#[test]
fn autocorrelation_of_impulse_is_raised_cosine() {
    let p = PulseSpec::new(0.5, 1.0, 10).unwrap();
    let dt = 1.0 / STEPS_PER_T0 as f64;
    let ts = grid();
    let h: Vec<f64> = ts.iter().map(|&t| p.rrc_impulse(t)).collect();
    // lags on the grid, so h(t − τ) is a shifted copy
    for lag_steps in (-5 * STEPS_PER_T0 as i64..=5 * STEPS_PER_T0 as i64).step_by(7) {
        let tau = lag_steps as f64 * dt;
        let shift = lag_steps.unsigned_abs() as usize;
        let corr: f64 = h.iter().zip(&h[shift..]).map(|(a, b)| a * b).sum::<f64>() * dt;
        let g = p.nyquist_autocorr(tau);
        assert!((corr - g).abs() < 1e-4, "tau={tau}: {corr} vs {g}");
    }
}

#[test]
fn scaling_with_symbol_period() {
    // h for T₀ = 2 is a stretched, rescaled copy of the T₀ = 1 pulse
    let p1 = PulseSpec::new(0.5, 1.0, 10).unwrap();
    let p2 = PulseSpec::new(0.5, 2.0, 10).unwrap();
    for k in -50..=50 {
        let t = k as f64 * 0.137;
        let want = p1.rrc_impulse(t / 2.0) / 2f64.sqrt();
        assert!((p2.rrc_impulse(t) - want).abs() < 1e-12, "t={t}");
        assert!((p2.nyquist_autocorr(t) - p1.nyquist_autocorr(t / 2.0)).abs() < 1e-12);
    }
}
