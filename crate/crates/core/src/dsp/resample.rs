use crate::error::{Error, Result};
use crate::model::{IrregularSignal, UniformSignal};

/// Linear interpolation onto `t0 + k / target_rate`, from the first to the last
/// timestamp. Never extrapolates.
pub fn resample_uniform(sig: &IrregularSignal, target_rate: f64) -> Result<UniformSignal> {
    if !(target_rate > 0.0 && target_rate.is_finite()) {
        return Err(Error::InsufficientData(format!(
            "target rate {target_rate} must be positive"
        )));
    }
    let ts = sig.timestamps();
    let vs = sig.values();
    if ts.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "resampling needs at least 2 points, got {}",
            ts.len()
        )));
    }
    let t0 = ts[0];
    let t_last = ts[ts.len() - 1];
    let span = t_last - t0;
    let n = (span * target_rate * (1.0 + 1e-12)).floor() as usize + 1;

    let mut out = Vec::with_capacity(n);
    let mut j = 0usize;
    for k in 0..n {
        let t = (t0 + k as f64 / target_rate).min(t_last);
        while j + 2 < ts.len() && ts[j + 1] <= t {
            j += 1;
        }
        if t >= ts[j + 1] {
            // only reachable on the final segment
            out.push(vs[j + 1]);
            continue;
        }
        let frac = (t - ts[j]) / (ts[j + 1] - ts[j]);
        out.push(vs[j] + (vs[j + 1] - vs[j]) * frac);
    }
    Ok(UniformSignal::with_start(out, target_rate, t0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn jittered(rate: f64, duration: f64, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut t = 0.0;
        let mut ts = vec![];
        while t <= duration {
            ts.push(t);
            t += (1.0 + rng.gen_range(-0.3..0.3)) / rate;
        }
        ts
    }

    #[test]
    fn uniform_input_passes_through() {
        let ts: Vec<f64> = (0..400).map(|i| i as f64 / 200.0).collect();
        let vs: Vec<f64> = (0..400).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        let sig = IrregularSignal::new(ts, vs.clone()).unwrap();
        let out = resample_uniform(&sig, 200.0).unwrap();
        assert_eq!(out.rate, 200.0);
        assert_eq!(out.samples, vs);
    }

    #[test]
    fn ramp_is_exact() {
        let ts = jittered(50.0, 10.0, 1);
        let vs: Vec<f64> = ts.iter().map(|t| 2.0 * t).collect();
        let sig = IrregularSignal::new(ts.clone(), vs).unwrap();
        let out = resample_uniform(&sig, 200.0).unwrap();
        for (i, v) in out.samples.iter().enumerate() {
            let t = out.time_at(i);
            assert!((v - 2.0 * t).abs() < 1e-12, "{i}: {v} vs {}", 2.0 * t);
            assert!(t <= *ts.last().unwrap());
        }
    }

    #[test]
    fn jittered_sinusoid_within_one_percent() {
        let ts = jittered(50.0, 20.0, 7);
        let vs: Vec<f64> = ts
            .iter()
            .map(|t| (2.0 * std::f64::consts::PI * t).sin())
            .collect();
        let sig = IrregularSignal::new(ts, vs).unwrap();
        let out = resample_uniform(&sig, 200.0).unwrap();
        let max_err = out
            .samples
            .iter()
            .enumerate()
            .map(|(i, v)| (v - (2.0 * std::f64::consts::PI * out.time_at(i)).sin()).abs())
            .fold(0.0, f64::max);
        assert!(max_err < 0.01, "max error {max_err}");
    }

    #[test]
    fn too_few_points() {
        let sig = IrregularSignal::new(vec![0.0], vec![1.0]).unwrap();
        assert!(matches!(
            resample_uniform(&sig, 200.0),
            Err(Error::InsufficientData(_))
        ));
    }

    proptest::proptest! {
        #[test]
        fn affine_functions_reproduced(a in -10.0f64..10.0, b in -10.0f64..10.0, seed in 0u64..1000) {
            let ts = jittered(37.0, 3.0, seed);
            let vs: Vec<f64> = ts.iter().map(|t| a * t + b).collect();
            let out = resample_uniform(&IrregularSignal::new(ts, vs).unwrap(), 200.0).unwrap();
            for (i, v) in out.samples.iter().enumerate() {
                let t = out.time_at(i);
                proptest::prop_assert!((v - (a * t + b)).abs() <= 1e-12 * (1.0 + a.abs() + b.abs()) * 4.0);
            }
        }
    }
}
