//! Synthetic data from the hierarchical model and log N-log S curve data.

use rand::Rng;

use crate::distribution::BrokenParetoParams;
use crate::em::{Dataset, ObservedSource};
use crate::error::{Error, Result};
use crate::numerics::ln_gamma;
use crate::seed::{self, tag};

/// Effective area or background specification: one value for every source,
/// or one value per source.
#[derive(Debug, Clone, PartialEq)]
pub enum PerSource {
    Constant(f64),
    Each(Vec<f64>),
}

impl PerSource {
    fn get(&self, i: usize) -> f64 {
        match self {
            PerSource::Constant(v) => *v,
            PerSource::Each(vs) => vs[i],
        }
    }

    fn validate(&self, n: usize, name: &str, strictly_positive: bool) -> Result<()> {
        let check = |v: f64| -> Result<()> {
            if !v.is_finite() || (strictly_positive && v <= 0.0) || (!strictly_positive && v < 0.0)
            {
                return Err(Error::Domain(format!("invalid {name} value {v}")));
            }
            Ok(())
        };
        match self {
            PerSource::Constant(v) => check(*v),
            PerSource::Each(vs) => {
                if vs.len() != n {
                    return Err(Error::Domain(format!(
                        "{name} vector has {} entries for {n} sources",
                        vs.len()
                    )));
                }
                vs.iter().try_for_each(|&v| check(v))
            }
        }
    }
}

/// A complete simulation recipe: true parameters, sample size, detector
/// constants, and seed.
#[derive(Debug, Clone)]
pub struct SimSetting {
    pub params: BrokenParetoParams,
    pub n: usize,
    pub area: PerSource,
    pub background: PerSource,
    pub seed: u64,
}

impl SimSetting {
    /// The four standard experimental presets (`setting1`..`setting4`);
    /// all use `A_i = 1e19` and `b_i = 10`.
    pub fn preset(name: &str, seed: u64) -> Option<SimSetting> {
        let (beta, tau, n) = match name {
            "setting1" => (vec![1.0], vec![5e-17], 100),
            "setting2" => (vec![0.5, 3.0], vec![1e-17, 5e-17], 200),
            "setting3" => (vec![0.5, 1.5], vec![1e-17, 5e-17], 200),
            "setting4" => (vec![0.3, 1.0, 3.0], vec![1e-17, 8e-17, 1.8e-16], 500),
            _ => return None,
        };
        Some(SimSetting {
            params: BrokenParetoParams::new(beta, tau).expect("preset parameters are valid"),
            n,
            area: PerSource::Constant(1e19),
            background: PerSource::Constant(10.0),
            seed,
        })
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 1 {
            return Err(Error::Domain("need at least one source".into()));
        }
        self.area.validate(self.n, "effective area", true)?;
        self.background.validate(self.n, "background", false)
    }
}

/// Simulated dataset plus the latent fluxes that produced it.
#[derive(Debug, Clone)]
pub struct SimulatedData {
    dataset: Dataset,
    latent: Vec<f64>,
}

impl SimulatedData {
    pub fn dataset(&self) -> &Dataset {
        &self.dataset
    }

    pub fn into_dataset(self) -> Dataset {
        self.dataset
    }

    /// The true fluxes behind the counts. Test/oracle accessor: real
    /// analyses never see these.
    #[doc(hidden)]
    pub fn latent_fluxes(&self) -> &[f64] {
        &self.latent
    }
}

/// Draw a dataset from the hierarchical model: latent fluxes from the
/// broken Pareto law, counts from `Poisson(A_i S_i + b_i)`.
pub fn generate(setting: &SimSetting) -> Result<SimulatedData> {
    setting.validate()?;
    let mut rng = seed::stream(setting.seed, &[tag::SIMULATE]);
    let latent = setting.params.sample(setting.n, &mut rng);
    let sources: Vec<ObservedSource> = latent
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let a = setting.area.get(i);
            let b = setting.background.get(i);
            ObservedSource { y: sample_poisson(a * s + b, &mut rng), a, b }
        })
        .collect();
    Ok(SimulatedData { dataset: Dataset::new(sources)?, latent })
}

/// Poisson draw: multiplicative inversion below mean 30, transformed
/// rejection with squeeze above (means reach `A S ≈ 1e4` in realistic
/// settings, where inversion would crawl).
pub(crate) fn sample_poisson<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> u64 {
    debug_assert!(mu > 0.0 && mu.is_finite());
    if mu < 30.0 {
        let limit = (-mu).exp();
        let mut k = 0u64;
        let mut prod: f64 = rng.gen();
        while prod > limit {
            k += 1;
            prod *= rng.gen::<f64>();
        }
        k
    } else {
        // Hoermann's PTRS rejection
        let b = 0.931 + 2.53 * mu.sqrt();
        let a = -0.059 + 0.02483 * b;
        let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        let v_r = 0.9277 - 3.6224 / (b - 2.0);
        loop {
            let u: f64 = rng.gen::<f64>() - 0.5;
            let v: f64 = rng.gen();
            let us = 0.5 - u.abs();
            let k = ((2.0 * a / us + b) * u + mu + 0.43).floor();
            if us >= 0.07 && v <= v_r {
                return k as u64;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            if (v * inv_alpha / (a / (us * us) + b)).ln()
                <= k * mu.ln() - mu - ln_gamma(k + 1.0)
            {
                return k as u64;
            }
        }
    }
}

/// Empirical log N-log S curve: with fluxes sorted descending, point i is
/// `(log10 S_(i), log10 i)` for rank i = 1..n, i.e. the log survival count
/// at each observed flux.
pub fn lognlogs_curve(fluxes: &[f64]) -> Result<Vec<(f64, f64)>> {
    if fluxes.is_empty() {
        return Err(Error::Domain("no fluxes to plot".into()));
    }
    if fluxes.iter().any(|&s| s <= 0.0 || !s.is_finite()) {
        return Err(Error::Domain("fluxes must be positive and finite".into()));
    }
    let mut sorted = fluxes.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    Ok(sorted
        .iter()
        .enumerate()
        .map(|(i, &s)| (s.log10(), ((i + 1) as f64).log10()))
        .collect())
}

/// Fitted piecewise-linear overlay for a log N-log S plot: the survival
/// count implied by θ̂ and the sample size, `N̂(>S) = n S_B(S)`, evaluated at
/// the breakpoints and at `s_max`. Segment j has slope exactly `-β_j`; the
/// intercepts follow from continuity and `N̂(>τ_1) = n`.
pub fn lognlogs_overlay(
    params: &BrokenParetoParams,
    n: usize,
    s_max: f64,
) -> Vec<(f64, f64)> {
    let log_n = (n as f64).log10();
    let mut points: Vec<(f64, f64)> = params
        .tau()
        .iter()
        .map(|&t| (t.log10(), log_n + params.survival(t).log10()))
        .collect();
    let last_tau = *params.tau().last().unwrap();
    let end = s_max.max(last_tau * 1.5);
    points.push((end.log10(), log_n + params.survival(end).log10()));
    points
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_pcg::Pcg64;

    #[test]
    fn presets_match_their_definitions() {
        let s2 = SimSetting::preset("setting2", 7).unwrap();
        assert_eq!(s2.params.beta(), &[0.5, 3.0]);
        assert_eq!(s2.params.tau(), &[1e-17, 5e-17]);
        assert_eq!(s2.n, 200);
        assert_eq!(s2.area, PerSource::Constant(1e19));
        assert_eq!(s2.background, PerSource::Constant(10.0));
        assert_eq!(SimSetting::preset("setting1", 0).unwrap().n, 100);
        assert_eq!(SimSetting::preset("setting4", 0).unwrap().n, 500);
        assert!(SimSetting::preset("setting9", 0).is_none());
    }

    #[test]
    fn generation_is_reproducible() {
        let setting = SimSetting::preset("setting2", 11).unwrap();
        let a = generate(&setting).unwrap();
        let b = generate(&setting).unwrap();
        assert_eq!(a.dataset(), b.dataset());
        assert_eq!(a.latent_fluxes(), b.latent_fluxes());
        assert_eq!(a.dataset().len(), 200);
    }

    #[test]
    fn poisson_moments_match() {
        for &mu in &[0.3f64, 3.0, 25.0, 40.0, 300.0, 9000.0] {
            let n = 60_000;
            let mut rng = Pcg64::seed_from_u64(mu.to_bits());
            let mut sum = 0.0;
            let mut sumsq = 0.0;
            for _ in 0..n {
                let k = sample_poisson(mu, &mut rng) as f64;
                sum += k;
                sumsq += k * k;
            }
            let mean = sum / n as f64;
            let var = sumsq / n as f64 - mean * mean;
            let se = (mu / n as f64).sqrt();
            assert!((mean - mu).abs() < 5.0 * se, "mean {mean} vs {mu}");
            assert!((var - mu).abs() < 0.1 * mu + 10.0 * se * mu.sqrt(), "var {var} vs {mu}");
        }
    }

    #[test]
    fn count_mean_tracks_intensity() {
        // fixed flux: E[Y] = A S + b
        let (a, s, b) = (1e19, 3e-17, 10.0);
        let mu = a * s + b;
        let mut rng = Pcg64::seed_from_u64(4);
        let n = 40_000;
        let mean = (0..n).map(|_| sample_poisson(mu, &mut rng) as f64).sum::<f64>() / n as f64;
        assert!((mean - mu).abs() < 5.0 * (mu / n as f64).sqrt());
    }

    #[test]
    fn high_area_counts_concentrate_on_flux() {
        let params = BrokenParetoParams::new(vec![1.5], vec![1e-10]).unwrap();
        let setting = SimSetting {
            params,
            n: 400,
            area: PerSource::Constant(1e17), // A τ_1 = 1e7
            background: PerSource::Constant(0.0),
            seed: 9,
        };
        let sim = generate(&setting).unwrap();
        let mut rel: Vec<f64> = sim
            .dataset()
            .sources()
            .iter()
            .zip(sim.latent_fluxes())
            .map(|(src, &s)| ((src.y as f64 / src.a) - s).abs() / s)
            .collect();
        rel.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(rel[rel.len() / 2] < 0.01, "median relative error {}", rel[rel.len() / 2]);
    }

    #[test]
    fn latents_agree_with_law() {
        let setting = SimSetting::preset("setting2", 23).unwrap();
        let big = SimSetting { n: 100_000, ..setting };
        let sim = generate(&big).unwrap();
        let mut xs = sim.latent_fluxes().to_vec();
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = xs.len();
        let ks = xs
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                let f = big.params.cdf(x);
                (f - i as f64 / n as f64).abs().max(((i + 1) as f64 / n as f64 - f).abs())
            })
            .fold(0.0f64, f64::max);
        assert!(ks < 0.01, "KS distance {ks}");
    }

    #[test]
    fn curve_counts_down_from_brightest() {
        let pts = lognlogs_curve(&[1.0, 10.0, 100.0]).unwrap();
        assert_eq!(pts[0], (2.0, 0.0));
        assert_eq!(pts[1], (1.0, (2.0f64).log10()));
        assert_eq!(pts[2], (0.0, (3.0f64).log10()));
        assert!(lognlogs_curve(&[]).is_err());
        assert!(lognlogs_curve(&[1.0, -2.0]).is_err());
    }

    #[test]
    fn exact_quantiles_lie_on_the_power_line() {
        // survival(S_i) = i/n at β = 1 puts the curve on a slope -1 line
        let params = BrokenParetoParams::new(vec![1.0], vec![2.0]).unwrap();
        let n = 50;
        let fluxes: Vec<f64> = (1..=n)
            .map(|i| params.quantile_survival(i as f64 / n as f64))
            .collect();
        let pts = lognlogs_curve(&fluxes).unwrap();
        for w in pts.windows(2) {
            let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            assert!((slope + 1.0).abs() < 1e-9, "slope {slope}");
        }
    }

    #[test]
    fn overlay_segments_have_minus_beta_slopes() {
        let params =
            BrokenParetoParams::new(vec![0.5, 3.0], vec![1e-17, 5e-17]).unwrap();
        let pts = lognlogs_overlay(&params, 200, 1e-15);
        assert_eq!(pts.len(), 3);
        assert!((pts[0].1 - (200f64).log10()).abs() < 1e-12);
        for (j, w) in pts.windows(2).enumerate() {
            let slope = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            assert!(
                (slope + params.beta()[j]).abs() < 1e-9,
                "segment {j} slope {slope}"
            );
        }
    }

    #[test]
    fn curve_is_monotone_nonincreasing() {
        let params = BrokenParetoParams::new(vec![0.5, 3.0], vec![1e-17, 5e-17]).unwrap();
        let mut rng = Pcg64::seed_from_u64(2);
        let pts = lognlogs_curve(&params.sample(500, &mut rng)).unwrap();
        for w in pts.windows(2) {
            assert!(w[1].0 <= w[0].0);
            assert!(w[1].1 >= w[0].1);
        }
    }
}
