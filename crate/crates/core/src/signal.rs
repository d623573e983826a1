//! Discrete-time signals on a periodic N-point Nyquist grid.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::Range;

use num_complex::Complex64;
use rand::seq::index;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;

use crate::error::{Error, Result};

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Complex time-domain samples on a uniform Nyquist grid (`f_Nyq = 1`).
#[derive(Debug, Clone, PartialEq)]
pub struct Signal {
    samples: Vec<Complex64>,
}

impl Signal {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::invalid(format!(
                "signal length must be at least 2, got {}",
                samples.len()
            )));
        }
        Ok(Self { samples })
    }

    pub fn zeros(n: usize) -> Result<Self> {
        Self::new(vec![Complex64::new(0.0, 0.0); n])
    }

    /// A complex exponential `amplitude * exp(j 2 pi f t)` sampled at `t = 0..n`.
    pub fn tone(n: usize, freq: f64, amplitude: f64) -> Result<Self> {
        let samples = (0..n)
            .map(|t| Complex64::from_polar(amplitude, 2.0 * PI * freq * t as f64))
            .collect();
        Self::new(samples)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.samples)
    }
}

/// Dense N-bin spectrum under the unitary DFT.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    coefficients: Vec<Complex64>,
}

impl Spectrum {
    pub fn new(coefficients: Vec<Complex64>) -> Result<Self> {
        if coefficients.len() < 2 {
            return Err(Error::invalid(format!(
                "spectrum length must be at least 2, got {}",
                coefficients.len()
            )));
        }
        Ok(Self { coefficients })
    }

    pub fn len(&self) -> usize {
        self.coefficients.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coefficients.is_empty()
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.coefficients
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.coefficients)
    }
}

/// A spectrum with explicitly tracked support.
///
/// The support is always the sorted set of bins holding a nonzero coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSpectrum {
    spectrum: Spectrum,
    support: Vec<usize>,
}

impl SparseSpectrum {
    pub fn from_dense(spectrum: Spectrum) -> Self {
        let support = spectrum
            .coefficients()
            .iter()
            .enumerate()
            .filter(|(_, c)| **c != Complex64::new(0.0, 0.0))
            .map(|(i, _)| i)
            .collect();
        Self { spectrum, support }
    }

    pub fn coefficients(&self) -> &[Complex64] {
        self.spectrum.coefficients()
    }

    pub fn spectrum(&self) -> &Spectrum {
        &self.spectrum
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn sparsity(&self) -> usize {
        self.support.len()
    }

    pub fn len(&self) -> usize {
        self.spectrum.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spectrum.is_empty()
    }
}

/// The a-priori occupied frequency support: disjoint half-open bin ranges on
/// an `n`-bin grid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubBandSpec {
    n: usize,
    bands: Vec<Range<usize>>,
}

impl SubBandSpec {
    pub fn new(n: usize, bands: Vec<Range<usize>>) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!(
                "grid length must be at least 2, got {n}"
            )));
        }
        let mut sorted: Vec<&Range<usize>> = bands.iter().collect();
        sorted.sort_by_key(|b| b.start);
        for b in &sorted {
            if b.start >= b.end {
                return Err(Error::invalid(format!("empty band {}..{}", b.start, b.end)));
            }
            if b.end > n {
                return Err(Error::invalid(format!(
                    "band {}..{} exceeds grid of {n} bins",
                    b.start, b.end
                )));
            }
        }
        for w in sorted.windows(2) {
            if w[0].end > w[1].start {
                return Err(Error::invalid(format!(
                    "bands {}..{} and {}..{} overlap",
                    w[0].start, w[0].end, w[1].start, w[1].end
                )));
            }
        }
        Ok(Self { n, bands })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bands(&self) -> &[Range<usize>] {
        &self.bands
    }

    /// Bin width `f_Nyq / N` in normalized units.
    pub fn bin_width(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Sorted union of all band bins (Sigma).
    pub fn support(&self) -> Vec<usize> {
        let mut bins: Vec<usize> = self.bands.iter().flat_map(|b| b.clone()).collect();
        bins.sort_unstable();
        bins
    }

    /// |Sigma|.
    pub fn occupied_bins(&self) -> usize {
        self.bands.iter().map(|b| b.len()).sum()
    }

    /// Center bin of band `b`: midpoint of its bins, rounded down.
    pub fn center_bin(&self, b: usize) -> usize {
        let band = &self.bands[b];
        (band.start + band.end - 1) / 2
    }

    pub fn center_freq(&self, b: usize) -> f64 {
        self.center_bin(b) as f64 / self.n as f64
    }
}

fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn unitary_fft(data: &mut [Complex64], inverse: bool) {
    let n = data.len();
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(n)
        } else {
            p.plan_fft_forward(n)
        }
    });
    fft.process(data);
    let scale = 1.0 / (n as f64).sqrt();
    data.iter_mut().for_each(|c| *c *= scale);
}

/// Unitary forward DFT of raw samples.
pub fn dft_slice(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    unitary_fft(&mut buf, false);
    buf
}

/// Unitary inverse DFT of raw coefficients.
pub fn idft_slice(x: &[Complex64]) -> Vec<Complex64> {
    let mut buf = x.to_vec();
    unitary_fft(&mut buf, true);
    buf
}

pub fn dft(x: &Signal) -> Spectrum {
    Spectrum {
        coefficients: dft_slice(x.samples()),
    }
}

pub fn idft(spectrum: &Spectrum) -> Signal {
    Signal {
        samples: idft_slice(spectrum.coefficients()),
    }
}

/// Draws a `k`-sparse spectrum supported in Sigma with unit-amplitude,
/// uniform-phase coefficients, and returns it together with its time signal.
pub fn make_multiband_signal<R: Rng + ?Sized>(
    spec: &SubBandSpec,
    k: usize,
    rng: &mut R,
) -> Result<(SparseSpectrum, Signal)> {
    let sigma = spec.support();
    if k > sigma.len() {
        return Err(Error::invalid(format!(
            "sparsity {k} exceeds occupied support of {} bins",
            sigma.len()
        )));
    }
    let mut coefficients = vec![Complex64::new(0.0, 0.0); spec.n()];
    let mut picked: Vec<usize> = index::sample(rng, sigma.len(), k)
        .into_iter()
        .map(|i| sigma[i])
        .collect();
    picked.sort_unstable();
    for &bin in &picked {
        let phase = rng.random::<f64>() * 2.0 * PI;
        coefficients[bin] = Complex64::from_polar(1.0, phase);
    }
    let spectrum = Spectrum::new(coefficients)?;
    let signal = idft(&spectrum);
    let sparse = SparseSpectrum {
        spectrum,
        support: picked,
    };
    Ok((sparse, signal))
}

/// Adds circularly-symmetric white Gaussian noise to `values` so that the
/// expected noise energy is `||values||^2 / 10^(snr_db / 10)`.
///
/// An infinite SNR returns the input unchanged and draws nothing from `rng`.
pub fn add_noise_to<R: Rng + ?Sized>(
    values: &[Complex64],
    snr_db: f64,
    rng: &mut R,
) -> Result<Vec<Complex64>> {
    if snr_db == f64::INFINITY {
        return Ok(values.to_vec());
    }
    if snr_db.is_nan() {
        return Err(Error::invalid("SNR must not be NaN"));
    }
    let energy: f64 = values.iter().map(|c| c.norm_sqr()).sum();
    if energy == 0.0 {
        return Err(Error::invalid("SNR is undefined for a zero signal"));
    }
    let noise_energy = energy / 10f64.powf(snr_db / 10.0);
    // per real/imaginary component
    let sigma = (noise_energy / values.len() as f64 / 2.0).sqrt();
    Ok(values
        .iter()
        .map(|&v| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            v + Complex64::new(re, im) * sigma
        })
        .collect())
}

pub fn add_noise<R: Rng + ?Sized>(x: &Signal, snr_db: f64, rng: &mut R) -> Result<Signal> {
    add_noise_to(x.samples(), snr_db, rng).map(|samples| Signal { samples })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn random_signal(n: usize, seed: u64) -> Signal {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let samples = (0..n)
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        Signal::new(samples).unwrap()
    }

    fn two_bands() -> SubBandSpec {
        SubBandSpec::new(256, vec![48..64, 160..176]).unwrap()
    }

    #[test]
    fn dft_of_ones_is_dc_only() {
        let x = Signal::new(vec![Complex64::new(1.0, 0.0); 4]).unwrap();
        let s = dft(&x);
        assert!((s.coefficients()[0] - Complex64::new(2.0, 0.0)).norm() < 1e-12);
        for c in &s.coefficients()[1..] {
            assert!(c.norm() < 1e-12);
        }
    }

    #[test]
    fn dirac_has_flat_spectrum() {
        let n = 64;
        let mut samples = vec![Complex64::new(0.0, 0.0); n];
        samples[0] = Complex64::new(1.0, 0.0);
        let s = dft(&Signal::new(samples).unwrap());
        for c in s.coefficients() {
            assert!((c.norm() - 1.0 / (n as f64).sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn parseval_and_round_trip() {
        let x = random_signal(256, 7);
        let s = dft(&x);
        assert!((s.norm() - x.norm()).abs() <= 1e-10 * x.norm());
        let back = idft(&s);
        let err: f64 = back
            .samples()
            .iter()
            .zip(x.samples())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(err <= 1e-10 * x.norm());
    }

    #[test]
    fn unit_bin_is_complex_exponential() {
        let n = 32;
        let k = 5;
        let mut c = vec![Complex64::new(0.0, 0.0); n];
        c[k] = Complex64::new(1.0, 0.0);
        let x = idft(&Spectrum::new(c).unwrap());
        let expected = Signal::tone(n, k as f64 / n as f64, 1.0 / (n as f64).sqrt()).unwrap();
        for (a, b) in x.samples().iter().zip(expected.samples()) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn zero_spectrum_gives_zero_signal() {
        let x = idft(&Spectrum::new(vec![Complex64::new(0.0, 0.0); 16]).unwrap());
        assert!(x.samples().iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn short_signal_rejected() {
        assert!(Signal::new(vec![Complex64::new(1.0, 0.0)]).is_err());
    }

    #[test]
    fn subband_validation() {
        assert!(SubBandSpec::new(256, vec![0..16, 8..24]).is_err());
        assert!(SubBandSpec::new(256, vec![250..260]).is_err());
        assert!(SubBandSpec::new(256, vec![4..4]).is_err());
        let spec = two_bands();
        assert_eq!(spec.occupied_bins(), 32);
        assert_eq!(spec.support().len(), 32);
        assert_eq!(spec.center_bin(0), 55);
        assert_eq!(spec.center_bin(1), 167);
    }

    #[test]
    fn multiband_signal_support_in_sigma() {
        let spec = two_bands();
        let sigma = spec.support();
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let (s, x) = make_multiband_signal(&spec, 8, &mut rng).unwrap();
        assert_eq!(s.sparsity(), 8);
        for &k in s.support() {
            assert!(sigma.contains(&k));
            assert!((s.coefficients()[k].norm() - 1.0).abs() < 1e-12);
        }
        let back = dft(&x);
        for (a, b) in back.coefficients().iter().zip(s.coefficients()) {
            assert!((a - b).norm() < 1e-10);
        }
    }

    #[test]
    fn multiband_signal_edge_sparsities() {
        let spec = two_bands();
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let (s0, x0) = make_multiband_signal(&spec, 0, &mut rng).unwrap();
        assert_eq!(s0.sparsity(), 0);
        assert!(x0.samples().iter().all(|c| c.norm() == 0.0));
        let (full, _) = make_multiband_signal(&spec, 32, &mut rng).unwrap();
        assert_eq!(full.support(), spec.support().as_slice());
        assert!(make_multiband_signal(&spec, 33, &mut rng).is_err());
    }

    #[test]
    fn infinite_snr_is_identity() {
        let x = random_signal(64, 1);
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert_eq!(add_noise(&x, f64::INFINITY, &mut rng).unwrap(), x);
    }

    #[test]
    fn zero_signal_with_finite_snr_fails() {
        let x = Signal::zeros(16).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert!(add_noise(&x, 10.0, &mut rng).is_err());
        assert!(add_noise(&x, f64::INFINITY, &mut rng).is_ok());
    }

    #[test]
    fn noise_power_at_zero_db() {
        // Monte-Carlo estimate of E||n||^2 against ||x||^2.
        let x = random_signal(128, 11);
        let energy = x.norm().powi(2);
        let mut rng = ChaCha20Rng::seed_from_u64(12);
        let trials = 1000;
        let mut acc = 0.0;
        for _ in 0..trials {
            let y = add_noise(&x, 0.0, &mut rng).unwrap();
            acc += y
                .samples()
                .iter()
                .zip(x.samples())
                .map(|(a, b)| (a - b).norm_sqr())
                .sum::<f64>();
        }
        let ratio = acc / trials as f64 / energy;
        assert!((ratio - 1.0).abs() < 0.05, "ratio {ratio}");
    }

    #[test]
    fn noise_is_deterministic_per_seed() {
        let x = random_signal(64, 2);
        let a = add_noise(&x, 5.0, &mut ChaCha20Rng::seed_from_u64(9)).unwrap();
        let b = add_noise(&x, 5.0, &mut ChaCha20Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn dft_is_unitary(values in prop::collection::vec((-10.0f64..10.0, -10.0f64..10.0), 2..300)) {
                let x = Signal::new(values.iter().map(|&(r, i)| Complex64::new(r, i)).collect()).unwrap();
                let s = dft(&x);
                let scale = x.norm().max(1e-300);
                prop_assert!((s.norm() - x.norm()).abs() <= 1e-10 * scale);
                let back = idft(&s);
                for (a, b) in back.samples().iter().zip(x.samples()) {
                    prop_assert!((a - b).norm() <= 1e-10 * scale);
                }
            }

            #[test]
            fn multiband_support_subset(k in 0usize..=32, seed in any::<u64>()) {
                let spec = two_bands();
                let sigma = spec.support();
                let mut rng = ChaCha20Rng::seed_from_u64(seed);
                let (s, _) = make_multiband_signal(&spec, k, &mut rng).unwrap();
                prop_assert_eq!(s.sparsity(), k);
                prop_assert!(s.support().iter().all(|b| sigma.contains(b)));
                let (again, _) = make_multiband_signal(&spec, k, &mut ChaCha20Rng::seed_from_u64(seed)).unwrap();
                prop_assert_eq!(again, s);
            }
        }
    }
}
