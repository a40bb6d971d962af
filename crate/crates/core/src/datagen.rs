//! Random instances for the covariance estimation experiments.
//!
//! All randomness flows through [`RngStream`], a ChaCha8 generator keyed by
//! a `(seed, stream_index)` pair. Monte-Carlo repetitions each take their own
//! stream, so results do not depend on scheduling.

use nalgebra::Cholesky;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::applications::{ula_steering, SteeringVector};
use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{eigh, is_psd, outer_product, CMatrix, CVector, HermitianMatrix, SampleSet};

/// PSD tolerance applied to every generated covariance.
pub const SCENE_PSD_TOL: f64 = 1e-8;

/// Interferer directions of the beamforming scene, in degrees.
pub const DEFAULT_INTERFERER_DEGREES: [f64; 8] =
    [8.0, -15.0, 23.0, -21.0, 46.0, -44.0, -85.0, 74.0];

#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    stream_index: u64,
    rng: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_index: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream_index);
        Self {
            seed,
            stream_index,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_index(&self) -> u64 {
        self.stream_index
    }

    pub fn normal(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    /// Circular complex normal with unit variance, `(a + jb)/sqrt(2)`.
    pub fn complex_normal(&mut self) -> Complex64 {
        let a = self.normal();
        let b = self.normal();
        Complex64::new(a, b) * std::f64::consts::FRAC_1_SQRT_2
    }

    pub fn uniform(&mut self, low: f64, high: f64) -> f64 {
        self.rng.random_range(low..high)
    }

    pub fn draw(&mut self, field: Field) -> Complex64 {
        match field {
            Field::Real => Complex64::new(self.normal(), 0.0),
            Field::Complex => self.complex_normal(),
        }
    }

    /// `rows x cols` matrix of unit-variance draws.
    pub fn matrix(&mut self, rows: usize, cols: usize, field: Field) -> CMatrix {
        // Column-major fill keeps the draw order independent of nalgebra internals.
        let mut m = CMatrix::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m[(i, j)] = self.draw(field);
            }
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Field {
    Real,
    Complex,
}

/// `[S]_{ij} = r^{i-j}` for `i >= j` and `conj(r)^{j-i}` otherwise.
pub fn ar_covariance(n: usize, r: Complex64) -> Result<HermitianMatrix> {
    if !(r.norm() < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "AR coefficient magnitude {} must be below 1",
            r.norm()
        )));
    }
    if n == 0 {
        return Err(Error::Empty("AR covariance"));
    }
    let powers: Vec<Complex64> = (0..n as i32).map(|k| r.powi(k)).collect();
    let m = CMatrix::from_fn(n, n, |i, j| {
        if i >= j {
            powers[i - j]
        } else {
            powers[j - i].conj()
        }
    });
    HermitianMatrix::from_matrix(m)
}

/// Draws `S^{1/2} n_t` with a fixed square-root factor.
#[derive(Clone, Debug)]
pub struct SampleGenerator {
    root: CMatrix,
    field: Field,
}

impl SampleGenerator {
    /// Uses the Cholesky factor when it exists and the eigenvalue square
    /// root otherwise (singular PSD covariances).
    pub fn new(sigma: &HermitianMatrix, field: Field) -> Result<Self> {
        if !is_psd(sigma, SCENE_PSD_TOL) {
            return Err(Error::NotPsd {
                min_eigenvalue: sigma.eigenvalues()[0],
            });
        }
        if field == Field::Real && sigma.as_matrix().iter().any(|z| z.im.abs() > 1e-12) {
            return Err(Error::InvalidParameter(
                "real samples need a real covariance".into(),
            ));
        }
        let root = match Cholesky::new(sigma.as_matrix().clone()) {
            Some(c) => c.l(),
            None => {
                let (values, vectors) = eigh(sigma);
                let mut root = vectors;
                for (j, v) in values.iter().enumerate() {
                    let s = v.max(0.0).sqrt();
                    root.column_mut(j).scale_mut(s);
                }
                root
            }
        };
        Ok(Self { root, field })
    }

    pub fn dim(&self) -> usize {
        self.root.nrows()
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn draw(&self, t: usize, rng: &mut RngStream) -> Result<SampleSet> {
        if t == 0 {
            return Err(Error::InsufficientSamples {
                required: 1,
                got: 0,
            });
        }
        let noise = rng.matrix(self.dim(), t, self.field);
        SampleSet::new(&self.root * noise)
    }
}

pub fn gaussian_samples(
    sigma: &HermitianMatrix,
    t: usize,
    rng: &mut RngStream,
    field: Field,
) -> Result<SampleSet> {
    SampleGenerator::new(sigma, field)?.draw(t, rng)
}

/// A scene with a known covariance that can produce training samples.
pub trait SampleSource {
    fn true_covariance(&self) -> &HermitianMatrix;

    fn draw_samples(&self, t: usize, rng: &mut RngStream) -> Result<SampleSet>;
}

/// Zero-mean Gaussian data with covariance `sigma`.
#[derive(Clone, Debug)]
pub struct GaussianScene {
    sigma: HermitianMatrix,
    generator: SampleGenerator,
}

impl GaussianScene {
    pub fn new(sigma: HermitianMatrix, field: Field) -> Result<Self> {
        let generator = SampleGenerator::new(&sigma, field)?;
        Ok(Self { sigma, generator })
    }
}

impl SampleSource for GaussianScene {
    fn true_covariance(&self) -> &HermitianMatrix {
        &self.sigma
    }

    fn draw_samples(&self, t: usize, rng: &mut RngStream) -> Result<SampleSet> {
        self.generator.draw(t, rng)
    }
}

/// `y = H x + z` with `x ~ N(0, I)` and `z ~ N(0, sigma2 I)`.
#[derive(Clone, Debug)]
pub struct LinearModelScene {
    h: CMatrix,
    sigma2: f64,
    field: Field,
    sigma: HermitianMatrix,
}

impl LinearModelScene {
    pub fn with_channel(h: CMatrix, sigma2: f64, field: Field) -> Result<Self> {
        if h.nrows() == 0 || h.ncols() == 0 {
            return Err(Error::Empty("channel matrix"));
        }
        if !(sigma2 > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "noise variance must be positive, got {sigma2}"
            )));
        }
        let n = h.nrows();
        let sigma =
            HermitianMatrix::from_matrix(&h * h.adjoint() + CMatrix::identity(n, n).scale(sigma2))?;
        Ok(Self {
            h,
            sigma2,
            field,
            sigma,
        })
    }

    pub fn channel(&self) -> &CMatrix {
        &self.h
    }

    pub fn noise_variance(&self) -> f64 {
        self.sigma2
    }

    pub fn field(&self) -> Field {
        self.field
    }

    pub fn output_dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn input_dim(&self) -> usize {
        self.h.ncols()
    }

    /// Outputs for the given inputs, one column per sample.
    pub fn respond(&self, inputs: &CMatrix, rng: &mut RngStream) -> Result<CMatrix> {
        if inputs.nrows() != self.input_dim() {
            return Err(dim_mismatch(self.input_dim(), inputs.nrows()));
        }
        let noise = rng.matrix(self.output_dim(), inputs.ncols(), self.field)
            * Complex64::new(self.sigma2.sqrt(), 0.0);
        Ok(&self.h * inputs + noise)
    }

    /// `H + D` with i.i.d. entries of `D` of the given variance.
    pub fn perturbed(&self, variance: f64, rng: &mut RngStream) -> Result<Self> {
        let d = rng.matrix(self.output_dim(), self.input_dim(), self.field)
            * Complex64::new(variance.sqrt(), 0.0);
        Self::with_channel(&self.h + d, self.sigma2, self.field)
    }
}

impl SampleSource for LinearModelScene {
    fn true_covariance(&self) -> &HermitianMatrix {
        &self.sigma
    }

    fn draw_samples(&self, t: usize, rng: &mut RngStream) -> Result<SampleSet> {
        let x = rng.matrix(self.input_dim(), t, self.field);
        SampleSet::new(self.respond(&x, rng)?)
    }
}

/// Linear model with i.i.d. unit-variance channel entries.
pub fn linear_model_scene(
    n: usize,
    m: usize,
    sigma2: f64,
    field: Field,
    rng: &mut RngStream,
) -> Result<LinearModelScene> {
    if n == 0 || m == 0 {
        return Err(Error::InvalidParameter(
            "linear model needs n, m >= 1".into(),
        ));
    }
    let h = rng.matrix(n, m, field);
    LinearModelScene::with_channel(h, sigma2, field)
}

/// `S_t (x) S_r` with AR factors.
pub fn kronecker_channel_cov(
    nt: usize,
    nr: usize,
    r_t: Complex64,
    r_r: Complex64,
) -> Result<HermitianMatrix> {
    let st = ar_covariance(nt, r_t)?;
    let sr = ar_covariance(nr, r_r)?;
    HermitianMatrix::from_matrix(st.as_matrix().kronecker(sr.as_matrix()))
}

/// Desired signal at broadside plus point interferers and white noise.
#[derive(Clone, Debug)]
pub struct InterferenceScene {
    pub steering: SteeringVector,
    pub interferers: Vec<SteeringVector>,
    pub signal_power: f64,
    pub interference_power: f64,
    pub noise_power: f64,
    sigma: HermitianMatrix,
    interference_plus_noise: HermitianMatrix,
    generator: SampleGenerator,
}

impl InterferenceScene {
    pub fn interference_plus_noise(&self) -> &HermitianMatrix {
        &self.interference_plus_noise
    }

    pub fn dim(&self) -> usize {
        self.steering.len()
    }
}

impl SampleSource for InterferenceScene {
    fn true_covariance(&self) -> &HermitianMatrix {
        &self.sigma
    }

    fn draw_samples(&self, t: usize, rng: &mut RngStream) -> Result<SampleSet> {
        self.generator.draw(t, rng)
    }
}

/// Powers in dB are relative to a unit-power desired signal at angle 0.
pub fn interference_scene(
    aoas: &[f64],
    inr_db: f64,
    noise_db: f64,
    n: usize,
) -> Result<InterferenceScene> {
    if n == 0 {
        return Err(Error::InvalidParameter(
            "array needs at least one element".into(),
        ));
    }
    let signal_power = 1.0;
    let interference_power = 10f64.powf(inr_db / 10.0);
    let noise_power = 10f64.powf(noise_db / 10.0);
    let steering = ula_steering(0.0, n);
    let interferers: Vec<SteeringVector> = aoas.iter().map(|&a| ula_steering(a, n)).collect();
    let mut q = CMatrix::identity(n, n).scale(noise_power);
    for s in &interferers {
        q += outer_product(&s.elements)
            .as_matrix()
            .scale(interference_power);
    }
    let interference_plus_noise = HermitianMatrix::from_matrix(q)?;
    let sigma =
        interference_plus_noise.add(&outer_product(&steering.elements).scale(signal_power))?;
    let generator = SampleGenerator::new(&sigma, Field::Complex)?;
    Ok(InterferenceScene {
        steering,
        interferers,
        signal_power,
        interference_power,
        noise_power,
        sigma,
        interference_plus_noise,
        generator,
    })
}

/// Adds independent uniform offsets on `[-w, w]` to the real and imaginary
/// parts of `r`.
pub fn perturb_coefficient(r: Complex64, half_width: f64, rng: &mut RngStream) -> Complex64 {
    let re = rng.uniform(-half_width, half_width);
    let im = rng.uniform(-half_width, half_width);
    r + Complex64::new(re, im)
}

/// Unit-variance complex channel vectors, `vec` of an `nr x nt` matrix
/// with covariance `sigma_h`.
pub fn channel_vectors(
    sigma_h: &HermitianMatrix,
    t: usize,
    rng: &mut RngStream,
) -> Result<Vec<CVector>> {
    let s = gaussian_samples(sigma_h, t, rng, Field::Complex)?;
    Ok((0..t).map(|i| s.column(i)).collect())
}
