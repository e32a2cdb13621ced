//! Weighted Fourier coordinates for the gBBM Hamiltonian.
//!
//! A real mean-zero profile u on [0, 2π) is written
//!
//! ```text
//! u = Σ_{j∈Z̄} δ_j z_j φ_j,   φ_j = e^{ijx}/√(2π),   Z̄ = Z∖{0},
//! ```
//!
//! with weights δ_j = √(|j|/(1+j²)). Reality of u is exactly the
//! constraint z̄_j = z_{−j}. In these coordinates
//!
//! ```text
//! H = Λ + G,
//! Λ = Σ_{j≥1} λ_j z_j z_{−j},          λ_j = j/(1+j²),
//! G = (1/120π²) Σ_{j₁+⋯+j₆=0} δ_{j₁}⋯δ_{j₆} z_{j₁}⋯z_{j₆},
//! ```
//!
//! and the equations of motion are ż_j = −i·sgn(j)·∂H/∂z_{−j}, which on
//! the linear part reduce to ż_j = −iλ_j z_j for every j.
//!
//! λ and δ² are rational in j; this module exposes them exactly (for the
//! divisor and normal-form layers) and as f64 (for dynamics). The
//! gradient of G is evaluated pseudo-spectrally on an internal grid
//! padded to ≥ 6·j_max+2 points, which makes the degree-5 product
//! alias-free on the retained band; the public grid precondition
//! m ≥ 4·j_max applies to synthesis/analysis resolution only.

use num::BigRational;
use num_bigint::BigInt;
use num_complex::Complex64;
use rustfft::FftPlanner;
use std::f64::consts::PI;

use crate::{Error, Result};

/// Fourier mode index. Mode 0 is excluded from the phase space (mean-zero
/// states); APIs that accept a `Mode` validate j ≠ 0 at the boundary and
/// debug-assert it internally.
pub type Mode = i64;

/// λ_j = j/(1+j²) as an exact rational. Odd in j.
pub fn lambda(j: Mode) -> BigRational {
    debug_assert!(j != 0, "mode 0 is not part of the phase space");
    BigRational::new(BigInt::from(j), BigInt::from(1 + j * j))
}

/// λ_j = j/(1+j²) in floating point.
pub fn lambda_f64(j: Mode) -> f64 {
    debug_assert!(j != 0);
    j as f64 / (1.0 + (j as f64) * (j as f64))
}

/// δ_j² = |j|/(1+j²) as an exact rational. Even in j; δ_j itself is kept
/// symbolic in the normal-form layer and only ever needed squared or as
/// an f64.
pub fn delta_sq(j: Mode) -> BigRational {
    debug_assert!(j != 0);
    BigRational::new(BigInt::from(j.abs()), BigInt::from(1 + j * j))
}

/// δ_j = √(|j|/(1+j²)) in floating point.
pub fn delta_f64(j: Mode) -> f64 {
    debug_assert!(j != 0);
    let ja = j.abs() as f64;
    (ja / (1.0 + ja * ja)).sqrt()
}

/// Truncated spectral state: complex amplitudes z_j for 1 ≤ |j| ≤ j_max.
///
/// Storage is positive modes first (j = 1..=j_max), then negative modes
/// (j = −1..=−j_max). A state represents a real profile iff
/// z_{−j} = conj(z_j) for all j; [`SpectralState::reality_defect`]
/// measures the violation and the dynamics layer keeps it at the
/// round-off floor by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    j_max: usize,
    z: Vec<Complex64>,
}

impl SpectralState {
    /// Zero state with modes 1 ≤ |j| ≤ j_max.
    pub fn zeros(j_max: usize) -> Self {
        assert!(j_max >= 1, "j_max must be at least 1");
        SpectralState { j_max, z: vec![Complex64::new(0.0, 0.0); 2 * j_max] }
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    fn idx(&self, j: Mode) -> usize {
        debug_assert!(j != 0 && j.unsigned_abs() as usize <= self.j_max, "mode {j} out of range");
        if j > 0 { (j - 1) as usize } else { self.j_max + (-j - 1) as usize }
    }

    /// z_j; zero outside the truncation range.
    pub fn get(&self, j: Mode) -> Complex64 {
        if j == 0 || j.unsigned_abs() as usize > self.j_max {
            Complex64::new(0.0, 0.0)
        } else {
            self.z[self.idx(j)]
        }
    }

    pub fn set(&mut self, j: Mode, v: Complex64) {
        assert!(j != 0 && j.unsigned_abs() as usize <= self.j_max, "mode {j} out of range");
        let i = self.idx(j);
        self.z[i] = v;
    }

    /// Modes in storage order: 1..=j_max, then −1..=−j_max.
    pub fn modes(&self) -> impl Iterator<Item = Mode> + '_ {
        let jm = self.j_max as Mode;
        (1..=jm).chain((1..=jm).map(|j| -j))
    }

    /// max_j |z_{−j} − conj(z_j)|: zero exactly when the state is the
    /// spectral image of a real profile.
    pub fn reality_defect(&self) -> f64 {
        (1..=self.j_max as Mode)
            .map(|j| (self.get(-j) - self.get(j).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Raw storage (positive block then negative block).
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.z
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.z
    }
}

/// Synthesis/analysis grid: m uniform samples x_k = 2πk/m resolving modes
/// up to j_max. The constructor enforces the headroom rule m ≥ 4·j_max.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridProfile {
    pub m: usize,
    pub j_max: usize,
}

impl GridProfile {
    pub fn new(m: usize, j_max: usize) -> Result<Self> {
        if j_max == 0 {
            return Err(Error::Config("j_max must be at least 1".into()));
        }
        if m < 4 * j_max {
            return Err(Error::Config(format!(
                "grid too small: m = {m} < 4·j_max = {}",
                4 * j_max
            )));
        }
        Ok(GridProfile { m, j_max })
    }
}

fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// Internal grid size for pseudo-spectral products of degree ≤ 5 followed
/// by truncation to |j| ≤ j_max: with p ≥ 6·j_max+2 every alias of a
/// product mode |k| ≤ 5·j_max lands at |k−p| ≥ j_max+2, outside the
/// retained band.
fn dealias_grid(j_max: usize) -> usize {
    next_pow2((6 * j_max + 2).max(16))
}

fn fft_forward(buf: &mut [Complex64]) {
    FftPlanner::new().plan_fft_forward(buf.len()).process(buf);
}

fn fft_inverse(buf: &mut [Complex64]) {
    FftPlanner::new().plan_fft_inverse(buf.len()).process(buf);
}

/// Reusable pseudo-spectral workspace for a fixed truncation: FFT plans
/// and the dealiased buffer are built once, so the time integrator can
/// evaluate the sextic gradient and the energies millions of times
/// without re-planning.
pub struct SpectralWorkspace {
    j_max: usize,
    p: usize,
    fwd: std::sync::Arc<dyn rustfft::Fft<f64>>,
    inv: std::sync::Arc<dyn rustfft::Fft<f64>>,
    buf: Vec<Complex64>,
}

impl SpectralWorkspace {
    pub fn new(j_max: usize) -> Self {
        assert!(j_max >= 1, "j_max must be at least 1");
        let p = dealias_grid(j_max);
        let mut planner = FftPlanner::new();
        SpectralWorkspace {
            j_max,
            p,
            fwd: planner.plan_fft_forward(p),
            inv: planner.plan_fft_inverse(p),
            buf: vec![Complex64::new(0.0, 0.0); p],
        }
    }

    pub fn j_max(&self) -> usize {
        self.j_max
    }

    fn load(&mut self, state: &SpectralState) {
        assert_eq!(state.j_max, self.j_max, "workspace truncation mismatch");
        let s = 1.0 / (2.0 * PI).sqrt();
        self.buf.fill(Complex64::new(0.0, 0.0));
        for j in state.modes() {
            let uhat = state.get(j) * (delta_f64(j) * s);
            let b = if j >= 0 { j as usize } else { self.p - (-j) as usize };
            self.buf[b] = uhat;
        }
        self.inv.process(&mut self.buf);
    }

    /// [`gradient_g`] with cached plans; `out` uses the storage layout of
    /// [`SpectralState::amplitudes`] and must have length 2·j_max.
    pub fn gradient_g_into(&mut self, state: &SpectralState, out: &mut [Complex64]) {
        assert_eq!(out.len(), 2 * self.j_max, "output length mismatch");
        self.load(state);
        for c in self.buf.iter_mut() {
            let u = *c;
            let u2 = u * u;
            *c = u2 * u2 * u;
        }
        self.fwd.process(&mut self.buf);
        let scale = (2.0 * PI).sqrt() / (5.0 * self.p as f64);
        for j in state.modes() {
            let b = if j >= 0 { j as usize } else { self.p - (-j) as usize };
            out[state.idx(j)] = self.buf[b] * (scale * delta_f64(j));
        }
    }

    /// [`energy`] with cached plans.
    pub fn energy(&mut self, state: &SpectralState) -> Energy {
        let mut quadratic = 0.0;
        let mut e1 = 0.0;
        for j in 1..=state.j_max as Mode {
            let zp = state.get(j);
            let zn = state.get(-j);
            quadratic += lambda_f64(j) * (zp * zn).re;
            e1 += j as f64 * (zp.norm_sqr() + zn.norm_sqr());
        }
        self.load(state);
        let mut sextic = 0.0;
        for c in &self.buf {
            let u = c.re;
            let u2 = u * u;
            sextic += u2 * u2 * u2;
        }
        sextic *= 2.0 * PI / (30.0 * self.p as f64);
        Energy { h: quadratic + sextic, quadratic, sextic, e1 }
    }
}

/// Spread a truncated spectrum û_j = δ_j z_j/√(2π) onto p FFT bins
/// (unnormalized inverse-FFT layout: bin j for j ≥ 0, bin p+j for j < 0).
fn spectrum_bins(state: &SpectralState, p: usize) -> Vec<Complex64> {
    assert!(p > 2 * state.j_max, "grid too small for the truncation");
    let s = 1.0 / (2.0 * PI).sqrt();
    let mut bins = vec![Complex64::new(0.0, 0.0); p];
    for j in state.modes() {
        let uhat = state.get(j) * (delta_f64(j) * s);
        let b = if j >= 0 { j as usize } else { p - (-j) as usize };
        bins[b] = uhat;
    }
    bins
}

/// Sample the profile u(x_k) = Σ_j δ_j z_j e^{ij x_k}/√(2π) on the grid
/// x_k = 2πk/profile.m. Real part of the synthesis; the imaginary part is
/// round-off for states satisfying the reality constraint.
pub fn synthesize(state: &SpectralState, profile: GridProfile) -> Result<Vec<f64>> {
    if profile.j_max < state.j_max {
        return Err(Error::Config(format!(
            "profile resolves j_max = {} but the state carries {}",
            profile.j_max, state.j_max
        )));
    }
    GridProfile::new(profile.m, profile.j_max)?;
    let mut bins = spectrum_bins(state, profile.m);
    fft_inverse(&mut bins);
    Ok(bins.iter().map(|c| c.re).collect())
}

/// Project m uniform samples of a real profile onto the truncated
/// weighted frame: z_j = û_j √(2π)/δ_j for 1 ≤ |j| ≤ j_max, where
/// û_j = (1/m) Σ_k u(x_k) e^{−ij x_k}. The mean bin is ignored (the phase
/// space is mean-zero); modes above j_max are discarded.
pub fn analyze(u: &[f64], profile: GridProfile) -> Result<SpectralState> {
    if u.len() != profile.m {
        return Err(Error::Config(format!(
            "sample count {} does not match profile.m = {}",
            u.len(),
            profile.m
        )));
    }
    GridProfile::new(profile.m, profile.j_max)?;
    let m = profile.m;
    let mut buf: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft_forward(&mut buf);
    let s = (2.0 * PI).sqrt() / m as f64;
    let mut state = SpectralState::zeros(profile.j_max);
    for j in 1..=profile.j_max as Mode {
        let up = buf[j as usize] * (s / delta_f64(j));
        let un = buf[m - j as usize] * (s / delta_f64(-j));
        state.set(j, up);
        state.set(-j, un);
    }
    Ok(state)
}

/// Gradient of the sextic part: entry at storage index of j is
///
/// ```text
/// ∂G/∂z_{−j} = (1/20π²) δ_j Σ_{j₁+⋯+j₅=j} δ_{j₁}⋯δ_{j₅} z_{j₁}⋯z_{j₅}
///            = (δ_j/5) · √(2π) · (u⁵)^_j,
/// ```
///
/// the convolution evaluated pseudo-spectrally on the internal dealiased
/// grid, hence exact (up to round-off) on the retained band. The identity
/// holds for arbitrary complex states, not only real ones: pointwise
/// powers of the trigonometric polynomial compute exactly the quintuple
/// convolution.
pub fn gradient_g(state: &SpectralState) -> Vec<Complex64> {
    let mut ws = SpectralWorkspace::new(state.j_max);
    let mut out = vec![Complex64::new(0.0, 0.0); 2 * state.j_max];
    ws.gradient_g_into(state, &mut out);
    out
}

/// Energy decomposition of a (real) state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    /// H = quadratic + sextic.
    pub h: f64,
    /// Λ = Σ_{j≥1} λ_j z_j z_{−j} (real part).
    pub quadratic: f64,
    /// (1/30)∫u⁶, by exact-quadrature on the dealiased grid.
    pub sextic: f64,
    /// E₁ = Σ_j |j| |z_j|², the ∫(u²+u_x²) invariant.
    pub e1: f64,
}

/// Hamiltonian and the quadratic invariant E₁. The sextic integral is
/// computed on the internal grid with > 6·j_max points, where the
/// trapezoid rule is exact for the band-limited integrand.
pub fn energy(state: &SpectralState) -> Energy {
    SpectralWorkspace::new(state.j_max).energy(state)
}

/// Weighted norm ‖z‖_p = √(Σ_j |z_j|² |j|^{2p}).
pub fn weighted_norm(state: &SpectralState, p: i32) -> f64 {
    state
        .modes()
        .map(|j| state.get(j).norm_sqr() * ((j.abs() as f64).powi(2 * p)))
        .sum::<f64>()
        .sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use num_traits::{One, Signed, Zero};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid(m: usize, j_max: usize) -> GridProfile {
        GridProfile::new(m, j_max).unwrap()
    }

    fn random_state(j_max: usize, seed: u64, real: bool) -> SpectralState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut st = SpectralState::zeros(j_max);
        for j in 1..=j_max as Mode {
            let v = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            st.set(j, v);
            if real {
                st.set(-j, v.conj());
            } else {
                st.set(-j, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
            }
        }
        st
    }

    #[test]
    fn lambda_is_odd_and_exact() {
        for j in 1..=500i64 {
            assert_eq!(lambda(j) + lambda(-j), BigRational::zero());
            assert!(lambda(j).is_positive());
        }
        // λ_50 = 50/2501, λ_2500 = 2500/6250001.
        assert_eq!(lambda(50), BigRational::new(50.into(), 2501.into()));
        assert_eq!(lambda(2500), BigRational::new(2500.into(), 6250001.into()));
    }

    #[test]
    fn delta_sq_is_even_and_below_half() {
        let half = BigRational::new(1.into(), 2.into());
        for j in 1..=500i64 {
            assert_eq!(delta_sq(j), delta_sq(-j));
            assert!(delta_sq(j) <= half);
        }
        assert_eq!(delta_sq(1), half);
        assert_eq!(delta_sq(-3), BigRational::new(3.into(), 10.into()));
    }

    #[test]
    fn lambda_j_equals_delta_sq_j_for_positive_j() {
        // On positive modes the linear frequency and the squared weight
        // coincide; the normal-form layer leans on this identity.
        for j in 1..=100i64 {
            assert_eq!(lambda(j), delta_sq(j));
        }
    }

    #[test]
    fn analyze_cosine_gives_sqrt_pi() {
        // u = cos x ⇒ û_{±1} = 1/2 ⇒ z_{±1} = (1/2)√(2π)/δ_1 = √π.
        let profile = grid(64, 8);
        let u: Vec<f64> = (0..64).map(|k| (2.0 * PI * k as f64 / 64.0).cos()).collect();
        let st = analyze(&u, profile).unwrap();
        assert_abs_diff_eq!(st.get(1).re, PI.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(st.get(1).im, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(st.get(-1).re, PI.sqrt(), epsilon = 1e-12);
        for j in 2..=8i64 {
            assert!(st.get(j).norm() < 1e-12 && st.get(-j).norm() < 1e-12);
        }
    }

    #[test]
    fn analyze_synthesize_roundtrip() {
        let profile = grid(128, 16);
        let st = random_state(16, 7, true);
        let u = synthesize(&st, profile).unwrap();
        let back = analyze(&u, profile).unwrap();
        for j in st.modes() {
            assert!((st.get(j) - back.get(j)).norm() < 1e-12, "mode {j} mismatch");
        }
    }

    #[test]
    fn synthesize_rejects_coarse_grids() {
        let st = SpectralState::zeros(8);
        assert!(matches!(synthesize(&st, GridProfile { m: 16, j_max: 8 }), Err(Error::Config(_))));
    }

    /// Direct quintuple sum Σ_{j₁+⋯+j₅=j} δ⋯δ z⋯z over the truncated
    /// range, the brute-force counterpart of the pseudo-spectral product.
    fn gradient_oracle(state: &SpectralState, j: Mode) -> Complex64 {
        let jm = state.j_max as Mode;
        let modes: Vec<Mode> = (1..=jm).chain((1..=jm).map(|m| -m)).collect();
        let mut acc = Complex64::new(0.0, 0.0);
        for &j1 in &modes {
            for &j2 in &modes {
                for &j3 in &modes {
                    for &j4 in &modes {
                        let j5 = j - j1 - j2 - j3 - j4;
                        if j5 == 0 || j5.abs() > jm {
                            continue;
                        }
                        let d = delta_f64(j1) * delta_f64(j2) * delta_f64(j3)
                            * delta_f64(j4)
                            * delta_f64(j5);
                        acc += state.get(j1)
                            * state.get(j2)
                            * state.get(j3)
                            * state.get(j4)
                            * state.get(j5)
                            * d;
                    }
                }
            }
        }
        acc * (delta_f64(j) / (20.0 * PI * PI))
    }

    #[test]
    fn gradient_matches_brute_force_on_pair_state() {
        // Single-pair state u = cos x: the quintic convolution populates
        // |j| ∈ {1,3,5} only.
        let mut st = SpectralState::zeros(8);
        st.set(1, Complex64::new(PI.sqrt(), 0.0));
        st.set(-1, Complex64::new(PI.sqrt(), 0.0));
        let g = gradient_g(&st);
        for j in st.modes() {
            let want = gradient_oracle(&st, j);
            let got = g[st.idx(j)];
            assert!((want - got).norm() < 1e-12, "j = {j}: {want} vs {got}");
        }
    }

    #[test]
    fn gradient_matches_brute_force_on_random_states() {
        // Full-band states exercise the dealiasing: with the internal
        // padded grid the pseudo-spectral path must agree with the direct
        // quintuple sum at every retained mode, including |j| = j_max.
        for (seed, real) in [(11u64, true), (12, false)] {
            let st = random_state(6, seed, real);
            let g = gradient_g(&st);
            for j in st.modes() {
                let want = gradient_oracle(&st, j);
                let got = g[st.idx(j)];
                assert!(
                    (want - got).norm() <= 1e-11 * (1.0 + want.norm()),
                    "seed {seed} j = {j}: {want} vs {got}"
                );
            }
        }
    }

    #[test]
    fn gradient_is_degree_five_homogeneous() {
        let st = random_state(8, 3, true);
        let mut scaled = st.clone();
        for v in scaled.amplitudes_mut() {
            *v *= 2.0;
        }
        let g1 = gradient_g(&st);
        let g2 = gradient_g(&scaled);
        for (a, b) in g1.iter().zip(&g2) {
            assert!((b - a * 32.0).norm() < 1e-10 * (1.0 + b.norm()));
        }
    }

    #[test]
    fn energy_of_scaled_cosine_matches_closed_form() {
        // u = a cos x: H = (π/2)a² + (π/48)a⁶, E₁ = 2πa².
        let a = 0.7;
        let mut st = SpectralState::zeros(8);
        st.set(1, Complex64::new(a * PI.sqrt(), 0.0));
        st.set(-1, Complex64::new(a * PI.sqrt(), 0.0));
        let e = energy(&st);
        assert_abs_diff_eq!(e.quadratic, 0.5 * PI * a * a, epsilon = 1e-12);
        assert_abs_diff_eq!(e.sextic, PI / 48.0 * a.powi(6), epsilon = 1e-12);
        assert_abs_diff_eq!(e.h, e.quadratic + e.sextic, epsilon = 1e-15);
        assert_abs_diff_eq!(e.e1, 2.0 * PI * a * a, epsilon = 1e-12);
    }

    #[test]
    fn quadratic_energy_matches_grid_quadrature() {
        // Parseval: ∫u² = Σ_j δ_j²|z_j|², so the quadratic part can be
        // cross-checked entirely in real space.
        let st = random_state(12, 21, true);
        let profile = grid(256, 12);
        let u = synthesize(&st, profile).unwrap();
        let quad_grid: f64 = 0.5 * u.iter().map(|v| v * v).sum::<f64>() * 2.0 * PI / 256.0;
        let quad_sum: f64 = st
            .modes()
            .filter(|&j| j > 0)
            .map(|j| lambda_f64(j) * (st.get(j) * st.get(-j)).re)
            .sum();
        assert_abs_diff_eq!(quad_grid, quad_sum, epsilon = 1e-10);
    }

    #[test]
    fn weighted_norm_basics() {
        let mut st = SpectralState::zeros(5);
        st.set(3, Complex64::new(2.0, 0.0));
        st.set(-3, Complex64::new(2.0, 0.0));
        assert_abs_diff_eq!(weighted_norm(&st, 0), 8.0f64.sqrt(), epsilon = 1e-14);
        assert_abs_diff_eq!(weighted_norm(&st, 2), (8.0 * 3.0f64.powi(4)).sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn reality_defect_detects_broken_conjugacy() {
        let mut st = random_state(6, 5, true);
        assert_abs_diff_eq!(st.reality_defect(), 0.0, epsilon = 1e-15);
        st.set(-2, st.get(-2) + Complex64::new(1e-3, 0.0));
        assert!(st.reality_defect() > 5e-4);
    }

    #[test]
    fn exact_lambda_agrees_with_f64() {
        use num_traits::ToPrimitive;
        for j in [-2500i64, -50, -1, 1, 7, 50, 2500] {
            let exact = lambda(j);
            let approxv = exact.numer().to_f64().unwrap() / exact.denom().to_f64().unwrap();
            assert_abs_diff_eq!(approxv, lambda_f64(j), epsilon = 1e-15);
        }
        let one = BigRational::one();
        assert_eq!(lambda(1), BigRational::new(1.into(), 2.into()));
        assert!(lambda(1) < one);
    }
}
