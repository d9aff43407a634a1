//! Method-of-lines time integration of `u_t = D u_xx + u(1 − φ * u)` on a
//! periodic box, front tracking and wavelength measurement.

use log::{debug, warn};
use nlkpp_core::KernelSpec;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fpp::d2;
use crate::spectral::PeriodicConvolver;

/// Maximum `u` before a run is declared unphysical.
pub const BLOW_UP: f64 = 10.0;

/// Undershoot below zero that is clipped silently.
pub const CLIP_SILENT: f64 = 1e-14;

/// Diffusive step bound `dt ≤ CFL · dx²/D`.
pub const CFL: f64 = 0.4;

/// Smallest admissible box length, in kernel widths.
pub const MIN_DOMAIN: f64 = 40.0;

/// Front distance from the wrap point below which a run stops, in kernel widths.
pub const FRONT_GUARD: f64 = 10.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionControls {
    pub t_end: f64,
    pub rtol: f64,
    pub atol: f64,
    pub dt0: f64,
    pub dt_min: f64,
    /// Interval between recorded front positions.
    pub front_every: f64,
    /// Stop once the front is this close to the wrap point.
    pub guard_front: bool,
    pub max_steps: usize,
}

impl Default for EvolutionControls {
    fn default() -> Self {
        Self {
            t_end: 100.0,
            rtol: 1e-8,
            atol: 1e-8,
            dt0: 1e-3,
            dt_min: 1e-12,
            front_every: 1.0,
            guard_front: true,
            max_steps: usize::MAX,
        }
    }
}

/// Uniform periodic grid on `[−L/2, L/2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoxGrid {
    pub length: f64,
    pub n: usize,
}

impl BoxGrid {
    pub fn new(length: f64, n: usize) -> Result<Self> {
        if !(length >= MIN_DOMAIN) || (length - length.round()).abs() > 1e-12 {
            return Err(Error::Grid(format!("box length {length} must be an integer >= {MIN_DOMAIN}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Grid(format!("grid size {n} must be a power of two >= 8")));
        }
        Ok(Self { length, n })
    }

    /// Smallest power-of-two grid with spacing `≤ min(1/64, √D/4)`.
    pub fn for_diffusivity(length: f64, d: f64) -> Result<Self> {
        let dx = (1.0 / 64.0f64).min(d.sqrt() / 4.0);
        let n = ((length / dx).ceil() as usize).next_power_of_two().max(8);
        Self::new(length, n)
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    pub fn x(&self) -> Vec<f64> {
        (0..self.n).map(|i| -0.5 * self.length + i as f64 * self.dx()).collect()
    }
}

/// Default localized initial data `exp(−25x²)`.
pub fn localized_bump(grid: &BoxGrid) -> Vec<f64> {
    grid.x().iter().map(|x| (-25.0 * x * x).exp()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionState {
    pub grid: BoxGrid,
    pub u: Vec<f64>,
    pub t: f64,
    pub d: f64,
    pub eps_bar: f64,
    /// `(t, x)` of the rightmost `u = ½` crossing, where one exists.
    pub front_positions: Vec<(f64, f64)>,
    /// Largest undershoot below zero that was clipped.
    pub max_clipped: f64,
    /// Set when an undershoot larger than [`CLIP_SILENT`] was clipped.
    pub clip_flag: bool,
    /// Set when the run stopped early because the front neared the wrap point.
    pub front_guard_hit: bool,
    pub steps: usize,
    pub rejected: usize,
}

/// Right-hand side `D u_xx + u(1 − φ * u)`.
#[derive(Debug, Clone)]
pub struct Rhs {
    d: f64,
    dx: f64,
    conv: PeriodicConvolver,
}

impl Rhs {
    pub fn new(spec: &KernelSpec, grid: &BoxGrid, d: f64) -> Result<Self> {
        if !(d > 0.0) {
            return Err(Error::InvalidState(format!("diffusivity {d} must be positive")));
        }
        Ok(Self { d, dx: grid.dx(), conv: PeriodicConvolver::new(spec, grid.length, grid.n)? })
    }

    pub fn eval(&self, u: &[f64]) -> Vec<f64> {
        let lap = d2(u, self.dx);
        let c = self.conv.apply(u);
        u.iter().zip(&lap).zip(&c).map(|((u, l), c)| self.d * l + u * (1.0 - c)).collect()
    }
}

// Dormand–Prince 5(4) tableau.
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// fifth-order weights minus embedded fourth-order weights
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

/// Integrates from `initial` to `controls.t_end`.
pub fn evolve(
    initial: &[f64],
    grid: &BoxGrid,
    d: f64,
    spec: &KernelSpec,
    controls: &EvolutionControls,
) -> Result<EvolutionState> {
    let state = EvolutionState {
        grid: *grid,
        u: initial.to_vec(),
        t: 0.0,
        d,
        eps_bar: spec.eps_bar(),
        front_positions: Vec::new(),
        max_clipped: 0.0,
        clip_flag: false,
        front_guard_hit: false,
        steps: 0,
        rejected: 0,
    };
    resume(state, spec, controls)
}

/// Continues a run from its current time to `controls.t_end`.
pub fn resume(mut st: EvolutionState, spec: &KernelSpec, controls: &EvolutionControls) -> Result<EvolutionState> {
    let grid = st.grid;
    if st.u.len() != grid.n {
        return Err(Error::Grid(format!("profile has {} samples, grid has {}", st.u.len(), grid.n)));
    }
    let dx = grid.dx();
    let spacing = (1.0 / 64.0f64).min(st.d.sqrt() / 4.0);
    if dx > spacing * (1.0 + 1e-12) {
        return Err(Error::Grid(format!("spacing {dx:.3e} exceeds min(1/64, sqrt(D)/4) = {spacing:.3e}")));
    }
    let rhs = Rhs::new(spec, &grid, st.d)?;
    let dt_max = CFL * dx * dx / st.d;
    let n = grid.n;
    let mut dt = controls.dt0.min(dt_max);
    let mut err_prev: f64 = 1.0;
    let mut k: Vec<Vec<f64>> = vec![rhs.eval(&st.u)];
    let mut next_front = st.t;
    let x = grid.x();
    record_front(&mut st, &x, &mut next_front, controls);
    while st.t < controls.t_end && st.steps < controls.max_steps {
        dt = dt.min(controls.t_end - st.t).min(dt_max);
        k.truncate(1);
        let mut stage = vec![0.0; n];
        for s in 1..7 {
            for i in 0..n {
                let mut acc = st.u[i];
                for (j, kj) in k.iter().enumerate() {
                    acc += dt * A[s][j] * kj[i];
                }
                stage[i] = acc;
            }
            k.push(rhs.eval(&stage));
        }
        // stage 7 sits at the fifth-order solution (first-same-as-last)
        let u_new = stage;
        let mut err: f64 = 0.0;
        for i in 0..n {
            let e: f64 = dt * (0..7).map(|j| E[j] * k[j][i]).sum::<f64>();
            let sc = controls.atol + controls.rtol * st.u[i].abs().max(u_new[i].abs());
            err = err.max((e / sc).abs());
        }
        if !err.is_finite() {
            err = f64::INFINITY;
        }
        if err <= 1.0 {
            st.t += dt;
            st.steps += 1;
            st.u = u_new;
            let mut clipped = false;
            for v in st.u.iter_mut() {
                if *v < 0.0 {
                    st.max_clipped = st.max_clipped.max(-*v);
                    if -*v > CLIP_SILENT {
                        st.clip_flag = true;
                    }
                    *v = 0.0;
                    clipped = true;
                }
            }
            let last = k.pop().expect("seven stages");
            k.clear();
            k.push(if clipped { rhs.eval(&st.u) } else { last });
            let max_u = st.u.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !(max_u <= BLOW_UP) {
                return Err(Error::BlowUp { max_u, t: st.t });
            }
            let err_c = err.max(1e-10);
            let fac = 0.9 * err_c.powf(-0.7 / 5.0) * err_prev.powf(0.4 / 5.0);
            dt *= fac.clamp(0.2, 5.0);
            err_prev = err_c;
            record_front(&mut st, &x, &mut next_front, controls);
            if controls.guard_front {
                if let Some(&(_, xf)) = st.front_positions.last() {
                    if 0.5 * grid.length - xf < FRONT_GUARD {
                        debug!("front at {xf:.3} reached the guard at t = {:.3}", st.t);
                        st.front_guard_hit = true;
                        break;
                    }
                }
            }
        } else {
            st.rejected += 1;
            dt *= (0.9 * err.powf(-0.2)).clamp(0.2, 0.9);
            k.truncate(1);
        }
        if dt < controls.dt_min {
            return Err(Error::TimeStepUnderflow { t: st.t });
        }
    }
    if st.clip_flag {
        warn!("negative undershoot up to {:.3e} clipped", st.max_clipped);
    }
    Ok(st)
}

fn record_front(st: &mut EvolutionState, x: &[f64], next: &mut f64, controls: &EvolutionControls) {
    if st.t + 1e-12 >= *next || st.t >= controls.t_end {
        if let Ok(xf) = front_position(&st.u, x) {
            st.front_positions.push((st.t, xf));
        }
        *next += controls.front_every;
    }
}

/// Rightmost linearly interpolated crossing of `u = ½` (not across the wrap).
pub fn front_position(u: &[f64], x: &[f64]) -> Result<f64> {
    (0..u.len().saturating_sub(1))
        .rev()
        .find_map(|i| {
            let (a, b) = (u[i] - 0.5, u[i + 1] - 0.5);
            (a * b <= 0.0 && a != b).then(|| x[i] + (x[i + 1] - x[i]) * a / (a - b))
        })
        .ok_or(Error::NoFront)
}

/// Least-squares front speed and `R²` over the recorded history with `t ≥ t_from`.
pub fn front_speed(history: &[(f64, f64)], t_from: f64) -> Option<(f64, f64)> {
    let pts: Vec<(f64, f64)> = history.iter().copied().filter(|p| p.0 >= t_from).collect();
    if pts.len() < 3 {
        return None;
    }
    let m = pts.len() as f64;
    let (mt, mx) = (pts.iter().map(|p| p.0).sum::<f64>() / m, pts.iter().map(|p| p.1).sum::<f64>() / m);
    let stt: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let stx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - mx)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.1 - mx).powi(2)).sum();
    let slope = stx / stt;
    let r2 = if sxx > 0.0 { stx * stx / (stt * sxx) } else { 1.0 };
    Some((slope, r2))
}

/// Two wavelength estimates over a window and their verdict.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavelengthEstimate {
    /// Fourier estimate, reported as the wavelength.
    pub wavelength: f64,
    /// `2 · window / mean-crossings`.
    pub crossing_estimate: f64,
    /// Dominant DFT mode, refined by a parabola through its neighbours.
    pub fourier_estimate: f64,
    /// The two estimates differ by more than 5%.
    pub disordered: bool,
    /// `max |u_t|` over the window.
    pub max_ut: f64,
}

/// Agreement required between the two estimators.
pub const WAVELENGTH_AGREEMENT: f64 = 0.05;

/// Quasi-stationarity threshold on `max |u_t|` in the window.
pub const STATIONARY: f64 = 1e-6;

/// Wavelength of `u` over `[a, b)` after checking it is quasi-stationary there.
pub fn measure_wavelength(state: &EvolutionState, spec: &KernelSpec, window: (f64, f64)) -> Result<WavelengthEstimate> {
    let rhs = Rhs::new(spec, &state.grid, state.d)?;
    let ut = rhs.eval(&state.u);
    let idx = window_indices(&state.grid, window)?;
    let max_ut = idx.iter().map(|&i| ut[i].abs()).fold(0.0, f64::max);
    if max_ut > STATIONARY {
        return Err(Error::NotStationary { max_ut });
    }
    let samples: Vec<f64> = idx.iter().map(|&i| state.u[i]).collect();
    let mut est = wavelength_of(&samples, state.grid.dx())?;
    est.max_ut = max_ut;
    Ok(est)
}

fn window_indices(grid: &BoxGrid, (a, b): (f64, f64)) -> Result<Vec<usize>> {
    let x = grid.x();
    let idx: Vec<usize> = (0..grid.n).filter(|&i| x[i] >= a && x[i] < b).collect();
    if idx.len() < 8 {
        return Err(Error::Grid(format!("window [{a}, {b}) holds fewer than 8 samples")));
    }
    Ok(idx)
}

/// Wavelength estimates of uniformly spaced samples with spacing `dx`.
pub fn wavelength_of(samples: &[f64], dx: f64) -> Result<WavelengthEstimate> {
    let m = samples.len();
    let len = m as f64 * dx;
    let mean = samples.iter().sum::<f64>() / m as f64;
    let dev: Vec<f64> = samples.iter().map(|v| v - mean).collect();
    let crossings = dev.windows(2).filter(|w| (w[0] < 0.0) != (w[1] < 0.0)).count();
    if crossings == 0 {
        return Err(Error::InvalidState("no oscillation in the window".into()));
    }
    let crossing_estimate = 2.0 * len / crossings as f64;
    let mut buf: Vec<Complex64> = dev.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    let mag: Vec<f64> = buf.iter().map(|z| z.norm()).collect();
    let top = (1..m / 2).max_by(|&i, &j| mag[i].total_cmp(&mag[j])).expect("window holds 8 samples");
    let (l, c, r) = (mag[top - 1], mag[top], mag[top + 1]);
    let denom = 2.0 * c - l - r;
    let shift = if denom > 0.0 && top > 1 { 0.5 * (r - l) / denom } else { 0.0 };
    let fourier_estimate = len / (top as f64 + shift);
    let disordered = (crossing_estimate - fourier_estimate).abs() > WAVELENGTH_AGREEMENT * fourier_estimate;
    Ok(WavelengthEstimate { wavelength: fourier_estimate, crossing_estimate, fourier_estimate, disordered, max_ut: 0.0 })
}

/// `max |u − u(· + period)|` over the box, for a period that divides it.
pub fn periodicity_defect(u: &[f64], grid: &BoxGrid, period: f64) -> Result<f64> {
    let shift = period / grid.dx();
    if (shift - shift.round()).abs() > 1e-9 {
        return Err(Error::Grid(format!("period {period} is not a whole number of cells")));
    }
    let s = shift.round() as usize;
    let n = u.len();
    Ok((0..n).map(|i| (u[i] - u[(i + s) % n]).abs()).fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tableau_rows_sum_to_nodes() {
        const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
        for s in 0..7 {
            let row: f64 = A[s].iter().sum();
            assert!((row - C[s]).abs() < 1e-14);
        }
        assert!(E.iter().sum::<f64>().abs() < 1e-15);
    }

    #[test]
    fn exponential_growth_is_integrated_to_tolerance() {
        // u small and uniform: u_t = u(1 − u) to leading order gives the logistic curve
        let spec = KernelSpec::top_hat();
        let grid = BoxGrid::new(40.0, 8192).unwrap();
        let u0 = vec![1e-3; grid.n];
        let ctl = EvolutionControls { t_end: 5.0, guard_front: false, ..Default::default() };
        let st = evolve(&u0, &grid, 1e-3, &spec, &ctl).unwrap();
        let exact = 1.0 / (1.0 + (1.0 / 1e-3 - 1.0) * (-5.0f64).exp());
        for v in &st.u {
            assert!((v - exact).abs() < 1e-6, "{v} {exact}");
        }
    }
}
