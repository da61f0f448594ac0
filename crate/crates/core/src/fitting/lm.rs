use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};

/// A model parameter with box bounds; `fixed` parameters are held at
/// `initial`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Parameter {
    pub name: &'static str,
    pub initial: f64,
    pub lower: f64,
    pub upper: f64,
    pub fixed: bool,
}

impl Parameter {
    pub fn new(name: &'static str, initial: f64, lower: f64, upper: f64) -> Self {
        Parameter {
            name,
            initial,
            lower,
            upper,
            fixed: false,
        }
    }

    fn clamp(&self, value: f64) -> f64 {
        value.clamp(self.lower, self.upper)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Converged once the projected gradient norm is below this times (1 + cost).
    pub gradient_tolerance: f64,
    pub initial_damping: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            max_iterations: 500,
            gradient_tolerance: 1e-8,
            initial_damping: 1e-3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitStatus {
    Converged,
    /// No damped step lowers the cost any further; the gradient is above
    /// tolerance only by round-off.
    Stalled,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitParameter {
    pub name: &'static str,
    pub value: f64,
    pub uncertainty: f64,
    pub fixed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub parameters: Vec<FitParameter>,
    /// Σ((y − f)/σ)² at the optimum.
    pub chi_squared: f64,
    pub degrees_of_freedom: usize,
    pub reduced_chi_squared: f64,
    pub status: FitStatus,
    pub iterations: usize,
    pub gradient_norm: f64,
    /// Over free parameters, in the order they appear in `parameters`.
    pub covariance: Vec<Vec<f64>>,
    /// Cost after every accepted step, starting from the initial point.
    pub cost_history: Vec<f64>,
}

impl FitResult {
    pub fn value(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|p| p.name == name).map(|p| p.value)
    }

    pub fn uncertainty(&self, name: &str) -> Option<f64> {
        self.parameters.iter().find(|p| p.name == name).map(|p| p.uncertainty)
    }
}

/// A data point (x, y, σ_y).
pub type Point = (f64, f64, f64);

fn cost<F: Fn(f64, &[f64]) -> f64>(model: &F, data: &[Point], p: &[f64]) -> f64 {
    data.iter().map(|&(x, y, s)| ((y - model(x, p)) / s).powi(2)).sum()
}

fn residuals<F: Fn(f64, &[f64]) -> f64>(model: &F, data: &[Point], p: &[f64]) -> DVector<f64> {
    DVector::from_iterator(data.len(), data.iter().map(|&(x, y, s)| (y - model(x, p)) / s))
}

/// ∂f/∂p_j / σ by the five-point central difference with step
/// `step_scale·max(|p_j|, 1e-3)`; next to a bound the second-order one-sided
/// stencil is used instead.
pub fn numerical_jacobian<F: Fn(f64, &[f64]) -> f64>(
    model: &F,
    data: &[Point],
    params: &[Parameter],
    p: &[f64],
    free: &[usize],
    step_scale: f64,
) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(data.len(), free.len());
    let mut work = p.to_vec();
    for (col, &j) in free.iter().enumerate() {
        let h = step_scale * p[j].abs().max(1e-3);
        let fits = |d: f64| p[j] + d >= params[j].lower && p[j] + d <= params[j].upper;
        let (offsets, weights, scale): (&[f64], &[f64], f64) = if fits(-2.0 * h) && fits(2.0 * h) {
            (&[-2.0, -1.0, 1.0, 2.0], &[1.0, -8.0, 8.0, -1.0], 12.0 * h)
        } else if fits(2.0 * h) {
            (&[0.0, 1.0, 2.0], &[-3.0, 4.0, -1.0], 2.0 * h)
        } else {
            (&[0.0, -1.0, -2.0], &[3.0, -4.0, 1.0], 2.0 * h)
        };
        for (row, &(x, _, s)) in data.iter().enumerate() {
            let mut acc = 0.0;
            for (o, w) in offsets.iter().zip(weights) {
                work[j] = p[j] + o * h;
                acc += w * model(x, &work);
            }
            jac[(row, col)] = acc / scale / s;
        }
        work[j] = p[j];
    }
    jac
}

const JACOBIAN_STEP: f64 = 7.0e-4;
const MAX_DAMPING: f64 = 1e16;

fn pinned(grad: f64, param: &Parameter, value: f64) -> bool {
    // cost decreases along −grad
    (value <= param.lower && grad > 0.0) || (value >= param.upper && grad < 0.0)
}

fn projected_gradient(grad: &DVector<f64>, params: &[Parameter], p: &[f64], free: &[usize]) -> f64 {
    free.iter()
        .enumerate()
        .filter(|&(k, &j)| !pinned(grad[k], &params[j], p[j]))
        .map(|(k, _)| grad[k] * grad[k])
        .sum::<f64>()
        .sqrt()
}

/// Bounded Levenberg–Marquardt minimization of Σ((y − f(x; p))/σ)².
pub fn levenberg_marquardt<F: Fn(f64, &[f64]) -> f64>(model: F, params: &[Parameter], data: &[Point], options: FitOptions) -> Result<FitResult> {
    for p in params {
        if !(p.lower <= p.initial && p.initial <= p.upper) || !p.initial.is_finite() {
            return Err(Error::Fit(format!("initial {} = {} outside its bounds", p.name, p.initial)));
        }
    }
    let free: Vec<usize> = (0..params.len()).filter(|&j| !params[j].fixed).collect();
    if free.is_empty() {
        return Err(Error::Fit("no free parameters".into()));
    }
    if data.len() < free.len() {
        return Err(Error::Fit(format!("{} points for {} free parameters", data.len(), free.len())));
    }
    if data
        .iter()
        .any(|&(x, y, s)| !(s > 0.0) || !x.is_finite() || !y.is_finite() || !s.is_finite())
    {
        return Err(Error::Fit("data must be finite with σ > 0".into()));
    }

    let mut p: Vec<f64> = params.iter().map(|q| q.initial).collect();
    let mut current = cost(&model, data, &p);
    if !current.is_finite() {
        return Err(Error::Fit("model is not finite at the initial parameters".into()));
    }
    let mut history = vec![current];
    let mut lambda = options.initial_damping;
    let mut status = FitStatus::MaxIterations;
    let mut iterations = 0;

    while iterations < options.max_iterations {
        iterations += 1;
        let jac = numerical_jacobian(&model, data, params, &p, &free, JACOBIAN_STEP);
        let r = residuals(&model, data, &p);
        let normal = jac.transpose() * &jac;
        let rhs = jac.transpose() * &r;
        let grad = &rhs * -2.0;
        if projected_gradient(&grad, params, &p, &free) < options.gradient_tolerance * (1.0 + current) {
            status = FitStatus::Converged;
            break;
        }
        // parameters held at a bound by the gradient drop out of the step
        let moving: Vec<usize> = (0..free.len()).filter(|&k| !pinned(grad[k], &params[free[k]], p[free[k]])).collect();
        let normal = normal.select_rows(&moving).select_columns(&moving);
        let rhs = rhs.select_rows(&moving);
        let diag_floor = 1e-12 * normal.diagonal().max().max(f64::MIN_POSITIVE);
        let mut accepted = false;
        while lambda <= MAX_DAMPING {
            let mut damped = normal.clone();
            for k in 0..moving.len() {
                damped[(k, k)] += lambda * normal[(k, k)].max(diag_floor);
            }
            let Some(chol) = damped.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&rhs);
            let mut trial = p.clone();
            for (s, &k) in moving.iter().enumerate() {
                let j = free[k];
                trial[j] = params[j].clamp(p[j] + step[s]);
            }
            let trial_cost = cost(&model, data, &trial);
            if trial_cost.is_finite() && trial_cost < current {
                p = trial;
                current = trial_cost;
                history.push(current);
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            status = FitStatus::Stalled;
            break;
        }
    }

    let jac = numerical_jacobian(&model, data, params, &p, &free, JACOBIAN_STEP);
    let r = residuals(&model, data, &p);
    let gradient_norm = projected_gradient(&(jac.transpose() * &r * -2.0), params, &p, &free);
    if gradient_norm < options.gradient_tolerance * (1.0 + current) {
        status = FitStatus::Converged;
    }
    let dof = data.len() - free.len();
    let reduced = if dof > 0 { current / dof as f64 } else { 0.0 };
    let covariance = covariance(&(jac.transpose() * &jac), reduced)?;

    let mut parameters = Vec::with_capacity(params.len());
    let mut k = 0;
    for (j, q) in params.iter().enumerate() {
        let uncertainty = if q.fixed {
            0.0
        } else {
            let u = covariance[(k, k)].sqrt();
            k += 1;
            u
        };
        parameters.push(FitParameter {
            name: q.name,
            value: p[j],
            uncertainty,
            fixed: q.fixed,
        });
    }
    Ok(FitResult {
        parameters,
        chi_squared: current,
        degrees_of_freedom: dof,
        reduced_chi_squared: reduced,
        status,
        iterations,
        gradient_norm,
        covariance: covariance.row_iter().map(|row| row.iter().copied().collect()).collect(),
        cost_history: history,
    })
}

/// (JᵀJ)⁻¹ scaled by the reduced χ², via the symmetric eigendecomposition so
/// the result is positive semidefinite even when the curvature is nearly
/// singular.
fn covariance(normal: &DMatrix<f64>, reduced_chi2: f64) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(normal.clone());
    let max = eig.eigenvalues.max();
    if !(max > 0.0) {
        return Err(Error::Fit("curvature matrix is zero".into()));
    }
    let inv = eig.eigenvalues.map(|l| if l > 1e-14 * max { 1.0 / l } else { 0.0 });
    let v = &eig.eigenvectors;
    Ok(v * DMatrix::from_diagonal(&inv) * v.transpose() * reduced_chi2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(x: f64, p: &[f64]) -> f64 {
        p[0] + p[1] * x
    }

    #[test]
    fn straight_line_matches_closed_form() {
        let data: Vec<Point> = (0..10)
            .map(|i| (i as f64, 1.0 + 2.0 * i as f64 + if i % 2 == 0 { 0.1 } else { -0.1 }, 0.1))
            .collect();
        let params = [
            Parameter::new("a", 0.0, f64::NEG_INFINITY, f64::INFINITY),
            Parameter::new("b", 0.0, f64::NEG_INFINITY, f64::INFINITY),
        ];
        let fit = levenberg_marquardt(line, &params, &data, FitOptions::default()).unwrap();
        // ordinary least squares
        let n = data.len() as f64;
        let (sx, sy) = data.iter().fold((0.0, 0.0), |(a, b), &(x, y, _)| (a + x, b + y));
        let sxx: f64 = data.iter().map(|&(x, _, _)| x * x).sum();
        let sxy: f64 = data.iter().map(|&(x, y, _)| x * y).sum();
        let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
        let intercept = (sy - slope * sx) / n;
        assert!((fit.value("b").unwrap() - slope).abs() < 1e-9);
        assert!((fit.value("a").unwrap() - intercept).abs() < 1e-9);
        assert_eq!(fit.status, FitStatus::Converged);
    }

    #[test]
    fn bounds_are_respected() {
        let data: Vec<Point> = (0..10).map(|i| (i as f64, 3.0 - i as f64, 1.0)).collect();
        let params = [Parameter::new("a", 0.0, -10.0, 10.0), Parameter::new("b", 0.5, 0.0, 5.0)];
        let fit = levenberg_marquardt(line, &params, &data, FitOptions::default()).unwrap();
        assert_eq!(fit.value("b").unwrap(), 0.0);
        assert_eq!(fit.status, FitStatus::Converged);
    }

    #[test]
    fn fixed_parameter_is_held() {
        let data: Vec<Point> = (0..10).map(|i| (i as f64, 1.0 + 2.0 * i as f64, 1.0)).collect();
        let mut params = [Parameter::new("a", 0.5, -10.0, 10.0), Parameter::new("b", 0.0, -10.0, 10.0)];
        params[0].fixed = true;
        let fit = levenberg_marquardt(line, &params, &data, FitOptions::default()).unwrap();
        assert_eq!(fit.value("a").unwrap(), 0.5);
        assert_eq!(fit.uncertainty("a").unwrap(), 0.0);
        assert_eq!(fit.covariance.len(), 1);
    }

    #[test]
    fn invalid_inputs() {
        let params = [Parameter::new("a", 20.0, -10.0, 10.0), Parameter::new("b", 0.0, -10.0, 10.0)];
        assert!(levenberg_marquardt(line, &params, &[(0.0, 1.0, 1.0), (1.0, 1.0, 1.0)], FitOptions::default()).is_err());
        let params = [Parameter::new("a", 0.0, -10.0, 10.0), Parameter::new("b", 0.0, -10.0, 10.0)];
        assert!(levenberg_marquardt(line, &params, &[(0.0, 1.0, 1.0)], FitOptions::default()).is_err());
        assert!(levenberg_marquardt(line, &params, &[(0.0, 1.0, 0.0), (1.0, 1.0, 1.0)], FitOptions::default()).is_err());
    }
}
