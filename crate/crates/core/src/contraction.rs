//! Rate function for singleton frequencies of a one-step chain, via the
//! contraction principle.
//!
//! The target quantity is the constrained infimum
//!
//! ```text
//! J(phi) = inf { D_c(nu || mu) : nu stationary pair measure, nu_bar = phi }
//! ```
//!
//! computed here along two algorithmically independent routes whose
//! agreement is a live cross-check:
//!
//! * a variational route, maximizing `g(u) = sum_i phi_i ln(u_i / (A u)_i)`
//!   over positive u. In `w = ln u` coordinates the objective is concave
//!   (linear minus a log-sum-exp composition), the scale direction is
//!   removed by pinning `w_1 = 0`, and damped Newton ascent converges on
//!   the first-order condition `phi = phi B` where
//!   `b_ij = a_ij u_j / (A u)_i`. The optimizer yields the stochastic
//!   matrix B and the feasible measure `nu*_ij = phi_i b_ij` whose
//!   conditional divergence equals `g(u*)`.
//! * a constrained route, minimizing `sum nu_ij ln(nu_ij / (phi_i a_ij))`
//!   over the transportation polytope (row and column sums both phi) by
//!   iterative proportional fitting on the nu matrix itself.
//!
//! The same machinery applied to the transposed action `(u A)` gives the
//! row-vector form of the supremum, reported alongside for comparison.
//!
//! Entries of phi equal to zero drop their log terms and the problem is
//! solved on the support face; the strictly-positive-model precondition
//! keeps the restricted matrix fully positive, so the face never
//! disconnects.

use crate::dist::KTupleDistribution;
use crate::error::{Error, Result};
use crate::information::relative_entropy;
use crate::model::MarkovModel;
use crate::numeric::KahanSum;
use crate::scalar::{real, Scalar};

/// Solution of the variational supremum, with the optimality construction.
#[derive(Debug, Clone)]
pub struct VariationalSolution<F> {
    /// Positive maximizer, normalized so the first coordinate is 1.
    pub u_star: Vec<F>,
    /// g(u*): the rate value.
    pub value: F,
    /// Row-stochastic matrix `b_ij = a_ij u*_j / (A u*)_i` on the support
    /// of phi (identity rows off it).
    pub b_matrix: Vec<Vec<F>>,
    /// The optimal feasible measure `nu*_ij = phi_i b_ij`.
    pub nu_star: KTupleDistribution<F>,
    /// Infinity norm of the first-order residual `phi - phi B`.
    pub residual: F,
    pub iterations: usize,
}

/// Solution of the same supremum for the transposed (row-vector) action.
#[derive(Debug, Clone)]
pub struct RowFormSolution<F> {
    pub u_star: Vec<F>,
    pub value: F,
    pub residual: F,
    pub iterations: usize,
}

/// Solution of the constrained minimization.
#[derive(Debug, Clone)]
pub struct ConstrainedSolution<F> {
    /// inf D_c(nu || mu) subject to both marginals equal to phi.
    pub value: F,
    /// The minimizing measure.
    pub nu: KTupleDistribution<F>,
    /// The same value recovered as `[inf D(nu || mu)] - D(phi || mu_bar)`,
    /// from an independent fitting run against mu.
    pub decomposition_value: F,
    /// Final max deviation of the fitted marginals from phi.
    pub marginal_residual: F,
    pub iterations: usize,
}

/// The variational objective `g(u) = sum_i phi_i ln(u_i / (A u)_i)`,
/// evaluated as written (zero-phi terms dropped).
pub fn variational_objective<F: Scalar>(
    phi: &KTupleDistribution<F>,
    model: &MarkovModel<F>,
    u: &[F],
) -> Result<F> {
    let n = check_inputs(phi, model)?;
    if u.len() != n {
        return Err(Error::LengthMismatch {
            n,
            k: 1,
            expected: n,
            got: u.len(),
        });
    }
    for (index, &value) in u.iter().enumerate() {
        if value <= F::zero() {
            return Err(Error::NonPositiveEntry {
                index,
                value: value.to_f64().unwrap_or(f64::NAN),
            });
        }
    }
    let mut acc = F::zero();
    for i in 0..n {
        let weight = phi.prob(i);
        if weight <= F::zero() {
            continue;
        }
        let row = model.row(i).expect("positive model has all rows");
        let mut image = F::zero();
        for j in 0..n {
            image = image + row[j] * u[j];
        }
        acc = acc + weight * (u[i] / image).ln();
    }
    Ok(acc)
}

/// Maximizes the variational objective and returns the full optimality
/// construction (B, nu*).
pub fn singleton_rate_variational<F: Scalar>(
    phi: &KTupleDistribution<F>,
    model: &MarkovModel<F>,
) -> Result<VariationalSolution<F>> {
    let n = check_inputs(phi, model)?;
    let support: Vec<usize> = (0..n).filter(|&i| phi.prob(i) > F::zero()).collect();
    let matrix = restricted_matrix(model, &support, false);
    let weights: Vec<F> = support.iter().map(|&i| phi.prob(i)).collect();
    let solved = maximize_log_ratio(&weights, &matrix, "variational ascent")?;

    let mut u_star = vec![F::one(); n];
    for (slot, &i) in solved.u.iter().zip(&support) {
        u_star[i] = *slot;
    }
    let first = u_star[0];
    for v in u_star.iter_mut() {
        *v = *v / first;
    }

    // b rows on the support use the restricted image; off-support rows are
    // identity placeholders carrying no nu* mass.
    let mut b_matrix = vec![vec![F::zero(); n]; n];
    for (local, &i) in support.iter().enumerate() {
        let image = &solved.images[local];
        for (inner, &j) in support.iter().enumerate() {
            b_matrix[i][j] = matrix[local][inner] * solved.u[inner] / *image;
        }
    }
    for (i, row) in b_matrix.iter_mut().enumerate() {
        if !support.contains(&i) {
            row[i] = F::one();
        }
    }
    let mut nu = vec![F::zero(); n * n];
    for i in 0..n {
        for j in 0..n {
            nu[i * n + j] = phi.prob(i) * b_matrix[i][j];
        }
    }
    let nu_star = KTupleDistribution::new(n, 2, nu)?;
    Ok(VariationalSolution {
        u_star,
        value: solved.value,
        b_matrix,
        nu_star,
        residual: solved.residual,
        iterations: solved.iterations,
    })
}

/// Same supremum with `(u A)` in place of `(A u)`.
pub fn singleton_rate_row_form<F: Scalar>(
    phi: &KTupleDistribution<F>,
    model: &MarkovModel<F>,
) -> Result<RowFormSolution<F>> {
    let n = check_inputs(phi, model)?;
    let support: Vec<usize> = (0..n).filter(|&i| phi.prob(i) > F::zero()).collect();
    let matrix = restricted_matrix(model, &support, true);
    let weights: Vec<F> = support.iter().map(|&i| phi.prob(i)).collect();
    let solved = maximize_log_ratio(&weights, &matrix, "row-form ascent")?;
    let mut u_star = vec![F::one(); n];
    for (slot, &i) in solved.u.iter().zip(&support) {
        u_star[i] = *slot;
    }
    let first = u_star[0];
    for v in u_star.iter_mut() {
        *v = *v / first;
    }
    Ok(RowFormSolution {
        u_star,
        value: solved.value,
        residual: solved.residual,
        iterations: solved.iterations,
    })
}

/// Minimizes `D_c(nu || mu)` over stationary pair measures with marginal
/// phi by iterative proportional fitting, independently of the variational
/// route.
pub fn singleton_rate_constrained<F: Scalar>(
    phi: &KTupleDistribution<F>,
    model: &MarkovModel<F>,
) -> Result<ConstrainedSolution<F>> {
    let n = check_inputs(phi, model)?;
    let support: Vec<usize> = (0..n).filter(|&i| phi.prob(i) > F::zero()).collect();
    let weights: Vec<F> = support.iter().map(|&i| phi.prob(i)).collect();
    let m = support.len();

    // target m_ij = phi_i a_ij on the support face
    let mut base = vec![F::zero(); m * m];
    for (local_i, &i) in support.iter().enumerate() {
        let row = model.row(i).expect("positive model has all rows");
        for (local_j, &j) in support.iter().enumerate() {
            base[local_i * m + local_j] = weights[local_i] * row[j];
        }
    }
    let fitted = fit_marginals(&base, &weights, "marginal fitting")?;
    let value = kl_to_base(&fitted.nu, &base);

    // independent decomposition check against mu itself
    let mut mu_base = vec![F::zero(); m * m];
    for (local_i, &i) in support.iter().enumerate() {
        for (local_j, &j) in support.iter().enumerate() {
            mu_base[local_i * m + local_j] = model.mu().prob(i * n + j);
        }
    }
    let mu_fit = fit_marginals(&mu_base, &weights, "decomposition fitting")?;
    let divergence_to_marginal = relative_entropy(phi, model.mu_bar())?;
    let decomposition_value = kl_to_base(&mu_fit.nu, &mu_base) - divergence_to_marginal;
    // two independent fitting runs agree to their own convergence scale,
    // not machine epsilon
    let identity_tolerance = real::<F>(1e-10).max(F::epsilon().sqrt());
    if (value - decomposition_value).abs() > identity_tolerance * value.abs().max(F::one()) {
        return Err(Error::CrossCheckFailed {
            what: "constrained rate decomposition",
            left: value.to_f64().unwrap_or(f64::NAN),
            right: decomposition_value.to_f64().unwrap_or(f64::NAN),
        });
    }

    let mut nu = vec![F::zero(); n * n];
    for (local_i, &i) in support.iter().enumerate() {
        for (local_j, &j) in support.iter().enumerate() {
            nu[i * n + j] = fitted.nu[local_i * m + local_j];
        }
    }
    Ok(ConstrainedSolution {
        value,
        nu: KTupleDistribution::new(n, 2, nu)?,
        decomposition_value,
        marginal_residual: fitted.residual,
        iterations: fitted.iterations,
    })
}

/// Both-coordinate expectation identity for stationary pair measures:
/// `sum_ij nu_ij c_i = sum_ij nu_ij c_j` (both reduce to the common
/// marginal expectation). Returns whether the two sums agree within the
/// stationarity-scale tolerance.
pub fn marginal_expectation_check<F: Scalar>(
    nu: &KTupleDistribution<F>,
    coefficients: &[F],
) -> Result<bool> {
    if nu.k() != 2 {
        return Err(Error::TupleTooShort {
            min: 2,
            got: nu.k(),
        });
    }
    let n = nu.n();
    if coefficients.len() != n {
        return Err(Error::LengthMismatch {
            n,
            k: 1,
            expected: n,
            got: coefficients.len(),
        });
    }
    let mut by_first = KahanSum::<F>::new();
    let mut by_second = KahanSum::<F>::new();
    for i in 0..n {
        for j in 0..n {
            let mass = nu.prob(i * n + j);
            by_first.add(mass * coefficients[i]);
            by_second.add(mass * coefficients[j]);
        }
    }
    let scale = coefficients
        .iter()
        .fold(F::one(), |acc, &c| acc.max(c.abs()));
    let tolerance = real::<F>(1e-12).max(F::epsilon() * real(64.0)) * scale;
    Ok((by_first.value() - by_second.value()).abs() <= tolerance)
}

fn check_inputs<F: Scalar>(phi: &KTupleDistribution<F>, model: &MarkovModel<F>) -> Result<usize> {
    if model.s() != 1 {
        return Err(Error::InvalidInput(format!(
            "contraction to singleton frequencies needs a one-step model, got s = {}",
            model.s()
        )));
    }
    if phi.k() != 1 || phi.n() != model.n() {
        return Err(Error::ShapeMismatch {
            n_left: model.n(),
            k_left: 1,
            n_right: phi.n(),
            k_right: phi.k(),
        });
    }
    model.require_strictly_positive()?;
    Ok(model.n())
}

/// Transition matrix restricted to the support rows/columns; transposed
/// when the row-vector action is wanted.
fn restricted_matrix<F: Scalar>(
    model: &MarkovModel<F>,
    support: &[usize],
    transpose: bool,
) -> Vec<Vec<F>> {
    support
        .iter()
        .map(|&i| {
            support
                .iter()
                .map(|&j| {
                    let (from, to) = if transpose { (j, i) } else { (i, j) };
                    model.row(from).expect("positive model has all rows")[to]
                })
                .collect()
        })
        .collect()
}

struct AscentOutcome<F> {
    u: Vec<F>,
    images: Vec<F>,
    value: F,
    residual: F,
    iterations: usize,
}

/// Damped Newton ascent of `f(w) = sum_i phi_i (w_i - ln (M e^w)_i)` with
/// the gauge w_1 = 0. Convergence is declared on the first-order residual
/// `phi - phi P` (P the softmax weights), which is exactly the gradient;
/// after crossing the declared tolerance a few polish steps push the
/// residual toward machine precision so downstream stationarity checks on
/// nu* hold.
fn maximize_log_ratio<F: Scalar>(
    phi: &[F],
    matrix: &[Vec<F>],
    what: &'static str,
) -> Result<AscentOutcome<F>> {
    let m = phi.len();
    let tolerance = real::<F>(1e-10).max(F::epsilon() * real(32.0));
    let polish_target = real::<F>(1e-14).max(F::epsilon() * real(4.0));
    let cap = 100_000usize;

    let mut w = vec![F::zero(); m];
    let mut u = vec![F::one(); m];
    let mut images = vec![F::zero(); m];
    let mut softmax = vec![F::zero(); m * m];
    let mut gradient = vec![F::zero(); m];

    let objective = |w: &[F]| -> F {
        let mut acc = F::zero();
        for i in 0..m {
            let mut image = F::zero();
            for j in 0..m {
                image = image + matrix[i][j] * w[j].exp();
            }
            acc = acc + phi[i] * (w[i] - image.ln());
        }
        acc
    };

    let mut iterations = 0usize;
    let mut polish_steps = 0usize;
    loop {
        for (slot, &wi) in u.iter_mut().zip(&w) {
            *slot = wi.exp();
        }
        for i in 0..m {
            let mut image = F::zero();
            for j in 0..m {
                image = image + matrix[i][j] * u[j];
            }
            images[i] = image;
            for j in 0..m {
                softmax[i * m + j] = matrix[i][j] * u[j] / image;
            }
        }
        let mut residual = F::zero();
        for k in 0..m {
            let mut pulled = F::zero();
            for i in 0..m {
                pulled = pulled + phi[i] * softmax[i * m + k];
            }
            gradient[k] = phi[k] - pulled;
            residual = residual.max(gradient[k].abs());
        }

        let converged = residual <= tolerance;
        if residual <= polish_target
            || (converged && polish_steps >= 3)
            || (converged && iterations >= cap)
        {
            let mut value = F::zero();
            for i in 0..m {
                if phi[i] > F::zero() {
                    value = value + phi[i] * (u[i] / images[i]).ln();
                }
            }
            return Ok(AscentOutcome {
                u,
                images,
                value,
                residual,
                iterations,
            });
        }
        if converged {
            polish_steps += 1;
        }
        if iterations >= cap {
            return Err(Error::NoConvergence {
                what,
                iterations,
                residual: residual.to_f64().unwrap_or(f64::NAN),
            });
        }

        // Newton direction on coordinates 1..m (gauge pins w_0)
        let direction = newton_direction(phi, &softmax, &gradient, m);
        let (direction, slope, newton) = match direction {
            Some(d) => {
                let slope: F = d
                    .iter()
                    .zip(&gradient)
                    .fold(F::zero(), |acc, (&di, &gi)| acc + di * gi);
                if slope > F::zero() {
                    (d, slope, true)
                } else {
                    let (d, slope) = gradient_direction(&gradient);
                    (d, slope, false)
                }
            }
            None => {
                let (d, slope) = gradient_direction(&gradient);
                (d, slope, false)
            }
        };

        // Inside the Newton basin the objective improvement (~residual^2)
        // drops below evaluation noise, so a line search would reject
        // genuine steps; take the full Newton step instead.
        let basin = real::<F>(1e-6).max(F::epsilon().sqrt());
        if newton && residual <= basin {
            for (wi, &di) in w.iter_mut().zip(&direction) {
                *wi = *wi + di;
            }
            let gauge = w[0];
            for wi in w.iter_mut() {
                *wi = *wi - gauge;
            }
            iterations += 1;
            continue;
        }

        let current = objective(&w);
        let mut step = F::one();
        let mut moved = false;
        for _ in 0..80 {
            let trial: Vec<F> = w
                .iter()
                .zip(&direction)
                .map(|(&wi, &di)| wi + step * di)
                .collect();
            if objective(&trial) >= current + real::<F>(0.25) * step * slope {
                w = trial;
                moved = true;
                break;
            }
            step = step * real::<F>(0.5);
        }
        if !moved {
            if residual <= tolerance {
                polish_steps = 3;
                continue;
            }
            return Err(Error::NoConvergence {
                what,
                iterations,
                residual: residual.to_f64().unwrap_or(f64::NAN),
            });
        }
        let gauge = w[0];
        for wi in w.iter_mut() {
            *wi = *wi - gauge;
        }
        iterations += 1;
    }
}

fn gradient_direction<F: Scalar>(gradient: &[F]) -> (Vec<F>, F) {
    let mut direction = gradient.to_vec();
    direction[0] = F::zero();
    let slope = direction
        .iter()
        .zip(gradient)
        .fold(F::zero(), |acc, (&d, &g)| acc + d * g);
    (direction, slope)
}

/// Solves the reduced Newton system `-H d = g` on coordinates 1..m, where
/// `H_kl = sum_i phi_i p_ik p_il - delta_kl sum_i phi_i p_ik`.
fn newton_direction<F: Scalar>(
    phi: &[F],
    softmax: &[F],
    gradient: &[F],
    m: usize,
) -> Option<Vec<F>> {
    if m <= 1 {
        return Some(vec![F::zero(); m]);
    }
    let r = m - 1;
    let mut system = vec![F::zero(); r * (r + 1)];
    for k in 1..m {
        let mut pulled_k = F::zero();
        for i in 0..m {
            pulled_k = pulled_k + phi[i] * softmax[i * m + k];
        }
        for l in 1..m {
            let mut cross = F::zero();
            for i in 0..m {
                cross = cross + phi[i] * softmax[i * m + k] * softmax[i * m + l];
            }
            let mut h = cross;
            if k == l {
                h = h - pulled_k;
            }
            // solve (-H) d = g so the system is positive semidefinite
            system[(k - 1) * (r + 1) + (l - 1)] = -h;
        }
        system[(k - 1) * (r + 1) + r] = gradient[k];
    }
    let solution = solve_dense(&mut system, r)?;
    let mut direction = vec![F::zero(); m];
    direction[1..].copy_from_slice(&solution);
    Some(direction)
}

/// Gaussian elimination with partial pivoting on an r x (r+1) augmented
/// system.
fn solve_dense<F: Scalar>(system: &mut [F], r: usize) -> Option<Vec<F>> {
    let cols = r + 1;
    for col in 0..r {
        let mut pivot = col;
        for row in col + 1..r {
            if system[row * cols + col].abs() > system[pivot * cols + col].abs() {
                pivot = row;
            }
        }
        if system[pivot * cols + col].abs() < real::<F>(1e-300).max(F::min_positive_value()) {
            return None;
        }
        if pivot != col {
            for c in 0..cols {
                system.swap(pivot * cols + c, col * cols + c);
            }
        }
        let lead = system[col * cols + col];
        for row in col + 1..r {
            let factor = system[row * cols + col] / lead;
            if factor == F::zero() {
                continue;
            }
            for c in col..cols {
                let upd = system[row * cols + c] - factor * system[col * cols + c];
                system[row * cols + c] = upd;
            }
        }
    }
    let mut solution = vec![F::zero(); r];
    for row in (0..r).rev() {
        let mut acc = system[row * cols + r];
        for c in row + 1..r {
            acc = acc - system[row * cols + c] * solution[c];
        }
        solution[row] = acc / system[row * cols + row];
    }
    Some(solution)
}

struct FittedMeasure<F> {
    nu: Vec<F>,
    residual: F,
    iterations: usize,
}

/// Iterative proportional fitting of `base` to row and column marginals
/// both equal to `weights`.
fn fit_marginals<F: Scalar>(
    base: &[F],
    weights: &[F],
    what: &'static str,
) -> Result<FittedMeasure<F>> {
    let m = weights.len();
    let tolerance = real::<F>(5e-14).max(F::epsilon() * real(8.0));
    let cap = 200_000usize;
    let mut total = F::zero();
    for &v in base {
        total = total + v;
    }
    let mut nu: Vec<F> = base.iter().map(|&v| v / total).collect();
    let mut residual = F::infinity();
    for iterations in 0..cap {
        // rows to weights
        for i in 0..m {
            let mut row_sum = F::zero();
            for j in 0..m {
                row_sum = row_sum + nu[i * m + j];
            }
            let factor = weights[i] / row_sum;
            for j in 0..m {
                nu[i * m + j] = nu[i * m + j] * factor;
            }
        }
        // columns to weights
        for j in 0..m {
            let mut col_sum = F::zero();
            for i in 0..m {
                col_sum = col_sum + nu[i * m + j];
            }
            let factor = weights[j] / col_sum;
            for i in 0..m {
                nu[i * m + j] = nu[i * m + j] * factor;
            }
        }
        // rows drifted by the column pass; measure the violation
        residual = F::zero();
        for i in 0..m {
            let mut row_sum = F::zero();
            for j in 0..m {
                row_sum = row_sum + nu[i * m + j];
            }
            residual = residual.max((row_sum - weights[i]).abs());
        }
        if residual <= tolerance {
            return Ok(FittedMeasure {
                nu,
                residual,
                iterations: iterations + 1,
            });
        }
    }
    Err(Error::NoConvergence {
        what,
        iterations: cap,
        residual: residual.to_f64().unwrap_or(f64::NAN),
    })
}

/// `sum nu ln(nu / base)` over the positive entries (compensated).
fn kl_to_base<F: Scalar>(nu: &[F], base: &[F]) -> F {
    let mut acc = KahanSum::<F>::new();
    for (&v, &b) in nu.iter().zip(base) {
        if v > F::zero() {
            acc.add(v * (v / b).ln());
        }
    }
    acc.value()
}
