#include "rtfbeam/estimators.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>

#include "rtfbeam/rng.hpp"

namespace rtfbeam {

namespace {

void require_same_square(const CMat& a, const CMat& b, const char* who) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows())
    throw Error(ErrorCode::dimension_mismatch,
                std::string(who) + ": covariance sizes do not match");
}

void require_invertible(const CMat& R, double tol, ErrorCode code) {
  Eigen::SelfAdjointEigenSolver<CMat> eig(0.5 * (R + R.adjoint()),
                                          Eigen::EigenvaluesOnly);
  const RVec& lam = eig.eigenvalues();
  if (!(lam.minCoeff() > tol * std::max(lam.maxCoeff(), 0.0)))
    throw Error(code, "matrix is singular within tolerance");
}

// De-whitened principal eigenvector shared by CW and CWu.
RtfVector whiten_and_extract(const CMat& R_noisy, const CMat& R_white,
                             int reference_index, double tol) {
  require_same_square(R_noisy, R_white, "covariance whitening");
  require_invertible(R_white, tol, ErrorCode::singular_noise_covariance);

  const HermitianFactor f = hermitian_sqrt_factor(R_white, tol);
  // F^{-H} R F^{-1} with F^H F = R_white.
  CMat w = f.solve_right(f.solve_adjoint(R_noisy));
  w = 0.5 * (w + w.adjoint());
  const CVec p = principal_eigvec(w, tol);
  const CVec dewhitened = f.factor.adjoint() * p;
  return RtfVector::normalized(dewhitened, reference_index, tol);
}

// Shared geometry of the BOP objective: u = Pperp_theta g and the scalars
// the objective and gradient are built from.
struct BopTerms {
  CVec u;
  Complex c;   // theta^H g
  double rho;  // ||theta||^2
  double s;    // ||u||^2 = g^H Pperp g
  double n;    // u^H R u
};

BopTerms bop_terms(const CVec& theta, const CMat& R, const CVec& g) {
  const double rho = theta.squaredNorm();
  if (!(rho > kDefaultTol * kDefaultTol))
    throw Error(ErrorCode::zero_vector, "bop objective at theta = 0");
  BopTerms t;
  t.rho = rho;
  t.c = theta.dot(g);  // theta^H g
  t.u = g - theta * (t.c / rho);
  t.s = t.u.squaredNorm();
  if (!(t.s > kDefaultTol * g.squaredNorm()))
    throw Error(ErrorCode::collinear_vectors,
                "theta collinear with g; oblique projection undefined");
  t.n = std::real(t.u.dot(R * t.u));
  return t;
}

struct GdOutcome {
  CVec theta;
  double objective = std::numeric_limits<double>::infinity();
  bool converged = false;
  bool valid = false;
  int iterations = 0;
};

}  // namespace

RtfVector RtfVector::normalized(const CVec& v, int reference_index, double tol) {
  if (reference_index < 0 || reference_index >= v.size())
    throw Error(ErrorCode::dimension_mismatch, "reference index out of range");
  const Complex ref = v(reference_index);
  if (!(std::abs(ref) > tol * v.norm()))
    throw Error(ErrorCode::zero_reference_entry,
                "reference entry vanishes; RTF normalization undefined");
  RtfVector out;
  out.entries = v / ref;
  out.entries(reference_index) = Complex(1.0, 0.0);
  out.reference_index = reference_index;
  return out;
}

RtfVector cw_estimate(const CMat& R_y2, const CMat& R_n, int reference_index,
                      double tol) {
  return whiten_and_extract(R_y2, R_n, reference_index, tol);
}

RtfVector cwu_estimate(const CMat& R_y3, const CMat& R_v2, int reference_index,
                       double tol) {
  return whiten_and_extract(R_y3, R_v2, reference_index, tol);
}

double bop_objective(const CVec& theta, const CMat& R_y3, const RtfVector& g) {
  const BopTerms t = bop_terms(theta, R_y3, g.entries);
  return g.entries.squaredNorm() * t.n / (t.s * t.s);
}

Eigen::VectorXd bop_gradient(const CVec& theta, const CMat& R_y3,
                             const RtfVector& g) {
  const CVec& gv = g.entries;
  const BopTerms t = bop_terms(theta, R_y3, gv);
  const Eigen::Index m = theta.size();

  const CVec ru = R_y3 * t.u;                     // R u
  const Complex k = t.u.dot(R_y3 * theta);        // u^H R theta
  const double big_g = gv.squaredNorm();

  // Differential covectors: dN = 2 Re(aN dtheta + bN dtheta*), ds likewise.
  Eigen::RowVectorXcd a_n = (t.c * k / (t.rho * t.rho)) * theta.adjoint() -
                            (t.c / t.rho) * ru.adjoint();
  Eigen::RowVectorXcd b_n = -(k / t.rho) * gv.transpose() +
                            (t.c * k / (t.rho * t.rho)) * theta.transpose();
  Eigen::RowVectorXcd a_s = -(t.c / t.rho) * t.u.adjoint();

  const double s2 = t.s * t.s;
  Eigen::RowVectorXcd a_j = big_g * (a_n / s2 - 2.0 * t.n / (s2 * t.s) * a_s);
  Eigen::RowVectorXcd b_j = big_g * (b_n / s2);

  Eigen::VectorXd grad(2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    grad(i) = 2.0 * std::real(a_j(i) + b_j(i));
    grad(m + i) = -2.0 * std::imag(a_j(i) - b_j(i));
  }
  return grad;
}

namespace {

CVec real_to_complex(const Eigen::VectorXd& x) {
  const Eigen::Index m = x.size() / 2;
  CVec theta(m);
  for (Eigen::Index i = 0; i < m; ++i) theta(i) = Complex(x(i), x(m + i));
  return theta;
}

Eigen::VectorXd complex_to_real(const CVec& theta) {
  const Eigen::Index m = theta.size();
  Eigen::VectorXd x(2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    x(i) = theta(i).real();
    x(m + i) = theta(i).imag();
  }
  return x;
}

// Armijo backtracking descent on the 2M real coordinates of theta, with the
// iterate renormalized to unit norm (the objective only sees the direction).
GdOutcome descend(const CVec& start, const CMat& R, const RtfVector& g,
                  const BopOptions& opts) {
  GdOutcome out;
  auto safe_objective = [&](const CVec& theta, double& value) {
    try {
      value = bop_objective(theta, R, g);
      return true;
    } catch (const Error&) {
      return false;
    }
  };

  CVec theta = start / start.norm();
  double j_cur;
  if (!safe_objective(theta, j_cur)) return out;  // invalid start

  double step = 1.0;
  int it = 0;
  for (; it < opts.max_iterations; ++it) {
    const Eigen::VectorXd grad = bop_gradient(theta, R, g);
    const double gnorm = grad.norm();
    if (gnorm <= opts.gradient_tolerance) {
      out.converged = true;
      break;
    }

    Eigen::VectorXd x = complex_to_real(theta);
    bool moved = false;
    double alpha = std::min(step * 2.0, 1.0);
    for (int bt = 0; bt < 60; ++bt) {
      CVec cand = real_to_complex(x - alpha * grad);
      const double cn = cand.norm();
      if (cn > 0.0) {
        cand /= cn;
        double j_cand;
        if (safe_objective(cand, j_cand) &&
            j_cand <= j_cur - 1e-4 * alpha * gnorm * gnorm) {
          theta = std::move(cand);
          j_cur = j_cand;
          step = alpha;
          moved = true;
          break;
        }
      }
      alpha *= 0.5;
    }
    if (!moved) break;  // stalled; gradient test above decides convergence
  }
  out.theta = theta;
  out.objective = j_cur;
  out.valid = true;
  out.iterations = it;
  return out;
}

}  // namespace

BopResult bop_estimate(const CMat& R_y3, const RtfVector& g, int reference_index,
                       const BopOptions& opts) {
  if (R_y3.rows() != R_y3.cols() || R_y3.rows() != g.entries.size())
    throw Error(ErrorCode::dimension_mismatch, "bop_estimate: sizes do not match");
  if (R_y3.rows() < 2)
    throw Error(ErrorCode::insufficient_channels, "need at least 2 microphones");
  if (opts.max_iterations < 1 || !(opts.gradient_tolerance > 0.0))
    throw Error(ErrorCode::config_error, "invalid BOP options");

  // The objective is 1-homogeneous in the covariance; normalizing it makes
  // the gradient stopping threshold scale-free.
  const double scale = R_y3.norm();
  if (!(scale > 0.0))
    throw Error(ErrorCode::zero_matrix, "noisy covariance is zero");
  const CMat r = 0.5 * (R_y3 + R_y3.adjoint()) / scale;

  std::vector<CVec> starts;
  if (opts.initial_guess && opts.initial_guess->size() == R_y3.rows() &&
      opts.initial_guess->norm() > 0.0)
    starts.push_back(*opts.initial_guess);
  try {
    // Dominant direction of the covariance with g projected out.
    const CMat pg = residual_maker(g.entries);
    starts.push_back(principal_eigvec(CMat(pg * r * pg)));
  } catch (const Error&) {
    // fall through to random starts
  }
  Rng rng(derive_seed(opts.seed, 0x626f70));
  for (int k = 0; k < opts.restarts; ++k) starts.push_back(rng.cnormal_vec(r.rows()));

  GdOutcome best;
  for (const CVec& s : starts) {
    const GdOutcome o = descend(s, r, g, opts);
    if (o.valid && o.objective < best.objective) best = o;
  }
  if (!best.valid)
    throw Error(ErrorCode::collinear_with_interferer,
                "every start collapsed onto the span of g");

  BopResult result;
  result.estimate = RtfVector::normalized(best.theta, reference_index);
  result.converged = best.converged;
  result.objective = best.objective * scale;
  result.iterations = best.iterations;
  return result;
}

CbwSolution cbw_estimate(const CMat& R_y3, const CMat& R_n, const RtfVector& g,
                         int reference_index, double tol) {
  require_same_square(R_y3, R_n, "cbw_estimate");
  const Eigen::Index m = R_y3.rows();
  if (g.entries.size() != m)
    throw Error(ErrorCode::dimension_mismatch, "cbw_estimate: RTF size mismatch");
  if (m < 3)
    throw Error(ErrorCode::insufficient_channels,
                "CBW needs 2(M-1) >= M+1 equations, i.e. M >= 3");

  const CMat p_g = residual_maker(g.entries, tol);

  // Dimension-reduced blocking matrix: drop one column of Pperp_g. The first
  // M-1 columns are kept unless that selection is rank deficient (g close to
  // a standard basis vector), in which case the smallest-norm column goes.
  auto reduce = [&](Eigen::Index drop) {
    CMat red(m, m - 1);
    Eigen::Index j = 0;
    for (Eigen::Index col = 0; col < m; ++col)
      if (col != drop) red.col(j++) = p_g.col(col);
    return red;
  };
  auto condition_ok = [&](const CMat& red) {
    Eigen::JacobiSVD<CMat> svd(red);
    const RVec& s = svd.singularValues();
    return s(s.size() - 1) > 1e-8 * s(0);
  };
  CMat p_red = reduce(m - 1);
  if (!condition_ok(p_red)) {
    Eigen::Index smallest = 0;
    p_g.colwise().norm().minCoeff(&smallest);
    p_red = reduce(smallest);
    if (!condition_ok(p_red))
      throw Error(ErrorCode::rank_deficient_blocking,
                  "no column selection keeps the reduced blocking full rank");
  }

  // Whiten the blocked noise term and subtract the identity it turns into.
  const CMat blocked_noise_pinv = pseudo_inverse(CMat(R_n * p_red));
  const CMat r_w =
      blocked_noise_pinv * R_y3 * p_red - CMat::Identity(m - 1, m - 1);

  const SingularTriplet sv = principal_singular_pair(r_w, tol);

  CbwSolution sol;
  sol.q_left = sv.left;
  sol.q_right = sv.right;
  sol.rank1_ratio = rank1_defect(r_w);

  // Stacked system B h_tilde = [q_L; q_R alpha].
  CMat b(2 * (m - 1), m);
  b.topRows(m - 1) = blocked_noise_pinv;
  b.bottomRows(m - 1) = p_red.adjoint();
  const CMat b_pinv = pseudo_inverse(b);
  const CMat p_b = projection_complement(b);

  const CVec v_left = p_b.leftCols(m - 1) * sol.q_left;
  const CVec v_right = p_b.rightCols(m - 1) * sol.q_right;
  sol.alpha = -(pseudo_inverse(v_right) * v_left)(0, 0);

  CVec stacked(2 * (m - 1));
  stacked.head(m - 1) = sol.q_left;
  stacked.tail(m - 1) = sol.q_right * sol.alpha;
  sol.h_tilde = b_pinv * stacked;
  sol.estimate = RtfVector::normalized(sol.h_tilde, reference_index, tol);
  return sol;
}

}  // namespace rtfbeam
