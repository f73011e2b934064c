#include "cce/collocation.hpp"

#include <cmath>
#include <string>

#include "cce/berger_flow.hpp"
#include "cce/errors.hpp"

namespace cce {

std::vector<double> lobatto_nodes(int degree) {
  std::vector<double> t(degree + 1);
  for (int j = 0; j <= degree; ++j) t[j] = -std::cos(M_PI * j / degree);
  t[0] = -1.0;
  t[degree] = 1.0;
  if (degree % 2 == 0) t[degree / 2] = 0.0;
  return t;
}

Eigen::MatrixXd differentiation_matrix(const std::vector<double>& t) {
  const int n = static_cast<int>(t.size());
  std::vector<double> w(n, 1.0);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k)
      if (k != j) w[j] /= (t[j] - t[k]);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double diag = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      D(i, j) = (w[j] / w[i]) / (t[i] - t[j]);
      diag -= D(i, j);
    }
    D(i, i) = diag;
  }
  return D;
}

std::vector<double> element_breaks(int elements, double eps) {
  std::vector<double> b(elements + 1);
  for (int k = 0; k <= elements; ++k)
    b[k] = eps + (1.0 - 2.0 * eps) * 0.5 * (1.0 - std::cos(M_PI * k / elements));
  b[0] = eps;
  b[elements] = 1.0 - eps;
  return b;
}

namespace {

class Discretization {
 public:
  Discretization(int degree, int elements, const CollocationOptions& opt)
      : p_(degree), E_(elements), opt_(opt) {
    const std::vector<double> t = lobatto_nodes(degree);
    const Eigen::MatrixXd Dt = differentiation_matrix(t);
    const std::vector<double> br = element_breaks(elements, opt.eps);
    x_.resize(nodes());
    D_.resize(elements);
    for (int e = 0; e < elements; ++e) {
      const double h = br[e + 1] - br[e];
      D_[e] = (2.0 / h) * Dt;
      for (int i = 0; i <= degree; ++i) x_[idx(e, i)] = br[e] + 0.5 * h * (t[i] + 1.0);
      x_[idx(e, 0)] = br[e];
      x_[idx(e, degree)] = br[e + 1];
    }
  }

  int nodes() const { return E_ * (p_ + 1); }
  int size() const { return 2 * nodes() + 3; }
  int idx(int e, int i) const { return e * (p_ + 1) + i; }

  // Unknown vector: y1 at all nodes, y2 at all nodes, then K0, a, q.
  // Returns false when the y1' branch is undefined somewhere.
  bool residual(double phi0, const Eigen::VectorXd& U, Eigen::VectorXd& F) const {
    const int n = nodes(), p = p_;
    F.resize(size());
    const double K0 = U(2 * n), a = U(2 * n + 1), q = U(2 * n + 2);
    if (!(K0 > 0.0)) return false;
    const Jet jb = berger_boundary_jet_unchecked({phi0, K0, a}, opt_.jet_order);
    const Jet jc = berger_center_jet(q, opt_.jet_order);
    const JetValue vb = eval_jet(jb, opt_.eps);
    const JetValue vc = eval_jet(jc, 1.0 - opt_.eps);

    int row = 0;
    Eigen::VectorXd y1(p + 1), y2(p + 1), d1(p + 1), d2(p + 1), dd2(p + 1);
    Eigen::VectorXd prev_d2;
    try {
      for (int e = 0; e < E_; ++e) {
        y1 = U.segment(idx(e, 0), p + 1);
        y2 = U.segment(n + idx(e, 0), p + 1);
        d1 = D_[e] * y1;
        d2 = D_[e] * y2;
        dd2 = D_[e] * d2;
        if (e == 0) {
          F(row++) = y1(0) - vb.y1;
          F(row++) = y2(0) - vb.y2;
          F(row++) = d2(0) - vb.dy2;
        } else {
          F(row++) = y1(0) - U(idx(e - 1, p));
          F(row++) = y2(0) - U(n + idx(e - 1, p));
          F(row++) = d2(0) - prev_d2(p);
        }
        for (int i = 1; i <= p; ++i) {
          const double x = x_[idx(e, i)];
          F(row++) = d1(i) - y1prime_algebraic(x, y1(i), y2(i), d2(i));
        }
        for (int i = 1; i < p; ++i) {
          const double x = x_[idx(e, i)];
          const auto r = full_residuals(x, y1(i), d1(i), 0.0, y2(i), d2(i), dd2(i));
          F(row++) = x * (1.0 - x * x) * r[2];
        }
        prev_d2 = d2;
      }
    } catch (const BranchDomainError&) {
      return false;
    }
    F(row++) = U(idx(E_ - 1, p)) - vc.y1;
    F(row++) = U(n + idx(E_ - 1, p)) - vc.y2;
    F(row++) = prev_d2(p) - vc.dy2;
    return F.allFinite();
  }

  SolutionProfile profile(double phi0, const Eigen::VectorXd& U) const {
    const int n = nodes(), p = p_;
    SolutionProfile prof;
    prof.params = {phi0, U(2 * n), U(2 * n + 1)};
    prof.q = U(2 * n + 2);
    prof.eps = opt_.eps;
    for (int e = 0; e < E_; ++e) {
      const Eigen::VectorXd y1 = U.segment(idx(e, 0), p + 1);
      const Eigen::VectorXd y2 = U.segment(n + idx(e, 0), p + 1);
      const Eigen::VectorXd d1 = D_[e] * y1, d2 = D_[e] * y2;
      const Eigen::VectorXd dd1 = D_[e] * d1, dd2 = D_[e] * d2;
      for (int i = (e == 0 ? 0 : 1); i <= p; ++i) {
        ProfileSample s;
        s.x = x_[idx(e, i)];
        s.y1 = y1(i);
        s.y2 = y2(i);
        s.w = d2(i);
        s.dy1 = d1(i);
        s.dw = dd2(i);
        s.d2y1 = dd1(i);
        s.segment = e;
        prof.samples.push_back(s);
        prof.max_abs_phi = std::max(
            prof.max_abs_phi, std::fabs(constraint_phi(s.x, s.y1, s.dy1, s.y2, s.w)));
      }
    }
    return prof;
  }

 private:
  int p_, E_;
  CollocationOptions opt_;
  std::vector<double> x_;
  std::vector<Eigen::MatrixXd> D_;
};

double sup(const Eigen::VectorXd& v) { return v.lpNorm<Eigen::Infinity>(); }

// Damped Newton with a forward-difference Jacobian; returns the final
// residual norm (infinite when the start is outside the branch domain).
double newton(const Discretization& d, double phi0, Eigen::VectorXd& U,
              const CollocationOptions& opt, int& iterations) {
  Eigen::VectorXd F, Ft;
  if (!d.residual(phi0, U, F)) return INFINITY;
  const int N = d.size();
  Eigen::MatrixXd J(N, N);
  int polish = 0;
  for (int it = 0; it < opt.max_iter; ++it) {
    if (sup(F) < opt.tol && (polish++ >= 1 || sup(F) == 0.0)) break;
    for (int j = 0; j < N; ++j) {
      const double h = opt.fd_step * std::max(1.0, std::fabs(U(j)));
      Eigen::VectorXd Uj = U;
      Uj(j) += h;
      if (d.residual(phi0, Uj, Ft)) {
        J.col(j) = (Ft - F) / h;
      } else {
        Uj(j) = U(j) - h;
        if (!d.residual(phi0, Uj, Ft)) return sup(F);
        J.col(j) = (F - Ft) / h;
      }
    }
    const Eigen::VectorXd dU = J.partialPivLu().solve(-F);
    if (!dU.allFinite()) break;
    const double f0 = F.squaredNorm();
    double lambda = 1.0;
    bool accepted = false;
    for (int k = 0; k <= 20; ++k, lambda *= 0.5) {
      const Eigen::VectorXd Ut = U + lambda * dU;
      if (d.residual(phi0, Ut, Ft) && Ft.squaredNorm() <= (1.0 - 1e-4 * lambda) * f0) {
        U = Ut;
        F = Ft;
        accepted = true;
        break;
      }
    }
    ++iterations;
    if (!accepted) break;
  }
  return sup(F);
}

}  // namespace

BvpSolution collocation_oracle(double phi0, int degree, int grid_size,
                               const CollocationOptions& opt) {
  if (degree < 8) throw DomainError("collocation degree must be at least 8");
  if (grid_size < 1) throw DomainError("collocation needs at least one element");
  if (!(phi0 > 0.0)) throw DomainError("phi0 must be positive");
  const Discretization d(degree, grid_size, opt);
  const int n = d.nodes();

  // hyperbolic start, then continuation in phi0
  Eigen::VectorXd U = Eigen::VectorXd::Zero(d.size());
  U(2 * n) = 1.0;
  const int steps = std::max(1, static_cast<int>(std::ceil(std::fabs(phi0 - 1.0) / opt.max_step)));
  Eigen::VectorXd prev = U;
  double defect = 0.0;
  int iterations = 0;
  for (int k = 1; k <= steps; ++k) {
    const double phi = 1.0 + (phi0 - 1.0) * k / steps;
    // equal steps: linear extrapolation from the last two solutions
    Eigen::VectorXd trial = k >= 2 ? Eigen::VectorXd(2.0 * U - prev) : U;
    defect = newton(d, phi, trial, opt, iterations);
    if (!(defect < opt.tol)) {
      trial = U;
      defect = newton(d, phi, trial, opt, iterations);
    }
    if (!(defect < opt.tol))
      throw ConvergenceError("collocation did not converge at phi0=" + std::to_string(phi) +
                             " (defect " + std::to_string(defect) + ")");
    prev = U;
    U = trial;
  }

  BvpSolution s;
  s.phi0 = phi0;
  s.params = {U(2 * n), U(2 * n + 1), U(2 * n + 2)};
  s.match_defect = defect;
  s.oracle_defect = defect;
  s.iterations = iterations;
  s.profile = d.profile(phi0, U);
  return s;
}

}  // namespace cce
