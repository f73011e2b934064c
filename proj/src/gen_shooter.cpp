#include "cce/gen_shooter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cce {

Vector5d GenShootingParams::vec() const {
  Vector5d v;
  v << K0, a2, a3, q2, q3;
  return v;
}

GenShootingParams GenShootingParams::from(const Vector5d& v) { return {v(0), v(1), v(2), v(3), v(4)}; }

bool is_penalty(const Vector5d& r) { return !(std::fabs(r(0)) < kPenalty); }

namespace {

Vector5d penalty(double depth) { return Vector5d::Constant(kPenalty * (1.0 + std::fabs(depth))); }

struct GenStarts {
  GenBergerState forward, backward;
};

GenStarts start_states(double phi1_0, double phi2_0, const GenShootingParams& p,
                       const ShooterOptions& opt) {
  const Jet b = gen_boundary_jet_unchecked({phi1_0, phi2_0, p.K0, p.a2, p.a3}, opt.jet_order);
  const Jet c = gen_center_jet(p.q2, p.q3, opt.jet_order);
  const JetValue vb = eval_jet(b, opt.eps);
  const JetValue vc = eval_jet(c, 1.0 - opt.eps);
  return {{opt.eps, vb.y1, vb.y2, vb.y3, vb.dy2, vb.dy3},
          {1.0 - opt.eps, vc.y1, vc.y2, vc.y3, vc.dy2, vc.dy3}};
}

FlowOptions flow_options(const ShooterOptions& opt, int n_out) {
  FlowOptions fo;
  fo.rtol = opt.rtol;
  fo.atol = opt.atol;
  fo.n_out = n_out;
  return fo;
}

Vector5d residual_at(double phi1_0, double phi2_0, const Vector5d& v, const ShooterOptions& opt,
                     double xm) {
  if (!v.allFinite()) return penalty(1.0);
  if (!(v(0) > 0.0)) return penalty(1.0 + std::fabs(v(0)));
  try {
    const GenStarts s = start_states(phi1_0, phi2_0, GenShootingParams::from(v), opt);
    const FlowOptions fo = flow_options(opt, 2);
    const GenBergerState f = gen_integrate(s.forward, xm, fo).end;
    const GenBergerState b = gen_integrate(s.backward, xm, fo).end;
    Vector5d r;
    r << f.y1 - b.y1, f.y2 - b.y2, f.y3 - b.y3, f.w2 - b.w2, f.w3 - b.w3;
    if (!r.allFinite()) return penalty(1.0);
    return r;
  } catch (const BranchDomainError& e) {
    return penalty(e.radicand());
  } catch (const StiffnessError&) {
    return penalty(1.0);
  } catch (const DomainError&) {
    return penalty(1.0);
  }
}

struct NewtonResult {
  Vector5d p, r;
  int iterations = 0;
  bool converged = false;
};

double sup(const Vector5d& v) { return v.lpNorm<Eigen::Infinity>(); }

NewtonResult newton(double phi1_0, double phi2_0, Vector5d p, const ShooterOptions& opt,
                    double xm, double tol) {
  auto F = [&](const Vector5d& v) { return residual_at(phi1_0, phi2_0, v, opt, xm); };
  NewtonResult out;
  Vector5d r = F(p);
  // feasibility restoration toward the hyperbolic parameters
  for (int k = 0; k < 60 && is_penalty(r); ++k) {
    p.tail<4>() *= 0.5;
    if (k % 4 == 3) p(0) = 0.5 * (p(0) + 1.0);
    r = F(p);
  }
  out.p = p;
  out.r = r;
  if (is_penalty(r)) return out;

  int polish = 0;
  for (int it = 0; it < opt.max_iter; ++it) {
    if (sup(r) < tol) {
      out.converged = true;
      if (polish++ >= 2 || sup(r) == 0.0) break;
    }
    Eigen::Matrix<double, 5, 5> J;
    bool ok = true;
    for (int j = 0; j < 5 && ok; ++j) {
      const double h = opt.fd_step * std::max(1.0, std::fabs(p(j)));
      Vector5d pj = p;
      pj(j) += h;
      Vector5d rj = F(pj);
      if (is_penalty(rj)) {
        pj(j) = p(j) - h;
        rj = F(pj);
        if (is_penalty(rj)) ok = false;
        J.col(j) = (r - rj) / h;
      } else {
        J.col(j) = (rj - r) / h;
      }
    }
    if (!ok) break;
    const Vector5d d = J.colPivHouseholderQr().solve(-r);
    if (!d.allFinite()) break;

    const double f0 = r.squaredNorm();
    double lambda = 1.0;
    if (p(0) + d(0) <= 0.0) lambda = 0.5 * p(0) / std::fabs(d(0));
    bool accepted = false;
    Vector5d best_p = p, best_r = r;
    for (int k = 0; k <= opt.max_halvings; ++k, lambda *= 0.5) {
      const Vector5d pt = p + lambda * d;
      const Vector5d rt = F(pt);
      const double ft = rt.squaredNorm();
      if (ft < best_r.squaredNorm()) {
        best_p = pt;
        best_r = rt;
      }
      if (ft <= (1.0 - 1e-4 * lambda) * f0) {
        accepted = true;
        break;
      }
    }
    ++out.iterations;
    if (!accepted && (out.converged || best_r.squaredNorm() >= f0)) break;
    p = best_p;
    r = best_r;
    out.p = p;
    out.r = r;
  }
  out.converged = sup(out.r) < tol;
  return out;
}

NewtonResult solve_params(double phi1_0, double phi2_0, const Vector5d& guess,
                          const ShooterOptions& opt) {
  Vector5d p = guess;
  int iters = 0;
  for (double xm : opt.match_stages) {
    if (!(xm < opt.x_match)) continue;
    const NewtonResult s = newton(phi1_0, phi2_0, p, opt, xm, opt.stage_tol);
    iters += s.iterations;
    if (!is_penalty(s.r)) p = s.p;
  }
  NewtonResult f = newton(phi1_0, phi2_0, p, opt, opt.x_match, opt.tol);
  f.iterations += iters;
  return f;
}

GenBvpSolution finish(double phi1_0, double phi2_0, const NewtonResult& n,
                      const ShooterOptions& opt) {
  GenBvpSolution s;
  s.phi1_0 = phi1_0;
  s.phi2_0 = phi2_0;
  s.params = GenShootingParams::from(n.p);
  s.match_defect = sup(n.r);
  s.iterations = n.iterations;
  s.profile = gen_shooting_profile(phi1_0, phi2_0, s.params, opt);
  return s;
}

}  // namespace

Vector5d gen_shooting_residual(double phi1_0, double phi2_0, const GenShootingParams& p,
                               const ShooterOptions& opt) {
  return residual_at(phi1_0, phi2_0, p.vec(), opt, opt.x_match);
}

GenSolutionProfile gen_shooting_profile(double phi1_0, double phi2_0, const GenShootingParams& p,
                                        const ShooterOptions& opt) {
  const GenStarts s = start_states(phi1_0, phi2_0, p, opt);
  FlowOptions fo = flow_options(opt, opt.n_out);
  fo.graded = true;
  const GenSegment f = gen_integrate(s.forward, opt.x_match, fo, 0);
  const GenSegment b = gen_integrate(s.backward, opt.x_match, fo, 1);
  GenSolutionProfile prof;
  prof.bd = {phi1_0, phi2_0, p.K0, p.a2, p.a3};
  prof.q2 = p.q2;
  prof.q3 = p.q3;
  prof.eps = opt.eps;
  prof.samples = f.samples;
  for (auto it = b.samples.rbegin() + 1; it != b.samples.rend(); ++it) prof.samples.push_back(*it);
  prof.max_abs_phi = std::max(f.max_abs_phi, b.max_abs_phi);
  return prof;
}

GenBvpSolution gen_solve(double phi1_0, double phi2_0, const GenShootingParams& guess,
                         const ShooterOptions& opt) {
  const NewtonResult n = solve_params(phi1_0, phi2_0, guess.vec(), opt);
  if (!n.converged)
    throw ConvergenceError("generalized shooting did not converge for (phi1_0, phi2_0)=(" +
                           std::to_string(phi1_0) + ", " + std::to_string(phi2_0) +
                           ") (defect " + std::to_string(sup(n.r)) + ")");
  return finish(phi1_0, phi2_0, n, opt);
}

GenBvpSolution gen_solve_continued(double phi1_0, double phi2_0, const ShooterOptions& opt,
                                   double max_step) {
  if (!(phi1_0 > 0.0 && phi2_0 > 0.0)) throw DomainError("phi1_0 and phi2_0 must be positive");
  const double l1 = std::log(phi1_0), l2 = std::log(phi2_0);
  const double span = std::max(std::fabs(l1), std::fabs(l2));
  auto at = [&](double t) { return std::pair<double, double>{std::exp(t * l1), std::exp(t * l2)}; };
  Vector5d p0;
  p0 << 1.0, 0.0, 0.0, 0.0, 0.0;
  if (span == 0.0) {
    const NewtonResult n = solve_params(1.0, 1.0, p0, opt);
    return finish(phi1_0, phi2_0, n, opt);
  }
  constexpr double kMinStep = 1e-3;
  const double dt_max = std::min(1.0, max_step / span);
  std::vector<std::pair<double, Vector5d>> hist{{0.0, p0}};
  double dt = dt_max;
  NewtonResult last;
  while (hist.back().first < 1.0) {
    const auto& [t0, pa] = hist.back();
    double t = std::min(1.0, t0 + dt);
    if (1.0 - t < 0.1 * dt) t = 1.0;
    Vector5d guess = pa;
    if (hist.size() >= 2) {
      const auto& [tb, pb] = hist[hist.size() - 2];
      guess = pa + (t - t0) / (t0 - tb) * (pa - pb);
    }
    const auto [f1, f2] = at(t);
    NewtonResult r = solve_params(t == 1.0 ? phi1_0 : f1, t == 1.0 ? phi2_0 : f2, guess, opt);
    if (r.converged) {
      hist.emplace_back(t, r.p);
      last = r;
      dt = std::min(dt_max, 2.0 * dt);
    } else {
      dt *= 0.5;
      if (dt * span < kMinStep)
        throw ConvergenceError("generalized continuation stalled at t=" + std::to_string(t0) +
                               " (defect " + std::to_string(sup(r.r)) + ")");
    }
  }
  return finish(phi1_0, phi2_0, last, opt);
}

std::vector<std::array<double, 5>> gen_fd_residuals(const GenSolutionProfile& p) {
  const auto& s = p.samples;
  std::vector<std::array<double, 5>> out(s.size());
  std::size_t begin = 0;
  while (begin < s.size()) {
    std::size_t end = begin;
    while (end < s.size() && s[end].segment == s[begin].segment) ++end;
    if (end - begin < 7) {
      for (std::size_t i = begin; i < end; ++i) out[i].fill(std::numeric_limits<double>::quiet_NaN());
    } else {
      std::vector<double> xs, y1, y2, y3;
      for (std::size_t i = begin; i < end; ++i) {
        xs.push_back(s[i].x);
        y1.push_back(s[i].y1);
        y2.push_back(s[i].y2);
        y3.push_back(s[i].y3);
      }
      std::vector<double> d1, dd1, d2, dd2, d3, dd3;
      finite_difference_derivatives(xs, y1, d1, dd1);
      finite_difference_derivatives(xs, y2, d2, dd2);
      finite_difference_derivatives(xs, y3, d3, dd3);
      for (std::size_t i = 0; i < xs.size(); ++i)
        out[begin + i] = residuals_gen(xs[i], y1[i], d1[i], dd1[i], y2[i], d2[i], dd2[i], y3[i],
                                       d3[i], dd3[i]);
    }
    begin = end;
  }
  return out;
}

GenDiagnostics gen_diagnostics(const GenSolutionProfile& p) {
  GenDiagnostics d;
  d.samples = static_cast<int>(p.samples.size());
  for (const auto& q : p.samples) {
    d.max_abs_phi = std::max(d.max_abs_phi, std::fabs(gen_constraint_phi(q.x, q.y1, q.dy1, q.y2,
                                                                        q.y3, q.w2, q.w3)));
    d.max_abs_y3 = std::max(d.max_abs_y3, std::fabs(q.y3));
    const auto r = residuals_gen(q.x, q.y1, q.dy1, q.d2y1, q.y2, q.w2, q.dw2, q.y3, q.w3, q.dw3);
    for (double v : r) d.max_closure_residual = std::max(d.max_closure_residual, std::fabs(v));
  }
  for (const auto& r : gen_fd_residuals(p))
    for (double v : r)
      if (!std::isnan(v)) d.max_residual = std::max(d.max_residual, std::fabs(v));
  return d;
}

}  // namespace cce
