#include "cce/shooter.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <random>
#include <thread>

namespace cce {

namespace {

Eigen::Vector3d penalty(double depth) {
  const double v = kPenalty * (1.0 + std::fabs(depth));
  return {v, v, v};
}

struct StartStates {
  BergerState forward;
  BergerState backward;
};

StartStates start_states(double phi0, const ShootingParams& p, const ShooterOptions& opt) {
  const Jet b = berger_boundary_jet_unchecked({phi0, p.K0, p.a}, opt.jet_order);
  const Jet c = berger_center_jet(p.q, opt.jet_order);
  const JetValue vb = eval_jet(b, opt.eps);
  const JetValue vc = eval_jet(c, 1.0 - opt.eps);
  return {{opt.eps, vb.y1, vb.y2, vb.dy2}, {1.0 - opt.eps, vc.y1, vc.y2, vc.dy2}};
}

FlowOptions flow_options(const ShooterOptions& opt, int n_out) {
  FlowOptions fo;
  fo.rtol = opt.rtol;
  fo.atol = opt.atol;
  fo.n_out = n_out;
  return fo;
}

Eigen::Vector3d residual_at(double phi0, const Eigen::Vector3d& v, const ShooterOptions& opt,
                            double xm) {
  if (!v.allFinite()) return penalty(1.0);
  if (!(v(0) > 0.0)) return penalty(1.0 + std::fabs(v(0)));
  try {
    const StartStates s = start_states(phi0, ShootingParams::from(v), opt);
    const FlowOptions fo = flow_options(opt, 2);
    const Segment f = integrate(s.forward, xm, fo);
    const Segment b = integrate(s.backward, xm, fo);
    const Eigen::Vector3d r(f.end.y1 - b.end.y1, f.end.y2 - b.end.y2, f.end.w - b.end.w);
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
  Eigen::Vector3d p;
  Eigen::Vector3d r;
  int iterations = 0;
  bool converged = false;
};

NewtonResult newton(double phi0, Eigen::Vector3d p, const ShooterOptions& opt, double xm,
                    double tol) {
  auto F = [&](const Eigen::Vector3d& v) { return residual_at(phi0, v, opt, xm); };
  NewtonResult out;
  Eigen::Vector3d r = F(p);

  // Feasibility restoration: pull the nonlocal and center parameters toward
  // the hyperbolic values (and K0 toward 1 now and then) until both legs reach
  // the match point.
  for (int k = 0; k < 60 && is_penalty(r); ++k) {
    p(1) *= 0.5;
    p(2) *= 0.5;
    if (k % 4 == 3) p(0) = 0.5 * (p(0) + 1.0);
    r = F(p);
  }
  out.p = p;
  out.r = r;
  if (is_penalty(r)) return out;

  auto sup = [](const Eigen::Vector3d& v) { return v.lpNorm<Eigen::Infinity>(); };
  int polish = 0;
  for (int it = 0; it < opt.max_iter; ++it) {
    if (sup(r) < tol) {
      out.converged = true;
      if (polish++ >= 2 || sup(r) == 0.0) break;
    }
    Eigen::Matrix3d J;
    bool ok = true;
    for (int j = 0; j < 3 && ok; ++j) {
      const double h = opt.fd_step * std::max(1.0, std::fabs(p(j)));
      Eigen::Vector3d pj = p;
      pj(j) += h;
      Eigen::Vector3d rj = F(pj);
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
    const Eigen::Vector3d d = J.colPivHouseholderQr().solve(-r);
    if (!d.allFinite()) break;

    const double f0 = r.squaredNorm();
    double lambda = 1.0;
    // keep K0 positive
    if (p(0) + d(0) <= 0.0) lambda = 0.5 * p(0) / std::fabs(d(0));
    bool accepted = false;
    Eigen::Vector3d best_p = p, best_r = r;
    for (int k = 0; k <= opt.max_halvings; ++k, lambda *= 0.5) {
      const Eigen::Vector3d pt = p + lambda * d;
      const Eigen::Vector3d rt = F(pt);
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
    if (!accepted) {
      // a polishing step that no longer decreases the merit ends the iteration
      if (out.converged) break;
      if (best_r.squaredNorm() >= f0) break;
    }
    p = best_p;
    r = best_r;
    out.p = p;
    out.r = r;
  }
  out.converged = sup(out.r) < tol;
  return out;
}

// Staged Newton: each earlier match point is solved loosely, the last one to
// opt.tol.
NewtonResult solve_params(double phi0, const Eigen::Vector3d& guess, const ShooterOptions& opt) {
  Eigen::Vector3d p = guess;
  int iters = 0;
  for (double xm : opt.match_stages) {
    if (!(xm < opt.x_match)) continue;
    const NewtonResult s = newton(phi0, p, opt, xm, opt.stage_tol);
    iters += s.iterations;
    if (!is_penalty(s.r)) p = s.p;
  }
  NewtonResult f = newton(phi0, p, opt, opt.x_match, opt.tol);
  f.iterations += iters;
  return f;
}

BvpSolution finish(double phi0, const NewtonResult& n, const ShooterOptions& opt) {
  BvpSolution s;
  s.phi0 = phi0;
  s.params = ShootingParams::from(n.p);
  s.match_defect = n.r.lpNorm<Eigen::Infinity>();
  s.iterations = n.iterations;
  s.profile = shooting_profile(phi0, s.params, opt);
  return s;
}

struct Anchor {
  double phi0;
  Eigen::Vector3d p;
};

// Walks from the last anchor to target with steps of at most max_step,
// extrapolating linearly from the last two anchors; halves the step on
// failure. Appends the converged points to hist.
NewtonResult continue_to(double target, std::vector<Anchor>& hist, const ShooterOptions& opt,
                         double max_step) {
  constexpr double kMinStep = 1e-3;
  double step = max_step;
  NewtonResult last;
  last.p = hist.back().p;
  last.r.setZero();
  last.converged = true;
  while (hist.back().phi0 != target) {
    const Anchor& a = hist.back();
    const double dir = target > a.phi0 ? 1.0 : -1.0;
    double next = a.phi0 + dir * step;
    if (dir * (next - target) >= 0.0 || std::fabs(next - target) < 0.1 * step) next = target;
    Eigen::Vector3d guess = a.p;
    if (hist.size() >= 2) {
      const Anchor& b = hist[hist.size() - 2];
      if (a.phi0 != b.phi0) guess = a.p + (next - a.phi0) / (a.phi0 - b.phi0) * (a.p - b.p);
    }
    NewtonResult r = solve_params(next, guess, opt);
    if (r.converged) {
      hist.push_back({next, r.p});
      last = r;
      step = std::min(max_step, 2.0 * step);
    } else {
      step *= 0.5;
      if (step < kMinStep) {
        last = r;
        last.converged = false;
        return last;
      }
    }
  }
  return last;
}

}  // namespace

bool is_penalty(const Eigen::Vector3d& r) { return !(std::fabs(r(0)) < kPenalty); }

Eigen::Vector3d shooting_residual(double phi0, const ShootingParams& p,
                                  const ShooterOptions& opt) {
  return residual_at(phi0, p.vec(), opt, opt.x_match);
}

SolutionProfile shooting_profile(double phi0, const ShootingParams& p, const ShooterOptions& opt) {
  const StartStates s = start_states(phi0, p, opt);
  FlowOptions fo = flow_options(opt, opt.n_out);
  fo.graded = true;
  const Segment f = integrate(s.forward, opt.x_match, fo, 0);
  const Segment b = integrate(s.backward, opt.x_match, fo, 1);
  SolutionProfile prof;
  prof.params = {phi0, p.K0, p.a};
  prof.q = p.q;
  prof.eps = opt.eps;
  prof.samples = f.samples;
  // backward leg runs 1-eps -> x_match; append it reversed without the
  // duplicated match point
  for (auto it = b.samples.rbegin() + 1; it != b.samples.rend(); ++it) prof.samples.push_back(*it);
  prof.max_abs_phi = std::max(f.max_abs_phi, b.max_abs_phi);
  return prof;
}

BvpSolution solve(double phi0, const ShootingParams& guess, const ShooterOptions& opt) {
  const NewtonResult n = solve_params(phi0, guess.vec(), opt);
  if (!n.converged) {
    BvpSolution best;
    best.phi0 = phi0;
    best.params = ShootingParams::from(n.p);
    best.match_defect = n.r.lpNorm<Eigen::Infinity>();
    best.iterations = n.iterations;
    throw SolveError("shooting did not converge for phi0=" + std::to_string(phi0) +
                         " (defect " + std::to_string(best.match_defect) + ")",
                     best);
  }
  return finish(phi0, n, opt);
}

BvpSolution solve_continued(double phi0, const ShooterOptions& opt, double max_step) {
  std::vector<Anchor> hist{{1.0, Eigen::Vector3d(1.0, 0.0, 0.0)}};
  NewtonResult n = continue_to(phi0, hist, opt, max_step);
  if (phi0 == 1.0) n = solve_params(1.0, hist.back().p, opt);
  if (!n.converged) {
    BvpSolution best;
    best.phi0 = phi0;
    best.params = ShootingParams::from(n.p);
    best.match_defect = n.r.lpNorm<Eigen::Infinity>();
    throw SolveError("continuation did not reach phi0=" + std::to_string(phi0), best);
  }
  return finish(phi0, n, opt);
}

std::vector<ScanRow> continuation_scan(const std::vector<double>& grid, const ShooterOptions& opt,
                                       double max_step) {
  std::vector<ScanRow> rows(grid.size());
  std::vector<int> up, down;
  for (int i = 0; i < static_cast<int>(grid.size()); ++i) (grid[i] >= 1.0 ? up : down).push_back(i);
  std::stable_sort(up.begin(), up.end(), [&](int a, int b) { return grid[a] < grid[b]; });
  std::stable_sort(down.begin(), down.end(), [&](int a, int b) { return grid[a] > grid[b]; });

  auto branch = [&](const std::vector<int>& idx) {
    std::vector<Anchor> hist{{1.0, Eigen::Vector3d(1.0, 0.0, 0.0)}};
    for (int i : idx) {
      ScanRow& row = rows[i];
      row.phi0 = grid[i];
      std::vector<Anchor> trial = hist;
      NewtonResult n = continue_to(grid[i], trial, opt, max_step);
      if (grid[i] == 1.0) n = solve_params(1.0, trial.back().p, opt);
      row.params = ShootingParams::from(n.p);
      row.match_defect = n.r.lpNorm<Eigen::Infinity>();
      if (!n.converged) {
        row.message = "not converged";
        continue;
      }
      hist = std::move(trial);
      try {
        row.diagnostics = diagnostics(shooting_profile(grid[i], row.params, opt));
        row.converged = true;
      } catch (const std::exception& e) {
        row.message = e.what();
      }
    }
  };
  const std::vector<int>* branches[2] = {&up, &down};
  parallel_for(2, 2, [&](int b) { branch(*branches[b]); });
  return rows;
}

ProbeReport uniqueness_probe(double phi0, int n_starts, double spread, std::uint64_t seed,
                             const ShooterOptions& opt, unsigned workers) {
  if (n_starts < 1) throw DomainError("probe needs at least one start");
  ProbeReport rep;
  rep.phi0 = phi0;
  rep.seed = seed;
  rep.spread = spread;
  rep.starts.resize(n_starts);

  // Latin hypercube in the unit cube, mapped to the parameter box
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  std::vector<std::vector<double>> u(3, std::vector<double>(n_starts));
  for (int d = 0; d < 3; ++d) {
    std::vector<int> perm(n_starts);
    for (int i = 0; i < n_starts; ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);
    for (int i = 0; i < n_starts; ++i) u[d][i] = (perm[i] + U(rng)) / n_starts;
  }
  const double lb = std::min(k0_lower_bound(phi0), 0.99);
  const double k_lo = lb + 0.05 * (1.0 - lb), k_hi = 1.0 - 1e-3;
  for (int i = 0; i < n_starts; ++i) {
    ProbeStart& s = rep.starts[i];
    s.index = i;
    s.guess.K0 = k_lo + (k_hi - k_lo) * u[0][i];
    s.guess.a = spread * 10.0 * (2.0 * u[1][i] - 1.0);
    s.guess.q = spread * 2.0 * (2.0 * u[2][i] - 1.0);
  }

  parallel_for(n_starts, workers, [&](int i) {
    ProbeStart& s = rep.starts[i];
    const NewtonResult n = solve_params(phi0, s.guess.vec(), opt);
    s.converged = n.converged;
    s.result = ShootingParams::from(n.p);
    s.match_defect = n.r.lpNorm<Eigen::Infinity>();
  });

  for (ProbeStart& s : rep.starts) {
    if (!s.converged) continue;
    ++rep.converged;
    for (std::size_t c = 0; c < rep.clusters.size(); ++c) {
      if ((rep.clusters[c].vec() - s.result.vec()).lpNorm<Eigen::Infinity>() < kClusterRadius) {
        s.cluster = static_cast<int>(c);
        ++rep.cluster_sizes[c];
        break;
      }
    }
    if (s.cluster < 0) {
      s.cluster = static_cast<int>(rep.clusters.size());
      rep.clusters.push_back(s.result);
      rep.cluster_sizes.push_back(1);
    }
  }
  return rep;
}

void parallel_for(int n, unsigned workers, const std::function<void(int)>& f) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(std::max(n, 1)));
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) f(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex m;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          f(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(m);
          if (!error) error = std::current_exception();
        }
      }
    });
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace cce
