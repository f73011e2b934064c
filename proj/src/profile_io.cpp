#include "cce/profile_io.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "cce/errors.hpp"

namespace cce {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

int CsvTable::column(const std::string& name) const {
  const auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DomainError("missing column '" + name + "'");
  return static_cast<int>(it - header.begin());
}

std::vector<double> CsvTable::values(const std::string& name) const {
  const int c = column(name);
  std::vector<double> v;
  v.reserve(rows.size());
  for (const auto& r : rows) v.push_back(r[c]);
  return v;
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError(path + ": cannot open");
  CsvTable t;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    const auto cells = split(line);
    if (t.header.empty()) {
      t.header = cells;
      for (const auto& h : t.header)
        if (h.empty()) throw DomainError(path + ":" + std::to_string(lineno) + ": empty column name");
      continue;
    }
    if (cells.size() != t.header.size())
      throw DomainError(path + ":" + std::to_string(lineno) + ": expected " +
                        std::to_string(t.header.size()) + " fields, found " +
                        std::to_string(cells.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      char* end = nullptr;
      errno = 0;
      const double v = std::strtod(c.c_str(), &end);
      if (c.empty() || end != c.c_str() + c.size() || errno == ERANGE)
        throw DomainError(path + ":" + std::to_string(lineno) + ": not a number: '" + c + "'");
      row.push_back(v);
    }
    t.rows.push_back(std::move(row));
    t.lines.push_back(lineno);
  }
  if (t.header.empty()) throw DomainError(path + ": empty file");
  return t;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_profile_csv(const std::string& path, const SolutionProfile& p) {
  std::ofstream out(path);
  if (!out) throw DomainError(path + ": cannot write");
  out << "x,r,y1,y2,dy2,K,phi,I1,I2,Phi,res1,res2,res3,res4\n";
  const auto res = fd_residuals(p);
  for (std::size_t i = 0; i < p.samples.size(); ++i) {
    const ProfileSample& s = p.samples[i];
    const double I1 = std::exp((s.y1 - 2.0 * s.y2) / 3.0);
    const double I2 = std::exp((s.y1 + s.y2) / 3.0);
    const double vals[] = {s.x,
                           -std::log(s.x),
                           s.y1,
                           s.y2,
                           s.w,
                           std::exp(s.y1),
                           std::exp(s.y2),
                           I1,
                           I2,
                           constraint_phi(s.x, s.y1, s.dy1, s.y2, s.w),
                           res[i][0],
                           res[i][1],
                           res[i][2],
                           res[i][3]};
    for (std::size_t k = 0; k < std::size(vals); ++k) out << (k ? "," : "") << format_double(vals[k]);
    out << '\n';
  }
  if (!out) throw DomainError(path + ": write failed");
}

void write_gen_profile_csv(const std::string& path, const GenSolutionProfile& p) {
  std::ofstream out(path);
  if (!out) throw DomainError(path + ": cannot write");
  out << "x,r,y1,y2,y3,dy2,dy3,K,phi1,phi2,I1,I2,I3,Phi,res1,res2,res3,res4,res5\n";
  const auto res = gen_fd_residuals(p);
  for (std::size_t i = 0; i < p.samples.size(); ++i) {
    const GenProfileSample& s = p.samples[i];
    const auto I = gen_eigenvalues(s.y1, s.y2, s.y3);
    const double vals[] = {s.x,
                           -std::log(s.x),
                           s.y1,
                           s.y2,
                           s.y3,
                           s.w2,
                           s.w3,
                           std::exp(s.y1),
                           std::exp(s.y2),
                           std::exp(s.y3),
                           I[0],
                           I[1],
                           I[2],
                           gen_constraint_phi(s.x, s.y1, s.dy1, s.y2, s.y3, s.w2, s.w3),
                           res[i][0],
                           res[i][1],
                           res[i][2],
                           res[i][3],
                           res[i][4]};
    for (std::size_t k = 0; k < std::size(vals); ++k) out << (k ? "," : "") << format_double(vals[k]);
    out << '\n';
  }
  if (!out) throw DomainError(path + ": write failed");
}

namespace {

void check_abscissae(const std::vector<double>& x, const std::string& where) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0 && x[i] < 1.0)) throw DomainError(where + ": x outside (0,1)");
    if (i > 0 && !(x[i] > x[i - 1])) throw DomainError(where + ": x must be strictly increasing");
  }
}

}  // namespace

SolutionProfile read_profile_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  const auto x = t.values("x"), y1 = t.values("y1"), y2 = t.values("y2"), w = t.values("dy2");
  if (x.empty()) throw DomainError(path + ": no samples");
  check_abscissae(x, path);
  SolutionProfile p;
  p.eps = x.front();
  for (std::size_t i = 0; i < x.size(); ++i) {
    try {
      p.samples.push_back(make_sample(x[i], y1[i], y2[i], w[i], 0));
    } catch (const DomainError& e) {
      throw DomainError(path + ":" + std::to_string(t.lines[i]) + ": " + e.what());
    }
    p.max_abs_phi = std::max(p.max_abs_phi, std::fabs(constraint_phi(p.samples.back().x, y1[i],
                                                                     p.samples.back().dy1, y2[i],
                                                                     w[i])));
  }
  // boundary values from the even leading jet: y(0) = y(x) - x y'(x) / 2 + O(x^3)
  const ProfileSample& f = p.samples.front();
  p.params.phi0 = std::exp(f.y2 - 0.5 * f.x * f.w);
  p.params.K0 = std::exp(f.y1 - 0.5 * f.x * f.dy1);
  return p;
}

SolutionProfile profile_from_table(const std::vector<double>& x, const std::vector<double>& I1,
                                   const std::vector<double>& I2) {
  if (x.size() != I1.size() || x.size() != I2.size()) throw DomainError("column length mismatch");
  if (x.size() < 7) throw DomainError("at least 7 rows are required");
  check_abscissae(x, "table");
  const std::size_t n = x.size();
  std::vector<double> y1(n), y2(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(I1[i] > 0.0 && I2[i] > 0.0)) throw DomainError("I1 and I2 must be positive");
    y1[i] = std::log(I1[i]) + 2.0 * std::log(I2[i]);
    y2[i] = std::log(I2[i]) - std::log(I1[i]);
  }
  std::vector<double> d1, dd1, d2, dd2;
  finite_difference_derivatives(x, y1, d1, dd1);
  finite_difference_derivatives(x, y2, d2, dd2);
  SolutionProfile p;
  p.eps = x.front();
  p.params.phi0 = std::exp(y2.front() - 0.5 * x.front() * d2.front());
  p.params.K0 = std::exp(y1.front() - 0.5 * x.front() * d1.front());
  for (std::size_t i = 0; i < n; ++i) {
    ProfileSample s;
    s.x = x[i];
    s.y1 = y1[i];
    s.y2 = y2[i];
    s.w = d2[i];
    s.dy1 = d1[i];
    s.dw = dd2[i];
    s.d2y1 = dd1[i];
    p.samples.push_back(s);
    p.max_abs_phi = std::max(p.max_abs_phi, std::fabs(constraint_phi(s.x, s.y1, s.dy1, s.y2, s.w)));
  }
  return p;
}

ProfileValidation validate_table(const std::vector<double>& x, const std::vector<double>& I1,
                                 const std::vector<double>& I2, double tolerance,
                                 int plane_samples, std::uint64_t seed) {
  const SolutionProfile p = profile_from_table(x, I1, I2);
  ProfileValidation v;
  v.samples = static_cast<int>(p.samples.size());
  v.tolerance = tolerance;
  for (const auto& r : fd_residuals(p))
    for (int k = 0; k < 4; ++k) v.max_residuals[k] = std::max(v.max_residuals[k], std::fabs(r[k]));
  v.max_residual = *std::max_element(v.max_residuals.begin(), v.max_residuals.end());
  const CurvatureReport c = curvature_report(p, plane_samples, seed);
  v.einstein_residual = c.einstein_residual;
  v.sec_min = c.sec_min;
  v.sec_max = c.sec_max;
  v.einstein = v.max_residual < tolerance && v.einstein_residual < tolerance;
  return v;
}

ProfileValidation validate_profile(const std::string& path, double tolerance, int plane_samples,
                                   std::uint64_t seed) {
  const CsvTable t = read_csv(path);
  return validate_table(t.values("x"), t.values("I1"), t.values("I2"), tolerance, plane_samples,
                        seed);
}

}  // namespace cce
