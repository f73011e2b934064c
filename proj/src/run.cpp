#include "cce/run.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <json.hpp>
#include <map>
#include <sstream>
#include <type_traits>

#include "cce/curvature.hpp"
#include "cce/gen_shooter.hpp"
#include "cce/profile_io.hpp"

namespace cce {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

const std::map<std::string, Mode> kModes = {
    {"solve", Mode::Solve},         {"scan", Mode::Scan},          {"probe", Mode::Probe},
    {"curvature", Mode::Curvature}, {"gen-solve", Mode::GenSolve}, {"validate-profile", Mode::ValidateProfile}};

int line_at(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + offset, '\n'));
}

// Line of the first occurrence of "key" used as an object key.
int line_of_key(const std::string& text, const std::string& key) {
  const std::string quoted = "\"" + key + "\"";
  for (std::size_t pos = text.find(quoted); pos != std::string::npos;
       pos = text.find(quoted, pos + 1)) {
    std::size_t k = pos + quoted.size();
    while (k < text.size() && std::isspace(static_cast<unsigned char>(text[k]))) ++k;
    if (k < text.size() && text[k] == ':') return line_at(text, pos);
  }
  return 1;
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_json(const fs::path& path, ojson j) {
  j["timestamp"] = utc_timestamp();
  std::ofstream out(path);
  if (!out) throw DomainError(path.string() + ": cannot write");
  out << j.dump(2) << '\n';
  if (!out) throw DomainError(path.string() + ": write failed");
}

// NaN and infinities become null.
ojson num(double v) { return std::isfinite(v) ? ojson(v) : ojson(nullptr); }

ojson params_json(const ShootingParams& p) { return {{"K0", p.K0}, {"a", p.a}, {"q", p.q}}; }

ojson config_json(const RunConfig& c) {
  const ShooterOptions& s = c.shooter;
  return {{"tol", s.tol},           {"rtol", s.rtol},
          {"atol", s.atol},         {"eps", s.eps},
          {"jet_order", s.jet_order}, {"n_out", s.n_out},
          {"x_match", s.x_match},   {"max_step", c.max_step},
          {"plane_samples", c.plane_samples}, {"curvature_seed", c.curvature_seed}};
}

ojson diagnostics_json(const DiagnosticsReport& d) {
  return {{"samples", d.samples},
          {"max_residual", num(d.max_residual)},
          {"max_closure_residual", num(d.max_closure_residual)},
          {"max_abs_phi", num(d.max_abs_phi)},
          {"min_y1p", num(d.min_y1p)},
          {"max_y1p", num(d.max_y1p)},
          {"residual_ok", d.max_residual < 1e-6},
          {"constraint_ok", d.max_abs_phi < 1e-8},
          {"monotonicity_ok", d.monotonicity_ok()},
          {"bounds_ok", d.bounds_ok()},
          {"violations",
           {{"y1p_positive", d.y1p_positive_violations},
            {"y2p_sign", d.y2p_sign_violations},
            {"y1p_upper", d.y1p_upper_violations},
            {"curvature_bound", d.curvature_bound_violations},
            {"K_below_one", d.K_violations},
            {"phi_range", d.phi_range_violations},
            {"M_monotone", d.M_monotone_violations},
            {"N_monotone", d.N_monotone_violations}}}};
}

ojson curvature_json(const CurvatureReport& c) {
  return {{"einstein_residual", num(c.einstein_residual)},
          {"sec_min", num(c.sec_min)},
          {"sec_max", num(c.sec_max)},
          {"range", "sampled"},
          {"flag_nonpositive", c.flag_nonpositive},
          {"frame_plane_deviation_far", num(c.frame_plane_deviation_far)},
          {"r_min", num(c.r_min)},
          {"r_max", num(c.r_max)},
          {"grid_points", c.grid_points}};
}

ojson warnings_json(const std::vector<std::string>& w, std::ostream& log) {
  ojson a = ojson::array();
  for (const auto& s : w) {
    log << "warning: " << s << '\n';
    a.push_back(s);
  }
  return a;
}

int run_solve(const RunConfig& cfg, const fs::path& dir, const ojson& warnings, std::ostream& log) {
  const double phi0 = *cfg.phi0;
  ojson j = {{"mode", "solve"}, {"phi0", phi0}};
  BvpSolution s;
  try {
    s = solve_continued(phi0, cfg.shooter, cfg.max_step);
  } catch (const SolveError& e) {
    log << "solve failed: " << e.what() << '\n';
    j["converged"] = false;
    j["message"] = e.what();
    j["params"] = params_json(e.best().params);
    j["match_defect"] = num(e.best().match_defect);
    j["warnings"] = warnings;
    j["config"] = config_json(cfg);
    write_json(dir / "summary.json", j);
    return kExitConvergence;
  }
  write_profile_csv((dir / "profile.csv").string(), s.profile);
  const DiagnosticsReport d = diagnostics(s.profile);
  const CurvatureReport c = curvature_report(s.profile, cfg.plane_samples, cfg.curvature_seed);
  j["converged"] = true;
  j["params"] = params_json(s.params);
  j["match_defect"] = num(s.match_defect);
  j["iterations"] = s.iterations;
  j["diagnostics"] = diagnostics_json(d);
  j["curvature"] = curvature_json(c);
  j["warnings"] = warnings;
  j["config"] = config_json(cfg);
  write_json(dir / "summary.json", j);
  log << "solve phi0=" << phi0 << ": K0=" << format_double(s.params.K0)
      << " a=" << format_double(s.params.a) << " q=" << format_double(s.params.q) << '\n';
  return kExitOk;
}

int run_scan(const RunConfig& cfg, const fs::path& dir, const ojson& warnings, std::ostream& log) {
  const auto grid = scan_grid(*cfg.from, *cfg.to, *cfg.step);
  const auto rows = continuation_scan(grid, cfg.shooter, cfg.max_step);
  std::ofstream csv(dir / "scan.csv");
  if (!csv) throw DomainError((dir / "scan.csv").string() + ": cannot write");
  csv << "phi0,converged,K0,a,q,match_defect,max_residual,max_abs_phi,monotonicity_ok,bounds_ok\n";
  ojson list = ojson::array();
  bool all = true;
  for (const ScanRow& r : rows) {
    all = all && r.converged;
    const DiagnosticsReport& d = r.diagnostics;
    csv << format_double(r.phi0) << ',' << (r.converged ? 1 : 0) << ','
        << format_double(r.params.K0) << ',' << format_double(r.params.a) << ','
        << format_double(r.params.q) << ',' << format_double(r.match_defect) << ','
        << format_double(d.max_residual) << ',' << format_double(d.max_abs_phi) << ','
        << (d.monotonicity_ok() ? 1 : 0) << ',' << (d.bounds_ok() ? 1 : 0) << '\n';
    ojson row = {{"phi0", r.phi0}, {"converged", r.converged}, {"params", params_json(r.params)},
                 {"match_defect", num(r.match_defect)}};
    if (r.converged)
      row["diagnostics"] = diagnostics_json(d);
    else
      row["message"] = r.message;
    list.push_back(row);
    log << "scan phi0=" << r.phi0 << (r.converged ? " converged" : " FAILED: " + r.message)
        << '\n';
  }
  if (!csv) throw DomainError((dir / "scan.csv").string() + ": write failed");
  ojson j = {{"mode", "scan"},
             {"from", *cfg.from},
             {"to", *cfg.to},
             {"step", *cfg.step},
             {"rows", list.size()},
             {"all_converged", all},
             {"table", list},
             {"warnings", warnings},
             {"config", config_json(cfg)}};
  write_json(dir / "summary.json", j);
  return all ? kExitOk : kExitConvergence;
}

int run_probe(const RunConfig& cfg, const fs::path& dir, const ojson& warnings, std::ostream& log) {
  const double phi0 = *cfg.phi0;
  const ProbeReport rep =
      uniqueness_probe(phi0, cfg.starts, cfg.spread, cfg.seed, cfg.shooter, cfg.workers);
  ojson starts = ojson::array();
  for (const ProbeStart& s : rep.starts)
    starts.push_back({{"index", s.index},
                      {"guess", params_json(s.guess)},
                      {"converged", s.converged},
                      {"result", params_json(s.result)},
                      {"match_defect", num(s.match_defect)},
                      {"cluster", s.cluster}});
  // clusters are flagged by their curvature sign, never discarded
  ojson clusters = ojson::array();
  for (std::size_t c = 0; c < rep.clusters.size(); ++c) {
    ojson e = {{"params", params_json(rep.clusters[c])}, {"size", rep.cluster_sizes[c]}};
    try {
      const SolutionProfile p = shooting_profile(phi0, rep.clusters[c], cfg.shooter);
      const CurvatureReport cr = curvature_report(p, cfg.plane_samples, cfg.curvature_seed);
      e["einstein_residual"] = num(cr.einstein_residual);
      e["sec_max"] = num(cr.sec_max);
      e["flag_nonpositive"] = cr.flag_nonpositive;
    } catch (const std::exception& ex) {
      e["curvature_error"] = ex.what();
    }
    clusters.push_back(e);
  }
  ojson j = {{"mode", "probe"},
             {"phi0", phi0},
             {"seed", cfg.seed},
             {"spread", cfg.spread},
             {"starts", cfg.starts},
             {"converged", rep.converged},
             {"clusters", rep.clusters.size()},
             {"cluster_radius", kClusterRadius},
             {"cluster_list", clusters},
             {"start_list", starts},
             {"warnings", warnings},
             {"config", config_json(cfg)}};
  write_json(dir / "summary.json", j);
  log << "probe phi0=" << phi0 << ": " << rep.converged << "/" << cfg.starts << " converged, "
      << rep.clusters.size() << " cluster(s)\n";
  return rep.converged > 0 ? kExitOk : kExitConvergence;
}

int run_curvature(const RunConfig& cfg, const fs::path& dir, const ojson& warnings,
                  std::ostream& log) {
  const SolutionProfile p = read_profile_csv(cfg.input);
  const CurvatureReport c = curvature_report(p, cfg.plane_samples, cfg.curvature_seed);
  ojson j = {{"mode", "curvature"},
             {"input", cfg.input},
             {"samples", p.samples.size()},
             {"max_abs_phi", num(p.max_abs_phi)},
             {"curvature", curvature_json(c)},
             {"warnings", warnings},
             {"config", config_json(cfg)}};
  write_json(dir / "summary.json", j);
  log << "curvature: einstein residual " << format_double(c.einstein_residual) << ", sampled range ["
      << format_double(c.sec_min) << ", " << format_double(c.sec_max) << "]\n";
  return kExitOk;
}

int run_gen_solve(const RunConfig& cfg, const fs::path& dir, const ojson& warnings,
                  std::ostream& log) {
  const double phi1 = *cfg.phi1, phi2 = *cfg.phi2;
  ojson j = {{"mode", "gen-solve"}, {"phi1", phi1}, {"phi2", phi2}};
  GenBvpSolution s;
  try {
    s = gen_solve_continued(phi1, phi2, cfg.shooter, cfg.max_step);
  } catch (const ConvergenceError& e) {
    log << "gen-solve failed: " << e.what() << '\n';
    j["converged"] = false;
    j["message"] = e.what();
    j["warnings"] = warnings;
    j["config"] = config_json(cfg);
    write_json(dir / "summary.json", j);
    return kExitConvergence;
  }
  write_gen_profile_csv((dir / "gen_profile.csv").string(), s.profile);
  const GenDiagnostics d = gen_diagnostics(s.profile);
  const GenShootingParams& p = s.params;
  j["converged"] = true;
  j["params"] = {{"K0", p.K0}, {"a2", p.a2}, {"a3", p.a3}, {"q2", p.q2}, {"q3", p.q3}};
  j["match_defect"] = num(s.match_defect);
  j["iterations"] = s.iterations;
  j["diagnostics"] = {{"samples", d.samples},
                      {"max_residual", num(d.max_residual)},
                      {"max_closure_residual", num(d.max_closure_residual)},
                      {"max_abs_phi", num(d.max_abs_phi)},
                      {"max_abs_y3", num(d.max_abs_y3)},
                      {"residual_ok", d.max_residual < 1e-6},
                      {"constraint_ok", d.max_abs_phi < 1e-8}};
  j["warnings"] = warnings;
  j["config"] = config_json(cfg);
  write_json(dir / "summary.json", j);
  log << "gen-solve phi1=" << phi1 << " phi2=" << phi2 << ": K0=" << format_double(p.K0) << '\n';
  return kExitOk;
}

int run_validate(const RunConfig& cfg, const fs::path& dir, std::ostream& log) {
  const ProfileValidation v = validate_profile(cfg.input, cfg.validation_tolerance,
                                               cfg.plane_samples, cfg.curvature_seed);
  ojson res = ojson::array();
  for (double r : v.max_residuals) res.push_back(num(r));
  ojson j = {{"mode", "validate-profile"},
             {"input", cfg.input},
             {"samples", v.samples},
             {"tolerance", v.tolerance},
             {"max_residuals", res},
             {"max_residual", num(v.max_residual)},
             {"einstein_residual", num(v.einstein_residual)},
             {"sec_min", num(v.sec_min)},
             {"sec_max", num(v.sec_max)},
             {"einstein", v.einstein}};
  write_json(dir / "validation.json", j);
  log << "validate-profile: einstein=" << (v.einstein ? "true" : "false") << " max residual "
      << format_double(v.max_residual) << " einstein residual "
      << format_double(v.einstein_residual) << '\n';
  return kExitOk;
}

template <class T>
T get_as(const ojson& v, const std::string& key, const std::string& where) {
  if constexpr (std::is_same_v<T, std::string>) {
    if (!v.is_string()) throw ConfigError(where + ": '" + key + "' must be a string");
  } else if constexpr (std::is_same_v<T, std::uint64_t> || std::is_same_v<T, unsigned>) {
    if (!v.is_number_unsigned())
      throw ConfigError(where + ": '" + key + "' must be a non-negative integer");
  } else if constexpr (std::is_integral_v<T>) {
    if (!v.is_number_integer()) throw ConfigError(where + ": '" + key + "' must be an integer");
  } else {
    if (!v.is_number()) throw ConfigError(where + ": '" + key + "' must be a number");
  }
  return v.get<T>();
}

void check_finite(double v, const std::string& name) {
  if (!std::isfinite(v)) throw ConfigError(name + " must be finite");
}

void check_positive(double v, const std::string& name) {
  if (!(v > 0.0) || !std::isfinite(v)) throw ConfigError(name + " must be positive");
}

std::string squashing_warning(const std::string& name, double v) {
  std::ostringstream os;
  os << name << "=" << v << " lies outside (1/4, 4); uniqueness is not asserted there";
  return os.str();
}

}  // namespace

std::string mode_name(Mode m) {
  for (const auto& [k, v] : kModes)
    if (v == m) return k;
  return "?";
}

std::optional<Mode> parse_mode(const std::string& s) {
  const auto it = kModes.find(s);
  if (it == kModes.end()) return std::nullopt;
  return it->second;
}

void apply_config_text(const std::string& text, const std::string& origin, RunConfig& cfg) {
  ojson doc;
  try {
    doc = ojson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    const std::size_t at = e.byte > 0 ? e.byte - 1 : 0;
    throw ConfigError(origin + ":" + std::to_string(line_at(text, at)) + ": invalid JSON");
  }
  if (!doc.is_object()) throw ConfigError(origin + ":1: configuration must be a JSON object");

  using Setter = std::function<void(const ojson&, const std::string&, const std::string&)>;
  auto dbl = [](double& dst) -> Setter {
    return [&dst](const ojson& v, const std::string& k, const std::string& w) {
      dst = get_as<double>(v, k, w);
    };
  };
  auto opt = [](std::optional<double>& dst) -> Setter {
    return [&dst](const ojson& v, const std::string& k, const std::string& w) {
      dst = get_as<double>(v, k, w);
    };
  };
  auto integer = [](int& dst) -> Setter {
    return [&dst](const ojson& v, const std::string& k, const std::string& w) {
      dst = get_as<int>(v, k, w);
    };
  };
  auto u64 = [](std::uint64_t& dst) -> Setter {
    return [&dst](const ojson& v, const std::string& k, const std::string& w) {
      dst = get_as<std::uint64_t>(v, k, w);
    };
  };
  auto str = [](std::string& dst) -> Setter {
    return [&dst](const ojson& v, const std::string& k, const std::string& w) {
      dst = get_as<std::string>(v, k, w);
    };
  };
  const std::map<std::string, Setter> setters = {
      {"mode",
       [&cfg](const ojson& v, const std::string& k, const std::string& w) {
         const auto m = parse_mode(get_as<std::string>(v, k, w));
         if (!m) throw ConfigError(w + ": unknown mode '" + v.get<std::string>() + "'");
         cfg.mode = m;
       }},
      {"phi0", opt(cfg.phi0)},
      {"from", opt(cfg.from)},
      {"to", opt(cfg.to)},
      {"step", opt(cfg.step)},
      {"starts", integer(cfg.starts)},
      {"seed", u64(cfg.seed)},
      {"spread", dbl(cfg.spread)},
      {"input", str(cfg.input)},
      {"phi1", opt(cfg.phi1)},
      {"phi2", opt(cfg.phi2)},
      {"tol", dbl(cfg.shooter.tol)},
      {"rtol", dbl(cfg.shooter.rtol)},
      {"atol", dbl(cfg.shooter.atol)},
      {"eps", dbl(cfg.shooter.eps)},
      {"jet_order", integer(cfg.shooter.jet_order)},
      {"n_out", integer(cfg.shooter.n_out)},
      {"x_match", dbl(cfg.shooter.x_match)},
      {"max_step", dbl(cfg.max_step)},
      {"plane_samples", integer(cfg.plane_samples)},
      {"curvature_seed", u64(cfg.curvature_seed)},
      {"validation_tolerance", dbl(cfg.validation_tolerance)},
      {"workers",
       [&cfg](const ojson& v, const std::string& k, const std::string& w) {
         cfg.workers = get_as<unsigned>(v, k, w);
       }},
      {"output_dir", str(cfg.output_dir)}};

  for (const auto& [key, value] : doc.items()) {
    const std::string where = origin + ":" + std::to_string(line_of_key(text, key));
    const auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError(where + ": unknown key '" + key + "'");
    it->second(value, key, where);
  }
}

void apply_config_file(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  apply_config_text(ss.str(), path, cfg);
}

std::vector<double> scan_grid(double from, double to, double step) {
  check_positive(step, "step");
  if (!(to >= from)) throw ConfigError("scan range must satisfy from <= to");
  const double span = (to - from) / step;
  if (span > 1e5) throw ConfigError("scan grid too large");
  const int n = static_cast<int>(std::floor(span + 1e-9)) + 1;
  std::vector<double> g(n);
  for (int i = 0; i < n; ++i) g[i] = std::round((from + i * step) * 1e12) / 1e12;
  return g;
}

std::vector<std::string> validate_config(const RunConfig& cfg) {
  if (!cfg.mode) throw ConfigError("no mode given");
  const ShooterOptions& s = cfg.shooter;
  check_positive(s.tol, "tol");
  check_positive(s.rtol, "rtol");
  check_positive(s.atol, "atol");
  if (!(s.eps > 0.0 && s.eps <= 0.1)) throw ConfigError("eps must lie in (0, 0.1]");
  if (!(s.x_match > 2.0 * s.eps && s.x_match < 1.0 - 2.0 * s.eps))
    throw ConfigError("x_match must lie well inside (eps, 1 - eps)");
  if (s.jet_order < 5 || s.jet_order > 40) throw ConfigError("jet_order must lie in [5, 40]");
  if (s.n_out < 7) throw ConfigError("n_out must be at least 7");
  check_positive(cfg.max_step, "max_step");
  if (cfg.plane_samples < 100) throw ConfigError("plane_samples must be at least 100");
  check_positive(cfg.validation_tolerance, "validation_tolerance");

  std::vector<std::string> warn;
  auto need = [](const std::optional<double>& v, const std::string& name) {
    if (!v) throw ConfigError(name + " is required for this mode");
    check_finite(*v, name);
  };
  auto squashing = [&](double v, const std::string& name) {
    check_positive(v, name);
    if (v <= 0.25 || v >= 4.0) warn.push_back(squashing_warning(name, v));
  };
  switch (*cfg.mode) {
    case Mode::Solve:
      need(cfg.phi0, "phi0");
      squashing(*cfg.phi0, "phi0");
      break;
    case Mode::Probe:
      need(cfg.phi0, "phi0");
      squashing(*cfg.phi0, "phi0");
      if (cfg.starts < 1) throw ConfigError("starts must be at least 1");
      check_positive(cfg.spread, "spread");
      break;
    case Mode::Scan: {
      need(cfg.from, "from");
      need(cfg.to, "to");
      need(cfg.step, "step");
      check_positive(*cfg.from, "from");
      for (double v : scan_grid(*cfg.from, *cfg.to, *cfg.step))
        if (v <= 0.25 || v >= 4.0) warn.push_back(squashing_warning("phi0", v));
      break;
    }
    case Mode::GenSolve:
      need(cfg.phi1, "phi1");
      need(cfg.phi2, "phi2");
      squashing(*cfg.phi1, "phi1");
      squashing(*cfg.phi2, "phi2");
      break;
    case Mode::Curvature:
    case Mode::ValidateProfile:
      if (cfg.input.empty()) throw ConfigError("an input file is required for this mode");
      break;
  }
  return warn;
}

int run(const RunConfig& cfg, std::ostream& log) {
  std::vector<std::string> warn;
  try {
    warn = validate_config(cfg);
  } catch (const ConfigError& e) {
    log << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  const ojson warnings = warnings_json(warn, log);
  const fs::path dir(cfg.output_dir);
  try {
    fs::create_directories(dir);
    switch (*cfg.mode) {
      case Mode::Solve: return run_solve(cfg, dir, warnings, log);
      case Mode::Scan: return run_scan(cfg, dir, warnings, log);
      case Mode::Probe: return run_probe(cfg, dir, warnings, log);
      case Mode::Curvature: return run_curvature(cfg, dir, warnings, log);
      case Mode::GenSolve: return run_gen_solve(cfg, dir, warnings, log);
      case Mode::ValidateProfile: return run_validate(cfg, dir, log);
    }
  } catch (const BranchDomainError& e) {
    log << "error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const DomainError& e) {
    log << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const fs::filesystem_error& e) {
    log << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    log << "error: " << e.what() << '\n';
    return kExitConvergence;
  }
  return kExitValidation;
}

}  // namespace cce
