// sfq: batch driver for space-form quermassintegral stability computations.
//
// Subcommands: grid-info, eval, deficit, asymmetry, expansion-check,
// stability-sweep, identity-tests. Input is a JSON config; output is a CSV
// with a fixed column order per subcommand plus a JSON sidecar echoing the
// config and library version. Exit codes: 0 success, 2 validation failure,
// 3 numerical-check failure (with --check), 64 usage error.

#include <CLI11.hpp>
#include <fmt/format.h>

#include <fstream>
#include <functional>
#include <json.hpp>
#include <random>
#include <string>
#include <vector>

#include "sfq/stability.hpp"

using json = nlohmann::json;
using namespace sfq;

namespace {

constexpr const char* kVersion = "1.0.0";

struct Options {
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  int threads = 1;
  bool check = false;
};

struct RunConfig {
  int curvature = 0;
  int n = 2;
  double rho = 1.0;
  int exactness = 20;
  json field;  // {"harmonics": [...]} or {"polynomial": [...]}
  json task;   // k, j, theorem, t_ladder, ...
  json raw;    // full parsed document, echoed to the sidecar
};

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw invalid_input("cannot open config file: " + path);
  RunConfig cfg;
  cfg.raw = json::parse(in);
  cfg.curvature = cfg.raw.at("curvature").get<int>();
  cfg.n = cfg.raw.at("n").get<int>();
  cfg.rho = cfg.raw.at("rho").get<double>();
  cfg.exactness = cfg.raw.value("exactness", 20);
  cfg.field = cfg.raw.value("field", json::object());
  cfg.task = cfg.raw.value("task", json::object());
  if (cfg.curvature < -1 || cfg.curvature > 1)
    throw invalid_input("curvature must be -1, 0, or +1");
  if (cfg.n < 2) throw invalid_input("n must be at least 2");
  SpaceForm(cfg.curvature).check_radius(cfg.rho);
  if (cfg.exactness < 4) throw invalid_input("exactness degree too small");
  return cfg;
}

// Field spec: a list of orthonormal spherical-harmonic components
// (degree, index within the basis, coefficient) or raw polynomial terms
// (coefficient, ambient exponents). The harmonic basis is deterministic for
// a fixed grid, so configs round-trip exactly.
RadialField build_field(const RunConfig& cfg, const QuadratureGrid& grid) {
  const int dim = cfg.n + 1;
  AmbientPolynomial p(dim);
  if (cfg.field.contains("harmonics")) {
    for (const json& term : cfg.field.at("harmonics")) {
      const int l = term.at("degree").get<int>();
      const int idx = term.at("index").get<int>();
      const double c = term.at("coefficient").get<double>();
      const std::vector<RadialField> basis = harmonic_basis(cfg.n, l, grid);
      if (idx < 0 || idx >= int(basis.size()))
        throw invalid_input("harmonic index out of range");
      p += c * basis[std::size_t(idx)].poly;
    }
  }
  if (cfg.field.contains("polynomial")) {
    for (const json& term : cfg.field.at("polynomial")) {
      const double c = term.at("coefficient").get<double>();
      const std::vector<int> e = term.at("exponents").get<std::vector<int>>();
      if (int(e.size()) != dim) throw invalid_input("exponent list has wrong length");
      p.add_term(c, e);
    }
  }
  return RadialField(p, cfg.n);
}

// shortest round-trip decimal representation
std::string num(double v) { return fmt::format("{}", v); }

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::ofstream out(path);
  if (!out) throw invalid_input("cannot open output file: " + path);
  for (std::size_t i = 0; i < header.size(); ++i)
    out << header[i] << (i + 1 < header.size() ? "," : "\n");
  for (const auto& row : rows)
    for (std::size_t i = 0; i < row.size(); ++i)
      out << row[i] << (i + 1 < row.size() ? "," : "\n");
}

void write_sidecar(const Options& opt, const RunConfig& cfg,
                   const std::string& subcommand) {
  json side;
  side["subcommand"] = subcommand;
  side["seed"] = opt.seed;
  side["threads"] = opt.threads;
  side["check"] = opt.check;
  side["library_version"] = kVersion;
  side["config"] = cfg.raw;
  std::ofstream out(opt.out_path + ".json");
  if (!out) throw invalid_input("cannot open sidecar file");
  out << side.dump(2) << "\n";
}

// least-squares slope of log10 residual against log10 t
double loglog_slope(const std::vector<double>& ts, const std::vector<double>& res,
                    double floor) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = double(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const double x = std::log10(ts[i]);
    const double y = std::log10(std::max(res[i], floor));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

std::vector<double> t_ladder(const RunConfig& cfg) {
  if (cfg.task.contains("t_ladder"))
    return cfg.task.at("t_ladder").get<std::vector<double>>();
  return {1e-1, 0.0316227766016838, 1e-2, 0.00316227766016838};
}

Theorem parse_theorem(const std::string& s) {
  if (s == "T11") return Theorem::T11;
  if (s == "T12") return Theorem::T12;
  if (s == "T13Phi") return Theorem::T13Phi;
  if (s == "T13PhiPrime") return Theorem::T13PhiPrime;
  if (s == "VWLower") return Theorem::VWLower;
  if (s == "VWAlpha") return Theorem::VWAlpha;
  throw invalid_input("unknown theorem name: " + s);
}

// returns false when a --check predicate fails
bool run_grid_info(const Options& opt, const RunConfig& cfg) {
  const QuadratureGrid grid = build_grid(cfg.n, cfg.exactness);
  std::vector<double> w = grid.weights;
  const double wsum = pairwise_sum(w);
  const double wn = sphere_area(cfg.n);
  double norm_err = 0.0;
  for (const auto& x : grid.nodes) norm_err = std::max(norm_err, std::abs(x.norm() - 1.0));
  write_csv(opt.out_path,
            {"n", "exactness", "node_count", "weight_sum", "weight_sum_rel_error",
             "max_node_norm_error"},
            {{num(cfg.n), num(cfg.exactness), num(double(grid.nodes.size())), num(wsum),
              num(std::abs(wsum - wn) / wn), num(norm_err)}});
  write_sidecar(opt, cfg, "grid-info");
  return std::abs(wsum - wn) / wn <= 1e-12 && norm_err <= 1e-12;
}

bool run_eval(const Options& opt, const RunConfig& cfg) {
  const QuadratureGrid grid = build_grid(cfg.n, cfg.exactness);
  const SpaceForm form(cfg.curvature);
  const NearlySphericalSurface s(form, cfg.rho, build_field(cfg, grid), grid);
  std::vector<std::vector<std::string>> rows;
  bool ok = true;
  for (int k = -1; k <= cfg.n; ++k) {
    std::vector<std::string> row{num(cfg.n), num(cfg.curvature), num(cfg.rho), num(k),
                                 num(quermass(s, k))};
    if (k >= 0) {
      row.push_back(num(curvature_integral(s, k)));
      row.push_back(num(weighted_integral(s, k, Weight::Phi)));
      row.push_back(num(weighted_integral(s, k, Weight::PhiPrime)));
    } else {
      row.insert(row.end(), {"", "", ""});
    }
    rows.push_back(std::move(row));
  }
  // check mode: quermassintegrals of the round ball match the closed forms
  if (opt.check && s.epsilon_hat == 0.0) {
    for (int k = -1; k <= cfg.n; ++k) {
      const double exact = ball_quermass(form, cfg.n, k, cfg.rho);
      if (std::abs(quermass(s, k) - exact) > 1e-10 * std::abs(exact)) ok = false;
    }
  }
  write_csv(opt.out_path,
            {"n", "curvature", "rho", "k", "quermass", "sigma_integral", "weighted_phi",
             "weighted_phi_prime"},
            rows);
  write_sidecar(opt, cfg, "eval");
  return ok;
}

bool run_deficit(const Options& opt, const RunConfig& cfg) {
  const QuadratureGrid grid = build_grid(cfg.n, cfg.exactness);
  const SpaceForm form(cfg.curvature);
  const NearlySphericalSurface s(form, cfg.rho, build_field(cfg, grid), grid);
  const int k = cfg.task.at("k").get<int>();
  const int j = cfg.task.at("j").get<int>();
  const DeficitReport rep = deficit(s, k, j);
  write_csv(opt.out_path,
            {"n", "curvature", "rho", "k", "j", "quermass_k", "matched_radius",
             "deficit"},
            {{num(cfg.n), num(cfg.curvature), num(cfg.rho), num(k), num(j),
              num(rep.quermass_k), num(rep.matched_radius), num(rep.deficit)}});
  write_sidecar(opt, cfg, "deficit");
  return !opt.check || rep.deficit >= -1e-9 * (1.0 + std::abs(rep.quermass_k));
}

bool run_asymmetry(const Options& opt, const RunConfig& cfg) {
  const QuadratureGrid grid = build_grid(cfg.n, cfg.exactness);
  const SpaceForm form(cfg.curvature);
  const NearlySphericalSurface s(form, cfg.rho, build_field(cfg, grid), grid);
  const double vol = volume(s);
  const double radius = ball_radius_from_quermass(form, cfg.n, -1, vol);
  const FraenkelResult fr = fraenkel(s);
  write_csv(opt.out_path,
            {"n", "curvature", "rho", "volume", "matched_radius", "fraenkel",
             "fraenkel_origin", "degraded"},
            {{num(cfg.n), num(cfg.curvature), num(cfg.rho), num(vol), num(radius),
              num(fr.value), num(fr.origin_value), fr.degraded ? "1" : "0"}});
  write_sidecar(opt, cfg, "asymmetry");
  return !opt.check ||
         (fr.value <= fr.origin_value + 1e-12 * (1.0 + fr.origin_value) && !fr.degraded);
}

bool run_expansion_check(const Options& opt, const RunConfig& cfg) {
  const QuadratureGrid grid = build_grid(cfg.n, cfg.exactness);
  const SpaceForm form(cfg.curvature);
  const RadialField shape = build_field(cfg, grid);
  const int k = cfg.task.at("k").get<int>();
  const std::vector<double> ts = t_ladder(cfg);

  struct Family {
    std::string name;
    QuadraticFunctionalCoefficients coeffs;
    std::function<double(const NearlySphericalSurface&)> actual;
  };
  std::vector<Family> families;
  families.push_back({"sigma", expansion_sigma_integral(cfg.n, k, cfg.rho, cfg.curvature),
                      [k](const NearlySphericalSurface& s) {
                        return curvature_integral(s, k);
                      }});
  families.push_back(
      {"weighted_phi",
       expansion_weighted(cfg.n, k, cfg.rho, cfg.curvature, Weight::Phi),
       [k](const NearlySphericalSurface& s) {
         return weighted_integral(s, k, Weight::Phi);
       }});
  families.push_back(
      {"weighted_phi_prime",
       expansion_weighted(cfg.n, k, cfg.rho, cfg.curvature, Weight::PhiPrime),
       [k](const NearlySphericalSurface& s) {
         return weighted_integral(s, k, Weight::PhiPrime);
       }});
  const SpaceForm ball_form(cfg.curvature);
  families.push_back(
      {"quermass_diff", expansion_quermass_diff(cfg.n, k, cfg.rho, cfg.curvature),
       [k, &ball_form, &cfg](const NearlySphericalSurface& s) {
         return quermass(s, k) - ball_quermass(ball_form, cfg.n, k, cfg.rho);
       }});

  std::vector<std::vector<std::string>> rows;
  bool ok = true;
  const double wn = sphere_area(cfg.n);
  for (const Family& fam : families) {
    std::vector<double> residuals;
    double scale = 1.0;
    for (double t : ts) {
      const RadialField u(t * shape.poly, cfg.n);
      const NearlySphericalSurface s(form, cfg.rho, u, grid);
      const SobolevNorms norms = sobolev_norms(u, grid);
      const LowModes lm = low_mode_coefficients(u, grid);
      const double iu = lm.a0 * std::sqrt(wn);
      const double actual = fam.actual(s);
      const double predicted =
          fam.coeffs.evaluate(cfg.n, iu, norms.l2_sq, norms.grad_l2_sq);
      const double residual = std::abs(actual - predicted);
      scale = std::max(scale, std::abs(actual));
      residuals.push_back(residual);
      rows.push_back({fam.name, num(cfg.n), num(cfg.curvature), num(cfg.rho), num(k),
                      num(t), num(actual), num(predicted), num(residual), ""});
    }
    bool at_floor = true;
    for (double r : residuals) at_floor = at_floor && r <= 1e-12 * scale;
    const double slope =
        at_floor ? std::numeric_limits<double>::infinity()
                 : loglog_slope(ts, residuals, 1e-16 * scale);
    rows.back().back() = num(slope);
    if (!at_floor && slope < 2.7) ok = false;
  }
  write_csv(opt.out_path,
            {"family", "n", "curvature", "rho", "k", "t", "actual", "predicted",
             "residual", "slope"},
            rows);
  write_sidecar(opt, cfg, "expansion-check");
  return !opt.check || ok;
}

bool run_stability_sweep(const Options& opt, const RunConfig& cfg) {
  const QuadratureGrid grid = build_grid(cfg.n, cfg.exactness);
  const SpaceForm form(cfg.curvature);
  const RadialField shape = build_field(cfg, grid);
  const Theorem theorem = parse_theorem(cfg.task.at("theorem").get<std::string>());

  auto as_list = [&](const char* key) {
    std::vector<int> out;
    const json& v = cfg.task.at(key);
    if (v.is_array())
      out = v.get<std::vector<int>>();
    else
      out.push_back(v.get<int>());
    return out;
  };
  const std::vector<int> ks = as_list("k");
  const std::vector<int> js = as_list("j");
  const std::vector<double> ts = t_ladder(cfg);

  std::vector<std::vector<std::string>> rows;
  bool ok = true;
  for (int k : ks)
    for (int j : js) {
      if (!(j < k)) continue;
      for (double t : ts) {
        const RadialField u = fit_constraints(form, cfg.rho, grid, shape, t, j);
        const NearlySphericalSurface s(form, cfg.rho, u, grid);
        const StabilityReport rep = theorem_report(s, k, j, theorem);
        rows.push_back({cfg.task.at("theorem").get<std::string>(), num(cfg.n),
                        num(cfg.curvature), num(cfg.rho), num(k), num(j), num(t),
                        num(rep.lhs), num(rep.constant), num(rep.asymmetry),
                        num(rep.asymmetry_origin), num(rep.margin), num(rep.eps_hat)});
        // check: the stability inequality holds with 10% slack on the constant
        if (rep.lhs < 0.9 * rep.constant * rep.asymmetry_origin * rep.asymmetry_origin)
          ok = false;
      }
    }
  write_csv(opt.out_path,
            {"theorem", "n", "curvature", "rho", "k", "j", "t", "lhs", "constant",
             "asymmetry", "asymmetry_origin", "margin", "eps_hat"},
            rows);
  write_sidecar(opt, cfg, "stability-sweep");
  return !opt.check || ok;
}

bool run_identity_tests(const Options& opt, const RunConfig& cfg) {
  const QuadratureGrid grid = build_grid(cfg.n, cfg.exactness);
  const RadialField shape = build_field(cfg, grid);
  std::vector<std::vector<std::string>> rows;
  bool ok = true;

  // Hessian integral identities on the configured field
  const IdentityReport rep = hessian_integral_identities(shape, grid);
  const SobolevNorms norms = sobolev_norms(shape, grid);
  const double exact_tol =
      1e-10 * (1.0 + norms.w2inf_estimate() * sphere_area(cfg.n));
  rows.push_back({"sigma1_exact", "", "", num(rep.sigma1_integral_abs), "", ""});
  if (rep.sigma1_integral_abs > exact_tol) ok = false;
  static constexpr std::array<double, 4> ladder = {1e-1, 0.0316227766016838, 1e-2,
                                                   0.00316227766016838};
  for (const IdentityEntry& e : rep.entries) {
    for (std::size_t i = 0; i < ladder.size(); ++i)
      rows.push_back({"identity_" + std::to_string(e.identity), num(e.m), num(ladder[i]),
                      num(e.residuals[i]), i + 1 == ladder.size() ? num(e.slope) : "",
                      e.at_floor ? "1" : "0"});
    if (!e.at_floor && e.slope < 2.7) ok = false;
  }

  // randomized symmetric-function identities, seeded for reproducibility
  std::mt19937_64 rng(opt.seed);
  std::normal_distribution<double> dist;
  auto random_symmetric = [&](int m) {
    symmpoly::Matrix a(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) a(i, j) = dist(rng);
    return (0.5 * (a + a.transpose())).eval();
  };
  double newton_err = 0.0, trace_err = 0.0, lemma_err = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int m = 2 + int(rng() % 4);
    const symmpoly::Matrix a = random_symmetric(m);
    const auto sig = symmpoly::elementary_symmetric_matrix(a);
    for (int q = 0; q <= std::min(m, 3); ++q) {
      const symmpoly::Matrix rec = symmpoly::newton_operator(a, q);
      const symmpoly::Matrix exp = symmpoly::newton_operator_expanded(a, q);
      newton_err = std::max(newton_err, (rec - exp).cwiseAbs().maxCoeff() /
                                            (1.0 + exp.cwiseAbs().maxCoeff()));
      if (q < m)
        trace_err = std::max(
            trace_err, std::abs(rec.trace() - (m - q) * sig[std::size_t(q)]) /
                           (1.0 + std::abs(sig[std::size_t(q)])));
    }
    // two rank-one slots sharing their left vector annihilate the contraction
    symmpoly::Vector w(m), v1(m), v2(m);
    for (int i = 0; i < m; ++i) {
      w[i] = dist(rng);
      v1[i] = dist(rng);
      v2[i] = dist(rng);
    }
    const double c = symmpoly::kronecker_contraction(
        {w * v1.transpose(), w * v2.transpose()});
    lemma_err =
        std::max(lemma_err, std::abs(c) / (1.0 + w.norm() * v1.norm() * v2.norm()));
  }
  rows.push_back({"newton_vs_permutation", "", "", num(newton_err), "", ""});
  rows.push_back({"newton_trace", "", "", num(trace_err), "", ""});
  rows.push_back({"rank_one_annihilation", "", "", num(lemma_err), "", ""});
  if (newton_err > 1e-12 || trace_err > 1e-12 || lemma_err > 1e-12) ok = false;

  write_csv(opt.out_path, {"check", "m", "t", "value", "slope", "at_floor"}, rows);
  write_sidecar(opt, cfg, "identity-tests");
  return !opt.check || ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"space-form quermassintegral stability toolkit"};
  app.require_subcommand(1);

  Options opt;
  std::string chosen;
  const std::vector<std::pair<std::string, bool (*)(const Options&, const RunConfig&)>>
      subcommands = {{"grid-info", run_grid_info},
                     {"eval", run_eval},
                     {"deficit", run_deficit},
                     {"asymmetry", run_asymmetry},
                     {"expansion-check", run_expansion_check},
                     {"stability-sweep", run_stability_sweep},
                     {"identity-tests", run_identity_tests}};
  for (const auto& [name, fn] : subcommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config_path, "JSON config path")->required();
    sub->add_option("--out", opt.out_path, "CSV output path")->required();
    sub->add_option("--seed", opt.seed, "RNG seed for randomized checks");
    sub->add_option("--threads", opt.threads, "worker thread count (reserved)");
    sub->add_flag("--check", opt.check, "fail with exit 3 on predicate violations");
    sub->callback([&chosen, name = name] { chosen = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 64;
  }

  try {
    const RunConfig cfg = load_config(opt.config_path);
    for (const auto& [name, fn] : subcommands)
      if (name == chosen) {
        const bool ok = fn(opt, cfg);
        if (!ok && opt.check) {
          fmt::print(stderr, "check failed: acceptance predicate violated\n");
          return 3;
        }
        return 0;
      }
    return 64;
  } catch (const solver_error& e) {
    fmt::print(stderr, "solver error: {}\n", e.what());
    return 3;
  } catch (const grid_error& e) {
    fmt::print(stderr, "grid error: {}\n", e.what());
    return 3;
  } catch (const invalid_input& e) {
    fmt::print(stderr, "invalid input: {}\n", e.what());
    return 2;
  } catch (const domain_error& e) {
    fmt::print(stderr, "domain error: {}\n", e.what());
    return 2;
  } catch (const json::exception& e) {
    fmt::print(stderr, "config error: {}\n", e.what());
    return 2;
  }
}
