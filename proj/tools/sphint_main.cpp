// Batch front-end: JSON experiment configs in, CSV/JSON results out.
// Exit codes: 0 success, 2 config/schema error, 3 domain error, 4 computation
// failure. Logs go to stderr; results go to stdout or --out.

#include <CLI11.hpp>
#include <cinttypes>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <sphint/sphint.hpp>
#include <sstream>
#include <string>
#include <vector>

namespace {

using nlohmann::json;

struct SchemaFail : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw SchemaFail("cannot open config file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw SchemaFail(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SchemaFail("config root must be a JSON object");
  return j;
}

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& ctx) {
  for (const auto& item : j.items())
    if (allowed.find(item.key()) == allowed.end())
      throw SchemaFail("unknown field \"" + item.key() + "\" in " + ctx);
}

const json& require_field(const json& j, const std::string& key, const std::string& ctx) {
  auto it = j.find(key);
  if (it == j.end()) throw SchemaFail("missing field \"" + key + "\" in " + ctx);
  return *it;
}

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw SchemaFail("field \"" + key + "\" must be a number");
  return v.get<double>();
}

std::uint64_t as_count(const json& v, const std::string& key) {
  if (!v.is_number_unsigned())
    throw SchemaFail("field \"" + key + "\" must be a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::vector<double> as_number_list(const json& v, const std::string& key) {
  if (!v.is_array()) throw SchemaFail("field \"" + key + "\" must be an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) out.push_back(as_number(x, key));
  return out;
}

double get_number(const json& j, const std::string& key, const std::string& ctx) {
  return as_number(require_field(j, key, ctx), key);
}

std::uint64_t get_count(const json& j, const std::string& key, const std::string& ctx) {
  return as_count(require_field(j, key, ctx), key);
}

std::uint64_t get_count_or(const json& j, const std::string& key, std::uint64_t fallback) {
  auto it = j.find(key);
  return it == j.end() ? fallback : as_count(*it, key);
}

std::vector<double> get_list_or(const json& j, const std::string& key) {
  auto it = j.find(key);
  return it == j.end() ? std::vector<double>{} : as_number_list(*it, key);
}

sphint::DiscreteMeasure parse_measure(const json& j, const std::string& ctx) {
  if (!j.is_object()) throw SchemaFail(ctx + " must be an object");
  check_keys(j, {"atoms", "weights"}, ctx);
  return sphint::DiscreteMeasure(as_number_list(require_field(j, "atoms", ctx), "atoms"),
                                 as_number_list(require_field(j, "weights", ctx), "weights"));
}

sphint::Beta parse_beta(const json& j, const std::string& ctx) {
  const std::uint64_t b = get_count(j, "beta", ctx);
  if (b == 1) return sphint::Beta::Orthogonal;
  if (b == 2) return sphint::Beta::Unitary;
  throw SchemaFail("field \"beta\" must be 1 or 2");
}

// Fixed-width shortest-roundtrip formatting keeps CSV byte-identical across runs.
std::string fmt(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

struct Output {
  std::ofstream file;
  bool to_file = false;

  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file.open(path);
      if (!file) throw SchemaFail("cannot open output file: " + path);
      to_file = true;
    }
  }
  std::ostream& stream() { return to_file ? static_cast<std::ostream&>(file) : std::cout; }
};

struct Options {
  std::string config_path;
  std::string out_path;
  std::optional<std::uint64_t> seed_override;
};

std::uint64_t pick_seed(const json& cfg, const Options& opt) {
  if (opt.seed_override) return *opt.seed_override;
  return get_count_or(cfg, "seed", 1);
}

int run_transforms(const json& cfg, const Options& opt) {
  check_keys(cfg, {"measure", "z_grid", "theta_grid"}, "transforms config");
  const sphint::DiscreteMeasure mu =
      parse_measure(require_field(cfg, "measure", "transforms config"), "measure");
  const std::vector<double> zs = get_list_or(cfg, "z_grid");
  const std::vector<double> thetas = get_list_or(cfg, "theta_grid");
  std::ostringstream rows;
  for (double z : zs) {
    const auto g = sphint::stieltjes(mu, z);
    rows << "stieltjes," << fmt(z) << "," << fmt(g.value) << "\n";
    const auto t = sphint::t_transform(mu, z);
    rows << "t_transform," << fmt(z) << "," << fmt(t.value) << "\n";
  }
  for (double th : thetas)
    rows << "s_tilde," << fmt(th) << "," << fmt(sphint::s_tilde(mu, th)) << "\n";
  Output out(opt.out_path);
  out.stream() << "quantity,point,value\n" << rows.str();
  std::fprintf(stderr, "[sphint] transforms: %zu z points, %zu theta points\n", zs.size(),
               thetas.size());
  return 0;
}

int run_rate(const json& cfg, const Options& opt) {
  check_keys(cfg, {"measure", "thetas", "lower_outliers", "upper_outliers"}, "rate config");
  const sphint::DiscreteMeasure mu =
      parse_measure(require_field(cfg, "measure", "rate config"), "measure");
  const sphint::ThetaVector thetas(
      as_number_list(require_field(cfg, "thetas", "rate config"), "thetas"));
  const sphint::OutlierSet outliers(get_list_or(cfg, "lower_outliers"),
                                    get_list_or(cfg, "upper_outliers"));
  const sphint::RateResult res = sphint::rate_multi(thetas, outliers, mu);
  for (const auto& c : res.components)
    std::fprintf(stderr, "[sphint] theta=%-10s lambda=%-10s c=%-14s %-13s J=%s\n",
                 fmt(c.theta).c_str(), fmt(c.lambda).c_str(), fmt(c.c).c_str(),
                 sphint::regime_name(c.regime), fmt(c.j_value).c_str());
  std::fprintf(stderr, "[sphint] total J = %s\n", fmt(res.total).c_str());
  Output out(opt.out_path);
  out.stream() << json(res).dump(2) << "\n";
  return 0;
}

int run_variational(const json& cfg, const Options& opt) {
  check_keys(cfg, {"measure", "theta", "top_weight_zero", "check_iters", "step", "seed"},
             "variational config");
  const sphint::DiscreteMeasure mu =
      parse_measure(require_field(cfg, "measure", "variational config"), "measure");
  const double theta = get_number(cfg, "theta", "variational config");
  bool top_zero = false;
  if (auto it = cfg.find("top_weight_zero"); it != cfg.end()) {
    if (!it->is_boolean()) throw SchemaFail("field \"top_weight_zero\" must be a boolean");
    top_zero = it->get<bool>();
  }
  const sphint::VariationalSolution sol = sphint::solve_rank1(theta, mu, top_zero);
  json j = sol;
  const std::uint64_t check_iters = get_count_or(cfg, "check_iters", 0);
  if (check_iters > 0) {
    double step = 0.1;
    if (auto it = cfg.find("step"); it != cfg.end()) step = as_number(*it, "step");
    const auto chk = sphint::maximize_simplex(theta, mu, check_iters, step, pick_seed(cfg, opt));
    j["simplex_f"] = chk.f_value;
    j["simplex_agreement"] = std::abs(chk.f_value - sol.f_value);
    std::fprintf(stderr, "[sphint] simplex cross-check: |f - f_closed| = %s\n",
                 fmt(std::abs(chk.f_value - sol.f_value)).c_str());
  }
  std::fprintf(stderr, "[sphint] variational: regime=%s c=%s f=%s\n",
               sphint::regime_name(sol.regime), fmt(sol.c).c_str(), fmt(sol.f_value).c_str());
  Output out(opt.out_path);
  out.stream() << j.dump(2) << "\n";
  return 0;
}

sphint::SpectrumSpec parse_spectrum(const json& cfg, const std::string& ctx) {
  return sphint::SpectrumSpec(parse_measure(require_field(cfg, "bulk", ctx), "bulk"),
                              get_list_or(cfg, "lower_outliers"),
                              get_list_or(cfg, "upper_outliers"),
                              static_cast<std::size_t>(get_count(cfg, "N", ctx)),
                              parse_beta(cfg, ctx));
}

int run_mc(const json& cfg, const Options& opt) {
  check_keys(cfg,
             {"bulk", "lower_outliers", "upper_outliers", "N", "beta", "thetas", "estimator",
              "n_samples", "n_batches", "seed"},
             "mc config");
  const sphint::SpectrumSpec spec = parse_spectrum(cfg, "mc config");
  const sphint::ThetaVector thetas(
      as_number_list(require_field(cfg, "thetas", "mc config"), "thetas"));
  const std::size_t n_samples = static_cast<std::size_t>(get_count(cfg, "n_samples", "mc config"));
  const std::size_t n_batches = static_cast<std::size_t>(get_count_or(cfg, "n_batches", 32));
  const std::uint64_t seed = pick_seed(cfg, opt);
  std::string estimator = "haar";
  if (auto it = cfg.find("estimator"); it != cfg.end()) {
    if (!it->is_string()) throw SchemaFail("field \"estimator\" must be a string");
    estimator = it->get<std::string>();
  }

  sphint::McEstimate est;
  if (estimator == "haar") {
    est = sphint::estimate_In(spec, thetas, n_samples, n_batches, seed);
  } else if (estimator == "dirichlet") {
    if (thetas.k() != 1) throw sphint::DomainError("dirichlet estimator needs a single theta");
    est = sphint::estimate_In_rank1_dirichlet(spec, thetas.values()[0], n_samples, seed,
                                              n_batches);
  } else if (estimator == "tilted") {
    if (thetas.k() != 1) throw sphint::DomainError("tilted estimator needs a single theta");
    const auto [values, counts] = sphint::grouped_spectrum(spec);
    std::vector<double> w(values.size());
    for (std::size_t i = 0; i < counts.size(); ++i)
      w[i] = static_cast<double>(counts[i]) / static_cast<double>(spec.N);
    const auto tilt =
        sphint::solve_rank1(thetas.values()[0], sphint::DiscreteMeasure(values, w));
    est = sphint::estimate_In_tilted(spec, thetas.values()[0], tilt.gamma_star, n_samples, seed,
                                     n_batches);
    if (est.low_ess)
      std::fprintf(stderr, "[sphint] warning: low effective sample size (%.1f of %zu)\n",
                   est.ess, n_samples);
  } else {
    throw SchemaFail("field \"estimator\" must be one of haar|dirichlet|tilted");
  }
  std::fprintf(stderr, "[sphint] mc %s: estimate=%s stderr=%s\n", estimator.c_str(),
               fmt(est.log_mean_per_n).c_str(), fmt(est.std_error).c_str());
  Output out(opt.out_path);
  out.stream() << "estimator,N,k,beta,estimate,stderr,ess,n_samples,n_batches\n";
  out.stream() << estimator << "," << spec.N << "," << thetas.k() << ","
               << sphint::beta_value(spec.beta) << "," << fmt(est.log_mean_per_n) << ","
               << fmt(est.std_error) << "," << fmt(est.ess) << "," << est.n_samples << ","
               << est.n_batches << "\n";
  return 0;
}

int run_converge(const json& cfg, const Options& opt) {
  check_keys(cfg,
             {"bulk", "lower_outliers", "upper_outliers", "beta", "thetas", "N_list",
              "samples_per_N", "n_batches", "seed"},
             "converge config");
  const sphint::DiscreteMeasure bulk =
      parse_measure(require_field(cfg, "bulk", "converge config"), "bulk");
  const std::vector<double> lower = get_list_or(cfg, "lower_outliers");
  const std::vector<double> upper = get_list_or(cfg, "upper_outliers");
  const sphint::Beta beta = parse_beta(cfg, "converge config");
  const sphint::ThetaVector thetas(
      as_number_list(require_field(cfg, "thetas", "converge config"), "thetas"));
  const json& nl = require_field(cfg, "N_list", "converge config");
  if (!nl.is_array()) throw SchemaFail("field \"N_list\" must be an array of integers");
  std::vector<std::size_t> n_list;
  for (const auto& v : nl) n_list.push_back(static_cast<std::size_t>(as_count(v, "N_list")));
  const std::size_t samples =
      static_cast<std::size_t>(get_count(cfg, "samples_per_N", "converge config"));
  const std::size_t n_batches = static_cast<std::size_t>(get_count_or(cfg, "n_batches", 32));

  const auto rows = sphint::convergence_study(bulk, lower, upper, beta, n_list, thetas, samples,
                                              n_batches, pick_seed(cfg, opt));
  Output out(opt.out_path);
  out.stream() << "N,estimate,stderr,target,gap\n";
  for (const auto& r : rows) {
    out.stream() << r.N << "," << fmt(r.estimate.log_mean_per_n) << ","
                 << fmt(r.estimate.std_error) << "," << fmt(r.j_target) << "," << fmt(r.gap)
                 << "\n";
    std::fprintf(stderr, "[sphint] N=%-5zu estimate=%-14s gap=%s\n", r.N,
                 fmt(r.estimate.log_mean_per_n).c_str(), fmt(r.gap).c_str());
  }
  return 0;
}

// Position-dependence of the theta support: theta' = (0,...,0,1) probes the
// smallest eigenvalue direction, so its limit is (beta/2) int log x dmu for
// every spike, while theta = (1) at an upper spike lambda gives
// (beta/2) J(1, lambda, mu). The Monte Carlo side uses the exact identity
// I_N(theta', X) = I_N((-1), X^{-1}).
int run_asymmetry(const json& cfg, const Options& opt) {
  check_keys(cfg, {"bulk", "lambda", "N", "beta", "n_samples", "n_batches", "seed"},
             "asymmetry config");
  const sphint::DiscreteMeasure bulk =
      parse_measure(require_field(cfg, "bulk", "asymmetry config"), "bulk");
  const double lambda = get_number(cfg, "lambda", "asymmetry config");
  const std::size_t n = static_cast<std::size_t>(get_count(cfg, "N", "asymmetry config"));
  const sphint::Beta beta = parse_beta(cfg, "asymmetry config");
  const std::size_t n_samples =
      static_cast<std::size_t>(get_count(cfg, "n_samples", "asymmetry config"));
  const std::size_t n_batches = static_cast<std::size_t>(get_count_or(cfg, "n_batches", 32));
  const double half_beta = 0.5 * sphint::beta_value(beta);

  const double b_target = half_beta * bulk.log_moment();
  const double c_target = half_beta * sphint::rate_single(1.0, lambda, bulk).j_value;

  // theta' = (0,...,0,1) on X equals theta = (-1) on X^{-1} sample by sample.
  const sphint::DiscreteMeasure inv_bulk = sphint::pushforward_inverse(bulk);
  sphint::SpectrumSpec inv_spec(inv_bulk, {1.0 / lambda}, {}, n, beta);
  const sphint::McEstimate est = sphint::estimate_In(inv_spec, sphint::ThetaVector({-1.0}),
                                                     n_samples, n_batches, pick_seed(cfg, opt));

  const bool spike = lambda > bulk.support_max();
  json report{{"mc_last_coordinate", est.log_mean_per_n},
              {"mc_stderr", est.std_error},
              {"log_moment_target", b_target},
              {"rate_target", c_target},
              {"asymmetry_gap", c_target - b_target},
              {"spike", spike}};
  std::fprintf(stderr, "[sphint] asymmetry: a=%s b=%s c=%s%s\n",
               fmt(est.log_mean_per_n).c_str(), fmt(b_target).c_str(), fmt(c_target).c_str(),
               spike ? "" : " (vacuous: lambda is not a spike)");
  Output out(opt.out_path);
  out.stream() << report.dump(2) << "\n";
  return spike ? 0 : 3;
}

int dispatch(const std::string& cmd, const Options& opt) {
  const json cfg = load_config(opt.config_path);
  if (cmd == "transforms") return run_transforms(cfg, opt);
  if (cmd == "rate") return run_rate(cfg, opt);
  if (cmd == "variational") return run_variational(cfg, opt);
  if (cmd == "mc") return run_mc(cfg, opt);
  if (cmd == "converge") return run_converge(cfg, opt);
  return run_asymmetry(cfg, opt);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"multiplicative spherical integral toolkit"};
  app.require_subcommand(1);
  Options opt;
  std::uint64_t seed_flag = 0;
  std::vector<CLI::App*> subs;
  for (const char* name : {"transforms", "rate", "variational", "mc", "converge", "asymmetry"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", opt.config_path, "JSON experiment config")->required();
    sub->add_option("--out", opt.out_path, "result file (default: stdout)");
    sub->add_option("--seed", seed_flag, "override the config seed");
    subs.push_back(sub);
  }
  CLI11_PARSE(app, argc, argv);
  const CLI::App* active = app.get_subcommands().front();
  if (active->count("--seed") > 0) opt.seed_override = seed_flag;

  try {
    return dispatch(active->get_name(), opt);
  } catch (const SchemaFail& e) {
    std::fprintf(stderr, "[sphint] config error: %s\n", e.what());
    return 2;
  } catch (const sphint::DomainError& e) {
    std::fprintf(stderr, "[sphint] domain error: %s\n", e.what());
    return 3;
  } catch (const sphint::RangeError& e) {
    std::fprintf(stderr, "[sphint] domain error: %s\n", e.what());
    return 3;
  } catch (const sphint::SingularError& e) {
    std::fprintf(stderr, "[sphint] domain error: %s\n", e.what());
    return 3;
  } catch (const sphint::SizeError& e) {
    std::fprintf(stderr, "[sphint] domain error: %s\n", e.what());
    return 3;
  } catch (const sphint::Error& e) {
    std::fprintf(stderr, "[sphint] computation error: %s\n", e.what());
    return 4;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "[sphint] unexpected error: %s\n", e.what());
    return 4;
  }
}
