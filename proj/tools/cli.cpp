#include "cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <set>

#include "skewifs/bellman.hpp"
#include "skewifs/ergopt.hpp"
#include "skewifs/errors.hpp"
#include "skewifs/io.hpp"
#include "skewifs/rng.hpp"
#include "skewifs/skew.hpp"
#include "skewifs/srb.hpp"
#include "skewifs/verify.hpp"

namespace skewifs::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::set<std::string> kKeys = {"lambda",  "potentials", "grid_n",     "seed",        "burn_in",
                                     "n_points", "tol",       "lambda_schedule", "oracle_len", "x0",
                                     "y0",       "control",   "srb_samples", "n_trials",   "n_steps",
                                     "enum_depth", "enum_grid", "epsilon"};

double get_real(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_number()) throw ConfigError(std::string("config key '") + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t get_count(const json& doc, const char* key) {
  const json& v = doc.at(key);
  if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError(std::string("config key '") + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string fmt(double v) { return io::format_double(v); }

json estimate_json(const SrbEstimate& e) {
  return json{{"statistic", e.statistic}, {"mean", e.mean},       {"std_error", e.std_error},
              {"bias_bound", e.bias_bound}, {"n_samples", e.n_samples}, {"depth", e.depth},
              {"seed", e.seed}};
}

Eigen::MatrixXd grid_rows(const GridFunction<double>& v) {
  Eigen::MatrixXd rows(v.n_points(), 2);
  for (Eigen::Index i = 0; i < v.n_points(); ++i) rows.row(i) << GridFunction<double>::node(i, v.n_points()), v[i];
  return rows;
}

io::Polyline outline(const GridFunction<double>& v, const std::string& color) {
  const Eigen::Index step = std::max<Eigen::Index>(1, v.n_points() / 2048);
  const Eigen::Index count = v.n_points() / step + 1;
  io::Polyline line;
  line.color = color;
  line.points.resize(count, 2);
  for (Eigen::Index k = 0; k < count; ++k) {
    const double x = std::min(1.0, static_cast<double>(k * step) / static_cast<double>(v.n_points()));
    line.points.row(k) << x, v(x == 1.0 ? 0.0 : x);
  }
  return line;
}

class Runner {
 public:
  Runner(RunConfig cfg, fs::path out_dir, unsigned workers, std::ostream& out)
      : cfg_(std::move(cfg)), out_dir_(std::move(out_dir)), workers_(workers), out_(out) {
    try {
      f_ = parse_family(cfg_.potentials);
    } catch (const PotentialParseError& e) {
      throw ConfigError(std::string("potentials: ") + e.what());
    }
    for (int s : cfg_.control)
      if (s >= f_.size()) throw ConfigError("control symbol " + std::to_string(s) + " outside the potential family");
    config_doc_ = to_json(cfg_);
    hash_ = io::fnv1a_hex(config_doc_.dump());
  }

  int dispatch(const std::string& sub) {
    if (sub == "orbit") return orbit_cmd();
    if (sub == "attractor") return attractor_cmd();
    if (sub == "boundary") return boundary_cmd();
    if (sub == "srb") return srb_cmd();
    if (sub == "optimize") return optimize_cmd();
    if (sub == "limit") return limit_cmd();
    return verify_cmd();
  }

 private:
  json provenance(const std::string& command, const std::string& output) const {
    return json{{"command", command}, {"output", output}, {"config", config_doc_}, {"config_hash", hash_},
                {"seed", cfg_.seed}};
  }

  void emit_csv(const std::string& command, const std::string& stem, const std::vector<std::string>& header,
                const Eigen::MatrixXd& rows, json extra) {
    const std::string csv = stem + ".csv";
    io::write_csv(out_dir_ / csv, header, rows);
    json doc = provenance(command, csv);
    doc["rows"] = rows.rows();
    for (auto& [k, v] : extra.items()) doc[k] = v;
    io::write_json(out_dir_ / (stem + ".json"), doc);
    out_ << "wrote " << (out_dir_ / csv).string() << " (" << rows.rows() << " rows)\n";
  }

  GridFunction<double> solve(Extremum sign) const {
    SolveOptions opts;
    opts.n = cfg_.grid_n;
    return solve_value(f_, cfg_.lambda, sign, cfg_.tol, opts);
  }

  int orbit_cmd() {
    const SymbolStream controls = cfg_.control.empty()
                                      ? SymbolStream::random(f_.size(), derive_seed(cfg_.seed, 2, 0))
                                      : SymbolStream::repeating(cfg_.control, f_.size());
    const PointCloud cloud = orbit(exact_decimal(cfg_.x0), cfg_.y0, controls, cfg_.burn_in + cfg_.n_points,
                                   cfg_.burn_in, f_, cfg_.lambda);
    const double t0 = annulus_bound(f_, cfg_.lambda);
    json extra{{"lambda", cfg_.lambda},
               {"x0", cfg_.x0},
               {"y0", cfg_.y0},
               {"controls", cfg_.control.empty() ? json("iid") : json(cfg_.control)},
               {"annulus_T0", t0},
               {"absorption_steps", absorption_steps(f_, cfg_.lambda, std::abs(cfg_.y0), t0)}};
    emit_csv("orbit", "orbit", {"x", "y"}, cloud.points, extra);
    io::write_svg(out_dir_ / "orbit.svg", "orbit, lambda=" + fmt(cfg_.lambda), cloud.points);
    return kOk;
  }

  int attractor_cmd() {
    ChaosOptions chaos;
    chaos.n_points = cfg_.n_points;
    chaos.burn_in = cfg_.burn_in;
    chaos.seed = cfg_.seed;
    chaos.y0 = cfg_.y0;
    const PointCloud cloud = lambda_cloud_chaos(f_, cfg_.lambda, chaos);
    json meta(cloud.meta);
    meta["error_radius"] = cloud.error_radius;
    emit_csv("attractor", "attractor_chaos", {"x", "y"}, cloud.points, json{{"lambda", cfg_.lambda}, {"meta", meta}});

    const PointCloud grid = lambda_cloud_enumerate(f_, cfg_.lambda, cfg_.enum_depth, cfg_.enum_grid,
                                                   std::size_t{1} << 24, workers_);
    json gmeta(grid.meta);
    gmeta["error_radius"] = grid.error_radius;
    emit_csv("attractor", "attractor_enumerate", {"x", "y"}, grid.points,
             json{{"lambda", cfg_.lambda}, {"meta", gmeta}});
    io::write_svg(out_dir_ / "attractor.svg", "chaos game, lambda=" + fmt(cfg_.lambda), cloud.points);
    return kOk;
  }

  int boundary_cmd() {
    const GridFunction<double> vp = solve(Extremum::max);
    const GridFunction<double> vm = solve(Extremum::min);
    for (const auto& [stem, v] : {std::pair{"boundary_plus", &vp}, std::pair{"boundary_minus", &vm}}) {
      emit_csv("boundary", stem, {"x", "v"}, grid_rows(*v),
               json{{"lambda", cfg_.lambda}, {"N", v->n_points()}, {"tol", v->tol().value_or(0.0)},
                    {"iterations", v->iterations()}});
    }
    io::write_svg(out_dir_ / "boundary.svg", "boundaries of the invariant set, lambda=" + fmt(cfg_.lambda),
                  Eigen::Matrix<double, Eigen::Dynamic, 2>(0, 2), {outline(vp, "crimson"), outline(vm, "navy")});
    return kOk;
  }

  int srb_cmd() {
    const SrbEstimate ey = sample_srb(f_, cfg_.lambda, Observable::y(), cfg_.srb_samples, cfg_.tol, cfg_.seed, workers_);
    const SrbEstimate eb = sample_srb(f_, cfg_.lambda, Observable::potential_of_past(f_), cfg_.srb_samples, cfg_.tol,
                                      cfg_.seed, workers_);
    const BirkhoffResult b =
        birkhoff_experiment(f_, cfg_.lambda, cfg_.n_steps, cfg_.n_trials, cfg_.seed, cfg_.srb_samples, cfg_.tol, workers_);
    const GridFunction<double> vp = solve(Extremum::max);
    const GridFunction<double> vm = solve(Extremum::min);

    json doc = provenance("srb", "srb.json");
    doc["lambda"] = cfg_.lambda;
    doc["estimates"] = json::array({estimate_json(ey), estimate_json(eb)});
    doc["lebesgue_bounds"] = json{{"lower", vm.mean() - vm.tol().value_or(0.0)},
                                  {"upper", vp.mean() + vp.tol().value_or(0.0)}};
    doc["birkhoff"] = json{{"n_steps", cfg_.n_steps},     {"n_trials", cfg_.n_trials}, {"averages", b.averages},
                           {"reference", b.reference},    {"reference_se", b.reference_se},
                           {"reference_bias", b.reference_bias}, {"trial_sigma", b.trial_sigma},
                           {"band", b.band},              {"outside", b.outside}};
    io::write_json(out_dir_ / "srb.json", doc);
    out_ << "y: " << fmt(ey.mean) << " +- " << fmt(ey.std_error) << "\n"
         << "A_b(x): " << fmt(eb.mean) << " +- " << fmt(eb.std_error) << "\n"
         << "wrote " << (out_dir_ / "srb.json").string() << "\n";
    return kOk;
  }

  int optimize_cmd() {
    const GridFunction<double> v = solve(Extremum::max);
    const double tol = v.tol().value_or(0.0);
    const Eigen::Index z = v.argmax();
    const double zx = GridFunction<double>::node(z, v.n_points());
    const CirclePoint x0 = CirclePoint::rational(static_cast<std::uint64_t>(z), static_cast<std::uint64_t>(v.n_points()));
    constexpr double tail = 1e-12;
    const OptimalPath path = optimal_sequences(v, f_, cfg_.lambda, x0, discounted_truncation(cfg_.lambda, tail));
    const EmpiricalMeasure mu = empirical_discounted(x0, path.ctrl, cfg_.lambda, tail);
    const double tail_mass = std::get<EmpiricalMeasure::Discounted>(mu.kind).tail_mass;

    Eigen::MatrixXd rows(mu.size(), 4);
    rows << mu.x, mu.c.cast<double>(), mu.a.cast<double>(), mu.w;
    emit_csv("optimize", "measure", {"x", "c", "a", "w"}, rows,
             json{{"lambda", cfg_.lambda}, {"kind", "discounted"}, {"tail_mass", tail_mass}, {"x0", zx}});

    const double m_lambda = (1.0 - cfg_.lambda) * v.max();
    const double payoff = integrate_payoff(mu, f_);
    json doc = provenance("optimize", "optimize.json");
    doc["lambda"] = cfg_.lambda;
    doc["N"] = v.n_points();
    doc["tol"] = tol;
    doc["m_lambda"] = m_lambda;
    doc["argmax_x"] = zx;
    doc["payoff"] = payoff;
    doc["identity_gap"] = std::abs(payoff - m_lambda);
    doc["combined_tol"] = 2.0 * tol + 2.0 * tail_mass * f_.sup_norm() / (1.0 - tail_mass);
    doc["discounted_holonomy_defect"] = discounted_holonomy_defect(mu, TraceMeasure::dirac(zx), cfg_.lambda);
    doc["support_residual"] = support_check_discounted(mu, v, f_, cfg_.lambda);
    doc["support_bound"] = 2.0 * tol + value_lipschitz_bound(f_, cfg_.lambda) / (2.0 * static_cast<double>(v.n_points()));
    const Subaction s = subaction(v, f_, cfg_.lambda);
    doc["subaction_residual"] = s.residual;
    doc["cycle_oracle"] = cycle_oracle(f_, cfg_.oracle_len, workers_).value;
    io::write_json(out_dir_ / "optimize.json", doc);
    out_ << "m_lambda = " << fmt(m_lambda) << " (tol " << fmt(tol) << ")\n"
         << "wrote " << (out_dir_ / "optimize.json").string() << "\n";
    return kOk;
  }

  int limit_cmd() {
    ScheduleOptions opts;
    opts.grid_n = {cfg_.grid_n};
    opts.change_tol = cfg_.tol;
    opts.oracle_len = cfg_.oracle_len;
    opts.workers = workers_;
    const std::vector<ScheduleRow> rows = discount_limit_schedule(f_, cfg_.lambda_schedule, opts);
    Eigen::MatrixXd table(static_cast<Eigen::Index>(rows.size()), 5);
    json details = json::array();
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const ScheduleRow& r = rows[i];
      table.row(static_cast<Eigen::Index>(i)) << r.lambda, r.umax, r.ulebesgue, r.oracle, r.gap;
      details.push_back(json{{"lambda", r.lambda}, {"tol", r.tol}, {"N", r.n}, {"iterations", r.iterations},
                             {"bracket", {r.oracle, r.umax + r.tol}}, {"subaction_residual", r.subaction_residual}});
    }
    emit_csv("limit", "limit", {"lambda", "umax", "ulebesgue", "oracle", "gap"}, table,
             json{{"rows_detail", details}, {"oracle_len", cfg_.oracle_len}});
    return kOk;
  }

  int verify_cmd() {
    VerifyInputs in;
    in.f = f_;
    in.lambda = cfg_.lambda;
    in.grid_n = cfg_.grid_n;
    in.seed = cfg_.seed;
    in.tol = cfg_.tol;
    in.n_points = cfg_.n_points;
    in.burn_in = cfg_.burn_in;
    in.oracle_len = cfg_.oracle_len;
    in.srb_samples = cfg_.srb_samples;
    in.workers = workers_;
    const std::vector<CheckResult> results = run_property_suite(in);
    bool ok = true;
    json checks = json::array();
    for (const CheckResult& r : results) {
      out_ << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << "\n";
      ok = ok && r.passed;
      checks.push_back(json{{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
    }
    json doc = provenance("verify", "verify.json");
    doc["checks"] = checks;
    doc["passed"] = ok;
    io::write_json(out_dir_ / "verify.json", doc);
    return ok ? kOk : kVerifyFailed;
  }

  RunConfig cfg_;
  fs::path out_dir_;
  unsigned workers_;
  std::ostream& out_;
  PotentialFamily f_;
  json config_doc_;
  std::string hash_;
};

}  // namespace

RunConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, value] : doc.items())
    if (!kKeys.count(key)) throw ConfigError("unknown config key '" + key + "'");
  RunConfig cfg;
  if (doc.contains("lambda")) cfg.lambda = get_real(doc, "lambda");
  if (doc.contains("potentials")) {
    if (!doc["potentials"].is_string()) throw ConfigError("config key 'potentials' must be a string");
    cfg.potentials = doc["potentials"].get<std::string>();
  }
  if (doc.contains("grid_n")) cfg.grid_n = static_cast<long>(get_count(doc, "grid_n"));
  if (doc.contains("seed")) cfg.seed = get_count(doc, "seed");
  if (doc.contains("burn_in")) cfg.burn_in = get_count(doc, "burn_in");
  if (doc.contains("n_points")) cfg.n_points = get_count(doc, "n_points");
  if (doc.contains("tol")) cfg.tol = get_real(doc, "tol");
  if (doc.contains("lambda_schedule")) {
    const json& s = doc["lambda_schedule"];
    if (!s.is_array()) throw ConfigError("config key 'lambda_schedule' must be an array of numbers");
    cfg.lambda_schedule.clear();
    for (const json& v : s) {
      if (!v.is_number()) throw ConfigError("config key 'lambda_schedule' must be an array of numbers");
      cfg.lambda_schedule.push_back(v.get<double>());
    }
  }
  if (doc.contains("oracle_len")) cfg.oracle_len = static_cast<unsigned>(get_count(doc, "oracle_len"));
  if (doc.contains("x0")) cfg.x0 = get_real(doc, "x0");
  if (doc.contains("y0")) cfg.y0 = get_real(doc, "y0");
  if (doc.contains("control")) {
    const json& s = doc["control"];
    if (!s.is_array()) throw ConfigError("config key 'control' must be an array of symbols");
    for (const json& v : s) {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw ConfigError("config key 'control' must be an array of symbols");
      cfg.control.push_back(v.get<int>());
    }
  }
  if (doc.contains("srb_samples")) cfg.srb_samples = get_count(doc, "srb_samples");
  if (doc.contains("n_trials")) cfg.n_trials = get_count(doc, "n_trials");
  if (doc.contains("n_steps")) cfg.n_steps = get_count(doc, "n_steps");
  if (doc.contains("enum_depth")) cfg.enum_depth = static_cast<unsigned>(get_count(doc, "enum_depth"));
  if (doc.contains("enum_grid")) cfg.enum_grid = get_count(doc, "enum_grid");
  if (doc.contains("epsilon")) cfg.epsilon = get_real(doc, "epsilon");
  validate(cfg);
  return cfg;
}

void validate(const RunConfig& cfg) {
  if (!(cfg.lambda > 0.0 && cfg.lambda < 1.0)) throw ConfigError("lambda must lie in (0, 1)");
  if (cfg.grid_n < 16 || cfg.grid_n % 2 != 0) throw ConfigError("grid_n must be even and at least 16");
  if (!(cfg.tol > 0.0)) throw ConfigError("tol must be positive");
  if (cfg.lambda_schedule.empty()) throw ConfigError("lambda_schedule must not be empty");
  for (std::size_t i = 0; i < cfg.lambda_schedule.size(); ++i) {
    const double l = cfg.lambda_schedule[i];
    if (!(l > 0.0 && l < 1.0)) throw ConfigError("lambda_schedule entries must lie in (0, 1)");
    if (i > 0 && !(l > cfg.lambda_schedule[i - 1])) throw ConfigError("lambda_schedule must be strictly increasing");
  }
  if (cfg.oracle_len < 1 || cfg.oracle_len > 16) throw ConfigError("oracle_len must lie in [1, 16]");
  if (cfg.n_points < 1) throw ConfigError("n_points must be positive");
  if (cfg.srb_samples < 100) throw ConfigError("srb_samples must be at least 100");
  if (cfg.n_trials < 2) throw ConfigError("n_trials must be at least 2");
  if (cfg.n_steps < 1000) throw ConfigError("n_steps must be at least 1000");
  if (cfg.enum_grid < 1) throw ConfigError("enum_grid must be positive");
  if (!(cfg.epsilon > 0.0)) throw ConfigError("epsilon must be positive");
  if (!std::isfinite(cfg.x0) || !std::isfinite(cfg.y0)) throw ConfigError("x0 and y0 must be finite");
}

json to_json(const RunConfig& cfg) {
  return json{{"lambda", cfg.lambda},         {"potentials", cfg.potentials}, {"grid_n", cfg.grid_n},
              {"seed", cfg.seed},             {"burn_in", cfg.burn_in},       {"n_points", cfg.n_points},
              {"tol", cfg.tol},               {"lambda_schedule", cfg.lambda_schedule},
              {"oracle_len", cfg.oracle_len}, {"x0", cfg.x0},                 {"y0", cfg.y0},
              {"control", cfg.control},       {"srb_samples", cfg.srb_samples}, {"n_trials", cfg.n_trials},
              {"n_steps", cfg.n_steps},       {"enum_depth", cfg.enum_depth}, {"enum_grid", cfg.enum_grid},
              {"epsilon", cfg.epsilon}};
}

CirclePoint exact_decimal(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  std::string_view text(buf, static_cast<std::size_t>(res.ptr - buf));
  bool negative = false;
  if (!text.empty() && text.front() == '-') {
    negative = true;
    text.remove_prefix(1);
  }
  int exponent = 0;
  if (const auto e = text.find('e'); e != std::string_view::npos) {
    std::from_chars(text.data() + e + 1 + (text[e + 1] == '+'), text.data() + text.size(), exponent);
    text = text.substr(0, e);
  }
  unsigned __int128 digits = 0;
  int fraction = 0;
  bool after_point = false;
  for (char ch : text) {
    if (ch == '.') {
      after_point = true;
      continue;
    }
    digits = digits * 10 + static_cast<unsigned>(ch - '0');
    if (after_point) ++fraction;
  }
  const int scale = fraction - exponent;  // x = digits / 10^scale
  if (scale <= 0) return CirclePoint();
  if (scale > 18) return CirclePoint::from_double(x);
  std::uint64_t den = 1;
  for (int i = 0; i < scale; ++i) den *= 10;
  auto num = static_cast<std::uint64_t>(digits % den);
  if (negative && num != 0) num = den - num;
  return CirclePoint::rational(num, den);
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Skew-product IFS attractors and ergodic optimization", "skewifs"};
  std::string sub;
  std::string config_path;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::string out_dir = ".";
  unsigned workers = 1;
  app.add_option("subcommand", sub, "orbit | attractor | boundary | srb | optimize | limit | verify")
      ->required()
      ->check(CLI::IsMember({"orbit", "attractor", "boundary", "srb", "optimize", "limit", "verify"}));
  app.add_option("--config", config_path, "JSON configuration file")->required();
  auto* lambda_opt = app.add_option("--lambda", lambda, "override the discount");
  auto* seed_opt = app.add_option("--seed", seed, "override the seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--workers", workers, "parallel width (results do not depend on it)")->check(CLI::Range(1U, 256U));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kConfigError;
  }

  try {
    std::ifstream in(config_path);
    if (!in) throw ConfigError("cannot read config file " + config_path);
    json doc;
    try {
      doc = json::parse(in);
    } catch (const json::exception& e) {
      throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    RunConfig cfg = parse_config(doc);
    if (lambda_opt->count() > 0) cfg.lambda = lambda;
    if (seed_opt->count() > 0) cfg.seed = seed;
    validate(cfg);
    Runner runner(std::move(cfg), out_dir, workers, out);
    return runner.dispatch(sub);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const BudgetError& e) {
    err << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const NumericError& e) {
    err << "numeric error: " << e.what() << "\n";
    return kNumericError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumericError;
  }
}

}  // namespace skewifs::cli
