#include "cli.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>

#include "toricq/balance.hpp"
#include "toricq/error.hpp"
#include "toricq/format.hpp"
#include "toricq/measures.hpp"
#include "toricq/metric.hpp"
#include "toricq/polytope.hpp"
#include "toricq/qfunctionals.hpp"
#include "toricq/quantization.hpp"
#include "toricq/vectorfield.hpp"

namespace toricq::cli {

namespace {

using Json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string polytope;
  int level = 1;
  std::string levels;
  double tol = 0.0;  // 0: command default
  int max_iter = 0;  // 0: command default
  double damping = 1.0;
  std::string grid = "-4,4,33";
  std::string out_dir;
  std::string metric;
};

struct GridSpec {
  double lo = -4.0;
  double hi = 4.0;
  int npts = 33;
};

GridSpec parse_grid(const std::string& text) {
  GridSpec g;
  char c1 = 0;
  char c2 = 0;
  std::istringstream is(text);
  if (!(is >> g.lo >> c1 >> g.hi >> c2 >> g.npts) || c1 != ',' || c2 != ',' || !(g.lo < g.hi) || g.npts < 2) {
    throw UsageError("--grid expects \"min,max,npts\" with min < max and npts >= 2");
  }
  return g;
}

Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// Everything a command produces: the stdout document and files for --out.
struct Output {
  std::string stdout_text;
  std::vector<std::pair<std::string, std::string>> files;
};

class Runner {
 public:
  explicit Runner(const RunConfig& cfg) : cfg_(cfg) {}

  const ReflexivePolytope& polytope() {
    if (!P_) P_ = load_polytope(cfg_.polytope);
    return *P_;
  }

  int level() const {
    if (cfg_.level < 1) throw UsageError("--level must be >= 1");
    return cfg_.level;
  }

  std::vector<int> levels(const std::string& fallback) const {
    const auto ks = parse_levels(cfg_.levels.empty() ? fallback : cfg_.levels);
    for (int k : ks) {
      if (k < 1) throw UsageError("levels must be >= 1");
    }
    return ks;
  }

  double tol(double fallback) const {
    const double t = cfg_.tol > 0.0 ? cfg_.tol : fallback;
    if (!(t > 0.0 && t <= 1e-2)) throw UsageError("--tol must lie in (0, 1e-2]");
    return t;
  }

  int max_iter(int fallback) const {
    if (cfg_.max_iter < 0) throw UsageError("--max-iter must be positive");
    return cfg_.max_iter > 0 ? cfg_.max_iter : fallback;
  }

  double damping() const {
    if (!(cfg_.damping > 0.0 && cfg_.damping <= 1.0)) throw UsageError("--damping must lie in (0, 1]");
    return cfg_.damping;
  }

  Eigen::MatrixXd sample_points() {
    const GridSpec g = parse_grid(cfg_.grid);
    return sample_grid(polytope().dim(), g.lo, g.hi, g.npts);
  }

  Setting& setting() {
    if (!S_) S_ = std::make_unique<Setting>(polytope());
    return *S_;
  }

  Eigen::VectorXd v_ks() {
    return minimize_F(setting().dh()).V.xi;
  }

 private:
  const RunConfig& cfg_;
  std::optional<ReflexivePolytope> P_;
  std::unique_ptr<Setting> S_;
};

Output cmd_validate(Runner& r) {
  const ReflexivePolytope& P = r.polytope();
  Json j = Json::parse(polytope_to_json(P));
  Json verts = Json::array();
  for (int v = 0; v < P.num_vertices(); ++v) {
    const IntVector c = P.vertices().col(v);
    verts.push_back(std::vector<int>(c.data(), c.data() + c.size()));
  }
  j["vertices"] = verts;
  j["volume"] = P.volume();
  j["N_1"] = lattice_points(P, 1).size();
  j["centrally_symmetric"] = is_centrally_symmetric(P);
  return {dump(j), {{"validate.json", dump(j)}}};
}

Output cmd_weights(Runner& r) {
  const int k = r.level();
  std::ostringstream os;
  write_weights_csv(os, lattice_points(r.polytope(), k));
  return {os.str(), {{"weights_k" + std::to_string(k) + ".csv", os.str()}}};
}

Output cmd_dh_moments(Runner& r) {
  std::ostringstream os;
  write_convergence_csv(os, convergence_report(r.polytope(), r.levels("1..8"), 4));
  return {os.str(), {{"dh_moments.csv", os.str()}}};
}

Output cmd_solve_vk(Runner& r) {
  const int k = r.level();
  NewtonOptions opts;
  opts.tol = r.tol(opts.tol);
  opts.max_iter = r.max_iter(opts.max_iter);
  const WeightSet W = lattice_points(r.polytope(), k);
  const MinimizerResult vk = minimize_Fk(W, opts);
  const MinimizerResult vks = minimize_F(continuous_rule(r.polytope()), opts);
  Json j;
  j["k"] = k;
  j["V_k"] = to_json(vk.V.xi);
  j["F_k_min"] = vk.value;
  j["futaki_residual"] = futaki_residual(W, vk.V.xi);
  j["V_KS"] = to_json(vks.V.xi);
  j["distance"] = (vk.V.xi - vks.V.xi).norm();
  return {dump(j), {{"vk_k" + std::to_string(k) + ".json", dump(j)}}};
}

Output cmd_futaki_expansion(Runner& r) {
  const ReflexivePolytope& P = r.polytope();
  const int n = P.dim();
  const auto ks = r.levels("1.." + std::to_string(n + 3));
  std::ostringstream os;
  for (int j = 0; j < n; ++j) os << "w_" << (j + 1) << ",";
  os << "power,coefficient,fit_residual\n";
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  for (int w = 0; w < n; ++w) {
    const Eigen::VectorXd e = Eigen::VectorXd::Unit(n, w);
    const FutakiExpansion fit = futaki_expansion_fit(P, zero, e, ks);
    for (int i = 0; i < fit.coefficients.size(); ++i) {
      for (int j = 0; j < n; ++j) os << (j == w ? 1 : 0) << ",";
      os << (n + 1 - i) << "," << fmt_double(fit.coefficients[i]) << "," << fmt_double(fit.residual) << "\n";
    }
  }
  return {os.str(), {{"futaki_expansion.csv", os.str()}}};
}

Output cmd_balance(Runner& r, int& status) {
  const int k = r.level();
  BalanceOptions opts;
  opts.tol = r.tol(opts.tol);
  opts.max_iter = r.max_iter(opts.max_iter);
  opts.damping = r.damping();
  const Eigen::MatrixXd points = r.sample_points();
  ReferenceProducts R(r.setting());
  const BalanceResult b = balanced_metric(R, k, opts);
  if (!b.converged) status = kExitNoConvergence;

  Json j;
  j["k"] = k;
  j["V_k"] = to_json(b.V_k);
  j["converged"] = b.converged;
  j["iterations"] = b.state.iterations;
  j["final_residual"] = b.final_residual;
  j["damping"] = b.damping_used;
  j["grid_level"] = b.grid_level;
  j["ding"] = b.state.ding;
  j["ding_nonincreasing"] = b.ding_nonincreasing;

  const std::string tag = "_k" + std::to_string(k);
  std::ostringstream h;
  write_inner_product_csv(h, b.state.H);
  std::ostringstream phi;
  write_metric_grid_csv(phi, b.potential, points);
  std::ostringstream hist;
  write_balance_history_csv(hist, b.state);
  return {dump(j),
          {{"balance" + tag + ".json", dump(j)},
           {"H" + tag + ".csv", h.str()},
           {"phi" + tag + ".csv", phi.str()},
           {"history" + tag + ".csv", hist.str()}}};
}

Output cmd_convergence(Runner& r, int& status) {
  BalanceOptions opts;
  opts.tol = r.tol(opts.tol);
  opts.max_iter = r.max_iter(opts.max_iter);
  opts.damping = r.damping();
  const auto ks = r.levels("1,2,4,8");
  ReferenceProducts R(r.setting());
  const SolitonStudy study = soliton_convergence_study(R, ks, r.sample_points(), opts);
  for (const auto& row : study.rows) {
    if (!row.converged) status = kExitNoConvergence;
  }
  std::ostringstream os;
  write_soliton_study_csv(os, study);
  std::ostringstream vk;
  write_vk_csv(vk, vk_convergence(r.polytope(), ks));
  return {os.str(), {{"soliton_study.csv", os.str()}, {"vk_convergence.csv", vk.str()}}};
}

Output cmd_functional_report(Runner& r, const RunConfig& cfg) {
  Setting& S = r.setting();
  TorusMetric phi = S.phi0();
  if (!cfg.metric.empty()) {
    std::ifstream in(cfg.metric);
    if (!in) throw Error(ErrorCode::MalformedInput, "cannot read metric file " + cfg.metric);
    std::stringstream buf;
    buf << in.rdbuf();
    phi = metric_from_json(buf.str(), r.polytope());
  }
  ReferenceProducts R(S);
  const FunctionalConvergenceTable table = functional_convergence(R, phi, r.v_ks(), r.levels("1,2,4,8"));
  std::ostringstream os;
  write_functional_convergence_csv(os, table);
  return {os.str(), {{"functional_report.csv", os.str()}}};
}

void check_out_dir(const std::string& dir) {
  if (dir.empty()) return;
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const auto probe = std::filesystem::path(dir) / ".toricq_write_probe";
  std::ofstream f(probe);
  if (!f) throw UsageError("--out directory is not writable: " + dir);
  f.close();
  std::filesystem::remove(probe, ec);
}

void write_files(const std::string& dir, const Output& o) {
  if (dir.empty()) return;
  for (const auto& [name, text] : o.files) {
    std::ofstream f(std::filesystem::path(dir) / name, std::ios::binary);
    f << text;
    if (!f) throw UsageError("cannot write " + name + " to " + dir);
  }
}

}  // namespace

std::vector<int> parse_levels(const std::string& text) {
  std::vector<int> ks;
  const auto dots = text.find("..");
  try {
    if (dots != std::string::npos) {
      std::size_t used = 0;
      const int a = std::stoi(text.substr(0, dots), &used);
      if (used != dots) throw std::invalid_argument(text);
      const std::string rest = text.substr(dots + 2);
      const int b = std::stoi(rest, &used);
      if (used != rest.size() || b < a) throw std::invalid_argument(text);
      for (int k = a; k <= b; ++k) ks.push_back(k);
    } else {
      std::istringstream is(text);
      std::string tok;
      while (std::getline(is, tok, ',')) {
        std::size_t used = 0;
        ks.push_back(std::stoi(tok, &used));
        if (used != tok.size()) throw std::invalid_argument(text);
      }
    }
  } catch (const std::logic_error&) {
    throw UsageError("levels must be \"a..b\" or a comma list, got \"" + text + "\"");
  }
  if (ks.empty()) throw UsageError("empty level list");
  return ks;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Quantized Kaehler-Ricci solitons on toric Fano manifolds", "toricq"};
  app.require_subcommand(1);
  RunConfig cfg;

  struct Command {
    const char* name;
    const char* about;
    const char* schema;
  };
  const Command commands[] = {
      {"validate", "Validate a reflexive polytope and print its vertices",
       "stdout JSON: {name, dim, facet_normals, vertices, volume, N_1, centrally_symmetric}"},
      {"weights", "Lattice points of kP (torus weights at level k)", "stdout CSV: x1..xn (one row per lattice point)"},
      {"dh-moments", "Spectral vs Duistermaat-Heckman moments up to degree 4",
       "stdout CSV: k,multi_index,spectral_moment,dh_moment,abs_error"},
      {"solve-vk", "Minimizer V_k of F_k and the continuous V_KS",
       "stdout JSON: {k, V_k, F_k_min, futaki_residual, V_KS, distance}"},
      {"futaki-expansion", "Fit Fut_{0,k}(e_j) in powers of k",
       "stdout CSV: w_1..w_n,power,coefficient,fit_residual"},
      {"balance", "Quantized soliton at level k by damped Hilb o FS iteration",
       "stdout JSON: {k, V_k, converged, iterations, final_residual, damping, grid_level, ding[], ding_nonincreasing}; "
       "--out also writes balance_kK.json, H_kK.csv (x1..xn,H,logH), phi_kK.csv (t1..tn,phi,dphi_1..n), "
       "history_kK.csv (iteration,residual,ding)"},
      {"convergence", "Balanced metrics over several levels (Cauchy and Ding diagnostics)",
       "stdout CSV: k,V_k_1..n,iterations,converged,residual,ding_VKS,cauchy; "
       "--out also writes vk_convergence.csv"},
      {"functional-report", "Quantized vs continuous energy, J and Ding functionals",
       "stdout CSV: k,functional,quantized,continuous,error"},
  };

  std::map<std::string, CLI::App*> subs;
  for (const auto& c : commands) {
    CLI::App* s = app.add_subcommand(c.name, c.about);
    s->footer(std::string("Output schema: ") + c.schema +
              "\nExit status: 0 ok, 1 invalid input, 2 numerical non-convergence, 64 usage.");
    s->add_option("polytope", cfg.polytope, "Polytope JSON {name, dim, facet_normals}")->required();
    subs[c.name] = s;
  }
  for (const char* name : {"weights", "solve-vk", "balance"}) {
    subs[name]->add_option("--level", cfg.level, "Level k >= 1")->capture_default_str();
  }
  for (const char* name : {"dh-moments", "futaki-expansion", "convergence", "functional-report"}) {
    subs[name]->add_option("--levels", cfg.levels, "Levels as a..b or a comma list");
  }
  for (const char* name : {"solve-vk", "balance", "convergence"}) {
    subs[name]->add_option("--tol", cfg.tol, "Stopping tolerance in (0, 1e-2]");
    subs[name]->add_option("--max-iter", cfg.max_iter, "Iteration cap");
  }
  for (const char* name : {"balance", "convergence"}) {
    subs[name]->add_option("--damping", cfg.damping, "Damping theta in (0, 1]")->capture_default_str();
    subs[name]->add_option("--grid", cfg.grid, "Sample grid \"min,max,npts\" per axis")->capture_default_str();
  }
  subs["functional-report"]->add_option("--metric", cfg.metric, "Metric JSON {level, coefficients[, constant]}");
  for (auto& [name, s] : subs) s->add_option("--out", cfg.out_dir, "Also write outputs into this directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    for (auto& [name, s] : subs) {
      if (s->parsed()) {
        err << e.what() << "\n" << s->help();
        return kExitUsage;
      }
    }
    err << e.what() << "\n" << app.help("", CLI::AppFormatMode::All);
    return kExitUsage;
  }

  int status = kExitOk;
  try {
    check_out_dir(cfg.out_dir);
    Runner r(cfg);
    Output o;
    if (subs["validate"]->parsed()) o = cmd_validate(r);
    else if (subs["weights"]->parsed()) o = cmd_weights(r);
    else if (subs["dh-moments"]->parsed()) o = cmd_dh_moments(r);
    else if (subs["solve-vk"]->parsed()) o = cmd_solve_vk(r);
    else if (subs["futaki-expansion"]->parsed()) o = cmd_futaki_expansion(r);
    else if (subs["balance"]->parsed()) o = cmd_balance(r, status);
    else if (subs["convergence"]->parsed()) o = cmd_convergence(r, status);
    else o = cmd_functional_report(r, cfg);
    out << o.stdout_text;
    write_files(cfg.out_dir, o);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    for (auto& [name, s] : subs) {
      if (s->parsed()) err << s->help();
    }
    return kExitUsage;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return is_validation_error(e.code()) ? kExitValidation : kExitNoConvergence;
  }
  return status;
}

}  // namespace toricq::cli
