#include "curvkit/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "curvkit/chain.hpp"
#include "curvkit/curvature.hpp"
#include "curvkit/errors.hpp"
#include "curvkit/gamma.hpp"
#include "curvkit/geometry.hpp"
#include "curvkit/heat.hpp"
#include "curvkit/means.hpp"
#include "curvkit/optimal_sets.hpp"

namespace curvkit::cli {

using nlohmann::json;

namespace {

constexpr const char* kSchema = "curvkit-report/1";
constexpr int kExitViolation = 4;

// Finite doubles as numbers, infinities as "inf"/"-inf", NaN as null.
json num(double v) {
  if (std::isnan(v)) return nullptr;
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  return v;
}

json num_list(const std::vector<double>& v) {
  json out = json::array();
  for (double x : v) out.push_back(num(x));
  return out;
}

double parse_double(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::stod(s);
  }
  return std::nan("");
}

double parse_dimension(const std::string& s) {
  if (s == "inf" || s == "infinity") return kInfDim;
  double v = 0.0;
  try {
    std::size_t pos = 0;
    v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
  } catch (const std::exception&) {
    throw InvalidParameters("dimension n must be a positive number or \"inf\", got \"" + s + "\"");
  }
  if (!(v > 0.0)) throw InvalidParameters("dimension n must be positive, got " + s);
  return v;
}

json by_state(const MarkovChain& chain, const Vector& v) {
  json j = json::object();
  for (int x = 0; x < chain.size(); ++x) j[chain.state(x)] = num(v(x));
  return j;
}

json states_of(const MarkovChain& chain, const std::vector<int>& set) {
  json j = json::array();
  for (int x : set) j.push_back(chain.state(x));
  return j;
}

json stats_json(const MarkovChain& chain) {
  const ChainStats& s = chain.stats();
  return {{"size", chain.size()},
          {"q_min", num(s.q_min)},
          {"pi_min", num(s.pi_min)},
          {"pi_max", num(s.pi_max)},
          {"deg_weighted_max", num(s.deg_weighted_max)},
          {"deg_pi_max", num(s.deg_pi_max)}};
}

json report_json(const InequalityReport& r) {
  json pre = json::array();
  for (const auto& p : r.preconditions)
    pre.push_back({{"name", p.name}, {"status", to_string(p.status)}, {"detail", p.detail}});
  json values = json::object();
  for (const auto& [k, v] : r.values) values[k] = num(v);
  json j = {{"name", r.name},
            {"relation", r.relation},
            {"lhs", num(r.lhs)},
            {"rhs", num(r.rhs)},
            {"slack", num(r.slack)},
            {"worst_residual", num(r.worst_residual)},
            {"trials", r.trials},
            {"verdict", to_string(r.verdict)},
            {"preconditions", pre},
            {"values", values},
            {"notes", r.notes}};
  if (r.witness) {
    json w = {{"t", num(r.witness->t)}};
    std::vector<double> rho(r.witness->rho.data(), r.witness->rho.data() + r.witness->rho.size());
    std::vector<double> f(r.witness->f.data(), r.witness->f.data() + r.witness->f.size());
    w["rho"] = rho;
    w["f"] = f;
    j["witness"] = w;
  }
  return j;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidParameters("cannot read file: " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

MarkovChain load_input(const RunConfig& cfg) {
  if (!cfg.generator.empty() && !cfg.input.empty())
    throw InvalidParameters("give either --gen or --in, not both");
  if (!cfg.generator.empty()) return generate(GeneratorSpec::parse(cfg.generator));
  if (!cfg.input.empty()) return load_chain(cfg.input);
  throw InvalidParameters("no chain given: use --gen <spec> or --in <file>");
}

Vector parse_rho(const MarkovChain& chain, const std::string& spec) {
  const int n = chain.size();
  if (spec == "ones" || spec == "uniform") return Vector::Ones(n);
  if (spec.rfind("dirac:", 0) == 0) return dirac(chain, chain.index_of(spec.substr(6)));
  std::string text = spec;
  if (spec.empty() || spec.front() != '{') text = read_file(spec);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw InvalidParameters(std::string("rho must be a JSON object keyed by state id: ") + e.what());
  }
  if (!j.is_object()) throw InvalidParameters("rho must be a JSON object keyed by state id");
  Vector rho = Vector::Zero(n);
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!it.value().is_number()) throw InvalidParameters("rho value for " + it.key() + " is not a number");
    rho(chain.index_of(it.key())) = it.value().get<double>();
  }
  return rho;
}

EntropicOptions entropic_options(const RunConfig& cfg, double n) {
  EntropicOptions o;
  o.starts = cfg.starts;
  o.seed = cfg.seed;
  o.tol = cfg.entropic_tol;
  o.max_iters = cfg.max_iters;
  o.jobs = cfg.jobs;
  o.n = n;
  return o;
}

int state_arg(const MarkovChain& chain, const std::string& id, const char* flag) {
  if (id.empty()) throw InvalidParameters(std::string("missing ") + flag);
  return chain.index_of(id);
}

json cmd_curv_vertex(const MarkovChain& chain, const RunConfig& cfg) {
  CurvatureOptions opts;
  opts.agreement_tol = cfg.agreement_tol;
  json per = json::array();
  double lo = kPosInf;
  int arg = 0;
  for (int x = 0; x < chain.size(); ++x) {
    const CurvatureResult r = bakry_emery_vertex(chain, x, cfg.n, opts);
    per.push_back({{"state", chain.state(x)}, {"K", num(r.value)}, {"null_dim", r.null_dim}});
    if (r.value < lo) {
      lo = r.value;
      arg = x;
    }
  }
  return {{"vertices", per}, {"K_global", num(lo)}, {"argmin", chain.state(arg)}};
}

json cmd_curv_measure(const MarkovChain& chain, const RunConfig& cfg, std::vector<std::string>& warnings) {
  const Mean mean = Mean::from_name(cfg.mean);
  const Vector rho = parse_rho(chain, cfg.rho);
  CurvatureOptions opts;
  opts.agreement_tol = cfg.agreement_tol;
  const CurvatureResult r = curvature_of_measure(chain, mean, rho, cfg.n, opts);
  for (const auto& w : r.warnings) warnings.push_back(w);
  json j = {{"K", num(r.value)},
            {"witness", by_state(chain, r.witness)},
            {"method", r.method == SolverMethod::pencil ? "pencil" : "bisection"},
            {"bisection_value", num(r.bisection_value)},
            {"bracket", {num(r.bracket_lo), num(r.bracket_hi)}},
            {"iterations", r.iterations},
            {"null_dim", r.null_dim}};
  if (!cfg.profile.empty()) {
    const CurvatureProfile prof = curvature_profile(chain, mean, rho, cfg.profile);
    json pts = json::array();
    for (const auto& p : prof.points) pts.push_back({{"inv_n", num(p.s)}, {"K", num(p.k)}});
    j["profile"] = {{"points", pts}, {"concave", prof.concave},
                    {"worst_concavity", num(prof.worst_concavity)}};
    if (!cfg.csv.empty()) {
      std::ofstream csv(cfg.csv);
      if (!csv) throw InvalidParameters("cannot write CSV: " + cfg.csv);
      csv << "inv_n,K\n";
      csv.precision(17);
      for (const auto& p : prof.points) csv << p.s << ',' << p.k << '\n';
    }
  }
  return j;
}

json cmd_curv_entropic(const MarkovChain& chain, const RunConfig& cfg) {
  const EntropicEstimate e = entropic_curvature_estimate(chain, entropic_options(cfg, cfg.n));
  json starts = json::array();
  for (const auto& s : e.per_start)
    starts.push_back({{"kind", s.kind}, {"K", num(s.k)}, {"converged", s.converged},
                      {"iterations", s.iterations}});
  return {{"k_hat", num(e.k_hat)},
          {"bound", "upper bound on K_n(X) for the logarithmic mean"},
          {"rho_star", by_state(chain, e.rho_star)},
          {"min_evaluated", num(e.min_evaluated)},
          {"certified_nonnegative", e.certified_nonnegative},
          {"certification", "heuristic"},
          {"evaluations", e.evaluations},
          {"starts", starts}};
}

json cmd_spectrum(const MarkovChain& chain) {
  const HeatSystem sys = spectral_decompose(chain);
  std::vector<double> ev(sys.eigenvalues.data(), sys.eigenvalues.data() + sys.eigenvalues.size());
  const LichnerowiczReport lr = lichnerowicz_check(chain, Mean::arithmetic());
  return {{"eigenvalues", ev},
          {"lambda1", num(lr.lambda1)},
          {"K_inf_arithmetic", num(lr.k_inf)},
          {"lichnerowicz_sharp", lr.sharp}};
}

json cmd_optimal_sets(const MarkovChain& chain, const RunConfig& cfg) {
  const OptimalComplex c = optimal_complex(chain, cfg.n, cfg.max_size);
  json facets = json::array();
  for (const auto& f : c.facets) facets.push_back(states_of(chain, f));
  json j = {{"facets", facets},
            {"dimension", c.dimension},
            {"zero_cells", states_of(chain, c.zero_cells)},
            {"K_global", num(c.k_global)},
            {"sets_tested", c.sets_tested}};
  if (std::isinf(cfg.n)) {
    const EquilibriumCheck eq = check_equilibrium_optimality(chain);
    j["equilibrium_optimal"] = eq.equilibrium_optimal;
    j["lichnerowicz_sharp"] = eq.lichnerowicz_sharp;
  }
  return j;
}

json cmd_heat(const MarkovChain& chain, const RunConfig& cfg) {
  const HeatSystem sys = spectral_decompose(chain);
  const Matrix p = heat_kernel_matrix(sys, cfg.t);
  json j = {{"t", num(cfg.t)}, {"mixing_distance", num(mixing_distance(sys, cfg.t))}};
  if (!cfg.x.empty()) {
    const int x = chain.index_of(cfg.x);
    j["kernel_row"] = by_state(chain, p.row(x).transpose());
  } else {
    json rows = json::object();
    for (int x = 0; x < chain.size(); ++x) rows[chain.state(x)] = by_state(chain, p.row(x).transpose());
    j["kernel"] = rows;
  }
  return j;
}

json cmd_mixing(const MarkovChain& chain, const RunConfig& cfg) {
  const MixingResult m = avg_mixing_time(spectral_decompose(chain), cfg.eps);
  return {{"eps", num(m.eps)},
          {"tau_avg", num(m.tau)},
          {"phi0", num(m.phi0)},
          {"eps_too_large", m.eps_too_large},
          {"monotone", m.monotone},
          {"evaluations", m.evaluations}};
}

json cmd_dgamma(const MarkovChain& chain, const RunConfig& cfg, std::vector<std::string>& warnings) {
  if (!cfg.x.empty() || !cfg.y.empty()) {
    const int x = state_arg(chain, cfg.x, "--x");
    const int y = state_arg(chain, cfg.y, "--y");
    const DGammaResult r = d_gamma_solve(chain, x, y);
    if (!r.converged) warnings.push_back("d_Gamma solver did not converge; value is a lower bound");
    return {{"d_gamma", num(r.value)}, {"gap", num(r.gap)}, {"converged", r.converged},
            {"newton_steps", r.newton_steps}};
  }
  const Matrix d = d_gamma_matrix(chain);
  json rows = json::object();
  for (int x = 0; x < chain.size(); ++x) rows[chain.state(x)] = by_state(chain, d.row(x).transpose());
  return {{"diam_gamma", num(d.maxCoeff())},
          {"diam_combinatorial", diam_combinatorial(chain)},
          {"d_gamma", rows}};
}

json cmd_cheeger(const MarkovChain& chain) {
  const CheegerResult h = cheeger(chain);
  return {{"h", num(h.h)}, {"argmin", states_of(chain, h.argmin)}, {"boundary", num(h.boundary)},
          {"measure", num(h.measure)}};
}

bool suite_has(const std::string& suite, const std::string& name) {
  if (suite == "all") return true;
  std::stringstream ss(suite);
  std::string item;
  while (std::getline(ss, item, ','))
    if (item == name) return true;
  return false;
}

// Curvature for the selected mean: the override, the exact vertex minimum for
// the arithmetic mean, 2/N on hypercube walks for the logarithmic mean, or the
// multi-start estimate otherwise.
double selected_curvature(const MarkovChain& chain, const Mean& mean, const RunConfig& cfg,
                          std::vector<std::string>& warnings) {
  if (!cfg.k.empty()) return parse_double(json(cfg.k));
  if (mean.kind() == MeanKind::arithmetic) return bakry_emery_global(chain, cfg.n).value;
  int dim = 0;
  if (mean.kind() == MeanKind::logarithmic && std::isinf(cfg.n) && is_hypercube_walk(chain, &dim))
    return 2.0 / dim;
  warnings.push_back("curvature for mean " + mean.name() + " taken from the multi-start estimate");
  return entropic_curvature_estimate(chain, entropic_options(cfg, cfg.n)).k_hat;
}

json cmd_verify(const MarkovChain& chain, const RunConfig& cfg, std::vector<std::string>& warnings,
                bool* violated) {
  const Mean mean = Mean::from_name(cfg.mean);
  const std::string& suite = cfg.suite;
  json reports = json::array();
  auto push = [&](const InequalityReport& r) {
    if (r.violated() && r.preconditions_exact()) *violated = true;
    reports.push_back(report_json(r));
  };
  VerifyOptions vo;
  vo.trials = cfg.trials;
  vo.t_grid = cfg.t_grid;
  vo.seed = cfg.seed;
  vo.probe_iters = cfg.probe;
  vo.tol = cfg.verify_tol;
  const EntropicOptions eo = entropic_options(cfg, kInfDim);

  const bool want_heat = suite_has(suite, "gradient") || suite_has(suite, "reverse-poincare") ||
                         suite_has(suite, "linf");
  if (want_heat) {
    const double k = selected_curvature(chain, mean, cfg, warnings);
    const Precondition pre = curvature_precondition(chain, mean, k, cfg.n, entropic_options(cfg, cfg.n));
    if (suite_has(suite, "gradient")) push(verify_gradient_estimate(chain, mean, k, cfg.n, vo, pre));
    if (suite_has(suite, "reverse-poincare"))
      push(verify_reverse_poincare(chain, mean, k, cfg.n, vo, pre));
    if (suite_has(suite, "linf")) {
      const Precondition nonneg = curvature_precondition(chain, Mean::arithmetic(), 0.0, kInfDim);
      push(check_linf_gradient_bound(chain, vo, nonneg));
    }
  }
  if (suite_has(suite, "heat-kernel")) push(check_heat_kernel_bound(chain, cfg.t_grid));

  const bool want_h = suite_has(suite, "cheeger") || suite_has(suite, "buser");
  const bool want_ent = suite_has(suite, "buser") || suite_has(suite, "lambda-tau") ||
                        suite_has(suite, "expander") || suite_has(suite, "diameter");
  std::optional<CheegerResult> h;
  if (want_h) h = cheeger(chain);
  Precondition ent_nonneg;
  if (want_ent) ent_nonneg = curvature_precondition(chain, Mean::logarithmic(), 0.0, kInfDim, eo);
  if (suite_has(suite, "cheeger")) push(check_cheeger_l1(chain, cfg.trials, cfg.seed, &*h));
  if (suite_has(suite, "mixing")) push(check_tau_lower_bound(chain));
  if (suite_has(suite, "buser")) push(check_buser(chain, ent_nonneg, &*h));
  if (suite_has(suite, "lambda-tau")) push(check_lambda_tau(chain, ent_nonneg));
  if (suite_has(suite, "expander"))
    for (const auto& r : check_expander_bounds(chain, ent_nonneg)) push(r);

  const bool want_dg = suite_has(suite, "diameter") || suite_has(suite, "ddgamma");
  Matrix dg;
  if (want_dg) dg = d_gamma_matrix(chain);
  if (suite_has(suite, "diameter")) {
    int dim = 0;
    double k_ent = 0.0;
    if (is_hypercube_walk(chain, &dim)) {
      k_ent = 2.0 / dim;
    } else {
      k_ent = entropic_curvature_estimate(chain, eo).k_hat;
    }
    const Precondition ent = curvature_precondition(chain, Mean::logarithmic(), k_ent, kInfDim, eo);
    push(check_diameter_bound_ent(chain, k_ent, ent, &dg));

    // Finite dimension: the given n, or the first n on a doubling grid with K_n(X) > 0.
    double n = cfg.n;
    double k = kNegInf;
    if (std::isinf(n)) {
      for (double c = 1.0; c <= 1024.0; c *= 2.0) {
        k = bakry_emery_global(chain, c).value;
        if (k > 0.0) {
          n = c;
          break;
        }
      }
    } else {
      k = bakry_emery_global(chain, n).value;
    }
    const Precondition fin = curvature_precondition(chain, Mean::arithmetic(), k, n);
    InequalityReport r = check_diameter_bound_finite_n(chain, Mean::arithmetic(), k, n, fin, &dg);
    r.notes.push_back("arithmetic mean, K = K_n(X)");
    push(r);
  }
  if (suite_has(suite, "ddgamma")) push(check_dd_gamma(chain, &dg));
  if (reports.empty()) throw InvalidParameters("unknown or empty suite: " + suite);
  return {{"reports", reports}};
}

json dispatch(const MarkovChain& chain, const RunConfig& cfg, std::vector<std::string>& warnings,
              bool* violated) {
  const std::string& c = cfg.command;
  if (c == "curv-vertex") return cmd_curv_vertex(chain, cfg);
  if (c == "curv-measure") return cmd_curv_measure(chain, cfg, warnings);
  if (c == "curv-entropic") return cmd_curv_entropic(chain, cfg);
  if (c == "spectrum") return cmd_spectrum(chain);
  if (c == "optimal-sets") return cmd_optimal_sets(chain, cfg);
  if (c == "heat") return cmd_heat(chain, cfg);
  if (c == "mixing") return cmd_mixing(chain, cfg);
  if (c == "dgamma") return cmd_dgamma(chain, cfg, warnings);
  if (c == "cheeger") return cmd_cheeger(chain);
  if (c == "verify") return cmd_verify(chain, cfg, warnings, violated);
  if (c == "gen") return {{"chain", json::parse(chain_to_json_text(chain))}};
  throw InvalidParameters("unknown command: " + c);
}

}  // namespace

json to_json(const RunConfig& c) {
  return {{"command", c.command},       {"input", c.input},
          {"generator", c.generator},   {"mean", c.mean},
          {"n", num(c.n)},              {"seed", c.seed},
          {"rho", c.rho},               {"out", c.out},
          {"csv", c.csv},               {"suite", c.suite},
          {"jobs", c.jobs},             {"trials", c.trials},
          {"starts", c.starts},         {"probe", c.probe},
          {"max_size", c.max_size},     {"t", num(c.t)},
          {"eps", num(c.eps)},          {"k", c.k},
          {"x", c.x},                   {"y", c.y},
          {"t_grid", c.t_grid},         {"profile", num_list(c.profile)},
          {"agreement_tol", c.agreement_tol}, {"verify_tol", c.verify_tol},
          {"entropic_tol", c.entropic_tol},   {"max_iters", c.max_iters}};
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  auto str = [&](const char* key, std::string& dst) {
    if (j.contains(key)) dst = j.at(key).get<std::string>();
  };
  str("command", c.command);
  str("input", c.input);
  str("generator", c.generator);
  str("mean", c.mean);
  str("rho", c.rho);
  str("out", c.out);
  str("csv", c.csv);
  str("suite", c.suite);
  str("k", c.k);
  str("x", c.x);
  str("y", c.y);
  if (j.contains("n")) c.n = parse_double(j.at("n"));
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("jobs")) c.jobs = j.at("jobs").get<int>();
  if (j.contains("trials")) c.trials = j.at("trials").get<int>();
  if (j.contains("starts")) c.starts = j.at("starts").get<int>();
  if (j.contains("probe")) c.probe = j.at("probe").get<int>();
  if (j.contains("max_size")) c.max_size = j.at("max_size").get<int>();
  if (j.contains("t")) c.t = parse_double(j.at("t"));
  if (j.contains("eps")) c.eps = parse_double(j.at("eps"));
  if (j.contains("t_grid")) c.t_grid = j.at("t_grid").get<std::vector<double>>();
  if (j.contains("profile")) {
    c.profile.clear();
    for (const auto& v : j.at("profile")) c.profile.push_back(parse_double(v));
  }
  if (j.contains("agreement_tol")) c.agreement_tol = j.at("agreement_tol").get<double>();
  if (j.contains("verify_tol")) c.verify_tol = j.at("verify_tol").get<double>();
  if (j.contains("entropic_tol")) c.entropic_tol = j.at("entropic_tol").get<double>();
  if (j.contains("max_iters")) c.max_iters = j.at("max_iters").get<int>();
  return c;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  CLI::App app{"Curvature and functional inequalities of finite reversible Markov chains", "curvkit"};
  app.require_subcommand(1);
  std::string n_text = "inf";
  std::string profile_text;
  std::string t_grid_text;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"curv-vertex", "Bakry-Emery curvature K_n(x) at every vertex"},
      {"curv-measure", "Curvature K_n(rho) of a measure for a mean"},
      {"curv-entropic", "Multi-start estimate of the entropic curvature"},
      {"spectrum", "Spectrum of -Delta and the Lichnerowicz comparison"},
      {"optimal-sets", "Simplicial complex of optimal sets (arithmetic mean)"},
      {"heat", "Heat kernel p_t"},
      {"mixing", "Average mixing time tau_avg(eps)"},
      {"dgamma", "Intrinsic distance d_Gamma"},
      {"cheeger", "Exact Cheeger constant"},
      {"verify", "Check functional inequalities"},
      {"gen", "Emit a generated chain as JSON"}};
  for (const auto& [name, desc] : commands) {
    CLI::App* sub = app.add_subcommand(name, desc);
    sub->add_option("--gen", cfg.generator, "generator, e.g. hypercube:3, cycle:6, random-regular:3:10:7");
    sub->add_option("--in", cfg.input, "chain file: JSON or edge-list TSV");
    sub->add_option("--mean", cfg.mean, "arithmetic | logarithmic | geometric");
    sub->add_option("--n", n_text, "dimension, positive number or inf");
    sub->add_option("--seed", cfg.seed, "random seed (CURVKIT_SEED overrides)");
    sub->add_option("--rho", cfg.rho, "ones | uniform | dirac:<id> | JSON object | file");
    sub->add_option("--out", cfg.out, "report path, stdout when omitted");
    sub->add_option("--csv", cfg.csv, "CSV output for curvature profiles");
    sub->add_option("--suite", cfg.suite,
                    "all or comma list of gradient,reverse-poincare,linf,heat-kernel,cheeger,"
                    "mixing,buser,lambda-tau,expander,diameter,ddgamma");
    sub->add_option("--jobs", cfg.jobs, "worker threads");
    sub->add_option("--trials", cfg.trials, "random samples per check");
    sub->add_option("--starts", cfg.starts, "optimizer starts");
    sub->add_option("--probe", cfg.probe, "sharpness probe sweeps");
    sub->add_option("--max-size", cfg.max_size, "largest optimal set explored");
    sub->add_option("--t", cfg.t, "time");
    sub->add_option("--t-grid", t_grid_text, "comma list of times");
    sub->add_option("--eps", cfg.eps, "mixing threshold");
    sub->add_option("--k", cfg.k, "curvature used by verify");
    sub->add_option("--x", cfg.x, "state id");
    sub->add_option("--y", cfg.y, "state id");
    sub->add_option("--profile", profile_text, "comma list of dimensions for a curvature profile");
    sub->add_option("--agreement-tol", cfg.agreement_tol, "pencil/bisection agreement tolerance");
    sub->add_option("--verify-tol", cfg.verify_tol, "residual tolerance for verify");
  }

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  cfg.command = app.get_subcommands().front()->get_name();

  std::vector<std::string> warnings;
  bool violated = false;
  try {
    if (const char* env = std::getenv("CURVKIT_SEED")) {
      try {
        cfg.seed = std::stoull(env);
      } catch (const std::exception&) {
        throw InvalidParameters(std::string("CURVKIT_SEED is not an unsigned integer: ") + env);
      }
    }
    cfg.n = parse_dimension(n_text);
    auto split = [](const std::string& text) {
      std::vector<double> v;
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) v.push_back(parse_dimension(item));
      return v;
    };
    if (!profile_text.empty()) cfg.profile = split(profile_text);
    if (!t_grid_text.empty()) cfg.t_grid = split(t_grid_text);
    if (cfg.jobs < 1) throw InvalidParameters("--jobs must be at least 1");

    const MarkovChain chain = load_input(cfg);
    json results = dispatch(chain, cfg, warnings, &violated);
    json report = {{"schema", kSchema},
                   {"config", to_json(cfg)},
                   {"chain_stats", stats_json(chain)},
                   {"results", results},
                   {"warnings", warnings}};
    const std::string text = report.dump(2) + "\n";
    if (cfg.out.empty()) {
      out << text;
    } else {
      std::ofstream f(cfg.out);
      if (!f) throw InvalidParameters("cannot write report: " + cfg.out);
      f << text;
    }
  } catch (const InvalidInput& e) {
    err << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const NumericalFailure& e) {
    err << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const json::exception& e) {
    err << "invalid input: " << e.what() << "\n";
    return 2;
  }
  return violated ? kExitViolation : 0;
}

int run(const std::vector<std::string>& args) { return run(args, std::cout, std::cerr); }

}  // namespace curvkit::cli
