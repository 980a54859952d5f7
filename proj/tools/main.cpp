// morreylab: solve, measure and verify from the command line.
//
// Exit codes: 0 pass, 1 property violation, 2 usage or violated hypothesis,
// 3 solver failure.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "manifest.hpp"
#include "morreylab/analysis.hpp"
#include "morreylab/bench.hpp"
#include "morreylab/errors.hpp"
#include "morreylab/io.hpp"
#include "morreylab/parallel.hpp"
#include "morreylab/solver.hpp"
#include "morreylab/spaces.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace morreylab;
using morreylab::cli::RunManifest;

namespace {

constexpr int kPass = 0;
constexpr int kViolation = 1;
constexpr int kUsage = 2;
constexpr int kSolverFailure = 3;

struct Options {
  double p = 2.0;
  double lambda = 1.5;
  int n = 2;
  std::optional<double> gamma;
  double s = 0.5;
  std::optional<double> c;
  std::string grid_h = "1/128";
  std::string bench_h = "1/256";
  std::string domain = "disk";
  double tol = 0.0;
  int max_iter = 200;
  std::uint64_t seed = 42;
  std::string out = "morreylab-run";
  bool check = false;
  std::string case_id;
  std::size_t trials = 50;
  std::string config;
  std::string in;
  std::string center;
  bool use_solver = false;
  double q = 2.0;
  double mu = 1.0;
  std::string p_list = "2";
  std::string s_list = "0.2,0.5,0.8";
  std::string gamma_list = "0.75,1";
};

double parse_number(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size()) throw PreconditionError("bad " + what + ": '" + text + "'");
  return v;
}

/// "0.0078125" or "1/128".
double parse_spacing(const std::string& text) {
  const auto slash = text.find('/');
  if (slash == std::string::npos) return parse_number(text, "--grid-h");
  return parse_number(text.substr(0, slash), "--grid-h") /
         parse_number(text.substr(slash + 1), "--grid-h");
}

std::vector<double> parse_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(parse_number(item, what));
  }
  return out;
}

Point parse_point(const std::string& text) {
  const auto comma = text.find(',');
  if (comma == std::string::npos) throw PreconditionError("--center expects x,y");
  return {parse_number(text.substr(0, comma), "--center"),
          parse_number(text.substr(comma + 1), "--center")};
}

std::string csv_of(const ScalarField& u) {
  std::ostringstream out;
  write_node_csv(out, u);
  return out.str();
}

template <typename Fn>
std::string render(Fn&& fn) {
  std::ostringstream out;
  fn(out);
  return out.str();
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

json snapshot(const Options& o) {
  json j = {{"p", o.p},         {"lambda", o.lambda},     {"n", o.n},
            {"s", o.s},         {"grid_h", o.grid_h},     {"domain", o.domain},
            {"tol", o.tol},     {"max_iter", o.max_iter}, {"seed", o.seed},
            {"case", o.case_id}, {"trials", o.trials},    {"solver", o.use_solver}};
  if (o.gamma) j["gamma"] = *o.gamma;
  if (o.c) j["c"] = *o.c;
  if (!o.config.empty()) j["config"] = o.config;
  return j;
}

/// Writes the manifest (or, with --check, compares hashes first) and maps the
/// verdict to an exit code.
int conclude(RunManifest& m, const Options& o, bool pass) {
  if (o.check) {
    const auto bad = m.compare_with_existing();
    if (!bad.empty()) {
      for (const auto& name : bad) std::cerr << "check: output changed: " << name << '\n';
      return kViolation;
    }
    std::cout << "check: all outputs match the manifest\n";
  }
  m.finish(pass);
  return pass ? kPass : kViolation;
}

SolverConfig solver_config(const Options& o, const CLI::App& app) {
  SolverConfig cfg;
  if (!o.config.empty()) {
    std::ifstream in(o.config);
    if (!in) throw PreconditionError("cannot read config " + o.config);
    cfg = parse_solver_config(in);
  }
  if (app.count("--p") || o.config.empty()) cfg.p = o.p;
  if (app.count("--tol")) cfg.tol = o.tol;
  if (app.count("--max-iter")) cfg.max_iter = o.max_iter;
  return cfg;
}

// ---------------------------------------------------------------------------

int cmd_predict(const Options& o) {
  const ExponentPrediction e = predicted_alpha(o.p, o.lambda, o.n, o.gamma);
  std::cout << "alpha=" << fmt(e.alpha) << " branch=" << to_string(e.branch)
            << " rate=" << fmt(e.rate);
  if (e.gamma_cap) std::cout << " gamma_cap=" << fmt(*e.gamma_cap);
  std::cout << '\n';
  RunManifest m("predict", o.out);
  m.config() = snapshot(o);
  m.write_output("prediction.json", to_json(e) + "\n");
  m.summary()["alpha"] = e.alpha;
  return conclude(m, o, true);
}

int cmd_solve(const Options& o, const CLI::App& app) {
  SolverConfig cfg = solver_config(o, app);
  cfg.validate(Grid::dim);
  const double h = parse_spacing(o.grid_h);
  const std::string id = o.case_id.empty() ? "radial-" + fmt(o.s) : o.case_id;

  json meta = {{"p", cfg.p}, {"h", h}};
  ScalarField f, boundary;
  GridPtr grid;
  std::function<double(Point)> reference;
  if (id == "affine") {
    grid = make_grid(domain_kind_from_string(o.domain), h);
    auto g = [](Point x) { return x.x + 0.5 * x.y; };
    f = ScalarField(grid, 0.0);
    boundary = ScalarField::sample(grid, g);
    reference = g;
    meta["case"] = {{"id", "affine"}, {"boundary", "x + y/2"}};
    meta["lambda"] = nullptr;
  } else {
    BenchmarkCase bc;
    if (id.rfind("radial-", 0) == 0 && !o.case_id.empty()) {
      bc = case_from_id(id, cfg.p, Grid::dim);
    } else if (o.case_id.empty()) {
      bc = radial_case(o.s, cfg.p, Grid::dim, o.c);
    } else {
      bc = case_from_id(id, cfg.p, Grid::dim);
    }
    grid = make_grid(bc.domain, h);
    f = bc.source_field(grid);
    boundary = bc.exact_field(grid);
    reference = [bc](Point x) { return bc.u(norm(x)); };
    meta["case"] = json::parse(to_json(bc));
    meta["lambda"] = bc.lambda_true;
  }
  meta["domain"] = to_string(grid->kind());

  RunManifest m("solve", o.out);
  m.config() = snapshot(o);
  m.grid() = {{"domain", to_string(grid->kind())}, {"h", grid->h()}, {"nx", grid->nx()}};
  SolveResult res;
  try {
    res = solve_p_poisson(f, boundary, cfg);
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << " (last residual " << e.last_residual() << ")\n";
    m.summary()["residual"] = e.last_residual();
    m.finish(false);
    return kSolverFailure;
  }
  double max_error = 0.0;
  for (std::size_t k = 0; k < grid->size(); ++k) {
    if (grid->in_domain(k)) max_error = std::max(max_error, std::abs(res.u[k] - reference(grid->node(k))));
  }
  meta["residual"] = res.residual;
  meta["iterations"] = res.iterations;
  meta["max_error"] = max_error;
  std::cout << "case=" << id << " p=" << fmt(cfg.p) << " h=" << fmt(grid->h())
            << " iterations=" << res.iterations << " residual=" << fmt(res.residual)
            << " max_error=" << fmt(max_error) << '\n';

  m.write_output("solution.csv", csv_of(res.u));
  m.write_output("convergence.csv", render([&](std::ostream& out) { write_history_csv(out, res.history); }));
  m.write_output("solution.json", meta.dump(2) + "\n");
  m.summary()["residual"] = res.residual;
  m.summary()["max_error"] = max_error;
  return conclude(m, o, true);
}

int cmd_analyze(const Options& o, const CLI::App& app) {
  if (o.in.empty()) throw PreconditionError("analyze needs --in DIR (a solve output directory)");
  const fs::path dir(o.in);
  std::ifstream meta_in(dir / "solution.json");
  if (!meta_in) throw PreconditionError("missing " + (dir / "solution.json").string());
  const json meta = json::parse(meta_in);
  const GridPtr grid = make_grid(domain_kind_from_string(meta.at("domain")), meta.at("h"));
  std::ifstream csv(dir / "solution.csv");
  if (!csv) throw PreconditionError("missing " + (dir / "solution.csv").string());
  const ScalarField u = read_node_csv(csv, grid);

  const double p = app.count("--p") ? o.p : meta.at("p").get<double>();
  std::optional<double> lambda;
  if (app.count("--lambda")) lambda = o.lambda;
  else if (!meta.at("lambda").is_null()) lambda = meta.at("lambda").get<double>();
  const Point center = o.center.empty() ? (grid->kind() == DomainKind::UnitSquare ? Point{0.5, 0.5}
                                                                                 : Point{0.0, 0.0})
                                        : parse_point(o.center);

  const ExcessProfile profile =
      campanato_excess(gradient(u), center, default_excess_radii(*grid, center), p);
  const ExponentFit fit = fit_exponent(profile);
  std::optional<double> alpha_pred;
  std::string note;
  if (lambda) {
    try {
      alpha_pred = predicted_alpha(p, *lambda, Grid::dim, o.gamma).alpha;
    } catch (const PreconditionError& e) {
      note = e.what();
    }
  }
  bool pass = true;
  if (fit.smooth) {
    note = "exponent unbounded (smooth)";
  } else if (alpha_pred) {
    pass = fit.alpha_hat >= *alpha_pred - 0.05;
  }
  std::cout << "alpha_hat=" << (fit.smooth ? std::string("inf") : fmt(fit.alpha_hat));
  if (alpha_pred) std::cout << " alpha_pred=" << fmt(*alpha_pred);
  std::cout << " pass=" << (pass ? "true" : "false");
  if (!note.empty()) std::cout << " note=\"" << note << '"';
  std::cout << '\n';

  RunManifest m("analyze", o.out);
  m.config() = snapshot(o);
  m.config()["in"] = o.in;
  m.grid() = {{"domain", to_string(grid->kind())}, {"h", grid->h()}};
  json summary = json::parse(exponent_summary_json(fit, alpha_pred, pass));
  summary["center"] = {center.x, center.y};
  summary["note"] = note;
  m.write_output("excess.csv", render([&](std::ostream& out) { write_excess_csv(out, profile); }));
  m.write_output("analysis.json", summary.dump(2) + "\n");
  m.summary()["alpha_hat"] = fit.smooth ? json(nullptr) : json(fit.alpha_hat);
  return conclude(m, o, pass);
}

BenchmarkCase verify_case(const Options& o) {
  const std::string id = o.case_id.empty() ? "radial-0.5" : o.case_id;
  return case_from_id(id, 2.0, Grid::dim);
}

int cmd_verify_fp(const Options& o, const CLI::App& app) {
  const BenchmarkCase bc = verify_case(o);
  const double p = app.count("--p") ? o.p : 1.5;
  const GridPtr grid = make_grid(bc.domain, parse_spacing(o.grid_h));
  const ScalarField f = bc.source_field(grid);
  const MorreyReport norm = morrey_norm(f, {1.0, bc.lambda_true}, BallFamily::standard(*grid, {{0.0, 0.0}}));
  std::mt19937_64 rng(o.seed);
  const FPBattery bat = fp_battery(f, {0.0, 0.0}, p, bc.lambda_true, norm.value, o.trials, 0.06, 0.6, rng);
  const bool pass = bat.all_finite && std::abs(bat.trend.slope) <= 0.05;
  std::cout << "case=" << bc.id << " trials=" << bat.reports.size() << " max_ratio=" << fmt(bat.max_ratio)
            << " trend_slope=" << fmt(bat.trend.slope) << " pass=" << (pass ? "true" : "false") << '\n';

  RunManifest m("verify fp", o.out);
  m.config() = snapshot(o);
  m.grid() = {{"domain", to_string(grid->kind())}, {"h", grid->h()}};
  m.write_output("fp.csv", render([&](std::ostream& out) { write_fp_csv(out, bat.reports); }));
  const json summary = {{"case", bc.id},           {"p", p},
                        {"lambda", bc.lambda_true}, {"morrey_norm", json::parse(to_json(norm))},
                        {"max_ratio", bat.max_ratio}, {"trend_slope", bat.trend.slope},
                        {"all_finite", bat.all_finite}, {"pass", pass}};
  m.write_output("fp.json", summary.dump(2) + "\n");
  return conclude(m, o, pass);
}

int cmd_verify_stummel(const Options& o, const CLI::App& app) {
  const BenchmarkCase bc = verify_case(o);
  const double p = app.count("--p") ? o.p : 1.0;
  const GridPtr grid = make_grid(bc.domain, parse_spacing(o.grid_h));
  const ScalarField f = bc.source_field(grid);
  std::vector<double> radii;
  for (double r = 0.4; r >= 0.05 * (1.0 - 1e-9); r *= BallFamily::default_ratio) radii.push_back(r);
  const std::vector<Point> centers{{0.0, 0.0}};
  const DecayFit decay = stummel_decay_slope(f, p, radii, centers);
  const double bound = bc.lambda_true - Grid::dim + p;
  const bool pass = decay.fit.slope >= bound - 0.05;
  std::cout << "case=" << bc.id << " p=" << fmt(p) << " slope=" << fmt(decay.fit.slope)
            << " bound=" << fmt(bound) << " pass=" << (pass ? "true" : "false") << '\n';

  RunManifest m("verify stummel", o.out);
  m.config() = snapshot(o);
  m.grid() = {{"domain", to_string(grid->kind())}, {"h", grid->h()}};
  m.write_output("stummel.csv", render([&](std::ostream& out) {
                   out << "radius,eta\n";
                   for (std::size_t k = 0; k < decay.radii.size(); ++k) {
                     char line[96];
                     std::snprintf(line, sizeof line, "%.17g,%.17g\n", decay.radii[k], decay.values[k]);
                     out << line;
                   }
                 }));
  const json summary = {{"case", bc.id}, {"p", p}, {"slope", decay.fit.slope},
                        {"bound", bound}, {"pass", pass}};
  m.write_output("stummel.json", summary.dump(2) + "\n");
  return conclude(m, o, pass);
}

int cmd_verify_embedding(const Options& o, const CLI::App& app) {
  const MorreyIndex from{o.q, o.mu};
  const MorreyIndex to{app.count("--p") ? o.p : 1.0, app.count("--lambda") ? o.lambda : 1.5};
  check_embedding_hypothesis(from, to, Grid::dim);
  const BenchmarkCase bc = verify_case(o);
  const double h = parse_spacing(o.grid_h);
  std::vector<EmbeddingReport> reports;
  for (double hh : {h, 0.5 * h}) {
    const GridPtr grid = make_grid(bc.domain, hh);
    reports.push_back(check_embedding(bc.source_field(grid), from, to, BallFamily::standard(*grid, {{0.0, 0.0}})));
  }
  const double drift = std::abs(reports[1].ratio / reports[0].ratio - 1.0);
  const bool pass = std::isfinite(reports[0].ratio) && std::isfinite(reports[1].ratio) && drift <= 0.1;
  std::cout << "case=" << bc.id << " ratio(h)=" << fmt(reports[0].ratio)
            << " ratio(h/2)=" << fmt(reports[1].ratio) << " drift=" << fmt(drift)
            << " pass=" << (pass ? "true" : "false") << '\n';

  RunManifest m("verify embedding", o.out);
  m.config() = snapshot(o);
  m.config()["q"] = o.q;
  m.config()["mu"] = o.mu;
  m.grid() = {{"domain", to_string(bc.domain)}, {"h", h}};
  json rows = json::array();
  for (std::size_t k = 0; k < reports.size(); ++k) {
    rows.push_back({{"h", k == 0 ? h : 0.5 * h},
                    {"norm_to", reports[k].norm_to},
                    {"norm_from", reports[k].norm_from},
                    {"ratio", reports[k].ratio}});
  }
  const json summary = {{"case", bc.id},
                        {"from", {{"p", from.p}, {"lambda", from.lambda}}},
                        {"to", {{"p", to.p}, {"lambda", to.lambda}}},
                        {"refinements", rows},
                        {"drift", drift},
                        {"pass", pass}};
  m.write_output("embedding.json", summary.dump(2) + "\n");
  return conclude(m, o, pass);
}

int cmd_bench(const Options& o) {
  MatrixSpec spec;
  spec.ps = parse_list(o.p_list, "--p");
  spec.ss = parse_list(o.s_list, "--s");
  spec.gammas = parse_list(o.gamma_list, "--gamma");
  spec.n = o.n;
  const CaseMatrix matrix = case_matrix(spec);
  for (const auto& reason : matrix.skipped) std::cerr << "skipped: " << reason << '\n';

  RunOptions run;
  run.h = parse_spacing(o.bench_h);
  run.use_solver = o.use_solver;
  if (o.tol > 0.0) run.solver.tol = o.tol;
  run.solver.max_iter = o.max_iter;

  std::vector<CaseResult> rows;
  bool pass = true;
  std::printf("%-14s %6s %8s %10s %10s %6s  %s\n", "id", "p", "lambda", "alpha_pred", "alpha_hat",
              "pass", "note");
  for (const BenchmarkCase& bc : matrix.cases) {
    RunOptions opts = run;
    if (opts.use_solver && bc.n != Grid::dim) opts.use_solver = false;
    CaseResult r;
    try {
      r = run_case(bc, opts);
    } catch (const SolverError& e) {
      std::cerr << "error: " << bc.id << ": " << e.what() << '\n';
      return kSolverFailure;
    }
    pass = pass && r.pass;
    std::printf("%-14s %6s %8s %10s %10s %6s  %s\n", r.id.c_str(), fmt(r.p).c_str(),
                fmt(r.lambda).c_str(), r.alpha_pred ? fmt(*r.alpha_pred).c_str() : "-",
                fmt(r.alpha_hat).c_str(), r.pass ? "yes" : "NO", r.note.c_str());
    rows.push_back(std::move(r));
  }

  RunManifest m("bench", o.out);
  m.config() = snapshot(o);
  m.config()["p_list"] = o.p_list;
  m.config()["s_list"] = o.s_list;
  m.config()["gamma_list"] = o.gamma_list;
  m.config()["grid_h"] = o.bench_h;
  m.grid() = {{"domain", "disk"}, {"h", run.h}};
  json cases = json::array();
  for (const BenchmarkCase& bc : matrix.cases) cases.push_back(json::parse(to_json(bc)));
  json results = json::array();
  for (const CaseResult& r : rows) results.push_back(json::parse(to_json(r)));
  m.write_output("cases.json", json({{"cases", cases}, {"skipped", matrix.skipped}}).dump(2) + "\n");
  m.write_output("results.json", results.dump(2) + "\n");
  m.write_output("results.csv", render([&](std::ostream& out) { write_results_csv(out, rows); }));
  m.summary()["cases"] = rows.size();
  return conclude(m, o, pass);
}

constexpr const char* kFooter = R"(Outputs (all in --out DIR, manifest.json written last):
  solve     solution.csv     x,y,flag,value   (flag 0 exterior, 1 boundary, 2 interior)
            convergence.csv  iter,energy,residual,step
            solution.json    case, domain, h, p, lambda, residual, iterations, max_error
  analyze   excess.csv       radius,excess
            analysis.json    alpha_hat, window, residual, predicted_alpha, pass
  verify    fp.csv           phi_id,center_x,center_y,radius,lhs,rhs_core,ratio
            stummel.csv      radius,eta
  bench     results.csv      id,p,lambda,alpha_pred,alpha_hat,pass
Exit codes: 0 pass, 1 property violation, 2 usage or hypothesis, 3 solver failure.
MORREYLAB_THREADS caps the number of worker threads.)";

}  // namespace

int main(int argc, char** argv) {
  configure_threads();
  Options o;
  CLI::App app{"p-Poisson / Morrey-space numerical laboratory"};
  app.require_subcommand(1);
  app.footer(kFooter);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", o.out, "Output directory")->capture_default_str();
    sub->add_flag("--check", o.check, "Re-run and compare output hashes with the existing manifest");
    sub->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
  };
  auto add_grid = [&](CLI::App* sub) {
    sub->add_option("--grid-h", o.grid_h, "Lattice spacing, e.g. 1/128")->capture_default_str();
  };

  CLI::App* predict = app.add_subcommand("predict", "Predicted gradient Hoelder exponent");
  predict->add_option("--p", o.p)->required();
  predict->add_option("--lambda", o.lambda)->required();
  predict->add_option("--n", o.n)->capture_default_str();
  predict->add_option("--gamma", o.gamma, "Exponent of the homogeneous problem, in (0,1)");
  add_common(predict);

  CLI::App* solve = app.add_subcommand("solve", "Solve -Delta_p u = f with Dirichlet data");
  solve->add_option("--case", o.case_id, "radial-<s>, serrin-<gamma> or affine");
  solve->add_option("--p", o.p)->capture_default_str();
  solve->add_option("--s", o.s, "Radial source exponent when no --case is given")->capture_default_str();
  solve->add_option("--c", o.c, "Radial source amplitude (default n - s)");
  solve->add_option("--domain", o.domain, "disk, square or annulus (affine case only)")->capture_default_str();
  solve->add_option("--tol", o.tol, "Residual tolerance (0: automatic)");
  solve->add_option("--max-iter", o.max_iter)->capture_default_str();
  solve->add_option("--config", o.config, "key = value solver configuration, overridden by flags");
  add_grid(solve);
  add_common(solve);

  CLI::App* analyze = app.add_subcommand("analyze", "Campanato exponent of Du from a solve output");
  analyze->add_option("--in", o.in, "Directory written by solve")->required();
  analyze->add_option("--center", o.center, "x,y (default: the origin, or the square's centre)");
  analyze->add_option("--p", o.p);
  analyze->add_option("--lambda", o.lambda);
  analyze->add_option("--gamma", o.gamma);
  add_common(analyze);

  CLI::App* verify = app.add_subcommand("verify", "Property batteries");
  verify->require_subcommand(1);
  CLI::App* fp = verify->add_subcommand("fp", "Fefferman-Phong ratio boundedness");
  fp->add_option("--case", o.case_id)->capture_default_str();
  fp->add_option("--p", o.p, "Exponent of the inequality (default 1.5)");
  fp->add_option("--trials", o.trials)->capture_default_str();
  CLI::App* stummel = verify->add_subcommand("stummel", "Stummel-Kato modulus decay");
  stummel->add_option("--case", o.case_id);
  stummel->add_option("--p", o.p, "Kernel exponent (default 1)");
  CLI::App* embedding = verify->add_subcommand("embedding", "Morrey embedding ratio stability");
  embedding->add_option("--case", o.case_id);
  embedding->add_option("--q", o.q, "Source space exponent")->capture_default_str();
  embedding->add_option("--mu", o.mu, "Source space index")->capture_default_str();
  embedding->add_option("--p", o.p, "Target space exponent (default 1)");
  embedding->add_option("--lambda", o.lambda, "Target space index (default 1.5)");
  for (CLI::App* sub : {fp, stummel, embedding}) {
    add_grid(sub);
    add_common(sub);
  }

  CLI::App* bench = app.add_subcommand("bench", "Benchmark case matrix");
  bench->add_option("--p", o.p_list, "Comma-separated p values")->capture_default_str();
  bench->add_option("--s", o.s_list, "Comma-separated radial exponents (\",\" for none)")->capture_default_str();
  bench->add_option("--gamma", o.gamma_list, "Comma-separated Serrin exponents (\",\" for none)")->capture_default_str();
  bench->add_option("--n", o.n)->capture_default_str();
  bench->add_flag("--solver", o.use_solver, "Measure solver output instead of exact fields");
  bench->add_option("--tol", o.tol);
  bench->add_option("--max-iter", o.max_iter)->capture_default_str();
  bench->add_option("--grid-h", o.bench_h, "Lattice spacing, e.g. 1/256")->capture_default_str();
  add_common(bench);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kPass : kUsage;
  }

  try {
    if (*predict) return cmd_predict(o);
    if (*solve) return cmd_solve(o, *solve);
    if (*analyze) return cmd_analyze(o, *analyze);
    if (*fp) return cmd_verify_fp(o, *fp);
    if (*stummel) return cmd_verify_stummel(o, *stummel);
    if (*embedding) return cmd_verify_embedding(o, *embedding);
    if (*bench) return cmd_bench(o);
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const SolverError& e) {
    std::cerr << "error: " << e.what() << " (last residual " << e.last_residual() << ")\n";
    return kSolverFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}
