#include "morreylab/io.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <nlohmann/json.hpp>
#include <ostream>

#include "morreylab/errors.hpp"

namespace morreylab {

namespace {

using nlohmann::json;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json optional_number(const std::optional<double>& v) { return v ? number(*v) : json(nullptr); }

json point(Point p) { return json::array({number(p.x), number(p.y)}); }

std::string dump(const json& j) { return j.dump(2); }

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::string to_json(const MorreyReport& r) {
  return dump({{"p", number(r.p)},
               {"lambda", number(r.lambda)},
               {"value", number(r.value)},
               {"argmax_center", point(r.argmax_center)},
               {"argmax_radius", number(r.argmax_radius)},
               {"grid_h", number(r.grid_h)}});
}

std::string to_json(const ModulusReport& r) {
  return dump({{"p", number(r.p)},
               {"radius", number(r.radius)},
               {"value", number(r.value)},
               {"argmax_center", point(r.argmax_center)},
               {"grid_h", number(r.grid_h)}});
}

std::string to_json(const ExponentPrediction& e) {
  return dump({{"alpha", number(e.alpha)},
               {"branch", to_string(e.branch)},
               {"gamma_cap", optional_number(e.gamma_cap)},
               {"rate", number(e.rate)},
               {"p", number(e.p)},
               {"lambda", number(e.lambda)},
               {"n", e.n}});
}

std::string to_json(const BenchmarkCase& c) {
  json params;
  if (c.family == CaseFamily::Radial) {
    params = {{"s", number(c.s)}, {"c", number(c.c)}};
  } else {
    params = {{"gamma", number(c.gamma)}, {"sign", to_string(c.sign)}};
  }
  json j = {{"id", c.id},
            {"family", to_string(c.family)},
            {"p", number(c.p)},
            {"n", c.n},
            {"domain", to_string(c.domain)},
            {"params", params},
            {"lambda_true", number(c.lambda_true)},
            {"alpha_true", c.alpha_true ? number(*c.alpha_true) : json("not C1")},
            {"alpha_pred", c.prediction ? number(c.prediction->alpha) : json(nullptr)},
            {"note", c.prediction_note}};
  return dump(j);
}

std::string to_json(const CaseResult& r) {
  return dump({{"id", r.id},
               {"p", number(r.p)},
               {"lambda", number(r.lambda)},
               {"alpha_pred", optional_number(r.alpha_pred)},
               {"alpha_hat", number(r.alpha_hat)},
               {"pass", r.pass}});
}

std::string exponent_summary_json(const ExponentFit& fit, std::optional<double> predicted_alpha,
                                  bool pass) {
  return dump({{"alpha_hat", number(fit.alpha_hat)},
               {"window", json::array({number(fit.window.r_lo), number(fit.window.r_hi)})},
               {"residual", number(fit.rms_residual)},
               {"predicted_alpha", optional_number(predicted_alpha)},
               {"pass", pass},
               {"points", fit.points_used},
               {"smooth", fit.smooth}});
}

void write_excess_csv(std::ostream& out, const ExcessProfile& profile) {
  out << "radius,excess\n";
  for (const ExcessEntry& e : profile.entries) out << fmt(e.radius) << ',' << fmt(e.excess) << '\n';
}

void write_fp_csv(std::ostream& out, std::span<const FPReport> reports) {
  out << "phi_id,center_x,center_y,radius,lhs,rhs_core,ratio\n";
  for (const FPReport& r : reports) {
    out << r.phi_id << ',' << fmt(r.ball.center.x) << ',' << fmt(r.ball.center.y) << ','
        << fmt(r.ball.radius) << ',' << fmt(r.lhs) << ',' << fmt(r.rhs_core) << ','
        << fmt(r.ratio) << '\n';
  }
}

void write_history_csv(std::ostream& out, std::span<const IterationRecord> history) {
  out << "iter,energy,residual,step\n";
  for (const IterationRecord& r : history) {
    out << r.iter << ',' << fmt(r.energy) << ',' << fmt(r.residual) << ',' << fmt(r.step) << '\n';
  }
}

void write_results_csv(std::ostream& out, std::span<const CaseResult> rows) {
  out << "id,p,lambda,alpha_pred,alpha_hat,pass\n";
  for (const CaseResult& r : rows) {
    out << r.id << ',' << fmt(r.p) << ',' << fmt(r.lambda) << ','
        << (r.alpha_pred ? fmt(*r.alpha_pred) : std::string()) << ',' << fmt(r.alpha_hat) << ','
        << (r.pass ? "true" : "false") << '\n';
  }
}

SolverConfig parse_solver_config(std::istream& in, SolverConfig base) {
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw PreconditionError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string text = trim(line.substr(eq + 1));
    std::size_t used = 0;
    double value = 0.0;
    try {
      value = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) {
      throw PreconditionError("config line " + std::to_string(lineno) + ": bad value for " + key);
    }
    if (key == "p") base.p = value;
    else if (key == "kappa") base.kappa = value;
    else if (key == "tol") base.tol = value;
    else if (key == "max_iter") base.max_iter = static_cast<int>(value);
    else if (key == "initial_step") base.initial_step = value;
    else if (key == "backtrack") base.backtrack = value;
    else if (key == "armijo") base.armijo = value;
    else if (key == "kappa0") base.kappa0 = value;
    else if (key == "anneal_stages") base.anneal_stages = static_cast<int>(value);
    else throw PreconditionError("config line " + std::to_string(lineno) + ": unknown key " + key);
  }
  return base;
}

}  // namespace morreylab
