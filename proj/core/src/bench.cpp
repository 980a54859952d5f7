#include "morreylab/bench.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "morreylab/errors.hpp"

namespace morreylab {

namespace {

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

double serrin_u_sign(SerrinSign s) { return s == SerrinSign::NegatedSolution ? -1.0 : 1.0; }
double serrin_f_sign(SerrinSign s) { return s == SerrinSign::NegatedData ? -1.0 : 1.0; }

}  // namespace

std::string to_string(CaseFamily f) { return f == CaseFamily::Radial ? "radial" : "serrin"; }

std::string to_string(SerrinSign s) {
  switch (s) {
    case SerrinSign::NegatedSolution:
      return "negated-solution";
    case SerrinSign::NegatedData:
      return "negated-data";
    case SerrinSign::AsWritten:
      return "as-written";
  }
  return "?";
}

double BenchmarkCase::u(double r) const {
  if (family == CaseFamily::Radial) return u_exact->u(r);
  return serrin_u_sign(sign) * std::pow(r, gamma);
}

double BenchmarkCase::du(double r) const {
  if (family == CaseFamily::Radial) return r == 0.0 ? 0.0 : u_exact->du(r);
  if (r == 0.0) return 0.0;
  return serrin_u_sign(sign) * gamma * std::pow(r, gamma - 1.0);
}

double BenchmarkCase::source_exponent() const {
  if (family == CaseFamily::Radial) return -s;
  return (gamma - 1.0) * (p - 1.0) - 1.0;
}

double BenchmarkCase::source(double r) const {
  if (family == CaseFamily::Radial) return u_exact->source(r);
  const double bracket = (gamma - 1.0) * (p - 1.0) - 1.0 + n;
  return serrin_f_sign(sign) * std::pow(gamma, p - 1.0) * bracket * std::pow(r, source_exponent());
}

double BenchmarkCase::self_check() const {
  auto flux = [&](double r) {
    const double d = du(r);
    return std::pow(r, n - 1) * std::pow(std::abs(d), p - 2.0) * d;
  };
  double worst = 0.0;
  for (int k = 0; k < 100; ++k) {
    const double r = 0.05 + (1.0 - 0.05) * k / 99.0;
    const double step = 1e-3 * r;
    auto central = [&](double d) { return (flux(r + d) - flux(r - d)) / (2.0 * d); };
    const double derivative = (4.0 * central(0.5 * step) - central(step)) / 3.0;
    const double lhs = -std::pow(r, 1 - n) * derivative;
    const double rhs = source(r);
    worst = std::max(worst, std::abs(lhs - rhs) / std::abs(rhs));
  }
  return worst;
}

ScalarField BenchmarkCase::source_field(GridPtr grid) const {
  auto fn = [this](Point x) { return source(norm(x)); };
  if (source_exponent() < 0.0) return ScalarField::sample_singular(std::move(grid), fn, {0.0, 0.0});
  return ScalarField::sample(std::move(grid), fn);
}

ScalarField BenchmarkCase::exact_field(GridPtr grid) const {
  return ScalarField::sample(std::move(grid), [this](Point x) { return u(norm(x)); });
}

VectorField BenchmarkCase::exact_gradient(GridPtr grid) const {
  return VectorField::sample(std::move(grid), [this](Point x) -> VectorField::Value {
    const double r = norm(x);
    if (r == 0.0) return {0.0, 0.0};
    const double d = du(r) / r;
    return {d * x.x, d * x.y};
  });
}

BenchmarkCase radial_case(double s, double p, int n, std::optional<double> c) {
  if (!(s >= 0.0 && s < 1.0)) {
    std::ostringstream msg;
    msg << "data leaves the admissible Morrey range (s=" << s << " must lie in [0,1))";
    throw PreconditionError(msg.str());
  }
  BenchmarkCase out;
  out.family = CaseFamily::Radial;
  out.id = "radial-" + format_number(s);
  out.p = p;
  out.n = n;
  out.s = s;
  out.c = c.value_or(n - s);
  out.u_exact = radial_oracle(s, out.c, p, n);
  out.lambda_true = n - s;
  out.alpha_true = std::min(1.0, out.u_exact->beta);
  try {
    out.prediction = predicted_alpha(p, out.lambda_true, n);
  } catch (const PreconditionError& e) {
    out.prediction_note = e.what();
  }
  return out;
}

BenchmarkCase serrin_case(double gamma, double p, int n, SerrinSign sign) {
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    std::ostringstream msg;
    msg << "Serrin exponent must satisfy 0 < gamma <= 1 (gamma=" << gamma << ")";
    throw PreconditionError(msg.str());
  }
  if (!(p > 1.0) || n < 1) throw PreconditionError("Serrin case needs p > 1 and n >= 1");
  BenchmarkCase out;
  out.family = CaseFamily::Serrin;
  out.id = "serrin-" + format_number(gamma);
  out.p = p;
  out.n = n;
  out.gamma = gamma;
  out.sign = sign;
  out.lambda_true = out.source_exponent() + n;
  if (!(out.lambda_true > 0.0)) {
    std::ostringstream msg;
    msg << "source not integrable near the origin (exponent " << out.source_exponent()
        << " <= -n)";
    throw PreconditionError(msg.str());
  }
  const double mismatch = out.self_check();
  if (!(mismatch <= 1e-8)) {
    std::ostringstream msg;
    msg << "Serrin sign convention '" << to_string(sign)
        << "' fails the substitution check (relative mismatch " << mismatch << ")";
    throw PreconditionError(msg.str());
  }
  try {
    out.prediction = predicted_alpha(p, out.lambda_true, n);
  } catch (const PreconditionError& e) {
    out.prediction_note = e.what();
  }
  return out;
}

MatrixSpec MatrixSpec::defaults() { return {{2.0}, {0.2, 0.5, 0.8}, {0.75, 1.0}, 2}; }

CaseMatrix case_matrix(const MatrixSpec& spec) {
  CaseMatrix out;
  for (double p : spec.ps) {
    for (double s : spec.ss) {
      try {
        predicted_alpha(p, spec.n - s, spec.n);
        out.cases.push_back(radial_case(s, p, spec.n));
      } catch (const PreconditionError& e) {
        out.skipped.push_back("radial p=" + format_number(p) + " s=" + format_number(s) +
                              " n=" + std::to_string(spec.n) + ": " + e.what());
      }
    }
    for (double g : spec.gammas) {
      try {
        out.cases.push_back(serrin_case(g, p, spec.n));
      } catch (const PreconditionError& e) {
        out.skipped.push_back("serrin p=" + format_number(p) + " gamma=" + format_number(g) +
                              " n=" + std::to_string(spec.n) + ": " + e.what());
      }
    }
  }
  return out;
}

double alpha_tolerance(const RunOptions& opts) { return opts.use_solver ? 0.05 : 0.02; }

CaseResult run_case(const BenchmarkCase& bc, const RunOptions& opts) {
  if (opts.use_solver && bc.n != Grid::dim) {
    throw PreconditionError("the solver path runs only in two dimensions");
  }
  const GridPtr grid = make_grid(bc.domain, opts.h);
  const Point origin{0.0, 0.0};

  CaseResult out;
  out.id = bc.id;
  out.p = bc.p;
  out.lambda = bc.lambda_true;
  out.alpha_true = bc.alpha_true;
  if (bc.prediction) out.alpha_pred = bc.prediction->alpha;

  ScalarField u;
  VectorField du;
  if (opts.use_solver) {
    SolverConfig cfg = opts.solver;
    cfg.p = bc.p;
    const SolveResult res = solve_p_poisson(bc.source_field(grid), bc.exact_field(grid), cfg);
    out.solver_residual = res.residual;
    out.solver_iterations = res.iterations;
    u = res.u;
    du = gradient(u);
  } else {
    u = bc.exact_field(grid);
    du = bc.family == CaseFamily::Radial ? bc.exact_gradient(grid) : gradient(u);
  }
  for (std::size_t k = 0; k < grid->size(); ++k) {
    if (grid->in_domain(k)) out.max_gradient = std::max(out.max_gradient, magnitude(du[k]));
  }

  const auto radii = default_excess_radii(*grid, origin);
  double target = 0.0;
  if (bc.family == CaseFamily::Radial) {
    out.profile = campanato_excess(du, origin, radii, bc.p);
    target = *bc.alpha_true;
  } else {
    out.profile = campanato_excess(u, origin, radii, bc.p);
    target = bc.gamma;
    std::ostringstream note;
    note << "not C1, lambda=" << bc.lambda_true << (bc.lambda_true <= bc.n - 1 ? " <= " : " > ")
         << "n-1";
    out.note = note.str();
  }
  out.fit = fit_exponent(out.profile);
  out.alpha_hat = out.fit.alpha_hat;
  out.pass = std::abs(out.alpha_hat - target) <= alpha_tolerance(opts);
  if (bc.family == CaseFamily::Radial && !bc.prediction) out.note = bc.prediction_note;
  return out;
}

BenchmarkCase case_from_id(const std::string& id, double p, int n) {
  auto parse_tail = [&](std::size_t prefix) {
    const std::string tail = id.substr(prefix);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tail, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != tail.size()) throw PreconditionError("malformed case id '" + id + "'");
    return v;
  };
  if (id.rfind("radial-", 0) == 0) return radial_case(parse_tail(7), p, n);
  if (id.rfind("serrin-", 0) == 0) return serrin_case(parse_tail(7), p, n);
  throw PreconditionError("unknown case id '" + id + "' (expected radial-<s> or serrin-<gamma>)");
}

}  // namespace morreylab
