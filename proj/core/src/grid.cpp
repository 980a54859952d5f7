#include "morreylab/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "morreylab/errors.hpp"
#include "morreylab/quadrature.hpp"

namespace morreylab {

double norm(Point p) { return std::hypot(p.x, p.y); }
double distance(Point a, Point b) { return norm(a - b); }

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::UnitDisk: return "disk";
    case DomainKind::UnitSquare: return "square";
    case DomainKind::Annulus: return "annulus";
  }
  return "unknown";
}

DomainKind domain_kind_from_string(const std::string& name) {
  if (name == "disk") return DomainKind::UnitDisk;
  if (name == "square") return DomainKind::UnitSquare;
  if (name == "annulus") return DomainKind::Annulus;
  throw PreconditionError("unknown domain '" + name + "' (expected disk, square or annulus)");
}

namespace {

constexpr double kMembershipSlack = 1e-12;

}  // namespace

Grid::Grid(DomainKind kind, double h) : kind_(kind), h_(h) {
  if (!(h > 0.0) || !std::isfinite(h)) {
    throw PreconditionError("grid spacing must be positive");
  }
  switch (kind) {
    case DomainKind::UnitDisk:
    case DomainKind::Annulus:
      lower_ = {-1.0, -1.0};
      upper_ = {1.0, 1.0};
      diameter_ = 2.0;
      break;
    case DomainKind::UnitSquare:
      lower_ = {0.0, 0.0};
      upper_ = {1.0, 1.0};
      diameter_ = std::sqrt(2.0);
      break;
  }
  const double cells = (upper_.x - lower_.x) / h;
  const double rounded = std::round(cells);
  if (rounded < 4.0 || std::abs(cells - rounded) > 1e-9 * rounded) {
    throw PreconditionError("grid spacing must divide the domain extent into at least 4 cells");
  }
  h_ = (upper_.x - lower_.x) / rounded;
  nx_ = static_cast<int>(rounded) + 1;
  ny_ = nx_;

  std::vector<char> inside(static_cast<std::size_t>(nx_) * ny_);
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) inside[index(i, j)] = contains(node(i, j)) ? 1 : 0;
  }
  flags_.assign(inside.size(), NodeFlag::Exterior);
  for (int j = 0; j < ny_; ++j) {
    for (int i = 0; i < nx_; ++i) {
      const std::size_t k = index(i, j);
      if (!inside[k]) continue;
      const bool all_neighbours = i > 0 && i + 1 < nx_ && j > 0 && j + 1 < ny_ &&
                                  inside[index(i - 1, j)] && inside[index(i + 1, j)] &&
                                  inside[index(i, j - 1)] && inside[index(i, j + 1)];
      flags_[k] = all_neighbours ? NodeFlag::Interior : NodeFlag::Boundary;
    }
  }
}

bool Grid::contains(Point x) const {
  switch (kind_) {
    case DomainKind::UnitDisk:
      return x.x * x.x + x.y * x.y <= 1.0 + kMembershipSlack;
    case DomainKind::UnitSquare:
      return x.x >= -kMembershipSlack && x.x <= 1.0 + kMembershipSlack &&
             x.y >= -kMembershipSlack && x.y <= 1.0 + kMembershipSlack;
    case DomainKind::Annulus: {
      const double r2 = x.x * x.x + x.y * x.y;
      const double inner = annulus_inner_radius * annulus_inner_radius;
      return r2 <= 1.0 + kMembershipSlack && r2 >= inner * (1.0 - kMembershipSlack);
    }
  }
  return false;
}

double Grid::distance_to_boundary(Point x) const {
  if (!contains(x)) return 0.0;
  switch (kind_) {
    case DomainKind::UnitDisk:
      return std::max(0.0, 1.0 - norm(x));
    case DomainKind::UnitSquare:
      return std::max(0.0, std::min({x.x, x.y, 1.0 - x.x, 1.0 - x.y}));
    case DomainKind::Annulus: {
      const double r = norm(x);
      return std::max(0.0, std::min(r - annulus_inner_radius, 1.0 - r));
    }
  }
  return 0.0;
}

std::optional<std::size_t> Grid::node_at(Point x) const {
  const double fi = (x.x - lower_.x) / h_;
  const double fj = (x.y - lower_.y) / h_;
  const double ri = std::round(fi);
  const double rj = std::round(fj);
  if (std::abs(fi - ri) > 1e-9 || std::abs(fj - rj) > 1e-9) return std::nullopt;
  if (ri < 0 || rj < 0 || ri >= nx_ || rj >= ny_) return std::nullopt;
  return index(static_cast<int>(ri), static_cast<int>(rj));
}

std::size_t Grid::nearest_node(Point x) const {
  const int i = std::clamp(static_cast<int>(std::lround((x.x - lower_.x) / h_)), 0, nx_ - 1);
  const int j = std::clamp(static_cast<int>(std::lround((x.y - lower_.y) / h_)), 0, ny_ - 1);
  return index(i, j);
}

std::size_t Grid::count(NodeFlag f) const {
  return static_cast<std::size_t>(std::count(flags_.begin(), flags_.end(), f));
}

GridPtr make_grid(DomainKind kind, double h) { return std::make_shared<const Grid>(kind, h); }

bool in_ball(Point x, const Ball& b) {
  const double dx = x.x - b.center.x;
  const double dy = x.y - b.center.y;
  return dx * dx + dy * dy <= b.radius * b.radius * (1.0 + 1e-12);
}

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw PreconditionError("field requires a grid");
  if (values_.size() != grid_->size()) {
    throw PreconditionError("field length does not match the node count");
  }
}

ScalarField::ScalarField(GridPtr grid, double constant)
    : ScalarField(grid, std::vector<double>(grid ? grid->size() : 0, constant)) {}

ScalarField ScalarField::sample(GridPtr grid, const std::function<double(Point)>& fn) {
  std::vector<double> v(grid->size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = fn(grid->node(k));
  return ScalarField(std::move(grid), std::move(v));
}

ScalarField ScalarField::sample_singular(GridPtr grid, const std::function<double(Point)>& fn,
                                         Point singular_point) {
  const auto node = grid->node_at(singular_point);
  if (!node) throw PreconditionError("singular point must be a lattice node");
  std::vector<double> v(grid->size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (k != *node) v[k] = fn(grid->node(k));
  }
  const double h = grid->h();
  const double cell = polar_cell_integral(fn, grid->node(*node), h);
  v[*node] = cell / (h * h);
  ScalarField f(std::move(grid), std::move(v));
  f.singular_ = Singularity{*node, fn, cell};
  return f;
}

double ScalarField::cell_integral(std::size_t k) const {
  if (singular_ && singular_->node == k) return singular_->cell_integral;
  const double h = grid_->h();
  return values_[k] * h * h;
}

ScalarField ScalarField::map(const std::function<double(double)>& op) const {
  ScalarField out = *this;
  for (double& v : out.values_) v = op(v);
  if (singular_) {
    auto inner = singular_->formula;
    std::function<double(Point)> composed = [inner, op](Point x) { return op(inner(x)); };
    const double h = grid_->h();
    const double cell = polar_cell_integral(composed, grid_->node(singular_->node), h);
    out.values_[singular_->node] = cell / (h * h);
    out.singular_ = Singularity{singular_->node, std::move(composed), cell};
  }
  return out;
}

ScalarField& ScalarField::operator*=(double s) {
  for (double& v : values_) v *= s;
  if (singular_) {
    auto inner = singular_->formula;
    singular_->formula = [inner, s](Point x) { return s * inner(x); };
    singular_->cell_integral *= s;
  }
  return *this;
}

namespace {

ScalarField combine(const ScalarField& a, const ScalarField& b, double sign) {
  if (a.grid_ptr() != b.grid_ptr()) throw PreconditionError("fields live on different grids");
  std::vector<double> v(a.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a[k] + sign * b[k];
  return ScalarField(a.grid_ptr(), std::move(v));
}

}  // namespace

ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  ScalarField out = combine(a, b, 1.0);
  const auto& sa = a.singular_;
  const auto& sb = b.singular_;
  if (sa && sb && sa->node != sb->node) {
    throw PreconditionError("cannot add fields with singularities at different nodes");
  }
  if (sa || sb) {
    const std::size_t node = sa ? sa->node : sb->node;
    const double h = a.grid().h();
    auto fa = sa ? sa->formula : std::function<double(Point)>{};
    auto fb = sb ? sb->formula : std::function<double(Point)>{};
    const double ca = a[node];
    const double cb = b[node];
    std::function<double(Point)> sum = [fa, fb, ca, cb](Point x) {
      return (fa ? fa(x) : ca) + (fb ? fb(x) : cb);
    };
    const double cell = a.cell_integral(node) + b.cell_integral(node);
    out.values_[node] = cell / (h * h);
    out.singular_ = Singularity{node, std::move(sum), cell};
  }
  return out;
}

ScalarField operator-(const ScalarField& a, const ScalarField& b) { return a + (-1.0) * b; }

// ---------------------------------------------------------------------------
// VectorField

VectorField::VectorField(GridPtr grid, std::vector<Value> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw PreconditionError("field requires a grid");
  if (values_.size() != grid_->size()) {
    throw PreconditionError("field length does not match the node count");
  }
}

VectorField VectorField::sample(GridPtr grid, const std::function<Value(Point)>& fn) {
  std::vector<Value> v(grid->size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = fn(grid->node(k));
  return VectorField(std::move(grid), std::move(v));
}

VectorField& VectorField::operator*=(double s) {
  for (auto& v : values_) {
    for (double& c : v) c *= s;
  }
  return *this;
}

VectorField& VectorField::operator+=(const Value& shift) {
  for (auto& v : values_) {
    for (int d = 0; d < Grid::dim; ++d) v[d] += shift[d];
  }
  return *this;
}

VectorField operator-(const VectorField& a, const VectorField& b) {
  if (a.grid_ptr() != b.grid_ptr()) throw PreconditionError("fields live on different grids");
  std::vector<VectorField::Value> v(a.size());
  for (std::size_t k = 0; k < v.size(); ++k) {
    for (int d = 0; d < Grid::dim; ++d) v[k][d] = a[k][d] - b[k][d];
  }
  return VectorField(a.grid_ptr(), std::move(v));
}

double magnitude(const VectorField::Value& v) { return std::hypot(v[0], v[1]); }

// ---------------------------------------------------------------------------
// Integration

double integrate(const ScalarField& f) {
  const Grid& g = f.grid();
  double total = 0.0;
  bool any = false;
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (!g.in_domain(k)) continue;
    total += f.cell_integral(k);
    any = true;
  }
  if (!any) throw PreconditionError("empty region");
  return total;
}

std::vector<std::size_t> nodes_in_ball(const Grid& grid, const Ball& b) {
  std::vector<std::size_t> out;
  const double h = grid.h();
  const int j0 = std::max(0, static_cast<int>(std::floor((b.center.y - b.radius - grid.lower().y) / h)) - 1);
  const int j1 = std::min(grid.ny() - 1, static_cast<int>(std::ceil((b.center.y + b.radius - grid.lower().y) / h)) + 1);
  const int i0 = std::max(0, static_cast<int>(std::floor((b.center.x - b.radius - grid.lower().x) / h)) - 1);
  const int i1 = std::min(grid.nx() - 1, static_cast<int>(std::ceil((b.center.x + b.radius - grid.lower().x) / h)) + 1);
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const std::size_t k = grid.index(i, j);
      if (grid.in_domain(k) && in_ball(grid.node(i, j), b)) out.push_back(k);
    }
  }
  return out;
}

double integrate(const ScalarField& f, const Ball& b) {
  const auto nodes = nodes_in_ball(f.grid(), b);
  if (nodes.empty()) throw PreconditionError("empty region");
  double total = 0.0;
  for (std::size_t k : nodes) total += f.cell_integral(k);
  return total;
}

double ball_average(const ScalarField& g, const Ball& b) {
  const auto nodes = nodes_in_ball(g.grid(), b);
  if (nodes.empty()) throw PreconditionError("empty region");
  double total = 0.0;
  for (std::size_t k : nodes) total += g.cell_integral(k);
  const double h = g.grid().h();
  return total / (static_cast<double>(nodes.size()) * h * h);
}

VectorField::Value ball_average(const VectorField& g, const Ball& b) {
  const auto nodes = nodes_in_ball(g.grid(), b);
  if (nodes.empty()) throw PreconditionError("empty region");
  VectorField::Value sum{0.0, 0.0};
  for (std::size_t k : nodes) {
    for (int d = 0; d < Grid::dim; ++d) sum[d] += g[k][d];
  }
  for (double& s : sum) s /= static_cast<double>(nodes.size());
  return sum;
}

// ---------------------------------------------------------------------------
// Gradient

VectorField gradient(const ScalarField& u) {
  const Grid& g = u.grid();
  const double h = g.h();
  auto dom = [&](int i, int j) {
    return i >= 0 && j >= 0 && i < g.nx() && j < g.ny() && g.in_domain(g.index(i, j));
  };
  auto lattice = [&](int i, int j) { return i >= 0 && j >= 0 && i < g.nx() && j < g.ny(); };
  auto val = [&](int i, int j) { return u[g.index(i, j)]; };

  // Derivative along (di, dj) at node (i, j).
  auto derivative = [&](int i, int j, int di, int dj) {
    const double u0 = val(i, j);
    const bool fwd1 = dom(i + di, j + dj);
    const bool bwd1 = dom(i - di, j - dj);
    if (fwd1 && bwd1) return (val(i + di, j + dj) - val(i - di, j - dj)) / (2.0 * h);
    if (fwd1 && dom(i + 2 * di, j + 2 * dj)) {
      return (-3.0 * u0 + 4.0 * val(i + di, j + dj) - val(i + 2 * di, j + 2 * dj)) / (2.0 * h);
    }
    if (bwd1 && dom(i - 2 * di, j - 2 * dj)) {
      return (3.0 * u0 - 4.0 * val(i - di, j - dj) + val(i - 2 * di, j - 2 * dj)) / (2.0 * h);
    }
    if (fwd1) return (val(i + di, j + dj) - u0) / h;
    if (bwd1) return (u0 - val(i - di, j - dj)) / h;
    // No in-domain neighbour along this axis: use the stored lattice values.
    const bool fwd = lattice(i + di, j + dj), bwd = lattice(i - di, j - dj);
    if (fwd && bwd) return (val(i + di, j + dj) - val(i - di, j - dj)) / (2.0 * h);
    if (fwd) return (val(i + di, j + dj) - u0) / h;
    if (bwd) return (u0 - val(i - di, j - dj)) / h;
    return 0.0;
  };

  std::vector<VectorField::Value> out(g.size(), VectorField::Value{0.0, 0.0});
  for (int j = 0; j < g.ny(); ++j) {
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      if (!g.in_domain(k)) continue;
      out[k] = {derivative(i, j, 1, 0), derivative(i, j, 0, 1)};
    }
  }
  return VectorField(u.grid_ptr(), std::move(out));
}

// ---------------------------------------------------------------------------
// BallIntegrator

BallIntegrator::BallIntegrator(const ScalarField& f) : grid_(f.grid_ptr()) {
  const Grid& g = *grid_;
  const std::size_t stride = static_cast<std::size_t>(g.nx()) + 1;
  prefix_.assign(stride * g.ny(), 0.0);
  count_prefix_.assign(stride * g.ny(), 0);
  for (int j = 0; j < g.ny(); ++j) {
    const std::size_t base = stride * j;
    for (int i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, j);
      const bool in = g.in_domain(k);
      prefix_[base + i + 1] = prefix_[base + i] + (in ? f.cell_integral(k) : 0.0);
      count_prefix_[base + i + 1] = count_prefix_[base + i] + (in ? 1 : 0);
    }
  }
}

std::optional<BallIntegrator::RowSpan> BallIntegrator::row_span(int j, const Ball& b) const {
  const Grid& g = *grid_;
  const double h = g.h();
  const double y = g.lower().y + j * h;
  const double dy = y - b.center.y;
  const double r2 = b.radius * b.radius;
  if (dy * dy > r2 * (1.0 + 1e-12)) return std::nullopt;
  const double half = std::sqrt(std::max(0.0, r2 - dy * dy));
  int lo = static_cast<int>(std::ceil((b.center.x - half - g.lower().x) / h));
  int hi = static_cast<int>(std::floor((b.center.x + half - g.lower().x) / h));
  lo = std::clamp(lo, 0, g.nx() - 1);
  hi = std::clamp(hi, 0, g.nx() - 1);
  while (lo > 0 && in_ball(g.node(lo - 1, j), b)) --lo;
  while (lo <= hi && !in_ball(g.node(lo, j), b)) ++lo;
  while (hi + 1 < g.nx() && in_ball(g.node(hi + 1, j), b)) ++hi;
  while (hi >= lo && !in_ball(g.node(hi, j), b)) --hi;
  if (lo > hi) return std::nullopt;
  return RowSpan{lo, hi};
}

double BallIntegrator::integral(const Ball& b) const {
  const Grid& g = *grid_;
  const std::size_t stride = static_cast<std::size_t>(g.nx()) + 1;
  const double h = g.h();
  const int j0 = std::max(0, static_cast<int>(std::floor((b.center.y - b.radius - g.lower().y) / h)) - 1);
  const int j1 = std::min(g.ny() - 1, static_cast<int>(std::ceil((b.center.y + b.radius - g.lower().y) / h)) + 1);
  double total = 0.0;
  for (int j = j0; j <= j1; ++j) {
    const auto span = row_span(j, b);
    if (!span) continue;
    total += prefix_[stride * j + span->hi + 1] - prefix_[stride * j + span->lo];
  }
  return total;
}

std::size_t BallIntegrator::count(const Ball& b) const {
  const Grid& g = *grid_;
  const std::size_t stride = static_cast<std::size_t>(g.nx()) + 1;
  const double h = g.h();
  const int j0 = std::max(0, static_cast<int>(std::floor((b.center.y - b.radius - g.lower().y) / h)) - 1);
  const int j1 = std::min(g.ny() - 1, static_cast<int>(std::ceil((b.center.y + b.radius - g.lower().y) / h)) + 1);
  std::size_t total = 0;
  for (int j = j0; j <= j1; ++j) {
    const auto span = row_span(j, b);
    if (!span) continue;
    total += count_prefix_[stride * j + span->hi + 1] - count_prefix_[stride * j + span->lo];
  }
  return total;
}

// ---------------------------------------------------------------------------
// CSV

void write_node_csv(std::ostream& out, const ScalarField& f) {
  const Grid& g = f.grid();
  out << "x,y,flag,value\n";
  char line[128];
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Point x = g.node(k);
    std::snprintf(line, sizeof line, "%.17g,%.17g,%d,%.17g\n", x.x, x.y,
                  static_cast<int>(g.flag(k)), f[k]);
    out << line;
  }
}

ScalarField read_node_csv(std::istream& in, GridPtr grid) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,y,flag,value", 0) != 0) {
    throw PreconditionError("node table: missing header x,y,flag,value");
  }
  std::vector<double> values;
  values.reserve(grid->size());
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    double x = 0, y = 0, v = 0;
    int flag = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%d,%lf", &x, &y, &flag, &v) != 4) {
      throw PreconditionError("node table: malformed row '" + line + "'");
    }
    const std::size_t k = values.size();
    if (k >= grid->size()) throw PreconditionError("node table: more rows than grid nodes");
    const Point expect = grid->node(k);
    if (std::abs(expect.x - x) > 1e-9 || std::abs(expect.y - y) > 1e-9 ||
        flag != static_cast<int>(grid->flag(k))) {
      throw PreconditionError("node table does not match the grid at row " + std::to_string(k));
    }
    values.push_back(v);
  }
  if (values.size() != grid->size()) throw PreconditionError("node table: row count mismatch");
  return ScalarField(std::move(grid), std::move(values));
}

}  // namespace morreylab
