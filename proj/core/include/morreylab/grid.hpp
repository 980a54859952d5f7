#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace morreylab {

struct Point {
  double x = 0.0;
  double y = 0.0;

  Point operator+(Point o) const { return {x + o.x, y + o.y}; }
  Point operator-(Point o) const { return {x - o.x, y - o.y}; }
  Point operator*(double s) const { return {x * s, y * s}; }
  bool operator==(const Point&) const = default;
};

double norm(Point p);
double distance(Point a, Point b);

enum class DomainKind { UnitDisk, UnitSquare, Annulus };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

enum class NodeFlag : std::uint8_t { Exterior = 0, Boundary = 1, Interior = 2 };

/// Regular lattice covering the bounding box of a planar domain, with a per-node
/// membership mask. A node is Interior when it and its four axis neighbours lie in
/// the closed domain, Boundary when it lies in the domain but some neighbour does
/// not, and Exterior otherwise.
///
/// The unit disk and the annulus (inner radius 1/2) live on [-1,1]^2; the unit
/// square is [0,1]^2. The extent must be an integer multiple of h so that the
/// origin (disk) or the corners (square) are lattice nodes.
class Grid {
 public:
  static constexpr int dim = 2;
  static constexpr double annulus_inner_radius = 0.5;

  Grid(DomainKind kind, double h);

  DomainKind kind() const { return kind_; }
  double h() const { return h_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  std::size_t size() const { return flags_.size(); }
  Point lower() const { return lower_; }
  Point upper() const { return upper_; }
  double diameter() const { return diameter_; }

  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
  }
  int col(std::size_t k) const { return static_cast<int>(k % static_cast<std::size_t>(nx_)); }
  int row(std::size_t k) const { return static_cast<int>(k / static_cast<std::size_t>(nx_)); }
  Point node(int i, int j) const { return {lower_.x + i * h_, lower_.y + j * h_}; }
  Point node(std::size_t k) const { return node(col(k), row(k)); }

  NodeFlag flag(std::size_t k) const { return flags_[k]; }
  bool in_domain(std::size_t k) const { return flags_[k] != NodeFlag::Exterior; }
  bool interior(std::size_t k) const { return flags_[k] == NodeFlag::Interior; }

  /// Continuum membership of the closed domain.
  bool contains(Point x) const;
  /// Distance from an interior point to the domain boundary (0 outside).
  double distance_to_boundary(Point x) const;

  /// Index of the lattice node at exactly this position, if any.
  std::optional<std::size_t> node_at(Point x) const;
  std::size_t nearest_node(Point x) const;

  std::size_t count(NodeFlag f) const;

 private:
  DomainKind kind_;
  double h_;
  Point lower_;
  Point upper_;
  int nx_;
  int ny_;
  double diameter_;
  std::vector<NodeFlag> flags_;
};

using GridPtr = std::shared_ptr<const Grid>;

GridPtr make_grid(DomainKind kind, double h);

struct Ball {
  Point center;
  double radius;
};

/// Node membership used everywhere a ball is intersected with the lattice.
bool in_ball(Point x, const Ball& b);

/// Integrand carried alongside a field whose analytic formula blows up at one
/// node. The dual cell of that node is integrated with the polar subcell rule.
struct Singularity {
  std::size_t node;
  std::function<double(Point)> formula;
  double cell_integral;  // integral of formula over the dual cell of `node`
};

class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(GridPtr grid, std::vector<double> values);
  ScalarField(GridPtr grid, double constant);

  /// Samples fn at every node.
  static ScalarField sample(GridPtr grid, const std::function<double(Point)>& fn);
  /// Samples fn, marking the node at `singular_point` as singular: its value is the
  /// dual-cell average of fn from the polar subcell rule.
  static ScalarField sample_singular(GridPtr grid, const std::function<double(Point)>& fn,
                                     Point singular_point);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  double& operator[](std::size_t k) { return values_[k]; }
  const std::vector<double>& values() const { return values_; }
  std::vector<double>& values() { return values_; }
  const std::optional<Singularity>& singularity() const { return singular_; }

  /// Integral of the field over the dual cell of node k.
  double cell_integral(std::size_t k) const;

  /// Pointwise transform; a singular formula is composed with op and its cell
  /// integral recomputed.
  ScalarField map(const std::function<double(double)>& op) const;

  ScalarField& operator*=(double s);
  friend ScalarField operator*(double s, ScalarField f) { return f *= s; }
  friend ScalarField operator+(const ScalarField& a, const ScalarField& b);
  friend ScalarField operator-(const ScalarField& a, const ScalarField& b);

 private:
  GridPtr grid_;
  std::vector<double> values_;
  std::optional<Singularity> singular_;
};

class VectorField {
 public:
  using Value = std::array<double, Grid::dim>;

  VectorField() = default;
  VectorField(GridPtr grid, std::vector<Value> values);

  static VectorField sample(GridPtr grid, const std::function<Value(Point)>& fn);

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  const Value& operator[](std::size_t k) const { return values_[k]; }
  Value& operator[](std::size_t k) { return values_[k]; }
  const std::vector<Value>& values() const { return values_; }

  VectorField& operator*=(double s);
  VectorField& operator+=(const Value& shift);
  friend VectorField operator-(const VectorField& a, const VectorField& b);

 private:
  GridPtr grid_;
  std::vector<Value> values_;
};

double magnitude(const VectorField::Value& v);

/// Midpoint-rule integral over the whole domain (in-domain nodes, weight h^n).
double integrate(const ScalarField& f);
/// Midpoint-rule integral over the nodes of b that lie in the domain.
/// Throws PreconditionError("empty region") when no such node exists.
double integrate(const ScalarField& f, const Ball& b);

/// In-domain nodes of b, in lattice order.
std::vector<std::size_t> nodes_in_ball(const Grid& grid, const Ball& b);

/// Centered differences at interior nodes; second-order one-sided differences
/// where a centered stencil leaves the domain (first order if only one neighbour
/// is available). A domain node with no in-domain neighbour along an axis falls
/// back to the stored values of its lattice neighbours. Exterior nodes get a zero
/// vector.
VectorField gradient(const ScalarField& u);

double ball_average(const ScalarField& g, const Ball& b);
VectorField::Value ball_average(const VectorField& g, const Ball& b);

/// Row-prefix-sum table answering ball integrals of a fixed field in O(rows).
class BallIntegrator {
 public:
  explicit BallIntegrator(const ScalarField& f);

  double integral(const Ball& b) const;
  std::size_t count(const Ball& b) const;

 private:
  struct RowSpan {
    int lo;
    int hi;
  };
  std::optional<RowSpan> row_span(int j, const Ball& b) const;

  GridPtr grid_;
  std::vector<double> prefix_;              // (nx+1) entries per row
  std::vector<std::size_t> count_prefix_;   // in-domain node counts
};

/// Node table as CSV with columns x,y,flag,value (flag: 0 exterior, 1 boundary,
/// 2 interior), one row per node in lattice order (x fastest).
void write_node_csv(std::ostream& out, const ScalarField& f);
ScalarField read_node_csv(std::istream& in, GridPtr grid);

}  // namespace morreylab
