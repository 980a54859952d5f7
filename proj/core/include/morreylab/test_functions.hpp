#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "morreylab/grid.hpp"

namespace morreylab {

enum class TestShape { Tent, Bump };

/// Compactly supported test function: tent height*(1-|x-c|/rho)_+ or smooth bump
/// height*(1-(|x-c|/rho)^2)_+^2.
struct TestFunctionSpec {
  TestShape shape = TestShape::Tent;
  Point center;
  double radius = 0.0;
  double height = 1.0;
};

double evaluate(const TestFunctionSpec& spec, Point x);
ScalarField make_test_function(GridPtr grid, const TestFunctionSpec& spec);

/// `count` test functions on random balls with radii log-uniform in [r_lo, r_hi],
/// kept at least two lattice spacings away from the domain boundary. Shapes
/// alternate tent / bump.
std::vector<TestFunctionSpec> random_test_family(const Grid& grid, std::size_t count,
                                                 std::mt19937_64& rng, double r_lo, double r_hi);

}  // namespace morreylab
