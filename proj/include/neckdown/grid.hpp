#ifndef NECKDOWN_GRID_HPP
#define NECKDOWN_GRID_HPP

#include <cstddef>
#include <span>
#include <vector>

namespace neckdown
{

/// Uniform node set on [-1, 1]. The node count is odd so that x = 0 is a node.
class Grid
{
public:
  Grid() = default;

  std::size_t size() const { return nodes_.size(); }
  double      spacing() const { return dx_; }
  double      node(std::size_t i) const { return nodes_[i]; }

  std::span<const double> nodes() const { return nodes_; }

  friend Grid make_grid(std::size_t n);
  friend bool operator==(const Grid &a, const Grid &b) { return a.nodes_.size() == b.nodes_.size(); }

private:
  double              dx_ = 0.0;
  std::vector<double> nodes_;
};

/// Throws std::invalid_argument for n < 9 or even n.
Grid make_grid(std::size_t n);


/// Nodal heights at one time, carrying the boundary pressure P.
struct Profile
{
  Grid                grid;
  std::vector<double> values;
  double              pressure = 0.0;

  std::size_t size() const { return values.size(); }
};

/// Builds a profile after checking length and finiteness.
Profile make_profile(const Grid &grid, std::vector<double> values, double pressure);


enum class QuadratureRule
{
  trapezoid,
  simpson
};

/**
 * Second-order finite difference approximation of the k-th derivative
 * (1 <= k <= 5) of a nodal field. Interior nodes use the centered stencil
 * on 2*floor((k+1)/2)+1 nodes; nodes too close to an end use the one-sided
 * window of k+2 consecutive nodes flush with that end.
 */
std::vector<double> diff(std::span<const double> f, const Grid &grid, int k);
std::vector<double> diff(const Profile &p, int k);

/// Composite quadrature of a nodal field over [-1, 1].
double quadrature(std::span<const double> f,
                  const Grid             &grid,
                  QuadratureRule          rule = QuadratureRule::trapezoid);

/// Trapezoid sum restricted to the intervals whose two end nodes are both in mask.
double masked_quadrature(std::span<const double> f,
                         const Grid             &grid,
                         const std::vector<bool> &mask);

/// Discrete H^k norm: sqrt(sum_{j<=k} ||d^j p||^2_{L2}), 0 <= k <= 3.
double sobolev_norm(const Profile &p, int k, QuadratureRule rule = QuadratureRule::trapezoid);
double sobolev_norm(std::span<const double> f,
                    const Grid             &grid,
                    int                     k,
                    QuadratureRule          rule = QuadratureRule::trapezoid);

struct MinPoint
{
  double      x = 0.0;
  double      h = 0.0;
  std::size_t index = 0;
};

/// Nodal minimum; ties go to the leftmost node.
MinPoint min_value(const Profile &p);
MinPoint min_value(std::span<const double> f, const Grid &grid);

/**
 * Weights of the derivative of order `order` at offset `at`, using the
 * sample offsets `offsets` (in units of the grid spacing). Standard
 * recursive construction of Fornberg.
 */
std::vector<double> stencil_weights(std::span<const double> offsets, double at, int order);

} // namespace neckdown

#endif
