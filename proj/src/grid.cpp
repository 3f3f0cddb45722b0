#include <neckdown/grid.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace neckdown
{

Grid make_grid(std::size_t n)
{
  if (n < 9)
    throw std::invalid_argument("grid needs at least 9 nodes, got " + std::to_string(n));
  if (n % 2 == 0)
    throw std::invalid_argument("grid node count must be odd so that x = 0 is a node, got " +
                                std::to_string(n));

  Grid g;
  g.dx_ = 2.0 / static_cast<double>(n - 1);
  g.nodes_.resize(n);
  const std::size_t mid = (n - 1) / 2;
  // Fill symmetrically so that nodes[i] == -nodes[n-1-i] bit for bit.
  for (std::size_t i = 0; i < mid; ++i)
    {
      const double x = -1.0 + static_cast<double>(i) * g.dx_;
      g.nodes_[i]         = x;
      g.nodes_[n - 1 - i] = -x;
    }
  g.nodes_[mid] = 0.0;
  return g;
}


Profile make_profile(const Grid &grid, std::vector<double> values, double pressure)
{
  if (values.size() != grid.size())
    throw std::invalid_argument("profile has " + std::to_string(values.size()) +
                                " values for a grid of " + std::to_string(grid.size()) + " nodes");
  for (double v : values)
    if (!std::isfinite(v))
      throw std::invalid_argument("profile contains a non-finite value");
  return Profile{grid, std::move(values), pressure};
}


std::vector<double> stencil_weights(std::span<const double> offsets, double at, int order)
{
  const std::size_t npts = offsets.size();
  const int         m    = order;
  // c[j][k]: weight of sample j for derivative k
  std::vector<std::vector<double>> c(npts, std::vector<double>(m + 1, 0.0));
  double c1 = 1.0;
  double c4 = offsets[0] - at;
  c[0][0]   = 1.0;
  for (std::size_t i = 1; i < npts; ++i)
    {
      const int mn = std::min<int>(static_cast<int>(i), m);
      double    c2 = 1.0;
      const double c5 = c4;
      c4 = offsets[i] - at;
      for (std::size_t j = 0; j < i; ++j)
        {
          const double c3 = offsets[i] - offsets[j];
          c2 *= c3;
          if (j == i - 1)
            {
              for (int k = mn; k >= 1; --k)
                c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
              c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
          for (int k = mn; k >= 1; --k)
            c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
          c[j][0] = c4 * c[j][0] / c3;
        }
      c1 = c2;
    }
  std::vector<double> w(npts);
  for (std::size_t j = 0; j < npts; ++j)
    w[j] = c[j][m];
  return w;
}


namespace
{
  struct Window
  {
    std::size_t         first;
    std::vector<double> weights;
  };

  // Weights for a window of `width` nodes starting at `first`, evaluated at node i.
  Window make_window(std::size_t first, std::size_t width, std::size_t i, int k, double scale)
  {
    std::vector<double> offs(width);
    for (std::size_t j = 0; j < width; ++j)
      offs[j] = static_cast<double>(first + j) - static_cast<double>(i);
    Window w{first, stencil_weights(offs, 0.0, k)};
    for (auto &x : w.weights)
      x *= scale;
    return w;
  }
} // namespace


std::vector<double> diff(std::span<const double> f, const Grid &grid, int k)
{
  if (k < 1 || k > 5)
    throw std::invalid_argument("derivative order must be in 1..5, got " + std::to_string(k));
  const std::size_t n = grid.size();
  if (f.size() != n)
    throw std::invalid_argument("field length does not match the grid");

  const std::size_t r        = static_cast<std::size_t>((k + 1) / 2);
  const std::size_t one_side = static_cast<std::size_t>(k + 2);
  const double      scale    = 1.0 / std::pow(grid.spacing(), k);

  std::vector<double> out(n, 0.0);

  const Window centered = make_window(0, 2 * r + 1, r, k, scale);
  for (std::size_t i = r; i + r < n; ++i)
    {
      double s = 0.0;
      for (std::size_t j = 0; j < centered.weights.size(); ++j)
        s += centered.weights[j] * f[i - r + j];
      out[i] = s;
    }

  for (std::size_t i = 0; i < r; ++i)
    {
      const Window left = make_window(0, one_side, i, k, scale);
      double       s    = 0.0;
      for (std::size_t j = 0; j < one_side; ++j)
        s += left.weights[j] * f[j];
      out[i] = s;

      // mirror image at the right end
      const std::size_t ir = n - 1 - i;
      double            sr = 0.0;
      const Window right = make_window(n - one_side, one_side, ir, k, scale);
      for (std::size_t j = 0; j < one_side; ++j)
        sr += right.weights[j] * f[n - one_side + j];
      out[ir] = sr;
    }
  return out;
}

std::vector<double> diff(const Profile &p, int k)
{
  return diff(p.values, p.grid, k);
}


double quadrature(std::span<const double> f, const Grid &grid, QuadratureRule rule)
{
  const std::size_t n = grid.size();
  if (f.size() != n)
    throw std::invalid_argument("field length does not match the grid");
  const double dx = grid.spacing();

  if (rule == QuadratureRule::simpson)
    {
      // n is odd, so the number of intervals is even.
      double s = f[0] + f[n - 1];
      for (std::size_t i = 1; i + 1 < n; ++i)
        s += (i % 2 == 1 ? 4.0 : 2.0) * f[i];
      return s * dx / 3.0;
    }

  // Pairwise summation from both ends keeps odd fields at exactly zero.
  double s = 0.5 * (f[0] + f[n - 1]);
  const std::size_t mid = (n - 1) / 2;
  for (std::size_t i = 1; i < mid; ++i)
    s += f[i] + f[n - 1 - i];
  s += f[mid];
  return s * dx;
}

double masked_quadrature(std::span<const double> f, const Grid &grid, const std::vector<bool> &mask)
{
  const std::size_t n = grid.size();
  if (f.size() != n || mask.size() != n)
    throw std::invalid_argument("field or mask length does not match the grid");
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    if (mask[i] && mask[i + 1])
      s += 0.5 * (f[i] + f[i + 1]);
  return s * grid.spacing();
}


double sobolev_norm(std::span<const double> f, const Grid &grid, int k, QuadratureRule rule)
{
  if (k < 0 || k > 3)
    throw std::invalid_argument("Sobolev order must be in 0..3, got " + std::to_string(k));
  std::vector<double> sq(f.size());
  double total = 0.0;
  for (int j = 0; j <= k; ++j)
    {
      if (j == 0)
        for (std::size_t i = 0; i < f.size(); ++i)
          sq[i] = f[i] * f[i];
      else
        {
          const auto d = diff(f, grid, j);
          for (std::size_t i = 0; i < f.size(); ++i)
            sq[i] = d[i] * d[i];
        }
      total += quadrature(sq, grid, rule);
    }
  return std::sqrt(total);
}

double sobolev_norm(const Profile &p, int k, QuadratureRule rule)
{
  return sobolev_norm(p.values, p.grid, k, rule);
}


MinPoint min_value(std::span<const double> f, const Grid &grid)
{
  if (f.size() != grid.size() || f.empty())
    throw std::invalid_argument("field length does not match the grid");
  std::size_t best = 0;
  for (std::size_t i = 1; i < f.size(); ++i)
    if (f[i] < f[best])
      best = i;
  return MinPoint{grid.node(best), f[best], best};
}

MinPoint min_value(const Profile &p)
{
  return min_value(p.values, p.grid);
}

} // namespace neckdown
