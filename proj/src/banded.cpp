#include <neckdown/banded.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace neckdown
{

SingularMatrix::SingularMatrix(std::size_t column)
  : std::runtime_error("zero pivot in banded factorization at column " + std::to_string(column))
  , column_(column)
{}


BandedMatrix::BandedMatrix(std::size_t n, std::size_t lower, std::size_t upper)
  : n_(n)
  , kl_(lower)
  , ku_(upper)
  , data_(n * (2 * lower + upper + 1), 0.0)
{}

bool BandedMatrix::in_band(std::size_t i, std::size_t j) const
{
  return i < n_ && j < n_ && j + kl_ >= i && j <= i + ku_;
}

double BandedMatrix::operator()(std::size_t i, std::size_t j) const
{
  return in_band(i, j) ? raw(i, j) : 0.0;
}

double &BandedMatrix::operator()(std::size_t i, std::size_t j)
{
  if (!in_band(i, j))
    throw std::out_of_range("banded matrix entry (" + std::to_string(i) + ", " + std::to_string(j) +
                            ") is outside the band");
  return raw(i, j);
}

std::vector<double> BandedMatrix::multiply(std::span<const double> x) const
{
  std::vector<double> y(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    {
      const std::size_t j0 = i > kl_ ? i - kl_ : 0;
      const std::size_t j1 = std::min(n_ - 1, i + ku_);
      double s = 0.0;
      for (std::size_t j = j0; j <= j1; ++j)
        s += raw(i, j) * x[j];
      y[i] = s;
    }
  return y;
}

double BandedMatrix::norm_inf() const
{
  double best = 0.0;
  for (std::size_t i = 0; i < n_; ++i)
    {
      const std::size_t j0 = i > kl_ ? i - kl_ : 0;
      const std::size_t j1 = std::min(n_ - 1, i + ku_);
      double s = 0.0;
      for (std::size_t j = j0; j <= j1; ++j)
        s += std::abs(raw(i, j));
      best = std::max(best, s);
    }
  return best;
}

double BandedMatrix::norm_1() const
{
  std::vector<double> col(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i)
    {
      const std::size_t j0 = i > kl_ ? i - kl_ : 0;
      const std::size_t j1 = std::min(n_ - 1, i + ku_);
      for (std::size_t j = j0; j <= j1; ++j)
        col[j] += std::abs(raw(i, j));
    }
  return col.empty() ? 0.0 : *std::max_element(col.begin(), col.end());
}


BandedLU::BandedLU(const BandedMatrix &a)
  : lu_(a)
  , pivots_(a.size())
  , norm1_(a.norm_1())
{
  const std::size_t n  = lu_.n_;
  const std::size_t kl = lu_.kl_;
  const std::size_t ku = lu_.ku_ + kl; // upper bandwidth of U after fill

  for (std::size_t k = 0; k < n; ++k)
    {
      const std::size_t last_row = std::min(n - 1, k + kl);
      std::size_t       p        = k;
      double            best     = std::abs(lu_.raw(k, k));
      for (std::size_t i = k + 1; i <= last_row; ++i)
        if (std::abs(lu_.raw(i, k)) > best)
          {
            best = std::abs(lu_.raw(i, k));
            p    = i;
          }
      pivots_[k] = p;
      if (best == 0.0)
        throw SingularMatrix(k);

      const std::size_t last_col = std::min(n - 1, k + ku);
      if (p != k)
        for (std::size_t j = k; j <= last_col; ++j)
          std::swap(lu_.raw(k, j), lu_.raw(p, j));

      const double pivot = lu_.raw(k, k);
      for (std::size_t i = k + 1; i <= last_row; ++i)
        {
          const double m = lu_.raw(i, k) / pivot;
          lu_.raw(i, k)  = m;
          if (m != 0.0)
            for (std::size_t j = k + 1; j <= last_col; ++j)
              lu_.raw(i, j) -= m * lu_.raw(k, j);
        }
    }
}

std::vector<double> BandedLU::solve(std::span<const double> b) const
{
  const std::size_t n  = lu_.n_;
  const std::size_t kl = lu_.kl_;
  const std::size_t ku = lu_.ku_ + kl;
  if (b.size() != n)
    throw std::invalid_argument("right-hand side length does not match the matrix");

  std::vector<double> x(b.begin(), b.end());
  for (std::size_t k = 0; k < n; ++k)
    {
      if (pivots_[k] != k)
        std::swap(x[k], x[pivots_[k]]);
      const std::size_t last_row = std::min(n - 1, k + kl);
      for (std::size_t i = k + 1; i <= last_row; ++i)
        x[i] -= lu_.raw(i, k) * x[k];
    }
  for (std::size_t k = n; k-- > 0;)
    {
      const std::size_t last_col = std::min(n - 1, k + ku);
      double s = x[k];
      for (std::size_t j = k + 1; j <= last_col; ++j)
        s -= lu_.raw(k, j) * x[j];
      x[k] = s / lu_.raw(k, k);
    }
  return x;
}

std::vector<double> BandedLU::solve_transposed(std::span<const double> b) const
{
  const std::size_t n  = lu_.n_;
  const std::size_t kl = lu_.kl_;
  const std::size_t ku = lu_.ku_ + kl;
  if (b.size() != n)
    throw std::invalid_argument("right-hand side length does not match the matrix");

  std::vector<double> x(b.begin(), b.end());
  // U^T y = b
  for (std::size_t k = 0; k < n; ++k)
    {
      const std::size_t first = k > ku ? k - ku : 0;
      double s = x[k];
      for (std::size_t j = first; j < k; ++j)
        s -= lu_.raw(j, k) * x[j];
      x[k] = s / lu_.raw(k, k);
    }
  // undo the unit-lower factors and row swaps in reverse order
  for (std::size_t k = n; k-- > 0;)
    {
      const std::size_t last_row = std::min(n - 1, k + kl);
      double s = x[k];
      for (std::size_t i = k + 1; i <= last_row; ++i)
        s -= lu_.raw(i, k) * x[i];
      x[k] = s;
      if (pivots_[k] != k)
        std::swap(x[k], x[pivots_[k]]);
    }
  return x;
}

double BandedLU::condition_estimate() const
{
  const std::size_t   n = lu_.n_;
  std::vector<double> x(n, 1.0 / static_cast<double>(n));
  double              estimate = 0.0;
  for (int iter = 0; iter < 5; ++iter)
    {
      const auto y = solve(x);
      estimate     = 0.0;
      for (double v : y)
        estimate += std::abs(v);
      std::vector<double> sgn(n);
      for (std::size_t i = 0; i < n; ++i)
        sgn[i] = y[i] >= 0.0 ? 1.0 : -1.0;
      const auto z = solve_transposed(sgn);
      std::size_t jmax = 0;
      double      ztx  = 0.0;
      for (std::size_t i = 0; i < n; ++i)
        {
          ztx += z[i] * x[i];
          if (std::abs(z[i]) > std::abs(z[jmax]))
            jmax = i;
        }
      if (std::abs(z[jmax]) <= ztx)
        break;
      std::fill(x.begin(), x.end(), 0.0);
      x[jmax] = 1.0;
    }
  return estimate * norm1_;
}

} // namespace neckdown
