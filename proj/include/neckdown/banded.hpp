#ifndef NECKDOWN_BANDED_HPP
#define NECKDOWN_BANDED_HPP

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace neckdown
{

/// Raised when a banded factorization meets a zero pivot.
class SingularMatrix : public std::runtime_error
{
public:
  explicit SingularMatrix(std::size_t column);
  std::size_t column() const { return column_; }

private:
  std::size_t column_;
};


/**
 * Square matrix with `lower` sub-diagonals and `upper` super-diagonals.
 * Storage is row-wise and reserves `lower` extra super-diagonals for the
 * fill created by partial pivoting.
 */
class BandedMatrix
{
public:
  BandedMatrix() = default;
  BandedMatrix(std::size_t n, std::size_t lower, std::size_t upper);

  std::size_t size() const { return n_; }
  std::size_t lower() const { return kl_; }
  std::size_t upper() const { return ku_; }

  bool   in_band(std::size_t i, std::size_t j) const;
  double operator()(std::size_t i, std::size_t j) const;
  double &operator()(std::size_t i, std::size_t j);

  std::vector<double> multiply(std::span<const double> x) const;
  double              norm_1() const;
  double              norm_inf() const;

private:
  friend class BandedLU;
  std::size_t width() const { return 2 * kl_ + ku_ + 1; }
  double     &raw(std::size_t i, std::size_t j) { return data_[i * width() + (j + kl_ - i)]; }
  double      raw(std::size_t i, std::size_t j) const { return data_[i * width() + (j + kl_ - i)]; }

  std::size_t         n_  = 0;
  std::size_t         kl_ = 0;
  std::size_t         ku_ = 0;
  std::vector<double> data_;
};


/// Gaussian elimination with partial pivoting restricted to the band.
class BandedLU
{
public:
  explicit BandedLU(const BandedMatrix &a);

  std::vector<double> solve(std::span<const double> b) const;
  std::vector<double> solve_transposed(std::span<const double> b) const;

  /// Hager's estimate of the 1-norm condition number.
  double condition_estimate() const;

private:
  BandedMatrix             lu_;
  std::vector<std::size_t> pivots_;
  double                   norm1_ = 0.0;
};

} // namespace neckdown

#endif
