#include <neckdown/banded.hpp>

#include <Eigen/Dense>
#include <doctest.h>

#include <random>
#include <utility>
#include <stdexcept>

using namespace neckdown;

namespace
{
  BandedMatrix random_banded(std::size_t n, std::size_t kl, std::size_t ku, std::mt19937_64 &rng, Eigen::MatrixXd &dense)
  {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    BandedMatrix                           a(n, kl, ku);
    dense = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = (i > kl ? i - kl : 0); j <= std::min(n - 1, i + ku); ++j)
        {
          // weak diagonal so that pivoting is exercised
          const double v = u(rng) + (i == j ? 0.1 : 0.0);
          a(i, j)        = v;
          dense(i, j)    = v;
        }
    return a;
  }
} // namespace

TEST_CASE("band storage")
{
  BandedMatrix a(6, 2, 1);
  CHECK(a.in_band(3, 1));
  CHECK(a.in_band(3, 4));
  CHECK_FALSE(a.in_band(3, 5));
  CHECK_FALSE(a.in_band(0, 3));
  CHECK(std::as_const(a)(0, 5) == 0.0);
  CHECK_THROWS(a(0, 5) = 1.0);
  a(2, 2) = 3.0;
  CHECK(a(2, 2) == 3.0);
}

TEST_CASE("LU solve agrees with a dense solve")
{
  std::mt19937_64 rng(11);
  for (std::size_t n : {5u, 17u, 60u})
    for (auto [kl, ku] : {std::pair<std::size_t, std::size_t>{2, 2}, {1, 3}, {3, 0}})
      {
        Eigen::MatrixXd dense;
        const auto      a = random_banded(n, kl, ku, rng, dense);
        Eigen::VectorXd b = Eigen::VectorXd::Random(n);
        const auto      x = BandedLU(a).solve(std::vector<double>(b.data(), b.data() + n));
        const auto      y = BandedLU(a).solve_transposed(std::vector<double>(b.data(), b.data() + n));
        const Eigen::VectorXd xd = dense.fullPivLu().solve(b);
        const Eigen::VectorXd yd = dense.transpose().fullPivLu().solve(b);
        const double cond = dense.cwiseAbs().colwise().sum().maxCoeff() *
                            dense.inverse().cwiseAbs().colwise().sum().maxCoeff();
        const double xn = xd.cwiseAbs().maxCoeff(), yn = yd.cwiseAbs().maxCoeff();
        for (std::size_t i = 0; i < n; ++i)
          {
            CHECK(std::abs(x[i] - xd[i]) <= 1e-13 * cond * xn);
            CHECK(std::abs(y[i] - yd[i]) <= 1e-13 * cond * yn);
          }

        // normwise backward error
        const auto ax   = a.multiply(x);
        double     rmax = 0.0, xmax = 0.0;
        for (std::size_t i = 0; i < n; ++i)
          {
            rmax = std::max(rmax, std::abs(ax[i] - b[i]));
            xmax = std::max(xmax, std::abs(x[i]));
          }
        CHECK(rmax <= 1e-14 * (a.norm_inf() * xmax + b.cwiseAbs().maxCoeff()));

        CHECK(a.norm_1() == doctest::Approx(dense.cwiseAbs().colwise().sum().maxCoeff()));
        CHECK(a.norm_inf() == doctest::Approx(dense.cwiseAbs().rowwise().sum().maxCoeff()));
      }
}

TEST_CASE("condition estimate brackets the exact 1-norm condition number")
{
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10; ++trial)
    {
      Eigen::MatrixXd dense;
      const auto      a     = random_banded(30, 2, 2, rng, dense);
      const double    exact = dense.cwiseAbs().colwise().sum().maxCoeff() *
                           dense.inverse().cwiseAbs().colwise().sum().maxCoeff();
      const double est = BandedLU(a).condition_estimate();
      CHECK(est <= exact * (1.0 + 1e-8));
      CHECK(est >= exact / 10.0);
    }
}

TEST_CASE("singular matrix is reported")
{
  BandedMatrix a(4, 1, 1);
  a(0, 0) = 1.0;
  a(1, 1) = 1.0;
  a(3, 3) = 1.0;
  CHECK_THROWS_AS(BandedLU{a}, SingularMatrix);
}
