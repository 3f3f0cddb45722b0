#ifndef NECKDOWN_STEADY_STATES_HPP
#define NECKDOWN_STEADY_STATES_HPP

#include <neckdown/grid.hpp>

namespace neckdown
{

/**
 * The energy-minimizing steady profile h_P for boundary pressure P.
 *
 * For P <= 2 it is the parabola (P/2)(x^2 - 1) + 1. For P > 2 it consists of
 * two parabolic arcs (P/2)(|x| - x_P)^2 flanking a dead zone |x| < x_P where
 * it vanishes, with contact point x_P = 1 - sqrt(2/P).
 */
struct SteadyState
{
  double  pressure      = 0.0;
  double  contact_point = 0.0;
  Profile profile;
};

/// x_P = 1 - sqrt(2/P) for P > 2, otherwise 0. Throws for P <= 0.
double contact_point(double P);

/// Pointwise value of h_P.
double steady_value(double P, double x);

/// Nodal sampling of h_P (exact formula at each node, no snapping of x_P).
SteadyState steady_profile(double P, const Grid &grid);

/// Closed-form energy of h_P: 2P - P^2/3 for P <= 2, (4 sqrt(2)/3) sqrt(P) otherwise.
double steady_energy(double P);

} // namespace neckdown

#endif
