#pragma once

#include "frd/lattice.hpp"

#include <span>

namespace frd {

struct ResolventParams {
    double a = 0.0;
    TorusGrid grid;

    static ResolventParams make(double a, const TorusGrid& grid);
};

// -Laplacian symbol 2 eps^{-2} sum_mu (1 - cos(eps p_mu)), non-negative.
double laplacian_symbol(const TorusGrid& grid, std::span<const double> p);
// (a - Laplacian symbol)^{-1}; zero-mode error at a = 0, p = 0.
double green_symbol(const ResolventParams& params, std::span<const double> p);
double green_symbol_continuum(double a, std::span<const double> p);

// Octant tabulations on the momentum grid.
EvenSymbol laplacian_symbol_grid(const TorusGrid& grid);
// With project_zero_mode the a = 0 value at p = 0 is set to 0.
EvenSymbol green_symbol_grid(const ResolventParams& params, bool project_zero_mode = false);
RealKernel green_kernel(const ResolventParams& params, bool project_zero_mode = false);

// Constant b with 2(1 - cos t) >= b t^2 on [-pi, pi].
constexpr double green_bound_b() { return 4.0 / (3.141592653589793 * 3.141592653589793); }

// Green's function of (-Laplacian + a) on the infinite unit lattice, from the
// heat-kernel integral of modified Bessel functions.
double lattice_green_infinite(int d, double a, std::span<const int> x);
// Same on the lattice of spacing eps (physical units).
double lattice_green_infinite(int d, double eps, double a, std::span<const int> x);
// const * integral of a^{-alpha/2} times the above, i.e. the fractional Green's function
// on the unit lattice.  Requires alpha < d.
double levy_green_infinite(int d, double alpha, std::span<const int> x);

} // namespace frd
