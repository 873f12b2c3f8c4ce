#include "frd/resolvent.hpp"

#include "frd/errors.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_bessel.h>
#include <gsl/gsl_sf_gamma.h>

#include <cmath>
#include <cstdlib>
#include <vector>

namespace frd {

ResolventParams ResolventParams::make(double a, const TorusGrid& grid) {
    if (!(a >= 0.0)) throw ParameterError("resolvent parameter must be non-negative");
    return ResolventParams{a, grid};
}

double laplacian_symbol(const TorusGrid& grid, std::span<const double> p) {
    double s = 0.0;
    for (double pm : p) s += 1.0 - std::cos(grid.eps * pm);
    return 2.0 * s / (grid.eps * grid.eps);
}

double green_symbol(const ResolventParams& params, std::span<const double> p) {
    const double lap = laplacian_symbol(params.grid, p);
    const double den = params.a + lap;
    if (den == 0.0) throw ZeroModeError("massless Green's symbol evaluated at the zero mode");
    return 1.0 / den;
}

double green_symbol_continuum(double a, std::span<const double> p) {
    double p2 = 0.0;
    for (double v : p) p2 += v * v;
    if (a + p2 == 0.0) throw ZeroModeError("massless continuum symbol evaluated at p = 0");
    return 1.0 / (a + p2);
}

EvenSymbol laplacian_symbol_grid(const TorusGrid& grid) {
    EvenSymbol s(grid);
    const int d = grid.d, N = s.N();
    std::vector<double> axis(N);
    for (int k = 0; k < N; ++k) axis[k] = 2.0 * (1.0 - std::cos(grid.eps * grid.momentum(k))) / (grid.eps * grid.eps);
    std::vector<int> k(d);
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        octant_unflat(i, d, N, k.data());
        double v = 0.0;
        for (int a = 0; a < d; ++a) v += axis[k[a]];
        s.values[i] = v;
    }
    return s;
}

EvenSymbol green_symbol_grid(const ResolventParams& params, bool project_zero_mode) {
    EvenSymbol s = laplacian_symbol_grid(params.grid);
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        const double den = params.a + s.values[i];
        if (den == 0.0) {
            if (!project_zero_mode) throw ZeroModeError("massless Green's kernel requires zero-mode projection");
            s.values[i] = 0.0;
        } else {
            s.values[i] = 1.0 / den;
        }
    }
    return s;
}

RealKernel green_kernel(const ResolventParams& params, bool project_zero_mode) {
    return kernel_of(green_symbol_grid(params, project_zero_mode), params.grid.side() / 2);
}

namespace {

struct HeatParams {
    std::vector<int> x;
    double a;
    double power;  // extra factor t^power
};

double heat_product(const std::vector<int>& x, double t) {
    double v = 1.0;
    for (int xi : x) {
        if (t == 0.0) return xi == 0 ? v : 0.0;
        v *= gsl_sf_bessel_In_scaled(std::abs(xi), 2.0 * t);
    }
    return v;
}

double integrand(double t, void* p) {
    const auto* h = static_cast<const HeatParams*>(p);
    double w = std::exp(-h->a * t);
    if (h->power != 0.0) w *= t > 0 ? std::pow(t, h->power) : 0.0;
    return w * heat_product(h->x, t);
}

double heat_integral(HeatParams hp) {
    gsl_error_handler_t* old = gsl_set_error_handler_off();
    gsl_integration_workspace* ws = gsl_integration_workspace_alloc(2000);
    gsl_function f{&integrand, &hp};
    double result = 0.0, err = 0.0;
    // split off the region near the origin where t^power may be singular
    double head = 0.0, tail = 0.0;
    gsl_integration_qags(&f, 0.0, 1.0, 0.0, 1e-13, 2000, ws, &head, &err);
    gsl_integration_qagiu(&f, 1.0, 0.0, 1e-12, 2000, ws, &tail, &err);
    result = head + tail;
    gsl_integration_workspace_free(ws);
    gsl_set_error_handler(old);
    return result;
}

} // namespace

double lattice_green_infinite(int d, double a, std::span<const int> x) {
    if (!(a >= 0.0)) throw ParameterError("resolvent parameter must be non-negative");
    if (a == 0.0 && d <= 2) throw ZeroModeError("massless lattice Green's function diverges for d <= 2");
    return heat_integral(HeatParams{std::vector<int>(x.begin(), x.begin() + d), a, 0.0});
}

double lattice_green_infinite(int d, double eps, double a, std::span<const int> x) {
    return std::pow(eps, 2 - d) * lattice_green_infinite(d, a * eps * eps, x);
}

double levy_green_infinite(int d, double alpha, std::span<const int> x) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw ParameterError("alpha must lie in (0, 2)");
    if (alpha >= d) throw ParameterError("fractional Green's function needs alpha < d");
    const double I = heat_integral(HeatParams{std::vector<int>(x.begin(), x.begin() + d), 0.0, alpha / 2.0 - 1.0});
    return I / gsl_sf_gamma(alpha / 2.0);
}

} // namespace frd
