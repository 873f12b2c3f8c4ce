#include "frd/errors.hpp"
#include "frd/resolvent.hpp"

#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

using namespace frd;

namespace {

constexpr double pi = std::numbers::pi;

// (-Laplacian + a) applied to a periodic field at site j.
double apply_resolvent(const LatticeField& f, double a, const int* j) {
    const int d = f.grid.d;
    double v = (a + 2.0 * d / (f.grid.eps * f.grid.eps)) * f.at(j);
    int k[8];
    for (int q = 0; q < d; ++q) k[q] = j[q];
    for (int q = 0; q < d; ++q)
        for (int s : {-1, 1}) {
            k[q] = j[q] + s;
            v -= f.at(k) / (f.grid.eps * f.grid.eps);
            k[q] = j[q];
        }
    return v;
}

} // namespace

TEST_CASE("laplacian symbol at zero and at the corner of the Brillouin zone") {
    const TorusGrid g3 = TorusGrid::make(3, 1.0, 16);
    const std::array<double, 3> zero{0, 0, 0}, corner{pi, pi, pi};
    CHECK(laplacian_symbol(g3, zero) == 0.0);
    CHECK(laplacian_symbol(g3, corner) == doctest::Approx(12.0));
    const TorusGrid g1 = TorusGrid::make(1, 1.0, 16);
    const std::array<double, 1> p{pi};
    CHECK(laplacian_symbol(g1, p) == doctest::Approx(4.0));
    const TorusGrid fine = TorusGrid::make(3, 0.5, 16);
    const std::array<double, 3> q{2 * pi, 0, 0};  // corner of the finer zone on one axis
    CHECK(laplacian_symbol(fine, q) == doctest::Approx(16.0));
}

TEST_CASE("green symbol values and the zero-mode error") {
    const TorusGrid g = TorusGrid::make(3, 1.0, 16);
    const std::array<double, 3> zero{0, 0, 0}, corner{pi, pi, pi};
    CHECK(green_symbol(ResolventParams::make(1.0, g), zero) == doctest::Approx(1.0));
    CHECK(green_symbol(ResolventParams::make(0.0, g), corner) == doctest::Approx(1.0 / 12));
    CHECK_THROWS_AS(green_symbol(ResolventParams::make(0.0, g), zero), ZeroModeError);
    CHECK_THROWS_AS(ResolventParams::make(-1.0, g), ParameterError);
    CHECK_THROWS_AS(green_symbol_grid(ResolventParams::make(0.0, g)), ZeroModeError);
    CHECK(green_symbol_grid(ResolventParams::make(0.0, g), true).values[0] == 0.0);
    const std::array<double, 3> p2{2, 0, 0};
    CHECK(green_symbol_continuum(0.0, p2) == doctest::Approx(0.25));
    CHECK_THROWS_AS(green_symbol_continuum(0.0, zero), ZeroModeError);
}

TEST_CASE("the cosine bound 2(1 - cos t) >= b t^2 on [-pi, pi] is sharp at pi") {
    const double b = green_bound_b();
    for (int i = -1000; i <= 1000; ++i) {
        const double t = pi * i / 1000.0;
        CHECK(2.0 * (1.0 - std::cos(t)) >= b * t * t - 1e-14);
    }
    CHECK(2.0 * (1.0 - std::cos(pi)) == doctest::Approx(b * pi * pi));
}

TEST_CASE("lattice green symbol is dominated by 1 / (a + b p^2)") {
    std::mt19937 rng(1);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (double eps : {1.0, 0.5, 0.125}) {
        const TorusGrid g = TorusGrid::make(3, eps, 16);
        for (double a : {0.0, 1.0, 16.0})
            for (int t = 0; t < 200; ++t) {
                std::array<double, 3> p;
                double p2 = 0.0;
                for (auto& v : p) {
                    v = U(rng) * pi / eps;
                    p2 += v * v;
                }
                const double G = green_symbol(ResolventParams::make(a, g), p);
                CHECK(G <= 1.0 / (a + green_bound_b() * p2) * (1 + 1e-12));
                CHECK(G >= green_symbol_continuum(a, p) * (1 - 1e-12));
            }
    }
}

TEST_CASE("green kernel is symmetric, peaked at the origin and inverts the operator") {
    const TorusGrid g = TorusGrid::make(3, 0.5, 16);
    for (double a : {0.0, 1.0, 4.0}) {
        const RealKernel G = green_kernel(ResolventParams::make(a, g), a == 0.0);
        const LatticeField F = to_field(G);
        int j[3];
        double worst_sym = 0.0, worst_eq = 0.0;
        for (j[0] = -8; j[0] < 8; ++j[0])
            for (j[1] = -8; j[1] < 8; ++j[1])
                for (j[2] = -8; j[2] < 8; ++j[2]) {
                    int perm[3] = {j[1], -j[2], j[0]};
                    worst_sym = std::max(worst_sym, std::abs(F.at(j) - F.at(perm)));
                    CHECK(F.at(j) <= F.values[0] + 1e-12);
                    const bool origin = j[0] == 0 && j[1] == 0 && j[2] == 0;
                    double rhs = origin ? 1.0 / g.cell() : 0.0;
                    if (a == 0.0) rhs -= 1.0 / std::pow(g.side(), 3);
                    worst_eq = std::max(worst_eq, std::abs(apply_resolvent(F, a, j) - rhs));
                }
        CHECK(worst_sym < 1e-12);
        CHECK(worst_eq < 1e-9);
    }
}

TEST_CASE("green kernel satisfies Parseval against its symbol") {
    const TorusGrid g = TorusGrid::make(3, 0.5, 16);
    const ResolventParams rp = ResolventParams::make(1.0, g);
    const LatticeField F = to_field(green_kernel(rp));
    const FourierSymbol S = to_fourier(green_symbol_grid(rp));
    double x2 = 0.0, p2 = 0.0;
    for (double v : F.values) x2 += v * v;
    for (auto v : S.values) p2 += std::norm(v);
    CHECK(x2 * g.cell() == doctest::Approx(p2 / std::pow(g.side(), 3)).epsilon(1e-12));
}

TEST_CASE("infinite-lattice green function") {
    const int o[3] = {0, 0, 0};
    // Watson's integral
    CHECK(lattice_green_infinite(3, 0.0, o) == doctest::Approx(0.2527310098586).epsilon(1e-10));
    // massive case agrees with the torus kernel on a large torus
    const TorusGrid g = TorusGrid::make(3, 1.0, 32);
    const RealKernel G = green_kernel(ResolventParams::make(1.0, g));
    for (auto x : {std::array<int, 3>{0, 0, 0}, std::array<int, 3>{1, 0, 0}, std::array<int, 3>{2, 1, 3}})
        CHECK(lattice_green_infinite(3, 1.0, x) == doctest::Approx(G.at(x.data())).epsilon(1e-9));
    // scaling to spacing eps
    const std::array<int, 3> x{1, 1, 0};
    CHECK(lattice_green_infinite(3, 0.25, 2.0, x) ==
          doctest::Approx(4.0 * lattice_green_infinite(3, 2.0 / 16, x)).epsilon(1e-12));
    // decreasing in a and in |x|
    CHECK(lattice_green_infinite(3, 1.0, o) < lattice_green_infinite(3, 0.0, o));
    const std::array<int, 3> far{3, 0, 0};
    CHECK(lattice_green_infinite(3, 0.0, far) < lattice_green_infinite(3, 0.0, x));
}

TEST_CASE("fractional green function at the origin matches the momentum integral") {
    // side^{-d} sum over a large torus of |p|_lat^{-alpha}, zero mode dropped
    const int M = 64;
    const TorusGrid g = TorusGrid::make(3, 1.0, M);
    const EvenSymbol lap = laplacian_symbol_grid(g);
    const FourierSymbol full = to_fourier(lap);
    const std::array<int, 3> o{0, 0, 0};
    for (double alpha : {0.5, 1.0, 1.5}) {
        double s = 0.0;
        for (std::size_t i = 1; i < full.values.size(); ++i) s += std::pow(full.values[i].real(), -alpha / 2);
        s /= std::pow(g.side(), 3);
        CHECK(levy_green_infinite(3, alpha, o) == doctest::Approx(s).epsilon(2e-3));
    }
    CHECK_THROWS_AS(levy_green_infinite(3, 2.0, o), ParameterError);
    CHECK_THROWS_AS(levy_green_infinite(1, 1.5, std::array<int, 1>{0}), ParameterError);
}
