#include "frd/errors.hpp"
#include "frd/fluctuation.hpp"
#include "frd/resolvent.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

using namespace frd;

namespace {

EngineOptions opts(const std::string& cache = "", MassTerm mass = MassTerm::resolvent) {
    EngineOptions o;
    o.cache_dir = cache;
    o.mass_term = mass;
    return o;
}

std::pair<double, double> extremes(const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return {*lo, *hi};
}

double p2_of(const TorusGrid& g, std::size_t i, int N) {
    int k[3];
    octant_unflat(i, 3, N, k);
    double s = 0.0;
    for (int q = 0; q < 3; ++q) s += g.momentum(k[q]) * g.momentum(k[q]);
    return s;
}

std::string scratch_dir(const std::string& name) {
    const auto p = std::filesystem::temp_directory_path() / ("frd-unit-" + name);
    std::filesystem::remove_all(p);
    return p.string();
}

} // namespace

TEST_CASE("base covariance: range L on the first scales and positive definite") {
    Engine e(LatticeSpec::make(3, 2, 2), opts());
    for (int n : {0, 1})
        for (double a : {0.0, 1.0, 4.0}) {
            const FluctuationCovariance b = e.base(n, a);
            CHECK(b.declared_range == 2.0);
            CHECK(b.kind == "base");
            CHECK(range_excess(b.kernel, b.declared_range) < 1e-9);
            const auto [lo, hi] = extremes(b.symbol.values);
            CHECK(-lo <= 1e-12 * hi);
        }
}

TEST_CASE("base covariance at n = 2 is supported within 2L") {
    // the mollifier spread pushes the support past L once the m = 0 stencil is nondegenerate
    Engine e(LatticeSpec::make(3, 2, 2), opts());
    for (double a : {0.0, 1.0}) {
        const FluctuationCovariance b = e.base(2, a);
        CHECK(range_excess(b.kernel, 2 * b.declared_range) < 1e-9);
        const auto [lo, hi] = extremes(b.symbol.values);
        CHECK(-lo <= 1e-12 * hi);
    }
}

TEST_CASE("base symbol is continuous at p = 0 when a = 0") {
    Engine e(LatticeSpec::make(3, 2, 2), opts());
    for (int n : {0, 1, 2}) {
        const FluctuationCovariance b = e.base(n, 0.0);
        const auto& s = b.symbol.values;
        CHECK(std::isfinite(s[0]));
        CHECK(s[0] > 0.0);
        // even in p: extrapolate the first two momenta along an axis to p = 0
        const double extrap = (4.0 * s[1] - s[2]) / 3.0;
        CHECK(std::abs(extrap - s[0]) < 1e-3 * s[0]);
        const auto A0 = e.averaging(n, 0, 0.0);
        CHECK(s[0] == doctest::Approx(A0->second_moment).epsilon(1e-12));
    }
}

TEST_CASE("unit mass term leaves the zero-mode pole at a = 0") {
    Engine e(LatticeSpec::make(3, 2, 1), opts("", MassTerm::unit));
    CHECK_THROWS_AS(e.base(1, 0.0), ZeroModeError);
    CHECK_NOTHROW(e.base(1, 1.0));
}

TEST_CASE("gamma at n = 0 is the base covariance") {
    Engine e(LatticeSpec::make(3, 2, 1), opts());
    for (double a : {0.0, 1.0}) {
        const FluctuationCovariance b = e.base(0, a), g = e.gamma(0, a);
        CHECK(g.symbol.values == b.symbol.values);
        CHECK(g.kernel.values == b.kernel.values);
    }
}

TEST_CASE("gamma_n: range 6L and positive definiteness") {
    Engine e(LatticeSpec::make(3, 2, 2), opts());
    for (int n : {1, 2})
        for (double a : {0.0, 1.0, 16.0}) {
            const FluctuationCovariance g = e.gamma(n, a);
            CHECK(g.declared_range == 12.0);
            CHECK(g.kind == "gamma");
            CHECK(range_excess(g.kernel, g.declared_range) < 1e-9);
            const auto [lo, hi] = extremes(g.symbol.values);
            CHECK(-lo <= 1e-12 * hi);
            CHECK(e.gamma_symbol(n, a).values == g.symbol.values);
        }
}

TEST_CASE("gamma_n from explicit averaging kernels") {
    const auto spec = LatticeSpec::make(3, 2, 2);
    Engine e(spec, opts());
    const double a = 1.0;
    const int n = 2;
    std::vector<std::shared_ptr<const AveragingKernel>> keep;
    std::vector<const AveragingKernel*> list;
    for (int m = 1; m <= n; ++m) {
        keep.push_back(e.averaging(n, m, a));
        list.push_back(keep.back().get());
    }
    const FluctuationCovariance g = gamma_n(spec, n, a, list, e.base(n, a));
    const FluctuationCovariance ref = e.gamma(n, a);
    double worst = 0.0;
    for (std::size_t i = 0; i < g.symbol.values.size(); ++i)
        worst = std::max(worst, std::abs(g.symbol.values[i] - ref.symbol.values[i]));
    CHECK(worst < 1e-14);
    list.pop_back();
    CHECK_THROWS_AS(gamma_n(spec, n, a, list, e.base(n, a)), PreconditionError);
}

TEST_CASE("symbol decay (1 + p^2)^{-2} with a constant fitted on the first scales") {
    Engine e(LatticeSpec::make(3, 2, 2), opts());
    for (double a : {0.0, 1.0, 4.0}) {
        std::vector<double> c;
        for (int n = 0; n <= 2; ++n) {
            const FluctuationCovariance g = e.gamma(n, a);
            double cn = 0.0;
            for (std::size_t i = 0; i < g.symbol.values.size(); ++i) {
                const double p2 = p2_of(g.grid, i, g.symbol.N());
                cn = std::max(cn, std::abs(g.symbol.values[i]) * (1.0 + a) * (1.0 + p2) * (1.0 + p2));
            }
            c.push_back(cn);
        }
        CHECK(c[2] <= std::max(c[0], c[1]));
    }
}

TEST_CASE("massive covariances shrink at least geometrically along a_n") {
    Engine e(LatticeSpec::make(3, 2, 2), opts());
    std::vector<double> sup;
    for (int n = 0; n <= 2; ++n) {
        const auto s = e.gamma_symbol(n, std::pow(4.0, n));
        sup.push_back(*std::max_element(s.values.begin(), s.values.end()));
    }
    CHECK(sup[1] < sup[0]);
    CHECK(sup[2] / sup[1] <= sup[1] / sup[0]);
}

TEST_CASE("mass decay rate is positive") {
    Engine e(LatticeSpec::make(3, 2, 1), opts());
    CHECK(fit_mass_decay(e, 1, {4.0, 16.0, 64.0}) > 0.0);
}

TEST_CASE("reconstruction of the unit-lattice resolvent") {
    Engine e(LatticeSpec::make(3, 2, 2), opts());
    for (double a : {0.0, 1.0}) {
        const DecompositionResult r = reconstruct(e, a, 2);
        REQUIRE(r.gammas.size() == 3);
        for (int n = 0; n <= 2; ++n) CHECK(r.gammas[n].a_n == a * std::pow(2.0, 2 * n));
        for (std::size_t N = 0; N + 1 < r.residual.size(); ++N) CHECK(r.residual[N + 1] < r.residual[N]);
        if (a > 0)
            for (std::size_t N = 0; N < r.residual.size(); ++N) CHECK(r.residual[N] < r.tail_bound[N]);
    }
    CHECK_THROWS_AS(reconstruct(e, 1.0, 3), InvalidScale);
}

TEST_CASE("poisson tables survive the disk cache") {
    const std::string dir = scratch_dir("cache");
    const auto spec = LatticeSpec::make(3, 2, 1);
    std::vector<double> first;
    {
        Engine e(spec, opts(dir));
        first = e.gamma_symbol(1, 1.0).values;
        CHECK(e.solves() > 0);
    }
    Engine again(spec, opts(dir));
    CHECK(again.gamma_symbol(1, 1.0).values == first);
    CHECK(again.solves() == 0);
    for (const auto& p : again.poisson_log()) CHECK(p.from_cache);

    EngineOptions strict = opts(scratch_dir("empty"));
    strict.require_cached = true;
    Engine none(spec, strict);
    CHECK_THROWS_AS(none.gamma_symbol(1, 1.0), MissingArtifacts);
}

TEST_CASE("poisson payload round trip") {
    const auto spec = LatticeSpec::make(3, 2, 2);
    const CubeRegion c = make_cube(spec, 2, 1);
    const auto t = poisson_kernel(c, 1.0, c.interior);
    const auto back = decode_poisson(encode_poisson(t), c, 1.0, MassTerm::resolvent, c.interior);
    REQUIRE(back.has_value());
    for (std::size_t i = 0; i < t.source_count(); ++i) CHECK(back->masses(i) == t.masses(i));
    SiteList other{3, {}};
    const int far[3] = {1, 1, 1};
    other.push(far);
    const auto small = poisson_kernel(c, 1.0, SiteList{3, {0, 0, 0}});
    CHECK_FALSE(decode_poisson(encode_poisson(small), c, 1.0, MassTerm::resolvent, other).has_value());
}

TEST_CASE("torus must hold the range-6L covariance") {
    EngineOptions o;
    o.torus_factor = 8;
    Engine e(LatticeSpec::make(3, 2, 1), o);
    CHECK_THROWS_AS(e.gamma(1, 1.0), ConfigurationError);
}
