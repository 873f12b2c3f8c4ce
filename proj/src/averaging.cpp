#include "frd/averaging.hpp"

#include "frd/errors.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_gamma.h>

#include <cmath>
#include <map>
#include <numbers>

namespace frd {

namespace {

double radial_integrand(double t, void* p) {
    const int d = *static_cast<int*>(p);
    if (t >= 1.0) return 0.0;
    return std::exp(-1.0 / (1.0 - t * t)) * std::pow(t, d - 1);
}

double bump_radial_integral(int d) {
    gsl_error_handler_t* old = gsl_set_error_handler_off();
    gsl_integration_workspace* ws = gsl_integration_workspace_alloc(1000);
    int dd = d;
    gsl_function f{&radial_integrand, &dd};
    double r = 0.0, err = 0.0;
    const int status = gsl_integration_qag(&f, 0.0, 1.0, 1e-15, 1e-12, 1000, GSL_INTEG_GAUSS61, ws, &r, &err);
    gsl_integration_workspace_free(ws);
    gsl_set_error_handler(old);
    if (status != GSL_SUCCESS || !(r > 0.0)) throw Error("mollifier normalisation integral failed");
    return r;
}

} // namespace

MollifierSpec MollifierSpec::make(int d, int L, bool tight) {
    if (d < 1 || L < 2) throw ParameterError("mollifier needs d >= 1 and L >= 2");
    MollifierSpec s;
    s.d = d;
    s.L = L;
    s.tight = tight;
    const double sphere = 2.0 * std::pow(std::numbers::pi, d / 2.0) / gsl_sf_gamma(d / 2.0);
    s.continuum_norm = 1.0 / (std::pow(s.range(), d) * sphere * bump_radial_integral(d));
    return s;
}

double MollifierSpec::g(double r) const {
    const double t = r / range();
    if (t >= 1.0) return 0.0;
    return continuum_norm * std::exp(-1.0 / (1.0 - t * t));
}

double mollifier_value(const MollifierSpec& spec, int m, std::span<const double> x) {
    const double s = std::pow(static_cast<double>(spec.L), m);
    double r2 = 0.0;
    for (double v : x) r2 += v * v;
    return std::pow(s, spec.d) * spec.g(s * std::sqrt(r2));
}

namespace {

// Sites j of (eps Z)^d with g(eps |j|) > 0, eps = L^{-k}.
template <class F>
void for_support(const MollifierSpec& spec, int k, F&& f) {
    const double eps = std::pow(static_cast<double>(spec.L), -k);
    const int reach = static_cast<int>(std::ceil(spec.range() / eps));
    const int d = spec.d, w = 2 * reach + 1;
    std::vector<int> j(d);
    const std::size_t total = ipow_size(w, d);
    for (std::size_t i = 0; i < total; ++i) {
        octant_unflat(i, d, w, j.data());
        double r2 = 0.0;
        for (auto& v : j) {
            v -= reach;
            r2 += static_cast<double>(v) * v;
        }
        const double gv = spec.g(eps * std::sqrt(r2));
        if (gv > 0.0) f(j.data(), gv);
    }
}

} // namespace

double lattice_norm_constant(const MollifierSpec& spec, int n) {
    if (n < 0) throw ParameterError("scale index must be non-negative");
    const double eps = std::pow(static_cast<double>(spec.L), -n);
    double sum = 0.0;
    for_support(spec, n, [&](const int*, double gv) { sum += gv; });
    sum *= std::pow(eps, spec.d);
    if (!(sum > 0.0)) throw DegenerateSupport("lattice misses the mollifier support");
    return 1.0 / sum;
}

MollifierStencil mollifier_stencil(const MollifierSpec& spec, int n, int m) {
    if (m > n) throw InvalidScale("mollifier stencil needs m <= n");
    const double c = lattice_norm_constant(spec, n - m);
    const double eps = std::pow(static_cast<double>(spec.L), -n);
    const double scale = std::pow(static_cast<double>(spec.L), m);
    const double pref = c * std::pow(eps, spec.d) * std::pow(scale, spec.d);
    MollifierStencil st;
    st.sites.d = spec.d;
    for_support(spec, n - m, [&](const int* j, double gv) {
        st.sites.push(j);
        st.weights.push_back(pref * gv);
        for (int q = 0; q < spec.d; ++q) st.reach = std::max(st.reach, std::abs(j[q]));
    });
    return st;
}

SiteList averaging_sources(const MollifierStencil& stencil) {
    SiteList s;
    s.d = stencil.sites.d;
    std::vector<int> x(s.d);
    for (std::size_t i = 0; i < stencil.sites.size(); ++i) {
        for (int q = 0; q < s.d; ++q) x[q] = -stencil.sites[i][q];
        s.push(x.data());
    }
    return s;
}

AveragingKernel averaging_kernel(const LatticeSpec& spec, int n, int m, double a, const PoissonKernelTable& poisson,
                                 const MollifierSpec& mollifier) {
    const CubeRegion& cube = poisson.cube;
    const int d = spec.d;
    if (mollifier.d != d || cube.grid.d != d) throw PreconditionError("dimension mismatch");
    if (poisson.a != a) throw PreconditionError("Poisson table built for a different resolvent parameter");
    const MollifierStencil st = mollifier_stencil(mollifier, n, m);

    std::map<std::vector<int>, std::size_t> where;
    for (std::size_t i = 0; i < poisson.sources.size(); ++i)
        where.emplace(std::vector<int>(poisson.sources[i], poisson.sources[i] + d), i);

    const int e = cube.half() + st.reach;
    const int w = 2 * e + 1;
    std::vector<double> box(ipow_size(w, d), 0.0);
    auto box_index = [&](const int* u) {
        std::size_t idx = 0;
        for (int q = 0; q < d; ++q) idx = idx * w + static_cast<std::size_t>(u[q] + e);
        return idx;
    };
    std::vector<int> src(d), u(d);
    for (std::size_t zi = 0; zi < st.sites.size(); ++zi) {
        const int* z = st.sites[zi];
        for (int q = 0; q < d; ++q) src[q] = -z[q];
        auto it = where.find(src);
        if (it == where.end()) throw PreconditionError("Poisson table does not cover the mollifier support");
        const std::size_t i = it->second;
        const auto img = poisson.boundary_image(i);
        const auto& row = poisson.row_of(i);
        const double wz = st.weights[zi];
        for (std::size_t b = 0; b < img.size(); ++b) {
            const int* ub = cube.boundary[b];
            for (int q = 0; q < d; ++q) u[q] = z[q] + ub[q];
            box[box_index(u.data())] += wz * row[img[b]];
        }
    }

    AveragingKernel k;
    k.grid = cube.grid;
    k.n = n;
    k.m = m;
    k.a = a;
    k.mass_term = poisson.mass_term;
    k.geometry = cube.geometry;
    k.R = cube.R;
    const double eps = cube.grid.eps;
    k.kernel = RealKernel(cube.grid, e, e * eps);
    const double inv_cell = 1.0 / cube.grid.cell();
    std::vector<int> j(d);
    for (std::size_t i = 0; i < k.kernel.values.size(); ++i) {
        octant_unflat(i, d, e + 1, j.data());
        k.kernel.values[i] = box[box_index(j.data())] * inv_cell;
    }
    double total = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < box.size(); ++i) {
        octant_unflat(i, d, w, j.data());
        total += box[i];
        const double x1 = (j[0] - e) * eps;
        m2 += box[i] * x1 * x1;
    }
    k.total = total;
    k.second_moment = m2;
    return k;
}

SmallPCheck small_p_expansion_check(const AveragingKernel& kernel, std::span<const double> p, double a) {
    const double sym = symbol_at(kernel.kernel, p.data());
    double p2 = 0.0;
    for (double v : p) p2 += v * v;
    SmallPCheck r;
    r.gap = std::abs(1.0 - sym);
    r.bound = kernel.R * std::sqrt(p2) + a * kernel.R * kernel.R;
    return r;
}

} // namespace frd
