#include "frd/dirichlet.hpp"

#include "frd/detail/transforms.hpp"
#include "frd/errors.hpp"
#include "frd/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <numeric>

namespace frd {

DirichletOperator::DirichletOperator(const CubeRegion& cube, double a, MassTerm mass)
    : cube_(cube), a_(a), mass_(mass) {
    if (!(a >= 0.0)) throw ParameterError("resolvent parameter must be non-negative");
    const double eps = cube.grid.eps;
    mu_ = (mass == MassTerm::resolvent ? a : 1.0) * eps * eps;
    const int d = cube.grid.d, s = cube.s, n = s - 1;
    std::vector<double> ax(n);
    for (int k = 0; k < n; ++k) ax[k] = 2.0 * (1.0 - std::cos(std::numbers::pi * (k + 1) / s));
    lambda_.resize(ipow_size(n, d));
    std::vector<int> k(d);
    for (std::size_t i = 0; i < lambda_.size(); ++i) {
        octant_unflat(i, d, n, k.data());
        double v = mu_;
        for (int q = 0; q < d; ++q) v += ax[k[q]];
        lambda_[i] = v;
    }
}

std::vector<double> DirichletOperator::green_row(const int* x) const {
    if (!cube_.is_interior(x)) throw PreconditionError("Green's row requested for a non-interior site");
    const int d = cube_.grid.d, s = cube_.s, n = s - 1, h = cube_.half();
    std::vector<std::vector<double>> phi(d, std::vector<double>(n));
    for (int q = 0; q < d; ++q)
        for (int k = 0; k < n; ++k) phi[q][k] = std::sin(std::numbers::pi * (k + 1) * (x[q] + h) / s);
    std::vector<double> c(lambda_.size());
    std::vector<int> k(d);
    for (std::size_t i = 0; i < c.size(); ++i) {
        octant_unflat(i, d, n, k.data());
        double v = 1.0;
        for (int q = 0; q < d; ++q) v *= phi[q][k[q]];
        c[i] = v / lambda_[i];
    }
    detail::dst1(c, d, n);
    const double norm = 1.0 / std::pow(static_cast<double>(s), d);
    for (auto& v : c) v *= norm;
    ++solves_;
    return c;
}

std::vector<double> DirichletOperator::solve_interior(const std::vector<double>& b) const {
    const int d = cube_.grid.d, s = cube_.s, n = s - 1;
    if (b.size() != lambda_.size()) throw PreconditionError("interior vector has the wrong length");
    std::vector<double> c = b;
    detail::dst1(c, d, n);
    for (std::size_t i = 0; i < c.size(); ++i) c[i] /= lambda_[i];
    detail::dst1(c, d, n);
    const double norm = 1.0 / std::pow(2.0 * s, d);
    for (auto& v : c) v *= norm;
    ++solves_;
    return c;
}

std::vector<double> DirichletOperator::apply(const std::vector<double>& h) const {
    const int d = cube_.grid.d;
    const CubeRegion& c = cube_;
    std::vector<double> out(h.size());
    std::vector<int> y(d);
    for (std::size_t i = 0; i < c.interior.size(); ++i) {
        const int* x = c.interior[i];
        double v = (2.0 * d + mu_) * h[i];
        for (int q = 0; q < d; ++q) {
            for (int sgn : {-1, 1}) {
                std::copy(x, x + d, y.begin());
                y[q] += sgn;
                if (c.is_interior(y.data())) v -= h[c.interior_index(y.data())];
            }
        }
        out[i] = v;
    }
    return out;
}

std::vector<double> solve_dirichlet(const DirichletOperator& op, const std::vector<double>& f) {
    const CubeRegion& c = op.cube();
    if (f.size() != c.boundary.size()) throw PreconditionError("boundary data must cover every boundary site");
    const int d = c.grid.d, h = c.half();
    std::vector<double> b(c.interior.size(), 0.0);
    std::vector<int> v(d);
    for (std::size_t i = 0; i < c.boundary.size(); ++i) {
        const int* u = c.boundary[i];
        std::copy(u, u + d, v.begin());
        for (int q = 0; q < d; ++q)
            if (std::abs(u[q]) == h) v[q] -= (u[q] > 0 ? 1 : -1);
        b[c.interior_index(v.data())] += f[i];
    }
    return op.solve_interior(b);
}

void canonical_form(const int* x, int d, int* canon, int* perm, int* sign) {
    std::vector<int> idx(d);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return std::abs(x[a]) < std::abs(x[b]); });
    for (int i = 0; i < d; ++i) {
        perm[i] = idx[i];
        sign[i] = x[idx[i]] < 0 ? -1 : 1;
        canon[i] = std::abs(x[idx[i]]);
    }
}

namespace {

// (g u)_i = sign_i * u_{perm_i}
void apply_map(const int* u, int d, const int* perm, const int* sign, int* out) {
    for (int i = 0; i < d; ++i) out[i] = sign[i] * u[perm[i]];
}

} // namespace

double PoissonKernelTable::mass(std::size_t i, const int* u) const {
    const int d = cube.grid.d;
    if (!cube.is_boundary(u)) return 0.0;
    std::vector<int> gu(d);
    apply_map(u, d, &source_perm[i * d], &source_sign[i * d], gu.data());
    return row_of(i)[cube.boundary_index(gu.data())];
}

std::vector<std::size_t> PoissonKernelTable::boundary_image(std::size_t i) const {
    const int d = cube.grid.d;
    std::vector<std::size_t> img(cube.boundary.size());
    std::vector<int> gu(d);
    for (std::size_t b = 0; b < img.size(); ++b) {
        apply_map(cube.boundary[b], d, &source_perm[i * d], &source_sign[i * d], gu.data());
        img[b] = cube.boundary_index(gu.data());
    }
    return img;
}

std::vector<double> PoissonKernelTable::masses(std::size_t i) const {
    const auto img = boundary_image(i);
    const auto& row = row_of(i);
    std::vector<double> out(img.size());
    for (std::size_t b = 0; b < img.size(); ++b) out[b] = row[img[b]];
    return out;
}

double PoissonKernelTable::total_mass(std::size_t i) const {
    const auto& row = row_of(i);
    double s = 0.0;
    for (double v : row) s += v;
    return s;
}

PoissonKernelTable poisson_kernel(const DirichletOperator& op, const SiteList& sources, int threads) {
    const CubeRegion& cube = op.cube();
    const int d = cube.grid.d, h = cube.half();
    if (sources.d != d) throw PreconditionError("source dimension does not match the cube");
    PoissonKernelTable t;
    t.cube = cube;
    t.a = op.a();
    t.mass_term = op.mass_term();
    t.sources = sources;
    t.canonical.d = d;
    std::map<std::vector<int>, std::size_t> seen;
    std::vector<int> canon(d), perm(d), sign(d);
    for (std::size_t i = 0; i < sources.size(); ++i) {
        const int* x = sources[i];
        if (cube.layers_inside(x) < 1)
            throw PreconditionError("Poisson kernel source must lie strictly inside the cube");
        canonical_form(x, d, canon.data(), perm.data(), sign.data());
        t.source_perm.insert(t.source_perm.end(), perm.begin(), perm.end());
        t.source_sign.insert(t.source_sign.end(), sign.begin(), sign.end());
        auto it = seen.find(canon);
        if (it == seen.end()) {
            it = seen.emplace(canon, t.canonical.size()).first;
            t.canonical.push(canon.data());
        }
        t.source_canonical.push_back(it->second);
    }
    const long before = op.solves();
    t.canonical_masses.assign(t.canonical.size(), {});
    parallel_for(t.canonical.size(), threads, [&](std::size_t c) {
        const auto row = op.green_row(t.canonical[c]);
        std::vector<double> masses(cube.boundary.size());
        std::vector<int> v(d);
        for (std::size_t b = 0; b < cube.boundary.size(); ++b) {
            const int* u = cube.boundary[b];
            std::copy(u, u + d, v.begin());
            for (int q = 0; q < d; ++q)
                if (std::abs(u[q]) == h) v[q] -= (u[q] > 0 ? 1 : -1);
            masses[b] = row[cube.interior_index(v.data())];
        }
        t.canonical_masses[c] = std::move(masses);
    });
    t.solves = op.solves() - before;
    return t;
}

PoissonKernelTable poisson_kernel(const CubeRegion& cube, double a, const SiteList& sources, MassTerm mass,
                                  int threads) {
    DirichletOperator op(cube, a, mass);
    return poisson_kernel(op, sources, threads);
}

} // namespace frd
