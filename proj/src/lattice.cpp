#include "frd/lattice.hpp"

#include "frd/detail/transforms.hpp"
#include "frd/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numbers>
#include <string>

namespace frd {

std::size_t ipow_size(std::size_t base, int e) {
    std::size_t r = 1;
    for (int i = 0; i < e; ++i) r *= base;
    return r;
}

std::size_t octant_flat(const int* k, int d, int n) {
    std::size_t idx = 0;
    for (int i = 0; i < d; ++i) idx = idx * n + static_cast<std::size_t>(k[i]);
    return idx;
}

void octant_unflat(std::size_t i, int d, int n, int* k) {
    for (int a = d - 1; a >= 0; --a) {
        k[a] = static_cast<int>(i % n);
        i /= n;
    }
}

LatticeSpec LatticeSpec::make(int d, int L, int n_max, bool allow_low_dimension) {
    if (d < 1) throw ParameterError("dimension must be positive");
    if (d < 3 && !allow_low_dimension)
        throw ParameterError("dimension " + std::to_string(d) + " < 3 requires the dimension override");
    if (L < 2 || (L & (L - 1)) != 0) throw ParameterError("L must be a power of two, got " + std::to_string(L));
    if (n_max < 0) throw ParameterError("n_max must be non-negative");
    LatticeSpec s;
    s.d = d;
    s.L = L;
    s.p = 0;
    for (int v = L; v > 1; v >>= 1) ++s.p;
    s.n_max = n_max;
    return s;
}

long LatticeSpec::ipow(int k) const {
    long r = 1;
    for (int i = 0; i < k; ++i) r *= L;
    return r;
}

double LatticeSpec::eps(int n) const {
    return n >= 0 ? 1.0 / static_cast<double>(ipow(n)) : static_cast<double>(ipow(-n));
}

double LatticeSpec::R(int m, bool tight) const {
    const double r = eps(m - 1);
    return tight ? r / 16.0 : r;
}

TorusGrid TorusGrid::make(int d, double eps, int M) {
    if (d < 1) throw ParameterError("grid dimension must be positive");
    if (M < 2 || M % 2 != 0) throw ConfigurationError("sites per axis must be even and >= 2");
    if (!(eps > 0)) throw ParameterError("lattice spacing must be positive");
    return TorusGrid{d, eps, M};
}

TorusGrid TorusGrid::for_scale(const LatticeSpec& spec, int n, int torus_factor) {
    if (torus_factor < 1) throw ConfigurationError("torus factor must be positive");
    const long M = static_cast<long>(torus_factor) * spec.L * spec.ipow(n);
    return make(spec.d, spec.eps(n), static_cast<int>(M));
}

std::size_t TorusGrid::sites() const { return ipow_size(M, d); }
std::size_t TorusGrid::octant_size() const { return ipow_size(M / 2 + 1, d); }
double TorusGrid::momentum(int k) const { return 2.0 * std::numbers::pi * k / side(); }
double TorusGrid::cell() const { return std::pow(eps, d); }

bool CubeRegion::is_interior(const int* x) const {
    for (int i = 0; i < grid.d; ++i)
        if (std::abs(x[i]) >= half()) return false;
    return true;
}

bool CubeRegion::is_boundary(const int* x) const {
    int on_face = 0;
    for (int i = 0; i < grid.d; ++i) {
        const int a = std::abs(x[i]);
        if (a == half()) ++on_face;
        else if (a > half()) return false;
    }
    return on_face == 1;
}

std::size_t CubeRegion::interior_index(const int* x) const {
    const int n = s - 1, h = half();
    std::size_t idx = 0;
    for (int i = 0; i < grid.d; ++i) idx = idx * n + static_cast<std::size_t>(x[i] + h - 1);
    return idx;
}

std::size_t CubeRegion::boundary_index(const int* u) const {
    const int d = grid.d, n = s - 1, h = half();
    int ax = 0;
    while (ax < d && std::abs(u[ax]) != h) ++ax;
    const std::size_t face = ipow_size(n, d - 1);
    std::size_t idx = 0;
    for (int i = 0; i < d; ++i) {
        if (i == ax) continue;
        idx = idx * n + static_cast<std::size_t>(u[i] + h - 1);
    }
    const std::size_t side = u[ax] < 0 ? 0 : 1;
    return (2 * static_cast<std::size_t>(ax) + side) * face + idx;
}

int CubeRegion::layers_inside(const int* x) const {
    int best = half();
    for (int i = 0; i < grid.d; ++i) best = std::min(best, half() - std::abs(x[i]));
    return std::max(best, 0);
}

CubeRegion make_cube_sites(const TorusGrid& grid, int s) {
    if (s < 2 || s % 2 != 0) throw InvalidScale("cube edge must be an even number of sites >= 2");
    if (s >= grid.M) throw ConfigurationError("cube does not fit on the torus");
    CubeRegion c;
    c.grid = grid;
    c.s = s;
    c.R = s * grid.eps;
    const int d = grid.d, h = s / 2, n = s - 1;
    c.interior.d = d;
    c.boundary.d = d;
    std::vector<int> x(d);
    const std::size_t cnt = ipow_size(n, d);
    c.interior.coords.reserve(cnt * d);
    for (std::size_t i = 0; i < cnt; ++i) {
        octant_unflat(i, d, n, x.data());
        for (int a = 0; a < d; ++a) x[a] -= h - 1;
        c.interior.push(x.data());
    }
    const std::size_t face = ipow_size(n, d - 1);
    std::vector<int> y(d > 1 ? d - 1 : 1);
    for (int ax = 0; ax < d; ++ax) {
        for (int side = 0; side < 2; ++side) {
            for (std::size_t i = 0; i < face; ++i) {
                if (d > 1) octant_unflat(i, d - 1, n, y.data());
                int q = 0;
                for (int a = 0; a < d; ++a) {
                    if (a == ax) x[a] = side ? h : -h;
                    else x[a] = y[q++] - (h - 1);
                }
                c.boundary.push(x.data());
            }
        }
    }
    return c;
}

CubeRegion make_cube(const LatticeSpec& spec, int n, int m, Geometry geometry, int torus_factor) {
    if (m < 0 || n < 0 || m > n || n > spec.n_max)
        throw InvalidScale("cube (n=" + std::to_string(n) + ", m=" + std::to_string(m) +
                           ") outside 0 <= m <= n <= n_max=" + std::to_string(spec.n_max));
    long s = spec.ipow(n - m + 1);
    if (geometry == Geometry::tight) {
        if (s % 32 != 0)
            throw ConfigurationError("tight geometry needs L^(n-m+1) divisible by 32 so the reduced cube has "
                                     "an even edge of at least 2 sites");
        s /= 16;
    }
    CubeRegion c = make_cube_sites(TorusGrid::for_scale(spec, n, torus_factor), static_cast<int>(s));
    c.n = n;
    c.m = m;
    c.geometry = geometry;
    c.R = spec.R(m, geometry == Geometry::tight);
    return c;
}

LatticeField::LatticeField(const TorusGrid& g, double fill) : grid(g), values(g.sites(), fill) {}

std::size_t LatticeField::index(const int* j) const {
    std::size_t idx = 0;
    for (int i = 0; i < grid.d; ++i) {
        int v = j[i] % grid.M;
        if (v < 0) v += grid.M;
        idx = idx * grid.M + static_cast<std::size_t>(v);
    }
    return idx;
}

LatticeField forward_diff(const LatticeField& f, int axis, int order) {
    const TorusGrid& g = f.grid;
    if (axis < 0 || axis >= g.d) throw ParameterError("axis out of range");
    LatticeField cur = f;
    std::size_t stride = 1;
    for (int i = axis + 1; i < g.d; ++i) stride *= g.M;
    const std::size_t block = stride * g.M;
    for (int o = 0; o < order; ++o) {
        LatticeField next(g);
        for (std::size_t base = 0; base < cur.values.size(); base += block) {
            for (int j = 0; j < g.M; ++j) {
                const int jn = (j + 1) % g.M;
                for (std::size_t i = 0; i < stride; ++i) {
                    next.values[base + j * stride + i] =
                        (cur.values[base + jn * stride + i] - cur.values[base + j * stride + i]) / g.eps;
                }
            }
        }
        cur = std::move(next);
    }
    return cur;
}

FourierSymbol fourier_transform(const LatticeField& f) {
    FourierSymbol s{f.grid, std::vector<std::complex<double>>(f.values.begin(), f.values.end())};
    detail::dft(s.values, f.grid.d, f.grid.M, -1);
    const double c = f.grid.cell();
    for (auto& v : s.values) v *= c;
    return s;
}

LatticeField inverse_fourier_transform(const FourierSymbol& s) {
    std::vector<std::complex<double>> tmp = s.values;
    detail::dft(tmp, s.grid.d, s.grid.M, +1);
    LatticeField f(s.grid);
    const double c = 1.0 / std::pow(s.grid.side(), s.grid.d);
    for (std::size_t i = 0; i < tmp.size(); ++i) f.values[i] = tmp[i].real() * c;
    return f;
}

RealKernel::RealKernel(const TorusGrid& g, int ext, double radius)
    : grid(g), extent(ext), values(ipow_size(ext + 1, g.d), 0.0), support_radius(radius) {
    if (ext < 0 || ext > g.M / 2) throw ParameterError("kernel extent outside the torus octant");
}

std::size_t RealKernel::index(const int* j) const {
    std::size_t idx = 0;
    for (int i = 0; i < grid.d; ++i) idx = idx * (extent + 1) + static_cast<std::size_t>(std::abs(j[i]));
    return idx;
}

double RealKernel::at(const int* j) const {
    std::size_t idx = 0;
    for (int i = 0; i < grid.d; ++i) {
        int a = std::abs(j[i]) % grid.M;
        if (a > grid.M / 2) a = grid.M - a;
        if (a > extent) return 0.0;
        idx = idx * (extent + 1) + static_cast<std::size_t>(a);
    }
    return values[idx];
}

EvenSymbol::EvenSymbol(const TorusGrid& g, double fill) : grid(g), values(g.octant_size(), fill) {}

EvenSymbol symbol_of(const RealKernel& k) {
    const TorusGrid& g = k.grid;
    const int N = g.M / 2 + 1, e1 = k.extent + 1, d = g.d;
    EvenSymbol s(g);
    const double log_cost = 5.0 * std::log2(2.0 * N);
    if (e1 < log_cost && e1 < N) {
        s.values = detail::cosine_sum(k.values, d, e1, N, g.M);
    } else {
        std::vector<int> src(d);
        for (std::size_t i = 0; i < k.values.size(); ++i) {
            octant_unflat(i, d, e1, src.data());
            s.values[octant_flat(src.data(), d, N)] = k.values[i];
        }
        detail::dct1(s.values, d, N);
    }
    const double c = g.cell();
    for (auto& v : s.values) v *= c;
    return s;
}

double symbol_at(const RealKernel& k, const double* p) {
    const int d = k.grid.d, e1 = k.extent + 1, M = k.grid.M;
    std::vector<std::vector<double>> c(d, std::vector<double>(e1));
    for (int q = 0; q < d; ++q)
        for (int j = 0; j < e1; ++j) c[q][j] = (j == 0 || 2 * j == M ? 1.0 : 2.0) * std::cos(p[q] * k.grid.eps * j);
    std::vector<int> j(d);
    double sum = 0.0;
    for (std::size_t i = 0; i < k.values.size(); ++i) {
        octant_unflat(i, d, e1, j.data());
        double w = k.values[i];
        for (int q = 0; q < d; ++q) w *= c[q][j[q]];
        sum += w;
    }
    return sum * k.grid.cell();
}

SymbolSlabs::SymbolSlabs(const RealKernel& k) {
    const TorusGrid& g = k.grid;
    const int d = g.d;
    N_ = g.M / 2 + 1;
    e1_ = k.extent + 1;
    slab_ = ipow_size(N_, d - 1);
    const double c = g.cell();
    if (d < 2 || !(e1_ < 5.0 * std::log2(2.0 * N_) && e1_ < N_)) {
        full_ = true;
        data_ = symbol_of(k).values;
        return;
    }
    table_.resize(static_cast<std::size_t>(N_) * e1_);
    for (int kk = 0; kk < N_; ++kk)
        for (int j = 0; j < e1_; ++j) {
            const double w = (j == 0 || 2 * j == g.M) ? 1.0 : 2.0;
            const long r = (static_cast<long>(kk) * j) % g.M;
            table_[static_cast<std::size_t>(kk) * e1_ + j] = c * w * std::cos(2.0 * std::numbers::pi * r / g.M);
        }
    // contract every axis but the first; the first index stays a site index
    std::vector<double> unit_table(table_.size());
    for (std::size_t i = 0; i < table_.size(); ++i) unit_table[i] = table_[i] / c;
    std::vector<int> dims(d, e1_);
    data_ = k.values;
    for (int ax = d - 1; ax >= 1; --ax) {
        data_ = detail::contract_axis(data_, dims, ax, unit_table, N_);
        dims[ax] = N_;
    }
}

void SymbolSlabs::slab(int k0, double* out) const {
    if (full_) {
        std::copy(data_.begin() + k0 * slab_, data_.begin() + (k0 + 1) * slab_, out);
        return;
    }
    std::fill(out, out + slab_, 0.0);
    const double* t = table_.data() + static_cast<std::size_t>(k0) * e1_;
    for (int j = 0; j < e1_; ++j) {
        const double w = t[j];
        const double* src = data_.data() + j * slab_;
        for (std::size_t i = 0; i < slab_; ++i) out[i] += w * src[i];
    }
}

RealKernel kernel_of(const EvenSymbol& s, double support_radius) {
    RealKernel k(s.grid, s.grid.M / 2, support_radius);
    k.values = s.values;
    detail::dct1(k.values, s.grid.d, s.N());
    const double c = 1.0 / std::pow(s.grid.side(), s.grid.d);
    for (auto& v : k.values) v *= c;
    return k;
}

LatticeField to_field(const RealKernel& k) {
    LatticeField f(k.grid);
    const int d = k.grid.d, M = k.grid.M;
    std::vector<int> j(d);
    for (std::size_t i = 0; i < f.values.size(); ++i) {
        octant_unflat(i, d, M, j.data());
        f.values[i] = k.at(j.data());
    }
    return f;
}

FourierSymbol to_fourier(const EvenSymbol& s) {
    const int d = s.grid.d, M = s.grid.M, N = s.N();
    FourierSymbol out{s.grid, std::vector<std::complex<double>>(s.grid.sites())};
    std::vector<int> k(d);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        octant_unflat(i, d, M, k.data());
        for (int a = 0; a < d; ++a)
            if (k[a] > M / 2) k[a] = M - k[a];
        out.values[i] = s.values[octant_flat(k.data(), d, N)];
    }
    return out;
}

namespace {

int ratio_of(const TorusGrid& fine, const TorusGrid& coarse) {
    if (fine.d != coarse.d) throw ParameterError("grid dimensions differ");
    if (coarse.M > fine.M || fine.M % coarse.M != 0) throw ParameterError("grids are not nested");
    const int r = fine.M / coarse.M;
    if (std::abs(fine.side() - coarse.side()) > 1e-12 * fine.side())
        throw ParameterError("grids have different physical sides");
    return r;
}

} // namespace

RealKernel restrict_kernel(const RealKernel& k, const TorusGrid& coarse) {
    const int r = ratio_of(k.grid, coarse);
    const int d = coarse.d;
    RealKernel out(coarse, std::min(k.extent / r, coarse.M / 2), k.support_radius);
    std::vector<int> j(d);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        octant_unflat(i, d, out.extent + 1, j.data());
        for (auto& v : j) v *= r;
        out.values[i] = k.values[k.index(j.data())];
    }
    return out;
}

EvenSymbol restrict_symbol(const EvenSymbol& s, const TorusGrid& coarse) {
    ratio_of(s.grid, coarse);
    const int d = coarse.d, Nc = coarse.M / 2 + 1, Nf = s.N();
    EvenSymbol out(coarse);
    std::vector<int> k(d);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        octant_unflat(i, d, Nc, k.data());
        out.values[i] = s.values[octant_flat(k.data(), d, Nf)];
    }
    return out;
}

} // namespace frd
