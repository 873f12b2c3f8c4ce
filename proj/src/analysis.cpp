#include "frd/analysis.hpp"

#include "frd/detail/transforms.hpp"
#include "frd/errors.hpp"
#include "frd/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace frd {

BoxField::BoxField(int d_, double eps_, int B_) : d(d_), eps(eps_), B(B_), v(ipow_size(2 * B_ + 1, d_), 0.0) {}

std::size_t BoxField::index(const int* j) const {
    std::size_t idx = 0;
    for (int q = 0; q < d; ++q) idx = idx * width() + static_cast<std::size_t>(j[q] + B);
    return idx;
}

bool BoxField::inside(const int* j) const {
    for (int q = 0; q < d; ++q)
        if (j[q] < -B || j[q] > B) return false;
    return true;
}

double BoxField::at(const int* j) const { return inside(j) ? v[index(j)] : 0.0; }

double BoxField::max_abs() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

namespace {

// Embed f into a box of half-width B >= f.B.
BoxField widen(const BoxField& f, int B) {
    if (B == f.B) return f;
    BoxField out(f.d, f.eps, B);
    std::vector<int> j(f.d);
    for (std::size_t i = 0; i < f.v.size(); ++i) {
        octant_unflat(i, f.d, f.width(), j.data());
        for (auto& x : j) x -= f.B;
        out.v[out.index(j.data())] = f.v[i];
    }
    return out;
}

} // namespace

BoxField operator-(const BoxField& a, const BoxField& b) {
    if (a.d != b.d || std::abs(a.eps - b.eps) > 1e-15 * a.eps) throw PreconditionError("box fields on different lattices");
    const int B = std::max(a.B, b.B);
    BoxField x = widen(a, B);
    const BoxField y = widen(b, B);
    for (std::size_t i = 0; i < x.v.size(); ++i) x.v[i] -= y.v[i];
    return x;
}

BoxField operator*(double s, const BoxField& a) {
    BoxField out = a;
    for (auto& v : out.v) v *= s;
    return out;
}

BoxField forward_diff(const BoxField& f, int axis) {
    if (axis < 0 || axis >= f.d) throw ParameterError("axis out of range");
    BoxField g = widen(f, f.B + 1);
    BoxField out(f.d, f.eps, f.B + 1);
    std::size_t stride = 1;
    for (int q = axis + 1; q < f.d; ++q) stride *= g.width();
    const int w = g.width();
    const std::size_t block = stride * w;
    for (std::size_t base = 0; base < g.v.size(); base += block) {
        for (int j = 0; j < w; ++j) {
            for (std::size_t i = 0; i < stride; ++i) {
                const double next = j + 1 < w ? g.v[base + (j + 1) * stride + i] : 0.0;
                out.v[base + j * stride + i] = (next - g.v[base + j * stride + i]) / f.eps;
            }
        }
    }
    return out;
}

namespace {

int stride_of(const RealKernel& k, double eps) {
    const double r = eps / k.grid.eps;
    const int ri = static_cast<int>(std::lround(r));
    if (ri < 1 || std::abs(r - ri) > 1e-9) throw PreconditionError("comparison lattice is not a sublattice");
    return ri;
}

} // namespace

BoxField box_from_kernel(const RealKernel& k, double eps, int B) {
    const int r = stride_of(k, eps), d = k.grid.d;
    BoxField out(d, eps, B);
    std::vector<int> j(d);
    for (std::size_t i = 0; i < out.v.size(); ++i) {
        octant_unflat(i, d, out.width(), j.data());
        for (auto& x : j) x = (x - B) * r;
        out.v[i] = k.at(j.data());
    }
    return out;
}

BoxField box_forward_diff(const RealKernel& k, int axis, double eps, int B) {
    const int r = stride_of(k, eps), d = k.grid.d;
    BoxField out(d, eps, B);
    std::vector<int> j(d), jn(d);
    for (std::size_t i = 0; i < out.v.size(); ++i) {
        octant_unflat(i, d, out.width(), j.data());
        for (auto& x : j) x = (x - B) * r;
        jn = j;
        jn[axis] += 1;
        out.v[i] = (k.at(jn.data()) - k.at(j.data())) / k.grid.eps;
    }
    return out;
}

std::string to_string(NormKind k) {
    switch (k) {
    case NormKind::L1_k: return "L1_k";
    case NormKind::L1_k_equiv: return "L1_k_equiv";
    case NormKind::C_j: return "C_j";
    case NormKind::L_inf: return "L_inf";
    case NormKind::L1_fourier: return "L1_fourier";
    }
    return "unknown";
}

std::string to_string(RateNorm n) {
    switch (n) {
    case RateNorm::sobolev: return "L1_k";
    case RateNorm::sup: return "C0";
    case RateNorm::sup_grad: return "C0_forward_diff";
    }
    return "unknown";
}

namespace {

// Visit D^alpha f for every multi-index with |alpha| <= k exactly once.
void for_derivatives(const BoxField& f, int k, const std::function<void(const BoxField&, int)>& visit) {
    std::function<void(const BoxField&, int, int)> rec = [&](const BoxField& g, int min_axis, int order) {
        visit(g, order);
        if (order == k) return;
        for (int ax = min_axis; ax < g.d; ++ax) rec(forward_diff(g, ax), ax, order + 1);
    };
    rec(f, 0, 0);
}

double l1(const BoxField& f) {
    double s = 0.0;
    for (double x : f.v) s += std::abs(x);
    return s * std::pow(f.eps, f.d);
}

void check_domain(const BoxField& f, double h) {
    if (h <= 0) return;
    const double tol = 1e-9 * f.max_abs();
    std::vector<int> j(f.d);
    for (std::size_t i = 0; i < f.v.size(); ++i) {
        if (std::abs(f.v[i]) <= tol) continue;
        octant_unflat(i, f.d, f.width(), j.data());
        for (int q = 0; q < f.d; ++q)
            if (std::abs(j[q] - f.B) * f.eps >= h - 1e-12 * h)
                throw PreconditionError("field support exceeds the norm domain");
    }
}

} // namespace

NormReport sobolev_norm(const BoxField& f, int k, double domain_half, bool equiv) {
    if (k < 0) throw ParameterError("Sobolev order must be non-negative");
    check_domain(f, domain_half);
    double total = 0.0;
    for_derivatives(f, k, [&](const BoxField& g, int order) {
        if (!equiv || order == k) total += l1(g);
    });
    return NormReport{equiv ? NormKind::L1_k_equiv : NormKind::L1_k, k, domain_half, total};
}

NormReport sobolev_norm(const RealKernel& f, int k, const CubeRegion& domain, bool equiv) {
    if (!(f.grid == domain.grid)) throw PreconditionError("kernel and domain live on different grids");
    const BoxField box = box_from_kernel(f, f.grid.eps, std::min(f.extent, f.grid.M / 2 - 1));
    return sobolev_norm(box, k, domain.R / 2, equiv);
}

NormReport c_norm(const BoxField& f, int j) {
    double best = 0.0;
    for_derivatives(f, j, [&](const BoxField& g, int) { best = std::max(best, g.max_abs()); });
    return NormReport{j == 0 ? NormKind::L_inf : NormKind::C_j, j, 0.0, best};
}

double embedding_check(const BoxField& f, int j, int k) {
    if (k <= f.d + j) throw ParameterError("embedding needs k > d + j");
    const double num = c_norm(f, j).value;
    if (num == 0.0) return 0.0;
    return num / sobolev_norm(f, k, 0.0, false).value;
}

NormReport fourier_l1_norm(const EvenSymbol& s) {
    const int d = s.grid.d, N = s.N(), M = s.grid.M;
    std::vector<int> k(d);
    double sum = 0.0;
    for (std::size_t i = 0; i < s.values.size(); ++i) {
        octant_unflat(i, d, N, k.data());
        double w = 1.0;
        for (int q = 0; q < d; ++q) w *= (k[q] == 0 || 2 * k[q] == M) ? 1.0 : 2.0;
        sum += w * std::abs(s.values[i]);
    }
    return NormReport{NormKind::L1_fourier, 0, 0.0, sum / std::pow(s.grid.side(), d)};
}

double poincare_bound(int d, int k, double side) {
    double total = 0.0;
    for (int j = 0; j <= k; ++j) {
        // number of multi-indices of order j in d variables
        double count = 1.0;
        for (int i = 1; i <= d - 1; ++i) count = count * (j + i) / i;
        total += count * std::pow(side, k - j);
    }
    return total;
}

double log_slope(const std::vector<int>& scales, const std::vector<double>& values, double base) {
    const std::size_t n = scales.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += scales[i];
        my += std::log(values[i]) / std::log(base);
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = scales[i] - mx;
        sxy += dx * (std::log(values[i]) / std::log(base) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

RateReport make_rate_report(std::string quantity, std::string norm, double param, int k, std::vector<int> scales,
                            std::vector<double> values, double L, double expected, double slack) {
    if (scales.size() < 3 || values.size() != scales.size())
        throw ParameterError("rate fit needs at least three scales");
    RateReport r;
    r.quantity = std::move(quantity);
    r.norm = std::move(norm);
    r.param = param;
    r.k = k;
    r.scales = std::move(scales);
    r.values = std::move(values);
    r.expected_rate = expected;
    r.slack = slack;
    const bool all_zero = std::all_of(r.values.begin(), r.values.end(), [](double v) { return v == 0.0; });
    const bool any_nonpositive = std::any_of(r.values.begin(), r.values.end(), [](double v) { return !(v > 0.0); });
    if (all_zero) {
        r.fit_skipped = true;
        r.pass = true;
        r.note = "all differences vanish; fit skipped";
        r.fitted_rate = 0.0;
        return r;
    }
    if (any_nonpositive) {
        r.fit_skipped = true;
        r.pass = false;
        r.note = "non-positive value; log fit impossible";
        return r;
    }
    r.fitted_rate = log_slope(r.scales, r.values, L);
    r.pass = r.fitted_rate <= expected + slack;
    return r;
}

ComparisonLattice comparison_lattice(const LatticeSpec& spec, const std::vector<int>& scales, bool tight, int k_max) {
    if (scales.empty()) throw ParameterError("no scales to compare");
    ComparisonLattice c;
    c.l = *std::min_element(scales.begin(), scales.end());
    c.eps = spec.eps(c.l);
    c.domain_half = tight ? spec.L : 6.0 * spec.L;
    c.B = static_cast<int>(std::ceil(c.domain_half / c.eps)) + k_max + 2;
    c.compliant = c.l >= spec.d;
    return c;
}

Sample sample_covariance(const FluctuationCovariance& c, const ComparisonLattice& lat, bool with_grad) {
    Sample s;
    s.n = c.n;
    s.value = box_from_kernel(c.kernel, lat.eps, lat.B);
    if (with_grad)
        for (int ax = 0; ax < c.grid.d; ++ax) s.grad.push_back(box_forward_diff(c.kernel, ax, lat.eps, lat.B));
    return s;
}

RateReport convergence_rate(const std::string& quantity, const LatticeSpec& spec, double param, int k, RateNorm norm,
                            const std::vector<Sample>& scales, const Sample& proxy, const ComparisonLattice& lat,
                            double slack) {
    std::vector<int> ns;
    std::vector<double> vals;
    for (const Sample& s : scales) {
        if (s.n >= proxy.n) throw PreconditionError("proxy must be strictly finer than every compared scale");
        ns.push_back(s.n);
        double v = 0.0;
        if (norm == RateNorm::sobolev) {
            v = sobolev_norm(s.value - proxy.value, k, lat.domain_half, false).value;
        } else if (norm == RateNorm::sup) {
            v = (s.value - proxy.value).max_abs();
        } else {
            if (s.grad.size() != static_cast<std::size_t>(spec.d) || proxy.grad.size() != s.grad.size())
                throw PreconditionError("derivative samples missing");
            for (int ax = 0; ax < spec.d; ++ax) v = std::max(v, (s.grad[ax] - proxy.grad[ax]).max_abs());
        }
        vals.push_back(v);
    }
    RateReport r = make_rate_report(quantity, to_string(norm), param, norm == RateNorm::sobolev ? k : 0, ns, vals,
                                    spec.L, -0.5, slack);
    if (!lat.compliant) {
        r.note += (r.note.empty() ? "" : "; ");
        r.note += "comparison lattice l=" + std::to_string(lat.l) + " < d (extrapolated regime)";
    }
    return r;
}

FluctuationCovariance continuum_proxy(Engine& engine, double a, int n_ref) {
    engine.reserve_scale(n_ref);
    const TorusGrid g = engine.grid(n_ref);
    const double bytes = 4.0 * 8.0 * static_cast<double>(g.octant_size());
    if (bytes > 8e9) throw ConfigurationError("proxy grid exceeds the memory budget");
    return engine.gamma(n_ref, a, false);
}

SymbolGap symbol_gap(const TorusGrid& g, double a) {
    const int d = g.d, N = g.M / 2 + 1;
    std::vector<double> p(N), lap(N);
    for (int k = 0; k < N; ++k) {
        p[k] = g.momentum(k);
        lap[k] = 2.0 * (1.0 - std::cos(g.eps * p[k])) / (g.eps * g.eps);
    }
    SymbolGap r;
    std::vector<int> k(d);
    const std::size_t total = ipow_size(N, d);
    for (std::size_t i = 0; i < total; ++i) {
        octant_unflat(i, d, N, k.data());
        double p2 = 0.0, l = 0.0;
        for (int q = 0; q < d; ++q) {
            p2 += p[k[q]] * p[k[q]];
            l += lap[k[q]];
        }
        if (p2 == 0.0) continue;
        r.sup_gap = std::max(r.sup_gap, std::abs(1.0 / (a + l) - 1.0 / (a + p2)));
        r.max_ratio = std::max(r.max_ratio, std::abs(p2 - l) / (g.eps * g.eps * p2 * p2));
    }
    return r;
}

RateReport symbol_gap_diag(const LatticeSpec& spec, double a, const std::vector<int>& scales, int torus_factor,
                           std::vector<SymbolGap>* details, double slack) {
    std::vector<double> vals;
    for (int n : scales) {
        if (n < 1) throw ParameterError("symbol gap needs n >= 1");
        SymbolGap g = symbol_gap(TorusGrid::for_scale(spec, n, torus_factor), a);
        g.n = n;
        vals.push_back(g.sup_gap);
        if (details) details->push_back(g);
    }
    return make_rate_report("symbol-gap", "sup_p", a, 0, scales, vals, spec.L, -1.0, slack);
}

namespace {

// Symbol of an even kernel at the momenta 2 pi k / side, k = 0..N-1.
std::vector<double> symbol_prefix(const RealKernel& k, int N) {
    auto s = detail::cosine_sum(k.values, k.grid.d, k.extent + 1, N, k.grid.M);
    const double c = k.grid.cell();
    for (auto& v : s) v *= c;
    return s;
}

} // namespace

double averaging_gap(Engine& engine, int n, int m, double a, int n_ref) {
    const auto A = engine.averaging(n, m, a);
    const auto R = engine.averaging(n_ref, m, a);
    const EvenSymbol S = A->symbol();
    const auto ref = symbol_prefix(R->kernel, S.N());
    double gap = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) gap = std::max(gap, std::abs(S.values[i] - ref[i]));
    return gap;
}

RateReport averaging_gap_diag(Engine& engine, double a, int m, const std::vector<int>& scales, int n_ref,
                              double slack) {
    std::vector<double> vals;
    for (int n : scales) vals.push_back(averaging_gap(engine, n, m, a, n_ref));
    return make_rate_report("averaging-gap", "sup_p", a, m, scales, vals, engine.spec().L, -1.0, slack);
}

} // namespace frd
