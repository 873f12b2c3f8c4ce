#include "frd/fluctuation.hpp"

#include "frd/errors.hpp"
#include "frd/resolvent.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace frd {

namespace {

double declared_gamma_range(const LatticeSpec& spec, bool tight) { return tight ? spec.L / 2.0 : 6.0 * spec.L; }

// Multiply the base symbol (1 - A0^2) / (a - Laplacian) into out, in place over the octant.
void fill_base_symbol(EvenSymbol& out, const EvenSymbol& A0, double a, double zero_mode_value) {
    const TorusGrid& g = out.grid;
    const int d = g.d, N = out.N();
    std::vector<double> axis(N);
    for (int k = 0; k < N; ++k) axis[k] = 2.0 * (1.0 - std::cos(g.eps * g.momentum(k))) / (g.eps * g.eps);
    std::vector<int> k(d);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        octant_unflat(i, d, N, k.data());
        double lap = 0.0;
        for (int q = 0; q < d; ++q) lap += axis[k[q]];
        const double den = a + lap;
        const double A = A0.values[i];
        out.values[i] = den == 0.0 ? zero_mode_value : (1.0 - A * A) / den;
    }
}

double zero_mode_of(const AveragingKernel& A0, double a) {
    if (a != 0.0) return 0.0;
    if (std::abs(A0.total - 1.0) > 1e-9)
        throw ZeroModeError("averaging kernel is defective at a = 0, so the zero-mode pole is not cancelled");
    return A0.second_moment;
}

} // namespace

FluctuationCovariance gamma_base(const LatticeSpec& spec, int n, double a, const AveragingKernel& A0) {
    if (A0.m != 0 || A0.n != n || A0.a != a) throw PreconditionError("gamma_base needs the m = 0 averaging kernel");
    const TorusGrid& g = A0.grid;
    if (g.side() < 4.0 * spec.L) throw ConfigurationError("torus too small for an alias-free range-L covariance");
    FluctuationCovariance c;
    c.grid = g;
    c.n = n;
    c.a = a;
    c.kind = "base";
    c.declared_range = spec.L;
    c.symbol = EvenSymbol(g);
    fill_base_symbol(c.symbol, A0.symbol(), a, zero_mode_of(A0, a));
    c.kernel = kernel_of(c.symbol, c.declared_range);
    return c;
}

FluctuationCovariance gamma_n(const LatticeSpec& spec, int n, double a,
                              const std::vector<const AveragingKernel*>& A_list, FluctuationCovariance base) {
    if (static_cast<int>(A_list.size()) < n) throw PreconditionError("averaging kernels missing for some m in 1..n");
    if (base.n != n || base.a != a) throw PreconditionError("base covariance built for another (n, a)");
    if (n == 0) return base;
    const bool tight = A_list[0] && A_list[0]->geometry == Geometry::tight;
    const double range = declared_gamma_range(spec, tight);
    if (base.grid.side() < 13.0 * spec.L) throw ConfigurationError("torus side below 13 L aliases the range-6L covariance");
    for (int m = 1; m <= n; ++m) {
        const AveragingKernel* A = A_list[m - 1];
        if (!A || A->m != m || A->n != n || A->a != a || !(A->grid == base.grid))
            throw PreconditionError("averaging kernel for m = " + std::to_string(m) + " missing or mismatched");
        const EvenSymbol S = A->symbol();
        for (std::size_t i = 0; i < S.values.size(); ++i) base.symbol.values[i] *= S.values[i] * S.values[i];
    }
    base.kind = "gamma";
    base.declared_range = range;
    base.kernel = kernel_of(base.symbol, range);
    return base;
}

Engine::Engine(const LatticeSpec& spec, const EngineOptions& options)
    : spec_(spec), options_(options),
      mollifier_(MollifierSpec::make(spec.d, spec.L, options.geometry == Geometry::tight)),
      cache_(options.cache_dir) {
    if (options.torus_factor < 1) throw ConfigurationError("torus factor must be positive");
}

void Engine::reserve_scale(int n) { spec_.n_max = std::max(spec_.n_max, n); }

TorusGrid Engine::grid(int n) const { return TorusGrid::for_scale(spec_, n, options_.torus_factor); }

CubeRegion Engine::cube(int n, int m) const {
    LatticeSpec s = spec_;
    s.n_max = std::max(s.n_max, n);
    return make_cube(s, n, m, options_.geometry, options_.torus_factor);
}

CacheHeader Engine::poisson_header(int n, int m, double a) const {
    CacheHeader h;
    h.kind = CacheKind::poisson;
    h.d = spec_.d;
    h.L = spec_.L;
    h.n = n;
    h.m = m;
    h.geometry = (options_.geometry == Geometry::tight ? 1u : 0u) | (options_.mass_term == MassTerm::unit ? 2u : 0u);
    h.a = a;
    return h;
}

std::vector<double> encode_poisson(const PoissonKernelTable& t) {
    std::vector<double> out;
    const int d = t.cube.grid.d;
    out.push_back(static_cast<double>(t.canonical.size()));
    for (std::size_t c = 0; c < t.canonical.size(); ++c) {
        for (int q = 0; q < d; ++q) out.push_back(t.canonical[c][q]);
        out.insert(out.end(), t.canonical_masses[c].begin(), t.canonical_masses[c].end());
    }
    return out;
}

std::optional<PoissonKernelTable> decode_poisson(const std::vector<double>& p, const CubeRegion& cube, double a,
                                                 MassTerm mass, const SiteList& sources) {
    const int d = cube.grid.d;
    const std::size_t B = cube.boundary.size();
    if (p.empty()) return std::nullopt;
    const auto count = static_cast<std::size_t>(p[0]);
    if (p.size() != 1 + count * (d + B)) return std::nullopt;
    std::map<std::vector<int>, std::size_t> have;
    std::vector<int> x(d);
    for (std::size_t c = 0; c < count; ++c) {
        const double* row = p.data() + 1 + c * (d + B);
        for (int q = 0; q < d; ++q) x[q] = static_cast<int>(row[q]);
        have.emplace(x, c);
    }
    PoissonKernelTable t;
    t.cube = cube;
    t.a = a;
    t.mass_term = mass;
    t.sources = sources;
    t.canonical.d = d;
    std::map<std::size_t, std::size_t> used;
    std::vector<int> canon(d), perm(d), sign(d);
    for (std::size_t i = 0; i < sources.size(); ++i) {
        canonical_form(sources[i], d, canon.data(), perm.data(), sign.data());
        auto it = have.find(canon);
        if (it == have.end()) return std::nullopt;
        t.source_perm.insert(t.source_perm.end(), perm.begin(), perm.end());
        t.source_sign.insert(t.source_sign.end(), sign.begin(), sign.end());
        auto u = used.find(it->second);
        if (u == used.end()) {
            u = used.emplace(it->second, t.canonical.size()).first;
            t.canonical.push(canon.data());
            const double* row = p.data() + 1 + it->second * (d + B) + d;
            t.canonical_masses.emplace_back(row, row + B);
        }
        t.source_canonical.push_back(u->second);
    }
    return t;
}

PoissonKernelTable Engine::poisson(int n, int m, double a) {
    const CubeRegion c = cube(n, m);
    const MollifierStencil st = mollifier_stencil(mollifier_, n, m);
    const SiteList sources = averaging_sources(st);
    const CacheHeader h = poisson_header(n, m, a);
    std::optional<PoissonKernelTable> table;
    bool from_cache = false;
    if (cache_.enabled()) {
        if (auto payload = cache_.load(h)) {
            table = decode_poisson(*payload, c, a, options_.mass_term, sources);
            from_cache = table.has_value();
        }
    }
    if (!table) {
        if (options_.require_cached) {
            missing_.push_back(h.key());
            throw MissingArtifacts("missing cached Poisson table " + h.key());
        }
        DirichletOperator op(c, a, options_.mass_term);
        table = poisson_kernel(op, sources, options_.threads);
        solves_ += table->solves;
        if (cache_.enabled()) cache_.store(h, encode_poisson(*table));
    }
    PoissonSummary s;
    s.n = n;
    s.m = m;
    s.a = a;
    s.sources = table->source_count();
    s.min_mass = 1e300;
    s.max_mass = -1e300;
    for (const auto& row : table->canonical_masses) {
        double tot = 0.0;
        for (double v : row) tot += v;
        s.min_mass = std::min(s.min_mass, tot);
        s.max_mass = std::max(s.max_mass, tot);
    }
    s.from_cache = from_cache;
    poisson_log_.push_back(s);
    return std::move(*table);
}

std::shared_ptr<const AveragingKernel> Engine::averaging(int n, int m, double a, bool keep) {
    const auto key = std::make_tuple(n, m, a);
    if (auto it = kernels_.find(key); it != kernels_.end()) return it->second;
    LatticeSpec s = spec_;
    s.n_max = std::max(s.n_max, n);
    const PoissonKernelTable t = poisson(n, m, a);
    auto k = std::make_shared<const AveragingKernel>(averaging_kernel(s, n, m, a, t, mollifier_));
    if (keep) kernels_.emplace(key, k);
    return k;
}

EvenSymbol Engine::gamma_symbol(int n, double a, bool keep) {
    const TorusGrid g = grid(n);
    if (g.side() < 4.0 * spec_.L) throw ConfigurationError("torus too small for an alias-free range-L covariance");
    if (n > 0 && g.side() < 13.0 * spec_.L)
        throw ConfigurationError("torus side below 13 L aliases the range-6L covariance");
    std::vector<std::shared_ptr<const AveragingKernel>> A;
    for (int m = 0; m <= n; ++m) A.push_back(averaging(n, m, a, keep));
    const double zero_mode = zero_mode_of(*A[0], a);

    const int d = g.d, N = g.M / 2 + 1;
    std::vector<double> axis(N);
    for (int k = 0; k < N; ++k) axis[k] = 2.0 * (1.0 - std::cos(g.eps * g.momentum(k))) / (g.eps * g.eps);
    std::vector<SymbolSlabs> slabs;
    for (const auto& k : A) slabs.emplace_back(k->kernel);
    const std::size_t ss = slabs[0].slab_size();
    std::vector<double> lap_rest(ss, 0.0);
    std::vector<int> k(d);
    for (std::size_t i = 0; i < ss; ++i) {
        if (d > 1) octant_unflat(i, d - 1, N, k.data());
        for (int q = 0; q < d - 1; ++q) lap_rest[i] += axis[k[q]];
    }
    EvenSymbol out(g);
    std::vector<double> buf(ss);
    for (int k0 = 0; k0 < N; ++k0) {
        double* o = out.values.data() + static_cast<std::size_t>(k0) * ss;
        slabs[0].slab(k0, buf.data());
        for (std::size_t i = 0; i < ss; ++i) {
            const double den = a + axis[k0] + lap_rest[i];
            o[i] = den == 0.0 ? zero_mode : (1.0 - buf[i] * buf[i]) / den;
        }
        for (std::size_t m = 1; m < slabs.size(); ++m) {
            slabs[m].slab(k0, buf.data());
            for (std::size_t i = 0; i < ss; ++i) o[i] *= buf[i] * buf[i];
        }
    }
    return out;
}

FluctuationCovariance Engine::base(int n, double a) {
    LatticeSpec s = spec_;
    s.n_max = std::max(s.n_max, n);
    return gamma_base(s, n, a, *averaging(n, 0, a));
}

FluctuationCovariance Engine::gamma(int n, double a, bool keep) {
    if (n == 0) return base(0, a);
    FluctuationCovariance c;
    c.grid = grid(n);
    c.n = n;
    c.a = a;
    c.kind = "gamma";
    c.declared_range = declared_gamma_range(spec_, tight());
    c.symbol = gamma_symbol(n, a, keep);
    c.kernel = kernel_of(c.symbol, c.declared_range);
    return c;
}

double range_excess(const RealKernel& k, double range) {
    const int d = k.grid.d, e1 = k.extent + 1;
    const double eps = k.grid.eps, g0 = std::abs(k.at0());
    std::vector<int> j(d);
    double worst = 0.0;
    for (std::size_t i = 0; i < k.values.size(); ++i) {
        octant_unflat(i, d, e1, j.data());
        int mx = 0;
        for (int q = 0; q < d; ++q) mx = std::max(mx, j[q]);
        if (mx * eps >= range - 1e-12 * range) worst = std::max(worst, std::abs(k.values[i]));
    }
    return g0 > 0 ? worst / g0 : worst;
}

namespace {

RealKernel truncate(const RealKernel& k, int extent) {
    extent = std::min(extent, k.extent);
    RealKernel out(k.grid, extent, k.support_radius);
    const int d = k.grid.d;
    std::vector<int> j(d);
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        octant_unflat(i, d, extent + 1, j.data());
        out.values[i] = k.values[k.index(j.data())];
    }
    return out;
}

} // namespace

DecompositionResult reconstruct(Engine& engine, double a, int N, int radius) {
    const LatticeSpec& spec = engine.spec();
    if (N < 0 || N > spec.n_max) throw InvalidScale("truncation depth outside 0..n_max");
    const int d = spec.d;
    DecompositionResult r;
    r.spec = spec;
    r.a = a;
    r.N = N;
    r.radius = radius;
    const std::size_t pts = ipow_size(radius + 1, d);
    std::vector<double> partial(pts, 0.0), G(pts);
    std::vector<int> x(d);
    for (std::size_t i = 0; i < pts; ++i) {
        octant_unflat(i, d, radius + 1, x.data());
        G[i] = lattice_green_infinite(d, a, x);
    }
    r.g0 = G[0];
    for (int n = 0; n <= N; ++n) {
        const double a_n = a * static_cast<double>(spec.ipow(2 * n));
        FluctuationCovariance c = engine.gamma(n, a_n, false);
        ScaleEntry e;
        e.n = n;
        e.a_n = a_n;
        e.gamma0 = c.kernel.at0();
        e.symbol_min = *std::min_element(c.symbol.values.begin(), c.symbol.values.end());
        e.symbol_max = *std::max_element(c.symbol.values.begin(), c.symbol.values.end());
        e.range_excess = range_excess(c.kernel, c.declared_range);
        e.kernel = truncate(c.kernel, static_cast<int>(std::ceil(c.declared_range / c.grid.eps)) + 1);
        e.symbol = std::move(c.symbol);
        const double scale = std::pow(static_cast<double>(spec.L), -static_cast<double>(n) * (d - 2));
        double sup = 0.0;
        for (std::size_t i = 0; i < pts; ++i) {
            octant_unflat(i, d, radius + 1, x.data());
            partial[i] += scale * c.kernel.at(x.data());
            sup = std::max(sup, std::abs(G[i] - partial[i]));
        }
        r.residual.push_back(sup);
        r.gammas.push_back(std::move(e));
    }
    for (const auto& e : r.gammas) r.c_fit = std::max(r.c_fit, std::abs(e.gamma0) * (1.0 + e.a_n));
    for (int n0 = 0; n0 <= N; ++n0) {
        double tail = 0.0;
        for (int n = n0 + 1; n < n0 + 400; ++n) {
            const double term = std::pow(static_cast<double>(spec.L), -static_cast<double>(n) * (d - 2)) /
                                (1.0 + a * std::pow(static_cast<double>(spec.L), 2.0 * n));
            tail += term;
            if (term < 1e-18 * tail) break;
        }
        r.tail_bound.push_back(r.c_fit * tail);
    }
    return r;
}

} // namespace frd
