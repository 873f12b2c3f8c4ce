#include "frd/errors.hpp"
#include "frd/fluctuation.hpp"
#include "frd/resolvent.hpp"

#include <gsl/gsl_integration.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

namespace frd {

namespace {

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 2.0)) throw ParameterError("alpha must lie in (0, 2)");
}

template <class F>
void gauss_legendre(double lo, double hi, int panels, int nodes, F&& f) {
    gsl_integration_glfixed_table* tab = gsl_integration_glfixed_table_alloc(nodes);
    const double h = (hi - lo) / panels;
    for (int p = 0; p < panels; ++p) {
        const double a = lo + p * h, b = a + h;
        for (int i = 0; i < nodes; ++i) {
            double x = 0.0, w = 0.0;
            gsl_integration_glfixed_point(a, b, i, &x, &w, tab);
            f(x, w);
        }
    }
    gsl_integration_glfixed_table_free(tab);
}

} // namespace

LevyQuadrature levy_quadrature(double alpha, double T, int panels, int nodes, int tail_panels) {
    check_alpha(alpha);
    if (!(T > 0.0) || panels < 1 || nodes < 1) throw ParameterError("quadrature needs T > 0 and positive counts");
    const double beta = 2.0 / (2.0 - alpha);
    LevyQuadrature q;
    auto head = [&](double t, double w) {
        q.a.push_back(std::pow(t, beta));
        q.w.push_back(beta * w);
    };
    const double h = T / panels;
    if (std::abs(beta - std::round(beta)) > 1e-12) {
        // t^beta is not smooth at 0: geometric panels towards the origin
        const double sigma = 0.2;
        const int levels = 10;
        double lo = h * std::pow(sigma, levels);
        gauss_legendre(0.0, lo, 1, nodes, head);
        for (int j = levels - 1; j >= 0; --j) {
            const double hi = h * std::pow(sigma, j);
            gauss_legendre(lo, hi, 1, nodes, head);
            lo = hi;
        }
        gauss_legendre(h, T, panels - 1, nodes, head);
    } else {
        gauss_legendre(0.0, T, panels, nodes, head);
    }
    if (tail_panels > 0) {
        const double A = std::pow(T, beta);
        gauss_legendre(0.0, 1.0, tail_panels, nodes, [&](double v, double w) {
            const double vp = std::pow(v, -2.0 / alpha);
            q.a.push_back(A * vp);
            q.w.push_back(std::pow(A, 1.0 - alpha / 2.0) * (2.0 / alpha) * vp * w);
        });
    }
    return q;
}

LevyParams LevyParams::make(int d, double alpha, double T, int panels, int nodes, int tail_panels) {
    check_alpha(alpha);
    LevyParams p;
    p.alpha = alpha;
    p.phi_dim = (d - alpha) / 2.0;
    p.normalization = std::sin(std::numbers::pi * alpha / 2.0) / std::numbers::pi;
    p.T = T;
    p.panels = panels;
    p.nodes = nodes;
    p.tail_panels = tail_panels;
    return p;
}

double levy_normalization_integral(const LevyQuadrature& q) {
    double s = 0.0;
    for (std::size_t i = 0; i < q.a.size(); ++i) s += q.w[i] / (q.a[i] + 1.0);
    return s;
}

double levy_cutoff(double alpha, double c) {
    check_alpha(alpha);
    if (!(c > 0.0)) throw ParameterError("decay constant must be positive");
    const double beta = 2.0 / (2.0 - alpha);
    return std::pow(std::log(1e8) / c, 2.0 / beta);
}

FluctuationCovariance levy_gamma(Engine& engine, int n, const LevyParams& params) {
    check_alpha(params.alpha);
    const LevyQuadrature q =
        levy_quadrature(params.alpha, params.T, params.panels, params.nodes, n == 0 ? params.tail_panels : 0);
    const LatticeSpec& spec = engine.spec();
    FluctuationCovariance c;
    c.grid = engine.grid(n);
    c.n = n;
    c.a = 0.0;
    c.kind = "levy";
    c.declared_range = n == 0 ? spec.L : (engine.tight() ? spec.L / 2.0 : 6.0 * spec.L);
    c.symbol = EvenSymbol(c.grid);
    for (std::size_t i = 0; i < q.a.size(); ++i) {
        const EvenSymbol s = engine.gamma_symbol(n, q.a[i], false);
        const double w = params.normalization * q.w[i];
        for (std::size_t j = 0; j < s.values.size(); ++j) c.symbol.values[j] += w * s.values[j];
    }
    c.kernel = kernel_of(c.symbol, c.declared_range);
    return c;
}

LevyReconstruction levy_reconstruct(Engine& engine, const LevyParams& params, int N, int radius) {
    std::vector<FluctuationCovariance> gammas;
    for (int n = 0; n <= N; ++n) gammas.push_back(levy_gamma(engine, n, params));
    return levy_reconstruct(engine.spec(), params, gammas, radius);
}

LevyReconstruction levy_reconstruct(const LatticeSpec& spec, const LevyParams& params,
                                    const std::vector<FluctuationCovariance>& gammas, int radius) {
    const int d = spec.d;
    const std::size_t pts = ipow_size(radius + 1, d);
    std::vector<double> G(pts), partial(pts, 0.0);
    std::vector<int> x(d);
    for (std::size_t i = 0; i < pts; ++i) {
        octant_unflat(i, d, radius + 1, x.data());
        G[i] = levy_green_infinite(d, params.alpha, x);
    }
    LevyReconstruction r;
    r.g0 = G[0];
    for (std::size_t n = 0; n < gammas.size(); ++n) {
        const FluctuationCovariance& c = gammas[n];
        if (c.n != static_cast<int>(n)) throw PreconditionError("Levy covariances must be ordered by scale");
        const double scale = std::pow(static_cast<double>(spec.L), -static_cast<double>(n) * (d - params.alpha));
        double sup = 0.0;
        for (std::size_t i = 0; i < pts; ++i) {
            octant_unflat(i, d, radius + 1, x.data());
            partial[i] += scale * c.kernel.at(x.data());
            sup = std::max(sup, std::abs(G[i] - partial[i]));
        }
        r.residual.push_back(sup);
        r.c_fit = std::max(r.c_fit, std::abs(c.kernel.at0()));
    }
    const double ratio = std::pow(static_cast<double>(spec.L), -(d - params.alpha));
    for (std::size_t n0 = 0; n0 < gammas.size(); ++n0)
        r.tail_bound.push_back(r.c_fit * std::pow(ratio, static_cast<double>(n0) + 1) / (1.0 - ratio));
    return r;
}

double fit_mass_decay(Engine& engine, int n, const std::vector<double>& a_values) {
    if (a_values.size() < 2) throw ParameterError("mass-decay fit needs at least two values of a");
    std::vector<double> xs, ys;
    for (double a : a_values) {
        const EvenSymbol s = engine.gamma_symbol(n, a, false);
        const double sup = *std::max_element(s.values.begin(), s.values.end());
        xs.push_back(std::sqrt(a));
        ys.push_back(std::log(sup));
    }
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return -sxy / sxx;
}

} // namespace frd
