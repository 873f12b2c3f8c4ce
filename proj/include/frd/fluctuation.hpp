#pragma once

#include "frd/averaging.hpp"
#include "frd/cache.hpp"
#include "frd/dirichlet.hpp"
#include "frd/lattice.hpp"

#include <map>
#include <memory>
#include <string>
#include <tuple>
#include <vector>

namespace frd {

struct FluctuationCovariance {
    TorusGrid grid;
    int n = 0;
    double a = 0.0;
    EvenSymbol symbol;
    RealKernel kernel;
    double declared_range = 0.0;
    std::string kind;  // "base", "gamma", "levy"
};

// (1 - A0^2) G in Fourier space; at a = 0 the p = 0 value is the continuous extension.
FluctuationCovariance gamma_base(const LatticeSpec& spec, int n, double a, const AveragingKernel& A0);
// prod_{m=1}^n A_m^2 times the base symbol; A_list[m-1] is the m-th averaging kernel.
FluctuationCovariance gamma_n(const LatticeSpec& spec, int n, double a,
                              const std::vector<const AveragingKernel*>& A_list, FluctuationCovariance base);

struct EngineOptions {
    int torus_factor = 16;
    Geometry geometry = Geometry::standard;
    MassTerm mass_term = MassTerm::resolvent;
    std::string cache_dir;       // empty: no disk cache
    bool require_cached = false;  // missing Poisson tables are an error
    int threads = 1;
};

struct PoissonSummary {
    int n = 0;
    int m = 0;
    double a = 0.0;
    std::size_t sources = 0;
    double min_mass = 0.0;
    double max_mass = 0.0;
    bool from_cache = false;
};

class Engine {
public:
    Engine(const LatticeSpec& spec, const EngineOptions& options = {});

    const LatticeSpec& spec() const { return spec_; }
    const EngineOptions& options() const { return options_; }
    const MollifierSpec& mollifier() const { return mollifier_; }
    bool tight() const { return options_.geometry == Geometry::tight; }

    // Allow scales up to n (the LatticeSpec is widened as needed).
    void reserve_scale(int n);

    TorusGrid grid(int n) const;
    CubeRegion cube(int n, int m) const;
    CacheHeader poisson_header(int n, int m, double a) const;

    PoissonKernelTable poisson(int n, int m, double a);
    // keep = false builds without touching the in-memory kernel cache.
    std::shared_ptr<const AveragingKernel> averaging(int n, int m, double a, bool keep = true);

    // Symbol of the fluctuation covariance at scale n, without the inverse transform.
    EvenSymbol gamma_symbol(int n, double a, bool keep = true);
    FluctuationCovariance base(int n, double a);
    FluctuationCovariance gamma(int n, double a, bool keep = true);

    long solves() const { return solves_; }
    const std::vector<PoissonSummary>& poisson_log() const { return poisson_log_; }
    const std::vector<std::string>& missing_keys() const { return missing_; }
    void clear_kernels() { kernels_.clear(); }

private:
    LatticeSpec spec_;
    EngineOptions options_;
    MollifierSpec mollifier_;
    DiskCache cache_;
    std::map<std::tuple<int, int, double>, std::shared_ptr<const AveragingKernel>> kernels_;
    long solves_ = 0;
    std::vector<PoissonSummary> poisson_log_;
    std::vector<std::string> missing_;
};

// Poisson-table payload for the disk cache.
std::vector<double> encode_poisson(const PoissonKernelTable& t);
// Rebuilds a table for the given sources; empty optional if the payload lacks one of them.
std::optional<PoissonKernelTable> decode_poisson(const std::vector<double>& payload, const CubeRegion& cube, double a,
                                                 MassTerm mass, const SiteList& sources);

// max |k(x)| over |x|_inf >= range, relative to |k(0)|.
double range_excess(const RealKernel& k, double range);

struct ScaleEntry {
    int n = 0;
    double a_n = 0.0;
    double gamma0 = 0.0;
    double symbol_min = 0.0;
    double symbol_max = 0.0;
    RealKernel kernel;  // restricted to |x| <= range + one site
    EvenSymbol symbol;
    double range_excess = 0.0;  // max |Gamma| at |x|_inf >= declared range over Gamma(0)
};

struct DecompositionResult {
    LatticeSpec spec;
    double a = 0.0;
    int N = 0;
    std::vector<ScaleEntry> gammas;
    std::vector<double> residual;   // sup over |x|_inf <= radius, indexed by truncation depth
    std::vector<double> tail_bound;  // fitted geometric tail bound, same indexing
    double c_fit = 0.0;
    double g0 = 0.0;  // reference G^a(0)
    int radius = 4;
};

DecompositionResult reconstruct(Engine& engine, double a, int N, int radius = 4);

struct LevyQuadrature {
    std::vector<double> a;
    std::vector<double> w;  // integral of a^{-alpha/2} F(a) da over (0, inf) ~ sum w F(a)
};

// Head: a = t^beta, beta = 2/(2 - alpha), Gauss-Legendre on [0, T]; for non-integer beta the first
// panel is split geometrically towards 0.  Tail (optional): a = T^beta v^{-2/alpha}, Gauss-Legendre on v in (0, 1].
LevyQuadrature levy_quadrature(double alpha, double T, int panels, int nodes, int tail_panels = 0);

struct LevyParams {
    double alpha = 1.0;
    double phi_dim = 1.0;
    double normalization = 0.0;  // sin(pi alpha / 2) / pi
    double T = 0.0;
    int panels = 16;
    int nodes = 16;
    int tail_panels = 4;

    static LevyParams make(int d, double alpha, double T, int panels = 16, int nodes = 16, int tail_panels = 4);
};

// Integral of a^{-alpha/2} / (a + 1) over (0, inf) by the quadrature; closed form pi / sin(pi alpha/2).
double levy_normalization_integral(const LevyQuadrature& q);

// Quadrature of const * int a^{-alpha/2} Gamma^a_n da symbol-wise.  The tail map is used when
// params.tail_panels > 0 and n == 0 (the only scale without the exponential decay in a).
FluctuationCovariance levy_gamma(Engine& engine, int n, const LevyParams& params);

struct LevyReconstruction {
    std::vector<double> residual;  // sup over |x|_inf <= radius for truncation depth 0..N
    std::vector<double> tail_bound;
    double g0 = 0.0;
    double c_fit = 0.0;
};
// Partial sums of L^{-n(d - alpha)} Gamma_n(x / L^n) against the direct fractional Green's function.
LevyReconstruction levy_reconstruct(Engine& engine, const LevyParams& params, int N, int radius = 2);
// Same from covariances already built for n = 0..N.
LevyReconstruction levy_reconstruct(const LatticeSpec& spec, const LevyParams& params,
                                    const std::vector<FluctuationCovariance>& gammas, int radius = 2);

// Slope of log sup_p Gamma^a_n(p) against sqrt(a); returns -slope.
double fit_mass_decay(Engine& engine, int n, const std::vector<double>& a_values);

// Cut-off for the head quadrature so that exp(-c T^{beta/2}) = 1e-8.
double levy_cutoff(double alpha, double c);

} // namespace frd
