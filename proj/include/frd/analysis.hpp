#pragma once

#include "frd/fluctuation.hpp"
#include "frd/lattice.hpp"

#include <string>
#include <vector>

namespace frd {

// Compactly supported field on the box [-B, B]^d of a lattice of spacing eps; zero outside.
struct BoxField {
    int d = 3;
    double eps = 1.0;
    int B = 0;
    std::vector<double> v;

    BoxField() = default;
    BoxField(int d, double eps, int B);
    int width() const { return 2 * B + 1; }
    std::size_t index(const int* j) const;
    bool inside(const int* j) const;
    double at(const int* j) const;
    double max_abs() const;
};

BoxField operator-(const BoxField& a, const BoxField& b);
BoxField operator*(double s, const BoxField& a);
// Forward difference at the box spacing.
BoxField forward_diff(const BoxField& f, int axis);
// Samples of a kernel at eps j, and of its forward difference at the kernel's own spacing.
BoxField box_from_kernel(const RealKernel& k, double eps, int B);
BoxField box_forward_diff(const RealKernel& k, int axis, double eps, int B);

enum class NormKind { L1_k, L1_k_equiv, C_j, L_inf, L1_fourier };
std::string to_string(NormKind k);

struct NormReport {
    NormKind kind = NormKind::L1_k;
    int order = 0;
    double domain = 0.0;  // half-width of the cube, physical units; 0 for the whole lattice
    double value = 0.0;
};

// Sum over 0 <= |alpha| <= k (or |alpha| = k with equiv) of eps^d sum |D^alpha f|.
// domain_half > 0 requires f to vanish outside (-domain_half, domain_half)^d.
NormReport sobolev_norm(const BoxField& f, int k, double domain_half, bool equiv);
NormReport sobolev_norm(const RealKernel& f, int k, const CubeRegion& domain, bool equiv);
// max over |beta| <= j of sup |D^beta f|
NormReport c_norm(const BoxField& f, int j);
// Ratio C^j / L1_k; requires k > d + j.
double embedding_check(const BoxField& f, int j, int k);
// side^{-d} sum over the full momentum grid of |s(p)|, which majorises the sup of the kernel.
NormReport fourier_l1_norm(const EvenSymbol& s);
// Constant C with full norm <= C equiv norm for fields supported in a cube of the given side,
// from the one-dimensional Poincare inequality.
double poincare_bound(int d, int k, double side);

struct RateReport {
    std::string quantity;
    std::string norm;
    double param = 0.0;  // a or alpha
    int k = 0;
    std::vector<int> scales;
    std::vector<double> values;
    std::vector<double> row_params;  // per-value parameter when it varies along the fit
    double fitted_rate = 0.0;
    double expected_rate = 0.0;
    double slack = 0.0;
    bool pass = false;
    bool fit_skipped = false;
    std::string note;
};

// Least-squares slope of log_base(values) against scales.
double log_slope(const std::vector<int>& scales, const std::vector<double>& values, double base);
// pass <=> fitted_rate <= expected_rate + slack; all-zero values skip the fit.
RateReport make_rate_report(std::string quantity, std::string norm, double param, int k, std::vector<int> scales,
                            std::vector<double> values, double L, double expected, double slack);

struct ComparisonLattice {
    int l = 1;
    double eps = 0.5;
    double domain_half = 12.0;  // cube containing every range-6L support
    int B = 0;
    bool compliant = false;  // l >= d
};
ComparisonLattice comparison_lattice(const LatticeSpec& spec, const std::vector<int>& scales, bool tight, int k_max);

struct Sample {
    int n = 0;
    BoxField value;
    std::vector<BoxField> grad;  // forward differences at the covariance's own spacing
};
Sample sample_covariance(const FluctuationCovariance& c, const ComparisonLattice& lat, bool with_grad);

enum class RateNorm { sobolev, sup, sup_grad };
std::string to_string(RateNorm n);

RateReport convergence_rate(const std::string& quantity, const LatticeSpec& spec, double param, int k, RateNorm norm,
                            const std::vector<Sample>& scales, const Sample& proxy, const ComparisonLattice& lat,
                            double slack = 0.15);

// fine-lattice stand-in for the continuum covariance
FluctuationCovariance continuum_proxy(Engine& engine, double a, int n_ref);

struct SymbolGap {
    int n = 0;
    double sup_gap = 0.0;    // sup_p |G_eps - G_c|
    double max_ratio = 0.0;  // sup_p |p^2 + Lap(p)| / (eps^2 p^4)
};
SymbolGap symbol_gap(const TorusGrid& grid, double a);
RateReport symbol_gap_diag(const LatticeSpec& spec, double a, const std::vector<int>& scales, int torus_factor,
                           std::vector<SymbolGap>* details = nullptr, double slack = 0.1);

// sup over the momenta of scale n of |A_{n,m}(p) - A_{n_ref,m}(p)|.
double averaging_gap(Engine& engine, int n, int m, double a, int n_ref);
RateReport averaging_gap_diag(Engine& engine, double a, int m, const std::vector<int>& scales, int n_ref,
                              double slack = 0.2);

} // namespace frd
