#pragma once

#include "frd/dirichlet.hpp"
#include "frd/lattice.hpp"

#include <string>
#include <vector>

namespace frd {

struct MollifierSpec {
    int d = 3;
    int L = 2;
    bool tight = false;
    std::string profile = "bump:exp(-1/(1-(r/range)^2))";
    double continuum_norm = 0.0;  // C in g(x) = C exp(-1/(1 - (|x|/range)^2))

    static MollifierSpec make(int d, int L, bool tight = false);
    double range() const { return tight ? L / 64.0 : L / 4.0; }
    double g(double r) const;  // unscaled profile at radius r
};

// g_m(x) = L^{md} g(L^m x).
double mollifier_value(const MollifierSpec& spec, int m, std::span<const double> x);

// c_{eps_n}: c eps_n^d sum over (eps_n Z)^d of g equals 1.
double lattice_norm_constant(const MollifierSpec& spec, int n);

// Weights c_{eps_{n-m}} eps_n^d g_m(eps_n j) on the lattice sites j where they are nonzero.
struct MollifierStencil {
    SiteList sites;
    std::vector<double> weights;
    int reach = 0;  // max |j_i|
};
MollifierStencil mollifier_stencil(const MollifierSpec& spec, int n, int m);

struct AveragingKernel {
    TorusGrid grid;
    int n = 0;
    int m = 0;
    double a = 0.0;
    MassTerm mass_term = MassTerm::resolvent;
    Geometry geometry = Geometry::standard;
    double R = 1.0;
    RealKernel kernel;   // density A(0, u) with respect to eps^d counting measure
    double total = 0.0;  // eps^d sum_u A(0, u) = symbol at p = 0
    double second_moment = 0.0;  // eps^d sum_u A(0, u) u_1^2 (physical units)

    EvenSymbol symbol() const { return symbol_of(kernel); }
};

// Poisson sources the kernel needs: -j for every stencil site j.
SiteList averaging_sources(const MollifierStencil& stencil);

AveragingKernel averaging_kernel(const LatticeSpec& spec, int n, int m, double a, const PoissonKernelTable& poisson,
                                 const MollifierSpec& mollifier);

// |1 - A^(p)| together with the reference bound R_m |p| + a R_m^2.
struct SmallPCheck {
    double gap = 0.0;
    double bound = 0.0;
    double excess() const { return gap > bound ? gap - bound : 0.0; }
};
SmallPCheck small_p_expansion_check(const AveragingKernel& kernel, std::span<const double> p, double a);

} // namespace frd
