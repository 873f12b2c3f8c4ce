#include "frd/detail/transforms.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace frd::detail {

namespace {

std::mutex planner_mutex;

void r2r(std::vector<double>& a, int d, int n, fftw_r2r_kind kind) {
    if (a.empty()) return;
    std::vector<int> dims(d, n);
    std::vector<fftw_r2r_kind> kinds(d, kind);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex);
        plan = fftw_plan_r2r(d, dims.data(), a.data(), a.data(), kinds.data(), FFTW_ESTIMATE);
    }
    if (!plan) throw std::runtime_error("fftw r2r planning failed");
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(planner_mutex);
    fftw_destroy_plan(plan);
}

} // namespace

void dct1(std::vector<double>& a, int d, int n) {
    if (n < 2) return;  // a single point maps to itself
    r2r(a, d, n, FFTW_REDFT00);
}

void dst1(std::vector<double>& a, int d, int n) {
    r2r(a, d, n, FFTW_RODFT00);
}

void dft(std::vector<std::complex<double>>& a, int d, int n, int sign) {
    std::vector<int> dims(d, n);
    auto* p = reinterpret_cast<fftw_complex*>(a.data());
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex);
        plan = fftw_plan_dft(d, dims.data(), p, p, sign < 0 ? FFTW_FORWARD : FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    if (!plan) throw std::runtime_error("fftw dft planning failed");
    fftw_execute(plan);
    std::lock_guard<std::mutex> lock(planner_mutex);
    fftw_destroy_plan(plan);
}

std::vector<double> contract_axis(const std::vector<double>& in, const std::vector<int>& dims, int axis,
                                  const std::vector<double>& table, int n_out) {
    std::size_t outer = 1, inner = 1;
    for (int i = 0; i < axis; ++i) outer *= dims[i];
    for (std::size_t i = axis + 1; i < dims.size(); ++i) inner *= dims[i];
    const int n_in = dims[axis];
    std::vector<double> out(outer * n_out * inner, 0.0);
    for (std::size_t o = 0; o < outer; ++o) {
        const double* src = in.data() + o * n_in * inner;
        double* dst = out.data() + o * n_out * inner;
        for (int k = 0; k < n_out; ++k) {
            double* drow = dst + k * inner;
            const double* trow = table.data() + static_cast<std::size_t>(k) * n_in;
            for (int j = 0; j < n_in; ++j) {
                const double t = trow[j];
                if (t == 0.0) continue;
                const double* srow = src + j * inner;
                for (std::size_t i = 0; i < inner; ++i) drow[i] += t * srow[i];
            }
        }
    }
    return out;
}

std::vector<double> cosine_sum(const std::vector<double>& in, int d, int n_in, int N, int M) {
    std::vector<double> table(static_cast<std::size_t>(N) * n_in);
    for (int k = 0; k < N; ++k) {
        for (int j = 0; j < n_in; ++j) {
            const double w = (j == 0 || 2 * j == M) ? 1.0 : 2.0;
            // reduce the phase exactly before taking the cosine
            const long r = (static_cast<long>(k) * j) % M;
            table[static_cast<std::size_t>(k) * n_in + j] = w * std::cos(2.0 * std::numbers::pi * r / M);
        }
    }
    std::vector<int> dims(d, n_in);
    std::vector<double> cur = in;
    // last axis first, so the large contractions run over long contiguous rows
    for (int ax = d - 1; ax >= 0; --ax) {
        cur = contract_axis(cur, dims, ax, table, N);
        dims[ax] = N;
    }
    return cur;
}

} // namespace frd::detail
