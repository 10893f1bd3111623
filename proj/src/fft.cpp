#include "nsk/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace nsk::fft {

namespace {

Effort g_effort = Effort::deterministic;

struct PlanKey {
    int d;
    int n;
    int sign;
    Effort effort;
    auto operator<=>(const PlanKey&) const = default;
};

struct PlanEntry {
    fftw_plan plan = nullptr;
    CoeffArray in, out; // planning buffers; execution uses new-array interface
};

std::map<PlanKey, PlanEntry>& cache() {
    static std::map<PlanKey, PlanEntry> c;
    return c;
}
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

fftw_plan get_plan(const Grid& g, int sign) {
    PlanKey key{g.d, g.n, sign, g_effort};
    std::lock_guard<std::mutex> lock(plan_mutex());
    auto& entry = cache()[key];
    if (!entry.plan) {
        entry.in.resize(g.total());
        entry.out.resize(g.total());
        int dims[3] = {g.n, g.n, g.n};
        unsigned flags = (g_effort == Effort::fast) ? FFTW_MEASURE : FFTW_ESTIMATE;
        entry.plan = fftw_plan_dft(g.d, dims,
                                   reinterpret_cast<fftw_complex*>(entry.in.data()),
                                   reinterpret_cast<fftw_complex*>(entry.out.data()),
                                   sign, flags);
    }
    return entry.plan;
}

} // namespace

void set_effort(Effort e) { g_effort = e; }
Effort effort() { return g_effort; }

void forward(const Grid& g, const cplx* in, cplx* out) {
    fftw_plan p = get_plan(g, FFTW_FORWARD);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
    const double scale = 1.0 / static_cast<double>(g.total());
    const std::int64_t total = g.total();
    for (std::int64_t i = 0; i < total; ++i) out[i] *= scale;
}

void inverse(const Grid& g, const cplx* in, cplx* out) {
    fftw_plan p = get_plan(g, FFTW_BACKWARD);
    fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                     reinterpret_cast<fftw_complex*>(out));
}

} // namespace nsk::fft
