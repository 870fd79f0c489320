// Timing comparison of the scan kernels: serial reference loop vs the
// OpenMP worker pool.  Also re-checks that both paths agree bit for bit,
// since that is the contract the parallel kernels are sold under.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <vector>

#include "trv/scan.hpp"

using namespace trv;

namespace {

double seconds(const std::chrono::steady_clock::time_point t0) {
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double>(t1 - t0).count();
}

} // namespace

int main(int argc, char** argv) {
    const int grid = argc > 1 ? std::atoi(argv[1]) : 2000;
    const int n_laps = argc > 2 ? std::atoi(argv[2]) : 16;
    const family_spec spec = family_spec::parse(R"({"family":"monic_additive","d":2})");
    const int pool = scan_jobs(0);
    std::printf("worker pool: %d threads\n", pool);

    std::vector<double> params;
    params.reserve(512);
    for (int i = 0; i < 512; ++i) params.push_back(-2.0 + 1.0 * i / 511);

    auto t0 = std::chrono::steady_clock::now();
    const std::vector<lap_table> lap_serial = lap_grid(spec, params, n_laps, 1);
    const double lap_s = seconds(t0);
    t0 = std::chrono::steady_clock::now();
    const std::vector<lap_table> lap_par = lap_grid(spec, params, n_laps, 0);
    const double lap_p = seconds(t0);
    bool lap_equal = lap_serial.size() == lap_par.size();
    for (std::size_t k = 0; lap_equal && k < lap_serial.size(); ++k)
        lap_equal = lap_serial[k].laps == lap_par[k].laps &&
                    lap_serial[k].entropy_estimate == lap_par[k].entropy_estimate;
    std::printf("lap_grid      512 params, n=%-3d  serial %7.3fs  parallel %7.3fs  "
                "speedup %5.2fx  bitwise %s\n",
                n_laps, lap_s, lap_p, lap_s / lap_p, lap_equal ? "equal" : "DIFFER");

    t0 = std::chrono::steady_clock::now();
    const monotonicity_report mono_serial =
        monotonicity_scan_jobs(spec, -2.0, 0.25, grid, 24, 1);
    const double mono_s = seconds(t0);
    t0 = std::chrono::steady_clock::now();
    const monotonicity_report mono_par =
        monotonicity_scan_jobs(spec, -2.0, 0.25, grid, 24, 0);
    const double mono_p = seconds(t0);
    const bool mono_equal = mono_serial.violations.size() == mono_par.violations.size() &&
                            mono_serial.escaped == mono_par.escaped &&
                            mono_serial.incomparable == mono_par.incomparable;
    std::printf("monotonicity  %d points, n=24   serial %7.3fs  parallel %7.3fs  "
                "speedup %5.2fx  reports %s (%zu violations)\n",
                grid, mono_s, mono_p, mono_s / mono_p, mono_equal ? "equal" : "DIFFER",
                mono_serial.violations.size());

    return (lap_equal && mono_equal) ? 0 : 1;
}
