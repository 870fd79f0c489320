#include "trv/scan.hpp"

#include <exception>
#include <limits>
#include <thread>

#ifdef TRV_HAVE_OPENMP
#include <omp.h>
#endif

#include "trv/errors.hpp"

namespace trv {

int scan_jobs(int jobs) {
    if (jobs == 1) return 1;
#ifdef TRV_HAVE_OPENMP
    if (jobs <= 0) {
        const int hc = omp_get_max_threads();
        return hc > 0 ? hc : 1;
    }
    return jobs;
#else
    (void)jobs;
    return 1;
#endif
}

void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& body) {
    const int workers = scan_jobs(jobs);
    if (workers == 1 || n < 2) {
        for (std::size_t k = 0; k < n; ++k) body(k);
        return;
    }
#ifdef TRV_HAVE_OPENMP
    // Exceptions must not unwind across the parallel region; remember the
    // lowest failing index so the rethrow is schedule-independent.
    std::exception_ptr first_error = nullptr;
    std::size_t first_index = std::numeric_limits<std::size_t>::max();
#pragma omp parallel for schedule(dynamic, 8) num_threads(workers)
    for (long long k = 0; k < static_cast<long long>(n); ++k) {
        try {
            body(static_cast<std::size_t>(k));
        } catch (...) {
#pragma omp critical(trv_parallel_for_error)
            if (static_cast<std::size_t>(k) < first_index) {
                first_index = static_cast<std::size_t>(k);
                first_error = std::current_exception();
            }
        }
    }
    if (first_error) std::rethrow_exception(first_error);
#else
    for (std::size_t k = 0; k < n; ++k) body(k);
#endif
}

kneading_grid_result kneading_grid(const family_spec& spec, double c_lo,
                                   double c_hi, int grid_points, int n,
                                   int jobs) {
    if (grid_points < 1) fail(errc::domain_error, "kneading_grid: empty grid");
    if (grid_points > 1 && !(c_lo < c_hi))
        fail(errc::domain_error, "kneading_grid: requires c_lo < c_hi");
    kneading_grid_result out;
    out.seqs.resize(static_cast<std::size_t>(grid_points));
    out.ok.assign(static_cast<std::size_t>(grid_points), 1);
    parallel_for(static_cast<std::size_t>(grid_points), jobs, [&](std::size_t k) {
        const double c =
            grid_points == 1
                ? c_lo
                : c_lo + (c_hi - c_lo) * static_cast<double>(k) / (grid_points - 1);
        try {
            out.seqs[k] = kneading(spec, c, n);
        } catch (const error& e) {
            if (e.code() != errc::escape) throw;
            out.ok[k] = 0;
        }
    });
    return out;
}

std::vector<lap_table> lap_grid(const family_spec& spec,
                                const std::vector<double>& params, int n_max,
                                int jobs) {
    std::vector<lap_table> out(params.size());
    parallel_for(params.size(), jobs,
                 [&](std::size_t k) { out[k] = lap_numbers(spec, params[k], n_max); });
    return out;
}

monotonicity_report monotonicity_scan_jobs(const family_spec& spec, double c_lo,
                                           double c_hi, int grid_points, int n,
                                           int jobs) {
    monotonicity_report rep;
    if (grid_points <= 1) return rep;
    if (!(c_lo < c_hi))
        fail(errc::domain_error, "monotonicity_scan requires c_lo < c_hi");
    const kneading_grid_result grid =
        kneading_grid(spec, c_lo, c_hi, grid_points, n, jobs);
    // The merge is serial and index-ordered, so the report does not depend
    // on the worker schedule.
    for (int i = 0; i < grid_points; ++i)
        if (!grid.ok[static_cast<std::size_t>(i)])
            rep.escaped.push_back(c_lo + (c_hi - c_lo) * i / (grid_points - 1));
    for (int i = 0; i + 1 < grid_points; ++i) {
        const std::size_t k = static_cast<std::size_t>(i);
        if (!grid.ok[k] || !grid.ok[k + 1]) continue;
        const double ca = c_lo + (c_hi - c_lo) * i / (grid_points - 1);
        const double cb = c_lo + (c_hi - c_lo) * (i + 1) / (grid_points - 1);
        try {
            if (compare(grid.seqs[k + 1], grid.seqs[k]) == order::less)
                rep.violations.push_back({k, ca, cb});
        } catch (const error& e) {
            if (e.code() != errc::incomparable) throw;
            rep.incomparable.emplace_back(ca, cb);
        }
    }
    return rep;
}

} // namespace trv
