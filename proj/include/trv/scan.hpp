#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "trv/family.hpp"
#include "trv/kneading.hpp"

namespace trv {

// Number of workers a --jobs request resolves to (0 or negative: all cores,
// or 1 when the library was built without OpenMP).
int scan_jobs(int jobs);

// Deterministic index-parallel map.  body(k) must touch only state owned by
// index k; with that contract the result is identical for every jobs value.
// jobs == 1 runs the plain serial loop and is kept as the reference path.
// The lowest-index exception thrown by any body is rethrown after the join.
void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& body);

struct kneading_grid_result {
    std::vector<kneading_sequence> seqs; // one per grid point
    std::vector<char> ok;                // 0 where the critical orbit escaped
};

// Kneading sequences on the uniform grid over [c_lo, c_hi].
kneading_grid_result kneading_grid(const family_spec& spec, double c_lo,
                                   double c_hi, int grid_points, int n, int jobs);

// Lap tables (and the entropy estimates they imply) for a parameter list.
std::vector<lap_table> lap_grid(const family_spec& spec,
                                const std::vector<double>& params, int n_max,
                                int jobs);

// monotonicity_scan with the symbol computation fanned out to a worker
// pool; the report is identical to the serial scan for any jobs value.
monotonicity_report monotonicity_scan_jobs(const family_spec& spec, double c_lo,
                                           double c_hi, int grid_points, int n,
                                           int jobs);

} // namespace trv
