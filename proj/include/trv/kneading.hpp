#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "trv/family.hpp"

namespace trv {

// Milnor-Thurston symbol string over {-1, 0, +1}.  A 0 symbol marks a
// return of the turning point onto itself and terminates the sequence.
struct kneading_sequence {
    std::vector<int> symbols;
    bool terminated = false;
};

enum class order { less, equal, greater };

struct lap_table {
    std::vector<long long> laps;   // laps[n-1] = lap count of the n-th iterate
    double entropy_estimate = 0.0; // least-squares slope of log laps over the last half
    double fit_error = 0.0;        // RMS residual of that fit
};

struct scan_violation {
    std::size_t index = 0; // grid index of the left parameter
    double c_left = 0.0;
    double c_right = 0.0;
};

struct monotonicity_report {
    std::vector<scan_violation> violations;              // order reversals
    std::vector<double> escaped;                         // parameters whose orbit escaped
    std::vector<std::pair<double, double>> incomparable; // undecidable adjacent pairs
};

// Symbols i_k for k = 1..n of the turning-point orbit; stops early with a
// 0 symbol when the orbit returns to the turning point within zero_tol.
kneading_sequence kneading(const family_spec& spec, double c, int n);

// The kneading order: first differing position decides via the product of
// symbols up to it.
order compare(const kneading_sequence& k1, const kneading_sequence& k2);

// Lap counts of the first n_max iterates by recursive monotone-branch
// preimage bisection, plus the entropy estimate they imply.
lap_table lap_numbers(const family_spec& spec, double c, int n_max);

// Adjacent-pair order check over a uniform parameter grid.
monotonicity_report monotonicity_scan(const family_spec& spec, double c_lo, double c_hi,
                                      int grid_points, int n);

// Human-readable statement of the symbol convention used for this family
// (emitted as metadata next to scan output).
std::string kneading_convention(const family_spec& spec);

} // namespace trv
