#include "trv/kneading.hpp"

#include <algorithm>
#include <cmath>

namespace trv {

namespace {

struct interval_info {
    double lo = 0, hi = 0;  // dynamical interval
    double turning = 0;     // turning point x0
    bool max_type = false;  // multiplicative kinds have a maximum at x0
    double zero_tol = 0;
    double escape_bound = 0;
};

interval_info analyze(const family_spec& spec, double c) {
    interval_info info;
    switch (spec.kind) {
        case family_kind::monic_additive:
        case family_kind::power_additive:
        case family_kind::flat_additive:
            info.turning = 0.0;
            info.max_type = false;
            break;
        case family_kind::multiplicative:
            info.turning = spec.base == mult_base::sin ? std::acos(-1.0) / 2.0 : 0.5;
            info.max_type = true;
            break;
        case family_kind::cubic:
            fail(errc::domain_error, "kneading symbols are defined for the unimodal kinds only");
    }
    const double f1 = eval_real(spec, c, info.turning);
    const double f2 = eval_real(spec, c, f1);
    double lo = std::min(f1, f2), hi = std::max(f1, f2);
    // Invariance of [lo, hi]: extremes of f over it are attained at the
    // endpoints or at the turning point.
    double mn = std::min(eval_real(spec, c, lo), eval_real(spec, c, hi));
    double mx = std::max(eval_real(spec, c, lo), eval_real(spec, c, hi));
    if (lo < info.turning && info.turning < hi) {
        mn = std::min(mn, f1);
        mx = std::max(mx, f1);
    }
    const double slack = 1e-12 * std::max({1.0, std::abs(lo), std::abs(hi)});
    const bool invariant = (hi - lo) > 0 && mn >= lo - slack && mx <= hi + slack;
    info.escape_bound = 10.0 * std::max(1.0, std::abs(c));
    if (!invariant) {
        lo = info.turning - info.escape_bound;
        hi = info.turning + info.escape_bound;
    }
    info.lo = lo;
    info.hi = hi;
    info.zero_tol = 1e-11 * std::max(hi - lo, 1.0);
    return info;
}

void check_escape(double x, const interval_info& info) {
    if (!std::isfinite(x) || std::abs(x) > info.escape_bound)
        fail(errc::escape, "critical orbit left the dynamical interval");
}

// Inverse image of target under the restriction of f to the monotone
// branch [a, b]; empty if the target is not covered.
bool branch_preimage(const family_spec& spec, double c, double a, double b, double target,
                     double* root) {
    double va = eval_real(spec, c, a) - target;
    double vb = eval_real(spec, c, b) - target;
    if (va == 0.0) { *root = a; return true; }
    if (vb == 0.0) { *root = b; return true; }
    if ((va > 0) == (vb > 0)) return false;
    for (int i = 0; i < 90; ++i) {
        double m = 0.5 * (a + b);
        double vm = eval_real(spec, c, m) - target;
        if (vm == 0.0) { *root = m; return true; }
        if ((vm > 0) == (va > 0)) {
            a = m;
            va = vm;
        } else {
            b = m;
        }
    }
    *root = 0.5 * (a + b);
    return true;
}

// Sorted-insert with tolerance; returns false if an equal point exists.
bool insert_unique(std::vector<double>& pts, double x, double tol) {
    auto it = std::lower_bound(pts.begin(), pts.end(), x);
    if (it != pts.end() && *it - x < tol) return false;
    if (it != pts.begin() && x - *(it - 1) < tol) return false;
    pts.insert(it, x);
    return true;
}

} // namespace

kneading_sequence kneading(const family_spec& spec, double c, int n) {
    if (n < 1) fail(errc::domain_error, "kneading requires n >= 1");
    const interval_info info = analyze(spec, c);
    kneading_sequence seq;
    seq.symbols.reserve(static_cast<std::size_t>(n));
    double x = info.turning;
    for (int k = 1; k <= n; ++k) {
        x = eval_real(spec, c, x);
        check_escape(x, info);
        const double d = x - info.turning;
        if (std::abs(d) < info.zero_tol) {
            seq.symbols.push_back(0);
            seq.terminated = true;
            break;
        }
        int s = d > 0 ? 1 : -1;
        seq.symbols.push_back(info.max_type ? -s : s);
    }
    return seq;
}

order compare(const kneading_sequence& k1, const kneading_sequence& k2) {
    if (k1.symbols.empty() || k2.symbols.empty())
        fail(errc::degenerate_input, "compare requires nonempty kneading sequences");
    const std::size_t m = std::min(k1.symbols.size(), k2.symbols.size());
    int prefix = 1;
    for (std::size_t i = 0; i < m; ++i) {
        const int s1 = k1.symbols[i], s2 = k2.symbols[i];
        if (s1 != s2) {
            const int p1 = prefix * s1, p2 = prefix * s2;
            if (p1 == p2)
                fail(errc::incomparable, "zero prefix product leaves the order undecided");
            return p1 < p2 ? order::less : order::greater;
        }
        prefix *= s1;
    }
    if (k1.symbols.size() == k2.symbols.size()) return order::equal;
    const kneading_sequence& shorter = k1.symbols.size() < k2.symbols.size() ? k1 : k2;
    if (shorter.terminated)
        fail(errc::incomparable, "terminated sequence is a strict prefix of the other");
    return order::equal;
}

lap_table lap_numbers(const family_spec& spec, double c, int n_max) {
    if (n_max < 1 || n_max > 24) fail(errc::domain_error, "lap_numbers requires 1 <= n_max <= 24");
    if (spec.kind == family_kind::monic_additive && spec.d % 2 != 0)
        fail(errc::domain_error, "lap counting requires an even-degree (unimodal) monic family");
    const interval_info info = analyze(spec, c);

    // The critical orbit escaping is an error, mirroring kneading().
    {
        double x = info.turning;
        for (int k = 0; k < n_max; ++k) {
            x = eval_real(spec, c, x);
            check_escape(x, info);
        }
    }

    const double tol = 1e-10 * std::max(1.0, info.hi - info.lo);
    std::vector<double> pts;
    std::vector<double> targets;
    if (info.lo - tol <= info.turning && info.turning <= info.hi + tol) {
        pts.push_back(info.turning);
        targets.push_back(info.turning);
    }

    const bool split = info.lo < info.turning && info.turning < info.hi;
    std::vector<std::pair<double, double>> branches;
    if (split) {
        branches = {{info.lo, info.turning}, {info.turning, info.hi}};
    } else {
        branches = {{info.lo, info.hi}};
    }

    lap_table table;
    table.laps.push_back(1 + static_cast<long long>(pts.size()));
    for (int n = 2; n <= n_max; ++n) {
        std::vector<double> next;
        for (double t : targets) {
            for (auto [a, b] : branches) {
                double root;
                if (branch_preimage(spec, c, a, b, t, &root) && insert_unique(pts, root, tol))
                    next.push_back(root);
            }
        }
        std::sort(next.begin(), next.end());
        targets = std::move(next);
        table.laps.push_back(1 + static_cast<long long>(pts.size()));
        if (pts.size() > 20'000'000u) fail(errc::overflow, "lap table grew past the safety cap");
    }

    // Entropy: least-squares slope of log laps over the last half.
    const std::size_t N = table.laps.size();
    const std::size_t first = N / 2; // 0-based start of the fitted tail
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double cnt = static_cast<double>(N - first);
    for (std::size_t i = first; i < N; ++i) {
        const double xn = static_cast<double>(i + 1);
        const double yn = std::log(static_cast<double>(table.laps[i]));
        sx += xn; sy += yn; sxx += xn * xn; sxy += xn * yn;
    }
    const double denom = cnt * sxx - sx * sx;
    double slope = 0.0, intercept = sy / cnt;
    if (denom > 0 && cnt >= 2) {
        slope = (cnt * sxy - sx * sy) / denom;
        intercept = (sy - slope * sx) / cnt;
    }
    table.entropy_estimate = std::max(slope, 0.0);
    double ss = 0;
    for (std::size_t i = first; i < N; ++i) {
        const double xn = static_cast<double>(i + 1);
        const double yn = std::log(static_cast<double>(table.laps[i]));
        const double r = yn - (slope * xn + intercept);
        ss += r * r;
    }
    table.fit_error = std::sqrt(ss / cnt);
    return table;
}

monotonicity_report monotonicity_scan(const family_spec& spec, double c_lo, double c_hi,
                                      int grid_points, int n) {
    monotonicity_report rep;
    if (grid_points <= 1) return rep;
    if (!(c_lo < c_hi)) fail(errc::domain_error, "monotonicity_scan requires c_lo < c_hi");
    std::vector<kneading_sequence> seqs(static_cast<std::size_t>(grid_points));
    std::vector<char> ok(static_cast<std::size_t>(grid_points), 0);
    for (int i = 0; i < grid_points; ++i) {
        const double c = c_lo + (c_hi - c_lo) * i / (grid_points - 1);
        try {
            seqs[i] = kneading(spec, c, n);
            ok[i] = 1;
        } catch (const error& e) {
            if (e.code() != errc::escape) throw;
            rep.escaped.push_back(c);
        }
    }
    for (int i = 0; i + 1 < grid_points; ++i) {
        if (!ok[i] || !ok[i + 1]) continue;
        const double ca = c_lo + (c_hi - c_lo) * i / (grid_points - 1);
        const double cb = c_lo + (c_hi - c_lo) * (i + 1) / (grid_points - 1);
        try {
            if (compare(seqs[i + 1], seqs[i]) == order::less)
                rep.violations.push_back({static_cast<std::size_t>(i), ca, cb});
        } catch (const error& e) {
            if (e.code() != errc::incomparable) throw;
            rep.incomparable.emplace_back(ca, cb);
        }
    }
    return rep;
}

std::string kneading_convention(const family_spec& spec) {
    switch (spec.kind) {
        case family_kind::monic_additive:
        case family_kind::power_additive:
        case family_kind::flat_additive:
            return "min_type: i_k = sign(f^k(x0)) for the minimum point x0 = 0";
        case family_kind::multiplicative:
            return "mirrored_max_type: i_k = sign(x0 - f^k(x0)) for the maximum point x0";
        case family_kind::cubic:
            return "bimodal: lap counting only, no kneading symbols";
    }
    return "";
}

} // namespace trv
