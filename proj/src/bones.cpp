#include "trv/bones.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "trv/errors.hpp"
#include "trv/io.hpp"

namespace trv {

namespace {

constexpr double k_curve_tol = 1e-8;  // |R| <= curve_tol * (1 + |b|) on stored points
constexpr double k_rank_tol = 1e-10;  // gradient floor of the rank condition

double f_ab(double a, double b, double x) { return x * x * x - 3 * a * a * x + b; }
double df_ab(double a, double x) { return 3 * (x * x - a * a); }

struct defect_jet {
    double r;  // f^q(a) - a
    double da; // d/da
    double db; // d/db
};

// Forward accumulation of the defect and its exact parameter derivatives:
// x_{k+1} = f(x_k) with dx_{k+1} = Df(x_k) dx_k + (df/da, df/db).
defect_jet defect(int q, double a, double b) {
    double x = a, xa = 1.0, xb = 0.0;
    for (int k = 0; k < q; ++k) {
        const double d = df_ab(a, x);
        xa = d * xa - 6.0 * a * x;
        xb = d * xb + 1.0;
        x = f_ab(a, b, x);
    }
    return {x - a, xa - 1.0, xb};
}

double dot(vec2 u, vec2 v) { return u[0] * v[0] + u[1] * v[1]; }
double norm(vec2 v) { return std::hypot(v[0], v[1]); }
vec2 rot90(vec2 v) { return {-v[1], v[0]}; }

// Gradient chart change (a,b) -> (w1,w2) for a scalar function, using
// w1 = -2a^3 + b, w2 = 2a^3 + b:  F_a = 6a^2 (F_w2 - F_w1), F_b = F_w1 + F_w2.
vec2 grad_to_w(double a, double ga, double gb) {
    const double s = 12.0 * a * a;
    return {(6.0 * a * a * gb - ga) / s, (ga + 6.0 * a * a * gb) / s};
}

bool on_curve(int q, double a, double b) {
    return std::abs(defect(q, a, b).r) <= k_curve_tol * (1.0 + std::abs(b));
}

// Scalar Newton toward {R = 0} along the gradient direction; the cheapest
// orthogonal projection for a codimension-one zero set.
bool project(int q, double& a, double& b, int iters) {
    for (int it = 0; it < iters; ++it) {
        const defect_jet g = defect(q, a, b);
        if (!std::isfinite(g.r) || !std::isfinite(g.da) || !std::isfinite(g.db))
            return false;
        if (std::abs(g.r) <= 0.1 * k_curve_tol * (1.0 + std::abs(b))) return true;
        const double n2 = g.da * g.da + g.db * g.db;
        if (n2 < 1e-300) return false;
        a -= g.r * g.da / n2;
        b -= g.r * g.db / n2;
    }
    return on_curve(q, a, b);
}

// Corrector of the predictor step: Newton for R = 0 restricted to the
// line through (a,b) orthogonal to the marching tangent.
bool correct(int q, double& a, double& b, vec2 tangent, int iters) {
    const vec2 n = rot90(tangent);
    for (int it = 0; it < iters; ++it) {
        const defect_jet g = defect(q, a, b);
        if (!std::isfinite(g.r) || !std::isfinite(g.da) || !std::isfinite(g.db))
            return false;
        if (std::abs(g.r) <= 0.1 * k_curve_tol * (1.0 + std::abs(b))) return true;
        const double slope = g.da * n[0] + g.db * n[1];
        if (std::abs(slope) < 1e-300) return false;
        const double s = -g.r / slope;
        a += s * n[0];
        b += s * n[1];
    }
    return on_curve(q, a, b);
}

// Unit marching tangent: the +90-degree rotation of the unit gradient.
bool unit_tangent(int q, double a, double b, vec2& t) {
    const defect_jet g = defect(q, a, b);
    const double n = std::hypot(g.da, g.db);
    if (!(n > k_rank_tol) || !std::isfinite(n)) return false;
    t = rot90({g.da / n, g.db / n});
    return true;
}

// Sorted-order permutation of the periodic orbit a, f(a), ..., f^{q-1}(a).
std::vector<int> orbit_ordering(int q, double a, double b) {
    std::vector<double> x(static_cast<std::size_t>(q));
    double y = a;
    for (int k = 0; k < q; ++k) {
        x[static_cast<std::size_t>(k)] = y;
        y = f_ab(a, b, y);
    }
    std::vector<int> perm(static_cast<std::size_t>(q));
    for (int k = 0; k < q; ++k) perm[static_cast<std::size_t>(k)] = k;
    std::sort(perm.begin(), perm.end(),
              [&](int l, int r) { return x[static_cast<std::size_t>(l)] <
                                         x[static_cast<std::size_t>(r)]; });
    return perm;
}

void require_cubic(const family_spec& spec, const char* who) {
    if (spec.kind != family_kind::cubic)
        fail(errc::domain_error,
             std::string(who) + ": bones are defined for the cubic family only");
}

// s_i(a,b) = f^i(a) + a, the monitor whose zeros are the crossings of the
// second critical point by the orbit.
double s_monitor(int q, int i, double a, double b) {
    (void)q;
    double x = a;
    for (int k = 0; k < i; ++k) x = f_ab(a, b, x);
    return x + a;
}

// ---------------------------------------------------------------------
// Lap counting on the invariant hull of the critical orbits
// ---------------------------------------------------------------------

struct hull_interval {
    double lo = 0, hi = 0;
    bool escaped = false;
};

hull_interval critical_hull(double a, double b) {
    const double ca = std::abs(a);
    const double bound = 2.0 * (1.0 + std::sqrt(3.0 * a * a + 1.0)) + std::abs(b);
    hull_interval h{-ca, ca, false};
    for (const double x0 : {ca, -ca}) {
        double x = x0;
        for (int k = 0; k < 512; ++k) {
            x = f_ab(a, b, x);
            if (!(std::abs(x) <= bound)) return {0, 0, true};
            h.lo = std::min(h.lo, x);
            h.hi = std::max(h.hi, x);
        }
    }
    return h;
}

// Monotone pieces of f^k on [j0, j1]: split at the critical points that
// lie strictly inside (snapped away from the endpoints so that rounding
// drift of a superstable orbit cannot spawn hairline pieces) and recurse
// on the piece images.  Returns -1 when the work budget runs out.
long long laps_rec(double a, double b, double j0, double j1, int k, double snap,
                   long long& budget) {
    if (k == 0) return 1;
    if (--budget < 0) return -1;
    const double ca = std::abs(a);
    double cuts[2];
    int nc = 0;
    if (-ca > j0 + snap && -ca < j1 - snap) cuts[nc++] = -ca;
    if (ca > j0 + snap && ca < j1 - snap) cuts[nc++] = ca;
    long long total = 0;
    double p0 = j0;
    for (int m = 0; m <= nc; ++m) {
        const double p1 = (m < nc) ? cuts[m] : j1;
        const double y0 = f_ab(a, b, p0), y1 = f_ab(a, b, p1);
        const long long sub =
            laps_rec(a, b, std::min(y0, y1), std::max(y0, y1), k - 1, snap, budget);
        if (sub < 0) return -1;
        total += sub;
        p0 = p1;
    }
    return total;
}

// Least-squares slope of log laps over the upper half of the table.
double lap_slope(const std::vector<long long>& table) {
    const int got = static_cast<int>(table.size());
    if (got < 2) return std::numeric_limits<double>::quiet_NaN();
    const int k_lo = std::max(2, (got + 1) / 2);
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int k = k_lo; k <= got; ++k, ++m) {
        const double y = std::log(static_cast<double>(table[static_cast<std::size_t>(k - 1)]));
        sx += k;
        sy += y;
        sxx += static_cast<double>(k) * k;
        sxy += k * y;
    }
    return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

double point_entropy(double a, double b, int n, bool& escaped) {
    const hull_interval h = critical_hull(a, b);
    escaped = h.escaped;
    if (h.escaped) return std::numeric_limits<double>::quiet_NaN();
    const double snap = 1e-9 * (1.0 + std::max(std::abs(h.lo), std::abs(h.hi)));
    std::vector<long long> table;
    long long budget = 4000000;
    for (int k = 1; k <= n; ++k) {
        const long long laps = laps_rec(a, b, h.lo, h.hi, k, snap, budget);
        if (laps < 0) break;
        table.push_back(laps);
    }
    return lap_slope(table);
}

// Monotone-within-tolerance classification of a slice [lo, hi] of the
// entropy sequence, skipping NaN entries.
struct slice_direction {
    bool nondecreasing = true;
    bool nonincreasing = true;
};

slice_direction classify(const std::vector<double>& e, std::size_t lo,
                         std::size_t hi, double tol) {
    slice_direction d;
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = lo; k <= hi && k < e.size(); ++k) {
        if (std::isnan(e[k])) continue;
        if (!std::isnan(prev)) {
            if (e[k] < prev - tol) d.nondecreasing = false;
            if (e[k] > prev + tol) d.nonincreasing = false;
        }
        prev = e[k];
    }
    return d;
}

} // namespace

double bone_residual(int q, double a, double b) {
    if (q < 1) fail(errc::domain_error, "bone_residual: q must be positive");
    return defect(q, a, b).r;
}

void bone_gradient(int q, double a, double b, double& da, double& db) {
    if (q < 1) fail(errc::domain_error, "bone_gradient: q must be positive");
    const defect_jet g = defect(q, a, b);
    da = g.da;
    db = g.db;
}

bone_curve trace_bone(int q, vec2 seed, double step, int n_steps) {
    if (q < 1) fail(errc::domain_error, "trace_bone: q must be positive");
    if (!(std::abs(step) > 0) || !std::isfinite(step))
        fail(errc::domain_error, "trace_bone: step must be nonzero and finite");
    if (n_steps < 0) fail(errc::domain_error, "trace_bone: n_steps must be >= 0");

    double a = seed[0], b = seed[1];
    if (a == 0)
        fail(errc::seed_not_on_curve,
             "trace_bone: a = 0 lies outside the admissible parameter plane");
    if (!project(q, a, b, 60) || a * seed[0] <= 0)
        fail(errc::seed_not_on_curve,
             "trace_bone: seed (" + float17(seed[0]) + ", " + float17(seed[1]) +
                 ") did not converge onto the curve");

    bone_curve out;
    out.q = q;
    vec2 tang;
    if (!unit_tangent(q, a, b, tang))
        fail(errc::seed_not_on_curve,
             "trace_bone: the defect gradient vanishes at the seed (singular point)");
    if (step < 0) {
        tang[0] = -tang[0];
        tang[1] = -tang[1];
    }
    const double a_sign = a > 0 ? 1.0 : -1.0;
    const double h = std::abs(step);

    std::vector<int> ordering = orbit_ordering(q, a, b);
    auto push_point = [&](double pa, double pb, vec2 pt) {
        const int index = static_cast<int>(out.points.size());
        out.points.push_back({pa, pb});
        out.tangents.push_back(pt);
        const vec2 gw = grad_to_w(pa, defect(q, pa, pb).da, defect(q, pa, pb).db);
        if (norm(gw) < 1e-7 * (1.0 + std::abs(pb)))
            out.events.push_back({index, false, 0, pa, pb});
        const std::vector<int> perm = orbit_ordering(q, pa, pb);
        if (index > 0 && perm != ordering) out.ordering_flips.push_back(index);
        ordering = perm;
    };
    push_point(a, b, tang);

    for (int s = 0; s < n_steps; ++s) {
        double hs = h;
        bool stepped = false;
        double an = a, bn = b;
        for (int halve = 0; halve <= 12 && !stepped; ++halve, hs *= 0.5) {
            an = a + hs * tang[0];
            bn = b + hs * tang[1];
            if (!correct(q, an, bn, tang, 12)) continue;
            // Reject correctors that left the local segment (branch jumps).
            if (std::hypot(an - a, bn - b) > 5.0 * hs) continue;
            stepped = true;
        }
        if (!stepped) {
            if (out.points.size() <= 1)
                fail(errc::step_failure,
                     "trace_bone: first continuation step failed; last good point (" +
                         float17(a) + ", " + float17(b) + ")");
            break; // graceful stop on corrector failure
        }
        if (an * a_sign <= 1e-6) break; // reached the a = 0 boundary
        vec2 tn;
        if (!unit_tangent(q, an, bn, tn)) break; // singular point ahead
        if (dot(tn, tang) < 0) {
            tn[0] = -tn[0];
            tn[1] = -tn[1];
        }
        a = an;
        b = bn;
        tang = tn;
        push_point(a, b, tang);
    }
    return out;
}

tangent_frame tangent_orientation(const family_spec& spec, int q, vec2 ab) {
    require_cubic(spec, "tangent_orientation");
    if (q < 1) fail(errc::domain_error, "tangent_orientation: q must be positive");
    const double a = ab[0], b = ab[1];
    if (a == 0)
        fail(errc::degenerate_chart,
             "tangent_orientation: the critical-value chart is singular at a = 0");

    const defect_jet g = defect(q, a, b);
    const vec2 gw = grad_to_w(a, g.da, g.db);
    if (!(norm(gw) > k_rank_tol))
        fail(errc::rank_deficient,
             "tangent_orientation: |grad R| = " + float17(norm(gw)) +
                 " below rank_tol (singular curve point)");

    double denom = 1.0, x = f_ab(a, b, a);
    for (int k = 1; k < q; ++k) {
        denom *= df_ab(a, x);
        x = f_ab(a, b, x);
    }
    if (std::abs(denom) < 1e-300)
        fail(errc::rank_deficient,
             "tangent_orientation: DG^{q-1}(w1) vanishes (the orbit passes "
             "through a critical point)");

    const vec2 col{gw[0] / denom, gw[1] / denom};
    vec2 e = rot90(col);
    const double n = norm(e);
    e[0] /= n;
    e[1] /= n;
    return {e, gw, denom};
}

std::vector<bone_event> detect_crossings(const family_spec& spec,
                                         const bone_curve& curve) {
    require_cubic(spec, "detect_crossings");
    std::vector<bone_event> events;
    const int q = curve.q;
    if (curve.points.size() < 2) return events;

    for (std::size_t k = 0; k + 1 < curve.points.size(); ++k) {
        const vec2 p0 = curve.points[k], p1 = curve.points[k + 1];
        const double seg = std::hypot(p1[0] - p0[0], p1[1] - p0[1]);
        for (int i = 1; i <= q; ++i) {
            const double s0 = s_monitor(q, i, p0[0], p0[1]);
            const double s1 = s_monitor(q, i, p1[0], p1[1]);
            const bool hit = (s0 == 0.0) || (s0 * s1 < 0.0);
            if (!hit) continue;
            // Bisection along the chord, re-projected onto the curve.
            double t_lo = 0.0, t_hi = (s0 == 0.0) ? 0.0 : 1.0;
            auto at = [&](double t, double& a, double& b) {
                a = p0[0] + t * (p1[0] - p0[0]);
                b = p0[1] + t * (p1[1] - p0[1]);
                project(q, a, b, 12);
            };
            double a_lo, b_lo;
            at(t_lo, a_lo, b_lo);
            double sv = s_monitor(q, i, a_lo, b_lo);
            for (int it = 0; it < 60 && (t_hi - t_lo) * seg > 1e-10; ++it) {
                const double tm = 0.5 * (t_lo + t_hi);
                double am, bm;
                at(tm, am, bm);
                const double sm = s_monitor(q, i, am, bm);
                if (sv * sm <= 0.0)
                    t_hi = tm;
                else {
                    t_lo = tm;
                    sv = sm;
                }
            }
            double ar, br;
            at(0.5 * (t_lo + t_hi), ar, br);
            // Merge duplicates produced by a node sitting at a stored point.
            bool duplicate = false;
            for (const bone_event& ev : events)
                if (ev.crossing && ev.i == i &&
                    std::hypot(ev.a - ar, ev.b - br) < 1e-7 * (1.0 + std::abs(br)))
                    duplicate = true;
            if (!duplicate)
                events.push_back({static_cast<int>(k), true, i, ar, br});
        }
    }
    return events;
}

double directional_transversality(const family_spec& spec, const bone_curve& curve,
                                  const bone_event& event) {
    require_cubic(spec, "directional_transversality");
    if (!event.crossing)
        fail(errc::degenerate_input,
             "directional_transversality: event is not a crossing");
    const int q = curve.q, i = event.i;
    if (i < 1 || i >= q)
        fail(errc::degenerate_input,
             "directional_transversality: crossing iterate must satisfy 1 <= i < q");
    const double a = event.a, b = event.b;

    // Orbit through the crossing and the two partial derivative products:
    // D_A = Dg^{i-1}(w1) for the standing relation f^i(a) = -a, and
    // D_B = Dg^{q2-1}(c_{1,2}) = Df^{q-i-1}(f(-a)) for the second relation.
    std::vector<double> x(static_cast<std::size_t>(q) + 1);
    x[0] = a;
    for (int k = 0; k < q; ++k)
        x[static_cast<std::size_t>(k) + 1] = f_ab(a, b, x[static_cast<std::size_t>(k)]);
    double d_a = 1.0, d_b = 1.0;
    for (int k = 1; k < i; ++k) d_a *= df_ab(a, x[static_cast<std::size_t>(k)]);
    for (int k = i + 1; k < q; ++k) d_b *= df_ab(a, x[static_cast<std::size_t>(k)]);
    const double floor = 1e-9 * (1.0 + std::abs(a));
    if (std::abs(d_b) < floor || std::abs(d_a) < floor)
        fail(errc::degenerate_derivative,
             "directional_transversality: near-parabolic derivative product |Dg| = " +
                 float17(std::min(std::abs(d_a), std::abs(d_b))));

    // Oriented tangent of the standing relation R_A = f^i(a) + a in
    // critical-value coordinates (det[column, E] > 0 convention).
    double xa = 1.0, xb = 0.0, y = a;
    for (int k = 0; k < i; ++k) {
        const double d = df_ab(a, y);
        xa = d * xa - 6.0 * a * y;
        xb = d * xb + 1.0;
        y = f_ab(a, b, y);
    }
    const vec2 gw = grad_to_w(a, xa + 1.0, xb);
    const vec2 col{gw[0] / d_a, gw[1] / d_a};
    const double cn = norm(col);
    if (!(cn > k_rank_tol))
        fail(errc::rank_deficient,
             "directional_transversality: the standing relation is rank deficient");
    const vec2 e{-col[1] / cn, col[0] / cn};

    // Finite differences of R2(w) = f^{q-i}(-a(w)) - a(w) along E.
    const auto w = cubic_to_critical_values(a, b);
    const double h = 1e-6 * (1.0 + std::max(std::abs(w.first), std::abs(w.second)));
    auto r2 = [&](double w1, double w2) {
        const cubic_chart_result cc = cubic_from_critical_values(w1, w2);
        if (cc.swapped)
            fail(errc::degenerate_chart,
                 "directional_transversality: chart swapped while differencing");
        double z = -cc.a;
        for (int k = 0; k < q - i; ++k) z = f_ab(cc.a, cc.b, z);
        return z - cc.a;
    };
    const double plus = r2(w.first + h * e[0], w.second + h * e[1]);
    const double minus = r2(w.first - h * e[0], w.second - h * e[1]);
    return (plus - minus) / (2.0 * h) / d_b;
}

entropy_report entropy_along(const family_spec& spec, const bone_curve& curve,
                             int n) {
    require_cubic(spec, "entropy_along");
    if (n < 4) fail(errc::domain_error, "entropy_along: n must be at least 4");
    entropy_report rep;
    rep.entropy.reserve(curve.points.size());
    for (std::size_t k = 0; k < curve.points.size(); ++k) {
        bool escaped = false;
        rep.entropy.push_back(
            point_entropy(curve.points[k][0], curve.points[k][1], n, escaped));
        if (escaped) rep.escaped.push_back(static_cast<int>(k));
    }
    if (rep.entropy.empty()) return rep;

    // Split at the crossing events and classify each half.
    std::vector<std::size_t> splits;
    for (const bone_event& ev : curve.events)
        if (ev.crossing && ev.index >= 0 &&
            static_cast<std::size_t>(ev.index) + 1 < rep.entropy.size())
            splits.push_back(static_cast<std::size_t>(ev.index));
    std::sort(splits.begin(), splits.end());
    splits.erase(std::unique(splits.begin(), splits.end()), splits.end());

    std::vector<slice_direction> halves;
    std::size_t lo = 0;
    for (const std::size_t s : splits) {
        halves.push_back(classify(rep.entropy, lo, s, rep.tolerance));
        lo = s + 1;
    }
    halves.push_back(classify(rep.entropy, lo, rep.entropy.size() - 1, rep.tolerance));

    rep.monotone_ok = true;
    for (const slice_direction& d : halves)
        rep.monotone_ok = rep.monotone_ok && (d.nondecreasing || d.nonincreasing);
    rep.opposite_ok = rep.monotone_ok;
    for (std::size_t k = 0; k + 1 < halves.size(); ++k) {
        const bool ok = (halves[k].nondecreasing && halves[k + 1].nonincreasing) ||
                        (halves[k].nonincreasing && halves[k + 1].nondecreasing);
        rep.opposite_ok = rep.opposite_ok && ok;
    }
    return rep;
}

std::vector<double> bone_seeds(int q, double a, double b_lo, double b_hi, int grid) {
    if (q < 1) fail(errc::domain_error, "bone_seeds: q must be positive");
    if (a == 0) fail(errc::domain_error, "bone_seeds: a must be nonzero");
    if (!(b_lo < b_hi) || grid < 2)
        fail(errc::domain_error, "bone_seeds: need b_lo < b_hi and grid >= 2");

    std::vector<double> out;
    double prev = defect(q, a, b_lo).r;
    double b_prev = b_lo;
    for (int k = 1; k <= grid; ++k) {
        const double b = b_lo + (b_hi - b_lo) * k / grid;
        const double cur = defect(q, a, b).r;
        if ((prev == 0.0 || prev * cur < 0.0) && prev != cur) {
            double lo = b_prev, hi = b, flo = prev;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double fm = defect(q, a, mid).r;
                if (flo * fm <= 0.0)
                    hi = mid;
                else {
                    lo = mid;
                    flo = fm;
                }
            }
            const double root = 0.5 * (lo + hi);
            bool minimal = true;
            double x = a;
            for (int i = 1; i < q && minimal; ++i) {
                x = f_ab(a, root, x);
                minimal = std::abs(x - a) > 1e-6 * (1.0 + std::abs(a));
            }
            const bool fresh =
                out.empty() || std::abs(root - out.back()) > 1e-9 * (1.0 + std::abs(root));
            if (minimal && fresh) out.push_back(root);
        }
        prev = cur;
        b_prev = b;
    }
    return out;
}

std::string bone_csv(const bone_curve& curve) {
    std::string out = "a,b,E_a,E_b,entropy,event_flag\n";
    std::vector<int> flag(curve.points.size(), 0);
    for (const bone_event& ev : curve.events)
        if (ev.index >= 0 && static_cast<std::size_t>(ev.index) < flag.size())
            flag[static_cast<std::size_t>(ev.index)] = ev.crossing ? 1 : 2;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < curve.points.size(); ++k) {
        const double ent = k < curve.lap_entropy.size() ? curve.lap_entropy[k] : nan;
        out += csv_row({float17(curve.points[k][0]), float17(curve.points[k][1]),
                        float17(curve.tangents[k][0]), float17(curve.tangents[k][1]),
                        float17(ent), std::to_string(flag[k])});
    }
    return out;
}

std::string bone_svg(const std::vector<bone_curve>& curves, int width, int height) {
    if (width < 64 || height < 64)
        fail(errc::domain_error, "bone_svg: canvas must be at least 64 x 64");
    char buf[160];
    std::string out;
    std::snprintf(buf, sizeof buf,
                  "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%d\" "
                  "height=\"%d\" viewBox=\"0 0 %d %d\">\n",
                  width, height, width, height);
    out += buf;
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\" stroke=\"black\"/>\n";

    double a_lo = 0, a_hi = 1, b_lo = 0, b_hi = 1;
    bool any = false;
    for (const bone_curve& c : curves)
        for (const vec2& p : c.points) {
            if (!any) {
                a_lo = a_hi = p[0];
                b_lo = b_hi = p[1];
                any = true;
            }
            a_lo = std::min(a_lo, p[0]);
            a_hi = std::max(a_hi, p[0]);
            b_lo = std::min(b_lo, p[1]);
            b_hi = std::max(b_hi, p[1]);
        }
    const double pad_a = 0.05 * (a_hi - a_lo) + 1e-12;
    const double pad_b = 0.05 * (b_hi - b_lo) + 1e-12;
    a_lo -= pad_a;
    a_hi += pad_a;
    b_lo -= pad_b;
    b_hi += pad_b;
    const double margin = 36;
    auto px = [&](double a) {
        return margin + (a - a_lo) / (a_hi - a_lo) * (width - 2 * margin);
    };
    auto py = [&](double b) {
        return height - margin - (b - b_lo) / (b_hi - b_lo) * (height - 2 * margin);
    };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c",
                                    "#9467bd", "#ff7f0e", "#8c564b"};
    for (std::size_t c = 0; c < curves.size(); ++c) {
        if (curves[c].points.empty()) continue;
        out += "<polyline fill=\"none\" stroke=\"";
        out += palette[c % 6];
        out += "\" stroke-width=\"1.5\" points=\"";
        for (const vec2& p : curves[c].points) {
            std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(p[0]), py(p[1]));
            out += buf;
        }
        out += "\"/>\n";
        for (const bone_event& ev : curves[c].events) {
            if (!ev.crossing) continue;
            std::snprintf(buf, sizeof buf,
                          "<circle cx=\"%.2f\" cy=\"%.2f\" r=\"4\" fill=\"none\" "
                          "stroke=\"#d62728\" stroke-width=\"1.5\"/>\n",
                          px(ev.a), py(ev.b));
            out += buf;
        }
    }
    std::snprintf(buf, sizeof buf,
                  "<text x=\"%.0f\" y=\"%d\" font-size=\"11\">a: %.6g .. %.6g</text>\n",
                  margin, height - 8, a_lo, a_hi);
    out += buf;
    std::snprintf(buf, sizeof buf,
                  "<text x=\"6\" y=\"%.0f\" font-size=\"11\">b: %.6g .. %.6g</text>\n",
                  margin - 12, b_lo, b_hi);
    out += buf;
    out += "</svg>\n";
    return out;
}

} // namespace trv
