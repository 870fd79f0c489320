#include "trv/orbit.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace trv {

namespace {

double evalr(const family_spec& spec, const std::vector<double>& w, double x) {
    if (spec.nu() == 1) return eval_real(spec, w[0], x);
    std::vector<cplx> wc(w.begin(), w.end());
    return eval(spec, wc, cplx(x, 0.0)).real();
}

double derivr(const family_spec& spec, const std::vector<double>& w, double x) {
    if (spec.nu() == 1) return deriv_real(spec, w[0], x);
    std::vector<cplx> wc(w.begin(), w.end());
    return deriv_z(spec, wc, cplx(x, 0.0)).real();
}

struct closure {
    bool found = false;
    bool to_critical = false;
    int mu = 0; // critical target
    int l = 0;  // preperiodic target iterate
};

// Classifies the endpoint x against the critical points and the earlier
// iterates of its own orbit.
closure classify_endpoint(const std::vector<double>& crit, const std::vector<double>& orbit_pts,
                          double x, double tol) {
    closure c;
    int crit_hits = 0;
    for (int m = 0; m < static_cast<int>(crit.size()); ++m) {
        if (std::abs(x - crit[m]) < tol) {
            if (crit_hits++ == 0) {
                c.found = true;
                c.to_critical = true;
                c.mu = m;
            } else if (std::abs(crit[c.mu] - crit[m]) > tol) {
                fail(errc::ambiguous_relation, "endpoint matches two distinct critical points");
            }
        }
    }
    for (int l = 1; l + 1 < static_cast<int>(orbit_pts.size()); ++l) {
        if (std::abs(x - orbit_pts[l]) < tol) {
            if (c.found) {
                const double target = c.to_critical ? crit[c.mu] : orbit_pts[c.l];
                if (std::abs(target - orbit_pts[l]) > tol)
                    fail(errc::ambiguous_relation,
                         "endpoint matches both a critical point and an earlier iterate");
            } else {
                c.found = true;
                c.to_critical = false;
                c.l = l;
            }
        }
    }
    return c;
}

} // namespace

double turning_point(const family_spec& spec) {
    switch (spec.kind) {
        case family_kind::monic_additive:
        case family_kind::power_additive:
        case family_kind::flat_additive:
            return 0.0;
        case family_kind::multiplicative:
            return spec.base == mult_base::sin ? std::acos(-1.0) / 2.0 : 0.5;
        case family_kind::cubic:
            fail(errc::domain_error, "turning_point is defined for the unimodal kinds only");
    }
    fail(errc::domain_error, "unknown family kind");
}

marked_orbit critical_orbit(const family_spec& spec, const std::vector<double>& w,
                            int max_iter, double orbit_tol) {
    if (static_cast<int>(w.size()) != spec.nu())
        fail(errc::domain_error, "parameter vector has wrong dimension");
    if (max_iter < 1) fail(errc::domain_error, "max_iter must be positive");

    marked_orbit orb;
    orb.spec = spec;
    orb.w = w;

    std::vector<cplx> wc(w.begin(), w.end());
    std::vector<cplx> critc = critical_points(spec, wc);
    std::vector<double> crit;
    for (cplx p : critc) crit.push_back(p.real());

    double scale = 1.0;
    for (double v : w) scale = std::max(scale, std::abs(v));
    for (double p : crit) scale = std::max(scale, std::abs(p));
    auto tol = [&]() { return orbit_tol > 0 ? orbit_tol : 1e-10 * scale; };

    const int nu = spec.nu();
    for (int j = 0; j < nu; ++j) {
        std::vector<double> pts = {crit[j]};
        bool closed = false;
        for (int i = 1; i <= max_iter; ++i) {
            const double x = evalr(spec, w, pts.back());
            if (!std::isfinite(x)) fail(errc::not_finite, "critical orbit diverged");
            pts.push_back(x);
            scale = std::max(scale, std::abs(x));
            if (classify_endpoint(crit, pts, x, tol()).found) {
                closed = true;
                break;
            }
        }
        if (!closed) fail(errc::not_finite, "critical orbit did not close up within max_iter");
        orb.pts.push_back(std::move(pts));
    }

    orb.scale = scale;
    orb.orbit_tol = tol();
    orb.dedup_tol = 10.0 * orb.orbit_tol;

    // Spatial and parameter derivatives along the orbits.
    for (int j = 0; j < nu; ++j) {
        const auto& pts = orb.pts[j];
        std::vector<double> Dj(pts.size(), 0.0);
        std::vector<std::vector<double>> Lj(pts.size());
        for (std::size_t i = 0; i < pts.size(); ++i) {
            Dj[i] = derivr(spec, w, pts[i]);
            std::vector<double> Lk(nu);
            for (int k = 0; k < nu; ++k) Lk[k] = deriv_w(spec, wc, cplx(pts[i], 0.0), k).real();
            Lj[i] = std::move(Lk);
            if (i >= 1) {
                bool is_critical = false;
                for (double p : crit)
                    if (std::abs(pts[i] - p) < orb.orbit_tol) is_critical = true;
                if (!is_critical && std::abs(Dj[i]) < 1e-9)
                    fail(errc::degenerate_derivative,
                         "derivative below floor on the marked orbit");
            }
        }
        orb.D.push_back(std::move(Dj));
        orb.L.push_back(std::move(Lj));
    }

    // Deduplicated g(P) = {c_{i,j} : i >= 1} and the label -> set map.
    std::vector<std::pair<double, std::pair<int, int>>> tagged; // (value, (j, i))
    for (int j = 0; j < nu; ++j)
        for (std::size_t i = 1; i < orb.pts[j].size(); ++i)
            tagged.push_back({orb.pts[j][i], {j, static_cast<int>(i)}});
    std::sort(tagged.begin(), tagged.end());
    orb.set_index.assign(nu, {});
    for (int j = 0; j < nu; ++j) orb.set_index[j].assign(orb.pts[j].size(), -1);
    for (const auto& [value, label] : tagged) {
        if (orb.gP.empty() || value - orb.gP.back() >= orb.dedup_tol) orb.gP.push_back(value);
        orb.set_index[label.first][label.second] = static_cast<int>(orb.gP.size()) - 1;
    }
    // Critical points that lie in g(P) get their set index too.
    for (int j = 0; j < nu; ++j) {
        auto it = std::lower_bound(orb.gP.begin(), orb.gP.end(), crit[j]);
        for (auto cand : {it, it == orb.gP.begin() ? it : std::prev(it)}) {
            if (cand != orb.gP.end() && std::abs(*cand - crit[j]) < orb.dedup_tol) {
                orb.set_index[j][0] = static_cast<int>(cand - orb.gP.begin());
                break;
            }
        }
    }
    return orb;
}

std::vector<critical_relation> detect_relations(const marked_orbit& orbit, double orbit_tol) {
    const double tol = orbit_tol > 0 ? orbit_tol : orbit.orbit_tol;
    std::vector<cplx> wc(orbit.w.begin(), orbit.w.end());
    std::vector<double> crit;
    for (cplx p : critical_points(orbit.spec, wc)) crit.push_back(p.real());

    std::vector<critical_relation> rels;
    for (int j = 0; j < static_cast<int>(orbit.pts.size()); ++j) {
        const auto& pts = orbit.pts[j];
        const closure c = classify_endpoint(crit, pts, pts.back(), tol);
        if (!c.found) fail(errc::not_finite, "orbit endpoint does not close up");
        critical_relation rel;
        rel.j = j;
        rel.q = static_cast<int>(pts.size()) - 1;
        if (c.to_critical) {
            rel.periodic_to_critical = true;
            rel.mu = c.mu;
        } else {
            rel.periodic_to_critical = false;
            rel.l = c.l;
            double mult = 1.0;
            for (int i = rel.l; i < rel.q; ++i) mult *= orbit.D[j][i];
            rel.near_parabolic = std::abs(mult - 1.0) < 1e-6;
        }
        rels.push_back(rel);
    }
    std::stable_partition(rels.begin(), rels.end(),
                          [](const critical_relation& r) { return r.periodic_to_critical; });
    return rels;
}

std::pair<double, double> superstable_objective(const family_spec& spec, double c, int q) {
    const double x0 = turning_point(spec);
    std::vector<cplx> wc = {cplx(c, 0.0)};
    double x = x0, s = 0.0;
    for (int k = 0; k < q; ++k) {
        const double dgdc = deriv_w(spec, wc, cplx(x, 0.0), 0).real();
        s = deriv_real(spec, c, x) * s + dgdc;
        x = eval_real(spec, c, x);
    }
    return {x - x0, s};
}

double solve_superstable(const family_spec& spec, int q, double c_lo, double c_hi) {
    if (q < 1) fail(errc::domain_error, "period must be positive");
    if (!(c_lo < c_hi)) fail(errc::domain_error, "bracket must satisfy c_lo < c_hi");
    const double x0 = turning_point(spec);

    auto F = [&](double c) { return superstable_objective(spec, c, q).first; };
    double fa = F(c_lo), fb = F(c_hi);
    if (fa == 0.0 && fb == 0.0) fail(errc::no_sign_change, "both bracket endpoints are roots");
    if ((fa > 0) == (fb > 0) && fa != 0.0 && fb != 0.0)
        fail(errc::no_sign_change, "objective has equal signs at the bracket endpoints");

    double lo = c_lo, hi = c_hi;
    for (int i = 0; i < 200 && hi - lo > 1e-16 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++i) {
        const double mid = 0.5 * (lo + hi);
        const double fm = F(mid);
        if (fm == 0.0) { lo = hi = mid; break; }
        if ((fm > 0) == (fa > 0)) {
            lo = mid;
            fa = fm;
        } else {
            hi = mid;
        }
    }
    double c = 0.5 * (lo + hi);

    // Newton polish, clamped to the original bracket.
    for (int it = 0; it < 40; ++it) {
        auto [val, slope] = superstable_objective(spec, c, q);
        if (slope == 0.0) break;
        double next = c - val / slope;
        next = std::min(std::max(next, c_lo), c_hi);
        if (next == c) break;
        c = next;
    }

    // Scale from the solved orbit.
    double scale = std::max(1.0, std::abs(c));
    {
        double x = x0;
        for (int k = 0; k < q; ++k) {
            x = eval_real(spec, c, x);
            scale = std::max(scale, std::abs(x));
        }
    }
    if (std::abs(F(c)) >= 1e-12 * scale)
        fail(errc::non_convergence, "superstable polish did not reach tolerance");

    for (int d = 1; d < q; ++d) {
        if (q % d != 0) continue;
        if (std::abs(superstable_objective(spec, c, d).first) < 1e-8 * scale)
            fail(errc::lower_period_collision, "root has minimal period " + std::to_string(d));
    }
    return c;
}

enumerate_result enumerate_superstable(const family_spec& spec, double c_lo, double c_hi,
                                       int q_max) {
    if (q_max < 1 || q_max > 16) fail(errc::domain_error, "enumerate requires 1 <= q_max <= 16");
    enumerate_result out;
    if (!(c_lo < c_hi)) return out;

    for (int q = 1; q <= q_max; ++q) {
        const int n = 1 << std::min(q + 7, 19);
        double prev_c = c_lo, prev_f = superstable_objective(spec, c_lo, q).first;
        for (int i = 1; i <= n; ++i) {
            const double c = c_lo + (c_hi - c_lo) * i / n;
            const double f = superstable_objective(spec, c, q).first;
            const bool crossing = (prev_f == 0.0) || (f != 0.0 && (prev_f > 0) != (f > 0));
            if (crossing) {
                try {
                    double root;
                    if (prev_f == 0.0) {
                        root = prev_c;
                        for (int d = 1; d < q; ++d)
                            if (q % d == 0 &&
                                std::abs(superstable_objective(spec, root, d).first) < 1e-8)
                                fail(errc::lower_period_collision, "node root has lower period");
                    } else {
                        root = solve_superstable(spec, q, prev_c, c);
                    }
                    out.hits.push_back({q, root, std::abs(superstable_objective(spec, root, q).first)});
                } catch (const error& e) {
                    if (e.code() != errc::lower_period_collision)
                        out.warnings.push_back("q=" + std::to_string(q) + " bracket [" +
                                               std::to_string(prev_c) + "," + std::to_string(c) +
                                               "]: " + e.what());
                }
            }
            prev_c = c;
            prev_f = f;
        }
    }
    std::sort(out.hits.begin(), out.hits.end(), [](const superstable_hit& a, const superstable_hit& b) {
        return a.c < b.c || (a.c == b.c && a.q < b.q);
    });
    return out;
}

} // namespace trv
