#include "trv/family.hpp"

#include <cmath>
#include <limits>

#include "json.hpp"

namespace trv {

namespace {

bool is_integer(double x) { return std::abs(x - std::round(x)) < 1e-12; }

// Exact integer power by binary exponentiation (n >= 0).
cplx ipow(cplx z, long long n) {
    cplx acc(1.0, 0.0);
    while (n > 0) {
        if (n & 1) acc *= z;
        z *= z;
        n >>= 1;
    }
    return acc;
}

// s^e for s in the open right half plane (guaranteed by the callers).
// Integer exponents work for any such s; non-integer exponents are only
// defined on the positive real axis.
cplx half_plane_pow(cplx s, double e) {
    if (is_integer(e)) {
        long long n = std::llround(e);
        return n >= 0 ? ipow(s, n) : cplx(1.0, 0.0) / ipow(s, -n);
    }
    if (s.imag() == 0.0) return cplx(std::pow(s.real(), e), 0.0);
    fail(errc::non_real, "non-integer exponent applied to a non-real point");
}

// Splits z by the half plane of its real part: returns (s, sigma) with
// s = sigma * z in the right half plane.  Purely imaginary nonzero z has
// no continuous extension and is rejected.
std::pair<cplx, double> half_plane_split(cplx z) {
    if (z.real() > 0.0) return {z, +1.0};
    if (z.real() < 0.0) return {-z, -1.0};
    fail(errc::domain_error, "purely imaginary point is outside the half-plane extension domain");
}

double exp_pow2(double ell) { return std::exp(std::pow(2.0, ell)); }

// Multiplicative base maps f with f(crit) = 1.
cplx base_value(const family_spec& spec, cplx z) {
    switch (spec.base) {
        case mult_base::sin: return std::sin(z);
        case mult_base::quad4x1mx: return 4.0 * z * (1.0 - z);
        case mult_base::flat_unimodal: {
            cplx u = z - 0.5;
            if (u == cplx(0.0, 0.0)) return cplx(1.0, 0.0);
            auto [s, sigma] = half_plane_split(u);
            (void)sigma;
            cplx E = std::exp(-1.0 / half_plane_pow(s, spec.ell));
            return 1.0 - exp_pow2(spec.ell) * E;
        }
    }
    fail(errc::domain_error, "unknown multiplicative base");
}

cplx base_deriv(const family_spec& spec, cplx z) {
    switch (spec.base) {
        case mult_base::sin: return std::cos(z);
        case mult_base::quad4x1mx: return 4.0 - 8.0 * z;
        case mult_base::flat_unimodal: {
            cplx u = z - 0.5;
            if (u == cplx(0.0, 0.0)) return cplx(0.0, 0.0);
            auto [s, sigma] = half_plane_split(u);
            cplx E = std::exp(-1.0 / half_plane_pow(s, spec.ell));
            return -exp_pow2(spec.ell) * E * spec.ell * sigma / half_plane_pow(s, spec.ell + 1.0);
        }
    }
    fail(errc::domain_error, "unknown multiplicative base");
}

// Signed principal cube root, analytic on each half plane of Re s and
// matching the real cube root on the real axis.
cplx cbrt_branch(cplx s) {
    if (s.imag() == 0.0) return cplx(std::cbrt(s.real()), 0.0);
    if (s.real() >= 0.0) return std::exp(std::log(s) / 3.0);
    return -std::exp(std::log(-s) / 3.0);
}

// Cubic helper: signed half-difference coordinate a0 with p1 = a0,
// p2 = -a0 and G(z) = z^3 - 3 a0^2 z + (w1+w2)/2.
cplx cubic_a0(const std::vector<cplx>& w) {
    return cbrt_branch((w[1] - w[0]) / 4.0);
}

void require_nu(const family_spec& spec, const std::vector<cplx>& w) {
    if (static_cast<int>(w.size()) != spec.nu())
        fail(errc::domain_error, "parameter vector has wrong dimension");
}

} // namespace

// ---------------------------------------------------------------------
// JSON
// ---------------------------------------------------------------------

void family_spec::validate() const {
    auto finite = [](double x) { return std::isfinite(x); };
    switch (kind) {
        case family_kind::monic_additive:
            if (d < 2) fail(errc::domain_error, "monic_additive requires degree d >= 2");
            break;
        case family_kind::power_additive:
            if (!finite(ell_minus) || !finite(ell_plus) || ell_minus < 1.0 || ell_plus < 1.0)
                fail(errc::domain_error, "power_additive requires exponents >= 1");
            break;
        case family_kind::flat_additive:
            if (!finite(ell) || ell < 1.0) fail(errc::domain_error, "flat_additive requires ell >= 1");
            if (!finite(b) || b <= 0.0) fail(errc::domain_error, "flat_additive requires b > 0");
            break;
        case family_kind::multiplicative:
            if (base == mult_base::flat_unimodal && (!finite(ell) || ell < 1.0))
                fail(errc::domain_error, "flat_unimodal base requires ell >= 1");
            break;
        case family_kind::cubic:
            break;
    }
}

family_spec family_spec::parse(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::exception& e) {
        fail(errc::domain_error, std::string("malformed family JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("family") || !j["family"].is_string())
        fail(errc::domain_error, "family JSON must be an object with a \"family\" string");

    family_spec spec;
    const std::string name = j["family"].get<std::string>();
    auto allow = [&](std::initializer_list<const char*> keys) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            if (it.key() == "family") continue;
            bool ok = false;
            for (const char* k : keys)
                if (it.key() == k) ok = true;
            if (!ok) fail(errc::domain_error, "unknown key in family JSON: " + it.key());
        }
    };
    auto num = [&](const char* key, double fallback) -> double {
        if (!j.contains(key)) return fallback;
        if (!j[key].is_number()) fail(errc::domain_error, std::string("family key must be numeric: ") + key);
        return j[key].get<double>();
    };

    if (name == "monic_additive") {
        spec.kind = family_kind::monic_additive;
        allow({"d"});
        double d = num("d", 2.0);
        if (!is_integer(d)) fail(errc::domain_error, "monic_additive degree must be an integer");
        spec.d = static_cast<int>(std::llround(d));
    } else if (name == "power_additive") {
        spec.kind = family_kind::power_additive;
        allow({"ell_minus", "ell_plus"});
        spec.ell_minus = num("ell_minus", 2.0);
        spec.ell_plus = num("ell_plus", 2.0);
    } else if (name == "flat_additive") {
        spec.kind = family_kind::flat_additive;
        allow({"ell", "b"});
        spec.ell = num("ell", 1.0);
        spec.b = num("b", 6.0);
    } else if (name == "multiplicative") {
        spec.kind = family_kind::multiplicative;
        allow({"base", "ell"});
        if (!j.contains("base") || !j["base"].is_string())
            fail(errc::domain_error, "multiplicative family requires a \"base\" string");
        const std::string base = j["base"].get<std::string>();
        if (base == "sin") {
            spec.base = mult_base::sin;
        } else if (base == "quad4x1mx") {
            spec.base = mult_base::quad4x1mx;
        } else if (base == "flat_unimodal") {
            spec.base = mult_base::flat_unimodal;
        } else {
            fail(errc::domain_error, "unknown multiplicative base: " + base);
        }
        if (j.contains("ell")) {
            if (spec.base != mult_base::flat_unimodal)
                fail(errc::domain_error, "key \"ell\" is only valid for the flat_unimodal base");
            spec.ell = num("ell", 1.0);
        }
    } else if (name == "cubic") {
        spec.kind = family_kind::cubic;
        allow({});
    } else {
        fail(errc::domain_error, "unknown family: " + name);
    }
    spec.validate();
    return spec;
}

std::string family_spec::to_json() const {
    nlohmann::ordered_json j;
    switch (kind) {
        case family_kind::monic_additive:
            j["family"] = "monic_additive";
            j["d"] = d;
            break;
        case family_kind::power_additive:
            j["family"] = "power_additive";
            j["ell_minus"] = ell_minus;
            j["ell_plus"] = ell_plus;
            break;
        case family_kind::flat_additive:
            j["family"] = "flat_additive";
            j["ell"] = ell;
            j["b"] = b;
            break;
        case family_kind::multiplicative:
            j["family"] = "multiplicative";
            j["base"] = base == mult_base::sin        ? "sin"
                        : base == mult_base::quad4x1mx ? "quad4x1mx"
                                                       : "flat_unimodal";
            if (base == mult_base::flat_unimodal) j["ell"] = ell;
            break;
        case family_kind::cubic:
            j["family"] = "cubic";
            break;
    }
    return j.dump();
}

// ---------------------------------------------------------------------
// Cubic chart
// ---------------------------------------------------------------------

cubic_chart_result cubic_from_critical_values(double w1, double w2) {
    if (!std::isfinite(w1) || !std::isfinite(w2))
        fail(errc::not_finite, "critical values must be finite");
    if (w1 == w2) fail(errc::degenerate_chart, "coincident critical values: chart is singular");
    double a0 = std::cbrt((w2 - w1) / 4.0);
    cubic_chart_result r;
    r.swapped = a0 < 0.0;
    r.a = std::abs(a0);
    r.b = 0.5 * (w1 + w2);
    return r;
}

std::pair<double, double> cubic_to_critical_values(double a, double b) {
    return {-2.0 * a * a * a + b, 2.0 * a * a * a + b};
}

// ---------------------------------------------------------------------
// Evaluation
// ---------------------------------------------------------------------

cplx eval(const family_spec& spec, const std::vector<cplx>& w, cplx z) {
    require_nu(spec, w);
    switch (spec.kind) {
        case family_kind::monic_additive:
            return ipow(z, spec.d) + w[0];
        case family_kind::power_additive: {
            if (z == cplx(0.0, 0.0)) return w[0];
            auto [s, sigma] = half_plane_split(z);
            double e = sigma > 0 ? spec.ell_plus : spec.ell_minus;
            return half_plane_pow(s, e) + w[0];
        }
        case family_kind::flat_additive: {
            if (z == cplx(0.0, 0.0)) return w[0];
            auto [s, sigma] = half_plane_split(z);
            (void)sigma;
            return spec.b * std::exp(-1.0 / half_plane_pow(s, spec.ell)) + w[0];
        }
        case family_kind::multiplicative:
            return w[0] * base_value(spec, z);
        case family_kind::cubic: {
            cplx a0 = cubic_a0(w);
            return z * z * z - 3.0 * a0 * a0 * z + 0.5 * (w[0] + w[1]);
        }
    }
    fail(errc::domain_error, "unknown family kind");
}

cplx deriv_z(const family_spec& spec, const std::vector<cplx>& w, cplx z) {
    require_nu(spec, w);
    switch (spec.kind) {
        case family_kind::monic_additive:
            return static_cast<double>(spec.d) * ipow(z, spec.d - 1);
        case family_kind::power_additive: {
            if (z == cplx(0.0, 0.0)) {
                if (spec.ell_minus > 1.0 && spec.ell_plus > 1.0) return cplx(0.0, 0.0);
                fail(errc::domain_error, "derivative undefined at the turning point for ell = 1");
            }
            auto [s, sigma] = half_plane_split(z);
            double e = sigma > 0 ? spec.ell_plus : spec.ell_minus;
            return sigma * e * half_plane_pow(s, e - 1.0);
        }
        case family_kind::flat_additive: {
            if (z == cplx(0.0, 0.0)) return cplx(0.0, 0.0);
            auto [s, sigma] = half_plane_split(z);
            cplx E = std::exp(-1.0 / half_plane_pow(s, spec.ell));
            return sigma * spec.b * E * spec.ell / half_plane_pow(s, spec.ell + 1.0);
        }
        case family_kind::multiplicative:
            return w[0] * base_deriv(spec, z);
        case family_kind::cubic: {
            cplx a0 = cubic_a0(w);
            return 3.0 * z * z - 3.0 * a0 * a0;
        }
    }
    fail(errc::domain_error, "unknown family kind");
}

cplx deriv_w(const family_spec& spec, const std::vector<cplx>& w, cplx z, int k) {
    require_nu(spec, w);
    if (k < 0 || k >= spec.nu()) fail(errc::domain_error, "parameter index out of range");
    switch (spec.kind) {
        case family_kind::monic_additive:
        case family_kind::power_additive:
        case family_kind::flat_additive:
            return cplx(1.0, 0.0);
        case family_kind::multiplicative:
            return base_value(spec, z);
        case family_kind::cubic: {
            cplx a0 = cubic_a0(w);
            if (a0 == cplx(0.0, 0.0))
                fail(errc::degenerate_chart, "coincident critical values: chart is singular");
            // d/dw_k [ -3 a0^2 ] = -z/(2 a0) for k=1 (and +z/(2 a0) for k=0)
            // combined with db/dw_k = 1/2; the two rows sum to 1.
            cplx t = z / (2.0 * a0);
            return (k == 0 ? t : -t) + 0.5;
        }
    }
    fail(errc::domain_error, "unknown family kind");
}

std::vector<cplx> critical_points(const family_spec& spec, const std::vector<cplx>& w) {
    require_nu(spec, w);
    switch (spec.kind) {
        case family_kind::monic_additive:
        case family_kind::power_additive:
        case family_kind::flat_additive:
            return {cplx(0.0, 0.0)};
        case family_kind::multiplicative:
            if (spec.base == mult_base::sin) return {cplx(std::acos(-1.0) / 2.0, 0.0)};
            return {cplx(0.5, 0.0)};
        case family_kind::cubic: {
            cplx a0 = cubic_a0(w);
            return {a0, -a0};
        }
    }
    fail(errc::domain_error, "unknown family kind");
}

cplx marked_point_deriv(const family_spec& spec, const std::vector<cplx>& w, int j, int k) {
    require_nu(spec, w);
    if (j < 0 || j >= spec.nu() || k < 0 || k >= spec.nu())
        fail(errc::domain_error, "marked point index out of range");
    if (spec.kind != family_kind::cubic) return cplx(0.0, 0.0);
    cplx a0 = cubic_a0(w);
    if (a0 == cplx(0.0, 0.0))
        fail(errc::degenerate_chart, "coincident critical values: chart is singular");
    // p_0 = a0 = ((w2 - w1)/4)^{1/3}: dp_0/dw_0 = -1/(12 a0^2), dp_0/dw_1 = +1/(12 a0^2).
    cplx base = 1.0 / (12.0 * a0 * a0);
    cplx d0k = (k == 0) ? -base : base;
    return (j == 0) ? d0k : -d0k;
}

// ---------------------------------------------------------------------
// Real fast path
// ---------------------------------------------------------------------

namespace {

double rpow_int_or_real(double s, double e) {
    // s > 0; exact repeated multiplication for integer exponents keeps the
    // real path bit-identical with the complex one.
    if (is_integer(e)) {
        long long n = std::llround(e);
        double acc = 1.0, base = s;
        bool neg = n < 0;
        unsigned long long m = neg ? -static_cast<unsigned long long>(n) : n;
        while (m) {
            if (m & 1) acc *= base;
            base *= base;
            m >>= 1;
        }
        return neg ? 1.0 / acc : acc;
    }
    return std::pow(s, e);
}

double base_value_real(const family_spec& spec, double x) {
    switch (spec.base) {
        case mult_base::sin: return std::sin(x);
        case mult_base::quad4x1mx: return 4.0 * x * (1.0 - x);
        case mult_base::flat_unimodal: {
            double u = x - 0.5;
            if (u == 0.0) return 1.0;
            return 1.0 - exp_pow2(spec.ell) * std::exp(-1.0 / rpow_int_or_real(std::abs(u), spec.ell));
        }
    }
    fail(errc::domain_error, "unknown multiplicative base");
}

double base_deriv_real(const family_spec& spec, double x) {
    switch (spec.base) {
        case mult_base::sin: return std::cos(x);
        case mult_base::quad4x1mx: return 4.0 - 8.0 * x;
        case mult_base::flat_unimodal: {
            double u = x - 0.5;
            if (u == 0.0) return 0.0;
            double s = std::abs(u), sigma = u > 0 ? 1.0 : -1.0;
            double E = std::exp(-1.0 / rpow_int_or_real(s, spec.ell));
            return -exp_pow2(spec.ell) * E * spec.ell * sigma / rpow_int_or_real(s, spec.ell + 1.0);
        }
    }
    fail(errc::domain_error, "unknown multiplicative base");
}

} // namespace

double eval_real(const family_spec& spec, double c, double x) {
    switch (spec.kind) {
        case family_kind::monic_additive:
            return rpow_int_or_real(x, static_cast<double>(spec.d)) + c;
        case family_kind::power_additive: {
            if (x == 0.0) return c;
            double e = x > 0 ? spec.ell_plus : spec.ell_minus;
            return rpow_int_or_real(std::abs(x), e) + c;
        }
        case family_kind::flat_additive:
            if (x == 0.0) return c;
            return spec.b * std::exp(-1.0 / rpow_int_or_real(std::abs(x), spec.ell)) + c;
        case family_kind::multiplicative:
            return c * base_value_real(spec, x);
        case family_kind::cubic:
            break;
    }
    fail(errc::domain_error, "eval_real supports the one-parameter kinds only");
}

double deriv_real(const family_spec& spec, double c, double x) {
    switch (spec.kind) {
        case family_kind::monic_additive:
            return spec.d * rpow_int_or_real(x, static_cast<double>(spec.d - 1));
        case family_kind::power_additive: {
            if (x == 0.0) {
                if (spec.ell_minus > 1.0 && spec.ell_plus > 1.0) return 0.0;
                fail(errc::domain_error, "derivative undefined at the turning point for ell = 1");
            }
            double e = x > 0 ? spec.ell_plus : spec.ell_minus;
            double sigma = x > 0 ? 1.0 : -1.0;
            return sigma * e * rpow_int_or_real(std::abs(x), e - 1.0);
        }
        case family_kind::flat_additive: {
            if (x == 0.0) return 0.0;
            double s = std::abs(x), sigma = x > 0 ? 1.0 : -1.0;
            double E = std::exp(-1.0 / rpow_int_or_real(s, spec.ell));
            return sigma * spec.b * E * spec.ell / rpow_int_or_real(s, spec.ell + 1.0);
        }
        case family_kind::multiplicative:
            return c * base_deriv_real(spec, x);
        case family_kind::cubic:
            break;
    }
    fail(errc::domain_error, "deriv_real supports the one-parameter kinds only");
}

// ---------------------------------------------------------------------
// Flat-family geometry
// ---------------------------------------------------------------------

double flat_beta(double ell, double b) {
    if (!(std::isfinite(ell) && std::isfinite(b)) || ell < 1.0)
        fail(errc::domain_error, "flat_beta requires finite b and ell >= 1");
    const double min_b = 2.0 * std::pow(std::exp(1.0) * ell, 1.0 / ell);
    if (b < min_b * (1.0 - 1e-12))
        fail(errc::no_solution, "no Chebyshev-type fixed point: need b >= 2 (e ell)^(1/ell)");
    // At the threshold the two solutions collide in a tangency at l^{1/l}.
    if (b <= min_b * (1.0 + 1e-12)) return std::pow(ell, 1.0 / ell);
    auto g = [&](double x) { return 2.0 * x * std::exp(1.0 / std::pow(x, ell)) - b; };
    double hi = std::pow(ell, 1.0 / ell);
    double lo = hi / 2.0;
    for (int i = 0; i < 2000 && g(lo) < 0.0; ++i) lo /= 2.0;
    if (g(lo) < 0.0) fail(errc::non_convergence, "bracketing failed in flat_beta");
    for (int i = 0; i < 200; ++i) {
        double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

separation_report check_separation(const family_spec& spec) {
    separation_report rep;
    if (spec.kind == family_kind::monic_additive) {
        // U = B(0,4), V = B(c, 4^d): z -> z^d covers the annulus away from
        // the branch point at 0, and diam U = 8 < 4^d.
        rep.diam_U = 8.0;
        rep.radius_R = std::pow(4.0, spec.d);
        rep.class_F_conditions[0] = true;                        // critical point in closure of U
        rep.class_F_conditions[1] = true;                        // unbranched covering off 0
        rep.class_F_conditions[2] = true;                        // V bounded
        rep.class_F_conditions[3] = rep.diam_U < rep.radius_R;   // robust inclusion
        rep.robust = rep.class_F_conditions[3];
        return rep;
    }
    if (spec.kind != family_kind::flat_additive)
        fail(errc::domain_error, "separation geometry is defined for monic_additive and flat_additive only");

    const double ell = spec.ell, b = spec.b;
    const double beta = flat_beta(ell, b);
    auto f0 = [&](double x) { return b * std::exp(-1.0 / std::pow(x, ell)); };
    // The covering has image radius R = f0(x0) over a double disk of
    // diameter 2 x0, so the separation margin is psi(x0) = f0(x0) - 2 x0
    // (equivalently x1 - beta > 2 (x0 - beta) with x1 = f0(x0) - beta).
    auto psi = [&](double x) { return f0(x) - 2.0 * x; };
    // psi(beta) = 0 with positive slope; psi(b) < 0.  Maximize psi to get
    // the most robust admissible x0, by golden-section on [beta, b].
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = beta, hi = b;
    double m1 = hi - gr * (hi - lo), m2 = lo + gr * (hi - lo);
    double p1 = psi(m1), p2 = psi(m2);
    for (int i = 0; i < 200; ++i) {
        if (p1 < p2) {
            lo = m1; m1 = m2; p1 = p2;
            m2 = lo + gr * (hi - lo); p2 = psi(m2);
        } else {
            hi = m2; m2 = m1; p2 = p1;
            m1 = hi - gr * (hi - lo); p1 = psi(m1);
        }
    }
    const double x0 = 0.5 * (lo + hi);
    const double R = f0(x0);
    rep.beta = beta;
    rep.x0 = x0;
    rep.x1 = R - beta;
    rep.diam_U = 2.0 * x0;
    rep.radius_R = R;
    rep.class_F_conditions[0] = true;              // 0 lies on the boundary of U
    rep.class_F_conditions[1] = true;              // unbranched covering by construction
    rep.class_F_conditions[2] = R < b;             // image stays inside the model window
    rep.class_F_conditions[3] = rep.diam_U < R;    // robust inclusion diam U < R
    rep.robust = rep.class_F_conditions[2] && rep.class_F_conditions[3];
    return rep;
}

} // namespace trv
