#pragma once

#include <complex>
#include <string>
#include <vector>

#include "trv/errors.hpp"

namespace trv {

using cplx = std::complex<double>;

// ---------------------------------------------------------------------
// Family specification
// ---------------------------------------------------------------------

enum class family_kind {
    monic_additive,  // z^d + c
    power_additive,  // |z|^{l-} (z<0) / |z|^{l+} (z>0), plus c
    flat_additive,   // b * exp(-1/|z|^l) + c
    multiplicative,  // w * f(z) for a fixed unimodal f with f(crit) = 1
    cubic,           // z^3 - 3a^2 z + b, two critical points +-a
};

enum class mult_base {
    sin,           // f(z) = sin z,            crit = pi/2
    quad4x1mx,     // f(z) = 4 z (1-z),        crit = 1/2
    flat_unimodal, // flat-top bump on [0,1],  crit = 1/2
};

struct family_spec {
    family_kind kind = family_kind::monic_additive;
    int d = 2;                           // monic_additive degree
    double ell_minus = 2.0;              // power_additive left exponent
    double ell_plus = 2.0;               // power_additive right exponent
    double ell = 1.0;                    // flat_additive / flat_unimodal
    double b = 6.0;                      // flat_additive height
    mult_base base = mult_base::sin;     // multiplicative base map

    // Number of parameter coordinates (= number of marked critical points).
    int nu() const { return kind == family_kind::cubic ? 2 : 1; }

    // JSON (de)serialization; unknown keys are rejected.
    static family_spec parse(const std::string& json_text);
    std::string to_json() const;

    // Guards the admissible shape-parameter ranges.
    void validate() const;
};

// ---------------------------------------------------------------------
// Cubic critical-value chart
// ---------------------------------------------------------------------

// Coordinates (a,b) recovered from critical values (w1,w2).  Convention:
// w1 = f(a) = -2a^3 + b with a > 0 canonical.  If the input has the roles
// reversed (w1 > w2), the chart swaps them and reports `swapped`.
struct cubic_chart_result {
    double a = 0;
    double b = 0;
    bool swapped = false;
};

cubic_chart_result cubic_from_critical_values(double w1, double w2);
// Inverse chart: (w1, w2) = (-2a^3 + b, 2a^3 + b).
std::pair<double, double> cubic_to_critical_values(double a, double b);

// ---------------------------------------------------------------------
// Separation report (class-F geometry)
// ---------------------------------------------------------------------

struct separation_report {
    double diam_U = 0;
    double radius_R = 0;
    bool robust = false;
    bool class_F_conditions[4] = {false, false, false, false};
    // Flat-family construction details (zero for other kinds).
    double beta = 0;
    double x0 = 0;
    double x1 = 0;
};

// ---------------------------------------------------------------------
// Family operations.  `w` always has spec.nu() entries; for the cubic it
// is the pair of critical values (the chart is applied internally).
// ---------------------------------------------------------------------

cplx eval(const family_spec& spec, const std::vector<cplx>& w, cplx z);
cplx deriv_z(const family_spec& spec, const std::vector<cplx>& w, cplx z);
cplx deriv_w(const family_spec& spec, const std::vector<cplx>& w, cplx z, int k);

// Critical points p_j(w); entry j corresponds to parameter coordinate j.
std::vector<cplx> critical_points(const family_spec& spec, const std::vector<cplx>& w);
// d p_j / d w_k at the given parameter, 0-based indices (zero except for
// the cubic, whose critical points move with the chart).
cplx marked_point_deriv(const family_spec& spec, const std::vector<cplx>& w, int j, int k);

// Unique solution of 2 x e^{1/x^l} = b in (0, l^{1/l}); requires
// b > 2 (e l)^{1/l}.
double flat_beta(double ell, double b);

// Class-F separation data for flat_additive / monic_additive.
separation_report check_separation(const family_spec& spec);

// Convenience single-parameter wrappers (nu = 1 kinds).
inline cplx eval1(const family_spec& s, cplx c, cplx z) { return eval(s, {c}, z); }
inline cplx deriv_z1(const family_spec& s, cplx c, cplx z) { return deriv_z(s, {c}, z); }

// Allocation-free real-line fast path for the nu = 1 kinds; used by the
// scan kernels.  Same values as eval/deriv_z restricted to the real line.
double eval_real(const family_spec& spec, double c, double x);
double deriv_real(const family_spec& spec, double c, double x);

} // namespace trv
