#pragma once

#include <vector>

#include "trv/family.hpp"

namespace trv {

// Coefficients of det(I - rho*M) as a polynomial in rho, degree n, by the
// Faddeev-LeVerrier recursion: returns [1, a_1, ..., a_n] (a_k multiplies
// rho^k).  M is dense row-major n x n.
std::vector<cplx> char_poly(const std::vector<cplx>& M, int n);

// All complex roots of sum_i coeffs[i] x^i by Aberth-Ehrlich simultaneous
// iteration, refined to ~1e-13 relative; deterministic initialization.
std::vector<cplx> poly_roots(const std::vector<cplx>& coeffs);

// Horner evaluation.
cplx poly_eval(const std::vector<cplx>& coeffs, cplx x);

// Determinant of a dense row-major n x n matrix via partially pivoted LU.
cplx det_dense(std::vector<cplx> M, int n);

// Solves A x = b for dense row-major A (n x n).
std::vector<cplx> solve_dense(std::vector<cplx> A, std::vector<cplx> b, int n);

} // namespace trv
