#include "trv/polyroots.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace trv {

std::vector<cplx> char_poly(const std::vector<cplx>& M, int n) {
    if (n < 0 || static_cast<int>(M.size()) != n * n)
        fail(errc::domain_error, "char_poly requires a square matrix");
    // B_0 = I; A_k = M B_{k-1}; c_k = -tr(A_k)/k; B_k = A_k + c_k I.
    std::vector<cplx> B(M.size(), cplx(0.0, 0.0));
    for (int i = 0; i < n; ++i) B[i * n + i] = 1.0;
    std::vector<cplx> coeffs(static_cast<std::size_t>(n) + 1, cplx(0.0, 0.0));
    coeffs[0] = 1.0; // det(I - rho M) has constant term 1
    std::vector<cplx> A(M.size());
    for (int k = 1; k <= n; ++k) {
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                cplx s(0.0, 0.0);
                for (int t = 0; t < n; ++t) s += M[i * n + t] * B[t * n + j];
                A[i * n + j] = s;
            }
        cplx tr(0.0, 0.0);
        for (int i = 0; i < n; ++i) tr += A[i * n + i];
        const cplx ck = -tr / static_cast<double>(k);
        // det(lambda I - M) coefficient of lambda^{n-k} is ck; in the
        // det(I - rho M) normalization it multiplies rho^k.
        coeffs[static_cast<std::size_t>(k)] = ck;
        if (std::abs(ck) > 1e100) fail(errc::overflow, "characteristic coefficient overflow");
        B = A;
        for (int i = 0; i < n; ++i) B[i * n + i] += ck;
    }
    return coeffs;
}

cplx poly_eval(const std::vector<cplx>& coeffs, cplx x) {
    cplx acc(0.0, 0.0);
    for (std::size_t i = coeffs.size(); i-- > 0;) acc = acc * x + coeffs[i];
    return acc;
}

std::vector<cplx> poly_roots(const std::vector<cplx>& coeffs) {
    int m = static_cast<int>(coeffs.size()) - 1;
    while (m > 0 && coeffs[static_cast<std::size_t>(m)] == cplx(0.0, 0.0)) --m;
    if (m <= 0) return {};

    // Monic normalization.
    std::vector<cplx> b(static_cast<std::size_t>(m) + 1);
    for (int i = 0; i <= m; ++i) b[i] = coeffs[i] / coeffs[m];

    // Deterministic start: Cauchy-bound circle with an angular offset.
    double bound = 0.0;
    for (int i = 0; i < m; ++i) bound = std::max(bound, std::abs(b[i]));
    const double radius = 1.0 + bound;
    const double pi = std::acos(-1.0);
    std::vector<cplx> z(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) {
        const double ang = 2.0 * pi * i / m + 0.4;
        z[i] = radius * cplx(std::cos(ang), std::sin(ang));
    }

    const double eps = std::numeric_limits<double>::epsilon();
    std::vector<char> frozen(static_cast<std::size_t>(m), 0);
    for (int sweep = 0; sweep < 500; ++sweep) {
        double worst = 0.0;
        for (int i = 0; i < m; ++i) {
            if (frozen[i]) continue;
            // p and p' by Horner on the monic coefficients.
            cplx p(0.0, 0.0), dp(0.0, 0.0);
            double mag = 0.0; // running bound sum |b_k| |z|^k for the stop test
            for (int k = m; k >= 0; --k) {
                dp = dp * z[i] + p;
                p = p * z[i] + b[k];
                mag = mag * std::abs(z[i]) + std::abs(b[k]);
            }
            if (std::abs(p) <= 16.0 * eps * mag) {
                frozen[i] = 1;
                continue;
            }
            const cplx w = dp == cplx(0.0, 0.0) ? p : p / dp;
            cplx sum(0.0, 0.0);
            for (int j = 0; j < m; ++j)
                if (j != i) sum += 1.0 / (z[i] - z[j]);
            const cplx denom = 1.0 - w * sum;
            const cplx delta = denom == cplx(0.0, 0.0) ? w : w / denom;
            z[i] -= delta;
            const double rel = std::abs(delta) / (1.0 + std::abs(z[i]));
            worst = std::max(worst, rel);
            if (rel < 1e-13) frozen[i] = 1;
        }
        bool all = true;
        for (char f : frozen) all = all && f;
        if (all || worst == 0.0) {
            std::sort(z.begin(), z.end(), [](cplx a, cplx b2) {
                return a.real() < b2.real() ||
                       (a.real() == b2.real() && a.imag() < b2.imag());
            });
            return z;
        }
    }
    fail(errc::non_convergence, "root iteration did not settle within 500 sweeps");
}

cplx det_dense(std::vector<cplx> M, int n) {
    cplx det(1.0, 0.0);
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(M[r * n + col]) > std::abs(M[piv * n + col])) piv = r;
        if (M[piv * n + col] == cplx(0.0, 0.0)) return cplx(0.0, 0.0);
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(M[piv * n + c], M[col * n + c]);
            det = -det;
        }
        det *= M[col * n + col];
        for (int r = col + 1; r < n; ++r) {
            const cplx f = M[r * n + col] / M[col * n + col];
            for (int c = col; c < n; ++c) M[r * n + c] -= f * M[col * n + c];
        }
    }
    return det;
}

std::vector<cplx> solve_dense(std::vector<cplx> A, std::vector<cplx> b, int n) {
    if (static_cast<int>(b.size()) != n || static_cast<int>(A.size()) != n * n)
        fail(errc::domain_error, "solve_dense dimension mismatch");
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col])) piv = r;
        if (A[piv * n + col] == cplx(0.0, 0.0))
            fail(errc::rank_deficient, "singular system in solve_dense");
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(A[piv * n + c], A[col * n + c]);
            std::swap(b[piv], b[col]);
        }
        for (int r = col + 1; r < n; ++r) {
            const cplx f = A[r * n + col] / A[col * n + col];
            for (int c = col; c < n; ++c) A[r * n + c] -= f * A[col * n + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<cplx> x(static_cast<std::size_t>(n));
    for (int r = n - 1; r >= 0; --r) {
        cplx s = b[r];
        for (int c = r + 1; c < n; ++c) s -= A[r * n + c] * x[c];
        x[r] = s / A[r * n + r];
    }
    return x;
}

} // namespace trv
