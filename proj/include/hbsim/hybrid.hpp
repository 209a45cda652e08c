// SPDX-License-Identifier: Apache-2.0
//
// hbsim: hybrid analog-digital beamforming simulation library
// Copyright (C) 2026 hbsim contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#ifndef hbsim_hybrid_H
#define hbsim_hybrid_H

#include <armadillo>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "hbsim/zf.hpp"

namespace hbsim
{

// Count of singular values above tol * sigma_max; tol < 0 selects the
// max(rows, cols) * eps default.
inline arma::uword numerical_rank(const arma::cx_mat &m, double tol = -1.0)
{
    if (m.n_elem == 0)
        return 0;
    arma::vec s = arma::svd(m);
    if (s.n_elem == 0 || s(0) == 0.0)
        return 0;
    if (tol < 0.0)
        tol = default_rank_tol(m.n_rows, m.n_cols);
    const double cut = tol * s(0);
    arma::uword r = 0;
    while (r < s.n_elem && s(r) > cut)
        r++;
    return r;
}

// Two unit-modulus phases whose complex exponentials sum to a target value.
struct PhasePair
{
    double phi1 = 0.0;
    double phi2 = 0.0;

    arma::cx_double value() const
    {
        return std::polar(1.0, phi1) + std::polar(1.0, phi2);
    }
};

namespace detail
{
// Amplitude overshoot tolerated before the domain error fires; factorization
// guarantees entries within 2 only up to rounding.
inline constexpr double amplitude_slack = 1e-9;

inline double clamp_unit(double x)
{
    return std::max(-1.0, std::min(1.0, x));
}
} // namespace detail

// x = e^{j*acos(x/2)} + e^{-j*acos(x/2)} for real x in [-2, 2].
inline PhasePair phase_pair_real(double x)
{
    if (std::abs(x) > 2.0 + detail::amplitude_slack)
        throw std::domain_error("phase_pair_real: |x| must be <= 2");
    const double phi = std::acos(detail::clamp_unit(x / 2.0));
    return PhasePair{phi, -phi};
}

// j*x = e^{j*asin(x/2)} + e^{j*(pi - asin(x/2))} for real x in [-2, 2].
inline PhasePair phase_pair_imag(double x)
{
    if (std::abs(x) > 2.0 + detail::amplitude_slack)
        throw std::domain_error("phase_pair_imag: |x| must be <= 2");
    const double phi = std::asin(detail::clamp_unit(x / 2.0));
    return PhasePair{phi, arma::datum::pi - phi};
}

// z = a*e^{j*phi} with a <= 2 becomes e^{j(phi + acos(a/2))} + e^{j(phi - acos(a/2))}.
inline PhasePair phase_pair_complex(arma::cx_double z)
{
    const double a = std::abs(z);
    if (a > 2.0 + detail::amplitude_slack)
        throw std::domain_error("phase_pair_complex: |z| must be <= 2");
    const double phi = std::arg(z);
    const double half = std::acos(detail::clamp_unit(a / 2.0));
    return PhasePair{phi + half, phi - half};
}

// Digital precoders of all sub-carriers stacked side by side, with the
// per-sub-carrier column widths and the numerical rank of the stack.
struct DigitalStack
{
    arma::cx_mat combined;              // N x total_width
    std::vector<arma::uword> widths;    // columns per sub-carrier
    arma::uword rank = 0;
    double rank_tol = -1.0;             // relative; -1 = default

    arma::uword n_subcarriers() const { return static_cast<arma::uword>(widths.size()); }

    arma::cx_mat block(arma::uword i) const
    {
        arma::uword start = 0;
        for (arma::uword j = 0; j < i; j++)
            start += widths[j];
        return combined.cols(start, start + widths[i] - 1);
    }
};

inline DigitalStack make_stack(const std::vector<arma::cx_mat> &precoders, double rank_tol = -1.0)
{
    if (precoders.empty())
        throw std::invalid_argument("make_stack: no precoders");
    DigitalStack st;
    st.rank_tol = rank_tol;
    arma::uword total = 0;
    for (const auto &b : precoders)
    {
        if (b.n_rows != precoders.front().n_rows)
            throw std::invalid_argument("make_stack: inconsistent row counts");
        st.widths.push_back(b.n_cols);
        total += b.n_cols;
    }
    st.combined.set_size(precoders.front().n_rows, total);
    arma::uword at = 0;
    for (const auto &b : precoders)
    {
        if (b.n_cols > 0)
            st.combined.cols(at, at + b.n_cols - 1) = b;
        at += b.n_cols;
    }
    st.rank = numerical_rank(st.combined, rank_tol);
    return st;
}

// Exact factorization of a digital stack into an analog matrix realizable by
// paired phase shifters and per-sub-carrier baseband precoders:
//
//   analog * mixing * baseband_i == B_i  for every sub-carrier i,
//
// where analog^H = [G, Gt] with G = inv(scale) diagonal, every entry of
// analog has modulus <= 2, and the structural nonzero count is at most
// r*(N - r + 1) for stack rank r.
struct HybridFactorization
{
    arma::cx_mat analog;                  // N x r
    arma::cx_mat mixing;                  // r x r
    std::vector<arma::cx_mat> baseband;   // r x K_i per sub-carrier
    arma::vec scale;                      // diagonal of the amplitude normalizer
    arma::uword rank = 0;

    arma::uword structural_nonzeros() const
    {
        const arma::uword n = analog.n_rows;
        return rank * (n - rank + 1);
    }
};

inline HybridFactorization factorize(const DigitalStack &stack)
{
    const arma::uword n = stack.combined.n_rows;
    if (stack.rank < 1)
        throw std::invalid_argument("factorize: stack is all zero (rank 0)");

    // Rank-revealing split: combined = q_basis * coeff with orthonormal
    // q_basis columns. SVD keeps this stable for rank-deficient stacks.
    arma::cx_mat u, v;
    arma::vec s;
    if (!arma::svd_econ(u, s, v, stack.combined))
        throw std::runtime_error("factorize: SVD failed to converge");
    const arma::uword r = stack.rank;
    const arma::cx_mat q_basis = u.cols(0, r - 1);
    const arma::cx_mat coeff = arma::diagmat(s.subvec(0, r - 1)) * v.cols(0, r - 1).t(); // r x total

    // QR of the wide matrix q_basis^H = q_rot * [r_head r_tail]. The plain
    // decomposition keeps the leading analog block on the leading antennas;
    // when its triangular block is ill-conditioned (structured stacks can put
    // near-dependent columns first) redo it with column pivoting, which only
    // relabels which antenna carries which analog row.
    arma::cx_mat q_rot, r_wide;
    arma::uvec perm(n);
    for (arma::uword j = 0; j < n; j++)
        perm(j) = j;
    if (!arma::qr(q_rot, r_wide, q_basis.t()))
        throw std::runtime_error("factorize: QR failed");
    if (arma::rcond(arma::cx_mat(arma::trimatu(r_wide.cols(0, r - 1)))) < 1e-10)
    {
        if (!arma::qr(q_rot, r_wide, perm, q_basis.t(), "vector"))
            throw std::runtime_error("factorize: pivoted QR failed");
    }
    q_rot = q_rot.cols(0, r - 1);
    r_wide = r_wide.rows(0, r - 1);
    const arma::cx_mat r_head = r_wide.cols(0, r - 1); // upper triangular

    for (arma::uword j = 0; j < r; j++)
        if (std::abs(r_head(j, j)) < default_rank_tol(r, n) * arma::abs(r_wide.diag()).max())
            throw std::runtime_error("factorize: leading block of the second factorization is singular");

    HybridFactorization f;
    f.rank = r;

    arma::cx_mat ratio; // r x (N - r), solve(r_head, r_tail)
    if (n > r)
    {
        const arma::cx_mat r_tail = r_wide.cols(r, n - 1);
        ratio = arma::solve(arma::trimatu(r_head), r_tail, arma::solve_opts::no_approx);
    }
    else
        ratio.set_size(r, 0);

    // Diagonal normalizer keeping both the inverse-diagonal block and the
    // ratio block within amplitude 2.
    f.scale.set_size(r);
    for (arma::uword j = 0; j < r; j++)
    {
        double row_max = ratio.n_cols > 0 ? arma::abs(ratio.row(j)).max() : 0.0;
        f.scale(j) = std::max(1.0, row_max) / 2.0;
    }

    // analog^H (in pivoted antenna order) = inv(scale) * [I, ratio];
    // mixing = (q_rot * r_head * scale)^H.
    arma::cx_mat analog_h(r, n, arma::fill::zeros);
    for (arma::uword j = 0; j < r; j++)
    {
        analog_h(j, perm(j)) = 1.0 / f.scale(j);
        for (arma::uword c = 0; c < ratio.n_cols; c++)
            analog_h(j, perm(r + c)) = ratio(j, c) / f.scale(j);
    }
    f.analog = analog_h.t();
    f.mixing = (q_rot * r_head * arma::diagmat(f.scale)).t();

    f.baseband.reserve(stack.n_subcarriers());
    arma::uword at = 0;
    for (arma::uword i = 0; i < stack.n_subcarriers(); i++)
    {
        const arma::uword w = stack.widths[i];
        f.baseband.push_back(w > 0 ? arma::cx_mat(coeff.cols(at, at + w - 1)) : arma::cx_mat(r, 0));
        at += w;
    }
    return f;
}

struct AnalogPhaseEntry
{
    arma::uword row = 0;
    arma::uword col = 0;
    PhasePair pair;
};

// One phase pair per nonzero analog entry; zero entries emit nothing (the
// corresponding switch stays open).
inline std::vector<AnalogPhaseEntry> expand_to_phases(const arma::cx_mat &analog)
{
    std::vector<AnalogPhaseEntry> out;
    for (arma::uword c = 0; c < analog.n_cols; c++)
        for (arma::uword r = 0; r < analog.n_rows; r++)
        {
            const arma::cx_double z = analog(r, c);
            if (std::abs(z) > 2.0 + 1e-12)
                throw std::domain_error("expand_to_phases: entry modulus exceeds 2");
            if (z == arma::cx_double(0.0, 0.0))
                continue;
            out.push_back({r, c, phase_pair_complex(z)});
        }
    return out;
}

inline arma::cx_mat analog_from_phases(const std::vector<AnalogPhaseEntry> &entries,
                                       arma::uword n_rows, arma::uword n_cols)
{
    arma::cx_mat out(n_rows, n_cols, arma::fill::zeros);
    for (const auto &e : entries)
        out(e.row, e.col) += e.pair.value();
    return out;
}

} // namespace hbsim

#endif
