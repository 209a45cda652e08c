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

#ifndef hbsim_zf_H
#define hbsim_zf_H

#include <algorithm>
#include <armadillo>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace hbsim
{

enum class PowerPolicy
{
    equal,
    waterfill
};

// Zero-forcing precoder for one sub-carrier: unnormalized column directions
// satisfying H^H * B = I on the selected users, plus the effective gains
// g_k = 1 / |b_k|^2. Power allocation is kept separate.
struct ZfPrecoder
{
    arma::cx_mat directions; // M x K
    arma::vec gains;         // length K
};

struct RateReport
{
    arma::vec per_user; // bits/s/Hz
    double sum = 0.0;
};

// Relative rank tolerance: singular values below tol * sigma_max count as zero.
inline double default_rank_tol(arma::uword n_rows, arma::uword n_cols)
{
    return static_cast<double>(std::max(n_rows, n_cols)) * std::numeric_limits<double>::epsilon();
}

// Computes the minimum-norm right inverse of H^H through the SVD, which keeps
// the rank decision explicit. Returns false when H is numerically rank
// deficient.
inline bool try_zf_precoder(const arma::cx_mat &channel, ZfPrecoder &out)
{
    const arma::uword m = channel.n_rows;
    const arma::uword k = channel.n_cols;
    if (k == 0 || k > m)
        return false;

    arma::cx_mat u, v;
    arma::vec s;
    if (!arma::svd_econ(u, s, v, channel))
        throw std::runtime_error("try_zf_precoder: SVD failed to converge");

    const double tol = default_rank_tol(m, k) * s(0);
    if (s(k - 1) <= tol)
        return false;

    out.directions = u * arma::diagmat(1.0 / s) * v.t();
    out.gains.set_size(k);
    for (arma::uword j = 0; j < k; j++)
        out.gains(j) = 1.0 / std::pow(arma::norm(out.directions.col(j)), 2.0);
    return true;
}

inline ZfPrecoder zf_precoder(const arma::cx_mat &channel, const std::string &context = "")
{
    ZfPrecoder p;
    if (!try_zf_precoder(channel, p))
        throw std::invalid_argument("zf_precoder: channel matrix is rank deficient" +
                                    (context.empty() ? "" : " (" + context + ")"));
    return p;
}

inline arma::vec equal_power(arma::uword n_users, double budget)
{
    if (n_users < 1)
        throw std::invalid_argument("equal_power: need at least one user");
    return arma::vec(n_users, arma::fill::value(budget / static_cast<double>(n_users)));
}

// Water-filling over effective gains: p_k = max(0, mu - sigma2/g_k) with
// sum(p) = budget. The water level is solved exactly over the sorted
// inverse-gain breakpoints; ties in g are broken by user index.
inline arma::vec waterfill(const arma::vec &gains, double budget, double noise_power)
{
    const arma::uword k = gains.n_elem;
    if (k == 0 || budget <= 0.0)
        throw std::invalid_argument("waterfill: need gains and a positive budget");
    if (arma::any(gains <= 0.0))
        throw std::invalid_argument("waterfill: gains must be positive");

    arma::vec floor_level = noise_power / gains; // sigma2 / g_k
    std::vector<arma::uword> order(k);
    std::iota(order.begin(), order.end(), arma::uword{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](arma::uword a, arma::uword b) { return floor_level(a) < floor_level(b); });

    // Largest active set whose water level clears every member's floor.
    double prefix = 0.0;
    double level = 0.0;
    arma::uword active = 0;
    for (arma::uword m = 0; m < k; m++)
    {
        prefix += floor_level(order[m]);
        const double candidate = (budget + prefix) / static_cast<double>(m + 1);
        if (candidate > floor_level(order[m]))
        {
            level = candidate;
            active = m + 1;
        }
    }

    arma::vec p(k, arma::fill::zeros);
    for (arma::uword m = 0; m < active; m++)
        p(order[m]) = level - floor_level(order[m]);
    return p;
}

inline arma::vec allocate_power(PowerPolicy policy, const arma::vec &gains, double budget, double noise_power)
{
    if (policy == PowerPolicy::equal)
        return equal_power(gains.n_elem, budget);
    return waterfill(gains, budget, noise_power);
}

// Scales ZF directions into transmit columns: column k becomes
// b_k * sqrt(p_k) / |b_k|, so tr(B^H B) = sum(p).
inline arma::cx_mat apply_power(const ZfPrecoder &precoder, const arma::vec &power)
{
    arma::cx_mat out = precoder.directions;
    for (arma::uword j = 0; j < out.n_cols; j++)
        out.col(j) *= std::sqrt(power(j) * precoder.gains(j));
    return out;
}

// General SINR evaluation of an effective (already power-scaled) precoder:
// gamma_k = |h_k^H b_k|^2 / (sum_{j != k} |h_k^H b_j|^2 + sigma2).
inline RateReport sum_rate_effective(const arma::cx_mat &channel, const arma::cx_mat &precoder,
                                     double noise_power)
{
    if (channel.n_rows != precoder.n_rows || channel.n_cols != precoder.n_cols)
        throw std::invalid_argument("sum_rate_effective: dimension mismatch");
    const arma::uword k = channel.n_cols;
    const arma::cx_mat cross = channel.t() * precoder; // (k,j) = h_k^H b_j
    RateReport report;
    report.per_user.set_size(k);
    for (arma::uword u = 0; u < k; u++)
    {
        const double signal = std::norm(cross(u, u));
        double interference = 0.0;
        for (arma::uword j = 0; j < k; j++)
            if (j != u)
                interference += std::norm(cross(u, j));
        const double sinr = signal / (interference + noise_power);
        report.per_user(u) = std::log2(1.0 + sinr);
    }
    report.sum = arma::accu(report.per_user);
    return report;
}

// Rate of a precoder given as directions plus a power vector.
inline RateReport sum_rate(const arma::cx_mat &channel, const ZfPrecoder &precoder,
                           const arma::vec &power, double noise_power)
{
    return sum_rate_effective(channel, apply_power(precoder, power), noise_power);
}

// ZF shortcut rate sum_k log2(1 + p_k g_k / sigma2); valid only when the
// precoder actually zero-forces the channel.
inline double zf_rate(const arma::vec &gains, const arma::vec &power, double noise_power)
{
    double total = 0.0;
    for (arma::uword j = 0; j < gains.n_elem; j++)
        total += std::log2(1.0 + power(j) * gains(j) / noise_power);
    return total;
}

} // namespace hbsim

#endif
