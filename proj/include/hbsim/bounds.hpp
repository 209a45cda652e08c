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

#ifndef hbsim_bounds_H
#define hbsim_bounds_H

#include <armadillo>
#include <cmath>
#include <random>
#include <stdexcept>

namespace hbsim
{

namespace detail
{

// Regularized lower incomplete gamma P(a, x): series below a + 1, continued
// fraction above. Accurate to ~1e-14 over the ranges used here.
inline double gamma_p_series(double a, double x)
{
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int n = 0; n < 500; n++)
    {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::abs(term) < std::abs(sum) * 1e-16)
            break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

inline double gamma_q_contfrac(double a, double x)
{
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; i++)
    {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny)
            d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny)
            c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-16)
            break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

} // namespace detail

inline double gamma_p(double a, double x)
{
    if (a <= 0.0 || x < 0.0)
        throw std::domain_error("gamma_p: require a > 0 and x >= 0");
    if (x == 0.0)
        return 0.0;
    if (x < a + 1.0)
        return detail::gamma_p_series(a, x);
    return 1.0 - detail::gamma_q_contfrac(a, x);
}

inline double gamma_q(double a, double x)
{
    if (a <= 0.0 || x < 0.0)
        throw std::domain_error("gamma_q: require a > 0 and x >= 0");
    if (x == 0.0)
        return 1.0;
    if (x < a + 1.0)
        return 1.0 - detail::gamma_p_series(a, x);
    return detail::gamma_q_contfrac(a, x);
}

inline double chi2_cdf(double x, double dof)
{
    return x <= 0.0 ? 0.0 : gamma_p(dof / 2.0, x / 2.0);
}

inline double chi2_pdf(double x, double dof)
{
    if (x <= 0.0)
        return 0.0;
    const double half = dof / 2.0;
    return std::exp((half - 1.0) * std::log(x) - x / 2.0 - half * std::log(2.0) - std::lgamma(half));
}

// Maximum of `group_count` i.i.d. chi-square variables with `dof` degrees of
// freedom each.
struct ChiMaxSpec
{
    arma::uword dof = 1;
    arma::uword group_count = 1;
};

namespace detail
{

// Composite trapezoid of f on [0, hi] under the substitution x = u^2, which
// removes the integrable pdf singularity at zero for dof = 1. The caller
// supplies the analytic limit of 2u * f(u^2) at u = 0 (nonzero only for
// dof = 1). Doubles the resolution until the relative change falls below 1e-6.
template <typename F>
double trapezoid_refined(F integrand_x, double x_hi, double at_zero)
{
    const double u_hi = std::sqrt(x_hi);
    auto g = [&](double u) { return 2.0 * u * integrand_x(u * u); };

    arma::uword n = 256;
    double h = u_hi / static_cast<double>(n);
    double previous = 0.0;
    double sum_interior = 0.0;
    for (arma::uword i = 1; i < n; i++)
        sum_interior += g(h * static_cast<double>(i));
    double estimate = h * (0.5 * (at_zero + g(u_hi)) + sum_interior);

    for (int pass = 0; pass < 14; pass++)
    {
        previous = estimate;
        // add the midpoints of the current grid
        double mids = 0.0;
        for (arma::uword i = 0; i < n; i++)
            mids += g(h * (static_cast<double>(i) + 0.5));
        n *= 2;
        h *= 0.5;
        estimate = 0.5 * previous + h * mids;
        if (std::abs(estimate - previous) <= 1e-6 * std::abs(estimate))
            return estimate;
    }
    return estimate;
}

inline double tail_mass(const ChiMaxSpec &spec, double x_hi)
{
    // union bound on 1 - F(x_hi)^L
    return static_cast<double>(spec.group_count) *
           gamma_q(static_cast<double>(spec.dof) / 2.0, x_hi / 2.0);
}

inline double chi_max_upper_cut(const ChiMaxSpec &spec)
{
    const double m = static_cast<double>(spec.dof);
    const double l = static_cast<double>(spec.group_count);
    double x_hi = m + 2.0 * l + 20.0 * std::sqrt(2.0 * m) * (1.0 + std::log(l));
    // extend until the discarded mass is negligible (small dof needs more room)
    for (int i = 0; i < 64 && !(tail_mass(spec, x_hi) < 1e-10); i++)
        x_hi *= 1.25;
    return x_hi;
}

inline void check_tail(const ChiMaxSpec &spec, double x_hi)
{
    if (!(tail_mass(spec, x_hi) < 1e-10))
        throw std::logic_error("chi_max quadrature: truncated tail mass is not negligible");
}

} // namespace detail

// E{max of L chi-square(M)} by quadrature of x * L * F(x)^(L-1) * f(x).
inline double chi_max_mean_integral(const ChiMaxSpec &spec)
{
    if (spec.dof < 1 || spec.group_count < 1)
        throw std::invalid_argument("chi_max_mean_integral: dof and group_count must be >= 1");
    const double m = static_cast<double>(spec.dof);
    const double l = static_cast<double>(spec.group_count);
    const double x_hi = detail::chi_max_upper_cut(spec);
    detail::check_tail(spec, x_hi);
    return detail::trapezoid_refined(
        [&](double x) {
            return x * l * std::pow(chi2_cdf(x, m), l - 1.0) * chi2_pdf(x, m);
        },
        x_hi, 0.0);
}

// Total mass of the max-order-statistic pdf under the same quadrature; should
// be 1 and is exposed for validation.
inline double chi_max_pdf_mass(const ChiMaxSpec &spec)
{
    const double m = static_cast<double>(spec.dof);
    const double l = static_cast<double>(spec.group_count);
    const double x_hi = detail::chi_max_upper_cut(spec);
    detail::check_tail(spec, x_hi);
    // 2u * f(u^2) tends to sqrt(2/pi) for one dof; otherwise it vanishes
    const double at_zero =
        (spec.dof == 1 && spec.group_count == 1) ? std::sqrt(2.0 / arma::datum::pi) : 0.0;
    return detail::trapezoid_refined(
        [&](double x) { return l * std::pow(chi2_cdf(x, m), l - 1.0) * chi2_pdf(x, m); }, x_hi,
        at_zero);
}

// Closed form for dof = 2: the maximum of L unit-rate exponentials scaled by
// 2, i.e. twice the L-th harmonic number.
inline double chi_max_mean_closed_dof2(arma::uword group_count)
{
    if (group_count < 1)
        throw std::invalid_argument("chi_max_mean_closed_dof2: group_count must be >= 1");
    double harmonic = 0.0;
    for (arma::uword k = 1; k <= group_count; k++)
        harmonic += 1.0 / static_cast<double>(k);
    return 2.0 * harmonic;
}

struct ChiMaxMcResult
{
    double mean = 0.0;
    double std_error = 0.0;
};

// Sample-mean oracle: max of L gamma(M/2, 2) draws per trial.
inline ChiMaxMcResult chi_max_mc_oracle(const ChiMaxSpec &spec, arma::uword trials, std::mt19937_64 &rng)
{
    if (trials < 2)
        throw std::invalid_argument("chi_max_mc_oracle: need at least 2 trials");
    std::gamma_distribution<double> chi2(static_cast<double>(spec.dof) / 2.0, 2.0);
    double sum = 0.0;
    double sum_sq = 0.0;
    for (arma::uword t = 0; t < trials; t++)
    {
        double best = 0.0;
        for (arma::uword g = 0; g < spec.group_count; g++)
            best = std::max(best, chi2(rng));
        sum += best;
        sum_sq += best * best;
    }
    ChiMaxMcResult r;
    const double n = static_cast<double>(trials);
    r.mean = sum / n;
    const double var = (sum_sq - n * r.mean * r.mean) / (n - 1.0);
    r.std_error = std::sqrt(var / n);
    return r;
}

// Average-rate bound parameters; the derived group counts follow the ceiling
// expressions of the rate analysis.
struct BoundParams
{
    arma::uword n_antennas = 1;
    arma::uword n_rf = 1;
    arma::uword users_per_subcarrier = 1; // K, fixed
    arma::uword total_users = 1;          // K_t
    arma::uword n_subcarriers = 1;
    double power_budget = 1.0;            // P per sub-carrier
    double noise_power = 1.0;
    arma::uword s_tilde = 0;              // 0 = default ceil(n_rf / K)

    arma::uword group_count() const
    {
        return (total_users + users_per_subcarrier - 1) / users_per_subcarrier;
    }
    arma::uword stacked_group_count() const
    {
        const arma::uword num = total_users * n_subcarriers;
        const arma::uword den = users_per_subcarrier * n_rf;
        return (num + den - 1) / den;
    }
    arma::uword effective_s_tilde() const
    {
        if (s_tilde > 0)
            return s_tilde;
        return (n_rf + users_per_subcarrier - 1) / users_per_subcarrier;
    }
};

struct AverageRateBounds
{
    double asb = 0.0;
    double db = 0.0;
    double hb = 0.0;
};

// Upper bounds on the average sum rate (bits/s/Hz) of the three approaches
// under ZF with equal power and a fixed per-sub-carrier user count.
inline AverageRateBounds average_rate_bounds(const BoundParams &p)
{
    if (p.users_per_subcarrier > p.n_rf || p.n_rf > p.n_antennas)
        throw std::invalid_argument("average_rate_bounds: require K <= n_rf <= n_antennas");
    const double k = static_cast<double>(p.users_per_subcarrier);
    const double nf = static_cast<double>(p.n_subcarriers);
    const double snr_scale = p.power_budget / (k * p.noise_power);

    const arma::uword dof_restricted = p.n_rf - p.users_per_subcarrier + 1;
    const arma::uword dof_full = p.n_antennas - p.users_per_subcarrier + 1;

    const double gain_restricted = chi_max_mean_integral({dof_restricted, p.group_count()});
    const double gain_full = chi_max_mean_integral({dof_full, p.group_count()});
    const double gain_stacked = chi_max_mean_integral({dof_full, p.stacked_group_count()});

    AverageRateBounds b;
    b.asb = k * nf * std::log2(1.0 + snr_scale * gain_restricted);
    b.db = k * nf * std::log2(1.0 + snr_scale * gain_full);
    const double st = static_cast<double>(std::min<arma::uword>(p.effective_s_tilde(), p.n_subcarriers));
    b.hb = k * st * std::log2(1.0 + snr_scale * gain_stacked) +
           k * (nf - st) * std::log2(1.0 + snr_scale * gain_restricted);
    return b;
}

} // namespace hbsim

#endif
