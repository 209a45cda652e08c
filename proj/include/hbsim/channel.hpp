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

#ifndef hbsim_channel_H
#define hbsim_channel_H

#include <armadillo>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "hbsim/rng.hpp"

namespace hbsim
{

// Uniform linear array at the transmitter. Wavelength and spacing share
// arbitrary units; the default spacing is half a wavelength.
struct ArrayGeometry
{
    arma::uword n_antennas = 1;
    double wavelength = 1.0;
    double spacing = 0.5;

    static ArrayGeometry half_wavelength(arma::uword n)
    {
        return ArrayGeometry{n, 1.0, 0.5};
    }
};

// Geometric multipath parameters: per-user pathloss and a (user x path)
// matrix of departure angles in radians.
struct GeometricParams
{
    arma::uword n_scatterers = 1; // paths per user
    arma::uword n_taps = 1;
    arma::vec pathloss;  // length = number of users
    arma::mat aod;       // n_users x n_scatterers, radians
};

// Multipath taps per user: each matrix is n_antennas x n_taps.
struct TimeDomainChannel
{
    std::vector<arma::cx_mat> taps;

    arma::uword n_users() const { return static_cast<arma::uword>(taps.size()); }
    arma::uword n_antennas() const { return taps.empty() ? 0 : taps.front().n_rows; }
    arma::uword n_taps() const { return taps.empty() ? 0 : taps.front().n_cols; }
};

// Per-sub-carrier channel matrices, n_antennas x n_users each; column k of
// subcarrier i holds the frequency-domain channel vector of user k.
struct FrequencyChannel
{
    std::vector<arma::cx_mat> subcarrier;

    arma::uword n_subcarriers() const { return static_cast<arma::uword>(subcarrier.size()); }
    arma::uword n_users() const { return subcarrier.empty() ? 0 : subcarrier.front().n_cols; }
    arma::uword n_antennas() const { return subcarrier.empty() ? 0 : subcarrier.front().n_rows; }

    const arma::cx_mat &at(arma::uword i) const { return subcarrier.at(i); }
};

// Structured departure-angle generator: path sines are confined to n_bins
// grid points (spaced 2/N, scaled by sin(base_angle)) plus a uniform jitter.
struct GridAodSpec
{
    double base_angle;       // radians; scales the sine grid
    arma::uword n_bins;      // number of grid sines
    double jitter;           // half-width added uniformly to each grid sine

    static GridAodSpec for_array(arma::uword n_antennas, arma::uword n_bins,
                                 double base_angle = 1.5707963267948966)
    {
        return GridAodSpec{base_angle, n_bins, 1.0 / (2.0 * static_cast<double>(n_antennas))};
    }
};

// Array response vector for departure angle theta; entry n carries the phase
// n * (2*pi/lambda) * spacing * sin(theta), normalized to unit norm.
inline arma::cx_vec ula_steering(double theta, const ArrayGeometry &geom)
{
    const arma::uword n = geom.n_antennas;
    const double phase_step = (2.0 * arma::datum::pi / geom.wavelength) * geom.spacing * std::sin(theta);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    arma::cx_vec v(n);
    for (arma::uword a = 0; a < n; a++)
        v(a) = std::polar(scale, phase_step * static_cast<double>(a));
    return v;
}

// Steering matrix of one user: columns are the responses of its paths.
inline arma::cx_mat steering_matrix(const arma::rowvec &aods, const ArrayGeometry &geom)
{
    arma::cx_mat tau(geom.n_antennas, aods.n_elem);
    for (arma::uword m = 0; m < aods.n_elem; m++)
        tau.col(m) = ula_steering(aods(m), geom);
    return tau;
}

// Geometric channel taps: tap q of user k is tau_k * c_k(q) with i.i.d.
// standard complex Gaussian path coefficients scaled by
// sqrt(N / (L_s * rho_k * L_p)); the extra 1/L_p keeps every frequency-domain
// coefficient at the same variance regardless of the tap count.
inline TimeDomainChannel draw_geometric_taps(const ArrayGeometry &geom, const GeometricParams &params,
                                             std::mt19937_64 &rng)
{
    if (params.n_scatterers < 1 || params.n_taps < 1)
        throw std::invalid_argument("draw_geometric_taps: n_scatterers and n_taps must be >= 1");
    if (params.aod.n_cols != params.n_scatterers)
        throw std::invalid_argument("draw_geometric_taps: aod must have n_scatterers columns");
    if (params.pathloss.n_elem != params.aod.n_rows)
        throw std::invalid_argument("draw_geometric_taps: pathloss length must match aod rows");
    if (arma::any(params.pathloss <= 0.0))
        throw std::invalid_argument("draw_geometric_taps: pathloss must be positive");

    const arma::uword n_users = params.aod.n_rows;
    const double n_ant = static_cast<double>(geom.n_antennas);
    const double n_paths = static_cast<double>(params.n_scatterers);
    const double n_taps = static_cast<double>(params.n_taps);

    TimeDomainChannel ch;
    ch.taps.reserve(n_users);
    for (arma::uword k = 0; k < n_users; k++)
    {
        const arma::cx_mat tau = steering_matrix(params.aod.row(k), geom);
        const double scale = std::sqrt(n_ant / (n_paths * params.pathloss(k) * n_taps));
        arma::cx_mat user_taps(geom.n_antennas, params.n_taps);
        for (arma::uword q = 0; q < params.n_taps; q++)
        {
            const arma::cx_vec coeff = scale * randn_complex_vec(params.n_scatterers, rng);
            user_taps.col(q) = tau * coeff;
        }
        ch.taps.push_back(std::move(user_taps));
    }
    return ch;
}

// i.i.d. Rayleigh taps with per-tap variance 1/L_p, so each frequency-domain
// coefficient has unit variance.
inline TimeDomainChannel draw_rayleigh_taps(arma::uword n_antennas, arma::uword n_users,
                                            arma::uword n_taps, std::mt19937_64 &rng)
{
    if (n_taps < 1)
        throw std::invalid_argument("draw_rayleigh_taps: n_taps must be >= 1");
    const double scale = 1.0 / std::sqrt(static_cast<double>(n_taps));
    TimeDomainChannel ch;
    ch.taps.reserve(n_users);
    for (arma::uword k = 0; k < n_users; k++)
        ch.taps.push_back(scale * randn_complex_mat(n_antennas, n_taps, rng));
    return ch;
}

// Frequency-domain conversion: coefficient of antenna n, user k, sub-carrier
// i is sum_s conj(tap(n,s)) * exp(-j*2*pi*i*s/N_f).
inline FrequencyChannel to_frequency(const TimeDomainChannel &ch, arma::uword n_subcarriers)
{
    if (ch.taps.empty())
        throw std::invalid_argument("to_frequency: empty channel");
    if (ch.n_taps() > n_subcarriers)
        throw std::invalid_argument("to_frequency: tap count exceeds sub-carrier count");

    const arma::uword n_users = ch.n_users();
    const arma::uword n_ant = ch.n_antennas();

    FrequencyChannel fc;
    fc.subcarrier.assign(n_subcarriers, arma::cx_mat(n_ant, n_users));
    arma::cx_vec padded(n_subcarriers);
    for (arma::uword k = 0; k < n_users; k++)
    {
        if (ch.taps[k].n_rows != n_ant || ch.taps[k].n_cols != ch.n_taps())
            throw std::invalid_argument("to_frequency: inconsistent tap dimensions across users");
        // fft of each antenna's zero-padded, conjugated tap sequence
        for (arma::uword n = 0; n < n_ant; n++)
        {
            padded.zeros();
            padded.head(ch.n_taps()) = arma::conj(ch.taps[k].row(n)).st();
            const arma::cx_vec spectrum = arma::fft(padded);
            for (arma::uword i = 0; i < n_subcarriers; i++)
                fc.subcarrier[i](n, k) = spectrum(i);
        }
    }
    return fc;
}

// Grid sines for the structured-AOD construction: s_n = 2(n-1)/N * sin(base),
// n = 1..n_bins. Kept separate so tests can inspect the grid directly.
inline arma::vec grid_aod_sines(const GridAodSpec &spec, arma::uword n_antennas)
{
    const double scale = std::sin(spec.base_angle);
    arma::vec grid(spec.n_bins);
    for (arma::uword n = 0; n < spec.n_bins; n++)
        grid(n) = 2.0 * static_cast<double>(n) / static_cast<double>(n_antennas) * scale;
    return grid;
}

// Draws departure angles whose sines sit within `jitter` of one of the
// n_bins grid sines. Rejects specs whose grid leaves [-1, 1].
inline arma::mat draw_grid_aods(const GridAodSpec &spec, arma::uword n_antennas,
                                 arma::uword n_users, arma::uword n_paths, std::mt19937_64 &rng)
{
    if (spec.n_bins < 1)
        throw std::invalid_argument("draw_grid_aods: n_bins must be >= 1");
    const arma::vec grid = grid_aod_sines(spec, n_antennas);
    if (grid.max() + spec.jitter > 1.0 || grid.min() - spec.jitter < -1.0)
        throw std::invalid_argument("draw_grid_aods: grid sines leave [-1, 1]");

    std::uniform_int_distribution<arma::uword> pick(0, spec.n_bins - 1);
    arma::mat aod(n_users, n_paths);
    for (arma::uword k = 0; k < n_users; k++)
        for (arma::uword m = 0; m < n_paths; m++)
        {
            const double s = grid(pick(rng)) + rand_uniform(rng, -spec.jitter, spec.jitter);
            const double theta = std::asin(s);
            aod(k, m) = theta >= 0.0 ? theta : theta + 2.0 * arma::datum::pi;
        }
    return aod;
}

// Unstructured AODs, uniform on [0, 2*pi].
inline arma::mat gen_uniform_aods(arma::uword n_users, arma::uword n_paths, std::mt19937_64 &rng)
{
    arma::mat aod(n_users, n_paths);
    for (arma::uword k = 0; k < n_users; k++)
        for (arma::uword m = 0; m < n_paths; m++)
            aod(k, m) = rand_uniform(rng, 0.0, 2.0 * arma::datum::pi);
    return aod;
}

} // namespace hbsim

#endif
