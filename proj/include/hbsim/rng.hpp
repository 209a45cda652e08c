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

#ifndef hbsim_rng_H
#define hbsim_rng_H

#include <armadillo>
#include <cstdint>
#include <random>

namespace hbsim
{

// SplitMix64 step; used to derive independent substream seeds from a master
// seed so Monte Carlo trials stay reproducible under any execution order.
inline std::uint64_t splitmix64(std::uint64_t &state)
{
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Seed-derived substream: stream `id` of the master seed. Two calls with the
// same (master, id) produce engines with identical output sequences.
inline std::mt19937_64 substream(std::uint64_t master_seed, std::uint64_t id)
{
    std::uint64_t s = master_seed;
    std::uint64_t a = splitmix64(s);
    s ^= 0xD1B54A32D192ED03ULL * (id + 1);
    std::uint64_t b = splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

// Standard circularly-symmetric complex Gaussian scalar, E{|z|^2} = 1.
inline arma::cx_double randn_complex(std::mt19937_64 &rng)
{
    static constexpr double inv_sqrt2 = 0.70710678118654752440;
    std::normal_distribution<double> n01(0.0, 1.0);
    const double re = n01(rng);
    const double im = n01(rng);
    return {re * inv_sqrt2, im * inv_sqrt2};
}

inline arma::cx_mat randn_complex_mat(arma::uword n_rows, arma::uword n_cols, std::mt19937_64 &rng)
{
    arma::cx_mat out(n_rows, n_cols);
    for (arma::uword c = 0; c < n_cols; c++)
        for (arma::uword r = 0; r < n_rows; r++)
            out(r, c) = randn_complex(rng);
    return out;
}

inline arma::cx_vec randn_complex_vec(arma::uword n, std::mt19937_64 &rng)
{
    arma::cx_vec out(n);
    for (arma::uword i = 0; i < n; i++)
        out(i) = randn_complex(rng);
    return out;
}

inline double rand_uniform(std::mt19937_64 &rng, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    return u(rng);
}

} // namespace hbsim

#endif
