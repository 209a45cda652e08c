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

#ifndef hbsim_scheduler_H
#define hbsim_scheduler_H

#include <armadillo>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hbsim/channel.hpp"
#include "hbsim/cpps.hpp"
#include "hbsim/hybrid.hpp"
#include "hbsim/zf.hpp"

namespace hbsim
{

enum class BeamformingMode
{
    asb, // zero-forcing on the first n_rf antennas only
    hb,  // rank-constrained hybrid schedule
    db   // full digital schedule, the performance ceiling
};

inline std::string to_string(BeamformingMode m)
{
    switch (m)
    {
        case BeamformingMode::asb: return "asb";
        case BeamformingMode::hb: return "hb";
        default: return "db";
    }
}

struct SchedulerConfig
{
    BeamformingMode mode = BeamformingMode::db;
    arma::uword n_rf = 1;                    // RF chain count, bounds rank of the stacked precoder
    arma::uword max_users = 1;               // per-sub-carrier user cap
    double power_budget = 1.0;               // per sub-carrier
    double noise_power = 1.0;
    PowerPolicy policy = PowerPolicy::waterfill;
    double rank_tol = -1.0;
    bool fixed_user_count = false;           // serve exactly max_users when feasible
};

struct SubcarrierSchedule
{
    std::vector<arma::uword> users;   // selection order
    arma::cx_mat precoder;            // power-applied transmit columns
    arma::vec power;
    arma::vec gains;
    double rate = 0.0;
    std::vector<double> rate_trace;   // accepted objective after each added user
};

struct ScheduleOutcome
{
    BeamformingMode mode = BeamformingMode::db;
    std::vector<SubcarrierSchedule> per_subcarrier;
    double total_rate = 0.0;
    arma::uword stacked_rank = 0;
    bool phase2 = false;
    arma::uword s_tilde = 0;          // sub-carriers stacked to reach rank n_rf
    arma::cx_mat projection;          // orthonormal basis used in phase 2
    bool projection_padded = false;   // rank target never reached, basis padded

    arma::cx_mat stacked_precoders() const
    {
        std::vector<arma::cx_mat> blocks;
        blocks.reserve(per_subcarrier.size());
        for (const auto &sc : per_subcarrier)
            blocks.push_back(sc.precoder);
        return make_stack(blocks).combined;
    }
};

// Greedy user selection of one sub-carrier: repeatedly adds the candidate
// maximizing the ZF sum rate under the configured power policy, stopping on
// non-improvement, on the user cap, or when every remaining candidate leaves
// the channel matrix rank deficient. Ties pick the lowest user index.
inline SubcarrierSchedule phase1_greedy(const arma::cx_mat &channel, const std::vector<arma::uword> &pool,
                                        const SchedulerConfig &cfg)
{
    SubcarrierSchedule sched;
    std::vector<arma::uword> remaining = pool;
    std::vector<arma::uword> selected;

    ZfPrecoder current_zf;
    arma::vec current_power;
    double current_rate = 0.0;

    const arma::uword cap = std::min<arma::uword>(cfg.max_users, channel.n_rows);
    while (selected.size() < cap && !remaining.empty())
    {
        double best_rate = -1.0;
        std::size_t best_pos = remaining.size();
        ZfPrecoder best_zf;
        arma::vec best_power;

        arma::cx_mat trial(channel.n_rows, selected.size() + 1);
        for (std::size_t c = 0; c < selected.size(); c++)
            trial.col(c) = channel.col(selected[c]);

        for (std::size_t pos = 0; pos < remaining.size(); pos++)
        {
            trial.col(selected.size()) = channel.col(remaining[pos]);
            ZfPrecoder zf;
            if (!try_zf_precoder(trial, zf))
                continue; // candidate would make the user matrix rank deficient
            arma::vec p = allocate_power(cfg.policy, zf.gains, cfg.power_budget, cfg.noise_power);
            const double rate = zf_rate(zf.gains, p, cfg.noise_power);
            if (rate > best_rate)
            {
                best_rate = rate;
                best_pos = pos;
                best_zf = std::move(zf);
                best_power = std::move(p);
            }
        }

        if (best_pos == remaining.size())
            break; // no feasible candidate left
        if (!cfg.fixed_user_count && best_rate < current_rate)
            break; // adding any user no longer improves the objective

        selected.push_back(remaining[best_pos]);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_pos));
        current_zf = std::move(best_zf);
        current_power = std::move(best_power);
        current_rate = best_rate;
        sched.rate_trace.push_back(best_rate);
    }

    sched.users = std::move(selected);
    if (!sched.users.empty())
    {
        sched.precoder = apply_power(current_zf, current_power);
        sched.power = std::move(current_power);
        sched.gains = current_zf.gains;
        sched.rate = current_rate;
    }
    else
        sched.precoder.set_size(channel.n_rows, 0);
    return sched;
}

namespace detail
{

inline std::vector<arma::uword> full_pool(arma::uword n_users)
{
    std::vector<arma::uword> pool(n_users);
    for (arma::uword k = 0; k < n_users; k++)
        pool[k] = k;
    return pool;
}

inline ScheduleOutcome phase1_all(const FrequencyChannel &channels, const SchedulerConfig &cfg,
                                  BeamformingMode mode)
{
    ScheduleOutcome out;
    out.mode = mode;
    out.per_subcarrier.reserve(channels.n_subcarriers());
    for (arma::uword i = 0; i < channels.n_subcarriers(); i++)
    {
        out.per_subcarrier.push_back(
            phase1_greedy(channels.at(i), full_pool(channels.n_users()), cfg));
        out.total_rate += out.per_subcarrier.back().rate;
    }
    return out;
}

} // namespace detail

// Full digital schedule; the rank constraint is implicit when n_rf equals the
// antenna count.
inline ScheduleOutcome run_db(const FrequencyChannel &channels, const SchedulerConfig &cfg)
{
    ScheduleOutcome out = detail::phase1_all(channels, cfg, BeamformingMode::db);
    out.stacked_rank = numerical_rank(out.stacked_precoders(), cfg.rank_tol);
    return out;
}

// Antenna-selection baseline: schedules on the first n_rf antenna rows and
// embeds the precoders into the full array with zero rows elsewhere.
inline ScheduleOutcome run_asb(const FrequencyChannel &channels, const SchedulerConfig &cfg)
{
    const arma::uword n = channels.n_antennas();
    if (cfg.n_rf < 1 || cfg.n_rf > n)
        throw std::invalid_argument("run_asb: n_rf must be in [1, n_antennas]");

    ScheduleOutcome out;
    out.mode = BeamformingMode::asb;
    out.per_subcarrier.reserve(channels.n_subcarriers());
    for (arma::uword i = 0; i < channels.n_subcarriers(); i++)
    {
        const arma::cx_mat restricted = channels.at(i).rows(0, cfg.n_rf - 1);
        SubcarrierSchedule sched = phase1_greedy(restricted, detail::full_pool(channels.n_users()), cfg);
        arma::cx_mat embedded(n, sched.precoder.n_cols, arma::fill::zeros);
        if (sched.precoder.n_cols > 0)
            embedded.rows(0, cfg.n_rf - 1) = sched.precoder;
        sched.precoder = std::move(embedded);
        out.total_rate += sched.rate;
        out.per_subcarrier.push_back(std::move(sched));
    }
    out.stacked_rank = numerical_rank(out.stacked_precoders(), cfg.rank_tol);
    return out;
}

// Two-phase hybrid schedule. Phase I ignores the rank constraint; when the
// stacked precoder exceeds rank n_rf, phase II projects the system onto the
// dominant n_rf-dimensional subspace of the best sub-carriers' precoders and
// reschedules there.
inline ScheduleOutcome run_hb(const FrequencyChannel &channels, const SchedulerConfig &cfg)
{
    const arma::uword n = channels.n_antennas();
    if (cfg.n_rf < 1 || cfg.n_rf > n)
        throw std::invalid_argument("run_hb: n_rf must be in [1, n_antennas]");

    ScheduleOutcome out = detail::phase1_all(channels, cfg, BeamformingMode::hb);
    out.stacked_rank = numerical_rank(out.stacked_precoders(), cfg.rank_tol);
    if (out.stacked_rank <= cfg.n_rf)
        return out; // constraint already satisfied, keep the phase-I result

    const arma::uword n_sc = channels.n_subcarriers();

    // Sub-carriers sorted by decreasing phase-I objective, lowest index first
    // on ties.
    std::vector<arma::uword> order = detail::full_pool(n_sc);
    std::stable_sort(order.begin(), order.end(), [&](arma::uword a, arma::uword b) {
        return out.per_subcarrier[a].rate > out.per_subcarrier[b].rate;
    });

    // Grow the precoder stack until it reaches rank n_rf.
    arma::cx_mat top_stack;
    arma::uword s_tilde = 0;
    bool reached = false;
    for (arma::uword pos = 0; pos < n_sc; pos++)
    {
        top_stack = arma::join_rows(top_stack, out.per_subcarrier[order[pos]].precoder);
        s_tilde = pos + 1;
        if (numerical_rank(top_stack, cfg.rank_tol) >= cfg.n_rf)
        {
            reached = true;
            break;
        }
    }

    arma::cx_mat u, v;
    arma::vec s;
    if (!arma::svd(u, s, v, top_stack))
        throw std::runtime_error("run_hb: SVD of the sub-carrier stack failed");
    const arma::cx_mat projection = u.cols(0, cfg.n_rf - 1);

    // Reschedule on the projected channels and lift the result back.
    FrequencyChannel effective;
    effective.subcarrier.reserve(n_sc);
    for (arma::uword i = 0; i < n_sc; i++)
        effective.subcarrier.push_back(projection.t() * channels.at(i));

    ScheduleOutcome lifted = detail::phase1_all(effective, cfg, BeamformingMode::hb);
    for (auto &sc : lifted.per_subcarrier)
        sc.precoder = projection * sc.precoder;

    lifted.phase2 = true;
    lifted.s_tilde = s_tilde;
    lifted.projection = projection;
    lifted.projection_padded = !reached;
    lifted.stacked_rank = numerical_rank(lifted.stacked_precoders(), cfg.rank_tol);
    return lifted;
}

inline ScheduleOutcome run_schedule(const FrequencyChannel &channels, const SchedulerConfig &cfg)
{
    switch (cfg.mode)
    {
        case BeamformingMode::asb: return run_asb(channels, cfg);
        case BeamformingMode::hb: return run_hb(channels, cfg);
        default: return run_db(channels, cfg);
    }
}

// Rates of externally fixed user sets, with or without the antenna
// restriction. Used for like-for-like comparisons between the modes.
inline std::vector<double> evaluate_fixed_sets(const FrequencyChannel &channels,
                                               const std::vector<std::vector<arma::uword>> &sets,
                                               const SchedulerConfig &cfg, bool restrict_antennas)
{
    if (sets.size() != channels.n_subcarriers())
        throw std::invalid_argument("evaluate_fixed_sets: one user set per sub-carrier required");
    std::vector<double> rates;
    rates.reserve(sets.size());
    for (arma::uword i = 0; i < sets.size(); i++)
    {
        if (sets[i].empty())
        {
            rates.push_back(0.0);
            continue;
        }
        arma::cx_mat h = channels.at(i);
        if (restrict_antennas)
            h = h.rows(0, cfg.n_rf - 1);
        arma::cx_mat sub(h.n_rows, sets[i].size());
        for (std::size_t c = 0; c < sets[i].size(); c++)
            sub.col(c) = h.col(sets[i][c]);
        const ZfPrecoder zf =
            zf_precoder(sub, "sub-carrier " + std::to_string(i + 1) + ", " +
                                 std::to_string(sets[i].size()) + " users");
        const arma::vec p = allocate_power(cfg.policy, zf.gains, cfg.power_budget, cfg.noise_power);
        rates.push_back(zf_rate(zf.gains, p, cfg.noise_power));
    }
    return rates;
}

struct CppsOptions
{
    int precision = 0;           // 0 disables the fixed-bank realization
    bool symmetric = false;
    arma::uword column_cap = 0;  // 0 = default ceil(N/10) in symmetric mode
};

// Schedule plus the realization chain: factorization of the stacked digital
// precoder and, optionally, its fixed-bank quantization. Realized rates are
// evaluated with the realized analog matrix so quantization error propagates
// into them.
struct BeamformedResult
{
    ScheduleOutcome schedule;
    bool factorized = false;
    HybridFactorization factorization;
    arma::uword phase_pair_count = 0;
    bool quantized = false;
    CppsRealization cpps;
    double cpps_max_error = 0.0;
    std::vector<double> realized_rates;
    double realized_total = 0.0;
};

namespace detail
{

// Rate of one sub-carrier transmitted through a fixed analog matrix: the
// baseband ZF is re-solved against the effective channel so the transmit
// vector is confined to the analog column space, with the power constraint
// metered on the transmitted signal analog * baseband. The digital precoder
// lies inside the exact factorization's column space, so the unquantized
// realization reproduces the digital rate; a quantized analog matrix can only
// shrink the feasible set.
inline double realized_subcarrier_rate(const arma::cx_mat &analog_basis, const arma::cx_mat &channel,
                                       const SchedulerConfig &cfg)
{
    const arma::cx_mat effective = analog_basis.t() * channel;
    ZfPrecoder zf;
    if (!try_zf_precoder(effective, zf))
        return 0.0; // the analog front-end cannot separate these users
    const arma::vec p = allocate_power(cfg.policy, zf.gains, cfg.power_budget, cfg.noise_power);
    const arma::cx_mat transmit = analog_basis * apply_power(zf, p);
    return sum_rate_effective(channel, transmit, cfg.noise_power).sum;
}

} // namespace detail

inline BeamformedResult schedule_and_beamform(const FrequencyChannel &channels,
                                              const SchedulerConfig &cfg,
                                              const CppsOptions &opts = {})
{
    BeamformedResult result;
    result.schedule = run_schedule(channels, cfg);

    const arma::uword n_sc = channels.n_subcarriers();
    result.realized_rates.assign(n_sc, 0.0);

    if (cfg.mode == BeamformingMode::asb)
    {
        for (arma::uword i = 0; i < n_sc; i++)
            result.realized_rates[i] = result.schedule.per_subcarrier[i].rate;
        result.realized_total = result.schedule.total_rate;
        return result;
    }

    std::vector<arma::cx_mat> blocks;
    blocks.reserve(n_sc);
    for (const auto &sc : result.schedule.per_subcarrier)
        blocks.push_back(sc.precoder);
    const DigitalStack stack = make_stack(blocks, cfg.rank_tol);

    result.factorization = factorize(stack);
    result.factorized = true;
    result.phase_pair_count = expand_to_phases(result.factorization.analog).size();

    arma::cx_mat analog = result.factorization.analog;
    if (opts.precision >= 1)
    {
        const CppsBank bank = build_bank(opts.precision);
        result.cpps = opts.symmetric ? assign_symmetric(analog, bank, opts.column_cap)
                                     : assign_asymmetric(analog, bank);
        result.cpps_max_error = result.cpps.max_component_error();
        result.quantized = true;
        analog = result.cpps.realized;
    }

    const arma::cx_mat analog_basis = arma::orth(analog);
    for (arma::uword i = 0; i < n_sc; i++)
    {
        const auto &sc = result.schedule.per_subcarrier[i];
        if (sc.users.empty())
            continue;
        arma::cx_mat h(channels.n_antennas(), sc.users.size());
        for (std::size_t c = 0; c < sc.users.size(); c++)
            h.col(c) = channels.at(i).col(sc.users[c]);
        result.realized_rates[i] = detail::realized_subcarrier_rate(analog_basis, h, cfg);
        result.realized_total += result.realized_rates[i];
    }
    return result;
}

} // namespace hbsim

#endif
