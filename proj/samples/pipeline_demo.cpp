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
//
// Minimal walkthrough of the library: draw a frequency-selective channel,
// schedule users under a rank budget, factor the digital precoder into the
// phase-shifter architecture and quantize it onto the fixed bank.

#include <iostream>

#include "hbsim/hbsim.hpp"

int main()
{
    using namespace hbsim;

    std::mt19937_64 rng = substream(/*master seed*/ 42, /*stream*/ 0);
    const arma::uword n_antennas = 32, n_users = 12, n_taps = 8, n_subcarriers = 8;

    const TimeDomainChannel taps = draw_rayleigh_taps(n_antennas, n_users, n_taps, rng);
    const FrequencyChannel channels = to_frequency(taps, n_subcarriers);

    SchedulerConfig cfg;
    cfg.mode = BeamformingMode::hb;
    cfg.n_rf = 8;
    cfg.max_users = 6;
    cfg.power_budget = 4.0;
    cfg.noise_power = 1.0;
    cfg.policy = PowerPolicy::waterfill;

    CppsOptions cpps;
    cpps.precision = 2;

    const BeamformedResult result = schedule_and_beamform(channels, cfg, cpps);

    std::cout << "scheduled sum rate:  " << result.schedule.total_rate << " bits/s/Hz\n"
              << "stacked rank:        " << result.schedule.stacked_rank << " (budget "
              << cfg.n_rf << ")\n"
              << "phase-shifter pairs: " << result.phase_pair_count << "\n"
              << "bank error:          " << result.cpps_max_error << "\n"
              << "realized sum rate:   " << result.realized_total << " bits/s/Hz\n";

    for (arma::uword i = 0; i < n_subcarriers; i++)
    {
        std::cout << "sub-carrier " << i + 1 << ": users {";
        const auto &sc = result.schedule.per_subcarrier[i];
        for (std::size_t u = 0; u < sc.users.size(); u++)
            std::cout << (u ? ", " : "") << sc.users[u] + 1;
        std::cout << "}, rate " << sc.rate << "\n";
    }
    return 0;
}
