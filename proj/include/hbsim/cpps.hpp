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

#ifndef hbsim_cpps_H
#define hbsim_cpps_H

#include <armadillo>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hbsim/hybrid.hpp"

namespace hbsim
{

// The four sections of the fixed phase-shifter-pair bank. Each section holds
// one pair per (decimal place, digit) combination.
enum class BankSection : int
{
    real_positive = 0,
    real_negative = 1,
    imag_positive = 2,
    imag_negative = 3
};

// Slot of the bank: decimal place 1..p, digit 1..10. A pair at (place l,
// digit d) contributes 2 * d * 10^-l on the section's axis and sign.
struct BankSlot
{
    BankSection section;
    int place = 1;
    int digit = 1;
};

// Fixed bank of constant-phase pair sums, 40p pairs for precision 10^-p.
// The bank depends only on p, never on the matrix it will realize.
struct CppsBank
{
    static constexpr int digits_per_place = 10;

    int precision = 1;     // p
    arma::cx_vec values;   // length 40p, the complex sum contributed by each pair

    arma::uword size() const { return values.n_elem; }

    arma::uword index(const BankSlot &slot) const
    {
        const arma::uword section_len = static_cast<arma::uword>(digits_per_place) * precision;
        return static_cast<arma::uword>(static_cast<int>(slot.section)) * section_len +
               static_cast<arma::uword>(slot.place - 1) * digits_per_place +
               static_cast<arma::uword>(slot.digit - 1);
    }
};

inline CppsBank build_bank(int precision)
{
    if (precision < 1 || precision > 12)
        throw std::invalid_argument("build_bank: precision must be in [1, 12]");
    CppsBank bank;
    bank.precision = precision;
    bank.values.set_size(static_cast<arma::uword>(40) * precision);
    for (int section = 0; section < 4; section++)
        for (int place = 1; place <= precision; place++)
            for (int digit = 1; digit <= CppsBank::digits_per_place; digit++)
            {
                const double v = 2.0 * digit * std::pow(10.0, -place);
                arma::cx_double sum;
                switch (static_cast<BankSection>(section))
                {
                    case BankSection::real_positive: sum = {v, 0.0}; break;
                    case BankSection::real_negative: sum = {-v, 0.0}; break;
                    case BankSection::imag_positive: sum = {0.0, v}; break;
                    case BankSection::imag_negative: sum = {0.0, -v}; break;
                }
                bank.values(bank.index({static_cast<BankSection>(section), place, digit})) = sum;
            }
    return bank;
}

// The two phase shifters behind a bank slot: the unit-modulus pair summing to
// the slot's contribution. Exposed for audits of the physical phase sets.
inline PhasePair bank_slot_phases(const BankSlot &slot)
{
    const double v = 2.0 * slot.digit * std::pow(10.0, -slot.place);
    switch (slot.section)
    {
        case BankSection::real_positive: return phase_pair_real(v);
        case BankSection::real_negative: return phase_pair_real(-v);
        case BankSection::imag_positive: return phase_pair_imag(v);
        default: return phase_pair_imag(-v);
    }
}

namespace detail
{

// Digits of round(|x|/2 * 10^p), most significant place first. digit 10 at
// place 1 encodes the full-scale value 2.
inline void component_digits(double x, int precision, bool imaginary, std::vector<BankSlot> &out)
{
    const double mag = std::abs(x);
    if (mag > 2.0 + amplitude_slack)
        throw std::domain_error("quantize_entry: component magnitude exceeds 2");
    const double unit = std::min(1.0, mag / 2.0);
    const double tens = std::pow(10.0, precision);
    std::int64_t n = static_cast<std::int64_t>(std::llround(unit * tens));

    const bool negative = x < 0.0;
    const BankSection section = imaginary
        ? (negative ? BankSection::imag_negative : BankSection::imag_positive)
        : (negative ? BankSection::real_negative : BankSection::real_positive);

    if (n == static_cast<std::int64_t>(tens))
    {
        out.push_back({section, 1, 10});
        return;
    }
    std::int64_t base = static_cast<std::int64_t>(tens) / 10;
    for (int place = 1; place <= precision; place++)
    {
        const int digit = static_cast<int>(n / base);
        n -= static_cast<std::int64_t>(digit) * base;
        base /= 10;
        if (digit > 0)
            out.push_back({section, place, digit});
    }
}

} // namespace detail

// Rounds both components of z to p decimal places of z/2 and decomposes each
// into one pair per nonzero digit. Reconstruction error per component is at
// most 10^-p.
inline std::vector<BankSlot> quantize_entry(arma::cx_double z, int precision)
{
    std::vector<BankSlot> slots;
    detail::component_digits(z.real(), precision, false, slots);
    detail::component_digits(z.imag(), precision, true, slots);
    return slots;
}

inline arma::cx_double slots_value(const std::vector<BankSlot> &slots, const CppsBank &bank)
{
    arma::cx_double sum = 0.0;
    for (const auto &s : slots)
        sum += bank.values(bank.index(s));
    return sum;
}

// Bank plus per-RF-chain binary switch matrices and the realized analog
// matrix. The bank (phases) is shared by all RF chains; the switch matrices
// are independent.
struct CppsRealization
{
    CppsBank bank;
    std::vector<arma::umat> switches; // one N x 40p binary matrix per RF chain
    arma::cx_mat realized;            // N x r, column i = switches[i] * bank values
    arma::cx_mat target;
    arma::uword column_cap = 0;       // max antennas per pair (per RF chain)
    arma::uword row_cap = 0;          // max pairs per antenna (per RF chain)

    double max_component_error() const
    {
        const arma::cx_mat err = realized - target;
        return std::max(arma::abs(arma::real(err)).max(), arma::abs(arma::imag(err)).max());
    }

    double max_column_sq_error() const
    {
        const arma::cx_mat err = realized - target;
        double worst = 0.0;
        for (arma::uword c = 0; c < err.n_cols; c++)
            worst = std::max(worst, std::pow(arma::norm(err.col(c)), 2.0));
        return worst;
    }
};

// Recomputes the analog matrix from switch matrices and the bank.
inline arma::cx_mat realized_matrix(const std::vector<arma::umat> &switches, const CppsBank &bank)
{
    if (switches.empty())
        throw std::invalid_argument("realized_matrix: no switch matrices");
    const arma::uword n = switches.front().n_rows;
    arma::cx_mat out(n, static_cast<arma::uword>(switches.size()), arma::fill::zeros);
    for (arma::uword i = 0; i < switches.size(); i++)
    {
        const arma::umat &s = switches[i];
        if (s.n_rows != n || s.n_cols != bank.size())
            throw std::invalid_argument("realized_matrix: switch matrix dimension mismatch");
        for (arma::uword m = 0; m < s.n_cols; m++)
            for (arma::uword j = 0; j < n; j++)
                if (s(j, m))
                    out(j, i) += bank.values(m);
    }
    return out;
}

// Asymmetric signal flow: every pair may feed up to N antennas, every antenna
// uses at most 2p pairs per RF chain. Guarantees per-component error <= 10^-p.
inline CppsRealization assign_asymmetric(const arma::cx_mat &target, const CppsBank &bank)
{
    const arma::uword n = target.n_rows;
    CppsRealization real;
    real.bank = bank;
    real.target = target;
    real.column_cap = n;
    real.row_cap = static_cast<arma::uword>(2 * bank.precision);
    real.switches.assign(target.n_cols, arma::umat(n, bank.size(), arma::fill::zeros));
    for (arma::uword i = 0; i < target.n_cols; i++)
        for (arma::uword j = 0; j < n; j++)
            for (const auto &slot : quantize_entry(target(j, i), bank.precision))
                real.switches[i](j, bank.index(slot)) = 1;
    real.realized = realized_matrix(real.switches, bank);
    return real;
}

// Symmetric signal flow: each pair additionally feeds at most `column_cap`
// antennas. A full digit bucket redirects the request to the nearest digit of
// the same place and sign with free capacity (ties toward zero; digit 0 drops
// the pair). Accuracy degrades gracefully and is reported, never raised.
inline CppsRealization assign_symmetric(const arma::cx_mat &target, const CppsBank &bank,
                                        arma::uword column_cap = 0)
{
    const arma::uword n = target.n_rows;
    if (column_cap == 0)
        column_cap = (n + 9) / 10; // balanced load over the ten digits of a place
    if (column_cap < 2)
        throw std::invalid_argument("assign_symmetric: column cap must be >= 2");

    CppsRealization real;
    real.bank = bank;
    real.target = target;
    real.column_cap = column_cap;
    real.row_cap = static_cast<arma::uword>(2 * bank.precision);
    real.switches.assign(target.n_cols, arma::umat(n, bank.size(), arma::fill::zeros));

    struct Request
    {
        arma::uword antenna;
        BankSlot slot;
    };

    for (arma::uword i = 0; i < target.n_cols; i++)
    {
        std::vector<Request> requests;
        for (arma::uword j = 0; j < n; j++)
            for (const auto &slot : quantize_entry(target(j, i), bank.precision))
                requests.push_back({j, slot});

        // Largest contributions first; equal values resolve by antenna index.
        std::stable_sort(requests.begin(), requests.end(), [](const Request &a, const Request &b) {
            const double va = a.slot.digit * std::pow(10.0, -a.slot.place);
            const double vb = b.slot.digit * std::pow(10.0, -b.slot.place);
            return va > vb;
        });

        std::vector<arma::uword> load(bank.size(), 0);
        for (const auto &req : requests)
        {
            int chosen = -1;
            const int want = req.slot.digit;
            // Candidate digits ordered by distance from the request, ties
            // toward zero; 0 means the pair is dropped.
            for (int dist = 0; dist <= CppsBank::digits_per_place && chosen < 0; dist++)
                for (const int d : {want - dist, want + dist})
                {
                    if (d < 0 || d > CppsBank::digits_per_place || (dist > 0 && d == want))
                        continue;
                    if (d == 0)
                    {
                        chosen = 0;
                        break;
                    }
                    const arma::uword idx = bank.index({req.slot.section, req.slot.place, d});
                    if (load[idx] < column_cap)
                    {
                        chosen = d;
                        break;
                    }
                }
            if (chosen > 0)
            {
                const arma::uword idx = bank.index({req.slot.section, req.slot.place, chosen});
                load[idx]++;
                real.switches[i](req.antenna, idx) = 1;
            }
        }
    }
    real.realized = realized_matrix(real.switches, bank);
    return real;
}

// Sparse triplet dump of the switch matrices: "rf_chain antenna pair_index"
// per closed switch, 0-based indices.
inline std::string switch_triplets(const CppsRealization &real)
{
    std::ostringstream os;
    os << "# rf_chain antenna pair_index\n";
    for (arma::uword i = 0; i < real.switches.size(); i++)
        for (arma::uword m = 0; m < real.switches[i].n_cols; m++)
            for (arma::uword j = 0; j < real.switches[i].n_rows; j++)
                if (real.switches[i](j, m))
                    os << i << " " << j << " " << m << "\n";
    return os.str();
}

} // namespace hbsim

#endif
