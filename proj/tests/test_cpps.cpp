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

#include <catch2/catch.hpp>

#include <set>

#include "hbsim/cpps.hpp"
#include "hbsim/rng.hpp"

using namespace hbsim;

namespace
{

arma::cx_mat random_bounded(arma::uword n_rows, arma::uword n_cols, std::mt19937_64 &rng)
{
    arma::cx_mat m(n_rows, n_cols);
    for (auto &v : m)
        v = arma::cx_double(rand_uniform(rng, -2.0, 2.0), rand_uniform(rng, -2.0, 2.0));
    return m;
}

void audit_degrees(const CppsRealization &real)
{
    for (const auto &s : real.switches)
    {
        const arma::urowvec col_sums = arma::sum(s, 0);
        REQUIRE(col_sums.max() <= real.column_cap);
        const arma::uvec row_sums = arma::sum(s, 1);
        REQUIRE(row_sums.max() <= real.row_cap);
        REQUIRE(s.max() <= 1);
    }
}

} // namespace

TEST_CASE("bank holds 40p pairs with the expected sections")
{
    const CppsBank p1 = build_bank(1);
    REQUIRE(p1.size() == 40);

    const CppsBank p2 = build_bank(2);
    REQUIRE(p2.size() == 80);

    // real-positive section of p = 2: {0.2, 0.4, ..., 2.0} then {0.02, ..., 0.20}
    std::multiset<double> first_place, second_place;
    for (int d = 1; d <= 10; d++)
    {
        first_place.insert(p2.values(p2.index({BankSection::real_positive, 1, d})).real());
        second_place.insert(p2.values(p2.index({BankSection::real_positive, 2, d})).real());
    }
    int d = 1;
    for (double v : first_place)
        REQUIRE(v == Approx(0.2 * d++).margin(1e-12));
    d = 1;
    for (double v : second_place)
        REQUIRE(v == Approx(0.02 * d++).margin(1e-12));

    for (arma::uword i = 0; i < p2.size(); i++)
        REQUIRE(std::abs(p2.values(i)) <= 2.0 + 1e-12);
}

TEST_CASE("every bank value is the sum of its generating phase pair")
{
    const CppsBank bank = build_bank(3);
    for (int section = 0; section < 4; section++)
        for (int place = 1; place <= 3; place++)
            for (int digit = 1; digit <= 10; digit++)
            {
                const BankSlot slot{static_cast<BankSection>(section), place, digit};
                REQUIRE(std::abs(bank_slot_phases(slot).value() - bank.values(bank.index(slot))) <
                        1e-12);
            }
}

TEST_CASE("quantization decomposes the worked example")
{
    // 1.64 -> digit values 0.80 and 0.02 (pair sums 1.60 and 0.04)
    const auto slots = quantize_entry({1.64, 0.0}, 2);
    REQUIRE(slots.size() == 2);
    REQUIRE(slots[0].section == BankSection::real_positive);
    REQUIRE(slots[0].place == 1);
    REQUIRE(slots[0].digit == 8);
    REQUIRE(slots[1].place == 2);
    REQUIRE(slots[1].digit == 2);

    const CppsBank bank = build_bank(2);
    REQUIRE(std::abs(slots_value(slots, bank) - arma::cx_double(1.64, 0.0)) < 1e-12);
}

TEST_CASE("quantization edge cases")
{
    REQUIRE(quantize_entry({0.0, 0.0}, 2).empty());

    // 0.999 rounds to 1.00: a single pair at digit 0.50
    const auto slots = quantize_entry({0.999, 0.0}, 2);
    REQUIRE(slots.size() == 1);
    REQUIRE(slots[0].digit == 5);
    REQUIRE(slots[0].place == 1);
    const CppsBank bank = build_bank(2);
    REQUIRE(std::abs(slots_value(slots, bank).real() - 1.0) < 1e-12);
    REQUIRE(std::abs(slots_value(slots, bank).real() - 0.999) <= 0.01);

    // full scale uses the digit-10 pair
    const auto full = quantize_entry({-2.0, 2.0}, 2);
    REQUIRE(full.size() == 2);
    REQUIRE(full[0].section == BankSection::real_negative);
    REQUIRE(full[0].digit == 10);
    REQUIRE(full[1].section == BankSection::imag_positive);
    REQUIRE(full[1].digit == 10);

    REQUIRE_THROWS_AS(quantize_entry({2.2, 0.0}, 2), std::domain_error);
}

TEST_CASE("quantization error stays within one unit in the last place")
{
    std::mt19937_64 rng = substream(307, 0);
    for (int p = 1; p <= 3; p++)
    {
        const CppsBank bank = build_bank(p);
        const double tol = std::pow(10.0, -p);
        for (int rep = 0; rep < 2000; rep++)
        {
            const arma::cx_double z(rand_uniform(rng, -2.0, 2.0), rand_uniform(rng, -2.0, 2.0));
            const arma::cx_double back = slots_value(quantize_entry(z, p), bank);
            REQUIRE(std::abs(z.real() - back.real()) <= tol + 1e-15);
            REQUIRE(std::abs(z.imag() - back.imag()) <= tol + 1e-15);
        }
    }
}

TEST_CASE("asymmetric assignment meets the per-entry guarantee")
{
    std::mt19937_64 rng = substream(311, 0);
    const arma::uword n = 24;
    for (int p = 1; p <= 3; p++)
    {
        const CppsBank bank = build_bank(p);
        const arma::cx_mat target = random_bounded(n, 4, rng);
        const CppsRealization real = assign_asymmetric(target, bank);

        audit_degrees(real);
        const double tol = std::pow(10.0, -p) + 1e-15;
        const arma::cx_mat err = real.realized - target;
        REQUIRE(arma::abs(arma::real(err)).max() <= tol);
        REQUIRE(arma::abs(arma::imag(err)).max() <= tol);
        REQUIRE(real.max_column_sq_error() <=
                2.0 * std::pow(10.0, -2 * p) * static_cast<double>(n) + 1e-15);
    }
}

TEST_CASE("uniform-entry target loads one pair column to full depth")
{
    const arma::uword n = 16;
    const CppsBank bank = build_bank(2);
    const arma::cx_mat target(n, 2, arma::fill::value(arma::cx_double(1.64, 0.0)));
    const CppsRealization real = assign_asymmetric(target, bank);

    const arma::uword idx_80 = bank.index({BankSection::real_positive, 1, 8});
    const arma::uword idx_02 = bank.index({BankSection::real_positive, 2, 2});
    for (const auto &s : real.switches)
    {
        REQUIRE(arma::accu(s.col(idx_80)) == n); // every antenna shares the 0.80 pair
        REQUIRE(arma::accu(s.col(idx_02)) == n);
        const arma::uvec row_sums = arma::sum(s, 1);
        for (arma::uword j = 0; j < n; j++)
            REQUIRE(row_sums(j) == 2);
    }
    REQUIRE(real.max_component_error() < 1e-12); // exactly representable
}

TEST_CASE("exactly representable targets realize with zero error")
{
    const CppsBank bank = build_bank(2);
    arma::cx_mat target(3, 2);
    target(0, 0) = {0.46, -1.20};
    target(1, 0) = {2.00, 0.02};
    target(2, 0) = {0.0, 0.0};
    target(0, 1) = {-0.68, 0.34};
    target(1, 1) = {1.98, -1.98};
    target(2, 1) = {0.10, 0.90};
    const CppsRealization real = assign_asymmetric(target, bank);
    REQUIRE(real.max_component_error() < 1e-12);
}

TEST_CASE("realized matrix recomputes from the switch matrices")
{
    std::mt19937_64 rng = substream(313, 0);
    const CppsBank bank = build_bank(2);
    const arma::cx_mat target = random_bounded(12, 3, rng);
    const CppsRealization real = assign_asymmetric(target, bank);
    const arma::cx_mat recomputed = realized_matrix(real.switches, bank);
    REQUIRE(arma::abs(recomputed - real.realized).max() < 1e-15);

    // zero switches give a zero column; a single switch copies one pair value
    std::vector<arma::umat> single{arma::umat(4, bank.size(), arma::fill::zeros)};
    single[0](2, 5) = 1;
    const arma::cx_mat one = realized_matrix(single, bank);
    for (arma::uword j = 0; j < 4; j++)
        REQUIRE(std::abs(one(j, 0) - (j == 2 ? bank.values(5) : arma::cx_double{})) < 1e-15);

    std::vector<arma::umat> bad{arma::umat(4, 7, arma::fill::zeros)};
    REQUIRE_THROWS_AS(realized_matrix(bad, bank), std::invalid_argument);
}

TEST_CASE("symmetric assignment equals asymmetric when buckets stay under capacity")
{
    std::mt19937_64 rng = substream(317, 0);
    const CppsBank bank = build_bank(2);
    // two antennas per digit at most, far below the cap
    const arma::cx_mat target = random_bounded(6, 3, rng);
    const CppsRealization sym = assign_symmetric(target, bank, 6);
    const CppsRealization asym = assign_asymmetric(target, bank);
    for (arma::uword i = 0; i < sym.switches.size(); i++)
        REQUIRE(arma::accu(sym.switches[i] != asym.switches[i]) == 0);
}

TEST_CASE("overflowing buckets redirect to neighboring digits")
{
    const arma::uword n = 20;
    const CppsBank bank = build_bank(2);
    const arma::cx_mat target(n, 1, arma::fill::value(arma::cx_double(1.60, 0.0)));
    const CppsRealization real = assign_symmetric(target, bank, 2);

    audit_degrees(real);
    // 0.80 takes two antennas; the rest spill to 0.70 or 0.90 and beyond,
    // each substitution changing the entry by a multiple of 0.2
    const arma::cx_mat err = real.realized - target;
    REQUIRE(arma::abs(arma::real(err)).max() <= 2.0 * 0.2 * 10 + 1e-12);
    arma::uword untouched = 0;
    for (arma::uword j = 0; j < n; j++)
        if (std::abs(err(j, 0)) < 1e-12)
            untouched++;
    REQUIRE(untouched == 2);
}

TEST_CASE("symmetric accuracy tracks asymmetric accuracy on random targets")
{
    std::mt19937_64 rng = substream(331, 0);
    const arma::uword n = 64;
    const CppsBank bank = build_bank(2);
    double sym_err = 0.0, asym_err = 0.0;
    arma::uword count = 0;
    for (int rep = 0; rep < 100; rep++)
    {
        const arma::cx_mat target = random_bounded(n, 2, rng);
        const CppsRealization sym = assign_symmetric(target, bank); // default cap ceil(N/10)
        const CppsRealization asym = assign_asymmetric(target, bank);
        audit_degrees(sym);
        const arma::cx_mat es = sym.realized - target;
        const arma::cx_mat ea = asym.realized - target;
        sym_err += arma::accu(arma::abs(arma::real(es))) + arma::accu(arma::abs(arma::imag(es)));
        asym_err += arma::accu(arma::abs(arma::real(ea))) + arma::accu(arma::abs(arma::imag(ea)));
        count += 2 * target.n_elem;
    }
    REQUIRE(sym_err / count <= 3.0 * (asym_err / count));
}

TEST_CASE("finer precision never hurts on the same target")
{
    std::mt19937_64 rng = substream(337, 0);
    const arma::cx_mat target = random_bounded(16, 4, rng);
    double previous = 1e9;
    for (int p = 1; p <= 4; p++)
    {
        const CppsRealization real = assign_asymmetric(target, build_bank(p));
        const double err = real.max_component_error();
        REQUIRE(err <= previous + 1e-15);
        previous = err;
    }
}

TEST_CASE("switch triplets enumerate every closed switch")
{
    const CppsBank bank = build_bank(1);
    arma::cx_mat target(2, 1);
    target(0, 0) = {0.4, 0.0};
    target(1, 0) = {0.0, -0.8};
    const CppsRealization real = assign_asymmetric(target, bank);
    const std::string text = switch_triplets(real);
    REQUIRE(text.find("0 0 1\n") != std::string::npos); // real+, digit 2 -> index 1
    const arma::uword neg_idx = bank.index({BankSection::imag_negative, 1, 4});
    REQUIRE(text.find("0 1 " + std::to_string(neg_idx) + "\n") != std::string::npos);
}
