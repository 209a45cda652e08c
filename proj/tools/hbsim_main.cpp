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

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hbsim/hbsim.hpp"

namespace
{

struct OutputOptions
{
    std::string path;
    std::string format = "csv";
};

void write_table(const hbsim::ResultTable &table, const OutputOptions &out)
{
    const bool json = out.format == "json";
    if (out.path.empty())
    {
        json ? hbsim::emit_json(table, std::cout) : hbsim::emit_csv(table, std::cout);
        return;
    }
    hbsim::emit_to_path(table, out.path, json);
    std::cerr << "wrote " << table.rows.size() << " rows to " << out.path << "\n";
}

// Keys given as --set key=value on top of the config file.
void apply_overrides(hbsim::ExperimentConfig &cfg, const std::vector<std::string> &overrides)
{
    for (const auto &entry : overrides)
    {
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            throw hbsim::ConfigError("override '" + entry + "': expected key=value");
        apply_config_entry(cfg, entry.substr(0, eq), entry.substr(eq + 1));
    }
}

void add_config_flags(CLI::App *cmd, std::vector<std::string> &overrides)
{
    // Every config key is also a long flag of the same name.
    static const std::vector<std::string> keys = {
        "n_antennas", "n_rf",     "n_subcarriers", "n_taps",     "k_total",    "k_max",
        "noise_power", "snr_db",  "trials",        "seed",       "channel",    "theta",
        "jitter",      "scatterers", "modes",      "power",      "cpps_p",     "cpps_flow",
        "emit_bounds", "forced_equal", "fixed_users", "threads"};
    for (const auto &key : keys)
        cmd->add_option_function<std::string>(
            "--" + key, [&overrides, key](const std::string &v) { overrides.push_back(key + "=" + v); });
}

int run_decompose(std::uint64_t seed, arma::uword n, arma::uword k, arma::uword nf, int cpps_p,
                  bool symmetric, const std::string &out_path)
{
    std::mt19937_64 rng = hbsim::substream(seed, 0);
    std::vector<arma::cx_mat> precoders;
    precoders.reserve(nf);
    for (arma::uword i = 0; i < nf; i++)
        precoders.push_back(hbsim::randn_complex_mat(n, k, rng));
    const hbsim::DigitalStack stack = hbsim::make_stack(precoders);
    const hbsim::HybridFactorization f = hbsim::factorize(stack);

    double worst = 0.0;
    for (arma::uword i = 0; i < nf; i++)
    {
        const arma::cx_mat rebuilt = f.analog * f.mixing * f.baseband[i];
        worst = std::max(worst, arma::norm(rebuilt - precoders[i], "fro") /
                                    arma::norm(precoders[i], "fro"));
    }
    const auto pairs = hbsim::expand_to_phases(f.analog);

    std::cout << "stack: " << n << " x " << k * nf << " (" << nf << " sub-carriers)\n"
              << "rank: " << stack.rank << "\n"
              << "phase-shifter pairs: " << pairs.size() << " (budget "
              << f.structural_nonzeros() << ", shifters " << 2 * pairs.size() << ")\n"
              << "max |analog entry|: " << arma::abs(f.analog).max() << "\n"
              << "max relative reconstruction error: " << worst << "\n";

    if (cpps_p >= 1)
    {
        const hbsim::CppsBank bank = hbsim::build_bank(cpps_p);
        const hbsim::CppsRealization real = symmetric
                                                ? hbsim::assign_symmetric(f.analog, bank)
                                                : hbsim::assign_asymmetric(f.analog, bank);
        std::cout << "cpps flow: " << (symmetric ? "sym" : "asym") << ", precision 1e-" << cpps_p
                  << ", bank pairs per RF chain: " << bank.size() << "\n"
                  << "cpps max component error: " << real.max_component_error() << "\n"
                  << "cpps max column squared error: " << real.max_column_sq_error() << "\n";
        if (!out_path.empty())
        {
            std::ofstream os(out_path);
            if (!os)
                throw std::runtime_error("cannot open output file: " + out_path);
            os << hbsim::switch_triplets(real);
            std::cerr << "wrote switch triplets to " << out_path << "\n";
        }
    }
    return 0;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"hybrid analog-digital beamforming simulator"};
    app.require_subcommand(1);
    app.fallthrough(); // global flags may follow the subcommand

    OutputOptions out;
    app.add_option("--out", out.path, "output file (default: stdout)");
    app.add_option("--format", out.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    std::string config_path;
    std::vector<std::string> overrides;
    std::string axis_name;
    std::string values_csv;

    auto *simulate = app.add_subcommand("simulate", "run a Monte Carlo experiment");
    simulate->add_option("config", config_path, "flat key = value config file")->required();
    add_config_flags(simulate, overrides);

    auto *sweep_cmd = app.add_subcommand("sweep", "sweep one axis over shared channel draws");
    sweep_cmd->add_option("config", config_path, "flat key = value config file")->required();
    sweep_cmd->add_option("--axis", axis_name, "snr, n_rf, n_antennas, k_total or cpps_pairs")
        ->required();
    sweep_cmd->add_option("--values", values_csv, "comma separated axis values")->required();
    add_config_flags(sweep_cmd, overrides);

    auto *bounds_cmd = app.add_subcommand("bounds", "emit the analytical average-rate bounds");
    bounds_cmd->add_option("config", config_path, "flat key = value config file")->required();
    add_config_flags(bounds_cmd, overrides);

    arma::uword dec_n = 16, dec_k = 2, dec_nf = 4;
    int dec_cpps = 0;
    std::string dec_flow = "asym";
    auto *decompose = app.add_subcommand("decompose", "factorization diagnostics on a random stack");
    decompose->add_option("--n", dec_n, "antenna count")->required();
    decompose->add_option("--k", dec_k, "users per sub-carrier")->required();
    decompose->add_option("--nf", dec_nf, "sub-carrier count")->required();
    decompose->add_option("--cpps", dec_cpps, "fixed-bank precision p (0 = off)");
    decompose->add_option("--flow", dec_flow, "asym or sym")
        ->check(CLI::IsMember({"asym", "sym"}));

    std::uint64_t seed_flag = 0;
    bool seed_given = false;
    arma::uword trials_flag = 0;
    app.add_option_function<std::uint64_t>("--seed", [&](std::uint64_t v) {
        seed_flag = v;
        seed_given = true;
    })->description("master random seed override");
    app.add_option("--trials", trials_flag, "trial count override");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try
    {
        if (decompose->parsed())
            return run_decompose(seed_given ? seed_flag : 1, dec_n, dec_k, dec_nf, dec_cpps,
                                 dec_flow == "sym", out.path);

        hbsim::ExperimentConfig cfg = hbsim::parse_config_file(config_path);
        apply_overrides(cfg, overrides);
        if (seed_given)
            cfg.seed = seed_flag;
        if (trials_flag > 0)
            cfg.trials = trials_flag;

        if (simulate->parsed())
        {
            write_table(hbsim::run_experiment(cfg), out);
        }
        else if (sweep_cmd->parsed())
        {
            std::vector<double> values;
            for (const auto &item : hbsim::detail::split_list(values_csv))
                values.push_back(hbsim::detail::parse_double("values", item));
            write_table(hbsim::sweep(cfg, hbsim::parse_axis(axis_name), values), out);
        }
        else if (bounds_cmd->parsed())
        {
            cfg.validate();
            std::ostringstream os;
            os << "mode,snr_db,theory_bound\n";
            for (const char *mode : {"asb", "hb", "db"})
                for (double snr : cfg.snr_db)
                {
                    hbsim::BoundParams bp;
                    bp.n_antennas = cfg.n_antennas;
                    bp.n_rf = cfg.n_rf;
                    bp.users_per_subcarrier = cfg.max_users;
                    bp.total_users = cfg.total_users;
                    bp.n_subcarriers = cfg.n_subcarriers;
                    bp.power_budget = cfg.power_for_snr(snr);
                    bp.noise_power = cfg.noise_power;
                    const hbsim::AverageRateBounds b = hbsim::average_rate_bounds(bp);
                    const double value = std::string(mode) == "asb"  ? b.asb
                                         : std::string(mode) == "hb" ? b.hb
                                                                     : b.db;
                    os << mode << "," << hbsim::format_value(snr) << ","
                       << hbsim::format_value(value) << "\n";
                }
            if (out.path.empty())
                std::cout << os.str();
            else
            {
                std::ofstream f(out.path);
                if (!f)
                    throw std::runtime_error("cannot open output file: " + out.path);
                f << os.str();
            }
        }
        return 0;
    }
    catch (const hbsim::ConfigError &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
