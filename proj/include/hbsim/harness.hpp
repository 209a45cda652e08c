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

#ifndef hbsim_harness_H
#define hbsim_harness_H

#include <atomic>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "hbsim/bounds.hpp"
#include "hbsim/channel.hpp"
#include "hbsim/rng.hpp"
#include "hbsim/scheduler.hpp"

namespace hbsim
{

struct ConfigError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

enum class ChannelKind
{
    rayleigh,
    ula_uniform,
    ula_lemma2
};

inline std::string to_string(ChannelKind k)
{
    switch (k)
    {
        case ChannelKind::rayleigh: return "rayleigh";
        case ChannelKind::ula_uniform: return "ula-uniform";
        default: return "ula-lemma2";
    }
}

// One Monte Carlo experiment. Defaults are desk scale; the transmit power per
// sub-carrier follows from the SNR definition snr = n_subcarriers * P /
// (max_users * noise), so P = snr_linear * max_users * noise / n_subcarriers.
struct ExperimentConfig
{
    arma::uword n_antennas = 64;
    arma::uword n_rf = 16;
    arma::uword n_subcarriers = 16;
    arma::uword n_taps = 8;
    arma::uword total_users = 16;
    arma::uword max_users = 8;
    double noise_power = 1.0;
    std::vector<double> snr_db = {0.0, 5.0, 10.0, 15.0, 20.0, 25.0};
    arma::uword trials = 100;
    std::uint64_t seed = 1;
    ChannelKind channel = ChannelKind::rayleigh;
    double theta = 1.5707963267948966; // grid scale angle for ula-lemma2 channels
    double jitter = -1.0;              // grid sine jitter; < 0 selects 1/(2N)
    arma::uword scatterers = 8;
    std::vector<BeamformingMode> modes = {BeamformingMode::asb, BeamformingMode::hb,
                                          BeamformingMode::db};
    PowerPolicy policy = PowerPolicy::waterfill;
    int cpps_precision = 0; // 0 = infinite-resolution pairs only
    bool cpps_symmetric = false;
    bool emit_bounds = false;
    bool forced_equal = false; // diagnostic: hb/db rates on the asb user sets
    bool fixed_user_count = false;
    arma::uword threads = 0; // 0 = hardware concurrency

    double power_for_snr(double db) const
    {
        const double lin = std::pow(10.0, db / 10.0);
        return lin * static_cast<double>(max_users) * noise_power /
               static_cast<double>(n_subcarriers);
    }

    double grid_jitter() const
    {
        return jitter >= 0.0 ? jitter : 1.0 / (2.0 * static_cast<double>(n_antennas));
    }

    void validate() const
    {
        if (n_antennas < 1)
            throw ConfigError("n_antennas: must be >= 1");
        if (n_rf < 1 || n_rf > n_antennas)
            throw ConfigError("n_rf: must be in [1, n_antennas]");
        if (n_subcarriers < 1)
            throw ConfigError("n_subcarriers: must be >= 1");
        if (n_taps < 1 || n_taps > n_subcarriers)
            throw ConfigError("n_taps: must be in [1, n_subcarriers]");
        if (total_users < 1)
            throw ConfigError("k_total: must be >= 1");
        if (max_users < 1)
            throw ConfigError("k_max: must be >= 1");
        if (noise_power <= 0.0)
            throw ConfigError("noise_power: must be positive");
        if (snr_db.empty())
            throw ConfigError("snr_db: need at least one value");
        if (trials < 1)
            throw ConfigError("trials: must be >= 1");
        if (scatterers < 1)
            throw ConfigError("scatterers: must be >= 1");
        if (modes.empty())
            throw ConfigError("modes: need at least one of asb, hb, db");
        if (cpps_precision < 0 || cpps_precision > 12)
            throw ConfigError("cpps_p: must be in [0, 12]");
        if (emit_bounds && max_users > n_rf)
            throw ConfigError("emit_bounds: the rate bounds require k_max <= n_rf");
        if (channel == ChannelKind::ula_lemma2)
        {
            const arma::vec grid =
                grid_aod_sines({theta, n_rf, grid_jitter()}, n_antennas);
            if (grid.max() + grid_jitter() > 1.0 || grid.min() - grid_jitter() < -1.0)
                throw ConfigError("theta/jitter: grid sines leave [-1, 1] for this n_rf");
        }
    }
};

struct ResultRow
{
    std::string mode;
    double snr_db = 0.0;
    arma::uword trial = 0;
    double total_rate = 0.0;
    double mean_served = 0.0;
    arma::uword stacked_rank = 0;
    arma::uword s_tilde = 0;
    arma::uword ps_pairs = 0;
    double cpps_max_error = 0.0;
    double bound = 0.0;      // filled when bound emission is on
    double axis_value = 0.0; // filled by sweeps
};

struct ResultTable
{
    std::vector<ResultRow> rows;
    bool with_bounds = false;
    bool with_axis = false;
    std::string axis_name;
};

namespace detail
{

inline FrequencyChannel draw_channels(const ExperimentConfig &cfg, std::mt19937_64 &rng)
{
    TimeDomainChannel taps;
    switch (cfg.channel)
    {
        case ChannelKind::rayleigh:
            taps = draw_rayleigh_taps(cfg.n_antennas, cfg.total_users, cfg.n_taps, rng);
            break;
        case ChannelKind::ula_uniform:
        case ChannelKind::ula_lemma2:
        {
            const ArrayGeometry geom = ArrayGeometry::half_wavelength(cfg.n_antennas);
            GeometricParams params;
            params.n_scatterers = cfg.scatterers;
            params.n_taps = cfg.n_taps;
            params.pathloss = arma::vec(cfg.total_users, arma::fill::ones);
            if (cfg.channel == ChannelKind::ula_uniform)
                params.aod = gen_uniform_aods(cfg.total_users, cfg.scatterers, rng);
            else
            {
                GridAodSpec spec{cfg.theta, cfg.n_rf, cfg.grid_jitter()};
                params.aod =
                    draw_grid_aods(spec, cfg.n_antennas, cfg.total_users, cfg.scatterers, rng);
            }
            taps = draw_geometric_taps(geom, params, rng);
            break;
        }
    }
    return to_frequency(taps, cfg.n_subcarriers);
}

inline SchedulerConfig scheduler_config(const ExperimentConfig &cfg, BeamformingMode mode, double power)
{
    SchedulerConfig sc;
    sc.mode = mode;
    sc.n_rf = cfg.n_rf;
    sc.max_users = cfg.max_users;
    sc.power_budget = power;
    sc.noise_power = cfg.noise_power;
    sc.policy = cfg.policy;
    sc.fixed_user_count = cfg.fixed_user_count;
    return sc;
}

inline double bound_for(const ExperimentConfig &cfg, BeamformingMode mode, double power)
{
    BoundParams bp;
    bp.n_antennas = cfg.n_antennas;
    bp.n_rf = cfg.n_rf;
    bp.users_per_subcarrier = cfg.max_users;
    bp.total_users = cfg.total_users;
    bp.n_subcarriers = cfg.n_subcarriers;
    bp.power_budget = power;
    bp.noise_power = cfg.noise_power;
    const AverageRateBounds b = average_rate_bounds(bp);
    switch (mode)
    {
        case BeamformingMode::asb: return b.asb;
        case BeamformingMode::hb: return b.hb;
        default: return b.db;
    }
}

} // namespace detail

// Runs the experiment: one channel draw per trial, every requested mode and
// SNR evaluated on that same draw. Rows are ordered by (mode, snr, trial)
// position regardless of the worker count, so output is reproducible.
inline ResultTable run_experiment(const ExperimentConfig &cfg)
{
    cfg.validate();

    const std::size_t n_modes = cfg.modes.size();
    const std::size_t n_snr = cfg.snr_db.size();
    ResultTable table;
    table.with_bounds = cfg.emit_bounds;
    table.rows.resize(n_modes * n_snr * cfg.trials);

    // Bounds depend only on (mode, snr); precompute.
    std::vector<double> bounds(n_modes * n_snr, 0.0);
    if (cfg.emit_bounds)
        for (std::size_t mi = 0; mi < n_modes; mi++)
            for (std::size_t si = 0; si < n_snr; si++)
                bounds[mi * n_snr + si] =
                    detail::bound_for(cfg, cfg.modes[mi], cfg.power_for_snr(cfg.snr_db[si]));

    auto run_trial = [&](arma::uword t) {
        std::mt19937_64 rng = substream(cfg.seed, t);
        const FrequencyChannel channels = detail::draw_channels(cfg, rng);

        for (std::size_t si = 0; si < n_snr; si++)
        {
            const double power = cfg.power_for_snr(cfg.snr_db[si]);

            // Shared ASB run per SNR when rates are compared on equal sets.
            ScheduleOutcome forced_asb;
            std::vector<std::vector<arma::uword>> forced_sets;
            if (cfg.forced_equal)
            {
                forced_asb = run_asb(channels,
                                     detail::scheduler_config(cfg, BeamformingMode::asb, power));
                for (const auto &sc : forced_asb.per_subcarrier)
                    forced_sets.push_back(sc.users);
            }

            for (std::size_t mi = 0; mi < n_modes; mi++)
            {
                const BeamformingMode mode = cfg.modes[mi];
                ResultRow row;
                row.mode = to_string(mode);
                row.snr_db = cfg.snr_db[si];
                row.trial = t;

                if (cfg.forced_equal)
                {
                    double served = 0.0;
                    for (const auto &s : forced_sets)
                        served += static_cast<double>(s.size());
                    row.mean_served = served / static_cast<double>(cfg.n_subcarriers);
                    if (mode == BeamformingMode::asb)
                    {
                        row.total_rate = forced_asb.total_rate;
                        row.stacked_rank = forced_asb.stacked_rank;
                    }
                    else
                    {
                        const auto rates = evaluate_fixed_sets(
                            channels, forced_sets,
                            detail::scheduler_config(cfg, mode, power), false);
                        for (double r : rates)
                            row.total_rate += r;
                    }
                }
                else
                {
                    CppsOptions opts;
                    opts.precision = mode == BeamformingMode::asb ? 0 : cfg.cpps_precision;
                    opts.symmetric = cfg.cpps_symmetric;
                    const BeamformedResult res = schedule_and_beamform(
                        channels, detail::scheduler_config(cfg, mode, power), opts);
                    row.total_rate = res.realized_total;
                    double served = 0.0;
                    for (const auto &sc : res.schedule.per_subcarrier)
                        served += static_cast<double>(sc.users.size());
                    row.mean_served = served / static_cast<double>(cfg.n_subcarriers);
                    row.stacked_rank = res.schedule.stacked_rank;
                    row.s_tilde = res.schedule.s_tilde;
                    row.ps_pairs = res.phase_pair_count;
                    row.cpps_max_error = res.cpps_max_error;
                }

                if (cfg.emit_bounds)
                    row.bound = bounds[mi * n_snr + si];

                table.rows[(mi * n_snr + si) * cfg.trials + t] = std::move(row);
            }
        }
    };

    arma::uword workers = cfg.threads > 0 ? cfg.threads : std::thread::hardware_concurrency();
    workers = std::max<arma::uword>(1, std::min<arma::uword>(workers, cfg.trials));
    if (workers == 1)
    {
        for (arma::uword t = 0; t < cfg.trials; t++)
            run_trial(t);
    }
    else
    {
        std::atomic<arma::uword> next{0};
        std::exception_ptr error;
        std::mutex error_mutex;
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (arma::uword w = 0; w < workers; w++)
            pool.emplace_back([&]() {
                try
                {
                    for (arma::uword t = next.fetch_add(1); t < cfg.trials; t = next.fetch_add(1))
                        run_trial(t);
                }
                catch (...)
                {
                    const std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error)
                        error = std::current_exception();
                    next.store(cfg.trials); // stop handing out further trials
                }
            });
        for (auto &th : pool)
            th.join();
        if (error)
            std::rethrow_exception(error);
    }
    return table;
}

enum class SweepAxis
{
    snr,
    n_rf,
    n_antennas,
    k_total,
    cpps_pairs
};

inline SweepAxis parse_axis(const std::string &name)
{
    if (name == "snr")
        return SweepAxis::snr;
    if (name == "n_rf")
        return SweepAxis::n_rf;
    if (name == "n_antennas")
        return SweepAxis::n_antennas;
    if (name == "k_total")
        return SweepAxis::k_total;
    if (name == "cpps_pairs")
        return SweepAxis::cpps_pairs;
    throw ConfigError("axis: unknown sweep axis '" + name + "'");
}

// Cartesian sweep along one axis. The master seed is shared, so every axis
// point sees the same per-trial substreams (paired comparisons).
inline ResultTable sweep(const ExperimentConfig &base, SweepAxis axis, const std::vector<double> &values)
{
    if (values.empty())
        throw ConfigError("values: sweep needs at least one axis value");

    ResultTable table;
    table.with_axis = true;
    table.with_bounds = base.emit_bounds;

    if (axis == SweepAxis::snr)
    {
        table.axis_name = "snr";
        ExperimentConfig cfg = base;
        cfg.snr_db = values;
        ResultTable inner = run_experiment(cfg);
        for (auto &row : inner.rows)
            row.axis_value = row.snr_db;
        table.rows = std::move(inner.rows);
        return table;
    }

    for (double v : values)
    {
        ExperimentConfig cfg = base;
        if (v < 0.0 || v != std::floor(v))
            throw ConfigError("values: axis '" + std::string(axis == SweepAxis::cpps_pairs
                                                                 ? "cpps_pairs"
                                                                 : "count") +
                              "' requires non-negative integers, got " + std::to_string(v));
        const auto as_count = static_cast<arma::uword>(v);
        switch (axis)
        {
            case SweepAxis::n_rf:
                table.axis_name = "n_rf";
                cfg.n_rf = as_count;
                break;
            case SweepAxis::n_antennas:
                table.axis_name = "n_antennas";
                cfg.n_antennas = as_count;
                break;
            case SweepAxis::k_total:
                table.axis_name = "k_total";
                cfg.total_users = as_count;
                break;
            case SweepAxis::cpps_pairs:
                table.axis_name = "cpps_pairs";
                cfg.cpps_precision = static_cast<int>(v);
                break;
            default:
                break;
        }
        ResultTable inner = run_experiment(cfg);
        for (auto &row : inner.rows)
            row.axis_value = v;
        table.rows.insert(table.rows.end(), inner.rows.begin(), inner.rows.end());
    }
    return table;
}

// Locale-independent formatting with 12 significant digits.
inline std::string format_value(double v)
{
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

inline void emit_csv(const ResultTable &table, std::ostream &os)
{
    if (table.with_axis)
        os << "axis,axis_value,";
    os << "mode,snr_db,trial,total_rate,mean_served,stacked_rank,s_tilde,ps_pairs,cpps_max_error";
    if (table.with_bounds)
        os << ",theory_bound";
    os << "\n";
    for (const auto &r : table.rows)
    {
        if (table.with_axis)
            os << table.axis_name << "," << format_value(r.axis_value) << ",";
        os << r.mode << "," << format_value(r.snr_db) << "," << r.trial << ","
           << format_value(r.total_rate) << "," << format_value(r.mean_served) << ","
           << r.stacked_rank << "," << r.s_tilde << "," << r.ps_pairs << ","
           << format_value(r.cpps_max_error);
        if (table.with_bounds)
            os << "," << format_value(r.bound);
        os << "\n";
    }
}

inline void emit_json(const ResultTable &table, std::ostream &os)
{
    nlohmann::json rows = nlohmann::json::array();
    for (const auto &r : table.rows)
    {
        nlohmann::json o;
        if (table.with_axis)
        {
            o["axis"] = table.axis_name;
            o["axis_value"] = r.axis_value;
        }
        o["mode"] = r.mode;
        o["snr_db"] = r.snr_db;
        o["trial"] = r.trial;
        o["total_rate"] = r.total_rate;
        o["mean_served"] = r.mean_served;
        o["stacked_rank"] = r.stacked_rank;
        o["s_tilde"] = r.s_tilde;
        o["ps_pairs"] = r.ps_pairs;
        o["cpps_max_error"] = r.cpps_max_error;
        if (table.with_bounds)
            o["theory_bound"] = r.bound;
        rows.push_back(std::move(o));
    }
    os << rows.dump(2) << "\n";
}

inline void emit_to_path(const ResultTable &table, const std::string &path, bool json)
{
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot open output file: " + path);
    json ? emit_json(table, out) : emit_csv(table, out);
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

inline std::string table_to_string(const ResultTable &table, bool json = false)
{
    std::ostringstream os;
    json ? emit_json(table, os) : emit_csv(table, os);
    return os.str();
}

// --- flat "key = value" config files -------------------------------------

namespace detail
{

inline std::string trim(const std::string &s)
{
    const auto a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos)
        return "";
    const auto b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string &s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
    {
        item = trim(item);
        if (!item.empty())
            out.push_back(item);
    }
    return out;
}

inline double parse_double(const std::string &key, const std::string &value)
{
    try
    {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size())
            throw std::invalid_argument(value);
        return v;
    }
    catch (const std::exception &)
    {
        throw ConfigError(key + ": cannot parse number '" + value + "'");
    }
}

inline arma::uword parse_count(const std::string &key, const std::string &value)
{
    const double v = parse_double(key, value);
    if (v < 0.0 || v != std::floor(v))
        throw ConfigError(key + ": expected a non-negative integer, got '" + value + "'");
    return static_cast<arma::uword>(v);
}

inline bool parse_bool(const std::string &key, const std::string &value)
{
    if (value == "true" || value == "1" || value == "on" || value == "yes")
        return true;
    if (value == "false" || value == "0" || value == "off" || value == "no")
        return false;
    throw ConfigError(key + ": expected a boolean, got '" + value + "'");
}

} // namespace detail

// Applies one key/value setting; shared by the file parser and CLI overrides.
inline void apply_config_entry(ExperimentConfig &cfg, const std::string &key, const std::string &value)
{
    using namespace detail;
    if (key == "n_antennas")
        cfg.n_antennas = parse_count(key, value);
    else if (key == "n_rf")
        cfg.n_rf = parse_count(key, value);
    else if (key == "n_subcarriers")
        cfg.n_subcarriers = parse_count(key, value);
    else if (key == "n_taps")
        cfg.n_taps = parse_count(key, value);
    else if (key == "k_total")
        cfg.total_users = parse_count(key, value);
    else if (key == "k_max")
        cfg.max_users = parse_count(key, value);
    else if (key == "noise_power")
        cfg.noise_power = parse_double(key, value);
    else if (key == "snr_db")
    {
        cfg.snr_db.clear();
        for (const auto &item : split_list(value))
            cfg.snr_db.push_back(parse_double(key, item));
    }
    else if (key == "trials")
        cfg.trials = parse_count(key, value);
    else if (key == "seed")
        cfg.seed = static_cast<std::uint64_t>(parse_count(key, value));
    else if (key == "channel")
    {
        if (value == "rayleigh")
            cfg.channel = ChannelKind::rayleigh;
        else if (value == "ula-uniform")
            cfg.channel = ChannelKind::ula_uniform;
        else if (value == "ula-lemma2")
            cfg.channel = ChannelKind::ula_lemma2;
        else
            throw ConfigError("channel: expected rayleigh, ula-uniform or ula-lemma2");
    }
    else if (key == "theta")
        cfg.theta = parse_double(key, value);
    else if (key == "jitter")
        cfg.jitter = parse_double(key, value);
    else if (key == "scatterers")
        cfg.scatterers = parse_count(key, value);
    else if (key == "modes")
    {
        cfg.modes.clear();
        for (const auto &item : split_list(value))
        {
            if (item == "asb")
                cfg.modes.push_back(BeamformingMode::asb);
            else if (item == "hb")
                cfg.modes.push_back(BeamformingMode::hb);
            else if (item == "db")
                cfg.modes.push_back(BeamformingMode::db);
            else
                throw ConfigError("modes: unknown mode '" + item + "'");
        }
    }
    else if (key == "power")
    {
        if (value == "equal")
            cfg.policy = PowerPolicy::equal;
        else if (value == "waterfill")
            cfg.policy = PowerPolicy::waterfill;
        else
            throw ConfigError("power: expected equal or waterfill");
    }
    else if (key == "cpps_p")
        cfg.cpps_precision = static_cast<int>(parse_count(key, value));
    else if (key == "cpps_flow")
    {
        if (value == "asym")
            cfg.cpps_symmetric = false;
        else if (value == "sym")
            cfg.cpps_symmetric = true;
        else
            throw ConfigError("cpps_flow: expected asym or sym");
    }
    else if (key == "emit_bounds")
        cfg.emit_bounds = parse_bool(key, value);
    else if (key == "forced_equal")
        cfg.forced_equal = parse_bool(key, value);
    else if (key == "fixed_users")
        cfg.fixed_user_count = parse_bool(key, value);
    else if (key == "threads")
        cfg.threads = parse_count(key, value);
    else
        throw ConfigError("unknown config key '" + key + "'");
}

inline ExperimentConfig parse_config(std::istream &in)
{
    ExperimentConfig cfg;
    std::string line;
    arma::uword line_no = 0;
    while (std::getline(in, line))
    {
        line_no++;
        const auto hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = detail::trim(line);
        if (line.empty())
            continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        apply_config_entry(cfg, detail::trim(line.substr(0, eq)), detail::trim(line.substr(eq + 1)));
    }
    return cfg;
}

inline ExperimentConfig parse_config_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    return parse_config(in);
}

} // namespace hbsim

#endif
