#pragma once

// Day-stepping runner, parameter sweeps and CSV output.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "yieldsim/config.hpp"
#include "yieldsim/strategies.hpp"
#include "yieldsim/vault.hpp"

namespace yieldsim::scenario {

struct Row {
    strategies::WealthBreakdown wealth;
    double utilization = 0.0;
    double spot_price = 0.0;
    double pool_value = 0.0;
    double pps = 1.0;
    // Not written to CSV; kept for invariant checks.
    double reserve_dai = 0.0;
    double reserve_eth = 0.0;
};

struct TimeSeries {
    std::vector<Row> rows;

    [[nodiscard]] const Row& final_row() const { return rows.back(); }
    [[nodiscard]] double final_total() const { return rows.back().wealth.total; }
};

namespace detail {

inline strategies::Markets bootstrap_markets(const ScenarioConfig& c) {
    using strategies::Kind;
    const bool lends = c.strategy.kind != Kind::liquidity_provision;
    const double capital = c.strategy.capital;

    lending::PoolParams lp;
    lp.total_deposits = lends ? c.lending.total_deposits - capital : c.lending.total_deposits;
    const double borrows = c.lending.utilization * c.lending.total_deposits;
    lp.utilization = lp.total_deposits > 0.0 ? std::min(borrows / lp.total_deposits, 1.0) : 0.0;
    lp.borrow_apy = Rate(c.lending.borrow_apy);
    lp.supply_apy = Rate(c.lending.supply_apy);
    lp.collateral_factor = c.lending.collateral_factor;
    if (c.lending.liquidation_threshold) lp.liquidation_threshold = *c.lending.liquidation_threshold;
    lp.emission_per_day = c.lending.emission_per_day;

    amm::PoolParams ap;
    ap.pool_value_dai = lends ? c.amm.pool_value : c.amm.pool_value - capital;
    ap.initial_eth_price = c.amm.initial_eth_price;
    ap.fee_rate = c.amm.fee_rate;
    ap.emission_per_day = c.amm.emission_per_day;

    return {lending::LendingPool::bootstrap(lp), amm::CpPool::bootstrap(ap)};
}

inline strategies::Strategy init_strategy(const ScenarioConfig& c, strategies::Markets& m) {
    strategies::Options opts;
    opts.gov_price = c.gov_price;
    opts.ltv_per_spiral = c.strategy.ltv_per_spiral;
    opts.auto_compound = c.strategy.auto_compound;
    switch (c.strategy.kind) {
    case strategies::Kind::simple_lending:
        return strategies::Strategy::simple_lending(m.lending, c.strategy.capital, opts);
    case strategies::Kind::leveraged_borrow:
        return strategies::Strategy::leveraged(m.lending, c.strategy.capital,
                                               static_cast<int>(c.strategy.spirals), opts);
    case strategies::Kind::liquidity_provision:
        return strategies::Strategy::liquidity_provision(m.amm, c.strategy.capital, opts);
    }
    throw ConfigError("unhandled strategy kind");
}

inline Row observe(const strategies::WealthBreakdown& w, const strategies::Markets& m,
                   const vault::Vault& v) {
    Row r;
    r.wealth = w;
    r.utilization = m.lending.utilization();
    r.spot_price = m.amm.spot_price();
    r.pool_value = m.amm.pool_value_dai().value();
    r.pps = v.price_per_share();
    r.reserve_dai = m.amm.reserve_dai();
    r.reserve_eth = m.amm.reserve_eth();
    return r;
}

}  // namespace detail

/// Everything a run produced, including the final market state so callers
/// can unwind or inspect it.
struct RunResult {
    TimeSeries series;
    strategies::Markets markets;
    strategies::Strategy strategy;
    vault::Vault vault;
};

/// Runs the base scenario (sweep axes are ignored). Each day applies the
/// trade slice, accrues both markets, then books the day's change in W into
/// the vault, where fees are assessed. Fees are an accounting overlay on
/// the vault's share price; W itself is gross of fees.
inline RunResult run_detailed(const ScenarioConfig& config) {
    validate(config);
    auto markets = detail::bootstrap_markets(config);
    auto strategy = detail::init_strategy(config, markets);
    vault::Vault v(config.fees.fees);
    if (config.strategy.capital > 0.0) v.deposit(dai(config.strategy.capital));

    const int horizon = static_cast<int>(config.horizon_days);
    TimeSeries ts;
    ts.rows.reserve(static_cast<std::size_t>(horizon) + 1);
    auto w = strategy.wealth(markets);
    ts.rows.push_back(detail::observe(w, markets, v));

    for (int day = 0; day < horizon; ++day) {
        try {
            const auto slice = daily_trade_slice(config.trade_schedule, horizon, day);
            const double before = w.total;
            w = strategy.step_day(markets, slice);
            v.harvest(w.total - before);
            v.accrue_management_fee(1);
            ts.rows.push_back(detail::observe(w, markets, v));
        } catch (const SimulationError& e) {
            throw SimulationError("day " + std::to_string(day + 1) + ": " + e.what());
        }
    }
    return {std::move(ts), std::move(markets), std::move(strategy), std::move(v)};
}

inline TimeSeries run(const ScenarioConfig& config) { return run_detailed(config).series; }

inline std::string format_number(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
    return buf;
}

// Axis values as written in index.csv.
inline std::string render_value(const toml::node& n) {
    if (auto f = n.as_floating_point()) return format_number(f->get());
    std::ostringstream os;
    n.visit([&os](const auto& v) { os << v; });
    return os.str();
}

struct SweepPoint {
    // (parameter, value rendered as TOML) per axis, in axis order.
    std::vector<std::pair<std::string, std::string>> assignment;
    ScenarioConfig config;
    TimeSeries series;
};

/// Cartesian product of the sweep axes in row-major order (last axis fastest).
/// Points run on up to `jobs` threads; output order never depends on it.
inline std::vector<SweepPoint> sweep(const ScenarioConfig& config, int jobs = 1) {
    validate(config);
    std::vector<SweepPoint> points(1);
    points[0].config = config;
    points[0].config.sweep.clear();
    for (const auto& axis : config.sweep) {
        const Field& f = field_or_throw(axis.parameter);
        std::vector<SweepPoint> next;
        next.reserve(points.size() * axis.values.size());
        for (const auto& p : points) {
            for (const auto& v : axis.values) {
                SweepPoint q = p;
                f.set(q.config, v);
                q.assignment.emplace_back(axis.parameter, render_value(v));
                next.push_back(std::move(q));
            }
        }
        points = std::move(next);
    }

    const std::size_t workers =
        std::clamp<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), 1, points.size());
    std::atomic<std::size_t> next_index{0};
    std::vector<std::exception_ptr> failures(points.size());
    auto work = [&] {
        for (std::size_t i; (i = next_index.fetch_add(1)) < points.size();) {
            try {
                points[i].series = run(points[i].config);
            } catch (...) {
                failures[i] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
    }
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
    return points;
}

inline constexpr const char* kCsvHeader =
    "day,total,deposit_value,debt_value,lp_value,gov_value,cash,utilization,spot_price,pool_value,pps";

inline std::string to_csv(const TimeSeries& ts) {
    std::string out = kCsvHeader;
    out += '\n';
    for (const auto& r : ts.rows) {
        const auto& w = r.wealth;
        out += std::to_string(w.day);
        for (double v : {w.total, w.deposit_value, w.debt_value, w.lp_value, w.gov_value, w.cash,
                         r.utilization, r.spot_price, r.pool_value, r.pps}) {
            out += ',';
            out += format_number(v);
        }
        out += '\n';
    }
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out << text;
    out.close();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline void write_csv(const TimeSeries& ts, const std::filesystem::path& path) {
    write_text(path, to_csv(ts));
}

/// One CSV per point (point_NNNN.csv), an index.csv mapping points to files
/// and axis values, and final_w.dat: the final-W surface in gnuplot's
/// blank-line-separated block format.
inline void write_sweep(const std::vector<SweepPoint>& points, const std::filesystem::path& dir) {
    std::string index = "point,file";
    if (!points.empty()) {
        for (const auto& [param, value] : points.front().assignment) index += "," + param;
    }
    index += ",final_total\n";
    std::string surface;
    std::string prev_outer;
    for (std::size_t i = 0; i < points.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "point_%04zu.csv", i);
        write_csv(points[i].series, dir / name);
        index += std::to_string(i) + "," + name;
        for (const auto& [param, value] : points[i].assignment) index += "," + value;
        const std::string final_w = format_number(points[i].series.final_total());
        index += "," + final_w + "\n";

        const auto& a = points[i].assignment;
        if (a.size() == 2 && i > 0 && a[0].second != prev_outer) surface += '\n';
        if (!a.empty()) prev_outer = a[0].second;
        for (const auto& [param, value] : a) surface += value + " ";
        surface += final_w + "\n";
    }
    write_text(dir / "index.csv", index);
    write_text(dir / "final_w.dat", surface);
}

}  // namespace yieldsim::scenario
