#pragma once

// Scenario configuration and its TOML form.
//
// Every settable scalar is described once in a field table (dotted path,
// type, accessor). File loading, `--set key=value` overrides, sweep axes and
// the normalized echo all go through that table, so they accept exactly the
// same names. Unknown keys are rejected.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#define TOML_EXCEPTIONS 1
#ifndef TOML_FLOAT_CHARCONV
#define TOML_FLOAT_CHARCONV 1  // shortest round-trip floats in the config echo
#endif
#include <toml.hpp>

#include "yieldsim/amm.hpp"
#include "yieldsim/core.hpp"
#include "yieldsim/lending.hpp"
#include "yieldsim/strategies.hpp"
#include "yieldsim/trades.hpp"
#include "yieldsim/vault.hpp"

namespace yieldsim::scenario {

struct LendingConfig {
    double total_deposits = 100.0;
    double utilization = 0.7;
    double borrow_apy = 0.10;
    double supply_apy = 0.03;
    double collateral_factor = 0.8;
    std::optional<double> liquidation_threshold;  // defaults to collateral_factor
    double emission_per_day = 0.01;
};

struct AmmConfig {
    double pool_value = 100.0;
    double initial_eth_price = 1.0;
    double fee_rate = 0.05;
    double emission_per_day = 0.01;
};

struct StrategyConfig {
    strategies::Kind kind = strategies::Kind::simple_lending;
    double capital = 1.0;
    std::int64_t spirals = 0;
    double ltv_per_spiral = 0.7;
    bool auto_compound = false;
};

struct FeesConfig {
    std::string preset = "none";
    vault::FeeConfig fees;
};

struct SweepAxis {
    std::string parameter;
    toml::array values;
};

/// Market sizes are platform totals at t = 0 including the aggregator's own
/// capital, so capital / total is the aggregator's initial share.
struct ScenarioConfig {
    std::int64_t horizon_days = 365;
    double gov_price = 0.0;
    LendingConfig lending;
    AmmConfig amm;
    StrategyConfig strategy;
    TradeSchedule trade_schedule;
    FeesConfig fees;
    std::vector<SweepAxis> sweep;
};

enum class FieldType { number, optional_number, integer, boolean, text };

struct Field {
    std::string_view path;
    FieldType type;
    std::function<void(ScenarioConfig&, const toml::node&)> set;
    std::function<void(const ScenarioConfig&, toml::table&)> emit;
};

namespace detail {

inline ConfigError type_error(std::string_view path, std::string_view expected, const toml::node& n) {
    std::ostringstream os;
    os << path << ": expected " << expected << ", got ";
    if (n.is_string()) {
        os << '"' << n.as_string()->get() << '"';
    } else {
        os << n.type();
    }
    return ConfigError(os.str());
}

inline double as_number(std::string_view path, const toml::node& n) {
    if (auto v = n.as_floating_point()) return v->get();
    if (auto v = n.as_integer()) return static_cast<double>(v->get());
    throw type_error(path, "number", n);
}

// Inserts value at a dotted path, creating intermediate tables.
template <typename T>
void put(toml::table& root, std::string_view path, T&& value) {
    toml::table* t = &root;
    std::size_t start = 0;
    for (std::size_t dot; (dot = path.find('.', start)) != std::string_view::npos; start = dot + 1) {
        auto key = path.substr(start, dot - start);
        auto [it, inserted] = t->insert(key, toml::table{});
        t = it->second.as_table();
    }
    t->insert_or_assign(path.substr(start), std::forward<T>(value));
}

inline Field number_field(std::string_view path, std::function<double&(ScenarioConfig&)> ref) {
    return {path, FieldType::number,
            [path, ref](ScenarioConfig& c, const toml::node& n) { ref(c) = as_number(path, n); },
            [path, ref](const ScenarioConfig& c, toml::table& t) {
                put(t, path, ref(const_cast<ScenarioConfig&>(c)));
            }};
}

}  // namespace detail

inline const std::vector<Field>& fields() {
    using detail::number_field;
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back({"horizon_days", FieldType::integer,
                     [](ScenarioConfig& c, const toml::node& n) {
                         auto v = n.as_integer();
                         if (!v) throw detail::type_error("horizon_days", "integer", n);
                         c.horizon_days = v->get();
                     },
                     [](const ScenarioConfig& c, toml::table& t) { detail::put(t, "horizon_days", c.horizon_days); }});
        f.push_back(number_field("gov_price", [](ScenarioConfig& c) -> double& { return c.gov_price; }));

        f.push_back(number_field("lending.total_deposits", [](ScenarioConfig& c) -> double& { return c.lending.total_deposits; }));
        f.push_back(number_field("lending.utilization", [](ScenarioConfig& c) -> double& { return c.lending.utilization; }));
        f.push_back(number_field("lending.borrow_apy", [](ScenarioConfig& c) -> double& { return c.lending.borrow_apy; }));
        f.push_back(number_field("lending.supply_apy", [](ScenarioConfig& c) -> double& { return c.lending.supply_apy; }));
        f.push_back(number_field("lending.collateral_factor", [](ScenarioConfig& c) -> double& { return c.lending.collateral_factor; }));
        f.push_back({"lending.liquidation_threshold", FieldType::optional_number,
                     [](ScenarioConfig& c, const toml::node& n) {
                         c.lending.liquidation_threshold = detail::as_number("lending.liquidation_threshold", n);
                     },
                     [](const ScenarioConfig& c, toml::table& t) {
                         detail::put(t, "lending.liquidation_threshold",
                                     c.lending.liquidation_threshold.value_or(c.lending.collateral_factor));
                     }});
        f.push_back(number_field("lending.emission_per_day", [](ScenarioConfig& c) -> double& { return c.lending.emission_per_day; }));

        f.push_back(number_field("amm.pool_value", [](ScenarioConfig& c) -> double& { return c.amm.pool_value; }));
        f.push_back(number_field("amm.initial_eth_price", [](ScenarioConfig& c) -> double& { return c.amm.initial_eth_price; }));
        f.push_back(number_field("amm.fee_rate", [](ScenarioConfig& c) -> double& { return c.amm.fee_rate; }));
        f.push_back(number_field("amm.emission_per_day", [](ScenarioConfig& c) -> double& { return c.amm.emission_per_day; }));

        f.push_back({"strategy.kind", FieldType::text,
                     [](ScenarioConfig& c, const toml::node& n) {
                         auto v = n.as_string();
                         if (!v) throw detail::type_error("strategy.kind", "string", n);
                         c.strategy.kind = strategies::parse_kind(v->get());
                     },
                     [](const ScenarioConfig& c, toml::table& t) {
                         detail::put(t, "strategy.kind", std::string(strategies::to_string(c.strategy.kind)));
                     }});
        f.push_back(number_field("strategy.capital", [](ScenarioConfig& c) -> double& { return c.strategy.capital; }));
        f.push_back({"strategy.spirals", FieldType::integer,
                     [](ScenarioConfig& c, const toml::node& n) {
                         auto v = n.as_integer();
                         if (!v) throw detail::type_error("strategy.spirals", "integer", n);
                         c.strategy.spirals = v->get();
                     },
                     [](const ScenarioConfig& c, toml::table& t) { detail::put(t, "strategy.spirals", c.strategy.spirals); }});
        f.push_back(number_field("strategy.ltv_per_spiral", [](ScenarioConfig& c) -> double& { return c.strategy.ltv_per_spiral; }));
        f.push_back({"strategy.auto_compound", FieldType::boolean,
                     [](ScenarioConfig& c, const toml::node& n) {
                         auto v = n.as_boolean();
                         if (!v) throw detail::type_error("strategy.auto_compound", "boolean", n);
                         c.strategy.auto_compound = v->get();
                     },
                     [](const ScenarioConfig& c, toml::table& t) { detail::put(t, "strategy.auto_compound", c.strategy.auto_compound); }});

        f.push_back(number_field("trade_schedule.eth_buy_volume_dai", [](ScenarioConfig& c) -> double& { return c.trade_schedule.eth_buy_volume_dai; }));
        f.push_back(number_field("trade_schedule.eth_sell_volume_dai", [](ScenarioConfig& c) -> double& { return c.trade_schedule.eth_sell_volume_dai; }));

        // Selecting a preset replaces every fee field; explicit fee keys in
        // the same file are applied after it.
        f.push_back({"fees.preset", FieldType::text,
                     [](ScenarioConfig& c, const toml::node& n) {
                         auto v = n.as_string();
                         if (!v) throw detail::type_error("fees.preset", "string", n);
                         auto preset = vault::find_preset(v->get());
                         if (!preset) throw ConfigError("fees.preset: unknown preset '" + v->get() + "'");
                         c.fees.preset = v->get();
                         c.fees.fees = *preset;
                     },
                     [](const ScenarioConfig& c, toml::table& t) { detail::put(t, "fees.preset", c.fees.preset); }});
        f.push_back(number_field("fees.performance_fee", [](ScenarioConfig& c) -> double& { return c.fees.fees.performance_fee; }));
        f.push_back(number_field("fees.withdrawal_fee", [](ScenarioConfig& c) -> double& { return c.fees.fees.withdrawal_fee; }));
        f.push_back(number_field("fees.management_fee_annual", [](ScenarioConfig& c) -> double& { return c.fees.fees.management_fee_annual; }));
        f.push_back(number_field("fees.buyback_fraction", [](ScenarioConfig& c) -> double& { return c.fees.fees.buyback_fraction; }));
        f.push_back(number_field("fees.performance_split_treasury", [](ScenarioConfig& c) -> double& { return c.fees.fees.performance_split_treasury; }));
        return f;
    }();
    return table;
}

inline const Field* find_field(std::string_view path) {
    for (const auto& f : fields()) {
        if (f.path == path) return &f;
    }
    return nullptr;
}

inline const Field& field_or_throw(std::string_view path) {
    if (const Field* f = find_field(path)) return *f;
    throw ConfigError("unknown configuration key '" + std::string(path) + "'");
}

/// Checks every invariant that can be checked without running.
inline void validate(const ScenarioConfig& c) {
    auto fail = [](const std::string& msg) { throw ConfigError(msg); };
    auto finite = [&](double v, const char* name) {
        if (!std::isfinite(v)) fail(std::string(name) + " must be finite");
    };
    if (c.horizon_days <= 0) fail("horizon_days must be positive");
    if (c.horizon_days > 1'000'000) fail("horizon_days must not exceed 1000000");
    finite(c.gov_price, "gov_price");
    if (c.gov_price < 0.0) fail("gov_price must be non-negative");

    const auto& l = c.lending;
    if (!(l.utilization >= 0.0 && l.utilization <= 1.0)) {
        fail("lending.utilization must lie in [0, 1], got " + std::to_string(l.utilization));
    }
    if (!(l.total_deposits > 0.0) || !std::isfinite(l.total_deposits)) fail("lending.total_deposits must be positive");
    if (!(l.borrow_apy >= 0.0) || !std::isfinite(l.borrow_apy)) fail("lending.borrow_apy must be non-negative");
    if (!(l.supply_apy >= 0.0) || !std::isfinite(l.supply_apy)) fail("lending.supply_apy must be non-negative");
    if (!(l.collateral_factor > 0.0 && l.collateral_factor <= 1.0)) fail("lending.collateral_factor must lie in (0, 1]");
    if (l.liquidation_threshold && !(*l.liquidation_threshold >= l.collateral_factor)) {
        fail("lending.liquidation_threshold must be >= lending.collateral_factor");
    }
    if (!(l.emission_per_day >= 0.0) || !std::isfinite(l.emission_per_day)) fail("lending.emission_per_day must be non-negative");

    const auto& a = c.amm;
    if (!(a.pool_value > 0.0) || !std::isfinite(a.pool_value)) fail("amm.pool_value must be positive");
    if (!(a.initial_eth_price > 0.0) || !std::isfinite(a.initial_eth_price)) fail("amm.initial_eth_price must be positive");
    if (!(a.fee_rate >= 0.0 && a.fee_rate < 1.0)) fail("amm.fee_rate must lie in [0, 1)");
    if (!(a.emission_per_day >= 0.0) || !std::isfinite(a.emission_per_day)) fail("amm.emission_per_day must be non-negative");

    const auto& s = c.strategy;
    if (!(s.capital >= 0.0) || !std::isfinite(s.capital)) fail("strategy.capital must be non-negative");
    if (s.spirals < 0) fail("strategy.spirals must be non-negative");
    if (s.spirals > 1000) fail("strategy.spirals must not exceed 1000");
    if (!(s.ltv_per_spiral >= 0.0 && s.ltv_per_spiral <= l.collateral_factor)) {
        fail("strategy.ltv_per_spiral must lie in [0, lending.collateral_factor]");
    }
    if (s.kind == strategies::Kind::liquidity_provision) {
        if (!(s.capital < a.pool_value)) fail("strategy.capital must be smaller than amm.pool_value");
    } else {
        if (!(s.capital < l.total_deposits)) fail("strategy.capital must be smaller than lending.total_deposits");
        const double background = l.total_deposits - s.capital;
        if (l.utilization * l.total_deposits > background) {
            fail("lending.utilization leaves borrows above the non-aggregator deposits");
        }
    }

    const auto& t = c.trade_schedule;
    if (!(t.eth_buy_volume_dai >= 0.0) || !std::isfinite(t.eth_buy_volume_dai)) {
        fail("trade_schedule.eth_buy_volume_dai must be non-negative");
    }
    if (!(t.eth_sell_volume_dai >= 0.0) || !std::isfinite(t.eth_sell_volume_dai)) {
        fail("trade_schedule.eth_sell_volume_dai must be non-negative");
    }
    c.fees.fees.validate();

    if (c.sweep.size() > 2) fail("sweep supports at most 2 axes");
    for (const auto& axis : c.sweep) {
        const Field& f = field_or_throw(axis.parameter);
        if (axis.values.empty()) fail("sweep axis '" + axis.parameter + "' has no values");
        for (const auto& v : axis.values) {
            ScenarioConfig probe = c;
            probe.sweep.clear();
            f.set(probe, v);
            validate(probe);
        }
    }
}

namespace detail {

inline void load_table(ScenarioConfig& c, const toml::table& t, const std::string& prefix) {
    // Apply the fee preset before any explicit fee values.
    if (prefix == "fees.") {
        if (auto p = t.get("preset")) field_or_throw("fees.preset").set(c, *p);
    }
    for (const auto& [k, node] : t) {
        const std::string key = prefix + std::string(k.str());
        if (key == "sweep") continue;
        if (key == "fees.preset") continue;
        if (auto sub = node.as_table()) {
            if (!prefix.empty() || !(key == "lending" || key == "amm" || key == "strategy" ||
                                     key == "trade_schedule" || key == "fees")) {
                throw ConfigError("unknown configuration table '" + key + "'");
            }
            load_table(c, *sub, key + ".");
            continue;
        }
        field_or_throw(key).set(c, node);
    }
}

inline std::vector<SweepAxis> load_sweep(const toml::node& node) {
    const auto* arr = node.as_array();
    if (!arr || !arr->is_array_of_tables()) {
        throw ConfigError("sweep must be an array of tables ([[sweep]] with parameter and values)");
    }
    std::vector<SweepAxis> axes;
    for (const auto& entry : *arr) {
        const auto& t = *entry.as_table();
        for (const auto& [k, v] : t) {
            if (k != "parameter" && k != "values") {
                throw ConfigError("unknown configuration key 'sweep." + std::string(k.str()) + "'");
            }
        }
        SweepAxis axis;
        auto param = t["parameter"].value<std::string>();
        if (!param) throw ConfigError("sweep.parameter must be a string");
        axis.parameter = *param;
        field_or_throw(axis.parameter);
        const auto* values = t["values"].as_array();
        if (!values) throw ConfigError("sweep.values must be an array");
        axis.values = *values;
        axes.push_back(std::move(axis));
    }
    return axes;
}

}  // namespace detail

/// Parses a scenario from TOML text; `origin` names the source in errors.
inline ScenarioConfig parse_config(std::string_view text, std::string_view origin = "<string>") {
    toml::table root;
    try {
        root = toml::parse(text, origin);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << origin << ":" << e.source().begin.line << ": " << e.description();
        throw ConfigError(os.str());
    }
    ScenarioConfig c;
    detail::load_table(c, root, "");
    if (auto s = root.get("sweep")) c.sweep = detail::load_sweep(*s);
    return c;
}

inline ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open config file '" + path.string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str(), path.string());
}

/// Applies a `key=value` override. The value is read as a TOML value when it
/// parses as one, otherwise as a bare string.
inline void apply_override(ScenarioConfig& c, std::string_view assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string_view::npos || eq == 0) {
        throw ConfigError("override '" + std::string(assignment) + "' is not of the form key=value");
    }
    const std::string key(assignment.substr(0, eq));
    const std::string raw(assignment.substr(eq + 1));
    const Field& f = field_or_throw(key);
    toml::table doc;
    try {
        doc = toml::parse("v = " + raw);
    } catch (const toml::parse_error&) {
        doc = toml::table{{"v", raw}};
    }
    f.set(c, *doc.get("v"));
}

/// Normalized, fully-populated TOML for the effective configuration.
inline std::string to_toml(const ScenarioConfig& c) {
    toml::table t;
    for (const auto& f : fields()) f.emit(c, t);
    if (!c.sweep.empty()) {
        toml::array axes;
        for (const auto& axis : c.sweep) {
            axes.push_back(toml::table{{"parameter", axis.parameter}, {"values", axis.values}});
        }
        t.insert("sweep", std::move(axes));
    }
    std::ostringstream os;
    os << t << '\n';
    return os.str();
}

}  // namespace yieldsim::scenario
