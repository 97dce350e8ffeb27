#pragma once

// The three canonical farming strategies as day-steppable state machines over
// the lending and AMM models. Each day yields a WealthBreakdown that splits
// the aggregator's DAI-denominated value into its components.

#include <algorithm>
#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "yieldsim/amm.hpp"
#include "yieldsim/core.hpp"
#include "yieldsim/lending.hpp"
#include "yieldsim/trades.hpp"

namespace yieldsim::strategies {

inline const std::string kAggregator = "aggregator";

enum class Kind { simple_lending, leveraged_borrow, liquidity_provision };

constexpr std::string_view to_string(Kind k) {
    switch (k) {
    case Kind::simple_lending: return "simple_lending";
    case Kind::leveraged_borrow: return "leveraged_borrow";
    case Kind::liquidity_provision: return "liquidity_provision";
    }
    return "?";
}

inline Kind parse_kind(std::string_view s) {
    for (Kind k : {Kind::simple_lending, Kind::leveraged_borrow, Kind::liquidity_provision}) {
        if (to_string(k) == s) return k;
    }
    throw ConfigError("strategy.kind: unknown strategy '" + std::string(s) +
                      "' (expected simple_lending, leveraged_borrow or liquidity_provision)");
}

struct Markets {
    lending::LendingPool lending;
    amm::CpPool amm;
};

struct Options {
    double gov_price = 0.0;       // DAI per governance token, constant
    double ltv_per_spiral = 0.7;  // loan taken against each new deposit
    bool auto_compound = false;   // sell rewards daily and redeploy them
};

struct WealthBreakdown {
    int day = 0;
    double deposit_value = 0.0;
    double debt_value = 0.0;
    double lp_value = 0.0;
    double gov_value = 0.0;
    double cash = 0.0;
    double total = 0.0;
};

class Strategy {
public:
    static Strategy simple_lending(lending::LendingPool& pool, double capital, const Options& opts = {}) {
        Strategy s(Kind::simple_lending, opts, capital);
        pool.deposit(kAggregator, dai(capital));
        return s;
    }

    /// Deposits capital, then n times borrows ltv_per_spiral of the latest
    /// deposit and re-deposits it.
    static Strategy leveraged(lending::LendingPool& pool, double capital, int spirals,
                              const Options& opts = {}) {
        if (spirals < 0) throw ConfigError("strategy.spirals must be non-negative");
        if (!(opts.ltv_per_spiral >= 0.0) || opts.ltv_per_spiral > pool.collateral_factor()) {
            throw ConfigError("strategy.ltv_per_spiral must lie in [0, collateral_factor]");
        }
        Strategy s(Kind::leveraged_borrow, opts, capital);
        s.spirals_ = spirals;
        pool.deposit(kAggregator, dai(capital));
        double leg = capital;
        for (int k = 0; k < spirals; ++k) {
            leg *= opts.ltv_per_spiral;
            pool.borrow(kAggregator, dai(leg));
            pool.deposit(kAggregator, dai(leg));
        }
        return s;
    }

    /// Splits capital 50/50 by value at spot and supplies it as liquidity.
    static Strategy liquidity_provision(amm::CpPool& pool, double capital, const Options& opts = {}) {
        Strategy s(Kind::liquidity_provision, opts, capital);
        pool.add_liquidity(kAggregator, dai(capital));
        return s;
    }

    [[nodiscard]] Kind kind() const { return kind_; }
    [[nodiscard]] int spirals() const { return spirals_; }
    [[nodiscard]] int day() const { return day_; }
    [[nodiscard]] const Options& options() const { return opts_; }

    [[nodiscard]] WealthBreakdown wealth(const Markets& m) const {
        WealthBreakdown w;
        w.day = day_;
        w.cash = cash_;
        double gov_units = 0.0;
        if (kind_ == Kind::liquidity_provision) {
            w.lp_value = m.amm.share_of(kAggregator) * m.amm.pool_value_dai().value();
            gov_units = m.amm.gov_balance(kAggregator).value();
        } else {
            w.deposit_value = m.lending.deposit_value(kAggregator).value();
            w.debt_value = m.lending.debt_value(kAggregator).value();
            gov_units = m.lending.gov_balance(kAggregator).value();
        }
        w.gov_value = gov_units * opts_.gov_price;
        w.total = w.deposit_value - w.debt_value + w.lp_value + w.gov_value + w.cash;
        return w;
    }

    /// Advances one day: the day's trades hit the AMM, both markets accrue,
    /// and with auto_compound the day's rewards are sold and redeployed.
    WealthBreakdown step_day(Markets& m, const scenario::TradeSlice& trades = {}) {
        scenario::apply_trades(m.amm, trades.buy_dai, trades.sell_dai);
        m.lending.accrue_day();
        m.amm.accrue_day();
        if (opts_.auto_compound) compound(m);
        ++day_;
        return wealth(m);
    }

    /// Exits every position and returns the realized DAI, with leftover
    /// governance tokens valued at gov_price. Mutates the markets.
    double unwind(Markets& m) {
        if (kind_ == Kind::liquidity_provision) {
            double realized = cash_;
            const auto shares = m.amm.lp_balance(kAggregator);
            const double price = m.amm.spot_price();
            const auto [out_dai, out_eth] = m.amm.remove_liquidity(kAggregator, shares);
            realized += out_dai.value() + out_eth.value() * price;
            realized += m.amm.claim_gov(kAggregator).value() * opts_.gov_price;
            cash_ = 0.0;
            return realized;
        }
        auto& pool = m.lending;
        double cash = cash_ + pool.claim_gov(kAggregator).value() * opts_.gov_price;
        // Deleverage: free the collateral not needed by the remaining debt,
        // repay with it, repeat. Each round frees 1/collateral_factor times
        // more than the last, so this terminates quickly.
        for (int round = 0; pool.debt_value(kAggregator).value() > 0.0; ++round) {
            const double debt = pool.debt_value(kAggregator).value();
            if (cash < debt) {
                const double w = std::min(pool.withdrawable(kAggregator).value(),
                                          pool.free_liquidity().value());
                if (w <= 0.0 || round > 10000) {
                    throw lending::InsufficientLiquidity("cannot unwind: debt " + std::to_string(debt) +
                                                         " cannot be repaid from withdrawable collateral");
                }
                pool.withdraw(kAggregator, dai(w));
                cash += w;
            }
            const double r = std::min(cash, debt);
            pool.repay(kAggregator, dai(r));
            cash -= r;
        }
        const double rest = pool.deposit_value(kAggregator).value();
        pool.withdraw(kAggregator, dai(rest));
        cash_ = 0.0;
        return cash + rest;
    }

private:
    Strategy(Kind kind, const Options& opts, double capital) : kind_(kind), opts_(opts) {
        if (!(capital >= 0.0) || !std::isfinite(capital)) throw ConfigError("strategy.capital must be non-negative");
        if (!(opts.gov_price >= 0.0) || !std::isfinite(opts.gov_price)) throw ConfigError("gov_price must be non-negative");
    }

    void compound(Markets& m) {
        if (kind_ == Kind::liquidity_provision) {
            const double proceeds = m.amm.claim_gov(kAggregator).value() * opts_.gov_price;
            if (proceeds > 0.0) m.amm.add_liquidity(kAggregator, dai(proceeds));
            return;
        }
        double proceeds = m.lending.claim_gov(kAggregator).value() * opts_.gov_price;
        if (kind_ == Kind::leveraged_borrow) {
            const double r = std::min(proceeds, m.lending.debt_value(kAggregator).value());
            m.lending.repay(kAggregator, dai(r));
            proceeds -= r;
        }
        if (proceeds > 0.0) m.lending.deposit(kAggregator, dai(proceeds));
    }

    Kind kind_;
    Options opts_;
    int spirals_ = 0;
    int day_ = 0;
    double cash_ = 0.0;
};

}  // namespace yieldsim::strategies
