#pragma once

// Two-asset constant-product pool (DAI/ETH).
//
// The swap fee is taken on the output side: a trader receives (1 - fee) of the
// fee-free constant-product quantity and the remainder stays in the reserves,
// accruing to liquidity providers.

#include <cmath>
#include <map>
#include <string>
#include <utility>

#include "yieldsim/core.hpp"

namespace yieldsim::amm {

using AccountId = std::string;

/// Holder of the liquidity present before any tracked account joins.
inline const AccountId kBackground = "@background";

class InsufficientShares : public SimulationError {
public:
    using SimulationError::SimulationError;
};
class EmptyPool : public SimulationError {
public:
    using SimulationError::SimulationError;
};

struct PoolParams {
    double pool_value_dai = 100.0;
    double initial_eth_price = 1.0;
    double fee_rate = 0.05;
    double emission_per_day = 0.01;
};

struct LpAccount {
    double lp_balance = 0.0;
    double gov_balance = 0.0;
};

class CpPool {
public:
    /// Equal-value reserves totalling pool_value_dai. The initial LP supply
    /// of 1.0 belongs to kBackground.
    static CpPool bootstrap(const PoolParams& p) {
        if (!(p.pool_value_dai > 0.0) || !std::isfinite(p.pool_value_dai)) {
            throw ConfigError("pool_value must be positive");
        }
        if (!(p.initial_eth_price > 0.0) || !std::isfinite(p.initial_eth_price)) {
            throw ConfigError("initial_eth_price must be positive");
        }
        if (!(p.fee_rate >= 0.0 && p.fee_rate < 1.0)) {
            throw ConfigError("fee_rate must lie in [0, 1)");
        }
        if (!(p.emission_per_day >= 0.0) || !std::isfinite(p.emission_per_day)) {
            throw ConfigError("emission_per_day must be non-negative");
        }
        CpPool pool;
        pool.reserve_dai_ = p.pool_value_dai / 2.0;
        pool.reserve_eth_ = pool.reserve_dai_ / p.initial_eth_price;
        pool.fee_rate_ = p.fee_rate;
        pool.emission_per_day_ = p.emission_per_day;
        pool.lp_supply_ = 1.0;
        pool.lp_accounts_[kBackground].lp_balance = 1.0;
        return pool;
    }

    /// Deposits value_dai worth of both assets at the current ratio (half
    /// in each) and returns the LP shares minted.
    Amount add_liquidity(const AccountId& id, const Amount& value_dai) {
        require(value_dai, Unit::dai);
        if (value_dai.is_zero()) return lp_shares(0.0);
        const double value = pool_value_dai().value();
        if (value <= 0.0) throw EmptyPool("cannot add liquidity to an empty pool");
        const double fraction = value_dai.value() / value;
        const double minted = lp_supply_ * fraction;
        reserve_dai_ += reserve_dai_ * fraction;
        reserve_eth_ += reserve_eth_ * fraction;
        lp_supply_ += minted;
        lp_accounts_[id].lp_balance += minted;
        return lp_shares(minted);
    }

    std::pair<Amount, Amount> remove_liquidity(const AccountId& id, const Amount& shares) {
        require(shares, Unit::lp_share);
        if (shares.is_zero()) return {dai(0.0), eth(0.0)};
        auto it = lp_accounts_.find(id);
        const double balance = it == lp_accounts_.end() ? 0.0 : it->second.lp_balance;
        if (shares.value() > balance) {
            throw InsufficientShares("cannot burn " + std::to_string(shares.value()) +
                                     " LP shares, balance is " + std::to_string(balance));
        }
        const double fraction = shares.value() / lp_supply_;
        const double out_dai = reserve_dai_ * fraction;
        const double out_eth = reserve_eth_ * fraction;
        it->second.lp_balance -= shares.value();
        if (shares.value() == lp_supply_) {
            reserve_dai_ = 0.0;
            reserve_eth_ = 0.0;
            lp_supply_ = 0.0;
        } else {
            reserve_dai_ -= out_dai;
            reserve_eth_ -= out_eth;
            lp_supply_ -= shares.value();
        }
        return {dai(out_dai), eth(out_eth)};
    }

    Amount swap_dai_for_eth(const Amount& dai_in) {
        require(dai_in, Unit::dai);
        if (dai_in.is_zero()) return eth(0.0);
        require_liquid();
        return eth(execute(reserve_dai_, reserve_eth_, dai_in.value()));
    }

    Amount swap_eth_for_dai(const Amount& eth_in) {
        require(eth_in, Unit::eth);
        if (eth_in.is_zero()) return dai(0.0);
        require_liquid();
        return dai(execute(reserve_eth_, reserve_dai_, eth_in.value()));
    }

    /// DAI per ETH at the margin.
    [[nodiscard]] double spot_price() const {
        require_liquid();
        return reserve_dai_ / reserve_eth_;
    }

    /// Both reserves have equal value at the pool's own spot price.
    [[nodiscard]] Amount pool_value_dai() const { return dai(2.0 * reserve_dai_); }

    /// Emission credited pro-rata to every LP balance.
    void accrue_day() {
        if (lp_supply_ <= 0.0) return;
        for (auto& [id, acct] : lp_accounts_) {
            acct.gov_balance += emission_per_day_ * (acct.lp_balance / lp_supply_);
        }
    }

    Amount claim_gov(const AccountId& id) {
        auto it = lp_accounts_.find(id);
        if (it == lp_accounts_.end()) return gov(0.0);
        const double taken = it->second.gov_balance;
        it->second.gov_balance = 0.0;
        return gov(taken);
    }

    [[nodiscard]] Amount lp_balance(const AccountId& id) const {
        auto it = lp_accounts_.find(id);
        return lp_shares(it == lp_accounts_.end() ? 0.0 : it->second.lp_balance);
    }
    [[nodiscard]] Amount gov_balance(const AccountId& id) const {
        auto it = lp_accounts_.find(id);
        return gov(it == lp_accounts_.end() ? 0.0 : it->second.gov_balance);
    }
    [[nodiscard]] double share_of(const AccountId& id) const {
        return lp_supply_ > 0.0 ? lp_balance(id).value() / lp_supply_ : 0.0;
    }

    [[nodiscard]] double reserve_dai() const { return reserve_dai_; }
    [[nodiscard]] double reserve_eth() const { return reserve_eth_; }
    [[nodiscard]] double invariant() const { return reserve_dai_ * reserve_eth_; }
    [[nodiscard]] double lp_supply() const { return lp_supply_; }
    [[nodiscard]] double fee_rate() const { return fee_rate_; }
    [[nodiscard]] double emission_per_day() const { return emission_per_day_; }
    [[nodiscard]] const std::map<AccountId, LpAccount>& lp_accounts() const { return lp_accounts_; }

private:
    CpPool() = default;

    // Output is (1 - fee) times the fee-free constant-product output,
    // rounded down so the product of reserves never falls by rounding.
    double execute(double& reserve_in, double& reserve_out, double amount_in) {
        const double k = reserve_in * reserve_out;
        const double fee_free = reserve_out * amount_in / (reserve_in + amount_in);
        const double new_in = reserve_in + amount_in;
        double new_out = reserve_out - (1.0 - fee_rate_) * fee_free;
        while (new_in * new_out < k) new_out = std::nextafter(new_out, reserve_out);
        reserve_in = new_in;
        const double out = reserve_out - new_out;
        reserve_out = new_out;
        return out;
    }

    static void require(const Amount& a, Unit u) {
        if (a.unit() != u) {
            throw UnitMismatch("expected " + std::string(to_string(u)) + ", got " +
                               std::string(to_string(a.unit())));
        }
    }
    void require_liquid() const {
        if (!(reserve_dai_ > 0.0 && reserve_eth_ > 0.0)) throw EmptyPool("pool has no reserves");
    }

    double reserve_dai_ = 0.0;
    double reserve_eth_ = 0.0;
    double fee_rate_ = 0.0;
    double emission_per_day_ = 0.0;
    double lp_supply_ = 0.0;
    std::map<AccountId, LpAccount> lp_accounts_;
};

/// Mark-to-market of an LP position against simply holding the assets it was
/// opened with, both valued at the pool's current spot price. Negative values
/// are a loss relative to holding.
inline double divergence_loss(double initial_dai, double initial_eth, const CpPool& pool,
                              double lp_share_fraction) {
    if (!(lp_share_fraction >= 0.0 && lp_share_fraction <= 1.0)) {
        throw std::invalid_argument("lp_share_fraction must lie in [0, 1]");
    }
    const double price = pool.spot_price();
    const double in_pool = lp_share_fraction * (pool.reserve_dai() + pool.reserve_eth() * price);
    const double held = initial_dai + initial_eth * price;
    return in_pool - held;
}

}  // namespace yieldsim::amm
