#pragma once

// Pooled lending platform with collateralized borrowing.
//
// Balances are held as index-scaled principal: an account's current value is
// its scaled principal times the pool-wide supply (or borrow) index. Accruing
// a day multiplies the two indices, so interest is O(1) regardless of the
// number of accounts. Non-aggregator participants are folded into a single
// background position whose principal never changes; their deposits and
// withdrawals are assumed to cancel out in aggregate.

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "yieldsim/core.hpp"

namespace yieldsim::lending {

using AccountId = std::string;

class InsufficientCollateral : public SimulationError {
public:
    using SimulationError::SimulationError;
};
class InsufficientLiquidity : public SimulationError {
public:
    using SimulationError::SimulationError;
};
class CollateralLocked : public SimulationError {
public:
    using SimulationError::SimulationError;
};
class OverRepay : public SimulationError {
public:
    using SimulationError::SimulationError;
};
class InsufficientBalance : public SimulationError {
public:
    using SimulationError::SimulationError;
};
class EmptyPool : public SimulationError {
public:
    using SimulationError::SimulationError;
};

struct PoolParams {
    double total_deposits = 100.0;
    double utilization = 0.7;
    Rate borrow_apy{0.10};
    Rate supply_apy{0.03};
    double collateral_factor = 0.8;
    // NaN means "same as collateral_factor".
    double liquidation_threshold = std::numeric_limits<double>::quiet_NaN();
    double emission_per_day = 0.01;
};

enum class HealthStatus { healthy, liquidatable };

struct Account {
    double deposit_scaled = 0.0;
    double debt_scaled = 0.0;
    double gov_balance = 0.0;
};

class LendingPool {
public:
    static LendingPool bootstrap(const PoolParams& p) {
        if (!(p.utilization >= 0.0 && p.utilization <= 1.0)) {
            throw ConfigError("utilization must lie in [0, 1], got " + std::to_string(p.utilization));
        }
        if (!(p.total_deposits >= 0.0) || !std::isfinite(p.total_deposits)) {
            throw ConfigError("total_deposits must be non-negative");
        }
        if (!(p.collateral_factor > 0.0 && p.collateral_factor <= 1.0)) {
            throw ConfigError("collateral_factor must lie in (0, 1]");
        }
        if (!(p.emission_per_day >= 0.0) || !std::isfinite(p.emission_per_day)) {
            throw ConfigError("emission_per_day must be non-negative");
        }
        LendingPool pool;
        pool.borrow_apy_ = p.borrow_apy;
        pool.supply_apy_ = p.supply_apy;
        pool.supply_daily_ = daily_factor(p.supply_apy);
        pool.borrow_daily_ = daily_factor(p.borrow_apy);
        pool.collateral_factor_ = p.collateral_factor;
        pool.liquidation_threshold_ =
            std::isnan(p.liquidation_threshold) ? p.collateral_factor : p.liquidation_threshold;
        if (pool.liquidation_threshold_ < pool.collateral_factor_) {
            throw ConfigError("liquidation_threshold must be >= collateral_factor");
        }
        pool.emission_per_day_ = p.emission_per_day;
        pool.background_.deposit_scaled = p.total_deposits;
        pool.background_.debt_scaled = p.utilization * p.total_deposits;
        pool.deposit_scaled_total_ = pool.background_.deposit_scaled;
        pool.debt_scaled_total_ = pool.background_.debt_scaled;
        return pool;
    }

    void deposit(const AccountId& id, const Amount& amount) {
        require_dai(amount);
        if (amount.is_zero()) return;
        const double scaled = amount.value() / supply_index_;
        accounts_[id].deposit_scaled += scaled;
        deposit_scaled_total_ += scaled;
    }

    void borrow(const AccountId& id, const Amount& amount) {
        require_dai(amount);
        if (amount.is_zero()) return;
        const Account& acct = accounts_[id];
        const double headroom = collateral_factor_ * acct.deposit_scaled * supply_index_ -
                                acct.debt_scaled * borrow_index_;
        if (exceeds(amount.value(), headroom)) {
            throw InsufficientCollateral("borrow of " + std::to_string(amount.value()) +
                                         " exceeds collateral headroom " + std::to_string(headroom));
        }
        const double free = free_liquidity().value();
        if (exceeds(amount.value(), free)) {
            throw InsufficientLiquidity("borrow of " + std::to_string(amount.value()) +
                                        " exceeds free liquidity " + std::to_string(free));
        }
        const double scaled = amount.value() / borrow_index_;
        accounts_[id].debt_scaled += scaled;
        debt_scaled_total_ += scaled;
    }

    void repay(const AccountId& id, const Amount& amount) {
        require_dai(amount);
        if (amount.is_zero()) return;
        Account& acct = account_or_throw(id);
        const double debt = acct.debt_scaled * borrow_index_;
        if (exceeds(amount.value(), debt)) {
            throw OverRepay("repayment of " + std::to_string(amount.value()) + " exceeds debt " +
                            std::to_string(debt));
        }
        const double scaled = std::min(amount.value() / borrow_index_, acct.debt_scaled);
        acct.debt_scaled -= scaled;
        debt_scaled_total_ -= scaled;
        if (acct.debt_scaled * borrow_index_ <= tolerance(debt)) {
            debt_scaled_total_ -= acct.debt_scaled;
            acct.debt_scaled = 0.0;
        }
    }

    void withdraw(const AccountId& id, const Amount& amount) {
        require_dai(amount);
        if (amount.is_zero()) return;
        Account& acct = account_or_throw(id);
        const double balance = acct.deposit_scaled * supply_index_;
        if (exceeds(amount.value(), balance)) {
            throw InsufficientBalance("withdrawal of " + std::to_string(amount.value()) +
                                      " exceeds deposit " + std::to_string(balance));
        }
        const double remaining = std::max(balance - amount.value(), 0.0);
        const double debt = acct.debt_scaled * borrow_index_;
        if (debt > 0.0 && exceeds(debt, collateral_factor_ * remaining)) {
            throw CollateralLocked("withdrawal would leave debt " + std::to_string(debt) +
                                   " undercollateralized");
        }
        const double free = free_liquidity().value();
        if (exceeds(amount.value(), free)) {
            throw InsufficientLiquidity("withdrawal of " + std::to_string(amount.value()) +
                                        " exceeds free liquidity " + std::to_string(free));
        }
        const double scaled = std::min(amount.value() / supply_index_, acct.deposit_scaled);
        acct.deposit_scaled -= scaled;
        deposit_scaled_total_ -= scaled;
        if (acct.deposit_scaled * supply_index_ <= tolerance(balance)) {
            deposit_scaled_total_ -= acct.deposit_scaled;
            acct.deposit_scaled = 0.0;
        }
    }

    /// One day of interest on both indices, then the day's governance
    /// emission: half to lenders pro-rata by deposit, half to borrowers
    /// pro-rata by debt. A side with no participants forfeits its half.
    void accrue_day() {
        supply_index_ *= supply_daily_;
        borrow_index_ *= borrow_daily_;
        const double half = emission_per_day_ / 2.0;
        for (auto& [id, acct] : accounts_) {
            if (deposit_scaled_total_ > 0.0) {
                acct.gov_balance += half * (acct.deposit_scaled / deposit_scaled_total_);
            }
            if (debt_scaled_total_ > 0.0) {
                acct.gov_balance += half * (acct.debt_scaled / debt_scaled_total_);
            }
        }
    }

    [[nodiscard]] double utilization() const {
        const double deposits = total_deposits().value();
        if (deposits <= 0.0) throw EmptyPool("utilization undefined for an empty pool");
        return total_borrows().value() / deposits;
    }

    [[nodiscard]] HealthStatus check_liquidation(const AccountId& id, double collateral_price,
                                                 double debt_price) const {
        if (!(collateral_price > 0.0) || !(debt_price > 0.0)) {
            throw std::invalid_argument("prices must be positive");
        }
        const double debt = debt_value(id).value() * debt_price;
        if (debt <= 0.0) return HealthStatus::healthy;
        const double collateral = deposit_value(id).value() * collateral_price;
        if (collateral <= 0.0) return HealthStatus::liquidatable;
        return debt / collateral > liquidation_threshold_ ? HealthStatus::liquidatable
                                                          : HealthStatus::healthy;
    }

    [[nodiscard]] Amount total_deposits() const { return dai(deposit_scaled_total_ * supply_index_); }
    [[nodiscard]] Amount total_borrows() const { return dai(debt_scaled_total_ * borrow_index_); }

    /// Cash the pool can pay out. Background borrowers accrue faster than
    /// background lenders when borrow_apy > supply_apy, so this floors at 0.
    [[nodiscard]] Amount free_liquidity() const {
        return dai(std::max(total_deposits().value() - total_borrows().value(), 0.0));
    }

    [[nodiscard]] Amount deposit_value(const AccountId& id) const {
        const Account* a = find(id);
        return dai(a ? a->deposit_scaled * supply_index_ : 0.0);
    }
    [[nodiscard]] Amount debt_value(const AccountId& id) const {
        const Account* a = find(id);
        return dai(a ? a->debt_scaled * borrow_index_ : 0.0);
    }
    [[nodiscard]] Amount gov_balance(const AccountId& id) const {
        const Account* a = find(id);
        return gov(a ? a->gov_balance : 0.0);
    }
    /// Largest withdrawal allowed by the account's own collateral requirement.
    [[nodiscard]] Amount withdrawable(const AccountId& id) const {
        const double deposit = deposit_value(id).value();
        const double debt = debt_value(id).value();
        return dai(std::clamp(deposit - debt / collateral_factor_, 0.0, deposit));
    }

    /// Moves an account's governance tokens out of the pool (sold or
    /// transferred); returns the amount taken.
    Amount claim_gov(const AccountId& id) {
        auto it = accounts_.find(id);
        if (it == accounts_.end()) return gov(0.0);
        const double taken = it->second.gov_balance;
        it->second.gov_balance = 0.0;
        return gov(taken);
    }

    [[nodiscard]] Amount background_deposits() const {
        return dai(background_.deposit_scaled * supply_index_);
    }
    [[nodiscard]] Amount background_borrows() const {
        return dai(background_.debt_scaled * borrow_index_);
    }
    [[nodiscard]] const std::map<AccountId, Account>& accounts() const { return accounts_; }

    [[nodiscard]] double supply_index() const { return supply_index_; }
    [[nodiscard]] double borrow_index() const { return borrow_index_; }
    [[nodiscard]] Rate supply_apy() const { return supply_apy_; }
    [[nodiscard]] Rate borrow_apy() const { return borrow_apy_; }
    [[nodiscard]] double collateral_factor() const { return collateral_factor_; }
    [[nodiscard]] double liquidation_threshold() const { return liquidation_threshold_; }
    [[nodiscard]] double emission_per_day() const { return emission_per_day_; }

private:
    LendingPool() = default;

    static double tolerance(double scale) { return 1e-12 * std::max(1.0, std::abs(scale)); }
    static bool exceeds(double amount, double bound) { return amount > bound + tolerance(bound); }

    static void require_dai(const Amount& a) {
        if (a.unit() != Unit::dai) throw UnitMismatch("lending pool only accepts DAI");
    }

    const Account* find(const AccountId& id) const {
        auto it = accounts_.find(id);
        return it == accounts_.end() ? nullptr : &it->second;
    }
    Account& account_or_throw(const AccountId& id) {
        auto it = accounts_.find(id);
        if (it == accounts_.end()) throw InsufficientBalance("unknown account '" + id + "'");
        return it->second;
    }

    Rate borrow_apy_;
    Rate supply_apy_;
    GrowthFactor supply_daily_ = 1.0;
    GrowthFactor borrow_daily_ = 1.0;
    double collateral_factor_ = 0.8;
    double liquidation_threshold_ = 0.8;
    double emission_per_day_ = 0.0;
    double supply_index_ = 1.0;
    double borrow_index_ = 1.0;
    double deposit_scaled_total_ = 0.0;
    double debt_scaled_total_ = 0.0;
    Account background_;
    std::map<AccountId, Account> accounts_;
};

}  // namespace yieldsim::lending
