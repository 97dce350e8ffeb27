#pragma once

// Aggregator share accounting and the fee schedules of the surveyed
// aggregators. The vault tracks its underlying value abstractly: strategies
// report gross yield through harvest(), and fees are diverted into accrual
// buckets rather than paid to external addresses.

#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "yieldsim/core.hpp"

namespace yieldsim::vault {

class InsufficientShares : public SimulationError {
public:
    using SimulationError::SimulationError;
};

struct FeeConfig {
    double performance_fee = 0.0;
    double withdrawal_fee = 0.0;
    double management_fee_annual = 0.0;
    double buyback_fraction = 0.0;
    // Share of the performance fee kept by the treasury; the rest goes to
    // the strategist.
    double performance_split_treasury = 1.0;

    void validate() const {
        auto check = [](double v, const char* name) {
            if (!(v >= 0.0 && v <= 1.0)) {
                throw ConfigError(std::string("fees.") + name + " must lie in [0, 1], got " +
                                  std::to_string(v));
            }
        };
        check(performance_fee, "performance_fee");
        check(withdrawal_fee, "withdrawal_fee");
        check(management_fee_annual, "management_fee_annual");
        check(buyback_fraction, "buyback_fraction");
        check(performance_split_treasury, "performance_split_treasury");
        if (performance_fee + buyback_fraction > 1.0) {
            throw ConfigError("fees.performance_fee + fees.buyback_fraction must not exceed 1");
        }
    }

    friend bool operator==(const FeeConfig&, const FeeConfig&) = default;
};

struct FeePreset {
    std::string_view name;
    FeeConfig fees;
};

inline constexpr std::array<FeePreset, 6> kFeePresets{{
    {"none", {}},
    {"idle", {.performance_fee = 0.10}},
    {"pickle", {.performance_fee = 0.20}},
    {"harvest", {.buyback_fraction = 0.30}},
    {"yearn-v1", {.performance_fee = 0.20, .withdrawal_fee = 0.005, .performance_split_treasury = 0.5}},
    {"yearn-v2", {.performance_fee = 0.20, .management_fee_annual = 0.02, .performance_split_treasury = 0.5}},
}};

inline std::optional<FeeConfig> find_preset(std::string_view name) {
    for (const auto& p : kFeePresets) {
        if (p.name == name) return p.fees;
    }
    return std::nullopt;
}

class Vault {
public:
    Vault() = default;
    explicit Vault(FeeConfig fees) : fees_(fees) { fees_.validate(); }

    /// Empty vaults price shares 1:1 with the underlying.
    [[nodiscard]] double price_per_share() const {
        return total_shares_ > 0.0 ? total_underlying_ / total_shares_ : 1.0;
    }

    Amount deposit(const Amount& amount) {
        require(amount, Unit::dai);
        if (amount.is_zero()) return vault_shares(0.0);
        const double minted = amount.value() / price_per_share();
        total_shares_ += minted;
        total_underlying_ += amount.value();
        deposited_ += amount.value();
        return vault_shares(minted);
    }

    /// Redeems shares at the current price per share. The withdrawal fee is
    /// left in the vault for the remaining holders.
    Amount withdraw(const Amount& shares) {
        require(shares, Unit::vault_share);
        if (shares.is_zero()) return dai(0.0);
        if (shares.value() > total_shares_) {
            throw InsufficientShares("cannot redeem " + std::to_string(shares.value()) + " of " +
                                     std::to_string(total_shares_) + " shares");
        }
        const double gross = shares.value() * price_per_share();
        const double paid = gross * (1.0 - fees_.withdrawal_fee);
        if (shares.value() == total_shares_) {
            total_shares_ = 0.0;
            // Whatever the last holder leaves behind has no owner; book it
            // to the treasury so nothing disappears from the ledger.
            treasury_ += total_underlying_ - paid;
            total_underlying_ = 0.0;
        } else {
            total_shares_ -= shares.value();
            total_underlying_ -= paid;
        }
        paid_out_ += paid;
        return dai(paid);
    }

    /// Applies a strategy's gross result. Gains pay the performance fee and
    /// the buyback diversion; losses pass through untaxed.
    double harvest(double gross_yield) {
        if (!std::isfinite(gross_yield)) throw std::invalid_argument("harvest yield must be finite");
        gross_yield_ += gross_yield;
        if (gross_yield <= 0.0) {
            if (-gross_yield > total_underlying_) {
                throw SimulationError("harvest loss exceeds vault underlying");
            }
            total_underlying_ += gross_yield;
            return gross_yield;
        }
        const double performance = gross_yield * fees_.performance_fee;
        const double to_treasury = performance * fees_.performance_split_treasury;
        const double buyback = gross_yield * fees_.buyback_fraction;
        treasury_ += to_treasury;
        strategist_ += performance - to_treasury;
        buyback_ += buyback;
        const double net = gross_yield - performance - buyback;
        total_underlying_ += net;
        return net;
    }

    void accrue_management_fee(int days) {
        if (days < 0) throw std::invalid_argument("days must be non-negative");
        if (days == 0 || fees_.management_fee_annual == 0.0) return;
        const double kept = std::pow(1.0 - fees_.management_fee_annual,
                                     static_cast<double>(days) / kDaysPerYear);
        const double fee = total_underlying_ * (1.0 - kept);
        total_underlying_ -= fee;
        treasury_ += fee;
    }

    [[nodiscard]] double total_shares() const { return total_shares_; }
    [[nodiscard]] double total_underlying() const { return total_underlying_; }
    [[nodiscard]] double treasury_accrued() const { return treasury_; }
    [[nodiscard]] double strategist_accrued() const { return strategist_; }
    [[nodiscard]] double buyback_accrued() const { return buyback_; }
    [[nodiscard]] const FeeConfig& fee_config() const { return fees_; }

    // Ledger totals for the conservation identity
    //   underlying + treasury + strategist + buyback + paid_out
    //     == deposited + gross_yield
    [[nodiscard]] double cumulative_deposited() const { return deposited_; }
    [[nodiscard]] double cumulative_paid_out() const { return paid_out_; }
    [[nodiscard]] double cumulative_gross_yield() const { return gross_yield_; }

private:
    static void require(const Amount& a, Unit u) {
        if (a.unit() != u) {
            throw UnitMismatch("expected " + std::string(to_string(u)) + ", got " +
                               std::string(to_string(a.unit())));
        }
    }

    FeeConfig fees_;
    double total_shares_ = 0.0;
    double total_underlying_ = 0.0;
    double treasury_ = 0.0;
    double strategist_ = 0.0;
    double buyback_ = 0.0;
    double deposited_ = 0.0;
    double paid_out_ = 0.0;
    double gross_yield_ = 0.0;
};

}  // namespace yieldsim::vault
