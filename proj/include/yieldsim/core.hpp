#pragma once

// Numeric and temporal primitives shared by the market models: token amounts
// tagged with their unit, annual rates, the daily compounding convention and
// the simulation clock.

#include <cmath>
#include <stdexcept>
#include <string>
#include <string_view>

namespace yieldsim {

// Error families. The CLI maps them onto exit codes, so every failure a model
// can raise derives from one of these three.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class SimulationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class UnitMismatch : public SimulationError {
public:
    using SimulationError::SimulationError;
};

inline constexpr int kDaysPerYear = 365;

enum class Unit { dai, eth, gov, lp_share, vault_share };

constexpr std::string_view to_string(Unit u) {
    switch (u) {
    case Unit::dai: return "DAI";
    case Unit::eth: return "ETH";
    case Unit::gov: return "GOV";
    case Unit::lp_share: return "LP";
    case Unit::vault_share: return "VAULT";
    }
    return "?";
}

/// Non-negative quantity of a single token. Arithmetic is only defined
/// between amounts of the same unit.
class Amount {
public:
    constexpr Amount() = default;
    Amount(double value, Unit unit) : value_(value), unit_(unit) {
        if (!std::isfinite(value) || value < 0.0) {
            throw std::invalid_argument("amount must be finite and non-negative, got " +
                                        std::to_string(value) + " " + std::string(to_string(unit)));
        }
    }

    [[nodiscard]] double value() const { return value_; }
    [[nodiscard]] Unit unit() const { return unit_; }
    [[nodiscard]] bool is_zero() const { return value_ == 0.0; }

    [[nodiscard]] Amount scaled(double factor) const { return Amount(value_ * factor, unit_); }

    Amount& operator+=(const Amount& rhs) {
        require_same(rhs);
        value_ += rhs.value_;
        return *this;
    }
    Amount& operator-=(const Amount& rhs) {
        require_same(rhs);
        if (rhs.value_ > value_) {
            throw std::invalid_argument("amount subtraction would go negative");
        }
        value_ -= rhs.value_;
        return *this;
    }
    friend Amount operator+(Amount lhs, const Amount& rhs) { return lhs += rhs; }
    friend Amount operator-(Amount lhs, const Amount& rhs) { return lhs -= rhs; }

    friend bool operator==(const Amount& a, const Amount& b) {
        a.require_same(b);
        return a.value_ == b.value_;
    }
    friend bool operator<(const Amount& a, const Amount& b) {
        a.require_same(b);
        return a.value_ < b.value_;
    }

private:
    void require_same(const Amount& other) const {
        if (unit_ != other.unit_) {
            throw UnitMismatch("unit mismatch: " + std::string(to_string(unit_)) + " vs " +
                               std::string(to_string(other.unit_)));
        }
    }

    double value_ = 0.0;
    Unit unit_ = Unit::dai;
};

inline Amount dai(double v) { return {v, Unit::dai}; }
inline Amount eth(double v) { return {v, Unit::eth}; }
inline Amount gov(double v) { return {v, Unit::gov}; }
inline Amount lp_shares(double v) { return {v, Unit::lp_share}; }
inline Amount vault_shares(double v) { return {v, Unit::vault_share}; }

/// Annual percentage yield as a fraction (0.10 == 10% APY).
class Rate {
public:
    constexpr Rate() = default;
    explicit Rate(double annual) : annual_(annual) {
        if (!std::isfinite(annual) || annual < 0.0) {
            throw std::invalid_argument("rate must be finite and non-negative, got " + std::to_string(annual));
        }
    }
    [[nodiscard]] double annual() const { return annual_; }

private:
    double annual_ = 0.0;
};

using GrowthFactor = double;

/// Per-day factor such that 365 daily steps compound to exactly the APY.
inline GrowthFactor daily_factor(Rate apy) {
    return std::pow(1.0 + apy.annual(), 1.0 / kDaysPerYear);
}

/// Growth over an arbitrary number of days under daily compounding.
inline GrowthFactor growth(Rate apy, int days) {
    if (days < 0) throw std::invalid_argument("days must be non-negative");
    return std::pow(1.0 + apy.annual(), static_cast<double>(days) / kDaysPerYear);
}

inline Amount accrue(const Amount& amount, Rate apy, int days) {
    return amount.scaled(growth(apy, days));
}

class Clock {
public:
    explicit Clock(int horizon_days) : horizon_(horizon_days) {
        if (horizon_days <= 0) throw std::invalid_argument("horizon must be positive");
    }
    [[nodiscard]] int day() const { return day_; }
    [[nodiscard]] int horizon() const { return horizon_; }
    [[nodiscard]] bool finished() const { return day_ >= horizon_; }

    void advance() {
        if (finished()) throw std::out_of_range("clock advanced past horizon");
        ++day_;
    }

private:
    int day_ = 0;
    int horizon_;
};

}  // namespace yieldsim
