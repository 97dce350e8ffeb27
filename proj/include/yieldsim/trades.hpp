#pragma once

// Exogenous trader flow against the AMM, spread evenly over the horizon.

#include <stdexcept>

#include "yieldsim/amm.hpp"

namespace yieldsim::scenario {

/// Total ETH buy/sell volume over the whole horizon, both in DAI.
struct TradeSchedule {
    double eth_buy_volume_dai = 0.0;
    double eth_sell_volume_dai = 0.0;
};

struct TradeSlice {
    double buy_dai = 0.0;
    double sell_dai = 0.0;
};

inline TradeSlice daily_trade_slice(const TradeSchedule& schedule, int horizon_days, int day) {
    if (horizon_days <= 0) throw std::invalid_argument("horizon must be positive");
    if (day < 0 || day >= horizon_days) throw std::out_of_range("day outside the trading horizon");
    return {schedule.eth_buy_volume_dai / horizon_days, schedule.eth_sell_volume_dai / horizon_days};
}

/// Buy leg first: buy_dai of DAI swapped for ETH. Sell leg: the ETH quantity
/// worth sell_dai at the pre-sell spot price is swapped for DAI.
inline void apply_trades(amm::CpPool& pool, double buy_dai, double sell_dai) {
    if (buy_dai < 0.0 || sell_dai < 0.0) throw std::invalid_argument("trade volumes must be non-negative");
    if (buy_dai > 0.0) pool.swap_dai_for_eth(dai(buy_dai));
    if (sell_dai > 0.0) {
        const double eth_in = sell_dai * pool.reserve_eth() / pool.reserve_dai();
        pool.swap_eth_for_dai(eth(eth_in));
    }
}

}  // namespace yieldsim::scenario
