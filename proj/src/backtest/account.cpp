#include <cmath>
#include <stdexcept>
#include <string>

#include "flowtox/backtest.hpp"

namespace flowtox::backtest {

void Costs::validate() const {
    if (!(capital > 0.0)) throw std::invalid_argument("costs: capital must be positive");
    if (!(margin_rate > 0.0 && margin_rate <= 1.0)) throw std::invalid_argument("costs: margin_rate must be in (0, 1]");
    if (!(fee_bps >= 0.0)) throw std::invalid_argument("costs: fee_bps must be >= 0");
    if (!(multiplier > 0.0)) throw std::invalid_argument("costs: multiplier must be positive");
    if (!(tick_size >= 0.0)) throw std::invalid_argument("costs: tick_size must be >= 0");
    if (!(maintenance_ratio >= 0.0)) throw std::invalid_argument("costs: maintenance_ratio must be >= 0");
}

Account::Account(const Costs& costs) : costs_(costs), cash_(costs.capital) { costs_.validate(); }

bool Account::open(Timestamp ts, Side side, std::int64_t qty, double price, const std::string& reason) {
    if (position_ != 0) throw std::logic_error("Account::open: position already open");
    if (side == Side::None) throw std::invalid_argument("Account::open: side must be buy or sell");
    if (qty <= 0) throw std::invalid_argument("Account::open: quantity must be positive");
    if (!(price > 0.0) || !std::isfinite(price)) throw std::invalid_argument("Account::open: bad price");
    const double notional = static_cast<double>(qty) * price * costs_.multiplier;
    const double margin = notional * costs_.margin_rate;
    const double fee = costs_.fee(notional);
    if (margin + fee > cash_) return false;
    cash_ -= margin + fee;
    margin_ += margin;
    fees_ += fee;
    position_ = side == Side::Buy ? qty : -qty;
    entry_ = price;
    Fill f;
    f.ts = ts;
    f.side = side;
    f.qty = qty;
    f.price = price;
    f.fee = fee;
    f.position_after = position_;
    f.cash_after = cash_;
    f.margin_after = margin_;
    f.cash_delta = -(margin + fee);
    f.margin_delta = margin;
    f.reason = reason;
    fills_.push_back(std::move(f));
    return true;
}

void Account::close(Timestamp ts, double price, const std::string& reason) {
    if (position_ == 0) return;
    if (!(price > 0.0) || !std::isfinite(price)) throw std::invalid_argument("Account::close: bad price");
    const std::int64_t qty = position_ > 0 ? position_ : -position_;
    const double notional = static_cast<double>(qty) * price * costs_.multiplier;
    const double fee = costs_.fee(notional);
    const double pnl = static_cast<double>(position_) * (price - entry_) * costs_.multiplier;
    const double released = margin_;
    cash_ += released + pnl - fee;
    margin_ = 0.0;
    fees_ += fee;
    realized_ += pnl;
    Fill f;
    f.ts = ts;
    f.side = position_ > 0 ? Side::Sell : Side::Buy;
    f.qty = qty;
    f.price = price;
    f.fee = fee;
    f.position_after = 0;
    f.cash_after = cash_;
    f.margin_after = 0.0;
    f.realized_pnl = pnl;
    f.cash_delta = released + pnl - fee;
    f.margin_delta = -released;
    f.reason = reason;
    fills_.push_back(std::move(f));
    position_ = 0;
    entry_ = 0.0;
}

double Account::unrealized(double mark) const {
    if (position_ == 0) return 0.0;
    return static_cast<double>(position_) * (mark - entry_) * costs_.multiplier;
}

double Account::equity(double mark) const { return cash_ + margin_ + unrealized(mark); }

}  // namespace flowtox::backtest
