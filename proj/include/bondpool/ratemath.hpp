#pragma once

#include <cmath>

#include "bondpool/result.hpp"

namespace bondpool {

using Rate = double;   // continuously compounded, annualized
using Tenor = double;  // time to maturity in years

/// Convert a simple annually-compounded rate to its continuous equivalent,
/// r = ln(1 + R).
inline Result<Rate> simple_to_continuous(double simple_rate) {
    if (!(simple_rate > -1.0)) {
        return err(Errc::domain, "simple rate must exceed -100%");
    }
    return std::log1p(simple_rate);
}

/// Annualized continuous rate implied by paying `price` now for `face` at
/// maturity: r = ln(face/price) / t.
inline Result<Rate> annualized_rate(double face, double price, Tenor t) {
    if (!(face > 0.0) || !(price > 0.0)) {
        return err(Errc::domain, "face and price must be positive");
    }
    if (!(t > 0.0)) {
        return err(Errc::no_solution, "zero tenor fixes no unique rate");
    }
    return std::log(face / price) / t;
}

/// Price per unit face: p = e^{-r t}.
inline double discount(Rate r, Tenor t) { return std::exp(-r * t); }

}  // namespace bondpool
