#pragma once

#include <cmath>

#include "bondpool/ratemath.hpp"
#include "bondpool/result.hpp"

namespace bondpool {

/// YieldSpace-style pool: invariant x^{1-t/T} + y^{1-t/T} = C(t). Kept as a
/// pricing foil; it quotes negative rates whenever cash falls below face.
struct YieldSpacePool {
    double face;     // x
    double cash;     // y
    double horizon;  // T, years
};

/// Marginal price (y/x)^{t/T}. Exceeds 1 when y > x, the negative-rate case.
inline Result<double> yieldspace_price(const YieldSpacePool& pool, Tenor t) {
    if (!(pool.face > 0.0) || !(pool.cash > 0.0)) {
        return err(Errc::domain, "balances must be positive");
    }
    if (t < 0.0 || t > pool.horizon) {
        return err(Errc::domain, "tenor outside pool horizon");
    }
    return std::pow(pool.cash / pool.face, t / pool.horizon);
}

/// Implied rate (1/T) ln(y/x); tenor-independent, negative when y < x.
/// The pathology is left observable on purpose.
inline Result<Rate> yieldspace_rate(const YieldSpacePool& pool) {
    if (!(pool.face > 0.0) || !(pool.cash > 0.0)) {
        return err(Errc::domain, "balances must be positive");
    }
    return std::log(pool.cash / pool.face) / pool.horizon;
}

/// Notional-style pool: simple-interest pricing p(1+rt) = 1 around an anchor
/// rate, with no conservation law behind it.
struct NotionalPool {
    double face;   // x
    double cash;   // y
    double kappa;  // in (0,1)
    double anchor; // r*, in (0,1)
};

/// Marginal rate kappa * ln(x/y) + r*.
inline Result<Rate> notional_rate(const NotionalPool& pool) {
    if (!(pool.face > 0.0) || !(pool.cash > 0.0)) {
        return err(Errc::domain, "balances must be positive");
    }
    return pool.kappa * std::log(pool.face / pool.cash) + pool.anchor;
}

/// Marginal price (1 + t*kappa*ln(x/y) + t*r*)^-1.
inline Result<double> notional_price(const NotionalPool& pool, Tenor t) {
    auto r = notional_rate(pool);
    if (!r) return r.error();
    const double denom = 1.0 + t * r.value();
    if (denom <= 0.0) return err(Errc::domain, "price formula denominator not positive");
    return 1.0 / denom;
}

struct NotionalFill {
    double cash_delta;  // pool cash change, -p_bar * dx
    double avg_price;   // p_bar
};

/// Execute a face-leg trade at the averaged price
/// p_bar = (1 + t*kappa*ln((x+dx)/(y-dx)) + t*r*)^-1 and move cash by
/// -p_bar*dx. Averaged pricing is what makes this pool path-dependent.
inline Result<NotionalFill> notional_trade(NotionalPool& pool, Tenor t, double dx) {
    if (!(pool.face > 0.0) || !(pool.cash > 0.0)) {
        return err(Errc::domain, "balances must be positive");
    }
    const double num = pool.face + dx;
    const double den = pool.cash - dx;
    if (num <= 0.0 || den <= 0.0) {
        return err(Errc::rejected_trade, "trade exhausts a pool balance");
    }
    const double denom = 1.0 + t * pool.kappa * std::log(num / den) + t * pool.anchor;
    if (denom <= 0.0) {
        return err(Errc::rejected_trade, "average price undefined for this size");
    }
    const double p_bar = 1.0 / denom;
    const double dy = -p_bar * dx;
    pool.face += dx;
    pool.cash += dy;
    return NotionalFill{dy, p_bar};
}

}  // namespace bondpool
