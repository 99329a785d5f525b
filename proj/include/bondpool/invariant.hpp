#pragma once

#include <cmath>

#include "bondpool/anchor.hpp"
#include "bondpool/ratemath.hpp"
#include "bondpool/result.hpp"

namespace bondpool {

/// Curve shape: rate sensitivity kappa in (0,1) plus the tenor-dependent
/// anchor rate quoted when the pool is balanced.
struct CurveParams {
    double kappa;
    AnchorCurve anchor;
};

/// Live pool balances: X is the aggregate bond present value, y the cash
/// balance. y must stay strictly positive; X may reach zero.
struct CoreState {
    double bond_value;  // X
    double cash;        // y
};

/// Per-tenor conservation constants. For tenor t the pool conserves
/// K*x^alpha + y^alpha = C, where x is the face value equivalent to X at t.
struct InvariantParams {
    double alpha;  // (1 + kappa*t)^-1
    double k;      // e^{-t * r_anchor * alpha}
    double c;      // y^alpha * (X/y + 1), from the current state
};

inline bool state_valid(const CoreState& s) {
    return std::isfinite(s.bond_value) && std::isfinite(s.cash) &&
           s.bond_value >= 0.0 && s.cash > 0.0;
}

/// Marginal rate for tenor t: r = kappa * ln(X/y) + anchor(t).
inline Result<Rate> marginal_rate(const CoreState& s, Tenor t, const CurveParams& p) {
    if (!state_valid(s)) return err(Errc::domain, "invalid pool state");
    if (s.bond_value == 0.0) {
        return err(Errc::domain, "empty bond side cannot quote a rate");
    }
    return p.kappa * std::log(s.bond_value / s.cash) + p.anchor(t);
}

/// Face value of a tenor-t bond equivalent to the pool's present value:
/// x = X * e^{r t}. Zero present value maps to zero face.
inline Result<double> equivalent_face(const CoreState& s, Tenor t, const CurveParams& p) {
    if (!state_valid(s)) return err(Errc::domain, "invalid pool state");
    if (s.bond_value == 0.0) return 0.0;
    if (t == 0.0) return s.bond_value;
    auto r = marginal_rate(s, t, p);
    if (!r) return r.error();
    return s.bond_value * std::exp(r.value() * t);
}

/// Conservation constants for tenor t, with C taken from the current state.
/// C must be re-read per trade: trades at other tenors leave this tenor's
/// invariant broken, so a creation-time C would go stale.
inline InvariantParams invariant_params(const CoreState& s, Tenor t, const CurveParams& p) {
    const double alpha = 1.0 / (1.0 + p.kappa * t);
    const double k = std::exp(-t * p.anchor(t) * alpha);
    const double c = std::pow(s.cash, alpha) * (s.bond_value / s.cash + 1.0);
    return {alpha, k, c};
}

/// Cash leg for a given face-value leg dx at tenor t (dx > 0 adds bonds to
/// the pool and pays cash out; dx < 0 takes bonds and pays cash in).
inline Result<double> cash_for_face(const CoreState& s, Tenor t, const CurveParams& p,
                                    double dx) {
    if (!state_valid(s)) return err(Errc::domain, "invalid pool state");
    if (!(t >= 0.0)) return err(Errc::domain, "negative tenor");
    if (!std::isfinite(dx)) return err(Errc::domain, "non-finite trade size");
    if (dx == 0.0) return 0.0;
    if (t == 0.0) {
        // At maturity bonds redeem at par; the legs offset exactly.
        if (s.bond_value + dx < 0.0) {
            return err(Errc::rejected_trade, "trade exceeds pool capacity");
        }
        if (s.cash - dx <= 0.0) {
            return err(Errc::rejected_trade, "trade would drain pool cash");
        }
        return -dx;
    }
    const double alpha = 1.0 / (1.0 + p.kappa * t);
    const double psi = s.bond_value / s.cash;
    const double inner = std::pow(psi, 1.0 / alpha) +
                         std::exp(-p.anchor(t) * t) * dx / s.cash;
    if (inner < 0.0) {
        return err(Errc::rejected_trade, "trade exceeds pool capacity");
    }
    const double outer = psi + 1.0 - std::pow(inner, alpha);
    if (outer <= 0.0) {
        return err(Errc::rejected_trade, "trade would drain pool cash");
    }
    return s.cash * std::pow(outer, 1.0 / alpha) - s.cash;
}

/// Face-value leg for a given cash leg dy at tenor t; exact inverse of
/// cash_for_face.
inline Result<double> face_for_cash(const CoreState& s, Tenor t, const CurveParams& p,
                                    double dy) {
    if (!state_valid(s)) return err(Errc::domain, "invalid pool state");
    if (!(t >= 0.0)) return err(Errc::domain, "negative tenor");
    if (!std::isfinite(dy)) return err(Errc::domain, "non-finite trade size");
    if (dy == 0.0) return 0.0;
    if (t == 0.0) {
        if (s.cash + dy <= 0.0) {
            return err(Errc::rejected_trade, "trade would drain pool cash");
        }
        if (s.bond_value - dy < 0.0) {
            return err(Errc::rejected_trade, "trade exceeds pool capacity");
        }
        return -dy;
    }
    const double alpha = 1.0 / (1.0 + p.kappa * t);
    const double psi = s.bond_value / s.cash;
    const double base = dy / s.cash + 1.0;
    if (base <= 0.0) {
        return err(Errc::rejected_trade, "trade would drain pool cash");
    }
    const double inner = psi + 1.0 - std::pow(base, alpha);
    if (inner < 0.0) {
        return err(Errc::rejected_trade, "trade exceeds pool capacity");
    }
    return std::exp(p.anchor(t) * t) * s.cash *
           (std::pow(inner, 1.0 / alpha) - std::pow(psi, 1.0 / alpha));
}

/// Commit a priced trade. The new cash balance is y + dy; the new bond value
/// is recovered from the executed tenor's conserved C, the one invariant that
/// survives the trade. (dx, dy) must satisfy that invariant.
inline Result<CoreState> apply_trade(const CoreState& s, Tenor t, const CurveParams& p,
                                     double dx, double dy) {
    if (!state_valid(s)) return err(Errc::domain, "invalid pool state");
    if (dx == 0.0 && dy == 0.0) return s;
    if (t == 0.0) {
        if (std::abs(dx + dy) > 1e-9 * std::max(1.0, std::abs(dx))) {
            return err(Errc::inconsistent, "trade legs do not satisfy the invariant");
        }
        const double x_new = s.bond_value + dx;
        const double y_new = s.cash + dy;
        if (x_new < 0.0) return err(Errc::rejected_trade, "trade exceeds pool capacity");
        if (y_new <= 0.0) return err(Errc::rejected_trade, "trade would drain pool cash");
        return CoreState{x_new, y_new};
    }
    auto expected = cash_for_face(s, t, p, dx);
    if (!expected) return expected.error();
    if (std::abs(dy - expected.value()) >
        1e-9 * std::max(1.0, std::abs(expected.value()))) {
        return err(Errc::inconsistent, "trade legs do not satisfy the invariant");
    }
    const double alpha = 1.0 / (1.0 + p.kappa * t);
    const double psi = s.bond_value / s.cash;
    const double y_new = s.cash + dy;
    double x_val = y_new * (std::pow(s.cash / y_new, alpha) * (psi + 1.0) - 1.0);
    if (x_val < 0.0) {
        if (x_val < -1e-12 * (s.bond_value + s.cash)) {
            return err(Errc::rejected_trade, "trade exceeds pool capacity");
        }
        x_val = 0.0;
    }
    return CoreState{x_val, y_new};
}

/// Rate expressed from face-space balances: r = (kappa ln(x/y) + r*) / (1 + kappa t).
/// Agrees with marginal_rate when x is the equivalent face of the pool's X.
inline Result<Rate> rate_from_face_balances(double face, double cash, Tenor t,
                                            double kappa, double anchor_rate) {
    if (!(face > 0.0) || !(cash > 0.0)) {
        return err(Errc::domain, "balances must be positive");
    }
    return (kappa * std::log(face / cash) + anchor_rate) / (1.0 + kappa * t);
}

/// Fresh pool state: depositing y0 cash mints matching bond present value,
/// so every tenor opens at its anchor rate.
inline Result<CoreState> initial_state(double y0, Rate r0, const CurveParams& p) {
    if (!(y0 > 0.0)) return err(Errc::domain, "initial cash must be positive");
    if (std::abs(p.anchor(0.0) - r0) > 1e-12) {
        return err(Errc::domain, "anchor at tenor zero must equal the initial rate");
    }
    return CoreState{y0, y0};
}

}  // namespace bondpool
