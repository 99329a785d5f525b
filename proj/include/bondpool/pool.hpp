#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bondpool/invariant.hpp"
#include "bondpool/result.hpp"

namespace bondpool {

enum class TradeKind : std::uint8_t { Lend, Withdraw, Borrow, Repay };
enum class SizeUnit : std::uint8_t { Cash, Face };
enum class Side : std::uint8_t { Loan, Borrow };

const char* to_string(TradeKind kind);

/// Lending stops while equity sits strictly below threshold * y0; equality is
/// still solvent. Re-evaluated every step, so a recovered pool resumes.
inline bool lending_halted(double equity, double threshold, double y0) {
    return equity < threshold * y0;
}

/// One outstanding loan or borrow. `face` is what changes hands at maturity,
/// `disbursed` the cash that moved at execution (the collateral base for
/// borrows), `locked_rate` the realized rate the position accrues at.
struct Position {
    static constexpr std::uint8_t kLiveFlag = 1;
    static constexpr std::uint8_t kMaturedFlag = 2;

    double face;
    double locked_rate;
    double maturity;   // absolute time, years
    double disbursed;
    std::uint32_t serial;
    Side side;
    std::uint8_t flags;

    bool live() const { return flags & kLiveFlag; }
    bool matured() const { return flags & kMaturedFlag; }
    double collateral() const { return side == Side::Borrow ? 1.5 * disbursed : 0.0; }
};

using PositionId = std::uint64_t;

/// A priced prospective trade. dx/dy are the pool-side balance changes:
/// dx > 0 (dy < 0) for borrow/withdraw, dx < 0 (dy > 0) for lend/repay.
struct TradeQuote {
    TradeKind kind;
    Tenor tenor;
    double dx;
    double dy;
    double avg_price;            // |dy / dx|
    Rate post_rate;              // marginal rate at `tenor` after the trade
    double collateral_required;  // 1.5x cash disbursed; borrows only
    std::uint64_t state_version;
};

/// Signed present value of the open book, L = sum(borrow PVs) - sum(loan PVs),
/// maintained in O(1) per event. Each position accrues at its own locked rate,
/// pv(t) = face * e^{-rate * (maturity - t)}, capped at face once matured; the
/// aggregate evaluates the exact sum of those curves through a truncated
/// exponential series around a reference rate (25 compensated moments, exact
/// to double precision for locked rates within +-2 of the reference).
class LedgerAggregate {
public:
    explicit LedgerAggregate(double reference_rate);

    bool rate_in_range(double locked_rate) const;
    void add(double signed_face, double locked_rate, double maturity);
    void remove(double signed_face, double locked_rate, double maturity);
    void move_to_matured(double signed_face, double locked_rate, double maturity);
    void settle_matured(double signed_face);

    /// L evaluated at absolute time t (valid for 0 <= t within series range).
    double value(double t) const;

private:
    static constexpr int kOrder = 25;
    void accumulate(double signed_face, double locked_rate, double maturity,
                    double direction);

    double ref_rate_;
    double sum_[kOrder] = {};
    double comp_[kOrder] = {};
    double matured_sum_ = 0.0;
    double matured_comp_ = 0.0;
};

namespace detail {

/// Chunked slot arena: stable addresses, no reallocation spikes, freed slots
/// recycled with a bumped serial so stale ids never alias a new position.
class PositionArena {
public:
    std::uint32_t alloc();
    void release(std::uint32_t slot);
    Position& operator[](std::uint32_t slot);
    const Position& operator[](std::uint32_t slot) const;
    std::uint32_t high_water() const { return high_water_; }

private:
    static constexpr std::uint32_t kChunkBits = 16;
    static constexpr std::uint32_t kChunkSize = 1u << kChunkBits;
    std::vector<std::unique_ptr<Position[]>> chunks_;
    std::vector<std::uint32_t> free_;
    std::uint32_t high_water_ = 0;
};

}  // namespace detail

/// The pool state machine: AMM balances, position ledger, collateral escrow,
/// maturity settlement, and the lending-halt policy. Single-owner mutation;
/// quoting is const and may run against a snapshot.
class PoolAccount {
public:
    /// Fresh pool funded with y0 cash at initial rate r0. The anchor must
    /// quote r0 at tenor zero, and new loans stop whenever equity drops below
    /// halt_threshold * y0.
    static Result<PoolAccount> create(double y0, Rate r0, CurveParams params,
                                      double halt_threshold = 0.99);

    // -- trading ------------------------------------------------------------
    Result<TradeQuote> quote(TradeKind kind, Tenor tenor, double size,
                             SizeUnit unit) const;
    /// Open a new position (Lend or Borrow).
    Result<PositionId> execute(const TradeQuote& q);
    /// Reduce or close an existing position (Withdraw on a loan, Repay on a
    /// borrow); collateral is released pro rata.
    Result<PositionId> execute(const TradeQuote& q, PositionId target);

    // -- time & settlement ---------------------------------------------------
    Result<void> advance_time(double dt);
    std::size_t matured_pending() const { return matured_queue_.size() - matured_head_; }
    Result<PositionId> settle_next_matured();
    Result<std::vector<PositionId>> settle_maturities();

    // -- solvency ------------------------------------------------------------
    double equity() const { return core_.cash + ledger_value(); }
    double ledger_value() const { return aggregate_.value(clock_); }
    bool update_halt();
    bool halted() const { return halted_; }

    // -- owner controls --------------------------------------------------------
    void set_anchor(AnchorCurve anchor);

    // -- inspection ------------------------------------------------------------
    const CoreState& core() const { return core_; }
    const CurveParams& params() const { return params_; }
    double cash() const { return core_.cash; }
    double bond_value() const { return core_.bond_value; }
    double clock() const { return clock_; }
    double initial_cash() const { return y0_; }
    std::uint64_t version() const { return version_; }
    std::size_t open_position_count() const { return open_count_; }
    Result<Rate> rate_at(Tenor tenor) const { return marginal_rate(core_, tenor, params_); }

    const Position* find(PositionId id) const;
    Result<double> position_value(PositionId id) const;
    Result<Tenor> remaining_tenor(PositionId id) const;

    double outstanding_borrow_disbursed() const {
        return disbursed_sum_ + disbursed_comp_;
    }
    double collateral_held() const { return 1.5 * outstanding_borrow_disbursed(); }

    /// Slow consistency routes, used by tests and checkpoints: revalue the
    /// book position by position.
    double revalue_ledger() const;
    double revalue_outstanding_disbursed() const;
    Result<double> equity_marked_to_curve() const;

    /// One-line text snapshot: clock, X, y, L, halted, open position count.
    std::string snapshot_line() const;

    template <typename F>
    void for_each_open(F&& fn) const {
        for (std::uint32_t slot = 0; slot < arena_.high_water(); ++slot) {
            const Position& p = arena_[slot];
            if (p.live()) fn(p);
        }
    }

private:
    PoolAccount(double y0, Rate r0, CurveParams params, double halt_threshold);

    Result<PositionId> open_position(const TradeQuote& q);
    Result<PositionId> reduce_position(const TradeQuote& q, PositionId target);
    double position_pv(const Position& p) const;
    Position* find_mut(PositionId id);

    CoreState core_;
    CurveParams params_;
    double y0_;
    double halt_threshold_;
    double clock_ = 0.0;
    bool halted_ = false;
    std::uint64_t version_ = 0;

    LedgerAggregate aggregate_;
    detail::PositionArena arena_;
    // Min-heap on maturity (std::push_heap/pop_heap with a comparator built
    // per call, so the account stays movable).
    std::vector<std::uint32_t> maturity_heap_;
    std::vector<std::uint32_t> matured_queue_;
    std::size_t matured_head_ = 0;
    std::size_t open_count_ = 0;

    double disbursed_sum_ = 0.0;
    double disbursed_comp_ = 0.0;
};

}  // namespace bondpool
