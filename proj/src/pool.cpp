#include "bondpool/pool.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace bondpool {

namespace {

// Neumaier compensated accumulation; `comp` carries the rounding residue.
inline void neumaier_add(double& sum, double& comp, double v) {
    const double t = sum + v;
    if (std::abs(sum) >= std::abs(v)) {
        comp += (sum - t) + v;
    } else {
        comp += (v - t) + sum;
    }
    sum = t;
}

inline std::uint32_t slot_of(PositionId id) {
    return static_cast<std::uint32_t>(id & 0xffffffffu);
}
inline std::uint32_t serial_of(PositionId id) {
    return static_cast<std::uint32_t>(id >> 32);
}
inline PositionId make_id(std::uint32_t slot, std::uint32_t serial) {
    return (static_cast<PositionId>(serial) << 32) | slot;
}

}  // namespace

const char* to_string(TradeKind kind) {
    switch (kind) {
        case TradeKind::Lend: return "lend";
        case TradeKind::Withdraw: return "withdraw";
        case TradeKind::Borrow: return "borrow";
        case TradeKind::Repay: return "repay";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// LedgerAggregate
// ---------------------------------------------------------------------------

LedgerAggregate::LedgerAggregate(double reference_rate) : ref_rate_(reference_rate) {}

bool LedgerAggregate::rate_in_range(double locked_rate) const {
    return std::isfinite(locked_rate) && std::abs(locked_rate - ref_rate_) <= 2.0;
}

void LedgerAggregate::accumulate(double signed_face, double locked_rate, double maturity,
                                 double direction) {
    // Contribution of one position: signed_face * e^{-r m} * e^{r t}, with
    // e^{r t} expanded as e^{ref t} * sum_k (delta t)^k / k!. The moments
    // sum_k collect signed_face * e^{-r m} * delta^k; evaluation supplies the
    // t^k / k! factors. Removal replays the identical term sequence.
    const double delta = locked_rate - ref_rate_;
    double term = signed_face * std::exp(-locked_rate * maturity) * direction;
    for (int k = 0; k < kOrder; ++k) {
        neumaier_add(sum_[k], comp_[k], term);
        term *= delta;
    }
}

void LedgerAggregate::add(double signed_face, double locked_rate, double maturity) {
    accumulate(signed_face, locked_rate, maturity, 1.0);
}

void LedgerAggregate::remove(double signed_face, double locked_rate, double maturity) {
    accumulate(signed_face, locked_rate, maturity, -1.0);
}

void LedgerAggregate::move_to_matured(double signed_face, double locked_rate,
                                      double maturity) {
    accumulate(signed_face, locked_rate, maturity, -1.0);
    neumaier_add(matured_sum_, matured_comp_, signed_face);
}

void LedgerAggregate::settle_matured(double signed_face) {
    neumaier_add(matured_sum_, matured_comp_, -signed_face);
}

double LedgerAggregate::value(double t) const {
    double acc = sum_[0] + comp_[0];
    double tk = 1.0;
    for (int k = 1; k < kOrder; ++k) {
        tk *= t / static_cast<double>(k);
        acc += (sum_[k] + comp_[k]) * tk;
    }
    return std::exp(ref_rate_ * t) * acc + (matured_sum_ + matured_comp_);
}

// ---------------------------------------------------------------------------
// PositionArena
// ---------------------------------------------------------------------------

namespace detail {

std::uint32_t PositionArena::alloc() {
    if (!free_.empty()) {
        const std::uint32_t slot = free_.back();
        free_.pop_back();
        return slot;
    }
    const std::uint32_t slot = high_water_++;
    const std::uint32_t chunk = slot >> kChunkBits;
    if (chunk >= chunks_.size()) {
        chunks_.emplace_back(new Position[kChunkSize]());
    }
    return slot;
}

void PositionArena::release(std::uint32_t slot) {
    Position& p = (*this)[slot];
    p.flags = 0;
    p.face = 0.0;
    free_.push_back(slot);
}

Position& PositionArena::operator[](std::uint32_t slot) {
    return chunks_[slot >> kChunkBits][slot & (kChunkSize - 1)];
}

const Position& PositionArena::operator[](std::uint32_t slot) const {
    return chunks_[slot >> kChunkBits][slot & (kChunkSize - 1)];
}

}  // namespace detail

// ---------------------------------------------------------------------------
// PoolAccount
// ---------------------------------------------------------------------------

PoolAccount::PoolAccount(double y0, Rate r0, CurveParams params, double halt_threshold)
    : core_{y0, y0},
      params_(std::move(params)),
      y0_(y0),
      halt_threshold_(halt_threshold),
      aggregate_(r0) {}

Result<PoolAccount> PoolAccount::create(double y0, Rate r0, CurveParams params,
                                        double halt_threshold) {
    if (!(params.kappa > 0.0 && params.kappa < 1.0)) {
        return err(Errc::domain, "kappa must lie in (0,1)");
    }
    if (!(halt_threshold > 0.0 && halt_threshold < 1.0)) {
        return err(Errc::domain, "halt threshold must lie in (0,1)");
    }
    auto state = initial_state(y0, r0, params);
    if (!state) return state.error();
    return PoolAccount(y0, r0, std::move(params), halt_threshold);
}

Result<TradeQuote> PoolAccount::quote(TradeKind kind, Tenor tenor, double size,
                                      SizeUnit unit) const {
    if (!(tenor >= 0.0) || !std::isfinite(tenor)) {
        return err(Errc::domain, "tenor must be nonnegative");
    }
    if (!(size > 0.0) || !std::isfinite(size)) {
        return err(Errc::domain, "trade size must be positive");
    }
    if (halted_ && kind == TradeKind::Lend) {
        return err(Errc::halted, "lending halted by the solvency guard");
    }

    // Sign conventions: lend/repay put cash in and take face out; borrow/
    // withdraw mint face in and take cash out.
    double dx = 0.0, dy = 0.0;
    const bool cash_in = (kind == TradeKind::Lend || kind == TradeKind::Repay);
    if (unit == SizeUnit::Cash) {
        dy = cash_in ? size : -size;
        auto r = face_for_cash(core_, tenor, params_, dy);
        if (!r) return r.error();
        dx = r.value();
    } else {
        dx = cash_in ? -size : size;
        auto r = cash_for_face(core_, tenor, params_, dx);
        if (!r) return r.error();
        dy = r.value();
    }

    auto next = apply_trade(core_, tenor, params_, dx, dy);
    if (!next) return next.error();
    auto post = marginal_rate(next.value(), tenor, params_);
    const double post_rate = post ? post.value() : -HUGE_VAL;

    TradeQuote q;
    q.kind = kind;
    q.tenor = tenor;
    q.dx = dx;
    q.dy = dy;
    q.avg_price = dx != 0.0 ? std::abs(dy / dx) : 1.0;
    q.post_rate = post_rate;
    q.collateral_required = kind == TradeKind::Borrow ? 1.5 * -dy : 0.0;
    q.state_version = version_;
    return q;
}

Result<PositionId> PoolAccount::execute(const TradeQuote& q) {
    if (q.kind == TradeKind::Withdraw || q.kind == TradeKind::Repay) {
        return err(Errc::domain, "withdraw/repay require a target position");
    }
    return open_position(q);
}

Result<PositionId> PoolAccount::execute(const TradeQuote& q, PositionId target) {
    if (q.kind == TradeKind::Lend || q.kind == TradeKind::Borrow) {
        return err(Errc::domain, "lend/borrow do not target a position");
    }
    return reduce_position(q, target);
}

Result<PositionId> PoolAccount::open_position(const TradeQuote& q) {
    if (q.state_version != version_) {
        return err(Errc::stale_quote, "quote priced against an older pool state");
    }
    if (halted_ && q.kind == TradeKind::Lend) {
        return err(Errc::halted, "lending halted by the solvency guard");
    }
    if (!(q.tenor > 0.0)) {
        return err(Errc::domain, "positions require a positive tenor");
    }

    auto next = apply_trade(core_, q.tenor, params_, q.dx, q.dy);
    if (!next) return next.error();

    const bool is_lend = q.kind == TradeKind::Lend;
    const double face = std::abs(q.dx);
    const double cash_leg = std::abs(q.dy);
    if (!(face > 0.0) || !(cash_leg > 0.0)) {
        return err(Errc::rejected_trade, "degenerate trade legs");
    }
    const double locked_rate = std::log(face / cash_leg) / q.tenor;
    if (!aggregate_.rate_in_range(locked_rate)) {
        return err(Errc::rejected_trade, "locked rate outside the ledger's supported range");
    }
    const double maturity = clock_ + q.tenor;
    const double signed_face = is_lend ? -face : face;

    core_ = next.value();
    const std::uint32_t slot = arena_.alloc();
    Position& p = arena_[slot];
    const std::uint32_t serial = p.serial + 1;
    p = Position{face, locked_rate, maturity, cash_leg, serial,
                 is_lend ? Side::Loan : Side::Borrow, Position::kLiveFlag};
    maturity_heap_.push_back(slot);
    std::push_heap(maturity_heap_.begin(), maturity_heap_.end(),
                   [this](std::uint32_t a, std::uint32_t b) {
                       return arena_[a].maturity > arena_[b].maturity;
                   });
    aggregate_.add(signed_face, locked_rate, maturity);
    if (!is_lend) {
        neumaier_add(disbursed_sum_, disbursed_comp_, cash_leg);
    }
    ++open_count_;
    ++version_;
    return make_id(slot, serial);
}

Result<PositionId> PoolAccount::reduce_position(const TradeQuote& q, PositionId target) {
    if (q.state_version != version_) {
        return err(Errc::stale_quote, "quote priced against an older pool state");
    }
    Position* pos = find_mut(target);
    if (!pos) return err(Errc::not_found, "unknown or closed position");
    if (pos->matured()) {
        return err(Errc::domain, "position already matured; settle it instead");
    }
    const bool is_withdraw = q.kind == TradeKind::Withdraw;
    if (is_withdraw && pos->side != Side::Loan) {
        return err(Errc::domain, "withdraw targets a loan position");
    }
    if (!is_withdraw && pos->side != Side::Borrow) {
        return err(Errc::domain, "repay targets a borrow position");
    }
    const double remaining = pos->maturity - clock_;
    if (std::abs(q.tenor - remaining) > 1e-9 * std::max(1.0, remaining)) {
        return err(Errc::domain, "quote tenor does not match the position's maturity");
    }
    double face_cut = std::abs(q.dx);
    if (face_cut > pos->face * (1.0 + 1e-9)) {
        return err(Errc::rejected_trade, "insufficient position face");
    }
    face_cut = std::min(face_cut, pos->face);

    auto next = apply_trade(core_, q.tenor, params_, q.dx, q.dy);
    if (!next) return next.error();
    core_ = next.value();

    const double sign = pos->side == Side::Loan ? -1.0 : 1.0;
    aggregate_.remove(sign * pos->face, pos->locked_rate, pos->maturity);
    const double released = pos->disbursed * (face_cut / pos->face);
    const bool full_close = face_cut >= pos->face * (1.0 - 1e-12);
    if (pos->side == Side::Borrow) {
        neumaier_add(disbursed_sum_, disbursed_comp_, full_close ? -pos->disbursed : -released);
    }
    if (full_close) {
        // Slot stays allocated until its heap entry surfaces; the dead flag
        // makes advance_time discard it then.
        pos->flags = 0;
        --open_count_;
    } else {
        pos->face -= face_cut;
        pos->disbursed -= released;
        aggregate_.add(sign * pos->face, pos->locked_rate, pos->maturity);
    }
    ++version_;
    return target;
}

Result<void> PoolAccount::advance_time(double dt) {
    if (!(dt >= 0.0) || !std::isfinite(dt)) {
        return err(Errc::domain, "dt must be nonnegative");
    }
    clock_ += dt;
    const auto later = [this](std::uint32_t a, std::uint32_t b) {
        return arena_[a].maturity > arena_[b].maturity;
    };
    while (!maturity_heap_.empty()) {
        const std::uint32_t slot = maturity_heap_.front();
        const Position& p = arena_[slot];
        if (p.live() && p.maturity > clock_) break;
        std::pop_heap(maturity_heap_.begin(), maturity_heap_.end(), later);
        maturity_heap_.pop_back();
        if (!arena_[slot].live()) {
            arena_.release(slot);
            continue;
        }
        // Accrual stops at maturity: swap the position's growing PV for its
        // face until settlement picks it up.
        Position& m = arena_[slot];
        m.flags |= Position::kMaturedFlag;
        const double sign = m.side == Side::Loan ? -1.0 : 1.0;
        aggregate_.move_to_matured(sign * m.face, m.locked_rate, m.maturity);
        matured_queue_.push_back(slot);
    }
    ++version_;
    return {};
}

Result<PositionId> PoolAccount::settle_next_matured() {
    if (matured_head_ >= matured_queue_.size()) {
        return err(Errc::not_found, "no matured positions pending");
    }
    const std::uint32_t slot = matured_queue_[matured_head_];
    Position& p = arena_[slot];
    const double face = p.face;
    const double dx = p.side == Side::Loan ? face : -face;
    auto next = apply_trade(core_, 0.0, params_, dx, -dx);
    if (!next) {
        return err(Errc::insolvent, p.side == Side::Loan
                                        ? "pool cash cannot cover a maturing loan"
                                        : "pool bond value cannot absorb a maturing borrow");
    }
    core_ = next.value();
    const double sign = p.side == Side::Loan ? -1.0 : 1.0;
    aggregate_.settle_matured(sign * face);
    if (p.side == Side::Borrow) {
        neumaier_add(disbursed_sum_, disbursed_comp_, -p.disbursed);
    }
    const PositionId id = make_id(slot, p.serial);
    arena_.release(slot);
    --open_count_;
    ++matured_head_;
    if (matured_head_ == matured_queue_.size()) {
        matured_queue_.clear();
        matured_head_ = 0;
    }
    ++version_;
    return id;
}

Result<std::vector<PositionId>> PoolAccount::settle_maturities() {
    std::vector<PositionId> settled;
    while (matured_pending() > 0) {
        auto r = settle_next_matured();
        if (!r) return r.error();
        settled.push_back(r.value());
    }
    return settled;
}

bool PoolAccount::update_halt() {
    halted_ = lending_halted(equity(), halt_threshold_, y0_);
    return halted_;
}

void PoolAccount::set_anchor(AnchorCurve anchor) {
    params_.anchor = std::move(anchor);
    ++version_;
}

const Position* PoolAccount::find(PositionId id) const {
    const std::uint32_t slot = slot_of(id);
    if (slot >= arena_.high_water()) return nullptr;
    const Position& p = arena_[slot];
    if (!p.live() || p.serial != serial_of(id)) return nullptr;
    return &p;
}

Position* PoolAccount::find_mut(PositionId id) {
    return const_cast<Position*>(find(id));
}

double PoolAccount::position_pv(const Position& p) const {
    const double remaining = std::max(p.maturity - clock_, 0.0);
    return p.face * std::exp(-p.locked_rate * remaining);
}

Result<double> PoolAccount::position_value(PositionId id) const {
    const Position* p = find(id);
    if (!p) return err(Errc::not_found, "unknown or closed position");
    return position_pv(*p);
}

Result<Tenor> PoolAccount::remaining_tenor(PositionId id) const {
    const Position* p = find(id);
    if (!p) return err(Errc::not_found, "unknown or closed position");
    return std::max(p->maturity - clock_, 0.0);
}

double PoolAccount::revalue_ledger() const {
    double sum = 0.0, comp = 0.0;
    for_each_open([&](const Position& p) {
        const double sign = p.side == Side::Loan ? -1.0 : 1.0;
        neumaier_add(sum, comp, sign * position_pv(p));
    });
    return sum + comp;
}

double PoolAccount::revalue_outstanding_disbursed() const {
    double sum = 0.0, comp = 0.0;
    for_each_open([&](const Position& p) {
        if (p.side == Side::Borrow) neumaier_add(sum, comp, p.disbursed);
    });
    return sum + comp;
}

Result<double> PoolAccount::equity_marked_to_curve() const {
    double sum = 0.0, comp = 0.0;
    bool failed = false;
    for_each_open([&](const Position& p) {
        const double remaining = std::max(p.maturity - clock_, 0.0);
        auto r = marginal_rate(core_, remaining, params_);
        if (!r) {
            failed = true;
            return;
        }
        const double sign = p.side == Side::Loan ? -1.0 : 1.0;
        neumaier_add(sum, comp, sign * p.face * std::exp(-r.value() * remaining));
    });
    if (failed) return err(Errc::domain, "curve rate unavailable");
    return core_.cash + sum + comp;
}

std::string PoolAccount::snapshot_line() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "clock=%.17g X=%.17g y=%.17g L=%.17g halted=%d positions=%zu",
                  clock_, core_.bond_value, core_.cash, ledger_value(),
                  halted_ ? 1 : 0, open_count_);
    return buf;
}

}  // namespace bondpool
