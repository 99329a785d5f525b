#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "bondpool/market.hpp"
#include "bondpool/pool.hpp"

namespace bondpool {

inline constexpr const char* kBuildId = "bondpool-0.1.0";

/// Full experiment description. Field names match the config-file keys.
struct SimConfig {
    double y0 = 1000.0;
    double r0 = 0.05;
    double kappa = 0.02;
    CirParams cir{0.4, 0.05, 0.2, 0.05};
    double horizon = 1.0;  // years
    int n_steps = 100000;
    int trades_per_step = 1000;
    std::string maturity_rule = "abs_normal(T-t,T-t)";
    bool maturity_param_is_variance = true;  // second parameter read as variance
    double size_mean = 0.72;
    double size_var = 1.0;
    std::string size_unit = "cash";  // or "face"
    double halt_threshold = 0.99;
    std::uint64_t seed = 42;

    double dt() const { return horizon / n_steps; }
};

/// Validate invariants; returns a message in `error` on failure.
bool validate_config(const SimConfig& cfg, std::string& error);

/// One row of the metrics CSV.
struct StepMetrics {
    int step;
    double time_years;
    double market_rate;
    double mean_pool_rate;  // unweighted mean of executed active-trade rates
    double rate_diff;       // mean_pool_rate - market_rate
    double rate_std;        // population std of executed active-trade rates
    double equity_minus_y0;
    int n_active_executed;
    int n_passive_settled;
    bool halted;
};

/// Optional per-step diagnostics (not part of the pinned metrics schema).
struct DiagnosticsRow {
    int step;
    double mean_pre_marginal_rate;   // marginal rate seen before each executed trade
    double curve_rate_std;           // dispersion of marginal rates across tenors
};

struct SimResult {
    std::vector<StepMetrics> steps;
    std::vector<DiagnosticsRow> diagnostics;
    bool aborted = false;
    std::string abort_reason;
    std::uint64_t total_executed = 0;
    std::uint64_t total_halt_skips = 0;
    std::uint64_t total_rejected = 0;
    std::uint64_t total_settled = 0;
    double runtime_seconds = 0.0;
    std::string final_snapshot;
};

struct TradeDraw {
    double tenor;
    double size;
};

/// Speculator rule: lend when the pool pays strictly more than the market,
/// otherwise borrow.
inline TradeKind trade_direction(Rate pool_rate, Rate market_rate) {
    return pool_rate > market_rate ? TradeKind::Lend : TradeKind::Borrow;
}

/// Maturity ~ |N(T-now, T-now)| floored at dt; size ~ |N(size_mean, size_var)|
/// floored at 1e-6.
TradeDraw sample_trade(GaussianStream& rng, double now, const SimConfig& cfg);

/// Evenly spread merge of active and passive slots: the k-th passive lands
/// after ceil(k * n_active / n_passive) actives.
std::vector<std::uint8_t> interleave_schedule(std::size_t n_active,
                                              std::size_t n_passive);

using StepObserver = std::function<void(const PoolAccount&, const StepMetrics&)>;

/// Run the experiment: speculators trade against the pool along a CIR path,
/// maturities settle as interleaved passive trades, and the anchor resets to
/// each step's market rate. Deterministic for a fixed config.
SimResult run_simulation(const SimConfig& cfg, const StepObserver& observer = nullptr,
                         bool collect_diagnostics = false);

bool write_metrics_csv(const std::string& path, const SimResult& result,
                       std::string& error);
bool write_diagnostics_csv(const std::string& path, const SimResult& result,
                           std::string& error);
bool write_run_metadata(const std::string& path, const SimConfig& cfg,
                        const SimResult& result, std::string& error);

}  // namespace bondpool
