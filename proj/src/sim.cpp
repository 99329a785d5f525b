#include "bondpool/sim.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>

#include "json.hpp"

namespace bondpool {

bool validate_config(const SimConfig& cfg, std::string& error) {
    if (!(cfg.y0 > 0.0)) error = "y0 must be positive";
    else if (!(cfg.r0 >= 0.0)) error = "r0 must be nonnegative";
    else if (!(cfg.kappa > 0.0 && cfg.kappa < 1.0)) error = "kappa must lie in (0,1)";
    else if (!cir_params_valid(cfg.cir)) error = "invalid cir parameters";
    else if (!(cfg.horizon > 0.0)) error = "horizon must be positive";
    else if (cfg.n_steps < 1) error = "n_steps must be at least 1";
    else if (cfg.trades_per_step < 0) error = "trades_per_step must be nonnegative";
    else if (cfg.maturity_rule != "abs_normal(T-t,T-t)")
        error = "unsupported maturity_rule (expected abs_normal(T-t,T-t))";
    else if (!(cfg.size_var >= 0.0)) error = "size_var must be nonnegative";
    else if (cfg.size_unit != "cash" && cfg.size_unit != "face")
        error = "size_unit must be cash or face";
    else if (!(cfg.halt_threshold > 0.0 && cfg.halt_threshold < 1.0))
        error = "halt_threshold must lie in (0,1)";
    else return true;
    return false;
}

TradeDraw sample_trade(GaussianStream& rng, double now, const SimConfig& cfg) {
    const double remaining = std::max(cfg.horizon - now, 0.0);
    const double sd = cfg.maturity_param_is_variance ? std::sqrt(remaining) : remaining;
    double tenor = std::abs(rng.next() * sd + remaining);
    const double floor = cfg.dt();
    if (tenor < floor) tenor = floor;
    double size = std::abs(rng.next() * std::sqrt(cfg.size_var) + cfg.size_mean);
    if (size < 1e-6) size = 1e-6;
    return {tenor, size};
}

std::vector<std::uint8_t> interleave_schedule(std::size_t n_active,
                                              std::size_t n_passive) {
    std::vector<std::uint8_t> schedule;
    schedule.reserve(n_active + n_passive);
    std::size_t k = 1;
    const auto actives_before = [&](std::size_t j) {
        return n_passive == 0 ? std::size_t{0}
                              : (j * n_active + n_passive - 1) / n_passive;
    };
    for (std::size_t a = 0; a <= n_active; ++a) {
        while (k <= n_passive && actives_before(k) == a) {
            schedule.push_back(1);
            ++k;
        }
        if (a < n_active) schedule.push_back(0);
    }
    return schedule;
}

namespace {

struct RunningStats {
    double sum = 0.0;
    double sumsq = 0.0;
    int n = 0;
    void add(double v) {
        sum += v;
        sumsq += v * v;
        ++n;
    }
    double mean() const {
        return n > 0 ? sum / n : std::numeric_limits<double>::quiet_NaN();
    }
    double pop_std() const {
        if (n == 0) return std::numeric_limits<double>::quiet_NaN();
        const double m = sum / n;
        const double var = std::max(sumsq / n - m * m, 0.0);
        return std::sqrt(var);
    }
};

double curve_rate_std(const PoolAccount& pool, double max_tenor) {
    RunningStats stats;
    for (int i = 1; i <= 8; ++i) {
        auto r = pool.rate_at(max_tenor * i / 8.0);
        if (r) stats.add(r.value());
    }
    return stats.pop_std();
}

}  // namespace

SimResult run_simulation(const SimConfig& cfg, const StepObserver& observer,
                         bool collect_diagnostics) {
    const auto t_start = std::chrono::steady_clock::now();
    SimResult result;

    std::string cfg_error;
    if (!validate_config(cfg, cfg_error)) {
        result.aborted = true;
        result.abort_reason = "invalid config: " + cfg_error;
        return result;
    }

    const double dt = cfg.dt();
    auto path = generate_market_path(cfg.cir, cfg.n_steps, dt, cfg.seed);
    if (!path) {
        result.aborted = true;
        result.abort_reason = path.error().message;
        return result;
    }
    auto pool_r = PoolAccount::create(
        cfg.y0, cfg.r0, CurveParams{cfg.kappa, AnchorCurve::constant(cfg.r0)},
        cfg.halt_threshold);
    if (!pool_r) {
        result.aborted = true;
        result.abort_reason = pool_r.error().message;
        return result;
    }
    PoolAccount pool = std::move(pool_r.value());
    const MarketPath& market_path = path.value();

    GaussianStream trade_rng(cfg.seed, kStreamTradeSampling);
    const SizeUnit unit = cfg.size_unit == "cash" ? SizeUnit::Cash : SizeUnit::Face;
    result.steps.reserve(static_cast<std::size_t>(cfg.n_steps));

    for (int n = 1; n <= cfg.n_steps; ++n) {
        (void)pool.advance_time(dt);
        const double now = pool.clock();
        // The step's market rate is the print at its open, the same print the
        // anchor was reset to when the previous step closed. Quotes therefore
        // reprice in lockstep with the market and speculators only arbitrage
        // the pool's own imbalance, never the step-to-step rate move itself.
        const double market = market_path.rates[static_cast<std::size_t>(n) - 1];
        const std::size_t n_passive = pool.matured_pending();
        const auto schedule =
            interleave_schedule(static_cast<std::size_t>(cfg.trades_per_step), n_passive);

        RunningStats executed_rates;
        RunningStats pre_marginals;
        int settled_this_step = 0;

        for (std::uint8_t slot : schedule) {
            if (slot == 1) {
                auto settled = pool.settle_next_matured();
                if (!settled) {
                    result.aborted = true;
                    result.abort_reason = settled.error().message;
                    result.final_snapshot = pool.snapshot_line();
                    result.runtime_seconds =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                                      t_start)
                            .count();
                    return result;
                }
                ++settled_this_step;
                ++result.total_settled;
                continue;
            }
            const TradeDraw draw = sample_trade(trade_rng, now, cfg);
            auto pre = pool.rate_at(draw.tenor);
            if (!pre) {
                ++result.total_rejected;
                continue;
            }
            const TradeKind kind = trade_direction(pre.value(), market);
            if (kind == TradeKind::Lend && pool.halted()) {
                ++result.total_halt_skips;
                continue;
            }
            auto q = pool.quote(kind, draw.tenor, draw.size, unit);
            if (!q) {
                ++result.total_rejected;
                continue;
            }
            auto ex = pool.execute(q.value());
            if (!ex) {
                ++result.total_rejected;
                continue;
            }
            const double realized =
                std::log(std::abs(q.value().dx / q.value().dy)) / draw.tenor;
            executed_rates.add(realized);
            if (collect_diagnostics) pre_marginals.add(pre.value());
            ++result.total_executed;
        }

        const bool halted = pool.update_halt();
        StepMetrics row;
        row.step = n;
        row.time_years = now;
        row.market_rate = market;
        row.mean_pool_rate = executed_rates.mean();
        row.rate_diff = row.mean_pool_rate - market;
        row.rate_std = executed_rates.pop_std();
        row.equity_minus_y0 = pool.equity() - cfg.y0;
        row.n_active_executed = executed_rates.n;
        row.n_passive_settled = settled_this_step;
        row.halted = halted;
        result.steps.push_back(row);
        if (collect_diagnostics) {
            result.diagnostics.push_back(DiagnosticsRow{
                n, pre_marginals.mean(),
                curve_rate_std(pool, std::max(cfg.horizon - now, dt))});
        }
        if (observer) observer(pool, row);

        // Close of step n: retune the anchor to the print just realized; it
        // governs step n+1.
        pool.set_anchor(
            AnchorCurve::constant(market_path.rates[static_cast<std::size_t>(n)]));
    }

    result.final_snapshot = pool.snapshot_line();
    result.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return result;
}

bool write_metrics_csv(const std::string& path, const SimResult& result,
                       std::string& error) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) {
        error = "cannot open " + path;
        return false;
    }
    std::fputs(
        "step,time_years,market_rate,mean_pool_rate,rate_diff,rate_std,"
        "equity_minus_y0,n_active_executed,n_passive_settled,halted\n",
        f);
    for (const StepMetrics& m : result.steps) {
        std::fprintf(f, "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%d\n", m.step,
                     m.time_years, m.market_rate, m.mean_pool_rate, m.rate_diff,
                     m.rate_std, m.equity_minus_y0, m.n_active_executed,
                     m.n_passive_settled, m.halted ? 1 : 0);
    }
    std::fclose(f);
    return true;
}

bool write_diagnostics_csv(const std::string& path, const SimResult& result,
                           std::string& error) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) {
        error = "cannot open " + path;
        return false;
    }
    std::fputs("step,mean_pre_marginal_rate,curve_rate_std\n", f);
    for (const DiagnosticsRow& d : result.diagnostics) {
        std::fprintf(f, "%d,%.17g,%.17g\n", d.step, d.mean_pre_marginal_rate,
                     d.curve_rate_std);
    }
    std::fclose(f);
    return true;
}

bool write_run_metadata(const std::string& path, const SimConfig& cfg,
                        const SimResult& result, std::string& error) {
    nlohmann::json j;
    j["build"] = kBuildId;
    j["rng"] = kRngDescription;
    j["config"] = {
        {"y0", cfg.y0},
        {"r0", cfg.r0},
        {"kappa", cfg.kappa},
        {"cir", {{"k", cfg.cir.k},
                 {"theta", cfg.cir.theta},
                 {"sigma", cfg.cir.sigma},
                 {"r_init", cfg.cir.r_init}}},
        {"horizon", cfg.horizon},
        {"n_steps", cfg.n_steps},
        {"trades_per_step", cfg.trades_per_step},
        {"maturity_rule", cfg.maturity_rule},
        {"maturity_param_is_variance", cfg.maturity_param_is_variance},
        {"size_mean", cfg.size_mean},
        {"size_var", cfg.size_var},
        {"size_unit", cfg.size_unit},
        {"halt_threshold", cfg.halt_threshold},
        {"seed", cfg.seed},
    };
    j["totals"] = {
        {"executed", result.total_executed},
        {"halt_skips", result.total_halt_skips},
        {"rejected", result.total_rejected},
        {"settled", result.total_settled},
    };
    j["aborted"] = result.aborted;
    j["abort_reason"] = result.abort_reason;
    j["runtime_seconds"] = result.runtime_seconds;
    j["final_snapshot"] = result.final_snapshot;

    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) {
        error = "cannot open " + path;
        return false;
    }
    const std::string text = j.dump(2);
    std::fwrite(text.data(), 1, text.size(), f);
    std::fputc('\n', f);
    std::fclose(f);
    return true;
}

}  // namespace bondpool
