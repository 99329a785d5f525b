// Acceptance suite: one pass/fail line per criterion, nonzero exit on any
// failure. Criterion 4 (full-scale smoke) is gated behind --paper-scale or
// BONDPOOL_PAPER_SCALE=1 because it runs 1e8 trades.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bondpool/baselines.hpp"
#include "bondpool/sim.hpp"
#include "oracle.hpp"

using namespace bondpool;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
                detail.c_str());
    if (!pass) ++g_failures;
}

void report_skip(int criterion, const std::string& detail) {
    std::printf("[SKIP] criterion %d: %s\n", criterion, detail.c_str());
}

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

SimConfig desk_config() {
    SimConfig cfg;
    cfg.n_steps = 2000;
    cfg.trades_per_step = 200;
    cfg.seed = 42;
    return cfg;
}

// Criteria 1-3 and 9 share one desk-scale run with per-step ledger checks.
struct DeskRun {
    SimResult result;
    double runtime_seconds = 0.0;
    double max_ledger_gap = 0.0;       // |aggregate - revaluation|, scaled
    double max_collateral_gap = 0.0;   // tracked vs revalued disbursements
    bool collateral_identity_ok = true;
};

DeskRun run_desk_checked() {
    DeskRun desk;
    const SimConfig cfg = desk_config();
    const auto t0 = std::chrono::steady_clock::now();
    desk.result = run_simulation(cfg, [&](const PoolAccount& pool, const StepMetrics&) {
        const double reval = pool.revalue_ledger();
        const double gap = std::abs(pool.ledger_value() - reval) /
                           std::max(1.0, std::abs(reval));
        desk.max_ledger_gap = std::max(desk.max_ledger_gap, gap);
        if (pool.collateral_held() != 1.5 * pool.outstanding_borrow_disbursed()) {
            desk.collateral_identity_ok = false;
        }
        const double disb = pool.revalue_outstanding_disbursed();
        const double dgap = std::abs(pool.outstanding_borrow_disbursed() - disb) /
                            std::max(1.0, disb);
        desk.max_collateral_gap = std::max(desk.max_collateral_gap, dgap);
    });
    desk.runtime_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return desk;
}

void criterion_1_2_3_9(const DeskRun& desk) {
    const SimResult& r = desk.result;
    if (r.aborted || r.steps.size() != 2000) {
        report(1, false, "desk run aborted: " + r.abort_reason);
        report(2, false, "desk run aborted");
        report(3, false, "desk run aborted");
        report(9, false, "desk run aborted");
        return;
    }

    double sum_abs_diff = 0.0, max_abs_diff = 0.0, max_std = 0.0;
    double min_equity = 1e300, max_equity = -1e300;
    bool ever_halted = false;
    int executed_steps = 0;
    for (const StepMetrics& m : r.steps) {
        if (m.n_active_executed > 0) {
            sum_abs_diff += std::abs(m.rate_diff);
            max_abs_diff = std::max(max_abs_diff, std::abs(m.rate_diff));
            max_std = std::max(max_std, m.rate_std);
            ++executed_steps;
        }
        min_equity = std::min(min_equity, m.equity_minus_y0);
        max_equity = std::max(max_equity, m.equity_minus_y0);
        ever_halted = ever_halted || m.halted;
    }
    const double mean_abs_diff =
        executed_steps > 0 ? sum_abs_diff / executed_steps : 1e300;

    const bool c1 = executed_steps == 2000 && mean_abs_diff < 1e-3 &&
                    max_abs_diff < 5e-3 && desk.runtime_seconds < 60.0;
    report(1, c1,
           fmt("rate tracking: mean|diff|=%.3g (<1e-3), max|diff|=%.3g (<5e-3), "
               "runtime=%.2fs (<60s), steps with trades=%d/2000",
               mean_abs_diff, max_abs_diff, desk.runtime_seconds, executed_steps));

    const bool c2 = max_std < 5e-3;
    report(2, c2, fmt("rate dispersion: max per-step std=%.3g (<5e-3)", max_std));

    const bool c3 = min_equity >= -0.01 * 1000.0 && max_equity <= 0.02 * 1000.0 &&
                    !ever_halted;
    report(3, c3,
           fmt("equity stability: equity-y0 in [%.4f, %.4f] (within [-10, +20]), "
               "halted=%s",
               min_equity, max_equity, ever_halted ? "yes" : "never"));

    const bool c9 = desk.max_ledger_gap <= 1e-6 && desk.collateral_identity_ok &&
                    desk.max_collateral_gap <= 1e-9;
    report(9, c9,
           fmt("ledger consistency: max L gap=%.3g (<=1e-6), collateral identity %s, "
               "max disbursed gap=%.3g",
               desk.max_ledger_gap, desk.collateral_identity_ok ? "exact" : "BROKEN",
               desk.max_collateral_gap));
}

void criterion_4(bool enabled) {
    if (!enabled) {
        report_skip(4, "full-scale smoke (1e8 trades); enable with --paper-scale or "
                       "BONDPOOL_PAPER_SCALE=1");
        return;
    }
    SimConfig cfg;
    cfg.n_steps = 100000;
    cfg.trades_per_step = 1000;
    cfg.seed = 42;
    const auto t0 = std::chrono::steady_clock::now();
    const SimResult r = run_simulation(cfg);
    const double runtime =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = !r.aborted && r.steps.size() == 100000;
    report(4, pass,
           fmt("full-scale smoke: %s, %llu trades executed, runtime=%.1fs "
               "(documented, not asserted)",
               r.aborted ? ("aborted: " + r.abort_reason).c_str() : "completed",
               static_cast<unsigned long long>(r.total_executed), runtime));
}

void criterion_5() {
    oracle::Fuzz fuzz(424242);
    const auto flat = [](double kappa, double anchor) {
        return CurveParams{kappa, AnchorCurve::constant(anchor)};
    };

    // Par redemption exact at t=0.
    bool par_exact = true;
    for (int i = 0; i < 2000; ++i) {
        const double cash = fuzz.log_uniform(100.0, 10000.0);
        const CoreState s{cash * fuzz.log_uniform(0.1, 10.0), cash};
        const CurveParams p = flat(fuzz.uniform(0.005, 0.5), fuzz.uniform(0.0, 0.2));
        const double dx = fuzz.uniform(-0.4, 0.4) * s.bond_value;
        if (s.cash - dx <= 0.0 || s.bond_value + dx < 0.0) continue;
        auto dy = cash_for_face(s, 0.0, p, dx);
        if (!dy.ok() || dy.value() != -dx) par_exact = false;
    }

    // Path independence across >=1e4 fuzzed (state, tenor, split) triples.
    int pi_checked = 0;
    double pi_worst = 0.0;
    while (pi_checked < 10000) {
        const double cash = fuzz.log_uniform(100.0, 10000.0);
        const CoreState s{cash * fuzz.log_uniform(0.05, 20.0), cash};
        const CurveParams p = flat(fuzz.uniform(0.005, 0.5), fuzz.uniform(0.0, 0.2));
        const double tenor = fuzz.uniform(0.01, 5.0);
        const double dx_total = fuzz.uniform(-0.3, 1.0) * cash;
        const double dx1 = dx_total * fuzz.uniform(0.05, 0.95);
        const double dx2 = dx_total - dx1;
        auto dy_total = cash_for_face(s, tenor, p, dx_total);
        auto dy1 = cash_for_face(s, tenor, p, dx1);
        if (!dy_total || !dy1) continue;
        auto mid = apply_trade(s, tenor, p, dx1, dy1.value());
        if (!mid) continue;
        auto dy2 = cash_for_face(mid.value(), tenor, p, dx2);
        if (!dy2) continue;
        auto split_end = apply_trade(mid.value(), tenor, p, dx2, dy2.value());
        auto single_end = apply_trade(s, tenor, p, dx_total, dy_total.value());
        if (!split_end || !single_end) continue;
        const double gx = std::abs(split_end.value().bond_value -
                                   single_end.value().bond_value) /
                          std::max(1.0, single_end.value().bond_value);
        const double gy =
            std::abs(split_end.value().cash - single_end.value().cash) /
            std::max(1.0, single_end.value().cash);
        pi_worst = std::max({pi_worst, gx, gy});
        ++pi_checked;
    }

    // dx <-> dy round trip.
    int rt_checked = 0;
    double rt_worst = 0.0;
    while (rt_checked < 10000) {
        const double cash = fuzz.log_uniform(100.0, 10000.0);
        const CoreState s{cash * fuzz.log_uniform(0.05, 20.0), cash};
        const CurveParams p = flat(fuzz.uniform(0.005, 0.5), fuzz.uniform(0.0, 0.2));
        const double tenor = fuzz.uniform(0.01, 5.0);
        const double dx = fuzz.uniform(-0.4, 2.0) * cash;
        auto dy = cash_for_face(s, tenor, p, dx);
        if (!dy) continue;
        auto back = face_for_cash(s, tenor, p, dy.value());
        if (!back) continue;
        rt_worst = std::max(rt_worst,
                            std::abs(back.value() - dx) / std::max(1.0, std::abs(dx)));
        ++rt_checked;
    }

    // Marginal price by central difference.
    int fd_checked = 0;
    double fd_worst = 0.0;
    while (fd_checked < 2000) {
        const double cash = fuzz.log_uniform(100.0, 10000.0);
        const CoreState s{cash * fuzz.log_uniform(0.05, 20.0), cash};
        const CurveParams p = flat(fuzz.uniform(0.005, 0.5), fuzz.uniform(0.0, 0.2));
        const double tenor = fuzz.uniform(0.01, 5.0);
        const double h = 1e-6 * cash;
        auto up = cash_for_face(s, tenor, p, h);
        auto down = cash_for_face(s, tenor, p, -h);
        if (!up || !down) continue;
        const double fd_price = -(up.value() - down.value()) / (2.0 * h);
        const double closed =
            std::exp(-marginal_rate(s, tenor, p).value() * tenor);
        fd_worst = std::max(fd_worst, std::abs(fd_price - closed) / closed);
        ++fd_checked;
    }

    // Tenor-t invariant conserved; other tenors broken.
    int cons_checked = 0;
    double cons_worst = 0.0;
    bool others_break = true;
    while (cons_checked < 3000) {
        const double cash = fuzz.log_uniform(100.0, 10000.0);
        const CoreState s{cash * fuzz.log_uniform(0.05, 20.0), cash};
        const CurveParams p = flat(fuzz.uniform(0.005, 0.5), fuzz.uniform(0.0, 0.2));
        const double tenor = fuzz.uniform(0.01, 5.0);
        const double dx = fuzz.uniform(0.02, 0.5) * cash * (fuzz.coin() ? 1.0 : -0.5);
        auto dy = cash_for_face(s, tenor, p, dx);
        if (!dy) continue;
        auto next = apply_trade(s, tenor, p, dx, dy.value());
        if (!next) continue;
        const double c_b = invariant_params(s, tenor, p).c;
        const double c_a = invariant_params(next.value(), tenor, p).c;
        cons_worst = std::max(cons_worst, std::abs(c_a - c_b) / c_b);
        const double other = tenor * 2.0 + 0.1;
        const double co_b = invariant_params(s, other, p).c;
        const double co_a = invariant_params(next.value(), other, p).c;
        if (std::abs(co_a - co_b) <= 1e-9 * co_b) others_break = false;
        ++cons_checked;
    }

    const bool pass = par_exact && pi_worst <= 1e-9 && rt_worst <= 1e-9 &&
                      fd_worst <= 1e-5 && cons_worst <= 1e-9 && others_break;
    report(5, pass,
           fmt("invariant properties: par %s, path-indep worst=%.2g (<=1e-9, n=%d), "
               "roundtrip worst=%.2g (<=1e-9), fd-price worst=%.2g (<=1e-5), "
               "conservation worst=%.2g (<=1e-9), cross-tenor breaks=%s",
               par_exact ? "exact" : "BROKEN", pi_worst, pi_checked, rt_worst,
               fd_worst, cons_worst, others_break ? "yes" : "NO"));
}

void criterion_6() {
    bool pass = true;
    // A yieldspace pool with cash below face quotes a strictly negative rate.
    oracle::Fuzz fuzz(636363);
    for (int i = 0; i < 1000; ++i) {
        const double x = fuzz.log_uniform(10.0, 1e4);
        const double y = x * fuzz.log_uniform(0.2, 0.999);
        if (!(yieldspace_rate({x, y, fuzz.uniform(0.25, 10.0)}).value() < 0.0)) {
            pass = false;
        }
    }

    // Documented split-trade witness on the averaged-price pool.
    NotionalPool split{1000.0, 1000.0, 0.02, 0.05};
    const double dy_split = notional_trade(split, 1.0, 50.0).value().cash_delta +
                            notional_trade(split, 1.0, 50.0).value().cash_delta;
    NotionalPool single{1000.0, 1000.0, 0.02, 0.05};
    const double dy_single = notional_trade(single, 1.0, 100.0).value().cash_delta;
    const double witness_gap = std::abs(dy_split - dy_single);
    pass = pass && witness_gap > 1e-6;
    report(6, pass,
           fmt("baseline pathologies: negative-rate pool observed, split-trade gap=%.6f "
               "(>1e-6)",
               witness_gap));
}

void criterion_7() {
    oracle::Fuzz fuzz(777777);
    int checked = 0;
    double worst = 0.0;
    while (checked < 100) {
        const double cash = fuzz.log_uniform(200.0, 5000.0);
        const CoreState s{cash * fuzz.log_uniform(0.1, 10.0), cash};
        const double kappa = fuzz.uniform(0.005, 0.3);
        const double anchor = fuzz.uniform(0.0, 0.15);
        const CurveParams p{kappa, AnchorCurve::constant(anchor)};
        const double tenor = fuzz.uniform(0.05, 4.0);
        const double dx = fuzz.uniform(-0.2, 0.8) * cash;
        if (std::abs(dx) < 1e-2) continue;
        auto closed = cash_for_face(s, tenor, p, dx);
        if (!closed) continue;
        const double integrated = oracle::path_integral_cash_leg(
            s.bond_value, s.cash, tenor, kappa, anchor, dx, 1000000);
        worst = std::max(worst, std::abs(closed.value() - integrated) /
                                    std::max(1.0, std::abs(integrated)));
        ++checked;
    }
    report(7, worst <= 1e-6,
           fmt("closed form vs 1e6-slice path integration: worst gap=%.3g (<=1e-6) "
               "over %d cases",
               worst, checked));
}

void criterion_8(const char* cli_path) {
    const fs::path dir_a = "acceptance_run_a";
    const fs::path dir_b = "acceptance_run_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    const std::string base = std::string(cli_path) +
                             " simulate --scale desk --seed 42 --out ";
    const int code_a = std::system((base + dir_a.string() + " 2>/dev/null").c_str());
    const int code_b = std::system((base + dir_b.string() + " 2>/dev/null").c_str());
    auto slurp = [](const fs::path& path) {
        std::ifstream in(path, std::ios::binary);
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    };
    const std::string bytes_a = slurp(dir_a / "metrics.csv");
    const std::string bytes_b = slurp(dir_b / "metrics.csv");
    const bool pass = code_a == 0 && code_b == 0 && !bytes_a.empty() &&
                      bytes_a == bytes_b;
    report(8, pass,
           fmt("determinism: two identical simulate runs, %zu bytes each, %s",
               bytes_a.size(), bytes_a == bytes_b ? "byte-identical" : "DIFFER"));
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
}

}  // namespace

int main(int argc, char** argv) {
    bool paper_scale = false;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--paper-scale") == 0) paper_scale = true;
    }
    if (const char* env = std::getenv("BONDPOOL_PAPER_SCALE")) {
        paper_scale = paper_scale || std::strcmp(env, "1") == 0;
    }

    const DeskRun desk = run_desk_checked();
    criterion_1_2_3_9(desk);
    criterion_4(paper_scale);
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8(BONDPOOL_CLI_PATH);

    if (g_failures > 0) {
        std::printf("%d criterion(s) FAILED\n", g_failures);
        return 1;
    }
    std::printf("all criteria passed\n");
    return 0;
}
