#include <cstdio>
#include <filesystem>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "bondpool/config.hpp"
#include "bondpool/sim.hpp"

namespace fs = std::filesystem;
using namespace bondpool;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitRejected = 3;
constexpr int kExitInsolvent = 4;

bool parse_anchor_spec(const std::string& spec, AnchorCurve& out) {
    std::vector<double> coeffs;
    std::size_t pos = 0;
    while (pos <= spec.size()) {
        const auto comma = spec.find(',', pos);
        const std::string tok =
            spec.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        char* end = nullptr;
        const double v = std::strtod(tok.c_str(), &end);
        if (!end || *end != '\0' || end == tok.c_str()) return false;
        coeffs.push_back(v);
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (coeffs.empty()) return false;
    out = AnchorCurve(std::move(coeffs));
    return true;
}

int run_one_seed(SimConfig cfg, std::uint64_t seed, const fs::path& out_dir,
                 bool diagnostics) {
    cfg.seed = seed;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) {
        std::fprintf(stderr, "error: cannot create output directory %s\n",
                     out_dir.string().c_str());
        return kExitUsage;
    }
    SimResult result = run_simulation(cfg, nullptr, diagnostics);
    std::string io_error;
    if (!write_metrics_csv((out_dir / "metrics.csv").string(), result, io_error) ||
        !write_run_metadata((out_dir / "run_meta.json").string(), cfg, result,
                            io_error)) {
        std::fprintf(stderr, "error: %s\n", io_error.c_str());
        return kExitUsage;
    }
    if (diagnostics &&
        !write_diagnostics_csv((out_dir / "diagnostics.csv").string(), result,
                               io_error)) {
        std::fprintf(stderr, "error: %s\n", io_error.c_str());
        return kExitUsage;
    }
    if (result.aborted) {
        std::fprintf(stderr, "simulation aborted: %s\n", result.abort_reason.c_str());
        std::fprintf(stderr, "diagnostic snapshot: %s\n", result.final_snapshot.c_str());
        return kExitInsolvent;
    }
    std::fprintf(stderr, "seed %llu: %zu steps, %llu trades executed in %.2fs -> %s\n",
                 static_cast<unsigned long long>(seed), result.steps.size(),
                 static_cast<unsigned long long>(result.total_executed),
                 result.runtime_seconds, (out_dir / "metrics.csv").string().c_str());
    return kExitOk;
}

int cmd_simulate(const std::string& config_path, const std::string& out_dir_str,
                 const std::string& scale, std::string seed_opt, std::string seeds_opt,
                 bool diagnostics) {
    SimConfig cfg;
    std::string error;
    if (!config_path.empty() && !load_sim_config(config_path, cfg, error)) {
        std::fprintf(stderr, "config error: %s\n", error.c_str());
        return kExitUsage;
    }
    if (scale == "desk") {
        cfg.n_steps = 2000;
        cfg.trades_per_step = 200;
    } else if (scale == "paper") {
        cfg.n_steps = 100000;
        cfg.trades_per_step = 1000;
        std::fprintf(stderr,
                     "note: paper scale runs 1e8 trades; expect a few minutes of "
                     "runtime and roughly 3 GB of memory\n");
    } else if (!scale.empty()) {
        std::fprintf(stderr, "error: unknown scale preset '%s'\n", scale.c_str());
        return kExitUsage;
    }
    if (!validate_config(cfg, error)) {
        std::fprintf(stderr, "config error: %s\n", error.c_str());
        return kExitUsage;
    }

    std::vector<std::uint64_t> seeds;
    if (!seed_opt.empty()) {
        seeds.push_back(std::strtoull(seed_opt.c_str(), nullptr, 10));
    }
    if (!seeds_opt.empty()) {
        std::size_t pos = 0;
        while (pos <= seeds_opt.size()) {
            const auto comma = seeds_opt.find(',', pos);
            seeds.push_back(std::strtoull(seeds_opt.substr(pos, comma - pos).c_str(),
                                          nullptr, 10));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    if (seeds.empty()) seeds.push_back(cfg.seed);

    const fs::path out_root(out_dir_str);
    if (seeds.size() == 1) {
        return run_one_seed(cfg, seeds[0], out_root, diagnostics);
    }
    // Independent seeds share nothing; give each its own directory and thread.
    std::vector<int> codes(seeds.size(), kExitOk);
    std::vector<std::thread> workers;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        workers.emplace_back([&, i] {
            codes[i] = run_one_seed(cfg, seeds[i],
                                    out_root / ("seed_" + std::to_string(seeds[i])),
                                    diagnostics);
        });
    }
    for (auto& w : workers) w.join();
    for (int code : codes) {
        if (code != kExitOk) return code;
    }
    return kExitOk;
}

int cmd_quote(double x_balance, double y_balance, double kappa, double r_star, double t,
              const std::string& kind_str, double size, const std::string& unit_str) {
    TradeKind kind;
    if (kind_str == "lend") kind = TradeKind::Lend;
    else if (kind_str == "withdraw") kind = TradeKind::Withdraw;
    else if (kind_str == "borrow") kind = TradeKind::Borrow;
    else if (kind_str == "repay") kind = TradeKind::Repay;
    else {
        std::fprintf(stderr, "error: unknown kind '%s'\n", kind_str.c_str());
        return kExitUsage;
    }
    const SizeUnit unit = unit_str == "face" ? SizeUnit::Face : SizeUnit::Cash;
    if (unit_str != "face" && unit_str != "cash") {
        std::fprintf(stderr, "error: unit must be cash or face\n");
        return kExitUsage;
    }

    const CoreState state{x_balance, y_balance};
    const CurveParams params{kappa, AnchorCurve::constant(r_star)};
    if (!state_valid(state)) {
        std::fprintf(stderr, "error: invalid pool balances\n");
        return kExitUsage;
    }
    if (!(kappa > 0.0 && kappa < 1.0)) {
        std::fprintf(stderr, "error: kappa must lie in (0,1)\n");
        return kExitUsage;
    }

    double dx = 0.0, dy = 0.0;
    const bool cash_in = (kind == TradeKind::Lend || kind == TradeKind::Repay);
    if (unit == SizeUnit::Cash) {
        dy = cash_in ? size : -size;
        auto leg = face_for_cash(state, t, params, dy);
        if (!leg) {
            std::fprintf(stderr, "rejected: %s\n", leg.error().message);
            return kExitRejected;
        }
        dx = leg.value();
    } else {
        dx = cash_in ? -size : size;
        auto leg = cash_for_face(state, t, params, dx);
        if (!leg) {
            std::fprintf(stderr, "rejected: %s\n", leg.error().message);
            return kExitRejected;
        }
        dy = leg.value();
    }
    auto next = apply_trade(state, t, params, dx, dy);
    if (!next) {
        std::fprintf(stderr, "rejected: %s\n", next.error().message);
        return kExitRejected;
    }
    auto post = marginal_rate(next.value(), t, params);

    nlohmann::json j;
    j["kind"] = kind_str;
    j["tenor"] = t;
    j["dx"] = dx;
    j["dy"] = dy;
    j["avg_price"] = dx != 0.0 ? std::abs(dy / dx) : 1.0;
    j["post_rate"] = post ? post.value() : std::numeric_limits<double>::quiet_NaN();
    j["collateral_required"] = kind == TradeKind::Borrow ? 1.5 * -dy : 0.0;
    std::printf("%s\n", j.dump().c_str());
    return kExitOk;
}

int cmd_curve(double x_balance, double y_balance, double kappa,
              const std::string& anchor_spec, double t_min, double t_max, int n_points) {
    if (t_min < 0.0 || n_points < 2 || !(t_max > t_min)) {
        std::fprintf(stderr,
                     "error: need t_min >= 0, t_max > t_min and n_points >= 2\n");
        return kExitUsage;
    }
    AnchorCurve anchor;
    if (!parse_anchor_spec(anchor_spec, anchor)) {
        std::fprintf(stderr, "error: anchor spec must be comma-separated coefficients\n");
        return kExitUsage;
    }
    const CoreState state{x_balance, y_balance};
    const CurveParams params{kappa, anchor};
    if (!state_valid(state)) {
        std::fprintf(stderr, "error: invalid pool balances\n");
        return kExitUsage;
    }
    std::printf("tenor,rate,price\n");
    for (int i = 0; i < n_points; ++i) {
        const double t = t_min + (t_max - t_min) * i / (n_points - 1);
        auto r = marginal_rate(state, t, params);
        if (!r) {
            std::fprintf(stderr, "error: %s\n", r.error().message);
            return kExitUsage;
        }
        std::printf("%.17g,%.17g,%.17g\n", t, r.value(), discount(r.value(), t));
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"bondpool: arbitrary-maturity lending pool simulator"};
    app.require_subcommand(1);

    // simulate
    std::string config_path, out_dir = "out", scale, seed_opt, seeds_opt;
    bool diagnostics = false;
    auto* simulate = app.add_subcommand("simulate", "Run a market simulation");
    simulate->add_option("--config", config_path, "Config file (key = value lines)")
        ->check(CLI::ExistingFile);
    simulate->add_option("--out", out_dir, "Output directory");
    simulate->add_option("--scale", scale, "Preset: desk (N=2000,M=200) or paper (N=100000,M=1000)");
    simulate->add_option("--seed", seed_opt, "Seed override");
    simulate->add_option("--seeds", seeds_opt, "Comma-separated seeds, one run each");
    simulate->add_flag("--diagnostics", diagnostics, "Also write diagnostics.csv");

    // quote
    double q_x = 1000.0, q_y = 1000.0, q_kappa = 0.02, q_rstar = 0.05, q_t = 1.0,
           q_size = 1.0;
    std::string q_kind = "lend", q_unit = "cash";
    auto* quote = app.add_subcommand("quote", "Price a single trade against given balances");
    quote->add_option("--X", q_x, "Pool bond present value")->required();
    quote->add_option("--y", q_y, "Pool cash")->required();
    quote->add_option("--kappa", q_kappa, "Rate sensitivity");
    quote->add_option("--r-star", q_rstar, "Anchor rate");
    quote->add_option("--t", q_t, "Tenor in years")->required();
    quote->add_option("--kind", q_kind, "lend|withdraw|borrow|repay")->required();
    quote->add_option("--size", q_size, "Trade size")->required();
    quote->add_option("--unit", q_unit, "cash|face");

    // curve
    double c_x = 1000.0, c_y = 1000.0, c_kappa = 0.02, c_tmin = 0.0, c_tmax = 1.0;
    int c_points = 11;
    std::string c_anchor = "0.05";
    auto* curve = app.add_subcommand("curve", "Dump the quoted rate curve as CSV");
    curve->add_option("--X", c_x, "Pool bond present value")->required();
    curve->add_option("--y", c_y, "Pool cash")->required();
    curve->add_option("--kappa", c_kappa, "Rate sensitivity");
    curve->add_option("--anchor", c_anchor, "Anchor polynomial coefficients c0[,c1,...]");
    curve->add_option("--t-min", c_tmin, "Smallest tenor");
    curve->add_option("--t-max", c_tmax, "Largest tenor");
    curve->add_option("--n-points", c_points, "Grid size");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? kExitOk : kExitUsage;
    }

    if (simulate->parsed()) {
        return cmd_simulate(config_path, out_dir, scale, seed_opt, seeds_opt, diagnostics);
    }
    if (quote->parsed()) {
        return cmd_quote(q_x, q_y, q_kappa, q_rstar, q_t, q_kind, q_size, q_unit);
    }
    if (curve->parsed()) {
        return cmd_curve(c_x, c_y, c_kappa, c_anchor, c_tmin, c_tmax, c_points);
    }
    return kExitUsage;
}
