#include "bondpool/market.hpp"

#include <cmath>
#include <cstdio>

namespace bondpool {

namespace {

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t stream) {
    std::seed_seq seq{
        static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
        static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

GaussianStream::GaussianStream(std::uint64_t seed, std::uint64_t stream)
    : engine_(make_engine(seed, stream)) {}

double GaussianStream::uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double GaussianStream::next() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = 2.0 * uniform() - 1.0;
        v = 2.0 * uniform() - 1.0;
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
}

Result<MarketPath> generate_market_path(const CirParams& params, int n_steps, double dt,
                                        std::uint64_t seed) {
    if (!cir_params_valid(params)) return err(Errc::domain, "invalid CIR parameters");
    if (n_steps < 1) return err(Errc::domain, "need at least one step");
    if (!(dt > 0.0)) return err(Errc::domain, "dt must be positive");

    GaussianStream normals(seed, kStreamMarketPath);
    MarketPath path;
    path.dt = dt;
    path.seed = seed;
    path.rates.resize(static_cast<std::size_t>(n_steps) + 1);
    path.rates[0] = params.r_init;
    const double sqrt_dt = std::sqrt(dt);
    double r = params.r_init;
    for (int n = 0; n < n_steps; ++n) {
        const double r_pos = r > 0.0 ? r : 0.0;
        r += params.k * (params.theta - r_pos) * dt +
             params.sigma * std::sqrt(r_pos) * sqrt_dt * normals.next();
        if (r < 0.0) r = 0.0;
        path.rates[static_cast<std::size_t>(n) + 1] = r;
    }
    return path;
}

Result<void> write_market_csv(const std::string& path, const MarketPath& market) {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    if (!f) return err(Errc::domain, "cannot open output file");
    std::fputs("step,time_years,rate\n", f);
    for (std::size_t n = 0; n < market.rates.size(); ++n) {
        std::fprintf(f, "%zu,%.17g,%.17g\n", n, static_cast<double>(n) * market.dt,
                     market.rates[n]);
    }
    std::fclose(f);
    return {};
}

}  // namespace bondpool
