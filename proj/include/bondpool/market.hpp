#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "bondpool/ratemath.hpp"
#include "bondpool/result.hpp"

namespace bondpool {

/// Identifier string recorded in run metadata so outputs can be reproduced.
inline constexpr const char* kRngDescription =
    "mt19937_64(seed_seq{seed_lo,seed_hi,stream_lo,stream_hi}) + Marsaglia polar normals";

/// Stream ids used to split one run seed into independent substreams.
enum : std::uint64_t {
    kStreamMarketPath = 0,
    kStreamTradeSampling = 1,
};

/// Deterministic standard-normal source. std::normal_distribution is
/// implementation-defined, so deviates are produced by the polar method on
/// top of raw engine output.
class GaussianStream {
public:
    GaussianStream(std::uint64_t seed, std::uint64_t stream);

    double next();

    /// Uniform in [0, 1), 53-bit resolution.
    double uniform();

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

/// Cox-Ingersoll-Ross short-rate parameters.
struct CirParams {
    double k;       // mean-reversion speed, per year
    double theta;   // long-run mean rate
    double sigma;   // volatility
    double r_init;  // initial rate
};

inline bool cir_params_valid(const CirParams& p) {
    return p.k > 0.0 && p.theta >= 0.0 && p.sigma >= 0.0 && p.r_init >= 0.0;
}

/// One sampled short-rate trajectory on the grid t_n = n * dt.
struct MarketPath {
    std::vector<double> rates;  // n_steps + 1 samples
    double dt = 0.0;
    std::uint64_t seed = 0;
};

/// Full-truncation Euler discretization of dr = k(theta - r)dt + sigma sqrt(r) dW,
/// floored at zero so every sample is nonnegative. Deterministic per seed.
Result<MarketPath> generate_market_path(const CirParams& params, int n_steps, double dt,
                                        std::uint64_t seed);

/// Write the path as CSV with columns (step, time_years, rate).
Result<void> write_market_csv(const std::string& path, const MarketPath& market);

}  // namespace bondpool
