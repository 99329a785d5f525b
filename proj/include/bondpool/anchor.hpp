#pragma once

#include <vector>

#include "bondpool/ratemath.hpp"

namespace bondpool {

/// Anchor rate as a polynomial in tenor. The constant function is the
/// degree-0 case; the pool owner swaps this to shape the quoted curve.
class AnchorCurve {
public:
    AnchorCurve() : coeffs_{0.0} {}
    explicit AnchorCurve(std::vector<double> coeffs) : coeffs_(std::move(coeffs)) {
        if (coeffs_.empty()) coeffs_.push_back(0.0);
    }

    static AnchorCurve constant(double rate) { return AnchorCurve({rate}); }

    Rate operator()(Tenor t) const {
        double acc = 0.0;
        for (auto it = coeffs_.rbegin(); it != coeffs_.rend(); ++it) acc = acc * t + *it;
        return acc;
    }

    const std::vector<double>& coefficients() const { return coeffs_; }

private:
    std::vector<double> coeffs_;
};

}  // namespace bondpool
