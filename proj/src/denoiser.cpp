// Copyright (C) 2026 The geoedit Authors
// SPDX-License-Identifier: Apache-2.0

#include "geo/denoiser.hpp"

#include <cmath>
#include <sstream>

namespace geo {

Condition Condition::label(int k) {
    require(k >= 0, "Condition: label index must be nonnegative");
    return Condition(Kind::Label, {{k, 1.0}});
}

Condition Condition::weighted(std::vector<std::pair<int, double>> weights) {
    require(!weights.empty(), "Condition: weighted condition needs at least one entry");
    double total = 0.0;
    for (const auto& [k, w] : weights) {
        require(k >= 0, "Condition: label index must be nonnegative");
        require(std::isfinite(w) && w >= 0.0, "Condition: weights must be finite and nonnegative");
        total += w;
    }
    require(std::abs(total - 1.0) <= 1e-12, "Condition: weights must sum to 1");
    return Condition(Kind::Weighted, std::move(weights));
}

int Condition::label_index() const {
    require(kind_ == Kind::Label, "Condition: not a Label condition");
    return weights_.front().first;
}

std::string Condition::to_string() const {
    switch (kind_) {
        case Kind::Null:
            return "null";
        case Kind::Label:
            return "label(" + std::to_string(label_index()) + ")";
        case Kind::Weighted: {
            std::ostringstream os;
            os << "weighted(";
            for (std::size_t i = 0; i < weights_.size(); ++i) {
                os << (i ? "," : "") << weights_[i].first << ":" << weights_[i].second;
            }
            os << ")";
            return os.str();
        }
    }
    return "?";
}

}  // namespace geo
