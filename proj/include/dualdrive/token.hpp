#pragma once

#include <vector>

namespace dd {

// 256-dim scene embedding; first half encodes steering-relevant structure,
// second half braking-relevant structure. Each half is unit L2 norm.
struct SceneToken {
    static constexpr int kDim = 256;
    static constexpr int kHalf = 128;

    std::vector<double> values;

    bool valid() const { return static_cast<int>(values.size()) == kDim; }
};

}  // namespace dd
