#pragma once

#include <optional>
#include <vector>

#include "sparse.hpp"

namespace dlsm {

struct EncoderStack {
    std::vector<MatRM> weights; // w[0]: p x K1 (p = n when featureless), w[l]: K_l x K_{l+1}
    double leaky_slope = 0.2;
};

// f(A_hat H W) with leaky-ReLU activation
MatRM gcn_layer(const Csr& adj, const Eigen::Ref<const MatRM>& h,
                const Eigen::Ref<const MatRM>& w, double leaky_slope = 0.2);

// Runs the directed GCN over all layers. H^(0) is the attribute matrix when
// present, otherwise the identity (realized as A_hat * W0 without forming I).
std::vector<MatRM> encode(const Csr& adj, const std::optional<MatRM>& attributes,
                          const EncoderStack& stack);

} // namespace dlsm
