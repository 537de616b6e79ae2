#include "encoder.hpp"

#include "errors.hpp"

namespace dlsm {

namespace {
inline void leaky_inplace(MatRM& m, double slope) {
    for (Eigen::Index k = 0; k < m.size(); ++k) {
        double& x = m.data()[k];
        if (x < 0.0) x *= slope;
    }
}
} // namespace

MatRM gcn_layer(const Csr& adj, const Eigen::Ref<const MatRM>& h,
                const Eigen::Ref<const MatRM>& w, double leaky_slope) {
    if (h.cols() != w.rows()) throw NumericError("gcn_layer: H and W dimensions disagree");
    MatRM out = spmm(adj, h) * w;
    if (!out.allFinite()) throw NumericError("gcn_layer: non-finite activations");
    leaky_inplace(out, leaky_slope);
    return out;
}

std::vector<MatRM> encode(const Csr& adj, const std::optional<MatRM>& attributes,
                          const EncoderStack& stack) {
    if (stack.weights.empty()) throw UsageError("encode: empty encoder stack");
    std::vector<MatRM> hidden;
    hidden.reserve(stack.weights.size());
    MatRM h;
    for (size_t l = 0; l < stack.weights.size(); ++l) {
        const MatRM& w = stack.weights[l];
        if (l == 0) {
            // identity features collapse A_hat I W to A_hat W
            MatRM hw = attributes ? MatRM(*attributes * w) : w;
            h = spmm(adj, hw);
        } else {
            h = spmm(adj, MatRM(h * w));
        }
        if (!h.allFinite()) throw NumericError("encode: non-finite hidden state at layer " +
                                               std::to_string(l + 1));
        leaky_inplace(h, stack.leaky_slope);
        hidden.push_back(h);
    }
    return hidden;
}

} // namespace dlsm
