#include "oracles/cheb_oracle.hpp"

namespace motifcast::oracles {

std::vector<Eigen::MatrixXd> chebyshev_matrices(const Eigen::MatrixXd& lap, int order) {
    const Eigen::Index n = lap.rows();
    std::vector<Eigen::MatrixXd> mats;
    mats.push_back(Eigen::MatrixXd::Identity(n, n));
    if (order >= 1) mats.push_back(lap);
    for (int k = 2; k <= order; ++k) {
        mats.push_back(2.0 * lap * mats[static_cast<std::size_t>(k - 1)] -
                       mats[static_cast<std::size_t>(k - 2)]);
    }
    return mats;
}

Eigen::MatrixXd dense_cheb_conv(const Eigen::MatrixXd& lap, const Eigen::MatrixXd& x,
                                const neural::ChebFilterParams& params) {
    const auto mats = chebyshev_matrices(lap, params.order);
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), params.output_width());
    for (std::size_t k = 0; k < mats.size(); ++k) {
        out += mats[k] * x * params.coefficients[k];
    }
    return out;
}

}  // namespace motifcast::oracles
