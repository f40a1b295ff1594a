#include "dualdrive/encoder/precision.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dd::encoder {

namespace {

double token_cosine(const SceneToken& a, const SceneToken& b) {
    const Eigen::Map<const Eigen::VectorXd> va(a.values.data(),
                                               static_cast<long>(a.values.size()));
    const Eigen::Map<const Eigen::VectorXd> vb(b.values.data(),
                                               static_cast<long>(b.values.size()));
    const double na = va.norm(), nb = vb.norm();
    if (na <= 0.0 || nb <= 0.0) throw std::invalid_argument("precision: zero token");
    return va.dot(vb) / (na * nb);
}

}  // namespace

PrecisionResult precision_at_k(const std::vector<LabeledToken>& train,
                               const std::vector<LabeledToken>& queries, int k,
                               double sigma_steer, EncoderConfig::BrakePartition brake_rule,
                               double sigma_brake) {
    if (train.empty() || queries.empty())
        throw std::invalid_argument("precision_at_k: both sets must be non-empty");
    if (k < 1) throw std::invalid_argument("precision_at_k: k must be >= 1");

    const int kk = std::min<int>(k, static_cast<int>(train.size()));
    long steer_hits = 0, brake_hits = 0;
    std::vector<int> idx(train.size());

    for (const LabeledToken& q : queries) {
        std::vector<double> sims(train.size());
        for (std::size_t i = 0; i < train.size(); ++i) sims[i] = token_cosine(q.token, train[i].token);
        std::iota(idx.begin(), idx.end(), 0);
        std::partial_sort(idx.begin(), idx.begin() + kk, idx.end(), [&](int a, int b) {
            if (sims[a] != sims[b]) return sims[a] > sims[b];
            return a < b;  // earliest insertion wins ties
        });

        bool steer_hit = false, brake_hit = false;
        for (int r = 0; r < kk; ++r) {
            const LabeledToken& t = train[static_cast<std::size_t>(idx[r])];
            if (std::abs(t.steer - q.steer) <= sigma_steer) steer_hit = true;
            const bool concurrent = brake_rule == EncoderConfig::BrakePartition::concurrence
                                        ? (t.brake > 0.0) == (q.brake > 0.0)
                                        : std::abs(t.brake - q.brake) <= sigma_brake;
            if (concurrent) brake_hit = true;
        }
        steer_hits += steer_hit ? 1 : 0;
        brake_hits += brake_hit ? 1 : 0;
    }

    PrecisionResult res;
    res.queries = static_cast<long>(queries.size());
    res.steer = static_cast<double>(steer_hits) / static_cast<double>(res.queries);
    res.brake = static_cast<double>(brake_hits) / static_cast<double>(res.queries);
    return res;
}

}  // namespace dd::encoder
