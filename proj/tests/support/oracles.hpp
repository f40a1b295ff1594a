// Test-only oracles, independent of the implementation paths they check.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "dualdrive/agent/experience.hpp"
#include "dualdrive/encoder/training.hpp"
#include "dualdrive/sim/vehicle.hpp"

namespace oracles {

// Quintic boundary-value problem solved as a literal 6x6 linear system.
inline std::array<double, 6> quintic_by_linear_solve(double x0, double v0, double a0, double xT,
                                                     double vT, double aT, double T) {
    Eigen::Matrix<double, 6, 6> A;
    Eigen::Matrix<double, 6, 1> b;
    A.setZero();
    A(0, 0) = 1.0;
    A(1, 1) = 1.0;
    A(2, 2) = 2.0;
    for (int j = 0; j < 6; ++j) {
        A(3, j) = std::pow(T, j);
        A(4, j) = j >= 1 ? j * std::pow(T, j - 1) : 0.0;
        A(5, j) = j >= 2 ? j * (j - 1) * std::pow(T, j - 2) : 0.0;
    }
    b << x0, v0, a0, xT, vT, aT;
    const Eigen::Matrix<double, 6, 1> c = A.fullPivLu().solve(b);
    std::array<double, 6> out{};
    for (int i = 0; i < 6; ++i) out[i] = c(i);
    return out;
}

// Exhaustive-scan retrieval oracle: full stable sort by (similarity desc,
// insertion index asc).
inline std::vector<std::size_t> topk_by_full_sort(const std::vector<dd::SceneToken>& bank,
                                                  const dd::SceneToken& query, int k) {
    std::vector<std::size_t> idx(bank.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> sims(bank.size());
    for (std::size_t i = 0; i < bank.size(); ++i) sims[i] = dd::agent::cosine(query, bank[i]);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
        if (sims[a] != sims[b]) return sims[a] > sims[b];
        return a < b;
    });
    idx.resize(std::min<std::size_t>(idx.size(), static_cast<std::size_t>(k)));
    return idx;
}

// Fine-step forward-Euler reference for the bicycle model.
inline dd::sim::VehicleState bicycle_fine_euler(dd::sim::VehicleState state,
                                                const dd::sim::Control& control, double duration,
                                                int steps) {
    const double dt = duration / steps;
    for (int i = 0; i < steps; ++i) state = dd::sim::step_vehicle(state, control, dt);
    return state;
}

// Central finite differences of a scalar function over a flat parameter
// vector.
template <typename LossFn>
Eigen::VectorXd finite_difference_gradient(const Eigen::VectorXd& theta, LossFn&& loss,
                                           double h = 1e-5) {
    Eigen::VectorXd grad(theta.size());
    Eigen::VectorXd probe = theta;
    for (long i = 0; i < theta.size(); ++i) {
        probe(i) = theta(i) + h;
        const double up = loss(probe);
        probe(i) = theta(i) - h;
        const double down = loss(probe);
        probe(i) = theta(i);
        grad(i) = (up - down) / (2.0 * h);
    }
    return grad;
}

// Separable synthetic training set. The steer bin and braking state are
// marked in dedicated channels (channel patterns survive both max pooling
// over grid rows and attention pooling), so control-similar records have
// nearby features by construction.
inline std::vector<dd::encoder::TrainingRecord> separable_dataset(const dd::encoder::EncoderConfig& cfg,
                                                                  int count,
                                                                  unsigned long seed) {
    const int steer_bins = std::min(9, cfg.grid_c - 3);
    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> steer_bin(0, steer_bins - 1);
    std::uniform_int_distribution<int> brake_bin(0, 1);
    std::normal_distribution<double> noise(0.0, 0.02);

    std::vector<dd::encoder::TrainingRecord> out;
    out.reserve(count);
    for (int i = 0; i < count; ++i) {
        const int sb = steer_bin(rng);
        const int bb = brake_bin(rng);
        dd::encoder::TrainingRecord rec;
        rec.steer = -0.8 + 1.6 * sb / (steer_bins - 1);  // bins far apart vs sigma 0.04
        rec.brake = bb == 0 ? 0.0 : 0.8;
        rec.intent = 0;
        rec.speed = 8.0;
        rec.features = Eigen::MatrixXd::Zero(cfg.grid_n, cfg.grid_c);
        for (int r = 0; r < cfg.grid_n; ++r) {
            for (int c = 0; c < cfg.grid_c; ++c) rec.features(r, c) = noise(rng);
        }
        // one channel per steer bin, the last two channels carry the brake state
        for (int r = 0; r < cfg.grid_n; ++r) {
            rec.features(r, sb) += 2.0;
            rec.features(r, cfg.grid_c - 1) += bb ? 2.0 : 0.0;
            rec.features(r, cfg.grid_c - 2) += bb ? 0.0 : 2.0;
        }
        out.push_back(std::move(rec));
    }
    return out;
}

}  // namespace oracles
