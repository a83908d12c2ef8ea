#include "tsr/training.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace tsr {

void TrainConfig::validate() const {
    auto fail = [](const std::string& what) { throw std::invalid_argument(what); };
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) fail("learning_rate must be > 0");
    if (batch_size < 1) fail("batch_size must be >= 1");
    if (early_stop_patience < 1) fail("early_stop_patience must be >= 1");
    if (lr_patience < 1) fail("lr_patience must be >= 1");
    if (!(lr_factor > 0.0 && lr_factor < 1.0)) fail("lr_factor must be in (0, 1)");
    if (!(min_lr > 0.0)) fail("min_lr must be > 0");
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) fail("val_fraction must be in (0, 1)");
}

namespace {

template <typename T>
void check_one_hot(const BasicTensor<T>& probs, const BasicTensor<T>& target) {
    if (!(probs.shape() == target.shape())) {
        throw ShapeError("probabilities " + probs.shape().to_string() + " vs target " +
                         target.shape().to_string());
    }
    std::size_t ones = 0;
    for (const T v : target.data()) {
        if (v == T{1}) {
            ++ones;
        } else if (v != T{0}) {
            throw std::invalid_argument("target is not one-hot");
        }
    }
    if (ones != 1) throw std::invalid_argument("target is not one-hot");
}

}  // namespace

template <typename T>
double cross_entropy_loss(const BasicTensor<T>& probs, const BasicTensor<T>& target) {
    check_one_hot(probs, target);
    double loss = 0.0;
    for (std::size_t c = 0; c < probs.size(); ++c) {
        if (target[c] != T{0}) {
            loss -= static_cast<double>(target[c]) *
                    std::log(std::max(static_cast<double>(probs[c]), 1e-12));
        }
    }
    return loss;
}

template <typename T>
BasicTensor<T> softmax_xent_gradient(const BasicTensor<T>& probs, const BasicTensor<T>& target) {
    if (!(probs.shape() == target.shape())) {
        throw ShapeError("probabilities " + probs.shape().to_string() + " vs target " +
                         target.shape().to_string());
    }
    return elementwise(probs, target, ElementwiseOp::sub);
}

template <typename T>
AdamState<T> AdamState<T>::zeros_like(const ParamSet<T>& params) {
    AdamState state;
    for (const auto& p : params) {
        state.m.emplace_back(p.shape(), T{0});
        state.v.emplace_back(p.shape(), T{0});
    }
    return state;
}

template <typename T>
void adam_step(ParamSet<T>& params, const ParamSet<T>& grads, AdamState<T>& state, double lr) {
    if (params.size() != grads.size() || params.size() != state.m.size() ||
        params.size() != state.v.size()) {
        throw ShapeError("adam: parameter, gradient and moment counts differ");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!(params[i].shape() == grads[i].shape()) || !(params[i].shape() == state.m[i].shape()) ||
            !(params[i].shape() == state.v[i].shape())) {
            throw ShapeError("adam: shape mismatch at parameter " + std::to_string(i) + ": " +
                             params[i].shape().to_string() + " vs " + grads[i].shape().to_string());
        }
    }

    ++state.step;
    const double t = static_cast<double>(state.step);
    const T b1 = static_cast<T>(AdamState<T>::beta1);
    const T b2 = static_cast<T>(AdamState<T>::beta2);
    const T one_minus_b1 = static_cast<T>(1.0 - AdamState<T>::beta1);
    const T one_minus_b2 = static_cast<T>(1.0 - AdamState<T>::beta2);
    const T correction1 = static_cast<T>(1.0 - std::pow(AdamState<T>::beta1, t));
    const T correction2 = static_cast<T>(1.0 - std::pow(AdamState<T>::beta2, t));
    const T eps = static_cast<T>(AdamState<T>::epsilon);
    const T rate = static_cast<T>(lr);

    for (std::size_t i = 0; i < params.size(); ++i) {
        auto theta = params[i].data();
        const auto g = grads[i].data();
        auto m = state.m[i].data();
        auto v = state.v[i].data();
        for (std::size_t k = 0; k < theta.size(); ++k) {
            m[k] = b1 * m[k] + one_minus_b1 * g[k];
            v[k] = b2 * v[k] + one_minus_b2 * g[k] * g[k];
            const T m_hat = m[k] / correction1;
            const T v_hat = v[k] / correction2;
            theta[k] -= rate * m_hat / (std::sqrt(v_hat) + eps);
        }
    }
}

bool PlateauTracker::observe(double value, std::size_t patience) {
    if (value > best) {
        best = value;
        wait = 0;
        return false;
    }
    if (++wait >= patience) {
        wait = 0;
        return true;
    }
    return false;
}

double reduce_lr_on_plateau(std::span<const double> history, double current_lr,
                            const TrainConfig& cfg) {
    if (history.empty()) throw std::invalid_argument("reduce_lr_on_plateau: empty history");
    PlateauTracker tracker;
    bool reduce = false;
    for (const double v : history) reduce = tracker.observe(v, cfg.lr_patience);
    return reduce ? std::max(current_lr * cfg.lr_factor, cfg.min_lr) : current_lr;
}

EarlyStopDecision early_stopping_check(std::span<const double> history, std::size_t patience) {
    if (patience < 1) throw std::invalid_argument("early stopping patience must be >= 1");
    EarlyStopDecision decision;
    if (history.empty()) return decision;
    decision.best_epoch = static_cast<std::size_t>(
        std::max_element(history.begin(), history.end()) - history.begin());
    if (history.size() <= patience) return decision;

    const auto split = history.end() - static_cast<std::ptrdiff_t>(patience);
    const double best_before = *std::max_element(history.begin(), split);
    decision.stop = std::all_of(split, history.end(), [&](double v) { return !(v > best_before); });
    return decision;
}

#define TSR_INSTANTIATE(T)                                                                      \
    template double cross_entropy_loss<T>(const BasicTensor<T>&, const BasicTensor<T>&);       \
    template BasicTensor<T> softmax_xent_gradient<T>(const BasicTensor<T>&,                    \
                                                     const BasicTensor<T>&);                   \
    template struct AdamState<T>;                                                              \
    template void adam_step<T>(ParamSet<T>&, const ParamSet<T>&, AdamState<T>&, double);

TSR_INSTANTIATE(float)
TSR_INSTANTIATE(double)

#undef TSR_INSTANTIATE

}  // namespace tsr
