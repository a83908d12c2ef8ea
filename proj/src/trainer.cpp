#include "tsr/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "tsr/parallel.hpp"
#include "tsr/rng.hpp"

namespace tsr {

Evaluation evaluate(const NetworkSpec& spec, const ParamSet<float>& params,
                    const std::vector<LabeledExample>& examples, std::size_t lanes) {
    if (examples.empty()) throw std::invalid_argument("cannot evaluate an empty example list");
    const std::size_t n_classes = spec.num_classes();
    std::vector<double> losses(examples.size());
    Evaluation ev;
    ev.predictions.resize(examples.size());
    parallel_for(examples.size(), lanes, [&](std::size_t i) {
        const auto out = network_forward(spec, params, examples[i].image, Mode::eval);
        losses[i] = cross_entropy_loss(out.probs, one_hot<float>(examples[i].label, n_classes));
        ev.predictions[i] = static_cast<int>(argmax(out.probs.data()));
    });
    std::size_t hits = 0;
    for (std::size_t i = 0; i < examples.size(); ++i) {
        ev.loss += losses[i];
        hits += ev.predictions[i] == examples[i].label;
    }
    const auto n = static_cast<double>(examples.size());
    ev.loss /= n;
    ev.accuracy = static_cast<double>(hits) / n;
    return ev;
}

namespace {

void add_into(ParamSet<float>& acc, const ParamSet<float>& g) {
    for (std::size_t t = 0; t < acc.size(); ++t) {
        auto a = acc[t].data();
        const auto b = g[t].data();
        for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
    }
}

void scale(ParamSet<float>& acc, float divisor) {
    for (auto& t : acc) {
        for (float& v : t.data()) v /= divisor;
    }
}

}  // namespace

FitResult fit(const DatasetSplit& split, const TrainConfig& cfg, const FitOptions& options) {
    cfg.validate();
    if (split.train.empty()) throw std::invalid_argument("training split is empty");
    if (split.validation.empty()) throw std::invalid_argument("validation split is empty");
    const NetworkSpec& spec = options.spec;
    const std::size_t n_classes = spec.num_classes();
    const std::size_t lanes = std::max<std::size_t>(1, options.lanes);

    ParamSet<float> params;
    if (options.initial_params) {
        params = *options.initial_params;
    } else {
        CounterRng init = CounterRng::from_seed(cfg.seed, Stream::init);
        params = init_params<float>(spec, init);
    }

    AdamState<float> adam = AdamState<float>::zeros_like(params);
    PlateauTracker plateau;
    CounterRng shuffle_rng = CounterRng::from_seed(cfg.seed, Stream::shuffle);
    const CounterRng dropout_base = CounterRng::from_seed(cfg.seed, Stream::dropout);
    double lr = cfg.learning_rate;

    auto snapshot = [&](std::uint32_t epoch, double best) {
        return Checkpoint{spec, params, adam, lr, plateau, cfg.seed, shuffle_rng, epoch, best};
    };

    FitResult result;
    result.params = params;
    result.best_checkpoint = snapshot(0, 0.0);

    std::vector<std::size_t> order(split.train.size());
    std::vector<double> history;
    double best_val = -1.0;

    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        std::iota(order.begin(), order.end(), std::size_t{0});
        shuffle(order.begin(), order.end(), shuffle_rng);
        const CounterRng epoch_dropout = dropout_base.derive(epoch);

        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t count = std::min(cfg.batch_size, order.size() - start);
            std::vector<ParamSet<float>> grads(count);
            parallel_for(count, lanes, [&](std::size_t k) {
                const std::size_t pos = start + k;
                const LabeledExample& ex = split.train[order[pos]];
                CounterRng drop = epoch_dropout.derive(pos);
                auto out = network_forward(spec, params, ex.image, Mode::train, &drop);
                const auto g = softmax_xent_gradient(out.probs, one_hot<float>(ex.label, n_classes));
                grads[k] = network_backward(spec, params, out.cache, g);
            });
            ParamSet<float> batch = std::move(grads[0]);
            for (std::size_t k = 1; k < count; ++k) add_into(batch, grads[k]);
            scale(batch, static_cast<float>(count));
            adam_step(params, batch, adam, lr);
        }

        const Evaluation train = evaluate(spec, params, split.train, lanes);
        const Evaluation val = evaluate(spec, params, split.validation, lanes);
        const CurvePoint point{epoch, train.loss, train.accuracy, val.loss, val.accuracy, lr};
        result.curves.push_back(point);
        history.push_back(val.accuracy);
        if (options.on_epoch) options.on_epoch(point);

        if (plateau.observe(val.accuracy, cfg.lr_patience)) {
            lr = std::max(lr * cfg.lr_factor, cfg.min_lr);
        }
        if (val.accuracy > best_val) {
            best_val = val.accuracy;
            result.params = params;
            result.best_epoch = epoch;
            result.best_checkpoint = snapshot(static_cast<std::uint32_t>(epoch), best_val);
        }
        if (early_stopping_check(history, cfg.early_stop_patience).stop) {
            result.stopped_early = true;
            break;
        }
    }
    result.final_params = std::move(params);
    return result;
}

}  // namespace tsr
